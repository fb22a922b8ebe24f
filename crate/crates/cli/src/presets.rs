//! Built-in experiment presets.
//!
//! | preset    | schedule                                   | algorithms                                   |
//! |-----------|--------------------------------------------|----------------------------------------------|
//! | `figure1` | sparse 1000, semi-sparse 1000, dense 1500  | NLMS, PNLMS, SM-NLMS, fixed ZA/RZA/EZA       |
//! | `figure2` | sparse 2000, semi-sparse 2000              | SM-NLMS, oracle, fixed RZA, RZA-ADP          |
//! | `figure3` | sparse 2000, semi-sparse 2000              | all baselines, fixed and adjustable variants |
//! | `figure4` | sparse 5000, semi-sparse 5000, AR(1) input | SM-NLMS, EZA-ADP                             |

use smadp_core::experiment::{
    AlgorithmDescriptor, AlgorithmKind, ExperimentConfig, DEFAULT_ALPHA_MAX,
};
use smadp_core::filters::{default_penalty, AlphaMode, AttractorKind, PnlmsParams};
use smadp_core::signal::{InputKind, Phase, PhaseSchedule, SystemKind};

pub const NLMS_STEP: f64 = 0.5;
pub const NLMS_DELTA_REG: f64 = 1e-8;
pub const DEFAULT_RUNS: usize = 200;
pub const DEFAULT_MASTER_SEED: u64 = 2024;

pub const PRESET_NAMES: [&str; 4] = ["figure1", "figure2", "figure3", "figure4"];

pub fn nlms() -> AlgorithmDescriptor {
    AlgorithmDescriptor::new(AlgorithmKind::Nlms {
        mu: NLMS_STEP,
        delta_reg: NLMS_DELTA_REG,
    })
}

pub fn pnlms() -> AlgorithmDescriptor {
    AlgorithmDescriptor::new(AlgorithmKind::Pnlms(PnlmsParams {
        mu: NLMS_STEP,
        ..PnlmsParams::default()
    }))
}

pub fn sm_nlms() -> AlgorithmDescriptor {
    AlgorithmDescriptor::new(AlgorithmKind::SmNlms)
}

pub fn oracle() -> AlgorithmDescriptor {
    AlgorithmDescriptor::new(AlgorithmKind::OracleSmNlms)
}

/// Penalized SM-NLMS with the default hyperparameters of its family.
pub fn penalized(kind: AttractorKind, mode: AlphaMode) -> AlgorithmDescriptor {
    AlgorithmDescriptor::new(AlgorithmKind::Penalized {
        penalty: default_penalty(kind),
        alpha0: DEFAULT_ALPHA_MAX / 10.0,
        alpha_max: DEFAULT_ALPHA_MAX,
        alpha_mode: mode,
        nonnegative_alpha: false,
    })
}

pub fn fixed(kind: AttractorKind) -> AlgorithmDescriptor {
    penalized(kind, AlphaMode::Frozen)
}

pub fn adp(kind: AttractorKind) -> AlgorithmDescriptor {
    penalized(kind, AlphaMode::PosteriorGradient)
}

fn schedule(phases: &[(SystemKind, usize)]) -> PhaseSchedule {
    PhaseSchedule::new(
        phases
            .iter()
            .map(|&(system, iterations)| Phase { system, iterations })
            .collect(),
    )
    .expect("preset schedules are non-empty")
}

fn base(phases: &[(SystemKind, usize)], algorithms: Vec<AlgorithmDescriptor>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(schedule(phases), algorithms);
    c.runs = DEFAULT_RUNS;
    c.master_seed = DEFAULT_MASTER_SEED;
    c
}

pub fn figure1() -> ExperimentConfig {
    use AttractorKind::*;
    base(
        &[
            (SystemKind::Sparse, 1000),
            (SystemKind::SemiSparse, 1000),
            (SystemKind::Dense, 1500),
        ],
        vec![
            nlms(),
            pnlms(),
            sm_nlms(),
            fixed(Za),
            fixed(Rza),
            fixed(Eza),
        ],
    )
}

pub fn figure2() -> ExperimentConfig {
    base(
        &[(SystemKind::Sparse, 2000), (SystemKind::SemiSparse, 2000)],
        vec![
            sm_nlms(),
            oracle(),
            fixed(AttractorKind::Rza),
            adp(AttractorKind::Rza),
        ],
    )
}

pub fn figure3() -> ExperimentConfig {
    use AttractorKind::*;
    base(
        &[(SystemKind::Sparse, 2000), (SystemKind::SemiSparse, 2000)],
        vec![
            nlms(),
            pnlms(),
            sm_nlms(),
            fixed(Za),
            fixed(Rza),
            fixed(Eza),
            adp(Za),
            adp(Rza),
            adp(Eza),
        ],
    )
}

pub fn figure4() -> ExperimentConfig {
    let mut c = base(
        &[(SystemKind::Sparse, 5000), (SystemKind::SemiSparse, 5000)],
        vec![sm_nlms(), adp(AttractorKind::Eza)],
    );
    c.input.kind = InputKind::Ar1;
    c
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "figure1" => Some(figure1()),
        "figure2" => Some(figure2()),
        "figure3" => Some(figure3()),
        "figure4" => Some(figure4()),
        _ => None,
    }
}

pub fn summary(name: &str) -> Option<&'static str> {
    Some(match name {
        "figure1" => {
            "fixed-penalty SM-NLMS family vs NLMS/PNLMS across sparse, semi-sparse and dense plants"
        }
        "figure2" => "RZA-SM-NLMS with adjustable penalty vs fixed penalty and the oracle SM-NLMS",
        "figure3" => "EZA-SM-NLMS-ADP against every baseline and fixed/adjustable variant",
        "figure4" => "EZA-SM-NLMS-ADP vs SM-NLMS under correlated (AR) excitation",
        _ => return None,
    })
}
