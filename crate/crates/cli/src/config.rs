//! TOML experiment configuration.
//!
//! A document starts from a preset (`figure1` unless `preset` is given) and
//! overrides individual settings. Every key is optional; unknown keys are
//! errors. Example:
//!
//! ```toml
//! preset = "figure2"
//! runs = 500
//! master_seed = 7
//! gamma = 0.0894427191     # default: sqrt(5) * sigma_n
//! taps = 64
//! sparse_support = [5, 21, 37, 53]
//! redraw_per_trial = false
//! steady_state_fraction = 0.2
//!
//! [noise]
//! sigma_n = 0.04
//!
//! [input]
//! kind = "ar1"             # white | ar1 | ar4
//! power = 1.0
//!
//! [[phases]]               # replaces the preset schedule
//! system = "sparse"        # sparse | semi_sparse | dense
//! iterations = 2000
//!
//! [[algorithms]]           # replaces the preset algorithm list
//! kind = "eza-sm-nlms-adp"
//! beta = 5.0
//! alpha_max = 1e-3
//!
//! [output]
//! dir = "out"
//! svg = true
//! db = true
//! ```
//!
//! Algorithm kinds and the keys they accept:
//!
//! | kind                         | keys                                                        |
//! |------------------------------|-------------------------------------------------------------|
//! | `nlms`                       | `mu`, `delta_reg`                                           |
//! | `pnlms`                      | `mu`, `rho_prop`, `delta_p`, `delta_reg`                    |
//! | `sm-nlms`, `oracle-sm-nlms`  | none                                                        |
//! | `za-sm-nlms`                 | `alpha`                                                     |
//! | `rza-sm-nlms`                | `alpha`, `epsilon_prime`                                    |
//! | `eza-sm-nlms`                | `alpha`, `beta`                                             |
//! | `za-sm-nlms-adp`             | `alpha0`, `alpha_max`, `alpha_mode`, `nonnegative_alpha`    |
//! | `rza-sm-nlms-adp`            | as above plus `epsilon_prime`                               |
//! | `eza-sm-nlms-adp`            | as above plus `beta`                                        |
//!
//! Every algorithm also accepts `label`. `alpha_mode` is one of
//! `posterior_gradient` (default), `posterior_error`, `frozen`.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use smadp_core::experiment::{
    default_gamma, AlgorithmDescriptor, AlgorithmKind, ExperimentConfig, DEFAULT_ALPHA_MAX,
};
use smadp_core::filters::{AlphaMode, AttractorKind, PnlmsParams};
use smadp_core::penalty::{PenaltySpec, DEFAULT_BETA, DEFAULT_EPSILON_PRIME};
use smadp_core::signal::{InputKind, Phase, PhaseSchedule, SystemKind};

use crate::presets;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config at line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("invalid config: {0}")]
    Semantic(String),
}

/// Where and how results are written.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub svg: bool,
    /// Summary figures in dB rather than linear units.
    pub db: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            dir: PathBuf::from("out"),
            svg: false,
            db: true,
        }
    }
}

/// A resolved configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub experiment: ExperimentConfig,
    pub output: OutputOptions,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<Spanned<String>>,
    runs: Option<Spanned<i64>>,
    master_seed: Option<u64>,
    gamma: Option<Spanned<f64>>,
    taps: Option<Spanned<i64>>,
    sparse_support: Option<Spanned<Vec<i64>>>,
    redraw_per_trial: Option<bool>,
    steady_state_fraction: Option<Spanned<f64>>,
    noise: Option<NoiseSection>,
    input: Option<InputSection>,
    phases: Option<Vec<PhaseSection>>,
    algorithms: Option<Vec<Spanned<AlgorithmSection>>>,
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    sigma_n: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSection {
    kind: Option<InputName>,
    power: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum InputName {
    White,
    Ar1,
    Ar4,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseSection {
    system: SystemName,
    iterations: Spanned<i64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum SystemName {
    Sparse,
    SemiSparse,
    Dense,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum AlgorithmName {
    Nlms,
    Pnlms,
    SmNlms,
    OracleSmNlms,
    ZaSmNlms,
    RzaSmNlms,
    EzaSmNlms,
    ZaSmNlmsAdp,
    RzaSmNlmsAdp,
    EzaSmNlmsAdp,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum AlphaModeName {
    PosteriorGradient,
    PosteriorError,
    Frozen,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgorithmSection {
    kind: AlgorithmName,
    label: Option<String>,
    mu: Option<f64>,
    delta_reg: Option<f64>,
    rho_prop: Option<f64>,
    delta_p: Option<f64>,
    alpha: Option<f64>,
    alpha0: Option<f64>,
    alpha_max: Option<f64>,
    alpha_mode: Option<AlphaModeName>,
    nonnegative_alpha: Option<bool>,
    epsilon_prime: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    svg: Option<bool>,
    db: Option<bool>,
}

/// Cap recorded for a fixed-penalty filter with strength `alpha`.
fn fixed_alpha_cap(alpha: f64) -> f64 {
    DEFAULT_ALPHA_MAX.max(alpha)
}

/// 1-based line of a byte offset.
fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn invalid<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            line: line_of(self.text, span),
            message: message.into(),
        })
    }

    fn positive_f64(&self, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            self.invalid(
                v.span(),
                format!("{key} must be finite and positive, got {x}"),
            )
        }
    }

    fn positive_usize(&self, key: &str, v: &Spanned<i64>) -> Result<usize, ConfigError> {
        let x = *v.get_ref();
        if x > 0 {
            Ok(x as usize)
        } else {
            self.invalid(
                v.span(),
                format!("{key} must be a positive integer, got {x}"),
            )
        }
    }

    fn algorithm(
        &self,
        sec: &Spanned<AlgorithmSection>,
    ) -> Result<AlgorithmDescriptor, ConfigError> {
        use AlgorithmName::*;
        let span = sec.span();
        let a = sec.get_ref();

        let allowed: &[&str] = match a.kind {
            Nlms => &["mu", "delta_reg"],
            Pnlms => &["mu", "rho_prop", "delta_p", "delta_reg"],
            SmNlms | OracleSmNlms => &[],
            ZaSmNlms => &["alpha"],
            RzaSmNlms => &["alpha", "epsilon_prime"],
            EzaSmNlms => &["alpha", "beta"],
            ZaSmNlmsAdp => &["alpha0", "alpha_max", "alpha_mode", "nonnegative_alpha"],
            RzaSmNlmsAdp => &[
                "alpha0",
                "alpha_max",
                "alpha_mode",
                "nonnegative_alpha",
                "epsilon_prime",
            ],
            EzaSmNlmsAdp => &[
                "alpha0",
                "alpha_max",
                "alpha_mode",
                "nonnegative_alpha",
                "beta",
            ],
        };
        let present = [
            ("mu", a.mu.is_some()),
            ("delta_reg", a.delta_reg.is_some()),
            ("rho_prop", a.rho_prop.is_some()),
            ("delta_p", a.delta_p.is_some()),
            ("alpha", a.alpha.is_some()),
            ("alpha0", a.alpha0.is_some()),
            ("alpha_max", a.alpha_max.is_some()),
            ("alpha_mode", a.alpha_mode.is_some()),
            ("nonnegative_alpha", a.nonnegative_alpha.is_some()),
            ("epsilon_prime", a.epsilon_prime.is_some()),
            ("beta", a.beta.is_some()),
        ];
        if let Some((key, _)) = present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            return self.invalid(
                span,
                format!("`{key}` does not apply to algorithm kind {:?}", a.kind),
            );
        }

        let attractor = match a.kind {
            ZaSmNlms | ZaSmNlmsAdp => Some(AttractorKind::Za),
            RzaSmNlms | RzaSmNlmsAdp => Some(AttractorKind::Rza),
            EzaSmNlms | EzaSmNlmsAdp => Some(AttractorKind::Eza),
            _ => None,
        };
        let kind = match (a.kind, attractor) {
            (Nlms, _) => {
                let mu = a.mu.unwrap_or(presets::NLMS_STEP);
                if !(mu > 0.0 && mu <= 2.0) {
                    return self.invalid(span, format!("NLMS mu must lie in (0, 2], got {mu}"));
                }
                let delta_reg = a.delta_reg.unwrap_or(presets::NLMS_DELTA_REG);
                if !(delta_reg.is_finite() && delta_reg >= 0.0) {
                    return self.invalid(span, format!("delta_reg must be >= 0, got {delta_reg}"));
                }
                AlgorithmKind::Nlms { mu, delta_reg }
            }
            (Pnlms, _) => {
                let d = PnlmsParams::default();
                let params = PnlmsParams {
                    mu: a.mu.unwrap_or(presets::NLMS_STEP),
                    rho_prop: a.rho_prop.unwrap_or(d.rho_prop),
                    delta_p: a.delta_p.unwrap_or(d.delta_p),
                    delta_reg: a.delta_reg.unwrap_or(d.delta_reg),
                };
                if let Err(e) = params.validate() {
                    return self.invalid(span, e.to_string());
                }
                AlgorithmKind::Pnlms(params)
            }
            (SmNlms, _) => AlgorithmKind::SmNlms,
            (OracleSmNlms, _) => AlgorithmKind::OracleSmNlms,
            (name, Some(family)) => {
                let penalty = match family {
                    AttractorKind::Za => PenaltySpec::L1,
                    AttractorKind::Rza => PenaltySpec::LogSum {
                        epsilon_prime: a.epsilon_prime.unwrap_or(DEFAULT_EPSILON_PRIME),
                    },
                    AttractorKind::Eza => PenaltySpec::ExpL0 {
                        beta: a.beta.unwrap_or(DEFAULT_BETA),
                    },
                };
                if let Err(e) = penalty.validate() {
                    return self.invalid(span, e.to_string());
                }
                let adjustable = matches!(name, ZaSmNlmsAdp | RzaSmNlmsAdp | EzaSmNlmsAdp);
                let (alpha0, alpha_max, alpha_mode) = if adjustable {
                    let alpha_max = a.alpha_max.unwrap_or(DEFAULT_ALPHA_MAX);
                    let mode = match a.alpha_mode.unwrap_or(AlphaModeName::PosteriorGradient) {
                        AlphaModeName::PosteriorGradient => AlphaMode::PosteriorGradient,
                        AlphaModeName::PosteriorError => AlphaMode::PosteriorError,
                        AlphaModeName::Frozen => AlphaMode::Frozen,
                    };
                    (a.alpha0.unwrap_or(alpha_max / 10.0), alpha_max, mode)
                } else {
                    let alpha = a.alpha.unwrap_or(DEFAULT_ALPHA_MAX / 10.0);
                    (alpha, fixed_alpha_cap(alpha), AlphaMode::Frozen)
                };
                if !(alpha_max.is_finite() && alpha_max > 0.0) {
                    return self
                        .invalid(span, format!("alpha_max must be positive, got {alpha_max}"));
                }
                if !(alpha0.is_finite() && (0.0..=alpha_max).contains(&alpha0)) {
                    return self.invalid(
                        span,
                        format!("alpha must lie in [0, {alpha_max}], got {alpha0}"),
                    );
                }
                AlgorithmKind::Penalized {
                    penalty,
                    alpha0,
                    alpha_max,
                    alpha_mode,
                    nonnegative_alpha: a.nonnegative_alpha.unwrap_or(false),
                }
            }
            (_, None) => unreachable!("every penalized kind has an attractor family"),
        };
        let mut desc = AlgorithmDescriptor::new(kind);
        if let Some(label) = &a.label {
            if label.trim().is_empty() || label.contains([',', '"', '\n']) {
                return self.invalid(
                    span,
                    format!("label {label:?} must be non-empty without commas or quotes"),
                );
            }
            desc = desc.with_label(label.clone());
        }
        Ok(desc)
    }

    fn resolve(&self, file: ConfigFile) -> Result<RunConfig, ConfigError> {
        let preset_name = match &file.preset {
            Some(p) => {
                if presets::preset(p.get_ref()).is_none() {
                    return self.invalid(
                        p.span(),
                        format!(
                            "unknown preset `{}` (expected one of {})",
                            p.get_ref(),
                            presets::PRESET_NAMES.join(", ")
                        ),
                    );
                }
                p.get_ref().clone()
            }
            None => "figure1".to_string(),
        };
        let mut c = presets::preset(&preset_name).expect("checked above");

        if let Some(v) = &file.runs {
            c.runs = self.positive_usize("runs", v)?;
        }
        if let Some(seed) = file.master_seed {
            c.master_seed = seed;
        }
        if let Some(v) = &file.taps {
            c.taps = self.positive_usize("taps", v)?;
        }
        if let Some(v) = &file.sparse_support {
            let mut support = Vec::new();
            for &m in v.get_ref() {
                if m < 0 || m as usize >= c.taps {
                    return self.invalid(
                        v.span(),
                        format!("sparse_support index {m} outside 0..{}", c.taps),
                    );
                }
                support.push(m as usize);
            }
            if support.is_empty() {
                return self.invalid(v.span(), "sparse_support must not be empty");
            }
            c.sparse_support = support;
        } else if c.sparse_support.iter().any(|&m| m >= c.taps) {
            return Err(ConfigError::Semantic(format!(
                "default sparse support {:?} does not fit {} taps; set sparse_support",
                c.sparse_support, c.taps
            )));
        }
        if let Some(flag) = file.redraw_per_trial {
            c.redraw_per_trial = flag;
        }
        if let Some(v) = &file.steady_state_fraction {
            let f = *v.get_ref();
            if !(f > 0.0 && f <= 1.0) {
                return self.invalid(
                    v.span(),
                    format!("steady_state_fraction must lie in (0, 1], got {f}"),
                );
            }
            c.steady_state_fraction = f;
        }
        if let Some(noise) = &file.noise {
            if let Some(v) = &noise.sigma_n {
                c.noise.sigma_n = self.positive_f64("sigma_n", v)?;
            }
        }
        c.gamma = match &file.gamma {
            Some(v) => self.positive_f64("gamma", v)?,
            None => default_gamma(c.noise.sigma_n),
        };
        if let Some(input) = &file.input {
            if let Some(kind) = input.kind {
                c.input.kind = match kind {
                    InputName::White => InputKind::WhiteGaussian,
                    InputName::Ar1 => InputKind::Ar1,
                    InputName::Ar4 => InputKind::Ar4,
                };
            }
            if let Some(v) = &input.power {
                c.input.input_power = self.positive_f64("input power", v)?;
            }
        }
        if let Some(phases) = &file.phases {
            let mut out = Vec::with_capacity(phases.len());
            for p in phases {
                out.push(Phase {
                    system: match p.system {
                        SystemName::Sparse => SystemKind::Sparse,
                        SystemName::SemiSparse => SystemKind::SemiSparse,
                        SystemName::Dense => SystemKind::Dense,
                    },
                    iterations: self.positive_usize("iterations", &p.iterations)?,
                });
            }
            c.schedule =
                PhaseSchedule::new(out).map_err(|e| ConfigError::Semantic(e.to_string()))?;
        }
        if let Some(algos) = &file.algorithms {
            c.algorithms = algos
                .iter()
                .map(|a| self.algorithm(a))
                .collect::<Result<_, _>>()?;
        }

        let mut output = OutputOptions::default();
        if let Some(o) = file.output {
            if let Some(dir) = o.dir {
                output.dir = dir;
            }
            if let Some(svg) = o.svg {
                output.svg = svg;
            }
            if let Some(db) = o.db {
                output.db = db;
            }
        }

        c.validate()
            .map_err(|e| ConfigError::Semantic(e.to_string()))?;
        Ok(RunConfig {
            preset: preset_name,
            experiment: c,
            output,
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text)?;
    Resolver { text }.resolve(file)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

fn algorithm_toml(out: &mut String, a: &AlgorithmDescriptor) {
    out.push_str("\n[[algorithms]]\n");
    let kind = match &a.kind {
        AlgorithmKind::Nlms { mu, delta_reg } => {
            writeln!(
                out,
                "kind = \"nlms\"\nmu = {mu:?}\ndelta_reg = {delta_reg:?}"
            )
            .unwrap();
            None
        }
        AlgorithmKind::Pnlms(p) => {
            writeln!(
                out,
                "kind = \"pnlms\"\nmu = {:?}\nrho_prop = {:?}\ndelta_p = {:?}\ndelta_reg = {:?}",
                p.mu, p.rho_prop, p.delta_p, p.delta_reg
            )
            .unwrap();
            None
        }
        AlgorithmKind::SmNlms => {
            out.push_str("kind = \"sm-nlms\"\n");
            None
        }
        AlgorithmKind::OracleSmNlms => {
            out.push_str("kind = \"oracle-sm-nlms\"\n");
            None
        }
        AlgorithmKind::Penalized {
            penalty,
            alpha0,
            alpha_max,
            alpha_mode,
            nonnegative_alpha,
        } => {
            let (family, param) = match penalty {
                PenaltySpec::L1 => ("za", None),
                PenaltySpec::LogSum { epsilon_prime } => {
                    ("rza", Some(("epsilon_prime", *epsilon_prime)))
                }
                PenaltySpec::ExpL0 { beta } => ("eza", Some(("beta", *beta))),
            };
            if *alpha_mode == AlphaMode::Frozen
                && *alpha_max == fixed_alpha_cap(*alpha0)
                && !nonnegative_alpha
            {
                writeln!(out, "kind = \"{family}-sm-nlms\"\nalpha = {alpha0:?}").unwrap();
            } else {
                let mode = match alpha_mode {
                    AlphaMode::PosteriorGradient => "posterior_gradient",
                    AlphaMode::PosteriorError => "posterior_error",
                    AlphaMode::Frozen => "frozen",
                };
                writeln!(
                    out,
                    "kind = \"{family}-sm-nlms-adp\"\nalpha0 = {alpha0:?}\nalpha_max = {alpha_max:?}\nalpha_mode = \"{mode}\"\nnonnegative_alpha = {nonnegative_alpha}"
                )
                .unwrap();
            }
            param
        }
    };
    if let Some((key, v)) = kind {
        writeln!(out, "{key} = {v:?}").unwrap();
    }
    writeln!(out, "label = \"{}\"", a.label).unwrap();
}

/// Renders a fully explicit configuration document that parses back to
/// `run` (with `preset` naming the starting point).
pub fn render_config(run: &RunConfig) -> String {
    let c = &run.experiment;
    let mut out = String::new();
    writeln!(out, "preset = \"{}\"", run.preset).unwrap();
    writeln!(out, "runs = {}", c.runs).unwrap();
    writeln!(out, "master_seed = {}", c.master_seed).unwrap();
    writeln!(out, "gamma = {:?}", c.gamma).unwrap();
    writeln!(out, "taps = {}", c.taps).unwrap();
    writeln!(out, "sparse_support = {:?}", c.sparse_support).unwrap();
    writeln!(out, "redraw_per_trial = {}", c.redraw_per_trial).unwrap();
    writeln!(out, "steady_state_fraction = {:?}", c.steady_state_fraction).unwrap();
    writeln!(out, "\n[noise]\nsigma_n = {:?}", c.noise.sigma_n).unwrap();
    writeln!(
        out,
        "\n[input]\nkind = \"{}\"\npower = {:?}",
        c.input.kind.name(),
        c.input.input_power
    )
    .unwrap();
    for p in c.schedule.phases() {
        writeln!(
            out,
            "\n[[phases]]\nsystem = \"{}\"\niterations = {}",
            p.system.name(),
            p.iterations
        )
        .unwrap();
    }
    for a in &c.algorithms {
        algorithm_toml(&mut out, a);
    }
    writeln!(
        out,
        "\n[output]\ndir = {:?}\nsvg = {}\ndb = {}",
        run.output.dir.display().to_string(),
        run.output.svg,
        run.output.db
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_figure1_with_defaults() {
        let run = parse_config_str("").unwrap();
        let c = &run.experiment;
        assert_eq!(run.preset, "figure1");
        let iters: Vec<usize> = c.schedule.phases().iter().map(|p| p.iterations).collect();
        assert_eq!(iters, vec![1000, 1000, 1500]);
        assert_eq!(c.noise.sigma_n, 0.04);
        assert_eq!(c.gamma, 5f64.sqrt() * 0.04);
        assert_eq!(c.taps, 64);
        for a in &c.algorithms {
            match &a.kind {
                AlgorithmKind::Nlms { mu, .. } => assert_eq!(*mu, 0.5),
                AlgorithmKind::Pnlms(p) => assert_eq!(p.mu, 0.5),
                AlgorithmKind::Penalized {
                    alpha_max,
                    alpha_mode,
                    ..
                } if *alpha_mode != AlphaMode::Frozen => assert_eq!(*alpha_max, 1e-3),
                _ => {}
            }
        }
        assert_eq!(run.output, OutputOptions::default());
    }

    #[test]
    fn figure2_preset() {
        let run = parse_config_str("preset = \"figure2\"").unwrap();
        let iters: Vec<(SystemKind, usize)> = run
            .experiment
            .schedule
            .phases()
            .iter()
            .map(|p| (p.system, p.iterations))
            .collect();
        assert_eq!(
            iters,
            vec![(SystemKind::Sparse, 2000), (SystemKind::SemiSparse, 2000)]
        );
        assert!(run
            .experiment
            .algorithms
            .iter()
            .any(|a| a.kind == AlgorithmKind::OracleSmNlms));
    }

    #[test]
    fn negative_gamma_reports_line() {
        let err = parse_config_str("runs = 3\ngamma = -1\n").unwrap_err();
        match err {
            ConfigError::Invalid { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("gamma"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gamma_follows_sigma_when_omitted() {
        let run = parse_config_str("[noise]\nsigma_n = 0.1\n").unwrap();
        assert_eq!(run.experiment.gamma, 5f64.sqrt() * 0.1);
    }

    #[test]
    fn unknown_keys_and_names_are_rejected() {
        let err = parse_config_str("runz = 3").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("runz"), "{err}");

        let err = parse_config_str("[[algorithms]]\nkind = \"lms-turbo\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lms-turbo") && msg.contains('2'), "{msg}");

        let err = parse_config_str("preset = \"figure9\"").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { line: 1, .. }));
    }

    #[test]
    fn inapplicable_algorithm_key_is_rejected() {
        let doc = "[[algorithms]]\nkind = \"za-sm-nlms\"\nbeta = 5.0\n";
        let err = parse_config_str(doc).unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
    }

    #[test]
    fn algorithm_overrides() {
        let doc = r#"
[[algorithms]]
kind = "eza-sm-nlms-adp"
beta = 7.0
alpha_max = 2e-3
alpha_mode = "posterior_error"
nonnegative_alpha = true

[[algorithms]]
kind = "rza-sm-nlms"
alpha = 0.01
label = "RZA strong"
"#;
        let run = parse_config_str(doc).unwrap();
        let a = &run.experiment.algorithms;
        assert_eq!(a.len(), 2);
        assert_eq!(
            a[0].kind,
            AlgorithmKind::Penalized {
                penalty: PenaltySpec::ExpL0 { beta: 7.0 },
                alpha0: 2e-4,
                alpha_max: 2e-3,
                alpha_mode: AlphaMode::PosteriorError,
                nonnegative_alpha: true,
            }
        );
        assert_eq!(a[0].label, "EZA-SM-NLMS-ADP-E");
        assert_eq!(a[1].label, "RZA strong");
    }

    #[test]
    fn bad_values_are_rejected() {
        for doc in [
            "runs = 0",
            "taps = 4",
            "sparse_support = [70]",
            "steady_state_fraction = 1.5",
            "[noise]\nsigma_n = 0.0",
            "[input]\npower = -2.0",
            "[[phases]]\nsystem = \"sparse\"\niterations = 0",
            "[[algorithms]]\nkind = \"nlms\"\nmu = 3.0",
            "[[algorithms]]\nkind = \"eza-sm-nlms\"\nbeta = -1.0",
            "[[algorithms]]\nkind = \"za-sm-nlms-adp\"\nalpha0 = 0.1",
            "[[algorithms]]\nkind = \"sm-nlms\"\n[[algorithms]]\nkind = \"sm-nlms\"",
            "[[phases]]\nsystem = \"medium\"\niterations = 5",
        ] {
            assert!(parse_config_str(doc).is_err(), "accepted: {doc}");
        }
    }

    #[test]
    fn rendered_presets_parse_back() {
        for name in presets::PRESET_NAMES {
            let run = parse_config_str(&format!("preset = \"{name}\"")).unwrap();
            let text = render_config(&run);
            let back = parse_config_str(&text).unwrap();
            assert_eq!(back, run, "{name}:\n{text}");
        }
    }
}
