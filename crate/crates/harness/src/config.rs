//! Experiment configuration (TOML).
//!
//! ```toml
//! [objective]
//! kind = "quartic"            # quartic | poly2d | noisy_quadratic | exp_loss
//!
//! [optimizer]
//! schedule = "auto-theorem31" # explicit | auto-theorem31 | auto-theorem32 | auto-snm
//! mode = "hard"               # hard | soft | normalized
//! beta = 0.9
//! nu = 0.7
//! epsilon = 0.05
//! constants = { source = "certified" }
//!
//! [init]
//! kind = "explicit"
//! x0 = [1.0]
//!
//! [run]
//! steps = "auto"              # integer | "auto" | { epochs = N }
//! seeds = [2020]
//!
//! [output]
//! dir = "out/quartic-det"
//! ```
//!
//! Parse errors and validation errors name the offending field path.

use std::path::PathBuf;

use cliplab::clipping::ClipMode;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub optimizer: OptimizerSpec,
    pub init: InitSpec,
    pub run: RunSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quartic,
    Poly2d,
    NoisyQuadratic,
    ExpLoss {
        lambda: f64,
        /// Mini-batch size for stochastic gradients.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        batch_size: Option<usize>,
        dataset: DatasetSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        n: usize,
        d: usize,
        radius: f64,
        margin: f64,
        seed: u64,
    },
    /// A binary task from IDX image/label files (+1 for `digit_a`).
    Idx {
        images: PathBuf,
        labels: PathBuf,
        digit_a: u8,
        digit_b: u8,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    #[default]
    Explicit,
    AutoTheorem31,
    AutoTheorem32,
    AutoSnm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem32Choice {
    /// `A = B = 1.01`.
    #[default]
    Stated,
    /// `A = B = 1.002`.
    Tight,
}

fn default_mode() -> ClipMode {
    ClipMode::Hard
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default = "default_mode")]
    pub mode: ClipMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub theorem32_constants: Theorem32Choice,
}

/// Where the `(L0, L1)` pair for an auto schedule comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstantsSpec {
    /// The objective's analytic certificate.
    Certified,
    Explicit { l0: f64, l1: f64 },
    /// The exponential-loss certificate for the configured dataset.
    ExpLoss { rho1: f64, rho2: f64 },
    /// Envelope fitted to `samples` random points in the box.
    Fitted {
        lower: Vec<f64>,
        upper: Vec<f64>,
        samples: usize,
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_bins() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Explicit { x0: Vec<f64> },
    /// Uniform in the box, drawn per seed.
    RandomBox { lower: Vec<f64>, upper: Vec<f64> },
    /// The origin, in whatever dimension the objective has.
    Zeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepsSpec {
    Fixed(u64),
    /// Budget from the auto schedule.
    Auto(AutoKeyword),
    /// `epochs · ⌈n / batch⌉` steps on a dataset objective.
    Epochs { epochs: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientKind {
    #[default]
    Exact,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub steps: StepsSpec,
    #[serde(default)]
    pub gradient: GradientKind,
    pub seeds: Vec<u64>,
    /// Iterates averaged into the tail loss (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_window: Option<u64>,
    /// Tail window in epochs, for dataset objectives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_epochs: Option<u64>,
    /// Infimum used for `Δ = F(x0) − F*` when the objective has none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    /// Default: every step up to 10⁵ steps, else every ⌈T/10⁵⌉-th.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub record_iterates: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_momentum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out") }
    }
}

/// Grid for `clip-lab profile --grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub per_axis: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg = Self::parse_unvalidated(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_unvalidated(s: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(&path, e.into_inner().message())
        })
    }

    pub fn from_value(v: toml::Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(&path, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_value(&self) -> Result<toml::Value> {
        toml::Value::try_from(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Parameter dimension implied by the objective, when known without I/O.
    pub fn static_dim(&self) -> Option<usize> {
        match &self.objective {
            ObjectiveSpec::Quartic | ObjectiveSpec::NoisyQuadratic => Some(1),
            ObjectiveSpec::Poly2d => Some(2),
            ObjectiveSpec::ExpLoss { dataset, .. } => match dataset {
                DatasetSpec::Synthetic { d, .. } => Some(*d),
                DatasetSpec::Idx { .. } => None,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_objective()?;
        self.validate_optimizer()?;
        self.validate_init()?;
        self.validate_run()?;
        if let Some(p) = &self.profile {
            check_box("profile", &p.lower, &p.upper, self.static_dim())?;
            if p.per_axis < 2 {
                return Err(HarnessError::config("profile.per_axis", "must be at least 2"));
            }
            if p.bins < 2 {
                return Err(HarnessError::config("profile.bins", "must be at least 2"));
            }
        }
        Ok(())
    }

    fn validate_objective(&self) -> Result<()> {
        if let ObjectiveSpec::ExpLoss {
            lambda,
            batch_size,
            dataset,
        } = &self.objective
        {
            positive("objective.lambda", *lambda)?;
            if *batch_size == Some(0) {
                return Err(HarnessError::config("objective.batch_size", "must be positive"));
            }
            match dataset {
                DatasetSpec::Synthetic {
                    n, d, radius, margin, ..
                } => {
                    if *n < 2 {
                        return Err(HarnessError::config("objective.dataset.n", "must be at least 2"));
                    }
                    if *d == 0 {
                        return Err(HarnessError::config("objective.dataset.d", "must be positive"));
                    }
                    positive("objective.dataset.radius", *radius)?;
                    if !(*margin >= 0.0 && margin.is_finite()) {
                        return Err(HarnessError::config("objective.dataset.margin", "must be finite and >= 0"));
                    }
                }
                DatasetSpec::Idx {
                    digit_a,
                    digit_b,
                    radius,
                    ..
                } => {
                    if digit_a == digit_b {
                        return Err(HarnessError::config("objective.dataset.digit_b", "must differ from digit_a"));
                    }
                    positive("objective.dataset.radius", *radius)?;
                }
            }
        }
        Ok(())
    }

    fn validate_optimizer(&self) -> Result<()> {
        let o = &self.optimizer;
        let forbid = |name: &str, present: bool, why: &str| -> Result<()> {
            if present {
                Err(HarnessError::config(&format!("optimizer.{name}"), why))
            } else {
                Ok(())
            }
        };
        let require = |name: &str, present: bool, why: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(HarnessError::config(&format!("optimizer.{name}"), why))
            }
        };
        if let Some(v) = o.eta {
            positive("optimizer.eta", v)?;
        }
        if let Some(v) = o.gamma {
            if !(v > 0.0) {
                return Err(HarnessError::config("optimizer.gamma", "must be positive (inf disables clipping)"));
            }
        }
        if let Some(v) = o.beta {
            if !(0.0..1.0).contains(&v) {
                return Err(HarnessError::config("optimizer.beta", "must lie in [0, 1)"));
            }
        }
        if let Some(v) = o.nu {
            if !(0.0..=1.0).contains(&v) {
                return Err(HarnessError::config("optimizer.nu", "must lie in [0, 1]"));
            }
        }
        if let Some(v) = o.epsilon {
            positive("optimizer.epsilon", v)?;
        }
        if let Some(v) = o.sigma {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(HarnessError::config("optimizer.sigma", "must be finite and >= 0"));
            }
        }
        if o.mode == ClipMode::Normalized && o.nu.is_some_and(|nu| nu != 1.0) {
            return Err(HarnessError::config("optimizer.nu", "normalized mode requires nu = 1"));
        }
        let auto_set = "is computed by the auto schedule; remove it";
        match o.schedule {
            Schedule::Explicit => {
                require("eta", o.eta.is_some(), "required by the explicit schedule")?;
                if o.mode != ClipMode::Normalized {
                    require("gamma", o.gamma.is_some(), "required by the explicit schedule")?;
                } else {
                    forbid("gamma", o.gamma.is_some(), "unused in normalized mode")?;
                }
                forbid("epsilon", o.epsilon.is_some(), "only used by auto schedules")?;
                forbid("sigma", o.sigma.is_some(), "only used by auto schedules")?;
                forbid("constants", o.constants.is_some(), "only used by auto schedules")?;
                if self.run.steps == StepsSpec::Auto(AutoKeyword::Auto) {
                    return Err(HarnessError::config("run.steps", "\"auto\" needs an auto schedule"));
                }
            }
            Schedule::AutoTheorem31 | Schedule::AutoTheorem32 => {
                forbid("eta", o.eta.is_some(), auto_set)?;
                forbid("gamma", o.gamma.is_some(), auto_set)?;
                require("epsilon", o.epsilon.is_some(), "required by the auto schedule")?;
                require("constants", o.constants.is_some(), "required by the auto schedule")?;
                if o.mode != ClipMode::Hard {
                    return Err(HarnessError::config("optimizer.mode", "auto step-size rules are for hard clipping"));
                }
                if o.schedule == Schedule::AutoTheorem32 {
                    require("sigma", o.sigma.is_some(), "required by auto-theorem32")?;
                    let eps = o.epsilon.unwrap_or(0.0);
                    if eps > 0.1 {
                        return Err(HarnessError::config("optimizer.epsilon", "auto-theorem32 needs epsilon <= 0.1"));
                    }
                    if o.sigma.is_some_and(|s| s < 1.0) {
                        return Err(HarnessError::config("optimizer.sigma", "auto-theorem32 needs sigma >= 1"));
                    }
                } else {
                    forbid("sigma", o.sigma.is_some(), "unused by auto-theorem31")?;
                }
            }
            Schedule::AutoSnm => {
                forbid("eta", o.eta.is_some(), auto_set)?;
                forbid("gamma", o.gamma.is_some(), "unused in normalized mode")?;
                forbid("beta", o.beta.is_some(), auto_set)?;
                require("epsilon", o.epsilon.is_some(), "required by auto-snm")?;
                require("sigma", o.sigma.is_some(), "required by auto-snm")?;
                require("constants", o.constants.is_some(), "required by auto-snm")?;
                if o.mode != ClipMode::Normalized {
                    return Err(HarnessError::config("optimizer.mode", "auto-snm requires mode = \"normalized\""));
                }
            }
        }
        if o.schedule != Schedule::AutoTheorem32 && o.theorem32_constants != Theorem32Choice::Stated {
            return Err(HarnessError::config("optimizer.theorem32_constants", "only used by auto-theorem32"));
        }
        if let Some(c) = &o.constants {
            match c {
                ConstantsSpec::Certified => {
                    if matches!(self.objective, ObjectiveSpec::ExpLoss { .. }) {
                        return Err(HarnessError::config(
                            "optimizer.constants.source",
                            "exp_loss has no fixed certificate; use source = \"exp_loss\"",
                        ));
                    }
                }
                ConstantsSpec::Explicit { l0, l1 } => {
                    positive("optimizer.constants.l0", *l0)?;
                    if !(*l1 >= 0.0 && l1.is_finite()) {
                        return Err(HarnessError::config("optimizer.constants.l1", "must be finite and >= 0"));
                    }
                }
                ConstantsSpec::ExpLoss { rho1, rho2 } => {
                    if !matches!(self.objective, ObjectiveSpec::ExpLoss { .. }) {
                        return Err(HarnessError::config("optimizer.constants.source", "exp_loss constants need an exp_loss objective"));
                    }
                    positive("optimizer.constants.rho1", *rho1)?;
                    positive("optimizer.constants.rho2", *rho2)?;
                }
                ConstantsSpec::Fitted {
                    lower,
                    upper,
                    samples,
                    bins,
                    ..
                } => {
                    check_box("optimizer.constants", lower, upper, self.static_dim())?;
                    if *samples < 2 {
                        return Err(HarnessError::config("optimizer.constants.samples", "must be at least 2"));
                    }
                    if *bins < 2 {
                        return Err(HarnessError::config("optimizer.constants.bins", "must be at least 2"));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_init(&self) -> Result<()> {
        let dim = self.static_dim();
        match &self.init {
            InitSpec::Explicit { x0 } => {
                if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
                    return Err(HarnessError::config("init.x0", "must be a nonempty list of finite numbers"));
                }
                if let Some(d) = dim {
                    if x0.len() != d {
                        return Err(HarnessError::config("init.x0", format!("expected {d} entries, found {}", x0.len())));
                    }
                }
            }
            InitSpec::RandomBox { lower, upper } => check_box("init", lower, upper, dim)?,
            InitSpec::Zeros => {}
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<()> {
        let r = &self.run;
        if r.seeds.is_empty() {
            return Err(HarnessError::config("run.seeds", "must list at least one seed"));
        }
        let mut sorted = r.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::config("run.seeds", "seeds must be distinct"));
        }
        let is_dataset = matches!(self.objective, ObjectiveSpec::ExpLoss { .. });
        match r.steps {
            StepsSpec::Fixed(0) => return Err(HarnessError::config("run.steps", "must be at least 1")),
            StepsSpec::Epochs { epochs } => {
                if !is_dataset {
                    return Err(HarnessError::config("run.steps.epochs", "epochs need a dataset objective"));
                }
                if epochs == 0 {
                    return Err(HarnessError::config("run.steps.epochs", "must be at least 1"));
                }
            }
            _ => {}
        }
        if r.tail_epochs.is_some() {
            if !is_dataset {
                return Err(HarnessError::config("run.tail_epochs", "epochs need a dataset objective"));
            }
            if r.tail_window.is_some() {
                return Err(HarnessError::config("run.tail_epochs", "conflicts with run.tail_window"));
            }
        }
        if r.tail_window == Some(0) || r.tail_epochs == Some(0) {
            return Err(HarnessError::config("run.tail_window", "must be at least 1"));
        }
        if r.record_stride == Some(0) {
            return Err(HarnessError::config("run.record_stride", "must be at least 1"));
        }
        if r.gradient == GradientKind::Stochastic {
            let ok = match &self.objective {
                ObjectiveSpec::NoisyQuadratic => true,
                ObjectiveSpec::ExpLoss { batch_size, .. } => batch_size.is_some(),
                _ => false,
            };
            if !ok {
                return Err(HarnessError::config(
                    "run.gradient",
                    "stochastic gradients need noisy_quadratic or exp_loss with batch_size",
                ));
            }
        }
        if let Some(m0) = &r.initial_momentum {
            if m0.iter().any(|v| !v.is_finite()) {
                return Err(HarnessError::config("run.initial_momentum", "must be finite"));
            }
            if let Some(d) = self.static_dim() {
                if m0.len() != d {
                    return Err(HarnessError::config("run.initial_momentum", format!("expected {d} entries")));
                }
            }
        }
        if let Some(f) = r.f_star {
            if !f.is_finite() {
                return Err(HarnessError::config("run.f_star", "must be finite"));
            }
        }
        Ok(())
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn check_box(prefix: &str, lower: &[f64], upper: &[f64], dim: Option<usize>) -> Result<()> {
    if lower.is_empty() || lower.len() != upper.len() {
        return Err(HarnessError::config(&format!("{prefix}.upper"), "lower and upper must be nonempty and equal length"));
    }
    if let Some(d) = dim {
        if lower.len() != d {
            return Err(HarnessError::config(&format!("{prefix}.lower"), format!("expected {d} entries")));
        }
    }
    for (j, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(HarnessError::config(&format!("{prefix}.lower[{j}]"), format!("invalid bounds [{lo}, {hi}]")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUARTIC: &str = r#"
[objective]
kind = "quartic"

[optimizer]
schedule = "auto-theorem31"
beta = 0.9
nu = 0.7
epsilon = 0.05
constants = { source = "certified" }

[init]
kind = "explicit"
x0 = [1.0]

[run]
steps = "auto"
seeds = [2020]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(QUARTIC).unwrap();
        assert_eq!(cfg.optimizer.schedule, Schedule::AutoTheorem31);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_field_names_path() {
        let bad = QUARTIC.replace("nu = 0.7", "nu = 0.7\netaa = 1.0");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("optimizer") && e.contains("etaa"), "{e}");
    }

    #[test]
    fn type_error_names_path() {
        let bad = QUARTIC.replace("beta = 0.9", "beta = \"high\"");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("optimizer.beta"), "{e}");
    }

    #[test]
    fn explicit_and_auto_conflict() {
        let bad = QUARTIC.replace("nu = 0.7", "nu = 0.7\neta = 0.1");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(matches!(e, HarnessError::Config(ref m) if m.starts_with("optimizer.eta")), "{e}");
    }

    #[test]
    fn auto_requires_epsilon() {
        let bad = QUARTIC.replace("epsilon = 0.05\n", "");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("optimizer.epsilon"), "{e}");
    }

    #[test]
    fn theorem32_requires_sigma() {
        let bad = QUARTIC.replace("auto-theorem31", "auto-theorem32");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("optimizer.sigma"), "{e}");
    }

    #[test]
    fn dimension_is_checked() {
        let bad = QUARTIC.replace("x0 = [1.0]", "x0 = [1.0, 2.0]");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("init.x0"), "{e}");
    }

    #[test]
    fn infinite_gamma_round_trips() {
        let src = r#"
[objective]
kind = "noisy_quadratic"

[optimizer]
eta = 0.5
gamma = inf
beta = 0.5
nu = 1.0

[init]
kind = "random_box"
lower = [-1.0]
upper = [1.0]

[run]
steps = 100
gradient = "stochastic"
seeds = [1, 2]
tail_window = 10
"#;
        let cfg = ExperimentConfig::from_toml_str(src).unwrap();
        assert_eq!(cfg.optimizer.gamma, Some(f64::INFINITY));
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
