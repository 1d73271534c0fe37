//! `clip-lab run`: one trajectory CSV per seed plus a summary.

use std::path::{Path, PathBuf};

use cliplab::clipping::{run_deterministic, run_stochastic, ClipConfig, RunOptions, Trajectory};
use cliplab::objectives::{
    exp_loss_constants, gen_synthetic_dataset, load_idx_dataset, make_exp_loss, make_noisy_quadratic,
    make_poly2d, make_quartic, ExpLoss, NoisyQuadratic, Objective, Poly2d, Quartic,
};
use cliplab::profiler::{fit_l0_l1, random_points, sample_landscape};
use cliplab::theory::{
    snm_params, theorem31_budget, theorem31_step_sizes, theorem32_params, BudgetInputs, SmoothnessConstants,
    Theorem32Constants,
};
use cliplab::{ParamVector, RngStream};
use rayon::prelude::*;

use crate::config::{
    ConstantsSpec, DatasetSpec, ExperimentConfig, GradientKind, InitSpec, ObjectiveSpec, Schedule, StepsSpec,
    Theorem32Choice,
};
use crate::csvio::{fmt_f64, Table};
use crate::error::{HarnessError, Result};

/// Stream ids under each run seed.
const INIT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Full logging up to this many steps, thinned beyond.
pub const FULL_RECORD_LIMIT: u64 = 100_000;

pub enum BuiltObjective {
    Quartic(Quartic),
    Poly2d(Poly2d),
    NoisyQuadratic(NoisyQuadratic),
    ExpLoss(ExpLoss),
}

impl BuiltObjective {
    pub fn as_dyn(&self) -> &dyn Objective {
        match self {
            BuiltObjective::Quartic(o) => o,
            BuiltObjective::Poly2d(o) => o,
            BuiltObjective::NoisyQuadratic(o) => o,
            BuiltObjective::ExpLoss(o) => o,
        }
    }

    /// Gradient steps per epoch: `⌈n / batch⌉` stochastic, 1 full-batch.
    fn steps_per_epoch(&self, gradient: GradientKind) -> Option<u64> {
        match self {
            BuiltObjective::ExpLoss(o) => Some(match (gradient, o.batch_size()) {
                (GradientKind::Stochastic, Some(b)) => o.data().len().div_ceil(b) as u64,
                _ => 1,
            }),
            _ => None,
        }
    }
}

fn check_input(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(HarnessError::config("objective.dataset", format!("{}: no such file", path.display())))
    }
}

pub fn build_objective(spec: &ObjectiveSpec) -> Result<BuiltObjective> {
    Ok(match spec {
        ObjectiveSpec::Quartic => BuiltObjective::Quartic(make_quartic()),
        ObjectiveSpec::Poly2d => BuiltObjective::Poly2d(make_poly2d()),
        ObjectiveSpec::NoisyQuadratic => BuiltObjective::NoisyQuadratic(make_noisy_quadratic()),
        ObjectiveSpec::ExpLoss {
            lambda,
            batch_size,
            dataset,
        } => {
            let data = match dataset {
                DatasetSpec::Synthetic {
                    n,
                    d,
                    radius,
                    margin,
                    seed,
                } => gen_synthetic_dataset(*n, *d, *radius, *margin, &mut RngStream::new(*seed, 0))?,
                DatasetSpec::Idx {
                    images,
                    labels,
                    digit_a,
                    digit_b,
                    radius,
                } => load_idx_dataset(check_input(images)?, check_input(labels)?, *digit_a, *digit_b, *radius)
                    .map_err(|e| HarnessError::config("objective.dataset", e))?,
            };
            let mut obj = make_exp_loss(data, *lambda)?;
            if let Some(b) = batch_size {
                obj = obj.with_batch_size(*b)?;
            }
            BuiltObjective::ExpLoss(obj)
        }
    })
}

pub fn resolve_constants(spec: &ConstantsSpec, obj: &BuiltObjective) -> Result<SmoothnessConstants> {
    let consts = match spec {
        ConstantsSpec::Certified => {
            let (l0, l1) = obj.as_dyn().certified_constants().ok_or_else(|| {
                HarnessError::config("optimizer.constants.source", "objective has no certified constants")
            })?;
            SmoothnessConstants::with_default_radius(l0, l1)?
        }
        ConstantsSpec::Explicit { l0, l1 } => SmoothnessConstants::with_default_radius(*l0, *l1)?,
        ConstantsSpec::ExpLoss { rho1, rho2 } => match obj {
            BuiltObjective::ExpLoss(o) => {
                let data = o.data();
                exp_loss_constants(data.radius(), data.dim(), o.lambda(), data.len(), *rho1, *rho2)
                    .map_err(|e| HarnessError::config("optimizer.constants", e))?
            }
            _ => return Err(HarnessError::config("optimizer.constants.source", "needs an exp_loss objective")),
        },
        ConstantsSpec::Fitted {
            lower,
            upper,
            samples,
            bins,
            seed,
        } => {
            let pts = random_points(lower, upper, *samples, &mut RngStream::new(*seed, 0))?;
            let fit = fit_l0_l1(&sample_landscape(obj.as_dyn(), &pts)?, *bins)?;
            SmoothnessConstants::with_default_radius(fit.l0, fit.l1)?
        }
    };
    Ok(consts)
}

/// Everything needed to run one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedPlan {
    pub seed: u64,
    pub x0: ParamVector,
    pub clip: ClipConfig,
    pub steps: u64,
    pub options: RunOptions,
    pub gradient: GradientKind,
}

/// A configured experiment with its objective and constants resolved.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub objective: BuiltObjective,
    pub constants: Option<SmoothnessConstants>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let objective = build_objective(&config.objective)?;
        let d = objective.as_dyn().dim();
        let dims_ok = match &config.init {
            InitSpec::Explicit { x0 } => x0.len() == d,
            InitSpec::RandomBox { lower, .. } => lower.len() == d,
            InitSpec::Zeros => true,
        };
        if !dims_ok {
            return Err(HarnessError::config("init", format!("objective dimension is {d}")));
        }
        let constants = config
            .optimizer
            .constants
            .as_ref()
            .map(|c| resolve_constants(c, &objective))
            .transpose()?;
        Ok(Experiment {
            config,
            objective,
            constants,
        })
    }

    fn x0(&self, seed: u64) -> Result<ParamVector> {
        Ok(match &self.config.init {
            InitSpec::Explicit { x0 } => ParamVector::new(x0.clone())?,
            InitSpec::Zeros => ParamVector::zeros(self.objective.as_dyn().dim()),
            InitSpec::RandomBox { lower, upper } => {
                let mut rng = RngStream::new(seed, INIT_STREAM);
                ParamVector::new(lower.iter().zip(upper).map(|(&lo, &hi)| rng.uniform_in(lo, hi)).collect())?
            }
        })
    }

    fn delta(&self, x0: &ParamVector) -> Result<Option<f64>> {
        let obj = self.objective.as_dyn();
        let f_star = self.config.run.f_star.or_else(|| obj.f_star());
        match f_star {
            Some(fs) => Ok(Some((obj.value(x0)? - fs).max(0.0))),
            None => Ok(None),
        }
    }

    pub fn plan(&self, seed: u64) -> Result<SeedPlan> {
        let o = &self.config.optimizer;
        let r = &self.config.run;
        let x0 = self.x0(seed)?;
        let auto_steps = r.steps == StepsSpec::Auto(crate::config::AutoKeyword::Auto);
        let delta = self.delta(&x0)?;
        let need_delta = || -> Result<f64> {
            delta.ok_or_else(|| HarnessError::config("run.f_star", "auto budget needs a known infimum"))
        };
        let budget_delta = if auto_steps { need_delta()? } else { delta.unwrap_or(0.0) };
        let consts = || self.constants.ok_or_else(|| HarnessError::config("optimizer.constants", "missing"));
        let cfg_err = |e: cliplab::Error| HarnessError::config("optimizer", e);
        let beta = o.beta.unwrap_or(0.0);
        let nu_default = if o.mode == cliplab::clipping::ClipMode::Normalized { 1.0 } else { 0.0 };
        let nu = o.nu.unwrap_or(nu_default);

        let (clip, auto_budget) = match o.schedule {
            Schedule::Explicit => {
                let gamma = o.gamma.unwrap_or(f64::INFINITY);
                let eta = o.eta.expect("validated");
                (ClipConfig::new(eta, gamma, beta, nu, o.mode).map_err(cfg_err)?, None)
            }
            Schedule::AutoTheorem31 => {
                let c = consts()?;
                let (eta, gamma) = theorem31_step_sizes(&c, beta).map_err(cfg_err)?;
                let eps = o.epsilon.expect("validated");
                let t = theorem31_budget(&BudgetInputs::deterministic(budget_delta, eps).map_err(cfg_err)?, eta, gamma)
                    .map_err(cfg_err)?;
                (ClipConfig::hard(eta, gamma, beta, nu).map_err(cfg_err)?, Some(t))
            }
            Schedule::AutoTheorem32 => {
                let c = consts()?;
                let inputs = BudgetInputs::new(budget_delta, o.epsilon.expect("validated"), o.sigma.expect("validated"))
                    .map_err(cfg_err)?;
                let which = match o.theorem32_constants {
                    Theorem32Choice::Stated => Theorem32Constants::Stated,
                    Theorem32Choice::Tight => Theorem32Constants::Tight,
                };
                let p = theorem32_params(&inputs, beta, &c, which).map_err(cfg_err)?;
                (ClipConfig::hard(p.eta, p.gamma, beta, nu).map_err(cfg_err)?, Some(p.steps))
            }
            Schedule::AutoSnm => {
                let c = consts()?;
                let inputs = BudgetInputs::new(budget_delta, o.epsilon.expect("validated"), o.sigma.expect("validated"))
                    .map_err(cfg_err)?;
                let p = snm_params(&inputs, &c).map_err(cfg_err)?;
                (ClipConfig::normalized(p.eta, p.beta).map_err(cfg_err)?, Some(p.steps))
            }
        };

        let per_epoch = self.objective.steps_per_epoch(r.gradient);
        let steps = match r.steps {
            StepsSpec::Fixed(t) => t,
            StepsSpec::Auto(_) => auto_budget.expect("validated: auto steps need an auto schedule"),
            StepsSpec::Epochs { epochs } => epochs * per_epoch.expect("validated: epochs need a dataset"),
        };
        let tail = match (r.tail_window, r.tail_epochs) {
            (Some(w), _) => w,
            (None, Some(e)) => e * per_epoch.expect("validated"),
            (None, None) => 1,
        }
        .min(steps);
        let stride = r
            .record_stride
            .unwrap_or(if steps <= FULL_RECORD_LIMIT { 1 } else { steps.div_ceil(FULL_RECORD_LIMIT) });
        let initial_momentum = r.initial_momentum.clone().map(ParamVector::new).transpose()?;
        Ok(SeedPlan {
            seed,
            x0,
            clip,
            steps,
            options: RunOptions {
                record_stride: stride,
                record_iterates: r.record_iterates,
                tail_window: tail,
                initial_momentum,
            },
            gradient: r.gradient,
        })
    }

    /// Runs one seed in memory. On failure the partial trajectory is returned
    /// alongside the error.
    pub fn run_seed(&self, plan: &SeedPlan) -> std::result::Result<Trajectory, Box<(cliplab::Error, Trajectory)>> {
        let obj = self.objective.as_dyn();
        let out = match plan.gradient {
            GradientKind::Exact => run_deterministic(obj, &plan.clip, &plan.x0, plan.steps, &plan.options),
            GradientKind::Stochastic => {
                let mut rng = RngStream::new(plan.seed, NOISE_STREAM);
                run_stochastic(obj, &plan.clip, &plan.x0, plan.steps, &mut rng, &plan.options)
            }
        };
        out.map_err(|f| {
            let f = *f;
            Box::new((f.error, *f.partial))
        })
    }
}

pub const SUMMARY_HEADER: [&str; 19] = [
    "seed",
    "status",
    "steps",
    "mode",
    "eta",
    "gamma",
    "beta",
    "nu",
    "initial_loss",
    "final_loss",
    "tail_mean_loss",
    "tail_len",
    "mean_grad_norm",
    "min_grad_norm",
    "final_grad_norm",
    "initial_lyapunov",
    "final_lyapunov",
    "max_step_norm",
    "delta",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub plan: SeedPlan,
    pub trajectory: Trajectory,
    pub error: Option<String>,
    pub delta: Option<f64>,
}

impl SeedOutcome {
    pub fn summary_row(&self) -> Vec<String> {
        let s = &self.trajectory.summary;
        let c = &self.plan.clip;
        vec![
            self.plan.seed.to_string(),
            if self.error.is_some() { "failed" } else { "ok" }.to_string(),
            s.steps.to_string(),
            c.mode.to_string(),
            fmt_f64(c.eta),
            fmt_f64(c.gamma),
            fmt_f64(c.beta),
            fmt_f64(c.nu),
            fmt_f64(s.initial_loss),
            fmt_f64(s.final_loss),
            fmt_f64(s.tail_mean_loss),
            s.tail_len.to_string(),
            fmt_f64(s.mean_grad_norm),
            fmt_f64(s.min_grad_norm),
            fmt_f64(s.final_grad_norm),
            fmt_f64(s.initial_lyapunov),
            fmt_f64(s.final_lyapunov),
            fmt_f64(s.max_step_norm),
            self.delta.map(fmt_f64).unwrap_or_default(),
        ]
    }
}

pub fn trajectory_table(tr: &Trajectory, dim: usize, with_iterates: bool) -> Table {
    let mut header: Vec<String> = ["t", "loss", "grad_norm", "lyapunov", "step_norm"].map(String::from).to_vec();
    if with_iterates {
        header.extend((0..dim).map(|j| format!("x{j}")));
    }
    let mut table = Table::new(header);
    for r in &tr.records {
        let mut row = vec![
            r.t.to_string(),
            fmt_f64(r.loss),
            fmt_f64(r.grad_norm),
            fmt_f64(r.lyapunov),
            fmt_f64(r.step_norm),
        ];
        if with_iterates {
            match &r.x {
                Some(x) => row.extend(x.as_slice().iter().map(|v| fmt_f64(*v))),
                None => row.extend(std::iter::repeat_n(String::new(), dim)),
            }
        }
        table.push(row);
    }
    table
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub seeds: Vec<SeedOutcome>,
    pub summary: Table,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.seeds.iter().filter(|s| s.error.is_some()).count()
    }
}

/// Runs every seed in memory (in parallel) without writing files.
pub fn execute(exp: &Experiment) -> Result<Vec<SeedOutcome>> {
    let plans: Vec<SeedPlan> = exp.config.run.seeds.iter().map(|&s| exp.plan(s)).collect::<Result<_>>()?;
    plans
        .into_par_iter()
        .map(|plan| {
            let delta = exp.delta(&plan.x0)?;
            let (trajectory, error) = match exp.run_seed(&plan) {
                Ok(t) => (t, None),
                Err(b) => (b.1, Some(b.0.to_string())),
            };
            Ok(SeedOutcome {
                plan,
                trajectory,
                error,
                delta,
            })
        })
        .collect()
}

pub fn summary_table(seeds: &[SeedOutcome]) -> Table {
    let mut t = Table::new(SUMMARY_HEADER);
    for s in seeds {
        t.push(s.summary_row());
    }
    t
}

pub fn trajectory_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("trajectory_seed{seed}.csv"))
}

/// Runs the experiment and writes `trajectory_seed<k>.csv` per seed,
/// `summary.csv`, and `errors.csv` when any seed failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_in(cfg, &cfg.output.dir)
}

pub fn run_experiment_in(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    let exp = Experiment::new(cfg.clone())?;
    let seeds = execute(&exp)?;
    std::fs::create_dir_all(out_dir)?;
    let dim = exp.objective.as_dyn().dim();
    seeds.par_iter().try_for_each(|s| {
        trajectory_table(&s.trajectory, dim, cfg.run.record_iterates).write(&trajectory_file(out_dir, s.plan.seed))
    })?;
    let summary = summary_table(&seeds);
    summary.write(&out_dir.join("summary.csv"))?;
    let errors_path = out_dir.join("errors.csv");
    if seeds.iter().any(|s| s.error.is_some()) {
        let mut t = Table::new(["seed", "last_good_step", "error"]);
        for s in seeds.iter().filter(|s| s.error.is_some()) {
            t.push(vec![
                s.plan.seed.to_string(),
                s.trajectory.final_state.t.to_string(),
                s.error.clone().unwrap_or_default(),
            ]);
        }
        t.write(&errors_path)?;
    } else if errors_path.exists() {
        std::fs::remove_file(&errors_path)?;
    }
    Ok(ExperimentOutcome {
        out_dir: out_dir.to_path_buf(),
        seeds,
        summary,
    })
}
