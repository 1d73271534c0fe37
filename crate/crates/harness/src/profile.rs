//! `clip-lab profile`: local smoothness samples and the fitted `(L0, L1)`
//! envelope.
//!
//! `--grid` samples the `[profile]` box of the config on a regular grid and
//! writes `landscape.csv` as `point, x0.., grad_norm, hess_norm`.
//! `--trajectory` runs the experiment and samples every recorded iterate,
//! writing `landscape.csv` as `seed, t, grad_norm, hess_norm`.
//! Both write `envelope.csv`: `samples, l0, l1, inflation, violations,
//! rank_correlation`.

use std::path::{Path, PathBuf};

use cliplab::profiler::{fit_l0_l1, grid_points, rank_correlation, sample_landscape, EnvelopeFit, LandscapeSample};
use cliplab::ParamVector;

use crate::config::ExperimentConfig;
use crate::csvio::{fmt_f64, Table};
use crate::error::{HarnessError, Result};
use crate::experiment::{execute, Experiment};

const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Grid,
    Trajectory,
}

#[derive(Debug, Clone)]
pub struct ProfileOutcome {
    pub samples: Vec<LandscapeSample>,
    pub fit: EnvelopeFit,
    /// Spearman correlation between gradient norm and Hessian norm.
    pub rank_correlation: f64,
    pub landscape: Table,
    pub envelope: Table,
    pub out_dir: PathBuf,
}

pub fn profile(cfg: &ExperimentConfig, mode: ProfileMode) -> Result<ProfileOutcome> {
    profile_in(cfg, mode, &cfg.output.dir)
}

pub fn profile_in(cfg: &ExperimentConfig, mode: ProfileMode, out_dir: &Path) -> Result<ProfileOutcome> {
    let mut cfg = cfg.clone();
    let bins = cfg.profile.as_ref().map_or(DEFAULT_BINS, |p| p.bins);
    let (samples, landscape) = match mode {
        ProfileMode::Grid => {
            let spec = cfg
                .profile
                .clone()
                .ok_or_else(|| HarnessError::config("profile", "--grid needs a [profile] table"))?;
            let exp = Experiment::new(cfg)?;
            let pts = grid_points(&spec.lower, &spec.upper, spec.per_axis)?;
            let samples = sample_landscape(exp.objective.as_dyn(), &pts)?;
            let d = spec.lower.len();
            let mut header = vec!["point".to_string()];
            header.extend((0..d).map(|j| format!("x{j}")));
            header.extend(["grad_norm", "hess_norm"].map(String::from));
            let mut t = Table::new(header);
            for (s, x) in samples.iter().zip(&pts) {
                let mut row = vec![s.tag.to_string()];
                row.extend(x.as_slice().iter().map(|v| fmt_f64(*v)));
                row.extend([fmt_f64(s.grad_norm), fmt_f64(s.hess_norm)]);
                t.push(row);
            }
            (samples, t)
        }
        ProfileMode::Trajectory => {
            cfg.run.record_iterates = true;
            let exp = Experiment::new(cfg)?;
            let seeds = execute(&exp)?;
            let mut pts: Vec<ParamVector> = Vec::new();
            let mut ids: Vec<(u64, u64)> = Vec::new();
            for s in &seeds {
                if let Some(e) = &s.error {
                    return Err(HarnessError::Runtime(format!("seed {}: {e}", s.plan.seed)));
                }
                for r in &s.trajectory.records {
                    pts.push(r.x.clone().expect("iterates recorded"));
                    ids.push((s.plan.seed, r.t));
                }
            }
            let samples = sample_landscape(exp.objective.as_dyn(), &pts)?;
            let mut t = Table::new(["seed", "t", "grad_norm", "hess_norm"]);
            for (s, (seed, step)) in samples.iter().zip(&ids) {
                t.push(vec![seed.to_string(), step.to_string(), fmt_f64(s.grad_norm), fmt_f64(s.hess_norm)]);
            }
            (samples, t)
        }
    };
    let fit = fit_l0_l1(&samples, bins)?;
    let g: Vec<f64> = samples.iter().map(|s| s.grad_norm).collect();
    let h: Vec<f64> = samples.iter().map(|s| s.hess_norm).collect();
    let rho = rank_correlation(&g, &h)?;
    let mut envelope = Table::new(["samples", "l0", "l1", "inflation", "violations", "rank_correlation"]);
    envelope.push(vec![
        samples.len().to_string(),
        fmt_f64(fit.l0),
        fmt_f64(fit.l1),
        fmt_f64(fit.inflation),
        fit.violations.to_string(),
        fmt_f64(rho),
    ]);
    landscape.write(&out_dir.join("landscape.csv"))?;
    envelope.write(&out_dir.join("envelope.csv"))?;
    Ok(ProfileOutcome {
        samples,
        fit,
        rank_correlation: rho,
        landscape,
        envelope,
        out_dir: out_dir.to_path_buf(),
    })
}
