//! `clip-lab sweep`: Cartesian product of config overrides.
//!
//! Grid syntax: `key=v1,v2;key2=w1,w2` where each key is a dotted config path
//! (`optimizer.eta`) and each value is a TOML scalar (`0.1`, `inf`, `"soft"`).
//! Bare words that are not valid TOML are taken as strings.

use std::path::Path;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::csvio::{fmt_f64, Table};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment_in, ExperimentOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

fn parse_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

pub fn parse_grid(spec: &str) -> Result<Vec<GridAxis>> {
    let mut axes = Vec::new();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| HarnessError::config("--grid", format!("expected key=values, got {part:?}")))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(HarnessError::config("--grid", format!("bad key {key:?}")));
        }
        if axes.iter().any(|a: &GridAxis| a.key == key) {
            return Err(HarnessError::config("--grid", format!("duplicate key {key:?}")));
        }
        let values: Vec<toml::Value> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(parse_scalar)
            .collect();
        if values.is_empty() {
            return Err(HarnessError::config("--grid", format!("{key} has no values")));
        }
        axes.push(GridAxis {
            key: key.to_string(),
            values,
        });
    }
    if axes.is_empty() {
        return Err(HarnessError::config("--grid", "empty grid"));
    }
    Ok(axes)
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("non-empty key");
    for p in parents {
        let table = node
            .as_table_mut()
            .ok_or_else(|| HarnessError::config(key, format!("{p} is not inside a table")))?;
        node = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| HarnessError::config(key, "parent is not a table"))?
        .insert(last.to_string(), value);
    Ok(())
}

fn value_label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => fmt_f64(*f),
        other => other.to_string(),
    }
}

/// One grid cell: its coordinates and the resulting validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub labels: Vec<String>,
    pub config: ExperimentConfig,
}

/// Expands the grid in row-major order (first key varies slowest). Every cell
/// is validated before anything runs.
pub fn expand(base: &ExperimentConfig, axes: &[GridAxis]) -> Result<Vec<Cell>> {
    if axes.is_empty() {
        return Err(HarnessError::config("--grid", "empty grid"));
    }
    let base_value = base.to_value()?;
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let mut cells = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut picks = vec![0; axes.len()];
        for (k, axis) in axes.iter().enumerate().rev() {
            picks[k] = rem % axis.values.len();
            rem /= axis.values.len();
        }
        let mut v = base_value.clone();
        let mut labels = Vec::with_capacity(axes.len());
        for (axis, &p) in axes.iter().zip(&picks) {
            set_path(&mut v, &axis.key, axis.values[p].clone())?;
            labels.push(value_label(&axis.values[p]));
        }
        let config = ExperimentConfig::from_value(v)
            .map_err(|e| HarnessError::Config(format!("cell {index} ({}): {e}", labels.join(", "))))?;
        cells.push(Cell { index, labels, config });
    }
    Ok(cells)
}

pub const SWEEP_METRICS: [&str; 4] = ["final_loss", "tail_mean_loss", "mean_grad_norm", "final_grad_norm"];

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: Table,
    pub cells: Vec<(Cell, ExperimentOutcome)>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.cells.iter().map(|(_, o)| o.failures()).sum()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Runs every cell into `out_dir/cell<k>/` and writes `out_dir/sweep.csv`
/// with seed-averaged metrics, one row per cell.
pub fn sweep(base: &ExperimentConfig, axes: &[GridAxis], out_dir: &Path) -> Result<SweepOutcome> {
    let cells = expand(base, axes)?;
    let width = cells.len().saturating_sub(1).to_string().len();
    let outcomes: Vec<ExperimentOutcome> = cells
        .par_iter()
        .map(|c| run_experiment_in(&c.config, &out_dir.join(format!("cell{:0width$}", c.index))))
        .collect::<Result<_>>()?;

    let mut header: Vec<String> = vec!["cell".into()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(["seeds", "failed", "eta", "gamma", "beta", "nu", "steps"].map(String::from));
    header.extend(SWEEP_METRICS.map(String::from));
    let mut table = Table::new(header);
    for (cell, out) in cells.iter().zip(&outcomes) {
        let first = &out.seeds[0].plan;
        let mut row = vec![cell.index.to_string()];
        row.extend(cell.labels.iter().cloned());
        row.extend([
            out.seeds.len().to_string(),
            out.failures().to_string(),
            fmt_f64(first.clip.eta),
            fmt_f64(first.clip.gamma),
            fmt_f64(first.clip.beta),
            fmt_f64(first.clip.nu),
            first.steps.to_string(),
        ]);
        let sums = out.seeds.iter().map(|s| &s.trajectory.summary);
        row.push(fmt_f64(mean(sums.clone().map(|s| s.final_loss))));
        row.push(fmt_f64(mean(sums.clone().map(|s| s.tail_mean_loss))));
        row.push(fmt_f64(mean(sums.clone().map(|s| s.mean_grad_norm))));
        row.push(fmt_f64(mean(sums.map(|s| s.final_grad_norm))));
        table.push(row);
    }
    table.write(&out_dir.join("sweep.csv"))?;
    Ok(SweepOutcome {
        table,
        cells: cells.into_iter().zip(outcomes).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("optimizer.eta=0.1, 0.2; optimizer.gamma=1,inf;optimizer.mode=soft").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].values, vec![toml::Value::Float(0.1), toml::Value::Float(0.2)]);
        assert_eq!(g[1].values[0], toml::Value::Integer(1));
        assert_eq!(g[1].values[1], toml::Value::Float(f64::INFINITY));
        assert_eq!(g[2].values[0], toml::Value::String("soft".into()));
    }

    #[test]
    fn empty_or_malformed_grids_fail() {
        for bad in ["", " ; ", "optimizer.eta", "optimizer.eta=", "a..b=1", "x=1;x=2"] {
            assert!(matches!(parse_grid(bad), Err(HarnessError::Config(_))), "{bad:?}");
        }
    }
}
