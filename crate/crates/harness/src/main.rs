use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cliplab_harness::error::{HarnessError, Result, EXIT_CONFIG, EXIT_OK};
use cliplab_harness::experiment::run_experiment_in;
use cliplab_harness::limit::{limit, limit_table, MonteCarloSpec};
use cliplab_harness::presets::{load_config, PRESETS};
use cliplab_harness::profile::{profile_in, ProfileMode};
use cliplab_harness::sweep::{parse_grid, sweep};
use cliplab_harness::verify::{report_table, run_suite, total_violations, Suite, VerifyOptions};

/// Experiments with clipped momentum methods. Every command writes CSV.
#[derive(Debug, Parser)]
#[command(name = "clip-lab", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CLIP_LAB_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// TOML config file, or `preset:NAME`.
    config: String,

    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment: a trajectory CSV per seed and summary.csv.
    Run(ConfigArg),

    /// Cartesian sweep over config fields.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArg,

        /// `key=v1,v2;key2=w1,w2` with dotted config keys.
        #[arg(long)]
        grid: String,
    },

    /// Run an invariant suite; exit 2 on any violation.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(Suite::NAMES))]
        suite: String,

        /// Report CSV path.
        #[arg(long, default_value = "verify_report.csv")]
        out: PathBuf,

        /// Multiply every (L0, L1) pair before checking.
        #[arg(long, default_value_t = 1.0)]
        scale_constants: f64,

        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Sample gradient and Hessian norms and fit the (L0, L1) envelope.
    Profile {
        #[command(flatten)]
        cfg: ConfigArg,

        /// Sample the `[profile]` grid.
        #[arg(long, conflicts_with = "trajectory", required_unless_present = "trajectory")]
        grid: bool,

        /// Sample the iterates of the configured run.
        #[arg(long)]
        trajectory: bool,
    },

    /// Limiting loss of mixed clipping on the noisy quadratic.
    Limit {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        nu: f64,

        /// Also estimate by simulation over this many seeds.
        #[arg(long)]
        mc_seeds: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        mc_steps: u64,
        #[arg(long, default_value_t = 2_000)]
        mc_burn_in: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Also write the row to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// List the shipped presets, or print one.
    Presets { name: Option<String> },
}

fn out_dir(c: &ConfigArg, cfg: &cliplab_harness::ExperimentConfig) -> PathBuf {
    c.out.clone().unwrap_or_else(|| cfg.output.dir.clone())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(c) => {
            let cfg = load_config(&c.config)?;
            let out = run_experiment_in(&cfg, &out_dir(&c, &cfg))?;
            print!("{}", out.summary.to_csv_string());
            match out.failures() {
                0 => Ok(()),
                n => Err(HarnessError::Runtime(format!(
                    "{n} seed(s) failed; see {}",
                    out.out_dir.join("errors.csv").display()
                ))),
            }
        }
        Command::Sweep { cfg: c, grid } => {
            let axes = parse_grid(&grid)?;
            let cfg = load_config(&c.config)?;
            let out = sweep(&cfg, &axes, &out_dir(&c, &cfg))?;
            print!("{}", out.table.to_csv_string());
            match out.failures() {
                0 => Ok(()),
                n => Err(HarnessError::Runtime(format!("{n} seed run(s) failed"))),
            }
        }
        Command::Verify {
            suite,
            out,
            scale_constants,
            seed,
        } => {
            let rows = run_suite(suite.parse()?, &VerifyOptions { scale_constants, seed })?;
            let table = report_table(&rows);
            table.write(&out)?;
            print!("{}", table.to_csv_string());
            match total_violations(&rows) {
                0 => Ok(()),
                n => Err(HarnessError::Violations(n)),
            }
        }
        Command::Profile { cfg: c, grid, .. } => {
            let cfg = load_config(&c.config)?;
            let mode = if grid { ProfileMode::Grid } else { ProfileMode::Trajectory };
            let out = profile_in(&cfg, mode, &out_dir(&c, &cfg))?;
            print!("{}", out.envelope.to_csv_string());
            Ok(())
        }
        Command::Limit {
            eta,
            beta,
            nu,
            mc_seeds,
            mc_steps,
            mc_burn_in,
            seed,
            out,
        } => {
            let mc = mc_seeds.map(|seeds| MonteCarloSpec {
                seeds,
                steps: mc_steps,
                burn_in: mc_burn_in,
                seed,
            });
            let table = limit_table(eta, beta, nu, &limit(eta, beta, nu, mc)?);
            if let Some(p) = out {
                table.write(&p)?;
            }
            print!("{}", table.to_csv_string());
            Ok(())
        }
        Command::Presets { name: None } => {
            for (n, _) in PRESETS {
                println!("{n}");
            }
            Ok(())
        }
        Command::Presets { name: Some(n) } => {
            let src = cliplab_harness::presets::preset_source(&n)
                .ok_or_else(|| HarnessError::Config(format!("unknown preset {n:?}")))?;
            print!("{src}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK } as u8);
        }
    };
    if let Some(n) = cli.workers {
        let built = if n == 0 {
            Err("must be at least 1".to_string())
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        };
        if let Err(msg) = built {
            eprintln!("clip-lab: config error: --workers: {msg}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clip-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
