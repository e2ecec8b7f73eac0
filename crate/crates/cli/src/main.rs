use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topoloc::localize::EntanglementMeasure;
use topoloc_cli::commands::{cmd_dynamics, cmd_scaling, cmd_sweep, Written};
use topoloc_cli::config::{resolve_workers, Model, SyntheticPeaks};
use topoloc_cli::validate::{run_all, ValidateOptions};
use topoloc_cli::{CliError, ExperimentConfig, Result};

/// Localizable-entanglement bounds on Kitaev and color code loops.
#[derive(Debug, Parser)]
#[command(name = "topoloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bounds against the field strength g.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        g_min: Option<f64>,
        #[arg(long)]
        g_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Explicit field values, comma separated.
        #[arg(long, value_delimiter = ',')]
        g: Option<Vec<f64>>,
    },
    /// Dephasing trajectories and collapse times.
    Dynamics {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        g: Option<Vec<f64>>,
        /// Bath ohmicities, comma separated.
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
        #[arg(long)]
        markovian_s: Option<f64>,
        #[arg(long)]
        omega_c: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        record_every: Option<f64>,
        /// Record the smallest eigenvalue instead of failing below the floor.
        #[arg(long)]
        no_positivity_check: bool,
    },
    /// Derivative peaks over lattice sizes and their finite-size fit.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Lattice sizes such as `2x2,3x2,4x2`.
        #[arg(long, value_delimiter = ',', value_parser = parse_dims)]
        sizes: Option<Vec<[usize; 2]>>,
        /// `e_dprime` or `e_witness`.
        #[arg(long)]
        bound: Option<String>,
        #[arg(long)]
        g_c: Option<f64>,
        /// Fit synthetic peaks `amplitude,exponent` instead of sweeping.
        #[arg(long, value_delimiter = ',')]
        synthetic: Option<Vec<f64>>,
    },
    /// Run the oracle and invariant suites.
    Validate {
        /// Corrupt the witness generators to exercise failure reporting.
        #[arg(long)]
        inject_witness_fault: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment config; defaults apply to anything missing.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Lattice dimensions such as `3x2`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<[usize; 2]>,
    /// Loop such as `xh`, `zh` or `xhr`.
    #[arg(long = "loop")]
    loop_spec: Option<String>,
    /// Part A as 1-based qubit labels.
    #[arg(long, value_delimiter = ',')]
    part_a: Option<Vec<usize>>,
    /// Measurement setup such as `Z:7,8; X:rest`.
    #[arg(long)]
    setup: Option<String>,
    /// Estimators: le, rle, e_prime, e_dprime, e_witness.
    #[arg(long, value_delimiter = ',')]
    bounds: Option<Vec<String>>,
    #[arg(long, value_parser = parse_measure)]
    measure: Option<EntanglementMeasure>,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    calibration: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    prefix: Option<String>,
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("`{s}` is not of the form 3x2"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
    Ok([p(a)?, p(b)?])
}

fn parse_measure(s: &str) -> std::result::Result<EntanglementMeasure, String> {
    match s {
        "negativity" => Ok(EntanglementMeasure::Negativity),
        "normalized_negativity" => Ok(EntanglementMeasure::NormalizedNegativity),
        _ => Err(format!("unknown measure `{s}`")),
    }
}

impl Common {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => { $( if let Some(v) = self.$src { $dst = v; } )* };
        }
        set!(model => c.model, dims => c.dims, loop_spec => c.loop_spec, measure => c.measure, seed => c.seed,
             workers => c.workers, out => c.output.dir, prefix => c.output.prefix, p_c => c.preferred.p_c,
             calibration => c.preferred.calibration);
        if self.part_a.is_some() {
            c.part_a = self.part_a;
        }
        if self.setup.is_some() {
            c.setup = self.setup;
        }
        if self.bounds.is_some() {
            c.bounds = self.bounds;
        }
        Ok(c)
    }
}

fn init_workers(configured: usize) -> Result<()> {
    let n = resolve_workers(configured)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

fn report(w: Written) {
    for f in w.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep { common, g_min, g_max, step, g } => {
            let mut c = common.resolve()?;
            if let Some(v) = g_min {
                c.grid.g_min = v;
            }
            if let Some(v) = g_max {
                c.grid.g_max = v;
            }
            if let Some(v) = step {
                c.grid.step = v;
            }
            if g.is_some() {
                c.grid.values = g;
            }
            c.validate()?;
            init_workers(c.workers)?;
            report(cmd_sweep(&c)?);
        }
        Command::Dynamics { common, g, s, markovian_s, omega_c, t_end, dt, record_every, no_positivity_check } => {
            let mut c = common.resolve()?;
            let d = &mut c.dynamics;
            if let Some(v) = g {
                d.g = v;
            }
            if let Some(v) = s {
                d.s = v;
            }
            if markovian_s.is_some() {
                d.markovian_s = markovian_s;
            }
            for (src, dst) in [(omega_c, &mut d.omega_c), (t_end, &mut d.t_end), (dt, &mut d.dt), (record_every, &mut d.record_every)] {
                if let Some(v) = src {
                    *dst = v;
                }
            }
            if no_positivity_check {
                d.enforce_positivity = false;
            }
            c.validate()?;
            init_workers(c.workers)?;
            report(cmd_dynamics(&c)?);
        }
        Command::Scaling { common, sizes, bound, g_c, synthetic } => {
            let mut c = common.resolve()?;
            if let Some(v) = sizes {
                c.scaling.sizes = v;
            }
            if let Some(v) = bound {
                c.scaling.bound = v;
            }
            if g_c.is_some() {
                c.scaling.g_c = g_c;
            }
            if let Some(v) = synthetic {
                if v.len() != 2 {
                    return Err(CliError::Config("--synthetic takes amplitude,exponent".into()));
                }
                c.scaling.synthetic = Some(SyntheticPeaks { amplitude: v[0], exponent: v[1] });
            }
            c.validate()?;
            init_workers(c.workers)?;
            report(cmd_scaling(&c)?);
        }
        Command::Validate { inject_witness_fault, json } => {
            init_workers(0)?;
            let suites = run_all(ValidateOptions { inject_witness_fault });
            for s in &suites {
                println!("{:<22} {:>4}/{:<4} {}", s.name, s.passed, s.total, if s.ok() { "PASS" } else { "FAIL" });
                for f in &s.failures {
                    println!("    {f}");
                }
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&suites).expect("report serializes");
                std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
            }
            return Ok(suites.iter().all(|s| s.ok()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("topoloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
