//! The `sweep`, `dynamics` and `scaling` subcommands.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use topoloc::codes::{CodeLattice, LoopSpec};
use topoloc::dynamics::{collapse_time, dephasing_rate, ect_sweep, run_loop_dynamics, EctResult, EctSweep, LoopObservables, Trajectory};
use topoloc::estimators::{default_region, Registry};
use topoloc::localize::{build_preferred_set, canonical_setup, BoundKind};
use topoloc::qpt::{fit_scaling, refined_grid, sweep, ScalingFit, CRITICAL};
use topoloc::spectrum::SolverConfig;
use topoloc::witness::build_witness;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{num, opt, write_json, Metadata, Table};

/// Files written by a command.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

fn setup(cfg: &ExperimentConfig) -> Result<(CodeLattice, LoopSpec)> {
    cfg.validate()?;
    let lat = cfg.lattice()?;
    let spec = cfg.loop_spec()?;
    lat.loop_support(&spec)?;
    Ok((lat, spec))
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Written> {
    let (lat, spec) = setup(cfg)?;
    let names = cfg.bound_names(&lat, &spec)?;
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let opts = cfg.estimator_options(&lat, &spec)?;
    let grid = cfg.g_grid()?;
    let record = sweep(&lat, &spec, &grid, &names, &Registry::default(), &opts)?;

    let kinds: Vec<BoundKind> =
        BoundKind::ALL.into_iter().filter(|k| record.points.first().is_some_and(|p| p.values.contains_key(k))).collect();
    let mut columns = vec!["g".to_string()];
    for k in &kinds {
        columns.push(k.label().into());
        if *k == BoundKind::EDoublePrime {
            columns.push("eps_m".into());
        }
    }
    let mut table = Table::new(columns);
    for p in &record.points {
        let mut row = vec![num(p.g)];
        for k in &kinds {
            let v = &p.values[k];
            row.push(num(v.value));
            if *k == BoundKind::EDoublePrime {
                row.push(opt(v.epsilon_m));
            }
        }
        table.push(row);
    }

    let mut meta = Metadata::new("sweep", cfg);
    let csv_path = cfg.output_path("sweep.csv");
    let json_path = cfg.output_path("sweep.json");
    meta.tables.push(csv_path.clone());
    table.write(&csv_path, &meta)?;
    #[derive(Serialize)]
    struct Body<'a> {
        record: &'a topoloc::qpt::SweepRecord,
    }
    write_json(&json_path, &meta, Body { record: &record })?;
    Ok(Written { files: vec![csv_path, json_path] })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub s: f64,
    pub g: f64,
    pub markovian: bool,
    pub table: PathBuf,
    /// First-trough collapse time; absent when the series has no trough.
    pub ect: Option<EctResult>,
    pub max_trace_drift_rate: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub s: f64,
    pub markovian_s: Option<f64>,
    pub result: Option<EctSweep>,
    pub error: Option<String>,
}

pub fn loop_observables(cfg: &ExperimentConfig, lat: &CodeLattice, spec: &LoopSpec) -> Result<LoopObservables> {
    let opts = cfg.estimator_options(lat, spec)?;
    let region = default_region(lat, spec, opts.part_a.clone())?;
    let setup = match opts.setup {
        Some(s) => s,
        None => canonical_setup(lat, spec)?,
    };
    let preferred = build_preferred_set(lat, &region, &setup, opts.p_c, &opts.calibration, &opts.solver)?;
    let witness = build_witness(lat, spec).ok().filter(|w| region.part_a() == [w.hub()]);
    Ok(LoopObservables { region, setup, preferred, witness, measure: opts.measure })
}

fn trajectory_table(t: &Trajectory, s: f64, omega_c: f64) -> Result<Table> {
    let bath = topoloc::dynamics::BathParams::new(s, omega_c)?;
    let mut table = Table::new(["t", "trace", "purity", "E_dprime", "E_w", "gamma_t"]);
    for p in &t.points {
        debug_assert_eq!(p.gamma_t, dephasing_rate(p.t, &bath));
        table.push(vec![num(p.t), num(p.trace), num(p.purity), opt(p.e_dprime), opt(p.e_w), num(p.gamma_t)]);
    }
    Ok(table)
}

pub fn cmd_dynamics(cfg: &ExperimentConfig) -> Result<Written> {
    let (lat, spec) = setup(cfg)?;
    let d = &cfg.dynamics;
    let solver = SolverConfig::default();
    let obs = loop_observables(cfg, &lat, &spec)?;
    let evolve = cfg.evolve_config();

    let mut ohmicities = d.s.clone();
    if let Some(m) = d.markovian_s {
        if !ohmicities.contains(&m) {
            ohmicities.push(m);
        }
    }
    let jobs: Vec<(f64, f64)> = ohmicities.iter().flat_map(|&s| d.g.iter().map(move |&g| (s, g))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(s, g)| Ok(run_loop_dynamics(&lat, g, &cfg.bath(s)?, &evolve, &obs, &solver)?))
        .collect::<Result<Vec<Trajectory>>>()?;

    let mut meta = Metadata::new("dynamics", cfg);
    let mut written = Written::default();
    let mut summaries = Vec::new();
    for (&(s, g), t) in jobs.iter().zip(&runs) {
        let path = cfg.output_path(&format!("trajectory_s{s}_g{g}.csv"));
        trajectory_table(t, s, d.omega_c)?.write(&path, &meta)?;
        meta.tables.push(path.clone());
        summaries.push(RunSummary {
            s,
            g,
            markovian: cfg.bath(s)?.is_markovian(),
            table: path.clone(),
            ect: collapse_time(&t.e_dprime_series(), None).ok(),
            max_trace_drift_rate: t.max_trace_drift_rate,
            max_hermiticity_error: t.max_hermiticity_error,
            min_eigenvalue: t.min_eigenvalue,
        });
        written.files.push(path);
    }

    let series_for = |s: f64| -> Vec<(f64, Vec<(f64, f64)>)> {
        jobs.iter().zip(&runs).filter(|(j, _)| j.0 == s).map(|(j, t)| (j.1, t.e_dprime_series())).collect()
    };
    let mut sweeps = Vec::new();
    for &s in d.s.iter().filter(|&&s| !cfg.bath(s).map(|b| b.is_markovian()).unwrap_or(true)) {
        let paired = d.markovian_s.map(series_for);
        let (result, error) = match ect_sweep(&series_for(s), paired.as_deref()) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        sweeps.push(SweepSummary { s, markovian_s: d.markovian_s, result, error });
    }

    #[derive(Serialize)]
    struct Body {
        runs: Vec<RunSummary>,
        collapse: Vec<SweepSummary>,
    }
    let path = cfg.output_path("ect.json");
    write_json(&path, &meta, Body { runs: summaries, collapse: sweeps })?;
    written.files.push(path);
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct SizePeak {
    pub n: usize,
    pub dims: [usize; 2],
    pub g_m: f64,
    pub height: Option<f64>,
}

pub fn cmd_scaling(cfg: &ExperimentConfig) -> Result<Written> {
    cfg.validate()?;
    let sc = &cfg.scaling;
    let spec = cfg.loop_spec()?;
    let lattices = sc
        .sizes
        .iter()
        .map(|&dims| ExperimentConfig { dims, ..cfg.clone() }.lattice().map(|l| (dims, l)))
        .collect::<Result<Vec<_>>>()?;
    let mut sizes: Vec<usize> = lattices.iter().map(|(_, l)| l.n_qubits()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(CliError::Config(format!("scaling needs at least 3 distinct sizes, got {}", sizes.len())));
    }
    let kind = match sc.bound.as_str() {
        "e_witness" => BoundKind::EWitness,
        _ => BoundKind::EDoublePrime,
    };
    let g_c = sc.g_c.unwrap_or(CRITICAL.for_kind(lattices[0].1.kind()));

    let peaks = match sc.synthetic {
        Some(syn) => lattices
            .iter()
            .map(|(dims, l)| {
                let n = l.n_qubits();
                SizePeak { n, dims: *dims, g_m: g_c + syn.amplitude * (n as f64).powf(-syn.exponent), height: None }
            })
            .collect(),
        None => {
            let mut opts = cfg.estimator_options(&lattices[0].1, &spec)?;
            let mut out = Vec::new();
            for (dims, lat) in &lattices {
                lat.loop_support(&spec)?;
                if opts.setup.is_some() && lat.n_qubits() != lattices[0].1.n_qubits() {
                    return Err(CliError::Config("an explicit setup cannot be shared across lattice sizes".into()));
                }
                opts.part_a = cfg.part_a_indices()?;
                let record = sweep(lat, &spec, &refined_grid(), &[sc.bound.as_str()], &Registry::default(), &opts)?;
                let peak = record.derivative_peak(kind)?;
                out.push(SizePeak { n: lat.n_qubits(), dims: *dims, g_m: peak.g_m, height: Some(peak.height) });
            }
            out
        }
    };

    let points: Vec<(usize, f64)> = peaks.iter().map(|p| (p.n, p.g_m)).collect();
    let fit = fit_scaling(&points, g_c)?;

    let mut table = Table::new(["N", "nph", "npv", "g_m", "peak_height"]);
    for p in &peaks {
        table.push(vec![p.n.to_string(), p.dims[0].to_string(), p.dims[1].to_string(), num(p.g_m), opt(p.height)]);
    }
    let mut meta = Metadata::new("scaling", cfg);
    let csv_path = cfg.output_path("scaling.csv");
    meta.tables.push(csv_path.clone());
    table.write(&csv_path, &meta)?;
    #[derive(Serialize)]
    struct Body<'a> {
        bound: BoundKind,
        peaks: &'a [SizePeak],
        fit: &'a ScalingFit,
    }
    let json_path = cfg.output_path("scaling.json");
    write_json(&json_path, &meta, Body { bound: kind, peaks: &peaks, fit: &fit })?;
    Ok(Written { files: vec![csv_path, json_path] })
}
