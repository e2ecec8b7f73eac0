//! Dephasing dynamics with an Ohmic-family bath and entanglement collapse times.
//!
//! `d rho/dt = -i[H, rho] + gamma(t) sum_i (Z_i rho Z_i - rho)`. In the
//! computational basis the dephasing part multiplies `rho_ab` by
//! `-2 gamma(t) d(a, b)`, with `d` the Hamming distance, so a state supported
//! on a sector of basis states stays there.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeLattice, LoopSpec};
use crate::error::{Error, Result};
use crate::estimators::default_region;
use crate::localize::{
    bound_from_ensemble, build_preferred_set, canonical_setup, measure_ensemble, EntanglementMeasure,
    MeasurementSetup, PreferredSet, Region, DEFAULT_CALIBRATION, DEFAULT_P_C,
};
use crate::spectrum::{build_hamiltonian, solve, FieldParams, GroundStateResult, SolverConfig, SubspaceOperator};
use crate::state::{DensityMatrix, QuantumState};
use crate::subspace::{Frame, Subspace};
use crate::witness::{build_witness, witness_expectation, WitnessOperator};

/// Ohmicity at which the zero-temperature bath turns non-Markovian.
pub const CRITICAL_OHMICITY: f64 = 2.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_EVERY: f64 = 0.1;
pub const DEFAULT_THRESHOLD: f64 = 1e-8;
/// Largest sector dimension held as a dense density matrix.
pub const DEFAULT_MAX_DIM: usize = 4096;
/// Default floor for the positivity spot check.
pub const POSITIVITY_FLOOR: f64 = -1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub s: f64,
    pub omega_c: f64,
}

impl BathParams {
    pub fn new(s: f64, omega_c: f64) -> Result<Self> {
        if !(s > 0.0) || !(omega_c > 0.0) || !s.is_finite() || !omega_c.is_finite() {
            return Err(Error::InvalidSetup(format!("bath needs s > 0 and omega_c > 0, got s = {s}, omega_c = {omega_c}")));
        }
        Ok(BathParams { s, omega_c })
    }

    /// `omega_c = 1`.
    pub fn ohmicity(s: f64) -> Result<Self> {
        Self::new(s, 1.0)
    }

    pub fn is_markovian(&self) -> bool {
        self.s <= CRITICAL_OHMICITY
    }

    pub fn rate(&self, t: f64) -> f64 {
        dephasing_rate(t, self)
    }
}

/// `gamma(t) = omega_c [1 + (omega_c t)^2]^{-s/2} sin[s atan(omega_c t)] Gamma(s)`.
pub fn dephasing_rate(t: f64, bath: &BathParams) -> f64 {
    let x = bath.omega_c * t;
    bath.omega_c * (1.0 + x * x).powf(-bath.s / 2.0) * (bath.s * x.atan()).sin() * statrs::function::gamma::gamma(bath.s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub record_every: f64,
    /// Entries below this magnitude are zeroed at recorded steps.
    pub threshold: f64,
    pub max_dim: usize,
    /// Positivity is checked at every `positivity_every`-th record (0: never).
    pub positivity_every: usize,
    /// Smallest tolerated eigenvalue; `None` records it without failing.
    /// With negative rates the time-local equation is not completely
    /// positive, so long non-Markovian runs can leave the positive cone for
    /// reasons unrelated to the step size.
    pub positivity_floor: Option<f64>,
    pub keep_states: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_end: 50.0,
            dt: DEFAULT_DT,
            record_every: DEFAULT_RECORD_EVERY,
            threshold: DEFAULT_THRESHOLD,
            max_dim: DEFAULT_MAX_DIM,
            positivity_every: 10,
            positivity_floor: Some(POSITIVITY_FLOOR),
            keep_states: false,
        }
    }
}

/// Bound values computed at a recorded step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub e_dprime: Option<f64>,
    pub e_w: Option<f64>,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Trace before renormalization.
    pub trace: f64,
    pub purity: f64,
    #[serde(rename = "E_dprime")]
    pub e_dprime: Option<f64>,
    #[serde(rename = "E_w")]
    pub e_w: Option<f64>,
    pub gamma_t: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub points: Vec<TrajectoryPoint>,
    /// Recorded states when `keep_states` is set.
    pub states: Vec<DensityMatrix>,
    pub final_state: DensityMatrix,
    /// Largest `|Tr rho - 1| / t` over recorded steps.
    pub max_trace_drift_rate: f64,
    pub max_hermiticity_error: f64,
    /// Smallest eigenvalue seen at the spot checks.
    pub min_eigenvalue: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// `(t, E'')` pairs at steps where it was computed.
    pub fn e_dprime_series(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.e_dprime.map(|e| (p.t, e))).collect()
    }

    pub fn e_w_series(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.e_w.map(|e| (p.t, e))).collect()
    }
}

/// `|psi><psi|` of a ground state, kept on its sector.
pub fn initial_state(gs: &GroundStateResult) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(gs.subspace.clone(), gs.frame, &gs.sector_amps_complex())
}

/// Integrates under `bath`; `observe` runs at each recorded step.
pub fn evolve<F>(
    rho0: &DensityMatrix,
    h: &SubspaceOperator,
    bath: &BathParams,
    cfg: &EvolveConfig,
    observe: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &DensityMatrix) -> Result<Observables>,
{
    evolve_with_rate(rho0, h, |t| bath.rate(t), cfg, observe)
}

/// Same as [`evolve`] with an arbitrary rate function.
pub fn evolve_with_rate<R, F>(
    rho0: &DensityMatrix,
    h: &SubspaceOperator,
    rate: R,
    cfg: &EvolveConfig,
    mut observe: F,
) -> Result<Trajectory>
where
    R: Fn(f64) -> f64,
    F: FnMut(f64, &DensityMatrix) -> Result<Observables>,
{
    if rho0.frame() != Frame::Computational {
        return Err(Error::InvalidState("dephasing is integrated in the computational frame only".into()));
    }
    let sub = rho0.subspace().clone();
    if h.dim() != sub.dim() || h.subspace().states() != sub.states() {
        return Err(Error::InvalidState("Hamiltonian and state live on different subspaces".into()));
    }
    let dim = sub.dim();
    if dim > cfg.max_dim {
        return Err(Error::LimitExceeded { what: "density-matrix dimension", size: dim, limit: cfg.max_dim });
    }
    if !(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) || !(cfg.record_every > 0.0) {
        return Err(Error::InvalidSetup("need dt > 0, t_end >= 0 and record_every > 0".into()));
    }
    let stride = (cfg.record_every / cfg.dt).round() as usize;
    if stride == 0 || ((stride as f64) * cfg.dt - cfg.record_every).abs() > 1e-9 * cfg.record_every.max(1.0) {
        return Err(Error::InvalidSetup(format!(
            "record interval {} is not a multiple of dt = {}",
            cfg.record_every, cfg.dt
        )));
    }
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let h = h.clone().into_assembled();
    let generator = Generator::new(&h, &sub);

    let mut rho: Vec<Complex64> = (0..dim * dim).map(|k| rho0.data()[(k / dim, k % dim)]).collect();
    let mut work = Rk4Work::new(dim);
    let mut out = Trajectory {
        dt: cfg.dt,
        points: Vec::new(),
        states: Vec::new(),
        final_state: rho0.clone(),
        max_trace_drift_rate: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    let mut records = 0usize;
    for step in 0..=n_steps {
        let t = step as f64 * cfg.dt;
        if step % stride == 0 || step == n_steps {
            let state = record(&mut rho, &sub, t, &rate, cfg, records, &mut out, &mut observe)?;
            if cfg.keep_states {
                out.states.push(state.clone());
            }
            out.final_state = state;
            records += 1;
        }
        if step < n_steps {
            work.step(&generator, &mut rho, t, cfg.dt, &rate);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn record<R, F>(
    rho: &mut [Complex64],
    sub: &Arc<Subspace>,
    t: f64,
    rate: &R,
    cfg: &EvolveConfig,
    index: usize,
    out: &mut Trajectory,
    observe: &mut F,
) -> Result<DensityMatrix>
where
    R: Fn(f64) -> f64,
    F: FnMut(f64, &DensityMatrix) -> Result<Observables>,
{
    let dim = sub.dim();
    for z in rho.iter_mut() {
        if z.norm() < cfg.threshold {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let trace: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::Integration { t, detail: format!("trace became {trace}") });
    }
    let inv = 1.0 / trace;
    rho.iter_mut().for_each(|z| *z *= inv);
    if t > 0.0 {
        out.max_trace_drift_rate = out.max_trace_drift_rate.max((trace - 1.0).abs() / t);
    }

    let data = DMatrix::from_fn(dim, dim, |r, c| rho[r * dim + c]);
    let state = DensityMatrix::new(sub.clone(), Frame::Computational, data)?;
    out.max_hermiticity_error = out.max_hermiticity_error.max(state.hermiticity_error());
    if cfg.positivity_every > 0 && index % cfg.positivity_every == 0 {
        let m = state.min_eigenvalue();
        out.min_eigenvalue = out.min_eigenvalue.min(m);
        if let Some(floor) = cfg.positivity_floor.filter(|&f| m < f) {
            return Err(Error::Integration {
                t,
                detail: format!(
                    "eigenvalue {m:.3e} below {floor:e}; if it persists at a smaller dt the rate itself drives the state out of the positive cone"
                ),
            });
        }
    }
    let obs = observe(t, &state)?;
    out.points.push(TrajectoryPoint {
        t,
        trace,
        purity: state.purity(),
        e_dprime: obs.e_dprime,
        e_w: obs.e_w,
        gamma_t: rate(t),
    });
    Ok(state)
}

/// Sparse real Hamiltonian rows and Hamming distances between sector states.
struct Generator {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    states: Vec<usize>,
}

impl Generator {
    fn new(h: &SubspaceOperator, sub: &Subspace) -> Self {
        let rows = (0..h.dim()).map(|i| h.row(i).expect("assembled").collect()).collect();
        Generator { dim: h.dim(), rows, states: sub.states().to_vec() }
    }

    /// `out = L_t(rho)`, using `m` as scratch for `H rho`.
    fn apply(&self, rho: &[Complex64], gamma: f64, m: &mut [Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        m.par_chunks_mut(d).enumerate().for_each(|(r, row)| {
            row.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for &(c, v) in &self.rows[r] {
                let src = &rho[c * d..(c + 1) * d];
                for (z, s) in row.iter_mut().zip(src) {
                    *z += s * v;
                }
            }
        });
        let minus_i = Complex64::new(0.0, -1.0);
        out.par_chunks_mut(d).enumerate().for_each(|(a, row)| {
            let sa = self.states[a];
            for (b, z) in row.iter_mut().enumerate() {
                // [H, rho]_ab = (H rho)_ab - conj((H rho)_ba) for Hermitian H, rho.
                let comm = m[a * d + b] - m[b * d + a].conj();
                let dist = (sa ^ self.states[b]).count_ones() as f64;
                *z = minus_i * comm - rho[a * d + b] * (2.0 * gamma * dist);
            }
        });
    }
}

struct Rk4Work {
    m: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim * dim];
        Rk4Work { m: z.clone(), k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    fn step<R: Fn(f64) -> f64>(&mut self, g: &Generator, rho: &mut [Complex64], t: f64, dt: f64, rate: &R) {
        let (g0, g1, g2) = (rate(t), rate(t + dt / 2.0), rate(t + dt));
        let Rk4Work { m, k, tmp } = self;
        let [k1, k2, k3, k4] = k;
        g.apply(rho, g0, m, k1);
        axpy(tmp, rho, k1, dt / 2.0);
        g.apply(tmp, g1, m, k2);
        axpy(tmp, rho, k2, dt / 2.0);
        g.apply(tmp, g1, m, k3);
        axpy(tmp, rho, k3, dt);
        g.apply(tmp, g2, m, k4);
        let w = dt / 6.0;
        rho.par_iter_mut().enumerate().for_each(|(i, z)| {
            *z += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        });
    }
}

/// `out = x + a y`.
fn axpy(out: &mut [Complex64], x: &[Complex64], y: &[Complex64], a: f64) {
    out.par_iter_mut().enumerate().for_each(|(i, z)| *z = x[i] + y[i] * a);
}

/// `E''` (canonical setup, preferred outcomes) and `E^w` on one loop.
#[derive(Debug, Clone)]
pub struct LoopObservables {
    pub region: Region,
    pub setup: MeasurementSetup,
    pub preferred: PreferredSet,
    pub witness: Option<WitnessOperator>,
    pub measure: EntanglementMeasure,
}

impl LoopObservables {
    /// Canonical setup, default preferred-set calibration, and the loop's
    /// witness when one exists. `part_a` defaults to the witness hub.
    pub fn new(lat: &CodeLattice, spec: &LoopSpec, part_a: Option<Vec<usize>>, solver: &SolverConfig) -> Result<Self> {
        let region = default_region(lat, spec, part_a)?;
        let setup = canonical_setup(lat, spec)?;
        let preferred = build_preferred_set(lat, &region, &setup, DEFAULT_P_C, &DEFAULT_CALIBRATION, solver)?;
        let witness = build_witness(lat, spec).ok();
        Ok(LoopObservables { region, setup, preferred, witness, measure: EntanglementMeasure::Negativity })
    }

    pub fn observe(&self, rho: &DensityMatrix) -> Result<Observables> {
        let state = QuantumState::Mixed(rho.clone());
        let ens = measure_ensemble(&state, &self.region, &self.setup, Some(&self.preferred))?;
        let e_dprime = bound_from_ensemble(&ens, self.measure)?.value;
        let e_w = match &self.witness {
            Some(w) => Some(witness_expectation(&state, w)?.bound),
            None => None,
        };
        Ok(Observables { e_dprime: Some(e_dprime), e_w })
    }
}

/// Trajectory from the ground state at `g`, observed on `obs`'s loop.
pub fn run_loop_dynamics(
    lat: &CodeLattice,
    g: f64,
    bath: &BathParams,
    cfg: &EvolveConfig,
    obs: &LoopObservables,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    let gs = solve(lat, g, solver)?;
    let rho0 = initial_state(&gs)?;
    let h = build_hamiltonian(lat, FieldParams::new(g)?).restrict(gs.subspace.clone())?;
    evolve(&rho0, &h, bath, cfg, |_, r| obs.observe(r)).map_err(|e| e.at_field(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EctKind {
    NonMarkovianTrough,
    MarkovianCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EctResult {
    pub tau: f64,
    pub e_c: f64,
    pub kind: EctKind,
}

/// A rise smaller than this after a minimum is treated as noise.
pub const TROUGH_RISE: f64 = 1e-6;

/// Index of the first trough: the running minimum before the series first
/// climbs more than `TROUGH_RISE` above it.
pub fn first_trough(values: &[f64]) -> Option<usize> {
    let mut m = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < values[m] {
            m = k;
        } else if v > values[m] + TROUGH_RISE {
            return Some(m);
        }
    }
    None
}

/// Entanglement collapse time of a sampled series `(t, E)`.
///
/// Without `reference`: `E_c` is the first-trough value and `tau` the first
/// time the series comes within `TROUGH_RISE` of it. With `reference`: the
/// first downward crossing of that level, located by bisection on the linear
/// interpolant between the bracketing samples.
pub fn collapse_time(series: &[(f64, f64)], reference: Option<f64>) -> Result<EctResult> {
    match reference {
        None => {
            let values: Vec<f64> = series.iter().map(|p| p.1).collect();
            let i = first_trough(&values).ok_or(Error::NoTrough)?;
            let e_c = values[i];
            let first = values.iter().position(|&v| v <= e_c + TROUGH_RISE).unwrap_or(i);
            Ok(EctResult { tau: series[first].0, e_c: e_c.max(0.0), kind: EctKind::NonMarkovianTrough })
        }
        Some(level) => {
            let k = series.iter().position(|p| p.1 <= level).ok_or(Error::LevelNotCrossed { level })?;
            if k == 0 {
                return Ok(EctResult { tau: series[0].0, e_c: level, kind: EctKind::MarkovianCrossing });
            }
            let ((t0, e0), (t1, e1)) = (series[k - 1], series[k]);
            let f = |t: f64| e0 + (e1 - e0) * (t - t0) / (t1 - t0) - level;
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(EctResult { tau: hi, e_c: level, kind: EctKind::MarkovianCrossing })
        }
    }
}

/// Collapse times over a field sweep with one common level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EctSweep {
    /// Largest first-trough value over the sweep: the lowest level every
    /// non-Markovian trajectory comes down to.
    pub e_c: f64,
    pub points: Vec<EctPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EctPoint {
    pub g: f64,
    pub trough: f64,
    pub tau_nm: f64,
    /// Crossing time of the paired Markovian run, when one was given.
    pub tau_m: Option<f64>,
}

/// `non_markovian[i]` and `markovian[i]` are `(g, E''(t))` for the same `g`.
pub fn ect_sweep(
    non_markovian: &[(f64, Vec<(f64, f64)>)],
    markovian: Option<&[(f64, Vec<(f64, f64)>)]>,
) -> Result<EctSweep> {
    if let Some(m) = markovian {
        if m.len() != non_markovian.len() || m.iter().zip(non_markovian).any(|(a, b)| a.0 != b.0) {
            return Err(Error::InvalidSetup("Markovian runs must pair with the non-Markovian fields".into()));
        }
    }
    let troughs = non_markovian
        .iter()
        .map(|(g, series)| collapse_time(series, None).map(|r| r.e_c).map_err(|e| e.at_field(*g)))
        .collect::<Result<Vec<f64>>>()?;
    let e_c = troughs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut points = Vec::with_capacity(troughs.len());
    for (i, (g, series)) in non_markovian.iter().enumerate() {
        let tau_nm = collapse_time(series, Some(e_c)).map_err(|e| e.at_field(*g))?.tau;
        let tau_m = match markovian {
            Some(m) => Some(collapse_time(&m[i].1, Some(e_c)).map_err(|e| e.at_field(*g))?.tau),
            None => None,
        };
        points.push(EctPoint { g: *g, trough: troughs[i], tau_nm, tau_m });
    }
    Ok(EctSweep { e_c, points })
}

/// Peak-to-trough spread of the series after `t_from`.
pub fn oscillation_amplitude(series: &[(f64, f64)], t_from: f64) -> f64 {
    let tail = series.iter().filter(|p| p.0 >= t_from).map(|p| p.1);
    let (lo, hi) = tail.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Times the series climbs above `level` after having been at or below `floor`.
pub fn count_revivals(series: &[(f64, f64)], floor: f64, level: f64) -> usize {
    let mut collapsed = false;
    let mut count = 0;
    for &(_, v) in series {
        if v <= floor {
            collapsed = true;
        } else if collapsed && v > level {
            count += 1;
            collapsed = false;
        }
    }
    count
}

/// Largest upward step, for checking monotone decay.
pub fn max_increase(series: &[(f64, f64)]) -> f64 {
    series.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max)
}
