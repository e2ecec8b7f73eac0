//! Self-validation: dense oracles against the fast paths, the witness
//! algebra, and the bound hierarchy on small lattices.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use topoloc::codes::{build_kitaev, CodeLattice, Direction, LoopSpec};
use topoloc::dynamics::{dephasing_rate, BathParams};
use topoloc::estimators::{EstimatorOptions, Registry};
use topoloc::localize::{canonical_setup, measure_ensemble, Region};
use topoloc::pauli::{Axis, PauliString};
use topoloc::qpt::sweep;
use topoloc::spectrum::{build_hamiltonian, solve, FieldParams, SolverConfig, SubspaceOperator};
use topoloc::state::{DensityMatrix, QuantumState};
use topoloc::subspace::{Frame, Subspace};
use topoloc::witness::{build_witness, verify_decomposition, verify_star_pt_bound, WitnessGenerator, WitnessOperator};

const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, passed: 0, total: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    fn record_result<T>(&mut self, r: topoloc::Result<T>, what: &str) -> Option<T> {
        self.total += 1;
        match r {
            Ok(v) => {
                self.passed += 1;
                Some(v)
            }
            Err(e) => {
                self.failures.push(format!("{what}: {e}"));
                None
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Feed a corrupted witness generator list to the construction suite.
    pub inject_witness_fault: bool,
}

pub fn run_all(opts: ValidateOptions) -> Vec<SuiteReport> {
    vec![
        hamiltonian_oracle(),
        ensemble_oracle(),
        witness_construction(opts.inject_witness_fault),
        witness_algebra(),
        zero_field(),
        hierarchy(),
        rate_sign(),
    ]
}

fn kitaev(h: usize, v: usize) -> CodeLattice {
    build_kitaev(h, v).expect("fixed lattice sizes are valid")
}

fn horizontal(op: Axis) -> LoopSpec {
    LoopSpec::kitaev(op, Direction::H)
}

fn pauli_element(p: &PauliString, r: usize, c: usize) -> Complex64 {
    let mut v = Complex64::new(p.sign() as f64, 0.0);
    for q in 0..p.n_qubits() {
        let (rb, cb) = (r >> q & 1, c >> q & 1);
        let e = match p.axis(q) {
            None if rb == cb => Complex64::new(1.0, 0.0),
            Some(Axis::X) if rb != cb => Complex64::new(1.0, 0.0),
            Some(Axis::Y) if rb != cb => Complex64::new(0.0, if rb == 1 { 1.0 } else { -1.0 }),
            Some(Axis::Z) if rb == cb => Complex64::new(if rb == 0 { 1.0 } else { -1.0 }, 0.0),
            _ => return Complex64::new(0.0, 0.0),
        };
        v *= e;
    }
    v
}

fn dense(p: &PauliString) -> DMatrix<Complex64> {
    let d = 1usize << p.n_qubits();
    DMatrix::from_fn(d, d, |r, c| pauli_element(p, r, c))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Matrix-free Hamiltonian application against a matrix built from single-qubit
/// factors (N = 8) and against the assembled operator (N = 12).
fn hamiltonian_oracle() -> SuiteReport {
    let mut rep = SuiteReport::new("hamiltonian_oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (h, v) in [(2, 2), (3, 2)] {
        let lat = kitaev(h, v);
        let n = lat.n_qubits();
        let full = Arc::new(Subspace::full(n));
        let d = full.dim();
        for _ in 0..10 {
            let g = rng.random::<f64>() * 2.0;
            let ham = build_hamiltonian(&lat, FieldParams::new(g).expect("non-negative field"));
            let free = SubspaceOperator::matrix_free(full.clone(), ham.terms());
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let mut y = vec![0.0; d];
            free.apply(&x, &mut y);
            let want: Vec<f64> = if n <= 8 {
                let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
                for (c, p) in ham.terms() {
                    m += dense(p) * Complex64::new(*c, 0.0);
                }
                let xd = DMatrix::from_fn(d, 1, |r, _| Complex64::new(x[r], 0.0));
                (m * xd).iter().map(|z| z.re).collect()
            } else {
                let assembled = SubspaceOperator::from_terms(full.clone(), ham.terms()).into_assembled();
                let mut w = vec![0.0; d];
                assembled.apply(&x, &mut w);
                w
            };
            let err = max_diff(&y, &want);
            rep.record(err <= ORACLE_TOLERANCE, || format!("N={n} g={g:.3}: deviation {err:.2e}"));
        }
    }
    rep
}

fn bra(axis: Axis, outcome: usize) -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match axis {
        Axis::Z if outcome == 0 => [c(1.0, 0.0), c(0.0, 0.0)],
        Axis::Z => [c(0.0, 0.0), c(1.0, 0.0)],
        Axis::X => [c(s, 0.0), c(sign * s, 0.0)],
        Axis::Y => [c(s, 0.0), c(0.0, -sign * s)],
    }
}

/// Unnormalized branch `Tr_bar[(P_k x I) rho]` by explicit index sums.
fn dense_branch(rho: &DMatrix<Complex64>, region: &Region, axes: &[Axis], k: usize) -> DMatrix<Complex64> {
    let (om, bar) = (region.omega(), region.omega_bar());
    let place = |local: usize, qubits: &[usize]| qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | (local >> j & 1) << q);
    let weight = |x: usize| {
        (0..bar.len()).fold(Complex64::new(1.0, 0.0), |acc, j| acc * bra(axes[j], k >> j & 1)[x >> j & 1])
    };
    let d_om = 1usize << om.len();
    let mut out = DMatrix::from_element(d_om, d_om, Complex64::new(0.0, 0.0));
    for x in 0..1usize << bar.len() {
        let wx = weight(x);
        for y in 0..1usize << bar.len() {
            let wy = weight(y).conj();
            for i in 0..d_om {
                for j in 0..d_om {
                    out[(i, j)] += wx * rho[(place(i, om) | place(x, bar), place(j, om) | place(y, bar))] * wy;
                }
            }
        }
    }
    out
}

/// Outcome ensembles against explicit projection on random mixed states.
fn ensemble_oracle() -> SuiteReport {
    let mut rep = SuiteReport::new("ensemble_oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lat = kitaev(2, 2);
    let full = Arc::new(Subspace::full(8));
    for op in [Axis::X, Axis::Z] {
        let spec = horizontal(op);
        let (region, setup) = match (Region::from_loop(&lat, &spec), canonical_setup(&lat, &spec)) {
            (Ok(r), Ok(s)) => (r, s),
            (r, s) => {
                rep.record(false, || format!("{spec}: {:?} {:?}", r.err(), s.err()));
                continue;
            }
        };
        let axes = setup.axes();
        for _ in 0..10 {
            let a = DMatrix::from_fn(256, 256, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let m = &a * a.adjoint();
            let rho = &m / m.trace();
            let state = DensityMatrix::new(full.clone(), Frame::Computational, rho.clone()).map(QuantumState::Mixed);
            let Some(ens) = rep.record_result(state.and_then(|s| measure_ensemble(&s, &region, &setup, None)), "ensemble") else {
                continue;
            };
            let err = ens
                .entries
                .iter()
                .map(|o| {
                    let want = dense_branch(&rho, &region, &axes, o.k);
                    let p = want.trace().re;
                    let branch = (want / Complex64::new(p, 0.0) - o.rho()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    (p - o.p).abs().max(branch)
                })
                .fold(0.0, f64::max);
            rep.record(err <= ORACLE_TOLERANCE, || format!("{spec}: deviation {err:.2e}"));
        }
    }
    rep
}

/// Duplicates the first generator over the last: the region restrictions stop
/// being independent, which the construction must refuse.
pub fn corrupt(generators: &[WitnessGenerator]) -> Vec<WitnessGenerator> {
    let mut g = generators.to_vec();
    let last = g.len() - 1;
    g[last] = WitnessGenerator { label: format!("{}'", g[0].label), string: g[0].string.clone() };
    g
}

/// Witness generators for every horizontal loop build and pass both
/// contribution conditions; a corrupted list is refused.
fn witness_construction(inject_fault: bool) -> SuiteReport {
    let mut rep = SuiteReport::new("witness_construction");
    for (h, v) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
        let lat = kitaev(h, v);
        for op in [Axis::X, Axis::Z] {
            let spec = horizontal(op);
            let what = format!("N={} {spec}", lat.n_qubits());
            let Some(w) = rep.record_result(build_witness(&lat, &spec), &what) else { continue };
            let gens = if inject_fault { corrupt(w.generators()) } else { w.generators().to_vec() };
            rep.record_result(WitnessOperator::new(spec, w.region().clone(), gens), &format!("{what} rebuilt"));
            let refused = matches!(
                WitnessOperator::new(spec, w.region().clone(), corrupt(w.generators())),
                Err(topoloc::Error::WitnessCondition { condition: 'b', .. })
            );
            rep.record(refused, || format!("{what}: corrupted generators were accepted"));
        }
    }
    rep
}

/// Star-graph partial-transpose checks and the witness decomposition on
/// ground states.
fn witness_algebra() -> SuiteReport {
    let mut rep = SuiteReport::new("witness_algebra");
    for n in 2..=6 {
        rep.record_result(verify_star_pt_bound(n), &format!("star n={n}"));
    }
    let solver = SolverConfig::default();
    for (h, v) in [(2, 2), (3, 2)] {
        let lat = kitaev(h, v);
        for op in [Axis::X, Axis::Z] {
            let spec = horizontal(op);
            let (Ok(w), Ok(setup)) = (build_witness(&lat, &spec), canonical_setup(&lat, &spec)) else {
                rep.record(false, || format!("N={} {spec}: no witness or setup", lat.n_qubits()));
                continue;
            };
            for g in [0.0, 0.5, 1.0] {
                let r = solve(&lat, g, &solver).and_then(|gs| verify_decomposition(&gs.vector().into(), &w, &setup));
                rep.record_result(r, &format!("N={} {spec} g={g}", lat.n_qubits()));
            }
        }
    }
    rep
}

/// At zero field every lower bound equals one.
fn zero_field() -> SuiteReport {
    let mut rep = SuiteReport::new("zero_field");
    let reg = Registry::default();
    for (h, v) in [(2, 2), (3, 2)] {
        let lat = kitaev(h, v);
        for op in [Axis::X, Axis::Z] {
            let spec = horizontal(op);
            let r = sweep(&lat, &spec, &[0.0], &["e_prime", "e_dprime", "e_witness"], &reg, &EstimatorOptions::default());
            if let Some(rec) = rep.record_result(r, &format!("N={} {spec}", lat.n_qubits())) {
                for (k, bv) in &rec.points[0].values {
                    rep.record((bv.value - 1.0).abs() <= 1e-8, || format!("N={} {spec} {k} = {}", lat.n_qubits(), bv.value));
                }
            }
        }
    }
    rep
}

/// `LE >= RLE >= E' >= E^w` and `E' ~ E''` within `eps_m`, checked inline per field.
fn hierarchy() -> SuiteReport {
    let mut rep = SuiteReport::new("hierarchy");
    let reg = Registry::default();
    let lat = kitaev(2, 2);
    let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
    for op in [Axis::X, Axis::Z] {
        let spec = horizontal(op);
        for &g in &grid {
            let r = sweep(&lat, &spec, &[g], &reg.names(), &reg, &EstimatorOptions::default());
            rep.record_result(r, &format!("N=8 {spec} g={g}"));
        }
    }
    rep
}

/// The dephasing rate stays non-negative exactly in the Markovian range.
fn rate_sign() -> SuiteReport {
    let mut rep = SuiteReport::new("rate_sign");
    for s in [0.5, 1.0, 2.0, 2.5, 3.0, 4.0] {
        let bath = BathParams::ohmicity(s).expect("positive ohmicity");
        let min = (0..=10_000).map(|k| dephasing_rate(k as f64 * 0.01, &bath)).fold(f64::INFINITY, f64::min);
        let ok = if bath.is_markovian() { min >= 0.0 } else { min < 0.0 };
        rep.record(ok, || format!("s={s}: min gamma {min:.3e}"));
    }
    rep
}
