//! Restricted (Pauli) and continuous optimization of the localized entanglement.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{average_from_rotated, deposit, rotate_qubit};
use super::{
    bound_from_ensemble, measure_ensemble, BoundKind, BoundValue, EntanglementMeasure, MeasurementSetup, Region,
    SKIP_PROBABILITY,
};
use crate::error::{Error, Result};
use crate::pauli::Axis;
use crate::state::{PureState, QuantumState};

/// Largest `|Omega-bar|` for exhaustive Pauli enumeration.
pub const DEFAULT_RLE_LIMIT: usize = 12;
/// Largest `|Omega-bar|` for the continuous search.
pub const DEFAULT_LE_LIMIT: usize = 10;

/// Single-qubit projective basis `{|0'>, |1'>}`.
///
/// `|0'> = cos(t/2)|0> + e^{i p} sin(t/2)|1>`, `|1'> = sin(t/2)|0> - e^{i p} cos(t/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Pauli(Axis),
    Angles { theta: f64, phi: f64 },
}

impl Basis {
    pub fn from_axis(axis: Axis) -> Self {
        Basis::Pauli(axis)
    }

    pub fn angles(self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Basis::Pauli(Axis::X) => (FRAC_PI_2, 0.0),
            Basis::Pauli(Axis::Y) => (FRAC_PI_2, FRAC_PI_2),
            Basis::Pauli(Axis::Z) => (0.0, 0.0),
            Basis::Angles { theta, phi } => (theta, phi),
        }
    }

    /// Rows `<0'|` and `<1'|`; `None` for the computational basis.
    pub fn bra_rows(self) -> Option<[[Complex64; 2]; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re, im| Complex64::new(re, im);
        match self {
            Basis::Pauli(Axis::Z) => None,
            Basis::Pauli(Axis::X) => Some([[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]),
            Basis::Pauli(Axis::Y) => Some([[c(s, 0.0), c(0.0, -s)], [c(s, 0.0), c(0.0, s)]]),
            Basis::Angles { theta, phi } => {
                let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let e = Complex64::from_polar(1.0, -phi);
                Some([[c(ct, 0.0), e * st], [c(st, 0.0), -e * ct]])
            }
        }
    }
}

fn a_mask(region: &Region) -> usize {
    region.a_positions().iter().fold(0, |m, &p| m | 1 << p)
}

fn omega_table(region: &Region) -> Vec<usize> {
    (0..1usize << region.omega().len()).map(|j| deposit(j, region.omega())).collect()
}

/// `sum_k p_k E(rho^k)` for arbitrary single-qubit bases on `Omega-bar` (in order).
pub fn average_entanglement(psi: &PureState, region: &Region, bases: &[Basis], measure: EntanglementMeasure) -> Result<f64> {
    if psi.n_qubits() != region.n_qubits() {
        return Err(Error::QubitMismatch { left: psi.n_qubits(), right: region.n_qubits() });
    }
    if bases.len() != region.omega_bar().len() {
        return Err(Error::InvalidSetup(format!("{} bases for {} qubits", bases.len(), region.omega_bar().len())));
    }
    Ok(evaluate(psi.amps(), region, &omega_table(region), a_mask(region), bases, measure))
}

fn evaluate(
    amps: &[Complex64],
    region: &Region,
    table: &[usize],
    a_mask: usize,
    bases: &[Basis],
    measure: EntanglementMeasure,
) -> f64 {
    let mut work = amps.to_vec();
    for (&q, b) in region.omega_bar().iter().zip(bases) {
        rotate_qubit(&mut work, q, &b.bra_rows());
    }
    average_from_rotated(&work, table, region.omega_bar(), a_mask, measure, SKIP_PROBABILITY)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RleConfig {
    pub limit: usize,
    pub measure: EntanglementMeasure,
}

impl Default for RleConfig {
    fn default() -> Self {
        RleConfig { limit: DEFAULT_RLE_LIMIT, measure: EntanglementMeasure::Negativity }
    }
}

/// Every Pauli setup with its value, in lexicographic order of `X < Y < Z` per qubit.
fn all_pauli_values(psi: &PureState, region: &Region, measure: EntanglementMeasure) -> Vec<(f64, Vec<Axis>)> {
    let table = omega_table(region);
    let mask = a_mask(region);
    let bar = region.omega_bar();
    let ctx = Dfs { region, table: &table, a_mask: mask, measure };
    if bar.is_empty() {
        let v = average_from_rotated(psi.amps(), &table, bar, mask, measure, SKIP_PROBABILITY);
        return vec![(v, vec![])];
    }
    Axis::ALL
        .par_iter()
        .flat_map_iter(|&axis| {
            let mut amps = psi.amps().to_vec();
            rotate_qubit(&mut amps, bar[0], &Basis::Pauli(axis).bra_rows());
            let mut out = Vec::new();
            ctx.walk(1, &amps, &mut vec![axis], &mut out);
            out
        })
        .collect()
}

struct Dfs<'a> {
    region: &'a Region,
    table: &'a [usize],
    a_mask: usize,
    measure: EntanglementMeasure,
}

impl Dfs<'_> {
    fn walk(&self, depth: usize, amps: &[Complex64], axes: &mut Vec<Axis>, out: &mut Vec<(f64, Vec<Axis>)>) {
        let bar = self.region.omega_bar();
        if depth == bar.len() {
            let v = average_from_rotated(amps, self.table, bar, self.a_mask, self.measure, SKIP_PROBABILITY);
            out.push((v, axes.clone()));
            return;
        }
        for axis in Axis::ALL {
            axes.push(axis);
            match Basis::Pauli(axis).bra_rows() {
                None => self.walk(depth + 1, amps, axes, out),
                rows => {
                    let mut next = amps.to_vec();
                    rotate_qubit(&mut next, bar[depth], &rows);
                    self.walk(depth + 1, &next, axes, out);
                }
            }
            axes.pop();
        }
    }
}

fn check_limit(region: &Region, limit: usize, what: &'static str) -> Result<()> {
    let m = region.omega_bar().len();
    if m > limit {
        return Err(Error::LimitExceeded { what, size: m, limit });
    }
    Ok(())
}

/// Maximum over all `3^|Omega-bar|` Pauli setups.
pub fn restricted_le(state: &QuantumState, region: &Region, cfg: &RleConfig) -> Result<BoundValue> {
    check_limit(region, cfg.limit, "exhaustive Pauli enumeration")?;
    let (value, axes) = match state {
        QuantumState::Pure(psi) => {
            if psi.n_qubits() != region.n_qubits() {
                return Err(Error::QubitMismatch { left: psi.n_qubits(), right: region.n_qubits() });
            }
            best_of(all_pauli_values(psi, region, cfg.measure))
        }
        QuantumState::Mixed(_) => {
            let m = region.omega_bar().len();
            let mut all = Vec::with_capacity(3usize.pow(m as u32));
            for code in 0..3usize.pow(m as u32) {
                let axes: Vec<Axis> = (0..m).map(|i| Axis::ALL[code / 3usize.pow((m - 1 - i) as u32) % 3]).collect();
                let setup = MeasurementSetup::from_axes(region, &axes)?;
                let ens = measure_ensemble(state, region, &setup, None)?;
                all.push((bound_from_ensemble(&ens, cfg.measure)?.value, axes));
            }
            best_of(all)
        }
    };
    Ok(BoundValue {
        kind: BoundKind::Rle,
        value,
        epsilon_m: None,
        setup: Some(MeasurementSetup::from_axes(region, &axes)?),
    })
}

fn best_of(values: Vec<(f64, Vec<Axis>)>) -> (f64, Vec<Axis>) {
    values.into_iter().fold((f64::NEG_INFINITY, vec![]), |best, cur| if cur.0 > best.0 { cur } else { best })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LeConfig {
    pub limit: usize,
    /// Best Pauli setups used as local-search seeds.
    pub pauli_seeds: usize,
    pub random_starts: usize,
    pub max_iters: u64,
    /// Spread of objective values on the simplex at convergence.
    pub tolerance: f64,
    pub initial_step: f64,
    pub seed: u64,
    pub measure: EntanglementMeasure,
}

impl Default for LeConfig {
    fn default() -> Self {
        LeConfig {
            limit: DEFAULT_LE_LIMIT,
            pauli_seeds: 8,
            random_starts: 64,
            max_iters: 4000,
            tolerance: 1e-8,
            initial_step: 0.3,
            seed: 0,
            measure: EntanglementMeasure::Negativity,
        }
    }
}

struct Objective<'a> {
    amps: &'a [Complex64],
    region: &'a Region,
    table: Vec<usize>,
    a_mask: usize,
    measure: EntanglementMeasure,
}

impl Objective<'_> {
    fn value(&self, params: &[f64]) -> f64 {
        let bases: Vec<Basis> =
            params.chunks(2).map(|p| Basis::Angles { theta: p[0], phi: p[1] }).collect();
        evaluate(self.amps, self.region, &self.table, self.a_mask, &bases, self.measure)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(-self.value(p))
    }
}

fn local_search(obj: &Objective<'_>, start: Vec<f64>, cfg: &LeConfig) -> Result<(f64, Vec<f64>)> {
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += cfg.initial_step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(cfg.tolerance)
        .map_err(|e| Error::InvalidState(format!("optimizer setup: {e}")))?;
    let res = Executor::new(obj, solver)
        .configure(|s| s.max_iters(cfg.max_iters))
        .run()
        .map_err(|e| Error::InvalidState(format!("optimizer: {e}")))?;
    let best = res.state.best_param.unwrap_or(start);
    Ok((obj.value(&best), best))
}

impl CostFunction for &Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        (**self).cost(p)
    }
}

/// LE and RLE together; the Pauli enumeration seeds the continuous search.
pub fn le_and_rle(psi: &PureState, region: &Region, cfg: &LeConfig) -> Result<(BoundValue, BoundValue)> {
    check_limit(region, cfg.limit, "continuous optimization")?;
    if psi.n_qubits() != region.n_qubits() {
        return Err(Error::QubitMismatch { left: psi.n_qubits(), right: region.n_qubits() });
    }
    let mut pauli = all_pauli_values(psi, region, cfg.measure);
    let (rle_value, rle_axes) = best_of(pauli.clone());
    let rle_setup = MeasurementSetup::from_axes(region, &rle_axes)?;
    let rle = BoundValue { kind: BoundKind::Rle, value: rle_value, epsilon_m: None, setup: Some(rle_setup.clone()) };
    let m = region.omega_bar().len();
    if m == 0 {
        return Ok((BoundValue { kind: BoundKind::Le, ..rle.clone() }, rle));
    }
    pauli.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut starts: Vec<Vec<f64>> = pauli
        .iter()
        .take(cfg.pauli_seeds)
        .map(|(_, axes)| {
            axes.iter()
                .flat_map(|&a| {
                    let (t, p) = Basis::Pauli(a).angles();
                    [t, p]
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        starts.push(
            (0..m)
                .flat_map(|_| [rng.random::<f64>() * std::f64::consts::PI, rng.random::<f64>() * std::f64::consts::TAU])
                .collect(),
        );
    }
    let obj = Objective {
        amps: psi.amps(),
        region,
        table: omega_table(region),
        a_mask: a_mask(region),
        measure: cfg.measure,
    };
    let results: Vec<Result<(f64, Vec<f64>)>> = starts.into_par_iter().map(|s| local_search(&obj, s, cfg)).collect();
    let mut best = rle_value;
    for r in results {
        best = best.max(r?.0);
    }
    let setup = if best == rle_value { Some(rle_setup) } else { None };
    Ok((BoundValue { kind: BoundKind::Le, value: best, epsilon_m: None, setup }, rle))
}

/// Best average entanglement found over general projective measurements.
pub fn localizable_entanglement(state: &QuantumState, region: &Region, cfg: &LeConfig) -> Result<BoundValue> {
    match state {
        QuantumState::Pure(psi) => Ok(le_and_rle(psi, region, cfg)?.0),
        QuantumState::Mixed(_) => Err(Error::InvalidState("the continuous search takes a pure state".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_kitaev, default_ground_state, Direction, LoopSpec};
    use crate::localize::canonical_setup;

    fn kitaev_state() -> (PureState, Region, crate::codes::CodeLattice) {
        let lat = build_kitaev(2, 2).unwrap();
        let psi = PureState::new(8, default_ground_state(&lat).unwrap()).unwrap();
        let region = Region::from_loop(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        (psi, region, lat)
    }

    #[test]
    fn angle_bases_reproduce_pauli_bases() {
        for axis in Axis::ALL {
            let (theta, phi) = Basis::Pauli(axis).angles();
            let exact = Basis::Pauli(axis).bra_rows();
            let general = Basis::Angles { theta, phi }.bra_rows().unwrap();
            match exact {
                Some(r) => {
                    for i in 0..2 {
                        for j in 0..2 {
                            assert!((r[i][j] - general[i][j]).norm() < 1e-15);
                        }
                    }
                }
                // Z differs only by a phase on |1'>.
                None => {
                    assert!((general[0][0].norm() - 1.0).abs() < 1e-15 && (general[1][1].norm() - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn stabilizer_state_rle_is_one() {
        let (psi, region, lat) = kitaev_state();
        let rle = restricted_le(&psi.clone().into(), &region, &RleConfig::default()).unwrap();
        assert!((rle.value - 1.0).abs() < 1e-10);
        let canonical = canonical_setup(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        let axes = canonical.axes();
        let bases: Vec<Basis> = axes.iter().map(|&a| Basis::Pauli(a)).collect();
        let v = average_entanglement(&psi, &region, &bases, EntanglementMeasure::Negativity).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_and_mixed_rle_agree() {
        let (psi, region, _) = kitaev_state();
        let pure = restricted_le(&psi.clone().into(), &region, &RleConfig::default()).unwrap();
        let rho = crate::state::DensityMatrix::from_pure_state(&psi).unwrap();
        let mixed = restricted_le(&rho.into(), &region, &RleConfig::default()).unwrap();
        assert!((pure.value - mixed.value).abs() < 1e-10);
    }

    #[test]
    fn product_state_le_is_zero() {
        let region = Region::new(4, vec![0, 3], vec![0]).unwrap();
        let cfg = LeConfig { random_starts: 4, ..LeConfig::default() };
        let le = localizable_entanglement(&PureState::zero(4).into(), &region, &cfg).unwrap();
        assert!(le.value.abs() < 1e-12);
    }

    #[test]
    fn continuous_search_matches_grid_oracle() {
        // One measured qubit: a fine grid over the Bloch sphere is an exact-enough oracle.
        let region = Region::new(3, vec![1, 2], vec![1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v: Vec<Complex64> = (0..8).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = PureState::new(3, v.into_iter().map(|a| a / norm).collect()).unwrap();
        let mut grid_max = 0.0f64;
        for i in 0..=200 {
            for j in 0..400 {
                let b = Basis::Angles { theta: std::f64::consts::PI * i as f64 / 200.0, phi: std::f64::consts::TAU * j as f64 / 400.0 };
                grid_max = grid_max.max(average_entanglement(&psi, &region, &[b], EntanglementMeasure::Negativity).unwrap());
            }
        }
        let (le, rle) = le_and_rle(&psi, &region, &LeConfig { random_starts: 8, ..LeConfig::default() }).unwrap();
        assert!(grid_max > rle.value + 1e-3, "grid {grid_max} rle {}", rle.value);
        assert!(le.value >= grid_max - 1e-7, "le {} grid {grid_max}", le.value);
        assert!(le.value <= grid_max + 1e-3);
    }

    #[test]
    fn limits_are_enforced() {
        let region = Region::new(15, vec![0, 1], vec![0]).unwrap();
        let psi = PureState::zero(15);
        assert!(matches!(
            restricted_le(&psi.clone().into(), &region, &RleConfig::default()),
            Err(Error::LimitExceeded { .. })
        ));
        assert!(matches!(
            localizable_entanglement(&psi.into(), &region, &LeConfig::default()),
            Err(Error::LimitExceeded { .. })
        ));
    }
}
