//! Measurement setups and the hierarchy of localizable-entanglement bounds.
//!
//! Outcome indices `k` put the outcome of `omega_bar[i]` in bit `i`; bit value
//! 0 is the `+1` eigenvector of the measured axis (the `|0'>` of a general
//! basis). Reduced states on `Omega` put `omega[i]` in bit `i`.

mod measure;
mod optimize;
mod preferred;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, CodeLattice, LoopSpec};
use crate::error::{Error, Result};
use crate::pauli::Axis;

pub use measure::{measure_ensemble, measure_ensemble_with, EnsembleOptions};
pub use optimize::{
    average_entanglement, le_and_rle, localizable_entanglement, restricted_le, Basis, LeConfig, RleConfig, DEFAULT_LE_LIMIT,
    DEFAULT_RLE_LIMIT,
};
pub use preferred::{build_preferred_set, PreferredSet, DEFAULT_CALIBRATION, DEFAULT_P_C};

/// Probability below which outcomes of a full ensemble are skipped.
pub const SKIP_PROBABILITY: f64 = 1e-14;

/// The loop `Omega`, its complement, and a bipartition `A:B` of `Omega`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    n_qubits: usize,
    omega: Vec<usize>,
    omega_bar: Vec<usize>,
    part_a: Vec<usize>,
}

impl Region {
    pub fn new(n_qubits: usize, omega: Vec<usize>, part_a: Vec<usize>) -> Result<Self> {
        if n_qubits > 63 {
            return Err(Error::DimensionOverflow { n_qubits, max: 63 });
        }
        let mut sorted = omega.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != omega.len() {
            return Err(Error::InvalidRegion("repeated qubit in omega".into()));
        }
        if let Some(&q) = omega.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if omega.len() < 2 {
            return Err(Error::InvalidRegion("omega needs at least two qubits".into()));
        }
        if part_a.is_empty() || part_a.len() >= omega.len() {
            return Err(Error::InvalidRegion("both sides of the bipartition must be nonempty".into()));
        }
        let mut a_sorted = part_a.clone();
        a_sorted.sort_unstable();
        a_sorted.dedup();
        if a_sorted.len() != part_a.len() || part_a.iter().any(|q| !omega.contains(q)) {
            return Err(Error::InvalidRegion("part A must be distinct qubits of omega".into()));
        }
        let omega_bar = (0..n_qubits).filter(|q| !omega.contains(q)).collect();
        Ok(Region { n_qubits, omega, omega_bar, part_a: a_sorted })
    }

    /// Loop region with `A` the first loop qubit (1:rest).
    pub fn from_loop(lat: &CodeLattice, spec: &LoopSpec) -> Result<Self> {
        let omega = lat.loop_support(spec)?.to_vec();
        let a = vec![omega[0]];
        Region::new(lat.n_qubits(), omega, a)
    }

    pub fn with_part_a(&self, part_a: Vec<usize>) -> Result<Self> {
        Region::new(self.n_qubits, self.omega.clone(), part_a)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn omega_bar(&self) -> &[usize] {
        &self.omega_bar
    }

    pub fn part_a(&self) -> &[usize] {
        &self.part_a
    }

    pub fn part_b(&self) -> Vec<usize> {
        self.omega.iter().copied().filter(|q| !self.part_a.contains(q)).collect()
    }

    /// Positions of `A` inside `omega`, i.e. bit indices in reduced states.
    pub fn a_positions(&self) -> Vec<usize> {
        self.part_a.iter().map(|q| self.omega.iter().position(|o| o == q).expect("A within omega")).collect()
    }

    pub fn omega_mask(&self) -> u64 {
        self.omega.iter().fold(0, |m, &q| m | 1 << q)
    }
}

/// One Pauli axis per qubit of `Omega-bar`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSetup {
    axes: BTreeMap<usize, Axis>,
}

impl MeasurementSetup {
    pub fn new(region: &Region, axes: BTreeMap<usize, Axis>) -> Result<Self> {
        let keys: Vec<usize> = axes.keys().copied().collect();
        if keys != region.omega_bar() {
            return Err(Error::InvalidSetup("setup must assign exactly one axis to every qubit outside omega".into()));
        }
        Ok(MeasurementSetup { axes })
    }

    /// Axes listed in `Omega-bar` order.
    pub fn from_axes(region: &Region, axes: &[Axis]) -> Result<Self> {
        if axes.len() != region.omega_bar().len() {
            return Err(Error::InvalidSetup(format!(
                "{} axes for {} measured qubits",
                axes.len(),
                region.omega_bar().len()
            )));
        }
        Self::new(region, region.omega_bar().iter().copied().zip(axes.iter().copied()).collect())
    }

    pub fn uniform(region: &Region, axis: Axis) -> Self {
        MeasurementSetup { axes: region.omega_bar().iter().map(|&q| (q, axis)).collect() }
    }

    pub fn axis(&self, qubit: usize) -> Option<Axis> {
        self.axes.get(&qubit).copied()
    }

    /// Axes in `Omega-bar` order.
    pub fn axes(&self) -> Vec<Axis> {
        self.axes.values().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.axes.iter().map(|(&q, &a)| (q, a))
    }

    /// Qubits measured along `axis`, ascending.
    pub fn qubits_on(&self, axis: Axis) -> Vec<usize> {
        self.axes.iter().filter(|(_, &a)| a == axis).map(|(&q, _)| q).collect()
    }

    /// Parses `"Z:7,8,9; X:rest"` with 1-based labels.
    pub fn parse(text: &str, region: &Region) -> Result<Self> {
        let mut axes = BTreeMap::new();
        let mut rest: Option<Axis> = None;
        for group in text.split(';').map(str::trim).filter(|g| !g.is_empty()) {
            let (axis, list) = group
                .split_once(':')
                .ok_or_else(|| Error::parse("measurement setup", format!("missing ':' in `{group}`")))?;
            let axis_text = axis.trim();
            let mut chars = axis_text.chars();
            let axis = match (chars.next().and_then(Axis::from_letter), chars.next()) {
                (Some(a), None) => a,
                _ => return Err(Error::parse("measurement setup", format!("unknown axis `{axis_text}`"))),
            };
            if list.trim().eq_ignore_ascii_case("rest") {
                if rest.replace(axis).is_some() {
                    return Err(Error::parse("measurement setup", "`rest` used twice"));
                }
                continue;
            }
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let label: usize = item
                    .parse()
                    .map_err(|_| Error::parse("measurement setup", format!("bad qubit label `{item}`")))?;
                if label == 0 || label > region.n_qubits() {
                    return Err(Error::parse("measurement setup", format!("label {label} out of range")));
                }
                if axes.insert(label - 1, axis).is_some() {
                    return Err(Error::parse("measurement setup", format!("qubit {label} listed twice")));
                }
            }
        }
        if let Some(axis) = rest {
            for &q in region.omega_bar() {
                axes.entry(q).or_insert(axis);
            }
        }
        Self::new(region, axes)
    }
}

impl fmt::Display for MeasurementSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for axis in Axis::ALL {
            let qs = self.qubits_on(axis);
            if qs.is_empty() {
                continue;
            }
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            let labels: Vec<String> = qs.iter().map(|q| (q + 1).to_string()).collect();
            write!(f, "{}:{}", axis.letter(), labels.join(","))?;
        }
        Ok(())
    }
}

/// Canonical Pauli setup for a loop.
///
/// Kitaev `L^x`: qubits on plaquettes touching the loop go to `Z`, the rest to `X`.
/// Kitaev `L^z`: qubits on vertices touching the loop go to `X`, the rest to `Z`.
/// Color `L^x`: lattice neighbors of the loop go to `X`, the rest to `Z`.
pub fn canonical_setup(lat: &CodeLattice, spec: &LoopSpec) -> Result<MeasurementSetup> {
    let region = Region::from_loop(lat, spec)?;
    let omega = region.omega();
    let touching = |cells: &mut dyn Iterator<Item = &Vec<usize>>| -> Vec<usize> {
        let mut out: Vec<usize> =
            cells.filter(|c| c.iter().any(|q| omega.contains(q))).flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let (special, special_axis, other_axis) = match (lat.kind(), spec.operator) {
        (CodeKind::Kitaev, Axis::X) => {
            (touching(&mut lat.plaquettes().iter().map(|p| &p.qubits)), Axis::Z, Axis::X)
        }
        (CodeKind::Kitaev, Axis::Z) => (touching(&mut lat.vertices().iter()), Axis::X, Axis::Z),
        (CodeKind::Color, Axis::X) => (lat.link_neighbors(omega), Axis::X, Axis::Z),
        _ => {
            return Err(Error::InvalidSetup(format!("no canonical setup for {spec} on {}", lat.describe())));
        }
    };
    let axes = region
        .omega_bar()
        .iter()
        .map(|&q| (q, if special.contains(&q) { special_axis } else { other_axis }))
        .collect();
    MeasurementSetup::new(&region, axes)
}

/// Negativity or its normalized variant `N / (d - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementMeasure {
    #[default]
    Negativity,
    NormalizedNegativity,
}

impl EntanglementMeasure {
    fn scale(self, n: usize, n_a: usize) -> f64 {
        match self {
            EntanglementMeasure::Negativity => 1.0,
            EntanglementMeasure::NormalizedNegativity => {
                let d = 1usize << n_a.min(n - n_a);
                1.0 / (d - 1) as f64
            }
        }
    }
}

fn split_index(i: usize, a_mask: usize, n: usize) -> (usize, usize) {
    let (mut ia, mut ib, mut ka, mut kb) = (0, 0, 0, 0);
    for q in 0..n {
        let bit = i >> q & 1;
        if a_mask >> q & 1 == 1 {
            ia |= bit << ka;
            ka += 1;
        } else {
            ib |= bit << kb;
            kb += 1;
        }
    }
    (ia, ib)
}

fn positions_mask(n: usize, a_positions: &[usize]) -> Result<usize> {
    let mut mask = 0usize;
    for &p in a_positions {
        if p >= n {
            return Err(Error::QubitOutOfRange { index: p, n_qubits: n });
        }
        mask |= 1 << p;
    }
    if mask == 0 || mask.count_ones() as usize == n || mask.count_ones() as usize != a_positions.len() {
        return Err(Error::InvalidRegion("bipartition sides must be nonempty and distinct".into()));
    }
    Ok(mask)
}

/// `||rho^{T_A}||_1 - 1` for an `n`-qubit density matrix, `A` given by bit positions.
pub fn negativity(rho: &DMatrix<Complex64>, n: usize, a_positions: &[usize], measure: EntanglementMeasure) -> Result<f64> {
    let dim = 1usize << n;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::InvalidState(format!("expected {dim}x{dim}, got {}x{}", rho.nrows(), rho.ncols())));
    }
    let a_mask = positions_mask(n, a_positions)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let herm = (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))).map(|(r, c)| (rho[(r, c)] - rho[(c, r)].conj()).norm());
    if herm.fold(0.0f64, f64::max) > 1e-8 {
        return Err(Error::InvalidState("not Hermitian".into()));
    }
    let pt = DMatrix::from_fn(dim, dim, |r, c| {
        let swap = (r ^ c) & a_mask;
        rho[(r ^ swap, c ^ swap)]
    });
    let pt = (&pt + pt.adjoint()) * Complex64::new(0.5, 0.0);
    let trace_norm: f64 = pt.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok(((trace_norm - 1.0) * measure.scale(n, a_positions.len())).max(0.0))
}

/// Negativity of the pure state `v / |v|` on `n` qubits; `v` need not be normalized.
pub fn pure_negativity(v: &[Complex64], n: usize, a_positions: &[usize], measure: EntanglementMeasure) -> Result<f64> {
    if v.len() != 1usize << n {
        return Err(Error::LengthMismatch { len: v.len(), n_qubits: n });
    }
    let a_mask = positions_mask(n, a_positions)?;
    Ok(pure_negativity_unchecked(v, n, a_mask, measure))
}

pub(crate) fn pure_negativity_unchecked(v: &[Complex64], n: usize, a_mask: usize, measure: EntanglementMeasure) -> f64 {
    let n_a = a_mask.count_ones() as usize;
    // Gram matrix of the smaller side gives the Schmidt spectrum.
    let small_is_a = n_a <= n - n_a;
    let ds = 1usize << if small_is_a { n_a } else { n - n_a };
    let mut gram = DMatrix::<Complex64>::zeros(ds, ds);
    let dl = v.len() / ds;
    let mut m = DMatrix::<Complex64>::zeros(ds, dl);
    for (i, &amp) in v.iter().enumerate() {
        let (ia, ib) = split_index(i, a_mask, n);
        if small_is_a {
            m[(ia, ib)] = amp;
        } else {
            m[(ib, ia)] = amp;
        }
    }
    gram.gemm(Complex64::new(1.0, 0.0), &m, &m.adjoint(), Complex64::new(0.0, 0.0));
    let tr = gram.trace().re;
    if tr <= 0.0 {
        return 0.0;
    }
    let neg = if ds == 2 {
        let det = (gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)]).re.max(0.0);
        2.0 * det.sqrt() / tr
    } else {
        let herm = (&gram + gram.adjoint()) * Complex64::new(0.5 / tr, 0.0);
        let s: f64 = herm.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).sum();
        s * s - 1.0
    };
    (neg * measure.scale(n, n_a)).max(0.0)
}

/// Post-measurement state on `Omega` for one outcome, normalized.
#[derive(Debug, Clone)]
pub enum BranchState {
    Pure(Vec<Complex64>),
    Mixed(DMatrix<Complex64>),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub k: usize,
    pub p: f64,
    pub state: BranchState,
}

impl Outcome {
    pub fn rho(&self) -> DMatrix<Complex64> {
        match &self.state {
            BranchState::Mixed(m) => m.clone(),
            BranchState::Pure(v) => DMatrix::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj()),
        }
    }

    pub fn entanglement(&self, n_omega: usize, a_mask: usize, measure: EntanglementMeasure) -> Result<f64> {
        match &self.state {
            BranchState::Pure(v) => Ok(pure_negativity_unchecked(v, n_omega, a_mask, measure)),
            BranchState::Mixed(m) => {
                let a: Vec<usize> = (0..n_omega).filter(|q| a_mask >> q & 1 == 1).collect();
                negativity(m, n_omega, &a, measure)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutcomeEnsemble {
    pub region: Region,
    pub setup: MeasurementSetup,
    pub entries: Vec<Outcome>,
    /// Total probability of outcomes dropped below the skip threshold.
    pub skipped_mass: f64,
    /// Set when only a preferred set of outcomes was produced.
    pub restricted: Option<PreferredSet>,
}

impl OutcomeEnsemble {
    pub fn probability_sum(&self) -> f64 {
        self.entries.iter().map(|o| o.p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "RLE")]
    Rle,
    #[serde(rename = "E_prime")]
    EPrime,
    #[serde(rename = "E_double_prime")]
    EDoublePrime,
    #[serde(rename = "E_witness")]
    EWitness,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] =
        [BoundKind::Le, BoundKind::Rle, BoundKind::EPrime, BoundKind::EDoublePrime, BoundKind::EWitness];

    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Le => "E_L",
            BoundKind::Rle => "E_RL",
            BoundKind::EPrime => "E_prime",
            BoundKind::EDoublePrime => "E_dprime",
            BoundKind::EWitness => "E_w",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
    /// Worst-case error of a preferred-set estimate.
    pub epsilon_m: Option<f64>,
    pub setup: Option<MeasurementSetup>,
}

/// `sum_k p_k E(rho^k)`; a restricted ensemble yields `E''` with its error bound.
pub fn bound_from_ensemble(ens: &OutcomeEnsemble, measure: EntanglementMeasure) -> Result<BoundValue> {
    let n_omega = ens.region.omega().len();
    let a_mask = ens.region.a_positions().iter().fold(0usize, |m, &p| m | 1 << p);
    let mut value = 0.0;
    for o in &ens.entries {
        value += o.p * o.entanglement(n_omega, a_mask, measure)?;
    }
    let (kind, epsilon_m) = match &ens.restricted {
        None => (BoundKind::EPrime, None),
        Some(set) => (BoundKind::EDoublePrime, Some(set.epsilon_m(ens.region.omega_bar().len()))),
    };
    Ok(BoundValue { kind, value, epsilon_m, setup: Some(ens.setup.clone()) })
}

/// Loop direction helper for callers building regions from text.
pub fn loop_region(lat: &CodeLattice, spec: &LoopSpec, part_a: Option<Vec<usize>>) -> Result<Region> {
    let r = Region::from_loop(lat, spec)?;
    match part_a {
        Some(a) => r.with_part_a(a),
        None => Ok(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_color, build_kitaev, Direction, PlaquetteColor};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket_rho(v: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(v.len(), v.len(), |r, col| v[r] * v[col].conj())
    }

    #[test]
    fn bell_and_ghz_negativity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(s), c(0.0), c(0.0), c(s)];
        let rho = ket_rho(&bell);
        assert!((negativity(&rho, 2, &[0], EntanglementMeasure::NormalizedNegativity).unwrap() - 1.0).abs() < 1e-12);
        let mut ghz = vec![c(0.0); 8];
        ghz[0] = c(s);
        ghz[7] = c(s);
        let rho = ket_rho(&ghz);
        assert!((negativity(&rho, 3, &[0], EntanglementMeasure::Negativity).unwrap() - 1.0).abs() < 1e-12);
        assert!((pure_negativity(&ghz, 3, &[2], EntanglementMeasure::Negativity).unwrap() - 1.0).abs() < 1e-12);
        let product = vec![c(0.6), c(0.8), c(0.0), c(0.0)];
        assert!(negativity(&ket_rho(&product), 2, &[1], EntanglementMeasure::Negativity).unwrap() < 1e-12);
    }

    #[test]
    fn negativity_rejects_bad_input() {
        let rho = DMatrix::from_diagonal_element(4, 4, c(0.5));
        assert!(negativity(&rho, 2, &[0], EntanglementMeasure::Negativity).is_err());
        let rho = DMatrix::from_diagonal_element(4, 4, c(0.25));
        assert!(negativity(&rho, 2, &[], EntanglementMeasure::Negativity).is_err());
        assert!(negativity(&rho, 2, &[0, 1], EntanglementMeasure::Negativity).is_err());
    }

    proptest! {
        #[test]
        fn pure_fast_path_matches_partial_transpose(
            re in proptest::collection::vec(-1.0f64..1.0, 16),
            im in proptest::collection::vec(-1.0f64..1.0, 16),
            a in 1usize..15,
        ) {
            let norm: f64 = re.iter().zip(&im).map(|(x, y)| x * x + y * y).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let v: Vec<Complex64> = re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y) / norm).collect();
            let a_pos: Vec<usize> = (0..4).filter(|q| a >> q & 1 == 1).collect();
            for m in [EntanglementMeasure::Negativity, EntanglementMeasure::NormalizedNegativity] {
                let fast = pure_negativity(&v, 4, &a_pos, m).unwrap();
                let slow = negativity(&ket_rho(&v), 4, &a_pos, m).unwrap();
                prop_assert!((fast - slow).abs() < 1e-9, "{} vs {}", fast, slow);
            }
        }
    }

    #[test]
    fn kitaev_canonical_setups_follow_the_figure() {
        let lat = build_kitaev(3, 3).unwrap();
        let sx = canonical_setup(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        let z: Vec<usize> = sx.qubits_on(Axis::Z).iter().map(|q| q + 1).collect();
        assert_eq!(z, vec![7, 8, 9, 13, 14, 15]);
        assert!(sx.qubits_on(Axis::Y).is_empty());
        let sz = canonical_setup(&lat, &LoopSpec::kitaev(Axis::Z, Direction::H)).unwrap();
        let x: Vec<usize> = sz.qubits_on(Axis::X).iter().map(|q| q + 1).collect();
        assert_eq!(x, vec![10, 11, 12, 16, 17, 18]);
        assert_eq!(sx.to_string(), "X:1,2,3,4,5,6,16,17,18; Z:7,8,9,13,14,15");
    }

    #[test]
    fn two_by_two_vertical_z_setup() {
        let lat = build_kitaev(2, 2).unwrap();
        let s = canonical_setup(&lat, &LoopSpec::kitaev(Axis::Z, Direction::V)).unwrap();
        let z: Vec<usize> = s.qubits_on(Axis::Z).iter().map(|q| q + 1).collect();
        assert_eq!(z, vec![3, 7]);
    }

    #[test]
    fn color_canonical_setup() {
        let lat = build_color(3, 2).unwrap();
        let spec = LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Red);
        let s = canonical_setup(&lat, &spec).unwrap();
        let omega = lat.loop_support(&spec).unwrap();
        assert_eq!(s.qubits_on(Axis::X), lat.link_neighbors(omega));
        assert!(canonical_setup(&lat, &LoopSpec::color(Axis::Z, Direction::H, PlaquetteColor::Red)).is_err());
    }

    #[test]
    fn setup_text_round_trip() {
        let lat = build_kitaev(3, 3).unwrap();
        let region = Region::from_loop(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        let s = MeasurementSetup::parse("Z:7,8,9,13,14,15; X:rest", &region).unwrap();
        assert_eq!(s, canonical_setup(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap());
        assert_eq!(MeasurementSetup::parse(&s.to_string(), &region).unwrap(), s);
        assert!(MeasurementSetup::parse("Z:7,8; X:1", &region).is_err());
        assert!(MeasurementSetup::parse("Q:rest", &region).is_err());
        assert!(MeasurementSetup::parse("Z:10; X:rest", &region).is_err());
    }

    #[test]
    fn region_validation() {
        assert!(Region::new(4, vec![0, 1], vec![0]).is_ok());
        assert!(Region::new(4, vec![0, 0], vec![0]).is_err());
        assert!(Region::new(4, vec![0, 1], vec![2]).is_err());
        assert!(Region::new(4, vec![0, 1], vec![0, 1]).is_err());
        let r = Region::new(5, vec![1, 3, 4], vec![3]).unwrap();
        assert_eq!(r.omega_bar(), &[0, 2]);
        assert_eq!(r.a_positions(), vec![1]);
        assert_eq!(r.part_b(), vec![1, 4]);
    }
}
