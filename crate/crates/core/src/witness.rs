//! Local witness operators on Kitaev loops and the witness lower bound.
//!
//! `W = I/2 - prod_j (I + s_j)/2` with `s_j` products of code stabilizers.
//! Its expectation `w` gives `E^w = max(-2w, 0)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, CodeLattice, Direction, LoopSpec};
use crate::error::{Error, Result};
use crate::localize::{
    measure_ensemble, negativity, BranchState, EntanglementMeasure, MeasurementSetup, Region,
};
use crate::pauli::{hermitian_product, Axis, PauliString};
use crate::state::QuantumState;

/// Tolerance on the projector decomposition of `w`.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

/// One stabilizer product `s_j` with a readable name such as `V7V8V9`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessGenerator {
    pub label: String,
    pub string: PauliString,
}

#[derive(Debug, Clone)]
pub struct WitnessOperator {
    spec: LoopSpec,
    region: Region,
    generators: Vec<WitnessGenerator>,
    /// `s_j` restricted to `Omega`, on `|Omega|` qubits (bit `i` is `omega[i]`), unsigned.
    local: Vec<PauliString>,
    /// All `2^n` products of the generators, indexed by subset mask.
    terms: Vec<PauliString>,
}

impl WitnessOperator {
    /// Checks the two contribution conditions and expands the products.
    pub fn new(spec: LoopSpec, region: Region, generators: Vec<WitnessGenerator>) -> Result<Self> {
        let n = region.omega().len();
        let omega_mask = region.omega_mask();
        let outside = !omega_mask & full_mask(region.n_qubits());
        if generators.len() != n {
            return Err(Error::WitnessCondition {
                condition: 'b',
                detail: format!("{} generators for {} qubits in the region", generators.len(), n),
            });
        }
        for (i, a) in generators.iter().enumerate() {
            if a.string.n_qubits() != region.n_qubits() {
                return Err(Error::QubitMismatch { left: a.string.n_qubits(), right: region.n_qubits() });
            }
            for b in &generators[i + 1..] {
                let (ra, rb) = (a.string.restricted(outside), b.string.restricted(outside));
                if ra.anticommuting_sites(&rb) % 2 == 1 {
                    return Err(Error::WitnessCondition {
                        condition: 'a',
                        detail: format!("{} and {} anticommute outside the region", a.label, b.label),
                    });
                }
            }
        }
        let local: Vec<PauliString> = generators.iter().map(|g| compress(&g.string, region.omega())).collect();
        check_local_group(&local, &generators)?;

        let mut terms = Vec::with_capacity(1 << n);
        terms.push(PauliString::identity(region.n_qubits()));
        for g in &generators {
            let extended: Vec<PauliString> =
                terms.iter().map(|t| hermitian_product(t, &g.string)).collect::<Result<_>>()?;
            terms.extend(extended);
        }
        Ok(WitnessOperator { spec, region, generators, local, terms })
    }

    pub fn spec(&self) -> LoopSpec {
        self.spec
    }

    /// `Omega` with the hub as part `A`.
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn hub(&self) -> usize {
        self.region.part_a()[0]
    }

    pub fn generators(&self) -> &[WitnessGenerator] {
        &self.generators
    }

    pub fn labels(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.label.as_str()).collect()
    }

    /// The `2^|Omega|` products expanding `prod_j (I + s_j)`.
    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Outcome signs `eta_j` of the generators' outside parts, read from the
    /// setup. Bit `i` of `k` is the outcome on `omega_bar[i]`.
    pub fn signs(&self, setup: &MeasurementSetup, k: usize) -> Result<Vec<i8>> {
        let masks = self.outcome_masks(setup)?;
        Ok(self
            .generators
            .iter()
            .zip(masks)
            .map(|(g, m)| if (k & m).count_ones() % 2 == 1 { -g.string.sign() } else { g.string.sign() })
            .collect())
    }

    /// Per generator, the outcome bits its outside part reads.
    fn outcome_masks(&self, setup: &MeasurementSetup) -> Result<Vec<usize>> {
        let bar = self.region.omega_bar();
        self.generators
            .iter()
            .map(|g| {
                let mut m = 0usize;
                for (i, &q) in bar.iter().enumerate() {
                    let Some(axis) = g.string.axis(q) else { continue };
                    if setup.axis(q) != Some(axis) {
                        return Err(Error::InvalidSetup(format!(
                            "{} acts with {} on qubit {} but the setup measures {}",
                            g.label,
                            axis.letter(),
                            q + 1,
                            setup.axis(q).map_or('-', |a| a.letter())
                        )));
                    }
                    m |= 1 << i;
                }
                Ok(m)
            })
            .collect()
    }

    pub fn describe(&self) -> WitnessDescription {
        WitnessDescription {
            loop_spec: self.spec.to_string(),
            omega: self.region.omega().iter().map(|q| q + 1).collect(),
            hub: self.hub() + 1,
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorDescription { label: g.label.clone(), pauli: g.string.to_string() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.describe()).expect("plain data serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDescription {
    pub loop_spec: String,
    /// 1-based labels.
    pub omega: Vec<usize>,
    pub hub: usize,
    pub generators: Vec<GeneratorDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDescription {
    pub label: String,
    pub pauli: String,
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Restriction to `omega`, relabelled onto `|omega|` qubits, sign dropped.
fn compress(p: &PauliString, omega: &[usize]) -> PauliString {
    let factors: Vec<(usize, Axis)> = omega.iter().enumerate().filter_map(|(i, &q)| p.axis(q).map(|a| (i, a))).collect();
    PauliString::from_factors(omega.len(), factors).expect("compressed support in range")
}

/// Condition (b): the restrictions are commuting, independent, and stabilize
/// a state with entanglement across every cut.
fn check_local_group(local: &[PauliString], gens: &[WitnessGenerator]) -> Result<()> {
    let n = local.first().map_or(0, |p| p.n_qubits());
    let fail = |detail: String| Err(Error::WitnessCondition { condition: 'b', detail });
    for (i, a) in local.iter().enumerate() {
        for (j, b) in local.iter().enumerate().skip(i + 1) {
            if a.anticommuting_sites(b) % 2 == 1 {
                return fail(format!("{} and {} anticommute on the region", gens[i].label, gens[j].label));
            }
        }
    }
    let rows: Vec<u128> = local.iter().map(|p| (p.x_mask() as u128) << 64 | p.z_mask() as u128).collect();
    if gf2_rank(rows.clone()) != n {
        return fail("restricted generators are not independent".into());
    }
    if n > 20 {
        return fail(format!("{n} region qubits is beyond the bipartition check"));
    }
    for cut in 1..(1u64 << n) / 2 {
        if cut_entropy(&rows, cut) == 0 {
            let qubits: Vec<usize> = (0..n).filter(|i| cut >> i & 1 == 1).collect();
            return fail(format!("region state is a product across region positions {qubits:?}"));
        }
    }
    Ok(())
}

/// Entanglement entropy (in bits) of a stabilizer state across `cut`:
/// the rank of the generators restricted to `cut` minus `|cut|`.
fn cut_entropy(rows: &[u128], cut: u64) -> usize {
    let m = (cut as u128) << 64 | cut as u128;
    gf2_rank(rows.iter().map(|r| r & m).collect()) - cut.count_ones() as usize
}

fn gf2_rank(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in (0..128).rev() {
        let Some(pos) = rows[rank..].iter().position(|r| r >> bit & 1 == 1) else { continue };
        rows.swap(rank, rank + pos);
        let pivot = rows[rank];
        for r in rows.iter_mut().skip(rank + 1) {
            if *r >> bit & 1 == 1 {
                *r ^= pivot;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Witness for a horizontal Kitaev loop.
///
/// `L^x_h`: the product of vertices touching the loop once, then the
/// plaquette chains `P_j...P_last` along the row the loop crosses; the hub is
/// the loop's first qubit. `L^z_h` is the dual, with the hub last.
pub fn build_witness(lat: &CodeLattice, spec: &LoopSpec) -> Result<WitnessOperator> {
    if lat.kind() != CodeKind::Kitaev {
        return Err(Error::InvalidLoop("witnesses are built for Kitaev loops only".into()));
    }
    if spec.direction != Direction::H {
        return Err(Error::InvalidLoop(format!("no witness rule for the vertical loop {spec}")));
    }
    let (nph, npv) = lat.dims();
    let n = lat.n_qubits();
    let cell = |x: usize, y: usize| lat.cell(x as isize, y as isize);
    let vertex = |i: usize| PauliString::uniform(n, Axis::X, &lat.vertices()[i]).expect("valid support");
    let plaquette = |i: usize| lat.plaquette_operator(i);

    // (first generator, chain cells) in cell indices; labels are 1-based.
    let (head_kind, head_row, chain_kind, chain_row) = match spec.operator {
        Axis::X => ('V', npv - 1, 'P', npv - 2),
        Axis::Z => ('P', npv - 2, 'V', npv - 1),
        Axis::Y => return Err(Error::InvalidLoop("loop operators are X or Z type".into())),
    };
    let op = |kind: char, i: usize| if kind == 'V' { vertex(i) } else { plaquette(i) };
    let product = |kind: char, cells: &[usize]| -> Result<WitnessGenerator> {
        let mut s = PauliString::identity(n);
        let mut label = String::new();
        for &c in cells {
            s = hermitian_product(&s, &op(kind, c))?;
            label.push_str(&format!("{kind}{}", c + 1));
        }
        Ok(WitnessGenerator { label, string: s })
    };

    let head: Vec<usize> = (0..nph).map(|x| cell(x, head_row)).collect();
    let mut generators = vec![product(head_kind, &head)?];
    for j in 1..nph {
        let chain: Vec<usize> = (j..nph).map(|x| cell(x, chain_row)).collect();
        generators.push(product(chain_kind, &chain)?);
    }

    let omega = lat.loop_support(spec)?.to_vec();
    // Every chain element touches the hub.
    let hub = match spec.operator {
        Axis::X => omega[0],
        _ => *omega.last().expect("nonempty loop"),
    };
    let region = Region::new(n, omega, vec![hub])?;
    WitnessOperator::new(*spec, region, generators)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessValue {
    pub w: f64,
    pub bound: f64,
}

impl WitnessValue {
    pub fn from_w(w: f64) -> Self {
        WitnessValue { w, bound: witness_bound(w) }
    }
}

/// `E^w = -2w` for `w < 0`, else `0`.
pub fn witness_bound(w: f64) -> f64 {
    if w < 0.0 {
        -2.0 * w
    } else {
        0.0
    }
}

/// `w = Tr[W rho]` from the expectations of the expanded products.
pub fn witness_expectation(rho: &QuantumState, wit: &WitnessOperator) -> Result<WitnessValue> {
    if rho.n_qubits() != wit.region.n_qubits() {
        return Err(Error::QubitMismatch { left: rho.n_qubits(), right: wit.region.n_qubits() });
    }
    let sum: f64 = wit.terms.par_iter().map(|t| rho.expectation(t)).collect::<Result<Vec<f64>>>()?.iter().sum();
    let w = 0.5 - sum / wit.terms.len() as f64;
    Ok(WitnessValue::from_w(w))
}

/// Per-outcome local witness values alongside their weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub w: f64,
    pub weighted: f64,
    pub residual: f64,
    /// `(k, p_k, w_k)`.
    pub branches: Vec<(usize, f64, f64)>,
}

/// Compares `w` with `sum_k p_k Tr[W^k rho^k]`, where `W^k` carries the
/// outcome signs `eta_j`. Fails if the residual exceeds the tolerance.
pub fn verify_decomposition(
    rho: &QuantumState,
    wit: &WitnessOperator,
    setup: &MeasurementSetup,
) -> Result<Decomposition> {
    let w = witness_expectation(rho, wit)?.w;
    let masks = wit.outcome_masks(setup)?;
    let ens = measure_ensemble(rho, &wit.region, setup, None)?;
    let n = wit.local.len();

    // Local products prod_{j in T} s_j^Omega, with their phase, and the outcome mask of T.
    let mut local_terms: Vec<(PauliString, usize)> = vec![(PauliString::identity(n), 0)];
    for (j, s) in wit.local.iter().enumerate() {
        let extended: Vec<(PauliString, usize)> = local_terms
            .iter()
            .map(|(t, m)| Ok((hermitian_product(t, s)?, m ^ masks[j])))
            .collect::<Result<_>>()?;
        local_terms.extend(extended);
    }
    let signs: Vec<i8> = (0..1usize << n)
        .map(|t| (0..n).filter(|j| t >> j & 1 == 1).map(|j| wit.generators[j].string.sign()).product())
        .collect();

    let branches: Vec<(usize, f64, f64)> = ens
        .entries
        .par_iter()
        .map(|o| {
            let sum: f64 = local_terms
                .iter()
                .zip(&signs)
                .map(|((t, m), &s)| {
                    let eta = if (o.k & m).count_ones() % 2 == 1 { -s } else { s };
                    eta as f64 * branch_expectation(&o.state, t)
                })
                .sum();
            (o.k, o.p, 0.5 - sum / local_terms.len() as f64)
        })
        .collect();
    let weighted: f64 = branches.iter().map(|&(_, p, wk)| p * wk).sum();
    let residual = (w - weighted).abs();
    if residual > DECOMPOSITION_TOLERANCE {
        return Err(Error::DecompositionResidual { residual, tolerance: DECOMPOSITION_TOLERANCE });
    }
    Ok(Decomposition { w, weighted, residual, branches })
}

fn branch_expectation(state: &BranchState, p: &PauliString) -> f64 {
    match state {
        BranchState::Pure(v) => v
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let (c, ph) = p.action(b);
                (v[c].conj() * ph * a).re
            })
            .sum(),
        BranchState::Mixed(m) => (0..m.nrows())
            .map(|c| {
                let (r, ph) = p.action(c);
                (ph * m[(c, r)]).re
            })
            .sum(),
    }
}

/// Checks on the star-graph algebra behind `E^w = max(-2w, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub n_omega: usize,
    /// `l` in `Z_l`, most significant bit on the hub.
    pub z_indices: [usize; 4],
    /// Max deviation of the four-term formula from direct partial transposition.
    pub transpose_residual: f64,
    /// `||D||_inf` at `(f, h) = (2, 1)`.
    pub d_norm: f64,
    /// Worst deviation of `D`'s singular values from `{|h|, |h-f|, |h-f/2|}` over test pairs.
    pub singular_value_residual: f64,
    /// Worst `|E(rho_p) - (-2w)|` along the attaining family.
    pub attained_residual: f64,
    /// Hub:rest negativity of the star state.
    pub negativity: f64,
}

const STAR_TOLERANCE: f64 = 1e-10;

/// Builds the `n_omega`-node star graph state (hub first) and checks the
/// partial-transpose formula, the norm of `D`, the bound's attainment and
/// the hub:rest negativity.
pub fn verify_star_pt_bound(n_omega: usize) -> Result<StarReport> {
    if !(2..=6).contains(&n_omega) {
        return Err(Error::StarCheck(format!("star size {n_omega} outside 2..=6")));
    }
    let n = n_omega;
    let dim = 1usize << n;
    let psi = star_state(n);
    let rho = outer(&psi);

    let top = 1usize << (n - 1);
    let z_indices = [0, top, top - 1, dim - 1];
    let direct = hub_transpose(&rho, n);
    let z = |l: usize| z_operator(l, n);
    let conj = |l: usize| {
        let zl = z(l);
        &zl * &rho * &zl
    };
    let formula = (conj(z_indices[0]) + conj(z_indices[1]) + conj(z_indices[2]) - conj(z_indices[3])) * half();
    let transpose_residual = max_abs(&(&formula - &direct));

    let identity = DMatrix::<Complex64>::identity(dim, dim);
    // (W~)^{T_A} = I/2 - rho^{T_A}, so -f (W~)^{T_A} + h I = (h - f/2) I + f rho^{T_A}.
    let d_of = |f: f64, h: f64| &identity * Complex64::from(h - f / 2.0) + &direct * Complex64::from(f);
    let d_norm = singular_values(&d_of(2.0, 1.0)).into_iter().fold(0.0, f64::max);

    let mut singular_value_residual: f64 = 0.0;
    for (f, h) in [(2.0f64, 1.0f64), (1.0, 0.3), (0.5, -0.7), (3.0, 2.0)] {
        let expected = [h.abs(), (h - f).abs(), (h - f / 2.0).abs()];
        for s in singular_values(&d_of(f, h)) {
            let dist = expected.iter().map(|e| (e - s).abs()).fold(f64::INFINITY, f64::min);
            singular_value_residual = singular_value_residual.max(dist);
        }
    }

    // Mixing the star state with its hub-flipped partner: w = 1/2 - p and the
    // hub:rest negativity is exactly 2p - 1 for p >= 1/2.
    let flipped = apply_z(&psi, 1);
    let partner = outer(&flipped);
    let witness = &identity * half() - &rho;
    let mut attained_residual: f64 = 0.0;
    for i in 0..=10 {
        let p = 0.5 + 0.05 * i as f64;
        let mix = &rho * Complex64::from(p) + &partner * Complex64::from(1.0 - p);
        let w = (&witness * &mix).trace().re;
        let e = negativity(&mix, n, &[0], EntanglementMeasure::Negativity)?;
        attained_residual = attained_residual.max((e - witness_bound(w)).abs());
    }
    let negativity = negativity(&rho, n, &[0], EntanglementMeasure::Negativity)?;

    let report = StarReport {
        n_omega,
        z_indices,
        transpose_residual,
        d_norm,
        singular_value_residual,
        attained_residual,
        negativity,
    };
    if report.transpose_residual > STAR_TOLERANCE {
        return Err(Error::StarCheck(format!("partial-transpose formula off by {:.3e}", report.transpose_residual)));
    }
    if (report.d_norm - 1.0).abs() > STAR_TOLERANCE {
        return Err(Error::StarCheck(format!("||D|| = {} at (f, h) = (2, 1)", report.d_norm)));
    }
    if report.singular_value_residual > STAR_TOLERANCE {
        return Err(Error::StarCheck(format!("singular values of D off by {:.3e}", report.singular_value_residual)));
    }
    if report.attained_residual > STAR_TOLERANCE {
        return Err(Error::StarCheck(format!("bound not attained, off by {:.3e}", report.attained_residual)));
    }
    if (report.negativity - 1.0).abs() > STAR_TOLERANCE {
        return Err(Error::StarCheck(format!("star negativity {}", report.negativity)));
    }
    Ok(report)
}

fn half() -> Complex64 {
    Complex64::from(0.5)
}

/// `prod_{leaves} CZ(hub, leaf) |+>^n`, hub on qubit 0.
fn star_state(n: usize) -> Vec<Complex64> {
    let amp = (1usize << n) as f64;
    (0..1usize << n)
        .map(|b| {
            let leaves = (b >> 1).count_ones();
            let sign = if b & 1 == 1 && leaves % 2 == 1 { -1.0 } else { 1.0 };
            Complex64::from(sign / amp.sqrt())
        })
        .collect()
}

fn outer(v: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
}

fn apply_z(v: &[Complex64], mask: usize) -> Vec<Complex64> {
    v.iter().enumerate().map(|(b, a)| if (b & mask).count_ones() % 2 == 1 { -a } else { *a }).collect()
}

/// `Z_l` with the multi-index read most significant bit first, hub first.
fn z_operator(l: usize, n: usize) -> DMatrix<Complex64> {
    let mask: usize = (0..n).filter(|&i| l >> (n - 1 - i) & 1 == 1).map(|i| 1 << i).sum();
    DMatrix::from_fn(1 << n, 1 << n, |r, c| {
        if r != c {
            Complex64::from(0.0)
        } else if (r & mask).count_ones() % 2 == 1 {
            Complex64::from(-1.0)
        } else {
            Complex64::from(1.0)
        }
    })
}

/// Transpose on qubit 0.
fn hub_transpose(rho: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        let (r2, c2) = ((r & !1) | (c & 1), (c & !1) | (r & 1));
        rho[(r2, c2)]
    })
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_kitaev, default_ground_state};
    use crate::localize::canonical_setup;
    use crate::spectrum::{solve, SolverConfig};
    use crate::state::{DensityMatrix, PureState};

    fn dense(p: &PauliString) -> DMatrix<Complex64> {
        let d = 1usize << p.n_qubits();
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            let (c, ph) = p.action(b);
            m[(c, b)] = ph;
        }
        m
    }

    /// `I/2 - prod (I + s_j)/2` as an explicit matrix.
    fn dense_witness(wit: &WitnessOperator) -> DMatrix<Complex64> {
        let d = 1usize << wit.region().n_qubits();
        let id = DMatrix::<Complex64>::identity(d, d);
        let mut proj = id.clone();
        for g in wit.generators() {
            proj = proj * (&id + dense(&g.string)) * half();
        }
        &id * half() - proj
    }

    #[test]
    fn table_entries() {
        let cases = [
            ((2, 2), Axis::X, vec!["V3V4", "P2"]),
            ((3, 2), Axis::X, vec!["V4V5V6", "P2P3", "P3"]),
            ((4, 2), Axis::X, vec!["V5V6V7V8", "P2P3P4", "P3P4", "P4"]),
            ((3, 3), Axis::X, vec!["V7V8V9", "P5P6", "P6"]),
            ((5, 2), Axis::X, vec!["V6V7V8V9V10", "P2P3P4P5", "P3P4P5", "P4P5", "P5"]),
            ((2, 2), Axis::Z, vec!["P1P2", "V4"]),
            ((3, 2), Axis::Z, vec!["P1P2P3", "V5V6", "V6"]),
            ((4, 2), Axis::Z, vec!["P1P2P3P4", "V6V7V8", "V7V8", "V8"]),
            ((3, 3), Axis::Z, vec!["P4P5P6", "V8V9", "V9"]),
            ((5, 2), Axis::Z, vec!["P1P2P3P4P5", "V7V8V9V10", "V8V9V10", "V9V10", "V10"]),
        ];
        for ((nph, npv), axis, labels) in cases {
            let lat = build_kitaev(nph, npv).unwrap();
            let wit = build_witness(&lat, &LoopSpec::kitaev(axis, Direction::H)).unwrap();
            assert_eq!(wit.labels(), labels, "{nph}x{npv} {axis:?}");
            assert_eq!(wit.generators().len(), wit.region().omega().len());
        }
    }

    #[test]
    fn unsupported_loops_are_rejected() {
        let lat = build_kitaev(2, 2).unwrap();
        assert!(build_witness(&lat, &LoopSpec::kitaev(Axis::X, Direction::V)).is_err());
        let color = crate::codes::build_color(3, 2).unwrap();
        let spec = LoopSpec::color(Axis::X, Direction::H, crate::codes::PlaquetteColor::Red);
        assert!(build_witness(&color, &spec).is_err());
    }

    #[test]
    fn conditions_are_enforced() {
        let lat = build_kitaev(2, 2).unwrap();
        let wit = build_witness(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        let region = wit.region().clone();
        let mut gens = wit.generators().to_vec();
        // Both restrictions X X: dependent.
        gens[1] = gens[0].clone();
        let err = WitnessOperator::new(wit.spec(), region.clone(), gens).unwrap_err();
        assert!(matches!(err, Error::WitnessCondition { condition: 'b', .. }));
        // Z on one region qubit plus X on the other gives a product state.
        let omega = region.omega().to_vec();
        let gens = vec![
            WitnessGenerator { label: "a".into(), string: PauliString::single(8, omega[0], Axis::Z).unwrap() },
            WitnessGenerator { label: "b".into(), string: PauliString::single(8, omega[1], Axis::X).unwrap() },
        ];
        assert!(matches!(
            WitnessOperator::new(wit.spec(), region.clone(), gens).unwrap_err(),
            Error::WitnessCondition { condition: 'b', .. }
        ));
        let outside = region.omega_bar()[0];
        let gens = vec![
            WitnessGenerator {
                label: "a".into(),
                string: PauliString::from_factors(8, [(omega[0], Axis::X), (omega[1], Axis::X), (outside, Axis::X)])
                    .unwrap(),
            },
            WitnessGenerator {
                label: "b".into(),
                string: PauliString::from_factors(8, [(omega[0], Axis::Z), (omega[1], Axis::Z), (outside, Axis::Z)])
                    .unwrap(),
            },
        ];
        assert!(matches!(
            WitnessOperator::new(wit.spec(), region, gens).unwrap_err(),
            Error::WitnessCondition { condition: 'a', .. }
        ));
    }

    #[test]
    fn zero_field_value_matches_dense() {
        let lat = build_kitaev(2, 2).unwrap();
        let psi = default_ground_state(&lat).unwrap();
        for axis in [Axis::X, Axis::Z] {
            let wit = build_witness(&lat, &LoopSpec::kitaev(axis, Direction::H)).unwrap();
            let state: QuantumState = PureState::new(8, psi.clone()).unwrap().into();
            let v = witness_expectation(&state, &wit).unwrap();
            let m = dense_witness(&wit);
            let x = nalgebra::DVector::from_vec(psi.clone());
            let oracle = (x.adjoint() * &m * &x)[(0, 0)].re;
            assert!((v.w - oracle).abs() < 1e-12);
            assert!((v.w + 0.5).abs() < 1e-12);
            assert!((v.bound - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_is_piecewise() {
        assert_eq!(witness_bound(0.3), 0.0);
        assert_eq!(witness_bound(0.0), 0.0);
        assert!((witness_bound(-0.25) - 0.5).abs() < 1e-15);
        assert_eq!(WitnessValue::from_w(0.0).bound.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn decomposition_holds_on_ground_states() {
        let lat = build_kitaev(2, 2).unwrap();
        for axis in [Axis::X, Axis::Z] {
            let spec = LoopSpec::kitaev(axis, Direction::H);
            let wit = build_witness(&lat, &spec).unwrap();
            let setup = canonical_setup(&lat, &spec).unwrap();
            for (g, tol) in [(0.0, 1e-12), (0.5, 1e-9)] {
                let state: QuantumState = solve(&lat, g, &SolverConfig::default()).unwrap().vector().into();
                let d = verify_decomposition(&state, &wit, &setup).unwrap();
                assert!(d.residual < tol, "{axis:?} g={g}: {}", d.residual);
                let m = dense_witness(&wit);
                let QuantumState::Pure(p) = &state else { unreachable!() };
                let x = nalgebra::DVector::from_vec(p.amps().to_vec());
                assert!(((x.adjoint() * &m * &x)[(0, 0)].re - d.w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decomposition_on_maximally_mixed_state() {
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::X, Direction::H);
        let wit = build_witness(&lat, &spec).unwrap();
        let setup = canonical_setup(&lat, &spec).unwrap();
        let state: QuantumState = DensityMatrix::maximally_mixed(8).into();
        let d = verify_decomposition(&state, &wit, &setup).unwrap();
        let trace = dense_witness(&wit).trace().re / 256.0;
        assert!((d.w - trace).abs() < 1e-12);
        assert!((d.weighted - trace).abs() < 1e-12);
    }

    #[test]
    fn incompatible_setup_is_reported() {
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::X, Direction::H);
        let wit = build_witness(&lat, &spec).unwrap();
        let setup = MeasurementSetup::uniform(wit.region(), Axis::Y);
        assert!(wit.signs(&setup, 0).is_err());
        let canonical = canonical_setup(&lat, &spec).unwrap();
        assert_eq!(wit.signs(&canonical, 0).unwrap(), vec![1, 1]);
    }

    #[test]
    fn star_checks_pass() {
        for n in 2..=6 {
            let r = verify_star_pt_bound(n).unwrap();
            assert!((r.negativity - 1.0).abs() < 1e-10);
        }
        assert_eq!(verify_star_pt_bound(3).unwrap().z_indices, [0, 4, 3, 7]);
        assert!(verify_star_pt_bound(1).is_err());
        assert!(verify_star_pt_bound(7).is_err());
    }

    #[test]
    fn json_export_lists_generators() {
        let lat = build_kitaev(2, 2).unwrap();
        let wit = build_witness(&lat, &LoopSpec::kitaev(Axis::Z, Direction::H)).unwrap();
        let d: WitnessDescription = serde_json::from_str(&wit.to_json()).unwrap();
        assert_eq!(d.generators.len(), 2);
        assert_eq!(d.generators[0].label, "P1P2");
        assert_eq!(d.hub, wit.hub() + 1);
        for g in &d.generators {
            PauliString::parse(&g.pauli, 8).unwrap();
        }
    }
}
