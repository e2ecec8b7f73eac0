//! Field-perturbed code Hamiltonians and their ground states.
//!
//! Every term is a real Pauli string. The X parts of the terms generate a
//! group of bit flips, and the ground state lives in the orbit of one basis
//! state under that group. Both models put the field along `Z`, so the field
//! is diagonal and the sector is the orbit of `|0...0>`. The color code field
//! is taken along `Z` rather than `X`: only then does the small-field ground
//! state approach `prod_p (I + S^x_p)|0...0>`, the state the canonical color
//! setup is built for. The two choices are related by a global Hadamard.

pub mod lanczos;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::codes::{CodeKind, CodeLattice};
use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString, SparseOperator, DEFAULT_MAX_QUBITS};
use crate::state::PureState;
use crate::subspace::{Frame, Subspace};

pub use lanczos::{lowest_eigenpair, Eigenpair, LanczosConfig};

/// Dimensionless field `g = h/J` with `J = 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldParams {
    pub g: f64,
}

impl FieldParams {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidState(format!("field strength must be finite and non-negative, got {g}")));
        }
        Ok(FieldParams { g })
    }
}

/// Largest sector the solver will build.
pub const DEFAULT_SECTOR_LIMIT: usize = 1 << 22;

/// Qubit count from which the restricted operator is applied matrix-free.
pub const MATRIX_FREE_FROM: usize = 16;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_qubits: usize,
    kind: CodeKind,
    frame: Frame,
    g: f64,
    /// `(coefficient, string)` in the working frame; no `Y` factors.
    terms: Vec<(f64, PauliString)>,
}

/// `H_K = -sum S_p - sum S_v - g sum Z_i` or `H_C = -sum (S^x_p + S^z_p) - g sum Z_i`.
pub fn build_hamiltonian(lat: &CodeLattice, params: FieldParams) -> Hamiltonian {
    let n = lat.n_qubits();
    let mut terms = Vec::with_capacity(lat.n_plaquettes() + lat.n_x_stabilizers() + n);
    let (frame, field_axis) = match lat.kind() {
        CodeKind::Kitaev => (Frame::Computational, Axis::Z),
        CodeKind::Color => (Frame::Computational, Axis::Z),
    };
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let to_frame = |p: PauliString| match frame {
        Frame::Computational => p,
        Frame::Hadamard => p.hadamard_conjugated(all),
    };
    for p in 0..lat.n_plaquettes() {
        terms.push((-1.0, to_frame(lat.plaquette_operator(p))));
    }
    for i in 0..lat.n_x_stabilizers() {
        terms.push((-1.0, to_frame(lat.x_stabilizer(i))));
    }
    if params.g != 0.0 {
        for q in 0..n {
            terms.push((-params.g, to_frame(PauliString::single(n, q, field_axis).expect("qubit in range"))));
        }
    }
    Hamiltonian { n_qubits: n, kind: lat.kind(), frame, g: params.g, terms }
}

impl Hamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Terms expressed in the computational frame.
    pub fn physical_terms(&self) -> Vec<(f64, PauliString)> {
        let all = if self.n_qubits == 64 { u64::MAX } else { (1u64 << self.n_qubits) - 1 };
        self.terms
            .iter()
            .map(|&(c, p)| match self.frame {
                Frame::Computational => (c, p),
                Frame::Hadamard => (c, p.hadamard_conjugated(all)),
            })
            .collect()
    }

    pub fn flip_masks(&self) -> Vec<u64> {
        self.terms.iter().map(|(_, p)| p.x_mask()).filter(|&m| m != 0).collect()
    }

    /// Orbit of the working-frame `|0...0>` under the Hamiltonian's flips.
    pub fn sector(&self, limit: usize) -> Result<Subspace> {
        Subspace::closure(self.n_qubits, 0, &self.flip_masks(), limit)
    }

    /// Explicit matrix over the full register, computational frame.
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        self.to_sparse_with_limit(DEFAULT_MAX_QUBITS)
    }

    pub fn to_sparse_with_limit(&self, max_qubits: usize) -> Result<SparseOperator> {
        if self.n_qubits > max_qubits {
            return Err(Error::DimensionOverflow { n_qubits: self.n_qubits, max: max_qubits });
        }
        let dim = 1usize << self.n_qubits;
        let terms = self.physical_terms();
        let mut triplets = Vec::with_capacity(dim * terms.len());
        for b in 0..dim {
            for (c, p) in &terms {
                let (t, v) = p.action(b);
                triplets.push((t, b, v * *c));
            }
        }
        SparseOperator::from_triplets(dim, triplets)
    }

    /// The operator restricted to an invariant subspace of the working frame.
    pub fn restrict(&self, subspace: Arc<Subspace>) -> Result<SubspaceOperator> {
        for &(_, p) in &self.terms {
            if p.x_mask() != 0 {
                for &b in subspace.states().iter().take(4) {
                    if subspace.position(b ^ p.x_mask() as usize).is_none() {
                        return Err(Error::InvalidState("subspace is not invariant under the Hamiltonian".into()));
                    }
                }
            }
        }
        if self.n_qubits >= MATRIX_FREE_FROM {
            return Ok(SubspaceOperator { subspace, storage: Storage::MatrixFree(self.terms.clone()) });
        }
        Ok(SubspaceOperator::assembled(subspace, &self.terms))
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Csr { row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64> },
    MatrixFree(Vec<(f64, PauliString)>),
}

/// Real symmetric operator on a subspace.
#[derive(Debug, Clone)]
pub struct SubspaceOperator {
    subspace: Arc<Subspace>,
    storage: Storage,
}

impl SubspaceOperator {
    fn assembled(subspace: Arc<Subspace>, terms: &[(f64, PauliString)]) -> Self {
        let d = subspace.dim();
        let mut row_ptr = Vec::with_capacity(d + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row: HashMap<usize, f64> = HashMap::new();
        for i in 0..d {
            row.clear();
            let b = subspace.state(i);
            // Row i holds <b|H|c>; P is real symmetric so <b|P|c> = <c|P|b>.
            for (c, p) in terms {
                let (t, s) = p.real_action(b);
                if let Some(j) = subspace.position(t) {
                    *row.entry(j).or_insert(0.0) += c * s;
                }
            }
            let mut entries: Vec<(usize, f64)> = row.iter().map(|(&j, &v)| (j, v)).filter(|&(_, v)| v != 0.0).collect();
            entries.sort_unstable_by_key(|&(j, _)| j);
            for (j, v) in entries {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SubspaceOperator { subspace, storage: Storage::Csr { row_ptr, cols, vals } }
    }

    /// Explicit operator from real Pauli terms on an invariant subspace.
    pub fn from_terms(subspace: Arc<Subspace>, terms: &[(f64, PauliString)]) -> Self {
        Self::assembled(subspace, terms)
    }

    /// Term-by-term application without assembling rows.
    pub fn matrix_free(subspace: Arc<Subspace>, terms: &[(f64, PauliString)]) -> Self {
        SubspaceOperator { subspace, storage: Storage::MatrixFree(terms.to_vec()) }
    }

    /// Forces the explicit representation (dynamics reuses it many times).
    pub fn into_assembled(self) -> Self {
        match self.storage {
            Storage::Csr { .. } => self,
            Storage::MatrixFree(terms) => Self::assembled(self.subspace, &terms),
        }
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.subspace
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self.storage, Storage::MatrixFree(_))
    }

    /// Nonzeros of row `i` (assembled form only).
    pub fn row(&self, i: usize) -> Option<impl Iterator<Item = (usize, f64)> + '_> {
        match &self.storage {
            Storage::Csr { row_ptr, cols, vals } => {
                let span = row_ptr[i]..row_ptr[i + 1];
                Some(cols[span.clone()].iter().copied().zip(vals[span].iter().copied()))
            }
            Storage::MatrixFree(_) => None,
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Csr { row_ptr, cols, vals } => {
                for i in 0..x.len() {
                    y[i] = (row_ptr[i]..row_ptr[i + 1]).map(|k| vals[k] * x[cols[k]]).sum();
                }
            }
            Storage::MatrixFree(terms) => {
                y.iter_mut().for_each(|v| *v = 0.0);
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let b = self.subspace.state(i);
                    for (c, p) in terms {
                        let (t, s) = p.real_action(b);
                        if let Some(j) = self.subspace.position(t) {
                            y[j] += c * s * xi;
                        }
                    }
                }
            }
        }
    }

    pub fn expectation(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub lanczos: LanczosConfig,
    pub gap_tolerance: f64,
    pub sector_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { lanczos: LanczosConfig::default(), gap_tolerance: 1e-10, sector_limit: DEFAULT_SECTOR_LIMIT }
    }
}

/// Ground state restricted to its sector, plus the full-register vector.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub g: f64,
    pub energy: f64,
    pub residual: f64,
    /// Set at `g = 0`, where the stabilizer construction stands in for the solver.
    pub degenerate: bool,
    pub gap: f64,
    pub subspace: Arc<Subspace>,
    pub frame: Frame,
    /// Real amplitudes on `subspace`, in `frame`.
    pub sector_amps: Vec<f64>,
}

impl GroundStateResult {
    /// Full-register vector in the computational frame.
    pub fn vector(&self) -> PureState {
        PureState::from_subspace(&self.subspace, self.frame, &self.sector_amps)
    }

    pub fn sector_amps_complex(&self) -> Vec<Complex64> {
        self.sector_amps.iter().map(|&a| Complex64::new(a, 0.0)).collect()
    }
}

/// Unique ground state for `g > 0`; the default stabilizer state at `g = 0`.
///
/// The gap is measured inside the symmetry sector of the field-aligned state,
/// which is the sector continuously connected to the `g -> 0+` limit.
pub fn ground_state(h: &Hamiltonian, lat: &CodeLattice, cfg: &SolverConfig) -> Result<GroundStateResult> {
    if h.n_qubits() != lat.n_qubits() {
        return Err(Error::QubitMismatch { left: h.n_qubits(), right: lat.n_qubits() });
    }
    let g = h.g();
    let subspace = Arc::new(h.sector(cfg.sector_limit).map_err(|e| e.at_field(g))?);
    let op = h.restrict(subspace.clone())?;
    let d = subspace.dim();
    let uniform = vec![1.0 / (d as f64).sqrt(); d];
    if g == 0.0 {
        let mut hv = vec![0.0; d];
        op.apply(&uniform, &mut hv);
        let energy: f64 = uniform.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let residual = hv.iter().zip(&uniform).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt();
        return Ok(GroundStateResult {
            g,
            energy,
            residual,
            degenerate: true,
            gap: 0.0,
            subspace,
            frame: h.frame(),
            sector_amps: uniform,
        });
    }
    let pair = lowest_eigenpair(|x, y| op.apply(x, y), uniform, &cfg.lanczos).map_err(|e| e.at_field(g))?;
    if pair.gap < cfg.gap_tolerance {
        return Err(Error::Degenerate { g, gap: pair.gap });
    }
    let mut amps = pair.vector;
    if amps.iter().sum::<f64>() < 0.0 {
        amps.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(GroundStateResult {
        g,
        energy: pair.value,
        residual: pair.residual,
        degenerate: false,
        gap: pair.gap,
        subspace,
        frame: h.frame(),
        sector_amps: amps,
    })
}

/// Convenience wrapper: Hamiltonian plus ground state at one field value.
pub fn solve(lat: &CodeLattice, g: f64, cfg: &SolverConfig) -> Result<GroundStateResult> {
    let h = build_hamiltonian(lat, FieldParams::new(g)?);
    ground_state(&h, lat, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_color, build_kitaev, default_ground_state};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense_real(h: &Hamiltonian) -> DMatrix<f64> {
        h.to_sparse().unwrap().to_dense().map(|z| z.re)
    }

    fn dense_ground(h: &Hamiltonian) -> (f64, Vec<f64>) {
        let eig = SymmetricEigen::new(dense_real(h));
        let (i, &e) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        (e, eig.eigenvectors.column(i).iter().copied().collect())
    }

    #[test]
    fn hamiltonian_is_real_symmetric() {
        for lat in [build_kitaev(2, 2).unwrap(), build_kitaev(3, 2).unwrap(), build_color(3, 2).unwrap()] {
            let h = build_hamiltonian(&lat, FieldParams::new(0.37).unwrap());
            let sp = h.to_sparse().unwrap();
            assert!(sp.is_real());
            assert!(sp.is_hermitian());
        }
    }

    #[test]
    fn zero_field_energy() {
        let lat = build_kitaev(2, 2).unwrap();
        let gs = solve(&lat, 0.0, &SolverConfig::default()).unwrap();
        assert!(gs.degenerate);
        assert!((gs.energy + 8.0).abs() < 1e-12);
        assert!(gs.residual < 1e-12);
        let (e, _) = dense_ground(&build_hamiltonian(&lat, FieldParams::new(0.0).unwrap()));
        assert!((e + 8.0).abs() < 1e-10);
        let stab = default_ground_state(&lat).unwrap();
        let v = gs.vector();
        let overlap: Complex64 = stab.iter().zip(v.amps()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn color_zero_field_state_is_the_projector_state() {
        let lat = build_color(3, 2).unwrap();
        let gs = solve(&lat, 0.0, &SolverConfig::default()).unwrap();
        assert_eq!(gs.subspace.dim(), 16);
        assert!((gs.energy + 12.0).abs() < 1e-12);
        let stab = default_ground_state(&lat).unwrap();
        let v = gs.vector();
        let overlap: Complex64 = stab.iter().zip(v.amps()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_field_polarizes() {
        let lat = build_kitaev(2, 2).unwrap();
        let gs = solve(&lat, 10.0, &SolverConfig::default()).unwrap();
        let v = gs.vector();
        for q in 0..8 {
            let z = PauliString::single(8, q, Axis::Z).unwrap();
            assert!(v.expectation(&z).unwrap() >= 0.99);
        }
        let (e, vec) = dense_ground(&build_hamiltonian(&lat, FieldParams::new(10.0).unwrap()));
        assert!((gs.energy - e).abs() < 1e-9);
        let ov: f64 = vec.iter().zip(v.amps()).map(|(a, b)| a * b.re).sum();
        assert!((ov.abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn small_field_continuity() {
        let lat = build_kitaev(2, 2).unwrap();
        let gs = solve(&lat, 1e-6, &SolverConfig::default()).unwrap();
        let stab = default_ground_state(&lat).unwrap();
        let v = gs.vector();
        let overlap: Complex64 = stab.iter().zip(v.amps()).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm_sqr() > 0.99);
    }

    #[test]
    fn sector_solver_matches_dense_full_space() {
        for lat in [build_kitaev(2, 2).unwrap(), build_color(3, 2).unwrap()] {
            for g in [0.05, 0.3, 0.9, 2.0] {
                let h = build_hamiltonian(&lat, FieldParams::new(g).unwrap());
                let gs = ground_state(&h, &lat, &SolverConfig::default()).unwrap();
                assert!(gs.residual <= 1e-8);
                if lat.n_qubits() <= 8 {
                    let (e, _) = dense_ground(&h);
                    assert!((gs.energy - e).abs() < 1e-9, "g {g}: {} vs {e}", gs.energy);
                }
            }
        }
    }

    #[test]
    fn sector_solver_matches_full_space_lanczos_at_twelve_qubits() {
        let lat = build_kitaev(3, 2).unwrap();
        for g in [0.1, 0.33, 1.2] {
            let h = build_hamiltonian(&lat, FieldParams::new(g).unwrap());
            let gs = ground_state(&h, &lat, &SolverConfig::default()).unwrap();
            let full = Arc::new(Subspace::full(lat.n_qubits()));
            let op = h.restrict(full).unwrap();
            let start: Vec<f64> = (0..1 << 12).map(|i| ((i * 7919) % 104729) as f64 / 104729.0 - 0.5).collect();
            let cfg = LanczosConfig { krylov_dim: 120, ..LanczosConfig::default() };
            let pair = lowest_eigenpair(|x, y| op.apply(x, y), start, &cfg).unwrap();
            assert!((gs.energy - pair.value).abs() < 1e-9, "g {g}: {} vs {}", gs.energy, pair.value);
        }
    }

    #[test]
    fn matrix_free_agrees_with_assembled() {
        let lat = build_kitaev(4, 2).unwrap();
        let h = build_hamiltonian(&lat, FieldParams::new(0.4).unwrap());
        let sub = Arc::new(h.sector(1 << 20).unwrap());
        let free = h.restrict(sub.clone()).unwrap();
        assert!(free.is_matrix_free());
        let dense = free.clone().into_assembled();
        let x: Vec<f64> = (0..sub.dim()).map(|i| (i as f64).sin()).collect();
        let (mut y1, mut y2) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        free.apply(&x, &mut y1);
        dense.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_variational_and_monotone() {
        let lat = build_kitaev(3, 2).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let g = i as f64 * 0.1;
            let h = build_hamiltonian(&lat, FieldParams::new(g).unwrap());
            let gs = ground_state(&h, &lat, &SolverConfig::default()).unwrap();
            let sub = gs.subspace.clone();
            let trial = vec![1.0 / (sub.dim() as f64).sqrt(); sub.dim()];
            let e_trial = h.restrict(sub).unwrap().expectation(&trial);
            assert!(gs.energy <= e_trial + 1e-10);
            assert!(gs.energy <= prev + 1e-10);
            prev = gs.energy;
        }
    }

    #[test]
    fn rejects_negative_field() {
        assert!(FieldParams::new(-0.1).is_err());
        assert!(FieldParams::new(f64::NAN).is_err());
    }
}
