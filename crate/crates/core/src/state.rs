//! Pure states over the full register and density matrices over invariant subspaces.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::subspace::{Frame, Subspace};

/// A normalized state vector over all `2^N` computational basis states.
#[derive(Debug, Clone)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::LengthMismatch { len: amps.len(), n_qubits });
        }
        Ok(PureState { n_qubits, amps })
    }

    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        PureState { n_qubits, amps }
    }

    /// Embeds real subspace amplitudes stored in `frame` into the full register.
    pub fn from_subspace(subspace: &Subspace, frame: Frame, amps: &[f64]) -> Self {
        let n = subspace.n_qubits();
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (i, &a) in amps.iter().enumerate() {
            v[subspace.state(i)] = Complex64::new(a, 0.0);
        }
        if frame == Frame::Hadamard {
            hadamard_all(&mut v);
        }
        PureState { n_qubits: n, amps: v }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        Ok(crate::pauli::expectation(p, &self.amps)?.re)
    }
}

/// `H^{⊗N}` applied in place (fast Walsh-Hadamard transform).
pub fn hadamard_all(v: &mut [Complex64]) {
    let n = v.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for b in start..start + h {
                let (a0, a1) = (v[b], v[b + h]);
                v[b] = (a0 + a1) * s;
                v[b + h] = (a0 - a1) * s;
            }
        }
        h *= 2;
    }
}

/// Density matrix supported on `subspace x subspace`, stored in `frame`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    subspace: Arc<Subspace>,
    frame: Frame,
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(subspace: Arc<Subspace>, frame: Frame, data: DMatrix<Complex64>) -> Result<Self> {
        let d = subspace.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, subspace dimension is {d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(DensityMatrix { subspace, frame, data })
    }

    /// `|psi><psi|` for amplitudes given on the subspace.
    pub fn from_pure(subspace: Arc<Subspace>, frame: Frame, amps: &[Complex64]) -> Result<Self> {
        let d = subspace.dim();
        if amps.len() != d {
            return Err(Error::InvalidState(format!("{} amplitudes for subspace dimension {d}", amps.len())));
        }
        let data = DMatrix::from_fn(d, d, |r, c| amps[r] * amps[c].conj());
        Self::new(subspace, frame, data)
    }

    /// `|psi><psi|` over the whole register in the computational frame.
    pub fn from_pure_state(psi: &PureState) -> Result<Self> {
        Self::from_pure(Arc::new(Subspace::full(psi.n_qubits())), Frame::Computational, psi.amps())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let data = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        DensityMatrix { subspace: Arc::new(Subspace::full(n_qubits)), frame: Frame::Computational, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.subspace.n_qubits()
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.subspace
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max |rho - rho^dagger|` entry-wise.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.data.nrows();
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in c..d {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr[P rho]` for a Pauli string given in the computational frame.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let p = match self.frame {
            Frame::Computational => *p,
            Frame::Hadamard => p.hadamard_conjugated(u64::MAX >> (64 - p.n_qubits().max(1))),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &d) in self.subspace.states().iter().enumerate() {
            let (t, coef) = p.action(d);
            if let Some(j) = self.subspace.position(t) {
                // <t|P|d> rho_{d t} summed over d gives Tr[P rho].
                acc += coef * self.data[(i, j)];
            }
        }
        acc.re
    }

    /// Full `2^N x 2^N` matrix in the computational frame (oracle use).
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.n_qubits();
        if n > 12 {
            return Err(Error::DimensionOverflow { n_qubits: n, max: 12 });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for (i, &a) in self.subspace.states().iter().enumerate() {
            for (j, &b) in self.subspace.states().iter().enumerate() {
                m[(a, b)] = self.data[(i, j)];
            }
        }
        if self.frame == Frame::Hadamard {
            let mut col = vec![Complex64::new(0.0, 0.0); dim];
            for c in 0..dim {
                col.iter_mut().enumerate().for_each(|(r, z)| *z = m[(r, c)]);
                hadamard_all(&mut col);
                col.iter().enumerate().for_each(|(r, z)| m[(r, c)] = *z);
            }
            for r in 0..dim {
                col.iter_mut().enumerate().for_each(|(c, z)| *z = m[(r, c)]);
                hadamard_all(&mut col);
                col.iter().enumerate().for_each(|(c, z)| m[(r, c)] = *z);
            }
        }
        Ok(m)
    }
}

/// Input to measurement and witness routines.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.n_qubits(),
            QuantumState::Mixed(m) => m.n_qubits(),
        }
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        match self {
            QuantumState::Pure(s) => s.expectation(p),
            QuantumState::Mixed(m) => {
                if p.n_qubits() != m.n_qubits() {
                    return Err(Error::QubitMismatch { left: p.n_qubits(), right: m.n_qubits() });
                }
                Ok(m.expectation(p))
            }
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(m: DensityMatrix) -> Self {
        QuantumState::Mixed(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Axis;

    #[test]
    fn hadamard_all_is_an_involution() {
        let mut v: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let orig = v.clone();
        hadamard_all(&mut v);
        hadamard_all(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut zero = PureState::zero(2).into_amps();
        hadamard_all(&mut zero);
        assert!(zero.iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn density_expectations_match_pure() {
        let amps: Vec<Complex64> =
            (0..8).map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64 * 1.3).sin())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = PureState::new(3, amps.iter().map(|a| a / norm).collect()).unwrap();
        let rho = DensityMatrix::from_pure_state(&psi).unwrap();
        for text in ["X1 Y2", "Z3", "Y1 Y2 Y3", "X2 Z3"] {
            let p = PauliString::parse(text, 3).unwrap();
            assert!((rho.expectation(&p) - psi.expectation(&p).unwrap()).abs() < 1e-12);
        }
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn hadamard_frame_expectation() {
        // |+> stored in the Hadamard frame is |0>.
        let sub = Arc::new(Subspace::full(1));
        let rho = DensityMatrix::from_pure(sub, Frame::Hadamard, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        let x = PauliString::single(1, 0, Axis::X).unwrap();
        let z = PauliString::single(1, 0, Axis::Z).unwrap();
        assert!((rho.expectation(&x) - 1.0).abs() < 1e-15);
        assert!(rho.expectation(&z).abs() < 1e-15);
        let dense = rho.to_dense().unwrap();
        assert!(dense.iter().all(|z| (z.re - 0.5).abs() < 1e-15));
    }
}
