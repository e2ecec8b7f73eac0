//! Basis subsets closed under a set of bit-flip masks.
//!
//! Every Hamiltonian here is a sum of real Pauli strings whose X parts
//! generate a group of bit flips. Starting from one basis state, the orbit of
//! that group is an invariant subspace, usually exponentially smaller than the
//! full register.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Basis in which amplitudes are stored.
///
/// `Hadamard` means every qubit has been conjugated by `H`, so a stored basis
/// index `b` stands for the product state `H^{⊗N}|b>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Frame {
    Computational,
    Hadamard,
}

#[derive(Debug, Clone)]
pub struct Subspace {
    n_qubits: usize,
    states: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl Subspace {
    /// Orbit of `start` under XOR with any combination of `masks`.
    pub fn closure(n_qubits: usize, start: usize, masks: &[u64], limit: usize) -> Result<Self> {
        let basis = independent_masks(masks);
        if basis.len() >= usize::BITS as usize - 1 || (1usize << basis.len()) > limit {
            return Err(Error::LimitExceeded {
                what: "invariant subspace dimension",
                size: 1usize.checked_shl(basis.len() as u32).unwrap_or(usize::MAX),
                limit,
            });
        }
        let mut states = vec![start];
        for m in basis {
            let extra: Vec<usize> = states.iter().map(|&s| s ^ m as usize).collect();
            states.extend(extra);
        }
        states.sort_unstable();
        Ok(Self::from_sorted(n_qubits, states))
    }

    /// The whole `2^N` register.
    pub fn full(n_qubits: usize) -> Self {
        Self::from_sorted(n_qubits, (0..1usize << n_qubits).collect())
    }

    fn from_sorted(n_qubits: usize, states: Vec<usize>) -> Self {
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Subspace { n_qubits, states, index }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn state(&self, i: usize) -> usize {
        self.states[i]
    }

    pub fn position(&self, basis_state: usize) -> Option<usize> {
        self.index.get(&basis_state).copied()
    }

    pub fn is_full(&self) -> bool {
        self.states.len() == 1usize << self.n_qubits
    }
}

/// GF(2) basis of the span of `masks`, in echelon form.
pub fn independent_masks(masks: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &m in masks {
        let mut r = m;
        for &b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}
