//! Projective measurement of `Omega-bar` by amplitude slicing (pure states)
//! or pair contraction of density-matrix entries (mixed states).

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::optimize::Basis;
use super::{BranchState, MeasurementSetup, Outcome, OutcomeEnsemble, PreferredSet, Region, SKIP_PROBABILITY};
use crate::error::{Error, Result};
use crate::pauli::Axis;
use crate::state::{hadamard_all, DensityMatrix, QuantumState};
use crate::subspace::Frame;

#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions {
    pub skip_probability: f64,
    /// Allowed `|sum_k p_k - 1|` for a full ensemble.
    pub deficit_bound: f64,
    /// Cap on stored complex entries while contracting a density matrix.
    pub max_entries: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions { skip_probability: SKIP_PROBABILITY, deficit_bound: 1e-10, max_entries: 1 << 25 }
    }
}

pub fn measure_ensemble(
    state: &QuantumState,
    region: &Region,
    setup: &MeasurementSetup,
    restrict: Option<&PreferredSet>,
) -> Result<OutcomeEnsemble> {
    measure_ensemble_with(state, region, setup, restrict, &EnsembleOptions::default())
}

pub fn measure_ensemble_with(
    state: &QuantumState,
    region: &Region,
    setup: &MeasurementSetup,
    restrict: Option<&PreferredSet>,
    opts: &EnsembleOptions,
) -> Result<OutcomeEnsemble> {
    if state.n_qubits() != region.n_qubits() {
        return Err(Error::QubitMismatch { left: state.n_qubits(), right: region.n_qubits() });
    }
    if setup.iter().map(|(q, _)| q).ne(region.omega_bar().iter().copied()) {
        return Err(Error::InvalidSetup("setup does not cover the complement of omega".into()));
    }
    let m = region.omega_bar().len();
    let wanted: Vec<usize> = match restrict {
        Some(set) => set.outcomes().iter().copied().filter(|&k| k < 1usize << m).collect(),
        None => (0..1usize << m).collect(),
    };
    let raw = match state {
        QuantumState::Pure(psi) => {
            let mut amps = psi.amps().to_vec();
            for (q, axis) in setup.iter() {
                rotate_qubit(&mut amps, q, &Basis::from_axis(axis).bra_rows());
            }
            slice_pure(&amps, region, &wanted)
        }
        QuantumState::Mixed(rho) => contract_mixed(rho, region, setup, &wanted, opts)?,
    };
    let mut entries = Vec::with_capacity(raw.len());
    let mut skipped = 0.0;
    let mut total = 0.0;
    for (k, p, state) in raw {
        total += p;
        if p < opts.skip_probability {
            skipped += p;
            continue;
        }
        entries.push(Outcome { k, p, state });
    }
    if restrict.is_none() && (total - 1.0).abs() > opts.deficit_bound {
        return Err(Error::ProbabilityDeficit { sum: total, bound: opts.deficit_bound });
    }
    Ok(OutcomeEnsemble {
        region: region.clone(),
        setup: setup.clone(),
        entries,
        skipped_mass: skipped,
        restricted: restrict.cloned(),
    })
}

/// Replaces the amplitudes of qubit `q` by their components along `rows`.
pub(crate) fn rotate_qubit(amps: &mut [Complex64], q: usize, rows: &Option<[[Complex64; 2]; 2]>) {
    let Some(r) = rows else { return };
    let bit = 1usize << q;
    let n = amps.len();
    let mut hi = 0;
    while hi < n {
        for b in hi..hi + bit {
            let (a0, a1) = (amps[b], amps[b | bit]);
            amps[b] = r[0][0] * a0 + r[0][1] * a1;
            amps[b | bit] = r[1][0] * a0 + r[1][1] * a1;
        }
        hi += 2 * bit;
    }
}

pub(crate) fn deposit(bits: usize, qubits: &[usize]) -> usize {
    qubits.iter().enumerate().fold(0, |acc, (i, &q)| acc | (bits >> i & 1) << q)
}

pub(crate) fn extract(word: usize, qubits: &[usize]) -> usize {
    qubits.iter().enumerate().fold(0, |acc, (i, &q)| acc | (word >> q & 1) << i)
}

/// Unnormalized branch vectors of an already rotated state.
fn slice_pure(amps: &[Complex64], region: &Region, wanted: &[usize]) -> Vec<(usize, f64, BranchState)> {
    let omega_table: Vec<usize> = (0..1usize << region.omega().len()).map(|j| deposit(j, region.omega())).collect();
    wanted
        .iter()
        .map(|&k| {
            let base = deposit(k, region.omega_bar());
            let mut v: Vec<Complex64> = omega_table.iter().map(|&o| amps[base | o]).collect();
            let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if p > 0.0 {
                let s = 1.0 / p.sqrt();
                v.iter_mut().for_each(|a| *a *= s);
            }
            (k, p, BranchState::Pure(v))
        })
        .collect()
}

/// Sum of `p_k E(rho^k)` over all outcomes of a rotated pure state, without storing branches.
pub(crate) fn average_from_rotated(
    amps: &[Complex64],
    omega_table: &[usize],
    omega_bar: &[usize],
    a_mask: usize,
    measure: super::EntanglementMeasure,
    skip: f64,
) -> f64 {
    let n_omega = omega_table.len().trailing_zeros() as usize;
    let mut v = vec![Complex64::new(0.0, 0.0); omega_table.len()];
    let mut acc = 0.0;
    for k in 0..1usize << omega_bar.len() {
        let base = deposit(k, omega_bar);
        let mut p = 0.0;
        for (slot, &o) in v.iter_mut().zip(omega_table) {
            *slot = amps[base | o];
            p += slot.norm_sqr();
        }
        if p < skip {
            continue;
        }
        acc += p * super::pure_negativity_unchecked(&v, n_omega, a_mask, measure);
    }
    acc
}

/// Pauli measurement of a density matrix stored on a subspace.
///
/// Measuring a qubit along `Z` keeps only pairs that agree with the outcome
/// there; along `X` or `Y` every pair contributes with weight
/// `(1/2) (-1)^{k (a xor b)}`, times `(-i)^a i^b` for `Y`.
fn contract_mixed(
    rho: &DensityMatrix,
    region: &Region,
    setup: &MeasurementSetup,
    wanted: &[usize],
    opts: &EnsembleOptions,
) -> Result<Vec<(usize, f64, BranchState)>> {
    let omega = region.omega();
    let omega_bar = region.omega_bar();
    let m = omega_bar.len();
    let n_omega = omega.len();
    let d = 1usize << n_omega;
    // Axes as seen in the storage frame; `flip` marks outcome bits that invert.
    let mut z_local = Vec::new();
    let mut xy_local = Vec::new();
    let mut y_mask = 0usize;
    let mut flip = 0usize;
    for (i, &q) in omega_bar.iter().enumerate() {
        let axis = setup.axis(q).expect("setup covers omega-bar");
        let frame_axis = match (rho.frame(), axis) {
            (Frame::Computational, a) => a,
            (Frame::Hadamard, Axis::X) => Axis::Z,
            (Frame::Hadamard, Axis::Z) => Axis::X,
            (Frame::Hadamard, Axis::Y) => {
                flip |= 1 << i;
                Axis::Y
            }
        };
        match frame_axis {
            Axis::Z => z_local.push(i),
            Axis::X => xy_local.push(i),
            Axis::Y => {
                y_mask |= 1 << i;
                xy_local.push(i);
            }
        }
    }
    let z_mask_local = z_local.iter().fold(0usize, |acc, &i| acc | 1 << i);
    let (nz, nxy) = (z_local.len(), xy_local.len());
    let entries = (1usize << m).saturating_mul(d * d);
    if entries > opts.max_entries {
        return Err(Error::LimitExceeded { what: "ensemble contraction", size: entries, limit: opts.max_entries });
    }
    let sub = rho.subspace();
    let states = sub.states();
    let kbar: Vec<usize> = states.iter().map(|&s| extract(s, omega_bar)).collect();
    let om: Vec<usize> = states.iter().map(|&s| extract(s, omega)).collect();
    // acc[((kz * d + wa) * d + wb) * 2^nxy + diff] accumulates rho_ab times its Y phase.
    let xy_size = 1usize << nxy;
    let mut acc = vec![Complex64::new(0.0, 0.0); (1usize << nz) * d * d * xy_size];
    let data = rho.data();
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    for j in 0..states.len() {
        for i in 0..states.len() {
            let v = data[(i, j)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let (ka, kb) = (kbar[i], kbar[j]);
            if (ka ^ kb) & z_mask_local != 0 {
                continue;
            }
            let kz = compact(ka, &z_local);
            let diff = compact(ka ^ kb, &xy_local);
            let e = ((kb & y_mask).count_ones() + 4 - (ka & y_mask).count_ones() % 4) % 4;
            acc[((kz * d + om[i]) * d + om[j]) * xy_size + diff] += v * phases[e as usize];
        }
    }
    let scale = 1.0 / xy_size as f64;
    for block in acc.chunks_mut(xy_size) {
        walsh(block);
    }
    let want_slot: HashMap<usize, usize> = wanted.iter().enumerate().map(|(s, &k)| (k, s)).collect();
    let mut out: Vec<Option<DMatrix<Complex64>>> = vec![None; wanted.len()];
    for kz in 0..1usize << nz {
        for t in 0..xy_size {
            let k = (expand(kz, &z_local) | expand(t, &xy_local)) ^ flip;
            let Some(&slot) = want_slot.get(&k) else { continue };
            let mat = DMatrix::from_fn(d, d, |wa, wb| acc[((kz * d + wa) * d + wb) * xy_size + t] * scale);
            out[slot] = Some(mat);
        }
    }
    let hadamard = rho.frame() == Frame::Hadamard;
    Ok(wanted
        .iter()
        .zip(out)
        .map(|(&k, mat)| {
            let mut mat = mat.unwrap_or_else(|| DMatrix::zeros(d, d));
            if hadamard {
                hadamard_both_sides(&mut mat);
            }
            let p = mat.trace().re;
            if p > 0.0 {
                mat /= Complex64::new(p, 0.0);
            }
            (k, p, BranchState::Mixed(mat))
        })
        .collect())
}

fn compact(word: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (i, &p)| acc | (word >> p & 1) << i)
}

fn expand(bits: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (i, &p)| acc | (bits >> i & 1) << p)
}

/// Unnormalized Walsh transform: `out[t] = sum_d (-1)^{|t & d|} in[d]`.
fn walsh(v: &mut [Complex64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for b in start..start + h {
                let (x, y) = (v[b], v[b + h]);
                v[b] = x + y;
                v[b + h] = x - y;
            }
        }
        h *= 2;
    }
}

fn hadamard_both_sides(m: &mut DMatrix<Complex64>) {
    let d = m.nrows();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    for c in 0..d {
        buf.iter_mut().enumerate().for_each(|(r, z)| *z = m[(r, c)]);
        hadamard_all(&mut buf);
        buf.iter().enumerate().for_each(|(r, z)| m[(r, c)] = *z);
    }
    for r in 0..d {
        buf.iter_mut().enumerate().for_each(|(c, z)| *z = m[(r, c)]);
        hadamard_all(&mut buf);
        buf.iter().enumerate().for_each(|(c, z)| m[(r, c)] = *z);
    }
}
