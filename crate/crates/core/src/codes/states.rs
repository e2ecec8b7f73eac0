//! Stabilizer ground states of the unperturbed codes.

use num_complex::Complex64;

use super::{loop_operator, stabilizer_generators, CodeKind, CodeLattice, Direction, LoopSpec, PlaquetteColor};
use crate::error::{Error, Result};
use crate::pauli::{apply_pauli, Axis, PauliString};

/// Largest register the dense state builders will allocate.
pub const MAX_STATE_QUBITS: usize = 24;

/// Loop-operator exponents selecting one state of the ground manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sector {
    /// `(L^x_h)^a (L^x_v)^b`.
    Kitaev { a: bool, b: bool },
    /// `(L^x_{h,r})^a1 (L^x_{h,g})^a2 (L^x_{v,r})^b1 (L^x_{v,g})^b2`.
    Color { a1: bool, a2: bool, b1: bool, b2: bool },
    /// All exponents zero for whichever lattice kind.
    #[default]
    Zero,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_STATE_QUBITS {
        return Err(Error::DimensionOverflow { n_qubits: n, max: MAX_STATE_QUBITS });
    }
    Ok(())
}

/// Applies `(I + S)/2` for an X-type string `S`, without normalizing.
fn project_x_type(v: &mut [f64], mask: u64) {
    let m = mask as usize;
    for b in 0..v.len() {
        let t = b ^ m;
        if b < t {
            let s = 0.5 * (v[b] + v[t]);
            v[b] = s;
            v[t] = s;
        }
    }
}

fn normalized_complex(v: Vec<f64>) -> Vec<Complex64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| Complex64::new(x / norm, 0.0)).collect()
}

/// Projector product over the X-type stabilizers applied to `|0...0>`,
/// followed by the sector's X-loop operators.
pub fn stabilizer_ground_state(lat: &CodeLattice, sector: Sector) -> Result<Vec<Complex64>> {
    let n = lat.n_qubits();
    check_size(n)?;
    let mut v = vec![0.0f64; 1 << n];
    v[0] = 1.0;
    for i in 0..lat.n_x_stabilizers() {
        project_x_type(&mut v, lat.x_stabilizer(i).x_mask());
    }
    let loops: Vec<LoopSpec> = match (lat.kind(), sector) {
        (_, Sector::Zero) => Vec::new(),
        (CodeKind::Kitaev, Sector::Kitaev { a, b }) => [
            (a, LoopSpec::kitaev(Axis::X, Direction::H)),
            (b, LoopSpec::kitaev(Axis::X, Direction::V)),
        ]
        .into_iter()
        .filter_map(|(on, s)| on.then_some(s))
        .collect(),
        (CodeKind::Color, Sector::Color { a1, a2, b1, b2 }) => [
            (a1, LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Red)),
            (a2, LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Green)),
            (b1, LoopSpec::color(Axis::X, Direction::V, PlaquetteColor::Red)),
            (b2, LoopSpec::color(Axis::X, Direction::V, PlaquetteColor::Green)),
        ]
        .into_iter()
        .filter_map(|(on, s)| on.then_some(s))
        .collect(),
        _ => return Err(Error::InvalidLattice("sector exponents do not match the lattice kind".into())),
    };
    let mut psi = normalized_complex(v);
    for spec in loops {
        psi = apply_pauli(&loop_operator(lat, &spec)?, &psi)?;
    }
    Ok(psi)
}

/// The state the perturbed ground state approaches as the field goes to zero.
///
/// For both codes this is the all-zero sector: a `sigma^z` field conserves
/// every Z loop.
pub fn default_ground_state(lat: &CodeLattice) -> Result<Vec<Complex64>> {
    stabilizer_ground_state(lat, Sector::Zero)
}

/// An independent generating set of `N` signed strings stabilizing
/// `default_ground_state`.
pub fn state_stabilizers(lat: &CodeLattice) -> Vec<PauliString> {
    let mut candidates = stabilizer_generators(lat);
    let logical: Vec<LoopSpec> = match lat.kind() {
        CodeKind::Kitaev => vec![LoopSpec::kitaev(Axis::Z, Direction::H), LoopSpec::kitaev(Axis::Z, Direction::V)],
        CodeKind::Color => [Direction::H, Direction::V]
            .into_iter()
            .flat_map(|d| PlaquetteColor::ALL.into_iter().map(move |c| LoopSpec::color(Axis::Z, d, c)))
            .collect(),
    };
    candidates.extend(logical.iter().map(|s| loop_operator(lat, s).expect("lattice has every loop")));
    independent_subset(&candidates)
}

/// Greedy GF(2)-independent subset, keeping the first occurrence.
pub(crate) fn independent_subset(strings: &[PauliString]) -> Vec<PauliString> {
    let mut basis: Vec<u128> = Vec::new();
    let mut kept = Vec::new();
    for s in strings {
        let mut r = (s.x_mask() as u128) << 64 | s.z_mask() as u128;
        for &b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            kept.push(*s);
        }
    }
    kept
}
