//! Local-Hadamard equivalence between the Kitaev stabilizer state and a graph state.
//!
//! Hadamards on the control set `S_c` turn the stabilizer group into one
//! generated by `X_a prod_{b in N(a)} Z_b`. The control set is the complement
//! of an information set of the X-type generators; pivot orders are searched
//! until the graph restricted to the loop is a connected star.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{state_stabilizers, CodeKind, CodeLattice, LoopSpec};
use crate::error::{Error, Result};
use crate::pauli::{hermitian_product, PauliString};

const MAX_ATTEMPTS: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct GraphCertificate {
    /// Qubits receiving a Hadamard (0-based).
    pub controls: Vec<usize>,
    /// Graph edges `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub omega: Vec<usize>,
    pub hub: usize,
    /// Qubits needing a `Z` after the Hadamards to reach the `+` graph state.
    pub z_corrections: Vec<usize>,
    /// Graph-state generators in the transformed frame, one per qubit.
    #[serde(skip)]
    pub generators: Vec<PauliString>,
}

impl GraphCertificate {
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == q { Some(b) } else if b == q { Some(a) } else { None })
            .collect()
    }

    pub fn controls_mask(&self) -> u64 {
        self.controls.iter().fold(0, |m, &q| m | 1 << q)
    }
}

pub fn graph_equivalent(lat: &CodeLattice, omega: &LoopSpec) -> Result<GraphCertificate> {
    if lat.kind() != CodeKind::Kitaev {
        return Err(Error::NoGraphForm("graph equivalence is implemented for Kitaev lattices only".into()));
    }
    let n = lat.n_qubits();
    let region = lat.loop_support(omega)?.to_vec();
    let gens = state_stabilizers(lat);
    let x_rows: Vec<u64> = gens.iter().filter(|g| g.x_mask() != 0).map(|g| g.x_mask()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let rest: Vec<usize> = (0..n).filter(|q| !region.contains(q)).collect();
    for attempt in 0..MAX_ATTEMPTS {
        // Alternate between putting one candidate hub first (hub keeps its X)
        // and last (hub gets a Hadamard); shuffle the remaining qubits.
        let hub = region[region.len() - 1 - (attempt / 2) % region.len()];
        let leaves: Vec<usize> = region.iter().copied().filter(|&q| q != hub).collect();
        let mut middle = rest.clone();
        if attempt >= 2 * region.len() {
            middle.shuffle(&mut rng);
        }
        let order: Vec<usize> = if attempt % 2 == 0 {
            [vec![hub], middle, leaves].concat()
        } else {
            [leaves, middle, vec![hub]].concat()
        };
        let info = information_set(&x_rows, &order);
        let controls: Vec<usize> = (0..n).filter(|q| !info.contains(q)).collect();
        let Some(cert) = reduce_to_graph(&gens, n, controls, &region)? else { continue };
        return Ok(cert);
    }
    Err(Error::NoGraphForm(format!("no star over {omega} after {MAX_ATTEMPTS} pivot orders")))
}

/// Pivot columns of a GF(2) elimination visiting columns in `order`.
fn information_set(rows: &[u64], order: &[usize]) -> Vec<usize> {
    let mut rows = rows.to_vec();
    let mut pivots = Vec::new();
    let mut used = vec![false; rows.len()];
    for &c in order {
        let bit = 1u64 << c;
        let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r] & bit != 0) else { continue };
        used[r] = true;
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        pivots.push(c);
    }
    pivots
}

fn reduce_to_graph(
    gens: &[PauliString],
    n: usize,
    controls: Vec<usize>,
    region: &[usize],
) -> Result<Option<GraphCertificate>> {
    let mask = controls.iter().fold(0u64, |m, &q| m | 1 << q);
    let mut rows: Vec<PauliString> = gens.iter().map(|g| g.hadamard_conjugated(mask)).collect();
    if rows.len() != n {
        return Ok(None);
    }
    for q in 0..n {
        let bit = 1u64 << q;
        let Some(r) = (q..n).find(|&r| rows[r].x_mask() & bit != 0) else { return Ok(None) };
        rows.swap(q, r);
        let pivot = rows[q];
        for i in 0..n {
            if i != q && rows[i].x_mask() & bit != 0 {
                rows[i] = hermitian_product(&rows[i], &pivot)?;
            }
        }
    }
    let mut edges = Vec::new();
    for (q, row) in rows.iter().enumerate() {
        let z = row.z_mask();
        if z >> q & 1 == 1 {
            return Ok(None);
        }
        for p in 0..n {
            if z >> p & 1 == 1 {
                if rows[p].z_mask() >> q & 1 != 1 {
                    return Err(Error::NoGraphForm("reduced generators are not symmetric".into()));
                }
                if q < p {
                    edges.push((q, p));
                }
            }
        }
    }
    let adjacent = |a: usize, b: usize| rows[a].z_mask() >> b & 1 == 1;
    let hub = region.iter().rev().copied().find(|&h| {
        region.iter().all(|&l| l == h || adjacent(h, l))
            && region.iter().all(|&a| region.iter().all(|&b| a == h || b == h || !adjacent(a, b)))
    });
    let Some(hub) = hub else { return Ok(None) };
    let z_corrections = (0..n).filter(|&q| rows[q].sign() < 0).collect();
    Ok(Some(GraphCertificate {
        controls,
        edges,
        omega: region.to_vec(),
        hub,
        z_corrections,
        generators: rows.into_iter().map(|r| r.with_sign(1)).collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_kitaev, default_ground_state, Direction};
    use crate::pauli::Axis;
    use num_complex::Complex64;

    fn graph_state(n: usize, edges: &[(usize, usize)]) -> Vec<Complex64> {
        let amp = 1.0 / ((1usize << n) as f64).sqrt();
        (0..1usize << n)
            .map(|b| {
                let odd = edges.iter().filter(|&&(a, c)| b >> a & 1 == 1 && b >> c & 1 == 1).count() % 2 == 1;
                Complex64::new(if odd { -amp } else { amp }, 0.0)
            })
            .collect()
    }

    fn apply_hadamards(v: &mut [Complex64], qubits: &[usize]) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for &q in qubits {
            let bit = 1usize << q;
            for b in 0..v.len() {
                if b & bit == 0 {
                    let (a0, a1) = (v[b], v[b | bit]);
                    v[b] = (a0 + a1) * s;
                    v[b | bit] = (a0 - a1) * s;
                }
            }
        }
    }

    fn check_state_equivalence(nph: usize, npv: usize, spec: LoopSpec) -> GraphCertificate {
        let lat = build_kitaev(nph, npv).unwrap();
        let cert = graph_equivalent(&lat, &spec).unwrap();
        let mut psi = default_ground_state(&lat).unwrap();
        apply_hadamards(&mut psi, &cert.controls);
        for &q in &cert.z_corrections {
            for (b, a) in psi.iter_mut().enumerate() {
                if b >> q & 1 == 1 {
                    *a = -*a;
                }
            }
        }
        let g = graph_state(lat.n_qubits(), &cert.edges);
        let overlap: Complex64 = g.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10, "overlap {overlap}");
        for (q, gen) in cert.generators.iter().enumerate() {
            assert_eq!(gen.x_mask(), 1 << q);
            assert_eq!(gen.z_mask().count_ones() as usize, cert.neighbors(q).len());
        }
        cert
    }

    #[test]
    fn two_by_two_vertical_z_loop_is_a_single_link() {
        let cert = check_state_equivalence(2, 2, LoopSpec::kitaev(Axis::Z, Direction::V));
        assert_eq!(cert.omega, vec![3, 7]);
        assert!(cert.edges.contains(&(3, 7)));
    }

    #[test]
    fn three_by_three_vertical_z_loop_is_a_star() {
        let lat = build_kitaev(3, 3).unwrap();
        let cert = graph_equivalent(&lat, &LoopSpec::kitaev(Axis::Z, Direction::V)).unwrap();
        assert_eq!(cert.omega, vec![5, 11, 17]);
        let leaves: Vec<usize> = cert.omega.iter().copied().filter(|&q| q != cert.hub).collect();
        for l in &leaves {
            assert!(cert.neighbors(cert.hub).contains(l));
        }
        assert!(!cert.neighbors(leaves[0]).contains(&leaves[1]));
    }

    #[test]
    fn graph_state_matches_up_to_twelve_qubits() {
        check_state_equivalence(3, 2, LoopSpec::kitaev(Axis::Z, Direction::V));
        check_state_equivalence(3, 2, LoopSpec::kitaev(Axis::X, Direction::H));
        check_state_equivalence(2, 2, LoopSpec::kitaev(Axis::Z, Direction::H));
    }
}
