//! Preferred outcome sets for the `E''` approximation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{measure_ensemble, MeasurementSetup, OutcomeEnsemble, Region};
use crate::codes::CodeLattice;
use crate::error::{Error, Result};
use crate::spectrum::{solve, SolverConfig};

pub const DEFAULT_P_C: f64 = 1e-10;
/// `g = 0` plus one point inside the topological phase.
pub const DEFAULT_CALIBRATION: [f64; 2] = [0.0, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferredSet {
    outcomes: BTreeSet<usize>,
    p_c: f64,
    calibration: Vec<f64>,
}

impl PreferredSet {
    pub fn new(outcomes: BTreeSet<usize>, p_c: f64, calibration: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyPreferredSet);
        }
        if !(p_c > 0.0) {
            return Err(Error::InvalidSetup(format!("threshold p_c must be positive, got {p_c}")));
        }
        Ok(PreferredSet { outcomes, p_c, calibration })
    }

    /// Union over ensembles of outcomes with `p_k > p_c`.
    pub fn from_ensembles(ensembles: &[OutcomeEnsemble], p_c: f64, calibration: Vec<f64>) -> Result<Self> {
        let outcomes =
            ensembles.iter().flat_map(|e| e.entries.iter().filter(|o| o.p > p_c).map(|o| o.k)).collect();
        Self::new(outcomes, p_c, calibration)
    }

    pub fn outcomes(&self) -> &BTreeSet<usize> {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.outcomes.contains(&k)
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn calibration(&self) -> &[f64] {
        &self.calibration
    }

    /// `(2^m - |K|) p_c` for `m` measured qubits.
    pub fn epsilon_m(&self, m: usize) -> f64 {
        ((1u64 << m) as f64 - self.outcomes.len() as f64).max(0.0) * self.p_c
    }
}

/// Preferred set from ground states at the calibration fields.
pub fn build_preferred_set(
    lat: &CodeLattice,
    region: &Region,
    setup: &MeasurementSetup,
    p_c: f64,
    calibration: &[f64],
    solver: &SolverConfig,
) -> Result<PreferredSet> {
    if !calibration.contains(&0.0) {
        return Err(Error::InvalidSetup("calibration fields must include g = 0".into()));
    }
    let mut ensembles = Vec::with_capacity(calibration.len());
    for &g in calibration {
        let gs = solve(lat, g, solver)?;
        let ens = measure_ensemble(&gs.vector().into(), region, setup, None).map_err(|e| e.at_field(g))?;
        ensembles.push(ens);
    }
    PreferredSet::from_ensembles(&ensembles, p_c, calibration.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_kitaev, default_ground_state, Direction, LoopSpec};
    use crate::localize::{bound_from_ensemble, canonical_setup, BoundKind, EntanglementMeasure};
    use crate::pauli::Axis;
    use crate::state::PureState;

    #[test]
    fn epsilon_arithmetic() {
        let set = PreferredSet::new((0..48).collect(), 1e-10, vec![0.0]).unwrap();
        assert!((set.epsilon_m(6) - 1.6e-9).abs() < 1e-22);
        assert!(PreferredSet::new(BTreeSet::new(), 1e-10, vec![0.0]).is_err());
        assert!(PreferredSet::new([1].into(), 0.0, vec![0.0]).is_err());
    }

    #[test]
    fn zero_field_set_is_the_support_and_thresholds_nest() {
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::X, Direction::H);
        let region = Region::from_loop(&lat, &spec).unwrap();
        let setup = canonical_setup(&lat, &spec).unwrap();
        let k0 = build_preferred_set(&lat, &region, &setup, DEFAULT_P_C, &[0.0], &SolverConfig::default()).unwrap();
        let psi = PureState::new(8, default_ground_state(&lat).unwrap()).unwrap();
        let ens = measure_ensemble(&psi.into(), &region, &setup, None).unwrap();
        let support: BTreeSet<usize> = ens.entries.iter().map(|o| o.k).collect();
        assert_eq!(k0.outcomes(), &support);
        let loose = build_preferred_set(&lat, &region, &setup, DEFAULT_P_C, &DEFAULT_CALIBRATION, &SolverConfig::default()).unwrap();
        let tight = build_preferred_set(&lat, &region, &setup, 1e-6, &DEFAULT_CALIBRATION, &SolverConfig::default()).unwrap();
        assert!(loose.outcomes().is_superset(tight.outcomes()));
        assert!(build_preferred_set(&lat, &region, &setup, DEFAULT_P_C, &[0.2], &SolverConfig::default()).is_err());
    }

    #[test]
    fn restricted_ensemble_gives_double_prime_bound() {
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::Z, Direction::H);
        let region = Region::from_loop(&lat, &spec).unwrap();
        let setup = canonical_setup(&lat, &spec).unwrap();
        let set = build_preferred_set(&lat, &region, &setup, DEFAULT_P_C, &DEFAULT_CALIBRATION, &SolverConfig::default()).unwrap();
        let gs = solve(&lat, 0.6, &SolverConfig::default()).unwrap();
        let state = gs.vector().into();
        let full = bound_from_ensemble(&measure_ensemble(&state, &region, &setup, None).unwrap(), EntanglementMeasure::Negativity).unwrap();
        let part = bound_from_ensemble(&measure_ensemble(&state, &region, &setup, Some(&set)).unwrap(), EntanglementMeasure::Negativity).unwrap();
        assert_eq!(part.kind, BoundKind::EDoublePrime);
        let eps = part.epsilon_m.unwrap();
        assert!(part.value <= full.value + 1e-12);
        assert!(full.value - part.value <= eps + 1e-12);
    }
}
