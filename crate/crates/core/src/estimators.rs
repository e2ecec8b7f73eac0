//! Named bound estimators behind one trait, so sweeps and the CLI can pick
//! bounds at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::codes::{CodeLattice, LoopSpec};
use crate::error::{Error, Result};
use crate::localize::{
    bound_from_ensemble, build_preferred_set, canonical_setup, le_and_rle, localizable_entanglement, loop_region,
    measure_ensemble, restricted_le, BoundKind, BoundValue, EntanglementMeasure, LeConfig, MeasurementSetup,
    PreferredSet, Region, RleConfig, DEFAULT_CALIBRATION, DEFAULT_P_C,
};
use crate::spectrum::SolverConfig;
use crate::state::QuantumState;
use crate::witness::{build_witness, witness_expectation, WitnessOperator};

#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Part `A` of the loop bipartition; the witness hub (or the first loop
    /// qubit when the loop has no witness) if unset.
    pub part_a: Option<Vec<usize>>,
    /// Overrides the canonical setup for `E'` and `E''`.
    pub setup: Option<MeasurementSetup>,
    pub measure: EntanglementMeasure,
    pub p_c: f64,
    pub calibration: Vec<f64>,
    pub solver: SolverConfig,
    pub le: LeConfig,
    pub rle: RleConfig,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            part_a: None,
            setup: None,
            measure: EntanglementMeasure::Negativity,
            p_c: DEFAULT_P_C,
            calibration: DEFAULT_CALIBRATION.to_vec(),
            solver: SolverConfig::default(),
            le: LeConfig::default(),
            rle: RleConfig::default(),
        }
    }
}

/// Region with the default bipartition: hub:rest when a witness exists.
pub fn default_region(lat: &CodeLattice, spec: &LoopSpec, part_a: Option<Vec<usize>>) -> Result<Region> {
    match part_a {
        Some(a) => loop_region(lat, spec, Some(a)),
        None => {
            let hub = build_witness(lat, spec).ok().map(|w| vec![w.hub()]);
            loop_region(lat, spec, hub)
        }
    }
}

/// Everything the estimators share for one lattice and loop.
#[derive(Debug, Clone)]
pub struct EstimatorContext {
    pub spec: LoopSpec,
    pub region: Region,
    pub setup: MeasurementSetup,
    pub measure: EntanglementMeasure,
    /// Built only when `E''` was requested.
    pub preferred: Option<PreferredSet>,
    pub witness: Option<WitnessOperator>,
    pub le: LeConfig,
    pub rle: RleConfig,
}

impl EstimatorContext {
    pub fn prepare(lat: &CodeLattice, spec: &LoopSpec, opts: &EstimatorOptions, names: &[&str]) -> Result<Self> {
        let region = default_region(lat, spec, opts.part_a.clone())?;
        let setup = match &opts.setup {
            Some(s) => s.clone(),
            None => canonical_setup(lat, spec)?,
        };
        let preferred = if names.contains(&"e_dprime") {
            Some(build_preferred_set(lat, &region, &setup, opts.p_c, &opts.calibration, &opts.solver)?)
        } else {
            None
        };
        let witness = build_witness(lat, spec).ok();
        if names.contains(&"e_witness") {
            let w = witness.as_ref().ok_or_else(|| Error::InvalidSetup(format!("no witness for loop {spec}")))?;
            if w.hub() != region.part_a()[0] || region.part_a().len() != 1 {
                return Err(Error::InvalidRegion("the witness bound needs the hub:rest bipartition".into()));
            }
        }
        let le = LeConfig { measure: opts.measure, ..opts.le };
        let rle = RleConfig { measure: opts.measure, ..opts.rle };
        Ok(EstimatorContext { spec: *spec, region, setup, measure: opts.measure, preferred, witness, le, rle })
    }
}

pub trait BoundEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> BoundKind;
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue>;
}

/// Full localizable entanglement: continuous single-qubit bases.
pub struct LocalizableEstimator;

impl BoundEstimator for LocalizableEstimator {
    fn name(&self) -> &'static str {
        "le"
    }
    fn kind(&self) -> BoundKind {
        BoundKind::Le
    }
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue> {
        localizable_entanglement(state, &ctx.region, &ctx.le)
    }
}

/// Best Pauli setup by exhaustive search.
pub struct RestrictedEstimator;

impl BoundEstimator for RestrictedEstimator {
    fn name(&self) -> &'static str {
        "rle"
    }
    fn kind(&self) -> BoundKind {
        BoundKind::Rle
    }
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue> {
        restricted_le(state, &ctx.region, &ctx.rle)
    }
}

/// Canonical setup, every outcome.
pub struct CanonicalEstimator;

impl BoundEstimator for CanonicalEstimator {
    fn name(&self) -> &'static str {
        "e_prime"
    }
    fn kind(&self) -> BoundKind {
        BoundKind::EPrime
    }
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue> {
        let ens = measure_ensemble(state, &ctx.region, &ctx.setup, None)?;
        bound_from_ensemble(&ens, ctx.measure)
    }
}

/// Canonical setup restricted to the preferred outcomes.
pub struct PreferredEstimator;

impl BoundEstimator for PreferredEstimator {
    fn name(&self) -> &'static str {
        "e_dprime"
    }
    fn kind(&self) -> BoundKind {
        BoundKind::EDoublePrime
    }
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue> {
        let set = ctx.preferred.as_ref().ok_or_else(|| Error::InvalidSetup("context has no preferred set".into()))?;
        let ens = measure_ensemble(state, &ctx.region, &ctx.setup, Some(set))?;
        bound_from_ensemble(&ens, ctx.measure)
    }
}

pub struct WitnessEstimator;

impl BoundEstimator for WitnessEstimator {
    fn name(&self) -> &'static str {
        "e_witness"
    }
    fn kind(&self) -> BoundKind {
        BoundKind::EWitness
    }
    fn estimate(&self, ctx: &EstimatorContext, state: &QuantumState) -> Result<BoundValue> {
        let wit = ctx.witness.as_ref().ok_or_else(|| Error::InvalidSetup(format!("no witness for loop {}", ctx.spec)))?;
        let v = witness_expectation(state, wit)?;
        Ok(BoundValue { kind: BoundKind::EWitness, value: v.bound, epsilon_m: None, setup: None })
    }
}

#[derive(Clone)]
pub struct Registry {
    entries: BTreeMap<&'static str, Arc<dyn BoundEstimator>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register(Arc::new(LocalizableEstimator));
        r.register(Arc::new(RestrictedEstimator));
        r.register(Arc::new(CanonicalEstimator));
        r.register(Arc::new(PreferredEstimator));
        r.register(Arc::new(WitnessEstimator));
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry { entries: BTreeMap::new() }
    }

    /// Replaces any estimator already registered under the same name.
    pub fn register(&mut self, est: Arc<dyn BoundEstimator>) {
        self.entries.insert(est.name(), est);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BoundEstimator>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownEstimator(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Estimators for `names`, in request order.
    pub fn select(&self, names: &[&str]) -> Result<Vec<Arc<dyn BoundEstimator>>> {
        names.iter().map(|n| self.get(n)).collect()
    }
}

/// LE and RLE from one Pauli enumeration, for pure states.
pub fn le_rle_pair(ctx: &EstimatorContext, state: &QuantumState) -> Result<(BoundValue, BoundValue)> {
    match state {
        QuantumState::Pure(psi) => le_and_rle(psi, &ctx.region, &ctx.le),
        QuantumState::Mixed(_) => Err(Error::InvalidState("localizable entanglement needs a pure state".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_color, build_kitaev, default_ground_state, Direction, PlaquetteColor};
    use crate::pauli::Axis;
    use crate::state::PureState;

    #[test]
    fn default_names_and_lookup() {
        let r = Registry::default();
        assert_eq!(r.names(), vec!["e_dprime", "e_prime", "e_witness", "le", "rle"]);
        assert_eq!(r.get("rle").unwrap().kind(), BoundKind::Rle);
        assert!(matches!(r.get("nope"), Err(Error::UnknownEstimator(_))));
        assert!(r.select(&["e_prime", "bogus"]).is_err());
    }

    struct Constant;
    impl BoundEstimator for Constant {
        fn name(&self) -> &'static str {
            "e_prime"
        }
        fn kind(&self) -> BoundKind {
            BoundKind::EPrime
        }
        fn estimate(&self, _: &EstimatorContext, _: &QuantumState) -> Result<BoundValue> {
            Ok(BoundValue { kind: BoundKind::EPrime, value: 0.25, epsilon_m: None, setup: None })
        }
    }

    #[test]
    fn registration_overrides_by_name() {
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::X, Direction::H);
        let ctx = EstimatorContext::prepare(&lat, &spec, &EstimatorOptions::default(), &["e_prime"]).unwrap();
        let mut r = Registry::default();
        r.register(Arc::new(Constant));
        assert_eq!(r.names().len(), 5);
        let psi: QuantumState = PureState::new(8, default_ground_state(&lat).unwrap()).unwrap().into();
        assert_eq!(r.get("e_prime").unwrap().estimate(&ctx, &psi).unwrap().value, 0.25);
    }

    #[test]
    fn zero_field_values_through_the_registry() {
        let lat = build_kitaev(2, 2).unwrap();
        let psi: QuantumState = PureState::new(8, default_ground_state(&lat).unwrap()).unwrap().into();
        let r = Registry::default();
        for op in [Axis::X, Axis::Z] {
            let spec = LoopSpec::kitaev(op, Direction::H);
            let names = r.names();
            let ctx = EstimatorContext::prepare(&lat, &spec, &EstimatorOptions::default(), &names).unwrap();
            assert_eq!(ctx.region.part_a(), &[ctx.witness.as_ref().unwrap().hub()]);
            for est in r.select(&names).unwrap() {
                let v = est.estimate(&ctx, &psi).unwrap();
                assert_eq!(v.kind, est.kind());
                assert!((v.value - 1.0).abs() < 1e-9, "{} = {}", est.name(), v.value);
            }
        }
    }

    #[test]
    fn witness_requests_are_checked_up_front() {
        let color = build_color(3, 2).unwrap();
        let spec = LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Red);
        assert!(EstimatorContext::prepare(&color, &spec, &EstimatorOptions::default(), &["e_witness"]).is_err());
        assert!(EstimatorContext::prepare(&color, &spec, &EstimatorOptions::default(), &["e_prime"]).is_ok());
        let lat = build_kitaev(2, 2).unwrap();
        let spec = LoopSpec::kitaev(Axis::Z, Direction::H);
        let region = Region::from_loop(&lat, &spec).unwrap();
        let other = region.omega().iter().copied().find(|&q| q != build_witness(&lat, &spec).unwrap().hub()).unwrap();
        let opts = EstimatorOptions { part_a: Some(vec![other]), ..Default::default() };
        assert!(EstimatorContext::prepare(&lat, &spec, &opts, &["e_witness"]).is_err());
    }
}
