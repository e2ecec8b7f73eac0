//! Field sweeps, derivative peaks near the transition, and finite-size
//! scaling of the peak position.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, CodeLattice, LoopSpec};
use crate::error::{Error, Result};
use crate::estimators::{le_rle_pair, EstimatorContext, EstimatorOptions, Registry};
use crate::localize::{BoundKind, BoundValue};
use crate::spectrum::solve;
use crate::state::QuantumState;

/// Critical fields in the thermodynamic limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    pub kitaev: f64,
    pub color: f64,
}

pub const CRITICAL: CriticalConstants = CriticalConstants { kitaev: 0.328474, color: 0.385 };

impl CriticalConstants {
    pub fn for_kind(&self, kind: CodeKind) -> f64 {
        match kind {
            CodeKind::Kitaev => self.kitaev,
            CodeKind::Color => self.color,
        }
    }
}

/// Slack allowed on each hierarchy inequality.
pub const HIERARCHY_TOLERANCE: f64 = 1e-9;

/// Coarsest spacing accepted around a derivative peak.
pub const PEAK_RESOLUTION: f64 = 0.01;

/// `lo, lo + step, ..., hi` built from integer multiples so endpoints are exact.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || lo < 0.0 {
        return Err(Error::InvalidSetup(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// `[0, 2]` in steps of 0.02, refined to 0.005 on `[0.2, 0.5]`.
pub fn refined_grid() -> Vec<f64> {
    (0..=400usize).filter(|&k| k % 4 == 0 || (40..=100).contains(&k)).map(|k| k as f64 * 0.005).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub g: f64,
    pub energy: f64,
    pub values: BTreeMap<BoundKind, BoundValue>,
}

impl SweepPoint {
    pub fn value(&self, kind: BoundKind) -> Option<f64> {
        self.values.get(&kind).map(|v| v.value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub lattice: String,
    pub loop_spec: LoopSpec,
    pub part_a: Vec<usize>,
    pub g_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepRecord {
    /// `(g, value)` pairs for one bound kind.
    pub fn series(&self, kind: BoundKind) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut g = Vec::with_capacity(self.points.len());
        let mut v = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let x = p.value(kind).ok_or_else(|| Error::InvalidSetup(format!("{kind} was not computed")))?;
            g.push(p.g);
            v.push(x);
        }
        Ok((g, v))
    }

    /// Peak of `|dE/dg|`; the witness series of a `Z` loop is cut where it
    /// first vanishes.
    pub fn derivative_peak(&self, kind: BoundKind) -> Result<Peak> {
        let (g, mut v) = self.series(kind)?;
        if kind == BoundKind::EWitness && self.loop_spec.operator == crate::pauli::Axis::Z {
            v = truncate_at_zero(&v).to_vec();
        }
        derivative_peak(&g[..v.len()], &v)
    }
}

/// Checks `LE >= RLE >= E' >= E''` and `E' >= E^w` on whatever is present.
pub fn check_hierarchy(g: f64, values: &BTreeMap<BoundKind, BoundValue>) -> Result<()> {
    use BoundKind::*;
    let get = |k| values.get(&k).map(|v: &BoundValue| v.value);
    let chain = [Le, Rle, EPrime, EDoublePrime];
    let present: Vec<(BoundKind, f64)> = chain.iter().filter_map(|&k| get(k).map(|v| (k, v))).collect();
    let mut pairs: Vec<((BoundKind, f64), (BoundKind, f64))> = present.windows(2).map(|w| (w[0], w[1])).collect();
    if let (Some(e), Some(w)) = (get(EPrime), get(EWitness)) {
        pairs.push(((EPrime, e), (EWitness, w)));
    }
    for ((ka, a), (kb, b)) in pairs {
        if b > a + HIERARCHY_TOLERANCE {
            return Err(Error::Hierarchy { g, detail: format!("{kb} = {b:.12} exceeds {ka} = {a:.12}") });
        }
    }
    Ok(())
}

/// Ground state and each requested bound at every `g`, in parallel over `g`.
pub fn sweep(
    lat: &CodeLattice,
    spec: &LoopSpec,
    g_grid: &[f64],
    names: &[&str],
    registry: &Registry,
    opts: &EstimatorOptions,
) -> Result<SweepRecord> {
    if g_grid.is_empty() || g_grid.windows(2).any(|w| w[1] <= w[0]) || g_grid[0] < 0.0 {
        return Err(Error::InvalidSetup("g grid must be nonnegative and strictly increasing".into()));
    }
    let estimators = registry.select(names)?;
    let ctx = EstimatorContext::prepare(lat, spec, opts, names)?;
    let both = names.contains(&"le") && names.contains(&"rle");
    let points = g_grid
        .par_iter()
        .map(|&g| {
            let run = || -> Result<SweepPoint> {
                let gs = solve(lat, g, &opts.solver)?;
                let state: QuantumState = gs.vector().into();
                let mut values = BTreeMap::new();
                if both {
                    let (le, rle) = le_rle_pair(&ctx, &state)?;
                    values.insert(BoundKind::Le, le);
                    values.insert(BoundKind::Rle, rle);
                }
                for est in &estimators {
                    if both && matches!(est.kind(), BoundKind::Le | BoundKind::Rle) {
                        continue;
                    }
                    values.insert(est.kind(), est.estimate(&ctx, &state)?);
                }
                check_hierarchy(g, &values)?;
                Ok(SweepPoint { g, energy: gs.energy, values })
            };
            run().map_err(|e| match e {
                Error::Hierarchy { .. } | Error::AtField { .. } => e,
                other => other.at_field(g),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepRecord {
        lattice: lat.describe(),
        loop_spec: *spec,
        part_a: ctx.region.part_a().to_vec(),
        g_grid: g_grid.to_vec(),
        points,
    })
}

/// Prefix of the series up to and including its first zero.
pub fn truncate_at_zero(values: &[f64]) -> &[f64] {
    match values.iter().position(|&v| v <= 0.0) {
        Some(k) => &values[..=k],
        None => values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub g_m: f64,
    pub height: f64,
}

/// Maximum of `|dE/dg|` from central differences, refined by the vertex of
/// the parabola through the largest value and its neighbours.
pub fn derivative_peak(g: &[f64], values: &[f64]) -> Result<Peak> {
    if g.len() != values.len() {
        return Err(Error::InvalidSetup("grid and series lengths differ".into()));
    }
    if g.len() < 5 {
        return Err(Error::InvalidSetup("need at least five points to locate a peak".into()));
    }
    let mid: Vec<f64> = g[1..g.len() - 1].to_vec();
    let d: Vec<f64> = (1..g.len() - 1).map(|i| ((values[i + 1] - values[i - 1]) / (g[i + 1] - g[i - 1])).abs()).collect();
    let j = (0..d.len()).fold(0, |best, i| if d[i] > d[best] { i } else { best });
    if j == 0 || j == d.len() - 1 {
        return Err(Error::PeakAtBoundary { g: mid[j] });
    }
    let spacing = (g[j + 2] - g[j]).max(g[j + 1] - g[j - 1]) / 2.0;
    if spacing > PEAK_RESOLUTION + 1e-12 {
        return Err(Error::InvalidSetup(format!(
            "grid spacing {spacing:.4} near the peak at g = {:.4} is coarser than {PEAK_RESOLUTION}",
            mid[j]
        )));
    }
    let (x0, x1, x2) = (mid[j - 1], mid[j], mid[j + 1]);
    let (y0, y1, y2) = (d[j - 1], d[j], d[j + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    let c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / denom;
    if a >= 0.0 {
        return Ok(Peak { g_m: x1, height: y1 });
    }
    let g_m = (-b / (2.0 * a)).clamp(x0, x2);
    Ok(Peak { g_m, height: a * g_m * g_m + b * g_m + c })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub g_c_inf: f64,
    /// `(N, g_m(N))`.
    pub points: Vec<(usize, f64)>,
    pub amplitude: f64,
    pub exponent: f64,
    /// RMS residual of the log-log line.
    pub fit_residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: usize) -> f64 {
        self.g_c_inf + self.amplitude * (n as f64).powf(-self.exponent)
    }
}

/// Least-squares line through `(ln N, ln(g_m - g_c))`.
pub fn fit_scaling(points: &[(usize, f64)], g_c_inf: f64) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 sizes, got {}", points.len())));
    }
    if let Some(&(n, g)) = points.iter().find(|&&(_, g)| !(g > g_c_inf)) {
        return Err(Error::Fit(format!("g_m({n}) = {g} does not exceed g_c = {g_c_inf}")));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, g)| (g - g_c_inf).ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if slope >= 0.0 {
        return Err(Error::Fit(format!("g_m(N) does not approach g_c (slope {slope:.4})")));
    }
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        g_c_inf,
        points: points.to_vec(),
        amplitude: intercept.exp(),
        exponent: -slope,
        fit_residual: (rss / m).sqrt(),
    })
}
