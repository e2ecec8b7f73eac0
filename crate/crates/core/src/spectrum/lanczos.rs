//! Explicitly restarted Lanczos for the lowest eigenpair of a real symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig { krylov_dim: 60, max_restarts: 400, tolerance: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    /// Estimated distance to the next eigenvalue; infinite in one dimension.
    pub gap: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

struct Cycle {
    ritz_values: Vec<f64>,
    ritz_vector: Vec<f64>,
}

/// One Krylov cycle from `start`, kept orthogonal to `deflate`.
fn cycle<F>(apply: &F, start: &[f64], deflate: &[&[f64]], m: usize, matvecs: &mut usize) -> Cycle
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut v0 = start.to_vec();
    for d in deflate {
        let c = dot(d, &v0);
        axpy(&mut v0, -c, d);
    }
    normalize(&mut v0);
    basis.push(v0);
    let mut alphas = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![0.0; dim];
    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        *matvecs += 1;
        let alpha = dot(&basis[j], &w);
        alphas.push(alpha);
        // Full reorthogonalization, applied twice.
        for _ in 0..2 {
            for d in deflate {
                let c = dot(d, &w);
                axpy(&mut w, -c, d);
            }
            for b in &basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let scale = alpha.abs().max(betas.last().copied().unwrap_or(0.0)).max(1.0);
        if basis.len() >= m || basis.len() + deflate.len() >= dim || beta <= 1e-13 * scale {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = order[0];
    let mut ritz = vec![0.0; dim];
    for (i, b) in basis.iter().enumerate() {
        axpy(&mut ritz, eig.eigenvectors[(i, lowest)], b);
    }
    normalize(&mut ritz);
    Cycle { ritz_values: order.iter().map(|&i| eig.eigenvalues[i]).collect(), ritz_vector: ritz }
}

fn residual<F: Fn(&[f64], &mut [f64])>(apply: &F, v: &[f64], matvecs: &mut usize) -> (f64, f64) {
    let mut hv = vec![0.0; v.len()];
    apply(v, &mut hv);
    *matvecs += 1;
    let e = dot(v, &hv);
    axpy(&mut hv, -e, v);
    (e, dot(&hv, &hv).sqrt())
}

/// Lowest eigenpair of the operator `apply` acting on vectors of `start.len()`.
pub fn lowest_eigenpair<F>(apply: F, start: Vec<f64>, cfg: &LanczosConfig) -> Result<Eigenpair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    if dim == 0 {
        return Err(Error::InvalidState("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = start;
    if normalize(&mut v) == 0.0 {
        v = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        normalize(&mut v);
    }
    let m = cfg.krylov_dim.max(2);
    let mut matvecs = 0;
    let mut last = (f64::NAN, f64::INFINITY);
    for _ in 0..cfg.max_restarts.max(1) {
        let c = cycle(&apply, &v, &[], m, &mut matvecs);
        v = c.ritz_vector;
        let (e, r) = residual(&apply, &v, &mut matvecs);
        last = (e, r);
        if r <= cfg.tolerance {
            let gap = if dim == 1 {
                f64::INFINITY
            } else {
                let probe: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let second = cycle(&apply, &probe, &[&v], m.min(dim - 1), &mut matvecs);
                second.ritz_values[0] - e
            };
            return Ok(Eigenpair { value: e, vector: v, residual: r, gap, matvecs });
        }
    }
    Err(Error::NoConvergence { iterations: matvecs, residual: last.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(m: &DMatrix<f64>) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for r in 0..m.nrows() {
                y[r] = (0..m.ncols()).map(|c| m[(r, c)] * x[c]).sum();
            }
        }
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &dim in &[1usize, 3, 20, 150] {
            let a = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
            let m = &a + a.transpose();
            let start = vec![1.0; dim];
            let pair = lowest_eigenpair(dense_apply(&m), start, &LanczosConfig::default()).unwrap();
            let eig = SymmetricEigen::new(m.clone());
            let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            vals.sort_by(f64::total_cmp);
            assert!((pair.value - vals[0]).abs() < 1e-9, "dim {dim}");
            assert!(pair.residual <= 1e-8);
            if dim > 1 {
                assert!(pair.gap >= vals[1] - vals[0] - 1e-8);
            }
        }
    }
}
