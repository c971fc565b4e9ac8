//! Restarted GMRES with Givens rotations, matrix-free and unpreconditioned.

use crate::error::{Error, Result};

/// Outcome of a converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresParams {
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresParams {
    fn default() -> Self {
        Self { restart: 30, max_iterations: 500 }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from `x` (initial guess, overwritten) until
/// `‖b − A x‖₂ ≤ target`. `apply(v, out)` writes `A v` into `out`.
pub fn gmres<F>(mut apply: F, b: &[f64], x: &mut [f64], target: f64, params: GmresParams) -> Result<SolveStats>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let m = params.restart.max(1);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut iterations = 0;

    loop {
        apply(x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::SolverFailure { iterations, residual: beta, target });
        }
        if beta <= target {
            return Ok(SolveStats { iterations, residual: beta });
        }
        if iterations >= params.max_iterations {
            return Err(Error::SolverFailure { iterations, residual: beta, target });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k_used = 0;
        let mut resid = beta;
        for k in 0..m {
            apply(&basis[k], &mut w);
            iterations += 1;
            for (i, vi) in basis.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            resid = g[k + 1].abs();
            k_used = k + 1;
            if resid <= target || hn == 0.0 || iterations >= params.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        if !resid.is_finite() {
            return Err(Error::SolverFailure { iterations, residual: resid, target });
        }
    }
}
