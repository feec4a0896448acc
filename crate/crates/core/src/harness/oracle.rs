//! Brute-force oracles that never call the solvers they check.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::jtrace::{trace_objective, trace_objective_xy};
use crate::krein::{KreinSpace, SignatureOperator};
use crate::linalg::{self, c64, Mat};
use crate::lsq::{SplitB, WeightedProblem};
use crate::subspace::{compressed_min_eigenvalue, is_w_nonnegative, projection_with_kernel, Subspace};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOracle {
    /// The sampled `E# W E` with the smallest `tr(J_ref E# W E)`.
    pub best: Mat,
    pub best_trace: f64,
    /// Running minimum of the trace after each sample.
    pub history: Vec<f64>,
}

/// Samples `n` projections `E` with `N(E) = S` and keeps the `E# W E` of
/// smallest `tr(J_ref E# W E)`.
pub fn oracle_projection_infimum(w: &Mat, s: &Subspace, space: &KreinSpace, n: usize, seed: u64) -> Result<ProjectionOracle> {
    oracle_projection_infimum_with(w, s, space, n, seed, &[])
}

/// As [`oracle_projection_infimum`], with extra candidate projections
/// evaluated before the random ones.
pub fn oracle_projection_infimum_with(w: &Mat, s: &Subspace, space: &KreinSpace, n: usize, seed: u64, extra: &[Mat]) -> Result<ProjectionOracle> {
    space.check_square(w)?;
    if !s.is_zero() && !is_w_nonnegative(s, w, space) {
        return Err(KreinError::RangeNotNonnegative { min_eigenvalue: compressed_min_eigenvalue(s, w, space) });
    }
    let mut best: Option<(f64, Mat)> = None;
    let mut history = Vec::with_capacity(n + extra.len());
    let mut consider = |e: &Mat, best: &mut Option<(f64, Mat)>| {
        let value = space.adjoint_unchecked(e) * w * e;
        let t = linalg::trace(&(space.j_ref() * &value)).re;
        if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
            *best = Some((t, value));
        }
        history.push(best.as_ref().map(|b| b.0).unwrap_or(t));
    };
    for e in extra {
        consider(e, &mut best);
    }
    for i in 0..n {
        let e = projection_with_kernel(s, seed.wrapping_add(i as u64))?;
        consider(e.matrix(), &mut best);
    }
    let (best_trace, best) = best.ok_or_else(|| KreinError::MalformedInput("oracle needs at least one sample".into()))?;
    Ok(ProjectionOracle { best, best_trace, history })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub value: f64,
    pub x: Mat,
    pub y: Mat,
    /// Objective value after each sweep (or refinement level).
    pub history: Vec<f64>,
}

/// Real parameters of an `n x n` complex matrix: real parts, then
/// imaginary parts, column-major.
fn to_matrix(theta: &[f64], n: usize) -> Mat {
    let m = n * n;
    Mat::from_fn(n, n, |r, c| {
        let k = c * n + r;
        c64(theta[k], if theta.len() > m { theta[m + k] } else { 0.0 })
    })
}

fn to_params(x: &Mat) -> Vec<f64> {
    let n = x.nrows();
    let mut theta = vec![0.0; 2 * n * n];
    for c in 0..n {
        for r in 0..n {
            theta[c * n + r] = x[(r, c)].re;
            theta[n * n + c * n + r] = x[(r, c)].im;
        }
    }
    theta
}

/// Gradient and Hessian of a real quadratic at `center`, from function
/// values only. Exact for quadratics up to roundoff.
fn quadratic_model(f: &dyn Fn(&[f64]) -> f64, center: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let m = center.len();
    let f0 = f(center);
    let shifted = |i: usize, si: f64, j: Option<(usize, f64)>| {
        let mut t = center.to_vec();
        t[i] += si;
        if let Some((j, sj)) = j {
            t[j] += sj;
        }
        f(&t)
    };
    let plus: Vec<f64> = (0..m).map(|i| shifted(i, 1.0, None)).collect();
    let minus: Vec<f64> = (0..m).map(|i| shifted(i, -1.0, None)).collect();
    let g = DVector::from_fn(m, |i, _| 0.5 * (plus[i] - minus[i]));
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = plus[i] + minus[i] - 2.0 * f0;
        for j in 0..i {
            let v = shifted(i, 1.0, Some((j, 1.0))) - plus[i] - plus[j] + f0;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    (g, h)
}

/// Stationary point of the quadratic model around `center`.
fn stationary_point(f: &dyn Fn(&[f64]) -> f64, center: &[f64]) -> Vec<f64> {
    let (g, h) = quadratic_model(f, center);
    let smax = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if smax == 0.0 {
        return center.to_vec();
    }
    let pinv = h.pseudo_inverse(1e-10 * smax).expect("nonnegative tolerance");
    let step = -(pinv * g);
    center.iter().zip(step.iter()).map(|(c, s)| c + s).collect()
}

/// Minimizes `f_J(X)` by exact quadratic modelling over the real parameters
/// of `X` (one sweep; a second confirms the fixed point).
pub fn oracle_trace_min_sweep(p: &WeightedProblem, j: &SignatureOperator) -> Result<SweepResult> {
    let n = p.space.dim();
    let f = |t: &[f64]| trace_objective(p, j, &to_matrix(t, n)).unwrap_or(f64::NAN);
    let mut theta = vec![0.0; 2 * n * n];
    let mut history = vec![f(&theta)];
    for _ in 0..2 {
        theta = stationary_point(&f, &theta);
        history.push(f(&theta));
    }
    let x = to_matrix(&theta, n);
    Ok(SweepResult { value: *history.last().unwrap(), y: x.clone(), x, history })
}

/// Alternating sweeps for `min_X max_Y f_J(X, Y)`: each sweep minimizes the
/// exact quadratic model in `X` with `Y` fixed, then maximizes in `Y`.
pub fn oracle_alternating_sweep(p: &WeightedProblem, split: &SplitB, j: &SignatureOperator, max_sweeps: usize) -> Result<SweepResult> {
    let n = p.space.dim();
    let mut x = Mat::zeros(n, n);
    let mut y = Mat::zeros(n, n);
    let eval = |x: &Mat, y: &Mat| trace_objective_xy(p, split, j, x, y).unwrap_or(f64::NAN);
    let mut history = vec![eval(&x, &y)];
    for _ in 0..max_sweeps {
        let yc = y.clone();
        let fx = |t: &[f64]| eval(&to_matrix(t, n), &yc);
        x = to_matrix(&stationary_point(&fx, &to_params(&x)), n);
        let xc = x.clone();
        let fy = |t: &[f64]| eval(&xc, &to_matrix(t, n));
        y = to_matrix(&stationary_point(&fy, &to_params(&y)), n);
        let v = eval(&x, &y);
        let prev = *history.last().unwrap();
        history.push(v);
        if (v - prev).abs() <= 1e-13 * v.abs().max(1.0) {
            break;
        }
    }
    Ok(SweepResult { value: *history.last().unwrap(), x, y, history })
}

/// Coarse-to-fine grid search of `f_J` over the real parts of `X`
/// (`grid` points per axis, `levels` zoom steps).
pub fn oracle_grid_sweep(p: &WeightedProblem, j: &SignatureOperator, grid: usize, levels: usize) -> Result<SweepResult> {
    let n = p.space.dim();
    let m = n * n;
    let grid = grid.max(3);
    let f = |t: &[f64]| trace_objective(p, j, &to_matrix(t, n)).unwrap_or(f64::NAN);
    let mut center = vec![0.0; m];
    let mut radius = 4.0 * (1.0 + linalg::op_norm(&p.c));
    let mut best = f(&center);
    let mut history = Vec::new();
    let total = grid.pow(m as u32);
    for _ in 0..levels {
        let mut level_best = (best, center.clone());
        let mut point = vec![0.0; m];
        for idx in 0..total {
            let mut r = idx;
            for k in 0..m {
                let step = (r % grid) as f64 / (grid - 1) as f64;
                r /= grid;
                point[k] = center[k] + radius * (2.0 * step - 1.0);
            }
            let v = f(&point);
            if v < level_best.0 {
                level_best = (v, point.clone());
            }
        }
        best = level_best.0;
        center = level_best.1;
        radius *= 2.0 / (grid - 1) as f64;
        history.push(best);
    }
    let x = to_matrix(&center, n);
    Ok(SweepResult { value: best, y: x.clone(), x, history })
}

/// Brute-force `min f_J(X)`: a grid over real parts when `dim <= 2`,
/// quadratic-model sweeps otherwise.
pub fn oracle_parameter_sweep(p: &WeightedProblem, j: &SignatureOperator, grid: usize) -> Result<SweepResult> {
    if p.space.dim() <= 2 {
        oracle_grid_sweep(p, j, grid, 24)
    } else {
        oracle_trace_min_sweep(p, j)
    }
}

/// Summary of an oracle comparison, for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub solver: f64,
    pub oracle: f64,
    pub difference: f64,
}
