//! J-traces `tr_J(T) = tr(J T)` and the trace-valued least squares problems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::krein::{KreinSpace, SignatureOperator};
use crate::linalg::{self, c64, identity, op_norm, Mat, C64};
use crate::lsq::{eval_f, sample_operator, eval_fj, solve_ims, solve_imms, split_b, SplitB, WeightedProblem};
use crate::subspace::is_complementable;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub value: C64,
    pub j_used: SignatureOperator,
    /// Trace norm of `T` in the Hilbert space of `j_used`.
    pub trace_norm: f64,
    /// `|tr_J(T)| - ||T||_1`, nonpositive up to roundoff.
    pub bound_check: f64,
}

fn check_signature(j: &SignatureOperator, space: &KreinSpace) -> Result<()> {
    space.check_square(j.matrix())?;
    // rebuilding validates the invariants
    SignatureOperator::new(j.matrix().clone(), space).map(|_| ())
}

/// `G^{1/2} T G^{-1/2}`: the matrix of `T` in an orthonormal basis of the
/// Hilbert space of `j`.
fn in_j_coordinates(t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> Mat {
    let (root, inv_root) = j.metric_roots(space);
    root * t * inv_root
}

pub fn trace_norm(t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> f64 {
    linalg::singular_values(&in_j_coordinates(t, j, space)).iter().sum()
}

/// Hilbert-Schmidt norm in the Hilbert space of `j`.
pub fn hs_norm(t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> f64 {
    in_j_coordinates(t, j, space).norm()
}

fn tr_j(t: &Mat, j: &SignatureOperator) -> C64 {
    linalg::trace(&(j.matrix() * t))
}

pub fn trace_j(t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> Result<TraceReport> {
    space.check_square(t)?;
    check_signature(j, space)?;
    let value = tr_j(t, j);
    let norm = trace_norm(t, j, space);
    Ok(TraceReport { value, j_used: j.clone(), trace_norm: norm, bound_check: value.norm() - norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceLawsReport {
    /// `|tr_J(aS + bT) - a tr_J(S) - b tr_J(T)|`
    pub linearity: f64,
    /// `|tr_J(T#) - conj(tr_J(T))|`
    pub adjoint: f64,
    /// `|tr_J(TS) - tr_J(JSJT)|`
    pub product_jsjt: f64,
    /// `|tr_J(TS) - tr_J(SJTJ)|`
    pub product_sjtj: f64,
    /// `max(0, |tr_J(T)| - ||T||_1)`
    pub trace_norm_excess: f64,
    pub scale: f64,
}

impl TraceLawsReport {
    pub fn max_relative(&self) -> f64 {
        [self.linearity, self.adjoint, self.product_jsjt, self.product_sjtj, self.trace_norm_excess]
            .iter()
            .fold(0.0_f64, |m, &x| m.max(x))
            / self.scale
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_relative() <= tol
    }
}

pub fn verify_trace_laws(s: &Mat, t: &Mat, alpha: C64, beta: C64, j: &SignatureOperator, space: &KreinSpace) -> Result<TraceLawsReport> {
    space.check_square(s)?;
    space.check_square(t)?;
    check_signature(j, space)?;
    let jm = j.matrix();
    let combo = s * alpha + t * beta;
    let linearity = (tr_j(&combo, j) - alpha * tr_j(s, j) - beta * tr_j(t, j)).norm();
    let adjoint = (tr_j(&space.adjoint_unchecked(t), j) - tr_j(t, j).conj()).norm();
    let ts = tr_j(&(t * s), j);
    let product_jsjt = (ts - tr_j(&(jm * s * jm * t), j)).norm();
    let product_sjtj = (ts - tr_j(&(s * jm * t * jm), j)).norm();
    let trace_norm_excess = (tr_j(t, j).norm() - trace_norm(t, j, space)).max(0.0);
    let jn = op_norm(jm).max(1.0);
    let sn = op_norm(s).max(1.0);
    let tn = op_norm(t).max(1.0);
    let scale = space.dim() as f64 * jn.powi(3) * sn * tn * alpha.norm().max(beta.norm()).max(1.0);
    Ok(TraceLawsReport { linearity, adjoint, product_jsjt, product_sjtj, trace_norm_excess, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangeOfSignatureReport {
    /// `tr_{Jb}(T)`
    pub lhs: C64,
    /// `tr_{Ja}(Jb T Ja)`
    pub rhs: C64,
    pub residual: f64,
}

pub fn change_of_signature(t: &Mat, ja: &SignatureOperator, jb: &SignatureOperator, space: &KreinSpace) -> Result<ChangeOfSignatureReport> {
    space.check_square(t)?;
    check_signature(ja, space)?;
    check_signature(jb, space)?;
    let lhs = tr_j(t, jb);
    let rhs = tr_j(&(jb.matrix() * t * ja.matrix()), ja);
    Ok(ChangeOfSignatureReport { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// `f_J(X) = tr_J(F(X))`.
pub fn trace_objective(p: &WeightedProblem, j: &SignatureOperator, x: &Mat) -> Result<f64> {
    Ok(tr_j(&eval_f(p, x)?, j).re)
}

/// `f_J(X, Y) = tr_J(F_J(X, Y))`.
pub fn trace_objective_xy(p: &WeightedProblem, split: &SplitB, j: &SignatureOperator, x: &Mat, y: &Mat) -> Result<f64> {
    Ok(tr_j(&eval_fj(p, split, x, y)?, j).re)
}

/// `Df_J(X)(Y) = 2 Re tr_J(Y# B# W (BX - C))`.
pub fn frechet_derivative(p: &WeightedProblem, j: &SignatureOperator, x: &Mat, y: &Mat) -> Result<f64> {
    p.space.check_square(x)?;
    p.space.check_square(y)?;
    let by = &p.b * y;
    let m = p.space.adjoint_unchecked(&by) * &p.w * (&p.b * x - &p.c);
    Ok(2.0 * tr_j(&m, j).re)
}

/// Forward and central difference quotients of `f_J` at `X` along `Y`.
pub fn finite_differences(p: &WeightedProblem, j: &SignatureOperator, x: &Mat, y: &Mat, h: f64) -> Result<(f64, f64)> {
    let hy = y * c64(h, 0.0);
    let f0 = trace_objective(p, j, x)?;
    let fp = trace_objective(p, j, &(x + &hy))?;
    let fm = trace_objective(p, j, &(x - &hy))?;
    Ok(((fp - f0) / h, (fp - fm) / (2.0 * h)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceCertificate {
    pub samples: usize,
    pub violations: usize,
    /// Smallest `(f_J(X) - f_J(X0)) / scale` seen.
    pub worst: f64,
    /// Largest `|Df_J(X0)(Y)|` over unit directions `Y`, relative to scale.
    pub gradient: f64,
}

impl TraceCertificate {
    pub fn passed(&self, tol: f64) -> bool {
        self.violations == 0 && self.gradient <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMinSolution {
    pub x0: Mat,
    pub value: f64,
    pub certificate: TraceCertificate,
}

/// Samples `X` and checks `f_J(X) >= f_J(X0)`, plus a vanishing gradient.
pub fn certify_trace_min(p: &WeightedProblem, j: &SignatureOperator, x0: &Mat, samples: usize, seed: u64) -> Result<TraceCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = trace_objective(p, j, x0)?;
    let tol = p.space.tol();
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    let mut gradient = 0.0_f64;
    let n = p.space.dim();
    let jn = op_norm(j.matrix());
    for i in 0..samples {
        let x = sample_operator(&mut rng, n, x0, i);
        let f = trace_objective(p, j, &x)?;
        let sc = f.abs().max(f0.abs()).max(1.0);
        let rel = (f - f0) / sc;
        worst = worst.min(rel);
        if rel < -tol {
            violations += 1;
        }
        let mut dir = linalg::random_matrix(&mut rng, n, n);
        dir /= c64(op_norm(&dir), 0.0);
        let d = frechet_derivative(p, j, x0, &dir)?;
        gradient = gradient.max(d.abs() / (p.scale() * jn * n as f64));
    }
    Ok(TraceCertificate { samples, violations, worst, gradient })
}

/// Minimizer of `tr_J((BX - C)# W (BX - C))`: the indefinite minimum
/// solution, with a sampled certificate on `f_J`.
pub fn solve_trace_min(p: &WeightedProblem, j: &SignatureOperator) -> Result<TraceMinSolution> {
    solve_trace_min_with(p, j, 1000, 0x7ace)
}

pub fn solve_trace_min_with(p: &WeightedProblem, j: &SignatureOperator, samples: usize, seed: u64) -> Result<TraceMinSolution> {
    check_signature(j, &p.space)?;
    let x0 = solve_ims(p)?.x0;
    let value = trace_objective(p, j, &x0)?;
    let certificate = certify_trace_min(p, j, &x0, samples, seed)?;
    if !certificate.passed(p.space.tol()) {
        return Err(KreinError::InternalCertificateFailure(format!(
            "trace minimum certificate failed ({} violations, gradient {:.3e})",
            certificate.violations, certificate.gradient
        )));
    }
    Ok(TraceMinSolution { x0, value, certificate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSaddleReport {
    pub samples: usize,
    pub min_side_failures: usize,
    pub max_side_failures: usize,
    pub worst_min_side: f64,
    pub worst_max_side: f64,
}

impl TraceSaddleReport {
    pub fn passed(&self) -> bool {
        self.min_side_failures == 0 && self.max_side_failures == 0
    }
}

/// Samples and checks `f_J(Z, Y) <= f_J(Z, Z) <= f_J(X, Z)` for the split
/// taken with signature `j`.
pub fn verify_trace_saddle(p: &WeightedProblem, j: &SignatureOperator, z: &Mat, samples: usize, seed: u64) -> Result<TraceSaddleReport> {
    let split = split_b(p, j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fzz = trace_objective_xy(p, &split, j, z, z)?;
    let tol = p.space.tol();
    let mut rep = TraceSaddleReport {
        samples,
        min_side_failures: 0,
        max_side_failures: 0,
        worst_min_side: f64::INFINITY,
        worst_max_side: f64::INFINITY,
    };
    let n = p.space.dim();
    for i in 0..samples {
        let x = sample_operator(&mut rng, n, z, i);
        let y = sample_operator(&mut rng, n, z, i);
        let fxz = trace_objective_xy(p, &split, j, &x, z)?;
        let fzy = trace_objective_xy(p, &split, j, z, &y)?;
        let lo = (fxz - fzz) / fxz.abs().max(fzz.abs()).max(1.0);
        let hi = (fzz - fzy) / fzy.abs().max(fzz.abs()).max(1.0);
        rep.worst_min_side = rep.worst_min_side.min(lo);
        rep.worst_max_side = rep.worst_max_side.min(hi);
        if lo < -tol {
            rep.min_side_failures += 1;
        }
        if hi < -tol {
            rep.max_side_failures += 1;
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMinmaxSolution {
    pub z: Mat,
    /// `tr_J(C# W_{/[R(B)]} C)`.
    pub value: f64,
    pub saddle: TraceSaddleReport,
}

pub fn solve_trace_minmax(p: &WeightedProblem, j: &SignatureOperator) -> Result<TraceMinmaxSolution> {
    solve_trace_minmax_with(p, j, 200, 0x5add1e)
}

pub fn solve_trace_minmax_with(p: &WeightedProblem, j: &SignatureOperator, samples: usize, seed: u64) -> Result<TraceMinmaxSolution> {
    check_signature(j, &p.space)?;
    let s = p.range_b()?;
    if !is_complementable(&p.w, &s, &p.space)? {
        return Err(KreinError::NotComplementable);
    }
    let sol = solve_imms(p)?;
    let schur_value = sol.schur_value.ok_or(KreinError::NotComplementable)?;
    let value = tr_j(&schur_value, j).re;
    let saddle = verify_trace_saddle(p, j, &sol.z, samples, seed)?;
    if !saddle.passed() {
        return Err(KreinError::InternalCertificateFailure(format!(
            "trace saddle certificate failed ({} min-side, {} max-side)",
            saddle.min_side_failures, saddle.max_side_failures
        )));
    }
    Ok(TraceMinmaxSolution { z: sol.z, value, saddle })
}

/// `[S, T]_J = tr_J(T# S)`.
pub fn js2_inner(s: &Mat, t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> Result<C64> {
    space.check_square(s)?;
    space.check_square(t)?;
    Ok(tr_j(&(space.adjoint_unchecked(t) * s), j))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Js2Report {
    /// `tr_J(T# T)`
    pub lhs: f64,
    /// `||P+ T||_2^2`
    pub plus: f64,
    /// `||P- T||_2^2`
    pub minus: f64,
    /// `|lhs - (plus - minus)|`
    pub residual: f64,
}

/// `tr_J(T# T) = ||P+ T||_2^2 - ||P- T||_2^2` with `P± = (I ± J)/2`.
pub fn js2_signature_identity(t: &Mat, j: &SignatureOperator, space: &KreinSpace) -> Result<Js2Report> {
    let lhs = js2_inner(t, t, j, space)?.re;
    let n = space.dim();
    let half = c64(0.5, 0.0);
    let p_plus = (identity(n) + j.matrix()) * half;
    let p_minus = (identity(n) - j.matrix()) * half;
    let plus = hs_norm(&(p_plus * t), j, space).powi(2);
    let minus = hs_norm(&(p_minus * t), j, space).powi(2);
    Ok(Js2Report { lhs, plus, minus, residual: (lhs - (plus - minus)).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::random_signature_operator;
    use crate::linalg::{real_diag, real_matrix};

    fn j2() -> KreinSpace {
        KreinSpace::standard(1, 1).unwrap()
    }

    fn jb(space: &KreinSpace) -> SignatureOperator {
        let m = real_matrix(&[&[5.0, -4.0], &[4.0, -5.0]]) * c64(1.0 / 3.0, 0.0);
        SignatureOperator::new(m, space).unwrap()
    }

    fn t_example() -> Mat {
        real_matrix(&[&[1.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn trace_examples() {
        let space = j2();
        let ja = space.reference_signature();
        let r = trace_j(&t_example(), &ja, &space).unwrap();
        assert!((r.value - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(r.bound_check <= 1e-14);
        let r = trace_j(&t_example(), &jb(&space), &space).unwrap();
        assert!((r.value - c64(3.0, 0.0)).norm() < 1e-14);
        assert!(r.bound_check <= 1e-12);
        assert_eq!(trace_j(&Mat::zeros(2, 2), &ja, &space).unwrap().value, c64(0.0, 0.0));
        assert!(matches!(trace_j(&Mat::zeros(3, 3), &ja, &space), Err(KreinError::DimensionMismatch { .. })));
    }

    /// Oracle: sum of `[T e_n, e_n]` over an orthonormal basis of the
    /// Hilbert space of `J_b`, built independently by Gram-Schmidt in `<x, y>_b`.
    #[test]
    fn trace_matches_basis_sum() {
        let space = j2();
        let j = jb(&space);
        let g = j.gram(&space);
        let mut basis: Vec<crate::linalg::Vector> = Vec::new();
        for k in 0..2 {
            let mut v = crate::linalg::Vector::zeros(2);
            v[k] = c64(1.0, 0.0);
            for u in &basis {
                let coeff = u.dotc(&(&g * &v));
                v -= u * coeff;
            }
            let nrm = v.dotc(&(&g * &v)).re.sqrt();
            basis.push(v / c64(nrm, 0.0));
        }
        let t = t_example();
        let sum: C64 = basis.iter().map(|e| space.gram(&(&t * e), e).unwrap()).sum();
        assert!((sum - c64(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn trace_laws_hold() {
        let space = KreinSpace::standard(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..10 {
            let j = random_signature_operator(&space, seed);
            let s = linalg::random_matrix(&mut rng, 3, 3);
            let t = linalg::random_matrix(&mut rng, 3, 3);
            let rep = verify_trace_laws(&s, &t, c64(0.3, -1.2), c64(2.0, 0.5), &j, &space).unwrap();
            assert!(rep.holds(1e-13), "{rep:?}");
        }
        let t = t_example();
        let sa = &t + space_j2_adjoint(&t);
        let v = trace_j(&sa, &jb(&j2()), &j2()).unwrap().value;
        assert!(v.im.abs() < 1e-14);
    }

    fn space_j2_adjoint(t: &Mat) -> Mat {
        j2().adjoint(t).unwrap()
    }

    #[test]
    fn change_of_signature_examples() {
        let space = j2();
        let ja = space.reference_signature();
        let r = change_of_signature(&t_example(), &ja, &jb(&space), &space).unwrap();
        assert!((r.lhs - c64(3.0, 0.0)).norm() < 1e-14);
        assert!(r.residual < 1e-14);
        let r = change_of_signature(&t_example(), &ja, &ja, &space).unwrap();
        assert!(r.residual < 1e-15);
    }

    fn min_instance() -> WeightedProblem {
        WeightedProblem::new(identity(2), real_diag(&[1.0, 0.0]), identity(2), j2()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = min_instance();
        let j = p.space.reference_signature();
        assert!((trace_objective(&p, &j, &real_diag(&[1.0, 0.0])).unwrap() + 1.0).abs() < 1e-14);
        let split = split_b(&p, &j).unwrap();
        let x = real_matrix(&[&[0.5, 2.0], &[1.0, -1.0]]);
        let a = trace_objective_xy(&p, &split, &j, &x, &x).unwrap();
        assert!((a - trace_objective(&p, &j, &x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        let p = min_instance();
        let j = p.space.reference_signature();
        let x0 = real_diag(&[1.0, 0.0]);
        let y = real_matrix(&[&[0.3, -2.0], &[1.0, 0.7]]);
        assert!(frechet_derivative(&p, &j, &x0, &y).unwrap().abs() < 1e-14);
        let x = real_matrix(&[&[2.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(frechet_derivative(&p, &j, &x, &Mat::zeros(2, 2)).unwrap(), 0.0);
        let an = frechet_derivative(&p, &jb(&p.space), &x, &y).unwrap();
        let h = 1e-5 * op_norm(&x) / op_norm(&y);
        let (_, central) = finite_differences(&p, &jb(&p.space), &x, &y, h).unwrap();
        assert!((an - central).abs() / an.abs().max(1.0) < 1e-6);
    }

    #[test]
    fn trace_min_examples() {
        let p = min_instance();
        let j = p.space.reference_signature();
        let sol = solve_trace_min(&p, &j).unwrap();
        assert!((sol.value + 1.0).abs() < 1e-14);
        let space = KreinSpace::standard(2, 0).unwrap();
        let b = real_matrix(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let p = WeightedProblem::new(identity(2), b, identity(2), space.clone()).unwrap();
        assert!(solve_trace_min(&p, &space.reference_signature()).unwrap().value.abs() < 1e-13);
        let p = WeightedProblem::new(identity(2), real_diag(&[0.0, 1.0]), identity(2), j2()).unwrap();
        assert!(matches!(solve_trace_min(&p, &j), Err(KreinError::RangeNotNonnegative { .. })));
    }

    /// Oracle: f_J over the two real parameters of the free first row of X
    /// on a fine grid never drops below -1.
    #[test]
    fn trace_min_matches_grid() {
        let p = min_instance();
        let j = p.space.reference_signature();
        let mut best = f64::INFINITY;
        for a in -20..=20 {
            for b in -20..=20 {
                let x = real_matrix(&[&[a as f64 * 0.1, b as f64 * 0.1], &[0.0, 0.0]]);
                best = best.min(trace_objective(&p, &j, &x).unwrap());
            }
        }
        assert!((best + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_minmax_examples() {
        let space = j2();
        let c = real_matrix(&[&[1.0, 2.0], &[-0.5, 3.0]]);
        for j in [space.reference_signature(), jb(&space)] {
            let p = WeightedProblem::new(identity(2), identity(2), c.clone(), space.clone()).unwrap();
            let sol = solve_trace_minmax(&p, &j).unwrap();
            assert!((&sol.z - &c).norm() < 1e-13);
            assert!(sol.value.abs() < 1e-13);
        }
        let p = WeightedProblem::new(space.j_ref().clone(), identity(2), identity(2), space.clone()).unwrap();
        let sol = solve_trace_minmax(&p, &space.reference_signature()).unwrap();
        assert!(sol.value.abs() < 1e-13);
        assert!(sol.saddle.worst_min_side > 0.0);

        let w = real_matrix(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let p = WeightedProblem::new(w, real_diag(&[1.0, 0.0]), identity(2), space.clone()).unwrap();
        assert!(matches!(solve_trace_minmax(&p, &space.reference_signature()), Err(KreinError::NotComplementable)));
    }

    #[test]
    fn js2_examples() {
        let space = j2();
        let j = space.reference_signature();
        let r = js2_signature_identity(&t_example(), &j, &space).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14 && (r.plus - 2.0).abs() < 1e-14 && r.minus.abs() < 1e-14);
        let r = js2_signature_identity(&Mat::zeros(2, 2), &j, &space).unwrap();
        assert_eq!((r.lhs, r.plus, r.minus), (0.0, 0.0, 0.0));
        let t = real_matrix(&[&[0.0, 0.0], &[2.0, -1.0]]);
        let r = js2_signature_identity(&t, &j, &space).unwrap();
        assert!((r.lhs + t.norm_squared()).abs() < 1e-13);
        let r = js2_signature_identity(&t, &jb(&space), &space).unwrap();
        assert!(r.residual < 1e-12, "{r:?}");
    }
}
