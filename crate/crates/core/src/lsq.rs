//! Weighted indefinite least squares: `min (BX - C)# W (BX - C)` in the
//! Krein order, its maximization mirror, and the min-max problem over the
//! split `B = B+ + B-`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::krein::{KreinSpace, SignatureOperator};
use crate::linalg::{self, op_norm, Mat, RankPolicy, Vector};
use crate::schur::schur_complement;
use crate::subspace::{
    compressed_max_eigenvalue, compressed_min_eigenvalue, is_complementable, is_w_nonnegative, is_w_nonpositive,
    range_subspace, w_split, Subspace, WSplit,
};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProblem {
    pub w: Mat,
    pub b: Mat,
    pub c: Mat,
    pub space: KreinSpace,
}

impl WeightedProblem {
    pub fn new(w: Mat, b: Mat, c: Mat, space: KreinSpace) -> Result<Self> {
        space.check_square(&w)?;
        space.check_square(&b)?;
        space.check_square(&c)?;
        space.require_selfadjoint(&w)?;
        Ok(WeightedProblem { w, b, c, space })
    }

    /// Same weight and `B`, different right-hand side.
    pub fn with_c(&self, c: Mat) -> Result<Self> {
        self.space.check_square(&c)?;
        Ok(WeightedProblem { c, ..self.clone() })
    }

    /// Magnitude used to turn the relative tolerance into an absolute one:
    /// `max(1,|W|) max(1,|B|) max(1,|B|,|C|)`.
    pub fn scale(&self) -> f64 {
        let w = op_norm(&self.w).max(1.0);
        let b = op_norm(&self.b).max(1.0);
        let c = op_norm(&self.c).max(1.0);
        w * b * b.max(c)
    }

    pub fn range_b(&self) -> Result<Subspace> {
        range_subspace(&self.b)
    }

    fn adj(&self, a: &Mat) -> Mat {
        self.space.adjoint_unchecked(a)
    }

    /// `B# W B` and `B# W C`.
    pub fn normal_parts(&self) -> (Mat, Mat) {
        let bw = self.adj(&self.b) * &self.w;
        (&bw * &self.b, &bw * &self.c)
    }

    /// `||B# W (B X - C)||`.
    pub fn normal_residual(&self, x: &Mat) -> f64 {
        op_norm(&(self.adj(&self.b) * &self.w * (&self.b * x - &self.c)))
    }

    /// `C# W_{/[R(B)]} C`, when `W` is `R(B)`-complementable.
    pub fn schur_value(&self) -> Result<Option<Mat>> {
        let s = self.range_b()?;
        if !is_complementable(&self.w, &s, &self.space)? {
            return Ok(None);
        }
        let schur = schur_complement(&self.w, &s, &self.space)?.schur;
        Ok(Some(self.adj(&self.c) * schur * &self.c))
    }
}

/// `F(X) = (BX - C)# W (BX - C)`.
pub fn eval_f(p: &WeightedProblem, x: &Mat) -> Result<Mat> {
    p.space.check_square(x)?;
    let r = &p.b * x - &p.c;
    Ok(p.adj(&r) * &p.w * r)
}

/// Minimal-norm solution of `B# W (B X - C) = 0`.
pub fn solve_normal(p: &WeightedProblem) -> Result<Mat> {
    let (n, rhs) = p.normal_parts();
    let hint = op_norm(&p.w) * op_norm(&p.b).powi(2);
    let pinv = RankPolicy::default().pinv(&n, hint)?;
    let x0 = pinv * &rhs;
    let residual = op_norm(&(&n * &x0 - &rhs));
    if residual > p.space.tol() * p.scale() {
        return Err(KreinError::NormalEquationUnsolvable { residual });
    }
    Ok(x0)
}

/// Sampling parameters for the Krein-order dominance certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { samples: 32, seed: 0x5eed }
    }
}

/// Outcome of checking `J (F(X) - F(X0)) >= 0` (or the reverse) on samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest relative eigenvalue seen (negative means a violation).
    pub worst: f64,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Relative smallest eigenvalue of `J (upper - lower)`.
fn order_gap(space: &KreinSpace, upper: &Mat, lower: &Mat) -> f64 {
    let sc = linalg::scale_of(upper).max(linalg::scale_of(lower));
    linalg::min_eigenvalue(&space.form_matrix(&(upper - lower))) / sc
}

/// Sample `i` around `around`; the radius cycles over four decades so both
/// first- and second-order behaviour is probed.
pub(crate) fn sample_operator(rng: &mut ChaCha8Rng, n: usize, around: &Mat, i: usize) -> Mat {
    let radius = (1.0 + op_norm(around)) * 10f64.powi(-((i % 4) as i32));
    around + linalg::random_matrix(rng, n, n) * linalg::c64(radius, 0.0)
}

/// Samples `X` and checks `J (F(X) - F(X0)) >= 0` (`maximize = false`) or
/// `J (F(X0) - F(X)) >= 0` (`maximize = true`).
pub fn certify_extremum(p: &WeightedProblem, x0: &Mat, maximize: bool, opts: CertificateOptions) -> Result<DominanceReport> {
    let f0 = eval_f(p, x0)?;
    let n = p.space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for i in 0..opts.samples {
        let x = sample_operator(&mut rng, n, x0, i);
        let f = eval_f(p, &x)?;
        let gap = if maximize { order_gap(&p.space, &f0, &f) } else { order_gap(&p.space, &f, &f0) };
        worst = worst.min(gap);
        if gap < -p.space.tol() {
            violations += 1;
        }
    }
    Ok(DominanceReport { samples: opts.samples, violations, worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImsSolution {
    pub x0: Mat,
    /// `F(X0)`.
    pub min_value: Mat,
    /// `C# W_{/[R(B)]} C`, present when `W` is `R(B)`-complementable.
    pub schur_value: Option<Mat>,
    pub normal_residual: f64,
    pub certificate: DominanceReport,
}

/// Indefinite minimum solution of `BX - C = 0` with weight `W`.
pub fn solve_ims(p: &WeightedProblem) -> Result<ImsSolution> {
    solve_ims_with(p, CertificateOptions::default())
}

pub fn solve_ims_with(p: &WeightedProblem, opts: CertificateOptions) -> Result<ImsSolution> {
    let s = p.range_b()?;
    if !is_w_nonnegative(&s, &p.w, &p.space) {
        return Err(KreinError::RangeNotNonnegative { min_eigenvalue: compressed_min_eigenvalue(&s, &p.w, &p.space) });
    }
    extremum(p, false, opts)
}

/// Mirror of [`solve_ims`]: maximum in the Krein order, for `W`-nonpositive `R(B)`.
pub fn solve_ims_max(p: &WeightedProblem) -> Result<ImsSolution> {
    solve_ims_max_with(p, CertificateOptions::default())
}

pub fn solve_ims_max_with(p: &WeightedProblem, opts: CertificateOptions) -> Result<ImsSolution> {
    let s = p.range_b()?;
    if !is_w_nonpositive(&s, &p.w, &p.space) {
        return Err(KreinError::RangeNotNonpositive { max_eigenvalue: compressed_max_eigenvalue(&s, &p.w, &p.space) });
    }
    extremum(p, true, opts)
}

fn extremum(p: &WeightedProblem, maximize: bool, opts: CertificateOptions) -> Result<ImsSolution> {
    let x0 = solve_normal(p)?;
    let normal_residual = p.normal_residual(&x0);
    let min_value = eval_f(p, &x0)?;
    let schur_value = p.schur_value()?;
    if let Some(sv) = &schur_value {
        let gap = op_norm(&(&min_value - sv));
        if gap > p.space.tol() * p.scale() {
            return Err(KreinError::InternalCertificateFailure(format!(
                "optimal value differs from C# W/[R(B)] C by {gap:.3e}"
            )));
        }
    }
    let certificate = certify_extremum(p, &x0, maximize, opts)?;
    if !certificate.passed() {
        return Err(KreinError::InternalCertificateFailure(format!(
            "Krein-order dominance failed on {} of {} samples (worst {:.3e})",
            certificate.violations, certificate.samples, certificate.worst
        )));
    }
    Ok(ImsSolution { x0, min_value, schur_value, normal_residual, certificate })
}

/// Weighted indefinite least squares solution of `Bz = y`: a minimizer of
/// `[W(Bz - y), Bz - y]`.
pub fn solve_wils_vector(p: &WeightedProblem, y: &Vector) -> Result<Vector> {
    p.space.check_vector(y)?;
    let s = p.range_b()?;
    if !is_w_nonnegative(&s, &p.w, &p.space) {
        return Err(KreinError::RangeNotNonnegative { min_eigenvalue: compressed_min_eigenvalue(&s, &p.w, &p.space) });
    }
    let (n, _) = p.normal_parts();
    let rhs = p.adj(&p.b) * &p.w * y;
    let hint = op_norm(&p.w) * op_norm(&p.b).powi(2);
    let z = RankPolicy::default().pinv(&n, hint)? * &rhs;
    let residual = (&n * &z - &rhs).norm();
    let scale = p.scale() * y.norm().max(1.0);
    if residual > p.space.tol() * scale {
        return Err(KreinError::NormalEquationUnsolvable { residual });
    }
    Ok(z)
}

/// `[W(Bz - y), Bz - y]`.
pub fn wils_objective(p: &WeightedProblem, z: &Vector, y: &Vector) -> f64 {
    let r = &p.b * z - y;
    r.dotc(&(p.space.j_ref() * &p.w * &r)).re
}

/// `B = B+ + B-` with `R(B+)` W-nonnegative, `R(B-)` W-nonpositive, the two
/// ranges orthogonal in the Hilbert space of `split.signature` and
/// W-orthogonal to each other.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitB {
    pub b_plus: Mat,
    pub b_minus: Mat,
    pub split: WSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitBCheck {
    pub sum: f64,
    pub plus_min_eigenvalue: f64,
    pub minus_max_eigenvalue: f64,
    /// `||R(B+)* G R(B-)||`.
    pub orthogonality: f64,
    /// `||B+# W B-||`.
    pub cross: f64,
}

impl SplitBCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.sum <= tol
            && self.plus_min_eigenvalue >= -tol
            && self.minus_max_eigenvalue <= tol
            && self.orthogonality <= tol
            && self.cross <= tol
    }
}

impl SplitB {
    pub fn check(&self, p: &WeightedProblem) -> SplitBCheck {
        let sp = &p.space;
        let g = self.split.signature.gram(sp);
        let plus = range_subspace(&self.b_plus).unwrap_or_else(|_| self.split.s_plus.clone());
        let minus = range_subspace(&self.b_minus).unwrap_or_else(|_| self.split.s_minus.clone());
        SplitBCheck {
            sum: op_norm(&(&p.b - &self.b_plus - &self.b_minus)),
            plus_min_eigenvalue: if plus.is_zero() { 0.0 } else { compressed_min_eigenvalue(&plus, &p.w, sp) },
            minus_max_eigenvalue: if minus.is_zero() { 0.0 } else { compressed_max_eigenvalue(&minus, &p.w, sp) },
            orthogonality: op_norm(&(plus.frame().adjoint() * g * minus.frame())),
            cross: op_norm(&(sp.adjoint_unchecked(&self.b_plus) * &p.w * &self.b_minus)),
        }
    }
}

/// `B+ = P+ B`, `B- = P- B` with `P±` the orthogonal projections (in the
/// Hilbert space of `signature`) onto the parts of a W-split of `R(B)`.
pub fn split_b(p: &WeightedProblem, signature: &SignatureOperator) -> Result<SplitB> {
    p.space.require_selfadjoint(&p.w)?;
    let s = p.range_b()?;
    let split = w_split(&s, &p.w, signature, &p.space)?;
    let g = signature.gram(&p.space);
    let b_plus = split.s_plus.projector_in(&g) * &p.b;
    let b_minus = split.s_minus.projector_in(&g) * &p.b;
    Ok(SplitB { b_plus, b_minus, split })
}

/// `F_J(X, Y) = (B+ X + B- Y - C)# W (B+ X + B- Y - C)`.
pub fn eval_fj(p: &WeightedProblem, split: &SplitB, x: &Mat, y: &Mat) -> Result<Mat> {
    p.space.check_square(x)?;
    p.space.check_square(y)?;
    let r = &split.b_plus * x + &split.b_minus * y - &p.c;
    Ok(p.adj(&r) * &p.w * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImmsSolution {
    pub z: Mat,
    pub z1: Mat,
    pub z2: Mat,
    /// `F(Z)`.
    pub minmax_value: Mat,
    /// `C# W_{/[R(B)]} C`, present when `W` is `R(B)`-complementable.
    pub schur_value: Option<Mat>,
}

/// Indefinite min-max solution; returns the canonical member `Z2 = 0`.
pub fn solve_imms(p: &WeightedProblem) -> Result<ImmsSolution> {
    let z1 = solve_normal(p).map_err(|e| match e {
        KreinError::NormalEquationUnsolvable { residual } => KreinError::MinMaxUnsolvable { residual },
        other => other,
    })?;
    let n = p.space.dim();
    let z2 = Mat::zeros(n, n);
    let minmax_value = eval_f(p, &z1)?;
    let schur_value = p.schur_value()?;
    if let Some(sv) = &schur_value {
        let gap = op_norm(&(&minmax_value - sv));
        if gap > p.space.tol() * p.scale() {
            return Err(KreinError::InternalCertificateFailure(format!(
                "min-max value differs from C# W/[R(B)] C by {gap:.3e}"
            )));
        }
    }
    Ok(ImmsSolution { z: z1.clone(), z1, z2, minmax_value, schur_value })
}

/// `(||B# W (B Z1 - C)||, ||(B Z2)# W B Z2||)`, the two residuals of the
/// min-max characterization.
pub fn imms_residuals(p: &WeightedProblem, z1: &Mat, z2: &Mat) -> (f64, f64) {
    let bz2 = &p.b * z2;
    (p.normal_residual(z1), op_norm(&(p.adj(&bz2) * &p.w * bz2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleReport {
    pub samples: usize,
    /// Samples where `J (F_J(X, Z) - F_J(Z, Z))` had a negative eigenvalue.
    pub min_side_failures: usize,
    /// Samples where `J (F_J(Z, Z) - F_J(Z, Y))` had a negative eigenvalue.
    pub max_side_failures: usize,
    pub worst_min_side: f64,
    pub worst_max_side: f64,
}

impl SaddleReport {
    pub fn passed(&self) -> bool {
        self.min_side_failures == 0 && self.max_side_failures == 0
    }
}

/// Samples `X`, `Y` and checks the operator-order saddle inequalities
/// `F_J(Z, Y) <= F_J(Z, Z) <= F_J(X, Z)`.
pub fn verify_saddle(p: &WeightedProblem, split: &SplitB, z: &Mat, n_samples: usize, seed: u64) -> Result<SaddleReport> {
    let n = p.space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fzz = eval_fj(p, split, z, z)?;
    let mut rep = SaddleReport {
        samples: n_samples,
        min_side_failures: 0,
        max_side_failures: 0,
        worst_min_side: f64::INFINITY,
        worst_max_side: f64::INFINITY,
    };
    let tol = p.space.tol();
    for i in 0..n_samples {
        let x = sample_operator(&mut rng, n, z, i);
        let y = sample_operator(&mut rng, n, z, i);
        let lo = order_gap(&p.space, &eval_fj(p, split, &x, z)?, &fzz);
        let hi = order_gap(&p.space, &fzz, &eval_fj(p, split, z, &y)?);
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

/// Optimal values of the two nested problems, computed along separate paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxValues {
    /// `max_Y min_X F_J(X, Y)`, attained at `(maxmin_x, maxmin_y)`.
    pub maxmin: Mat,
    pub maxmin_x: Mat,
    pub maxmin_y: Mat,
    /// `min_X max_Y F_J(X, Y)`, attained at `(minmax_x, minmax_y)`.
    pub minmax: Mat,
    pub minmax_x: Mat,
    pub minmax_y: Mat,
    /// `C# W_{/[R(B)]} C`.
    pub schur_value: Mat,
}

/// Evaluates max-min and min-max for a complementable instance.
///
/// Max-min: for fixed `Y` the inner minimum is `C'# W_{/[S+]} C'` with
/// `C' = C - B- Y`, so `Y` maximizes a problem with weight `W_{/[S+]}` and
/// the inner `X` is recovered from `C'`. Min-max is the mirror with `W_{/[S-]}`.
pub fn minmax_values(p: &WeightedProblem, split: &SplitB, opts: CertificateOptions) -> Result<MinMaxValues> {
    let schur_value = p.schur_value()?.ok_or(KreinError::NotComplementable)?;
    let sp = &p.space;
    let w_plus_short = schur_complement(&p.w, &split.split.s_plus, sp)?.schur;
    let w_minus_short = schur_complement(&p.w, &split.split.s_minus, sp)?.schur;

    let outer = WeightedProblem::new(w_plus_short, split.b_minus.clone(), p.c.clone(), sp.clone())?;
    let y = solve_ims_max_with(&outer, opts)?.x0;
    let inner = WeightedProblem::new(p.w.clone(), split.b_plus.clone(), &p.c - &split.b_minus * &y, sp.clone())?;
    let x = solve_ims_with(&inner, opts)?.x0;
    let maxmin = eval_fj(p, split, &x, &y)?;

    let outer = WeightedProblem::new(w_minus_short, split.b_plus.clone(), p.c.clone(), sp.clone())?;
    let x2 = solve_ims_with(&outer, opts)?.x0;
    let inner = WeightedProblem::new(p.w.clone(), split.b_minus.clone(), &p.c - &split.b_plus * &x2, sp.clone())?;
    let y2 = solve_ims_max_with(&inner, opts)?.x0;
    let minmax = eval_fj(p, split, &x2, &y2)?;

    Ok(MinMaxValues { maxmin, maxmin_x: x, maxmin_y: y, minmax, minmax_x: x2, minmax_y: y2, schur_value })
}
