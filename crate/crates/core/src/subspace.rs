//! Subspaces, projections and the W-geometry of a subspace: companions,
//! preimages, `S = S+ [+]_W S-` splits, complementability and W-symmetric
//! projections.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KreinError, Result};
use crate::krein::{KreinSpace, SignatureOperator};
use crate::linalg::{
    self, c64, frame_projection, gram_schmidt, hstack, identity, op_norm, orth_complement, scale_of, Mat,
    RankPolicy,
};

/// A subspace of coordinate space, stored as an orthonormal column frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: Mat,
}

impl Subspace {
    /// Wraps a frame, re-orthonormalising its columns. Dependent columns are
    /// dropped.
    pub fn from_frame(frame: Mat) -> Self {
        let n = frame.nrows();
        if frame.ncols() == 0 {
            return Subspace::zero(n);
        }
        Subspace { frame: gram_schmidt(&frame) }
    }

    /// Span of the columns of `m`, using the shared rank rule.
    pub fn span_of(m: &Mat) -> Result<Self> {
        range_subspace(m)
    }

    pub fn zero(n: usize) -> Self {
        Subspace { frame: Mat::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { frame: identity(n) }
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Coordinate-orthogonal projection onto the subspace.
    pub fn projector(&self) -> Mat {
        frame_projection(&self.frame, self.ambient_dim())
    }

    /// Orthogonal projection onto the subspace in the Hilbert space with
    /// Gram matrix `g`: `U (U* G U)^{-1} U* G`.
    pub fn projector_in(&self, g: &Mat) -> Mat {
        let n = self.ambient_dim();
        if self.is_zero() {
            return Mat::zeros(n, n);
        }
        let u = &self.frame;
        let inner = (u.adjoint() * g * u).try_inverse().expect("Gram matrix restricted to a frame is invertible");
        u * inner * u.adjoint() * g
    }

    /// Coordinate orthogonal complement `S^perp`.
    pub fn orthocomplement(&self) -> Subspace {
        Subspace { frame: orth_complement(&self.frame, self.ambient_dim()) }
    }

    /// Distance between the spans, `||P_S - P_T||`.
    pub fn distance(&self, other: &Subspace) -> f64 {
        op_norm(&(self.projector() - other.projector()))
    }

    /// `||(I - P_S) v||` for every column of `m`, as an operator norm.
    pub fn exclusion_residual(&self, m: &Mat) -> f64 {
        let n = self.ambient_dim();
        op_norm(&((identity(n) - self.projector()) * m))
    }

    pub fn contains_columns(&self, m: &Mat, tol: f64) -> bool {
        self.exclusion_residual(m) <= tol * op_norm(m).max(1.0)
    }
}

/// A matrix `Q` with `Q^2 = Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    entries: Mat,
}

impl ProjectionMatrix {
    pub fn new(entries: Mat, tol: f64) -> Result<Self> {
        let residual = op_norm(&(&entries * &entries - &entries));
        if residual > tol * scale_of(&entries) {
            return Err(KreinError::InternalCertificateFailure(format!(
                "matrix is not idempotent (residual {residual:.3e})"
            )));
        }
        Ok(ProjectionMatrix { entries })
    }

    pub fn matrix(&self) -> &Mat {
        &self.entries
    }

    pub fn into_matrix(self) -> Mat {
        self.entries
    }

    pub fn idempotency_residual(&self) -> f64 {
        op_norm(&(&self.entries * &self.entries - &self.entries))
    }
}

/// Projection onto `range` along `kernel`. The two subspaces must be
/// complementary.
pub fn projection_onto_along(range: &Subspace, kernel: &Subspace) -> Result<Mat> {
    let n = range.ambient_dim();
    if range.dim() + kernel.dim() != n {
        return Err(KreinError::DimensionMismatch { expected: n, found: range.dim() + kernel.dim() });
    }
    let basis = hstack(range.frame(), kernel.frame());
    let inv = basis.clone().try_inverse().ok_or(KreinError::NotComplementable)?;
    let k = range.dim();
    let mut sel = Mat::zeros(n, n);
    for i in 0..k {
        sel[(i, i)] = c64(1.0, 0.0);
    }
    Ok(basis * sel * inv)
}

/// A split `S = S+ [+]_W S-` computed in the Hilbert space of `signature`.
#[derive(Debug, Clone, PartialEq)]
pub struct WSplit {
    pub s_plus: Subspace,
    pub s_minus: Subspace,
    pub signature: SignatureOperator,
}

/// Residuals of the [`WSplit`] invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WSplitCheck {
    /// `||U+* G U-||` (orthogonality in the associated Hilbert space).
    pub orthogonality: f64,
    /// Smallest eigenvalue of the form `[W s, s]` on `S+` (should be >= 0).
    pub plus_min_eigenvalue: f64,
    /// Largest eigenvalue of the form on `S-` (should be <= 0).
    pub minus_max_eigenvalue: f64,
    /// `||U-* J W U+||`, i.e. `[W s+, s-]`.
    pub cross: f64,
}

impl WSplitCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.orthogonality <= tol
            && self.plus_min_eigenvalue >= -tol
            && self.minus_max_eigenvalue <= tol
            && self.cross <= tol
    }
}

impl WSplit {
    pub fn check(&self, w: &Mat, space: &KreinSpace) -> WSplitCheck {
        let jw = space.form_matrix(w);
        let g = self.signature.gram(space);
        let up = self.s_plus.frame();
        let um = self.s_minus.frame();
        WSplitCheck {
            orthogonality: op_norm(&(up.adjoint() * &g * um)),
            plus_min_eigenvalue: linalg::min_eigenvalue(&(up.adjoint() * &jw * up)).min(f64::INFINITY),
            minus_max_eigenvalue: linalg::max_eigenvalue(&(um.adjoint() * &jw * um)),
            cross: op_norm(&(um.adjoint() * &jw * up)),
        }
    }

    pub fn whole(&self) -> Subspace {
        Subspace::from_frame(hstack(self.s_plus.frame(), self.s_minus.frame()))
    }
}

/// Orthonormal frame of the numerical column space of `b`.
pub fn range_subspace(b: &Mat) -> Result<Subspace> {
    range_subspace_with(b, &RankPolicy::default())
}

pub fn range_subspace_with(b: &Mat, policy: &RankPolicy) -> Result<Subspace> {
    Ok(Subspace { frame: policy.column_space(b, 0.0)? })
}

/// `S^[perp] = J_ref (S^perp)`.
pub fn orthogonal_companion(s: &Subspace, space: &KreinSpace) -> Subspace {
    let comp = s.orthocomplement();
    Subspace { frame: space.j_ref() * comp.frame() }
}

/// `A^{-1}(T) = N((I - P_T) A)`.
pub fn preimage(a: &Mat, t: &Subspace) -> Result<Subspace> {
    preimage_with(a, t, &RankPolicy::default())
}

pub fn preimage_with(a: &Mat, t: &Subspace, policy: &RankPolicy) -> Result<Subspace> {
    let n = a.ncols();
    if t.ambient_dim() != a.nrows() {
        return Err(KreinError::DimensionMismatch { expected: a.nrows(), found: t.ambient_dim() });
    }
    let m = (identity(a.nrows()) - t.projector()) * a;
    let frame = policy.null_space(&m, op_norm(a))?;
    if frame.ncols() == 0 {
        return Ok(Subspace::zero(n));
    }
    Ok(Subspace { frame })
}

fn check_subspace(s: &Subspace, space: &KreinSpace) -> Result<()> {
    if s.ambient_dim() != space.dim() {
        return Err(KreinError::DimensionMismatch { expected: space.dim(), found: s.ambient_dim() });
    }
    Ok(())
}

/// Splits `S` into a W-nonnegative and a W-nonpositive part, orthogonal in
/// the Hilbert space of `signature` and W-orthogonal to each other. Zero
/// eigenvalues of the compressed form go to `S+`.
pub fn w_split(s: &Subspace, w: &Mat, signature: &SignatureOperator, space: &KreinSpace) -> Result<WSplit> {
    check_subspace(s, space)?;
    space.require_selfadjoint(w)?;
    let n = space.dim();
    if s.is_zero() {
        return Ok(WSplit { s_plus: Subspace::zero(n), s_minus: Subspace::zero(n), signature: signature.clone() });
    }
    let g = signature.gram(space);
    let u = s.frame();
    // G-orthonormal frame of S
    let (_, inv_sqrt) = linalg::pd_sqrt_pair(&(u.adjoint() * &g * u));
    let ug = u * inv_sqrt;
    // <J' W x, y>' = y* G J' W x = y* J_ref W x
    let compressed = ug.adjoint() * space.form_matrix(w) * &ug;
    let (values, vectors) = linalg::hermitian_eigen(&compressed);
    let cut = space.tol() * scale_of(w);
    let plus: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= -cut).collect();
    let minus: Vec<usize> = (0..values.len()).filter(|&i| values[i] < -cut).collect();
    let pick = |idx: &[usize]| -> Subspace {
        if idx.is_empty() {
            return Subspace::zero(n);
        }
        let cols = Mat::from_fn(vectors.nrows(), idx.len(), |r, c| vectors[(r, idx[c])]);
        Subspace::from_frame(&ug * cols)
    };
    Ok(WSplit { s_plus: pick(&plus), s_minus: pick(&minus), signature: signature.clone() })
}

/// Smallest eigenvalue of the compressed form `U* J W U` on `S`.
pub fn compressed_min_eigenvalue(s: &Subspace, w: &Mat, space: &KreinSpace) -> f64 {
    let u = s.frame();
    linalg::min_eigenvalue(&(u.adjoint() * space.form_matrix(w) * u))
}

pub fn compressed_max_eigenvalue(s: &Subspace, w: &Mat, space: &KreinSpace) -> f64 {
    let u = s.frame();
    linalg::max_eigenvalue(&(u.adjoint() * space.form_matrix(w) * u))
}

pub fn is_w_nonnegative(s: &Subspace, w: &Mat, space: &KreinSpace) -> bool {
    compressed_min_eigenvalue(s, w, space) >= -space.tol() * scale_of(w)
}

pub fn is_w_nonpositive(s: &Subspace, w: &Mat, space: &KreinSpace) -> bool {
    compressed_max_eigenvalue(s, w, space) <= space.tol() * scale_of(w)
}

/// `W^{-1}(S^[perp])`.
pub fn w_preimage_of_companion(w: &Mat, s: &Subspace, space: &KreinSpace) -> Result<Subspace> {
    preimage(w, &orthogonal_companion(s, space))
}

/// `H = S + W^{-1}(S^[perp])`, tested by the dimension of the sum.
pub fn is_complementable(w: &Mat, s: &Subspace, space: &KreinSpace) -> Result<bool> {
    space.check_square(w)?;
    check_subspace(s, space)?;
    space.require_selfadjoint(w)?;
    let m = w_preimage_of_companion(w, s, space)?;
    Ok(sum_dimension(s, &m)? == space.dim())
}

fn sum_dimension(a: &Subspace, b: &Subspace) -> Result<usize> {
    let joined = hstack(a.frame(), b.frame());
    if joined.ncols() == 0 {
        return Ok(0);
    }
    let sigma = linalg::singular_values(&joined);
    let policy = RankPolicy::default();
    let smax = sigma.iter().fold(0.0_f64, |m, &s| m.max(s));
    let thr = policy.threshold(joined.nrows().max(joined.ncols()), smax, 1.0);
    policy.rank_of(&sigma, thr)
}

/// W-symmetric projection onto `S` (`W Q = Q# W`), with kernel the
/// coordinate-orthogonal complement of `S ∩ W^{-1}(S^[perp])` inside
/// `W^{-1}(S^[perp])`.
pub fn symmetric_projection(w: &Mat, s: &Subspace, space: &KreinSpace) -> Result<ProjectionMatrix> {
    Ok(symmetric_projection_parts(w, s, space)?.0)
}

/// As [`symmetric_projection`], also returning the chosen kernel.
pub fn symmetric_projection_parts(w: &Mat, s: &Subspace, space: &KreinSpace) -> Result<(ProjectionMatrix, Subspace)> {
    space.check_square(w)?;
    check_subspace(s, space)?;
    space.require_selfadjoint(w)?;
    let n = space.dim();
    let m = w_preimage_of_companion(w, s, space)?;
    if sum_dimension(s, &m)? != n {
        return Err(KreinError::NotComplementable);
    }
    // S ∩ M inside M's coordinates: kernel of (I - P_S) M
    let mf = m.frame();
    let kernel = if m.is_zero() {
        Subspace::zero(n)
    } else {
        let inside = RankPolicy::default().null_space(&((identity(n) - s.projector()) * mf), 1.0)?;
        let comp = orth_complement(&inside, mf.ncols());
        if comp.ncols() == 0 {
            Subspace::zero(n)
        } else {
            Subspace::from_frame(mf * comp)
        }
    };
    let q = projection_onto_along(s, &kernel)?;
    Ok((ProjectionMatrix { entries: q }, kernel))
}

/// `||W Q - Q# W||`.
pub fn symmetry_residual(w: &Mat, q: &Mat, space: &KreinSpace) -> f64 {
    op_norm(&(w * q - space.adjoint_unchecked(q) * w))
}

/// A projection `E` with `N(E) = S` whose range is a seeded random complement.
pub fn projection_with_kernel(s: &Subspace, seed: u64) -> Result<ProjectionMatrix> {
    let n = s.ambient_dim();
    let k = s.dim();
    if k == n {
        return Ok(ProjectionMatrix { entries: Mat::zeros(n, n) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let r = linalg::random_matrix(&mut rng, n, n - k);
        let range = Subspace::from_frame(r);
        if range.dim() != n - k {
            continue;
        }
        let basis = hstack(range.frame(), s.frame());
        let sigma = linalg::singular_values(&basis);
        let smin = sigma.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        if smin < 1e-3 {
            continue;
        }
        let e = projection_onto_along(&range, s)?;
        return Ok(ProjectionMatrix { entries: e });
    }
    Err(KreinError::InternalCertificateFailure("could not sample a well-conditioned complement".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diag, real_matrix, Vector};

    fn j2() -> KreinSpace {
        KreinSpace::standard(1, 1).unwrap()
    }

    fn span(cols: &[&[f64]]) -> Subspace {
        let n = cols[0].len();
        Subspace::from_frame(Mat::from_fn(n, cols.len(), |i, j| c64(cols[j][i], 0.0)))
    }

    #[test]
    fn range_examples() {
        let s = range_subspace(&real_diag(&[1.0, 0.0])).unwrap();
        assert!(s.distance(&span(&[&[1.0, 0.0]])) < 1e-14);
        assert_eq!(range_subspace(&Mat::zeros(2, 2)).unwrap().dim(), 0);
        let s = range_subspace(&real_matrix(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.distance(&span(&[&[1.0, 1.0]])) < 1e-14);
    }

    #[test]
    fn companion_examples() {
        let space = j2();
        let c = orthogonal_companion(&span(&[&[1.0, 0.0]]), &space);
        assert!(c.distance(&span(&[&[0.0, 1.0]])) < 1e-14);
        assert_eq!(orthogonal_companion(&Subspace::zero(2), &space).dim(), 2);
        // neutral line: solve [h, (1,1)] = h1 - h2 = 0 directly
        let neutral = span(&[&[1.0, 1.0]]);
        let c = orthogonal_companion(&neutral, &space);
        let h = c.frame().column(0).into_owned();
        let v = Vector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
        assert!(space.gram(&h, &v).unwrap().norm() < 1e-14);
        assert!(c.distance(&neutral) < 1e-14);
    }

    #[test]
    fn preimage_examples() {
        let t = span(&[&[1.0, 0.0]]);
        assert!(preimage(&identity(2), &t).unwrap().distance(&t) < 1e-14);
        assert_eq!(preimage(&Mat::zeros(2, 2), &t).unwrap().dim(), 2);
        assert_eq!(preimage(&real_diag(&[1.0, 0.0]), &t).unwrap().dim(), 2);
    }

    #[test]
    fn split_examples() {
        let space = j2();
        let j = space.reference_signature();
        let sp = w_split(&Subspace::full(2), &identity(2), &j, &space).unwrap();
        assert!(sp.s_plus.distance(&span(&[&[1.0, 0.0]])) < 1e-14);
        assert!(sp.s_minus.distance(&span(&[&[0.0, 1.0]])) < 1e-14);

        let s = span(&[&[0.6, 0.8]]);
        let sp = w_split(&s, space.j_ref(), &j, &space).unwrap();
        assert!(sp.s_plus.distance(&s) < 1e-14);
        assert!(sp.s_minus.is_zero());

        let w = real_matrix(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e1 = span(&[&[1.0, 0.0]]);
        let sp = w_split(&e1, &w, &j, &space).unwrap();
        assert!(sp.s_plus.distance(&e1) < 1e-14);
        assert!(sp.s_minus.is_zero());
        assert!(sp.check(&w, &space).holds(1e-12));

        let not_sa = real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(w_split(&e1, &not_sa, &j, &space), Err(KreinError::NotKreinSelfadjoint { .. })));
    }

    #[test]
    fn complementability_examples() {
        let space = j2();
        let e1 = span(&[&[1.0, 0.0]]);
        assert!(is_complementable(space.j_ref(), &e1, &space).unwrap());
        let w = real_matrix(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        // W^{-1}(S^[perp]) = W^{-1}(span e2) = span e1, so the sum is span e1
        let m = w_preimage_of_companion(&w, &e1, &space).unwrap();
        assert!(m.distance(&e1) < 1e-14);
        assert!(!is_complementable(&w, &e1, &space).unwrap());
        assert!(is_complementable(&Mat::zeros(2, 2), &e1, &space).unwrap());
        assert!(matches!(symmetric_projection(&w, &e1, &space), Err(KreinError::NotComplementable)));
    }

    #[test]
    fn symmetric_projection_examples() {
        let space = j2();
        let e1 = span(&[&[1.0, 0.0]]);
        let q = symmetric_projection(space.j_ref(), &e1, &space).unwrap();
        assert!((q.matrix() - real_diag(&[1.0, 0.0])).norm() < 1e-14);
        let q = symmetric_projection(&identity(2), &Subspace::full(2), &space).unwrap();
        assert!((q.matrix() - identity(2)).norm() < 1e-14);

        let w = real_matrix(&[&[2.0, 1.0], &[-1.0, -3.0]]);
        let s = span(&[&[1.0, 2.0]]);
        let q = symmetric_projection(&w, &s, &space).unwrap();
        assert!(q.idempotency_residual() < 1e-12);
        assert!(symmetry_residual(&w, q.matrix(), &space) < 1e-12);
        assert!(range_subspace(q.matrix()).unwrap().distance(&s) < 1e-12);
    }

    #[test]
    fn projection_with_kernel_examples() {
        let e = projection_with_kernel(&Subspace::zero(3), 4).unwrap();
        assert!((e.matrix() - identity(3)).norm() < 1e-12);
        let s = span(&[&[1.0, 0.0, 0.0]]);
        let e = projection_with_kernel(&s, 11).unwrap();
        assert!(e.idempotency_residual() < 1e-12);
        assert!((e.matrix() * s.frame()).norm() < 1e-12);
        let orth = projection_onto_along(&s.orthocomplement(), &s).unwrap();
        assert!((orth - (identity(3) - s.projector())).norm() < 1e-12);
        assert!(projection_with_kernel(&Subspace::full(2), 0).unwrap().matrix().norm() == 0.0);
    }
}
