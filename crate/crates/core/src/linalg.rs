//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `DMatrix<Complex64>`. Numerical rank decisions go
//! through [`RankPolicy`] so every subspace computation uses the same
//! threshold rule and the same ambiguity guard.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KreinError, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Relative factor of the default rank threshold `dim * sigma_max * 1e-12`.
pub const DEFAULT_RANK_REL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a complex matrix from real row-major rows.
/// Matrix with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_matrix<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| c64(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
}

pub fn random_vector<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| c64(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
}

pub fn real_matrix(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(r, c, |i, j| c64(rows[i][j], 0.0))
}

pub fn real_diag(values: &[f64]) -> Mat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { C64::default() })
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Tolerance scale `max(1, ||m||)`.
pub fn scale_of(m: &Mat) -> f64 {
    op_norm(m).max(1.0)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let fm = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let s = fm.singular_values().expect("SVD of a finite matrix converges");
    s.into_iter().collect()
}

pub fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part; `+inf` for empty matrices.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Largest eigenvalue of the Hermitian part; `-inf` for empty matrices.
pub fn max_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (values, vectors) = hermitian_eigen(m);
    let d = Mat::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c64(f(v), 0.0)),
    ));
    &vectors * d * vectors.adjoint()
}

/// Full SVD `m = U diag(sigma) V*` with square unitary `U` (rows x rows) and
/// `V` (cols x cols), singular values descending. Trailing columns span the
/// left/right null spaces.
pub fn svd_full(m: &Mat) -> (Vec<f64>, Mat, Mat) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (Vec::new(), identity(r), identity(c));
    }
    let fm = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = fm.svd().expect("SVD of a finite matrix converges");
    let s = svd.S().column_vector();
    let sigma = (0..r.min(c)).map(|i| s[i].re).collect();
    let (u, v) = (svd.U(), svd.V());
    (sigma, Mat::from_fn(r, r, |i, j| u[(i, j)]), Mat::from_fn(c, c, |i, j| v[(i, j)]))
}

/// Modified Gram-Schmidt that drops numerically dependent columns.
pub fn gram_schmidt(m: &Mat) -> Mat {
    let n = m.nrows();
    let mut cols: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: Vector = m.column(j).into_owned();
        let orig = v.norm();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * orig.max(1e-300) && nv > 0.0 {
            cols.push(v / c64(nv, 0.0));
        }
    }
    from_columns(n, &cols)
}

pub fn from_columns(rows: usize, cols: &[Vector]) -> Mat {
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Orthonormal basis of the coordinate orthogonal complement of the span of
/// an orthonormal frame, computed from the eigenvectors of `I - U U*`.
pub fn orth_complement(frame: &Mat, n: usize) -> Mat {
    let k = frame.ncols();
    if k == 0 {
        return identity(n);
    }
    if k >= n {
        return Mat::zeros(n, 0);
    }
    let proj = identity(n) - frame * frame.adjoint();
    let (_, vectors) = hermitian_eigen(&proj);
    // eigenvalues ascending: first k are ~0, remaining n-k are ~1
    vectors.columns(k, n - k).into_owned()
}

/// Numerical rank rule shared by every range/kernel computation:
/// singular values above `dim * max(sigma_max, scale_hint) * rel` count, and
/// a singular value within a factor `ambiguity` of the threshold is an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    pub rel: f64,
    pub ambiguity: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy { rel: DEFAULT_RANK_REL, ambiguity: 10.0 }
    }
}

impl RankPolicy {
    pub fn threshold(&self, dim: usize, sigma_max: f64, scale_hint: f64) -> f64 {
        dim.max(1) as f64 * sigma_max.max(scale_hint) * self.rel
    }

    /// Number of values above the threshold. Values are magnitudes.
    pub fn rank_of(&self, values: &[f64], threshold: f64) -> Result<usize> {
        let mut rank = 0;
        for &s in values {
            let s = s.abs();
            if threshold > 0.0 && s > threshold / self.ambiguity && s < threshold * self.ambiguity {
                return Err(KreinError::RankThresholdAmbiguous { sigma: s, threshold });
            }
            if s > threshold {
                rank += 1;
            }
        }
        Ok(rank)
    }

    /// Orthonormal frame of the column space of `m`.
    pub fn column_space(&self, m: &Mat, scale_hint: f64) -> Result<Mat> {
        let (r, c) = m.shape();
        if r == 0 || c == 0 {
            return Ok(Mat::zeros(r, 0));
        }
        let (sigma, u, _) = svd_full(m);
        let smax = sigma.first().copied().unwrap_or(0.0);
        let thr = self.threshold(r.max(c), smax, scale_hint);
        let rank = self.rank_of(&sigma, thr)?;
        Ok(u.columns(0, rank).into_owned())
    }

    /// Orthonormal frame of the kernel of `m`.
    pub fn null_space(&self, m: &Mat, scale_hint: f64) -> Result<Mat> {
        let (r, c) = m.shape();
        if c == 0 {
            return Ok(Mat::zeros(0, 0));
        }
        if r == 0 {
            return Ok(identity(c));
        }
        let (sigma, _, v) = svd_full(m);
        let smax = sigma.first().copied().unwrap_or(0.0);
        let thr = self.threshold(r.max(c), smax, scale_hint);
        let rank = self.rank_of(&sigma, thr)?;
        Ok(v.columns(rank, c - rank).into_owned())
    }

    /// Moore-Penrose pseudoinverse with the shared threshold rule.
    pub fn pinv(&self, m: &Mat, scale_hint: f64) -> Result<Mat> {
        let (r, c) = m.shape();
        if r == 0 || c == 0 {
            return Ok(Mat::zeros(c, r));
        }
        let (sigma, u, v) = svd_full(m);
        let smax = sigma.first().copied().unwrap_or(0.0);
        let thr = self.threshold(r.max(c), smax, scale_hint);
        let rank = self.rank_of(&sigma, thr)?;
        let mut out = Mat::zeros(c, r);
        for i in 0..rank {
            let vi = v.column(i);
            let ui = u.column(i);
            out += (vi * ui.adjoint()) * c64(1.0 / sigma[i], 0.0);
        }
        Ok(out)
    }

    /// Range and pseudoinverse data of a Hermitian matrix from one
    /// eigen-decomposition: returns (eigenvalues, eigenvectors, rank mask).
    pub fn hermitian_spectrum(&self, m: &Mat, scale_hint: f64) -> Result<(Vec<f64>, Mat, Vec<bool>)> {
        let (values, vectors) = hermitian_eigen(m);
        let lmax = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let thr = self.threshold(m.nrows(), lmax, scale_hint);
        self.rank_of(&values, thr)?;
        let mask = values.iter().map(|v| v.abs() > thr).collect();
        Ok((values, vectors, mask))
    }
}

/// Coordinate-orthogonal projection onto the span of an orthonormal frame.
pub fn frame_projection(frame: &Mat, n: usize) -> Mat {
    if frame.ncols() == 0 {
        return Mat::zeros(n, n);
    }
    frame * frame.adjoint()
}

/// Square root and inverse square root of a Hermitian positive definite matrix.
pub fn pd_sqrt_pair(m: &Mat) -> (Mat, Mat) {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let sq = Mat::from_diagonal(&DVector::from_iterator(n, values.iter().map(|v| c64(v.max(0.0).sqrt(), 0.0))));
    let isq = Mat::from_diagonal(&DVector::from_iterator(n, values.iter().map(|v| c64(1.0 / v.sqrt(), 0.0))));
    (&vectors * sq * vectors.adjoint(), &vectors * isq * vectors.adjoint())
}

pub fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b))
}
