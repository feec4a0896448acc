//! Krein-space primitives over coordinate space.
//!
//! A [`KreinSpace`] is `C^n` with the indefinite product
//! `[x, y] = <J_ref x, y>`, where `J_ref` is a Hermitian involution. Every
//! other fundamental decomposition is represented by a [`SignatureOperator`]
//! acting on the same coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KreinError, Result};
use crate::linalg::{self, c64, hermitian_part, identity, min_eigenvalue, op_norm, scale_of, Mat, Vector, C64};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KreinSpace {
    j_ref: Mat,
    tol: f64,
    n_plus: usize,
    n_minus: usize,
}

impl KreinSpace {
    pub fn new(j_ref: Mat) -> Result<Self> {
        Self::with_tol(j_ref, DEFAULT_TOL)
    }

    pub fn with_tol(j_ref: Mat, tol: f64) -> Result<Self> {
        let n = j_ref.nrows();
        if n == 0 || j_ref.ncols() != n {
            return Err(KreinError::InvalidSpace(format!(
                "reference signature must be a non-empty square matrix, got {}x{}",
                j_ref.nrows(),
                j_ref.ncols()
            )));
        }
        if !(tol >= 0.0) {
            return Err(KreinError::InvalidSpace(format!("tolerance must be nonnegative, got {tol}")));
        }
        let herm = op_norm(&(&j_ref - j_ref.adjoint()));
        if herm > tol.max(1e-12) * scale_of(&j_ref) {
            return Err(KreinError::InvalidSpace(format!("reference signature is not Hermitian (residual {herm:.3e})")));
        }
        let inv = op_norm(&(&j_ref * &j_ref - identity(n)));
        if inv > tol.max(1e-12) * scale_of(&j_ref) {
            return Err(KreinError::InvalidSpace(format!("reference signature is not an involution (residual {inv:.3e})")));
        }
        let (values, _) = linalg::hermitian_eigen(&j_ref);
        let n_plus = values.iter().filter(|&&v| (v - 1.0).abs() < 1e-6).count();
        let n_minus = values.iter().filter(|&&v| (v + 1.0).abs() < 1e-6).count();
        if n_plus + n_minus != n {
            return Err(KreinError::InvalidSpace("reference signature has eigenvalues other than +-1".into()));
        }
        Ok(KreinSpace { j_ref: hermitian_part(&j_ref), tol, n_plus, n_minus })
    }

    /// `diag(+1 x n_plus, -1 x n_minus)`.
    pub fn standard(n_plus: usize, n_minus: usize) -> Result<Self> {
        let mut d = vec![1.0; n_plus];
        d.extend(std::iter::repeat_n(-1.0, n_minus));
        Self::new(linalg::real_diag(&d))
    }

    pub fn dim(&self) -> usize {
        self.j_ref.nrows()
    }

    pub fn j_ref(&self) -> &Mat {
        &self.j_ref
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tolerance(&self, tol: f64) -> Self {
        KreinSpace { tol, ..self.clone() }
    }

    /// Signature counts `(n_plus, n_minus)`.
    pub fn signature(&self) -> (usize, usize) {
        (self.n_plus, self.n_minus)
    }

    /// The reference signature as a [`SignatureOperator`].
    pub fn reference_signature(&self) -> SignatureOperator {
        SignatureOperator { entries: self.j_ref.clone() }
    }

    pub fn check_square(&self, m: &Mat) -> Result<()> {
        let n = self.dim();
        if m.nrows() != n {
            return Err(KreinError::DimensionMismatch { expected: n, found: m.nrows() });
        }
        if m.ncols() != n {
            return Err(KreinError::DimensionMismatch { expected: n, found: m.ncols() });
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(KreinError::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    /// Krein adjoint `A# = J A* J`.
    pub fn adjoint(&self, a: &Mat) -> Result<Mat> {
        self.check_square(a)?;
        Ok(self.adjoint_unchecked(a))
    }

    pub(crate) fn adjoint_unchecked(&self, a: &Mat) -> Mat {
        &self.j_ref * a.adjoint() * &self.j_ref
    }

    /// `||J W - (J W)*||`, the distance from Krein-selfadjointness.
    pub fn selfadjoint_residual(&self, w: &Mat) -> Result<f64> {
        self.check_square(w)?;
        let jw = &self.j_ref * w;
        Ok(op_norm(&(&jw - jw.adjoint())))
    }

    pub fn is_selfadjoint(&self, w: &Mat) -> Result<bool> {
        Ok(self.selfadjoint_residual(w)? <= self.tol * op_norm(w).max(1.0))
    }

    pub(crate) fn require_selfadjoint(&self, w: &Mat) -> Result<()> {
        let residual = self.selfadjoint_residual(w)?;
        if residual > self.tol * scale_of(w) {
            return Err(KreinError::NotKreinSelfadjoint { residual });
        }
        Ok(())
    }

    /// Krein positivity: `J W` positive semidefinite.
    pub fn is_positive(&self, w: &Mat) -> Result<bool> {
        self.require_selfadjoint(w)?;
        let jw = &self.j_ref * w;
        Ok(min_eigenvalue(&jw) >= -self.tol * scale_of(w))
    }

    /// Indefinite product `[x, y] = <J x, y> = y* J x`.
    pub fn gram(&self, x: &Vector, y: &Vector) -> Result<C64> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        Ok(y.dotc(&(&self.j_ref * x)))
    }

    /// Hermitian matrix representing the form `x -> [W x, x]`, i.e. `J W`
    /// symmetrised.
    pub fn form_matrix(&self, w: &Mat) -> Mat {
        hermitian_part(&(&self.j_ref * w))
    }
}

/// A signature operator `J'` of the Krein space: a `[.,.]`-selfadjoint
/// involution whose associated form `<x, y>' = [J'x, y]` is positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureOperator {
    entries: Mat,
}

impl SignatureOperator {
    /// Validates `entries` against all signature-operator invariants.
    pub fn new(entries: Mat, space: &KreinSpace) -> Result<Self> {
        space.check_square(&entries).map_err(|_| {
            KreinError::NotASignature(format!("expected {0}x{0} matrix", space.dim()))
        })?;
        let scale = scale_of(&entries);
        let tol = space.tol().max(1e-12) * scale * scale;
        let n = space.dim();
        let inv = op_norm(&(&entries * &entries - identity(n)));
        if inv > tol {
            return Err(KreinError::NotASignature(format!("J'^2 != I (residual {inv:.3e})")));
        }
        let gram = space.j_ref() * &entries;
        let herm = op_norm(&(&gram - gram.adjoint()));
        if herm > tol {
            return Err(KreinError::NotASignature(format!("J_ref J' is not Hermitian (residual {herm:.3e})")));
        }
        let lmin = min_eigenvalue(&gram);
        if lmin <= space.tol() * scale {
            return Err(KreinError::NotASignature(format!(
                "J_ref J' is not positive definite (smallest eigenvalue {lmin:.3e})"
            )));
        }
        Ok(SignatureOperator { entries })
    }

    pub fn matrix(&self) -> &Mat {
        &self.entries
    }

    /// Gram matrix `G = J_ref J'` of the associated Hilbert inner product
    /// `<x, y>' = y* G x`.
    pub fn gram(&self, space: &KreinSpace) -> Mat {
        hermitian_part(&(space.j_ref() * &self.entries))
    }

    /// `(G^{1/2}, G^{-1/2})`. `x -> G^{1/2} x` is a unitary map from the
    /// associated Hilbert space onto coordinate space.
    pub fn metric_roots(&self, space: &KreinSpace) -> (Mat, Mat) {
        linalg::pd_sqrt_pair(&self.gram(space))
    }

    pub fn into_matrix(self) -> Mat {
        self.entries
    }
}

/// Seeded alternate signature operator `J' = V J_ref V^{-1}` with
/// `V = exp(K)`, `K = (H - H#)/2` for a random `H`. Then `V# V = I`.
pub fn random_signature_operator(space: &KreinSpace, seed: u64) -> SignatureOperator {
    random_signature_operator_scaled(space, seed, 0.6)
}

/// As [`random_signature_operator`] with the generator norm of `K` controlled
/// by `strength` (entries of `H` are uniform in `[-strength, strength]/sqrt(n)`).
pub fn random_signature_operator_scaled(space: &KreinSpace, seed: u64, strength: f64) -> SignatureOperator {
    let n = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = strength / (n as f64).sqrt();
    let h = Mat::from_fn(n, n, |_, _| {
        c64(s * (2.0 * rng.random::<f64>() - 1.0), s * (2.0 * rng.random::<f64>() - 1.0))
    });
    signature_from_generator(space, &h)
}

/// `J' = exp(K) J_ref exp(-K)` with `K = (H - H#)/2`.
pub fn signature_from_generator(space: &KreinSpace, h: &Mat) -> SignatureOperator {
    let k = (h - space.adjoint_unchecked(h)).scale(0.5);
    let v = k.clone().exp();
    let v_inv = (-k).exp();
    let entries = &v * space.j_ref() * &v_inv;
    SignatureOperator { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    fn j2() -> KreinSpace {
        KreinSpace::standard(1, 1).unwrap()
    }

    fn e(n: usize, i: usize) -> Vector {
        Vector::from_fn(n, |k, _| if k == i { c64(1.0, 0.0) } else { C64::default() })
    }

    #[test]
    fn adjoint_of_identity_and_reference() {
        let space = j2();
        assert_eq!(space.adjoint(&identity(2)).unwrap(), identity(2));
        assert_eq!(space.adjoint(space.j_ref()).unwrap(), *space.j_ref());
    }

    #[test]
    fn adjoint_of_rank_one_example_by_pairing() {
        let space = j2();
        let a = real_matrix(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let a_sharp = space.adjoint(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let lhs = space.gram(&(&a * e(2, j)), &e(2, i)).unwrap();
                let rhs = space.gram(&e(2, j), &(&a_sharp * e(2, i))).unwrap();
                assert!((lhs - rhs).norm() < 1e-15);
            }
        }
        assert!((a_sharp - real_matrix(&[&[1.0, 0.0], &[-1.0, 0.0]])).norm() < 1e-15);
    }

    #[test]
    fn selfadjointness_examples() {
        let space = j2();
        assert!(space.is_selfadjoint(&identity(2)).unwrap());
        assert!(space.is_selfadjoint(&real_matrix(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap());
        assert!(!space.is_selfadjoint(&real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap());
        assert!(matches!(space.is_selfadjoint(&identity(3)), Err(KreinError::DimensionMismatch { .. })));
    }

    #[test]
    fn positivity_examples() {
        let space = j2();
        assert!(space.is_positive(space.j_ref()).unwrap());
        assert!(!space.is_positive(&identity(2)).unwrap());
        assert!(space.is_positive(&linalg::real_diag(&[2.0, -3.0])).unwrap());
        let not_sa = real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(space.is_positive(&not_sa), Err(KreinError::NotKreinSelfadjoint { .. })));
    }

    #[test]
    fn gram_examples() {
        let space = j2();
        assert_eq!(space.gram(&e(2, 0), &e(2, 0)).unwrap(), c64(1.0, 0.0));
        assert_eq!(space.gram(&e(2, 1), &e(2, 1)).unwrap(), c64(-1.0, 0.0));
        let ones = Vector::from_element(2, c64(1.0, 0.0));
        assert_eq!(space.gram(&ones, &ones).unwrap(), C64::default());
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(KreinSpace::new(real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]])).is_err());
        assert!(KreinSpace::new(linalg::real_diag(&[1.0, 2.0])).is_err());
        assert!(KreinSpace::new(Mat::zeros(0, 0)).is_err());
    }

    #[test]
    fn random_signature_satisfies_invariants() {
        let space = KreinSpace::standard(2, 2).unwrap();
        for seed in 0..20 {
            let j = random_signature_operator(&space, seed);
            SignatureOperator::new(j.matrix().clone(), &space).unwrap();
            assert_eq!(j, random_signature_operator(&space, seed));
        }
    }

    #[test]
    fn zero_generator_gives_reference() {
        let space = j2();
        let j = signature_from_generator(&space, &Mat::zeros(2, 2));
        assert!((j.matrix() - space.j_ref()).norm() < 1e-15);
    }

    #[test]
    fn second_fundamental_decomposition_validates() {
        let space = j2();
        let jb = real_matrix(&[&[5.0, -4.0], &[4.0, -5.0]]).scale(1.0 / 3.0);
        // J_b fixes (2,1) and negates (1,2)
        let v1 = Vector::from_vec(vec![c64(2.0, 0.0), c64(1.0, 0.0)]);
        let v2 = Vector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]);
        assert!((&jb * &v1 - &v1).norm() < 1e-15);
        assert!((&jb * &v2 + &v2).norm() < 1e-15);
        SignatureOperator::new(jb, &space).unwrap();
        assert!(SignatureOperator::new(identity(2), &space).is_err());
    }
}
