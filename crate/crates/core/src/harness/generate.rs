//! Seeded instances with controlled structure.
//!
//! Weights are `W = J_ref (M* D M)` with `D` diagonal (signs following the
//! inertia of `J_ref`, possibly with a zero) and `M` of bounded condition
//! number. In the coordinates `y = M x` the form `[W x, x]` is `y* D y`, so
//! subspaces with a prescribed sign pattern are spans of `M^{-1} y` for
//! suitably supported `y`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::KreinSpace;
use crate::linalg::{self, c64, Mat, Vector};
use crate::lsq::WeightedProblem;
use crate::schur::is_weakly_complementable;
use crate::subspace::{compressed_max_eigenvalue, compressed_min_eigenvalue, is_complementable, range_subspace, symmetric_projection, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Complementable,
    NonComplementable,
    RangeNonnegative,
    RangeNonpositive,
    RangeIndefinite,
    NeutralDirections,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::Complementable,
        Regime::NonComplementable,
        Regime::RangeNonnegative,
        Regime::RangeNonpositive,
        Regime::RangeIndefinite,
        Regime::NeutralDirections,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Complementable => "complementable",
            Regime::NonComplementable => "non_complementable",
            Regime::RangeNonnegative => "range_nonnegative",
            Regime::RangeNonpositive => "range_nonpositive",
            Regime::RangeIndefinite => "range_indefinite",
            Regime::NeutralDirections => "neutral_directions",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = KreinError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.name() == norm)
            .ok_or_else(|| KreinError::MalformedInput(format!("unknown regime '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dim: usize,
    pub seed: u64,
    pub regime: Regime,
    /// Bound on the condition number of `M* D M` restricted to its
    /// nondegenerate part. Complementable regimes also keep the W-symmetric
    /// projection onto `R(B)` within `conditioning^2` in norm.
    pub conditioning: f64,
    /// Number of negative squares of `J_ref`; `dim / 2` when absent.
    pub n_minus: Option<usize>,
    /// Conjugate `J_ref` by a random unitary instead of using a diagonal.
    pub rotate_reference: bool,
}

impl GeneratorSpec {
    pub fn new(dim: usize, seed: u64, regime: Regime) -> Self {
        GeneratorSpec { dim, seed, regime, conditioning: 10.0, n_minus: None, rotate_reference: false }
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        GeneratorSpec { regime, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self.clone() }
    }
}

/// Recorded regime certificate of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCertificate {
    pub complementable: bool,
    pub weakly_complementable: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Norm of the W-symmetric projection onto `R(B)`, when one exists.
    pub projection_norm: Option<f64>,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub spec: GeneratorSpec,
    pub problem: WeightedProblem,
    /// `R(B)`.
    pub subspace: Subspace,
    /// A vector of `R(B)` with `J W x = 0`, when the regime plants one.
    pub isotropic: Option<Vector>,
    /// A vector of `R(B)` with `[W x, x] = 0` but `J W x` not orthogonal to `R(B)`.
    pub neutral: Option<Vector>,
    pub certificate: RegimeCertificate,
}

/// SplitMix64 step, used to derive retry and per-instance seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    linalg::random_matrix(rng, n, n).qr().q()
}

fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = c64(1.0, 0.0);
    v
}

fn supported_on(rng: &mut ChaCha8Rng, n: usize, idx: &[usize]) -> Vector {
    let mut v = Vector::zeros(n);
    for &i in idx {
        v[i] = c64(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
    }
    v
}

/// `sqrt|d_q| e_p + sqrt|d_p| e_q`, neutral for `d_p > 0 > d_q`.
fn neutral_pair(n: usize, d: &[f64], p: usize, q: usize) -> Vector {
    unit(n, p) * c64(d[q].abs().sqrt(), 0.0) + unit(n, q) * c64(d[p].abs().sqrt(), 0.0)
}

struct Layout {
    pos: Vec<usize>,
    neg: Vec<usize>,
    zero: Option<usize>,
}

fn unsatisfiable(spec: &GeneratorSpec, why: &str) -> KreinError {
    KreinError::UnsatisfiableSpec(format!("{} with dim {}: {why}", spec.regime, spec.dim))
}

fn layout(spec: &GeneratorSpec, n_minus: usize, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let n = spec.dim;
    let n_plus = n - n_minus;
    let mut pos: Vec<usize> = (0..n_plus).collect();
    let mut neg: Vec<usize> = (n_plus..n).collect();
    let want_zero = match spec.regime {
        Regime::NeutralDirections => true,
        Regime::Complementable | Regime::RangeNonnegative | Regime::RangeNonpositive => n >= 3 && rng.random::<bool>(),
        _ => false,
    };
    let mut zero = None;
    if want_zero {
        if pos.len() >= 2 && pos.len() >= neg.len() {
            zero = pos.pop();
        } else if neg.len() >= 2 {
            zero = neg.pop();
        } else if spec.regime == Regime::NeutralDirections {
            return Err(unsatisfiable(spec, "needs one positive, one negative and one null direction"));
        }
    }
    // keep the regime satisfiable after removing the null direction
    if matches!(spec.regime, Regime::RangeNonnegative) && pos.is_empty()
        || matches!(spec.regime, Regime::RangeNonpositive) && neg.is_empty()
    {
        zero = None;
        pos = (0..n_plus).collect();
        neg = (n_plus..n).collect();
    }
    Ok(Layout { pos, neg, zero })
}

/// Spanning vectors of `M S` in the `D` coordinates, plus planted
/// isotropic and neutral vectors.
fn spanning_vectors(spec: &GeneratorSpec, lay: &Layout, d: &[f64], rng: &mut ChaCha8Rng) -> Result<(Vec<Vector>, Option<Vector>, Option<Vector>)> {
    let n = spec.dim;
    let mut ys = Vec::new();
    let mut iso = None;
    let mut neutral = None;
    match spec.regime {
        Regime::Complementable => {
            let k = rng.random_range(1..n.max(2));
            let all: Vec<usize> = (0..n).collect();
            for _ in 0..k {
                ys.push(supported_on(rng, n, &all));
            }
            if let Some(z) = lay.zero {
                ys[0] = unit(n, z);
                iso = Some(unit(n, z));
            }
        }
        Regime::NonComplementable => {
            if lay.pos.is_empty() || lay.neg.is_empty() {
                return Err(unsatisfiable(spec, "needs both positive and negative directions"));
            }
            let p = lay.pos[rng.random_range(0..lay.pos.len())];
            let q = lay.neg[rng.random_range(0..lay.neg.len())];
            let y = neutral_pair(n, d, p, q);
            neutral = Some(y.clone());
            ys.push(y);
            let rest: Vec<usize> = lay.pos.iter().copied().filter(|&i| i != p).collect();
            let extra = if rest.is_empty() { 0 } else { rng.random_range(0..=rest.len()) };
            for _ in 0..extra {
                ys.push(supported_on(rng, n, &rest));
            }
        }
        Regime::RangeNonnegative | Regime::RangeNonpositive => {
            let side = if spec.regime == Regime::RangeNonnegative { &lay.pos } else { &lay.neg };
            if side.is_empty() {
                return Err(unsatisfiable(spec, "the reference signature has no directions of the requested sign"));
            }
            let k = rng.random_range(1..=side.len());
            for _ in 0..k {
                ys.push(supported_on(rng, n, side));
            }
            if let Some(z) = lay.zero {
                if rng.random::<bool>() {
                    ys.push(unit(n, z));
                    iso = Some(unit(n, z));
                }
            }
        }
        Regime::RangeIndefinite => {
            if lay.pos.is_empty() || lay.neg.is_empty() {
                return Err(unsatisfiable(spec, "needs both positive and negative directions"));
            }
            let budget = (n - 1).max(2);
            let kp = rng.random_range(1..=lay.pos.len().min(budget - 1));
            let kn = rng.random_range(1..=lay.neg.len().min(budget - kp).max(1));
            for _ in 0..kp {
                ys.push(supported_on(rng, n, &lay.pos) + supported_on(rng, n, &lay.neg) * c64(0.3, 0.0));
            }
            for _ in 0..kn {
                ys.push(supported_on(rng, n, &lay.neg) + supported_on(rng, n, &lay.pos) * c64(0.3, 0.0));
            }
        }
        Regime::NeutralDirections => {
            let z = lay.zero.expect("layout plants a null direction");
            let p = lay.pos[rng.random_range(0..lay.pos.len())];
            let q = lay.neg[rng.random_range(0..lay.neg.len())];
            ys.push(unit(n, z));
            ys.push(unit(n, p));
            ys.push(unit(n, q));
            iso = Some(unit(n, z));
            neutral = Some(neutral_pair(n, d, p, q));
        }
    }
    Ok((ys, iso, neutral))
}

fn regime_holds(spec: &GeneratorSpec, cert: &RegimeCertificate, tol: f64) -> bool {
    let nonneg = cert.min_eigenvalue >= -tol;
    let nonpos = cert.max_eigenvalue <= tol;
    let bounded = cert.complementable
        && cert.projection_norm.is_some_and(|q| q <= spec.conditioning.max(1.0).powi(2));
    match spec.regime {
        Regime::Complementable => bounded,
        Regime::NonComplementable => !cert.complementable && !cert.weakly_complementable && nonneg,
        Regime::RangeNonnegative => bounded && nonneg,
        Regime::RangeNonpositive => bounded && nonpos,
        Regime::RangeIndefinite => bounded && !nonneg && !nonpos,
        Regime::NeutralDirections => bounded,
    }
}

fn attempt(spec: &GeneratorSpec, seed: u64) -> Result<GeneratedInstance> {
    let n = spec.dim;
    let n_minus = spec.n_minus.unwrap_or(n / 2);
    if n_minus > n {
        return Err(KreinError::UnsatisfiableSpec(format!("n_minus {n_minus} exceeds dim {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag: Vec<f64> = (0..n).map(|i| if i < n - n_minus { 1.0 } else { -1.0 }).collect();
    let j_ref = if spec.rotate_reference {
        let q = random_unitary(&mut rng, n);
        &q * linalg::real_diag(&diag) * q.adjoint()
    } else {
        linalg::real_diag(&diag)
    };
    let space = KreinSpace::new(j_ref)?;
    let lay = layout(spec, n_minus, &mut rng)?;

    let mut d = vec![0.0; n];
    for &i in &lay.pos {
        d[i] = 1.0 + rng.random::<f64>();
    }
    for &i in &lay.neg {
        d[i] = -(1.0 + rng.random::<f64>());
    }
    let half_log = 0.5 * spec.conditioning.max(1.0).ln();
    let sigma: Vec<f64> = (0..n).map(|_| (half_log * rng.random::<f64>()).exp() / 2f64.sqrt()).collect();
    let m = random_unitary(&mut rng, n) * linalg::real_diag(&sigma) * random_unitary(&mut rng, n);
    let m_inv = m.clone().try_inverse().expect("M has bounded condition number");
    let form = m.adjoint() * linalg::real_diag(&d) * &m;
    let w = space.j_ref() * linalg::hermitian_part(&form);

    let (ys, iso, neutral) = spanning_vectors(spec, &lay, &d, &mut rng)?;
    let frame = m_inv.clone() * linalg::from_columns(n, &ys);
    let s = Subspace::from_frame(frame);
    let coeffs = linalg::random_matrix(&mut rng, s.dim(), n);
    let b = s.frame() * coeffs;
    let c = linalg::random_matrix(&mut rng, n, n);
    let problem = WeightedProblem::new(w, b, c, space)?;
    let subspace = range_subspace(&problem.b)?;

    let sp = &problem.space;
    let complementable = is_complementable(&problem.w, &subspace, sp)?;
    let projection_norm = if complementable {
        symmetric_projection(&problem.w, &subspace, sp).ok().map(|q| linalg::op_norm(q.matrix()))
    } else {
        None
    };
    let certificate = RegimeCertificate {
        complementable,
        projection_norm,
        weakly_complementable: is_weakly_complementable(&problem.w, &subspace, sp)?,
        min_eigenvalue: if subspace.is_zero() { 0.0 } else { compressed_min_eigenvalue(&subspace, &problem.w, sp) },
        max_eigenvalue: if subspace.is_zero() { 0.0 } else { compressed_max_eigenvalue(&subspace, &problem.w, sp) },
        attempts: 0,
    };
    let to_x = |y: Option<Vector>| y.map(|y| &m_inv * y);
    Ok(GeneratedInstance {
        spec: spec.clone(),
        problem,
        subspace,
        isotropic: to_x(iso),
        neutral: to_x(neutral),
        certificate,
    })
}

/// Generates an instance of the requested regime, retrying with derived
/// seeds until its regime certificate holds.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<GeneratedInstance> {
    if spec.dim < 2 {
        return Err(KreinError::UnsatisfiableSpec(format!("dim {} is below the minimum of 2", spec.dim)));
    }
    const ATTEMPTS: usize = 32;
    let mut last = None;
    for a in 0..ATTEMPTS {
        let seed = if a == 0 { spec.seed } else { derive_seed(spec.seed, a as u64) };
        match attempt(spec, seed) {
            Ok(mut inst) => {
                let tol = inst.problem.space.tol() * linalg::scale_of(&inst.problem.w);
                inst.certificate.attempts = a + 1;
                if regime_holds(spec, &inst.certificate, tol) {
                    return Ok(inst);
                }
            }
            Err(KreinError::RankThresholdAmbiguous { sigma, threshold }) => {
                last = Some(KreinError::RankThresholdAmbiguous { sigma, threshold });
            }
            Err(e) => return Err(e),
        }
    }
    Err(KreinError::InternalCertificateFailure(format!(
        "no {} instance of dim {} after {ATTEMPTS} attempts{}",
        spec.regime,
        spec.dim,
        last.map(|e| format!(" (last error: {e})")).unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{is_w_nonnegative, is_w_nonpositive};

    #[test]
    fn regimes_certify() {
        for dim in 2..=6 {
            for regime in Regime::ALL {
                for seed in 0..4 {
                    let spec = GeneratorSpec { rotate_reference: seed % 2 == 1, ..GeneratorSpec::new(dim, seed, regime) };
                    match generate_instance(&spec) {
                        Ok(inst) => {
                            let tol = 1e-10 * linalg::scale_of(&inst.problem.w);
                            assert!(regime_holds(&spec, &inst.certificate, tol), "{regime} dim {dim} seed {seed}");
                        }
                        Err(KreinError::UnsatisfiableSpec(_)) => {
                            assert!(regime == Regime::NeutralDirections && dim < 3);
                        }
                        Err(e) => panic!("{regime} dim {dim} seed {seed}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn spec_examples() {
        let inst = generate_instance(&GeneratorSpec::new(4, 7, Regime::Complementable)).unwrap();
        assert!(is_complementable(&inst.problem.w, &inst.subspace, &inst.problem.space).unwrap());

        let inst = generate_instance(&GeneratorSpec::new(2, 1, Regime::NonComplementable)).unwrap();
        let sp = &inst.problem.space;
        assert!(!is_weakly_complementable(&inst.problem.w, &inst.subspace, sp).unwrap());
        let blocks = crate::schur::block_decompose(&inst.problem.w, &inst.subspace, &sp.reference_signature(), sp).unwrap();
        assert!(blocks.a.norm() < 1e-10 && blocks.b.norm() > 1e-3);

        let inst = generate_instance(&GeneratorSpec::new(5, 3, Regime::RangeNonnegative)).unwrap();
        assert!(is_w_nonnegative(&inst.subspace, &inst.problem.w, &inst.problem.space));
        let inst = generate_instance(&GeneratorSpec::new(5, 3, Regime::RangeNonpositive)).unwrap();
        assert!(is_w_nonpositive(&inst.subspace, &inst.problem.w, &inst.problem.space));

        let spec = GeneratorSpec { n_minus: Some(0), ..GeneratorSpec::new(3, 0, Regime::RangeNonpositive) };
        assert!(matches!(generate_instance(&spec), Err(KreinError::UnsatisfiableSpec(_))));
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = GeneratorSpec { rotate_reference: true, ..GeneratorSpec::new(5, 11, Regime::NeutralDirections) };
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        assert_eq!(a.problem, b.problem);
    }

    #[test]
    fn planted_vectors_behave() {
        let inst = generate_instance(&GeneratorSpec::new(5, 2, Regime::NeutralDirections)).unwrap();
        let sp = &inst.problem.space;
        let jw = sp.form_matrix(&inst.problem.w);
        let iso = inst.isotropic.unwrap();
        assert!((&jw * &iso).norm() < 1e-10);
        let neu = inst.neutral.unwrap();
        assert!(neu.dotc(&(&jw * &neu)).norm() < 1e-10);
        assert!((inst.subspace.projector() * &neu - &neu).norm() < 1e-10);
    }
}
