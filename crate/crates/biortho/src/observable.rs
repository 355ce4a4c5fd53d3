//! Physical observables in a frame: expectation values, outcome
//! probabilities, seeded sampling, the reality condition, and the
//! similarity map to the Hermitian counterpart.
//!
//! An observable is specified by a coefficient array `f_nm` relative to a
//! frame, acting as `F = sum_nm f_nm |phi_n><chi_m|`, i.e. the matrix
//! `F = u f u^-1`. It is physical exactly when the array is Hermitian; the
//! operator itself generally is not. All statistics derived here depend
//! only on `(f, c)` and never on the frame, which the tests assert by
//! sweeping frames at fixed arrays.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::frame::{BiorthogonalFrame, MetricOp, StateCoeffs};
use crate::linalg::{self, ComplexMatrix};

/// Hermiticity defect above which a coefficient array stops being physical.
pub const PHYSICAL_TOL: f64 = 1e-12;

/// Relative gap under which eigenvalues are merged into one outcome.
pub const CLUSTER_REL_TOL: f64 = 1e-8;

/// The generator used for outcome sampling, fixed for reproducibility:
/// ChaCha12, seeded via `seed_from_u64`, with uniform doubles taken as
/// `(next_u64() >> 11) / 2^53`.
pub type SampleRng = rand_chacha::ChaCha12Rng;

/// A coefficient array `f_nm` expressed in a frame, with the cached
/// operator matrix `u f u^-1` in the reference basis.
#[derive(Clone, Debug)]
pub struct ObservableRep {
    frame: BiorthogonalFrame,
    f_array: ComplexMatrix,
    matrix_form: ComplexMatrix,
    herm_defect: f64,
}

impl ObservableRep {
    pub fn frame(&self) -> &BiorthogonalFrame {
        &self.frame
    }

    pub fn f_array(&self) -> &ComplexMatrix {
        &self.f_array
    }

    /// `F = u f u^-1` in the reference basis.
    pub fn matrix_form(&self) -> &ComplexMatrix {
        &self.matrix_form
    }

    /// Physical means the coefficient array is Hermitian, which is what
    /// makes every expectation value real.
    pub fn is_physical(&self) -> bool {
        self.herm_defect <= PHYSICAL_TOL
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.herm_defect
    }

    fn require_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::NotPhysical { defect: self.herm_defect })
        }
    }

    fn require_member(&self, s: &StateCoeffs) -> Result<()> {
        if self.frame.same_frame(s.frame()) {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

/// Wrap a coefficient array as an observable of `frame`.
pub fn observable_from_array(
    frame: &BiorthogonalFrame,
    f_array: ComplexMatrix,
) -> Result<ObservableRep> {
    let n = frame.dim();
    if f_array.rows() != n || f_array.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "array is {}x{}, frame dimension is {n}",
            f_array.rows(),
            f_array.cols()
        )));
    }
    if !f_array.is_finite() {
        return Err(Error::InvalidInput("coefficient array must be finite".into()));
    }
    let herm_defect = f_array.hermiticity_defect();
    let matrix_form = &(frame.u() * &f_array) * &frame.u_inverse();
    Ok(ObservableRep { frame: frame.clone(), f_array, matrix_form, herm_defect })
}

/// Expectation `<F> = sum_nm conj(c_n) c_m f_nm / sum_n |c_n|^2`, real for
/// physical observables; the imaginary residue is checked and discarded.
pub fn expectation(obs: &ObservableRep, s: &StateCoeffs) -> Result<f64> {
    obs.require_physical()?;
    obs.require_member(s)?;
    let c = s.coeffs();
    let raw = linalg::vdot(c, &obs.f_array.mul_vec(c)) / s.norm_sqr();
    let tol = 1e-10 * obs.f_array.fro_norm().max(1.0);
    if raw.im.abs() > tol {
        return Err(Error::ConvergenceFailure(format!(
            "imaginary residue {:.3e} in expectation of a physical observable",
            raw.im
        )));
    }
    Ok(raw.re)
}

/// Measurement outcomes of a physical observable: eigenvalue clusters and
/// their probabilities, each evaluated from the eigenstates of the operator
/// matrix and the associated-state pairing
/// `p_k = <~f_k|psi><~psi|f_k> / (<~psi|psi><~f_k|f_k>)`,
/// with clusters closer than [`CLUSTER_REL_TOL`] times the operator norm
/// merged so that statistics cannot depend on the arbitrary eigenvector
/// choice inside a degenerate subspace.
pub fn outcome_probabilities(
    obs: &ObservableRep,
    s: &StateCoeffs,
) -> Result<(Vec<f64>, ProbabilityVector)> {
    obs.require_physical()?;
    obs.require_member(s)?;
    let frame = &obs.frame;
    let sys = linalg::eig(&obs.matrix_form)?;
    let scale = obs.matrix_form.fro_norm().max(1.0);
    let clusters = cluster_indices(&sys.eigenvalues, CLUSTER_REL_TOL * scale, scale)?;

    let u_inv = frame.u_inverse();
    let psi = frame.u().mul_vec(s.coeffs());
    let psi_tilde = frame.v().mul_vec(s.coeffs());
    let state_pairing = linalg::vdot(&psi_tilde, &psi);

    let mut values = Vec::with_capacity(clusters.len());
    let mut probs = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let mut coeff_vecs: Vec<Vec<C64>> = cluster
            .iter()
            .map(|&k| u_inv.mul_vec(&sys.right_eigenvectors.column(k)))
            .collect();
        if coeff_vecs.len() > 1 {
            orthonormalize(&mut coeff_vecs)?;
        }
        let mut p = 0.0;
        for a in &coeff_vecs {
            let f_k = frame.u().mul_vec(a);
            let f_k_tilde = frame.v().mul_vec(a);
            let numerator = linalg::vdot(&f_k_tilde, &psi) * linalg::vdot(&psi_tilde, &f_k);
            let eigen_pairing = linalg::vdot(&f_k_tilde, &f_k);
            p += (numerator / (state_pairing * eigen_pairing)).re;
        }
        probs.push(p);
        let mean: f64 =
            cluster.iter().map(|&k| sys.eigenvalues[k].re).sum::<f64>() / cluster.len() as f64;
        values.push(mean);
    }
    Ok((values, ProbabilityVector::new(probs)?))
}

/// Multinomial outcome counts for `n_samples` single-shot measurements with
/// a seeded deterministic generator.
///
/// The sampling distribution is evaluated in the coefficient
/// representation: eigenvalues and weights of the Hermitian array `f` paired
/// with the state coefficients, `p_k = |<w_k|c>|^2 / <c|c>`. That
/// representation contains no frame data at all, so two observables sharing
/// one coefficient array and state produce bit-identical counts under the
/// same seed regardless of their frames. The tests pin its agreement with
/// [`outcome_probabilities`].
pub fn sample_outcomes(
    obs: &ObservableRep,
    s: &StateCoeffs,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let (values, _probs) = outcome_probabilities(obs, s)?;
    let (canon_values, canon) = coefficient_space_probabilities(obs, s)?;
    if canon_values.len() != values.len() {
        return Err(Error::ConvergenceFailure(
            "outcome clusters differ between the operator and array routes".into(),
        ));
    }

    use rand_core::{RngCore, SeedableRng};
    let mut rng = SampleRng::seed_from_u64(seed);
    let cumulative: Vec<f64> = canon
        .values()
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("at least one outcome");
    let mut counts = vec![0u64; canon.len()];
    for _ in 0..n_samples {
        let x = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * total;
        let idx = cumulative.iter().position(|&edge| x < edge).unwrap_or(canon.len() - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Outcome distribution from the Hermitian array and raw coefficients; no
/// frame quantity enters the arithmetic.
fn coefficient_space_probabilities(
    obs: &ObservableRep,
    s: &StateCoeffs,
) -> Result<(Vec<f64>, ProbabilityVector)> {
    let sys = linalg::eig(&obs.f_array)?;
    let scale = obs.f_array.fro_norm().max(1.0);
    let clusters = cluster_indices(&sys.eigenvalues, CLUSTER_REL_TOL * scale, scale)?;
    let c = s.coeffs();
    let norm_sqr = s.norm_sqr();
    let mut values = Vec::with_capacity(clusters.len());
    let mut probs = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let mut members: Vec<Vec<C64>> =
            cluster.iter().map(|&k| sys.right_eigenvectors.column(k)).collect();
        if members.len() > 1 {
            orthonormalize(&mut members)?;
        }
        let p: f64 = members
            .iter()
            .map(|w| linalg::vdot(w, c).norm_sqr() / (linalg::vnorm(w).powi(2) * norm_sqr))
            .sum();
        probs.push(p);
        let mean: f64 =
            cluster.iter().map(|&k| sys.eigenvalues[k].re).sum::<f64>() / cluster.len() as f64;
        values.push(mean);
    }
    Ok((values, ProbabilityVector::new(probs)?))
}

/// Group already-sorted eigenvalues into clusters separated by more than
/// `gap`. Physical observables must have a real spectrum; a large imaginary
/// part signals a non-diagonalizable or non-physical matrix.
fn cluster_indices(eigenvalues: &[C64], gap: f64, scale: f64) -> Result<Vec<Vec<usize>>> {
    let max_im = eigenvalues.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    if max_im > 1e-8 * scale {
        return Err(Error::DegenerateBasis(format!(
            "spectrum has imaginary part {max_im:.3e}; not a physical observable spectrum"
        )));
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, lambda) in eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(current) if (lambda.re - eigenvalues[*current.last().unwrap()].re).abs() < gap => {
                current.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }
    Ok(clusters)
}

/// Modified Gram-Schmidt with one re-orthogonalisation pass; fails when the
/// vectors do not span a subspace of full dimension.
fn orthonormalize(vectors: &mut [Vec<C64>]) -> Result<()> {
    for k in 0..vectors.len() {
        let original = linalg::vnorm(&vectors[k]);
        for _pass in 0..2 {
            for j in 0..k {
                let proj = linalg::vdot(&vectors[j], &vectors[k]);
                let vj = vectors[j].clone();
                for (x, y) in vectors[k].iter_mut().zip(vj.iter()) {
                    *x -= proj * y;
                }
            }
        }
        let remaining = linalg::vnorm(&vectors[k]);
        if remaining <= 1e-6 * original.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateBasis(
                "eigenvectors inside a degenerate cluster are numerically dependent".into(),
            ));
        }
        for x in vectors[k].iter_mut() {
            *x /= remaining;
        }
    }
    Ok(())
}

/// Outcome probabilities: entries clamped at `-1e-12` and summing to one
/// within `1e-10`.
#[derive(Clone, Debug)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        let mut p = raw;
        for x in p.iter_mut() {
            if !x.is_finite() {
                return Err(Error::ConvergenceFailure("non-finite probability".into()));
            }
            if *x < 0.0 {
                if *x < -1e-12 {
                    return Err(Error::ConvergenceFailure(format!(
                        "probability {x:.3e} below the clamping floor -1e-12"
                    )));
                }
                *x = 0.0;
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::ConvergenceFailure(format!(
                "probabilities sum to {sum} rather than 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Quasi-Hermiticity residual `||M^dag g - g M||_max`; the condition
/// `M^dag = g M g^-1` holds exactly when this vanishes. Returns the pass
/// flag at tolerance 1e-9 together with the residual.
pub fn reality_check(m: &ComplexMatrix, g: &MetricOp) -> Result<(bool, f64)> {
    if m.rows() != g.dim() || m.cols() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, metric dimension is {}",
            m.rows(),
            m.cols(),
            g.dim()
        )));
    }
    let residual = (&(&m.adjoint() * g.matrix()) - &(g.matrix() * m)).max_norm();
    Ok((residual <= 1e-9, residual))
}

/// The Hermitian counterpart `f = u^-1 F u` in the reference basis,
/// computed through an explicit inverse of `u` so it cross-checks the
/// cached coefficient array.
pub fn to_hermitian(obs: &ObservableRep) -> Result<ComplexMatrix> {
    let u = obs.frame.u();
    let u_inv = linalg::inverse(u)?;
    Ok(&(&u_inv * &obs.matrix_form) * u)
}
