//! Tensor products of physical Hilbert spaces and the no-signalling
//! experiment: local evolution on one factor cannot move the other
//! factor's outcome statistics, whatever the local frame parameters are.
//!
//! Kronecker convention: factor A indexes the slow (outer) block, so the
//! joint coefficient of `(i, j)` sits at `i * N_B + j`.

use num_complex::Complex64 as C64;

use crate::dynamics::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::frame::{BiorthogonalFrame, StateCoeffs};
use crate::linalg::ComplexMatrix;
use crate::observable::{observable_from_array, outcome_probabilities, ProbabilityVector};

/// A joint frame `u = u_A (x) u_B`, `v = v_A (x) v_B`, carrying its factors.
#[derive(Clone, Debug)]
pub struct CompositeFrame {
    a: BiorthogonalFrame,
    b: BiorthogonalFrame,
    joint: BiorthogonalFrame,
}

/// Kronecker product of two frames. The joint pair inherits biorthogonality
/// from the factors; conditioning is re-checked because it multiplies.
pub fn tensor_frame(a: &BiorthogonalFrame, b: &BiorthogonalFrame) -> Result<CompositeFrame> {
    let u = a.u().kron(b.u());
    let v = a.v().kron(b.v());
    let joint = BiorthogonalFrame::from_u_v(u, v).map_err(|e| match e {
        Error::DegenerateBasis(msg) => Error::IllConditioned(msg),
        other => other,
    })?;
    Ok(CompositeFrame { a: a.clone(), b: b.clone(), joint })
}

impl CompositeFrame {
    pub fn factor_a(&self) -> &BiorthogonalFrame {
        &self.a
    }

    pub fn factor_b(&self) -> &BiorthogonalFrame {
        &self.b
    }

    pub fn joint(&self) -> &BiorthogonalFrame {
        &self.joint
    }

    pub fn dim_a(&self) -> usize {
        self.a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.b.dim()
    }

    /// Joint state from coefficients ordered with A as the slow index.
    pub fn state(&self, coeffs: Vec<C64>) -> Result<StateCoeffs> {
        self.joint.state(coeffs)
    }
}

/// Outcome statistics of `1 (x) F_B` on a joint state: eigenvalue clusters
/// of the B-side array (each N_A-fold degenerate in the joint spectrum) and
/// their probabilities.
pub fn marginal_statistics(
    cf: &CompositeFrame,
    c_joint: &StateCoeffs,
    obs_b_array: &ComplexMatrix,
) -> Result<(Vec<f64>, ProbabilityVector)> {
    if obs_b_array.rows() != cf.dim_b() || obs_b_array.cols() != cf.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "B-side array is {}x{}, factor dimension is {}",
            obs_b_array.rows(),
            obs_b_array.cols(),
            cf.dim_b()
        )));
    }
    let joint_array = ComplexMatrix::identity(cf.dim_a()).kron(obs_b_array);
    let obs = observable_from_array(cf.joint(), joint_array)?;
    outcome_probabilities(&obs, c_joint)
}

/// Evolve the joint state under `H_A (x) 1` over each requested time and
/// report the worst change of any B-outcome probability relative to `t = 0`.
///
/// No-signalling at work: the returned deviation is pure numerical noise
/// (at most 1e-9 across valid inputs), however entangled the state and
/// whatever `(xi, eta)`-type parameters enter frame A.
pub fn no_signalling_report(
    cf: &CompositeFrame,
    c_joint: &StateCoeffs,
    h_a: &HamiltonianSpec,
    obs_b_array: &ComplexMatrix,
    times: &[f64],
) -> Result<f64> {
    if !h_a.frame().same_frame(cf.factor_a()) {
        return Err(Error::FrameMismatch);
    }
    if !cf.joint().same_frame(c_joint.frame()) {
        return Err(Error::FrameMismatch);
    }
    let (base_values, base_probs) = marginal_statistics(cf, c_joint, obs_b_array)?;
    let mut max_deviation = 0.0f64;
    for &t in times {
        let evolved = evolve_joint_local_a(cf, c_joint, h_a, t)?;
        let (values, probs) = marginal_statistics(cf, &evolved, obs_b_array)?;
        if values.len() != base_values.len() {
            return Err(Error::ConvergenceFailure(
                "outcome clusters changed along the time sweep".into(),
            ));
        }
        for (p, p0) in probs.values().iter().zip(base_probs.values()) {
            max_deviation = max_deviation.max((p - p0).abs());
        }
    }
    Ok(max_deviation)
}

/// Spectral evolution of joint coefficients under `H_A (x) 1`:
/// `c_{ij}(t) = c_{ij}(0) exp(-i E^A_i t)`.
pub fn evolve_joint_local_a(
    cf: &CompositeFrame,
    c_joint: &StateCoeffs,
    h_a: &HamiltonianSpec,
    t: f64,
) -> Result<StateCoeffs> {
    if !h_a.frame().same_frame(cf.factor_a()) {
        return Err(Error::FrameMismatch);
    }
    if !cf.joint().same_frame(c_joint.frame()) {
        return Err(Error::FrameMismatch);
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput("time must be finite".into()));
    }
    let nb = cf.dim_b();
    let coeffs: Vec<C64> = c_joint
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &c)| c * C64::new(0.0, -h_a.energies()[idx / nb] * t).exp())
        .collect();
    cf.joint().state(coeffs)
}
