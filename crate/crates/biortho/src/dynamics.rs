//! Closed-system time evolution generated by a non-Hermitian Hamiltonian
//! with real spectrum, unitary with respect to the physical inner product.
//!
//! The Hamiltonian is specified spectrally: a frame whose phi-columns are
//! its eigenstates and a list of real energies, `H = u diag(E) u^-1` with
//! `hbar = 1`. Coefficients then evolve by pure phases,
//! `c_n(t) = c_n(0) exp(-i E_n t)`, which conserves every physical inner
//! product even though the propagator fails conventional unitarity.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::frame::{BiorthogonalFrame, StateCoeffs};
use crate::linalg::ComplexMatrix;

/// A Hamiltonian with eigenbasis `{|phi_n>}` and real eigenvalues `{E_n}`,
/// in units with `hbar = 1`.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    frame: BiorthogonalFrame,
    energies: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(frame: BiorthogonalFrame, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != frame.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} energies for dimension {}",
                energies.len(),
                frame.dim()
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("energies must be finite and real".into()));
        }
        Ok(Self { frame, energies })
    }

    pub fn frame(&self) -> &BiorthogonalFrame {
        &self.frame
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `H = u diag(E) u^-1` in the reference basis; generally non-Hermitian.
    pub fn matrix(&self) -> ComplexMatrix {
        let phases: Vec<C64> = self.energies.iter().map(|&e| C64::new(e, 0.0)).collect();
        &(self.frame.u() * &ComplexMatrix::diagonal(&phases)) * &self.frame.u_inverse()
    }

    /// Evolution operator `U(t) = u diag(exp(-i E_n t)) u^-1`. It does not
    /// satisfy `U^dag U = 1` unless the frame is orthonormal, but it does
    /// satisfy `U^dag g U = g` for the frame metric.
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        if !t.is_finite() {
            return Err(Error::InvalidInput("time must be finite".into()));
        }
        let phases: Vec<C64> =
            self.energies.iter().map(|&e| C64::new(0.0, -e * t).exp()).collect();
        Ok(&(self.frame.u() * &ComplexMatrix::diagonal(&phases)) * &self.frame.u_inverse())
    }

    /// Evolve expansion coefficients by spectral phases.
    pub fn evolve(&self, s: &StateCoeffs, t: f64) -> Result<StateCoeffs> {
        if !t.is_finite() {
            return Err(Error::InvalidInput("time must be finite".into()));
        }
        if !self.frame.same_frame(s.frame()) {
            return Err(Error::FrameMismatch);
        }
        let coeffs: Vec<C64> = s
            .coeffs()
            .iter()
            .zip(self.energies.iter())
            .map(|(&c, &e)| c * C64::new(0.0, -e * t).exp())
            .collect();
        self.frame.state(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::observable::{observable_from_array, outcome_probabilities};
    use crate::testutil::{random_frame, random_hermitian, random_vector, sym_f64};
    use crate::two_level::{param_grid, two_level_frame, TwoLevelParams};
    use rand_chacha::ChaCha12Rng;
    use rand_core::SeedableRng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_energies(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n).map(|_| 3.0 * sym_f64(&mut rng)).collect()
    }

    #[test]
    fn hamiltonian_matrix_has_planted_eigenpairs() {
        let frame = random_frame(4, 11);
        let energies = vec![-1.5, -0.25, 0.5, 2.0];
        let h = HamiltonianSpec::new(frame.clone(), energies.clone()).unwrap();
        let m = h.matrix();
        for (k, &e) in energies.iter().enumerate() {
            let phi = frame.u().column(k);
            let lhs = m.mul_vec(&phi);
            let defect: f64 = lhs
                .iter()
                .zip(phi.iter())
                .map(|(a, b)| (a - b * c(e, 0.0)).norm())
                .fold(0.0, f64::max);
            assert!(defect < 1e-9, "column {k}: {defect:.3e}");
        }
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let frame = random_frame(3, 21);
        let h = HamiltonianSpec::new(frame, random_energies(3, 22)).unwrap();
        let u = h.propagator(0.0).unwrap();
        assert!((&u - &ComplexMatrix::identity(3)).max_norm() < 1e-12);
    }

    #[test]
    fn propagator_is_conventionally_unitary_in_orthonormal_frame() {
        let frame = crate::frame::BiorthogonalFrame::standard(3).unwrap();
        let h = HamiltonianSpec::new(frame, vec![0.3, -1.0, 2.5]).unwrap();
        let u = h.propagator(1.7).unwrap();
        let defect = (&(&u.adjoint() * &u) - &ComplexMatrix::identity(3)).max_norm();
        assert!(defect < 1e-10);
    }

    #[test]
    fn propagator_fails_dirac_unitarity_but_is_metric_unitary() {
        let p = TwoLevelParams::new(PI / 2.0, 0.0).unwrap();
        let frame = two_level_frame(&p).unwrap();
        let h = HamiltonianSpec::new(frame.clone(), vec![0.0, 1.0]).unwrap();
        let u = h.propagator(1.0).unwrap();
        let dirac_defect = (&(&u.adjoint() * &u) - &ComplexMatrix::identity(2)).max_norm();
        assert!(dirac_defect > 1e-3, "defect {dirac_defect:.3e}");
        let g = frame.metric().unwrap();
        let conserved = &(&u.adjoint() * g.matrix()) * &u;
        assert!((&conserved - g.matrix()).max_norm() <= 1e-10);
    }

    #[test]
    fn metric_unitarity_over_random_frames() {
        for seed in 0..8 {
            let n = 2 + (seed as usize % 5);
            let frame = random_frame(n, 3000 + seed);
            let g = match frame.metric() {
                Ok(g) => g,
                Err(_) => continue,
            };
            let h = HamiltonianSpec::new(frame, random_energies(n, 3100 + seed)).unwrap();
            for &t in &[0.1, 1.0, 5.0, 10.0] {
                let u = h.propagator(t).unwrap();
                let conserved = &(&u.adjoint() * g.matrix()) * &u;
                let defect = (&conserved - g.matrix()).max_norm();
                assert!(defect <= 1e-9 * g.matrix().max_norm().max(1.0), "{defect:.3e}");
            }
        }
    }

    #[test]
    fn propagator_matches_matrix_exponential_route() {
        // Spectral phases against matexp(-i H t): two independent paths.
        let frame = random_frame(3, 41);
        let h = HamiltonianSpec::new(frame, random_energies(3, 42)).unwrap();
        let t = 0.9;
        let spectral = h.propagator(t).unwrap();
        let generator = h.matrix().scale(c(0.0, -t));
        let exponential = linalg::matexp(&generator).unwrap();
        assert!((&spectral - &exponential).max_norm() <= 1e-9);
    }

    #[test]
    fn evolve_at_zero_is_identity_and_eigenstates_pick_up_phases() {
        let frame = random_frame(3, 51);
        let h = HamiltonianSpec::new(frame.clone(), vec![0.5, 1.5, -2.0]).unwrap();
        let s = frame.state(random_vector(3, 52)).unwrap();
        let same = h.evolve(&s, 0.0).unwrap();
        assert_eq!(same.coeffs(), s.coeffs());

        let eigenstate = frame.basis_state(1).unwrap();
        let t = 2.0;
        let evolved = h.evolve(&eigenstate, t).unwrap();
        let want = c(0.0, -1.5 * t).exp();
        assert!((evolved.coeffs()[1] - want).norm() < 1e-12);
        let norm0 = frame.physical_inner(&eigenstate, &eigenstate).unwrap();
        let norm1 = frame.physical_inner(&evolved, &evolved).unwrap();
        assert!((norm0 - norm1).norm() < 1e-12);
    }

    #[test]
    fn pairwise_physical_inner_products_are_constant() {
        let frame = random_frame(4, 61);
        let h = HamiltonianSpec::new(frame.clone(), random_energies(4, 62)).unwrap();
        let psi0 = frame.state(random_vector(4, 63)).unwrap();
        let phi0 = frame.state(random_vector(4, 64)).unwrap();
        let reference = frame.physical_inner(&phi0, &psi0).unwrap();
        let mut t = 0.0;
        while t <= 10.0 {
            let psi_t = h.evolve(&psi0, t).unwrap();
            let phi_t = h.evolve(&phi0, t).unwrap();
            let now = frame.physical_inner(&phi_t, &psi_t).unwrap();
            assert!((now - reference).norm() <= 1e-10, "t = {t}");
            t += 0.1;
        }
    }

    #[test]
    fn evolution_obeys_the_group_law() {
        let frame = random_frame(3, 71);
        let h = HamiltonianSpec::new(frame.clone(), random_energies(3, 72)).unwrap();
        let s = frame.state(random_vector(3, 73)).unwrap();
        let (t1, t2) = (0.7, 1.9);
        let two_step = h.evolve(&h.evolve(&s, t1).unwrap(), t2).unwrap();
        let one_step = h.evolve(&s, t1 + t2).unwrap();
        let defect: f64 = two_step
            .coeffs()
            .iter()
            .zip(one_step.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(defect <= 1e-10);
    }

    #[test]
    fn measurement_statistics_of_evolved_states_hide_the_frame() {
        // Fixed (E, c0, t, f): the outcome distribution of the evolved state
        // is the same number for every frame parameter value.
        let energies = vec![0.25, 1.75];
        let coeffs0 = random_vector(2, 81);
        let f = random_hermitian(2, 82);
        let t = 3.3;
        let mut reference: Option<Vec<f64>> = None;
        for p in param_grid(10, 10) {
            let frame = two_level_frame(&p).unwrap();
            let h = HamiltonianSpec::new(frame.clone(), energies.clone()).unwrap();
            let s0 = frame.state(coeffs0.clone()).unwrap();
            let st = h.evolve(&s0, t).unwrap();
            let obs = observable_from_array(&frame, f.clone()).unwrap();
            let (_, probs) = outcome_probabilities(&obs, &st).unwrap();
            match &reference {
                Some(r) => {
                    for (a, b) in probs.values().iter().zip(r.iter()) {
                        assert!((a - b).abs() <= 1e-10);
                    }
                }
                None => reference = Some(probs.values().to_vec()),
            }
        }
    }

    #[test]
    fn evolve_rejects_foreign_states() {
        let frame_a = random_frame(2, 91);
        let frame_b = random_frame(2, 92);
        let h = HamiltonianSpec::new(frame_a, vec![0.0, 1.0]).unwrap();
        let s = frame_b.basis_state(0).unwrap();
        assert!(matches!(h.evolve(&s, 1.0), Err(Error::FrameMismatch)));
    }
}
