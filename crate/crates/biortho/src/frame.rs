//! Biorthogonal frames, states expanded in them, the physical inner
//! product, the metric operator, and the Petermann factor.
//!
//! A frame is a pair of bases `{|phi_n>}, {|chi_n>}` of an N-dimensional
//! space with `<chi_n|phi_m> = delta_nm`. Neither set needs to be
//! orthogonal by itself. The operator `u` maps the reference orthonormal
//! basis onto the phi-columns and `v` onto the chi-columns, with
//! `v^dag u = 1` fixing the normalisation. The reference basis is the
//! standard computational basis, fixed once globally.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, CONDITION_CAP};

/// Largest frame dimension the toolkit accepts.
pub const MAX_DIM: usize = 16;

/// Entrywise tolerance on `v^dag u - 1` for a frame to be accepted.
pub const BIORTHO_TOL: f64 = 1e-10;

#[derive(Debug)]
struct FrameData {
    n: usize,
    u: ComplexMatrix,
    v: ComplexMatrix,
}

/// The paired bases, stored through the column maps `u` (phi) and `v` (chi).
///
/// Cloning is cheap; clones refer to the same immutable data and are safe
/// to share across threads.
#[derive(Clone, Debug)]
pub struct BiorthogonalFrame {
    inner: Arc<FrameData>,
}

impl BiorthogonalFrame {
    /// The self-biorthogonal standard basis: `u = v = 1`.
    pub fn standard(n: usize) -> Result<Self> {
        check_dim(n)?;
        let id = ComplexMatrix::identity(n);
        Ok(Self { inner: Arc::new(FrameData { n, u: id.clone(), v: id }) })
    }

    /// Build a frame from the phi-vectors alone; the biorthogonal partner
    /// is `v = (u^dag)^-1`, which makes `<chi_n|phi_m> = delta_nm` hold by
    /// construction.
    pub fn from_basis(phis: &[Vec<C64>]) -> Result<Self> {
        let n = phis.len();
        check_dim(n)?;
        if phis.iter().any(|p| p.len() != n) {
            return Err(Error::DimensionMismatch(format!("need {n} vectors of length {n}")));
        }
        let mut u = ComplexMatrix::zeros(n, n);
        for (j, phi) in phis.iter().enumerate() {
            u.set_column(j, phi);
        }
        if !u.is_finite() {
            return Err(Error::InvalidInput("basis vectors must be finite".into()));
        }
        let v = linalg::inverse(&u.adjoint()).map_err(|e| match e {
            Error::Singular(msg) => Error::DegenerateBasis(msg),
            other => other,
        })?;
        Self::from_u_v(u, v)
    }

    /// Build a frame from explicit `u` and `v`, re-validating the
    /// biorthogonality and conditioning invariants.
    pub fn from_u_v(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        if !u.is_square() || !v.is_square() || u.rows() != v.rows() {
            return Err(Error::DimensionMismatch(format!(
                "u is {}x{}, v is {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        let n = u.rows();
        check_dim(n)?;
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidInput("frame matrices must be finite".into()));
        }
        let gram_defect = (&(&v.adjoint() * &u) - &ComplexMatrix::identity(n)).max_norm();
        if gram_defect > BIORTHO_TOL {
            return Err(Error::DegenerateBasis(format!(
                "biorthogonality defect {gram_defect:.3e} exceeds {BIORTHO_TOL:.1e}"
            )));
        }
        // v^dag is the inverse of u, so the condition estimate is direct.
        let cond = u.one_norm() * v.adjoint().one_norm();
        if !cond.is_finite() || cond >= CONDITION_CAP {
            return Err(Error::DegenerateBasis(format!(
                "condition estimate {cond:.3e} exceeds cap {CONDITION_CAP:.1e}"
            )));
        }
        Ok(Self { inner: Arc::new(FrameData { n, u, v }) })
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    /// Column map of the phi-basis in the reference basis.
    pub fn u(&self) -> &ComplexMatrix {
        &self.inner.u
    }

    /// Column map of the chi-basis in the reference basis.
    pub fn v(&self) -> &ComplexMatrix {
        &self.inner.v
    }

    /// `u^-1`, realised as `v^dag`.
    pub fn u_inverse(&self) -> ComplexMatrix {
        self.inner.v.adjoint()
    }

    pub fn same_frame(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n
                && self.inner.u == other.inner.u
                && self.inner.v == other.inner.v)
    }

    /// Wrap expansion coefficients as a state in this frame.
    pub fn state(&self, coeffs: Vec<C64>) -> Result<StateCoeffs> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for dimension {}",
                coeffs.len(),
                self.dim()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state coefficients must be finite".into()));
        }
        if coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() <= 0.0 {
            return Err(Error::InvalidInput("state must be nonzero".into()));
        }
        Ok(StateCoeffs { frame: self.clone(), c: coeffs })
    }

    /// The k-th phi-basis state, coefficients `delta_nk`.
    pub fn basis_state(&self, k: usize) -> Result<StateCoeffs> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange { index: k, dim: self.dim() });
        }
        let mut c = vec![C64::new(0.0, 0.0); self.dim()];
        c[k] = C64::new(1.0, 0.0);
        self.state(c)
    }

    /// `|psi> = sum_n c_n |phi_n>` in the reference basis.
    pub fn to_reference(&self, s: &StateCoeffs) -> Result<Vec<C64>> {
        self.check_member(s)?;
        Ok(self.inner.u.mul_vec(&s.c))
    }

    /// The associated state `|~psi> = sum_n c_n |chi_n>` in the reference
    /// basis.
    pub fn associated_state(&self, s: &StateCoeffs) -> Result<Vec<C64>> {
        self.check_member(s)?;
        Ok(self.inner.v.mul_vec(&s.c))
    }

    /// Physical inner product `<~d|c> = sum_n conj(d_n) c_n`.
    pub fn physical_inner(&self, d: &StateCoeffs, c: &StateCoeffs) -> Result<C64> {
        self.check_member(d)?;
        self.check_member(c)?;
        Ok(linalg::vdot(&d.c, &c.c))
    }

    /// The metric operator `g = (u u^dag)^-1`, positive Hermitian, mapping
    /// phi-columns to chi-columns.
    pub fn metric(&self) -> Result<MetricOp> {
        let uud = &self.inner.u * &self.inner.u.adjoint();
        let raw = linalg::inverse(&uud)?;
        let defect = raw.hermiticity_defect();
        if defect > 1e-12 * raw.max_norm().max(1.0) {
            return Err(Error::Singular(format!(
                "metric Hermiticity defect {defect:.3e} beyond tolerance"
            )));
        }
        // Exact symmetrisation so the spectral checks below see a Hermitian
        // matrix.
        let n = self.dim();
        let g = ComplexMatrix::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        let eigs = linalg::eig(&g)?;
        if eigs.eigenvalues.iter().any(|l| l.re <= 0.0) {
            return Err(Error::Singular("metric has a non-positive eigenvalue".into()));
        }
        let residual = (&(&g * &uud) - &ComplexMatrix::identity(n)).max_norm();
        if residual > 1e-9 {
            return Err(Error::Singular(format!(
                "metric residual {residual:.3e} exceeds 1e-9"
            )));
        }
        Ok(MetricOp { g })
    }

    /// Petermann factor `K_n = <chi_n|chi_n><phi_n|phi_n> / |<chi_n|phi_n>|^2`
    /// of the n-th basis pair (0-based). Equals 1 exactly when the n-th
    /// phi-column is orthogonal to all others.
    pub fn petermann(&self, n: usize) -> Result<f64> {
        if n >= self.dim() {
            return Err(Error::IndexOutOfRange { index: n, dim: self.dim() });
        }
        let phi = self.inner.u.column(n);
        let chi = self.inner.v.column(n);
        let overlap = linalg::vdot(&chi, &phi).norm_sqr();
        Ok(linalg::vnorm(&chi).powi(2) * linalg::vnorm(&phi).powi(2) / overlap)
    }

    fn check_member(&self, s: &StateCoeffs) -> Result<()> {
        if self.same_frame(&s.frame) {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    /// Serialize as `{"n": N, "u": [[re,im],...], "v": [[re,im],...]}` with
    /// both matrices flattened row-major.
    pub fn to_json_string(&self) -> String {
        let doc = FrameJson {
            n: self.inner.n,
            u: matrix_to_pairs(&self.inner.u),
            v: Some(matrix_to_pairs(&self.inner.v)),
        };
        serde_json::to_string(&doc).expect("frame serialization cannot fail")
    }

    /// Load a frame, re-validating all invariants; `v` is recomputed as
    /// `(u^dag)^-1` when absent.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: FrameJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("frame JSON: {e}")))?;
        check_dim(doc.n)?;
        let u = pairs_to_matrix(doc.n, &doc.u, "u")?;
        match doc.v {
            Some(pairs) => Self::from_u_v(u, pairs_to_matrix(doc.n, &pairs, "v")?),
            None => {
                let phis: Vec<Vec<C64>> = (0..doc.n).map(|j| u.column(j)).collect();
                Self::from_basis(&phis)
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionMismatch(format!(
            "dimension {n} outside supported range 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    n: usize,
    u: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<Vec<[f64; 2]>>,
}

pub(crate) fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn pairs_to_matrix(n: usize, pairs: &[[f64; 2]], what: &str) -> Result<ComplexMatrix> {
    if pairs.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} entries, expected {}",
            pairs.len(),
            n * n
        )));
    }
    if pairs.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let p = pairs[i * n + j];
        C64::new(p[0], p[1])
    }))
}

/// Expansion coefficients of a state in a particular frame.
#[derive(Clone, Debug)]
pub struct StateCoeffs {
    frame: BiorthogonalFrame,
    c: Vec<C64>,
}

impl StateCoeffs {
    pub fn frame(&self) -> &BiorthogonalFrame {
        &self.frame
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    /// `sum_n |c_n|^2`, the squared physical norm.
    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// The positive Hermitian quadratic form `g = (u u^dag)^-1` defining the
/// physical inner product on the reference Hilbert space.
#[derive(Clone, Debug)]
pub struct MetricOp {
    g: ComplexMatrix,
}

impl MetricOp {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_frame, random_matrix, random_vector};
    use crate::two_level::{two_level_frame, TwoLevelParams};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn standard_basis_is_self_biorthogonal() {
        let f = BiorthogonalFrame::standard(3).unwrap();
        assert!(f.u() == &ComplexMatrix::identity(3));
        assert!(f.v() == &ComplexMatrix::identity(3));
    }

    #[test]
    fn from_basis_standard_columns_gives_identity_partner() {
        let phis = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let f = BiorthogonalFrame::from_basis(&phis).unwrap();
        assert!((f.v() - &ComplexMatrix::identity(2)).max_norm() < 1e-14);
    }

    #[test]
    fn from_basis_matches_explicit_two_level_partner() {
        // v from (u^dag)^-1 must match the closed-form chi columns.
        let p = TwoLevelParams::new(PI / 2.0, 0.7).unwrap();
        let reference = two_level_frame(&p).unwrap();
        let phis: Vec<Vec<C64>> = (0..2).map(|j| reference.u().column(j)).collect();
        let rebuilt = BiorthogonalFrame::from_basis(&phis).unwrap();
        assert!((rebuilt.v() - reference.v()).max_norm() < 1e-10);
    }

    #[test]
    fn from_basis_gram_matrix_is_identity() {
        // Independent Gram check: raw inner products <chi_n|phi_m>.
        let f = random_frame(3, 21);
        for n in 0..3 {
            let chi = f.v().column(n);
            for m in 0..3 {
                let phi = f.u().column(m);
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((linalg::vdot(&chi, &phi) - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn from_basis_preserves_columns_bit_exactly() {
        let m = random_matrix(4, 3);
        let phis: Vec<Vec<C64>> = (0..4).map(|j| m.column(j)).collect();
        let f = BiorthogonalFrame::from_basis(&phis).unwrap();
        for (j, phi) in phis.iter().enumerate() {
            assert_eq!(&f.u().column(j), phi);
        }
    }

    #[test]
    fn from_basis_rejects_dependent_columns() {
        let phis = vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ];
        assert!(matches!(
            BiorthogonalFrame::from_basis(&phis),
            Err(Error::DegenerateBasis(_))
        ));
    }

    #[test]
    fn associated_state_in_orthonormal_frame_is_identity_map() {
        let f = BiorthogonalFrame::standard(3).unwrap();
        let s = f.state(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.0, 1.0)]).unwrap();
        let tilde = f.associated_state(&s).unwrap();
        assert_eq!(tilde, s.coeffs().to_vec());
    }

    #[test]
    fn associated_state_two_level_matches_chi_column() {
        let p = TwoLevelParams::new(PI / 2.0, 0.0).unwrap();
        let f = two_level_frame(&p).unwrap();
        let s = f.state(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let tilde = f.associated_state(&s).unwrap();
        // Explicit chi_1 column evaluated from the closed form.
        let norm = 1.0 / (2.0 * (PI / 4.0).sin()).sqrt();
        let chi1 = [
            c(norm * ((PI / 8.0).cos() + (PI / 8.0).sin()), 0.0),
            c(-norm * ((PI / 8.0).cos() - (PI / 8.0).sin()), 0.0),
        ];
        for (got, want) in tilde.iter().zip(chi1.iter()) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn associated_state_pairs_to_conjugate_coefficients() {
        // <~psi|phi_m> = conj(c_m) for any frame.
        let f = random_frame(4, 8);
        let s = f.state(random_vector(4, 9)).unwrap();
        let tilde = f.associated_state(&s).unwrap();
        for m in 0..4 {
            let phi = f.u().column(m);
            let got = linalg::vdot(&tilde, &phi);
            assert!((got - s.coeffs()[m].conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn physical_inner_normalisation_and_orthogonality() {
        let f = random_frame(2, 15);
        let e1 = f.basis_state(0).unwrap();
        let e2 = f.basis_state(1).unwrap();
        assert!((f.physical_inner(&e1, &e1).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f.physical_inner(&e1, &e2).unwrap().norm() < 1e-15);
    }

    #[test]
    fn physical_inner_agrees_with_associated_state_route() {
        let f = random_frame(5, 33);
        let d = f.state(random_vector(5, 34)).unwrap();
        let s = f.state(random_vector(5, 35)).unwrap();
        let fast = f.physical_inner(&d, &s).unwrap();
        let tilde = f.associated_state(&d).unwrap();
        let psi = f.to_reference(&s).unwrap();
        let slow = linalg::vdot(&tilde, &psi);
        assert!((fast - slow).norm() < 1e-12);
    }

    #[test]
    fn physical_inner_rejects_foreign_states() {
        let f1 = random_frame(2, 1);
        let f2 = random_frame(2, 2);
        let a = f1.basis_state(0).unwrap();
        let b = f2.basis_state(0).unwrap();
        assert!(matches!(f1.physical_inner(&a, &b), Err(Error::FrameMismatch)));
    }

    #[test]
    fn metric_of_orthonormal_frame_is_identity() {
        let f = BiorthogonalFrame::standard(4).unwrap();
        let g = f.metric().unwrap();
        assert!((g.matrix() - &ComplexMatrix::identity(4)).max_norm() < 1e-12);
    }

    #[test]
    fn metric_of_hermitian_limit_frame_is_identity() {
        let p = TwoLevelParams::new(PI, 0.0).unwrap();
        let f = two_level_frame(&p).unwrap();
        let g = f.metric().unwrap();
        assert!((g.matrix() - &ComplexMatrix::identity(2)).max_norm() < 1e-10);
    }

    #[test]
    fn metric_two_computation_paths_agree() {
        // (u u^dag)^-1 versus the mapping property g phi_n = chi_n.
        let p = TwoLevelParams::new(PI / 2.0, 0.0).unwrap();
        let f = two_level_frame(&p).unwrap();
        let g = f.metric().unwrap();
        // g = V U^-1: row i of g solves U^T x = (row i of V)^T.
        let ut = f.u().transpose();
        let n = f.dim();
        let mut g_alt = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            let rhs: Vec<C64> = (0..n).map(|j| f.v()[(i, j)]).collect();
            let row = linalg::solve(&ut, &rhs).unwrap();
            for j in 0..n {
                g_alt[(i, j)] = row[j];
            }
        }
        assert!((g.matrix() - &g_alt).max_norm() < 1e-9);
    }

    #[test]
    fn metric_maps_phi_to_chi() {
        let f = random_frame(3, 77);
        let g = f.metric().unwrap();
        for k in 0..3 {
            let mapped = g.matrix().mul_vec(&f.u().column(k));
            let chi = f.v().column(k);
            let defect: f64 =
                mapped.iter().zip(chi.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(defect < 1e-9, "column {k}: {defect:.3e}");
        }
    }

    #[test]
    fn petermann_orthonormal_is_one() {
        let f = BiorthogonalFrame::standard(3).unwrap();
        for n in 0..3 {
            assert!((f.petermann(n).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn petermann_hermitian_limit_is_one() {
        let p = TwoLevelParams::new(PI, 0.0).unwrap();
        let f = two_level_frame(&p).unwrap();
        assert!((f.petermann(0).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.petermann(1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn petermann_from_explicit_column_norms() {
        // At (xi = pi/2, eta = 0) every column has squared norm
        // csc(pi/4) = sqrt(2) and <chi_1|phi_1> = 1, so K_1 = 2.
        let p = TwoLevelParams::new(PI / 2.0, 0.0).unwrap();
        let f = two_level_frame(&p).unwrap();
        assert!((f.petermann(0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn petermann_index_out_of_range() {
        let f = BiorthogonalFrame::standard(2).unwrap();
        assert!(matches!(f.petermann(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn json_round_trip_reproduces_frame() {
        let f = random_frame(3, 55);
        let loaded = BiorthogonalFrame::from_json_str(&f.to_json_string()).unwrap();
        assert!(f.same_frame(&loaded));
    }

    #[test]
    fn json_loader_recomputes_missing_partner() {
        let f = random_frame(2, 66);
        let doc = serde_json::json!({
            "n": 2,
            "u": matrix_to_pairs(f.u()),
        });
        let loaded = BiorthogonalFrame::from_json_str(&doc.to_string()).unwrap();
        assert!((loaded.v() - f.v()).max_norm() < 1e-10);
    }

    #[test]
    fn json_loader_rejects_unknown_keys_and_bad_shapes() {
        assert!(BiorthogonalFrame::from_json_str(r#"{"n":1,"u":[[1,0]],"extra":3}"#).is_err());
        assert!(BiorthogonalFrame::from_json_str(r#"{"n":2,"u":[[1,0]]}"#).is_err());
    }

    #[test]
    fn zero_state_rejected() {
        let f = BiorthogonalFrame::standard(2).unwrap();
        assert!(f.state(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prop_biorthogonality_invariant(seed in 0u64..5000, n in 2usize..6) {
            let f = random_frame(n, seed);
            let defect = (&(&f.v().adjoint() * f.u()) - &ComplexMatrix::identity(n)).max_norm();
            prop_assert!(defect <= BIORTHO_TOL);
        }

        #[test]
        fn prop_metric_is_positive(seed in 0u64..5000, n in 2usize..5) {
            let f = random_frame(n, seed);
            if let Ok(g) = f.metric() {
                let eigs = linalg::eig(g.matrix()).unwrap();
                for l in &eigs.eigenvalues {
                    prop_assert!(l.re > 0.0);
                }
            }
        }

        #[test]
        fn prop_petermann_at_least_one(seed in 0u64..5000, n in 2usize..6) {
            let f = random_frame(n, seed);
            for k in 0..n {
                prop_assert!(f.petermann(k).unwrap() >= 1.0 - 1e-12);
            }
        }
    }
}
