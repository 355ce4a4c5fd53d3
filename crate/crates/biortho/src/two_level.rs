//! The explicit two-level construction: frames parameterised by `(xi, eta)`,
//! the extended Pauli matrices, and Bloch-parameterised states and
//! observables.
//!
//! With `a = 1/sqrt(2 sin(xi/2))`, `cq = cos(xi/4)`, `sq = sin(xi/4)` and
//! `e = exp(i eta)`, the frame columns are
//!
//! ```text
//! phi_1 = a [ cq+sq, (cq-sq) e ]     chi_1 = a [ cq+sq, -(cq-sq) e ]
//! phi_2 = a [ cq-sq, (cq+sq) e ]     chi_2 = a [ -(cq-sq), (cq+sq) e ]
//! ```
//!
//! so that `<chi_n|phi_m> = delta_nm` and all four columns share the same
//! norm. The extended Pauli triplet is the image of the standard one under
//! the frame similarity, `sigma_a = u sigma_a^std u^-1`, which keeps the
//! su(2) commutation relations and the +/-1 spectrum at every parameter
//! value. The Hermitian limit is `xi -> pi`, `eta -> 0`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frame::{BiorthogonalFrame, StateCoeffs};
use crate::linalg::ComplexMatrix;
use crate::observable::{observable_from_array, ObservableRep};

/// Conditioning floor on `sin(xi/2)`; the frame degenerates at `xi in {0, 2pi}`.
pub const XI_SIN_FLOOR: f64 = 1e-6;

/// Frame parameters `(xi, eta)` in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    xi: f64,
    eta: f64,
}

impl TwoLevelParams {
    pub fn new(xi: f64, eta: f64) -> Result<Self> {
        if !xi.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidInput("angles must be finite".into()));
        }
        if !(0.0..2.0 * PI).contains(&eta) {
            return Err(Error::InvalidInput(format!("eta = {eta} outside [0, 2pi)")));
        }
        if xi <= 0.0 || xi >= 2.0 * PI || (xi / 2.0).sin() < XI_SIN_FLOOR {
            return Err(Error::IllConditioned(format!(
                "xi = {xi} has sin(xi/2) below {XI_SIN_FLOOR:.0e}"
            )));
        }
        Ok(Self { xi, eta })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Interior `(xi, eta)` grid: `xi` avoids the degenerate endpoints `{0, 2pi}`,
/// `eta` covers `[0, 2pi)`.
pub fn param_grid(xi_steps: usize, eta_steps: usize) -> Vec<TwoLevelParams> {
    let mut grid = Vec::with_capacity(xi_steps * eta_steps);
    for i in 0..xi_steps {
        let xi = 2.0 * PI * (i + 1) as f64 / (xi_steps + 1) as f64;
        for j in 0..eta_steps {
            let eta = 2.0 * PI * j as f64 / eta_steps.max(1) as f64;
            grid.push(TwoLevelParams::new(xi, eta).expect("interior grid point"));
        }
    }
    grid
}

/// The `(xi, eta)`-parameterised biorthogonal frame, built from the closed
/// forms for both the phi- and chi-columns.
pub fn two_level_frame(p: &TwoLevelParams) -> Result<BiorthogonalFrame> {
    let a = 1.0 / (2.0 * (p.xi / 2.0).sin()).sqrt();
    let cq = (p.xi / 4.0).cos();
    let sq = (p.xi / 4.0).sin();
    let e = C64::new(0.0, p.eta).exp();
    let plus = C64::new(a * (cq + sq), 0.0);
    let minus = C64::new(a * (cq - sq), 0.0);
    let u = ComplexMatrix::from_rows(&[
        vec![plus, minus],
        vec![minus * e, plus * e],
    ])?;
    let v = ComplexMatrix::from_rows(&[
        vec![plus, -minus],
        vec![-minus * e, plus * e],
    ])?;
    BiorthogonalFrame::from_u_v(u, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn label(&self) -> &'static str {
        match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        }
    }
}

impl std::str::FromStr for PauliAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(PauliAxis::X),
            "y" | "Y" => Ok(PauliAxis::Y),
            "z" | "Z" => Ok(PauliAxis::Z),
            other => Err(Error::InvalidInput(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

/// Standard Hermitian Pauli matrix.
pub fn pauli_standard(axis: PauliAxis) -> ComplexMatrix {
    let (z, o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    match axis {
        PauliAxis::X => ComplexMatrix::from_rows(&[vec![z, o], vec![o, z]]).unwrap(),
        PauliAxis::Y => ComplexMatrix::from_rows(&[vec![z, -i], vec![i, z]]).unwrap(),
        PauliAxis::Z => ComplexMatrix::from_rows(&[vec![o, z], vec![z, -o]]).unwrap(),
    }
}

/// Extended Pauli matrix of the `(xi, eta)` frame, from the closed forms.
/// Generally non-Hermitian (`x` stays Hermitian), eigenvalues +/-1.
pub fn pauli(axis: PauliAxis, p: &TwoLevelParams) -> ComplexMatrix {
    let half = p.xi / 2.0;
    let csc = 1.0 / half.sin();
    let cot = half.cos() / half.sin();
    let e_plus = C64::new(0.0, p.eta).exp();
    let e_minus = C64::new(0.0, -p.eta).exp();
    let i = C64::new(0.0, 1.0);
    match axis {
        PauliAxis::X => ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), e_minus],
            vec![e_plus, C64::new(0.0, 0.0)],
        ])
        .unwrap(),
        PauliAxis::Y => ComplexMatrix::from_rows(&[
            vec![i * cot, -i * csc * e_minus],
            vec![i * csc * e_plus, -i * cot],
        ])
        .unwrap(),
        PauliAxis::Z => ComplexMatrix::from_rows(&[
            vec![C64::new(csc, 0.0), -cot * e_minus],
            vec![cot * e_plus, C64::new(-csc, 0.0)],
        ])
        .unwrap(),
    }
}

/// Real Bloch coefficients `(t, x, y, z)` of a physical observable
/// `F = t 1 + x sigma_x + y sigma_y + z sigma_z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochObservableCoeffs {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochObservableCoeffs {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if ![t, x, y, z].iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidInput("Bloch coefficients must be finite".into()));
        }
        Ok(Self { t, x, y, z })
    }
}

/// The observable `t 1 + x sigma_x + y sigma_y + z sigma_z` in the `(xi, eta)`
/// frame. Its coefficient array is the same combination of standard Pauli
/// matrices, which is Hermitian for real coefficients.
pub fn observable_from_bloch(
    b: &BlochObservableCoeffs,
    p: &TwoLevelParams,
) -> Result<ObservableRep> {
    let frame = two_level_frame(p)?;
    observable_in_frame(b, &frame)
}

/// Same combination expressed in an existing two-level frame.
pub fn observable_in_frame(
    b: &BlochObservableCoeffs,
    frame: &BiorthogonalFrame,
) -> Result<ObservableRep> {
    if frame.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch observables are two-level, frame has dimension {}",
            frame.dim()
        )));
    }
    let mut f = ComplexMatrix::identity(2).scale(C64::new(b.t, 0.0));
    for (coeff, axis) in [(b.x, PauliAxis::X), (b.y, PauliAxis::Y), (b.z, PauliAxis::Z)] {
        f = &f + &pauli_standard(axis).scale(C64::new(coeff, 0.0));
    }
    observable_from_array(frame, f)
}

/// Bloch sphere angles of a pure two-level state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidInput("angles must be finite".into()));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidInput(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidInput(format!("phi = {phi} outside [0, 2pi)")));
        }
        Ok(Self { theta, phi })
    }
}

/// `|psi> = cos(theta/2) |phi_1> + sin(theta/2) e^{i phi} |phi_2>`.
pub fn bloch_state(a: &BlochAngles, frame: &BiorthogonalFrame) -> Result<StateCoeffs> {
    if frame.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch states are two-level, frame has dimension {}",
            frame.dim()
        )));
    }
    let c1 = C64::new((a.theta / 2.0).cos(), 0.0);
    let c2 = C64::new(0.0, a.phi).exp() * (a.theta / 2.0).sin();
    frame.state(vec![c1, c2])
}
