//! C ABI over the biortho toolkit.
//!
//! Conventions: every function returns a [`BqStatus`] code; results come
//! back through out-pointers. Complex data crosses the boundary as
//! interleaved doubles `[re, im]`, matrices row-major, so an `n x n` matrix
//! occupies `2 n^2` doubles. Frames are opaque handles created and freed
//! here; all other values are plain buffers the caller owns. The matching
//! header lives in `include/biortho.h`.

use std::ffi::{c_char, c_int};

use num_complex::Complex64 as C64;

use biortho::dynamics::HamiltonianSpec;
use biortho::error::Error;
use biortho::frame::BiorthogonalFrame;
use biortho::lindblad::{
    classify_regime, evolve_density, DensityMatrix, LindbladModel, RegimeLabel,
};
use biortho::linalg::ComplexMatrix;
use biortho::observable::{
    expectation, observable_from_array, outcome_probabilities, sample_outcomes,
};
use biortho::two_level::{pauli, two_level_frame, PauliAxis, TwoLevelParams};

/// Status codes mirrored in the C header.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BqStatus {
    Ok = 0,
    NonSquare = 1,
    ConvergenceFailure = 2,
    Singular = 3,
    DegenerateBasis = 4,
    DimensionMismatch = 5,
    FrameMismatch = 6,
    NotPhysical = 7,
    IllConditioned = 8,
    IndexOutOfRange = 9,
    StepTooLarge = 10,
    PositivityViolation = 11,
    InvalidInput = 12,
    NullPointer = 13,
    BufferTooSmall = 14,
}

fn status_of(err: &Error) -> BqStatus {
    match err {
        Error::NonSquare { .. } => BqStatus::NonSquare,
        Error::ConvergenceFailure(_) => BqStatus::ConvergenceFailure,
        Error::Singular(_) => BqStatus::Singular,
        Error::DegenerateBasis(_) => BqStatus::DegenerateBasis,
        Error::DimensionMismatch(_) => BqStatus::DimensionMismatch,
        Error::FrameMismatch => BqStatus::FrameMismatch,
        Error::NotPhysical { .. } => BqStatus::NotPhysical,
        Error::IllConditioned(_) => BqStatus::IllConditioned,
        Error::IndexOutOfRange { .. } => BqStatus::IndexOutOfRange,
        Error::StepTooLarge(_) => BqStatus::StepTooLarge,
        Error::PositivityViolation { .. } => BqStatus::PositivityViolation,
        Error::InvalidInput(_) => BqStatus::InvalidInput,
    }
}

/// Opaque frame handle.
pub struct BqFrame {
    inner: BiorthogonalFrame,
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bq_status_message(status: BqStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        BqStatus::Ok => b"ok\0",
        BqStatus::NonSquare => b"matrix is not square\0",
        BqStatus::ConvergenceFailure => b"iteration failed to converge\0",
        BqStatus::Singular => b"singular or near-singular matrix\0",
        BqStatus::DegenerateBasis => b"degenerate basis\0",
        BqStatus::DimensionMismatch => b"dimension mismatch\0",
        BqStatus::FrameMismatch => b"objects belong to different frames\0",
        BqStatus::NotPhysical => b"observable array is not Hermitian\0",
        BqStatus::IllConditioned => b"ill-conditioned frame parameters\0",
        BqStatus::IndexOutOfRange => b"index out of range\0",
        BqStatus::StepTooLarge => b"integration step too large\0",
        BqStatus::PositivityViolation => b"density matrix positivity violated\0",
        BqStatus::InvalidInput => b"invalid input\0",
        BqStatus::NullPointer => b"null pointer argument\0",
        BqStatus::BufferTooSmall => b"output buffer too small\0",
    };
    text.as_ptr() as *const c_char
}

unsafe fn read_complex(ptr: *const f64, len: usize) -> Vec<C64> {
    let slice = std::slice::from_raw_parts(ptr, 2 * len);
    slice.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

unsafe fn write_complex(values: &[C64], out: *mut f64) {
    let slice = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (k, z) in values.iter().enumerate() {
        slice[2 * k] = z.re;
        slice[2 * k + 1] = z.im;
    }
}

unsafe fn read_matrix(n: usize, ptr: *const f64) -> ComplexMatrix {
    let data = read_complex(ptr, n * n);
    ComplexMatrix::from_fn(n, n, |i, j| data[i * n + j])
}

unsafe fn write_matrix(m: &ComplexMatrix, out: *mut f64) {
    write_complex(m.data(), out);
}

macro_rules! require_nonnull {
    ($($ptr:expr),+ $(,)?) => {
        $(if $ptr.is_null() { return BqStatus::NullPointer; })+
    };
}

fn box_frame(frame: BiorthogonalFrame, out: *mut *mut BqFrame) -> BqStatus {
    unsafe {
        *out = Box::into_raw(Box::new(BqFrame { inner: frame }));
    }
    BqStatus::Ok
}

/// Create the standard orthonormal frame of dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released with
/// [`bq_frame_free`].
#[no_mangle]
pub unsafe extern "C" fn bq_frame_standard(n: usize, out: *mut *mut BqFrame) -> BqStatus {
    require_nonnull!(out);
    match BiorthogonalFrame::standard(n) {
        Ok(frame) => box_frame(frame, out),
        Err(e) => status_of(&e),
    }
}

/// Create the two-level frame at angles `(xi, eta)`.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with [`bq_frame_free`].
#[no_mangle]
pub unsafe extern "C" fn bq_frame_two_level(xi: f64, eta: f64, out: *mut *mut BqFrame) -> BqStatus {
    require_nonnull!(out);
    let frame = TwoLevelParams::new(xi, eta).and_then(|p| two_level_frame(&p));
    match frame {
        Ok(frame) => box_frame(frame, out),
        Err(e) => status_of(&e),
    }
}

/// Build a frame from `n` basis columns packed as a row-major `n x n`
/// matrix of interleaved doubles (`2 n^2` values); the biorthogonal partner
/// is computed.
///
/// # Safety
/// `u` must point to `2 n^2` readable doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_from_basis(
    n: usize,
    u: *const f64,
    out: *mut *mut BqFrame,
) -> BqStatus {
    require_nonnull!(u, out);
    if n == 0 {
        return BqStatus::DimensionMismatch;
    }
    let matrix = read_matrix(n, u);
    let phis: Vec<Vec<C64>> = (0..n).map(|j| matrix.column(j)).collect();
    match BiorthogonalFrame::from_basis(&phis) {
        Ok(frame) => box_frame(frame, out),
        Err(e) => status_of(&e),
    }
}

/// Release a frame handle. Null is accepted and ignored.
///
/// # Safety
/// `frame` must be null or a handle previously returned by a constructor,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_free(frame: *mut BqFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Dimension of the frame; 0 for a null handle.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_dim(frame: *const BqFrame) -> usize {
    if frame.is_null() {
        0
    } else {
        (*frame).inner.dim()
    }
}

/// Copy the phi-column matrix `u` into `out` (`2 n^2` doubles).
///
/// # Safety
/// `frame` must be a live handle and `out` writable for `2 n^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_u(frame: *const BqFrame, out: *mut f64) -> BqStatus {
    require_nonnull!(frame, out);
    write_matrix((*frame).inner.u(), out);
    BqStatus::Ok
}

/// Copy the chi-column matrix `v` into `out` (`2 n^2` doubles).
///
/// # Safety
/// `frame` must be a live handle and `out` writable for `2 n^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_v(frame: *const BqFrame, out: *mut f64) -> BqStatus {
    require_nonnull!(frame, out);
    write_matrix((*frame).inner.v(), out);
    BqStatus::Ok
}

/// Metric operator `g = (u u^dag)^-1` as a row-major interleaved matrix.
///
/// # Safety
/// `frame` must be a live handle and `out` writable for `2 n^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_metric(frame: *const BqFrame, out: *mut f64) -> BqStatus {
    require_nonnull!(frame, out);
    match (*frame).inner.metric() {
        Ok(metric) => {
            write_matrix(metric.matrix(), out);
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Petermann factor of the pair at `index` (0-based).
///
/// # Safety
/// `frame` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bq_frame_petermann(
    frame: *const BqFrame,
    index: usize,
    out: *mut f64,
) -> BqStatus {
    require_nonnull!(frame, out);
    match (*frame).inner.petermann(index) {
        Ok(k) => {
            *out = k;
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Extended Pauli matrix of the `(xi, eta)` frame into `out` (8 doubles);
/// `axis` is 0 for x, 1 for y, 2 for z.
///
/// # Safety
/// `out` must be writable for 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn bq_pauli(axis: c_int, xi: f64, eta: f64, out: *mut f64) -> BqStatus {
    require_nonnull!(out);
    let axis = match axis {
        0 => PauliAxis::X,
        1 => PauliAxis::Y,
        2 => PauliAxis::Z,
        _ => return BqStatus::InvalidInput,
    };
    match TwoLevelParams::new(xi, eta) {
        Ok(p) => {
            write_matrix(&pauli(axis, &p), out);
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Expectation of the observable with Hermitian coefficient array
/// `f_array` (`2 n^2` doubles) in the state `state` (`2 n` doubles).
///
/// # Safety
/// Buffers must match the frame dimension; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bq_expectation(
    frame: *const BqFrame,
    f_array: *const f64,
    state: *const f64,
    out: *mut f64,
) -> BqStatus {
    require_nonnull!(frame, f_array, state, out);
    let frame = &(*frame).inner;
    let n = frame.dim();
    let result = (|| {
        let obs = observable_from_array(frame, read_matrix(n, f_array))?;
        let s = frame.state(read_complex(state, n))?;
        expectation(&obs, &s)
    })();
    match result {
        Ok(value) => {
            *out = value;
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Outcome eigenvalue clusters and probabilities. `capacity` is the length
/// of both `out_values` and `out_probs`; the used length lands in
/// `out_len` (at most the frame dimension).
///
/// # Safety
/// Output buffers must be writable for `capacity` doubles each.
#[no_mangle]
pub unsafe extern "C" fn bq_outcome_probabilities(
    frame: *const BqFrame,
    f_array: *const f64,
    state: *const f64,
    capacity: usize,
    out_values: *mut f64,
    out_probs: *mut f64,
    out_len: *mut usize,
) -> BqStatus {
    require_nonnull!(frame, f_array, state, out_values, out_probs, out_len);
    let frame = &(*frame).inner;
    let n = frame.dim();
    let result = (|| {
        let obs = observable_from_array(frame, read_matrix(n, f_array))?;
        let s = frame.state(read_complex(state, n))?;
        outcome_probabilities(&obs, &s)
    })();
    match result {
        Ok((values, probs)) => {
            if values.len() > capacity {
                return BqStatus::BufferTooSmall;
            }
            for (k, (v, p)) in values.iter().zip(probs.values()).enumerate() {
                *out_values.add(k) = *v;
                *out_probs.add(k) = *p;
            }
            *out_len = values.len();
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Seeded multinomial outcome counts, aligned with
/// [`bq_outcome_probabilities`]. Counts depend only on the coefficient
/// array, the state, and the seed, never on the frame.
///
/// # Safety
/// `out_counts` must be writable for `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn bq_sample_outcomes(
    frame: *const BqFrame,
    f_array: *const f64,
    state: *const f64,
    n_samples: u64,
    seed: u64,
    capacity: usize,
    out_counts: *mut u64,
    out_len: *mut usize,
) -> BqStatus {
    require_nonnull!(frame, f_array, state, out_counts, out_len);
    let frame = &(*frame).inner;
    let n = frame.dim();
    let result = (|| {
        let obs = observable_from_array(frame, read_matrix(n, f_array))?;
        let s = frame.state(read_complex(state, n))?;
        sample_outcomes(&obs, &s, n_samples, seed)
    })();
    match result {
        Ok(counts) => {
            if counts.len() > capacity {
                return BqStatus::BufferTooSmall;
            }
            for (k, c) in counts.iter().enumerate() {
                *out_counts.add(k) = *c;
            }
            *out_len = counts.len();
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Evolve expansion coefficients under the Hamiltonian with the frame's
/// basis as eigenstates and `energies` (`n` doubles) as real eigenvalues;
/// writes the coefficients at time `t` into `out_state` (`2 n` doubles).
///
/// # Safety
/// Buffers must match the frame dimension.
#[no_mangle]
pub unsafe extern "C" fn bq_evolve(
    frame: *const BqFrame,
    energies: *const f64,
    state: *const f64,
    t: f64,
    out_state: *mut f64,
) -> BqStatus {
    require_nonnull!(frame, energies, state, out_state);
    let frame = &(*frame).inner;
    let n = frame.dim();
    let result = (|| {
        let energies = std::slice::from_raw_parts(energies, n).to_vec();
        let h = HamiltonianSpec::new(frame.clone(), energies)?;
        let s = frame.state(read_complex(state, n))?;
        h.evolve(&s, t)
    })();
    match result {
        Ok(evolved) => {
            write_complex(evolved.coeffs(), out_state);
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Spectral classification of the gain/loss Liouvillian: `out_label` is
/// 0 oscillatory, 1 exceptional, 2 overdamped.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bq_lindblad_classify(
    kappa: f64,
    gamma_gain: f64,
    gamma_loss: f64,
    out_label: *mut c_int,
    out_gap: *mut f64,
    out_frequency: *mut f64,
) -> BqStatus {
    require_nonnull!(out_label, out_gap, out_frequency);
    let result =
        LindbladModel::new(kappa, gamma_gain, gamma_loss).and_then(|m| classify_regime(&m));
    match result {
        Ok(regime) => {
            *out_label = match regime.label {
                RegimeLabel::Oscillatory => 0,
                RegimeLabel::Exceptional => 1,
                RegimeLabel::Overdamped => 2,
            };
            *out_gap = regime.spectral_gap;
            *out_frequency = regime.oscillation_frequency;
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Integrate the balanced gain/loss master equation from the excited state
/// and write rows `(t, x, y, z, purity)`; `capacity` counts rows of five
/// doubles. The row count is `round(t_max/dt) + 1`.
///
/// # Safety
/// `out_rows` must be writable for `5 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn bq_lindblad_trajectory(
    kappa: f64,
    gamma: f64,
    t_max: f64,
    dt: f64,
    capacity: usize,
    out_rows: *mut f64,
    out_len: *mut usize,
) -> BqStatus {
    require_nonnull!(out_rows, out_len);
    let result = LindbladModel::balanced(kappa, gamma)
        .and_then(|m| evolve_density(&m, &DensityMatrix::excited(), t_max, dt));
    match result {
        Ok(trajectory) => {
            if trajectory.len() > capacity {
                return BqStatus::BufferTooSmall;
            }
            for (k, (t, rho)) in trajectory.iter().enumerate() {
                let (x, y, z) = rho.bloch();
                let base = out_rows.add(5 * k);
                *base = *t;
                *base.add(1) = x;
                *base.add(2) = y;
                *base.add(3) = z;
                *base.add(4) = rho.purity();
            }
            *out_len = trajectory.len();
            BqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_level_frame_round_trip_and_metric() {
        unsafe {
            let mut frame: *mut BqFrame = std::ptr::null_mut();
            assert_eq!(bq_frame_two_level(PI, 0.0, &mut frame), BqStatus::Ok);
            assert_eq!(bq_frame_dim(frame), 2);
            let mut g = [0.0f64; 8];
            assert_eq!(bq_frame_metric(frame, g.as_mut_ptr()), BqStatus::Ok);
            // Hermitian limit: metric is the identity.
            assert!((g[0] - 1.0).abs() < 1e-10 && (g[6] - 1.0).abs() < 1e-10);
            assert!(g[2].abs() < 1e-10 && g[4].abs() < 1e-10);
            let mut k = 0.0f64;
            assert_eq!(bq_frame_petermann(frame, 0, &mut k), BqStatus::Ok);
            assert!((k - 1.0).abs() < 1e-12);
            assert_eq!(bq_frame_petermann(frame, 5, &mut k), BqStatus::IndexOutOfRange);
            bq_frame_free(frame);
        }
    }

    #[test]
    fn pauli_values_and_error_codes() {
        unsafe {
            let mut m = [0.0f64; 8];
            assert_eq!(bq_pauli(2, PI, 0.0, m.as_mut_ptr()), BqStatus::Ok);
            assert!((m[0] - 1.0).abs() < 1e-12 && (m[6] + 1.0).abs() < 1e-12);
            assert_eq!(bq_pauli(7, PI, 0.0, m.as_mut_ptr()), BqStatus::InvalidInput);
            assert_eq!(bq_pauli(0, 0.0, 0.0, m.as_mut_ptr()), BqStatus::IllConditioned);
            assert_eq!(bq_pauli(0, PI, 0.0, std::ptr::null_mut()), BqStatus::NullPointer);
        }
    }

    #[test]
    fn measurement_through_the_abi() {
        unsafe {
            let mut frame: *mut BqFrame = std::ptr::null_mut();
            assert_eq!(bq_frame_two_level(PI / 2.0, 1.0, &mut frame), BqStatus::Ok);
            // sigma_z array, basis state |phi_1>.
            let f = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0];
            let state = [1.0, 0.0, 0.0, 0.0];
            let mut value = 0.0f64;
            assert_eq!(
                bq_expectation(frame, f.as_ptr(), state.as_ptr(), &mut value),
                BqStatus::Ok
            );
            assert!((value - 1.0).abs() < 1e-12);

            let mut values = [0.0f64; 2];
            let mut probs = [0.0f64; 2];
            let mut len = 0usize;
            assert_eq!(
                bq_outcome_probabilities(
                    frame,
                    f.as_ptr(),
                    state.as_ptr(),
                    2,
                    values.as_mut_ptr(),
                    probs.as_mut_ptr(),
                    &mut len
                ),
                BqStatus::Ok
            );
            assert_eq!(len, 2);
            assert!((probs[0] - 0.0).abs() < 1e-10 && (probs[1] - 1.0).abs() < 1e-10);

            let mut counts = [0u64; 2];
            assert_eq!(
                bq_sample_outcomes(
                    frame,
                    f.as_ptr(),
                    state.as_ptr(),
                    1000,
                    42,
                    2,
                    counts.as_mut_ptr(),
                    &mut len
                ),
                BqStatus::Ok
            );
            assert_eq!(counts, [0, 1000]);
            // Too-small capacity is reported, not truncated.
            assert_eq!(
                bq_outcome_probabilities(
                    frame,
                    f.as_ptr(),
                    state.as_ptr(),
                    1,
                    values.as_mut_ptr(),
                    probs.as_mut_ptr(),
                    &mut len
                ),
                BqStatus::BufferTooSmall
            );
            bq_frame_free(frame);
        }
    }

    #[test]
    fn evolution_preserves_the_physical_norm() {
        unsafe {
            let mut frame: *mut BqFrame = std::ptr::null_mut();
            assert_eq!(bq_frame_two_level(PI / 2.0, 0.0, &mut frame), BqStatus::Ok);
            let energies = [0.0, 1.0];
            let state = [0.6, 0.0, 0.0, 0.8];
            let mut evolved = [0.0f64; 4];
            assert_eq!(
                bq_evolve(frame, energies.as_ptr(), state.as_ptr(), 2.5, evolved.as_mut_ptr()),
                BqStatus::Ok
            );
            let norm: f64 = evolved.chunks_exact(2).map(|p| p[0] * p[0] + p[1] * p[1]).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            bq_frame_free(frame);
        }
    }

    #[test]
    fn lindblad_classification_and_trajectory() {
        unsafe {
            let (mut label, mut gap, mut freq) = (0, 0.0f64, 0.0f64);
            assert_eq!(
                bq_lindblad_classify(1.0, 0.0, 0.0, &mut label, &mut gap, &mut freq),
                BqStatus::Ok
            );
            assert_eq!(label, 0);
            assert!((freq - 2.0).abs() < 1e-9);
            assert_eq!(
                bq_lindblad_classify(1.0, 8.0, 8.0, &mut label, &mut gap, &mut freq),
                BqStatus::Ok
            );
            assert_eq!(label, 2);
            assert_eq!(
                bq_lindblad_classify(-1.0, 0.0, 0.0, &mut label, &mut gap, &mut freq),
                BqStatus::InvalidInput
            );

            let mut rows = vec![0.0f64; 5 * 2001];
            let mut len = 0usize;
            assert_eq!(
                bq_lindblad_trajectory(1.0, 0.5, 2.0, 0.001, 2001, rows.as_mut_ptr(), &mut len),
                BqStatus::Ok
            );
            assert_eq!(len, 2001);
            assert!((rows[3] - 1.0).abs() < 1e-12, "starts at z = 1");
            assert_eq!(
                bq_lindblad_trajectory(1.0, 0.5, 2.0, 0.001, 10, rows.as_mut_ptr(), &mut len),
                BqStatus::BufferTooSmall
            );
        }
    }
}
