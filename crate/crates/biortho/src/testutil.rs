//! Deterministic random inputs for unit tests.

use num_complex::Complex64 as C64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::frame::BiorthogonalFrame;
use crate::linalg::ComplexMatrix;

pub fn unit_f64(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn sym_f64(rng: &mut ChaCha12Rng) -> f64 {
    unit_f64(rng) * 2.0 - 1.0
}

pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(sym_f64(&mut rng), sym_f64(&mut rng)))
}

pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let m = random_matrix(n, seed);
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    h
}

pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(sym_f64(&mut rng), sym_f64(&mut rng))).collect()
}

/// Random well-conditioned frame: retries nearby seeds until construction
/// succeeds, so every call yields a valid frame.
pub fn random_frame(n: usize, seed: u64) -> BiorthogonalFrame {
    for bump in 0u64..32 {
        let candidate = random_matrix(n, seed.wrapping_add(bump.wrapping_mul(0x9e3779b9)));
        let phis: Vec<Vec<C64>> = (0..n).map(|j| candidate.column(j)).collect();
        if let Ok(frame) = BiorthogonalFrame::from_basis(&phis) {
            return frame;
        }
    }
    panic!("no well-conditioned frame near seed {seed}");
}
