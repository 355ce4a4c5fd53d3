//! Dense complex linear algebra at desk scale (dimensions up to 16).
//!
//! Everything here is deterministic: identical inputs give bit-identical
//! results on one platform. Eigendecomposition reduces to Hessenberg form
//! with complex Householder reflectors and then runs an explicitly shifted
//! QR iteration; eigenvectors come from back-substitution on the triangular
//! Schur factor. The contract is the residual bound, not the algorithm.

use num_complex::Complex64 as C64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

/// Condition-number cap for inversion. Frames and observables past this are
/// rejected rather than silently amplifying noise.
pub const CONDITION_CAP: f64 = 1e12;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged or empty matrix rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        assert_eq!(col.len(), self.rows);
        for (i, &x) in col.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..self.cols {
                    acc += self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    /// Kronecker product, `self` indexing the slow (outer) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (ra, ca, rb, cb) = (self.rows, self.cols, other.rows, other.cols);
        Self::from_fn(ra * rb, ca * cb, |i, j| {
            self[(i / rb, j / cb)] * other[(i % rb, j % cb)]
        })
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum())
            .fold(0.0, f64::max)
    }

    /// Spectral-norm lower estimate: power iteration on `A†A` from a fixed
    /// asymmetric start, floored by `||A||_F / sqrt(n)`. Under-estimating is
    /// the safe direction for residual reporting.
    pub fn spectral_norm_est(&self) -> f64 {
        let n = self.cols;
        let floor = self.fro_norm() / (n as f64).sqrt();
        // Irrational spacing keeps the start from landing in a structured
        // null space.
        let mut v: Vec<C64> =
            (0..n).map(|i| C64::new(1.0 + 0.618_033_988_749_894_9 * i as f64, 0.0)).collect();
        let vn = vnorm(&v);
        for x in v.iter_mut() {
            *x /= vn;
        }
        let mut sigma = 0.0;
        for _ in 0..60 {
            let av = self.mul_vec(&v);
            let atav = self.adjoint().mul_vec(&av);
            let norm = vnorm(&atav);
            if norm == 0.0 {
                break;
            }
            sigma = norm.sqrt();
            for (x, y) in v.iter_mut().zip(atav.iter()) {
                *x = y / norm;
            }
        }
        sigma.max(floor)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// max_{n,m} |conj(f[m][n]) - f[n][m]|, zero exactly when Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                defect = defect.max((self[(j, i)].conj() - self[(i, j)]).norm());
            }
        }
        defect
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Inner product conjugating the first argument.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Eigenvalues and unit right eigenvectors of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Sorted ascending by (real part, imaginary part).
    pub eigenvalues: Vec<C64>,
    /// Unit-norm columns, aligned with `eigenvalues`; the phase is fixed so
    /// the largest-magnitude component is real and positive.
    pub right_eigenvectors: ComplexMatrix,
    /// Measured max_i ||M v_i - lambda_i v_i||_2 / ||M||_2.
    pub residual_bound: f64,
}

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    Ok(m.rows())
}

/// Complex Givens rotation zeroing `b` against `a`: returns `(c, s)` with
/// `c` real so that `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let zero = C64::new(0.0, 0.0);
    if b == zero {
        return (1.0, zero);
    }
    if a == zero {
        return (0.0, b.conj() / b.norm());
    }
    let denom = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / denom;
    let s = (a / a.norm()) * b.conj() / denom;
    (c, s)
}

fn apply_givens_rows(m: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: C64, col_start: usize) {
    for k in col_start..m.cols() {
        let x = m[(i, k)];
        let y = m[(j, k)];
        m[(i, k)] = c * x + s * y;
        m[(j, k)] = -s.conj() * x + c * y;
    }
}

fn apply_givens_cols(m: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: C64) {
    for k in 0..m.rows() {
        let x = m[(k, i)];
        let y = m[(k, j)];
        m[(k, i)] = c * x + s.conj() * y;
        m[(k, j)] = -s * x + c * y;
    }
}

/// Householder reduction to upper Hessenberg form, accumulating the unitary
/// similarity in `z`.
fn hessenberg(h: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        // Reflector for column k, rows k+1..n.
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vnorm(&x);
        if xnorm <= EPS * h.fro_norm() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vnorm(&v);
        if vn == 0.0 {
            continue;
        }
        for comp in v.iter_mut() {
            *comp /= vn;
        }
        // H <- P H P with P = I - 2 v v^dag acting on rows/cols k+1..n.
        for col in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, col)]).sum();
            for i in 0..v.len() {
                let delta = 2.0 * v[i] * dot;
                h[(k + 1 + i, col)] -= delta;
            }
        }
        for row in 0..n {
            let dot: C64 = (0..v.len()).map(|i| h[(row, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                h[(row, k + 1 + i)] -= 2.0 * dot * v[i].conj();
            }
        }
        for row in 0..n {
            let dot: C64 = (0..v.len()).map(|i| z[(row, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                z[(row, k + 1 + i)] -= 2.0 * dot * v[i].conj();
            }
        }
        // Entries below the subdiagonal are now zero by construction.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Wilkinson shift from the trailing 2x2 of the active block.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + b * c).sqrt();
    let denom = if (delta + disc).norm() >= (delta - disc).norm() {
        delta + disc
    } else {
        delta - disc
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - b * c / denom
    }
}

/// One explicit single-shift QR step on the active block `[lo, hi]`.
fn qr_step(h: &mut ComplexMatrix, z: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    for d in lo..=hi {
        h[(d, d)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        apply_givens_rows(h, i, i + 1, c, s, i);
        h[(i + 1, i)] = C64::new(0.0, 0.0);
        rotations.push((i, c, s));
    }
    for &(i, c, s) in &rotations {
        apply_givens_cols(h, i, i + 1, c, s);
        apply_givens_cols(z, i, i + 1, c, s);
    }
    for d in lo..=hi {
        h[(d, d)] += shift;
    }
}

/// Schur decomposition `M = Z T Z^dag` with `T` upper triangular.
fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = require_square(m)?;
    let mut h = m.clone();
    let mut z = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok((h, z));
    }
    hessenberg(&mut h, &mut z);
    let scale = h.fro_norm().max(f64::MIN_POSITIVE);

    let mut hi = n - 1;
    let mut iters_here = 0usize;
    let mut total = 0usize;
    let cap = 40 * n;
    // Subdiagonal negligibility: compare against the local diagonal mass,
    // falling back to the overall norm when that mass vanishes.
    let negligible = |h: &ComplexMatrix, i: usize| {
        let local = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
        h[(i, i - 1)].norm() <= EPS * if local > 0.0 { local } else { scale }
    };
    loop {
        // Deflate converged trailing eigenvalues.
        while hi > 0 {
            if negligible(&h, hi) {
                h[(hi, hi - 1)] = C64::new(0.0, 0.0);
                hi -= 1;
                iters_here = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        // Find the start of the active block.
        let mut lo = hi;
        while lo > 0 {
            if negligible(&h, lo) {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        total += 1;
        iters_here += 1;
        if total > cap {
            return Err(Error::ConvergenceFailure(format!(
                "QR iteration cap {cap} exceeded at block [{lo}, {hi}]"
            )));
        }
        let shift = if iters_here % 12 == 0 {
            // Exceptional ad-hoc shift to break symmetry stalls.
            let mag = h[(hi, hi - 1)].norm()
                + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + C64::new(0.75 * mag, 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, &mut z, lo, hi, shift);
    }
    // Clean the strictly lower part.
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

/// Right eigenvectors of the triangular factor, mapped back through `Z`.
fn triangular_eigenvectors(t: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let tnorm = t.fro_norm().max(f64::MIN_POSITIVE);
    let smin = EPS * tnorm;
    let mut vectors = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = t[(i, k)];
            for j in i + 1..k {
                acc += t[(i, j)] * y[j];
            }
            let mut divisor = t[(i, i)] - lambda;
            if divisor.norm() < smin {
                divisor = C64::new(smin, 0.0);
            }
            y[i] = -acc / divisor;
            let mag = y[i].norm();
            if mag > 1e120 {
                for comp in y.iter_mut() {
                    *comp /= mag;
                }
            }
        }
        let mut v = z.mul_vec(&y);
        let norm = vnorm(&v);
        for comp in v.iter_mut() {
            *comp /= norm;
        }
        // Canonical phase: largest component real positive.
        let (mut best, mut best_mag) = (0usize, 0.0f64);
        for (i, comp) in v.iter().enumerate() {
            if comp.norm() > best_mag {
                best_mag = comp.norm();
                best = i;
            }
        }
        let phase = v[best] / v[best].norm();
        for comp in v.iter_mut() {
            *comp /= phase;
        }
        vectors.set_column(k, &v);
    }
    vectors
}

/// Eigendecomposition of a general complex square matrix.
///
/// Eigenvalues are sorted ascending by (real part, imaginary part) and the
/// eigenvector columns are permuted to match. Fails with
/// [`Error::ConvergenceFailure`] if the QR iteration stalls or the measured
/// residual exceeds the desk-scale contract of 1e-10.
pub fn eig(m: &ComplexMatrix) -> Result<EigenSystem> {
    let n = require_square(m)?;
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (t, z) = schur(m)?;
    let vectors = triangular_eigenvectors(&t, &z);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (t[(a, a)], t[(b, b)]);
        la.re.partial_cmp(&lb.re).unwrap().then(la.im.partial_cmp(&lb.im).unwrap())
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&k| t[(k, k)]).collect();
    let mut right = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        right.set_column(dst, &vectors.column(src));
    }

    let mnorm = m.spectral_norm_est().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for k in 0..n {
        let v = right.column(k);
        let mv = m.mul_vec(&v);
        let res: Vec<C64> = mv.iter().zip(v.iter()).map(|(a, b)| a - b * eigenvalues[k]).collect();
        worst = worst.max(vnorm(&res));
    }
    let residual_bound = worst / mnorm;
    if !residual_bound.is_finite() || residual_bound > 1e-10 {
        return Err(Error::ConvergenceFailure(format!(
            "eigenpair residual {residual_bound:.3e} exceeds 1e-10"
        )));
    }
    Ok(EigenSystem { eigenvalues, right_eigenvectors: right, residual_bound })
}

/// LU decomposition with partial pivoting. Returns the packed factors and
/// the pivot permutation.
struct Lu {
    lu: ComplexMatrix,
    pivots: Vec<usize>,
}

fn lu_decompose(m: &ComplexMatrix) -> Result<Lu> {
    let n = require_square(m)?;
    let mut lu = m.clone();
    let mut pivots: Vec<usize> = (0..n).collect();
    let scale = m.max_norm().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (mut pivot_row, mut pivot_mag) = (k, lu[(k, k)].norm());
        for i in k + 1..n {
            let mag = lu[(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag <= scale * EPS * (n as f64) {
            return Err(Error::Singular(format!("zero pivot at column {k}")));
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            pivots.swap(k, pivot_row);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let delta = factor * lu[(k, j)];
                lu[(i, j)] -= delta;
            }
        }
    }
    Ok(Lu { lu, pivots })
}

impl Lu {
    fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.pivots.len();
        let mut x: Vec<C64> = self.pivots.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let delta = self.lu[(i, j)] * x[j];
                x[i] -= delta;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let delta = self.lu[(i, j)] * x[j];
                x[i] -= delta;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = require_square(a)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs matrix dimension {n}",
            b.len()
        )));
    }
    Ok(lu_decompose(a)?.solve_vec(b))
}

/// Matrix inverse with a 1-norm condition estimate capped at
/// [`CONDITION_CAP`] and the product residual sharpened by Newton
/// refinement until `||A A^-1 - I||_max <= 1e-10`.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(m)?;
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let lu = lu_decompose(m)?;
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        inv.set_column(j, &lu.solve_vec(&e));
        e[j] = C64::new(0.0, 0.0);
    }
    let cond = m.one_norm() * inv.one_norm();
    if !cond.is_finite() || cond >= CONDITION_CAP {
        return Err(Error::Singular(format!("condition estimate {cond:.3e} exceeds cap")));
    }
    let id = ComplexMatrix::identity(n);
    for _ in 0..4 {
        let residual = &id - &(m * &inv);
        if residual.max_norm() <= 1e-12 {
            break;
        }
        inv = &inv + &(&inv * &residual);
    }
    let defect = (&(m * &inv) - &id).max_norm();
    if !defect.is_finite() || defect > 1e-10 {
        return Err(Error::Singular(format!("inverse residual {defect:.3e} exceeds 1e-10")));
    }
    Ok(inv)
}

/// Matrix exponential by scaling and squaring with an adaptively truncated
/// Taylor series on the scaled matrix.
pub fn matexp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(m)?;
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let norm = m.one_norm();
    if !norm.is_finite() || norm > 1e12 {
        return Err(Error::ConvergenceFailure(format!("matrix norm {norm:.3e} too large to exponentiate")));
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let mut converged = false;
    for k in 1..=48u32 {
        term = &term * &scaled;
        term = term.scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if k >= 4 && term.max_norm() <= 1e-18 * sum.max_norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure("Taylor series did not converge".into()));
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if !result.is_finite() {
        return Err(Error::ConvergenceFailure("non-finite matrix exponential".into()));
    }
    Ok(result)
}
