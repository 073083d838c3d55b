//! Dense complex linear algebra for the small systems this crate deals with.
//!
//! Everything here is sized for N ≤ 16: plain row-major storage, Gauss-Jordan
//! inversion, a Hessenberg/QR Schur solver and power iteration for spectral
//! norms. Nothing is tuned for speed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub type C64 = Complex64;

/// Largest matrix dimension the eigenvalue solver accepts.
pub const MAX_DIM: usize = 16;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 10_000;
const DEFAULT_SEED: u64 = 0x5eed_e95e;

static RESTART_SEED: AtomicU64 = AtomicU64::new(DEFAULT_SEED);

/// Sets the seed of the random restart used by power iteration.
///
/// Every call to [`CMat::spectral_norm`] draws its restart vector from a fresh
/// generator built from this seed, so results do not depend on call order or
/// threading.
pub fn set_restart_seed(seed: u64) {
    RESTART_SEED.store(seed, Ordering::Relaxed);
}

pub fn restart_seed() -> u64 {
    RESTART_SEED.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Column vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CVec(Vec<C64>);

impl CVec {
    pub fn new(entries: Vec<C64>) -> Self {
        assert!(!entries.is_empty(), "CVec must have at least one entry");
        CVec(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![ZERO; len])
    }

    /// Unit vector `|index⟩` of the standard basis.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product `⟨self|other⟩`, antilinear in `self`.
    pub fn dot(&self, other: &CVec) -> C64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> CVec {
        CVec(self.0.iter().map(|z| z * s).collect())
    }

    /// Returns the vector scaled to unit two-norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVec> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// Multiplies by a global phase so the largest-magnitude entry is real and positive.
    pub fn fix_phase(&self) -> CVec {
        let pivot = self
            .0
            .iter()
            .copied()
            .fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        self.scale(pivot.conj() / pivot.norm())
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Sub for &CVec {
    type Output = CVec;
    fn sub(self, rhs: &CVec) -> CVec {
        assert_eq!(self.len(), rhs.len());
        CVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq, Serialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows*cols");
        CMat {
            rows,
            cols,
            data: entries,
        }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_columns(columns: &[CVec]) -> Self {
        let c = columns.len();
        let r = columns.first().map_or(0, CVec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), r);
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &CVec, b: &CVec) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for i in 0..a.len() {
            for j in 0..b.len() {
                m[(i, j)] = a[i] * b[j].conj();
            }
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVec {
        CVec::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn row(&self, i: usize) -> CVec {
        CVec::new(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn adjoint(&self) -> CMat {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    /// `self + shift·I` for square matrices.
    pub fn shift_diag(&self, shift: C64) -> CMat {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += shift;
        }
        m
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        assert_eq!(self.cols, v.len());
        CVec::new(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
                .collect(),
        )
    }

    /// `self^k`; `k = 0` gives the identity.
    pub fn pow(&self, k: u32) -> CMat {
        assert!(self.is_square());
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.matmul(self))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMat, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch(format!(
                "inverse of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let threshold = 1e-14 * self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { pivot, threshold });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let p = ONE / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let aj = a[(col, j)];
                    let ij = inv[(col, j)];
                    a[(r, j)] -= f * aj;
                    inv[(r, j)] -= f * ij;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        for j in 0..self.cols {
            self.data.swap(r1 * self.cols + j, r2 * self.cols + j);
        }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.dominant_singular().0
    }

    /// Largest singular value and a unit right singular vector belonging to it.
    ///
    /// Shifted power iteration on `A†A`. The deterministic all-ones start is
    /// followed by one seeded random restart and the better of the two wins.
    pub fn dominant_singular(&self) -> (f64, CVec) {
        let n = self.cols;
        let gram = self.adjoint().matmul(self);
        let start = CVec::new(vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]);
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed());
        let random = CVec::new(
            (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        let a = power_iterate(&gram, start);
        let b = power_iterate(&gram, random);
        let (lambda, v) = if b.0 > a.0 { b } else { a };
        (lambda.max(0.0).sqrt(), v)
    }

    /// Eigenvalues with normalized right and left eigenvectors.
    ///
    /// `right` holds `R_l` as columns with `A R_l = ω_l R_l`; `left` holds `L_l`
    /// as columns with `L_l† A = ω_l L_l†`. Left vectors come from the adjoint
    /// and are matched to the right ones by nearest eigenvalue.
    pub fn eig(&self) -> Result<Eigen, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch(format!(
                "eig of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self.rows > MAX_DIM {
            return Err(LinalgError::DimensionMismatch(format!(
                "eig supports N <= {MAX_DIM}, got {}",
                self.rows
            )));
        }
        let (values, right) = right_eigen(self)?;
        let (adj_values, adj_vectors) = right_eigen(&self.adjoint())?;

        let n = self.rows;
        let mut used = vec![false; n];
        let mut left_cols = Vec::with_capacity(n);
        for &w in &values {
            let mut best: Option<(usize, f64)> = None;
            for (m, mu) in adj_values.iter().enumerate() {
                if used[m] {
                    continue;
                }
                let d = (mu.conj() - w).norm();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((m, d));
                }
            }
            let (m, _) = best.expect("one unused left vector per eigenvalue");
            used[m] = true;
            left_cols.push(adj_vectors.column(m));
        }
        Ok(Eigen {
            values,
            right,
            left: CMat::from_columns(&left_cols),
        })
    }
}

/// Result of [`CMat::eig`].
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub right: CMat,
    pub left: CMat,
}

impl Eigen {
    pub fn right_vector(&self, l: usize) -> CVec {
        self.right.column(l)
    }

    pub fn left_vector(&self, l: usize) -> CVec {
        self.left.column(l)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dominant eigenpair of a Hermitian positive semidefinite matrix.
fn power_iterate(gram: &CMat, start: CVec) -> (f64, CVec) {
    let n = gram.rows();
    // Shift by a fraction of the trace keeps the iteration on the top of the
    // spectrum even when the Gram matrix has a large null space.
    let shift = 0.25 * gram.trace().re / n as f64;
    let shifted = gram.shift_diag(C64::new(shift, 0.0));
    let Some(mut v) = start.normalized() else {
        return (0.0, CVec::basis(n, 0));
    };
    let mut lambda = gram.mul_vec(&v).dot(&v).re;
    for _ in 0..POWER_MAX_ITER {
        let w = shifted.mul_vec(&v);
        let Some(next) = w.normalized() else {
            return (0.0, v);
        };
        let next_lambda = gram.mul_vec(&next).dot(&next).re;
        let change = (next_lambda - lambda).abs();
        v = next;
        let done = change <= POWER_TOL * next_lambda.abs().max(f64::MIN_POSITIVE);
        lambda = next_lambda;
        if done {
            break;
        }
    }
    (lambda, v.fix_phase())
}

struct Rotation {
    c: f64,
    s: C64,
}

impl Rotation {
    /// Rotation `[[c, s], [-s̄, c]]` mapping `(a, b)` onto `(r, 0)`.
    fn zeroing(a: C64, b: C64) -> Rotation {
        let na = a.norm();
        let nb = b.norm();
        if nb == 0.0 {
            return Rotation { c: 1.0, s: ZERO };
        }
        if na == 0.0 {
            return Rotation {
                c: 0.0,
                s: b.conj() / nb,
            };
        }
        let r = na.hypot(nb);
        Rotation {
            c: na / r,
            s: (a / na) * b.conj() / r,
        }
    }

    fn apply_left(&self, m: &mut CMat, p: usize, q: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(p, j)];
            let y = m[(q, j)];
            m[(p, j)] = x * self.c + self.s * y;
            m[(q, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    fn apply_right_adjoint(&self, m: &mut CMat, p: usize, q: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, p)];
            let y = m[(i, q)];
            m[(i, p)] = x * self.c + y * self.s.conj();
            m[(i, q)] = -x * self.s + y * self.c;
        }
    }
}

/// Householder reduction `A = Q H Q†` with `H` upper Hessenberg.
fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMat::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H <- P H with P = I - 2 v v†, acting on rows k+1..n.
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|t| v[t].conj() * h[(k + 1 + t, j)]).sum();
            for t in 0..v.len() {
                h[(k + 1 + t, j)] -= 2.0 * v[t] * s;
            }
        }
        // H <- H P and Q <- Q P, acting on columns k+1..n.
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: C64 = (0..v.len()).map(|t| m[(i, k + 1 + t)] * v[t]).sum();
                for t in 0..v.len() {
                    m[(i, k + 1 + t)] -= 2.0 * s * v[t].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Complex Schur form `A = Z T Z†` by single-shift QR on the Hessenberg form.
fn schur(a: &CMat) -> Result<(CMat, CMat), LinalgError> {
    let n = a.rows();
    let (mut t, mut z) = hessenberg(a);
    if n < 2 {
        return Ok((t, z));
    }
    let eps = f64::EPSILON;
    let norm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_iter = 100 * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        // Locate the top of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let diag = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            let reference = if diag > 0.0 { diag } else { norm };
            if sub <= eps * reference {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(LinalgError::NoConvergence { iterations: total });
        }

        let mu = if iter.is_multiple_of(11) {
            // Exceptional shift breaks cycles on symmetric-looking blocks.
            t[(hi, hi)] + C64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };

        let mut x = t[(lo, lo)] - mu;
        let mut y = t[(lo + 1, lo)];
        for k in lo..hi {
            let rot = Rotation::zeroing(x, y);
            let first_col = if k > lo { k - 1 } else { k };
            rot.apply_left(&mut t, k, k + 1, first_col..n);
            rot.apply_right_adjoint(&mut t, k, k + 1, 0..(k + 3).min(hi + 1));
            rot.apply_right_adjoint(&mut z, k, k + 1, 0..n);
            if k > lo {
                t[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = t[(k + 1, k)];
                y = t[(k + 2, k)];
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    Ok((t, z))
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let r1 = mean + disc;
    let r2 = mean - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Eigenvalues and unit right eigenvectors via Schur back-substitution.
fn right_eigen(a: &CMat) -> Result<(Vec<C64>, CMat), LinalgError> {
    let n = a.rows();
    let (t, z) = schur(a)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = vec![ZERO; n];
        x[k] = ONE;
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
            let mut d = t[(i, i)] - values[k];
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            x[i] = -s / d;
        }
        let v = z.mul_vec(&CVec::new(x));
        columns.push(v.normalized().unwrap_or_else(|| CVec::basis(n, k)));
    }
    Ok((values, CMat::from_columns(&columns)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        CMat::from_row_major(
            n,
            n,
            (0..n * n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let a = random_matrix(rng, n);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let i2 = CMat::identity(2);
        assert_eq!(i2.inverse().unwrap(), i2);
        let d = CMat::from_diag(&[c(2.0, 0.0), c(0.0, 4.0)]);
        let inv = d.inverse().unwrap();
        let expected = CMat::from_diag(&[c(0.5, 0.0), c(0.0, -0.25)]);
        assert!(inv.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn inverse_residual_on_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 3).shift_diag(c(2.0, 0.0));
        let b = a.inverse().unwrap();
        let residual = (&a * &b).max_abs_diff(&CMat::identity(3));
        assert!(residual <= 1e-12 * a.spectral_norm(), "residual {residual}");
        let back = b.inverse().unwrap();
        assert!(back.max_abs_diff(&a) <= 1e-10 * a.max_abs());
    }

    #[test]
    fn inverse_rejects_singular() {
        let a = CMat::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(LinalgError::Singular { .. })));
        assert!(matches!(
            CMat::zeros(2, 3).inverse(),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eig_of_diagonal() {
        let a = CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let e = a.eig().unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] - 2.0).abs() < 1e-15);
        for l in 0..2 {
            let r = e.right_vector(l);
            let lv = e.left_vector(l);
            assert!((r.dot(&lv).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_coupled_ring_matrix() {
        // omega0 = 0, gamma = 1, V = 1.
        let h = CMat::from_rows(&[vec![c(0.0, -0.5), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let e = h.eig().unwrap();
        let root = (1.0f64 - 1.0 / 16.0).sqrt();
        let mut expected = [c(root, -0.25), c(-root, -0.25)];
        for w in &e.values {
            let hit = expected
                .iter_mut()
                .find(|x| (**x - *w).norm() < 1e-10)
                .expect("eigenvalue matches the closed form");
            *hit = c(f64::NAN, f64::NAN);
        }
        let scale = h.spectral_norm();
        for l in 0..2 {
            let r = e.right_vector(l);
            let lv = e.left_vector(l);
            let w = e.values[l];
            assert!((&h.mul_vec(&r) - &r.scale(w)).norm() <= 1e-10 * scale);
            assert!((&h.adjoint().mul_vec(&lv) - &lv.scale(w.conj())).norm() <= 1e-10 * scale);
            assert!((r.norm() - 1.0).abs() < 1e-14 && (lv.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_random_hermitian_is_real_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 4);
            let e = a.eig().unwrap();
            for w in &e.values {
                assert!(w.im.abs() < 1e-10, "imaginary part {}", w.im);
            }
            for i in 0..4 {
                for j in 0..i {
                    let overlap = e.right_vector(i).dot(&e.right_vector(j)).norm();
                    assert!(overlap < 1e-8, "overlap {overlap}");
                }
            }
        }
    }

    #[test]
    fn eig_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d: Vec<C64> = (0..4).map(|k| c(k as f64, -0.3 * k as f64)).collect();
        let s = random_matrix(&mut rng, 4).shift_diag(c(3.0, 0.0));
        let a = &(&s * &CMat::from_diag(&d)) * &s.inverse().unwrap();
        // Permutation similarity relabels the basis without changing the spectrum.
        let mut p = CMat::zeros(4, 4);
        for (i, j) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            p[(i, j)] = ONE;
        }
        let b = &(&p * &a) * &p.adjoint();
        for m in [a, b] {
            let e = m.eig().unwrap();
            for want in &d {
                assert!(e.values.iter().any(|w| (w - want).norm() < 1e-10));
            }
        }
    }

    #[test]
    fn eig_of_jordan_block_degrades_gracefully() {
        let a = CMat::from_rows(&[vec![c(0.0, -0.5), ZERO], vec![c(0.0, -1.0), c(0.0, -0.5)]]);
        let e = a.eig().unwrap();
        for w in &e.values {
            assert!((w - c(0.0, -0.5)).norm() < 1e-7);
        }
    }

    #[test]
    fn spectral_norm_simple_cases() {
        let d = CMat::from_real_rows(&[&[3.0, 0.0], &[0.0, -1.0]]);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-13);
        let nil = CMat::from_rows(&[vec![ZERO, c(0.3, -0.4)], vec![ZERO, ZERO]]);
        assert!((nil.spectral_norm() - 0.5).abs() < 1e-13);
        assert_eq!(CMat::zeros(3, 2).spectral_norm(), 0.0);
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec::new(
            (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .normalized()
        .unwrap()
    }

    #[test]
    fn spectral_norm_matches_monte_carlo_maximum() {
        // Oracle: best of 1e5 random unit vectors, then a stochastic hill climb
        // with shrinking steps from that best sample.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_matrix(&mut rng, 3);
        let mut best_vec = random_unit(&mut rng, 3);
        let mut best = a.mul_vec(&best_vec).norm();
        for _ in 0..100_000 {
            let psi = random_unit(&mut rng, 3);
            let gain = a.mul_vec(&psi).norm();
            if gain > best {
                best = gain;
                best_vec = psi;
            }
        }
        let mut step = 0.1;
        for _ in 0..100_000 {
            let kick = random_unit(&mut rng, 3).scale(c(step, 0.0));
            let trial = CVec::new(
                best_vec.iter().zip(kick.iter()).map(|(x, k)| x + k).collect(),
            )
            .normalized()
            .unwrap();
            let gain = a.mul_vec(&trial).norm();
            if gain > best {
                best = gain;
                best_vec = trial;
            } else {
                step = (step * 0.999).max(1e-6);
            }
        }
        let norm = a.spectral_norm();
        assert!(best <= norm * (1.0 + 1e-12));
        assert!((norm - best) / norm < 1e-6, "monte carlo {best} vs {norm}");
        let (sigma, v) = a.dominant_singular();
        assert!(((a.mul_vec(&v).norm() - sigma) / sigma).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_is_submultiplicative_and_adjoint_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            let na = a.spectral_norm();
            assert!((&a * &b).spectral_norm() <= na * b.spectral_norm() + 1e-12);
            assert!((na - a.adjoint().spectral_norm()).abs() <= 1e-12 * na);
        }
    }

    #[test]
    fn restart_seed_round_trip() {
        let before = restart_seed();
        set_restart_seed(before);
        assert_eq!(restart_seed(), before);
    }
}
