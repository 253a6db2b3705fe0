//! Small dense complex linear algebra.
//!
//! Only what the two closed-form beamformers need: a Hermitian
//! eigensolver (cyclic Jacobi), a Cholesky solve for positive-definite
//! systems, and the two direction-finding routines built on them.
//! Everything is double precision and sized for `N_T <= 16`.

use std::ops::{Deref, Index, IndexMut};

pub use num_complex::Complex64;

use crate::error::{contract, Error, Result};

/// Largest matrix dimension the eigensolver accepts.
pub const MAX_DIM: usize = 16;
/// Off-diagonal Frobenius threshold, relative to `‖M‖_F`.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Allowed relative deviation from exact Hermitian symmetry.
const HERMITIAN_TOL: f64 = 1e-12;

/// A non-empty vector of finite complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(contract("complex vector must be non-empty"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(contract("complex vector entries must be finite"));
        }
        Ok(ComplexVector(entries))
    }

    pub fn zeros(len: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); len])
    }

    /// The `k`-th standard basis vector of length `len`.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self^H other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        inner(&self.0, &other.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.0 {
            *z *= s;
        }
    }

    /// Scales to unit norm and applies the phase convention. Returns `None`
    /// for the zero vector.
    pub fn normalized(mut self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        self.scale(1.0 / n);
        fix_phase(&mut self.0);
        Some(self)
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// `a^H b` for equal-length slices.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Rotates `v` so its largest-magnitude entry (first on ties) is real and
/// nonnegative.
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (k, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best = k;
            best_mag = m;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let rot = v[best].conj() / best_mag;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = Complex64::new(best_mag, 0.0);
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(contract(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(contract("matrix entries must be finite"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Matrix whose rows are the conjugate transposes of `rows`, i.e. row `k`
    /// holds `rows[k]^H`.
    pub fn from_adjoint_rows(rows: &[&[Complex64]], cols: usize) -> Self {
        Self::from_fn(rows.len(), cols, |r, c| rows[r][c].conj())
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

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> ComplexVector {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        ComplexVector(
            (0..self.rows)
                .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        Self::from_fn(self.rows, other.cols, |r, c| (0..self.cols).map(|k| self[(r, k)] * other[(k, c)]).sum())
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `G^H G`, the `cols x cols` Gram matrix.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = &self.data[r * n..(r + 1) * n];
            for i in 0..n {
                let ci = row[i].conj();
                for j in i..n {
                    g[(i, j)] += ci * row[j];
                }
            }
        }
        for i in 0..n {
            g[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                g[(j, i)] = g[(i, j)].conj();
            }
        }
        g
    }

    /// `self += weight * h h^H`.
    pub fn add_outer(&mut self, weight: f64, h: &[Complex64]) {
        assert!(self.is_square() && h.len() == self.rows);
        let n = self.rows;
        for i in 0..n {
            for j in 0..n {
                self.data[i * n + j] += h[i] * h[j].conj() * weight;
            }
        }
    }

    pub fn add_identity(&mut self, weight: f64) {
        assert!(self.is_square());
        for k in 0..self.rows {
            self[(k, k)].re += weight;
        }
    }

    /// Largest `|M_ij - conj(M_ji)|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors stored
/// as the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigResult {
    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(contract(format!("expected a square matrix, got {}x{}", m.rows, m.cols)));
    }
    if m.rows == 0 || m.rows > MAX_DIM {
        return Err(contract(format!("matrix dimension {} outside 1..={MAX_DIM}", m.rows)));
    }
    if m.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(contract("matrix entries must be finite"));
    }
    let fro = m.frobenius_norm();
    if m.hermitian_defect() > HERMITIAN_TOL * fro {
        return Err(contract("matrix is not Hermitian"));
    }
    Ok(())
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary,
/// then applies the classical real Jacobi rotation to the resulting real
/// symmetric 2x2 block. Ties between equal eigenvalues keep the order the
/// rotations left them in, so results are repeatable bit for bit.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigResult> {
    check_hermitian(m)?;
    let n = m.rows;
    let fro = m.frobenius_norm();

    // work on the exactly Hermitian part
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);

    if fro > 0.0 {
        let tol = JACOBI_TOL * fro;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<Complex64> = (0..n).map(|r| v[(r, src)]).collect();
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut col {
            *z /= nrm;
        }
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vectors[(r, dst)] = z;
        }
    }
    Ok(HermitianEigResult { eigenvalues, eigenvectors: vectors })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows;
    let z = a[(p, q)];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let phase_conj = z.conj() / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_finite() { theta.signum() / (theta.abs() + theta.hypot(1.0)) } else { 0.0 };
    if t == 0.0 {
        return;
    }
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // U restricted to the (p, q) plane
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = phase_conj * (-s);
    let uqq = phase_conj * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

fn not_pd(b: &ComplexMatrix) -> Error {
    let min_eigenvalue = hermitian_eig(b).map(|e| e.eigenvalues[0]).unwrap_or(f64::NAN);
    Error::NotPositiveDefinite { min_eigenvalue }
}

/// Solves `B x = v` for Hermitian positive-definite `B` via Cholesky.
pub fn solve_hermitian_pd(b: &ComplexMatrix, v: &[Complex64]) -> Result<ComplexVector> {
    check_hermitian(b)?;
    let n = b.rows;
    if v.len() != n {
        return Err(contract(format!("right-hand side has length {}, expected {n}", v.len())));
    }
    // lower-triangular L with B = L L^H; diagonal stored as real
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(not_pd(b));
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = v[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)].re;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)].re;
    }
    Ok(ComplexVector(x))
}

/// Unit `w` maximizing `|h^H w|^2 / (w^H B w)`.
///
/// With `A = h h^H` of rank one, the dominant eigenvector of `B^{-1} A` is
/// `B^{-1} h` up to scale, so a single Cholesky solve suffices.
pub fn max_gen_rayleigh_rank1(h: &[Complex64], b: &ComplexMatrix) -> Result<ComplexVector> {
    if h.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Err(contract("rank-one generalized Rayleigh quotient needs a nonzero h"));
    }
    solve_hermitian_pd(b, h)?
        .normalized()
        .ok_or_else(|| contract("solution of B x = h vanished"))
}

/// Unit `w` minimizing `‖G w‖^2`: the eigenvector of `G^H G` for its smallest
/// eigenvalue. Zero rows are allowed; `G = 0` yields the first basis vector.
pub fn min_norm_direction(g: &ComplexMatrix) -> Result<ComplexVector> {
    if g.cols == 0 {
        return Err(contract("leakage matrix needs at least one column"));
    }
    let eig = hermitian_eig(&g.gram())?;
    Ok(eig.eigenvector(0))
}
