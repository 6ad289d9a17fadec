//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything works on row-major [`ComplexMatrix`] values whose dimension is
//! at most a few dozen. The eigensolver is a cyclic Jacobi iteration with
//! complex rotations, chosen for determinism and accuracy over asymptotic
//! speed; at these sizes it beats the bookkeeping cost of anything fancier.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

/// Default cap on Jacobi sweeps. Convergence is quadratic, so a run that
/// needs more than a handful of sweeps indicates broken input.
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Threshold below which a Gram-Schmidt residual counts as linearly
/// dependent and the candidate vector is skipped.
pub const COMPLETION_THRESHOLD: f64 = 1e-8;

/// Which tensor factor a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Square matrix with `entries` on the diagonal.
    pub fn from_diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(ComplexMatrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    fn require_square(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.rows)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += aik * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= factor;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute difference between two matrices.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Max |M - M^dag| over all entries; zero for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            dev = dev.max(self.get(i, i).im.abs());
            for j in (i + 1)..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Max |U^dag U - I| over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let gram = self.adjoint().mul(self);
        gram.max_abs_diff(&Self::identity(self.rows))
    }

    /// Kronecker product, row-major convention: index `i * rhs.rows + k`
    /// pairs level `i` of `self` with level `k` of `rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self.get(i, j);
                if aij == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, aij * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Traces out one factor of a bipartite operator on `dim_a * dim_b`.
    pub fn partial_trace(&self, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<Self> {
        let n = self.require_square()?;
        if n != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                got: n,
            });
        }
        match keep {
            Subsystem::A => {
                let mut out = Self::zeros(dim_a, dim_a);
                for a in 0..dim_a {
                    for a2 in 0..dim_a {
                        let mut s = C64::new(0.0, 0.0);
                        for b in 0..dim_b {
                            s += self.get(a * dim_b + b, a2 * dim_b + b);
                        }
                        out.set(a, a2, s);
                    }
                }
                Ok(out)
            }
            Subsystem::B => {
                let mut out = Self::zeros(dim_b, dim_b);
                for b in 0..dim_b {
                    for b2 in 0..dim_b {
                        let mut s = C64::new(0.0, 0.0);
                        for a in 0..dim_a {
                            s += self.get(a * dim_b + b, a * dim_b + b2);
                        }
                        out.set(b, b2, s);
                    }
                }
                Ok(out)
            }
        }
    }

    /// U * self * U^dag.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.mul(self).mul(&u.adjoint())
    }

    /// Eigendecomposition of a Hermitian matrix with the default sweep cap.
    pub fn hermitian_eig(&self) -> Result<Spectrum> {
        self.hermitian_eig_capped(DEFAULT_MAX_SWEEPS)
    }

    /// Cyclic Jacobi eigendecomposition with an explicit sweep cap.
    ///
    /// Each pivot (p, q) is zeroed by a complex rotation: the pivot's phase
    /// is factored out so the remaining 2x2 problem is real symmetric, then
    /// the numerically stable small-angle tangent root is used. Convergence
    /// is declared when the off-diagonal Frobenius mass falls below
    /// machine epsilon times the input Frobenius norm.
    pub fn hermitian_eig_capped(&self, max_sweeps: usize) -> Result<Spectrum> {
        let n = self.require_square()?;
        let tols = tol::current();
        let dev = self.hermiticity_deviation();
        // NaN deviations must fail, so the comparison is written to reject them.
        if dev.is_nan() || dev > tols.hermiticity {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tols.hermiticity,
            });
        }
        if n == 0 {
            return Ok(Spectrum {
                eigenvalues: Vec::new(),
                eigenvectors: ComplexMatrix::zeros(0, 0),
            });
        }

        // Work on the Hermitian average so the iteration sees exactly
        // Hermitian data even when the input carries tolerated asymmetry.
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = C64::new(self.get(i, i).re, 0.0);
            for j in (i + 1)..n {
                let m = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                a[i * n + j] = m;
                a[j * n + i] = m.conj();
            }
        }
        let mut v = ComplexMatrix::identity(n).data;

        let frob: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let threshold = f64::EPSILON * frob;
        // Pivots below this are skipped; a sweep that skips everything has
        // off-diagonal mass under `threshold` and terminates the loop.
        let pivot_cutoff = threshold / ((n * n) as f64 + 1.0);

        let mut converged = false;
        let mut off_norm = 0.0;
        for _ in 0..max_sweeps {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_sq += 2.0 * a[p * n + q].norm_sqr();
                }
            }
            off_norm = off_sq.sqrt();
            if off_norm <= threshold {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    let b = apq.norm();
                    if b <= pivot_cutoff {
                        continue;
                    }
                    let phase = apq / b;
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    let theta = (aqq - app) / (2.0 * b);
                    let t = if theta == 0.0 {
                        1.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let sp = phase * s;
                    let spc = phase.conj() * s;

                    // Columns: A <- A * U.
                    for i in 0..n {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        a[i * n + p] = aip * c - aiq * spc;
                        a[i * n + q] = aip * s + aiq * (phase.conj() * c);
                    }
                    // Rows: A <- U^dag * A.
                    for j in 0..n {
                        let apj = a[p * n + j];
                        let aqj = a[q * n + j];
                        a[p * n + j] = apj * c - aqj * sp;
                        a[q * n + j] = apj * s + aqj * (phase * c);
                    }
                    // The pivot block is known in closed form; writing it
                    // directly removes the rounding of the two-sided update.
                    a[p * n + p] = C64::new(app - t * b, 0.0);
                    a[q * n + q] = C64::new(aqq + t * b, 0.0);
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    // Restore exact Hermitian symmetry of the touched
                    // row/column pairs.
                    for i in 0..n {
                        if i != p && i != q {
                            a[i * n + p] = a[p * n + i].conj();
                            a[i * n + q] = a[q * n + i].conj();
                        }
                    }

                    // Accumulate eigenvectors: V <- V * U.
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = vip * c - viq * spc;
                        v[i * n + q] = vip * s + viq * (phase.conj() * c);
                    }
                }
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                sweeps: max_sweeps,
                off_norm,
            });
        }

        let raw: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap().then(i.cmp(&j)));

        let eigenvalues: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
        let mut eigenvectors = ComplexMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                eigenvectors.set(row, col, v[row * n + src]);
            }
        }
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    ///
    /// Eigenvalues inside the tolerated window below zero are clamped to
    /// zero; anything lower is rejected.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let eig = self.hermitian_eig()?;
        let tols = tol::current();
        let mut roots = Vec::with_capacity(eig.dim());
        for &lambda in eig.eigenvalues() {
            if lambda < -tols.psd {
                return Err(Error::NotPositive {
                    eigenvalue: lambda,
                    tolerance: tols.psd,
                });
            }
            roots.push(lambda.max(0.0).sqrt());
        }
        Ok(eig.assemble_with(&roots))
    }

    /// Operator norm of a Hermitian matrix: the largest |eigenvalue|.
    pub fn op_norm(&self) -> Result<f64> {
        let eig = self.hermitian_eig()?;
        Ok(eig
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs())))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; ties keep the solver's deterministic
/// order. Column `k` of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Assembles a spectrum from parts already known to be consistent:
    /// values sorted descending, columns orthonormal and aligned.
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Self {
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    /// Column `k` as an owned vector.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.eigenvectors.rows())
            .map(|r| self.eigenvectors.get(r, k))
            .collect()
    }

    /// V diag(eigenvalues) V^dag.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.assemble_with(&self.eigenvalues)
    }

    /// V diag(values) V^dag for caller-supplied diagonal values.
    pub fn assemble_with(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(values.len(), n);
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v.get(i, k) * values[k] * v.get(j, k).conj())
                .sum()
        })
    }
}

/// Hermitian inner product, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two vectors in the row-major index convention.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Extends orthonormal `seeds` to a full orthonormal basis of dimension
/// `dim` by Gram-Schmidt over the standard basis vectors in index order.
///
/// Candidates whose residual after projection is at or below
/// [`COMPLETION_THRESHOLD`] are skipped as linearly dependent. Projection
/// runs twice per candidate so the result stays orthonormal to machine
/// precision even at the larger dimensions used here.
pub fn orthonormal_completion(seeds: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = seeds.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in &basis {
                let overlap = inner(u, &w);
                if overlap == C64::new(0.0, 0.0) {
                    continue;
                }
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= overlap * ui;
                }
            }
        }
        let norm = vec_norm(&w);
        if norm > COMPLETION_THRESHOLD {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    assert_eq!(
        basis.len(),
        dim,
        "orthonormal completion fell short; seeds were not orthonormal"
    );
    basis
}
