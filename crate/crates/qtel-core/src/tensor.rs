//! Dense complex vectors and matrices sized for protocol work.
//!
//! Dimensions in this crate stay small (products of local dimensions up to a
//! guard of 2^20 amplitudes), so everything is stored row-major in a flat
//! `Vec<Complex64>` and operations are written for clarity over blocking.
//!
//! Index conventions: storage and the `get`/`set` accessors are 0-based like
//! any Rust container. Protocol-level index arithmetic (basis labels i, j, k,
//! cyclic shifts) is 1-based and cyclic; see [`index_mod`] and
//! [`cyclic_shift_power`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_vec(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, value: Complex64) {
        self.data[i] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Kronecker product. Component (i, j) of the result sits at the
    /// composite position i * other.dim() + j, i.e. the left factor is the
    /// major index.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Self { data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows of (re, im) pairs. All rows must have the
    /// same length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let ncols = rows[0].len();
        if ncols == 0 {
            return Err(Error::Dimension("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    ncols
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector::from_vec((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn set_column(&mut self, c: usize, v: &ComplexVector) {
        debug_assert_eq!(v.dim(), self.rows);
        for r in 0..self.rows {
            self.set(r, c, v.get(r));
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let lhs = self.get(r, k);
                if lhs.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + lhs * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} to a dim-{} vector",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let mut out = ComplexVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self.get(r, c) * v.get(c);
            }
            out.set(r, acc);
        }
        Ok(out)
    }

    /// Kronecker product with the left factor as the major index, matching
    /// [`ComplexVector::tensor`]: entry ((r1, r2), (c1, c2)) of the result is
    /// self\[r1, c1\] * other\[r2, c2\].
    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |r, c| {
                let (r1, r2) = (r / other.rows, r % other.rows);
                let (c1, c2) = (c / other.cols, c % other.cols);
                self.get(r1, c1) * other.get(r2, c2)
            },
        )
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of M†M from the identity, the quantity unitarity
    /// checks bound.
    pub fn unitarity_defect(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "unitarity is only defined for square matrices, got {}x{}",
                self.rows, self.cols
            )));
        }
        let gram = self.adjoint().mul(self)?;
        Ok(gram.max_abs_diff(&Self::identity(self.rows)))
    }
}

/// Whether M†M = I entrywise within `tol`. Errors on non-square input.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(m.unitarity_defect()? <= tol)
}

/// Wraps a 1-based basis label into 1..=n. Accepts any signed value, so
/// cyclic label arithmetic like k - t + 1 can be passed through directly.
pub fn index_mod(x: i64, n: usize) -> usize {
    debug_assert!(n > 0);
    ((x - 1).rem_euclid(n as i64) + 1) as usize
}

/// Signed power of the basic cyclic shift on n levels.
///
/// The generator maps basis vector e_j to e_(j+1), wrapping e_n back to e_1,
/// so its matrix has ones on the subdiagonal and in the upper-right corner.
/// Negative powers give the inverse shift.
pub fn cyclic_shift_power(n: usize, power: i64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 1..=n {
        let target = index_mod(j as i64 + power, n);
        m.set(target - 1, j - 1, Complex64::new(1.0, 0.0));
    }
    m
}

/// Result of a Schmidt decomposition of a bipartite coefficient matrix.
///
/// `matrix = left_basis * diag(sqrt(lambdas)) * right_basis†` with both bases
/// column-orthonormal and `lambdas` descending. The number of retained
/// columns is min(rows, cols).
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    pub lambdas: Vec<f64>,
    pub left_basis: ComplexMatrix,
    pub right_basis: ComplexMatrix,
}

impl SchmidtResult {
    /// Multiplies the three factors back together; used by callers to bound
    /// decomposition error.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let k = self.lambdas.len();
        let mut scaled = self.left_basis.clone();
        for (j, lambda) in self.lambdas.iter().enumerate() {
            let s = Complex64::new(lambda.sqrt(), 0.0);
            for r in 0..scaled.rows() {
                let v = self.left_basis.get(r, j) * s;
                scaled.set(r, j, v);
            }
        }
        debug_assert_eq!(k, self.right_basis.cols());
        scaled.mul(&self.right_basis.adjoint())
    }
}

/// Schmidt decomposition via a one-sided Jacobi singular value decomposition.
///
/// Columns of a working copy are orthogonalized pairwise with complex Givens
/// rotations accumulated into the right basis; singular values are the final
/// column norms. Quadratic convergence makes the sweep cap generous for the
/// dimensions this crate handles.
pub fn schmidt(m: &ComplexMatrix) -> Result<SchmidtResult> {
    let fro_sq = m.frobenius_norm_sq();
    if fro_sq <= 1e-24 {
        return Err(Error::Degenerate(
            "schmidt decomposition of a zero matrix".into(),
        ));
    }
    if !fro_sq.is_finite() {
        return Err(Error::Validation("matrix contains non-finite entries".into()));
    }

    let (rows, cols) = (m.rows(), m.cols());
    let mut work = m.clone();
    let mut right = ComplexMatrix::identity(cols);

    let tol = 1e-14;
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut converged = true;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let wp = work.column(p);
                let wq = work.column(q);
                let alpha = wp.norm_sq();
                let beta = wq.norm_sq();
                let gamma = wp.inner(&wq);
                if gamma.norm() <= tol * (alpha * beta).sqrt() || alpha * beta < 1e-60 {
                    continue;
                }
                converged = false;

                let phase = gamma / gamma.norm();
                let zeta = (beta - alpha) / (2.0 * gamma.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                // Column update [wp', wq'] = [wp, wq] * J with
                // J = [[c, s*phase], [-s*conj(phase), c]].
                let cc = Complex64::new(c, 0.0);
                let sp = phase * s;
                let new_p = wp.scale(cc).sub(&wq.scale(sp.conj()));
                let new_q = wp.scale(sp).add(&wq.scale(cc));
                work.set_column(p, &new_p);
                work.set_column(q, &new_q);

                for r in 0..cols {
                    let vp = right.get(r, p);
                    let vq = right.get(r, q);
                    right.set(r, p, vp * cc - vq * sp.conj());
                    right.set(r, q, vp * sp + vq * cc);
                }
            }
        }
        if converged {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| work.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let keep = rows.min(cols);
    let mut lambdas = Vec::with_capacity(keep);
    let mut left = ComplexMatrix::zeros(rows, keep);
    let mut right_kept = ComplexMatrix::zeros(cols, keep);
    let rank_tol = 1e-13 * fro_sq.sqrt().max(1.0);

    let mut left_cols: Vec<ComplexVector> = Vec::with_capacity(keep);
    for (slot, &j) in order.iter().take(keep).enumerate() {
        let sigma = norms[j];
        lambdas.push(sigma * sigma);
        right_kept.set_column(slot, &right.column(j));
        if sigma > rank_tol {
            let u = work.column(j).scale(Complex64::new(1.0 / sigma, 0.0));
            left.set_column(slot, &u);
            left_cols.push(u);
        } else {
            lambdas[slot] = 0.0;
            let u = orthonormal_completion_vector(&left_cols, rows)?;
            left.set_column(slot, &u);
            left_cols.push(u);
        }
    }

    Ok(SchmidtResult {
        lambdas,
        left_basis: left,
        right_basis: right_kept,
    })
}

/// Picks the computational basis vector with the largest residual after
/// projecting out `existing`, normalized. Deterministic: ties resolve to the
/// lowest index.
fn orthonormal_completion_vector(
    existing: &[ComplexVector],
    dim: usize,
) -> Result<ComplexVector> {
    let mut best: Option<(f64, ComplexVector)> = None;
    for i in 0..dim {
        let mut candidate = ComplexVector::zeros(dim);
        candidate.set(i, Complex64::new(1.0, 0.0));
        for u in existing {
            let overlap = u.inner(&candidate);
            candidate = candidate.sub(&u.scale(overlap));
        }
        let residual = candidate.norm();
        if best.as_ref().map_or(true, |(n, _)| residual > *n) {
            best = Some((residual, candidate));
        }
    }
    let (norm, v) = best.ok_or_else(|| Error::Degenerate("empty completion space".into()))?;
    if norm < 1e-8 {
        return Err(Error::Degenerate(
            "no computational basis vector has a usable residual".into(),
        ));
    }
    Ok(v.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Extends a set of orthonormal columns to a full n x n unitary, appending
/// completion vectors chosen deterministically from the computational basis.
pub fn complete_to_unitary(columns: &[ComplexVector], dim: usize) -> Result<ComplexMatrix> {
    for (idx, c) in columns.iter().enumerate() {
        if c.dim() != dim {
            return Err(Error::Dimension(format!(
                "completion column {} has dim {}, expected {}",
                idx,
                c.dim(),
                dim
            )));
        }
    }
    if columns.len() > dim {
        return Err(Error::Dimension(format!(
            "{} columns cannot be orthonormal in dimension {}",
            columns.len(),
            dim
        )));
    }
    let mut cols: Vec<ComplexVector> = columns.to_vec();
    while cols.len() < dim {
        let next = orthonormal_completion_vector(&cols, dim)?;
        cols.push(next);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    Ok(m)
}
