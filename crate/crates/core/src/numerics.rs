//! Small dense complex linear algebra.
//!
//! Everything here is sized for space-time codes: matrices are at most a
//! few dozen entries on a side, so the routines favour clarity and a fixed
//! column order over blocking or pivoting. In particular the QR
//! factorization is classical Gram–Schmidt without pivoting, because the
//! position of the zeros in `R` is what decides fast decodability.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::{Error, Result, C64};

/// Default floor on orthogonalized column norms in [`gram_schmidt_qr`].
pub const DEFAULT_NORM_FLOOR: f64 = 1e-12;

/// Relative threshold under which an inner product `<f_j, e_i>` is a
/// structural zero: `|<f_j, e_i>| < ZERO_REL_TOL * ||f_j||`.
pub const ZERO_REL_TOL: f64 = 1e-9;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        CMat { rows: rows.len(), cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<V: AsRef<[C64]>>(columns: &[V]) -> Self {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        Self::from_fn(rows, columns.len(), |i, j| columns[j].as_ref()[i])
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, k: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += k * rhs`
    pub fn add_scaled(&mut self, rhs: &CMat, k: C64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * k;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |(A^H A - I)_{ij}|`, zero for a matrix with orthonormal columns.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.cols))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RMat { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> RMat {
        RMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &RMat) -> RMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        RMat::from_fn(self.rows, rhs.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| (0..self.cols).map(|k| self[(i, k)] * x[k]).sum()).collect()
    }

    /// `G^T G`
    pub fn gram(&self) -> RMat {
        self.transpose().mul(self)
    }

    pub fn max_abs_diff(&self, rhs: &RMat) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: f64) -> RMat {
        RMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Embeds the real matrix as a complex one with zero imaginary parts.
    pub fn to_complex(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| C64::new(self[(i, j)], 0.0))
    }
}

impl Index<(usize, usize)> for RMat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `x ↦ [Re x, Im x]`
#[inline]
pub fn tilde(x: C64) -> [f64; 2] {
    [x.re, x.im]
}

/// Interleaved real/imaginary stacking `[Re x1, Im x1, Re x2, Im x2, ...]`.
pub fn tilde_vec(x: &[C64]) -> Vec<f64> {
    x.iter().flat_map(|z| tilde(*z)).collect()
}

/// Inverse of [`tilde_vec`]. Panics on odd length.
pub fn untilde_vec(x: &[f64]) -> Vec<C64> {
    assert!(x.len().is_multiple_of(2), "odd-length real vector");
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Real 2×2 representation of multiplication by `x`: `[[Re, -Im], [Im, Re]]`.
#[inline]
pub fn check(x: C64) -> [[f64; 2]; 2] {
    [[x.re, -x.im], [x.im, x.re]]
}

/// `[[-Re, -Im], [-Im, Re]]`.
///
/// Note the sign: with this operator, `tilde(x * conj(y)) = -bar_check(x) * tilde(y)`.
#[inline]
pub fn bar_check(x: C64) -> [[f64; 2]; 2] {
    [[-x.re, -x.im], [-x.im, x.re]]
}

/// Applies [`check`] entrywise, giving a `2r × 2c` real matrix.
pub fn check_mat(a: &CMat) -> RMat {
    let mut out = RMat::zeros(2 * a.rows(), 2 * a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let b = check(a[(i, j)]);
            for (di, row) in b.iter().enumerate() {
                for (dj, v) in row.iter().enumerate() {
                    out[(2 * i + di, 2 * j + dj)] = *v;
                }
            }
        }
    }
    out
}

/// Column-major stacking of a matrix.
pub fn vec(x: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(x.rows() * x.cols());
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec`].
pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| v[j * rows + i])
}

/// Hermitian inner product `<a, b> = a^T b*`.
#[inline]
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Thin QR factors `F = Q R` with `Q = [e_1 | ... | e_k]` and
/// `R[i][j] = <f_j, e_i>` above the diagonal, `R[i][i] = ||d_i||`.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: CMat,
    pub r: CMat,
    pub col_norm_floor: f64,
}

impl QrFactors {
    /// `Q R`, which reproduces the factored matrix.
    pub fn reconstruct(&self) -> CMat {
        self.q.mul(&self.r)
    }
}

/// Classical Gram–Schmidt QR in the original column order, with the
/// default structural-zero threshold [`ZERO_REL_TOL`].
pub fn gram_schmidt_qr(f: &CMat, norm_floor: f64) -> Result<QrFactors> {
    gram_schmidt_qr_with_tol(f, norm_floor, ZERO_REL_TOL)
}

/// Classical Gram–Schmidt with one re-orthogonalization pass (CGS2).
///
/// Column `j` is orthogonalized against `e_1..e_{j-1}` twice and the two
/// projection coefficients are summed into `R[i][j]`. A coefficient below
/// `zero_rel_tol * ||f_j||` is stored as an exact zero and its projection
/// is not subtracted, so that inner products that vanish identically
/// appear as zeros of `R`.
pub fn gram_schmidt_qr_with_tol(f: &CMat, norm_floor: f64, zero_rel_tol: f64) -> Result<QrFactors> {
    let (m, k) = (f.rows(), f.cols());
    let mut q = CMat::zeros(m, k);
    let mut r = CMat::zeros(k, k);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..k {
        let fj = f.column(j);
        let fj_norm = norm(&fj);
        let mut d = fj.clone();
        let mut coeff = vec![C64::zero(); j];
        for _pass in 0..2 {
            for (i, e) in basis.iter().enumerate() {
                let c = inner(&d, e);
                coeff[i] += c;
                for (dk, ek) in d.iter_mut().zip(e) {
                    *dk -= c * ek;
                }
            }
        }
        for (i, c) in coeff.iter().enumerate() {
            if c.norm() < zero_rel_tol * fj_norm {
                // undo the (negligible) projection so the zero is structural
                for (dk, ek) in d.iter_mut().zip(&basis[i]) {
                    *dk += c * ek;
                }
                r[(i, j)] = C64::zero();
            } else {
                r[(i, j)] = *c;
            }
        }
        let dn = norm(&d);
        if !(dn >= norm_floor) {
            return Err(Error::RankDeficient { column: j });
        }
        let e: Vec<C64> = d.iter().map(|z| z / dn).collect();
        r[(j, j)] = C64::new(dn, 0.0);
        q.set_column(j, &e);
        basis.push(e);
    }
    Ok(QrFactors { q, r, col_norm_floor: norm_floor })
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &CMat) -> C64 {
    assert_eq!(a.rows(), a.cols(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut det = C64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[(x, c)].norm_sqr().total_cmp(&m[(y, c)].norm_sqr()))
            .unwrap_or(c);
        if m[(p, c)].is_zero() {
            return C64::zero();
        }
        if p != c {
            for j in 0..n {
                let t = m[(p, j)];
                m[(p, j)] = m[(c, j)];
                m[(c, j)] = t;
            }
            det = -det;
        }
        let pivot = m[(c, c)];
        det *= pivot;
        for i in c + 1..n {
            let factor = m[(i, c)] / pivot;
            if factor.is_zero() {
                continue;
            }
            for j in c..n {
                let v = m[(c, j)];
                m[(i, j)] -= factor * v;
            }
        }
    }
    det
}

/// Eigenvalues of a Hermitian matrix (cyclic complex Jacobi), ascending.
///
/// Only the Hermitian part of `a` is used; the strictly lower triangle is
/// assumed to be the conjugate of the upper one.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let scale = m.frobenius_norm_sqr().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m[(p, q)];
                let abs_g = g.norm();
                if abs_g <= 1e-300 {
                    continue;
                }
                let phase = g / abs_g;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * abs_g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) on (p, q) followed by a real rotation
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = akp * jpp + akq * jqp;
                    m[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                m[(p, q)] = C64::zero();
                m[(q, p)] = C64::zero();
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}
