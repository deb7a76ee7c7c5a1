//! Dense complex matrices with the handful of factorizations the oracle needs.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(T::one(), T::zero());
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

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry magnitude of `self - self†`.
    pub fn hermiticity_residual(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Solves `self · x = b` by LU with partial pivoting, consuming the matrix.
    pub fn solve(mut self, b: &[C<T>]) -> Result<Vec<C<T>>> {
        if !self.is_square() || b.len() != self.rows {
            return Err(Error::InvalidInput("solve: dimension mismatch".into()));
        }
        let n = self.rows;
        let mut x = b.to_vec();
        let scale = self.max_abs();
        let tiny = scale * T::epsilon() * T::from_count(n.max(1));
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, self[(i, k)].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) {
                return Err(Error::NumericalFailure(format!(
                    "singular matrix in LU solve (pivot {pmax:e} at column {k})"
                )));
            }
            if p != k {
                for j in 0..n {
                    self.data.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let inv_pivot = self[(k, k)].inv();
            for i in k + 1..n {
                let l = self[(i, k)] * inv_pivot;
                if l.norm_sqr() == T::zero() {
                    continue;
                }
                for j in k..n {
                    let u = self[(k, j)];
                    self[(i, j)] = self[(i, j)] - l * u;
                }
                let xk = x[k];
                x[i] = x[i] - l * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..n {
                acc = acc - self[(k, j)] * x[j];
            }
            x[k] = acc / self[(k, k)];
        }
        Ok(x)
    }

    /// `true` when `self + shift·I` admits a Cholesky factorization, i.e. the
    /// smallest eigenvalue of the Hermitian part exceeds `-shift`.
    pub fn is_positive_semidefinite(&self, shift: T) -> bool {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re + shift;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return false;
            }
            let djj = d.sqrt();
            l[(j, j)] = C::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = (self[(i, j)] + self[(j, i)].conj()) * T::lit(0.5);
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        true
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Unitary reduction `A = Q H Q†` with `H` upper Hessenberg.
///
/// Shifted systems `(H - z I) y = r` then cost O(n²) each, which makes
/// frequency sweeps over a fixed generator cheap.
#[derive(Clone, Debug)]
pub struct Hessenberg<T> {
    h: DenseMatrix<T>,
    /// Householder vectors; reflector k acts on rows/cols `k+1..n`.
    reflectors: Vec<(usize, Vec<C<T>>)>,
}

impl<T: Real> Hessenberg<T> {
    pub fn new(mut a: DenseMatrix<T>) -> Self {
        assert!(a.is_square(), "Hessenberg reduction needs a square matrix");
        let n = a.rows;
        let mut reflectors = Vec::new();
        for k in 0..n.saturating_sub(2) {
            let x: Vec<C<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
            let norm = x.iter().map(|z| z.norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt();
            if norm == T::zero() {
                continue;
            }
            let x0 = x[0];
            let phase = if x0.norm() > T::zero() {
                x0 / x0.norm()
            } else {
                C::new(T::one(), T::zero())
            };
            let alpha = -phase * norm;
            let mut v = x;
            v[0] = v[0] - alpha;
            let vnorm2 = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |s, w| s + w);
            if vnorm2 == T::zero() {
                continue;
            }
            let inv = T::lit(2.0) / vnorm2;
            for z in v.iter_mut() {
                *z = *z * inv.sqrt();
            }
            // v now satisfies P = I - v v†
            for j in 0..n {
                let s = v.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (r, vr)| {
                    acc + vr.conj() * a[(k + 1 + r, j)]
                });
                for (r, vr) in v.iter().enumerate() {
                    a[(k + 1 + r, j)] = a[(k + 1 + r, j)] - *vr * s;
                }
            }
            for i in 0..n {
                let s = v.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (r, vr)| {
                    acc + a[(i, k + 1 + r)] * *vr
                });
                for (r, vr) in v.iter().enumerate() {
                    a[(i, k + 1 + r)] = a[(i, k + 1 + r)] - s * vr.conj();
                }
            }
            for i in k + 2..n {
                a[(i, k)] = C::new(T::zero(), T::zero());
            }
            reflectors.push((k, v));
        }
        Self { h: a, reflectors }
    }

    pub fn dim(&self) -> usize {
        self.h.rows
    }

    pub fn hessenberg(&self) -> &DenseMatrix<T> {
        &self.h
    }

    /// `Q† x` for a column vector.
    pub fn apply_q_adjoint(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = x.to_vec();
        for (k, v) in &self.reflectors {
            let s = v.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (r, vr)| {
                acc + vr.conj() * y[k + 1 + r]
            });
            for (r, vr) in v.iter().enumerate() {
                y[k + 1 + r] = y[k + 1 + r] - *vr * s;
            }
        }
        y
    }

    /// `pᵀ Q` for a row vector `p`.
    pub fn apply_row_q(&self, p: &[C<T>]) -> Vec<C<T>> {
        let mut y = p.to_vec();
        for (k, v) in &self.reflectors {
            let s = v
                .iter()
                .enumerate()
                .fold(C::new(T::zero(), T::zero()), |acc, (r, vr)| acc + y[k + 1 + r] * *vr);
            for (r, vr) in v.iter().enumerate() {
                y[k + 1 + r] = y[k + 1 + r] - s * vr.conj();
            }
        }
        y
    }

    /// Solves `(a·H + z·I) y = r` where `H` is the stored Hessenberg factor.
    pub fn solve_shifted(&self, a: C<T>, z: C<T>, r: &[C<T>]) -> Result<Vec<C<T>>> {
        let n = self.dim();
        if r.len() != n {
            return Err(Error::InvalidInput("solve_shifted: dimension mismatch".into()));
        }
        let mut b = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                b[(i, j)] = a * self.h[(i, j)];
            }
            b[(i, i)] = b[(i, i)] + z;
        }
        let tiny = b.max_abs() * T::epsilon() * T::from_count(n.max(1));
        let mut y = r.to_vec();
        for k in 0..n.saturating_sub(1) {
            if b[(k + 1, k)].norm() > b[(k, k)].norm() {
                for j in k..n {
                    let t = b[(k, j)];
                    b[(k, j)] = b[(k + 1, j)];
                    b[(k + 1, j)] = t;
                }
                y.swap(k, k + 1);
            }
            let piv = b[(k, k)];
            if !(piv.norm() > tiny) {
                return Err(Error::NumericalFailure(format!(
                    "singular shifted Hessenberg system at row {k}"
                )));
            }
            let l = b[(k + 1, k)] / piv;
            if l.norm_sqr() > T::zero() {
                for j in k..n {
                    let u = b[(k, j)];
                    b[(k + 1, j)] = b[(k + 1, j)] - l * u;
                }
                let yk = y[k];
                y[k + 1] = y[k + 1] - l * yk;
            }
        }
        for k in (0..n).rev() {
            if !(b[(k, k)].norm() > tiny) {
                return Err(Error::NumericalFailure(format!(
                    "singular shifted Hessenberg system at row {k}"
                )));
            }
            let mut acc = y[k];
            for j in k + 1..n {
                acc = acc - b[(k, j)] * y[j];
            }
            y[k] = acc / b[(k, k)];
        }
        Ok(y)
    }
}

/// Solves a small real system by Gaussian elimination with partial pivoting.
pub fn solve_real<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if !(a[p][k].abs() > T::zero()) {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                let u = a[k][j];
                a[i][j] = a[i][j] - l * u;
            }
            let bk = b[k];
            b[i] = b[i] - l * bk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc = acc - a[k][j] * b[j];
        }
        b[k] = acc / a[k][k];
    }
    b.iter().all(|x| x.is_finite()).then_some(b)
}
