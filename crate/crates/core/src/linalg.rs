//! Small dense complex linear algebra for the truncation oracle.
//!
//! Only what the oracle needs: products, adjoints, a complete Householder QR
//! and singular values by one-sided (Hestenes) Jacobi rotations.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Columns `from..` as a new matrix.
    pub fn columns_from(&self, from: usize) -> Self {
        Self::from_fn(self.rows, self.cols - from, |i, j| self[(i, j + from)])
    }

    /// Block-diagonal `I_copies ⊗ self`.
    pub fn kron_identity(&self, copies: usize) -> Self {
        let mut out = Self::zeros(self.rows * copies, self.cols * copies);
        for b in 0..copies {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out[(b * self.rows + i, b * self.cols + j)] = self[(i, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> T {
        singular_values(self).first().copied().unwrap_or_else(T::zero)
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
}

/// `⟨a, b⟩ = Σ a_i conj(b_i)`, linear in the first argument.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (&x, &y)| acc + x * y.conj())
}

/// Complete QR factorisation `A = Q R` by Householder reflections.
pub struct HouseholderQr<T: Real> {
    /// Unitary, `rows × rows`.
    pub q: CMatrix<T>,
    /// Upper trapezoidal, `rows × cols`.
    pub r: CMatrix<T>,
}

impl<T: Real> HouseholderQr<T> {
    pub fn new(a: &CMatrix<T>) -> Self {
        let m = a.rows();
        let n = a.cols();
        let mut r = a.clone();
        // Q^H accumulated by applying each reflector to the identity
        let mut qh = CMatrix::identity(m);
        for j in 0..n.min(m.saturating_sub(1)) {
            let norm = (j..m).fold(T::zero(), |acc, i| acc + r[(i, j)].norm_sqr()).sqrt();
            if norm.is_zero() {
                continue;
            }
            let x0 = r[(j, j)];
            let phase = if x0.is_zero() { Complex::one() } else { x0 / x0.norm() };
            let alpha = -phase * norm;
            let mut v: Vec<Complex<T>> = (j..m).map(|i| r[(i, j)]).collect();
            v[0] = v[0] - alpha;
            let vnorm = vec_norm(&v);
            if vnorm.is_zero() {
                continue;
            }
            for c in v.iter_mut() {
                *c = *c / vnorm;
            }
            reflect(&mut r, &v, j);
            reflect(&mut qh, &v, j);
        }
        Self { q: qh.adjoint(), r }
    }

    /// Numerical rank: diagonal entries of `R` above `rel_tol` times the largest column norm of `A`.
    pub fn rank(&self, a: &CMatrix<T>, rel_tol: T) -> usize {
        let scale = (0..a.cols())
            .map(|j| vec_norm(&a.column(j)))
            .fold(T::zero(), T::max);
        let threshold = rel_tol * scale;
        (0..a.cols().min(a.rows()))
            .filter(|&k| self.r[(k, k)].norm() > threshold)
            .count()
    }
}

// rows offset.. of `m` ← (I − 2 v v^H) rows offset..
fn reflect<T: Real>(m: &mut CMatrix<T>, v: &[Complex<T>], offset: usize) {
    let two = T::lit(2.0);
    for col in 0..m.cols() {
        let dot = v
            .iter()
            .enumerate()
            .fold(Complex::zero(), |acc, (i, vi)| acc + vi.conj() * m[(offset + i, col)]);
        if dot.is_zero() {
            continue;
        }
        for (i, &vi) in v.iter().enumerate() {
            m[(offset + i, col)] = m[(offset + i, col)] - vi * dot * two;
        }
    }
}

/// Singular values in descending order (one-sided Jacobi on the columns).
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    // work on the orientation with fewer columns
    let work = if a.cols() > a.rows() { a.adjoint() } else { a.clone() };
    let m = work.rows();
    let n = work.cols();
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| work.column(j)).collect();
    let tol = T::epsilon() * T::count(m.max(1));
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = cols[p].iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
                let beta = cols[q].iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
                let gamma = inner(&cols[q], &cols[p]); // a_p^H a_q
                let g = gamma.norm();
                if g.is_zero() || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (a_p, e^{-iφ} a_q) as a real pair
                let phase = gamma / g;
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = (T::one() + t * t).sqrt().recip();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let b = *y * phase.conj();
                    let nx = *x * cs - b * sn;
                    let ny = *x * sn + b * cs;
                    *x = nx;
                    *y = ny;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<T> = cols.iter().map(|c| vec_norm(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn sample(m: usize, n: usize) -> CMatrix<f64> {
        CMatrix::from_fn(m, n, |i, j| {
            let x = (i * 7 + j * 13) as f64;
            C::new((x * 0.37).sin(), (x * 0.11 + 1.0).cos())
        })
    }

    #[test]
    fn qr_reconstructs_and_is_unitary() {
        let a = sample(7, 4);
        let qr = HouseholderQr::new(&a);
        let back = qr.q.matmul(&qr.r);
        for i in 0..7 {
            for j in 0..4 {
                assert!((back[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
        let qhq = qr.q.adjoint().matmul(&qr.q);
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qhq[(i, j)] - C::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        for i in 0..7 {
            for j in 0..i.min(4) {
                assert!(qr.r[(i, j)].norm() < 1e-12);
            }
        }
        assert_eq!(qr.rank(&a, 1e-10), 4);
    }

    #[test]
    fn complement_is_orthogonal_to_range() {
        let a = sample(6, 2);
        let qr = HouseholderQr::new(&a);
        let comp = qr.q.columns_from(2);
        let cross = comp.adjoint().matmul(&a);
        assert!(cross.frobenius_norm() < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let mut d = CMatrix::<f64>::zeros(3, 3);
        d[(0, 0)] = C::new(0.0, -3.0);
        d[(1, 1)] = C::new(1.0, 0.0);
        d[(2, 2)] = C::new(0.0, 2.0);
        let s = singular_values(&d);
        assert_eq!(s.len(), 3);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_frobenius_identity() {
        let a = sample(9, 5);
        let s = singular_values(&a);
        let sum: f64 = s.iter().map(|x| x * x).sum();
        assert!((sum - a.frobenius_norm().powi(2)).abs() < 1e-10);
        let wide = singular_values(&a.adjoint());
        for (x, y) in s.iter().zip(&wide) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_has_zero_singular_value() {
        let a = CMatrix::from_fn(4, 3, |i, j| C::new((i + 1) as f64 * (j + 1) as f64, 0.0));
        let s = singular_values(&a);
        assert!(s[1] < 1e-12 * s[0]);
        assert_eq!(HouseholderQr::new(&a).rank(&a, 1e-10), 1);
    }
}
