//! Dense univariate polynomials with complex coefficients.
//!
//! Coefficients are stored in ascending order (`coeffs[k]` multiplies `z^k`).
//! Exact zero leading coefficients are trimmed so the degree is canonical;
//! the zero polynomial has no coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Convergence tolerance of the simultaneous root iteration.
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Relative coefficient threshold below which a remainder counts as zero.
pub const GCD_TOLERANCE: f64 = 1e-10;

const MAX_ROOT_ITERATIONS: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex::one())
    }

    /// The identity function `z`.
    pub fn identity() -> Self {
        Self::new(vec![Complex::zero(), Complex::one()])
    }

    /// `z - root`.
    pub fn linear_factor(root: Complex<T>) -> Self {
        Self::new(vec![-root, Complex::one()])
    }

    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| &acc * &Self::linear_factor(r))
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex<T> {
        self.coeffs.last().copied().unwrap_or_else(Complex::zero)
    }

    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::count(k))
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `Σ |c_k|`, an upper bound for `|p|` on the closed unit disk.
    pub fn coeff_abs_sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm())
    }

    pub fn max_coeff_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.leading().inv();
        let mut p = self.scale(inv);
        if let Some(last) = p.coeffs.last_mut() {
            *last = Complex::one();
        }
        p
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    ///
    /// Panics if `divisor` is the zero polynomial.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = divisor.leading().inv();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Complex::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let q = rem[k] * lead_inv;
            quot[k - dd] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k - dd + j] = rem[k - dd + j] - q * dc;
            }
            rem[k] = Complex::zero();
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Drops leading coefficients whose magnitude is at most `threshold`.
    pub fn trim_below(&self, threshold: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= threshold) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    /// Taylor coefficients of `self / den` up to degree `n`, where `den(0) != 0`.
    pub fn series_div(&self, den: &Self, n: usize) -> Vec<Complex<T>> {
        let d0_inv = den.coeff(0).inv();
        let mut out: Vec<Complex<T>> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeff(k);
            for j in 1..=k.min(den.coeffs.len().saturating_sub(1)) {
                acc = acc - den.coeffs[j] * out[k - j];
            }
            out.push(acc * d0_inv);
        }
        out
    }

    /// All complex roots with multiplicity, by Durand–Kerner iteration
    /// followed by a Newton polish on the original coefficients.
    pub fn roots(&self) -> Vec<Complex<T>> {
        let n = match self.degree() {
            None | Some(0) => return Vec::new(),
            Some(n) => n,
        };
        let monic = self.monic();
        if n == 1 {
            return vec![-monic.coeffs[0]];
        }
        // Fujiwara-type radius; all roots lie within twice this value.
        let radius = (1..=n)
            .map(|k| {
                let c = monic.coeffs[n - k].norm();
                c.powf(T::one() / T::count(k))
            })
            .fold(T::zero(), T::max)
            .max(T::lit(1e-3));
        let two_pi = T::lit(2.0) * T::PI();
        let mut z: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let angle = two_pi * T::count(k) / T::count(n) + T::lit(0.4);
                Complex::from_polar(radius, angle)
            })
            .collect();

        let tol = T::lit(ROOT_TOLERANCE).max(T::epsilon() * T::lit(64.0));
        for _ in 0..MAX_ROOT_ITERATIONS {
            let mut worst = T::zero();
            for i in 0..n {
                let zi = z[i];
                let mut denom = Complex::<T>::one();
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        denom = denom * (zi - zj);
                    }
                }
                if denom.is_zero() {
                    // coincident iterates; nudge apart
                    z[i] = zi + Complex::new(tol, tol);
                    worst = T::infinity();
                    continue;
                }
                let step = monic.eval(zi) / denom;
                z[i] = zi - step;
                worst = worst.max(step.norm() / T::one().max(zi.norm()));
            }
            if worst <= tol {
                break;
            }
        }

        let dp = self.derivative();
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let fz = self.eval(*zi);
                let dfz = dp.eval(*zi);
                if dfz.is_zero() {
                    break;
                }
                let cand = *zi - fz / dfz;
                if self.eval(cand).norm() < fz.norm() {
                    *zi = cand;
                } else {
                    break;
                }
            }
        }
        z
    }
}

/// Numeric GCD via the monic Euclidean remainder sequence.
///
/// A remainder whose coefficients are all at most `GCD_TOLERANCE` times the
/// largest coefficient magnitude of the current pair counts as zero. The
/// result is monic; `gcd(0, 0)` is the zero polynomial.
pub fn gcd<T: Real>(a: &Poly<T>, b: &Poly<T>) -> Poly<T> {
    let rel = T::lit(GCD_TOLERANCE);
    let (mut r0, mut r1) = if a.degree() >= b.degree() {
        (a.monic(), b.monic())
    } else {
        (b.monic(), a.monic())
    };
    loop {
        if r1.is_zero() {
            return r0;
        }
        if r1.degree() == Some(0) {
            return Poly::one();
        }
        let scale = r0.max_coeff_abs().max(r1.max_coeff_abs());
        let (_, r) = r0.div_rem(&r1);
        let r = r.trim_below(rel * scale);
        r0 = r1;
        r1 = r.monic();
    }
}

impl<T: Real> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: Self) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Real> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: Self) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Real> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Self) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Poly::new(out)
    }
}

impl<T: Real> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn p(c: &[f64]) -> Poly<f64> {
        Poly::from_real(c)
    }

    fn sorted_re(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn trims_leading_zeros() {
        let q = p(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(q.degree(), Some(1));
        assert!(p(&[0.0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[-0.25, 0.0, 1.0]);
        let b = p(&[-0.5, 1.0]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, p(&[0.5, 1.0]));
        assert!(r.is_zero());

        let a = p(&[3.0, -1.0, 2.0, 5.0]);
        let b = p(&[1.0, 1.0]);
        let (q, r) = a.div_rem(&b);
        let back = &(&q * &b) + &r;
        for k in 0..4 {
            assert!((back.coeff(k) - a.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_of_cubic() {
        let planted = [C::new(0.5, 0.0), C::new(-0.3, 0.7), C::new(2.0, -1.0)];
        let q = Poly::from_roots(&planted);
        let found = q.roots();
        assert_eq!(found.len(), 3);
        for r in planted {
            let best = found.iter().map(|f| (f - r).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-10, "root {r} missed by {best}");
        }
    }

    #[test]
    fn roots_of_z_power() {
        let q = p(&[0.0, 0.0, 0.0, 1.0]);
        for r in q.roots() {
            assert!(r.norm() < 1e-4);
        }
    }

    #[test]
    fn gcd_detects_common_factor() {
        let g = gcd(&p(&[-0.25, 0.0, 1.0]), &p(&[-0.5, 1.0]));
        assert_eq!(g.degree(), Some(1));
        assert!((g.eval(C::new(0.5, 0.0))).norm() < 1e-12);

        let g = gcd(&p(&[0.0, 1.0]), &p(&[0.0, 0.0, 1.0]));
        assert_eq!(g, p(&[0.0, 1.0]));

        let g = gcd(&p(&[1.0]), &p(&[0.0, 1.0]));
        assert_eq!(g.degree(), Some(0));
    }

    #[test]
    fn gcd_of_products_sharing_complex_root() {
        let shared = C::new(0.2, -0.6);
        let a = Poly::from_roots(&[shared, C::new(1.5, 0.0)]);
        let b = Poly::from_roots(&[shared, C::new(-0.1, 0.9), C::new(0.0, -2.0)]);
        let g = gcd(&a, &b);
        assert_eq!(g.degree(), Some(1));
        let roots = sorted_re(g.roots());
        assert!((roots[0] - shared).norm() < 1e-9);
    }

    #[test]
    fn series_div_matches_geometric() {
        // 1 / (1 - z/2) = Σ (z/2)^k
        let s = p(&[1.0]).series_div(&p(&[1.0, -0.5]), 10);
        for (k, c) in s.iter().enumerate() {
            assert!((c.re - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }
}
