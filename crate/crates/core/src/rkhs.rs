//! Base Hilbert modules: the Hardy space and the weighted Bergman spaces.
//!
//! Norms are realised through monomial coefficients: the monomials are
//! orthogonal in every base module and `||z^k||^2` is the reciprocal of the
//! `k`-th Taylor coefficient of the reproducing kernel.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{outside, Error, Result};
use crate::scalar::Real;

/// Weight parameter of a weighted Bergman space, validated `alpha > -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Weight<T: Real>(T);

impl<T: Real> Weight<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha.is_finite() && alpha > -T::one() {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidWeight(alpha.to_f64_lossy()))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModuleKind<T: Real> {
    Hardy,
    WeightedBergman(Weight<T>),
}

impl<T: Real> ModuleKind<T> {
    /// The unweighted Bergman module, `alpha = 0`.
    pub fn bergman() -> Self {
        Self::WeightedBergman(Weight(T::zero()))
    }

    pub fn weighted_bergman(alpha: T) -> Result<Self> {
        Weight::new(alpha).map(Self::WeightedBergman)
    }

    pub fn alpha(&self) -> Option<T> {
        match self {
            Self::Hardy => None,
            Self::WeightedBergman(w) => Some(w.0),
        }
    }

    /// Exponent `s` in `K(z, w) = (1 - conj(w) z)^(-s)`.
    pub fn kernel_exponent(&self) -> T {
        match self {
            Self::Hardy => T::one(),
            Self::WeightedBergman(w) => T::lit(2.0) + w.0,
        }
    }

    pub fn kernel_eval(&self, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        if z.norm() >= T::one() {
            return Err(outside(z));
        }
        if w.norm() >= T::one() {
            return Err(outside(w));
        }
        Ok(self.kernel_unchecked(z, w))
    }

    pub(crate) fn kernel_unchecked(&self, z: Complex<T>, w: Complex<T>) -> Complex<T> {
        let base = Complex::<T>::one() - w.conj() * z;
        match self {
            Self::Hardy => base.inv(),
            // Re(base) > 0 inside the disk, so the principal branch is continuous there.
            Self::WeightedBergman(wt) => base.powf(-(T::lit(2.0) + wt.0)),
        }
    }

    /// `K(z, z) = (1 - |z|^2)^(-s)`, real.
    pub(crate) fn kernel_diag_unchecked(&self, z: Complex<T>) -> T {
        (T::one() - z.norm_sqr()).powf(-self.kernel_exponent())
    }

    /// `||z^k||^2`: 1 for Hardy, `k! Γ(2+α) / Γ(k+2+α)` for weighted Bergman,
    /// computed as `prod_{j=1..k} j / (j+1+α)`.
    pub fn monomial_norm_sq(&self, k: usize) -> T {
        match self {
            Self::Hardy => T::one(),
            Self::WeightedBergman(w) => (1..=k).fold(T::one(), |acc, j| {
                let j = T::count(j);
                acc * j / (j + T::one() + w.0)
            }),
        }
    }

    /// `||z^k||^2` for `k = 0..=n` in one pass.
    pub fn monomial_norms_sq(&self, n: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(T::one());
        for k in 1..=n {
            let prev = out[k - 1];
            out.push(match self {
                Self::Hardy => T::one(),
                Self::WeightedBergman(w) => {
                    let j = T::count(k);
                    prev * j / (j + T::one() + w.0)
                }
            });
        }
        out
    }

    /// `||z^(k+1)|| / ||z^k||`, the `k`-th weight of `M_z` in the orthonormal monomial basis.
    pub fn shift_weight(&self, k: usize) -> T {
        match self {
            Self::Hardy => T::one(),
            Self::WeightedBergman(w) => {
                let k = T::count(k);
                ((k + T::one()) / (k + T::lit(2.0) + w.0)).sqrt()
            }
        }
    }

    /// Scalar curvature coefficient of the base module: `-s / (1 - |z|^2)^2`.
    pub fn base_curvature(&self, z: Complex<T>) -> Result<T> {
        if z.norm() >= T::one() {
            return Err(outside(z));
        }
        Ok(self.base_curvature_unchecked(z))
    }

    pub(crate) fn base_curvature_unchecked(&self, z: Complex<T>) -> T {
        let d = T::one() - z.norm_sqr();
        -self.kernel_exponent() / (d * d)
    }

    /// Truncated kernel series `sum_{k<=n} (conj(w) z)^k / ||z^k||^2`.
    pub fn kernel_series(&self, z: Complex<T>, w: Complex<T>, n: usize) -> Complex<T> {
        let x = w.conj() * z;
        let norms = self.monomial_norms_sq(n);
        let mut pow = Complex::<T>::one();
        let mut acc = Complex::<T>::zero();
        for nk in norms {
            acc = acc + pow / nk;
            pow = pow * x;
        }
        acc
    }
}

impl<T: Real> fmt::Display for ModuleKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hardy => f.write_str("hardy"),
            Self::WeightedBergman(w) if w.0.is_zero() => f.write_str("bergman"),
            Self::WeightedBergman(w) => write!(f, "bergman(alpha={})", w.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    type M = ModuleKind<f64>;

    #[test]
    fn weight_validation() {
        assert!(M::weighted_bergman(-1.0).is_err());
        assert!(M::weighted_bergman(f64::NAN).is_err());
        assert!(M::weighted_bergman(-0.999).is_ok());
        assert_eq!(M::weighted_bergman(0.0).unwrap(), M::bergman());
    }

    #[test]
    fn kernel_examples() {
        let o = C::new(0.0, 0.0);
        let h = C::new(0.5, 0.0);
        assert_eq!(M::Hardy.kernel_eval(o, o).unwrap(), C::new(1.0, 0.0));
        assert!((M::Hardy.kernel_eval(h, h).unwrap() - C::new(4.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((M::bergman().kernel_eval(h, h).unwrap() - C::new(16.0 / 9.0, 0.0)).norm() < 1e-14);
        assert!(M::Hardy.kernel_eval(C::new(1.0, 0.0), o).is_err());
        assert!(M::Hardy.kernel_eval(o, C::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn monomial_norm_examples() {
        assert_eq!(M::Hardy.monomial_norm_sq(7), 1.0);
        assert!((M::bergman().monomial_norm_sq(1) - 0.5).abs() < 1e-15);
        assert!((M::bergman().monomial_norm_sq(3) - 0.25).abs() < 1e-15);
        // no overflow deep into the sequence
        let deep = M::weighted_bergman(3.5).unwrap().monomial_norm_sq(500);
        assert!(deep.is_finite() && deep > 0.0);
        let batch = M::weighted_bergman(1.5).unwrap().monomial_norms_sq(20);
        for (k, v) in batch.iter().enumerate() {
            assert!((v - M::weighted_bergman(1.5).unwrap().monomial_norm_sq(k)).abs() < 1e-15);
        }
    }

    /// Midpoint quadrature of `(1/π) ∫ |z|^(2k) dA` in polar coordinates.
    fn bergman_norm_by_quadrature(k: i32) -> f64 {
        let n = 4000;
        let dr = 1.0 / n as f64;
        (0..n)
            .map(|j| {
                let r = (j as f64 + 0.5) * dr;
                // angular integral gives 2π; (1/π)·2π = 2
                2.0 * r.powi(2 * k) * r * dr
            })
            .sum()
    }

    #[test]
    fn monomial_norms_match_area_integral() {
        for k in [1, 3] {
            let q = bergman_norm_by_quadrature(k);
            assert!((q - M::bergman().monomial_norm_sq(k as usize)).abs() < 1e-6, "k={k} q={q}");
        }
    }

    #[test]
    fn shift_weight_examples() {
        assert_eq!(M::Hardy.shift_weight(12), 1.0);
        assert!((M::bergman().shift_weight(0) - 0.5f64.sqrt()).abs() < 1e-15);
        let a2 = M::weighted_bergman(2.0).unwrap();
        assert!((a2.shift_weight(1) - 0.4f64.sqrt()).abs() < 1e-15);
        let via_norms = (a2.monomial_norm_sq(2) / a2.monomial_norm_sq(1)).sqrt();
        assert!((a2.shift_weight(1) - via_norms).abs() < 1e-15);
        for k in 0..200 {
            assert!(a2.shift_weight(k) <= 1.0);
            assert!(M::weighted_bergman(-0.5).unwrap().shift_weight(k) <= 1.0);
        }
    }

    #[test]
    fn base_curvature_examples() {
        assert_eq!(M::Hardy.base_curvature(C::new(0.0, 0.0)).unwrap(), -1.0);
        assert_eq!(M::bergman().base_curvature(C::new(0.0, 0.0)).unwrap(), -2.0);
        let a1 = M::weighted_bergman(1.0).unwrap();
        let v = a1.base_curvature(C::new(0.0, 0.5)).unwrap();
        assert!((v + 16.0 / 3.0).abs() < 1e-13);
        assert!(M::Hardy.base_curvature(C::new(0.6, 0.8)).is_err());
    }

    #[test]
    fn kernel_series_converges_to_closed_form() {
        let z = C::new(0.5, -0.3);
        let w = C::new(-0.2, 0.6);
        for kind in [M::Hardy, M::bergman(), M::weighted_bergman(0.5).unwrap(), M::weighted_bergman(2.0).unwrap()] {
            let exact = kind.kernel_eval(z, w).unwrap();
            let series = kind.kernel_series(z, w, 200);
            assert!((exact - series).norm() < 1e-8, "{kind}");
        }
    }

    #[test]
    fn display() {
        assert_eq!(M::Hardy.to_string(), "hardy");
        assert_eq!(M::bergman().to_string(), "bergman");
        assert_eq!(M::weighted_bergman(0.5).unwrap().to_string(), "bergman(alpha=0.5)");
    }
}
