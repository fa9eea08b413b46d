//! Holomorphic functions on a neighbourhood of the closed unit disk.
//!
//! The representable class is polynomials and rational functions whose
//! denominator has no zero in `|z| <= 1`. Both are stored exactly as
//! coefficient vectors, so evaluation is Horner and differentiation is formal.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{outside, Error, Result};
use crate::poly::{gcd, Poly};
use crate::scalar::Real;

/// Points with `|z| <= 1 + EVAL_MARGIN` may be evaluated.
pub const EVAL_MARGIN: f64 = 0.25;
/// A denominator root with modulus at most `1 + DISK_SLACK` counts as inside the closed disk.
pub const DISK_SLACK: f64 = 1e-9;

const ROOT_MERGE_RADIUS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunKind {
    Polynomial,
    Rational,
}

#[derive(Debug, Clone)]
struct Denominator<T: Real> {
    // constant term normalised to 1
    poly: Poly<T>,
    roots: Vec<Complex<T>>,
}

#[derive(Debug, Clone)]
pub struct HoloFun<T: Real> {
    num: Poly<T>,
    den: Option<Denominator<T>>,
}

impl<T: Real> PartialEq for HoloFun<T> {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num
            && self.den.as_ref().map(|d| &d.poly) == other.den.as_ref().map(|d| &d.poly)
    }
}

impl<T: Real> HoloFun<T> {
    pub fn polynomial(coeffs: Vec<Complex<T>>) -> Self {
        Self::from_poly(Poly::new(coeffs))
    }

    pub fn from_poly(num: Poly<T>) -> Self {
        Self { num, den: None }
    }

    /// Polynomial with real coefficients, ascending order.
    pub fn real_poly(coeffs: &[f64]) -> Self {
        Self::from_poly(Poly::new(
            coeffs.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect(),
        ))
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn identity() -> Self {
        Self::from_poly(Poly::identity())
    }

    pub fn rational(num: Vec<Complex<T>>, den: Vec<Complex<T>>) -> Result<Self> {
        Self::from_parts(Poly::new(num), Poly::new(den))
    }

    /// Builds `num / den`, normalising the denominator's constant term to 1 and
    /// rejecting denominators that vanish somewhere in the closed disk.
    pub fn from_parts(num: Poly<T>, den: Poly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let d0 = den.coeff(0);
        if d0.is_zero() {
            return Err(Error::DenominatorVanishesInDisk { re: 0.0, im: 0.0, modulus: 0.0 });
        }
        let inv = d0.inv();
        let num = num.scale(inv);
        let mut den = den.scale(inv);
        // exact 1 after normalisation
        let mut coeffs = den.coeffs().to_vec();
        coeffs[0] = Complex::one();
        den = Poly::new(coeffs);

        let roots = den.roots();
        let limit = T::one() + T::lit(DISK_SLACK);
        if let Some(bad) = roots.iter().find(|r| r.norm() <= limit) {
            return Err(Error::DenominatorVanishesInDisk {
                re: bad.re.to_f64_lossy(),
                im: bad.im.to_f64_lossy(),
                modulus: bad.norm().to_f64_lossy(),
            });
        }
        Ok(Self { num, den: Some(Denominator { poly: den, roots }) })
    }

    pub fn kind(&self) -> FunKind {
        if self.den.is_some() {
            FunKind::Rational
        } else {
            FunKind::Polynomial
        }
    }

    pub fn numerator(&self) -> &Poly<T> {
        &self.num
    }

    pub fn denominator(&self) -> Option<&Poly<T>> {
        self.den.as_ref().map(|d| &d.poly)
    }

    /// Roots of the denominator (all outside the closed disk), with multiplicity.
    pub fn denominator_roots(&self) -> &[Complex<T>] {
        self.den.as_ref().map(|d| d.roots.as_slice()).unwrap_or(&[])
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_polynomial(&self) -> Option<&Poly<T>> {
        match self.den {
            None => Some(&self.num),
            Some(_) => None,
        }
    }

    /// Evaluates at `z`, which must satisfy `|z| <= 1.25`.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.norm() > T::one() + T::lit(EVAL_MARGIN) {
            return Err(outside(z));
        }
        Ok(self.value(z))
    }

    /// Unchecked evaluation; callers guarantee `z` is in the domain.
    pub(crate) fn value(&self, z: Complex<T>) -> Complex<T> {
        match &self.den {
            None => self.num.eval(z),
            Some(d) => self.num.eval(z) / d.poly.eval(z),
        }
    }

    pub fn derivative(&self) -> Self {
        match &self.den {
            None => Self::from_poly(self.num.derivative()),
            Some(d) => {
                let num = &(&self.num.derivative() * &d.poly) - &(&self.num * &d.poly.derivative());
                let den = &d.poly * &d.poly;
                let mut roots = d.roots.clone();
                roots.extend_from_slice(&d.roots);
                Self { num, den: Some(Denominator { poly: den, roots }) }
            }
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { num: self.num.scale(s), den: self.den.clone() }
    }

    /// Product of two functions; denominators multiply and their root lists concatenate.
    pub fn mul(&self, other: &Self) -> Self {
        let num = &self.num * &other.num;
        let den = match (&self.den, &other.den) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                let mut roots = a.roots.clone();
                roots.extend_from_slice(&b.roots);
                Some(Denominator { poly: &a.poly * &b.poly, roots })
            }
        };
        Self { num, den }
    }

    /// Certified lower bound for `|den(z)|` on the closed disk (1 for polynomials).
    pub fn denominator_lower_bound(&self) -> T {
        let Some(d) = &self.den else {
            return T::one();
        };
        let tail: T = d.poly.coeffs().iter().skip(1).fold(T::zero(), |acc, c| acc + c.norm());
        let coeff_bound = T::one() - tail;
        // den(z) = prod (1 - z / r_i) since den(0) = 1
        let root_bound = d
            .roots
            .iter()
            .fold(T::one(), |acc, r| acc * (T::one() - r.norm().recip()));
        coeff_bound.max(root_bound).max(T::zero())
    }

    /// Upper bound for `|f|` on the closed disk.
    pub fn sup_bound(&self) -> T {
        let lower = self.denominator_lower_bound();
        if lower <= T::zero() {
            return T::infinity();
        }
        self.num.coeff_abs_sum() / lower
    }

    /// Taylor coefficients at the origin up to degree `n`.
    pub fn taylor(&self, n: usize) -> Vec<Complex<T>> {
        match &self.den {
            None => (0..=n).map(|k| self.num.coeff(k)).collect(),
            Some(d) => self.num.series_div(&d.poly, n),
        }
    }

    /// Upper bound for `sup_{|z|<=1} |f(z) - T_n f(z)|`, with `T_n` the
    /// degree-`n` Taylor polynomial.
    ///
    /// For rationals this is a Cauchy estimate on a circle of radius `rho`
    /// between 1 and the nearest pole, minimised over a few choices of `rho`.
    pub fn taylor_tail_bound(&self, n: usize) -> T {
        let Some(d) = &self.den else {
            return self.num.coeffs().iter().skip(n + 1).fold(T::zero(), |acc, c| acc + c.norm());
        };
        let nearest = d.roots.iter().map(|r| r.norm()).fold(T::infinity(), T::min);
        if !nearest.is_finite() {
            // constant denominator
            return self.num.coeffs().iter().skip(n + 1).fold(T::zero(), |acc, c| acc + c.norm());
        }
        let mut best = T::infinity();
        for step in 1..20 {
            let t = T::count(step) / T::lit(20.0);
            let rho = T::one() + (nearest - T::one()) * t;
            let num_max = self
                .num
                .coeffs()
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, c)| acc + c.norm() * rho.powi(k as i32));
            let den_min = d.roots.iter().fold(T::one(), |acc, r| acc * (T::one() - rho / r.norm()));
            if den_min <= T::zero() {
                continue;
            }
            let m = num_max / den_min;
            let bound = m * rho.powi(-(n as i32 + 1)) / (T::one() - rho.recip());
            best = best.min(bound);
        }
        best
    }
}

/// The multiplier pair `{theta1, theta2}` with cached derivatives.
#[derive(Debug, Clone)]
pub struct MultiplierPair<T: Real> {
    theta1: HoloFun<T>,
    theta2: HoloFun<T>,
    dtheta1: HoloFun<T>,
    dtheta2: HoloFun<T>,
}

impl<T: Real> PartialEq for MultiplierPair<T> {
    fn eq(&self, other: &Self) -> bool {
        self.theta1 == other.theta1 && self.theta2 == other.theta2
    }
}

impl<T: Real> MultiplierPair<T> {
    pub fn new(theta1: HoloFun<T>, theta2: HoloFun<T>) -> Result<Self> {
        if theta1.is_zero() && theta2.is_zero() {
            return Err(Error::ZeroPair);
        }
        let dtheta1 = theta1.derivative();
        let dtheta2 = theta2.derivative();
        Ok(Self { theta1, theta2, dtheta1, dtheta2 })
    }

    pub fn theta1(&self) -> &HoloFun<T> {
        &self.theta1
    }

    pub fn theta2(&self) -> &HoloFun<T> {
        &self.theta2
    }

    pub fn components(&self) -> [&HoloFun<T>; 2] {
        [&self.theta1, &self.theta2]
    }

    pub fn derivatives(&self) -> [&HoloFun<T>; 2] {
        [&self.dtheta1, &self.dtheta2]
    }

    /// `{f theta1, f theta2}`.
    pub fn times(&self, f: &HoloFun<T>) -> Result<Self> {
        Self::new(f.mul(&self.theta1), f.mul(&self.theta2))
    }

    pub fn scale(&self, s: Complex<T>) -> Result<Self> {
        Self::new(self.theta1.scale(s), self.theta2.scale(s))
    }

    /// `(theta1(z), theta2(z))`, unchecked.
    pub(crate) fn values(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        (self.theta1.value(z), self.theta2.value(z))
    }

    pub(crate) fn jet(&self, z: Complex<T>) -> [Complex<T>; 4] {
        [
            self.theta1.value(z),
            self.theta2.value(z),
            self.dtheta1.value(z),
            self.dtheta2.value(z),
        ]
    }

    /// `|theta1(z)|^2 + |theta2(z)|^2`.
    pub fn sum_sq(&self, z: Complex<T>) -> Result<T> {
        Ok(self.theta1.eval(z)?.norm_sqr() + self.theta2.eval(z)?.norm_sqr())
    }

    pub(crate) fn sum_sq_unchecked(&self, z: Complex<T>) -> T {
        let (a, b) = self.values(z);
        a.norm_sqr() + b.norm_sqr()
    }

    /// Largest component degree, counting rational components as `taylor_degree`.
    pub fn max_degree(&self, taylor_degree: usize) -> usize {
        self.components()
            .iter()
            .map(|f| match f.kind() {
                FunKind::Polynomial => f.numerator().degree().unwrap_or(0),
                FunKind::Rational => taylor_degree,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Common zeros of the pair in the closed disk (modulus at most `1 + DISK_SLACK`),
/// multiplicity ignored.
///
/// Zeros of a rational component are those of its numerator, since
/// denominators do not vanish on the closed disk.
pub fn common_zeros_in_disk<T: Real>(pair: &MultiplierPair<T>) -> Vec<Complex<T>> {
    let a = pair.theta1.numerator();
    let b = pair.theta2.numerator();
    let g = if a.is_zero() {
        b.monic()
    } else if b.is_zero() {
        a.monic()
    } else {
        gcd(a, b)
    };
    let limit = T::one() + T::lit(DISK_SLACK);
    let merge = T::lit(ROOT_MERGE_RADIUS);
    let mut clusters: Vec<(Complex<T>, usize)> = Vec::new();
    for r in g.roots().into_iter().filter(|r| r.norm() <= limit) {
        match clusters.iter_mut().find(|(c, n)| (*c / T::count(*n) - r).norm() <= merge) {
            Some((sum, n)) => {
                *sum = *sum + r;
                *n += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    clusters.into_iter().map(|(s, n)| s / T::count(n)).collect()
}

fn fmt_coeff<T: Real>(c: &Complex<T>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im.is_zero() {
        write!(f, "{}", c.re)
    } else if c.im.is_sign_negative() {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

fn fmt_coeffs<T: Real>(p: &Poly<T>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("[")?;
    if p.is_zero() {
        f.write_str("0")?;
    }
    for (k, c) in p.coeffs().iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        fmt_coeff(c, f)?;
    }
    f.write_str("]")
}

/// Canonical literal form, accepted back by the parser in [`crate::literal`].
impl<T: Real> fmt::Display for HoloFun<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.den {
            None => {
                f.write_str("poly:")?;
                fmt_coeffs(&self.num, f)
            }
            Some(d) => {
                f.write_str("rat:")?;
                fmt_coeffs(&self.num, f)?;
                f.write_str("/")?;
                fmt_coeffs(&d.poly, f)
            }
        }
    }
}
