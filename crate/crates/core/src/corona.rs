//! Certified lower bounds for `u = |θ₁|² + |θ₂|²` on the closed unit disk.
//!
//! The square `[-1, 1]²` is subdivided adaptively. On each box meeting the
//! closed disk, `u` is evaluated at a representative point `p` of the box
//! inside the disk and bounded below by `u(p) − L·ρ`, where `ρ` is the
//! largest distance from `p` to a corner of the box and `L` is a Lipschitz
//! constant for `u` on the closed disk. `L = 2 (M₁ M₁′ + M₂ M₂′)`, with `M`
//! the coefficient-sum bounds of [`HoloFun::sup_bound`].

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::curvature::QuotientSpec;
use crate::holofun::{common_zeros_in_disk, HoloFun, MultiplierPair};
use crate::scalar::Real;

pub const DEFAULT_TARGET_GAP: f64 = 1e-6;
pub const MAX_DEPTH: usize = 24;
/// Upper limit on boxes in a single subdivision level.
pub const MAX_LEVEL_BOXES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoronaCertificate<T: Real> {
    /// Certified `inf |θ₁|² + |θ₂|²` lower bound over the closed disk.
    pub epsilon: T,
    pub depth: usize,
    pub boxes_checked: usize,
    pub lipschitz: T,
    /// Smallest `u` seen at a sample point; an upper bound on the true infimum.
    pub min_sampled: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// A sampled point has `u` below the target, so the target is unattainable.
    BelowTarget,
    /// Subdivision hit the depth or box budget before every box cleared.
    DepthExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoronaFailure<T: Real> {
    pub kind: FailureKind,
    pub witness: Complex<T>,
    /// `u` at the witness.
    pub value: T,
    /// Best lower bound established before giving up.
    pub lower_bound: T,
    pub depth: usize,
    pub boxes_checked: usize,
}

impl<T: Real> fmt::Display for CoronaFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FailureKind::BelowTarget => "corona target not attainable",
            FailureKind::DepthExceeded => "subdivision depth exceeded",
        };
        write!(
            f,
            "{what}: u({}{:+}i) = {:e} (depth {}, {} boxes)",
            self.witness.re, self.witness.im, self.value, self.depth, self.boxes_checked
        )
    }
}

impl<T: Real> std::error::Error for CoronaFailure<T> {}

/// Lipschitz constant of `u` on the closed disk.
pub fn lipschitz_bound<T: Real>(theta: &MultiplierPair<T>) -> T {
    let term = |f: &HoloFun<T>, df: &HoloFun<T>| {
        if f.is_zero() || df.is_zero() {
            T::zero()
        } else {
            f.sup_bound() * df.sup_bound()
        }
    };
    let [t1, t2] = theta.components();
    let [d1, d2] = theta.derivatives();
    T::lit(2.0) * (term(t1, d1) + term(t2, d2))
}

/// Coefficients of `f(p + h)` in powers of `h` (Taylor shift by repeated Horner steps).
fn shifted<T: Real>(coeffs: &[Complex<T>], p: Complex<T>) -> Vec<Complex<T>> {
    let mut b = coeffs.to_vec();
    let n = b.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            b[j] = b[j] + p * b[j + 1];
        }
    }
    b
}

// (|f(p)|, Σ_{k≥1} |b_k| ρ^k)
fn value_and_spread<T: Real>(coeffs: &[Complex<T>], p: Complex<T>, rho: T) -> (T, T) {
    let b = shifted(coeffs, p);
    let mut spread = T::zero();
    let mut pow = T::one();
    for c in b.iter().skip(1) {
        pow = pow * rho;
        spread = spread + c.norm() * pow;
    }
    (b.first().map_or(T::zero(), |c| c.norm()), spread)
}

// numerator and optional denominator coefficients of one component
type Parts<T> = (Vec<Complex<T>>, Option<Vec<Complex<T>>>);

struct LocalBound<T: Real> {
    parts: Vec<Parts<T>>,
}

impl<T: Real> LocalBound<T> {
    fn new(theta: &MultiplierPair<T>) -> Self {
        let parts = theta
            .components()
            .iter()
            .map(|f| (f.numerator().coeffs().to_vec(), f.denominator().map(|d| d.coeffs().to_vec())))
            .collect();
        Self { parts }
    }

    /// Lower bound for `u` on the disk of radius `rho` around `p`.
    fn lower(&self, p: Complex<T>, rho: T) -> T {
        self.parts.iter().fold(T::zero(), |acc, (num, den)| {
            let (n0, nr) = value_and_spread(num, p, rho);
            let low = (n0 - nr).max(T::zero());
            let high_den = match den {
                Some(d) => {
                    let (d0, dr) = value_and_spread(d, p, rho);
                    d0 + dr
                }
                None => T::one(),
            };
            let m = low / high_den;
            acc + m * m
        })
    }
}

#[derive(Clone, Copy)]
struct Cell<T> {
    cx: T,
    cy: T,
    half: T,
}

enum Outcome<T: Real> {
    Outside,
    Pass(T, T),
    Below(Complex<T>, T),
    Split(Complex<T>, T, T),
}

fn examine<T: Real>(theta: &MultiplierPair<T>, local: &LocalBound<T>, cell: Cell<T>, lipschitz: T, target: T) -> Outcome<T> {
    let clamp0 = |c: T| {
        let lo = c - cell.half;
        let hi = c + cell.half;
        if lo > T::zero() {
            lo
        } else if hi < T::zero() {
            hi
        } else {
            T::zero()
        }
    };
    let nearest = Complex::new(clamp0(cell.cx), clamp0(cell.cy));
    if nearest.norm() > T::one() {
        return Outcome::Outside;
    }
    let center = Complex::new(cell.cx, cell.cy);
    let p = if center.norm() <= T::one() { center } else { nearest };
    let radius = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
        .iter()
        .map(|&(sx, sy)| {
            let corner = Complex::new(
                cell.cx + T::lit(sx as f64) * cell.half,
                cell.cy + T::lit(sy as f64) * cell.half,
            );
            (corner - p).norm()
        })
        .fold(T::zero(), T::max);
    let u = theta.sum_sq_unchecked(p);
    let lower = (u - lipschitz * radius).max(local.lower(p, radius));
    if u < target {
        Outcome::Below(p, u)
    } else if lower >= target {
        Outcome::Pass(u, lower)
    } else {
        Outcome::Split(p, u, lower)
    }
}

/// Certifies `|θ₁|² + |θ₂|² ≥ ε ≥ target_gap` on the closed disk.
pub fn certify<T: Real>(theta: &MultiplierPair<T>, target_gap: T) -> Result<CoronaCertificate<T>, CoronaFailure<T>> {
    certify_within(theta, target_gap, MAX_LEVEL_BOXES)
}

/// Boxes per level allowed to each tightening attempt.
const TIGHTEN_LEVEL_BOXES: usize = 1 << 16;
const TIGHTEN_ROUNDS: usize = 3;

/// [`certify`] followed by attempts to raise `ε` to half the smallest sampled
/// value of `u`. The first certificate is a valid fallback, so a failed
/// attempt only means a looser `ε`.
pub fn certify_tight<T: Real>(theta: &MultiplierPair<T>, target_gap: T) -> Result<CoronaCertificate<T>, CoronaFailure<T>> {
    let mut best = certify(theta, target_gap)?;
    let mut probe = best.min_sampled;
    for _ in 0..TIGHTEN_ROUNDS {
        let goal = probe / T::lit(2.0);
        if goal <= best.epsilon {
            break;
        }
        match certify_within(theta, goal, TIGHTEN_LEVEL_BOXES) {
            Ok(c) => {
                best = CoronaCertificate { min_sampled: c.min_sampled.min(best.min_sampled), ..c };
                break;
            }
            Err(f) if f.kind == FailureKind::BelowTarget => probe = f.value,
            Err(_) => break,
        }
    }
    Ok(best)
}

fn certify_within<T: Real>(
    theta: &MultiplierPair<T>,
    target_gap: T,
    level_budget: usize,
) -> Result<CoronaCertificate<T>, CoronaFailure<T>> {
    let lipschitz = lipschitz_bound(theta);
    let local = LocalBound::new(theta);
    let mut level = vec![Cell { cx: T::zero(), cy: T::zero(), half: T::one() }];
    let mut epsilon = T::infinity();
    let mut checked = 0usize;
    let mut min_sampled = T::infinity();

    for depth in 0..=MAX_DEPTH {
        let outcomes: Vec<Outcome<T>> = level
            .par_iter()
            .map(|&cell| examine(theta, &local, cell, lipschitz, target_gap))
            .collect();

        let mut next = Vec::new();
        let mut below: Option<(Complex<T>, T)> = None;
        let mut worst: Option<(Complex<T>, T, T)> = None;
        for (cell, outcome) in level.iter().zip(outcomes) {
            match outcome {
                Outcome::Outside => {}
                Outcome::Pass(u, lower) => {
                    checked += 1;
                    min_sampled = min_sampled.min(u);
                    epsilon = epsilon.min(lower);
                }
                Outcome::Below(p, u) => {
                    checked += 1;
                    if below.is_none_or(|(_, b)| u < b) {
                        below = Some((p, u));
                    }
                }
                Outcome::Split(p, u, lower) => {
                    checked += 1;
                    min_sampled = min_sampled.min(u);
                    if worst.is_none_or(|(_, _, w)| lower < w) {
                        worst = Some((p, u, lower));
                    }
                    let q = cell.half / T::lit(2.0);
                    for (dx, dy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                        next.push(Cell { cx: cell.cx + T::lit(dx) * q, cy: cell.cy + T::lit(dy) * q, half: q });
                    }
                }
            }
        }

        if let Some((witness, value)) = below {
            return Err(CoronaFailure {
                kind: FailureKind::BelowTarget,
                witness,
                value,
                lower_bound: value.min(epsilon),
                depth,
                boxes_checked: checked,
            });
        }
        if next.is_empty() {
            return Ok(CoronaCertificate { epsilon, depth, boxes_checked: checked, lipschitz, min_sampled });
        }
        if depth == MAX_DEPTH || next.len() > level_budget {
            let (witness, value, lower) = worst.expect("unresolved box recorded");
            return Err(CoronaFailure {
                kind: FailureKind::DepthExceeded,
                witness,
                value,
                lower_bound: lower.min(epsilon),
                depth,
                boxes_checked: checked,
            });
        }
        level = next;
    }
    unreachable!("loop returns by MAX_DEPTH")
}

/// Fast corona check: no common zero in the closed disk and a certificate at the default gap.
pub fn check_corona<T: Real>(theta: &MultiplierPair<T>) -> bool {
    common_zeros_in_disk(theta).is_empty() && certify(theta, T::lit(DEFAULT_TARGET_GAP)).is_ok()
}

impl<T: Real> QuotientSpec<T> {
    /// Runs [`certify_tight`] on the multiplier pair and, on success, marks the spec usable.
    pub fn certify(mut self, target_gap: T) -> Result<Self, CoronaFailure<T>> {
        let cert = certify_tight(self.theta(), target_gap)?;
        self.certificate = Some(cert);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    type F = HoloFun<f64>;

    fn pair(a: &[f64], b: &[f64]) -> MultiplierPair<f64> {
        MultiplierPair::new(F::real_poly(a), F::real_poly(b)).unwrap()
    }

    fn dense_min(p: &MultiplierPair<f64>, n: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let z = C::new(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
                if z.norm() <= 1.0 {
                    best = best.min(p.sum_sq_unchecked(z));
                }
            }
        }
        best
    }

    #[test]
    fn one_and_z() {
        let c = certify(&pair(&[1.0], &[0.0, 1.0]), 0.5).unwrap();
        assert!(c.epsilon >= 0.5 && c.epsilon <= 1.0, "{c:?}");
    }

    #[test]
    fn z_and_one_minus_z() {
        let p = pair(&[0.0, 1.0], &[1.0, -1.0]);
        let c = certify(&p, 0.25).unwrap();
        assert!(c.epsilon >= 0.25 && c.epsilon <= 0.5, "{c:?}");
        let m = dense_min(&p, 400);
        assert!((m - 0.5).abs() < 1e-4);
        assert!(m >= c.epsilon);
    }

    #[test]
    fn common_zero_fails_near_origin() {
        let f = certify(&pair(&[0.0, 1.0], &[0.0, 0.0, 1.0]), 1e-6).unwrap_err();
        assert_eq!(f.kind, FailureKind::BelowTarget);
        assert!(f.witness.norm() < 1e-3);
    }

    #[test]
    fn off_center_common_zero_found() {
        // common zero at 0.3 + 0.2i, not a box centre at any level
        let r = C::new(0.3, 0.2);
        let a = F::polynomial(vec![-r, C::new(1.0, 0.0)]);
        let b = a.mul(&F::real_poly(&[2.0, 0.0, 1.0]));
        let f = certify(&MultiplierPair::new(a, b).unwrap(), 1e-6).unwrap_err();
        assert_eq!(f.kind, FailureKind::BelowTarget);
        assert!((f.witness - r).norm() < 1e-2, "{f}");
        assert!(f.value < 1e-6);
    }

    #[test]
    fn check_corona_examples() {
        assert!(check_corona(&pair(&[1.0], &[0.0, 1.0])));
        assert!(!check_corona(&pair(&[0.0, 1.0], &[0.0, 0.0, 1.0])));
        let p = pair(&[-0.5, 1.0], &[0.5, 1.0]);
        assert!(check_corona(&p));
        let c = certify(&p, 1e-6).unwrap();
        assert!(c.epsilon > 0.0 && c.epsilon <= dense_min(&p, 400));
    }

    #[test]
    fn tightening_reaches_half_the_infimum() {
        let c = certify_tight(&pair(&[1.0], &[0.0, 1.0]), 1e-6).unwrap();
        assert!(c.epsilon >= 0.5 && c.epsilon <= 1.0, "{c:?}");
        let p = pair(&[0.0, 1.0], &[1.0, -1.0]);
        let c = certify_tight(&p, 1e-6).unwrap();
        assert!(c.epsilon >= 0.25 && c.epsilon <= dense_min(&p, 400), "{c:?}");
        assert!(certify_tight(&pair(&[0.0, 1.0], &[0.0, 0.0, 1.0]), 1e-6).is_err());
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let c = [C::new(1.0, -0.5), C::new(0.0, 2.0), C::new(-3.0, 0.0), C::new(0.5, 0.5)];
        let p = C::new(0.3, -0.7);
        let h = C::new(-0.11, 0.05);
        let b = shifted(&c, p);
        let direct: C = c.iter().enumerate().map(|(k, a)| a * (p + h).powu(k as u32)).sum();
        let via: C = b.iter().enumerate().map(|(k, a)| a * h.powu(k as u32)).sum();
        assert!((direct - via).norm() < 1e-14);
    }

    #[test]
    fn local_bound_is_sound() {
        let f = F::polynomial(vec![C::new(1.1, 0.0), C::new(-1.0, 0.0)]);
        let r = F::from_parts(crate::poly::Poly::from_real(&[0.2, 1.0]), crate::poly::Poly::from_real(&[1.0, 0.4])).unwrap();
        let p = MultiplierPair::new(f, r).unwrap();
        let lb = LocalBound::new(&p);
        for (cx, cy, rho) in [(0.9, 0.1, 0.05), (0.0, 0.0, 0.3), (-0.5, 0.6, 0.1)] {
            let centre = C::new(cx, cy);
            let low = lb.lower(centre, rho);
            for k in 0..64 {
                let z = centre + C::from_polar(rho * ((k % 4) as f64 + 1.0) / 4.0, k as f64 * 0.7);
                assert!(p.sum_sq_unchecked(z) >= low - 1e-15);
            }
        }
    }

    #[test]
    fn steep_pair_near_the_rim_certifies() {
        // both components small near z = 1
        let a = F::polynomial(vec![C::new(1.02, 0.0), C::new(-1.0, 0.0)]);
        let b = F::polynomial(vec![C::new(0.0, 0.0), C::new(1.03, 0.0), C::new(-1.0, 0.0)]);
        let p = MultiplierPair::new(a, b).unwrap();
        let c = certify(&p, 1e-6).unwrap();
        assert!(c.epsilon <= dense_min(&p, 400));
    }

    #[test]
    fn scaling_by_two_does_not_lower_epsilon() {
        let p = pair(&[0.0, 1.0], &[1.0, -1.0]);
        let e1 = certify(&p, 0.1).unwrap().epsilon;
        let e2 = certify(&p.scale(C::new(0.0, 2.0)).unwrap(), 0.1).unwrap().epsilon;
        assert!(e2 >= e1);
    }

    #[test]
    fn rational_pair_certifies() {
        let r = F::from_parts(
            crate::poly::Poly::from_real(&[1.0]),
            crate::poly::Poly::from_real(&[1.0, -0.5]),
        )
        .unwrap();
        let p = MultiplierPair::new(r, F::real_poly(&[0.0, 1.0])).unwrap();
        let c = certify(&p, 1e-6).unwrap();
        assert!(c.epsilon <= dense_min(&p, 200));
    }

    #[test]
    fn spec_certification_attaches_certificate() {
        let s = QuotientSpec::new(crate::rkhs::ModuleKind::Hardy, pair(&[1.0], &[0.0, 1.0]));
        assert!(!s.is_certified());
        let s = s.certify(1e-6).unwrap();
        assert!(s.certificate().unwrap().epsilon > 0.0);
    }
}
