//! Unitary equivalence of two quotient modules.
//!
//! Curvature is a complete unitary invariant for the quotients considered
//! here. Since `K_Θ = K_H − ¼ ∇² log(|θ₁|² + |θ₂|²)`, two quotients over the
//! same base agree exactly when `log` of the ratio of the two norm sums is
//! harmonic, and that is what the same-base branch samples. Quotients over
//! different bases are never equivalent, so those branches decide without
//! looking at the multipliers at all.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::curvature::{at_point, fd_laplacian, laplacian_log_sumsq, quotient_curvature, DiskGrid, QuotientSpec};
use crate::error::{Error, Result};
use crate::holofun::MultiplierPair;
use crate::rkhs::ModuleKind;
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-6;
/// Deviations above `REJECT_FACTOR · tol` reject; between `tol` and that, the verdict is inconclusive.
pub const REJECT_FACTOR: f64 = 10.0;
const REFINE_MAX_ITER: usize = 200;
const REFINE_MIN_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Isomorphic,
    NotIsomorphic,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Isomorphic => "Isomorphic",
            Self::NotIsomorphic => "NotIsomorphic",
            Self::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which rule produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// One base is the Hardy module, the other weighted Bergman.
    HardyVsWeightedBergman,
    /// Both weighted Bergman with different weights.
    UnequalWeights,
    /// Same base: harmonicity of the log-ratio decides.
    Harmonicity,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Self::HardyVsWeightedBergman => "hardy-vs-weighted-bergman",
            Self::UnequalWeights => "unequal-weights",
            Self::Harmonicity => "harmonicity",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T: Real> {
    pub point: Complex<T>,
    /// `∇² log u_A − ∇² log u_B` in the harmonicity branch, `K_A − K_B` otherwise.
    pub obstruction: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T: Real> {
    pub outcome: Outcome,
    pub branch: Branch,
    pub witness: Option<Witness<T>>,
    /// Largest `|∇² log u_A − ∇² log u_B|` seen; `None` in the cross-base branches,
    /// which never evaluate it.
    pub max_deviation: Option<T>,
    /// Largest `|∇² log u_A − ∇² log u_B| / (1 + max(|∇² log u_A|, |∇² log u_B|))`,
    /// the quantity compared against `tol`.
    pub relative_deviation: Option<T>,
    pub grids: Vec<DiskGrid<T>>,
    pub tol: T,
    pub diagnostics: Option<String>,
}

/// Summary of `∇² log u_A − ∇² log u_B` over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect<T: Real> {
    pub max_deviation: T,
    pub argmax: Complex<T>,
    /// Signed deviation at `argmax`.
    pub deviation_at_argmax: T,
    pub max_relative: T,
    /// Largest of the two Laplacians in absolute value.
    pub magnitude: T,
}

struct Sample<T> {
    z: Complex<T>,
    dev: T,
    rel: T,
    mag: T,
}

fn deviation<T: Real>(a: &MultiplierPair<T>, b: &MultiplierPair<T>, z: Complex<T>) -> Result<(T, T)> {
    let la = laplacian_log_sumsq(a, z)?;
    let lb = laplacian_log_sumsq(b, z)?;
    Ok((la - lb, la.abs().max(lb.abs())))
}

/// Maximum over the grid of `|∇² log u_A − ∇² log u_B|`, from the closed-form Laplacians.
pub fn harmonicity_defect<T: Real>(
    theta_a: &MultiplierPair<T>,
    theta_b: &MultiplierPair<T>,
    grid: &DiskGrid<T>,
) -> Result<Defect<T>> {
    let samples = grid
        .points()
        .par_iter()
        .map(|&z| {
            let (dev, mag) = deviation(theta_a, theta_b, z).map_err(|e| at_point(z, e))?;
            Ok(Sample { z, dev, rel: dev.abs() / (T::one() + mag), mag })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = samples.first().ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
    let mut out = Defect {
        max_deviation: first.dev.abs(),
        argmax: first.z,
        deviation_at_argmax: first.dev,
        max_relative: first.rel,
        magnitude: first.mag,
    };
    for s in &samples[1..] {
        if s.dev.abs() > out.max_deviation {
            out.max_deviation = s.dev.abs();
            out.argmax = s.z;
            out.deviation_at_argmax = s.dev;
        }
        out.max_relative = out.max_relative.max(s.rel);
        out.magnitude = out.magnitude.max(s.mag);
    }
    Ok(out)
}

// Compass search for a local maximum of |dev| inside |z| <= r_max.
fn refine_witness<T: Real>(a: &MultiplierPair<T>, b: &MultiplierPair<T>, start: Complex<T>, r_max: T, step: T) -> Witness<T> {
    let score = |z: Complex<T>| deviation(a, b, z).map(|(d, _)| d).ok();
    let mut best = start;
    let mut best_dev = score(start).unwrap_or_else(T::zero);
    let mut step = step;
    for _ in 0..REFINE_MAX_ITER {
        if step < T::lit(REFINE_MIN_STEP) {
            break;
        }
        let mut moved = false;
        for d in [Complex::new(step, T::zero()), Complex::new(-step, T::zero()), Complex::new(T::zero(), step), Complex::new(T::zero(), -step)] {
            let z = best + d;
            if z.norm() > r_max {
                continue;
            }
            if let Some(v) = score(z) {
                if v.abs() > best_dev.abs() {
                    best = z;
                    best_dev = v;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step = step / T::lit(2.0);
        }
    }
    Witness { point: best, obstruction: best_dev }
}

// grid point maximising |K_A − K_B|
fn curvature_gap_witness<T: Real>(a: &QuotientSpec<T>, b: &QuotientSpec<T>, grid: &DiskGrid<T>) -> Result<Witness<T>> {
    let gaps = grid
        .points()
        .par_iter()
        .map(|&z| Ok((z, quotient_curvature(a, z)? - quotient_curvature(b, z)?)))
        .collect::<Result<Vec<_>>>()?;
    let (point, obstruction) = gaps
        .into_iter()
        .fold(None, |best: Option<(Complex<T>, T)>, (z, g)| match best {
            Some((_, bg)) if bg.abs() >= g.abs() => best,
            _ => Some((z, g)),
        })
        .ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
    Ok(Witness { point, obstruction })
}

/// Decides unitary equivalence of two certified quotients.
///
/// In the same-base branch the grid and its half-step rotation are both
/// sampled, and the relative deviation is compared against `tol` (accept)
/// and `10 · tol` (reject).
pub fn decide_equivalence<T: Real>(
    spec_a: &QuotientSpec<T>,
    spec_b: &QuotientSpec<T>,
    grid: &DiskGrid<T>,
    tol: T,
) -> Result<Verdict<T>> {
    spec_a.require_certified()?;
    spec_b.require_certified()?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let cross = match (spec_a.base(), spec_b.base()) {
        (ModuleKind::Hardy, ModuleKind::WeightedBergman(_)) | (ModuleKind::WeightedBergman(_), ModuleKind::Hardy) => {
            Some(Branch::HardyVsWeightedBergman)
        }
        (ModuleKind::WeightedBergman(x), ModuleKind::WeightedBergman(y)) if x != y => Some(Branch::UnequalWeights),
        _ => None,
    };
    if let Some(branch) = cross {
        let witness = curvature_gap_witness(spec_a, spec_b, grid)?;
        return Ok(Verdict {
            outcome: Outcome::NotIsomorphic,
            branch,
            witness: Some(witness),
            max_deviation: None,
            relative_deviation: None,
            grids: vec![*grid],
            tol,
            diagnostics: None,
        });
    }

    let (a, b) = (spec_a.theta(), spec_b.theta());
    let offset = grid.offset();
    let primary = harmonicity_defect(a, b, grid)?;
    let second = harmonicity_defect(a, b, &offset)?;
    let worst = if second.max_deviation > primary.max_deviation { second } else { primary };
    let relative = primary.max_relative.max(second.max_relative);
    let grids = vec![*grid, offset];

    if relative <= tol {
        return Ok(Verdict {
            outcome: Outcome::Isomorphic,
            branch: Branch::Harmonicity,
            witness: None,
            max_deviation: Some(worst.max_deviation),
            relative_deviation: Some(relative),
            grids,
            tol,
            diagnostics: None,
        });
    }

    let step = grid.r_max() / T::count(grid.n_r());
    let witness = refine_witness(a, b, worst.argmax, grid.r_max(), step);
    let max_deviation = worst.max_deviation.max(witness.obstruction.abs());
    let (outcome, diagnostics) = if relative > T::lit(REJECT_FACTOR) * tol {
        (Outcome::NotIsomorphic, None)
    } else {
        let msg = format!(
            "relative deviation {:e} between tol {:e} and {:e}; largest Laplacian magnitude {:e}",
            relative,
            tol,
            T::lit(REJECT_FACTOR) * tol,
            worst.magnitude.max(second.magnitude),
        );
        (Outcome::Inconclusive, Some(msg))
    };
    Ok(Verdict {
        outcome,
        branch: Branch::Harmonicity,
        witness: Some(witness),
        max_deviation: Some(max_deviation),
        relative_deviation: Some(relative),
        grids,
        tol,
        diagnostics,
    })
}

pub const PROBE_STEP: f64 = 1e-3;

/// Max over the grid of `|FD ∇² g − 1/(1−|z|²)²|` for `g = −¼ log(1−|z|²)`.
///
/// The potential `g` has Laplacian `(1−|z|²)^{-2}`, which is unbounded, so no
/// bounded `f` can satisfy `∇² f = (1−|z|²)^{-2}` and differ from `g` by a
/// harmonic function bounded on the disk. This checks the identity itself.
pub fn potential_probe<T: Real>(grid: &DiskGrid<T>) -> Result<T> {
    let g = |z: Complex<T>| -T::lit(0.25) * (T::one() - z.norm_sqr()).ln();
    grid.points().iter().try_fold(T::zero(), |acc, &z| {
        let d = T::one() - z.norm_sqr();
        let fd = fd_laplacian(g, z, T::lit(PROBE_STEP))?;
        Ok(acc.max((fd - (d * d).recip()).abs()))
    })
}
