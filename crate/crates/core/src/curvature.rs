//! Curvature of the quotient line bundle.
//!
//! Convention: the Laplacian is `∇² = 4 ∂∂̄`, and a curvature is represented
//! by the real coefficient `c(z)` of the form `c(z) dz ∧ dz̄`, so that for a
//! non-vanishing section `γ` the curvature is `-¼ ∇² log ||γ_z||²`. Getting
//! the factor 4 wrong would silently corrupt every equivalence decision, so
//! all engines here (analytic and finite-difference) share this convention.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::corona::CoronaCertificate;
use crate::error::{outside, Error, Result};
use crate::holofun::MultiplierPair;
use crate::rkhs::ModuleKind;
use crate::scalar::Real;

/// `|θ₁|² + |θ₂|²` below this value is treated as a common zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-30;
/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// A base module together with a multiplier pair, describing the quotient
/// `(H ⊗ C²) / Θ H`.
///
/// Curvature and equivalence operations require the spec to carry a corona
/// certificate, which only [`QuotientSpec::certify`] can attach.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpec<T: Real> {
    base: ModuleKind<T>,
    theta: MultiplierPair<T>,
    pub(crate) certificate: Option<CoronaCertificate<T>>,
}

impl<T: Real> QuotientSpec<T> {
    pub fn new(base: ModuleKind<T>, theta: MultiplierPair<T>) -> Self {
        Self { base, theta, certificate: None }
    }

    pub fn base(&self) -> ModuleKind<T> {
        self.base
    }

    pub fn theta(&self) -> &MultiplierPair<T> {
        &self.theta
    }

    pub fn certificate(&self) -> Option<&CoronaCertificate<T>> {
        self.certificate.as_ref()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    pub(crate) fn require_certified(&self) -> Result<()> {
        if self.is_certified() {
            Ok(())
        } else {
            Err(Error::UncertifiedSpec)
        }
    }

    /// `||γ_w||² = K(w, w) (|θ₁(w)|² + |θ₂(w)|²)`.
    pub fn section_norm_sq(&self, w: Complex<T>) -> Result<T> {
        if w.norm() >= T::one() {
            return Err(outside(w));
        }
        Ok(self.base.kernel_diag_unchecked(w) * self.theta.sum_sq_unchecked(w))
    }
}

/// Polar sample grid `r_j e^{iφ_k}` with `r_j = r_max (j + ½) / n_r` and
/// `φ_k = phase + 2πk / n_theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskGrid<T: Real> {
    r_max: T,
    n_r: usize,
    n_theta: usize,
    phase: T,
}

impl<T: Real> DiskGrid<T> {
    pub fn new(r_max: T, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_max > T::zero() && r_max < T::one()) {
            return Err(Error::InvalidGrid(format!("r_max = {r_max} not in (0, 1)")));
        }
        if n_r == 0 || n_theta == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {n_r} x {n_theta}")));
        }
        Ok(Self { r_max, n_r, n_theta, phase: T::zero() })
    }

    /// Grid used by equivalence decisions: `r_max = 0.8`, 24 × 48.
    pub fn decision_default() -> Self {
        Self { r_max: T::lit(0.8), n_r: 24, n_theta: 48, phase: T::zero() }
    }

    /// Grid used for curvature fields: `r_max = 0.9`, 24 × 48.
    pub fn field_default() -> Self {
        Self { r_max: T::lit(0.9), n_r: 24, n_theta: 48, phase: T::zero() }
    }

    /// Same grid rotated by half an angular step.
    pub fn offset(&self) -> Self {
        let half_step = T::PI() / T::count(self.n_theta);
        Self { phase: self.phase + half_step, ..*self }
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn phase(&self) -> T {
        self.phase
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Radius index outer, angle index inner.
    pub fn points(&self) -> Vec<Complex<T>> {
        let two_pi = T::lit(2.0) * T::PI();
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_r {
            let r = self.r_max * (T::count(j) + T::lit(0.5)) / T::count(self.n_r);
            for k in 0..self.n_theta {
                let phi = self.phase + two_pi * T::count(k) / T::count(self.n_theta);
                out.push(Complex::from_polar(r, phi));
            }
        }
        out
    }
}

/// Sampled curvature coefficient over a [`DiskGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T: Real> {
    pub grid: DiskGrid<T>,
    pub points: Vec<Complex<T>>,
    pub values: Vec<T>,
    /// Free-form description of the spec the field was computed from.
    pub provenance: String,
}

impl<T: Real> CurvatureField<T> {
    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// CSV with header `re,im,curvature`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,curvature\n");
        for (z, v) in self.points.iter().zip(&self.values) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", z.re, z.im, v);
        }
        out
    }
}

/// `∇² log(|θ₁|² + |θ₂|²)` at `z`, in closed form.
///
/// With `u = |θ₁|² + |θ₂|²`, Wirtinger calculus gives
/// `∇² log u = 4 (u ∂∂̄u − |∂u|²) / u²`, and by the Lagrange identity the
/// numerator equals `|θ₁θ₂′ − θ₂θ₁′|²`. That form is evaluated here because it
/// has no cancellation.
pub fn laplacian_log_sumsq<T: Real>(theta: &MultiplierPair<T>, z: Complex<T>) -> Result<T> {
    if z.norm() >= T::one() {
        return Err(outside(z));
    }
    let [t1, t2, d1, d2] = theta.jet(z);
    let u = t1.norm_sqr() + t2.norm_sqr();
    if !(u >= T::lit(DEGENERACY_THRESHOLD)) {
        return Err(Error::DegeneratePoint {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            u: u.to_f64_lossy(),
        });
    }
    let wronskian = t1 * d2 - t2 * d1;
    Ok(T::lit(4.0) * wronskian.norm_sqr() / (u * u))
}

/// Five-point Laplacian `(f(z+h) + f(z−h) + f(z+ih) + f(z−ih) − 4f(z)) / h²`.
///
/// Every stencil point must lie in the open disk.
pub fn fd_laplacian<T: Real, F>(f: F, z: Complex<T>, h: T) -> Result<T>
where
    F: Fn(Complex<T>) -> T,
{
    let stencil = [
        z + Complex::new(h, T::zero()),
        z - Complex::new(h, T::zero()),
        z + Complex::new(T::zero(), h),
        z - Complex::new(T::zero(), h),
    ];
    if !(h > T::zero()) || stencil.iter().any(|p| p.norm() >= T::one()) {
        return Err(Error::StencilOutsideDomain {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            h: h.to_f64_lossy(),
        });
    }
    let sum = stencil.iter().fold(T::zero(), |acc, &p| acc + f(p));
    Ok((sum - T::lit(4.0) * f(z)) / (h * h))
}

/// Richardson-extrapolated Laplacian from steps `h` and `h/2`; `O(h⁴)` for smooth fields.
pub fn fd_laplacian_richardson<T: Real, F>(f: F, z: Complex<T>, h: T) -> Result<T>
where
    F: Fn(Complex<T>) -> T,
{
    let coarse = fd_laplacian(&f, z, h)?;
    let fine = fd_laplacian(&f, z, h / T::lit(2.0))?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

/// `-¼ ∇² log ||γ_z||²` from a section norm, by finite differences.
pub fn curvature_from_norm<T: Real, F>(norm_sq: F, z: Complex<T>, h: T) -> Result<T>
where
    F: Fn(Complex<T>) -> T,
{
    Ok(-T::lit(0.25) * fd_laplacian(|w| norm_sq(w).ln(), z, h)?)
}

/// Curvature of the quotient: `K_H(z) − ¼ ∇² log(|θ₁(z)|² + |θ₂(z)|²)`.
pub fn quotient_curvature<T: Real>(spec: &QuotientSpec<T>, z: Complex<T>) -> Result<T> {
    spec.require_certified()?;
    let base = spec.base().base_curvature(z)?;
    Ok(base - T::lit(0.25) * laplacian_log_sumsq(spec.theta(), z)?)
}

pub(crate) fn at_point<T: Real>(z: Complex<T>, e: Error) -> Error {
    Error::AtPoint { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy(), source: Box::new(e) }
}

/// Quotient curvature at every grid point, evaluated in parallel.
pub fn curvature_field<T: Real>(spec: &QuotientSpec<T>, grid: &DiskGrid<T>) -> Result<CurvatureField<T>> {
    spec.require_certified()?;
    let points = grid.points();
    let values = points
        .par_iter()
        .map(|&z| quotient_curvature(spec, z).map_err(|e| at_point(z, e)))
        .collect::<Result<Vec<T>>>()?;
    Ok(CurvatureField {
        grid: *grid,
        points,
        values,
        provenance: format!(
            "base={} theta1={} theta2={}",
            spec.base(),
            spec.theta().theta1(),
            spec.theta().theta2()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holofun::HoloFun;

    type C = Complex<f64>;
    type F = HoloFun<f64>;

    fn pair(a: &[f64], b: &[f64]) -> MultiplierPair<f64> {
        MultiplierPair::new(F::real_poly(a), F::real_poly(b)).unwrap()
    }

    fn certified(base: ModuleKind<f64>, p: MultiplierPair<f64>) -> QuotientSpec<f64> {
        QuotientSpec::new(base, p).certify(1e-6).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let p = pair(&[1.0], &[0.0, 1.0]);
        assert!((laplacian_log_sumsq(&p, C::new(0.0, 0.0)).unwrap() - 4.0).abs() < 1e-15);
        let fd = fd_laplacian(|w| p.sum_sq_unchecked(w).ln(), C::new(0.0, 0.0), 1e-3).unwrap();
        assert!((fd - 4.0).abs() < 1e-5);

        let constant = pair(&[3.0], &[]);
        for z in [C::new(0.0, 0.0), C::new(0.4, -0.3)] {
            assert_eq!(laplacian_log_sumsq(&constant, z).unwrap(), 0.0);
        }

        let f = F::real_poly(&[2.0, 1.0]);
        let twisted = p.times(&f).unwrap();
        let z = C::new(0.0, 0.3);
        let a = laplacian_log_sumsq(&p, z).unwrap();
        let b = laplacian_log_sumsq(&twisted, z).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((a - 4.0 / (1.09f64).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn laplacian_errors() {
        let p = pair(&[0.0, 1.0], &[0.0, 0.0, 1.0]);
        assert!(matches!(laplacian_log_sumsq(&p, C::new(0.0, 0.0)), Err(Error::DegeneratePoint { .. })));
        assert!(matches!(laplacian_log_sumsq(&p, C::new(1.0, 0.0)), Err(Error::PointOutsideDomain(..))));
    }

    #[test]
    fn fd_laplacian_examples() {
        let v = fd_laplacian(|w: C| w.norm_sqr(), C::new(0.3, -0.2), 1e-3).unwrap();
        assert!((v - 4.0).abs() < 1e-6);
        let v = fd_laplacian(|w: C| (w * w * w).re, C::new(0.2, 0.0), 1e-3).unwrap();
        assert!(v.abs() < 1e-6);
        let hardy = ModuleKind::<f64>::Hardy;
        let v = fd_laplacian(|w| hardy.kernel_eval(w, w).unwrap().re.ln(), C::new(0.5, 0.0), 1e-3).unwrap();
        assert!((v - 64.0 / 9.0).abs() < 1e-3);
        assert!((-0.25 * v - hardy.base_curvature(C::new(0.5, 0.0)).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn fd_stencil_must_stay_inside() {
        let r = fd_laplacian(|w: C| w.norm_sqr(), C::new(0.9995, 0.0), 1e-3);
        assert!(matches!(r, Err(Error::StencilOutsideDomain { .. })));
        let r = fd_laplacian(|w: C| w.norm_sqr(), C::new(0.0, 0.0), 0.0);
        assert!(matches!(r, Err(Error::StencilOutsideDomain { .. })));
    }

    #[test]
    fn richardson_improves_accuracy() {
        let hardy = ModuleKind::<f64>::Hardy;
        let z = C::new(0.6, 0.1);
        let exact = -4.0 * hardy.base_curvature(z).unwrap();
        let f = |w: C| hardy.kernel_eval(w, w).unwrap().re.ln();
        let plain = fd_laplacian(f, z, 1e-2).unwrap();
        let rich = fd_laplacian_richardson(f, z, 1e-2).unwrap();
        assert!((rich - exact).abs() < (plain - exact).abs());
    }

    #[test]
    fn quotient_curvature_examples() {
        let s = certified(ModuleKind::Hardy, pair(&[1.0], &[0.0, 1.0]));
        assert!((quotient_curvature(&s, C::new(0.0, 0.0)).unwrap() + 2.0).abs() < 1e-14);

        let s = certified(ModuleKind::Hardy, pair(&[1.0], &[1.0]));
        let v = quotient_curvature(&s, C::new(0.4, 0.0)).unwrap();
        assert!((v + 1.0 / (0.84f64 * 0.84)).abs() < 1e-14);

        let s = certified(ModuleKind::bergman(), pair(&[1.0], &[0.0, 1.0]));
        assert!((quotient_curvature(&s, C::new(0.0, 0.0)).unwrap() + 3.0).abs() < 1e-14);
    }

    #[test]
    fn uncertified_spec_rejected() {
        let s = QuotientSpec::new(ModuleKind::Hardy, pair(&[1.0], &[0.0, 1.0]));
        assert!(matches!(quotient_curvature(&s, C::new(0.0, 0.0)), Err(Error::UncertifiedSpec)));
        assert!(matches!(
            curvature_field(&s, &DiskGrid::decision_default()),
            Err(Error::UncertifiedSpec)
        ));
    }

    #[test]
    fn grid_shape() {
        assert!(DiskGrid::<f64>::new(0.5, 0, 8).is_err());
        assert!(DiskGrid::<f64>::new(0.5, 4, 0).is_err());
        assert!(DiskGrid::<f64>::new(1.0, 4, 8).is_err());
        let g = DiskGrid::<f64>::new(0.5, 4, 8).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 32);
        assert!((pts[0] - C::new(0.0625, 0.0)).norm() < 1e-15);
        assert!(pts.iter().all(|p| p.norm() < 0.5));
        let off = g.offset().points();
        assert!((off[0].arg() - std::f64::consts::PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn field_examples() {
        let s = certified(ModuleKind::Hardy, pair(&[1.0], &[0.0, 1.0]));
        let g = DiskGrid::new(0.5, 4, 8).unwrap();
        let field = curvature_field(&s, &g).unwrap();
        assert_eq!(field.values.len(), 32);
        assert!(field.values.iter().all(|v| v.is_finite() && *v < 0.0));

        let s = certified(ModuleKind::Hardy, pair(&[1.0], &[1.0]));
        let field = curvature_field(&s, &g).unwrap();
        for (z, v) in field.points.iter().zip(&field.values) {
            assert_eq!(*v, ModuleKind::Hardy.base_curvature(*z).unwrap());
        }
    }

    #[test]
    fn csv_format() {
        let s = certified(ModuleKind::Hardy, pair(&[1.0], &[1.0]));
        let field = curvature_field(&s, &DiskGrid::new(0.5, 1, 2).unwrap()).unwrap();
        let csv = field.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("re,im,curvature"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row[0], 0.25);
        assert_eq!(row[2], field.values[0]);
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn works_in_single_precision() {
        let p = MultiplierPair::<f32>::new(HoloFun::real_poly(&[1.0]), HoloFun::real_poly(&[0.0, 1.0])).unwrap();
        let v = laplacian_log_sumsq(&p, Complex::new(0.0f32, 0.0)).unwrap();
        assert!((v - 4.0).abs() < 1e-6);
    }
}
