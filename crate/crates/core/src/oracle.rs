//! Brute-force checks by finite truncation.
//!
//! Everything here works in the orthonormal monomial basis
//! `e_k = z^k / ||z^k||`, `k = 0..=N`, of the base module, and never calls the
//! closed-form curvature identities of [`crate::curvature`]. The ambient space
//! `H ⊗ C²` is truncated to two stacked copies of that basis (the `e₁` block
//! first).

use num_complex::Complex;
use num_traits::Zero;

use crate::curvature::{curvature_from_norm, QuotientSpec};
use crate::error::{outside, Error, Result};
use crate::holofun::{FunKind, HoloFun, MultiplierPair};
use crate::linalg::{inner, singular_values, vec_norm, CMatrix, HouseholderQr};
use crate::rkhs::ModuleKind;
use crate::scalar::Real;

pub const DEFAULT_DEGREE: usize = 120;
/// Rational multipliers enter the matrices through Taylor polynomials of this degree.
pub const RATIONAL_TAYLOR_DEGREE: usize = 64;
/// Largest admissible sup-norm error of that Taylor truncation on the closed disk.
pub const TAIL_LIMIT: f64 = 1e-10;
/// Relative threshold on `|R_kk|` for the rank of the multiplier matrix.
pub const RANK_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_GAP_TOL: f64 = 1e-4;

/// A finite section of a module operator in orthonormal monomial bases.
#[derive(Debug, Clone)]
pub struct TruncatedOperator<T: Real> {
    pub matrix: CMatrix<T>,
    pub kind: ModuleKind<T>,
    /// Degree of the domain truncation.
    pub degree: usize,
    /// Degree of the codomain truncation (per `C²` block for multipliers).
    pub codomain_degree: usize,
}

/// Weighted shift: entry `(k+1, k)` is `shift_weight(k)`.
pub fn build_shift<T: Real>(kind: ModuleKind<T>, n: usize) -> Result<TruncatedOperator<T>> {
    if n < 1 {
        return Err(Error::InvalidArgument("shift truncation needs N >= 1".into()));
    }
    let mut m = CMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        m[(k + 1, k)] = Complex::new(kind.shift_weight(k), T::zero());
    }
    Ok(TruncatedOperator { matrix: m, kind, degree: n, codomain_degree: n })
}

/// Taylor coefficients used for a component inside the matrices.
pub fn matrix_coefficients<T: Real>(f: &HoloFun<T>) -> Result<Vec<Complex<T>>> {
    match f.kind() {
        FunKind::Polynomial => Ok(f.numerator().coeffs().to_vec()),
        FunKind::Rational => {
            let bound = f.taylor_tail_bound(RATIONAL_TAYLOR_DEGREE);
            if !(bound <= T::lit(TAIL_LIMIT)) {
                return Err(Error::TailBoundExceeded {
                    bound: bound.to_f64_lossy(),
                    limit: TAIL_LIMIT,
                    degree: RATIONAL_TAYLOR_DEGREE,
                });
            }
            let mut c = f.taylor(RATIONAL_TAYLOR_DEGREE);
            while c.last().is_some_and(|x| x.is_zero()) {
                c.pop();
            }
            Ok(c)
        }
    }
}

// multiplication by Σ c_j z^j from degree ≤ n_dom into degree ≤ n_cod, orthonormal bases
fn multiplication_block<T: Real>(coeffs: &[Complex<T>], norms: &[T], n_dom: usize, n_cod: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(n_cod + 1, n_dom + 1);
    for k in 0..=n_dom {
        for (j, &c) in coeffs.iter().enumerate() {
            let row = j + k;
            if row > n_cod {
                break;
            }
            m[(row, k)] = c * (norms[row] / norms[k]).sqrt();
        }
    }
    m
}

/// Matrix of `f ↦ (θ₁ f, θ₂ f)` from degree `n` into two stacked blocks of
/// degree `n + d`, where `d` is the largest component degree.
pub fn build_multiplier<T: Real>(
    theta: &MultiplierPair<T>,
    kind: ModuleKind<T>,
    n: usize,
) -> Result<TruncatedOperator<T>> {
    let c1 = matrix_coefficients(theta.theta1())?;
    let c2 = matrix_coefficients(theta.theta2())?;
    let d = c1.len().max(c2.len()).saturating_sub(1);
    let n_cod = n + d;
    let norms = kind.monomial_norms_sq(n_cod);
    let b1 = multiplication_block(&c1, &norms, n, n_cod);
    let b2 = multiplication_block(&c2, &norms, n, n_cod);
    let block = n_cod + 1;
    let m = CMatrix::from_fn(2 * block, n + 1, |i, j| if i < block { b1[(i, j)] } else { b2[(i - block, j)] });
    Ok(TruncatedOperator { matrix: m, kind, degree: n, codomain_degree: n_cod })
}

/// Coordinates of `k_w` in the orthonormal basis: `conj(w)^k / ||z^k||`.
pub fn kernel_coordinates<T: Real>(kind: ModuleKind<T>, w: Complex<T>, n: usize) -> Vec<Complex<T>> {
    let norms = kind.monomial_norms_sq(n);
    let wc = w.conj();
    let mut pow = Complex::new(T::one(), T::zero());
    norms
        .iter()
        .map(|&nk| {
            let c = pow / nk.sqrt();
            pow = pow * wc;
            c
        })
        .collect()
}

/// The section `γ_w = k_w ⊗ (conj θ₂(w) e₁ − conj θ₁(w) e₂)`.
#[derive(Debug, Clone)]
pub struct GammaSection<T: Real> {
    pub w: Complex<T>,
    /// Closed-form `K(w, w) (|θ₁(w)|² + |θ₂(w)|²)`.
    pub norm_sq: T,
    /// Degree-`N` truncation, `e₁` block then `e₂` block.
    pub coords: Vec<Complex<T>>,
}

pub fn gamma_section<T: Real>(spec: &QuotientSpec<T>, w: Complex<T>, n: usize) -> Result<GammaSection<T>> {
    if w.norm() >= T::one() {
        return Err(outside(w));
    }
    let (t1, t2) = (spec.theta().theta1().eval(w)?, spec.theta().theta2().eval(w)?);
    let k = kernel_coordinates(spec.base(), w, n);
    let mut coords = Vec::with_capacity(2 * (n + 1));
    coords.extend(k.iter().map(|&c| c * t2.conj()));
    coords.extend(k.iter().map(|&c| -c * t1.conj()));
    let norm_sq = spec.base().kernel_diag_unchecked(w) * (t1.norm_sqr() + t2.norm_sqr());
    Ok(GammaSection { w, norm_sq, coords })
}

/// Hermitian Gram matrix `G[i][j] = ⟨γ_{p_i}, γ_{p_j}⟩
/// = K(p_j, p_i) (conj θ₁(p_i) θ₁(p_j) + conj θ₂(p_i) θ₂(p_j))`, no truncation.
pub fn gamma_gram<T: Real>(spec: &QuotientSpec<T>, points: &[Complex<T>]) -> Result<CMatrix<T>> {
    if let Some(&p) = points.iter().find(|p| p.norm() >= T::one()) {
        return Err(outside(p));
    }
    let vals: Vec<(Complex<T>, Complex<T>)> = points
        .iter()
        .map(|&p| Ok((spec.theta().theta1().eval(p)?, spec.theta().theta2().eval(p)?)))
        .collect::<Result<_>>()?;
    let kind = spec.base();
    Ok(CMatrix::from_fn(points.len(), points.len(), |i, j| {
        let (a1, a2) = vals[i];
        let (b1, b2) = vals[j];
        kind.kernel_unchecked(points[j], points[i]) * (a1.conj() * b1 + a2.conj() * b2)
    }))
}

/// Finite-difference curvature `-¼ ∇² log ||γ_z||²` with `||γ_z||²` read off
/// the diagonal of [`gamma_gram`].
pub fn oracle_curvature<T: Real>(spec: &QuotientSpec<T>, z: Complex<T>, h: T) -> Result<T> {
    spec.require_certified()?;
    // stencil points are validated by fd_laplacian before evaluation
    let norm = |w: Complex<T>| {
        gamma_gram(spec, &[w]).map(|g| g[(0, 0)].re).unwrap_or_else(|_| T::nan())
    };
    curvature_from_norm(norm, z, h)
}

/// `||(M_z ⊗ I)^* γ_w^{(N)} − conj(w) γ_w^{(N)}|| / ||γ_w^{(N)}||`.
pub fn eigenvector_residual<T: Real>(spec: &QuotientSpec<T>, w: Complex<T>, n: usize) -> Result<T> {
    spec.require_certified()?;
    let gamma = gamma_section(spec, w, n)?;
    let shift = build_shift(spec.base(), n)?.matrix.kron_identity(2);
    let image = shift.adjoint().mul_vec(&gamma.coords);
    let wc = w.conj();
    let diff: Vec<Complex<T>> = image.iter().zip(&gamma.coords).map(|(&a, &g)| a - g * wc).collect();
    let denom = vec_norm(&gamma.coords);
    if denom.is_zero() {
        return Err(Error::DegeneratePoint { re: w.re.to_f64_lossy(), im: w.im.to_f64_lossy(), u: 0.0 });
    }
    Ok(vec_norm(&diff) / denom)
}

/// Result of [`dim_ker_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DimKerEstimate<T: Real> {
    pub dimension: usize,
    pub threshold: T,
    pub largest_singular_value: T,
    /// Largest singular value counted as zero (0 if none).
    pub largest_small: T,
    /// Smallest singular value counted as nonzero.
    pub smallest_large: T,
    /// `smallest_large / largest_small`; infinite when the small values are exact zeros.
    pub gap_ratio: T,
    /// Dimension of the truncated quotient.
    pub quotient_dim: usize,
}

/// Compression of `(M_z ⊗ I)^* − conj(w)` to the orthogonal complement of the
/// truncated range of `M_Θ`, as a square matrix in an orthonormal basis of
/// that complement.
///
/// The ambient truncation has degree `n`; the multiplier acts on degree
/// `n − d` so that its range stays inside it.
pub fn compressed_adjoint<T: Real>(spec: &QuotientSpec<T>, w: Complex<T>, n: usize) -> Result<CMatrix<T>> {
    let d = spec.theta().max_degree(RATIONAL_TAYLOR_DEGREE);
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!("truncation degree {n} below multiplier degree {d}")));
    }
    let b = build_multiplier(spec.theta(), spec.base(), n - d)?.matrix;
    let qr = HouseholderQr::new(&b);
    let rank = qr.rank(&b, T::lit(RANK_TOLERANCE));
    let u = qr.q.columns_from(rank);
    let shift = build_shift(spec.base(), n)?.matrix.kron_identity(2);
    let mut a0 = shift.adjoint();
    let wc = w.conj();
    for i in 0..a0.rows() {
        a0[(i, i)] = a0[(i, i)] - wc;
    }
    Ok(u.adjoint().matmul(&a0.matmul(&u)))
}

/// Counts singular values of the compressed `(N_z − w)^*` below
/// `gap_tol · σ_max`; expected to be 1.
///
/// Fails with [`Error::NoSpectralGap`] if any singular value falls within a
/// factor `√10` of the threshold on either side, so that a returned count is
/// always separated by at least a factor 10.
pub fn dim_ker_estimate<T: Real>(spec: &QuotientSpec<T>, w: Complex<T>, n: usize, gap_tol: T) -> Result<DimKerEstimate<T>> {
    spec.require_certified()?;
    if w.norm() > T::lit(0.6) {
        return Err(Error::InvalidArgument(format!("|w| = {} exceeds 0.6", w.norm())));
    }
    if n < 60 {
        return Err(Error::InvalidArgument(format!("truncation degree {n} below 60")));
    }
    if !(gap_tol > T::zero() && gap_tol < T::one()) {
        return Err(Error::InvalidArgument(format!("gap tolerance {gap_tol} not in (0, 1)")));
    }
    let a = compressed_adjoint(spec, w, n)?;
    let s = singular_values(&a);
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let threshold = gap_tol * smax;
    let band = T::lit(10f64.sqrt());
    if s.iter().any(|&x| x >= threshold / band && x <= threshold * band) {
        return Err(Error::NoSpectralGap { threshold: threshold.to_f64_lossy() });
    }
    let dimension = s.iter().filter(|&&x| x < threshold).count();
    let largest_small = s.iter().copied().filter(|&x| x < threshold).fold(T::zero(), T::max);
    let smallest_large = s.iter().copied().filter(|&x| x >= threshold).fold(T::infinity(), T::min);
    Ok(DimKerEstimate {
        dimension,
        threshold,
        largest_singular_value: smax,
        largest_small,
        smallest_large,
        gap_ratio: smallest_large / largest_small,
        quotient_dim: a.rows(),
    })
}

/// Smallest singular value of the truncated `M_Θ` on degree `n`, a monitor for
/// closedness of the range.
pub fn multiplier_min_singular_value<T: Real>(theta: &MultiplierPair<T>, kind: ModuleKind<T>, n: usize) -> Result<T> {
    let b = build_multiplier(theta, kind, n)?.matrix;
    Ok(singular_values(&b).last().copied().unwrap_or_else(T::zero))
}

/// `|⟨f, k_w⟩ − f(w)|` with `⟨f, k_w⟩` expanded through monomial inner
/// products `⟨z^j, z^k⟩ = δ_jk ||z^k||²`.
pub fn reproducing_check<T: Real>(kind: ModuleKind<T>, f: &HoloFun<T>, w: Complex<T>) -> Result<T> {
    let p = f.as_polynomial().ok_or(Error::NotPolynomial)?;
    if w.norm() >= T::one() {
        return Err(outside(w));
    }
    let n = p.degree().unwrap_or(0);
    let norms = kind.monomial_norms_sq(n);
    let wc = w.conj();
    let mut pow = Complex::new(T::one(), T::zero());
    let mut acc = Complex::<T>::zero();
    for (k, &a) in p.coeffs().iter().enumerate() {
        // k_w has coefficient conj(w)^k / ||z^k||² on z^k
        let kernel_coeff = pow / norms[k];
        acc = acc + a * kernel_coeff.conj() * norms[k];
        pow = pow * wc;
    }
    Ok((acc - f.eval(w)?).norm())
}

/// `||M_φ^* k_w − conj(φ(w)) k_w|| / ||k_w||` at degree `n`, with `M_φ`
/// compressed to degree `≤ n`.
pub fn multiplier_adjoint_residual<T: Real>(kind: ModuleKind<T>, phi: &HoloFun<T>, w: Complex<T>, n: usize) -> Result<T> {
    if w.norm() >= T::one() {
        return Err(outside(w));
    }
    let coeffs = matrix_coefficients(phi)?;
    let norms = kind.monomial_norms_sq(n);
    let m = multiplication_block(&coeffs, &norms, n, n);
    let k = kernel_coordinates(kind, w, n);
    let image = m.adjoint().mul_vec(&k);
    let target = phi.eval(w)?.conj();
    let diff: Vec<Complex<T>> = image.iter().zip(&k).map(|(&a, &b)| a - b * target).collect();
    Ok(vec_norm(&diff) / vec_norm(&k))
}

/// `|⟨M_Θ v, γ_w^{(N)}⟩| / (||v|| ||γ_w||)` for a coefficient vector `v` of degree `n − d`.
pub fn range_orthogonality<T: Real>(spec: &QuotientSpec<T>, w: Complex<T>, n: usize, v: &[Complex<T>]) -> Result<T> {
    let d = spec.theta().max_degree(RATIONAL_TAYLOR_DEGREE);
    if n < d || v.len() != n - d + 1 {
        return Err(Error::InvalidArgument(format!("vector length {} does not match degree {}", v.len(), n)));
    }
    let b = build_multiplier(spec.theta(), spec.base(), n - d)?.matrix;
    let image = b.mul_vec(v);
    let gamma = gamma_section(spec, w, n)?;
    Ok(inner(&image, &gamma.coords).norm() / (vec_norm(v) * gamma.norm_sq.sqrt()))
}
