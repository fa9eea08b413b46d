use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
///
/// Points are reported as `(re, im)` pairs in `f64` regardless of the scalar
/// type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the admissible domain")]
    PointOutsideDomain(f64, f64),

    #[error("denominator vanishes at ({re}, {im}), |z| = {modulus} inside the closed disk")]
    DenominatorVanishesInDisk { re: f64, im: f64, modulus: f64 },

    #[error("denominator is identically zero")]
    ZeroDenominator,

    #[error("multiplier pair has both components identically zero")]
    ZeroPair,

    #[error("weight parameter alpha = {0} must satisfy alpha > -1")]
    InvalidWeight(f64),

    #[error("|theta1|^2 + |theta2|^2 = {u:e} at ({re}, {im}); common zero reached")]
    DegeneratePoint { re: f64, im: f64, u: f64 },

    #[error("finite-difference stencil at ({re}, {im}) with step {h} leaves the disk")]
    StencilOutsideDomain { re: f64, im: f64, h: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quotient spec has not been certified by the corona check")]
    UncertifiedSpec,

    #[error("operation requires a polynomial, got a rational function")]
    NotPolynomial,

    #[error("Taylor tail bound {bound:e} exceeds {limit:e} at degree {degree}")]
    TailBoundExceeded { bound: f64, limit: f64, degree: usize },

    #[error("no factor-10 singular value gap around threshold {threshold:e}")]
    NoSpectralGap { threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("at point ({re}, {im}): {source}")]
    AtPoint {
        re: f64,
        im: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn outside<T: crate::Real>(z: num_complex::Complex<T>) -> Error {
    Error::PointOutsideDomain(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}
