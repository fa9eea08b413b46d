//! Curvature invariants of quotient Hilbert modules `(H ⊗ C²) / ΘH` over the
//! unit disk, where `H` is the Hardy space or a weighted Bergman space, and
//! decisions on their unitary equivalence.
//!
//! The numerical core is generic over the scalar through [`Real`]; the `*64`
//! and `*32` aliases below fix it to `f64` and `f32`.

pub mod cli;
pub mod corona;
pub mod curvature;
pub mod equivalence;
pub mod error;
pub mod holofun;
pub mod linalg;
pub mod literal;
pub mod oracle;
pub mod poly;
pub mod rkhs;
pub mod scalar;

pub use corona::{certify, certify_tight, check_corona, CoronaCertificate, CoronaFailure, FailureKind};
pub use curvature::{curvature_field, quotient_curvature, CurvatureField, DiskGrid, QuotientSpec};
pub use equivalence::{decide_equivalence, harmonicity_defect, potential_probe, Branch, Outcome, Verdict, Witness};
pub use error::{Error, Result};
pub use holofun::{FunKind, HoloFun, MultiplierPair};
pub use poly::Poly;
pub use rkhs::{ModuleKind, Weight};
pub use scalar::{Cplx, Real};

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;
pub type HoloFun64 = HoloFun<f64>;
pub type HoloFun32 = HoloFun<f32>;
pub type MultiplierPair64 = MultiplierPair<f64>;
pub type MultiplierPair32 = MultiplierPair<f32>;
pub type QuotientSpec64 = QuotientSpec<f64>;
pub type QuotientSpec32 = QuotientSpec<f32>;
pub type ModuleKind64 = ModuleKind<f64>;
pub type ModuleKind32 = ModuleKind<f32>;
pub type DiskGrid64 = DiskGrid<f64>;
pub type DiskGrid32 = DiskGrid<f32>;
