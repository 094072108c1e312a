//! Bilateral Grand Lebesgue spaces `G(ψ)` and their associate Small
//! Lebesgue spaces `SL(ψ)`: norms, fundamental functions, duality
//! certificates, χ-integrals, dilation indices and an example catalog.
//!
//! Every routine is generic over [`Scalar`]; the aliases below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod chiest;
pub mod error;
pub mod fundamental;
pub mod grandnorm;
pub mod indices;
pub mod linalg;
pub mod measure;
pub mod psi;
pub mod quadrature;
pub mod scalar;
pub mod search;
pub mod smallnorm;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Psi = psi::PsiFunction<f64>;
pub type Zeta = psi::ZetaParams<f64>;
pub type Space = measure::MeasureSpace<f64>;
pub type Sampled = measure::SampledFunction<f64>;
pub type Simple = chiest::SimpleFunction<f64>;
pub type ChiFn = chiest::Chi<f64>;
pub type Entry = catalog::CatalogEntry<f64>;
pub type Decomp = smallnorm::Decomposition<f64>;
pub type Report = grandnorm::NormReport<f64>;
