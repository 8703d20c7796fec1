//! Exterior algebra over a real vector space with a diagonal
//! pseudo-Riemannian metric.

mod metric;
mod ops;
mod tensor;

pub use metric::{MetricSignature, MAX_DIM};
pub use ops::{basis_tensors, contract, flat, hodge, hodge_right, inner, sharp, wedge, wedge_all, VolumeElement};
pub use tensor::{binomial, blades, KTensor, Variance};
