//! Whitney forms on flat pseudo-Riemannian spaces in three equivalent
//! representations, plus a multisymplectic variational integrator for the
//! 1+1-dimensional wave equation on abstract Lorentzian simplicial meshes.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod mesh;
pub mod simplex;
pub mod verify;
pub mod wave;
pub mod whitney;

pub use error::{Error, Result};
