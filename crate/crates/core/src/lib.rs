//! Optimization on semi-Riemannian manifolds: indefinite linear algebra,
//! descent directions built from orthonormal frames, first- and second-order
//! optimizers, concrete hypersurfaces and matrix groups, and numerical oracles.

// `!(a > b)` is deliberate: it rejects NaN along with the failed comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costs;
pub mod diagnostics;
pub mod error;
pub mod hypersurfaces;
pub mod indefinite;
pub mod lie;
pub mod linalg;
pub mod manifold;
pub mod optim;

pub use error::{Error, Result};
