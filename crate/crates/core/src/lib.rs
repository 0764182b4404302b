//! Differential Lie algebras of arbitrary weight: cohomology, extensions,
//! deformations and the derived-bracket L∞[1] structures, in exact arithmetic.

pub mod catalog;
pub mod cohomology;
pub mod combinatorics;
pub mod deformations;
pub mod error;
pub mod extensions;
pub mod homotopy;
pub mod lie;
pub mod linalg;
pub mod linfty;
pub mod multilinear;
pub mod nr;
pub mod par;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
