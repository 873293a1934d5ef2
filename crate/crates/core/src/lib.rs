//! Transient radar backscatter of conducting and dielectric-coated bodies of
//! revolution: geometry, a moment-method solver, a sphere series reference,
//! pulse synthesis and echo analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bor;
pub mod echo;
pub mod error;
pub mod fsr;
pub mod geometry;
pub mod mie;
pub mod pulse;
pub mod quadrature;
pub mod special;
pub mod synthesis;

pub use error::{Error, Result};
pub use fsr::{FsrMetadata, FsrSample, FsrTable};
pub use geometry::{BorMesh, GeneratrixProfile, GeometrySpec};
pub use num_complex::Complex64;
