//! Interpolatory model reduction for linear descriptor systems
//!
//! `E x' = A x + B u`, `y = C x + D u` with a possibly singular `E`.
//!
//! The reduced models produced here interpolate the full transfer function
//! `G(s) = C (sE - A)^-1 B + D` tangentially at chosen points *and* reproduce
//! its polynomial part exactly, so the error `G - G~` stays strictly proper.
//!
//! Module map:
//!
//! * [`system`]: descriptor systems, interpolation data and reduced models
//! * [`linalg`]: shifted solves, small generalized eigenproblems, real bases
//! * [`spectral`]: dense Weierstrass form, spectral projectors, polynomial part
//! * [`interpolation`]: Krylov bases, projection, naive and projector-aware reduction
//! * [`irka`]: H2-optimal fixed-point iteration and first-order optimality checks
//! * [`index1`], [`index2`]: projector-free reduction of structured DAEs
//! * [`analysis`]: transfer evaluation, Bode sweeps, H2 and sampled H-infinity norms
//! * [`io`], [`synthetic`]: Matrix Market files, manifests, test-system generators

// links the system OpenBLAS/LAPACK used by the QZ and eigenvector routines
extern crate openblas_src;

pub mod analysis;
mod error;
pub mod index1;
pub mod index2;
pub mod interpolation;
pub mod io;
pub mod irka;
pub mod linalg;
mod lapack_ffi;
pub mod matrix;
pub mod spectral;
pub mod synthetic;
pub mod system;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

pub use analysis::TransferFunction;
pub use matrix::{SparseMatrix, SysMatrix};
pub use system::{
    DescriptorSystem, InterpolationData, MatrixPolynomial, Method, Provenance, ReducedModel,
    StateSpace, StructureKind,
};
