//! Planar Laplace eigenvalue toolkit.
//!
//! Dirichlet, Neumann, mixed and Steklov spectra of planar domains, computed
//! by three independent families of methods:
//!
//! * [`fem`]: conforming P1/P2 and nonconforming Crouzeix–Raviart finite
//!   elements on red-refined triangulations of polygons,
//! * [`bie`]: Nyström collocation of single-layer boundary integral
//!   operators on unions of circles (Steklov only),
//! * [`mps`]: the method of particular solutions with Fourier–Bessel corner
//!   bases, with a-posteriori Fox–Henrici–Moler enclosures.
//!
//! All discretizations end in a matrix pencil handled by [`pencil`].
//! [`bounds`] turns sequences of discrete eigenvalues into lower bounds,
//! extrapolated limits and bracketing reports; [`reference`] provides the
//! closed-form spectra used as oracles.

pub mod bie;
pub mod bounds;
pub mod compare;
mod error;
pub mod fem;
pub mod geometry;
pub mod mps;
pub mod par;
pub mod pencil;
pub mod reference;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};

/// Toolkit version recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
