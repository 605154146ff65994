//! Generalized principal eigenvalues and maximum-principle verification for
//! fully nonlinear degenerate elliptic operators on 1D/2D grids.
//!
//! The crate is organized bottom-up:
//!
//! - [`expr`]: a small coefficient-expression grammar with second-order
//!   forward-mode derivatives.
//! - [`operators`]: the operator abstraction `F(x, r, p, X)`, the catalog of
//!   concrete operators, and randomized structural validators.
//! - [`domains`]: intervals, rectangles, disks, their signed distance, uniform
//!   lattices and node classification.
//! - [`scheme`]: monotone finite-difference residuals with the relaxed
//!   Dirichlet condition.
//! - [`eigen`]: blowup-threshold eigenvalues, domain inflation, viscous
//!   regularization.
//! - [`mp`]: the discrete maximum-principle test (maximal subsolution descent).
//! - [`certify`]: closed-form supersolution certificates.
//! - [`boundary`]: Fichera classification and log-distance barriers.
//! - [`lab`]: run configuration, reports, and the reproduction fixture suite.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Index loops mirror the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod certify;
pub mod domains;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod lab;
pub mod linalg;
pub mod mp;
pub mod operators;
pub mod par;
pub mod scheme;

pub use error::{Error, Result};
