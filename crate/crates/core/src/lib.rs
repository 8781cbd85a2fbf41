//! Extended combinatorial Ricci flow for hyper-ideal polyhedral metrics on
//! ideally triangulated pseudo 3-manifolds.
//!
//! * [`hypertet`]: dihedral angles, realizability and co-volume of one tetrahedron.
//! * [`complex`]: gluing tables, manifests and edge classes.
//! * [`curvature`]: curvature, the functional H and the curvature Jacobian.
//! * [`flow`]: the flow integrator, Newton polish and [`flow::solve`].
//! * [`analysis`]: rate fits, bound certificates and spectral stability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod complex;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod hypertet;
pub mod quadrature;

pub use error::{Error, Result};
