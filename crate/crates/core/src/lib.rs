//! Common fixed points of finite families of total asymptotically
//! nonexpansive mappings, computed by an m-step averaged iteration on
//! uniformly convex geodesic spaces, with numerical diagnostics for the
//! iteration's convergence behaviour.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod iteration;
pub mod mappings;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use space::{ConvexSet, GeodesicSpace, ModulusQuery, SpaceKind, SpacePoint};
