//! Exact state-sum invariants of closed 3-manifolds.
//!
//! Turaev-Viro invariants of pointed fusion categories Vec_G^ω and the
//! bicategorical state sum over their spherical module categories, computed
//! over cyclotomic fields on skeletons of triangulated manifolds.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod cli;
pub mod fusion;
pub mod groups;
pub mod linalg;
pub mod modsph;
pub mod moves;
pub mod oracle;
pub mod scalar;
pub mod skeleton;
pub mod statesum;
pub mod triangulation;
pub mod zmod;
