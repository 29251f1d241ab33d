//! Curvature flow of planar star-shaped domains around the unit disk, with a
//! nonlocal term from the capacity potential of the enclosed ring:
//! the boundary moves inward with speed `V = H - u_nu^2`.
//!
//! Crate layout:
//! - [`geometry`]: polar curves and their differential geometry.
//! - [`potential`]: the capacity potential and its boundary flux.
//! - [`radial`]: exact disk solutions, the stationary radius and barriers.
//! - [`flow`]: time stepping of the coupled system.
//! - [`verify`]: numerical checks of the qualitative theory.
//! - [`manifest`] and [`output`]: run configuration files and CSV/SVG output.

pub mod error;
pub mod exec;
pub mod flow;
pub mod geometry;
pub mod manifest;
pub mod output;
pub mod potential;
pub mod radial;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
