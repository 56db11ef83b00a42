//! Geometry, meshing, post-processing and evaluation toolkit for incompressible RANS
//! simulations around NACA airfoils.

pub mod constants;
pub mod error;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod naca;
pub mod pipeline;
pub mod post;
pub mod spatial;
pub mod synthetic;

pub use error::{Error, Result};
pub use geom::Vec2;
