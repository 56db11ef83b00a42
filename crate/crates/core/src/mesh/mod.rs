//! Graded multi-block C-grid construction.

mod cgrid;
pub mod export;
pub mod grading;
pub mod tfi;

pub use cgrid::{
    assemble_cgrid, CGridLayout, MeshBlock, MeshParams, StructuredMesh, PATCH_AIRFOIL, PATCH_FREESTREAM,
};
pub use grading::{auto_ratio, distribute_edge, geometric_cell_count, Direction, GradedEdge};
pub use export::{block_mesh_dict, write_mesh};
pub use tfi::{transfinite_fill, NodeGrid};

use crate::constants::{NU_AIR, RHO_AIR};

/// Wall `y+` of a first cell of height `first_cell`, with the wall shear stress taken from
/// the turbulent flat-plate estimate `C_f = 0.0576 Re_x^(-1/5)` at `x_ref`.
pub fn estimate_y_plus(first_cell: f64, u_inf: f64, x_ref: f64) -> f64 {
    let re_x = u_inf * x_ref / NU_AIR;
    let cf = 0.0576 * re_x.powf(-0.2);
    let tau_w = 0.5 * cf * RHO_AIR * u_inf * u_inf;
    let u_tau = (tau_w / RHO_AIR).sqrt();
    first_cell * u_tau / NU_AIR
}
