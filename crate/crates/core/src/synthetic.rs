//! Analytic flow fields on mesh nodes, for exercising the post-processing chain without a
//! flow solver.

use crate::constants::NU_AIR;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::StructuredMesh;
use crate::naca::{AirfoilGeometry, CaseSpec};
use crate::pipeline::signed_distance;
use crate::post::SimulationCloud;

/// Point cloud on the mesh nodes with geometry columns filled and zero flow fields.
/// Wall nodes get outward normals from their neighbours on the wall loop.
pub fn mesh_cloud(mesh: &StructuredMesh, airfoil: &AirfoilGeometry, case: &CaseSpec) -> Result<SimulationCloud> {
    let n = mesh.nodes.len();
    if n == 0 {
        return Err(Error::Data("mesh has no nodes".into()));
    }
    let mut sdf = signed_distance(&mesh.nodes, airfoil);
    let mut normals = vec![Vec2::default(); n];
    let mut surface = vec![false; n];
    let lp = &mesh.airfoil_loop;
    let m = lp.len();
    for k in 0..m {
        let prev = mesh.nodes[lp[(k + m - 1) % m]];
        let next = mesh.nodes[lp[(k + 1) % m]];
        let id = lp[k];
        normals[id] = (next - prev).perp_cw().normalized();
        surface[id] = true;
        sdf[id] = 0.0;
    }
    Ok(SimulationCloud {
        positions: mesh.nodes.clone(),
        inlet_velocity: vec![case.inlet_velocity(); n],
        sdf,
        normals,
        velocity: vec![Vec2::default(); n],
        pressure: vec![0.0; n],
        nu_t: vec![0.0; n],
        surface,
    })
}

/// Power-law boundary layer on top of the uniform inflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawLayer {
    /// Boundary-layer thickness, m.
    pub delta: f64,
    pub exponent: f64,
    /// Peak eddy-viscosity ratio, reached at the edge of the layer.
    pub nu_t_ratio: f64,
}

impl Default for PowerLawLayer {
    fn default() -> Self {
        PowerLawLayer { delta: 0.02, exponent: 1.0 / 7.0, nu_t_ratio: 50.0 }
    }
}

impl PowerLawLayer {
    /// Velocity fraction `(d / delta)^exponent`, clamped to 1 outside the layer.
    pub fn shape(&self, d: f64) -> f64 {
        (d / self.delta).clamp(0.0, 1.0).powf(self.exponent)
    }
}

/// Fill the flow columns from the wall distance: velocity `U f(d)` along the inflow,
/// reduced pressure `U^2 (1 - f^2) / 2` and eddy viscosity growing linearly through the
/// layer.
pub fn impose_power_law(cloud: &mut SimulationCloud, layer: &PowerLawLayer) {
    for i in 0..cloud.len() {
        let u = cloud.inlet_velocity[i];
        let f = layer.shape(cloud.sdf[i]);
        cloud.velocity[i] = u * f;
        cloud.pressure[i] = 0.5 * u.norm_sq() * (1.0 - f * f);
        cloud.nu_t[i] = NU_AIR * layer.nu_t_ratio * (cloud.sdf[i] / layer.delta).clamp(0.0, 1.0);
    }
}
