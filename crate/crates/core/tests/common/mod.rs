#![allow(dead_code)]

use airfoil_kit::mesh::{assemble_cgrid, MeshParams, StructuredMesh};
use airfoil_kit::naca::{generate_airfoil, AirfoilGeometry, CaseSpec, Designation, Spacing};
use airfoil_kit::post::SimulationCloud;
use airfoil_kit::synthetic::{impose_power_law, mesh_cloud, PowerLawLayer};
use airfoil_kit::Vec2;

/// Small grid that meshes in milliseconds.
pub fn coarse_params() -> MeshParams {
    MeshParams {
        domain_extent: 20.0,
        wall_first_cell: 1e-4,
        wall_ratio: 1.2,
        le_first_width: 1e-3,
        le_ratio: 1.1,
        aft_cells: 20,
        ..MeshParams::default()
    }
}

pub fn naca4(m: f64, p: f64, xx: f64, u_inf: f64, aoa_deg: f64) -> CaseSpec {
    let airfoil = Designation::Four { m, p, xx };
    CaseSpec::new(CaseSpec::conventional_name(&airfoil, u_inf, aoa_deg), airfoil, u_inf, aoa_deg.to_radians())
}

pub struct SyntheticCase {
    pub spec: CaseSpec,
    pub geometry: AirfoilGeometry,
    pub mesh: StructuredMesh,
    pub cloud: SimulationCloud,
}

/// Mesh a case and fill it with the power-law boundary layer.
pub fn synthetic_case(spec: &CaseSpec, params: &MeshParams, layer: &PowerLawLayer) -> SyntheticCase {
    let geometry = generate_airfoil(&spec.airfoil.params().unwrap(), 512, Spacing::Cosine, true).unwrap();
    let mesh = assemble_cgrid(&geometry, params, spec.aoa).unwrap();
    let mut cloud = mesh_cloud(&mesh, &geometry, spec).unwrap();
    impose_power_law(&mut cloud, layer);
    SyntheticCase { spec: spec.clone(), geometry, mesh, cloud }
}

/// Wall nodes on a circle with rings of volume nodes outside, all fields zero.
pub fn ring_cloud(n: usize, rings: usize, radius: f64, spacing: f64) -> SimulationCloud {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut surface = Vec::new();
    let mut sdf = Vec::new();
    for r in 0..=rings {
        for k in 0..n {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5 * (r % 2) as f64) / n as f64;
            let d = Vec2::from_angle(a);
            positions.push(d * (radius + r as f64 * spacing));
            normals.push(if r == 0 { d } else { Vec2::default() });
            surface.push(r == 0);
            sdf.push(r as f64 * spacing);
        }
    }
    let m = positions.len();
    SimulationCloud {
        positions,
        inlet_velocity: vec![Vec2::new(1.0, 0.0); m],
        sdf,
        normals,
        velocity: vec![Vec2::default(); m],
        pressure: vec![0.0; m],
        nu_t: vec![0.0; m],
        surface,
    }
}
