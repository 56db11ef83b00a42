//! Surface stresses, forces and boundary-layer profiles from nodal flow fields.
//!
//! Pressures are reduced pressures (pressure over density) and stresses are per unit
//! density, so forces come out in m^3/s^2 per metre of span.

use serde::{Deserialize, Serialize};

use crate::constants::{NU_AIR, REFERENCE_AREA};
use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::spatial::KdTree;

pub const DEFAULT_GRADIENT_NEIGHBORS: usize = 12;
pub const PROFILE_NEIGHBORS: usize = 8;
const EXACT_HIT: f64 = 1e-12;
/// Chain steps longer than this multiple of the median of the surrounding steps break
/// the loop. The median is taken locally because graded walls vary in spacing by orders
/// of magnitude between leading and trailing edge.
const GAP_FACTOR: f64 = 10.0;
const GAP_WINDOW: usize = 8;

/// Nodal simulation data over a point cloud.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimulationCloud {
    pub positions: Vec<Vec2>,
    pub inlet_velocity: Vec<Vec2>,
    pub sdf: Vec<f64>,
    /// Outward unit normals on surface nodes, zero elsewhere.
    pub normals: Vec<Vec2>,
    pub velocity: Vec<Vec2>,
    /// Reduced pressure, m^2/s^2.
    pub pressure: Vec<f64>,
    pub nu_t: Vec<f64>,
    pub surface: Vec<bool>,
}

impl SimulationCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn surface_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.surface[i]).collect()
    }

    /// Check column lengths, finiteness and the surface conventions.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let lens = [
            ("inlet_velocity", self.inlet_velocity.len()),
            ("sdf", self.sdf.len()),
            ("normals", self.normals.len()),
            ("velocity", self.velocity.len()),
            ("pressure", self.pressure.len()),
            ("nu_t", self.nu_t.len()),
            ("surface", self.surface.len()),
        ];
        for (name, len) in lens {
            if len != n {
                return Err(Error::Data(format!("column {name} has {len} rows, expected {n}")));
            }
        }
        for i in 0..n {
            let finite = self.positions[i].is_finite()
                && self.inlet_velocity[i].is_finite()
                && self.sdf[i].is_finite()
                && self.normals[i].is_finite()
                && self.velocity[i].is_finite()
                && self.pressure[i].is_finite()
                && self.nu_t[i].is_finite();
            if !finite {
                return Err(Error::Data(format!("row {i}: non-finite value")));
            }
            if self.surface[i] {
                if self.sdf[i] != 0.0 {
                    return Err(Error::Data(format!("row {i}: surface node with sdf {}", self.sdf[i])));
                }
                if (self.normals[i].norm() - 1.0).abs() > 1e-6 {
                    return Err(Error::Data(format!("row {i}: surface normal is not unit length")));
                }
            } else if self.normals[i] != Vec2::default() {
                return Err(Error::Data(format!("row {i}: off-surface node with a non-zero normal")));
            }
        }
        Ok(())
    }

    /// Same cloud with the flow fields replaced, e.g. by a model prediction.
    pub fn with_fields(&self, velocity: Vec<Vec2>, pressure: Vec<f64>, nu_t: Vec<f64>) -> Result<SimulationCloud> {
        let n = self.len();
        if velocity.len() != n || pressure.len() != n || nu_t.len() != n {
            return Err(Error::Data(format!("field columns do not match the {n} cloud nodes")));
        }
        Ok(SimulationCloud { velocity, pressure, nu_t, ..self.clone() })
    }
}

/// Surface samples ordered into a closed counter-clockwise loop.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceDistribution {
    /// Cloud index of each sample.
    pub nodes: Vec<usize>,
    pub positions: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub ds: Vec<f64>,
    pub pressure: Vec<f64>,
    pub shear: Vec<Vec2>,
    /// Samples whose gradient came from the one-sided fallback.
    pub gradient_fallback: Vec<bool>,
}

impl SurfaceDistribution {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.ds.iter().sum()
    }

    /// Arc length from the first sample.
    pub fn arc_length(&self) -> Vec<f64> {
        geom::cumulative_length(&self.positions)
    }

    fn check_closed(&self) -> Result<()> {
        let n = self.len();
        if n < 3 || self.ds.len() != n || self.normals.len() != n || self.pressure.len() != n || self.shear.len() != n {
            return Err(Error::Topology("surface distribution is not a closed chain".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub pressure_force: Vec2,
    pub viscous_force: Vec2,
    pub drag: f64,
    pub lift: f64,
    pub drag_pressure: f64,
    pub drag_viscous: f64,
    pub lift_pressure: f64,
    pub lift_viscous: f64,
    pub cd: f64,
    pub cl: f64,
    pub q_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Side> {
        match s {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            _ => Err(Error::Parameter(format!("unknown side {s:?}"))),
        }
    }
}

/// Order the surface nodes of `cloud` into a closed counter-clockwise loop starting at the
/// leading edge (minimum x, then minimum |y|). Each step goes to the nearest unvisited
/// node whose normal does not face away from the current one, which keeps the chain on
/// its own side of thin trailing edges.
pub fn surface_chain(cloud: &SimulationCloud) -> Result<SurfaceDistribution> {
    let ids = cloud.surface_indices();
    if ids.len() < 3 {
        return Err(Error::Topology(format!("{} surface nodes, need at least 3", ids.len())));
    }
    let pts: Vec<Vec2> = ids.iter().map(|&i| cloud.positions[i]).collect();
    let nrm: Vec<Vec2> = ids.iter().map(|&i| cloud.normals[i]).collect();
    let tree = KdTree::new(&pts);

    let start = (0..pts.len())
        .min_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.abs().total_cmp(&pts[b].y.abs())))
        .unwrap();
    let n = pts.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    while order.len() < n {
        let next = next_in_chain(&tree, &pts, &nrm, &visited, cur);
        visited[next] = true;
        order.push(next);
        cur = next;
    }

    let mut positions: Vec<Vec2> = order.iter().map(|&k| pts[k]).collect();
    if geom::signed_area(&positions) < 0.0 {
        order[1..].reverse();
        positions = order.iter().map(|&k| pts[k]).collect();
    }

    let seg: Vec<f64> = (0..n).map(|k| positions[k].dist(positions[(k + 1) % n])).collect();
    if let Some((k, len, local)) = find_gap(&seg) {
        return Err(Error::Topology(format!(
            "surface chain does not close: step {k} spans {len:e} m, nearby spacing {local:e} m"
        )));
    }
    let ds: Vec<f64> = (0..n).map(|k| 0.5 * (seg[(k + n - 1) % n] + seg[k])).collect();
    let nodes: Vec<usize> = order.iter().map(|&k| ids[k]).collect();
    Ok(SurfaceDistribution {
        normals: nodes.iter().map(|&i| cloud.normals[i]).collect(),
        pressure: nodes.iter().map(|&i| cloud.pressure[i]).collect(),
        shear: vec![Vec2::default(); n],
        gradient_fallback: vec![false; n],
        nodes,
        positions,
        ds,
    })
}

/// First step exceeding `GAP_FACTOR` times the median of the `GAP_WINDOW` steps on each
/// side of it (cyclically), with that median.
fn find_gap(seg: &[f64]) -> Option<(usize, f64, f64)> {
    let n = seg.len();
    let w = GAP_WINDOW.min((n - 1) / 2).max(1);
    let mut around = Vec::with_capacity(2 * w);
    for k in 0..n {
        around.clear();
        for o in 1..=w {
            around.push(seg[(k + o) % n]);
            around.push(seg[(k + n - o) % n]);
        }
        around.sort_by(f64::total_cmp);
        let local = around[around.len() / 2];
        if seg[k] > GAP_FACTOR * local {
            return Some((k, seg[k], local));
        }
    }
    None
}

fn next_in_chain(tree: &KdTree, pts: &[Vec2], nrm: &[Vec2], visited: &[bool], cur: usize) -> usize {
    let n = pts.len();
    let mut k = 8.min(n);
    loop {
        let hits = tree.nearest(pts[cur], k);
        let mut fallback = None;
        for h in &hits {
            if visited[h.index] {
                continue;
            }
            if nrm[h.index].dot(nrm[cur]) > 0.0 {
                return h.index;
            }
            fallback.get_or_insert(h.index);
        }
        if k >= n {
            // Only nodes facing the other way remain.
            return fallback.expect("an unvisited node remains");
        }
        k = (2 * k).min(n);
    }
}

/// Velocity gradient `G[a][b] = du_a/dx_b` with a flag for the one-sided fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientEstimate {
    pub grad: [[f64; 2]; 2],
    pub fallback: bool,
}

/// Gradient at cloud node `node` from an inverse-distance weighted linear least-squares
/// fit of the velocity differences to its `k` nearest neighbours, plus `wall_neighbors`
/// (the adjacent wall nodes, which pin the tangential derivative where wall-normal grid
/// lines make every nearby node collinear). The fit passes through the node's own value,
/// which is zero on a no-slip wall.
pub fn velocity_gradient_at(
    cloud: &SimulationCloud,
    tree: &KdTree,
    node: usize,
    k: usize,
    wall_neighbors: &[usize],
) -> Result<GradientEstimate> {
    if k < 4 {
        return Err(Error::Parameter(format!("k_neighbors must be at least 4, got {k}")));
    }
    let x0 = cloud.positions[node];
    let u0 = cloud.velocity[node];
    let mut hits = tree.nearest(x0, k + 1);
    hits.retain(|h| h.index != node && h.dist_sq > 0.0);
    hits.truncate(k);
    for &w in wall_neighbors {
        if w != node && !hits.iter().any(|h| h.index == w) {
            hits.push(crate::spatial::Neighbor { index: w, dist_sq: cloud.positions[w].dist(x0).powi(2) });
        }
    }
    let mut a = [[0.0f64; 2]; 2];
    let mut b = [[0.0f64; 2]; 2];
    for h in hits.iter().filter(|h| h.dist_sq > 0.0) {
        let d = cloud.positions[h.index] - x0;
        let du = cloud.velocity[h.index] - u0;
        let w = 1.0 / h.dist_sq.sqrt();
        let dx = [d.x, d.y];
        let dv = [du.x, du.y];
        for r in 0..2 {
            for c in 0..2 {
                a[r][c] += w * dx[r] * dx[c];
            }
            for comp in 0..2 {
                b[comp][r] += w * dx[r] * dv[comp];
            }
        }
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0] + a[1][1];
    if scale > 0.0 && det > 1e-12 * scale * scale {
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let mut g = [[0.0; 2]; 2];
        for comp in 0..2 {
            for col in 0..2 {
                g[comp][col] = inv[col][0] * b[comp][0] + inv[col][1] * b[comp][1];
            }
        }
        return Ok(GradientEstimate { grad: g, fallback: false });
    }
    one_sided_gradient(cloud, node, &hits)
}

fn one_sided_gradient(cloud: &SimulationCloud, node: usize, hits: &[crate::spatial::Neighbor]) -> Result<GradientEstimate> {
    let x0 = cloud.positions[node];
    let n = cloud.normals[node];
    let n = if n.norm_sq() > 0.0 { n } else { Vec2::new(0.0, 1.0) };
    // Neighbour best aligned with the normal.
    let best = hits
        .iter()
        .filter(|h| h.index != node)
        .map(|h| {
            let d = cloud.positions[h.index] - x0;
            (h.index, d.dot(n), d.dot(n) / d.norm())
        })
        .filter(|(_, dn, _)| *dn > 0.0)
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or_else(|| Error::Numeric(format!("node {node}: no neighbour off the wall for a gradient")))?;
    let du = cloud.velocity[best.0] - cloud.velocity[node];
    let g = [[du.x * n.x / best.1, du.x * n.y / best.1], [du.y * n.x / best.1, du.y * n.y / best.1]];
    Ok(GradientEstimate { grad: g, fallback: true })
}

/// Gradients at every surface node, in `cloud.surface_indices()` order. Wall neighbours
/// come from the surface chain when one can be formed.
pub fn velocity_gradient_at_surface(cloud: &SimulationCloud, k: usize) -> Result<Vec<GradientEstimate>> {
    let tree = KdTree::new(&cloud.positions);
    let mut wall: std::collections::HashMap<usize, [usize; 2]> = std::collections::HashMap::new();
    if let Ok(chain) = surface_chain(cloud) {
        let m = chain.len();
        for s in 0..m {
            wall.insert(chain.nodes[s], [chain.nodes[(s + m - 1) % m], chain.nodes[(s + 1) % m]]);
        }
    }
    cloud
        .surface_indices()
        .into_iter()
        .map(|i| {
            let extra = wall.get(&i).map(|w| w.to_vec()).unwrap_or_default();
            velocity_gradient_at(cloud, &tree, i, k, &extra)
        })
        .collect()
}

/// Viscous traction `2 nu S n` exerted by the fluid on the wall, with `S` the symmetric
/// part of the gradient. Turbulent viscosity vanishes at the wall and is not included.
pub fn wall_shear_stress(grad: &[[f64; 2]; 2], normal: Vec2, nu: f64) -> Vec2 {
    let s01 = 0.5 * (grad[0][1] + grad[1][0]);
    let sn = Vec2::new(grad[0][0] * normal.x + s01 * normal.y, s01 * normal.x + grad[1][1] * normal.y);
    sn * (2.0 * nu)
}

/// Chain the surface and fill in wall shear stresses.
pub fn surface_distribution(cloud: &SimulationCloud, tree: &KdTree, k: usize, nu: f64) -> Result<SurfaceDistribution> {
    let mut dist = surface_chain(cloud)?;
    let m = dist.len();
    for s in 0..m {
        let wall = [dist.nodes[(s + m - 1) % m], dist.nodes[(s + 1) % m]];
        let g = velocity_gradient_at(cloud, tree, dist.nodes[s], k, &wall)?;
        dist.shear[s] = wall_shear_stress(&g.grad, dist.normals[s], nu);
        dist.gradient_fallback[s] = g.fallback;
    }
    Ok(dist)
}

/// Drag and lift from a closed surface distribution.
///
/// Pressure is integrated with the chord of the two neighbouring samples as the area
/// vector of each node (`rot(P[i+1] - P[i-1]) / 2`), which sums to zero exactly around
/// any closed chain; viscous stresses use the nodal `dS`.
pub fn integrate_forces(dist: &SurfaceDistribution, inflow_dir: Vec2, u_inf: f64) -> Result<ForceBreakdown> {
    dist.check_closed()?;
    if ((inflow_dir.norm() - 1.0).abs()) > 1e-9 {
        return Err(Error::Parameter("inflow direction must be a unit vector".into()));
    }
    if !(u_inf > 0.0) {
        return Err(Error::Parameter(format!("freestream speed must be positive, got {u_inf}")));
    }
    let n = dist.len();
    let p = &dist.positions;
    let mut fp = Vec2::default();
    let mut fv = Vec2::default();
    for i in 0..n {
        let area = (p[(i + 1) % n] - p[(i + n - 1) % n]).perp_cw() * 0.5;
        fp = fp - area * dist.pressure[i];
        fv = fv + dist.shear[i] * dist.ds[i];
    }
    let perp = inflow_dir.perp();
    let q_inf = 0.5 * u_inf * u_inf * REFERENCE_AREA;
    let (dp, dv) = (fp.dot(inflow_dir), fv.dot(inflow_dir));
    let (lp, lv) = (fp.dot(perp), fv.dot(perp));
    let drag = dp + dv;
    let lift = lp + lv;
    Ok(ForceBreakdown {
        pressure_force: fp,
        viscous_force: fv,
        drag,
        lift,
        drag_pressure: dp,
        drag_viscous: dv,
        lift_pressure: lp,
        lift_viscous: lv,
        cd: drag / q_inf,
        cl: lift / q_inf,
        q_inf,
    })
}

pub fn dynamic_pressure(u_inf: f64) -> f64 {
    0.5 * u_inf * u_inf * REFERENCE_AREA
}

/// `(p - p_inf) / q_inf` per surface sample.
pub fn pressure_coefficient(dist: &SurfaceDistribution, p_inf: f64, q_inf: f64) -> Result<Vec<f64>> {
    if !(q_inf > 0.0) {
        return Err(Error::Parameter(format!("q_inf must be positive, got {q_inf}")));
    }
    Ok(dist.pressure.iter().map(|p| (p - p_inf) / q_inf).collect())
}

/// Skin friction along explicit unit tangents, and its magnitude.
pub fn skin_friction_along(dist: &SurfaceDistribution, q_inf: f64, tangents: &[Vec2]) -> Result<Vec<(f64, f64)>> {
    if !(q_inf > 0.0) {
        return Err(Error::Parameter(format!("q_inf must be positive, got {q_inf}")));
    }
    if tangents.len() != dist.len() {
        return Err(Error::Parameter("one tangent per surface sample is required".into()));
    }
    Ok(dist
        .shear
        .iter()
        .zip(tangents)
        .map(|(t, dir)| (t.dot(*dir) / q_inf, t.norm() / q_inf))
        .collect())
}

/// Skin friction with the tangent at each sample oriented downstream (non-negative
/// component along `inflow_dir`).
pub fn skin_friction_coefficient(dist: &SurfaceDistribution, q_inf: f64, inflow_dir: Vec2) -> Result<Vec<(f64, f64)>> {
    let tangents: Vec<Vec2> = dist
        .normals
        .iter()
        .map(|n| {
            let t = n.perp();
            if t.dot(inflow_dir) < 0.0 {
                -t
            } else {
                t
            }
        })
        .collect();
    skin_friction_along(dist, q_inf, &tangents)
}

/// Per-sample surface coefficients for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoefficient {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub cp: f64,
    pub c_tau: f64,
    pub c_tau_magnitude: f64,
}

pub fn surface_coefficients(dist: &SurfaceDistribution, u_inf: f64, inflow_dir: Vec2) -> Result<Vec<SurfaceCoefficient>> {
    let q = dynamic_pressure(u_inf);
    let cp = pressure_coefficient(dist, 0.0, q)?;
    let cf = skin_friction_coefficient(dist, q, inflow_dir)?;
    let s = dist.arc_length();
    Ok((0..dist.len())
        .map(|i| SurfaceCoefficient {
            s: s[i],
            x: dist.positions[i].x,
            y: dist.positions[i].y,
            cp: cp[i],
            c_tau: cf[i].0,
            c_tau_magnitude: cf[i].1,
        })
        .collect())
}

/// Forces and surface coefficients of one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseAnalysis {
    pub surface: SurfaceDistribution,
    pub forces: ForceBreakdown,
    pub coefficients: Vec<SurfaceCoefficient>,
}

/// Full surface post-processing with the freestream taken from the inlet velocity column.
pub fn analyze_case(cloud: &SimulationCloud, tree: &KdTree, k: usize) -> Result<CaseAnalysis> {
    let u = freestream(cloud)?;
    let surface = surface_distribution(cloud, tree, k, NU_AIR)?;
    let dir = u.normalized();
    let forces = integrate_forces(&surface, dir, u.norm())?;
    let coefficients = surface_coefficients(&surface, u.norm(), dir)?;
    Ok(CaseAnalysis { surface, forces, coefficients })
}

/// Inlet velocity vector of a case (uniform over the cloud).
pub fn freestream(cloud: &SimulationCloud) -> Result<Vec2> {
    let u = *cloud.inlet_velocity.first().ok_or_else(|| Error::Data("empty cloud".into()))?;
    if !(u.norm() > 0.0) {
        return Err(Error::Data("inlet velocity is zero".into()));
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub d: f64,
    pub u: f64,
    pub v: f64,
    pub nu_t_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLayerProfile {
    pub x0: f64,
    pub side: Side,
    pub origin: Vec2,
    pub normal: Vec2,
    pub samples: Vec<ProfileSample>,
}

/// Inverse-distance weighted value of `f` at `q` over the `k` nearest nodes.
pub fn idw<const N: usize>(tree: &KdTree, q: Vec2, k: usize, f: impl Fn(usize) -> [f64; N]) -> [f64; N] {
    let hits = tree.nearest(q, k);
    if let Some(h) = hits.first() {
        if h.dist_sq.sqrt() <= EXACT_HIT {
            return f(h.index);
        }
    }
    let mut acc = [0.0; N];
    let mut wsum = 0.0;
    for h in &hits {
        let w = 1.0 / h.dist_sq;
        let v = f(h.index);
        for c in 0..N {
            acc[c] += w * v[c];
        }
        wsum += w;
    }
    acc.map(|a| a / wsum)
}

/// Fields sampled along the outward normal at chord abscissa `x0` on one side.
pub fn boundary_layer_profile(
    cloud: &SimulationCloud,
    tree: &KdTree,
    dist: &SurfaceDistribution,
    x0: f64,
    side: Side,
    max_dist: f64,
    n_samples: usize,
) -> Result<BoundaryLayerProfile> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::Domain(format!("profile abscissa {x0} outside (0, 1)")));
    }
    if !(max_dist > 0.0) || n_samples < 2 {
        return Err(Error::Parameter("profile needs max_dist > 0 and at least 2 samples".into()));
    }
    let u_inf = freestream(cloud)?.norm();
    let n = dist.len();
    let sign = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let mut best: Option<(usize, f64, f64)> = None;
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (dist.positions[i], dist.positions[j]);
        if (a.x - x0) * (b.x - x0) > 0.0 || a.x == b.x {
            continue;
        }
        let t = (x0 - a.x) / (b.x - a.x);
        let nrm = dist.normals[i].lerp(dist.normals[j], t);
        if sign * nrm.y <= 0.0 {
            continue;
        }
        let y = a.y + t * (b.y - a.y);
        if best.map_or(true, |(_, _, by)| sign * y > sign * by) {
            best = Some((i, t, y));
        }
    }
    let (i, t, _) = best.ok_or_else(|| Error::Domain(format!("abscissa {x0} not found on the {side:?} surface")))?;
    let j = (i + 1) % n;
    let origin = dist.positions[i].lerp(dist.positions[j], t);
    let normal = dist.normals[i].lerp(dist.normals[j], t).normalized();
    let (ci, cj) = (dist.nodes[i], dist.nodes[j]);
    let field = |c: usize| [cloud.velocity[c].x, cloud.velocity[c].y, cloud.nu_t[c]];

    let samples = (0..n_samples)
        .map(|k| {
            let d = max_dist * k as f64 / (n_samples - 1) as f64;
            let v = if k == 0 {
                let (a, b) = (field(ci), field(cj));
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
            } else {
                idw(tree, origin + normal * d, PROFILE_NEIGHBORS, field)
            };
            ProfileSample { d, u: v[0] / u_inf, v: v[1] / u_inf, nu_t_ratio: v[2] / NU_AIR }
        })
        .collect();
    Ok(BoundaryLayerProfile { x0, side, origin, normal, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring(n: usize, r: f64) -> Vec<Vec2> {
        (0..n).map(|k| Vec2::from_angle(2.0 * PI * k as f64 / n as f64) * r).collect()
    }

    fn cloud_from(points: &[Vec2], surface: &[bool], normals: &[Vec2]) -> SimulationCloud {
        let n = points.len();
        SimulationCloud {
            positions: points.to_vec(),
            inlet_velocity: vec![Vec2::new(1.0, 0.0); n],
            sdf: vec![0.0; n],
            normals: normals.to_vec(),
            velocity: vec![Vec2::default(); n],
            pressure: vec![0.0; n],
            nu_t: vec![0.0; n],
            surface: surface.to_vec(),
        }
    }

    fn circle_cloud(n: usize) -> SimulationCloud {
        let pts = ring(n, 1.0);
        cloud_from(&pts, &vec![true; n], &pts)
    }

    #[test]
    fn shuffled_polygon_chain() {
        let n = 64;
        let mut order: Vec<usize> = (0..n).collect();
        // Deterministic shuffle.
        for i in 0..n {
            order.swap(i, (i * 37 + 11) % n);
        }
        let base = ring(n, 1.0);
        let pts: Vec<Vec2> = order.iter().map(|&k| base[k]).collect();
        let c = cloud_from(&pts, &vec![true; n], &pts);
        let d = surface_chain(&c).unwrap();
        let side = 2.0 * (PI / n as f64).sin();
        assert!((d.perimeter() - n as f64 * side).abs() < 1e-12);
        assert!(geom::signed_area(&d.positions) > 0.0);
        let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        assert_eq!(d.positions[0].x, min_x);
    }

    #[test]
    fn circle_perimeter_converges() {
        let e1 = (surface_chain(&circle_cloud(100)).unwrap().perimeter() - 2.0 * PI).abs();
        let e2 = (surface_chain(&circle_cloud(200)).unwrap().perimeter() - 2.0 * PI).abs();
        assert!(e1 < 1e-2 && (e1 / e2 - 4.0).abs() < 0.05, "{e1} {e2}");
    }

    #[test]
    fn gap_is_reported() {
        let mut pts = ring(64, 1.0);
        pts.truncate(40);
        let c = cloud_from(&pts, &vec![true; 40], &pts);
        assert!(matches!(surface_chain(&c), Err(Error::Topology(_))));
    }

    #[test]
    fn constant_pressure_has_no_force() {
        let mut c = circle_cloud(37);
        c.pressure = vec![3.5; 37];
        let d = surface_chain(&c).unwrap();
        let f = integrate_forces(&d, Vec2::new(1.0, 0.0), 10.0).unwrap();
        assert!(f.pressure_force.norm() < 1e-10 * 3.5 * d.perimeter());
    }

    #[test]
    fn linear_pressure_force_is_area() {
        let n = 10_000;
        let mut c = circle_cloud(n);
        c.pressure = c.positions.iter().map(|p| -p.y).collect();
        let d = surface_chain(&c).unwrap();
        let f = integrate_forces(&d, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!(f.pressure_force.x.abs() < 1e-3 && (f.pressure_force.y - PI).abs() < 1e-3);
    }

    #[test]
    fn shear_by_hand() {
        let t = wall_shear_stress(&[[0.0, 3.0], [0.0, 0.0]], Vec2::new(0.0, 1.0), 0.5);
        assert_eq!(t, Vec2::new(1.5, 0.0));
        assert_eq!(wall_shear_stress(&[[0.0; 2]; 2], Vec2::new(1.0, 0.0), 1.0), Vec2::default());
    }

    fn grid_cloud(f: impl Fn(Vec2) -> Vec2) -> SimulationCloud {
        let mut pts = Vec::new();
        for j in 0..8 {
            for i in 0..8 {
                pts.push(Vec2::new(i as f64 * 0.1 - 0.35, j as f64 * 0.013));
            }
        }
        let n = pts.len();
        let surface: Vec<bool> = pts.iter().map(|p| p.y == 0.0).collect();
        let normals: Vec<Vec2> = surface.iter().map(|&s| if s { Vec2::new(0.0, 1.0) } else { Vec2::default() }).collect();
        let mut c = cloud_from(&pts, &surface, &normals);
        c.velocity = pts.iter().map(|p| f(*p)).collect();
        assert_eq!(c.len(), n);
        c
    }

    #[test]
    fn affine_gradient_exact() {
        let c = grid_cloud(|p| Vec2::new(0.3 + 1.5 * p.x - 2.0 * p.y, -0.7 + 0.25 * p.x + 4.0 * p.y));
        for g in velocity_gradient_at_surface(&c, 12).unwrap() {
            let want = [[1.5, -2.0], [0.25, 4.0]];
            for a in 0..2 {
                for b in 0..2 {
                    assert!((g.grad[a][b] - want[a][b]).abs() < 1e-9);
                }
            }
            assert!(!g.fallback);
        }
        let z = grid_cloud(|_| Vec2::new(2.0, -1.0));
        for g in velocity_gradient_at_surface(&z, 12).unwrap() {
            assert!(g.grad.iter().flatten().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn collinear_neighbourhood_falls_back() {
        let pts: Vec<Vec2> = (0..6).map(|j| Vec2::new(0.0, j as f64 * 0.01)).collect();
        let mut surface = vec![false; 6];
        surface[0] = true;
        let mut normals = vec![Vec2::default(); 6];
        normals[0] = Vec2::new(0.0, 1.0);
        let mut c = cloud_from(&pts, &surface, &normals);
        c.velocity = pts.iter().map(|p| Vec2::new(5.0 * p.y, 0.0)).collect();
        let g = velocity_gradient_at_surface(&c, 4).unwrap()[0];
        assert!(g.fallback);
        assert!((g.grad[0][1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_scaling() {
        let mut c = circle_cloud(32);
        c.pressure = c.positions.iter().map(|p| 1.0 + p.x).collect();
        let mut d = surface_chain(&c).unwrap();
        d.shear = d.normals.iter().map(|n| n.perp() * 0.01).collect();
        let dir = Vec2::new(1.0, 0.0);
        let a = surface_coefficients(&d, 3.0, dir).unwrap();
        let mut d2 = d.clone();
        let s = 2.5f64;
        d2.pressure.iter_mut().for_each(|p| *p *= s * s);
        d2.shear.iter_mut().for_each(|t| *t = *t * (s * s));
        let b = surface_coefficients(&d2, 3.0 * s, dir).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.cp - y.cp).abs() < 1e-12 && (x.c_tau - y.c_tau).abs() < 1e-12);
        }
        let stag = pressure_coefficient(&SurfaceDistribution { pressure: vec![12.5], ..Default::default() }, 0.0, dynamic_pressure(5.0)).unwrap();
        assert_eq!(stag, vec![1.0]);
    }

    #[test]
    fn friction_sign_follows_tangent() {
        let d = SurfaceDistribution { nodes: vec![0], shear: vec![Vec2::new(0.2, 0.0)], ..Default::default() };
        let fwd = skin_friction_along(&d, 2.0, &[Vec2::new(1.0, 0.0)]).unwrap();
        let back = skin_friction_along(&d, 2.0, &[Vec2::new(-1.0, 0.0)]).unwrap();
        assert_eq!(fwd[0], (0.1, 0.1));
        assert_eq!(back[0], (-0.1, 0.1));
    }

    #[test]
    fn rotation_invariance() {
        let n = 200;
        let mut c = circle_cloud(n);
        c.pressure = c.positions.iter().map(|p| 0.3 - p.y + 0.2 * p.x * p.x).collect();
        let mut d = surface_chain(&c).unwrap();
        d.shear = d.normals.iter().map(|n| n.perp() * (0.01 + 0.001 * n.x)).collect();
        let dir = Vec2::from_angle(0.1);
        let f = integrate_forces(&d, dir, 2.0).unwrap();
        let ang = 0.73;
        let mut r = d.clone();
        r.positions.iter_mut().for_each(|p| *p = p.rotated(ang));
        r.normals.iter_mut().for_each(|p| *p = p.rotated(ang));
        r.shear.iter_mut().for_each(|p| *p = p.rotated(ang));
        let g = integrate_forces(&r, dir.rotated(ang), 2.0).unwrap();
        assert!((f.cd - g.cd).abs() < 1e-12 && (f.cl - g.cl).abs() < 1e-12);
    }
}
