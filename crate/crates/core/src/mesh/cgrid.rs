//! Six-block C-grid around a closed-trailing-edge airfoil.
//!
//! Node and block numbering follow the usual template:
//!
//! ```text
//!   4 ------------ 3 ------------------------ 2
//!   |  block 3  |  block 2  |     block 1      |
//!  5 -- 8 ===== 11 ======= 10 --------------- 1     (wake line follows the inflow)
//!   |  block 4  |  block 5  |     block 0      |
//!   6 ------------ 7 ------------------------ 0
//! ```
//!
//! Node 8 is the leading edge, 10 the trailing edge, 11 and 9 the upper and lower surface
//! points at the split abscissa. Nodes 4, 5, 6 lie on a half circle of radius
//! `domain_extent` centred on the leading edge, 3 and 7 sit above and below the trailing
//! edge on the straight part of the C and 0, 1, 2 form the outlet at `x = domain_extent`.
//! Node 1 moves with the angle of attack.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grading::{geometric_cell_count, Direction, GradedEdge};
use super::tfi::{quad_area, transfinite_fill, NodeGrid};
use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::naca::AirfoilGeometry;

pub const PATCH_AIRFOIL: &str = "airfoil";
pub const PATCH_FREESTREAM: &str = "freestream";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshParams {
    /// Radius of the C and distance from the leading edge to the outlet, m.
    pub domain_extent: f64,
    /// Height of the wall-adjacent cells, m.
    pub wall_first_cell: f64,
    pub wall_ratio: f64,
    /// Tangential width of the first cell at the leading edge, m.
    pub le_first_width: f64,
    pub le_ratio: f64,
    /// Cell height next to the wake line at the outlet, m.
    pub wake_first_cell: f64,
    /// Streamwise expansion ratio inside the wake blocks.
    pub wake_ratio: f64,
    /// Tangential cells between the split point and the trailing edge, per side.
    pub aft_cells: usize,
    /// Abscissa of nodes 9 and 11; defaults to the camber maximum (0.3 when uncambered).
    pub split_abscissa: Option<f64>,
    /// Distance over which wall-normal grid lines turn from the surface normal towards
    /// their far-field node, m.
    pub wall_blend_length: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        MeshParams {
            domain_extent: 200.0,
            wall_first_cell: 2e-6,
            wall_ratio: 1.075,
            le_first_width: 1e-5,
            le_ratio: 1.025,
            wake_first_cell: 1e-4,
            wake_ratio: 1.075,
            aft_cells: 200,
            split_abscissa: None,
            wall_blend_length: 0.02,
        }
    }
}

impl MeshParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("domain_extent", self.domain_extent),
            ("wall_first_cell", self.wall_first_cell),
            ("le_first_width", self.le_first_width),
            ("wake_first_cell", self.wake_first_cell),
            ("wall_blend_length", self.wall_blend_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("wall_ratio", self.wall_ratio),
            ("le_ratio", self.le_ratio),
            ("wake_ratio", self.wake_ratio),
        ] {
            if !(v >= 1.0) {
                return Err(Error::Parameter(format!("{name} must be >= 1, got {v}")));
            }
        }
        if self.aft_cells < 1 {
            return Err(Error::Parameter("aft_cells must be at least 1".into()));
        }
        if let Some(x) = self.split_abscissa {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Parameter(format!("split abscissa {x} outside (0, 1)")));
            }
        }
        if self.domain_extent <= 2.0 {
            return Err(Error::Parameter("domain_extent must exceed the chord".into()));
        }
        Ok(())
    }
}

/// One block of the assembled mesh, with its nodes as global ids in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshBlock {
    pub id: usize,
    pub ni: usize,
    pub nj: usize,
    pub node_ids: Vec<usize>,
    /// The `(i, j)` frame is left-handed; quads are emitted with reversed winding.
    pub mirrored: bool,
}

impl MeshBlock {
    pub fn node(&self, i: usize, j: usize) -> usize {
        self.node_ids[j * self.ni + i]
    }

    pub fn n_cells(&self) -> usize {
        (self.ni - 1) * (self.nj - 1)
    }
}

/// Cell counts and gradings of the template edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CGridLayout {
    /// The twelve template vertices.
    pub vertices: Vec<Vec2>,
    pub n_normal: usize,
    pub n_front_upper: usize,
    pub n_front_lower: usize,
    pub n_aft: usize,
    pub n_wake: usize,
    /// Graded template edges keyed by their vertex pair, e.g. "8-11".
    pub edges: BTreeMap<String, (GradedEdge, Direction)>,
    pub split_abscissa: f64,
    pub trailing_edge_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    pub nodes: Vec<Vec2>,
    /// Counter-clockwise node ids per cell.
    pub quads: Vec<[usize; 4]>,
    pub block_map: Vec<u8>,
    /// Boundary edges per patch name.
    pub patches: BTreeMap<String, Vec<[usize; 2]>>,
    /// Airfoil wall node ids, counter-clockwise from the trailing edge.
    pub airfoil_loop: Vec<usize>,
    pub blocks: Vec<MeshBlock>,
    pub layout: CGridLayout,
}

impl StructuredMesh {
    pub fn n_cells(&self) -> usize {
        self.quads.len()
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let q = self.quads[cell];
        quad_area([self.nodes[q[0]], self.nodes[q[1]], self.nodes[q[2]], self.nodes[q[3]]])
    }

    /// Distance between each wall node and its first off-wall neighbour along the
    /// wall-normal grid line, over the four airfoil blocks.
    pub fn wall_first_cell_heights(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in self.blocks.iter().filter(|b| (2..=5).contains(&b.id)) {
            for i in 0..b.ni {
                out.push(self.nodes[b.node(i, 0)].dist(self.nodes[b.node(i, 1)]));
            }
        }
        out
    }

    /// Number of wall nodes per side, trailing and leading edge included.
    pub fn airfoil_side_node_counts(&self) -> (usize, usize) {
        let l = &self.layout;
        (l.n_front_upper + l.n_aft + 1, l.n_front_lower + l.n_aft + 1)
    }
}

/// Template edge curve: a polyline or an arc of circle.
#[derive(Debug, Clone)]
enum Curve {
    Polyline(Vec<Vec2>),
    Arc { center: Vec2, radius: f64, from: f64, to: f64 },
}

impl Curve {
    fn segment(a: Vec2, b: Vec2) -> Curve {
        Curve::Polyline(vec![a, b])
    }

    fn length(&self) -> f64 {
        match self {
            Curve::Polyline(p) => geom::polyline_length(p),
            Curve::Arc { radius, from, to, .. } => radius * (to - from).abs(),
        }
    }

    fn nodes(&self, grading: &GradedEdge, dir: Direction) -> Result<Vec<Vec2>> {
        match self {
            Curve::Polyline(p) => super::grading::distribute_edge(p, grading, dir),
            Curve::Arc { center, radius, from, to } => Ok(grading
                .fractions(dir)
                .iter()
                .map(|t| *center + Vec2::from_angle(from + (to - from) * t) * *radius)
                .collect()),
        }
    }

    /// Grading with `n` cells that starts with `cell` at the start (or end) of the curve.
    fn graded(&self, cell: f64, n: usize, at_start: bool) -> Result<(GradedEdge, Direction)> {
        let (g, d) = GradedEdge::closing(self.length(), cell, n)?;
        Ok(if at_start { (g, d) } else { (g, flip(d)) })
    }
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    }
}

/// Split a leading-to-trailing-edge surface at abscissa `x`.
fn split_surface(surface: &[Vec2], x: f64) -> Result<(Vec<Vec2>, Vec<Vec2>)> {
    // Abscissa is monotone on the aft part; search from the trailing edge.
    let k = (0..surface.len() - 1)
        .rev()
        .find(|&k| surface[k].x <= x && surface[k + 1].x > x)
        .ok_or_else(|| Error::Parameter(format!("split abscissa {x} not on the surface")))?;
    let (a, b) = (surface[k], surface[k + 1]);
    let t = (x - a.x) / (b.x - a.x);
    if t == 0.0 {
        return Ok((surface[..=k].to_vec(), surface[k..].to_vec()));
    }
    let p = Vec2::new(x, a.y + t * (b.y - a.y));
    let mut front = surface[..=k].to_vec();
    front.push(p);
    let mut aft = vec![p];
    aft.extend_from_slice(&surface[k + 1..]);
    Ok((front, aft))
}

fn outward_normal(prev: Vec2, next: Vec2) -> Vec2 {
    (next - prev).perp_cw().normalized()
}

/// A wall-normal grid line from wall node `base` to far-field node `tip`, leaving the
/// wall along `normal` and relaxing to the straight chord over `blend` metres. Node `k`
/// sits at exactly the graded distance from the wall node.
fn wall_column(base: Vec2, tip: Vec2, normal: Vec2, p: &MeshParams, n_cells: usize) -> Result<Vec<Vec2>> {
    let span = tip - base;
    let length = span.norm();
    let chord_dir = span / length;
    let (g, d) = GradedEdge::closing(length, p.wall_first_cell, n_cells)?;
    let fr = g.fractions(d);
    let mut out = Vec::with_capacity(fr.len());
    for &t in &fr {
        let s = t * length;
        let w = -(-(s / p.wall_blend_length).powi(2)).exp_m1();
        let dir = normal * (1.0 - w) + chord_dir * w;
        out.push(base + dir.normalized() * s);
    }
    out[0] = base;
    *out.last_mut().unwrap() = tip;
    Ok(out)
}

fn camber_peak_abscissa(g: &AirfoilGeometry) -> f64 {
    let best = g
        .camber
        .iter()
        .copied()
        .fold(Vec2::new(0.3, 0.0), |acc, p| if p.y > acc.y { p } else { acc });
    if best.y > 0.0 {
        best.x
    } else {
        0.3
    }
}

/// Node fractions along a leading-edge arc. Far from node 4 (or 6) the arc nodes follow
/// the angular spread of the wall normals so that grid lines leave the nose without
/// turning hard; towards the junction they blend into the graded distribution, whose last
/// cell is kept exactly. `side` is +1 above the chord line and -1 below.
fn arc_fractions(graded: &[f64], normals: &[Vec2], side: f64) -> Vec<f64> {
    let n = graded.len() - 1;
    let beta: Vec<f64> = normals.iter().map(|v| (side * v.y).atan2(-v.x)).collect();
    let span = beta[n] - beta[0];
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = 0.0f64;
    for i in 0..=n {
        let follow = if span > 0.0 { ((beta[i] - beta[0]) / span).clamp(0.0, 1.0) } else { graded[i] };
        let w = if i + 1 >= n { 1.0 } else { (i as f64 / (n - 1) as f64).powi(ARC_BLEND_POWER) };
        let f = ((1.0 - w) * follow + w * graded[i]).max(prev);
        out.push(f);
        prev = f;
    }
    out[0] = 0.0;
    out[n] = 1.0;
    out
}

const ARC_BLEND_POWER: i32 = 3;

struct BlockSpec {
    id: usize,
    grid: NodeGrid,
    mirrored: bool,
}

/// Build the graded six-block C-grid. The geometry stays fixed; `aoa` only moves the
/// outlet end of the wake line.
pub fn assemble_cgrid(geometry: &AirfoilGeometry, params: &MeshParams, aoa: f64) -> Result<StructuredMesh> {
    params.validate()?;
    if !geometry.closed_te {
        return Err(Error::Parameter("the C-grid template needs a closed trailing edge".into()));
    }
    if !(aoa.abs() < 0.5 * PI - 1e-3) {
        return Err(Error::Parameter(format!("angle of attack {aoa} rad out of range")));
    }
    let xs = params.split_abscissa.unwrap_or_else(|| camber_peak_abscissa(geometry).clamp(0.05, 0.95));
    let le = geometry.upper[0];
    let te = *geometry.upper.last().unwrap();
    let r = params.domain_extent;

    let (front_u, aft_u) = split_surface(&geometry.upper, xs)?;
    let (front_l, aft_l) = split_surface(&geometry.lower, xs)?;

    let mut edges: BTreeMap<String, (GradedEdge, Direction)> = BTreeMap::new();

    // Tangential airfoil edges.
    let le_edge = |curve: &[Vec2]| -> Result<(GradedEdge, Direction)> {
        let len = geom::polyline_length(curve);
        let (n, _) = geometric_cell_count(len, params.le_first_width, params.le_ratio)?;
        GradedEdge::closing(len, params.le_first_width, n)
    };
    let e_8_11 = le_edge(&front_u)?;
    let e_8_9 = le_edge(&front_l)?;
    let w11 = e_8_11.0.end_cell(e_8_11.1, false);
    let aft_u_curve = Curve::Polyline(aft_u.clone());
    let e_11_10 = aft_u_curve.graded(w11, params.aft_cells, true)?;
    let te_width = e_11_10.0.end_cell(e_11_10.1, false);
    let aft_l_curve = Curve::Polyline(aft_l.clone());
    let e_9_10 = aft_l_curve.graded(te_width, params.aft_cells, false)?;

    let n_front_upper = e_8_11.0.n_cells;
    let n_front_lower = e_8_9.0.n_cells;
    let n_aft = params.aft_cells;

    // Template vertices.
    let y1 = (r - te.x) * aoa.tan();
    let v: Vec<Vec2> = vec![
        Vec2::new(r, -r),
        Vec2::new(r, y1),
        Vec2::new(r, r),
        Vec2::new(te.x, r),
        Vec2::new(le.x, r),
        Vec2::new(le.x - r, le.y),
        Vec2::new(le.x, -r),
        Vec2::new(te.x, -r),
        le,
        *aft_l.first().unwrap(),
        te,
        *aft_u.first().unwrap(),
    ];

    // Outer tangential edges.
    let c_4_3 = Curve::segment(v[4], v[3]);
    let c_6_7 = Curve::segment(v[6], v[7]);
    let e_4_3 = (GradedEdge::uniform(c_4_3.length(), n_aft), Direction::Forward);
    let e_6_7 = (GradedEdge::uniform(c_6_7.length(), n_aft), Direction::Forward);
    let w4 = e_4_3.0.first_cell;
    let w6 = e_6_7.0.first_cell;
    let c_5_4 = Curve::Arc { center: le, radius: r, from: PI, to: 0.5 * PI };
    let c_5_6 = Curve::Arc { center: le, radius: r, from: PI, to: 1.5 * PI };
    let e_5_4 = c_5_4.graded(w4, n_front_upper, false)?;
    let e_5_6 = c_5_6.graded(w6, n_front_lower, false)?;

    // Wall-normal count, shared by every column of the grid.
    let (n_normal, _) = geometric_cell_count(v[3].dist(te), params.wall_first_cell, params.wall_ratio)?;

    // Wake edges.
    let c_10_1 = Curve::segment(te, v[1]);
    let (n_wake, _) = geometric_cell_count(c_10_1.length(), te_width, params.wake_ratio)?;
    let e_10_1 = c_10_1.graded(te_width, n_wake, true)?;
    let c_3_2 = Curve::segment(v[3], v[2]);
    let c_7_0 = Curve::segment(v[7], v[0]);
    let e_3_2 = c_3_2.graded(e_4_3.0.last_cell(), n_wake, true)?;
    let e_7_0 = c_7_0.graded(e_6_7.0.last_cell(), n_wake, true)?;
    let c_1_2 = Curve::segment(v[1], v[2]);
    let c_1_0 = Curve::segment(v[1], v[0]);
    let e_1_2 = c_1_2.graded(params.wake_first_cell, n_normal, true)?;
    let e_1_0 = c_1_0.graded(params.wake_first_cell, n_normal, true)?;

    // Wall nodes.
    let front_u_nodes = Curve::Polyline(front_u).nodes(&e_8_11.0, e_8_11.1)?;
    let aft_u_nodes = aft_u_curve.nodes(&e_11_10.0, e_11_10.1)?;
    let front_l_nodes = Curve::Polyline(front_l).nodes(&e_8_9.0, e_8_9.1)?;
    let aft_l_nodes = aft_l_curve.nodes(&e_9_10.0, e_9_10.1)?;

    let mut upper_nodes = front_u_nodes.clone();
    upper_nodes.extend_from_slice(&aft_u_nodes[1..]);
    let mut lower_nodes = front_l_nodes.clone();
    lower_nodes.extend_from_slice(&aft_l_nodes[1..]);

    // Outward normals by central differences along the wall.
    let normal_on = |side: &[Vec2], other: &[Vec2], k: usize| -> Vec2 {
        // `side` runs LE -> TE; going LE -> TE on the upper side is clockwise.
        let last = side.len() - 1;
        let (prev, next) = if k == 0 {
            (other[1], side[1])
        } else if k == last {
            (side[k - 1], side[k])
        } else {
            (side[k - 1], side[k + 1])
        };
        outward_normal(prev, next)
    };
    let upper_normals: Vec<Vec2> = (0..upper_nodes.len())
        .map(|k| -normal_on(&upper_nodes, &lower_nodes, k))
        .collect();
    let lower_normals: Vec<Vec2> = (0..lower_nodes.len())
        .map(|k| normal_on(&lower_nodes, &upper_nodes, k))
        .collect();

    // Far-field rows.
    let split_u = front_u_nodes.len() - 1;
    let split_l = front_l_nodes.len() - 1;
    let arc_u = arc_fractions(&e_5_4.0.fractions(e_5_4.1), &upper_normals[..=split_u], 1.0);
    let arc_l = arc_fractions(&e_5_6.0.fractions(e_5_6.1), &lower_normals[..=split_l], -1.0);
    let top_5_4: Vec<Vec2> = arc_u.iter().map(|f| le + Vec2::from_angle(PI - 0.5 * PI * f) * r).collect();
    let top_5_6: Vec<Vec2> = arc_l.iter().map(|f| le + Vec2::from_angle(PI + 0.5 * PI * f) * r).collect();
    let top_4_3 = c_4_3.nodes(&e_4_3.0, e_4_3.1)?;
    let top_6_7 = c_6_7.nodes(&e_6_7.0, e_6_7.1)?;

    let columns = |bases: &[Vec2], normals: &[Vec2], tips: &[Vec2]| -> Result<Vec<Vec<Vec2>>> {
        bases
            .iter()
            .zip(normals)
            .zip(tips)
            .map(|((b, n), t)| wall_column(*b, *t, *n, params, n_normal))
            .collect()
    };
    let b3 = columns(&upper_nodes[..=split_u], &upper_normals[..=split_u], &top_5_4)?;
    let mut b2 = columns(&upper_nodes[split_u..], &upper_normals[split_u..], &top_4_3)?;
    let mut b4 = columns(&lower_nodes[..=split_l], &lower_normals[..=split_l], &top_5_6)?;
    let mut b5 = columns(&lower_nodes[split_l..], &lower_normals[split_l..], &top_6_7)?;
    // Shared columns are taken from one block so the interfaces conform bitwise.
    b2[0] = b3.last().unwrap().clone();
    b4[0] = b3[0].clone();
    b5[0] = b4.last().unwrap().clone();
    let col_10_3 = b2.last().unwrap().clone();
    let col_10_7 = b5.last().unwrap().clone();

    let wake = c_10_1.nodes(&e_10_1.0, e_10_1.1)?;
    let b1 = transfinite_fill(
        &wake,
        &c_3_2.nodes(&e_3_2.0, e_3_2.1)?,
        &col_10_3,
        &c_1_2.nodes(&e_1_2.0, e_1_2.1)?,
    )?;
    let b0 = transfinite_fill(
        &wake,
        &c_7_0.nodes(&e_7_0.0, e_7_0.1)?,
        &col_10_7,
        &c_1_0.nodes(&e_1_0.0, e_1_0.1)?,
    )?;

    let specs = vec![
        BlockSpec { id: 0, grid: b0, mirrored: true },
        BlockSpec { id: 1, grid: b1, mirrored: false },
        BlockSpec { id: 2, grid: NodeGrid::from_columns(&b2), mirrored: false },
        BlockSpec { id: 3, grid: NodeGrid::from_columns(&b3), mirrored: false },
        BlockSpec { id: 4, grid: NodeGrid::from_columns(&b4), mirrored: true },
        BlockSpec { id: 5, grid: NodeGrid::from_columns(&b5), mirrored: true },
    ];

    for (name, e) in [
        ("8-11", e_8_11),
        ("8-9", e_8_9),
        ("11-10", e_11_10),
        ("9-10", e_9_10),
        ("4-3", e_4_3),
        ("6-7", e_6_7),
        ("5-4", e_5_4),
        ("5-6", e_5_6),
        ("10-1", e_10_1),
        ("3-2", e_3_2),
        ("7-0", e_7_0),
        ("1-2", e_1_2),
        ("1-0", e_1_0),
    ] {
        edges.insert(name.to_string(), e);
    }
    let radial = GradedEdge::closing(v[3].dist(te), params.wall_first_cell, n_normal)?;
    edges.insert("10-3".to_string(), radial);

    let layout = CGridLayout {
        vertices: v,
        n_normal,
        n_front_upper,
        n_front_lower,
        n_aft,
        n_wake,
        edges,
        split_abscissa: xs,
        trailing_edge_width: te_width,
    };
    merge_blocks(specs, layout)
}

fn merge_blocks(specs: Vec<BlockSpec>, layout: CGridLayout) -> Result<StructuredMesh> {
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut nodes: Vec<Vec2> = Vec::new();
    let mut blocks = Vec::with_capacity(specs.len());
    let mut quads = Vec::new();
    let mut block_map = Vec::new();

    for spec in &specs {
        let g = &spec.grid;
        let ids: Vec<usize> = g
            .nodes
            .iter()
            .map(|p| {
                *index.entry((p.x.to_bits(), p.y.to_bits())).or_insert_with(|| {
                    nodes.push(*p);
                    nodes.len() - 1
                })
            })
            .collect();
        let block = MeshBlock { id: spec.id, ni: g.ni, nj: g.nj, node_ids: ids, mirrored: spec.mirrored };
        for j in 0..g.nj - 1 {
            for i in 0..g.ni - 1 {
                let (a, b, c, d) = (block.node(i, j), block.node(i + 1, j), block.node(i + 1, j + 1), block.node(i, j + 1));
                let q = if spec.mirrored { [a, d, c, b] } else { [a, b, c, d] };
                let area = quad_area([nodes[q[0]], nodes[q[1]], nodes[q[2]], nodes[q[3]]]);
                if !(area > 0.0) {
                    return Err(Error::DegenerateCell { cell: quads.len(), block: spec.id, area });
                }
                quads.push(q);
                block_map.push(spec.id as u8);
            }
        }
        blocks.push(block);
    }
    blocks.sort_by_key(|b| b.id);

    let row = |b: &MeshBlock, j: usize| -> Vec<usize> { (0..b.ni).map(|i| b.node(i, j)).collect() };
    let col = |b: &MeshBlock, i: usize| -> Vec<usize> { (0..b.nj).map(|j| b.node(i, j)).collect() };
    let chain_edges = |ids: &[usize]| -> Vec<[usize; 2]> { ids.windows(2).map(|w| [w[0], w[1]]).collect() };

    // Counter-clockwise wall loop from the trailing edge.
    let mut upper = row(&blocks[3], 0);
    upper.extend_from_slice(&row(&blocks[2], 0)[1..]);
    let mut lower = row(&blocks[4], 0);
    lower.extend_from_slice(&row(&blocks[5], 0)[1..]);
    let mut airfoil_loop: Vec<usize> = upper.iter().rev().copied().collect();
    airfoil_loop.extend_from_slice(&lower[1..lower.len() - 1]);
    let mut airfoil_edges = Vec::with_capacity(airfoil_loop.len());
    for k in 0..airfoil_loop.len() {
        airfoil_edges.push([airfoil_loop[k], airfoil_loop[(k + 1) % airfoil_loop.len()]]);
    }

    // Outer boundary, counter-clockwise from the lower outlet corner.
    let mut outer: Vec<usize> = col(&blocks[0], blocks[0].ni - 1).into_iter().rev().collect();
    outer.extend_from_slice(&col(&blocks[1], blocks[1].ni - 1)[1..]);
    let rev_row = |b: &MeshBlock| -> Vec<usize> { row(b, b.nj - 1).into_iter().rev().collect() };
    outer.extend_from_slice(&rev_row(&blocks[1])[1..]);
    outer.extend_from_slice(&rev_row(&blocks[2])[1..]);
    outer.extend_from_slice(&rev_row(&blocks[3])[1..]);
    outer.extend_from_slice(&row(&blocks[4], blocks[4].nj - 1)[1..]);
    outer.extend_from_slice(&row(&blocks[5], blocks[5].nj - 1)[1..]);
    outer.extend_from_slice(&row(&blocks[0], blocks[0].nj - 1)[1..]);

    let mut patches = BTreeMap::new();
    patches.insert(PATCH_AIRFOIL.to_string(), airfoil_edges);
    patches.insert(PATCH_FREESTREAM.to_string(), chain_edges(&outer));

    Ok(StructuredMesh { nodes, quads, block_map, patches, airfoil_loop, blocks, layout })
}
