//! Learning-side preprocessing: cropping, features, normalization, subsampling, radius
//! graphs, task splits and inference averaging.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::naca::{AirfoilGeometry, CaseSpec};
use crate::post::SimulationCloud;
use crate::spatial::KdTree;

pub const INPUT_WIDTH: usize = 7;
pub const TARGET_WIDTH: usize = 4;
pub const DEFAULT_SUBSAMPLE: usize = 32_000;
pub const DEFAULT_RADIUS: f64 = 0.05;
pub const DEFAULT_MAX_NEIGHBORS: usize = 64;

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

impl Default for Rect {
    fn default() -> Self {
        Rect { x_min: -2.0, x_max: 4.0, y_min: -1.5, y_max: 1.5 }
    }
}

/// Indices of the nodes inside `rect`.
pub fn crop_indices(cloud: &SimulationCloud, rect: &Rect) -> Vec<usize> {
    (0..cloud.len()).filter(|&i| rect.contains(cloud.positions[i])).collect()
}

pub fn select(cloud: &SimulationCloud, idx: &[usize]) -> SimulationCloud {
    fn pick<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
        idx.iter().map(|&i| v[i]).collect()
    }
    SimulationCloud {
        positions: pick(&cloud.positions, idx),
        inlet_velocity: pick(&cloud.inlet_velocity, idx),
        sdf: pick(&cloud.sdf, idx),
        normals: pick(&cloud.normals, idx),
        velocity: pick(&cloud.velocity, idx),
        pressure: pick(&cloud.pressure, idx),
        nu_t: pick(&cloud.nu_t, idx),
        surface: pick(&cloud.surface, idx),
    }
}

pub fn crop(cloud: &SimulationCloud, rect: &Rect) -> Result<SimulationCloud> {
    let idx = crop_indices(cloud, rect);
    if idx.is_empty() {
        return Err(Error::Data("no node inside the crop rectangle".into()));
    }
    Ok(select(cloud, &idx))
}

/// Exact distance queries to a closed polyline, accelerated by a vertex index.
///
/// The closest point on a segment is within half a segment length of one of its ends, so
/// only segments touching a vertex within `d_v + L/2` of the query can win, where `d_v`
/// is the nearest-vertex distance and `L` the longest segment.
pub struct PolylineDistance {
    vertices: Vec<Vec2>,
    tree: KdTree,
    half_max: f64,
}

impl PolylineDistance {
    pub fn new(closed_loop: Vec<Vec2>) -> Result<Self> {
        if closed_loop.len() < 2 {
            return Err(Error::Parameter("distance needs at least two outline vertices".into()));
        }
        let n = closed_loop.len();
        let half_max = (0..n).map(|i| closed_loop[i].dist(closed_loop[(i + 1) % n])).fold(0.0, f64::max) * 0.5;
        let tree = KdTree::new(&closed_loop);
        Ok(PolylineDistance { vertices: closed_loop, tree, half_max })
    }

    pub fn distance(&self, q: Vec2) -> f64 {
        let n = self.vertices.len();
        let dv = self.tree.nearest(q, 1)[0].dist_sq.sqrt();
        let reach = (dv + self.half_max) * (1.0 + 1e-12) + 1e-300;
        let mut best = dv;
        for h in self.tree.within(q, reach) {
            let v = self.vertices[h.index];
            for w in [self.vertices[(h.index + n - 1) % n], self.vertices[(h.index + 1) % n]] {
                best = best.min(geom::point_segment_distance(q, v, w));
            }
        }
        best
    }
}

/// Unsigned distance from each point to the airfoil outline.
pub fn signed_distance(points: &[Vec2], airfoil: &AirfoilGeometry) -> Vec<f64> {
    let field = PolylineDistance::new(airfoil.closed_loop()).expect("airfoil outline has vertices");
    points.par_iter().map(|p| field.distance(*p)).collect()
}

/// Model inputs and targets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub inputs: Vec<[f64; INPUT_WIDTH]>,
    pub targets: Vec<[f64; TARGET_WIDTH]>,
}

impl Features {
    pub fn flat_inputs(&self) -> Vec<f64> {
        self.inputs.iter().flatten().copied().collect()
    }

    pub fn flat_targets(&self) -> Vec<f64> {
        self.targets.iter().flatten().copied().collect()
    }
}

/// Inputs `(x, y, u_in_x, u_in_y, sdf, n_x, n_y)` and targets `(u_x, u_y, p, nu_t)`.
/// The inlet columns come from the case, normals are zero off the surface.
pub fn build_features(cloud: &SimulationCloud, case: &CaseSpec) -> Result<Features> {
    let n = cloud.len();
    if [cloud.sdf.len(), cloud.normals.len(), cloud.velocity.len(), cloud.pressure.len(), cloud.nu_t.len(), cloud.surface.len()]
        .iter()
        .any(|&l| l != n)
    {
        return Err(Error::Data("cloud columns have inconsistent lengths".into()));
    }
    let u_in = case.inlet_velocity();
    let inputs = (0..n)
        .map(|i| {
            let p = cloud.positions[i];
            let nv = if cloud.surface[i] { cloud.normals[i] } else { Vec2::default() };
            [p.x, p.y, u_in.x, u_in.y, cloud.sdf[i], nv.x, nv.y]
        })
        .collect();
    let targets = (0..n)
        .map(|i| [cloud.velocity[i].x, cloud.velocity[i].y, cloud.pressure[i], cloud.nu_t[i]])
        .collect();
    Ok(Features { inputs, targets })
}

/// Per-channel z-score normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Channels with zero variance, whose std was set to 1.
    pub degenerate: Vec<bool>,
}

impl Normalizer {
    /// Fit over the concatenation of row-major tables of `width` channels.
    pub fn fit(tables: &[&[f64]], width: usize) -> Result<Normalizer> {
        if width == 0 {
            return Err(Error::Parameter("normalizer width must be positive".into()));
        }
        let mut count = 0usize;
        for t in tables {
            if t.len() % width != 0 {
                return Err(Error::Data(format!("table length {} is not a multiple of {width}", t.len())));
            }
            count += t.len() / width;
        }
        if count == 0 {
            return Err(Error::Data("cannot fit a normalizer on an empty training set".into()));
        }
        let mut means = vec![0.0; width];
        for t in tables {
            for row in t.chunks_exact(width) {
                for c in 0..width {
                    means[c] += row[c];
                }
            }
        }
        means.iter_mut().for_each(|m| *m /= count as f64);
        let mut var = vec![0.0; width];
        for t in tables {
            for row in t.chunks_exact(width) {
                for c in 0..width {
                    let d = row[c] - means[c];
                    var[c] += d * d;
                }
            }
        }
        let mut stds = Vec::with_capacity(width);
        let mut degenerate = Vec::with_capacity(width);
        for v in var {
            let s = (v / count as f64).sqrt();
            degenerate.push(!(s > 0.0));
            stds.push(if s > 0.0 { s } else { 1.0 });
        }
        Ok(Normalizer { means, stds, degenerate })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    fn check(&self, data: &[f64]) -> Result<()> {
        if data.len() % self.width() != 0 {
            return Err(Error::Data(format!("table length {} is not a multiple of {}", data.len(), self.width())));
        }
        Ok(())
    }

    pub fn apply(&self, data: &mut [f64]) -> Result<()> {
        self.check(data)?;
        let w = self.width();
        for row in data.chunks_exact_mut(w) {
            for c in 0..w {
                row[c] = (row[c] - self.means[c]) / self.stds[c];
            }
        }
        Ok(())
    }

    pub fn invert(&self, data: &mut [f64]) -> Result<()> {
        self.check(data)?;
        let w = self.width();
        for row in data.chunks_exact_mut(w) {
            for c in 0..w {
                row[c] = row[c] * self.stds[c] + self.means[c];
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsample {
    pub indices: Vec<usize>,
    /// The cloud had no more than the requested count, so every node was returned.
    pub exhausted: bool,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` distinct node indices drawn uniformly without replacement. The draw depends only
/// on `(seed, stream)`; use the case index as the stream.
pub fn subsample(n_nodes: usize, n: usize, seed: u64, stream: u64) -> Subsample {
    if n_nodes <= n {
        return Subsample { indices: (0..n_nodes).collect(), exhausted: true };
    }
    let mut rng = stream_rng(seed, stream);
    let indices = rand::seq::index::sample(&mut rng, n_nodes, n).into_vec();
    Subsample { indices, exhausted: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGraph {
    /// Directed `(source, target)` pairs, grouped by source in increasing order.
    pub edges: Vec<(usize, usize)>,
    pub radius: f64,
    pub max_neighbors: usize,
}

impl RadiusGraph {
    pub fn out_degrees(&self, n_nodes: usize) -> Vec<usize> {
        let mut d = vec![0; n_nodes];
        for &(s, _) in &self.edges {
            d[s] += 1;
        }
        d
    }
}

/// Edges from every node to its nearest neighbours within the closed ball of `radius`,
/// at most `max_neighbors` per node, ties broken by index. No self loops.
pub fn radius_graph(points: &[Vec2], radius: f64, max_neighbors: usize) -> Result<RadiusGraph> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    let tree = KdTree::new(points);
    let per_node: Vec<Vec<(usize, usize)>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            tree.within(points[i], radius)
                .into_iter()
                .filter(|h| h.index != i)
                .take(max_neighbors)
                .map(|h| (i, h.index))
                .collect()
        })
        .collect();
    Ok(RadiusGraph { edges: per_node.concat(), radius, max_neighbors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Full,
    Scarce,
    Reynolds,
    Aoa,
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Task> {
        match s {
            "full" => Ok(Task::Full),
            "scarce" => Ok(Task::Scarce),
            "reynolds" => Ok(Task::Reynolds),
            "aoa" => Ok(Task::Aoa),
            _ => Err(Error::Parameter(format!("unknown task {s:?}"))),
        }
    }
}

pub const FULL_TRAIN_FRACTION: f64 = 0.8;
pub const SCARCE_TRAIN: usize = 200;
pub const REYNOLDS_TRAIN: (f64, f64) = (3e6, 5e6);
pub const AOA_TRAIN_DEG: (f64, f64) = (-2.5, 12.5);

/// What a split needs to know about a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub id: String,
    pub reynolds: f64,
    pub aoa_deg: f64,
}

impl From<&CaseSpec> for CaseMeta {
    fn from(c: &CaseSpec) -> Self {
        CaseMeta { id: c.name.clone(), reynolds: c.reynolds, aoa_deg: c.aoa_deg() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSplit {
    pub task: Task,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub validation_ids: Vec<String>,
}

pub fn in_reynolds_window(re: f64) -> bool {
    re >= REYNOLDS_TRAIN.0 && re <= REYNOLDS_TRAIN.1
}

pub fn in_aoa_window(aoa_deg: f64) -> bool {
    aoa_deg >= AOA_TRAIN_DEG.0 && aoa_deg <= AOA_TRAIN_DEG.1
}

/// Train/test partition for one of the four tasks. Case ids must be unique.
pub fn split_dataset(cases: &[CaseMeta], task: Task, seed: u64) -> Result<TaskSplit> {
    let unique: BTreeSet<&str> = cases.iter().map(|c| c.id.as_str()).collect();
    if unique.len() != cases.len() {
        return Err(Error::Data("case ids are not unique".into()));
    }
    if cases.is_empty() {
        return Err(Error::Data("no cases to split".into()));
    }
    let ids = |f: &dyn Fn(&CaseMeta) -> bool| -> Vec<String> { cases.iter().filter(|c| f(c)).map(|c| c.id.clone()).collect() };
    let (train_ids, test_ids) = match task {
        Task::Full | Task::Scarce => {
            let mut order: Vec<usize> = (0..cases.len()).collect();
            order.shuffle(&mut stream_rng(seed, 0));
            let n_train = (FULL_TRAIN_FRACTION * cases.len() as f64).round() as usize;
            let mut train: Vec<String> = order[..n_train].iter().map(|&i| cases[i].id.clone()).collect();
            let test: Vec<String> = order[n_train..].iter().map(|&i| cases[i].id.clone()).collect();
            if task == Task::Scarce {
                if train.len() < SCARCE_TRAIN {
                    return Err(Error::Data(format!(
                        "scarce task needs {SCARCE_TRAIN} training cases, full split has {}",
                        train.len()
                    )));
                }
                train.shuffle(&mut stream_rng(seed, 1));
                train.truncate(SCARCE_TRAIN);
            }
            (train, test)
        }
        Task::Reynolds => (ids(&|c| in_reynolds_window(c.reynolds)), ids(&|c| !in_reynolds_window(c.reynolds))),
        Task::Aoa => (ids(&|c| in_aoa_window(c.aoa_deg)), ids(&|c| !in_aoa_window(c.aoa_deg))),
    };
    Ok(TaskSplit { task, seed, train_ids, test_ids, validation_ids: Vec::new() })
}

/// Move a seeded `fraction` of the training ids into a validation set.
pub fn carve_validation(split: &TaskSplit, fraction: f64) -> Result<TaskSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!("validation fraction {fraction} outside (0, 1)")));
    }
    let mut train = split.train_ids.clone();
    train.shuffle(&mut stream_rng(split.seed, 2));
    let n_val = (fraction * train.len() as f64).round() as usize;
    let validation_ids = train.split_off(train.len() - n_val);
    Ok(TaskSplit { train_ids: train, validation_ids, ..split.clone() })
}

/// Random batches of at most `batch` nodes that together cover every node once; the last
/// batch is topped up with already-seen nodes so that all batches have the same size.
pub fn coverage_batches(n_nodes: usize, batch: usize, seed: u64, stream: u64) -> Vec<Vec<usize>> {
    if n_nodes == 0 || batch == 0 {
        return Vec::new();
    }
    let mut rng = stream_rng(seed, stream);
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(&mut rng);
    let mut out: Vec<Vec<usize>> = order.chunks(batch).map(|c| c.to_vec()).collect();
    if n_nodes > batch {
        let last = out.last_mut().unwrap();
        let have: BTreeSet<usize> = last.iter().copied().collect();
        let mut extra: Vec<usize> = (0..n_nodes).filter(|i| !have.contains(i)).collect();
        extra.shuffle(&mut rng);
        last.extend(extra.into_iter().take(batch - have.len()));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceAverage {
    /// Row-major mean values, `width` per node.
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Average per-node predictions over passes of `(node indices, row-major values)`.
pub fn inference_average(n_nodes: usize, width: usize, passes: &[(Vec<usize>, Vec<f64>)]) -> Result<InferenceAverage> {
    let mut sum = vec![0.0; n_nodes * width];
    let mut counts = vec![0usize; n_nodes];
    for (k, (idx, vals)) in passes.iter().enumerate() {
        if vals.len() != idx.len() * width {
            return Err(Error::Data(format!("pass {k}: {} values for {} nodes of width {width}", vals.len(), idx.len())));
        }
        for (r, &i) in idx.iter().enumerate() {
            if i >= n_nodes {
                return Err(Error::Data(format!("pass {k}: node index {i} out of range")));
            }
            counts[i] += 1;
            for c in 0..width {
                sum[i * width + c] += vals[r * width + c];
            }
        }
    }
    let unseen: Vec<usize> = (0..n_nodes).filter(|&i| counts[i] == 0).collect();
    if !unseen.is_empty() {
        let shown: Vec<String> = unseen.iter().take(10).map(|i| i.to_string()).collect();
        return Err(Error::Data(format!(
            "{} nodes never predicted: {}{}",
            unseen.len(),
            shown.join(", "),
            if unseen.len() > 10 { ", ..." } else { "" }
        )));
    }
    for i in 0..n_nodes {
        for c in 0..width {
            sum[i * width + c] /= counts[i] as f64;
        }
    }
    Ok(InferenceAverage { values: sum, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cloud(points: &[Vec2]) -> SimulationCloud {
        let n = points.len();
        SimulationCloud {
            positions: points.to_vec(),
            inlet_velocity: vec![Vec2::new(1.0, 0.0); n],
            sdf: (0..n).map(|i| i as f64).collect(),
            normals: vec![Vec2::default(); n],
            velocity: vec![Vec2::default(); n],
            pressure: (0..n).map(|i| -(i as f64)).collect(),
            nu_t: vec![0.0; n],
            surface: vec![false; n],
        }
    }

    #[test]
    fn crop_is_closed() {
        let c = tiny_cloud(&[Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0), Vec2::new(4.0, 1.5)]);
        let r = crop(&c, &Rect::default()).unwrap();
        assert_eq!(r.positions, vec![Vec2::new(0.0, 0.0), Vec2::new(4.0, 1.5)]);
        assert_eq!(r.pressure, vec![0.0, -2.0]);
        assert_eq!(r.sdf.len(), 2);
        assert_eq!(crop(&r, &Rect::default()).unwrap(), r);
        let far = tiny_cloud(&[Vec2::new(9.0, 9.0)]);
        assert!(matches!(crop(&far, &Rect::default()), Err(Error::Data(_))));
    }

    #[test]
    fn normalizer_degenerate_and_roundtrip() {
        let data = vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0];
        let n = Normalizer::fit(&[&data], 2).unwrap();
        assert_eq!(n.degenerate, vec![false, true]);
        assert_eq!(n.stds[1], 1.0);
        let mut d = data.clone();
        n.apply(&mut d).unwrap();
        assert_eq!(d[1], 0.0);
        n.invert(&mut d).unwrap();
        for (a, b) in d.iter().zip(&data) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(Normalizer::fit(&[], 2).is_err());
    }

    #[test]
    fn subsample_cases() {
        let s = subsample(1000, 32_000, 3, 0);
        assert!(s.exhausted && s.indices.len() == 1000);
        let a = subsample(5000, 100, 3, 7);
        assert_eq!(a, subsample(5000, 100, 3, 7));
        assert_ne!(a, subsample(5000, 100, 3, 8));
        let set: BTreeSet<usize> = a.indices.iter().copied().collect();
        assert_eq!(set.len(), 100);
    }

    #[test]
    fn pair_edges() {
        let g = radius_graph(&[Vec2::new(0.0, 0.0), Vec2::new(0.04, 0.0)], 0.05, 64).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 0)]);
        let g = radius_graph(&[Vec2::new(0.0, 0.0), Vec2::new(0.06, 0.0)], 0.05, 64).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn hub_is_capped_to_nearest() {
        let mut pts = vec![Vec2::new(0.0, 0.0)];
        for k in 0..70 {
            pts.push(Vec2::from_angle(k as f64) * (0.0005 * (k + 1) as f64));
        }
        let g = radius_graph(&pts, 0.05, 64).unwrap();
        let hub: Vec<usize> = g.edges.iter().filter(|e| e.0 == 0).map(|e| e.1).collect();
        assert_eq!(hub, (1..=64).collect::<Vec<_>>());
    }

    #[test]
    fn averaging() {
        let passes = vec![(vec![0, 1], vec![1.0, 10.0]), (vec![1, 2], vec![3.0, 7.0])];
        let a = inference_average(3, 1, &passes).unwrap();
        assert_eq!(a.values, vec![1.0, 6.5, 7.0]);
        assert_eq!(a.counts, vec![1, 2, 1]);
        let e = inference_average(4, 1, &passes).unwrap_err();
        assert!(e.to_string().contains("3"));
    }

    #[test]
    fn coverage_batches_cover() {
        let b = coverage_batches(1000, 300, 1, 0);
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|x| x.len() == 300));
        let seen: BTreeSet<usize> = b.iter().flatten().copied().collect();
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn validation_carve_out() {
        let cases: Vec<CaseMeta> = (0..100).map(|i| CaseMeta { id: format!("c{i}"), reynolds: 4e6, aoa_deg: 0.0 }).collect();
        let s = split_dataset(&cases, Task::Full, 5).unwrap();
        let v = carve_validation(&s, 0.1).unwrap();
        assert_eq!((v.train_ids.len(), v.validation_ids.len(), v.test_ids.len()), (72, 8, 20));
    }
}
