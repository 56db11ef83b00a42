//! Static 2D kd-tree for k-nearest and fixed-radius neighbour queries.
//!
//! Results are always ordered by `(squared distance, index)` so that ties between
//! equidistant points resolve deterministically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Vec2;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: u8, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec2>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// A neighbour hit: index into the original point slice and squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

#[inline]
fn coord(p: Vec2, axis: u8) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Vec2]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
        for &i in &self.order[start..end] {
            let p = self.points[i];
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let axis: u8 = if hi.x - lo.x >= hi.y - lo.y { 0 } else { 1 };
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coord(points[a], axis).total_cmp(&coord(points[b], axis))
        });
        let value = coord(self.points[self.order[mid]], axis);
        self.nodes.push(Node::Split { axis, value, left: 0, right: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    /// The `k` nearest points to `query`, nearest first.
    pub fn nearest(&self, query: Vec2, k: usize) -> Vec<Neighbor> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, query, k, [0.0; 2], &mut heap);
        heap.into_sorted_vec()
    }

    // `off` holds the per-axis distance from the query to the cell of `node`, so that
    // `off[0]^2 + off[1]^2` bounds the distance to every point below it.
    fn knn_rec(&self, node: usize, q: Vec2, k: usize, off: [f64; 2], heap: &mut BinaryHeap<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor { index: i, dist_sq: (self.points[i] - q).norm_sq() };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = coord(q, axis) - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near, q, k, off, heap);
                let mut far_off = off;
                far_off[axis as usize] = diff;
                let bound = far_off[0] * far_off[0] + far_off[1] * far_off[1];
                // `<=` keeps equidistant candidates with smaller indices reachable.
                if heap.len() < k || bound <= heap.peek().unwrap().dist_sq {
                    self.knn_rec(far, q, k, far_off, heap);
                }
            }
        }
    }

    /// All points with distance `<= radius` from `query`, nearest first.
    pub fn within(&self, query: Vec2, radius: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        if self.points.is_empty() || !(radius >= 0.0) {
            return out;
        }
        let r_sq = radius * radius;
        self.within_rec(0, query, r_sq, [0.0; 2], &mut out);
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, q: Vec2, r_sq: f64, off: [f64; 2], out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = (self.points[i] - q).norm_sq();
                    if d <= r_sq {
                        out.push(Neighbor { index: i, dist_sq: d });
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = coord(q, axis) - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.within_rec(near, q, r_sq, off, out);
                let mut far_off = off;
                far_off[axis as usize] = diff;
                if far_off[0] * far_off[0] + far_off[1] * far_off[1] <= r_sq {
                    self.within_rec(far, q, r_sq, far_off, out);
                }
            }
        }
    }
}
