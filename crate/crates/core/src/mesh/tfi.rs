//! Structured node grids and bilinear transfinite interpolation.

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};

/// Logically rectangular node array, `ni` columns by `nj` rows, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    pub ni: usize,
    pub nj: usize,
    pub nodes: Vec<Vec2>,
}

impl NodeGrid {
    pub fn at(&self, i: usize, j: usize) -> Vec2 {
        self.nodes[j * self.ni + i]
    }

    pub fn row(&self, j: usize) -> Vec<Vec2> {
        self.nodes[j * self.ni..(j + 1) * self.ni].to_vec()
    }

    pub fn column(&self, i: usize) -> Vec<Vec2> {
        (0..self.nj).map(|j| self.at(i, j)).collect()
    }

    /// Signed area of the cell with lower-left node `(i, j)`, positive when the
    /// `(i, j)` frame is right-handed.
    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        quad_area([self.at(i, j), self.at(i + 1, j), self.at(i + 1, j + 1), self.at(i, j + 1)])
    }

    /// Build from columns, each running from row 0 to row `nj - 1`.
    pub fn from_columns(columns: &[Vec<Vec2>]) -> NodeGrid {
        let ni = columns.len();
        let nj = columns[0].len();
        let mut nodes = vec![Vec2::ZERO; ni * nj];
        for (i, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), nj);
            for (j, p) in col.iter().enumerate() {
                nodes[j * ni + i] = *p;
            }
        }
        NodeGrid { ni, nj, nodes }
    }
}

/// Signed area of a quadrilateral from its diagonals; positive for CCW node order.
pub fn quad_area(q: [Vec2; 4]) -> f64 {
    0.5 * (q[2] - q[0]).cross(q[3] - q[1])
}

fn arc_fractions(points: &[Vec2]) -> Vec<f64> {
    let cum = geom::cumulative_length(points);
    let total = *cum.last().unwrap();
    if total == 0.0 {
        let n = (points.len() - 1) as f64;
        return (0..points.len()).map(|k| k as f64 / n).collect();
    }
    cum.iter().map(|c| c / total).collect()
}

/// Fill a block from its four sides by bilinear transfinite interpolation.
///
/// `bottom` and `top` run in the `i` direction (left to right), `left` and `right` in the
/// `j` direction (bottom to top). Interior parameters blend the arc-length fractions of
/// opposite sides, so differently graded sides are honoured. Boundary nodes are copied
/// from the inputs unchanged.
pub fn transfinite_fill(bottom: &[Vec2], top: &[Vec2], left: &[Vec2], right: &[Vec2]) -> Result<NodeGrid> {
    let (ni, nj) = (bottom.len(), left.len());
    if ni < 2 || nj < 2 || top.len() != ni || right.len() != nj {
        return Err(Error::Parameter(format!(
            "side node counts mismatch: bottom {}, top {}, left {}, right {}",
            bottom.len(),
            top.len(),
            left.len(),
            right.len()
        )));
    }
    let corners = [
        (bottom[0], left[0]),
        (bottom[ni - 1], right[0]),
        (top[0], left[nj - 1]),
        (top[ni - 1], right[nj - 1]),
    ];
    for (a, b) in corners {
        if a.dist(b) > 1e-9 {
            return Err(Error::Parameter(format!("block corners do not coincide: {a:?} vs {b:?}")));
        }
    }
    let (xb, xt) = (arc_fractions(bottom), arc_fractions(top));
    let (el, er) = (arc_fractions(left), arc_fractions(right));
    let (p00, p10, p01, p11) = (bottom[0], bottom[ni - 1], top[0], top[ni - 1]);

    let mut nodes = vec![Vec2::ZERO; ni * nj];
    nodes[..ni].copy_from_slice(bottom);
    nodes[(nj - 1) * ni..].copy_from_slice(top);
    for j in 1..nj - 1 {
        nodes[j * ni] = left[j];
        nodes[j * ni + ni - 1] = right[j];
        for i in 1..ni - 1 {
            let dxi = xt[i] - xb[i];
            let deta = er[j] - el[j];
            let xi = (xb[i] + el[j] * dxi) / (1.0 - dxi * deta);
            let eta = el[j] + xi * deta;
            let p = bottom[i] * (1.0 - eta) + top[i] * eta + left[j] * (1.0 - xi) + right[j] * xi
                - (p00 * ((1.0 - xi) * (1.0 - eta))
                    + p10 * (xi * (1.0 - eta))
                    + p01 * ((1.0 - xi) * eta)
                    + p11 * (xi * eta));
            nodes[j * ni + i] = p;
        }
    }
    Ok(NodeGrid { ni, nj, nodes })
}
