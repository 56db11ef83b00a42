//! Geometric grading of block edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};

/// Relative slack when deciding whether a geometric series reaches a length, so that
/// series which close exactly are not pushed to an extra cell by rounding.
const CLOSE_EPS: f64 = 1e-12;

/// A graded edge: `n_cells` cells starting at `first_cell`, each `ratio` times the previous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedEdge {
    pub length: f64,
    pub first_cell: f64,
    pub ratio: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// First cell at the start of the curve.
    #[default]
    Forward,
    /// First cell at the end of the curve.
    Backward,
}

/// Sum of `n` terms of the geometric series `first * ratio^k`.
pub fn geometric_sum(first: f64, ratio: f64, n: usize) -> f64 {
    if ratio == 1.0 {
        return first * n as f64;
    }
    // (r^n - 1)/(r - 1) without cancellation near r = 1.
    let dr = ratio - 1.0;
    first * (n as f64 * dr.ln_1p()).exp_m1() / dr
}

impl GradedEdge {
    /// Build an edge whose cells close `length` exactly, keeping `first_cell` fixed.
    /// Cells may shrink along the curve; the edge is then stored with its smallest cell
    /// first and the returned direction is [`Direction::Backward`].
    pub fn closing(length: f64, first_cell: f64, n_cells: usize) -> Result<(GradedEdge, Direction)> {
        let q = closing_ratio(length, first_cell, n_cells)?;
        if q >= 1.0 {
            Ok((GradedEdge { length, first_cell, ratio: q, n_cells }, Direction::Forward))
        } else {
            let smallest = first_cell * q.powi(n_cells as i32 - 1);
            let ratio = 1.0 / q;
            Ok((GradedEdge { length, first_cell: smallest, ratio, n_cells }, Direction::Backward))
        }
    }

    pub fn uniform(length: f64, n_cells: usize) -> GradedEdge {
        GradedEdge { length, first_cell: length / n_cells as f64, ratio: 1.0, n_cells }
    }

    /// Cell sizes from the first cell outward.
    pub fn cell_sizes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_cells);
        let mut c = self.first_cell;
        for _ in 0..self.n_cells {
            out.push(c);
            c *= self.ratio;
        }
        out
    }

    pub fn last_cell(&self) -> f64 {
        self.first_cell * self.ratio.powi(self.n_cells as i32 - 1)
    }

    /// `|sum(cells) - length| / length`.
    pub fn closure_residual(&self) -> f64 {
        let s: f64 = self.cell_sizes().iter().sum();
        (s - self.length).abs() / self.length
    }

    /// Normalized node positions in `[0, 1]` along the curve, `n_cells + 1` values with
    /// exact end points.
    pub fn fractions(&self, direction: Direction) -> Vec<f64> {
        let mut cells = self.cell_sizes();
        if direction == Direction::Backward {
            cells.reverse();
        }
        let total: f64 = cells.iter().sum();
        let mut out = Vec::with_capacity(self.n_cells + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for c in &cells[..cells.len().saturating_sub(1)] {
            acc += c;
            out.push(acc / total);
        }
        out.push(1.0);
        out
    }

    /// Width of the cell at the start (`at_start`) or end of the curve for `direction`.
    pub fn end_cell(&self, direction: Direction, at_start: bool) -> f64 {
        match (direction, at_start) {
            (Direction::Forward, true) | (Direction::Backward, false) => self.first_cell,
            _ => self.last_cell(),
        }
    }
}

/// Smallest cell count whose geometric series covers `length`, and the size of its last cell.
pub fn geometric_cell_count(length: f64, first_cell: f64, ratio: f64) -> Result<(usize, f64)> {
    if !(length > 0.0) || !(first_cell > 0.0) {
        return Err(Error::Domain(format!(
            "length ({length}) and first cell ({first_cell}) must be positive"
        )));
    }
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!("expansion ratio must be >= 1, got {ratio}")));
    }
    if first_cell > length {
        return Err(Error::Domain(format!(
            "first cell ({first_cell}) exceeds edge length ({length})"
        )));
    }
    let target = length * (1.0 - CLOSE_EPS);
    let estimate = if ratio == 1.0 {
        (length / first_cell).ceil()
    } else {
        ((length * (ratio - 1.0) / first_cell).ln_1p() / ratio.ln()).ceil()
    };
    let mut n = (estimate as usize).max(1);
    while n > 1 && geometric_sum(first_cell, ratio, n - 1) >= target {
        n -= 1;
    }
    while geometric_sum(first_cell, ratio, n) < target {
        n += 1;
    }
    Ok((n, first_cell * ratio.powi(n as i32 - 1)))
}

/// Expansion ratio `>= 1` for which `n_cells` cells starting at `first_cell` fill `length`.
pub fn auto_ratio(length: f64, first_cell: f64, n_cells: usize) -> Result<f64> {
    if !(length > 0.0) || !(first_cell > 0.0) || n_cells == 0 {
        return Err(Error::Domain("auto_ratio needs positive length, first cell and count".into()));
    }
    let uniform = first_cell * n_cells as f64;
    if uniform > length * (1.0 + CLOSE_EPS) {
        return Err(Error::Parameter(format!(
            "{n_cells} cells of {first_cell} already exceed the edge length {length}"
        )));
    }
    closing_ratio(length, first_cell, n_cells).map(|r| r.max(1.0))
}

/// Ratio `q > 0` with `sum_{k<n} first * q^k = length`; `q < 1` when the cells must shrink.
pub(crate) fn closing_ratio(length: f64, first_cell: f64, n_cells: usize) -> Result<f64> {
    if !(length > 0.0) || !(first_cell > 0.0) || n_cells == 0 {
        return Err(Error::Domain("closing ratio needs positive length, first cell and count".into()));
    }
    if n_cells == 1 {
        if ((first_cell - length) / length).abs() <= 1e-9 {
            return Ok(1.0);
        }
        return Err(Error::Parameter(format!(
            "a single cell of {first_cell} cannot fill length {length}"
        )));
    }
    let uniform = first_cell * n_cells as f64;
    if ((uniform - length) / length).abs() <= CLOSE_EPS {
        return Ok(1.0);
    }
    if first_cell >= length {
        return Err(Error::Parameter(format!(
            "first cell {first_cell} does not fit in length {length}"
        )));
    }
    let f = |q: f64| geometric_sum(first_cell, q, n_cells) - length;
    let (mut lo, mut hi) = if uniform < length {
        let mut hi = 2.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Numeric("closing ratio bracket search diverged".into()));
            }
        }
        (1.0, hi)
    } else {
        (0.0, 1.0)
    };
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    if (f(q) / length).abs() > 1e-12 {
        return Err(Error::Numeric(format!(
            "closing ratio residual {} above tolerance",
            f(q) / length
        )));
    }
    Ok(q)
}

/// Place `spec.n_cells + 1` nodes along `curve` at the cumulative graded arc lengths.
pub fn distribute_edge(curve: &[Vec2], spec: &GradedEdge, direction: Direction) -> Result<Vec<Vec2>> {
    if curve.len() < 2 {
        return Err(Error::Parameter("curve needs at least two points".into()));
    }
    let cum = geom::cumulative_length(curve);
    let arc = *cum.last().unwrap();
    if ((arc - spec.length) / spec.length).abs() > 1e-6 {
        return Err(Error::Parameter(format!(
            "curve length {arc} does not match graded edge length {}",
            spec.length
        )));
    }
    let fr = spec.fractions(direction);
    let mut out: Vec<Vec2> = fr.iter().map(|&t| geom::point_at_length(curve, &cum, t * arc)).collect();
    out[0] = curve[0];
    *out.last_mut().unwrap() = *curve.last().unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cell count by explicit accumulation of the series.
    fn loop_count(length: f64, first: f64, ratio: f64) -> usize {
        let (mut sum, mut cell, mut n) = (0.0, first, 0);
        while sum < length * (1.0 - 1e-12) {
            sum += cell;
            cell *= ratio;
            n += 1;
        }
        n
    }

    #[test]
    fn count_examples() {
        assert_eq!(geometric_cell_count(1.0, 0.1, 1.0).unwrap(), (10, 0.1));
        assert_eq!(geometric_cell_count(1.0, 2e-6, 1.075).unwrap().0, 146);
        assert_eq!(loop_count(1.0, 2e-6, 1.075), 146);
        assert_eq!(geometric_cell_count(1.0, 0.5, 2.0).unwrap(), (2, 1.0));
    }

    #[test]
    fn count_errors() {
        assert!(matches!(geometric_cell_count(0.0, 0.1, 1.1), Err(Error::Domain(_))));
        assert!(matches!(geometric_cell_count(1.0, -0.1, 1.1), Err(Error::Domain(_))));
        assert!(matches!(geometric_cell_count(1.0, 0.1, 0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn auto_ratio_examples() {
        assert_eq!(auto_ratio(1.0, 0.05, 20).unwrap(), 1.0);
        let r = auto_ratio(1.0, 0.01, 20).unwrap();
        let e = GradedEdge { length: 1.0, first_cell: 0.01, ratio: r, n_cells: 20 };
        assert!(e.closure_residual() < 1e-9);
        assert!(r > 1.0);
        assert!(matches!(auto_ratio(1.0, 0.1, 20), Err(Error::Parameter(_))));
    }

    #[test]
    fn shrinking_closure_is_backward() {
        let (e, dir) = GradedEdge::closing(1.0, 0.1, 20).unwrap();
        assert_eq!(dir, Direction::Backward);
        assert!(e.ratio > 1.0);
        assert!(e.closure_residual() < 1e-9);
        assert!((e.end_cell(dir, true) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn distribute_examples() {
        let seg = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        let u = distribute_edge(&seg, &GradedEdge::uniform(1.0, 4), Direction::Forward).unwrap();
        let xs: Vec<f64> = u.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let g = GradedEdge { length: 1.0, first_cell: 1.0 / 7.0, ratio: 2.0, n_cells: 3 };
        let f = distribute_edge(&seg, &g, Direction::Forward).unwrap();
        let want = [0.0, 1.0 / 7.0, 3.0 / 7.0, 1.0];
        for (p, w) in f.iter().zip(want) {
            assert!((p.x - w).abs() < 1e-15);
        }
        let b = distribute_edge(&seg, &g, Direction::Backward).unwrap();
        for (p, q) in b.iter().zip(f.iter().rev()) {
            assert!((p.x - (1.0 - q.x)).abs() < 1e-15);
        }
        let wrong = GradedEdge::uniform(2.0, 4);
        assert!(distribute_edge(&seg, &wrong, Direction::Forward).is_err());
    }
}
