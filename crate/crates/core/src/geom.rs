//! Small 2D vector type and polyline helpers shared by the geometry, meshing and
//! post-processing modules.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from +x.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Returns the zero vector unchanged.
    #[inline]
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    /// Counter-clockwise rotation by 90 degrees.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Clockwise rotation by 90 degrees; the outward normal of a CCW boundary tangent.
    #[inline]
    pub fn perp_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    #[inline]
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Cumulative arc length at each vertex, starting at 0.
pub fn cumulative_length(points: &[Vec2]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(points.len());
    let mut s = 0.0;
    acc.push(0.0);
    for w in points.windows(2) {
        s += w[0].dist(w[1]);
        acc.push(s);
    }
    acc
}

pub fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point at arc length `s` along a polyline whose cumulative lengths are `cum`.
/// Values outside `[0, total]` clamp to the end points.
pub fn point_at_length(points: &[Vec2], cum: &[f64], s: f64) -> Vec2 {
    let total = *cum.last().expect("non-empty polyline");
    if s <= 0.0 {
        return points[0];
    }
    if s >= total {
        return *points.last().unwrap();
    }
    let seg = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
        Ok(i) => return points[i],
        Err(i) => i - 1,
    };
    let len = cum[seg + 1] - cum[seg];
    let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
    points[seg].lerp(points[seg + 1], t)
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq > 0.0 {
        ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(a + ab * t)
}

/// Shoelace signed area; positive for counter-clockwise vertex order.
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_at_length_interpolates() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)];
        let cum = cumulative_length(&pts);
        assert_eq!(cum, vec![0.0, 1.0, 2.0]);
        assert_eq!(point_at_length(&pts, &cum, 0.5), Vec2::new(0.5, 0.0));
        assert_eq!(point_at_length(&pts, &cum, 1.5), Vec2::new(1.0, 0.5));
        assert_eq!(point_at_length(&pts, &cum, 1.0), Vec2::new(1.0, 0.0));
        assert_eq!(point_at_length(&pts, &cum, 7.0), Vec2::new(1.0, 1.0));
    }

    #[test]
    fn segment_distance_cases() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        assert_eq!(point_segment_distance(Vec2::new(0.5, 2.0), a, b), 2.0);
        assert_eq!(point_segment_distance(Vec2::new(-3.0, 4.0), a, b), 5.0);
        assert_eq!(point_segment_distance(Vec2::new(1.0, 0.0), a, a), 1.0);
    }

    #[test]
    fn unit_square_area() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_eq!(signed_area(&sq), 1.0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&rev), -1.0);
    }
}
