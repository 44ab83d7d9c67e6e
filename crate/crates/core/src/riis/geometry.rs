use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Side of an oriented polyline, relative to the left normal `(-t_y, t_x)`
/// of its segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Closest-point query result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub distance: f64,
    pub segment: usize,
    /// Parameter along the segment in `[0, 1]`.
    pub t: f64,
    /// Cross product of the segment direction with `x - closest`; its sign
    /// gives the side.
    pub cross: f64,
}

/// Open polyline with nondegenerate segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateGeometry("a valve needs at least two vertices".into()));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite valve vertex".into()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if crate::mesh::dist(w[0], w[1]) <= 0.0 {
                return Err(Error::DegenerateGeometry(format!("valve segment {i} has zero length")));
            }
        }
        Ok(Polyline { points })
    }

    /// Straight segment from `a` to `b` split into `n` equal pieces.
    /// Vertices are placed symmetrically about the midpoint.
    pub fn segment(a: Point, b: Point, n: usize) -> Result<Self> {
        let n = n.max(1);
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let pts = (0..=n)
            .map(|i| {
                let s = (2.0 * i as f64 - n as f64) / (2.0 * n as f64);
                [mid[0] + s * (b[0] - a[0]), mid[1] + s * (b[1] - a[1])]
            })
            .collect();
        Polyline::new(pts)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| crate::mesh::dist(w[0], w[1])).sum()
    }

    /// `λ · closed + (1 − λ) · open`, vertex by vertex.
    pub fn blend(closed: &Polyline, open: &Polyline, lambda: f64) -> Result<Polyline> {
        if closed.points.len() != open.points.len() {
            return Err(Error::DegenerateGeometry(
                "open and closed valve configurations differ in vertex count".into(),
            ));
        }
        let pts = closed
            .points
            .iter()
            .zip(&open.points)
            .map(|(c, o)| [lambda * c[0] + (1.0 - lambda) * o[0], lambda * c[1] + (1.0 - lambda) * o[1]])
            .collect();
        Polyline::new(pts)
    }

    /// Applies `f` to every vertex.
    pub fn map(&self, f: impl FnMut(Point) -> Point) -> Result<Polyline> {
        Polyline::new(self.points.iter().copied().map(f).collect())
    }

    pub fn project(&self, x: Point) -> Projection {
        let mut best = Projection {
            distance: f64::INFINITY,
            segment: 0,
            t: 0.0,
            cross: 0.0,
        };
        for (i, w) in self.points.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let r = [x[0] - a[0], x[1] - a[1]];
            let t = ((r[0] * d[0] + r[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            let e = [r[0] - t * d[0], r[1] - t * d[1]];
            let dist = e[0].hypot(e[1]);
            if dist < best.distance {
                best = Projection {
                    distance: dist,
                    segment: i,
                    t,
                    cross: d[0] * r[1] - d[1] * r[0],
                };
            }
        }
        best
    }

    /// Unsigned Euclidean distance.
    #[inline]
    pub fn distance(&self, x: Point) -> f64 {
        self.project(x).distance
    }

    /// Side of `x`; `None` on the line through the closest segment.
    pub fn side(&self, x: Point) -> Option<Side> {
        let c = self.project(x).cross;
        if c > 0.0 {
            Some(Side::Left)
        } else if c < 0.0 {
            Some(Side::Right)
        } else {
            None
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bent() -> Polyline {
        Polyline::new(vec![[-0.02, 0.0], [0.0, 0.004], [0.015, -0.003], [0.03, 0.001]]).unwrap()
    }

    #[test]
    fn on_surface_and_perpendicular_offset() {
        let s = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(s.distance([0.3, 0.0]), 0.0);
        assert!((s.distance([0.4, 0.25]) - 0.25).abs() < 1e-15);
        assert!((s.distance([1.3, 0.4]) - 0.5).abs() < 1e-15);
        assert_eq!(s.side([0.5, 0.1]), Some(Side::Left));
        assert_eq!(s.side([0.5, -0.1]), Some(Side::Right));
    }

    #[test]
    fn degenerate_segment_is_rejected() {
        assert!(Polyline::new(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(Polyline::new(vec![[0.0, 0.0]]).is_err());
        let a = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert!(Polyline::blend(&a, &b, 0.5).is_err());
    }

    #[test]
    fn symmetric_subdivision() {
        let s = Polyline::segment([-1.0, 0.0], [1.0, 0.0], 4).unwrap();
        let p = s.points();
        assert_eq!(p.len(), 5);
        for i in 0..5 {
            assert_eq!(p[i][0], -p[4 - i][0]);
        }
        assert_eq!(p[2], [0.0, 0.0]);
    }

    #[test]
    fn blend_endpoints() {
        let c = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let o = Polyline::new(vec![[0.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(Polyline::blend(&c, &o, 1.0).unwrap(), c);
        assert_eq!(Polyline::blend(&c, &o, 0.0).unwrap(), o);
        assert_eq!(Polyline::blend(&c, &o, 0.5).unwrap().points()[1], [0.5, 0.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_dense_sampling(x in -0.04f64..0.05, y in -0.02f64..0.02) {
            let s = bent();
            let d = s.distance([x, y]);
            prop_assume!(d > 1e-4);
            let n = 200_000;
            let mut best = f64::INFINITY;
            for w in s.points().windows(2) {
                for k in 0..=n {
                    let t = k as f64 / n as f64;
                    let p = [w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])];
                    best = best.min((x - p[0]).hypot(y - p[1]));
                }
            }
            prop_assert!((d - best).abs() <= 1e-8, "{} vs {}", d, best);
        }
    }
}
