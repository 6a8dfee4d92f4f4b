use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Boundary condition attached to a boundary edge (or a 1D endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Robin,
    Neumann,
    Dirichlet,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::Robin => "robin",
            BoundaryTag::Neumann => "neumann",
            BoundaryTag::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robin" => Ok(BoundaryTag::Robin),
            "neumann" => Ok(BoundaryTag::Neumann),
            "dirichlet" => Ok(BoundaryTag::Dirichlet),
            other => Err(Error::Parse(format!("unknown boundary tag `{other}`"))),
        }
    }
}

/// Built-in domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainId {
    UnitInterval,
    UnitSquare,
    LShape,
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainId::UnitInterval => "interval",
            DomainId::UnitSquare => "square",
            DomainId::LShape => "lshape",
        })
    }
}

impl FromStr for DomainId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" | "unit_interval" => Ok(DomainId::UnitInterval),
            "square" | "unit_square" => Ok(DomainId::UnitSquare),
            "lshape" | "l_shape" => Ok(DomainId::LShape),
            other => Err(Error::Parse(format!("unknown domain `{other}`"))),
        }
    }
}

/// Counterclockwise simple polygon with a boundary tag per side.
///
/// Side `j` runs from `vertices[j]` to `vertices[(j + 1) % n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
    pub boundary_tags: Vec<BoundaryTag>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>, boundary_tags: Vec<BoundaryTag>) -> Result<Self> {
        if vertices.len() < 3 || vertices.len() != boundary_tags.len() {
            return Err(Error::Mesh("polygon needs >= 3 vertices and one tag per side".into()));
        }
        let poly = Polygon {
            vertices,
            boundary_tags,
        };
        if poly.signed_area() <= 0.0 {
            return Err(Error::Mesh("polygon vertices must be counterclockwise".into()));
        }
        if poly.self_intersects() {
            return Err(Error::Mesh("polygon boundary self-intersects".into()));
        }
        Ok(poly)
    }

    pub fn unit_square() -> Self {
        Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            boundary_tags: vec![BoundaryTag::Robin; 4],
        }
    }

    /// `(-1,1)^2 \ (0,1)x(-1,0)`. With `neumann_at_reentrant`, the two sides
    /// meeting at the origin carry Neumann tags.
    pub fn l_shape(neumann_at_reentrant: bool) -> Self {
        let mut tags = vec![BoundaryTag::Robin; 6];
        if neumann_at_reentrant {
            // sides (0,-1)->(0,0) and (0,0)->(1,0)
            tags[1] = BoundaryTag::Neumann;
            tags[2] = BoundaryTag::Neumann;
        }
        Polygon {
            vertices: vec![
                [-1.0, -1.0],
                [0.0, -1.0],
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [-1.0, 1.0],
            ],
            boundary_tags: tags,
        }
    }

    pub fn builtin(id: DomainId, neumann_at_reentrant: bool) -> Result<Self> {
        match id {
            DomainId::UnitSquare => Ok(Self::unit_square()),
            DomainId::LShape => Ok(Self::l_shape(neumann_at_reentrant)),
            DomainId::UnitInterval => Err(Error::Unsupported("the unit interval is not a polygon".into())),
        }
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Interior angle at each vertex, in `(0, 2pi)`.
    pub fn corner_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                let a_in = (prev[1] - cur[1]).atan2(prev[0] - cur[0]);
                let a_out = (next[1] - cur[1]).atan2(next[0] - cur[0]);
                let mut ang = a_in - a_out;
                while ang <= 0.0 {
                    ang += 2.0 * std::f64::consts::PI;
                }
                while ang >= 2.0 * std::f64::consts::PI {
                    ang -= 2.0 * std::f64::consts::PI;
                }
                ang
            })
            .collect()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    /// Even-odd point-in-polygon test (points on the boundary are unspecified).
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Index of the polygon side containing segment `a`-`b`, if any.
    pub fn side_containing(&self, a: Point, b: Point, tol: f64) -> Option<usize> {
        let n = self.vertices.len();
        (0..n).find(|&i| {
            let s0 = self.vertices[i];
            let s1 = self.vertices[(i + 1) % n];
            on_segment(a, s0, s1, tol) && on_segment(b, s0, s1, tol)
        })
    }

    fn self_intersects(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn on_segment(p: Point, s0: Point, s1: Point, tol: f64) -> bool {
    let len = dist(s0, s1);
    if cross(s0, s1, p).abs() > tol * len {
        return false;
    }
    let t = ((p[0] - s0[0]) * (s1[0] - s0[0]) + (p[1] - s0[1]) * (s1[1] - s0[1])) / (len * len);
    t >= -tol && t <= 1.0 + tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_shape_geometry() {
        let l = Polygon::l_shape(true);
        assert!((l.area() - 3.0).abs() < 1e-15);
        let angles = l.corner_angles();
        assert!((angles[2] - 1.5 * std::f64::consts::PI).abs() < 1e-14);
        assert!((angles[0] - 0.5 * std::f64::consts::PI).abs() < 1e-14);
        assert!(l.contains([-0.5, 0.5]));
        assert!(!l.contains([0.5, -0.5]));
        assert_eq!(l.boundary_tags[1], BoundaryTag::Neumann);
        assert_eq!(l.boundary_tags[2], BoundaryTag::Neumann);
    }

    #[test]
    fn rejects_clockwise_and_bowtie() {
        let cw = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(Polygon::new(cw, vec![BoundaryTag::Robin; 4]).is_err());
        let bowtie = vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0], [2.0, 1.5]];
        assert!(Polygon::new(bowtie, vec![BoundaryTag::Robin; 4]).is_err());
    }

    #[test]
    fn tag_round_trip() {
        for t in [BoundaryTag::Robin, BoundaryTag::Neumann, BoundaryTag::Dirichlet] {
            assert_eq!(t.to_string().parse::<BoundaryTag>().unwrap(), t);
        }
    }
}
