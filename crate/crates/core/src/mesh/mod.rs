//! Conforming triangulations of rectangles and discs.
//!
//! Meshes are immutable once built: refinement returns a new mesh. Triangles
//! are stored counter-clockwise and carry the local index of their
//! newest-vertex bisection edge. Local edge `k` of a triangle is the edge
//! opposite its vertex `k`.

mod generate;
mod io;
mod locate;
mod refine;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::scalar::{cross, dist, sub, Point, Scalar};

pub use generate::{generate_disc_mesh, generate_rect_mesh};
pub use locate::{Locator, PointLocation};
pub use refine::{Bisection, MAX_CLOSURE_GENERATIONS};

/// Boundary side marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
    Arc,
}

impl Side {
    pub const ALL: [Side; 5] = [Side::Left, Side::Right, Side::Bottom, Side::Top, Side::Arc];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
            Side::Arc => "arc",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Side::ALL
            .into_iter()
            .find(|side| side.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown side marker `{s}`")))
    }
}

/// A boundary edge, oriented so that the domain lies on its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: Side,
}

/// The continuous domain a mesh discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain<T> {
    Rect { xmin: T, xmax: T, ymin: T, ymax: T },
    /// Disc of the given radius centred at the origin.
    Disc { radius: T },
}

impl<T: Scalar> Domain<T> {
    pub fn square(half_width: T) -> Self {
        Domain::Rect { xmin: -half_width, xmax: half_width, ymin: -half_width, ymax: half_width }
    }

    pub fn area(&self) -> T {
        match *self {
            Domain::Rect { xmin, xmax, ymin, ymax } => (xmax - xmin) * (ymax - ymin),
            Domain::Disc { radius } => T::PI() * radius * radius,
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        match *self {
            Domain::Rect { xmin, xmax, ymin, ymax } => ([xmin, ymin], [xmax, ymax]),
            Domain::Disc { radius } => ([-radius, -radius], [radius, radius]),
        }
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn clearance(&self, p: Point<T>) -> T {
        match *self {
            Domain::Rect { xmin, xmax, ymin, ymax } => {
                (p[0] - xmin).min(xmax - p[0]).min(p[1] - ymin).min(ymax - p[1])
            }
            Domain::Disc { radius } => radius - p[0].hypot(p[1]),
        }
    }

    /// True when the closed disc `|x - center| <= r` lies strictly inside.
    pub fn contains_disc(&self, center: Point<T>, r: T) -> bool {
        self.clearance(center) > r
    }
}

/// Conforming triangulation with boundary markers and bisection data.
#[derive(Clone, Debug)]
pub struct Mesh<T: Scalar> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    boundary: Vec<BoundaryEdge>,
    domain: Domain<T>,
    locator: OnceLock<Locator<T>>,
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh from raw parts, checking orientation and index ranges.
    pub fn from_parts(
        vertices: Vec<Point<T>>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
        boundary: Vec<BoundaryEdge>,
        domain: Domain<T>,
    ) -> Result<Self> {
        if triangles.len() != refinement_edge.len() {
            return Err(invalid("refinement edge count differs from triangle count"));
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(invalid(format!("triangle {t} references a missing vertex")));
            }
            if refinement_edge[t] > 2 {
                return Err(invalid(format!("triangle {t} has refinement edge {}", refinement_edge[t])));
            }
        }
        if boundary.iter().any(|e| e.vertices.iter().any(|&v| v >= nv)) {
            return Err(invalid("boundary edge references a missing vertex"));
        }
        let mesh = Mesh { vertices, triangles, refinement_edge, boundary, domain, locator: OnceLock::new() };
        for t in 0..mesh.num_triangles() {
            if mesh.signed_area(t) <= T::zero() {
                return Err(invalid(format!("triangle {t} has non-positive signed area")));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [Point<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_coords(t);
        cross(sub(b, a), sub(c, a)) * T::lit(0.5)
    }

    pub fn total_area(&self) -> T {
        (0..self.num_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point<T> {
        let [a, b, c] = self.triangle_coords(t);
        let third = T::one() / T::lit(3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_coords(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// Each undirected edge once, as sorted vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [edge_key(a, b), edge_key(b, c), edge_key(c, a)])
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = T> + '_ {
        self.edges().into_iter().map(move |(a, b)| dist(self.vertices[a], self.vertices[b]))
    }

    pub fn max_edge_length(&self) -> T {
        self.edge_lengths().fold(T::zero(), T::max)
    }

    pub fn min_edge_length(&self) -> T {
        self.edge_lengths().fold(T::infinity(), T::min)
    }

    pub fn mean_edge_length(&self) -> T {
        let edges = self.edges();
        let total: T = edges.iter().map(|&(a, b)| dist(self.vertices[a], self.vertices[b])).sum();
        total / T::from_usize_lossy(edges.len().max(1))
    }

    /// Vertex indices that touch the boundary, sorted.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary.iter().flat_map(|e| e.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Checks orientation, edge-sharing counts and boundary closure.
    pub fn check_conformity(&self) -> Result<()> {
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *count.entry(edge_key(p, q)).or_insert(0) += 1;
            }
        }
        let mut marked: HashMap<(usize, usize), u32> = HashMap::new();
        for e in &self.boundary {
            *marked.entry(edge_key(e.vertices[0], e.vertices[1])).or_insert(0) += 1;
        }
        for (key, &n) in &count {
            let on_boundary = marked.get(key).copied().unwrap_or(0);
            match (n, on_boundary) {
                (2, 0) | (1, 1) => {}
                (1, 0) => return Err(invalid(format!("edge {key:?} is a hanging or unmarked boundary edge"))),
                _ => return Err(invalid(format!("edge {key:?} is shared by {n} triangles ({on_boundary} markers)"))),
            }
        }
        if marked.len() != self.boundary.len() || marked.keys().any(|k| !count.contains_key(k)) {
            return Err(invalid("boundary markers do not match triangle edges"));
        }
        // Every boundary vertex starts exactly one edge and ends exactly one.
        let mut degree: HashMap<usize, (u32, u32)> = HashMap::new();
        for e in &self.boundary {
            degree.entry(e.vertices[0]).or_default().0 += 1;
            degree.entry(e.vertices[1]).or_default().1 += 1;
        }
        if degree.values().any(|&d| d != (1, 1)) {
            return Err(invalid("boundary edges do not form closed polygons"));
        }
        for t in 0..self.num_triangles() {
            if self.signed_area(t) <= T::zero() {
                return Err(invalid(format!("triangle {t} is inverted or degenerate")));
            }
        }
        Ok(())
    }

    /// Cached background-grid point locator.
    pub fn locator(&self) -> &Locator<T> {
        self.locator.get_or_init(|| Locator::new(self))
    }

    pub fn locate_point(&self, p: Point<T>) -> Result<PointLocation<T>> {
        self.locator().locate(self, p)
    }

    /// Projects a new boundary vertex onto a curved boundary, if any.
    pub(crate) fn snap_boundary(&self, p: Point<T>) -> Point<T> {
        match self.domain {
            Domain::Disc { radius } => {
                let r = p[0].hypot(p[1]);
                if r > T::zero() {
                    [p[0] * radius / r, p[1] * radius / r]
                } else {
                    p
                }
            }
            Domain::Rect { .. } => p,
        }
    }

    pub(crate) fn boundary_lookup(&self) -> HashMap<(usize, usize), Side> {
        self.boundary.iter().map(|e| (edge_key(e.vertices[0], e.vertices[1]), e.side)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_markers_round_trip_through_strings() {
        for side in Side::ALL {
            assert_eq!(side.as_str().parse::<Side>().unwrap(), side);
        }
        assert!("north".parse::<Side>().is_err());
    }

    #[test]
    fn domain_clearance() {
        let sq = Domain::<f64>::square(1.0);
        assert_eq!(sq.area(), 4.0);
        assert!((sq.clearance([0.5, 0.0]) - 0.5).abs() < 1e-15);
        assert!(sq.contains_disc([0.0, 0.0], 0.9));
        assert!(!sq.contains_disc([0.95, 0.0], 0.1));
        let disc = Domain::<f64>::Disc { radius: 1.0 };
        assert!((disc.clearance([0.6, 0.0]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn from_parts_rejects_clockwise_triangles() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::<f64>::from_parts(verts, vec![[0, 2, 1]], vec![0], vec![], Domain::square(1.0));
        assert!(err.is_err());
    }
}
