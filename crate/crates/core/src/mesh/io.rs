//! Plain-text mesh format:
//!
//! ```text
//! vertices <n> triangles <m> edges <k>
//! x y                 (n lines, 17 significant digits)
//! i j k refedge       (m lines)
//! i j marker          (k lines)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::{Point, Scalar};

use super::{BoundaryEdge, Domain, Mesh, Side};

fn parse_err(line: usize, detail: impl Into<String>) -> Error {
    Error::Parse { line, detail: detail.into() }
}

impl<T: Scalar> Mesh<T> {
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "vertices {} triangles {} edges {}", self.num_vertices(), self.num_triangles(), self.boundary.len()).unwrap();
        for p in &self.vertices {
            writeln!(out, "{:.16e} {:.16e}", p[0].to_f64_lossy(), p[1].to_f64_lossy()).unwrap();
        }
        for (tri, r) in self.triangles.iter().zip(&self.refinement_edge) {
            writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], r).unwrap();
        }
        for e in &self.boundary {
            writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.side).unwrap();
        }
        out
    }

    /// Parses the output of [`Mesh::dump`]. The domain is inferred from the
    /// markers: all-`arc` boundaries are treated as an origin-centred disc.
    pub fn load(text: &str) -> Result<Mesh<T>> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 || h[0] != "vertices" || h[2] != "triangles" || h[4] != "edges" {
            return Err(parse_err(hline + 1, "expected `vertices <n> triangles <m> edges <k>`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(hline + 1, e.to_string()));
        let (nv, nt, ne) = (num(h[1])?, num(h[3])?, num(h[5])?);

        let mut vertices: Vec<Point<T>> = Vec::with_capacity(nv);
        let mut triangles = Vec::with_capacity(nt);
        let mut refinement_edge = Vec::with_capacity(nt);
        let mut boundary = Vec::with_capacity(ne);
        for _ in 0..nv {
            let (i, l) = lines.next().ok_or_else(|| parse_err(0, "missing vertex line"))?;
            let f: Vec<f64> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| parse_err(i + 1, e.to_string())))
                .collect::<Result<_>>()?;
            if f.len() != 2 {
                return Err(parse_err(i + 1, "vertex line needs two coordinates"));
            }
            vertices.push([T::lit(f[0]), T::lit(f[1])]);
        }
        for _ in 0..nt {
            let (i, l) = lines.next().ok_or_else(|| parse_err(0, "missing triangle line"))?;
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>().map_err(|e| parse_err(i + 1, e.to_string())))
                .collect::<Result<_>>()?;
            if f.len() != 4 || f[3] > 2 {
                return Err(parse_err(i + 1, "triangle line needs `i j k refedge`"));
            }
            triangles.push([f[0], f[1], f[2]]);
            refinement_edge.push(f[3] as u8);
        }
        for _ in 0..ne {
            let (i, l) = lines.next().ok_or_else(|| parse_err(0, "missing edge line"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(i + 1, "edge line needs `i j marker`"));
            }
            let a = f[0].parse::<usize>().map_err(|e| parse_err(i + 1, e.to_string()))?;
            let b = f[1].parse::<usize>().map_err(|e| parse_err(i + 1, e.to_string()))?;
            let side: Side = f[2].parse().map_err(|_| parse_err(i + 1, format!("unknown marker `{}`", f[2])))?;
            boundary.push(BoundaryEdge { vertices: [a, b], side });
        }
        if let Some((i, _)) = lines.next() {
            return Err(parse_err(i + 1, "trailing content"));
        }

        let domain = if !boundary.is_empty() && boundary.iter().all(|e: &BoundaryEdge| e.side == Side::Arc) {
            let radius = vertices.iter().map(|p| p[0].hypot(p[1])).fold(T::zero(), T::max);
            Domain::Disc { radius }
        } else {
            let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
            for p in &vertices {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            Domain::Rect { xmin: lo[0], xmax: hi[0], ymin: lo[1], ymax: hi[1] }
        };
        Mesh::from_parts(vertices, triangles, refinement_edge, boundary, domain)
    }
}
