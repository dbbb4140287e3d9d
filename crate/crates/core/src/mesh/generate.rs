use crate::error::{invalid, Result};
use crate::scalar::{dist, Point, Scalar};

use super::{BoundaryEdge, Domain, Mesh, Side};

/// Structured `n x n` grid of the rectangle, each cell split along its
/// lower-left to upper-right diagonal.
pub fn generate_rect_mesh<T: Scalar>(xmin: T, xmax: T, ymin: T, ymax: T, n: usize) -> Result<Mesh<T>> {
    if !(xmin < xmax) || !(ymin < ymax) {
        return Err(invalid("rectangle bounds must satisfy min < max"));
    }
    if n == 0 {
        return Err(invalid("rectangle mesh needs at least one subdivision"));
    }
    let nf = T::from_usize_lossy(n);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // Exact endpoints; interior nodes by affine interpolation.
            let x = if i == n { xmax } else { xmin + (xmax - xmin) * T::from_usize_lossy(i) / nf };
            let y = if j == n { ymax } else { ymin + (ymax - ymin) * T::from_usize_lossy(j) / nf };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut refinement_edge = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            // The diagonal is the bisection edge of both halves.
            triangles.push([v00, v10, v11]);
            refinement_edge.push(1);
            triangles.push([v00, v11, v01]);
            refinement_edge.push(2);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push(BoundaryEdge { vertices: [id(i, 0), id(i + 1, 0)], side: Side::Bottom });
    }
    for j in 0..n {
        boundary.push(BoundaryEdge { vertices: [id(n, j), id(n, j + 1)], side: Side::Right });
    }
    for i in (0..n).rev() {
        boundary.push(BoundaryEdge { vertices: [id(i + 1, n), id(i, n)], side: Side::Top });
    }
    for j in (0..n).rev() {
        boundary.push(BoundaryEdge { vertices: [id(0, j + 1), id(0, j)], side: Side::Left });
    }
    Mesh::from_parts(vertices, triangles, refinement_edge, boundary, Domain::Rect { xmin, xmax, ymin, ymax })
}

/// Polar triangulation of the disc of radius `radius` centred at the origin.
///
/// Ring `j` (1-based) carries `n_sectors * j` equally spaced vertices at
/// radius `radius * j / n_rings`, which keeps the elements close to
/// equilateral; the innermost ring forms a fan of `n_sectors` triangles
/// around the centre.
pub fn generate_disc_mesh<T: Scalar>(radius: T, n_rings: usize, n_sectors: usize) -> Result<Mesh<T>> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(invalid("disc radius must be positive"));
    }
    if n_rings == 0 || n_sectors < 3 {
        return Err(invalid("disc mesh needs n_rings >= 1 and n_sectors >= 3"));
    }
    let two_pi = T::TAU();
    let mut vertices: Vec<Point<T>> = vec![[T::zero(), T::zero()]];
    let mut ring_start = vec![0usize];
    for j in 1..=n_rings {
        ring_start.push(vertices.len());
        let count = n_sectors * j;
        let r = if j == n_rings { radius } else { radius * T::from_usize_lossy(j) / T::from_usize_lossy(n_rings) };
        for k in 0..count {
            let theta = two_pi * T::from_usize_lossy(k) / T::from_usize_lossy(count);
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let ring = |j: usize, k: usize| -> usize {
        if j == 0 {
            0
        } else {
            let count = n_sectors * j;
            ring_start[j] + k % count
        }
    };

    let mut triangles = Vec::with_capacity(n_sectors * n_rings * n_rings);
    for k in 0..n_sectors {
        triangles.push([0, ring(1, k), ring(1, k + 1)]);
    }
    for j in 2..=n_rings {
        let inner = n_sectors * (j - 1);
        let outer = n_sectors * j;
        let (mut i, mut o) = (0usize, 0usize);
        while i < inner || o < outer {
            // Compare the angular position of the next inner and outer vertex
            // exactly in integers: (o+1)/outer <= (i+1)/inner.
            let advance_outer = i == inner || (o < outer && (o + 1) * inner <= (i + 1) * outer);
            if advance_outer {
                triangles.push([ring(j - 1, i), ring(j, o), ring(j, o + 1)]);
                o += 1;
            } else {
                triangles.push([ring(j - 1, i), ring(j, o), ring(j - 1, i + 1)]);
                i += 1;
            }
        }
    }

    let refinement_edge = triangles
        .iter()
        .map(|&[a, b, c]| {
            let len = [dist(vertices[b], vertices[c]), dist(vertices[c], vertices[a]), dist(vertices[a], vertices[b])];
            let mut best = 0u8;
            for k in 1..3u8 {
                if len[k as usize] > len[best as usize] * T::lit(1.0 + 1e-12) {
                    best = k;
                }
            }
            best
        })
        .collect();

    let count = n_sectors * n_rings;
    let boundary = (0..count)
        .map(|k| BoundaryEdge { vertices: [ring(n_rings, k), ring(n_rings, k + 1)], side: Side::Arc })
        .collect();
    Mesh::from_parts(vertices, triangles, refinement_edge, boundary, Domain::Disc { radius })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_square() {
        let m = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 1).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles(), m.boundary_edges().len()), (4, 2, 4));
        m.check_conformity().unwrap();
    }

    #[test]
    fn two_by_two_counts() {
        let m = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 2).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles()), (9, 8));
    }

    #[test]
    fn four_by_four_area() {
        let m = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 4).unwrap();
        assert!((m.total_area() - 4.0).abs() < 1e-12);
        m.check_conformity().unwrap();
    }

    #[test]
    fn rect_rejects_bad_input() {
        assert!(generate_rect_mesh(1.0f64, -1.0, -1.0, 1.0, 2).is_err());
        assert!(generate_rect_mesh(-1.0f64, 1.0, 0.0, 0.0, 2).is_err());
        assert!(generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 0).is_err());
        assert!(generate_rect_mesh(f64::NAN, 1.0, -1.0, 1.0, 2).is_err());
    }

    #[test]
    fn rect_side_markers_partition_boundary() {
        let n = 3;
        let m = generate_rect_mesh(0.0f64, 2.0, 0.0, 1.0, n).unwrap();
        for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
            let edges: Vec<_> = m.boundary_edges().iter().filter(|e| e.side == side).collect();
            assert_eq!(edges.len(), n);
            for e in edges {
                let [a, b] = e.vertices.map(|v| m.vertices()[v]);
                let ok = match side {
                    Side::Left => a[0] == 0.0 && b[0] == 0.0,
                    Side::Right => a[0] == 2.0 && b[0] == 2.0,
                    Side::Bottom => a[1] == 0.0 && b[1] == 0.0,
                    Side::Top => a[1] == 1.0 && b[1] == 1.0,
                    Side::Arc => false,
                };
                assert!(ok, "{side} edge {a:?}-{b:?}");
            }
        }
    }

    #[test]
    fn single_fan_disc() {
        let m = generate_disc_mesh(1.0f64, 1, 4).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles()), (5, 4));
        for &v in &m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-15);
        }
        m.check_conformity().unwrap();
    }

    #[test]
    fn disc_boundary_on_circle() {
        let m = generate_disc_mesh(1.0f64, 2, 8).unwrap();
        m.check_conformity().unwrap();
        assert_eq!(m.num_triangles(), 8 * 4);
        assert!(m.boundary_edges().iter().all(|e| e.side == Side::Arc));
        for &v in &m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn fine_disc_area_close_to_pi() {
        let m = generate_disc_mesh(1.0f64, 64, 64).unwrap();
        // The boundary is a regular polygon with 64*64 sides.
        let sides = 64.0 * 64.0;
        let polygon = 0.5 * sides * (std::f64::consts::TAU / sides).sin();
        assert!((m.total_area() - polygon).abs() < 1e-9);
        assert!((m.total_area() - std::f64::consts::PI).abs() / std::f64::consts::PI < 5e-3);
    }

    #[test]
    fn disc_rejects_bad_input() {
        assert!(generate_disc_mesh(0.0f64, 2, 8).is_err());
        assert!(generate_disc_mesh(1.0f64, 0, 8).is_err());
        assert!(generate_disc_mesh(1.0f64, 2, 2).is_err());
    }
}
