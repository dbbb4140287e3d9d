use crate::error::{Error, Result};
use crate::scalar::{cross, sub, Point, Scalar};

use super::Mesh;

/// Containing triangle and barycentric coordinates of a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLocation<T> {
    pub triangle: usize,
    pub barycentric: [T; 3],
}

/// Uniform background grid whose cells list the triangles overlapping them.
///
/// The cell size follows the average triangle area, so the grid has about
/// as many cells as the mesh has triangles.
#[derive(Clone, Debug)]
pub struct Locator<T> {
    origin: Point<T>,
    cell: T,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<u32>,
}

const INSIDE_TOL: f64 = 1e-12;
const DOMAIN_TOL: f64 = 1e-10;

pub(crate) fn barycentric<T: Scalar>(tri: [Point<T>; 3], p: Point<T>) -> [T; 3] {
    let [a, b, c] = tri;
    let (v0, v1, v2) = (sub(b, a), sub(c, a), sub(p, a));
    let det = cross(v0, v1);
    let lb = cross(v2, v1) / det;
    let lc = cross(v0, v2) / det;
    [T::one() - lb - lc, lb, lc]
}

impl<T: Scalar> Locator<T> {
    pub fn new(mesh: &Mesh<T>) -> Self {
        let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        // Twice the size of an average triangle keeps the total bucket
        // occupancy proportional to the triangle count, even on strongly
        // graded meshes.
        let avg_area = mesh.total_area() / T::from_usize_lossy(mesh.num_triangles().max(1));
        let mut cell = (avg_area + avg_area).sqrt();
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        // Keep the grid to a sane size even for pathological meshes.
        let max_cells_per_axis = T::lit(4096.0);
        if !(cell > T::zero()) || extent / cell > max_cells_per_axis {
            cell = extent / max_cells_per_axis;
        }
        let count = |d: usize| ((hi[d] - lo[d]) / cell).floor().to_usize().unwrap_or(0) + 1;
        let (nx, ny) = (count(0), count(1));

        let cell_range = |tri: [Point<T>; 3]| {
            let mut r = [usize::MAX, 0, usize::MAX, 0];
            for p in tri {
                let i = Self::axis_index(lo[0], cell, nx, p[0]);
                let j = Self::axis_index(lo[1], cell, ny, p[1]);
                r = [r[0].min(i), r[1].max(i), r[2].min(j), r[3].max(j)];
            }
            r
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for t in 0..mesh.num_triangles() {
            let [i0, i1, j0, j1] = cell_range(mesh.triangle_coords(t));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    counts[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; start[nx * ny]];
        for t in 0..mesh.num_triangles() {
            let [i0, i1, j0, j1] = cell_range(mesh.triangle_coords(t));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let c = j * nx + i;
                    items[fill[c]] = t as u32;
                    fill[c] += 1;
                }
            }
        }
        Locator { origin: lo, cell, nx, ny, start, items }
    }

    fn axis_index(lo: T, cell: T, n: usize, x: T) -> usize {
        let k = ((x - lo) / cell).floor();
        if k < T::zero() {
            0
        } else {
            k.to_usize().unwrap_or(usize::MAX).min(n - 1)
        }
    }

    fn bucket(&self, i: usize, j: usize) -> &[u32] {
        let c = j * self.nx + i;
        &self.items[self.start[c]..self.start[c + 1]]
    }

    /// Finds the triangle containing `p`. Points on shared edges or vertices
    /// resolve to the lowest triangle index; points within `1e-10` outside the
    /// mesh are projected onto the nearest triangle.
    pub fn locate(&self, mesh: &Mesh<T>, p: Point<T>) -> Result<PointLocation<T>> {
        let outside = || Error::Location { x: p[0].to_f64_lossy(), y: p[1].to_f64_lossy() };
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(outside());
        }
        let i = Self::axis_index(self.origin[0], self.cell, self.nx, p[0]);
        let j = Self::axis_index(self.origin[1], self.cell, self.ny, p[1]);
        let tol = -T::lit(INSIDE_TOL);
        // Buckets list triangles in increasing index order.
        for &t in self.bucket(i, j) {
            let t = t as usize;
            let bary = barycentric(mesh.triangle_coords(t), p);
            if bary.iter().all(|&l| l >= tol) {
                return Ok(PointLocation { triangle: t, barycentric: bary });
            }
        }

        // Near-boundary fallback: best candidate among neighbouring cells.
        let mut best: Option<(T, usize, [T; 3])> = None;
        for jj in j.saturating_sub(1)..=(j + 1).min(self.ny - 1) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.nx - 1) {
                for &t in self.bucket(ii, jj) {
                    let t = t as usize;
                    let bary = barycentric(mesh.triangle_coords(t), p);
                    let worst = bary.iter().cloned().fold(T::infinity(), T::min);
                    if best.map_or(true, |(w, bt, _)| worst > w || (worst == w && t < bt)) {
                        best = Some((worst, t, bary));
                    }
                }
            }
        }
        let (_, t, bary) = best.ok_or_else(outside)?;
        let mut clamped = bary.map(|l| l.max(T::zero()));
        let total: T = clamped.iter().cloned().sum();
        clamped = clamped.map(|l| l / total);
        let tri = mesh.triangle_coords(t);
        let q = [
            clamped[0] * tri[0][0] + clamped[1] * tri[1][0] + clamped[2] * tri[2][0],
            clamped[0] * tri[0][1] + clamped[1] * tri[1][1] + clamped[2] * tri[2][1],
        ];
        if (q[0] - p[0]).hypot(q[1] - p[1]) <= T::lit(DOMAIN_TOL) {
            Ok(PointLocation { triangle: t, barycentric: clamped })
        } else {
            Err(outside())
        }
    }
}
