use std::collections::{HashMap, HashSet};

use crate::scalar::{midpoint, Point, Scalar};

use super::{edge_key, BoundaryEdge, Mesh};

/// Upper bound on closure generations during one bisection sweep.
pub const MAX_CLOSURE_GENERATIONS: usize = 64;

impl<T: Scalar> Mesh<T> {
    /// Red refinement: every triangle is split into four similar children.
    /// New boundary midpoints on a disc are projected onto the circle.
    pub fn refine_uniform(&self) -> Mesh<T> {
        let boundary = self.boundary_lookup();
        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point<T>>| -> usize {
            *mids.entry(edge_key(a, b)).or_insert_with(|| {
                let mut p = midpoint(vertices[a], vertices[b]);
                if boundary.contains_key(&edge_key(a, b)) {
                    p = self.snap_boundary(p);
                }
                vertices.push(p);
                vertices.len() - 1
            })
        };

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut refinement_edge = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let m0 = mid(b, c, &mut vertices);
            let m1 = mid(c, a, &mut vertices);
            let m2 = mid(a, b, &mut vertices);
            // Corner children are homotheties of the parent and the middle
            // child a point reflection, so local numbering (and hence the
            // bisection edge index) carries over unchanged.
            for child in [[a, m2, m1], [m2, b, m0], [m1, m0, c], [m0, m1, m2]] {
                triangles.push(child);
                refinement_edge.push(self.refinement_edge[t]);
            }
        }
        let boundary = self
            .boundary
            .iter()
            .flat_map(|e| {
                let [a, b] = e.vertices;
                let m = mids[&edge_key(a, b)];
                [BoundaryEdge { vertices: [a, m], side: e.side }, BoundaryEdge { vertices: [m, b], side: e.side }]
            })
            .collect();
        Mesh::from_parts(vertices, triangles, refinement_edge, boundary, self.domain)
            .expect("red refinement preserves orientation")
    }

    /// Local refinement by newest-vertex bisection.
    ///
    /// Every triangle for which `mark(index, coords)` holds is bisected twice
    /// (all of its edges halve); neighbours receive the closure bisections
    /// required to keep the mesh conforming.
    pub fn refine_local<F>(&self, mut mark: F) -> Mesh<T>
    where
        F: FnMut(usize, [Point<T>; 3]) -> bool,
    {
        let marked: Vec<bool> = (0..self.num_triangles()).map(|t| mark(t, self.triangle_coords(t))).collect();
        if !marked.iter().any(|&m| m) {
            return self.clone();
        }
        let once = self.bisect_marked(&marked);
        assert!(once.closure_generations <= MAX_CLOSURE_GENERATIONS, "bisection closure exceeded {MAX_CLOSURE_GENERATIONS} generations");
        let again: Vec<bool> = once.parent.iter().map(|&p| marked[p]).collect();
        let twice = once.mesh.bisect_marked(&again);
        assert!(twice.closure_generations <= MAX_CLOSURE_GENERATIONS, "bisection closure exceeded {MAX_CLOSURE_GENERATIONS} generations");
        twice.mesh
    }

    /// One newest-vertex bisection of every marked triangle plus closure.
    pub fn bisect_marked(&self, marked: &[bool]) -> Bisection<T> {
        assert_eq!(marked.len(), self.num_triangles());
        let ref_key = |t: usize| {
            let tri = self.triangles[t];
            let k = self.refinement_edge[t] as usize;
            edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3])
        };

        let mut edge_triangles: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for key in [edge_key(a, b), edge_key(b, c), edge_key(c, a)] {
                edge_triangles.entry(key).or_default().push(t);
            }
        }

        let mut split: HashSet<(usize, usize)> = HashSet::new();
        let mut frontier: Vec<(usize, usize)> = Vec::new();
        for t in (0..self.num_triangles()).filter(|&t| marked[t]) {
            if split.insert(ref_key(t)) {
                frontier.push(ref_key(t));
            }
        }
        // Closure: a triangle with any split edge must split its bisection edge.
        let mut generations = 0usize;
        while !frontier.is_empty() {
            generations += 1;
            let mut next = Vec::new();
            for key in frontier {
                for &t in &edge_triangles[&key] {
                    let r = ref_key(t);
                    if split.insert(r) {
                        next.push(r);
                    }
                }
            }
            frontier = next;
        }

        let boundary = self.boundary_lookup();
        let mut vertices = self.vertices.clone();
        let mut keys: Vec<_> = split.into_iter().collect();
        keys.sort_unstable();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::with_capacity(keys.len());
        for key in keys {
            let mut p = midpoint(vertices[key.0], vertices[key.1]);
            if boundary.contains_key(&key) {
                p = self.snap_boundary(p);
            }
            vertices.push(p);
            mids.insert(key, vertices.len() - 1);
        }

        let mut triangles = Vec::with_capacity(self.num_triangles() + 2 * mids.len());
        let mut refinement_edge = Vec::with_capacity(triangles.capacity());
        let mut parent = Vec::with_capacity(triangles.capacity());
        for t in 0..self.num_triangles() {
            let start = triangles.len();
            bisect_recursive(self.triangles[t], self.refinement_edge[t], &mids, &mut triangles, &mut refinement_edge);
            parent.extend(std::iter::repeat(t).take(triangles.len() - start));
        }
        let boundary = self
            .boundary
            .iter()
            .flat_map(|e| {
                let [a, b] = e.vertices;
                match mids.get(&edge_key(a, b)) {
                    Some(&m) => vec![BoundaryEdge { vertices: [a, m], side: e.side }, BoundaryEdge { vertices: [m, b], side: e.side }],
                    None => vec![*e],
                }
            })
            .collect();
        let mesh = Mesh::from_parts(vertices, triangles, refinement_edge, boundary, self.domain)
            .expect("bisection preserves orientation");
        // The frontier loop counts one generation for the marked edges themselves.
        Bisection { mesh, parent, closure_generations: generations.saturating_sub(1) }
    }
}

/// Result of one bisection sweep.
#[derive(Debug, Clone)]
pub struct Bisection<T: Scalar> {
    pub mesh: Mesh<T>,
    /// Parent triangle of every new triangle.
    pub parent: Vec<usize>,
    /// Length of the longest closure chain.
    pub closure_generations: usize,
}

fn bisect_recursive(
    tri: [usize; 3],
    refine: u8,
    mids: &HashMap<(usize, usize), usize>,
    triangles: &mut Vec<[usize; 3]>,
    refinement_edge: &mut Vec<u8>,
) {
    let k = refine as usize;
    let (apex, q, s) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
    match mids.get(&edge_key(q, s)) {
        Some(&m) => {
            // Children keep counter-clockwise order; their bisection edge is
            // the one opposite the new vertex.
            bisect_recursive([apex, q, m], 2, mids, triangles, refinement_edge);
            bisect_recursive([m, s, apex], 0, mids, triangles, refinement_edge);
        }
        None => {
            triangles.push(tri);
            refinement_edge.push(refine);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{generate_disc_mesh, generate_rect_mesh, Side};
    use super::*;

    #[test]
    fn uniform_refinement_quadruples() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 1).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.num_triangles(), 8);
        assert_eq!(r.num_vertices(), m.num_vertices() + m.edges().len());
        r.check_conformity().unwrap();
        assert!((r.max_edge_length() - 0.5 * m.max_edge_length()).abs() < 1e-12);
        assert!((r.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_refinement_snaps_disc_boundary() {
        let m = generate_disc_mesh(1.0f64, 2, 6).unwrap().refine_uniform().refine_uniform();
        m.check_conformity().unwrap();
        for &v in &m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 4).unwrap();
        let r = m.refine_local(|_, _| false);
        assert_eq!((r.num_vertices(), r.num_triangles()), (m.num_vertices(), m.num_triangles()));
    }

    #[test]
    fn single_marked_triangle_stays_conforming() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 4).unwrap();
        let target = 2 * (4 + 1) + 1;
        let r = m.refine_local(|t, _| t == target);
        r.check_conformity().unwrap();
        assert!(r.num_vertices() > m.num_vertices());
        assert!((r.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_refinement_shrinks_edges_near_circle() {
        let m0 = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 8).unwrap();
        let h0 = m0.min_edge_length();
        let (c, r) = ([0.1, -0.05], 0.3);
        let near = |p: &[Point<f64>; 3], h: f64| {
            let d: Vec<f64> = p.iter().map(|q| (q[0] - c[0]).hypot(q[1] - c[1])).collect();
            let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let dmax = d.iter().cloned().fold(0.0, f64::max);
            dmin <= r + h && dmax >= r - h
        };
        let mut m = m0.clone();
        for _ in 0..3 {
            m = m.refine_local(|_, p| near(&p, h0));
            m.check_conformity().unwrap();
        }
        assert!((m.total_area() - 4.0).abs() < 1e-12);
        let mut shortest_near = f64::INFINITY;
        for (a, b) in m.edges() {
            let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            if ((mid[0] - c[0]).hypot(mid[1] - c[1]) - r).abs() < 0.1 {
                shortest_near = shortest_near.min((pa[0] - pb[0]).hypot(pa[1] - pb[1]));
            }
        }
        assert!(shortest_near <= h0 / 8.0 + 1e-12, "{shortest_near} vs {}", h0 / 8.0);
    }

    #[test]
    fn local_refinement_on_disc_snaps_and_inherits_markers() {
        let m = generate_disc_mesh(1.0f64, 2, 6).unwrap();
        let r = m.refine_local(|_, p| p.iter().any(|q| q[0] > 0.5));
        r.check_conformity().unwrap();
        assert!(r.boundary_edges().iter().all(|e| e.side == Side::Arc));
        for &v in &r.boundary_vertices() {
            let p = r.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bisection_parent_map_covers_children() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 2).unwrap();
        let marked: Vec<bool> = (0..m.num_triangles()).map(|t| t == 0).collect();
        let b = m.bisect_marked(&marked);
        let (r, parent) = (b.mesh, b.parent);
        assert!(b.closure_generations <= MAX_CLOSURE_GENERATIONS);
        assert_eq!(parent.len(), r.num_triangles());
        for t in 0..m.num_triangles() {
            let child_area: f64 = (0..r.num_triangles()).filter(|&c| parent[c] == t).map(|c| r.signed_area(c)).sum();
            assert!((child_area - m.signed_area(t)).abs() < 1e-14);
        }
    }
}
