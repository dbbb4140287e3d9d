//! Vector-valued P1 finite elements for the elasticity form
//! `a(u, v) = ∫ μ ∇u : ∇v + λ div u div v`.
//!
//! The stress is `σ = μ ∇u + λ (div u) I` with the full (not symmetrized)
//! displacement gradient. Degrees of freedom are vertex-major: vertex `v`
//! owns dofs `2v` (x component) and `2v + 1` (y component).

mod export;
pub mod quadrature;

use crate::error::{invalid, Result};
use crate::linalg::{SymSparseMatrix, TripletBuilder};
use crate::mesh::{Mesh, Side};
use crate::scalar::{Point, Scalar};

pub use export::{nodal_csv, vtk_legacy};
use quadrature::{TRI_DEG2, TRI_DEG4};

/// 2×2 tensor stored row-major: `g[c][d] = ∂u_c/∂x_d`.
pub type Tensor2<T> = [[T; 2]; 2];

/// P1 displacement space over a mesh, with optional Dirichlet constraints.
#[derive(Clone, Debug)]
pub struct FeSpace<'m, T: Scalar> {
    mesh: &'m Mesh<T>,
    prescribed: Vec<Option<T>>,
}

/// Nodal coefficient vector of a displacement field.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T>(pub Vec<T>);

impl<'m, T: Scalar> FeSpace<'m, T> {
    pub fn new(mesh: &'m Mesh<T>) -> Self {
        FeSpace { mesh, prescribed: vec![None; 2 * mesh.num_vertices()] }
    }

    pub fn mesh(&self) -> &'m Mesh<T> {
        self.mesh
    }

    pub fn num_dofs(&self) -> usize {
        self.prescribed.len()
    }

    #[inline]
    pub fn dof(vertex: usize, component: usize) -> usize {
        2 * vertex + component
    }

    /// Constrains boundary vertices. `boundary_fn(side, x)` is asked once per
    /// still-unconstrained boundary vertex (in boundary-edge order, so at a
    /// corner the first side that answers `Some` wins).
    pub fn with_dirichlet<F>(mut self, mut boundary_fn: F) -> Result<Self>
    where
        F: FnMut(Side, Point<T>) -> Option<Point<T>>,
    {
        for e in self.mesh.boundary_edges() {
            for &v in &e.vertices {
                if self.prescribed[2 * v].is_some() {
                    continue;
                }
                let x = self.mesh.vertices()[v];
                if let Some(g) = boundary_fn(e.side, x) {
                    if !(g[0].is_finite() && g[1].is_finite()) {
                        return Err(invalid(format!("non-finite Dirichlet value at vertex {v}")));
                    }
                    self.prescribed[2 * v] = Some(g[0]);
                    self.prescribed[2 * v + 1] = Some(g[1]);
                }
            }
        }
        Ok(self)
    }

    pub fn prescribed(&self, dof: usize) -> Option<T> {
        self.prescribed[dof]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.prescribed[dof].is_some()
    }

    pub fn num_constrained(&self) -> usize {
        self.prescribed.iter().filter(|p| p.is_some()).count()
    }

    /// Field equal to the prescribed values on constrained dofs, zero elsewhere.
    pub fn lifting(&self) -> Field<T> {
        Field(self.prescribed.iter().map(|p| p.unwrap_or_else(T::zero)).collect())
    }

    /// Nodal interpolant of a displacement function.
    pub fn interpolate(&self, f: impl Fn(Point<T>) -> Point<T>) -> Field<T> {
        let mut u = Vec::with_capacity(self.num_dofs());
        for &x in self.mesh.vertices() {
            let v = f(x);
            u.extend_from_slice(&v);
        }
        Field(u)
    }

    pub fn zero_field(&self) -> Field<T> {
        Field(vec![T::zero(); self.num_dofs()])
    }
}

impl<T: Scalar> Field<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Displacement vector at vertex `v`.
    #[inline]
    pub fn at(&self, v: usize) -> Point<T> {
        [self.0[2 * v], self.0[2 * v + 1]]
    }
}

/// Gradients of the three barycentric hat functions of triangle `t` and its
/// area.
pub fn hat_gradients<T: Scalar>(mesh: &Mesh<T>, t: usize) -> ([Point<T>; 3], T) {
    let [p0, p1, p2] = mesh.triangle_coords(t);
    let area = mesh.signed_area(t);
    let s = T::one() / (area + area);
    let g = [
        [(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s],
        [(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s],
        [(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s],
    ];
    (g, area)
}

/// Constant displacement gradient of `u` on triangle `t`.
pub fn field_gradient<T: Scalar>(mesh: &Mesh<T>, u: &Field<T>, t: usize) -> Tensor2<T> {
    let (g, _) = hat_gradients(mesh, t);
    let mut grad = [[T::zero(); 2]; 2];
    for (a, &v) in mesh.triangles()[t].iter().enumerate() {
        let uv = u.at(v);
        for c in 0..2 {
            for d in 0..2 {
                grad[c][d] += uv[c] * g[a][d];
            }
        }
    }
    grad
}

/// `σ = μ ∇u + λ (div u) I`.
pub fn stress<T: Scalar>(mu: T, lambda: T, grad: Tensor2<T>) -> Tensor2<T> {
    let div = grad[0][0] + grad[1][1];
    [[mu * grad[0][0] + lambda * div, mu * grad[0][1]], [mu * grad[1][0], mu * grad[1][1] + lambda * div]]
}

/// Global stiffness matrix before any constraint is applied.
pub fn assemble_stiffness<T: Scalar>(space: &FeSpace<'_, T>, mu: T, lambda: T) -> Result<SymSparseMatrix<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(invalid(format!("shear-like modulus must be positive, got {mu}")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(invalid(format!("volumetric modulus must be non-negative, got {lambda}")));
    }
    let mesh = space.mesh();
    let n = space.num_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, 36 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = hat_gradients(mesh, t);
        for a in 0..3 {
            for bb in 0..3 {
                let gg = g[a][0] * g[bb][0] + g[a][1] * g[bb][1];
                for c in 0..2 {
                    for d in 0..2 {
                        let mut k = lambda * g[a][c] * g[bb][d];
                        if c == d {
                            k += mu * gg;
                        }
                        b.add(2 * tri[a] + c, 2 * tri[bb] + d, area * k);
                    }
                }
            }
        }
    }
    b.into_symmetric()
}

/// Consistent load vector `(f, φ_i)` with the three-point degree-2 rule.
pub fn assemble_load<T: Scalar>(space: &FeSpace<'_, T>, f: impl Fn(Point<T>) -> Point<T>) -> Field<T> {
    let mesh = space.mesh();
    let mut out = vec![T::zero(); space.num_dofs()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_coords(t);
        let area = mesh.signed_area(t);
        for (l, w) in TRI_DEG2.iter() {
            let l = l.map(T::lit);
            let x = barycentric_point(&p, &l);
            let fx = f(x);
            let w = T::lit(*w) * area;
            for a in 0..3 {
                out[2 * tri[a]] += w * l[a] * fx[0];
                out[2 * tri[a] + 1] += w * l[a] * fx[1];
            }
        }
    }
    Field(out)
}

#[inline]
fn barycentric_point<T: Scalar>(p: &[Point<T>; 3], l: &[T; 3]) -> Point<T> {
    [l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0], l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1]]
}

/// Value of the P1 field at an arbitrary point of the mesh.
pub fn evaluate_field<T: Scalar>(space: &FeSpace<'_, T>, u: &Field<T>, x: Point<T>) -> Result<Point<T>> {
    let mesh = space.mesh();
    let loc = mesh.locate_point(x)?;
    let tri = mesh.triangles()[loc.triangle];
    let mut out = [T::zero(); 2];
    for a in 0..3 {
        let uv = u.at(tri[a]);
        out[0] += loc.barycentric[a] * uv[0];
        out[1] += loc.barycentric[a] * uv[1];
    }
    Ok(out)
}

/// `(‖u − u_h‖_L2, |u − u_h|_H1)` over the whole mesh, with the six-point
/// degree-4 rule. `exact_grad(x)[c][d] = ∂u_c/∂x_d`.
pub fn error_norms<T: Scalar>(
    space: &FeSpace<'_, T>,
    u_h: &Field<T>,
    exact: impl Fn(Point<T>) -> Point<T>,
    exact_grad: impl Fn(Point<T>) -> Tensor2<T>,
) -> (T, T) {
    let mesh = space.mesh();
    let (mut l2, mut h1) = (T::zero(), T::zero());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_coords(t);
        let area = mesh.signed_area(t);
        let gh = field_gradient(mesh, u_h, t);
        let nodal = [u_h.at(tri[0]), u_h.at(tri[1]), u_h.at(tri[2])];
        for (l, w) in TRI_DEG4.iter() {
            let l = l.map(T::lit);
            let x = barycentric_point(&p, &l);
            let w = T::lit(*w) * area;
            let ue = exact(x);
            let ge = exact_grad(x);
            for c in 0..2 {
                let uh = l[0] * nodal[0][c] + l[1] * nodal[1][c] + l[2] * nodal[2][c];
                let e = ue[c] - uh;
                l2 += w * e * e;
                for d in 0..2 {
                    let e = ge[c][d] - gh[c][d];
                    h1 += w * e * e;
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}
