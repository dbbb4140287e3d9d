//! Circular inclusions and their reduced Fourier-mode coupling.
//!
//! Inclusion `j` with `N` modes contributes `2N` constraint rows, ordered
//! mode 1 x, mode 1 y, mode 2 x, mode 2 y, ... Row `(i, c)` is the averaged
//! boundary moment `(1/|Γ|) ∮_Γ φ_i u_c`, evaluated with the trapezoid rule
//! on `M` equally spaced points. Mode 0 (the circle mean) is excluded, so
//! every row annihilates rigid translations.

mod io;

use crate::error::{invalid, Error, Result};
use crate::fem::FeSpace;
use crate::linalg::{SparseRows, TripletBuilder};
use crate::mesh::Domain;
use crate::scalar::{dist, Point, Scalar};

pub use io::{inclusions_csv, parse_inclusions_csv};

/// Relative enlargement used when checking that an inclusion is interior.
const CONTAINMENT_SLACK: f64 = 1e-9;

/// Circle of radius `radius` around `center`, inflated normally by `gbar`
/// and resolved with `modes` Fourier modes per displacement component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inclusion<T> {
    pub center: Point<T>,
    pub radius: T,
    pub gbar: T,
    pub modes: usize,
}

impl<T: Scalar> Inclusion<T> {
    pub fn new(center: Point<T>, radius: T, gbar: T, modes: usize) -> Result<Self> {
        if !(center[0].is_finite() && center[1].is_finite() && gbar.is_finite()) {
            return Err(invalid("inclusion data must be finite"));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(invalid(format!("inclusion radius must be positive, got {radius}")));
        }
        if modes < 2 || modes % 2 != 0 {
            return Err(invalid(format!("mode count must be even and at least 2, got {modes}")));
        }
        Ok(Inclusion { center, radius, gbar, modes })
    }

    /// Circumference `|Γ|`.
    pub fn perimeter(&self) -> T {
        T::TAU() * self.radius
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    /// Number of multiplier unknowns (`2N`).
    pub fn num_rows(&self) -> usize {
        2 * self.modes
    }

    pub fn point_at(&self, theta: T) -> Point<T> {
        [self.center[0] + self.radius * theta.cos(), self.center[1] + self.radius * theta.sin()]
    }
}

/// Checks that every inclusion lies inside the domain and that no two
/// inclusions touch.
pub fn validate_inclusions<T: Scalar>(domain: &Domain<T>, inclusions: &[Inclusion<T>]) -> Result<()> {
    let slack = T::one() + T::lit(CONTAINMENT_SLACK);
    for (j, inc) in inclusions.iter().enumerate() {
        if !domain.contains_disc(inc.center, inc.radius * slack) {
            return Err(Error::Geometry { inclusion: j, detail: "circle is not strictly inside the domain".into() });
        }
        for (k, other) in inclusions.iter().enumerate().take(j) {
            if dist(inc.center, other.center) <= inc.radius + other.radius {
                return Err(Error::Geometry { inclusion: j, detail: format!("overlaps inclusion {k}") });
            }
        }
    }
    Ok(())
}

/// Mode `i` of the mean-square-one trigonometric basis:
/// `φ₀ = 1`, `φ_{2k+1} = √2 cos((k+1)θ)`, `φ_{2k+2} = √2 sin((k+1)θ)`.
pub fn fourier_mode<T: Scalar>(i: usize, theta: T) -> T {
    if i == 0 {
        return T::one();
    }
    let k = T::from_usize_lossy(i.div_ceil(2));
    let s = T::SQRT_2();
    if i % 2 == 1 {
        s * (k * theta).cos()
    } else {
        s * (k * theta).sin()
    }
}

/// Quadrature node on an inclusion circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirclePoint<T> {
    pub point: Point<T>,
    pub angle: T,
    pub weight: T,
}

/// Smallest admissible trapezoid point count for `modes` modes.
pub fn min_quadrature_points(modes: usize) -> usize {
    2 * modes + 2
}

/// Default trapezoid point count, `max(16, 8N)`.
pub fn default_quadrature_points(modes: usize) -> usize {
    16.max(8 * modes)
}

/// `M` equally spaced points `θ_q = phase + 2πq/M`, each weighted `2πr/M`.
pub fn circle_quadrature<T: Scalar>(inc: &Inclusion<T>, m: usize) -> Result<Vec<CirclePoint<T>>> {
    circle_quadrature_rotated(inc, m, T::zero())
}

/// [`circle_quadrature`] with the nodes rotated by `phase`.
pub fn circle_quadrature_rotated<T: Scalar>(inc: &Inclusion<T>, m: usize, phase: T) -> Result<Vec<CirclePoint<T>>> {
    if m < min_quadrature_points(inc.modes) {
        return Err(invalid(format!("{m} quadrature points cannot resolve {} modes (need at least {})", inc.modes, min_quadrature_points(inc.modes))));
    }
    let mf = T::from_usize_lossy(m);
    let weight = inc.perimeter() / mf;
    Ok((0..m)
        .map(|q| {
            let angle = phase + T::TAU() * T::from_usize_lossy(q) / mf;
            CirclePoint { point: inc.point_at(angle), angle, weight }
        })
        .collect())
}

/// How many trapezoid points each inclusion uses.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Quadrature {
    /// `max(16, 8N)` points.
    #[default]
    Default,
    /// A fixed count for every inclusion.
    Fixed(usize),
    /// At least the default, and enough points that consecutive nodes are no
    /// further apart than half the smallest local mesh size along the circle
    /// (rounded up to a multiple of four).
    Resolve,
}

impl Quadrature {
    /// Point count for inclusion `inc` on the space's mesh.
    pub fn points_for<T: Scalar>(&self, space: &FeSpace<'_, T>, inc: &Inclusion<T>) -> usize {
        match *self {
            Quadrature::Default => default_quadrature_points(inc.modes),
            Quadrature::Fixed(m) => m,
            Quadrature::Resolve => {
                let base = default_quadrature_points(inc.modes);
                let h = local_mesh_size(space, inc, 4 * base);
                let Some(h) = h else { return base };
                let needed = (T::lit(2.0) * inc.perimeter() / h).ceil().to_usize().unwrap_or(base);
                base.max(needed.div_ceil(4) * 4)
            }
        }
    }
}

/// Smallest edge length among triangles hit by `samples` circle points.
fn local_mesh_size<T: Scalar>(space: &FeSpace<'_, T>, inc: &Inclusion<T>, samples: usize) -> Option<T> {
    let mesh = space.mesh();
    let mut h: Option<T> = None;
    let mf = T::from_usize_lossy(samples);
    for q in 0..samples {
        let p = inc.point_at(T::TAU() * T::from_usize_lossy(q) / mf);
        if let Ok(loc) = mesh.locate_point(p) {
            let [a, b, c] = mesh.triangle_coords(loc.triangle);
            let e = dist(a, b).min(dist(b, c)).min(dist(c, a));
            h = Some(h.map_or(e, |x: T| x.min(e)));
        }
    }
    h
}

/// Constraint rows, right-hand side and per-inclusion row offsets.
#[derive(Clone, Debug)]
pub struct CouplingBlock<T> {
    pub rows: SparseRows<T>,
    pub rhs: Vec<T>,
    /// `offsets[j]..offsets[j + 1]` are the rows of inclusion `j`.
    pub offsets: Vec<usize>,
}

impl<T: Scalar> CouplingBlock<T> {
    /// Rows and normal-inflation right-hand side for a set of inclusions.
    pub fn assemble(space: &FeSpace<'_, T>, inclusions: &[Inclusion<T>], quadrature: Quadrature) -> Result<Self> {
        Ok(CouplingBlock {
            rows: assemble_coupling(space, inclusions, quadrature)?,
            rhs: assemble_reduced_rhs(inclusions),
            offsets: row_offsets(inclusions),
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// The slice of a stacked multiplier vector belonging to inclusion `j`.
    pub fn multipliers_of<'a>(&self, lambda: &'a [T], j: usize) -> &'a [T] {
        &lambda[self.offsets[j]..self.offsets[j + 1]]
    }
}

/// Row offsets of the stacked multiplier vector.
pub fn row_offsets<T: Scalar>(inclusions: &[Inclusion<T>]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(inclusions.len() + 1);
    offsets.push(0);
    for inc in inclusions {
        offsets.push(offsets.last().unwrap() + inc.num_rows());
    }
    offsets
}

/// Sparse constraint rows over all displacement dofs (constraints are not
/// applied here; see the saddle-point solver).
pub fn assemble_coupling<T: Scalar>(space: &FeSpace<'_, T>, inclusions: &[Inclusion<T>], quadrature: Quadrature) -> Result<SparseRows<T>> {
    let mesh = space.mesh();
    let offsets = row_offsets(inclusions);
    let mut b = TripletBuilder::new(*offsets.last().unwrap(), space.num_dofs());
    for (j, inc) in inclusions.iter().enumerate() {
        let m = quadrature.points_for(space, inc);
        let nodes = circle_quadrature(inc, m).map_err(|e| Error::Geometry { inclusion: j, detail: e.to_string() })?;
        let inv_perimeter = T::one() / inc.perimeter();
        for node in nodes {
            let loc = mesh.locate_point(node.point).map_err(|_| Error::Geometry {
                inclusion: j,
                detail: format!("quadrature point ({}, {}) lies outside the mesh", node.point[0], node.point[1]),
            })?;
            let tri = mesh.triangles()[loc.triangle];
            let w = node.weight * inv_perimeter;
            for i in 1..=inc.modes {
                let phi = w * fourier_mode(i, node.angle);
                let row = offsets[j] + 2 * (i - 1);
                for a in 0..3 {
                    let s = phi * loc.barycentric[a];
                    b.add(row, 2 * tri[a], s);
                    b.add(row + 1, 2 * tri[a] + 1, s);
                }
            }
        }
    }
    Ok(b.into_rows())
}

/// Right-hand side for normal inflation `g = ḡ n`: with the averaged,
/// mean-square-one scaling only mode 1 x and mode 2 y are nonzero, both
/// `ḡ/√2`.
pub fn assemble_reduced_rhs<T: Scalar>(inclusions: &[Inclusion<T>]) -> Vec<T> {
    let offsets = row_offsets(inclusions);
    let mut g = vec![T::zero(); *offsets.last().unwrap()];
    for (j, inc) in inclusions.iter().enumerate() {
        let v = inc.gbar * T::FRAC_1_SQRT_2();
        g[offsets[j]] = v;
        g[offsets[j] + 3] = v;
    }
    g
}

/// Averaged moments `(1/|Γ|) ∮ φ_i f_c` for `i = 1..=N` of a vector function
/// of the angle, by `m`-point trapezoid quadrature rotated by `phase`.
pub fn circle_moments<T: Scalar>(inc: &Inclusion<T>, m: usize, phase: T, f: impl Fn(T) -> Point<T>) -> Result<Vec<T>> {
    let nodes = circle_quadrature_rotated(inc, m, phase)?;
    let inv_m = T::one() / T::from_usize_lossy(m);
    let mut out = vec![T::zero(); inc.num_rows()];
    for node in nodes {
        let v = f(node.angle);
        for i in 1..=inc.modes {
            let phi = fourier_mode(i, node.angle) * inv_m;
            out[2 * (i - 1)] += phi * v[0];
            out[2 * (i - 1) + 1] += phi * v[1];
        }
    }
    Ok(out)
}

/// Right-hand side for general boundary data `g(j, θ)`. Data whose circle
/// mean is not zero is rejected: the mean cannot be enforced by modes ≥ 1.
pub fn assemble_reduced_rhs_with<T: Scalar>(inclusions: &[Inclusion<T>], g: impl Fn(usize, T) -> Point<T>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (j, inc) in inclusions.iter().enumerate() {
        let m = default_quadrature_points(inc.modes);
        let (mut mean, mut scale) = ([T::zero(); 2], T::zero());
        for node in circle_quadrature(inc, m)? {
            let v = g(j, node.angle);
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(invalid(format!("non-finite boundary data on inclusion {j}")));
            }
            mean[0] += v[0];
            mean[1] += v[1];
            scale = scale.max(v[0].abs()).max(v[1].abs());
        }
        let mf = T::from_usize_lossy(m);
        let tol = T::lit(1e3) * T::epsilon() * scale.max(T::min_positive_value());
        if (mean[0] / mf).abs() > tol || (mean[1] / mf).abs() > tol {
            return Err(invalid(format!("boundary data on inclusion {j} has a nonzero circle mean")));
        }
        out.extend(circle_moments(inc, m, T::zero(), |t| g(j, t))?);
    }
    Ok(out)
}

/// Traction jump `(1/(2πr)) Σ_i φ_i(θ) Λ_i` at angle `theta`.
pub fn reconstruct_traction<T: Scalar>(inc: &Inclusion<T>, lambda: &[T], theta: T) -> Point<T> {
    assert_eq!(lambda.len(), inc.num_rows(), "multiplier length must be 2N");
    let mut t = [T::zero(); 2];
    for i in 1..=inc.modes {
        let phi = fourier_mode(i, theta);
        t[0] += phi * lambda[2 * (i - 1)];
        t[1] += phi * lambda[2 * (i - 1) + 1];
    }
    let s = T::one() / inc.perimeter();
    [t[0] * s, t[1] * s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disc_mesh, generate_rect_mesh};
    use std::f64::consts::{PI, SQRT_2};

    fn inc(c: Point<f64>, r: f64, n: usize) -> Inclusion<f64> {
        Inclusion::new(c, r, 0.1, n).unwrap()
    }

    #[test]
    fn mode_values() {
        for t in [0.0, 0.3, 2.0, -1.0] {
            assert_eq!(fourier_mode(0, t), 1.0);
        }
        assert!(fourier_mode(1, PI / 2.0).abs() < 1e-15);
        assert!((fourier_mode(2, PI / 2.0) - SQRT_2).abs() < 1e-15);
        assert!((fourier_mode(3, 0.4) - SQRT_2 * 0.8f64.cos()).abs() < 1e-15);
        assert!((fourier_mode(4, 0.4) - SQRT_2 * 0.8f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn modes_are_orthonormal_under_trapezoid() {
        let m = 64;
        for i in 0..=8 {
            for j in 0..=8 {
                let s: f64 = (0..m).map(|q| {
                    let t = 2.0 * PI * q as f64 / m as f64;
                    fourier_mode(i, t) * fourier_mode(j, t)
                }).sum::<f64>() / m as f64;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() <= 1e-14, "({i},{j}) -> {s}");
            }
        }
    }

    #[test]
    fn four_point_quadrature() {
        let c = Inclusion::new([0.0, 0.0], 1.0, 0.0, 2).unwrap();
        assert!(circle_quadrature(&c, 4).is_err());
        let c1 = Inclusion { modes: 1, ..c };
        // modes = 1 is not constructible through `new`, but the rule itself
        // only needs M ≥ 2N + 2.
        let q = circle_quadrature(&c1, 4).unwrap();
        let expect: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (n, e) in q.iter().zip(expect) {
            assert!((n.point[0] - e[0]).abs() < 1e-15 && (n.point[1] - e[1]).abs() < 1e-15);
            assert!((n.weight - PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_weights_and_cos_squared() {
        let c = inc([0.1, -0.2], 0.3, 2);
        let q = circle_quadrature(&c, 16).unwrap();
        let total: f64 = q.iter().map(|n| n.weight).sum();
        assert!((total - 2.0 * PI * 0.3).abs() < 1e-14);
        let cos2: f64 = q.iter().map(|n| n.weight * n.angle.cos().powi(2)).sum();
        assert!((cos2 - PI * 0.3).abs() < 1e-13);
    }

    #[test]
    fn invalid_inclusions() {
        assert!(Inclusion::new([0.0, 0.0], 0.0, 0.1, 2).is_err());
        assert!(Inclusion::new([0.0, 0.0], 0.1, 0.1, 3).is_err());
        assert!(Inclusion::new([0.0, 0.0], 0.1, 0.1, 0).is_err());
        assert!(Inclusion::new([f64::NAN, 0.0], 0.1, 0.1, 2).is_err());
        let d = Domain::square(1.0);
        assert!(validate_inclusions(&d, &[inc([0.95, 0.0], 0.1, 2)]).is_err());
        assert!(validate_inclusions(&d, &[inc([0.0, 0.0], 0.1, 2), inc([0.15, 0.0], 0.1, 2)]).is_err());
        assert!(validate_inclusions(&d, &[inc([0.0, 0.0], 0.1, 2), inc([0.25, 0.0], 0.1, 2)]).is_ok());
    }

    #[test]
    fn reduced_rhs_normal_inflation() {
        let incs = [inc([0.0, 0.0], 0.2, 4), Inclusion::new([0.5, 0.5], 0.1, 0.0, 2).unwrap()];
        let g = assemble_reduced_rhs(&incs);
        assert_eq!(g.len(), 12);
        assert!((g[0] - 0.1 / SQRT_2).abs() < 1e-13);
        assert_eq!(g[1], 0.0);
        assert_eq!(g[2], 0.0);
        assert!((g[3] - 0.1 / SQRT_2).abs() < 1e-13);
        assert!(g[4..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn general_rhs_matches_normal_inflation_and_rejects_means() {
        let incs = [inc([0.0, 0.0], 0.2, 8)];
        let g = assemble_reduced_rhs_with(&incs, |_, t| [0.1 * t.cos(), 0.1 * t.sin()]).unwrap();
        let closed = assemble_reduced_rhs(&incs);
        for (a, b) in g.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(assemble_reduced_rhs_with(&incs, |_, t| [0.1 + t.cos(), 0.0]).is_err());
    }

    #[test]
    fn rows_annihilate_constants_and_pick_mode_one() {
        let m = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 16).unwrap();
        let s = FeSpace::new(&m);
        let c = inc([0.1, 0.05], 0.3, 4);
        let b = assemble_coupling(&s, &[c], Quadrature::Default).unwrap();
        assert_eq!(b.num_rows(), 8);
        let u = s.interpolate(|_| [0.7, -0.4]);
        assert!(b.mul_vec(u.as_slice()).iter().all(|v| v.abs() < 1e-12));

        // Linear fields are reproduced exactly by P1, so the trace is exact.
        let u = s.interpolate(|x| [(x[0] - 0.1) / 0.3, 0.0]);
        let bu = b.mul_vec(u.as_slice());
        assert!((bu[0] - 1.0 / SQRT_2).abs() < 1e-10);
        assert!(bu[2].abs() < 1e-10);
        assert!(bu[1].abs() < 1e-12);
    }

    #[test]
    fn point_outside_mesh_names_inclusion() {
        let m = generate_disc_mesh(1.0f64, 4, 6).unwrap();
        let s = FeSpace::new(&m);
        let bad = [inc([0.0, 0.0], 0.2, 2), inc([0.0, 0.0], 1.5, 2)];
        match assemble_coupling(&s, &bad, Quadrature::Default) {
            Err(Error::Geometry { inclusion, .. }) => assert_eq!(inclusion, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn resolved_quadrature_tracks_mesh_size() {
        let m = generate_rect_mesh(-1.0f64, 1.0, -1.0, 1.0, 8).unwrap();
        let fine = m.refine_uniform().refine_uniform();
        let c = inc([0.0, 0.0], 0.5, 2);
        let coarse_m = Quadrature::Resolve.points_for(&FeSpace::new(&m), &c);
        let fine_m = Quadrature::Resolve.points_for(&FeSpace::new(&fine), &c);
        assert!(coarse_m >= 16 && coarse_m % 4 == 0);
        assert!(fine_m >= 3 * coarse_m, "{coarse_m} -> {fine_m}");
    }

    #[test]
    fn traction_reconstruction() {
        let c = inc([0.0, 0.0], 0.2, 2);
        assert_eq!(reconstruct_traction(&c, &[0.0; 4], 1.0), [0.0, 0.0]);
        // Uniform radial traction t_r: Λ = (2πr t_r/√2) on mode 1 x and mode 2 y.
        let tr = -2.083333333333333;
        let l = 2.0 * PI * 0.2 * tr / SQRT_2;
        for th in [0.0, 0.7, 2.5] {
            let t = reconstruct_traction(&c, &[l, 0.0, 0.0, l], th);
            assert!((t[0] - tr * th.cos()).abs() < 1e-12 && (t[1] - tr * th.sin()).abs() < 1e-12);
        }
    }
}
