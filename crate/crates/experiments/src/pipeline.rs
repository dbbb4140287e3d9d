//! Mesh construction around inclusions and the assemble/solve pipeline.

use rlm_core::coupling::CouplingBlock;
use rlm_core::{
    assemble_load, assemble_stiffness, generate_disc_mesh, generate_rect_mesh, FeSpace, Field64, Inclusion64, Mesh64, Point, PrimalFactor,
    Quadrature, SaddleSystem64, SolveOptions, SolveReport,
};

use crate::config::{DomainConfig, DomainKind};
use crate::error::ExpResult;

/// Elastic moduli `μ`, `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
}

/// Dirichlet data on the whole outer boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// Clamped: `u = 0`.
    Zero,
    /// Uniform compression `u = −α x`.
    Compression(f64),
    /// Simple shear `u = (y, 0)`.
    Shear,
}

impl Boundary {
    pub fn value(&self, x: Point<f64>) -> Point<f64> {
        match *self {
            Boundary::Zero => [0.0, 0.0],
            Boundary::Compression(a) => [-a * x[0], -a * x[1]],
            Boundary::Shear => [x[1], 0.0],
        }
    }
}

/// Unrefined mesh of the configured domain.
pub fn base_mesh(domain: &DomainConfig, base: usize, sectors: usize) -> ExpResult<Mesh64> {
    Ok(match domain.kind {
        DomainKind::Rect => generate_rect_mesh(domain.xmin, domain.xmax, domain.ymin, domain.ymax, base)?,
        DomainKind::Disc => generate_disc_mesh(domain.radius, base, sectors)?,
    })
}

/// Range of distances from `c` to the points of a triangle.
fn distance_range(c: Point<f64>, tri: [Point<f64>; 3]) -> (f64, f64) {
    let d = |p: Point<f64>| (p[0] - c[0]).hypot(p[1] - c[1]);
    let max = d(tri[0]).max(d(tri[1])).max(d(tri[2]));
    let seg = |a: Point<f64>, b: Point<f64>| {
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let t = (((c[0] - a[0]) * ex + (c[1] - a[1]) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
        (a[0] + t * ex - c[0]).hypot(a[1] + t * ey - c[1])
    };
    let cross = |a: Point<f64>, b: Point<f64>| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let inside = cross(tri[0], tri[1]) >= 0.0 && cross(tri[1], tri[2]) >= 0.0 && cross(tri[2], tri[0]) >= 0.0;
    let min = if inside { 0.0 } else { seg(tri[0], tri[1]).min(seg(tri[1], tri[2])).min(seg(tri[2], tri[0])) };
    (min, max)
}

/// True when the triangle meets the band `| |x − c| − r | ≤ factor · diam`
/// around one of the circles.
pub fn in_band(tri: [Point<f64>; 3], inclusions: &[Inclusion64], factor: f64) -> bool {
    let d = |a: Point<f64>, b: Point<f64>| (a[0] - b[0]).hypot(a[1] - b[1]);
    let diam = d(tri[0], tri[1]).max(d(tri[1], tri[2])).max(d(tri[2], tri[0]));
    let w = factor * diam;
    inclusions.iter().any(|inc| {
        let (lo, hi) = distance_range(inc.center, tri);
        lo <= inc.radius + w && hi >= inc.radius - w
    })
}

/// One local refinement level: every triangle in the band is split so that
/// all its edges halve.
pub fn refine_band(mesh: &Mesh64, inclusions: &[Inclusion64], factor: f64) -> Mesh64 {
    mesh.refine_local(|_, tri| in_band(tri, inclusions, factor))
}

/// Base mesh, then `global` uniform levels, then `local` band levels.
pub fn build_mesh(base: Mesh64, global: usize, local: usize, inclusions: &[Inclusion64], factor: f64) -> Mesh64 {
    let mut mesh = base;
    for _ in 0..global {
        mesh = mesh.refine_uniform();
    }
    for _ in 0..local {
        mesh = refine_band(&mesh, inclusions, factor);
    }
    mesh
}

/// Effective mesh size `sqrt(|Ω| / #vertices)`.
pub fn effective_h(mesh: &Mesh64) -> f64 {
    (mesh.total_area() / mesh.num_vertices() as f64).sqrt()
}

/// Assembled and factorized system for one mesh, material and inclusion set.
/// Different Dirichlet data can be solved against the same factorization.
pub struct Problem<'m> {
    pub mesh: &'m Mesh64,
    pub material: Material,
    pub inclusions: Vec<Inclusion64>,
    pub block: CouplingBlock<f64>,
    system: SaddleSystem64,
    factor: PrimalFactor<f64>,
    options: SolveOptions<f64>,
}

/// Output of one solve.
#[derive(Clone, Debug)]
pub struct Solved<'m> {
    pub space: FeSpace<'m, f64>,
    pub u: Field64,
    pub lambda: Vec<f64>,
    pub report: SolveReport,
}

impl<'m> Problem<'m> {
    /// Assembles with the whole outer boundary constrained and factorizes.
    pub fn new(mesh: &'m Mesh64, material: Material, inclusions: &[Inclusion64], quadrature: Quadrature, tol: f64, max_iter: usize) -> ExpResult<Self> {
        rlm_core::validate_inclusions(mesh.domain(), inclusions)?;
        let space = FeSpace::new(mesh).with_dirichlet(|_, _| Some([0.0, 0.0]))?;
        let a = assemble_stiffness(&space, material.mu, material.lambda)?;
        let block = CouplingBlock::assemble(&space, inclusions, quadrature)?;
        let f = space.zero_field();
        let system = SaddleSystem64::new(&space, &a, &block, &f)?;
        let factor = system.factor()?;
        let options = SolveOptions { tol, max_iter, initial_guess: None };
        Ok(Problem { mesh, material, inclusions: inclusions.to_vec(), block, system, factor, options })
    }

    /// Solves with the given outer Dirichlet data, no body force, and the
    /// inclusions' normal inflation.
    pub fn solve(&mut self, boundary: Boundary) -> ExpResult<Solved<'m>> {
        self.solve_with_rhs(boundary, None)
    }

    /// As [`Problem::solve`] with an explicit constraint right-hand side
    /// (defaults to the normal inflation of each inclusion).
    pub fn solve_with_rhs(&mut self, boundary: Boundary, g: Option<&[f64]>) -> ExpResult<Solved<'m>> {
        let space = FeSpace::new(self.mesh).with_dirichlet(|_, x| Some(boundary.value(x)))?;
        let f = assemble_load(&space, |_| [0.0, 0.0]);
        self.system.set_rhs(&space, &f, g.unwrap_or(&self.block.rhs))?;
        let sol = self.system.solve(&self.factor, &self.options)?;
        Ok(Solved { space, u: sol.u, lambda: sol.lambda, report: sol.report })
    }

    pub fn system(&self) -> &SaddleSystem64 {
        &self.system
    }

    pub fn factor(&self) -> &PrimalFactor<f64> {
        &self.factor
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_ranges() {
        let tri = [[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]];
        let (lo, hi) = distance_range([0.0, 0.0], tri);
        assert!((lo - 1.0).abs() < 1e-15);
        assert!((hi - 2.0).abs() < 1e-15);
        let (lo, _) = distance_range([1.2, 0.2], tri);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn band_refinement_concentrates_near_circle() {
        let incs = [Inclusion64::new([0.0, 0.0], 0.5, 0.1, 2).unwrap()];
        let m = generate_rect_mesh(-1.0, 1.0, -1.0, 1.0, 8).unwrap();
        let r = refine_band(&m, &incs, 0.5);
        r.check_conformity().unwrap();
        let near = |t: usize| {
            let c = r.centroid(t);
            (c[0].hypot(c[1]) - 0.5).abs() < 0.05
        };
        let far = |t: usize| {
            let c = r.centroid(t);
            c[0].abs() > 0.9 && c[1].abs() > 0.9
        };
        let hmax_near = (0..r.num_triangles()).filter(|&t| near(t)).map(|t| r.diameter(t)).fold(0.0, f64::max);
        let hmin_far = (0..r.num_triangles()).filter(|&t| far(t)).map(|t| r.diameter(t)).fold(f64::INFINITY, f64::min);
        assert!(hmax_near <= 0.5 * m.max_edge_length() + 1e-12);
        assert!(hmin_far >= m.min_edge_length() - 1e-12);
    }

    #[test]
    fn pure_solid_affine_solves() {
        let m = generate_rect_mesh(-1.0, 1.0, -1.0, 1.0, 4).unwrap();
        let mut p = Problem::new(&m, Material { mu: 1.0, lambda: 1.0 }, &[], Quadrature::Default, 1e-10, 500).unwrap();
        let s = p.solve(Boundary::Shear).unwrap();
        for (v, x) in m.vertices().iter().enumerate() {
            assert!((s.u.at(v)[0] - x[1]).abs() < 1e-12);
        }
    }
}
