//! The numerical studies: convergence against the axisymmetric solution,
//! multiplier mode content, effective moduli and compression sweeps.

use rlm_core::postprocess::{average_pressure, SideForces};
use rlm_core::{
    effective_bulk, effective_shear, error_norms, evaluate_field, mode_report, reconstruct_traction, AnalyticAxisym, ConvergenceRecord,
    Domain, EffectiveModuli, Inclusion64, Mesh64, ModeReport, Quadrature, SolveReport,
};

use crate::config::{DomainConfig, DomainKind, Refinement};
use crate::error::{ExpError, ExpResult};
use crate::pipeline::{base_mesh, build_mesh, effective_h, refine_band, Boundary, Material, Problem};

/// Numerical controls shared by the studies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numerics {
    pub quadrature: Quadrature,
    pub tol: f64,
    pub max_iter: usize,
    /// Band half-width factor for local refinement.
    pub band_factor: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { quadrature: Quadrature::Resolve, tol: 1e-10, max_iter: 500, band_factor: 1.0 }
    }
}

/// Inflated circle at the centre of a clamped disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisymSetup {
    pub outer_radius: f64,
    pub inclusion_radius: f64,
    pub ubar: f64,
    pub material: Material,
    pub modes: usize,
    /// Rings and innermost sectors of the base disc mesh.
    pub rings: usize,
    pub sectors: usize,
}

impl Default for AxisymSetup {
    fn default() -> Self {
        AxisymSetup {
            outer_radius: 1.0,
            inclusion_radius: 0.2,
            ubar: 0.1,
            material: Material { mu: 1.0, lambda: 1.0 },
            modes: 2,
            rings: 4,
            sectors: 6,
        }
    }
}

impl AxisymSetup {
    pub fn inclusion(&self) -> ExpResult<Inclusion64> {
        Ok(Inclusion64::new([0.0, 0.0], self.inclusion_radius, self.ubar, self.modes)?)
    }

    pub fn analytic(&self) -> ExpResult<AnalyticAxisym<f64>> {
        Ok(AnalyticAxisym::new(self.outer_radius, self.inclusion_radius, self.ubar)?)
    }

    pub fn base_mesh(&self) -> ExpResult<Mesh64> {
        let d = DomainConfig { kind: DomainKind::Disc, radius: self.outer_radius, ..DomainConfig::default() };
        base_mesh(&d, self.rings, self.sectors)
    }
}

/// One refinement level of a convergence run.
#[derive(Clone, Debug)]
pub struct LevelResult {
    pub record: ConvergenceRecord,
    /// Multipliers of the single inclusion.
    pub lambda: Vec<f64>,
    pub report: SolveReport,
    /// Reconstructed traction jump at θ = 0.
    pub traction0: [f64; 2],
    /// `|u_h|` sampled at 64 points on the circle.
    pub boundary_magnitudes: Vec<f64>,
    /// Radial displacement at `(0.5, 0)`.
    pub u_half: f64,
}

/// Solves the axisymmetric problem on a sequence of meshes. Level `k`
/// refines level `k − 1` uniformly and, for local refinement, adds one band
/// level around the circle, so the circle is resolved with `h²`.
pub fn convergence_study(setup: &AxisymSetup, levels: usize, refinement: Refinement, numerics: &Numerics) -> ExpResult<Vec<LevelResult>> {
    let inc = setup.inclusion()?;
    let exact = setup.analytic()?;
    let mut mesh = setup.base_mesh()?;
    let mut out = Vec::with_capacity(levels);
    for level in 1..=levels {
        mesh = mesh.refine_uniform();
        if refinement == Refinement::Local {
            mesh = refine_band(&mesh, &[inc], numerics.band_factor);
        }
        out.push(solve_axisym_level(setup, &mesh, level, &inc, &exact, numerics)?);
    }
    Ok(out)
}

fn solve_axisym_level(
    setup: &AxisymSetup,
    mesh: &Mesh64,
    level: usize,
    inc: &Inclusion64,
    exact: &AnalyticAxisym<f64>,
    numerics: &Numerics,
) -> ExpResult<LevelResult> {
    let mut problem = Problem::new(mesh, setup.material, &[*inc], numerics.quadrature, numerics.tol, numerics.max_iter)?;
    let s = problem.solve(Boundary::Zero)?;
    let (e_l2, e_h1) = error_norms(&s.space, &s.u, |x| exact.displacement(x), |x| exact.gradient(x));
    let record = ConvergenceRecord { level, ndof: s.space.num_dofs(), h: effective_h(mesh), e_l2, e_h1 };
    let boundary_magnitudes = (0..64)
        .map(|q| {
            let t = std::f64::consts::TAU * q as f64 / 64.0;
            evaluate_field(&s.space, &s.u, inc.point_at(t)).map(|u| u[0].hypot(u[1]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let u_half = evaluate_field(&s.space, &s.u, [0.5, 0.0])?[0];
    let traction0 = reconstruct_traction(inc, &s.lambda, 0.0);
    Ok(LevelResult { record, lambda: s.lambda, report: s.report, traction0, boundary_magnitudes, u_half })
}

/// Solves the inflated-inclusion problem on a clamped domain and reports
/// the multiplier energy per mode.
pub fn mode_study(mesh: &Mesh64, material: Material, inclusions: &[Inclusion64], numerics: &Numerics) -> ExpResult<(ModeReport, SolveReport)> {
    let mut problem = Problem::new(mesh, material, inclusions, numerics.quadrature, numerics.tol, numerics.max_iter)?;
    let s = problem.solve(Boundary::Zero)?;
    Ok((mode_report(inclusions, &s.lambda)?, s.report))
}

/// Side length used to normalize the shear force (the top edge).
pub fn top_length(domain: &Domain<f64>) -> ExpResult<f64> {
    match *domain {
        Domain::Rect { xmin, xmax, .. } => Ok(xmax - xmin),
        Domain::Disc { .. } => Err(ExpError::Config("effective moduli need a rectangular domain".into())),
    }
}

/// Area lost under the compression `u = −α x`: `|Ω| (1 − (1 − α)²)`.
pub fn area_reduction(domain: &Domain<f64>, alpha: f64) -> f64 {
    domain.area() * (1.0 - (1.0 - alpha) * (1.0 - alpha))
}

/// Compression and shear tests on one microstructure, sharing one
/// factorization.
pub fn effective_moduli(
    mesh: &Mesh64,
    material: Material,
    inclusions: &[Inclusion64],
    alpha: f64,
    numerics: &Numerics,
    placement: &str,
    seed: u64,
) -> ExpResult<EffectiveModuli> {
    let domain = *mesh.domain();
    let l = top_length(&domain)?;
    let mut problem = Problem::new(mesh, material, inclusions, numerics.quadrature, numerics.tol, numerics.max_iter)?;
    let c = problem.solve(Boundary::Compression(alpha))?;
    let compression = SideForces::compute(&c.space, &c.u, material.mu, material.lambda)?;
    let s = problem.solve(Boundary::Shear)?;
    let shear = SideForces::compute(&s.space, &s.u, material.mu, material.lambda)?;
    Ok(EffectiveModuli {
        vf: crate::placement::volume_fraction(&domain, inclusions),
        placement: placement.to_string(),
        seed,
        kappa_eff: effective_bulk(&compression, area_reduction(&domain, alpha))?,
        mu_eff: effective_shear(shear.top[0], l)?,
        compression,
        shear,
    })
}

/// One point of a compression sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub area_reduction: f64,
    pub pressure: f64,
}

/// Mean boundary pressure for each compression strain, with one
/// factorization for the whole sweep.
pub fn compression_sweep(mesh: &Mesh64, material: Material, inclusions: &[Inclusion64], alphas: &[f64], numerics: &Numerics) -> ExpResult<Vec<SweepPoint>> {
    let domain = *mesh.domain();
    let ([x0, y0], [x1, y1]) = domain.bounding_box();
    let perimeter = 2.0 * ((x1 - x0) + (y1 - y0));
    let mut problem = Problem::new(mesh, material, inclusions, numerics.quadrature, numerics.tol, numerics.max_iter)?;
    alphas
        .iter()
        .map(|&alpha| {
            let s = problem.solve(Boundary::Compression(alpha))?;
            let f = SideForces::compute(&s.space, &s.u, material.mu, material.lambda)?;
            Ok(SweepPoint { alpha, area_reduction: area_reduction(&domain, alpha), pressure: average_pressure(&f, perimeter)? })
        })
        .collect()
}

/// Mesh for a microstructure: uniform levels then band levels around every
/// inclusion.
pub fn microstructure_mesh(domain: &DomainConfig, base: usize, global: usize, local: usize, inclusions: &[Inclusion64], band_factor: f64) -> ExpResult<Mesh64> {
    Ok(build_mesh(base_mesh(domain, base, 6)?, global, local, inclusions, band_factor))
}

/// Four inflated circles placed symmetrically in a clamped square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourInclusionSetup {
    pub offset: f64,
    pub radius: f64,
    pub gbar: f64,
    pub modes: usize,
    pub material: Material,
    /// Subdivisions of the base square mesh.
    pub base: usize,
}

impl Default for FourInclusionSetup {
    fn default() -> Self {
        FourInclusionSetup { offset: 0.3, radius: 0.1, gbar: 0.1, modes: 2, material: Material { mu: 1.0, lambda: 1.0 }, base: 8 }
    }
}

impl FourInclusionSetup {
    pub fn inclusions(&self) -> ExpResult<Vec<Inclusion64>> {
        let a = self.offset;
        [[a, a], [-a, a], [a, -a], [-a, -a]]
            .into_iter()
            .map(|c| Ok(Inclusion64::new(c, self.radius, self.gbar, self.modes)?))
            .collect()
    }

    /// Base square mesh with `global` uniform levels then `local` band
    /// levels.
    pub fn mesh(&self, global: usize, local: usize, numerics: &Numerics) -> ExpResult<Mesh64> {
        let base = rlm_core::generate_rect_mesh(-1.0, 1.0, -1.0, 1.0, self.base)?;
        Ok(build_mesh(base, global, local, &self.inclusions()?, numerics.band_factor))
    }
}

/// Displacement magnitude samples of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrySample {
    pub ndof: usize,
    pub h: f64,
    /// L2 norm over the square of `|u_h|(x) − |u_h|(Rx)` with `R` the
    /// quarter turn, by the midpoint rule on a uniform grid.
    pub rotation_defect: f64,
    /// `(s, |u_h|)` along the diagonal from (−1, −1) to (1, 1), `s` the
    /// arc length.
    pub diagonal: Vec<(f64, f64)>,
}

/// Solves the four-inclusion problem and samples the magnitude.
pub fn symmetry_sample(
    setup: &FourInclusionSetup,
    global: usize,
    local: usize,
    numerics: &Numerics,
    grid: usize,
    profile_points: usize,
) -> ExpResult<SymmetrySample> {
    let mesh = setup.mesh(global, local, numerics)?;
    let incs = setup.inclusions()?;
    let mut problem = Problem::new(&mesh, setup.material, &incs, numerics.quadrature, numerics.tol, numerics.max_iter)?;
    let s = problem.solve(Boundary::Zero)?;
    let magnitude = |x: [f64; 2]| evaluate_field(&s.space, &s.u, x).map(|u| u[0].hypot(u[1]));
    let cell = 2.0 / grid as f64;
    let mut defect = 0.0;
    for j in 0..grid {
        for i in 0..grid {
            let x = [-1.0 + (i as f64 + 0.5) * cell, -1.0 + (j as f64 + 0.5) * cell];
            let d = magnitude(x)? - magnitude([-x[1], x[0]])?;
            defect += d * d * cell * cell;
        }
    }
    let diagonal = (0..profile_points)
        .map(|k| {
            let t = -1.0 + 2.0 * k as f64 / (profile_points - 1) as f64;
            Ok(((t + 1.0) * std::f64::consts::SQRT_2, magnitude([t, t])?))
        })
        .collect::<ExpResult<Vec<_>>>()?;
    Ok(SymmetrySample { ndof: s.space.num_dofs(), h: effective_h(&mesh), rotation_defect: defect.sqrt(), diagonal })
}

/// Largest profile deviation relative to the largest reference value.
pub fn relative_profile_error(profile: &[(f64, f64)], reference: &[(f64, f64)]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let dev = profile.iter().zip(reference).fold(0.0f64, |m, (p, r)| m.max((p.1 - r.1).abs()));
    dev / scale
}
