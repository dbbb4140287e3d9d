//! Reference solutions, convergence rates, boundary force integrals,
//! effective moduli and multiplier mode reports.

use std::collections::HashMap;
use std::fmt::Write;

use crate::coupling::{row_offsets, Inclusion};
use crate::error::{invalid, Result};
use crate::fem::{field_gradient, stress, FeSpace, Field, Tensor2};
use crate::mesh::Side;
use crate::scalar::{Point, Scalar};

/// Radially inflated circle of radius `r` at the centre of a clamped disc of
/// radius `R`: `u_r(ρ) = c₂ ρ + c₁/ρ` outside, and the linear field
/// `(ū/r) x` inside the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticAxisym<T> {
    pub outer_radius: T,
    pub inclusion_radius: T,
    pub ubar: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Scalar> AnalyticAxisym<T> {
    pub fn new(outer_radius: T, inclusion_radius: T, ubar: T) -> Result<Self> {
        if !(inclusion_radius > T::zero() && outer_radius > inclusion_radius) || !ubar.is_finite() {
            return Err(invalid("need R > r > 0 and a finite boundary datum"));
        }
        let (big, r) = (outer_radius, inclusion_radius);
        let den = big * big - r * r;
        Ok(AnalyticAxisym { outer_radius, inclusion_radius, ubar, c1: r * ubar * big * big / den, c2: -r * ubar / den })
    }

    /// Radial displacement at distance `rho` from the centre.
    pub fn radial(&self, rho: T) -> T {
        if rho < self.inclusion_radius {
            self.ubar * rho / self.inclusion_radius
        } else {
            self.c2 * rho + self.c1 / rho
        }
    }

    pub fn displacement(&self, x: Point<T>) -> Point<T> {
        let s = self.scale(x[0] * x[0] + x[1] * x[1]);
        [s * x[0], s * x[1]]
    }

    /// `u = s(ρ) x` with `s = u_r/ρ`.
    fn scale(&self, rho2: T) -> T {
        if rho2 < self.inclusion_radius * self.inclusion_radius {
            self.ubar / self.inclusion_radius
        } else {
            self.c2 + self.c1 / rho2
        }
    }

    /// `∂u_c/∂x_d`.
    pub fn gradient(&self, x: Point<T>) -> Tensor2<T> {
        let rho2 = x[0] * x[0] + x[1] * x[1];
        let s = self.scale(rho2);
        if rho2 < self.inclusion_radius * self.inclusion_radius {
            return [[s, T::zero()], [T::zero(), s]];
        }
        let k = (self.c1 + self.c1) / (rho2 * rho2);
        [[s - k * x[0] * x[0], -k * x[0] * x[1]], [-k * x[1] * x[0], s - k * x[1] * x[1]]]
    }

    /// Radial traction jump `σ_rr(outside) − σ_rr(inside)` across the circle.
    pub fn traction_jump(&self, mu: T, lambda: T) -> T {
        let r = self.inclusion_radius;
        let two = T::lit(2.0);
        let outside = mu * (self.c2 - self.c1 / (r * r)) + two * lambda * self.c2;
        let inside_s = self.ubar / r;
        let inside = mu * inside_s + two * lambda * inside_s;
        outside - inside
    }
}

/// Errors of one refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub ndof: usize,
    pub h: f64,
    pub e_l2: f64,
    pub e_h1: f64,
}

/// Observed orders `(L2, H1)` between consecutive records; `None` marks an
/// undefined rate (a zero or non-finite error).
pub fn eoc(records: &[ConvergenceRecord]) -> Result<Vec<(Option<f64>, Option<f64>)>> {
    if records.len() < 2 {
        return Err(invalid("convergence rates need at least two levels"));
    }
    let rate = |a: f64, b: f64, ha: f64, hb: f64| {
        let r = (a / b).ln() / (ha / hb).ln();
        (a > 0.0 && b > 0.0 && r.is_finite()).then_some(r)
    };
    records
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if !(b.h < a.h && b.h > 0.0) {
                return Err(invalid("mesh sizes must be strictly decreasing and positive"));
            }
            Ok((rate(a.e_l2, b.e_l2, a.h, b.h), rate(a.e_h1, b.e_h1, a.h, b.h)))
        })
        .collect()
}

/// Table `level,ndof,h,eL2,eH1,rateL2,rateH1`; rates of the first level and
/// undefined rates are written as `nan`.
pub fn convergence_csv(records: &[ConvergenceRecord]) -> Result<String> {
    let rates = if records.len() >= 2 { eoc(records)? } else { Vec::new() };
    let fmt_rate = |r: Option<f64>| r.map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"));
    let mut out = String::from("level,ndof,h,eL2,eH1,rateL2,rateH1\n");
    for (k, r) in records.iter().enumerate() {
        let (rl, rh) = if k == 0 { (None, None) } else { rates[k - 1] };
        writeln!(out, "{},{},{:.9e},{:.9e},{:.9e},{},{}", r.level, r.ndof, r.h, r.e_l2, r.e_h1, fmt_rate(rl), fmt_rate(rh)).unwrap();
    }
    Ok(out)
}

/// `∫_side σ(u_h) n ds`, edge by edge with the constant stress of the
/// adjacent triangle and the outward normal.
pub fn boundary_stress_integral<T: Scalar>(space: &FeSpace<'_, T>, u: &Field<T>, mu: T, lambda: T, side: Side) -> Result<Point<T>> {
    let mesh = space.mesh();
    let edges: Vec<_> = mesh.boundary_edges().iter().filter(|e| e.side == side).collect();
    if edges.is_empty() {
        return Err(invalid(format!("mesh has no boundary edges marked `{side}`")));
    }
    let mut owner = HashMap::with_capacity(2 * edges.len());
    for e in &edges {
        owner.insert((e.vertices[0], e.vertices[1]), usize::MAX);
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            // Counter-clockwise triangles traverse boundary edges with the
            // domain on the left, matching the boundary orientation.
            if let Some(slot) = owner.get_mut(&(tri[k], tri[(k + 1) % 3])) {
                *slot = t;
            }
        }
    }
    let mut force = [T::zero(); 2];
    for e in edges {
        let t = owner[&(e.vertices[0], e.vertices[1])];
        if t == usize::MAX {
            return Err(invalid("boundary edge has no adjacent triangle"));
        }
        let s = stress(mu, lambda, field_gradient(mesh, u, t));
        let a = mesh.vertices()[e.vertices[0]];
        let b = mesh.vertices()[e.vertices[1]];
        // Outward normal times length: the tangent rotated clockwise.
        let n = [b[1] - a[1], a[0] - b[0]];
        force[0] += s[0][0] * n[0] + s[0][1] * n[1];
        force[1] += s[1][0] * n[0] + s[1][1] * n[1];
    }
    Ok(force)
}

/// Force integrals over the four sides of a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SideForces {
    pub left: Point<f64>,
    pub right: Point<f64>,
    pub bottom: Point<f64>,
    pub top: Point<f64>,
}

impl SideForces {
    pub fn compute<T: Scalar>(space: &FeSpace<'_, T>, u: &Field<T>, mu: T, lambda: T) -> Result<Self> {
        let f = |side| boundary_stress_integral(space, u, mu, lambda, side).map(|p| [p[0].to_f64_lossy(), p[1].to_f64_lossy()]);
        Ok(SideForces { left: f(Side::Left)?, right: f(Side::Right)?, bottom: f(Side::Bottom)?, top: f(Side::Top)? })
    }

    /// Sum of the magnitudes of the four normal force components.
    pub fn total_normal(&self) -> f64 {
        self.left[0].abs() + self.right[0].abs() + self.bottom[1].abs() + self.top[1].abs()
    }

    pub fn as_array(&self) -> [Point<f64>; 4] {
        [self.left, self.right, self.bottom, self.top]
    }
}

/// `κ_eff = (Σ_sides |normal force|) / |ΔA|`.
pub fn effective_bulk(forces: &SideForces, area_reduction: f64) -> Result<f64> {
    if area_reduction == 0.0 || !area_reduction.is_finite() {
        return Err(invalid("area reduction must be nonzero"));
    }
    Ok(forces.total_normal() / area_reduction.abs())
}

/// `μ_eff = |F_x(top)| / l`.
pub fn effective_shear(top_fx: f64, length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(invalid("edge length must be positive"));
    }
    Ok(top_fx.abs() / length)
}

/// Mean normal boundary pressure: `Σ_sides |normal force| / perimeter`.
pub fn average_pressure(forces: &SideForces, perimeter: f64) -> Result<f64> {
    if !(perimeter > 0.0) {
        return Err(invalid("perimeter must be positive"));
    }
    Ok(forces.total_normal() / perimeter)
}

/// Effective stiffness of one microstructure sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModuli {
    pub vf: f64,
    pub placement: String,
    pub seed: u64,
    pub kappa_eff: f64,
    pub mu_eff: f64,
    /// Compression-test forces on left, right, bottom and top.
    pub compression: SideForces,
    /// Shear-test forces on left, right, bottom and top.
    pub shear: SideForces,
}

impl EffectiveModuli {
    pub const CSV_HEADER: &'static str =
        "vf,placement,seed,kappa_eff,mu_eff,F0x,F0y,F1x,F1y,F2x,F2y,F3x,F3y,S0x,S0y,S1x,S1y,S2x,S2y,S3x,S3y";

    pub fn csv_row(&self) -> String {
        let mut out = format!("{:.12e},{},{},{:.12e},{:.12e}", self.vf, self.placement, self.seed, self.kappa_eff, self.mu_eff);
        for f in self.compression.as_array().iter().chain(self.shear.as_array().iter()) {
            write!(out, ",{:.12e},{:.12e}", f[0], f[1]).unwrap();
        }
        out
    }
}

/// Multiplier energy distribution of one inclusion.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeEntry {
    pub inclusion: usize,
    pub radius: f64,
    pub modes: usize,
    pub lambda_norm: f64,
    /// `|Λ_k|² / ‖Λ‖²` per entry; `None` when `‖Λ‖ = 0`.
    pub relative: Option<Vec<f64>>,
}

impl ModeEntry {
    pub fn rel_m1x(&self) -> Option<f64> {
        self.relative.as_ref().map(|r| r[0])
    }

    pub fn rel_m2y(&self) -> Option<f64> {
        self.relative.as_ref().map(|r| r[3])
    }

    /// `1 − (|Λ₁ₓ|² + |Λ₂ᵧ|²)/‖Λ‖²`, clamped to `[0, 1]`.
    pub fn trunc_error(&self) -> Option<f64> {
        Some((1.0 - self.rel_m1x()? - self.rel_m2y()?).clamp(0.0, 1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeReport {
    pub entries: Vec<ModeEntry>,
}

impl ModeReport {
    pub const CSV_HEADER: &'static str = "inclusion,ri,modes,lambda_norm,rel_m1x,rel_m2y,trunc_error";

    pub fn csv_body(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.9e}"));
        let mut out = String::new();
        for e in &self.entries {
            writeln!(out, "{},{},{},{:.9e},{},{},{}", e.inclusion, e.radius, e.modes, e.lambda_norm, opt(e.rel_m1x()), opt(e.rel_m2y()), opt(e.trunc_error())).unwrap();
        }
        out
    }
}

/// Splits stacked multipliers per inclusion and reports their energies.
pub fn mode_report<T: Scalar>(inclusions: &[Inclusion<T>], lambda: &[T]) -> Result<ModeReport> {
    let offsets = row_offsets(inclusions);
    if *offsets.last().unwrap() != lambda.len() {
        return Err(invalid("multiplier vector does not match the inclusion set"));
    }
    let entries = inclusions
        .iter()
        .enumerate()
        .map(|(j, inc)| {
            let l: Vec<f64> = lambda[offsets[j]..offsets[j + 1]].iter().map(|v| v.to_f64_lossy()).collect();
            let n2: f64 = l.iter().map(|v| v * v).sum();
            let relative = (n2 > 0.0).then(|| l.iter().map(|v| v * v / n2).collect());
            ModeEntry { inclusion: j, radius: inc.radius.to_f64_lossy(), modes: inc.modes, lambda_norm: n2.sqrt(), relative }
        })
        .collect();
    Ok(ModeReport { entries })
}
