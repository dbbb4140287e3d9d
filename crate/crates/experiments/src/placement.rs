//! Inclusion layouts: structured grids, jittered grids, random packings and
//! the two-density layout.
//!
//! Every layout keeps a clearance of `0.01 r` between circles and from the
//! domain boundary. Random layouts use ChaCha8 seeded with `seed`, so a seed
//! reproduces the same centres within a build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ExpError, ExpResult};
use rlm_core::{Domain, Inclusion64};

/// Relative clearance between circles and from the boundary.
pub const MARGIN: f64 = 0.01;

/// Radius and inflation of the two-density layout.
pub const TWO_DENSITY_RADIUS: f64 = 0.05;
pub const TWO_DENSITY_GBAR: f64 = 0.01;

/// Coordinates of the 4×4 outer lattice whose perimeter carries the twelve
/// outer inclusions of the two-density layout.
const OUTER_LATTICE: [f64; 4] = [-0.8, -0.8 / 3.0, 0.8 / 3.0, 0.8];

#[derive(Clone, Debug, PartialEq)]
pub struct PlacementResult {
    pub inclusions: Vec<Inclusion64>,
    /// Total inclusion area over domain area.
    pub vf: f64,
    /// Candidate centres drawn (equals the count for deterministic layouts).
    pub attempts: usize,
    pub seed: u64,
}

/// Fluid volume ratio `Σ π r_i² / |Ω|`.
pub fn volume_fraction(domain: &Domain<f64>, inclusions: &[Inclusion64]) -> f64 {
    inclusions.iter().fold(0.0, |s, i| s + i.area()) / domain.area()
}

fn finish(domain: &Domain<f64>, inclusions: Vec<Inclusion64>, attempts: usize, seed: u64) -> ExpResult<PlacementResult> {
    check_clearance(domain, &inclusions)?;
    rlm_core::validate_inclusions(domain, &inclusions)?;
    let vf = volume_fraction(domain, &inclusions);
    Ok(PlacementResult { inclusions, vf, attempts, seed })
}

/// Non-overlap and boundary clearance with the `0.01 r` margin.
pub fn check_clearance(domain: &Domain<f64>, inclusions: &[Inclusion64]) -> ExpResult<()> {
    for (j, a) in inclusions.iter().enumerate() {
        if domain.clearance(a.center) < a.radius * (1.0 + MARGIN) {
            return Err(ExpError::Placement(format!("inclusion {j} is too close to the boundary")));
        }
        for b in &inclusions[..j] {
            let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
            if d < a.radius + b.radius + MARGIN * a.radius.max(b.radius) {
                return Err(ExpError::Placement(format!("inclusion {j} overlaps another inclusion")));
            }
        }
    }
    Ok(())
}

/// Grid dimensions `(rows, cols)` for `m` inclusions: explicit, square, or
/// the most nearly square factorization with `rows ≤ cols`.
pub fn grid_dims(m: usize, rows: Option<usize>, cols: Option<usize>) -> ExpResult<(usize, usize)> {
    match (rows, cols) {
        (Some(r), Some(c)) if m == 0 || r * c == m => Ok((r, c)),
        (Some(r), Some(c)) => Err(ExpError::Placement(format!("{r}×{c} grid cannot hold {m} inclusions"))),
        (Some(r), None) if r > 0 && m % r == 0 => Ok((r, m / r)),
        (None, Some(c)) if c > 0 && m % c == 0 => Ok((m / c, c)),
        (None, None) if m > 0 => {
            let mut r = (m as f64).sqrt().floor() as usize;
            while m % r != 0 {
                r -= 1;
            }
            Ok((r, m / r))
        }
        _ => Err(ExpError::Placement(format!("no grid layout for {m} inclusions"))),
    }
}

fn grid_cells(domain: &Domain<f64>, rows: usize, cols: usize) -> Vec<([f64; 2], [f64; 2])> {
    let ([x0, y0], [x1, y1]) = domain.bounding_box();
    let (sx, sy) = ((x1 - x0) / cols as f64, (y1 - y0) / rows as f64);
    let mut cells = Vec::with_capacity(rows * cols);
    for j in 0..rows {
        for i in 0..cols {
            let lo = [x0 + i as f64 * sx, y0 + j as f64 * sy];
            cells.push((lo, [lo[0] + sx, lo[1] + sy]));
        }
    }
    cells
}

/// Centres of a uniform `rows × cols` grid of cells.
pub fn place_structured(domain: &Domain<f64>, rows: usize, cols: usize, radius: f64, gbar: f64, modes: usize) -> ExpResult<PlacementResult> {
    let mut inclusions = Vec::with_capacity(rows * cols);
    for (lo, hi) in grid_cells(domain, rows, cols) {
        let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        inclusions.push(Inclusion64::new(c, radius, gbar, modes)?);
    }
    finish(domain, inclusions, rows * cols, 0)
        .map_err(|e| ExpError::Placement(format!("{rows}×{cols} grid of radius {radius} does not fit: {e}")))
}

/// One inclusion per grid cell, uniformly placed in the cell shrunk by
/// `r (1 + 0.01)`.
pub fn place_semistructured(domain: &Domain<f64>, rows: usize, cols: usize, radius: f64, gbar: f64, modes: usize, seed: u64) -> ExpResult<PlacementResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = radius * (1.0 + MARGIN);
    let mut inclusions = Vec::with_capacity(rows * cols);
    for (lo, hi) in grid_cells(domain, rows, cols) {
        if hi[0] - lo[0] <= 2.0 * shrink || hi[1] - lo[1] <= 2.0 * shrink {
            return Err(ExpError::Placement(format!("grid cells are too small for radius {radius}")));
        }
        let c = [rng.gen_range(lo[0] + shrink..hi[0] - shrink), rng.gen_range(lo[1] + shrink..hi[1] - shrink)];
        inclusions.push(Inclusion64::new(c, radius, gbar, modes)?);
    }
    finish(domain, inclusions, rows * cols, seed)
}

/// Rejection sampling of `m` non-overlapping circles.
pub fn place_random(domain: &Domain<f64>, m: usize, radius: f64, gbar: f64, modes: usize, seed: u64, max_attempts: usize) -> ExpResult<PlacementResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ([x0, y0], [x1, y1]) = domain.bounding_box();
    let shrink = radius * (1.0 + MARGIN);
    if x1 - x0 <= 2.0 * shrink || y1 - y0 <= 2.0 * shrink {
        return Err(ExpError::Placement(format!("radius {radius} does not fit the domain")));
    }
    let min_dist = 2.0 * radius + MARGIN * radius;
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(m);
    let mut attempts = 0;
    while centers.len() < m {
        if attempts >= max_attempts {
            return Err(ExpError::Placement(format!("placed only {} of {m} inclusions in {max_attempts} attempts", centers.len())));
        }
        attempts += 1;
        let c = [rng.gen_range(x0 + shrink..x1 - shrink), rng.gen_range(y0 + shrink..y1 - shrink)];
        if domain.clearance(c) < shrink {
            continue;
        }
        if centers.iter().all(|p| (p[0] - c[0]).hypot(p[1] - c[1]) >= min_dist) {
            centers.push(c);
        }
    }
    let inclusions = centers.into_iter().map(|c| Inclusion64::new(c, radius, gbar, modes)).collect::<Result<Vec<_>, _>>()?;
    finish(domain, inclusions, attempts, seed)
}

/// Twelve outer inclusions on the perimeter of a 4×4 lattice plus a `k × k`
/// grid in the inner square `[−0.6, 0.6]²`; `m = 12 + k²`.
pub fn place_two_density(domain: &Domain<f64>, k: usize, gbar: f64, modes: usize) -> ExpResult<PlacementResult> {
    if ![3, 5, 7, 9, 11].contains(&k) {
        return Err(ExpError::Config(format!("two-density core grid must be 3, 5, 7, 9 or 11, got {k}")));
    }
    let r = TWO_DENSITY_RADIUS;
    let mut inclusions = Vec::with_capacity(12 + k * k);
    for (j, &y) in OUTER_LATTICE.iter().enumerate() {
        for (i, &x) in OUTER_LATTICE.iter().enumerate() {
            if i == 0 || j == 0 || i == 3 || j == 3 {
                inclusions.push(Inclusion64::new([x, y], r, gbar, modes)?);
            }
        }
    }
    let inner = Domain::Rect { xmin: -0.6, xmax: 0.6, ymin: -0.6, ymax: 0.6 };
    for (lo, hi) in grid_cells(&inner, k, k) {
        inclusions.push(Inclusion64::new([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])], r, gbar, modes)?);
    }
    let n = inclusions.len();
    finish(domain, inclusions, n, 0)
}
