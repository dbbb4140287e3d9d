//! Acceptance run: one PASS/FAIL line per criterion, then a non-zero exit
//! if any criterion failed.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rlm_core::coupling::{CouplingBlock, Quadrature};
use rlm_core::{
    assemble_coupling, assemble_load, assemble_stiffness, eoc, fourier_mode, generate_rect_mesh, FeSpace, Inclusion64, Mesh64, SaddleSystem,
    SolveOptions,
};
use rlm_experiments::config::{DomainConfig, Refinement};
use rlm_experiments::pipeline::Material;
use rlm_experiments::placement::{place_random, place_semistructured, place_structured, place_two_density};
use rlm_experiments::studies::{
    compression_sweep, convergence_study, effective_moduli, microstructure_mesh, mode_study, relative_profile_error, symmetry_sample,
    AxisymSetup, FourInclusionSetup, LevelResult, Numerics,
};
use rlm_experiments::{run_experiment, Command, ExpResult, ExperimentConfig};

const UNIT: Material = Material { mu: 1.0, lambda: 1.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> ExpResult<Outcome> {
    Ok(Outcome { pass, detail })
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

fn final_rates(levels: &[LevelResult]) -> ExpResult<(f64, f64)> {
    let records: Vec<_> = levels.iter().map(|l| l.record).collect();
    let rates = eoc(&records)?;
    let (l2, h1) = *rates.last().expect("at least two levels");
    Ok((l2.unwrap_or(f64::NAN), h1.unwrap_or(f64::NAN)))
}

fn rate_list(levels: &[LevelResult]) -> String {
    let records: Vec<_> = levels.iter().map(|l| l.record).collect();
    eoc(&records)
        .unwrap_or_default()
        .iter()
        .map(|(a, b)| format!("{:.2}/{:.2}", a.unwrap_or(f64::NAN), b.unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Disc setup shared by the boundary-recovery and traction criteria.
fn recovery_setup() -> AxisymSetup {
    AxisymSetup { rings: 12, ..AxisymSetup::default() }
}

fn boundary_recovery(levels: &[LevelResult]) -> ExpResult<Outcome> {
    let last = levels.last().expect("four levels");
    let (lo, hi) = last.boundary_magnitudes.iter().fold((f64::MAX, f64::MIN), |(a, b), &m| (a.min(m), b.max(m)));
    let worst = rel(lo, 0.1).max(rel(hi, 0.1));
    let half = rel(last.u_half, 0.03125);
    check(worst <= 0.02 && half <= 0.02, format!("|u_h| on circle in [{lo:.5}, {hi:.5}] ({:.2}%), u_h(0.5) = {:.6} ({:.2}%)", 100.0 * worst, last.u_half, 100.0 * half))
}

fn traction_recovery(levels: &[LevelResult]) -> ExpResult<Outcome> {
    let t = levels[1].traction0[0];
    let err = rel(t, -2.0833);
    check(err <= 0.05, format!("radial traction jump at theta = 0 after two levels: {t:.4} ({:.2}% from -2.0833)", 100.0 * err))
}

fn global_rates(levels: &[LevelResult]) -> ExpResult<Outcome> {
    let (l2, h1) = final_rates(levels)?;
    check(
        within(l2, 1.3, 1.7) && within(h1, 0.35, 0.65),
        format!("{} levels, final L2 rate {l2:.3} (want [1.3, 1.7]), H1 rate {h1:.3} (want [0.35, 0.65]); rates L2/H1: {}", levels.len(), rate_list(levels)),
    )
}

fn local_rates() -> ExpResult<Outcome> {
    let levels = convergence_study(&AxisymSetup::default(), 4, Refinement::Local, &Numerics::default())?;
    let (l2, h1) = final_rates(&levels)?;
    check(
        within(l2, 1.75, 2.25) && within(h1, 0.8, 1.2),
        format!("final L2 rate {l2:.3} (want [1.75, 2.25]), H1 rate {h1:.3} (want [0.8, 1.2]); rates L2/H1: {}", rate_list(&levels)),
    )
}

fn pure_solid() -> ExpResult<Outcome> {
    let mesh = microstructure_mesh(&DomainConfig::default(), 16, 1, 0, &[], 1.0)?;
    let m = effective_moduli(&mesh, UNIT, &[], 0.1, &Numerics::default(), "none", 0)?;
    let kappa = 3.0 / 0.95;
    check(
        (m.mu_eff - 1.0).abs() <= 1e-8 && (m.mu_eff - 0.99997).abs() <= 1e-3 && (m.kappa_eff - kappa).abs() <= 1e-8,
        format!("mu_eff = {:.9}, kappa_eff = {:.9} (closed form {kappa:.9})", m.mu_eff, m.kappa_eff),
    )
}

fn moduli_ratios() -> ExpResult<Outcome> {
    let dc = DomainConfig::default();
    let dom = dc.domain();
    let num = Numerics::default();
    let run = |grid: Option<(usize, usize)>| -> ExpResult<_> {
        let incs = match grid {
            Some((r, c)) => place_structured(&dom, r, c, 0.05, 0.1, 2)?.inclusions,
            None => Vec::new(),
        };
        let mesh = microstructure_mesh(&dc, 16, 1, 3, &incs, 1.0)?;
        effective_moduli(&mesh, UNIT, &incs, 0.1, &num, "structured", 0)
    };
    let solid = run(None)?;
    let bulk = run(Some((4, 5)))?;
    let shear = run(Some((7, 7)))?;
    let rk = bulk.kappa_eff / solid.kappa_eff;
    let rm = shear.mu_eff / solid.mu_eff;
    check(
        within(rk, 1.4, 2.6) && within(rm, 1.2, 1.8),
        format!("kappa ratio {rk:.3} at vf {:.4} (want [1.4, 2.6]), mu ratio {rm:.3} at vf {:.4} (want [1.2, 1.8])", bulk.vf, shear.vf),
    )
}

fn placement_insensitivity() -> ExpResult<Outcome> {
    let dc = DomainConfig::default();
    let dom = dc.domain();
    let num = Numerics::default();
    let run = |incs: &[Inclusion64]| -> ExpResult<_> {
        let mesh = microstructure_mesh(&dc, 16, 1, 3, incs, 1.0)?;
        effective_moduli(&mesh, UNIT, incs, 0.1, &num, "", 0)
    };
    let structured = run(&place_structured(&dom, 5, 5, 0.05, 0.1, 2)?.inclusions)?;
    let (mut semi, mut rk, mut rm) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 1..=10u64 {
        semi.push(run(&place_semistructured(&dom, 5, 5, 0.05, 0.1, 2, seed)?.inclusions)?.kappa_eff);
        let m = run(&place_random(&dom, 25, 0.05, 0.1, 2, seed, 100_000)?.inclusions)?;
        rk.push(m.kappa_eff);
        rm.push(m.mu_eff);
    }
    let means = [structured.kappa_eff, mean_std(&semi).0, mean_std(&rk).0];
    let (lo, hi) = means.iter().fold((f64::MAX, f64::MIN), |(a, b), &k| (a.min(k), b.max(k)));
    let spread = hi / lo - 1.0;
    let (km, ks) = mean_std(&rk);
    let (mm, ms) = mean_std(&rm);
    check(
        spread <= 0.10 && ms / mm > ks / km,
        format!(
            "vf {:.4}, kappa structured/semi/random {:.3}/{:.3}/{:.3} (spread {:.1}%), random rel. std mu {:.3} vs kappa {:.3}",
            structured.vf,
            means[0],
            means[1],
            means[2],
            100.0 * spread,
            ms / mm,
            ks / km
        ),
    )
}

fn mode_truncation() -> ExpResult<Outcome> {
    let dc = DomainConfig::default();
    let mut errs = Vec::new();
    for r in [0.2, 0.1, 0.05] {
        let incs: Vec<_> = [[0.3, 0.3], [-0.4, 0.3], [0.1, -0.3]].iter().map(|&c| Inclusion64::new(c, r, 0.1, 8)).collect::<Result<_, _>>()?;
        let mesh = microstructure_mesh(&dc, 16, 1, 5, &incs, 1.0)?;
        let (report, _) = mode_study(&mesh, UNIT, &incs, &Numerics::default())?;
        errs.push(report.entries[1].trunc_error().unwrap_or(f64::NAN));
    }
    check(
        errs[1] <= 0.05 && errs[2] <= 0.02 && errs[0] > errs[1] && errs[1] > errs[2],
        format!("inclusion 2 truncation error at r = 0.2/0.1/0.05: {:.3e}/{:.3e}/{:.3e}", errs[0], errs[1], errs[2]),
    )
}

fn four_inclusion_symmetry(discretization_error: f64) -> ExpResult<Outcome> {
    let setup = FourInclusionSetup { base: 16, ..FourInclusionSetup::default() };
    let num = Numerics::default();
    let sample = symmetry_sample(&setup, 1, 4, &num, 100, 401)?;
    let reference = symmetry_sample(&setup, 1, 7, &num, 4, 401)?;
    let profile = relative_profile_error(&sample.diagonal, &reference.diagonal);
    let bound = 3.0 * discretization_error;
    check(
        sample.rotation_defect <= bound && profile <= 0.02,
        format!("rotation defect {:.3e} (bound {bound:.3e}), diagonal profile error {:.2}% vs reference with {} dofs", sample.rotation_defect, 100.0 * profile, reference.ndof),
    )
}

fn clamped_square(n: usize) -> Mesh64 {
    generate_rect_mesh(-1.0, 1.0, -1.0, 1.0, n).expect("valid square")
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn property_suites() -> ExpResult<Outcome> {
    // Coupling rows against constants and the adjoint pairing.
    let mesh = clamped_square(10);
    let space = FeSpace::new(&mesh);
    let inc = Inclusion64::new([0.13, -0.07], 0.27, 0.1, 4)?;
    let b = assemble_coupling(&space, &[inc], Quadrature::Default)?;
    let shift: Vec<f64> = (0..space.num_dofs()).map(|i| if i % 2 == 0 { 1.3 } else { -0.6 }).collect();
    let annihilation = max_abs(&b.mul_vec(&shift));
    let lam: Vec<f64> = (0..b.num_rows()).map(|i| (i as f64 * 0.37).sin()).collect();
    let v: Vec<f64> = (0..b.num_cols()).map(|i| (i as f64 * 0.11).cos()).collect();
    let left: f64 = b.mul_transpose(&lam).iter().zip(&v).map(|(p, q)| p * q).sum();
    let right: f64 = b.mul_vec(&v).iter().zip(&lam).map(|(p, q)| p * q).sum();
    let adjoint = (left - right).abs();

    // Discrete orthogonality with M = 8N after one band level.
    let inc = Inclusion64::new([0.05, -0.03], 0.2, 0.1, 2)?;
    let near = |_: usize, tri: [[f64; 2]; 3]| tri.iter().any(|p| ((p[0] - inc.center[0]).hypot(p[1] - inc.center[1]) - inc.radius).abs() < 0.15);
    let refined = clamped_square(24).refine_local(near);
    let rspace = FeSpace::new(&refined);
    let rows = assemble_coupling(&rspace, &[inc], Quadrature::Fixed(8 * inc.modes))?;
    let w = [0.7, -0.4];
    let mut orthogonality = 0.0f64;
    for j in 1..=inc.modes {
        let field = rspace.interpolate(|x| {
            let phi = fourier_mode(j, (x[1] - inc.center[1]).atan2(x[0] - inc.center[0]));
            [w[0] * phi, w[1] * phi]
        });
        let out = rows.mul_vec(field.as_slice());
        for i in 1..=inc.modes {
            for c in 0..2 {
                let want = if i == j { w[c] } else { 0.0 };
                orthogonality = orthogonality.max((out[2 * (i - 1) + c] - want).abs());
            }
        }
    }

    // Saddle residuals and linearity of the solution map.
    let mesh = clamped_square(16);
    let space = FeSpace::new(&mesh).with_dirichlet(|_, _| Some([0.0, 0.0]))?;
    let incs = [Inclusion64::new([-0.4, 0.1], 0.15, 0.1, 2)?, Inclusion64::new([0.35, -0.2], 0.2, 0.1, 2)?];
    let a = assemble_stiffness(&space, 1.0, 2.0)?;
    let block = CouplingBlock::assemble(&space, &incs, Quadrature::Default)?;
    let mut sys = SaddleSystem::new(&space, &a, &block, &space.zero_field())?;
    let factor = sys.factor()?;
    let mut solve = |f: [f64; 2], g: &[f64]| -> ExpResult<_> {
        sys.set_rhs(&space, &assemble_load(&space, |_| f), g)?;
        let s = sys.solve(&factor, &SolveOptions::default())?;
        let r = sys.verify_residuals(&s.u, &s.lambda);
        Ok((s, r.schur_res.max(r.primal_res)))
    };
    let (ga, gb): (Vec<f64>, Vec<f64>) = (0..8).map(|i| (0.1 * (i as f64).sin(), 0.05 * (i as f64).cos())).unzip();
    let (sa, ra) = solve([0.3, -0.2], &ga)?;
    let (sb, rb) = solve([-0.1, 0.5], &gb)?;
    let (s, t) = (1.5, -0.7);
    let gc: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| s * x + t * y).collect();
    let (sc, rc) = solve([s * 0.3 + t * -0.1, s * -0.2 + t * 0.5], &gc)?;
    let residual = ra.max(rb).max(rc);
    let combo: Vec<f64> = sa.u.0.iter().zip(&sb.u.0).map(|(x, y)| s * x + t * y).collect();
    let superposition = combo.iter().zip(&sc.u.0).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / (1.0 + max_abs(&combo));

    // Byte-identical outputs across repeated runs and thread counts.
    let run = |threads: usize| -> ExpResult<Vec<u8>> {
        let dir = tempfile::tempdir().map_err(|e| rlm_experiments::ExpError::io("temporary directory", e))?;
        let cfg = ExperimentConfig::from_toml(
            "",
            &[
                "inclusions.placement=\"random\"".into(),
                "inclusions.count=12".into(),
                "inclusions.seeds=3".into(),
                "mesh.base=16".into(),
                "mesh.local_levels=1".into(),
                format!("output.dir={:?}", dir.path().display().to_string()),
            ],
        )?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(|| run_experiment(&cfg, Command::Effective))?;
        fs::read(dir.path().join("moduli.csv")).map_err(|e| rlm_experiments::ExpError::io("reading moduli.csv", e))
    };
    let first = run(1)?;
    let deterministic = first == run(1)? && first == run(4)?;

    check(
        annihilation <= 1e-12 && orthogonality <= 5e-3 && adjoint <= 1e-12 && residual <= 1e-10 && superposition <= 1e-9 && deterministic,
        format!(
            "constants {annihilation:.1e}, orthogonality {orthogonality:.2e}, adjoint {adjoint:.1e}, residuals {residual:.1e}, superposition {superposition:.1e}, byte-identical {deterministic}"
        ),
    )
}

fn two_density_signature() -> ExpResult<Outcome> {
    let dc = DomainConfig::default();
    let layout = place_two_density(&dc.domain(), 11, 0.01, 2)?;
    let mesh = microstructure_mesh(&dc, 16, 1, 3, &layout.inclusions, 1.0)?;
    let alphas: Vec<f64> = (0..7).map(|i| 0.025 * i as f64).collect();
    let sweep = compression_sweep(&mesh, UNIT, &layout.inclusions, &alphas, &Numerics::default())?;
    let secants: Vec<f64> = sweep.windows(2).map(|w| (w[1].pressure - w[0].pressure) / (w[1].area_reduction - w[0].area_reduction)).collect();
    let (lo, hi) = secants.iter().fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    let p0 = sweep[0].pressure;
    check(
        p0 > 0.0 && hi / lo > 1.05,
        format!("{} inclusions, vf {:.4}, p(0) = {p0:.4}, secants {lo:.4} to {hi:.4} (ratio {:.3})", layout.inclusions.len(), layout.vf, hi / lo),
    )
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
}

fn report(c: &Criterion, elapsed: Duration, outcome: ExpResult<Outcome>) -> bool {
    let in_time = c.limit.map_or(true, |l| elapsed <= l);
    let (pass, detail) = match outcome {
        Ok(o) => (o.pass && in_time, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let limit = c.limit.map_or(String::new(), |l| format!(", limit {:.0} s", l.as_secs_f64()));
    println!("{:>2} {} {}: {} [{:.1} s{limit}]", c.id, if pass { "PASS" } else { "FAIL" }, c.name, detail, elapsed.as_secs_f64());
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn crit(id: usize, name: &'static str, secs: Option<u64>) -> Criterion {
    Criterion { id, name, limit: secs.map(Duration::from_secs) }
}

fn main() -> ExitCode {
    let mut all = true;

    let (recovery, t1) = timed(|| convergence_study(&recovery_setup(), 4, Refinement::Global, &Numerics::default()));
    let c1 = crit(1, "analytic boundary recovery", Some(30));
    let c10 = crit(10, "traction recovery", None);
    match &recovery {
        Ok(levels) => {
            all &= report(&c1, t1, boundary_recovery(levels));
            all &= report(&c10, t1, traction_recovery(levels));
        }
        Err(e) => {
            all &= report(&c1, t1, check(false, format!("error: {e}")));
            all &= report(&c10, t1, check(false, format!("error: {e}")));
        }
    }

    let (global, t2) = timed(|| convergence_study(&AxisymSetup::default(), 6, Refinement::Global, &Numerics::default()));
    let finest = global.as_ref().ok().and_then(|l| l.last()).map(|l| l.record.e_l2);
    all &= report(&crit(2, "global-refinement convergence rates", Some(120)), t2, global.and_then(|l| global_rates(&l)));

    let (o, t) = timed(local_rates);
    all &= report(&crit(3, "local-refinement convergence rates", Some(180)), t, o);
    let (o, t) = timed(pure_solid);
    all &= report(&crit(4, "pure-solid moduli", Some(10)), t, o);
    let (o, t) = timed(moduli_ratios);
    all &= report(&crit(5, "moduli ratios", Some(300)), t, o);
    let (o, t) = timed(placement_insensitivity);
    all &= report(&crit(6, "placement insensitivity", None), t, o);
    let (o, t) = timed(mode_truncation);
    all &= report(&crit(7, "mode truncation", Some(120)), t, o);
    let (o, t) = timed(|| match finest {
        Some(e) => four_inclusion_symmetry(e),
        None => check(false, "no discretization error from criterion 2".into()),
    });
    all &= report(&crit(8, "four-inclusion symmetry", None), t, o);
    let (o, t) = timed(property_suites);
    all &= report(&crit(9, "property suites", None), t, o);
    let (o, t) = timed(two_density_signature);
    all &= report(&crit(11, "two-density nonlinearity", None), t, o);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
