//! Experiment drivers: configuration in, CSV artifacts out. Every CSV opens
//! with the line `# config-sha256=<hex> seed=<n>`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rlm_core::coupling::{inclusions_csv, parse_inclusions_csv};
use rlm_core::fem::{nodal_csv, vtk_legacy};
use rlm_core::postprocess::convergence_csv;
use rlm_core::{mode_report, Domain, EffectiveModuli, Inclusion64, Mesh64, ModeReport, SideForces, SolveReport};

use crate::config::{BcCase, DomainKind, ExperimentConfig, PlacementKind};
use crate::error::{ExpError, ExpResult};
use crate::pipeline::{base_mesh, build_mesh, Boundary, Material, Problem};
use crate::placement::{
    check_clearance, grid_dims, place_random, place_semistructured, place_structured, place_two_density, volume_fraction, PlacementResult,
};
use crate::studies::{compression_sweep, convergence_study, effective_moduli, mode_study, AxisymSetup, Numerics};

/// The experiment kinds behind the CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Generate the mesh and inclusion layout and dump both.
    Mesh,
    /// One solve with the configured boundary case.
    Solve,
    /// Convergence against the axisymmetric solution.
    Converge,
    /// Multiplier mode content per inclusion.
    Modes,
    /// Effective moduli, one row per seed.
    Effective,
    /// Boundary pressure over the compression strains `bc.alphas`.
    Sweep,
}

/// Files written by a run and a one-line summary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl ExperimentConfig {
    pub fn material(&self) -> Material {
        Material { mu: self.material.mu, lambda: self.material.lambda }
    }

    pub fn numerics(&self) -> ExpResult<Numerics> {
        Ok(Numerics { quadrature: self.quadrature()?, tol: self.solver.tol, max_iter: self.solver.max_iter, band_factor: self.mesh.band_factor })
    }

    /// The configured inclusion layout; random layouts use `seed`.
    pub fn placement(&self, seed: u64) -> ExpResult<PlacementResult> {
        let domain = self.domain.domain();
        let inc = &self.inclusions;
        let fixed = |inclusions: Vec<Inclusion64>| -> ExpResult<PlacementResult> {
            rlm_core::validate_inclusions(&domain, &inclusions)?;
            let vf = volume_fraction(&domain, &inclusions);
            Ok(PlacementResult { attempts: inclusions.len(), inclusions, vf, seed })
        };
        match inc.placement {
            PlacementKind::None => fixed(Vec::new()),
            PlacementKind::Single => fixed(vec![Inclusion64::new(inc.center, inc.radius, inc.gbar, inc.modes)?]),
            PlacementKind::List => fixed(
                inc.centers.iter().map(|&c| Inclusion64::new(c, inc.radius, inc.gbar, inc.modes)).collect::<Result<Vec<_>, _>>()?,
            ),
            PlacementKind::Structured => {
                let (r, c) = grid_dims(inc.count, inc.rows, inc.cols)?;
                place_structured(&domain, r, c, inc.radius, inc.gbar, inc.modes)
            }
            PlacementKind::Semistructured => {
                let (r, c) = grid_dims(inc.count, inc.rows, inc.cols)?;
                place_semistructured(&domain, r, c, inc.radius, inc.gbar, inc.modes, seed)
            }
            PlacementKind::Random => place_random(&domain, inc.count, inc.radius, inc.gbar, inc.modes, seed, inc.max_attempts),
            PlacementKind::TwoDensity => place_two_density(&domain, inc.core_grid, inc.gbar, inc.modes),
            PlacementKind::File => {
                let path = inc.file.as_deref().ok_or_else(|| ExpError::Config("placement `file` needs inclusions.file".into()))?;
                let text = fs::read_to_string(path).map_err(|e| ExpError::io(format!("reading {path}"), e))?;
                let inclusions = parse_inclusions_csv(&text, inc.modes, Some(&domain))?;
                check_clearance(&domain, &inclusions)?;
                fixed(inclusions)
            }
        }
    }

    /// Base mesh with the configured uniform and band levels.
    pub fn mesh(&self, inclusions: &[Inclusion64]) -> ExpResult<Mesh64> {
        let base = base_mesh(&self.domain, self.mesh.base, self.mesh.sectors)?;
        Ok(build_mesh(base, self.mesh.global_levels, self.mesh.local_levels, inclusions, self.mesh.band_factor))
    }

    pub fn boundary(&self) -> Boundary {
        match self.bc.case {
            BcCase::Zero => Boundary::Zero,
            BcCase::Compression => Boundary::Compression(self.bc.alpha),
            BcCase::Shear => Boundary::Shear,
        }
    }

    /// Axisymmetric setup of a convergence run: a circle at the centre of the
    /// disc domain, rings and sectors from the mesh section.
    pub fn axisym_setup(&self) -> ExpResult<AxisymSetup> {
        if self.domain.kind != DomainKind::Disc {
            return Err(ExpError::Config("convergence runs need a disc domain".into()));
        }
        if self.inclusions.center != [0.0, 0.0] {
            return Err(ExpError::Config("convergence runs need the inclusion at the origin".into()));
        }
        Ok(AxisymSetup {
            outer_radius: self.domain.radius,
            inclusion_radius: self.inclusions.radius,
            ubar: self.inclusions.gbar,
            material: self.material(),
            modes: self.inclusions.modes,
            rings: self.mesh.base,
            sectors: self.mesh.sectors,
        })
    }
}

/// Runs one experiment and writes its artifacts to `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig, command: Command) -> ExpResult<RunOutput> {
    cfg.validate()?;
    let out = Path::new(&cfg.output.dir);
    fs::create_dir_all(out).map_err(|e| ExpError::io(format!("creating {}", out.display()), e))?;
    let header = cfg.csv_header_comment();
    let mut files = Vec::new();
    let mut write = |name: &str, body: &str| -> ExpResult<()> {
        let path = out.join(name);
        let text = if name.ends_with(".csv") { format!("{header}\n{body}") } else { body.to_string() };
        fs::write(&path, text).map_err(|e| ExpError::io(format!("writing {}", path.display()), e))?;
        files.push(path);
        Ok(())
    };
    let numerics = cfg.numerics()?;
    let material = cfg.material();
    let summary = match command {
        Command::Mesh => {
            let p = cfg.placement(cfg.inclusions.seed)?;
            let mesh = cfg.mesh(&p.inclusions)?;
            write("mesh.txt", &mesh.dump())?;
            write("inclusions.csv", &inclusions_csv(&p.inclusions))?;
            format!("mesh: {} vertices, {} triangles, {} inclusions, vf {:.6}", mesh.num_vertices(), mesh.num_triangles(), p.inclusions.len(), p.vf)
        }
        Command::Solve => {
            let p = cfg.placement(cfg.inclusions.seed)?;
            let mesh = cfg.mesh(&p.inclusions)?;
            let mut problem = Problem::new(&mesh, material, &p.inclusions, numerics.quadrature, numerics.tol, numerics.max_iter)?;
            let s = problem.solve(cfg.boundary())?;
            write("solve.csv", &format!("{}\n{}\n", SolveReport::CSV_HEADER, s.report.csv_row()))?;
            if !p.inclusions.is_empty() {
                let modes = mode_report(&p.inclusions, &s.lambda)?;
                write("modes.csv", &format!("{}\n{}", ModeReport::CSV_HEADER, modes.csv_body()))?;
            }
            if matches!(mesh.domain(), Domain::Rect { .. }) {
                let f = SideForces::compute(&s.space, &s.u, material.mu, material.lambda)?;
                let mut body = String::from("side,fx,fy\n");
                for (name, v) in ["left", "right", "bottom", "top"].iter().zip(f.as_array()) {
                    writeln!(body, "{name},{:.12e},{:.12e}", v[0], v[1]).unwrap();
                }
                write("forces.csv", &body)?;
            }
            if cfg.output.fields {
                write("displacement.csv", &nodal_csv(&mesh, &s.u))?;
                write("displacement.vtk", &vtk_legacy(&mesh, &s.u))?;
            }
            format!("solve: {} dofs, {} multipliers, {} iterations, schur residual {:.3e}", s.space.num_dofs(), s.lambda.len(), s.report.outer_iters, s.report.schur_res)
        }
        Command::Converge => {
            let setup = cfg.axisym_setup()?;
            let levels = convergence_study(&setup, cfg.mesh.global_levels, cfg.mesh.refinement, &numerics)?;
            let records: Vec<_> = levels.iter().map(|l| l.record).collect();
            write("convergence.csv", &convergence_csv(&records)?)?;
            let mut detail = format!("level,{},traction0,u_half,min_abs_u_gamma,max_abs_u_gamma\n", SolveReport::CSV_HEADER);
            for l in &levels {
                let (lo, hi) = l.boundary_magnitudes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
                writeln!(detail, "{},{},{:.12e},{:.12e},{:.12e},{:.12e}", l.record.level, l.report.csv_row(), l.traction0[0], l.u_half, lo, hi).unwrap();
            }
            write("convergence_detail.csv", &detail)?;
            let last = records.last().map_or(f64::NAN, |r| r.e_l2);
            format!("converge: {} levels, final eL2 {last:.3e}", records.len())
        }
        Command::Modes => {
            let p = cfg.placement(cfg.inclusions.seed)?;
            let mesh = cfg.mesh(&p.inclusions)?;
            let (report, solve) = mode_study(&mesh, material, &p.inclusions, &numerics)?;
            write("modes.csv", &format!("{}\n{}", ModeReport::CSV_HEADER, report.csv_body()))?;
            let worst = report.entries.iter().filter_map(|e| e.trunc_error()).fold(0.0f64, f64::max);
            format!("modes: {} inclusions, max truncation error {worst:.3e}, {} iterations", report.entries.len(), solve.outer_iters)
        }
        Command::Effective => {
            let seeds: Vec<u64> = (0..cfg.inclusions.seeds.max(1)).map(|k| cfg.inclusions.seed + k).collect();
            let name = cfg.inclusions.placement.as_str();
            let rows = seeds
                .par_iter()
                .map(|&seed| {
                    let p = cfg.placement(seed)?;
                    let mesh = cfg.mesh(&p.inclusions)?;
                    effective_moduli(&mesh, material, &p.inclusions, cfg.bc.alpha, &numerics, name, seed)
                })
                .collect::<ExpResult<Vec<_>>>()?;
            let mut body = format!("{}\n", EffectiveModuli::CSV_HEADER);
            for r in &rows {
                writeln!(body, "{}", r.csv_row()).unwrap();
            }
            write("moduli.csv", &body)?;
            let stats = ModuliStats::of(&rows);
            write("moduli_summary.csv", &format!("{}\n{}\n", ModuliStats::CSV_HEADER, stats.csv_row(name)))?;
            format!("effective: {} samples, kappa_eff {:.6} ± {:.6}, mu_eff {:.6} ± {:.6}", stats.samples, stats.kappa_mean, stats.kappa_std, stats.mu_mean, stats.mu_std)
        }
        Command::Sweep => {
            let p = cfg.placement(cfg.inclusions.seed)?;
            let mesh = cfg.mesh(&p.inclusions)?;
            let points = compression_sweep(&mesh, material, &p.inclusions, &cfg.bc.alphas, &numerics)?;
            let mut body = String::from("alpha,area_reduction,pressure\n");
            for s in &points {
                writeln!(body, "{:.12e},{:.12e},{:.12e}", s.alpha, s.area_reduction, s.pressure).unwrap();
            }
            write("sweep.csv", &body)?;
            format!("sweep: {} strains, {} inclusions, vf {:.6}", points.len(), p.inclusions.len(), p.vf)
        }
    };
    Ok(RunOutput { files, summary })
}

/// Mean and sample standard deviation of the moduli over seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModuliStats {
    pub samples: usize,
    pub vf_mean: f64,
    pub kappa_mean: f64,
    pub kappa_std: f64,
    pub mu_mean: f64,
    pub mu_std: f64,
}

impl ModuliStats {
    pub const CSV_HEADER: &'static str = "placement,samples,vf_mean,kappa_mean,kappa_std,mu_mean,mu_std";

    /// Standard deviations are zero for a single sample.
    pub fn of(rows: &[EffectiveModuli]) -> Self {
        let mean_std = |v: Vec<f64>| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 { v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            (m, var.sqrt())
        };
        let (vf_mean, _) = mean_std(rows.iter().map(|r| r.vf).collect());
        let (kappa_mean, kappa_std) = mean_std(rows.iter().map(|r| r.kappa_eff).collect());
        let (mu_mean, mu_std) = mean_std(rows.iter().map(|r| r.mu_eff).collect());
        ModuliStats { samples: rows.len(), vf_mean, kappa_mean, kappa_std, mu_mean, mu_std }
    }

    pub fn csv_row(&self, placement: &str) -> String {
        format!(
            "{placement},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.samples, self.vf_mean, self.kappa_mean, self.kappa_std, self.mu_mean, self.mu_std
        )
    }
}
