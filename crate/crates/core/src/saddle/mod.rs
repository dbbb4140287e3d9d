//! Saddle-point system `[A Bᵀ; B 0] [u; Λ] = [f; G]` of the reduced
//! formulation, solved by conjugate gradients on the Schur complement
//! `S = B A⁻¹ Bᵀ`.
//!
//! Dirichlet constraints are eliminated symmetrically: the unknowns are the
//! free displacement dofs, the prescribed values are moved to the right-hand
//! sides (`f_f − A_fc u_c` and `G − B_c u_c`).

use crate::coupling::CouplingBlock;
use crate::error::{invalid, Error, Result};
use crate::fem::{FeSpace, Field};
use crate::linalg::{coordinate_dissection, LdlFactor, SparseRows, SymSparseMatrix};
use crate::scalar::{dot, norm2, Scalar};

/// Stopping and iteration controls of [`SaddleSystem::solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions<T> {
    /// Relative residual target, scaled by `max(1, ‖rhs‖)`.
    pub tol: T,
    pub max_iter: usize,
    /// Starting multipliers (zero when absent).
    pub initial_guess: Option<Vec<T>>,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions { tol: T::lit(1e-10), max_iter: 500, initial_guess: None }
    }
}

/// Residuals recomputed from a returned solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub outer_iters: usize,
    /// `‖B u − G‖`.
    pub schur_res: f64,
    /// `‖A u + Bᵀ Λ − f‖` over the free dofs.
    pub primal_res: f64,
    pub factor_nnz: usize,
}

impl SolveReport {
    pub const CSV_HEADER: &'static str = "outer_iters,schur_res,primal_res,factor_nnz";

    pub fn csv_row(&self) -> String {
        format!("{},{:.6e},{:.6e},{}", self.outer_iters, self.schur_res, self.primal_res, self.factor_nnz)
    }
}

/// Displacement, stacked multipliers and residual report.
#[derive(Clone, Debug)]
pub struct SaddleSolution<T> {
    pub u: Field<T>,
    pub lambda: Vec<T>,
    pub report: SolveReport,
}

/// Factorization of the constrained elasticity block `A_ff`.
#[derive(Clone, Debug)]
pub struct PrimalFactor<T>(LdlFactor<T>);

impl<T: Scalar> PrimalFactor<T> {
    pub fn nnz(&self) -> usize {
        self.0.nnz()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.0.solve(b)
    }
}

/// Sparse LDLᵀ factorization with a graph nested-dissection ordering.
pub fn factor_primal<T: Scalar>(a: &SymSparseMatrix<T>) -> Result<PrimalFactor<T>> {
    LdlFactor::new(a).map(PrimalFactor)
}

/// Constrained saddle-point system over the free dofs of a space.
#[derive(Clone, Debug)]
pub struct SaddleSystem<T> {
    n_dofs: usize,
    free: Vec<usize>,
    constrained: Vec<usize>,
    /// Position of each free dof, used for the fill-reducing ordering.
    free_coords: Vec<[f64; 2]>,
    a_ff: SymSparseMatrix<T>,
    a_fc: SparseRows<T>,
    b_f: SparseRows<T>,
    b_c: SparseRows<T>,
    u_c: Vec<T>,
    f_f: Vec<T>,
    g: Vec<T>,
    offsets: Vec<usize>,
}

impl<T: Scalar> SaddleSystem<T> {
    /// `a` and `coupling.rows` are over all dofs of `space`, `f` is the load.
    pub fn new(space: &FeSpace<'_, T>, a: &SymSparseMatrix<T>, coupling: &CouplingBlock<T>, f: &Field<T>) -> Result<Self> {
        let n = space.num_dofs();
        if a.dim() != n || f.len() != n || coupling.rows.num_cols() != n || coupling.rows.num_rows() != coupling.rhs.len() {
            return Err(invalid("saddle system dimensions are inconsistent"));
        }
        let mut free = Vec::new();
        let mut constrained = Vec::new();
        let mut free_index = vec![None; n];
        let mut con_index = vec![None; n];
        for d in 0..n {
            if space.is_constrained(d) {
                con_index[d] = Some(constrained.len());
                constrained.push(d);
            } else {
                free_index[d] = Some(free.len());
                free.push(d);
            }
        }
        let (a_ff, a_fc) = a.split(&free, &free_index, &con_index, constrained.len());
        let (b_f, b_c) = coupling.rows.split_columns(&free_index, free.len(), &con_index, constrained.len());
        let vertices = space.mesh().vertices();
        let free_coords = free.iter().map(|&d| vertices[d / 2].map(|c| c.to_f64_lossy())).collect();
        let mut sys = SaddleSystem {
            n_dofs: n,
            free,
            free_coords,
            constrained,
            a_ff,
            a_fc,
            b_f,
            b_c,
            u_c: Vec::new(),
            f_f: Vec::new(),
            g: Vec::new(),
            offsets: coupling.offsets.clone(),
        };
        sys.set_rhs(space, f, &coupling.rhs)?;
        Ok(sys)
    }

    /// Replaces load, Dirichlet values and constraint data while keeping the
    /// matrices. The space must constrain exactly the same dofs.
    pub fn set_rhs(&mut self, space: &FeSpace<'_, T>, f: &Field<T>, g: &[T]) -> Result<()> {
        if space.num_dofs() != self.n_dofs || f.len() != self.n_dofs || g.len() != self.b_f.num_rows() {
            return Err(invalid("right-hand side dimensions are inconsistent"));
        }
        let mut u_c = Vec::with_capacity(self.constrained.len());
        for &d in &self.constrained {
            u_c.push(space.prescribed(d).ok_or_else(|| invalid("constraint pattern differs from the assembled system"))?);
        }
        if space.num_constrained() != self.constrained.len() {
            return Err(invalid("constraint pattern differs from the assembled system"));
        }
        let lift = self.a_fc.mul_vec(&u_c);
        self.f_f = self.free.iter().zip(lift).map(|(&d, l)| f.0[d] - l).collect();
        let blift = self.b_c.mul_vec(&u_c);
        self.g = g.iter().zip(blift).map(|(&gi, l)| gi - l).collect();
        self.u_c = u_c;
        Ok(())
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Dimension of the Schur complement (`2N` per inclusion).
    pub fn num_multipliers(&self) -> usize {
        self.g.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn primal_matrix(&self) -> &SymSparseMatrix<T> {
        &self.a_ff
    }

    /// Factorizes `A_ff` with a nested-dissection ordering cut along the
    /// dof positions.
    pub fn factor(&self) -> Result<PrimalFactor<T>> {
        let (ap, ai, _) = self.a_ff.raw();
        let perm = coordinate_dissection(self.a_ff.dim(), ap, ai, &self.free_coords);
        LdlFactor::with_ordering(&self.a_ff, perm).map(PrimalFactor)
    }

    fn scatter(&self, u_f: &[T]) -> Field<T> {
        let mut u = vec![T::zero(); self.n_dofs];
        for (&d, &v) in self.free.iter().zip(u_f) {
            u[d] = v;
        }
        for (&d, &v) in self.constrained.iter().zip(&self.u_c) {
            u[d] = v;
        }
        Field(u)
    }

    fn gather(&self, u: &Field<T>) -> Vec<T> {
        self.free.iter().map(|&d| u.0[d]).collect()
    }

    /// `u_f = A⁻¹ (f − Bᵀ Λ)` with a step of iterative refinement.
    fn primal_solve(&self, factor: &PrimalFactor<T>, lambda: &[T]) -> Vec<T> {
        let bt = self.b_f.mul_transpose(lambda);
        let rhs: Vec<T> = self.f_f.iter().zip(bt).map(|(&f, b)| f - b).collect();
        let mut u = factor.solve(&rhs);
        let au = self.a_ff.mul_vec(&u);
        let r: Vec<T> = rhs.iter().zip(au).map(|(&b, a)| b - a).collect();
        let du = factor.solve(&r);
        for (ui, d) in u.iter_mut().zip(du) {
            *ui += d;
        }
        u
    }

    fn apply_schur(&self, factor: &PrimalFactor<T>, p: &[T]) -> Vec<T> {
        let bt = self.b_f.mul_transpose(p);
        let y = factor.solve(&bt);
        self.b_f.mul_vec(&y)
    }

    /// The Schur complement as a dense row-major matrix (small systems only).
    pub fn schur_dense(&self, factor: &PrimalFactor<T>) -> Vec<Vec<T>> {
        let k = self.num_multipliers();
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![T::zero(); k];
            e[j] = T::one();
            cols.push(self.apply_schur(factor, &e));
        }
        (0..k).map(|i| (0..k).map(|j| cols[j][i]).collect()).collect()
    }

    /// Independently recomputed residual norms of `(u, Λ)`.
    pub fn verify_residuals(&self, u: &Field<T>, lambda: &[T]) -> SolveReport {
        let u_f = self.gather(u);
        let au = self.a_ff.mul_vec(&u_f);
        let bt = self.b_f.mul_transpose(lambda);
        let pr: Vec<T> = au.iter().zip(bt).zip(&self.f_f).map(|((&a, b), &f)| a + b - f).collect();
        let bu = self.b_f.mul_vec(&u_f);
        let cr: Vec<T> = bu.iter().zip(&self.g).map(|(&b, &g)| b - g).collect();
        SolveReport { outer_iters: 0, schur_res: norm2(&cr).to_f64_lossy(), primal_res: norm2(&pr).to_f64_lossy(), factor_nnz: 0 }
    }

    /// Schur-complement CG. Converged means both recomputed residuals satisfy
    /// `‖B u − G‖ ≤ tol·max(1, ‖G‖)` and `‖A u + BᵀΛ − f‖ ≤ tol·max(1, ‖f‖)`.
    pub fn solve(&self, factor: &PrimalFactor<T>, opts: &SolveOptions<T>) -> Result<SaddleSolution<T>> {
        let k = self.num_multipliers();
        let mut lambda = match &opts.initial_guess {
            Some(l) if l.len() != k => return Err(invalid(format!("initial guess has length {}, expected {k}", l.len()))),
            Some(l) => l.clone(),
            None => vec![T::zero(); k],
        };
        let g_scale = T::one().max(norm2(&self.g));
        let f_scale = T::one().max(norm2(&self.f_f));
        let target = opts.tol * g_scale;
        let mut iters = 0usize;
        // A Rayleigh quotient this far below the largest one seen means the
        // Schur complement is numerically singular.
        let breakdown = T::epsilon().powf(T::lit(0.75));
        let mut rq_max = T::zero();

        loop {
            // Residual of S Λ = B A⁻¹ f − G equals B u(Λ) − G.
            let u_f = self.primal_solve(factor, &lambda);
            let mut r: Vec<T> = self.b_f.mul_vec(&u_f).iter().zip(&self.g).map(|(&b, &g)| b - g).collect();
            let mut rr = dot(&r, &r);
            let mut p = r.clone();
            while rr.sqrt() > target {
                if iters >= opts.max_iter {
                    return Err(Error::NoConvergence { iterations: iters, residual: rr.sqrt().to_f64_lossy() });
                }
                iters += 1;
                let sp = self.apply_schur(factor, &p);
                let psp = dot(&p, &sp);
                let rq = psp / dot(&p, &p);
                rq_max = rq_max.max(rq);
                if !(psp > T::zero()) || rq <= breakdown * rq_max {
                    return Err(Error::RankDeficient { iteration: iters });
                }
                let alpha = rr / psp;
                for i in 0..k {
                    lambda[i] += alpha * p[i];
                    r[i] -= alpha * sp[i];
                }
                let rr_new = dot(&r, &r);
                let beta = rr_new / rr;
                rr = rr_new;
                for i in 0..k {
                    p[i] = r[i] + beta * p[i];
                }
            }

            let u_f = self.primal_solve(factor, &lambda);
            let u = self.scatter(&u_f);
            let mut report = self.verify_residuals(&u, &lambda);
            report.outer_iters = iters;
            report.factor_nnz = factor.nnz();
            let ok_c = report.schur_res <= target.to_f64_lossy();
            let ok_p = report.primal_res <= (opts.tol * f_scale).to_f64_lossy();
            if ok_c && ok_p {
                return Ok(SaddleSolution { u, lambda, report });
            }
            if ok_c || iters >= opts.max_iter {
                // The primal residual is a factorization accuracy problem
                // that restarting cannot fix.
                let residual = if ok_c { report.primal_res } else { report.schur_res };
                return Err(Error::NoConvergence { iterations: iters, residual });
            }
            // The recursive residual drifted: restart from the current iterate.
        }
    }
}
