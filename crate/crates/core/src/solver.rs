//! Fixed-point iteration for `(A + B(u)) u = F` with dynamic damping.
//!
//! The system matrix is frozen at `A + B⁰`, where `B⁰` is the stabilization
//! matrix with all limiters zero, and the solution-dependent part moves to
//! the right-hand side:
//!
//! ```text
//! (A + B⁰) û = F + (B⁰ - B(u_k)) u_k,     u_{k+1} = u_k + ω (û - u_k)
//! ```
//!
//! so one LU factorization serves every iteration on a mesh. A step is
//! accepted when the nonlinear residual decreases; otherwise `ω` is halved
//! and the step retried (a rejection). Accepted steps grow `ω` by 1.5 up to 1.

use log::debug;

use crate::assembly::AssembledSystem;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::{norm2, CsrMatrix, LuFactorization};
use crate::stabilization::{build_stabilization_with, Limiter, LimiterContext, LimiterState, Smuas};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    Smuas,
    /// Plain Galerkin, `B ≡ 0`.
    None,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Cap on iterations plus rejections.
    pub max_iterations: usize,
    /// Convergence when the residual drops below `tol_scale * sqrt(#dofs)`.
    pub tol_scale: f64,
    pub stabilization: Stabilization,
    pub initial_damping: f64,
    pub damping_growth: f64,
    pub damping_shrink: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tol_scale: 1e-8,
            stabilization: Stabilization::Smuas,
            initial_damping: 1.0,
            damping_growth: 1.5,
            damping_shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub rejections: usize,
    pub final_residual: f64,
    pub converged: bool,
}

/// Converged (or last) iterate with its limiter state and stabilization
/// matrix.
#[derive(Debug, Clone)]
pub struct NonlinearSolution {
    pub u: Vec<f64>,
    pub limiters: LimiterState,
    pub stabilization: CsrMatrix,
    pub stats: SolveStats,
}

/// Residual vector: `F_i - Σ_j (A_ij + B_ij) u_j` on free rows and
/// `u_D(x_i) - u_i` on Dirichlet rows.
pub fn residual_vector(sys: &AssembledSystem, b: &CsrMatrix, u: &[f64]) -> Result<Vec<f64>> {
    let au = sys.a.matvec(u)?;
    let bu = b.matvec(u)?;
    Ok((0..sys.dim())
        .map(|i| {
            if sys.dirichlet[i] {
                sys.f_bc[i] - u[i]
            } else {
                sys.f[i] - au[i] - bu[i]
            }
        })
        .collect())
}

pub fn nonlinear_residual(sys: &AssembledSystem, b: &CsrMatrix, u: &[f64]) -> Result<f64> {
    Ok(norm2(&residual_vector(sys, b, u)?))
}

struct Evaluator<'a> {
    sys: &'a AssembledSystem,
    ctx: LimiterContext<'a>,
    stabilization: Stabilization,
}

impl Evaluator<'_> {
    fn limiters(&self, u: &[f64]) -> LimiterState {
        match self.stabilization {
            Stabilization::Smuas => Smuas.compute(&self.sys.a, &self.ctx, u, &self.sys.dirichlet),
            Stabilization::None => LimiterState::one(&self.sys.a),
        }
    }

    fn evaluate(&self, u: &[f64]) -> Result<(LimiterState, CsrMatrix, f64)> {
        let ls = self.limiters(u);
        let b = self.matrix(&ls);
        let r = nonlinear_residual(self.sys, &b, u)?;
        Ok((ls, b, r))
    }

    fn matrix(&self, ls: &LimiterState) -> CsrMatrix {
        match self.stabilization {
            Stabilization::Smuas => build_stabilization_with(&self.sys.a, &ls.alpha, self.ctx_transpose()),
            Stabilization::None => self.sys.a.zeros_like(),
        }
    }

    fn ctx_transpose(&self) -> &[usize] {
        self.ctx.transpose_slots()
    }
}

pub fn solve_nonlinear(
    sys: &AssembledSystem,
    mesh: &Mesh,
    opts: &SolverOptions,
    u0: &[f64],
) -> Result<NonlinearSolution> {
    let n = sys.dim();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    let eval = Evaluator {
        sys,
        ctx: LimiterContext::new(mesh, &sys.a),
        stabilization: opts.stabilization,
    };

    let b0 = eval.matrix(&match opts.stabilization {
        Stabilization::Smuas => LimiterState::zero(&sys.a),
        Stabilization::None => LimiterState::one(&sys.a),
    });
    let system = sys.a.add_scaled(&b0, 1.0)?.with_identity_rows(&sys.dirichlet);
    let lu = LuFactorization::new(&system)?;
    let tol = opts.tol_scale * (n as f64).sqrt();

    let mut u: Vec<f64> = (0..n)
        .map(|i| if sys.dirichlet[i] { sys.f_bc[i] } else { u0[i] })
        .collect();
    let (mut limiters, mut b, mut residual) = eval.evaluate(&u)?;
    let mut omega = opts.initial_damping;
    let mut iterations = 0;
    let mut rejections = 0;
    let mut rhs = vec![0.0; n];
    let mut trial = vec![0.0; n];

    'outer: loop {
        if iterations > 0 && residual < tol {
            break;
        }
        if iterations + rejections >= opts.max_iterations {
            break;
        }
        // rhs = F + (B⁰ - B(u)) u on free rows
        let b0u = b0.matvec(&u)?;
        let bu = b.matvec(&u)?;
        for i in 0..n {
            rhs[i] = if sys.dirichlet[i] {
                sys.f_bc[i]
            } else {
                sys.f[i] + b0u[i] - bu[i]
            };
        }
        let target = lu.solve(&rhs)?;
        loop {
            for i in 0..n {
                trial[i] = u[i] + omega * (target[i] - u[i]);
            }
            let (ls, bt, rt) = eval.evaluate(&trial)?;
            if rt < residual || rt < tol {
                debug!(
                    "iteration {} residual {:.6e} omega {:.4} accepted",
                    iterations + 1,
                    rt,
                    omega
                );
                std::mem::swap(&mut u, &mut trial);
                limiters = ls;
                b = bt;
                residual = rt;
                iterations += 1;
                omega = (omega * opts.damping_growth).min(1.0);
                break;
            }
            debug!(
                "iteration {} residual {:.6e} omega {:.4} rejected",
                iterations + 1,
                rt,
                omega
            );
            rejections += 1;
            omega *= opts.damping_shrink;
            if iterations + rejections >= opts.max_iterations {
                break 'outer;
            }
        }
    }

    let stats = SolveStats {
        iterations,
        rejections,
        final_residual: residual,
        converged: residual < tol,
    };
    Ok(NonlinearSolution {
        u,
        limiters,
        stabilization: b,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, dirichlet_values};
    use crate::problem::{known_boundary_layer, Problem};
    use crate::sparse::factor_and_solve;

    fn level(n: usize) -> Mesh {
        (0..n).fold(Mesh::unit_square_dirichlet(), |m, _| m.uniform_refine())
    }

    #[test]
    fn galerkin_in_one_iteration() {
        let mesh = level(3);
        let p = known_boundary_layer();
        let sys = assemble(&mesh, &p, 4).unwrap();
        let opts = SolverOptions {
            stabilization: Stabilization::None,
            ..Default::default()
        };
        let sol = solve_nonlinear(&sys, &mesh, &opts, &vec![0.0; mesh.num_dofs()]).unwrap();
        assert!(sol.stats.converged);
        assert_eq!(sol.stats.iterations, 1);
        assert_eq!(sol.stats.rejections, 0);
        let direct = factor_and_solve(&sys.a_bc, &sys.f_bc).unwrap();
        for (a, b) in sol.u.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = sys.a.zeros_like();
        let r = nonlinear_residual(&sys, &zero, &direct).unwrap();
        assert!(r <= 1e-10 * norm2(&sys.f));
    }

    #[test]
    fn fixed_point_start_converges_in_one_iteration() {
        let mesh = level(2);
        let p = Problem::new("diffusion", 1.0, 1.0)
            .with_reaction(|_| 1.0)
            .with_source(|_| 1.0);
        let sys = assemble(&mesh, &p, 4).unwrap();
        let opts = SolverOptions::default();
        let first = solve_nonlinear(&sys, &mesh, &opts, &vec![0.0; mesh.num_dofs()]).unwrap();
        assert!(first.stats.converged);
        let again = solve_nonlinear(&sys, &mesh, &opts, &first.u).unwrap();
        assert!(again.stats.converged);
        assert_eq!(again.stats.iterations, 1);
    }

    #[test]
    fn dirichlet_components_of_residual_vanish() {
        let mesh = level(2);
        let p = known_boundary_layer();
        let sys = assemble(&mesh, &p, 4).unwrap();
        let mut u = dirichlet_values(&mesh, &p);
        for (i, v) in u.iter_mut().enumerate() {
            if !sys.dirichlet[i] {
                *v = 0.1 * i as f64;
            }
        }
        let r = residual_vector(&sys, &sys.a.zeros_like(), &u).unwrap();
        for i in 0..r.len() {
            if sys.dirichlet[i] {
                assert_eq!(r[i], 0.0);
            }
        }
    }

    #[test]
    fn smuas_converges_on_coarse_benchmark_mesh() {
        let mesh = level(2);
        let p = known_boundary_layer();
        let sys = assemble(&mesh, &p, 4).unwrap();
        let sol = solve_nonlinear(&sys, &mesh, &SolverOptions::default(), &[0.0; 25]).unwrap();
        assert!(sol.stats.converged, "{:?}", sol.stats);
        assert!(sol.stats.final_residual < 1e-8 * 5.0);
    }
}
