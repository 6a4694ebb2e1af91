//! Discrete maximum principle check on the convection-dominated
//! [`dmp_test`](crate::problem::dmp_test) problem.

use crate::assembly::{assemble, dirichlet_values};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::problem::{dmp_test, Problem};
use crate::solver::{solve_nonlinear, SolveStats, SolverOptions};

/// Admissible overshoot beyond the data bounds.
pub const DMP_TOLERANCE: f64 = 1e-10;

/// Solver settings for the check. The iterate must be close to the
/// discrete solution well below [`DMP_TOLERANCE`], so the residual bound is
/// tightened to `1e-12 sqrt(#dofs)`.
pub fn solver_options() -> SolverOptions {
    SolverOptions {
        tol_scale: 1e-12,
        ..Default::default()
    }
}

#[derive(Debug, Clone)]
pub struct DmpReport {
    pub name: String,
    pub dofs: usize,
    pub non_delaunay_edges: usize,
    pub min: f64,
    pub max: f64,
    pub lower: f64,
    pub upper: f64,
    pub stats: SolveStats,
}

impl DmpReport {
    pub fn holds(&self) -> bool {
        self.min >= self.lower - DMP_TOLERANCE && self.max <= self.upper + DMP_TOLERANCE
    }
}

/// Uniform meshes with 81 and 289 vertices and a perturbed, non-Delaunay
/// copy of the 289-vertex mesh.
pub fn dmp_meshes(problem: &Problem) -> Result<Vec<(String, Mesh)>> {
    let level3 = (0..3).fold(problem.initial_mesh(), |m, _| m.uniform_refine());
    let level4 = level3.uniform_refine();
    let perturbed = level4.perturb_interior(0.1, 7)?;
    Ok(vec![
        ("uniform-81".into(), level3),
        ("uniform-289".into(), level4),
        ("perturbed-289".into(), perturbed),
    ])
}

/// Solves `problem` on `mesh` and compares the extrema of the solution with
/// those of the Dirichlet data.
pub fn check_dmp(name: &str, problem: &Problem, mesh: &Mesh, opts: &SolverOptions) -> Result<DmpReport> {
    let sys = assemble(mesh, problem, crate::assembly::DEFAULT_QUAD_DEGREE)?;
    let u0 = dirichlet_values(mesh, problem);
    let sol = solve_nonlinear(&sys, mesh, opts, &u0)?;
    let data: Vec<f64> = (0..mesh.num_vertices())
        .filter(|&v| sys.dirichlet[v])
        .map(|v| sys.f_bc[v])
        .collect();
    let fold = |init: f64, f: fn(f64, f64) -> f64, xs: &[f64]| xs.iter().copied().fold(init, f);
    Ok(DmpReport {
        name: name.to_string(),
        dofs: mesh.num_dofs(),
        non_delaunay_edges: mesh.non_delaunay_edges().len(),
        min: fold(f64::INFINITY, f64::min, &sol.u),
        max: fold(f64::NEG_INFINITY, f64::max, &sol.u),
        lower: fold(f64::INFINITY, f64::min, &data).min(0.0),
        upper: fold(f64::NEG_INFINITY, f64::max, &data).max(0.0),
        stats: sol.stats,
    })
}

/// [`check_dmp`] for [`dmp_test`] on every mesh of [`dmp_meshes`].
pub fn run_dmp_suite(opts: &SolverOptions) -> Result<Vec<DmpReport>> {
    let problem = dmp_test();
    dmp_meshes(&problem)?
        .iter()
        .map(|(name, mesh)| check_dmp(name, &problem, mesh, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_meshes() {
        let meshes = dmp_meshes(&dmp_test()).unwrap();
        let dofs: Vec<usize> = meshes.iter().map(|(_, m)| m.num_dofs()).collect();
        assert_eq!(dofs, vec![81, 289, 289]);
        assert!(!meshes[2].1.non_delaunay_edges().is_empty());
    }

    #[test]
    fn coarse_solution_respects_bounds() {
        let p = dmp_test();
        let mesh = (0..2).fold(p.initial_mesh(), |m, _| m.uniform_refine());
        let r = check_dmp("coarse", &p, &mesh, &solver_options()).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 1.0));
        assert!(r.stats.converged);
        assert!(r.holds(), "{r:?}");
    }
}
