//! SMUAS against the plain Galerkin method on uniformly refined meshes.
//!
//! The Galerkin solution oscillates in front of the boundary layer; the
//! stabilized one stays within the range of the exact solution.
use smuas::assembly::{assemble, dirichlet_values, energy_error_sq};
use smuas::problem::known_boundary_layer;
use smuas::solver::Stabilization;
use smuas::{solve_nonlinear, Mesh, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = known_boundary_layer();
    let mut mesh: Mesh = problem.initial_mesh().uniform_refine().uniform_refine();

    println!(
        "{:>6} {:>14} {:>10} {:>14} {:>10} {:>6}",
        "dofs", "smuas error", "min u_h", "galerkin error", "min u_h", "iters"
    );
    for _ in 0..5 {
        let sys = assemble(&mesh, &problem, 4)?;
        let u0 = dirichlet_values(&mesh, &problem);
        let stab = solve_nonlinear(&sys, &mesh, &SolverOptions::default(), &u0)?;
        let galerkin = solve_nonlinear(
            &sys,
            &mesh,
            &SolverOptions {
                stabilization: Stabilization::None,
                ..Default::default()
            },
            &u0,
        )?;
        let err = |u: &[f64]| energy_error_sq(&mesh, &problem, u, 4).map(|e| e.unwrap().sqrt());
        let min = |u: &[f64]| u.iter().copied().fold(f64::INFINITY, f64::min);
        println!(
            "{:>6} {:>14.6e} {:>10.2e} {:>14.6e} {:>10.2e} {:>6}",
            mesh.num_dofs(),
            err(&stab.u)?,
            min(&stab.u),
            err(&galerkin.u)?,
            min(&galerkin.u),
            stab.stats.iterations + stab.stats.rejections
        );
        mesh = mesh.uniform_refine();
    }
    Ok(())
}
