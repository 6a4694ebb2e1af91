//! Contributions to the error estimator on uniform meshes, and the cells
//! with the largest local indicators.
use smuas::assembly::{assemble, dirichlet_values};
use smuas::problem::known_boundary_layer;
use smuas::{compute_eta, solve_nonlinear, EstimatorConfig, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = known_boundary_layer();
    let mut mesh = (0..2).fold(problem.initial_mesh(), |m, _| m.uniform_refine());
    let mut last = None;
    println!(
        "{:>6} {:>11} {:>11} {:>11} {:>11} {:>11} {:>7}",
        "dofs", "eta", "eta1", "eta2", "eta3", "error", "eff"
    );
    for _ in 0..4 {
        let sys = assemble(&mesh, &problem, 4)?;
        let sol = solve_nonlinear(
            &sys,
            &mesh,
            &SolverOptions::default(),
            &dirichlet_values(&mesh, &problem),
        )?;
        let r = compute_eta(
            &mesh,
            &problem,
            &sol.u,
            &sol.stabilization,
            &EstimatorConfig::default(),
        )?;
        println!(
            "{:>6} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>7.2}",
            mesh.num_dofs(),
            r.eta,
            r.eta1,
            r.eta2,
            r.eta3,
            r.energy_error.unwrap(),
            r.efficiency_index().unwrap()
        );
        let next = mesh.uniform_refine();
        last = Some((mesh, r));
        mesh = next;
    }

    let (mesh, r) = last.unwrap();
    let mut order: Vec<usize> = (0..r.per_cell.len()).collect();
    order.sort_by(|&a, &b| r.per_cell[b].total_cmp(&r.per_cell[a]));
    println!("largest indicators on {} dofs:", mesh.num_dofs());
    for &c in order.iter().take(5) {
        let p = mesh.cell_points(c);
        let (x, y) = (
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        );
        println!("  cell {c:>4} at ({x:.3}, {y:.3})  eta_K {:.4e}", r.per_cell[c]);
    }
    Ok(())
}
