//! Limiters and the stabilization matrix for the benchmark on a coarse mesh.
use smuas::assembly::{assemble, dirichlet_values};
use smuas::problem::known_boundary_layer;
use smuas::stabilization::{bilinear_edge_form, bilinear_matrix_form, edge_coefficients};
use smuas::{solve_nonlinear, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = known_boundary_layer();
    let mesh = (0..3).fold(problem.initial_mesh(), |m, _| m.uniform_refine());
    let sys = assemble(&mesh, &problem, 4)?;
    let sol = solve_nonlinear(
        &sys,
        &mesh,
        &SolverOptions::default(),
        &dirichlet_values(&mesh, &problem),
    )?;
    let b = &sol.stabilization;

    // histogram of alpha_ij over off-diagonal entries
    let mut bins = [0usize; 5];
    for i in 0..sys.dim() {
        for k in sys.a.row_range(i) {
            if sys.a.col_idx()[k] != i {
                let a = sol.limiters.alpha[k];
                bins[((a * 5.0) as usize).min(4)] += 1;
            }
        }
    }
    println!("alpha histogram on {} dofs:", mesh.num_dofs());
    for (k, n) in bins.iter().enumerate() {
        println!(
            "  [{:.1}, {:.1}{} {n}",
            k as f64 / 5.0,
            (k + 1) as f64 / 5.0,
            if k == 4 { "]" } else { ")" }
        );
    }

    let mut asym: f64 = 0.0;
    let mut row_sum: f64 = 0.0;
    for i in 0..b.dim() {
        let mut s = 0.0;
        for k in b.row_range(i) {
            let j = b.col_idx()[k];
            asym = asym.max((b.values()[k] - b.get(j, i)).abs());
            s += b.values()[k];
        }
        row_sum = row_sum.max(s.abs());
    }
    println!("max |b_ij - b_ji| = {asym:.2e}, max |row sum| = {row_sum:.2e}");

    let b_edges = edge_coefficients(b, &mesh)?;
    let u = &sol.u;
    println!(
        "b(u; u, u): matrix form {:.12e}, edge form {:.12e}",
        bilinear_matrix_form(b, u, u),
        bilinear_edge_form(&mesh, &b_edges, u, u)
    );
    Ok(())
}
