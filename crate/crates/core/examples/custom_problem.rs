//! A user-defined problem: a smooth manufactured solution with a Neumann
//! outflow boundary, solved adaptively.
use std::f64::consts::PI;

use smuas::mesh::BoundaryKind;
use smuas::{adaptive_loop, Problem, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 1e-2;
    let b = [1.0, 0.5];
    let u = |p: [f64; 2]| (PI * p[0]).sin() * (PI * p[1]).sin();
    let grad = move |p: [f64; 2]| {
        [
            PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
            PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
        ]
    };
    let problem = Problem::new("smooth", eps, 1.0)
        .with_convection(move |_| b)
        .with_divergence(|_| 0.0)
        .with_reaction(|_| 1.0)
        .with_source(move |p| {
            let g = grad(p);
            2.0 * eps * PI * PI * u(p) + b[0] * g[0] + b[1] * g[1] + u(p)
        })
        // eps ∂u/∂n on x = 1, where n = (1, 0)
        .with_neumann(move |p| eps * grad(p)[0])
        .with_boundary(|p| {
            if p[0] > 1.0 - 1e-12 {
                BoundaryKind::Neumann
            } else {
                BoundaryKind::Dirichlet
            }
        })
        .with_exact(u, grad);

    let cfg = RunConfig {
        problem: problem.name.clone(),
        dof_stop: 20_000,
        ..RunConfig::default()
    };
    for s in adaptive_loop(&problem, &cfg)?.steps {
        println!(
            "dofs {:>6}  error {:.4e}  eta {:.4e}  eff {:.2}",
            s.dofs,
            s.energy_error.unwrap(),
            s.eta,
            s.efficiency_index().unwrap()
        );
    }
    Ok(())
}
