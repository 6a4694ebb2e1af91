//! Discrete maximum principle for a problem with discontinuous boundary
//! data and eps = 1e-5, on two uniform meshes and one perturbed
//! non-Delaunay mesh.
use smuas::dmp::{run_dmp_suite, solver_options};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for r in run_dmp_suite(&solver_options())? {
        println!(
            "{:<14} dofs {:>4}  non-Delaunay edges {:>3}  u in [{:.3e}, 1 + {:.3e}]  data in [{}, {}]  {}",
            r.name,
            r.dofs,
            r.non_delaunay_edges,
            r.min,
            r.max - 1.0,
            r.lower,
            r.upper,
            if r.holds() { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
