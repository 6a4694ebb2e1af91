//! Adaptive solution of the boundary-layer benchmark
//!
//! -1e-3 Δu + (2, 1)·∇u + u = f on the unit square, u = 0 on the boundary,
//! with an exponential layer at x = 1. Prints one line per step of the
//! solve -> estimate -> mark -> refine loop.
//!
//!     cargo run --release --example boundary_layer -- --dof-stop 20000
use clap::Parser;
use smuas::problem::known_boundary_layer;
use smuas::{adaptive_loop, RunConfig};

#[derive(Parser)]
struct Args {
    /// Stop after the first step with at least this many dofs.
    #[arg(long, default_value_t = 100_000)]
    dof_stop: usize,
    /// Maximum-marking threshold.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let problem = known_boundary_layer();
    let cfg = RunConfig {
        dof_stop: args.dof_stop,
        theta: args.theta,
        ..RunConfig::default()
    };
    let run = adaptive_loop(&problem, &cfg)?;

    println!(
        "{:>4} {:>8} {:>12} {:>12} {:>8} {:>6}",
        "step", "dofs", "error", "eta", "eff", "iters"
    );
    for s in &run.steps {
        println!(
            "{:>4} {:>8} {:>12.4e} {:>12.4e} {:>8.2} {:>6}",
            s.step,
            s.dofs,
            s.energy_error.unwrap_or(f64::NAN),
            s.eta,
            s.efficiency_index().unwrap_or(f64::NAN),
            s.iterations + s.rejections
        );
    }

    // O(h) = O(dofs^-1/2) is optimal for P1 in the energy norm
    let tail = &run.steps[run.steps.len().saturating_sub(5)..];
    if tail.len() >= 2 {
        let (a, b) = (&tail[0], &tail[tail.len() - 1]);
        let rate =
            (b.energy_error.unwrap() / a.energy_error.unwrap()).ln() / (b.dofs as f64 / a.dofs as f64).ln();
        println!("error rate over the last {} steps: dofs^{rate:.3}", tail.len());
    }
    Ok(())
}
