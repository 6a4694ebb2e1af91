#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smuas::{Mesh, Problem};

/// Random conforming mesh with at most `max_dofs` vertices: a uniform mesh
/// with 25 or 81 vertices, optionally perturbed, then red-green refined at
/// random cells while the budget allows.
pub fn random_mesh(seed: u64, max_dofs: usize) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = if max_dofs >= 81 && rng.gen_bool(0.3) { 3 } else { 2 };
    let mut mesh = (0..level).fold(Mesh::unit_square_dirichlet(), |m, _| m.uniform_refine());
    if rng.gen_bool(0.6) {
        let fraction = rng.gen_range(0.0..0.25);
        if let Ok(m) = mesh.perturb_interior(fraction, rng.gen()) {
            mesh = m;
        }
    }
    for _ in 0..rng.gen_range(0..4) {
        let marked: Vec<usize> = (0..rng.gen_range(1..4))
            .map(|_| rng.gen_range(0..mesh.num_cells()))
            .collect();
        let next = mesh.red_green_refine(&marked);
        if next.num_dofs() > max_dofs {
            break;
        }
        mesh = next;
    }
    mesh
}

/// Constant-coefficient problem with random data.
pub fn random_problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let eps = 10f64.powf(rng.gen_range(-4.0..0.0));
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let speed = rng.gen_range(0.0..3.0);
    let b = [speed * angle.cos(), speed * angle.sin()];
    let c = rng.gen_range(0.1..2.0);
    Problem::new("random", eps, c)
        .with_convection(move |_| b)
        .with_divergence(|_| 0.0)
        .with_reaction(move |_| c)
        .with_source(|p| 1.0 + p[0] * p[1])
}

pub fn random_vector(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
