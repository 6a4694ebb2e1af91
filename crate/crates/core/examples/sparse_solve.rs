//! Sparse assembly and LU solve for -Δu = 1 on the unit square, with the
//! matrix written in MatrixMarket format.
//!
//!     cargo run --example sparse_solve -- poisson.mtx
use std::fs::File;
use std::io::BufWriter;

use smuas::assembly::assemble;
use smuas::sparse::{norm2, LuFactorization};
use smuas::{Mesh, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::new("poisson", 1.0, 0.0).with_source(|_| 1.0);
    let mesh = (0..5).fold(Mesh::unit_square_dirichlet(), |m, _| m.uniform_refine());
    let sys = assemble(&mesh, &problem, 2)?;
    println!("{} unknowns, {} nonzeros", sys.a_bc.dim(), sys.a_bc.nnz());

    let lu = LuFactorization::new(&sys.a_bc)?;
    let u = lu.solve(&sys.f_bc)?;
    let mut r = sys.a_bc.matvec(&u)?;
    for (ri, fi) in r.iter_mut().zip(&sys.f_bc) {
        *ri -= fi;
    }
    let centre = mesh
        .vertices()
        .iter()
        .position(|p| p[0] == 0.5 && p[1] == 0.5)
        .expect("centre vertex");
    // series solution of -Δu = 1 at the centre: 0.0736713532814...
    println!("u(0.5, 0.5) = {:.6}, residual {:.2e}", u[centre], norm2(&r));

    if let Some(path) = std::env::args().nth(1) {
        sys.a_bc
            .write_matrix_market(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
