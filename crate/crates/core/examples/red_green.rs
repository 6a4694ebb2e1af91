//! Red-green refinement towards a corner, written as VTK files.
//!
//!     cargo run --example red_green -- out/
use std::fs::File;
use std::io::BufWriter;

use smuas::mesh::CellKind;
use smuas::vtk::write_vtk;
use smuas::Mesh;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1);
    let mut mesh = Mesh::unit_square_dirichlet().uniform_refine();
    for level in 0..8 {
        // refine the cells touching (1, 1)
        let marked: Vec<usize> = (0..mesh.num_cells())
            .filter(|&c| mesh.cell_points(c).iter().any(|p| p[0] == 1.0 && p[1] == 1.0))
            .collect();
        mesh = mesh.red_green_refine(&marked);
        let green = mesh.cells().iter().filter(|c| c.kind == CellKind::Green).count();
        println!(
            "level {level}: {:>4} vertices {:>4} cells ({green} green), min angle {:.2} deg, area {:.15}",
            mesh.num_vertices(),
            mesh.num_cells(),
            mesh.min_angle().to_degrees(),
            mesh.total_area()
        );
        if let Some(dir) = &dir {
            std::fs::create_dir_all(dir)?;
            let f = File::create(format!("{dir}/red_green_{level}.vtk"))?;
            write_vtk(BufWriter::new(f), &mesh, None, None)?;
        }
    }
    Ok(())
}
