//! Legacy ASCII VTK output and input for triangle meshes with P1 data.
//!
//! Values are written with 17 significant digits so a written solution
//! reads back bit-identically.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, Mesh, Point};

const VTK_TRIANGLE: u32 = 5;

/// Writes `mesh` as an unstructured grid, with optional nodal field `u` and
/// cell field `eta`.
pub fn write_vtk(mut w: impl Write, mesh: &Mesh, u: Option<&[f64]>, eta: Option<&[f64]>) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "smuas mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} float", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {} {}", mesh.num_cells(), 4 * mesh.num_cells())?;
    for c in mesh.cells() {
        let [a, b, d] = c.vertices;
        writeln!(w, "3 {a} {b} {d}")?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.num_cells())?;
    for _ in 0..mesh.num_cells() {
        writeln!(w, "{VTK_TRIANGLE}")?;
    }
    if let Some(u) = u {
        writeln!(w, "POINT_DATA {}", mesh.num_vertices())?;
        writeln!(w, "SCALARS u double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in u {
            writeln!(w, "{v:.16e}")?;
        }
    }
    if let Some(eta) = eta {
        writeln!(w, "CELL_DATA {}", mesh.num_cells())?;
        writeln!(w, "SCALARS eta double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in eta {
            writeln!(w, "{v:.16e}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Nodal field `u`, if present.
    pub u: Option<Vec<f64>>,
}

impl VtkData {
    /// Rebuilds the mesh; boundary edges are tagged by `classify`.
    pub fn to_mesh(&self, classify: impl Fn(Point) -> BoundaryKind) -> Result<Mesh> {
        Mesh::from_triangles(self.points.clone(), &self.triangles, classify)
    }
}

struct Tokens<'a> {
    inner: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("expected {what}, got {tok:?}")))
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let tok = self.next(word)?;
        if tok.eq_ignore_ascii_case(word) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {word}, got {tok:?}")))
        }
    }
}

/// Reads files produced by [`write_vtk`]. Only triangle cells are accepted.
pub fn read_vtk(text: &str) -> Result<VtkData> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("# vtk DataFile") {
        return Err(Error::Parse("missing VTK header".into()));
    }
    lines.next();
    let body: Vec<&str> = lines.collect();
    let body = body.join("\n");
    let mut t = Tokens {
        inner: body.split_whitespace().peekable(),
    };
    t.expect("ASCII")?;
    t.expect("DATASET")?;
    t.expect("UNSTRUCTURED_GRID")?;

    let mut points = Vec::new();
    let mut triangles = Vec::new();
    let mut u = None;
    while let Some(section) = t.inner.next() {
        match section.to_ascii_uppercase().as_str() {
            "POINTS" => {
                let n: usize = t.number("point count")?;
                t.next("point type")?;
                points = (0..n)
                    .map(|_| {
                        let x = t.number("x")?;
                        let y = t.number("y")?;
                        t.number::<f64>("z")?;
                        Ok([x, y])
                    })
                    .collect::<Result<_>>()?;
            }
            "CELLS" => {
                let n: usize = t.number("cell count")?;
                t.number::<usize>("cell list size")?;
                triangles = (0..n)
                    .map(|_| {
                        let k: usize = t.number("cell size")?;
                        if k != 3 {
                            return Err(Error::Parse(format!("cell with {k} vertices")));
                        }
                        let tri = [t.number("id")?, t.number("id")?, t.number("id")?];
                        if tri.iter().any(|&v| v >= points.len()) {
                            return Err(Error::Parse("cell refers to missing point".into()));
                        }
                        Ok(tri)
                    })
                    .collect::<Result<_>>()?;
            }
            "CELL_TYPES" => {
                let n: usize = t.number("cell type count")?;
                for _ in 0..n {
                    let ty: u32 = t.number("cell type")?;
                    if ty != VTK_TRIANGLE {
                        return Err(Error::Parse(format!("unsupported cell type {ty}")));
                    }
                }
            }
            "POINT_DATA" | "CELL_DATA" => {
                let n: usize = t.number("data count")?;
                let point = section.eq_ignore_ascii_case("POINT_DATA");
                while t.inner.peek().is_some_and(|s| s.eq_ignore_ascii_case("SCALARS")) {
                    t.next("SCALARS")?;
                    let name = t.next("field name")?;
                    t.next("field type")?;
                    if t.inner.peek().is_some_and(|s| s.parse::<usize>().is_ok()) {
                        t.next("component count")?;
                    }
                    t.expect("LOOKUP_TABLE")?;
                    t.next("table name")?;
                    let values = (0..n).map(|_| t.number("value")).collect::<Result<Vec<f64>>>()?;
                    if point && name == "u" {
                        u = Some(values);
                    }
                }
            }
            other => return Err(Error::Parse(format!("unsupported section {other}"))),
        }
    }
    if u.as_ref().is_some_and(|u| u.len() != points.len()) {
        return Err(Error::Parse("point data length differs from point count".into()));
    }
    Ok(VtkData { points, triangles, u })
}
