//! Conforming triangulations of polygonal domains with uniform and red-green
//! refinement.
//!
//! Meshes are immutable: every refinement returns a new [`Mesh`]. Vertex ids
//! of existing vertices never change under refinement; new midpoint vertices
//! are appended and remember the edge they split, which is what solution
//! prolongation uses.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Boundary condition type of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl From<BoundaryKind> for EdgeTag {
    fn from(kind: BoundaryKind) -> Self {
        match kind {
            BoundaryKind::Dirichlet => EdgeTag::Dirichlet,
            BoundaryKind::Neumann => EdgeTag::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Regular,
    Green,
}

/// The triangle a green cell was cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreenParent {
    /// Parent corners, counter-clockwise.
    pub vertices: [usize; 3],
    /// Endpoints of the bisected parent edge.
    pub split: [usize; 2],
    /// Midpoint vertex of the bisected edge.
    pub midpoint: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counter-clockwise vertex ids.
    pub vertices: [usize; 3],
    pub kind: CellKind,
    pub parent: Option<GreenParent>,
}

impl Cell {
    pub fn regular(vertices: [usize; 3]) -> Self {
        Self {
            vertices,
            kind: CellKind::Regular,
            parent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Vertex ids, smaller first. The tangent points from the first to the
    /// second endpoint.
    pub endpoints: [usize; 2],
    pub length: f64,
    /// First adjacent cell, and the second one for interior edges.
    pub cells: (usize, Option<usize>),
    pub tag: EdgeTag,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    /// `cell_edges[c][k]` is the edge from local vertex `k` to `k + 1`.
    cell_edges: Vec<[usize; 3]>,
    edge_index: HashMap<(usize, usize), usize>,
    vertex_cells: Vec<Vec<usize>>,
    dirichlet: Vec<bool>,
    vertex_parents: Vec<Option<[usize; 2]>>,
    generation: usize,
}

impl Mesh {
    /// Builds a mesh from raw triangles. Clockwise triangles are reoriented;
    /// boundary edges are tagged by `classify` evaluated at their midpoints.
    pub fn from_triangles(
        vertices: Vec<Point>,
        triangles: &[[usize; 3]],
        classify: impl Fn(Point) -> BoundaryKind,
    ) -> Result<Self> {
        let cells = triangles
            .iter()
            .map(|t| {
                let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
                if signed_area(&p) < 0.0 {
                    Cell::regular([t[0], t[2], t[1]])
                } else {
                    Cell::regular(*t)
                }
            })
            .collect();
        let nv = vertices.len();
        let verts = vertices.clone();
        Self::build(vertices, cells, vec![None; nv], 0, |a, b| {
            let m = [
                0.5 * (verts[a][0] + verts[b][0]),
                0.5 * (verts[a][1] + verts[b][1]),
            ];
            Some(classify(m))
        })
    }

    /// The unit square split into two triangles by the diagonal from (0,0)
    /// to (1,1).
    pub fn unit_square(classify: impl Fn(Point) -> BoundaryKind) -> Result<Self> {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        Self::from_triangles(vertices, &[[0, 1, 2], [0, 2, 3]], classify)
    }

    /// [`Mesh::unit_square`] with the whole boundary Dirichlet.
    pub fn unit_square_dirichlet() -> Self {
        Self::unit_square(|_| BoundaryKind::Dirichlet).expect("unit square is valid")
    }

    fn build(
        vertices: Vec<Point>,
        cells: Vec<Cell>,
        vertex_parents: Vec<Option<[usize; 2]>>,
        generation: usize,
        boundary_tag: impl Fn(usize, usize) -> Option<BoundaryKind>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (c, cell) in cells.iter().enumerate() {
            let [a, b, d] = cell.vertices;
            if a == b || b == d || a == d || a >= nv || b >= nv || d >= nv {
                return Err(Error::DegenerateCell { cell: c, area: 0.0 });
            }
            let area = signed_area(&[vertices[a], vertices[b], vertices[d]]);
            if !(area > 0.0) {
                return Err(Error::DegenerateCell { cell: c, area });
            }
        }

        let mut edges: Vec<Edge> = Vec::with_capacity(cells.len() * 3 / 2 + 2);
        let mut edge_index = HashMap::with_capacity(edges.capacity());
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = [0; 3];
            for k in 0..3 {
                let a = cell.vertices[k];
                let b = cell.vertices[(k + 1) % 3];
                let key = edge_key(a, b);
                let e = *edge_index.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[key.0], vertices[key.1]);
                    edges.push(Edge {
                        endpoints: [key.0, key.1],
                        length: (pb[0] - pa[0]).hypot(pb[1] - pa[1]),
                        cells: (c, None),
                        tag: EdgeTag::Interior,
                    });
                    edges.len() - 1
                });
                if edges[e].cells.0 != c {
                    if edges[e].cells.1.is_some() {
                        return Err(Error::NonConforming(format!(
                            "edge ({}, {}) shared by more than two cells",
                            key.0, key.1
                        )));
                    }
                    edges[e].cells.1 = Some(c);
                }
                local[k] = e;
            }
            cell_edges.push(local);
        }

        let mut dirichlet = vec![false; nv];
        for edge in &mut edges {
            if edge.is_boundary() {
                let [a, b] = edge.endpoints;
                let kind = boundary_tag(a, b).ok_or_else(|| {
                    Error::NonConforming(format!("hanging edge ({a}, {b}) inside the domain"))
                })?;
                edge.tag = kind.into();
                if kind == BoundaryKind::Dirichlet {
                    dirichlet[a] = true;
                    dirichlet[b] = true;
                }
            }
        }

        let mut vertex_cells = vec![Vec::new(); nv];
        for (c, cell) in cells.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(c);
            }
        }

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            edge_index,
            vertex_cells,
            dirichlet,
            vertex_parents,
            generation,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of degrees of freedom, Dirichlet vertices included.
    pub fn num_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn cell_edges(&self, cell: usize) -> [usize; 3] {
        self.cell_edges[cell]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&edge_key(a, b)).copied()
    }

    /// Cells incident to a vertex, in increasing id order.
    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn is_dirichlet(&self, v: usize) -> bool {
        self.dirichlet[v]
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn dirichlet_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.dirichlet[v]).collect()
    }

    /// Endpoints of the edge a vertex was created on, if it is a midpoint.
    pub fn vertex_parent(&self, v: usize) -> Option<[usize; 2]> {
        self.vertex_parents[v]
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        let [a, b, c] = self.cells[cell].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.cell_points(cell))
    }

    /// Longest edge of the cell.
    pub fn cell_diameter(&self, cell: usize) -> f64 {
        self.cell_edges[cell]
            .iter()
            .map(|&e| self.edges[e].length)
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Gradients of the three barycentric coordinate functions on a cell.
    pub fn barycentric_gradients(&self, cell: usize) -> [[f64; 2]; 3] {
        barycentric_gradients(&self.cell_points(cell))
    }

    /// Gradient of the P1 interpolant of nodal values `u` on a cell.
    pub fn p1_gradient(&self, cell: usize, u: &[f64]) -> [f64; 2] {
        let g = self.barycentric_gradients(cell);
        let v = self.cells[cell].vertices;
        // differences against vertex 0 make constants exact
        let d1 = u[v[1]] - u[v[0]];
        let d2 = u[v[2]] - u[v[0]];
        [d1 * g[1][0] + d2 * g[2][0], d1 * g[1][1] + d2 * g[2][1]]
    }

    /// Smallest interior angle (radians) over all cells.
    pub fn min_angle(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| triangle_min_angle(&self.cell_points(c)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Red-refines every cell.
    pub fn uniform_refine(&self) -> Mesh {
        let all: Vec<usize> = (0..self.cells.len()).collect();
        self.red_green_refine(&all)
    }

    /// Red-green refinement of the marked cells.
    ///
    /// Green families are first replaced by their parent; a parent is
    /// red-refined when any of its children is marked. The closure promotes
    /// every triangle with two or more refined edges to red and
    /// green-bisects triangles with exactly one. Passes repeat until no edge
    /// carries a hanging midpoint.
    pub fn red_green_refine(&self, marked: &[usize]) -> Mesh {
        if marked.is_empty() {
            return self.clone();
        }
        let mut is_marked = vec![false; self.cells.len()];
        for &c in marked {
            is_marked[c] = true;
        }
        let mut draft = Draft {
            vertices: self.vertices.clone(),
            vertex_parents: self.vertex_parents.clone(),
            cells: self.cells.clone(),
        };
        loop {
            draft = draft.refine_pass(&is_marked);
            is_marked = draft.hanging_cells();
            if !is_marked.contains(&true) {
                break;
            }
        }

        let Draft {
            vertices,
            vertex_parents,
            cells,
        } = draft;
        let lookup = |a: usize, b: usize| {
            self.edge_between(a, b).and_then(|e| match self.edges[e].tag {
                EdgeTag::Dirichlet => Some(BoundaryKind::Dirichlet),
                EdgeTag::Neumann => Some(BoundaryKind::Neumann),
                EdgeTag::Interior => None,
            })
        };
        // a sub-edge inherits the tag of the coarsest edge it lies on
        let tag_of = |a: usize, b: usize| -> Option<BoundaryKind> {
            let (mut a, mut b) = (a, b);
            loop {
                if let Some(kind) = lookup(a, b) {
                    return Some(kind);
                }
                let step = [(a, b), (b, a)].into_iter().find_map(|(m, other)| {
                    vertex_parents[m]
                        .filter(|[p, q]| other == *p || other == *q)
                        .map(|[p, q]| (p, q))
                });
                (a, b) = step?;
            }
        };

        Mesh::build(
            vertices,
            cells,
            vertex_parents.clone(),
            self.generation + 1,
            tag_of,
        )
        .expect("red-green refinement produces a conforming mesh")
    }

    /// Moves every non-boundary vertex by a random offset of at most
    /// `fraction` times its shortest incident edge in each coordinate.
    pub fn perturb_interior(&self, fraction: f64, seed: u64) -> Result<Mesh> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut on_boundary = vec![false; self.vertices.len()];
        let mut shortest = vec![f64::INFINITY; self.vertices.len()];
        for e in &self.edges {
            for &v in &e.endpoints {
                shortest[v] = shortest[v].min(e.length);
                if e.is_boundary() {
                    on_boundary[v] = true;
                }
            }
        }
        let mut vertices = self.vertices.clone();
        for (v, p) in vertices.iter_mut().enumerate() {
            if !on_boundary[v] {
                let h = fraction * shortest[v];
                p[0] += rng.gen_range(-h..=h);
                p[1] += rng.gen_range(-h..=h);
            }
        }
        let tags: HashMap<(usize, usize), BoundaryKind> = self
            .edges
            .iter()
            .filter_map(|e| match e.tag {
                EdgeTag::Dirichlet => {
                    Some((edge_key(e.endpoints[0], e.endpoints[1]), BoundaryKind::Dirichlet))
                }
                EdgeTag::Neumann => Some((edge_key(e.endpoints[0], e.endpoints[1]), BoundaryKind::Neumann)),
                EdgeTag::Interior => None,
            })
            .collect();
        Mesh::build(
            vertices,
            self.cells.clone(),
            self.vertex_parents.clone(),
            self.generation,
            |a, b| tags.get(&edge_key(a, b)).copied(),
        )
    }

    /// Interior edges violating the Delaunay angle condition (opposite angles
    /// summing to more than pi).
    pub fn non_delaunay_edges(&self) -> Vec<usize> {
        let opposite_angle = |cell: usize, e: &Edge| {
            let v = self.cells[cell].vertices;
            let apex = *v
                .iter()
                .find(|&&x| x != e.endpoints[0] && x != e.endpoints[1])
                .unwrap();
            angle_at(
                self.vertices[apex],
                self.vertices[e.endpoints[0]],
                self.vertices[e.endpoints[1]],
            )
        };
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let c2 = e.cells.1?;
                let sum = opposite_angle(e.cells.0, e) + opposite_angle(c2, e);
                (sum > std::f64::consts::PI + 1e-12).then_some(i)
            })
            .collect()
    }
}

pub fn barycentric_gradients(p: &[Point; 3]) -> [[f64; 2]; 3] {
    let two_area = 2.0 * signed_area(p);
    // grad(lambda_k) = perp(p_{k+2} - p_{k+1}) / (2|K|), rotated inward.
    std::array::from_fn(|k| {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area]
    })
}

/// Cell soup used between refinement passes; may be non-conforming.
struct Draft {
    vertices: Vec<Point>,
    vertex_parents: Vec<Option<[usize; 2]>>,
    cells: Vec<Cell>,
}

impl Draft {
    fn midpoints(&self) -> HashMap<(usize, usize), usize> {
        self.vertex_parents
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|[a, b]| (edge_key(a, b), v)))
            .collect()
    }

    /// Cells with an edge whose midpoint already exists.
    fn hanging_cells(&self) -> Vec<bool> {
        let mids = self.midpoints();
        self.cells
            .iter()
            .map(|c| {
                let v = c.vertices;
                (0..3).any(|k| mids.contains_key(&edge_key(v[k], v[(k + 1) % 3])))
            })
            .collect()
    }

    fn refine_pass(self, is_marked: &[bool]) -> Draft {
        let existing = self.midpoints();

        // Un-greened base triangles.
        struct Base {
            vertices: [usize; 3],
            source: Option<usize>,
            marked: bool,
        }
        let mut base: Vec<Base> = Vec::with_capacity(self.cells.len());
        let mut parent_slot: HashMap<[usize; 3], usize> = HashMap::new();
        // edge -> midpoint vertex (None until allocated)
        let mut refined: HashMap<(usize, usize), Option<usize>> = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            match (cell.kind, cell.parent) {
                (CellKind::Green, Some(parent)) => {
                    let mut key = parent.vertices;
                    key.sort_unstable();
                    let slot = *parent_slot.entry(key).or_insert_with(|| {
                        base.push(Base {
                            vertices: parent.vertices,
                            source: None,
                            marked: false,
                        });
                        base.len() - 1
                    });
                    base[slot].marked |= is_marked[c];
                }
                _ => base.push(Base {
                    vertices: cell.vertices,
                    source: Some(c),
                    marked: is_marked[c],
                }),
            }
        }
        for b in &base {
            for k in 0..3 {
                let key = edge_key(b.vertices[k], b.vertices[(k + 1) % 3]);
                if let Some(&m) = existing.get(&key) {
                    refined.insert(key, Some(m));
                } else if b.marked {
                    refined.entry(key).or_insert(None);
                }
            }
        }

        // Closure: triangles with two refined edges get the third as well.
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, b) in base.iter().enumerate() {
            for k in 0..3 {
                edge_tris
                    .entry(edge_key(b.vertices[k], b.vertices[(k + 1) % 3]))
                    .or_default()
                    .push(t);
            }
        }
        let mut queue: Vec<usize> = (0..base.len()).collect();
        while let Some(t) = queue.pop() {
            let v = base[t].vertices;
            let keys = [edge_key(v[0], v[1]), edge_key(v[1], v[2]), edge_key(v[2], v[0])];
            let count = keys.iter().filter(|k| refined.contains_key(k)).count();
            if count == 2 {
                for key in keys {
                    if let Entry::Vacant(slot) = refined.entry(key) {
                        slot.insert(None);
                        queue.extend(edge_tris[&key].iter().copied().filter(|&o| o != t));
                    }
                }
            }
        }

        let Draft {
            mut vertices,
            mut vertex_parents,
            cells: old_cells,
        } = self;
        for b in &base {
            for k in 0..3 {
                let (a, c) = (b.vertices[k], b.vertices[(k + 1) % 3]);
                if let Some(slot) = refined.get_mut(&edge_key(a, c)) {
                    if slot.is_none() {
                        let (pa, pc) = (vertices[a], vertices[c]);
                        vertices.push([0.5 * (pa[0] + pc[0]), 0.5 * (pa[1] + pc[1])]);
                        vertex_parents.push(Some([a.min(c), a.max(c)]));
                        *slot = Some(vertices.len() - 1);
                    }
                }
            }
        }

        let mut cells = Vec::with_capacity(old_cells.len() * 2);
        for b in &base {
            let v = b.vertices;
            let mids: [Option<usize>; 3] = std::array::from_fn(|k| {
                refined
                    .get(&edge_key(v[k], v[(k + 1) % 3]))
                    .map(|m| m.expect("midpoints allocated"))
            });
            match mids.iter().filter(|m| m.is_some()).count() {
                0 => match b.source {
                    Some(c) => cells.push(old_cells[c].clone()),
                    None => cells.push(Cell::regular(v)),
                },
                1 => {
                    let k = mids.iter().position(Option::is_some).unwrap();
                    let m = mids[k].unwrap();
                    let (p, q, apex) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
                    let parent = GreenParent {
                        vertices: v,
                        split: [p, q],
                        midpoint: m,
                    };
                    for verts in [[apex, p, m], [apex, m, q]] {
                        cells.push(Cell {
                            vertices: verts,
                            kind: CellKind::Green,
                            parent: Some(parent),
                        });
                    }
                }
                3 => {
                    let [m01, m12, m20] = mids.map(Option::unwrap);
                    cells.push(Cell::regular([v[0], m01, m20]));
                    cells.push(Cell::regular([m01, v[1], m12]));
                    cells.push(Cell::regular([m20, m12, v[2]]));
                    cells.push(Cell::regular([m01, m12, m20]));
                }
                _ => unreachable!("closure leaves no triangle with two refined edges"),
            }
        }
        Draft {
            vertices,
            vertex_parents,
            cells,
        }
    }
}

fn angle_at(apex: Point, a: Point, b: Point) -> f64 {
    let u = [a[0] - apex[0], a[1] - apex[1]];
    let v = [b[0] - apex[0], b[1] - apex[1]];
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot)
}

pub fn triangle_min_angle(p: &[Point; 3]) -> f64 {
    (0..3)
        .map(|k| angle_at(p[k], p[(k + 1) % 3], p[(k + 2) % 3]))
        .fold(f64::INFINITY, f64::min)
}
