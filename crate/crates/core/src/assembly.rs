//! P1 finite-element assembly.
//!
//! Row `i` of the stiffness matrix is the equation tested with `φ_i`:
//! `A[i][j] = a(φ_j, φ_i)`. The limiter reads raw entries of `A` including
//! Dirichlet rows, so Dirichlet conditions are imposed on a copy.

use crate::error::{Error, Result};
use crate::mesh::{EdgeTag, Mesh, Point};
use crate::problem::Problem;
use crate::quadrature::{LineRule, TriangleRule};
use crate::sparse::CsrMatrix;

pub const DEFAULT_QUAD_DEGREE: usize = 4;
const EDGE_QUAD_DEGREE: usize = 4;

type LayerFn = dyn Fn(&[Point; 3]) -> bool + Send + Sync;

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// Stiffness matrix without boundary conditions.
    pub a: CsrMatrix,
    pub f: Vec<f64>,
    /// `a` with Dirichlet rows replaced by identity rows.
    pub a_bc: CsrMatrix,
    /// `f` with Dirichlet entries replaced by `u_D(x_i)`.
    pub f_bc: Vec<f64>,
    pub dirichlet: Vec<bool>,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.f.len()
    }
}

/// Vertex-adjacency pattern (mesh edges plus the diagonal).
pub fn p1_pattern(mesh: &Mesh) -> CsrMatrix {
    let mut rows: Vec<Vec<usize>> = (0..mesh.num_vertices()).map(|i| vec![i]).collect();
    for e in mesh.edges() {
        let [a, b] = e.endpoints;
        rows[a].push(b);
        rows[b].push(a);
    }
    CsrMatrix::from_pattern(mesh.num_vertices(), &rows)
}

pub fn assemble(mesh: &Mesh, problem: &Problem, quad_degree: usize) -> Result<AssembledSystem> {
    problem.check_coercivity(mesh, quad_degree)?;
    let rule = TriangleRule::of_degree(quad_degree);
    let mut a = p1_pattern(mesh);
    let n = mesh.num_vertices();
    let mut f = vec![0.0; n];
    let eps = problem.epsilon;

    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c);
        let area = mesh.cell_area(c);
        if !(area > 0.0) {
            return Err(Error::DegenerateCell { cell: c, area });
        }
        let g = mesh.barycentric_gradients(c);
        let v = mesh.cells()[c].vertices;
        let mut local = [[0.0; 3]; 3];
        let mut load = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                local[i][j] = eps * area * (g[j][0] * g[i][0] + g[j][1] * g[i][1]);
            }
        }
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = TriangleRule::map(&pts, l);
            let wa = w * area;
            let b = (problem.convection)(x);
            let react = (problem.reaction)(x);
            let src = (problem.source)(x);
            for i in 0..3 {
                for j in 0..3 {
                    let conv = b[0] * g[j][0] + b[1] * g[j][1];
                    local[i][j] += wa * (conv * l[i] + react * l[j] * l[i]);
                }
                load[i] += wa * src * l[i];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                a.add(v[i], v[j], local[i][j]);
            }
            f[v[i]] += load[i];
        }
    }

    let line = LineRule::of_degree(EDGE_QUAD_DEGREE);
    for e in mesh.edges() {
        if e.tag != EdgeTag::Neumann {
            continue;
        }
        let [i, j] = e.endpoints;
        let (pi, pj) = (mesh.vertices()[i], mesh.vertices()[j]);
        for (&t, &w) in line.points.iter().zip(&line.weights) {
            let x = [pi[0] + t * (pj[0] - pi[0]), pi[1] + t * (pj[1] - pi[1])];
            let g = (problem.neumann)(x) * w * e.length;
            f[i] += g * (1.0 - t);
            f[j] += g * t;
        }
    }

    let dirichlet = mesh.dirichlet_mask().to_vec();
    let a_bc = a.with_identity_rows(&dirichlet);
    let mut f_bc = f.clone();
    for (i, p) in mesh.vertices().iter().enumerate() {
        if dirichlet[i] {
            f_bc[i] = (problem.dirichlet)(*p);
        }
    }
    Ok(AssembledSystem {
        a,
        f,
        a_bc,
        f_bc,
        dirichlet,
    })
}

/// Nodal interpolant of the Dirichlet datum on Dirichlet vertices, zero
/// elsewhere.
pub fn dirichlet_values(mesh: &Mesh, problem: &Problem) -> Vec<f64> {
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if mesh.is_dirichlet(i) {
                (problem.dirichlet)(*p)
            } else {
                0.0
            }
        })
        .collect()
}

/// Value of the P1 function with nodal values `u` at a point of `cell`.
pub fn p1_value(mesh: &Mesh, cell: usize, u: &[f64], x: Point) -> f64 {
    let pts = mesh.cell_points(cell);
    let g = mesh.barycentric_gradients(cell);
    let v = mesh.cells()[cell].vertices;
    let centroid = [
        (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0,
        (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0,
    ];
    (0..3)
        .map(|k| {
            let lam = 1.0 / 3.0 + g[k][0] * (x[0] - centroid[0]) + g[k][1] * (x[1] - centroid[1]);
            lam * u[v[k]]
        })
        .sum()
}

fn triangle_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs()
}

/// Integral over a triangle with a fixed rule.
pub fn integrate(pts: &[Point; 3], rule: &TriangleRule, f: &impl Fn(Point) -> f64) -> f64 {
    let area = triangle_area(pts);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| w * f(TriangleRule::map(pts, l)))
        .sum::<f64>()
        * area
}

const ADAPTIVE_REL_TOL: f64 = 1e-4;
const ADAPTIVE_MAX_DEPTH: usize = 16;

/// Integral by recursive red subdivision: a triangle is accepted once its
/// four children change the value by less than `1e-4` relative (or by less
/// than `abs_tol`, scaled with the sub-triangle area).
pub fn integrate_adaptive(
    pts: &[Point; 3],
    rule: &TriangleRule,
    f: &impl Fn(Point) -> f64,
    abs_tol: f64,
) -> f64 {
    let whole = integrate(pts, rule, f);
    let area = triangle_area(pts);
    refine_integral(pts, rule, f, whole, abs_tol / area.max(f64::MIN_POSITIVE), 0)
}

fn refine_integral(
    pts: &[Point; 3],
    rule: &TriangleRule,
    f: &impl Fn(Point) -> f64,
    whole: f64,
    abs_density: f64,
    depth: usize,
) -> f64 {
    let mid = |a: Point, b: Point| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let m01 = mid(pts[0], pts[1]);
    let m12 = mid(pts[1], pts[2]);
    let m20 = mid(pts[2], pts[0]);
    let children = [
        [pts[0], m01, m20],
        [m01, pts[1], m12],
        [m20, m12, pts[2]],
        [m01, m12, m20],
    ];
    let parts = children.map(|c| integrate(&c, rule, f));
    let sum: f64 = parts.iter().sum();
    let diff = (sum - whole).abs();
    if depth >= ADAPTIVE_MAX_DEPTH
        || diff <= ADAPTIVE_REL_TOL * sum.abs()
        || diff <= abs_density * triangle_area(pts)
    {
        return sum;
    }
    children
        .iter()
        .zip(parts)
        .map(|(c, part)| refine_integral(c, rule, f, part, abs_density, depth + 1))
        .sum()
}

/// `eps |∇v|^2 + sigma v^2` integrated over the mesh, where `v` is given per
/// cell as value and gradient. Cells selected by `layer` use adaptive
/// quadrature.
pub fn energy_norm_sq_with(
    mesh: &Mesh,
    epsilon: f64,
    sigma: f64,
    quad_degree: usize,
    layer: Option<&LayerFn>,
    v: impl Fn(usize, Point) -> (f64, [f64; 2]),
) -> f64 {
    let rule = TriangleRule::of_degree(quad_degree);
    (0..mesh.num_cells())
        .map(|c| {
            let pts = mesh.cell_points(c);
            let integrand = |x: Point| {
                let (val, g) = v(c, x);
                epsilon * (g[0] * g[0] + g[1] * g[1]) + sigma * val * val
            };
            match layer {
                Some(is_layer) if is_layer(&pts) => integrate_adaptive(&pts, &rule, &integrand, 1e-14),
                _ => integrate(&pts, &rule, &integrand),
            }
        })
        .sum()
}

/// `||v||_a^2 = eps ||∇v||^2 + sigma ||v||^2` for a P1 function.
pub fn energy_norm_sq_p1(mesh: &Mesh, epsilon: f64, sigma: f64, v: &[f64]) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if v.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: v.len(),
        });
    }
    let grads: Vec<[f64; 2]> = (0..mesh.num_cells()).map(|c| mesh.p1_gradient(c, v)).collect();
    Ok(energy_norm_sq_with(mesh, epsilon, sigma, 2, None, |c, x| {
        (p1_value(mesh, c, v, x), grads[c])
    }))
}

/// `||u - u_h||_a^2` against the problem's exact solution, or `None` when
/// the problem has none.
pub fn energy_error_sq(
    mesh: &Mesh,
    problem: &Problem,
    u_h: &[f64],
    quad_degree: usize,
) -> Result<Option<f64>> {
    if problem.sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(problem.sigma));
    }
    let Some(exact) = &problem.exact else {
        return Ok(None);
    };
    let grads: Vec<[f64; 2]> = (0..mesh.num_cells()).map(|c| mesh.p1_gradient(c, u_h)).collect();
    let value = energy_norm_sq_with(
        mesh,
        problem.epsilon,
        problem.sigma,
        quad_degree,
        problem.layer.as_deref(),
        |c, x| {
            let gu = (exact.gradient)(x);
            let gh = grads[c];
            (
                (exact.value)(x) - p1_value(mesh, c, u_h, x),
                [gu[0] - gh[0], gu[1] - gh[1]],
            )
        },
    );
    Ok(Some(value))
}
