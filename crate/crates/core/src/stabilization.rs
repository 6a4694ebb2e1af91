//! Algebraic stabilization: limiters and the nonlinear stabilization matrix.
//!
//! The stabilization matrix is
//!
//! ```text
//! b_ij(u) = -max{(1 - α_ij) a_ij, 0, (1 - α_ji) a_ji},   i != j
//! b_ii(u) = -Σ_{j != i} b_ij(u)
//! ```
//!
//! and is therefore symmetric with non-positive off-diagonal entries and
//! zero row sums, whatever limiter produced `α`. Limiters implement
//! [`Limiter`]; [`Smuas`] is the symmetric monotone upwind-type limiter.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
fn neg(x: f64) -> f64 {
    x.min(0.0)
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// The cell `K_i^j`: a cell incident to `x_i` whose closed angular sector at
/// `x_i` contains the direction `x_i - x_j`. Ties go to the smallest cell
/// id; `None` when the ray leaves the domain at `x_i`.
pub fn upwind_cell(mesh: &Mesh, i: usize, j: usize) -> Option<usize> {
    let xi = mesh.vertices()[i];
    let xj = mesh.vertices()[j];
    let d = [xi[0] - xj[0], xi[1] - xj[1]];
    let dn = d[0].hypot(d[1]);
    mesh.vertex_cells(i).iter().copied().find(|&c| {
        let v = mesh.cells()[c].vertices;
        let k = v.iter().position(|&x| x == i).expect("incident cell");
        let p1 = mesh.vertices()[v[(k + 1) % 3]];
        let p2 = mesh.vertices()[v[(k + 2) % 3]];
        let e1 = [p1[0] - xi[0], p1[1] - xi[1]];
        let e2 = [p2[0] - xi[0], p2[1] - xi[1]];
        let tol1 = 1e-12 * dn * e1[0].hypot(e1[1]);
        let tol2 = 1e-12 * dn * e2[0].hypot(e2[1]);
        cross(e1, d) >= -tol1 && cross(d, e2) >= -tol2
    })
}

/// `u_ij = u_i + ∇u_h|_{K_i^j} · (x_i - x_j)`, or `u_i` when no upwind cell
/// exists.
pub fn upwind_value(mesh: &Mesh, u: &[f64], grads: &[[f64; 2]], i: usize, j: usize) -> f64 {
    match upwind_cell(mesh, i, j) {
        Some(c) => extrapolate(mesh, u, grads[c], i, j),
        None => u[i],
    }
}

#[inline]
fn extrapolate(mesh: &Mesh, u: &[f64], grad: [f64; 2], i: usize, j: usize) -> f64 {
    let xi = mesh.vertices()[i];
    let xj = mesh.vertices()[j];
    u[i] + grad[0] * (xi[0] - xj[0]) + grad[1] * (xi[1] - xj[1])
}

/// Per-cell P1 gradients of nodal values.
pub fn cell_gradients(mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.num_cells()).map(|c| mesh.p1_gradient(c, u)).collect()
}

/// Mesh- and pattern-dependent data reused across limiter evaluations on a
/// fixed mesh.
#[derive(Debug, Clone)]
pub struct LimiterContext<'m> {
    pub mesh: &'m Mesh,
    /// `K_i^j` for every stored slot `(i, j)` of the stiffness pattern.
    upwind: Vec<Option<usize>>,
    transpose: Vec<usize>,
}

impl<'m> LimiterContext<'m> {
    pub fn new(mesh: &'m Mesh, a: &CsrMatrix) -> Self {
        let mut upwind = vec![None; a.nnz()];
        for i in 0..a.dim() {
            for k in a.row_range(i) {
                let j = a.col_idx()[k];
                if j != i {
                    upwind[k] = upwind_cell(mesh, i, j);
                }
            }
        }
        Self {
            mesh,
            upwind,
            transpose: a.transpose_slots(),
        }
    }

    pub fn upwind_slot(&self, slot: usize) -> Option<usize> {
        self.upwind[slot]
    }

    pub fn transpose_slot(&self, slot: usize) -> usize {
        self.transpose[slot]
    }

    pub fn transpose_slots(&self) -> &[usize] {
        &self.transpose
    }
}

/// Limiter output. `alpha` is stored on the pattern of the stiffness matrix
/// (diagonal slots hold 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterState {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl LimiterState {
    /// All limiters zero: the full artificial-diffusion envelope.
    pub fn zero(a: &CsrMatrix) -> Self {
        let n = a.dim();
        let mut alpha = vec![0.0; a.nnz()];
        for i in 0..n {
            if let Some(k) = a.index_of(i, i) {
                alpha[k] = 1.0;
            }
        }
        Self {
            p_plus: vec![0.0; n],
            p_minus: vec![0.0; n],
            q_plus: vec![0.0; n],
            q_minus: vec![0.0; n],
            r_plus: vec![0.0; n],
            r_minus: vec![0.0; n],
            alpha,
        }
    }

    /// All limiters one: no stabilization.
    pub fn one(a: &CsrMatrix) -> Self {
        let n = a.dim();
        Self {
            p_plus: vec![0.0; n],
            p_minus: vec![0.0; n],
            q_plus: vec![0.0; n],
            q_minus: vec![0.0; n],
            r_plus: vec![1.0; n],
            r_minus: vec![1.0; n],
            alpha: vec![1.0; a.nnz()],
        }
    }
}

pub trait Limiter {
    fn compute(&self, a: &CsrMatrix, ctx: &LimiterContext<'_>, u: &[f64], dirichlet: &[bool])
        -> LimiterState;
}

/// Symmetric monotone upwind-type algebraic stabilization.
///
/// Uses `d_ij = max{a_ij, 0, a_ji}` and `s_ij = max{|a_ij|, a_ji}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Smuas;

impl Limiter for Smuas {
    fn compute(
        &self,
        a: &CsrMatrix,
        ctx: &LimiterContext<'_>,
        u: &[f64],
        dirichlet: &[bool],
    ) -> LimiterState {
        compute_limiters(a, ctx, u, dirichlet)
    }
}

pub fn compute_limiters(
    a: &CsrMatrix,
    ctx: &LimiterContext<'_>,
    u: &[f64],
    dirichlet: &[bool],
) -> LimiterState {
    let n = a.dim();
    let mesh = ctx.mesh;
    let grads = cell_gradients(mesh, u);
    let vals = a.values();
    let cols = a.col_idx();
    let mut state = LimiterState {
        p_plus: vec![0.0; n],
        p_minus: vec![0.0; n],
        q_plus: vec![0.0; n],
        q_minus: vec![0.0; n],
        r_plus: vec![1.0; n],
        r_minus: vec![1.0; n],
        alpha: vec![1.0; a.nnz()],
    };

    for i in 0..n {
        let (mut pp, mut pm, mut qp, mut qm) = (0.0, 0.0, 0.0, 0.0);
        for k in a.row_range(i) {
            let j = cols[k];
            if j == i {
                continue;
            }
            let a_ij = vals[k];
            let a_ji = vals[ctx.transpose[k]];
            let d = a_ij.max(0.0).max(a_ji);
            let s = a_ij.abs().max(a_ji);
            let u_ij = match ctx.upwind[k] {
                Some(c) => extrapolate(mesh, u, grads[c], i, j),
                None => u[i],
            };
            let du = u[i] - u[j];
            let dup = u[i] - u_ij;
            pp += d * (pos(du) + pos(dup));
            pm += d * (neg(du) + neg(dup));
            qp += s * (pos(-du) + pos(-dup));
            qm += s * (neg(-du) + neg(-dup));
        }
        state.p_plus[i] = pp;
        state.p_minus[i] = pm;
        state.q_plus[i] = qp;
        state.q_minus[i] = qm;
        if !dirichlet[i] {
            if pp != 0.0 {
                state.r_plus[i] = (qp / pp).min(1.0);
            }
            if pm != 0.0 {
                state.r_minus[i] = (qm / pm).min(1.0);
            }
        }
    }

    for i in 0..n {
        for k in a.row_range(i) {
            let j = cols[k];
            state.alpha[k] = if u[i] > u[j] {
                state.r_plus[i]
            } else if u[i] < u[j] {
                state.r_minus[i]
            } else {
                1.0
            };
        }
    }
    state
}

/// Assembles `B(u)` from the stiffness matrix and limiter values, on the
/// pattern of `a`.
pub fn build_stabilization(a: &CsrMatrix, alpha: &[f64]) -> CsrMatrix {
    let transpose = a.transpose_slots();
    build_stabilization_with(a, alpha, &transpose)
}

pub fn build_stabilization_with(a: &CsrMatrix, alpha: &[f64], transpose: &[usize]) -> CsrMatrix {
    let vals = a.values();
    let cols = a.col_idx();
    let mut out = vec![0.0; a.nnz()];
    for i in 0..a.dim() {
        let mut diag = None;
        let mut off = 0.0;
        for k in a.row_range(i) {
            if cols[k] == i {
                diag = Some(k);
                continue;
            }
            let t = transpose[k];
            let bij = -((1.0 - alpha[k]) * vals[k])
                .max(0.0)
                .max((1.0 - alpha[t]) * vals[t]);
            out[k] = bij;
            off += bij;
        }
        if let Some(k) = diag {
            out[k] = -off;
        }
    }
    let mut b = a.zeros_like();
    b.values_mut().copy_from_slice(&out);
    b
}

/// `b_E = b_ij` for every mesh edge `E = (i, j)`.
pub fn edge_coefficients(b: &CsrMatrix, mesh: &Mesh) -> Result<Vec<f64>> {
    mesh.edges()
        .iter()
        .map(|e| {
            let [i, j] = e.endpoints;
            b.index_of(i, j)
                .map(|k| b.values()[k])
                .ok_or(Error::MissingEdgeEntry(i, j))
        })
        .collect()
}

/// `b_h(u; v, w) = Σ_ij b_ij v_j w_i`.
pub fn bilinear_matrix_form(b: &CsrMatrix, v: &[f64], w: &[f64]) -> f64 {
    let bv = b.matvec(v).expect("dimensions match");
    bv.iter().zip(w).map(|(x, y)| x * y).sum()
}

/// `Σ_E |b_E| (v_j - v_i)(w_j - w_i)`.
pub fn bilinear_edge_form(mesh: &Mesh, b_edges: &[f64], v: &[f64], w: &[f64]) -> f64 {
    mesh.edges()
        .iter()
        .zip(b_edges)
        .map(|(e, be)| {
            let [i, j] = e.endpoints;
            be.abs() * (v[j] - v[i]) * (w[j] - w[i])
        })
        .sum()
}
