//! Residual a posteriori estimator for the stabilized solution.
//!
//! ```text
//! η² = η1² + η2² + η3²
//! η1² = Σ_K  min{C/σ, C h_K²/ε}              ||f - b·∇u_h - c u_h||²_K
//! η2² = Σ_F  min{C h_F/ε, C/sqrt(σ ε)}       ||R_F||²_F
//! η3² = Σ_E  min{C h_E²/ε, C/σ} |b_E|² h_E⁻¹ (u_j - u_i)² / h_E
//! ```
//!
//! with `R_F = -ε [∇u_h·n_F]` on interior edges, `g - ε ∇u_h·n` on Neumann
//! edges and zero on Dirichlet edges. `C` collects the interpolation,
//! trace and Young constants (see [`EstimatorConfig`]).

use crate::assembly::{energy_error_sq, integrate, p1_value, DEFAULT_QUAD_DEGREE};
use crate::error::{Error, Result};
use crate::mesh::{EdgeTag, Mesh, Point};
use crate::problem::Problem;
use crate::quadrature::{LineRule, TriangleRule};
use crate::sparse::CsrMatrix;
use crate::stabilization::{build_stabilization_with, compute_limiters, edge_coefficients, LimiterContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Interpolation constant.
    pub c_i: f64,
    /// Trace constant.
    pub c_f: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Factor from the Young inequality splitting the residual in three.
    pub young_factor: f64,
    pub quad_degree: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            c_i: 1.0,
            c_f: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            young_factor: 4.0,
            quad_degree: DEFAULT_QUAD_DEGREE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    /// Local indicators `η_K`; `Σ η_K² = η²`.
    pub per_cell: Vec<f64>,
    /// `||u - u_h||_a` when the problem has an exact solution.
    pub energy_error: Option<f64>,
}

impl EstimatorReport {
    pub fn efficiency_index(&self) -> Option<f64> {
        self.energy_error.map(|e| efficiency_index(self.eta, e))
    }
}

/// `η / ||u - u_h||_a`.
pub fn efficiency_index(eta: f64, energy_error: f64) -> f64 {
    eta / energy_error.max(1e-300)
}

/// `||f - b·∇u_h - c u_h||²_K` per cell.
pub fn element_residuals(mesh: &Mesh, problem: &Problem, u: &[f64], quad_degree: usize) -> Vec<f64> {
    let rule = TriangleRule::of_degree(quad_degree);
    (0..mesh.num_cells())
        .map(|c| {
            let pts = mesh.cell_points(c);
            let g = mesh.p1_gradient(c, u);
            let r = |x: Point| {
                let b = (problem.convection)(x);
                let v = (problem.source)(x)
                    - b[0] * g[0]
                    - b[1] * g[1]
                    - (problem.reaction)(x) * p1_value(mesh, c, u, x);
                v * v
            };
            integrate(&pts, &rule, &r)
        })
        .collect()
}

fn edge_normal(mesh: &Mesh, e: usize) -> [f64; 2] {
    let edge = &mesh.edges()[e];
    let [i, j] = edge.endpoints;
    let (pi, pj) = (mesh.vertices()[i], mesh.vertices()[j]);
    let t = [(pj[0] - pi[0]) / edge.length, (pj[1] - pi[1]) / edge.length];
    let n = [t[1], -t[0]];
    // orient out of the first adjacent cell
    let pts = mesh.cell_points(edge.cells.0);
    let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
    let cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
    let mx = 0.5 * (pi[0] + pj[0]);
    let my = 0.5 * (pi[1] + pj[1]);
    if n[0] * (mx - cx) + n[1] * (my - cy) < 0.0 {
        [-n[0], -n[1]]
    } else {
        n
    }
}

/// `||R_F||²_F` per edge.
pub fn face_residuals(mesh: &Mesh, problem: &Problem, u: &[f64]) -> Vec<f64> {
    let eps = problem.epsilon;
    let line = LineRule::of_degree(4);
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let n = edge_normal(mesh, e);
            let g1 = mesh.p1_gradient(edge.cells.0, u);
            match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(other)) => {
                    let g2 = mesh.p1_gradient(other, u);
                    let jump = (g1[0] - g2[0]) * n[0] + (g1[1] - g2[1]) * n[1];
                    eps * eps * jump * jump * edge.length
                }
                (EdgeTag::Neumann, _) => {
                    let flux = eps * (g1[0] * n[0] + g1[1] * n[1]);
                    let [i, j] = edge.endpoints;
                    let (pi, pj) = (mesh.vertices()[i], mesh.vertices()[j]);
                    line.points
                        .iter()
                        .zip(&line.weights)
                        .map(|(&t, &w)| {
                            let x = [pi[0] + t * (pj[0] - pi[0]), pi[1] + t * (pj[1] - pi[1])];
                            let r = (problem.neumann)(x) - flux;
                            w * r * r
                        })
                        .sum::<f64>()
                        * edge.length
                }
                _ => 0.0,
            }
        })
        .collect()
}

/// Evaluates the estimator for `u` with stabilization matrix `b` (which
/// must be the one that produced `u`).
pub fn compute_eta(
    mesh: &Mesh,
    problem: &Problem,
    u: &[f64],
    b: &CsrMatrix,
    cfg: &EstimatorConfig,
) -> Result<EstimatorReport> {
    let eps = problem.epsilon;
    let sigma = problem.sigma;
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if u.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: u.len(),
        });
    }
    let y = cfg.young_factor;
    let ci2 = cfg.c_i * cfg.c_i;
    let cf2 = cfg.c_f * cfg.c_f;

    let mut per_cell = vec![0.0; mesh.num_cells()];
    let mut eta1_sq = 0.0;
    for (c, r) in element_residuals(mesh, problem, u, cfg.quad_degree)
        .into_iter()
        .enumerate()
    {
        let h = mesh.cell_diameter(c);
        let w = y * (ci2 / sigma).min(ci2 * h * h / eps);
        per_cell[c] += w * r;
        eta1_sq += w * r;
    }

    let b_edges = edge_coefficients(b, mesh)?;
    let faces = face_residuals(mesh, problem, u);
    let mut eta2_sq = 0.0;
    let mut eta3_sq = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        let h = edge.length;
        let w2 = y * (cf2 * h / eps).min(cfg.kappa2 / (sigma * eps).sqrt());
        let t2 = w2 * faces[e];
        let [i, j] = edge.endpoints;
        let du = u[j] - u[i];
        let w3 = y * (cfg.kappa1 * h * h / eps).min(cfg.kappa2 / sigma);
        let t3 = w3 * b_edges[e] * b_edges[e] / h * du * du / h;
        eta2_sq += t2;
        eta3_sq += t3;
        match edge.cells.1 {
            Some(other) => {
                per_cell[edge.cells.0] += 0.5 * (t2 + t3);
                per_cell[other] += 0.5 * (t2 + t3);
            }
            None => per_cell[edge.cells.0] += t2 + t3,
        }
    }

    let energy_error = energy_error_sq(mesh, problem, u, cfg.quad_degree)?.map(f64::sqrt);
    Ok(EstimatorReport {
        eta: (eta1_sq + eta2_sq + eta3_sq).sqrt(),
        eta1: eta1_sq.sqrt(),
        eta2: eta2_sq.sqrt(),
        eta3: eta3_sq.sqrt(),
        per_cell: per_cell.into_iter().map(f64::sqrt).collect(),
        energy_error,
    })
}

/// Estimator for a stored nodal solution: assembles on `mesh` and evaluates
/// the stabilization matrix at `u`.
pub fn estimate_solution(
    mesh: &Mesh,
    problem: &Problem,
    u: &[f64],
    cfg: &EstimatorConfig,
) -> Result<EstimatorReport> {
    let sys = crate::assembly::assemble(mesh, problem, cfg.quad_degree)?;
    let ctx = LimiterContext::new(mesh, &sys.a);
    let state = compute_limiters(&sys.a, &ctx, u, &sys.dirichlet);
    let b = build_stabilization_with(&sys.a, &state.alpha, ctx.transpose_slots());
    compute_eta(mesh, problem, u, &b, cfg)
}
