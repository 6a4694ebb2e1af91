//! Maximum marking and the `solve -> estimate -> mark -> refine` loop.

use std::time::Instant;

use log::info;

use crate::assembly::{assemble, dirichlet_values};
use crate::config::RunConfig;
use crate::error::Result;
use crate::estimator::{compute_eta, EstimatorConfig, EstimatorReport};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::solver::{solve_nonlinear, NonlinearSolution, SolveStats, SolverOptions};

/// Cells with `η_K ≥ θ max_K η_K`, in increasing id order.
pub fn mark_maximum(per_cell: &[f64], theta: f64) -> Vec<usize> {
    let max = per_cell.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    per_cell
        .iter()
        .enumerate()
        .filter(|(_, &e)| e >= theta * max)
        .map(|(c, _)| c)
        .collect()
}

/// Warm start on a refined mesh: old vertices keep their values, new
/// midpoints take the mean of their parents.
pub fn prolongate(mesh: &Mesh, u_old: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        u[v] = if v < u_old.len() {
            u_old[v]
        } else {
            match mesh.vertex_parent(v) {
                Some([a, b]) => 0.5 * (u[a] + u[b]),
                None => 0.0,
            }
        };
    }
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub dofs: usize,
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub energy_error: Option<f64>,
    pub iterations: usize,
    pub rejections: usize,
    pub converged: bool,
    pub wall_ms: f64,
}

impl StepRecord {
    pub fn efficiency_index(&self) -> Option<f64> {
        self.energy_error
            .map(|e| crate::estimator::efficiency_index(self.eta, e))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub steps: Vec<StepRecord>,
}

/// Everything produced on one mesh, handed to the observer of
/// [`adaptive_loop_with`].
pub struct StepOutput<'a> {
    pub record: &'a StepRecord,
    pub mesh: &'a Mesh,
    pub solution: &'a NonlinearSolution,
    pub report: &'a EstimatorReport,
}

pub fn adaptive_loop(problem: &Problem, cfg: &RunConfig) -> Result<RunRecord> {
    adaptive_loop_with(problem, cfg, |_| Ok(()))
}

/// Runs the adaptive loop from `problem.initial_mesh()`.
///
/// The first `initial_refinements` uniform refinements are not solved on;
/// the next `uniform_steps` steps refine uniformly, the rest by maximum
/// marking. Stops once `η ≤ eta_stop` or `dofs ≥ dof_stop`, after recording
/// that step. Non-converged nonlinear solves are recorded, not raised.
pub fn adaptive_loop_with(
    problem: &Problem,
    cfg: &RunConfig,
    mut observer: impl FnMut(&StepOutput<'_>) -> Result<()>,
) -> Result<RunRecord> {
    cfg.validate()?;
    let opts = SolverOptions {
        max_iterations: cfg.max_iters,
        tol_scale: cfg.nonlinear_tol_scale,
        ..Default::default()
    };
    let est = EstimatorConfig {
        quad_degree: cfg.quad_degree,
        ..Default::default()
    };
    let mut mesh = (0..cfg.initial_refinements).fold(problem.initial_mesh(), |m, _| m.uniform_refine());
    let mut warm: Option<Vec<f64>> = None;
    let mut run = RunRecord {
        problem: problem.name.clone(),
        steps: Vec::new(),
    };

    for step in 0.. {
        let start = Instant::now();
        let sys = assemble(&mesh, problem, cfg.quad_degree)?;
        let u0 = warm.take().unwrap_or_else(|| dirichlet_values(&mesh, problem));
        let solution = solve_nonlinear(&sys, &mesh, &opts, &u0)?;
        let report = compute_eta(&mesh, problem, &solution.u, &solution.stabilization, &est)?;
        let SolveStats {
            iterations,
            rejections,
            converged,
            ..
        } = solution.stats;
        let record = StepRecord {
            step,
            dofs: mesh.num_dofs(),
            eta: report.eta,
            eta1: report.eta1,
            eta2: report.eta2,
            eta3: report.eta3,
            energy_error: report.energy_error,
            iterations,
            rejections,
            converged,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        info!(
            "step {} dofs {} eta {:.6e} error {:?} iterations {} rejections {}",
            step, record.dofs, record.eta, record.energy_error, iterations, rejections
        );
        observer(&StepOutput {
            record: &record,
            mesh: &mesh,
            solution: &solution,
            report: &report,
        })?;
        run.steps.push(record);

        if report.eta <= cfg.eta_stop || mesh.num_dofs() >= cfg.dof_stop {
            break;
        }
        mesh = if step < cfg.uniform_steps {
            mesh.uniform_refine()
        } else {
            mesh.red_green_refine(&mark_maximum(&report.per_cell, cfg.theta))
        };
        warm = Some(prolongate(&mesh, &solution.u));
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marking_selects_by_threshold() {
        let eta = [0.1, 1.0, 0.5, 0.49, 0.7];
        assert_eq!(mark_maximum(&eta, 0.5), vec![1, 2, 4]);
        assert_eq!(mark_maximum(&eta, 1.0), vec![1]);
        assert_eq!(mark_maximum(&eta, 0.0), vec![0, 1, 2, 3, 4]);
        assert!(mark_maximum(&[0.0, 0.0], 0.5).is_empty());
    }

    #[test]
    fn prolongation_reproduces_linear_data() {
        let coarse = Mesh::unit_square_dirichlet().uniform_refine();
        let f = |p: [f64; 2]| 2.0 * p[0] - p[1] + 0.5;
        let u: Vec<f64> = coarse.vertices().iter().map(|&p| f(p)).collect();
        let fine = coarse.red_green_refine(&[0, 3]);
        let v = prolongate(&fine, &u);
        for (p, val) in fine.vertices().iter().zip(&v) {
            assert!((f(*p) - val).abs() < 1e-14);
        }
    }

    #[test]
    fn short_run_records_every_step() {
        let p = crate::problem::known_boundary_layer();
        let cfg = RunConfig {
            dof_stop: 300,
            ..RunConfig::default()
        };
        let mut seen = 0;
        let run = adaptive_loop_with(&p, &cfg, |out| {
            assert_eq!(out.mesh.num_dofs(), out.record.dofs);
            seen += 1;
            Ok(())
        })
        .unwrap();
        let dofs: Vec<usize> = run.steps.iter().map(|s| s.dofs).collect();
        assert_eq!(dofs[..3], [25, 81, 289]);
        assert_eq!(seen, run.steps.len());
        assert!(run.steps.iter().all(|s| s.converged));
    }
}
