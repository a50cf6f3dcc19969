use super::config::{ExperimentKind, MeshFamily, SimConfig};
use super::output::CsvTable;
use super::ExperimentError;
use crate::analytic::{
    convergence_rate, error_norms, exact_gradient, exact_solution, project_flux, project_to_cells,
    ErrorNorms, ExactSolutionParams,
};
use crate::linalg::SolverConfig;
use crate::mesh::{
    build_circular_logical_mesh, build_polygonal_mesh_seeded, build_uniform_quad_mesh, distort_smooth,
    perturb_random, BoundaryCondition, Mesh, MeshError, Rect,
};
use crate::mimetic::InnerProductConfig;
use crate::solver::{LLSolver, MaterialParams, Theta, ThetaScheme};
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::Instant;

/// Mesh of `family` with nominal spacing `1/n`.
pub fn family_mesh(family: MeshFamily, n: usize, amplitude: f64, seed: u64) -> Result<Mesh, MeshError> {
    let square = || build_uniform_quad_mesh(n, n, Rect::unit());
    match family {
        MeshFamily::Uniform => square(),
        MeshFamily::Randomized => perturb_random(&square()?, amplitude, seed.wrapping_add(n as u64)),
        MeshFamily::Smooth => distort_smooth(&square()?),
        MeshFamily::Polygonal => build_polygonal_mesh_seeded(n, seed.wrapping_add(n as u64)),
        MeshFamily::Circular => build_circular_logical_mesh(n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactBoundary {
    Periodic,
    Dirichlet,
}

/// Settings of one run against the exact spin-wave solution.
#[derive(Debug, Clone, Copy)]
pub struct ExactCase {
    pub boundary: ExactBoundary,
    pub inner_product: InnerProductConfig,
    pub alpha: f64,
    pub theta: Theta,
    pub k: f64,
    pub final_time: f64,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub n: usize,
    pub cells: usize,
    pub steps: usize,
    pub k: f64,
    pub errors: ErrorNorms,
    pub max_norm_defect: f64,
    /// Exchange energy after every step, starting with the initial state.
    pub energies: Vec<f64>,
    /// Cells whose inverse inner-product matrix passes both M-matrix checks.
    pub m_matrix_cells: usize,
    pub seconds: f64,
}

impl CaseResult {
    /// Largest `(E_{j+1} - E_j) / E_j` over the run; non-positive when monotone.
    pub fn max_relative_energy_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs `mesh` from the exact solution at `t = 0` to the final time and measures errors.
pub fn run_exact_case(mut mesh: Mesh, n: usize, case: &ExactCase) -> Result<CaseResult, ExperimentError> {
    let start = Instant::now();
    let ex = ExactSolutionParams::new(case.alpha);
    match case.boundary {
        ExactBoundary::Periodic => mesh.make_periodic(true, true)?,
        ExactBoundary::Dirichlet => mesh.set_boundary_condition(BoundaryCondition::Dirichlet),
    }
    let params = MaterialParams {
        alpha: case.alpha,
        ..Default::default()
    };
    let scheme = ThetaScheme {
        theta: case.theta,
        k: case.k,
        courant_guard: None,
    };
    let mut solver = LLSolver::new(mesh, &case.inner_product, params, scheme, case.solver)?;
    if case.boundary == ExactBoundary::Dirichlet {
        solver = solver.with_dirichlet(Arc::new(move |x, t| exact_solution(x, t, &ex)));
    }
    let m_matrix_cells = solver
        .ops
        .locals
        .iter()
        .filter(|l| {
            let (a, b) = l.m_matrix_flags();
            a && b
        })
        .count();
    let m0 = project_to_cells(&solver.mesh, |x| exact_solution(x, 0.0, &ex));
    let s0 = solver.initial_state(m0, 0.0)?;
    let traj = solver.run_simulation(s0, case.final_time, |_, _| ControlFlow::Continue(()))?;
    let fin = &traj.final_state;
    let t = fin.t;
    let mi = project_to_cells(&solver.mesh, |x| exact_solution(x, t, &ex));
    let pi = project_flux(&solver.mesh, |x| exact_gradient(x, t, &ex));
    let errors = error_norms(&solver.mesh, &solver.ops, &fin.m, &mi, &fin.p, &pi);
    Ok(CaseResult {
        n,
        cells: solver.mesh.num_cells(),
        steps: fin.step,
        k: case.k,
        errors,
        max_norm_defect: traj.max_norm_defect(),
        energies: traj.records.iter().map(|r| r.exchange_energy).collect(),
        m_matrix_cells,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub family: MeshFamily,
    pub theta: Theta,
    pub rows: Vec<CaseResult>,
}

impl ConvergenceTable {
    fn rates_of(rows: &[CaseResult]) -> [f64; 3] {
        let h: Vec<f64> = rows.iter().map(|r| 1.0 / r.n as f64).collect();
        let pick = |f: fn(&ErrorNorms) -> f64| {
            let e: Vec<f64> = rows.iter().map(|r| f(&r.errors)).collect();
            convergence_rate(&e, &h)
        };
        [pick(|e| e.linf), pick(|e| e.q), pick(|e| e.f)]
    }

    /// Least-squares rates `(L∞, Q, F)` over all rows.
    pub fn rates(&self) -> [f64; 3] {
        Self::rates_of(&self.rows)
    }

    /// Rates over the three finest rows.
    pub fn finest_rates(&self) -> [f64; 3] {
        Self::rates_of(&self.rows[self.rows.len().saturating_sub(3)..])
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            &["inv_h", "cells", "steps", "k", "linf", "q_norm", "f_norm", "max_norm_defect"],
            &[
                &format!("family {:?}, scheme {:?}", self.family, self.theta),
                "errors against the exact solution at the final time; all quantities dimensionless",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.n as f64,
                r.cells as f64,
                r.steps as f64,
                r.k,
                r.errors.linf,
                r.errors.q,
                r.errors.f,
                r.max_norm_defect,
            ]);
        }
        let rates = self.rates();
        t.comments.push(format!(
            "fitted rates linf {:.3} q {:.3} f {:.3}",
            rates[0], rates[1], rates[2]
        ));
        t
    }
}

/// Error table for a convergence configuration.
pub fn run_convergence(cfg: &SimConfig) -> Result<ConvergenceTable, ExperimentError> {
    cfg.validate()?;
    let mesh_cfg = cfg.mesh.as_ref().expect("validated");
    let time = cfg.time.expect("validated");
    let boundary = if cfg.kind == ExperimentKind::ConvergenceDirichlet {
        ExactBoundary::Dirichlet
    } else {
        ExactBoundary::Periodic
    };
    if boundary == ExactBoundary::Periodic
        && matches!(mesh_cfg.family, MeshFamily::Polygonal | MeshFamily::Circular)
    {
        return Err(ExperimentError::Config(format!(
            "{:?} meshes are not periodic; use convergence-dirichlet",
            mesh_cfg.family
        )));
    }
    let mut rows = Vec::new();
    for &n in &mesh_cfg.resolutions {
        let mesh = family_mesh(mesh_cfg.family, n, mesh_cfg.amplitude, cfg.seed)?;
        let h = 1.0 / n as f64;
        let case = ExactCase {
            boundary,
            inner_product: cfg.inner_product,
            alpha: cfg.material.alpha,
            theta: time.theta,
            k: time.step.step(h),
            final_time: time.final_time,
            solver: cfg.solver,
        };
        let r = run_exact_case(mesh, n, &case).map_err(|e| ExperimentError::Resolution {
            n,
            source: Box::new(e),
        })?;
        log::info!(
            "1/h = {n}: linf {:.3e} q {:.3e} f {:.3e} ({} steps, {:.1} s)",
            r.errors.linf,
            r.errors.q,
            r.errors.f,
            r.steps,
            r.seconds
        );
        rows.push(r);
    }
    Ok(ConvergenceTable {
        family: mesh_cfg.family,
        theta: time.theta,
        rows,
    })
}
