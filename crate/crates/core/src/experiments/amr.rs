use super::config::SimConfig;
use super::output::{write_snapshot, CsvTable};
use super::ExperimentError;
use crate::analytic::{cell_errors, project_to_cells, steady_external_field, steady_solution, SteadySolutionParams};
use crate::linalg::SolverConfig;
use crate::mesh::{build_locally_refined_mesh, build_uniform_quad_mesh, BoundaryCondition, Mesh, Rect, RefinementBand};
use crate::mimetic::{CellVectorField, InnerProductConfig};
use crate::solver::{ExternalField, LLSolver, MaterialParams, ThetaScheme};
use crate::vec3;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmrConfig {
    /// Cells per side of the uniform meshes.
    pub uniform: Vec<usize>,
    /// `(base_n, levels)` of the refined meshes.
    pub refined: Vec<(usize, u32)>,
    pub band_center: f64,
    pub band_half_width: f64,
    pub profile: SteadySolutionParams,
    /// Implicit step; the steady state does not depend on it. The applied
    /// field enters explicitly, so `k max|h_e|` must stay below about 2.
    pub step: f64,
    pub alpha: f64,
    /// Stop when `max_E |Δm_E| / k` falls below this.
    pub rate_tolerance: f64,
    pub max_steps: usize,
}

impl Default for AmrConfig {
    fn default() -> Self {
        AmrConfig {
            uniform: vec![16, 32, 64, 128],
            refined: vec![(10, 1), (10, 3), (20, 3), (40, 3)],
            band_center: 0.5,
            band_half_width: 0.06,
            profile: SteadySolutionParams::default(),
            step: 5e-4,
            alpha: 1.0,
            rate_tolerance: 1e-8,
            max_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmrRow {
    pub refined: bool,
    pub cells: usize,
    pub linf: f64,
    pub q: f64,
    pub steps: usize,
    pub final_rate: f64,
    pub max_norm_defect: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyRun {
    pub row: AmrRow,
    pub m: CellVectorField,
}

/// Time steps the Dirichlet steady problem on `mesh`, starting from a linear
/// angle ramp, until `m` stops moving.
pub fn run_steady_case(
    mut mesh: Mesh,
    cfg: &AmrConfig,
    inner_product: &InnerProductConfig,
    linear: SolverConfig,
) -> Result<SteadyRun, ExperimentError> {
    let start = Instant::now();
    mesh.set_boundary_condition(BoundaryCondition::Dirichlet);
    let prof = cfg.profile;
    let exact = project_to_cells(&mesh, |x| steady_solution(x, &prof));
    let field = project_to_cells(&mesh, |x| steady_external_field(x, &prof));
    let params = MaterialParams {
        alpha: cfg.alpha,
        eta: 1.0,
        external: ExternalField::PerCell(field.0),
        ..Default::default()
    };
    let mut solver = LLSolver::new(mesh, inner_product, params, ThetaScheme::implicit(cfg.step), linear)?
        .with_dirichlet(Arc::new(move |x, _t| steady_solution(x, &prof)));
    let init = CellVectorField(
        solver
            .mesh
            .cells
            .iter()
            .map(|c| {
                let phi = std::f64::consts::PI * c.centroid[0];
                [phi.sin(), phi.cos(), 0.0]
            })
            .collect(),
    );
    let mut state = solver.initial_state(init, 0.0)?;
    let mut rate = f64::INFINITY;
    let mut steps = 0;
    let mut defect = 0.0f64;
    while steps < cfg.max_steps && rate >= cfg.rate_tolerance {
        let next = solver.step(&state)?;
        rate = next
            .m
            .iter()
            .zip(state.m.iter())
            .map(|(a, b)| vec3::dist(*a, *b))
            .fold(0.0, f64::max)
            / cfg.step;
        defect = defect.max(next.m.max_norm_defect());
        state = next;
        steps += 1;
    }
    if rate >= cfg.rate_tolerance {
        log::warn!("steady run stopped at {steps} steps with rate {rate:.3e}");
    }
    let (linf, q) = cell_errors(&solver.mesh, &state.m, &exact);
    Ok(SteadyRun {
        row: AmrRow {
            refined: false,
            cells: solver.mesh.num_cells(),
            linf,
            q,
            steps,
            final_rate: rate,
            max_norm_defect: defect,
            seconds: start.elapsed().as_secs_f64(),
        },
        m: state.m,
    })
}

pub fn amr_meshes(cfg: &AmrConfig) -> Result<Vec<(bool, Mesh)>, ExperimentError> {
    let mut out = Vec::new();
    for &n in &cfg.uniform {
        out.push((false, build_uniform_quad_mesh(n, n, Rect::unit())?));
    }
    let band = RefinementBand::centered(cfg.band_center, cfg.band_half_width);
    for &(base, levels) in &cfg.refined {
        out.push((true, build_locally_refined_mesh(base, levels, band)?));
    }
    Ok(out)
}

pub fn run_amr_comparison(cfg: &SimConfig) -> Result<Vec<AmrRow>, ExperimentError> {
    cfg.validate()?;
    let amr = cfg.amr.clone().expect("validated");
    let mut rows = Vec::new();
    let mut csv = CsvTable::new(
        &["refined", "cells", "linf", "q", "steps", "final_rate", "seconds"],
        &["errors of the relaxed state against the steady profile; refined = 1 for locally refined meshes"],
    );
    for (i, (refined, mesh)) in amr_meshes(&amr)?.into_iter().enumerate() {
        let run = run_steady_case(mesh.clone(), &amr, &cfg.inner_product, cfg.solver)?;
        let row = AmrRow { refined, ..run.row };
        log::info!("{row:?}");
        csv.push(vec![
            refined as u8 as f64,
            row.cells as f64,
            row.linf,
            row.q,
            row.steps as f64,
            row.final_rate,
            row.seconds,
        ]);
        if cfg.output.snapshots {
            write_snapshot(&mesh, &run.m, &cfg.output.dir.join(format!("amr_{i}.vtk")))?;
        }
        rows.push(row);
    }
    csv.save(&cfg.output.dir.join("amr.csv"))?;
    Ok(rows)
}
