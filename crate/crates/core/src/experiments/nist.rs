use super::config::SimConfig;
use super::output::{write_snapshot, CsvTable};
use super::units::PhysicalUnits;
use super::ExperimentError;
use crate::analytic::{generate_s_state, SStateProtocol};
use crate::linalg::SolverConfig;
use crate::mesh::{build_uniform_quad_mesh, Mesh, Rect};
use crate::mimetic::{CellVectorField, InnerProductConfig};
use crate::solver::{ExternalField, LLSolver, MaterialParams, Theta, ThetaScheme};
use crate::stray::{DemagKernel, StrayField};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NistConfig {
    pub grid: [usize; 2],
    /// Applied fields `μ0 H_e` [mT].
    pub fields_mt: Vec<[f64; 3]>,
    /// Implicit steps in units of `1/(γ M_s)`.
    pub implicit_steps: Vec<f64>,
    /// Explicit step in units of `1/(γ M_s)`; `None` skips the explicit run.
    pub explicit_step: Option<f64>,
    pub final_time_ns: f64,
    /// End each run at the first zero crossing of `<m_x>`.
    pub stop_at_crossing: bool,
    pub sstate: SStateProtocol,
    /// Directory for the demagnetization kernel cache.
    pub kernel_cache: Option<PathBuf>,
}

impl Default for NistConfig {
    fn default() -> Self {
        NistConfig {
            grid: [100, 25],
            fields_mt: vec![[-24.6, 4.3, 0.0], [-35.5, 6.3, 0.0]],
            implicit_steps: vec![0.01, 0.025, 0.05, 0.1, 0.2],
            explicit_step: Some(0.005),
            final_time_ns: 1.0,
            stop_at_crossing: false,
            sstate: SStateProtocol::default(),
            kernel_cache: None,
        }
    }
}

/// Mesh and stray-field operator of the film, in units of the length scale.
pub struct FilmSetup {
    pub mesh: Mesh,
    pub kernel: Arc<DemagKernel>,
    pub units: PhysicalUnits,
}

pub fn film_setup(units: &PhysicalUnits, grid: [usize; 2], cache: Option<&std::path::Path>) -> Result<FilmSetup, ExperimentError> {
    let nd = units.nondimensionalize();
    let [hx, hy, hz] = nd.cell_size;
    let mesh = build_uniform_quad_mesh(
        grid[0],
        grid[1],
        Rect::new([0.0, 0.0], [grid[0] as f64 * hx, grid[1] as f64 * hy]),
    )?;
    let dims = [grid[0], grid[1], 1];
    let kernel = match cache {
        Some(dir) => DemagKernel::cached(dir, dims, [hx, hy, hz])?,
        None => DemagKernel::new(dims, [hx, hy, hz])?,
    };
    Ok(FilmSetup {
        mesh,
        kernel: Arc::new(kernel),
        units: *units,
    })
}

#[derive(Debug, Clone)]
pub struct NistRun {
    pub field_mt: [f64; 3],
    pub theta: Theta,
    /// Time step in seconds.
    pub step_seconds: f64,
    /// `(t [ns], <m>)` after every step.
    pub series: Vec<(f64, Vec3)>,
    /// First time `<m_x>` changes sign, linearly interpolated [ns].
    pub first_crossing_ns: Option<f64>,
    /// State at the first step after the crossing.
    pub crossing_state: Option<CellVectorField>,
    pub max_norm_defect: f64,
}

impl NistRun {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            &["t_ns", "mx", "my", "mz"],
            &[
                &format!(
                    "applied field {:?} mT, scheme {:?}, step {:.4e} s",
                    self.field_mt, self.theta, self.step_seconds
                ),
                "t in nanoseconds; <m> is the dimensionless cell average",
            ],
        );
        for (tn, m) in &self.series {
            t.push(vec![*tn, m[0], m[1], m[2]]);
        }
        t
    }
}

/// One field and one time step, starting from `initial`.
#[allow(clippy::too_many_arguments)]
pub fn run_nist_case(
    film: &FilmSetup,
    initial: &CellVectorField,
    field_mt: [f64; 3],
    theta: Theta,
    reduced_step: f64,
    final_time_ns: f64,
    stop_at_crossing: bool,
    inner_product: &InnerProductConfig,
    linear: SolverConfig,
) -> Result<NistRun, ExperimentError> {
    let u = &film.units;
    let step_seconds = reduced_step / (u.gyromagnetic * u.saturation);
    let k = u.from_seconds(step_seconds);
    let params = MaterialParams {
        alpha: u.alpha,
        eta: u.eta(),
        external: ExternalField::Uniform(u.field_from_mt(field_mt)),
        stray: Some(film.kernel.clone() as Arc<dyn StrayField>),
        ..Default::default()
    };
    let scheme = ThetaScheme {
        theta,
        k,
        courant_guard: None,
    };
    let mut solver = LLSolver::new(film.mesh.clone(), inner_product, params, scheme, linear)?;
    let s0 = solver.initial_state(initial.clone(), 0.0)?;
    let mut series = vec![(0.0, s0.m.average())];
    let mut crossing = None;
    let mut crossing_state = None;
    let final_time = u.from_seconds(final_time_ns * 1e-9);
    let traj = solver.run_simulation(s0, final_time, |st, rec| {
        let tn = u.seconds(rec.t) * 1e9;
        let (t_prev, m_prev) = *series.last().expect("non-empty");
        series.push((tn, rec.m_avg));
        if crossing.is_none() && m_prev[0] > 0.0 && rec.m_avg[0] <= 0.0 {
            let w = m_prev[0] / (m_prev[0] - rec.m_avg[0]);
            crossing = Some(t_prev + w * (tn - t_prev));
            crossing_state = Some(st.m.clone());
            if stop_at_crossing {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(NistRun {
        field_mt,
        theta,
        step_seconds,
        series,
        first_crossing_ns: crossing,
        crossing_state,
        max_norm_defect: traj.max_norm_defect(),
    })
}

/// S-state preparation followed by every configured field and step.
pub fn run_nist4(cfg: &SimConfig) -> Result<Vec<NistRun>, ExperimentError> {
    cfg.validate()?;
    let units = cfg.physical.expect("validated");
    let nist = cfg.nist.clone().expect("validated");
    let film = film_setup(&units, nist.grid, nist.kernel_cache.as_deref())?;
    let s = generate_s_state(
        &film.mesh,
        film.kernel.clone(),
        units.eta(),
        units.field_unit(),
        &nist.sstate,
        &cfg.inner_product,
        cfg.solver,
    )?;
    log::info!(
        "S-state after {} ramp and {} relaxation steps, <m> = {:?}",
        s.ramp_steps,
        s.relax_steps,
        s.m.average()
    );
    let out = &cfg.output.dir;
    if cfg.output.snapshots {
        write_snapshot(&film.mesh, &s.m, &out.join("nist4_sstate.vtk"))?;
    }
    let mut runs = Vec::new();
    for (fi, &field) in nist.fields_mt.iter().enumerate() {
        let mut cases: Vec<(Theta, f64)> = nist.implicit_steps.iter().map(|&k| (Theta::Implicit, k)).collect();
        if let Some(k) = nist.explicit_step {
            cases.push((Theta::Explicit, k));
        }
        for (theta, k) in cases {
            let run = run_nist_case(
                &film,
                &s.m,
                field,
                theta,
                k,
                nist.final_time_ns,
                nist.stop_at_crossing,
                &cfg.inner_product,
                cfg.solver,
            )?;
            let tag = format!("field{}_{}_{k}", fi + 1, if theta == Theta::Implicit { "implicit" } else { "explicit" });
            run.to_csv().save(&out.join(format!("nist4_{tag}.csv")))?;
            if let (true, Some(m)) = (cfg.output.snapshots, &run.crossing_state) {
                write_snapshot(&film.mesh, m, &out.join(format!("nist4_{tag}_crossing.vtk")))?;
            }
            log::info!("field {} {tag}: first crossing {:?} ns", fi + 1, run.first_crossing_ns);
            runs.push(run);
        }
    }
    Ok(runs)
}
