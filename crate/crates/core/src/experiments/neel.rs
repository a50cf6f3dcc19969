use super::config::SimConfig;
use super::nist::{film_setup, FilmSetup};
use super::output::{write_snapshot, CsvTable};
use super::ExperimentError;
use crate::linalg::SolverConfig;
use crate::mesh::Mesh;
use crate::mimetic::{CellVectorField, InnerProductConfig};
use crate::solver::{LLSolver, MaterialParams, Record, Theta, ThetaScheme};
use crate::stray::StrayField;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeelConfig {
    pub grid: [usize; 2],
    /// Position of the wall between the two domains [nm].
    pub wall_position_nm: f64,
    pub theta: Theta,
    /// Time step in units of `1/(μ0 γ M_s)`.
    pub step: f64,
    pub max_time_ns: f64,
    /// Snapshot times [ns].
    pub snapshot_times_ns: Vec<f64>,
    /// Stop once `|ΔE| / (k |E|)` stays below this for `settle_steps` steps.
    pub energy_rate_tolerance: f64,
    pub settle_steps: usize,
    pub kernel_cache: Option<PathBuf>,
}

impl Default for NeelConfig {
    fn default() -> Self {
        NeelConfig {
            grid: [64, 128],
            wall_position_nm: 120.0,
            theta: Theta::Implicit,
            step: 0.25,
            max_time_ns: 20.0,
            snapshot_times_ns: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            energy_rate_tolerance: 1e-7,
            settle_steps: 20,
            kernel_cache: None,
        }
    }
}

/// `(0, 1, 0)` left of the wall, `(0, -1, 0)` right of it.
pub fn two_domain_state(mesh: &Mesh, wall_x: f64) -> CellVectorField {
    CellVectorField(
        mesh.cells
            .iter()
            .map(|c| if c.centroid[0] < wall_x { [0.0, 1.0, 0.0] } else { [0.0, -1.0, 0.0] })
            .collect(),
    )
}

/// Cores of in-plane vortices on a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexReport {
    /// Interior plaquettes `(i, j)` whose in-plane winding number is nonzero,
    /// with the winding. Plaquette `(i, j)` joins cells `(i..=i+1, j..=j+1)`.
    pub plaquettes: Vec<(usize, usize, i32)>,
    /// Connected groups of winding plaquettes.
    pub clusters: usize,
    /// Cell with the largest `|m_z|`.
    pub core_cell: usize,
    pub core_mz: f64,
    /// Smallest in-plane magnitude over the grid.
    pub min_in_plane: f64,
    /// Whether the largest `|m_z|` cell touches a winding plaquette.
    pub core_on_winding: bool,
}

impl VortexReport {
    /// One vortex: a single winding cluster with net winding ±1 whose
    /// neighborhood carries the out-of-plane extremum.
    pub fn is_single_vortex(&self) -> bool {
        let net: i32 = self.plaquettes.iter().map(|p| p.2).sum();
        self.clusters == 1 && net.abs() == 1 && self.core_on_winding
    }
}

fn wrap_angle(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Winding analysis of `m` on an `nx × ny` grid, cells numbered row by row.
pub fn detect_vortices(m: &[Vec3], nx: usize, ny: usize) -> VortexReport {
    assert_eq!(m.len(), nx * ny, "grid size mismatch");
    let at = |i: usize, j: usize| m[j * nx + i];
    let angle = |v: Vec3| v[1].atan2(v[0]);
    let mut plaquettes = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let ring = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut total = 0.0;
            for q in 0..4 {
                total += wrap_angle(angle(ring[(q + 1) % 4]) - angle(ring[q]));
            }
            let w = (total / (2.0 * PI)).round() as i32;
            if w != 0 {
                plaquettes.push((i, j, w));
            }
        }
    }
    // group plaquettes that share a corner
    let mut label = vec![usize::MAX; plaquettes.len()];
    let mut clusters = 0;
    for s in 0..plaquettes.len() {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = clusters;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for b in 0..plaquettes.len() {
                let near = plaquettes[a].0.abs_diff(plaquettes[b].0) <= 1
                    && plaquettes[a].1.abs_diff(plaquettes[b].1) <= 1;
                if label[b] == usize::MAX && near {
                    label[b] = clusters;
                    stack.push(b);
                }
            }
        }
        clusters += 1;
    }
    let (core_cell, core_mz) = m
        .iter()
        .enumerate()
        .map(|(c, v)| (c, v[2]))
        .fold((0, 0.0f64), |best, (c, z)| if z.abs() > best.1.abs() { (c, z) } else { best });
    let min_in_plane = m.iter().map(|v| v[0].hypot(v[1])).fold(f64::INFINITY, f64::min);
    let (ci, cj) = (core_cell % nx, core_cell / nx);
    let core_on_winding = plaquettes.iter().any(|&(i, j, _)| {
        (i..=i + 1).contains(&ci) && (j..=j + 1).contains(&cj)
    });
    VortexReport {
        plaquettes,
        clusters,
        core_cell,
        core_mz,
        min_in_plane,
        core_on_winding,
    }
}

#[derive(Debug, Clone)]
pub struct NeelRun {
    pub records: Vec<Record>,
    pub final_state: CellVectorField,
    pub vortex: VortexReport,
    /// Largest relative energy increase over a single step.
    pub max_energy_increase: f64,
    pub settled: bool,
    pub max_norm_defect: f64,
}

pub fn run_neel_case(
    film: &FilmSetup,
    cfg: &NeelConfig,
    inner_product: &InnerProductConfig,
    linear: SolverConfig,
    mut on_snapshot: impl FnMut(f64, &CellVectorField) -> Result<(), ExperimentError>,
) -> Result<NeelRun, ExperimentError> {
    let u = &film.units;
    let params = MaterialParams {
        alpha: u.alpha,
        eta: u.eta(),
        stray: Some(film.kernel.clone() as Arc<dyn StrayField>),
        ..Default::default()
    };
    let scheme = ThetaScheme {
        theta: cfg.theta,
        k: cfg.step,
        courant_guard: None,
    };
    let mut solver = LLSolver::new(film.mesh.clone(), inner_product, params, scheme, linear)?;
    let wall = cfg.wall_position_nm * 1e-9 / u.length_scale;
    let s0 = solver.initial_state(two_domain_state(&film.mesh, wall), 0.0)?;
    let mut snaps: Vec<f64> = cfg.snapshot_times_ns.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    let mut quiet = 0;
    let mut prev_energy: Option<f64> = None;
    let mut max_inc = 0.0f64;
    let mut settled = false;
    let mut err = None;
    let final_time = u.from_seconds(cfg.max_time_ns * 1e-9);
    let traj = solver.run_simulation(s0, final_time, |st, rec| {
        let tn = u.seconds(rec.t) * 1e9;
        while next_snap < snaps.len() && tn + 1e-12 >= snaps[next_snap] {
            if let Err(e) = on_snapshot(snaps[next_snap], &st.m) {
                err = Some(e);
                return ControlFlow::Break(());
            }
            next_snap += 1;
        }
        if let Some(e0) = prev_energy {
            let scale = e0.abs().max(f64::MIN_POSITIVE);
            max_inc = max_inc.max((rec.total_energy - e0) / scale);
            if (rec.total_energy - e0).abs() / (cfg.step * scale) < cfg.energy_rate_tolerance {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        prev_energy = Some(rec.total_energy);
        if quiet >= cfg.settle_steps {
            settled = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let g = film.mesh.grid.ok_or_else(|| ExperimentError::Config("film mesh has no grid".into()))?;
    let vortex = detect_vortices(&traj.final_state.m, g.nx, g.ny);
    Ok(NeelRun {
        max_norm_defect: traj.max_norm_defect(),
        records: traj.records,
        final_state: traj.final_state.m,
        vortex,
        max_energy_increase: max_inc,
        settled,
    })
}

pub fn run_neel_wall(cfg: &SimConfig) -> Result<NeelRun, ExperimentError> {
    cfg.validate()?;
    let units = cfg.physical.expect("validated");
    let neel = cfg.neel.clone().expect("validated");
    let film = film_setup(&units, neel.grid, neel.kernel_cache.as_deref())?;
    let out = cfg.output.dir.clone();
    let snapshots = cfg.output.snapshots;
    let mesh = film.mesh.clone();
    let run = run_neel_case(&film, &neel, &cfg.inner_product, cfg.solver, |t, m| {
        if snapshots {
            write_snapshot(&mesh, m, &out.join(format!("neel_{t:.3}ns.vtk")))?;
        }
        Ok(())
    })?;
    let mut csv = CsvTable::new(
        &["t_ns", "mx", "my", "mz", "exchange_energy", "total_energy"],
        &["t in nanoseconds; energies in units of mu0 Ms^2 L^3 per unit thickness cell"],
    );
    for r in &run.records {
        csv.push(vec![
            units.seconds(r.t) * 1e9,
            r.m_avg[0],
            r.m_avg[1],
            r.m_avg[2],
            r.exchange_energy,
            r.total_energy,
        ]);
    }
    csv.save(&out.join("neel_energy.csv"))?;
    if snapshots {
        write_snapshot(&film.mesh, &run.final_state, &out.join("neel_final.vtk"))?;
    }
    log::info!(
        "Néel wall: {} steps, settled = {}, vortex = {:?}",
        run.records.len() - 1,
        run.settled,
        run.vortex
    );
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    fn vortex_field(nx: usize, ny: usize, cx: f64, cy: f64) -> Vec<Vec3> {
        let mut m = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (i as f64 + 0.5 - cx, j as f64 + 0.5 - cy);
                let r = x.hypot(y);
                let z = (-r * r).exp();
                let s = (1.0 - z * z).sqrt() / r.max(1e-12);
                m.push(vec3::normalize([-y * s, x * s, z]));
            }
        }
        m
    }

    #[test]
    fn finds_one_vortex() {
        let r = detect_vortices(&vortex_field(12, 10, 6.3, 4.7), 12, 10);
        assert!(r.is_single_vortex(), "{r:?}");
        assert_eq!(r.plaquettes.len(), 1);
    }

    #[test]
    fn uniform_and_two_domain_have_none() {
        let m = vec![[0.0, 1.0, 0.0]; 20];
        assert!(detect_vortices(&m, 5, 4).plaquettes.is_empty());
        let two: Vec<Vec3> = (0..20).map(|c| if c % 5 < 2 { [0.0, 1.0, 0.0] } else { [0.0, -1.0, 0.0] }).collect();
        let r = detect_vortices(&two, 5, 4);
        assert!(!r.is_single_vortex());
    }
}
