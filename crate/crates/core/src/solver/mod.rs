//! Time stepping of the mixed mimetic Landau–Lifshitz discretization.

mod dofs;
mod params;
mod systems;

pub use dofs::EdgeDofs;
pub use params::{
    ll_rhs, low_order_forcing, torque_matrix, DirichletData, ExternalField, MaterialParams, Theta,
    ThetaScheme,
};
pub use systems::{EdgeSystem, ImplicitSystem};

use crate::linalg::{solve_preconditioned, SolveError, SolverConfig};
use crate::mesh::{BoundaryCondition, Mesh};
use crate::mimetic::{
    CellVectorField, EdgeVectorField, FluxField, InnerProductConfig, MimeticError, MimeticOperators,
};
use crate::stray::StrayError;
use crate::vec3::{self, Vec3};
use std::ops::ControlFlow;
use thiserror::Error;

/// Smallest `|m̂_E|` accepted before renormalization.
pub const PROJECTION_FLOOR: f64 = 0.5;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("linear solve failed at step {step}: {source}")]
    Linear {
        step: usize,
        #[source]
        source: SolveError,
    },
    #[error("|m| = {norm:e} in cell {cell} before renormalization at step {step}")]
    Projection { step: usize, cell: usize, norm: f64 },
    #[error("k eta / min|E| = {ratio:e} exceeds the Courant guard {bound:e}")]
    Courant { ratio: f64, bound: f64 },
    #[error(transparent)]
    Stray(#[from] StrayError),
    #[error(transparent)]
    Mimetic(#[from] MimeticError),
    #[error("invalid setup: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub linear_iterations: usize,
    pub linear_residual: f64,
    pub edge_iterations: usize,
}

/// Snapshot at one time level. `m_edges` and `p` are consistent with `m`:
/// the edge values solve the continuity equations for the current cell values.
#[derive(Debug, Clone)]
pub struct LLState {
    pub t: f64,
    pub step: usize,
    pub m: CellVectorField,
    pub m_edges: EdgeVectorField,
    pub p: FluxField,
    /// `(1/2) [p, p]_F`
    pub exchange_energy: f64,
    /// Stray field of `m`, when enabled.
    pub h_stray: Option<Vec<Vec3>>,
    /// Edge values returned by the implicit block solve, before the cell
    /// values were renormalized. `None` after explicit steps.
    pub solve_edges: Option<EdgeVectorField>,
    pub info: StepInfo,
}

/// One row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    pub m_avg: Vec3,
    pub exchange_energy: f64,
    pub total_energy: f64,
    pub norm_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub final_state: LLState,
}

impl Trajectory {
    pub fn max_norm_defect(&self) -> f64 {
        self.records.iter().map(|r| r.norm_defect).fold(0.0, f64::max)
    }
}

pub struct LLSolver {
    pub mesh: Mesh,
    pub ops: MimeticOperators,
    pub params: MaterialParams,
    pub scheme: ThetaScheme,
    /// Settings for the implicit block system.
    pub linear: SolverConfig,
    /// Settings for the edge continuity solves (always CG).
    pub edge_linear: SolverConfig,
    pub dofs: EdgeDofs,
    dirichlet: Option<DirichletData>,
    edge_system: EdgeSystem,
    implicit: Option<ImplicitSystem>,
    min_area: f64,
    warned_courant: bool,
    /// Raw block solutions of the last two implicit steps, keyed by step index,
    /// used to extrapolate the next initial guess.
    history: Vec<(usize, Vec<f64>)>,
}

impl LLSolver {
    pub fn new(
        mesh: Mesh,
        ip: &InnerProductConfig,
        params: MaterialParams,
        scheme: ThetaScheme,
        linear: SolverConfig,
    ) -> Result<Self, StepError> {
        params.validate().map_err(StepError::Config)?;
        if !(scheme.k > 0.0) {
            return Err(StepError::Config(format!("time step must be positive, got {}", scheme.k)));
        }
        if let ExternalField::PerCell(v) = &params.external {
            if v.len() != mesh.num_cells() {
                return Err(StepError::Config("external field length differs from cell count".into()));
            }
        }
        let ops = MimeticOperators::new(&mesh, ip)?;
        let dofs = EdgeDofs::new(&mesh);
        let edge_system = EdgeSystem::new(&mesh, &ops, &dofs);
        let min_area = mesh.cells.iter().map(|c| c.area).fold(f64::INFINITY, f64::min);
        let edge_linear = SolverConfig {
            tolerance: linear.tolerance.min(1e-12),
            ..SolverConfig::cg()
        };
        Ok(LLSolver {
            mesh,
            ops,
            params,
            scheme,
            linear,
            edge_linear,
            dofs,
            dirichlet: None,
            edge_system,
            implicit: None,
            min_area,
            warned_courant: false,
            history: Vec::new(),
        })
    }

    /// Boundary data for Dirichlet faces; required when the mesh has any.
    pub fn with_dirichlet(mut self, data: DirichletData) -> Self {
        self.dirichlet = Some(data);
        self
    }

    pub fn courant_ratio(&self) -> f64 {
        self.scheme.k * self.params.eta / self.min_area
    }

    fn dirichlet_values(&self, t: f64) -> Result<Vec<Option<Vec3>>, StepError> {
        let mut out = vec![None; self.mesh.num_faces()];
        if !self.dofs.has_dirichlet {
            return Ok(out);
        }
        let g = self
            .dirichlet
            .as_ref()
            .ok_or_else(|| StepError::Config("Dirichlet faces present but no boundary data".into()))?;
        for (f, bc) in self.mesh.boundary.iter().enumerate() {
            if *bc == Some(BoundaryCondition::Dirichlet) {
                out[f] = Some(g(self.mesh.faces[f].centroid, t));
            }
        }
        Ok(out)
    }

    /// Edge values, flux, energy and stray field for cell values `m` at time `t`.
    /// `m_edges` seeds the edge solve.
    fn complete_state(
        &self,
        t: f64,
        step: usize,
        m: CellVectorField,
        mut m_edges: EdgeVectorField,
        mut info: StepInfo,
    ) -> Result<LLState, StepError> {
        let dir = self.dirichlet_values(t)?;
        let (it, _) = self
            .edge_system
            .solve(&self.mesh, &self.ops, &self.dofs, &m, &dir, &mut m_edges, &self.edge_linear)
            .map_err(|source| StepError::Linear { step, source })?;
        info.edge_iterations += it;
        let p = self.ops.flux_field(&self.mesh, &m, &m_edges);
        let exchange_energy = self.ops.gradient_energy(&self.mesh, &m, &m_edges);
        let h_stray = match &self.params.stray {
            Some(s) => Some(s.field(&m)?),
            None => None,
        };
        Ok(LLState {
            t,
            step,
            m,
            m_edges,
            p,
            exchange_energy,
            h_stray,
            solve_edges: None,
            info,
        })
    }

    /// State at time `t0` for the initial cell values, which are normalized.
    pub fn initial_state(&self, m0: CellVectorField, t0: f64) -> Result<LLState, StepError> {
        if m0.len() != self.mesh.num_cells() {
            return Err(StepError::Config("initial field length differs from cell count".into()));
        }
        let mut m = m0;
        for (c, v) in m.iter_mut().enumerate() {
            let n = vec3::norm(*v);
            if !(n > 0.0) || !n.is_finite() {
                return Err(StepError::Projection { step: 0, cell: c, norm: n });
            }
            *v = vec3::scale(*v, 1.0 / n);
        }
        let guess = self.average_to_faces(&m);
        self.complete_state(t0, 0, m, guess, StepInfo::default())
    }

    fn average_to_faces(&self, m: &[Vec3]) -> EdgeVectorField {
        EdgeVectorField(
            self.mesh
                .faces
                .iter()
                .map(|f| match f.cells {
                    [Some(a), Some(b)] => vec3::scale(vec3::add(m[a], m[b]), 0.5),
                    [Some(a), None] | [None, Some(a)] => m[a],
                    [None, None] => [0.0; 3],
                })
                .collect(),
        )
    }

    /// `m^j + k f(m^j)` per cell.
    fn explicit_part(&self, s: &LLState) -> Vec<Vec3> {
        let k = self.scheme.k;
        s.m.iter()
            .enumerate()
            .map(|(c, &m)| {
                let hs = s.h_stray.as_ref().map_or([0.0; 3], |h| h[c]);
                let hb = self.params.low_order_field(m, hs, self.params.external.at(c));
                vec3::axpy(m, k, self.params.torque(m, hb))
            })
            .collect()
    }

    fn renormalize(step: usize, m_hat: Vec<Vec3>) -> Result<CellVectorField, StepError> {
        let mut out = Vec::with_capacity(m_hat.len());
        for (c, v) in m_hat.into_iter().enumerate() {
            let n = vec3::norm(v);
            if !(n >= PROJECTION_FLOOR) || !n.is_finite() {
                return Err(StepError::Projection { step, cell: c, norm: n });
            }
            out.push(vec3::scale(v, 1.0 / n));
        }
        Ok(CellVectorField(out))
    }

    pub fn step(&mut self, s: &LLState) -> Result<LLState, StepError> {
        match self.scheme.theta {
            Theta::Explicit => self.explicit_step(s),
            Theta::Implicit => self.implicit_step(s),
        }
    }

    fn time_of(&self, s: &LLState) -> f64 {
        s.t + self.scheme.k
    }

    /// Gradient from the old level: `m̂ = m + k(-m x h - α m x (m x h))` with
    /// `h = -η DIV p + h̄`, then projection to the sphere.
    pub fn explicit_step(&mut self, s: &LLState) -> Result<LLState, StepError> {
        let ratio = self.courant_ratio();
        match self.scheme.courant_guard {
            Some(bound) if ratio > bound => return Err(StepError::Courant { ratio, bound }),
            None if ratio > 0.25 && !self.warned_courant => {
                log::warn!("explicit step with k eta / min|E| = {ratio:.3e}; expect instability");
                self.warned_courant = true;
            }
            _ => {}
        }
        let k = self.scheme.k;
        let eta = self.params.eta;
        let mut m_hat = self.explicit_part(s);
        for (c, l) in self.ops.locals.iter().enumerate() {
            let faces = &self.mesh.cells[c].faces;
            // DIV p = (cwc_ee m_E - sum_i cwc_e_i m̃_i) / |E|
            let mut div = vec3::scale(s.m[c], l.cwc_ee);
            for (i, &f) in faces.iter().enumerate() {
                div = vec3::axpy(div, -l.cwc_e[i], s.m_edges[f]);
            }
            let h = vec3::scale(div, -eta / l.area);
            m_hat[c] = vec3::axpy(m_hat[c], k, self.params.torque(s.m[c], h));
        }
        let step = s.step + 1;
        let m = Self::renormalize(step, m_hat)?;
        self.complete_state(self.time_of(s), step, m, s.m_edges.clone(), StepInfo::default())
    }

    /// Linearly implicit step: one block solve for `(m̂, m̃)`, then projection.
    pub fn implicit_step(&mut self, s: &LLState) -> Result<LLState, StepError> {
        if self.implicit.is_none() {
            self.implicit = Some(ImplicitSystem::new(&self.mesh, &self.ops, &self.dofs));
        }
        let step = s.step + 1;
        let t1 = self.time_of(s);
        let dir = self.dirichlet_values(t1)?;
        let rhs_cells = self.explicit_part(s);
        let sys = self.implicit.as_mut().expect("built above");
        let b = sys.assemble(
            &self.mesh,
            &self.ops,
            &s.m,
            &rhs_cells,
            &dir,
            self.scheme.k * self.params.eta,
            self.params.alpha,
            self.params.precession,
        );
        let nc = self.mesh.num_cells();
        let mut x = vec![0.0; sys.size()];
        match self.history.as_slice() {
            [(j0, x0), (j1, x1)] if *j1 == s.step && *j0 + 1 == *j1 => {
                for i in 0..x.len() {
                    x[i] = 2.0 * x1[i] - x0[i];
                }
            }
            _ => {
                for c in 0..nc {
                    x[3 * c..3 * c + 3].copy_from_slice(&s.m[c]);
                }
                for (f, d) in self.dofs.face_dof.iter().enumerate() {
                    if let Some(d) = d {
                        x[3 * (nc + d)..3 * (nc + d) + 3].copy_from_slice(&s.m_edges[f]);
                    }
                }
            }
        }
        let pc = sys.preconditioner(&self.linear);
        let st = solve_preconditioned(&sys.matrix, pc.as_ref(), &b, &mut x, &self.linear)
            .map_err(|source| StepError::Linear { step, source })?;
        let m_hat: Vec<Vec3> = (0..nc).map(|c| [x[3 * c], x[3 * c + 1], x[3 * c + 2]]).collect();
        let mut edges = s.m_edges.clone();
        for (f, d) in self.dofs.face_dof.iter().enumerate() {
            if let Some(d) = d {
                let o = 3 * (nc + d);
                edges[f] = [x[o], x[o + 1], x[o + 2]];
            }
        }
        let m = Self::renormalize(step, m_hat)?;
        if self.history.len() == 2 {
            self.history.remove(0);
        }
        self.history.push((step, x));
        let info = StepInfo {
            linear_iterations: st.iterations,
            linear_residual: st.residual,
            edge_iterations: 0,
        };
        let mut next = self.complete_state(t1, step, m, edges.clone(), info)?;
        next.solve_edges = Some(edges);
        Ok(next)
    }

    /// `η/2 [p,p]_F + Q/2 Σ|E|(m_y² + m_z²) - 1/2 Σ|E| h_s·m - Σ|E| h_e·m`.
    pub fn total_energy(&self, s: &LLState) -> f64 {
        let mut e = self.params.eta * s.exchange_energy;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let m = s.m[c];
            let mut d = 0.5 * self.params.q_aniso * (m[1] * m[1] + m[2] * m[2]);
            if let Some(h) = &s.h_stray {
                d -= 0.5 * vec3::dot(h[c], m);
            }
            d -= vec3::dot(self.params.external.at(c), m);
            e += cell.area * d;
        }
        e
    }

    pub fn record(&self, s: &LLState) -> Record {
        Record {
            step: s.step,
            t: s.t,
            m_avg: s.m.average(),
            exchange_energy: s.exchange_energy,
            total_energy: self.total_energy(s),
            norm_defect: s.m.max_norm_defect(),
        }
    }

    /// Number of steps to reach `final_time` from `t0`, `[ (T - t0) / k ]`.
    pub fn num_steps(&self, t0: f64, final_time: f64) -> usize {
        let r = (final_time - t0) / self.scheme.k;
        if r <= 0.0 {
            return 0;
        }
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.floor() as usize
        }
    }

    /// Advances `initial` to `final_time`, recording every step. The observer
    /// sees each new state and may stop the run early.
    pub fn run_simulation(
        &mut self,
        initial: LLState,
        final_time: f64,
        mut observer: impl FnMut(&LLState, &Record) -> ControlFlow<()>,
    ) -> Result<Trajectory, StepError> {
        let steps = self.num_steps(initial.t, final_time);
        let mut state = initial;
        let r0 = self.record(&state);
        let mut records = vec![r0];
        if observer(&state, &r0).is_break() {
            return Ok(Trajectory { records, final_state: state });
        }
        let t0 = state.t;
        for j in 0..steps {
            let mut next = self.step(&state)?;
            // avoid drift from repeated additions
            next.t = t0 + (j + 1) as f64 * self.scheme.k;
            let r = self.record(&next);
            records.push(r);
            state = next;
            if observer(&state, &r).is_break() {
                break;
            }
        }
        Ok(Trajectory { records, final_state: state })
    }
}
