use crate::linalg::SolverConfig;
use crate::mesh::Mesh;
use crate::mimetic::{CellVectorField, InnerProductConfig};
use crate::solver::{ExternalField, LLSolver, MaterialParams, StepError, ThetaScheme};
use crate::stray::StrayField;
use crate::vec3::{self, Vec3};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Field ramp used to prepare the S-state: saturate along `direction`, lower
/// the field in fixed decrements with one implicit step each, then relax at
/// zero field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SStateProtocol {
    /// Initial `μ0 H` [T].
    pub start_field: f64,
    /// Field decrement per step [T].
    pub decrement: f64,
    pub direction: Vec3,
    /// Dimensionless time step of the ramp and the relaxation.
    pub step: f64,
    /// Damping used while preparing the state.
    pub alpha: f64,
    /// Longest dimensionless relaxation time at zero field.
    pub relax_time: f64,
    /// Stop relaxing once `max_E |m_E^{j+1} - m_E^j| / k` drops below this.
    pub rate_tolerance: f64,
}

impl Default for SStateProtocol {
    fn default() -> Self {
        SStateProtocol {
            start_field: 2.0,
            decrement: 0.02,
            direction: [1.0, 1.0, 1.0],
            step: 0.18,
            alpha: 1.0,
            relax_time: 400.0,
            rate_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SState {
    pub m: CellVectorField,
    pub ramp_steps: usize,
    pub relax_steps: usize,
    /// Last `max_E |Δm_E| / k`.
    pub final_rate: f64,
    pub settled: bool,
}

/// Relaxed zero-field state reached from saturation along the protocol direction.
/// `field_unit` is `μ0 M_s` in tesla.
pub fn generate_s_state(
    mesh: &Mesh,
    stray: Arc<dyn StrayField>,
    eta: f64,
    field_unit: f64,
    protocol: &SStateProtocol,
    inner_product: &InnerProductConfig,
    linear: SolverConfig,
) -> Result<SState, StepError> {
    let dir = vec3::normalize(protocol.direction);
    let params = MaterialParams {
        alpha: protocol.alpha,
        eta,
        stray: Some(stray),
        ..Default::default()
    };
    let mut solver = LLSolver::new(
        mesh.clone(),
        inner_product,
        params,
        ThetaScheme::implicit(protocol.step),
        linear,
    )?;
    let mut state = solver.initial_state(CellVectorField::uniform(mesh.num_cells(), dir), 0.0)?;
    let ramp = (protocol.start_field / protocol.decrement).round() as usize;
    for i in 0..ramp {
        let b = protocol.start_field - (i + 1) as f64 * protocol.decrement;
        solver.params.external = ExternalField::Uniform(vec3::scale(dir, b.max(0.0) / field_unit));
        state = solver.step(&state)?;
    }
    solver.params.external = ExternalField::Zero;
    let max_steps = (protocol.relax_time / protocol.step).ceil() as usize;
    let mut rate = f64::INFINITY;
    let mut relax_steps = 0;
    while relax_steps < max_steps {
        let next = solver.step(&state)?;
        rate = next
            .m
            .iter()
            .zip(state.m.iter())
            .map(|(a, b)| vec3::dist(*a, *b))
            .fold(0.0, f64::max)
            / protocol.step;
        state = next;
        relax_steps += 1;
        if rate < protocol.rate_tolerance {
            break;
        }
    }
    if rate >= protocol.rate_tolerance {
        log::warn!("S-state relaxation stopped with max |dm/dt| = {rate:.3e}");
    }
    Ok(SState {
        m: state.m,
        ramp_steps: ramp,
        relax_steps,
        final_rate: rate,
        settled: rate < protocol.rate_tolerance,
    })
}
