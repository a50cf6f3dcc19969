use crate::vec3::{self, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MU0: f64 = 4.0e-7 * PI;

/// How dimensionless time relates to seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScaling {
    /// `t_phys = (1 + α²) / (γ M_s) t`, for γ in m/(A s).
    Gilbert,
    /// `t_phys = t / (μ0 γ M_s)`, for γ in 1/(T s).
    Landau,
}

/// Material and geometry in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalUnits {
    /// Exchange constant `A` [J/m].
    pub exchange: f64,
    /// Saturation magnetization `M_s` [A/m].
    pub saturation: f64,
    /// Gyromagnetic ratio, units per `time_scaling`.
    pub gyromagnetic: f64,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    pub alpha: f64,
    /// Cell size `[h_x, h_y, thickness]` [m].
    pub cell_size: [f64; 3],
    /// `μ0 H_e` [mT].
    #[serde(default)]
    pub applied_field_mt: [f64; 3],
    pub time_scaling: TimeScaling,
    /// Length unit `L` [m].
    #[serde(default = "default_length")]
    pub length_scale: f64,
}

fn default_mu0() -> f64 {
    MU0
}

fn default_length() -> f64 {
    1e-9
}

/// The same setup in solver units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensional {
    pub eta: f64,
    pub alpha: f64,
    /// Seconds per unit of dimensionless time.
    pub time_unit: f64,
    /// Tesla per unit of dimensionless field, `μ0 M_s`.
    pub field_unit: f64,
    /// Metres per unit length.
    pub length_unit: f64,
    pub cell_size: [f64; 3],
    pub applied_field: Vec3,
    pub time_scaling: TimeScaling,
}

impl PhysicalUnits {
    pub fn eta(&self) -> f64 {
        self.exchange / (self.mu0 * self.saturation.powi(2) * self.length_scale.powi(2))
    }

    pub fn time_unit(&self) -> f64 {
        match self.time_scaling {
            TimeScaling::Gilbert => (1.0 + self.alpha * self.alpha) / (self.gyromagnetic * self.saturation),
            TimeScaling::Landau => 1.0 / (self.mu0 * self.gyromagnetic * self.saturation),
        }
    }

    pub fn field_unit(&self) -> f64 {
        self.mu0 * self.saturation
    }

    /// Dimensionless field for `μ0 H` given in mT.
    pub fn field_from_mt(&self, b_mt: Vec3) -> Vec3 {
        vec3::scale(b_mt, 1e-3 / self.field_unit())
    }

    pub fn seconds(&self, t: f64) -> f64 {
        t * self.time_unit()
    }

    pub fn from_seconds(&self, s: f64) -> f64 {
        s / self.time_unit()
    }

    pub fn nondimensionalize(&self) -> Nondimensional {
        Nondimensional {
            eta: self.eta(),
            alpha: self.alpha,
            time_unit: self.time_unit(),
            field_unit: self.field_unit(),
            length_unit: self.length_scale,
            cell_size: self.cell_size.map(|h| h / self.length_scale),
            applied_field: self.field_from_mt(self.applied_field_mt),
            time_scaling: self.time_scaling,
        }
    }
}

impl Nondimensional {
    /// Recovers the SI description given `M_s`.
    pub fn to_physical(&self, saturation: f64) -> PhysicalUnits {
        let mu0 = self.field_unit / saturation;
        let gyromagnetic = match self.time_scaling {
            TimeScaling::Gilbert => (1.0 + self.alpha * self.alpha) / (self.time_unit * saturation),
            TimeScaling::Landau => 1.0 / (self.time_unit * mu0 * saturation),
        };
        PhysicalUnits {
            exchange: self.eta * mu0 * saturation * saturation * self.length_unit.powi(2),
            saturation,
            gyromagnetic,
            mu0,
            alpha: self.alpha,
            cell_size: self.cell_size.map(|h| h * self.length_unit),
            applied_field_mt: vec3::scale(self.applied_field, 1e3 * self.field_unit),
            time_scaling: self.time_scaling,
            length_scale: self.length_unit,
        }
    }
}

/// Permalloy film of the fourth standard problem, no applied field.
pub fn nist4_units() -> PhysicalUnits {
    PhysicalUnits {
        exchange: 2.6e-11,
        saturation: 8.0e5,
        gyromagnetic: 2.21e5,
        mu0: MU0,
        alpha: 0.02,
        cell_size: [5e-9, 5e-9, 3e-9],
        applied_field_mt: [0.0; 3],
        time_scaling: TimeScaling::Gilbert,
        length_scale: 1e-9,
    }
}

/// Thin film used for the Néel wall relaxation.
pub fn neel_units() -> PhysicalUnits {
    PhysicalUnits {
        exchange: 2.1e-11,
        saturation: 1.71e6,
        gyromagnetic: 1.76e11,
        mu0: MU0,
        alpha: 0.02,
        cell_size: [3.75e-9, 3.75e-9, 7e-9],
        applied_field_mt: [0.0; 3],
        time_scaling: TimeScaling::Landau,
        length_scale: 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_time_steps() {
        let u = nist4_units();
        // 0.01 / (γ M_s) ≈ 56.56 fs
        let s = 0.01 / (u.gyromagnetic * u.saturation);
        assert!((s * 1e15 - 56.56).abs() < 0.01);
        let n = neel_units();
        assert!((n.seconds(0.25) * 1e12 - 0.66).abs() < 0.01);
    }

    #[test]
    fn nist_eta() {
        // A / (μ0 M_s² L²) with A = 2.6e-11
        let eta = nist4_units().eta();
        assert!((eta - 2.6e-11 / (MU0 * 6.4e11 * 1e-18)).abs() < 1e-12 * eta);
    }
}
