use crate::mesh::Point;
use crate::stray::StrayField;
use crate::vec3::{self, Vec3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Prescribed edge magnetization on Dirichlet faces, as a function of face midpoint and time.
pub type DirichletData = Arc<dyn Fn(Point, f64) -> Vec3 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ExternalField {
    #[default]
    Zero,
    Uniform(Vec3),
    PerCell(Vec<Vec3>),
}

impl ExternalField {
    pub fn at(&self, cell: usize) -> Vec3 {
        match self {
            ExternalField::Zero => [0.0; 3],
            ExternalField::Uniform(v) => *v,
            ExternalField::PerCell(v) => v[cell],
        }
    }
}

/// Dimensionless material data of the Landau–Lifshitz equation.
#[derive(Clone)]
pub struct MaterialParams {
    /// Damping; zero gives the undamped precession limit.
    pub alpha: f64,
    /// Exchange constant.
    pub eta: f64,
    /// Uniaxial anisotropy along x1.
    pub q_aniso: f64,
    pub external: ExternalField,
    /// Demagnetizing field operator; `None` disables it.
    pub stray: Option<Arc<dyn StrayField>>,
    /// Keep the gyroscopic `-m x h` term. Off gives the harmonic map heat flow.
    pub precession: bool,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            alpha: 1.0,
            eta: 1.0,
            q_aniso: 0.0,
            external: ExternalField::Zero,
            stray: None,
            precession: true,
        }
    }
}

impl fmt::Debug for MaterialParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaterialParams")
            .field("alpha", &self.alpha)
            .field("eta", &self.eta)
            .field("q_aniso", &self.q_aniso)
            .field("external", &self.external)
            .field("stray", &self.stray.is_some())
            .field("precession", &self.precession)
            .finish()
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha >= 0.0) {
            return Err(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.eta > 0.0) {
            return Err(format!("eta must be > 0, got {}", self.eta));
        }
        if !self.precession && self.alpha == 0.0 {
            return Err("alpha = 0 without precession leaves no dynamics".into());
        }
        Ok(())
    }

    /// Low-order field `-Q (m_y e_y + m_z e_z) + h_s + h_e`.
    pub fn low_order_field(&self, m: Vec3, h_stray: Vec3, h_ext: Vec3) -> Vec3 {
        let aniso = [0.0, -self.q_aniso * m[1], -self.q_aniso * m[2]];
        vec3::add(vec3::add(aniso, h_stray), h_ext)
    }

    /// `-m x h - α m x (m x h)`, with the first term dropped when precession is off.
    pub fn torque(&self, m: Vec3, h: Vec3) -> Vec3 {
        ll_rhs(m, h, self.alpha, self.precession)
    }
}

/// Right side of the Landau–Lifshitz equation for the field `h`.
pub fn ll_rhs(m: Vec3, h: Vec3, alpha: f64, precession: bool) -> Vec3 {
    let mh = vec3::cross(m, h);
    let damp = vec3::scale(vec3::cross(m, mh), -alpha);
    if precession {
        vec3::sub(damp, mh)
    } else {
        damp
    }
}

/// `f(m)` for a given low-order field.
pub fn low_order_forcing(m: Vec3, h_bar: Vec3, alpha: f64) -> Vec3 {
    ll_rhs(m, h_bar, alpha, true)
}

/// Matrix `Â` with `Â v = -m x v - α m x (m x v)`, row major.
pub fn torque_matrix(m: Vec3, alpha: f64, precession: bool) -> [[f64; 3]; 3] {
    let g = if precession { 1.0 } else { 0.0 };
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = -alpha * m[i] * m[j];
        }
        a[i][i] += alpha;
    }
    a[0][1] += g * m[2];
    a[0][2] -= g * m[1];
    a[1][0] -= g * m[2];
    a[1][2] += g * m[0];
    a[2][0] += g * m[1];
    a[2][1] -= g * m[0];
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Theta {
    /// Gradient taken at the old time level.
    Explicit,
    /// Gradient taken at the new time level, one linear solve per step.
    #[default]
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaScheme {
    pub theta: Theta,
    /// Time step.
    pub k: f64,
    /// Upper bound on `k eta / min|E|` enforced by the explicit scheme.
    #[serde(default)]
    pub courant_guard: Option<f64>,
}

impl ThetaScheme {
    pub fn explicit(k: f64) -> Self {
        ThetaScheme {
            theta: Theta::Explicit,
            k,
            courant_guard: None,
        }
    }

    pub fn implicit(k: f64) -> Self {
        ThetaScheme {
            theta: Theta::Implicit,
            k,
            courant_guard: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_examples() {
        assert_eq!(low_order_forcing([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 0.3), [0.0; 3]);
        let f = low_order_forcing([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.02);
        assert!(vec3::dist(f, [0.0, 0.02, -1.0]) < 1e-16);
    }

    #[test]
    fn zero_field_gives_zero_forcing() {
        let p = MaterialParams::default();
        let h = p.low_order_field([0.6, 0.8, 0.0], [0.0; 3], [0.0; 3]);
        assert_eq!(p.torque([0.6, 0.8, 0.0], h), [0.0; 3]);
    }

    #[test]
    fn matrix_matches_torque() {
        let m = vec3::normalize([0.3, -0.5, 0.8]);
        let v = [0.7, 0.1, -0.4];
        for prec in [true, false] {
            let a = torque_matrix(m, 0.3, prec);
            let av: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i][j] * v[j]).sum()).collect();
            let t = ll_rhs(m, v, 0.3, prec);
            for i in 0..3 {
                assert!((av[i] - t[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn skew_part_for_vertical_m() {
        let a = torque_matrix([0.0, 0.0, 1.0], 0.0, true);
        assert_eq!(a, [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    }
}
