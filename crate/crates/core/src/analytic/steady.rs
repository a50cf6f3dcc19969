use crate::mesh::Point;
use crate::vec3::Vec3;
use std::f64::consts::PI;

/// One-dimensional wall `m = (sin φ, cos φ, 0)` with a logistic profile `φ(x1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteadySolutionParams {
    /// Domain length; the wall sits at `b / 2`.
    pub b: f64,
    /// Steepness.
    pub s: f64,
}

impl Default for SteadySolutionParams {
    fn default() -> Self {
        SteadySolutionParams { b: 1.0, s: 20.0 }
    }
}

impl SteadySolutionParams {
    /// `(φ, φ', φ'')` at `x1`.
    pub fn profile(&self, x1: f64) -> (f64, f64, f64) {
        let a = self.s * PI;
        let u = 1.0 / (1.0 + (-a * (x1 - 0.5 * self.b)).exp());
        let w = u * (1.0 - u);
        (PI * u, PI * a * w, PI * a * a * w * (1.0 - 2.0 * u))
    }
}

pub fn steady_solution(x: Point, p: &SteadySolutionParams) -> Vec3 {
    let (phi, _, _) = p.profile(x[0]);
    [phi.sin(), phi.cos(), 0.0]
}

pub fn steady_gradient(x: Point, p: &SteadySolutionParams) -> [Vec3; 2] {
    let (phi, d1, _) = p.profile(x[0]);
    [[d1 * phi.cos(), -d1 * phi.sin(), 0.0], [0.0; 3]]
}

/// Applied field balancing the exchange field, `h_e = -Δm`.
pub fn steady_external_field(x: Point, p: &SteadySolutionParams) -> Vec3 {
    let (phi, d1, d2) = p.profile(x[0]);
    let (s, c) = phi.sin_cos();
    [d1 * d1 * s - d2 * c, d1 * d1 * c + d2 * s, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    #[test]
    fn midpoint_and_limits() {
        let p = SteadySolutionParams::default();
        assert!(vec3::dist(steady_solution([0.5, 0.3], &p), [1.0, 0.0, 0.0]) < 1e-15);
        assert!(vec3::dist(steady_solution([-50.0, 0.0], &p), [0.0, 1.0, 0.0]) < 1e-15);
        assert!(vec3::dist(steady_solution([50.0, 0.0], &p), [0.0, -1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        let p = SteadySolutionParams::default();
        let h = 1e-6;
        for x in [0.3, 0.45, 0.5, 0.52, 0.7] {
            let (_, d1, d2) = p.profile(x);
            let (a, _, _) = p.profile(x - h);
            let (b, _, _) = p.profile(x + h);
            let (_, a1, _) = p.profile(x - h);
            let (_, b1, _) = p.profile(x + h);
            assert!(((b - a) / (2.0 * h) - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            assert!(((b1 - a1) / (2.0 * h) - d2).abs() < 1e-5 * (1.0 + d2.abs()));
        }
    }
}
