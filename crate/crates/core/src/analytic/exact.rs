use crate::mesh::Point;
use crate::vec3::Vec3;
use std::f64::consts::PI;

/// Periodic precessing spin wave solving `m_t = -m x Δm - α m x (m x Δm)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolutionParams {
    /// Cone angle of the initial state.
    pub beta: f64,
    /// Wave number along `x1 + x2`.
    pub kappa: f64,
    /// Damping; must be positive.
    pub alpha: f64,
}

impl ExactSolutionParams {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "damping must be positive, got {alpha}");
        ExactSolutionParams {
            beta: PI / 12.0,
            kappa: 2.0 * PI,
            alpha,
        }
    }

    fn growth(&self, t: f64) -> f64 {
        (2.0 * self.kappa * self.kappa * self.alpha * t).exp()
    }

    /// Normalization `d(t)`.
    pub fn d(&self, t: f64) -> f64 {
        let e = self.growth(t);
        (self.beta.sin().powi(2) + e * e * self.beta.cos().powi(2)).sqrt()
    }

    /// Phase shift `g(t)`.
    pub fn g(&self, t: f64) -> f64 {
        let e = self.growth(t);
        let c = self.beta.cos();
        ((self.d(t) + e * c) / (1.0 + c)).ln() / self.alpha
    }

    /// Exchange energy `(1/2) ∫ |∇m|^2` over the unit square.
    pub fn exchange_energy(&self, t: f64) -> f64 {
        (self.kappa * self.beta.sin() / self.d(t)).powi(2)
    }
}

pub fn exact_solution(x: Point, t: f64, p: &ExactSolutionParams) -> Vec3 {
    let d = p.d(t);
    let theta = p.kappa * (x[0] + x[1]) + p.g(t);
    let s = p.beta.sin() / d;
    [s * theta.cos(), s * theta.sin(), p.growth(t) * p.beta.cos() / d]
}

/// `[∂m/∂x1, ∂m/∂x2]`; the two are equal for this solution.
pub fn exact_gradient(x: Point, t: f64, p: &ExactSolutionParams) -> [Vec3; 2] {
    let theta = p.kappa * (x[0] + x[1]) + p.g(t);
    let s = p.kappa * p.beta.sin() / p.d(t);
    let g = [-s * theta.sin(), s * theta.cos(), 0.0];
    [g, g]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    #[test]
    fn initial_value_at_origin() {
        let p = ExactSolutionParams::new(0.5);
        assert_eq!(p.d(0.0), 1.0);
        assert_eq!(p.g(0.0), 0.0);
        let m = exact_solution([0.0, 0.0], 0.0, &p);
        let b = PI / 12.0;
        assert!(vec3::dist(m, [b.sin(), 0.0, b.cos()]) < 1e-15);
    }

    #[test]
    fn unit_length() {
        let p = ExactSolutionParams::new(1.0);
        for i in 0..50 {
            let x = [0.37 * i as f64 % 1.0, 0.61 * i as f64 % 1.0];
            let t = 1e-4 * i as f64;
            assert!((vec3::norm(exact_solution(x, t, &p)) - 1.0).abs() < 1e-14);
        }
    }
}
