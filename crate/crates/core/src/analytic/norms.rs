use crate::mesh::Mesh;
use crate::mimetic::{inner_product_f, CellVectorField, FluxField, MimeticOperators};
use crate::vec3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    /// `max_E |m_E - m^I_E|`
    pub linf: f64,
    /// `sqrt(sum_E |E| |m_E - m^I_E|^2)`
    pub q: f64,
    /// `sqrt([p - p^I, p - p^I]_F)`
    pub f: f64,
}

/// Cell errors in the maximum and Q norms.
pub fn cell_errors(mesh: &Mesh, m_h: &CellVectorField, m_i: &CellVectorField) -> (f64, f64) {
    let mut linf: f64 = 0.0;
    let mut q = 0.0;
    for ((a, b), c) in m_h.iter().zip(m_i.iter()).zip(&mesh.cells) {
        let d = vec3::dist(*a, *b);
        linf = linf.max(d);
        q += c.area * d * d;
    }
    (linf, q.sqrt())
}

pub fn flux_error(ops: &MimeticOperators, mesh: &Mesh, p_h: &FluxField, p_i: &FluxField) -> f64 {
    let diff = FluxField {
        values: p_h
            .values
            .iter()
            .zip(&p_i.values)
            .map(|(a, b)| vec3::sub(*a, *b))
            .collect(),
    };
    inner_product_f(ops, mesh, &diff, &diff).max(0.0).sqrt()
}

pub fn error_norms(
    mesh: &Mesh,
    ops: &MimeticOperators,
    m_h: &CellVectorField,
    m_i: &CellVectorField,
    p_h: &FluxField,
    p_i: &FluxField,
) -> ErrorNorms {
    let (linf, q) = cell_errors(mesh, m_h, m_i);
    ErrorNorms {
        linf,
        q,
        f: flux_error(ops, mesh, p_h, p_i),
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rate(errors: &[f64], h: &[f64]) -> f64 {
    assert_eq!(errors.len(), h.len());
    assert!(errors.len() >= 2, "need at least two points");
    let n = errors.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_exact_power_law() {
        let h = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((convergence_rate(&e, &h) - 2.0).abs() < 1e-12);
    }
}
