use crate::mesh::Mesh;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MimeticError {
    #[error("cell {cell}: {what}")]
    Degenerate { cell: usize, what: String },
}

/// Scalar stabilization for the flux inner-product matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GammaRule {
    /// `gamma = |E|`
    #[default]
    Area,
    /// `gamma = tr(R R^T) / (2 |E|)`
    HalfTrace,
}

/// Scalar stabilization for the inverse inner-product matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaTildeRule {
    /// `gamma_tilde = 1 / |E|`
    InverseArea,
    /// `gamma_tilde = gamma0 * tr(N N^T) / |E|`
    ScaledTrace(f64),
}

impl Default for GammaTildeRule {
    fn default() -> Self {
        GammaTildeRule::InverseArea
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct InnerProductConfig {
    #[serde(default)]
    pub gamma: GammaRule,
    #[serde(default)]
    pub gamma_tilde: GammaTildeRule,
}

/// Per-cell mimetic matrices.
#[derive(Debug, Clone)]
pub struct LocalInnerProduct {
    /// Rows are outward unit normals.
    pub n: DMatrix<f64>,
    /// Rows are `|f| (x_f - x_E)`.
    pub r: DMatrix<f64>,
    /// Stabilized solution of `M N = R`.
    pub m: DMatrix<f64>,
    /// Stabilized solution of `W R = N`, built directly.
    pub m_inv: DMatrix<f64>,
    /// Exact inverse of `m_inv`; the flux inner product dual to the gradient.
    pub mass: DMatrix<f64>,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub area: f64,
    /// Face lengths `|f_i|` (the diagonal of `C`).
    pub lengths: DVector<f64>,
    /// `C m_inv C`
    pub cwc: DMatrix<f64>,
    /// `C m_inv C e`
    pub cwc_e: DVector<f64>,
    /// `e^T C m_inv C e`
    pub cwc_ee: f64,
}

pub fn assemble_nr(mesh: &Mesh, cell: usize) -> Result<(DMatrix<f64>, DMatrix<f64>), MimeticError> {
    let c = &mesh.cells[cell];
    let k = c.num_faces();
    let mut n = DMatrix::zeros(k, 2);
    let mut r = DMatrix::zeros(k, 2);
    for i in 0..k {
        let face = &mesh.faces[c.faces[i]];
        if !(face.length > 0.0) {
            return Err(MimeticError::Degenerate {
                cell,
                what: format!("face {} has zero length", c.faces[i]),
            });
        }
        let nv = mesh.outward_normal(cell, i);
        for d in 0..2 {
            n[(i, d)] = nv[d];
            r[(i, d)] = face.length * (face.centroid[d] - c.centroid[d]);
        }
    }
    Ok((n, r))
}

/// `I - A (A^T A)^{-1} A^T`, through an orthonormal basis of the columns
/// so thin cells do not pay for the conditioning of `A^T A`.
fn complement_projector(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let qr = a.clone().qr();
    let rd = qr.r().diagonal().abs();
    if !(rd.min() > 1e-14 * rd.max()) {
        return None;
    }
    let q = qr.q();
    let k = a.nrows();
    Some(DMatrix::identity(k, k) - &q * q.transpose())
}

/// `M = R R^T / |E| + gamma (I - N (N^T N)^{-1} N^T)`
pub fn inner_product_matrix(
    n: &DMatrix<f64>,
    r: &DMatrix<f64>,
    area: f64,
    gamma: f64,
) -> Option<DMatrix<f64>> {
    let p = complement_projector(n)?;
    let m = r * r.transpose() / area + p * gamma;
    Some(symmetrize(m))
}

/// `M^{-1} = N N^T / |E| + gamma_tilde (I - R (R^T R)^{-1} R^T)`
pub fn inverse_inner_product_matrix(
    n: &DMatrix<f64>,
    r: &DMatrix<f64>,
    area: f64,
    gamma_tilde: f64,
) -> Option<DMatrix<f64>> {
    let p = complement_projector(r)?;
    let w = n * n.transpose() / area + p * gamma_tilde;
    Some(symmetrize(w))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// The two hypotheses of the renormalization energy lemma: `(m_matrix, positive)`.
///
/// `m_matrix`: off-diagonal entries are nonpositive and the inverse is
/// entrywise nonnegative. `positive`: `m_inv C e > 0` for face lengths `C`.
pub fn is_m_matrix(m_inv: &DMatrix<f64>, lengths: &DVector<f64>) -> (bool, bool) {
    let k = m_inv.nrows();
    let scale = (0..k).map(|i| m_inv[(i, i)].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut z = true;
    for i in 0..k {
        for j in 0..k {
            if i != j && m_inv[(i, j)] > tol {
                z = false;
            }
        }
    }
    let m_matrix = z
        && match m_inv.clone().try_inverse() {
            Some(inv) => {
                let s = inv.amax();
                inv.iter().all(|&v| v >= -1e-12 * s)
            }
            None => false,
        };
    let positive = (m_inv * lengths).iter().all(|&v| v > 0.0);
    (m_matrix, positive)
}

impl LocalInnerProduct {
    pub fn new(mesh: &Mesh, cell: usize, cfg: &InnerProductConfig) -> Result<Self, MimeticError> {
        let (n, r) = assemble_nr(mesh, cell)?;
        let area = mesh.cells[cell].area;
        let gamma = match cfg.gamma {
            GammaRule::Area => area,
            GammaRule::HalfTrace => (&r * r.transpose()).trace() / (2.0 * area),
        };
        let gamma_tilde = match cfg.gamma_tilde {
            GammaTildeRule::InverseArea => 1.0 / area,
            GammaTildeRule::ScaledTrace(g0) => g0 * (&n * n.transpose()).trace() / area,
        };
        let degenerate = |what: &str| MimeticError::Degenerate {
            cell,
            what: what.to_string(),
        };
        let m = inner_product_matrix(&n, &r, area, gamma).ok_or_else(|| degenerate("N^T N is singular"))?;
        let m_inv = inverse_inner_product_matrix(&n, &r, area, gamma_tilde)
            .ok_or_else(|| degenerate("R^T R is singular"))?;
        let mass = m_inv
            .clone()
            .cholesky()
            .ok_or_else(|| degenerate("inverse inner product is not positive definite"))?
            .inverse();
        let mass = symmetrize(mass);
        let lengths = DVector::from_iterator(
            n.nrows(),
            mesh.cells[cell].faces.iter().map(|&f| mesh.faces[f].length),
        );
        let c = DMatrix::from_diagonal(&lengths);
        let cwc = symmetrize(&c * &m_inv * &c);
        let cwc_e = DVector::from_iterator(cwc.nrows(), cwc.row_iter().map(|row| row.sum()));
        let cwc_ee = cwc_e.sum();
        Ok(LocalInnerProduct {
            n,
            r,
            m,
            m_inv,
            mass,
            gamma,
            gamma_tilde,
            area,
            lengths,
            cwc,
            cwc_e,
            cwc_ee,
        })
    }

    pub fn num_faces(&self) -> usize {
        self.n.nrows()
    }

    pub fn m_matrix_flags(&self) -> (bool, bool) {
        is_m_matrix(&self.m_inv, &self.lengths)
    }

    /// Extreme Rayleigh quotients of the flux inner product, divided by `|E|`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let ev = self.mass.clone().symmetric_eigenvalues();
        (ev.min() / self.area, ev.max() / self.area)
    }

    /// Text dump for debugging.
    pub fn dump(&self) -> String {
        format!(
            "area {:e} gamma {:e} gamma_tilde {:e}\nN {}R {}M {}M_inv {}",
            self.area, self.gamma, self.gamma_tilde, self.n, self.r, self.m, self.m_inv
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_quad_mesh, Rect};

    fn unit_cell() -> LocalInnerProduct {
        let m = build_uniform_quad_mesh(1, 1, Rect::unit()).unwrap();
        LocalInnerProduct::new(&m, 0, &InnerProductConfig::default()).unwrap()
    }

    #[test]
    fn unit_square_n_and_r() {
        let l = unit_cell();
        let n = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        let r = [[0.0, -0.5], [0.5, 0.0], [0.0, 0.5], [-0.5, 0.0]];
        for i in 0..4 {
            for d in 0..2 {
                assert_eq!(l.n[(i, d)], n[i][d]);
                assert_eq!(l.r[(i, d)], r[i][d]);
            }
        }
        let ntr = l.n.transpose() * &l.r;
        assert_eq!(ntr, DMatrix::identity(2, 2));
    }

    #[test]
    fn unit_square_consistency_is_exact() {
        let l = unit_cell();
        assert!((&l.m * &l.n - &l.r).amax() < 1e-15);
        assert!((&l.m_inv * &l.r - &l.n).amax() < 1e-15);
        // inverse-area stabilization on a square: opposite faces couple, adjacent ones do not
        assert!((l.m_inv[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((l.m_inv[(0, 2)] + 0.5).abs() < 1e-15);
        assert!(l.m_inv[(0, 1)].abs() < 1e-15);
        assert_eq!(l.m_matrix_flags(), (true, true));
    }

    #[test]
    fn the_two_families_are_not_inverse() {
        // they happen to be on a square, but not on a general quadrilateral
        let l = unit_cell();
        assert!((&l.m * &l.m_inv - DMatrix::identity(4, 4)).amax() < 1e-14);
        let mesh = crate::mesh::Mesh::from_polygons(
            vec![[0.0, 0.0], [1.2, 0.1], [1.0, 0.9], [0.1, 0.7]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let l = LocalInnerProduct::new(&mesh, 0, &InnerProductConfig::default()).unwrap();
        assert!((&l.m * &l.m_inv - DMatrix::identity(4, 4)).amax() > 1e-3);
        assert!((&l.mass * &l.m_inv - DMatrix::identity(4, 4)).amax() < 1e-13);
    }

    #[test]
    fn diagonal_matrix_flags() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let c = DVector::from_vec(vec![1.0, 1.0, 0.5]);
        assert_eq!(is_m_matrix(&d, &c), (true, true));
        let mut bad = d.clone();
        bad[(0, 1)] = 0.5;
        bad[(1, 0)] = 0.5;
        assert!(!is_m_matrix(&bad, &c).0);
    }

    #[test]
    fn half_trace_rule_is_accepted() {
        let m = build_uniform_quad_mesh(1, 1, Rect::unit()).unwrap();
        let cfg = InnerProductConfig {
            gamma: GammaRule::HalfTrace,
            gamma_tilde: GammaTildeRule::ScaledTrace(0.5),
        };
        let l = LocalInnerProduct::new(&m, 0, &cfg).unwrap();
        assert!((l.gamma - 0.5).abs() < 1e-15);
        assert!((l.gamma_tilde - 2.0).abs() < 1e-15);
        assert!((&l.m * &l.n - &l.r).amax() < 1e-15);
        // this choice makes the inverse diagonal on squares
        assert!((l.m_inv[(0, 2)]).abs() < 1e-15);
    }
}
