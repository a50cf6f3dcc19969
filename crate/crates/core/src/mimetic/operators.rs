use super::fields::{CellVectorField, FluxField};
use super::local::{InnerProductConfig, LocalInnerProduct, MimeticError};
use crate::mesh::Mesh;
use crate::vec3::{self, Vec3};
use nalgebra::DVector;
use std::io::Write;

/// Local matrices of every cell, computed once per mesh.
#[derive(Debug, Clone)]
pub struct MimeticOperators {
    pub locals: Vec<LocalInnerProduct>,
    pub config: InnerProductConfig,
}

impl MimeticOperators {
    pub fn new(mesh: &Mesh, config: &InnerProductConfig) -> Result<Self, MimeticError> {
        let locals = (0..mesh.num_cells())
            .map(|c| LocalInnerProduct::new(mesh, c, config))
            .collect::<Result<_, _>>()?;
        Ok(MimeticOperators {
            locals,
            config: *config,
        })
    }

    /// Number of cells satisfying each renormalization hypothesis.
    pub fn m_matrix_counts(&self) -> (usize, usize) {
        self.locals.iter().fold((0, 0), |(a, b), l| {
            let (x, y) = l.m_matrix_flags();
            (a + x as usize, b + y as usize)
        })
    }

    /// Global `(c0, C0)` with `c0 |E| <= q^T M q / q^T q <= C0 |E|`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        self.locals.iter().fold((f64::INFINITY, 0.0), |(lo, hi), l| {
            let (a, b) = l.spectral_bounds();
            (lo.min(a), hi.max(b))
        })
    }

    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (c, l) in self.locals.iter().enumerate() {
            writeln!(w, "cell {c}\n{}", l.dump())?;
        }
        Ok(())
    }

    /// Outward flux `p = -GRAD(m, m_faces)` of every cell.
    pub fn cell_fluxes(&self, mesh: &Mesh, m: &[Vec3], m_faces: &[Vec3]) -> Vec<Vec<Vec3>> {
        (0..mesh.num_cells())
            .map(|c| {
                let mf: Vec<Vec3> = mesh.cells[c].faces.iter().map(|&f| m_faces[f]).collect();
                local_flux(&self.locals[c], m[c], &mf)
            })
            .collect()
    }

    /// Continuous flux `p = -GRAD(m, m_faces)`, one-sided values averaged per face.
    pub fn flux_field(&self, mesh: &Mesh, m: &[Vec3], m_faces: &[Vec3]) -> FluxField {
        let mut values = vec![[0.0; 3]; mesh.num_faces()];
        let mut weight = vec![0u8; mesh.num_faces()];
        let mut mf = Vec::new();
        for (c, l) in self.locals.iter().enumerate() {
            mf.clear();
            mf.extend(mesh.cells[c].faces.iter().map(|&f| m_faces[f]));
            let p = local_flux(l, m[c], &mf);
            FluxField::add_cell(mesh, c, &p, &mut values, &mut weight);
        }
        FluxField::finish(mesh, values, &weight)
    }

    /// `(1/2) sum_E sum_u g^T M^{-1} g` with `g = C (m_faces - m_E)`, which is
    /// `(1/2) [p, p]_F` for the flux `p = -GRAD m`.
    pub fn gradient_energy(&self, mesh: &Mesh, m: &[Vec3], m_faces: &[Vec3]) -> f64 {
        let mut e = 0.0;
        let mut g: Vec<Vec3> = Vec::new();
        for (c, l) in self.locals.iter().enumerate() {
            let faces = &mesh.cells[c].faces;
            let k = faces.len();
            g.clear();
            g.extend(
                faces
                    .iter()
                    .enumerate()
                    .map(|(i, &f)| vec3::scale(vec3::sub(m_faces[f], m[c]), l.lengths[i])),
            );
            let w = l.m_inv.as_slice();
            for j in 0..k {
                for i in 0..k {
                    e += w[i + k * j] * vec3::dot(g[i], g[j]);
                }
            }
        }
        0.5 * e
    }
}

/// `(1/|E|) sum_f |f| p_f` for outward fluxes `p`.
pub fn discrete_divergence(mesh: &Mesh, cell: usize, flux: &[f64]) -> f64 {
    let c = &mesh.cells[cell];
    let s: f64 = c
        .faces
        .iter()
        .zip(flux)
        .map(|(&f, p)| mesh.faces[f].length * p)
        .sum();
    s / c.area
}

/// Mimetic gradient `M^{-1} C (m_f - m_E)`: approximates the outward normal
/// derivative on each face, per component.
pub fn local_gradient(local: &LocalInnerProduct, m_e: Vec3, m_faces: &[Vec3]) -> Vec<Vec3> {
    let k = local.num_faces();
    let w = local.m_inv.as_slice();
    let mut out = vec![[0.0; 3]; k];
    for j in 0..k {
        let g = vec3::scale(vec3::sub(m_faces[j], m_e), local.lengths[j]);
        for (i, o) in out.iter_mut().enumerate() {
            *o = vec3::axpy(*o, w[i + k * j], g);
        }
    }
    out
}

/// Flux `p = -GRAD(m_E, m_faces)`.
pub fn local_flux(local: &LocalInnerProduct, m_e: Vec3, m_faces: &[Vec3]) -> Vec<Vec3> {
    let mut g = local_gradient(local, m_e, m_faces);
    for v in g.iter_mut() {
        *v = vec3::scale(*v, -1.0);
    }
    g
}

/// `sum_E |E| a_E . b_E`
pub fn inner_product_q(mesh: &Mesh, a: &CellVectorField, b: &CellVectorField) -> f64 {
    mesh.cells
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(c, (x, y))| c.area * vec3::dot(*x, *y))
        .sum()
}

/// `sum_E sum_u p_E^T M_E q_E`, with `M_E` the flux mass matrix of each cell.
pub fn inner_product_f(ops: &MimeticOperators, mesh: &Mesh, p: &FluxField, q: &FluxField) -> f64 {
    let mut s = 0.0;
    for (c, l) in ops.locals.iter().enumerate() {
        let pv = p.cell_view(mesh, c);
        let qv = q.cell_view(mesh, c);
        s += per_cell_f(l, &pv, &qv);
    }
    s
}

pub(crate) fn per_cell_f(l: &LocalInnerProduct, p: &[Vec3], q: &[Vec3]) -> f64 {
    let k = p.len();
    let mut s = 0.0;
    for u in 0..3 {
        let a = DVector::from_iterator(k, p.iter().map(|v| v[u]));
        let b = DVector::from_iterator(k, q.iter().map(|v| v[u]));
        s += a.dot(&(&l.mass * b));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_quad_mesh, Rect};

    fn unit() -> (Mesh, MimeticOperators) {
        let m = build_uniform_quad_mesh(1, 1, Rect::unit()).unwrap();
        let ops = MimeticOperators::new(&m, &InnerProductConfig::default()).unwrap();
        (m, ops)
    }

    #[test]
    fn divergence_examples() {
        let (m, _) = unit();
        assert_eq!(discrete_divergence(&m, 0, &[0.0, 1.0, 0.0, -1.0]), 0.0);
        assert_eq!(discrete_divergence(&m, 0, &[1.0, 1.0, 1.0, 1.0]), 4.0);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let (_, ops) = unit();
        let v = [0.3, -0.2, 0.9];
        let g = local_gradient(&ops.locals[0], v, &[v; 4]);
        assert!(g.iter().flatten().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn gradient_hand_value() {
        let (_, ops) = unit();
        let l = &ops.locals[0];
        let mut faces = [[0.0; 3]; 4];
        faces[0] = [1.0, 0.0, 0.0];
        let g = local_gradient(l, [0.0; 3], &faces);
        for i in 0..4 {
            assert!((g[i][0] - l.m_inv[(i, 0)] * l.lengths[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn q_product_of_ones() {
        let m = build_uniform_quad_mesh(4, 4, Rect::unit()).unwrap();
        let a = CellVectorField::uniform(16, [1.0, 1.0, 1.0]);
        assert!((inner_product_q(&m, &a, &a) - 3.0).abs() < 1e-14);
    }
}
