use crate::mesh::{BoundaryCondition, Mesh};
use crate::vec3::{self, Vec3};
use std::ops::{Deref, DerefMut};

/// One 3-vector per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellVectorField(pub Vec<Vec3>);

/// One 3-vector per face.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeVectorField(pub Vec<Vec3>);

macro_rules! vec_newtype {
    ($t:ty) => {
        impl Deref for $t {
            type Target = Vec<Vec3>;
            fn deref(&self) -> &Vec<Vec3> {
                &self.0
            }
        }
        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut Vec<Vec3> {
                &mut self.0
            }
        }
    };
}
vec_newtype!(CellVectorField);
vec_newtype!(EdgeVectorField);

impl CellVectorField {
    pub fn uniform(n: usize, v: Vec3) -> Self {
        CellVectorField(vec![v; n])
    }

    pub fn average(&self) -> Vec3 {
        let mut s = [0.0; 3];
        for v in self.iter() {
            s = vec3::add(s, *v);
        }
        vec3::scale(s, 1.0 / self.len().max(1) as f64)
    }

    /// `max_E ||m_E| - 1|`
    pub fn max_norm_defect(&self) -> f64 {
        self.iter().map(|v| (vec3::norm(*v) - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_component(&self, u: usize) -> f64 {
        self.iter().map(|v| v[u].abs()).fold(0.0, f64::max)
    }
}

/// Magnetic flux: one scalar per face and component in the face's global
/// orientation. The view from a cell flips the sign where the normal points
/// inward, so continuity across a face holds by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FluxField {
    pub values: Vec<Vec3>,
}

impl FluxField {
    pub fn zeros(num_faces: usize) -> Self {
        FluxField {
            values: vec![[0.0; 3]; num_faces],
        }
    }

    /// Outward fluxes of `cell`, indexed `[local face][component]`.
    pub fn cell_view(&self, mesh: &Mesh, cell: usize) -> Vec<Vec3> {
        let c = &mesh.cells[cell];
        c.faces
            .iter()
            .zip(&c.signs)
            .map(|(&f, &s)| vec3::scale(self.values[f], s))
            .collect()
    }

    /// Builds a continuous flux from per-cell outward fluxes by averaging the
    /// two one-sided values of each face (periodic pairs included).
    pub fn from_cell_fluxes(mesh: &Mesh, per_cell: &[Vec<Vec3>]) -> Self {
        let mut values = vec![[0.0; 3]; mesh.num_faces()];
        let mut weight = vec![0u8; mesh.num_faces()];
        for (c, fluxes) in per_cell.iter().enumerate() {
            Self::add_cell(mesh, c, fluxes, &mut values, &mut weight);
        }
        Self::finish(mesh, values, &weight)
    }

    pub(crate) fn add_cell(mesh: &Mesh, c: usize, fluxes: &[Vec3], values: &mut [Vec3], weight: &mut [u8]) {
        let cell = &mesh.cells[c];
        for (i, p) in fluxes.iter().enumerate() {
            let f = cell.faces[i];
            values[f] = vec3::axpy(values[f], cell.signs[i], *p);
            weight[f] += 1;
        }
    }

    pub(crate) fn finish(mesh: &Mesh, mut values: Vec<Vec3>, weight: &[u8]) -> Self {
        for f in 0..mesh.num_faces() {
            if let Some(BoundaryCondition::Periodic(g)) = mesh.boundary[f] {
                if f < g {
                    // boundary faces are outward for their only cell
                    let v = vec3::scale(vec3::sub(values[f], values[g]), 0.5);
                    values[f] = v;
                    values[g] = vec3::scale(v, -1.0);
                }
            } else if weight[f] == 2 {
                values[f] = vec3::scale(values[f], 0.5);
            }
        }
        FluxField { values }
    }
}
