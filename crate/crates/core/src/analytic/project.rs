use crate::mesh::{Mesh, Point};
use crate::mimetic::{CellVectorField, FluxField};
use crate::vec3::{self, Vec3};

/// Samples `field` at cell centroids.
pub fn project_to_cells(mesh: &Mesh, field: impl Fn(Point) -> Vec3) -> CellVectorField {
    CellVectorField(mesh.cells.iter().map(|c| field(c.centroid)).collect())
}

/// `-∇m · n` at face midpoints, in the global face orientation.
/// `gradient` returns `[∂m/∂x1, ∂m/∂x2]`.
pub fn project_flux(mesh: &Mesh, gradient: impl Fn(Point) -> [Vec3; 2]) -> FluxField {
    FluxField {
        values: mesh
            .faces
            .iter()
            .map(|f| {
                let [gx, gy] = gradient(f.centroid);
                vec3::scale(vec3::axpy(vec3::scale(gx, f.normal[0]), f.normal[1], gy), -1.0)
            })
            .collect(),
    }
}
