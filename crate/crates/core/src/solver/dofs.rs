use crate::mesh::{BoundaryCondition, Mesh};

/// Numbering of the free edge unknowns. Dirichlet faces carry no unknown and
/// the two faces of a periodic pair share one.
#[derive(Debug, Clone)]
pub struct EdgeDofs {
    /// Unknown of each face, `None` on Dirichlet faces.
    pub face_dof: Vec<Option<usize>>,
    pub num: usize,
    pub has_dirichlet: bool,
}

impl EdgeDofs {
    pub fn new(mesh: &Mesh) -> Self {
        let mut face_dof = vec![None; mesh.num_faces()];
        let mut num = 0;
        let mut has_dirichlet = false;
        for f in 0..mesh.num_faces() {
            match mesh.boundary[f] {
                Some(BoundaryCondition::Dirichlet) => has_dirichlet = true,
                Some(BoundaryCondition::Periodic(g)) if g < f => face_dof[f] = face_dof[g],
                _ => {
                    face_dof[f] = Some(num);
                    num += 1;
                }
            }
        }
        EdgeDofs {
            face_dof,
            num,
            has_dirichlet,
        }
    }
}
