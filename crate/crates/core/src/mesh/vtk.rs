//! Legacy ASCII VTK unstructured-grid writer.

use super::{Mesh, MeshError};
use std::io::Write;

pub enum VtkField<'a> {
    Scalar(&'a str, &'a [f64]),
    Vector(&'a str, &'a [[f64; 3]]),
}

pub fn write_vtk<W: Write>(mesh: &Mesh, fields: &[VtkField], mut w: W) -> Result<(), MeshError> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "mimetic-ll snapshot")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    let size: usize = mesh.cells.iter().map(|c| c.nodes.len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.cells.len(), size)?;
    for c in &mesh.cells {
        write!(w, "{}", c.nodes.len())?;
        for v in &c.nodes {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.cells.len())?;
    for _ in &mesh.cells {
        // VTK_POLYGON
        writeln!(w, "7")?;
    }
    if !fields.is_empty() {
        writeln!(w, "CELL_DATA {}", mesh.cells.len())?;
    }
    for field in fields {
        match field {
            VtkField::Scalar(name, v) => {
                assert_eq!(v.len(), mesh.cells.len());
                writeln!(w, "SCALARS {name} double 1")?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for x in v.iter() {
                    writeln!(w, "{x:e}")?;
                }
            }
            VtkField::Vector(name, v) => {
                assert_eq!(v.len(), mesh.cells.len());
                writeln!(w, "VECTORS {name} double")?;
                for x in v.iter() {
                    writeln!(w, "{:e} {:e} {:e}", x[0], x[1], x[2])?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_quad_mesh, Rect};

    #[test]
    fn writes_cell_data() {
        let m = build_uniform_quad_mesh(2, 1, Rect::unit()).unwrap();
        let v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let s = [0.0, 0.0];
        let mut buf = Vec::new();
        write_vtk(&m, &[VtkField::Vector("m", &v), VtkField::Scalar("norm_defect", &s)], &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("CELLS 2 10"));
        assert!(text.contains("VECTORS m double"));
        assert!(text.contains("SCALARS norm_defect double 1"));
    }
}
