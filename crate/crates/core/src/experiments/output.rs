use super::ExperimentError;
use crate::mesh::{write_vtk, Mesh, VtkField};
use crate::vec3::{self, Vec3};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Comma separated table. Every file starts with `#` lines describing the
/// columns and their units, then a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str], comments: &[&str]) -> Self {
        CsvTable {
            comments: comments.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let s: Vec<String> = r.iter().map(|v| format!("{v:.10e}")).collect();
            writeln!(w, "{}", s.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), ExperimentError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// VTK snapshot with `m` and the unit-length defect `|m| - 1` as cell data.
pub fn write_snapshot(mesh: &Mesh, m: &[Vec3], path: &Path) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let defect: Vec<f64> = m.iter().map(|v| vec3::norm(*v) - 1.0).collect();
    let mut w = BufWriter::new(File::create(path)?);
    write_vtk(
        mesh,
        &[VtkField::Vector("m", m), VtkField::Scalar("norm_defect", &defect)],
        &mut w,
    )?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["a", "b"], &["units: none"]);
        t.push(vec![1.0, 2.5]);
        let mut out = Vec::new();
        t.write(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# units: none");
        assert_eq!(lines[1], "a,b");
        assert!(lines[2].starts_with("1.0000000000e0,2.5"));
    }
}
