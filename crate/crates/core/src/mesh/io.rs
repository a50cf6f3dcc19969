//! Plain-text mesh format.
//!
//! ```text
//! mimetic-mesh 1
//! nodes <count>
//! <x> <y>
//! cells <count>
//! <vertex count> <v0> <v1> ...
//! faces <count>
//! <node0> <node1> <cell0> <cell1 or -1> <interior|dirichlet|neumann|periodic:<face>>
//! ```
//! Faces follow the numbering produced by [`Mesh::from_polygons`]; the reader
//! rebuilds them from the cells and checks they agree.

use super::{BoundaryCondition, Mesh, MeshError};
use std::io::{BufRead, Write};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<(), MeshError> {
    writeln!(w, "mimetic-mesh 1")?;
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
    }
    writeln!(w, "cells {}", mesh.cells.len())?;
    for c in &mesh.cells {
        write!(w, "{}", c.nodes.len())?;
        for v in &c.nodes {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "faces {}", mesh.faces.len())?;
    for (f, face) in mesh.faces.iter().enumerate() {
        let c1 = face.cells[1].map_or(-1, |c| c as i64);
        let tag = match mesh.boundary[f] {
            None => "interior".to_string(),
            Some(BoundaryCondition::Dirichlet) => "dirichlet".to_string(),
            Some(BoundaryCondition::Neumann) => "neumann".to_string(),
            Some(BoundaryCondition::Periodic(g)) => format!("periodic:{g}"),
        };
        writeln!(
            w,
            "{} {} {} {} {}",
            face.nodes[0],
            face.nodes[1],
            face.cells[0].unwrap_or(usize::MAX),
            c1,
            tag
        )?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<(usize, String), MeshError> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(self.err("unexpected end of file")),
                Some(l) => {
                    let l = l?;
                    let t = l.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        return Ok((self.line, t.to_string()));
                    }
                }
            }
        }
    }

    fn err(&self, msg: &str) -> MeshError {
        MeshError::Parse {
            line: self.line,
            msg: msg.to_string(),
        }
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let (_, l) = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(&format!("expected '{key}'")));
        }
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("missing count"))
    }
}

fn parse<T: std::str::FromStr>(s: Option<&str>, line: usize) -> Result<T, MeshError> {
    s.and_then(|s| s.parse().ok()).ok_or(MeshError::Parse {
        line,
        msg: "bad number".into(),
    })
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh, MeshError> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    let (_, magic) = lines.next()?;
    if magic != "mimetic-mesh 1" {
        return Err(lines.err("not a mesh file"));
    }
    let nn = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let (ln, l) = lines.next()?;
        let mut it = l.split_whitespace();
        nodes.push([parse(it.next(), ln)?, parse(it.next(), ln)?]);
    }
    let nc = lines.header("cells")?;
    let mut polys = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines.next()?;
        let mut it = l.split_whitespace();
        let k: usize = parse(it.next(), ln)?;
        let poly = (0..k)
            .map(|_| parse::<usize>(it.next(), ln))
            .collect::<Result<Vec<_>, _>>()?;
        if poly.iter().any(|&v| v >= nn) {
            return Err(lines.err("vertex index out of range"));
        }
        polys.push(poly);
    }
    let mut mesh = Mesh::from_polygons(nodes, polys)?;
    let nf = lines.header("faces")?;
    if nf != mesh.faces.len() {
        return Err(lines.err("face count does not match the cells"));
    }
    for f in 0..nf {
        let (ln, l) = lines.next()?;
        let mut it = l.split_whitespace();
        let a: usize = parse(it.next(), ln)?;
        let b: usize = parse(it.next(), ln)?;
        if mesh.faces[f].nodes != [a, b] {
            return Err(lines.err("face nodes do not match the cells"));
        }
        let _c0 = it.next();
        let _c1 = it.next();
        let tag = it.next().ok_or_else(|| lines.err("missing tag"))?;
        let bc = match tag {
            "interior" => None,
            "dirichlet" => Some(BoundaryCondition::Dirichlet),
            "neumann" => Some(BoundaryCondition::Neumann),
            t => match t.strip_prefix("periodic:") {
                Some(g) => Some(BoundaryCondition::Periodic(parse(Some(g), ln)?)),
                None => return Err(lines.err("unknown boundary tag")),
            },
        };
        mesh.boundary[f] = bc;
    }
    mesh.validate()?;
    Ok(mesh)
}
