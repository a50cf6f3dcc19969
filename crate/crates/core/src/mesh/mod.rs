//! Two-dimensional polygonal meshes and the generators for the mesh families
//! used by the experiments.

mod generators;
mod io;
mod refined;
mod voronoi;
mod vtk;

pub use generators::{
    build_circular_logical_mesh, build_uniform_quad_mesh, distort_smooth, perturb_random,
};
pub use io::{read_mesh, write_mesh};
pub use refined::{build_locally_refined_mesh, RefinementBand};
pub use voronoi::{build_polygonal_mesh, build_polygonal_mesh_seeded};
pub use vtk::{write_vtk, VtkField};

use std::collections::HashMap;
use thiserror::Error;

pub type Point = [f64; 2];

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Rect {
        Rect { min, max }
    }

    pub fn unit() -> Rect {
        Rect::new([0.0, 0.0], [1.0, 1.0])
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh arguments: {0}")]
    InvalidArgument(String),
    #[error("cell {cell} has non-positive area {area:e}")]
    NonPositiveArea { cell: usize, area: f64 },
    #[error("face {face} is degenerate (length {length:e})")]
    DegenerateFace { face: usize, length: f64 },
    #[error("edge {0:?} is shared by more than two cells or has inconsistent orientation")]
    BadEdge([usize; 2]),
    #[error("cell {cell} violates {what}: residual {residual:e}")]
    Identity {
        cell: usize,
        what: &'static str,
        residual: f64,
    },
    #[error("periodic pairing error: {0}")]
    Periodic(String),
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Boundary condition attached to a boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// The face shares its edge unknown with the given partner face.
    Periodic(usize),
}

#[derive(Debug, Clone)]
pub struct Face {
    pub nodes: [usize; 2],
    pub centroid: Point,
    pub length: f64,
    /// Unit normal, `(dy, -dx) / length` for the node order above.
    pub normal: Point,
    /// `cells[0]` sees `normal` as outward, `cells[1]` (if any) as inward.
    pub cells: [Option<usize>; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells[1].is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    /// Vertices in counter-clockwise order.
    pub nodes: Vec<usize>,
    /// Local face `i` joins `nodes[i]` and `nodes[i + 1]`.
    pub faces: Vec<usize>,
    /// +1 if the face normal is outward for this cell, -1 otherwise.
    pub signs: Vec<f64>,
    pub centroid: Point,
    pub area: f64,
    pub diameter: f64,
}

impl Cell {
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
}

/// Logical structure of an axis-aligned tensor grid, kept while nodes are untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub origin: Point,
    pub hx: f64,
    pub hy: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    /// Indexed by face; `None` for interior faces.
    pub boundary: Vec<Option<BoundaryCondition>>,
    /// Maximum cell diameter.
    pub h: f64,
    pub grid: Option<GridInfo>,
}

fn polygon_geometry(pts: &[Point]) -> (f64, Point, f64) {
    let n = pts.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    // shift for round-off on meshes far from the origin
    let o = pts[0];
    for i in 0..n {
        let p = [pts[i][0] - o[0], pts[i][1] - o[1]];
        let q = [pts[(i + 1) % n][0] - o[0], pts[(i + 1) % n][1] - o[1]];
        let c = p[0] * q[1] - q[0] * p[1];
        a2 += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    let area = 0.5 * a2;
    let centroid = [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)];
    let mut diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max((pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]));
        }
    }
    (area, centroid, diam)
}

impl Mesh {
    /// Builds a mesh from node coordinates and counter-clockwise polygons.
    /// All boundary faces start as Neumann.
    pub fn from_polygons(nodes: Vec<Point>, polygons: Vec<Vec<usize>>) -> Result<Mesh, MeshError> {
        let mut faces: Vec<Face> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::with_capacity(polygons.len());
        for (c, poly) in polygons.into_iter().enumerate() {
            if poly.len() < 3 {
                return Err(MeshError::InvalidArgument(format!(
                    "cell {c} has {} vertices",
                    poly.len()
                )));
            }
            let n = poly.len();
            let mut cf = Vec::with_capacity(n);
            let mut signs = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.cells[1].is_some() || face.nodes != [b, a] {
                            return Err(MeshError::BadEdge([a, b]));
                        }
                        face.cells[1] = Some(c);
                        cf.push(f);
                        signs.push(-1.0);
                    }
                    None => {
                        edge_map.insert(key, faces.len());
                        cf.push(faces.len());
                        signs.push(1.0);
                        faces.push(Face {
                            nodes: [a, b],
                            centroid: [0.0; 2],
                            length: 0.0,
                            normal: [0.0; 2],
                            cells: [Some(c), None],
                        });
                    }
                }
            }
            cells.push(Cell {
                nodes: poly,
                faces: cf,
                signs,
                centroid: [0.0; 2],
                area: 0.0,
                diameter: 0.0,
            });
        }
        let boundary = faces
            .iter()
            .map(|f| f.is_boundary().then_some(BoundaryCondition::Neumann))
            .collect();
        let mut mesh = Mesh {
            nodes,
            faces,
            cells,
            boundary,
            h: 0.0,
            grid: None,
        };
        mesh.update_geometry();
        mesh.validate()?;
        Ok(mesh)
    }

    /// Same topology and boundary tags, new node positions.
    pub fn with_nodes(&self, nodes: Vec<Point>) -> Result<Mesh, MeshError> {
        assert_eq!(nodes.len(), self.nodes.len());
        let mut mesh = self.clone();
        mesh.nodes = nodes;
        mesh.grid = None;
        mesh.update_geometry();
        mesh.validate()?;
        Ok(mesh)
    }

    fn update_geometry(&mut self) {
        for f in &mut self.faces {
            let p = self.nodes[f.nodes[0]];
            let q = self.nodes[f.nodes[1]];
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            f.length = len;
            f.centroid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            f.normal = [dy / len, -dx / len];
        }
        let mut h: f64 = 0.0;
        for c in &mut self.cells {
            let pts: Vec<Point> = c.nodes.iter().map(|&i| self.nodes[i]).collect();
            let (a, x, d) = polygon_geometry(&pts);
            c.area = a;
            c.centroid = x;
            c.diameter = d;
            h = h.max(d);
        }
        self.h = h;
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Outward unit normal of local face `i` of `cell`.
    pub fn outward_normal(&self, cell: usize, i: usize) -> Point {
        let c = &self.cells[cell];
        let n = self.faces[c.faces[i]].normal;
        [c.signs[i] * n[0], c.signs[i] * n[1]]
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary())
    }

    /// Tags every non-periodic boundary face with `bc`.
    pub fn set_boundary_condition(&mut self, bc: BoundaryCondition) {
        for b in self.boundary.iter_mut().flatten() {
            if !matches!(b, BoundaryCondition::Periodic(_)) {
                *b = bc;
            }
        }
    }

    /// Pairs the boundary faces on opposite sides of the bounding box.
    pub fn make_periodic(&mut self, x: bool, y: bool) -> Result<(), MeshError> {
        let (lo, hi) = self.bounding_box();
        let tol = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        for (axis, on) in [(0usize, x), (1usize, y)] {
            if !on {
                continue;
            }
            let other = 1 - axis;
            let side = |v: f64| (v - lo[axis]).abs() < tol;
            let far = |v: f64| (v - hi[axis]).abs() < tol;
            let low: Vec<usize> = self
                .boundary_faces()
                .filter(|&f| {
                    let fc = &self.faces[f];
                    side(self.nodes[fc.nodes[0]][axis]) && side(self.nodes[fc.nodes[1]][axis])
                })
                .collect();
            let mut high: Vec<usize> = self
                .boundary_faces()
                .filter(|&f| {
                    let fc = &self.faces[f];
                    far(self.nodes[fc.nodes[0]][axis]) && far(self.nodes[fc.nodes[1]][axis])
                })
                .collect();
            if low.len() != high.len() {
                return Err(MeshError::Periodic(format!(
                    "{} faces on the low side, {} on the high side",
                    low.len(),
                    high.len()
                )));
            }
            high.sort_by(|&a, &b| {
                self.faces[a].centroid[other].total_cmp(&self.faces[b].centroid[other])
            });
            for &f in &low {
                let y = self.faces[f].centroid[other];
                let k = high.partition_point(|&g| self.faces[g].centroid[other] < y - tol);
                let g = *high
                    .get(k)
                    .filter(|&&g| (self.faces[g].centroid[other] - y).abs() < tol)
                    .ok_or_else(|| MeshError::Periodic(format!("no partner for face {f}")))?;
                self.boundary[f] = Some(BoundaryCondition::Periodic(g));
                self.boundary[g] = Some(BoundaryCondition::Periodic(f));
            }
        }
        self.validate()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Checks every structural and geometric invariant.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (f, face) in self.faces.iter().enumerate() {
            if !(face.length > 0.0) {
                return Err(MeshError::DegenerateFace {
                    face: f,
                    length: face.length,
                });
            }
            if face.cells[0].is_none() {
                return Err(MeshError::BadEdge(face.nodes));
            }
            if face.is_boundary() != self.boundary[f].is_some() {
                return Err(MeshError::Periodic(format!("boundary tag mismatch on face {f}")));
            }
            if let Some(BoundaryCondition::Periodic(g)) = self.boundary[f] {
                let ok = g != f
                    && self.boundary.get(g) == Some(&Some(BoundaryCondition::Periodic(f)))
                    && (self.faces[g].length - face.length).abs() <= 1e-9 * face.length;
                if !ok {
                    return Err(MeshError::Periodic(format!("face {f} and {g} are not a pair")));
                }
            }
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if !(cell.area > 0.0) {
                return Err(MeshError::NonPositiveArea {
                    cell: c,
                    area: cell.area,
                });
            }
            let mut closure = [0.0; 2];
            let mut perimeter = 0.0;
            let mut ntr = [[0.0; 2]; 2];
            for i in 0..cell.num_faces() {
                let face = &self.faces[cell.faces[i]];
                let n = self.outward_normal(c, i);
                let l = face.length;
                perimeter += l;
                let r = [
                    l * (face.centroid[0] - cell.centroid[0]),
                    l * (face.centroid[1] - cell.centroid[1]),
                ];
                for a in 0..2 {
                    closure[a] += l * n[a];
                    for b in 0..2 {
                        ntr[a][b] += n[a] * r[b];
                    }
                }
            }
            let res = closure[0].hypot(closure[1]);
            if res > 1e-12 * perimeter {
                return Err(MeshError::Identity {
                    cell: c,
                    what: "normal closure",
                    residual: res,
                });
            }
            let mut err: f64 = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let want = if a == b { cell.area } else { 0.0 };
                    err = err.max((ntr[a][b] - want).abs());
                }
            }
            if err > 1e-12 * cell.area {
                return Err(MeshError::Identity {
                    cell: c,
                    what: "N^T R = |E| I",
                    residual: err / cell.area,
                });
            }
        }
        Ok(())
    }

    /// Neighbor across local face `i`, following periodic pairs.
    pub fn neighbor(&self, cell: usize, i: usize) -> Option<usize> {
        let f = self.cells[cell].faces[i];
        let face = &self.faces[f];
        match face.cells {
            [Some(a), Some(b)] => Some(if a == cell { b } else { a }),
            _ => match self.boundary[f] {
                Some(BoundaryCondition::Periodic(g)) => self.faces[g].cells[0],
                _ => None,
            },
        }
    }
}
