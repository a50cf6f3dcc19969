use super::StrayError;
use crate::mesh::Mesh;
use crate::vec3::Vec3;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Quadrature settings for the boundary integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectQuadrature {
    /// Gauss points per panel and direction.
    pub order: usize,
    /// Panels per face and direction.
    pub subdivisions: usize,
}

impl Default for DirectQuadrature {
    fn default() -> Self {
        DirectQuadrature {
            order: 6,
            subdivisions: 4,
        }
    }
}

struct Rule {
    pts: Vec<f64>,
    wts: Vec<f64>,
}

impl Rule {
    fn new(q: DirectQuadrature) -> Self {
        let (x, w) = gauss_legendre(q.order.max(1));
        let s = q.subdivisions.max(1);
        let mut pts = Vec::new();
        let mut wts = Vec::new();
        for p in 0..s {
            for (xi, wi) in x.iter().zip(&w) {
                pts.push((p as f64 + xi) / s as f64);
                wts.push(wi / s as f64);
            }
        }
        Rule { pts, wts }
    }
}

/// Tensor mapping the magnetization of `src` (a prism of the given
/// thickness) to the field at the mid-plane centroid of `dst`.
fn pair_tensor(mesh: &Mesh, dst: usize, src: usize, thickness: f64, rule: &Rule) -> [[f64; 3]; 3] {
    let x = mesh.cells[dst].centroid;
    let cell = &mesh.cells[src];
    let mut t = [[0.0; 3]; 3];
    let mut add = |y: [f64; 3], n: [f64; 3], w: f64| {
        let d = [x[0] - y[0], x[1] - y[1], -y[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let s = w / (r2 * r2.sqrt());
        for a in 0..3 {
            for b in 0..3 {
                t[a][b] += d[a] * n[b] * s;
            }
        }
    };
    let hz = 0.5 * thickness;
    let k = cell.nodes.len();
    for i in 0..k {
        let p0 = mesh.nodes[cell.nodes[i]];
        let p1 = mesh.nodes[cell.nodes[(i + 1) % k]];
        let n2 = mesh.outward_normal(src, i);
        let len = mesh.faces[cell.faces[i]].length;
        let n = [n2[0], n2[1], 0.0];
        for (s, ws) in rule.pts.iter().zip(&rule.wts) {
            let y0 = p0[0] + s * (p1[0] - p0[0]);
            let y1 = p0[1] + s * (p1[1] - p0[1]);
            for (z, wz) in rule.pts.iter().zip(&rule.wts) {
                add([y0, y1, -hz + z * thickness], n, ws * wz * len * thickness);
            }
        }
        // caps: fan triangle (centroid, p0, p1), collapsed square map
        let c = cell.centroid;
        let area2 = (p0[0] - c[0]) * (p1[1] - c[1]) - (p1[0] - c[0]) * (p0[1] - c[1]);
        for (u, wu) in rule.pts.iter().zip(&rule.wts) {
            for (v, wv) in rule.pts.iter().zip(&rule.wts) {
                let y0 = c[0] + u * (p0[0] - c[0]) + u * v * (p1[0] - p0[0]);
                let y1 = c[1] + u * (p0[1] - c[1]) + u * v * (p1[1] - p0[1]);
                let w = wu * wv * area2 * u;
                add([y0, y1, hz], [0.0, 0.0, 1.0], w);
                add([y0, y1, -hz], [0.0, 0.0, -1.0], w);
            }
        }
    }
    let f = 1.0 / (4.0 * PI);
    for row in &mut t {
        for v in row.iter_mut() {
            *v *= f;
        }
    }
    t
}

/// Dense stray-field operator on an arbitrary polygonal mesh extruded to a
/// film of uniform thickness, one cell through the thickness.
#[derive(Debug, Clone)]
pub struct DirectStrayField {
    n: usize,
    tensors: Vec<[[f64; 3]; 3]>,
}

impl DirectStrayField {
    pub fn new(mesh: &Mesh, thickness: f64, quad: DirectQuadrature) -> Result<Self, StrayError> {
        if !(thickness > 0.0) {
            return Err(StrayError::Grid(format!("thickness {thickness}")));
        }
        let rule = Rule::new(quad);
        let n = mesh.num_cells();
        let mut tensors = Vec::with_capacity(n * n);
        for dst in 0..n {
            for src in 0..n {
                tensors.push(pair_tensor(mesh, dst, src, thickness, &rule));
            }
        }
        Ok(DirectStrayField { n, tensors })
    }

    pub fn tensor(&self, dst: usize, src: usize) -> [[f64; 3]; 3] {
        self.tensors[dst * self.n + src]
    }

    pub fn apply(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError> {
        if m.len() != self.n {
            return Err(StrayError::Grid("field size mismatch".into()));
        }
        Ok((0..self.n)
            .map(|dst| {
                let mut h = [0.0; 3];
                for (src, v) in m.iter().enumerate() {
                    let t = &self.tensors[dst * self.n + src];
                    for a in 0..3 {
                        h[a] += t[a][0] * v[0] + t[a][1] * v[1] + t[a][2] * v[2];
                    }
                }
                h
            })
            .collect())
    }
}

/// One-shot direct evaluation; see [`DirectStrayField`].
pub fn apply_direct(
    mesh: &Mesh,
    m: &[Vec3],
    thickness: f64,
    quad: DirectQuadrature,
) -> Result<Vec<Vec3>, StrayError> {
    if m.len() != mesh.num_cells() {
        return Err(StrayError::Grid("field size mismatch".into()));
    }
    if !(thickness > 0.0) {
        return Err(StrayError::Grid(format!("thickness {thickness}")));
    }
    let rule = Rule::new(quad);
    let n = mesh.num_cells();
    Ok((0..n)
        .map(|dst| {
            let mut h = [0.0; 3];
            for (src, v) in m.iter().enumerate() {
                if v == &[0.0; 3] {
                    continue;
                }
                let t = pair_tensor(mesh, dst, src, thickness, &rule);
                for a in 0..3 {
                    h[a] += t[a][0] * v[0] + t[a][1] * v[1] + t[a][2] * v[2];
                }
            }
            h
        })
        .collect())
}
