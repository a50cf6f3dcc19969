use super::{GridInfo, Mesh, MeshError, Point, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Tensor grid of `nx * ny` rectangles. Cell `(i, j)` has index `i + nx * j`
/// and local faces ordered bottom, right, top, left.
pub fn build_uniform_quad_mesh(nx: usize, ny: usize, domain: Rect) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidArgument(format!("grid {nx}x{ny}")));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(MeshError::InvalidArgument("empty domain".into()));
    }
    let hx = domain.width() / nx as f64;
    let hy = domain.height() / ny as f64;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { domain.max[0] } else { domain.min[0] + i as f64 * hx };
            let y = if j == ny { domain.max[1] } else { domain.min[1] + j as f64 * hy };
            nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| i + (nx + 1) * j;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut mesh = Mesh::from_polygons(nodes, cells)?;
    mesh.grid = Some(GridInfo {
        nx,
        ny,
        origin: domain.min,
        hx,
        hy,
    });
    Ok(mesh)
}

/// Random node displacement of a uniform grid by `amplitude * xi * h`, `xi` uniform in [-1, 1].
///
/// Boundary nodes slide along their side with the same shift on opposite
/// sides, so periodic pairing survives. Corners stay fixed.
pub fn perturb_random(mesh: &Mesh, amplitude: f64, seed: u64) -> Result<Mesh, MeshError> {
    let g = mesh
        .grid
        .ok_or_else(|| MeshError::InvalidArgument("perturb_random needs a uniform grid".into()))?;
    if !(0.0..0.5).contains(&amplitude) {
        return Err(MeshError::InvalidArgument(format!("amplitude {amplitude}")));
    }
    if amplitude == 0.0 {
        return Ok(mesh.clone());
    }
    let (nx, ny) = (g.nx, g.ny);
    let id = |i: usize, j: usize| i + (nx + 1) * j;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<[f64; 2]> = (0..mesh.nodes.len())
        .map(|_| {
            let a: f64 = rng.gen_range(-1.0..=1.0);
            let b: f64 = rng.gen_range(-1.0..=1.0);
            [amplitude * a * g.hx, amplitude * b * g.hy]
        })
        .collect();
    let mut nodes = mesh.nodes.clone();
    for j in 0..=ny {
        for i in 0..=nx {
            let n = id(i, j);
            let on_x = i == 0 || i == nx;
            let on_y = j == 0 || j == ny;
            match (on_x, on_y) {
                (true, true) => {}
                (false, false) => {
                    nodes[n][0] += shifts[n][0];
                    nodes[n][1] += shifts[n][1];
                }
                (true, false) => nodes[n][1] += shifts[id(0, j)][1],
                (false, true) => nodes[n][0] += shifts[id(i, 0)][0],
            }
        }
    }
    mesh.with_nodes(nodes).map_err(|e| match e {
        MeshError::NonPositiveArea { cell, area } => MeshError::InvalidArgument(format!(
            "perturbation tangled cell {cell} (area {area:e}); lower the amplitude"
        )),
        e => e,
    })
}

/// Smooth map `x += 0.1 sin(2 pi x) sin(2 pi y)`, same displacement in `y`.
pub fn distort_smooth(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let nodes = mesh.nodes.iter().map(|&p| smooth_map(p)).collect();
    mesh.with_nodes(nodes)
}

pub(crate) fn smooth_map(p: Point) -> Point {
    let d = 0.1 * (2.0 * PI * p[0]).sin() * (2.0 * PI * p[1]).sin();
    [p[0] + d, p[1] + d]
}

/// Logically square `n x n` grid fitted to the disk of radius 0.5 centred at (0.5, 0.5).
pub fn build_circular_logical_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidArgument(format!("n = {n}")));
    }
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let u = -1.0 + 2.0 * i as f64 / n as f64;
            let v = -1.0 + 2.0 * j as f64 / n as f64;
            nodes.push([
                0.5 + 0.5 * u * (1.0 - 0.5 * v * v).sqrt(),
                0.5 + 0.5 * v * (1.0 - 0.5 * u * u).sqrt(),
            ]);
        }
    }
    let id = |i: usize, j: usize| i + (n + 1) * j;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_polygons(nodes, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let m = build_uniform_quad_mesh(1, 1, Rect::unit()).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert!(m.faces.iter().all(|f| f.length == 1.0));
        let m = build_uniform_quad_mesh(32, 32, Rect::unit()).unwrap();
        assert_eq!(m.num_cells(), 1024);
        assert!((m.h - 2f64.sqrt() / 32.0).abs() < 1e-15);
        assert!(build_uniform_quad_mesh(0, 3, Rect::unit()).is_err());
    }

    #[test]
    fn nist_grid_spacing() {
        let m = build_uniform_quad_mesh(100, 25, Rect::new([0.0, 0.0], [500.0, 125.0])).unwrap();
        let g = m.grid.unwrap();
        assert!((g.hx - 5.0).abs() < 1e-12 && (g.hy - 5.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_map_values() {
        assert_eq!(smooth_map([0.0, 0.37]), [0.0, 0.37]);
        let p = smooth_map([0.25, 0.25]);
        assert!((p[0] - 0.35).abs() < 1e-15 && (p[1] - 0.35).abs() < 1e-15);
        let p = smooth_map([0.5, 0.3]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let m = build_uniform_quad_mesh(4, 4, Rect::unit()).unwrap();
        let p = perturb_random(&m, 0.0, 3).unwrap();
        assert_eq!(m.nodes, p.nodes);
    }

    #[test]
    fn perturbation_is_deterministic_and_periodic() {
        let mut m = build_uniform_quad_mesh(8, 8, Rect::unit()).unwrap();
        m.make_periodic(true, true).unwrap();
        let a = perturb_random(&m, 0.2, 11).unwrap();
        let b = perturb_random(&m, 0.2, 11).unwrap();
        let c = perturb_random(&m, 0.2, 12).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_ne!(a.nodes, c.nodes);
        // pairing still geometrically consistent
        a.validate().unwrap();
        let mut a2 = a.clone();
        a2.make_periodic(true, true).unwrap();
        assert_eq!(a2.boundary, a.boundary);
    }

    #[test]
    fn circular_mesh_area() {
        let m = build_circular_logical_mesh(2).unwrap();
        assert_eq!(m.num_cells(), 4);
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let m = build_circular_logical_mesh(n).unwrap();
            let err = (m.total_area() - std::f64::consts::FRAC_PI_4).abs();
            assert!(err < prev / 3.0, "n = {n}: {err}");
            prev = err;
        }
    }
}
