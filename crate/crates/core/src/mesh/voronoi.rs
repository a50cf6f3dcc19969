use super::{Mesh, MeshError, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const LLOYD_ITERATIONS: usize = 4;
const JITTER: f64 = 0.35;
const DEFAULT_SEED: u64 = 0x70_6f_6c_79;

/// Clipped Voronoi tessellation of the unit square with about `n * n` cells.
pub fn build_polygonal_mesh(n: usize) -> Result<Mesh, MeshError> {
    build_polygonal_mesh_seeded(n, DEFAULT_SEED)
}

/// Jittered-grid seeds relaxed by a few Lloyd sweeps, then clipped to the unit square.
pub fn build_polygonal_mesh_seeded(n: usize, seed: u64) -> Result<Mesh, MeshError> {
    if n < 4 {
        return Err(MeshError::InvalidArgument(format!("n = {n}, need n >= 4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let h = 1.0 / n as f64;
    let mut seeds: Vec<Point> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let a: f64 = rng.gen_range(-1.0..=1.0);
            let b: f64 = rng.gen_range(-1.0..=1.0);
            seeds.push([
                (i as f64 + 0.5 + JITTER * a) * h,
                (j as f64 + 0.5 + JITTER * b) * h,
            ]);
        }
    }
    let mut polys = voronoi_cells(&seeds, n);
    for _ in 0..LLOYD_ITERATIONS {
        for (s, p) in seeds.iter_mut().zip(&polys) {
            *s = centroid(p);
        }
        polys = voronoi_cells(&seeds, n);
    }
    let (nodes, cells) = merge_vertices(&polys, 1e-9 * h, 0.02 * h);
    Mesh::from_polygons(nodes, cells)
}

fn centroid(p: &[Point]) -> Point {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..p.len() {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        let c = u[0] * v[1] - v[0] * u[1];
        a += c;
        cx += (u[0] + v[0]) * c;
        cy += (u[1] + v[1]) * c;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Keeps the part of `poly` where `a . x <= c`.
fn clip(poly: &[Point], a: Point, c: f64) -> Vec<Point> {
    let side = |p: &Point| a[0] * p[0] + a[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn voronoi_cells(seeds: &[Point], n: usize) -> Vec<Vec<Point>> {
    let bucket = |p: Point| {
        let i = ((p[0] * n as f64) as isize).clamp(0, n as isize - 1);
        let j = ((p[1] * n as f64) as isize).clamp(0, n as isize - 1);
        (i, j)
    };
    let mut buckets: HashMap<(isize, isize), Vec<usize>> = HashMap::new();
    for (k, &s) in seeds.iter().enumerate() {
        buckets.entry(bucket(s)).or_default().push(k);
    }
    let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    seeds
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let (bi, bj) = bucket(s);
            let mut poly = square.clone();
            for dj in -3..=3 {
                for di in -3..=3 {
                    let Some(list) = buckets.get(&(bi + di, bj + dj)) else {
                        continue;
                    };
                    for &o in list {
                        if o == k {
                            continue;
                        }
                        let t = seeds[o];
                        let a = [t[0] - s[0], t[1] - s[1]];
                        let c = 0.5 * (a[0] * (t[0] + s[0]) + a[1] * (t[1] + s[1]));
                        poly = clip(&poly, a, c);
                    }
                }
            }
            poly
        })
        .collect()
}

/// Deduplicates coincident vertices, then collapses edges shorter than `short`.
fn merge_vertices(polys: &[Vec<Point>], eps: f64, short: f64) -> (Vec<Point>, Vec<Vec<usize>>) {
    let mut nodes: Vec<Point> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point| ((p[0] / eps).floor() as i64, (p[1] / eps).floor() as i64);
    let mut ids: Vec<Vec<usize>> = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut cell = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if (nodes[v][0] - p[0]).abs() <= eps && (nodes[v][1] - p[1]).abs() <= eps {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                nodes.push(p);
                grid.entry((kx, ky)).or_default().push(nodes.len() - 1);
                nodes.len() - 1
            });
            cell.push(v);
        }
        ids.push(cell);
    }

    // union-find over short edges
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for cell in &ids {
        for i in 0..cell.len() {
            let (a, b) = (cell[i], cell[(i + 1) % cell.len()]);
            let (pa, pb) = (nodes[a], nodes[b]);
            if (pa[0] - pb[0]).hypot(pa[1] - pb[1]) < short {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    // representative position: prefer boundary points, corners first
    let on_edge = |p: Point| {
        let e = 1e-12;
        (p[0] < e || p[0] > 1.0 - e) as u8 + (p[1] < e || p[1] > 1.0 - e) as u8
    };
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..nodes.len() {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut new_id = vec![usize::MAX; nodes.len()];
    let mut out_nodes = Vec::with_capacity(groups.len());
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();
    for r in roots {
        let members = &groups[&r];
        let best = members.iter().map(|&v| on_edge(nodes[v])).max().unwrap_or(0);
        let chosen: Vec<Point> = members
            .iter()
            .filter(|&&v| on_edge(nodes[v]) == best)
            .map(|&v| nodes[v])
            .collect();
        let k = chosen.len() as f64;
        let p = [
            chosen.iter().map(|p| p[0]).sum::<f64>() / k,
            chosen.iter().map(|p| p[1]).sum::<f64>() / k,
        ];
        for &v in members {
            new_id[v] = out_nodes.len();
        }
        out_nodes.push(p);
    }
    let cells = ids
        .into_iter()
        .map(|cell| {
            let mut c: Vec<usize> = Vec::with_capacity(cell.len());
            for v in cell {
                let id = new_id[v];
                if c.last() != Some(&id) {
                    c.push(id);
                }
            }
            while c.len() > 1 && c.first() == c.last() {
                c.pop();
            }
            c
        })
        .collect();
    (out_nodes, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygonal_family_is_valid_and_mixed() {
        let m8 = build_polygonal_mesh(8).unwrap();
        let m16 = build_polygonal_mesh(16).unwrap();
        assert_eq!(m8.num_cells(), 64);
        assert!((m8.total_area() - 1.0).abs() < 1e-12);
        let mut counts = std::collections::BTreeSet::new();
        for c in &m16.cells {
            counts.insert(c.num_faces());
        }
        assert!(counts.len() >= 3, "face counts {counts:?}");
        let ratio = m8.h / m16.h;
        assert!(ratio > 1.5 && ratio < 2.7, "h ratio {ratio}");
    }

    #[test]
    fn deterministic() {
        let a = build_polygonal_mesh(6).unwrap();
        let b = build_polygonal_mesh(6).unwrap();
        assert_eq!(a.nodes, b.nodes);
    }
}
