use super::{Mesh, MeshError};
use std::collections::HashMap;

/// Vertical strip `lo <= x <= hi` of the unit square to be resolved finely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementBand {
    pub lo: f64,
    pub hi: f64,
}

impl RefinementBand {
    pub fn centered(center: f64, half_width: f64) -> Self {
        RefinementBand {
            lo: center - half_width,
            hi: center + half_width,
        }
    }
}

/// Column widths in units of the finest spacing, 2:1 balanced.
fn column_widths(base_n: usize, levels: u32, band: RefinementBand) -> Vec<(u64, u64)> {
    let unit = 1u64 << levels;
    let fine = (base_n as u64 * unit) as f64;
    // (start, width) in finest units
    let mut cols: Vec<(u64, u64)> = (0..base_n as u64).map(|i| (i * unit, unit)).collect();
    for _ in 0..levels {
        let mut next = Vec::with_capacity(cols.len() * 2);
        for &(x0, w) in &cols {
            let (a, b) = (x0 as f64 / fine, (x0 + w) as f64 / fine);
            if w > 1 && a < band.hi && b > band.lo {
                next.push((x0, w / 2));
                next.push((x0 + w / 2, w / 2));
            } else {
                next.push((x0, w));
            }
        }
        cols = next;
        loop {
            let mut changed = false;
            let mut next = Vec::with_capacity(cols.len());
            for i in 0..cols.len() {
                let (x0, w) = cols[i];
                let too_big = [i.checked_sub(1), Some(i + 1)]
                    .into_iter()
                    .flatten()
                    .filter_map(|j| cols.get(j))
                    .any(|&(_, v)| w > 2 * v);
                if too_big {
                    next.push((x0, w / 2));
                    next.push((x0 + w / 2, w / 2));
                    changed = true;
                } else {
                    next.push((x0, w));
                }
            }
            cols = next;
            if !changed {
                break;
            }
        }
    }
    cols
}

/// Squares refined `levels` times inside `band`, with 2:1 balance between columns.
///
/// Where a coarse column meets a finer one the coarse squares get the hanging
/// node as an extra vertex, so they become degenerate pentagons.
pub fn build_locally_refined_mesh(
    base_n: usize,
    levels: u32,
    band: RefinementBand,
) -> Result<Mesh, MeshError> {
    if base_n == 0 || levels > 20 {
        return Err(MeshError::InvalidArgument(format!(
            "base_n = {base_n}, levels = {levels}"
        )));
    }
    if !(band.lo < band.hi) {
        return Err(MeshError::InvalidArgument(format!("band {band:?}")));
    }
    let cols = column_widths(base_n, levels, band);
    let total = base_n as u64 * (1u64 << levels);
    let scale = 1.0 / total as f64;
    let mut nodes = Vec::new();
    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut node = |x: u64, y: u64, nodes: &mut Vec<[f64; 2]>| {
        *ids.entry((x, y)).or_insert_with(|| {
            nodes.push([x as f64 * scale, y as f64 * scale]);
            nodes.len() - 1
        })
    };
    // y-spacing of vertices along each vertical line: finest adjacent column
    let mut line_step: HashMap<u64, u64> = HashMap::new();
    for &(x0, w) in &cols {
        for x in [x0, x0 + w] {
            let s = line_step.entry(x).or_insert(w);
            *s = (*s).min(w);
        }
    }
    let mut polys = Vec::new();
    for &(x0, w) in &cols {
        let x1 = x0 + w;
        let (sl, sr) = (line_step[&x0], line_step[&x1]);
        for r in 0..total / w {
            let (y0, y1) = (r * w, (r + 1) * w);
            let mut p = Vec::with_capacity(6);
            p.push(node(x0, y0, &mut nodes));
            // right side bottom to top, then left side top to bottom
            let mut y = y0;
            while y <= y1 {
                p.push(node(x1, y, &mut nodes));
                y += sr;
            }
            let mut y = y1;
            while y > y0 {
                p.push(node(x0, y, &mut nodes));
                y -= sl;
            }
            polys.push(p);
        }
    }
    Mesh::from_polygons(nodes, polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_levels_is_uniform() {
        let m = build_locally_refined_mesh(8, 0, RefinementBand::centered(0.5, 0.1)).unwrap();
        assert_eq!(m.num_cells(), 64);
        assert!(m.cells.iter().all(|c| c.num_faces() == 4));
    }

    #[test]
    fn pentagons_appear_and_area_is_exact() {
        let m = build_locally_refined_mesh(8, 2, RefinementBand::centered(0.5, 0.05)).unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        let pent = m.cells.iter().filter(|c| c.num_faces() == 5).count();
        assert!(pent > 0);
        assert!(m.cells.iter().all(|c| c.num_faces() <= 6));
    }

    #[test]
    fn balance_holds() {
        let cols = column_widths(5, 4, RefinementBand::centered(0.5, 0.02));
        for w in cols.windows(2) {
            assert!(w[0].1 <= 2 * w[1].1 && w[1].1 <= 2 * w[0].1);
        }
    }
}
