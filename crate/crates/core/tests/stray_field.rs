use mimetic_ll::mesh::{build_uniform_quad_mesh, Rect};
use mimetic_ll::stray::{apply_direct, demag_tensor_entry, DemagKernel, DirectQuadrature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

// 10-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 10] = [
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
    -0.1488743389816312, 0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
    0.8650633666889845, 0.9739065285171717,
];
const GL_W: [f64; 10] = [
    0.0666713443086881, 0.1494513492651124, 0.2190863625159820, 0.2692667193099963,
    0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513492651124, 0.0666713443086881,
];

/// Field at `x` of a unit charge density on the rectangle spanned by axes
/// `(b, c)` at coordinate `a = level`, by composite Gauss quadrature.
fn face_field(x: [f64; 3], a: usize, level: f64, lo: [f64; 3], hi: [f64; 3]) -> [f64; 3] {
    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
    let panels = 12;
    let mut f = [0.0; 3];
    for pb in 0..panels {
        for pc in 0..panels {
            let (b0, b1) = (
                lo[b] + (hi[b] - lo[b]) * pb as f64 / panels as f64,
                lo[b] + (hi[b] - lo[b]) * (pb + 1) as f64 / panels as f64,
            );
            let (c0, c1) = (
                lo[c] + (hi[c] - lo[c]) * pc as f64 / panels as f64,
                lo[c] + (hi[c] - lo[c]) * (pc + 1) as f64 / panels as f64,
            );
            for (xi, wi) in GL_X.iter().zip(GL_W) {
                for (xj, wj) in GL_X.iter().zip(GL_W) {
                    let mut y = [0.0; 3];
                    y[a] = level;
                    y[b] = 0.5 * (b0 + b1) + 0.5 * (b1 - b0) * xi;
                    y[c] = 0.5 * (c0 + c1) + 0.5 * (c1 - c0) * xj;
                    let w = wi * wj * 0.25 * (b1 - b0) * (c1 - c0);
                    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    for k in 0..3 {
                        f[k] += w * d[k] / (r * r * r);
                    }
                }
            }
        }
    }
    f
}

/// Surface-charge quadrature of the field of a uniformly magnetized box.
fn box_tensor_by_quadrature(offset: [i64; 3], h: [f64; 3]) -> [[f64; 3]; 3] {
    let x = [offset[0] as f64 * h[0], offset[1] as f64 * h[1], offset[2] as f64 * h[2]];
    let lo = [-h[0] / 2.0, -h[1] / 2.0, -h[2] / 2.0];
    let hi = [h[0] / 2.0, h[1] / 2.0, h[2] / 2.0];
    let mut t = [[0.0; 3]; 3];
    for b in 0..3 {
        // magnetization along b: charge +1 on the high face, -1 on the low face
        let plus = face_field(x, b, hi[b], lo, hi);
        let minus = face_field(x, b, lo[b], lo, hi);
        for a in 0..3 {
            t[a][b] = (plus[a] - minus[a]) / (4.0 * PI);
        }
    }
    t
}

#[test]
fn tensor_matches_quadrature_on_nearest_offsets() {
    for h in [[1.0, 1.0, 1.0], [5.0, 5.0, 3.0], [3.75, 3.75, 7.0]] {
        for i in -1..=1 {
            for j in -1..=1 {
                for k in -1..=1 {
                    let o = [i, j, k];
                    let a = demag_tensor_entry(o, h);
                    let b = box_tensor_by_quadrature(o, h);
                    for r in 0..3 {
                        for c in 0..3 {
                            assert!(
                                (a[r][c] - b[r][c]).abs() < 2e-6,
                                "offset {o:?} h {h:?} ({r},{c}): {} vs {}",
                                a[r][c],
                                b[r][c]
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn tensor_symmetry_and_parity() {
    let h = [5.0, 5.0, 3.0];
    for o in [[2, 1, 0], [-3, 4, 1], [1, -1, 2]] {
        let a = demag_tensor_entry(o, h);
        let n = demag_tensor_entry([-o[0], -o[1], -o[2]], h);
        let fx = demag_tensor_entry([-o[0], o[1], o[2]], h);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(a[r][c], a[c][r]);
                assert!((a[r][c] - n[r][c]).abs() < 1e-13);
            }
        }
        // mirroring x flips the sign of the xy and xz couplings only
        assert!((fx[0][1] + a[0][1]).abs() < 1e-13);
        assert!((fx[0][2] + a[0][2]).abs() < 1e-13);
        assert!((fx[1][2] - a[1][2]).abs() < 1e-13);
        assert!((fx[0][0] - a[0][0]).abs() < 1e-13);
    }
}

fn random_field(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect()
}

fn max_rel(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[test]
fn fft_matches_direct_convolution() {
    for (dims, h) in [([8, 8, 1], [1.0, 1.0, 0.5]), ([5, 3, 2], [1.0, 2.0, 1.5]), ([1, 1, 1], [1.0; 3])] {
        let k = DemagKernel::new(dims, h).unwrap();
        let m = random_field(k.num_cells(), 7);
        let a = k.apply_fft(&m).unwrap();
        let b = k.apply_direct_convolution(&m).unwrap();
        assert!(max_rel(&a, &b) < 1e-12, "{dims:?}");
    }
}

#[test]
fn single_cell_is_self_term() {
    let k = DemagKernel::new([1, 1, 1], [1.0, 2.0, 3.0]).unwrap();
    let m = [[0.3, -0.4, 0.5]];
    let h = k.apply_fft(&m).unwrap()[0];
    let t = demag_tensor_entry([0, 0, 0], [1.0, 2.0, 3.0]);
    for a in 0..3 {
        let want = t[a][0] * m[0][0] + t[a][1] * m[0][1] + t[a][2] * m[0][2];
        assert!((h[a] - want).abs() < 1e-15);
    }
}

#[test]
fn linearity() {
    let k = DemagKernel::new([6, 4, 1], [5.0, 5.0, 3.0]).unwrap();
    let m1 = random_field(24, 1);
    let m2 = random_field(24, 2);
    let comb: Vec<[f64; 3]> = m1
        .iter()
        .zip(&m2)
        .map(|(a, b)| [0.7 * a[0] - 1.3 * b[0], 0.7 * a[1] - 1.3 * b[1], 0.7 * a[2] - 1.3 * b[2]])
        .collect();
    let h1 = k.apply_fft(&m1).unwrap();
    let h2 = k.apply_fft(&m2).unwrap();
    let h = k.apply_fft(&comb).unwrap();
    for i in 0..24 {
        for a in 0..3 {
            assert!((h[i][a] - (0.7 * h1[i][a] - 1.3 * h2[i][a])).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_film_is_demagnetizing() {
    let k = DemagKernel::new([100, 25, 1], [5.0, 5.0, 3.0]).unwrap();
    let m = vec![[1.0, 0.0, 0.0]; 2500];
    let h = k.apply_fft(&m).unwrap();
    for j in 5..20 {
        for i in 10..90 {
            assert!(h[i + 100 * j][0] < 0.0);
        }
    }
}

#[test]
fn direct_mesh_sum_agrees_with_kernel() {
    let mesh = build_uniform_quad_mesh(8, 8, Rect::new([0.0, 0.0], [8.0, 8.0])).unwrap();
    let k = DemagKernel::new([8, 8, 1], [1.0, 1.0, 0.6]).unwrap();
    let m = random_field(64, 3);
    let exact = k.apply_fft(&m).unwrap();
    let coarse = apply_direct(&mesh, &m, 0.6, DirectQuadrature { order: 3, subdivisions: 1 }).unwrap();
    let fine = apply_direct(&mesh, &m, 0.6, DirectQuadrature { order: 6, subdivisions: 4 }).unwrap();
    let (ec, ef) = (max_rel(&coarse, &exact), max_rel(&fine, &exact));
    assert!(ef < ec, "{ef} vs {ec}");
    assert!(ef < 1e-3, "{ef}");
}

#[test]
fn direct_field_decays_like_a_dipole() {
    let mesh = build_uniform_quad_mesh(64, 1, Rect::new([0.0, 0.0], [64.0, 1.0])).unwrap();
    let mut m = vec![[0.0; 3]; 64];
    m[0] = [1.0, 0.0, 0.0];
    let h = apply_direct(&mesh, &m, 1.0, DirectQuadrature::default()).unwrap();
    let (r1, r2) = (8.0, 32.0);
    let slope = (h[32][0].abs() / h[8][0].abs()).ln() / (r2 / r1 as f64).ln();
    assert!((slope + 3.0).abs() < 0.1, "slope {slope}");
    let zero = apply_direct(&mesh, &vec![[0.0; 3]; 64], 1.0, DirectQuadrature::default()).unwrap();
    assert!(zero.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn kernel_cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("mimetic-ll-cache-{}", std::process::id()));
    let a = DemagKernel::cached(&dir, [4, 3, 1], [5.0, 5.0, 3.0]).unwrap();
    let b = DemagKernel::cached(&dir, [4, 3, 1], [5.0, 5.0, 3.0]).unwrap();
    let m = random_field(12, 9);
    assert_eq!(a.apply_fft(&m).unwrap(), b.apply_fft(&m).unwrap());
    let mut buf = Vec::new();
    a.save(&mut buf).unwrap();
    assert!(DemagKernel::load(&buf[..], [4, 3, 1], [5.0, 5.0, 2.0]).is_err());
    std::fs::remove_dir_all(dir).ok();
}
