use std::f64::consts::PI;

/// Demagnetizing tensor between two cuboid cells of size `spacing` whose
/// centres differ by `offset * spacing`. Maps the source magnetization to
/// the field at the target centre; the self term has trace -1.
pub fn demag_tensor_entry(offset: [i64; 3], spacing: [f64; 3]) -> [[f64; 3]; 3] {
    let c = [
        offset[0] as f64 * spacing[0],
        offset[1] as f64 * spacing[1],
        offset[2] as f64 * spacing[2],
    ];
    let half = [0.5 * spacing[0], 0.5 * spacing[1], 0.5 * spacing[2]];
    // diagonal: sum of s_x s_y s_z atan(R_b R_c / (R_a R)) over the 8 corners
    // off-diagonal: sum of s_x s_y s_z log(R + R_c) for the third axis c
    let mut diag = [0.0; 3];
    let mut off = [0.0; 3]; // xy, xz, yz
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            let rx = c[0] + sx * half[0];
            let ry = c[1] + sy * half[1];
            // pair the two z corners before summing
            let mut at = [0.0; 3];
            let mut lg = [0.0; 3];
            for sz in [-1.0, 1.0] {
                let rz = c[2] + sz * half[2];
                let r = (rx * rx + ry * ry + rz * rz).sqrt();
                at[0] += sz * (ry * rz / (rx * r)).atan();
                at[1] += sz * (rx * rz / (ry * r)).atan();
                at[2] += sz * (rx * ry / (rz * r)).atan();
                lg[0] += sz * log_r_plus(rz, r, rx * rx + ry * ry);
                lg[1] += sz * log_r_plus(ry, r, rx * rx + rz * rz);
                lg[2] += sz * log_r_plus(rx, r, ry * ry + rz * rz);
            }
            let s = sx * sy;
            for a in 0..3 {
                diag[a] += s * at[a];
                off[a] += s * lg[a];
            }
        }
    }
    let f = -1.0 / (4.0 * PI);
    let (xx, yy, zz) = (f * diag[0], f * diag[1], f * diag[2]);
    let (xy, xz, yz) = (-f * off[0], -f * off[1], -f * off[2]);
    [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
}

/// `ln(R + t)` where `R^2 = t^2 + rest`, rewritten for `t < 0` to avoid cancellation.
fn log_r_plus(t: f64, r: f64, rest: f64) -> f64 {
    if t >= 0.0 {
        (r + t).ln()
    } else {
        (rest / (r - t)).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_self_term() {
        let k = demag_tensor_entry([0, 0, 0], [1.0, 1.0, 1.0]);
        for a in 0..3 {
            assert!((k[a][a] + 1.0 / 3.0).abs() < 1e-14);
            for b in 0..3 {
                if a != b {
                    assert!(k[a][b].abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn cuboid_trace() {
        for h in [[5.0, 5.0, 3.0], [3.75, 3.75, 7.0], [1.0, 2.0, 0.1]] {
            let k = demag_tensor_entry([0, 0, 0], h);
            assert!((k[0][0] + k[1][1] + k[2][2] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn thin_film_zeros() {
        for o in [[1, 0, 0], [3, -2, 0], [0, 7, 0]] {
            let k = demag_tensor_entry(o, [5.0, 5.0, 3.0]);
            assert_eq!(k[0][2], 0.0);
            assert_eq!(k[1][2], 0.0);
        }
    }
}
