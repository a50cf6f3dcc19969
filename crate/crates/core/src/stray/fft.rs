use super::tensor::demag_tensor_entry;
use super::StrayError;
use crate::vec3::Vec3;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Independent tensor components, in this order.
const COMPONENTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
const MAGIC: &[u8; 8] = b"MLDEMAG1";

fn fast_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

struct Plans {
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

/// Demagnetizing tensors of a uniform grid together with their transforms on
/// the zero-padded lattice.
pub struct DemagKernel {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    /// Six components per offset, offsets `(-(n-1)..n)` per axis, x fastest.
    lattice: Vec<[f64; 6]>,
    padded: [usize; 3],
    spectra: Vec<Vec<Complex<f64>>>,
    plans: Plans,
}

impl std::fmt::Debug for DemagKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DemagKernel")
            .field("dims", &self.dims)
            .field("spacing", &self.spacing)
            .field("padded", &self.padded)
            .finish()
    }
}

impl DemagKernel {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self, StrayError> {
        if dims.iter().any(|&n| n == 0) || spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(StrayError::Grid(format!("dims {dims:?}, spacing {spacing:?}")));
        }
        let ext = [2 * dims[0] - 1, 2 * dims[1] - 1, 2 * dims[2] - 1];
        let mut lattice = Vec::with_capacity(ext[0] * ext[1] * ext[2]);
        for k in 0..ext[2] {
            for j in 0..ext[1] {
                for i in 0..ext[0] {
                    let o = [
                        i as i64 - (dims[0] as i64 - 1),
                        j as i64 - (dims[1] as i64 - 1),
                        k as i64 - (dims[2] as i64 - 1),
                    ];
                    let t = demag_tensor_entry(o, spacing);
                    lattice.push(COMPONENTS.map(|(a, b)| t[a][b]));
                }
            }
        }
        Ok(Self::from_lattice(dims, spacing, lattice))
    }

    fn from_lattice(dims: [usize; 3], spacing: [f64; 3], lattice: Vec<[f64; 6]>) -> Self {
        let padded = dims.map(|n| fast_size(2 * n - 1));
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fwd: padded.map(|p| planner.plan_fft_forward(p)),
            inv: padded.map(|p| planner.plan_fft_inverse(p)),
        };
        let mut k = DemagKernel {
            dims,
            spacing,
            lattice,
            padded,
            spectra: Vec::new(),
            plans,
        };
        let ext = [2 * dims[0] - 1, 2 * dims[1] - 1, 2 * dims[2] - 1];
        let total = padded[0] * padded[1] * padded[2];
        for c in 0..6 {
            let mut buf = vec![Complex::new(0.0, 0.0); total];
            for kk in 0..ext[2] {
                for j in 0..ext[1] {
                    for i in 0..ext[0] {
                        let o = [
                            i as isize - (dims[0] as isize - 1),
                            j as isize - (dims[1] as isize - 1),
                            kk as isize - (dims[2] as isize - 1),
                        ];
                        let p = [0, 1, 2].map(|d| o[d].rem_euclid(padded[d] as isize) as usize);
                        buf[p[0] + padded[0] * (p[1] + padded[1] * p[2])] =
                            Complex::new(k.lattice[i + ext[0] * (j + ext[1] * kk)][c], 0.0);
                    }
                }
            }
            k.transform(&mut buf, false);
            k.spectra.push(buf);
        }
        k
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().product()
    }

    /// Tensor for a cell offset, looked up in the lattice.
    pub fn tensor(&self, offset: [i64; 3]) -> [[f64; 3]; 3] {
        let ext = self.dims.map(|n| 2 * n - 1);
        let idx = [0, 1, 2].map(|d| (offset[d] + self.dims[d] as i64 - 1) as usize);
        let v = self.lattice[idx[0] + ext[0] * (idx[1] + ext[1] * idx[2])];
        [[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]]
    }

    fn transform(&self, buf: &mut [Complex<f64>], inverse: bool) {
        let [px, py, pz] = self.padded;
        let plans = if inverse { &self.plans.inv } else { &self.plans.fwd };
        for row in buf.chunks_exact_mut(px) {
            plans[0].process(row);
        }
        let mut line = vec![Complex::new(0.0, 0.0); py.max(pz)];
        if py > 1 {
            for k in 0..pz {
                for i in 0..px {
                    for j in 0..py {
                        line[j] = buf[i + px * (j + py * k)];
                    }
                    plans[1].process(&mut line[..py]);
                    for j in 0..py {
                        buf[i + px * (j + py * k)] = line[j];
                    }
                }
            }
        }
        if pz > 1 {
            for j in 0..py {
                for i in 0..px {
                    for k in 0..pz {
                        line[k] = buf[i + px * (j + py * k)];
                    }
                    plans[2].process(&mut line[..pz]);
                    for k in 0..pz {
                        buf[i + px * (j + py * k)] = line[k];
                    }
                }
            }
        }
    }

    /// Stray field by zero-padded FFT convolution. Cell `(i, j, k)` has index
    /// `i + nx (j + ny k)`.
    pub fn apply_fft(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError> {
        if m.len() != self.num_cells() {
            return Err(StrayError::Grid(format!(
                "field has {} cells, kernel expects {}",
                m.len(),
                self.num_cells()
            )));
        }
        let [nx, ny, nz] = self.dims;
        let [px, py, pz] = self.padded;
        let total = px * py * pz;
        let mut mh: Vec<Vec<Complex<f64>>> = Vec::with_capacity(3);
        for u in 0..3 {
            let mut buf = vec![Complex::new(0.0, 0.0); total];
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        buf[i + px * (j + py * k)] = Complex::new(m[i + nx * (j + ny * k)][u], 0.0);
                    }
                }
            }
            self.transform(&mut buf, false);
            mh.push(buf);
        }
        let s = &self.spectra;
        let mut out = vec![[0.0; 3]; m.len()];
        let scale = 1.0 / total as f64;
        // component index into `spectra` for (a, b)
        let idx = |a: usize, b: usize| match (a.min(b), a.max(b)) {
            (0, 0) => 0,
            (0, 1) => 1,
            (0, 2) => 2,
            (1, 1) => 3,
            (1, 2) => 4,
            _ => 5,
        };
        let mut h = vec![Complex::new(0.0, 0.0); total];
        for v in 0..3 {
            for q in 0..total {
                h[q] = s[idx(v, 0)][q] * mh[0][q] + s[idx(v, 1)][q] * mh[1][q] + s[idx(v, 2)][q] * mh[2][q];
            }
            self.transform(&mut h, true);
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        out[i + nx * (j + ny * k)][v] = h[i + px * (j + py * k)].re * scale;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Brute-force `O(N^2)` convolution with the same tensors.
    pub fn apply_direct_convolution(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError> {
        if m.len() != self.num_cells() {
            return Err(StrayError::Grid("field size mismatch".into()));
        }
        let [nx, ny, nz] = self.dims;
        let mut out = vec![[0.0; 3]; m.len()];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let mut h = [0.0; 3];
                    for r in 0..nz {
                        for q in 0..ny {
                            for p in 0..nx {
                                let t = self.tensor([
                                    i as i64 - p as i64,
                                    j as i64 - q as i64,
                                    k as i64 - r as i64,
                                ]);
                                let src = m[p + nx * (q + ny * r)];
                                for a in 0..3 {
                                    h[a] += t[a][0] * src[0] + t[a][1] * src[1] + t[a][2] * src[2];
                                }
                            }
                        }
                    }
                    out[i + nx * (j + ny * k)] = h;
                }
            }
        }
        Ok(out)
    }

    pub fn save<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for n in self.dims {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for h in self.spacing {
            w.write_all(&h.to_le_bytes())?;
        }
        for v in &self.lattice {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a kernel written by [`save`](Self::save); the key must match.
    pub fn load<R: Read>(mut r: R, dims: [usize; 3], spacing: [f64; 3]) -> Result<Self, StrayError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(StrayError::Cache("bad magic".into()));
        }
        let mut b8 = [0u8; 8];
        let mut fd = [0usize; 3];
        for d in &mut fd {
            r.read_exact(&mut b8)?;
            *d = u64::from_le_bytes(b8) as usize;
        }
        let mut fs = [0.0; 3];
        for h in &mut fs {
            r.read_exact(&mut b8)?;
            *h = f64::from_le_bytes(b8);
        }
        if fd != dims || fs != spacing {
            return Err(StrayError::Cache(format!("key mismatch: {fd:?} {fs:?}")));
        }
        let count = dims.iter().map(|n| 2 * n - 1).product::<usize>();
        let mut lattice = Vec::with_capacity(count);
        for _ in 0..count {
            let mut v = [0.0; 6];
            for x in &mut v {
                r.read_exact(&mut b8)?;
                *x = f64::from_le_bytes(b8);
            }
            lattice.push(v);
        }
        Ok(Self::from_lattice(dims, spacing, lattice))
    }

    pub fn cache_file_name(dims: [usize; 3], spacing: [f64; 3]) -> String {
        format!(
            "demag_{}x{}x{}_{:e}_{:e}_{:e}.bin",
            dims[0], dims[1], dims[2], spacing[0], spacing[1], spacing[2]
        )
    }

    /// Loads the kernel from `dir` if cached there, otherwise builds and stores it.
    pub fn cached(dir: &Path, dims: [usize; 3], spacing: [f64; 3]) -> Result<Self, StrayError> {
        let path: PathBuf = dir.join(Self::cache_file_name(dims, spacing));
        if let Ok(f) = std::fs::File::open(&path) {
            match Self::load(std::io::BufReader::new(f), dims, spacing) {
                Ok(k) => return Ok(k),
                Err(e) => log::warn!("ignoring kernel cache {}: {e}", path.display()),
            }
        }
        let k = Self::new(dims, spacing)?;
        std::fs::create_dir_all(dir)?;
        let f = std::fs::File::create(&path)?;
        k.save(std::io::BufWriter::new(f))?;
        Ok(k)
    }
}
