use super::csr::SparseMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerKind {
    None,
    /// Inverse of the diagonal.
    #[default]
    Diagonal,
    /// Incomplete LU with the sparsity of `A`.
    Ilu0,
}

/// Applies `z = P^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &SparseMatrix) -> Self {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Jacobi { inv_diag }
    }

    /// From an explicit diagonal; zero entries are treated as one.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        Jacobi {
            inv_diag: diag.iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect(),
        }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *z = r * d;
        }
    }
}

pub struct Ilu0 {
    lu: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    /// Returns `None` on a zero pivot.
    pub fn new(a: &SparseMatrix) -> Option<Self> {
        let n = a.nrows;
        let mut lu = a.clone();
        let mut diag_pos = Vec::with_capacity(n);
        for i in 0..n {
            diag_pos.push(lu.position(i, i)?);
        }
        // scatter map for the current row
        let mut where_: Vec<usize> = vec![usize::MAX; n];
        for i in 0..n {
            let (a0, a1) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in a0..a1 {
                where_[lu.col_idx[k]] = k;
            }
            for k in a0..a1 {
                let j = lu.col_idx[k];
                if j >= i {
                    break;
                }
                let piv = lu.values[diag_pos[j]];
                if piv == 0.0 {
                    return None;
                }
                let l = lu.values[k] / piv;
                lu.values[k] = l;
                for kk in diag_pos[j] + 1..lu.row_ptr[j + 1] {
                    let c = lu.col_idx[kk];
                    let w = where_[c];
                    if w != usize::MAX {
                        lu.values[w] -= l * lu.values[kk];
                    }
                }
            }
            for k in a0..a1 {
                where_[lu.col_idx[k]] = usize::MAX;
            }
            if lu.values[diag_pos[i]] == 0.0 {
                return None;
            }
        }
        Some(Ilu0 { lu, diag_pos })
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        let n = lu.nrows;
        for i in 0..n {
            let mut s = r[i];
            for k in lu.row_ptr[i]..self.diag_pos[i] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s / lu.values[self.diag_pos[i]];
        }
    }
}

pub fn build_preconditioner(kind: PreconditionerKind, a: &SparseMatrix) -> Box<dyn Preconditioner> {
    match kind {
        PreconditionerKind::None => Box::new(Identity),
        PreconditionerKind::Diagonal => Box::new(Jacobi::new(a)),
        PreconditionerKind::Ilu0 => match Ilu0::new(a) {
            Some(p) => Box::new(p),
            None => {
                log::warn!("ILU(0) hit a zero pivot, falling back to diagonal scaling");
                Box::new(Jacobi::new(a))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let mut t = Vec::new();
        for i in 0..5 {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -2.0));
            }
        }
        let a = SparseMatrix::from_triplets(5, 5, &t);
        let p = Ilu0::new(&a).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0, 1.0];
        let b = a.mul(&x);
        let mut z = [0.0; 5];
        p.apply(&b, &mut z);
        for i in 0..5 {
            assert!((z[i] - x[i]).abs() < 1e-14);
        }
    }
}
