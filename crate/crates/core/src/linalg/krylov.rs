use super::csr::SparseMatrix;
use super::precond::{build_preconditioner, Preconditioner, PreconditionerKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Bicgstab,
    Gmres,
    /// Conjugate gradients; only for symmetric positive definite systems.
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: PreconditionerKind,
    pub restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Bicgstab,
            tolerance: 1e-10,
            max_iterations: 5000,
            preconditioner: PreconditionerKind::Diagonal,
            restart: 50,
        }
    }
}

impl SolverConfig {
    pub fn cg() -> Self {
        SolverConfig {
            method: Method::Cg,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed after the iteration.
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations, relative residual {residual:e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("breakdown (non-finite values) after {iterations} iterations")]
    Breakdown { iterations: usize },
    #[error("dimension mismatch: matrix {rows}x{cols}, right-hand side {rhs}")]
    Dimension { rows: usize, cols: usize, rhs: usize },
    #[error("conjugate gradients requested for a nonsymmetric matrix")]
    NotSymmetric,
    #[error("invalid tolerance {0}")]
    Tolerance(f64),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` from a zero initial guess.
pub fn solve(a: &SparseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let mut x = vec![0.0; b.len()];
    let stats = solve_with_guess(a, b, &mut x, cfg)?;
    Ok((x, stats))
}

/// Solves `A x = b`, starting from the contents of `x`.
pub fn solve_with_guess(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    cfg: &SolverConfig,
) -> Result<SolveStats, SolveError> {
    if cfg.method == Method::Cg && !a.is_symmetric(1e-12) {
        return Err(SolveError::NotSymmetric);
    }
    let pc = build_preconditioner(cfg.preconditioner, a);
    solve_preconditioned(a, pc.as_ref(), b, x, cfg)
}

/// Same as [`solve_with_guess`] with a prebuilt preconditioner; the caller
/// is responsible for symmetry when using CG.
pub fn solve_preconditioned(
    a: &SparseMatrix,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    cfg: &SolverConfig,
) -> Result<SolveStats, SolveError> {
    if a.nrows != a.ncols || b.len() != a.nrows || x.len() != a.ncols {
        return Err(SolveError::Dimension {
            rows: a.nrows,
            cols: a.ncols,
            rhs: b.len(),
        });
    }
    if !(cfg.tolerance > 0.0 && cfg.tolerance < 1.0) {
        return Err(SolveError::Tolerance(cfg.tolerance));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut history = Vec::new();
    let mut total = 0;
    // a second pass covers drift between recursive and true residuals
    for _ in 0..3 {
        let budget = cfg.max_iterations.saturating_sub(total);
        let it = match cfg.method {
            Method::Cg => cg(a, pc, b, x, cfg.tolerance, budget, &mut history)?,
            Method::Bicgstab => bicgstab(a, pc, b, x, cfg.tolerance, budget, &mut history)?,
            Method::Gmres => gmres(a, pc, b, x, cfg.tolerance, budget, cfg.restart.max(1), &mut history)?,
        };
        total += it;
        let mut r = vec![0.0; b.len()];
        residual(a, x, b, &mut r);
        let rel = norm(&r) / bnorm;
        if !rel.is_finite() {
            return Err(SolveError::Breakdown { iterations: total });
        }
        if rel <= cfg.tolerance {
            return Ok(SolveStats {
                iterations: total,
                residual: rel,
            });
        }
        if total >= cfg.max_iterations {
            return Err(SolveError::NotConverged {
                iterations: total,
                residual: rel,
                history,
            });
        }
    }
    let mut r = vec![0.0; b.len()];
    residual(a, x, b, &mut r);
    Err(SolveError::NotConverged {
        iterations: total,
        residual: norm(&r) / bnorm,
        history,
    })
}

fn cg(
    a: &SparseMatrix,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_it: usize,
    history: &mut Vec<f64>,
) -> Result<usize, SolveError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut r = vec![0.0; n];
    residual(a, x, b, &mut r);
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 0..max_it {
        let rn = norm(&r) / bnorm;
        history.push(rn);
        if rn <= tol {
            return Ok(it);
        }
        a.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq.is_finite()) || pq == 0.0 {
            return Err(SolveError::Breakdown { iterations: it });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(max_it)
}

/// Right-preconditioned BiCGStab.
fn bicgstab(
    a: &SparseMatrix,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_it: usize,
    history: &mut Vec<f64>,
) -> Result<usize, SolveError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut r = vec![0.0; n];
    residual(a, x, b, &mut r);
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 0..max_it {
        let rn = norm(&r) / bnorm;
        history.push(rn);
        if rn <= tol {
            return Ok(it);
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || !rho_new.is_finite() {
            // lost biorthogonality: restart the shadow residual
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pc.apply(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return Err(SolveError::Breakdown { iterations: it });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            history.push(norm(&s) / bnorm);
            return Ok(it + 1);
        }
        pc.apply(&s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 || !tt.is_finite() {
            return Err(SolveError::Breakdown { iterations: it });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == 0.0 {
            return Err(SolveError::Breakdown { iterations: it });
        }
    }
    Ok(max_it)
}

/// Right-preconditioned restarted GMRES with Givens rotations.
#[allow(clippy::too_many_arguments)]
fn gmres(
    a: &SparseMatrix,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_it: usize,
    restart: usize,
    history: &mut Vec<f64>,
) -> Result<usize, SolveError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut it = 0;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    while it < max_it {
        residual(a, x, b, &mut r);
        let beta = norm(&r);
        history.push(beta / bnorm);
        if beta / bnorm <= tol {
            return Ok(it);
        }
        let m = restart.min(max_it - it);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            pc.apply(&basis[k], &mut z);
            a.matvec(&z, &mut w);
            for (j, vj) in basis.iter().enumerate() {
                let hjk = dot(&w, vj);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * vj[i];
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let tmp = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 || !d.is_finite() {
                return Err(SolveError::Breakdown { iterations: it });
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            it += 1;
            k_used = k + 1;
            history.push(g[k + 1].abs() / bnorm);
            if g[k + 1].abs() / bnorm <= tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut u = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                u[i] += yj * basis[j][i];
            }
        }
        pc.apply(&u, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        if history.last().is_some_and(|&v| v <= tol) {
            return Ok(it);
        }
    }
    Ok(it)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
    }

    fn nonsym(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
                t.push((i + 1, i, -0.5));
            }
            if i + 7 < n {
                t.push((i, i + 7, 0.3));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_returns_rhs() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, 2.0, 3.0, 4.0];
        for method in [Method::Cg, Method::Bicgstab, Method::Gmres] {
            let cfg = SolverConfig {
                method,
                ..Default::default()
            };
            let (x, _) = solve(&a, &b, &cfg).unwrap();
            for i in 0..4 {
                assert!((x[i] - b[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two() {
        for method in [Method::Cg, Method::Bicgstab, Method::Gmres] {
            for preconditioner in [PreconditionerKind::None, PreconditionerKind::Diagonal, PreconditionerKind::Ilu0] {
                let cfg = SolverConfig {
                    method,
                    preconditioner,
                    ..Default::default()
                };
                let (x, st) = solve(&small(), &[3.0, 5.0], &cfg).unwrap();
                assert!((x[0] - 0.8).abs() < 1e-10 && (x[1] - 1.4).abs() < 1e-10, "{method:?}");
                assert!(st.residual <= 1e-10);
            }
        }
    }

    #[test]
    fn nonsymmetric_system() {
        let a = nonsym(200);
        let xs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul(&xs);
        for method in [Method::Bicgstab, Method::Gmres] {
            for preconditioner in [PreconditionerKind::None, PreconditionerKind::Diagonal, PreconditionerKind::Ilu0] {
                let cfg = SolverConfig {
                    method,
                    preconditioner,
                    restart: 20,
                    ..Default::default()
                };
                let (x, st) = solve(&a, &b, &cfg).unwrap();
                assert!(st.residual <= 1e-10);
                let err = x.iter().zip(&xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-8, "{method:?} {preconditioner:?}: {err}");
            }
        }
        assert!(matches!(solve(&a, &b, &SolverConfig::cg()), Err(SolveError::NotSymmetric)));
    }

    #[test]
    fn non_convergence_is_reported() {
        let a = nonsym(200);
        let b = vec![1.0; 200];
        let cfg = SolverConfig {
            max_iterations: 2,
            preconditioner: PreconditionerKind::None,
            ..Default::default()
        };
        match solve(&a, &b, &cfg) {
            Err(SolveError::NotConverged { history, .. }) => assert!(!history.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
