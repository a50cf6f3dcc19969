use super::dofs::EdgeDofs;
use super::params::torque_matrix;
use crate::linalg::{
    build_preconditioner, solve_preconditioned, Jacobi, Preconditioner, PreconditionerKind, SolveError,
    SolverConfig, SparseMatrix,
};
use crate::mesh::Mesh;
use crate::mimetic::MimeticOperators;
use crate::vec3::{self, Vec3};

/// Flux continuity on the free edges for given cell values:
/// `T^{ff} m̃ = T^{fE} m - T^{fD} g`, one symmetric positive definite solve per component.
#[derive(Debug, Clone)]
pub struct EdgeSystem {
    pub matrix: SparseMatrix,
    jacobi: Jacobi,
}

impl EdgeSystem {
    pub fn new(mesh: &Mesh, ops: &MimeticOperators, dofs: &EdgeDofs) -> Self {
        let mut trip = Vec::new();
        for (c, l) in ops.locals.iter().enumerate() {
            let faces = &mesh.cells[c].faces;
            for (i, &fi) in faces.iter().enumerate() {
                let Some(di) = dofs.face_dof[fi] else { continue };
                for (j, &fj) in faces.iter().enumerate() {
                    if let Some(dj) = dofs.face_dof[fj] {
                        trip.push((di, dj, l.cwc[(i, j)]));
                    }
                }
            }
        }
        let matrix = SparseMatrix::from_triplets(dofs.num, dofs.num, &trip);
        let jacobi = Jacobi::new(&matrix);
        EdgeSystem { matrix, jacobi }
    }

    /// Solves for all face values, overwriting `faces` (used as the initial guess).
    /// `dirichlet` holds the prescribed value of each Dirichlet face.
    pub fn solve(
        &self,
        mesh: &Mesh,
        ops: &MimeticOperators,
        dofs: &EdgeDofs,
        m: &[Vec3],
        dirichlet: &[Option<Vec3>],
        faces: &mut [Vec3],
        cfg: &SolverConfig,
    ) -> Result<(usize, f64), SolveError> {
        let n = dofs.num;
        let mut rhs = vec![[0.0; 3]; n];
        for (c, l) in ops.locals.iter().enumerate() {
            let cf = &mesh.cells[c].faces;
            for (i, &fi) in cf.iter().enumerate() {
                if let Some(di) = dofs.face_dof[fi] {
                    rhs[di] = vec3::axpy(rhs[di], l.cwc_e[i], m[c]);
                }
            }
            if !dofs.has_dirichlet {
                continue;
            }
            for (j, &fj) in cf.iter().enumerate() {
                let Some(g) = dirichlet[fj] else { continue };
                for (i, &fi) in cf.iter().enumerate() {
                    if let Some(di) = dofs.face_dof[fi] {
                        rhs[di] = vec3::axpy(rhs[di], -l.cwc[(i, j)], g);
                    }
                }
            }
        }
        let mut guess = vec![[0.0; 3]; n];
        for (f, d) in dofs.face_dof.iter().enumerate() {
            if let Some(d) = d {
                guess[*d] = faces[f];
            }
        }
        let cfg = SolverConfig { method: crate::linalg::Method::Cg, ..*cfg };
        let (mut iters, mut res) = (0, 0.0_f64);
        let mut x = vec![[0.0; 3]; n];
        for u in 0..3 {
            let b: Vec<f64> = rhs.iter().map(|v| v[u]).collect();
            let mut xu: Vec<f64> = guess.iter().map(|v| v[u]).collect();
            let st = solve_preconditioned(&self.matrix, &self.jacobi, &b, &mut xu, &cfg)?;
            iters += st.iterations;
            res = res.max(st.residual);
            for (d, v) in xu.into_iter().enumerate() {
                x[d][u] = v;
            }
        }
        for f in 0..faces.len() {
            faces[f] = match (dofs.face_dof[f], dirichlet[f]) {
                (Some(d), _) => x[d],
                (None, Some(g)) => g,
                (None, None) => unreachable!("face without unknown or data"),
            };
        }
        Ok((iters, res))
    }
}

/// Block system of the linearly implicit step. The sparsity pattern and the
/// edge rows are fixed; only the cell rows are refilled each step.
#[derive(Debug, Clone)]
pub struct ImplicitSystem {
    pub matrix: SparseMatrix,
    /// CSR positions of the 3x3 cell-cell block of each cell.
    diag_pos: Vec<[[usize; 3]; 3]>,
    /// CSR positions of the cell-edge blocks, per cell and local face.
    edge_pos: Vec<Vec<Option<[[usize; 3]; 3]>>>,
    /// CSR position of every diagonal entry.
    diag_all: Vec<usize>,
    num_cells: usize,
}

impl ImplicitSystem {
    pub fn new(mesh: &Mesh, ops: &MimeticOperators, dofs: &EdgeDofs) -> Self {
        let nc = mesh.num_cells();
        let er = |d: usize| 3 * (nc + d);
        let mut trip = Vec::new();
        for (c, l) in ops.locals.iter().enumerate() {
            let faces = &mesh.cells[c].faces;
            for a in 0..3 {
                for b in 0..3 {
                    trip.push((3 * c + a, 3 * c + b, 0.0));
                }
            }
            for (i, &fi) in faces.iter().enumerate() {
                let Some(di) = dofs.face_dof[fi] else { continue };
                for a in 0..3 {
                    for b in 0..3 {
                        trip.push((3 * c + a, er(di) + b, 0.0));
                    }
                    trip.push((er(di) + a, 3 * c + a, -l.cwc_e[i]));
                    for (j, &fj) in faces.iter().enumerate() {
                        if let Some(dj) = dofs.face_dof[fj] {
                            trip.push((er(di) + a, er(dj) + a, l.cwc[(i, j)]));
                        }
                    }
                }
            }
        }
        let n = 3 * (nc + dofs.num);
        let matrix = SparseMatrix::from_triplets(n, n, &trip);
        let pos = |r: usize, c: usize| matrix.position(r, c).expect("entry in pattern");
        let block = |r0: usize, c0: usize| {
            let mut p = [[0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    p[a][b] = pos(r0 + a, c0 + b);
                }
            }
            p
        };
        let diag_pos = (0..nc).map(|c| block(3 * c, 3 * c)).collect();
        let edge_pos = (0..nc)
            .map(|c| {
                mesh.cells[c]
                    .faces
                    .iter()
                    .map(|&f| dofs.face_dof[f].map(|d| block(3 * c, er(d))))
                    .collect()
            })
            .collect();
        let diag_all = (0..n).map(|i| pos(i, i)).collect();
        ImplicitSystem {
            matrix,
            diag_pos,
            edge_pos,
            diag_all,
            num_cells: nc,
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows
    }

    /// Refills the cell rows for the old magnetization `m` and returns the
    /// right-hand side. `rhs_cells` holds `m^j + k f^j` per cell.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        &mut self,
        mesh: &Mesh,
        ops: &MimeticOperators,
        m: &[Vec3],
        rhs_cells: &[Vec3],
        dirichlet: &[Option<Vec3>],
        k_eta: f64,
        alpha: f64,
        precession: bool,
    ) -> Vec<f64> {
        let nc = self.num_cells;
        let mut b = vec![0.0; self.size()];
        let vals = &mut self.matrix.values;
        for (c, l) in ops.locals.iter().enumerate() {
            let a_hat = torque_matrix(m[c], alpha, precession);
            let s = k_eta / l.area;
            for a in 0..3 {
                for bb in 0..3 {
                    let id = if a == bb { 1.0 } else { 0.0 };
                    vals[self.diag_pos[c][a][bb]] = id + s * l.cwc_ee * a_hat[a][bb];
                }
            }
            for p in self.edge_pos[c].iter().flatten() {
                for row in p {
                    for &q in row {
                        vals[q] = 0.0;
                    }
                }
            }
            let mut rc = rhs_cells[c];
            for (i, &f) in mesh.cells[c].faces.iter().enumerate() {
                let w = s * l.cwc_e[i];
                match (self.edge_pos[c][i], dirichlet[f]) {
                    (Some(p), _) => {
                        for a in 0..3 {
                            for bb in 0..3 {
                                vals[p[a][bb]] -= w * a_hat[a][bb];
                            }
                        }
                    }
                    (None, Some(g)) => {
                        for a in 0..3 {
                            rc[a] += w * (0..3).map(|bb| a_hat[a][bb] * g[bb]).sum::<f64>();
                        }
                    }
                    (None, None) => unreachable!("face without unknown or data"),
                }
            }
            b[3 * c..3 * c + 3].copy_from_slice(&rc);
            // Dirichlet data entering the continuity rows
            let faces = &mesh.cells[c].faces;
            for (i, _) in faces.iter().enumerate() {
                let Some(p) = self.edge_pos[c][i] else { continue };
                let row0 = self.matrix.col_idx[p[0][0]];
                debug_assert!(row0 >= 3 * nc);
                for (j, &fj) in faces.iter().enumerate() {
                    if let Some(g) = dirichlet[fj] {
                        for a in 0..3 {
                            b[row0 + a] -= l.cwc[(i, j)] * g[a];
                        }
                    }
                }
            }
        }
        b
    }

    pub fn preconditioner(&self, cfg: &SolverConfig) -> Box<dyn Preconditioner> {
        match cfg.preconditioner {
            PreconditionerKind::Diagonal => {
                let d: Vec<f64> = self.diag_all.iter().map(|&p| self.matrix.values[p]).collect();
                Box::new(Jacobi::from_diagonal(&d))
            }
            kind => build_preconditioner(kind, &self.matrix),
        }
    }
}
