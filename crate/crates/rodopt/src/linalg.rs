//! Sparse symmetric assembly and linear solvers: Jacobi-preconditioned
//! conjugate gradient, and the Schur-complement solve for the constrained
//! time step.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Default relative CG tolerance.
pub const CG_TOL: f64 = 1e-10;

/// Compressed sparse row matrix, assembled from (row, col, value) triplets
/// with duplicates summed.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from triplets; duplicate (row, col) pairs are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> SparseMatrix {
        let mut row_counts = vec![0usize; dim + 1];
        for &(r, _, _) in triplets {
            row_counts[r + 1] += 1;
        }
        for i in 0..dim {
            row_counts[i + 1] += row_counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut cursor = row_counts.clone();
        for &(r, c, v) in triplets {
            let k = cursor[r];
            cols[k] = c;
            vals[k] = v;
            cursor[r] += 1;
        }
        // sort each row by column and merge duplicates
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for r in 0..dim {
            let (lo, hi) = (row_counts[r], row_counts[r + 1]);
            let mut entries: Vec<(usize, f64)> =
                (lo..hi).map(|k| (cols[k], vals[k])).collect();
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                if let Some(last) = col_idx.last() {
                    if *last == c && col_idx.len() > row_ptr[r] {
                        *values.last_mut().unwrap() += v;
                        continue;
                    }
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr[r + 1] = col_idx.len();
        }
        SparseMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        for k in self.row_ptr[row]..self.row_ptr[row + 1] {
            if self.col_idx[k] == col {
                return self.values[k];
            }
        }
        0.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// A + s*B, matching or merged sparsity.
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((r, self.col_idx[k], self.values[k]));
            }
            for k in other.row_ptr[r]..other.row_ptr[r + 1] {
                triplets.push((r, other.col_idx[k], s * other.values[k]));
            }
        }
        SparseMatrix::from_triplets(self.dim, &triplets)
    }

    /// Zero the rows and columns of `nodes`, placing 1 on their diagonal.
    /// The eliminated unknowns take the value 0, so no right-hand-side
    /// correction is required.
    pub fn eliminate_dirichlet(&mut self, nodes: &[usize]) {
        let mut constrained = vec![false; self.dim];
        for &i in nodes {
            constrained[i] = true;
        }
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                if constrained[r] || constrained[c] {
                    self.values[k] = if r == c { 1.0 } else { 0.0 };
                }
            }
        }
    }

    /// Largest symmetry defect |a_ij - a_ji| over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                defect = defect.max((self.values[k] - self.get(c, r)).abs());
            }
        }
        defect
    }
}

/// Abstract SPD operator for the CG solver.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// Diagonal for Jacobi preconditioning.
    fn diagonal(&self) -> Vec<f64>;
}

impl Operator for SparseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
    fn diagonal(&self) -> Vec<f64> {
        self.diagonal()
    }
}

/// Sparse matrix plus a symmetric rank-one term `scale * b b^T`.
/// Used to pin the constant mode of pure-Neumann systems.
pub struct RankOneAugmented<'a> {
    pub matrix: &'a SparseMatrix,
    pub vector: &'a [f64],
    pub scale: f64,
}

impl Operator for RankOneAugmented<'_> {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.matrix.mul_vec(x);
        let bx: f64 = dot(self.vector, x);
        for (yi, &bi) in y.iter_mut().zip(self.vector) {
            *yi += self.scale * bx * bi;
        }
        y
    }
    fn diagonal(&self) -> Vec<f64> {
        let mut d = self.matrix.diagonal();
        for (di, &bi) in d.iter_mut().zip(self.vector) {
            *di += self.scale * bi * bi;
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradient on an abstract operator.
/// Returns x with ||Ax - b|| <= tol * ||b||.
pub fn cg_solve_op<A: Operator>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for iter in 0..max_iter {
        let res = norm(&r);
        if res <= tol * b_norm {
            return Ok(x);
        }
        let ap = a.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SolverNonConvergence {
                context: "cg: operator not positive definite on Krylov space".into(),
                residual: res / b_norm,
                iterations: iter,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm(&r) / b_norm;
    if res <= tol {
        Ok(x)
    } else {
        Err(Error::SolverNonConvergence {
            context: "cg: max iterations reached".into(),
            residual: res,
            iterations: max_iter,
        })
    }
}

/// Conjugate gradient on a sparse SPD matrix.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    cg_solve_op(a, b, tol, max_iter)
}

/// P1 mass matrix M_ij = int phi_j phi_i.
pub fn assemble_mass(mesh: &Mesh) -> SparseMatrix {
    let n = mesh.num_nodes();
    let mut triplets = Vec::with_capacity(9 * mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e).expect("valid element");
        let tri = mesh.elements[e];
        let scale = geo.area / 12.0;
        for i in 0..3 {
            for j in 0..3 {
                let v = scale * if i == j { 2.0 } else { 1.0 };
                triplets.push((tri[i], tri[j], v));
            }
        }
    }
    SparseMatrix::from_triplets(n, &triplets)
}

/// P1 stiffness matrix K_ij = int coeff grad(phi_j) . grad(phi_i), with a
/// per-element coefficient.
pub fn assemble_stiffness(mesh: &Mesh, coeff: &[f64]) -> Result<SparseMatrix> {
    if coeff.len() != mesh.num_elements() {
        return Err(Error::Usage(format!(
            "coefficient field length {} does not match element count {}",
            coeff.len(),
            mesh.num_elements()
        )));
    }
    let n = mesh.num_nodes();
    let mut triplets = Vec::with_capacity(9 * mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let c = coeff[e];
        if !(c > 0.0) {
            return Err(Error::Domain(format!(
                "non-positive stiffness coefficient {c} on element {e}"
            )));
        }
        let geo = mesh.element_geometry(e).expect("valid element");
        let tri = mesh.elements[e];
        for i in 0..3 {
            for j in 0..3 {
                let gi = geo.grad_shape[i];
                let gj = geo.grad_shape[j];
                let v = c * geo.area * (gi[0] * gj[0] + gi[1] * gj[1]);
                triplets.push((tri[i], tri[j], v));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, &triplets))
}

/// Unit-coefficient stiffness matrix.
pub fn assemble_stiffness_unit(mesh: &Mesh) -> SparseMatrix {
    assemble_stiffness(mesh, &vec![1.0; mesh.num_elements()]).expect("positive unit coefficient")
}

/// Lumped mass vector L_ii = int phi_i (each element sends area/3 to its
/// three nodes).
pub fn assemble_lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut lumped = vec![0.0; mesh.num_nodes()];
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e).expect("valid element");
        for &node in &mesh.elements[e] {
            lumped[node] += geo.area / 3.0;
        }
    }
    lumped
}

/// The per-step constrained system: S_hat phi + lambda B = rhs, B^T phi = m.
/// Dirichlet rows of `s_hat` must already be eliminated and the
/// corresponding entries of `b` and `rhs` zeroed.
pub struct SaddleSystem<'a> {
    pub s_hat: &'a SparseMatrix,
    pub b: &'a [f64],
    pub rhs: &'a [f64],
    pub constraint_value: f64,
}

/// Schur-complement solve with two inner CG solves; B is rank-1 so the
/// multiplier is a scalar.
pub fn solve_saddle(sys: &SaddleSystem, tol: f64) -> Result<(Vec<f64>, f64)> {
    let n = sys.s_hat.dim();
    let max_iter = 10 * n.max(100);
    let x_rhs = cg_solve(sys.s_hat, sys.rhs, tol, max_iter)?;
    let x_b = cg_solve(sys.s_hat, sys.b, tol, max_iter)?;
    let btxb = dot(sys.b, &x_b);
    if btxb <= 0.0 {
        return Err(Error::Numerical(
            "saddle solve: constraint gradient annihilated by S^-1".into(),
        ));
    }
    let multiplier = (dot(sys.b, &x_rhs) - sys.constraint_value) / btxb;
    let phi: Vec<f64> = x_rhs
        .iter()
        .zip(&x_b)
        .map(|(xr, xb)| xr - multiplier * xb)
        .collect();
    Ok((phi, multiplier))
}
