//! P1 stiffness and mass matrices on a uniform interval mesh with
//! homogeneous Dirichlet conditions.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::mesh::MeshLevel;

/// Symmetric tridiagonal matrix. Symmetry holds by storage: only the
/// diagonal and the first superdiagonal are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSparseMatrix {
    diag: Vec<f64>,
    off: Vec<f64>,
    is_spd: bool,
}

impl SymmetricSparseMatrix {
    /// `off[i]` is the `(i, i + 1)` entry. Positive definiteness is decided
    /// here by an LDLᵀ sweep.
    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidConfig("empty matrix".into()));
        }
        check_dim(diag.len() - 1, off.len())?;
        let is_spd = ldl_pivots(&diag, &off).iter().all(|&d| d > 0.0);
        Ok(Self { diag, off, is_spd })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    pub fn is_spd(&self) -> bool {
        self.is_spd
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let n = self.dim();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, xi)| d * xi).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }
}

fn ldl_pivots(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let mut pivots = Vec::with_capacity(diag.len());
    let mut prev = diag[0];
    pivots.push(prev);
    for (d, e) in diag[1..].iter().zip(off) {
        prev = d - e * e / prev;
        pivots.push(prev);
    }
    pivots
}

/// `⟨u', v'⟩` on hat functions: `tridiag(-1/h, 2/h, -1/h)`.
pub fn assemble_stiffness(level: &MeshLevel) -> SymmetricSparseMatrix {
    let n = level.n_interior_dofs();
    let h = level.h();
    SymmetricSparseMatrix::tridiagonal(vec![2.0 / h; n], vec![-1.0 / h; n - 1])
        .expect("stiffness has consistent shape")
}

/// `⟨u, v⟩` on hat functions: `tridiag(h/6, 2h/3, h/6)`.
pub fn assemble_mass(level: &MeshLevel) -> SymmetricSparseMatrix {
    let n = level.n_interior_dofs();
    let h = level.h();
    SymmetricSparseMatrix::tridiagonal(vec![2.0 * h / 3.0; n], vec![h / 6.0; n - 1])
        .expect("mass has consistent shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Integrates products of hat functions (or their derivatives) element
    /// by element with Simpson's rule, exact for the quadratics involved.
    fn element_oracle(n_elements: usize, derivative: bool) -> DMatrix<f64> {
        let h = 1.0 / n_elements as f64;
        let hat = |i: usize, x: f64| -> f64 {
            let c = (i + 1) as f64 * h;
            if derivative {
                if x > c - h && x < c {
                    1.0 / h
                } else if x > c && x < c + h {
                    -1.0 / h
                } else {
                    0.0
                }
            } else {
                (1.0 - (x - c).abs() / h).max(0.0)
            }
        };
        let n = n_elements - 1;
        DMatrix::from_fn(n, n, |i, j| {
            (0..n_elements)
                .map(|e| {
                    let (a, b) = (e as f64 * h, (e + 1) as f64 * h);
                    // nudge inside the element so derivative jumps are avoided
                    let (a, b) = (a + 1e-14, b - 1e-14);
                    let m = 0.5 * (a + b);
                    let f = |x| hat(i, x) * hat(j, x);
                    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
                })
                .sum()
        })
    }

    #[test]
    fn stiffness_quarter_mesh() {
        let a = assemble_stiffness(&MeshLevel::new(4).unwrap());
        let expected = DMatrix::from_row_slice(3, 3, &[8.0, -4.0, 0.0, -4.0, 8.0, -4.0, 0.0, -4.0, 8.0]);
        assert_relative_eq!(a.to_dense(), expected, epsilon = 1e-12);
        assert_relative_eq!(a.to_dense(), element_oracle(4, true), epsilon = 1e-9);
        assert!(a.is_spd());
    }

    #[test]
    fn stiffness_single_dof() {
        let a = assemble_stiffness(&MeshLevel::new(2).unwrap());
        assert_eq!(a.dim(), 1);
        assert_relative_eq!(a.get(0, 0), 4.0);
    }

    #[test]
    fn mass_quarter_mesh() {
        let m = assemble_mass(&MeshLevel::new(4).unwrap());
        assert_relative_eq!(m.get(0, 0), 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(m.get(0, 1), 1.0 / 24.0, epsilon = 1e-15);
        assert_relative_eq!(m.to_dense(), element_oracle(4, false), epsilon = 1e-12);
        assert!(m.is_spd());
    }

    #[test]
    fn interior_mass_rows_sum_to_h() {
        let level = MeshLevel::new(16).unwrap();
        let m = assemble_mass(&level);
        let sums = m.matvec(&vec![1.0; m.dim()]).unwrap();
        for s in &sums[1..m.dim() - 1] {
            assert_relative_eq!(*s, level.h(), epsilon = 1e-15);
        }
    }

    #[test]
    fn matrices_are_symmetric() {
        let level = MeshLevel::new(9).unwrap();
        for m in [assemble_mass(&level), assemble_stiffness(&level)] {
            let d = m.to_dense();
            assert_eq!(d, d.transpose());
        }
    }

    #[test]
    fn indefinite_matrix_is_flagged() {
        let m = SymmetricSparseMatrix::tridiagonal(vec![1.0, 1.0], vec![2.0]).unwrap();
        assert!(!m.is_spd());
        assert!(SymmetricSparseMatrix::tridiagonal(vec![1.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let a = assemble_stiffness(&MeshLevel::new(7).unwrap());
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let y = a.matvec(&x).unwrap();
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x);
        assert_relative_eq!(nalgebra::DVector::from_vec(y), yd, epsilon = 1e-12);
    }
}
