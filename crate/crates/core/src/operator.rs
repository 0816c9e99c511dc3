//! Matrix-free linear operators.
//!
//! Orientation matters: system matrices (stiffness, mass, fractional powers)
//! take primal vectors and return dual ones, preconditioners go the other
//! way. The trait does not encode this; callers keep track.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::fem::SymmetricSparseMatrix;
use crate::parallel::Execution;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Applies the operator. Panics if `x.len() != self.dim()`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn try_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.apply(x))
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

impl LinearOperator for SymmetricSparseMatrix {
    fn dim(&self) -> usize {
        SymmetricSparseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x).expect("operator dimension")
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator must be square");
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.ncols(), x.len(), "operator dimension");
        (self * DVector::from_column_slice(x)).data.into()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.0, x.len(), "operator dimension");
        x.to_vec()
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, x.len(), "operator dimension");
        (self.f)(x)
    }
}

/// Assembles the dense matrix of `op` column by column.
pub fn to_dense<O: LinearOperator + ?Sized>(op: &O, execution: Execution) -> DMatrix<f64> {
    let n = op.dim();
    let columns = execution.map_range(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        op.apply(&e)
    });
    DMatrix::from_fn(n, n, |i, j| columns[j][i])
}
