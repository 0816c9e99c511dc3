//! Generalized eigendecomposition of the stiffness/mass pencil and the
//! matrix realization of fractional powers built from it.
//!
//! With `A u_i = λ_i M u_i` and `Uᵀ M U = I`, the fractional stiffness
//! matrix is `A^s = (M U) Λ^s (M U)ᵀ`. It maps primal coefficient vectors to
//! dual vectors; its inverse is `U Λ^{-s} Uᵀ`. The group property holds for
//! `M⁻¹ A^s`, not for `A^s` itself.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dense::{sorted_symmetric_eigen, spectral_norm, symmetrize};
use crate::error::{check_dim, Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, SymmetricSparseMatrix};
use crate::mesh::MeshLevel;
use crate::operator::LinearOperator;

/// Eigenpairs of `A u = λ M u`, eigenvalues ascending and eigenvectors
/// `M`-orthonormal.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    mass_eigenvectors: DMatrix<f64>,
    mass: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `U`, one eigenvector per column.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `M U`.
    pub fn mass_eigenvectors(&self) -> &DMatrix<f64> {
        &self.mass_eigenvectors
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Dense `A^s = (MU) Λ^s (MU)ᵀ`.
    pub fn power_matrix(&self, s: f64) -> DMatrix<f64> {
        let w = scale_columns(&self.mass_eigenvectors, &self.powers(s));
        symmetrize(&(w * self.mass_eigenvectors.transpose()))
    }

    /// Dense `(A^s)⁻¹ = U Λ^{-s} Uᵀ`.
    pub fn inverse_power_matrix(&self, s: f64) -> DMatrix<f64> {
        let w = scale_columns(&self.eigenvectors, &self.powers(-s));
        symmetrize(&(w * self.eigenvectors.transpose()))
    }

    fn powers(&self, s: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| (s * l.ln()).exp()).collect()
    }
}

fn scale_columns(m: &DMatrix<f64>, factors: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * factors[c])
}

/// Solves the symmetric-definite pencil `(a, m)` by Cholesky reduction.
///
/// `a` only needs to be symmetric; `m` must be positive definite. No
/// positivity of the eigenvalues is required here, which lets the inequality
/// checks feed indefinite difference matrices through the same routine.
pub fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    check_dim(n, a.nrows())?;
    check_dim(n, a.ncols())?;
    check_dim(n, m.ncols())?;
    let chol = symmetrize(m)
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("mass matrix".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ, formed as L⁻¹ (L⁻¹ A)ᵀ using the symmetry of A
    let la = l
        .solve_lower_triangular(&symmetrize(a))
        .expect("Cholesky factor is nonsingular");
    let c = l
        .solve_lower_triangular(&la.transpose())
        .expect("Cholesky factor is nonsingular");
    let (eigenvalues, v) = sorted_symmetric_eigen(symmetrize(&c));
    let mut u = l
        .transpose()
        .solve_upper_triangular(&v)
        .expect("Cholesky factor is nonsingular");
    normalize_signs(&mut u);
    let mass = symmetrize(m);
    let mass_eigenvectors = &mass * &u;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: u,
        mass_eigenvectors,
        mass,
    })
}

/// Makes the largest-magnitude entry of each column positive. Entries within
/// a relative 1e-8 of the maximum count as ties, resolved to the lowest row.
fn normalize_signs(u: &mut DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        let peak = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let pivot = col
            .iter()
            .position(|v| v.abs() >= peak * (1.0 - 1e-8))
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Decomposes an assembled stiffness/mass pair. Both must be SPD.
pub fn decompose(
    stiffness: &SymmetricSparseMatrix,
    mass: &SymmetricSparseMatrix,
) -> Result<SpectralDecomposition> {
    check_dim(stiffness.dim(), mass.dim())?;
    let d = generalized_eigen(&stiffness.to_dense(), &mass.to_dense())?;
    if d.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositiveDefinite("stiffness matrix".into()));
    }
    Ok(d)
}

/// Assembles and decomposes the P1 pencil of one mesh level.
pub fn decompose_level(level: &MeshLevel) -> Result<SpectralDecomposition> {
    decompose(&assemble_stiffness(level), &assemble_mass(level))
}

/// `A^s` for one exponent, backed by a shared decomposition.
#[derive(Clone, Debug)]
pub struct FractionalOperator {
    s: f64,
    decomposition: Arc<SpectralDecomposition>,
    powers: Vec<f64>,
    inverse_powers: Vec<f64>,
}

impl FractionalOperator {
    pub fn new(decomposition: Arc<SpectralDecomposition>, s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::ExponentOutOfRange { s, lo: -1.0, hi: 1.0 });
        }
        let powers = decomposition.powers(s);
        let inverse_powers = decomposition.powers(-s);
        Ok(Self {
            s,
            decomposition,
            powers,
            inverse_powers,
        })
    }

    pub fn on_level(level: &MeshLevel, s: f64) -> Result<Self> {
        Self::new(Arc::new(decompose_level(level)?), s)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.decomposition.dim()
    }

    pub fn decomposition(&self) -> &Arc<SpectralDecomposition> {
        &self.decomposition
    }

    /// `A^s x` for a primal `x`; returns a dual vector.
    pub fn fractional_apply(&self, primal: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), primal.len())?;
        let mu = &self.decomposition.mass_eigenvectors;
        Ok(spectral_sandwich(mu, &self.powers, primal))
    }

    /// `(A^s)⁻¹ b` for a dual `b`; returns a primal vector.
    pub fn fractional_solve(&self, dual: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), dual.len())?;
        let u = &self.decomposition.eigenvectors;
        Ok(spectral_sandwich(u, &self.inverse_powers, dual))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.decomposition.power_matrix(self.s)
    }

    /// The exact inverse as an operator (dual in, primal out).
    pub fn inverse(&self) -> FractionalInverse<'_> {
        FractionalInverse(self)
    }
}

/// `W diag(d) Wᵀ x`.
fn spectral_sandwich(w: &DMatrix<f64>, d: &[f64], x: &[f64]) -> Vec<f64> {
    let mut coeffs = w.tr_mul(&DVector::from_column_slice(x));
    for (c, di) in coeffs.iter_mut().zip(d) {
        *c *= di;
    }
    (w * coeffs).data.into()
}

impl LinearOperator for FractionalOperator {
    fn dim(&self) -> usize {
        FractionalOperator::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.fractional_apply(x).expect("operator dimension")
    }
}

pub struct FractionalInverse<'a>(&'a FractionalOperator);

impl LinearOperator for FractionalInverse<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.fractional_solve(x).expect("operator dimension")
    }
}

/// Relative operator-norm defect of `(M⁻¹A^s)(M⁻¹A^t) = M⁻¹A^{s+t}`, with
/// every factor formed densely from `op`'s decomposition and `M⁻¹` applied
/// through a Cholesky solve. The exponent stored in `op` is not used.
pub fn group_property_defect(op: &FractionalOperator, s: f64, t: f64) -> Result<f64> {
    let d = op.decomposition();
    let chol = d
        .mass()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("mass matrix".into()))?;
    let left = chol.solve(&d.power_matrix(s));
    let right = chol.solve(&d.power_matrix(t));
    let combined = chol.solve(&d.power_matrix(s + t));
    Ok(spectral_norm(&(left * right - &combined)) / spectral_norm(&combined))
}
