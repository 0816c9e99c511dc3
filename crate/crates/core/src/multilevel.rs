//! Additive multilevel preconditioners for `A^s`.
//!
//! For `s ∈ [0, 1]`:
//!
//! ```text
//! B^s = Q_1ᵀ (A_1^s)⁻¹ Q_1 + Σ_{k=2}^{J} Q_kᵀ R_k^s Q_k
//! (R_k^s)_ii = 1 / (M_ii^{1-s} A_ii^s)
//! ```
//!
//! where `Q_k` restricts fine dual vectors to level `k`. Each level's `A_k`
//! and `M_k` are assembled on that level's own mesh; the coarse fractional
//! operators are not Galerkin projections of the fine one.
//!
//! For `s ∈ [-1, 0]` the sandwich `B̃^s = B^{(1+s)/2} A B^{(1+s)/2}` reuses
//! the positive-exponent operator around one stiffness multiply.
//!
//! Both operators take dual vectors and return primal vectors.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, SymmetricSparseMatrix};
use crate::mesh::MeshHierarchy;
use crate::operator::LinearOperator;
use crate::spectral::{decompose_level, FractionalOperator, SpectralDecomposition};

/// Diagonal one-dof subspace smoother on level `k ≥ 1` (0-based, coarsest
/// is 0).
#[derive(Clone, Debug)]
pub struct LevelSmoother {
    level_index: usize,
    diag: Vec<f64>,
}

impl LevelSmoother {
    pub fn new(
        level_index: usize,
        mass: &SymmetricSparseMatrix,
        stiffness: &SymmetricSparseMatrix,
        s: f64,
    ) -> Result<Self> {
        check_dim(mass.dim(), stiffness.dim())?;
        let diag = mass
            .diagonal()
            .iter()
            .zip(stiffness.diagonal())
            .map(|(&m, &a)| 1.0 / (m.powf(1.0 - s) * a.powf(s)))
            .collect();
        Ok(Self { level_index, diag })
    }

    pub fn level_index(&self) -> usize {
        self.level_index
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

fn check_exponent(s: f64, lo: f64, hi: f64) -> Result<()> {
    if (lo..=hi).contains(&s) {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange { s, lo, hi })
    }
}

/// `B_h^s` for `s ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct MultilevelPreconditioner {
    s: f64,
    hierarchy: MeshHierarchy,
    smoothers: Vec<LevelSmoother>,
    coarse: FractionalOperator,
}

impl MultilevelPreconditioner {
    pub fn build(hierarchy: &MeshHierarchy, s: f64) -> Result<Self> {
        check_exponent(s, 0.0, 1.0)?;
        let coarse = Arc::new(decompose_level(hierarchy.coarsest())?);
        Self::with_coarse_decomposition(hierarchy, s, coarse)
    }

    /// Like [`build`](Self::build) but reuses an existing decomposition of
    /// the coarsest level's pencil.
    pub fn with_coarse_decomposition(
        hierarchy: &MeshHierarchy,
        s: f64,
        coarse: Arc<SpectralDecomposition>,
    ) -> Result<Self> {
        check_exponent(s, 0.0, 1.0)?;
        check_dim(hierarchy.coarsest().n_interior_dofs(), coarse.dim())?;
        let smoothers = hierarchy
            .levels()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, level)| {
                LevelSmoother::new(k, &assemble_mass(level), &assemble_stiffness(level), s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            s,
            hierarchy: hierarchy.clone(),
            smoothers,
            coarse: FractionalOperator::new(coarse, s)?,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn hierarchy(&self) -> &MeshHierarchy {
        &self.hierarchy
    }

    /// Smoothers for levels `1..J` (0-based).
    pub fn smoothers(&self) -> &[LevelSmoother] {
        &self.smoothers
    }

    pub fn coarse_operator(&self) -> &FractionalOperator {
        &self.coarse
    }

    pub fn dim(&self) -> usize {
        self.hierarchy.finest().n_interior_dofs()
    }

    /// Applies `B^s` to a fine dual vector. The restrictions `Q_k b` are
    /// cascaded down once, the level corrections are summed on the way up.
    pub fn apply_b(&self, dual: &[f64]) -> Result<Vec<f64>> {
        let restricted = self.hierarchy.restrict_dual_all(dual)?;
        let mut x = self.coarse.fractional_solve(&restricted[0])?;
        for (k, smoother) in self.smoothers.iter().enumerate() {
            let level = k + 1;
            let mut fine = self.hierarchy.prolongate(level - 1, &x)?;
            for ((xi, ri), bi) in fine.iter_mut().zip(&smoother.diag).zip(&restricted[level]) {
                *xi += ri * bi;
            }
            x = fine;
        }
        Ok(x)
    }
}

impl LinearOperator for MultilevelPreconditioner {
    fn dim(&self) -> usize {
        MultilevelPreconditioner::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_b(x).expect("operator dimension")
    }
}

/// `B̃_h^s = B^{(1+s)/2} A_h B^{(1+s)/2}` for `s ∈ [-1, 0]`.
#[derive(Clone, Debug)]
pub struct TildePreconditioner {
    s: f64,
    inner: MultilevelPreconditioner,
    stiffness: SymmetricSparseMatrix,
}

/// Exponent of the inner multilevel operator, `(1 + s) / 2`.
pub fn inner_exponent(s: f64) -> f64 {
    0.5 * (1.0 + s)
}

impl TildePreconditioner {
    pub fn build(hierarchy: &MeshHierarchy, s: f64) -> Result<Self> {
        check_exponent(s, -1.0, 0.0)?;
        let inner = MultilevelPreconditioner::build(hierarchy, inner_exponent(s))?;
        Ok(Self::from_inner(s, inner))
    }

    pub fn with_coarse_decomposition(
        hierarchy: &MeshHierarchy,
        s: f64,
        coarse: Arc<SpectralDecomposition>,
    ) -> Result<Self> {
        check_exponent(s, -1.0, 0.0)?;
        let inner =
            MultilevelPreconditioner::with_coarse_decomposition(hierarchy, inner_exponent(s), coarse)?;
        Ok(Self::from_inner(s, inner))
    }

    fn from_inner(s: f64, inner: MultilevelPreconditioner) -> Self {
        let stiffness = assemble_stiffness(inner.hierarchy().finest());
        Self {
            s,
            inner,
            stiffness,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn inner(&self) -> &MultilevelPreconditioner {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Dual in, primal out: `B` (primal) → `A` (dual) → `B` (primal).
    pub fn apply_tilde_b(&self, dual: &[f64]) -> Result<Vec<f64>> {
        let first = self.inner.apply_b(dual)?;
        let middle = self.stiffness.matvec(&first)?;
        self.inner.apply_b(&middle)
    }
}

impl LinearOperator for TildePreconditioner {
    fn dim(&self) -> usize {
        TildePreconditioner::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_tilde_b(x).expect("operator dimension")
    }
}
