//! Numerical checks of the operator inequalities behind the multilevel
//! convergence theory, on small dense instances.
//!
//! Every "≤" between symmetric operators is tested as a statement about the
//! smallest eigenvalue of the difference, scaled by the size of the larger
//! operator. A report's `worst_violation` is that scaled eigenvalue (its
//! minimum over trials); negative values beyond roundoff would falsify the
//! inequality.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::{spd_power, symmetric_eigenvalues, symmetrize};
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness};
use crate::mesh::{MeshHierarchy, MeshLevel};
use crate::multilevel::LevelSmoother;
use crate::parallel::Execution;
use crate::spectral::{decompose_level, generalized_eigen};

/// Reported violations above this (i.e. less negative) count as roundoff.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub trials: usize,
    /// Minimum over trials of the scaled smallest eigenvalue of the
    /// difference operator.
    pub worst_violation: f64,
    /// Maximum over trials of the scaled largest eigenvalue; positive when
    /// the inequality is strict somewhere.
    pub largest_gap: f64,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.worst_violation >= -VIOLATION_TOLERANCE
    }

    fn fold(name: String, outcomes: &[(f64, f64)]) -> Self {
        Self {
            name,
            trials: outcomes.len(),
            worst_violation: outcomes.iter().map(|o| o.0).fold(f64::INFINITY, f64::min),
            largest_gap: outcomes.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn check_unit_exponent(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange { s, lo: 0.0, hi: 1.0 })
    }
}

/// `Q D Qᵀ` with `Q` orthogonal (QR of a Gaussian matrix) and the entries
/// of `D` log-uniform in `[1e-2, 1e2]`. With `rank < n` the trailing
/// entries of `D` are zero, giving a PSD matrix.
pub fn random_spd(n: usize, rank: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    let d = DVector::from_fn(n, |i, _| {
        if i < rank {
            10f64.powf(rng.random_range(-2.0..=2.0))
        } else {
            0.0
        }
    });
    symmetrize(&(&q * DMatrix::from_diagonal(&d) * q.transpose()))
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Löwner–Heinz: `A ≤ B ⇒ A^s ≤ B^s` for `s ∈ [0, 1]`. Each trial draws a
/// random SPD `A` and a random PSD perturbation `P`, sets `B = A + P`, and
/// measures `min eig(B^s − A^s) / ‖B^s‖`.
pub fn check_loewner_heinz(
    dim: usize,
    trials: usize,
    s: f64,
    seed: u64,
    execution: Execution,
) -> Result<InequalityReport> {
    check_unit_exponent(s)?;
    if dim == 0 || dim > 50 {
        return Err(Error::InvalidConfig(format!("dimension {dim} outside 1..=50")));
    }
    let outcomes = execution.map_range(trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let a = random_spd(dim, dim, &mut rng);
        let rank = rng.random_range(1..=dim);
        let b = &a + random_spd(dim, rank, &mut rng);
        let (a_s, b_s) = (spd_power(&a, s), spd_power(&b, s));
        let scale = symmetric_eigenvalues(b_s.clone())[dim - 1];
        let ev = symmetric_eigenvalues(symmetrize(&(b_s - a_s)));
        (ev[0] / scale, ev[dim - 1] / scale)
    });
    Ok(InequalityReport::fold(
        format!("loewner-heinz dim={dim} s={s}"),
        &outcomes,
    ))
}

/// For each adjacent level pair, compares the coarse fractional form with the
/// fine one restricted to coarse functions: `⟨A_h^s u, u⟩ ≤ ⟨A_H^s u, u⟩`.
/// The difference `A_H^s − Iᵀ A_h^s I` is measured against the coarse mass
/// matrix and scaled by the largest eigenvalue of `(A_H^s, M_H)`.
pub fn check_subspace_inequality(
    hierarchy: &MeshHierarchy,
    s: f64,
    execution: Execution,
) -> Result<InequalityReport> {
    check_unit_exponent(s)?;
    let pairs = hierarchy.n_levels().saturating_sub(1);
    let outcomes = execution
        .map_range(pairs, |k| -> Result<(f64, f64)> {
            let coarse = decompose_level(&hierarchy.levels()[k])?;
            let fine = decompose_level(&hierarchy.levels()[k + 1])?;
            let p = hierarchy.prolongation(k)?.to_dense();
            let conjugated = p.transpose() * fine.power_matrix(s) * &p;
            let diff = symmetrize(&(coarse.power_matrix(s) - conjugated));
            let gen = generalized_eigen(&diff, coarse.mass())?;
            let scale = coarse.max_eigenvalue().powf(s);
            Ok((gen.min_eigenvalue() / scale, gen.max_eigenvalue() / scale))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::fold(
        format!(
            "subspace N={}..{} s={s}",
            hierarchy.coarsest().n_elements(),
            hierarchy.finest().n_elements()
        ),
        &outcomes,
    ))
}

/// Best constants in `C₁ ‖v‖² / λ ≤ ⟨R v, v⟩ ≤ C₂ ⟨A^{-s} v, v⟩` for the
/// diagonal smoother on one level, where `λ` is the largest eigenvalue of
/// `A^s` and `v` ranges over dual vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmootherBounds {
    pub n_elements: usize,
    pub s: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SmootherBounds {
    pub fn is_valid(&self) -> bool {
        self.c1 > 0.0 && self.c2.is_finite()
    }
}

/// Substituting `v = M w` turns the lower bound into the pencil
/// `(M R M, M)`; `v = A^s w` turns the upper one into `(A^s R A^s, A^s)`.
pub fn check_smoother_bounds(level: &MeshLevel, s: f64) -> Result<SmootherBounds> {
    check_unit_exponent(s)?;
    let (m, a) = (assemble_mass(level), assemble_stiffness(level));
    let smoother = LevelSmoother::new(0, &m, &a, s)?;
    let r = DMatrix::from_diagonal(&DVector::from_column_slice(smoother.diag()));
    let decomposition = decompose_level(level)?;
    let a_s = decomposition.power_matrix(s);
    let md = decomposition.mass();
    let lambda = decomposition.max_eigenvalue().powf(s);
    let lower = generalized_eigen(&(md * &r * md), md)?;
    let upper = generalized_eigen(&(&a_s * &r * &a_s), &a_s)?;
    Ok(SmootherBounds {
        n_elements: level.n_elements(),
        s,
        c1: lambda * lower.min_eigenvalue(),
        c2: upper.max_eigenvalue(),
    })
}
