//! Preconditioned conjugate gradients with a relative preconditioned
//! residual stopping rule, plus two condition-number estimators: the
//! CG-Lanczos tridiagonal (cheap, a by-product of the solve) and a dense
//! assembly oracle.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{symmetric_eigenvalues, symmetrize};
use crate::error::{check_dim, Error, Result};
use crate::operator::{to_dense, LinearOperator};
use crate::parallel::Execution;

pub const DEFAULT_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcgOptions {
    /// Threshold on `⟨B r_k, r_k⟩ / ⟨B r_0, r_0⟩`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// `⟨B r_k, r_k⟩ / ⟨B r_0, r_0⟩` for `k = 0..=iterations`.
    pub relative_preconditioned_residuals: Vec<f64>,
    pub condition_estimate: f64,
    /// CG step lengths, one per iteration.
    pub alphas: Vec<f64>,
    /// CG direction-update coefficients.
    pub betas: Vec<f64>,
    /// Seconds.
    pub wall_time: f64,
}

/// Distribution of the components of a random initial guess.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuessDistribution {
    /// i.i.d. uniform on `[0, 1)`.
    #[default]
    Unit,
    /// i.i.d. uniform on `[-1, 1]`.
    Symmetric,
}

pub fn random_vector(n: usize, seed: u64, distribution: GuessDistribution) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match distribution {
        GuessDistribution::Unit => (0..n).map(|_| rng.random::<f64>()).collect(),
        GuessDistribution::Symmetric => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = rhs` starting from `x0`.
///
/// `a` maps primal to dual, `b` dual to primal. Exceeding `max_iter` is not
/// an error: the partial report comes back with `converged == false`.
pub fn pcg<A, B>(
    a: &A,
    b: &B,
    rhs: &[f64],
    x0: Vec<f64>,
    options: &PcgOptions,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let start = Instant::now();
    let n = a.dim();
    check_dim(n, b.dim())?;
    check_dim(n, rhs.len())?;
    check_dim(n, x0.len())?;

    let mut x = x0;
    let mut r: Vec<f64> = rhs.iter().zip(a.apply(&x)).map(|(f, ax)| f - ax).collect();
    let mut z = b.apply(&r);
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    let mut history = vec![1.0];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());

    if rz0 == 0.0 {
        let report = SolveReport {
            iterations: 0,
            converged: true,
            relative_preconditioned_residuals: history,
            condition_estimate: 1.0,
            alphas,
            betas,
            wall_time: start.elapsed().as_secs_f64(),
        };
        return Ok((x, report));
    }
    if rz0 < 0.0 {
        return Err(Error::Breakdown {
            iteration: 0,
            quantity: "<Br, r>",
            value: rz0,
        });
    }

    let mut p = z.clone();
    let mut converged = false;
    while alphas.len() < options.max_iter {
        let iteration = alphas.len();
        let ap = a.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown {
                iteration,
                quantity: "<Ap, p>",
                value: pap,
            });
        }
        let alpha = rz / pap;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, api) in r.iter_mut().zip(&ap) {
            *ri -= alpha * api;
        }
        alphas.push(alpha);
        z = b.apply(&r);
        let rz_next = dot(&r, &z);
        let relative = rz_next / rz0;
        history.push(relative);
        if relative.abs() <= options.tol {
            converged = true;
            break;
        }
        if rz_next <= 0.0 {
            return Err(Error::Breakdown {
                iteration: iteration + 1,
                quantity: "<Br, r>",
                value: rz_next,
            });
        }
        let beta = rz_next / rz;
        betas.push(beta);
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_next;
    }

    let report = SolveReport {
        iterations: alphas.len(),
        converged,
        relative_preconditioned_residuals: history,
        condition_estimate: lanczos_condition(&alphas, &betas),
        alphas,
        betas,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

/// PCG from a seeded random initial guess.
pub fn pcg_random_start<A, B>(
    a: &A,
    b: &B,
    rhs: &[f64],
    options: &PcgOptions,
    seed: u64,
    distribution: GuessDistribution,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let x0 = random_vector(a.dim(), seed, distribution);
    pcg(a, b, rhs, x0, options)
}

/// The Lanczos tridiagonal `T_k` implied by the first `k` CG coefficients.
/// Only `min(betas.len(), k - 1)` betas are used.
pub fn lanczos_tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for j in 0..k {
        t[(j, j)] = 1.0 / alphas[j];
        if j > 0 {
            t[(j, j)] += betas[j - 1] / alphas[j - 1];
            let e = betas[j - 1].sqrt() / alphas[j - 1];
            t[(j, j - 1)] = e;
            t[(j - 1, j)] = e;
        }
    }
    t
}

/// Ratio of the extreme Ritz values of the CG-Lanczos tridiagonal.
pub fn lanczos_condition(alphas: &[f64], betas: &[f64]) -> f64 {
    if alphas.is_empty() {
        return 1.0;
    }
    let ev = symmetric_eigenvalues(lanczos_tridiagonal(alphas, betas));
    (ev[ev.len() - 1] / ev[0]).max(1.0)
}

/// `λ_max / λ_min` of `B A`, computed densely.
///
/// `B A` is self-adjoint in the `A` inner product, so with `A = L Lᵀ` its
/// spectrum is that of the symmetric `Lᵀ B L`. Intended for dimensions up to
/// about a thousand.
pub fn exact_condition_number<A, B>(a: &A, b: &B, execution: Execution) -> Result<f64>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    check_dim(a.dim(), b.dim())?;
    let ad = symmetrize(&to_dense(a, execution));
    let bd = symmetrize(&to_dense(b, execution));
    let l = ad
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("system operator".into()))?
        .unpack();
    let ev = symmetric_eigenvalues(symmetrize(&(l.transpose() * bd * &l)));
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite("preconditioned operator".into()));
    }
    Ok(hi / lo)
}
