//! Nested uniform partitions of the unit interval and the prolongation
//! matrices between consecutive levels.
//!
//! Dirichlet nodes are never stored. Interior dof `i` on a level with `N`
//! elements sits at `x = (i + 1) / N`, so indices increase left to right.

use crate::error::{check_dim, Error, Result};
use crate::sparse::CsrMatrix;

/// One uniform partition of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshLevel {
    n_elements: usize,
}

impl MeshLevel {
    pub fn new(n_elements: usize) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::TooCoarse { n_elements });
        }
        Ok(Self { n_elements })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Mesh width `1 / N`.
    pub fn h(&self) -> f64 {
        1.0 / self.n_elements as f64
    }

    pub fn n_interior_dofs(&self) -> usize {
        self.n_elements - 1
    }

    /// Coordinate of interior dof `i`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n_elements as f64
    }
}

/// Levels ordered coarsest first. `prolongation(k)` maps level `k` primal
/// vectors to level `k + 1` primal vectors.
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    levels: Vec<MeshLevel>,
    prolongations: Vec<CsrMatrix>,
}

impl MeshHierarchy {
    /// Builds `j_levels` nested meshes by repeated bisection, the finest
    /// having `n_fine` elements.
    pub fn build(n_fine: usize, j_levels: usize) -> Result<Self> {
        if j_levels == 0 {
            return Err(Error::NoLevels);
        }
        let coarsenings = (j_levels - 1) as u32;
        let factor = 1usize
            .checked_shl(coarsenings)
            .ok_or(Error::NotDivisible { n_fine, coarsenings })?;
        if !n_fine.is_multiple_of(factor) {
            return Err(Error::NotDivisible { n_fine, coarsenings });
        }
        let n_coarse = n_fine / factor;
        let levels = (0..j_levels)
            .map(|k| MeshLevel::new(n_coarse << k))
            .collect::<Result<Vec<_>>>()?;
        let prolongations = levels[..j_levels - 1]
            .iter()
            .map(|coarse| bisection_prolongation(coarse.n_elements()))
            .collect();
        Ok(Self {
            levels,
            prolongations,
        })
    }

    /// Number of levels `J`.
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[MeshLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Result<&MeshLevel> {
        self.levels.get(k).ok_or(Error::LevelOutOfRange {
            index: k,
            levels: self.levels.len(),
        })
    }

    pub fn finest(&self) -> &MeshLevel {
        self.levels.last().expect("hierarchy has at least one level")
    }

    pub fn coarsest(&self) -> &MeshLevel {
        &self.levels[0]
    }

    pub fn prolongations(&self) -> &[CsrMatrix] {
        &self.prolongations
    }

    /// Prolongation from level `k` to level `k + 1`.
    pub fn prolongation(&self, k: usize) -> Result<&CsrMatrix> {
        self.prolongations.get(k).ok_or(Error::LevelOutOfRange {
            index: k,
            levels: self.levels.len(),
        })
    }

    /// Interpolates a level-`k` primal vector onto level `k + 1`.
    pub fn prolongate(&self, k: usize, coarse_primal: &[f64]) -> Result<Vec<f64>> {
        self.prolongation(k)?.matvec(coarse_primal)
    }

    /// Transpose of [`prolongate`](Self::prolongate): level `k + 1` dual
    /// vectors to level `k` dual vectors.
    pub fn restrict_dual(&self, k: usize, fine_dual: &[f64]) -> Result<Vec<f64>> {
        self.prolongation(k)?.matvec_transpose(fine_dual)
    }

    /// Cascades [`restrict_dual`](Self::restrict_dual) from the finest level
    /// down to level 0 and returns every intermediate, indexed by level.
    pub fn restrict_dual_all(&self, fine_dual: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.finest().n_interior_dofs(), fine_dual.len())?;
        let j = self.n_levels();
        let mut out = vec![Vec::new(); j];
        out[j - 1] = fine_dual.to_vec();
        for k in (0..j - 1).rev() {
            out[k] = self.prolongations[k].matvec_transpose(&out[k + 1])?;
        }
        Ok(out)
    }
}

/// Hat-function interpolation from a mesh with `n_coarse` elements onto its
/// bisection. Odd fine dofs coincide with coarse nodes; even fine dofs are
/// midpoints and take the average of their (possibly Dirichlet) neighbours.
fn bisection_prolongation(n_coarse: usize) -> CsrMatrix {
    let nc = n_coarse - 1;
    let nf = 2 * n_coarse - 1;
    let rows = (0..nf)
        .map(|j| {
            if j % 2 == 1 {
                vec![(j / 2, 1.0)]
            } else {
                let right = j / 2;
                let mut row = Vec::with_capacity(2);
                if right >= 1 {
                    row.push((right - 1, 0.5));
                }
                if right < nc {
                    row.push((right, 0.5));
                }
                row
            }
        })
        .collect();
    CsrMatrix::from_rows(nc, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_levels_from_512() {
        let h = MeshHierarchy::build(512, 5).unwrap();
        let n: Vec<_> = h.levels().iter().map(|l| l.n_elements()).collect();
        assert_eq!(n, vec![32, 64, 128, 256, 512]);
        assert_eq!(h.prolongations().len(), 4);
    }

    #[test]
    fn single_level_has_no_prolongations() {
        let h = MeshHierarchy::build(4, 1).unwrap();
        assert_eq!(h.n_levels(), 1);
        assert_eq!(h.finest().n_interior_dofs(), 3);
        assert!(h.prolongations().is_empty());
        assert!(h.prolongate(0, &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn coarse_hat_at_quarter() {
        let h = MeshHierarchy::build(8, 2).unwrap();
        // coarse dof 0 sits at x = 1/4; fine dofs 0,1,2 at 1/8, 1/4, 3/8
        let col = h.prolongate(0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(col, vec![0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn invalid_requests() {
        assert!(matches!(
            MeshHierarchy::build(12, 4),
            Err(Error::NotDivisible { .. })
        ));
        assert!(matches!(
            MeshHierarchy::build(8, 4),
            Err(Error::TooCoarse { n_elements: 1 })
        ));
        assert!(matches!(MeshHierarchy::build(8, 0), Err(Error::NoLevels)));
        assert!(MeshHierarchy::build(8, 200).is_err());
    }

    #[test]
    fn shapes_and_row_sums() {
        let h = MeshHierarchy::build(64, 4).unwrap();
        for (k, p) in h.prolongations().iter().enumerate() {
            assert_eq!(p.ncols(), h.levels()[k].n_interior_dofs());
            assert_eq!(p.nrows(), h.levels()[k + 1].n_interior_dofs());
            for i in 0..p.nrows() {
                let sum: f64 = p.row(i).map(|(_, v)| v).sum();
                assert!(sum == 0.5 || sum == 1.0, "row {i} sums to {sum}");
            }
        }
    }

    #[test]
    fn level_width_times_count_is_one() {
        for n in [2, 3, 7, 64, 1000] {
            let l = MeshLevel::new(n).unwrap();
            assert!((l.h() * n as f64 - 1.0).abs() <= f64::EPSILON);
            assert_eq!(l.n_interior_dofs(), n - 1);
        }
        assert!(MeshLevel::new(1).is_err());
    }

    #[test]
    fn constant_interior_vector() {
        let h = MeshHierarchy::build(8, 2).unwrap();
        let fine = h.prolongate(0, &[1.0; 3]).unwrap();
        // coarse function is 1 at interior nodes, 0 at the ends
        assert_eq!(fine, vec![0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5]);
        assert_eq!(h.prolongate(0, &[0.0; 3]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn restriction_of_fine_basis_vector_is_a_row() {
        let h = MeshHierarchy::build(16, 3).unwrap();
        let p = h.prolongation(1).unwrap().to_dense();
        for j in 0..p.nrows() {
            let mut e = vec![0.0; p.nrows()];
            e[j] = 1.0;
            let r = h.restrict_dual(1, &e).unwrap();
            let row: Vec<f64> = p.row(j).iter().copied().collect();
            assert_eq!(r, row);
        }
    }
}
