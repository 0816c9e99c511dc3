//! Dense symmetric eigen-helpers shared by the spectral module, the
//! condition-number oracle and the inequality checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
pub fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `m^s` for symmetric positive semidefinite `m`. The endpoints are returned
/// exactly so that `s ∈ {0, 1}` comparisons carry no roundoff.
pub fn spd_power(m: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if s == 0.0 {
        return DMatrix::identity(n, n);
    }
    if s == 1.0 {
        return m.clone();
    }
    let (values, vectors) = sorted_symmetric_eigen(symmetrize(m));
    let powered = DVector::from_iterator(n, values.iter().map(|&l| l.max(0.0).powf(s)));
    let scaled = DMatrix::from_fn(n, n, |r, c| vectors[(r, c)] * powered[c]);
    symmetrize(&(scaled * vectors.transpose()))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let (l, v) = sorted_symmetric_eigen(m.clone());
        assert!(l[0] <= l[1] && l[1] <= l[2]);
        let rec = &v * DMatrix::from_diagonal(&l) * v.transpose();
        assert_relative_eq!(rec, m, epsilon = 1e-12);
    }

    #[test]
    fn square_root_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = spd_power(&m, 0.5);
        assert_relative_eq!(&r * &r, m, epsilon = 1e-12);
        assert_eq!(spd_power(&m, 0.0), DMatrix::identity(2, 2));
        assert_eq!(spd_power(&m, 1.0), m);
    }

    #[test]
    fn norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 2.0]));
        assert_relative_eq!(spectral_norm(&m), 3.0, epsilon = 1e-14);
    }
}
