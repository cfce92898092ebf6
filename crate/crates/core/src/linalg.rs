//! Small dense linear-algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

const SYM_TOL: f64 = 1e-8;

pub fn check_symmetric(m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYM_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn eigen_pd(m: &Mat) -> Result<SymmetricEigen<f64, Dyn>> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(eig)
}

fn eigen_map(eig: &SymmetricEigen<f64, Dyn>, f: impl Fn(f64) -> f64) -> Mat {
    let q = &eig.eigenvectors;
    let d = Mat::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&(q * d * q.transpose()))
}

/// The unique symmetric positive-definite square root.
pub fn symmetric_sqrt(m: &Mat) -> Result<Mat> {
    Ok(eigen_map(&eigen_pd(m)?, f64::sqrt))
}

pub fn symmetric_inv_sqrt(m: &Mat) -> Result<Mat> {
    Ok(eigen_map(&eigen_pd(m)?, |l| 1.0 / l.sqrt()))
}

/// Replaces eigenvalues below `floor` by `floor`.
pub fn floor_eigenvalues(m: &Mat, floor: f64) -> Mat {
    let eig = SymmetricEigen::new(symmetrize(m));
    eigen_map(&eig, |l| l.max(floor))
}

pub fn cholesky(m: &Mat) -> Result<Cholesky<f64, Dyn>> {
    check_symmetric(m)?;
    Cholesky::new(symmetrize(m)).ok_or(Error::NotPositiveDefinite)
}

pub fn spd_inverse(m: &Mat) -> Result<Mat> {
    Ok(symmetrize(&cholesky(m)?.inverse()))
}

pub fn log_det_spd(m: &Mat) -> Result<f64> {
    let l = cholesky(m)?;
    Ok(2.0 * l.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

pub fn sub_matrix(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn sub_vector(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix via eigenvalues.
pub fn pseudo_inverse_sym(m: &Mat, rel_tol: f64) -> Mat {
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.amax();
    eigen_map(&eig, |l| if l > rel_tol * max { 1.0 / l } else { 0.0 })
}

/// Ratio of largest to smallest eigenvalue; infinite for singular matrices.
pub fn condition_number_sym(m: &Mat) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sqrt_of_known_matrix() {
        let s = Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]);
        let f = symmetric_sqrt(&s).unwrap();
        assert!((f[(0, 0)] - 1.7121).abs() < 1e-3);
        assert!((f[(0, 1)] - 0.2620).abs() < 1e-3);
        assert!((f[(1, 1)] - 2.1051).abs() < 1e-3);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(symmetric_sqrt(&a), Err(Error::NotSymmetric(_))));
        let b = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(symmetric_sqrt(&b), Err(Error::NotPositiveDefinite)));
    }

    fn spd(dim: usize) -> impl Strategy<Value = Mat> {
        proptest::collection::vec(-1.0..1.0f64, dim * dim).prop_map(move |v| {
            let a = Mat::from_vec(dim, dim, v);
            &a * a.transpose() + Mat::identity(dim, dim) * 0.1
        })
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(m in (1usize..5).prop_flat_map(spd)) {
            let f = symmetric_sqrt(&m).unwrap();
            assert_relative_eq!(&f * &f, m.clone(), epsilon = 1e-9 * m.amax().max(1.0));
            assert_relative_eq!(f.clone(), f.transpose(), epsilon = 1e-12);
            let g = symmetric_inv_sqrt(&m).unwrap();
            assert_relative_eq!(&f * &g, Mat::identity(m.nrows(), m.nrows()), epsilon = 1e-8);
        }
    }
}
