//! Symmetric positive-definite matrices with a cached Cholesky factor.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest diagonal entry are treated as
/// singular; collinear probit designs trip this before producing garbage.
const PIVOT_RELATIVE_FLOOR: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    /// Lower-triangular `L` with `L Lᵀ = matrix`.
    factor: DMatrix<f64>,
    log_det: f64,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let k = matrix.nrows();
        if k == 0 || matrix.ncols() != k {
            return Err(Error::NotSpd(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSpd("non-finite entry".into()));
        }
        let scale = matrix.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..k {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSpd(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        let max_diag = (0..k).map(|i| matrix[(i, i)]).fold(f64::MIN, f64::max);
        if max_diag <= 0.0 {
            return Err(Error::NotSpd("non-positive diagonal".into()));
        }
        let chol = nalgebra::linalg::Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
        let factor = chol.l();
        let floor = PIVOT_RELATIVE_FLOOR * max_diag;
        for i in 0..k {
            let pivot = factor[(i, i)] * factor[(i, i)];
            if pivot < floor {
                return Err(Error::NotSpd(format!(
                    "pivot {i} = {pivot:e} below {floor:e} (near-collinear)"
                )));
            }
        }
        let log_det = 2.0 * (0..k).map(|i| factor[(i, i)].ln()).sum::<f64>();
        Ok(SpdMatrix {
            matrix,
            factor,
            log_det,
        })
    }

    pub fn from_row_slice(k: usize, values: &[f64]) -> Result<Self> {
        if values.len() != k * k {
            return Err(Error::param(format!("expected {} entries, got {}", k * k, values.len())));
        }
        Self::new(DMatrix::from_row_slice(k, k, values))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .factor
            .solve_lower_triangular(b)
            .expect("factor has positive diagonal");
        self.factor
            .tr_solve_lower_triangular(&y)
            .expect("factor has positive diagonal")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut inv = self.solve_matrix(&DMatrix::identity(k, k));
        symmetrize(&mut inv);
        inv
    }

    fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self
            .factor
            .solve_lower_triangular(b)
            .expect("factor has positive diagonal");
        self.factor
            .tr_solve_lower_triangular(&y)
            .expect("factor has positive diagonal")
    }

    /// `vᵀ A⁻¹ v`.
    pub fn inv_quad_form(&self, v: &DVector<f64>) -> f64 {
        let y = self
            .factor
            .solve_lower_triangular(v)
            .expect("factor has positive diagonal");
        y.norm_squared()
    }

    /// Relative Frobenius error of `L Lᵀ` against the stored matrix.
    pub fn reconstruction_error(&self) -> f64 {
        let rebuilt = &self.factor * self.factor.transpose();
        (rebuilt - &self.matrix).norm() / self.matrix.norm()
    }
}

/// Averages `m` with its transpose in place.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Submatrix on the given row/column indices.
pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_symmetric() {
        let err = SpdMatrix::from_row_slice(2, &[2.0, 1.0, 0.5, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NotSpd(_)));
    }

    #[test]
    fn rejects_indefinite_and_collinear() {
        assert!(SpdMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]).is_err());
        // rank one: [1 2; 2 4]
        assert!(SpdMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 4.0]).is_err());
        // nearly rank one, smallest pivot ~1e-14 relative
        assert!(SpdMatrix::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]).is_err());
    }

    #[test]
    fn solve_and_log_det() {
        let a = SpdMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((a.log_det() - 3.0_f64.ln()).abs() < 1e-14);
        let x = a.solve(&DVector::from_vec(vec![3.0, 3.0]));
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let inv = a.inverse();
        assert!((inv[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        assert!((inv[(0, 1)] + 1.0 / 3.0).abs() < 1e-14);
        assert!((a.inv_quad_form(&DVector::from_vec(vec![1.0, 1.0])) - 2.0 / 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn factor_reconstructs(entries in proptest::collection::vec(-3.0f64..3.0, 9), ridge in 0.1f64..5.0) {
            let b = DMatrix::from_row_slice(3, 3, &entries);
            let m = &b * b.transpose() + DMatrix::identity(3, 3) * ridge;
            let spd = SpdMatrix::new(m).unwrap();
            prop_assert!(spd.reconstruction_error() < 1e-10);
        }
    }
}
