//! Dense Gaussian elimination with partial pivoting.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// Solves `A X = B` for square `A` (row-major) and a right-hand side with
/// any number of columns. `B` is given row-major as well.
#[allow(clippy::needless_range_loop)]
pub fn solve_many(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch { axis: "linear system", left: n, right: b.len() });
    }
    let m = b.first().map_or(0, Vec::len);
    let mut lhs: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<Vec<f64>> = b.to_vec();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| libm::fabs(lhs[i][col]).total_cmp(&libm::fabs(lhs[j][col])))
            .unwrap_or(col);
        if libm::fabs(lhs[pivot][col]) < PIVOT_FLOOR {
            return Err(Error::NumericalFailure { residual: f64::INFINITY, tolerance: 0.0 });
        }
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = 1.0 / lhs[col][col];
        for row in col + 1..n {
            let factor = lhs[row][col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                lhs[row][k] -= factor * lhs[col][k];
            }
            for k in 0..m {
                rhs[row][k] -= factor * rhs[col][k];
            }
        }
    }

    let mut x = alloc::vec![alloc::vec![0.0; m]; n];
    for row in (0..n).rev() {
        for k in 0..m {
            let mut acc = rhs[row][k];
            for j in row + 1..n {
                acc -= lhs[row][j] * x[j][k];
            }
            x[row][k] = acc / lhs[row][row];
        }
    }
    Ok(x)
}

/// Solves `A x = b`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let cols: Vec<Vec<f64>> = b.iter().map(|v| alloc::vec![*v]).collect();
    Ok(solve_many(a, &cols)?.into_iter().map(|r| r[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![0.0, 2.0], vec![1.0, 1.0]];
        let x = solve(&a, &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(solve(&a, &[1.0, 1.0]).is_err());
    }
}
