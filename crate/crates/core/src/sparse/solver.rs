use std::time::{Duration, Instant};

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use serde::Serialize;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Smallest tolerance `solve` accepts.
pub const MIN_TOL: f64 = 1e-14;

const RESIDUAL_FLOOR: f64 = 1e-300;
const MAX_REFINEMENT_STEPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub method: &'static str,
    /// `|b - A x| / max(|b|, 1e-300)` in the Euclidean norm.
    pub relative_residual: f64,
    /// Tolerance the solve was asked to meet.
    pub tol: f64,
    pub factorizations: usize,
    pub refinement_steps: usize,
    pub unknowns: usize,
    #[serde(serialize_with = "as_secs")]
    pub wall_time: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = a.spmv(x)?;
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    Ok(norm2(&r) / norm2(b).max(RESIDUAL_FLOOR))
}

/// Solves `A x = b` to relative residual `tol`.
///
/// Rows are equilibrated by their largest entry, the scaled matrix is
/// factored by a sparse LU with partial pivoting and a column
/// fill-reducing ordering, and the result is polished by iterative
/// refinement against the unscaled system.
pub fn solve(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolverReport)> {
    let start = Instant::now();
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch {
            op: "solve",
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    if b.len() != n {
        return Err(Error::ShapeMismatch {
            op: "solve",
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    if !(tol >= MIN_TOL) {
        return Err(Error::InvalidArgument(format!(
            "solver tolerance {tol:e} is below the supported minimum {MIN_TOL:e}"
        )));
    }
    let report = |x: &[f64], refinement_steps| -> Result<SolverReport> {
        Ok(SolverReport {
            method: "sparse-lu",
            relative_residual: relative_residual(a, x, b)?,
            tol,
            factorizations: usize::from(n > 0),
            refinement_steps,
            unknowns: n,
            wall_time: start.elapsed(),
        })
    };
    if n == 0 {
        return Ok((Vec::new(), report(&[], 0)?));
    }

    let mut scale = vec![0.0; n];
    for (i, s) in scale.iter_mut().enumerate() {
        let m = a.row(i).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return Err(Error::SingularMatrix {
                detail: format!("row {i} is empty or non-finite"),
                residual: f64::INFINITY,
            });
        }
        *s = 1.0 / m;
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        a.triplets().map(|(i, j, v)| Triplet::new(i, j, scale[i] * v)).collect();
    let scaled =
        SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets).map_err(|e| Error::SingularMatrix {
            detail: format!("{e:?}"),
            residual: f64::INFINITY,
        })?;
    let lu = scaled.sp_lu().map_err(|e| Error::SingularMatrix {
        detail: format!("{e:?}"),
        residual: f64::INFINITY,
    })?;

    let apply = |rhs: &[f64]| -> Vec<f64> {
        let mut col = Col::<f64>::from_fn(n, |i| scale[i] * rhs[i]);
        lu.solve_in_place(col.as_mut());
        (0..n).map(|i| col[i]).collect()
    };

    let mut x = apply(b);
    let b_norm = norm2(b).max(RESIDUAL_FLOOR);
    let mut steps = 0;
    loop {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix {
                detail: "factorization produced non-finite values".into(),
                residual: f64::INFINITY,
            });
        }
        let ax = a.spmv(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        let rel = norm2(&r) / b_norm;
        if rel <= tol {
            break;
        }
        if steps == MAX_REFINEMENT_STEPS {
            return Err(Error::NotConverged {
                residual: rel,
                tol,
                iterations: steps,
            });
        }
        let dx = apply(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        steps += 1;
    }
    let report = report(&x, steps)?;
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![3.0, -1.0, 0.5, 7.0];
        let (x, rep) = solve(&CsrMatrix::identity(4), &b, DEFAULT_TOL).unwrap();
        assert_eq!(x, b);
        assert!(rep.relative_residual <= DEFAULT_TOL);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (x, _) = solve(&a, &[3.0, 3.0], DEFAULT_TOL).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_diagonal_saddle_point_needs_pivoting() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0, 1.0], vec![1.0, 3.0, -1.0], vec![1.0, -1.0, 0.0]]);
        let b = [1.0, 2.0, 3.0];
        let (x, rep) = solve(&a, &b, 1e-13).unwrap();
        assert!(relative_residual(&a, &x, &b).unwrap() <= 1e-13);
        assert!(rep.relative_residual <= 1e-13);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (x, rep) = solve(&a, &[0.0, 0.0], DEFAULT_TOL).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.relative_residual, 0.0);
    }

    #[test]
    fn singular_matrix_reported() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let err = solve(&a, &[1.0, 1.0], DEFAULT_TOL).unwrap_err();
        assert!(err.is_solver_failure(), "{err}");
        let empty_row = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]);
        assert!(matches!(
            solve(&empty_row, &[1.0, 1.0], DEFAULT_TOL),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn rejects_tolerance_below_floor() {
        assert!(matches!(
            solve(&CsrMatrix::identity(2), &[1.0, 1.0], 1e-16),
            Err(Error::InvalidArgument(_))
        ));
    }
}
