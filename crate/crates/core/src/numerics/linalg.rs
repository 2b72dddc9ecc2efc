use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Absolute asymmetry tolerated by the symmetric solvers, relative to max(1, max|a_ij|).
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Pivots at or below this value are treated as a loss of positive definiteness.
const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factor `a`, failing on the first pivot ≤ 1e-12.
    pub fn new(a: &Matrix) -> Result<Self> {
        Self::with_pivot_tol(a, PIVOT_TOL)
    }

    /// Factor `a` with a caller-chosen pivot threshold. The error carries the
    /// index of the first offending pivot.
    pub fn with_pivot_tol(a: &Matrix, pivot_tol: f64) -> Result<Self> {
        check_symmetric(a)?;
        let n = a.nrows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > pivot_tol) {
                return Err(Error::Singular { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs has length {}, matrix is {n}x{n}", b.len())));
        }
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            inv.set_column(j, &col);
        }
        // symmetrize away rounding
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        inv
    }
}

fn check_symmetric(a: &Matrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    let scale = a.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..a.nrows() {
        for j in 0..i {
            if !((a[(i, j)] - a[(j, i)]).abs() <= SYMMETRY_TOL * scale) {
                return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Pivot threshold for [`check_full_rank`] on the unit-diagonal Gram matrix.
pub const RANK_TOL: f64 = 1e-10;

/// Full-column-rank check on a Gram matrix `X'X`. The error names the first
/// column that is zero or collinear with the columns before it.
pub fn check_full_rank(gram: &Matrix, names: &[String]) -> Result<()> {
    let p = gram.nrows();
    if names.len() != p {
        return Err(Error::Dimension(format!("{} names for a {p}x{p} Gram matrix", names.len())));
    }
    for j in 0..p {
        if !(gram[(j, j)] > 0.0) {
            return Err(Error::RankDeficient { column: names[j].clone() });
        }
    }
    let scaled = Matrix::from_fn(p, p, |a, b| gram[(a, b)] / (gram[(a, a)] * gram[(b, b)]).sqrt());
    match Cholesky::with_pivot_tol(&scaled, RANK_TOL) {
        Ok(_) => Ok(()),
        Err(Error::Singular { pivot, .. }) => Err(Error::RankDeficient { column: names[pivot].clone() }),
        Err(e) => Err(e),
    }
}

/// Solve `a x = b` for symmetric positive definite `a` via Cholesky.
pub fn solve_symmetric(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("matrix has {} rows, rhs has {}", a.nrows(), b.len())));
    }
    Cholesky::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual_ok(a: &Matrix, x: &Vector, b: &Vector) -> bool {
        let r = a * x - b;
        r.amax() <= 1e-8 * b.amax().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_and_diagonal() {
        let b = Vector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(solve_symmetric(&Matrix::identity(3, 3), &b).unwrap(), b);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 4.0]));
        let x = solve_symmetric(&d, &Vector::from_vec(vec![2.0, 8.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_reports_pivot() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        match solve_symmetric(&a, &Vector::zeros(3)) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_and_mismatched_inputs_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(solve_symmetric(&a, &Vector::zeros(2)), Err(Error::Domain(_))));
        assert!(matches!(solve_symmetric(&Matrix::identity(2, 2), &Vector::zeros(3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn inverse_multiplies_back() {
        let a = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let inv = Cholesky::new(&a).unwrap().inverse();
        assert!((&a * &inv - Matrix::identity(3, 3)).amax() < 1e-14);
    }

    fn spd(n: usize, entries: Vec<f64>) -> Matrix {
        let m = Matrix::from_row_slice(n, n, &entries[..n * n]);
        &m * m.transpose() + Matrix::identity(n, n) * 0.1
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn residual_bound_on_random_spd(
            n in 1usize..8,
            entries in prop::collection::vec(-3.0f64..3.0, 64),
            rhs in prop::collection::vec(-10.0f64..10.0, 8),
        ) {
            let a = spd(n, entries);
            let b = Vector::from_vec(rhs[..n].to_vec());
            let x = solve_symmetric(&a, &b).unwrap();
            prop_assert!(residual_ok(&a, &x, &b));
        }
    }
}
