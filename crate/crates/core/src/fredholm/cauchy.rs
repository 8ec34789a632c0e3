use num_complex::Complex64;

use super::linalg::{det, CMatrix};
use crate::{Error, Result};

/// Relative floor below which `x_i + y_j` counts as a vanishing denominator.
const SINGULAR_REL: f64 = 1e-13;

fn check_sizes(x: &[Complex64], y: &[Complex64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(format!(
            "Cauchy determinant needs |X| = |Y|, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn scale(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().chain(y).map(|v| v.norm()).fold(1e-300, f64::max)
}

/// `Cd(X; Y) = det(1/(x_i + y_j))` through the product formula
/// `∏_{i<j}(x_j − x_i)(y_j − y_i) / ∏_{i,j}(x_i + y_j)`.
pub fn cauchy_det(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    check_sizes(x, y)?;
    let s = scale(x, y);
    let mut den = Complex64::new(1.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            let d = xi + yj;
            if d.norm() < SINGULAR_REL * s {
                return Err(Error::SingularDenominator { row: i, col: j, magnitude: d.norm() });
            }
            den *= d;
        }
    }
    let mut num = Complex64::new(1.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            num *= (x[j] - x[i]) * (y[j] - y[i]);
        }
    }
    Ok(num / den)
}

/// `det(1/(x_i + y_j))` by LU, for cross-checking the product formula.
pub fn cauchy_det_direct(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    check_sizes(x, y)?;
    let s = scale(x, y);
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            let d = xi + yj;
            if d.norm() < SINGULAR_REL * s {
                return Err(Error::SingularDenominator { row: i, col: j, magnitude: d.norm() });
            }
        }
    }
    Ok(det(&CMatrix::from_fn(x.len(), |i, j| 1.0 / (x[i] + y[j]))))
}

/// `∏_{i=0}^{m} Cd(U^{(i)} ∪ −Û^{(i+1)}; Û^{(i)} ∪ −U^{(i+1)})` with empty
/// boundary blocks.
pub fn cauchy_chain(u: &[Vec<Complex64>], uhat: &[Vec<Complex64>]) -> Result<Complex64> {
    let m = u.len();
    let empty: Vec<Complex64> = Vec::new();
    let lvl = |v: &[Vec<Complex64>], i: usize| -> Vec<Complex64> {
        if i == 0 || i > m {
            empty.clone()
        } else {
            v[i - 1].clone()
        }
    };
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..=m {
        let mut x = lvl(u, i);
        x.extend(lvl(uhat, i + 1).into_iter().map(|v| -v));
        let mut y = lvl(uhat, i);
        y.extend(lvl(u, i + 1).into_iter().map(|v| -v));
        acc *= cauchy_det(&x, &y)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn one_by_one() {
        let v = cauchy_det(&[c(2.0)], &[c(3.0)]).unwrap();
        assert!((v - c(0.2)).norm() < 1e-16);
    }

    #[test]
    fn two_by_two_against_direct() {
        let x = [c(1.0), c(2.0)];
        let y = [c(3.0), c(4.0)];
        let a = cauchy_det(&x, &y).unwrap();
        let b = 1.0 / (c(4.0) * c(6.0)) - 1.0 / (c(5.0) * c(5.0));
        assert!((a - b).norm() < 1e-16);
        assert!((cauchy_det_direct(&x, &y).unwrap() - b).norm() < 1e-16);
    }

    #[test]
    fn repeated_entry_vanishes() {
        assert_eq!(cauchy_det(&[c(1.0), c(1.0)], &[c(3.0), c(4.0)]).unwrap(), c(0.0));
    }

    #[test]
    fn singular_denominator_is_reported() {
        let err = cauchy_det(&[c(1.0), c(2.0)], &[c(-2.0), c(4.0)]).unwrap_err();
        assert!(matches!(err, Error::SingularDenominator { row: 1, col: 0, .. }));
    }

    #[test]
    fn size_mismatch_is_reported() {
        assert!(matches!(cauchy_det(&[c(1.0)], &[]), Err(Error::SizeMismatch(_))));
    }
}
