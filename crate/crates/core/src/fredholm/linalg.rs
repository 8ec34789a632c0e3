//! Dense complex LU with partial pivoting, sized for the small kernels here.

use num_complex::Complex64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }
}

/// LU factors `PA = LU` stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(mut a: CMatrix) -> Self {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for col in 0..n {
            let mut piv = col;
            let mut best = a.get(col, col).norm();
            for r in col + 1..n {
                let v = a.get(r, col).norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                perm.swap(piv, col);
                sign = -sign;
            }
            let d = a.get(col, col);
            for r in col + 1..n {
                let f = a.get(r, col) / d;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a.set(r, col, f);
                for j in col + 1..n {
                    let v = a.get(r, j) - f * a.get(col, j);
                    a.set(r, j, v);
                }
            }
        }
        Self { lu: a, perm, sign, singular }
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return Complex64::new(0.0, 0.0);
        }
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..self.lu.n {
            d *= self.lu.get(i, i);
        }
        d
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }

    /// `tr(A⁻¹ B)`.
    pub fn trace_solve(&self, b: &CMatrix) -> Complex64 {
        let n = self.lu.n;
        let mut tr = Complex64::new(0.0, 0.0);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b.get(i, j);
            }
            tr += self.solve(&col)[j];
        }
        tr
    }
}

/// Determinant by LU.
pub fn det(a: &CMatrix) -> Complex64 {
    if a.n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Lu::new(a.clone()).det()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_of_small_matrix() {
        let a = CMatrix::from_fn(2, |i, j| [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, -1.0), c(3.0, 0.5)]][i][j]);
        let expect = c(1.0, 1.0) * c(3.0, 0.5) - c(2.0, 0.0) * c(0.0, -1.0);
        assert!((det(&a) - expect).norm() < 1e-14);
    }

    #[test]
    fn solve_round_trip() {
        let a = CMatrix::from_fn(4, |i, j| c(1.0 / (1.0 + i as f64 + j as f64), (i * j) as f64 * 0.1) + if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) });
        let b: Vec<Complex64> = (0..4).map(|k| c(k as f64, 1.0)).collect();
        let x = Lu::new(a.clone()).solve(&b);
        for i in 0..4 {
            let mut s = c(0.0, 0.0);
            for j in 0..4 {
                s += a.get(i, j) * x[j];
            }
            assert!((s - b[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = CMatrix::from_fn(2, |i, j| if i == j { c(0.0, 0.0) } else { c(1.0, 0.0) });
        assert!((det(&a) - c(-1.0, 0.0)).norm() < 1e-15);
    }
}
