//! Small dense complex linear algebra: partial-pivot LU, inverse, determinant.
//!
//! Only used for the channel matrices of the multichannel engine (M ≤ 8 in
//! practice) and for brute-force reference solutions in tests.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        CMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Product of column 2-norms (Hadamard's bound on |det|).
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    pub fn lu(&self) -> Lu {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            min_pivot = min_pivot.min(pmax);
            if pmax == 0.0 {
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / pivot;
                a[(i, k)] = l;
                if l != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= l * u;
                    }
                }
            }
        }
        Lu {
            lu: a,
            perm,
            sign,
            singular: n > 0 && min_pivot.partial_cmp(&(SINGULAR_RTOL * scale)) != Some(std::cmp::Ordering::Greater),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.lu().det()
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let lu = self.lu();
        if lu.singular {
            return Err(Error::SingularSystem { cond: f64::INFINITY });
        }
        Ok(lu.inverse())
    }

    /// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁` (infinite when the LU is singular).
    pub fn condition_1(&self) -> f64 {
        let lu = self.lu();
        if lu.singular {
            return f64::INFINITY;
        }
        self.norm_1() * lu.inverse().norm_1()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors with row permutation.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.rows;
        (0..n).map(|i| self.lu[(i, i)]).product::<Complex64>() * self.sign
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                x[i] = x[i] - u * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.lu.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_and_det_2x2() {
        let a = CMatrix::from_fn(2, 2, |i, j| [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, 3.0), c(4.0, -1.0)]][i][j]);
        let want = c(1.0, 1.0) * c(4.0, -1.0) - c(2.0, 0.0) * c(0.0, 3.0);
        assert!((a.det() - want).norm() < 1e-14);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = CMatrix::from_fn(3, 3, |i, _| c(i as f64 + 1.0, 0.0));
        assert!(a.lu().is_singular());
        assert!(a.inverse().is_err());
        assert_eq!(a.condition_1(), f64::INFINITY);
    }

    #[test]
    fn permutation_sign() {
        let a = CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!((a.det() - c(-1.0, 0.0)).norm() < 1e-15);
    }
}
