//! Exact integer linear algebra for integer-valued kernels.

use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::point::{Point, PointSet};

/// Dense square matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Copy with row and column `t` removed.
    pub fn minor(&self, t: usize) -> Self {
        let keep: Vec<usize> = (0..self.n).filter(|&i| i != t).collect();
        Self::from_fn(keep.len(), |i, j| self.get(keep[i], keep[j]).clone())
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        IntMatrix::from_fn(n, |i, j| {
            (0..n).fold(BigInt::zero(), |acc, k| {
                acc + self.get(i, k) * rhs.get(k, j)
            })
        })
    }
}

/// Exact Gram matrix, when the kernel supplies integer values on every pair.
pub fn exact_gram<K: Kernel + ?Sized>(kernel: &K, points: &PointSet) -> Option<IntMatrix> {
    let pts = points.points();
    let n = pts.len();
    let mut m = IntMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_exact(&pts[i], &pts[j])?;
            m.data[j * n + i] = v.clone();
            m.data[i * n + j] = v;
        }
    }
    Some(m)
}

/// `(K_F⁻¹ δ_t)(t) = D′_F / D_F` exactly, by Cramer's rule.
pub fn exact_projection_norm(
    gram: &IntMatrix,
    base: &PointSet,
    target: &Point,
) -> Result<BigRational> {
    let t = base
        .index_of(target)
        .ok_or_else(|| Error::TargetNotFound(target.to_string()))?;
    let det = gram.determinant();
    if !det.is_positive() {
        return Err(Error::SingularGram);
    }
    let minor = gram.minor(t).determinant();
    Ok(BigRational::new(minor, det))
}
