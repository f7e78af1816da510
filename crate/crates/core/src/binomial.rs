//! The binomial kernel `k(x, y) = Σ_n C(x, n) C(y, n)` on the nonnegative
//! integers, in exact arithmetic.
//!
//! Its Gram matrix over `{0, ..., n}` factors as `L Lᵗ` with `L` the
//! truncated Pascal triangle, whose inverse is the signed Pascal triangle.
//! The diagonal of `K_n⁻¹ = L⁻ᵗ L⁻¹` is therefore a sum of squared binomial
//! coefficients, which grows without bound in `n`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::kernel::{Domain, Kernel};
use crate::point::Point;

/// Exact binomial coefficient, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `Σ_{n=0}^{min(x,y)} C(x, n) C(y, n)`.
pub fn binomial_eval(x: u64, y: u64) -> BigInt {
    (0..=x.min(y))
        .map(|n| binomial(x, n) * binomial(y, n))
        .sum()
}

/// `e_n(x) = C(x, n)`, zero when `n > x`.
pub fn binomial_basis_eval(n: u64, x: u64) -> BigInt {
    binomial(x, n)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinomialKernel;

impl Kernel for BinomialKernel {
    fn domain(&self) -> Domain {
        Domain::NonnegativeIntegers
    }

    fn name(&self) -> &str {
        "binomial"
    }

    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (x.as_int(), y.as_int()) {
            (Some(a), Some(b)) => binomial_eval(a, b).to_f64().unwrap_or(f64::INFINITY),
            _ => f64::NAN,
        }
    }

    fn eval_exact(&self, x: &Point, y: &Point) -> Option<BigInt> {
        Some(binomial_eval(x.as_int()?, y.as_int()?))
    }
}

/// Lower-triangular `L[x][y] = C(x, y)` for `0 <= y <= x <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PascalMatrix {
    entries: IntMatrix,
}

impl PascalMatrix {
    pub fn new(n: usize) -> Self {
        // build by rows of Pascal's rule rather than n² independent binomials
        let size = n + 1;
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(size);
        for x in 0..size {
            let mut row = vec![BigInt::zero(); size];
            row[0] = BigInt::one();
            for y in 1..=x {
                row[y] = &rows[x - 1][y - 1] + &rows[x - 1][y];
            }
            rows.push(row);
        }
        Self {
            entries: IntMatrix::from_fn(size, |i, j| rows[i][j].clone()),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.dim()
    }

    pub fn get(&self, x: usize, y: usize) -> &BigInt {
        self.entries.get(x, y)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.entries
    }

    /// `L⁻¹[x][y] = (-1)^{x-y} C(x, y)`.
    pub fn inverse(&self) -> IntMatrix {
        IntMatrix::from_fn(self.size(), |x, y| {
            let v = self.get(x, y).clone();
            if (x + y) % 2 == 1 {
                -v
            } else {
                v
            }
        })
    }
}

/// The Pascal factor `L` and the exact binomial Gram `K_n` over `{0..n}`.
pub fn pascal_factorization(n: usize) -> (PascalMatrix, IntMatrix) {
    let l = PascalMatrix::new(n);
    let k = IntMatrix::from_fn(n + 1, |x, y| binomial_eval(x as u64, y as u64));
    (l, k)
}

/// `(K_n⁻¹)[x₁][x₁] = Σ_{k=x₁}^{n} C(k, x₁)²`, read off the exact inverse
/// Pascal factor: `K_n⁻¹ = L⁻ᵗ L⁻¹`, so the diagonal is the squared norm of
/// column `x₁` of `L⁻¹`.
pub fn binomial_partial_norm(x1: u64, n: u64) -> Result<BigInt> {
    if x1 > n {
        return Err(Error::InvalidArgument(format!(
            "target {x1} exceeds truncation {n}"
        )));
    }
    let inv = PascalMatrix::new(n as usize).inverse();
    let col = x1 as usize;
    Ok((col..=n as usize)
        .map(|k| inv.get(k, col) * inv.get(k, col))
        .sum())
}
