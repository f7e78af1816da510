#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pointmass::{Network, PointSet, TableKernel};
use rand::seq::SliceRandom;
use rand::Rng;

/// `AᵗA + εI` with `A` uniform in [-1, 1].
pub fn random_pd_matrix<R: Rng>(rng: &mut R, n: usize, eps: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let m = a.transpose() * &a + DMatrix::identity(n, n) * eps;
    // exact symmetry for the table kernel
    DMatrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] })
}

pub fn random_table_kernel<R: Rng>(rng: &mut R, n: usize) -> (TableKernel, PointSet) {
    let m = random_pd_matrix(rng, n, 0.1);
    let rows = (0..n).map(|i| m.row(i).iter().copied().collect()).collect();
    let k = TableKernel::from_matrix(rows).unwrap();
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    (k, PointSet::vertices(&labels).unwrap())
}

/// Random spanning tree plus extra edges; conductances in [0.1, 10].
pub fn random_connected_network<R: Rng>(rng: &mut R, n: usize) -> Network {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = order[rng.random_range(0..i)];
        let u = order[i];
        pairs.insert((u.min(j), u.max(j)));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<(String, String, f64)> = pairs
        .into_iter()
        .map(|(u, v)| {
            (
                names[u].clone(),
                names[v].clone(),
                rng.random_range(0.1..10.0),
            )
        })
        .collect();
    let base = names[rng.random_range(0..n)].clone();
    Network::new(&names, &base, &edges).unwrap()
}

/// Random tree network (each new vertex attaches to an earlier one).
pub fn random_tree_network<R: Rng>(rng: &mut R, n: usize) -> Network {
    let names: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let edges: Vec<(String, String, f64)> = (1..n)
        .map(|i| {
            let p = rng.random_range(0..i);
            (
                names[p].clone(),
                names[i].clone(),
                rng.random_range(0.2..5.0),
            )
        })
        .collect();
    Network::new(&names, &names[0], &edges).unwrap()
}

/// Strictly increasing positive reals with gaps in [0.05, 2].
pub fn random_increasing<R: Rng>(rng: &mut R, n: usize, start: f64) -> Vec<f64> {
    let mut x = start;
    (0..n)
        .map(|_| {
            x += rng.random_range(0.05..2.0);
            x
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Brute-force exact solve `K z = b` by Gauss-Jordan elimination over the
/// rationals. Independent of every floating-point path in the crate.
pub fn rational_solve(k: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = k.len();
    let mut a: Vec<Vec<BigRational>> = k
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

/// Exact determinant by cofactor-free elimination over the rationals.
pub fn rational_det(k: &[Vec<BigRational>]) -> BigRational {
    let n = k.len();
    let mut a = k.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col].clone();
        for r in col + 1..n {
            let f = &a[r][col] / &a[col][col];
            let pivot_row = a[col].clone();
            for (x, y) in a[r].iter_mut().zip(pivot_row) {
                *x = &*x - &f * y;
            }
        }
    }
    det
}

pub fn min_kernel(xs: &[BigRational]) -> Vec<Vec<BigRational>> {
    xs.iter()
        .map(|s| xs.iter().map(|t| s.min(t).clone()).collect())
        .collect()
}

pub fn bridge_kernel(xs: &[BigRational]) -> Vec<Vec<BigRational>> {
    xs.iter()
        .map(|s| xs.iter().map(|t| s.min(t).clone() - s * t).collect())
        .collect()
}

pub fn unit(n: usize, i: usize) -> Vec<BigRational> {
    (0..n)
        .map(|j| {
            if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap()
}

pub fn is_positive(x: &BigRational) -> bool {
    x.is_positive()
}
