//! Dense pivoted Cholesky factorization and a preconditioned conjugate
//! gradient solver.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold: a pivot counts as positive only above
/// `PIVOT_RTOL * max|K|`.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Outcome of the positivity check on a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Definiteness {
    StrictlyPd {
        logdet: f64,
    },
    SemiDefinite {
        rank: usize,
    },
    /// Zero-based index of the point where positivity first fails.
    NotPsd {
        index: usize,
    },
}

/// `P^T A P = L L^T` with `L` lower trapezoidal (`n x rank`), `P` a
/// symmetric diagonal-pivoting permutation.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    n: usize,
    /// `perm[k]` is the original index of the k-th pivot.
    perm: Vec<usize>,
    /// Rows in pivot order.
    l: DMatrix<f64>,
    pivots: Vec<f64>,
    definiteness: Definiteness,
    tolerance: f64,
}

impl PivotedCholesky {
    pub fn factor(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = PIVOT_RTOL * scale;

        // working copy, rows/cols permuted in place; only the trailing block is live
        let mut w = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = DMatrix::<f64>::zeros(n, n);
        let mut pivots = Vec::with_capacity(n);

        let mut rank = 0;
        for k in 0..n {
            let (p, dp) = (k..n)
                .map(|i| (i, w[(i, i)]))
                .fold(
                    (k, f64::NEG_INFINITY),
                    |best, c| if c.1 > best.1 { c } else { best },
                );
            if dp.is_nan() || dp <= tol {
                break;
            }
            if p != k {
                w.swap_rows(k, p);
                w.swap_columns(k, p);
                l.swap_rows(k, p);
                perm.swap(k, p);
            }
            let lkk = dp.sqrt();
            l[(k, k)] = lkk;
            for i in k + 1..n {
                l[(i, k)] = w[(i, k)] / lkk;
            }
            for j in k + 1..n {
                let ljk = l[(j, k)];
                if ljk == 0.0 {
                    continue;
                }
                for i in j..n {
                    let v = w[(i, j)] - l[(i, k)] * ljk;
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            pivots.push(dp);
            rank = k + 1;
        }

        let definiteness = if rank == n {
            Definiteness::StrictlyPd {
                logdet: pivots.iter().map(|d| d.ln()).sum(),
            }
        } else {
            match Self::indefinite_witness(&w, &perm, rank, tol) {
                Some(index) => Definiteness::NotPsd { index },
                None => Definiteness::SemiDefinite { rank },
            }
        };

        let l = l.columns(0, rank).into_owned();
        Self {
            n,
            perm,
            l,
            pivots,
            definiteness,
            tolerance: tol,
        }
    }

    /// The trailing Schur complement of a PSD matrix with all diagonals
    /// below `tol` is itself negligible; anything else certifies a
    /// negative direction.
    fn indefinite_witness(
        w: &DMatrix<f64>,
        perm: &[usize],
        rank: usize,
        tol: f64,
    ) -> Option<usize> {
        let n = w.nrows();
        let negative_diag = (rank..n)
            .filter(|&i| w[(i, i)] < -tol || w[(i, i)].is_nan())
            .map(|i| perm[i])
            .min();
        if negative_diag.is_some() {
            return negative_diag;
        }
        let mut witness: Option<usize> = None;
        for i in rank..n {
            for j in rank..i {
                let bound = (w[(i, i)].max(0.0) * w[(j, j)].max(0.0)).sqrt() + tol;
                if w[(i, j)].abs() > bound {
                    let idx = perm[i].max(perm[j]);
                    witness = Some(witness.map_or(idx, |m| m.min(idx)));
                }
            }
        }
        witness
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Factor rows in pivot order (`n x rank`).
    pub fn factor_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// The factor with rows returned to the original point order, so that
    /// `A ≈ F F^T`.
    pub fn unpermuted_factor(&self) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(self.n, self.rank());
        for (k, &orig) in self.perm.iter().enumerate() {
            f.row_mut(orig).copy_from(&self.l.row(k));
        }
        f
    }

    pub fn logdet(&self) -> Option<f64> {
        match self.definiteness {
            Definiteness::StrictlyPd { logdet } => Some(logdet),
            _ => None,
        }
    }

    pub fn is_strictly_pd(&self) -> bool {
        matches!(self.definiteness, Definiteness::StrictlyPd { .. })
    }

    /// Solve `A x = b` in the factor's range. Returns the basic solution
    /// (zero on non-pivoted points) and the norm of the part of `b` outside
    /// the range.
    pub fn solve_in_range(&self, b: &DVector<f64>) -> (DVector<f64>, f64) {
        let r = self.rank();
        let pb = DVector::from_iterator(self.n, self.perm.iter().map(|&i| b[i]));
        let (w, residual) = if r == self.n {
            (forward_substitute(&self.l, &pb), 0.0)
        } else {
            // least squares L w ≈ pb via the normal equations
            let lt = self.l.transpose();
            let gram = &lt * &self.l;
            let rhs = &lt * &pb;
            let g = PivotedCholesky::factor(&gram);
            let w = g.solve_in_range(&rhs).0;
            let res = (&pb - &self.l * &w).norm();
            (w, res)
        };
        let top = self.l.rows(0, r).into_owned();
        let y = back_substitute_transposed(&top, &w);
        let mut x = DVector::zeros(self.n);
        for (k, &orig) in self.perm.iter().take(r).enumerate() {
            x[orig] = y[k];
        }
        (x, residual)
    }

    /// `max |A - L L^T|` in original order.
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        let f = self.unpermuted_factor();
        (a - &f * f.transpose()).amax()
    }
}

/// Solve `L y = b` for the leading square block of a lower-trapezoidal `L`.
fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let r = l.ncols();
    let mut y = DVector::zeros(r);
    for i in 0..r {
        let mut s = b[i];
        for j in 0..i {
            s -= l[(i, j)] * y[j];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solve `L^T x = y` for square lower-triangular `L`.
fn back_substitute_transposed(l: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let r = l.ncols();
    let mut x = DVector::zeros(r);
    for i in (0..r).rev() {
        let mut s = y[i];
        for j in i + 1..r {
            s -= l[(j, i)] * x[j];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Jacobi-preconditioned conjugate gradient for a symmetric positive
/// definite operator. Returns the iterate and the final relative residual.
pub fn conjugate_gradient<F>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut rel = 1.0;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if rel <= rtol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, rel)
}
