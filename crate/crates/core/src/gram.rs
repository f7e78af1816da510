//! Gram matrices over finite point sets: assembly, positivity, solves,
//! dual bases and projection norms.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{Definiteness, PivotedCholesky};
use crate::point::{Point, PointSet};

/// Projected residual above which `δ_x` is declared outside the range of a
/// singular Gram matrix.
pub const RANGE_TOL: f64 = 1e-8;

/// `K_F = (k(x, y))` over an ordered finite set, with a lazily computed
/// pivoted factorization.
#[derive(Debug)]
pub struct GramMatrix {
    base: PointSet,
    entries: DMatrix<f64>,
    factor: OnceLock<PivotedCholesky>,
}

impl Clone for GramMatrix {
    fn clone(&self) -> Self {
        let factor = OnceLock::new();
        if let Some(f) = self.factor.get() {
            let _ = factor.set(f.clone());
        }
        Self {
            base: self.base.clone(),
            entries: self.entries.clone(),
            factor,
        }
    }
}

/// What a coefficient vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientRole {
    /// `ζ = K_F⁻¹ δ_x`.
    DeltaSolution,
    /// A row of `K_F⁻¹`, the coefficients of a dual-basis element.
    DualBasisRow,
    /// A dipole restricted to the point set.
    DipoleRestriction,
}

/// Real coefficients indexed by a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub base: PointSet,
    pub values: Vec<f64>,
    pub role: CoefficientRole,
}

impl CoefficientVector {
    pub fn get(&self, p: &Point) -> Option<f64> {
        self.base.index_of(p).map(|i| self.values[i])
    }
}

/// Assemble `K_F`. Each off-diagonal pair is evaluated once and mirrored.
pub fn assemble_gram<K: Kernel + ?Sized>(kernel: &K, points: &PointSet) -> Result<GramMatrix> {
    for p in points {
        kernel.check(p)?;
    }
    let pts = points.points();
    let n = pts.len();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_unchecked(&pts[i], &pts[j]);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        base: points.clone(),
        entries,
        factor: OnceLock::new(),
    })
}

impl GramMatrix {
    /// Wrap an explicit symmetric matrix. Labels are "0", "1", ... unless a
    /// base is supplied.
    pub fn from_matrix(base: Option<PointSet>, entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidArgument(
                "Gram matrix must be square and nonempty".into(),
            ));
        }
        let base = match base {
            Some(b) if b.len() == n => b,
            Some(_) => {
                return Err(Error::InvalidArgument(
                    "base size does not match matrix".into(),
                ))
            }
            None => PointSet::new((0..n).map(|i| Point::Vertex(i.to_string())).collect())?,
        };
        for i in 0..n {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            base,
            entries,
            factor: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &PointSet {
        &self.base
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    pub fn factorization(&self) -> &PivotedCholesky {
        self.factor
            .get_or_init(|| PivotedCholesky::factor(&self.entries))
    }

    pub fn check_pd(&self) -> Definiteness {
        self.factorization().definiteness()
    }

    fn index(&self, target: &Point) -> Result<usize> {
        self.base
            .index_of(target)
            .ok_or_else(|| Error::TargetNotFound(target.to_string()))
    }

    /// `ζ^{(F)} = K_F⁻¹ δ_target`, solved in the range of `K_F` when it is
    /// singular.
    pub fn solve_delta(&self, target: &Point) -> Result<CoefficientVector> {
        let t = self.index(target)?;
        let n = self.len();
        let f = self.factorization();
        if let Definiteness::NotPsd { index } = f.definiteness() {
            return Err(Error::NotPsd(index));
        }
        let mut rhs = DVector::zeros(n);
        rhs[t] = 1.0;
        let (mut z, residual) = f.solve_in_range(&rhs);
        if residual > RANGE_TOL {
            return Err(Error::NotInRange {
                target: target.to_string(),
                residual,
            });
        }
        // one step of iterative refinement against the assembled matrix
        let r = &rhs - &self.entries * &z;
        let (dz, _) = f.solve_in_range(&r);
        z += dz;
        Ok(CoefficientVector {
            base: self.base.clone(),
            values: z.iter().copied().collect(),
            role: CoefficientRole::DeltaSolution,
        })
    }

    /// `‖P_F δ_target‖² = (K_F⁻¹ δ_target)(target)`.
    pub fn projection_norm_sq(&self, target: &Point) -> Result<f64> {
        let z = self.solve_delta(target)?;
        let t = self.index(target)?;
        Ok(z.values[t])
    }

    /// `K_F⁻¹`; row `x` holds the coefficients of the dual element `k_x*`.
    pub fn dual_basis(&self) -> Result<DMatrix<f64>> {
        let f = self.factorization();
        if !f.is_strictly_pd() {
            return Err(Error::SingularGram);
        }
        let n = self.len();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let (mut x, _) = f.solve_in_range(&e);
            let r = &e - &self.entries * &x;
            x += f.solve_in_range(&r).0;
            inv.set_column(j, &x);
        }
        // symmetrize the rounding noise away
        let sym = (&inv + inv.transpose()) * 0.5;
        Ok(sym)
    }

    pub fn dual_basis_rows(&self) -> Result<Vec<CoefficientVector>> {
        let inv = self.dual_basis()?;
        Ok((0..self.len())
            .map(|i| CoefficientVector {
                base: self.base.clone(),
                values: inv.row(i).iter().copied().collect(),
                role: CoefficientRole::DualBasisRow,
            })
            .collect())
    }

    /// `log det K_F` from the factorization pivots.
    pub fn log_det(&self) -> Result<f64> {
        self.factorization().logdet().ok_or(Error::SingularGram)
    }

    /// Gram matrix over the same kernel values with `target` deleted.
    pub fn minor(&self, target: &Point) -> Result<Option<GramMatrix>> {
        let t = self.index(target)?;
        let Some(base) = self.base.without(t) else {
            return Ok(None);
        };
        let entries = self.entries.clone().remove_row(t).remove_column(t);
        Ok(Some(GramMatrix {
            base,
            entries,
            factor: OnceLock::new(),
        }))
    }

    /// `D′_F / D_F` from log-determinants; the empty minor has determinant 1.
    pub fn det_ratio(&self, target: &Point) -> Result<f64> {
        let full = self.log_det()?;
        let minor = match self.minor(target)? {
            Some(m) => m.log_det()?,
            None => 0.0,
        };
        Ok((minor - full).exp())
    }

    /// Quadratic form `cᵗ K_F c`.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let v = DVector::from_column_slice(c);
        v.dot(&(&self.entries * &v))
    }

    /// CSV with a header row of point labels.
    pub fn to_csv(&self) -> String {
        crate::io::matrix_csv(&self.base, &self.entries)
    }
}
