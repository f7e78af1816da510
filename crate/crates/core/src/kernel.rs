//! Positive-definite kernels on countable point sets.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::point::{Point, PointSet};

/// Where a kernel is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Reals s > 0.
    PositiveReals,
    /// Reals 0 < s < 1.
    OpenUnitInterval,
    /// Integers n >= 0.
    NonnegativeIntegers,
    /// Named vertices of a network, excluding its base point.
    NetworkVertices,
    /// Labels listed in an explicit table.
    Table,
}

impl Domain {
    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Domain::PositiveReals, Point::Real(x)) => x.is_finite() && *x > 0.0,
            (Domain::PositiveReals, Point::Int(n)) => *n > 0,
            (Domain::OpenUnitInterval, Point::Real(x)) => *x > 0.0 && *x < 1.0,
            (Domain::NonnegativeIntegers, Point::Int(_)) => true,
            (Domain::NetworkVertices | Domain::Table, Point::Vertex(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::PositiveReals => "positive reals",
            Domain::OpenUnitInterval => "open unit interval",
            Domain::NonnegativeIntegers => "nonnegative integers",
            Domain::NetworkVertices => "network vertices",
            Domain::Table => "table labels",
        })
    }
}

/// A symmetric positive-definite function on pairs of points.
///
/// Implementations must be pure: the same pair always evaluates to the same
/// value, and `eval(x, y) == eval(y, x)`.
pub trait Kernel: Send + Sync {
    fn domain(&self) -> Domain;

    fn name(&self) -> &str;

    /// Evaluate on a pair already known to lie in the domain.
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64;

    /// Whether the label lies in the domain. Defaults to the domain
    /// descriptor; table-backed kernels narrow it further.
    fn accepts(&self, p: &Point) -> bool {
        self.domain().contains(p)
    }

    /// Exact integer value, for kernels with integer-valued entries.
    fn eval_exact(&self, _x: &Point, _y: &Point) -> Option<BigInt> {
        None
    }

    fn check(&self, p: &Point) -> Result<()> {
        if self.accepts(p) {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                point: p.to_string(),
                domain: self.domain().to_string(),
            })
        }
    }

    fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// True when every entry over `points` has an exact integer value.
    fn is_exact_on(&self, points: &PointSet) -> bool {
        points.iter().all(|p| self.eval_exact(p, p).is_some())
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        (**self).eval_unchecked(x, y)
    }
    fn accepts(&self, p: &Point) -> bool {
        (**self).accepts(p)
    }
    fn eval_exact(&self, x: &Point, y: &Point) -> Option<BigInt> {
        (**self).eval_exact(x, y)
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        (**self).eval_unchecked(x, y)
    }
    fn accepts(&self, p: &Point) -> bool {
        (**self).accepts(p)
    }
    fn eval_exact(&self, x: &Point, y: &Point) -> Option<BigInt> {
        (**self).eval_exact(x, y)
    }
}

impl<K: Kernel + ?Sized> Kernel for std::sync::Arc<K> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        (**self).eval_unchecked(x, y)
    }
    fn accepts(&self, p: &Point) -> bool {
        (**self).accepts(p)
    }
    fn eval_exact(&self, x: &Point, y: &Point) -> Option<BigInt> {
        (**self).eval_exact(x, y)
    }
}

/// Kernel given by an explicit symmetric table over named labels.
#[derive(Debug, Clone)]
pub struct TableKernel {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TableKernel {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyPointSet);
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "table must be {n}x{n} to match its labels"
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicatePoint(l.clone()));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if values[i][j] != values[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "table is not symmetric at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self { labels, values })
    }

    /// Table over labels "0", "1", ... from a square matrix.
    pub fn from_matrix(values: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        Self::new(labels, values)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn index(&self, p: &Point) -> Option<usize> {
        let v = p.as_vertex()?;
        self.labels.iter().position(|l| l == v)
    }
}

impl Kernel for TableKernel {
    fn domain(&self) -> Domain {
        Domain::Table
    }

    fn name(&self) -> &str {
        "table"
    }

    fn accepts(&self, p: &Point) -> bool {
        self.index(p).is_some()
    }

    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self.index(x), self.index(y)) {
            (Some(i), Some(j)) => self.values[i][j],
            _ => f64::NAN,
        }
    }
}
