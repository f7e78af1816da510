//! Brownian motion and Brownian bridge covariance kernels, with their
//! closed-form determinants and point-mass norms.

use crate::error::{Error, Result};
use crate::kernel::{Domain, Kernel};
use crate::point::{Point, PointSet};

/// `k(s, t) = min(s, t)` on `s, t > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BrownianKernel;

impl Kernel for BrownianKernel {
    fn domain(&self) -> Domain {
        Domain::PositiveReals
    }

    fn name(&self) -> &str {
        "brownian"
    }

    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        let (s, t) = (
            x.as_real().unwrap_or(f64::NAN),
            y.as_real().unwrap_or(f64::NAN),
        );
        s.min(t)
    }
}

/// `k(s, t) = min(s, t) - s t` on `0 < s, t < 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BridgeKernel;

impl Kernel for BridgeKernel {
    fn domain(&self) -> Domain {
        Domain::OpenUnitInterval
    }

    fn name(&self) -> &str {
        "bridge"
    }

    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        let (s, t) = (
            x.as_real().unwrap_or(f64::NAN),
            y.as_real().unwrap_or(f64::NAN),
        );
        s.min(t) - s * t
    }
}

fn increasing_in(points: &PointSet, domain: Domain) -> Result<Vec<f64>> {
    let xs = points.increasing_reals()?;
    for p in points {
        if !domain.contains(p) {
            return Err(Error::DomainMismatch {
                point: p.to_string(),
                domain: domain.to_string(),
            });
        }
    }
    Ok(xs)
}

/// Squared norm of `δ_{x_i}` (zero-based `index`) for the Brownian kernel on
/// an increasing sequence, from the neighbor gaps:
/// `(x_{i+1} - x_{i-1}) / ((x_i - x_{i-1})(x_{i+1} - x_i))` with `x_{-1} = 0`.
///
/// The largest point of a finite set has no right neighbor and gives
/// [`Error::BoundaryIndex`]; use a Gram solve there instead.
pub fn bm_delta_norm_sq(points: &PointSet, index: usize) -> Result<f64> {
    let xs = increasing_in(points, Domain::PositiveReals)?;
    if index >= xs.len() {
        return Err(Error::IndexOutOfRange {
            index,
            len: xs.len(),
        });
    }
    if index + 1 == xs.len() {
        return Err(Error::BoundaryIndex(index));
    }
    let left = if index == 0 { 0.0 } else { xs[index - 1] };
    Ok(neighbor_gap_formula(left, xs[index], xs[index + 1]))
}

fn neighbor_gap_formula(left: f64, x: f64, right: f64) -> f64 {
    (right - left) / ((x - left) * (right - x))
}

/// `log(x_1 (x_2 - x_1) ... (x_n - x_{n-1}))`.
pub fn bm_log_det(points: &PointSet) -> Result<f64> {
    let xs = increasing_in(points, Domain::PositiveReals)?;
    Ok(log_gap_product(&xs))
}

pub fn bm_det(points: &PointSet) -> Result<f64> {
    bm_log_det(points).map(f64::exp)
}

fn log_gap_product(xs: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &x in xs {
        acc += (x - prev).ln();
        prev = x;
    }
    acc
}

/// `log(x_1 (x_2 - x_1) ... (x_n - x_{n-1}) (1 - x_n))`.
pub fn bridge_log_det(points: &PointSet) -> Result<f64> {
    let xs = increasing_in(points, Domain::OpenUnitInterval)?;
    let last = *xs.last().expect("point sets are nonempty");
    Ok(log_gap_product(&xs) + (1.0 - last).ln())
}

pub fn bridge_det(points: &PointSet) -> Result<f64> {
    bridge_log_det(points).map(f64::exp)
}

/// Squared norm of `δ_{x_i}` for the bridge kernel. The pinned endpoints
/// 0 and 1 serve as the outer neighbors of the first and last points.
pub fn bridge_delta_norm_sq(points: &PointSet, index: usize) -> Result<f64> {
    let xs = increasing_in(points, Domain::OpenUnitInterval)?;
    if index >= xs.len() {
        return Err(Error::IndexOutOfRange {
            index,
            len: xs.len(),
        });
    }
    let left = if index == 0 { 0.0 } else { xs[index - 1] };
    let right = xs.get(index + 1).copied().unwrap_or(1.0);
    Ok(neighbor_gap_formula(left, xs[index], right))
}
