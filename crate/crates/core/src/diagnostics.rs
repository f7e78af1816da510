//! Projection-norm traces over nested finite sets and the membership
//! verdict drawn from them.
//!
//! `ζ_n(x) = (K_{F_n}⁻¹ δ_x)(x)` is nondecreasing along any filtration and
//! `δ_x` has finite norm exactly when the supremum is finite. A finite trace
//! can only give evidence for one or the other; [`Membership`] records the
//! evidence together with the tolerances that produced it.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_gram, exact_projection_norm};
use crate::gram::assemble_gram;
use crate::kernel::Kernel;
use crate::point::{Point, PointSet};

/// Allowed decrease between consecutive stages before a trace is rejected.
pub const MONOTONE_ABS_SLACK: f64 = 1e-9;
pub const MONOTONE_REL_SLACK: f64 = 1e-9;

/// Nested point sets `F_1 ⊂ F_2 ⊂ ...`, each extending the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    stages: Vec<PointSet>,
    target: Point,
}

impl Filtration {
    pub fn new(stages: Vec<PointSet>, target: Point) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("filtration has no stages".into()));
        }
        for (i, w) in stages.windows(2).enumerate() {
            let (prev, next) = (w[0].points(), w[1].points());
            if next.len() <= prev.len() || &next[..prev.len()] != prev {
                return Err(Error::InvalidArgument(format!(
                    "stage {} does not strictly extend stage {}",
                    i + 2,
                    i + 1
                )));
            }
        }
        if stages.last().and_then(|s| s.index_of(&target)).is_none() {
            return Err(Error::TargetNotFound(target.to_string()));
        }
        Ok(Self { stages, target })
    }

    /// One point per stage, in the given order.
    pub fn prefixes(points: &PointSet, target: Point) -> Result<Self> {
        let stages = (1..=points.len())
            .filter_map(|n| points.prefix(n))
            .collect();
        Self::new(stages, target)
    }

    /// Stage sizes 1, 2, 4, ..., ending with the full set.
    pub fn doubling(points: &PointSet, target: Point) -> Result<Self> {
        let mut sizes = Vec::new();
        let mut n = 1;
        while n < points.len() {
            sizes.push(n);
            n *= 2;
        }
        sizes.push(points.len());
        let stages = sizes.into_iter().filter_map(|n| points.prefix(n)).collect();
        Self::new(stages, target)
    }

    pub fn stages(&self) -> &[PointSet] {
        &self.stages
    }

    pub fn target(&self) -> &Point {
        &self.target
    }

    /// Zero-based index of the first stage containing the target.
    pub fn first_stage(&self) -> usize {
        self.stages
            .iter()
            .position(|s| s.index_of(&self.target).is_some())
            .expect("checked at construction")
    }
}

/// `ζ_n(target)` per stage, starting at the first stage containing the
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationTrace {
    pub target: Point,
    /// Zero-based index of the first traced stage within the filtration.
    pub first_stage: usize,
    pub stage_sizes: Vec<usize>,
    pub values: Vec<f64>,
    /// `D′_F / D_F` per stage, when the stage is strictly positive definite.
    pub det_ratios: Vec<Option<f64>>,
    /// Whether the values came from exact integer arithmetic.
    pub exact: bool,
}

impl FiltrationTrace {
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// One-based filtration stage number of trace entry `i`.
    pub fn stage_number(&self, i: usize) -> usize {
        self.first_stage + i + 1
    }
}

/// Compute the trace. Stages are independent and evaluated in parallel;
/// the result does not depend on scheduling.
///
/// Kernels with exact integer values are traced by Cramer's rule in exact
/// rational arithmetic; all others use the pivoted floating factorization.
pub fn trace<K: Kernel + ?Sized>(kernel: &K, filtration: &Filtration) -> Result<FiltrationTrace> {
    let target = filtration.target();
    let first = filtration.first_stage();
    let stages = &filtration.stages()[first..];
    let exact = stages.last().is_some_and(|s| kernel.is_exact_on(s));

    let per_stage: Vec<(f64, Option<f64>)> = stages
        .par_iter()
        .map(|stage| {
            if exact {
                let g = exact_gram(kernel, stage).ok_or(Error::SingularGram)?;
                let z = exact_projection_norm(&g, stage, target)?;
                let v = z.to_f64().unwrap_or(f64::INFINITY);
                Ok((v, Some(v)))
            } else {
                let g = assemble_gram(kernel, stage)?;
                let v = g.projection_norm_sq(target)?;
                let ratio = g.det_ratio(target).ok();
                Ok((v, ratio))
            }
        })
        .collect::<Result<_>>()?;

    let values: Vec<f64> = per_stage.iter().map(|p| p.0).collect();
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - MONOTONE_ABS_SLACK - MONOTONE_REL_SLACK * w[0].abs() {
            return Err(Error::MonotonicityViolation {
                stage: first + i + 2,
                previous: w[0],
                current: w[1],
            });
        }
    }

    Ok(FiltrationTrace {
        target: target.clone(),
        first_stage: first,
        stage_sizes: stages.iter().map(PointSet::len).collect(),
        values,
        det_ratios: per_stage.into_iter().map(|p| p.1).collect(),
        exact,
    })
}

/// `D′_F / D_F` for every stage containing the target.
pub fn det_ratio_trace<K: Kernel + ?Sized>(
    kernel: &K,
    filtration: &Filtration,
) -> Result<Vec<f64>> {
    let target = filtration.target();
    filtration.stages()[filtration.first_stage()..]
        .par_iter()
        .map(|stage| assemble_gram(kernel, stage)?.det_ratio(target))
        .collect()
}

/// Thresholds for [`classify`]. These are policy, not mathematics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub tau_stab: f64,
    pub tau_div: f64,
    /// Number of trailing increments inspected.
    pub window: usize,
    /// Log-log growth exponent above which the trace is called divergent.
    pub slope_threshold: f64,
    /// Fitted increment ratio below which the trace is called convergent.
    pub ratio_threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            tau_stab: 1e-10,
            tau_div: 1e-3,
            window: 5,
            slope_threshold: 0.5,
            ratio_threshold: 0.9,
        }
    }
}

/// Evidence about whether `δ_target` has finite norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Membership {
    /// Constant from `stage` (one-based) onward.
    Stabilized {
        limit: f64,
        stage: usize,
    },
    /// Increments shrink geometrically; `estimate` extrapolates the tail.
    Converging {
        estimate: f64,
        last_increment: f64,
    },
    /// `growth_exponent` is the fitted log-log slope of values vs stage size.
    Diverging {
        growth_exponent: f64,
    },
    Inconclusive,
}

/// A membership verdict with the tolerances used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub membership: Membership,
    pub tolerances: ClassifyConfig,
}

pub fn classify(trace: &FiltrationTrace, config: &ClassifyConfig) -> Result<Verdict> {
    let k = config.window.max(1);
    let v = &trace.values;
    let n = v.len();
    if n < k + 1 {
        return Err(Error::TooFewStages {
            needed: k + 1,
            got: n,
        });
    }
    let inc = trace.increments();
    let tail = n - 1 - k..n - 1;
    let small = |i: usize| inc[i].abs() < config.tau_stab * (1.0 + v[i + 1].abs());

    let membership = if tail.clone().all(small) {
        let mut m = n - 1;
        while m > 0 && small(m - 1) {
            m -= 1;
        }
        Membership::Stabilized {
            limit: v[n - 1],
            stage: trace.stage_number(m),
        }
    } else {
        let slope = growth_exponent(&trace.stage_sizes, v, k);
        let large = tail
            .clone()
            .all(|i| inc[i] >= config.tau_div * (1.0 + v[i + 1].abs()));
        if large || slope.is_some_and(|s| s > config.slope_threshold) {
            Membership::Diverging {
                growth_exponent: slope.unwrap_or(f64::NAN),
            }
        } else {
            match increment_ratio(&inc[tail]) {
                Some(rho) if rho < config.ratio_threshold => {
                    let last = inc[n - 2];
                    Membership::Converging {
                        estimate: v[n - 1] + last * rho / (1.0 - rho),
                        last_increment: last,
                    }
                }
                _ => Membership::Inconclusive,
            }
        }
    };
    Ok(Verdict {
        membership,
        tolerances: *config,
    })
}

/// Least-squares slope of `log value` against `log size` over the trailing
/// half of the trace (at least `window + 1` points).
fn growth_exponent(sizes: &[usize], values: &[f64], window: usize) -> Option<f64> {
    let n = values.len();
    let m = (n / 2).max(window + 1).min(n);
    let pts: Vec<(f64, f64)> = sizes[n - m..]
        .iter()
        .zip(&values[n - m..])
        .filter(|(_, v)| **v > 0.0)
        .map(|(s, v)| ((*s as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Geometric mean of successive increment ratios; `None` unless every
/// increment is positive.
fn increment_ratio(inc: &[f64]) -> Option<f64> {
    if inc.len() < 2 || inc.iter().any(|d| *d <= 0.0) {
        return None;
    }
    let logs: f64 = inc.windows(2).map(|w| (w[1] / w[0]).ln()).sum();
    Some((logs / (inc.len() - 1) as f64).exp())
}
