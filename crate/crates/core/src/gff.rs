//! Seeded joint-Gaussian sampling with a prescribed PD covariance, and the
//! Gaussian realization of point-masses on a network.
//!
//! Draws are `X = F z` with `F Fᵗ = K_F` from the pivoted factorization
//! (truncated to the numerical rank) and `z` standard normal. Row `i` of the
//! sample matrix uses a ChaCha8 stream selected by `i` under the user seed,
//! normals come from the ziggurat sampler of `rand_distr`, so draw `(i, j)`
//! depends only on `(seed, i, j)` however the rows are split across threads.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::Definiteness;
use crate::network::Network;
use crate::point::{Point, PointSet};

/// `n` joint draws over `base`, one per row.
#[derive(Debug, Clone)]
pub struct GffSampleSet {
    pub base: PointSet,
    pub samples: DMatrix<f64>,
    pub seed: u64,
    pub covariance: DMatrix<f64>,
}

pub fn sample(gram: &GramMatrix, n: usize, seed: u64) -> Result<GffSampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let f = gram.factorization();
    if let Definiteness::NotPsd { index } = f.definiteness() {
        return Err(Error::NotPsd(index));
    }
    let factor = f.unpermuted_factor();
    let (dim, rank) = factor.shape();

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let z: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut rng)).collect();
            (0..dim)
                .map(|p| (0..rank).map(|r| factor[(p, r)] * z[r]).sum())
                .collect()
        })
        .collect();

    let samples = DMatrix::from_fn(n, dim, |i, j| rows[i][j]);
    Ok(GffSampleSet {
        base: gram.base().clone(),
        samples,
        seed,
        covariance: gram.entries().clone(),
    })
}

impl GffSampleSet {
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn column(&self, p: &Point) -> Option<Vec<f64>> {
        let j = self.base.index_of(p)?;
        Some(self.samples.column(j).iter().copied().collect())
    }

    pub fn means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.samples.column_iter().map(|c| c.sum() / n).collect()
    }

    /// `(1/n) Σ X_x X_y`, using the known zero mean.
    pub fn empirical_covariance(&self) -> DMatrix<f64> {
        let n = self.len() as f64;
        self.samples.transpose() * &self.samples / n
    }

    /// Five standard errors of each covariance entry:
    /// `5 / √n · (K_xx K_yy + K_xy²)^{1/2}`.
    pub fn covariance_tolerance(&self) -> DMatrix<f64> {
        let k = &self.covariance;
        let s = 5.0 / (self.len() as f64).sqrt();
        DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| {
            s * (k[(i, i)] * k[(j, j)] + k[(i, j)].powi(2)).sqrt()
        })
    }

    /// Largest ratio `|Ĉ - K| / tolerance` over all entries; below 1 means
    /// every entry lies within five standard errors.
    pub fn covariance_z_max(&self) -> f64 {
        let emp = self.empirical_covariance();
        let tol = self.covariance_tolerance();
        emp.iter()
            .zip(self.covariance.iter())
            .zip(tol.iter())
            .map(|((e, k), t)| (e - k).abs() / t)
            .fold(0.0, f64::max)
    }
}

/// `δ̃_x = c(x) X_x - Σ_{y~x} c_xy X_y` for each draw; `X_o = 0`.
pub fn delta_realization(net: &Network, samples: &GffSampleSet, x: &str) -> Result<Vec<f64>> {
    let xi = net.vertex(x)?;
    let mut terms = Vec::new();
    for (pole, coeff) in net.delta_expand(xi) {
        let label = Point::Vertex(net.name(pole).to_string());
        let j = samples
            .base
            .index_of(&label)
            .ok_or_else(|| Error::MissingNeighbor {
                vertex: x.to_string(),
                neighbor: net.name(pole).to_string(),
            })?;
        terms.push((j, coeff));
    }
    Ok(samples
        .samples
        .row_iter()
        .map(|row| terms.iter().map(|&(j, c)| c * row[j]).sum())
        .collect())
}

/// Exact covariance `E(δ̃_x X_y) = c(x) k(x, y) - Σ_z c_xz k(z, y)`.
pub fn delta_covariance(net: &Network, x: usize, y: usize) -> Result<f64> {
    net.delta_expand(x)
        .into_iter()
        .map(|(pole, c)| Ok(c * net.green(pole, y)?))
        .sum()
}

/// Slack in `k(x, z) + k(z, y) <= k(x, y) + R(o, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCheck {
    pub holds: bool,
    pub margin: f64,
}

/// Checks the covariance triangle inequality with exact kernel values. A
/// margin above `-1e-12 · scale` counts as holding.
pub fn covariance_triangle_check(
    net: &Network,
    x: usize,
    y: usize,
    z: usize,
) -> Result<TriangleCheck> {
    for v in [x, y, z] {
        if v == net.base() {
            return Err(Error::BasePoint(net.name(v).to_string()));
        }
    }
    let r_oz = net.resistance(net.base(), z)?;
    let margin = net.green(x, y)? + r_oz - net.green(x, z)? - net.green(z, y)?;
    let scale = 1.0 + r_oz + net.green(x, x)?.abs() + net.green(y, y)?.abs();
    Ok(TriangleCheck {
        holds: margin >= -1e-12 * scale,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::BrownianKernel;
    use crate::gram::assemble_gram;
    use crate::network::green_kernel;
    use std::sync::Arc;

    #[test]
    fn identity_covariance() {
        let g = GramMatrix::from_matrix(None, DMatrix::identity(3, 3)).unwrap();
        let s = sample(&g, 20_000, 7).unwrap();
        let tol = 5.0 / (s.len() as f64).sqrt();
        let emp = s.empirical_covariance();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((emp[(i, j)] - e).abs() < tol * 2f64.sqrt());
            }
        }
        assert!(s.means().iter().all(|m| m.abs() < tol));
    }

    #[test]
    fn brownian_covariance() {
        let g = assemble_gram(&BrownianKernel, &PointSet::reals(&[1.0, 2.0]).unwrap()).unwrap();
        let s = sample(&g, 100_000, 42).unwrap();
        assert!(s.covariance_z_max() < 1.0);
    }

    #[test]
    fn deterministic_by_seed() {
        let g =
            assemble_gram(&BrownianKernel, &PointSet::reals(&[1.0, 2.0, 4.0]).unwrap()).unwrap();
        let a = sample(&g, 1000, 3).unwrap();
        let b = sample(&g, 1000, 3).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sample(&g, 1000, 4).unwrap();
        assert_ne!(a.samples, c.samples);
        // a prefix of draws is unchanged by asking for more
        let d = sample(&g, 1500, 3).unwrap();
        assert_eq!(a.samples.rows(0, 1000), d.samples.rows(0, 1000));
    }

    #[test]
    fn rank_deficient_covariance() {
        let g = GramMatrix::from_matrix(None, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]))
            .unwrap();
        let s = sample(&g, 10, 1).unwrap();
        for row in s.samples.row_iter() {
            assert!((row[0] - row[1]).abs() < 1e-12);
        }
        let bad =
            GramMatrix::from_matrix(None, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
                .unwrap();
        assert_eq!(sample(&bad, 10, 1).unwrap_err(), Error::NotPsd(1));
    }

    #[test]
    fn delta_realization_on_path() {
        let net = Arc::new(
            Network::new(&["o", "a", "b"], "o", &[("o", "a", 1.0), ("a", "b", 1.0)]).unwrap(),
        );
        let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points()).unwrap();
        let n = 100_000;
        let s = sample(&g, n, 42).unwrap();
        let d = delta_realization(&net, &s, "a").unwrap();
        let var = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let c = net.delta_norm_sq(net.vertex("a").unwrap());
        assert!((var - c).abs() < 5.0 * (2.0 / n as f64).sqrt() * c);
        // E(δ̃_a X_y) = 1{a = y}
        let xa = s.column(&"a".into()).unwrap();
        let xb = s.column(&"b".into()).unwrap();
        let cov_a = d.iter().zip(&xa).map(|(u, v)| u * v).sum::<f64>() / n as f64;
        let cov_b = d.iter().zip(&xb).map(|(u, v)| u * v).sum::<f64>() / n as f64;
        assert!((cov_a - 1.0).abs() < 0.05);
        assert!(cov_b.abs() < 0.05);
        let (a, b) = (net.vertex("a").unwrap(), net.vertex("b").unwrap());
        assert!((delta_covariance(&net, a, a).unwrap() - 1.0).abs() < 1e-9);
        assert!(delta_covariance(&net, a, b).unwrap().abs() < 1e-9);
    }

    #[test]
    fn single_draw() {
        let net = Arc::new(Network::new(&["o", "a"], "o", &[("o", "a", 2.0)]).unwrap());
        let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points()).unwrap();
        let s = sample(&g, 1, 9).unwrap();
        assert_eq!(delta_realization(&net, &s, "a").unwrap().len(), 1);
    }

    #[test]
    fn missing_neighbor() {
        let net = Arc::new(
            Network::new(&["o", "a", "b"], "o", &[("o", "a", 1.0), ("a", "b", 1.0)]).unwrap(),
        );
        let g = assemble_gram(
            &green_kernel(net.clone()),
            &PointSet::vertices(&["a"]).unwrap(),
        )
        .unwrap();
        let s = sample(&g, 5, 1).unwrap();
        assert!(matches!(
            delta_realization(&net, &s, "a"),
            Err(Error::MissingNeighbor { .. })
        ));
    }

    #[test]
    fn triangle_examples() {
        let net = Network::new(&["o", "a", "b"], "o", &[("o", "a", 1.0), ("a", "b", 1.0)]).unwrap();
        let (a, b) = (net.vertex("a").unwrap(), net.vertex("b").unwrap());
        let t = covariance_triangle_check(&net, a, b, b).unwrap();
        assert!(t.holds);
        assert!(t.margin.abs() < 1e-12);
        let t = covariance_triangle_check(&net, b, b, b).unwrap();
        assert!(t.holds);
        assert!(covariance_triangle_check(&net, net.base(), a, b).is_err());
    }
}
