use std::path::PathBuf;
use std::sync::Arc;

use num_bigint::BigInt;
use pointmass::binomial::binomial;
use pointmass::gff::{delta_realization, sample};
use pointmass::tree::{
    boundary_resistance, build_tree, energy_histogram, histogram_csv, tree_delta_norm_closed,
    LevelWeights, Word,
};
use pointmass::{
    assemble_gram, binomial_partial_norm, bm_log_det, bridge_delta_norm_sq, bridge_log_det,
    classify, green_kernel, pascal_factorization, trace, BinomialKernel, BridgeKernel,
    BrownianKernel, ClassifyConfig, Filtration, Membership, Network, Point, PointSet,
};

use crate::commands::DEFAULT_SAMPLES;
use crate::config::{emit, FileConfig, DEFAULT_SEED};
use crate::{Failure, ReproduceArgs};

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn new() -> Self {
        Self {
            passed: 0,
            failed: 0,
        }
    }

    fn check(
        &mut self,
        name: &str,
        ok: bool,
        observed: impl std::fmt::Display,
        expected: impl std::fmt::Display,
    ) {
        println!(
            "{} {name}: observed {observed}, expected {expected}",
            if ok { "PASS" } else { "FAIL" }
        );
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    /// Relative closeness `|a - b| <= tol · max(|b|, 1e-300)`.
    fn close(&mut self, name: &str, observed: f64, expected: f64, tol: f64) {
        let ok = (observed - expected).abs() <= tol * expected.abs().max(1e-300);
        self.check(name, ok, observed, format!("{expected} (rel tol {tol:e})"));
    }
}

pub fn run(args: ReproduceArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let mut r = Report::new();
    match args.name.as_str() {
        "brownian" => brownian(&mut r)?,
        "bridge" => bridge(&mut r)?,
        "binomial" => binomial_checks(&mut r)?,
        "network-path" => network_path(&mut r)?,
        "tree" => {
            let depth = args.depth.or(cfg.depth).unwrap_or(6);
            let out = args.out.clone().or(cfg.out.clone());
            tree(&mut r, depth, out)?
        }
        "gff" => {
            let n = args.n.or(cfg.n).unwrap_or(DEFAULT_SAMPLES);
            gff(&mut r, n, args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED))?
        }
        other => {
            return Err(Failure::Input(format!(
                "unknown example {other:?}; expected brownian, bridge, binomial, network-path, tree or gff"
            )))
        }
    }
    println!("{} passed, {} failed", r.passed, r.failed);
    if r.failed > 0 {
        return Err(Failure::Check(format!(
            "{} of {} checks",
            r.failed,
            r.passed + r.failed
        )));
    }
    Ok(())
}

fn reals(xs: &[f64]) -> Result<PointSet, Failure> {
    Ok(PointSet::reals(xs)?)
}

/// Fixed increasing point sets used by the determinant checks.
fn sample_sets() -> Vec<Vec<f64>> {
    vec![
        vec![0.5],
        vec![1.0, 2.0, 3.0, 5.0, 8.0],
        vec![0.1, 0.25, 0.7, 1.9, 2.0, 4.5],
        (1..=12).map(|i| (i as f64).sqrt()).collect(),
    ]
}

fn brownian(r: &mut Report) -> Result<(), Failure> {
    let xs: Vec<f64> = (1..=10).map(f64::from).collect();
    let ps = reals(&xs)?;
    let g = assemble_gram(&BrownianKernel, &ps)?;
    for i in 0..9 {
        let left = if i == 0 { 0.0 } else { xs[i - 1] };
        let expected = (xs[i + 1] - left) / ((xs[i] - left) * (xs[i + 1] - xs[i]));
        r.close(
            &format!("norm at x = {}", xs[i]),
            g.projection_norm_sq(&ps.points()[i])?,
            expected,
            1e-9,
        );
    }
    let t = trace(
        &BrownianKernel,
        &Filtration::prefixes(&ps, Point::Real(1.0))?,
    )?;
    let v = classify(&t, &ClassifyConfig::default())?.membership;
    r.check(
        "trace for x = 1 stabilizes at stage 2",
        matches!(v, Membership::Stabilized { stage: 2, .. }),
        format!("{v:?}"),
        "Stabilized at stage 2",
    );
    for set in sample_sets() {
        let ps = reals(&set)?;
        let computed = assemble_gram(&BrownianKernel, &ps)?.log_det()?;
        r.close(
            &format!("log det over {} points", set.len()),
            computed,
            bm_log_det(&ps)?,
            1e-9,
        );
    }
    let sparse: Vec<f64> = (2..=21).map(|i| (i * (i - 1) / 2) as f64).collect();
    let g = assemble_gram(&BrownianKernel, &reals(&sparse)?)?;
    for i in [2usize, 5, 10, 20] {
        let expected = (2 * i - 1) as f64 / ((i - 1) * i) as f64;
        let x = Point::Real((i * (i - 1) / 2) as f64);
        r.close(
            &format!("sparse norm i = {i}"),
            g.projection_norm_sq(&x)?,
            expected,
            1e-9,
        );
    }
    let mut acc = vec![1.0];
    acc.extend((2..=200).map(|n| 1.0 - 1.0 / n as f64));
    let t = trace(
        &BrownianKernel,
        &Filtration::prefixes(&reals(&acc)?, Point::Real(1.0))?,
    )?;
    let v = classify(&t, &ClassifyConfig::default())?.membership;
    r.check(
        "accumulation point 1 diverges",
        matches!(v, Membership::Diverging { .. }),
        format!("{v:?}"),
        "Diverging",
    );
    Ok(())
}

fn bridge(r: &mut Report) -> Result<(), Failure> {
    let sets = [
        vec![0.5],
        vec![0.1, 0.3, 0.35, 0.8],
        (1..=9).map(|i| i as f64 / 10.0).collect(),
    ];
    for set in &sets {
        let ps = reals(set)?;
        let g = assemble_gram(&BridgeKernel, &ps)?;
        r.close(
            &format!("log det over {} points", set.len()),
            g.log_det()?,
            bridge_log_det(&ps)?,
            1e-9,
        );
        for i in 0..set.len() {
            r.close(
                &format!("norm at {} among {} points", set[i], set.len()),
                g.projection_norm_sq(&ps.points()[i])?,
                bridge_delta_norm_sq(&ps, i)?,
                1e-9,
            );
        }
    }
    let near: Vec<f64> = (1..=10).map(|j| 1.0 - 0.5_f64.powi(j)).collect();
    let ps = reals(&near)?;
    let g = assemble_gram(&BridgeKernel, &ps)?;
    let norms = ps
        .iter()
        .map(|p| g.projection_norm_sq(p))
        .collect::<pointmass::Result<Vec<_>>>()?;
    r.check(
        "norms at 1 - 2^-j increase",
        norms.windows(2).all(|w| w[1] > w[0]),
        format!("{:.1} .. {:.1}", norms[0], norms[9]),
        "strictly increasing",
    );
    r.close("norm at 1 - 2^-10", norms[9], 2048.0, 1e-9);
    Ok(())
}

fn binomial_checks(r: &mut Report) -> Result<(), Failure> {
    let mut factor_ok = true;
    let mut inverse_ok = true;
    for n in 0..=20 {
        let (l, k) = pascal_factorization(n);
        factor_ok &= l.matrix() * &l.matrix().transpose() == k;
        let inv = l.inverse();
        for x in 0..=n {
            for y in 0..=n {
                let c = binomial(x as u64, y as u64);
                inverse_ok &= *inv.get(x, y) == if (x + y) % 2 == 0 { c.clone() } else { -c };
            }
        }
    }
    r.check("K_n = L L^t for n <= 20", factor_ok, factor_ok, true);
    r.check(
        "L^-1 entries (-1)^(x-y) C(x,y)",
        inverse_ok,
        inverse_ok,
        true,
    );
    let mut alt_ok = true;
    for n in 0..=12u64 {
        for m in 0..=n {
            let s: BigInt = (0..=n)
                .map(|j| {
                    let t = binomial(n, j) * binomial(j, m);
                    if (m + j) % 2 == 0 {
                        t
                    } else {
                        -t
                    }
                })
                .sum();
            alt_ok &= s == BigInt::from(u8::from(m == n));
        }
    }
    r.check(
        "alternating sum identity for m <= n <= 12",
        alt_ok,
        alt_ok,
        true,
    );
    for (x1, n) in [(0u64, 30u64), (3, 20), (17, 34)] {
        let expected: BigInt = (x1..=n).map(|k| binomial(k, x1).pow(2)).sum();
        let got = binomial_partial_norm(x1, n)?;
        r.check(
            &format!("partial norm x1 = {x1}, n = {n}"),
            got == expected,
            &got,
            &expected,
        );
    }
    let ps = PointSet::ints(&(0..=30).collect::<Vec<_>>())?;
    for target in 0..=3u64 {
        let t = trace(
            &BinomialKernel,
            &Filtration::prefixes(&ps, Point::Int(target))?,
        )?;
        let v = classify(&t, &ClassifyConfig::default())?.membership;
        r.check(
            &format!("target {target} diverges"),
            t.exact && matches!(v, Membership::Diverging { .. }),
            format!("{v:?}"),
            "Diverging",
        );
    }
    Ok(())
}

fn network_path(r: &mut Report) -> Result<(), Failure> {
    let xs = [1.0, 2.0, 3.0, 5.0, 8.0];
    let net = Arc::new(Network::coordinate_path(&xs)?);
    let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points())?;
    let bm = assemble_gram(&BrownianKernel, &reals(&xs)?)?;
    let err = (g.entries() - bm.entries()).amax();
    r.check(
        "Green Gram equals min(x, y)",
        err <= 1e-9,
        format!("{err:.3e}"),
        "<= 1e-9",
    );
    let inv = g.dual_basis()?;
    for (i, x) in net.non_base().enumerate() {
        if net.is_interior(x) {
            r.close(
                &format!("c({}) equals inverse Gram diagonal", net.name(x)),
                net.delta_norm_sq(x),
                inv[(i, i)],
                1e-9,
            );
        }
    }
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            let (x, y) = (net.vertex(&a.to_string())?, net.vertex(&b.to_string())?);
            r.close(&format!("R({a}, {b})"), net.resistance(x, y)?, b - a, 1e-9);
        }
    }
    Ok(())
}

fn tree(r: &mut Report, depth: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let w = LevelWeights::geometric(0.5)?;
    let net = build_tree(depth, &w)?;
    let mut worst = 0.0f64;
    for x in net.non_base().filter(|&x| net.is_interior(x)) {
        let closed = tree_delta_norm_closed(&Word::parse(net.name(x))?, &w, depth)?;
        worst = worst.max((closed - net.delta_norm_sq(x)).abs() / closed);
        let f = net.evaluate_dipole_combination(&net.delta_expand(x))?;
        worst = worst.max((net.energy(&f) - closed).abs() / closed);
    }
    r.check(
        &format!("closed-form energies at interior words, depth {depth}"),
        worst <= 1e-9,
        format!("max rel err {worst:.3e}"),
        "<= 1e-9",
    );
    let a = Word::new(vec![false; depth]);
    for split in 0..depth {
        let mut bits = vec![false; depth];
        bits[split] = true;
        let br = boundary_resistance(&net, &a, &Word::new(bits), &w, depth)?;
        r.close(
            &format!("boundary resistance, split level {split}"),
            br.network,
            br.series,
            1e-9,
        );
    }
    let rows = energy_histogram(depth, &w)?;
    let total: u64 = rows.iter().map(|h| h.multiplicity).sum();
    r.check(
        "histogram multiplicities",
        total == (1u64 << depth) - 2,
        total,
        (1u64 << depth) - 2,
    );
    let path = out.unwrap_or_else(|| PathBuf::from(format!("tree_histogram_depth{depth}.csv")));
    emit(Some(&path), &histogram_csv(&rows, &w))?;
    println!("histogram written to {}", path.display());
    Ok(())
}

fn gff(r: &mut Report, n: usize, seed: u64) -> Result<(), Failure> {
    let net = Arc::new(Network::coordinate_path(&[1.0, 2.0, 3.0, 5.0, 8.0])?);
    let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points())?;
    let s = sample(&g, n, seed)?;
    let z = s.covariance_z_max();
    r.check(
        "covariance within 5 standard errors",
        z < 1.0,
        format!("max |err|/5SE {z:.3}"),
        "< 1",
    );
    for x in net.non_base() {
        let d = delta_realization(&net, &s, net.name(x))?;
        let var = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let c = net.delta_norm_sq(x);
        let tol = 5.0 * c * (2.0 / n as f64).sqrt();
        r.check(
            &format!("Var of delta at {}", net.name(x)),
            (var - c).abs() <= tol,
            var,
            format!("{c} +/- {tol:.3e}"),
        );
    }
    let again = sample(&g, n, seed)?;
    r.check(
        "identical draws for the same seed",
        again.samples == s.samples,
        again.samples == s.samples,
        true,
    );
    Ok(())
}
