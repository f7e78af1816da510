//! Exit criteria. Each test prints one PASS/FAIL line per criterion and
//! then asserts it. Run with `--nocapture` to see the report.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use pointmass::gff::{covariance_triangle_check, delta_realization, sample};
use pointmass::tree::{
    boundary_resistance, build_tree, energy_histogram, tree_delta_norm_closed, LevelWeights, Word,
};
use pointmass::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, what: &str, ok: bool, detail: String) {
    println!(
        "[{}] AC-{id} {what}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "AC-{id} {what} failed: {detail}");
}

fn reals(xs: &[f64]) -> PointSet {
    PointSet::reals(xs).unwrap()
}

#[test]
fn ac01_brownian_norms() {
    let start = Instant::now();
    let xs: Vec<f64> = (1..=10).map(f64::from).collect();
    let ps = reals(&xs);
    let g = assemble_gram(&BrownianKernel, &ps).unwrap();
    let mut worst = 0.0f64;
    for i in 0..9 {
        let solved = g.projection_norm_sq(&ps.points()[i]).unwrap();
        let left = if i == 0 { 0.0 } else { xs[i - 1] };
        let expected = (xs[i + 1] - left) / ((xs[i] - left) * (xs[i + 1] - xs[i]));
        worst = worst.max((solved - expected).abs() / expected);
    }
    let first = g.projection_norm_sq(&Point::Real(1.0)).unwrap();
    let t = trace(
        &BrownianKernel,
        &Filtration::prefixes(&ps, Point::Real(1.0)).unwrap(),
    )
    .unwrap();
    let verdict = classify(&t, &ClassifyConfig::default()).unwrap().membership;
    let stabilized =
        matches!(verdict, Membership::Stabilized { stage: 2, limit } if (limit - 2.0).abs() < 1e-9);
    let elapsed = start.elapsed();
    report(
        "01",
        "Brownian norms",
        worst <= 1e-9
            && (first - 2.0).abs() <= 2e-9
            && stabilized
            && elapsed < Duration::from_secs(1),
        format!("max rel err {worst:.2e}, ||d_x1||^2 = {first}, verdict {verdict:?}, {elapsed:?}"),
    );
}

#[test]
fn ac02_brownian_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=12);
        let ps = reals(&random_increasing(&mut rng, n, 0.0));
        let a = assemble_gram(&BrownianKernel, &ps)
            .unwrap()
            .log_det()
            .unwrap();
        let b = bm_log_det(&ps).unwrap();
        // compare determinants: relative error of exp(a) vs exp(b)
        worst = worst.max(((a - b).exp() - 1.0).abs());
    }
    report(
        "02",
        "Brownian determinants",
        worst <= 1e-9,
        format!("max rel err {worst:.2e} over 50 sets"),
    );
}

#[test]
fn ac03_sparse_points() {
    // x_i = i(i-1)/2; x_1 = 0 is the pinned origin of the kernel itself
    let xs: Vec<f64> = (2..=21).map(|i| (i * (i - 1) / 2) as f64).collect();
    let ps = reals(&xs);
    let g = assemble_gram(&BrownianKernel, &ps).unwrap();
    let mut worst = 0.0f64;
    let mut norms = Vec::new();
    for i in 2..=20usize {
        let solved = g
            .projection_norm_sq(&Point::Real((i * (i - 1) / 2) as f64))
            .unwrap();
        let expected = (2 * i - 1) as f64 / ((i - 1) * i) as f64;
        worst = worst.max((solved - expected).abs());
        norms.push(solved);
    }
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    report(
        "03",
        "sparse-point limit",
        worst <= 1e-9 && decreasing && *norms.last().unwrap() < 0.11,
        format!(
            "max err {worst:.2e}, norm at i=20 {:.4}",
            norms.last().unwrap()
        ),
    );
}

#[test]
fn ac04_accumulation_divergence() {
    let start = Instant::now();
    let mut pts = vec![1.0];
    pts.extend((2..=200).map(|n| 1.0 - 1.0 / n as f64));
    let ps = reals(&pts);
    let t = trace(
        &BrownianKernel,
        &Filtration::prefixes(&ps, Point::Real(1.0)).unwrap(),
    )
    .unwrap();
    let v = classify(&t, &ClassifyConfig::default()).unwrap().membership;
    let elapsed = start.elapsed();
    report(
        "04",
        "accumulation divergence",
        matches!(v, Membership::Diverging { .. }) && elapsed < Duration::from_secs(5),
        format!(
            "last value {:.3}, verdict {v:?}, {elapsed:?}",
            t.values.last().unwrap()
        ),
    );
}

#[test]
fn ac05_bridge() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut det_err = 0.0f64;
    let mut norm_err = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=12);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let ps = reals(&xs);
        let g = assemble_gram(&BridgeKernel, &ps).unwrap();
        det_err =
            det_err.max(((g.log_det().unwrap() - bridge_log_det(&ps).unwrap()).exp() - 1.0).abs());
        for i in 0..xs.len() {
            let a = g.projection_norm_sq(&ps.points()[i]).unwrap();
            let b = bridge_delta_norm_sq(&ps, i).unwrap();
            norm_err = norm_err.max((a - b).abs() / b);
        }
    }
    let near: Vec<f64> = (1..=10).map(|j| 1.0 - 0.5_f64.powi(j)).collect();
    let ps = reals(&near);
    let g = assemble_gram(&BridgeKernel, &ps).unwrap();
    let norms: Vec<f64> = ps
        .iter()
        .map(|p| g.projection_norm_sq(p).unwrap())
        .collect();
    let unbounded = norms.windows(2).all(|w| w[1] > w[0]) && norms[9] > 1000.0;
    report(
        "05",
        "Brownian bridge",
        det_err <= 1e-9 && norm_err <= 1e-9 && unbounded,
        format!(
            "det rel err {det_err:.2e}, norm rel err {norm_err:.2e}, norm at 1-2^-10 = {:.1}",
            norms[9]
        ),
    );
}

#[test]
fn ac06_binomial_exact() {
    let mut ok = true;
    for n in 0..=20 {
        let (l, k) = pascal_factorization(n);
        ok &= l.matrix() * &l.matrix().transpose() == k;
        let inv = l.inverse();
        for x in 0..=n {
            for y in 0..=n {
                let c = binomial::binomial(x as u64, y as u64);
                let sign = if (x + y) % 2 == 0 { c } else { -c };
                ok &= inv.get(x, y) == &sign;
            }
        }
    }
    let c = |n: u64, k: u64| binomial::binomial(n, k);
    for n in 0..=12u64 {
        for m in 0..=n {
            let s: BigInt = (0..=n)
                .map(|j| {
                    let t = c(n, j) * c(j, m);
                    if (m + j) % 2 == 0 {
                        t
                    } else {
                        -t
                    }
                })
                .sum();
            ok &= s == BigInt::from((m == n) as u8);
        }
    }
    for x1 in 0..=10u64 {
        for n in x1..=30 {
            let expected: BigInt = (x1..=n).map(|k| c(k, x1) * c(k, x1)).sum();
            ok &= binomial_partial_norm(x1, n).unwrap() == expected;
        }
    }
    let ps = PointSet::ints(&(0..=30).collect::<Vec<_>>()).unwrap();
    let mut verdicts = Vec::new();
    for target in 0..=3u64 {
        let t = trace(
            &BinomialKernel,
            &Filtration::prefixes(&ps, Point::Int(target)).unwrap(),
        )
        .unwrap();
        ok &= t.exact;
        let v = classify(&t, &ClassifyConfig::default()).unwrap().membership;
        ok &= matches!(v, Membership::Diverging { .. });
        verdicts.push(v);
    }
    report(
        "06",
        "binomial exact identities",
        ok,
        format!("verdicts {verdicts:?}"),
    );
}

#[test]
fn ac07_network_cross_check() {
    let xs = [1.0, 2.0, 3.0, 5.0, 8.0];
    let net = Arc::new(Network::coordinate_path(&xs).unwrap());
    let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points()).unwrap();
    let bm = assemble_gram(&BrownianKernel, &reals(&xs)).unwrap();
    let gram_err = (g.entries() - bm.entries()).amax();
    let inv = g.dual_basis().unwrap();
    let mut diag_err = 0.0f64;
    for (i, x) in net.non_base().enumerate() {
        if net.is_interior(x) {
            diag_err = diag_err.max((inv[(i, i)] - net.delta_norm_sq(x)).abs());
        }
        let b = bm_delta_norm_sq(&reals(&xs), i);
        if let Ok(b) = b {
            diag_err = diag_err.max((b - net.delta_norm_sq(x)).abs());
        }
    }
    report(
        "07",
        "network cross-check",
        gram_err <= 1e-9 && diag_err <= 1e-9,
        format!("Gram max err {gram_err:.2e}, diagonal err {diag_err:.2e}"),
    );
}

#[test]
fn ac08_resistance_metric() {
    let xs = [1.0, 2.0, 3.0, 5.0, 8.0];
    let path = Network::coordinate_path(&xs).unwrap();
    let mut path_err = 0.0f64;
    for x in path.non_base() {
        for y in path.non_base() {
            let (a, b): (f64, f64) = (path.name(x).parse().unwrap(), path.name(y).parse().unwrap());
            path_err = path_err.max((path.resistance(x, y).unwrap() - (a - b).abs()).abs());
        }
    }
    // bridge: k(s,s) + k(t,t) - 2k(s,t) = |s-t|(1-|s-t|)
    let br = BridgeKernel;
    let mut bridge_err = 0.0f64;
    for s in [0.1, 0.3, 0.5, 0.77] {
        for t in [0.2, 0.3, 0.9] {
            let (ps, pt) = (Point::Real(s), Point::Real(t));
            let d = br.eval(&ps, &ps).unwrap() + br.eval(&pt, &pt).unwrap()
                - 2.0 * br.eval(&ps, &pt).unwrap();
            bridge_err = bridge_err.max((d - (s - t).abs() * (1.0 - (s - t).abs())).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut axioms, mut gm1_err, mut min_margin) = (true, 0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let n = rng.random_range(2..=12);
        let net = random_connected_network(&mut rng, n);
        let r = DMatrix::from_fn(n, n, |x, y| net.resistance(x, y).unwrap());
        for x in 0..n {
            axioms &= r[(x, x)] == 0.0;
            for y in 0..n {
                axioms &= (r[(x, y)] - r[(y, x)]).abs() <= 1e-9 * (1.0 + r[(x, y)]);
                axioms &= x == y || r[(x, y)] > 0.0;
                for z in 0..n {
                    axioms &= r[(x, z)] <= r[(x, y)] + r[(y, z)] + 1e-9;
                }
            }
        }
        let vs: Vec<usize> = net.non_base().collect();
        for &x in &vs {
            for &y in &vs {
                let k = net.green(x, y).unwrap();
                gm1_err = gm1_err.max((net.kernel_from_resistance(x, y).unwrap() - k).abs());
                for &z in &vs {
                    let t = covariance_triangle_check(&net, x, y, z).unwrap();
                    min_margin = min_margin.min(t.margin);
                    axioms &= t.holds;
                }
            }
        }
    }
    report(
        "08",
        "resistance metric",
        path_err <= 1e-9 && bridge_err <= 1e-15 && axioms && gm1_err <= 1e-9 && min_margin >= -1e-12,
        format!(
            "path err {path_err:.2e}, bridge err {bridge_err:.2e}, gm1 err {gm1_err:.2e}, min gf3 margin {min_margin:.2e}"
        ),
    );
}

#[test]
fn ac09_gff() {
    let start = Instant::now();
    let net = Arc::new(Network::coordinate_path(&[1.0, 2.0, 3.0, 5.0, 8.0]).unwrap());
    let g = assemble_gram(&green_kernel(net.clone()), &net.grounded_points()).unwrap();
    let n = 100_000;
    let s = sample(&g, n, 42).unwrap();
    let z_cov = s.covariance_z_max();
    let mut z_var = 0.0f64;
    for x in net.non_base() {
        let d = delta_realization(&net, &s, net.name(x)).unwrap();
        let var = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let c = net.delta_norm_sq(x);
        z_var = z_var.max((var - c).abs() / (5.0 * c * (2.0 / n as f64).sqrt()));
    }
    let again = sample(&g, n, 42).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let s1 = one.install(|| sample(&g, n, 42).unwrap());
    let s4 = four.install(|| sample(&g, n, 42).unwrap());
    let reproducible =
        again.samples == s.samples && s1.samples == s.samples && s4.samples == s.samples;
    let elapsed = start.elapsed();
    report(
        "09",
        "Gaussian free field",
        z_cov < 1.0 && z_var < 1.0 && reproducible && elapsed < Duration::from_secs(30),
        format!("cov |err|/5SE max {z_cov:.3}, var |err|/5SE max {z_var:.3}, reproducible {reproducible}, {elapsed:?}"),
    );
}

#[test]
fn ac10_tree() {
    let w = LevelWeights::geometric(0.5).unwrap();
    let mut exact = true;
    for depth in 2..=10 {
        let net = build_tree(depth, &w).unwrap();
        for x in net.non_base() {
            if !net.is_interior(x) {
                continue;
            }
            let word = Word::parse(net.name(x)).unwrap();
            exact &= tree_delta_norm_closed(&word, &w, depth).unwrap() == net.delta_norm_sq(x);
        }
    }
    // solver route: δ_α expanded in dipoles is the indicator with energy c(α)
    let mut solver_err = 0.0f64;
    for (depth, words) in [
        (5, vec!["0", "01", "110", "1011"]),
        (10, vec!["1", "0110", "101010101"]),
    ] {
        let net = build_tree(depth, &w).unwrap();
        for word in words {
            let x = net.vertex(word).unwrap();
            let f = net
                .evaluate_dipole_combination(&net.delta_expand(x))
                .unwrap();
            let closed = tree_delta_norm_closed(&Word::parse(word).unwrap(), &w, depth).unwrap();
            solver_err = solver_err.max((net.energy(&f) - closed).abs() / closed);
        }
    }
    let mut series_err = 0.0f64;
    for depth in [3usize, 6, 10] {
        let net = build_tree(depth, &w).unwrap();
        let a = Word::new(vec![false; depth]);
        for split in 0..depth {
            let mut bits = vec![false; depth];
            bits[split] = true;
            let r = boundary_resistance(&net, &a, &Word::new(bits), &w, depth).unwrap();
            series_err = series_err.max((r.network - r.series).abs());
        }
    }
    let mut tail_err = 0.0f64;
    for split in 0..10 {
        let series = 2.0 * w.partial_sum(split, 24).unwrap();
        let limit = 2.0 * w.tail_sum(split).unwrap();
        tail_err = tail_err.max((series - limit).abs());
    }
    let counts_ok = (2..=12).all(|d| {
        energy_histogram(d, &w)
            .unwrap()
            .iter()
            .map(|r| r.multiplicity)
            .sum::<u64>()
            == (1u64 << d) - 2
    });
    report(
        "10",
        "dyadic tree",
        exact && solver_err <= 1e-9 && series_err <= 1e-9 && tail_err <= 1e-6 && counts_ok,
        format!(
            "closed==c(x) {exact}, solver rel err {solver_err:.2e}, series err {series_err:.2e}, tail err at depth 24 {tail_err:.2e}, multiplicities {counts_ok}"
        ),
    );
}

#[test]
fn ac11_property_suites() {
    const CASES: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut mono, mut bio, mut cramer, mut lip, mut prod) = (0, 0, 0, 0, 0);
    for _ in 0..CASES {
        let n = rng.random_range(1..=8);
        let (k, ps) = random_table_kernel(&mut rng, n);
        let t = trace(
            &k,
            &Filtration::prefixes(&ps, ps.points()[0].clone()).unwrap(),
        );
        if t.is_ok_and(|t| {
            t.values
                .windows(2)
                .all(|w| w[1] >= w[0] - 1e-9 - 1e-9 * w[0].abs())
        }) {
            mono += 1;
        }
        let g = assemble_gram(&k, &ps).unwrap();
        if ((g.dual_basis().unwrap() * g.entries()) - DMatrix::identity(n, n)).amax() <= 1e-9 {
            bio += 1;
        }
        let target = &ps.points()[rng.random_range(0..n)];
        if rel_close(
            g.projection_norm_sq(target).unwrap(),
            g.det_ratio(target).unwrap(),
            1e-8,
        ) {
            cramer += 1;
        }

        let m = rng.random_range(2..=12);
        let net = random_connected_network(&mut rng, m);
        let f1: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f2: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let e1 = net.energy(&f1);
        let lip_ok = (0..m).all(|x| {
            (0..m).all(|y| {
                (f1[x] - f1[y]).powi(2) <= e1 * net.resistance(x, y).unwrap() * (1.0 + 1e-9) + 1e-12
            })
        });
        lip += lip_ok as usize;
        let sup = |f: &[f64]| f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let pr: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a * b).collect();
        let bound = (sup(&f1).powi(2) + sup(&f2).powi(2)) * (e1 + net.energy(&f2));
        prod += (net.energy(&pr) <= bound * (1.0 + 1e-12)) as usize;
    }
    report(
        "11",
        "property suites",
        [mono, bio, cramer, lip, prod].iter().all(|&c| c == CASES),
        format!("monotone {mono}/{CASES}, biorthogonal {bio}/{CASES}, Cramer {cramer}/{CASES}, Lipschitz {lip}/{CASES}, product {prod}/{CASES}"),
    );
}
