use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use pointmass::gff::{delta_realization, sample, GffSampleSet};
use pointmass::io::{
    fmt_f64, matrix_csv, parse_network, parse_point, parse_points, parse_samples_csv, trace_csv,
    KernelDocument,
};
use pointmass::tree::{
    boundary_resistance, build_tree, energy_histogram, histogram_csv, LevelWeights, Word,
};
use pointmass::{
    assemble_gram, classify, green_kernel, trace, ClassifyConfig, Filtration, Kernel, Network,
    Point, PointSet,
};
use serde_json::{json, Value};

use crate::config::{emit, read, require, FileConfig, DEFAULT_SEED};
use crate::{
    DiagnoseArgs, Failure, Format, GffArgs, GffCmd, KernelCmd, KernelInput, NetworkCmd, NetworkOut,
    Tolerances, TreeArgs, TreeCmd,
};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// A command-line token as a JSON scalar: integers, then reals, then strings.
fn token_value(s: &str) -> Value {
    let s = s.trim();
    if let Ok(i) = s.parse::<u64>() {
        json!(i)
    } else if let Ok(x) = s.parse::<f64>() {
        json!(x)
    } else {
        json!(s)
    }
}

fn parse_point_list(s: &str) -> Result<Vec<Value>, Failure> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.split_once("..") {
            Some((a, b)) if a.parse::<u64>().is_ok() && b.parse::<u64>().is_ok() => {
                let (a, b) = (a.parse::<u64>().unwrap(), b.parse::<u64>().unwrap());
                out.extend((a..=b).map(|i| json!(i)));
            }
            _ => out.push(token_value(tok)),
        }
    }
    Ok(out)
}

struct LoadedKernel {
    kernel: Box<dyn Kernel>,
    points: PointSet,
    doc: KernelDocument,
}

fn load_kernel(input: &KernelInput, cfg: &FileConfig) -> Result<LoadedKernel, Failure> {
    let path = require(input.kernel.as_ref().or(cfg.kernel.as_ref()), "kernel")?;
    let mut doc = KernelDocument::parse(&read(path)?)?;
    if let Some(list) = input.points.as_ref().or(cfg.points.as_ref()) {
        doc.points = parse_point_list(list)?;
    }
    let kernel = doc.kernel.build()?;
    let points = parse_points(kernel.domain(), &doc.points)?;
    Ok(LoadedKernel {
        kernel,
        points,
        doc,
    })
}

fn write_matrix(
    out: Option<&Path>,
    format: Format,
    base: &PointSet,
    m: &DMatrix<f64>,
) -> Result<(), Failure> {
    match format {
        Format::Csv => emit(out, &matrix_csv(base, m)),
        Format::Json => {
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            let labels: Vec<String> = base.iter().map(Point::to_string).collect();
            emit(
                out,
                &format!("{}\n", json!({ "labels": labels, "matrix": rows })),
            )
        }
    }
}

pub fn kernel(cmd: KernelCmd, cfg: &FileConfig) -> Result<(), Failure> {
    match cmd {
        KernelCmd::Eval { input, x, y } => {
            let k = load_kernel(&input, cfg)?;
            let dom = k.kernel.domain();
            let (x, y) = (
                parse_point(dom, &token_value(&x))?,
                parse_point(dom, &token_value(&y))?,
            );
            let value = k.kernel.eval(&x, &y)?;
            match k.kernel.eval_exact(&x, &y) {
                Some(exact) => println!("{exact}"),
                None => println!("{}", fmt_f64(value)),
            }
            Ok(())
        }
        KernelCmd::Gram { input, out, format } => {
            let k = load_kernel(&input, cfg)?;
            let out = out.as_deref().or(cfg.out.as_deref());
            let format = format.or(cfg.format).unwrap_or(Format::Csv);
            if k.kernel.is_exact_on(&k.points) {
                return write_exact_gram(out, format, &*k.kernel, &k.points);
            }
            let g = assemble_gram(&k.kernel, &k.points)?;
            write_matrix(out, format, &k.points, g.entries())
        }
    }
}

/// Integer kernels print exact decimal entries.
fn write_exact_gram(
    out: Option<&Path>,
    format: Format,
    kernel: &dyn Kernel,
    base: &PointSet,
) -> Result<(), Failure> {
    let entry = |x: &Point, y: &Point| kernel.eval_exact(x, y).expect("checked exact").to_string();
    let labels: Vec<String> = base.iter().map(Point::to_string).collect();
    match format {
        Format::Csv => {
            let mut text = format!("label,{}\n", labels.join(","));
            for x in base {
                let row: Vec<String> = base.iter().map(|y| entry(x, y)).collect();
                text.push_str(&format!("{x},{}\n", row.join(",")));
            }
            emit(out, &text)
        }
        Format::Json => {
            let rows: Vec<Vec<String>> = base
                .iter()
                .map(|x| base.iter().map(|y| entry(x, y)).collect())
                .collect();
            emit(
                out,
                &format!("{}\n", json!({ "labels": labels, "matrix": rows })),
            )
        }
    }
}

fn classify_config(t: &Tolerances, cfg: &FileConfig) -> Result<ClassifyConfig, Failure> {
    let d = ClassifyConfig::default();
    let c = ClassifyConfig {
        tau_stab: t.tau_stab.or(cfg.tau_stab).unwrap_or(d.tau_stab),
        tau_div: t.tau_div.or(cfg.tau_div).unwrap_or(d.tau_div),
        window: t.window.or(cfg.window).unwrap_or(d.window),
        slope_threshold: t
            .slope_threshold
            .or(cfg.slope_threshold)
            .unwrap_or(d.slope_threshold),
        ratio_threshold: t
            .ratio_threshold
            .or(cfg.ratio_threshold)
            .unwrap_or(d.ratio_threshold),
    };
    let positive = [c.tau_stab, c.tau_div, c.slope_threshold, c.ratio_threshold];
    if c.window == 0 || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Failure::Input("tolerances must be positive".into()));
    }
    Ok(c)
}

pub fn diagnose(args: DiagnoseArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let k = load_kernel(&args.input, cfg)?;
    let config = classify_config(&args.tolerances, cfg)?;
    let target = match (&args.target, &cfg.target, &k.doc.target) {
        (Some(t), _, _) => parse_point(k.kernel.domain(), &token_value(t))?,
        (None, Some(t), _) | (None, None, Some(t)) => parse_point(k.kernel.domain(), t)?,
        (None, None, None) => k.points.points()[0].clone(),
    };
    run_diagnose(&k, target, &args, &config, cfg)
}

fn run_diagnose(
    k: &LoadedKernel,
    target: Point,
    args: &DiagnoseArgs,
    config: &ClassifyConfig,
    cfg: &FileConfig,
) -> Result<(), Failure> {
    let filtration = if args.doubling {
        Filtration::doubling(&k.points, target)?
    } else {
        Filtration::prefixes(&k.points, target)?
    };
    let t = trace(&k.kernel, &filtration)?;
    let verdict = classify(&t, config)?;
    let out = args.out.as_deref().or(cfg.out.as_deref());
    emit(out, &trace_csv(&t, Some(&verdict)))?;
    if out.is_some() {
        println!(
            "{}",
            serde_json::to_string(&verdict).expect("verdicts serialize")
        );
    }
    Ok(())
}

fn load_network(path: Option<&Path>, cfg: &FileConfig) -> Result<Network, Failure> {
    let path = require(path.or(cfg.network.as_deref()), "network")?;
    Ok(parse_network(&read(path)?)?)
}

fn vertex_points(net: &Network, ids: impl Iterator<Item = usize>) -> PointSet {
    PointSet::new(
        ids.map(|i| Point::Vertex(net.name(i).to_string()))
            .collect(),
    )
    .expect("vertex names are unique")
}

pub fn network(cmd: NetworkCmd, cfg: &FileConfig) -> Result<(), Failure> {
    let (NetworkCmd::Green(o) | NetworkCmd::Resistance(o) | NetworkCmd::DeltaNorm(o)) = &cmd;
    let NetworkOut {
        network,
        out,
        format,
    } = o.clone();
    let net = load_network(network.as_deref(), cfg)?;
    let out = out.as_deref().or(cfg.out.as_deref());
    let format = format.or(cfg.format).unwrap_or(Format::Csv);
    match cmd {
        NetworkCmd::Green(_) => {
            let points = net.grounded_points();
            let g = assemble_gram(&green_kernel(Arc::new(net)), &points)?;
            write_matrix(out, format, &points, g.entries())
        }
        NetworkCmd::Resistance(_) => {
            let n = net.len();
            let mut m = DMatrix::zeros(n, n);
            for x in 0..n {
                for y in 0..n {
                    m[(x, y)] = net.resistance(x, y)?;
                }
            }
            write_matrix(out, format, &vertex_points(&net, 0..n), &m)
        }
        NetworkCmd::DeltaNorm(_) => {
            let rows: Vec<(String, f64, bool)> = net
                .non_base()
                .map(|x| {
                    (
                        net.name(x).to_string(),
                        net.delta_norm_sq(x),
                        net.is_interior(x),
                    )
                })
                .collect();
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("vertex,delta_norm_sq,interior\n");
                    for (v, e, i) in &rows {
                        s.push_str(&format!("{v},{},{i}\n", fmt_f64(*e)));
                    }
                    s
                }
                Format::Json => {
                    let items: Vec<Value> = rows
                        .iter()
                        .map(|(v, e, i)| json!({ "vertex": v, "delta_norm_sq": e, "interior": i }))
                        .collect();
                    format!("{}\n", Value::Array(items))
                }
            };
            emit(out, &text)
        }
    }
}

fn draw(net: &Arc<Network>, args: &GffArgs, cfg: &FileConfig) -> Result<GffSampleSet, Failure> {
    let n = args.n.or(cfg.n).unwrap_or(DEFAULT_SAMPLES);
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let kernel = green_kernel(net.clone());
    let gram = assemble_gram(&kernel, &net.grounded_points())?;
    Ok(sample(&gram, n, seed)?)
}

pub fn gff(cmd: GffCmd, cfg: &FileConfig) -> Result<(), Failure> {
    match cmd {
        GffCmd::Sample(args) => {
            let net = Arc::new(load_network(args.network.as_deref(), cfg)?);
            let s = draw(&net, &args, cfg)?;
            emit(
                args.out.as_deref().or(cfg.out.as_deref()),
                &pointmass::io::samples_csv(&s.base, &s.samples),
            )
        }
        GffCmd::Check { args, samples } => {
            let net = Arc::new(load_network(args.network.as_deref(), cfg)?);
            let s = match samples.as_deref().or(cfg.samples.as_deref()) {
                Some(path) => read_samples(&net, path)?,
                None => draw(&net, &args, cfg)?,
            };
            let (report, failures) = covariance_report(&net, &s)?;
            emit(args.out.as_deref().or(cfg.out.as_deref()), &report)?;
            if failures > 0 {
                return Err(Failure::Check(format!(
                    "{failures} entries beyond 5 standard errors"
                )));
            }
            Ok(())
        }
    }
}

fn read_samples(net: &Arc<Network>, path: &Path) -> Result<GffSampleSet, Failure> {
    let (labels, samples) = parse_samples_csv(&read(path)?)?;
    let base = PointSet::new(labels.into_iter().map(Point::Vertex).collect())?;
    let gram = assemble_gram(&green_kernel(net.clone()), &base)?;
    let covariance = gram.entries().clone();
    Ok(GffSampleSet {
        base,
        samples,
        seed: 0,
        covariance,
    })
}

/// Rows `kind,x,y,empirical,expected,tolerance,within`: every covariance
/// entry, then `Var(δ̃_x)` against `c(x)`.
fn covariance_report(net: &Network, s: &GffSampleSet) -> Result<(String, usize), Failure> {
    let emp = s.empirical_covariance();
    let tol = s.covariance_tolerance();
    let mut text = String::from("kind,x,y,empirical,expected,tolerance,within\n");
    let mut failures = 0;
    let mut row = |kind: &str, x: &str, y: &str, e: f64, k: f64, t: f64| {
        let within = (e - k).abs() <= t;
        failures += usize::from(!within);
        text.push_str(&format!(
            "{kind},{x},{y},{},{},{},{within}\n",
            fmt_f64(e),
            fmt_f64(k),
            fmt_f64(t)
        ));
    };
    for (i, p) in s.base.iter().enumerate() {
        for (j, q) in s.base.iter().enumerate() {
            row(
                "covariance",
                &p.to_string(),
                &q.to_string(),
                emp[(i, j)],
                s.covariance[(i, j)],
                tol[(i, j)],
            );
        }
    }
    let n = s.len() as f64;
    for x in net.non_base() {
        let name = net.name(x);
        let d = delta_realization(net, s, name)?;
        let var = d.iter().map(|v| v * v).sum::<f64>() / n;
        let c = net.delta_norm_sq(x);
        row(
            "delta_variance",
            name,
            name,
            var,
            c,
            5.0 * c * (2.0 / n).sqrt(),
        );
    }
    Ok((text, failures))
}

fn tree_weights(
    args: &TreeArgs,
    cfg: &FileConfig,
) -> Result<(LevelWeights, Option<usize>), Failure> {
    let spec = require(args.weights.as_ref().or(cfg.weights.as_ref()), "weights")?;
    let mut w = LevelWeights::parse(spec)?;
    if let Some(r0) = args.r0.or(cfg.r0) {
        w = w.with_r0(r0)?;
    }
    Ok((w, args.depth.or(cfg.depth)))
}

pub fn tree(cmd: TreeCmd, cfg: &FileConfig) -> Result<(), Failure> {
    match cmd {
        TreeCmd::Histogram(args) => {
            let (w, depth) = tree_weights(&args, cfg)?;
            let depth = depth.unwrap_or_else(|| w.default_depth());
            let rows = energy_histogram(depth, &w)?;
            emit(
                args.out.as_deref().or(cfg.out.as_deref()),
                &histogram_csv(&rows, &w),
            )
        }
        TreeCmd::Resistance { args, a, b } => {
            let (w, depth) = tree_weights(&args, cfg)?;
            let (a, b) = (Word::parse(&a)?, Word::parse(&b)?);
            let depth = depth.unwrap_or(a.len());
            let net = build_tree(depth, &w)?;
            let r = boundary_resistance(&net, &a, &b, &w, depth)?;
            let limit = r.limit.map(fmt_f64).unwrap_or_default();
            emit(
                args.out.as_deref().or(cfg.out.as_deref()),
                &format!(
                    "split_level,network,series,limit\n{},{},{},{limit}\n",
                    r.split_level,
                    fmt_f64(r.network),
                    fmt_f64(r.series)
                ),
            )
        }
    }
}
