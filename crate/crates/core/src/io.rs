//! JSON inputs and CSV outputs.
//!
//! Floats are written with 17 significant digits so outputs round-trip
//! bit-exactly and diff cleanly.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binomial::BinomialKernel;
use crate::builtin::{BridgeKernel, BrownianKernel};
use crate::diagnostics::{FiltrationTrace, Verdict};
use crate::error::{Error, Result};
use crate::kernel::{Domain, Kernel, TableKernel};
use crate::network::{green_kernel, Network};
use crate::point::{Point, PointSet};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

/// Label of a JSON scalar: strings verbatim, numbers in their JSON spelling.
pub fn label_string(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!(
            "expected a string or number label, got {other}"
        ))),
    }
}

/// `{"vertices": [...], "base": id, "edges": [[u, v, c], ...]}`, with an
/// optional `"boundary"` list of truncation-boundary vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub vertices: Vec<Value>,
    pub base: Value,
    pub edges: Vec<(Value, Value, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<Value>,
}

impl NetworkSpec {
    pub fn build(&self) -> Result<Network> {
        let vertices = self
            .vertices
            .iter()
            .map(label_string)
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .map(|(u, v, c)| Ok((label_string(u)?, label_string(v)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        let boundary = self
            .boundary
            .iter()
            .map(label_string)
            .collect::<Result<Vec<_>>>()?;
        Network::new(&vertices, &label_string(&self.base)?, &edges)?.with_boundary(&boundary)
    }

    pub fn from_network(net: &Network) -> Self {
        let s = |i: usize| Value::String(net.name(i).to_string());
        Self {
            vertices: (0..net.len()).map(s).collect(),
            base: s(net.base()),
            edges: net
                .edges()
                .iter()
                .map(|e| (s(e.u), s(e.v), e.conductance))
                .collect(),
            boundary: net.boundary().iter().map(|&i| s(i)).collect(),
        }
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    let spec: NetworkSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("network JSON: {e}")))?;
    spec.build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Table {
        labels: Vec<Value>,
        values: Vec<Vec<f64>>,
    },
    Brownian,
    Bridge,
    Binomial,
    Network {
        network: NetworkSpec,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Box<dyn Kernel>> {
        Ok(match self {
            KernelSpec::Table { labels, values } => {
                let labels = labels
                    .iter()
                    .map(label_string)
                    .collect::<Result<Vec<_>>>()?;
                Box::new(TableKernel::new(labels, values.clone())?)
            }
            KernelSpec::Brownian => Box::new(BrownianKernel),
            KernelSpec::Bridge => Box::new(BridgeKernel),
            KernelSpec::Binomial => Box::new(BinomialKernel),
            KernelSpec::Network { network } => Box::new(green_kernel(Arc::new(network.build()?))),
        })
    }
}

/// `{"kernel": {...}, "points": [...]}` plus an optional target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub points: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Value>,
}

impl KernelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("kernel document: {e}")))
    }
}

/// Interpret a JSON label according to the kernel's domain.
pub fn parse_point(domain: Domain, v: &Value) -> Result<Point> {
    match domain {
        Domain::PositiveReals | Domain::OpenUnitInterval => v
            .as_f64()
            .map(Point::Real)
            .ok_or_else(|| Error::Parse(format!("expected a real coordinate, got {v}"))),
        Domain::NonnegativeIntegers => v
            .as_u64()
            .map(Point::Int)
            .ok_or_else(|| Error::Parse(format!("expected a nonnegative integer, got {v}"))),
        Domain::NetworkVertices | Domain::Table => label_string(v).map(Point::Vertex),
    }
}

pub fn parse_points(domain: Domain, values: &[Value]) -> Result<PointSet> {
    PointSet::new(
        values
            .iter()
            .map(|v| parse_point(domain, v))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Header row of point labels, then one labeled row per point.
pub fn matrix_csv(base: &PointSet, m: &DMatrix<f64>) -> String {
    let mut out = String::from("label");
    for p in base {
        out.push(',');
        out.push_str(&p.to_string());
    }
    out.push('\n');
    for (i, p) in base.iter().enumerate() {
        out.push_str(&p.to_string());
        for j in 0..m.ncols() {
            out.push(',');
            out.push_str(&fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`matrix_csv`]: labels and entries.
pub fn parse_matrix_csv(text: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                n + 1,
                fields.len()
            )));
        }
        for f in &fields[1..] {
            data.push(parse_f64(f)?);
        }
        rows += 1;
    }
    Ok((labels, DMatrix::from_row_slice(rows, n, &data)))
}

/// Rows `stage_index,stage_size,zeta_value,det_ratio,increment`, then the
/// verdict as a JSON line.
pub fn trace_csv(trace: &FiltrationTrace, verdict: Option<&Verdict>) -> String {
    let mut out = String::from("stage_index,stage_size,zeta_value,det_ratio,increment\n");
    for (i, v) in trace.values.iter().enumerate() {
        let ratio = trace.det_ratios[i].map(fmt_f64).unwrap_or_default();
        let inc = if i == 0 {
            String::new()
        } else {
            fmt_f64(v - trace.values[i - 1])
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            trace.stage_number(i),
            trace.stage_sizes[i],
            fmt_f64(*v),
            ratio,
            inc
        ));
    }
    if let Some(v) = verdict {
        out.push_str(&serde_json::to_string(v).expect("verdicts serialize"));
        out.push('\n');
    }
    out
}

/// A parsed diagnose CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub stage_index: usize,
    pub stage_size: usize,
    pub zeta_value: f64,
    pub det_ratio: Option<f64>,
    pub increment: Option<f64>,
}

pub fn parse_trace_csv(text: &str) -> Result<(Vec<TraceRow>, Option<Verdict>)> {
    let mut rows = Vec::new();
    let mut verdict = None;
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.starts_with('{') {
            verdict = Some(
                serde_json::from_str(line)
                    .map_err(|e| Error::Parse(format!("line {}: verdict: {e}", lineno + 1)))?,
            );
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::Parse(format!(
                "line {}: expected 5 fields",
                lineno + 1
            )));
        }
        let opt = |s: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f64(s).map(Some)
            }
        };
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        rows.push(TraceRow {
            stage_index: int(f[0])?,
            stage_size: int(f[1])?,
            zeta_value: parse_f64(f[2])?,
            det_ratio: opt(f[3])?,
            increment: opt(f[4])?,
        });
    }
    Ok((rows, verdict))
}

/// Header of point labels, one draw per row.
pub fn samples_csv(base: &PointSet, samples: &DMatrix<f64>) -> String {
    let mut out = base
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in samples.row_iter() {
        out.push_str(
            &row.iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

pub fn parse_samples_csv(text: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let labels: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut data = Vec::new();
    let mut rows = 0;
    for line in lines.filter(|l| !l.is_empty()) {
        for f in line.split(',') {
            data.push(parse_f64(f)?);
        }
        rows += 1;
    }
    if data.len() != rows * labels.len() {
        return Err(Error::Parse("ragged sample CSV".into()));
    }
    Ok((
        labels.clone(),
        DMatrix::from_row_slice(rows, labels.len(), &data),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{classify, trace, ClassifyConfig, Filtration};
    use crate::gram::assemble_gram;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn kernel_documents() {
        let doc = KernelDocument::parse(
            r#"{"kernel": {"type": "brownian"}, "points": [1, 2.5], "target": 1}"#,
        )
        .unwrap();
        let k = doc.kernel.build().unwrap();
        let ps = parse_points(k.domain(), &doc.points).unwrap();
        assert_eq!(ps.points(), &[Point::Real(1.0), Point::Real(2.5)]);

        let doc = KernelDocument::parse(
            r#"{"kernel": {"type": "table", "labels": ["a", "b"], "values": [[2, 1], [1, 2]]}, "points": ["b"]}"#,
        )
        .unwrap();
        let k = doc.kernel.build().unwrap();
        let ps = parse_points(k.domain(), &doc.points).unwrap();
        assert_eq!(assemble_gram(&k, &ps).unwrap().entries()[(0, 0)], 2.0);

        let doc = KernelDocument::parse(
            r#"{"kernel": {"type": "network", "network": {"vertices": [0, 1, 2], "base": 0, "edges": [[0, 1, 1.0], [1, 2, 1.0]]}}, "points": [1, 2]}"#,
        )
        .unwrap();
        let k = doc.kernel.build().unwrap();
        let ps = parse_points(k.domain(), &doc.points).unwrap();
        let g = assemble_gram(&k, &ps).unwrap();
        assert!((g.entries()[(1, 1)] - 2.0).abs() < 1e-12);

        assert!(KernelDocument::parse(r#"{"kernel": {"type": "cubic"}}"#).is_err());
        let k = BinomialKernel;
        assert!(parse_points(k.domain(), &[Value::from(-1)]).is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = KernelDocument::parse("{\"kernel\": \n {\"type\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn network_spec_round_trip() {
        let net = parse_network(
            r#"{"vertices": ["o", "a", "b"], "base": "o", "edges": [["o", "a", 1.5], ["a", "b", 2]], "boundary": ["b"]}"#,
        )
        .unwrap();
        let spec = NetworkSpec::from_network(&net);
        let again = parse_network(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again.vertices(), net.vertices());
        assert_eq!(again.edges(), net.edges());
        assert_eq!(again.boundary(), net.boundary());
    }

    #[test]
    fn trace_csv_round_trip() {
        let ps = PointSet::reals(&(1..=8).map(f64::from).collect::<Vec<_>>()).unwrap();
        let t = trace(
            &BrownianKernel,
            &Filtration::prefixes(&ps, Point::Real(1.0)).unwrap(),
        )
        .unwrap();
        let v = classify(&t, &ClassifyConfig::default()).unwrap();
        let (rows, verdict) = parse_trace_csv(&trace_csv(&t, Some(&v))).unwrap();
        assert_eq!(verdict, Some(v));
        assert_eq!(rows.len(), t.values.len());
        for (r, (val, ratio)) in rows.iter().zip(t.values.iter().zip(&t.det_ratios)) {
            assert_eq!(r.zeta_value, *val);
            assert_eq!(r.det_ratio, *ratio);
        }
        assert_eq!(rows[0].increment, None);
    }

    proptest! {
        #[test]
        fn matrix_csv_round_trips(entries in proptest::collection::vec(-1e6f64..1e6, 9)) {
            let base = PointSet::vertices(&["x", "y", "z"]).unwrap();
            let m = DMatrix::from_row_slice(3, 3, &entries);
            let (labels, back) = parse_matrix_csv(&matrix_csv(&base, &m)).unwrap();
            prop_assert_eq!(labels, vec!["x", "y", "z"]);
            prop_assert_eq!(back, m);
        }

        #[test]
        fn samples_csv_round_trips(entries in proptest::collection::vec(-10f64..10.0, 8)) {
            let base = PointSet::vertices(&["a", "b"]).unwrap();
            let m = DMatrix::from_row_slice(4, 2, &entries);
            let (_, back) = parse_samples_csv(&samples_csv(&base, &m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
