//! Binary trees of finite words with level-dependent resistances `r(n)`.
//!
//! The edge from a word `α` to its child `αt` has conductance `1 / r(ℓ(α))`.
//! Root-level edges need `r(0)`, which callers state explicitly (default 1).

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::Network;

/// Weight tails below this decide the default truncation depth.
pub const TAIL_TOL: f64 = 1e-8;
pub const MAX_DEFAULT_DEPTH: usize = 16;

/// Name of the root vertex.
pub const ROOT: &str = "o";

/// A finite word over `{0, 1}`; the empty word is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<bool>);

impl Word {
    pub fn root() -> Self {
        Word(Vec::new())
    }

    pub fn new(bits: Vec<bool>) -> Self {
        Word(bits)
    }

    /// Parse `"0110"`; `"o"` or `""` is the root.
    pub fn parse(s: &str) -> Result<Self> {
        if s == ROOT {
            return Ok(Self::root());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!(
                    "word {s:?} must contain only 0 and 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut bits = self.0.clone();
        bits.push(bit);
        Word(bits)
    }

    pub fn truncate(&self, n: usize) -> Self {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Vertex name in networks built by [`build_tree`].
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ROOT);
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// `r(n) = q^n` for `n >= 1`.
    Geometric(f64),
    /// `r(n) = c` for `n >= 1`.
    Constant(f64),
    /// Explicit `r(1), r(2), ...` (index 0 of the table is `r(1)`).
    Table(Vec<f64>),
}

/// Resistances `r(n)` per level with an explicit root convention `r(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelWeights {
    rule: WeightRule,
    r0: f64,
}

impl LevelWeights {
    pub fn new(rule: WeightRule, r0: f64) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let ok = match &rule {
            WeightRule::Geometric(q) => positive(*q),
            WeightRule::Constant(c) => positive(*c),
            WeightRule::Table(t) => t.iter().all(|x| positive(*x)),
        };
        if !ok || !positive(r0) {
            return Err(Error::InvalidArgument(
                "level weights must be positive".into(),
            ));
        }
        Ok(Self { rule, r0 })
    }

    pub fn geometric(q: f64) -> Result<Self> {
        Self::new(WeightRule::Geometric(q), 1.0)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightRule::Constant(c), c)
    }

    /// `geometric:q`, `constant:c`, or `file:path` (one value per line,
    /// line n holding r(n), line 0 holding r(0)).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("weight spec {spec:?} needs kind:value")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
        };
        match kind {
            "geometric" => Self::geometric(num(arg)?),
            "constant" => Self::constant(num(arg)?),
            "file" => {
                let text = std::fs::read_to_string(Path::new(arg))
                    .map_err(|e| Error::Parse(format!("reading {arg}: {e}")))?;
                Self::from_lines(&text)
            }
            _ => Err(Error::Parse(format!("unknown weight kind {kind:?}"))),
        }
    }

    pub fn from_lines(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad weight {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let (r0, rest) = values
            .split_first()
            .ok_or_else(|| Error::Parse("weight file is empty".into()))?;
        Self::new(WeightRule::Table(rest.to_vec()), *r0)
    }

    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::InvalidArgument("r(0) must be positive".into()));
        }
        self.r0 = r0;
        Ok(self)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(self.r0);
        }
        match &self.rule {
            WeightRule::Geometric(q) => Ok(q.powi(n as i32)),
            WeightRule::Constant(c) => Ok(*c),
            WeightRule::Table(t) => t.get(n - 1).copied().ok_or(Error::WeightUndefined(n)),
        }
    }

    /// `Σ_{n=from}^{to-1} r(n)`.
    pub fn partial_sum(&self, from: usize, to: usize) -> Result<f64> {
        (from..to).map(|n| self.get(n)).sum()
    }

    /// `Σ_{n>=from} r(n)` when a closed form exists and converges.
    pub fn tail_sum(&self, from: usize) -> Option<f64> {
        match &self.rule {
            WeightRule::Geometric(q) if *q < 1.0 => {
                let head = if from == 0 { self.r0 - 1.0 } else { 0.0 };
                Some(head + q.powi(from as i32) / (1.0 - q))
            }
            _ => None,
        }
    }

    pub fn is_summable(&self) -> bool {
        matches!(self.rule, WeightRule::Geometric(q) if q < 1.0)
    }

    /// First depth whose weight tail is below [`TAIL_TOL`], capped at
    /// [`MAX_DEFAULT_DEPTH`] (and at the table length for explicit weights).
    pub fn default_depth(&self) -> usize {
        let cap = match &self.rule {
            WeightRule::Table(t) => (t.len() + 1).min(MAX_DEFAULT_DEPTH),
            _ => MAX_DEFAULT_DEPTH,
        };
        (1..=cap)
            .find(|&d| self.tail_sum(d).is_some_and(|t| t < TAIL_TOL))
            .unwrap_or(cap)
    }
}

/// All words of length `<= depth`, root at the base, edge `α → αt` with
/// conductance `1 / r(ℓ(α))`. Leaves are flagged as boundary vertices.
pub fn build_tree(depth: usize, weights: &LevelWeights) -> Result<Network> {
    if depth < 1 {
        return Err(Error::InvalidArgument(
            "tree depth must be at least 1".into(),
        ));
    }
    let conductances = (0..depth)
        .map(|l| weights.get(l).map(|r| 1.0 / r))
        .collect::<Result<Vec<_>>>()?;
    let mut names = vec![Word::root().name()];
    let mut edges = Vec::with_capacity((1 << (depth + 1)) - 2);
    let mut level = vec![Word::root()];
    for c in conductances {
        let mut next = Vec::with_capacity(level.len() * 2);
        for w in &level {
            for bit in [false, true] {
                let child = w.child(bit);
                names.push(child.name());
                edges.push((w.name(), child.name(), c));
                next.push(child);
            }
        }
        level = next;
    }
    let leaves: Vec<String> = level.iter().map(Word::name).collect();
    Network::new(&names, ROOT, &edges)?.with_boundary(&leaves)
}

/// `‖δ_α‖² = 2 / r(ℓ(α)) + 1 / r(ℓ(α) - 1)` for a non-root, non-leaf word.
pub fn tree_delta_norm_closed(word: &Word, weights: &LevelWeights, depth: usize) -> Result<f64> {
    let l = word.len();
    if l == 0 {
        return Err(Error::InvalidArgument("the root has no parent edge".into()));
    }
    if l >= depth {
        return Err(Error::BoundaryWord(word.to_string()));
    }
    Ok(2.0 / weights.get(l)? + 1.0 / weights.get(l - 1)?)
}

/// Resistance between two boundary-word prefixes of a truncated tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResistance {
    pub split_level: usize,
    /// From the network solver.
    pub network: f64,
    /// `2 Σ_{n=split}^{depth-1} r(n)`.
    pub series: f64,
    /// `2 Σ_{n>=split} r(n)`, when the tail has a closed form.
    pub limit: Option<f64>,
}

pub fn boundary_resistance(
    net: &Network,
    a: &Word,
    b: &Word,
    weights: &LevelWeights,
    depth: usize,
) -> Result<BoundaryResistance> {
    if a == b {
        return Err(Error::IdenticalWords);
    }
    if a.len() != depth || b.len() != depth {
        return Err(Error::InvalidArgument(format!(
            "words must have length {depth}"
        )));
    }
    let split = a.common_prefix_len(b);
    let network = net.resistance(net.vertex(&a.name())?, net.vertex(&b.name())?)?;
    Ok(BoundaryResistance {
        split_level: split,
        network,
        series: 2.0 * weights.partial_sum(split, depth)?,
        limit: weights.tail_sum(split).map(|t| 2.0 * t),
    })
}

/// `R(ω|_n, ω|_m) = Σ_{k=n}^{m-1} r(k)` along one branch (series path).
pub fn branch_resistance(weights: &LevelWeights, n: usize, m: usize) -> Result<f64> {
    let (lo, hi) = (n.min(m), n.max(m));
    weights.partial_sum(lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub level: usize,
    pub energy: f64,
    pub multiplicity: u64,
    /// Level-1 energies involve the root convention `r(0)`.
    pub convention_dependent: bool,
}

/// Closed-form `‖δ_α‖²` per interior level `1..depth-1` with `2^level` words
/// each.
pub fn energy_histogram(depth: usize, weights: &LevelWeights) -> Result<Vec<HistogramRow>> {
    if depth < 2 {
        return Err(Error::InvalidArgument("histogram needs depth >= 2".into()));
    }
    (1..depth)
        .map(|level| {
            Ok(HistogramRow {
                level,
                energy: 2.0 / weights.get(level)? + 1.0 / weights.get(level - 1)?,
                multiplicity: 1u64 << level,
                convention_dependent: level == 1,
            })
        })
        .collect()
}

pub fn histogram_csv(rows: &[HistogramRow], weights: &LevelWeights) -> String {
    let mut out = format!(
        "# r(0) = {}\nlevel,energy,multiplicity,convention_dependent\n",
        crate::io::fmt_f64(weights.r0())
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.level,
            crate::io::fmt_f64(r.energy),
            r.multiplicity,
            r.convention_dependent
        ));
    }
    out
}
