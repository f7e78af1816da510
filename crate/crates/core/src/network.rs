//! Finite electrical networks: Laplacian, energy form, dipoles, the Green's
//! kernel of the energy space, point-mass norms and the resistance metric.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{Domain, Kernel};
use crate::linalg::{conjugate_gradient, PivotedCholesky};
use crate::point::{Point, PointSet};

/// Grounded systems up to this many vertices are factored densely; larger
/// ones use preconditioned conjugate gradients.
pub const DENSE_LIMIT: usize = 2000;

const CG_RTOL: f64 = 1e-14;

/// An undirected edge with positive conductance `c = 1 / resistance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
}

enum GroundedSolver {
    Dense(PivotedCholesky),
    Iterative,
}

/// Connected weighted graph `(V, E, c)` with a base point `o`.
pub struct Network {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    base: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    boundary: BTreeSet<usize>,
    solver: OnceLock<GroundedSolver>,
    dipoles: Vec<OnceLock<Arc<Vec<f64>>>>,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edges.len())
            .field("base", &self.vertices[self.base])
            .finish()
    }
}

/// Vertex values normalized to vanish at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyFunction {
    values: Vec<f64>,
}

impl EnergyFunction {
    /// Shift `values` so the base value is zero.
    pub fn new(net: &Network, values: &[f64]) -> Result<Self> {
        if values.len() != net.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} vertex values, got {}",
                net.len(),
                values.len()
            )));
        }
        let shift = values[net.base];
        Ok(Self {
            values: values.iter().map(|v| v - shift).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `v_x` with `Δ v_x = δ_x - δ_o` and `v_x(o) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dipole {
    pub pole: usize,
    pub function: EnergyFunction,
}

impl Network {
    pub fn new<S: AsRef<str>>(vertices: &[S], base: &str, edges: &[(S, S, f64)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate vertex {v}")));
            }
        }
        let base = *index
            .get(base)
            .ok_or_else(|| Error::InvalidNetwork(format!("base {base} is not a vertex")))?;
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("edge endpoint {s} is not a vertex")))
        };
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for (a, b, c) in edges {
            let (u, v) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if u == v {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop at {}",
                    a.as_ref()
                )));
            }
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "conductance on {}-{} must be positive, got {c}",
                    a.as_ref(),
                    b.as_ref()
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {}-{}",
                    a.as_ref(),
                    b.as_ref()
                )));
            }
            list.push(Edge {
                u,
                v,
                conductance: *c,
            });
        }
        Self::from_parts(vertices, index, base, list)
    }

    fn from_parts(
        vertices: Vec<String>,
        index: HashMap<String, usize>,
        base: usize,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.v, e.conductance));
            adjacency[e.v].push((e.u, e.conductance));
        }
        let net = Self {
            vertices,
            index,
            base,
            edges,
            adjacency,
            boundary: BTreeSet::new(),
            solver: OnceLock::new(),
            dipoles: (0..n).map(|_| OnceLock::new()).collect(),
        };
        if !net.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(net)
    }

    /// Path `o - x_1 - x_2 - ...` over increasing coordinates with
    /// `c = 1 / gap`; the base sits at coordinate 0.
    pub fn coordinate_path(xs: &[f64]) -> Result<Self> {
        let mut prev = 0.0;
        let mut names = vec!["o".to_string()];
        let mut edges = Vec::with_capacity(xs.len());
        for &x in xs {
            if x <= prev {
                return Err(Error::InvalidArgument(
                    "coordinates must increase from 0".into(),
                ));
            }
            let name = x.to_string();
            edges.push((
                names.last().cloned().unwrap(),
                name.clone(),
                1.0 / (x - prev),
            ));
            names.push(name);
            prev = x;
        }
        let mut net = Self::new(&names, "o", &edges)?;
        // the far endpoint of a truncated half-line lacks its right neighbor
        if let Some(last) = names.last() {
            net = net.with_boundary(&[last.as_str()])?;
        }
        Ok(net)
    }

    /// Mark vertices whose neighborhood in the full (untruncated) graph is
    /// incomplete.
    pub fn with_boundary<S: AsRef<str>>(mut self, boundary: &[S]) -> Result<Self> {
        for b in boundary {
            let i = self.vertex(b.as_ref())?;
            self.boundary.insert(i);
        }
        Ok(self)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.len()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn base_name(&self) -> &str {
        &self.vertices[self.base]
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn boundary(&self) -> &BTreeSet<usize> {
        &self.boundary
    }

    /// Whether every neighbor `x` has in the full graph is present.
    pub fn is_interior(&self, x: usize) -> bool {
        !self.boundary.contains(&x)
    }

    /// Vertices other than the base, in vertex order.
    pub fn non_base(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| i != self.base)
    }

    /// `c(x) = Σ_{y~x} c_xy`.
    pub fn total_conductance(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|(_, c)| c).sum()
    }

    /// `(Δf)(x) = Σ_{y~x} c_xy (f(x) - f(y))`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len());
        (0..self.len())
            .map(|x| {
                self.adjacency[x]
                    .iter()
                    .map(|&(y, c)| c * (f[x] - f[y]))
                    .sum()
            })
            .collect()
    }

    /// `½ ΣΣ c_xy (f(x) - f(y)) (g(x) - g(y))`, summing each edge once.
    pub fn energy_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (f[e.u] - f[e.v]) * (g[e.u] - g[e.v]))
            .sum()
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        self.energy_inner(f, f)
    }

    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for e in &self.edges {
            m[(e.u, e.u)] += e.conductance;
            m[(e.v, e.v)] += e.conductance;
            m[(e.u, e.v)] -= e.conductance;
            m[(e.v, e.u)] -= e.conductance;
        }
        m
    }

    fn solver(&self) -> &GroundedSolver {
        self.solver.get_or_init(|| {
            if self.len() - 1 <= DENSE_LIMIT {
                let keep: Vec<usize> = self.non_base().collect();
                let full = self.laplacian_matrix();
                let reduced =
                    DMatrix::from_fn(keep.len(), keep.len(), |i, j| full[(keep[i], keep[j])]);
                GroundedSolver::Dense(PivotedCholesky::factor(&reduced))
            } else {
                GroundedSolver::Iterative
            }
        })
    }

    /// Solve `Δu = rhs` off the base with `u(o) = 0`. `rhs[o]` is ignored.
    pub fn solve_grounded(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let keep: Vec<usize> = self.non_base().collect();
        let b: Vec<f64> = keep.iter().map(|&i| rhs[i]).collect();
        let reduced = match self.solver() {
            GroundedSolver::Dense(f) => {
                if !f.is_strictly_pd() {
                    return Err(Error::Disconnected);
                }
                let b = DVector::from_vec(b);
                let (x, _) = f.solve_in_range(&b);
                x.iter().copied().collect::<Vec<_>>()
            }
            GroundedSolver::Iterative => {
                let diag: Vec<f64> = keep.iter().map(|&i| self.total_conductance(i)).collect();
                let base = self.base;
                let n = self.len();
                let apply = |v: &[f64], out: &mut [f64]| {
                    let mut full = vec![0.0; n];
                    for (k, &i) in keep.iter().enumerate() {
                        full[i] = v[k];
                    }
                    debug_assert_eq!(full[base], 0.0);
                    for (k, &i) in keep.iter().enumerate() {
                        out[k] = self.adjacency[i]
                            .iter()
                            .map(|&(j, c)| c * (full[i] - full[j]))
                            .sum();
                    }
                };
                let (x, _rel) = conjugate_gradient(apply, &diag, &b, CG_RTOL, 20 * n + 100);
                x
            }
        };
        let mut u = vec![0.0; self.len()];
        for (k, &i) in keep.iter().enumerate() {
            u[i] = reduced[k];
        }
        Ok(u)
    }

    fn dipole_values(&self, x: usize) -> Result<Arc<Vec<f64>>> {
        if x == self.base {
            return Err(Error::BasePoint(self.name(x).to_string()));
        }
        if let Some(v) = self.dipoles[x].get() {
            return Ok(v.clone());
        }
        let mut rhs = vec![0.0; self.len()];
        rhs[x] = 1.0;
        let v = Arc::new(self.solve_grounded(&rhs)?);
        Ok(self.dipoles[x].get_or_init(|| v).clone())
    }

    pub fn dipole(&self, x: usize) -> Result<Dipole> {
        let values = self.dipole_values(x)?;
        Ok(Dipole {
            pole: x,
            function: EnergyFunction {
                values: values.as_ref().clone(),
            },
        })
    }

    /// `k(x, y) = ⟨v_x, v_y⟩ = v_x(y)`; zero when either is the base.
    pub fn green(&self, x: usize, y: usize) -> Result<f64> {
        if x == self.base || y == self.base {
            return Ok(0.0);
        }
        Ok(self.dipole_values(x)?[y])
    }

    /// `‖δ_x‖² = c(x)`, the total conductance at `x`.
    pub fn delta_norm_sq(&self, x: usize) -> f64 {
        self.total_conductance(x)
    }

    /// `δ_x = c(x) v_x - Σ_{y~x} c_xy v_y` as (dipole pole, coefficient)
    /// pairs; the base term drops out since `v_o ≡ 0`.
    pub fn delta_expand(&self, x: usize) -> Vec<(usize, f64)> {
        let mut terms = Vec::with_capacity(self.adjacency[x].len() + 1);
        if x != self.base {
            terms.push((x, self.total_conductance(x)));
        }
        for &(y, c) in &self.adjacency[x] {
            if y != self.base {
                terms.push((y, -c));
            }
        }
        terms
    }

    /// Evaluate a combination of dipoles pointwise.
    pub fn evaluate_dipole_combination(&self, terms: &[(usize, f64)]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        for &(pole, coeff) in terms {
            let v = self.dipole_values(pole)?;
            for (o, vi) in out.iter_mut().zip(v.iter()) {
                *o += coeff * vi;
            }
        }
        Ok(out)
    }

    /// `R(x, y) = ‖v_x - v_y‖²`, the voltage drop for unit current from `x`
    /// to `y`.
    pub fn resistance(&self, x: usize, y: usize) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        let mut rhs = vec![0.0; self.len()];
        rhs[x] += 1.0;
        rhs[y] -= 1.0;
        let u = self.solve_grounded(&rhs)?;
        Ok((u[x] - u[y]).max(0.0))
    }

    /// `(R(o, x) + R(o, y) - R(x, y)) / 2`.
    pub fn kernel_from_resistance(&self, x: usize, y: usize) -> Result<f64> {
        let o = self.base;
        Ok((self.resistance(o, x)? + self.resistance(o, y)? - self.resistance(x, y)?) / 2.0)
    }

    /// All vertices other than the base, as vertex labels.
    pub fn grounded_points(&self) -> PointSet {
        PointSet::new(
            self.non_base()
                .map(|i| Point::Vertex(self.vertices[i].clone()))
                .collect(),
        )
        .expect("connected networks with at least one edge have a non-base vertex")
    }
}

/// The Green's kernel of a network, as a [`Kernel`] on `V ∖ {o}`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    net: Arc<Network>,
}

pub fn green_kernel(net: Arc<Network>) -> GreenKernel {
    GreenKernel { net }
}

impl GreenKernel {
    pub fn network(&self) -> &Network {
        &self.net
    }

    fn vertex_of(&self, p: &Point) -> Option<usize> {
        let i = self.net.vertex(p.as_vertex()?).ok()?;
        (i != self.net.base).then_some(i)
    }
}

impl Kernel for GreenKernel {
    fn domain(&self) -> Domain {
        Domain::NetworkVertices
    }

    fn name(&self) -> &str {
        "network"
    }

    fn accepts(&self, p: &Point) -> bool {
        self.vertex_of(p).is_some()
    }

    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self.vertex_of(x), self.vertex_of(y)) {
            (Some(i), Some(j)) => self.net.green(i, j).unwrap_or(f64::NAN),
            _ => f64::NAN,
        }
    }
}
