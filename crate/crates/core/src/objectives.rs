//! Benchmark functions and the evaluation-cost injector.
//!
//! All four functions have their minimum value 0 (at the origin, or at the
//! all-ones point for Rosenbrock). The injector runs Bellman-Ford over a fixed
//! random graph on every call and leaves the fitness value untouched.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::mix;

/// Edges in every generated complexity graph.
pub const GRAPH_EDGES: usize = 10_000;

/// Vertex counts accepted for complexity injection; 0 disables it.
pub const COMPLEXITY_LEVELS: [usize; 4] = [0, 200, 400, 600];

/// Anything that can score a candidate solution (lower is better).
pub trait Objective: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    10.0 * n
        + x.iter()
            .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum()
}

/// Sum of squared prefix sums, `Σ_i (Σ_{j≤i} x_j)²`.
pub fn ellipsoid(x: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for &v in x {
        prefix += v;
        total += prefix * prefix;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkFunction {
    Sphere,
    Rastrigin,
    Rosenbrock,
    Ellipsoid,
}

impl BenchmarkFunction {
    pub const ALL: [BenchmarkFunction; 4] = [
        BenchmarkFunction::Sphere,
        BenchmarkFunction::Rastrigin,
        BenchmarkFunction::Rosenbrock,
        BenchmarkFunction::Ellipsoid,
    ];

    pub fn value(self, x: &[f64]) -> f64 {
        match self {
            BenchmarkFunction::Sphere => sphere(x),
            BenchmarkFunction::Rastrigin => rastrigin(x),
            BenchmarkFunction::Rosenbrock => rosenbrock(x),
            BenchmarkFunction::Ellipsoid => ellipsoid(x),
        }
    }

    /// A point where the function attains 0.
    pub fn optimum(self, n: usize) -> Vec<f64> {
        match self {
            BenchmarkFunction::Rosenbrock => vec![1.0; n],
            _ => vec![0.0; n],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkFunction::Sphere => "sphere",
            BenchmarkFunction::Rastrigin => "rastrigin",
            BenchmarkFunction::Rosenbrock => "rosenbrock",
            BenchmarkFunction::Ellipsoid => "ellipsoid",
        }
    }
}

impl Objective for BenchmarkFunction {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self.value(x))
    }
}

impl fmt::Display for BenchmarkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sphere" => Ok(BenchmarkFunction::Sphere),
            "rastrigin" => Ok(BenchmarkFunction::Rastrigin),
            "rosenbrock" => Ok(BenchmarkFunction::Rosenbrock),
            "ellipsoid" => Ok(BenchmarkFunction::Ellipsoid),
            other => Err(Error::contract(format!("unknown function '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub weight: f64,
}

/// Immutable weighted digraph used to burn a fixed amount of work per evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl ComplexityGraph {
    /// Builds a graph from explicit edges. Weights must be non-negative.
    pub fn from_edges(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.from as usize >= vertex_count || e.to as usize >= vertex_count {
                return Err(Error::contract(format!(
                    "edge {}->{} outside {vertex_count} vertices",
                    e.from, e.to
                )));
            }
            if !(e.weight >= 0.0 && e.weight.is_finite()) {
                return Err(Error::contract(
                    "edge weights must be finite and non-negative",
                ));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

/// Random graph with exactly [`GRAPH_EDGES`] edges. Endpoints are uniform over
/// the vertices (self-loops allowed) and weights uniform in `[0, 1)`.
pub fn make_graph(vertex_count: usize, graph_seed: u64) -> Result<ComplexityGraph> {
    if vertex_count < 2 {
        return Err(Error::contract(
            "complexity graph needs at least 2 vertices",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(graph_seed, vertex_count as u64));
    let edges = (0..GRAPH_EDGES)
        .map(|_| Edge {
            from: rng.random_range(0..vertex_count as u32),
            to: rng.random_range(0..vertex_count as u32),
            weight: rng.random::<f64>(),
        })
        .collect();
    Ok(ComplexityGraph {
        vertex_count,
        edges,
    })
}

/// Single-source shortest paths. Always performs `vertex_count − 1` full
/// relaxation rounds so the cost does not depend on the data. Unreachable
/// vertices keep `f64::INFINITY`.
pub fn bellman_ford(graph: &ComplexityGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.vertex_count];
    if source >= graph.vertex_count {
        return dist;
    }
    dist[source] = 0.0;
    for _ in 1..graph.vertex_count {
        for e in &graph.edges {
            let cand = dist[e.from as usize] + e.weight;
            let slot = &mut dist[e.to as usize];
            if cand < *slot {
                *slot = cand;
            }
        }
    }
    dist
}

/// An objective with optional Bellman-Ford work attached to every call.
#[derive(Debug, Clone)]
pub struct WithComplexity<O> {
    inner: O,
    graph: Option<Arc<ComplexityGraph>>,
}

pub fn wrap_with_complexity<O: Objective>(
    inner: O,
    graph: Option<Arc<ComplexityGraph>>,
) -> WithComplexity<O> {
    WithComplexity { inner, graph }
}

impl<O> WithComplexity<O> {
    pub fn graph(&self) -> Option<&ComplexityGraph> {
        self.graph.as_deref()
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for WithComplexity<O> {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let y = self.inner.evaluate(x)?;
        let Some(graph) = &self.graph else {
            return Ok(y);
        };
        let dist = bellman_ford(graph, 0);
        let checksum: f64 = dist.iter().filter(|d| d.is_finite()).sum();
        Ok(y + 0.0 * std::hint::black_box(checksum))
    }
}

/// Identifies a benchmark problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub function: BenchmarkFunction,
    pub n: usize,
    /// Graph vertex count for cost injection, 0 for none.
    pub complexity: usize,
    pub graph_seed: u64,
}

impl ObjectiveSpec {
    pub fn new(function: BenchmarkFunction, n: usize) -> Self {
        Self {
            function,
            n,
            complexity: 0,
            graph_seed: 0,
        }
    }

    pub fn with_complexity(mut self, complexity: usize, graph_seed: u64) -> Self {
        self.complexity = complexity;
        self.graph_seed = graph_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::contract(format!("dimension {} < 2", self.n)));
        }
        if !COMPLEXITY_LEVELS.contains(&self.complexity) {
            return Err(Error::contract(format!(
                "complexity {} not one of {COMPLEXITY_LEVELS:?}",
                self.complexity
            )));
        }
        Ok(())
    }

    /// Builds the objective, generating the graph once.
    pub fn instantiate(&self) -> Result<WithComplexity<BenchmarkFunction>> {
        self.validate()?;
        let graph = match self.complexity {
            0 => None,
            v => Some(Arc::new(make_graph(v, self.graph_seed)?)),
        };
        Ok(wrap_with_complexity(self.function, graph))
    }
}
