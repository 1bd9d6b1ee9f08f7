//! Timing-graph model and its text/JSON formats.
//!
//! Text format, one edge per line:
//!
//! ```text
//! # comment
//! FROM TO MU SIGMA
//! ```
//!
//! Delays live on edges. Node delays can be expressed by splitting a node
//! into an input and an output node joined by an edge; this is not done
//! automatically.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Name prefix for the virtual nodes added by [`normalize_source_sink`].
pub const VIRTUAL_SOURCE: &str = "__source__";
pub const VIRTUAL_SINK: &str = "__sink__";

/// Edge with Gaussian delay `mu + sigma * xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub mu: f64,
    pub sigma: f64,
}

/// Edge keyed by node names, as found in input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GraphFile {
    edges: Vec<EdgeSpec>,
}

/// Directed acyclic graph with delays on edges. Nodes are kept in order of
/// first appearance and edges in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl TimingGraph {
    /// Builds and validates a graph. Rejects self-loops and cycles
    /// ([`Error::Cycle`]), duplicates ([`Error::DuplicateEdge`]) and negative
    /// or non-finite delays.
    pub fn from_edges(specs: Vec<EdgeSpec>) -> Result<Self> {
        Self::build(specs.into_iter().map(|e| (0, e)))
    }

    fn build(specs: impl IntoIterator<Item = (usize, EdgeSpec)>) -> Result<Self> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut g = TimingGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            out_edges: Vec::new(),
            in_degree: Vec::new(),
        };
        let mut seen = HashMap::new();
        for (line, spec) in specs {
            let bad = |message: String| Error::Parse { line, message };
            if !(spec.mu.is_finite() && spec.mu >= 0.0) {
                return Err(bad(format!(
                    "MU must be a nonnegative number, got {}",
                    spec.mu
                )));
            }
            if !(spec.sigma.is_finite() && spec.sigma >= 0.0) {
                return Err(bad(format!(
                    "SIGMA must be a nonnegative number, got {}",
                    spec.sigma
                )));
            }
            if spec.from == spec.to {
                if line > 0 {
                    return Err(bad(format!("self-loop on `{}`", spec.from)));
                }
                return Err(Error::Cycle { node: spec.from });
            }
            let from = g.intern(&mut index, &spec.from);
            let to = g.intern(&mut index, &spec.to);
            if seen.insert((from, to), ()).is_some() {
                return Err(Error::DuplicateEdge {
                    from: spec.from,
                    to: spec.to,
                });
            }
            g.push_edge(Edge {
                from,
                to,
                mu: spec.mu,
                sigma: spec.sigma,
            });
        }
        if g.edges.is_empty() {
            return Err(Error::EmptyInput);
        }
        g.check_acyclic()?;
        Ok(g)
    }

    fn intern(&mut self, index: &mut HashMap<String, usize>, name: &str) -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let i = self.add_node(name.to_string());
        index.insert(name.to_string(), i);
        i
    }

    fn add_node(&mut self, name: String) -> usize {
        self.nodes.push(name);
        self.out_edges.push(Vec::new());
        self.in_degree.push(0);
        self.nodes.len() - 1
    }

    fn push_edge(&mut self, e: Edge) {
        self.out_edges[e.from].push(self.edges.len());
        self.in_degree[e.to] += 1;
        self.edges.push(e);
    }

    /// Iterative three-colour DFS; reports a node that lies on a cycle.
    fn check_acyclic(&self) -> Result<()> {
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let mut colour = vec![WHITE; self.nodes.len()];
        for root in 0..self.nodes.len() {
            if colour[root] != WHITE {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            colour[root] = GREY;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&e) = self.out_edges[v].get(*next) {
                    *next += 1;
                    let w = self.edges[e].to;
                    match colour[w] {
                        WHITE => {
                            colour[w] = GREY;
                            stack.push((w, 0));
                        }
                        GREY => {
                            return Err(Error::Cycle {
                                node: self.nodes[w].clone(),
                            })
                        }
                        _ => {}
                    }
                } else {
                    colour[v] = BLACK;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, v: usize) -> &str {
        &self.nodes[v]
    }

    /// Outgoing edge indices of `v` in declaration order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.in_degree[v] == 0)
            .collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.out_edges[v].is_empty())
            .collect()
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                from: self.nodes[e.from].clone(),
                to: self.nodes[e.to].clone(),
                mu: e.mu,
                sigma: e.sigma,
            })
            .collect()
    }

    /// Every edge has the same `(mu, sigma)`, ignoring zero-delay edges.
    pub fn homogeneous_delay(&self) -> Option<(f64, f64)> {
        let mut real = self
            .edges
            .iter()
            .filter(|e| !(e.mu == 0.0 && e.sigma == 0.0));
        let first = real.next()?;
        real.all(|e| e.mu == first.mu && e.sigma == first.sigma)
            .then_some((first.mu, first.sigma))
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in self.edge_specs() {
            let _ = writeln!(out, "{} {} {} {}", e.from, e.to, e.mu, e.sigma);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            edges: self.edge_specs(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }
}

/// Parses the line-oriented edge-list format.
pub fn parse_graph(text: &str) -> Result<TimingGraph> {
    let mut specs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected `FROM TO MU SIGMA`, got {} fields", fields.len()),
            });
        }
        let number = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{what} `{s}` is not a number"),
            })
        };
        specs.push((
            line,
            EdgeSpec {
                from: fields[0].to_string(),
                to: fields[1].to_string(),
                mu: number(fields[2], "MU")?,
                sigma: number(fields[3], "SIGMA")?,
            },
        ));
    }
    TimingGraph::build(specs)
}

/// Parses `{"edges": [{"from": .., "to": .., "mu": .., "sigma": ..}, ..]}`.
pub fn parse_graph_json(text: &str) -> Result<TimingGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    TimingGraph::from_edges(file.edges)
}

/// Picks the JSON parser when the content starts with `{`.
pub fn parse_graph_auto(text: &str) -> Result<TimingGraph> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_graph(text)
    }
}

fn fresh_name(g: &TimingGraph, base: &str) -> String {
    let mut name = base.to_string();
    while g.nodes.iter().any(|n| n == &name) {
        name.push('_');
    }
    name
}

/// Adds a virtual source (sink) joined by zero-delay edges when the graph
/// has several nodes without predecessors (successors). Idempotent.
pub fn normalize_source_sink(g: &TimingGraph) -> TimingGraph {
    let mut out = g.clone();
    let sources = g.sources();
    if sources.len() > 1 {
        let s = out.add_node(fresh_name(g, VIRTUAL_SOURCE));
        for v in sources {
            out.push_edge(Edge {
                from: s,
                to: v,
                mu: 0.0,
                sigma: 0.0,
            });
        }
    }
    let sinks = g.sinks();
    if sinks.len() > 1 {
        let t = out.add_node(fresh_name(&out, VIRTUAL_SINK));
        for v in sinks {
            out.push_edge(Edge {
                from: v,
                to: t,
                mu: 0.0,
                sigma: 0.0,
            });
        }
    }
    out
}

/// `stages` diamonds in series, each splitting into two parallel edges and
/// rejoining; `2^stages` source-to-sink paths, all edges `(mu, sigma)`.
pub fn diamond_cascade(stages: usize, mu: f64, sigma: f64) -> Result<TimingGraph> {
    let mut specs = Vec::new();
    for k in 0..stages {
        let (head, tail) = (format!("n{k}"), format!("n{}", k + 1));
        for branch in ["a", "b"] {
            let mid = format!("{branch}{k}");
            specs.push(EdgeSpec {
                from: head.clone(),
                to: mid.clone(),
                mu,
                sigma,
            });
            specs.push(EdgeSpec {
                from: mid,
                to: tail.clone(),
                mu,
                sigma,
            });
        }
    }
    TimingGraph::from_edges(specs)
}
