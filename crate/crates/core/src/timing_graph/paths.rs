//! Source-to-sink path enumeration.

use super::graph::TimingGraph;
use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PATH_CAP: usize = 10_000;

/// Source-to-sink paths as edge-index sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Vec<usize>>,
    pub lengths: Vec<usize>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Node names visited by path `i`, source first.
    pub fn node_names(&self, g: &TimingGraph, i: usize) -> Vec<String> {
        let path = &self.paths[i];
        let mut names = vec![g.node_name(g.edges()[path[0]].from).to_string()];
        names.extend(
            path.iter()
                .map(|&e| g.node_name(g.edges()[e].to).to_string()),
        );
        names
    }
}

/// Depth-first enumeration of all paths from the unique source to the unique
/// sink. Outgoing edges are followed in declaration order, so the result is
/// fully determined by the input file.
///
/// Fails with [`Error::PathExplosion`] as soon as more than `cap` paths are
/// found.
pub fn enumerate_paths(g: &TimingGraph, cap: usize) -> Result<PathSet> {
    if cap < 1 {
        return Err(domain("path cap must be at least 1"));
    }
    let (sources, sinks) = (g.sources(), g.sinks());
    if sources.len() != 1 || sinks.len() != 1 {
        return Err(domain(format!(
            "graph has {} sources and {} sinks; normalize it first",
            sources.len(),
            sinks.len()
        )));
    }
    let (source, sink) = (sources[0], sinks[0]);
    let mut paths = Vec::new();
    let mut trail: Vec<usize> = Vec::new();
    let mut stack = vec![(source, 0usize)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if v == sink {
            if paths.len() == cap {
                return Err(Error::PathExplosion {
                    cap,
                    reached: cap + 1,
                });
            }
            paths.push(trail.clone());
            stack.pop();
            trail.pop();
            continue;
        }
        match g.out_edges(v).get(*next) {
            Some(&e) => {
                *next += 1;
                trail.push(e);
                stack.push((g.edges()[e].to, 0));
            }
            None => {
                stack.pop();
                trail.pop();
            }
        }
    }
    let lengths = paths.iter().map(Vec::len).collect();
    Ok(PathSet { paths, lengths })
}
