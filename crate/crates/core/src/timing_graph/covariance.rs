//! Accumulated path delays and the shared-edge correlation matrix of the
//! standardized path delays.

use super::graph::TimingGraph;
use super::paths::PathSet;
use crate::error::{domain, Result};
use crate::format::real;
use crate::montecarlo::Stream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// `(sum mu_e, sqrt(sum sigma_e^2))` over the edges of `path`.
pub fn accumulated_delay_params(g: &TimingGraph, path: &[usize]) -> (f64, f64) {
    let (mean, var) = path.iter().fold((0.0, 0.0), |(m, v), &e| {
        let edge = g.edges()[e];
        (m + edge.mu, v + edge.sigma * edge.sigma)
    });
    (mean, var.sqrt())
}

/// Symmetric correlation matrix of the standardized path delays, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCovariance {
    pub n: usize,
    pub matrix: Vec<f64>,
}

impl PathCovariance {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    /// Rows as nested vectors.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// CSV with header `path,0,1,..` and one labelled row per path.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "path")?;
        for j in 0..self.n {
            write!(w, ",{j}")?;
        }
        writeln!(w)?;
        for i in 0..self.n {
            write!(w, "{i}")?;
            for j in 0..self.n {
                write!(w, ",{}", real(self.get(i, j)))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Correlation of the delays of every pair of paths: the variance of the
/// shared edges over the product of the path standard deviations. With one
/// `(mu, sigma)` on every edge this is `|shared edges| / sqrt(L_i L_j)`.
///
/// A path with zero variance is treated as uncorrelated with the others and
/// keeps a unit diagonal.
pub fn path_covariance(ps: &PathSet, g: &TimingGraph) -> PathCovariance {
    let n = ps.len();
    let sorted: Vec<Vec<usize>> = ps
        .paths
        .iter()
        .map(|p| {
            let mut s = p.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let stds: Vec<f64> = ps
        .paths
        .iter()
        .map(|p| accumulated_delay_params(g, p).1)
        .collect();
    let shared_variance = |a: &[usize], b: &[usize]| {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let s = g.edges()[a[i]].sigma;
                    acc += s * s;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    };
    let matrix: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                return 1.0;
            }
            let scale = stds[i] * stds[j];
            if scale == 0.0 {
                return 0.0;
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            (shared_variance(&sorted[a], &sorted[b]) / scale).clamp(0.0, 1.0)
        })
        .collect();
    PathCovariance { n, matrix }
}

/// Monte Carlo estimate of the path correlations from `reps` joint draws of
/// all edge noises. With `eps_i` the standardized random part of path `i`,
/// the estimate is `<eps_i eps_j> / sqrt(<eps_i^2> <eps_j^2>)`; normalizing by
/// the sampled second moments removes most of the noise in `<eps_i eps_j>`.
pub fn sampled_path_correlation(
    ps: &PathSet,
    g: &TimingGraph,
    reps: usize,
    seed: u64,
) -> Result<PathCovariance> {
    if reps < 2 {
        return Err(domain("need at least two realizations"));
    }
    let n = ps.len();
    let stds: Vec<f64> = ps
        .paths
        .iter()
        .map(|p| accumulated_delay_params(g, p).1)
        .collect();
    let mut acc = vec![0.0; n * n];
    let mut xi = vec![0.0; g.edge_count()];
    let mut eps = vec![0.0; n];
    for r in 0..reps {
        let mut s = Stream::new(seed, r as u64);
        for x in xi.iter_mut() {
            *x = s.standard_normal();
        }
        for (i, p) in ps.paths.iter().enumerate() {
            let sum: f64 = p.iter().map(|&e| g.edges()[e].sigma * xi[e]).sum();
            eps[i] = if stds[i] > 0.0 { sum / stds[i] } else { 0.0 };
        }
        for i in 0..n {
            for j in i..n {
                acc[i * n + j] += eps[i] * eps[j];
            }
        }
    }
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let norm = (acc[i * n + i] * acc[j * n + j]).sqrt();
            let v = if norm > 0.0 {
                acc[i * n + j] / norm
            } else if i == j {
                1.0
            } else {
                0.0
            };
            matrix[i * n + j] = v;
            matrix[j * n + i] = v;
        }
    }
    Ok(PathCovariance { n, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing_graph::graph::parse_graph;
    use crate::timing_graph::paths::enumerate_paths;

    #[test]
    fn disjoint_paths_give_identity() {
        let g = parse_graph("s a 1 1\ns b 1 1\na t 1 1\nb t 1 1").unwrap();
        let c = path_covariance(&enumerate_paths(&g, 10).unwrap(), &g);
        assert_eq!(c.matrix, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn duplicated_path_is_fully_correlated() {
        let g = parse_graph("s t 1 1").unwrap();
        let ps = PathSet {
            paths: vec![vec![0], vec![0]],
            lengths: vec![1, 1],
        };
        assert_eq!(path_covariance(&ps, &g).get(0, 1), 1.0);
    }

    #[test]
    fn short_path_inside_long_one() {
        // path 0 = {e0}, path 1 = {e0, e1, e2, e3}: entry 1/sqrt(4)
        let g = parse_graph("s t 1 1\ns a 1 1\na b 1 1").unwrap();
        let ps = PathSet {
            paths: vec![vec![0], vec![0, 1, 2]],
            lengths: vec![1, 3],
        };
        assert!((path_covariance(&ps, &g).get(0, 1) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn heterogeneous_weights() {
        // shared edge sigma 2, private edges sigma 1 and 3
        let g = parse_graph("s m 0 2\nm a 0 1\nm b 0 3\na t 0 0\nb t 0 0").unwrap();
        let ps = enumerate_paths(&g, 10).unwrap();
        let c = path_covariance(&ps, &g);
        let expected = 4.0 / (5f64.sqrt() * 13f64.sqrt());
        assert!((c.get(0, 1) - expected).abs() < 1e-15);
        assert_eq!(
            accumulated_delay_params(&g, &ps.paths[1]),
            (0.0, 13f64.sqrt())
        );
    }

    #[test]
    fn zero_variance_path() {
        let g = parse_graph("s t 0 0").unwrap();
        assert_eq!(accumulated_delay_params(&g, &[0]), (0.0, 0.0));
        let ps = PathSet {
            paths: vec![vec![0], vec![0]],
            lengths: vec![1, 1],
        };
        assert_eq!(path_covariance(&ps, &g).matrix, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn csv_layout() {
        let c = PathCovariance {
            n: 2,
            matrix: vec![1.0, 0.5, 0.5, 1.0],
        };
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path,0,1");
        assert_eq!(lines[1], "0,1.0000000000000000e0,5.0000000000000000e-1");
    }
}
