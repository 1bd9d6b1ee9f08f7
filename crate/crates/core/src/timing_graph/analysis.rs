//! End-to-end delay analysis of a timing graph: paths, correlations, the
//! corrected extreme-value law and a Monte Carlo cross-check.

use super::covariance::{accumulated_delay_params, path_covariance, PathCovariance};
use super::graph::{normalize_source_sink, TimingGraph};
use super::paths::enumerate_paths;
use crate::corrections::{
    corrected_cdf, corrected_mean, corrected_pdf, correlation_sum, validity_check, CorrelationSum,
    EpsilonMatrix, Order, ValidityReport,
};
use crate::error::{domain, Result};
use crate::gumbel::GumbelParams;
use crate::montecarlo::{sample_multivariate_max_with_mean, McConfig};
use crate::normal::{normal_pdf, std_normal_cdf};
use serde::{Deserialize, Serialize};

/// Grid of the reported distribution, in standardized units relative to
/// the Gumbel location (or to the mean for a single path).
pub const GRID_BELOW: f64 = 2.0;
pub const GRID_ABOVE: f64 = 4.0;
pub const GRID_POINTS: usize = 601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub nodes: Vec<String>,
    pub length: usize,
    pub mean: f64,
    pub std: f64,
}

/// One grid point: standardized `z`, delay `nominal_mean + nominal_std z`,
/// and the distribution of the maximum delay there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionPoint {
    pub z: f64,
    pub delay: f64,
    pub cdf: f64,
    pub pdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloCheck {
    pub reps: usize,
    pub seed: u64,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphAnalysis {
    pub path_count: usize,
    pub paths: Vec<PathSummary>,
    pub covariance: Vec<Vec<f64>>,
    pub correlation_sum: CorrelationSum,
    pub order: Order,
    /// Path with the largest mean (ties: larger std, then first); its mean
    /// and std standardize the corrected law.
    pub nominal_path: usize,
    pub nominal_mean: f64,
    pub nominal_std: f64,
    /// Absent for a single path, where the exact normal law is reported.
    pub gumbel: Option<GumbelParams>,
    pub validity: Option<ValidityReport>,
    pub analytic_mean: f64,
    pub distribution: Vec<DistributionPoint>,
    pub monte_carlo: MonteCarloCheck,
    /// `analytic_mean - monte_carlo.mean`.
    pub mean_gap: f64,
}

impl GraphAnalysis {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|k| lo + k as f64 * step).collect()
}

/// Analyzes the maximum source-to-sink delay of `g`.
///
/// The analytic part treats the standardized path delays as identically
/// distributed, using the slowest path's mean and std as the common scale,
/// and corrects the Gumbel law for the path correlations with `order`. The
/// Monte Carlo part samples the actual correlated path delays, so
/// `mean_gap` measures the cost of that approximation.
pub fn graph_delay_analysis(
    g: &TimingGraph,
    cfg: &McConfig,
    order: Order,
    cap: usize,
) -> Result<GraphAnalysis> {
    let g = normalize_source_sink(g);
    let ps = enumerate_paths(&g, cap)?;
    let n = ps.len();
    let cov = path_covariance(&ps, &g);
    let paths: Vec<PathSummary> = (0..n)
        .map(|i| {
            let (mean, std) = accumulated_delay_params(&g, &ps.paths[i]);
            PathSummary {
                nodes: ps.node_names(&g, i),
                length: ps.lengths[i],
                mean,
                std,
            }
        })
        .collect();
    let nominal_path = (0..n)
        .reduce(|best, i| {
            let (a, b) = (&paths[best], &paths[i]);
            if (b.mean, b.std) > (a.mean, a.std) {
                i
            } else {
                best
            }
        })
        .expect("at least one path");
    let (nominal_mean, nominal_std) = (paths[nominal_path].mean, paths[nominal_path].std);
    if nominal_std <= 0.0 {
        return Err(domain("the slowest path has zero delay variance"));
    }

    let monte_carlo = monte_carlo_check(&paths, &cov, cfg)?;
    let eps = EpsilonMatrix::from_correlation(n, &cov.matrix)?;
    let s = correlation_sum(&eps);
    let to_delay = |z: f64| nominal_mean + nominal_std * z;

    let (gumbel, validity, analytic_mean, distribution) = if n == 1 {
        let distribution = grid(-GRID_BELOW, GRID_ABOVE)
            .into_iter()
            .map(|z| DistributionPoint {
                z,
                delay: to_delay(z),
                cdf: std_normal_cdf(z),
                pdf: normal_pdf(to_delay(z), nominal_mean, nominal_std),
            })
            .collect();
        (None, None, nominal_mean, distribution)
    } else {
        let p = GumbelParams::for_count(n)?;
        let zs = grid(p.alpha - GRID_BELOW, p.alpha + GRID_ABOVE);
        let validity = validity_check(&p, s, &eps, &zs, order)?;
        let z_mean = corrected_mean(&p, s, order);
        let distribution = zs
            .into_iter()
            .map(|z| DistributionPoint {
                z,
                delay: to_delay(z),
                cdf: corrected_cdf(z, &p, s, order),
                pdf: corrected_pdf(z, &p, s, order) / nominal_std,
            })
            .collect();
        (Some(p), Some(validity), to_delay(z_mean), distribution)
    };

    Ok(GraphAnalysis {
        path_count: n,
        covariance: cov.rows(),
        paths,
        correlation_sum: s,
        order,
        nominal_path,
        nominal_mean,
        nominal_std,
        gumbel,
        validity,
        analytic_mean,
        distribution,
        mean_gap: analytic_mean - monte_carlo.mean,
        monte_carlo,
    })
}

fn monte_carlo_check(
    paths: &[PathSummary],
    cov: &PathCovariance,
    cfg: &McConfig,
) -> Result<MonteCarloCheck> {
    let n = paths.len();
    let means: Vec<f64> = paths.iter().map(|p| p.mean).collect();
    let delay_cov: Vec<f64> = (0..n * n)
        .map(|k| cov.matrix[k] * paths[k / n].std * paths[k % n].std)
        .collect();
    let r = sample_multivariate_max_with_mean(&means, &delay_cov, cfg)?;
    Ok(MonteCarloCheck {
        reps: cfg.reps,
        seed: cfg.seed,
        mean: r.mean,
        std: r.std,
        std_error: r.std_error(),
    })
}
