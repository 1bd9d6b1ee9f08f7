//! Seeded Monte Carlo oracle for maxima of Gaussian vectors.
//!
//! Repetition `r` of an experiment with seed `s` draws from
//! [`Stream::new(s, r)`](rng::Stream::new), so the output is bitwise
//! identical for any worker count.

pub mod rng;
pub mod stats;

use crate::error::{domain, Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rng::{derive_seed, Stream};
pub use stats::{
    dkw_epsilon, ecdf_at, empirical_stats, empirical_stats_auto, freedman_diaconis_bins,
    ks_distance, ks_two_sample, two_sample_band, Histogram, McResult, McSummary,
};

/// Relative tolerance on negative eigenvalues accepted by [`CovarianceRoot`].
pub const PSD_TOLERANCE: f64 = 1e-10;

/// AR(1) chain `X_{i+1} = rho X_i + sigma sqrt(1 - rho^2) Y_i`,
/// `X_0 ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
}

impl Ar1Model {
    pub fn new(n: usize, rho: f64, sigma: f64) -> Result<Self> {
        if n < 1 {
            return Err(domain("AR(1) chain needs at least one variable"));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain(format!("rho must lie in [0, 1], got {rho}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { n, rho, sigma })
    }

    fn walk<'a>(&self, stream: &'a mut Stream) -> impl Iterator<Item = f64> + 'a {
        let (rho, sigma) = (self.rho, self.sigma);
        let innovation = sigma * (1.0 - rho * rho).sqrt();
        let mut x = sigma * stream.standard_normal();
        let first = std::iter::once(x);
        let rest = (1..self.n).map(move |_| {
            x = rho * x + innovation * stream.standard_normal();
            x
        });
        first.chain(rest)
    }
}

/// Repetition count, seed and worker count for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            reps: 10_000,
            seed: 0,
            workers: 1,
        }
    }
}

impl McConfig {
    pub fn new(reps: usize, seed: u64, workers: usize) -> Result<Self> {
        let cfg = Self {
            reps,
            seed,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(domain("reps must be at least 1"));
        }
        if self.workers < 1 {
            return Err(domain("workers must be at least 1"));
        }
        Ok(())
    }

    /// Same settings with a seed derived for sub-experiment `index`.
    pub fn derived(&self, index: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, index),
            ..*self
        }
    }
}

/// Evaluates `draw` once per repetition, each on its own stream, and returns
/// the values in repetition order.
pub fn run_repetitions<F>(cfg: &McConfig, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    cfg.validate()?;
    let one = |r: usize| draw(&mut Stream::new(cfg.seed, r as u64));
    if cfg.workers == 1 {
        return Ok((0..cfg.reps).map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..cfg.reps).into_par_iter().map(one).collect()))
}

/// One AR(1) chain.
pub fn sample_ar1_chain(model: &Ar1Model, stream: &mut Stream) -> Vec<f64> {
    model.walk(stream).collect()
}

/// Maxima of `cfg.reps` independent AR(1) chains.
pub fn sample_max_distribution(model: &Ar1Model, cfg: &McConfig) -> Result<McResult> {
    let maxima = run_repetitions(cfg, |s| model.walk(s).fold(f64::NEG_INFINITY, f64::max))?;
    empirical_stats_auto(maxima)
}

/// Matrix square root `L` with `L L^T = cov`, from the symmetric
/// eigendecomposition. Negative eigenvalues down to
/// `-PSD_TOLERANCE * max(1, lambda_max)` are clipped to zero; anything below
/// is rejected.
#[derive(Debug, Clone)]
pub struct CovarianceRoot {
    n: usize,
    root: DMatrix<f64>,
}

impl CovarianceRoot {
    pub fn new(n: usize, cov: &[f64]) -> Result<Self> {
        if cov.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: cov.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (cov[i * n + j], cov[j * n + i]);
                if (a - b).abs() > PSD_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    return Err(domain(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let m = DMatrix::from_row_slice(n, n, cov);
        let eig = SymmetricEigen::new(m);
        let max_ev = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let min_ev = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_ev < -PSD_TOLERANCE * max_ev.max(1.0) {
            return Err(Error::NotPsd {
                min_eigenvalue: min_ev,
            });
        }
        let mut root = eig.eigenvectors;
        for (k, mut col) in root.column_iter_mut().enumerate() {
            col *= eig.eigenvalues[k].max(0.0).sqrt();
        }
        Ok(Self { n, root })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out = L z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..self.n).map(|k| self.root[(i, k)] * z[k]).sum();
        }
    }
}

/// Maxima of zero-mean Gaussian vectors with covariance `cov` (row-major).
pub fn sample_multivariate_max(n: usize, cov: &[f64], cfg: &McConfig) -> Result<McResult> {
    sample_multivariate_max_with_mean(&vec![0.0; n], cov, cfg)
}

/// Maxima of Gaussian vectors `mean + L z`.
pub fn sample_multivariate_max_with_mean(
    mean: &[f64],
    cov: &[f64],
    cfg: &McConfig,
) -> Result<McResult> {
    let n = mean.len();
    let root = CovarianceRoot::new(n, cov)?;
    let maxima = run_repetitions(cfg, |s| {
        let z: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mut x = vec![0.0; n];
        root.apply(&z, &mut x);
        x.iter()
            .zip(mean)
            .map(|(a, m)| a + m)
            .fold(f64::NEG_INFINITY, f64::max)
    })?;
    empirical_stats_auto(maxima)
}

/// Independent, non-identical normals `X_i ~ N(mu + xi_i dmu, (sigma + xi_i dsigma)^2)`
/// with `xi_i ~ U(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonIidConfig {
    pub n_grid: Vec<usize>,
    pub mu: f64,
    pub sigma: f64,
    pub delta_mu: f64,
    pub delta_sigma: f64,
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    /// Draw the per-component `(mu_i, sigma_i)` once per `n` instead of once
    /// per repetition.
    pub freeze_params: bool,
}

impl Default for NonIidConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![10, 50, 100, 500],
            mu: 0.0,
            sigma: 1.0,
            delta_mu: 0.0,
            delta_sigma: 0.0,
            reps: 10_000,
            seed: 0,
            workers: 1,
            freeze_params: false,
        }
    }
}

/// One row of the non-IID table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonIidRow {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
}

pub fn non_iid_experiment(cfg: &NonIidConfig) -> Result<Vec<NonIidRow>> {
    if !(cfg.sigma.is_finite() && cfg.mu.is_finite()) {
        return Err(domain("mu and sigma must be finite"));
    }
    if cfg.delta_mu < 0.0 || cfg.delta_sigma < 0.0 {
        return Err(domain("deviation strengths must be nonnegative"));
    }
    if cfg.sigma - cfg.delta_sigma <= 0.0 {
        return Err(domain(format!(
            "sigma - delta_sigma = {} must be positive",
            cfg.sigma - cfg.delta_sigma
        )));
    }
    if cfg.n_grid.contains(&0) {
        return Err(domain("n_grid entries must be positive"));
    }
    let base = McConfig::new(cfg.reps, cfg.seed, cfg.workers)?;
    cfg.n_grid
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let mc = base.derived(idx as u64);
            let component =
                |xi: f64| (cfg.mu + xi * cfg.delta_mu, cfg.sigma + xi * cfg.delta_sigma);
            let maxima = if cfg.freeze_params {
                let mut s = Stream::new(derive_seed(mc.seed, u64::MAX), 0);
                let params: Vec<(f64, f64)> =
                    (0..n).map(|_| component(s.symmetric_unit())).collect();
                run_repetitions(&mc, |s| {
                    params
                        .iter()
                        .map(|&(m, sd)| m + sd * s.standard_normal())
                        .fold(f64::NEG_INFINITY, f64::max)
                })?
            } else {
                run_repetitions(&mc, |s| {
                    (0..n)
                        .map(|_| {
                            let (m, sd) = component(s.symmetric_unit());
                            m + sd * s.standard_normal()
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })?
            };
            let r = empirical_stats(maxima, 1)?;
            Ok(NonIidRow {
                n,
                mean: r.mean,
                std: r.std,
                std_error: r.std_error(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::{iid_max_cdf, iid_max_moments};

    fn lag1_correlation(model: &Ar1Model, chains: usize, seed: u64) -> f64 {
        let (mut sxy, mut sxx, mut syy, mut sx, mut sy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for c in 0..chains {
            let chain = sample_ar1_chain(model, &mut Stream::new(seed, c as u64));
            for w in chain.windows(2) {
                sx += w[0];
                sy += w[1];
                sxy += w[0] * w[1];
                sxx += w[0] * w[0];
                syy += w[1] * w[1];
                count += 1.0;
            }
        }
        let cov = sxy / count - sx / count * sy / count;
        cov / ((sxx / count - (sx / count).powi(2)) * (syy / count - (sy / count).powi(2))).sqrt()
    }

    #[test]
    fn model_validation() {
        assert!(Ar1Model::new(0, 0.5, 1.0).is_err());
        assert!(Ar1Model::new(3, -0.1, 1.0).is_err());
        assert!(Ar1Model::new(3, 1.1, 1.0).is_err());
        assert!(Ar1Model::new(3, 0.5, 0.0).is_err());
        assert!(McConfig::new(0, 1, 1).is_err());
        assert!(McConfig::new(1, 1, 0).is_err());
    }

    #[test]
    fn rho_zero_decouples() {
        let m = Ar1Model::new(2, 0.0, 1.0).unwrap();
        assert!(lag1_correlation(&m, 100_000, 5).abs() < 0.01);
    }

    #[test]
    fn rho_one_freezes_chain() {
        let m = Ar1Model::new(50, 1.0, 2.0).unwrap();
        let chain = sample_ar1_chain(&m, &mut Stream::new(3, 0));
        assert_eq!(chain.len(), 50);
        assert!(chain.iter().all(|&x| x == chain[0]));
    }

    #[test]
    fn lag_one_correlation_matches_rho() {
        // 1000 chains x 99 adjacent pairs ~ 1e5 pairs
        let m = Ar1Model::new(100, 0.75, 1.0).unwrap();
        assert!((lag1_correlation(&m, 1000, 9) - 0.75).abs() < 0.01);
    }

    #[test]
    fn chain_is_stationary() {
        let m = Ar1Model::new(20, 0.6, 1.5).unwrap();
        let chains = 20_000;
        let mut sums = vec![0.0; 20];
        for c in 0..chains {
            let chain = sample_ar1_chain(&m, &mut Stream::new(21, c));
            for (s, x) in sums.iter_mut().zip(&chain) {
                *s += x * x;
            }
        }
        let var = m.sigma * m.sigma;
        // std error of a variance estimate from normal data: var * sqrt(2 / n)
        let se = var * (2.0 / chains as f64).sqrt();
        for s in sums {
            assert!((s / chains as f64 - var).abs() < 3.0 * se + 1e-3);
        }
    }

    #[test]
    fn single_variable_max_is_normal() {
        let m = Ar1Model::new(1, 0.5, 1.0).unwrap();
        let cfg = McConfig::new(10_000, 17, 1).unwrap();
        let r = sample_max_distribution(&m, &cfg).unwrap();
        assert!(r.mean.abs() < 3.0 / 100.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let m = Ar1Model::new(40, 0.4, 1.0).unwrap();
        let a = sample_max_distribution(&m, &McConfig::new(2000, 99, 1).unwrap()).unwrap();
        let b = sample_max_distribution(&m, &McConfig::new(2000, 99, 4).unwrap()).unwrap();
        let bits = |r: &McResult| r.samples.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.histogram, b.histogram);
    }

    #[test]
    fn iid_maxima_within_dkw_band() {
        let m = Ar1Model::new(100, 0.0, 1.0).unwrap();
        let r = sample_max_distribution(&m, &McConfig::new(10_000, 4, 4).unwrap()).unwrap();
        let d = ks_distance(&r.ecdf, |z| iid_max_cdf(z, 100));
        assert!(d < dkw_epsilon(10_000, 0.01), "ks {d}");
    }

    #[test]
    fn identity_covariance_matches_iid_law() {
        let n = 30;
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            cov[i * n + i] = 1.0;
        }
        let r = sample_multivariate_max(n, &cov, &McConfig::new(10_000, 8, 4).unwrap()).unwrap();
        let exact = iid_max_moments(n);
        assert!((r.mean - exact.mean).abs() < 3.0 * r.std_error());
    }

    #[test]
    fn rank_one_covariance_gives_standard_normal_max() {
        let n = 6;
        let cov = vec![1.0; n * n];
        let r = sample_multivariate_max(n, &cov, &McConfig::new(10_000, 2, 2).unwrap()).unwrap();
        let d = ks_distance(&r.ecdf, crate::normal::std_normal_cdf);
        assert!(d < dkw_epsilon(10_000, 0.01));
    }

    #[test]
    fn ar1_covariance_agrees_with_chain_sampler() {
        let (n, rho) = (50usize, 0.5f64);
        let cov: Vec<f64> = (0..n * n)
            .map(|k| rho.powi((k / n).abs_diff(k % n) as i32))
            .collect();
        let a = sample_multivariate_max(n, &cov, &McConfig::new(10_000, 31, 4).unwrap()).unwrap();
        let m = Ar1Model::new(n, rho, 1.0).unwrap();
        let b = sample_max_distribution(&m, &McConfig::new(10_000, 32, 4).unwrap()).unwrap();
        assert!(ks_two_sample(&a.ecdf, &b.ecdf) < two_sample_band(10_000, 10_000, 0.01));
    }

    #[test]
    fn non_psd_rejected() {
        let cov = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(
            sample_multivariate_max(2, &cov, &McConfig::default()),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn non_iid_validation() {
        let cfg = NonIidConfig {
            sigma: 0.5,
            delta_sigma: 0.9,
            ..Default::default()
        };
        assert!(non_iid_experiment(&cfg).is_err());
    }

    #[test]
    fn non_iid_baseline_matches_exact_iid_moments() {
        let cfg = NonIidConfig {
            n_grid: vec![10, 100, 1000],
            reps: 10_000,
            seed: 5,
            workers: 4,
            ..Default::default()
        };
        for row in non_iid_experiment(&cfg).unwrap() {
            let exact = iid_max_moments(row.n);
            assert!(
                (row.mean - exact.mean).abs() < 3.0 * row.std_error,
                "n={}",
                row.n
            );
        }
    }

    #[test]
    fn non_iid_sigma_spread_keeps_std_decreasing() {
        for freeze in [false, true] {
            let cfg = NonIidConfig {
                n_grid: vec![10, 100, 1000],
                delta_sigma: 0.2,
                reps: 10_000,
                seed: 12,
                workers: 4,
                freeze_params: freeze,
                ..Default::default()
            };
            let rows = non_iid_experiment(&cfg).unwrap();
            assert!(rows.windows(2).all(|w| w[1].std < w[0].std));
        }
    }
}
