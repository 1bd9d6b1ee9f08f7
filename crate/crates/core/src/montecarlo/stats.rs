//! Empirical summaries of Monte Carlo output: moments, ECDF, histograms and
//! Kolmogorov/DKW distances.

use crate::error::{domain, Error, Result};
use crate::format::real;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Upper bound on automatically chosen bin counts.
const MAX_AUTO_BINS: usize = 10_000;

/// Equal-width histogram: `edges.len() == counts.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin centres and density estimates (integrating to one).
    pub fn density(&self) -> Vec<(f64, f64)> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (a, b) = (self.edges[k], self.edges[k + 1]);
                let width = b - a;
                let d = if width > 0.0 {
                    c as f64 / (total * width)
                } else {
                    0.0
                };
                (0.5 * (a + b), d)
            })
            .collect()
    }

    /// `sum_k |hist_k - f(centre_k)| * width_k`.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.density()
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&(c, d), w)| (d - f(c)).abs() * (w[1] - w[0]))
            .sum()
    }
}

/// Samples of the maximum and their empirical summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    #[serde(skip)]
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    #[serde(skip)]
    pub ecdf: Vec<f64>,
    pub histogram: Histogram,
}

/// JSON-facing summary of an [`McResult`].
#[derive(Debug, Clone, Serialize)]
pub struct McSummary<'a> {
    pub reps: usize,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub histogram: &'a Histogram,
}

impl McResult {
    pub fn std_error(&self) -> f64 {
        self.std / (self.samples.len() as f64).sqrt()
    }

    /// Empirical CDF `#{x_k <= x} / n`.
    pub fn ecdf_at(&self, x: f64) -> f64 {
        ecdf_at(&self.ecdf, x)
    }

    pub fn summary(&self) -> McSummary<'_> {
        McSummary {
            reps: self.samples.len(),
            mean: self.mean,
            std: self.std,
            std_error: self.std_error(),
            histogram: &self.histogram,
        }
    }

    /// One `sample` column, in repetition order.
    pub fn write_samples_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sample")?;
        for s in &self.samples {
            writeln!(w, "{}", real(*s))?;
        }
        Ok(())
    }
}

/// Mean, unbiased standard deviation, sorted ECDF and an equal-width
/// histogram with `bins` bins over `[min, max]`.
pub fn empirical_stats(samples: Vec<f64>, bins: usize) -> Result<McResult> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins == 0 {
        return Err(domain("histogram needs at least one bin"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(domain("samples must be finite"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut ecdf = samples.clone();
    ecdf.sort_by(f64::total_cmp);
    let histogram = histogram(&ecdf, bins);
    Ok(McResult {
        samples,
        mean,
        std,
        ecdf,
        histogram,
    })
}

/// [`empirical_stats`] with the Freedman–Diaconis bin count.
pub fn empirical_stats_auto(samples: Vec<f64>) -> Result<McResult> {
    let bins = freedman_diaconis_bins(&samples);
    empirical_stats(samples, bins)
}

fn histogram(sorted: &[f64], bins: usize) -> Histogram {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .collect();
    let mut counts = vec![0u64; bins];
    for &x in sorted {
        let k = if width > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Histogram { edges, counts }
}

/// Linear-interpolated quantile of sorted data.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Freedman–Diaconis bin count `ceil(range / (2 IQR n^(-1/3)))`.
pub fn freedman_diaconis_bins(samples: &[f64]) -> usize {
    if samples.len() < 2 {
        return 1;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = sorted_quantile(&s, 0.75) - sorted_quantile(&s, 0.25);
    let range = s[s.len() - 1] - s[0];
    if iqr <= 0.0 || range <= 0.0 {
        return 1;
    }
    let width = 2.0 * iqr / (s.len() as f64).cbrt();
    ((range / width).ceil() as usize).clamp(1, MAX_AUTO_BINS)
}

pub fn ecdf_at(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// DKW half-width `sqrt(ln(2/alpha) / (2n))` for confidence `1 - alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Two-sample analogue of [`dkw_epsilon`] for sizes `n` and `m`.
pub fn two_sample_band(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ((2.0 / alpha).ln() * (n + m) / (2.0 * n * m)).sqrt()
}

/// Kolmogorov distance `sup |F_n - F|` between sorted samples and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs())
    })
}

/// Two-sample Kolmogorov distance between sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&x| (ecdf_at(a, x) - ecdf_at(b, x)).abs())
        .fold(0.0, f64::max)
}
