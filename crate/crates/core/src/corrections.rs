//! Corrections to the Gumbel law for the maximum of weakly correlated
//! standard Gaussians.
//!
//! With `S = sum_{i != j} eps_ij` and `x(z) = phi(z)^2 S / (4 pi)`, where
//! `phi(z) = exp(-z^2/2)` is the Gaussian kernel, the corrected CDFs are
//!
//! * first order: `Psi_N(z) (1 + x)`
//! * second order: `Psi_N(z) (1 + x + x^2 / 2)`
//! * complete (resummed): `Psi_N(z) exp(x)`
//!
//! Densities are the exact `z`-derivatives of these CDFs, using
//! `dx/dz = -2 z x` and `dPsi_N/dz = psi_N`. Nothing is clamped: outside the
//! weak-correlation regime the CDFs can leave `[0, 1]` or lose monotonicity,
//! and [`validity_check`] reports where.

use crate::error::{domain, Error, Result};
use crate::gumbel::GumbelParams;
use crate::normal::{iid_normal_pdf, phi_kernel};
use crate::quad::integrate;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Default `max |eps_ij|` below which correlations are treated as weak.
pub const DEFAULT_SMALLNESS_THRESHOLD: f64 = 0.3;

/// Largest dimension accepted by [`correlated_pdf_first_order`].
pub const MAX_EXPANSION_DIM: usize = 8;

const SYMMETRY_TOL: f64 = 1e-12;

/// Off-diagonal covariance perturbations of standardized variables:
/// symmetric, zero diagonal, entries bounded by 1 in magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl EpsilonMatrix {
    /// Builds a matrix from row-major entries, validating the invariants.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(domain(format!("eps[{i}][{i}] must be zero")));
            }
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(domain(format!("eps[{i}][{j}] is not finite")));
                }
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(domain(format!("eps is not symmetric at ({i}, {j})")));
                }
                if a.abs() > 1.0 {
                    return Err(domain(format!("|eps[{i}][{j}]| = {} exceeds 1", a.abs())));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// AR(1) chain correlations `eps_ij = rho^|i-j|` for `i != j`.
    pub fn ar1(n: usize, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain(format!("rho must lie in [0, 1], got {rho}")));
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = rho.powi(i.abs_diff(j) as i32);
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Takes the off-diagonal part of a unit-diagonal correlation matrix.
    pub fn from_correlation(n: usize, corr: &[f64]) -> Result<Self> {
        if corr.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: corr.len(),
            });
        }
        let mut entries = corr.to_vec();
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        Self::new(n, entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// The double sum `S = sum_{i != j} eps_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationSum(pub f64);

impl CorrelationSum {
    pub const ZERO: CorrelationSum = CorrelationSum(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn correlation_sum(eps: &EpsilonMatrix) -> CorrelationSum {
    // Diagonal is zero, so the full sum equals the off-diagonal sum.
    CorrelationSum(eps.entries.iter().sum())
}

/// Truncation order of the corrected law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
    Complete,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::First, Order::Second, Order::Complete];

    pub fn as_str(self) -> &'static str {
        match self {
            Order::First => "first",
            Order::Second => "second",
            Order::Complete => "complete",
        }
    }

    /// Correction factor `g(x)` and its derivative `g'(x)`.
    #[inline]
    fn factor(self, x: f64) -> (f64, f64) {
        match self {
            Order::First => (1.0 + x, 1.0),
            Order::Second => (1.0 + x + 0.5 * x * x, 1.0 + x),
            Order::Complete => {
                let e = x.exp();
                (e, e)
            }
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Order::First),
            "second" => Ok(Order::Second),
            "complete" => Ok(Order::Complete),
            other => Err(domain(format!("unknown order `{other}`"))),
        }
    }
}

/// `x(z) = phi(z)^2 S / (4 pi)`.
#[inline]
pub fn correction_argument(z: f64, s: CorrelationSum) -> f64 {
    let k = phi_kernel(z);
    k * k * s.0 / (4.0 * PI)
}

pub fn corrected_cdf(z: f64, p: &GumbelParams, s: CorrelationSum, order: Order) -> f64 {
    let x = correction_argument(z, s);
    p.cdf(z) * order.factor(x).0
}

pub fn corrected_pdf(z: f64, p: &GumbelParams, s: CorrelationSum, order: Order) -> f64 {
    let x = correction_argument(z, s);
    let dx = -2.0 * z * x;
    let (g, dg) = order.factor(x);
    p.pdf(z) * g + p.cdf(z) * dg * dx
}

/// Mean of the corrected law, `integral z f(z) dz`, by adaptive quadrature
/// over `[alpha - 20 beta, alpha + 40 beta]`.
pub fn corrected_mean(p: &GumbelParams, s: CorrelationSum, order: Order) -> f64 {
    let (lo, hi) = p.span(20.0, 40.0);
    integrate(|z| z * corrected_pdf(z, p, s, order), lo, hi, 1e-12)
}

/// Diagnostics for one corrected law evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub order: Order,
    pub smallness_threshold: f64,
    pub smallness_ok: bool,
    pub max_abs_eps: f64,
    pub cdf_monotone: bool,
    pub cdf_bounded: bool,
    pub pdf_nonnegative: bool,
    /// Grid points where any of the CDF/PDF checks failed, ascending.
    pub z_violations: Vec<f64>,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.smallness_ok && self.cdf_monotone && self.cdf_bounded && self.pdf_nonnegative
    }
}

/// Checks the corrected law of the given order on `z_grid` (ascending) with
/// the default smallness threshold.
pub fn validity_check(
    p: &GumbelParams,
    s: CorrelationSum,
    eps: &EpsilonMatrix,
    z_grid: &[f64],
    order: Order,
) -> Result<ValidityReport> {
    validity_check_with_threshold(p, s, eps, z_grid, order, DEFAULT_SMALLNESS_THRESHOLD)
}

pub fn validity_check_with_threshold(
    p: &GumbelParams,
    s: CorrelationSum,
    eps: &EpsilonMatrix,
    z_grid: &[f64],
    order: Order,
    threshold: f64,
) -> Result<ValidityReport> {
    if z_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("z grid must be strictly ascending"));
    }
    let max_abs_eps = eps.max_abs();
    let mut report = ValidityReport {
        order,
        smallness_threshold: threshold,
        smallness_ok: max_abs_eps <= threshold,
        max_abs_eps,
        cdf_monotone: true,
        cdf_bounded: true,
        pdf_nonnegative: true,
        z_violations: Vec::new(),
    };
    let mut prev: Option<f64> = None;
    for &z in z_grid {
        let f = corrected_cdf(z, p, s, order);
        let d = corrected_pdf(z, p, s, order);
        let mut bad = false;
        if !(0.0..=1.0).contains(&f) {
            report.cdf_bounded = false;
            bad = true;
        }
        if prev.is_some_and(|pf| f < pf) {
            report.cdf_monotone = false;
            bad = true;
        }
        if d < 0.0 {
            report.pdf_nonnegative = false;
            bad = true;
        }
        if bad {
            report.z_violations.push(z);
        }
        prev = Some(f);
    }
    Ok(report)
}

/// First-order expansion of the joint density of standardized, weakly
/// correlated Gaussians:
/// `omega_0(r) (1 + 1/2 sum_{i != j} eps_ij x_i x_j)`.
///
/// A test oracle for the expansion, limited to `dim <= 8`.
pub fn correlated_pdf_first_order(r: &[f64], eps: &EpsilonMatrix) -> Result<f64> {
    let n = eps.dim();
    if r.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: r.len(),
        });
    }
    if n > MAX_EXPANSION_DIM {
        return Err(domain(format!(
            "expansion oracle supports at most {MAX_EXPANSION_DIM} variables, got {n}"
        )));
    }
    let base = iid_normal_pdf(r, &vec![0.0; n], &vec![1.0; n])?;
    let mut pert = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pert += eps.get(i, j) * r[i] * r[j];
            }
        }
    }
    Ok(base * (1.0 + 0.5 * pert))
}

/// Characteristic function of `N(mu, cov)` at `k`, as `(re, im)`.
fn char_fn(k: &[f64], mu: &[f64], cov: &[f64]) -> (f64, f64) {
    let n = k.len();
    let phase: f64 = k.iter().zip(mu).map(|(a, b)| a * b).sum();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += cov[i * n + j] * k[i] * k[j];
        }
    }
    let amp = (-0.5 * quad).exp();
    (amp * phase.cos(), amp * phase.sin())
}

/// Compares the central difference of `chi(k)` in the single covariance
/// entry `(i, j)` at zero perturbation against
/// `1/2 d^2 chi_0 / (d mu_i d mu_j) = -1/2 k_i k_j chi_0`.
///
/// Returns the modulus of the complex discrepancy, which is `O(h^2)`.
pub fn char_fn_identity_check(
    k: &[f64],
    mu: &[f64],
    sigma: &[f64],
    i: usize,
    j: usize,
    h: f64,
) -> Result<f64> {
    let n = k.len();
    for len in [mu.len(), sigma.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if i == j {
        return Err(domain("identity concerns off-diagonal entries, got i == j"));
    }
    if i >= n || j >= n {
        return Err(domain(format!("index out of range for dimension {n}")));
    }
    if !(h > 1e-6 && h < 1e-3) {
        return Err(domain(format!("step h must lie in (1e-6, 1e-3), got {h}")));
    }
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(domain("standard deviations must be positive"));
    }

    let mut cov = vec![0.0; n * n];
    for (m, s) in sigma.iter().enumerate() {
        cov[m * n + m] = s * s;
    }
    let (r0, i0) = char_fn(k, mu, &cov);

    cov[i * n + j] = h;
    let (rp, ip) = char_fn(k, mu, &cov);
    cov[i * n + j] = -h;
    let (rm, im) = char_fn(k, mu, &cov);

    let fd = ((rp - rm) / (2.0 * h), (ip - im) / (2.0 * h));
    let scale = -0.5 * k[i] * k[j];
    let exact = (scale * r0, scale * i0);
    Ok((fd.0 - exact.0).hypot(fd.1 - exact.1))
}
