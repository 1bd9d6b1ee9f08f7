//! Limiting Gumbel law for the maximum of `n` IID standard normal variables.

use crate::error::{domain, Result};
use crate::normal::{phi_kernel, std_normal_cdf, std_normal_pdf, std_normal_quantile, SQRT_2PI};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this standardized argument the Gumbel CDF is returned as exactly 0.
const UNDERFLOW_ARG: f64 = -40.0;

/// Location `alpha`, scale `beta` and variable count `n` of the limiting law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Mean and standard deviation of a Gumbel law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelMoments {
    pub mean: f64,
    pub std: f64,
}

impl GumbelParams {
    /// Scaling constants for `n >= 2` variables:
    /// `alpha = Phi^-1(1 - 1/n)`, `beta = sqrt(2 pi) / (n phi(alpha))`.
    pub fn for_count(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("Gumbel scaling needs n >= 2, got {n}")));
        }
        let nf = n as f64;
        let alpha = std_normal_quantile(1.0 - 1.0 / nf)?;
        let beta = SQRT_2PI / (nf * phi_kernel(alpha));
        Ok(Self { n, alpha, beta })
    }

    #[inline]
    fn reduced(&self, z: f64) -> f64 {
        (z - self.alpha) / self.beta
    }

    /// `Psi_N(z) = exp(-exp(-(z - alpha) / beta))`.
    pub fn cdf(&self, z: f64) -> f64 {
        let t = self.reduced(z);
        if t < UNDERFLOW_ARG {
            return 0.0;
        }
        (-(-t).exp()).exp()
    }

    /// `psi_N(z) = exp(-exp(-t) - t) / beta` with `t = (z - alpha) / beta`.
    pub fn pdf(&self, z: f64) -> f64 {
        let t = self.reduced(z);
        if t < UNDERFLOW_ARG {
            return 0.0;
        }
        (-(-t).exp() - t).exp() / self.beta
    }

    pub fn moments(&self) -> GumbelMoments {
        GumbelMoments {
            mean: self.alpha + EULER_GAMMA * self.beta,
            std: PI / 6f64.sqrt() * self.beta,
        }
    }

    /// Range `[alpha - below * beta, alpha + above * beta]`, handy for grids
    /// and quadrature bounds.
    pub fn span(&self, below: f64, above: f64) -> (f64, f64) {
        (
            self.alpha - below * self.beta,
            self.alpha + above * self.beta,
        )
    }
}

/// Free-function form of [`GumbelParams::for_count`].
pub fn scaling_constants(n: usize) -> Result<GumbelParams> {
    GumbelParams::for_count(n)
}

pub fn gumbel_cdf(z: f64, p: &GumbelParams) -> f64 {
    p.cdf(z)
}

pub fn gumbel_pdf(z: f64, p: &GumbelParams) -> f64 {
    p.pdf(z)
}

pub fn gumbel_moments(p: &GumbelParams) -> GumbelMoments {
    p.moments()
}

/// Exact CDF `Phi(z)^n` of the maximum of `n` IID standard normals.
pub fn iid_max_cdf(z: f64, n: usize) -> f64 {
    std_normal_cdf(z).powi(n as i32)
}

/// Density `n Phi(z)^(n-1) phi(z)` of the maximum of `n` IID standard normals.
pub fn iid_max_pdf(z: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * std_normal_cdf(z).powi(n as i32 - 1) * std_normal_pdf(z)
}

/// Mean and standard deviation of `max` of `n` IID standard normals, by
/// quadrature of the exact density.
pub fn iid_max_moments(n: usize) -> GumbelMoments {
    let (lo, hi) = (-12.0, 12.0);
    let mean = crate::quad::integrate(|z| z * iid_max_pdf(z, n), lo, hi, 1e-13);
    let second = crate::quad::integrate(|z| z * z * iid_max_pdf(z, n), lo, hi, 1e-13);
    GumbelMoments {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn scaling_constants_examples() {
        let p2 = scaling_constants(2).unwrap();
        assert_eq!(p2.alpha, 0.0);
        assert!((p2.beta - 1.253_314_137_315_500_3).abs() < 1e-15);

        let p100 = scaling_constants(100).unwrap();
        assert!((p100.alpha - 2.326_347_874_040_841).abs() < 1e-12);
        // beta from the direct formula with the bisected alpha
        let beta = SQRT_2PI / (100.0 * (-0.5 * p100.alpha * p100.alpha).exp());
        assert!((p100.beta - beta).abs() < 1e-15);
        // independent oracle: scipy norm.ppf(0.99) through the same formula
        assert!((p100.beta - 0.375_204_361_572_951_3).abs() < 1e-12);

        assert!(scaling_constants(1).is_err());
        assert!(scaling_constants(0).is_err());
    }

    #[test]
    fn params_recompute_consistently() {
        for n in [2, 7, 100, 12345] {
            let p = scaling_constants(n).unwrap();
            let again = GumbelParams::for_count(p.n).unwrap();
            assert!((again.alpha - p.alpha).abs() < 1e-12);
            assert!((again.beta - p.beta).abs() < 1e-12);
            assert!(p.beta > 0.0);
        }
    }

    #[test]
    fn cdf_landmarks() {
        let p = scaling_constants(100).unwrap();
        assert!((p.cdf(p.alpha) - (-1f64).exp()).abs() < 1e-16);
        assert!((p.cdf(p.alpha + p.beta * 2f64.ln()) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(p.cdf(1e6), 1.0);
        assert_eq!(p.cdf(p.alpha - 41.0 * p.beta), 0.0);
    }

    #[test]
    fn pdf_landmarks_and_finite_difference() {
        let p = scaling_constants(100).unwrap();
        assert!((p.pdf(p.alpha) - (-1f64).exp() / p.beta).abs() < 1e-15);
        assert_eq!(p.pdf(1e6), 0.0);
        assert_eq!(p.pdf(-1e6), 0.0);
        let h = 1e-5;
        for k in 0..=600 {
            let z = p.alpha - 2.0 + k as f64 * 0.01;
            let fd = (p.cdf(z + h) - p.cdf(z - h)) / (2.0 * h);
            assert!((fd - p.pdf(z)).abs() < 1e-6, "z={z}");
        }
        let fd = (p.cdf(2.5 + h) - p.cdf(2.5 - h)) / (2.0 * h);
        assert!((fd - p.pdf(2.5)).abs() < 1e-6);
    }

    #[test]
    fn moments_examples() {
        let m = scaling_constants(100).unwrap().moments();
        assert!((m.mean - 2.542_921_709_079_552).abs() < 1e-12);
        assert!((m.std - 0.481_218_290_211_379).abs() < 1e-12);
        let m2 = scaling_constants(2).unwrap().moments();
        assert!((m2.mean - EULER_GAMMA * SQRT_2PI / 2.0).abs() < 1e-15);
        assert!((m2.mean - 0.723_432_553_101_057_5).abs() < 1e-12);
        let narrow = GumbelParams {
            n: 10,
            alpha: 0.0,
            beta: 1e-12,
        }
        .moments();
        assert!(narrow.std < 1e-11);
    }

    #[test]
    fn density_normalised_and_moments_match_quadrature() {
        for n in [2, 100, 1000] {
            let p = scaling_constants(n).unwrap();
            let (lo, hi) = p.span(20.0, 40.0);
            let mass = integrate(|z| p.pdf(z), lo, hi, 1e-13);
            assert!((mass - 1.0).abs() < 1e-8, "n={n} mass={mass}");
            let mean = integrate(|z| z * p.pdf(z), lo, hi, 1e-13);
            let second = integrate(|z| z * z * p.pdf(z), lo, hi, 1e-13);
            let std = (second - mean * mean).sqrt();
            let m = p.moments();
            assert!((mean - m.mean).abs() < 1e-6);
            assert!((std - m.std).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_grows_and_std_shrinks_with_n() {
        let ms: Vec<_> = [2, 10, 100, 1000, 10000]
            .iter()
            .map(|&n| scaling_constants(n).unwrap().moments())
            .collect();
        for w in ms.windows(2) {
            assert!(w[1].mean > w[0].mean);
            assert!(w[1].std < w[0].std);
        }
    }

    #[test]
    fn iid_power_law_approaches_gumbel() {
        let gap = |n: usize| {
            let p = scaling_constants(n).unwrap();
            (0..=600)
                .map(|k| p.alpha - 2.0 + k as f64 * 0.01)
                .map(|z| (iid_max_cdf(z, n) - p.cdf(z)).abs())
                .fold(0.0, f64::max)
        };
        assert!(gap(10_000) < gap(100));
    }

    #[test]
    fn iid_max_moments_small_n() {
        // E[max of 2 standard normals] = 1/sqrt(pi)
        let m = iid_max_moments(2);
        assert!((m.mean - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
        let one = iid_max_moments(1);
        assert!(one.mean.abs() < 1e-12 && (one.std - 1.0).abs() < 1e-10);
    }
}
