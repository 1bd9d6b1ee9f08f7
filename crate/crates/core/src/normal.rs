//! Standard normal special functions: the Gaussian kernel, `erf`/`erfc`,
//! the CDF and its inverse, and the product-form density of independent
//! normal variables.
//!
//! `erf` and `erfc` follow the FreeBSD msun rational approximations
//! (better than one ulp over the whole real line). The quantile starts from
//! Acklam's rational guess and is polished by safeguarded Halley steps
//! against [`std_normal_cdf`], so that sampler and analytic layers share one
//! definition of the normal CDF.

#![allow(clippy::excessive_precision)]

use crate::error::{domain, Error, Result};
use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2 pi)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `sqrt(2 pi)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Gaussian kernel `exp(-x^2 / 2)`, without the normalising constant.
#[inline]
pub fn phi_kernel(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// Standard normal density `exp(-x^2/2) / sqrt(2 pi)`.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * phi_kernel(x)
}

/// Normal density with mean `mu` and standard deviation `sigma`.
#[inline]
pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    std_normal_pdf((x - mu) / sigma) / sigma
}

/// Standard normal CDF, accurate to full relative precision in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of [`std_normal_cdf`].
///
/// Returns `x` with `|Phi(x) - p| <= 1e-14`. Fails for `p` outside `(0, 1)`
/// or NaN.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("quantile requires 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // 1 - p is exact for p in [0.5, 1), so the upper half mirrors the lower.
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

/// Quantile for `0 < p < 0.5`.
fn lower_quantile(p: f64) -> f64 {
    let mut x = acklam_guess(p);
    let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
    for _ in 0..60 {
        let err = std_normal_cdf(x) - p;
        if err == 0.0 {
            return x;
        }
        if err < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let u = err / std_normal_pdf(x);
        let mut next = x - u / (1.0 + 0.5 * x * u);
        if next == x {
            return x;
        }
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn acklam_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Density of independent normals `prod_k N(r_k | mu_k, sigma_k^2)`.
pub fn iid_normal_pdf(r: &[f64], mu: &[f64], sigma: &[f64]) -> Result<f64> {
    if mu.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            actual: mu.len(),
        });
    }
    if sigma.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            actual: sigma.len(),
        });
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(domain(format!(
            "standard deviations must be positive, got {s}"
        )));
    }
    Ok(r.iter()
        .zip(mu)
        .zip(sigma)
        .map(|((&x, &m), &s)| normal_pdf(x, m, s))
        .product())
}

// ---------------------------------------------------------------------------
// erf / erfc

const ERX: f64 = 8.45062911510467529297e-01;
const EFX8: f64 = 1.02703333676410069053e+00;

const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

#[inline]
fn horner(x: f64, c: &[f64]) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// `1 + x * (c0 + x * (c1 + ...))`.
#[inline]
fn horner1(x: f64, c: &[f64]) -> f64 {
    1.0 + x * horner(x, c)
}

/// `erf(1 + s) - ERX` on `|x|` in `[0.84375, 1.25)`.
#[inline]
fn erf_near_one(ax: f64) -> f64 {
    let s = ax - 1.0;
    horner(s, &PA) / horner1(s, &QA)
}

/// `erfc(ax)` for `ax` in `[1.25, 28)`.
fn erfc_tail(ax: f64) -> f64 {
    let s = 1.0 / (ax * ax);
    let (r, big_s) = if ax < 1.0 / 0.35 {
        (horner(s, &RA), horner1(s, &SA))
    } else {
        (horner(s, &RB), horner1(s, &SB))
    };
    // Split ax so that -ax^2 is evaluated without cancellation.
    let z = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625).exp() * ((z - ax) * (z + ax) + r / big_s).exp() / ax
}

/// Error function `(2/sqrt(pi)) * int_0^x exp(-t^2) dt`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let y = if ax < 0.843_75 {
        if ax < 3.725_290_298_461_914e-9 {
            return 0.125 * (8.0 * x + EFX8 * x);
        }
        let z = x * x;
        let r = horner(z, &PP) / horner1(z, &QQ);
        return x + x * r;
    } else if ax < 1.25 {
        ERX + erf_near_one(ax)
    } else if ax < 6.0 {
        1.0 - erfc_tail(ax)
    } else {
        1.0
    };
    if x < 0.0 {
        -y
    } else {
        y
    }
}

/// Complementary error function `1 - erf(x)`, computed without cancellation
/// for large positive `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    if ax < 0.843_75 {
        if ax < 1.387_778_780_781_445_7e-17 {
            return 1.0 - x;
        }
        let z = x * x;
        let r = horner(z, &PP) / horner1(z, &QQ);
        if x < 0.25 {
            return 1.0 - (x + x * r);
        }
        return 0.5 - (x - 0.5 + x * r);
    }
    if ax < 1.25 {
        let p = erf_near_one(ax);
        return if x > 0.0 {
            1.0 - ERX - p
        } else {
            1.0 + ERX + p
        };
    }
    if ax < 28.0 {
        let t = erfc_tail(ax);
        return if x > 0.0 { t } else { 2.0 - t };
    }
    if x > 0.0 {
        0.0
    } else {
        2.0
    }
}

/// `sqrt(pi)`, used by tests and the quadrature oracle.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;
