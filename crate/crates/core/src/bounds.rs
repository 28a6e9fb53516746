//! Closed-form packet-size and rate bounds.
//!
//! Real plants use `A > 0`; complex plants use `Re(A)` wherever a growth
//! rate appears. Rates are in events/s or bits/s. An unbounded rate is
//! reported as `f64::INFINITY`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{complex_design_violations, growth, PlantConfig, TriggerConfig, Violation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("growth rate must be positive, got {0}")]
    Growth(f64),
    #[error("contraction factor must lie in (0, 1), got {0}")]
    Contraction(f64),
    #[error("triggering radius too small: J = {j}, need J > {required}")]
    Radius { j: f64, required: f64 },
    #[error("M ≤ AJ fails: M = {m}, AJ = {aj}")]
    DisturbanceExceedsGrowth { m: f64, aj: f64 },
    #[error("delay bound {gamma} is below the critical delay beta = {beta}")]
    BetaExceedsGamma { beta: f64, gamma: f64 },
    #[error("degenerate rate denominator: {0}")]
    Degenerate(&'static str),
    #[error("complex design constraints violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Complex(Vec<Violation>),
    #[error("no admissible packet size up to {0} bits")]
    NoFixedPoint(u32),
}

type Result<T> = std::result::Result<T, BoundsError>;

fn check_growth(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::Growth(a))
    }
}

fn check_rho(rho0: f64) -> Result<()> {
    if rho0 > 0.0 && rho0 < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::Contraction(rho0))
    }
}

/// `A/ln 2`.
pub fn datarate_real(a: f64) -> f64 {
    a / LN_2
}

/// `2 Re(A)/ln 2`: a complex mode is two real dimensions.
pub fn datarate_complex(a: Complex64) -> f64 {
    2.0 * a.re / LN_2
}

pub fn datarate_baseline(plant: &PlantConfig) -> f64 {
    if plant.is_real() {
        datarate_real(plant.a.re)
    } else {
        datarate_complex(plant.a)
    }
}

/// `e^{-Aγ}(ρ₀ - M(e^{Aγ}-1)/(JA))`, the contraction margin left after
/// the worst delay.
pub fn contraction_margin(a: f64, gamma: f64, m: f64, j: f64, rho0: f64) -> f64 {
    (-a * gamma).exp() * (rho0 - m * growth(a, gamma) / j)
}

/// `1 + η`: the argument of the logarithm in the real packet-size bound.
pub fn real_log_argument(a: f64, gamma: f64, m: f64, j: f64, rho0: f64) -> f64 {
    1.0 + contraction_margin(a, gamma, m, j, rho0)
}

/// `max{0, head + log₂(Abγ / ln D)}` for a log argument `D > 1`.
pub fn bits_from_log_argument(a: f64, gamma: f64, b: f64, head: f64, d: f64) -> f64 {
    (head + (a * b * gamma / d.ln()).log2()).max(0.0)
}

fn check_sufficient_real(a: f64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64) -> Result<()> {
    check_growth(a)?;
    check_rho(rho0)?;
    if !(b > 1.0) {
        return Err(BoundsError::Degenerate("b must exceed 1"));
    }
    let required = m * growth(a, gamma) / rho0;
    if !(j > required) || !(j > 0.0) {
        return Err(BoundsError::Radius { j, required });
    }
    Ok(())
}

/// Packet size that guarantees `|z(t_c⁺)| ≤ ρ₀J` for every delay `≤ γ`.
pub fn sufficient_bits_real(a: f64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64) -> Result<f64> {
    check_sufficient_real(a, gamma, m, j, rho0, b)?;
    let d = real_log_argument(a, gamma, m, j, rho0);
    Ok(bits_from_log_argument(a, gamma, b, 1.0, d))
}

/// Integer packet size actually sent; at least one bit for the event.
pub fn practical_bits_real(a: f64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64) -> Result<u32> {
    let g = sufficient_bits_real(a, gamma, m, j, rho0, b)?;
    Ok((g.ceil() as u32).max(1))
}

/// `A / ln((JA+M)/(ρ₀JA+M))`: most triggers per second when every
/// reception contracts the error to `ρ₀J`.
pub fn trig_rate_upper(a: f64, m: f64, j: f64, rho0: f64) -> f64 {
    let den = ((j * a + m) / (rho0 * j * a + m)).ln();
    if den <= 0.0 {
        f64::INFINITY
    } else {
        a / den
    }
}

pub fn sufficient_rate_real(a: f64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64) -> Result<f64> {
    let g = sufficient_bits_real(a, gamma, m, j, rho0, b)?;
    Ok(if g == 0.0 { 0.0 } else { trig_rate_upper(a, m, j, rho0) * g })
}

fn check_necessary(a: f64, m: f64, j: f64) -> Result<()> {
    check_growth(a)?;
    if m > a * j {
        return Err(BoundsError::DisturbanceExceedsGrowth { m, aj: a * j });
    }
    Ok(())
}

/// Fewest bits any quantizer needs per event: `max{0, log₂((M/(AJ)+1)(e^{Aγ}-1))}`.
pub fn necessary_bits(a: f64, gamma: f64, m: f64, j: f64) -> Result<f64> {
    check_necessary(a, m, j)?;
    Ok(((m / (a * j) + 1.0) * (a * gamma).exp_m1()).log2().max(0.0))
}

/// `A / ln(e^{Aα}(JA+M)/(ΥA+M))`: least triggers per second when the
/// delay is `α` and receptions leave the error at `Υ` or above.
pub fn trig_rate_lower_general(a: f64, m: f64, j: f64, alpha: f64, upsilon: f64) -> Result<f64> {
    check_growth(a)?;
    if upsilon < 0.0 || alpha < 0.0 {
        return Err(BoundsError::Degenerate("alpha and upsilon must be non-negative"));
    }
    let low = upsilon * a + m;
    if low <= 0.0 {
        return Err(BoundsError::Degenerate("upsilon A + M = 0"));
    }
    let den = a * alpha + ((j * a + m) / low).ln();
    Ok(if den <= 0.0 { f64::INFINITY } else { a / den })
}

/// `ln(1 + 2AJ/(AJ+M))/A`: delay after which the error sweeps `2J`.
pub fn beta(a: f64, m: f64, j: f64) -> f64 {
    (2.0 * a * j / (a * j + m)).ln_1p() / a
}

/// Lower bound valid for every quantizer. Returns 0 with a warning at
/// `M = 0`, where the denominator is unbounded.
pub fn necessary_rate_general(a: f64, gamma: f64, m: f64, j: f64) -> Result<f64> {
    let g = necessary_bits(a, gamma, m, j)?;
    if m == 0.0 {
        log::warn!("necessary rate with M = 0: unbounded denominator, reporting 0");
        return Ok(0.0);
    }
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(g * trig_rate_lower_general(a, m, j, gamma, 0.0)?)
}

/// Triggering-rate lower bound for quantizers of minimal size,
/// `A / ln((1+2AJ/(AJ+M))(JA+M)/(0.5JA+M))`.
pub fn trig_rate_lower_restricted(a: f64, gamma: f64, m: f64, j: f64) -> Result<f64> {
    check_necessary(a, m, j)?;
    let bt = beta(a, m, j);
    if bt > gamma {
        return Err(BoundsError::BetaExceedsGamma { beta: bt, gamma });
    }
    let den = (2.0 * a * j / (a * j + m)).ln_1p() + ((j * a + m) / (0.5 * j * a + m)).ln();
    Ok(a / den)
}

/// Lower bound valid for minimal-size quantizers; needs `β ≤ γ`.
pub fn necessary_rate_restricted(a: f64, gamma: f64, m: f64, j: f64) -> Result<f64> {
    let g = necessary_bits(a, gamma, m, j)?;
    let r = trig_rate_lower_restricted(a, gamma, m, j)?;
    Ok(if g == 0.0 { 0.0 } else { g * r })
}

/// `1 - cos(Im(A) bγ/2^{g-λ})`: phase drift caused by the timing error of a
/// `g`-bit complex packet.
pub fn complex_zeta(im_a: f64, gamma: f64, b: f64, g: u32, lambda: u32) -> f64 {
    let tau = b * gamma / 2f64.powi(g as i32 - lambda as i32);
    let h = 0.5 * im_a * tau;
    // 1 - cos x = 2 sin²(x/2), exact near zero
    2.0 * h.sin() * h.sin()
}

/// Log argument of the complex packet-size bound:
/// `(1 + e^{-Re(A)γ}(ρ₀ - M(e^{Re(A)γ}-1)/(Re(A)J))) / (2 sin(π/2^{λ+1}) + 1 + √(2ζ))`.
pub fn complex_log_argument(re_a: f64, gamma: f64, m: f64, j: f64, rho0: f64, lambda: u32, zeta: f64) -> f64 {
    let num = real_log_argument(re_a, gamma, m, j, rho0);
    let den = 2.0 * (PI / 2f64.powi(lambda as i32 + 1)).sin() + 1.0 + (2.0 * zeta).sqrt();
    num / den
}

/// Complex packet size at a given `ζ`; `None` when the log argument is at
/// most one and the bound is undefined.
pub fn complex_bits_at(a: Complex64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64, lambda: u32, zeta: f64) -> Option<f64> {
    let d = complex_log_argument(a.re, gamma, m, j, rho0, lambda, zeta);
    (d > 1.0).then(|| bits_from_log_argument(a.re, gamma, b, lambda as f64, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexBits {
    /// Bound evaluated at the timing error of the chosen packet size.
    pub bits: f64,
    /// Smallest packet size (at least `λ`) that meets its own bound.
    pub practical_bits: u32,
    pub zeta: f64,
}

const COMPLEX_SCAN: u32 = 64;

/// Complex packet-size bound.
///
/// `ζ` depends on the packet size through the timing error, so the size is
/// found by scanning `g = λ, λ+1, ...` for the first `g` whose own bound
/// and design constraints hold.
#[allow(clippy::too_many_arguments)]
pub fn sufficient_bits_complex(
    a: Complex64,
    gamma: f64,
    m: f64,
    j: f64,
    rho0: f64,
    b: f64,
    lambda: u32,
    chi: f64,
    chi_prime: f64,
) -> Result<ComplexBits> {
    check_growth(a.re)?;
    check_rho(rho0)?;
    if lambda == 0 {
        return Err(BoundsError::Degenerate("complex packets need lambda >= 1"));
    }
    let plant = PlantConfig::complex(a, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), m);
    let trig = TriggerConfig::new(j, rho0, gamma, b).with_lambda(lambda);
    // Constraints that no packet size can repair.
    let base = complex_design_violations(&plant, &trig, chi, chi_prime, 0.0);
    if !base.is_empty() {
        return Err(BoundsError::Complex(base));
    }
    let mut last = Vec::new();
    for g in lambda..lambda + COMPLEX_SCAN {
        let zeta = complex_zeta(a.im, gamma, b, g, lambda);
        let v = complex_design_violations(&plant, &trig, chi, chi_prime, zeta);
        if !v.is_empty() {
            last = v;
            continue;
        }
        let Some(bits) = complex_bits_at(a, gamma, m, j, rho0, b, lambda, zeta) else {
            continue;
        };
        if g as f64 >= bits {
            return Ok(ComplexBits { bits, practical_bits: g, zeta });
        }
    }
    if last.is_empty() {
        Err(BoundsError::NoFixedPoint(lambda + COMPLEX_SCAN - 1))
    } else {
        Err(BoundsError::Complex(last))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sufficient_rate_complex(
    a: Complex64,
    gamma: f64,
    m: f64,
    j: f64,
    rho0: f64,
    b: f64,
    lambda: u32,
    chi: f64,
    chi_prime: f64,
) -> Result<f64> {
    let g = sufficient_bits_complex(a, gamma, m, j, rho0, b, lambda, chi, chi_prime)?;
    Ok(if g.bits == 0.0 { 0.0 } else { trig_rate_upper(a.re, m, j, rho0) * g.bits })
}

/// Smallest integer `λ` strictly above the phase-bit constraint.
pub fn auto_lambda(re_a: f64, gamma: f64, chi: f64, chi_prime: f64) -> Option<u32> {
    let bound = crate::model::min_phase_bits_bound(re_a, gamma, chi, chi_prime);
    if !bound.is_finite() {
        return None;
    }
    Some((bound.floor() + 1.0).max(1.0) as u32)
}

/// Every bound at one parameter point. Inapplicable entries are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub gamma: f64,
    pub j: f64,
    pub lambda: Option<u32>,
    pub sufficient_bits: f64,
    pub practical_bits: f64,
    pub sufficient_rate: f64,
    pub necessary_bits: f64,
    pub trig_rate_upper: f64,
    pub trig_rate_lower_general: f64,
    pub necessary_rate_general: f64,
    pub trig_rate_lower_restricted: f64,
    pub necessary_rate_restricted: f64,
    pub beta: f64,
    pub datarate_baseline: f64,
}

fn or_nan<T: Into<f64>>(r: Result<T>, what: &str) -> f64 {
    match r {
        Ok(v) => v.into(),
        Err(e) => {
            log::warn!("{what}: {e}");
            f64::NAN
        }
    }
}

impl RateReport {
    pub fn real(a: f64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64) -> Self {
        Self {
            gamma,
            j,
            lambda: None,
            sufficient_bits: or_nan(sufficient_bits_real(a, gamma, m, j, rho0, b), "sufficient bits"),
            practical_bits: or_nan(practical_bits_real(a, gamma, m, j, rho0, b), "practical bits"),
            sufficient_rate: or_nan(sufficient_rate_real(a, gamma, m, j, rho0, b), "sufficient rate"),
            necessary_bits: or_nan(necessary_bits(a, gamma, m, j), "necessary bits"),
            trig_rate_upper: trig_rate_upper(a, m, j, rho0),
            trig_rate_lower_general: or_nan(trig_rate_lower_general(a, m, j, gamma, 0.0), "trigger rate lower bound"),
            necessary_rate_general: or_nan(necessary_rate_general(a, gamma, m, j), "necessary rate"),
            trig_rate_lower_restricted: or_nan(trig_rate_lower_restricted(a, gamma, m, j), "restricted trigger rate"),
            necessary_rate_restricted: or_nan(necessary_rate_restricted(a, gamma, m, j), "restricted necessary rate"),
            beta: beta(a, m, j),
            datarate_baseline: datarate_real(a),
        }
    }

    /// Complex report: only the sufficient side and the baseline apply.
    #[allow(clippy::too_many_arguments)]
    pub fn complex(a: Complex64, gamma: f64, m: f64, j: f64, rho0: f64, b: f64, lambda: u32, chi: f64, chi_prime: f64) -> Self {
        let bits = sufficient_bits_complex(a, gamma, m, j, rho0, b, lambda, chi, chi_prime);
        let (g, p) = match &bits {
            Ok(c) => (c.bits, c.practical_bits as f64),
            Err(e) => {
                log::warn!("complex sufficient bits: {e}");
                (f64::NAN, f64::NAN)
            }
        };
        let upper = trig_rate_upper(a.re, m, j, rho0);
        Self {
            gamma,
            j,
            lambda: Some(lambda),
            sufficient_bits: g,
            practical_bits: p,
            sufficient_rate: if g == 0.0 { 0.0 } else { upper * g },
            necessary_bits: f64::NAN,
            trig_rate_upper: upper,
            trig_rate_lower_general: f64::NAN,
            necessary_rate_general: f64::NAN,
            trig_rate_lower_restricted: f64::NAN,
            necessary_rate_restricted: f64::NAN,
            beta: f64::NAN,
            datarate_baseline: datarate_complex(a),
        }
    }
}
