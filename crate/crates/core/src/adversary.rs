//! Worst-case constructions for the necessary side.
//!
//! After a trigger at `z(t_s) = ±J`, the delay `Δ ∈ [0, γ]` and the
//! disturbance `|w| ≤ M` leave `z(t_c)` anywhere in an interval whose
//! measure grows with `γ`. A quantizer needs enough cells to pin `z(t_c)`
//! down to within `J`, and an adversary that picks delays landing on cell
//! boundaries keeps the post-jump error at half a cell.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bounds;
use crate::codec::{Packet, Sign};
use crate::engine::{self, CodecMode, EngineError, RunOutput, RunSpec};
use crate::model::{error_peak_bound, growth_time, ChannelModel, DisturbanceModel, PlantConfig, TriggerConfig};

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("M ≤ AJ fails: M = {m}, AJ = {aj}")]
    DisturbanceExceedsGrowth { m: f64, aj: f64 },
    #[error("growth rate must be positive, got {0}")]
    Growth(f64),
    #[error("infeasible: beta = {beta} exceeds gamma = {gamma}")]
    Infeasible { beta: f64, gamma: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

type Result<T> = std::result::Result<T, AdversaryError>;

fn check(a: f64, m: f64, j: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(AdversaryError::Growth(a));
    }
    if m > a * j {
        return Err(AdversaryError::DisturbanceExceedsGrowth { m, aj: a * j });
    }
    Ok(())
}

/// Possible values of `z(t_c)` after a trigger at `sign · J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintySet {
    pub lo: f64,
    pub hi: f64,
}

impl UncertaintySet {
    pub fn measure(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, z: f64) -> bool {
        (self.lo..=self.hi).contains(&z)
    }
}

pub fn uncertainty_set(a: f64, gamma: f64, m: f64, j: f64, sign: Sign) -> Result<UncertaintySet> {
    check(a, m, j)?;
    let peak = error_peak_bound(a, m, j, gamma);
    Ok(match sign {
        Sign::Pos => UncertaintySet { lo: j, hi: peak },
        Sign::Neg => UncertaintySet { lo: -peak, hi: -j },
    })
}

/// Two-sided measure `2(M/A + J)(e^{Aγ} - 1)`.
pub fn uncertainty_measure(a: f64, gamma: f64, m: f64, j: f64) -> f64 {
    2.0 * (m / a + j) * (a * gamma).exp_m1()
}

/// Fewest equal cells of width at most `2J` covering each signed
/// uncertainty interval; cell centers are the reconstructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalQuantizer {
    pub j: f64,
    /// Cells per sign.
    pub cells: u32,
    pub width: f64,
}

impl MinimalQuantizer {
    /// Packet size: `⌈log₂(2 · cells)⌉`, sign included.
    pub fn bits(&self) -> u32 {
        (2 * self.cells as u64).next_power_of_two().trailing_zeros()
    }

    /// `[lo, hi)` of positive-side cell `i`.
    pub fn cell(&self, i: u32) -> (f64, f64) {
        let lo = self.j + i as f64 * self.width;
        (lo, lo + self.width)
    }

    pub fn center(&self, i: u32) -> f64 {
        self.j + (i as f64 + 0.5) * self.width
    }

    /// Cell containing `|z|`, clamped to the covered range.
    pub fn index(&self, z_abs: f64) -> u32 {
        if self.width <= 0.0 {
            return 0;
        }
        let i = ((z_abs - self.j) / self.width).floor().max(0.0) as u32;
        i.min(self.cells - 1)
    }

    /// Packet and reconstruction for a reception at error `z`.
    pub fn quantize(&self, z: f64, t_s: f64) -> (Packet, f64) {
        let sign = Sign::of(z);
        let i = self.index(z.abs());
        let g = self.bits() as usize;
        let mut bits = Vec::with_capacity(g);
        bits.push(sign == Sign::Pos);
        for b in (0..g - 1).rev() {
            bits.push(i >> b & 1 == 1);
        }
        (Packet { bits, t_generated: t_s, lambda: 0 }, sign.value() * self.center(i))
    }
}

pub fn minimal_quantizer(a: f64, gamma: f64, m: f64, j: f64) -> Result<MinimalQuantizer> {
    let set = uncertainty_set(a, gamma, m, j, Sign::Pos)?;
    let l = set.measure();
    // shave rounding so that a measure of exactly k·2J gives k cells
    let cells = ((l / (2.0 * j)) * (1.0 - 1e-12)).ceil().max(1.0) as u32;
    Ok(MinimalQuantizer { j, cells, width: l / cells as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Constant delay `α`; receptions leave `|z|` at or above `Υ`.
    FixedDelay { alpha: f64, upsilon: f64 },
    /// Delays that land `z(t_c)` on the first cell boundary.
    BoundaryLanding,
}

/// Delay and disturbance scripts for the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub channel: ChannelModel,
    pub disturbance: DisturbanceModel,
    /// Per-event delay, before grid rounding.
    pub delay: f64,
    pub quantizer: Option<MinimalQuantizer>,
}

pub fn worst_case_realization(a: f64, gamma: f64, m: f64, j: f64, target: Target) -> Result<Realization> {
    check(a, m, j)?;
    match target {
        Target::FixedDelay { alpha, .. } => {
            Ok(Realization {
                channel: ChannelModel::Constant { delay: alpha },
                disturbance: DisturbanceModel::ErrorAligned,
                delay: alpha,
                quantizer: None,
            })
        }
        Target::BoundaryLanding => {
            let bt = bounds::beta(a, m, j);
            if bt > gamma * (1.0 + 1e-12) {
                return Err(AdversaryError::Infeasible { beta: bt, gamma });
            }
            let q = minimal_quantizer(a, gamma, m, j)?;
            let delay = growth_time(a, m, j, j + q.width).min(gamma);
            Ok(Realization {
                channel: ChannelModel::Constant { delay },
                disturbance: DisturbanceModel::ErrorAligned,
                delay,
                quantizer: Some(q),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub beta: f64,
    pub delay: f64,
    pub cells: u32,
    pub bits: u32,
    pub necessary_bits: f64,
    /// `|z(t_c⁺)| / J` per reception.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub ratio_floor: f64,
    pub rate_triggers: f64,
    pub restricted_rate: f64,
    pub rate_floor: f64,
    pub passed: bool,
}

/// Replays the boundary-landing realization through the engine with the
/// minimal quantizer.
pub fn replay(plant: &PlantConfig, j: f64, gamma: f64, dt: f64, horizon: f64, seed: u64) -> Result<(ReplayReport, RunOutput)> {
    let a = plant.a.re;
    let m = plant.m;
    let real = worst_case_realization(a, gamma, m, j, Target::BoundaryLanding)?;
    let q = real.quantizer.expect("boundary quantizer");
    let spec = RunSpec {
        plant: *plant,
        trig: TriggerConfig::new(j, 0.5, gamma, 2.0),
        channel: real.channel.clone(),
        disturbance: real.disturbance.clone(),
        codec: CodecMode::Minimal(q),
        dt,
        horizon,
        seed,
        x0: Complex64::new(0.5 * j, 0.0),
        xhat0: Complex64::new(0.0, 0.0),
    };
    let out = engine::run(&spec)?;
    let ratios: Vec<f64> = out.log.z_post_jump.iter().map(|z| z / j).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    // A grid-rounded delay misses the boundary by up to half a step of
    // growth, and the trigger itself overshoots J by one step.
    let speed = a * error_peak_bound(a, m, j, gamma) + m;
    let slack = (speed * dt + (j * (a * dt).exp_m1() + m * dt) * (a * gamma).exp()) / j;
    let ratio_floor = 0.5 - slack;
    let restricted = bounds::trig_rate_lower_restricted(a, gamma, m, j).unwrap_or(f64::NAN);
    let rate_floor = 1.0 / (1.0 / restricted + 2.0 * dt);
    let rate = out.log.rate_triggers();
    let passed = !ratios.is_empty() && min_ratio >= ratio_floor && rate >= rate_floor;
    let report = ReplayReport {
        beta: bounds::beta(a, m, j),
        delay: real.delay,
        cells: q.cells,
        bits: q.bits(),
        necessary_bits: bounds::necessary_bits(a, gamma, m, j).unwrap_or(f64::NAN),
        ratios,
        min_ratio,
        ratio_floor,
        rate_triggers: rate,
        restricted_rate: restricted,
        rate_floor,
        passed,
    };
    Ok((report, out))
}

/// `z` after following `ż = A z + w` through piecewise-constant segments
/// `(duration, w)`.
pub fn forward_error(a: f64, z0: f64, segments: &[(f64, f64)]) -> f64 {
    segments.iter().fold(z0, |z, &(d, w)| {
        let e = (a * d).exp();
        z * e + w * crate::model::growth(a, d)
    })
}
