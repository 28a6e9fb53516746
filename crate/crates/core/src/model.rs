//! Plant, trigger, channel and disturbance configuration.
//!
//! Every gain is stored as a [`Complex64`]; a real plant is one whose gains
//! all have zero imaginary part. Magnitudes are complex absolute values, so
//! `‖e^{Q y}‖ = e^{Re(Q) y}` holds throughout.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("closed loop is not stable: Re(A - BK) = {0} >= 0")]
    UnstableClosedLoop(f64),
    #[error("invalid channel model: {0}")]
    Channel(String),
    #[error("invalid disturbance model: {0}")]
    Disturbance(String),
}

/// `(e^{a t} - 1) / a`, with the `a -> 0` limit `t`.
pub fn growth(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        t
    } else {
        (a * t).exp_m1() / a
    }
}

/// Time for `|z|` to grow from `from` to `to` under `ż = a z + w`, `|w| = m`,
/// i.e. the `t` solving `from e^{at} + m (e^{at} - 1)/a = to`.
///
/// Returns `f64::INFINITY` when the error never reaches `to`.
pub fn growth_time(a: f64, m: f64, from: f64, to: f64) -> f64 {
    if to <= from {
        return 0.0;
    }
    if a == 0.0 {
        return if m > 0.0 { (to - from) / m } else { f64::INFINITY };
    }
    let num = to * a + m;
    let den = from * a + m;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    (num / den).ln() / a
}

/// Scalar plant `ẋ = A x + B u + w`, `|w| <= M`, controlled by `u = -K x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub a: Complex64,
    pub b: Complex64,
    pub k: Complex64,
    pub m: f64,
}

impl PlantConfig {
    pub fn real(a: f64, b: f64, k: f64, m: f64) -> Self {
        Self {
            a: Complex64::new(a, 0.0),
            b: Complex64::new(b, 0.0),
            k: Complex64::new(k, 0.0),
            m,
        }
    }

    pub fn complex(a: Complex64, b: Complex64, k: Complex64, m: f64) -> Self {
        Self { a, b, k, m }
    }

    pub fn is_real(&self) -> bool {
        self.a.im == 0.0 && self.b.im == 0.0 && self.k.im == 0.0
    }

    /// Real part of the open-loop gain: the rate at which `|z|` can grow.
    pub fn growth_rate(&self) -> f64 {
        self.a.re
    }

    pub fn closed_loop(&self) -> Complex64 {
        self.a - self.b * self.k
    }
}

/// Triggering and codec parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    /// Triggering radius `J`.
    pub j: f64,
    /// Contraction factor `ρ₀` enforced at every reception.
    pub rho0: f64,
    /// Delay upper bound `γ` in seconds.
    pub gamma: f64,
    /// Interval scale `b > 1`; the time line is cut into intervals of `bγ`.
    pub b: f64,
    /// Phase bits, complex plants only.
    pub lambda: u32,
}

impl TriggerConfig {
    pub fn new(j: f64, rho0: f64, gamma: f64, b: f64) -> Self {
        Self { j, rho0, gamma, b, lambda: 1 }
    }

    pub fn with_lambda(mut self, lambda: u32) -> Self {
        self.lambda = lambda;
        self
    }
}

/// Which set of inequalities [`validate_config`] checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationMode {
    /// Timing-codec design for real plants.
    SufficientReal,
    /// Preconditions of the necessary-rate analysis.
    NecessaryReal,
    /// Timing-and-phase codec design for complex plants; `zeta` is
    /// `1 - cos(Im(A) τ)` at the timing error `τ` the codec delivers.
    SufficientComplex { chi: f64, chi_prime: f64, zeta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveGrowth(f64),
    NegativeGrowth(f64),
    ZeroInputGain,
    UnstableClosedLoop(f64),
    NegativeDisturbanceBound(f64),
    NonPositiveRadius(f64),
    ContractionOutOfRange(f64),
    NegativeDelayBound(f64),
    IntervalScale(f64),
    RadiusTooSmall { j: f64, required: f64 },
    DisturbanceExceedsGrowth { m: f64, aj: f64 },
    ComplexContraction { rho0: f64, required: f64 },
    ComplexRadius { j: f64, required: f64 },
    PhaseNoise { lhs: f64, chi_prime: f64 },
    PhaseBits { lambda: u32, required: f64 },
    ChiSum(f64),
    NotRealPlant,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveGrowth(a) => write!(f, "A > 0 fails (A = {a})"),
            Violation::NegativeGrowth(a) => write!(f, "Re(A) >= 0 fails (Re(A) = {a})"),
            Violation::ZeroInputGain => write!(f, "B != 0 fails"),
            Violation::UnstableClosedLoop(v) => write!(f, "Re(A - BK) < 0 fails ({v})"),
            Violation::NegativeDisturbanceBound(m) => write!(f, "M >= 0 fails (M = {m})"),
            Violation::NonPositiveRadius(j) => write!(f, "J > 0 fails (J = {j})"),
            Violation::ContractionOutOfRange(r) => write!(f, "0 < rho0 < 1 fails (rho0 = {r})"),
            Violation::NegativeDelayBound(g) => write!(f, "gamma >= 0 fails (gamma = {g})"),
            Violation::IntervalScale(b) => write!(f, "b > 1 fails (b = {b})"),
            Violation::RadiusTooSmall { j, required } => {
                write!(f, "J > (M/(A rho0))(e^(A gamma) - 1) fails (J = {j}, needs > {required})")
            }
            Violation::DisturbanceExceedsGrowth { m, aj } => {
                write!(f, "M ≤ AJ fails (M = {m}, AJ = {aj})")
            }
            Violation::ComplexContraction { rho0, required } => {
                write!(f, "complex contraction bound fails (rho0 = {rho0}, needs >= {required})")
            }
            Violation::ComplexRadius { j, required } => {
                write!(f, "complex radius bound fails (J = {j}, needs >= {required})")
            }
            Violation::PhaseNoise { lhs, chi_prime } => {
                write!(f, "sqrt(2 zeta) e^(Re(A) gamma) <= chi' fails ({lhs} > {chi_prime})")
            }
            Violation::PhaseBits { lambda, required } => {
                write!(f, "phase bits too few (lambda = {lambda}, needs > {required})")
            }
            Violation::ChiSum(s) => write!(f, "0 < chi + chi' < 1 fails (sum = {s})"),
            Violation::NotRealPlant => write!(f, "plant gains must be real in this mode"),
        }
    }
}

/// Checks every inequality the chosen design relies on. Violations are
/// returned, never raised; an empty list means the configuration is usable.
pub fn validate_config(
    plant: &PlantConfig,
    trig: &TriggerConfig,
    mode: ValidationMode,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let a = plant.growth_rate();
    let m = plant.m;

    match mode {
        ValidationMode::SufficientReal | ValidationMode::NecessaryReal => {
            if !plant.is_real() {
                out.push(Violation::NotRealPlant);
            }
            if a <= 0.0 {
                out.push(Violation::NonPositiveGrowth(a));
            }
        }
        ValidationMode::SufficientComplex { .. } => {
            if a < 0.0 {
                out.push(Violation::NegativeGrowth(a));
            }
        }
    }
    if plant.b == Complex64::new(0.0, 0.0) {
        out.push(Violation::ZeroInputGain);
    }
    if m < 0.0 {
        out.push(Violation::NegativeDisturbanceBound(m));
    }
    if trig.j <= 0.0 {
        out.push(Violation::NonPositiveRadius(trig.j));
    }
    if trig.gamma < 0.0 {
        out.push(Violation::NegativeDelayBound(trig.gamma));
    }

    match mode {
        ValidationMode::SufficientReal => {
            common_design_checks(plant, trig, &mut out);
            if a > 0.0 {
                let required = m / (a * trig.rho0) * (a * trig.gamma).exp_m1();
                if trig.j <= required {
                    out.push(Violation::RadiusTooSmall { j: trig.j, required });
                }
            }
        }
        ValidationMode::NecessaryReal => {
            if m > a * trig.j {
                out.push(Violation::DisturbanceExceedsGrowth { m, aj: a * trig.j });
            }
        }
        ValidationMode::SufficientComplex { chi, chi_prime, zeta } => {
            common_design_checks(plant, trig, &mut out);
            out.extend(complex_design_violations(plant, trig, chi, chi_prime, zeta));
        }
    }
    out
}

fn common_design_checks(plant: &PlantConfig, trig: &TriggerConfig, out: &mut Vec<Violation>) {
    let cl = plant.closed_loop().re;
    if cl >= 0.0 {
        out.push(Violation::UnstableClosedLoop(cl));
    }
    if !(trig.rho0 > 0.0 && trig.rho0 < 1.0) {
        out.push(Violation::ContractionOutOfRange(trig.rho0));
    }
    if trig.b <= 1.0 {
        out.push(Violation::IntervalScale(trig.b));
    }
}

/// The complex-plant design constraints on `ρ₀`, `J`, `ζ` and `λ`.
pub fn complex_design_violations(
    plant: &PlantConfig,
    trig: &TriggerConfig,
    chi: f64,
    chi_prime: f64,
    zeta: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let a = plant.growth_rate();
    let m = plant.m;
    let e = (a * trig.gamma).exp();
    let dist = m * growth(a, trig.gamma);
    let phase = 2.0 * (PI / 2f64.powi(trig.lambda as i32 + 1)).sin();
    let noise = (2.0 * zeta).sqrt();

    let rho_required = dist / trig.j + e * (phase + noise);
    if trig.rho0 < rho_required {
        out.push(Violation::ComplexContraction { rho0: trig.rho0, required: rho_required });
    }
    if chi > 0.0 {
        let j_required = dist / chi;
        if trig.j < j_required {
            out.push(Violation::ComplexRadius { j: trig.j, required: j_required });
        }
    }
    if noise * e > chi_prime {
        out.push(Violation::PhaseNoise { lhs: noise * e, chi_prime });
    }
    let sum = chi + chi_prime;
    if !(sum > 0.0 && sum < 1.0) || chi <= 0.0 || chi_prime < 0.0 {
        out.push(Violation::ChiSum(sum));
    } else {
        let required = min_phase_bits_bound(a, trig.gamma, chi, chi_prime);
        if (trig.lambda as f64) <= required {
            out.push(Violation::PhaseBits { lambda: trig.lambda, required });
        }
    }
    out
}

/// Right-hand side of the phase-bit constraint:
/// `log₂(π / arcsin((1 - χ - χ') / (2 e^{Re(A) γ}))) - 1`.
pub fn min_phase_bits_bound(re_a: f64, gamma: f64, chi: f64, chi_prime: f64) -> f64 {
    let arg = (1.0 - chi - chi_prime) / (2.0 * (re_a * gamma).exp());
    (PI / arg.asin()).log2() - 1.0
}

/// Delay realizations. Every delay is quantized to the simulation grid and
/// lies in `[0, γ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelModel {
    /// The same delay for every packet.
    Constant { delay: f64 },
    /// Uniform over the grid delays `{δ', 2δ', ..., ⌊γ/δ'⌋δ'}`.
    UniformOnGrid,
    /// Always the largest grid delay not exceeding `γ`.
    AdversarialMax,
    /// Per-packet delays, cycled when exhausted.
    Scripted { delays: Vec<f64> },
}

/// Grid-quantized delay source built from a [`ChannelModel`].
#[derive(Debug, Clone)]
pub struct DelaySampler {
    kind: ChannelModel,
    max_steps: u64,
    dt: f64,
    scripted: Vec<u64>,
    cursor: usize,
}

impl DelaySampler {
    pub fn new(model: &ChannelModel, gamma: f64, dt: f64) -> Result<Self, ModelError> {
        if !(dt > 0.0) {
            return Err(ModelError::Channel(format!("grid step must be positive, got {dt}")));
        }
        let max_steps = max_grid_steps(gamma, dt);
        let to_steps = |d: f64| -> Result<u64, ModelError> {
            if !(0.0..=gamma * (1.0 + 1e-12)).contains(&d) {
                return Err(ModelError::Channel(format!("delay {d} outside [0, {gamma}]")));
            }
            Ok(((d / dt).round() as u64).min(max_steps))
        };
        let scripted = match model {
            ChannelModel::Constant { delay } => vec![to_steps(*delay)?],
            ChannelModel::Scripted { delays } => {
                if delays.is_empty() {
                    return Err(ModelError::Channel("scripted channel needs delays".into()));
                }
                delays.iter().map(|&d| to_steps(d)).collect::<Result<_, _>>()?
            }
            _ => Vec::new(),
        };
        Ok(Self { kind: model.clone(), max_steps, dt, scripted, cursor: 0 })
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    /// Next delay, in grid steps.
    pub fn next_steps<R: Rng>(&mut self, rng: &mut R) -> u64 {
        match self.kind {
            ChannelModel::UniformOnGrid => {
                if self.max_steps == 0 {
                    0
                } else {
                    rng.random_range(1..=self.max_steps)
                }
            }
            ChannelModel::AdversarialMax => self.max_steps,
            ChannelModel::Constant { .. } | ChannelModel::Scripted { .. } => {
                let s = self.scripted[self.cursor % self.scripted.len()];
                self.cursor += 1;
                s
            }
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Largest `n` with `n δ' <= γ`, tolerant to the rounding of `γ / δ'`.
pub fn max_grid_steps(gamma: f64, dt: f64) -> u64 {
    if gamma <= 0.0 {
        return 0;
    }
    (gamma / dt * (1.0 + 1e-12)).floor() as u64
}

/// Disturbance realizations, held constant over each grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisturbanceModel {
    Zero,
    /// `M e^{iφ}`; for a real plant the sign of `cos φ` picks `±M`.
    ConstantMax {
        #[serde(default)]
        phase: f64,
    },
    /// Uniform on `[-M, M]` (real) or on the disc of radius `M` (complex).
    Uniform,
    /// `M sin(ωt + φ)` (real) or `M e^{i(ωt + φ)}` (complex).
    Sinusoid {
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Per-step samples as `[re, im]` pairs, cycled when exhausted.
    Scripted { samples: Vec<Complex64> },
    /// `M z/|z|`: always pushes the estimation error outward.
    ErrorAligned,
}

/// Stateful sampler for a [`DisturbanceModel`] with amplitude `M`.
#[derive(Debug, Clone)]
pub struct DisturbanceSampler {
    model: DisturbanceModel,
    m: f64,
    real: bool,
}

impl DisturbanceSampler {
    pub fn new(model: &DisturbanceModel, m: f64, real: bool) -> Result<Self, ModelError> {
        if let DisturbanceModel::Scripted { samples } = model {
            if samples.is_empty() {
                return Err(ModelError::Disturbance("scripted disturbance needs samples".into()));
            }
            for w in samples {
                if w.norm() > m * (1.0 + 1e-12) {
                    return Err(ModelError::Disturbance(format!(
                        "sample {w} exceeds bound M = {m}"
                    )));
                }
                if real && w.im != 0.0 {
                    return Err(ModelError::Disturbance(
                        "real plant needs real disturbance samples".into(),
                    ));
                }
            }
        }
        Ok(Self { model: model.clone(), m, real })
    }

    /// Sample for grid step `step` starting at time `t`, given the current
    /// estimation error `z` (used only by [`DisturbanceModel::ErrorAligned`]).
    pub fn sample<R: Rng>(&mut self, step: usize, t: f64, z: Complex64, rng: &mut R) -> Complex64 {
        let m = self.m;
        match &self.model {
            DisturbanceModel::Zero => Complex64::new(0.0, 0.0),
            DisturbanceModel::ConstantMax { phase } => {
                if self.real {
                    Complex64::new(if phase.cos() >= 0.0 { m } else { -m }, 0.0)
                } else {
                    Complex64::from_polar(m, *phase)
                }
            }
            DisturbanceModel::Uniform => {
                if self.real {
                    Complex64::new(rng.random_range(-1.0..=1.0) * m, 0.0)
                } else {
                    let r = m * rng.random::<f64>().sqrt();
                    let th = rng.random_range(0.0..2.0 * PI);
                    Complex64::from_polar(r, th)
                }
            }
            DisturbanceModel::Sinusoid { omega, phase } => {
                let arg = omega * t + phase;
                if self.real {
                    Complex64::new(m * arg.sin(), 0.0)
                } else {
                    Complex64::from_polar(m, arg)
                }
            }
            DisturbanceModel::Scripted { samples } => samples[step % samples.len()],
            DisturbanceModel::ErrorAligned => {
                let n = z.norm();
                if n == 0.0 {
                    Complex64::new(m, 0.0)
                } else if self.real {
                    Complex64::new(m * z.re.signum(), 0.0)
                } else {
                    z * (m / n)
                }
            }
        }
    }
}

/// Practical-stability envelope of the closed loop under `u = -K x̂`:
///
/// `|x(t)| <= ξ(|x(0)|, t) + ψ(|w|_t) + ι(γ) + ϑ(|w|_t, γ)`
///
/// with `ξ(r, t) = e^{Re(A-BK) t} r`, `ψ(r) = r/σ`,
/// `ι(γ) = |BK| J e^{Re(A) γ}/σ`, `ϑ(r, γ) = |BK| r (e^{Re(A)γ} - 1)/(Re(A) σ)`
/// and `σ = -Re(A - BK)`. These follow from bounding `|z|_t` by the
/// worst-case growth of the error during one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IspsEnvelope {
    /// Decay rate `σ = -Re(A - BK) > 0` of the initial-condition term.
    pub xi0: f64,
    /// `1/σ`, the gain on `|w|_t`.
    pub psi: f64,
    /// Coefficient of `e^{Re(A) γ}` in `ι`: `|BK| J / σ`.
    pub iota: f64,
    /// Coefficient of `r (e^{Re(A)γ} - 1)/Re(A)` in `ϑ`: `|BK| / σ`.
    pub vartheta: f64,
    re_a: f64,
}

impl IspsEnvelope {
    pub fn new(plant: &PlantConfig, j: f64) -> Result<Self, ModelError> {
        let cl = plant.closed_loop().re;
        if cl >= 0.0 {
            return Err(ModelError::UnstableClosedLoop(cl));
        }
        let sigma = -cl;
        let bk = (plant.b * plant.k).norm();
        Ok(Self {
            xi0: sigma,
            psi: 1.0 / sigma,
            iota: bk * j / sigma,
            vartheta: bk / sigma,
            re_a: plant.growth_rate(),
        })
    }

    pub fn xi(&self, x0_abs: f64, t: f64) -> f64 {
        (-self.xi0 * t).exp() * x0_abs
    }

    pub fn psi_of(&self, w_sup: f64) -> f64 {
        self.psi * w_sup
    }

    pub fn iota_of(&self, gamma: f64) -> f64 {
        self.iota * (self.re_a * gamma).exp()
    }

    pub fn vartheta_of(&self, w_sup: f64, gamma: f64) -> f64 {
        self.vartheta * w_sup * growth(self.re_a, gamma)
    }

    pub fn bound(&self, x0_abs: f64, w_sup: f64, gamma: f64, t: f64) -> f64 {
        self.xi(x0_abs, t) + self.psi_of(w_sup) + self.iota_of(gamma) + self.vartheta_of(w_sup, gamma)
    }
}

/// Envelope value at time `t` for the given plant and trigger.
pub fn isps_envelope(
    plant: &PlantConfig,
    trig: &TriggerConfig,
    x0_abs: f64,
    w_sup: f64,
    t: f64,
) -> Result<f64, ModelError> {
    Ok(IspsEnvelope::new(plant, trig.j)?.bound(x0_abs, w_sup, trig.gamma, t))
}

/// Worst-case `sup |z|` when every reception lands inside the radius:
/// `J e^{Re(A) γ} + M (e^{Re(A) γ} - 1)/Re(A)`.
pub fn error_peak_bound(re_a: f64, m: f64, j: f64, gamma: f64) -> f64 {
    j * (re_a * gamma).exp() + m * growth(re_a, gamma)
}

/// Uniform lower bound on the time between triggers when every reception
/// contracts the error to `ρ₀ J`.
pub fn min_trigger_interval(re_a: f64, m: f64, j: f64, rho0: f64) -> f64 {
    growth_time(re_a, m, rho0 * j, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family(gamma: f64) -> (PlantConfig, TriggerConfig) {
        let (a, m, rho0) = (5.5651, 0.4, 0.1);
        let j = m / (a * rho0) * (a * gamma).exp_m1() + 0.1;
        (PlantConfig::real(a, 1.0, 10.0, m), TriggerConfig::new(j, rho0, gamma, 1.0001))
    }

    #[test]
    fn family_point_is_valid() {
        let (p, t) = family(0.2);
        assert!(validate_config(&p, &t, ValidationMode::SufficientReal).is_empty());
    }

    #[test]
    fn radius_at_the_limit_is_rejected() {
        let (p, mut t) = family(0.2);
        t.j -= 0.1;
        let v = validate_config(&p, &t, ValidationMode::SufficientReal);
        assert!(matches!(v.as_slice(), [Violation::RadiusTooSmall { .. }]));
    }

    #[test]
    fn necessary_mode_zero_disturbance() {
        for a in [0.1, 1.0, 7.0] {
            for j in [1e-3, 0.5, 4.0] {
                let p = PlantConfig::real(a, 1.0, 2.0 * a, 0.0);
                let t = TriggerConfig::new(j, 0.5, 0.1, 2.0);
                assert!(validate_config(&p, &t, ValidationMode::NecessaryReal).is_empty());
            }
        }
    }

    #[test]
    fn necessary_mode_reports_large_disturbance() {
        let p = PlantConfig::real(1.0, 1.0, 2.0, 2.0);
        let t = TriggerConfig::new(1.0, 0.5, 0.1, 2.0);
        let v = validate_config(&p, &t, ValidationMode::NecessaryReal);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("M ≤ AJ fails"));
    }

    #[test]
    fn envelope_limits() {
        let p = PlantConfig::real(2.0, 1.0, 5.0, 0.3);
        let t = TriggerConfig::new(0.7, 0.5, 0.0, 2.0);
        // BK J / (BK - A)
        let d = 5.0 * 0.7 / 3.0;
        assert!((isps_envelope(&p, &t, 0.0, 0.0, 0.0).unwrap() - d).abs() < 1e-15);
        assert!((isps_envelope(&p, &t, 3.0, 0.0, 1e3).unwrap() - d).abs() < 1e-12);
    }

    #[test]
    fn envelope_hand_evaluation() {
        let (a, b, k, j, gamma, w, t) = (5.5651f64, 1.0, 10.0, 0.1, 0.1, 0.4, 5.0);
        let x0 = 0.25;
        let bk = b * k;
        let psi = w / (bk - a);
        let iota = bk * j * (a * gamma).exp() / (bk - a);
        let vartheta = bk * w * ((a * gamma).exp() - 1.0) / (a * (bk - a));
        let xi = ((a - bk) * t).exp() * x0;
        let expected = xi + psi + iota + vartheta;
        let p = PlantConfig::real(a, b, k, 0.4);
        let trig = TriggerConfig::new(j, 0.5, gamma, 2.0);
        let got = isps_envelope(&p, &trig, x0, w, t).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn envelope_rejects_unstable_loop() {
        let p = PlantConfig::real(2.0, 1.0, 1.0, 0.0);
        let t = TriggerConfig::new(1.0, 0.5, 0.1, 2.0);
        assert!(isps_envelope(&p, &t, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn delays_stay_in_range() {
        let gamma = 0.1;
        let dt = 0.005;
        let models = [
            ChannelModel::Constant { delay: 0.05 },
            ChannelModel::UniformOnGrid,
            ChannelModel::AdversarialMax,
            ChannelModel::Scripted { delays: vec![0.0, 0.1, 0.033, 0.0999] },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in &models {
            let mut s = DelaySampler::new(m, gamma, dt).unwrap();
            for _ in 0..10_000 {
                let d = s.next_steps(&mut rng) as f64 * dt;
                assert!((0.0..=gamma * (1.0 + 1e-12)).contains(&d), "{m:?} gave {d}");
            }
        }
    }

    #[test]
    fn scripted_delay_beyond_bound_is_rejected() {
        let m = ChannelModel::Scripted { delays: vec![0.2] };
        assert!(DelaySampler::new(&m, 0.1, 0.01).is_err());
    }

    #[test]
    fn disturbances_stay_in_range() {
        let mm = 0.37;
        let models = [
            DisturbanceModel::Zero,
            DisturbanceModel::ConstantMax { phase: 1.0 },
            DisturbanceModel::Uniform,
            DisturbanceModel::Sinusoid { omega: 3.0, phase: 0.2 },
            DisturbanceModel::Scripted {
                samples: vec![Complex64::new(0.37, 0.0), Complex64::new(-0.1, 0.0)],
            },
            DisturbanceModel::ErrorAligned,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for real in [true, false] {
            for m in &models {
                let mut s = DisturbanceSampler::new(m, mm, real).unwrap();
                for k in 0..10_000 {
                    let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let w = s.sample(k, k as f64 * 1e-3, z, &mut rng);
                    assert!(w.norm() <= mm * (1.0 + 1e-12));
                    if real {
                        assert_eq!(w.im, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn growth_time_inverts_growth() {
        let (a, m, from, to) = (3.0, 0.5, 0.2, 1.1);
        let t = growth_time(a, m, from, to);
        let reached = from * (a * t).exp() + m * growth(a, t);
        assert!((reached - to).abs() < 1e-12);
        assert!((growth_time(0.0, 0.5, 0.2, 1.2) - 2.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn envelope_is_monotone(
            x0 in 0.0f64..5.0, w in 0.0f64..1.0, g in 0.0f64..0.5,
            dx in 0.0f64..1.0, dw in 0.0f64..1.0, dg in 0.0f64..0.5, t in 0.0f64..10.0,
        ) {
            let p = PlantConfig::real(5.5651, 1.0, 10.0, 1.0);
            let env = IspsEnvelope::new(&p, 0.3).unwrap();
            let base = env.bound(x0, w, g, t);
            proptest::prop_assert!(env.bound(x0 + dx, w, g, t) >= base);
            proptest::prop_assert!(env.bound(x0, w + dw, g, t) >= base);
            proptest::prop_assert!(env.bound(x0, w, g + dg, t) >= base);
            proptest::prop_assert!(env.xi(x0, t + 0.1) <= env.xi(x0, t));
        }
    }
}
