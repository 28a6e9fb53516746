//! Discrete-time closed-loop simulator on a uniform grid of step `δ'`.
//!
//! Per grid instant the order is: deliver a due packet and jump both
//! estimate copies, test the trigger, encode and schedule, compute
//! `u = -K x̂`, sample `w`, record, integrate one step. Integration is the
//! exact zero-order-hold solution of the scalar ODE, so the only
//! discretization effect is that triggers and receptions sit on the grid.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::MinimalQuantizer;
use crate::bounds;
use crate::codec::{self, CodecError, DecodedEvent, Packet, Sign};
use crate::model::{
    error_peak_bound, min_trigger_interval, ChannelModel, DelaySampler, DisturbanceModel,
    DisturbanceSampler, IspsEnvelope, ModelError, PlantConfig, TriggerConfig,
};
use crate::table::{fmt_num, Table};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("zeno guard: {events} events exceed the limit of {limit}")]
    Zeno { events: usize, limit: usize },
    #[error("initial estimation error {z0} must be below the triggering radius {j}")]
    InitialError { z0: f64, j: f64 },
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// `e^{w} - 1` without cancellation for small `|w|`.
pub fn cexpm1(w: Complex64) -> Complex64 {
    let s = (0.5 * w.im).sin();
    let em1 = w.re.exp_m1();
    Complex64::new(em1 * w.im.cos() - 2.0 * s * s, w.re.exp() * w.im.sin())
}

/// Exact one-step map of `ẋ = A x + v` with `v` held over the step.
#[derive(Debug, Clone, Copy)]
pub struct Propagator {
    pub a: Complex64,
    pub dt: f64,
    /// `e^{A δ'}`
    pub e: Complex64,
    /// `(e^{A δ'} - 1)/A`
    pub phi: Complex64,
}

impl Propagator {
    pub fn new(a: Complex64, dt: f64) -> Self {
        let e = (a * dt).exp();
        let phi = if a == Complex64::new(0.0, 0.0) {
            Complex64::new(dt, 0.0)
        } else {
            cexpm1(a * dt) / a
        };
        Self { a, dt, e, phi }
    }

    pub fn apply(&self, x: Complex64, v: Complex64) -> Complex64 {
        self.e * x + self.phi * v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InFlight {
    pub packet: Option<Packet>,
    pub sign: Sign,
    pub k_s: usize,
    pub k_c: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub k: usize,
    pub t: f64,
    pub x: Complex64,
    pub xhat_ctrl: Complex64,
    /// Sensor copy of the controller estimate, kept equal by acknowledgment.
    pub xhat_sensor: Complex64,
    pub u: Complex64,
    pub in_flight: Option<InFlight>,
}

impl SimState {
    pub fn new(plant: &PlantConfig, x0: Complex64, xhat0: Complex64) -> Self {
        Self {
            k: 0,
            t: 0.0,
            x: x0,
            xhat_ctrl: xhat0,
            xhat_sensor: xhat0,
            u: -plant.k * xhat0,
            in_flight: None,
        }
    }

    pub fn z(&self) -> Complex64 {
        self.x - self.xhat_sensor
    }
}

/// Advances one grid step with disturbance `w` held constant.
pub fn step(state: &SimState, plant: &PlantConfig, prop: &Propagator, w: Complex64) -> SimState {
    let bu = plant.b * state.u;
    let xhat_ctrl = prop.apply(state.xhat_ctrl, bu);
    let k = state.k + 1;
    SimState {
        k,
        t: k as f64 * prop.dt,
        x: prop.apply(state.x, bu + w),
        xhat_ctrl,
        xhat_sensor: prop.apply(state.xhat_sensor, bu),
        u: -plant.k * xhat_ctrl,
        in_flight: state.in_flight.clone(),
    }
}

pub fn detect_trigger(state: &SimState, trig: &TriggerConfig) -> bool {
    state.in_flight.is_none() && state.z().norm() >= trig.j
}

/// Applies the estimate jump at reception. Returns the new state and
/// `|z(t_c⁺)|`.
pub fn on_reception(state: &SimState, plant: &PlantConfig, dec: &DecodedEvent) -> (SimState, f64) {
    let zbar = dec.zbar.unwrap_or_default();
    let mut s = state.clone();
    s.xhat_ctrl += zbar;
    s.xhat_sensor += zbar;
    s.u = -plant.k * s.xhat_ctrl;
    s.in_flight = None;
    let post = s.z().norm();
    (s, post)
}

/// How the sensor encodes `z(t_s)` and the controller rebuilds `z̄(t_c)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CodecMode {
    /// Sign and timing bits; `bits = 1` sends the sign only.
    Real { bits: u32 },
    /// Phase and timing bits; `bits = λ` sends the phase only.
    Complex { bits: u32, lambda: u32 },
    /// Cell of the minimal quantizer containing `z(t_c)`.
    Minimal(MinimalQuantizer),
    /// `z̄ = z(t_c)`.
    Exact,
}

impl CodecMode {
    pub fn bits(&self) -> u32 {
        match self {
            CodecMode::Real { bits } | CodecMode::Complex { bits, .. } => *bits,
            CodecMode::Minimal(q) => q.bits(),
            CodecMode::Exact => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub plant: PlantConfig,
    pub trig: TriggerConfig,
    pub channel: ChannelModel,
    pub disturbance: DisturbanceModel,
    pub codec: CodecMode,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub x0: Complex64,
    pub xhat0: Complex64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Complex64>,
    pub xhat: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_table(&self, real: bool) -> Table {
        let names = ["x", "xhat", "z", "u", "w"];
        let mut header = vec!["t".to_string()];
        for n in names {
            if real {
                header.push(n.to_string());
            } else {
                header.push(format!("{n}_re"));
                header.push(format!("{n}_im"));
            }
        }
        let mut t = Table::new(header);
        for i in 0..self.len() {
            let mut row = vec![self.times[i]];
            for v in [self.x[i], self.xhat[i], self.z[i], self.u[i], self.w[i]] {
                row.push(v.re);
                if !real {
                    row.push(v.im);
                }
            }
            t.push_nums(&row);
        }
        t
    }
}

/// Per-event record. Entries past `tc_list.len()` were triggered but not
/// yet delivered at the horizon.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventLog {
    pub ts_list: Vec<f64>,
    pub tc_list: Vec<f64>,
    pub delays: Vec<f64>,
    pub packet_bits: Vec<u32>,
    pub z_post_jump: Vec<f64>,
    /// `|z(t_s)|` at each trigger.
    pub z_trigger: Vec<f64>,
    /// `|z(t_c)|` just before each jump.
    pub z_pre_jump: Vec<f64>,
    pub packets: Vec<String>,
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.ts_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts_list.is_empty()
    }

    /// Inter-trigger intervals `t_s^{k+1} - t_s^k`.
    pub fn intervals(&self) -> Vec<f64> {
        self.ts_list.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Realized bits per second, `Σ_{k<N} g_k / (t_s^N - t_s^1)`.
    pub fn rate_bits(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let span = self.ts_list[n - 1] - self.ts_list[0];
        let bits: u64 = self.packet_bits[..n - 1].iter().map(|&g| g as u64).sum();
        bits as f64 / span
    }

    /// Realized triggers per second, `(N-1) / (t_s^N - t_s^1)`.
    pub fn rate_triggers(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        (n - 1) as f64 / (self.ts_list[n - 1] - self.ts_list[0])
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["k", "t_s", "t_c", "delay", "g_bits", "z_post_jump", "packet"]);
        for i in 0..self.len() {
            let get = |v: &Vec<f64>| v.get(i).copied().unwrap_or(f64::NAN);
            t.push(vec![
                i.to_string(),
                fmt_num(self.ts_list[i]),
                fmt_num(get(&self.tc_list)),
                fmt_num(get(&self.delays)),
                self.packet_bits[i].to_string(),
                fmt_num(get(&self.z_post_jump)),
                self.packets[i].clone(),
            ]);
        }
        t
    }
}

/// One post-hoc check. `passed` is `None` when its hypotheses do not hold
/// for this run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: Option<bool>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub events: usize,
    pub receptions: usize,
    pub rate_bits: f64,
    pub rate_triggers: f64,
    pub max_abs_z: f64,
    pub max_abs_x: f64,
    pub max_post_jump: f64,
    pub min_interval: f64,
    pub invariants: Vec<InvariantCheck>,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.invariants.iter().all(|c| c.passed != Some(false))
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.invariants.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub log: EventLog,
    pub summary: RunSummary,
}

/// Number of grid steps covering `[0, T)`.
pub fn grid_steps(horizon: f64, dt: f64) -> usize {
    if horizon <= 0.0 {
        return 0;
    }
    (horizon / dt * (1.0 + 1e-12)).floor() as usize
}

fn decode(spec: &RunSpec, fl: &InFlight, z_tc: Complex64, t_c: f64) -> Result<(DecodedEvent, Option<Packet>), EngineError> {
    let trig = &spec.trig;
    Ok(match &spec.codec {
        CodecMode::Real { .. } => {
            let p = fl.packet.as_ref().expect("real packet");
            let mut d = codec::decode_real(p, t_c, trig.gamma, trig.b)?;
            let zb = codec::reconstruct_zbar_real(&d, t_c, spec.plant.a.re, trig.j);
            d.zbar = Some(Complex64::new(zb, 0.0));
            (d, None)
        }
        CodecMode::Complex { .. } => {
            let p = fl.packet.as_ref().expect("complex packet");
            (codec::decode_complex(p, t_c, trig.gamma, trig.b, spec.plant.a, trig.j)?, None)
        }
        CodecMode::Minimal(q) => {
            let (p, zb) = q.quantize(z_tc.re, fl.k_s as f64 * spec.dt);
            let d = DecodedEvent { q_ts: f64::NAN, heading: codec::Heading::Sign(fl.sign), zbar: Some(Complex64::new(zb, 0.0)) };
            (d, Some(p))
        }
        CodecMode::Exact => (DecodedEvent { q_ts: f64::NAN, heading: codec::Heading::Sign(fl.sign), zbar: Some(z_tc) }, None),
    })
}

fn encode(spec: &RunSpec, z: Complex64, t_s: f64) -> Result<Option<Packet>, EngineError> {
    let trig = &spec.trig;
    Ok(match spec.codec {
        CodecMode::Real { bits } => {
            let sign = Sign::of(z.re);
            Some(if bits <= 1 {
                codec::encode_sign_marker(t_s, sign)
            } else {
                codec::encode_real(t_s, sign, bits as usize, trig.gamma, trig.b)?
            })
        }
        CodecMode::Complex { bits, lambda } => Some(if bits <= lambda {
            codec::encode_phase_marker(t_s, z.arg(), lambda)?
        } else {
            codec::encode_complex(t_s, z.arg(), bits as usize, lambda, trig.gamma, trig.b)?
        }),
        CodecMode::Minimal(_) | CodecMode::Exact => None,
    })
}

/// Runs the closed loop over `[0, T)`. Deterministic in `seed`.
pub fn run(spec: &RunSpec) -> Result<RunOutput, EngineError> {
    if !(spec.dt > 0.0) || !spec.dt.is_finite() {
        return Err(EngineError::Config(format!("grid step must be positive, got {}", spec.dt)));
    }
    if !(spec.horizon >= 0.0) {
        return Err(EngineError::Config(format!("horizon must be non-negative, got {}", spec.horizon)));
    }
    let plant = &spec.plant;
    let trig = &spec.trig;
    let z0 = (spec.x0 - spec.xhat0).norm();
    if z0 >= trig.j {
        return Err(EngineError::InitialError { z0, j: trig.j });
    }
    let n_steps = grid_steps(spec.horizon, spec.dt);
    let prop = Propagator::new(plant.a, spec.dt);
    let mut delays = DelaySampler::new(&spec.channel, trig.gamma, spec.dt)?;
    let mut dist = DisturbanceSampler::new(&spec.disturbance, plant.m, plant.is_real())?;
    let mut rng_channel = ChaCha8Rng::seed_from_u64(spec.seed);
    rng_channel.set_stream(1);
    let mut rng_dist = ChaCha8Rng::seed_from_u64(spec.seed);
    rng_dist.set_stream(2);

    let mut traj = Trajectory::default();
    for v in [&mut traj.x, &mut traj.xhat, &mut traj.z, &mut traj.u, &mut traj.w] {
        v.reserve(n_steps);
    }
    traj.times.reserve(n_steps);
    let mut log = EventLog::default();
    let mut state = SimState::new(plant, spec.x0, spec.xhat0);
    let mut w_sup = 0.0f64;
    let mut max_z = 0.0f64;

    for k in 0..n_steps {
        debug_assert_eq!(state.k, k);
        if let Some(fl) = state.in_flight.clone() {
            if fl.k_c == k {
                state = deliver(spec, &state, &fl, &mut log)?;
            }
        }
        if detect_trigger(&state, trig) {
            let t_s = state.t;
            let z = state.z();
            let packet = encode(spec, z, t_s)?;
            let d = delays.next_steps(&mut rng_channel) as usize;
            log.ts_list.push(t_s);
            log.z_trigger.push(z.norm());
            log.packet_bits.push(match &packet {
                Some(p) => p.g() as u32,
                None => spec.codec.bits(),
            });
            log.packets.push(packet.as_ref().map(|p| p.to_hex()).unwrap_or_default());
            if log.len() > n_steps {
                return Err(EngineError::Zeno { events: log.len(), limit: n_steps });
            }
            let fl = InFlight { packet, sign: Sign::of(z.re), k_s: k, k_c: k + d };
            state.in_flight = Some(fl.clone());
            if d == 0 {
                state = deliver(spec, &state, &fl, &mut log)?;
            }
        }
        state.u = -plant.k * state.xhat_ctrl;
        let z = state.z();
        let w = dist.sample(k, state.t, z, &mut rng_dist);
        w_sup = w_sup.max(w.norm());
        max_z = max_z.max(z.norm());
        traj.times.push(state.t);
        traj.x.push(state.x);
        traj.xhat.push(state.xhat_ctrl);
        traj.z.push(z);
        traj.u.push(state.u);
        traj.w.push(w);
        state = step(&state, plant, &prop, w);
    }

    let summary = summarize(spec, &traj, &log, max_z, w_sup);
    Ok(RunOutput { trajectory: traj, log, summary })
}

fn deliver(spec: &RunSpec, state: &SimState, fl: &InFlight, log: &mut EventLog) -> Result<SimState, EngineError> {
    let t_c = state.t;
    let z_tc = state.z();
    let (dec, late_packet) = decode(spec, fl, z_tc, t_c)?;
    let (s, post) = on_reception(state, &spec.plant, &dec);
    if let Some(p) = late_packet {
        let i = log.tc_list.len();
        log.packet_bits[i] = p.g() as u32;
        log.packets[i] = p.to_hex();
    }
    log.tc_list.push(t_c);
    log.delays.push(t_c - fl.k_s as f64 * spec.dt);
    log.z_pre_jump.push(z_tc.norm());
    log.z_post_jump.push(post);
    Ok(s)
}

fn summarize(spec: &RunSpec, traj: &Trajectory, log: &EventLog, max_z: f64, w_sup: f64) -> RunSummary {
    let plant = &spec.plant;
    let trig = &spec.trig;
    let a = plant.growth_rate();
    let dt = spec.dt;
    let m = plant.m;
    let intervals = log.intervals();
    let min_interval = intervals.iter().copied().fold(f64::INFINITY, f64::min);
    let max_post = log.z_post_jump.iter().copied().fold(0.0, f64::max);
    let max_x = traj.x.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut checks = Vec::new();

    let coded = matches!(spec.codec, CodecMode::Real { .. } | CodecMode::Complex { .. });
    let contract_bound = trig.rho0 * trig.j * (a * dt).exp();
    let contract_ok = max_post <= contract_bound;
    checks.push(InvariantCheck {
        name: "jump_contract",
        passed: coded.then_some(contract_ok),
        value: max_post,
        bound: contract_bound,
    });

    let z0 = (spec.x0 - spec.xhat0).norm();
    let inside = z0 < trig.j && max_post <= trig.j * (a * dt).exp();
    let peak = error_peak_bound(a, m, trig.j, trig.gamma + dt);
    checks.push(InvariantCheck {
        name: "error_peak",
        passed: (inside && a > 0.0).then_some(max_z <= peak),
        value: max_z,
        bound: peak,
    });

    let min_bound = min_trigger_interval(a, m, trig.j, trig.rho0) - 2.0 * dt;
    let contracted = contract_ok && a > 0.0;
    checks.push(InvariantCheck {
        name: "min_interval",
        passed: (contracted && !intervals.is_empty()).then_some(min_interval >= min_bound),
        value: min_interval,
        bound: min_bound,
    });

    let rate = log.rate_bits();
    let per_event = min_trigger_interval(a, m, trig.j, trig.rho0) - 2.0 * dt;
    let rate_bound = if per_event > 0.0 { spec.codec.bits() as f64 / per_event } else { f64::INFINITY };
    checks.push(InvariantCheck {
        name: "rate_bits",
        passed: (contracted && coded && log.len() >= 2).then_some(rate <= rate_bound),
        value: rate,
        bound: rate_bound,
    });
    let nominal = bounds::trig_rate_upper(a, m, trig.j, trig.rho0) * spec.codec.bits() as f64;
    checks.push(InvariantCheck {
        name: "rate_bits_nominal",
        passed: None,
        value: rate,
        bound: nominal,
    });

    let env = IspsEnvelope::new(plant, trig.j).ok();
    let mut env_ok = true;
    let mut worst = f64::NEG_INFINITY;
    if let Some(env) = &env {
        let x0 = spec.x0.norm();
        for (t, x) in traj.times.iter().zip(&traj.x) {
            let b = env.bound(x0, w_sup, trig.gamma + dt, *t);
            worst = worst.max(x.norm() - b);
            env_ok &= x.norm() <= b * (1.0 + 1e-9);
        }
    }
    checks.push(InvariantCheck {
        name: "isps_envelope",
        passed: (env.is_some() && inside && a > 0.0 && !traj.is_empty()).then_some(env_ok),
        value: worst,
        bound: 0.0,
    });

    RunSummary {
        events: log.len(),
        receptions: log.tc_list.len(),
        rate_bits: rate,
        rate_triggers: log.rate_triggers(),
        max_abs_z: max_z,
        max_abs_x: max_x,
        max_post_jump: max_post,
        min_interval,
        invariants: checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn family_spec(seed: u64) -> RunSpec {
        let (a, m, rho0, gamma, b): (f64, f64, f64, f64, f64) = (5.5651, 0.4, 0.1, 0.2, 1.0001);
        let j = m / (a * rho0) * (a * gamma).exp_m1() + 0.1;
        let bits = bounds::practical_bits_real(a, gamma, m, j, rho0, b).unwrap();
        RunSpec {
            plant: PlantConfig::real(a, 1.0, 10.0, m),
            trig: TriggerConfig::new(j, rho0, gamma, b),
            channel: ChannelModel::UniformOnGrid,
            disturbance: DisturbanceModel::Uniform,
            codec: CodecMode::Real { bits },
            dt: 1e-4,
            horizon: 2.0,
            seed,
            x0: c(0.5),
            xhat0: c(0.0),
        }
    }

    #[test]
    fn cexpm1_matches_exp() {
        for w in [Complex64::new(0.3, 2.0), Complex64::new(-1.0, 0.5), Complex64::new(1e-9, 1e-9)] {
            let d = cexpm1(w) - (w.exp() - 1.0);
            assert!(d.norm() < 1e-15 * (1.0 + w.exp().norm()));
        }
        let tiny = Complex64::new(1e-20, 1e-20);
        assert!((cexpm1(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn zero_disturbance_keeps_error_zero() {
        let plant = PlantConfig::complex(Complex64::new(0.7, 1.3), Complex64::new(0.5, -0.2), Complex64::new(4.0, 1.0), 0.0);
        let prop = Propagator::new(plant.a, 1e-3);
        let mut s = SimState::new(&plant, Complex64::new(0.4, -0.1), Complex64::new(0.4, -0.1));
        for _ in 0..1000 {
            s = step(&s, &plant, &prop, Complex64::new(0.0, 0.0));
            assert_eq!(s.z(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn open_loop_matches_exponential() {
        let plant = PlantConfig::real(1.3, 1.0, 0.0, 0.0);
        let prop = Propagator::new(plant.a, 1e-3);
        let mut s = SimState::new(&plant, c(0.25), c(0.0));
        for _ in 0..1000 {
            s = step(&s, &plant, &prop, c(0.0));
        }
        let expected = 0.25 * (1.3f64).exp();
        assert!((s.x.re - expected).abs() < 1e-12 * expected);
        assert_eq!(s.x.im, 0.0);
    }

    #[test]
    fn error_matches_quadrature() {
        // ż = A z + w, w piecewise constant: integrate each step with a
        // midpoint rule on δ'/100 and compare.
        let a = 2.1;
        let dt = 0.01;
        let plant = PlantConfig::real(a, 1.0, 3.0, 1.0);
        let prop = Propagator::new(plant.a, dt);
        let mut s = SimState::new(&plant, c(0.1), c(0.05));
        let mut z = 0.05f64;
        let mut seed = 7u64;
        for _ in 0..200 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let w = ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            s = step(&s, &plant, &prop, c(w));
            let h = dt / 100.0;
            let mut acc = 0.0;
            for i in 0..100 {
                let tau = (i as f64 + 0.5) * h;
                acc += (a * (dt - tau)).exp() * w * h;
            }
            z = (a * dt).exp() * z + acc;
        }
        assert!((s.z().re - z).abs() < 1e-6 * z.abs().max(1.0));
    }

    #[test]
    fn trigger_rules() {
        let plant = PlantConfig::real(1.0, 1.0, 2.0, 0.0);
        let trig = TriggerConfig::new(0.5, 0.5, 0.1, 2.0);
        let mut s = SimState::new(&plant, c(0.5), c(0.0));
        assert!(detect_trigger(&s, &trig));
        s.x = c(1.0);
        s.in_flight = Some(InFlight { packet: None, sign: Sign::Pos, k_s: 0, k_c: 3 });
        assert!(!detect_trigger(&s, &trig));
    }

    #[test]
    fn exact_codec_resets_error() {
        let plant = PlantConfig::real(1.0, 1.0, 2.0, 0.0);
        let s = SimState::new(&plant, c(0.7), c(0.1));
        let d = DecodedEvent { q_ts: 0.0, heading: codec::Heading::Sign(Sign::Pos), zbar: Some(s.z()) };
        let (s2, post) = on_reception(&s, &plant, &d);
        assert_eq!(post, 0.0);
        assert_eq!(s2.xhat_ctrl, s2.xhat_sensor);
    }

    #[test]
    fn quiet_run_converges() {
        let mut spec = family_spec(0);
        spec.disturbance = DisturbanceModel::Zero;
        spec.channel = ChannelModel::Constant { delay: 0.0 };
        spec.codec = CodecMode::Exact;
        spec.plant.m = 0.0;
        spec.x0 = c(1.0);
        spec.xhat0 = c(1.0);
        let out = run(&spec).unwrap();
        assert_eq!(out.log.len(), 0);
        assert!(out.trajectory.x.last().unwrap().norm() < 1e-3);
    }

    #[test]
    fn empty_horizon() {
        let mut spec = family_spec(0);
        spec.horizon = 0.0;
        let out = run(&spec).unwrap();
        assert!(out.trajectory.is_empty());
        assert!(out.log.is_empty());
    }

    #[test]
    fn rejects_large_initial_error() {
        let mut spec = family_spec(0);
        spec.x0 = c(10.0);
        assert!(matches!(run(&spec), Err(EngineError::InitialError { .. })));
    }

    #[test]
    fn family_runs_keep_invariants() {
        for seed in 0..5 {
            let mut spec = family_spec(seed);
            spec.disturbance = DisturbanceModel::ConstantMax { phase: 0.0 };
            spec.horizon = 3.0;
            spec.x0 = c(0.8 * spec.trig.j);
            let out = run(&spec).unwrap();
            assert!(out.log.len() > 5, "seed {seed}: {} events", out.log.len());
            for c in &out.summary.invariants {
                assert_ne!(c.passed, Some(false), "seed {seed}: {c:?}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = run(&family_spec(42)).unwrap();
        let b = run(&family_spec(42)).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn rates_from_log() {
        let log = EventLog {
            ts_list: vec![1.0, 2.0, 4.0],
            packet_bits: vec![3, 5, 7],
            packets: vec![String::new(); 3],
            ..Default::default()
        };
        assert_eq!(log.rate_bits(), 8.0 / 3.0);
        assert_eq!(log.rate_triggers(), 2.0 / 3.0);
        assert_eq!(log.intervals(), vec![1.0, 2.0]);
    }
}
