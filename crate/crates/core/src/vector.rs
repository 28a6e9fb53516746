//! Modal decomposition of diagonalizable vector plants.
//!
//! `ṡ = A s + B u + w` with `A = P Λ P⁻¹` becomes independent scalar modes
//! `s̃ = P⁻¹ s`. Unstable modes each get their own trigger and codec;
//! stable modes run the open-loop estimator and never transmit. The input
//! `u = -K P ŝ` is built from the estimates of every mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundsError, RateReport};
use crate::codec::{self, CodecError, Sign};
use crate::engine::{EventLog, Propagator};
use crate::model::{
    error_peak_bound, growth, max_grid_steps, ChannelModel, DelaySampler, DisturbanceModel,
    DisturbanceSampler, ModelError,
};
use crate::table::Table;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("matrix dimensions do not match: {0}")]
    Shape(String),
    #[error("eigenvector matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("eigenvector matrix is singular")]
    Singular,
    #[error("closed loop is not Hurwitz: max real eigenvalue {0}")]
    NotHurwitz(f64),
    #[error("delay bound {gamma} is below two sampling times ({floor})")]
    GammaBelowFloor { gamma: f64, floor: f64 },
    #[error("initial estimation error {z0} of mode {mode} must be below its radius {j}")]
    InitialError { mode: usize, z0: f64, j: f64 },
    #[error("mode {mode}: {source}")]
    Bounds { mode: usize, source: BoundsError },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Result<T> = std::result::Result<T, VectorError>;

const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorPlant {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub k: DVector<f64>,
    /// Bound on every coordinate of the physical disturbance.
    pub m: f64,
}

impl VectorPlant {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, k: DVector<f64>, m: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || k.len() != n || n == 0 {
            return Err(VectorError::Shape(format!(
                "A is {}x{}, B has {}, K has {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                k.len()
            )));
        }
        Ok(Self { a, b, k, m })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Linearized cart-pendulum with its stabilizing gain.
    pub fn pendulum(m: f64) -> Self {
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(4, 4, &[
            0.0, 1.0, 0.0, 0.0,
            0.0, -0.1818, 2.6730, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, -0.4545, 31.1800, 0.0,
        ]);
        let b = DVector::from_vec(vec![0.0, 1.8180, 0.0, 4.5450]);
        let k = DVector::from_vec(vec![-1.00, -2.04, 20.36, 3.93]);
        Self { a, b, k, m }
    }

    pub fn closed_loop(&self) -> DMatrix<f64> {
        &self.a - &self.b * self.k.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    /// Column of `P` holding this mode.
    pub index: usize,
    pub eigenvalue: Complex64,
    pub b_tilde: Complex64,
    pub k_tilde: Complex64,
    pub m_tilde: f64,
    pub stable: bool,
    /// Column of the conjugate partner, for complex pairs.
    pub partner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalDecomposition {
    pub p: DMatrix<Complex64>,
    pub p_inv: DMatrix<Complex64>,
    /// All eigenvalues in column order of `P`.
    pub eigenvalues: Vec<Complex64>,
    /// One entry per real eigenvalue or conjugate pair.
    pub modes: Vec<Mode>,
    pub condition: f64,
}

impl ModalDecomposition {
    pub fn unstable(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| !m.stable)
    }

    /// `‖P Λ P⁻¹ - A‖_max / ‖A‖_max`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let lam = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        let rec = &self.p * lam * &self.p_inv;
        let scale = a.amax().max(1e-300);
        let mut worst = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                worst = worst.max((rec[(i, j)] - Complex64::new(a[(i, j)], 0.0)).norm());
            }
        }
        worst / scale
    }

    pub fn to_modal(&self, s: &DVector<f64>) -> DVector<Complex64> {
        &self.p_inv * s.map(|v| Complex64::new(v, 0.0))
    }

    pub fn to_physical(&self, st: &DVector<Complex64>) -> DVector<f64> {
        (&self.p * st).map(|v| v.re)
    }
}

fn null_vector(m: DMatrix<Complex64>) -> DVector<Complex64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(i).transpose().map(|c| c.conj())
}

/// Eigen-decomposition with unit columns whose largest entry is real and
/// positive, ordered by descending real part.
pub fn decompose(plant: &VectorPlant) -> Result<ModalDecomposition> {
    let n = plant.dim();
    let mut eig: Vec<Complex64> = plant.a.complex_eigenvalues().iter().copied().collect();
    let scale = plant.a.amax().max(1.0);
    // snap numerically real eigenvalues
    for e in &mut eig {
        if e.im.abs() <= 1e-12 * scale {
            e.im = 0.0;
        }
    }
    eig.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));

    let ac = plant.a.map(|v| Complex64::new(v, 0.0));
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for c in 0..n {
        let lam = eig[c];
        if lam.im < 0.0 && c > 0 && (eig[c - 1].conj() - lam).norm() <= 1e-9 * scale {
            // keep pairs exactly conjugate so modal coordinates stay conjugate
            eig[c] = eig[c - 1].conj();
            let v = p.column(c - 1).map(|x| x.conj());
            p.set_column(c, &v);
            continue;
        }
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * lam;
        let mut v = null_vector(shifted);
        v /= Complex64::new(v.norm(), 0.0);
        let big = v.iter().copied().fold(Complex64::new(0.0, 0.0), |acc, x| if x.norm() > acc.norm() { x } else { acc });
        v *= big.conj() / big.norm();
        p.set_column(c, &v);
    }
    let sv = p.clone().svd(false, false).singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(VectorError::IllConditioned(condition));
    }
    let p_inv = p.clone().try_inverse().ok_or(VectorError::Singular)?;

    let bc = plant.b.map(|v| Complex64::new(v, 0.0));
    let kc = plant.k.map(|v| Complex64::new(v, 0.0));
    let b_t = &p_inv * bc;
    let k_t = (kc.transpose() * &p).transpose();
    let mut modes = Vec::new();
    for (c, &lam) in eig.iter().enumerate() {
        if lam.im < 0.0 {
            continue;
        }
        let partner = (lam.im > 0.0)
            .then(|| eig.iter().enumerate().filter(|(_, e)| e.im < 0.0).min_by(|a, b| (*a.1 - lam.conj()).norm().total_cmp(&(*b.1 - lam.conj()).norm())).map(|(i, _)| i))
            .flatten();
        let row_l1: f64 = p_inv.row(c).iter().map(|v| v.norm()).sum();
        modes.push(Mode {
            index: c,
            eigenvalue: lam,
            b_tilde: b_t[c],
            k_tilde: k_t[c],
            m_tilde: row_l1 * plant.m,
            stable: lam.re <= 0.0,
            partner,
        });
    }
    Ok(ModalDecomposition { p, p_inv, eigenvalues: eig, modes, condition })
}

/// Trigger and codec settings for one transmitting mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeDesign {
    pub mode: Mode,
    pub j: f64,
    pub bits: u32,
    /// Phase bits; 0 for a real mode.
    pub lambda: u32,
    pub report: RateReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorRunConfig {
    pub gamma: f64,
    pub rho0: f64,
    pub b: f64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Added to the smallest admissible radius of each mode.
    pub j_margin: f64,
    pub chi: f64,
    pub chi_prime: f64,
    /// Phase bits for complex modes; `None` picks the smallest admissible.
    pub lambda: Option<u32>,
    /// Packet size for every mode instead of the computed one.
    pub bits: Option<u32>,
    pub channel: ChannelModel,
    /// Applied independently to every physical coordinate.
    pub disturbance: DisturbanceModel,
    pub s0: DVector<f64>,
    pub shat0: DVector<f64>,
}

impl VectorRunConfig {
    /// Defaults of the cart-pendulum study at delay bound `γ`.
    pub fn pendulum(gamma: f64, seed: u64) -> Self {
        Self {
            gamma,
            rho0: 0.9,
            b: 1.0001,
            dt: 0.005,
            horizon: 5.0,
            seed,
            j_margin: 0.005,
            chi: 0.125,
            chi_prime: 0.125,
            lambda: None,
            bits: None,
            channel: ChannelModel::UniformOnGrid,
            disturbance: DisturbanceModel::Uniform,
            s0: DVector::zeros(4),
            shat0: DVector::zeros(4),
        }
    }
}

/// Radius and packet size for each unstable mode.
pub fn design(dec: &ModalDecomposition, cfg: &VectorRunConfig) -> Result<Vec<ModeDesign>> {
    let mut out = Vec::new();
    for mode in dec.unstable() {
        let lam = mode.eigenvalue;
        let m = mode.m_tilde;
        let err = |source| VectorError::Bounds { mode: mode.index, source };
        if lam.im == 0.0 {
            let a = lam.re;
            let j = m * growth(a, cfg.gamma) / cfg.rho0 + cfg.j_margin;
            let bits = match cfg.bits {
                Some(b) => b,
                None => bounds::practical_bits_real(a, cfg.gamma, m, j, cfg.rho0, cfg.b).map_err(err)?,
            };
            let report = RateReport::real(a, cfg.gamma, m, j, cfg.rho0, cfg.b);
            out.push(ModeDesign { mode: *mode, j, bits, lambda: 0, report });
        } else {
            let a = lam.re;
            let j = m / cfg.chi * growth(a, cfg.gamma) + cfg.j_margin;
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => bounds::auto_lambda(a, cfg.gamma, cfg.chi, cfg.chi_prime)
                    .ok_or_else(|| err(BoundsError::Degenerate("no admissible phase bits")))?,
            };
            let c = bounds::sufficient_bits_complex(lam, cfg.gamma, m, j, cfg.rho0, cfg.b, lambda, cfg.chi, cfg.chi_prime)
                .map_err(err)?;
            let bits = cfg.bits.unwrap_or(c.practical_bits).max(lambda);
            let report = RateReport::complex(lam, cfg.gamma, m, j, cfg.rho0, cfg.b, lambda, cfg.chi, cfg.chi_prime);
            out.push(ModeDesign { mode: *mode, j, bits, lambda, report });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub index: usize,
    pub eigenvalue: [f64; 2],
    pub j: f64,
    pub bits: u32,
    pub lambda: u32,
    pub m_tilde: f64,
    pub events: usize,
    pub rate_bits: f64,
    pub rate_triggers: f64,
    pub max_abs_z: f64,
    pub max_post_jump: f64,
    pub min_interval: f64,
    pub error_peak_bound: f64,
    pub error_peak_ok: bool,
    pub jump_contract_bound: f64,
    pub jump_contract_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorSummary {
    pub max_abs_state: f64,
    pub modes: Vec<ModeSummary>,
    /// Stable modes whose estimation error left its disturbance envelope.
    pub stable_envelope_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorOutput {
    pub times: Vec<f64>,
    pub s: Vec<Vec<f64>>,
    pub shat: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    /// Modal estimation error of every mode, `[time][column of P]`.
    pub z: Vec<Vec<Complex64>>,
    pub designs: Vec<ModeDesign>,
    pub logs: Vec<EventLog>,
    pub summary: VectorSummary,
}

impl VectorOutput {
    pub fn trajectory_table(&self) -> Table {
        let n = self.s.first().map(|v| v.len()).unwrap_or(0);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("s{i}")));
        header.extend((1..=n).map(|i| format!("shat{i}")));
        for d in &self.designs {
            let i = d.mode.index + 1;
            if d.lambda == 0 {
                header.push(format!("z{i}"));
            } else {
                header.push(format!("z{i}_re"));
                header.push(format!("z{i}_im"));
            }
        }
        header.push("u".into());
        let mut t = Table::new(header);
        for k in 0..self.times.len() {
            let mut row = vec![self.times[k]];
            row.extend(&self.s[k]);
            row.extend(&self.shat[k]);
            for d in &self.designs {
                let z = self.z[k][d.mode.index];
                row.push(z.re);
                if d.lambda != 0 {
                    row.push(z.im);
                }
            }
            row.push(self.u[k]);
            t.push_nums(&row);
        }
        t
    }
}

struct Channel {
    design: ModeDesign,
    sampler: DelaySampler,
    rng: ChaCha8Rng,
    in_flight: Option<(codec::Packet, usize, usize)>,
    log: EventLog,
}

/// Runs the modal closed loop. Stable modes never transmit.
pub fn run_vector(plant: &VectorPlant, cfg: &VectorRunConfig) -> Result<VectorOutput> {
    let n = plant.dim();
    if cfg.s0.len() != n || cfg.shat0.len() != n {
        return Err(VectorError::Shape("initial conditions".into()));
    }
    let cl = plant.closed_loop().complex_eigenvalues();
    let worst = cl.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if worst >= 0.0 {
        return Err(VectorError::NotHurwitz(worst));
    }
    let dec = decompose(plant)?;
    let designs = design(&dec, cfg)?;
    let n_steps = crate::engine::grid_steps(cfg.horizon, cfg.dt);
    let props: Vec<Propagator> = dec.eigenvalues.iter().map(|&l| Propagator::new(l, cfg.dt)).collect();
    let bt: Vec<Complex64> = (0..n).map(|i| (&dec.p_inv * plant.b.map(|v| Complex64::new(v, 0.0)))[i]).collect();
    let kt: Vec<Complex64> = (plant.k.map(|v| Complex64::new(v, 0.0)).transpose() * &dec.p).iter().copied().collect();

    let mut st = dec.to_modal(&cfg.s0);
    let mut sh = dec.to_modal(&cfg.shat0);
    let mut channels = Vec::new();
    for (i, d) in designs.iter().enumerate() {
        let z0 = (st[d.mode.index] - sh[d.mode.index]).norm();
        if z0 >= d.j {
            return Err(VectorError::InitialError { mode: d.mode.index, z0, j: d.j });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(10 + i as u64);
        channels.push(Channel {
            design: *d,
            sampler: DelaySampler::new(&cfg.channel, cfg.gamma, cfg.dt)?,
            rng,
            in_flight: None,
            log: EventLog::default(),
        });
    }
    let mut dists: Vec<DisturbanceSampler> = (0..n)
        .map(|_| DisturbanceSampler::new(&cfg.disturbance, plant.m, true))
        .collect::<std::result::Result<_, _>>()?;
    let mut rng_w = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng_w.set_stream(2);

    let mut out = VectorOutput {
        times: Vec::with_capacity(n_steps),
        s: Vec::with_capacity(n_steps),
        shat: Vec::with_capacity(n_steps),
        u: Vec::with_capacity(n_steps),
        z: Vec::with_capacity(n_steps),
        designs: designs.clone(),
        logs: Vec::new(),
        summary: VectorSummary { max_abs_state: 0.0, modes: Vec::new(), stable_envelope_ok: true },
    };
    let z_init: Vec<Complex64> = (0..n).map(|i| st[i] - sh[i]).collect();
    let stable_envelope = |i: usize, t: f64| -> f64 {
        let mode = dec.modes.iter().find(|m| m.index == i || m.partner == Some(i)).expect("mode");
        let re = dec.eigenvalues[i].re;
        z_init[i].norm() * (re * t).exp() + mode.m_tilde * growth(re, t)
    };

    for k in 0..n_steps {
        let t = k as f64 * cfg.dt;
        for ch in channels.iter_mut() {
            let idx = ch.design.mode.index;
            if let Some((p, ks, kc)) = &ch.in_flight {
                if *kc == k {
                    let jump = reconstruct(&ch.design, p, t, cfg)?;
                    apply_jump(&mut sh, &ch.design.mode, jump);
                    let post = (st[idx] - sh[idx]).norm();
                    ch.log.tc_list.push(t);
                    ch.log.delays.push(t - *ks as f64 * cfg.dt);
                    ch.log.z_pre_jump.push((st[idx] - sh[idx] + jump).norm());
                    ch.log.z_post_jump.push(post);
                    ch.in_flight = None;
                }
            }
            let z = st[idx] - sh[idx];
            if ch.in_flight.is_none() && z.norm() >= ch.design.j {
                let p = encode(&ch.design, z, t, cfg)?;
                let d = ch.sampler.next_steps(&mut ch.rng) as usize;
                ch.log.ts_list.push(t);
                ch.log.z_trigger.push(z.norm());
                ch.log.packet_bits.push(p.g() as u32);
                ch.log.packets.push(p.to_hex());
                if d == 0 {
                    let jump = reconstruct(&ch.design, &p, t, cfg)?;
                    apply_jump(&mut sh, &ch.design.mode, jump);
                    ch.log.tc_list.push(t);
                    ch.log.delays.push(0.0);
                    ch.log.z_pre_jump.push(z.norm());
                    ch.log.z_post_jump.push((st[idx] - sh[idx]).norm());
                } else {
                    ch.in_flight = Some((p, k, k + d));
                }
            }
        }
        let u = -(0..n).map(|i| kt[i] * sh[i]).sum::<Complex64>().re;
        let w_phys = DVector::from_iterator(n, dists.iter_mut().map(|d| d.sample(k, t, Complex64::new(0.0, 0.0), &mut rng_w).re));
        let wt = dec.to_modal(&w_phys);

        let s_phys = dec.to_physical(&st);
        out.summary.max_abs_state = out.summary.max_abs_state.max(s_phys.amax());
        out.times.push(t);
        out.s.push(s_phys.iter().copied().collect());
        out.shat.push(dec.to_physical(&sh).iter().copied().collect());
        out.u.push(u);
        let zs: Vec<Complex64> = (0..n).map(|i| st[i] - sh[i]).collect();
        for (i, z) in zs.iter().enumerate() {
            if dec.eigenvalues[i].re <= 0.0 && z.norm() > stable_envelope(i, t) * (1.0 + 1e-9) + 1e-12 {
                out.summary.stable_envelope_ok = false;
            }
        }
        out.z.push(zs);

        let uc = Complex64::new(u, 0.0);
        for i in 0..n {
            st[i] = props[i].apply(st[i], bt[i] * uc + wt[i]);
            sh[i] = props[i].apply(sh[i], bt[i] * uc);
        }
    }

    for ch in channels {
        let d = ch.design;
        let a = d.mode.eigenvalue.re;
        let idx = d.mode.index;
        let max_z = out.z.iter().map(|z| z[idx].norm()).fold(0.0, f64::max);
        let max_post = ch.log.z_post_jump.iter().copied().fold(0.0, f64::max);
        let peak = error_peak_bound(a, d.mode.m_tilde, d.j, cfg.gamma + cfg.dt);
        let contract = cfg.rho0 * d.j * (a * cfg.dt).exp();
        out.summary.modes.push(ModeSummary {
            index: idx,
            eigenvalue: [d.mode.eigenvalue.re, d.mode.eigenvalue.im],
            j: d.j,
            bits: d.bits,
            lambda: d.lambda,
            m_tilde: d.mode.m_tilde,
            events: ch.log.len(),
            rate_bits: ch.log.rate_bits(),
            rate_triggers: ch.log.rate_triggers(),
            max_abs_z: max_z,
            max_post_jump: max_post,
            min_interval: ch.log.intervals().into_iter().fold(f64::INFINITY, f64::min),
            error_peak_bound: peak,
            error_peak_ok: max_z <= peak,
            jump_contract_bound: contract,
            jump_contract_ok: max_post <= contract,
        });
        out.logs.push(ch.log);
    }
    Ok(out)
}

fn encode(d: &ModeDesign, z: Complex64, t: f64, cfg: &VectorRunConfig) -> Result<codec::Packet> {
    Ok(if d.lambda == 0 {
        let sign = Sign::of(z.re);
        if d.bits <= 1 {
            codec::encode_sign_marker(t, sign)
        } else {
            codec::encode_real(t, sign, d.bits as usize, cfg.gamma, cfg.b)?
        }
    } else if d.bits <= d.lambda {
        codec::encode_phase_marker(t, z.arg(), d.lambda)?
    } else {
        codec::encode_complex(t, z.arg(), d.bits as usize, d.lambda, cfg.gamma, cfg.b)?
    })
}

fn reconstruct(d: &ModeDesign, p: &codec::Packet, t_c: f64, cfg: &VectorRunConfig) -> Result<Complex64> {
    let lam = d.mode.eigenvalue;
    Ok(if d.lambda == 0 {
        let dec = codec::decode_real(p, t_c, cfg.gamma, cfg.b)?;
        Complex64::new(codec::reconstruct_zbar_real(&dec, t_c, lam.re, d.j), 0.0)
    } else {
        codec::decode_complex(p, t_c, cfg.gamma, cfg.b, lam, d.j)?.zbar.unwrap_or_default()
    })
}

fn apply_jump(sh: &mut DVector<Complex64>, mode: &Mode, jump: Complex64) {
    sh[mode.index] += jump;
    if let Some(p) = mode.partner {
        sh[p] += jump.conj();
    }
}

/// Cart-pendulum run and the packet sizes from both disturbance bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumOutput {
    pub run: VectorOutput,
    /// Packet size from the modal bound `M̃₄`.
    pub bits_modal: u32,
    /// Packet size with the physical `M` used directly.
    pub bits_raw: Option<u32>,
    pub report: RateReport,
}

/// Default initial conditions: `s(0) = [0,0,0,0.1001]`, `ŝ(0) = [0,0,0,0.10]`.
pub fn pendulum_initial() -> (DVector<f64>, DVector<f64>) {
    (DVector::from_vec(vec![0.0, 0.0, 0.0, 0.1001]), DVector::from_vec(vec![0.0, 0.0, 0.0, 0.10]))
}

pub fn run_pendulum(gamma: f64, m: f64, rho0: f64, b: f64, dt: f64, horizon: f64, seed: u64) -> Result<PendulumOutput> {
    let mut cfg = VectorRunConfig::pendulum(gamma, seed);
    cfg.rho0 = rho0;
    cfg.b = b;
    cfg.dt = dt;
    cfg.horizon = horizon;
    let (s0, shat0) = pendulum_initial();
    cfg.s0 = s0;
    cfg.shat0 = shat0;
    run_pendulum_with(&cfg, m)
}

pub fn run_pendulum_with(cfg: &VectorRunConfig, m: f64) -> Result<PendulumOutput> {
    let floor = 2.0 * cfg.dt;
    if max_grid_steps(cfg.gamma, cfg.dt) < 2 {
        return Err(VectorError::GammaBelowFloor { gamma: cfg.gamma, floor });
    }
    let plant = VectorPlant::pendulum(m);
    let run = run_vector(&plant, cfg)?;
    let d = run.designs.first().copied().ok_or(VectorError::Shape("no unstable mode".into()))?;
    let a = d.mode.eigenvalue.re;
    let j_raw = m * growth(a, cfg.gamma) / cfg.rho0 + cfg.j_margin;
    let bits_raw = bounds::practical_bits_real(a, cfg.gamma, m, j_raw, cfg.rho0, cfg.b).ok();
    Ok(PendulumOutput { bits_modal: d.bits, bits_raw, report: d.report, run })
}
