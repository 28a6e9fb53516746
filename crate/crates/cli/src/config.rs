//! Experiment configuration files (TOML).
//!
//! A file selects one of four modes and supplies the blocks that mode
//! needs; unknown keys anywhere are rejected.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Deserialize;
use tempo_core::model::{growth, ChannelModel, DisturbanceModel, PlantConfig, TriggerConfig};
use tempo_core::vector::{pendulum_initial, VectorPlant, VectorRunConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ScalarReal,
    ScalarComplex,
    Pendulum,
    CustomVector,
}

impl Mode {
    pub fn is_scalar(self) -> bool {
        matches!(self, Mode::ScalarReal | Mode::ScalarComplex)
    }
}

/// Real number or `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl Num {
    pub fn value(self) -> Complex64 {
        match self {
            Num::Real(v) => Complex64::new(v, 0.0),
            Num::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantBlock {
    pub a: Option<Num>,
    pub b: Option<Num>,
    pub k: Option<Num>,
    pub m: f64,
    /// State matrix rows, custom-vector mode only.
    pub matrix: Option<Vec<Vec<f64>>>,
    pub input: Option<Vec<f64>>,
    pub gain: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerBlock {
    pub gamma: f64,
    pub rho0: f64,
    pub b: f64,
    /// Fixed radius. When absent the radius follows `gamma`:
    /// `J = j_scale (M/A)(e^{A gamma} - 1) + j_margin`.
    pub j: Option<f64>,
    pub j_scale: Option<f64>,
    #[serde(default)]
    pub j_margin: f64,
    pub lambda: Option<u32>,
    #[serde(default = "default_chi")]
    pub chi: f64,
    #[serde(default = "default_chi")]
    pub chi_prime: f64,
    /// Packet size override.
    pub bits: Option<u32>,
}

fn default_chi() -> f64 {
    0.125
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub x0: Option<Num>,
    pub xhat0: Option<Num>,
    pub s0: Option<Vec<f64>>,
    pub shat0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default = "default_param")]
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

fn default_param() -> String {
    "gamma".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Seeds averaged per point in vector sweeps.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    pub plant: Option<PlantBlock>,
    pub trigger: Option<TriggerBlock>,
    #[serde(default)]
    pub initial: InitialBlock,
    pub channel: Option<ChannelModel>,
    pub disturbance: Option<DisturbanceModel>,
    pub sweep: Option<Sweep>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_horizon() -> f64 {
    5.0
}

fn default_seeds() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Cart-pendulum defaults.
    pub fn pendulum_default() -> Self {
        Self {
            mode: Mode::Pendulum,
            dt: 0.005,
            horizon: 5.0,
            seed: 1,
            seeds: 1,
            plant: Some(PlantBlock { a: None, b: None, k: None, m: 0.05, matrix: None, input: None, gain: None }),
            trigger: Some(TriggerBlock {
                gamma: 0.1,
                rho0: 0.9,
                b: 1.0001,
                j: None,
                j_scale: None,
                j_margin: 0.005,
                lambda: None,
                chi: 0.125,
                chi_prime: 0.125,
                bits: None,
            }),
            initial: InitialBlock::default(),
            channel: None,
            disturbance: None,
            sweep: None,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |s: String| Err(CliError::Config(s));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be non-negative, got {}", self.horizon));
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if let Some(s) = &self.sweep {
            check_sweep(s)?;
        }
        let plant = self.plant.as_ref();
        let trig = self.trigger.as_ref();
        if plant.is_none() && self.mode != Mode::Pendulum {
            return bad("missing [plant] block".into());
        }
        if trig.is_none() && self.mode != Mode::Pendulum {
            return bad("missing [trigger] block".into());
        }
        if let Some(p) = plant {
            let scalar = p.a.is_some() || p.b.is_some() || p.k.is_some();
            let vector = p.matrix.is_some() || p.input.is_some() || p.gain.is_some();
            match self.mode {
                Mode::ScalarReal | Mode::ScalarComplex => {
                    if vector {
                        return bad("matrix/input/gain apply to custom-vector mode only".into());
                    }
                    if p.a.is_none() || p.b.is_none() || p.k.is_none() {
                        return bad("scalar modes need plant.a, plant.b and plant.k".into());
                    }
                    let complex = [p.a, p.b, p.k].iter().flatten().any(|v| v.value().im != 0.0);
                    if self.mode == Mode::ScalarReal && complex {
                        return bad("scalar-real mode needs real plant gains".into());
                    }
                }
                Mode::Pendulum => {
                    if scalar || vector {
                        return bad("pendulum mode fixes the plant; only plant.m may be set".into());
                    }
                }
                Mode::CustomVector => {
                    if scalar {
                        return bad("custom-vector mode takes plant.matrix, plant.input and plant.gain".into());
                    }
                    if !(p.matrix.is_some() && p.input.is_some() && p.gain.is_some()) {
                        return bad("custom-vector mode needs plant.matrix, plant.input and plant.gain".into());
                    }
                }
            }
        }
        if let Some(t) = trig {
            if !self.mode.is_scalar() && (t.j.is_some() || t.j_scale.is_some()) {
                return bad("vector modes derive one radius per mode; use trigger.j_margin".into());
            }
            if t.j.is_some() && t.j_scale.is_some() {
                return bad("trigger.j and trigger.j_scale are exclusive".into());
            }
        }
        let init = &self.initial;
        if self.mode.is_scalar() && (init.s0.is_some() || init.shat0.is_some()) {
            return bad("initial.s0/shat0 apply to vector modes only".into());
        }
        if !self.mode.is_scalar() && (init.x0.is_some() || init.xhat0.is_some()) {
            return bad("initial.x0/xhat0 apply to scalar modes only".into());
        }
        Ok(())
    }

    fn trigger_block(&self) -> TriggerBlock {
        self.trigger.clone().unwrap_or_else(|| Self::pendulum_default().trigger.unwrap())
    }

    pub fn gamma(&self) -> f64 {
        self.trigger_block().gamma
    }

    pub fn disturbance_bound(&self) -> f64 {
        self.plant.as_ref().map(|p| p.m).unwrap_or(0.05)
    }

    pub fn channel(&self) -> ChannelModel {
        self.channel.clone().unwrap_or(ChannelModel::UniformOnGrid)
    }

    pub fn disturbance(&self) -> DisturbanceModel {
        self.disturbance.clone().unwrap_or(DisturbanceModel::Uniform)
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut c = self.clone();
        let mut t = self.trigger_block();
        t.gamma = gamma;
        c.trigger = Some(t);
        c
    }

    pub fn scalar_plant(&self) -> Result<PlantConfig, CliError> {
        let p = self.plant.as_ref().ok_or_else(|| CliError::Config("missing [plant] block".into()))?;
        let (a, b, k) = match (p.a, p.b, p.k) {
            (Some(a), Some(b), Some(k)) => (a.value(), b.value(), k.value()),
            _ => return Err(CliError::Config("scalar modes need plant.a, plant.b and plant.k".into())),
        };
        if self.mode == Mode::ScalarReal && (a.im != 0.0 || b.im != 0.0 || k.im != 0.0) {
            return Err(CliError::Config("scalar-real mode needs real plant gains".into()));
        }
        Ok(PlantConfig::complex(a, b, k, p.m))
    }

    /// Radius at the configured delay bound.
    pub fn radius(&self, plant: &PlantConfig) -> f64 {
        let t = self.trigger_block();
        if let Some(j) = t.j {
            return j;
        }
        let scale = t.j_scale.unwrap_or(match self.mode {
            Mode::ScalarComplex => 1.0 / t.chi,
            _ => 1.0 / t.rho0,
        });
        let a = plant.growth_rate();
        scale * plant.m * growth(a, t.gamma) + t.j_margin
    }

    pub fn trigger_config(&self, plant: &PlantConfig) -> TriggerConfig {
        let t = self.trigger_block();
        let trig = TriggerConfig::new(self.radius(plant), t.rho0, t.gamma, t.b);
        match t.lambda {
            Some(l) => trig.with_lambda(l),
            None => trig,
        }
    }

    pub fn trigger(&self) -> TriggerBlock {
        self.trigger_block()
    }

    pub fn initial_scalar(&self, j: f64) -> (Complex64, Complex64) {
        let x0 = self.initial.x0.map(Num::value).unwrap_or(Complex64::new(0.5 * j, 0.0));
        let xhat0 = self.initial.xhat0.map(Num::value).unwrap_or(x0);
        (x0, xhat0)
    }

    pub fn vector_plant(&self) -> Result<VectorPlant, CliError> {
        let m = self.disturbance_bound();
        match self.mode {
            Mode::Pendulum => Ok(VectorPlant::pendulum(m)),
            Mode::CustomVector => {
                let p = self.plant.as_ref().expect("checked");
                let rows = p.matrix.as_ref().expect("checked");
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Config("plant.matrix must be square and non-empty".into()));
                }
                let a = nalgebra_matrix(rows);
                let b = DVector::from_vec(p.input.clone().expect("checked"));
                let k = DVector::from_vec(p.gain.clone().expect("checked"));
                VectorPlant::new(a, b, k, m).map_err(|e| CliError::Domain(e.to_string()))
            }
            _ => Err(CliError::Config("not a vector mode".into())),
        }
    }

    pub fn vector_run_config(&self, n: usize) -> Result<VectorRunConfig, CliError> {
        let t = self.trigger_block();
        let mut cfg = VectorRunConfig::pendulum(t.gamma, self.seed);
        cfg.rho0 = t.rho0;
        cfg.b = t.b;
        cfg.dt = self.dt;
        cfg.horizon = self.horizon;
        cfg.j_margin = t.j_margin;
        cfg.chi = t.chi;
        cfg.chi_prime = t.chi_prime;
        cfg.lambda = t.lambda;
        cfg.bits = t.bits;
        cfg.channel = self.channel();
        cfg.disturbance = self.disturbance();
        let (s0, shat0) = match self.mode {
            Mode::Pendulum => pendulum_initial(),
            _ => (DVector::from_vec(vec![0.0; n]), DVector::from_vec(vec![0.0; n])),
        };
        let pick = |v: &Option<Vec<f64>>, d: DVector<f64>| -> Result<_, CliError> {
            match v {
                Some(v) if v.len() != n => Err(CliError::Config(format!("initial state needs {n} entries, got {}", v.len()))),
                Some(v) => Ok(DVector::from_vec(v.clone())),
                None => Ok(d),
            }
        };
        cfg.s0 = pick(&self.initial.s0, s0)?;
        cfg.shat0 = pick(&self.initial.shat0, shat0)?;
        Ok(cfg)
    }
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn check_sweep(s: &Sweep) -> Result<(), CliError> {
    if s.param != "gamma" {
        return Err(CliError::Config(format!("only gamma sweeps are supported, got {:?}", s.param)));
    }
    if s.points == 0 || !(s.lo.is_finite() && s.hi.is_finite()) || s.lo < 0.0 || s.hi < s.lo {
        return Err(CliError::Config(format!("bad sweep range {}..{} with {} points", s.lo, s.hi, s.points)));
    }
    Ok(())
}

/// Parses `gamma:lo:hi:n`.
pub fn parse_sweep(spec: &str) -> Result<Sweep, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let err = || CliError::Config(format!("sweep must look like gamma:lo:hi:n, got {spec:?}"));
    if parts.len() != 4 {
        return Err(err());
    }
    let s = Sweep {
        param: parts[0].to_string(),
        lo: parts[1].parse().map_err(|_| err())?,
        hi: parts[2].parse().map_err(|_| err())?,
        points: parts[3].parse().map_err(|_| err())?,
    };
    check_sweep(&s)?;
    Ok(s)
}

impl Sweep {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let n = (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n).collect()
    }
}
