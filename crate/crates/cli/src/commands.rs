//! The four subcommands. Each takes a validated config and an output
//! directory, computes everything in memory and then writes its files.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use tempo_core::adversary;
use tempo_core::bounds::{self, RateReport};
use tempo_core::engine::{self, CodecMode, EventLog, RunOutput, RunSpec, RunSummary};
use tempo_core::model::{validate_config, PlantConfig, TriggerConfig, ValidationMode, Violation};
use tempo_core::table::{fmt_num, Table};
use tempo_core::vector::{self, ModeDesign, VectorOutput, VectorSummary};

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;
use crate::output::{write_json, write_table};

/// Reference packet size of the cart-pendulum study.
pub const REFERENCE_BITS: u32 = 4;

pub const BOUNDS_COLUMNS: [&str; 11] = [
    "gamma",
    "suff_bits",
    "practical_bits",
    "suff_rate",
    "nec_bits",
    "nec_rate_general",
    "nec_rate_restricted",
    "trig_upper",
    "trig_lower_restricted",
    "beta",
    "datarate",
];

fn fatal(v: &Violation) -> bool {
    !matches!(
        v,
        Violation::RadiusTooSmall { .. } | Violation::DisturbanceExceedsGrowth { .. }
    )
}

fn domain_check(plant: &PlantConfig, trig: &TriggerConfig, complex: bool) -> Result<(), CliError> {
    let mode = if complex {
        ValidationMode::SufficientComplex { chi: 0.0, chi_prime: 0.0, zeta: 0.0 }
    } else {
        ValidationMode::SufficientReal
    };
    let bad: Vec<String> = validate_config(plant, trig, mode)
        .iter()
        .filter(|v| if complex { basic(v) } else { fatal(v) })
        .map(|v| v.to_string())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(bad.join("; ")))
    }
}

fn basic(v: &Violation) -> bool {
    matches!(
        v,
        Violation::NonPositiveGrowth(_)
            | Violation::NegativeGrowth(_)
            | Violation::ZeroInputGain
            | Violation::UnstableClosedLoop(_)
            | Violation::NegativeDisturbanceBound(_)
            | Violation::NonPositiveRadius(_)
            | Violation::ContractionOutOfRange(_)
            | Violation::NegativeDelayBound(_)
            | Violation::IntervalScale(_)
    )
}

/// Everything needed for one scalar run.
#[derive(Debug, Clone)]
pub struct ScalarSetup {
    pub spec: RunSpec,
    pub bits: u32,
    pub lambda: Option<u32>,
}

pub fn scalar_setup(cfg: &ExperimentConfig) -> Result<ScalarSetup, CliError> {
    let plant = cfg.scalar_plant()?;
    let mut trig = cfg.trigger_config(&plant);
    let tb = cfg.trigger();
    let a = plant.growth_rate();
    let (codec, bits, lambda) = match cfg.mode {
        Mode::ScalarReal => {
            let bad: Vec<String> = validate_config(&plant, &trig, ValidationMode::SufficientReal)
                .iter()
                .map(|v| v.to_string())
                .collect();
            if !bad.is_empty() {
                return Err(CliError::Domain(bad.join("; ")));
            }
            let bits = match tb.bits {
                Some(b) => b,
                None => bounds::practical_bits_real(a, trig.gamma, plant.m, trig.j, trig.rho0, trig.b)
                    .map_err(|e| CliError::Domain(e.to_string()))?,
            };
            (CodecMode::Real { bits }, bits, None)
        }
        Mode::ScalarComplex => {
            domain_check(&plant, &trig, true)?;
            let lambda = match tb.lambda {
                Some(l) => l,
                None => bounds::auto_lambda(a, trig.gamma, tb.chi, tb.chi_prime)
                    .ok_or_else(|| CliError::Domain("no admissible number of phase bits".into()))?,
            };
            trig = trig.with_lambda(lambda);
            let c = bounds::sufficient_bits_complex(
                plant.a, trig.gamma, plant.m, trig.j, trig.rho0, trig.b, lambda, tb.chi, tb.chi_prime,
            )
            .map_err(|e| CliError::Domain(e.to_string()))?;
            let bits = tb.bits.unwrap_or(c.practical_bits).max(lambda);
            (CodecMode::Complex { bits, lambda }, bits, Some(lambda))
        }
        _ => return Err(CliError::Config("not a scalar mode".into())),
    };
    let (x0, xhat0) = cfg.initial_scalar(trig.j);
    let spec = RunSpec {
        plant,
        trig,
        channel: cfg.channel(),
        disturbance: cfg.disturbance(),
        codec,
        dt: cfg.dt,
        horizon: cfg.horizon,
        seed: cfg.seed,
        x0,
        xhat0,
    };
    Ok(ScalarSetup { spec, bits, lambda })
}

#[derive(Debug, Serialize)]
struct ScalarReport<'a> {
    mode: &'static str,
    seed: u64,
    gamma: f64,
    j: f64,
    bits: u32,
    lambda: Option<u32>,
    #[serde(flatten)]
    summary: &'a RunSummary,
    invariants_passed: bool,
}

#[derive(Debug, Serialize)]
struct ModeReport {
    index: usize,
    eigenvalue: [f64; 2],
    j: f64,
    bits: u32,
    lambda: u32,
    m_tilde: f64,
    bounds: RateReport,
}

#[derive(Debug, Serialize)]
struct VectorReport<'a> {
    mode: &'static str,
    seed: u64,
    gamma: f64,
    designs: Vec<ModeReport>,
    #[serde(flatten)]
    summary: &'a VectorSummary,
    /// Packet size with the physical disturbance bound, pendulum only.
    bits_raw: Option<u32>,
    reference_bits: Option<u32>,
    invariants_passed: bool,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::ScalarReal => "scalar-real",
        Mode::ScalarComplex => "scalar-complex",
        Mode::Pendulum => "pendulum",
        Mode::CustomVector => "custom-vector",
    }
}

fn mode_reports(designs: &[ModeDesign]) -> Vec<ModeReport> {
    designs
        .iter()
        .map(|d| ModeReport {
            index: d.mode.index,
            eigenvalue: [d.mode.eigenvalue.re, d.mode.eigenvalue.im],
            j: d.j,
            bits: d.bits,
            lambda: d.lambda,
            m_tilde: d.mode.m_tilde,
            bounds: d.report,
        })
        .collect()
}

pub fn vector_passed(s: &VectorSummary) -> bool {
    s.stable_envelope_ok && s.modes.iter().all(|m| m.error_peak_ok && m.jump_contract_ok)
}

/// Event tables of every transmitting mode, stacked with a `mode` column.
pub fn vector_events(out: &VectorOutput) -> Table {
    let mut header = vec!["mode".to_string()];
    header.extend(EventLog::default().to_table().header);
    let mut t = Table::new(header);
    for (d, log) in out.designs.iter().zip(&out.logs) {
        for row in log.to_table().rows {
            let mut r = vec![d.mode.index.to_string()];
            r.extend(row);
            t.push(r);
        }
    }
    t
}

pub struct VectorRun {
    pub out: VectorOutput,
    pub bits_raw: Option<u32>,
}

pub fn run_vector_config(cfg: &ExperimentConfig) -> Result<VectorRun, CliError> {
    let plant = cfg.vector_plant()?;
    let vcfg = cfg.vector_run_config(plant.dim())?;
    match cfg.mode {
        Mode::Pendulum => {
            let p = vector::run_pendulum_with(&vcfg, cfg.disturbance_bound())?;
            Ok(VectorRun { out: p.run, bits_raw: p.bits_raw })
        }
        _ => Ok(VectorRun { out: vector::run_vector(&plant, &vcfg)?, bits_raw: None }),
    }
}

pub fn simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    if let Some(s) = &cfg.sweep {
        return simulate_sweep(cfg, &s.grid(), out_dir);
    }
    fs::create_dir_all(out_dir)?;
    if cfg.mode.is_scalar() {
        let setup = scalar_setup(cfg)?;
        let out = engine::run(&setup.spec)?;
        write_scalar(cfg, &setup, &out, out_dir)
    } else {
        let run = run_vector_config(cfg)?;
        write_table(&out_dir.join("trajectory.csv"), &run.out.trajectory_table())?;
        write_table(&out_dir.join("events.csv"), &vector_events(&run.out))?;
        let report = VectorReport {
            mode: mode_name(cfg.mode),
            seed: cfg.seed,
            gamma: cfg.gamma(),
            designs: mode_reports(&run.out.designs),
            summary: &run.out.summary,
            bits_raw: run.bits_raw,
            reference_bits: (cfg.mode == Mode::Pendulum).then_some(REFERENCE_BITS),
            invariants_passed: vector_passed(&run.out.summary),
        };
        write_json(&out_dir.join("summary.json"), &report)?;
        log::info!("{} events, max |s| = {}", run.out.logs.iter().map(EventLog::len).sum::<usize>(), run.out.summary.max_abs_state);
        Ok(())
    }
}

fn write_scalar(cfg: &ExperimentConfig, setup: &ScalarSetup, out: &RunOutput, dir: &Path) -> Result<(), CliError> {
    write_table(&dir.join("trajectory.csv"), &out.trajectory.to_table(setup.spec.plant.is_real()))?;
    write_table(&dir.join("events.csv"), &out.log.to_table())?;
    let report = ScalarReport {
        mode: mode_name(cfg.mode),
        seed: cfg.seed,
        gamma: setup.spec.trig.gamma,
        j: setup.spec.trig.j,
        bits: setup.bits,
        lambda: setup.lambda,
        summary: &out.summary,
        invariants_passed: out.summary.all_passed(),
    };
    write_json(&dir.join("summary.json"), &report)?;
    log::info!("{} events, R_s = {}", out.log.len(), out.summary.rate_bits);
    Ok(())
}

/// One sweep point averaged over `seeds` consecutive seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub j: f64,
    pub bits: u32,
    pub events: f64,
    pub rate_bits: f64,
    pub rate_triggers: f64,
    pub max_abs: f64,
    pub bound_rate: f64,
    pub passed: bool,
}

pub const SWEEP_COLUMNS: [&str; 9] =
    ["gamma", "j", "bits", "events", "rate_bits", "rate_triggers", "max_abs_state", "suff_rate", "invariants_passed"];

fn sweep_point(cfg: &ExperimentConfig, gamma: f64) -> Result<SweepPoint, CliError> {
    let base = cfg.with_gamma(gamma);
    let n = cfg.seeds as f64;
    let mut p = SweepPoint {
        gamma,
        j: f64::NAN,
        bits: 0,
        events: 0.0,
        rate_bits: 0.0,
        rate_triggers: 0.0,
        max_abs: 0.0,
        bound_rate: f64::NAN,
        passed: true,
    };
    for s in 0..cfg.seeds {
        let mut c = base.clone();
        c.seed = cfg.seed + s;
        if c.mode.is_scalar() {
            let setup = scalar_setup(&c)?;
            let out = engine::run(&setup.spec)?;
            let t = &setup.spec.trig;
            p.j = t.j;
            p.bits = setup.bits;
            p.bound_rate = if c.mode == Mode::ScalarReal {
                RateReport::real(setup.spec.plant.a.re, t.gamma, setup.spec.plant.m, t.j, t.rho0, t.b).sufficient_rate
            } else {
                let tb = c.trigger();
                RateReport::complex(
                    setup.spec.plant.a, t.gamma, setup.spec.plant.m, t.j, t.rho0, t.b, t.lambda, tb.chi, tb.chi_prime,
                )
                .sufficient_rate
            };
            p.events += out.log.len() as f64 / n;
            p.rate_bits += out.summary.rate_bits / n;
            p.rate_triggers += out.summary.rate_triggers / n;
            p.max_abs = p.max_abs.max(out.summary.max_abs_x);
            p.passed &= out.summary.all_passed();
        } else {
            let run = run_vector_config(&c)?;
            let d = run.out.designs.first().ok_or_else(|| CliError::Domain("no unstable mode".into()))?;
            let m = &run.out.summary.modes[0];
            p.j = d.j;
            p.bits = d.bits;
            p.bound_rate = d.report.sufficient_rate;
            p.events += m.events as f64 / n;
            p.rate_bits += m.rate_bits / n;
            p.rate_triggers += m.rate_triggers / n;
            p.max_abs = p.max_abs.max(run.out.summary.max_abs_state);
            p.passed &= vector_passed(&run.out.summary);
        }
    }
    Ok(p)
}

/// Sweep points in grid order. Points run concurrently.
pub fn sweep_points(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<SweepPoint>, CliError> {
    grid.par_iter().map(|&g| sweep_point(cfg, g)).collect()
}

pub fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(SWEEP_COLUMNS);
    for p in points {
        t.push(vec![
            fmt_num(p.gamma),
            fmt_num(p.j),
            p.bits.to_string(),
            fmt_num(p.events),
            fmt_num(p.rate_bits),
            fmt_num(p.rate_triggers),
            fmt_num(p.max_abs),
            fmt_num(p.bound_rate),
            u8::from(p.passed).to_string(),
        ]);
    }
    t
}

fn simulate_sweep(cfg: &ExperimentConfig, grid: &[f64], out_dir: &Path) -> Result<(), CliError> {
    let points = sweep_points(cfg, grid)?;
    fs::create_dir_all(out_dir)?;
    write_table(&out_dir.join("sweep.csv"), &sweep_table(&points))
}

/// Bound report at one delay bound. Domain failures of individual bounds
/// come back as `NaN` entries.
pub fn rate_report(cfg: &ExperimentConfig, gamma: f64) -> Result<RateReport, CliError> {
    let c = cfg.with_gamma(gamma);
    let tb = c.trigger();
    match c.mode {
        Mode::ScalarReal => {
            let plant = c.scalar_plant()?;
            let trig = c.trigger_config(&plant);
            domain_check(&plant, &trig, false)?;
            Ok(RateReport::real(plant.a.re, gamma, plant.m, trig.j, trig.rho0, trig.b))
        }
        Mode::ScalarComplex => {
            let plant = c.scalar_plant()?;
            let trig = c.trigger_config(&plant);
            domain_check(&plant, &trig, true)?;
            let lambda = tb.lambda.or_else(|| bounds::auto_lambda(plant.a.re, gamma, tb.chi, tb.chi_prime));
            match lambda {
                Some(l) => Ok(RateReport::complex(plant.a, gamma, plant.m, trig.j, trig.rho0, trig.b, l, tb.chi, tb.chi_prime)),
                None => {
                    log::warn!("gamma = {gamma}: no admissible number of phase bits");
                    let mut r = RateReport::complex(plant.a, gamma, plant.m, trig.j, trig.rho0, trig.b, 1, tb.chi, tb.chi_prime);
                    r.lambda = None;
                    r.sufficient_bits = f64::NAN;
                    r.practical_bits = f64::NAN;
                    r.sufficient_rate = f64::NAN;
                    Ok(r)
                }
            }
        }
        Mode::Pendulum | Mode::CustomVector => {
            let plant = c.vector_plant()?;
            let vcfg = c.vector_run_config(plant.dim())?;
            let dec = vector::decompose(&plant)?;
            let designs = vector::design(&dec, &vcfg)?;
            designs.first().map(|d| d.report).ok_or_else(|| CliError::Domain("plant has no unstable mode".into()))
        }
    }
}

pub fn bounds_table(reports: &[RateReport]) -> Table {
    let mut t = Table::new(BOUNDS_COLUMNS);
    for r in reports {
        t.push_nums(&[
            r.gamma,
            r.sufficient_bits,
            r.practical_bits,
            r.sufficient_rate,
            r.necessary_bits,
            r.necessary_rate_general,
            r.necessary_rate_restricted,
            r.trig_rate_upper,
            r.trig_rate_lower_restricted,
            r.beta,
            r.datarate_baseline,
        ]);
    }
    t
}

pub fn bounds(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    let grid = match &cfg.sweep {
        Some(s) => s.grid(),
        None => vec![cfg.gamma()],
    };
    let reports: Vec<RateReport> = grid.par_iter().map(|&g| rate_report(cfg, g)).collect::<Result<_, _>>()?;
    fs::create_dir_all(out_dir)?;
    write_table(&out_dir.join("bounds.csv"), &bounds_table(&reports))
}

#[derive(Debug, Serialize)]
struct AdversaryOut<'a> {
    gamma: f64,
    j: f64,
    m: f64,
    a: f64,
    seed: u64,
    #[serde(flatten)]
    report: &'a adversary::ReplayReport,
}

pub fn adversary(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    if cfg.mode != Mode::ScalarReal {
        return Err(CliError::Config("adversary needs a scalar-real config".into()));
    }
    if cfg.sweep.is_some() {
        return Err(CliError::Config("adversary does not take a sweep".into()));
    }
    let plant = cfg.scalar_plant()?;
    let trig = cfg.trigger_config(&plant);
    domain_check(&plant, &trig, false)?;
    let (report, out) = adversary::replay(&plant, trig.j, trig.gamma, cfg.dt, cfg.horizon, cfg.seed)?;
    fs::create_dir_all(out_dir)?;
    let mut script = Table::new(["k", "t_s", "delay"]);
    for (k, (&ts, &d)) in out.log.ts_list.iter().zip(&out.log.delays).enumerate() {
        script.push(vec![k.to_string(), fmt_num(ts), fmt_num(d)]);
    }
    let mut ratios = Table::new(["k", "t_c", "ratio"]);
    for (k, (&tc, &r)) in out.log.tc_list.iter().zip(&report.ratios).enumerate() {
        ratios.push(vec![k.to_string(), fmt_num(tc), fmt_num(r)]);
    }
    write_table(&out_dir.join("delay_script.csv"), &script)?;
    write_table(&out_dir.join("ratios.csv"), &ratios)?;
    write_table(&out_dir.join("trajectory.csv"), &out.trajectory.to_table(true))?;
    write_table(&out_dir.join("events.csv"), &out.log.to_table())?;
    let doc = AdversaryOut { gamma: trig.gamma, j: trig.j, m: plant.m, a: plant.a.re, seed: cfg.seed, report: &report };
    write_json(&out_dir.join("adversary.json"), &doc)?;
    log::info!("min ratio {} (floor {}), R_tr {} (floor {})", report.min_ratio, report.ratio_floor, report.rate_triggers, report.rate_floor);
    Ok(())
}
