//! Seeded Monte-Carlo sweeps over the uniform reflectivity noise model.
//!
//! Every reflectivity is drawn from `U[0.5 - m, 0.5 + m]`. A trial owns a
//! private ChaCha20 stream keyed by SHA-256 over
//! `(master seed, experiment, m index, trial index)`. The copy count is not
//! part of the key: copy `k` always reads draws `2k` and `2k + 1`, so the
//! `N`-copy trial and the `N+1`-copy trial with the same index share their
//! first `N` copies. Comparisons between copy counts are then paired.
//!
//! Trials run on a rayon pool and are collected in index order, so the CSV
//! bytes do not depend on the worker count.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::closed_form::{
    bsm_fidelity_closed, bsm_fnorm_closed, bsm_psuccess_closed, ReflectivityDraw,
};
use crate::detection::{fusion_outcomes, FusionLabel};
use crate::interferometry::{bsm_matrix, effective_average, fusion_gate};
use crate::metrics::{
    bell_state, fidelity, fusion_even_target, normalized_fidelity, trace_distance, two_bell_pairs,
    BellLabel,
};
use crate::network::build_averaged_network;
use crate::{Error, Result, StateVec};

/// Environment variable that caps the number of sweep workers.
pub const THREADS_ENV: &str = "AVGFUSION_THREADS";

const STREAM_DOMAIN: &[u8] = b"avgfusion/trial-stream/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fusion,
    Bsm,
    TraceDistance,
}

impl Experiment {
    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Fusion => "fusion",
            Experiment::Bsm => "bsm",
            Experiment::TraceDistance => "trace-distance",
        }
    }

    pub fn metric_names(self) -> &'static [&'static str] {
        match self {
            Experiment::Fusion => &["f_hh", "p_hh", "f_hh_norm", "p_single", "trace_distance"],
            Experiment::Bsm => &[
                "f",
                "p_success",
                "f_norm",
                "f_closed",
                "p_success_closed",
                "f_norm_closed",
            ],
            Experiment::TraceDistance => &["trace_distance"],
        }
    }

    /// Names of the two reflectivity lists.
    pub fn eta_names(self) -> [&'static str; 2] {
        match self {
            Experiment::Bsm => ["eta_h", "eta_v"],
            _ => ["eta_x", "eta_y"],
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Experiment::TraceDistance => 50,
            _ => 200,
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fusion" => Ok(Experiment::Fusion),
            "bsm" => Ok(Experiment::Bsm),
            "trace-distance" => Ok(Experiment::TraceDistance),
            other => Err(Error::InvalidConfig(format!(
                "unknown experiment {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub n_copies: Vec<usize>,
    pub m_grid: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
    /// Worker cap; `None` falls back to `AVGFUSION_THREADS`, then to rayon's default.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.n_copies.is_empty() {
            return Err(Error::InvalidConfig("no copy counts given".into()));
        }
        if let Some(&n) = self.n_copies.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidConfig(format!(
                "copy count {n} must be at least 1"
            )));
        }
        if self.m_grid.is_empty() {
            return Err(Error::InvalidConfig("empty m grid".into()));
        }
        for &m in &self.m_grid {
            check_noise_width(m)?;
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig(
                "thread count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `start, start + step, ...` up to `stop` inclusive, rounded to 12 decimals
/// so that `0:0.45:0.05` yields the literal grid values.
pub fn m_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidConfig("m grid bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "m grid step {step} must be positive"
        )));
    }
    if stop < start {
        return Err(Error::InvalidConfig(format!(
            "m grid stop {stop} is below start {start}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    for &m in &grid {
        check_noise_width(m)?;
    }
    Ok(grid)
}

fn check_noise_width(m: f64) -> Result<()> {
    if (0.0..=0.5).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidNoiseWidth(m))
    }
}

/// One draw from `U[0.5 - m, 0.5 + m]`; `m = 0` gives exactly `0.5`.
pub fn sample_reflectivity<R: Rng + ?Sized>(rng: &mut R, m: f64) -> Result<f64> {
    check_noise_width(m)?;
    let u: f64 = rng.random();
    Ok((0.5 + m * (2.0 * u - 1.0)).clamp(0.0, 1.0))
}

/// The private stream of one trial.
pub fn trial_rng(
    master_seed: u64,
    experiment: Experiment,
    m_index: usize,
    trial: usize,
) -> ChaCha20Rng {
    let tag = experiment.tag().as_bytes();
    let mut h = Sha256::new();
    h.update(STREAM_DOMAIN);
    h.update(master_seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag);
    h.update((m_index as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// Draws `n` copies' worth of reflectivity pairs, interleaved per copy.
fn draw_pairs<R: Rng + ?Sized>(rng: &mut R, n: usize, m: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        a.push(sample_reflectivity(rng, m)?);
        b.push(sample_reflectivity(rng, m)?);
    }
    Ok((a, b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionMetrics {
    pub f_hh: f64,
    pub p_hh: f64,
    /// `NaN` when `p_hh` is zero.
    pub f_hh_norm: f64,
    pub p_single: f64,
    pub trace_distance: f64,
    /// `F/P` overshot 1 by more than round-off and was clamped.
    pub anomaly: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsmMetrics {
    pub f: f64,
    pub p_success: f64,
    pub f_norm: f64,
    pub f_closed: f64,
    pub p_success_closed: f64,
    pub f_norm_closed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metrics {
    Fusion(FusionMetrics),
    Bsm(BsmMetrics),
    TraceDistance { trace_distance: f64 },
}

impl Metrics {
    /// Values in the column order of [`Experiment::metric_names`].
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Metrics::Fusion(f) => vec![f.f_hh, f.p_hh, f.f_hh_norm, f.p_single, f.trace_distance],
            Metrics::Bsm(b) => vec![
                b.f,
                b.p_success,
                b.f_norm,
                b.f_closed,
                b.p_success_closed,
                b.f_norm_closed,
            ],
            Metrics::TraceDistance { trace_distance } => vec![trace_distance],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub n_copies: usize,
    pub m: f64,
    /// `η^x` for fusion gates, `η^H` for BSMs.
    pub eta_a: Vec<f64>,
    /// `η^y` for fusion gates, `η^V` for BSMs.
    pub eta_b: Vec<f64>,
    pub metrics: Metrics,
}

fn check_copies(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidConfig("copy count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Fusion metrics for given copy reflectivities.
pub fn fusion_metrics(eta_x: &[f64], eta_y: &[f64]) -> Result<FusionMetrics> {
    let copies = eta_x
        .iter()
        .zip(eta_y)
        .map(|(&x, &y)| fusion_gate(x, y))
        .collect::<Result<Vec<_>>>()?;
    let net = build_averaged_network(&copies, 4)?;
    let full = net.run(&two_bell_pairs())?;
    let total = full.norm_sq();
    let kept = crate::network::postselect_vacuum_ancilla(&full, net.layout())?;
    let outcomes = fusion_outcomes(&kept, [0, 1, 2, 3])?;

    let hh = &outcomes[0];
    debug_assert_eq!(hh.label, FusionLabel::HH);
    let f_hh = fidelity(&hh.residual, &fusion_even_target())? / total;
    let p_hh = hh.probability / total;
    let p_single = outcomes.iter().map(|o| o.probability).sum::<f64>() / total;
    let (f_hh_norm, anomaly) = if p_hh > 0.0 {
        let nf = normalized_fidelity(f_hh, p_hh)?;
        (nf.value, nf.anomaly)
    } else {
        (f64::NAN, false)
    };
    let td = trace_distance(&effective_average(&copies)?, &fusion_gate(0.5, 0.5)?)?;
    Ok(FusionMetrics {
        f_hh,
        p_hh,
        f_hh_norm,
        p_single,
        trace_distance: td,
        anomaly,
    })
}

/// `(|0011⟩ - |1100⟩)/√2`, the image of `ψ+` under a perfect BSM.
pub fn bsm_target() -> StateVec {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVec::from_real_terms(4, &[(&[0, 0, 1, 1], r), (&[1, 1, 0, 0], -r)])
        .expect("four-mode kets")
}

/// Simulated and closed-form BSM metrics for given copy reflectivities.
pub fn bsm_metrics(eta_h: &[f64], eta_v: &[f64]) -> Result<BsmMetrics> {
    let draw = ReflectivityDraw::new(eta_h.to_vec(), eta_v.to_vec())?;
    let copies = eta_h
        .iter()
        .zip(eta_v)
        .map(|(&h, &v)| bsm_matrix(h, v))
        .collect::<Result<Vec<_>>>()?;
    let net = build_averaged_network(&copies, 0)?;
    let full = net.run(&bell_state(BellLabel::PsiPlus))?;
    let total = full.norm_sq();
    let kept = crate::network::postselect_vacuum_ancilla(&full, net.layout())?;
    let p_success = kept.norm_sq() / total;
    let f = fidelity(&kept, &bsm_target())? / total;
    Ok(BsmMetrics {
        f,
        p_success,
        f_norm: normalized_fidelity(f, p_success)?.value,
        f_closed: bsm_fidelity_closed(&draw),
        p_success_closed: bsm_psuccess_closed(&draw),
        f_norm_closed: bsm_fnorm_closed(&draw)?,
    })
}

/// Trace distance between the copies' mean and the perfect fusion gate.
pub fn trace_distance_metric(eta_x: &[f64], eta_y: &[f64]) -> Result<f64> {
    let copies = eta_x
        .iter()
        .zip(eta_y)
        .map(|(&x, &y)| fusion_gate(x, y))
        .collect::<Result<Vec<_>>>()?;
    trace_distance(&effective_average(&copies)?, &fusion_gate(0.5, 0.5)?)
}

pub fn run_fusion_trial<R: Rng + ?Sized>(n: usize, m: f64, rng: &mut R) -> Result<TrialRecord> {
    check_copies(n)?;
    let (eta_x, eta_y) = draw_pairs(rng, n, m)?;
    let metrics = Metrics::Fusion(fusion_metrics(&eta_x, &eta_y)?);
    Ok(TrialRecord {
        trial: 0,
        n_copies: n,
        m,
        eta_a: eta_x,
        eta_b: eta_y,
        metrics,
    })
}

pub fn run_bsm_trial<R: Rng + ?Sized>(n: usize, m: f64, rng: &mut R) -> Result<TrialRecord> {
    check_copies(n)?;
    let (eta_h, eta_v) = draw_pairs(rng, n, m)?;
    let metrics = Metrics::Bsm(bsm_metrics(&eta_h, &eta_v)?);
    Ok(TrialRecord {
        trial: 0,
        n_copies: n,
        m,
        eta_a: eta_h,
        eta_b: eta_v,
        metrics,
    })
}

pub fn run_trace_distance_trial<R: Rng + ?Sized>(
    n: usize,
    m: f64,
    rng: &mut R,
) -> Result<TrialRecord> {
    check_copies(n)?;
    let (eta_x, eta_y) = draw_pairs(rng, n, m)?;
    let td = trace_distance_metric(&eta_x, &eta_y)?;
    Ok(TrialRecord {
        trial: 0,
        n_copies: n,
        m,
        eta_a: eta_x,
        eta_b: eta_y,
        metrics: Metrics::TraceDistance { trace_distance: td },
    })
}

/// Runs trial `trial` of the `(n, m_grid[m_index])` cell on its own stream.
pub fn run_trial(
    experiment: Experiment,
    master_seed: u64,
    n: usize,
    m_grid: &[f64],
    m_index: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let m = m_grid[m_index];
    let mut rng = trial_rng(master_seed, experiment, m_index, trial);
    let mut rec = match experiment {
        Experiment::Fusion => run_fusion_trial(n, m, &mut rng)?,
        Experiment::Bsm => run_bsm_trial(n, m, &mut rng)?,
        Experiment::TraceDistance => run_trace_distance_trial(n, m, &mut rng)?,
    };
    rec.trial = trial;
    Ok(rec)
}

/// All trials of one `(N, m)` cell with their summary statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub n_copies: usize,
    pub m: f64,
    pub records: Vec<TrialRecord>,
    pub mean: Vec<f64>,
    /// Sample standard deviation (`n - 1` denominator), 0 for a single trial.
    pub std: Vec<f64>,
}

impl Cell {
    fn from_records(n_copies: usize, m: f64, records: Vec<TrialRecord>) -> Self {
        let columns = records.first().map_or(0, |r| r.metrics.values().len());
        let rows: Vec<Vec<f64>> = records.iter().map(|r| r.metrics.values()).collect();
        let (mean, std) = (0..columns)
            .map(|c| {
                let xs: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                mean_std(&xs)
            })
            .unzip();
        Cell {
            n_copies,
            m,
            records,
            mean,
            std,
        }
    }

    /// Per-trial values of metric column `column`, in trial order.
    pub fn column(&self, column: usize) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.metrics.values()[column])
            .collect()
    }
}

/// Sequential mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut sum = 0.0;
    for &x in xs {
        sum += x;
    }
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for &x in xs {
        ss += (x - mean) * (x - mean);
    }
    (mean, (ss / (n - 1) as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// Cells ordered by copy count, then by m.
    pub cells: Vec<Cell>,
}

impl SweepResult {
    pub fn cell(&self, n_copies: usize, m_index: usize) -> Option<&Cell> {
        let i = self.config.n_copies.iter().position(|&n| n == n_copies)?;
        self.cells.get(i * self.config.m_grid.len() + m_index)
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.config
            .experiment
            .metric_names()
            .iter()
            .position(|&c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let exp = self.config.experiment;
        let [ea, eb] = exp.eta_names();
        let mut out = format!("experiment,row_kind,N,m,trial,{ea},{eb}");
        for name in exp.metric_names() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for cell in &self.cells {
            for r in &cell.records {
                let _ = write!(
                    out,
                    "{},trial,{},{},{},{},{}",
                    exp.tag(),
                    cell.n_copies,
                    fmt_f64(cell.m),
                    r.trial,
                    join_etas(&r.eta_a),
                    join_etas(&r.eta_b)
                );
                push_values(&mut out, &r.metrics.values());
            }
            for (kind, values) in [("mean", &cell.mean), ("std", &cell.std)] {
                let _ = write!(
                    out,
                    "{},{kind},{},{},,,",
                    exp.tag(),
                    cell.n_copies,
                    fmt_f64(cell.m)
                );
                push_values(&mut out, values);
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Round-trip float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_etas(etas: &[f64]) -> String {
    etas.iter()
        .map(|&e| fmt_f64(e))
        .collect::<Vec<_>>()
        .join(";")
}

fn push_values(out: &mut String, values: &[f64]) {
    for &v in values {
        out.push(',');
        out.push_str(&fmt_f64(v));
    }
    out.push('\n');
}

fn thread_cap(cfg: &SweepConfig) -> Result<Option<usize>> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::InvalidConfig(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, usize)> = cfg
        .n_copies
        .iter()
        .flat_map(|&n| {
            (0..cfg.m_grid.len()).flat_map(move |mi| (0..cfg.samples).map(move |t| (n, mi, t)))
        })
        .collect();
    let work = || -> Result<Vec<TrialRecord>> {
        jobs.par_iter()
            .map(|&(n, mi, t)| run_trial(cfg.experiment, cfg.master_seed, n, &cfg.m_grid, mi, t))
            .collect()
    };
    let records = match thread_cap(cfg)? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut it = records.into_iter();
    let mut cells = Vec::with_capacity(cfg.n_copies.len() * cfg.m_grid.len());
    for &n in &cfg.n_copies {
        for &m in &cfg.m_grid {
            let recs: Vec<TrialRecord> = it.by_ref().take(cfg.samples).collect();
            cells.push(Cell::from_records(n, m, recs));
        }
    }
    Ok(SweepResult {
        config: cfg.clone(),
        cells,
    })
}
