//! Monte Carlo SER estimation over an Es/N0 sweep.
//!
//! Trial `t` at any SNR point draws everything from stream `(seed, t)`, so
//! results depend on the configuration only, never on the worker count.
//! Trials run in fixed chunks of [`CHUNK_TRIALS`]; rounds of chunks grow
//! geometrically and the stop rule is checked chunk by chunk in index order.
//! A point therefore stops at the end of the first chunk whose cumulative
//! error count reaches `target_errors`, or at `max_trials`.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{fill_noise, ChannelSet, NoiseSpec, StreamFactory};
use crate::constellation::{Constellation, Modulation};
use crate::error::{Error, Result};
use crate::geometry::ChannelRow;
use crate::netmap::NetworkMap;
use crate::selection::{Scheme, SelectScratch, SelectionResult, Selector};
use crate::transceiver::{bc_decode, superpose_into, JointDetector};

pub const CHUNK_TRIALS: u64 = 1024;
const MAX_ROUND_CHUNKS: u64 = 256;

/// Points with fewer errors than this are ignored by [`fit_diversity`].
pub const DEFAULT_ERROR_FLOOR: u64 = 50;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorMetric {
    /// Relay's network-coded symbol differs from the true map output.
    Ncs,
    /// Relay's joint pair estimate differs from the transmitted pair.
    Pair,
}

impl ErrorMetric {
    pub fn token(self) -> &'static str {
        match self {
            ErrorMetric::Ncs => "ncs",
            ErrorMetric::Pair => "pair",
        }
    }
}

impl FromStr for ErrorMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ncs" => Ok(ErrorMetric::Ncs),
            "pair" => Ok(ErrorMetric::Pair),
            other => Err(format!("unknown metric '{other}' (expected ncs or pair)")),
        }
    }
}

impl fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Relay detection only.
    Ma,
    /// Relay-to-user broadcast only; user A decodes `s_B`.
    Bc,
    /// MA followed by BC; user A's estimate of `s_B` is scored.
    E2e,
}

impl Phase {
    pub fn token(self) -> &'static str {
        match self {
            Phase::Ma => "ma",
            Phase::Bc => "bc",
            Phase::E2e => "e2e",
        }
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ma" => Ok(Phase::Ma),
            "bc" => Ok(Phase::Bc),
            "e2e" => Ok(Phase::E2e),
            other => Err(format!("unknown phase '{other}' (expected ma, bc or e2e)")),
        }
    }
}

/// `start:step:stop` in dB, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSweep {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrSweep {
    pub fn single(snr_db: f64) -> Self {
        SnrSweep {
            start: snr_db,
            step: 1.0,
            stop: snr_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidConfig(
                "snr sweep bounds must be finite".into(),
            ));
        }
        if self.start > self.stop {
            return Err(Error::InvalidConfig(format!(
                "snr start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "snr step must be > 0, got {}",
                self.step
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for SnrSweep {
    type Err = String;

    /// Accepts `start:step:stop` or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number '{t}' in snr range '{s}'"))
        };
        let sweep = match parts.as_slice() {
            [v] => SnrSweep::single(num(v)?),
            [a, b, c] => SnrSweep {
                start: num(a)?,
                step: num(b)?,
                stop: num(c)?,
            },
            _ => return Err(format!("snr range '{s}' is not start:step:stop")),
        };
        sweep.validate().map_err(|e| e.to_string())?;
        Ok(sweep)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_r: usize,
    pub modulation: Modulation,
    pub scheme: Scheme,
    pub sweep: SnrSweep,
    pub max_trials: u64,
    pub target_errors: u64,
    pub seed: u64,
    pub metric: ErrorMetric,
    pub phase: Phase,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
    /// Relay map; XOR of the modulation order when absent.
    pub map: Option<NetworkMap>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_a: 1,
            n_b: 1,
            n_r: 1,
            modulation: Modulation::Qpsk,
            scheme: Scheme::None,
            sweep: SnrSweep {
                start: 0.0,
                step: 5.0,
                stop: 30.0,
            },
            max_trials: 100_000_000,
            target_errors: 200,
            seed: 0,
            metric: ErrorMetric::Ncs,
            phase: Phase::Ma,
            workers: 0,
            map: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 || self.n_r == 0 {
            return Err(Error::InvalidConfig("antenna counts must be >= 1".into()));
        }
        self.sweep.validate()?;
        if self.max_trials == 0 {
            return Err(Error::InvalidConfig("max_trials must be >= 1".into()));
        }
        if self.target_errors == 0 {
            return Err(Error::InvalidConfig("target_errors must be >= 1".into()));
        }
        if let Some(m) = &self.map {
            if m.order() != self.modulation.order() {
                return Err(Error::InvalidConfig(format!(
                    "map order {} does not match {} (order {})",
                    m.order(),
                    self.modulation,
                    self.modulation.order()
                )));
            }
            if let Some(v) = m.find_violation() {
                return Err(Error::ExclusiveLaw(v));
            }
        }
        Ok(())
    }

    pub fn network_map(&self) -> NetworkMap {
        self.map.clone().unwrap_or_else(|| {
            NetworkMap::xor(self.modulation.order()).expect("modulation orders are powers of two")
        })
    }

    /// Label written to the CSV `metric` column.
    pub fn metric_label(&self) -> &'static str {
        match self.phase {
            Phase::Ma => self.metric.token(),
            Phase::Bc => "bc",
            Phase::E2e => "e2e",
        }
    }
}

/// Aggregated result for one SNR point. `ci95` is the half-width of the
/// 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci95: f64,
}

/// 95% Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl SerEstimate {
    pub fn new(snr_db: f64, trials: u64, errors: u64) -> Self {
        let (lo, hi) = wilson_interval(errors, trials);
        SerEstimate {
            snr_db,
            trials,
            errors,
            ser: if trials == 0 {
                0.0
            } else {
                errors as f64 / trials as f64
            },
            ci95: 0.5 * (hi - lo),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials)
    }

    /// No errors observed: the SER is only bounded above.
    pub fn is_censored(&self) -> bool {
        self.errors == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Slope through the lowest- and highest-SNR qualifying points.
    Extremes,
    /// Least-squares slope of `log10 SER` against `snr_db / 10`.
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityFit {
    pub slope: f64,
    /// SNR span of the points actually used.
    pub window: (f64, f64),
    /// `(snr_db, ser)` of the qualifying points.
    pub points: Vec<(f64, f64)>,
}

pub fn fit_diversity(points: &[SerEstimate], lo_db: f64, hi_db: f64) -> Result<DiversityFit> {
    fit_diversity_with(
        points,
        lo_db,
        hi_db,
        DEFAULT_ERROR_FLOOR,
        FitMethod::Extremes,
    )
}

pub fn fit_diversity_with(
    points: &[SerEstimate],
    lo_db: f64,
    hi_db: f64,
    error_floor: u64,
    method: FitMethod,
) -> Result<DiversityFit> {
    const EPS: f64 = 1e-9;
    let mut used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.snr_db >= lo_db - EPS && p.snr_db <= hi_db + EPS)
        .filter(|p| p.errors >= error_floor && p.errors > 0)
        .map(|p| (p.snr_db, p.ser))
        .collect();
    used.sort_by(|a, b| a.0.total_cmp(&b.0));
    used.dedup_by(|a, b| a.0 == b.0);
    if used.len() < 2 {
        return Err(Error::InsufficientPoints(used.len()));
    }
    let (first, last) = (used[0], used[used.len() - 1]);
    let slope = match method {
        FitMethod::Extremes => -(last.1.log10() - first.1.log10()) / ((last.0 - first.0) / 10.0),
        FitMethod::LeastSquares => {
            let n = used.len() as f64;
            let xs: Vec<f64> = used.iter().map(|p| p.0 / 10.0).collect();
            let ys: Vec<f64> = used.iter().map(|p| p.1.log10()).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            -sxy / sxx
        }
    };
    Ok(DiversityFit {
        slope,
        window: (first.0, last.0),
        points: used,
    })
}

enum Executor {
    Sequential,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Executor {
    fn new(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        if workers != 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("failed to start worker pool");
            return Executor::Pool(pool);
        }
        let _ = workers;
        Executor::Sequential
    }

    fn map_chunks<F>(&self, chunks: &[Range<u64>], f: F) -> Vec<u64>
    where
        F: Fn(Range<u64>) -> u64 + Sync,
    {
        match self {
            Executor::Sequential => chunks.iter().cloned().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| chunks.par_iter().cloned().map(&f).collect())
            }
        }
    }
}

/// Per-chunk scratch buffers.
struct Workspace {
    channels: ChannelSet,
    rows: Vec<ChannelRow>,
    select: SelectScratch,
    noise: Vec<Complex64>,
    y: Vec<Complex64>,
    detector: JointDetector,
}

/// A configured simulation: constellation, map, selector and worker pool.
pub struct Simulator {
    cfg: SimConfig,
    constellation: Constellation,
    map: NetworkMap,
    // inverse[a * M + r] = the s_B with map(a, s_B) = r
    inverse: Vec<usize>,
    selector: Selector,
    factory: StreamFactory,
    executor: Executor,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let constellation = cfg.modulation.constellation();
        let map = cfg.network_map();
        let order = map.order();
        let mut inverse = vec![0; order * order];
        for a in 0..order {
            for b in 0..order {
                inverse[a * order + map.apply(a, b)] = b;
            }
        }
        let selector = Selector::new(cfg.scheme, &constellation, &map)?;
        Ok(Simulator {
            factory: StreamFactory::new(cfg.seed),
            executor: Executor::new(cfg.workers),
            cfg,
            constellation,
            map,
            inverse,
            selector,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn map(&self) -> &NetworkMap {
        &self.map
    }

    fn workspace(&self) -> Workspace {
        let cfg = &self.cfg;
        Workspace {
            channels: ChannelSet::zeros(cfg.n_a, cfg.n_b, cfg.n_r).expect("validated counts"),
            rows: Vec::with_capacity(cfg.n_r),
            select: SelectScratch::default(),
            noise: vec![Complex64::new(0.0, 0.0); cfg.n_r],
            y: vec![Complex64::new(0.0, 0.0); cfg.n_r],
            detector: JointDetector::new(&self.constellation),
        }
    }

    #[inline]
    fn select(&self, ws: &mut Workspace) -> SelectionResult {
        if self.selector.scheme() == Scheme::None {
            ws.channels.pair_matrix_into(0, 0, &mut ws.rows);
            return SelectionResult {
                a_idx: 0,
                b_idx: 0,
                r_idx: None,
                metric: f64::NAN,
            };
        }
        let sel = self.selector.select_with(&ws.channels, &mut ws.select);
        sel.effective_channel_into(&ws.channels, &mut ws.rows);
        sel
    }

    /// Replays the channel draw and antenna selection of trial `t`.
    pub fn trial_selection(&self, trial: u64) -> SelectionResult {
        let mut ws = self.workspace();
        let mut rs = self.factory.stream(trial);
        ws.channels.redraw(&mut rs);
        self.selector.select(&ws.channels)
    }

    /// The relay's MA processing for one trial. Returns `(s_a, s_b, ncs_hat,
    /// pair_correct)`, leaving the stream positioned after the MA draws.
    #[inline]
    fn ma_trial(
        &self,
        ws: &mut Workspace,
        rs: &mut crate::channel::RandomStream,
        ns: NoiseSpec,
    ) -> (usize, usize, usize, bool) {
        let order = self.constellation.order();
        ws.channels.redraw(rs);
        self.select(ws);
        let s_a = rs.message(order);
        let s_b = rs.message(order);
        let dim = ws.rows.len();
        fill_noise(rs, ns, &mut ws.noise[..dim]);
        let p = self.constellation.points();
        superpose_into(&ws.rows, p[s_a], p[s_b], &mut ws.y[..dim]);
        for (y, n) in ws.y[..dim].iter_mut().zip(&ws.noise[..dim]) {
            *y += n;
        }
        let je = ws.detector.detect(&ws.y[..dim], &ws.rows, &self.map);
        (s_a, s_b, je.ncs, (je.s_a, je.s_b) == (s_a, s_b))
    }

    fn ma_errors(&self, trials: Range<u64>, ns: NoiseSpec) -> u64 {
        let mut ws = self.workspace();
        let mut errors = 0;
        for t in trials {
            let mut rs = self.factory.stream(t);
            let (s_a, s_b, ncs, pair_ok) = self.ma_trial(&mut ws, &mut rs, ns);
            let wrong = match self.cfg.metric {
                ErrorMetric::Ncs => ncs != self.map.apply(s_a, s_b),
                ErrorMetric::Pair => !pair_ok,
            };
            errors += wrong as u64;
        }
        errors
    }

    fn bc_errors(&self, trials: Range<u64>, ns: NoiseSpec) -> u64 {
        let order = self.constellation.order();
        let p = self.constellation.points();
        let amp = ns.amplitude();
        let mut errors = 0;
        for t in trials {
            let mut rs = self.factory.stream(t);
            // Drawing (s_A, s_R) and solving for s_B keeps the pair uniform
            // and makes the broadcast symbol independent of the map.
            let s_a = rs.message(order);
            let s_r = rs.message(order);
            let s_b = self.inverse[s_a * order + s_r];
            let h = rs.complex_gaussian();
            let y = h * p[s_r] + rs.complex_gaussian() * amp;
            errors += (bc_decode(y, h, s_a, &self.constellation, &self.map) != s_b) as u64;
        }
        errors
    }

    fn e2e_errors(&self, trials: Range<u64>, ns: NoiseSpec) -> u64 {
        let mut ws = self.workspace();
        let p = self.constellation.points();
        let amp = ns.amplitude();
        let mut errors = 0;
        for t in trials {
            let mut rs = self.factory.stream(t);
            let (s_a, s_b, ncs, _) = self.ma_trial(&mut ws, &mut rs, ns);
            let h = rs.complex_gaussian();
            let y = h * p[ncs] + rs.complex_gaussian() * amp;
            errors += (bc_decode(y, h, s_a, &self.constellation, &self.map) != s_b) as u64;
        }
        errors
    }

    fn count(&self, phase: Phase, trials: Range<u64>, ns: NoiseSpec) -> u64 {
        match phase {
            Phase::Ma => self.ma_errors(trials, ns),
            Phase::Bc => self.bc_errors(trials, ns),
            Phase::E2e => self.e2e_errors(trials, ns),
        }
    }

    fn run_phase(&self, phase: Phase, snr_db: f64) -> SerEstimate {
        let ns = NoiseSpec::from_snr_db(snr_db);
        let (max_trials, target) = (self.cfg.max_trials, self.cfg.target_errors);
        let (mut trials, mut errors) = (0u64, 0u64);
        let mut round_chunks = 1u64;
        'rounds: while trials < max_trials && errors < target {
            let mut chunks = Vec::with_capacity(round_chunks as usize);
            let mut start = trials;
            while chunks.len() < round_chunks as usize && start < max_trials {
                let end = (start + CHUNK_TRIALS).min(max_trials);
                chunks.push(start..end);
                start = end;
            }
            let counts = self
                .executor
                .map_chunks(&chunks, |range| self.count(phase, range, ns));
            for (range, e) in chunks.iter().zip(counts) {
                trials = range.end;
                errors += e;
                if errors >= target {
                    break 'rounds;
                }
            }
            round_chunks = (round_chunks * 2).min(MAX_ROUND_CHUNKS);
        }
        SerEstimate::new(snr_db, trials, errors)
    }

    /// One SNR point of the configured phase.
    pub fn run_point(&self, snr_db: f64) -> SerEstimate {
        self.run_phase(self.cfg.phase, snr_db)
    }

    /// BC-phase point regardless of the configured phase.
    pub fn run_bc_point(&self, snr_db: f64) -> SerEstimate {
        self.run_phase(Phase::Bc, snr_db)
    }

    /// Runs every point of the sweep, handing each to `on_point` as it completes.
    pub fn run_sweep_with(&self, mut on_point: impl FnMut(&SerEstimate)) -> Vec<SerEstimate> {
        self.cfg
            .sweep
            .points()
            .into_iter()
            .map(|snr| {
                let est = self.run_point(snr);
                on_point(&est);
                est
            })
            .collect()
    }

    pub fn run_sweep(&self) -> Vec<SerEstimate> {
        self.run_sweep_with(|_| {})
    }
}

pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<SerEstimate> {
    Ok(Simulator::new(cfg.clone())?.run_point(snr_db))
}

pub fn run_bc_point(cfg: &SimConfig, snr_db: f64) -> Result<SerEstimate> {
    Ok(Simulator::new(cfg.clone())?.run_bc_point(snr_db))
}

pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SerEstimate>> {
    Ok(Simulator::new(cfg.clone())?.run_sweep())
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    scheme: &'a str,
    na: usize,
    nb: usize,
    nr: usize,
    #[serde(rename = "mod")]
    modulation: &'a str,
    metric: &'a str,
    snr_db: String,
    trials: u64,
    errors: u64,
    ser: String,
    ci95: String,
}

/// Streams sweep results as CSV, header first.
pub struct SweepWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SweepWriter<W> {
    pub fn new(out: W) -> Self {
        SweepWriter {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(out),
        }
    }

    pub fn write(&mut self, cfg: &SimConfig, est: &SerEstimate) -> Result<()> {
        self.inner.serialize(CsvRow {
            scheme: cfg.scheme.token(),
            na: cfg.n_a,
            nb: cfg.n_b,
            nr: cfg.n_r,
            modulation: cfg.modulation.token(),
            metric: cfg.metric_label(),
            snr_db: format!("{}", est.snr_db),
            trials: est.trials,
            errors: est.errors,
            ser: format!("{:.6e}", est.ser),
            ci95: format!("{:.6e}", est.ci95),
        })?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub const CSV_HEADER: &str = "scheme,na,nb,nr,mod,metric,snr_db,trials,errors,ser,ci95";
