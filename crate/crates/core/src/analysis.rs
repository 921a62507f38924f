//! Closed-form security probabilities and Monte Carlo estimates of them.
//!
//! Trials run in parallel on rayon; trial `i` always draws from stream `i`
//! under the experiment seed, so an estimate is a pure function of its
//! configuration.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{run_trial, CheatOutcome, Strategy, StrategyConfig};
use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::quantum::distinguish_probability;
use crate::rng::{derive_seed, stream};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Standard errors allowed between an estimate and its closed form.
pub const TOLERANCE_SE: f64 = 4.0;

pub const MIN_TRIALS: usize = 100;

/// Probability that one rotated-basis cheat at `θ = π/8` is caught:
/// `(1 − (2+√2)/4)/2 = (2−√2)/8`.
pub fn per_photon_detection() -> f64 {
    (2.0 - SQRT_2) / 8.0
}

/// Detection probability when cheating on `m` photons at the optimal angle:
/// `1 − ((6+√2)/8)^m`.
pub fn detection_formula(m: u32) -> f64 {
    1.0 - ((6.0 + SQRT_2) / 8.0).powi(m as i32)
}

/// Same as [`detection_formula`] for an arbitrary measurement angle.
pub fn detection_at(theta: f64, m: u32) -> f64 {
    1.0 - (1.0 - (1.0 - distinguish_probability(theta)) / 2.0).powi(m as i32)
}

/// Per-photon success of the curious basis-inference rule.
pub const CURIOUS_RATE: f64 = 0.75;

/// Per-photon success of optimal discrimination of `|0⟩` vs `|+⟩`.
pub fn helstrom_rate() -> f64 {
    0.5 + SQRT_2 / 4.0
}

/// `((3/4)^(n−d), (1/2+√2/4)^(n−d))`.
pub fn sealing_formulas(n: usize, d: usize) -> Result<(f64, f64)> {
    if d > n {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds n = {n}")));
    }
    let e = (n - d) as i32;
    Ok((CURIOUS_RATE.powi(e), helstrom_rate().powi(e)))
}

/// `P(X ≥ m)` for `X ~ Binomial(n, p)`.
pub fn binomial_tail(n: usize, p: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mut term = (1.0 - p).powi(n as i32); // P(X = 0)
    let mut below = 0.0;
    for k in 0..m {
        below += term;
        term *= (n - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
    }
    (1.0 - below).clamp(0.0, 1.0)
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// `|estimate − p| ≤ 4·√(p(1−p)/trials)`.
pub fn within_tolerance(estimate: f64, closed_form: f64, trials: u64) -> bool {
    let se = (closed_form * (1.0 - closed_form) / trials as f64).sqrt();
    (estimate - closed_form).abs() <= TOLERANCE_SE * se + 1e-12
}

/// What is counted in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Trials Bob accepted.
    Accepted,
    /// Trials where cheating was caught.
    Detected,
    CheatSucceeded,
    /// Per-photon `guessed_correctly` flags.
    PhotonGuess,
    /// Per-photon detection among cheated photons.
    PhotonDetected,
    /// Free positions among double pulses.
    FreePulse,
    /// Bob guessed all of the first `n − d` positions.
    SealingWindow,
    /// Bob's decoded bit guess was right.
    BitGuess,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Accepted,
        Metric::Detected,
        Metric::CheatSucceeded,
        Metric::PhotonGuess,
        Metric::PhotonDetected,
        Metric::FreePulse,
        Metric::SealingWindow,
        Metric::BitGuess,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accepted => "accepted",
            Metric::Detected => "detected",
            Metric::CheatSucceeded => "cheat_succeeded",
            Metric::PhotonGuess => "photon_guess",
            Metric::PhotonDetected => "photon_detected",
            Metric::FreePulse => "free_pulse",
            Metric::SealingWindow => "sealing_window",
            Metric::BitGuess => "bit_guess",
        }
    }

    /// The natural headline metric of a strategy.
    pub fn default_for(strategy: &Strategy) -> Metric {
        match strategy {
            Strategy::Honest { .. } => Metric::Accepted,
            Strategy::ThetaAlice { .. } | Strategy::SlyAlice => Metric::Detected,
            Strategy::MultiPhotonAlice { .. } => Metric::CheatSucceeded,
            Strategy::CuriousBob | Strategy::EntanglingBob => Metric::PhotonGuess,
        }
    }

    fn applies_to(self, strategy: &Strategy) -> bool {
        let bob = matches!(strategy, Strategy::CuriousBob | Strategy::EntanglingBob);
        match self {
            Metric::Accepted | Metric::Detected | Metric::CheatSucceeded => true,
            Metric::PhotonGuess => !matches!(strategy, Strategy::Honest { .. } | Strategy::MultiPhotonAlice { .. }),
            Metric::PhotonDetected => {
                matches!(strategy, Strategy::ThetaAlice { .. } | Strategy::SlyAlice | Strategy::MultiPhotonAlice { .. })
            }
            Metric::FreePulse => matches!(strategy, Strategy::MultiPhotonAlice { .. }),
            Metric::SealingWindow | Metric::BitGuess => bob,
        }
    }

    /// `(successes, opportunities)` contributed by one trial.
    fn count(self, out: &CheatOutcome, code: &LinearCode) -> (u64, u64) {
        let flag = |b: bool| (b as u64, 1);
        match self {
            Metric::Accepted => flag(!out.detected),
            Metric::Detected => flag(out.detected),
            Metric::CheatSucceeded => flag(out.cheat_succeeded),
            Metric::PhotonGuess => {
                let hits = out.per_photon.iter().filter(|p| p.guessed_correctly).count();
                (hits as u64, out.per_photon.len() as u64)
            }
            Metric::PhotonDetected => {
                let cheated: Vec<_> = out.per_photon.iter().filter(|p| p.cheated).collect();
                let hits = cheated.iter().filter(|p| p.detected).count();
                (hits as u64, cheated.len() as u64)
            }
            Metric::FreePulse => (out.free_positions as u64, out.double_pulses as u64),
            Metric::SealingWindow => {
                let window = code.n() - code.d();
                flag(out.per_photon.iter().take(window).all(|p| p.guessed_correctly))
            }
            Metric::BitGuess => flag(out.bit_guess_correct.unwrap_or(false)),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Exact value of `metric` under `config`, where one is known.
pub fn closed_form(config: &StrategyConfig, metric: Metric) -> Option<f64> {
    let n = config.code.n();
    let d = config.code.d();
    let noiseless = config.channel.is_noiseless();
    match (config.strategy, metric) {
        (Strategy::Honest { .. }, Metric::Accepted) if noiseless => Some(1.0),
        (Strategy::Honest { .. }, Metric::Detected) if noiseless => Some(0.0),
        (Strategy::ThetaAlice { theta, .. }, Metric::PhotonGuess) => Some(distinguish_probability(theta)),
        (Strategy::ThetaAlice { theta, .. }, Metric::PhotonDetected) => {
            Some((1.0 - distinguish_probability(theta)) / 2.0)
        }
        (Strategy::ThetaAlice { theta, flips }, Metric::Detected) => Some(detection_at(theta, flips as u32)),
        (Strategy::ThetaAlice { theta, flips }, Metric::Accepted | Metric::CheatSucceeded) => {
            Some(1.0 - detection_at(theta, flips as u32))
        }
        // The sly opening claims the basis Alice did not measure in.
        (Strategy::SlyAlice, Metric::PhotonDetected) => Some(0.25),
        (Strategy::MultiPhotonAlice { .. }, Metric::FreePulse) if config.channel.eta_m > 0.0 => Some(0.5),
        (Strategy::MultiPhotonAlice { flips }, Metric::CheatSucceeded) => {
            Some(binomial_tail(n, config.channel.eta_m / 2.0, flips))
        }
        (Strategy::CuriousBob, Metric::PhotonGuess) => Some(CURIOUS_RATE),
        (Strategy::CuriousBob, Metric::CheatSucceeded) => Some(CURIOUS_RATE.powi(n as i32)),
        (Strategy::CuriousBob, Metric::SealingWindow) => Some(CURIOUS_RATE.powi((n - d) as i32)),
        (Strategy::EntanglingBob, Metric::PhotonGuess) => Some(helstrom_rate()),
        (Strategy::EntanglingBob, Metric::CheatSucceeded) => Some(helstrom_rate().powi(n as i32)),
        (Strategy::EntanglingBob, Metric::SealingWindow) => Some(helstrom_rate().powi((n - d) as i32)),
        _ => None,
    }
}

/// Monte Carlo counts for one metric, with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    /// Swept parameter value, if any.
    pub param: Option<f64>,
    pub metric: Metric,
    /// Protocol runs executed.
    pub runs: u64,
    /// Opportunities counted (runs, or photons for per-photon metrics).
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub closed_form: Option<f64>,
    /// `None` when there is no closed form to compare against.
    pub within_tolerance: Option<bool>,
}

impl TrialStats {
    pub fn from_counts(metric: Metric, runs: u64, successes: u64, trials: u64, closed: Option<f64>) -> Self {
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let (ci_low, ci_high) = wilson_interval(successes, trials);
        TrialStats {
            param: None,
            metric,
            runs,
            trials,
            successes,
            estimate,
            ci_low,
            ci_high,
            closed_form: closed,
            within_tolerance: closed.map(|p| trials > 0 && within_tolerance(estimate, p, trials)),
        }
    }

    pub fn standard_error(&self) -> f64 {
        let p = self.closed_form.unwrap_or(self.estimate);
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Runs `config.trials` independent trials and counts `metric`.
pub fn estimate(config: &StrategyConfig, metric: Metric) -> Result<TrialStats> {
    config.validate()?;
    if config.trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("at least {MIN_TRIALS} trials required, got {}", config.trials)));
    }
    if !metric.applies_to(&config.strategy) {
        return Err(Error::MetricNotApplicable {
            metric: metric.to_string(),
            strategy: config.strategy.name().to_string(),
        });
    }
    let (successes, trials) = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, i);
            run_trial(config, &mut rng).map(|out| metric.count(&out, &config.code))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(TrialStats::from_counts(metric, config.trials as u64, successes, trials, closed_form(config, metric)))
}

/// The parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Theta,
    M,
    NMinusD,
    EtaM,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Theta => "theta",
            SweepParam::M => "m",
            SweepParam::NMinusD => "n_minus_d",
            SweepParam::EtaM => "eta_m",
        }
    }

    /// Strategy swept when the caller does not choose one.
    pub fn default_strategy(self) -> Strategy {
        match self {
            SweepParam::Theta => Strategy::ThetaAlice { theta: 0.0, flips: 1 },
            SweepParam::M => Strategy::ThetaAlice { theta: std::f64::consts::FRAC_PI_8, flips: 1 },
            SweepParam::NMinusD => Strategy::CuriousBob,
            SweepParam::EtaM => Strategy::MultiPhotonAlice { flips: 1 },
        }
    }

    pub fn default_metric(self, strategy: &Strategy) -> Metric {
        match self {
            SweepParam::Theta => Metric::PhotonDetected,
            SweepParam::M => Metric::default_for(strategy),
            SweepParam::NMinusD => Metric::SealingWindow,
            SweepParam::EtaM => Metric::CheatSucceeded,
        }
    }

    /// `base` with this parameter set to `value`.
    ///
    /// `n_minus_d = g` switches to the single-parity code of length `g + 2`.
    pub fn apply(self, base: &StrategyConfig, value: f64) -> Result<StrategyConfig> {
        let bad = |why: &str| Error::InvalidParameter(format!("{} = {value}: {why}", self.as_str()));
        let as_count = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(bad("must be a non-negative integer"))
            }
        };
        let mut cfg = base.clone();
        match (self, &mut cfg.strategy) {
            (SweepParam::Theta, Strategy::ThetaAlice { theta, .. }) => *theta = value,
            (SweepParam::M, Strategy::ThetaAlice { flips, .. } | Strategy::MultiPhotonAlice { flips }) => {
                *flips = as_count()?
            }
            (SweepParam::NMinusD, Strategy::CuriousBob | Strategy::EntanglingBob) => {
                cfg.code = LinearCode::single_parity(as_count()? + 2)?;
            }
            (SweepParam::EtaM, Strategy::MultiPhotonAlice { .. }) => {
                cfg.channel.eta_m = value;
                cfg.channel.validate()?;
            }
            _ => return Err(bad(&format!("not applicable to {}", base.strategy.name()))),
        }
        Ok(cfg)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(SweepParam::Theta),
            "m" | "flips" => Ok(SweepParam::M),
            "n_minus_d" | "n-minus-d" => Ok(SweepParam::NMinusD),
            "eta_m" | "eta-m" => Ok(SweepParam::EtaM),
            _ => Err(Error::InvalidParameter(format!("unknown sweep parameter '{s}'"))),
        }
    }
}

/// One estimate per grid value. Point `j` runs under a seed derived from
/// `(base.seed, j)`.
pub fn sweep(param: SweepParam, grid: &[f64], base: &StrategyConfig, metric: Metric) -> Result<Vec<TrialStats>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(j, &value)| {
            let mut cfg = param.apply(base, value)?;
            cfg.seed = derive_seed(base.seed, j as u64);
            let mut stats = estimate(&cfg, metric)?;
            stats.param = Some(value);
            Ok(stats)
        })
        .collect()
}

/// `points` evenly spaced values on the half-open interval `[from, to)`.
pub fn half_open_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    let step = (to - from) / points as f64;
    (0..points).map(|j| from + j as f64 * step).collect()
}

#[derive(Serialize)]
struct CsvRow {
    param: Option<f64>,
    metric: Metric,
    trials: u64,
    successes: u64,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
    closed_form: Option<f64>,
    within_tolerance: Option<bool>,
}

/// Writes rows with the columns
/// `param,metric,trials,successes,estimate,ci_low,ci_high,closed_form,within_tolerance`.
pub fn write_csv<W: Write>(rows: &[TrialStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            param: r.param,
            metric: r.metric,
            trials: r.trials,
            successes: r.successes,
            estimate: r.estimate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            closed_form: r.closed_form,
            within_tolerance: r.within_tolerance,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
