use std::f64::consts::{FRAC_PI_8, PI};

use qbc_core::adversary::{Strategy, StrategyConfig};
use qbc_core::analysis::{
    closed_form, detection_formula, estimate, half_open_grid, helstrom_rate, sweep, wilson_interval, Metric,
    SweepParam, CURIOUS_RATE,
};
use qbc_core::codes::LinearCode;
use qbc_core::protocol::ChannelParams;
use qbc_core::quantum::distinguish_probability;
use qbc_core::rng::seeded;
use rand::Rng;

fn four_se(p: f64, n: u64) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn wilson_interval_coverage() {
    let mut rng = seeded(2024);
    let p = 0.3;
    let n = 400;
    let covered = (0..100)
        .filter(|_| {
            let s = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(s, n);
            lo <= p && p <= hi
        })
        .count();
    assert!(covered >= 93, "{covered}/100");
}

#[test]
fn estimates_are_deterministic_per_seed() {
    let cfg = StrategyConfig::new(Strategy::ThetaAlice { theta: FRAC_PI_8, flips: 2 }, LinearCode::hamming74(), 2_000, 9);
    let a = estimate(&cfg, Metric::Detected).unwrap();
    let b = estimate(&cfg, Metric::Detected).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| estimate(&cfg, Metric::Detected).unwrap());
    assert_eq!(a, c);
    let mut other = cfg.clone();
    other.seed = 10;
    assert_ne!(a.successes, estimate(&other, Metric::Detected).unwrap().successes);
}

#[test]
fn theta_sweep_minimized_near_pi_over_8() {
    let base = StrategyConfig::new(Strategy::ThetaAlice { theta: 0.0, flips: 1 }, LinearCode::hamming74(), 100_000, 77);
    let grid = half_open_grid(0.0, PI, 32);
    let rows = sweep(SweepParam::Theta, &grid, &base, Metric::PhotonDetected).unwrap();
    for (theta, row) in grid.iter().zip(&rows) {
        let p = (1.0 - distinguish_probability(*theta)) / 2.0;
        assert!((row.estimate - p).abs() <= four_se(p, row.trials), "theta={theta}: {} vs {p}", row.estimate);
    }
    let argmin = rows.iter().enumerate().min_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate)).unwrap().0;
    assert_eq!(grid[argmin], PI / 8.0);
}

#[test]
fn aggregate_detection_over_m() {
    for m in 1..=8u32 {
        let cfg = StrategyConfig::new(
            Strategy::ThetaAlice { theta: FRAC_PI_8, flips: m as usize },
            LinearCode::hamming84(),
            20_000,
            100 + m as u64,
        );
        let row = estimate(&cfg, Metric::Detected).unwrap();
        let p = detection_formula(m);
        assert_eq!(row.closed_form, Some(p));
        assert!((row.estimate - p).abs() <= four_se(p, row.trials), "m={m}: {} vs {p}", row.estimate);
    }
}

#[test]
fn sealing_rates_bounded() {
    let code = LinearCode::hamming74();
    for (strategy, bound) in [(Strategy::EntanglingBob, helstrom_rate()), (Strategy::CuriousBob, CURIOUS_RATE)] {
        let cfg = StrategyConfig::new(strategy, code.clone(), 10_000, 5);
        let row = estimate(&cfg, Metric::PhotonGuess).unwrap();
        assert!(row.estimate <= bound + four_se(bound, row.trials), "{}: {}", strategy.name(), row.estimate);
        let full = estimate(&cfg, Metric::CheatSucceeded).unwrap();
        let cf = bound.powi(code.n() as i32);
        assert!(full.estimate <= cf + four_se(cf, full.trials));
    }
}

#[test]
fn zeroed_adversaries_behave_honestly() {
    let code = LinearCode::hamming74();
    let strategies = [
        Strategy::Honest { bit: 1 },
        Strategy::ThetaAlice { theta: FRAC_PI_8, flips: 0 },
        Strategy::MultiPhotonAlice { flips: 0 },
    ];
    for strategy in strategies {
        let cfg = StrategyConfig::new(strategy, code.clone(), 2_000, 3).with_channel(ChannelParams::noiseless());
        let row = estimate(&cfg, Metric::Accepted).unwrap();
        assert_eq!(row.successes, row.trials, "{}", strategy.name());
    }
}

#[test]
fn sweep_points_use_distinct_seeds() {
    let base = StrategyConfig::new(Strategy::CuriousBob, LinearCode::hamming74(), 500, 1);
    let rows = sweep(SweepParam::NMinusD, &[3.0, 3.0], &base, Metric::SealingWindow).unwrap();
    assert_ne!(rows[0].successes, rows[1].successes);
    assert_eq!(rows[0].closed_form, closed_form(&SweepParam::NMinusD.apply(&base, 3.0).unwrap(), Metric::SealingWindow));
}
