//! Cheating strategies for both parties.
//!
//! Dishonest Alices plug into the protocol engine through [`AliceRole`] and are
//! judged by the ordinary verifier. Dishonest Bobs run against an honest Alice
//! and try to learn her codeword before the opening.

use std::f64::consts::FRAC_PI_8;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{partition, sample_r, sly_intermediate, BitString, LinearCode, Partition};
use crate::error::{Error, Result};
use crate::protocol::{
    apply_channel, bob_prepare, failures, run_protocol, run_session, AliceRole, ChannelParams, Check, HonestAlice,
    Opening, PulseKind, Transcript, VerifyPolicy,
};
use crate::quantum::{
    bell_pair, density_of, helstrom_measurement, measure, measure_qubit, rotated_basis, Basis, Bb84Basis, Bb84Label,
    PureState,
};

/// Which party cheats, and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Both parties honest.
    Honest { bit: u8 },
    /// Alice measures `flips` random positions in a rotated basis and opens
    /// them toward a codeword of her choosing.
    ThetaAlice { theta: f64, flips: usize },
    /// Alice commits to a string between the two partition halves.
    SlyAlice,
    /// Alice exploits double pulses, falling back to rotated measurements.
    MultiPhotonAlice { flips: usize },
    /// Bob infers Alice's bases from his own preparation and `o′`.
    CuriousBob,
    /// Bob sends halves of Bell pairs and discriminates his residual qubits.
    EntanglingBob,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Honest { .. } => "honest",
            Strategy::ThetaAlice { .. } => "theta-alice",
            Strategy::SlyAlice => "sly-alice",
            Strategy::MultiPhotonAlice { .. } => "multiphoton-alice",
            Strategy::CuriousBob => "curious-bob",
            Strategy::EntanglingBob => "entangling-bob",
        }
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub code: LinearCode,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelParams,
    pub policy: VerifyPolicy,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, code: LinearCode, trials: usize, seed: u64) -> Self {
        StrategyConfig {
            strategy,
            code,
            trials,
            seed,
            channel: ChannelParams::noiseless(),
            policy: VerifyPolicy::default(),
        }
    }

    pub fn with_channel(mut self, channel: ChannelParams) -> Self {
        self.channel = channel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.channel.validate()?;
        match self.strategy {
            Strategy::Honest { bit } if bit > 1 => Err(Error::InvalidParameter(format!("bit {bit}"))),
            Strategy::ThetaAlice { theta, .. } if !theta.is_finite() => {
                Err(Error::InvalidParameter("theta must be finite".into()))
            }
            Strategy::ThetaAlice { flips, .. } if flips > self.code.n() => Err(Error::InvalidParameter(format!(
                "flips = {flips} exceeds n = {}",
                self.code.n()
            ))),
            _ => Ok(()),
        }
    }
}

/// Per-photon bookkeeping of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhotonRecord {
    pub index: usize,
    pub cheated: bool,
    pub detected: bool,
    /// Alice: her set claim was right. Bob: his guess of `cᵢ` was right.
    /// Double pulses: the position was free.
    pub guessed_correctly: bool,
}

/// Result of one adversarial trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheatOutcome {
    pub detected: bool,
    pub cheat_succeeded: bool,
    pub per_photon: Vec<PhotonRecord>,
    /// Present when the trial produced a verified transcript.
    pub transcript: Option<Transcript>,
    /// Positions Alice had to change at opening.
    pub flips: usize,
    pub double_pulses: usize,
    pub free_positions: usize,
    /// Bob's decoded guess of the committed bit was right.
    pub bit_guess_correct: Option<bool>,
}

fn random_bit<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random_range(0..2)
}

fn preparation_failures(t: &Transcript, code: &LinearCode) -> Result<Vec<bool>> {
    let mut hit = vec![false; t.n()];
    for f in failures(t, code)? {
        if let (Check::Preparation, Some(i)) = (f.check, f.index) {
            hit[i] = true;
        }
    }
    Ok(hit)
}

/// Alice measuring `flips` positions in `rotated_basis(theta)` and opening
/// a codeword from `C_target`.
///
/// Rotated outcome 0 is announced as the `{|0⟩,|+⟩}` set, outcome 1 as
/// `{|1⟩,|−⟩}`. At opening every position claims the basis of the target
/// codeword and the label in it that matches the announcement.
#[derive(Debug, Clone)]
pub struct ThetaAlice {
    theta: f64,
    flips: usize,
    target: u8,
    designated: Vec<usize>,
    opening: Option<Opening>,
}

impl ThetaAlice {
    pub fn new(theta: f64, flips: usize, target: u8) -> Self {
        ThetaAlice { theta, flips, target, designated: Vec::new(), opening: None }
    }

    pub fn designated(&self) -> &[usize] {
        &self.designated
    }
}

impl AliceRole for ThetaAlice {
    fn announce<R: Rng + ?Sized>(&mut self, p: &Partition, photons: &[PureState], rng: &mut R) -> Result<BitString> {
        let n = p.n();
        if self.flips > n {
            return Err(Error::InvalidParameter(format!("flips = {} exceeds n = {n}", self.flips)));
        }
        let target = p.choose(self.target, rng)?;
        let mut designated = sample(rng, n, self.flips).into_vec();
        designated.sort_unstable();
        let rotated = rotated_basis(self.theta);
        let mut o = Vec::with_capacity(n);
        for (i, photon) in photons.iter().enumerate() {
            let basis = Bb84Basis::from_bit(target.get(i));
            let set_bit = if designated.binary_search(&i).is_ok() {
                measure(photon, &rotated, rng)?.0 as u8
            } else {
                measure(photon, &basis.basis(), rng)?.0 as u8
            };
            o.push(Bb84Label::from_basis_and_set(basis, set_bit));
        }
        let o_prime = BitString::new(o.iter().map(|l| l.set_bit()).collect())?;
        self.designated = designated;
        self.opening = Some(Opening { b: self.target, o, c: target });
        Ok(o_prime)
    }

    fn open(&mut self) -> Result<Opening> {
        self.opening.take().ok_or(Error::State("nothing to open"))
    }
}

/// Runs one session with a [`ThetaAlice`] aiming at a random bit.
pub fn theta_alice_trial<R: Rng + ?Sized>(theta: f64, m: usize, code: &LinearCode, rng: &mut R) -> Result<CheatOutcome> {
    if m > code.n() {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds n = {}", code.n())));
    }
    let mut alice = ThetaAlice::new(theta, m, random_bit(rng));
    let t = run_protocol(code, &mut alice, rng)?;
    let caught = preparation_failures(&t, code)?;
    let per_photon = alice
        .designated()
        .iter()
        .map(|&i| PhotonRecord {
            index: i,
            cheated: true,
            detected: caught[i],
            guessed_correctly: t.o_prime.get(i) == t.sent[i].set_bit(),
        })
        .collect();
    let accepted = t.verdict.is_some_and(|v| v.is_accept());
    Ok(CheatOutcome {
        detected: !accepted,
        cheat_succeeded: accepted,
        per_photon,
        transcript: Some(t),
        flips: m,
        ..CheatOutcome::default()
    })
}

/// Alice committing to the intermediate string `c′` and opening whichever bit
/// she wants later.
#[derive(Debug, Clone)]
pub struct SlyAlice {
    target: u8,
    measured: Option<(BitString, Vec<Bb84Label>, BitString)>,
    nearest: Option<(BitString, usize)>,
}

impl SlyAlice {
    pub fn new(target: u8) -> Self {
        SlyAlice { target, measured: None, nearest: None }
    }
}

impl AliceRole for SlyAlice {
    fn announce<R: Rng + ?Sized>(&mut self, p: &Partition, photons: &[PureState], rng: &mut R) -> Result<BitString> {
        if p.side_len(self.target) == 0 {
            return Err(Error::InvalidR(p.r().to_string()));
        }
        let w = sly_intermediate(p)?.word;
        let mut o = Vec::with_capacity(p.n());
        for (i, photon) in photons.iter().enumerate() {
            let basis = Bb84Basis::from_bit(w.get(i));
            o.push(Bb84Label::from_outcome(basis, measure(photon, &basis.basis(), rng)?.0));
        }
        let o_prime = BitString::new(o.iter().map(|l| l.set_bit()).collect())?;
        self.nearest = Some(p.nearest(self.target, &w)?);
        self.measured = Some((w, o, o_prime.clone()));
        Ok(o_prime)
    }

    fn open(&mut self) -> Result<Opening> {
        let (_, mut o, o_prime) = self.measured.take().ok_or(Error::State("nothing to open"))?;
        let (c, _) = self.nearest.take().ok_or(Error::State("nothing to open"))?;
        for (i, label) in o.iter_mut().enumerate() {
            let basis = Bb84Basis::from_bit(c.get(i));
            if label.basis() != basis {
                *label = Bb84Label::from_basis_and_set(basis, o_prime.get(i));
            }
        }
        Ok(Opening { b: self.target, o, c })
    }
}

/// Runs one session with a [`SlyAlice`] opening `target_bit`.
pub fn sly_alice_trial<R: Rng + ?Sized>(code: &LinearCode, target_bit: u8, rng: &mut R) -> Result<CheatOutcome> {
    let mut alice = SlyAlice::new(target_bit);
    let t = run_protocol(code, &mut alice, rng)?;
    let p = partition(code, &t.r)?;
    let w = sly_intermediate(&p)?.word;
    let caught = preparation_failures(&t, code)?;
    let per_photon: Vec<PhotonRecord> = (0..t.n())
        .filter(|&i| w.get(i) != t.c.get(i))
        .map(|i| PhotonRecord {
            index: i,
            cheated: true,
            detected: caught[i],
            guessed_correctly: t.o_prime.get(i) == t.sent[i].set_bit(),
        })
        .collect();
    let accepted = t.verdict.is_some_and(|v| v.is_accept());
    Ok(CheatOutcome {
        detected: !accepted,
        cheat_succeeded: accepted,
        flips: per_photon.len(),
        per_photon,
        transcript: Some(t),
        ..CheatOutcome::default()
    })
}

/// Curious Bob's guess of Alice's basis: the basis in which the state he sent
/// belongs to the set she announced.
pub fn curious_bob_infer(sent: Bb84Label, announced: u8) -> Bb84Basis {
    if sent.set_bit() == announced {
        sent.basis()
    } else {
        sent.basis().other()
    }
}

/// Decodes a guessed string to the nearest codeword and reads off its bit.
fn decode_bit(code: &LinearCode, r: &BitString, guess: &BitString) -> Result<u8> {
    let p = partition(code, r)?;
    let (c0, d0) = p.nearest(0, guess)?;
    let (c1, d1) = p.nearest(1, guess)?;
    Ok(if (d0, &c0) <= (d1, &c1) { 0 } else { 1 })
}

fn bob_outcome(
    code: &LinearCode,
    r: &BitString,
    b: u8,
    c: &BitString,
    guesses: Vec<u8>,
) -> Result<CheatOutcome> {
    let per_photon: Vec<PhotonRecord> = guesses
        .iter()
        .enumerate()
        .map(|(i, &g)| PhotonRecord { index: i, cheated: true, detected: false, guessed_correctly: g == c.get(i) })
        .collect();
    let guess = BitString::new(guesses)?;
    Ok(CheatOutcome {
        detected: false,
        cheat_succeeded: per_photon.iter().all(|p| p.guessed_correctly),
        per_photon,
        bit_guess_correct: Some(decode_bit(code, r, &guess)? == b),
        ..CheatOutcome::default()
    })
}

/// One honest session observed by a curious Bob.
pub fn curious_bob_trial<R: Rng + ?Sized>(code: &LinearCode, rng: &mut R) -> Result<CheatOutcome> {
    let b = random_bit(rng);
    let mut alice = HonestAlice::new(b)?;
    let t = run_protocol(code, &mut alice, rng)?;
    let guesses = t.sent.iter().enumerate().map(|(i, &s)| curious_bob_infer(s, t.o_prime.get(i)).bit()).collect();
    let mut out = bob_outcome(code, &t.r, b, &t.c, guesses)?;
    out.transcript = Some(t);
    Ok(out)
}

/// How entangling Bob reads his residual qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobGuess {
    Helstrom,
    /// Coin flip; the no-information baseline.
    Random,
}

/// Helstrom bases for the residual pairs `(|0⟩, |+⟩)` and `(|1⟩, |−⟩)`,
/// indexed by the announced bit. Outcome 0 means "Z basis".
fn residual_bases() -> Result<[Basis; 2]> {
    let rho = |l: Bb84Label| density_of(&l.state());
    Ok([
        helstrom_measurement(&rho(Bb84Label::Zero)?, &rho(Bb84Label::Plus)?)?,
        helstrom_measurement(&rho(Bb84Label::One)?, &rho(Bb84Label::Minus)?)?,
    ])
}

/// Bob sends one half of `|Φ⁺⟩` per position; after Alice's announcement he
/// measures his half to guess `cᵢ`.
pub fn entangling_bob_trial<R: Rng + ?Sized>(code: &LinearCode, guess: BobGuess, rng: &mut R) -> Result<CheatOutcome> {
    let bases = residual_bases()?;
    let b = random_bit(rng);
    let r = sample_r(code, rng)?;
    let p = partition(code, &r)?;
    let c = p.choose(b, rng)?;
    let mut guesses = Vec::with_capacity(code.n());
    for i in 0..code.n() {
        let alice_basis = Bb84Basis::from_bit(c.get(i));
        let (k, residual) = measure_qubit(&bell_pair(), 0, &alice_basis.basis(), rng)?;
        let announced = Bb84Label::from_outcome(alice_basis, k).set_bit();
        let g = match guess {
            BobGuess::Helstrom => measure(&residual, &bases[announced as usize], rng)?.0 as u8,
            BobGuess::Random => random_bit(rng),
        };
        guesses.push(g);
    }
    bob_outcome(code, &r, b, &c, guesses)
}

/// Alice exploiting a multi-photon source.
///
/// Each double pulse is measured once in Z and once in X; when both outcomes
/// fall in the same announcement set the position is free and can be opened
/// either way. Alice needs `m` changeable positions: she uses free ones first
/// and makes up the rest with `θ = π/8` rotated measurements on randomly
/// chosen other positions, each of which risks detection.
pub fn multiphoton_alice_trial<R: Rng + ?Sized>(
    code: &LinearCode,
    channel: &ChannelParams,
    m: usize,
    rng: &mut R,
) -> Result<CheatOutcome> {
    channel.validate()?;
    let sent = bob_prepare(code.n(), rng)?;
    let pulses = apply_channel(&sent, channel, rng);
    let mut per_photon = Vec::new();
    let mut free = Vec::new();
    let mut doubles = 0;
    for (i, pulse) in pulses.iter().enumerate() {
        if pulse.kind != PulseKind::Double {
            continue;
        }
        doubles += 1;
        let state = pulse.label.state();
        let z = measure(&state, &Basis::Z, rng)?.0;
        let x = measure(&state, &Basis::X, rng)?.0;
        let is_free = z == x;
        if is_free {
            free.push(i);
        }
        per_photon.push(PhotonRecord { index: i, cheated: false, detected: false, guessed_correctly: is_free });
    }
    let used = free.len().min(m);
    for &i in &free[..used] {
        if let Some(rec) = per_photon.iter_mut().find(|r| r.index == i) {
            rec.cheated = true;
        }
    }
    // Forced positions: delivered single photons.
    let candidates: Vec<usize> =
        pulses.iter().enumerate().filter(|(_, p)| p.kind == PulseKind::Single).map(|(i, _)| i).collect();
    let forced = (m - used).min(candidates.len());
    let rotated = rotated_basis(FRAC_PI_8);
    let mut detected = false;
    for pick in sample(rng, candidates.len(), forced).into_vec() {
        let i = candidates[pick];
        let s = pulses[i].label;
        let claim = measure(&s.state(), &rotated, rng)?.0 as u8;
        let claimed_basis = Bb84Basis::from_bit(random_bit(rng));
        let caught = s.basis() == claimed_basis && s.set_bit() != claim;
        detected |= caught;
        per_photon.push(PhotonRecord { index: i, cheated: true, detected: caught, guessed_correctly: claim == s.set_bit() });
    }
    Ok(CheatOutcome {
        detected,
        cheat_succeeded: free.len() >= m,
        per_photon,
        flips: m,
        double_pulses: doubles,
        free_positions: free.len(),
        ..CheatOutcome::default()
    })
}

/// Dispatches one trial of `config`.
pub fn run_trial<R: Rng + ?Sized>(config: &StrategyConfig, rng: &mut R) -> Result<CheatOutcome> {
    let code = &config.code;
    match config.strategy {
        Strategy::Honest { bit } => {
            let t = if config.channel.is_noiseless() {
                run_protocol(code, &mut HonestAlice::new(bit)?, rng)?
            } else {
                run_session(code, bit, &config.channel, config.policy, rng)?
            };
            let accepted = t.verdict.is_some_and(|v| v.is_accept());
            Ok(CheatOutcome { detected: !accepted, transcript: Some(t), ..CheatOutcome::default() })
        }
        Strategy::ThetaAlice { theta, flips } => theta_alice_trial(theta, flips, code, rng),
        Strategy::SlyAlice => sly_alice_trial(code, random_bit(rng), rng),
        Strategy::MultiPhotonAlice { flips } => multiphoton_alice_trial(code, &config.channel, flips, rng),
        Strategy::CuriousBob => curious_bob_trial(code, rng),
        Strategy::EntanglingBob => entangling_bob_trial(code, BobGuess::Helstrom, rng),
    }
}

/// Outcome of the channel-quality requirement `η_m/2 + η_l + η_e ≪ d/(2n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Practicality {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub margin: f64,
    pub pass: bool,
}

pub const DEFAULT_MARGIN: f64 = 0.1;

/// Compares `η_m/2 + η_l + η_e` against `d/(2n)`; passes when the left side is
/// at most `margin` times the right.
pub fn practicality_check(code: &LinearCode, channel: &ChannelParams, margin: f64) -> Result<Practicality> {
    channel.validate()?;
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::InvalidParameter(format!("margin = {margin} must be positive")));
    }
    let lhs = channel.eta_m / 2.0 + channel.eta_l + channel.eta_e;
    let rhs = code.d() as f64 / (2.0 * code.n() as f64);
    if rhs == 0.0 {
        return Err(Error::DegenerateCode);
    }
    Ok(Practicality { lhs, rhs, ratio: lhs / rhs, margin, pass: lhs <= margin * rhs })
}
