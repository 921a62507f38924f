//! The honest commitment protocol.
//!
//! Pre-commitment: agree on a code, draw the key string `r`, Bob prepares `n`
//! BB84 photons. Commitment: Alice picks `c` from `C_b`, measures photon `i` in
//! Z (`cᵢ = 0`) or X (`cᵢ = 1`) and announces the set bit `o′`. Opening: Alice
//! reveals `b`, `o` and `c`; Bob verifies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{dot_and_xor, partition, sample_r, BitString, LinearCode, Partition};
use crate::error::{Error, Result};
use crate::quantum::{measure, Bb84Basis, Bb84Label, PureState};

/// Imperfections of the optical channel and source.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Probability a pulse carries two identical photons.
    pub eta_m: f64,
    /// Probability a pulse is lost.
    pub eta_l: f64,
    /// Probability the announced bit for a delivered pulse is flipped.
    pub eta_e: f64,
}

impl ChannelParams {
    pub fn new(eta_m: f64, eta_l: f64, eta_e: f64) -> Result<Self> {
        let p = ChannelParams { eta_m, eta_l, eta_e };
        p.validate()?;
        Ok(p)
    }

    pub fn noiseless() -> Self {
        ChannelParams::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_m", self.eta_m), ("eta_l", self.eta_l), ("eta_e", self.eta_e)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.eta_m + self.eta_l > 1.0 {
            return Err(Error::InvalidParameter("eta_m + eta_l exceeds 1".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.eta_m == 0.0 && self.eta_l == 0.0 && self.eta_e == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseKind {
    Lost,
    Single,
    Double,
}

/// What actually reaches Alice for one prepared label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pulse {
    pub label: Bb84Label,
    pub kind: PulseKind,
    /// The announcement for this position gets corrupted.
    pub error: bool,
}

impl Pulse {
    pub fn photons(&self) -> usize {
        match self.kind {
            PulseKind::Lost => 0,
            PulseKind::Single => 1,
            PulseKind::Double => 2,
        }
    }
}

/// Bob's preparation: `n` labels, each uniform over the four BB84 states.
pub fn bob_prepare<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Bb84Label>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok((0..n).map(|_| Bb84Label::ALL[rng.random_range(0..4)]).collect())
}

/// Pushes each label through the channel independently: double with
/// probability `eta_m`, lost with probability `eta_l`, otherwise single. A
/// delivered pulse is additionally flagged erroneous with probability `eta_e`.
pub fn apply_channel<R: Rng + ?Sized>(labels: &[Bb84Label], params: &ChannelParams, rng: &mut R) -> Vec<Pulse> {
    labels
        .iter()
        .map(|&label| {
            let u: f64 = rng.random();
            let kind = if u < params.eta_m {
                PulseKind::Double
            } else if u < params.eta_m + params.eta_l {
                PulseKind::Lost
            } else {
                PulseKind::Single
            };
            let error = kind != PulseKind::Lost && params.eta_e > 0.0 && rng.random_bool(params.eta_e);
            Pulse { label, kind, error }
        })
        .collect()
}

/// Alice's private record after the commitment phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub c: BitString,
    pub o: Vec<Bb84Label>,
    pub o_prime: BitString,
}

/// What Alice reveals at opening.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub b: u8,
    pub o: Vec<Bb84Label>,
    pub c: BitString,
}

/// Measures photon `i` in Z or X according to `cᵢ`. Positions with no photon
/// (lost) get the placeholder outcome with set bit 0.
fn measure_by_codeword<R: Rng + ?Sized>(
    c: &BitString,
    photons: &[Option<PureState>],
    rng: &mut R,
) -> Result<(Vec<Bb84Label>, BitString)> {
    let mut o = Vec::with_capacity(c.len());
    let mut announce = Vec::with_capacity(c.len());
    for (i, photon) in photons.iter().enumerate() {
        let basis = Bb84Basis::from_bit(c.get(i));
        let label = match photon {
            Some(state) => Bb84Label::from_outcome(basis, measure(state, &basis.basis(), rng)?.0),
            None => Bb84Label::from_outcome(basis, 0),
        };
        o.push(label);
        announce.push(label.set_bit());
    }
    Ok((o, BitString::new(announce)?))
}

fn check_bit(b: u8) -> Result<()> {
    if b > 1 {
        return Err(Error::InvalidParameter(format!("committed bit must be 0 or 1, got {b}")));
    }
    Ok(())
}

/// Commitment phase for an honest Alice.
pub fn alice_commit<R: Rng + ?Sized>(
    b: u8,
    p: &Partition,
    photons: &[PureState],
    rng: &mut R,
) -> Result<Commitment> {
    check_bit(b)?;
    if photons.len() != p.n() {
        return Err(Error::LengthMismatch { left: photons.len(), right: p.n() });
    }
    let c = p.choose(b, rng)?;
    let photons: Vec<Option<PureState>> = photons.iter().cloned().map(Some).collect();
    let (o, o_prime) = measure_by_codeword(&c, &photons, rng)?;
    Ok(Commitment { c, o, o_prime })
}

/// The committing party's side of a session: measure and announce, then open.
///
/// Honest and cheating Alices share this message sequence.
pub trait AliceRole {
    fn announce<R: Rng + ?Sized>(&mut self, p: &Partition, photons: &[PureState], rng: &mut R) -> Result<BitString>;

    fn open(&mut self) -> Result<Opening>;
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Ready,
    Committed(Commitment),
    Opened(Commitment),
}

/// Honest Alice as a state machine: `Ready → Committed → Opened`.
#[derive(Debug, Clone, PartialEq)]
pub struct HonestAlice {
    bit: u8,
    phase: Phase,
}

impl HonestAlice {
    pub fn new(bit: u8) -> Result<Self> {
        check_bit(bit)?;
        Ok(HonestAlice { bit, phase: Phase::Ready })
    }

    pub fn commitment(&self) -> Option<&Commitment> {
        match &self.phase {
            Phase::Ready => None,
            Phase::Committed(c) | Phase::Opened(c) => Some(c),
        }
    }
}

impl AliceRole for HonestAlice {
    fn announce<R: Rng + ?Sized>(&mut self, p: &Partition, photons: &[PureState], rng: &mut R) -> Result<BitString> {
        if self.phase != Phase::Ready {
            return Err(Error::State("already committed"));
        }
        let record = alice_commit(self.bit, p, photons, rng)?;
        let o_prime = record.o_prime.clone();
        self.phase = Phase::Committed(record);
        Ok(o_prime)
    }

    fn open(&mut self) -> Result<Opening> {
        match std::mem::replace(&mut self.phase, Phase::Ready) {
            Phase::Committed(record) => {
                let opening = Opening { b: self.bit, o: record.o.clone(), c: record.c.clone() };
                self.phase = Phase::Opened(record);
                Ok(opening)
            }
            Phase::Ready => Err(Error::State("open called before commitment")),
            opened @ Phase::Opened(_) => {
                self.phase = opened;
                Err(Error::State("commitment already opened"))
            }
        }
    }
}

/// Bob's verification checks, in the order they are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// `o′ᵢ` names the set that contains `oᵢ`.
    Announcement,
    /// `oᵢ` is a state of the basis named by `cᵢ`.
    Basis,
    /// Where Bob prepared in the basis named by `cᵢ`, `oᵢ = sᵢ`.
    Preparation,
    /// `c⊙r = b`.
    Parity,
    /// `c` is a codeword.
    Codeword,
}

impl Check {
    pub fn as_str(self) -> &'static str {
        match self {
            Check::Announcement => "announcement",
            Check::Basis => "basis",
            Check::Preparation => "preparation",
            Check::Parity => "parity",
            Check::Codeword => "codeword",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Check::Announcement, Check::Basis, Check::Preparation, Check::Parity, Check::Codeword]
            .into_iter()
            .find(|c| c.as_str() == s)
    }

    /// Failures of soft checks can be absorbed by a noise budget.
    fn is_soft(self) -> bool {
        matches!(self, Check::Announcement | Check::Preparation)
    }
}

/// A failed check, with the position for per-photon checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Failure {
    pub check: Check,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Failure),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Full record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TranscriptRecord", try_from = "TranscriptRecord")]
pub struct Transcript {
    pub code: String,
    pub r: BitString,
    /// Bob's prepared labels `s`.
    pub sent: Vec<Bb84Label>,
    pub b: u8,
    pub c: BitString,
    pub o: Vec<Bb84Label>,
    pub o_prime: BitString,
    /// Positions Alice reported lost; excluded from the per-photon checks.
    pub lost: Vec<usize>,
    pub verdict: Option<Verdict>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptRecord {
    code: String,
    r: BitString,
    sent: Vec<Bb84Label>,
    b: u8,
    c: BitString,
    o: Vec<Bb84Label>,
    o_prime: BitString,
    verdict: String,
    reject_reason: Option<String>,
    reject_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lost: Vec<usize>,
}

impl From<Transcript> for TranscriptRecord {
    fn from(t: Transcript) -> Self {
        let (verdict, reason, index) = match t.verdict {
            None => ("pending", None, None),
            Some(Verdict::Accept) => ("accept", None, None),
            Some(Verdict::Reject(f)) => ("reject", Some(f.check.as_str().to_string()), f.index),
        };
        TranscriptRecord {
            code: t.code,
            r: t.r,
            sent: t.sent,
            b: t.b,
            c: t.c,
            o: t.o,
            o_prime: t.o_prime,
            verdict: verdict.to_string(),
            reject_reason: reason,
            reject_index: index,
            lost: t.lost,
        }
    }
}

impl TryFrom<TranscriptRecord> for Transcript {
    type Error = Error;

    fn try_from(rec: TranscriptRecord) -> Result<Self> {
        let verdict = match (rec.verdict.as_str(), rec.reject_reason) {
            ("pending", None) => None,
            ("accept", None) => Some(Verdict::Accept),
            ("reject", Some(reason)) => {
                let check = Check::parse(&reason)
                    .ok_or_else(|| Error::MalformedTranscript(format!("unknown reject reason '{reason}'")))?;
                Some(Verdict::Reject(Failure { check, index: rec.reject_index }))
            }
            (v, _) => return Err(Error::MalformedTranscript(format!("inconsistent verdict '{v}'"))),
        };
        Ok(Transcript {
            code: rec.code,
            r: rec.r,
            sent: rec.sent,
            b: rec.b,
            c: rec.c,
            o: rec.o,
            o_prime: rec.o_prime,
            lost: rec.lost,
            verdict,
        })
    }
}

impl Transcript {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedTranscript(e.to_string()))
    }

    fn validate(&self, code: &LinearCode) -> Result<()> {
        let n = code.n();
        let lens = [
            ("r", self.r.len()),
            ("sent", self.sent.len()),
            ("c", self.c.len()),
            ("o", self.o.len()),
            ("o_prime", self.o_prime.len()),
        ];
        for (field, len) in lens {
            if len != n {
                return Err(Error::MalformedTranscript(format!("{field} has length {len}, code has n = {n}")));
            }
        }
        if self.b > 1 {
            return Err(Error::MalformedTranscript(format!("b = {}", self.b)));
        }
        if let Some(&i) = self.lost.iter().find(|&&i| i >= n) {
            return Err(Error::MalformedTranscript(format!("lost position {i} out of range")));
        }
        // A key string that leaves one side empty makes the parity check vacuous.
        partition(code, &self.r)
            .map_err(|e| Error::MalformedTranscript(format!("r = {} does not split the code: {e}", self.r)))?;
        Ok(())
    }
}

/// How strictly Bob verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyPolicy {
    /// Number of announcement/preparation mismatches tolerated as channel
    /// noise. Zero means strict.
    pub tolerated_mismatches: usize,
}

/// Every failed check of a transcript, in check order then position order.
pub fn failures(t: &Transcript, code: &LinearCode) -> Result<Vec<Failure>> {
    t.validate(code)?;
    let n = t.n();
    let mut live = vec![true; n];
    for &i in &t.lost {
        live[i] = false;
    }
    let positions = || (0..n).filter(|&i| live[i]);
    let mut out = Vec::new();
    let at = |check, i| Failure { check, index: Some(i) };
    out.extend(positions().filter(|&i| t.o_prime.get(i) != t.o[i].set_bit()).map(|i| at(Check::Announcement, i)));
    out.extend(positions().filter(|&i| t.o[i].basis() != Bb84Basis::from_bit(t.c.get(i))).map(|i| at(Check::Basis, i)));
    out.extend(
        positions()
            .filter(|&i| t.sent[i].basis() == Bb84Basis::from_bit(t.c.get(i)) && t.o[i] != t.sent[i])
            .map(|i| at(Check::Preparation, i)),
    );
    if dot_and_xor(&t.c, &t.r)? != t.b {
        out.push(Failure { check: Check::Parity, index: None });
    }
    if !code.contains(&t.c) {
        out.push(Failure { check: Check::Codeword, index: None });
    }
    Ok(out)
}

/// Bob's verification under `policy`; rejects with the first failure that the
/// policy does not absorb.
pub fn verify_with(t: &Transcript, code: &LinearCode, policy: VerifyPolicy) -> Result<Verdict> {
    let mut budget = policy.tolerated_mismatches;
    for f in failures(t, code)? {
        if f.check.is_soft() && budget > 0 {
            budget -= 1;
            continue;
        }
        return Ok(Verdict::Reject(f));
    }
    Ok(Verdict::Accept)
}

/// Strict verification.
pub fn bob_verify(t: &Transcript, code: &LinearCode) -> Result<Verdict> {
    verify_with(t, code, VerifyPolicy::default())
}

/// Runs one noiseless session against any Alice and returns the verified
/// transcript. Honest parties are assumed for everything Alice does not control.
pub fn run_protocol<A: AliceRole, R: Rng + ?Sized>(code: &LinearCode, alice: &mut A, rng: &mut R) -> Result<Transcript> {
    let r = sample_r(code, rng)?;
    let p = partition(code, &r)?;
    let sent = bob_prepare(code.n(), rng)?;
    let photons: Vec<PureState> = sent.iter().map(|l| l.state()).collect();
    let o_prime = alice.announce(&p, &photons, rng)?;
    let opening = alice.open()?;
    let mut t = Transcript {
        code: code.name().to_string(),
        r,
        sent,
        b: opening.b,
        c: opening.c,
        o: opening.o,
        o_prime,
        lost: Vec::new(),
        verdict: None,
    };
    t.verdict = Some(bob_verify(&t, code)?);
    Ok(t)
}

/// One honest session through a (possibly noisy) channel.
///
/// Lost pulses are reported by Alice and skipped by Bob; double pulses are
/// measured on one photon; erroneous pulses have their announced bit flipped.
pub fn run_session<R: Rng + ?Sized>(
    code: &LinearCode,
    b: u8,
    channel: &ChannelParams,
    policy: VerifyPolicy,
    rng: &mut R,
) -> Result<Transcript> {
    check_bit(b)?;
    channel.validate()?;
    let r = sample_r(code, rng)?;
    let p = partition(code, &r)?;
    let sent = bob_prepare(code.n(), rng)?;
    let pulses = apply_channel(&sent, channel, rng);
    let c = p.choose(b, rng)?;
    let photons: Vec<Option<PureState>> =
        pulses.iter().map(|p| (p.kind != PulseKind::Lost).then(|| p.label.state())).collect();
    let (o, mut o_prime) = measure_by_codeword(&c, &photons, rng)?;
    for (i, pulse) in pulses.iter().enumerate() {
        if pulse.error {
            o_prime.flip(i);
        }
    }
    let lost = pulses.iter().enumerate().filter(|(_, p)| p.kind == PulseKind::Lost).map(|(i, _)| i).collect();
    let mut t = Transcript { code: code.name().to_string(), r, sent, b, c, o, o_prime, lost, verdict: None };
    t.verdict = Some(verify_with(&t, code, policy)?);
    Ok(t)
}

/// `n_trials` independent noiseless honest sessions.
pub fn run_honest<R: Rng + ?Sized>(code: &LinearCode, b: u8, n_trials: usize, rng: &mut R) -> Result<Vec<Transcript>> {
    check_bit(b)?;
    (0..n_trials)
        .map(|_| {
            let mut alice = HonestAlice::new(b)?;
            run_protocol(code, &mut alice, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn honest(seed: u64) -> (LinearCode, Transcript) {
        let code = LinearCode::hamming74();
        let t = run_honest(&code, 0, 1, &mut seeded(seed)).unwrap().remove(0);
        (code, t)
    }

    #[test]
    fn prepare_is_reproducible_and_uniform() {
        assert_eq!(bob_prepare(1, &mut seeded(4)).unwrap(), bob_prepare(1, &mut seeded(4)).unwrap());
        assert!(bob_prepare(0, &mut seeded(4)).is_err());
        let labels = bob_prepare(100_000, &mut seeded(5)).unwrap();
        for l in Bb84Label::ALL {
            let f = labels.iter().filter(|&&x| x == l).count() as f64 / 1e5;
            assert!((f - 0.25).abs() < 0.01, "{l}: {f}");
        }
    }

    #[test]
    fn commit_eigenstates() {
        let code = LinearCode::repetition(5).unwrap();
        let p = partition(&code, &"10000".parse().unwrap()).unwrap();
        let photons = vec![Bb84Label::Zero.state(); 5];
        let rec = alice_commit(0, &p, &photons, &mut seeded(1)).unwrap();
        assert_eq!(rec.c.to_string(), "00000");
        assert!(rec.o.iter().all(|&l| l == Bb84Label::Zero));
        assert!(rec.o_prime.is_zero());
    }

    #[test]
    fn commit_conjugate_basis_announcement_is_uniform() {
        let code = LinearCode::repetition(20).unwrap();
        let r: BitString = format!("1{}", "0".repeat(19)).parse().unwrap();
        let p = partition(&code, &r).unwrap();
        let photons = vec![Bb84Label::Zero.state(); 20];
        let mut rng = seeded(2);
        let mut ones = 0;
        for _ in 0..5_000 {
            let rec = alice_commit(1, &p, &photons, &mut rng).unwrap();
            assert!(rec.c.bits().iter().all(|&b| b == 1));
            ones += rec.o_prime.weight();
        }
        let f = ones as f64 / 100_000.0;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn commit_respects_partition() {
        let code = LinearCode::hamming74();
        let mut rng = seeded(3);
        for i in 0..10_000 {
            let b = (i % 2) as u8;
            let r = sample_r(&code, &mut rng).unwrap();
            let p = partition(&code, &r).unwrap();
            let photons: Vec<_> = bob_prepare(7, &mut rng).unwrap().iter().map(|l| l.state()).collect();
            let rec = alice_commit(b, &p, &photons, &mut rng).unwrap();
            assert_eq!(dot_and_xor(&rec.c, &r).unwrap(), b);
        }
    }

    #[test]
    fn commit_rejects_wrong_photon_count() {
        let code = LinearCode::hamming74();
        let p = partition(&code, &"1000000".parse().unwrap()).unwrap();
        let photons = vec![Bb84Label::Zero.state(); 6];
        assert!(matches!(alice_commit(0, &p, &photons, &mut seeded(1)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn alice_state_machine() {
        let code = LinearCode::hamming74();
        let mut alice = HonestAlice::new(1).unwrap();
        assert_eq!(alice.open(), Err(Error::State("open called before commitment")));
        let t = run_protocol(&code, &mut alice, &mut seeded(9)).unwrap();
        let record = alice.commitment().unwrap().clone();
        assert_eq!((t.c.clone(), t.o.clone(), t.o_prime.clone()), (record.c, record.o, record.o_prime));
        assert_eq!(alice.open(), Err(Error::State("commitment already opened")));
        let p = partition(&code, &t.r).unwrap();
        let photons = vec![Bb84Label::Zero.state(); 7];
        assert!(alice.announce(&p, &photons, &mut seeded(1)).is_err());
    }

    #[test]
    fn honest_runs_accept() {
        let code = LinearCode::hamming74();
        let mut rng = seeded(10);
        for b in [0, 1] {
            for t in run_honest(&code, b, 2_000, &mut rng).unwrap() {
                assert_eq!(t.verdict, Some(Verdict::Accept));
                assert_eq!(dot_and_xor(&t.c, &t.r).unwrap(), b);
                for i in 0..t.n() {
                    assert_eq!(t.o_prime.get(i) == 0, matches!(t.o[i], Bb84Label::Zero | Bb84Label::Plus));
                }
            }
        }
    }

    #[test]
    fn honest_runs_are_reproducible() {
        let code = LinearCode::hamming74();
        let a = run_honest(&code, 1, 50, &mut seeded(77)).unwrap();
        let b = run_honest(&code, 1, 50, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flipped_announcement_is_rejected() {
        let (code, mut t) = honest(21);
        t.o_prime.flip(3);
        assert_eq!(
            bob_verify(&t, &code).unwrap(),
            Verdict::Reject(Failure { check: Check::Announcement, index: Some(3) })
        );
    }

    #[test]
    fn same_basis_wrong_outcome_is_rejected() {
        let code = LinearCode::hamming74();
        let mut rng = seeded(30);
        // find an honest run where c₅ = 0 and Bob sent |0⟩ at 5
        let mut t = loop {
            let t = run_honest(&code, 0, 1, &mut rng).unwrap().remove(0);
            if t.c.get(5) == 0 && t.sent[5] == Bb84Label::Zero {
                break t;
            }
        };
        t.o[5] = Bb84Label::One;
        t.o_prime.set(5, 1);
        assert_eq!(
            bob_verify(&t, &code).unwrap(),
            Verdict::Reject(Failure { check: Check::Preparation, index: Some(5) })
        );
    }

    #[test]
    fn malformed_transcript() {
        let (code, mut t) = honest(22);
        t.o.pop();
        assert!(matches!(bob_verify(&t, &code), Err(Error::MalformedTranscript(_))));
        let (_, t) = honest(22);
        assert!(matches!(bob_verify(&t, &LinearCode::hamming84()), Err(Error::MalformedTranscript(_))));
    }

    #[test]
    fn transcript_json_fields() {
        let (_, t) = honest(23);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = vec!["b", "c", "code", "o", "o_prime", "r", "reject_index", "reject_reason", "sent", "verdict"];
        expected.sort();
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, expected);
        assert_eq!(v["verdict"], "accept");
        assert_eq!(Transcript::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn channel_identity_and_boundaries() {
        let labels = bob_prepare(1000, &mut seeded(1)).unwrap();
        let pulses = apply_channel(&labels, &ChannelParams::noiseless(), &mut seeded(2));
        assert!(pulses.iter().zip(&labels).all(|(p, &l)| p.kind == PulseKind::Single && !p.error && p.label == l));
        let all_lost = apply_channel(&labels, &ChannelParams::new(0.0, 1.0, 0.0).unwrap(), &mut seeded(3));
        assert!(all_lost.iter().all(|p| p.photons() == 0));
        assert!(ChannelParams::new(0.6, 0.6, 0.0).is_err());
        assert!(ChannelParams::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn channel_double_rate() {
        let labels = bob_prepare(100_000, &mut seeded(1)).unwrap();
        let pulses = apply_channel(&labels, &ChannelParams::new(0.1, 0.0, 0.0).unwrap(), &mut seeded(4));
        let f = pulses.iter().filter(|p| p.kind == PulseKind::Double).count() as f64 / 1e5;
        assert!((f - 0.1).abs() < 0.005, "{f}");
    }

    #[test]
    fn noisy_sessions() {
        let code = LinearCode::hamming74();
        let mut rng = seeded(40);
        let lossy = ChannelParams::new(0.0, 0.3, 0.0).unwrap();
        for _ in 0..500 {
            let t = run_session(&code, 1, &lossy, VerifyPolicy::default(), &mut rng).unwrap();
            assert_eq!(t.verdict, Some(Verdict::Accept));
        }
        let noisy = ChannelParams::new(0.0, 0.0, 0.2).unwrap();
        let strict = (0..500)
            .filter(|_| !run_session(&code, 0, &noisy, VerifyPolicy::default(), &mut rng).unwrap().verdict.unwrap().is_accept())
            .count();
        assert!(strict > 0);
        let lenient = VerifyPolicy { tolerated_mismatches: 7 };
        for _ in 0..500 {
            let t = run_session(&code, 0, &noisy, lenient, &mut rng).unwrap();
            assert_eq!(t.verdict, Some(Verdict::Accept));
        }
    }

    #[test]
    fn degenerate_key_string_is_malformed() {
        let code = LinearCode::hamming74();
        let mut t = run_honest(&code, 0, 1, &mut seeded(41)).unwrap().remove(0);
        t.r = BitString::zeros(7);
        assert!(matches!(bob_verify(&t, &code), Err(Error::MalformedTranscript(_))));
        let dual = (1u32..1 << 7)
            .map(|m| BitString::from_mask(m, 7))
            .find(|r| code.codewords().iter().all(|c| dot_and_xor(c, r).unwrap() == 0))
            .unwrap();
        t.r = dual;
        assert!(matches!(bob_verify(&t, &code), Err(Error::MalformedTranscript(_))));
    }
}
