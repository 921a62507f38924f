//! Exact one- and two-qubit pure-state simulation.
//!
//! Covers the four BB84 states, projective measurement in Z, X and rotated
//! bases, 2×2 density operators, and optimal (Helstrom) discrimination of two
//! density operators at equal priors.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for exact algebraic identities (normalization, hermiticity, ...).
pub const EXACT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A normalized state vector over one qubit (2 amplitudes) or two qubits
/// (4 amplitudes, ordered `|q0 q1⟩` with qubit 0 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 2 && amps.len() != 4 {
            return Err(Error::StateLength(amps.len()));
        }
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { amps })
    }

    /// Builds a state from arbitrary nonzero amplitudes, rescaling to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        PureState::new(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn qubit(a0: Complex64, a1: Complex64) -> Result<Self> {
        PureState::new(vec![a0, a1])
    }

    pub(crate) fn qubit_unchecked(v: [Complex64; 2]) -> Self {
        PureState { amps: v.to_vec() }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        if self.amps.len() == 2 {
            1
        } else {
            2
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::LengthMismatch { left: self.amps.len(), right: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Tensor product `self ⊗ other` of two single qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        self.require_qubits(1)?;
        other.require_qubits(1)?;
        let (a, b) = (&self.amps, &other.amps);
        Ok(PureState { amps: vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]] })
    }

    /// Equality up to a global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ip) => (ip.norm() - 1.0).abs() <= tol,
            Err(_) => false,
        }
    }

    fn require_qubits(&self, expected: usize) -> Result<()> {
        let actual = self.num_qubits();
        if actual != expected {
            return Err(Error::QubitCount { expected, actual });
        }
        Ok(())
    }

    fn as_qubit(&self) -> Result<[Complex64; 2]> {
        self.require_qubits(1)?;
        Ok([self.amps[0], self.amps[1]])
    }
}

/// The two conjugate bases used by honest parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bb84Basis {
    Z,
    X,
}

impl Bb84Basis {
    /// Codeword bit `0` selects Z, `1` selects X.
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Bb84Basis::Z
        } else {
            Bb84Basis::X
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Bb84Basis::Z => 0,
            Bb84Basis::X => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Bb84Basis::Z => Bb84Basis::X,
            Bb84Basis::X => Bb84Basis::Z,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Bb84Basis::Z => Basis::Z,
            Bb84Basis::X => Basis::X,
        }
    }
}

/// One of the four BB84 states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bb84Label {
    Zero,
    One,
    Plus,
    Minus,
}

impl Bb84Label {
    pub const ALL: [Bb84Label; 4] = [Bb84Label::Zero, Bb84Label::One, Bb84Label::Plus, Bb84Label::Minus];

    pub fn state(self) -> PureState {
        make_bb84(self)
    }

    pub fn basis(self) -> Bb84Basis {
        match self {
            Bb84Label::Zero | Bb84Label::One => Bb84Basis::Z,
            Bb84Label::Plus | Bb84Label::Minus => Bb84Basis::X,
        }
    }

    /// Announcement bit: 0 for `{|0⟩, |+⟩}`, 1 for `{|1⟩, |−⟩}`.
    pub fn set_bit(self) -> u8 {
        match self {
            Bb84Label::Zero | Bb84Label::Plus => 0,
            Bb84Label::One | Bb84Label::Minus => 1,
        }
    }

    /// The label for outcome `index` of a Z or X measurement.
    pub fn from_outcome(basis: Bb84Basis, index: usize) -> Self {
        match (basis, index) {
            (Bb84Basis::Z, 0) => Bb84Label::Zero,
            (Bb84Basis::Z, _) => Bb84Label::One,
            (Bb84Basis::X, 0) => Bb84Label::Plus,
            (Bb84Basis::X, _) => Bb84Label::Minus,
        }
    }

    /// Outcome labels are indexed so that outcome index equals announcement bit.
    pub fn from_basis_and_set(basis: Bb84Basis, set_bit: u8) -> Self {
        Bb84Label::from_outcome(basis, set_bit as usize)
    }

    pub fn symbol(self) -> char {
        match self {
            Bb84Label::Zero => '0',
            Bb84Label::One => '1',
            Bb84Label::Plus => '+',
            Bb84Label::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '0' => Some(Bb84Label::Zero),
            '1' => Some(Bb84Label::One),
            '+' => Some(Bb84Label::Plus),
            '-' => Some(Bb84Label::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Bb84Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl Serialize for Bb84Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_char(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Bb84Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Bb84Label::from_symbol), chars.next()) {
            (Some(l), None) => Ok(l),
            _ => Err(serde::de::Error::custom(format!("invalid BB84 label '{s}'"))),
        }
    }
}

pub fn make_bb84(label: Bb84Label) -> PureState {
    let h = re(FRAC_1_SQRT_2);
    let v = match label {
        Bb84Label::Zero => [ONE, ZERO],
        Bb84Label::One => [ZERO, ONE],
        Bb84Label::Plus => [h, h],
        Bb84Label::Minus => [h, -h],
    };
    PureState::qubit_unchecked(v)
}

/// An orthonormal pair of single-qubit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorPair([[Complex64; 2]; 2]);

impl VectorPair {
    pub fn new(v0: [Complex64; 2], v1: [Complex64; 2]) -> Result<Self> {
        let n0 = v0[0].norm_sqr() + v0[1].norm_sqr();
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let overlap = v0[0].conj() * v1[0] + v0[1].conj() * v1[1];
        if (n0 - 1.0).abs() > EXACT_TOL || (n1 - 1.0).abs() > EXACT_TOL || overlap.norm() > EXACT_TOL {
            return Err(Error::NotOrthonormal);
        }
        Ok(VectorPair([v0, v1]))
    }
}

/// A projective single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Z,
    X,
    /// `|r₀⟩ = cosθ|0⟩ + sinθ|1⟩`, `|r₁⟩ = sinθ|0⟩ − cosθ|1⟩`.
    Rotated(f64),
    Custom(VectorPair),
}

impl Basis {
    pub fn vectors(&self) -> [[Complex64; 2]; 2] {
        let h = re(FRAC_1_SQRT_2);
        match *self {
            Basis::Z => [[ONE, ZERO], [ZERO, ONE]],
            Basis::X => [[h, h], [h, -h]],
            Basis::Rotated(theta) => {
                let (s, c) = theta.sin_cos();
                [[re(c), re(s)], [re(s), re(-c)]]
            }
            Basis::Custom(VectorPair(v)) => v,
        }
    }

    pub fn vector(&self, index: usize) -> PureState {
        PureState::qubit_unchecked(self.vectors()[index])
    }

    /// Born probabilities of the two outcomes for a one-qubit state.
    pub fn probabilities(&self, state: &PureState) -> Result<[f64; 2]> {
        let s = state.as_qubit()?;
        let v = self.vectors();
        let p = |k: usize| (v[k][0].conj() * s[0] + v[k][1].conj() * s[1]).norm_sqr();
        Ok([p(0), p(1)])
    }

    /// Same measurement, allowing reordered vectors and per-vector phases.
    pub fn equivalent(&self, other: &Basis, tol: f64) -> bool {
        let a = self.vectors();
        let b = other.vectors();
        let ray = |x: [Complex64; 2], y: [Complex64; 2]| {
            ((x[0].conj() * y[0] + x[1].conj() * y[1]).norm() - 1.0).abs() <= tol
        };
        (ray(a[0], b[0]) && ray(a[1], b[1])) || (ray(a[0], b[1]) && ray(a[1], b[0]))
    }
}

pub fn rotated_basis(theta: f64) -> Basis {
    Basis::Rotated(theta)
}

/// Projective measurement of a single qubit.
///
/// Returns the outcome index and the post-measurement state (the basis vector).
pub fn measure<R: Rng + ?Sized>(state: &PureState, basis: &Basis, rng: &mut R) -> Result<(usize, PureState)> {
    let p = basis.probabilities(state)?;
    let outcome = if rng.random::<f64>() < p[0] { 0 } else { 1 };
    Ok((outcome, basis.vector(outcome)))
}

/// Probability that a measurement in `rotated_basis(theta)` correctly names the
/// announcement set (`{|0⟩,|+⟩}` on outcome 0, `{|1⟩,|−⟩}` on outcome 1) of a
/// uniformly random BB84 state.
pub fn distinguish_probability(theta: f64) -> f64 {
    (2.0 + SQRT_2 * (FRAC_PI_4 - 2.0 * theta).cos()) / 4.0
}

/// A 2×2 density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if !is_hermitian(&m) {
            return Err(Error::InvalidDensity("not Hermitian"));
        }
        let trace = m[0][0].re + m[1][1].re;
        if (trace - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidDensity("trace differs from 1"));
        }
        let (vals, _) = hermitian_eigen(&m);
        if vals[1] < -EXACT_TOL {
            return Err(Error::InvalidDensity("negative eigenvalue"));
        }
        Ok(DensityMatrix { m })
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigen(&self.m).0
    }
}

pub fn density_of(state: &PureState) -> Result<DensityMatrix> {
    let s = state.as_qubit()?;
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = s[i] * s[j].conj();
        }
    }
    // Re-symmetrize the diagonal against rounding.
    m[0][0] = re(m[0][0].re);
    m[1][1] = re(m[1][1].re);
    Ok(DensityMatrix { m })
}

fn is_hermitian(m: &[[Complex64; 2]; 2]) -> bool {
    m[0][0].im.abs() <= EXACT_TOL && m[1][1].im.abs() <= EXACT_TOL && (m[0][1] - m[1][0].conj()).norm() <= EXACT_TOL
}

/// Closed-form eigendecomposition of a 2×2 Hermitian matrix.
///
/// Eigenvalues are returned largest first, with matching orthonormal
/// eigenvectors.
fn hermitian_eigen(m: &[[Complex64; 2]; 2]) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let rad = half.hypot(b.norm());
    let hi = mean + rad;
    let lo = mean - rad;
    if rad == 0.0 {
        return ([hi, lo], [[ONE, ZERO], [ZERO, ONE]]);
    }
    // Two candidate eigenvectors for `hi`; take the better-conditioned one.
    let u = [b, re(hi - a)];
    let w = [re(hi - d), b.conj()];
    let nu = u[0].norm_sqr() + u[1].norm_sqr();
    let nw = w[0].norm_sqr() + w[1].norm_sqr();
    let (v, n) = if nu >= nw { (u, nu.sqrt()) } else { (w, nw.sqrt()) };
    let v0 = [v[0] / n, v[1] / n];
    let v1 = [-v0[1].conj(), v0[0].conj()];
    ([hi, lo], [v0, v1])
}

fn difference(r0: &DensityMatrix, r1: &DensityMatrix) -> [[Complex64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| r0.m[i][j] - r1.m[i][j]))
}

fn revalidate(r: &DensityMatrix) -> Result<()> {
    DensityMatrix::new(r.m).map(|_| ())
}

/// Optimal success probability `1/2 + ¼·Tr|ρ0 − ρ1|` for telling `ρ0` from
/// `ρ1` at equal priors. The trace norm is the sum of absolute eigenvalues of
/// the Hermitian difference.
pub fn helstrom_probability(r0: &DensityMatrix, r1: &DensityMatrix) -> Result<f64> {
    revalidate(r0)?;
    revalidate(r1)?;
    let (vals, _) = hermitian_eigen(&difference(r0, r1));
    Ok(0.5 + 0.25 * (vals[0].abs() + vals[1].abs()))
}

/// The optimal measurement for telling `ρ0` from `ρ1`.
///
/// Outcome 0 projects onto the positive eigenspace of `ρ0 − ρ1`; guessing `ρ0`
/// on outcome 0 attains [`helstrom_probability`]. Real eigenvectors are
/// reported as a [`Basis::Rotated`] angle.
pub fn helstrom_measurement(r0: &DensityMatrix, r1: &DensityMatrix) -> Result<Basis> {
    revalidate(r0)?;
    revalidate(r1)?;
    let diff = difference(r0, r1);
    let (vals, vecs) = hermitian_eigen(&diff);
    if vals[0] - vals[1] <= EXACT_TOL {
        return Err(Error::DegenerateDiscrimination);
    }
    // Strip the global phase of the positive eigenvector.
    let pivot = if vecs[0][0].norm() >= vecs[0][1].norm() { vecs[0][0] } else { vecs[0][1] };
    let phase = pivot.conj() / pivot.norm();
    let v0 = [vecs[0][0] * phase, vecs[0][1] * phase];
    let v1 = [-v0[1].conj(), v0[0].conj()];
    if v0[0].im.abs() <= EXACT_TOL && v0[1].im.abs() <= EXACT_TOL {
        Ok(Basis::Rotated(v0[1].re.atan2(v0[0].re)))
    } else {
        Ok(Basis::Custom(VectorPair::new(v0, v1)?))
    }
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_pair() -> PureState {
    let h = re(FRAC_1_SQRT_2);
    PureState { amps: vec![h, ZERO, ZERO, h] }
}

/// Measures one qubit of a two-qubit state and returns the outcome index with
/// the renormalized state of the other qubit.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &PureState,
    which: usize,
    basis: &Basis,
    rng: &mut R,
) -> Result<(usize, PureState)> {
    state.require_qubits(2)?;
    if which > 1 {
        return Err(Error::InvalidParameter(format!("qubit index {which} out of range")));
    }
    let a = &state.amps;
    // amp(q_measured, q_other)
    let amp = |m: usize, o: usize| if which == 0 { a[2 * m + o] } else { a[2 * o + m] };
    let v = basis.vectors();
    let project = |k: usize| -> [Complex64; 2] {
        let e = v[k];
        [
            e[0].conj() * amp(0, 0) + e[1].conj() * amp(1, 0),
            e[0].conj() * amp(0, 1) + e[1].conj() * amp(1, 1),
        ]
    };
    let r0 = project(0);
    let p0 = r0[0].norm_sqr() + r0[1].norm_sqr();
    let outcome = if rng.random::<f64>() < p0 { 0 } else { 1 };
    let r = if outcome == 0 { r0 } else { project(1) };
    let norm = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    Ok((outcome, PureState::qubit_unchecked([r[0] / norm, r[1] / norm])))
}
