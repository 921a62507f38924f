//! Binary linear block codes and the key-string partition of their codewords.
//!
//! Strings are short (n ≤ 24), so codewords are also kept as `u32` masks. The
//! mask convention puts position 0 in the most significant of the `n` bits,
//! which makes numeric order coincide with lexicographic string order.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_N: usize = 24;
pub const MAX_K: usize = 16;

/// A non-empty string of bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidBits);
        }
        Ok(BitString(bits))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "bit strings are non-empty");
        BitString(vec![0; n])
    }

    pub fn from_mask(mask: u32, n: usize) -> Self {
        assert!(n > 0 && n <= 32);
        BitString((0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect())
    }

    pub fn to_mask(&self) -> u32 {
        assert!(self.0.len() <= 32);
        self.0.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        assert!(bit <= 1);
        self.0[i] = bit;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        check_len(self, other)?;
        Ok(BitString(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    pub fn distance(&self, other: &BitString) -> Result<usize> {
        check_len(self, other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }
}

fn check_len(a: &BitString, b: &BitString) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidBits),
            })
            .collect::<Result<Vec<u8>>>()?;
        BitString::new(bits)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `⊕ᵢ (cᵢ ∧ rᵢ)`.
pub fn dot_and_xor(c: &BitString, r: &BitString) -> Result<u8> {
    check_len(c, r)?;
    Ok(c.0.iter().zip(&r.0).fold(0, |acc, (a, b)| acc ^ (a & b)))
}

fn parity(mask: u32) -> u8 {
    (mask.count_ones() & 1) as u8
}

/// A binary linear `(n, k, d)` code with all `2^k` codewords enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    d: usize,
    generator: Vec<BitString>,
    words: Vec<u32>,
}

impl LinearCode {
    /// Builds the code spanned by `generator` (k rows of length n).
    ///
    /// A code with `k = 0` contains only the zero word; its `d` is reported as 0.
    pub fn new(n: usize, generator: Vec<BitString>) -> Result<Self> {
        let k = generator.len();
        if n == 0 || n > MAX_N {
            return Err(Error::CodeSize(format!("n = {n} outside 1..={MAX_N}")));
        }
        if k > MAX_K || k > n {
            return Err(Error::CodeSize(format!("k = {k} must be <= min(n, {MAX_K})")));
        }
        for row in &generator {
            if row.len() != n {
                return Err(Error::LengthMismatch { left: row.len(), right: n });
            }
        }
        let rows: Vec<u32> = generator.iter().map(BitString::to_mask).collect();
        let rank = gf2_rank(&rows);
        if rank < k {
            return Err(Error::RankDeficient { rank, k });
        }
        let words: Vec<u32> = (0u32..1 << k)
            .map(|msg| {
                rows.iter()
                    .enumerate()
                    .filter(|(j, _)| (msg >> (k - 1 - j)) & 1 == 1)
                    .fold(0, |acc, (_, r)| acc ^ r)
            })
            .collect();
        let d = words.iter().filter(|&&w| w != 0).map(|w| w.count_ones() as usize).min().unwrap_or(0);
        Ok(LinearCode { name: format!("custom({n},{k},{d})"), n, k, d, generator, words })
    }

    /// Same as [`LinearCode::new`] from plain 0/1 rows.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map(Vec::len).ok_or_else(|| Error::CodeSize("empty generator".into()))?;
        let gen = rows.iter().map(|r| BitString::new(r.clone())).collect::<Result<Vec<_>>>()?;
        LinearCode::new(n, gen)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn repetition(n: usize) -> Result<Self> {
        Ok(LinearCode::from_rows(&[vec![1; n]])?.with_name(format!("rep{n}")))
    }

    /// Single parity check code `[I | 1]`: `(n, n−1, 2)`.
    pub fn single_parity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::CodeSize("single-parity code needs n >= 2".into()));
        }
        let rows: Vec<Vec<u8>> = (0..n - 1)
            .map(|i| {
                let mut r = vec![0; n];
                r[i] = 1;
                r[n - 1] = 1;
                r
            })
            .collect();
        Ok(LinearCode::from_rows(&rows)?.with_name(format!("spc{n}")))
    }

    pub fn identity(k: usize) -> Result<Self> {
        let rows: Vec<Vec<u8>> = (0..k)
            .map(|i| {
                let mut r = vec![0; k];
                r[i] = 1;
                r
            })
            .collect();
        Ok(LinearCode::from_rows(&rows)?.with_name(format!("id{k}")))
    }

    /// Hamming (7,4,3), systematic generator `[I₄ | P]`.
    pub fn hamming74() -> Self {
        let rows = [
            vec![1, 0, 0, 0, 1, 1, 0],
            vec![0, 1, 0, 0, 1, 0, 1],
            vec![0, 0, 1, 0, 0, 1, 1],
            vec![0, 0, 0, 1, 1, 1, 1],
        ];
        LinearCode::from_rows(&rows).expect("valid generator").with_name("hamming74")
    }

    /// Extended Hamming (8,4,4).
    pub fn hamming84() -> Self {
        let rows = [
            vec![1, 0, 0, 0, 1, 1, 0, 1],
            vec![0, 1, 0, 0, 1, 0, 1, 1],
            vec![0, 0, 1, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 1, 1, 1, 1, 0],
        ];
        LinearCode::from_rows(&rows).expect("valid generator").with_name("hamming84")
    }

    /// Hamming (15,11,3).
    pub fn hamming1511() -> Self {
        // Parity columns: every 4-bit pattern of weight >= 2.
        let patterns: Vec<u8> = (1u8..16).filter(|p| p.count_ones() >= 2).collect();
        let rows: Vec<Vec<u8>> = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut r = vec![0; 15];
                r[i] = 1;
                for j in 0..4 {
                    r[11 + j] = (p >> (3 - j)) & 1;
                }
                r
            })
            .collect();
        LinearCode::from_rows(&rows).expect("valid generator").with_name("hamming1511")
    }

    /// Names accepted by [`LinearCode::builtin`].
    pub const BUILTIN_NAMES: &'static [&'static str] =
        &["hamming74", "hamming84", "hamming1511", "rep<n>", "spc<n>", "id<k>"];

    pub fn builtin(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownCode(name.to_string());
        match name {
            "hamming74" => Ok(LinearCode::hamming74()),
            "hamming84" => Ok(LinearCode::hamming84()),
            "hamming1511" => Ok(LinearCode::hamming1511()),
            _ => {
                let (ctor, digits): (fn(usize) -> Result<LinearCode>, &str) =
                    if let Some(rest) = name.strip_prefix("rep") {
                        (LinearCode::repetition, rest)
                    } else if let Some(rest) = name.strip_prefix("spc") {
                        (LinearCode::single_parity, rest)
                    } else if let Some(rest) = name.strip_prefix("id") {
                        (LinearCode::identity, rest)
                    } else {
                        return Err(unknown());
                    };
                let size: usize = digits.parse().map_err(|_| unknown())?;
                ctor(size)
            }
        }
    }

    /// Parses the text format: a `k n` header line, then k rows of n bits
    /// (separated by whitespace or not). Blank lines and `#` comments are ignored.
    pub fn parse_generator(text: &str) -> Result<Self> {
        let fmt_err = |m: String| Error::GeneratorFormat(m);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| fmt_err("missing 'k n' header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fmt_err(format!("bad header token '{t}'"))))
            .collect::<Result<_>>()?;
        let [k, n] = dims[..] else {
            return Err(fmt_err(format!("header must be 'k n', got '{header}'")));
        };
        let mut rows = Vec::with_capacity(k);
        for (i, line) in lines.enumerate() {
            if i >= k {
                return Err(fmt_err(format!("more than {k} rows")));
            }
            let bits: Vec<u8> = line
                .chars()
                .filter(|ch| !ch.is_whitespace())
                .map(|t| match t {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(fmt_err(format!("row {}: bad bit '{t}'", i + 1))),
                })
                .collect::<Result<_>>()?;
            if bits.len() != n {
                return Err(fmt_err(format!("row {} has {} bits, expected {n}", i + 1, bits.len())));
            }
            rows.push(BitString::new(bits)?);
        }
        if rows.len() != k {
            return Err(fmt_err(format!("expected {k} rows, found {}", rows.len())));
        }
        LinearCode::new(n, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("file").to_string();
        Ok(LinearCode::parse_generator(&text)?.with_name(name))
    }

    /// A built-in name, or otherwise a generator file path.
    pub fn resolve(source: &str) -> Result<Self> {
        match LinearCode::builtin(source) {
            Ok(code) => Ok(code),
            Err(Error::UnknownCode(_)) if Path::new(source).exists() => LinearCode::load(Path::new(source)),
            Err(e) => Err(e),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn generator(&self) -> &[BitString] {
        &self.generator
    }

    pub fn codewords(&self) -> Vec<BitString> {
        self.words.iter().map(|&w| BitString::from_mask(w, self.n)).collect()
    }

    pub fn contains(&self, w: &BitString) -> bool {
        w.len() == self.n && self.words.contains(&w.to_mask())
    }
}

fn gf2_rank(rows: &[u32]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in (0..32).rev() {
        let Some(p) = (rank..rows.len()).find(|&i| (rows[i] >> bit) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && (*r >> bit) & 1 == 1 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

pub fn make_code(generator: &[Vec<u8>]) -> Result<LinearCode> {
    LinearCode::from_rows(generator)
}

/// The split of a code's codewords into `C₀ = {c : c⊙r = 0}` and
/// `C₁ = {c : c⊙r = 1}`. Both sides are non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    r: BitString,
    sides: [Vec<u32>; 2],
}

impl Partition {
    pub fn r(&self) -> &BitString {
        &self.r
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn side(&self, bit: u8) -> Vec<BitString> {
        self.sides[bit as usize].iter().map(|&w| BitString::from_mask(w, self.n())).collect()
    }

    pub fn side_len(&self, bit: u8) -> usize {
        self.sides[bit as usize].len()
    }

    /// Uniformly random codeword from side `bit`.
    pub fn choose<R: Rng + ?Sized>(&self, bit: u8, rng: &mut R) -> Result<BitString> {
        let side = self.sides.get(bit as usize).ok_or(Error::InvalidParameter(format!("bit {bit}")))?;
        if side.is_empty() {
            return Err(Error::InvalidR(self.r.to_string()));
        }
        Ok(BitString::from_mask(side[rng.random_range(0..side.len())], self.n()))
    }

    /// Closest codeword on side `bit` to `w`; ties go to the lexicographically
    /// smallest codeword.
    pub fn nearest(&self, bit: u8, w: &BitString) -> Result<(BitString, usize)> {
        check_len(w, &self.r)?;
        let wm = w.to_mask();
        let best = self.sides[bit as usize]
            .iter()
            .map(|&c| ((c ^ wm).count_ones() as usize, c))
            .min()
            .ok_or(Error::EmptySet)?;
        Ok((BitString::from_mask(best.1, self.n()), best.0))
    }
}

pub fn partition(code: &LinearCode, r: &BitString) -> Result<Partition> {
    if r.len() != code.n {
        return Err(Error::LengthMismatch { left: r.len(), right: code.n });
    }
    if r.is_zero() {
        return Err(Error::InvalidR(r.to_string()));
    }
    let rm = r.to_mask();
    let (c1, c0): (Vec<u32>, Vec<u32>) = code.words.iter().partition(|&&c| parity(c & rm) == 1);
    if c0.is_empty() || c1.is_empty() {
        return Err(Error::InvalidR(r.to_string()));
    }
    Ok(Partition { r: r.clone(), sides: [c0, c1] })
}

/// Draws a nonzero `r` whose partition has both sides non-empty, resampling
/// strings that lie in the dual code.
pub fn sample_r<R: Rng + ?Sized>(code: &LinearCode, rng: &mut R) -> Result<BitString> {
    if code.k == 0 {
        return Err(Error::DegenerateCode);
    }
    let top = 1u32 << code.n;
    loop {
        let mask = rng.random_range(1..top);
        if code.words.iter().any(|&c| parity(c & mask) == 1) {
            return Ok(BitString::from_mask(mask, code.n));
        }
    }
}

pub fn min_distance_to_set(w: &BitString, set: &[BitString]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for s in set {
        let d = w.distance(s)?;
        best = Some(best.map_or(d, |b| b.min(d)));
    }
    best.ok_or(Error::EmptySet)
}

/// A string equidistant (as far as possible) from both sides of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intermediate {
    pub word: BitString,
    pub dist0: usize,
    pub dist1: usize,
}

impl Intermediate {
    pub fn max_distance(&self) -> usize {
        self.dist0.max(self.dist1)
    }
}

/// Exhaustive search over all `2^n` strings for the one minimizing
/// `max(dist(w, C₀), dist(w, C₁))`; ties go to the lexicographically smallest.
pub fn sly_intermediate(p: &Partition) -> Result<Intermediate> {
    let n = p.n();
    if n > MAX_N {
        return Err(Error::CodeSize(format!("n = {n} too large for exhaustive search")));
    }
    let nearest = |w: u32, side: &[u32]| {
        let mut best = u32::MAX;
        for &c in side {
            let d = (w ^ c).count_ones();
            if d < best {
                best = d;
                if best == 0 {
                    break;
                }
            }
        }
        best
    };
    let mut best: Option<(u32, u32, u32)> = None;
    for w in 0u32..1 << n {
        let cap = best.map_or(u32::MAX, |b| b.1.max(b.2));
        let d0 = nearest(w, &p.sides[0]);
        if d0 >= cap {
            continue;
        }
        let d1 = nearest(w, &p.sides[1]);
        if d0.max(d1) < cap {
            best = Some((w, d0, d1));
        }
    }
    let (w, d0, d1) = best.expect("search space is non-empty");
    Ok(Intermediate { word: BitString::from_mask(w, n), dist0: d0 as usize, dist1: d1 as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn dot_and_xor_examples() {
        assert_eq!(dot_and_xor(&bs("1010"), &bs("1100")).unwrap(), 1);
        assert_eq!(dot_and_xor(&bs("0000"), &bs("1111")).unwrap(), 0);
        assert_eq!(dot_and_xor(&bs("1111"), &bs("1111")).unwrap(), 0);
        assert!(matches!(dot_and_xor(&bs("10"), &bs("100")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn bitstring_parsing() {
        assert_eq!(bs("0110").to_string(), "0110");
        assert!("".parse::<BitString>().is_err());
        assert!("012".parse::<BitString>().is_err());
        assert_eq!(BitString::from_mask(0b011, 3), bs("011"));
        assert_eq!(bs("100").to_mask(), 0b100);
    }

    #[test]
    fn code_parameters() {
        let rep = LinearCode::repetition(3).unwrap();
        assert_eq!((rep.n(), rep.k(), rep.d()), (3, 1, 3));
        assert_eq!(rep.codewords(), vec![bs("000"), bs("111")]);
        let h = LinearCode::hamming74();
        assert_eq!((h.n(), h.k(), h.d()), (7, 4, 3));
        let id = LinearCode::identity(4).unwrap();
        assert_eq!((id.n(), id.k(), id.d()), (4, 4, 1));
        let e = LinearCode::hamming84();
        assert_eq!((e.n(), e.k(), e.d()), (8, 4, 4));
        let big = LinearCode::hamming1511();
        assert_eq!((big.n(), big.k(), big.d()), (15, 11, 3));
        let spc = LinearCode::single_parity(6).unwrap();
        assert_eq!((spc.n(), spc.k(), spc.d()), (6, 5, 2));
    }

    #[test]
    fn code_errors() {
        assert!(matches!(make_code(&[vec![1, 1, 0], vec![1, 1, 0]]), Err(Error::RankDeficient { rank: 1, k: 2 })));
        assert!(matches!(make_code(&[vec![1; 25]]), Err(Error::CodeSize(_))));
        let wide: Vec<Vec<u8>> = (0..17)
            .map(|i| {
                let mut r = vec![0; 20];
                r[i] = 1;
                r
            })
            .collect();
        assert!(matches!(make_code(&wide), Err(Error::CodeSize(_))));
        assert!(matches!(LinearCode::builtin("golay"), Err(Error::UnknownCode(_))));
    }

    #[test]
    fn generator_text_format() {
        let code = LinearCode::parse_generator("1 3\n1 1 1\n").unwrap();
        assert_eq!((code.n(), code.k(), code.d()), (3, 1, 3));
        let text = "# hamming\n4 7\n1 0 0 0 1 1 0\n0 1 0 0 1 0 1\n0 0 1 0 0 1 1\n0 0 0 1 1 1 1\n";
        assert_eq!(LinearCode::parse_generator(text).unwrap().codewords(), LinearCode::hamming74().codewords());
        for bad in ["", "2 3\n1 1 1\n", "1 3\n1 1\n", "1 3\n1 2 1\n", "1\n1 1 1\n", "x y\n"] {
            assert!(matches!(LinearCode::parse_generator(bad), Err(Error::GeneratorFormat(_))), "{bad:?}");
        }
    }

    #[test]
    fn partition_examples() {
        let rep = LinearCode::repetition(3).unwrap();
        let p = partition(&rep, &bs("100")).unwrap();
        assert_eq!(p.side(0), vec![bs("000")]);
        assert_eq!(p.side(1), vec![bs("111")]);
        assert!(matches!(partition(&rep, &bs("110")), Err(Error::InvalidR(_))));
        assert!(matches!(partition(&rep, &bs("000")), Err(Error::InvalidR(_))));

        let h = LinearCode::hamming74();
        let p = partition(&h, &bs("1000000")).unwrap();
        assert_eq!((p.side_len(0), p.side_len(1)), (8, 8));
    }

    #[test]
    fn sample_r_accepts_only_splitting_strings() {
        let mut rng = seeded(3);
        let rep = LinearCode::repetition(3).unwrap();
        for _ in 0..200 {
            let r = sample_r(&rep, &mut rng).unwrap();
            assert_eq!(r.weight() % 2, 1, "{r}");
        }
        let h = LinearCode::hamming74();
        for _ in 0..200 {
            let r = sample_r(&h, &mut rng).unwrap();
            let p = partition(&h, &r).unwrap();
            assert_eq!((p.side_len(0), p.side_len(1)), (8, 8));
        }
        let empty = LinearCode::new(4, vec![]).unwrap();
        assert_eq!(sample_r(&empty, &mut rng), Err(Error::DegenerateCode));
    }

    #[test]
    fn distance_to_set() {
        assert_eq!(min_distance_to_set(&bs("000"), &[bs("111")]).unwrap(), 3);
        assert_eq!(min_distance_to_set(&bs("110"), &[bs("000"), bs("111")]).unwrap(), 1);
        assert_eq!(min_distance_to_set(&bs("101"), &[bs("000"), bs("101")]).unwrap(), 0);
        assert_eq!(min_distance_to_set(&bs("101"), &[]), Err(Error::EmptySet));
    }

    #[test]
    fn sly_intermediate_repetition() {
        let rep3 = LinearCode::repetition(3).unwrap();
        let p = partition(&rep3, &bs("100")).unwrap();
        let s = sly_intermediate(&p).unwrap();
        // weight-1 and weight-2 strings all tie at max 2; 001 is the first of them
        assert_eq!(s, Intermediate { word: bs("001"), dist0: 1, dist1: 2 });

        let rep4 = LinearCode::repetition(4).unwrap();
        let p = partition(&rep4, &bs("1000")).unwrap();
        let s = sly_intermediate(&p).unwrap();
        assert_eq!(s, Intermediate { word: bs("0011"), dist0: 2, dist1: 2 });
    }

    #[test]
    fn nearest_codeword() {
        let h = LinearCode::hamming74();
        let p = partition(&h, &bs("1000000")).unwrap();
        for c in h.codewords() {
            let b = dot_and_xor(&c, p.r()).unwrap();
            assert_eq!(p.nearest(b, &c).unwrap(), (c.clone(), 0));
        }
    }
}
