use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// `n`-qubit Pauli operator `i^phase · σ_0 ⊗ … ⊗ σ_{n-1}` stored as packed
/// X/Z bit vectors, with `σ(1,1) = Y` (Hermitian letters).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// Unsigned Pauli from raw bit vectors (bit `q` of word `q / 64`).
    pub fn from_bits(n: usize, x: Vec<u64>, z: Vec<u64>) -> Self {
        let mut p = Self { n, x, z, phase: 0 };
        p.x.resize(words(n), 0);
        p.z.resize(words(n), 0);
        p.mask_tail();
        p
    }

    fn mask_tail(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            let last = self.x.len() - 1;
            let m = (1u64 << r) - 1;
            self.x[last] &= m;
            self.z[last] &= m;
        }
        if self.n == 0 {
            self.x.iter_mut().for_each(|w| *w = 0);
            self.z.iter_mut().for_each(|w| *w = 0);
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    /// `+1` / `-1` for Hermitian strings, `None` when the phase is `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set_letter(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = letter.bits();
        let (w, b) = (q / 64, 1u64 << (q % 64));
        if xb {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if zb {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Number of sites carrying X or Y, i.e. bits flipped when acting on `|0…0⟩`.
    pub fn x_weight(&self) -> usize {
        self.x.iter().map(|a| a.count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|w| *w == 0)
    }

    pub fn support(&self) -> PauliSupport {
        PauliSupport { n: self.n, bits: self.x.iter().zip(&self.z).map(|(a, b)| a | b).collect() }
    }

    /// Equality ignoring the phase.
    pub fn unsigned_eq(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Copy with the phase cleared.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..self.clone() }
    }

    /// Symplectic product: `false` iff the two strings commute.
    pub fn anticommutes(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        acc == 1
    }

    pub fn commutes(&self, other: &Self) -> bool {
        !self.anticommutes(other)
    }

    /// In-place right multiplication `self ← self · rhs`, tracking the phase.
    pub fn mul_assign_right(&mut self, rhs: &Self) {
        debug_assert_eq!(self.n, rhs.n);
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], rhs.x[i], rhs.z[i]);
            let (a_x, a_y, a_z) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (b_x, b_y, b_z) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let delta = (plus + 3 * minus) % 4;
        self.phase = ((self.phase as u32 + rhs.phase as u32 + delta) % 4) as u8;
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }

    /// Restriction to `sites` (in that order), phase dropped.
    pub fn restrict(&self, sites: &[usize]) -> Self {
        let mut p = Self::identity(sites.len());
        for (i, &s) in sites.iter().enumerate() {
            p.set_letter(i, self.letter(s));
        }
        p
    }

    /// Overwrite the letters on `sites` with those of `sub` and multiply the
    /// phase by `sub`'s phase.
    pub fn splice(&mut self, sites: &[usize], sub: &Self) {
        for (i, &s) in sites.iter().enumerate() {
            self.set_letter(s, sub.letter(i));
        }
        self.phase = (self.phase + sub.phase) & 3;
    }

    /// Uniform over the `4^n − 1` non-identity strings, phase `+1`.
    pub fn random_nonidentity<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("random Pauli needs n >= 1".into()));
        }
        loop {
            let x: Vec<u64> = (0..words(n)).map(|_| rng.gen()).collect();
            let z: Vec<u64> = (0..words(n)).map(|_| rng.gen()).collect();
            let p = Self::from_bits(n, x, z);
            if !p.is_identity() {
                return Ok(p);
            }
        }
    }

    /// Dense index in `[0, 4^n)` of the unsigned string (two bits per qubit,
    /// qubit 0 most significant). Only for `n <= 31`.
    pub fn index(&self) -> u64 {
        assert!(self.n <= 31);
        let mut k = 0u64;
        for q in 0..self.n {
            let (x, z) = self.letter(q).bits();
            k = (k << 2) | ((x as u64) << 1) | z as u64;
        }
        k
    }

    pub fn from_index(n: usize, mut k: u64) -> Self {
        let mut p = Self::identity(n);
        for q in (0..n).rev() {
            p.set_letter(q, Letter::from_bits(k & 2 != 0, k & 1 != 0));
            k >>= 2;
        }
        p
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Literal over `{I,X,Y,Z}` with an optional leading `+`/`-`, e.g. `-XIZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = match s.as_bytes().first() {
            Some(b'-') => (2, &s[1..]),
            Some(b'+') => (0, &s[1..]),
            _ => (0, s),
        };
        if body.is_empty() {
            return Err(Error::Parse("empty Pauli literal".into()));
        }
        let mut letters = Vec::with_capacity(body.len());
        for (i, c) in body.chars().enumerate() {
            letters.push(match c.to_ascii_uppercase() {
                'I' | '_' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                _ => return Err(Error::Parse(format!("bad Pauli letter {c:?} at position {i}"))),
            });
        }
        let mut p = Self::from_letters(&letters);
        p.phase = phase;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Non-identity sites of a Pauli string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliSupport {
    n: usize,
    bits: Vec<u64>,
}

impl PauliSupport {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn contains(&self, q: usize) -> bool {
        (self.bits[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.contains(q)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pattern as an integer with bit `q` set for site `q` (only for `n <= 64`).
    pub fn mask(&self) -> u64 {
        assert!(self.n <= 64);
        self.bits[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let p: PauliString = "-XIZ".parse().unwrap();
        assert_eq!(p.to_string(), "-XIZ");
        assert_eq!(p.sign(), Some(-1));
        assert_eq!(p.weight(), 2);
        assert!("XAZ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn letter_products() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(x.mul(&y).to_string(), "iZ");
        assert_eq!(y.mul(&x).to_string(), "-iZ");
        assert_eq!(y.mul(&z).to_string(), "iX");
        assert_eq!(z.mul(&x).to_string(), "iY");
        assert_eq!(x.mul(&z).to_string(), "-iY");
        assert_eq!(x.mul(&x).to_string(), "I");
    }

    #[test]
    fn supports() {
        assert!(PauliString::identity(3).support().is_empty());
        let p: PauliString = "XIZ".parse().unwrap();
        assert_eq!(p.support().sites(), vec![0, 2]);
    }

    #[test]
    fn long_strings_cross_word_boundaries() {
        let mut a = PauliString::identity(130);
        a.set_letter(0, Letter::X);
        a.set_letter(64, Letter::Z);
        a.set_letter(129, Letter::Y);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.x_weight(), 2);
        let b = PauliString::single(130, 129, Letter::X);
        assert!(a.anticommutes(&b));
    }

    #[test]
    fn weight_one_frequency() {
        // 3n weight-1 strings among 4^n − 1
        let mut rng = crate::rng::SeedStream::new(11).substream(0);
        let trials = 60_000;
        let hits = (0..trials)
            .filter(|_| PauliString::random_nonidentity(2, &mut rng).unwrap().weight() == 1)
            .count();
        let p = 6.0 / 15.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 3.0 * sigma);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(l, ph)| {
            let letters: Vec<Letter> = l.iter().map(|&k| [Letter::I, Letter::X, Letter::Y, Letter::Z][k as usize]).collect();
            let mut p = PauliString::from_letters(&letters);
            p.set_phase(ph);
            p
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_pauli(5), b in arb_pauli(5), c in arb_pauli(5)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_matches_product_order(a in arb_pauli(4), b in arb_pauli(4)) {
            let ab = a.mul(&b);
            let mut ba = b.mul(&a);
            if a.anticommutes(&b) { ba.negate(); }
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn literal_round_trip(a in arb_pauli(6)) {
            let mut h = a.clone();
            if h.phase() % 2 == 1 { h.set_phase(0); }
            let back: PauliString = h.to_string().parse().unwrap();
            prop_assert_eq!(back, h);
        }
    }
}
