//! Integer and word codings: the Cantor pairing `phi`/`pair`, the bound `M`,
//! the length-then-lex bijection `psi`, tuple codes, and the two operations on
//! eventually-constant sequences (`symdiff`, `shift`).
//!
//! Naturals are `u128`. Everything that can overflow returns
//! [`CodingError::Overflow`] instead of wrapping.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Natural numbers used for levels, positions and codes.
pub type Nat = u128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("arithmetic overflow while coding")]
    Overflow,
    #[error("tuple code of the empty sequence is undefined")]
    EmptyTuple,
    #[error("invalid word literal {0:?}")]
    BadWord(String),
    #[error("invalid sequence literal {0:?} (expected tail:prefix)")]
    BadSeq(String),
}

/// A bit index `ε ∈ {0, 1}`; selects the `s`/`t` coordinate of a pair, or the
/// left/right part of a bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Zero,
    One,
}

impl Side {
    pub fn bit(self) -> bool {
        self == Side::One
    }

    pub fn other(self) -> Side {
        match self {
            Side::Zero => Side::One,
            Side::One => Side::Zero,
        }
    }
}

/// `∑_{k ≤ n} k`, or `None` if it does not fit.
pub fn triangular(n: Nat) -> Option<Nat> {
    // halve the even factor first so n(n+1) never has to exist on its own
    if n % 2 == 0 {
        (n / 2).checked_mul(n + 1)
    } else {
        n.checked_mul(n.checked_add(1)? / 2)
    }
}

/// Largest `m` with `m(m+1)/2 ≤ q`.
pub fn big_m(q: Nat) -> Nat {
    let mut m = if q <= Nat::MAX / 2 {
        (2 * q).isqrt()
    } else {
        (q / 2).isqrt() * 2
    };
    while triangular(m).is_none_or(|t| t > q) {
        m -= 1;
    }
    while triangular(m + 1).is_some_and(|t| t <= q) {
        m += 1;
    }
    m
}

/// An ordered pair of naturals, the value of `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatPair {
    pub first: Nat,
    pub second: Nat,
}

impl NatPair {
    pub fn new(first: Nat, second: Nat) -> Self {
        NatPair { first, second }
    }
}

impl fmt::Display for NatPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

/// `phi(q) = ((q)₀, (q)₁)`, walking the anti-diagonals `(M,0), (M-1,1), …`.
pub fn phi(q: Nat) -> NatPair {
    let m = big_m(q);
    let t = triangular(m).expect("T(M(q)) <= q");
    let d = q - t;
    NatPair::new(m - d, d)
}

/// `⟨n, p⟩ = ∑_{k ≤ n+p} k + p`, the inverse of [`phi`].
pub fn pair(n: Nat, p: Nat) -> Result<Nat, CodingError> {
    let s = n.checked_add(p).ok_or(CodingError::Overflow)?;
    triangular(s)
        .and_then(|t| t.checked_add(p))
        .ok_or(CodingError::Overflow)
}

/// Tuple code: `p(s) = s(0)` for `|s| = 1`, else `⟨p(s↾(|s|-1)), s(|s|-1)⟩`.
pub fn pcode(s: &[Nat]) -> Result<Nat, CodingError> {
    let (&first, rest) = s.split_first().ok_or(CodingError::EmptyTuple)?;
    rest.iter().try_fold(first, |acc, &x| pair(acc, x))
}

/// A finite binary word.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<bool>);

impl Word {
    pub fn new() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Word(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Word(vec![false; n])
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_index(value: u64, len: usize) -> Self {
        Word(
            (0..len)
                .rev()
                .map(|i| i < 64 && (value >> i) & 1 == 1)
                .collect(),
        )
    }

    /// Inverse of [`Word::from_index`]; words longer than 64 bits are rejected.
    pub fn to_index(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.extend_from(other);
        w
    }

    pub fn with(&self, b: bool) -> Word {
        let mut w = self.clone();
        w.push(b);
        w
    }

    /// `w↾n`; `n` larger than the length returns the whole word.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    /// Non-strict prefix order `self ≺ other`.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn last_one(&self) -> Option<usize> {
        self.0.iter().rposition(|&b| b)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = CodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(Word::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CodingError::BadWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl From<&str> for Word {
    /// Panics on anything but `0`, `1` or `-`; meant for literals.
    fn from(s: &str) -> Self {
        s.parse().expect("word literal")
    }
}

/// `ψ(q)`: words ordered by length, then lexicographically with `0 < 1`.
pub fn psi(q: Nat) -> Word {
    let len = if q == Nat::MAX { 128 } else { (q + 1).ilog2() };
    let base = if len == 128 { Nat::MAX } else { (1 << len) - 1 };
    let idx = q - base;
    Word((0..len).rev().map(|i| (idx >> i) & 1 == 1).collect())
}

/// `ψ⁻¹(w) = 2^|w| − 1 + value(w)`.
pub fn psi_inv(w: &Word) -> Result<Nat, CodingError> {
    let len = w.len();
    if len > 128 {
        return Err(CodingError::Overflow);
    }
    let value = w.0.iter().fold(0 as Nat, |acc, &b| (acc << 1) | b as Nat);
    let base = if len == 128 { Nat::MAX } else { (1 << len) - 1 };
    base.checked_add(value).ok_or(CodingError::Overflow)
}

/// An eventually constant element of `2^ω`, kept in canonical form: the
/// prefix never ends with the tail bit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EvConstSeq {
    prefix: Word,
    tail: bool,
}

impl EvConstSeq {
    pub fn new(prefix: Word, tail: bool) -> Self {
        let mut bits = prefix.0;
        while bits.last() == Some(&tail) {
            bits.pop();
        }
        EvConstSeq {
            prefix: Word(bits),
            tail,
        }
    }

    pub fn constant(tail: bool) -> Self {
        EvConstSeq {
            prefix: Word::new(),
            tail,
        }
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn tail(&self) -> bool {
        self.tail
    }

    /// Every coordinate from here on equals the tail.
    pub fn certificate(&self) -> usize {
        self.prefix.len()
    }

    pub fn get(&self, m: Nat) -> bool {
        if m < self.prefix.len() as Nat {
            self.prefix.0[m as usize]
        } else {
            self.tail
        }
    }

    /// The first `n` coordinates.
    pub fn take(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.get(i as Nat)).collect())
    }

    pub fn prepend(&self, b: bool) -> Self {
        let mut bits = vec![b];
        bits.extend_from_slice(&self.prefix.0);
        EvConstSeq::new(Word(bits), self.tail)
    }

    pub fn is_zero(&self) -> bool {
        self.prefix.is_empty() && !self.tail
    }
}

impl fmt::Display for EvConstSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tail as u8, self.prefix)
    }
}

impl fmt::Debug for EvConstSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EvConstSeq({self})")
    }
}

impl FromStr for EvConstSeq {
    type Err = CodingError;

    /// `tail:prefix`, e.g. `0:-` for `0^∞` or `1:0` for `01^∞`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodingError::BadSeq(s.to_string());
        let (tail, prefix) = s.split_once(':').ok_or_else(bad)?;
        let tail = match tail {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        let prefix: Word = prefix.parse().map_err(|_| bad())?;
        Ok(EvConstSeq::new(prefix, tail))
    }
}

/// Coordinatewise XOR.
pub fn symdiff(a: &EvConstSeq, b: &EvConstSeq) -> EvConstSeq {
    let n = a.prefix.len().max(b.prefix.len());
    let bits = (0..n as Nat).map(|i| a.get(i) ^ b.get(i)).collect();
    EvConstSeq::new(Word(bits), a.tail ^ b.tail)
}

/// `𝒮(α)(m) = α(m+1)`.
pub fn shift(a: &EvConstSeq) -> EvConstSeq {
    match a.prefix.0.split_first() {
        Some((_, rest)) => EvConstSeq::new(Word(rest.to_vec()), a.tail),
        None => a.clone(),
    }
}
