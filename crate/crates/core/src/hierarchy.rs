//! The maps `ρ₀^ξ` on eventually constant sequences, and membership in
//! `H_{1+ξ} = (ρ₀^ξ)⁻¹{0^∞}` and `S_{1+ξ}`.
//!
//! `ρ₀(ε)(i) = 1` iff `ε(⟨i, j⟩) = 0` for every `j`. A tail-0 input therefore
//! maps to a tail-1 output and vice versa, and positions past a certificate
//! only ever see the tail.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::codings::{pair, phi, shift, symdiff, triangular, EvConstSeq, Nat, Word};
use crate::testkit::{branch_member, Test, TestError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(Unavailable),
    #[error("fundamental sequence entries must be positive")]
    ZeroEntry,
    #[error("invalid ordinal {0:?} (expected a natural, omega, or omega:k1,k2,...)")]
    BadOrdinal(String),
    #[error("operation needs a finite ordinal")]
    NotFinite,
    #[error(transparent)]
    Test(#[from] TestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unavailable {
    /// The stage tails keep flipping, so the output is not eventually
    /// constant.
    NotEventuallyConstant { from_stage: usize },
    /// No stable tail after the configured number of stages.
    StageLimit { stages: usize },
}

impl fmt::Display for Unavailable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unavailable::NotEventuallyConstant { from_stage } => {
                write!(f, "output alternates from stage {from_stage} on")
            }
            Unavailable::StageLimit { stages } => {
                write!(f, "no stable tail within {stages} stages")
            }
        }
    }
}

/// An eventually constant choice of positive `ξ_k`: the listed entries, then
/// `tail` forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalSeq {
    head: Vec<u64>,
    tail: u64,
}

impl FundamentalSeq {
    pub fn new(head: Vec<u64>, tail: u64) -> Result<Self, HierarchyError> {
        if tail == 0 || head.contains(&0) {
            return Err(HierarchyError::ZeroEntry);
        }
        Ok(FundamentalSeq { head, tail })
    }

    pub fn get(&self, k: usize) -> u64 {
        self.head.get(k).copied().unwrap_or(self.tail)
    }
}

impl Default for FundamentalSeq {
    fn default() -> Self {
        FundamentalSeq {
            head: Vec::new(),
            tail: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrdinalExpr {
    Finite(u64),
    Omega(FundamentalSeq),
}

impl OrdinalExpr {
    pub fn omega() -> Self {
        OrdinalExpr::Omega(FundamentalSeq::default())
    }
}

impl fmt::Display for OrdinalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalExpr::Finite(n) => write!(f, "{n}"),
            OrdinalExpr::Omega(fs) if *fs == FundamentalSeq::default() => f.write_str("omega"),
            OrdinalExpr::Omega(fs) => {
                let mut parts: Vec<String> = fs.head.iter().map(u64::to_string).collect();
                parts.push(fs.tail.to_string());
                write!(f, "omega:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for OrdinalExpr {
    type Err = HierarchyError;

    /// `n`, `omega`, or `omega:k1,...,kn` where `kn` repeats forever.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HierarchyError::BadOrdinal(s.to_string());
        if let Ok(n) = s.parse::<u64>() {
            return Ok(OrdinalExpr::Finite(n));
        }
        match s.split_once(':') {
            None if s == "omega" => Ok(OrdinalExpr::omega()),
            Some(("omega", list)) => {
                let mut ks = list
                    .split(',')
                    .map(|k| k.trim().parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                let tail = ks.pop().ok_or_else(bad)?;
                Ok(OrdinalExpr::Omega(FundamentalSeq::new(ks, tail)?))
            }
            _ => Err(bad()),
        }
    }
}

/// How far the limit stage is pursued before giving up.
#[derive(Debug, Clone, Copy)]
pub struct LimitConfig {
    pub max_stages: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { max_stages: 4096 }
    }
}

/// A sequence with a bound past which every coordinate equals the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedSeq {
    seq: EvConstSeq,
    cert: usize,
}

impl CertifiedSeq {
    pub fn new(seq: EvConstSeq) -> Self {
        let cert = seq.certificate();
        CertifiedSeq { seq, cert }
    }

    /// Keeps a looser bound `cert ≥ |prefix|`.
    pub fn with_certificate(seq: EvConstSeq, cert: usize) -> Self {
        let cert = cert.max(seq.certificate());
        CertifiedSeq { seq, cert }
    }

    pub fn seq(&self) -> &EvConstSeq {
        &self.seq
    }

    pub fn certificate(&self) -> usize {
        self.cert
    }

    pub fn tail(&self) -> bool {
        self.seq.tail()
    }

    pub fn get(&self, i: Nat) -> bool {
        self.seq.get(i)
    }

    /// Coordinates `N..N+64` all equal the tail.
    pub fn spot_check(&self) -> bool {
        (0..64).all(|d| self.get((self.cert + d) as Nat) == self.tail())
    }

    pub fn is_zero(&self) -> bool {
        self.seq.is_zero()
    }
}

impl From<EvConstSeq> for CertifiedSeq {
    fn from(seq: EvConstSeq) -> Self {
        CertifiedSeq::new(seq)
    }
}

/// One application of `ρ₀`, with output certificate
/// `N′ = min{i : i(i+1)/2 > N}`.
pub fn rho0(e: &CertifiedSeq) -> CertifiedSeq {
    let n = e.cert as Nat;
    let n_out = (0..)
        .find(|&i| triangular(i).expect("small") > n)
        .expect("exists");
    let bits = (0..n_out)
        .map(|i| {
            let mut j = 0;
            loop {
                let pos = pair(i, j).expect("below the certificate");
                if pos >= n {
                    // every later ⟨i, j⟩ lands in the tail
                    return !e.tail();
                }
                if e.get(pos) {
                    return false;
                }
                j += 1;
            }
        })
        .collect();
    CertifiedSeq::with_certificate(
        EvConstSeq::new(Word::from_bits(bits), !e.tail()),
        n_out as usize,
    )
}

fn rho0_finite(n: u64, e: &CertifiedSeq) -> CertifiedSeq {
    let mut x = e.clone();
    for done in 0..n {
        if x.seq.prefix().is_empty() {
            let flips = (n - done) % 2 == 1;
            return CertifiedSeq::new(EvConstSeq::constant(x.tail() ^ flips));
        }
        x = rho0(&x);
    }
    x
}

/// `ρ₀^ξ(ε)` with the default [`LimitConfig`].
pub fn rho0_pow(xi: &OrdinalExpr, e: &CertifiedSeq) -> Result<CertifiedSeq, HierarchyError> {
    rho0_pow_with(xi, e, &LimitConfig::default())
}

/// `ρ₀^ξ(ε)`. For `ξ = ω`, stage `k` keeps the first `k` coordinates and
/// applies `ρ₀^{ξ_k}` to the rest; output coordinate `k` is read after
/// stage `k`.
pub fn rho0_pow_with(
    xi: &OrdinalExpr,
    e: &CertifiedSeq,
    config: &LimitConfig,
) -> Result<CertifiedSeq, HierarchyError> {
    let fs = match xi {
        OrdinalExpr::Finite(n) => return Ok(rho0_finite(*n, e)),
        OrdinalExpr::Omega(fs) => fs,
    };
    let mut x = e.clone();
    let mut out = Vec::new();
    for k in 0..config.max_stages {
        if k >= x.seq.prefix().len() {
            return constant_regime(fs, k, x.tail(), out, config);
        }
        let mut rest = x.seq.clone();
        for _ in 0..k {
            rest = shift(&rest);
        }
        let y = rho0_finite(fs.get(k), &CertifiedSeq::with_certificate(rest, x.cert - k));
        let mut bits = x.seq.take(k);
        bits.extend_from(y.seq.prefix());
        x = CertifiedSeq::with_certificate(EvConstSeq::new(bits, y.tail()), k + y.cert);
        out.push(x.get(k as Nat));
    }
    Err(HierarchyError::CertificateUnavailable(
        Unavailable::StageLimit {
            stages: config.max_stages,
        },
    ))
}

/// From stage `k` on the remaining suffix is constant, so each stage just
/// flips the tail `ξ_j` times.
fn constant_regime(
    fs: &FundamentalSeq,
    k: usize,
    mut c: bool,
    mut out: Vec<bool>,
    config: &LimitConfig,
) -> Result<CertifiedSeq, HierarchyError> {
    let settle = k.max(fs.head.len());
    if settle > config.max_stages {
        return Err(HierarchyError::CertificateUnavailable(
            Unavailable::StageLimit {
                stages: config.max_stages,
            },
        ));
    }
    for j in k..settle {
        c ^= fs.get(j) % 2 == 1;
        out.push(c);
    }
    if fs.tail % 2 == 1 {
        return Err(HierarchyError::CertificateUnavailable(
            Unavailable::NotEventuallyConstant { from_stage: settle },
        ));
    }
    let cert = out.len();
    Ok(CertifiedSeq::with_certificate(
        EvConstSeq::new(Word::from_bits(out), c),
        cert,
    ))
}

/// `ε ∈ H_{1+ξ}`, i.e. `ρ₀^ξ(ε) = 0^∞`.
pub fn h_member(xi: &OrdinalExpr, e: &CertifiedSeq) -> Result<bool, HierarchyError> {
    Ok(rho0_pow(xi, e)?.is_zero())
}

/// `(α, β) ∈ [T]` and `𝒮(α Δ β) ∉ H_{1+ξ}`.
pub fn s_member(
    xi: &OrdinalExpr,
    alpha: &EvConstSeq,
    beta: &EvConstSeq,
    test: &Test,
) -> Result<bool, HierarchyError> {
    if !branch_member(alpha, beta, test)? {
        return Ok(false);
    }
    let d = shift(&symdiff(alpha, beta));
    Ok(!h_member(xi, &CertifiedSeq::new(d))?)
}

/// An eventually constant sequence stored by its exceptional positions,
/// for sequences whose few exceptions sit at astronomically large indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSeq {
    tail: bool,
    exceptions: BTreeSet<Nat>,
}

impl SparseSeq {
    pub fn new(tail: bool, exceptions: impl IntoIterator<Item = Nat>) -> Self {
        SparseSeq {
            tail,
            exceptions: exceptions.into_iter().collect(),
        }
    }

    pub fn tail(&self) -> bool {
        self.tail
    }

    pub fn exceptions(&self) -> &BTreeSet<Nat> {
        &self.exceptions
    }

    pub fn get(&self, i: Nat) -> bool {
        self.tail ^ self.exceptions.contains(&i)
    }

    /// Tail 1 has a 1 in every column, giving `0^∞`. Tail 0 gives tail 1 with
    /// a 0 exactly in the columns `(P)₀` of the 1-positions `P`.
    pub fn rho0(&self) -> SparseSeq {
        if self.tail {
            return SparseSeq::new(false, []);
        }
        SparseSeq::new(true, self.exceptions.iter().map(|&p| phi(p).first))
    }

    pub fn rho0_pow(&self, xi: &OrdinalExpr) -> Result<SparseSeq, HierarchyError> {
        let OrdinalExpr::Finite(n) = *xi else {
            return Err(HierarchyError::NotFinite);
        };
        let mut x = self.clone();
        for done in 0..n {
            if x.exceptions.is_empty() {
                x.tail ^= (n - done) % 2 == 1;
                return Ok(x);
            }
            x = x.rho0();
        }
        Ok(x)
    }
}

impl From<&EvConstSeq> for SparseSeq {
    fn from(e: &EvConstSeq) -> Self {
        let ex = e
            .prefix()
            .bits()
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b != e.tail())
            .map(|(i, _)| i as Nat);
        SparseSeq::new(e.tail(), ex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> CertifiedSeq {
        CertifiedSeq::new(x.parse().unwrap())
    }

    /// Straight from the definition, reading `⟨i, j⟩` for `j < 200`.
    fn rho0_brute(e: &CertifiedSeq, i: Nat) -> bool {
        (0..200).all(|j| !e.get(pair(i, j).unwrap()))
    }

    fn random_seq(rng: &mut ChaCha8Rng, max_len: usize) -> CertifiedSeq {
        let len = rng.gen_range(0..=max_len);
        let bits = (0..len).map(|_| rng.gen_bool(0.5)).collect();
        CertifiedSeq::new(EvConstSeq::new(Word::from_bits(bits), rng.gen_bool(0.5)))
    }

    #[test]
    fn rho0_examples() {
        assert_eq!(rho0(&s("0:-")).seq(), s("1:-").seq());
        assert_eq!(rho0(&s("1:-")).seq(), s("0:-").seq());
        assert_eq!(rho0(&s("0:1")).seq(), s("1:0").seq());
    }

    #[test]
    fn rho0_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let e = random_seq(&mut rng, 64);
            let r = rho0(&e);
            assert_eq!(r.tail(), !e.tail());
            assert!(r.spot_check());
            for i in 0..200 {
                assert_eq!(r.get(i), rho0_brute(&e, i), "{e:?} at {i}");
            }
        }
    }

    #[test]
    fn powers() {
        assert_eq!(
            rho0_pow(&OrdinalExpr::Finite(0), &s("0:1101")).unwrap(),
            s("0:1101")
        );
        assert!(rho0_pow(&OrdinalExpr::Finite(2), &s("0:-"))
            .unwrap()
            .is_zero());
        let one = rho0_pow(&OrdinalExpr::Finite(1), &s("1:0")).unwrap();
        for i in 0..32 {
            assert_eq!(one.get(i), rho0_brute(&s("1:0"), i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let e = random_seq(&mut rng, 40);
            for n in 0..=4 {
                let a = rho0_pow(&OrdinalExpr::Finite(n + 1), &e).unwrap();
                let b = rho0(&rho0_pow(&OrdinalExpr::Finite(n), &e).unwrap());
                assert_eq!(a.seq(), b.seq());
            }
        }
    }

    #[test]
    fn eventually_zero_inputs_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut e = random_seq(&mut rng, 30);
            if e.tail() {
                e = CertifiedSeq::new(EvConstSeq::new(e.seq().prefix().clone(), false));
            }
            assert!(rho0_pow(&OrdinalExpr::Finite(2), &e).unwrap().is_zero());
            assert_eq!(
                rho0_pow(&OrdinalExpr::Finite(3), &e).unwrap().seq(),
                s("1:-").seq()
            );
        }
    }

    #[test]
    fn membership() {
        assert!(h_member(&OrdinalExpr::Finite(0), &s("0:-")).unwrap());
        assert!(!h_member(&OrdinalExpr::Finite(0), &s("0:0001")).unwrap());
        assert!(!h_member(&OrdinalExpr::Finite(1), &s("0:-")).unwrap());
        assert!(h_member(&OrdinalExpr::Finite(1), &s("1:-")).unwrap());
        let test = Test::build(16).unwrap();
        let a: EvConstSeq = "0:0".parse().unwrap();
        let b: EvConstSeq = "0:1".parse().unwrap();
        assert!(s_member(&OrdinalExpr::Finite(1), &a, &b, &test).unwrap());
        assert!(!s_member(&OrdinalExpr::Finite(0), &a, &b, &test).unwrap());
        assert!(!s_member(&OrdinalExpr::Finite(1), &a, &a, &test).unwrap());
        assert!(matches!(
            s_member(&OrdinalExpr::Finite(1), &a, &"1:-".parse().unwrap(), &test),
            Err(HierarchyError::Test(TestError::UndecidedTails))
        ));
    }

    #[test]
    fn omega_with_odd_tail_has_no_certificate() {
        let r = rho0_pow(&OrdinalExpr::omega(), &s("0:0110"));
        assert!(matches!(
            r,
            Err(HierarchyError::CertificateUnavailable(
                Unavailable::NotEventuallyConstant { .. }
            ))
        ));
        assert!(h_member(&OrdinalExpr::omega(), &s("1:-")).is_err());
    }

    /// Stage-by-stage evaluation of the limit, each stage done coordinatewise
    /// with finite powers.
    fn omega_stages(fs: &FundamentalSeq, e: &CertifiedSeq, k_max: usize) -> Vec<bool> {
        let mut x = e.clone();
        let mut out = Vec::new();
        for k in 0..k_max {
            let n = x.certificate() + 1;
            let rest = EvConstSeq::new(
                Word::from_bits((k..k + n).map(|i| x.get(i as Nat)).collect()),
                x.tail(),
            );
            let y = rho0_pow(&OrdinalExpr::Finite(fs.get(k)), &CertifiedSeq::new(rest)).unwrap();
            let mut bits = x.seq().take(k);
            bits.extend_from(&y.seq().take(y.certificate()));
            x = CertifiedSeq::new(EvConstSeq::new(bits, y.tail()));
            out.push(x.get(k as Nat));
        }
        out
    }

    #[test]
    fn omega_with_even_tail_stabilizes() {
        let fs = FundamentalSeq::new(vec![1, 3], 2).unwrap();
        let xi = OrdinalExpr::Omega(fs.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let e = random_seq(&mut rng, 20);
            let r = rho0_pow(&xi, &e).unwrap();
            assert!(r.spot_check());
            let stages = omega_stages(&fs, &e, 40);
            for (k, &b) in stages.iter().enumerate() {
                assert_eq!(r.get(k as Nat), b, "{e:?} at {k}");
            }
        }
    }

    #[test]
    fn ordinal_literals() {
        assert_eq!("3".parse::<OrdinalExpr>().unwrap(), OrdinalExpr::Finite(3));
        assert_eq!(
            "omega".parse::<OrdinalExpr>().unwrap(),
            OrdinalExpr::omega()
        );
        let o: OrdinalExpr = "omega:1,2".parse().unwrap();
        assert_eq!(o.to_string(), "omega:1,2");
        assert!("omega:0".parse::<OrdinalExpr>().is_err());
        assert!("w".parse::<OrdinalExpr>().is_err());
    }

    #[test]
    fn sparse_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let e = random_seq(&mut rng, 48);
            let sp = SparseSeq::from(e.seq());
            for n in 0..4 {
                let xi = OrdinalExpr::Finite(n);
                let a = rho0_pow(&xi, &e).unwrap();
                let b = sp.rho0_pow(&xi).unwrap();
                for i in 0..64 {
                    assert_eq!(a.get(i), b.get(i));
                }
            }
        }
        let far = SparseSeq::new(false, [1 << 100]);
        assert!(!far.rho0().get(phi(1 << 100).first));
        assert!(far.rho0_pow(&OrdinalExpr::omega()).is_err());
    }
}
