//! The reduction `(α₀, f)` built from a test and a dense-open oracle.
//!
//! Words are ranked by `ψ`. Rank `r` with `ψ(r) = wε` gets a pair
//! `(s_{wε}, t_{wε})` that is a level of the test:
//!
//! ```text
//! s_{wε} = s_{ψ(r−1)} 0 U v        t_{wε} = t_w ε (X after |t_w|+1) v
//! ```
//!
//! where `U = u_{r, |s_{ψ(r−1)}|+1}` comes from the oracle, `X` is the known
//! part of `s_{wε}` and `v` pads up to the chosen level. Each rank is stored
//! as one level index, so lengths far beyond memory are fine: bits are read
//! from the test by coordinate access.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::codings::{pair, pcode, phi, psi, psi_inv, CodingError, EvConstSeq, Nat, Side, Word};
use crate::hierarchy::{rho0_pow, CertifiedSeq, HierarchyError, OrdinalExpr, SparseSeq};
use crate::testkit::{prefix_in_t, Test, TestError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("rank {rank} (w={word}): the level index does not fit in 128 bits")]
    Overflow { rank: Nat, word: Word },
    #[error("rank {rank} (w={word}): no level up to {searched} fits")]
    Exhausted {
        rank: Nat,
        word: Word,
        searched: Nat,
    },
    #[error("not enough materialized: {0}")]
    Insufficient(String),
    #[error("alpha has tail 1, so its difference sequence is not eventually zero")]
    TailOne,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Test(#[from] TestError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// `q, l ↦ u_{q,l}`, with `N_{s u_{q,l}} ⊆ O_q` for all `s ∈ 2^l`.
pub trait DenseOpenOracle {
    fn word(&self, q: Nat, l: Nat) -> Word;

    fn name(&self) -> &str {
        "custom"
    }
}

/// `u = ∅`: every `O_q` is the whole space.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialOracle;

impl DenseOpenOracle for TrivialOracle {
    fn word(&self, _q: Nat, _l: Nat) -> Word {
        Word::new()
    }

    fn name(&self) -> &str {
        "trivial"
    }
}

/// `u_{q,l} = 0^{max(0, q+1−l)} 1`: `O_q` asks for a 1 somewhere after
/// position `q`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeenOneOracle;

impl DenseOpenOracle for SeenOneOracle {
    fn word(&self, q: Nat, l: Nat) -> Word {
        let zeros = (q + 1).saturating_sub(l);
        Word::zeros(zeros as usize).with(true)
    }

    fn name(&self) -> &str {
        "seen-one"
    }
}

impl<F: Fn(Nat, Nat) -> Word> DenseOpenOracle for F {
    fn word(&self, q: Nat, l: Nat) -> Word {
        self(q, l)
    }
}

/// Everything known about a rank before its level is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: Nat,
    /// `ψ(rank)`.
    pub word: Word,
    /// `|s_{ψ(rank−1)}|`, 0 for rank 0.
    pub prev_level: Nat,
    /// The oracle word `u_{rank, prev_level+1}`.
    pub u: Word,
    /// `|t_w|` for `ψ(rank) = wε`; `None` at rank 0.
    pub parent_level: Option<Nat>,
    pub eps: bool,
    /// Last position where `s_{wε}` and `t_{wε}` differ.
    pub split: Nat,
    /// Required `(|t_{wε}| − 1)₀`, i.e. `(|wε|)₀`.
    pub m: Nat,
    /// Length of the forced part `X` of `s_{wε}`.
    pub x_len: Nat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEntry {
    pub info: RankInfo,
    /// `|s_{wε}| = |t_{wε}|`; the pair is level `level` of the test.
    pub level: Nat,
}

impl RankEntry {
    pub fn v_len(&self) -> Nat {
        self.level - self.info.x_len
    }
}

/// The first rank whose level could not be found, with its forced prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frontier {
    pub info: RankInfo,
    pub error: ReductionError,
}

pub struct ReductionData<'a> {
    test: &'a Test,
    oracle: &'a dyn DenseOpenOracle,
    ranks: Vec<RankEntry>,
    frontier: Option<Frontier>,
    faults: BTreeSet<(usize, Nat)>,
}

impl fmt::Debug for ReductionData<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReductionData")
            .field("oracle", &self.oracle.name())
            .field("ranks", &self.ranks)
            .field("frontier", &self.frontier)
            .finish()
    }
}

/// Materializes ranks `0..=max_rank`, stopping early at the first rank
/// whose level cannot be found (see [`ReductionData::frontier`]).
pub fn build_reduction<'a>(
    test: &'a Test,
    oracle: &'a dyn DenseOpenOracle,
    max_rank: usize,
) -> ReductionData<'a> {
    let mut rd = ReductionData {
        test,
        oracle,
        ranks: Vec::new(),
        frontier: None,
        faults: BTreeSet::new(),
    };
    let _ = rd.extend_to(max_rank);
    rd
}

impl<'a> ReductionData<'a> {
    pub fn test(&self) -> &'a Test {
        self.test
    }

    pub fn ranks(&self) -> &[RankEntry] {
        &self.ranks
    }

    pub fn frontier(&self) -> Option<&Frontier> {
        self.frontier.as_ref()
    }

    /// Materializes up to `max_rank`; fails with the frontier error if that
    /// rank cannot be reached.
    pub fn extend_to(&mut self, max_rank: usize) -> Result<(), ReductionError> {
        while self.ranks.len() <= max_rank {
            if let Some(f) = &self.frontier {
                return Err(f.error.clone());
            }
            let info = self.rank_info(self.ranks.len() as Nat)?;
            match self.find_level(&info) {
                Ok(level) => self.ranks.push(RankEntry { info, level }),
                Err(error) => {
                    self.frontier = Some(Frontier {
                        info,
                        error: error.clone(),
                    });
                    return Err(error);
                }
            }
        }
        Ok(())
    }

    /// Materializes ranks until `α₀` is known to `n` bits.
    pub fn ensure_length(&mut self, n: usize) -> Result<(), ReductionError> {
        while self.ranks.last().is_none_or(|e| e.level < n as Nat) {
            if self
                .frontier
                .as_ref()
                .is_some_and(|f| f.info.x_len >= n as Nat)
            {
                return Ok(());
            }
            self.extend_to(self.ranks.len())?;
        }
        Ok(())
    }

    /// Flips bit `i` of `s` for the given rank in every later readout.
    /// Used to check that the verifier notices broken data.
    pub fn inject_fault(&mut self, rank: usize, i: Nat) {
        self.faults.insert((rank, i));
    }

    fn rank_info(&self, rank: Nat) -> Result<RankInfo, ReductionError> {
        let word = psi(rank);
        let prev_level = if rank == 0 {
            0
        } else {
            self.ranks[rank as usize - 1].level
        };
        let u = self.oracle.word(rank, prev_level + 1);
        let x_len = if rank == 0 { 1 } else { prev_level + 1 } + u.len() as Nat;
        let m = phi(word.len() as Nat).first;
        if rank == 0 {
            return Ok(RankInfo {
                rank,
                word,
                prev_level,
                u,
                parent_level: None,
                eps: true,
                split: 0,
                m,
                x_len,
            });
        }
        let eps = word.bits()[word.len() - 1];
        let parent_rank = (rank - 1 - eps as Nat) / 2;
        let lw = self.ranks[parent_rank as usize].level;
        let split = if eps {
            lw
        } else {
            self.test.split_point(lw)?.ok_or_else(|| {
                ReductionError::Inconsistent(format!("level {lw} has no split point"))
            })?
        };
        Ok(RankInfo {
            rank,
            word,
            prev_level,
            u,
            parent_level: Some(lw),
            eps,
            split,
            m,
            x_len,
        })
    }

    fn x_bit(&self, info: &RankInfo, i: Nat) -> Result<bool, ReductionError> {
        let base = if info.rank == 0 { 0 } else { info.prev_level };
        if i < base {
            return Ok(self.test.bit(info.prev_level, Side::Zero, i)?);
        }
        if i == base {
            return Ok(false);
        }
        Ok(info.u.get((i - base - 1) as usize).unwrap_or(false))
    }

    fn y_bit(&self, info: &RankInfo, i: Nat) -> Result<bool, ReductionError> {
        match info.parent_level {
            None if i == 0 => Ok(true),
            Some(lw) if i < lw => Ok(self.test.bit(lw, Side::One, i)?),
            Some(lw) if i == lw => Ok(info.eps),
            _ => self.x_bit(info, i),
        }
    }

    fn x_last_one(&self, info: &RankInfo) -> Result<Option<Nat>, ReductionError> {
        let base = if info.rank == 0 { 0 } else { info.prev_level };
        if let Some(j) = info.u.last_one() {
            return Ok(Some(base + 1 + j as Nat));
        }
        if info.rank == 0 {
            return Ok(None);
        }
        Ok(self.test.last_one(info.prev_level, Side::Zero)?)
    }

    fn find_level(&self, info: &RankInfo) -> Result<Nat, ReductionError> {
        if self.test.is_canonical() {
            self.canonical_level(info)
        } else {
            self.scan_level(info)
        }
    }

    /// Least canonical level `L ≥ |X|` extending `(X, Y)` with
    /// `(L−1)₀ = m`. Such a level is `⟨m, ⟨p, b⟩⟩ + 1` where `p` is the
    /// split point and `ψ(b) 0^pad` continues `u = X[p+1..]`. Candidates are
    /// taken by increasing `|ψ(b)|`, and within one length the level grows
    /// with `b`.
    fn canonical_level(&self, info: &RankInfo) -> Result<Nat, ReductionError> {
        let overflow = || ReductionError::Overflow {
            rank: info.rank,
            word: info.word.clone(),
        };
        let (p, m, x_len) = (info.split, info.m, info.x_len);
        let ulen = x_len - p - 1;
        let k1 = match self.x_last_one(info)? {
            Some(l) if l > p => l - p,
            _ => 0,
        };
        if k1 > 128 {
            return Err(overflow());
        }
        let k1 = k1 as usize;
        let x_word = |from: Nat, len: usize| -> Result<Word, ReductionError> {
            (0..len as Nat)
                .map(|j| self.x_bit(info, from + j))
                .collect::<Result<Vec<_>, _>>()
                .map(Word::from_bits)
        };
        let u_head = x_word(p + 1, k1)?;
        let level_of = |b: Nat| pair(p, b).and_then(|r| pair(m, r)).ok();
        for ell in k1..=128usize {
            if ell as Nat <= ulen {
                let b = psi_inv(&u_head.concat(&Word::zeros(ell - k1))).map_err(|_| overflow())?;
                let q = level_of(b).ok_or_else(overflow)?;
                if q >= x_len - 1 {
                    return q.checked_add(1).ok_or_else(overflow);
                }
                continue;
            }
            let extra = ell - ulen as usize;
            let u_full = x_word(p + 1, ulen as usize)?;
            let lo = psi_inv(&u_full.concat(&Word::zeros(extra))).map_err(|_| overflow())?;
            let hi =
                psi_inv(&u_full.concat(&Word::from_bits(vec![true; extra]))).unwrap_or(Nat::MAX);
            let need = (x_len - 1).max(p + ell as Nat);
            let big_enough = |b: Nat| level_of(b).is_none_or(|q| q >= need);
            if !big_enough(hi) {
                continue;
            }
            let (mut a, mut z) = (lo, hi);
            while a < z {
                let mid = a + (z - a) / 2;
                if big_enough(mid) {
                    z = mid;
                } else {
                    a = mid + 1;
                }
            }
            let q = level_of(a).ok_or_else(overflow)?;
            return q.checked_add(1).ok_or_else(overflow);
        }
        Err(overflow())
    }

    /// Scans the explicit levels for the least one extending `(X, Y)`.
    fn scan_level(&self, info: &RankInfo) -> Result<Nat, ReductionError> {
        let bound = self.test.level_bound().unwrap_or(0);
        'levels: for level in info.x_len..=bound {
            if phi(level - 1).first != info.m {
                continue;
            }
            for i in 0..info.x_len {
                if self.test.bit(level, Side::Zero, i)? != self.x_bit(info, i)?
                    || self.test.bit(level, Side::One, i)? != self.y_bit(info, i)?
                {
                    continue 'levels;
                }
            }
            return Ok(level);
        }
        Err(ReductionError::Exhausted {
            rank: info.rank,
            word: info.word.clone(),
            searched: bound,
        })
    }

    fn s_bit(&self, rank: usize, i: Nat) -> Result<bool, ReductionError> {
        let b = self.test.bit(self.ranks[rank].level, Side::Zero, i)?;
        Ok(b ^ self.faults.contains(&(rank, i)))
    }

    fn t_bit(&self, rank: usize, i: Nat) -> Result<bool, ReductionError> {
        Ok(self.test.bit(self.ranks[rank].level, Side::One, i)?)
    }

    /// `s_w` and `t_w` for a materialized rank, when short enough to hold.
    pub fn pair_words(&self, rank: usize) -> Result<(Word, Word), ReductionError> {
        let level = self.ranks[rank].level;
        let n = usize::try_from(level)
            .ok()
            .filter(|&n| n <= MAX_WORD)
            .ok_or_else(|| ReductionError::Insufficient(format!("rank {rank} has {level} bits")))?;
        let s = (0..n as Nat)
            .map(|i| self.s_bit(rank, i))
            .collect::<Result<Vec<_>, _>>()?;
        let t = (0..n as Nat)
            .map(|i| self.t_bit(rank, i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Word::from_bits(s), Word::from_bits(t)))
    }

    /// First `n` bits of `α₀ = sup_q s_{ψ(q)}`.
    pub fn alpha0_prefix(&self, n: usize) -> Result<Word, ReductionError> {
        let n_nat = n as Nat;
        if let Some(rank) = self.ranks.iter().position(|e| e.level >= n_nat) {
            return (0..n_nat)
                .map(|i| self.s_bit(rank, i))
                .collect::<Result<Vec<_>, _>>()
                .map(Word::from_bits);
        }
        if let Some(f) = self.frontier.as_ref().filter(|f| f.info.x_len >= n_nat) {
            return (0..n_nat)
                .map(|i| self.x_bit(&f.info, i))
                .collect::<Result<Vec<_>, _>>()
                .map(Word::from_bits);
        }
        Err(ReductionError::Insufficient(format!("alpha0 to {n} bits")))
    }

    /// First `n` bits of `f(α)` for any `α` extending `alpha_prefix`.
    pub fn f_prefix(&self, alpha_prefix: &Word, n: usize) -> Result<Word, ReductionError> {
        let n_nat = n as Nat;
        for m in 0..=alpha_prefix.len() {
            let Ok(rank) = psi_inv(&alpha_prefix.prefix(m)) else {
                break;
            };
            if let Some(e) = self.ranks.get(rank as usize).filter(|e| e.level >= n_nat) {
                let _ = e;
                return (0..n_nat)
                    .map(|i| self.t_bit(rank as usize, i))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Word::from_bits);
            }
            if let Some(f) = self
                .frontier
                .as_ref()
                .filter(|f| f.info.rank == rank && f.info.x_len >= n_nat)
            {
                return (0..n_nat)
                    .map(|i| self.y_bit(&f.info, i))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Word::from_bits);
            }
        }
        Err(ReductionError::Insufficient(format!(
            "f({alpha_prefix}...) to {n} bits"
        )))
    }

    /// [`ReductionData::f_prefix`] for an eventually constant `α`, reading as
    /// much of it as needed.
    pub fn f_prefix_seq(&self, alpha: &EvConstSeq, n: usize) -> Result<Word, ReductionError> {
        self.f_prefix(&alpha.take(alpha.certificate() + 130), n)
    }

    fn level_of_word(&self, w: &Word) -> Option<Nat> {
        let rank = psi_inv(w).ok()?;
        self.ranks.get(usize::try_from(rank).ok()?).map(|e| e.level)
    }

    /// The defining equations of one materialized rank: the coordinate
    /// `(|t_w| − 1)₀ = (|w|)₀` and the recursive forms of `s_w` and `t_w`,
    /// compared as words.
    pub fn check_equations(&self, rank: usize) -> Result<Option<String>, ReductionError> {
        let e = &self.ranks[rank];
        let info = &e.info;
        if phi(e.level - 1).first != phi(info.word.len() as Nat).first {
            return Ok(Some(format!("rank {rank}: (|t_w|-1)_0 != (|w|)_0")));
        }
        let (s, t) = self.pair_words(rank)?;
        let v = s.slice(info.x_len as usize, s.len());
        let mut s_rhs = if rank == 0 {
            Word::new()
        } else {
            self.pair_words(rank - 1)?.0
        };
        s_rhs.push(false);
        s_rhs.extend_from(&info.u);
        s_rhs.extend_from(&v);
        if s != s_rhs {
            return Ok(Some(format!("rank {rank}: s_w != s_prev 0 u v")));
        }
        let mut t_rhs = Word::new();
        match info.parent_level {
            None => t_rhs.push(true),
            Some(_) => {
                let parent = (rank - 1 - info.eps as usize) / 2;
                let (ps, pt) = self.pair_words(parent)?;
                t_rhs = pt.with(info.eps);
                let mut s_chain = ps.with(false);
                for i in parent + 1..rank {
                    let (si, _) = self.pair_words(i)?;
                    let block = self.ranks[i]
                        .info
                        .u
                        .concat(&si.slice(self.ranks[i].info.x_len as usize, si.len()));
                    t_rhs.extend_from(&block);
                    t_rhs.push(false);
                    s_chain.extend_from(&block);
                    s_chain.push(false);
                }
                if s_chain != self.pair_words(rank - 1)?.0.with(false) {
                    return Ok(Some(format!("rank {rank}: s-side chain identity")));
                }
            }
        }
        t_rhs.extend_from(&info.u);
        t_rhs.extend_from(&v);
        if t != t_rhs {
            return Ok(Some(format!(
                "rank {rank}: t_w does not unfold from its parent"
            )));
        }
        Ok(None)
    }
}

/// Longest `s_w` that [`ReductionData::pair_words`] will build.
pub const MAX_WORD: usize = 1 << 22;

#[derive(Debug, Clone, Copy)]
pub struct Lemma34Params {
    pub depth: usize,
    pub t_bound: Nat,
    pub m_bound: Nat,
}

impl Default for Lemma34Params {
    fn default() -> Self {
        Lemma34Params {
            depth: 200,
            t_bound: 3,
            m_bound: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lemma34Failure {
    Equation {
        detail: String,
    },
    SPattern {
        q: Nat,
    },
    TPattern {
        alpha: EvConstSeq,
        q: Nat,
    },
    ClauseA {
        alpha: EvConstSeq,
        r: usize,
    },
    DiffPattern {
        alpha: EvConstSeq,
        position: usize,
    },
    ClauseB1 {
        alpha: EvConstSeq,
        t: Vec<Nat>,
        m: Nat,
        expected_at: Nat,
    },
    ClauseB2 {
        alpha: EvConstSeq,
        t: Vec<Nat>,
        m: Nat,
    },
}

impl fmt::Display for Lemma34Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = |t: &[Nat]| t.iter().map(Nat::to_string).collect::<Vec<_>>().join(",");
        match self {
            Lemma34Failure::Equation { detail } => write!(f, "clause=equations {detail}"),
            Lemma34Failure::SPattern { q } => write!(f, "clause=s-pattern q={q}"),
            Lemma34Failure::TPattern { alpha, q } => {
                write!(f, "clause=t-pattern alpha={alpha} q={q}")
            }
            Lemma34Failure::ClauseA { alpha, r } => write!(f, "clause=a alpha={alpha} r={r}"),
            Lemma34Failure::DiffPattern { alpha, position } => {
                write!(
                    f,
                    "clause=difference-pattern alpha={alpha} position={position}"
                )
            }
            Lemma34Failure::ClauseB1 {
                alpha,
                t,
                m,
                expected_at,
            } => write!(
                f,
                "clause=b.i alpha={alpha} t=({}) m={m} expected-at={expected_at}",
                tuple(t)
            ),
            Lemma34Failure::ClauseB2 { alpha, t, m } => {
                write!(f, "clause=b.ii alpha={alpha} t=({}) m={m}", tuple(t))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lemma34Report {
    pub alphas: usize,
    pub equations_checked: usize,
    pub clause_a_checked: usize,
    pub b1_checked: usize,
    /// `(b)(i)` instances whose witness position lies at or past the depth.
    pub b1_out_of_window: usize,
    pub b2_checked: usize,
    pub structural_checked: usize,
    pub failure: Option<Lemma34Failure>,
}

impl Lemma34Report {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Every `α` with a prefix of length at most `max_prefix`, both tails,
/// deduplicated.
pub fn sample_alphas(max_prefix: usize) -> Vec<EvConstSeq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for len in 0..=max_prefix {
        for v in 0..1u64 << len {
            for tail in [false, true] {
                let a = EvConstSeq::new(Word::from_index(v, len), tail);
                if seen.insert(a.to_string()) {
                    out.push(a);
                }
            }
        }
    }
    out
}

fn tuples(t_bound: Nat) -> Vec<Vec<Nat>> {
    let mut out = vec![vec![]];
    for a in 0..=t_bound {
        out.push(vec![a]);
    }
    for a in 0..=t_bound {
        for b in 0..=t_bound {
            out.push(vec![a, b]);
        }
    }
    out
}

fn code(t: &[Nat], m: Nat) -> Result<Nat, CodingError> {
    let mut v = t.to_vec();
    v.push(m);
    pcode(&v)
}

/// Checks the conclusions of the reduction lemma on the first `depth`
/// coordinates, for each sampled `α`.
pub fn verify_lemma34(
    rd: &ReductionData<'_>,
    params: &Lemma34Params,
    alphas: &[EvConstSeq],
) -> Result<Lemma34Report, ReductionError> {
    let mut report = Lemma34Report {
        alphas: alphas.len(),
        ..Default::default()
    };
    let depth = params.depth;
    // each prefix is read from the first rank long enough to hold it
    let a0_prefixes = (0..=depth)
        .map(|r| rd.alpha0_prefix(r))
        .collect::<Result<Vec<_>, _>>()?;
    let a0 = &a0_prefixes[depth];
    for alpha in alphas {
        let fa = rd.f_prefix_seq(alpha, depth)?;
        let delta: Vec<bool> = (0..depth).map(|i| a0.bits()[i] ^ fa.bits()[i]).collect();

        for (r, a0_r) in a0_prefixes.iter().enumerate() {
            report.clause_a_checked += 1;
            if !prefix_in_t(a0_r, &rd.f_prefix_seq(alpha, r)?, rd.test)? {
                report.failure = Some(Lemma34Failure::ClauseA {
                    alpha: alpha.clone(),
                    r,
                });
                return Ok(report);
            }
        }

        if let Some(position) = diff_pattern_failure(rd, alpha, &delta)? {
            report.failure = Some(Lemma34Failure::DiffPattern {
                alpha: alpha.clone(),
                position,
            });
            return Ok(report);
        }

        if let Some(q) = t_pattern_failure(rd, alpha)? {
            report.failure = Some(Lemma34Failure::TPattern {
                alpha: alpha.clone(),
                q,
            });
            return Ok(report);
        }
        report.structural_checked += 1;

        for t in tuples(params.t_bound) {
            for m in 0..=params.m_bound {
                if alpha.get(code(&t, m)?) {
                    report.b1_checked += 1;
                    match check_b1(rd, alpha, &t, m, &delta)? {
                        B1::Found => {}
                        B1::OutOfWindow => report.b1_out_of_window += 1,
                        B1::Missing(expected_at) => {
                            report.failure = Some(Lemma34Failure::ClauseB1 {
                                alpha: alpha.clone(),
                                t,
                                m,
                                expected_at,
                            });
                            return Ok(report);
                        }
                    }
                }
                let pos = code(&t, m)? + 1;
                if pos < depth as Nat && delta[pos as usize] {
                    report.b2_checked += 1;
                    if !b2_holds(alpha, &t)? {
                        report.failure = Some(Lemma34Failure::ClauseB2 {
                            alpha: alpha.clone(),
                            t,
                            m,
                        });
                        return Ok(report);
                    }
                }
            }
        }
    }
    for rank in 0..rd.ranks.len() {
        if rd.ranks[rank].level > MAX_WORD as Nat {
            break;
        }
        report.equations_checked += 1;
        if let Some(detail) = rd.check_equations(rank)? {
            report.failure = Some(Lemma34Failure::Equation { detail });
            return Ok(report);
        }
    }
    if let Some(f) = s_pattern_failure(rd, depth)? {
        report.failure = Some(f);
        return Ok(report);
    }
    report.structural_checked += rd.ranks.len();
    Ok(report)
}

enum B1 {
    Found,
    OutOfWindow,
    Missing(Nat),
}

/// Some `m′` with `Δ(p(tm′) + 1) = 1` inside the window; otherwise decide
/// whether the position predicted by the construction, `|t_{α↾p(tm)}|`,
/// lies outside it.
fn check_b1(
    rd: &ReductionData<'_>,
    alpha: &EvConstSeq,
    t: &[Nat],
    m: Nat,
    delta: &[bool],
) -> Result<B1, ReductionError> {
    for m2 in 0.. {
        let pos = code(t, m2)? + 1;
        if pos >= delta.len() as Nat {
            break;
        }
        if delta[pos as usize] {
            return Ok(B1::Found);
        }
    }
    let idx = code(t, m)?;
    let w = alpha.take(idx as usize);
    match rd.level_of_word(&w) {
        Some(level) if level < delta.len() as Nat => Ok(B1::Missing(level)),
        Some(_) => Ok(B1::OutOfWindow),
        None => {
            let known = rd.ranks.last().map_or(0, |e| e.level);
            if known >= delta.len() as Nat {
                // levels grow with rank, so this one is even further out
                Ok(B1::OutOfWindow)
            } else {
                Err(ReductionError::Insufficient(format!("level of w={w}")))
            }
        }
    }
}

/// Some `m′` with `α(p(tm′)) = 1`; past the prefix only the tail matters.
fn b2_holds(alpha: &EvConstSeq, t: &[Nat]) -> Result<bool, ReductionError> {
    for m2 in 0.. {
        let idx = code(t, m2)?;
        if alpha.get(idx) {
            return Ok(true);
        }
        if idx >= alpha.certificate() as Nat {
            return Ok(alpha.tail());
        }
    }
    unreachable!()
}

/// `0 u_{0,1} ≺ α₀` and `s_{ψ(q)} 0 u_{q+1, |s_{ψ(q)}|+1} ≺ s_{ψ(q+1)}`,
/// where the shared prefix is compared up to `depth`.
fn s_pattern_failure(
    rd: &ReductionData<'_>,
    depth: usize,
) -> Result<Option<Lemma34Failure>, ReductionError> {
    let Some(first) = rd.ranks.first() else {
        return Ok(None);
    };
    let u0 = rd.oracle.word(0, 1);
    let head = Word::from_bits(vec![false]).concat(&u0);
    if first.level < head.len() as Nat
        || (0..head.len()).any(|i| rd.s_bit(0, i as Nat).ok() != head.get(i))
    {
        return Ok(Some(Lemma34Failure::SPattern { q: 0 }));
    }
    for q in 0..rd.ranks.len().saturating_sub(1) {
        let lq = rd.ranks[q].level;
        let u = rd.oracle.word(q as Nat + 1, lq + 1);
        let ok = (0..lq.min(depth as Nat)).try_fold(true, |acc, i| {
            Ok::<_, ReductionError>(acc && rd.s_bit(q, i)? == rd.s_bit(q + 1, i)?)
        })? && !rd.s_bit(q + 1, lq)?
            && (0..u.len()).try_fold(true, |acc, j| {
                Ok::<_, ReductionError>(acc && rd.s_bit(q + 1, lq + 1 + j as Nat)? == u.bits()[j])
            })?;
        if !ok {
            return Ok(Some(Lemma34Failure::SPattern { q: q as Nat + 1 }));
        }
    }
    Ok(None)
}

/// For each materialized `q+1`, with `m` such that
/// `ψ⁻¹(α↾m) < q+1 ≤ ψ⁻¹(α↾(m+1))`, the oracle word
/// `u_{q+1, |s_{ψ(q)}|+1}` sits in `t_{α↾(m+1)}` at position `|s_{ψ(q)}|+1`.
fn t_pattern_failure(
    rd: &ReductionData<'_>,
    alpha: &EvConstSeq,
) -> Result<Option<Nat>, ReductionError> {
    let mut m = 0usize;
    for q in 0..rd.ranks.len().saturating_sub(1) {
        let target = q as Nat + 1;
        while psi_inv(&alpha.take(m + 1))? < target {
            m += 1;
        }
        let Ok(rank) = usize::try_from(psi_inv(&alpha.take(m + 1))?) else {
            break;
        };
        if rank >= rd.ranks.len() {
            break;
        }
        let lq = rd.ranks[q].level;
        let u = rd.oracle.word(target, lq + 1);
        for (j, &b) in u.bits().iter().enumerate() {
            if rd.t_bit(rank, lq + 1 + j as Nat)? != b {
                return Ok(Some(target));
            }
        }
    }
    Ok(None)
}

/// `α₀` and `f(α)` differ at 0, at each `|t_{α↾q}|` exactly when `α(q) = 1`,
/// and nowhere else.
fn diff_pattern_failure(
    rd: &ReductionData<'_>,
    alpha: &EvConstSeq,
    delta: &[bool],
) -> Result<Option<usize>, ReductionError> {
    let mut expected = vec![false; delta.len()];
    expected[0] = true;
    for q in 0.. {
        let Some(level) = rd.level_of_word(&alpha.take(q)) else {
            break;
        };
        if level >= delta.len() as Nat {
            break;
        }
        expected[level as usize] = alpha.get(q as Nat);
    }
    Ok(expected.iter().zip(delta).position(|(a, b)| a != b))
}

/// `ρ₀^ξ(α)(k) = ρ₀^ξ(𝒮[α₀ Δ f(α)])(k)` for `k < coords`, for a tail-0 `α`.
///
/// With `w*` the shortest prefix of `α` containing all its 1s, the
/// difference `α₀ Δ f(α)` is 1 exactly on the positions where `s_{w*}` and
/// `t_{w*}` differ; later extensions by 0 keep that set. It is handled as a
/// sparse sequence because those positions can be huge.
pub fn verify_thm35_identity(
    rd: &ReductionData<'_>,
    xi: &OrdinalExpr,
    alpha: &EvConstSeq,
    coords: usize,
) -> Result<bool, ReductionError> {
    Ok(identity_mismatch(rd, xi, alpha, coords)?.is_none())
}

/// The first `k < coords` where the two sides of
/// [`verify_thm35_identity`] differ, with the value on the `α` side.
pub fn identity_mismatch(
    rd: &ReductionData<'_>,
    xi: &OrdinalExpr,
    alpha: &EvConstSeq,
    coords: usize,
) -> Result<Option<(Nat, bool)>, ReductionError> {
    if alpha.tail() {
        return Err(ReductionError::TailOne);
    }
    if !matches!(xi, OrdinalExpr::Finite(_)) {
        return Err(HierarchyError::NotFinite.into());
    }
    let w_star = alpha.prefix().clone();
    let level = rd
        .level_of_word(&w_star)
        .ok_or_else(|| ReductionError::Insufficient(format!("level of w={w_star}")))?;
    let ones = rd.test.diff_positions(level)?;
    if let Some(next) = rd.level_of_word(&w_star.with(false)) {
        if rd.test.diff_positions(next)? != ones {
            return Err(ReductionError::Inconsistent(format!(
                "difference set changes after w={w_star}"
            )));
        }
    }
    let window = usize::try_from(level).unwrap_or(usize::MAX).min(256);
    let a0 = rd.alpha0_prefix(window)?;
    let fa = rd.f_prefix_seq(alpha, window)?;
    for i in 0..window {
        let direct = a0.bits()[i] ^ fa.bits()[i];
        if direct != ones.contains(&(i as Nat)) {
            return Err(ReductionError::Inconsistent(format!(
                "difference at {i} for alpha={alpha}"
            )));
        }
    }
    let shifted = SparseSeq::new(false, ones.iter().filter(|&&d| d > 0).map(|&d| d - 1));
    let lhs = rho0_pow(xi, &CertifiedSeq::new(alpha.clone()))?;
    let rhs = shifted.rho0_pow(xi)?;
    Ok((0..coords as Nat)
        .find(|&k| lhs.get(k) != rhs.get(k))
        .map(|k| (k, lhs.get(k))))
}
