use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{canonical, NodePair, Test, TestError};
use crate::codings::{phi, EvConstSeq, Nat, Side, Word};
use crate::graph::{BipartiteGraph, Vertex};

/// Membership of `(s, t)` in the tree generated by the test.
///
/// A non-root member has the form `(s_q 0 w, t_q 1 w)`, so `q` must be the
/// last position where `s` and `t` differ; that makes the decomposition
/// unique and the check linear.
pub fn prefix_in_t(s: &Word, t: &Word, test: &Test) -> Result<bool, TestError> {
    if s.len() != t.len() {
        return Err(TestError::LengthMismatch(s.clone(), t.clone()));
    }
    if s.is_empty() {
        return Ok(true);
    }
    let Some(q) = (0..s.len()).rev().find(|&i| s.get(i) != t.get(i)) else {
        return Ok(false);
    };
    if s.get(q) != Some(false) {
        return Ok(false);
    }
    for i in 0..q {
        let (i_n, q_n) = (i as Nat, q as Nat);
        if test.bit(q_n, Side::Zero, i_n)? != s.bits()[i]
            || test.bit(q_n, Side::One, i_n)? != t.bits()[i]
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `𝒯_p = T ∩ (2^p × 2^p)`.
pub fn level_slice(test: &Test, p: usize) -> Result<BTreeSet<NodePair>, TestError> {
    if p > 24 {
        return Err(TestError::TooLarge {
            requested: p as Nat,
            limit: 24,
        });
    }
    let mut out = BTreeSet::new();
    if p == 0 {
        out.insert(NodePair::new(Word::new(), Word::new())?);
        return Ok(out);
    }
    for q in 0..p {
        let s_q = test.level_prefix(q as Nat, Side::Zero, q)?.with(false);
        let t_q = test.level_prefix(q as Nat, Side::One, q)?.with(true);
        let free = p - q - 1;
        for w in 0..(1u64 << free) {
            let w = Word::from_index(w, free);
            let s = s_q.concat(&w);
            let t = t_q.concat(&w);
            out.insert(NodePair::new(s, t)?);
        }
    }
    Ok(out)
}

/// The bipartite graph `G_{𝒯_p}` on `2^p ⊕ 2^p`. Vertex indices are the
/// words read as binary numbers.
#[derive(Debug, Clone)]
pub struct LevelGraph {
    level: usize,
    graph: BipartiteGraph,
}

impl LevelGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn word(&self, v: Vertex) -> Word {
        Word::from_index(v.index as u64, self.level)
    }

    pub fn is_acyclic(&self) -> bool {
        self.graph.is_acyclic()
    }

    /// A cycle written as `L_<word>`/`R_<word>` names.
    pub fn cycle_names(&self) -> Option<Vec<String>> {
        let c = self.graph.find_cycle()?;
        Some(c.into_iter().map(|v| self.name(v)).collect())
    }

    fn name(&self, v: Vertex) -> String {
        let tag = if v.side == Side::Zero { 'L' } else { 'R' };
        format!("{tag}_{}", self.word(v))
    }

    /// Undirected DOT graph listing every vertex, then every edge.
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph G_{} {{\n", self.level);
        for side in [Side::Zero, Side::One] {
            for index in 0..1usize << self.level {
                let _ = writeln!(out, "  \"{}\";", self.name(Vertex { side, index }));
            }
        }
        for &(a, b) in self.graph.edges() {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\";",
                self.name(Vertex::left(a)),
                self.name(Vertex::right(b))
            );
        }
        out.push_str("}\n");
        out
    }
}

pub fn level_graph(test: &Test, p: usize) -> Result<LevelGraph, TestError> {
    let slice = level_slice(test, p)?;
    let n = 1usize << p;
    let edges = slice.iter().map(|e| {
        (
            e.s().to_index().expect("p <= 24") as usize,
            e.t().to_index().expect("p <= 24") as usize,
        )
    });
    Ok(LevelGraph {
        level: p,
        graph: BipartiteGraph::new(n, n, edges),
    })
}

/// Two distinct rows `e₀ ≠ e₀'` and two distinct columns `e₁ ≠ e₁'` with all
/// four pairs in the slice, found by comparing every pair of rows.
pub fn find_rectangle_in(slice: &BTreeSet<NodePair>) -> Option<[Word; 4]> {
    let mut rows: BTreeMap<&Word, Vec<&Word>> = BTreeMap::new();
    for e in slice {
        rows.entry(e.s()).or_default().push(e.t());
    }
    let rows: Vec<_> = rows.into_iter().filter(|(_, c)| c.len() >= 2).collect();
    for (i, (r0, c0)) in rows.iter().enumerate() {
        for (r1, c1) in &rows[i + 1..] {
            let common: Vec<&&Word> = c0
                .iter()
                .filter(|w| c1.binary_search(w).is_ok())
                .take(2)
                .collect();
            if let [a, b] = common[..] {
                return Some([(*r0).clone(), (*r1).clone(), (*a).clone(), (*b).clone()]);
            }
        }
    }
    None
}

pub fn find_rectangle(test: &Test, p: usize) -> Result<Option<[Word; 4]>, TestError> {
    Ok(find_rectangle_in(&level_slice(test, p)?))
}

pub fn rectangle_free(test: &Test, p: usize) -> Result<bool, TestError> {
    Ok(find_rectangle(test, p)?.is_none())
}

/// Whether `(α, β)` is an infinite branch of `T`. Only equal tails are
/// decidable: past the longer prefix both sequences append the same bit,
/// which keeps a decomposition `(s_q 0 w, t_q 1 w)` valid.
pub fn branch_member(
    alpha: &EvConstSeq,
    beta: &EvConstSeq,
    test: &Test,
) -> Result<bool, TestError> {
    if alpha.tail() != beta.tail() {
        return Err(TestError::UndecidedTails);
    }
    let n = alpha.certificate().max(beta.certificate()) + 1;
    for r in 1..=n {
        if !prefix_in_t(&alpha.take(r), &beta.take(r), test)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Def31Bounds {
    pub p_max: Nat,
    pub m_max: Nat,
    pub u_len_max: usize,
}

impl Default for Def31Bounds {
    fn default() -> Self {
        Def31Bounds {
            p_max: 3,
            m_max: 3,
            u_len_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Def31Violation {
    MissingLevel { q: usize },
    WrongLength { q: usize, len: usize },
    DuplicateLevel { q: usize },
    Splitting { n: usize },
    Richness { p: Nat, m: Nat, u: Word },
}

impl std::fmt::Display for Def31Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Def31Violation::MissingLevel { q } => write!(f, "clause=a level={q} reason=missing"),
            Def31Violation::WrongLength { q, len } => {
                write!(f, "clause=a level={q} reason=length len={len}")
            }
            Def31Violation::DuplicateLevel { q } => {
                write!(f, "clause=a level={q} reason=duplicate")
            }
            Def31Violation::Splitting { n } => {
                write!(f, "clause=c level={n} reason=no-decomposition")
            }
            Def31Violation::Richness { p, m, u } => {
                write!(f, "clause=b p={p} m={m} u={u} reason=no-extension")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RichnessWitness {
    pub p: Nat,
    pub m: Nat,
    pub u: Word,
    pub level: Nat,
}

#[derive(Debug, Clone, Default)]
pub struct Def31Report {
    pub richness: Vec<RichnessWitness>,
    pub violation: Option<Def31Violation>,
}

impl Def31Report {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Clauses (a), (c) and then (b) of the definition of a test, stopping at
/// the first violation.
pub fn check_def31(
    test: &Test,
    max_q: usize,
    bounds: Def31Bounds,
) -> Result<Def31Report, TestError> {
    let mut report = Def31Report::default();
    if let Some(v) = uniqueness_violation(test, max_q) {
        report.violation = Some(v);
        return Ok(report);
    }
    for n in 1..=max_q {
        if !splits(test, n)? {
            report.violation = Some(Def31Violation::Splitting { n });
            return Ok(report);
        }
    }
    for p in 0..=bounds.p_max {
        for m in 0..=bounds.m_max {
            for u in words_up_to(bounds.u_len_max) {
                match richness_level(test, p, m, &u)? {
                    Some(level) => report.richness.push(RichnessWitness { p, m, u, level }),
                    None => {
                        report.violation = Some(Def31Violation::Richness { p, m, u });
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn uniqueness_violation(test: &Test, max_q: usize) -> Option<Def31Violation> {
    for q in 0..=max_q {
        match test.level(q) {
            Err(_) => return Some(Def31Violation::MissingLevel { q }),
            Ok(p) if p.len() != q => return Some(Def31Violation::WrongLength { q, len: p.len() }),
            Ok(_) => {}
        }
    }
    test.duplicates()
        .iter()
        .map(|&(q, _)| q)
        .filter(|&q| q <= max_q)
        .min()
        .map(|q| Def31Violation::DuplicateLevel { q })
}

/// Whether level `n` is `(s_q 0 w, t_q 1 w)` for some `q < n`; every `q`
/// is tried.
fn splits(test: &Test, n: usize) -> Result<bool, TestError> {
    let lv = test.level(n)?;
    let (s, t) = (lv.s().bits(), lv.t().bits());
    for q in 0..n {
        let base = test.level(q)?;
        if s[q] || !t[q] || s[q + 1..] != t[q + 1..] {
            continue;
        }
        if s[..q] == *base.s().bits() && t[..q] == *base.t().bits() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn words_up_to(max_len: usize) -> impl Iterator<Item = Word> {
    (0..=max_len).flat_map(|len| (0..1u64 << len).map(move |v| Word::from_index(v, len)))
}

/// Whether `level` holds `(s_p 0 u …, t_p 1 u …)` with `(level−1)₀ = m`,
/// compared bit by bit.
fn extends(test: &Test, level: Nat, p: Nat, m: Nat, u: &Word) -> Result<bool, TestError> {
    let fixed = p + 1 + u.len() as Nat;
    if level < fixed || phi(level - 1).first != m {
        return Ok(false);
    }
    for side in [Side::Zero, Side::One] {
        for i in 0..p {
            if test.bit(level, side, i)? != test.bit(p, side, i)? {
                return Ok(false);
            }
        }
        if test.bit(level, side, p)? != side.bit() {
            return Ok(false);
        }
        for (j, &b) in u.bits().iter().enumerate() {
            if test.bit(level, side, p + 1 + j as Nat)? != b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn search_extension(test: &Test, p: Nat, m: Nat, u: &Word) -> Result<Option<Nat>, TestError> {
    let bound = test.level_bound().unwrap_or(test.materialized() as Nat);
    let start = p + 1 + u.len() as Nat;
    for level in start..=bound {
        if extends(test, level, p, m, u)? {
            return Ok(Some(level));
        }
    }
    Ok(None)
}

/// Level witnessing clause (b) for `(p, m, u)`. On the canonical test the
/// closed-form level is re-verified against the actual level words,
/// including the zero padding.
fn richness_level(test: &Test, p: Nat, m: Nat, u: &Word) -> Result<Option<Nat>, TestError> {
    if !test.is_canonical() {
        return search_extension(test, p, m, u);
    }
    let level = canonical::witness_level(p, m, u)?;
    if !extends(test, level, p, m, u)? {
        return Ok(None);
    }
    let fixed = p + 1 + u.len() as Nat;
    for side in [Side::Zero, Side::One] {
        for i in fixed..level {
            if test.bit(level, side, i)? {
                return Ok(None);
            }
        }
    }
    Ok(Some(level))
}

/// The word `v` of clause (b): `(s_p 0 u v, t_p 1 u v) ∈ E` with
/// `(|t_p 1 u v| − 1)₀ = m`.
///
/// On the canonical test this is `0^{q−p−|u|}` with `q = ⟨m, ⟨p, ψ⁻¹(u)⟩⟩`.
/// Explicit tests are searched level by level.
pub fn witness_b(test: &Test, p: Nat, m: Nat, u: &Word) -> Result<Word, TestError> {
    const MAX_V: Nat = 1 << 32;
    let fixed = p + 1 + u.len() as Nat;
    if test.is_canonical() {
        let level = canonical::witness_level(p, m, u)?;
        let len = level - fixed;
        if len > MAX_V {
            return Err(TestError::TooLarge {
                requested: len,
                limit: MAX_V as usize,
            });
        }
        return Ok(Word::zeros(len as usize));
    }
    let level = search_extension(test, p, m, u)?.ok_or_else(|| TestError::SearchExhausted {
        p,
        m,
        u: u.clone(),
        searched: test.materialized() as Nat,
    })?;
    let s = test.level(level as usize)?.s();
    Ok(s.slice(fixed as usize, level as usize))
}
