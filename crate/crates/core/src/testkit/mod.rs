//! Tests `E = (s_q, t_q)_q`, the tree `T` they generate, level slices,
//! level graphs and the checks around them.
//!
//! A [`Test`] is either the canonical one, whose levels can be read at any
//! index through [`canonical`], or an explicit table loaded from a file.

pub mod canonical;
mod tree;

use std::fmt::Write as _;

use thiserror::Error;

use crate::codings::{CodingError, Nat, Side, Word};

pub use tree::{
    branch_member, check_def31, find_rectangle, find_rectangle_in, level_graph, level_slice,
    prefix_in_t, rectangle_free, witness_b, Def31Bounds, Def31Report, Def31Violation, LevelGraph,
    RichnessWitness,
};

/// The canonical test with levels `0..=max_q` materialized; fails past
/// [`MAX_MATERIALIZED_LEVEL`].
pub fn build_test(max_q: usize) -> Result<Test, TestError> {
    Test::build(max_q)
}

/// Largest level that [`Test::build`] will materialize. Full materialization
/// needs about `q²` bits; past this, use coordinate access.
pub const MAX_MATERIALIZED_LEVEL: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestError {
    #[error("level {0} is not available in this test")]
    MissingLevel(Nat),
    #[error("words {0} and {1} have different lengths")]
    LengthMismatch(Word, Word),
    #[error("materializing level {requested} exceeds the limit of {limit}")]
    TooLarge { requested: Nat, limit: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("no level up to {searched} extends (p={p}, m={m}, u={u})")]
    SearchExhausted {
        p: Nat,
        m: Nat,
        u: Word,
        searched: Nat,
    },
    #[error("sequences with different tails: branch membership is undecided")]
    UndecidedTails,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePair {
    s: Word,
    t: Word,
}

impl NodePair {
    pub fn new(s: Word, t: Word) -> Result<Self, TestError> {
        if s.len() != t.len() {
            return Err(TestError::LengthMismatch(s, t));
        }
        Ok(NodePair { s, t })
    }

    pub fn s(&self) -> &Word {
        &self.s
    }

    pub fn t(&self) -> &Word {
        &self.t
    }

    pub fn side(&self, side: Side) -> &Word {
        match side {
            Side::Zero => &self.s,
            Side::One => &self.t,
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Test {
    canonical: bool,
    levels: Vec<Option<NodePair>>,
    /// Explicit tests only: entries for a level that was already given.
    duplicates: Vec<(usize, NodePair)>,
}

impl Test {
    /// The canonical test with only level 0 materialized.
    pub fn canonical() -> Self {
        let mut t = Test {
            canonical: true,
            levels: Vec::new(),
            duplicates: Vec::new(),
        };
        t.fill(0);
        t
    }

    /// The canonical test with levels `0..=max_q` materialized.
    pub fn build(max_q: usize) -> Result<Self, TestError> {
        let mut t = Test::canonical();
        t.ensure(max_q)?;
        Ok(t)
    }

    /// An explicit test. Later entries for an already present level are kept
    /// aside as duplicates so that [`check_def31`] can report them.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, NodePair)>) -> Self {
        let mut levels: Vec<Option<NodePair>> = Vec::new();
        let mut duplicates = Vec::new();
        for (q, pair) in entries {
            if levels.len() <= q {
                levels.resize(q + 1, None);
            }
            if levels[q].is_some() {
                duplicates.push((q, pair));
            } else {
                levels[q] = Some(pair);
            }
        }
        Test {
            canonical: false,
            levels,
            duplicates,
        }
    }

    /// Parses `q<TAB>s<TAB>t` lines. Blank lines and lines starting with `#`
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self, TestError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| TestError::Parse { line: n + 1, msg };
            let fields: Vec<&str> = line.split('\t').collect();
            let [q, s, t] = fields[..] else {
                return Err(err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            };
            let q: usize = q.parse().map_err(|_| err(format!("bad level {q:?}")))?;
            let s: Word = s.parse().map_err(|e: CodingError| err(e.to_string()))?;
            let t: Word = t.parse().map_err(|e: CodingError| err(e.to_string()))?;
            let pair = NodePair::new(s, t).map_err(|e| err(e.to_string()))?;
            entries.push((q, pair));
        }
        Ok(Test::from_entries(entries))
    }

    /// Levels `0..=max_q` in the file format.
    pub fn to_text(&self, max_q: usize) -> Result<String, TestError> {
        let mut out = String::new();
        for q in 0..=max_q {
            let p = self.level(q)?;
            writeln!(out, "{q}\t{}\t{}", p.s, p.t).expect("write to string");
        }
        Ok(out)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Highest level present in the table (canonical tests can go further
    /// through coordinate access).
    pub fn materialized(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn duplicates(&self) -> &[(usize, NodePair)] {
        &self.duplicates
    }

    fn fill(&mut self, max_q: usize) {
        let start = self.levels.len();
        if start > max_q {
            return;
        }
        for q in start..=max_q {
            let shape = canonical::level_shape(q as Nat);
            let pair = match shape {
                None => NodePair::new(Word::new(), Word::new()),
                Some(shape) => {
                    let parent = self.levels[shape.parent as usize]
                        .as_ref()
                        .expect("canonical levels are dense");
                    let rest = shape.middle.concat(&Word::zeros(shape.pad as usize));
                    NodePair::new(
                        parent.s.with(false).concat(&rest),
                        parent.t.with(true).concat(&rest),
                    )
                }
            };
            self.levels.push(Some(pair.expect("equal lengths")));
        }
    }

    /// Makes levels `0..=max_q` available in the table. Idempotent.
    pub fn ensure(&mut self, max_q: usize) -> Result<(), TestError> {
        if !self.canonical {
            return match (0..=max_q).find(|&q| self.levels.get(q).is_none_or(Option::is_none)) {
                Some(q) => Err(TestError::MissingLevel(q as Nat)),
                None => Ok(()),
            };
        }
        if max_q > MAX_MATERIALIZED_LEVEL {
            return Err(TestError::TooLarge {
                requested: max_q as Nat,
                limit: MAX_MATERIALIZED_LEVEL,
            });
        }
        self.fill(max_q);
        Ok(())
    }

    pub fn level(&self, q: usize) -> Result<&NodePair, TestError> {
        self.levels
            .get(q)
            .and_then(Option::as_ref)
            .ok_or(TestError::MissingLevel(q as Nat))
    }

    fn table_level(&self, level: Nat) -> Option<&NodePair> {
        usize::try_from(level)
            .ok()
            .and_then(|q| self.levels.get(q)?.as_ref())
    }

    /// Bit `i` of `s_level` or `t_level`.
    pub fn bit(&self, level: Nat, side: Side, i: Nat) -> Result<bool, TestError> {
        if let Some(p) = self.table_level(level) {
            return usize::try_from(i)
                .ok()
                .and_then(|i| p.side(side).get(i))
                .ok_or(TestError::MissingLevel(level));
        }
        if self.canonical {
            return canonical::bit(level, side, i).ok_or(TestError::MissingLevel(level));
        }
        Err(TestError::MissingLevel(level))
    }

    /// The last position where `s_level` and `t_level` differ.
    pub fn split_point(&self, level: Nat) -> Result<Option<Nat>, TestError> {
        if self.canonical {
            return Ok(canonical::level_shape(level).map(|s| s.parent));
        }
        let p = self
            .table_level(level)
            .ok_or(TestError::MissingLevel(level))?;
        Ok((0..p.len())
            .rev()
            .find(|&i| p.s.get(i) != p.t.get(i))
            .map(|i| i as Nat))
    }

    pub fn last_one(&self, level: Nat, side: Side) -> Result<Option<Nat>, TestError> {
        if self.canonical {
            return Ok(canonical::last_one(level, side));
        }
        let p = self
            .table_level(level)
            .ok_or(TestError::MissingLevel(level))?;
        Ok(p.side(side).last_one().map(|i| i as Nat))
    }

    /// All positions where `s_level` and `t_level` differ, ascending.
    pub fn diff_positions(&self, level: Nat) -> Result<Vec<Nat>, TestError> {
        if self.canonical {
            return Ok(canonical::diff_positions(level));
        }
        let p = self
            .table_level(level)
            .ok_or(TestError::MissingLevel(level))?;
        Ok((0..p.len())
            .filter(|&i| p.s.get(i) != p.t.get(i))
            .map(|i| i as Nat)
            .collect())
    }

    /// First `n` bits of one side of a level.
    pub fn level_prefix(&self, level: Nat, side: Side, n: usize) -> Result<Word, TestError> {
        (0..n as Nat)
            .map(|i| self.bit(level, side, i))
            .collect::<Result<Vec<_>, _>>()
            .map(Word::from_bits)
    }

    /// Largest level index that can be queried, `None` if unbounded.
    pub fn level_bound(&self) -> Option<Nat> {
        (!self.canonical).then(|| self.materialized() as Nat)
    }
}
