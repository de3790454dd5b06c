//! Tree relations on a truncated tree `a^{≤N}`, distinguished subtrees and
//! resolution families.
//!
//! Nodes are words over `{0, …, a−1}`, indexed length-first and then
//! lexicographically. A [`Relation`] is a bit matrix over those indices,
//! so every property is an exhaustive scan.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type Node = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeRelError {
    #[error("alphabet size must be between 1 and 10, got {0}")]
    BadAlphabet(usize),
    #[error("tree a^<={depth} with a={alphabet} is too large")]
    TooLarge { alphabet: usize, depth: usize },
    #[error("{} is not a node of the tree", show(.0))]
    NotInTree(Node),
    #[error("the code is not closed under prefixes: {} is missing", show(.0))]
    NotPrefixClosed(Node),
    #[error("the relation is not contained in the ambient one at ({}, {})", show(.0), show(.1))]
    NotSubset(Node, Node),
    #[error("the empty word has no proper prefix")]
    EmptyWord,
    #[error("index {0} is not a stage of the family")]
    BadIndex(usize),
    #[error("no r < |z| with z|r related to z = {}", show(.0))]
    NoPredecessor(Node),
    #[error("eta_{k} = {eta}: need 1 <= eta_k < top")]
    BadEta { k: usize, eta: usize },
    #[error("the family has no top stage")]
    NoTop,
    #[error("chain link fails between {} and {}", show(.0), show(.1))]
    ChainLink(Node, Node),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `-` for the empty word, digits otherwise.
pub fn show(w: &[u8]) -> String {
    if w.is_empty() {
        return "-".into();
    }
    w.iter().map(|&c| char::from(b'0' + c)).collect()
}

pub fn parse_node(s: &str) -> Option<Node> {
    if s == "-" {
        return Some(Vec::new());
    }
    if s.is_empty() {
        return None;
    }
    s.bytes()
        .map(|b| b.is_ascii_digit().then(|| b - b'0'))
        .collect()
}

fn is_prefix(s: &[u8], t: &[u8]) -> bool {
    s.len() <= t.len() && t[..s.len()] == *s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncTree {
    alphabet: usize,
    depth: usize,
    nodes: Vec<Node>,
}

impl TruncTree {
    pub fn new(alphabet: usize, depth: usize) -> Result<Self, TreeRelError> {
        if !(1..=10).contains(&alphabet) {
            return Err(TreeRelError::BadAlphabet(alphabet));
        }
        let mut nodes = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..depth {
            layer = layer
                .iter()
                .flat_map(|w: &Node| {
                    (0..alphabet as u8).map(move |c| [w.as_slice(), &[c]].concat())
                })
                .collect();
            nodes.extend(layer.iter().cloned());
            if nodes.len() > 1 << 14 {
                return Err(TreeRelError::TooLarge { alphabet, depth });
            }
        }
        Ok(TruncTree {
            alphabet,
            depth,
            nodes,
        })
    }

    pub fn binary(depth: usize) -> Result<Self, TreeRelError> {
        TruncTree::new(2, depth)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn index(&self, w: &[u8]) -> Option<usize> {
        if w.len() > self.depth || w.iter().any(|&c| c as usize >= self.alphabet) {
            return None;
        }
        let a = self.alphabet;
        let before: usize = (0..w.len()).map(|l| a.pow(l as u32)).sum();
        Some(before + w.iter().fold(0, |acc, &c| acc * a + c as usize))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(tree: &TruncTree) -> Self {
        let n = tree.len();
        let stride = n.div_ceil(64);
        Relation {
            n,
            stride,
            bits: vec![0; n * stride],
        }
    }

    pub fn from_fn(tree: &TruncTree, f: impl Fn(&[u8], &[u8]) -> bool) -> Self {
        let mut r = Relation::empty(tree);
        for (i, s) in tree.nodes().iter().enumerate() {
            for (j, t) in tree.nodes().iter().enumerate() {
                if f(s, t) {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    /// `≺`, the non-strict extension order.
    pub fn extension(tree: &TruncTree) -> Self {
        Relation::from_fn(tree, is_prefix)
    }

    /// `s ≺ t` and the number of 1s in `s` is 0 or that of `t`.
    pub fn r1(tree: &TruncTree) -> Self {
        let ones = |w: &[u8]| w.iter().filter(|&&c| c == 1).count();
        Relation::from_fn(tree, |s, t| {
            is_prefix(s, t) && (ones(s) == 0 || ones(s) == ones(t))
        })
    }

    pub fn holds(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.stride + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.bits[i * self.stride + j / 64] |= 1 << (j % 64);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.bits[i * self.stride + j / 64] &= !(1 << (j % 64));
    }

    pub fn related(&self, tree: &TruncTree, s: &[u8], t: &[u8]) -> bool {
        match (tree.index(s), tree.index(t)) {
            (Some(i), Some(j)) => self.holds(i, j),
            _ => false,
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    /// First pair in `self` that is missing from `other`.
    pub fn first_outside(&self, other: &Relation) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.holds(i, j) && !other.holds(i, j))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        Relation {
            n: self.n,
            stride: self.stride,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// Lines `s<TAB>t`; blank lines and `#` comments are skipped.
    pub fn parse(tree: &TruncTree, text: &str) -> Result<Relation, TreeRelError> {
        let mut r = Relation::empty(tree);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| TreeRelError::Parse { line: n + 1, msg };
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, t] = fields[..] else {
                return Err(err(format!(
                    "expected 2 tab-separated fields, found {}",
                    fields.len()
                )));
            };
            let node = |w: &str| {
                let v = parse_node(w).ok_or_else(|| err(format!("bad word {w:?}")))?;
                tree.index(&v)
                    .ok_or_else(|| err(format!("{w} is not in the tree")))
            };
            r.insert(node(s)?, node(t)?);
        }
        Ok(r)
    }

    pub fn to_text(&self, tree: &TruncTree) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.holds(i, j) {
                    out.push_str(&format!("{}\t{}\n", show(tree.node(i)), show(tree.node(j))));
                }
            }
        }
        out
    }
}

/// `s R t ⇔ s ≺ t and N_t ∩ C ≠ ∅`, with `C` coded by the prefix-closed set
/// of words whose cylinder meets it.
pub fn closed_set_relation(
    tree: &TruncTree,
    c_tree: &BTreeSet<Node>,
) -> Result<Relation, TreeRelError> {
    for w in c_tree {
        tree.index(w)
            .ok_or_else(|| TreeRelError::NotInTree(w.clone()))?;
        if let Some(k) = (0..w.len()).find(|&k| !c_tree.contains(&w[..k])) {
            return Err(TreeRelError::NotPrefixClosed(w[..k].to_vec()));
        }
    }
    Ok(Relation::from_fn(tree, |s, t| {
        is_prefix(s, t) && c_tree.contains(t)
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeRelFailure {
    NotReflexive(Node),
    NotAntisymmetric(Node, Node),
    NotTransitive(Node, Node, Node),
    RootNotBelow(Node),
    PredecessorsNotChain(Node, Node, Node),
}

impl fmt::Display for TreeRelFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeRelFailure::NotReflexive(t) => write!(f, "not-reflexive t={}", show(t)),
            TreeRelFailure::NotAntisymmetric(s, t) => {
                write!(f, "not-antisymmetric s={} t={}", show(s), show(t))
            }
            TreeRelFailure::NotTransitive(s, t, u) => {
                write!(
                    f,
                    "not-transitive s={} t={} u={}",
                    show(s),
                    show(t),
                    show(u)
                )
            }
            TreeRelFailure::RootNotBelow(t) => write!(f, "clause=a t={}", show(t)),
            TreeRelFailure::PredecessorsNotChain(t, a, b) => {
                write!(
                    f,
                    "clause=b t={} incomparable={},{}",
                    show(t),
                    show(a),
                    show(b)
                )
            }
        }
    }
}

/// First violation of: `∅ R t`, partial order, and `P_R(t)` linearly
/// ordered by `R`.
pub fn tree_relation_failure(r: &Relation, tree: &TruncTree) -> Option<TreeRelFailure> {
    let n = tree.len();
    let node = |i: usize| tree.node(i).clone();
    if let Some(t) = (0..n).find(|&t| !r.holds(0, t)) {
        return Some(TreeRelFailure::RootNotBelow(node(t)));
    }
    if let Some(i) = (0..n).find(|&i| !r.holds(i, i)) {
        return Some(TreeRelFailure::NotReflexive(node(i)));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && r.holds(i, j) && r.holds(j, i) {
                return Some(TreeRelFailure::NotAntisymmetric(node(i), node(j)));
            }
        }
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| r.holds(i, j)) {
            let (ri, rj) = (r.row(i), r.row(j));
            if ri.iter().zip(rj).any(|(a, b)| b & !a != 0) {
                let k = (0..n)
                    .find(|&k| r.holds(j, k) && !r.holds(i, k))
                    .expect("bit set");
                return Some(TreeRelFailure::NotTransitive(node(i), node(j), node(k)));
            }
        }
    }
    for t in 0..n {
        let preds: Vec<usize> = (0..n).filter(|&s| r.holds(s, t)).collect();
        for (x, &a) in preds.iter().enumerate() {
            for &b in &preds[x + 1..] {
                if !r.holds(a, b) && !r.holds(b, a) {
                    return Some(TreeRelFailure::PredecessorsNotChain(
                        node(t),
                        node(a),
                        node(b),
                    ));
                }
            }
        }
    }
    None
}

pub fn is_tree_relation(r: &Relation, tree: &TruncTree) -> bool {
    tree_relation_failure(r, tree).is_none()
}

/// `P_R(t)`, listed from `∅` up to `t`.
pub fn predecessors(r: &Relation, tree: &TruncTree, t: &[u8]) -> Result<Vec<Node>, TreeRelError> {
    let j = tree
        .index(t)
        .ok_or_else(|| TreeRelError::NotInTree(t.to_vec()))?;
    let mut preds: Vec<usize> = (0..tree.len()).filter(|&s| r.holds(s, j)).collect();
    // along a chain, the number of elements below is a sort key
    preds.sort_by_key(|&s| (0..tree.len()).filter(|&x| r.holds(x, s)).count());
    Ok(preds.into_iter().map(|s| tree.node(s).clone()).collect())
}

/// `h_R(t) = |P_R(t)| − 1`.
pub fn height(r: &Relation, tree: &TruncTree, t: &[u8]) -> Result<usize, TreeRelError> {
    Ok(predecessors(r, tree, t)?.len().saturating_sub(1))
}

fn heights(r: &Relation, tree: &TruncTree) -> Vec<usize> {
    (0..tree.len())
        .map(|j| {
            (0..tree.len())
                .filter(|&s| r.holds(s, j))
                .count()
                .saturating_sub(1)
        })
        .collect()
}

/// A triple with `s S t S u`, `s R u` and not `s R t`.
pub fn distinguished_failure(
    r: &Relation,
    s_rel: &Relation,
    tree: &TruncTree,
) -> Result<Option<(Node, Node, Node)>, TreeRelError> {
    if let Some((i, j)) = r.first_outside(s_rel) {
        return Err(TreeRelError::NotSubset(
            tree.node(i).clone(),
            tree.node(j).clone(),
        ));
    }
    let n = tree.len();
    for s in 0..n {
        for t in (0..n).filter(|&t| s_rel.holds(s, t) && !r.holds(s, t)) {
            if let Some(u) = (0..n).find(|&u| s_rel.holds(t, u) && r.holds(s, u)) {
                return Ok(Some((
                    tree.node(s).clone(),
                    tree.node(t).clone(),
                    tree.node(u).clone(),
                )));
            }
        }
    }
    Ok(None)
}

/// `R ⊆ S` is distinguished in `S`.
pub fn is_distinguished(
    r: &Relation,
    s_rel: &Relation,
    tree: &TruncTree,
) -> Result<bool, TreeRelError> {
    Ok(distinguished_failure(r, s_rel, tree)?.is_none())
}

/// Stages `R^{(0)}, …, R^{(η)}`, plus an optional top stage at index
/// `η + 1` standing for a limit and meant to equal the intersection.
#[derive(Debug, Clone)]
pub struct ResolutionFamily {
    stages: Vec<Relation>,
    top: Option<Relation>,
}

impl ResolutionFamily {
    pub fn new(stages: Vec<Relation>) -> Self {
        ResolutionFamily { stages, top: None }
    }

    pub fn with_top(stages: Vec<Relation>, top: Relation) -> Self {
        ResolutionFamily {
            stages,
            top: Some(top),
        }
    }

    /// Highest index, counting the top stage if present.
    pub fn max_index(&self) -> usize {
        self.stages.len() - 1 + self.top.is_some() as usize
    }

    pub fn top_index(&self) -> Option<usize> {
        self.top.as_ref().map(|_| self.stages.len())
    }

    pub fn stage(&self, rho: usize) -> Option<&Relation> {
        self.stages.get(rho).or_else(|| {
            (rho == self.stages.len())
                .then_some(self.top.as_ref())
                .flatten()
        })
    }

    fn stage_or_err(&self, rho: usize) -> Result<&Relation, TreeRelError> {
        self.stage(rho).ok_or(TreeRelError::BadIndex(rho))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyFailure {
    NotTreeRelation {
        index: usize,
        failure: TreeRelFailure,
    },
    NotSubset {
        index: usize,
        pair: (Node, Node),
    },
    NotDistinguished {
        index: usize,
        triple: (Node, Node, Node),
    },
    TopNotIntersection,
}

impl fmt::Display for FamilyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyFailure::NotTreeRelation { index, failure } => {
                write!(f, "stage={index} {failure}")
            }
            FamilyFailure::NotSubset { index, pair } => {
                write!(
                    f,
                    "stage={index} not-contained s={} t={}",
                    show(&pair.0),
                    show(&pair.1)
                )
            }
            FamilyFailure::NotDistinguished { index, triple } => write!(
                f,
                "stage={index} not-distinguished s={} t={} u={}",
                show(&triple.0),
                show(&triple.1),
                show(&triple.2)
            ),
            FamilyFailure::TopNotIntersection => write!(f, "top-is-not-the-intersection"),
        }
    }
}

pub fn resolution_family_failure(
    family: &ResolutionFamily,
    tree: &TruncTree,
) -> Option<FamilyFailure> {
    for (index, r) in family.stages.iter().enumerate() {
        if let Some(failure) = tree_relation_failure(r, tree) {
            return Some(FamilyFailure::NotTreeRelation { index, failure });
        }
    }
    for (index, pair) in family.stages.windows(2).enumerate() {
        let index = index + 1;
        match distinguished_failure(&pair[1], &pair[0], tree) {
            Err(TreeRelError::NotSubset(s, t)) => {
                return Some(FamilyFailure::NotSubset {
                    index,
                    pair: (s, t),
                })
            }
            Ok(Some(triple)) => return Some(FamilyFailure::NotDistinguished { index, triple }),
            _ => {}
        }
    }
    if let Some(top) = &family.top {
        let meet = family
            .stages
            .iter()
            .skip(1)
            .fold(family.stages[0].clone(), |acc, r| acc.intersection(r));
        if *top != meet {
            return Some(FamilyFailure::TopNotIntersection);
        }
    }
    None
}

pub fn is_resolution_family(family: &ResolutionFamily, tree: &TruncTree) -> bool {
    resolution_family_failure(family, tree).is_none()
}

/// `z^ρ`: the longest proper prefix of `z` that is `R^{(ρ)}`-below `z`.
pub fn z_rho(
    family: &ResolutionFamily,
    tree: &TruncTree,
    rho: usize,
    z: &[u8],
) -> Result<Node, TreeRelError> {
    if z.is_empty() {
        return Err(TreeRelError::EmptyWord);
    }
    let r = family.stage_or_err(rho)?;
    let j = tree
        .index(z)
        .ok_or_else(|| TreeRelError::NotInTree(z.to_vec()))?;
    (0..z.len())
        .rev()
        .find(|&k| r.holds(tree.index(&z[..k]).expect("prefix of a node"), j))
        .map(|k| z[..k].to_vec())
        .ok_or_else(|| TreeRelError::NoPredecessor(z.to_vec()))
}

/// The distinct values of `ρ ↦ z^ρ`, longest first, each with the largest
/// index attaining it. Checks that each value is attained on an interval of
/// indices and that `z^{ξ_{i+1}} R^{(ξ_{i+1})} z^{ξ_i}`.
pub fn xi_enumeration(
    family: &ResolutionFamily,
    tree: &TruncTree,
    z: &[u8],
) -> Result<Vec<(usize, Node)>, TreeRelError> {
    let values = (0..=family.max_index())
        .map(|rho| z_rho(family, tree, rho, z))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<(usize, Node)> = Vec::new();
    for (rho, v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.1 == *v => last.0 = rho,
            _ => {
                if out.iter().any(|(_, w)| w == v) {
                    return Err(TreeRelError::ChainLink(v.clone(), z.to_vec()));
                }
                out.push((rho, v.clone()));
            }
        }
    }
    out.sort_by_key(|a| std::cmp::Reverse(a.1.len()));
    for pair in out.windows(2) {
        let ((_, upper), (xi, lower)) = (&pair[0], &pair[1]);
        if !is_prefix(lower, upper)
            || lower == upper
            || !family.stage_or_err(*xi)?.related(tree, lower, upper)
        {
            return Err(TreeRelError::ChainLink(lower.clone(), upper.clone()));
        }
    }
    Ok(out)
}

/// A `(k, s, t)` with `min(h(s), h(t)) ≤ k` and `s R^{(η_k)} t` but not
/// `s R^{(top)} t`, for `k ≤` the tree depth.
pub fn uniform_failure(
    family: &ResolutionFamily,
    tree: &TruncTree,
    eta: impl Fn(usize) -> usize,
) -> Result<Option<(usize, Node, Node)>, TreeRelError> {
    let top_index = family.top_index().ok_or(TreeRelError::NoTop)?;
    let top = family.stage_or_err(top_index)?;
    for k in 0..=tree.depth() {
        let e = eta(k);
        if e == 0 || e >= top_index {
            return Err(TreeRelError::BadEta { k, eta: e });
        }
        let r = family.stage_or_err(e)?;
        let h = heights(r, tree);
        for s in 0..tree.len() {
            for t in 0..tree.len() {
                if h[s].min(h[t]) <= k && r.holds(s, t) && !top.holds(s, t) {
                    return Ok(Some((k, tree.node(s).clone(), tree.node(t).clone())));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_uniform(
    family: &ResolutionFamily,
    tree: &TruncTree,
    eta: impl Fn(usize) -> usize,
) -> Result<bool, TreeRelError> {
    Ok(uniform_failure(family, tree, eta)?.is_none())
}

/// A counterexample `(ρ, s, s′, s″)` to: `s ≺ s′ R^{(ρ)} s″` and
/// `s R^{(ρ+1)} s″` imply `s R^{(ρ+1)} s′`, over the successor stages.
pub fn extension_lemma_failure(
    family: &ResolutionFamily,
    tree: &TruncTree,
) -> Option<(usize, Node, Node, Node)> {
    let n = tree.len();
    for rho in 0..family.stages.len().saturating_sub(1) {
        let (r, next) = (&family.stages[rho], &family.stages[rho + 1]);
        for s in 0..n {
            for s1 in
                (0..n).filter(|&s1| is_prefix(tree.node(s), tree.node(s1)) && !next.holds(s, s1))
            {
                if let Some(s2) = (0..n).find(|&s2| r.holds(s1, s2) && next.holds(s, s2)) {
                    return Some((
                        rho,
                        tree.node(s).clone(),
                        tree.node(s1).clone(),
                        tree.node(s2).clone(),
                    ));
                }
            }
        }
    }
    None
}
