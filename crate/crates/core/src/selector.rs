//! π-selectors on acyclic edge sets `𝒯 ⊆ F₀ × F₁`, in a finite model.
//!
//! Points of `X₀` and `X₁` are indices `0..|X_ε|`, and set-valued maps are
//! [`SetMap`]s. The closure `Ψ̄` of the infinite setting becomes any
//! user-supplied superset map, and the separation step becomes a search for
//! a point of `Ψ(t) ∩ (U₀ × U₁)`, which may fail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::codings::Side;
use crate::graph::{BipartiteGraph, Vertex};
use crate::testkit::LevelGraph;

pub type Edge = (usize, usize);
pub type Point = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("the edge set has a cycle through {}", show_cycle(.0))]
    Cyclic(Vec<Vertex>),
    #[error("edge ({0},{1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("({0},{1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("psi({0},{1}) is not contained in phi_bar({0},{1})")]
    NotASuperset(usize, usize),
    #[error("no base selector: phi_bar admits no pi-selector")]
    NoBaseSelector,
    #[error("separation surrogate failed at stage {stage}: psi({},{}) misses U0 x U1", .edge.0, .edge.1)]
    SeparationSurrogateFailed { stage: usize, edge: Edge },
    #[error("internal check failed: {0}")]
    Internal(String),
}

fn show_cycle(c: &[Vertex]) -> String {
    c.iter()
        .map(|v| {
            format!(
                "{}{}",
                if v.side == Side::Zero { 'L' } else { 'R' },
                v.index
            )
        })
        .collect::<Vec<_>>()
        .join("-")
}

#[derive(Debug, Clone)]
pub struct SelectorInstance {
    n0: usize,
    n1: usize,
    /// `𝒯` in input order, without repeats.
    edges: Vec<Edge>,
    x0: usize,
    x1: usize,
    graph: BipartiteGraph,
    labels: Option<(Vec<String>, Vec<String>)>,
}

impl SelectorInstance {
    /// Rejects edge sets whose graph has a cycle.
    pub fn new(
        n0: usize,
        n1: usize,
        edges: &[Edge],
        x0: usize,
        x1: usize,
    ) -> Result<Self, SelectorError> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for &(a, b) in edges {
            if a >= n0 || b >= n1 {
                return Err(SelectorError::OutOfRange(a, b));
            }
            if seen.insert((a, b)) {
                kept.push((a, b));
            }
        }
        let graph = BipartiteGraph::new(n0, n1, kept.iter().copied());
        if let Some(cycle) = graph.find_cycle() {
            return Err(SelectorError::Cyclic(cycle));
        }
        Ok(SelectorInstance {
            n0,
            n1,
            edges: kept,
            x0,
            x1,
            graph,
            labels: None,
        })
    }

    /// The instance on a level graph `G_{𝒯_p}`, vertices labelled by words.
    pub fn from_level_graph(g: &LevelGraph, x0: usize, x1: usize) -> Result<Self, SelectorError> {
        let n = g.graph().left_count();
        let mut inst =
            SelectorInstance::new(n, g.graph().right_count(), g.graph().edges(), x0, x1)?;
        let names = |side| {
            (0..n)
                .map(|i| g.word(Vertex { side, index: i }).to_string())
                .collect()
        };
        inst.labels = Some((names(Side::Zero), names(Side::One)));
        Ok(inst)
    }

    pub fn with_labels(mut self, f0: Vec<String>, f1: Vec<String>) -> Self {
        self.labels = Some((f0, f1));
        self
    }

    pub fn label(&self, v: Vertex) -> String {
        match (&self.labels, v.side) {
            (Some((l, _)), Side::Zero) => l[v.index].clone(),
            (Some((_, r)), Side::One) => r[v.index].clone(),
            (None, _) => v.index.to_string(),
        }
    }

    /// Index of the vertex labelled `name` on one side.
    pub fn find_label(&self, side: Side, name: &str) -> Option<usize> {
        let count = if side == Side::Zero { self.n0 } else { self.n1 };
        (0..count).find(|&i| self.label(Vertex { side, index: i }) == name)
    }

    pub fn left_count(&self) -> usize {
        self.n0
    }

    pub fn right_count(&self) -> usize {
        self.n1
    }

    pub fn point_counts(&self) -> (usize, usize) {
        (self.x0, self.x1)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn is_edge(&self, e: Edge) -> bool {
        self.graph.has_edge(e.0, e.1)
    }
}

/// `t ↦ Φ(t) ⊆ X₀ × X₁`; pairs not listed map to the empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SetMap {
    sets: BTreeMap<Edge, BTreeSet<Point>>,
}

impl SetMap {
    pub fn new() -> Self {
        SetMap::default()
    }

    pub fn set(&mut self, t: Edge, points: impl IntoIterator<Item = Point>) {
        self.sets.insert(t, points.into_iter().collect());
    }

    pub fn get(&self, t: Edge) -> &BTreeSet<Point> {
        static EMPTY: BTreeSet<Point> = BTreeSet::new();
        self.sets.get(&t).unwrap_or(&EMPTY)
    }

    pub fn contains(&self, t: Edge, x: Point) -> bool {
        self.get(t).contains(&x)
    }

    /// Same map with `t` sent to `points`.
    pub fn with(&self, t: Edge, points: &BTreeSet<Point>) -> SetMap {
        let mut out = self.clone();
        out.sets.insert(t, points.clone());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PiSelector {
    pub psi0: Vec<usize>,
    pub psi1: Vec<usize>,
}

impl PiSelector {
    pub fn at(&self, t: Edge) -> Point {
        (self.psi0[t.0], self.psi1[t.1])
    }

    /// The first edge where `ψ(t) ∉ Φ(t)`, if any.
    pub fn violation(&self, inst: &SelectorInstance, phi: &SetMap) -> Option<Edge> {
        if self.psi0.len() != inst.n0
            || self.psi1.len() != inst.n1
            || self.psi0.iter().any(|&x| x >= inst.x0)
            || self.psi1.iter().any(|&x| x >= inst.x1)
        {
            return inst.edges.first().copied().or(Some((0, 0)));
        }
        inst.edges
            .iter()
            .copied()
            .find(|&t| !phi.contains(t, self.at(t)))
    }

    pub fn is_selector_for(&self, inst: &SelectorInstance, phi: &SetMap) -> bool {
        self.violation(inst, phi).is_none()
    }
}

impl fmt::Display for PiSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "psi0=[{}] psi1=[{}]", join(&self.psi0), join(&self.psi1))
    }
}

/// The path from `from` to `to` in `G_𝒯`; unique since the graph is a
/// forest.
pub fn unique_path(inst: &SelectorInstance, from: Vertex, to: Vertex) -> Option<Vec<Vertex>> {
    inst.graph.unique_path(from, to)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub n: BTreeSet<Edge>,
    pub h: BTreeSet<Edge>,
    pub v: BTreeSet<Edge>,
}

impl Partition {
    pub fn projection(set: &BTreeSet<Edge>, side: Side) -> BTreeSet<usize> {
        set.iter()
            .map(|&(a, b)| if side == Side::Zero { a } else { b })
            .collect()
    }
}

/// Splits `F₀ × F₁ \ {t₀}` into `N`, `H`, `V`. An edge `(e₀, e₁)` with
/// `e₀ ≠ f₀` is in `H` when the path from `ē₀` to `f̄₀` enters `f̄₀`
/// through `f̄₁`, and in `V` when it enters some other way or `e₀ = f₀`.
pub fn partition_nhv(inst: &SelectorInstance, t0: Edge) -> Result<Partition, SelectorError> {
    if !inst.is_edge(t0) {
        return Err(SelectorError::NotAnEdge(t0.0, t0.1));
    }
    let (f0, f1) = t0;
    let target = Vertex::left(f0);
    let mut out = Partition::default();
    let entry: Vec<Option<Vertex>> = (0..inst.n0)
        .map(|e0| {
            if e0 == f0 {
                return None;
            }
            let path = unique_path(inst, Vertex::left(e0), target)?;
            Some(path[path.len() - 2])
        })
        .collect();
    for (e0, &through) in entry.iter().enumerate() {
        for e1 in 0..inst.n1 {
            let t = (e0, e1);
            if t == t0 {
                continue;
            }
            if !inst.is_edge(t) || (e0 != f0 && through.is_none()) {
                out.n.insert(t);
            } else if e0 != f0 && through == Some(Vertex::right(f1)) {
                out.h.insert(t);
            } else {
                out.v.insert(t);
            }
        }
    }
    Ok(out)
}

/// Combines two `Φ`-selectors anchored at `t₀ = (f₀, f₁)` into one that
/// takes the value `x` at `t₀` and stays in `Φ` elsewhere on `𝒯`.
///
/// `psi_a` must satisfy `psi_a₀(f₀) = x₀` and `psi_b` must satisfy
/// `psi_b₁(f₁) = x₁`; both must be `Φ`-selectors on `𝒯`.
pub fn blend(
    inst: &SelectorInstance,
    t0: Edge,
    phi: &SetMap,
    psi_a: &PiSelector,
    psi_b: &PiSelector,
    x: Point,
) -> Result<PiSelector, SelectorError> {
    let part = partition_nhv(inst, t0)?;
    let (f0, f1) = t0;
    for (name, sel) in [("psi_a", psi_a), ("psi_b", psi_b)] {
        if let Some(t) = sel.violation(inst, phi) {
            return Err(SelectorError::Precondition(format!(
                "{name} leaves phi at ({},{})",
                t.0, t.1
            )));
        }
    }
    if psi_a.psi0[f0] != x.0 || psi_b.psi1[f1] != x.1 {
        return Err(SelectorError::Precondition(
            "selectors are not anchored at x".into(),
        ));
    }
    let h0 = Partition::projection(&part.h, Side::Zero);
    let h1 = Partition::projection(&part.h, Side::One);
    let psi0 = (0..inst.n0)
        .map(|e0| match e0 {
            _ if e0 == f0 => x.0,
            _ if h0.contains(&e0) => psi_b.psi0[e0],
            _ => psi_a.psi0[e0],
        })
        .collect();
    let psi1 = (0..inst.n1)
        .map(|e1| match e1 {
            _ if e1 == f1 => x.1,
            _ if h1.contains(&e1) => psi_b.psi1[e1],
            _ => psi_a.psi1[e1],
        })
        .collect();
    let out = PiSelector { psi0, psi1 };
    if out.at(t0) != x {
        return Err(SelectorError::Internal("blend misses x at t0".into()));
    }
    if let Some(t) = inst
        .edges
        .iter()
        .copied()
        .find(|&t| t != t0 && !phi.contains(t, out.at(t)))
    {
        return Err(SelectorError::Internal(format!(
            "blend leaves phi at ({},{})",
            t.0, t.1
        )));
    }
    Ok(out)
}

/// A `Φ`-selector, optionally with one coordinate pinned. Vertices are
/// assigned component by component in breadth-first order, trying points
/// in increasing order, so the answer is deterministic and a forest with
/// satisfiable constraints is solved with little backtracking.
pub fn find_selector(
    inst: &SelectorInstance,
    phi: &SetMap,
    anchor: Option<(Vertex, usize)>,
) -> Option<PiSelector> {
    let order = search_order(inst);
    let mut psi0: Vec<Option<usize>> = vec![None; inst.n0];
    let mut psi1: Vec<Option<usize>> = vec![None; inst.n1];
    fn go(
        k: usize,
        order: &[Vertex],
        inst: &SelectorInstance,
        phi: &SetMap,
        anchor: Option<(Vertex, usize)>,
        psi0: &mut Vec<Option<usize>>,
        psi1: &mut Vec<Option<usize>>,
    ) -> bool {
        let Some(&v) = order.get(k) else {
            return true;
        };
        let range = if v.side == Side::Zero {
            inst.x0
        } else {
            inst.x1
        };
        for x in 0..range {
            if anchor.is_some_and(|(a, ax)| a == v && ax != x) {
                continue;
            }
            let ok = inst.graph.neighbours(v).all(|u| {
                let (edge, point) = match v.side {
                    Side::Zero => ((v.index, u.index), psi1[u.index].map(|y| (x, y))),
                    Side::One => ((u.index, v.index), psi0[u.index].map(|y| (y, x))),
                };
                point.is_none_or(|p| phi.contains(edge, p))
            });
            if !ok {
                continue;
            }
            match v.side {
                Side::Zero => psi0[v.index] = Some(x),
                Side::One => psi1[v.index] = Some(x),
            }
            if go(k + 1, order, inst, phi, anchor, psi0, psi1) {
                return true;
            }
        }
        match v.side {
            Side::Zero => psi0[v.index] = None,
            Side::One => psi1[v.index] = None,
        }
        false
    }
    go(0, &order, inst, phi, anchor, &mut psi0, &mut psi1).then(|| PiSelector {
        psi0: psi0.into_iter().map(|x| x.expect("assigned")).collect(),
        psi1: psi1.into_iter().map(|x| x.expect("assigned")).collect(),
    })
}

fn search_order(inst: &SelectorInstance) -> Vec<Vertex> {
    let all = (0..inst.n0)
        .map(Vertex::left)
        .chain((0..inst.n1).map(Vertex::right));
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for root in all {
        if !seen.insert(root) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for u in inst.graph.neighbours(v) {
                if seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

/// A `Ψ`-selector on `𝒯` obtained from a `Φ̄`-selector by tightening one
/// edge at a time, in the input order of `𝒯`.
///
/// At each stage the current selector is kept when it already lands in
/// `Ψ(t_{j+1})`. Otherwise `U₀`, `U₁` are computed over all selectors for
/// the current stage map and two anchored ones are blended.
pub fn lift_selector(
    inst: &SelectorInstance,
    psi: &SetMap,
    phi_bar: &SetMap,
) -> Result<PiSelector, SelectorError> {
    for &t in &inst.edges {
        if !psi.get(t).is_subset(phi_bar.get(t)) {
            return Err(SelectorError::NotASuperset(t.0, t.1));
        }
    }
    let base = find_selector(inst, phi_bar, None).ok_or(SelectorError::NoBaseSelector)?;
    lift_selector_with_base(inst, psi, phi_bar, base)
}

/// [`lift_selector`] starting from a given `Φ̄`-selector.
pub fn lift_selector_with_base(
    inst: &SelectorInstance,
    psi: &SetMap,
    phi_bar: &SetMap,
    base: PiSelector,
) -> Result<PiSelector, SelectorError> {
    if base.violation(inst, phi_bar).is_some() {
        return Err(SelectorError::Precondition(
            "base is not a phi_bar-selector".into(),
        ));
    }
    let mut stage = phi_bar.clone();
    let mut current = base;
    for (j, &t) in inst.edges.iter().enumerate() {
        let next = stage.with(t, psi.get(t));
        if !next.contains(t, current.at(t)) {
            let anchored = |v: Vertex, range: usize| -> BTreeMap<usize, PiSelector> {
                (0..range)
                    .filter_map(|x| find_selector(inst, &stage, Some((v, x))).map(|s| (x, s)))
                    .collect()
            };
            let u0 = anchored(Vertex::left(t.0), inst.x0);
            let u1 = anchored(Vertex::right(t.1), inst.x1);
            let x = psi
                .get(t)
                .iter()
                .copied()
                .find(|(a, b)| u0.contains_key(a) && u1.contains_key(b))
                .ok_or(SelectorError::SeparationSurrogateFailed { stage: j, edge: t })?;
            current = blend(inst, t, &stage, &u0[&x.0], &u1[&x.1], x)?;
        }
        stage = next;
        if let Some(bad) = current.violation(inst, &stage) {
            return Err(SelectorError::Internal(format!(
                "stage {j} leaves the map at ({},{})",
                bad.0, bad.1
            )));
        }
    }
    Ok(current)
}
