//! Bipartite graphs on `F₀ ⊕ F₁` given by an edge set `𝒯 ⊆ F₀ × F₁`.

use std::collections::{BTreeSet, VecDeque};

use crate::codings::Side;

/// A vertex `f̄_ε = (f_ε, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl Vertex {
    pub fn left(index: usize) -> Self {
        Vertex {
            side: Side::Zero,
            index,
        }
    }

    pub fn right(index: usize) -> Self {
        Vertex {
            side: Side::One,
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n0: usize,
    n1: usize,
    edges: Vec<(usize, usize)>,
    adj0: Vec<Vec<usize>>,
    adj1: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Duplicate edges are dropped; edges are kept sorted.
    ///
    /// # Panics
    /// If an endpoint is out of range.
    pub fn new(n0: usize, n1: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: Vec<_> = edges
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut adj0 = vec![Vec::new(); n0];
        let mut adj1 = vec![Vec::new(); n1];
        for &(a, b) in &edges {
            assert!(a < n0 && b < n1, "edge ({a},{b}) out of range");
            adj0[a].push(b);
            adj1[b].push(a);
        }
        BipartiteGraph {
            n0,
            n1,
            edges,
            adj0,
            adj1,
        }
    }

    pub fn left_count(&self) -> usize {
        self.n0
    }

    pub fn right_count(&self) -> usize {
        self.n1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a, b)).is_ok()
    }

    pub fn neighbours(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let (list, side) = match v.side {
            Side::Zero => (&self.adj0[v.index], Side::One),
            Side::One => (&self.adj1[v.index], Side::Zero),
        };
        list.iter().map(move |&index| Vertex { side, index })
    }

    fn slot(&self, v: Vertex) -> usize {
        match v.side {
            Side::Zero => v.index,
            Side::One => self.n0 + v.index,
        }
    }

    fn contains(&self, v: Vertex) -> bool {
        match v.side {
            Side::Zero => v.index < self.n0,
            Side::One => v.index < self.n1,
        }
    }

    /// Union-find: the graph has a cycle iff some edge joins two vertices that
    /// are already connected.
    pub fn is_acyclic(&self) -> bool {
        self.closing_edge().is_none()
    }

    fn closing_edge(&self) -> Option<usize> {
        let mut uf = UnionFind::new(self.n0 + self.n1);
        self.edges
            .iter()
            .position(|&(a, b)| !uf.union(a, self.n0 + b))
    }

    /// A cycle as a closed vertex sequence (first vertex repeated at the end),
    /// or `None` for a forest.
    pub fn find_cycle(&self) -> Option<Vec<Vertex>> {
        let k = self.closing_edge()?;
        let (a, b) = self.edges[k];
        let forest = BipartiteGraph::new(self.n0, self.n1, self.edges[..k].iter().copied());
        let mut cycle = forest.unique_path(Vertex::right(b), Vertex::left(a))?;
        cycle.push(Vertex::right(b));
        Some(cycle)
    }

    /// The path between two vertices found by breadth-first search. In a
    /// forest it is the only simple path.
    pub fn unique_path(&self, from: Vertex, to: Vertex) -> Option<Vec<Vertex>> {
        if !self.contains(from) || !self.contains(to) {
            return None;
        }
        let mut parent: Vec<Option<Vertex>> = vec![None; self.n0 + self.n1];
        let mut seen = vec![false; self.n0 + self.n1];
        seen[self.slot(from)] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(p) = parent[self.slot(cur)] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for w in self.neighbours(v) {
                let s = self.slot(w);
                if !seen[s] {
                    seen[s] = true;
                    parent[s] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already in one component.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_is_found() {
        let g = BipartiteGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(!g.is_acyclic());
        let c = g.find_cycle().unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.first(), c.last());
        for w in c.windows(2) {
            let (l, r) = if w[0].side == Side::Zero {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            };
            assert!(g.has_edge(l.index, r.index));
        }
    }

    #[test]
    fn empty_and_single_edge_graphs_are_acyclic() {
        assert!(BipartiteGraph::new(0, 0, []).is_acyclic());
        assert!(BipartiteGraph::new(3, 3, []).is_acyclic());
        assert!(BipartiteGraph::new(1, 1, [(0, 0), (0, 0)]).is_acyclic());
    }

    #[test]
    fn path_through_a_tree() {
        // 10 - 00 - 11 - 01, as left/right indices 0=00, 1=01, 2=10, 3=11
        let g = BipartiteGraph::new(4, 4, [(0, 2), (1, 3), (0, 3)]);
        assert!(g.is_acyclic());
        let p = g.unique_path(Vertex::left(1), Vertex::left(0)).unwrap();
        assert_eq!(p, vec![Vertex::left(1), Vertex::right(3), Vertex::left(0)]);
        assert_eq!(g.unique_path(Vertex::left(2), Vertex::left(0)), None);
        assert_eq!(
            g.unique_path(Vertex::left(2), Vertex::left(2)),
            Some(vec![Vertex::left(2)])
        );
    }
}
