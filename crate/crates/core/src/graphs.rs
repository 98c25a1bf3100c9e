//! Alignment graph, conflict graph, alignment sets and the reduced graph.
//!
//! Two messages share an alignment edge when both are heard at a receiver
//! that desires neither. A conflict edge joins a message to every interferer
//! heard at its own receiver. Alignment sets are the connected components of
//! the alignment graph; the reduced graph has one vertex per alignment set with
//! at least two messages and an edge wherever a conflict crosses two such sets.
//!
//! Everything here is stored in canonical order (pairs as `(small, large)`,
//! sets sorted by their minimum message).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Serialize, Serializer};

use crate::topology::NetworkTopology;

/// Unordered pair stored with the smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(usize, usize);

impl Pair {
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Pair(a, b)
        } else {
            Pair(b, a)
        }
    }

    pub fn lo(self) -> usize {
        self.0
    }

    pub fn hi(self) -> usize {
        self.1
    }

    pub fn contains(self, v: usize) -> bool {
        self.0 == v || self.1 == v
    }
}

impl Serialize for Pair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

pub type EdgeSet = BTreeSet<Pair>;

/// Adjacency lists of an undirected simple graph on arbitrary vertex ids.
#[derive(Debug, Clone, Default)]
pub struct Adjacency {
    adj: BTreeMap<usize, Vec<usize>>,
}

impl Adjacency {
    pub fn new(vertices: impl IntoIterator<Item = usize>, edges: &EdgeSet) -> Self {
        let mut adj: BTreeMap<usize, Vec<usize>> =
            vertices.into_iter().map(|v| (v, Vec::new())).collect();
        for e in edges {
            adj.entry(e.lo()).or_default().push(e.hi());
            adj.entry(e.hi()).or_default().push(e.lo());
        }
        for list in adj.values_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Adjacency { adj }
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adj.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// BFS distances from `src` over its component.
    pub fn bfs_distances(&self, src: usize) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::new();
        dist.insert(src, 0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for &w in self.neighbors(u) {
                if !dist.contains_key(&w) {
                    dist.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Lexicographically smallest shortest path from `src` to `dst`, inclusive.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Option<Vec<usize>> {
        let to_dst = self.bfs_distances(dst);
        let mut d = *to_dst.get(&src)?;
        let mut path = vec![src];
        let mut cur = src;
        while d > 0 {
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|w| to_dst.get(w) == Some(&(d - 1)))
                .expect("bfs layers are consistent");
            path.push(cur);
            d -= 1;
        }
        Some(path)
    }
}

/// Outcome of two-colouring a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// `side[v]` is `false` or `true` for every vertex.
    Bipartite(BTreeMap<usize, bool>),
    /// A simple cycle of odd length, listed in cycle order.
    OddCycle(Vec<usize>),
}

impl Bipartition {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartition::Bipartite(_))
    }
}

/// BFS layering; on failure returns the odd cycle closed by a same-layer edge.
pub fn two_color(g: &Adjacency) -> Bipartition {
    let mut level: BTreeMap<usize, usize> = BTreeMap::new();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for root in g.vertices() {
        if level.contains_key(&root) {
            continue;
        }
        level.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                match level.get(&w) {
                    None => {
                        level.insert(w, level[&u] + 1);
                        parent.insert(w, u);
                        queue.push_back(w);
                    }
                    Some(&lw) if lw == level[&u] => {
                        // Walk both tree paths up to their meeting point.
                        let mut left = vec![u];
                        let mut right = vec![w];
                        let (mut a, mut b) = (u, w);
                        while a != b {
                            a = parent[&a];
                            b = parent[&b];
                            left.push(a);
                            right.push(b);
                        }
                        right.pop();
                        right.reverse();
                        left.extend(right);
                        // left: u .. lca .. w ; the edge w-u closes it.
                        return Bipartition::OddCycle(left);
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Bipartition::Bipartite(level.into_iter().map(|(v, l)| (v, l % 2 == 1)).collect())
}

/// `{i, j}` is an alignment edge iff some receiver hears both as interferers.
pub fn build_alignment_graph(t: &NetworkTopology) -> EdgeSet {
    let mut edges = EdgeSet::new();
    for k in 1..=t.users() {
        let m: Vec<usize> = t.interferers(k).collect();
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                edges.insert(Pair::new(i, j));
            }
        }
    }
    edges
}

/// Undirected conflict edges, each annotated with the receivers that caused it
/// as `(receiver, interferer)` pairs.
pub fn build_conflict_graph(t: &NetworkTopology) -> (EdgeSet, BTreeMap<Pair, Vec<(usize, usize)>>) {
    let mut sources: BTreeMap<Pair, Vec<(usize, usize)>> = BTreeMap::new();
    for k in 1..=t.users() {
        for j in t.interferers(k) {
            sources.entry(Pair::new(k, j)).or_default().push((k, j));
        }
    }
    (sources.keys().copied().collect(), sources)
}

/// Connected components over `1..=users`, singletons included, sorted by minimum.
pub fn compute_alignment_sets(edges: &EdgeSet, users: usize) -> Vec<Vec<usize>> {
    let g = Adjacency::new(1..=users, edges);
    let mut seen = vec![false; users + 1];
    let mut sets = Vec::new();
    for v in 1..=users {
        if seen[v] {
            continue;
        }
        let comp: Vec<usize> = g.bfs_distances(v).into_keys().collect();
        for &c in &comp {
            seen[c] = true;
        }
        sets.push(comp);
    }
    sets
}

/// Index of the alignment set of every message (`result[msg]`, slot 0 unused).
pub fn set_index(sets: &[Vec<usize>], users: usize) -> Vec<usize> {
    let mut idx = vec![usize::MAX; users + 1];
    for (s, set) in sets.iter().enumerate() {
        for &m in set {
            idx[m] = s;
        }
    }
    idx
}

pub fn find_internal_conflicts(set_of: &[usize], conflict_edges: &EdgeSet) -> EdgeSet {
    conflict_edges
        .iter()
        .copied()
        .filter(|e| set_of[e.lo()] == set_of[e.hi()])
        .collect()
}

/// Conflicts between distinct alignment sets, as pairs of set indices. This is
/// the colouring domain of the schemes: singletons included.
pub fn set_conflict_edges(set_of: &[usize], conflict_edges: &EdgeSet) -> EdgeSet {
    conflict_edges
        .iter()
        .filter(|e| set_of[e.lo()] != set_of[e.hi()])
        .map(|e| Pair::new(set_of[e.lo()], set_of[e.hi()]))
        .collect()
}

/// Reduced graph over set indices: vertices are sets of size at least two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedGraph {
    pub vertices: Vec<usize>,
    pub edges: EdgeSet,
}

impl ReducedGraph {
    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self.vertices.iter().copied(), &self.edges)
    }
}

pub fn build_reduced_graph(sets: &[Vec<usize>], set_of: &[usize], conflict_edges: &EdgeSet) -> ReducedGraph {
    let vertices: Vec<usize> = (0..sets.len()).filter(|&s| sets[s].len() >= 2).collect();
    let edges = set_conflict_edges(set_of, conflict_edges)
        .into_iter()
        .filter(|e| sets[e.lo()].len() >= 2 && sets[e.hi()].len() >= 2)
        .collect();
    ReducedGraph { vertices, edges }
}

pub fn is_bipartite(reduced: &ReducedGraph) -> Bipartition {
    two_color(&reduced.adjacency())
}

/// All graph structures derived from one topology.
#[derive(Debug, Clone)]
pub struct GraphBundle {
    pub users: usize,
    pub alignment_edges: EdgeSet,
    pub conflict_edges: EdgeSet,
    pub conflict_sources: BTreeMap<Pair, Vec<(usize, usize)>>,
    pub sets: Vec<Vec<usize>>,
    /// `set_of[msg]` is the index into `sets`; index 0 unused.
    pub set_of: Vec<usize>,
    pub internal_conflicts: EdgeSet,
    pub reduced: ReducedGraph,
    pub bipartition: Bipartition,
}

impl GraphBundle {
    pub fn build(t: &NetworkTopology) -> Self {
        let users = t.users();
        let alignment_edges = build_alignment_graph(t);
        let (conflict_edges, conflict_sources) = build_conflict_graph(t);
        let sets = compute_alignment_sets(&alignment_edges, users);
        let set_of = set_index(&sets, users);
        let internal_conflicts = find_internal_conflicts(&set_of, &conflict_edges);
        let reduced = build_reduced_graph(&sets, &set_of, &conflict_edges);
        let bipartition = is_bipartite(&reduced);
        GraphBundle {
            users,
            alignment_edges,
            conflict_edges,
            conflict_sources,
            sets,
            set_of,
            internal_conflicts,
            reduced,
            bipartition,
        }
    }

    pub fn reduced_bipartite(&self) -> bool {
        self.bipartition.is_bipartite()
    }

    pub fn alignment_adjacency(&self) -> Adjacency {
        Adjacency::new(1..=self.users, &self.alignment_edges)
    }

    pub fn conflict_adjacency(&self) -> Adjacency {
        Adjacency::new(1..=self.users, &self.conflict_edges)
    }

    /// Set index of the alignment set with exactly these members, if any.
    pub fn find_set(&self, members: &[usize]) -> Option<usize> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        self.sets.iter().position(|s| *s == sorted)
    }
}
