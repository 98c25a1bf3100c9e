//! Naive oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use timdof::bounds::half_dof_feasible;
use timdof::graphs::{Bipartition, GraphBundle, Pair};
use timdof::topology::NetworkTopology;

#[derive(Debug, PartialEq, Eq)]
pub struct Naive {
    pub alignment: BTreeSet<(usize, usize)>,
    pub conflict: BTreeSet<(usize, usize)>,
    pub sets: BTreeSet<Vec<usize>>,
    pub internal: BTreeSet<(usize, usize)>,
    pub reduced_vertices: BTreeSet<Vec<usize>>,
    pub reduced_edges: BTreeSet<(Vec<usize>, Vec<usize>)>,
    pub bipartite: bool,
}

fn hears(t: &NetworkTopology, k: usize, l: usize) -> bool {
    t.heard(k).contains(&l)
}

pub fn naive(t: &NetworkTopology) -> Naive {
    let n = t.users();
    let mut alignment = BTreeSet::new();
    let mut conflict = BTreeSet::new();
    for i in 1..=n {
        for j in i + 1..=n {
            // both interfere at some receiver that wants neither
            if (1..=n).any(|k| k != i && k != j && hears(t, k, i) && hears(t, k, j)) {
                alignment.insert((i, j));
            }
            // one is heard at the other's receiver
            if hears(t, i, j) || hears(t, j, i) {
                conflict.insert((i, j));
            }
        }
    }

    // label propagation to a fixed point
    let mut label: Vec<usize> = (0..=n).collect();
    loop {
        let mut changed = false;
        for &(i, j) in &alignment {
            let m = label[i].min(label[j]);
            if label[i] != m || label[j] != m {
                label[i] = m;
                label[j] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let members = |l: usize| -> Vec<usize> { (1..=n).filter(|&v| label[v] == l).collect() };
    let sets: BTreeSet<Vec<usize>> = (1..=n).map(|v| members(label[v])).collect();
    let internal = conflict.iter().copied().filter(|&(i, j)| label[i] == label[j]).collect();

    let big: Vec<Vec<usize>> = sets.iter().filter(|s| s.len() >= 2).cloned().collect();
    let mut reduced_edges = BTreeSet::new();
    for (a, sa) in big.iter().enumerate() {
        for sb in &big[a + 1..] {
            if sa.iter().any(|&i| sb.iter().any(|&j| conflict.contains(&(i.min(j), i.max(j))))) {
                reduced_edges.insert((sa.clone(), sb.clone()));
            }
        }
    }
    // try every 2-colouring
    let v = big.len();
    let bipartite = (0u32..1 << v).any(|mask| {
        reduced_edges.iter().all(|(a, b)| {
            let ia = big.iter().position(|s| s == a).unwrap();
            let ib = big.iter().position(|s| s == b).unwrap();
            (mask >> ia & 1) != (mask >> ib & 1)
        })
    });
    Naive {
        alignment,
        conflict,
        sets,
        internal,
        reduced_vertices: big.into_iter().collect(),
        reduced_edges,
        bipartite,
    }
}

pub fn from_module(t: &NetworkTopology) -> Naive {
    let b = GraphBundle::build(t);
    let pair = |p: &Pair| (p.lo(), p.hi());
    let reduced_edges = b
        .reduced
        .edges
        .iter()
        .map(|e| {
            let (x, y) = (b.sets[e.lo()].clone(), b.sets[e.hi()].clone());
            if x < y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    if let Bipartition::OddCycle(w) = &b.bipartition {
        assert!(w.len() % 2 == 1 && w.len() >= 3, "witness {w:?}");
        for i in 0..w.len() {
            let (x, y) = (w[i], w[(i + 1) % w.len()]);
            assert!(b.reduced.edges.contains(&Pair::new(x, y)));
        }
    }
    let h = half_dof_feasible(&b);
    assert_eq!(h.c1_ok, b.internal_conflicts.is_empty());
    assert_eq!(h.c2_ok, b.reduced_bipartite());
    Naive {
        alignment: b.alignment_edges.iter().map(pair).collect(),
        conflict: b.conflict_edges.iter().map(pair).collect(),
        sets: b.sets.iter().cloned().collect(),
        internal: b.internal_conflicts.iter().map(pair).collect(),
        reduced_vertices: b.reduced.vertices.iter().map(|&s| b.sets[s].clone()).collect(),
        reduced_edges,
        bipartite: b.reduced_bipartite(),
    }
}

/// Topology number `code` among all `2^(K(K-1))`: bit `(k-1)(K-1) + r` says
/// whether receiver `k` hears its `r`-th other transmitter.
pub fn decode(users: usize, code: u64) -> NetworkTopology {
    let lists: Vec<Vec<usize>> = (1..=users)
        .map(|k| {
            let others: Vec<usize> = (1..=users).filter(|&l| l != k).collect();
            others
                .iter()
                .enumerate()
                .filter(|(r, _)| code >> ((k - 1) * (users - 1) + r) & 1 == 1)
                .map(|(_, &l)| l)
                .collect()
        })
        .collect();
    let refs: Vec<&[usize]> = lists.iter().map(Vec::as_slice).collect();
    NetworkTopology::from_interferers(&refs).unwrap()
}

pub fn exhaustive_mismatches(max_users: usize) -> (u64, u64) {
    let mut checked = 0;
    let mut mismatches = 0;
    for users in 1..=max_users {
        let total = 1u64 << (users * (users - 1));
        mismatches += (0..total)
            .into_par_iter()
            .filter(|&code| {
                let t = decode(users, code);
                naive(&t) != from_module(&t)
            })
            .count() as u64;
        checked += total;
    }
    (checked, mismatches)
}

pub fn random_mismatches(count: u64, seed: u64) -> u64 {
    (0..count)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let users = 1 + (i % 8) as usize;
            let p = [0.1, 0.2, 0.3, 0.5][(i / 8 % 4) as usize];
            let t = NetworkTopology::random(users, p, &mut rng);
            naive(&t) != from_module(&t)
        })
        .count() as u64
}


/// Lengths of every simple alignment path between each ordered pair of messages.
fn all_path_lengths(b: &GraphBundle, set: &[usize]) -> BTreeMap<(usize, usize), BTreeSet<usize>> {
    fn dfs(
        b: &GraphBundle,
        set: &[usize],
        path: &mut Vec<usize>,
        out: &mut BTreeMap<(usize, usize), BTreeSet<usize>>,
    ) {
        let (start, last) = (path[0], *path.last().unwrap());
        out.entry((start, last)).or_default().insert(path.len() - 1);
        for &next in set {
            if !path.contains(&next) && b.alignment_edges.contains(&Pair::new(last, next)) {
                path.push(next);
                dfs(b, set, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    for &s in set {
        dfs(b, set, &mut vec![s], &mut out);
    }
    out
}

/// Per-set cost of entering at `entry` and leaving at `exit`.
fn set_cost(paths: &BTreeMap<(usize, usize), BTreeSet<usize>>, entry: usize, exit: usize) -> usize {
    if entry == exit {
        1
    } else {
        *paths[&(entry, exit)].iter().next().unwrap()
    }
}

/// Minimum of `m + 2 l_sigma` over every completed cycle, by recursion over
/// set cycles, conflict-edge choices and simple intra-set paths.
pub fn brute_force_objective(b: &GraphBundle) -> Option<usize> {
    let verts = b.reduced.vertices.clone();
    let paths: BTreeMap<usize, _> = verts.iter().map(|&s| (s, all_path_lengths(b, &b.sets[s]))).collect();
    let adjacent = |x: usize, y: usize| b.reduced.edges.contains(&Pair::new(x, y));
    let mut best: Option<usize> = None;

    // every sequence of distinct sets closing into an odd cycle, any rotation or direction
    fn extend(seq: &mut Vec<usize>, verts: &[usize], adjacent: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<usize>>) {
        if seq.len() >= 3 && seq.len() % 2 == 1 && adjacent(*seq.last().unwrap(), seq[0]) {
            out.push(seq.clone());
        }
        for &v in verts {
            if !seq.contains(&v) && adjacent(*seq.last().unwrap(), v) {
                seq.push(v);
                extend(seq, verts, adjacent, out);
                seq.pop();
            }
        }
    }
    let mut cycles = Vec::new();
    for &v in &verts {
        extend(&mut vec![v], &verts, &adjacent, &mut cycles);
    }

    for cyc in &cycles {
        let m = cyc.len();
        // choice j: conflict edge (exit_j in set j, entry_{j+1} in set j+1)
        let options: Vec<Vec<(usize, usize)>> = (0..m)
            .map(|j| {
                let (a, c) = (&b.sets[cyc[j]], &b.sets[cyc[(j + 1) % m]]);
                let mut v = Vec::new();
                for &x in a {
                    for &y in c {
                        if b.conflict_edges.contains(&Pair::new(x, y)) {
                            v.push((x, y));
                        }
                    }
                }
                v
            })
            .collect();
        let mut chosen = Vec::with_capacity(m);
        recurse(cyc, &options, &paths, &mut chosen, &mut best);
    }
    best
}

fn recurse(
    cyc: &[usize],
    options: &[Vec<(usize, usize)>],
    paths: &BTreeMap<usize, BTreeMap<(usize, usize), BTreeSet<usize>>>,
    chosen: &mut Vec<(usize, usize)>,
    best: &mut Option<usize>,
) {
    let m = cyc.len();
    if chosen.len() == m {
        let mut total = m;
        for j in 0..m {
            let entry = chosen[(j + m - 1) % m].1;
            let exit = chosen[j].0;
            total += 2 * set_cost(&paths[&cyc[j]], entry, exit);
        }
        if best.is_none_or(|b| total < b) {
            *best = Some(total);
        }
        return;
    }
    for &e in &options[chosen.len()] {
        chosen.push(e);
        recurse(cyc, options, paths, chosen, best);
        chosen.pop();
    }
}

/// Random topologies whose reduced graph is not bipartite, cycling through
/// reduced-graph sizes `3..=max_vertices` so each size is represented.
pub fn random_odd_instances(count: usize, max_vertices: usize, seed: u64) -> Vec<NetworkTopology> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let want = 3 + out.len() % (max_vertices - 2);
        let users = rng.random_range(2 * want..=2 * want + 4);
        let p = rng.random_range(0.05..0.3);
        let t = NetworkTopology::random(users, p, &mut rng);
        let b = GraphBundle::build(&t);
        if !b.reduced_bipartite() && b.reduced.vertices.len() == want {
            out.push(t);
        }
    }
    out
}
