//! Probe graphs between universe elements and memory locations.
//!
//! Three graph shapes live here: the non-adaptive block graph (one neighbor
//! per element per block), the adaptive tree graph (one neighbor per element
//! per tree node), and a general labeled multigraph used by the lower-bound
//! machinery for short-cycle search. The generalized Hall matching that both
//! encoders rely on (disjoint representative sets via element replication)
//! is also here.
//!
//! All indices are 0-based internally; file formats are 1-based.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("enumeration budget exceeded: needed {needed} > budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
}

/// Non-adaptive probe graph: `t` blocks of `s` locations; every element has
/// exactly one neighbor in each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonAdaptiveProbeGraph {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    /// neighbor[u][i] ∈ 0..s — location of element u in block i
    pub neighbor: Vec<Vec<usize>>,
}

impl NonAdaptiveProbeGraph {
    pub fn new(m: usize, s: usize, t: usize, neighbor: Vec<Vec<usize>>) -> Self {
        assert_eq!(neighbor.len(), m);
        for row in &neighbor {
            assert_eq!(row.len(), t);
            assert!(row.iter().all(|&l| l < s));
        }
        NonAdaptiveProbeGraph { m, s, t, neighbor }
    }

    pub fn build_random(m: usize, s: usize, t: usize, seed: u64) -> Self {
        assert!(m >= 1 && s >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let neighbor = (0..m)
            .map(|_| (0..t).map(|_| rng.gen_range(0..s)).collect())
            .collect();
        NonAdaptiveProbeGraph { m, s, t, neighbor }
    }

    /// Global index of a (block, location) pair in the flat t·s memory.
    pub fn global(&self, block: usize, loc: usize) -> usize {
        block * self.s + loc
    }

    /// All t global locations probed by element u.
    pub fn element_locations(&self, u: usize) -> Vec<usize> {
        (0..self.t).map(|i| self.global(i, self.neighbor[u][i])).collect()
    }

    /// Γ(R): union of probed locations over the set, as global indices.
    pub fn neighborhood(&self, r: &[usize]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &u in r {
            out.extend(self.element_locations(u));
        }
        out
    }

    /// Elements outside S whose whole neighborhood lies inside Γ(S).
    pub fn survivors(&self, s_set: &[usize]) -> Vec<usize> {
        let gamma = self.neighborhood(s_set);
        let in_s: BTreeSet<usize> = s_set.iter().copied().collect();
        (0..self.m)
            .filter(|u| !in_s.contains(u))
            .filter(|&u| self.element_locations(u).iter().all(|l| gamma.contains(l)))
            .collect()
    }
}

/// Outcome of an exact expansion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpansionOutcome {
    Pass,
    /// Smallest violating set (ties: lexicographically least).
    Counterexample(Vec<usize>),
}

/// Exact check of |Γ(R)| ≥ (num/den)·|R| for every nonempty R with
/// |R| ≤ r_max. Enumerates subsets smallest-first; the budget bounds the
/// number of subsets visited.
pub fn check_expansion(
    g: &NonAdaptiveProbeGraph,
    r_max: usize,
    factor_num: u64,
    factor_den: u64,
    budget: u64,
) -> Result<ExpansionOutcome, GraphError> {
    let r_max = r_max.min(g.m);
    let mut needed: u64 = 0;
    for k in 1..=r_max {
        needed = needed.saturating_add(binomial(g.m as u64, k as u64));
    }
    if needed > budget {
        return Err(GraphError::BudgetExceeded { needed, budget });
    }
    for k in 1..=r_max {
        let mut found: Option<Vec<usize>> = None;
        for_each_combination(g.m, k, &mut |r| {
            if found.is_some() {
                return;
            }
            let gamma = g.neighborhood(r);
            if (gamma.len() as u64) * factor_den < factor_num * (r.len() as u64) {
                found = Some(r.to_vec());
            }
        });
        if let Some(r) = found {
            return Ok(ExpansionOutcome::Counterexample(r));
        }
    }
    Ok(ExpansionOutcome::Pass)
}

/// C(n, k) in u128, saturating.
pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * ((n - i) as u128) / ((i + 1) as u128);
        if out > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    out as u64
}

/// Visit all k-subsets of 0..n in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let remaining = k - cur.len();
        for v in start..=(n - remaining) {
            cur.push(v);
            rec(n, k, v + 1, cur, f);
            cur.pop();
        }
    }
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    rec(n, k, 0, &mut Vec::new(), f);
}

/// Adaptive probe graph: one block per binary string of length < t, laid out
/// in heap order (root 0, children 2i+1 / 2i+2). Blocks at depth t−1 are the
/// leaves; the last bit of the t-step walk is read there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveProbeGraph {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    /// neighbor[u][node] ∈ 0..s, for the 2^t − 1 heap nodes
    pub neighbor: Vec<Vec<usize>>,
}

impl AdaptiveProbeGraph {
    pub fn blocks(t: usize) -> usize {
        (1usize << t) - 1
    }

    pub fn new(m: usize, s: usize, t: usize, neighbor: Vec<Vec<usize>>) -> Self {
        assert_eq!(neighbor.len(), m);
        for row in &neighbor {
            assert_eq!(row.len(), Self::blocks(t));
            assert!(row.iter().all(|&l| l < s));
        }
        AdaptiveProbeGraph { m, s, t, neighbor }
    }

    pub fn build_random(m: usize, s: usize, t: usize, seed: u64) -> Self {
        assert!(m >= 1 && s >= 1 && t >= 1);
        let blocks = Self::blocks(t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let neighbor = (0..m)
            .map(|_| (0..blocks).map(|_| rng.gen_range(0..s)).collect())
            .collect();
        AdaptiveProbeGraph { m, s, t, neighbor }
    }

    pub fn global(&self, node: usize, loc: usize) -> usize {
        node * self.s + loc
    }

    /// Heap indices of the leaf-depth nodes.
    pub fn leaf_nodes(&self) -> std::ops::Range<usize> {
        ((1 << (self.t - 1)) - 1)..((1 << self.t) - 1)
    }

    /// Global leaf locations of one element.
    pub fn leaves(&self, u: usize) -> BTreeSet<usize> {
        self.leaf_nodes().map(|node| self.global(node, self.neighbor[u][node])).collect()
    }

    pub fn leaves_of_set(&self, set: &[usize]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &u in set {
            out.extend(self.leaves(u));
        }
        out
    }

    /// All 2^t − 1 global locations of one element.
    pub fn element_locations(&self, u: usize) -> Vec<usize> {
        (0..Self::blocks(self.t)).map(|node| self.global(node, self.neighbor[u][node])).collect()
    }

    pub fn neighborhood(&self, r: &[usize]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &u in r {
            out.extend(self.element_locations(u));
        }
        out
    }
}

/// survivors(S) of g1, filtered to those sharing a g2 leaf location with S.
pub fn survivors_plus(
    g1: &NonAdaptiveProbeGraph,
    g2: &AdaptiveProbeGraph,
    s_set: &[usize],
) -> Vec<usize> {
    let s_leaves = g2.leaves_of_set(s_set);
    g1.survivors(s_set)
        .into_iter()
        .filter(|&y| g2.leaves(y).iter().any(|l| s_leaves.contains(l)))
        .collect()
}

/// General labeled multigraph; parallel edges allowed, labels unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMultigraph {
    pub num_vertices: usize,
    /// (a, b, label); a ≠ b (no self loops)
    pub edges: Vec<(usize, usize, usize)>,
}

/// A simple cycle `v[0] -labels[0]- v[1] - ... -labels[k-1]- v[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rotate so the edge currently at `pos` comes first.
    pub fn rotated(&self, pos: usize) -> Cycle {
        let k = self.len();
        Cycle {
            vertices: (0..k).map(|i| self.vertices[(pos + i) % k]).collect(),
            labels: (0..k).map(|i| self.labels[(pos + i) % k]).collect(),
        }
    }

    /// Rotate/reflect so the given vertex comes first (kept orientation).
    pub fn rooted_at(&self, v: usize) -> Option<Cycle> {
        self.vertices.iter().position(|&x| x == v).map(|p| self.rotated(p))
    }
}

impl LabeledMultigraph {
    /// Shortest cycle of length ≤ max_len, if any. BFS from every vertex in
    /// ascending order, truncated at depth ⌈max_len/2⌉; ties broken by lowest
    /// start vertex, then lowest crossing edge label.
    pub fn find_short_cycle(&self, max_len: usize) -> Option<Cycle> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.num_vertices];
        for &(a, b, label) in &self.edges {
            assert_ne!(a, b, "self loops not supported");
            adj[a].push((b, label));
            adj[b].push((a, label));
        }
        for lst in &mut adj {
            lst.sort_by_key(|&(_, label)| label);
        }
        let depth_cap = max_len.div_ceil(2);
        let mut best: Option<(usize, usize, usize, Cycle)> = None; // (len, start, label, cycle)
        for start in 0..self.num_vertices {
            let mut dist = vec![usize::MAX; self.num_vertices];
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.num_vertices]; // (vertex, edge label)
            dist[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for &(b, label) in &adj[a] {
                    if dist[b] == usize::MAX {
                        if dist[a] < depth_cap {
                            dist[b] = dist[a] + 1;
                            parent[b] = Some((a, label));
                            queue.push_back(b);
                        }
                        continue;
                    }
                    // skip the tree edge seen from the child side
                    if parent[a].map(|(_, l)| l) == Some(label)
                        || parent[b].map(|(_, l)| l) == Some(label)
                    {
                        continue;
                    }
                    if let Some(cycle) = close_cycle(&dist, &parent, a, b, label) {
                        let len = cycle.len();
                        if len <= max_len {
                            let key = (len, start, label);
                            if best
                                .as_ref()
                                .map(|(l, s, lb, _)| key < (*l, *s, *lb))
                                .unwrap_or(true)
                            {
                                best = Some((len, start, label, cycle));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, _, _, c)| c)
    }
}

/// Build the simple cycle closed by cross edge (a,b,label) in a BFS tree.
fn close_cycle(
    dist: &[usize],
    parent: &[Option<(usize, usize)>],
    a: usize,
    b: usize,
    label: usize,
) -> Option<Cycle> {
    // walk both paths up to the lowest common ancestor
    let mut pa = vec![a];
    let mut pb = vec![b];
    let mut la = Vec::new();
    let mut lb = Vec::new();
    let (mut ca, mut cb) = (a, b);
    while dist[ca] > dist[cb] {
        let (p, l) = parent[ca].unwrap();
        la.push(l);
        ca = p;
        pa.push(ca);
    }
    while dist[cb] > dist[ca] {
        let (p, l) = parent[cb].unwrap();
        lb.push(l);
        cb = p;
        pb.push(cb);
    }
    while ca != cb {
        let (p, l) = parent[ca].unwrap();
        la.push(l);
        ca = p;
        pa.push(ca);
        let (p, l) = parent[cb].unwrap();
        lb.push(l);
        cb = p;
        pb.push(cb);
    }
    // degenerate: cross edge to an ancestor along its own tree path can't
    // happen (tree edges filtered), but a==b would be a self loop
    if pa.last() != pb.last() {
        return None;
    }
    // cycle: lca -> ... -> a -(label)- b -> ... -> lca
    let mut vertices: Vec<usize> = pa.iter().rev().copied().collect(); // lca..a
    let mut labels: Vec<usize> = la.iter().rev().copied().collect(); // edges lca->a
    labels.push(label);
    vertices.extend(pb[..pb.len() - 1].iter().rev()); // b..child-of-lca, excluding lca
    labels.extend(lb.iter().copied());
    // guard against non-simple cycles (shouldn't happen: paths diverge at lca)
    let uniq: BTreeSet<usize> = vertices.iter().copied().collect();
    if uniq.len() != vertices.len() {
        return None;
    }
    Some(Cycle { vertices, labels })
}

/// Labeled bipartite multigraph (left/right vertex classes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledBipartiteGraph {
    pub left_size: usize,
    pub right_size: usize,
    /// (left vertex, right vertex, label)
    pub edges: Vec<(usize, usize, usize)>,
}

impl LabeledBipartiteGraph {
    pub fn new(left_size: usize, right_size: usize, edges: Vec<(usize, usize, usize)>) -> Self {
        let mut labels = BTreeSet::new();
        for &(l, r, label) in &edges {
            assert!(l < left_size && r < right_size);
            assert!(labels.insert(label), "duplicate edge label {label}");
        }
        LabeledBipartiteGraph { left_size, right_size, edges }
    }

    pub fn to_multigraph(&self) -> LabeledMultigraph {
        LabeledMultigraph {
            num_vertices: self.left_size + self.right_size,
            edges: self
                .edges
                .iter()
                .map(|&(l, r, label)| (l, self.left_size + r, label))
                .collect(),
        }
    }

    /// Cycle of length ≤ max_len (always even here), vertices reported as
    /// (side, index) pairs flattened: left as-is, right offset by left_size.
    pub fn find_short_cycle(&self, max_len: usize) -> Option<Cycle> {
        self.to_multigraph().find_short_cycle(max_len)
    }

    /// Drop all vertices of degree < min_degree (and their edges), once.
    pub fn prune_low_degree(&self, min_degree: usize) -> LabeledBipartiteGraph {
        let mut ldeg = vec![0usize; self.left_size];
        let mut rdeg = vec![0usize; self.right_size];
        for &(l, r, _) in &self.edges {
            ldeg[l] += 1;
            rdeg[r] += 1;
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(l, r, _)| ldeg[l] >= min_degree && rdeg[r] >= min_degree)
            .collect();
        LabeledBipartiteGraph { left_size: self.left_size, right_size: self.right_size, edges }
    }
}

/// Result of the replicated-element Hall matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HallOutcome {
    /// Disjoint representative sets A_u, |A_u| = multiplicity.
    Feasible(BTreeMap<usize, BTreeSet<usize>>),
    /// Certificate: elements whose combined neighborhoods are too small for
    /// their combined multiplicity demand.
    Infeasible { violators: Vec<usize> },
}

/// Assign each element `multiplicity` private locations from its neighbor
/// set, all sets pairwise disjoint, via augmenting-path matching on the
/// graph with each element replicated `multiplicity` times.
pub fn hall_disjoint_representatives(
    neighbor_sets: &BTreeMap<usize, BTreeSet<usize>>,
    multiplicity: usize,
) -> HallOutcome {
    assert!(multiplicity >= 1);
    let elems: Vec<usize> = neighbor_sets.keys().copied().collect();
    let adj: Vec<Vec<usize>> = elems
        .iter()
        .map(|u| neighbor_sets[u].iter().copied().collect())
        .collect();
    let mut matched: BTreeMap<usize, usize> = BTreeMap::new(); // location -> element index

    fn augment(
        e: usize,
        adj: &[Vec<usize>],
        matched: &mut BTreeMap<usize, usize>,
        visited_locs: &mut BTreeSet<usize>,
        visited_elems: &mut BTreeSet<usize>,
    ) -> bool {
        visited_elems.insert(e);
        for &loc in &adj[e] {
            if !visited_locs.insert(loc) {
                continue;
            }
            let prev = matched.get(&loc).copied();
            let free = match prev {
                None => true,
                Some(p) => {
                    !visited_elems.contains(&p)
                        && augment(p, adj, matched, visited_locs, visited_elems)
                }
            };
            if free {
                matched.insert(loc, e);
                return true;
            }
        }
        false
    }

    for (i, _) in elems.iter().enumerate() {
        for _copy in 0..multiplicity {
            let mut visited_locs = BTreeSet::new();
            let mut visited_elems = BTreeSet::new();
            if !augment(i, &adj, &mut matched, &mut visited_locs, &mut visited_elems) {
                // Hall violator: every element reached in the failed search
                let violators = visited_elems.into_iter().map(|i| elems[i]).collect();
                return HallOutcome::Infeasible { violators };
            }
        }
    }
    let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (loc, i) in matched {
        out.entry(elems[i]).or_default().insert(loc);
    }
    // every element got exactly `multiplicity` copies matched
    for u in &elems {
        debug_assert_eq!(out.get(u).map(|s| s.len()), Some(multiplicity));
    }
    HallOutcome::Feasible(out)
}

/// Independent validator for Hall outputs (used by tests and the CLI).
pub fn validate_hall_assignment(
    neighbor_sets: &BTreeMap<usize, BTreeSet<usize>>,
    multiplicity: usize,
    assignment: &BTreeMap<usize, BTreeSet<usize>>,
) -> bool {
    if assignment.len() != neighbor_sets.len() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for (u, a) in assignment {
        let Some(nb) = neighbor_sets.get(u) else { return false };
        if a.len() != multiplicity || !a.is_subset(nb) {
            return false;
        }
        for &loc in a {
            if !seen.insert(loc) {
                return false;
            }
        }
    }
    true
}
