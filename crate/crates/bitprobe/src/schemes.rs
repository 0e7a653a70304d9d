//! Scheme construction, the two Hall-matching encoders, query evaluation,
//! the two-probe grid scheme for singletons, and whole-scheme verification.
//!
//! The non-adaptive encoder pads the stored set to size exactly n, collects
//! the potential false positives T_{S'} (outsiders whose neighborhood meets
//! Γ(S') in a majority of blocks), assigns each element of S' ∪ T_{S'} a
//! private (t+1)/2-set of locations by Hall matching, and writes 1s only into
//! the sets owned by actual members.
//!
//! The adaptive encoder writes 1s across Γ_{G1}(S), then forces each decision
//! tree of S ∪ survivors⁺(S) to its correct answer using a private β-set of
//! controlled tree nodes; everything else stays 0, which silently answers No
//! for the remaining survivors.

use crate::probegraph::{
    binomial, check_expansion, for_each_combination, hall_disjoint_representatives,
    survivors_plus, AdaptiveProbeGraph, ExpansionOutcome, GraphError, HallOutcome,
    NonAdaptiveProbeGraph,
};
use crate::derive_seed;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("set has {got} elements but the scheme stores at most {max}")]
    SetTooLarge { got: usize, max: usize },
    #[error("element {0} out of universe range")]
    ElementOutOfRange(usize),
    #[error("memory length {got}, scheme expects {want}")]
    MemoryLengthMismatch { got: usize, want: usize },
    #[error("Hall matching infeasible; violating elements {violators:?}")]
    MatchingInfeasible { violators: Vec<usize> },
    #[error("majority schemes need odd t, got {0}")]
    EvenProbeCount(usize),
    #[error("retries exhausted after {attempts} attempts")]
    RetriesExhausted { attempts: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One stored set's bit array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    pub bits: Vec<bool>,
}

impl Memory {
    pub fn zeros(len: usize) -> Self {
        Memory { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Truth table of a query function on `arity` bits (arity ≤ 6).
/// Bit i of `bits` holds the output for the input whose big-endian encoding
/// is i (first probe = most significant bit), matching the 3-variable
/// convention 4x+2y+z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryTable {
    pub arity: usize,
    pub bits: u64,
}

impl QueryTable {
    pub fn new(arity: usize, bits: u64) -> Self {
        assert!(arity <= 6);
        assert!(arity == 6 || bits < (1u64 << (1u64 << arity)));
        QueryTable { arity, bits }
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        assert_eq!(inputs.len(), self.arity);
        let mut idx = 0usize;
        for &b in inputs {
            idx = (idx << 1) | b as usize;
        }
        (self.bits >> idx) & 1 == 1
    }

    pub fn majority(t: usize) -> Self {
        assert!(t % 2 == 1, "majority needs odd arity");
        let mut bits = 0u64;
        for idx in 0..(1u64 << t) {
            if (idx.count_ones() as usize) * 2 > t {
                bits |= 1 << idx;
            }
        }
        QueryTable { arity: t, bits }
    }

    pub fn and(t: usize) -> Self {
        QueryTable { arity: t, bits: 1 << ((1u64 << t) - 1) }
    }

    pub fn identity1() -> Self {
        QueryTable { arity: 1, bits: 0b10 }
    }

    /// Hex serialization, most significant nibble first; 2^arity bits wide
    /// (one digit minimum).
    pub fn to_hex(&self) -> String {
        let digits = ((1usize << self.arity) + 3) / 4;
        let mut s = String::new();
        for d in (0..digits).rev() {
            let nib = (self.bits >> (4 * d)) & 0xF;
            s.push(char::from_digit(nib as u32, 16).unwrap().to_ascii_uppercase());
        }
        s
    }

    pub fn from_hex(arity: usize, s: &str) -> Option<Self> {
        let digits = ((1usize << arity) + 3) / 4;
        if s.len() != digits {
            return None;
        }
        let bits = u64::from_str_radix(s, 16).ok()?;
        if arity < 6 && bits >= (1u64 << (1 << arity)) {
            return None;
        }
        Some(QueryTable { arity, bits })
    }
}

/// Which encoder a non-adaptive scheme uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonAdaptiveKind {
    /// Theorem-1 shape: majority query, Hall-matching encoder.
    Majority,
    /// √m grid for singleton sets: two probes, AND query.
    Grid,
    /// One private bit per element, identity query.
    CharVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonAdaptiveScheme {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub s: usize,
    pub graph: NonAdaptiveProbeGraph,
    pub query: QueryTable,
    pub kind: NonAdaptiveKind,
}

impl NonAdaptiveScheme {
    pub fn majority(graph: NonAdaptiveProbeGraph, n: usize) -> Result<Self, SchemeError> {
        if graph.t % 2 == 0 {
            return Err(SchemeError::EvenProbeCount(graph.t));
        }
        Ok(NonAdaptiveScheme {
            m: graph.m,
            n,
            t: graph.t,
            s: graph.s,
            query: QueryTable::majority(graph.t),
            graph,
            kind: NonAdaptiveKind::Majority,
        })
    }

    pub fn memory_len(&self) -> usize {
        self.t * self.s
    }

    /// T_S: elements outside S whose neighborhood meets Γ(S) in at least
    /// (t+1)/2 locations — the potential false positives of a majority read.
    pub fn potential_false_positives(&self, s_set: &[usize]) -> Vec<usize> {
        let gamma = self.graph.neighborhood(s_set);
        let in_s: BTreeSet<usize> = s_set.iter().copied().collect();
        let half = (self.t + 1) / 2;
        (0..self.m)
            .filter(|u| !in_s.contains(u))
            .filter(|&u| {
                self.graph
                    .element_locations(u)
                    .iter()
                    .filter(|l| gamma.contains(l))
                    .count()
                    >= half
            })
            .collect()
    }

    /// Pad to size exactly n with the largest-index non-members.
    fn padded(&self, s_set: &[usize]) -> Vec<usize> {
        let mut s: BTreeSet<usize> = s_set.iter().copied().collect();
        for u in (0..self.m).rev() {
            if s.len() >= self.n {
                break;
            }
            s.insert(u);
        }
        s.into_iter().collect()
    }

    pub fn encode(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        if s_set.len() > self.n {
            return Err(SchemeError::SetTooLarge { got: s_set.len(), max: self.n });
        }
        if let Some(&u) = s_set.iter().find(|&&u| u >= self.m) {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        match self.kind {
            NonAdaptiveKind::Majority => self.encode_majority(s_set),
            NonAdaptiveKind::Grid => self.encode_grid(s_set),
            NonAdaptiveKind::CharVector => {
                let mut mem = Memory::zeros(self.memory_len());
                for &u in s_set {
                    mem.bits[u] = true;
                }
                Ok(mem)
            }
        }
    }

    fn encode_majority(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        let padded = self.padded(s_set);
        let mut owners: Vec<usize> = padded.clone();
        owners.extend(self.potential_false_positives(&padded));
        owners.sort_unstable();
        let sets: BTreeMap<usize, BTreeSet<usize>> = owners
            .iter()
            .map(|&u| (u, self.graph.element_locations(u).into_iter().collect()))
            .collect();
        let half = (self.t + 1) / 2;
        let assign = match hall_disjoint_representatives(&sets, half) {
            HallOutcome::Feasible(a) => a,
            HallOutcome::Infeasible { violators } => {
                return Err(SchemeError::MatchingInfeasible { violators })
            }
        };
        let mut mem = Memory::zeros(self.memory_len());
        let members: BTreeSet<usize> = s_set.iter().copied().collect();
        for (&u, locs) in &assign {
            if members.contains(&u) {
                for &l in locs {
                    mem.bits[l] = true;
                }
            }
        }
        Ok(mem)
    }

    fn encode_grid(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        if s_set.len() > 1 {
            return Err(SchemeError::SetTooLarge { got: s_set.len(), max: 1 });
        }
        let mut mem = Memory::zeros(self.memory_len());
        if let Some(&u) = s_set.first() {
            for l in self.graph.element_locations(u) {
                mem.bits[l] = true;
            }
        }
        Ok(mem)
    }

    pub fn query(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
        Ok(self.query_traced(mem, u)?.0)
    }

    /// Query plus the exact list of locations read, for access-tracing tests.
    pub fn query_traced(&self, mem: &Memory, u: usize) -> Result<(bool, Vec<usize>), SchemeError> {
        if mem.len() != self.memory_len() {
            return Err(SchemeError::MemoryLengthMismatch {
                got: mem.len(),
                want: self.memory_len(),
            });
        }
        if u >= self.m {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        let locs = self.graph.element_locations(u);
        let reads: Vec<bool> = locs.iter().map(|&l| mem.bits[l]).collect();
        Ok((self.query.eval(&reads), locs))
    }
}

/// s = ⌈√m⌉ rows and columns; element u probes its row bit (block 1) and its
/// column bit (block 2), answering yes iff both are set. Space 2⌈√m⌉.
pub fn grid_scheme_n1(m: usize) -> NonAdaptiveScheme {
    assert!(m >= 1);
    let g = (m as f64).sqrt().ceil() as usize;
    let g = if g * g < m { g + 1 } else { g }; // guard against fp rounding
    let neighbor = (0..m).map(|u| vec![u / g, u % g]).collect();
    NonAdaptiveScheme {
        m,
        n: 1,
        t: 2,
        s: g,
        graph: NonAdaptiveProbeGraph::new(m, g, 2, neighbor),
        query: QueryTable::and(2),
        kind: NonAdaptiveKind::Grid,
    }
}

/// Trivial s=m, t=1 scheme storing one bit per element.
pub fn characteristic_vector_scheme(m: usize, n: usize) -> NonAdaptiveScheme {
    let neighbor = (0..m).map(|u| vec![u]).collect();
    NonAdaptiveScheme {
        m,
        n,
        t: 1,
        s: m,
        graph: NonAdaptiveProbeGraph::new(m, m, 1, neighbor),
        query: QueryTable::identity1(),
        kind: NonAdaptiveKind::CharVector,
    }
}

/// Report attached to a verified-admissible non-adaptive graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonAdaptiveAdmissibility {
    /// Expansion verified for all set sizes up to r_max.
    pub r_max: usize,
    /// Required expansion factor (t+1)/2.
    pub factor: usize,
    /// Bound on |T_S| demanded for every |S| = n.
    pub ts_bound: usize,
    /// Largest |T_S| observed.
    pub ts_max: usize,
    pub seed: u64,
    pub retries: usize,
}

/// (P1) range from the majority-scheme analysis: n + ⌈2n·lg(2m/n)⌉.
pub fn expansion_range(m: usize, n: usize) -> usize {
    let lg = (2.0 * m as f64 / n as f64).log2();
    n + (2.0 * n as f64 * lg).ceil() as usize
}

/// Exact admissibility check for a majority scheme's graph: (P1) expansion
/// by (t+1)/2 for all sets up to r_max, (P2) |T_S| ≤ ⌈2n·lg(2m/n)⌉ for all
/// |S| = n. `Ok(None)` means the graph failed a check (retry with another
/// seed); `Err` means the check itself could not be run within budget.
pub fn check_nonadaptive_admissible(
    sch: &NonAdaptiveScheme,
    budget: u64,
) -> Result<Option<NonAdaptiveAdmissibility>, GraphError> {
    let g = &sch.graph;
    let r_max = expansion_range(g.m, sch.n).min(g.m);
    let factor = (g.t + 1) / 2;
    match check_expansion(g, r_max, factor as u64, 1, budget)? {
        ExpansionOutcome::Pass => {}
        ExpansionOutcome::Counterexample(_) => return Ok(None),
    }
    let ts_bound = r_max - sch.n;
    let nsets = binomial(g.m as u64, sch.n as u64);
    if nsets > budget {
        return Err(GraphError::BudgetExceeded { needed: nsets, budget });
    }
    let mut ts_max = 0usize;
    let mut ok = true;
    for_each_combination(g.m, sch.n, &mut |s_set| {
        if !ok {
            return;
        }
        let ts = sch.potential_false_positives(s_set).len();
        ts_max = ts_max.max(ts);
        if ts > ts_bound {
            ok = false;
        }
    });
    if !ok {
        return Ok(None);
    }
    Ok(Some(NonAdaptiveAdmissibility {
        r_max,
        factor,
        ts_bound,
        ts_max,
        seed: 0,
        retries: 0,
    }))
}

/// Generate-and-verify loop for Theorem-1 schemes: draw random graphs until
/// one passes the exact admissibility checks.
pub fn build_admissible_nonadaptive(
    m: usize,
    n: usize,
    t: usize,
    s: usize,
    seed: u64,
    max_retries: usize,
    budget: u64,
) -> Result<(NonAdaptiveScheme, NonAdaptiveAdmissibility), SchemeError> {
    if t % 2 == 0 {
        return Err(SchemeError::EvenProbeCount(t));
    }
    for attempt in 0..max_retries {
        let g = NonAdaptiveProbeGraph::build_random(m, s, t, derive_seed(seed, attempt as u64));
        let sch = NonAdaptiveScheme::majority(g, n)?;
        if let Some(mut report) = check_nonadaptive_admissible(&sch, budget)? {
            report.seed = seed;
            report.retries = attempt;
            return Ok((sch, report));
        }
    }
    Err(SchemeError::RetriesExhausted { attempts: max_retries })
}

/// Adaptive scheme of the Theorem-2 shape: t1 non-adaptive AND-probes plus a
/// depth-t2 systematic decision tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveScheme {
    pub m: usize,
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    pub s: usize,
    pub g1: NonAdaptiveProbeGraph,
    pub g2: AdaptiveProbeGraph,
}

impl AdaptiveScheme {
    pub fn new(n: usize, g1: NonAdaptiveProbeGraph, g2: AdaptiveProbeGraph) -> Self {
        assert_eq!(g1.m, g2.m);
        assert_eq!(g1.s, g2.s);
        AdaptiveScheme { m: g1.m, n, t1: g1.t, t2: g2.t, s: g1.s, g1, g2 }
    }

    /// α = 2^{t2} − 1: nodes per decision tree.
    pub fn alpha(&self) -> usize {
        (1 << self.t2) - 1
    }

    /// β = 2^{t2} − t2: controlled nodes sufficient to force any answer.
    pub fn beta(&self) -> usize {
        (1 << self.t2) - self.t2
    }

    pub fn memory_len(&self) -> usize {
        self.t1 * self.s + self.alpha() * self.s
    }

    fn g2_offset(&self) -> usize {
        self.t1 * self.s
    }

    pub fn encode(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        if s_set.len() != self.n {
            return Err(SchemeError::SetTooLarge { got: s_set.len(), max: self.n });
        }
        if let Some(&u) = s_set.iter().find(|&&u| u >= self.m) {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        let mut mem = Memory::zeros(self.memory_len());
        for loc in self.g1.neighborhood(s_set) {
            mem.bits[loc] = true;
        }
        let mut owners: Vec<usize> = s_set.to_vec();
        owners.sort_unstable();
        owners.extend(survivors_plus(&self.g1, &self.g2, s_set));
        let sets: BTreeMap<usize, BTreeSet<usize>> = owners
            .iter()
            .map(|&u| {
                (u, self.g2.element_locations(u).into_iter().collect::<BTreeSet<_>>())
            })
            .collect();
        let assign = match hall_disjoint_representatives(&sets, self.beta()) {
            HallOutcome::Feasible(a) => a,
            HallOutcome::Infeasible { violators } => {
                return Err(SchemeError::MatchingInfeasible { violators })
            }
        };
        let members: BTreeSet<usize> = s_set.iter().copied().collect();
        let offset = self.g2_offset();
        for (&u, locs) in &assign {
            // nodes whose location landed in this element's private set
            let controlled: BTreeSet<usize> = (0..self.alpha())
                .filter(|&node| locs.contains(&self.g2.global(node, self.g2.neighbor[u][node])))
                .collect();
            let values = force_tree_output(self.t2, &controlled, members.contains(&u))
                .expect("β controlled nodes always suffice");
            for (node, v) in values {
                mem.bits[offset + self.g2.global(node, self.g2.neighbor[u][node])] = v;
            }
        }
        Ok(mem)
    }

    pub fn query(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
        Ok(self.query_traced(mem, u)?.0)
    }

    pub fn query_traced(&self, mem: &Memory, u: usize) -> Result<(bool, Vec<usize>), SchemeError> {
        if mem.len() != self.memory_len() {
            return Err(SchemeError::MemoryLengthMismatch {
                got: mem.len(),
                want: self.memory_len(),
            });
        }
        if u >= self.m {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        let mut trace = Vec::with_capacity(self.t1 + self.t2);
        let mut and_part = true;
        for i in 0..self.t1 {
            let loc = self.g1.global(i, self.g1.neighbor[u][i]);
            trace.push(loc);
            and_part &= mem.bits[loc];
        }
        let offset = self.g2_offset();
        let mut node = 0usize;
        let mut last = false;
        for _ in 0..self.t2 {
            let loc = offset + self.g2.global(node, self.g2.neighbor[u][node]);
            trace.push(loc);
            last = mem.bits[loc];
            node = 2 * node + 1 + last as usize;
        }
        Ok((and_part && last, trace))
    }

    /// Exact admissible-pair check at desk scale: for every |S| = n, every
    /// nonempty T ⊆ S ∪ survivors⁺(S) must satisfy |Γ_{G2}(T)| ≥ β·|T|
    /// (the Hall condition behind the encoder), with survivors⁺ enumerated
    /// exactly.
    pub fn check_admissible_pair(&self, budget: u64) -> Result<Option<PairReport>, GraphError> {
        let beta = self.beta() as u64;
        let nsets = binomial(self.m as u64, self.n as u64);
        if nsets > budget {
            return Err(GraphError::BudgetExceeded { needed: nsets, budget });
        }
        let mut max_surv = 0usize;
        let mut max_surv_plus = 0usize;
        let mut ok = true;
        let mut over: Option<GraphError> = None;
        for_each_combination(self.m, self.n, &mut |s_set| {
            if !ok || over.is_some() {
                return;
            }
            max_surv = max_surv.max(self.g1.survivors(s_set).len());
            let mut family: Vec<usize> = s_set.to_vec();
            family.extend(survivors_plus(&self.g1, &self.g2, s_set));
            family.sort_unstable();
            family.dedup();
            max_surv_plus = max_surv_plus.max(family.len() - s_set.len());
            if family.len() > 60 || (1u64 << family.len()) > budget {
                over = Some(GraphError::BudgetExceeded {
                    needed: 1u64.checked_shl(family.len() as u32).unwrap_or(u64::MAX),
                    budget,
                });
                return;
            }
            for mask in 1u64..(1 << family.len()) {
                let t_set: Vec<usize> = (0..family.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| family[i])
                    .collect();
                let gamma = self.g2.neighborhood(&t_set);
                if (gamma.len() as u64) < beta * t_set.len() as u64 {
                    ok = false;
                    return;
                }
            }
        });
        if let Some(e) = over {
            return Err(e);
        }
        if !ok {
            return Ok(None);
        }
        Ok(Some(PairReport { max_survivors: max_surv, max_survivors_plus: max_surv_plus, seed: 0, retries: 0 }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub max_survivors: usize,
    pub max_survivors_plus: usize,
    pub seed: u64,
    pub retries: usize,
}

/// Values for the controlled nodes of a depth-t2 systematic decision tree so
/// that the walk's last read bit is `b` for every completion of the
/// uncontrolled nodes. Nodes are heap-indexed. At a controlled internal node
/// the walk is steered toward the child subtree with fewer uncontrolled
/// nodes; at an uncontrolled internal node both subtrees are forced.
pub fn force_tree_output(
    t2: usize,
    controlled: &BTreeSet<usize>,
    b: bool,
) -> Option<Vec<(usize, bool)>> {
    fn uncontrolled_in(node: usize, depth: usize, t2: usize, controlled: &BTreeSet<usize>) -> usize {
        let mut count = !controlled.contains(&node) as usize;
        if depth + 1 < t2 {
            count += uncontrolled_in(2 * node + 1, depth + 1, t2, controlled);
            count += uncontrolled_in(2 * node + 2, depth + 1, t2, controlled);
        }
        count
    }
    fn force(
        node: usize,
        depth: usize,
        t2: usize,
        controlled: &BTreeSet<usize>,
        b: bool,
        out: &mut Vec<(usize, bool)>,
    ) -> bool {
        let is_leaf = depth == t2 - 1;
        if is_leaf {
            if controlled.contains(&node) {
                out.push((node, b));
                true
            } else {
                false
            }
        } else if controlled.contains(&node) {
            let u0 = uncontrolled_in(2 * node + 1, depth + 1, t2, controlled);
            let u1 = uncontrolled_in(2 * node + 2, depth + 1, t2, controlled);
            let go = u1 < u0; // steer to fewer uncontrolled; ties to child 0
            out.push((node, go));
            force(2 * node + 1 + go as usize, depth + 1, t2, controlled, b, out)
        } else {
            force(2 * node + 1, depth + 1, t2, controlled, b, out)
                && force(2 * node + 2, depth + 1, t2, controlled, b, out)
        }
    }
    let mut out = Vec::new();
    if force(0, 0, t2, controlled, b, &mut out) {
        Some(out)
    } else {
        None
    }
}

/// Theorem-2 probe split for odd t ≥ 3.
pub fn adaptive_split(t: usize) -> Option<(usize, usize)> {
    if t >= 3 && t % 2 == 1 {
        Some(((t - 3) / 2, (t + 3) / 2))
    } else {
        None
    }
}

/// Generate-and-verify loop for Theorem-2 pairs.
pub fn build_admissible_adaptive(
    m: usize,
    n: usize,
    t: usize,
    s: usize,
    seed: u64,
    max_retries: usize,
    budget: u64,
) -> Result<(AdaptiveScheme, PairReport), SchemeError> {
    let (t1, t2) = adaptive_split(t).ok_or(SchemeError::EvenProbeCount(t))?;
    for attempt in 0..max_retries {
        let sd = derive_seed(seed, attempt as u64);
        let g1 = NonAdaptiveProbeGraph::build_random(m, s, t1, sd);
        let g2 = AdaptiveProbeGraph::build_random(m, s, t2, derive_seed(sd, 1));
        let sch = AdaptiveScheme::new(n, g1, g2);
        if let Some(mut report) = sch.check_admissible_pair(budget)? {
            report.seed = seed;
            report.retries = attempt;
            return Ok((sch, report));
        }
    }
    Err(SchemeError::RetriesExhausted { attempts: max_retries })
}

/// Adaptive scheme over a padded universe: stores sets of size ≤ n from a
/// base universe of size m by padding with the n extra elements m..m+n of
/// the inner scheme's universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedAdaptiveScheme {
    pub base_m: usize,
    pub inner: AdaptiveScheme,
}

impl PaddedAdaptiveScheme {
    /// Inner scheme must cover universe base_m + n.
    pub fn new(base_m: usize, inner: AdaptiveScheme) -> Self {
        assert_eq!(inner.m, base_m + inner.n);
        PaddedAdaptiveScheme { base_m, inner }
    }

    pub fn encode(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        if s_set.len() > self.inner.n {
            return Err(SchemeError::SetTooLarge { got: s_set.len(), max: self.inner.n });
        }
        if let Some(&u) = s_set.iter().find(|&&u| u >= self.base_m) {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        let mut padded = s_set.to_vec();
        let mut next = self.base_m;
        while padded.len() < self.inner.n {
            padded.push(next);
            next += 1;
        }
        self.inner.encode(&padded)
    }

    pub fn query(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
        if u >= self.base_m {
            return Err(SchemeError::ElementOutOfRange(u));
        }
        self.inner.query(mem, u)
    }
}

/// Any scheme the verifier can drive.
pub trait MembershipScheme {
    fn universe(&self) -> usize;
    fn encode_set(&self, s_set: &[usize]) -> Result<Memory, SchemeError>;
    fn query_element(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError>;
}

impl MembershipScheme for NonAdaptiveScheme {
    fn universe(&self) -> usize {
        self.m
    }
    fn encode_set(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        self.encode(s_set)
    }
    fn query_element(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
        self.query(mem, u)
    }
}

impl MembershipScheme for PaddedAdaptiveScheme {
    fn universe(&self) -> usize {
        self.base_m
    }
    fn encode_set(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
        self.encode(s_set)
    }
    fn query_element(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
        self.query(mem, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Pass { sets_checked: u64 },
    /// First failing (S, u, got) in lexicographic order.
    Fail { s_set: Vec<usize>, u: usize, got: Result<bool, SchemeError> },
}

/// Exhaustive membership contract check: every set of size ≤ n_check must
/// encode, and all universe queries must return its indicator.
pub fn verify_scheme(
    sch: &dyn MembershipScheme,
    n_check: usize,
    budget: u64,
) -> Result<VerifyOutcome, GraphError> {
    let m = sch.universe();
    let mut needed = 0u64;
    for k in 0..=n_check.min(m) {
        needed = needed.saturating_add(binomial(m as u64, k as u64));
    }
    if needed > budget {
        return Err(GraphError::BudgetExceeded { needed, budget });
    }
    let mut fail: Option<(Vec<usize>, usize, Result<bool, SchemeError>)> = None;
    let mut checked = 0u64;
    for k in 0..=n_check.min(m) {
        for_each_combination(m, k, &mut |s_set| {
            if fail.is_some() {
                return;
            }
            checked += 1;
            let mem = match sch.encode_set(s_set) {
                Ok(mem) => mem,
                Err(e) => {
                    fail = Some((s_set.to_vec(), 0, Err(e)));
                    return;
                }
            };
            for u in 0..m {
                let want = s_set.contains(&u);
                match sch.query_element(&mem, u) {
                    Ok(got) if got == want => {}
                    other => {
                        fail = Some((s_set.to_vec(), u, other));
                        return;
                    }
                }
            }
        });
        if fail.is_some() {
            break;
        }
    }
    Ok(match fail {
        None => VerifyOutcome::Pass { sets_checked: checked },
        Some((s_set, u, got)) => VerifyOutcome::Fail { s_set, u, got },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_table_shape() {
        let q = QueryTable::majority(3);
        assert_eq!(q.bits, 0xE8);
        assert_eq!(q.to_hex(), "E8");
        assert!(q.eval(&[true, true, false]));
        assert!(!q.eval(&[true, false, false]));
        let q5 = QueryTable::majority(5);
        assert!(q5.eval(&[true, true, true, false, false]));
        assert!(!q5.eval(&[true, true, false, false, false]));
    }

    #[test]
    fn query_table_hex_round_trip() {
        for q in [QueryTable::majority(5), QueryTable::and(2), QueryTable::identity1()] {
            assert_eq!(QueryTable::from_hex(q.arity, &q.to_hex()), Some(q));
        }
        assert_eq!(QueryTable::and(2).to_hex(), "8");
    }

    #[test]
    fn even_t_rejected_for_majority() {
        let g = NonAdaptiveProbeGraph::build_random(4, 3, 4, 0);
        assert!(matches!(
            NonAdaptiveScheme::majority(g, 1),
            Err(SchemeError::EvenProbeCount(4))
        ));
    }

    #[test]
    fn empty_set_encodes_all_zero() {
        let (sch, _) = build_admissible_nonadaptive(8, 1, 3, 12, 5, 200, 1 << 20).unwrap();
        let mem = sch.encode(&[]).unwrap();
        // the padded singleton's owner set stays 0; memory is all-zero
        assert!(mem.ones().is_empty());
        for u in 0..8 {
            assert!(!sch.query(&mem, u).unwrap());
        }
    }

    #[test]
    fn all_one_memory_answers_yes_under_majority() {
        let g = NonAdaptiveProbeGraph::build_random(6, 4, 5, 3);
        let sch = NonAdaptiveScheme::majority(g, 1).unwrap();
        let mem = Memory { bits: vec![true; sch.memory_len()] };
        for u in 0..6 {
            assert!(sch.query(&mem, u).unwrap());
        }
    }

    #[test]
    fn access_trace_reads_exactly_declared_locations() {
        let g = NonAdaptiveProbeGraph::build_random(6, 4, 5, 3);
        let sch = NonAdaptiveScheme::majority(g.clone(), 1).unwrap();
        let mem = Memory::zeros(sch.memory_len());
        for u in 0..6 {
            let (_, trace) = sch.query_traced(&mem, u).unwrap();
            assert_eq!(trace, g.element_locations(u));
        }
    }

    #[test]
    fn theorem1_encode_round_trip_small() {
        let (sch, report) =
            build_admissible_nonadaptive(12, 1, 5, 20, 7, 1000, 1 << 20).unwrap();
        assert!(report.ts_max <= report.ts_bound);
        let mem = sch.encode(&[3]).unwrap();
        for u in 0..12 {
            assert_eq!(sch.query(&mem, u).unwrap(), u == 3, "element {u}");
        }
        // ones only inside Γ(S') ∪ owner sets
        let gamma = sch.graph.neighborhood(&[3]);
        for one in mem.ones() {
            assert!(gamma.contains(&one));
        }
    }

    #[test]
    fn duplicate_rows_are_rejected_or_infeasible() {
        // two indistinguishable elements cannot be separated
        let mut neighbor: Vec<Vec<usize>> = (0..4).map(|u| vec![u % 3; 3]).collect();
        neighbor[1] = neighbor[0].clone();
        let g = NonAdaptiveProbeGraph::new(4, 3, 3, neighbor);
        let sch = NonAdaptiveScheme::majority(g, 1).unwrap();
        assert_eq!(check_nonadaptive_admissible(&sch, 1 << 16).unwrap(), None);
        let mem = sch.encode(&[0]);
        match mem {
            Err(SchemeError::MatchingInfeasible { .. }) => {}
            Ok(mem) => {
                // if matching got lucky, the duplicate must read the same
                assert_eq!(sch.query(&mem, 0).unwrap(), sch.query(&mem, 1).unwrap());
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn grid_scheme_shape_and_scan() {
        let sch = grid_scheme_n1(9);
        assert_eq!(sch.s, 3);
        assert_eq!(sch.memory_len(), 6);
        let mem = sch.encode(&[5]).unwrap();
        for u in 0..9 {
            assert_eq!(sch.query(&mem, u).unwrap(), u == 5);
        }
        assert!(sch.encode(&[]).unwrap().ones().is_empty());
        assert!(matches!(sch.encode(&[0, 1]), Err(SchemeError::SetTooLarge { .. })));
        assert_eq!(grid_scheme_n1(1).memory_len(), 2);
    }

    #[test]
    fn force_tree_output_exhaustive() {
        for t2 in [2usize, 3] {
            let alpha = (1 << t2) - 1;
            let beta = (1 << t2) - t2;
            for_each_combination(alpha, beta, &mut |ctrl| {
                let controlled: BTreeSet<usize> = ctrl.iter().copied().collect();
                for b in [false, true] {
                    let values = force_tree_output(t2, &controlled, b)
                        .unwrap_or_else(|| panic!("unforceable {controlled:?} b={b}"));
                    // adversary fills every uncontrolled node both ways
                    let uncontrolled: Vec<usize> =
                        (0..alpha).filter(|n| !controlled.contains(n)).collect();
                    for adv in 0..(1u32 << uncontrolled.len()) {
                        let mut node_val = vec![false; alpha];
                        for (node, v) in &values {
                            node_val[*node] = *v;
                        }
                        for (i, &n) in uncontrolled.iter().enumerate() {
                            node_val[n] = adv >> i & 1 == 1;
                        }
                        let mut node = 0usize;
                        let mut last = false;
                        for _ in 0..t2 {
                            last = node_val[node];
                            node = 2 * node + 1 + last as usize;
                        }
                        assert_eq!(last, b);
                    }
                }
            });
        }
    }

    #[test]
    fn force_tree_t2_1() {
        let values = force_tree_output(1, &BTreeSet::from([0]), true).unwrap();
        assert_eq!(values, vec![(0, true)]);
    }

    #[test]
    fn force_tree_steers_around_uncontrolled() {
        // t2=2, controlled {root, left leaf}: root steers left
        let values = force_tree_output(2, &BTreeSet::from([0, 1]), true).unwrap();
        assert!(values.contains(&(0, false)));
        assert!(values.contains(&(1, true)));
    }

    #[test]
    fn adaptive_t3_round_trip() {
        let (t1, t2) = adaptive_split(3).unwrap();
        assert_eq!((t1, t2), (0, 3));
        let (sch, _) = build_admissible_adaptive(6, 1, 3, 10, 11, 500, 1 << 20).unwrap();
        for target in 0..6 {
            let mem = sch.encode(&[target]).unwrap();
            for u in 0..6 {
                assert_eq!(sch.query(&mem, u).unwrap(), u == target, "S={{{target}}} u={u}");
            }
        }
    }

    #[test]
    fn adaptive_trace_length() {
        let (sch, _) = build_admissible_adaptive(5, 1, 3, 10, 2, 500, 1 << 20).unwrap();
        let mem = sch.encode(&[2]).unwrap();
        let (_, trace) = sch.query_traced(&mem, 0).unwrap();
        assert_eq!(trace.len(), sch.t1 + sch.t2);
    }

    #[test]
    fn all_zero_adaptive_memory_answers_no() {
        let g1 = NonAdaptiveProbeGraph::build_random(5, 4, 1, 0);
        let g2 = AdaptiveProbeGraph::build_random(5, 4, 2, 1);
        let sch = AdaptiveScheme::new(1, g1, g2);
        let mem = Memory::zeros(sch.memory_len());
        for u in 0..5 {
            assert!(!sch.query(&mem, u).unwrap());
        }
    }

    #[test]
    fn padded_adaptive_handles_small_sets() {
        let (inner, _) = build_admissible_adaptive(7, 1, 3, 10, 13, 500, 1 << 20).unwrap();
        let sch = PaddedAdaptiveScheme::new(6, inner);
        let mem = sch.encode(&[]).unwrap();
        for u in 0..6 {
            assert!(!sch.query(&mem, u).unwrap());
        }
        let mem = sch.encode(&[4]).unwrap();
        for u in 0..6 {
            assert_eq!(sch.query(&mem, u).unwrap(), u == 4);
        }
    }

    #[test]
    fn verify_char_vector_scheme() {
        let sch = characteristic_vector_scheme(6, 3);
        match verify_scheme(&sch, 3, 1 << 20).unwrap() {
            VerifyOutcome::Pass { sets_checked } => {
                assert_eq!(sets_checked, 1 + 6 + 15 + 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verify_grid_16() {
        let sch = grid_scheme_n1(16);
        assert!(matches!(
            verify_scheme(&sch, 1, 1 << 20).unwrap(),
            VerifyOutcome::Pass { sets_checked: 17 }
        ));
    }

    #[test]
    fn verify_reports_first_failure() {
        // grid scheme with a sabotaged query table: AND → OR makes false
        // positives
        let mut sch = grid_scheme_n1(4);
        sch.query = QueryTable::new(2, 0b1110);
        match verify_scheme(&sch, 1, 1 << 20).unwrap() {
            VerifyOutcome::Fail { s_set, u, got } => {
                assert_eq!(s_set, vec![0]);
                assert_eq!(u, 1);
                assert_eq!(got, Ok(true));
            }
            other => panic!("{other:?}"),
        }
    }
}
