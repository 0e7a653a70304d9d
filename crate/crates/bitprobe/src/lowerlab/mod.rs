//! Executable lower-bound machinery for 3-probe non-adaptive schemes.
//!
//! The ground truth here is brute force: `satisfy` enumerates memories,
//! `search` enumerates canonical probe maps. On top of that sit the witness
//! finders — cycle-forcing for majority, density and dimension certificates
//! for the other hard classes, and a counting certificate for the degree
//! classes — each of which emits a `Witness` that `check_witness` can
//! confirm independently.

mod check;
mod density;
mod dependency;
mod modelgraph;
mod satisfy;
mod search;

pub use check::{check_witness, CheckOutcome};
pub use density::{density_witness, DensityDetail};
pub use dependency::dependency_witness;
pub use modelgraph::{build_model_graph, detect_forced, DetectOutcome, ModelEdge, ModelGraph};
pub use satisfy::{
    propagate_constraints, satisfiable_for_constraints, satisfiable_for_set, PropagationOutcome,
    SatOutcome,
};
pub use search::{
    min_space_search_three_arrays, min_space_search_tuples, satisfiable_tuple_map, TupleProbeMap,
};

use crate::probegraph::{Cycle, LabeledBipartiteGraph};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerLabError {
    #[error("memory has {bits} bits, enumeration limit is {limit}")]
    EnumerationOverBudget { bits: usize, limit: u32 },
    #[error("function strategy is {got}, operation needs {want}")]
    WrongStrategy { got: String, want: String },
    #[error("layout mismatch: operation needs {0}")]
    WrongLayout(&'static str),
}

/// Memory layout of a 3-probe map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One array of s bits; x(u), y(u), z(u) are distinct locations in it.
    SingleArray,
    /// Three disjoint arrays A, B, C of s bits each; x probes A, y probes B,
    /// z probes C.
    ThreeArrays,
}

/// Non-adaptive 3-probe map: which locations each element reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeMap3 {
    pub m: usize,
    pub s: usize,
    pub layout: Layout,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

impl ProbeMap3 {
    pub fn new(
        m: usize,
        s: usize,
        layout: Layout,
        x: Vec<usize>,
        y: Vec<usize>,
        z: Vec<usize>,
    ) -> Self {
        assert!(x.len() == m && y.len() == m && z.len() == m);
        for u in 0..m {
            assert!(x[u] < s && y[u] < s && z[u] < s);
            if layout == Layout::SingleArray {
                assert!(
                    x[u] != y[u] && y[u] != z[u] && x[u] != z[u],
                    "single-array probes must be distinct (element {u})"
                );
            }
        }
        ProbeMap3 { m, s, layout, x, y, z }
    }

    /// Total memory bits: s or 3s depending on layout.
    pub fn total_bits(&self) -> usize {
        match self.layout {
            Layout::SingleArray => self.s,
            Layout::ThreeArrays => 3 * self.s,
        }
    }

    /// Flat variable indices of the three probes of element u
    /// (three-array layout: A at 0..s, B at s..2s, C at 2s..3s).
    pub fn vars_of(&self, u: usize) -> [usize; 3] {
        match self.layout {
            Layout::SingleArray => [self.x[u], self.y[u], self.z[u]],
            Layout::ThreeArrays => [self.x[u], self.s + self.y[u], 2 * self.s + self.z[u]],
        }
    }

    /// Reorder the coordinate roles: new coordinate j reads what old
    /// coordinate perm[j] read. Only meaningful for the three-array layout,
    /// where the arrays are interchangeable.
    pub fn permute_coords(&self, perm: [usize; 3]) -> ProbeMap3 {
        assert_eq!(self.layout, Layout::ThreeArrays);
        let old = [&self.x, &self.y, &self.z];
        ProbeMap3 {
            m: self.m,
            s: self.s,
            layout: self.layout,
            x: old[perm[0]].clone(),
            y: old[perm[1]].clone(),
            z: old[perm[2]].clone(),
        }
    }

    /// The bipartite graph on arrays A and B with one edge {x(u), y(u)} per
    /// element of `elements`, labeled by the element.
    pub fn graph_ab(&self, elements: &[usize]) -> LabeledBipartiteGraph {
        LabeledBipartiteGraph::new(
            self.s,
            self.s,
            elements.iter().map(|&u| (self.x[u], self.y[u], u)).collect(),
        )
    }

    /// Same on arrays B and C ({y(u), z(u)}).
    pub fn graph_bc(&self, elements: &[usize]) -> LabeledBipartiteGraph {
        LabeledBipartiteGraph::new(
            self.s,
            self.s,
            elements.iter().map(|&u| (self.y[u], self.z[u], u)).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    ForcedP1,
    ForcedP2,
    ForcedP3,
    Density,
    Dependency,
    Rank,
}

impl std::fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WitnessKind::ForcedP1 => "FORCED_P1",
            WitnessKind::ForcedP2 => "FORCED_P2",
            WitnessKind::ForcedP3 => "FORCED_P3",
            WitnessKind::Density => "DENSITY",
            WitnessKind::Dependency => "DEPENDENCY",
            WitnessKind::Rank => "RANK",
        };
        f.write_str(s)
    }
}

/// Kind-specific payload carried for replay/diagnosis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessPayload {
    /// Cycles backing a forced configuration (in emission order).
    Cycles(Vec<Cycle>),
    /// Human-readable structural data from a density finder.
    Density(DensityDetail),
    /// Linear dependency vector(u) = Σ αᵢ·vector(vᵢ): the coefficients as
    /// exact strings ("1", "-2/3", ...), aligned with S-elements in order.
    Dependency { field: &'static str, coefficients: Vec<(usize, String)> },
    /// Counting certificate: C(m,n) stored sets need more independent
    /// polynomials than degree-2n multilinear space over 3s variables holds.
    Rank { m: usize, n: usize, s: usize, lhs: u128, rhs: u128 },
}

/// A machine-checkable unsatisfiability certificate: no memory can answer
/// Yes on all of S0 and No on all of S1 (for RANK: no valid scheme exists
/// at all, and S0/S1 are empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub s0: Vec<usize>,
    pub s1: Vec<usize>,
    pub payload: WitnessPayload,
}

impl Witness {
    pub fn new(kind: WitnessKind, mut s0: Vec<usize>, mut s1: Vec<usize>, payload: WitnessPayload) -> Self {
        s0.sort_unstable();
        s0.dedup();
        s1.sort_unstable();
        s1.dedup();
        debug_assert!(s0.iter().all(|u| !s1.contains(u)), "S0 and S1 must be disjoint");
        Witness { kind, s0, s1, payload }
    }
}
