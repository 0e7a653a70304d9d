//! Three-variable boolean query functions and their equivalence classes under
//! input negation and permutation (a 48-element group; output negation is
//! deliberately excluded, so a function and its complement may land in
//! different classes).
//!
//! Bit-order convention, fixed project-wide: bit `4x + 2y + z` of the truth
//! table holds `f(x,y,z)`. Majority-of-three is `0xE8` under this convention.

use std::collections::BTreeSet;
use std::sync::OnceLock;

/// A 3-variable boolean function as an 8-bit truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryFunction3 {
    pub table: u8,
}

pub const MAJ: QueryFunction3 = QueryFunction3 { table: 0xE8 };
pub const PARITY: QueryFunction3 = QueryFunction3 { table: 0x96 };
pub const AND3: QueryFunction3 = QueryFunction3 { table: 0x80 };
pub const ALL_EQUAL: QueryFunction3 = QueryFunction3 { table: 0x81 };
/// (x⊕y)∧z
pub const XOR_AND: QueryFunction3 = QueryFunction3 { table: 0x28 };
/// (x∨y)∧z
pub const OR_AND: QueryFunction3 = QueryFunction3 { table: 0xA8 };
/// (x∧y∧z)∨(¬y∧¬z)
pub const AND_OR_NN: QueryFunction3 = QueryFunction3 { table: 0x91 };
/// x+y+z ≠ 1 (over the integers)
pub const SUM_NE_1: QueryFunction3 = QueryFunction3 { table: 0xE9 };
/// (x∧y)⊕z
pub const XY_XOR_Z: QueryFunction3 = QueryFunction3 { table: 0x6A };
/// x+y+z = 1 (over the integers)
pub const SUM_EQ_1: QueryFunction3 = QueryFunction3 { table: 0x16 };

impl QueryFunction3 {
    pub fn new(table: u8) -> Self {
        QueryFunction3 { table }
    }

    pub fn evaluate(&self, x: bool, y: bool, z: bool) -> bool {
        let idx = ((x as u8) << 2) | ((y as u8) << 1) | (z as u8);
        (self.table >> idx) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        QueryFunction3 { table: !self.table }
    }

    pub fn to_hex(&self) -> String {
        format!("{:02X}", self.table)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 2 {
            return None;
        }
        u8::from_str_radix(s, 16).ok().map(|t| QueryFunction3 { table: t })
    }

    /// All tables reachable by permuting and/or negating the three inputs.
    pub fn orbit(&self) -> BTreeSet<u8> {
        let mut out = BTreeSet::new();
        for perm in PERMS {
            for neg in 0..8u8 {
                out.insert(transform(self.table, perm, neg));
            }
        }
        out
    }
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Table of `g` where `g(v) = f(w)`, `w[j] = v[perm[j]] ^ neg[j]`.
fn transform(table: u8, perm: [usize; 3], neg: u8) -> u8 {
    let mut out = 0u8;
    for idx in 0..8u8 {
        // v[0]=x (bit 2), v[1]=y (bit 1), v[2]=z (bit 0)
        let v = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
        let mut w_idx = 0u8;
        for j in 0..3 {
            let bit = v[perm[j]] ^ ((neg >> j) & 1);
            w_idx |= bit << (2 - j);
        }
        if (table >> w_idx) & 1 == 1 {
            out |= 1 << idx;
        }
    }
    out
}

/// Find a transform `(perm, neg)` with `transform(from, perm, neg) == to`,
/// if the two tables are equivalent.
pub fn find_transform(from: u8, to: u8) -> Option<([usize; 3], u8)> {
    for perm in PERMS {
        for neg in 0..8u8 {
            if transform(from, perm, neg) == to {
                return Some((perm, neg));
            }
        }
    }
    None
}

/// Invert a 3-element permutation.
pub fn invert_perm(p: [usize; 3]) -> [usize; 3] {
    let mut q = [0usize; 3];
    for (j, &i) in p.iter().enumerate() {
        q[i] = j;
    }
    q
}

/// Lower-bound strategy attached to each equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Height2,
    MajorityModelGraph,
    Density,
    Dimension,
    Degree,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Strategy::Height2 => "HEIGHT2",
            Strategy::MajorityModelGraph => "MAJORITY_MODEL_GRAPH",
            Strategy::Density => "DENSITY",
            Strategy::Dimension => "DIMENSION",
            Strategy::Degree => "DEGREE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionClass {
    pub class_id: u8,
    pub canonical_table: u8,
    pub strategy: Strategy,
    pub class_size: u16,
}

struct ClassTable {
    /// class id for every table
    class_of: [u8; 256],
    classes: Vec<FunctionClass>,
}

fn strategy_for_canonical(canon: u8) -> Strategy {
    let canon_of = |t: u8| *QueryFunction3::new(t).orbit().iter().next().unwrap();
    // decision trees of height ≤ 2: constants, dictator, x∧y, ¬x∨¬y,
    // (x∧y)∨(¬x∧z), x=y
    let height2 = [0x00u8, 0xFF, 0xF0, 0xC0, 0x3F, 0xCA, 0xC3];
    if height2.iter().any(|&t| canon_of(t) == canon) {
        return Strategy::Height2;
    }
    if canon_of(MAJ.table) == canon {
        return Strategy::MajorityModelGraph;
    }
    let density = [
        AND3.table,
        !AND3.table,
        XOR_AND.table,
        !XOR_AND.table,
        OR_AND.table,
        !OR_AND.table,
        ALL_EQUAL.table,
        !ALL_EQUAL.table,
        AND_OR_NN.table,
        !AND_OR_NN.table,
    ];
    if density.iter().any(|&t| canon_of(t) == canon) {
        return Strategy::Density;
    }
    let dimension = [PARITY.table, SUM_NE_1.table];
    if dimension.iter().any(|&t| canon_of(t) == canon) {
        return Strategy::Dimension;
    }
    let degree = [XY_XOR_Z.table, SUM_EQ_1.table];
    if degree.iter().any(|&t| canon_of(t) == canon) {
        return Strategy::Degree;
    }
    unreachable!("table 0x{canon:02X} not covered by any strategy list");
}

fn class_table() -> &'static ClassTable {
    static TABLE: OnceLock<ClassTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut class_of = [u8::MAX; 256];
        let mut classes = Vec::new();
        for t in 0..=255u8 {
            if class_of[t as usize] != u8::MAX {
                continue;
            }
            let orbit = QueryFunction3::new(t).orbit();
            let canon = *orbit.iter().next().unwrap();
            debug_assert_eq!(canon, t, "iteration order should hit canonicals first");
            let id = classes.len() as u8;
            for &g in &orbit {
                class_of[g as usize] = id;
            }
            classes.push(FunctionClass {
                class_id: id,
                canonical_table: canon,
                strategy: strategy_for_canonical(canon),
                class_size: orbit.len() as u16,
            });
        }
        ClassTable { class_of, classes }
    })
}

pub fn classify(f: QueryFunction3) -> FunctionClass {
    let t = class_table();
    t.classes[t.class_of[f.table as usize] as usize]
}

/// The full classification, ordered by canonical table.
pub fn all_classes() -> Vec<FunctionClass> {
    class_table().classes.clone()
}

/// Minimum height over all adaptive decision trees computing `f`
/// (each root-to-leaf path reads each variable at most once).
pub fn decision_tree_height(f: QueryFunction3) -> u8 {
    fn rec(table: u8, fixed_mask: u8, fixed_vals: u8) -> u8 {
        let mut all0 = true;
        let mut all1 = true;
        for idx in 0..8u8 {
            if idx & fixed_mask == fixed_vals {
                if (table >> idx) & 1 == 1 {
                    all0 = false;
                } else {
                    all1 = false;
                }
            }
        }
        if all0 || all1 {
            return 0;
        }
        let mut best = u8::MAX;
        for bit in [4u8, 2, 1] {
            if fixed_mask & bit != 0 {
                continue;
            }
            let lo = rec(table, fixed_mask | bit, fixed_vals);
            let hi = rec(table, fixed_mask | bit, fixed_vals | bit);
            best = best.min(1 + lo.max(hi));
        }
        best
    }
    rec(f.table, 0, 0)
}
