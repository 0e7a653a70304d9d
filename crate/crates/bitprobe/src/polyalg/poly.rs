//! Multilinear polynomials with canonical term maps, the per-element
//! degree-2 factors for the two degree-argument classes, and the
//! independence/rank certificate built from a concrete scheme's memories.

use crate::lowerlab::{Layout, ProbeMap3};
use crate::probegraph::{binomial_u128, for_each_combination};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    F2,
    F3,
}

impl Field {
    pub fn characteristic(self) -> u8 {
        match self {
            Field::F2 => 2,
            Field::F3 => 3,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::F2 => "F2",
            Field::F3 => "F3",
        })
    }
}

/// A multilinear polynomial: every exponent is ≤ 1 (x² = x applied eagerly),
/// monomials are sorted variable-index sets, zero coefficients are never
/// stored. Variables are the 3s memory bits of a three-array probe map:
/// A-array first, then B, then C.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    pub field: Field,
    pub num_vars: usize,
    terms: BTreeMap<Vec<usize>, u8>,
}

impl MultilinearPoly {
    pub fn zero(field: Field, num_vars: usize) -> Self {
        MultilinearPoly { field, num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(field: Field, num_vars: usize, c: u8) -> Self {
        Self::from_terms(field, num_vars, [(Vec::new(), c)])
    }

    pub fn one(field: Field, num_vars: usize) -> Self {
        Self::constant(field, num_vars, 1)
    }

    pub fn var(field: Field, num_vars: usize, i: usize) -> Self {
        assert!(i < num_vars);
        Self::from_terms(field, num_vars, [(vec![i], 1)])
    }

    /// Build from raw (variable set, coefficient) pairs: sets are sorted and
    /// deduplicated (multilinearization), coefficients reduced mod the
    /// characteristic, zero terms dropped.
    pub fn from_terms(
        field: Field,
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, u8)>,
    ) -> Self {
        let mut out = MultilinearPoly::zero(field, num_vars);
        for (mut vars, coeff) in terms {
            vars.sort_unstable();
            vars.dedup();
            assert!(vars.iter().all(|&v| v < num_vars));
            out.add_term(vars, coeff);
        }
        out
    }

    fn add_term(&mut self, vars: Vec<usize>, coeff: u8) {
        use std::collections::btree_map::Entry;
        let p = self.field.characteristic();
        let c = coeff % p;
        if c == 0 {
            return;
        }
        match self.terms.entry(vars) {
            Entry::Occupied(mut e) => {
                let v = (*e.get() + c) % p;
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, u8> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &MultilinearPoly) -> MultilinearPoly {
        assert_eq!(self.field, other.field);
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = self.clone();
        for (vars, &c) in &other.terms {
            out.add_term(vars.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: u8) -> MultilinearPoly {
        let p = self.field.characteristic();
        MultilinearPoly::from_terms(
            self.field,
            self.num_vars,
            self.terms.iter().map(|(k, &v)| (k.clone(), v * (c % p) % p)),
        )
    }

    pub fn mul(&self, other: &MultilinearPoly) -> MultilinearPoly {
        assert_eq!(self.field, other.field);
        assert_eq!(self.num_vars, other.num_vars);
        let p = self.field.characteristic();
        let mut out = MultilinearPoly::zero(self.field, self.num_vars);
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                // union of sorted sets = product with x² = x collapse
                let mut vars: Vec<usize> = ka.iter().chain(kb.iter()).copied().collect();
                vars.sort_unstable();
                vars.dedup();
                out.add_term(vars, ca * cb % p);
            }
        }
        out
    }

    /// Evaluate on a 0/1 assignment to all variables.
    pub fn evaluate(&self, assignment: &[bool]) -> u8 {
        assert_eq!(assignment.len(), self.num_vars);
        let p = self.field.characteristic();
        let mut acc = 0u8;
        for (vars, &c) in &self.terms {
            if vars.iter().all(|&v| assignment[v]) {
                acc = (acc + c) % p;
            }
        }
        acc
    }

    fn var_name(&self, i: usize) -> String {
        if self.num_vars % 3 == 0 && self.num_vars > 0 {
            let s = self.num_vars / 3;
            match i / s {
                0 => format!("A{i}"),
                1 => format!("B{}", i - s),
                _ => format!("C{}", i - 2 * s),
            }
        } else {
            format!("v{i}")
        }
    }
}

impl std::fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: ", self.field)?;
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(vars, &c)| {
                if vars.is_empty() {
                    return c.to_string();
                }
                let mono =
                    vars.iter().map(|&v| self.var_name(v)).collect::<Vec<_>>().join("*");
                if c == 1 {
                    mono
                } else {
                    format!("{c}*{mono}")
                }
            })
            .collect();
        f.write_str(&rendered.join(" + "))
    }
}

/// The two query classes handled by the polynomial argument, with their
/// working fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyFunction {
    /// (x∧y)⊕z over F2: factor x·y + z.
    XyPlusZ,
    /// x+y+z=1 over F3: factor x+y+z+xy+yz+zx (the 0/1 indicator in F3).
    SumEq1,
}

impl PolyFunction {
    pub fn field(self) -> Field {
        match self {
            PolyFunction::XyPlusZ => Field::F2,
            PolyFunction::SumEq1 => Field::F3,
        }
    }
}

/// The degree-2 factor of one element: evaluates to 1 exactly on probe
/// values where the query answers Yes.
pub fn element_factor(pm: &ProbeMap3, pf: PolyFunction, u: usize) -> MultilinearPoly {
    assert_eq!(pm.layout, Layout::ThreeArrays);
    let field = pf.field();
    let nv = 3 * pm.s;
    let [x, y, z] = pm.vars_of(u);
    match pf {
        PolyFunction::XyPlusZ => MultilinearPoly::from_terms(field, nv, [(vec![x, y], 1), (vec![z], 1)]),
        PolyFunction::SumEq1 => MultilinearPoly::from_terms(
            field,
            nv,
            [
                (vec![x], 1),
                (vec![y], 1),
                (vec![z], 1),
                (vec![x, y], 1),
                (vec![y, z], 1),
                (vec![x, z], 1),
            ],
        ),
    }
}

/// P_S: product of the element factors over S. On a valid scheme memory
/// σ(S') with |S'| = |S| this evaluates to 1 iff S = S'.
pub fn build_ps(pm: &ProbeMap3, pf: PolyFunction, s_set: &[usize]) -> MultilinearPoly {
    assert!(!s_set.is_empty());
    let mut out = MultilinearPoly::one(pf.field(), 3 * pm.s);
    for &u in s_set {
        out = out.mul(&element_factor(pm, pf, u));
    }
    out
}

/// Rank of a matrix over the prime field p ∈ {2, 3}.
fn rank_mod_p(mut rows: Vec<Vec<u8>>, p: u8) -> usize {
    let inv = |a: u8| match (p, a) {
        (_, 1) => 1,
        (3, 2) => 2,
        _ => unreachable!("no inverse of {a} mod {p}"),
    };
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, pivot);
        let f = inv(rows[rank][col]);
        for v in rows[rank].iter_mut() {
            *v = *v * f % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..cols {
                    let sub = f * rows[rank][c] % p;
                    rows[r][c] = (rows[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceReport {
    /// Evaluation matrix M[S,S'] = P_S(σ(S')) is the identity.
    pub identity: bool,
    /// Rank of the coefficient matrix of the P_S, computed directly.
    pub rank: usize,
    /// C(m, n): how many polynomials there are.
    pub class_count: u128,
    /// Dimension bound for multilinear degree ≤ 2n over 3s variables:
    /// Σ_{k≤2n} C(3s, k).
    pub spanning_bound: u128,
    /// The coarser closed form C(3s+2n, 2n).
    pub spanning_cap: u128,
}

/// Build every P_S over the size-n subsets of [m] (lexicographic order),
/// evaluate each on every provided memory σ(S'), and report whether the
/// evaluation matrix is the identity — together with a direct rank
/// computation of the coefficient matrix as a cross-check.
pub fn independence_check(
    pm: &ProbeMap3,
    pf: PolyFunction,
    n: usize,
    assignments: &[(Vec<usize>, Vec<bool>)],
) -> IndependenceReport {
    assert_eq!(pm.layout, Layout::ThreeArrays);
    let p = pf.field().characteristic();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for_each_combination(pm.m, n, &mut |s| sets.push(s.to_vec()));
    let polys: Vec<MultilinearPoly> =
        sets.iter().map(|s| build_ps(pm, pf, s)).collect();
    let memory_of = |s: &Vec<usize>| -> &Vec<bool> {
        &assignments
            .iter()
            .find(|(set, _)| set == s)
            .unwrap_or_else(|| panic!("missing memory for set {s:?}"))
            .1
    };
    let mut identity = true;
    for (i, poly) in polys.iter().enumerate() {
        for (j, set) in sets.iter().enumerate() {
            let v = poly.evaluate(memory_of(set));
            if v != u8::from(i == j) {
                identity = false;
            }
        }
    }
    let monomials: BTreeSet<Vec<usize>> =
        polys.iter().flat_map(|p| p.terms().keys().cloned()).collect();
    let col_of: BTreeMap<&Vec<usize>, usize> =
        monomials.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let rows: Vec<Vec<u8>> = polys
        .iter()
        .map(|poly| {
            let mut row = vec![0u8; monomials.len()];
            for (k, &c) in poly.terms() {
                row[col_of[k]] = c;
            }
            row
        })
        .collect();
    IndependenceReport {
        identity,
        rank: rank_mod_p(rows, p),
        class_count: binomial_u128(pm.m, n),
        spanning_bound: (0..=2 * n).map(|k| binomial_u128(3 * pm.s, k)).sum(),
        spanning_cap: binomial_u128(3 * pm.s + 2 * n, 2 * n),
    }
}
