//! Degree-lowering rewrite of P_S. On the A/B probe graph, two S-edges that
//! intersect let their factors merge into one degree-3 factor outright; two
//! S-edges trapping a non-S edge t let the degree-4 monomial be rewritten
//! through z(t) = x(t)·y(t), which holds on every memory whose stored set
//! excludes t. Each step trades two degree-2 factors for one degree-3 one,
//! so after k steps the degree bound is 2|S| − k.

use super::{element_factor, MultilinearPoly, PolyError, PolyFunction};
use crate::lowerlab::{Layout, ProbeMap3};
use crate::probegraph::{binomial_u128, for_each_combination, LabeledBipartiteGraph};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainEvidence {
    /// Two S-edges (labels v, w) sharing an endpoint.
    Intersection { v: usize, w: usize },
    /// S-edges v, w trapping non-S edge t: the left endpoint of t lies on v,
    /// the right endpoint on w.
    Trap { v: usize, w: usize, t: usize },
    NoGain,
}

/// Search a bipartite graph for gain evidence among the edges labeled by
/// `s_labels`: intersecting pairs first (lowest labels win), then trapped
/// edges by ascending label.
pub fn gains(g: &LabeledBipartiteGraph, s_labels: &[usize]) -> GainEvidence {
    let in_s: BTreeSet<usize> = s_labels.iter().copied().collect();
    let mut s_edges: Vec<(usize, usize, usize)> =
        g.edges.iter().copied().filter(|&(_, _, l)| in_s.contains(&l)).collect();
    s_edges.sort_by_key(|&(_, _, l)| l);
    for (i, &(a1, b1, v)) in s_edges.iter().enumerate() {
        for &(a2, b2, w) in &s_edges[i + 1..] {
            if a1 == a2 || b1 == b2 {
                return GainEvidence::Intersection { v, w };
            }
        }
    }
    let mut others: Vec<(usize, usize, usize)> =
        g.edges.iter().copied().filter(|&(_, _, l)| !in_s.contains(&l)).collect();
    others.sort_by_key(|&(_, _, l)| l);
    for &(a, b, t) in &others {
        for &(a1, _, v) in &s_edges {
            if a1 != a {
                continue;
            }
            for &(_, b2, w) in &s_edges {
                if b2 == b && w != v {
                    return GainEvidence::Trap { v, w, t };
                }
            }
        }
    }
    GainEvidence::NoGain
}

/// Does every 2k-subset of the S-edges gain? Exhaustive over C(|S|, 2k)
/// subsets, refused beyond the budget.
pub fn is_good_gainer(
    g: &LabeledBipartiteGraph,
    s_labels: &[usize],
    k: usize,
    budget: u64,
) -> Result<bool, PolyError> {
    let needed = binomial_u128(s_labels.len(), 2 * k);
    if needed > budget as u128 {
        return Err(PolyError::BudgetExceeded { needed, budget });
    }
    let mut all_gain = true;
    for_each_combination(s_labels.len(), 2 * k, &mut |idx| {
        if !all_gain {
            return;
        }
        let sub: Vec<usize> = idx.iter().map(|&i| s_labels[i]).collect();
        if gains(g, &sub) == GainEvidence::NoGain {
            all_gain = false;
        }
    });
    Ok(all_gain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictStep {
    Intersect { v: usize, w: usize },
    Trap { v: usize, w: usize, t: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionResult {
    pub p_hat: MultilinearPoly,
    /// Trapped elements whose exclusion the rewrite relies on; disjoint
    /// from S, at most one per step.
    pub t_set: Vec<usize>,
    pub steps: Vec<RestrictStep>,
}

/// Replace x(v)·y(w) with z(t) in every monomial containing both.
fn substitute_pair(p: &MultilinearPoly, a: usize, b: usize, r: usize) -> MultilinearPoly {
    MultilinearPoly::from_terms(
        p.field,
        p.num_vars,
        p.terms().iter().map(|(vars, &c)| {
            if vars.contains(&a) && vars.contains(&b) {
                let mut v: Vec<usize> =
                    vars.iter().copied().filter(|&x| x != a && x != b).collect();
                v.push(r);
                (v, c)
            } else {
                (vars.clone(), c)
            }
        }),
    )
}

/// Run the rewrite for `steps` iterations on P_S for the (x∧y)⊕z class.
/// Each step finds gain evidence in the A/B graph restricted to the live
/// part of S (plus all non-S edges), merges the two factors — substituting
/// through the trapped element when there is no intersection — and deletes
/// both elements from the live set. The result agrees with P_S on every
/// memory where each trapped element's probes satisfy x·y = z, and its
/// degree is at most 2|S| − steps. Callers wanting the full guarantee pass
/// steps = ⌊|S|/2c⌋ for their chosen c ≥ 1.
pub fn restrict_polynomial(
    pm: &ProbeMap3,
    s_set: &[usize],
    c: usize,
    steps: usize,
) -> Result<RestrictionResult, PolyError> {
    assert_eq!(pm.layout, Layout::ThreeArrays);
    assert!(c >= 1);
    let n = s_set.len();
    assert!(steps <= n / (2 * c), "step budget above ⌊n/2c⌋");
    let in_s: BTreeSet<usize> = s_set.iter().copied().collect();
    let mut live: BTreeSet<usize> = in_s.clone();
    let mut t_set: BTreeSet<usize> = BTreeSet::new();
    let mut merged: Vec<MultilinearPoly> = Vec::new();
    let mut log: Vec<RestrictStep> = Vec::new();
    for step in 0..steps {
        // deleted S-edges stay out of the graph so a trapped edge can never
        // be an S element
        let elements: Vec<usize> =
            (0..pm.m).filter(|u| live.contains(u) || !in_s.contains(u)).collect();
        let graph = pm.graph_ab(&elements);
        let live_vec: Vec<usize> = live.iter().copied().collect();
        let (v, w, product) = match gains(&graph, &live_vec) {
            GainEvidence::Intersection { v, w } => {
                log.push(RestrictStep::Intersect { v, w });
                let prod = element_factor(pm, PolyFunction::XyPlusZ, v)
                    .mul(&element_factor(pm, PolyFunction::XyPlusZ, w));
                (v, w, prod)
            }
            GainEvidence::Trap { v, w, t } => {
                t_set.insert(t);
                log.push(RestrictStep::Trap { v, w, t });
                let prod = element_factor(pm, PolyFunction::XyPlusZ, v)
                    .mul(&element_factor(pm, PolyFunction::XyPlusZ, w));
                let prod =
                    substitute_pair(&prod, pm.vars_of(v)[0], pm.vars_of(w)[1], pm.vars_of(t)[2]);
                (v, w, prod)
            }
            GainEvidence::NoGain => return Err(PolyError::NoGainAvailable { step }),
        };
        debug_assert!(product.degree() <= 3);
        merged.push(product);
        live.remove(&v);
        live.remove(&w);
        let bound: usize = merged.iter().map(|p| p.degree()).sum::<usize>() + 2 * live.len();
        debug_assert!(bound <= 2 * n - (step + 1), "degree bound must drop each step");
    }
    let mut p_hat = MultilinearPoly::one(PolyFunction::XyPlusZ.field(), 3 * pm.s);
    for p in &merged {
        p_hat = p_hat.mul(p);
    }
    for &u in &live {
        p_hat = p_hat.mul(&element_factor(pm, PolyFunction::XyPlusZ, u));
    }
    Ok(RestrictionResult { p_hat, t_set: t_set.into_iter().collect(), steps: log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::build_ps;
    use std::collections::BTreeMap;

    fn three_array(triples: &[(usize, usize, usize)], s: usize) -> ProbeMap3 {
        ProbeMap3::new(
            triples.len(),
            s,
            Layout::ThreeArrays,
            triples.iter().map(|t| t.0).collect(),
            triples.iter().map(|t| t.1).collect(),
            triples.iter().map(|t| t.2).collect(),
        )
    }

    #[test]
    fn intersection_found_first() {
        let g = LabeledBipartiteGraph::new(2, 2, vec![(0, 0, 0), (0, 1, 1), (1, 0, 2)]);
        assert_eq!(gains(&g, &[0, 1]), GainEvidence::Intersection { v: 0, w: 1 });
        // shared right endpoint counts too
        assert_eq!(gains(&g, &[0, 2]), GainEvidence::Intersection { v: 0, w: 2 });
    }

    #[test]
    fn trap_found_when_no_intersection() {
        // S-edges (0,0) and (1,1); non-S edge (0,1) has its left endpoint on
        // the first and right endpoint on the second
        let g = LabeledBipartiteGraph::new(2, 2, vec![(0, 0, 0), (1, 1, 1), (0, 1, 2)]);
        assert_eq!(gains(&g, &[0, 1]), GainEvidence::Trap { v: 0, w: 1, t: 2 });
        // the reverse diagonal swaps the roles
        let g = LabeledBipartiteGraph::new(2, 2, vec![(0, 0, 0), (1, 1, 1), (1, 0, 2)]);
        assert_eq!(gains(&g, &[0, 1]), GainEvidence::Trap { v: 1, w: 0, t: 2 });
    }

    #[test]
    fn matching_without_extras_has_no_gain() {
        let g = LabeledBipartiteGraph::new(3, 3, vec![(0, 0, 0), (1, 1, 1), (2, 2, 2)]);
        assert_eq!(gains(&g, &[0, 1, 2]), GainEvidence::NoGain);
    }

    #[test]
    fn good_gainer_cases() {
        // all edges through one left vertex: every pair intersects
        let star = LabeledBipartiteGraph::new(1, 4, (0..4).map(|i| (0, i, i)).collect());
        assert_eq!(is_good_gainer(&star, &[0, 1, 2, 3], 1, 100), Ok(true));
        assert_eq!(is_good_gainer(&star, &[0, 1, 2, 3], 2, 100), Ok(true));
        // bare matching: the single 2-subset of any pair never gains
        let matching = LabeledBipartiteGraph::new(2, 2, vec![(0, 0, 0), (1, 1, 1)]);
        assert_eq!(is_good_gainer(&matching, &[0, 1], 1, 100), Ok(false));
        assert!(matches!(
            is_good_gainer(&star, &[0, 1, 2, 3], 1, 2),
            Err(PolyError::BudgetExceeded { needed: 6, budget: 2 })
        ));
    }

    #[test]
    fn intersect_step_lowers_degree() {
        let pm = three_array(&[(0, 0, 0), (0, 1, 1)], 2);
        let r = restrict_polynomial(&pm, &[0, 1], 1, 1).unwrap();
        assert_eq!(r.steps, vec![RestrictStep::Intersect { v: 0, w: 1 }]);
        assert!(r.t_set.is_empty());
        assert_eq!(r.p_hat.degree(), 3);
        // with no traps the rewrite is exact multiplication
        assert_eq!(r.p_hat, build_ps(&pm, PolyFunction::XyPlusZ, &[0, 1]));
    }

    #[test]
    fn trap_step_substitutes_through_z() {
        // S = {0, 1} disjoint; element 2 shares x with 0 and y with 1
        let pm = three_array(&[(0, 0, 0), (1, 1, 1), (0, 1, 2)], 3);
        let r = restrict_polynomial(&pm, &[0, 1], 1, 1).unwrap();
        assert_eq!(r.steps, vec![RestrictStep::Trap { v: 0, w: 1, t: 2 }]);
        assert_eq!(r.t_set, vec![2]);
        assert_eq!(r.p_hat.degree(), 3);
        // A: 0..3, B: 3..6, C: 6..9; x(0)y(1) = A0·B1 became C2 = var 8
        let expect: BTreeMap<Vec<usize>, u8> = [
            (vec![1, 3, 8], 1), // A1·B0·C2
            (vec![0, 3, 7], 1), // A0·B0·C1
            (vec![1, 4, 6], 1), // A1·B1·C0
            (vec![6, 7], 1),    // C0·C1
        ]
        .into();
        assert_eq!(*r.p_hat.terms(), expect);
    }

    #[test]
    fn rewrite_agrees_on_restricted_memories() {
        let pm = three_array(&[(0, 0, 0), (1, 1, 1), (0, 1, 2)], 3);
        let s = [0, 1];
        let r = restrict_polynomial(&pm, &s, 1, 1).unwrap();
        let p = build_ps(&pm, PolyFunction::XyPlusZ, &s);
        let bits = 3 * pm.s;
        for counter in 0u32..1 << bits {
            let mem: Vec<bool> = (0..bits).map(|i| counter >> i & 1 == 1).collect();
            // restriction: every trapped element answers No, i.e. x·y = z
            let excluded = r.t_set.iter().all(|&t| {
                let [x, y, z] = pm.vars_of(t);
                (mem[x] && mem[y]) == mem[z]
            });
            if excluded {
                assert_eq!(p.evaluate(&mem), r.p_hat.evaluate(&mem));
            }
        }
    }

    #[test]
    fn two_steps_drop_two_degrees() {
        // two x-sharing pairs: both steps intersect
        let pm = three_array(&[(0, 0, 0), (0, 1, 1), (1, 2, 2), (1, 3, 3)], 4);
        let r = restrict_polynomial(&pm, &[0, 1, 2, 3], 1, 2).unwrap();
        assert_eq!(r.steps.len(), 2);
        assert!(r.p_hat.degree() <= 2 * 4 - 2);
        assert!(r.t_set.is_empty());
    }

    #[test]
    fn no_gain_surfaces_as_error() {
        let pm = three_array(&[(0, 0, 0), (1, 1, 1)], 2);
        assert_eq!(
            restrict_polynomial(&pm, &[0, 1], 1, 1),
            Err(PolyError::NoGainAvailable { step: 0 })
        );
    }

    #[test]
    #[should_panic(expected = "step budget")]
    fn step_budget_is_enforced() {
        let pm = three_array(&[(0, 0, 0), (0, 1, 1)], 2);
        let _ = restrict_polynomial(&pm, &[0, 1], 1, 2);
    }
}
