//! Cycle-forcing machinery for the 3-probe majority lower bound.
//!
//! A model graph puts one edge per universe element on the memory locations;
//! the element's remaining probe location is its "third" vertex. Certain
//! cycle configurations (P1/P2/P3) make the majority answer over-constrained
//! no matter what the memory holds, and `detect_forced` hunts for them by
//! the bin-and-delete procedure.

use super::{Witness, WitnessKind, WitnessPayload};
use crate::lowerlab::{Layout, ProbeMap3};
use crate::probegraph::{Cycle, LabeledMultigraph};
use std::collections::BTreeMap;

/// One edge of a model graph: endpoints {a,b}, unique element label, and the
/// element's remaining probe location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelEdge {
    pub a: usize,
    pub b: usize,
    pub label: usize,
    pub third: usize,
}

/// Graph on the s memory locations with one edge per element; for each label
/// u, {a,b,third} = {x(u),y(u),z(u)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelGraph {
    pub s: usize,
    pub edges: Vec<ModelEdge>,
}

/// Initial model graph: edge {x(u),y(u)}, third = z(u).
pub fn build_model_graph(pm: &ProbeMap3) -> ModelGraph {
    assert_eq!(pm.layout, Layout::SingleArray, "model graphs live on a single array");
    ModelGraph {
        s: pm.s,
        edges: (0..pm.m)
            .map(|u| ModelEdge { a: pm.x[u], b: pm.y[u], label: u, third: pm.z[u] })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectOutcome {
    Forced(Witness),
    NotForced,
}

/// Edge labels at even / odd positions of a cycle. `even_to_s0` puts the
/// even positions (0-based) into the first set.
fn split_alternating(c: &Cycle, even_to_s0: bool) -> (Vec<usize>, Vec<usize>) {
    let mut ev = Vec::new();
    let mut od = Vec::new();
    for (i, &lab) in c.labels.iter().enumerate() {
        if i % 2 == 0 {
            ev.push(lab);
        } else {
            od.push(lab);
        }
    }
    if even_to_s0 {
        (ev, od)
    } else {
        (od, ev)
    }
}

/// Hunt the bins for two intersecting odd cycles (P1) or two meeting even
/// cycles (P2). Even-bin entries carry the third vertex of each edge, in
/// cycle order.
fn scan_bins(odd: &[Cycle], even: &[(Cycle, Vec<usize>)]) -> Option<Witness> {
    for (i, c1) in odd.iter().enumerate() {
        for c2 in &odd[i + 1..] {
            let shared = c1.vertices.iter().find(|v| c2.vertices.contains(v));
            if let Some(&u0) = shared {
                let c1 = c1.rooted_at(u0).unwrap();
                let c2 = c2.rooted_at(u0).unwrap();
                let (a0, a1) = split_alternating(&c1, true);
                let (b0, b1) = split_alternating(&c2, false);
                let s0 = [a0, b0].concat();
                let s1 = [a1, b1].concat();
                return Some(Witness::new(
                    WitnessKind::ForcedP1,
                    s0,
                    s1,
                    WitnessPayload::Cycles(vec![c1, c2]),
                ));
            }
        }
    }
    for (i, (c1, t1)) in even.iter().enumerate() {
        for (c2, t2) in &even[i + 1..] {
            for (p, w) in t1.iter().enumerate() {
                if let Some(q) = t2.iter().position(|w2| w2 == w) {
                    let c1 = c1.rotated(p);
                    let c2 = c2.rotated(q);
                    let (a0, a1) = split_alternating(&c1, true);
                    let (b0, b1) = split_alternating(&c2, false);
                    let s0 = [a0, b0].concat();
                    let s1 = [a1, b1].concat();
                    return Some(Witness::new(
                        WitnessKind::ForcedP2,
                        s0,
                        s1,
                        WitnessPayload::Cycles(vec![c1, c2]),
                    ));
                }
            }
        }
    }
    None
}

/// Run the bin-and-delete procedure: repeatedly pull the shortest cycle of
/// length ≤ n. Odd cycles go to the ODD bin; even cycles with all-distinct
/// third vertices go to EVEN; an even cycle with a same-third edge pair at
/// an even count of in-between edges is a P3 certificate on the spot; at an
/// odd count the two edges are re-rooted onto the shared third vertex,
/// yielding a shorter odd cycle. Once the binned lengths exceed 2s,
/// pigeonhole guarantees P1 or P2 among the bins; the same bin scan also
/// runs when no short cycle remains, so small fixtures below the threshold
/// still surface their forced configuration.
pub fn detect_forced(mg: &ModelGraph, n: usize) -> DetectOutcome {
    let triples: BTreeMap<usize, [usize; 3]> = mg
        .edges
        .iter()
        .map(|e| {
            let mut t = [e.a, e.b, e.third];
            t.sort_unstable();
            (e.label, t)
        })
        .collect();
    let mut remaining: BTreeMap<usize, ModelEdge> =
        mg.edges.iter().map(|e| (e.label, *e)).collect();
    let mut odd_bin: Vec<Cycle> = Vec::new();
    let mut even_bin: Vec<(Cycle, Vec<usize>)> = Vec::new();
    let mut total = 0usize;

    loop {
        if total > 2 * mg.s {
            let w = scan_bins(&odd_bin, &even_bin)
                .expect("binned lengths over 2s guarantee an intersection or a meet");
            return DetectOutcome::Forced(w);
        }
        let g = LabeledMultigraph {
            num_vertices: mg.s,
            edges: remaining.values().map(|e| (e.a, e.b, e.label)).collect(),
        };
        let c = match g.find_short_cycle(n) {
            Some(c) => c,
            None => {
                return match scan_bins(&odd_bin, &even_bin) {
                    Some(w) => DetectOutcome::Forced(w),
                    None => DetectOutcome::NotForced,
                };
            }
        };
        if c.len() % 2 == 1 {
            for lab in &c.labels {
                remaining.remove(lab);
            }
            total += c.len();
            odd_bin.push(c);
            continue;
        }
        let thirds: Vec<usize> = c.labels.iter().map(|l| remaining[l].third).collect();
        // same-third pairs: 0-based index distance odd ⇔ an even number of
        // edges strictly between them along the cycle (either way around)
        let mut p3_pair = None;
        let mut rewrite_pair = None;
        'pairs: for p in 0..c.len() {
            for q in p + 1..c.len() {
                if thirds[p] != thirds[q] {
                    continue;
                }
                if (q - p) % 2 == 1 {
                    p3_pair = Some(p);
                    break 'pairs;
                } else if rewrite_pair.is_none() {
                    rewrite_pair = Some((p, q));
                }
            }
        }
        if let Some(p) = p3_pair {
            let c = c.rotated(p);
            let (s0, s1) = split_alternating(&c, true);
            return DetectOutcome::Forced(Witness::new(
                WitnessKind::ForcedP3,
                s0,
                s1,
                WitnessPayload::Cycles(vec![c]),
            ));
        }
        if let Some((p, q)) = rewrite_pair {
            // re-root the pair onto the shared third vertex: the stretch
            // between them becomes an odd cycle through w
            let c = c.rotated(p);
            let d = q - p;
            let w = thirds[p];
            let v0 = c.vertices[0];
            let v1 = c.vertices[1];
            let vk = c.vertices[d];
            let vk1 = c.vertices[(d + 1) % c.len()];
            let e1 = c.labels[0];
            let e2 = c.labels[d];
            remaining.insert(e1, ModelEdge { a: v1, b: w, label: e1, third: v0 });
            remaining.insert(e2, ModelEdge { a: vk, b: w, label: e2, third: vk1 });
            for lab in [e1, e2] {
                let e = remaining[&lab];
                let mut t = [e.a, e.b, e.third];
                t.sort_unstable();
                debug_assert_eq!(t, triples[&lab], "rewrite must preserve the probe triple");
            }
            let mut vs = vec![w];
            vs.extend_from_slice(&c.vertices[1..=d]);
            let short = Cycle { vertices: vs, labels: c.labels[0..=d].to_vec() };
            for lab in &short.labels {
                remaining.remove(lab);
            }
            total += short.len();
            odd_bin.push(short);
            continue;
        }
        // all thirds distinct
        for lab in &c.labels {
            remaining.remove(lab);
        }
        total += c.len();
        even_bin.push((c, thirds));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::MAJ;
    use crate::lowerlab::{satisfiable_for_constraints, SatOutcome};

    fn single_array(s: usize, triples: &[(usize, usize, usize)]) -> ProbeMap3 {
        ProbeMap3::new(
            triples.len(),
            s,
            Layout::SingleArray,
            triples.iter().map(|t| t.0).collect(),
            triples.iter().map(|t| t.1).collect(),
            triples.iter().map(|t| t.2).collect(),
        )
    }

    fn assert_witness_unsat(pm: &ProbeMap3, w: &Witness) {
        let mut cons: Vec<(usize, bool)> = w.s0.iter().map(|&u| (u, true)).collect();
        cons.extend(w.s1.iter().map(|&u| (u, false)));
        assert_eq!(
            satisfiable_for_constraints(pm, MAJ, &cons, 24).unwrap(),
            SatOutcome::Unsat,
            "witness must certify a real contradiction"
        );
    }

    #[test]
    fn two_triangles_sharing_a_vertex_are_p1() {
        let pm = single_array(
            6,
            &[(0, 1, 5), (1, 2, 5), (2, 0, 5), (0, 3, 5), (3, 4, 5), (4, 0, 5)],
        );
        let mg = build_model_graph(&pm);
        match detect_forced(&mg, 3) {
            DetectOutcome::Forced(w) => {
                assert_eq!(w.kind, WitnessKind::ForcedP1);
                assert_eq!(w.s0.len() + w.s1.len(), 6);
                assert_witness_unsat(&pm, &w);
            }
            DetectOutcome::NotForced => panic!("expected P1"),
        }
    }

    #[test]
    fn meeting_even_cycles_are_p2() {
        // two 4-cycles, thirds distinct within each, one third shared across
        let pm = single_array(
            12,
            &[
                (0, 1, 4),
                (1, 2, 5),
                (2, 3, 6),
                (3, 0, 7),
                (8, 9, 4),
                (9, 10, 5),
                (10, 11, 6),
                (11, 8, 7),
            ],
        );
        let mg = build_model_graph(&pm);
        match detect_forced(&mg, 4) {
            DetectOutcome::Forced(w) => {
                assert_eq!(w.kind, WitnessKind::ForcedP2);
                assert_witness_unsat(&pm, &w);
            }
            DetectOutcome::NotForced => panic!("expected P2"),
        }
    }

    #[test]
    fn even_cycle_with_adjacent_shared_third_is_p3() {
        // e1, e2 share the third vertex 4: zero edges between them
        let pm = single_array(7, &[(0, 1, 4), (1, 2, 4), (2, 3, 5), (3, 0, 6)]);
        let mg = build_model_graph(&pm);
        match detect_forced(&mg, 4) {
            DetectOutcome::Forced(w) => {
                assert_eq!(w.kind, WitnessKind::ForcedP3);
                assert_eq!(w.s0.len(), 2);
                assert_eq!(w.s1.len(), 2);
                assert_witness_unsat(&pm, &w);
            }
            DetectOutcome::NotForced => panic!("expected P3"),
        }
    }

    #[test]
    fn rewrite_pairs_feed_the_odd_bin() {
        // two 4-cycles whose opposite edges share third vertex 4; each gets
        // re-rooted into a triangle through 4, and the triangles intersect
        let pm = single_array(
            10,
            &[
                (0, 1, 4),
                (1, 2, 9),
                (2, 3, 4),
                (3, 0, 9),
                (5, 6, 4),
                (6, 7, 9),
                (7, 8, 4),
                (8, 5, 9),
            ],
        );
        let mg = build_model_graph(&pm);
        match detect_forced(&mg, 4) {
            DetectOutcome::Forced(w) => {
                assert_eq!(w.kind, WitnessKind::ForcedP1);
                assert_witness_unsat(&pm, &w);
            }
            DetectOutcome::NotForced => panic!("expected P1 via rewrites"),
        }
    }

    #[test]
    fn forest_is_not_forced() {
        let pm = single_array(5, &[(0, 1, 2), (1, 2, 3), (2, 3, 4)]);
        assert_eq!(detect_forced(&build_model_graph(&pm), 4), DetectOutcome::NotForced);
    }

    #[test]
    fn lone_even_cycle_with_distinct_thirds_is_not_forced() {
        let pm = single_array(8, &[(0, 1, 4), (1, 2, 5), (2, 3, 6), (3, 0, 7)]);
        assert_eq!(detect_forced(&build_model_graph(&pm), 4), DetectOutcome::NotForced);
    }

    #[test]
    fn model_graph_invariants() {
        let pm = single_array(4, &[(0, 1, 2), (1, 2, 3)]);
        let mg = build_model_graph(&pm);
        assert_eq!(mg.edges.len(), 2);
        for e in &mg.edges {
            let mut t = [e.a, e.b, e.third];
            t.sort_unstable();
            let mut want = [pm.x[e.label], pm.y[e.label], pm.z[e.label]];
            want.sort_unstable();
            assert_eq!(t, want);
        }
    }
}
