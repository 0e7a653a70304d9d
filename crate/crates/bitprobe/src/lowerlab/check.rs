//! Independent replay of witnesses. Confirmation never trusts the finder:
//! store/exclude witnesses are checked by exhaustive memory enumeration when
//! the map fits the bit budget, and by the propagation engine otherwise;
//! counting certificates are re-derived from scratch.

use super::{
    propagate_constraints, satisfiable_for_constraints, LowerLabError, ProbeMap3,
    PropagationOutcome, SatOutcome, Witness, WitnessKind, WitnessPayload,
};
use crate::boolfunc::QueryFunction3;
use crate::probegraph::binomial_u128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    /// No memory satisfies the witness's store/exclude demands (or the
    /// counting inequality holds): the contradiction is real.
    Confirmed,
    /// A satisfying memory exists (or the inequality fails): the witness is
    /// wrong and the emitting finder has a bug.
    Refuted,
    /// Enumeration was over budget and propagation could not decide.
    Inconclusive,
}

/// Check a witness against the probe map and query function it was issued
/// for. RANK witnesses re-derive the counting inequality; all other kinds
/// assert that storing S0 while excluding S1 is unsatisfiable.
pub fn check_witness(
    pm: &ProbeMap3,
    f: QueryFunction3,
    w: &Witness,
    limit_bits: u32,
) -> CheckOutcome {
    if let WitnessPayload::Rank { m, n, s, .. } = w.payload {
        if m != pm.m || s != pm.s {
            return CheckOutcome::Refuted;
        }
        let lhs = binomial_u128(m, n);
        let rhs: u128 = (0..=2 * n).map(|k| binomial_u128(3 * s, k)).sum();
        return if lhs > rhs { CheckOutcome::Confirmed } else { CheckOutcome::Refuted };
    }
    debug_assert_ne!(w.kind, WitnessKind::Rank, "rank witnesses carry a rank payload");
    let mut constraints: Vec<(usize, bool)> = w.s0.iter().map(|&u| (u, true)).collect();
    constraints.extend(w.s1.iter().map(|&u| (u, false)));
    match satisfiable_for_constraints(pm, f, &constraints, limit_bits) {
        Ok(SatOutcome::Unsat) => CheckOutcome::Confirmed,
        Ok(SatOutcome::Sat(_)) => CheckOutcome::Refuted,
        Err(LowerLabError::EnumerationOverBudget { .. }) => {
            match propagate_constraints(pm, f, &constraints) {
                PropagationOutcome::Contradiction => CheckOutcome::Confirmed,
                PropagationOutcome::Inconclusive => CheckOutcome::Inconclusive,
            }
        }
        Err(_) => CheckOutcome::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::{AND3, MAJ, PARITY};
    use crate::lowerlab::{
        build_model_graph, density_witness, dependency_witness, detect_forced, DetectOutcome,
        Layout,
    };

    fn single_array(triples: &[(usize, usize, usize)], s: usize) -> ProbeMap3 {
        ProbeMap3::new(
            triples.len(),
            s,
            Layout::SingleArray,
            triples.iter().map(|t| t.0).collect(),
            triples.iter().map(|t| t.1).collect(),
            triples.iter().map(|t| t.2).collect(),
        )
    }

    #[test]
    fn forced_witness_confirmed_and_corruption_refuted() {
        let pm = single_array(
            &[(0, 1, 5), (1, 2, 5), (2, 0, 5), (0, 3, 5), (3, 4, 5), (4, 0, 5)],
            6,
        );
        let w = match detect_forced(&build_model_graph(&pm), 3) {
            DetectOutcome::Forced(w) => w,
            DetectOutcome::NotForced => panic!(),
        };
        assert_eq!(check_witness(&pm, MAJ, &w, 24), CheckOutcome::Confirmed);
        // drop the store side: the all-zero memory now satisfies the rest
        let bad = Witness::new(w.kind, vec![], w.s1.clone(), w.payload.clone());
        assert_eq!(check_witness(&pm, MAJ, &bad, 24), CheckOutcome::Refuted);
    }

    #[test]
    fn dependency_witness_confirmed() {
        let pm = single_array(&[(0, 1, 2), (0, 1, 2)], 3);
        let w = dependency_witness(&pm, PARITY).unwrap().unwrap();
        assert_eq!(check_witness(&pm, PARITY, &w, 24), CheckOutcome::Confirmed);
    }

    #[test]
    fn density_witness_confirmed() {
        let pm = ProbeMap3::new(
            4,
            3,
            Layout::ThreeArrays,
            vec![0, 0, 1, 2],
            vec![0, 1, 0, 2],
            vec![0, 1, 2, 0],
        );
        let w = density_witness(&pm, AND3, 3).unwrap().unwrap();
        assert_eq!(check_witness(&pm, AND3, &w, 24), CheckOutcome::Confirmed);
    }

    #[test]
    fn over_budget_falls_back_to_propagation() {
        // duplicated parity triples on a wide map: 30 bits of memory, but
        // propagation still nails the contradiction
        let mut triples = vec![(0, 1, 2), (0, 1, 2)];
        triples.extend((0..8).map(|i| (3 + i, 11 + i, 19 + i)));
        let pm = single_array(&triples, 30);
        let w = dependency_witness(&pm, PARITY).unwrap().unwrap();
        assert_eq!(check_witness(&pm, PARITY, &w, 24), CheckOutcome::Confirmed);
    }

    #[test]
    fn rank_payload_is_recomputed() {
        use crate::lowerlab::WitnessKind;
        let rank = |m, n, s| {
            Witness::new(
                WitnessKind::Rank,
                vec![],
                vec![],
                WitnessPayload::Rank { m, n, s, lhs: 0, rhs: 0 },
            )
        };
        // 47 elements on 3 locations: C(47,1) = 47 > Σ_{k≤2} C(9,k) = 46
        let pm = single_array(&vec![(0, 1, 2); 47], 3);
        assert_eq!(check_witness(&pm, PARITY, &rank(47, 1, 3), 24), CheckOutcome::Confirmed);
        // a false inequality is refuted
        let small = single_array(&vec![(0, 1, 2); 46], 3);
        assert_eq!(check_witness(&small, PARITY, &rank(46, 1, 3), 24), CheckOutcome::Refuted);
        // payload dimensions must match the map
        assert_eq!(check_witness(&small, PARITY, &rank(47, 1, 3), 24), CheckOutcome::Refuted);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u128(10, 3), 120);
        assert_eq!(binomial_u128(3, 5), 0);
        assert_eq!(binomial_u128(52, 26), 495_918_532_948_104);
    }
}
