//! Dimension certificates for the parity-style classes. Each element is a
//! weight-3 vector over the memory locations; when the elements outnumber
//! the dimension, elimination produces an explicit linear dependency, and
//! the dependent element can never disagree with the combination of its
//! partners. Parity classes live over F2; the x+y+z≠1 classes over the
//! rationals, where any dependency's coefficients must sum to 1 (entry sums
//! are 3 on both sides), which is exactly what a non-member constraint
//! forbids.

use super::{LowerLabError, Witness, WitnessKind, WitnessPayload};
use crate::boolfunc::{classify, find_transform, QueryFunction3, Strategy, PARITY, SUM_NE_1};
use crate::lowerlab::{Layout, ProbeMap3};
use num_rational::Rational64;
use num_traits::Zero;

fn f2_dependency(pm: &ProbeMap3) -> Option<(usize, Vec<usize>)> {
    let words = pm.s.div_ceil(64);
    let cwords = pm.m.div_ceil(64);
    let bit = |v: &[u64], i: usize| v[i / 64] >> (i % 64) & 1 == 1;
    // basis in reduced row-echelon form, so one reduction pass is complete:
    // (vector, combination over original elements, pivot); each vector is
    // zero at every other row's pivot
    let mut basis: Vec<(Vec<u64>, Vec<u64>, usize)> = Vec::new();
    for u in 0..pm.m {
        let mut r = vec![0u64; words];
        for loc in [pm.x[u], pm.y[u], pm.z[u]] {
            r[loc / 64] ^= 1 << (loc % 64);
        }
        let mut acc = vec![0u64; cwords];
        for (bv, bc, p) in &basis {
            if bit(&r, *p) {
                for i in 0..words {
                    r[i] ^= bv[i];
                }
                for i in 0..cwords {
                    acc[i] ^= bc[i];
                }
            }
        }
        match (0..pm.s).find(|&i| bit(&r, i)) {
            None => {
                let partners: Vec<usize> = (0..pm.m).filter(|&e| bit(&acc, e)).collect();
                return Some((u, partners));
            }
            Some(p) => {
                acc[u / 64] ^= 1 << (u % 64);
                for (bv, bc, _) in basis.iter_mut() {
                    if bit(bv, p) {
                        for i in 0..words {
                            bv[i] ^= r[i];
                        }
                        for i in 0..cwords {
                            bc[i] ^= acc[i];
                        }
                    }
                }
                basis.push((r, acc, p));
            }
        }
    }
    None
}

fn rational_dependency(
    pm: &ProbeMap3,
    signs: [i64; 3],
    perm: [usize; 3],
) -> Option<(usize, Vec<(usize, Rational64)>)> {
    let svec = |u: usize| {
        let coords = [pm.x[u], pm.y[u], pm.z[u]];
        let mut v = vec![Rational64::zero(); pm.s];
        for j in 0..3 {
            v[coords[perm[j]]] += Rational64::from_integer(signs[j]);
        }
        v
    };
    let mut basis: Vec<(Vec<Rational64>, Vec<Rational64>, usize)> = Vec::new();
    for u in 0..pm.m {
        let mut r = svec(u);
        let mut acc = vec![Rational64::zero(); pm.m];
        for (bv, bc, p) in &basis {
            if !r[*p].is_zero() {
                let factor = r[*p] / bv[*p];
                for i in 0..pm.s {
                    let d = factor * bv[i];
                    r[i] -= d;
                }
                for e in 0..pm.m {
                    let d = factor * bc[e];
                    acc[e] += d;
                }
            }
        }
        match (0..pm.s).find(|&i| !r[i].is_zero()) {
            None => {
                let partners: Vec<(usize, Rational64)> =
                    (0..pm.m).filter(|&e| !acc[e].is_zero()).map(|e| (e, acc[e])).collect();
                return Some((u, partners));
            }
            Some(p) => {
                // r = svec(u) − Σ acc[e]·svec(e); normalize the pivot to 1
                // and clear it from the existing rows to stay fully reduced
                let mut combo = acc;
                for c in combo.iter_mut() {
                    *c = -*c;
                }
                combo[u] += Rational64::from_integer(1);
                let inv = r[p].recip();
                for v in r.iter_mut() {
                    *v *= inv;
                }
                for c in combo.iter_mut() {
                    *c *= inv;
                }
                for (bv, bc, _) in basis.iter_mut() {
                    if !bv[p].is_zero() {
                        let factor = bv[p];
                        for i in 0..pm.s {
                            let d = factor * r[i];
                            bv[i] -= d;
                        }
                        for e in 0..pm.m {
                            let d = factor * combo[e];
                            bc[e] -= d;
                        }
                    }
                }
                basis.push((r, combo, p));
            }
        }
    }
    None
}

/// Extract a linear dependency among the elements' probe vectors and turn it
/// into a store/exclude contradiction: the dependent element's answer is
/// determined by its partners' answers, so it cannot be stored while every
/// partner is excluded. Returns None when the vectors are independent.
pub fn dependency_witness(
    pm: &ProbeMap3,
    f: QueryFunction3,
) -> Result<Option<Witness>, LowerLabError> {
    let cls = classify(f);
    if cls.strategy != Strategy::Dimension {
        return Err(LowerLabError::WrongStrategy {
            got: cls.strategy.to_string(),
            want: Strategy::Dimension.to_string(),
        });
    }
    if pm.layout != Layout::SingleArray {
        return Err(LowerLabError::WrongLayout("single-array layout"));
    }
    if cls.canonical_table == classify(PARITY).canonical_table {
        // negations only flip the answer by a constant; any F2 dependency
        // here has an odd number of partners (entry sums are odd), so the
        // parities still clash
        return Ok(f2_dependency(pm).map(|(u, partners)| {
            let coeffs = partners.iter().map(|&e| (e, "1".to_string())).collect();
            Witness::new(
                WitnessKind::Dependency,
                vec![u],
                partners,
                WitnessPayload::Dependency { field: "F2", coefficients: coeffs },
            )
        }));
    }
    // x+y+z≠1 class: signed vectors, −1 where the representative reads the
    // coordinate negated
    let (perm, neg) = find_transform(SUM_NE_1.table, f.table)
        .expect("DIMENSION non-parity class is the x+y+z≠1 orbit");
    let signs = [0, 1, 2].map(|j| if neg >> j & 1 == 1 { -1 } else { 1 });
    Ok(rational_dependency(pm, signs, perm).map(|(u, partners)| {
        let s1: Vec<usize> = partners.iter().map(|&(e, _)| e).collect();
        let coeffs = partners.iter().map(|&(e, a)| (e, a.to_string())).collect();
        Witness::new(
            WitnessKind::Dependency,
            vec![u],
            s1,
            WitnessPayload::Dependency { field: "Q", coefficients: coeffs },
        )
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::MAJ;
    use crate::lowerlab::{satisfiable_for_constraints, SatOutcome};

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

    fn assert_confirms(pm: &ProbeMap3, f: QueryFunction3, w: &Witness) {
        let mut cons: Vec<(usize, bool)> = w.s0.iter().map(|&u| (u, true)).collect();
        cons.extend(w.s1.iter().map(|&u| (u, false)));
        assert_eq!(
            satisfiable_for_constraints(pm, f, &cons, 24).unwrap(),
            SatOutcome::Unsat
        );
    }

    #[test]
    fn identical_triples_are_dependent() {
        let pm = single_array(&[(0, 1, 2), (0, 1, 2)], 3);
        let w = dependency_witness(&pm, PARITY).unwrap().unwrap();
        assert_eq!(w.s0, vec![1]);
        assert_eq!(w.s1, vec![0]);
        assert_confirms(&pm, PARITY, &w);
    }

    #[test]
    fn more_elements_than_dimensions_always_dependent() {
        let pm = single_array(&[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3), (0, 1, 2)], 4);
        let w = dependency_witness(&pm, PARITY).unwrap().unwrap();
        assert_eq!(w.s0.len(), 1);
        assert!(!w.s1.is_empty());
        assert_confirms(&pm, PARITY, &w);
    }

    #[test]
    fn independent_triples_give_none() {
        let pm = single_array(&[(0, 1, 2), (1, 2, 3)], 4);
        assert_eq!(dependency_witness(&pm, PARITY).unwrap(), None);
        assert_eq!(dependency_witness(&pm, SUM_NE_1).unwrap(), None);
    }

    #[test]
    fn rational_dependency_with_mixed_signs() {
        // f = −a − b + c + d + e: coefficients sum to 1 as they must
        let pm = single_array(
            &[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3), (0, 1, 4), (2, 3, 4)],
            5,
        );
        let w = dependency_witness(&pm, SUM_NE_1).unwrap().unwrap();
        assert_eq!(w.s0, vec![5]);
        assert_eq!(w.s1, vec![0, 1, 2, 3, 4]);
        match &w.payload {
            WitnessPayload::Dependency { field, coefficients } => {
                assert_eq!(*field, "Q");
                let sum: Rational64 = coefficients
                    .iter()
                    .map(|(_, c)| c.parse::<Rational64>().unwrap())
                    .sum();
                assert_eq!(sum, Rational64::from_integer(1));
            }
            other => panic!("unexpected payload {other:?}"),
        }
        assert_confirms(&pm, SUM_NE_1, &w);
    }

    #[test]
    fn sum_ne_one_duplicate_triples() {
        let pm = single_array(&[(0, 1, 2), (0, 1, 2)], 3);
        let w = dependency_witness(&pm, SUM_NE_1).unwrap().unwrap();
        assert_confirms(&pm, SUM_NE_1, &w);
    }

    #[test]
    fn wrong_strategy_is_rejected() {
        let pm = single_array(&[(0, 1, 2)], 3);
        assert!(matches!(
            dependency_witness(&pm, MAJ),
            Err(LowerLabError::WrongStrategy { .. })
        ));
    }
}
