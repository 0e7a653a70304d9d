//! Exhaustive minimal-space search — the ground-truth oracle.
//!
//! Probe maps are enumerated in a canonical form that kills both symmetries:
//! element order (rows sorted lexicographically) and location names (labels
//! assigned in first-occurrence order). Every map is equivalent to at least
//! one canonical map, so searching canonical maps only is lossless.

use super::{satisfiable_for_set, Layout, LowerLabError, ProbeMap3, SatOutcome};
use crate::boolfunc::QueryFunction3;
use crate::probegraph::for_each_combination;
use crate::schemes::QueryTable;

/// General t-probe map into a single array of s locations; repeats allowed
/// within a row (a probe may read the same location twice).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleProbeMap {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    pub rows: Vec<Vec<usize>>,
}

/// Does some memory realize the indicator of S under f for this map?
pub fn satisfiable_tuple_map(
    map: &TupleProbeMap,
    f: &QueryTable,
    s_set: &[usize],
    limit_bits: u32,
) -> Result<bool, LowerLabError> {
    assert_eq!(f.arity, map.t);
    if map.s > limit_bits as usize || map.s >= 64 {
        return Err(LowerLabError::EnumerationOverBudget { bits: map.s, limit: limit_bits });
    }
    'mem: for counter in 0u64..(1u64 << map.s) {
        for (u, row) in map.rows.iter().enumerate() {
            let reads: Vec<bool> = row.iter().map(|&l| counter >> l & 1 == 1).collect();
            if f.eval(&reads) != s_set.contains(&u) {
                continue 'mem;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

fn map_stores_all_sets(
    map: &TupleProbeMap,
    f: &QueryTable,
    n: usize,
    limit_bits: u32,
) -> Result<bool, LowerLabError> {
    for k in 0..=n.min(map.m) {
        let mut ok = true;
        let mut err = None;
        for_each_combination(map.m, k, &mut |s_set| {
            if !ok || err.is_some() {
                return;
            }
            match satisfiable_tuple_map(map, f, s_set, limit_bits) {
                Ok(true) => {}
                Ok(false) => ok = false,
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All canonical row sequences: rows sorted (non-decreasing lexicographic),
/// locations labeled in row-major first-occurrence order, all s labels used.
fn for_each_canonical_tuple_map(
    m: usize,
    s: usize,
    t: usize,
    visit: &mut dyn FnMut(&TupleProbeMap) -> bool,
) -> bool {
    fn gen_rows(s: usize, t: usize, used: usize, min_row: &[usize], out: &mut Vec<(Vec<usize>, usize)>) {
        fn rec(
            s: usize,
            t: usize,
            used: usize,
            row: &mut Vec<usize>,
            min_row: &[usize],
            tight: bool,
            out: &mut Vec<(Vec<usize>, usize)>,
        ) {
            if row.len() == t {
                out.push((row.clone(), used));
                return;
            }
            let pos = row.len();
            let lo = if tight { min_row[pos] } else { 0 };
            let hi = used.min(s - 1); // == used means "introduce a new label"
            for v in lo..=hi {
                let new_used = if v == used { used + 1 } else { used };
                row.push(v);
                rec(s, t, new_used, row, min_row, tight && v == min_row[pos], out);
                row.pop();
            }
        }
        rec(s, t, used, &mut Vec::new(), min_row, true, out);
    }

    fn rec_elems(
        m: usize,
        s: usize,
        t: usize,
        used: usize,
        prev: &[usize],
        rows: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(&TupleProbeMap) -> bool,
    ) -> bool {
        if rows.len() == m {
            if used == s {
                let map = TupleProbeMap { m, s, t, rows: rows.clone() };
                return visit(&map);
            }
            return true;
        }
        // remaining rows can introduce at most t new labels each
        if used + (m - rows.len()) * t < s {
            return true;
        }
        let mut candidates = Vec::new();
        gen_rows(s, t, used, prev, &mut candidates);
        for (row, new_used) in candidates {
            rows.push(row.clone());
            if !rec_elems(m, s, t, new_used, &row, rows, visit) {
                rows.pop();
                return false;
            }
            rows.pop();
        }
        true
    }

    rec_elems(m, s, t, 0, &vec![0; t], &mut Vec::new(), visit)
}

/// Smallest s ≤ s_cap admitting a t-probe single-array scheme with query f
/// for all sets of size ≤ n, with one witness map; None if no s works.
pub fn min_space_search_tuples(
    m: usize,
    n: usize,
    t: usize,
    f: &QueryTable,
    s_cap: usize,
    limit_bits: u32,
) -> Result<Option<(usize, TupleProbeMap)>, LowerLabError> {
    for s in 1..=s_cap {
        let mut hit: Option<TupleProbeMap> = None;
        let mut err: Option<LowerLabError> = None;
        for_each_canonical_tuple_map(m, s, t, &mut |map| {
            match map_stores_all_sets(map, f, n, limit_bits) {
                Ok(true) => {
                    hit = Some(map.clone());
                    false
                }
                Ok(false) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(map) = hit {
            return Ok(Some((s, map)));
        }
    }
    Ok(None)
}

/// Canonical three-array maps: rows sorted, per-array first-occurrence
/// labeling, at least one array using all s locations.
fn for_each_canonical_three_array_map(
    m: usize,
    s: usize,
    visit: &mut dyn FnMut(&ProbeMap3) -> bool,
) -> bool {
    fn rec(
        m: usize,
        s: usize,
        used: [usize; 3],
        prev: [usize; 3],
        rows: &mut Vec<[usize; 3]>,
        visit: &mut dyn FnMut(&ProbeMap3) -> bool,
    ) -> bool {
        if rows.len() == m {
            if used.iter().max() != Some(&s) {
                return true;
            }
            let pm = ProbeMap3::new(
                m,
                s,
                Layout::ThreeArrays,
                rows.iter().map(|r| r[0]).collect(),
                rows.iter().map(|r| r[1]).collect(),
                rows.iter().map(|r| r[2]).collect(),
            );
            return visit(&pm);
        }
        if used.iter().max().unwrap() + (m - rows.len()) < s {
            return true;
        }
        // enumerate rows ≥ prev lexicographically
        let mut row = [0usize; 3];
        fn gen(
            i: usize,
            tight: bool,
            s: usize,
            used: [usize; 3],
            prev: [usize; 3],
            row: &mut [usize; 3],
            m: usize,
            rows: &mut Vec<[usize; 3]>,
            visit: &mut dyn FnMut(&ProbeMap3) -> bool,
        ) -> bool {
            if i == 3 {
                rows.push(*row);
                let cont = rec(m, s, used, *row, rows, visit);
                rows.pop();
                return cont;
            }
            let lo = if tight { prev[i] } else { 0 };
            let hi = used[i].min(s - 1);
            for v in lo..=hi {
                let mut nu = used;
                if v == used[i] {
                    nu[i] += 1;
                }
                row[i] = v;
                if !gen(i + 1, tight && v == prev[i], s, nu, prev, row, m, rows, visit) {
                    return false;
                }
            }
            true
        }
        gen(0, true, s, used, prev, &mut row, m, rows, visit)
    }
    rec(m, s, [0; 3], [0; 3], &mut Vec::new(), visit)
}

/// Smallest per-array size s for a three-array 3-probe scheme with query f,
/// plus a witness map.
pub fn min_space_search_three_arrays(
    m: usize,
    n: usize,
    f: QueryFunction3,
    s_cap: usize,
    limit_bits: u32,
) -> Result<Option<(usize, ProbeMap3)>, LowerLabError> {
    for s in 1..=s_cap {
        let mut hit: Option<ProbeMap3> = None;
        let mut err: Option<LowerLabError> = None;
        for_each_canonical_three_array_map(m, s, &mut |pm| {
            let mut ok = true;
            for k in 0..=n.min(m) {
                let mut bad = false;
                let mut sub_err = None;
                for_each_combination(m, k, &mut |s_set| {
                    if bad || sub_err.is_some() {
                        return;
                    }
                    match satisfiable_for_set(pm, f, s_set, limit_bits) {
                        Ok(SatOutcome::Sat(_)) => {}
                        Ok(SatOutcome::Unsat) => bad = true,
                        Err(e) => sub_err = Some(e),
                    }
                });
                if let Some(e) = sub_err {
                    err = Some(e);
                    return false;
                }
                if bad {
                    ok = false;
                    break;
                }
            }
            if ok {
                hit = Some(pm.clone());
                false
            } else {
                true
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(pm) = hit {
            return Ok(Some((s, pm)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::{SUM_EQ_1, XY_XOR_Z};

    #[test]
    fn one_probe_identity_needs_m_bits() {
        let f = QueryTable::identity1();
        let (s, map) = min_space_search_tuples(3, 1, 1, &f, 5, 24).unwrap().unwrap();
        assert_eq!(s, 3);
        assert_eq!(map.rows, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn two_probes_cannot_beat_m_for_n2() {
        // no 2-bit query function stores 2-subsets of a 4-universe in < 4 bits
        for bits in 0..16u64 {
            let f = QueryTable::new(2, bits);
            for s in 1..=3usize {
                let mut any = false;
                for_each_canonical_tuple_map(4, s, 2, &mut |map| {
                    if map_stores_all_sets(map, &f, 2, 24).unwrap() {
                        any = true;
                        false
                    } else {
                        true
                    }
                });
                assert!(!any, "table {bits:04b} worked at s={s}");
            }
        }
        // and s = 4 is achieved (dictator on the first probe)
        let dictator = QueryTable::new(2, 0b1100);
        let (s, _) = min_space_search_tuples(4, 2, 2, &dictator, 4, 24).unwrap().unwrap();
        assert_eq!(s, 4);
    }

    #[test]
    fn canonical_enumeration_counts() {
        // m=2, s=1, t=1: single map [[0],[0]]
        let mut count = 0;
        for_each_canonical_tuple_map(2, 1, 1, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
        // m=2, s=2, t=1: rows sorted, both labels used: [[0],[1]] only
        let mut maps = Vec::new();
        for_each_canonical_tuple_map(2, 2, 1, &mut |m| {
            maps.push(m.rows.clone());
            true
        });
        assert_eq!(maps, vec![vec![vec![0], vec![1]]]);
    }

    #[test]
    fn degree_class_tiny_schemes_exist() {
        let (s, pm) = min_space_search_three_arrays(3, 1, XY_XOR_Z, 3, 24).unwrap().unwrap();
        assert!(s <= 2, "got s={s}");
        assert_eq!(pm.m, 3);
        let (s3, _) = min_space_search_three_arrays(3, 1, SUM_EQ_1, 3, 24).unwrap().unwrap();
        assert!(s3 <= 2, "got s={s3}");
    }

    #[test]
    fn constant_function_stores_nothing() {
        let f = QueryTable::new(1, 0b00);
        assert_eq!(min_space_search_tuples(2, 1, 1, &f, 3, 24).unwrap(), None);
    }
}
