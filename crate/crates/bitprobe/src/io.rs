//! Textual file formats: scheme files (non-adaptive, adaptive, grid,
//! characteristic-vector and raw 3-probe maps), memory files, and witness
//! files. Everything is line-oriented and human-diffable; indices are
//! 1-based on disk and 0-based in memory; truth tables are hex; bitstrings
//! are hex with the most significant nibble first. Memory files embed a
//! 64-bit fingerprint of the owning scheme's serialization so a memory
//! cannot silently be replayed against the wrong scheme.

use crate::boolfunc::QueryFunction3;
use crate::lowerlab::{DensityDetail, Layout, ProbeMap3, Witness, WitnessKind, WitnessPayload};
use crate::schemes::{
    AdaptiveScheme, NonAdaptiveAdmissibility, NonAdaptiveKind, NonAdaptiveScheme, PairReport,
    QueryTable,
};
use crate::probegraph::{AdaptiveProbeGraph, Cycle, NonAdaptiveProbeGraph};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn bad(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

/// FNV-1a over the canonical serialization.
pub fn fingerprint(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeFile {
    NonAdaptive {
        scheme: NonAdaptiveScheme,
        admissibility: Option<NonAdaptiveAdmissibility>,
    },
    Adaptive {
        scheme: AdaptiveScheme,
        report: Option<PairReport>,
    },
    /// A bare 3-probe map with its query function and set-size bound, the
    /// input shape of the witness machinery.
    ProbeMap {
        pm: ProbeMap3,
        n: usize,
        query: QueryFunction3,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryFile {
    pub bits: Vec<bool>,
    pub scheme_fp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessFile {
    pub pm: ProbeMap3,
    pub n: usize,
    pub query: QueryFunction3,
    pub witness: Witness,
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Cursor { lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(usize, &'a str), ParseError> {
        let out = self
            .peek()
            .ok_or_else(|| bad(self.lines.last().map_or(1, |(n, _)| n + 1), "unexpected end of file"))?;
        self.pos += 1;
        Ok(out)
    }

    /// Next line must be `key value...`; returns (line number, value part).
    fn kv(&mut self, key: &str) -> Result<(usize, &'a str), ParseError> {
        let (line, l) = self.next()?;
        match l.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((line, v.trim())),
            _ if l == key => Ok((line, "")),
            _ => Err(bad(line, format!("expected `{key}`, found `{l}`"))),
        }
    }

    fn kv_usize(&mut self, key: &str) -> Result<usize, ParseError> {
        let (line, v) = self.kv(key)?;
        v.parse().map_err(|_| bad(line, format!("`{key}` wants a number, found `{v}`")))
    }

    fn kv_u64(&mut self, key: &str) -> Result<u64, ParseError> {
        let (line, v) = self.kv(key)?;
        v.parse().map_err(|_| bad(line, format!("`{key}` wants a number, found `{v}`")))
    }

    fn bare(&mut self, word: &str) -> Result<usize, ParseError> {
        let (line, l) = self.next()?;
        if l == word {
            Ok(line)
        } else {
            Err(bad(line, format!("expected `{word}`, found `{l}`")))
        }
    }

    fn at(&self, word: &str) -> bool {
        self.peek().is_some_and(|(_, l)| l == word || l.split_whitespace().next() == Some(word))
    }
}

/// Parse a 1-based index against an exclusive upper bound.
fn index1(tok: &str, bound: usize, what: &str, line: usize) -> Result<usize, ParseError> {
    let v: usize = tok
        .parse()
        .map_err(|_| bad(line, format!("{what} wants a number, found `{tok}`")))?;
    if v == 0 || v > bound {
        return Err(bad(line, format!("{what} {v} out of range 1..={bound}")));
    }
    Ok(v - 1)
}

fn row1(values: &[usize]) -> String {
    values.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_row(
    cursor: &mut Cursor,
    count: usize,
    bound: usize,
    what: &str,
) -> Result<Vec<usize>, ParseError> {
    let (line, l) = cursor.next()?;
    let toks: Vec<&str> = l.split_whitespace().collect();
    if toks.len() != count {
        return Err(bad(line, format!("expected {count} {what} entries, found {}", toks.len())));
    }
    toks.iter().map(|t| index1(t, bound, what, line)).collect()
}

const SCHEME_MAGIC: &str = "bitprobe-scheme v1";
const MEMORY_MAGIC: &str = "bitprobe-memory v1";
const WITNESS_MAGIC: &str = "bitprobe-witness v1";

fn layout_word(l: Layout) -> &'static str {
    match l {
        Layout::SingleArray => "single",
        Layout::ThreeArrays => "three",
    }
}

fn write_probe_map(out: &mut String, pm: &ProbeMap3, n: usize, query: QueryFunction3) {
    use std::fmt::Write;
    writeln!(out, "m {}", pm.m).unwrap();
    writeln!(out, "n {n}").unwrap();
    writeln!(out, "s {}", pm.s).unwrap();
    writeln!(out, "layout {}", layout_word(pm.layout)).unwrap();
    writeln!(out, "query {}", query.to_hex()).unwrap();
    writeln!(out, "probes").unwrap();
    for u in 0..pm.m {
        writeln!(out, "{}", row1(&[pm.x[u], pm.y[u], pm.z[u]])).unwrap();
    }
}

fn parse_probe_map(
    cursor: &mut Cursor,
) -> Result<(ProbeMap3, usize, QueryFunction3), ParseError> {
    let m = cursor.kv_usize("m")?;
    let n = cursor.kv_usize("n")?;
    let s = cursor.kv_usize("s")?;
    let (lline, lword) = cursor.kv("layout")?;
    let layout = match lword {
        "single" => Layout::SingleArray,
        "three" => Layout::ThreeArrays,
        other => return Err(bad(lline, format!("unknown layout `{other}`"))),
    };
    let (qline, qhex) = cursor.kv("query")?;
    let query = QueryFunction3::from_hex(qhex)
        .ok_or_else(|| bad(qline, format!("bad truth table `{qhex}`")))?;
    cursor.bare("probes")?;
    let (mut x, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..m {
        let (line, _) = cursor.peek().map(|p| (p.0, p.1)).unwrap_or((0, ""));
        let row = parse_row(cursor, 3, s, "location")?;
        if layout == Layout::SingleArray && (row[0] == row[1] || row[1] == row[2] || row[0] == row[2])
        {
            return Err(bad(line, "single-array probes must be distinct"));
        }
        x.push(row[0]);
        y.push(row[1]);
        z.push(row[2]);
    }
    Ok((ProbeMap3::new(m, s, layout, x, y, z), n, query))
}

pub fn serialize_scheme(file: &SchemeFile) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "{SCHEME_MAGIC}").unwrap();
    match file {
        SchemeFile::NonAdaptive { scheme, admissibility } => {
            let kind = match scheme.kind {
                NonAdaptiveKind::Majority => "nonadaptive",
                NonAdaptiveKind::Grid => "grid",
                NonAdaptiveKind::CharVector => "charvec",
            };
            writeln!(out, "kind {kind}").unwrap();
            writeln!(out, "m {}", scheme.m).unwrap();
            writeln!(out, "n {}", scheme.n).unwrap();
            writeln!(out, "t {}", scheme.t).unwrap();
            writeln!(out, "s {}", scheme.s).unwrap();
            writeln!(out, "query {}", scheme.query.to_hex()).unwrap();
            writeln!(out, "probes").unwrap();
            for u in 0..scheme.m {
                writeln!(out, "{}", row1(&scheme.graph.neighbor[u])).unwrap();
            }
            if let Some(a) = admissibility {
                writeln!(out, "admissibility").unwrap();
                writeln!(out, "r_max {}", a.r_max).unwrap();
                writeln!(out, "factor {}", a.factor).unwrap();
                writeln!(out, "ts_bound {}", a.ts_bound).unwrap();
                writeln!(out, "ts_max {}", a.ts_max).unwrap();
                writeln!(out, "seed {}", a.seed).unwrap();
                writeln!(out, "retries {}", a.retries).unwrap();
            }
        }
        SchemeFile::Adaptive { scheme, report } => {
            writeln!(out, "kind adaptive").unwrap();
            writeln!(out, "m {}", scheme.m).unwrap();
            writeln!(out, "n {}", scheme.n).unwrap();
            writeln!(out, "t1 {}", scheme.t1).unwrap();
            writeln!(out, "t2 {}", scheme.t2).unwrap();
            writeln!(out, "s {}", scheme.s).unwrap();
            writeln!(out, "probes").unwrap();
            for u in 0..scheme.m {
                let mut row = scheme.g1.neighbor[u].clone();
                row.extend(&scheme.g2.neighbor[u]);
                writeln!(out, "{}", row1(&row)).unwrap();
            }
            if let Some(r) = report {
                writeln!(out, "pair-report").unwrap();
                writeln!(out, "max_survivors {}", r.max_survivors).unwrap();
                writeln!(out, "max_survivors_plus {}", r.max_survivors_plus).unwrap();
                writeln!(out, "seed {}", r.seed).unwrap();
                writeln!(out, "retries {}", r.retries).unwrap();
            }
        }
        SchemeFile::ProbeMap { pm, n, query } => {
            writeln!(out, "kind probe-map-3").unwrap();
            write_probe_map(&mut out, pm, *n, *query);
        }
    }
    out
}

pub fn parse_scheme(text: &str) -> Result<SchemeFile, ParseError> {
    let mut cursor = Cursor::new(text);
    let (line, magic) = cursor.next()?;
    if magic != SCHEME_MAGIC {
        return Err(bad(line, format!("expected `{SCHEME_MAGIC}`")));
    }
    let (kline, kind) = cursor.kv("kind")?;
    match kind {
        "nonadaptive" | "grid" | "charvec" => {
            let kind = match kind {
                "nonadaptive" => NonAdaptiveKind::Majority,
                "grid" => NonAdaptiveKind::Grid,
                _ => NonAdaptiveKind::CharVector,
            };
            let m = cursor.kv_usize("m")?;
            let n = cursor.kv_usize("n")?;
            let t = cursor.kv_usize("t")?;
            let s = cursor.kv_usize("s")?;
            let (qline, qhex) = cursor.kv("query")?;
            let query = QueryTable::from_hex(t, qhex)
                .ok_or_else(|| bad(qline, format!("bad arity-{t} truth table `{qhex}`")))?;
            cursor.bare("probes")?;
            let mut neighbor = Vec::with_capacity(m);
            for _ in 0..m {
                neighbor.push(parse_row(&mut cursor, t, s, "location")?);
            }
            let admissibility = if cursor.at("admissibility") {
                cursor.bare("admissibility")?;
                Some(NonAdaptiveAdmissibility {
                    r_max: cursor.kv_usize("r_max")?,
                    factor: cursor.kv_usize("factor")?,
                    ts_bound: cursor.kv_usize("ts_bound")?,
                    ts_max: cursor.kv_usize("ts_max")?,
                    seed: cursor.kv_u64("seed")?,
                    retries: cursor.kv_usize("retries")?,
                })
            } else {
                None
            };
            let scheme = NonAdaptiveScheme {
                m,
                n,
                t,
                s,
                graph: NonAdaptiveProbeGraph::new(m, s, t, neighbor),
                query,
                kind,
            };
            Ok(SchemeFile::NonAdaptive { scheme, admissibility })
        }
        "adaptive" => {
            let m = cursor.kv_usize("m")?;
            let n = cursor.kv_usize("n")?;
            let t1 = cursor.kv_usize("t1")?;
            let t2 = cursor.kv_usize("t2")?;
            let s = cursor.kv_usize("s")?;
            cursor.bare("probes")?;
            let alpha = AdaptiveProbeGraph::blocks(t2);
            let mut n1 = Vec::with_capacity(m);
            let mut n2 = Vec::with_capacity(m);
            for _ in 0..m {
                let row = parse_row(&mut cursor, t1 + alpha, s, "location")?;
                n1.push(row[..t1].to_vec());
                n2.push(row[t1..].to_vec());
            }
            let report = if cursor.at("pair-report") {
                cursor.bare("pair-report")?;
                Some(PairReport {
                    max_survivors: cursor.kv_usize("max_survivors")?,
                    max_survivors_plus: cursor.kv_usize("max_survivors_plus")?,
                    seed: cursor.kv_u64("seed")?,
                    retries: cursor.kv_usize("retries")?,
                })
            } else {
                None
            };
            let scheme = AdaptiveScheme::new(
                n,
                NonAdaptiveProbeGraph::new(m, s, t1, n1),
                AdaptiveProbeGraph::new(m, s, t2, n2),
            );
            Ok(SchemeFile::Adaptive { scheme, report })
        }
        "probe-map-3" => {
            let (pm, n, query) = parse_probe_map(&mut cursor)?;
            Ok(SchemeFile::ProbeMap { pm, n, query })
        }
        other => Err(bad(kline, format!("unknown scheme kind `{other}`"))),
    }
}

fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let mut n = 0u32;
            for (i, &b) in c.iter().enumerate() {
                if b {
                    n |= 8 >> i;
                }
            }
            char::from_digit(n, 16).unwrap().to_ascii_uppercase()
        })
        .collect()
}

fn hex_to_bits(len: usize, s: &str, line: usize) -> Result<Vec<bool>, ParseError> {
    let want_digits = len.div_ceil(4).max(if len == 0 { 0 } else { 1 });
    if s.len() != want_digits {
        return Err(bad(line, format!("expected {want_digits} hex digits for {len} bits, found {}", s.len())));
    }
    let mut bits = Vec::with_capacity(len);
    for (i, ch) in s.chars().enumerate() {
        let nib = ch
            .to_digit(16)
            .ok_or_else(|| bad(line, format!("bad hex digit `{ch}`")))?;
        for j in 0..4 {
            let bit = nib & (8 >> j) != 0;
            let idx = 4 * i + j;
            if idx < len {
                bits.push(bit);
            } else if bit {
                return Err(bad(line, "padding bits past the declared length must be 0"));
            }
        }
    }
    Ok(bits)
}

pub fn serialize_memory(mem: &MemoryFile) -> String {
    format!(
        "{MEMORY_MAGIC}\nbits {}\nscheme {:016X}\nhex {}\n",
        mem.bits.len(),
        mem.scheme_fp,
        bits_to_hex(&mem.bits)
    )
}

pub fn parse_memory(text: &str) -> Result<MemoryFile, ParseError> {
    let mut cursor = Cursor::new(text);
    let (line, magic) = cursor.next()?;
    if magic != MEMORY_MAGIC {
        return Err(bad(line, format!("expected `{MEMORY_MAGIC}`")));
    }
    let len = cursor.kv_usize("bits")?;
    let (fline, fp) = cursor.kv("scheme")?;
    let scheme_fp = u64::from_str_radix(fp, 16)
        .map_err(|_| bad(fline, format!("bad fingerprint `{fp}`")))?;
    let (hline, hex) = cursor.kv("hex")?;
    Ok(MemoryFile { bits: hex_to_bits(len, hex, hline)?, scheme_fp })
}

const DENSITY_CLASSES: [&str; 5] = ["AND", "XOR_AND", "OR_AND", "ALL_EQUAL", "AND_OR_NN"];

pub fn serialize_witness(file: &WitnessFile) -> String {
    use std::fmt::Write;
    let w = &file.witness;
    let mut out = String::new();
    writeln!(out, "{WITNESS_MAGIC}").unwrap();
    writeln!(out, "kind {}", w.kind).unwrap();
    write_probe_map(&mut out, &file.pm, file.n, file.query);
    writeln!(out, "s0 {}", row1(&w.s0)).unwrap();
    writeln!(out, "s1 {}", row1(&w.s1)).unwrap();
    match &w.payload {
        WitnessPayload::Cycles(cycles) => {
            writeln!(out, "cycles {}", cycles.len()).unwrap();
            for c in cycles {
                writeln!(out, "vertices {}", row1(&c.vertices)).unwrap();
                writeln!(out, "labels {}", row1(&c.labels)).unwrap();
            }
        }
        WitnessPayload::Density(d) => {
            writeln!(out, "density {} complemented {}", d.class, u8::from(d.complemented))
                .unwrap();
            writeln!(out, "anchors {}", row1(&d.anchors)).unwrap();
            writeln!(out, "density-cycles {}", d.cycles.len()).unwrap();
            for c in &d.cycles {
                writeln!(out, "labels {}", row1(c)).unwrap();
            }
        }
        WitnessPayload::Dependency { field, coefficients } => {
            writeln!(out, "dependency {field}").unwrap();
            for (e, c) in coefficients {
                writeln!(out, "coeff {} {c}", e + 1).unwrap();
            }
        }
        WitnessPayload::Rank { m, n, s, lhs, rhs } => {
            writeln!(out, "rank m {m} n {n} s {s} lhs {lhs} rhs {rhs}").unwrap();
        }
    }
    out
}

fn parse_index_list(v: &str, bound: usize, what: &str, line: usize) -> Result<Vec<usize>, ParseError> {
    v.split_whitespace().map(|t| index1(t, bound, what, line)).collect()
}

pub fn parse_witness(text: &str) -> Result<WitnessFile, ParseError> {
    let mut cursor = Cursor::new(text);
    let (line, magic) = cursor.next()?;
    if magic != WITNESS_MAGIC {
        return Err(bad(line, format!("expected `{WITNESS_MAGIC}`")));
    }
    let (kline, kword) = cursor.kv("kind")?;
    let kind = match kword {
        "FORCED_P1" => WitnessKind::ForcedP1,
        "FORCED_P2" => WitnessKind::ForcedP2,
        "FORCED_P3" => WitnessKind::ForcedP3,
        "DENSITY" => WitnessKind::Density,
        "DEPENDENCY" => WitnessKind::Dependency,
        "RANK" => WitnessKind::Rank,
        other => return Err(bad(kline, format!("unknown witness kind `{other}`"))),
    };
    let (pm, n, query) = parse_probe_map(&mut cursor)?;
    let (l0, v0) = cursor.kv("s0")?;
    let s0 = parse_index_list(v0, pm.m, "element", l0)?;
    let (l1, v1) = cursor.kv("s1")?;
    let s1 = parse_index_list(v1, pm.m, "element", l1)?;
    let payload = match kind {
        WitnessKind::ForcedP1 | WitnessKind::ForcedP2 | WitnessKind::ForcedP3 => {
            let count = cursor.kv_usize("cycles")?;
            let mut cycles = Vec::with_capacity(count);
            let vertex_bound = pm.total_bits();
            for _ in 0..count {
                let (vl, vv) = cursor.kv("vertices")?;
                let vertices = parse_index_list(vv, vertex_bound, "vertex", vl)?;
                let (ll, lv) = cursor.kv("labels")?;
                let labels = parse_index_list(lv, pm.m, "label", ll)?;
                if labels.len() != vertices.len() {
                    return Err(bad(ll, "cycle labels and vertices must have equal length"));
                }
                cycles.push(Cycle { vertices, labels });
            }
            WitnessPayload::Cycles(cycles)
        }
        WitnessKind::Density => {
            let (dl, dv) = cursor.kv("density")?;
            let toks: Vec<&str> = dv.split_whitespace().collect();
            let [cls, comp_kw, comp] = toks[..] else {
                return Err(bad(dl, "expected `density <class> complemented <0|1>`"));
            };
            let class = DENSITY_CLASSES
                .iter()
                .find(|&&c| c == cls)
                .copied()
                .ok_or_else(|| bad(dl, format!("unknown density class `{cls}`")))?;
            if comp_kw != "complemented" || !matches!(comp, "0" | "1") {
                return Err(bad(dl, "expected `density <class> complemented <0|1>`"));
            }
            let (al, av) = cursor.kv("anchors")?;
            let anchors = parse_index_list(av, pm.m, "element", al)?;
            let count = cursor.kv_usize("density-cycles")?;
            let mut cycles = Vec::with_capacity(count);
            for _ in 0..count {
                let (ll, lv) = cursor.kv("labels")?;
                cycles.push(parse_index_list(lv, pm.m, "label", ll)?);
            }
            WitnessPayload::Density(DensityDetail {
                class,
                complemented: comp == "1",
                anchors,
                cycles,
            })
        }
        WitnessKind::Dependency => {
            let (dl, fword) = cursor.kv("dependency")?;
            let field = match fword {
                "F2" => "F2",
                "Q" => "Q",
                other => return Err(bad(dl, format!("unknown field `{other}`"))),
            };
            let mut coefficients = Vec::new();
            while cursor.at("coeff") {
                let (cl, cv) = cursor.kv("coeff")?;
                let (e, c) = cv
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| bad(cl, "expected `coeff <element> <value>`"))?;
                coefficients.push((index1(e, pm.m, "element", cl)?, c.trim().to_string()));
            }
            WitnessPayload::Dependency { field, coefficients }
        }
        WitnessKind::Rank => {
            let (rl, rv) = cursor.kv("rank")?;
            let toks: Vec<&str> = rv.split_whitespace().collect();
            let [km, m_, kn, n_, ks, s_, kl, lhs, kr, rhs] = toks[..] else {
                return Err(bad(rl, "expected `rank m <m> n <n> s <s> lhs <lhs> rhs <rhs>`"));
            };
            if [km, kn, ks, kl, kr] != ["m", "n", "s", "lhs", "rhs"] {
                return Err(bad(rl, "expected `rank m <m> n <n> s <s> lhs <lhs> rhs <rhs>`"));
            }
            let num = |t: &str| -> Result<u128, ParseError> {
                t.parse().map_err(|_| bad(rl, format!("bad number `{t}`")))
            };
            WitnessPayload::Rank {
                m: num(m_)? as usize,
                n: num(n_)? as usize,
                s: num(s_)? as usize,
                lhs: num(lhs)?,
                rhs: num(rhs)?,
            }
        }
    };
    Ok(WitnessFile { pm, n, query, witness: Witness { kind, s0, s1, payload } })
}
