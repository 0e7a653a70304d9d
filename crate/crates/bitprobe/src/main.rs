//! Command-line front end. Output is line-oriented key=value; indices on the
//! command line and in files are 1-based. Exit codes: 0 pass/confirmed,
//! 1 fail/refuted, 2 parse or usage, 3 retries exhausted, 4 budget exceeded,
//! 5 matching infeasible, 6 inconclusive, 7 wrong strategy for the query
//! class. BITPROBE_BUDGET overrides the enumeration budgets.

use bitprobe::boolfunc::{all_classes, classify, QueryFunction3, Strategy};
use bitprobe::io::{
    fingerprint, parse_memory, parse_scheme, parse_witness, serialize_memory, serialize_scheme,
    serialize_witness, MemoryFile, SchemeFile, WitnessFile,
};
use bitprobe::lowerlab::{
    build_model_graph, check_witness, density_witness, dependency_witness, detect_forced,
    min_space_search_tuples, satisfiable_for_set, CheckOutcome, DetectOutcome, Layout,
    LowerLabError, ProbeMap3, SatOutcome, Witness, WitnessKind, WitnessPayload,
};
use bitprobe::probegraph::binomial_u128;
use bitprobe::schemes::{
    build_admissible_adaptive, build_admissible_nonadaptive, characteristic_vector_scheme,
    expansion_range, grid_scheme_n1, verify_scheme, Memory, MembershipScheme, QueryTable,
    SchemeError, VerifyOutcome,
};
use bitprobe::{DEFAULT_ENUM_BITS, DEFAULT_SUBSET_BUDGET};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bitprobe", about = "bit-probe set membership at desk scale")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a 3-variable truth table (hex), or print all 22 classes.
    Classify {
        table: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Generate-and-verify a scheme and write it to a file.
    Build {
        #[arg(long)]
        kind: String,
        #[arg(short)]
        m: usize,
        #[arg(short, default_value_t = 1)]
        n: usize,
        #[arg(short, default_value_t = 3)]
        t: usize,
        /// Locations per block; defaults to 2·(n + ⌈2n·lg(2m/n)⌉).
        #[arg(short, long)]
        space: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_retries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a set (1-based elements) into a memory file.
    Encode {
        scheme: PathBuf,
        #[arg(long)]
        out: PathBuf,
        elements: Vec<usize>,
    },
    /// Query one element (1-based) against a memory file.
    Query {
        scheme: PathBuf,
        memory: PathBuf,
        element: usize,
    },
    /// Exhaustively check the membership contract of a scheme file.
    Verify { scheme: PathBuf },
    /// Minimum space of an (m, n, s, t)-scheme by canonical enumeration.
    Search {
        #[arg(short)]
        m: usize,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        t: usize,
        /// Arity-t truth table in hex; defaults to the minimum over all
        /// tables (t ≤ 3 only).
        #[arg(long = "fn")]
        table: Option<String>,
        #[arg(long)]
        all_functions: bool,
        #[arg(long)]
        s_cap: Option<usize>,
        /// Write the space-optimal probe map (t = 3, distinct probes only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an unsatisfiability witness for a probe-map-3 scheme file.
    Witness {
        scheme: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Independently re-check a witness file.
    Check { witness: PathBuf },
    /// CSV timing/space table over a fixed parameter sweep.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

fn budget() -> u64 {
    std::env::var("BITPROBE_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SUBSET_BUDGET)
}

fn enum_bits() -> u32 {
    match std::env::var("BITPROBE_BUDGET").ok().and_then(|v| v.parse::<u64>().ok()) {
        Some(b) if b >= 2 => 63 - b.leading_zeros(),
        Some(_) => 1,
        None => DEFAULT_ENUM_BITS,
    }
}

fn scheme_error(e: SchemeError) -> Failure {
    let code = match &e {
        SchemeError::RetriesExhausted { .. } => 3,
        SchemeError::Graph(_) => 4,
        SchemeError::MatchingInfeasible { .. } => 5,
        _ => 2,
    };
    fail(code, e.to_string())
}

fn lower_error(e: LowerLabError) -> Failure {
    let code = match &e {
        LowerLabError::EnumerationOverBudget { .. } => 4,
        LowerLabError::WrongStrategy { .. } => 7,
        LowerLabError::WrongLayout(_) => 2,
    };
    fail(code, e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn read_scheme(path: &PathBuf) -> Result<SchemeFile, Failure> {
    parse_scheme(&read(path)?).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn elements0(elements: &[usize], m: usize) -> Result<Vec<usize>, Failure> {
    elements
        .iter()
        .map(|&e| {
            if e == 0 || e > m {
                Err(fail(2, format!("element {e} out of range 1..={m}")))
            } else {
                Ok(e - 1)
            }
        })
        .collect()
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, msg }) => {
            println!("error={msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Classify { table, all } => cmd_classify(table, all),
        Cmd::Build { kind, m, n, t, space, seed, max_retries, out } => {
            cmd_build(&kind, m, n, t, space, seed, max_retries, &out)
        }
        Cmd::Encode { scheme, out, elements } => cmd_encode(&scheme, &out, &elements),
        Cmd::Query { scheme, memory, element } => cmd_query(&scheme, &memory, element),
        Cmd::Verify { scheme } => cmd_verify(&scheme),
        Cmd::Search { m, n, t, table, all_functions, s_cap, out } => {
            cmd_search(m, n, t, table, all_functions, s_cap, out)
        }
        Cmd::Witness { scheme, out } => cmd_witness(&scheme, &out),
        Cmd::Check { witness } => cmd_check(&witness),
        Cmd::Bench { seed } => cmd_bench(seed),
    }
}

fn print_class(f: QueryFunction3) {
    let c = classify(f);
    println!(
        "table={} class={} canonical={:02X} strategy={} size={}",
        f.to_hex(),
        c.class_id,
        c.canonical_table,
        c.strategy,
        c.class_size
    );
}

fn cmd_classify(table: Option<String>, all: bool) -> Result<(), Failure> {
    if all {
        for c in all_classes() {
            print_class(QueryFunction3::new(c.canonical_table));
        }
        return Ok(());
    }
    let hex = table.ok_or_else(|| fail(2, "need a truth table or --all"))?;
    let f = QueryFunction3::from_hex(&hex)
        .ok_or_else(|| fail(2, format!("bad truth table `{hex}`")))?;
    print_class(f);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    kind: &str,
    m: usize,
    n: usize,
    t: usize,
    space: Option<usize>,
    seed: u64,
    max_retries: usize,
    out: &PathBuf,
) -> Result<(), Failure> {
    let file = match kind {
        "grid" => SchemeFile::NonAdaptive { scheme: grid_scheme_n1(m), admissibility: None },
        "charvec" => SchemeFile::NonAdaptive {
            scheme: characteristic_vector_scheme(m, n),
            admissibility: None,
        },
        "nonadaptive" => {
            let s = space.unwrap_or(2 * expansion_range(m, n));
            let (scheme, report) =
                build_admissible_nonadaptive(m, n, t, s, seed, max_retries, budget())
                    .map_err(scheme_error)?;
            println!("retries={}", report.retries);
            SchemeFile::NonAdaptive { scheme, admissibility: Some(report) }
        }
        "adaptive" => {
            let s = space.unwrap_or(2 * expansion_range(m, n));
            let (scheme, report) =
                build_admissible_adaptive(m, n, t, s, seed, max_retries, budget())
                    .map_err(scheme_error)?;
            println!("retries={}", report.retries);
            SchemeFile::Adaptive { scheme, report: Some(report) }
        }
        other => return Err(fail(2, format!("unknown kind `{other}`"))),
    };
    let text = serialize_scheme(&file);
    write(out, &text)?;
    let (m, n, s) = match &file {
        SchemeFile::NonAdaptive { scheme, .. } => (scheme.m, scheme.n, scheme.memory_len()),
        SchemeFile::Adaptive { scheme, .. } => (scheme.m, scheme.n, scheme.memory_len()),
        SchemeFile::ProbeMap { .. } => unreachable!(),
    };
    println!("kind={kind} m={m} n={n} bits={s} fingerprint={:016X}", fingerprint(&text));
    println!("out={}", out.display());
    Ok(())
}

fn cmd_encode(scheme: &PathBuf, out: &PathBuf, elements: &[usize]) -> Result<(), Failure> {
    let file = read_scheme(scheme)?;
    let fp = fingerprint(&serialize_scheme(&file));
    let bits = match &file {
        SchemeFile::NonAdaptive { scheme, .. } => {
            scheme.encode(&elements0(elements, scheme.m)?).map_err(scheme_error)?.bits
        }
        SchemeFile::Adaptive { scheme, .. } => {
            scheme.encode(&elements0(elements, scheme.m)?).map_err(scheme_error)?.bits
        }
        SchemeFile::ProbeMap { pm, n, query } => {
            let set = elements0(elements, pm.m)?;
            if set.len() > *n {
                return Err(fail(2, format!("set has {} elements, scheme stores at most {n}", set.len())));
            }
            match satisfiable_for_set(pm, *query, &set, enum_bits()).map_err(lower_error)? {
                SatOutcome::Sat(mem) => mem,
                SatOutcome::Unsat => return Err(fail(1, "no memory stores this set")),
            }
        }
    };
    println!("bits={}", bits.len());
    write(out, &serialize_memory(&MemoryFile { bits, scheme_fp: fp }))?;
    println!("out={}", out.display());
    Ok(())
}

fn load_memory(path: &PathBuf, fp: u64) -> Result<MemoryFile, Failure> {
    let mem = parse_memory(&read(path)?).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    if mem.scheme_fp != fp {
        return Err(fail(
            2,
            format!("memory belongs to scheme {:016X}, not {:016X}", mem.scheme_fp, fp),
        ));
    }
    Ok(mem)
}

fn cmd_query(scheme: &PathBuf, memory: &PathBuf, element: usize) -> Result<(), Failure> {
    let file = read_scheme(scheme)?;
    let fp = fingerprint(&serialize_scheme(&file));
    let mem = load_memory(memory, fp)?;
    let answer = match &file {
        SchemeFile::NonAdaptive { scheme, .. } => {
            let u = elements0(&[element], scheme.m)?[0];
            scheme.query(&Memory { bits: mem.bits }, u).map_err(scheme_error)?
        }
        SchemeFile::Adaptive { scheme, .. } => {
            let u = elements0(&[element], scheme.m)?[0];
            scheme.query(&Memory { bits: mem.bits }, u).map_err(scheme_error)?
        }
        SchemeFile::ProbeMap { pm, query, .. } => {
            let u = elements0(&[element], pm.m)?[0];
            if mem.bits.len() != pm.total_bits() {
                return Err(fail(2, "memory length does not match the probe map"));
            }
            let [x, y, z] = pm.vars_of(u);
            query.evaluate(mem.bits[x], mem.bits[y], mem.bits[z])
        }
    };
    println!("answer={}", u8::from(answer));
    Ok(())
}

fn cmd_verify(scheme: &PathBuf) -> Result<(), Failure> {
    let file = read_scheme(scheme)?;
    let outcome = match &file {
        SchemeFile::NonAdaptive { scheme, .. } => {
            verify_scheme(scheme, scheme.n, budget()).map_err(|e| fail(4, e.to_string()))?
        }
        SchemeFile::Adaptive { scheme, .. } => {
            // adaptive encoders store sets of size exactly n
            verify_adaptive(scheme)?
        }
        SchemeFile::ProbeMap { pm, n, query } => {
            return verify_probe_map(pm, *n, *query);
        }
    };
    match outcome {
        VerifyOutcome::Pass { sets_checked } => {
            println!("verify=pass sets={sets_checked}");
            Ok(())
        }
        VerifyOutcome::Fail { s_set, u, got } => {
            let set1 = s_set.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",");
            let got = match got {
                Ok(b) => u8::from(b).to_string(),
                Err(e) => return Err(scheme_error(e)),
            };
            println!("verify=fail set={set1} element={} got={got}", u + 1);
            Err(fail(1, "membership contract violated"))
        }
    }
}

fn verify_adaptive(sch: &bitprobe::schemes::AdaptiveScheme) -> Result<VerifyOutcome, Failure> {
    struct ExactN<'a>(&'a bitprobe::schemes::AdaptiveScheme);
    impl MembershipScheme for ExactN<'_> {
        fn universe(&self) -> usize {
            self.0.m
        }
        fn encode_set(&self, s_set: &[usize]) -> Result<Memory, SchemeError> {
            self.0.encode(s_set)
        }
        fn query_element(&self, mem: &Memory, u: usize) -> Result<bool, SchemeError> {
            self.0.query(mem, u)
        }
    }
    // verify_scheme walks sizes 0..=n; sizes below n are not encodable for
    // the exact-n adaptive shape, so run only the top size by hand
    let mut fail_case: Option<(Vec<usize>, usize, Result<bool, SchemeError>)> = None;
    let mut checked = 0u64;
    bitprobe::probegraph::for_each_combination(sch.m, sch.n, &mut |s_set| {
        if fail_case.is_some() {
            return;
        }
        checked += 1;
        let mem = match ExactN(sch).encode_set(s_set) {
            Ok(mem) => mem,
            Err(e) => {
                fail_case = Some((s_set.to_vec(), 0, Err(e)));
                return;
            }
        };
        for u in 0..sch.m {
            match sch.query(&mem, u) {
                Ok(got) if got == s_set.contains(&u) => {}
                other => {
                    fail_case = Some((s_set.to_vec(), u, other));
                    return;
                }
            }
        }
    });
    Ok(match fail_case {
        None => VerifyOutcome::Pass { sets_checked: checked },
        Some((s_set, u, got)) => VerifyOutcome::Fail { s_set, u, got },
    })
}

fn verify_probe_map(pm: &ProbeMap3, n: usize, query: QueryFunction3) -> Result<(), Failure> {
    let mut checked = 0u64;
    for k in 0..=n.min(pm.m) {
        let mut bad_set: Option<Vec<usize>> = None;
        let mut err: Option<LowerLabError> = None;
        bitprobe::probegraph::for_each_combination(pm.m, k, &mut |s_set| {
            if bad_set.is_some() || err.is_some() {
                return;
            }
            checked += 1;
            match satisfiable_for_set(pm, query, s_set, enum_bits()) {
                Ok(SatOutcome::Sat(_)) => {}
                Ok(SatOutcome::Unsat) => bad_set = Some(s_set.to_vec()),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(lower_error(e));
        }
        if let Some(s) = bad_set {
            let set1 = s.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",");
            println!("verify=fail set={set1}");
            return Err(fail(1, "a set has no satisfying memory"));
        }
    }
    println!("verify=pass sets={checked}");
    Ok(())
}

fn cmd_search(
    m: usize,
    n: usize,
    t: usize,
    table: Option<String>,
    all_functions: bool,
    s_cap: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let cap = s_cap.unwrap_or(m);
    let run_one = |f: &QueryTable| min_space_search_tuples(m, n, t, f, cap, enum_bits());
    let tables = || (0..1u64 << (1 << t)).map(|bits| QueryTable::new(t, bits));
    if all_functions || table.is_none() {
        if t > 3 {
            return Err(fail(2, "sweeping all functions needs t ≤ 3; pass --fn"));
        }
        let mut best: Option<(usize, QueryTable, bitprobe::lowerlab::TupleProbeMap)> = None;
        for f in tables() {
            let found = run_one(&f).map_err(lower_error)?;
            if all_functions {
                match &found {
                    Some((s, _)) => println!("fn={} s={s}", f.to_hex()),
                    None => println!("fn={} s=none", f.to_hex()),
                }
            }
            if let Some((s, map)) = found {
                if best.as_ref().map(|(b, _, _)| s < *b).unwrap_or(true) {
                    best = Some((s, f, map));
                }
            }
        }
        match best {
            Some((s, f, map)) => {
                println!("s={s} fn={}", f.to_hex());
                maybe_write_map(out, &map, n, &f)?;
            }
            None => println!("s=none"),
        }
        return Ok(());
    }
    let hex = table.unwrap();
    let f = QueryTable::from_hex(t, &hex)
        .ok_or_else(|| fail(2, format!("bad arity-{t} truth table `{hex}`")))?;
    match run_one(&f).map_err(lower_error)? {
        Some((s, map)) => {
            println!("s={s} fn={}", f.to_hex());
            maybe_write_map(out, &map, n, &f)?;
        }
        None => println!("s=none"),
    }
    Ok(())
}

fn maybe_write_map(
    out: Option<PathBuf>,
    map: &bitprobe::lowerlab::TupleProbeMap,
    n: usize,
    f: &QueryTable,
) -> Result<(), Failure> {
    let Some(path) = out else { return Ok(()) };
    if map.t != 3 {
        return Err(fail(2, "--out writes probe-map-3 files; map has t ≠ 3"));
    }
    if map.rows.iter().any(|r| r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) {
        return Err(fail(2, "--out needs distinct probes per element"));
    }
    let pm = ProbeMap3::new(
        map.m,
        map.s,
        Layout::SingleArray,
        map.rows.iter().map(|r| r[0]).collect(),
        map.rows.iter().map(|r| r[1]).collect(),
        map.rows.iter().map(|r| r[2]).collect(),
    );
    // both tables index the truth table by 4x + 2y + z
    let file = SchemeFile::ProbeMap { pm, n, query: QueryFunction3::new(f.bits as u8) };
    write(&path, &serialize_scheme(&file))?;
    println!("out={}", path.display());
    Ok(())
}

fn cmd_witness(scheme: &PathBuf, out: &PathBuf) -> Result<(), Failure> {
    let SchemeFile::ProbeMap { pm, n, query } = read_scheme(scheme)? else {
        return Err(fail(2, "witness needs a probe-map-3 scheme file"));
    };
    let strategy = classify(query).strategy;
    let witness: Witness = match strategy {
        Strategy::MajorityModelGraph => {
            if pm.layout != Layout::SingleArray {
                return Err(fail(2, "forcing runs on single-array maps"));
            }
            match detect_forced(&build_model_graph(&pm), n) {
                DetectOutcome::Forced(w) => w,
                DetectOutcome::NotForced => {
                    println!("outcome=not-forced");
                    return Err(fail(1, "no forced configuration found"));
                }
            }
        }
        Strategy::Density => match density_witness(&pm, query, n).map_err(lower_error)? {
            Some(w) => w,
            None => {
                println!("outcome=no-witness");
                return Err(fail(1, "no density witness found"));
            }
        },
        Strategy::Dimension => match dependency_witness(&pm, query).map_err(lower_error)? {
            Some(w) => w,
            None => {
                println!("outcome=no-witness");
                return Err(fail(1, "probe vectors are independent"));
            }
        },
        Strategy::Degree => {
            let lhs = binomial_u128(pm.m, n);
            let rhs: u128 = (0..=2 * n).map(|k| binomial_u128(3 * pm.s, k)).sum();
            Witness::new(
                WitnessKind::Rank,
                vec![],
                vec![],
                WitnessPayload::Rank { m: pm.m, n, s: pm.s, lhs, rhs },
            )
        }
        Strategy::Height2 => {
            return Err(fail(7, format!("class of {} has a height-2 decision tree; no lower-bound argument applies", query.to_hex())));
        }
    };
    println!("kind={}", witness.kind);
    let file = WitnessFile { pm, n, query, witness };
    write(out, &serialize_witness(&file))?;
    println!("out={}", out.display());
    Ok(())
}

fn cmd_check(witness: &PathBuf) -> Result<(), Failure> {
    let file = parse_witness(&read(witness)?)
        .map_err(|e| fail(2, format!("{}: {e}", witness.display())))?;
    match check_witness(&file.pm, file.query, &file.witness, enum_bits()) {
        CheckOutcome::Confirmed => {
            println!("verdict=confirmed");
            Ok(())
        }
        CheckOutcome::Refuted => {
            println!("verdict=refuted");
            Err(fail(1, "witness does not hold"))
        }
        CheckOutcome::Inconclusive => {
            println!("verdict=inconclusive");
            Err(fail(6, "enumeration over budget and propagation undecided"))
        }
    }
}

fn cmd_bench(seed: u64) -> Result<(), Failure> {
    use std::time::Instant;
    println!("kind,m,n,t,bits,build_ms,encode_us,query_us");
    let row = |kind: &str, m: usize, n: usize, t: usize, build: &dyn Fn() -> Result<Box<dyn MembershipScheme>, SchemeError>| -> Result<(), Failure> {
        let t0 = Instant::now();
        let sch = build().map_err(scheme_error)?;
        let build_ms = t0.elapsed().as_secs_f64() * 1e3;
        let set: Vec<usize> = (0..n).collect();
        let t1 = Instant::now();
        let mem = sch.encode_set(&set).map_err(scheme_error)?;
        let encode_us = t1.elapsed().as_secs_f64() * 1e6;
        let t2 = Instant::now();
        for u in 0..m {
            sch.query_element(&mem, u).map_err(scheme_error)?;
        }
        let query_us = t2.elapsed().as_secs_f64() * 1e6 / m as f64;
        println!("{kind},{m},{n},{t},{},{build_ms:.2},{encode_us:.1},{query_us:.2}", mem.len());
        Ok(())
    };
    for m in [16usize, 36, 64] {
        row("grid", m, 1, 2, &move || Ok(Box::new(grid_scheme_n1(m))))?;
        row("charvec", m, 2, 1, &move || Ok(Box::new(characteristic_vector_scheme(m, 2))))?;
    }
    for (m, n, t) in [(8usize, 1usize, 3usize), (12, 1, 5)] {
        row("nonadaptive", m, n, t, &move || {
            let s = 2 * expansion_range(m, n);
            build_admissible_nonadaptive(m, n, t, s, seed, 1000, DEFAULT_SUBSET_BUDGET)
                .map(|(sch, _)| Box::new(sch) as Box<dyn MembershipScheme>)
        })?;
    }
    Ok(())
}
