use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fairdiv::algorithms::{
    dispatch_solve, greedy_two_agents, solve_ef1_ts_n4, solve_ef1_wts, solve_forest_ef1_so, SolveError, SolveGoal,
    SolveTrace,
};
use fairdiv::allocation::{check_alpha_ef1, check_ef, check_ef1, check_so, check_ts, check_wts, Alpha, SoVerdict};
use fairdiv::instances::{self, Instance};
use fairdiv::oracle::{self, Mode, OracleCaps, OracleQuery, Predicate};
use fairdiv::{repro, Allocation, Graph};

/// Fair division of graph vertices under cut valuations.
#[derive(Parser)]
#[command(name = "fairdiv", version)]
struct Cli {
    /// Suppress the summary on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an allocation for a goal and write it as JSON.
    Solve(SolveArgs),
    /// Run checkers on an allocation file.
    Check(CheckArgs),
    /// Exhaustive search over all allocations of a small instance.
    Oracle(OracleArgs),
    /// Write a named or random instance in the text format.
    Gen(GenArgs),
    /// Time the solvers over a sweep of random instances (CSV).
    Bench(BenchArgs),
    /// Run the reproduction suite.
    Repro(ReproArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Named instance, e.g. fig1, fig3:d=5, appendixB:n=4, cycle:6, random:m=10,p=0.3.
    #[arg(long)]
    label: Option<String>,
    /// Instance file in the text format.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Number of agents (defaults to the instance's).
    #[arg(short)]
    n: Option<usize>,
    /// ef-ts-2, ef1-ts, ef1-wts, ef1-so-forest or equitable.
    #[arg(long)]
    goal: SolveGoal,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (standard output by default).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
    /// Allocation JSON with a `bundles` field.
    #[arg(long)]
    alloc: PathBuf,
    /// Comma-separated predicates: ef, ef1, alpha-ef1, ts, wts, so, po, non-empty.
    #[arg(long, default_value = "ef1")]
    pred: String,
    /// Factor for alpha-ef1, as p/q.
    #[arg(long)]
    alpha: Option<Alpha>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle state cap for SO and PO (overrides FAIRDIV_MAX_STATES).
    #[arg(long)]
    max_states: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(short)]
    n: Option<usize>,
    #[arg(long, default_value = "ef1")]
    pred: String,
    #[arg(long)]
    alpha: Option<Alpha>,
    /// exists, find-all or count.
    #[arg(long, default_value = "exists")]
    mode: Mode,
    /// Fix vertex 0 in bundle 0 (exists mode only).
    #[arg(long)]
    symmetry: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    max_states: Option<u64>,
    /// Search for an EF1 completion of the instance's partial allocation
    /// (or of --alloc) instead.
    #[arg(long)]
    complete_partial: bool,
    #[arg(long)]
    alloc: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    label: String,
    #[arg(short)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Vertex counts of the sweep.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
    sizes: Vec<usize>,
    /// Agent counts of the sweep.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
    agents: Vec<usize>,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Run a single criterion, by number or key (e.g. 5 or forest).
    #[arg(long)]
    only: Option<String>,
    #[arg(long)]
    max_states: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code: 2 for input errors, 3 for internal ones.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn solve_failure(e: SolveError) -> Failure {
    let code = match e {
        SolveError::BudgetExceeded { .. } | SolveError::Internal(_) => 3,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

type Outcome = Result<u8, Failure>;
type Solver = fn(&Graph, usize) -> Result<(Allocation, SolveTrace), SolveError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match cli.command {
        Command::Solve(a) => solve(a, quiet),
        Command::Check(a) => check(a, quiet),
        Command::Oracle(a) => run_oracle(a, quiet),
        Command::Gen(a) => generate(a),
        Command::Bench(a) => bench(a, quiet),
        Command::Repro(a) => run_repro(a, quiet),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(source: &Source, seed: u64) -> Result<Instance, Failure> {
    match (&source.label, &source.file) {
        (Some(label), _) => instances::from_label(label, seed).map_err(input),
        (None, Some(path)) => instances::read_instance(path).map_err(input),
        (None, None) => Err(input("one of --label or --file is required")),
    }
}

fn caps(max_states: Option<u64>) -> OracleCaps {
    let caps = OracleCaps::from_env();
    match max_states {
        Some(s) => caps.with_max_states(s),
        None => caps,
    }
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("serializable") + "\n";
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(args: SolveArgs, quiet: bool) -> Outcome {
    let inst = load(&args.source, args.seed)?;
    let n = args.n.unwrap_or(inst.num_agents);
    let g = &inst.graph;
    let solution = dispatch_solve(g, n, args.goal).map_err(solve_failure)?;
    let a = &solution.allocation;
    let values = a.values(g).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    let doc = json!({
        "instance": inst.label,
        "n": n,
        "goal": args.goal.name(),
        "algorithm": solution.algorithm.name(),
        "guarantee_achieved": solution.guarantee,
        "bundles": a.bundles(),
        "bundle_values": values,
        "trace": {
            "iterations": solution.trace.iterations,
            "moves": solution.trace.moves.len(),
            "case_counts": solution.trace.case_counts(),
        },
    });
    emit(&doc, args.out.as_ref())?;
    if !quiet {
        eprintln!(
            "instance    {} (m={}, |E|={}, n={n})",
            inst.label,
            g.num_vertices(),
            g.num_edges()
        );
        eprintln!("algorithm   {}", solution.algorithm.name());
        eprintln!("values      {values:?}");
        eprintln!("guarantee   {}", solution.guarantee.join(", "));
        eprintln!(
            "trace       {} iterations, {} moves, cases {:?}",
            solution.trace.iterations,
            solution.trace.moves.len(),
            solution.trace.case_counts()
        );
    }
    Ok(0)
}

fn check(args: CheckArgs, quiet: bool) -> Outcome {
    let inst = load(&args.source, args.seed)?;
    let g = &inst.graph;
    let a = instances::read_allocation(&args.alloc, g.num_vertices()).map_err(input)?;
    let preds = Predicate::parse_list(&args.pred, args.alpha).map_err(input)?;
    if preds.is_empty() {
        return Err(input("no predicates given"));
    }
    let caps = caps(args.max_states);
    let mut results = Vec::new();
    let mut all_hold = true;
    let mut undecided = false;
    for p in &preds {
        let (holds, report) = check_one(g, &a, *p, &caps)?;
        match holds {
            Some(h) => all_hold &= h,
            None => undecided = true,
        }
        if !quiet {
            let verdict = match holds {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "undecided",
            };
            eprintln!("{:<16} {verdict}", p.name());
        }
        results.push(report);
    }
    let doc = json!({
        "instance": inst.label,
        "n": a.num_bundles(),
        "holds": all_hold && !undecided,
        "results": results,
    });
    emit(&doc, args.out.as_ref())?;
    if undecided {
        return Err(input("SO undecided within the oracle caps; raise --max-states"));
    }
    Ok(if all_hold { 0 } else { 1 })
}

/// Verdict (`None` when undecided) and JSON report for one predicate.
fn check_one(g: &Graph, a: &Allocation, p: Predicate, caps: &OracleCaps) -> Result<(Option<bool>, Value), Failure> {
    let report = match p {
        Predicate::Ef => check_ef(g, a),
        Predicate::Ef1 => check_ef1(g, a),
        Predicate::AlphaEf1(alpha) => check_alpha_ef1(g, a, alpha),
        Predicate::Ts => check_ts(g, a),
        Predicate::Wts => check_wts(g, a),
        Predicate::So => {
            let so = check_so(g, a, Some(caps)).map_err(input)?;
            let holds = match so.verdict {
                SoVerdict::Yes => Some(true),
                SoVerdict::No => Some(false),
                SoVerdict::Unknown => None,
            };
            return Ok((holds, json!({ "predicate": "so", "result": so })));
        }
        Predicate::Po => {
            let po = oracle::oracle_pareto(g, a, caps).map_err(input)?;
            return Ok((Some(po), json!({ "predicate": "po", "holds": po })));
        }
        Predicate::NonEmpty => {
            let ok = a.all_nonempty();
            return Ok((Some(ok), json!({ "predicate": "non-empty", "holds": ok })));
        }
    }
    .map_err(input)?;
    Ok((Some(report.holds), serde_json::to_value(&report).expect("serializable")))
}

fn run_oracle(args: OracleArgs, quiet: bool) -> Outcome {
    let inst = load(&args.source, args.seed)?;
    let g = &inst.graph;
    let caps = caps(args.max_states);
    if args.complete_partial {
        let partial = match &args.alloc {
            Some(path) => instances::read_allocation(path, g.num_vertices()).map_err(input)?,
            None => inst
                .partial
                .clone()
                .ok_or_else(|| input("instance has no partial allocation; pass --alloc"))?,
        };
        let completion = oracle::oracle_ef1_completion(g, &partial, &caps).map_err(input)?;
        let doc = json!({
            "instance": inst.label,
            "n": partial.num_bundles(),
            "partial": partial.bundles(),
            "verdict": if completion.is_some() { "found" } else { "absent" },
            "completion": completion.as_ref().map(|c| c.bundles()),
        });
        emit(&doc, args.out.as_ref())?;
        if !quiet {
            eprintln!(
                "EF1 completion of {} on {}: {}",
                format_bundles(partial.bundles()),
                inst.label,
                if completion.is_some() { "found" } else { "absent" }
            );
        }
        return Ok(if completion.is_some() { 0 } else { 1 });
    }
    let n = args.n.unwrap_or(inst.num_agents);
    let preds = Predicate::parse_list(&args.pred, args.alpha).map_err(input)?;
    let query = OracleQuery::exists(&preds)
        .with_mode(args.mode)
        .with_caps(caps)
        .with_symmetry(args.symmetry)
        .with_threads(args.threads);
    let report = oracle::oracle_exists(g, n, &query).map_err(input)?;
    let mut doc = serde_json::to_value(&report).expect("serializable");
    let map = doc.as_object_mut().expect("object");
    // Timing goes to standard error so that the JSON is reproducible.
    map.remove("elapsed_ms");
    map.insert("instance".into(), json!(inst.label));
    map.insert("n".into(), json!(n));
    let note = multipartite_note(&inst, n, &preds, report.found());
    if let Some(note) = &note {
        map.insert("note".into(), json!(note));
    }
    emit(&doc, args.out.as_ref())?;
    if !quiet {
        eprintln!(
            "{} n={n} [{}]: {} after {} states in {} ms",
            inst.label,
            preds.iter().map(Predicate::name).collect::<Vec<_>>().join(","),
            if report.found() { "found" } else { "absent" },
            report.states_scanned,
            report.elapsed_ms
        );
        if let Some(w) = &report.witness {
            eprintln!("witness     {}", format_bundles(w));
        }
        if let Some(c) = report.count {
            eprintln!("count       {c}");
        }
        if let Some(note) = &note {
            eprintln!("note        {note}");
        }
    }
    Ok(if report.found() { 0 } else { 1 })
}

/// The multipartite family is meant to rule out EF1+SO, but its counting
/// step needs (n-2)(n-1) > 2n, which fails for n <= 4.
fn multipartite_note(inst: &Instance, n: usize, preds: &[Predicate], found: bool) -> Option<String> {
    let family = inst.label.to_ascii_lowercase().starts_with("appendixb");
    let asks = preds.contains(&Predicate::Ef1) && preds.contains(&Predicate::So);
    (family && asks && found).then(|| {
        format!(
            "EF1+SO allocation exists on this family for n={n}; the non-existence argument \
             needs (n-2)(n-1) > 2n, which fails for n <= 4"
        )
    })
}

fn format_bundles(bundles: &[Vec<usize>]) -> String {
    let parts: Vec<String> = bundles
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    parts.join(" | ")
}

fn generate(args: GenArgs) -> Outcome {
    let mut inst = instances::from_label(&args.label, args.seed).map_err(input)?;
    if let Some(n) = args.n {
        inst = inst.with_agents(n);
    }
    write_text(&instances::format_instance(&inst), args.out.as_ref())?;
    Ok(0)
}

fn bench(args: BenchArgs, quiet: bool) -> Outcome {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "m", "|E|", "n", "algorithm", "iterations", "moves", "micros"])
        .map_err(input)?;
    let mut rows = 0;
    for (k, &m) in args.sizes.iter().enumerate() {
        let seed = args.seed.wrapping_add(k as u64);
        let graph = instances::gen_random_graph(m, args.p, seed).map_err(input)?;
        let forest = instances::gen_random_forest(m, (m / 16).max(1), seed).map_err(input)?;
        for &n in &args.agents {
            if n > m {
                continue;
            }
            let mut runs: Vec<(&Instance, &str, Solver)> = vec![(&graph, "ef1-wts", solve_ef1_wts)];
            if n == 2 {
                runs.push((&graph, "greedy-two-agents", |g, _| greedy_two_agents(g)));
            }
            if n >= 4 {
                runs.push((&graph, "ef1-ts-n4", solve_ef1_ts_n4));
            }
            runs.push((&forest, "forest-ef1-so", solve_forest_ef1_so));
            for (inst, name, run) in runs {
                let started = Instant::now();
                let (_, trace) = run(&inst.graph, n).map_err(solve_failure)?;
                let micros = started.elapsed().as_micros();
                w.write_record([
                    inst.label.clone(),
                    m.to_string(),
                    inst.graph.num_edges().to_string(),
                    n.to_string(),
                    name.to_string(),
                    trace.iterations.to_string(),
                    trace.moves.len().to_string(),
                    micros.to_string(),
                ])
                .map_err(input)?;
                rows += 1;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| input(e.to_string()))?;
    write_text(&String::from_utf8(bytes).expect("utf-8"), args.out.as_ref())?;
    if !quiet {
        eprintln!("{rows} runs");
    }
    Ok(0)
}

fn run_repro(args: ReproArgs, quiet: bool) -> Outcome {
    let selected = repro::select(args.only.as_deref());
    if selected.is_empty() {
        return Err(input(format!(
            "no criterion matches `{}`",
            args.only.as_deref().unwrap_or_default()
        )));
    }
    let caps = caps(args.max_states);
    let mut outcomes = Vec::new();
    for c in selected {
        let o = repro::run(c, &caps);
        if !quiet {
            eprintln!("{}", o.line());
        }
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    if !quiet {
        eprintln!("{passed}/{} criteria passed", outcomes.len());
    }
    emit(
        &serde_json::to_value(&outcomes).expect("serializable"),
        args.out.as_ref(),
    )?;
    Ok(if passed == outcomes.len() { 0 } else { 1 })
}
