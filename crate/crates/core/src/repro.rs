//! The reproduction suite: eleven numbered checks tying the solvers,
//! checkers and oracle together on fixed and seeded random instances.
//! Shared by the `repro` subcommand and the `acceptance` test target.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::algorithms::{
    equitable_cut, greedy_two_agents, solve_ef1_ts_n4, solve_ef1_wts, solve_forest_ef1_so_observed, Case, Routine,
    SolveError, SolveTrace,
};
use crate::allocation::{
    check_ef, check_ef1, check_so, check_ts, check_wts, AllocationError, FairnessReport, SoVerdict,
};
use crate::graph::{Graph, Vertex};
use crate::instances::{
    gen_appendix_a, gen_appendix_b, gen_complete_bipartite, gen_cycle, gen_fig1, gen_fig3, gen_path, gen_random_forest,
    gen_random_graph, gen_star, Instance,
};
use crate::oracle::{
    oracle_completable_ef1, oracle_exists, oracle_max_cut, oracle_pareto, OracleCaps, OracleQuery, Predicate,
};
use crate::rng::SplitMix64;
use crate::valuation::{cut_value, BundleStats};
use crate::Allocation;

/// One entry of the suite.
#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    /// Short name accepted by `--only`.
    pub key: &'static str,
    pub claim: &'static str,
    /// Wall-clock limit, if the check has one.
    pub limit: Option<Duration>,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        key: "nonexistence",
        claim: "three agents: no EF1+TS allocation on fig3 (d=3,5), EF1+wTS exists",
        limit: Some(Duration::from_secs(1)),
    },
    Criterion {
        id: 2,
        key: "ts",
        claim: "n>=4: EF1+TS solver output verified, oracle confirms existence",
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 3,
        key: "wts",
        claim: "EF1+wTS with non-empty bundles for n in 2..=6",
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 4,
        key: "equitable",
        claim: "equitable cuts: pairwise value gap at most the maximum degree",
        limit: None,
    },
    Criterion {
        id: 5,
        key: "forest",
        claim: "forests: EF1 and no monochromatic edge, EF1 after every case",
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 6,
        key: "two-agents",
        claim: "two agents: greedy is EF+TS, at most the max cut, equal on bipartite graphs",
        limit: None,
    },
    Criterion {
        id: 7,
        key: "structure",
        claim: "chores for at most two bundles, all-chores half bound, single violator",
        limit: None,
    },
    Criterion {
        id: 8,
        key: "potential",
        claim: "potential: TS moves keep it and raise welfare, wTS moves raise it",
        limit: None,
    },
    Criterion {
        id: 9,
        key: "completion",
        claim: "an EF1 partial allocation that no placement of the last item keeps EF1",
        limit: None,
    },
    Criterion {
        id: 10,
        key: "examples",
        claim: "worked example values and SO/PO/TS/wTS classifications",
        limit: None,
    },
    Criterion {
        id: 11,
        key: "multipartite",
        claim: "multipartite family audit: verdicts for n=3,4 recorded",
        limit: Some(Duration::from_secs(300)),
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub key: &'static str,
    pub claim: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed_ms: u64,
}

impl Outcome {
    /// One table row: `[PASS]  2 ts          1234 ms  detail`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<12} {:>7} ms  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.elapsed_ms,
            self.detail
        )
    }
}

/// Criteria whose id or key matches `only` (all when `None`). Unknown
/// filters select nothing.
pub fn select(only: Option<&str>) -> Vec<Criterion> {
    CRITERIA
        .iter()
        .copied()
        .filter(|c| match only {
            None => true,
            Some(f) => {
                let f = f.trim();
                f == c.key || f.parse::<u8>() == Ok(c.id)
            }
        })
        .collect()
}

/// Runs one criterion with the given oracle caps.
pub fn run(c: Criterion, caps: &OracleCaps) -> Outcome {
    let started = Instant::now();
    let result = match c.id {
        1 => nonexistence(caps),
        2 => ts_many_agents(caps),
        3 => wts_universal(),
        4 => equitable(),
        5 => forests(),
        6 => two_agents(caps),
        7 => structure(),
        8 => potential(),
        9 => completion(caps),
        10 => examples(caps),
        11 => multipartite(caps),
        _ => Err(format!("no criterion {}", c.id)),
    };
    let elapsed = started.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(limit) = c.limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; took {elapsed:?}, limit {limit:?}");
        }
    }
    Outcome {
        id: c.id,
        key: c.key,
        claim: c.claim,
        passed,
        detail,
        elapsed_ms: elapsed.as_millis() as u64,
    }
}

type Check = Result<String, String>;

fn holds(r: Result<FairnessReport, AllocationError>) -> Result<bool, String> {
    r.map(|r| r.holds).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solver<T>(label: &str, r: Result<T, SolveError>) -> Result<T, String> {
    r.map_err(|e| format!("{label}: {e}"))
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `n^m` if it fits within `max_states`.
fn within(n: usize, m: usize, max_states: u64) -> bool {
    (n as u64).checked_pow(m as u32).is_some_and(|s| s <= max_states)
}

fn exists(g: &Graph, n: usize, preds: &[Predicate], caps: &OracleCaps, symmetry: bool) -> Result<bool, String> {
    let q = OracleQuery::exists(preds)
        .with_caps(*caps)
        .with_symmetry(symmetry)
        .with_threads(threads());
    oracle_exists(g, n, &q).map(|r| r.found()).map_err(|e| e.to_string())
}

/// Seeded random graph for case `i` of a suite.
fn random_graph(rng: &mut SplitMix64, m_lo: usize, m_hi: usize) -> Instance {
    let m = rng.range_inclusive(m_lo, m_hi);
    let p = 0.15 + 0.55 * rng.next_f64();
    gen_random_graph(m, p, rng.next_u64()).expect("m >= 2 and p in range")
}

/// Instances of the EF1+TS suite: `(instance, n)` with n in 4..=6, m <= 14.
pub fn ts_instances() -> Vec<(Instance, usize)> {
    let mut rng = SplitMix64::new(0x7453_0002);
    (0..1000)
        .map(|_| {
            let n = rng.range_inclusive(4, 6);
            (random_graph(&mut rng, n.max(5), 14), n)
        })
        .collect()
}

/// Instances of the EF1+wTS suite: n in 2..=6, random graphs and forests.
pub fn wts_instances() -> Vec<(Instance, usize)> {
    let mut rng = SplitMix64::new(0x7753_0003);
    (0..1000)
        .map(|i| {
            let n = rng.range_inclusive(2, 6);
            let inst = if i % 5 == 4 {
                let m = rng.range_inclusive(n.max(4), 20);
                let trees = rng.range_inclusive(1, m / 4);
                gen_random_forest(m, trees, rng.next_u64()).expect("2 * trees <= m")
            } else {
                random_graph(&mut rng, n.max(3), 16)
            };
            (inst, n)
        })
        .collect()
}

fn nonexistence(caps: &OracleCaps) -> Check {
    let mut notes = Vec::new();
    for d in [3, 5] {
        let g = gen_fig3(d).map_err(|e| e.to_string())?.graph;
        let ts = exists(&g, 3, &[Predicate::Ef1, Predicate::Ts], caps, false)?;
        ensure(!ts, || format!("fig3 d={d}: found an EF1+TS allocation"))?;
        let wts = exists(&g, 3, &[Predicate::Ef1, Predicate::Wts], caps, false)?;
        ensure(wts, || format!("fig3 d={d}: no EF1+wTS allocation"))?;
        notes.push(format!("d={d}: 3^{} states, EF1+TS absent, EF1+wTS found", d + 2));
    }
    Ok(notes.join("; "))
}

fn ts_many_agents(caps: &OracleCaps) -> Check {
    let mut confirmed = 0;
    let instances = ts_instances();
    for (inst, n) in &instances {
        let g = &inst.graph;
        let (a, _) = solver(&inst.label, solve_ef1_ts_n4(g, *n))?;
        let ok = holds(check_ef1(g, &a))? && holds(check_ts(g, &a))?;
        ensure(ok, || format!("{} n={n}: output fails EF1 or TS", inst.label))?;
        if within(*n, g.num_vertices(), caps.max_states) {
            let found = exists(g, *n, &[Predicate::Ef1, Predicate::Ts], caps, true)?;
            ensure(found, || {
                format!("{} n={n}: oracle finds no EF1+TS allocation", inst.label)
            })?;
            confirmed += 1;
        }
    }
    Ok(format!(
        "{} instances verified, {confirmed} confirmed by the oracle",
        instances.len()
    ))
}

fn wts_universal() -> Check {
    let instances = wts_instances();
    for (inst, n) in &instances {
        let g = &inst.graph;
        let (a, _) = solver(&inst.label, solve_ef1_wts(g, *n))?;
        let ok = holds(check_ef1(g, &a))? && holds(check_wts(g, &a))? && a.all_nonempty() && a.is_complete();
        ensure(ok, || {
            format!("{} n={n}: output fails EF1, wTS or non-emptiness", inst.label)
        })?;
    }
    Ok(format!("{} instances verified", instances.len()))
}

fn gap(g: &Graph, a: &Allocation) -> i64 {
    let v = a.values(g).expect("solver output matches graph");
    v.iter().max().unwrap_or(&0) - v.iter().min().unwrap_or(&0)
}

/// Instances named in the worked examples and constructions.
fn named_instances() -> Vec<Instance> {
    let mut out = vec![gen_fig1(), gen_appendix_a(), gen_cycle(6).expect("valid")];
    out.extend([3, 5, 7].map(|d| gen_fig3(d).expect("odd d")));
    out.extend((3..=6).map(|n| gen_appendix_b(n).expect("n >= 3")));
    out
}

fn equitable() -> Check {
    let mut rng = SplitMix64::new(0x6571_0004);
    let mut worst = 0i64;
    for _ in 0..500 {
        let n = rng.range_inclusive(2, 6);
        let inst = random_graph(&mut rng, n.max(3), 16);
        let g = &inst.graph;
        let (a, _) = solver(&inst.label, equitable_cut(g, n))?;
        let delta = g.max_degree() as i64;
        ensure(gap(g, &a) <= delta, || {
            format!("{} n={n}: gap {} > {delta}", inst.label, gap(g, &a))
        })?;
        worst = worst.max(gap(g, &a) - delta);
    }
    let mut named = 0;
    for inst in named_instances() {
        let g = &inst.graph;
        for n in 2..=6.min(g.num_vertices()) {
            let (a, _) = solver(&inst.label, equitable_cut(g, n))?;
            let delta = g.max_degree() as i64;
            ensure(gap(g, &a) <= delta, || {
                format!("{} n={n}: gap {} > {delta}", inst.label, gap(g, &a))
            })?;
            named += 1;
        }
    }
    Ok(format!(
        "500 random graphs and {named} named cases within the bound (max gap - degree = {worst})"
    ))
}

fn forests() -> Check {
    let mut rng = SplitMix64::new(0x666f_0005);
    let mut cases = 0usize;
    let mut leaf_roots = 0usize;
    for _ in 0..500 {
        let n = rng.range_inclusive(2, 5);
        let m = rng.range_inclusive(n.max(2), 30);
        let trees = rng.range_inclusive(1, (m / 4).max(1));
        let inst = gen_random_forest(m, trees, rng.next_u64()).map_err(|e| e.to_string())?;
        let g = &inst.graph;
        let mut failure: Option<String> = None;
        let result = solve_forest_ef1_so_observed(g, n, |step| {
            cases += 1;
            if failure.is_some() {
                return;
            }
            let partial = Allocation::from_stats(step.stats);
            if !check_ef1(step.stats.graph(), &partial).is_ok_and(|r| r.holds) {
                failure = Some(format!("not EF1 after case {}", step.case));
            }
            // Grandchildren of o_t handed out by the catch-up loops can leave
            // leaf roots behind; counted, not required.
            if step.forest.roots().any(|r| step.forest.children(r).is_empty()) {
                leaf_roots += 1;
            }
        });
        let (a, _) = solver(&format!("{} n={n}", inst.label), result)?;
        if let Some(f) = failure {
            return Err(format!("{} n={n}: {f}", inst.label));
        }
        let mono = g
            .edges()
            .iter()
            .filter(|&&(u, v)| a.bundles().iter().any(|b| b.contains(&u) && b.contains(&v)))
            .count();
        ensure(mono == 0, || {
            format!("{} n={n}: {mono} monochromatic edges", inst.label)
        })?;
        ensure(holds(check_ef1(g, &a))?, || {
            format!("{} n={n}: output not EF1", inst.label)
        })?;
    }
    Ok(format!(
        "500 forests verified, {cases} intermediate cases EF1 ({leaf_roots} left a leaf frontier root)"
    ))
}

/// Bipartite graphs on which the greedy cut is compared with the maximum.
fn bipartite_instances() -> Vec<Instance> {
    let mut out = vec![gen_fig1(), gen_appendix_a()];
    out.extend((2..=12).map(|k| gen_path(k).expect("k >= 2")));
    out.extend((2..=9).map(|k| gen_cycle(2 * k).expect("even cycle")));
    out.extend((1..=8).map(|k| gen_star(k).expect("k >= 1")));
    for a in 1..=5 {
        for b in a..=6 {
            out.push(gen_complete_bipartite(a, b).expect("a, b >= 1"));
        }
    }
    let mut rng = SplitMix64::new(0x6269_0006);
    for _ in 0..40 {
        let m = rng.range_inclusive(4, 16);
        let trees = rng.range_inclusive(1, m / 4);
        out.push(gen_random_forest(m, trees, rng.next_u64()).expect("2 * trees <= m"));
    }
    out
}

fn two_agents(caps: &OracleCaps) -> Check {
    let mut rng = SplitMix64::new(0x7477_0006);
    let mut compared = 0;
    let mut optimal = 0;
    for _ in 0..500 {
        let inst = random_graph(&mut rng, 2, 18);
        let g = &inst.graph;
        let (a, _) = solver(&inst.label, greedy_two_agents(g))?;
        let ok = holds(check_ef(g, &a))? && holds(check_ts(g, &a))?;
        ensure(ok, || format!("{}: greedy output fails EF or TS", inst.label))?;
        if g.num_vertices() <= 18 {
            let (_, best) = oracle_max_cut(g, caps).map_err(|e| e.to_string())?;
            let cut = a.values(g).expect("matches")[0];
            ensure(cut <= best, || {
                format!("{}: greedy cut {cut} exceeds max cut {best}", inst.label)
            })?;
            compared += 1;
            optimal += usize::from(cut == best);
        }
    }
    let bipartite = bipartite_instances();
    let mut below = Vec::new();
    for inst in &bipartite {
        let g = &inst.graph;
        let (a, _) = solver(&inst.label, greedy_two_agents(g))?;
        let ok = holds(check_ef(g, &a))? && holds(check_ts(g, &a))?;
        ensure(ok, || format!("{}: greedy output fails EF or TS", inst.label))?;
        let (_, best) = oracle_max_cut(g, caps).map_err(|e| e.to_string())?;
        let cut = a.values(g).expect("matches")[0];
        if cut != best {
            below.push(format!("{} ({cut} < {best})", inst.label));
        }
    }
    if !below.is_empty() {
        return Err(format!(
            "greedy cut below the max cut on {} of {} bipartite graphs: {}",
            below.len(),
            bipartite.len(),
            below.join(", ")
        ));
    }
    Ok(format!(
        "500 random graphs EF+TS, {compared} compared with the max cut ({optimal} optimal); {} bipartite graphs optimal",
        bipartite.len()
    ))
}

/// A random complete allocation; bundle weights are skewed so that small
/// and empty bundles occur.
fn random_state(
    rng: &mut SplitMix64,
    m_lo: usize,
    m_hi: usize,
    n_lo: usize,
    n_hi: usize,
) -> (Graph, Vec<Option<usize>>, usize) {
    let inst = random_graph(rng, m_lo, m_hi);
    let n = rng.range_inclusive(n_lo, n_hi);
    let weights: Vec<u64> = (0..n).map(|_| 1 + rng.below(6)).collect();
    let total: u64 = weights.iter().sum();
    let assignment = (0..inst.graph.num_vertices())
        .map(|_| {
            let mut x = rng.below(total);
            let mut b = 0;
            while x >= weights[b] {
                x -= weights[b];
                b += 1;
            }
            Some(b)
        })
        .collect();
    (inst.graph, assignment, n)
}

const STATES: usize = 10_000;
const SWEEP_GRAPHS: usize = 40;

/// Number of bundles the least bundle EF1-envies, when all of them consist
/// of chores for it; `None` when that premise fails or nothing is envied.
fn chore_violators(stats: &BundleStats<'_>) -> Option<usize> {
    let n = stats.num_bundles();
    let least = (0..n).min_by_key(|&b| (stats.value(b), b))?;
    let v1 = stats.value(least);
    let envied: Vec<usize> = (0..n)
        .filter(|&k| k != least && stats.min_drop(k).is_some_and(|(_, d)| v1 < d))
        .collect();
    let all_chores = envied
        .iter()
        .all(|&k| stats.bundle(k).iter().all(|&o| stats.gain(least, o) <= 0));
    (all_chores && !envied.is_empty()).then_some(envied.len())
}

fn structure() -> Check {
    let mut rng = SplitMix64::new(0x7374_0007);
    // Chores for at most two bundles; at least two strict goods when n >= 4.
    for s in 0..STATES {
        let (g, asg, n) = random_state(&mut rng, 3, 14, 2, 7);
        let stats = BundleStats::from_assignment(&g, n, &asg).map_err(|e| e.to_string())?;
        for o in 0..g.num_vertices() {
            let non_positive = (0..n).filter(|&b| stats.gain(b, o) <= 0).count();
            ensure(non_positive <= 2, || {
                format!("state {s}: vertex {o} is a chore for {non_positive} bundles")
            })?;
            ensure(n < 4 || n - non_positive >= 2, || {
                format!("state {s}: vertex {o} is a good for fewer than two bundles")
            })?;
        }
    }
    // All-chores half bound: bundle i is worth at least half of the bundles
    // consisting only of chores for i.
    let mut nontrivial = 0;
    for s in 0..STATES {
        let (g, asg, n) = random_state(&mut rng, 3, 14, 2, 7);
        let stats = BundleStats::from_assignment(&g, n, &asg).map_err(|e| e.to_string())?;
        for i in 0..n {
            let x: Vec<usize> = (0..n)
                .filter(|&k| k != i && stats.bundle(k).iter().all(|&o| stats.gain(i, o) <= 0))
                .collect();
            let sum: i64 = x.iter().map(|&k| stats.value(k)).sum();
            nontrivial += usize::from(sum > 0);
            ensure(2 * stats.value(i) >= sum, || {
                format!("state {s}: bundle {i} worth {} < half of {sum}", stats.value(i))
            })?;
        }
    }
    // Single violator: when every bundle the least bundle EF1-envies holds
    // only chores for it, there is at most one such bundle. The premise is
    // rare in random states, so all 3-allocations of small random graphs are
    // scanned as well.
    let mut premise = 0;
    for s in 0..STATES {
        let (g, asg, n) = random_state(&mut rng, 3, 14, 2, 7);
        let stats = BundleStats::from_assignment(&g, n, &asg).map_err(|e| e.to_string())?;
        if let Some(count) = chore_violators(&stats) {
            premise += 1;
            ensure(count <= 1, || format!("state {s}: {count} envied all-chore bundles"))?;
        }
    }
    let caps = OracleCaps::default();
    let mut scanned = 0u64;
    for _ in 0..SWEEP_GRAPHS {
        let inst = random_graph(&mut rng, 9, 9);
        let g = &inst.graph;
        for a in crate::oracle::enumerate_allocations(g, 3, true, &caps).map_err(|e| e.to_string())? {
            scanned += 1;
            let stats = a.stats(g).map_err(|e| e.to_string())?;
            if let Some(count) = chore_violators(&stats) {
                premise += 1;
                ensure(count <= 1, || {
                    format!("{} {:?}: {count} envied all-chore bundles", inst.label, a.bundles())
                })?;
            }
        }
    }
    ensure(premise > 0, || "single-violator premise never met".into())?;
    Ok(format!(
        "3 x {STATES} random states and {scanned} enumerated; half bound non-trivial {nontrivial} times, \
         single-violator premise met {premise} times"
    ))
}

/// Checks the move-level potential claims on one trace.
fn potential_trace(label: &str, trace: &SolveTrace) -> Result<(usize, usize), String> {
    let mut ts = 0;
    let mut wts = 0;
    for m in &trace.moves {
        match m.routine {
            Routine::TsSubroutine => {
                ts += 1;
                ensure(m.phi_after >= m.phi_before, || {
                    format!("{label}: TS move of {} lowers the potential", m.vertex)
                })?;
                ensure(m.welfare_after > m.welfare_before, || {
                    format!("{label}: TS move of {} does not raise welfare", m.vertex)
                })?;
            }
            Routine::WtsSubroutine => {
                wts += 1;
                ensure(m.phi_after > m.phi_before, || {
                    format!("{label}: wTS move of {} does not raise the potential", m.vertex)
                })?;
            }
            _ => {}
        }
    }
    for w in trace.cases.windows(2) {
        if w[0].case == Case::II && w[1].case == Case::II {
            ensure(w[1].phi_after > w[0].phi_before, || {
                format!("{label}: two consecutive Case II steps without a potential increase")
            })?;
        }
    }
    Ok((ts, wts))
}

fn potential() -> Check {
    let mut ts = 0;
    let mut wts = 0;
    let mut case_two = 0;
    for (inst, n) in ts_instances() {
        let (_, trace) = solver(&inst.label, solve_ef1_ts_n4(&inst.graph, n))?;
        let (a, b) = potential_trace(&format!("{} n={n}", inst.label), &trace)?;
        ts += a;
        wts += b;
        case_two += trace.cases.iter().filter(|c| c.case == Case::II).count();
    }
    for (inst, n) in wts_instances() {
        let (_, trace) = solver(&inst.label, solve_ef1_wts(&inst.graph, n))?;
        let (a, b) = potential_trace(&format!("{} n={n}", inst.label), &trace)?;
        ts += a;
        wts += b;
    }
    Ok(format!(
        "{ts} TS moves, {wts} wTS moves, {case_two} Case II steps checked"
    ))
}

fn completion(caps: &OracleCaps) -> Check {
    let inst = gen_appendix_a();
    let g = &inst.graph;
    let partial = inst.partial.as_ref().ok_or("appendixA has no partial allocation")?;
    ensure(holds(check_ef1(g, partial))?, || "partial allocation is not EF1".into())?;
    let free: Vec<Vertex> = (0..g.num_vertices())
        .filter(|&v| partial.assignment()[v].is_none())
        .collect();
    ensure(free == [1], || {
        format!("expected only vertex 1 unassigned, got {free:?}")
    })?;
    for b in 0..partial.num_bundles() {
        let mut bundles = partial.bundles().to_vec();
        bundles[b].push(1);
        let a = Allocation::new(g.num_vertices(), bundles).map_err(|e| e.to_string())?;
        ensure(!holds(check_ef1(g, &a))?, || {
            format!("placing vertex 1 in bundle {b} keeps EF1")
        })?;
    }
    let completable = oracle_completable_ef1(g, partial, caps).map_err(|e| e.to_string())?;
    ensure(!completable, || "oracle found an EF1 completion".into())?;
    Ok("partial allocation is EF1; all 4 placements of the free vertex break EF1".into())
}

fn alloc(m: usize, bundles: &[&[Vertex]]) -> Result<Allocation, String> {
    Allocation::new(m, bundles.iter().map(|b| b.to_vec()).collect()).map_err(|e| e.to_string())
}

fn examples(caps: &OracleCaps) -> Check {
    let fig1 = gen_fig1().graph;
    // Vertex o_k of the figure is k - 1.
    ensure(cut_value(&fig1, [0]) == 4, || "v({o1}) != 4".into())?;
    ensure(cut_value(&fig1, [0, 2]) == 3, || "v({o1,o3}) != 3".into())?;
    ensure(cut_value(&fig1, [1, 2]) == 2, || "v({o2,o3}) != 2".into())?;
    let single = alloc(8, &[&[0], &[1], &[]])?.stats(&fig1).map_err(|e| e.to_string())?;
    ensure(single.marginal_add(0, 2) == Ok(-1), || {
        "o3 is not a -1 chore for {o1}".into()
    })?;
    ensure(single.marginal_add(1, 2) == Ok(1), || {
        "o3 is not a good for {o2}".into()
    })?;
    let pair = alloc(8, &[&[0, 2]])?.stats(&fig1).map_err(|e| e.to_string())?;
    ensure(pair.marginal_remove(0, 2) == Ok(1), || {
        "removing o3 from {o1,o3} does not gain 1".into()
    })?;

    let ts_not_po = alloc(8, &[&[0, 4], &[1, 5], &[2, 6], &[3, 7]])?;
    ensure(holds(check_ts(&fig1, &ts_not_po))?, || {
        "4-agent allocation is not TS".into()
    })?;
    let dominator = alloc(8, &[&[0, 5, 6], &[4], &[1, 2], &[3, 7]])?;
    let mut before = ts_not_po.values(&fig1).map_err(|e| e.to_string())?;
    let mut after = dominator.values(&fig1).map_err(|e| e.to_string())?;
    before.sort_unstable();
    after.sort_unstable();
    ensure(crate::oracle::dominates(&after, &before), || {
        "stated dominator does not dominate".into()
    })?;
    ensure(
        !oracle_pareto(&fig1, &ts_not_po, caps).map_err(|e| e.to_string())?,
        || "4-agent allocation is PO".into(),
    )?;

    let c6 = gen_cycle(6).map_err(|e| e.to_string())?.graph;
    let pairs = alloc(6, &[&[0, 1], &[2, 3], &[4, 5]])?;
    ensure(holds(check_wts(&c6, &pairs))?, || {
        "6-cycle allocation is not wTS".into()
    })?;
    ensure(!holds(check_ts(&c6, &pairs))?, || "6-cycle allocation is TS".into())?;

    let so = alloc(8, &[&[0, 5], &[1], &[2], &[3], &[4], &[6], &[7]])?;
    let report = check_so(&fig1, &so, Some(caps)).map_err(|e| e.to_string())?;
    ensure(report.verdict == SoVerdict::Yes && report.welfare == 14, || {
        format!(
            "7-agent allocation: SO {:?}, welfare {}",
            report.verdict, report.welfare
        )
    })?;
    let po = alloc(8, &[&[0, 4], &[1], &[2], &[3], &[5], &[6], &[7]])?;
    let report = check_so(&fig1, &po, Some(caps)).map_err(|e| e.to_string())?;
    ensure(report.verdict == SoVerdict::No, || {
        "second 7-agent allocation is SO".into()
    })?;
    ensure(oracle_pareto(&fig1, &po, caps).map_err(|e| e.to_string())?, || {
        "second 7-agent allocation is not PO".into()
    })?;
    Ok("values 4, 3, 2, -1, +1 and all four classifications reproduced".into())
}

fn multipartite(caps: &OracleCaps) -> Check {
    let so_ef1 = [Predicate::Ef1, Predicate::So];
    let k16 = gen_appendix_b(3).map_err(|e| e.to_string())?.graph;
    let n3 = exists(&k16, 3, &so_ef1, caps, false)?;
    ensure(n3, || "n=3 (K_{1,6}): expected an EF1+SO witness".into())?;
    let g4 = gen_appendix_b(4).map_err(|e| e.to_string())?.graph;
    let n4 = exists(&g4, 4, &so_ef1, caps, true)?;
    let verdict = |found: bool| if found { "witness found" } else { "absent" };
    let fig3 = gen_fig3(3).map_err(|e| e.to_string())?.graph;
    let fig3_so = exists(&fig3, 3, &so_ef1, caps, false)?;
    ensure(!fig3_so, || "fig3 d=3: found an EF1+SO allocation".into())?;
    Ok(format!(
        "n=3: {} (family statement fails here), n=4: {}; fig3 n=3: EF1+SO absent",
        verdict(n3),
        verdict(n4)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_by_key_and_id() {
        assert_eq!(select(None).len(), 11);
        assert_eq!(select(Some("forest"))[0].id, 5);
        assert_eq!(select(Some("9"))[0].key, "completion");
        assert!(select(Some("nope")).is_empty());
    }

    #[test]
    fn instance_suites_are_deterministic() {
        let a = ts_instances();
        let b = ts_instances();
        assert_eq!(a.len(), 1000);
        assert!(a.iter().zip(&b).all(|(x, y)| x.0.graph == y.0.graph && x.1 == y.1));
        assert!(a
            .iter()
            .all(|(i, n)| (4..=6).contains(n) && i.graph.num_vertices() <= 14));
    }
}
