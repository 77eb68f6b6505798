//! Exhaustive enumeration of assignments `V -> [n]` for small instances.
//!
//! Assignments are visited in lexicographic order of the digit vector
//! `(a(0), a(1), ..., a(m-1))`, so the last vertex changes fastest. Moving
//! between consecutive assignments touches O(1) digits on average, each
//! costing O(deg) with incremental neighbor counts.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::allocation::{self, Allocation, Alpha};
use crate::graph::{Graph, Vertex};

pub const DEFAULT_MAX_STATES: u64 = 20_000_000;
pub const MAX_STATES_ENV: &str = "FAIRDIV_MAX_STATES";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{states} states exceed the cap of {cap}")]
    CapExceeded { states: String, cap: u64 },
    #[error("{m} vertices exceed the cap of {cap}")]
    TooManyVertices { m: usize, cap: usize },
    #[error("{n} agents exceed the cap of {cap}")]
    TooManyAgents { n: usize, cap: usize },
    #[error("partial allocation is not EF1")]
    PartialNotEf1,
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleCaps {
    pub max_m: usize,
    pub max_n: usize,
    pub max_states: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            max_m: 64,
            max_n: 32,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl OracleCaps {
    /// Defaults, with `max_states` taken from `FAIRDIV_MAX_STATES` when set.
    pub fn from_env() -> Self {
        let mut caps = Self::default();
        if let Some(v) = std::env::var(MAX_STATES_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            caps.max_states = v;
        }
        caps
    }

    pub fn with_max_states(mut self, max_states: u64) -> Self {
        self.max_states = max_states;
        self
    }

    /// Number of states `radix^digits`, or an error when above the caps.
    fn admit(&self, m: usize, n: usize, radix: usize, digits: usize) -> Result<u64, OracleError> {
        if m > self.max_m {
            return Err(OracleError::TooManyVertices { m, cap: self.max_m });
        }
        if n > self.max_n {
            return Err(OracleError::TooManyAgents { n, cap: self.max_n });
        }
        let states = (radix as u128).checked_pow(digits as u32);
        match states {
            Some(s) if s <= self.max_states as u128 => Ok(s as u64),
            _ => Err(OracleError::CapExceeded {
                states: states.map_or_else(|| format!("{radix}^{digits}"), |s| s.to_string()),
                cap: self.max_states,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    Ef,
    Ef1,
    AlphaEf1(Alpha),
    Ts,
    Wts,
    Po,
    So,
    NonEmpty,
}

impl Predicate {
    pub fn name(&self) -> String {
        match self {
            Predicate::Ef => "ef".into(),
            Predicate::Ef1 => "ef1".into(),
            Predicate::AlphaEf1(a) => format!("alpha-ef1({a})"),
            Predicate::Ts => "ts".into(),
            Predicate::Wts => "wts".into(),
            Predicate::Po => "po".into(),
            Predicate::So => "so".into(),
            Predicate::NonEmpty => "non-empty".into(),
        }
    }

    // Cheap predicates first.
    fn cost_rank(&self) -> u8 {
        match self {
            Predicate::NonEmpty => 0,
            Predicate::So => 1,
            Predicate::Ef => 2,
            Predicate::Ef1 | Predicate::AlphaEf1(_) => 3,
            Predicate::Po => 4,
            Predicate::Wts => 5,
            Predicate::Ts => 6,
        }
    }

    /// Parses a comma-separated list. `alpha-ef1` takes `alpha` (default 1/2);
    /// `alpha-ef1(p/q)` fixes it inline.
    pub fn parse_list(csv: &str, alpha: Option<Alpha>) -> Result<Vec<Predicate>, String> {
        csv.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let p: Predicate = s.parse()?;
                Ok(match (p, alpha) {
                    (Predicate::AlphaEf1(_), Some(a)) if s == "alpha-ef1" => Predicate::AlphaEf1(a),
                    _ => p,
                })
            })
            .collect()
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "ef" => Predicate::Ef,
            "ef1" => Predicate::Ef1,
            "alpha-ef1" => Predicate::AlphaEf1(Alpha::HALF),
            "ts" => Predicate::Ts,
            "wts" => Predicate::Wts,
            "po" => Predicate::Po,
            "so" => Predicate::So,
            "non-empty" | "nonempty" => Predicate::NonEmpty,
            other => {
                let inner = other
                    .strip_prefix("alpha-ef1(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown predicate `{other}`"))?;
                Predicate::AlphaEf1(inner.parse().map_err(|e: allocation::AllocationError| e.to_string())?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exists,
    FindAll,
    Count,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exists" => Ok(Mode::Exists),
            "find-all" | "find_all" => Ok(Mode::FindAll),
            "count" => Ok(Mode::Count),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleQuery {
    pub predicates: Vec<Predicate>,
    pub mode: Mode,
    #[serde(skip)]
    pub caps: OracleCaps,
    /// Fix vertex 0 in bundle 0. Honored only in `Exists` mode.
    pub symmetry: bool,
    #[serde(skip)]
    pub threads: usize,
}

impl OracleQuery {
    pub fn exists(predicates: &[Predicate]) -> Self {
        Self {
            predicates: predicates.to_vec(),
            mode: Mode::Exists,
            caps: OracleCaps::from_env(),
            symmetry: false,
            threads: 1,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_caps(mut self, caps: OracleCaps) -> Self {
        self.caps = caps;
        self
    }

    pub fn with_symmetry(mut self, on: bool) -> Self {
        self.symmetry = on;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Found,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub query: OracleQuery,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<Vertex>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Vec<Vec<Vertex>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    pub states_scanned: u64,
    pub elapsed_ms: u64,
}

impl OracleReport {
    pub fn found(&self) -> bool {
        self.verdict == Verdict::Found
    }

    pub fn witness_allocation(&self, m: usize) -> Option<Allocation> {
        self.witness
            .clone()
            .map(|b| Allocation::new(m, b).expect("witness is a partition"))
    }
}

/// Incrementally maintained assignment of the free vertices, on top of a
/// fixed base assignment. Digit `n` (when `radix == n + 1`) means unassigned.
#[derive(Clone)]
struct Odometer<'g> {
    graph: &'g Graph,
    n: usize,
    radix: usize,
    free: Vec<Vertex>,
    digits: Vec<usize>,
    assign: Vec<Option<usize>>,
    counts: Vec<u32>,
    values: Vec<i64>,
    sizes: Vec<usize>,
}

impl<'g> Odometer<'g> {
    fn new(graph: &'g Graph, n: usize, base: &[Option<usize>], free: Vec<Vertex>, radix: usize, start: u64) -> Self {
        let m = graph.num_vertices();
        let mut od = Self {
            graph,
            n,
            radix,
            digits: vec![0; free.len()],
            free,
            assign: vec![None; m],
            counts: vec![0; m * n],
            values: vec![0; n],
            sizes: vec![0; n],
        };
        for (v, &b) in base.iter().enumerate() {
            od.set(v, b);
        }
        let mut rest = start;
        for k in (0..od.free.len()).rev() {
            od.digits[k] = (rest % radix as u64) as usize;
            rest /= radix as u64;
        }
        for k in 0..od.free.len() {
            let v = od.free[k];
            od.set(v, od.digit_bundle(od.digits[k]));
        }
        od
    }

    fn digit_bundle(&self, d: usize) -> Option<usize> {
        (d < self.n).then_some(d)
    }

    #[inline]
    fn gain(&self, b: usize, v: Vertex) -> i64 {
        self.graph.degree(v) as i64 - 2 * self.counts[v * self.n + b] as i64
    }

    fn set(&mut self, v: Vertex, to: Option<usize>) {
        let from = self.assign[v];
        if from == to {
            return;
        }
        let n = self.n;
        if let Some(f) = from {
            self.values[f] -= self.gain(f, v);
            self.sizes[f] -= 1;
            for &w in self.graph.neighbors(v) {
                self.counts[w * n + f] -= 1;
            }
        }
        if let Some(t) = to {
            self.values[t] += self.gain(t, v);
            self.sizes[t] += 1;
            for &w in self.graph.neighbors(v) {
                self.counts[w * n + t] += 1;
            }
        }
        self.assign[v] = to;
    }

    /// Steps to the next assignment; false after the last one.
    fn advance(&mut self) -> bool {
        let mut k = self.free.len();
        while k > 0 {
            k -= 1;
            if self.digits[k] + 1 < self.radix {
                self.digits[k] += 1;
                let (v, b) = (self.free[k], self.digit_bundle(self.digits[k]));
                self.set(v, b);
                return true;
            }
            self.digits[k] = 0;
            let (v, b) = (self.free[k], self.digit_bundle(0));
            self.set(v, b);
        }
        false
    }

    fn allocation(&self) -> Allocation {
        Allocation::from_assignment(self.n, &self.assign).expect("odometer assignment is valid")
    }

    fn bundles(&self) -> Vec<Vec<Vertex>> {
        self.allocation().into_bundles()
    }

    fn welfare(&self) -> i64 {
        self.values.iter().sum()
    }

    fn sorted_values(&self) -> Vec<i64> {
        let mut v = self.values.clone();
        v.sort_unstable();
        v
    }

    /// Largest `gain(b, o)` over `o ∈ A_b`, per bundle.
    fn max_gain_in_bundle(&self) -> Vec<i64> {
        let mut best = vec![i64::MIN; self.n];
        for (v, &b) in self.assign.iter().enumerate() {
            if let Some(b) = b {
                best[b] = best[b].max(self.gain(b, v));
            }
        }
        best
    }

    fn alpha_ef1(&self, alpha: Alpha) -> bool {
        let min = *self.values.iter().min().expect("n >= 1");
        let best = self.max_gain_in_bundle();
        (0..self.n).all(|j| {
            let vj = self.values[j];
            vj <= min || alpha.scaled_at_least(min, vj - best[j])
        })
    }

    fn transfer_ok(&self, strict_both: bool) -> bool {
        for (v, &b) in self.assign.iter().enumerate() {
            let Some(i) = b else { continue };
            let d = -self.gain(i, v);
            if strict_both && d <= 0 || !strict_both && d < 0 {
                continue;
            }
            for j in (0..self.n).filter(|&j| j != i) {
                let r = self.gain(j, v);
                let bad = if strict_both { r > 0 } else { r >= 0 && (d > 0 || r > 0) };
                if bad {
                    return false;
                }
            }
        }
        true
    }

    fn satisfies(&self, preds: &[Predicate], ctx: &Context) -> bool {
        preds.iter().all(|p| match p {
            Predicate::NonEmpty => self.sizes.iter().all(|&s| s > 0),
            Predicate::Ef => self.values.iter().all(|&v| v == self.values[0]),
            Predicate::Ef1 => self.alpha_ef1(Alpha::ONE),
            Predicate::AlphaEf1(a) => self.alpha_ef1(*a),
            Predicate::Ts => self.transfer_ok(false),
            Predicate::Wts => self.transfer_ok(true),
            Predicate::So => Some(self.welfare()) == ctx.max_welfare,
            Predicate::Po => ctx
                .pareto_front
                .as_ref()
                .expect("front computed")
                .contains(&self.sorted_values()),
        })
    }
}

#[derive(Default)]
struct Context {
    max_welfare: Option<i64>,
    pareto_front: Option<HashSet<Vec<i64>>>,
}

/// Lazily enumerates every assignment of the vertices to `n` bundles
/// (`complete_only`) or to `n` bundles plus "unassigned".
pub struct AllocationIter<'g> {
    od: Odometer<'g>,
    done: bool,
}

impl Iterator for AllocationIter<'_> {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let a = self.od.allocation();
        self.done = !self.od.advance();
        Some(a)
    }
}

pub fn enumerate_allocations<'g>(
    graph: &'g Graph,
    n: usize,
    complete_only: bool,
    caps: &OracleCaps,
) -> Result<AllocationIter<'g>, OracleError> {
    check_n(n)?;
    let m = graph.num_vertices();
    let radix = if complete_only { n } else { n + 1 };
    caps.admit(m, n, radix, m)?;
    let free: Vec<Vertex> = (0..m).collect();
    Ok(AllocationIter {
        od: Odometer::new(graph, n, &vec![None; m], free, radix, 0),
        done: false,
    })
}

fn check_n(n: usize) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::InvalidInput("need at least one bundle".into()));
    }
    Ok(())
}

/// Complete-assignment scan description shared by the query functions.
struct Scan<'g> {
    graph: &'g Graph,
    n: usize,
    base: Vec<Option<usize>>,
    free: Vec<Vertex>,
    total: u64,
}

impl<'g> Scan<'g> {
    fn complete(graph: &'g Graph, n: usize, caps: &OracleCaps, symmetry: bool) -> Result<Self, OracleError> {
        check_n(n)?;
        let m = graph.num_vertices();
        let mut base = vec![None; m];
        let mut free: Vec<Vertex> = (0..m).collect();
        if symmetry && m > 0 {
            base[0] = Some(0);
            free.remove(0);
        }
        let total = caps.admit(m, n, n, free.len())?;
        Ok(Self {
            graph,
            n,
            base,
            free,
            total,
        })
    }

    fn odometer(&self, start: u64) -> Odometer<'g> {
        Odometer::new(self.graph, self.n, &self.base, self.free.clone(), self.n, start)
    }

    /// Visits every state in order.
    fn for_each(&self, mut f: impl FnMut(&Odometer<'g>)) {
        let mut od = self.odometer(0);
        loop {
            f(&od);
            if !od.advance() {
                break;
            }
        }
    }

    /// Index of the first state in `[0, total)` accepted by `pred`, using
    /// `threads` contiguous chunks merged by least index.
    fn find_first(&self, threads: usize, pred: impl Fn(&Odometer<'g>) -> bool + Sync) -> Option<(u64, Odometer<'g>)> {
        let threads = (threads.max(1) as u64).min(self.total.max(1));
        let best = AtomicU64::new(u64::MAX);
        let chunk = self.total.div_ceil(threads);
        let run = |lo: u64, hi: u64| -> Option<(u64, Odometer<'g>)> {
            if lo >= hi {
                return None;
            }
            let mut od = self.odometer(lo);
            let mut idx = lo;
            loop {
                if idx & 0x3ff == 0 && best.load(Ordering::Relaxed) < lo {
                    return None;
                }
                if pred(&od) {
                    best.fetch_min(idx, Ordering::Relaxed);
                    return Some((idx, od));
                }
                idx += 1;
                if idx >= hi || !od.advance() {
                    return None;
                }
            }
        };
        if threads == 1 {
            return run(0, self.total);
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let (lo, hi) = (t * chunk, ((t + 1) * chunk).min(self.total));
                    let run = &run;
                    s.spawn(move || run(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .filter_map(|h| h.join().expect("oracle worker panicked"))
                .min_by_key(|(idx, _)| *idx)
        })
    }

    /// Folds each chunk independently and returns the chunk results in order.
    fn map_chunks<T: Send>(&self, threads: usize, f: impl Fn(u64, u64, Odometer<'g>) -> T + Sync) -> Vec<T> {
        let threads = (threads.max(1) as u64).min(self.total.max(1));
        let chunk = self.total.div_ceil(threads);
        if threads == 1 {
            return vec![f(0, self.total, self.odometer(0))];
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let (lo, hi) = (t * chunk, ((t + 1) * chunk).min(self.total));
                    let f = &f;
                    let od = self.odometer(lo.min(self.total.saturating_sub(1)));
                    s.spawn(move || f(lo, hi, od))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("oracle worker panicked"))
                .collect()
        })
    }
}

fn build_context(graph: &Graph, n: usize, preds: &[Predicate], caps: &OracleCaps) -> Result<Context, OracleError> {
    let mut ctx = Context::default();
    let need_so = preds.contains(&Predicate::So);
    let need_po = preds.contains(&Predicate::Po);
    if !need_so && !need_po {
        return Ok(ctx);
    }
    // Welfare and sorted value vectors are invariant under bundle relabeling,
    // so the reduced scan sees all of them.
    let scan = Scan::complete(graph, n, caps, true)?;
    let mut best = i64::MIN;
    let mut vectors: HashSet<Vec<i64>> = HashSet::new();
    scan.for_each(|od| {
        best = best.max(od.welfare());
        if need_po {
            vectors.insert(od.sorted_values());
        }
    });
    if need_so {
        ctx.max_welfare = Some(best);
    }
    if need_po {
        ctx.pareto_front = Some(pareto_front(vectors));
    }
    Ok(ctx)
}

/// `b` Pareto dominates `a` (both sorted ascending): componentwise at
/// least as large and not equal.
pub fn dominates(b: &[i64], a: &[i64]) -> bool {
    b.len() == a.len() && b.iter().zip(a).all(|(x, y)| x >= y) && b != a
}

fn pareto_front(vectors: HashSet<Vec<i64>>) -> HashSet<Vec<i64>> {
    let all: Vec<Vec<i64>> = vectors.into_iter().collect();
    all.iter()
        .filter(|a| !all.iter().any(|b| dominates(b, a)))
        .cloned()
        .collect()
}

/// Searches all complete allocations for ones satisfying every predicate.
pub fn oracle_exists(graph: &Graph, n: usize, query: &OracleQuery) -> Result<OracleReport, OracleError> {
    let started = Instant::now();
    let mut preds = query.predicates.clone();
    preds.sort_by_key(Predicate::cost_rank);
    preds.dedup();
    let symmetry = query.symmetry && query.mode == Mode::Exists;
    let scan = Scan::complete(graph, n, &query.caps, symmetry)?;
    let ctx = build_context(graph, n, &preds, &query.caps)?;
    let mut report = OracleReport {
        query: query.clone(),
        verdict: Verdict::Absent,
        witness: None,
        witnesses: None,
        count: None,
        states_scanned: scan.total,
        elapsed_ms: 0,
    };
    match query.mode {
        Mode::Exists => {
            if let Some((idx, od)) = scan.find_first(query.threads, |od| od.satisfies(&preds, &ctx)) {
                report.verdict = Verdict::Found;
                report.witness = Some(od.bundles());
                report.states_scanned = idx + 1;
            }
        }
        Mode::Count | Mode::FindAll => {
            let collect = query.mode == Mode::FindAll;
            let parts = scan.map_chunks(query.threads, |lo, hi, mut od| {
                let mut count = 0u64;
                let mut found = Vec::new();
                let mut idx = lo;
                while idx < hi {
                    if od.satisfies(&preds, &ctx) {
                        count += 1;
                        if collect {
                            found.push(od.bundles());
                        }
                    }
                    idx += 1;
                    if idx < hi {
                        od.advance();
                    }
                }
                (count, found)
            });
            let count: u64 = parts.iter().map(|p| p.0).sum();
            if count > 0 {
                report.verdict = Verdict::Found;
            }
            report.count = Some(count);
            if collect {
                let all: Vec<_> = parts.into_iter().flat_map(|p| p.1).collect();
                report.witness = all.first().cloned();
                report.witnesses = Some(all);
            }
        }
    }
    report.elapsed_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

/// Maximum utilitarian welfare over all complete `n`-allocations.
pub fn max_welfare(graph: &Graph, n: usize, caps: &OracleCaps) -> Result<i64, OracleError> {
    let scan = Scan::complete(graph, n, caps, true)?;
    let mut best = i64::MIN;
    scan.for_each(|od| best = best.max(od.welfare()));
    Ok(best)
}

/// True iff no complete allocation Pareto dominates `a`. Under identical
/// valuations this compares sorted value vectors.
pub fn oracle_pareto(graph: &Graph, a: &Allocation, caps: &OracleCaps) -> Result<bool, OracleError> {
    let mut target = a.values(graph).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    target.sort_unstable();
    let scan = Scan::complete(graph, a.num_bundles(), caps, true)?;
    let dominated = scan.find_first(1, |od| dominates(&od.sorted_values(), &target));
    Ok(dominated.is_none())
}

/// An allocation whose sorted value vector is lexicographically largest;
/// the first one in enumeration order on ties.
pub fn oracle_leximin(graph: &Graph, n: usize, caps: &OracleCaps) -> Result<Allocation, OracleError> {
    let scan = Scan::complete(graph, n, caps, true)?;
    let mut best: Option<(Vec<i64>, Allocation)> = None;
    scan.for_each(|od| {
        let v = od.sorted_values();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, od.allocation()));
        }
    });
    Ok(best.expect("at least one state").1)
}

/// Maximum cut by scanning the `2^(m-1)` bipartitions with vertex 0 on
/// side 0. Returns the bipartition and its cut value.
pub fn oracle_max_cut(graph: &Graph, caps: &OracleCaps) -> Result<(Allocation, i64), OracleError> {
    let m = graph.num_vertices();
    if m == 0 {
        return Ok((Allocation::empty(0, 2), 0));
    }
    let total = caps.admit(m, 2, 2, m - 1)?;
    let mut best = (0u64, -1i64);
    for mask in 0..total {
        // bit k of mask is the side of vertex k + 1
        let side = |v: Vertex| if v == 0 { 0 } else { (mask >> (v - 1)) & 1 };
        let cut = graph.edges().iter().filter(|&&(u, v)| side(u) != side(v)).count() as i64;
        if cut > best.1 {
            best = (mask, cut);
        }
    }
    let mask = best.0;
    let assignment: Vec<Option<usize>> = (0..m)
        .map(|v| Some(if v == 0 { 0 } else { ((mask >> (v - 1)) & 1) as usize }))
        .collect();
    Ok((Allocation::from_assignment(2, &assignment).expect("valid"), best.1))
}

/// A complete EF1 allocation extending `partial`, if one exists.
pub fn oracle_ef1_completion(
    graph: &Graph,
    partial: &Allocation,
    caps: &OracleCaps,
) -> Result<Option<Allocation>, OracleError> {
    let report = allocation::check_ef1(graph, partial).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    if !report.holds {
        return Err(OracleError::PartialNotEf1);
    }
    let n = partial.num_bundles();
    check_n(n)?;
    let base = partial.assignment();
    let free: Vec<Vertex> = (0..base.len()).filter(|&v| base[v].is_none()).collect();
    let total = caps.admit(graph.num_vertices(), n, n, free.len())?;
    let fixed: Vec<Option<usize>> = base.clone();
    let scan = Scan {
        graph,
        n,
        base: fixed,
        free,
        total,
    };
    let ctx = Context::default();
    Ok(scan
        .find_first(1, |od| od.satisfies(&[Predicate::Ef1], &ctx))
        .map(|(_, od)| od.allocation()))
}

pub fn oracle_completable_ef1(graph: &Graph, partial: &Allocation, caps: &OracleCaps) -> Result<bool, OracleError> {
    Ok(oracle_ef1_completion(graph, partial, caps)?.is_some())
}
