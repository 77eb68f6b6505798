//! Allocations and exact checkers for the fairness and efficiency predicates.
//!
//! Every checker rebuilds [`BundleStats`] from the allocation it is given, so
//! verdicts never depend on solver-internal state.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, Vertex};
use crate::oracle::{self, OracleCaps};
use crate::valuation::BundleStats;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocationError {
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: Vertex, num_vertices: usize },
    #[error("vertex {0} appears in more than one bundle")]
    NotDisjoint(Vertex),
    #[error("allocation over {allocation} vertices does not match a graph on {graph} vertices")]
    GraphMismatch { allocation: usize, graph: usize },
    #[error("predicate requires a complete allocation ({0} vertices unassigned)")]
    Partial(usize),
    #[error("bundles are not sorted by non-decreasing value")]
    Unsorted,
    #[error("alpha must be a rational in (0, 1], got {0}")]
    AlphaOutOfRange(String),
    #[error("allocation has no bundles")]
    NoBundles,
}

/// Ordered partition of (a subset of) `0..num_vertices` into bundles.
/// Each bundle is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Allocation {
    num_vertices: usize,
    bundles: Vec<Vec<Vertex>>,
}

impl Allocation {
    pub fn new(num_vertices: usize, bundles: Vec<Vec<Vertex>>) -> Result<Self, AllocationError> {
        let mut seen = vec![false; num_vertices];
        let mut bundles = bundles;
        for bundle in &mut bundles {
            for &v in bundle.iter() {
                if v >= num_vertices {
                    return Err(AllocationError::VertexOutOfRange {
                        vertex: v,
                        num_vertices,
                    });
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(AllocationError::NotDisjoint(v));
                }
            }
            bundle.sort_unstable();
        }
        Ok(Self { num_vertices, bundles })
    }

    /// `n` empty bundles.
    pub fn empty(num_vertices: usize, num_bundles: usize) -> Self {
        Self {
            num_vertices,
            bundles: vec![Vec::new(); num_bundles],
        }
    }

    pub fn from_assignment(num_bundles: usize, assignment: &[Option<usize>]) -> Result<Self, AllocationError> {
        let mut bundles = vec![Vec::new(); num_bundles];
        for (v, slot) in assignment.iter().enumerate() {
            if let Some(b) = *slot {
                bundles
                    .get_mut(b)
                    .ok_or(AllocationError::VertexOutOfRange {
                        vertex: v,
                        num_vertices: assignment.len(),
                    })?
                    .push(v);
            }
        }
        Ok(Self {
            num_vertices: assignment.len(),
            bundles,
        })
    }

    pub fn from_stats(stats: &BundleStats<'_>) -> Self {
        Self {
            num_vertices: stats.graph().num_vertices(),
            bundles: (0..stats.num_bundles())
                .map(|b| stats.bundle(b).iter().copied().collect())
                .collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_bundles(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Vec<Vertex>] {
        &self.bundles
    }

    pub fn bundle(&self, i: usize) -> &[Vertex] {
        &self.bundles[i]
    }

    pub fn into_bundles(self) -> Vec<Vec<Vertex>> {
        self.bundles
    }

    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.num_vertices];
        for (b, bundle) in self.bundles.iter().enumerate() {
            for &v in bundle {
                out[v] = Some(b);
            }
        }
        out
    }

    pub fn num_assigned(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.num_assigned() == self.num_vertices
    }

    pub fn all_nonempty(&self) -> bool {
        self.bundles.iter().all(|b| !b.is_empty())
    }

    /// Reorders bundles by `order[k]` = index of the bundle placed at `k`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            num_vertices: self.num_vertices,
            bundles: order.iter().map(|&i| self.bundles[i].clone()).collect(),
        }
    }

    pub fn stats<'g>(&self, graph: &'g Graph) -> Result<BundleStats<'g>, AllocationError> {
        if graph.num_vertices() != self.num_vertices {
            return Err(AllocationError::GraphMismatch {
                allocation: self.num_vertices,
                graph: graph.num_vertices(),
            });
        }
        Ok(
            BundleStats::from_assignment(graph, self.num_bundles(), &self.assignment())
                .expect("validated allocation yields consistent stats"),
        )
    }

    pub fn values(&self, graph: &Graph) -> Result<Vec<i64>, AllocationError> {
        Ok(self.stats(graph)?.values().to_vec())
    }
}

/// A violated instance of a predicate: agents `i` (envious / donor) and `j`
/// (envied / receiver), an optional witness item and the values involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub item: Option<Vertex>,
    pub values: Vec<i64>,
}

/// Verdict plus itemized violations. `holds` is true exactly when
/// `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub predicate: String,
    pub holds: bool,
    pub violations: Vec<Violation>,
}

impl FairnessReport {
    pub fn new(predicate: impl Into<String>, violations: Vec<Violation>) -> Self {
        Self {
            predicate: predicate.into(),
            holds: violations.is_empty(),
            violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Lexicographically ordered pair `(v(A_1), -n_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Potential {
    pub min_value: i64,
    pub neg_min_count: i64,
}

impl Potential {
    /// Potential of an unordered value vector. Panics on an empty slice.
    pub fn from_values(values: &[i64]) -> Self {
        let min = *values.iter().min().expect("at least one bundle");
        let count = values.iter().filter(|&&v| v == min).count() as i64;
        Self {
            min_value: min,
            neg_min_count: -count,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.min_value, self.neg_min_count)
    }
}

/// Positive rational `num/den`, compared by cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Alpha {
    num: u32,
    den: u32,
}

impl Alpha {
    pub const ONE: Alpha = Alpha { num: 1, den: 1 };
    pub const HALF: Alpha = Alpha { num: 1, den: 2 };

    pub fn new(num: u32, den: u32) -> Result<Self, AllocationError> {
        if num == 0 || den == 0 || num > den {
            return Err(AllocationError::AlphaOutOfRange(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    /// `value >= alpha * other`, exactly.
    pub fn scaled_at_least(self, value: i64, other: i64) -> bool {
        value as i128 * self.den as i128 >= other as i128 * self.num as i128
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Alpha {
    type Err = AllocationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AllocationError::AlphaOutOfRange(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        Alpha::new(num.parse().map_err(|_| bad())?, den.parse().map_err(|_| bad())?)
    }
}

/// Stable order of bundle indices by value: `order[k]` is the index of the
/// k-th smallest bundle, ties kept in index order.
pub fn sorted_order(values: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    order
}

/// Relabels bundles in non-decreasing value order (stable).
pub fn sort_bundles(graph: &Graph, a: &Allocation) -> Result<Allocation, AllocationError> {
    let values = a.values(graph)?;
    Ok(a.permuted(&sorted_order(&values)))
}

pub fn social_welfare(graph: &Graph, a: &Allocation) -> Result<i64, AllocationError> {
    Ok(a.values(graph)?.iter().sum())
}

/// Potential of an allocation whose bundles are already sorted.
pub fn potential(graph: &Graph, a: &Allocation) -> Result<Potential, AllocationError> {
    let values = a.values(graph)?;
    if values.is_empty() {
        return Err(AllocationError::NoBundles);
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(AllocationError::Unsorted);
    }
    Ok(Potential::from_values(&values))
}

/// Item of bundle `i` minimizing the post-removal value, least vertex on
/// ties. `None` for an empty bundle, whose post-removal value is taken as 0.
pub fn min_drop_item(graph: &Graph, a: &Allocation, i: usize) -> Result<Option<(Vertex, i64)>, AllocationError> {
    Ok(a.stats(graph)?.min_drop(i))
}

fn min_drop_values(stats: &BundleStats<'_>) -> Vec<Option<(Vertex, i64)>> {
    (0..stats.num_bundles()).map(|b| stats.min_drop(b)).collect()
}

pub fn check_ef(graph: &Graph, a: &Allocation) -> Result<FairnessReport, AllocationError> {
    let values = a.values(graph)?;
    let mut violations = Vec::new();
    for (i, &vi) in values.iter().enumerate() {
        for (j, &vj) in values.iter().enumerate() {
            if vj > vi {
                violations.push(Violation {
                    i,
                    j,
                    item: None,
                    values: vec![vi, vj],
                });
            }
        }
    }
    Ok(FairnessReport::new("ef", violations))
}

/// Pairwise EF1 over all ordered pairs.
pub fn check_ef1(graph: &Graph, a: &Allocation) -> Result<FairnessReport, AllocationError> {
    let stats = a.stats(graph)?;
    Ok(ef1_report(&stats, "ef1", Alpha::ONE))
}

/// EF1 verdict computed only against the least-valued bundle after a stable
/// sort. Agrees with [`check_ef1`] because valuations are identical.
/// Violation indices refer to the original bundle positions.
pub fn check_ef1_least_agent(graph: &Graph, a: &Allocation) -> Result<FairnessReport, AllocationError> {
    let stats = a.stats(graph)?;
    let values = stats.values();
    let mut violations = Vec::new();
    if let Some(&first) = sorted_order(values).first() {
        let v1 = values[first];
        for (j, drop) in min_drop_values(&stats).into_iter().enumerate() {
            if let Some((o, after)) = drop {
                if values[j] > v1 && after > v1 {
                    violations.push(Violation {
                        i: first,
                        j,
                        item: Some(o),
                        values: vec![v1, values[j], after],
                    });
                }
            }
        }
    }
    Ok(FairnessReport::new("ef1", violations))
}

pub fn check_alpha_ef1(graph: &Graph, a: &Allocation, alpha: Alpha) -> Result<FairnessReport, AllocationError> {
    let stats = a.stats(graph)?;
    Ok(ef1_report(&stats, &format!("alpha-ef1({alpha})"), alpha))
}

fn ef1_report(stats: &BundleStats<'_>, name: &str, alpha: Alpha) -> FairnessReport {
    let values = stats.values();
    let drops = min_drop_values(stats);
    let mut violations = Vec::new();
    for (i, &vi) in values.iter().enumerate() {
        for (j, &vj) in values.iter().enumerate() {
            if vj <= vi {
                continue;
            }
            // vj > vi >= 0 forces A_j to be non-empty.
            let (o, after) = drops[j].expect("envied bundle is non-empty");
            if !alpha.scaled_at_least(vi, after) {
                violations.push(Violation {
                    i,
                    j,
                    item: Some(o),
                    values: vec![vi, vj, after],
                });
            }
        }
    }
    FairnessReport::new(name, violations)
}

fn require_complete(a: &Allocation) -> Result<(), AllocationError> {
    if !a.is_complete() {
        return Err(AllocationError::Partial(a.num_vertices() - a.num_assigned()));
    }
    Ok(())
}

fn transfer_report(
    graph: &Graph,
    a: &Allocation,
    name: &str,
    violates: impl Fn(i64, i64) -> bool,
) -> Result<FairnessReport, AllocationError> {
    require_complete(a)?;
    let stats = a.stats(graph)?;
    let n = stats.num_bundles();
    let mut violations = Vec::new();
    for i in 0..n {
        for &o in stats.bundle(i) {
            let donor = -stats.gain(i, o);
            for j in (0..n).filter(|&j| j != i) {
                let receiver = stats.gain(j, o);
                if violates(donor, receiver) {
                    violations.push(Violation {
                        i,
                        j,
                        item: Some(o),
                        values: vec![
                            stats.value(i),
                            stats.value(i) + donor,
                            stats.value(j),
                            stats.value(j) + receiver,
                        ],
                    });
                }
            }
        }
    }
    Ok(FairnessReport::new(name, violations))
}

/// Transfer stability: no single-item transfer leaves both endpoints weakly
/// better off with one strictly better off.
pub fn check_ts(graph: &Graph, a: &Allocation) -> Result<FairnessReport, AllocationError> {
    transfer_report(graph, a, "ts", |d, r| d >= 0 && r >= 0 && (d > 0 || r > 0))
}

/// Weak transfer stability: no transfer strictly improves both endpoints.
pub fn check_wts(graph: &Graph, a: &Allocation) -> Result<FairnessReport, AllocationError> {
    transfer_report(graph, a, "wts", |d, r| d > 0 && r > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoVerdict {
    Yes,
    No,
    Unknown,
}

/// How a social-optimality verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoTier {
    /// Only one bundle: every complete allocation has welfare 0.
    SingleBundle,
    /// Welfare equals the `2|E|` upper bound.
    WelfareBound,
    /// Forest with at least two bundles: optimal iff no edge is monochromatic.
    Forest,
    /// Compared with the exhaustive maximum welfare.
    Oracle,
    /// None of the above applied within the oracle caps.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoReport {
    pub verdict: SoVerdict,
    pub tier: SoTier,
    pub welfare: i64,
    pub max_welfare: Option<i64>,
    /// Monochromatic edges as `(i, i, u, v)` violations when the forest tier applies.
    pub report: FairnessReport,
}

/// Social optimality, decided by the welfare bound, the forest
/// characterization, or (when `caps` allows) exhaustive enumeration.
pub fn check_so(graph: &Graph, a: &Allocation, caps: Option<&OracleCaps>) -> Result<SoReport, AllocationError> {
    require_complete(a)?;
    let stats = a.stats(graph)?;
    let welfare: i64 = stats.values().iter().sum();
    let bound = 2 * graph.num_edges() as i64;
    let n = a.num_bundles();
    let done = |verdict, tier, max_welfare, violations| SoReport {
        verdict,
        tier,
        welfare,
        max_welfare,
        report: FairnessReport::new("so", violations),
    };
    if n <= 1 {
        return Ok(done(SoVerdict::Yes, SoTier::SingleBundle, Some(0), vec![]));
    }
    if welfare == bound {
        return Ok(done(SoVerdict::Yes, SoTier::WelfareBound, Some(bound), vec![]));
    }
    if graph.is_forest() {
        let violations = graph
            .edges()
            .iter()
            .filter(|&&(u, v)| stats.assignment(u) == stats.assignment(v))
            .map(|&(u, v)| {
                let b = stats.assignment(u).expect("complete allocation");
                Violation {
                    i: b,
                    j: b,
                    item: Some(u),
                    values: vec![u as i64, v as i64],
                }
            })
            .collect();
        return Ok(done(SoVerdict::No, SoTier::Forest, Some(bound), violations));
    }
    if let Some(caps) = caps {
        if let Ok(max) = oracle::max_welfare(graph, n, caps) {
            let (verdict, violations) = if welfare == max {
                (SoVerdict::Yes, vec![])
            } else {
                (
                    SoVerdict::No,
                    vec![Violation {
                        i: 0,
                        j: 0,
                        item: None,
                        values: vec![welfare, max],
                    }],
                )
            };
            return Ok(done(verdict, SoTier::Oracle, Some(max), violations));
        }
    }
    Ok(done(SoVerdict::Unknown, SoTier::Undecided, None, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    // o1..o8 -> 0..7
    fn fig1() -> Graph {
        Graph::new(8, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (4, 6), (4, 7)]).unwrap()
    }

    // o_a = 0, o_b = 1, c_1..c_3 = 2..4
    fn fig3() -> Graph {
        Graph::new(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap()
    }

    fn alloc(m: usize, bundles: &[&[usize]]) -> Allocation {
        Allocation::new(m, bundles.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rejects_overlapping_bundles() {
        assert_eq!(
            Allocation::new(3, vec![vec![0, 1], vec![1]]),
            Err(AllocationError::NotDisjoint(1))
        );
        assert!(Allocation::new(3, vec![vec![3]]).is_err());
    }

    #[test]
    fn sorting_is_stable() {
        let g = fig3();
        let a = alloc(5, &[&[2, 3], &[0], &[1]]);
        let sorted = sort_bundles(&g, &a).unwrap();
        assert_eq!(sorted.bundles(), &[vec![0], vec![1], vec![2, 3]]);
        assert_eq!(sort_bundles(&g, &sorted).unwrap(), sorted);
        assert_eq!(sorted_order(&[5, 2, 2]), vec![1, 2, 0]);
    }

    #[test]
    fn ef_examples() {
        let g = fig3();
        let a = alloc(5, &[&[0], &[1], &[2, 3, 4]]);
        let report = check_ef(&g, &a).unwrap();
        assert!(!report.holds);
        assert_eq!((report.violations[0].i, report.violations[0].j), (0, 2));
        assert!(check_ef(&g, &Allocation::empty(5, 3)).unwrap().holds);
        // Two bundles always have equal cut value.
        assert!(check_ef(&g, &alloc(5, &[&[0, 2], &[1, 3, 4]])).unwrap().holds);
    }

    #[test]
    fn ef1_examples() {
        let g = fig3();
        let bad = alloc(5, &[&[0, 1], &[2], &[3, 4]]);
        let report = check_ef1(&g, &bad).unwrap();
        assert!(!report.holds);
        assert!(report
            .violations
            .iter()
            .any(|v| v.i == 1 && v.j == 0 && v.values == vec![2, 6, 3]));
        assert!(!check_ef1_least_agent(&g, &bad).unwrap().holds);

        let f = fig1();
        // T = {o1, o3} against W = {o2}: removing o1 leaves {o3} with value 1.
        let tw = alloc(8, &[&[0, 2], &[1]]);
        assert!(check_ef1(&f, &tw).unwrap().holds);
    }

    #[test]
    fn alpha_ef1_on_a_star() {
        let star = Graph::new(7, (1..7).map(|l| (0, l))).unwrap();
        let a = alloc(7, &[&[0], &[1, 2, 3], &[4, 5, 6]]);
        assert!(check_alpha_ef1(&star, &a, Alpha::HALF).unwrap().holds);
        assert!(Alpha::new(3, 2).is_err());
        assert!("0/4".parse::<Alpha>().is_err());
        assert_eq!("2/3".parse::<Alpha>().unwrap(), Alpha::new(2, 3).unwrap());
    }

    #[test]
    fn transfer_stability_examples() {
        let g = fig3();
        let a = alloc(5, &[&[0, 4], &[1], &[2, 3]]);
        let ts = check_ts(&g, &a).unwrap();
        assert!(!ts.holds);
        assert!(ts
            .violations
            .iter()
            .any(|v| v.i == 0 && v.j == 2 && v.item == Some(4) && v.values == vec![3, 3, 4, 6]));
        assert!(check_wts(&g, &a).unwrap().holds);

        let single = alloc(5, &[&[0, 1, 2, 3, 4]]);
        assert!(check_ts(&g, &single).unwrap().holds);
        assert_eq!(check_ts(&g, &alloc(5, &[&[0]])), Err(AllocationError::Partial(4)));
    }

    #[test]
    fn six_cycle_is_weakly_but_not_transfer_stable() {
        let c6 = Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let a = alloc(6, &[&[0, 1], &[2, 3], &[4, 5]]);
        assert!(check_wts(&c6, &a).unwrap().holds);
        assert!(!check_ts(&c6, &a).unwrap().holds);
    }

    #[test]
    fn example_two_efficiency() {
        let g = fig1();
        let four = alloc(8, &[&[0, 4], &[1, 5], &[2, 6], &[3, 7]]);
        assert!(check_ts(&g, &four).unwrap().holds);

        let so = alloc(8, &[&[0, 5], &[1], &[2], &[3], &[4], &[6], &[7]]);
        let r = check_so(&g, &so, None).unwrap();
        assert_eq!((r.verdict, r.welfare), (SoVerdict::Yes, 14));
        assert_eq!(social_welfare(&g, &so).unwrap(), 14);

        let po = alloc(8, &[&[0, 4], &[1], &[2], &[3], &[5], &[6], &[7]]);
        let r = check_so(&g, &po, None).unwrap();
        assert_eq!((r.verdict, r.tier), (SoVerdict::No, SoTier::Forest));
        assert_eq!(r.report.violations.len(), 1);
    }

    #[test]
    fn so_on_a_forest_with_one_bundle_owner() {
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let a = alloc(3, &[&[0, 1, 2], &[]]);
        assert_eq!(check_so(&path, &a, None).unwrap().verdict, SoVerdict::No);
        assert_eq!(social_welfare(&path, &alloc(3, &[&[0, 1, 2]])).unwrap(), 0);
    }

    #[test]
    fn potentials() {
        assert_eq!(
            Potential::from_values(&[2, 2, 5]),
            Potential {
                min_value: 2,
                neg_min_count: -2
            }
        );
        assert_eq!(
            Potential::from_values(&[0, 3, 3]),
            Potential {
                min_value: 0,
                neg_min_count: -1
            }
        );
        let g = fig3();
        let a = alloc(5, &[&[0, 4], &[1], &[2, 3]]);
        assert_eq!(
            potential(&g, &a).unwrap(),
            Potential {
                min_value: 3,
                neg_min_count: -2
            }
        );
        assert_eq!(
            potential(&g, &alloc(5, &[&[2, 3], &[0, 4], &[1]])),
            Err(AllocationError::Unsorted)
        );
        assert!(
            Potential {
                min_value: 3,
                neg_min_count: -1
            } > Potential {
                min_value: 3,
                neg_min_count: -2
            }
        );
    }

    #[test]
    fn min_drop_examples() {
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let a = alloc(5, &[&[1], &[0], &[2, 3, 4]]);
        assert_eq!(min_drop_item(&star, &a, 1).unwrap(), Some((0, 0)));
        assert_eq!(min_drop_item(&star, &a, 2).unwrap(), Some((2, 2)));
        let e = Allocation::empty(5, 2);
        assert_eq!(min_drop_item(&star, &e, 0).unwrap(), None);
    }
}
