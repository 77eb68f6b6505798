//! Polynomial-time allocation procedures.
//!
//! Every solver is deterministic: whenever a choice is left open, the least
//! qualifying bundle position or vertex index is taken. Each loop carries a
//! hard move budget; running out is reported as [`SolveError::BudgetExceeded`]
//! and always indicates a bug.

mod forest;
mod general;
mod greedy;
mod weak;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::allocation::{self, Allocation, Potential, SoVerdict};
use crate::graph::{Graph, Vertex};
use crate::valuation::BundleStats;

pub use forest::{solve_forest_ef1_so, solve_forest_ef1_so_observed, ForestStep};
pub use general::{solve_ef1_ts_n4, ts_subroutine};
pub use greedy::greedy_two_agents;
pub use weak::{equitable_cut, solve_ef1_wts, wts_subroutine};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid number of agents {n}: {reason}")]
    InvalidAgents { n: usize, reason: &'static str },
    #[error("{vertices} non-isolated vertices cannot be split among {n} agents")]
    TooFewVertices { vertices: usize, n: usize },
    #[error("graph is not a forest")]
    NotAForest,
    #[error("invalid input allocation: {0}")]
    InvalidInput(String),
    #[error("{0}")]
    GoalInfeasible(String),
    #[error("{routine} exceeded its budget of {budget} steps")]
    BudgetExceeded { routine: &'static str, budget: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Named step of a solver, recorded once per outer-loop iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Case {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::One => "1",
            Case::Two => "2",
            Case::Three => "3",
        })
    }
}

/// Which loop performed a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routine {
    Greedy,
    TsSubroutine,
    WtsSubroutine,
    /// A move made directly by an outer case (not by a subroutine).
    Case(Case),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseRecord {
    pub case: Case,
    pub phi_before: Potential,
    pub phi_after: Potential,
}

/// One item move. `from`/`to` are bundle indices of the returned
/// allocation; `from` is `None` when a previously unallocated vertex is placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveRecord {
    pub routine: Routine,
    /// Counter distinguishing separate subroutine calls.
    pub invocation: usize,
    pub vertex: Vertex,
    pub from: Option<usize>,
    pub to: usize,
    pub phi_before: Potential,
    pub phi_after: Potential,
    pub welfare_before: i64,
    pub welfare_after: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub iterations: usize,
    pub cases: Vec<CaseRecord>,
    pub moves: Vec<MoveRecord>,
}

impl SolveTrace {
    /// Potential before the first move followed by the potential after each move.
    pub fn potential_history(&self) -> Vec<Potential> {
        history(&self.moves, |m| m.phi_before, |m| m.phi_after)
    }

    pub fn welfare_history(&self) -> Vec<i64> {
        history(&self.moves, |m| m.welfare_before, |m| m.welfare_after)
    }

    pub fn case_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cases {
            *out.entry(c.case.to_string()).or_default() += 1;
        }
        out
    }

    /// Moves of one subroutine, grouped by invocation in call order.
    pub fn invocations(&self, routine: Routine) -> Vec<Vec<&MoveRecord>> {
        let mut groups: BTreeMap<usize, Vec<&MoveRecord>> = BTreeMap::new();
        for m in self.moves.iter().filter(|m| m.routine == routine) {
            groups.entry(m.invocation).or_default().push(m);
        }
        groups.into_values().collect()
    }

    fn relabel_vertices(&mut self, map: &[Vertex]) {
        for m in &mut self.moves {
            m.vertex = map[m.vertex];
        }
    }
}

fn history<T: Copy>(
    moves: &[MoveRecord],
    first: impl Fn(&MoveRecord) -> T,
    after: impl Fn(&MoveRecord) -> T,
) -> Vec<T> {
    let mut out = Vec::with_capacity(moves.len() + 1);
    if let Some(m) = moves.first() {
        out.push(first(m));
    }
    out.extend(moves.iter().map(after));
    out
}

/// Bundle stats plus the current value order. `order[p]` is the bundle
/// (slot) holding position `p`; position 0 is the least-valued bundle.
/// Relabeling is a stable sort of the previous order.
pub(crate) struct Labeled<'g> {
    pub stats: BundleStats<'g>,
    pub order: Vec<usize>,
    pub invocation: usize,
}

impl<'g> Labeled<'g> {
    pub fn new(stats: BundleStats<'g>) -> Self {
        let mut state = Self {
            order: (0..stats.num_bundles()).collect(),
            stats,
            invocation: 0,
        };
        state.relabel();
        state
    }

    pub fn relabel(&mut self) {
        let values = self.stats.values();
        self.order.sort_by_key(|&s| values[s]);
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn slot(&self, pos: usize) -> usize {
        self.order[pos]
    }

    pub fn value_at(&self, pos: usize) -> i64 {
        self.stats.value(self.order[pos])
    }

    pub fn gain_at(&self, pos: usize, o: Vertex) -> i64 {
        self.stats.gain(self.order[pos], o)
    }

    pub fn phi(&self) -> Potential {
        Potential::from_values(self.stats.values())
    }

    pub fn welfare(&self) -> i64 {
        self.stats.values().iter().sum()
    }

    /// Post-removal value of the best item to drop from the bundle at `pos`
    /// (0 for an empty bundle).
    pub fn drop_value_at(&self, pos: usize) -> i64 {
        self.stats.min_drop(self.order[pos]).map_or(0, |(_, v)| v)
    }

    /// True when the least bundle EF1-envies the bundle at `pos`.
    pub fn envied_at(&self, pos: usize) -> bool {
        let v1 = self.value_at(0);
        self.value_at(pos) > v1 && self.drop_value_at(pos) > v1
    }

    pub fn move_item(
        &mut self,
        trace: &mut SolveTrace,
        routine: Routine,
        o: Vertex,
        to_slot: usize,
    ) -> Result<(), SolveError> {
        let from = self.stats.assignment(o);
        let (phi_before, welfare_before) = (self.phi(), self.welfare());
        self.stats
            .apply_move(o, from, Some(to_slot))
            .map_err(|e| SolveError::Internal(e.to_string()))?;
        trace.moves.push(MoveRecord {
            routine,
            invocation: self.invocation,
            vertex: o,
            from,
            to: to_slot,
            phi_before,
            phi_after: self.phi(),
            welfare_before,
            welfare_after: self.welfare(),
        });
        Ok(())
    }
}

fn budget_check(count: usize, budget: usize, routine: &'static str) -> Result<(), SolveError> {
    if count > budget {
        return Err(SolveError::BudgetExceeded { routine, budget });
    }
    Ok(())
}

/// Graph restricted to its non-isolated vertices plus the map back to
/// original ids.
pub(crate) struct Core {
    pub graph: Graph,
    pub to_original: Vec<Vertex>,
    pub isolated: Vec<Vertex>,
}

impl Core {
    pub fn of(graph: &Graph) -> Self {
        let isolated = graph.isolated_vertices();
        if isolated.is_empty() {
            return Self {
                graph: graph.clone(),
                to_original: (0..graph.num_vertices()).collect(),
                isolated,
            };
        }
        let to_original: Vec<Vertex> = (0..graph.num_vertices()).filter(|&v| graph.degree(v) > 0).collect();
        Self {
            graph: graph.induced_subgraph(&to_original),
            to_original,
            isolated,
        }
    }

    pub fn require_at_least(&self, n: usize) -> Result<(), SolveError> {
        if self.graph.num_vertices() < n {
            return Err(SolveError::TooFewVertices {
                vertices: self.graph.num_vertices(),
                n,
            });
        }
        Ok(())
    }

    /// Maps a core allocation back to original ids and deals the isolated
    /// vertices round-robin (the t-th isolated vertex goes to bundle t mod n).
    pub fn lift(&self, original: &Graph, core_alloc: Allocation, mut trace: SolveTrace) -> (Allocation, SolveTrace) {
        let n = core_alloc.num_bundles();
        let mut bundles: Vec<Vec<Vertex>> = core_alloc
            .into_bundles()
            .into_iter()
            .map(|b| b.into_iter().map(|v| self.to_original[v]).collect())
            .collect();
        for (t, &v) in self.isolated.iter().enumerate() {
            bundles[t % n].push(v);
        }
        trace.relabel_vertices(&self.to_original);
        let a = Allocation::new(original.num_vertices(), bundles).expect("lifted allocation is a partition");
        (a, trace)
    }
}

fn require_agents(n: usize, min: usize, reason: &'static str) -> Result<(), SolveError> {
    if n < min {
        return Err(SolveError::InvalidAgents { n, reason });
    }
    Ok(())
}

/// Round-robin complete allocation: vertex `j` to bundle `j mod n`.
fn round_robin(graph: &Graph, n: usize) -> BundleStats<'_> {
    let assignment: Vec<Option<usize>> = (0..graph.num_vertices()).map(|v| Some(v % n)).collect();
    BundleStats::from_assignment(graph, n, &assignment).expect("round-robin is consistent")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveGoal {
    EfTs2,
    Ef1Ts,
    Ef1Wts,
    Ef1SoForest,
    Equitable,
}

impl SolveGoal {
    pub fn name(self) -> &'static str {
        match self {
            SolveGoal::EfTs2 => "ef-ts-2",
            SolveGoal::Ef1Ts => "ef1-ts",
            SolveGoal::Ef1Wts => "ef1-wts",
            SolveGoal::Ef1SoForest => "ef1-so-forest",
            SolveGoal::Equitable => "equitable",
        }
    }
}

impl fmt::Display for SolveGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolveGoal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ef-ts-2" => SolveGoal::EfTs2,
            "ef1-ts" => SolveGoal::Ef1Ts,
            "ef1-wts" => SolveGoal::Ef1Wts,
            "ef1-so-forest" => SolveGoal::Ef1SoForest,
            "equitable" => SolveGoal::Equitable,
            other => return Err(format!("unknown goal `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyTwoAgents,
    Ef1TsN4,
    Ef1Wts,
    ForestEf1So,
    EquitableCut,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GreedyTwoAgents => "greedy-two-agents",
            Algorithm::Ef1TsN4 => "ef1-ts-n4",
            Algorithm::Ef1Wts => "ef1-wts",
            Algorithm::ForestEf1So => "forest-ef1-so",
            Algorithm::EquitableCut => "equitable-cut",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub allocation: Allocation,
    pub trace: SolveTrace,
    pub algorithm: Algorithm,
    /// Predicates confirmed by rerunning the checkers on the output.
    pub guarantee: Vec<&'static str>,
}

/// Predicates (among ef, ef1, ts, wts, so, non-empty) that hold for a
/// complete allocation. SO is reported only when decided without enumeration.
pub fn achieved_guarantee(graph: &Graph, a: &Allocation) -> Vec<&'static str> {
    let mut out = Vec::new();
    let holds = |r: Result<allocation::FairnessReport, _>| r.map(|r| r.holds).unwrap_or(false);
    if holds(allocation::check_ef(graph, a)) {
        out.push("ef");
    }
    if holds(allocation::check_ef1(graph, a)) {
        out.push("ef1");
    }
    if holds(allocation::check_ts(graph, a)) {
        out.push("ts");
    }
    if holds(allocation::check_wts(graph, a)) {
        out.push("wts");
    }
    if matches!(allocation::check_so(graph, a, None), Ok(r) if r.verdict == SoVerdict::Yes) {
        out.push("so");
    }
    if a.all_nonempty() {
        out.push("non-empty");
    }
    out
}

/// Routes `goal` to the strongest applicable solver: greedy for two agents,
/// the forest algorithm on forests, the TS algorithm for `n >= 4` and the
/// wTS algorithm otherwise.
pub fn dispatch_solve(graph: &Graph, n: usize, goal: SolveGoal) -> Result<Solution, SolveError> {
    let forest = graph.is_forest();
    let algorithm = match goal {
        SolveGoal::EfTs2 if n != 2 => {
            return Err(SolveError::GoalInfeasible(format!(
                "goal ef-ts-2 needs exactly two agents, got {n}"
            )))
        }
        SolveGoal::EfTs2 => Algorithm::GreedyTwoAgents,
        SolveGoal::Ef1SoForest if !forest => return Err(SolveError::NotAForest),
        SolveGoal::Ef1SoForest => Algorithm::ForestEf1So,
        SolveGoal::Equitable => Algorithm::EquitableCut,
        SolveGoal::Ef1Ts if n == 3 && !forest => {
            return Err(SolveError::GoalInfeasible(
                "EF1 together with TS may not exist for three agents on general graphs \
                 (see `gen fig3`); use the oracle to decide this instance"
                    .to_string(),
            ))
        }
        SolveGoal::Ef1Ts | SolveGoal::Ef1Wts => match n {
            2 => Algorithm::GreedyTwoAgents,
            _ if forest && n >= 2 => Algorithm::ForestEf1So,
            _ if n >= 4 => Algorithm::Ef1TsN4,
            _ => Algorithm::Ef1Wts,
        },
    };
    let (allocation, trace) = match algorithm {
        Algorithm::GreedyTwoAgents => greedy_two_agents(graph)?,
        Algorithm::ForestEf1So => solve_forest_ef1_so(graph, n)?,
        Algorithm::Ef1TsN4 => solve_ef1_ts_n4(graph, n)?,
        Algorithm::Ef1Wts => solve_ef1_wts(graph, n)?,
        Algorithm::EquitableCut => equitable_cut(graph, n)?,
    };
    let guarantee = achieved_guarantee(graph, &allocation);
    Ok(Solution {
        allocation,
        trace,
        algorithm,
        guarantee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{check_ef1, check_ts};

    fn fig3() -> Graph {
        Graph::new(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap()
    }

    #[test]
    fn dispatch_routes() {
        let g = fig3();
        assert!(matches!(
            dispatch_solve(&g, 3, SolveGoal::Ef1Ts),
            Err(SolveError::GoalInfeasible(_))
        ));
        let s = dispatch_solve(&g, 2, SolveGoal::EfTs2).unwrap();
        assert_eq!(s.algorithm, Algorithm::GreedyTwoAgents);
        assert!(s.guarantee.contains(&"ef") && s.guarantee.contains(&"ts"));

        let s = dispatch_solve(&g, 4, SolveGoal::Ef1Ts).unwrap();
        assert_eq!(s.algorithm, Algorithm::Ef1TsN4);
        assert!(check_ef1(&g, &s.allocation).unwrap().holds);
        assert!(check_ts(&g, &s.allocation).unwrap().holds);

        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = dispatch_solve(&path, 3, SolveGoal::Ef1SoForest).unwrap();
        assert_eq!(s.algorithm, Algorithm::ForestEf1So);
        assert!(s.guarantee.contains(&"so"));
        assert_eq!(
            dispatch_solve(&g, 3, SolveGoal::Ef1SoForest).unwrap_err(),
            SolveError::NotAForest
        );
        assert!(dispatch_solve(&g, 3, SolveGoal::EfTs2).is_err());
    }

    #[test]
    fn isolated_vertices_are_dealt_round_robin() {
        // path 0-1-2 plus isolated 3, 4, 5
        let g = Graph::new(6, [(0, 1), (1, 2)]).unwrap();
        let (a, _) = solve_ef1_wts(&g, 2).unwrap();
        assert!(a.is_complete());
        assert!(a.bundle(0).contains(&3) && a.bundle(1).contains(&4) && a.bundle(0).contains(&5));
        assert!(check_ef1(&g, &a).unwrap().holds);
    }

    #[test]
    fn goal_names_round_trip() {
        for g in [
            SolveGoal::EfTs2,
            SolveGoal::Ef1Ts,
            SolveGoal::Ef1Wts,
            SolveGoal::Ef1SoForest,
            SolveGoal::Equitable,
        ] {
            assert_eq!(g.name().parse::<SolveGoal>().unwrap(), g);
        }
        assert!("ef2".parse::<SolveGoal>().is_err());
    }
}
