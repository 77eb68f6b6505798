use super::{budget_check, require_agents, Case, CaseRecord, Core, Labeled, Routine, SolveError, SolveTrace};
use crate::allocation::Allocation;
use crate::graph::{Graph, RootedForest, Vertex};
use crate::valuation::BundleStats;

/// Snapshot handed to the observer after each executed case. Vertex ids
/// refer to `stats.graph()`, the input restricted to non-isolated vertices.
pub struct ForestStep<'a, 'g> {
    pub case: Case,
    pub stats: &'a BundleStats<'g>,
    pub forest: &'a RootedForest,
}

/// EF1 and SO on a forest: no edge ends up inside a bundle.
pub fn solve_forest_ef1_so(graph: &Graph, n: usize) -> Result<(Allocation, SolveTrace), SolveError> {
    solve_forest_ef1_so_observed(graph, n, |_| {})
}

/// [`solve_forest_ef1_so`] calling `observer` after every case (n >= 3).
pub fn solve_forest_ef1_so_observed(
    graph: &Graph,
    n: usize,
    mut observer: impl FnMut(&ForestStep<'_, '_>),
) -> Result<(Allocation, SolveTrace), SolveError> {
    require_agents(n, 2, "at least two agents are needed")?;
    if !graph.is_forest() {
        return Err(SolveError::NotAForest);
    }
    let core = Core::of(graph);
    let g = &core.graph;
    let forest = g.root_forest(None).map_err(|e| SolveError::Internal(e.to_string()))?;
    if n == 2 {
        let assignment: Vec<Option<usize>> = forest.depths().iter().map(|d| Some(d % 2)).collect();
        let stats = BundleStats::from_assignment(g, 2, &assignment).expect("two bundles");
        let a = Allocation::from_stats(&stats);
        return Ok(core.lift(graph, a, SolveTrace::default()));
    }
    let mut peel = Peel {
        state: Labeled::new(BundleStats::new(g, n)),
        forest,
        trace: SolveTrace::default(),
    };
    let m = g.num_vertices();
    let budget = 4 * m;
    let mut remaining = m;
    while remaining > 0 {
        peel.trace.iterations += 1;
        budget_check(peel.trace.iterations, budget, "forest peeling")?;
        peel.state.relabel();
        let phi_before = peel.state.phi();
        let before = peel.trace.moves.len();
        let case = peel.step()?;
        remaining -= peel.trace.moves.len() - before;
        peel.trace.cases.push(CaseRecord {
            case,
            phi_before,
            phi_after: peel.state.phi(),
        });
        observer(&ForestStep {
            case,
            stats: &peel.state.stats,
            forest: &peel.forest,
        });
    }
    let a = Allocation::from_stats(&peel.state.stats);
    Ok(core.lift(graph, a, peel.trace))
}

struct Peel<'g> {
    state: Labeled<'g>,
    forest: RootedForest,
    trace: SolveTrace,
}

impl Peel<'_> {
    fn degree(&self, v: Vertex) -> usize {
        self.state.stats.graph().degree(v)
    }

    /// A frontier root is feasible for a bundle when its parent is absent
    /// or elsewhere.
    fn feasible(&self, r: Vertex, slot: usize) -> bool {
        self.forest
            .parent(r)
            .is_none_or(|p| self.state.stats.assignment(p) != Some(slot))
    }

    fn place(&mut self, v: Vertex, slot: usize, case: Case) -> Result<(), SolveError> {
        if !self.forest.take(v) {
            return Err(SolveError::Internal(format!("vertex {v} is not a frontier root")));
        }
        self.state.move_item(&mut self.trace, Routine::Case(case), v, slot)
    }

    fn leaf_children(&self, v: Vertex) -> Vec<Vertex> {
        self.forest
            .children(v)
            .iter()
            .copied()
            .filter(|&c| !self.forest.is_allocated(c) && self.degree(c) == 1)
            .collect()
    }

    /// Least-valued position among `candidates`. On a tie, the least one
    /// for which another tied bundle still has a feasible root (ignoring
    /// the `pending` leaf-children), else the least one.
    fn pick(&self, candidates: &[usize], pending: &[Vertex]) -> usize {
        let min = candidates
            .iter()
            .map(|&p| self.state.value_at(p))
            .min()
            .expect("candidates");
        let tied: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&p| self.state.value_at(p) == min)
            .collect();
        if tied.len() >= 2 {
            let has_root = |p: usize| {
                let slot = self.state.slot(p);
                self.forest
                    .roots()
                    .any(|r| !pending.contains(&r) && self.feasible(r, slot))
            };
            if let Some(&j) = tied.iter().find(|&&j| tied.iter().any(|&k| k != j && has_root(k))) {
                return j;
            }
        }
        tied[0]
    }

    fn deal_leaves(&mut self, leaves: &[Vertex], candidates: &[usize], case: Case) -> Result<(), SolveError> {
        for (t, &leaf) in leaves.iter().enumerate() {
            let j = self.pick(candidates, &leaves[t + 1..]);
            let slot = self.state.slot(j);
            self.place(leaf, slot, case)?;
        }
        Ok(())
    }

    /// Gives unallocated children of `parent` to the least bundle while
    /// its value is below `target`.
    fn feed_least(&mut self, parent: Vertex, target: i64, case: Case) -> Result<(), SolveError> {
        let slot = self.state.slot(0);
        while self.state.value_at(0) < target {
            let child = self
                .forest
                .children(parent)
                .iter()
                .copied()
                .find(|&c| !self.forest.is_allocated(c))
                .ok_or_else(|| SolveError::Internal(format!("children of {parent} ran out in case {case}")))?;
            self.place(child, slot, case)?;
        }
        Ok(())
    }

    fn step(&mut self) -> Result<Case, SolveError> {
        let n = self.state.n();
        let least = self.state.slot(0);
        let case_one = self.forest.roots().find(|&r| self.feasible(r, least));
        if let Some(r) = case_one {
            self.place(r, least, Case::One)?;
            let leaves = self.leaf_children(r);
            let others: Vec<usize> = (1..n).collect();
            self.deal_leaves(&leaves, &others, Case::One)?;
            return Ok(Case::One);
        }
        // Every root now hangs below the least bundle, so it is feasible
        // for all other bundles.
        let o_t = self
            .forest
            .roots()
            .max_by_key(|&r| (self.degree(r), std::cmp::Reverse(r)))
            .ok_or_else(|| SolveError::Internal("empty frontier".into()))?;
        let deg_t = self.degree(o_t) as i64;
        let v1 = self.state.value_at(0);
        let second = self.state.slot(1);
        let (drop2, deg2) = match self.state.stats.min_drop(second) {
            Some((o, value)) => (value, self.degree(o) as i64),
            None => (0, 0),
        };
        if v1 > drop2 || deg_t > deg2 {
            self.place(o_t, second, Case::Two)?;
            let h2 = self.state.drop_value_at(1);
            let leaves = self.leaf_children(o_t);
            let others: Vec<usize> = std::iter::once(0).chain(2..n).collect();
            self.deal_leaves(&leaves, &others, Case::Two)?;
            self.feed_least(o_t, h2, Case::Two)?;
            return Ok(Case::Two);
        }
        let drops: Vec<(usize, i64)> = (2..n).map(|p| (p, self.state.drop_value_at(p))).collect();
        if let Some(&(j, drop_j)) = drops.iter().min_by_key(|&&(p, d)| (d, p)) {
            if v1 > drop_j {
                let slot_j = self.state.slot(j);
                self.place(o_t, slot_j, Case::Three)?;
                for leaf in self.leaf_children(o_t) {
                    self.place(leaf, least, Case::Three)?;
                }
                let target = self.state.value_at(1).min(drop_j + deg_t);
                self.feed_least(o_t, target, Case::Three)?;
                return Ok(Case::Three);
            }
        }
        Err(SolveError::Internal("no case applies".into()))
    }
}
