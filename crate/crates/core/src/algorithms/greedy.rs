use super::{budget_check, Core, Labeled, Routine, SolveError, SolveTrace};
use crate::allocation::Allocation;
use crate::graph::Graph;
use crate::valuation::BundleStats;

/// First-improvement hill climb on the cut for two agents, starting from
/// `(V, ∅)`. After every move the scan restarts at vertex 0. The result is
/// envy-free (any 2-partition is) and transfer stable (a local maximum).
pub fn greedy_two_agents(graph: &Graph) -> Result<(Allocation, SolveTrace), SolveError> {
    let core = Core::of(graph);
    let g = &core.graph;
    let all: Vec<Option<usize>> = vec![Some(0); g.num_vertices()];
    let stats = BundleStats::from_assignment(g, 2, &all).expect("single bundle");
    let mut state = Labeled::new(stats);
    // Positions are irrelevant here; keep slot 0 = A, slot 1 = B.
    state.order = vec![0, 1];
    let mut trace = SolveTrace::default();
    let budget = 2 * g.num_edges();
    'scan: loop {
        for v in 0..g.num_vertices() {
            let own = state.stats.assignment(v).expect("complete");
            if state.stats.gain(own, v) < 0 {
                budget_check(trace.moves.len() + 1, budget, "greedy hill climb")?;
                state.move_item(&mut trace, Routine::Greedy, v, 1 - own)?;
                trace.iterations += 1;
                continue 'scan;
            }
        }
        break;
    }
    let a = Allocation::from_stats(&state.stats);
    Ok(core.lift(graph, a, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{check_ef, check_ts};

    #[test]
    fn single_edge() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let (a, trace) = greedy_two_agents(&g).unwrap();
        assert_eq!(a.values(&g).unwrap(), vec![1, 1]);
        assert_eq!(trace.moves.len(), 1);
    }

    #[test]
    fn path_of_four() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (a, trace) = greedy_two_agents(&g).unwrap();
        assert_eq!(a.bundles(), &[vec![1, 3], vec![0, 2]]);
        assert_eq!(a.values(&g).unwrap(), vec![3, 3]);
        assert!(check_ef(&g, &a).unwrap().holds);
        assert!(check_ts(&g, &a).unwrap().holds);
        assert!(trace.welfare_history().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn edgeless_graph() {
        let g = Graph::empty(3);
        let (a, trace) = greedy_two_agents(&g).unwrap();
        assert!(a.is_complete());
        assert_eq!(trace.moves.len(), 0);
    }
}
