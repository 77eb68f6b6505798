use super::{
    budget_check, require_agents, round_robin, Case, CaseRecord, Core, Labeled, Routine, SolveError, SolveTrace,
};
use crate::allocation::Allocation;
use crate::graph::{Graph, Vertex};

/// Moves strict chores until the allocation is weakly transfer stable: a
/// chore of any bundle but the least goes to the least bundle, a chore of the
/// least bundle goes to the second least.
fn run_wts(state: &mut Labeled<'_>, trace: &mut SolveTrace) -> Result<(), SolveError> {
    state.invocation += 1;
    let n = state.n();
    if n < 2 {
        return Ok(());
    }
    let budget = 2 * state.stats.graph().num_edges() * n;
    let mut moves = 0;
    loop {
        let donor = (0..n).find_map(|p| {
            let s = state.slot(p);
            state
                .stats
                .bundle(s)
                .iter()
                .find(|&&o| state.stats.gain(s, o) < 0)
                .map(|&o| (p, o))
        });
        let Some((p, o)) = donor else {
            return Ok(());
        };
        let k = if p != 0 { 0 } else { 1 };
        if state.gain_at(k, o) <= 0 {
            return Err(SolveError::Internal(format!(
                "strict chore {o} is not a good for the receiving bundle"
            )));
        }
        moves += 1;
        budget_check(moves, budget, "wTS subroutine")?;
        let to = state.slot(k);
        state.move_item(trace, Routine::WtsSubroutine, o, to)?;
        state.relabel();
    }
}

/// Runs the weak-transfer-stability subroutine on a complete allocation.
/// Bundle indices of the output match the input.
pub fn wts_subroutine(graph: &Graph, a: &Allocation) -> Result<(Allocation, SolveTrace), SolveError> {
    require_agents(a.num_bundles(), 1, "at least one bundle is needed")?;
    if !a.is_complete() {
        return Err(SolveError::InvalidInput("allocation is partial".into()));
    }
    let stats = a.stats(graph).map_err(|e| SolveError::InvalidInput(e.to_string()))?;
    let mut state = Labeled::new(stats);
    let mut trace = SolveTrace::default();
    run_wts(&mut state, &mut trace)?;
    trace.iterations = trace.moves.len();
    Ok((Allocation::from_stats(&state.stats), trace))
}

/// EF1 and wTS with non-empty bundles for any `n <= m` (`m` counting
/// non-isolated vertices).
pub fn solve_ef1_wts(graph: &Graph, n: usize) -> Result<(Allocation, SolveTrace), SolveError> {
    require_agents(n, 1, "at least one agent is needed")?;
    if n == 1 {
        let all = (0..graph.num_vertices()).collect();
        let a = Allocation::new(graph.num_vertices(), vec![all]).expect("single bundle");
        return Ok((a, SolveTrace::default()));
    }
    let core = Core::of(graph);
    core.require_at_least(n)?;
    let g = &core.graph;
    let m = g.num_vertices();
    let mut state = Labeled::new(round_robin(g, n));
    let mut trace = SolveTrace::default();
    run_wts(&mut state, &mut trace)?;
    let budget = 8 * m * m * n;
    let mut in_s = vec![false; m];
    let mut count_s = vec![0i64; m];
    loop {
        let envied: Vec<usize> = (1..n).filter(|&p| state.envied_at(p)).collect();
        let Some(&first) = envied.first() else {
            break;
        };
        trace.iterations += 1;
        budget_check(trace.iterations, budget, "EF1+wTS main loop")?;
        let phi_before = state.phi();
        let positive: Option<Vertex> = envied.iter().find_map(|&p| {
            state
                .stats
                .bundle(state.slot(p))
                .iter()
                .copied()
                .find(|&o| state.gain_at(0, o) > 0)
        });
        let case = if let Some(o) = positive {
            let to = state.slot(0);
            state.move_item(&mut trace, Routine::Case(Case::One), o, to)?;
            Case::One
        } else {
            let slot_i = state.slot(first);
            let v1 = state.value_at(0);
            let items: Vec<Vertex> = state.stats.bundle(slot_i).iter().copied().collect();
            let mut value_s = 0i64;
            while value_s <= v1 {
                let o = items
                    .iter()
                    .copied()
                    .find(|&o| !in_s[o] && g.degree(o) as i64 - 2 * count_s[o] > 0)
                    .ok_or_else(|| SolveError::Internal("no positive item left while building S".into()))?;
                value_s += g.degree(o) as i64 - 2 * count_s[o];
                in_s[o] = true;
                for &w in g.neighbors(o) {
                    count_s[w] += 1;
                }
            }
            let j = (1..n)
                .find(|&p| p != first)
                .ok_or_else(|| SolveError::Internal("no third bundle to absorb the remainder".into()))?;
            let to = state.slot(j);
            for &o in &items {
                if !in_s[o] {
                    state.move_item(&mut trace, Routine::Case(Case::Two), o, to)?;
                }
            }
            for &o in &items {
                if in_s[o] {
                    in_s[o] = false;
                    for &w in g.neighbors(o) {
                        count_s[w] -= 1;
                    }
                }
            }
            Case::Two
        };
        state.relabel();
        run_wts(&mut state, &mut trace)?;
        trace.cases.push(CaseRecord {
            case,
            phi_before,
            phi_after: state.phi(),
        });
    }
    if let Some(empty) = (0..n).find(|&s| state.stats.bundle_len(s) == 0) {
        return Err(SolveError::Internal(format!("bundle {empty} ended up empty")));
    }
    let a = Allocation::from_stats(&state.stats);
    Ok(core.lift(graph, a, trace))
}

/// Non-empty `n`-partition whose bundle cut values differ pairwise by at
/// most the maximum degree.
pub fn equitable_cut(graph: &Graph, n: usize) -> Result<(Allocation, SolveTrace), SolveError> {
    require_agents(n, 2, "an equitable cut needs at least two parts")?;
    if n > graph.num_vertices() {
        return Err(SolveError::InvalidAgents {
            n,
            reason: "more parts than vertices",
        });
    }
    solve_ef1_wts(graph, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{check_ef1, check_wts};

    #[test]
    fn path_of_three_moves_the_middle_vertex() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let a = Allocation::new(3, vec![vec![0, 1, 2], vec![]]).unwrap();
        let (out, trace) = wts_subroutine(&g, &a).unwrap();
        let mut parts: Vec<_> = out.bundles().to_vec();
        parts.sort();
        assert_eq!(parts, vec![vec![0, 2], vec![1]]);
        assert_eq!(out.values(&g).unwrap(), vec![2, 2]);
        assert!(trace.potential_history().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn wts_input_is_unchanged() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let a = Allocation::new(3, vec![vec![1], vec![0, 2]]).unwrap();
        let (out, trace) = wts_subroutine(&g, &a).unwrap();
        assert_eq!(out, a);
        assert!(trace.moves.is_empty());
    }

    #[test]
    fn fig3_three_agents() {
        let g = Graph::new(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        let (a, _) = solve_ef1_wts(&g, 3).unwrap();
        assert!(check_ef1(&g, &a).unwrap().holds);
        assert!(check_wts(&g, &a).unwrap().holds);
        // Round-robin start ({0,3},{1,4},{2}) is already EF1 and wTS.
        assert_eq!(a.values(&g).unwrap(), vec![3, 3, 2]);
    }

    #[test]
    fn single_agent_takes_everything() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let (a, _) = solve_ef1_wts(&g, 1).unwrap();
        assert_eq!(a.bundles(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn equitable_cuts() {
        let k4 = Graph::new(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v)))).unwrap();
        let (a, _) = equitable_cut(&k4, 2).unwrap();
        let v = a.values(&k4).unwrap();
        assert_eq!(v[0], v[1]);

        let fig1 = Graph::new(8, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (4, 6), (4, 7)]).unwrap();
        let (a, _) = equitable_cut(&fig1, 3).unwrap();
        let v = a.values(&fig1).unwrap();
        assert!(v.iter().max().unwrap() - v.iter().min().unwrap() <= 4);
        assert!(equitable_cut(&k4, 5).is_err());
        assert!(equitable_cut(&k4, 1).is_err());
    }
}
