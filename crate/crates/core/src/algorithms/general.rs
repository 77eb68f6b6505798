use super::{
    budget_check, require_agents, round_robin, Case, CaseRecord, Core, Labeled, Routine, SolveError, SolveTrace,
};
use crate::allocation::Allocation;
use crate::graph::{Graph, Vertex};

/// Moves items that are non-positive for their own bundle until the
/// allocation is transfer stable. The `special` bundle never receives.
fn run_ts(state: &mut Labeled<'_>, special: Option<usize>, trace: &mut SolveTrace) -> Result<(), SolveError> {
    state.invocation += 1;
    let g = state.stats.graph();
    let budget = 2 * g.num_edges();
    let n = state.n();
    let mut moves = 0;
    loop {
        let donor = (0..n).find_map(|p| {
            let s = state.slot(p);
            state
                .stats
                .bundle(s)
                .iter()
                .find(|&&o| g.degree(o) > 0 && state.stats.gain(s, o) <= 0)
                .map(|&o| (p, o))
        });
        let Some((p, o)) = donor else {
            return Ok(());
        };
        let allowed = |k: usize| Some(state.slot(k)) != special;
        let receiver = if p == 0 {
            (1..n).find(|&k| allowed(k) && state.gain_at(k, o) > 0)
        } else if allowed(0) && state.gain_at(0, o) > 0 {
            Some(0)
        } else {
            (0..n).find(|&k| k != p && allowed(k) && state.gain_at(k, o) > 0)
        };
        let k =
            receiver.ok_or_else(|| SolveError::Internal(format!("no receiver for vertex {o} in the TS subroutine")))?;
        moves += 1;
        budget_check(moves, budget, "TS subroutine")?;
        let to = state.slot(k);
        state.move_item(trace, Routine::TsSubroutine, o, to)?;
        state.relabel();
    }
}

/// Runs the transfer-stability subroutine on a complete allocation. The
/// bundle with index `special` (if any) never receives an item. Bundle
/// indices of the output match the input.
pub fn ts_subroutine(
    graph: &Graph,
    a: &Allocation,
    special: Option<usize>,
) -> Result<(Allocation, SolveTrace), SolveError> {
    let n = a.num_bundles();
    require_agents(n, 4, "the TS subroutine needs at least four bundles")?;
    if special.is_some_and(|s| s >= n) {
        return Err(SolveError::InvalidInput("special bundle out of range".to_string()));
    }
    if !a.is_complete() {
        return Err(SolveError::InvalidInput("allocation is partial".into()));
    }
    let stats = a.stats(graph).map_err(|e| SolveError::InvalidInput(e.to_string()))?;
    let mut state = Labeled::new(stats);
    let mut trace = SolveTrace::default();
    run_ts(&mut state, special, &mut trace)?;
    trace.iterations = trace.moves.len();
    Ok((Allocation::from_stats(&state.stats), trace))
}

/// EF1 and TS for `n >= 4` agents on any graph.
pub fn solve_ef1_ts_n4(graph: &Graph, n: usize) -> Result<(Allocation, SolveTrace), SolveError> {
    require_agents(n, 4, "this algorithm needs at least four agents")?;
    let core = Core::of(graph);
    core.require_at_least(n)?;
    let g = &core.graph;
    let m = g.num_vertices();
    let mut state = Labeled::new(round_robin(g, n));
    let mut trace = SolveTrace::default();
    run_ts(&mut state, None, &mut trace)?;
    let budget = 8 * m * m * n;
    loop {
        let violators: Vec<usize> = (1..n).filter(|&p| state.envied_at(p)).collect();
        if violators.is_empty() {
            break;
        }
        trace.iterations += 1;
        budget_check(trace.iterations, budget, "EF1+TS main loop")?;
        let phi_before = state.phi();
        let positive: Option<(usize, Vertex)> = violators.iter().find_map(|&p| {
            state
                .stats
                .bundle(state.slot(p))
                .iter()
                .find(|&&o| state.gain_at(0, o) > 0)
                .map(|&o| (p, o))
        });
        if let Some((_, o)) = positive {
            let to = state.slot(0);
            state.move_item(&mut trace, Routine::Case(Case::I), o, to)?;
            state.relabel();
            run_ts(&mut state, None, &mut trace)?;
            trace.cases.push(CaseRecord {
                case: Case::I,
                phi_before,
                phi_after: state.phi(),
            });
            continue;
        }
        if violators.len() != 1 {
            return Err(SolveError::Internal(format!(
                "{} EF1-envied bundles without a positive item for the least bundle",
                violators.len()
            )));
        }
        let pos = violators[0];
        let special = state.slot(pos);
        // Labels stay fixed until the loop ends.
        while state.envied_at(pos) && state.stats.bundle(special).iter().all(|&o| state.gain_at(0, o) <= 0) {
            let pick = state
                .stats
                .bundle(special)
                .iter()
                .find_map(|&o| (1..n).find(|&k| k != pos && state.gain_at(k, o) > 0).map(|k| (o, k)));
            let (o, k) =
                pick.ok_or_else(|| SolveError::Internal("no receiver for an item of the special bundle".into()))?;
            let to = state.slot(k);
            state.move_item(&mut trace, Routine::Case(Case::II), o, to)?;
        }
        state.relabel();
        run_ts(&mut state, Some(special), &mut trace)?;
        trace.cases.push(CaseRecord {
            case: Case::II,
            phi_before,
            phi_after: state.phi(),
        });
    }
    let a = Allocation::from_stats(&state.stats);
    Ok(core.lift(graph, a, trace))
}
