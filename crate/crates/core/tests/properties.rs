//! Property tests. Checkers are compared against naive definitions that
//! recompute cut values from scratch; solvers are checked only through the
//! public checkers.

use std::collections::HashSet;

use proptest::prelude::*;

use fairdiv::algorithms::{
    dispatch_solve, equitable_cut, greedy_two_agents, solve_ef1_ts_n4, solve_ef1_wts, solve_forest_ef1_so,
    ts_subroutine, wts_subroutine, SolveGoal,
};
use fairdiv::allocation::{
    check_alpha_ef1, check_ef, check_ef1, check_so, check_ts, check_wts, Alpha, Potential, SoVerdict,
};
use fairdiv::instances::{format_instance, parse_instance, Instance};
use fairdiv::oracle::{
    enumerate_allocations, oracle_exists, oracle_leximin, oracle_max_cut, oracle_pareto, OracleCaps, OracleQuery,
    Predicate,
};
use fairdiv::valuation::cut_value;
use fairdiv::{Allocation, BundleStats, Graph, Vertex};

fn graph_strategy(min_m: usize, max_m: usize) -> impl Strategy<Value = Graph> {
    (min_m..=max_m).prop_flat_map(|m| {
        let pairs: Vec<(Vertex, Vertex)> = (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v))).collect();
        let k = pairs.len();
        proptest::collection::vec(any::<bool>(), k).prop_map(move |keep| {
            let edges = pairs.iter().zip(&keep).filter(|(_, &b)| b).map(|(&e, _)| e);
            Graph::new(m, edges).unwrap()
        })
    })
}

/// Graph without isolated vertices: each vertex `v > 0` is joined to some
/// earlier vertex, plus random extra edges.
fn connected_strategy(min_m: usize, max_m: usize) -> impl Strategy<Value = Graph> {
    (min_m..=max_m).prop_flat_map(|m| {
        let parents = (1..m).map(|v| 0..v).collect::<Vec<_>>();
        let pairs: Vec<(Vertex, Vertex)> = (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v))).collect();
        let k = pairs.len();
        (parents, proptest::collection::vec(0u8..4, k)).prop_map(move |(parents, extra)| {
            let mut set: HashSet<(Vertex, Vertex)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            set.extend(pairs.iter().zip(&extra).filter(|(_, &x)| x == 0).map(|(&e, _)| e));
            let mut edges: Vec<_> = set.into_iter().collect();
            edges.sort();
            Graph::new(m, edges).unwrap()
        })
    })
}

fn forest_strategy(min_m: usize, max_m: usize) -> impl Strategy<Value = Graph> {
    (min_m..=max_m).prop_flat_map(|m| {
        let parents = (1..m).map(|v| 0..v).collect::<Vec<_>>();
        (parents, proptest::collection::vec(any::<bool>(), m - 1)).prop_map(move |(parents, cut)| {
            // Drop some tree edges, but only where both sides keep an edge.
            let mut edges: Vec<(Vertex, Vertex)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            let mut kept = Vec::new();
            for (k, &e) in edges.iter().enumerate() {
                let rest: Vec<_> = kept.iter().chain(&edges[k + 1..]).copied().collect();
                let touches = |v: Vertex| rest.iter().any(|&(a, b)| a == v || b == v);
                if !(cut[k] && touches(e.0) && touches(e.1)) {
                    kept.push(e);
                }
            }
            edges = kept;
            Graph::new(m, edges).unwrap()
        })
    })
}

fn assignment_strategy(m: usize, n: usize, partial: bool) -> impl Strategy<Value = Vec<Option<usize>>> {
    let hi = if partial { n + 1 } else { n };
    proptest::collection::vec(0..hi, m).prop_map(move |d| d.into_iter().map(|b| (b < n).then_some(b)).collect())
}

fn state(max_m: usize, max_n: usize, partial: bool) -> impl Strategy<Value = (Graph, Allocation)> {
    (graph_strategy(1, max_m), 1..=max_n).prop_flat_map(move |(g, n)| {
        let m = g.num_vertices();
        assignment_strategy(m, n, partial).prop_map(move |asg| {
            let a = Allocation::from_assignment(n, &asg).unwrap();
            (g.clone(), a)
        })
    })
}

// Naive definitions.

fn naive_values(g: &Graph, a: &Allocation) -> Vec<i64> {
    a.bundles().iter().map(|b| cut_value(g, b.iter().copied())).collect()
}

fn without(b: &[Vertex], o: Vertex) -> Vec<Vertex> {
    b.iter().copied().filter(|&x| x != o).collect()
}

fn with(b: &[Vertex], o: Vertex) -> Vec<Vertex> {
    b.iter().copied().chain([o]).collect()
}

fn naive_ef(g: &Graph, a: &Allocation) -> bool {
    let v = naive_values(g, a);
    v.iter().all(|&x| v.iter().all(|&y| x >= y))
}

/// `num/den`-EF1: for all i, j some item of A_j brings A_j within reach.
fn naive_alpha_ef1(g: &Graph, a: &Allocation, num: i64, den: i64) -> bool {
    let v = naive_values(g, a);
    let n = a.num_bundles();
    (0..n).all(|i| {
        (0..n).filter(|&j| j != i).all(|j| {
            let b = a.bundle(j);
            den * v[i] >= num * v[j] || b.iter().any(|&o| den * v[i] >= num * cut_value(g, without(b, o)))
        })
    })
}

/// Transfer of one item: donor gain, receiver gain.
fn transfers(g: &Graph, a: &Allocation) -> Vec<(i64, i64)> {
    let v = naive_values(g, a);
    let n = a.num_bundles();
    let mut out = Vec::new();
    for i in 0..n {
        for &o in a.bundle(i) {
            let d = cut_value(g, without(a.bundle(i), o)) - v[i];
            for j in (0..n).filter(|&j| j != i) {
                let r = cut_value(g, with(a.bundle(j), o)) - v[j];
                out.push((d, r));
            }
        }
    }
    out
}

fn naive_ts(g: &Graph, a: &Allocation) -> bool {
    transfers(g, a)
        .iter()
        .all(|&(d, r)| !(d >= 0 && r >= 0 && (d > 0 || r > 0)))
}

fn naive_wts(g: &Graph, a: &Allocation) -> bool {
    transfers(g, a).iter().all(|&(d, r)| !(d > 0 && r > 0))
}

fn holds(r: Result<fairdiv::FairnessReport, fairdiv::allocation::AllocationError>) -> bool {
    r.unwrap().holds
}

fn isolated_free(g: &Graph) -> bool {
    g.isolated_vertices().is_empty()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cut_value_is_symmetric(g in graph_strategy(1, 12), mask in any::<u16>()) {
        let s: Vec<Vertex> = (0..g.num_vertices()).filter(|&v| mask >> v & 1 == 1).collect();
        let rest: Vec<Vertex> = (0..g.num_vertices()).filter(|&v| mask >> v & 1 == 0).collect();
        prop_assert_eq!(cut_value(&g, s.iter().copied()), cut_value(&g, rest.iter().copied()));
        let by_edges = g.edges().iter().filter(|&&(u, v)| s.contains(&u) != s.contains(&v)).count() as i64;
        prop_assert_eq!(cut_value(&g, s.iter().copied()), by_edges);
    }

    #[test]
    fn incremental_values_match_recount(
        (g, a) in state(12, 5, true),
        moves in proptest::collection::vec((0usize..12, 0usize..5), 0..30),
    ) {
        let n = a.num_bundles();
        let mut stats = a.stats(&g).unwrap();
        for (o, to) in moves {
            let (o, to) = (o % g.num_vertices(), to % n);
            let from = stats.assignment(o);
            let gain = stats.gain(to, o);
            let before = cut_value(&g, stats.bundle(to).iter().copied());
            if stats.apply_move(o, from, Some(to)).is_ok() && from != Some(to) {
                let after = cut_value(&g, stats.bundle(to).iter().copied());
                prop_assert_eq!(after - before, gain);
            }
            prop_assert_eq!(stats.values().to_vec(), stats.recompute_values());
        }
        let out = Allocation::from_stats(&stats);
        prop_assert_eq!(out.values(&g).unwrap(), naive_values(&g, &out));
    }

    #[test]
    fn checkers_match_definitions((g, a) in state(9, 4, false)) {
        prop_assert_eq!(holds(check_ef(&g, &a)), naive_ef(&g, &a));
        prop_assert_eq!(holds(check_ef1(&g, &a)), naive_alpha_ef1(&g, &a, 1, 1));
        prop_assert_eq!(holds(check_alpha_ef1(&g, &a, Alpha::HALF)), naive_alpha_ef1(&g, &a, 1, 2));
        prop_assert_eq!(holds(check_alpha_ef1(&g, &a, Alpha::new(2, 3).unwrap())), naive_alpha_ef1(&g, &a, 2, 3));
        prop_assert_eq!(holds(check_ts(&g, &a)), naive_ts(&g, &a));
        prop_assert_eq!(holds(check_wts(&g, &a)), naive_wts(&g, &a));
    }

    #[test]
    fn ef1_matches_definition_on_partial_allocations((g, a) in state(9, 4, true)) {
        prop_assert_eq!(holds(check_ef1(&g, &a)), naive_alpha_ef1(&g, &a, 1, 1));
        prop_assert_eq!(holds(check_alpha_ef1(&g, &a, Alpha::ONE)), holds(check_ef1(&g, &a)));
    }

    #[test]
    fn implications((g, a) in state(9, 4, false)) {
        let ef = holds(check_ef(&g, &a));
        let ef1 = holds(check_ef1(&g, &a));
        let half = holds(check_alpha_ef1(&g, &a, Alpha::HALF));
        let ts = holds(check_ts(&g, &a));
        let wts = holds(check_wts(&g, &a));
        prop_assert!(!ef || ef1);
        prop_assert!(!ef1 || half);
        prop_assert!(!ts || wts);
        let so = check_so(&g, &a, Some(&OracleCaps::default())).unwrap();
        if so.verdict == SoVerdict::Yes {
            prop_assert!(ts);
        }
    }

    #[test]
    fn verdicts_ignore_bundle_labels((g, a) in state(9, 4, false), seed in any::<u64>()) {
        let n = a.num_bundles();
        let mut order: Vec<usize> = (0..n).collect();
        fairdiv::rng::SplitMix64::new(seed).shuffle(&mut order);
        let b = a.permuted(&order);
        prop_assert_eq!(holds(check_ef1(&g, &a)), holds(check_ef1(&g, &b)));
        prop_assert_eq!(holds(check_ts(&g, &a)), holds(check_ts(&g, &b)));
        prop_assert_eq!(holds(check_wts(&g, &a)), holds(check_wts(&g, &b)));
        let caps = OracleCaps::default();
        prop_assert_eq!(check_so(&g, &a, Some(&caps)).unwrap().verdict, check_so(&g, &b, Some(&caps)).unwrap().verdict);
    }

    #[test]
    fn potential_is_min_and_count(values in proptest::collection::vec(0i64..6, 1..8)) {
        let p = Potential::from_values(&values);
        let min = *values.iter().min().unwrap();
        prop_assert_eq!(p.min_value, min);
        prop_assert_eq!(-p.neg_min_count, values.iter().filter(|&&v| v == min).count() as i64);
    }

    #[test]
    fn greedy_is_ef_and_ts(g in connected_strategy(2, 14)) {
        let (a, trace) = greedy_two_agents(&g).unwrap();
        prop_assert!(holds(check_ef(&g, &a)));
        prop_assert!(holds(check_ts(&g, &a)));
        prop_assert!(trace.moves.len() <= 2 * g.num_edges());
        prop_assert!(trace.welfare_history().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ts_solver_output(g in connected_strategy(4, 12), n in 4usize..=6) {
        prop_assume!(g.num_vertices() >= n);
        let (a, _) = solve_ef1_ts_n4(&g, n).unwrap();
        prop_assert!(a.is_complete());
        prop_assert!(naive_alpha_ef1(&g, &a, 1, 1));
        prop_assert!(naive_ts(&g, &a));
    }

    #[test]
    fn wts_solver_output(g in connected_strategy(2, 12), n in 2usize..=6) {
        prop_assume!(g.num_vertices() >= n);
        let (a, _) = solve_ef1_wts(&g, n).unwrap();
        prop_assert!(a.is_complete() && a.all_nonempty());
        prop_assert!(naive_alpha_ef1(&g, &a, 1, 1));
        prop_assert!(naive_wts(&g, &a));
        let (e, _) = equitable_cut(&g, n).unwrap();
        let v = naive_values(&g, &e);
        prop_assert!(v.iter().max().unwrap() - v.iter().min().unwrap() <= g.max_degree() as i64);
    }

    #[test]
    fn forest_solver_output(g in forest_strategy(2, 20), n in 2usize..=5) {
        prop_assume!(isolated_free(&g) && g.num_vertices() >= n);
        let (a, _) = solve_forest_ef1_so(&g, n).unwrap();
        prop_assert!(a.is_complete());
        prop_assert!(naive_alpha_ef1(&g, &a, 1, 1));
        let welfare: i64 = naive_values(&g, &a).iter().sum();
        prop_assert_eq!(welfare, 2 * g.num_edges() as i64);
    }

    #[test]
    fn subroutines_reach_their_targets((g, a) in state(10, 6, false)) {
        prop_assume!(isolated_free(&g));
        let (w, wt) = wts_subroutine(&g, &a).unwrap();
        prop_assert!(naive_wts(&g, &w));
        prop_assert!(wt.potential_history().windows(2).all(|p| p[0] < p[1]));
        if a.num_bundles() >= 4 {
            let sorted = fairdiv::allocation::sort_bundles(&g, &a).unwrap();
            let (t, tt) = ts_subroutine(&g, &sorted, None).unwrap();
            prop_assert!(naive_ts(&g, &t));
            prop_assert!(tt.welfare_history().windows(2).all(|p| p[0] < p[1]));
            prop_assert!(tt.potential_history().windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn isolated_vertices_do_not_change_values(g in connected_strategy(3, 10), extra in 1usize..4, n in 2usize..=4) {
        prop_assume!(g.num_vertices() >= n);
        let m = g.num_vertices();
        let padded = Graph::new(m + extra, g.edges().iter().copied()).unwrap();
        let (a, _) = solve_ef1_wts(&g, n).unwrap();
        let (b, _) = solve_ef1_wts(&padded, n).unwrap();
        prop_assert!(b.is_complete());
        prop_assert_eq!(naive_values(&g, &a), naive_values(&padded, &b));
        let core: Vec<Vec<Vertex>> = b.bundles().iter().map(|x| x.iter().copied().filter(|&v| v < m).collect()).collect();
        prop_assert_eq!(core, a.bundles().to_vec());
        prop_assert!(holds(check_ef1(&padded, &b)) && holds(check_wts(&padded, &b)));
    }

    #[test]
    fn solvers_are_deterministic(g in connected_strategy(4, 12), n in 2usize..=6) {
        prop_assume!(g.num_vertices() >= n);
        for goal in [SolveGoal::Ef1Ts, SolveGoal::Ef1Wts, SolveGoal::Equitable] {
            match (dispatch_solve(&g, n, goal), dispatch_solve(&g, n, goal)) {
                (Ok(x), Ok(y)) => {
                    prop_assert_eq!(x.allocation, y.allocation);
                    prop_assert_eq!(x.trace, y.trace);
                }
                (Err(x), Err(y)) => prop_assert_eq!(x, y),
                _ => prop_assert!(false, "one run failed"),
            }
        }
    }

    #[test]
    fn instance_text_round_trips(g in graph_strategy(1, 12), n in 1usize..5) {
        let inst = Instance::new(g, n, "prop");
        let back = parse_instance(&format_instance(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn enumeration_is_complete_and_distinct(g in graph_strategy(1, 6), n in 1usize..=3) {
        let caps = OracleCaps::default();
        let all: Vec<Allocation> = enumerate_allocations(&g, n, true, &caps).unwrap().collect();
        prop_assert_eq!(all.len(), n.pow(g.num_vertices() as u32));
        let distinct: HashSet<Vec<Option<usize>>> = all.iter().map(|a| a.assignment()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        let partial = enumerate_allocations(&g, n, false, &caps).unwrap().count();
        prop_assert_eq!(partial, (n + 1).pow(g.num_vertices() as u32));
    }

    #[test]
    fn max_cut_agrees_with_enumeration(g in graph_strategy(1, 9)) {
        let caps = OracleCaps::default();
        let (cut, value) = oracle_max_cut(&g, &caps).unwrap();
        prop_assert_eq!(naive_values(&g, &cut)[0], value);
        let best = enumerate_allocations(&g, 2, true, &caps)
            .unwrap()
            .map(|a| naive_values(&g, &a)[0])
            .max()
            .unwrap();
        prop_assert_eq!(value, best);
        if g.num_vertices() >= 2 && isolated_free(&g) {
            let (a, _) = greedy_two_agents(&g).unwrap();
            prop_assert!(naive_values(&g, &a)[0] <= value);
        }
    }

    #[test]
    fn leximin_is_pareto_and_half_ef1(g in graph_strategy(2, 7), n in 2usize..=3) {
        let caps = OracleCaps::default();
        let a = oracle_leximin(&g, n, &caps).unwrap();
        prop_assert!(oracle_pareto(&g, &a, &caps).unwrap());
        prop_assert!(naive_alpha_ef1(&g, &a, 1, 2));
        let mut best = naive_values(&g, &a);
        best.sort();
        for b in enumerate_allocations(&g, n, true, &caps).unwrap() {
            let mut v = naive_values(&g, &b);
            v.sort();
            prop_assert!(v <= best);
        }
    }

    #[test]
    fn oracle_agrees_with_solvers(g in connected_strategy(2, 8), n in 2usize..=4) {
        prop_assume!(g.num_vertices() >= n);
        let caps = OracleCaps::default();
        let q = OracleQuery::exists(&[Predicate::Ef1, Predicate::Wts, Predicate::NonEmpty]).with_caps(caps);
        let report = oracle_exists(&g, n, &q).unwrap();
        prop_assert!(report.found());
        let w = report.witness_allocation(g.num_vertices()).unwrap();
        prop_assert!(naive_alpha_ef1(&g, &w, 1, 1) && naive_wts(&g, &w) && w.all_nonempty());
        if n >= 4 {
            let q = OracleQuery::exists(&[Predicate::Ef1, Predicate::Ts]).with_caps(caps);
            prop_assert!(oracle_exists(&g, n, &q).unwrap().found());
        }
        let sym = oracle_exists(&g, n, &q.clone().with_symmetry(true).with_threads(3)).unwrap();
        prop_assert_eq!(sym.witness, report.witness);
    }

    #[test]
    fn pareto_matches_pairwise_dominance((g, a) in state(6, 3, false)) {
        let caps = OracleCaps::default();
        let mine = naive_values(&g, &a);
        let n = a.num_bundles();
        // Dominance under some matching of bundles, checked over all permutations.
        let perms = permutations(n);
        let dominated = enumerate_allocations(&g, n, true, &caps).unwrap().any(|b| {
            let v = naive_values(&g, &b);
            perms.iter().any(|p| {
                (0..n).all(|k| v[p[k]] >= mine[k]) && (0..n).any(|k| v[p[k]] > mine[k])
            })
        });
        prop_assert_eq!(oracle_pareto(&g, &a, &caps).unwrap(), !dominated);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn stats_of_round_robin() {
    let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let asg: Vec<Option<usize>> = (0..4).map(|v| Some(v % 2)).collect();
    let stats = BundleStats::from_assignment(&g, 2, &asg).unwrap();
    assert_eq!(stats.values(), &[3, 3]);
}
