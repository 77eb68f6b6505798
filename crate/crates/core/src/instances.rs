//! Named instance families, seeded random generators and file I/O.
//!
//! Instance files are line-oriented text with 1-indexed vertices:
//!
//! ```text
//! c label fig1
//! p fairdiv <m> <num_edges> <n>
//! e <u> <v>
//! a <vertex> <bundle>
//! ```
//!
//! `c` lines are comments (a `c label <name>` comment carries the label),
//! and optional `a` lines describe a partial allocation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::Allocation;
use crate::graph::{Graph, GraphError, Vertex};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown instance label `{0}`")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub num_agents: usize,
    pub label: String,
    pub partial: Option<Allocation>,
}

impl Instance {
    pub fn new(graph: Graph, num_agents: usize, label: impl Into<String>) -> Self {
        Self {
            graph,
            num_agents,
            label: label.into(),
            partial: None,
        }
    }

    pub fn with_agents(mut self, n: usize) -> Self {
        self.num_agents = n;
        self
    }
}

fn invalid(msg: impl Into<String>) -> InstanceError {
    InstanceError::InvalidParameter(msg.into())
}

/// The 8-vertex tree: vertex 0 joined to 1..=4, vertex 4 joined to 5..=7.
pub fn gen_fig1() -> Instance {
    let g = Graph::new(8, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (4, 6), (4, 7)]).expect("valid");
    Instance::new(g, 4, "fig1")
}

/// Two hubs (0 and 1) each joined to `d` connectors `2..d+2`; three agents.
pub fn gen_fig3(d: usize) -> Result<Instance, InstanceError> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(invalid(format!("d must be odd and at least 3, got {d}")));
    }
    let edges = (2..d + 2).flat_map(|c| [(0, c), (1, c)]);
    Ok(Instance::new(Graph::new(d + 2, edges)?, 3, format!("fig3:d={d}")))
}

/// Three stars on 14 vertices with a four-bundle partial allocation that is
/// EF1 but leaves vertex 1 unassigned.
pub fn gen_appendix_a() -> Instance {
    let mut edges = vec![(0, 1), (0, 2), (0, 3)];
    edges.extend((5..10).map(|l| (4, l)));
    edges.extend((11..14).map(|l| (10, l)));
    let g = Graph::new(14, edges).expect("valid");
    let partial = Allocation::new(
        14,
        vec![vec![0], vec![2, 3, 5, 6], vec![4, 11, 12, 13], vec![7, 8, 9, 10]],
    )
    .expect("disjoint");
    Instance {
        partial: Some(partial),
        ..Instance::new(g, 4, "appendixA")
    }
}

/// Complete multipartite graph with `n - 2` singleton parts (vertices
/// `0..n-2`) and one independent part of `2n` vertices.
pub fn gen_appendix_b(n: usize) -> Result<Instance, InstanceError> {
    if n < 3 {
        return Err(invalid(format!("n must be at least 3, got {n}")));
    }
    let singles = n - 2;
    let m = singles + 2 * n;
    let mut edges = Vec::new();
    for u in 0..singles {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    Ok(Instance::new(Graph::new(m, edges)?, n, format!("appendixB:n={n}")))
}

pub fn gen_cycle(k: usize) -> Result<Instance, InstanceError> {
    if k < 3 {
        return Err(invalid(format!("a cycle needs at least 3 vertices, got {k}")));
    }
    Ok(Instance::new(
        Graph::new(k, (0..k).map(|i| (i, (i + 1) % k)))?,
        3,
        format!("cycle:{k}"),
    ))
}

pub fn gen_path(k: usize) -> Result<Instance, InstanceError> {
    if k < 2 {
        return Err(invalid(format!("a path needs at least 2 vertices, got {k}")));
    }
    Ok(Instance::new(
        Graph::new(k, (1..k).map(|i| (i - 1, i)))?,
        2,
        format!("path:{k}"),
    ))
}

/// Center 0 with `k` leaves.
pub fn gen_star(k: usize) -> Result<Instance, InstanceError> {
    if k < 1 {
        return Err(invalid("a star needs at least one leaf"));
    }
    Ok(Instance::new(
        Graph::new(k + 1, (1..=k).map(|l| (0, l)))?,
        2,
        format!("star:{k}"),
    ))
}

pub fn gen_complete(k: usize) -> Result<Instance, InstanceError> {
    if k < 2 {
        return Err(invalid(format!("a complete graph needs at least 2 vertices, got {k}")));
    }
    let edges = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v)));
    Ok(Instance::new(Graph::new(k, edges)?, 2, format!("complete:{k}")))
}

/// Parts `0..a` and `a..a+b`.
pub fn gen_complete_bipartite(a: usize, b: usize) -> Result<Instance, InstanceError> {
    if a < 1 || b < 1 {
        return Err(invalid("both sides need at least one vertex"));
    }
    let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
    Ok(Instance::new(Graph::new(a + b, edges)?, 2, format!("kbip:{a},{b}")))
}

const RESAMPLE_LIMIT: usize = 100_000;

/// G(m, p) with every edge drawn independently; resampled until no vertex
/// is isolated.
pub fn gen_random_graph(m: usize, p: f64, seed: u64) -> Result<Instance, InstanceError> {
    if m < 2 {
        return Err(invalid(format!("need at least 2 vertices, got {m}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("edge probability must be in (0, 1], got {p}")));
    }
    let mut rng = SplitMix64::new(seed);
    for _ in 0..RESAMPLE_LIMIT {
        let mut edges = Vec::new();
        for u in 0..m {
            for v in u + 1..m {
                if rng.next_f64() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(m, edges)?;
        if g.isolated_vertices().is_empty() {
            return Ok(Instance::new(g, 2, format!("random:m={m},p={p},seed={seed}")));
        }
    }
    Err(invalid(format!(
        "no graph without isolated vertices found for m={m}, p={p}"
    )))
}

/// Random forest with exactly `trees` components: a random recursive tree
/// (vertex v attaches to a uniform earlier vertex) with `trees - 1` random
/// edges removed and labels shuffled. Resampled until no vertex is isolated.
pub fn gen_random_forest(m: usize, trees: usize, seed: u64) -> Result<Instance, InstanceError> {
    if trees < 1 || 2 * trees > m {
        return Err(invalid(format!(
            "{trees} trees without isolated vertices need at least {} vertices, got {m}",
            2 * trees.max(1)
        )));
    }
    let mut rng = SplitMix64::new(seed);
    for _ in 0..RESAMPLE_LIMIT {
        let mut edges: Vec<(Vertex, Vertex)> = (1..m).map(|v| (rng.below(v as u64) as usize, v)).collect();
        for _ in 1..trees {
            let k = rng.below(edges.len() as u64) as usize;
            edges.swap_remove(k);
        }
        let mut label: Vec<Vertex> = (0..m).collect();
        rng.shuffle(&mut label);
        let g = Graph::new(m, edges.iter().map(|&(u, v)| (label[u], label[v])))?;
        if g.isolated_vertices().is_empty() {
            return Ok(Instance::new(g, 3, format!("forest:m={m},trees={trees},seed={seed}")));
        }
    }
    Err(invalid(format!(
        "no forest without isolated vertices found for m={m}, trees={trees}"
    )))
}

/// Looks up a named instance: `fig1`, `fig3[:d=5]`, `appendixA`,
/// `appendixB:n=4`, `cycle:6`, `path:4`, `star:6`, `complete:5`,
/// `kbip:2,3`, `random:m=10,p=0.3` and `forest:m=20,trees=2`. Random
/// families use `seed`.
pub fn from_label(label: &str, seed: u64) -> Result<Instance, InstanceError> {
    let (name, args) = label.split_once(':').unwrap_or((label, ""));
    let params: Vec<(Option<&str>, &str)> = args
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once('=') {
            Some((k, v)) => (Some(k.trim()), v.trim()),
            None => (None, s),
        })
        .collect();
    let bad = || InstanceError::UnknownLabel(label.to_string());
    let get = |key: &str, pos: usize| -> Option<&str> {
        params
            .iter()
            .find(|(k, _)| *k == Some(key))
            .or_else(|| params.get(pos).filter(|(k, _)| k.is_none()))
            .map(|(_, v)| *v)
    };
    let num = |key: &str, pos: usize| -> Result<usize, InstanceError> {
        get(key, pos).ok_or_else(bad)?.parse().map_err(|_| bad())
    };
    let num_or = |key: &str, pos: usize, default: usize| -> Result<usize, InstanceError> {
        match get(key, pos) {
            Some(v) => v.parse().map_err(|_| bad()),
            None => Ok(default),
        }
    };
    let seed = match get("seed", usize::MAX) {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => seed,
    };
    match name.to_ascii_lowercase().as_str() {
        "fig1" => Ok(gen_fig1()),
        "fig3" => gen_fig3(num_or("d", 0, 3)?),
        "appendixa" => Ok(gen_appendix_a()),
        "appendixb" => gen_appendix_b(num_or("n", 0, 3)?),
        "cycle" => gen_cycle(num("k", 0)?),
        "path" => gen_path(num("k", 0)?),
        "star" => gen_star(num("k", 0)?),
        "complete" => gen_complete(num("k", 0)?),
        "kbip" => gen_complete_bipartite(num("a", 0)?, num("b", 1)?),
        "random" => {
            let p: f64 = get("p", 1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            gen_random_graph(num("m", 0)?, p, seed)
        }
        "forest" => gen_random_forest(num("m", 0)?, num_or("trees", 1, 1)?, seed),
        _ => Err(bad()),
    }
}

pub fn format_instance(inst: &Instance) -> String {
    let g = &inst.graph;
    let mut out = String::new();
    if !inst.label.is_empty() {
        let _ = writeln!(out, "c label {}", inst.label);
    }
    let _ = writeln!(
        out,
        "p fairdiv {} {} {}",
        g.num_vertices(),
        g.num_edges(),
        inst.num_agents
    );
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    if let Some(partial) = &inst.partial {
        for (v, b) in partial.assignment().iter().enumerate() {
            if let Some(b) = b {
                let _ = writeln!(out, "a {} {}", v + 1, b + 1);
            }
        }
    }
    out
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut label = String::new();
    let mut edges: Vec<(usize, (Vertex, Vertex))> = Vec::new();
    let mut assigned: Vec<(usize, Vertex, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| InstanceError::Parse { line, message };
        let mut tok = raw.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();
        let ints = |count: usize| -> Result<Vec<usize>, InstanceError> {
            if rest.len() != count {
                return Err(err(format!(
                    "expected {count} fields after `{kind}`, found {}",
                    rest.len()
                )));
            }
            rest.iter()
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| err(format!("`{s}` is not a non-negative integer")))
                })
                .collect()
        };
        match kind {
            "c" => {
                if rest.first() == Some(&"label") {
                    label = rest[1..].join(" ");
                }
            }
            "p" => {
                if header.is_some() {
                    return Err(err("duplicate `p` line".into()));
                }
                if rest.first() != Some(&"fairdiv") {
                    return Err(err("expected `p fairdiv <m> <num_edges> <n>`".into()));
                }
                let rest_ints: Result<Vec<usize>, _> = rest[1..]
                    .iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| err(format!("`{s}` is not a non-negative integer")))
                    })
                    .collect();
                let nums = rest_ints?;
                if nums.len() != 3 {
                    return Err(err("expected `p fairdiv <m> <num_edges> <n>`".into()));
                }
                if nums[2] == 0 {
                    return Err(err("number of agents must be positive".into()));
                }
                header = Some((nums[0], nums[1], nums[2]));
            }
            "e" => {
                let v = ints(2)?;
                edges.push((line, (v[0], v[1])));
            }
            "a" => {
                let v = ints(2)?;
                assigned.push((line, v[0], v[1]));
            }
            other => return Err(err(format!("unknown line type `{other}`"))),
        }
    }
    let (m, num_edges, n) = header.ok_or_else(|| InstanceError::Format("missing `p fairdiv` header".into()))?;
    let in_range = |line: usize, v: usize, bound: usize, what: &str| -> Result<usize, InstanceError> {
        if v == 0 || v > bound {
            return Err(InstanceError::Parse {
                line,
                message: format!("{what} {v} outside 1..={bound}"),
            });
        }
        Ok(v - 1)
    };
    let mut seen = HashSet::new();
    let mut list = Vec::with_capacity(edges.len());
    for &(line, (u, v)) in &edges {
        let (u, v) = (in_range(line, u, m, "vertex")?, in_range(line, v, m, "vertex")?);
        if u == v {
            return Err(InstanceError::Parse {
                line,
                message: format!("self-loop on vertex {}", u + 1),
            });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(InstanceError::Parse {
                line,
                message: format!("duplicate edge {} {}", u + 1, v + 1),
            });
        }
        list.push((u, v));
    }
    if list.len() != num_edges {
        return Err(InstanceError::Format(format!(
            "header declares {num_edges} edges, found {}",
            list.len()
        )));
    }
    let graph = Graph::new(m, list)?;
    let partial = if assigned.is_empty() {
        None
    } else {
        let mut bundles = vec![Vec::new(); n];
        let mut placed = HashSet::new();
        for &(line, v, b) in &assigned {
            let v = in_range(line, v, m, "vertex")?;
            let b = in_range(line, b, n, "bundle")?;
            if !placed.insert(v) {
                return Err(InstanceError::Parse {
                    line,
                    message: format!("vertex {} assigned twice", v + 1),
                });
            }
            bundles[b].push(v);
        }
        Some(Allocation::new(m, bundles).expect("checked disjoint and in range"))
    };
    Ok(Instance {
        graph,
        num_agents: n,
        label,
        partial,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> InstanceError + '_ {
    move |source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    parse_instance(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, format_instance(inst)).map_err(io_err(path))
}

#[derive(Serialize, Deserialize)]
struct AllocationFile {
    bundles: Vec<Vec<Vertex>>,
}

/// JSON document `{"bundles": [[v, ...], ...]}` with 0-indexed vertices.
pub fn format_allocation(a: &Allocation) -> String {
    serde_json::to_string(&AllocationFile {
        bundles: a.bundles().to_vec(),
    })
    .expect("serializable")
}

/// Reads any JSON object with a `bundles` field (including solver output).
pub fn parse_allocation(text: &str, num_vertices: usize) -> Result<Allocation, InstanceError> {
    let file: AllocationFile =
        serde_json::from_str(text).map_err(|e| InstanceError::Format(format!("allocation JSON: {e}")))?;
    Allocation::new(num_vertices, file.bundles).map_err(|e| InstanceError::Format(e.to_string()))
}

pub fn read_allocation(path: impl AsRef<Path>, num_vertices: usize) -> Result<Allocation, InstanceError> {
    let path = path.as_ref();
    parse_allocation(&std::fs::read_to_string(path).map_err(io_err(path))?, num_vertices)
}

pub fn write_allocation(a: &Allocation, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, format_allocation(a) + "\n").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::cut_value;

    #[test]
    fn fig1_values() {
        let g = gen_fig1().graph;
        assert_eq!(cut_value(&g, [0]), 4);
        assert_eq!(cut_value(&g, [1, 2]), 2);
        assert!(g.is_forest());
        assert_eq!(g.num_edges(), 7);
    }

    #[test]
    fn fig3_shape() {
        let inst = gen_fig3(3).unwrap();
        assert_eq!((inst.graph.num_vertices(), inst.graph.num_edges()), (5, 6));
        assert_eq!(cut_value(&inst.graph, [0, 1]), 6);
        let sides = inst.graph.bipartition().unwrap();
        assert_eq!(sides[0], sides[1]);
        assert_eq!(gen_fig3(7).unwrap().graph.num_edges(), 14);
        assert_eq!(inst.graph, gen_complete_bipartite(2, 3).unwrap().graph);
        assert!(gen_fig3(4).is_err());
        assert!(gen_fig3(1).is_err());
    }

    #[test]
    fn appendix_a_shape() {
        let inst = gen_appendix_a();
        let sizes: Vec<usize> = inst.graph.connected_components().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 6, 4]);
        let partial = inst.partial.unwrap();
        assert_eq!(partial.values(&inst.graph).unwrap(), vec![3, 4, 8, 6]);
        assert_eq!(partial.assignment()[1], None);
        let forest = inst.graph.root_forest(None).unwrap();
        assert_eq!(forest.tree_roots(), &[0, 4, 10]);
    }

    #[test]
    fn appendix_b_shape() {
        let g3 = gen_appendix_b(3).unwrap().graph;
        assert_eq!(g3, gen_star(6).unwrap().graph);
        let g4 = gen_appendix_b(4).unwrap().graph;
        assert_eq!(g4.num_vertices(), 10);
        assert_eq!((g4.degree(0), g4.degree(1), g4.degree(2)), (9, 9, 2));
        let g5 = gen_appendix_b(5).unwrap().graph;
        assert_eq!(cut_value(&g5, 3..8), 15);
    }

    #[test]
    fn random_generators_are_deterministic() {
        let a = gen_random_graph(10, 0.3, 42).unwrap();
        let b = gen_random_graph(10, 0.3, 42).unwrap();
        assert_eq!(a.graph, b.graph);
        assert!(a.graph.isolated_vertices().is_empty());
        assert_eq!(
            gen_random_graph(5, 1.0, 1).unwrap().graph,
            gen_complete(5).unwrap().graph
        );
        for seed in 0..50 {
            let f = gen_random_forest(12, 3, seed).unwrap().graph;
            assert!(f.is_forest());
            assert_eq!(f.connected_components().len(), 3);
            assert!(f.isolated_vertices().is_empty());
        }
        assert!(gen_random_forest(5, 3, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        for inst in [
            gen_fig1(),
            gen_appendix_a(),
            gen_fig3(5).unwrap(),
            gen_cycle(6).unwrap(),
        ] {
            let text = format_instance(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "p fairdiv 3 1 2\ne 0 1\n";
        match parse_instance(bad) {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_instance("p fairdiv 3 2 2\ne 1 2\ne 2 1\n").is_err());
        assert!(parse_instance("p fairdiv 3 1 2\ne 1 1\n").is_err());
        assert!(parse_instance("e 1 2\n").is_err());
        assert!(parse_instance("p fairdiv 3 2 2\ne 1 2\n").is_err());
        let ok = parse_instance("c hello\n  p  fairdiv 3 2 2 \ne 2 3\n\ne 1 2\n").unwrap();
        assert_eq!(ok.graph.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn labels() {
        assert_eq!(from_label("fig3:d=5", 0).unwrap().graph.num_vertices(), 7);
        assert_eq!(from_label("fig3", 0).unwrap().graph.num_vertices(), 5);
        assert_eq!(from_label("appendixB:n=4", 0).unwrap().num_agents, 4);
        assert_eq!(from_label("cycle:6", 0).unwrap().graph.num_edges(), 6);
        assert_eq!(from_label("kbip:2,3", 0).unwrap().graph.num_edges(), 6);
        assert_eq!(
            from_label("random:m=8,p=0.5", 3).unwrap(),
            from_label("random:m=8,p=0.5,seed=3", 9).unwrap()
        );
        assert!(from_label("nope", 0).is_err());
        assert!(from_label("cycle:x", 0).is_err());
    }

    #[test]
    fn allocation_json_round_trip() {
        let a = gen_appendix_a().partial.unwrap();
        let text = format_allocation(&a);
        assert_eq!(parse_allocation(&text, 14).unwrap(), a);
        assert!(parse_allocation("{\"bundles\": [[0], [0]]}", 3).is_err());
        assert!(parse_allocation("garbage", 3).is_err());
    }
}
