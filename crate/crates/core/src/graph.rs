//! Simple undirected graphs over dense `0..m` vertex ids, plus the rooted
//! view of a forest used by the forest peeling algorithm.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

/// Vertex (item) identifier, always in `0..num_vertices`.
pub type Vertex = usize;

/// Largest supported vertex count. Keeps every cut value and welfare sum
/// (at most `m * (m - 1)`) comfortably inside `i64`.
pub const MAX_VERTICES: usize = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("graph has {0} vertices, more than the supported maximum")]
    TooLarge(usize),
    #[error("graph is not a forest")]
    NotAForest,
    #[error("invalid root set: {0}")]
    InvalidRoots(String),
}

/// Simple undirected graph. Edges are stored normalized (`u < v`) and sorted,
/// so two graphs with the same edge set compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(Vertex, Vertex)>,
    adjacency: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, GraphError> {
        if num_vertices > MAX_VERTICES {
            return Err(GraphError::TooLarge(num_vertices));
        }
        let mut normalized = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= num_vertices {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        num_vertices,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            num_vertices,
            edges: normalized,
            adjacency,
        })
    }

    /// Graph with no edges.
    pub fn empty(num_vertices: usize) -> Self {
        Self::new(num_vertices, []).expect("edgeless graph is always valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Normalized edge list, sorted lexicographically with `u < v`.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Sorted neighbors of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    /// Degree of `v`. Panics if `v` is out of range; see [`Graph::try_degree`].
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn try_degree(&self, v: Vertex) -> Result<usize, GraphError> {
        self.adjacency.get(v).map(Vec::len).ok_or(GraphError::VertexOutOfRange {
            vertex: v,
            num_vertices: self.num_vertices,
        })
    }

    /// Maximum degree, 0 for the empty graph.
    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.num_vertices && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn isolated_vertices(&self) -> Vec<Vertex> {
        (0..self.num_vertices)
            .filter(|&v| self.adjacency[v].is_empty())
            .collect()
    }

    /// Maximal connected vertex sets, each sorted, ordered by least vertex.
    pub fn connected_components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.num_vertices];
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.num_vertices {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut component = Vec::new();
            while let Some(u) = stack.pop() {
                component.push(u);
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }

    /// True iff the graph is acyclic, via a DFS back-edge test.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<Option<Vertex>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        let mut stack = Vec::new();
        for start in 0..self.num_vertices {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if Some(w) == parent[u] {
                        continue;
                    }
                    if seen[w] {
                        return false;
                    }
                    seen[w] = true;
                    parent[w] = Some(u);
                    stack.push(w);
                }
            }
        }
        true
    }

    /// Proper 2-coloring if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let mut color: Vec<Option<u8>> = vec![None; self.num_vertices];
        let mut queue = VecDeque::new();
        for start in 0..self.num_vertices {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(0);
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].expect("queued vertices are colored");
                for &w in &self.adjacency[u] {
                    match color[w] {
                        None => {
                            color[w] = Some(1 - cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(0)).collect())
    }

    /// Subgraph induced by `vertices` (kept in the given order), relabeled to
    /// `0..vertices.len()`.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> Graph {
        let mut index = vec![usize::MAX; self.num_vertices];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]));
        Graph::new(vertices.len(), edges).expect("induced subgraph of a simple graph is simple")
    }

    /// Roots every tree of the forest. With `roots == None` each component is
    /// rooted at its least vertex; otherwise exactly one root per component
    /// must be supplied.
    pub fn root_forest(&self, roots: Option<&[Vertex]>) -> Result<RootedForest, GraphError> {
        if !self.is_forest() {
            return Err(GraphError::NotAForest);
        }
        let components = self.connected_components();
        let chosen: Vec<Vertex> = match roots {
            None => components.iter().map(|c| c[0]).collect(),
            Some(given) => {
                let mut component_of = vec![0; self.num_vertices];
                for (ci, c) in components.iter().enumerate() {
                    for &v in c {
                        component_of[v] = ci;
                    }
                }
                let mut picked = vec![None; components.len()];
                for &r in given {
                    if r >= self.num_vertices {
                        return Err(GraphError::VertexOutOfRange {
                            vertex: r,
                            num_vertices: self.num_vertices,
                        });
                    }
                    let slot = &mut picked[component_of[r]];
                    if slot.is_some() {
                        return Err(GraphError::InvalidRoots(format!(
                            "two roots given for the component of vertex {r}"
                        )));
                    }
                    *slot = Some(r);
                }
                picked
                    .into_iter()
                    .enumerate()
                    .map(|(ci, r)| {
                        r.ok_or_else(|| {
                            GraphError::InvalidRoots(format!(
                                "no root given for the component of vertex {}",
                                components[ci][0]
                            ))
                        })
                    })
                    .collect::<Result<_, _>>()?
            }
        };

        let mut parent = vec![None; self.num_vertices];
        let mut children = vec![Vec::new(); self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::new();
        for &r in &chosen {
            seen[r] = true;
            queue.push_back(r);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        children[u].push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(RootedForest {
            parent,
            children,
            tree_roots: chosen.clone(),
            roots: chosen.into_iter().collect(),
            allocated: vec![false; self.num_vertices],
        })
    }
}

/// Parent/children view of a forest with a frontier of unallocated roots.
///
/// The frontier starts as the tree roots. Taking a frontier vertex marks it
/// allocated and promotes its children to the frontier, so the frontier is
/// always the set of unallocated vertices whose parent is absent or allocated.
#[derive(Debug, Clone)]
pub struct RootedForest {
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    tree_roots: Vec<Vertex>,
    roots: BTreeSet<Vertex>,
    allocated: Vec<bool>,
}

impl RootedForest {
    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    /// Children of `v` in BFS order (ascending, since adjacency is sorted).
    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    /// The original root of each tree, ordered by component.
    pub fn tree_roots(&self) -> &[Vertex] {
        &self.tree_roots
    }

    /// Current frontier in ascending order.
    pub fn roots(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.roots.iter().copied()
    }

    pub fn is_root(&self, v: Vertex) -> bool {
        self.roots.contains(&v)
    }

    pub fn is_allocated(&self, v: Vertex) -> bool {
        self.allocated[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    /// Marks a frontier vertex allocated and pushes its children onto the
    /// frontier. Returns false (and changes nothing) if `v` is not a root.
    pub fn take(&mut self, v: Vertex) -> bool {
        if !self.roots.remove(&v) {
            return false;
        }
        self.allocated[v] = true;
        for &c in &self.children[v] {
            self.roots.insert(c);
        }
        true
    }

    /// All vertices of the tree rooted at `root`, in BFS order.
    pub fn subtree(&self, root: Vertex) -> Vec<Vertex> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Depth of every vertex below its tree root.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.parent.len()];
        for &r in &self.tree_roots {
            for v in self.subtree(r) {
                if let Some(p) = self.parent[v] {
                    depth[v] = depth[p] + 1;
                }
            }
        }
        depth
    }
}
