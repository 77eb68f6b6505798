//! Cut values and incrementally maintained per-bundle neighbor counts.
//!
//! The value of a bundle `S` is the number of edges with exactly one endpoint
//! in `S`. Adding a vertex `o` to `S` changes it by `deg(o) - 2 |N_S(o)|`, so
//! keeping `|N_{A_i}(o)|` for every (vertex, bundle) pair gives O(1) marginals
//! and O(deg) moves.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// Exact cut value of `set`. Duplicate entries are ignored.
pub fn cut_value<I>(graph: &Graph, set: I) -> i64
where
    I: IntoIterator<Item = Vertex>,
{
    let mut member = vec![false; graph.num_vertices()];
    for v in set {
        member[v] = true;
    }
    graph.edges().iter().filter(|&&(u, v)| member[u] != member[v]).count() as i64
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error("vertex {vertex} is already in bundle {bundle}")]
    AlreadyInBundle { vertex: Vertex, bundle: usize },
    #[error("vertex {vertex} is not in bundle {bundle}")]
    NotInBundle { vertex: Vertex, bundle: usize },
    #[error("bundle index {bundle} out of range for {num_bundles} bundles")]
    BundleOutOfRange { bundle: usize, num_bundles: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("inconsistent move of vertex {vertex}: expected it in {expected:?}, found {found:?}")]
    InconsistentMove {
        vertex: Vertex,
        expected: Option<usize>,
        found: Option<usize>,
    },
}

/// Sign class of a vertex's marginal value for a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemKind {
    StrictGood,
    WeakChore,
    StrictChore,
}

impl ItemKind {
    pub fn from_marginal(marginal: i64) -> Self {
        match marginal {
            m if m > 0 => ItemKind::StrictGood,
            0 => ItemKind::WeakChore,
            _ => ItemKind::StrictChore,
        }
    }
}

/// Neighbor counts, cached bundle values and the vertex assignment of a
/// (possibly partial) allocation with `n` bundles.
///
/// Unassigned vertices belong to no bundle but count as "outside" for all
/// of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleStats<'g> {
    graph: &'g Graph,
    num_bundles: usize,
    // row-major: counts[v * num_bundles + i] = |N_{A_i}(v)|
    counts: Vec<u32>,
    values: Vec<i64>,
    assignment: Vec<Option<usize>>,
    members: Vec<BTreeSet<Vertex>>,
}

impl<'g> BundleStats<'g> {
    /// Stats for the empty allocation with `num_bundles` bundles.
    pub fn new(graph: &'g Graph, num_bundles: usize) -> Self {
        Self {
            graph,
            num_bundles,
            counts: vec![0; graph.num_vertices() * num_bundles],
            values: vec![0; num_bundles],
            assignment: vec![None; graph.num_vertices()],
            members: vec![BTreeSet::new(); num_bundles],
        }
    }

    /// Stats for an arbitrary assignment `vertex -> Option<bundle>`.
    pub fn from_assignment(
        graph: &'g Graph,
        num_bundles: usize,
        assignment: &[Option<usize>],
    ) -> Result<Self, ValuationError> {
        let mut stats = Self::new(graph, num_bundles);
        for (v, &slot) in assignment.iter().enumerate() {
            if v >= graph.num_vertices() {
                return Err(ValuationError::VertexOutOfRange(v));
            }
            if let Some(b) = slot {
                stats.apply_move(v, None, Some(b))?;
            }
        }
        Ok(stats)
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn num_bundles(&self) -> usize {
        self.num_bundles
    }

    pub fn value(&self, bundle: usize) -> i64 {
        self.values[bundle]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn assignment(&self, v: Vertex) -> Option<usize> {
        self.assignment[v]
    }

    pub fn assignments(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// Members of a bundle in ascending vertex order.
    pub fn bundle(&self, bundle: usize) -> &BTreeSet<Vertex> {
        &self.members[bundle]
    }

    pub fn bundle_len(&self, bundle: usize) -> usize {
        self.members[bundle].len()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn unassigned(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.assignment.len()).filter(|&v| self.assignment[v].is_none())
    }

    /// `|N_{A_i}(v)|`.
    pub fn neighbors_in_bundle(&self, v: Vertex, bundle: usize) -> u32 {
        self.counts[v * self.num_bundles + bundle]
    }

    /// `deg(v) - 2 |N_{A_i}(v)|`: the value change of adding `v` to bundle `i`
    /// when `v` is outside it, and the negated change of removing it when
    /// inside. No bounds checks.
    #[inline]
    pub fn gain(&self, bundle: usize, v: Vertex) -> i64 {
        self.graph.degree(v) as i64 - 2 * self.neighbors_in_bundle(v, bundle) as i64
    }

    fn check_bundle(&self, bundle: usize) -> Result<(), ValuationError> {
        if bundle >= self.num_bundles {
            return Err(ValuationError::BundleOutOfRange {
                bundle,
                num_bundles: self.num_bundles,
            });
        }
        Ok(())
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), ValuationError> {
        if v >= self.graph.num_vertices() {
            return Err(ValuationError::VertexOutOfRange(v));
        }
        Ok(())
    }

    /// `v(A_i ∪ {o}) - v(A_i)` for `o ∉ A_i`.
    pub fn marginal_add(&self, bundle: usize, o: Vertex) -> Result<i64, ValuationError> {
        self.check_bundle(bundle)?;
        self.check_vertex(o)?;
        if self.assignment[o] == Some(bundle) {
            return Err(ValuationError::AlreadyInBundle { vertex: o, bundle });
        }
        Ok(self.gain(bundle, o))
    }

    /// `v(A_i \ {o}) - v(A_i)` for `o ∈ A_i`.
    pub fn marginal_remove(&self, bundle: usize, o: Vertex) -> Result<i64, ValuationError> {
        self.check_bundle(bundle)?;
        self.check_vertex(o)?;
        if self.assignment[o] != Some(bundle) {
            return Err(ValuationError::NotInBundle { vertex: o, bundle });
        }
        Ok(-self.gain(bundle, o))
    }

    /// Classifies `o` against `A_i`, or against `A_i \ {o}` when `o ∈ A_i`.
    /// Both reduce to the sign of `deg(o) - 2 |N_{A_i}(o)|`.
    pub fn classify_item(&self, bundle: usize, o: Vertex) -> Result<ItemKind, ValuationError> {
        self.check_bundle(bundle)?;
        self.check_vertex(o)?;
        Ok(ItemKind::from_marginal(self.gain(bundle, o)))
    }

    /// Moves `o` from `from` to `to` (either may be `None` = unassigned).
    /// Costs O(deg(o)).
    pub fn apply_move(&mut self, o: Vertex, from: Option<usize>, to: Option<usize>) -> Result<(), ValuationError> {
        self.check_vertex(o)?;
        if let Some(b) = from {
            self.check_bundle(b)?;
        }
        if let Some(b) = to {
            self.check_bundle(b)?;
        }
        if self.assignment[o] != from {
            return Err(ValuationError::InconsistentMove {
                vertex: o,
                expected: from,
                found: self.assignment[o],
            });
        }
        if from == to {
            return Ok(());
        }
        // o has no self-loop, so its own counts are unaffected by the move.
        if let Some(f) = from {
            self.values[f] -= self.gain(f, o);
            self.members[f].remove(&o);
        }
        if let Some(t) = to {
            self.values[t] += self.gain(t, o);
            self.members[t].insert(o);
        }
        let k = self.num_bundles;
        for &w in self.graph.neighbors(o) {
            if let Some(f) = from {
                self.counts[w * k + f] -= 1;
            }
            if let Some(t) = to {
                self.counts[w * k + t] += 1;
            }
        }
        self.assignment[o] = to;
        Ok(())
    }

    /// Smallest `v(A_i \ {o})` over `o ∈ A_i`, with the least such vertex.
    /// `None` for an empty bundle.
    pub fn min_drop(&self, bundle: usize) -> Option<(Vertex, i64)> {
        let base = self.values[bundle];
        self.members[bundle]
            .iter()
            .map(|&o| (o, base - self.gain(bundle, o)))
            .min_by_key(|&(o, value)| (value, o))
    }

    /// Bundle values recomputed from scratch; used to validate the caches.
    pub fn recompute_values(&self) -> Vec<i64> {
        (0..self.num_bundles)
            .map(|b| cut_value(self.graph, self.members[b].iter().copied()))
            .collect()
    }
}
