//! Graphs as a tree of trees.
//!
//! The vertex tree maps each vertex id to its edge tree, the set of its
//! out-neighbors. Edge trees are difference encoded; the vertex tree is
//! augmented with the number of edges below each node, so the total edge
//! count is read from the root. Both levels use blocks of 64 entries.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::augment::{Augmentation, NoAug};
use crate::bulk;
use crate::check::{self, Violation};
use crate::config::Config;
use crate::encoding::{Diff, Plain};
use crate::node::{aug_of, size, Link, View};
use crate::ordmap::{find, second};
use crate::schema::MapSchema;
use crate::space::{space_into, Space};
use crate::tree::{self, from_sorted};

pub type VertexId = u32;

/// Block size of both tree levels.
pub const GRAPH_BLOCK: usize = 64;

type EdgeSchema = MapSchema<VertexId, (), NoAug, Diff>;
type VertexSchema = MapSchema<VertexId, Edges, EdgeCount, Plain>;

/// Edge tree of one vertex.
#[derive(Clone, Default)]
pub struct Edges(pub Link<EdgeSchema>);

/// Aggregates the number of edges.
pub struct EdgeCount;

impl Augmentation<VertexId, Edges> for EdgeCount {
    type Value = u64;

    fn identity() -> u64 {
        0
    }
    fn lift(_: &VertexId, e: &Edges) -> u64 {
        size(&e.0) as u64
    }
    fn combine(a: &u64, b: &u64) -> u64 {
        a + b
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("vertex {0} not found")]
    UnknownVertex(VertexId),
}

/// Parses an edge list: one `u v` pair per line, whitespace separated;
/// blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| GraphError::Parse {
            line: i + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let mut id = |what: &str| -> Result<VertexId, GraphError> {
            let tok = parts
                .next()
                .ok_or_else(|| err(format!("missing {what} vertex")))?;
            tok.parse()
                .map_err(|_| err(format!("invalid vertex id {tok:?}")))
        };
        let (u, v) = (id("source")?, id("target")?);
        if let Some(extra) = parts.next() {
            return Err(err(format!("unexpected token {extra:?}")));
        }
        out.push((u, v));
    }
    Ok(out)
}

pub fn load_edge_list(path: &Path) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text)
}

/// Adds the reverse of every edge.
pub fn symmetrize(edges: &[(VertexId, VertexId)]) -> Vec<(VertexId, VertexId)> {
    edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect()
}

/// Sorted, duplicate-free edges grouped by source.
fn group(batch: &[(VertexId, VertexId)]) -> Vec<(VertexId, Vec<VertexId>)> {
    let mut edges = batch.to_vec();
    edges.par_sort_unstable();
    edges.dedup();
    let mut out: Vec<(VertexId, Vec<VertexId>)> = Vec::new();
    for (u, v) in edges {
        match out.last_mut() {
            Some((src, dsts)) if *src == u => dsts.push(v),
            _ => out.push((u, vec![v])),
        }
    }
    out
}

/// Memory of a graph, split by level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GraphSpace {
    pub vertex_tree: Space,
    pub edge_trees: Space,
}

impl GraphSpace {
    pub fn total(&self) -> usize {
        self.vertex_tree.total + self.edge_trees.total
    }

    /// Bytes holding neighbor ids (blocks and regular-node entries of the
    /// edge trees).
    pub fn edge_payload(&self) -> usize {
        self.edge_trees.payload
    }

    /// Everything else: the whole vertex tree and edge-tree node overhead.
    pub fn structural(&self) -> usize {
        self.total() - self.edge_payload()
    }
}

/// A persistent directed graph.
#[derive(Clone)]
pub struct Graph {
    vertices: Link<VertexSchema>,
    vcfg: Config,
    ecfg: Config,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph::with_configs(Config::new(GRAPH_BLOCK), Config::new(GRAPH_BLOCK))
    }

    /// Empty graph with explicit vertex-tree and edge-tree configurations.
    pub fn with_configs(vertex: Config, edge: Config) -> Self {
        let vcfg = vertex
            .validate()
            .unwrap_or_else(|e| panic!("invalid config: {e}"));
        let ecfg = edge
            .validate()
            .unwrap_or_else(|e| panic!("invalid config: {e}"));
        Graph {
            vertices: None,
            vcfg,
            ecfg,
        }
    }

    /// Graph holding the distinct edges of `edges`. Both endpoints of every
    /// edge become vertices.
    pub fn from_edges(edges: &[(VertexId, VertexId)]) -> Self {
        Graph::new().insert_edges(edges)
    }

    /// Vertex entries for a batch: one per endpoint, with the batch's edges
    /// of that vertex as a fresh edge tree.
    fn batch_entries(&self, batch: &[(VertexId, VertexId)]) -> Vec<(VertexId, Edges)> {
        let grouped = group(batch);
        let mut ids: Vec<VertexId> = batch.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.par_sort_unstable();
        ids.dedup();
        let mut out = Vec::with_capacity(ids.len());
        let mut g = grouped.into_iter().peekable();
        for id in ids {
            let dsts = match g.peek() {
                Some((src, _)) if *src == id => g.next().expect("peeked").1,
                _ => Vec::new(),
            };
            out.push((id, dsts));
        }
        let ecfg = self.ecfg;
        out.into_par_iter()
            .map(|(id, dsts)| {
                let entries: Vec<(VertexId, ())> = dsts.into_iter().map(|d| (d, ())).collect();
                (id, Edges(from_sorted(&ecfg, &entries)))
            })
            .collect()
    }

    /// Adds every edge of `batch`; duplicates and existing edges are ignored.
    pub fn insert_edges(&self, batch: &[(VertexId, VertexId)]) -> Self {
        let entries = self.batch_entries(batch);
        let ecfg = self.ecfg;
        let merge = |old: &Edges, new: &Edges| {
            Edges(bulk::union(&ecfg, old.0.clone(), new.0.clone(), &second))
        };
        let vertices =
            bulk::multi_insert_sorted(&self.vcfg, self.vertices.clone(), &entries, &merge);
        Graph {
            vertices,
            ..self.clone()
        }
    }

    /// Removes every edge of `batch` that is present. Vertices stay, even
    /// when left without edges.
    pub fn delete_edges(&self, batch: &[(VertexId, VertexId)]) -> Self {
        let ecfg = self.ecfg;
        let entries: Vec<(VertexId, Edges)> = group(batch)
            .into_iter()
            .map(|(u, dsts)| {
                let keys: Vec<(VertexId, ())> = dsts.into_iter().map(|d| (d, ())).collect();
                (u, Edges(from_sorted(&ecfg, &keys)))
            })
            .collect();
        let cut = |old: &Edges, gone: &Edges| {
            Edges(bulk::difference(&ecfg, old.0.clone(), gone.0.clone()))
        };
        let vertices = bulk::multi_update_sorted(&self.vcfg, self.vertices.clone(), &entries, &cut);
        Graph {
            vertices,
            ..self.clone()
        }
    }

    pub fn num_vertices(&self) -> usize {
        size(&self.vertices)
    }

    /// Number of edges; read from the root.
    pub fn edge_count(&self) -> u64 {
        aug_of(&self.vertices)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        find(&self.vertices, &v).is_some()
    }

    /// Out-degree; 0 for an unknown vertex.
    pub fn degree(&self, v: VertexId) -> usize {
        find(&self.vertices, &v).map_or(0, |e| size(&e.0))
    }

    pub fn neighbors(&self, v: VertexId) -> Option<Vec<VertexId>> {
        find(&self.vertices, &v).map(|e| neighbor_ids(&e.0))
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        tree::to_vec(&self.vertices)
            .into_iter()
            .map(|e| e.0)
            .collect()
    }

    /// Every edge, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count() as usize);
        for (u, e) in tree::to_vec(&self.vertices) {
            out.extend(neighbor_ids(&e.0).into_iter().map(|v| (u, v)));
        }
        out
    }

    /// Unweighted distances from `src` to every reachable vertex.
    pub fn bfs(&self, src: VertexId) -> Result<BTreeMap<VertexId, u32>, GraphError> {
        if !self.contains_vertex(src) {
            return Err(GraphError::UnknownVertex(src));
        }
        let top = last_vertex(&self.vertices).expect("nonempty");
        let dist: Vec<AtomicU32> = (0..=top as usize)
            .map(|_| AtomicU32::new(u32::MAX))
            .collect();
        dist[src as usize].store(0, Ordering::Relaxed);
        let mut frontier = vec![src];
        let mut level = 0u32;
        while !frontier.is_empty() {
            level += 1;
            let mut next: Vec<VertexId> = frontier
                .par_iter()
                .flat_map_iter(|&u| self.neighbors(u).unwrap_or_default())
                .filter(|&v| {
                    dist[v as usize]
                        .compare_exchange(u32::MAX, level, Ordering::Relaxed, Ordering::Relaxed)
                        .is_ok()
                })
                .collect();
            next.sort_unstable();
            frontier = next;
        }
        Ok(dist
            .iter()
            .enumerate()
            .filter_map(|(v, d)| {
                let d = d.load(Ordering::Relaxed);
                (d != u32::MAX).then_some((v as VertexId, d))
            })
            .collect())
    }

    /// Bytes of both levels; edge trees shared between versions are
    /// counted once.
    pub fn space(&self) -> GraphSpace {
        let mut seen = HashSet::new();
        let mut vertex_tree = Space::default();
        space_into(&self.vertices, &mut seen, &mut vertex_tree);
        let mut edge_trees = Space::default();
        for (_, e) in tree::to_vec(&self.vertices) {
            space_into(&e.0, &mut seen, &mut edge_trees);
        }
        GraphSpace {
            vertex_tree,
            edge_trees,
        }
    }

    /// Validates both levels and the edge-count aggregate.
    pub fn check(&self) -> Result<(), Violation> {
        check::check(&self.vcfg, &self.vertices)?;
        for (_, e) in tree::to_vec(&self.vertices) {
            check::check(&self.ecfg, &e.0)?;
        }
        Ok(())
    }

    /// True when both graphs hold the same edges and vertices.
    pub fn same_as(&self, other: &Graph) -> bool {
        self.vertices() == other.vertices() && self.edges() == other.edges()
    }
}

fn neighbor_ids(t: &Link<EdgeSchema>) -> Vec<VertexId> {
    tree::to_vec(t).into_iter().map(|e| e.0).collect()
}

fn last_vertex(t: &Link<VertexSchema>) -> Option<VertexId> {
    let mut n = t.as_ref()?;
    loop {
        match n.view() {
            View::Flat(f) => return f.entries().last().map(|e| e.0),
            View::Regular(r) => match &r.right {
                Some(x) => n = x,
                None => return Some(r.key),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_edge_lists() {
        let text = "# comment\n0 1\n\n 1\t2 \n2 3\n";
        assert_eq!(parse_edge_list(text).unwrap(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(parse_edge_list("").unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = |text: &str| match parse_edge_list(text) {
            Err(GraphError::Parse { line, .. }) => line,
            other => panic!("expected a parse error, got {other:?}"),
        };
        assert_eq!(bad("0 1\n2\n"), 2);
        assert_eq!(bad("0 1\n# x\n1 -2\n"), 3);
        assert_eq!(bad("0 1 2\n"), 1);
        assert_eq!(bad("a b\n"), 1);
    }

    #[test]
    fn groups_sorted_and_deduplicated() {
        let g = group(&[(2, 1), (0, 5), (2, 1), (0, 3), (2, 0)]);
        assert_eq!(g, vec![(0, vec![3, 5]), (2, vec![0, 1])]);
        assert_eq!(symmetrize(&[(0, 1)]), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn load_reports_path() {
        let err = load_edge_list(Path::new("/nonexistent/graph.txt")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/graph.txt"));
    }
}
