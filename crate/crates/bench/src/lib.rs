//! Desk-scale microbenchmarks for the pactree collections.
//!
//! Three runners, each producing CSV rows: single-operation timings
//! ([`run_micro`]), the same operation across block sizes
//! ([`sweep_blocksize`]) and batch-update throughput on a graph read from
//! an edge list ([`graph_bench`]). Inputs are derived from the seed only;
//! timings cover the operation, never input generation.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::ValueEnum;
use pactree::augment::NoAug;
use pactree::encoding::{Codec, Diff, Plain};
use pactree::graph::{self, GraphError};
use pactree::{Config, Graph, OrdMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Column order of micro and sweep output.
pub const MICRO_HEADER: [&str; 9] = [
    "op",
    "n",
    "m",
    "B",
    "encoding",
    "threads",
    "median_ms",
    "bytes_total",
    "bytes_metadata",
];

/// Column order of graph output.
pub const GRAPH_HEADER: [&str; 3] = ["batch", "insert_edges_per_sec", "delete_edges_per_sec"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("size sweep not decreasing: {0} bytes at B={1} after {2} bytes at B={3}")]
    SizeNotDecreasing(usize, usize, usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Identity,
    Diff,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Identity => "identity",
            Encoding::Diff => "diff",
        })
    }
}

/// Benchmarked primitives. `n` is the tree size; `m` is the size of the
/// second operand, batch or query set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    /// Build a tree of `n` unsorted entries.
    Build,
    /// Union of trees of sizes `n` and `m`.
    Union,
    /// Union through the unfold-once variant.
    UnionEfficient,
    Intersect,
    Difference,
    /// Insert a batch of `m` entries.
    MultiInsert,
    /// Delete a batch of `m` keys.
    MultiDelete,
    /// `m` point lookups.
    Find,
    /// `m` persistent single inserts, each into the original tree.
    Insert,
    /// `m` range extractions of about `n / 100` keys each.
    Range,
    /// Keep every other key.
    Filter,
    /// Sum of all values.
    Reduce,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub op: Op,
    pub n: usize,
    pub m: usize,
    pub block: usize,
    pub encoding: Encoding,
    pub threads: usize,
    pub seed: u64,
    pub trials: usize,
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(BenchError::Config("threads must be at least 1".into()));
        }
        Config::new(self.block)
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MicroRow {
    pub op: Op,
    pub n: usize,
    pub m: usize,
    pub block: usize,
    pub encoding: Encoding,
    pub threads: usize,
    pub median_ms: f64,
    pub bytes_total: usize,
    pub bytes_metadata: usize,
}

impl MicroRow {
    fn record(&self) -> [String; 9] {
        [
            self.op.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.block.to_string(),
            self.encoding.to_string(),
            self.threads.to_string(),
            format!("{:.4}", self.median_ms),
            self.bytes_total.to_string(),
            self.bytes_metadata.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphRow {
    pub batch: usize,
    pub insert_eps: f64,
    pub delete_eps: f64,
}

pub fn median(mut xs: Vec<Duration>) -> Duration {
    assert!(!xs.is_empty(), "median of nothing");
    xs.sort();
    xs[xs.len() / 2]
}

fn time<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Dense random entries: `count` distinct keys drawn from `[0, 2 * span)`,
/// in random order.
pub fn random_entries(rng: &mut ChaCha8Rng, count: usize, span: usize) -> Vec<(u64, u64)> {
    let hi = 2 * span.max(count).max(1);
    let keys = rand::seq::index::sample(rng, hi, count);
    keys.into_iter().map(|k| (k as u64, rng.gen())).collect()
}

type Map<C> = OrdMap<u64, u64, NoAug, C>;

struct Inputs {
    first: Vec<(u64, u64)>,
    second: Vec<(u64, u64)>,
    queries: Vec<u64>,
}

fn inputs(cfg: &BenchConfig) -> Inputs {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span = cfg.n + cfg.m;
    let first = random_entries(&mut rng, cfg.n, span);
    let second = random_entries(&mut rng, cfg.m, span);
    let queries = second.iter().map(|e| e.0).collect();
    Inputs {
        first,
        second,
        queries,
    }
}

/// One trial: the time of the operation and the tree whose bytes are
/// reported (the result, or the input for queries).
fn trial<C: Codec<u64, u64>>(cfg: &BenchConfig, tcfg: Config, inp: &Inputs) -> (Duration, Map<C>) {
    let build = || Map::<C>::build(tcfg, inp.first.clone());
    match cfg.op {
        Op::Build => {
            let entries = inp.first.clone();
            let (t, d) = time(|| Map::<C>::build(tcfg, entries));
            (d, t)
        }
        Op::Union | Op::UnionEfficient | Op::Intersect | Op::Difference => {
            let (a, b) = (build(), Map::<C>::build(tcfg, inp.second.clone()));
            let (t, d) = time(|| match cfg.op {
                Op::Union => a.union(&b),
                Op::UnionEfficient => a.union_efficient(&b),
                Op::Intersect => a.intersection(&b),
                _ => a.difference(&b),
            });
            (d, t)
        }
        Op::MultiInsert => {
            let (a, batch) = (build(), inp.second.clone());
            let (t, d) = time(|| a.multi_insert(batch));
            (d, t)
        }
        Op::MultiDelete => {
            let (a, keys) = (build(), inp.queries.clone());
            let (t, d) = time(|| a.multi_delete(keys));
            (d, t)
        }
        Op::Find => {
            let a = build();
            let (hits, d) = time(|| inp.queries.iter().filter(|k| a.get(k).is_some()).count());
            std::hint::black_box(hits);
            (d, a)
        }
        Op::Insert => {
            let a = build();
            let (last, d) = time(|| {
                let mut last = None;
                for &(k, v) in &inp.second {
                    last = Some(a.insert(k, v));
                }
                last
            });
            drop(last);
            (d, a)
        }
        Op::Range => {
            let a = build();
            let width = (2 * (cfg.n + cfg.m) as u64 / 100).max(1);
            let (total, d) = time(|| {
                inp.queries
                    .iter()
                    .map(|&lo| a.range(&lo, &(lo + width)).len())
                    .sum::<usize>()
            });
            std::hint::black_box(total);
            (d, a)
        }
        Op::Filter => {
            let a = build();
            let (t, d) = time(|| a.filter(|k, _| k % 2 == 0));
            (d, t)
        }
        Op::Reduce => {
            let a = build();
            let (s, d) = time(|| a.reduce(|x, y| x.wrapping_add(y), 0));
            std::hint::black_box(s);
            (d, a)
        }
    }
}

fn run_codec<C: Codec<u64, u64>>(cfg: &BenchConfig) -> MicroRow {
    let tcfg = Config::new(cfg.block);
    let inp = inputs(cfg);
    let mut times = Vec::with_capacity(cfg.trials);
    let mut space = None;
    for _ in 0..cfg.trials {
        let (d, t) = trial::<C>(cfg, tcfg, &inp);
        times.push(d);
        space.get_or_insert_with(|| t.space());
    }
    let space = space.expect("at least one trial");
    MicroRow {
        op: cfg.op,
        n: cfg.n,
        m: cfg.m,
        block: cfg.block,
        encoding: cfg.encoding,
        threads: cfg.threads,
        median_ms: ms(median(times)),
        bytes_total: space.total,
        bytes_metadata: space.metadata(),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, BenchError> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?)
}

/// Runs one microbenchmark on a pool of `cfg.threads` workers.
pub fn run_micro(cfg: &BenchConfig) -> Result<MicroRow, BenchError> {
    cfg.validate()?;
    Ok(pool(cfg.threads)?.install(|| match cfg.encoding {
        Encoding::Identity => run_codec::<Plain>(cfg),
        Encoding::Diff => run_codec::<Diff>(cfg),
    }))
}

/// Runs `cfg` once per block size in `blocks`.
pub fn sweep_blocksize(cfg: &BenchConfig, blocks: &[usize]) -> Result<Vec<MicroRow>, BenchError> {
    if blocks.is_empty() {
        return Err(BenchError::Config("no block sizes given".into()));
    }
    blocks
        .iter()
        .map(|&block| {
            run_micro(&BenchConfig {
                block,
                ..cfg.clone()
            })
        })
        .collect()
}

/// Checks that bytes never grow with the block size.
pub fn check_size_decreasing(rows: &[MicroRow]) -> Result<(), BenchError> {
    let mut sorted: Vec<&MicroRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.block);
    for w in sorted.windows(2) {
        if w[1].bytes_total > w[0].bytes_total {
            return Err(BenchError::SizeNotDecreasing(
                w[1].bytes_total,
                w[1].block,
                w[0].bytes_total,
                w[0].block,
            ));
        }
    }
    Ok(())
}

/// Batch insert and delete throughput on the graph in `path`. Each batch
/// holds `b` random edges between existing vertex ids; the delete removes
/// the same batch again.
pub fn graph_bench(
    path: &Path,
    batches: &[usize],
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<Vec<GraphRow>, BenchError> {
    if trials == 0 || threads == 0 {
        return Err(BenchError::Config(
            "trials and threads must be at least 1".into(),
        ));
    }
    let edges = graph::load_edge_list(path)?;
    if batches.is_empty() {
        return Ok(Vec::new());
    }
    let top = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
    pool(threads)?.install(|| {
        let g = Graph::from_edges(&edges);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(batches.len());
        for &b in batches {
            let mut ins = Vec::with_capacity(trials);
            let mut del = Vec::with_capacity(trials);
            for _ in 0..trials {
                let batch: Vec<(u32, u32)> = (0..b)
                    .map(|_| (rng.gen_range(0..=top), rng.gen_range(0..=top)))
                    .collect();
                let (bigger, d) = time(|| g.insert_edges(&batch));
                ins.push(d);
                let (smaller, d) = time(|| bigger.delete_edges(&batch));
                del.push(d);
                drop(smaller);
            }
            let rate = |d: Duration| b as f64 / d.as_secs_f64().max(1e-9);
            rows.push(GraphRow {
                batch: b,
                insert_eps: rate(median(ins)),
                delete_eps: rate(median(del)),
            });
        }
        Ok(rows)
    })
}

pub fn write_micro<W: Write>(out: W, rows: &[MicroRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MICRO_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_graph<W: Write>(out: W, rows: &[GraphRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRAPH_HEADER)?;
    for r in rows {
        w.write_record([
            r.batch.to_string(),
            format!("{:.1}", r.insert_eps),
            format!("{:.1}", r.delete_eps),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
