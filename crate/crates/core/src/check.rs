//! Structural validation of a tree against every PaC-tree invariant.

use thiserror::Error;

use crate::augment::Augmentation;
use crate::config::Config;
use crate::node::{fold_aug, Link, View};
use crate::schema::{AugOf, Entry, Schema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("node at depth {depth} is out of balance: children {left} / {right}")]
    Unbalanced {
        depth: usize,
        left: usize,
        right: usize,
    },
    #[error("block of {count} entries outside [{min}, {max}]")]
    BlockSize {
        count: usize,
        min: usize,
        max: usize,
    },
    #[error("flat node in a tree of {size} entries (below the block size)")]
    FlatInSimplex { size: usize },
    #[error("subtree of {size} entries below the block size inside a tree of {total}")]
    SmallSubtree { size: usize, total: usize },
    #[error("entries out of order at position {position}")]
    Order { position: usize },
    #[error("stored size {stored} but subtree holds {actual} entries")]
    Size { stored: usize, actual: usize },
    #[error("stored aggregate differs from recomputation at depth {depth}")]
    Aug { depth: usize },
    #[error("marked node left in a finished tree at depth {depth}")]
    Marked { depth: usize },
    #[error("height {height} exceeds bound {bound:.2}")]
    Height { height: usize, bound: f64 },
}

/// Checks balance, block sizes, key order, stored sizes and aggregates,
/// absence of expansion marks and the height bound.
pub fn check<S: Schema>(cfg: &Config, t: &Link<S>) -> Result<(), Violation>
where
    AugOf<S>: PartialEq,
{
    let total = t.as_ref().map_or(0, |n| n.size());
    let mut entries = Vec::with_capacity(total);
    let height = walk(cfg, t, total, 0, &mut entries)?;
    if entries.len() != total {
        return Err(Violation::Size {
            stored: total,
            actual: entries.len(),
        });
    }
    for (i, w) in entries.windows(2).enumerate() {
        if !S::in_order(&w[0].0, &w[1].0) {
            return Err(Violation::Order { position: i + 1 });
        }
    }
    // edges on the longest root-to-leaf path, flats counting as leaves
    let bound = cfg.height_bound(total);
    if total > 0 && (height - 1) as f64 > bound {
        return Err(Violation::Height {
            height: height - 1,
            bound,
        });
    }
    Ok(())
}

struct Summary<S: Schema> {
    size: usize,
    aug: AugOf<S>,
}

fn walk<S: Schema>(
    cfg: &Config,
    t: &Link<S>,
    total: usize,
    depth: usize,
    out: &mut Vec<Entry<S>>,
) -> Result<usize, Violation>
where
    AugOf<S>: PartialEq,
{
    summarize(cfg, t, total, depth, out).map(|(_, h)| h)
}

fn summarize<S: Schema>(
    cfg: &Config,
    t: &Link<S>,
    total: usize,
    depth: usize,
    out: &mut Vec<Entry<S>>,
) -> Result<(Summary<S>, usize), Violation>
where
    AugOf<S>: PartialEq,
{
    let Some(n) = t else {
        if total >= cfg.block {
            return Err(Violation::SmallSubtree { size: 0, total });
        }
        return Ok((
            Summary {
                size: 0,
                aug: S::Aug::identity(),
            },
            0,
        ));
    };
    if n.is_marked() {
        return Err(Violation::Marked { depth });
    }
    if total >= cfg.block && n.size() < cfg.block {
        return Err(Violation::SmallSubtree {
            size: n.size(),
            total,
        });
    }
    match n.view() {
        View::Flat(f) => {
            if total < cfg.block {
                return Err(Violation::FlatInSimplex { size: total });
            }
            let count = f.count();
            if count < cfg.block || count > 2 * cfg.block {
                return Err(Violation::BlockSize {
                    count,
                    min: cfg.block,
                    max: 2 * cfg.block,
                });
            }
            let entries = f.entries_uncounted();
            if entries.len() != count {
                return Err(Violation::Size {
                    stored: count,
                    actual: entries.len(),
                });
            }
            let aug = fold_aug::<S>(&entries);
            if aug != f.aug {
                return Err(Violation::Aug { depth });
            }
            out.extend_from_slice(&entries);
            Ok((Summary { size: count, aug }, 1))
        }
        View::Regular(r) => {
            // simplex trees may hold nil children; they are checked by size
            let sub_total = if total >= cfg.block { total } else { 0 };
            let (ls, lh) = summarize(cfg, &r.left, sub_total, depth + 1, out)?;
            out.push(r.entry());
            let (rs, rh) = summarize(cfg, &r.right, sub_total, depth + 1, out)?;
            let size = ls.size + rs.size + 1;
            if size != r.size() {
                return Err(Violation::Size {
                    stored: r.size(),
                    actual: size,
                });
            }
            if !cfg.balanced(ls.size, rs.size) {
                return Err(Violation::Unbalanced {
                    depth,
                    left: ls.size,
                    right: rs.size,
                });
            }
            let lifted = S::Aug::lift(&r.key, &r.val);
            let aug = S::Aug::combine(&ls.aug, &S::Aug::combine(&lifted, &rs.aug));
            if aug != r.aug {
                return Err(Violation::Aug { depth });
            }
            Ok((Summary { size, aug }, 1 + lh.max(rh)))
        }
    }
}

/// Number of flat nodes in `t`.
pub fn block_count<S: Schema>(t: &Link<S>) -> usize {
    match t {
        None => 0,
        Some(n) => match n.view() {
            View::Flat(_) => 1,
            View::Regular(r) => block_count(&r.left) + block_count(&r.right),
        },
    }
}

/// Number of nodes (regular and flat) in `t`.
pub fn node_count<S: Schema>(t: &Link<S>) -> usize {
    match t {
        None => 0,
        Some(n) => match n.view() {
            View::Flat(_) => 1,
            View::Regular(r) => 1 + node_count(&r.left) + node_count(&r.right),
        },
    }
}

/// Longest root-to-leaf path, counted in nodes.
pub fn height<S: Schema>(t: &Link<S>) -> usize {
    match t {
        None => 0,
        Some(n) => match n.view() {
            View::Flat(_) => 1,
            View::Regular(r) => 1 + height(&r.left).max(height(&r.right)),
        },
    }
}
