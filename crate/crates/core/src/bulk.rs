//! Join-based bulk algorithms on key-ordered trees.
//!
//! Set operations recurse on the root of the second tree, split the first
//! tree by its key and join the two recursive results. Below `kappa`
//! combined entries they flatten both inputs, merge the arrays and rebuild.
//!
//! Collisions are resolved by a combine function called as
//! `combine(value_from_first, value_from_second)`.

use std::cmp::Ordering;

use rayon::slice::ParallelSliceMut;

use crate::augment::same;
use crate::config::Config;
use crate::node::{size, Link, Node, View};
use crate::schema::{Entry, Schema};
use crate::tree::{
    expose, fork, from_sorted, join, join2, join_expanded, join_with, refold, split,
    split_expanded, to_vec, unfold, Mode,
};

/// Sorts `entries` by key (stable) and collapses equal keys left to right
/// with `combine(earlier, later)`.
pub fn sort_dedup<K, V, F>(mut entries: Vec<(K, V)>, combine: &F) -> Vec<(K, V)>
where
    K: Ord + Send,
    V: Send,
    F: Fn(&V, &V) -> V,
{
    entries.par_sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(K, V)> = Vec::with_capacity(entries.len());
    for (k, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 = combine(&last.1, &v),
            _ => out.push((k, v)),
        }
    }
    out
}

/// Builds a tree from unsorted entries; equal keys are combined in input
/// order.
pub fn build<S, F>(cfg: &Config, entries: Vec<Entry<S>>, combine: &F) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val,
{
    from_sorted(cfg, &sort_dedup(entries, combine))
}

fn merge_union<K: Ord + Clone, V: Clone>(
    a: &[(K, V)],
    b: &[(K, V)],
    combine: &impl Fn(&V, &V) -> V,
) -> Vec<(K, V)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0.clone(), combine(&a[i].1, &b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_intersection<K: Ord + Clone, V: Clone>(
    a: &[(K, V)],
    b: &[(K, V)],
    combine: &impl Fn(&V, &V) -> V,
) -> Vec<(K, V)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push((a[i].0.clone(), combine(&a[i].1, &b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn merge_difference<K: Ord + Clone, V: Clone, W>(a: &[(K, V)], b: &[(K, W)]) -> Vec<(K, V)> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for e in a {
        while j < b.len() && b[j].0 < e.0 {
            j += 1;
        }
        if j >= b.len() || b[j].0 != e.0 {
            out.push(e.clone());
        }
    }
    out
}

fn small<S: Schema>(cfg: &Config, a: &Link<S>, b: &Link<S>) -> bool {
    size(a) + size(b) < cfg.kappa
}

/// All keys of both trees.
pub fn union<S, F>(cfg: &Config, t1: Link<S>, t2: Link<S>, combine: &F) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    let (Some(a), Some(b)) = (&t1, &t2) else {
        return t1.or(t2);
    };
    let total = a.size() + b.size();
    if small(cfg, &t1, &t2) {
        return from_sorted(cfg, &merge_union(&to_vec(&t1), &to_vec(&t2), combine));
    }
    let (l2, (k2, v2), r2, shell) = expose(cfg, t2.expect("checked")).entry();
    let s = split(cfg, t1, &k2);
    let (l, r) = fork(
        total > cfg.grain,
        || union(cfg, s.left, l2, combine),
        || union(cfg, s.right, r2, combine),
    );
    let v = match s.found {
        Some((_, v1)) => combine(&v1, &v2),
        None => v2,
    };
    Some(join_with(cfg, Mode::Normal, shell, l, (k2, v), r))
}

/// Keys present in both trees.
pub fn intersection<S, F>(cfg: &Config, t1: Link<S>, t2: Link<S>, combine: &F) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    let (Some(a), Some(b)) = (&t1, &t2) else {
        return None;
    };
    let total = a.size() + b.size();
    if small(cfg, &t1, &t2) {
        return from_sorted(
            cfg,
            &merge_intersection(&to_vec(&t1), &to_vec(&t2), combine),
        );
    }
    let (l2, (k2, v2), r2, shell) = expose(cfg, t2.expect("checked")).entry();
    let s = split(cfg, t1, &k2);
    let (l, r) = fork(
        total > cfg.grain,
        || intersection(cfg, s.left, l2, combine),
        || intersection(cfg, s.right, r2, combine),
    );
    match s.found {
        Some((_, v1)) => Some(join_with(
            cfg,
            Mode::Normal,
            shell,
            l,
            (k2, combine(&v1, &v2)),
            r,
        )),
        None => join2(cfg, l, r),
    }
}

/// Entries of `t1` whose keys do not occur in `t2`.
pub fn difference<S>(cfg: &Config, t1: Link<S>, t2: Link<S>) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
{
    let (Some(a), Some(b)) = (&t1, &t2) else {
        return t1;
    };
    let total = a.size() + b.size();
    if small(cfg, &t1, &t2) {
        let kept = merge_difference(&to_vec(&t1), &to_vec(&t2));
        if kept.len() == a.size() {
            return t1;
        }
        return from_sorted(cfg, &kept);
    }
    let (l2, (k2, _), r2, _) = expose(cfg, t2.expect("checked")).entry();
    let s = split(cfg, t1, &k2);
    let (l, r) = fork(
        total > cfg.grain,
        || difference(cfg, s.left, l2),
        || difference(cfg, s.right, r2),
    );
    join2(cfg, l, r)
}

/// [`union`] that unfolds every block it touches at most once: recursion
/// below the first block runs in expanded mode and the result is repaired
/// by one final `refold`.
pub fn union_efficient<S, F>(cfg: &Config, t1: Link<S>, t2: Link<S>, combine: &F) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    refold(cfg, union_base(cfg, t1, t2, combine))
}

fn union_base<S, F>(cfg: &Config, t1: Link<S>, t2: Link<S>, combine: &F) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    let (Some(a), Some(b)) = (&t1, &t2) else {
        return t1.or(t2);
    };
    let total = a.size() + b.size();
    if small(cfg, &t1, &t2) {
        return from_sorted(cfg, &merge_union(&to_vec(&t1), &to_vec(&t2), combine));
    }
    let mut b = t2.expect("checked");
    if b.is_flat() {
        b = unfold(cfg, b);
    }
    let (l2, (k2, v2), r2, _) = b.into_regular_parts(cfg.reuse).entry();
    let s = split_expanded(cfg, t1, &k2);
    let (l, r) = fork(
        total > cfg.grain,
        || union_base(cfg, s.left, l2, combine),
        || union_base(cfg, s.right, r2, combine),
    );
    let v = match s.found {
        Some((_, v1)) => combine(&v1, &v2),
        None => v2,
    };
    Some(join_expanded(cfg, l, (k2, v), r))
}

/// Inserts a sorted, duplicate-free batch; existing keys become
/// `combine(old, new)`.
pub fn multi_insert_sorted<S, F>(
    cfg: &Config,
    t: Link<S>,
    batch: &[Entry<S>],
    combine: &F,
) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    if batch.is_empty() {
        return t;
    }
    let Some(n) = t else {
        return from_sorted(cfg, batch);
    };
    let total = n.size() + batch.len();
    if total < cfg.kappa {
        return from_sorted(cfg, &merge_union(&to_vec(&Some(n)), batch, combine));
    }
    let (l, (k, v), r, shell) = expose(cfg, n).entry();
    let i = batch.partition_point(|e| e.0 < k);
    let hit = batch.get(i).filter(|e| e.0 == k);
    let v = match hit {
        Some(e) => combine(&v, &e.1),
        None => v,
    };
    let j = i + hit.is_some() as usize;
    let (l, r) = fork(
        total > cfg.grain,
        || multi_insert_sorted(cfg, l, &batch[..i], combine),
        || multi_insert_sorted(cfg, r, &batch[j..], combine),
    );
    Some(join_with(cfg, Mode::Normal, shell, l, (k, v), r))
}

/// Replaces the values of keys that are present; absent keys in the batch
/// are ignored.
pub fn multi_update_sorted<S, F>(
    cfg: &Config,
    t: Link<S>,
    batch: &[Entry<S>],
    update: &F,
) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val + Sync,
{
    let n = t?;
    if batch.is_empty() {
        return Some(n);
    }
    let total = n.size() + batch.len();
    if total < cfg.kappa {
        let mut entries = to_vec(&Some(n));
        let mut j = 0;
        for e in entries.iter_mut() {
            while j < batch.len() && batch[j].0 < e.0 {
                j += 1;
            }
            if j < batch.len() && batch[j].0 == e.0 {
                e.1 = update(&e.1, &batch[j].1);
            }
        }
        return from_sorted(cfg, &entries);
    }
    let (l, (k, v), r, shell) = expose(cfg, n).entry();
    let i = batch.partition_point(|e| e.0 < k);
    let hit = batch.get(i).filter(|e| e.0 == k);
    let v = match hit {
        Some(e) => update(&v, &e.1),
        None => v,
    };
    let j = i + hit.is_some() as usize;
    let (l, r) = fork(
        total > cfg.grain,
        || multi_update_sorted(cfg, l, &batch[..i], update),
        || multi_update_sorted(cfg, r, &batch[j..], update),
    );
    Some(join_with(cfg, Mode::Normal, shell, l, (k, v), r))
}

/// Removes a sorted, duplicate-free set of keys.
pub fn multi_delete_sorted<S>(cfg: &Config, t: Link<S>, keys: &[S::Key]) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
{
    let n = t?;
    if keys.is_empty() {
        return Some(n);
    }
    let total = n.size() + keys.len();
    if total < cfg.kappa {
        let entries = to_vec(&Some(n));
        let keyed: Vec<(S::Key, ())> = keys.iter().map(|k| (k.clone(), ())).collect();
        return from_sorted(cfg, &merge_difference(&entries, &keyed));
    }
    let (l, e, r, shell) = expose(cfg, n).entry();
    let i = keys.partition_point(|k| *k < e.0);
    let hit = keys.get(i).is_some_and(|k| *k == e.0);
    let j = i + hit as usize;
    let (l, r) = fork(
        total > cfg.grain,
        || multi_delete_sorted(cfg, l, &keys[..i]),
        || multi_delete_sorted(cfg, r, &keys[j..]),
    );
    if hit {
        join2(cfg, l, r)
    } else {
        Some(join_with(cfg, Mode::Normal, shell, l, e, r))
    }
}

/// Keeps the entries satisfying `pred`. Unchanged subtrees are shared with
/// the input.
pub fn filter<S, P>(cfg: &Config, t: Link<S>, pred: &P) -> Link<S>
where
    S: Schema,
    P: Fn(&S::Key, &S::Val) -> bool + Sync,
{
    let n = t?;
    if let View::Flat(f) = n.view() {
        let entries = f.entries();
        let kept: Vec<_> = entries
            .iter()
            .filter(|e| pred(&e.0, &e.1))
            .cloned()
            .collect();
        if kept.len() == entries.len() {
            return Some(n);
        }
        return from_sorted(cfg, &kept);
    }
    let r = n.as_regular().expect("not flat");
    let (l0, r0) = (r.left.clone(), r.right.clone());
    let (l, rr) = fork(
        n.size() > cfg.grain,
        || filter(cfg, l0, pred),
        || filter(cfg, r0, pred),
    );
    let keep = pred(&r.key, &r.val);
    if keep && same(&l, &r.left) && same(&rr, &r.right) {
        return Some(n);
    }
    if keep {
        Some(join(cfg, l, r.entry(), rr))
    } else {
        join2(cfg, l, rr)
    }
}

/// Applies `f` to every value, keeping keys and tree shape.
pub fn map_values<S, T, F>(cfg: &Config, t: &Link<S>, f: &F) -> Link<T>
where
    S: Schema,
    T: Schema<Key = S::Key>,
    F: Fn(&S::Key, &S::Val) -> T::Val + Sync,
{
    let n = t.as_ref()?;
    match n.view() {
        View::Flat(fl) => {
            let mapped = fl
                .entries()
                .iter()
                .map(|(k, v)| (k.clone(), f(k, v)))
                .collect();
            Some(Node::flat(mapped))
        }
        View::Regular(r) => {
            let (l, rr) = fork(
                n.size() > cfg.grain,
                || map_values(cfg, &r.left, f),
                || map_values(cfg, &r.right, f),
            );
            let v = f(&r.key, &r.val);
            Some(Node::regular(None, l, (r.key.clone(), v), rr, false))
        }
    }
}

/// Folds `g(entry)` over the tree with the associative `f`.
pub fn map_reduce<S, R, G, F>(cfg: &Config, t: &Link<S>, g: &G, f: &F, identity: &R) -> R
where
    S: Schema,
    R: Clone + Send + Sync,
    G: Fn(&S::Key, &S::Val) -> R + Sync,
    F: Fn(R, R) -> R + Sync,
{
    let Some(n) = t else { return identity.clone() };
    match n.view() {
        View::Flat(fl) => fl
            .entries()
            .iter()
            .fold(identity.clone(), |acc, (k, v)| f(acc, g(k, v))),
        View::Regular(r) => {
            let (a, b) = fork(
                n.size() > cfg.grain,
                || map_reduce(cfg, &r.left, g, f, identity),
                || map_reduce(cfg, &r.right, g, f, identity),
            );
            f(f(a, g(&r.key, &r.val)), b)
        }
    }
}
