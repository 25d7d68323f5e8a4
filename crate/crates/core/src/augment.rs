//! Augmentations: an associative aggregate cached at every node.
//!
//! A regular node stores the aggregate of its whole subtree, a flat node the
//! aggregate of its block. Queries below read those caches and only decode
//! the blocks they cannot answer from a cached value.

use std::marker::PhantomData;

use crate::config::Config;
use crate::encoding::DeltaKey;
use crate::node::{aug_of, Link, Node, View};
use crate::schema::{AugOf, Entry, Schema};
use crate::tree::{fork, from_sorted, join, join2};

/// A monoid over entries: `identity` is neutral for `combine`, `combine`
/// is associative, and `lift` maps one entry into the monoid.
pub trait Augmentation<K, V>: Send + Sync + 'static {
    type Value: Clone + Send + Sync + 'static;

    fn identity() -> Self::Value;
    fn lift(key: &K, val: &V) -> Self::Value;
    fn combine(a: &Self::Value, b: &Self::Value) -> Self::Value;
}

/// No augmentation; costs no space in the nodes.
pub struct NoAug;

impl<K, V> Augmentation<K, V> for NoAug {
    type Value = ();

    fn identity() {}
    fn lift(_: &K, _: &V) {}
    fn combine(_: &(), _: &()) {}
}

/// Sum of the keys (wrapping).
pub struct KeySum;

impl<K: DeltaKey, V> Augmentation<K, V> for KeySum {
    type Value = u64;

    fn identity() -> u64 {
        0
    }
    fn lift(key: &K, _: &V) -> u64 {
        key.to_u64()
    }
    fn combine(a: &u64, b: &u64) -> u64 {
        a.wrapping_add(*b)
    }
}

/// Largest value, `None` on an empty tree.
pub struct MaxVal;

impl<K, V: Ord + Clone + Send + Sync + 'static> Augmentation<K, V> for MaxVal {
    type Value = Option<V>;

    fn identity() -> Option<V> {
        None
    }
    fn lift(_: &K, val: &V) -> Option<V> {
        Some(val.clone())
    }
    fn combine(a: &Option<V>, b: &Option<V>) -> Option<V> {
        a.clone().max(b.clone())
    }
}

/// Sum of a numeric projection of the values.
pub struct ValSum<F>(PhantomData<fn() -> F>);

/// Projection used by [`ValSum`].
pub trait Weigh<V>: Send + Sync + 'static {
    fn weigh(val: &V) -> u64;
}

impl<K, V, F: Weigh<V>> Augmentation<K, V> for ValSum<F> {
    type Value = u64;

    fn identity() -> u64 {
        0
    }
    fn lift(_: &K, val: &V) -> u64 {
        F::weigh(val)
    }
    fn combine(a: &u64, b: &u64) -> u64 {
        a + b
    }
}

fn lift<S: Schema>(e: &Entry<S>) -> AugOf<S> {
    S::Aug::lift(&e.0, &e.1)
}

fn combine3<S: Schema>(a: &AugOf<S>, b: &AugOf<S>, c: &AugOf<S>) -> AugOf<S> {
    S::Aug::combine(a, &S::Aug::combine(b, c))
}

fn fold_where<S: Schema>(entries: &[Entry<S>], mut keep: impl FnMut(&S::Key) -> bool) -> AugOf<S> {
    entries
        .iter()
        .filter(|e| keep(&e.0))
        .fold(S::Aug::identity(), |acc, e| {
            S::Aug::combine(&acc, &lift::<S>(e))
        })
}

/// Aggregate over the entries with key `<= hi`.
pub fn aug_le<S: Schema>(t: &Link<S>, hi: &S::Key) -> AugOf<S>
where
    S::Key: Ord,
{
    let Some(n) = t else {
        return S::Aug::identity();
    };
    match n.view() {
        View::Flat(f) => fold_where::<S>(&f.entries(), |k| k <= hi),
        View::Regular(r) if r.key <= *hi => combine3::<S>(
            &aug_of(&r.left),
            &lift::<S>(&r.entry()),
            &aug_le(&r.right, hi),
        ),
        View::Regular(r) => aug_le(&r.left, hi),
    }
}

/// Aggregate over the entries with key `>= lo`.
pub fn aug_ge<S: Schema>(t: &Link<S>, lo: &S::Key) -> AugOf<S>
where
    S::Key: Ord,
{
    let Some(n) = t else {
        return S::Aug::identity();
    };
    match n.view() {
        View::Flat(f) => fold_where::<S>(&f.entries(), |k| k >= lo),
        View::Regular(r) if r.key >= *lo => combine3::<S>(
            &aug_ge(&r.left, lo),
            &lift::<S>(&r.entry()),
            &aug_of(&r.right),
        ),
        View::Regular(r) => aug_ge(&r.right, lo),
    }
}

/// Aggregate over the entries with `lo <= key <= hi`. Decodes at most two
/// blocks.
pub fn aug_range<S: Schema>(t: &Link<S>, lo: &S::Key, hi: &S::Key) -> AugOf<S>
where
    S::Key: Ord,
{
    let Some(n) = t else {
        return S::Aug::identity();
    };
    if lo > hi {
        return S::Aug::identity();
    }
    match n.view() {
        View::Flat(f) => fold_where::<S>(&f.entries(), |k| k >= lo && k <= hi),
        View::Regular(r) if r.key < *lo => aug_range(&r.right, lo, hi),
        View::Regular(r) if r.key > *hi => aug_range(&r.left, lo, hi),
        View::Regular(r) => combine3::<S>(
            &aug_ge(&r.left, lo),
            &lift::<S>(&r.entry()),
            &aug_le(&r.right, hi),
        ),
    }
}

/// Keeps the entries whose lifted value satisfies `h`. Subtrees whose
/// aggregate fails `h` are dropped without being visited, which is exact
/// when `h(combine(a, b))` implies `h(a) || h(b)`.
pub fn aug_filter<S, H>(cfg: &Config, t: Link<S>, h: &H) -> Link<S>
where
    S: Schema,
    H: Fn(&AugOf<S>) -> bool + Sync,
{
    let n = t?;
    if !h(n.aug()) {
        return None;
    }
    if let View::Flat(f) = n.view() {
        let entries = f.entries();
        let kept: Vec<_> = entries
            .iter()
            .filter(|e| h(&lift::<S>(e)))
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
        || aug_filter(cfg, l0, h),
        || aug_filter(cfg, r0, h),
    );
    let keep = h(&lift::<S>(&r.entry()));
    if keep && same(&l, &r.left) && same(&rr, &r.right) {
        return Some(n);
    }
    if keep {
        Some(join(cfg, l, r.entry(), rr))
    } else {
        join2(cfg, l, rr)
    }
}

pub(crate) fn same<S: Schema>(a: &Link<S>, b: &Link<S>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => Node::ptr_eq(a, b),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check;
    use crate::encoding::Plain;
    use crate::schema::MapSchema;

    type Sum = MapSchema<u64, u64, KeySum, Plain>;
    type Max = MapSchema<u64, u64, MaxVal, Plain>;

    fn sum_tree(cfg: &Config, keys: impl Iterator<Item = u64>) -> Link<Sum> {
        let e: Vec<(u64, u64)> = keys.map(|k| (k, 0)).collect();
        from_sorted(cfg, &e)
    }

    #[test]
    fn sums_over_ranges() {
        for b in [1, 2, 3, 128] {
            let cfg = Config::new(b);
            let t = sum_tree(&cfg, 0..16);
            assert_eq!(aug_of(&t), 120);
            assert_eq!(aug_range(&t, &3, &5), 12);
            assert_eq!(aug_range(&t, &0, &15), aug_of(&t));
            assert_eq!(aug_le(&t, &3), 6);
            assert_eq!(aug_ge(&t, &14), 29);
            assert_eq!(aug_range(&t, &9, &2), 0);
        }
        assert_eq!(aug_of::<Sum>(&None), 0);
    }

    #[test]
    fn interval_stabbing() {
        // intervals [l, r] stored as l -> r
        let ivals = [
            (1u64, 4u64),
            (2, 9),
            (3, 3),
            (5, 7),
            (6, 12),
            (8, 8),
            (10, 11),
        ];
        for b in [1, 2, 3] {
            let cfg = Config::new(b);
            let t: Link<Max> = from_sorted(&cfg, &ivals);
            for q in 0..14 {
                let reach = aug_filter(&cfg, t.clone(), &|m: &Option<u64>| {
                    m.is_some_and(|r| r >= q)
                });
                check(&cfg, &reach).unwrap();
                let stabbed: Vec<(u64, u64)> = crate::tree::to_vec(&reach)
                    .into_iter()
                    .filter(|&(l, _)| l <= q)
                    .collect();
                let want: Vec<(u64, u64)> = ivals
                    .iter()
                    .copied()
                    .filter(|&(l, r)| l <= q && q <= r)
                    .collect();
                assert_eq!(stabbed, want, "B={b} q={q}");
            }
            let all = aug_filter(&cfg, t.clone(), &|_: &Option<u64>| true);
            assert!(same(&all, &t));
        }
    }
}
