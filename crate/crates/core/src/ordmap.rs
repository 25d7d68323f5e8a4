//! Persistent ordered maps and sets.

use std::fmt;

use crate::augment::{self, Augmentation, NoAug};
use crate::bulk;
use crate::check::{self, Violation};
use crate::config::Config;
use crate::encoding::{Codec, Plain};
use crate::node::{size, Link, Node, View};
use crate::schema::{Entry, MapSchema, Schema};
use crate::space::{self, Space};
use crate::tree::{self, join, join2, join_with, node, Mode};

/// Value of `key` in `t`.
pub fn find<S: Schema>(t: &Link<S>, key: &S::Key) -> Option<S::Val>
where
    S::Key: Ord,
{
    let mut cur = t.as_ref();
    while let Some(n) = cur {
        match n.view() {
            View::Flat(f) => {
                let entries = f.entries();
                return entries
                    .binary_search_by(|e| e.0.cmp(key))
                    .ok()
                    .map(|i| entries[i].1.clone());
            }
            View::Regular(r) => match key.cmp(&r.key) {
                std::cmp::Ordering::Less => cur = r.left.as_ref(),
                std::cmp::Ordering::Greater => cur = r.right.as_ref(),
                std::cmp::Ordering::Equal => return Some(r.val.clone()),
            },
        }
    }
    None
}

/// Inserts `e`; an existing value `old` becomes `combine(old, new)`. Only
/// the search path is copied.
pub fn insert<S, F>(cfg: &Config, t: Link<S>, e: Entry<S>, combine: &F) -> Node<S>
where
    S: Schema,
    S::Key: Ord,
    F: Fn(&S::Val, &S::Val) -> S::Val,
{
    let Some(n) = t else {
        return node(cfg, None, None, e, None);
    };
    if let View::Flat(f) = n.view() {
        let mut entries = f.entries().into_owned();
        match entries.binary_search_by(|x| x.0.cmp(&e.0)) {
            Ok(i) => entries[i].1 = combine(&entries[i].1, &e.1),
            Err(i) => entries.insert(i, e),
        }
        return tree::from_sorted(cfg, &entries).expect("nonempty");
    }
    let (l, x, r, shell) = n.into_regular_parts(cfg.reuse).entry();
    match e.0.cmp(&x.0) {
        std::cmp::Ordering::Equal => {
            let v = combine(&x.1, &e.1);
            join_with(cfg, Mode::Normal, shell, l, (x.0, v), r)
        }
        std::cmp::Ordering::Less => {
            let l = insert(cfg, l, e, combine);
            join_with(cfg, Mode::Normal, shell, Some(l), x, r)
        }
        std::cmp::Ordering::Greater => {
            let r = insert(cfg, r, e, combine);
            join_with(cfg, Mode::Normal, shell, l, x, Some(r))
        }
    }
}

/// Removes `key` if present.
pub fn remove<S>(cfg: &Config, t: Link<S>, key: &S::Key) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
{
    let n = t?;
    if let View::Flat(f) = n.view() {
        let entries = f.entries();
        let Ok(i) = entries.binary_search_by(|x| x.0.cmp(key)) else {
            return Some(n.clone());
        };
        let mut rest = entries.into_owned();
        rest.remove(i);
        return tree::from_sorted(cfg, &rest);
    }
    let (l, x, r, shell) = n.into_regular_parts(cfg.reuse).entry();
    match key.cmp(&x.0) {
        std::cmp::Ordering::Equal => join2(cfg, l, r),
        std::cmp::Ordering::Less => Some(join_with(
            cfg,
            Mode::Normal,
            shell,
            remove(cfg, l, key),
            x,
            r,
        )),
        std::cmp::Ordering::Greater => Some(join_with(
            cfg,
            Mode::Normal,
            shell,
            l,
            x,
            remove(cfg, r, key),
        )),
    }
}

/// Number of keys strictly below `key`.
pub fn rank<S: Schema>(t: &Link<S>, key: &S::Key) -> usize
where
    S::Key: Ord,
{
    let mut cur = t.as_ref();
    let mut acc = 0;
    while let Some(n) = cur {
        match n.view() {
            View::Flat(f) => return acc + f.entries().partition_point(|e| e.0 < *key),
            View::Regular(r) => {
                if *key <= r.key {
                    cur = r.left.as_ref();
                } else {
                    acc += size(&r.left) + 1;
                    cur = r.right.as_ref();
                }
            }
        }
    }
    acc
}

/// Entry at in-order position `i`.
pub fn select<S: Schema>(t: &Link<S>, mut i: usize) -> Option<Entry<S>> {
    let mut cur = t.as_ref();
    while let Some(n) = cur {
        if i >= n.size() {
            return None;
        }
        match n.view() {
            View::Flat(f) => return Some(f.entries()[i].clone()),
            View::Regular(r) => {
                let ls = size(&r.left);
                match i.cmp(&ls) {
                    std::cmp::Ordering::Less => cur = r.left.as_ref(),
                    std::cmp::Ordering::Equal => return Some(r.entry()),
                    std::cmp::Ordering::Greater => {
                        i -= ls + 1;
                        cur = r.right.as_ref();
                    }
                }
            }
        }
    }
    None
}

/// Smallest entry with key strictly above `key`.
pub fn next<S: Schema>(t: &Link<S>, key: &S::Key) -> Option<Entry<S>>
where
    S::Key: Ord,
{
    let mut cur = t.as_ref();
    let mut best = None;
    while let Some(n) = cur {
        match n.view() {
            View::Flat(f) => {
                let entries = f.entries();
                let i = entries.partition_point(|e| e.0 <= *key);
                return entries.get(i).cloned().or(best);
            }
            View::Regular(r) => {
                if r.key > *key {
                    best = Some(r.entry());
                    cur = r.left.as_ref();
                } else {
                    cur = r.right.as_ref();
                }
            }
        }
    }
    best
}

/// Largest entry with key strictly below `key`.
pub fn previous<S: Schema>(t: &Link<S>, key: &S::Key) -> Option<Entry<S>>
where
    S::Key: Ord,
{
    let mut cur = t.as_ref();
    let mut best = None;
    while let Some(n) = cur {
        match n.view() {
            View::Flat(f) => {
                let entries = f.entries();
                let i = entries.partition_point(|e| e.0 < *key);
                return if i > 0 {
                    Some(entries[i - 1].clone())
                } else {
                    best
                };
            }
            View::Regular(r) => {
                if r.key < *key {
                    best = Some(r.entry());
                    cur = r.right.as_ref();
                } else {
                    cur = r.left.as_ref();
                }
            }
        }
    }
    best
}

/// Entries with key `<= hi`.
pub fn take_le<S>(cfg: &Config, t: &Link<S>, hi: &S::Key) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
{
    let n = t.as_ref()?;
    match n.view() {
        View::Flat(f) => {
            let entries = f.entries();
            let i = entries.partition_point(|e| e.0 <= *hi);
            if i == entries.len() {
                return Some(n.clone());
            }
            tree::from_sorted(cfg, &entries[..i])
        }
        View::Regular(r) if r.key <= *hi => Some(join(
            cfg,
            r.left.clone(),
            r.entry(),
            take_le(cfg, &r.right, hi),
        )),
        View::Regular(r) => take_le(cfg, &r.left, hi),
    }
}

/// Entries with key `>= lo`.
pub fn take_ge<S>(cfg: &Config, t: &Link<S>, lo: &S::Key) -> Link<S>
where
    S: Schema,
    S::Key: Ord,
{
    let n = t.as_ref()?;
    match n.view() {
        View::Flat(f) => {
            let entries = f.entries();
            let i = entries.partition_point(|e| e.0 < *lo);
            if i == 0 {
                return Some(n.clone());
            }
            tree::from_sorted(cfg, &entries[i..])
        }
        View::Regular(r) if r.key >= *lo => Some(join(
            cfg,
            take_ge(cfg, &r.left, lo),
            r.entry(),
            r.right.clone(),
        )),
        View::Regular(r) => take_ge(cfg, &r.right, lo),
    }
}

fn first<S: Schema>(t: &Link<S>) -> Option<Entry<S>> {
    let mut n = t.as_ref()?;
    loop {
        match n.view() {
            View::Flat(f) => return f.entries().first().cloned(),
            View::Regular(r) => match &r.left {
                Some(l) => n = l,
                None => return Some(r.entry()),
            },
        }
    }
}

fn last<S: Schema>(t: &Link<S>) -> Option<Entry<S>> {
    let mut n = t.as_ref()?;
    loop {
        match n.view() {
            View::Flat(f) => return f.entries().last().cloned(),
            View::Regular(r) => match &r.right {
                Some(x) => n = x,
                None => return Some(r.entry()),
            },
        }
    }
}

/// Collision policy used when none is given: the incoming value wins.
pub fn second<V: Clone>(_: &V, b: &V) -> V {
    b.clone()
}

/// A persistent ordered map from `K` to `V`, augmented by `A` and storing
/// its leaf blocks with codec `C`.
///
/// Cloning is O(1) and shares every node. Methods taking `&self` leave the
/// map untouched and return a new version; the `_mut` variants replace the
/// map in place and, when its nodes are not shared with another version,
/// recycle them.
pub struct OrdMap<K, V, A = NoAug, C = Plain>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    root: Link<MapSchema<K, V, A, C>>,
    cfg: Config,
}

/// A persistent ordered set.
pub type OrdSet<K, C = Plain> = OrdMap<K, (), NoAug, C>;

impl<K, V, A, C> Clone for OrdMap<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    fn clone(&self) -> Self {
        OrdMap {
            root: self.root.clone(),
            cfg: self.cfg,
        }
    }
}

impl<K, V, A, C> Default for OrdMap<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    fn default() -> Self {
        OrdMap::new(Config::default())
    }
}

type MapLink<K, V, A, C> = Link<MapSchema<K, V, A, C>>;

impl<K, V, A, C> OrdMap<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    /// An empty map. Panics if `cfg` is invalid.
    pub fn new(cfg: Config) -> Self {
        let cfg = cfg
            .validate()
            .unwrap_or_else(|e| panic!("invalid config: {e}"));
        OrdMap { root: None, cfg }
    }

    pub fn with_block(block: usize) -> Self {
        OrdMap::new(Config::new(block))
    }

    pub fn from_root(cfg: Config, root: MapLink<K, V, A, C>) -> Self {
        OrdMap { root, cfg }
    }

    pub fn into_root(self) -> MapLink<K, V, A, C> {
        self.root
    }

    pub fn root(&self) -> &MapLink<K, V, A, C> {
        &self.root
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    fn wrap(&self, root: MapLink<K, V, A, C>) -> Self {
        OrdMap {
            root,
            cfg: self.cfg,
        }
    }

    /// Builds from entries in any order; later duplicates win.
    pub fn build(cfg: Config, entries: Vec<(K, V)>) -> Self {
        Self::build_with(cfg, entries, second)
    }

    /// Builds from entries in any order, merging duplicates left to right
    /// with `combine(earlier, later)`.
    pub fn build_with(cfg: Config, entries: Vec<(K, V)>, combine: impl Fn(&V, &V) -> V) -> Self {
        let mut m = Self::new(cfg);
        m.root = bulk::build(&m.cfg, entries, &combine);
        m
    }

    /// Builds from entries with strictly increasing keys. Panics otherwise.
    pub fn from_sorted(cfg: Config, entries: &[(K, V)]) -> Self {
        assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "from_sorted: keys not strictly increasing"
        );
        let mut m = Self::new(cfg);
        m.root = tree::from_sorted(&m.cfg, entries);
        m
    }

    pub fn len(&self) -> usize {
        size(&self.root)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn get(&self, key: &K) -> Option<V> {
        find(&self.root, key)
    }

    pub fn contains_key(&self, key: &K) -> bool {
        self.get(key).is_some()
    }

    pub fn insert(&self, key: K, val: V) -> Self {
        self.insert_with(key, val, second)
    }

    /// Inserts; an existing value `old` becomes `combine(old, val)`.
    pub fn insert_with(&self, key: K, val: V, combine: impl Fn(&V, &V) -> V) -> Self {
        self.wrap(Some(insert(
            &self.cfg,
            self.root.clone(),
            (key, val),
            &combine,
        )))
    }

    pub fn insert_mut(&mut self, key: K, val: V) {
        let root = self.root.take();
        self.root = Some(insert(&self.cfg, root, (key, val), &second));
    }

    pub fn remove(&self, key: &K) -> Self {
        self.wrap(remove(&self.cfg, self.root.clone(), key))
    }

    pub fn remove_mut(&mut self, key: &K) {
        let root = self.root.take();
        self.root = remove(&self.cfg, root, key);
    }

    /// Union; on a shared key the value from `other` wins.
    pub fn union(&self, other: &Self) -> Self {
        self.union_with(other, second)
    }

    /// Union; a shared key gets `combine(value_in_self, value_in_other)`.
    pub fn union_with(&self, other: &Self, combine: impl Fn(&V, &V) -> V + Sync) -> Self {
        self.wrap(bulk::union(
            &self.cfg,
            self.root.clone(),
            other.root.clone(),
            &combine,
        ))
    }

    /// Same result as [`union_with`](Self::union_with), unfolding each
    /// input block at most once.
    pub fn union_efficient_with(&self, other: &Self, combine: impl Fn(&V, &V) -> V + Sync) -> Self {
        self.wrap(bulk::union_efficient(
            &self.cfg,
            self.root.clone(),
            other.root.clone(),
            &combine,
        ))
    }

    pub fn union_efficient(&self, other: &Self) -> Self {
        self.union_efficient_with(other, second)
    }

    /// Consumes both maps; uniquely owned nodes are recycled.
    pub fn into_union(self, other: Self) -> Self {
        let cfg = self.cfg;
        OrdMap {
            root: bulk::union(&cfg, self.root, other.root, &second),
            cfg,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.intersection_with(other, second)
    }

    pub fn intersection_with(&self, other: &Self, combine: impl Fn(&V, &V) -> V + Sync) -> Self {
        self.wrap(bulk::intersection(
            &self.cfg,
            self.root.clone(),
            other.root.clone(),
            &combine,
        ))
    }

    /// Entries of `self` whose keys are not in `other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.wrap(bulk::difference(
            &self.cfg,
            self.root.clone(),
            other.root.clone(),
        ))
    }

    /// Inserts a batch in any order. Duplicates within the batch are merged
    /// left to right, then merged into existing values, all with `combine`.
    pub fn multi_insert_with(
        &self,
        batch: Vec<(K, V)>,
        combine: impl Fn(&V, &V) -> V + Sync,
    ) -> Self {
        let batch = bulk::sort_dedup(batch, &combine);
        self.wrap(bulk::multi_insert_sorted(
            &self.cfg,
            self.root.clone(),
            &batch,
            &combine,
        ))
    }

    pub fn multi_insert(&self, batch: Vec<(K, V)>) -> Self {
        self.multi_insert_with(batch, second)
    }

    pub fn multi_insert_mut(&mut self, batch: Vec<(K, V)>) {
        let batch = bulk::sort_dedup(batch, &second);
        let root = self.root.take();
        self.root = bulk::multi_insert_sorted(&self.cfg, root, &batch, &second);
    }

    /// Updates existing keys to `update(old, new)`; keys not in the map are
    /// ignored. Duplicates in the batch are merged left to right first.
    pub fn multi_update_with(
        &self,
        batch: Vec<(K, V)>,
        update: impl Fn(&V, &V) -> V + Sync,
    ) -> Self {
        let batch = bulk::sort_dedup(batch, &update);
        self.wrap(bulk::multi_update_sorted(
            &self.cfg,
            self.root.clone(),
            &batch,
            &update,
        ))
    }

    pub fn multi_delete(&self, mut keys: Vec<K>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        self.wrap(bulk::multi_delete_sorted(
            &self.cfg,
            self.root.clone(),
            &keys,
        ))
    }

    pub fn multi_delete_mut(&mut self, mut keys: Vec<K>) {
        keys.sort_unstable();
        keys.dedup();
        let root = self.root.take();
        self.root = bulk::multi_delete_sorted(&self.cfg, root, &keys);
    }

    pub fn filter(&self, pred: impl Fn(&K, &V) -> bool + Sync) -> Self {
        self.wrap(bulk::filter(&self.cfg, self.root.clone(), &pred))
    }

    /// Maps every value, keeping keys and shape.
    pub fn map_values<W, B>(&self, f: impl Fn(&K, &V) -> W + Sync) -> OrdMap<K, W, B, Plain>
    where
        W: Clone + Send + Sync + 'static,
        B: Augmentation<K, W>,
    {
        OrdMap {
            root: bulk::map_values(&self.cfg, &self.root, &f),
            cfg: self.cfg,
        }
    }

    /// Folds the values with the associative `f`.
    pub fn reduce(&self, f: impl Fn(V, V) -> V + Sync, identity: V) -> V {
        bulk::map_reduce(
            &self.cfg,
            &self.root,
            &|_: &K, v: &V| v.clone(),
            &f,
            &identity,
        )
    }

    pub fn map_reduce<R: Clone + Send + Sync>(
        &self,
        g: impl Fn(&K, &V) -> R + Sync,
        f: impl Fn(R, R) -> R + Sync,
        identity: R,
    ) -> R {
        bulk::map_reduce(&self.cfg, &self.root, &g, &f, &identity)
    }

    /// Entries with `lo <= key <= hi`.
    pub fn range(&self, lo: &K, hi: &K) -> Self {
        if lo > hi {
            return self.wrap(None);
        }
        let upper = take_le(&self.cfg, &self.root, hi);
        self.wrap(take_ge(&self.cfg, &upper, lo))
    }

    /// Number of keys below `key`.
    pub fn rank(&self, key: &K) -> usize {
        rank(&self.root, key)
    }

    /// Entry at in-order position `i`.
    pub fn select(&self, i: usize) -> Option<(K, V)> {
        select(&self.root, i)
    }

    pub fn next(&self, key: &K) -> Option<(K, V)> {
        next(&self.root, key)
    }

    pub fn previous(&self, key: &K) -> Option<(K, V)> {
        previous(&self.root, key)
    }

    pub fn first(&self) -> Option<(K, V)> {
        first(&self.root)
    }

    pub fn last(&self) -> Option<(K, V)> {
        last(&self.root)
    }

    /// Splits into keys below `key`, its value, and keys above.
    pub fn split(&self, key: &K) -> (Self, Option<V>, Self) {
        let s = tree::split(&self.cfg, self.root.clone(), key);
        (self.wrap(s.left), s.found.map(|e| e.1), self.wrap(s.right))
    }

    /// Concatenates `left`, `(key, val)` and `right`. Panics in debug builds
    /// if the keys are out of order.
    pub fn join(left: &Self, key: K, val: V, right: &Self) -> Self {
        left.wrap(Some(join(
            &left.cfg,
            left.root.clone(),
            (key, val),
            right.root.clone(),
        )))
    }

    /// Concatenates two maps whose key ranges do not overlap.
    pub fn join2(left: &Self, right: &Self) -> Self {
        left.wrap(join2(&left.cfg, left.root.clone(), right.root.clone()))
    }

    pub fn to_vec(&self) -> Vec<(K, V)> {
        tree::to_vec(&self.root)
    }

    pub fn keys(&self) -> Vec<K> {
        self.to_vec().into_iter().map(|e| e.0).collect()
    }

    pub fn iter(&self) -> std::vec::IntoIter<(K, V)> {
        self.to_vec().into_iter()
    }

    /// Aggregate of every entry; read from the root.
    pub fn aug_val(&self) -> A::Value {
        crate::node::aug_of(&self.root)
    }

    /// Aggregate of the entries with `lo <= key <= hi`.
    pub fn aug_range(&self, lo: &K, hi: &K) -> A::Value {
        augment::aug_range(&self.root, lo, hi)
    }

    pub fn aug_le(&self, hi: &K) -> A::Value {
        augment::aug_le(&self.root, hi)
    }

    pub fn aug_ge(&self, lo: &K) -> A::Value {
        augment::aug_ge(&self.root, lo)
    }

    /// Entries whose own aggregate satisfies `h`; see
    /// [`augment::aug_filter`] for the pruning contract.
    pub fn aug_filter(&self, h: impl Fn(&A::Value) -> bool + Sync) -> Self {
        self.wrap(augment::aug_filter(&self.cfg, self.root.clone(), &h))
    }

    /// Validates every structural invariant.
    pub fn check(&self) -> Result<(), Violation>
    where
        A::Value: PartialEq,
    {
        check::check(&self.cfg, &self.root)
    }

    pub fn space(&self) -> Space {
        space::space(&self.root)
    }

    pub fn block_count(&self) -> usize {
        check::block_count(&self.root)
    }

    pub fn height(&self) -> usize {
        check::height(&self.root)
    }

    /// True when both maps are the same version (same root node).
    pub fn ptr_eq(&self, other: &Self) -> bool {
        augment::same(&self.root, &other.root)
    }
}

impl<K, V, A, C> PartialEq for OrdMap<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + PartialEq + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && (self.ptr_eq(other) || self.to_vec() == other.to_vec())
    }
}

impl<K, V, A, C> fmt::Debug for OrdMap<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + fmt::Debug + 'static,
    V: Clone + Send + Sync + fmt::Debug + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.to_vec()).finish()
    }
}
