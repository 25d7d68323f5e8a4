//! Primitive algebra on PaC-trees.
//!
//! Everything else in the crate is written against `expose`, `node` and
//! `join` plus the handful of helpers here. Trees are passed by value:
//! consuming a handle lets the primitives take uniquely owned nodes apart
//! instead of copying them (see [`Config::reuse`]).
//!
//! Shape rules enforced by [`node`], with `s` the size of the new subtree
//! and `B` the block size:
//!
//! * `s > 4B`: a regular node over the given children.
//! * `B <= s <= 2B`: everything folds into one flat node.
//! * `2B < s <= 4B`: a regular root over two flat children.
//! * `s < B`: a regular node (rebuilt perfectly when the children are not
//!   balanced).

use std::cmp::Ordering;

use crate::config::Config;
use crate::node::{size, Link, Node, RegularParts, Shell, View};
use crate::schema::{Entry, Schema};
use crate::stats;

/// Whether a bulk operation folds its output (`Normal`) or leaves it as
/// marked regular nodes for a final `refold` (`Expanded`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Expanded,
}

/// Runs `a` and `b`, in parallel when `parallel` is set.
pub(crate) fn fork<A, B, RA, RB>(parallel: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    if parallel {
        rayon::join(a, b)
    } else {
        (a(), b())
    }
}

/// Appends the in-order entries of `t` to `out`.
pub fn collect<S: Schema>(t: &Link<S>, out: &mut Vec<Entry<S>>) {
    let Some(n) = t else { return };
    match n.view() {
        View::Flat(f) => out.extend_from_slice(&f.entries()),
        View::Regular(r) => {
            collect(&r.left, out);
            out.push(r.entry());
            collect(&r.right, out);
        }
    }
}

pub fn to_vec<S: Schema>(t: &Link<S>) -> Vec<Entry<S>> {
    let mut out = Vec::with_capacity(size(t));
    collect(t, &mut out);
    out
}

fn concat<S: Schema>(l: &Link<S>, e: Entry<S>, r: &Link<S>) -> Vec<Entry<S>> {
    let mut out = Vec::with_capacity(size(l) + size(r) + 1);
    collect(l, &mut out);
    out.push(e);
    collect(r, &mut out);
    out
}

/// Builds a tree over `entries` (already in order) by halving at `n / 2`
/// and combining through [`node`].
pub fn from_sorted<S: Schema>(cfg: &Config, entries: &[Entry<S>]) -> Link<S> {
    let n = entries.len();
    if n == 0 {
        return None;
    }
    if n >= cfg.block && n <= 2 * cfg.block {
        return Some(Node::flat(entries.to_vec()));
    }
    let mid = n / 2;
    let (l, r) = fork(
        n > cfg.grain,
        || from_sorted(cfg, &entries[..mid]),
        || from_sorted(cfg, &entries[mid + 1..]),
    );
    Some(node(cfg, None, l, entries[mid].clone(), r))
}

/// Perfectly balanced tree of marked regular nodes over `entries`.
pub fn from_sorted_expanded<S: Schema>(cfg: &Config, entries: &[Entry<S>]) -> Link<S> {
    let n = entries.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (l, r) = fork(
        n > cfg.grain,
        || from_sorted_expanded(cfg, &entries[..mid]),
        || from_sorted_expanded(cfg, &entries[mid + 1..]),
    );
    Some(Node::regular(None, l, entries[mid].clone(), r, true))
}

/// Smart constructor: combines `l`, `e`, `r` into a subtree obeying the
/// blocked-leaf rules. `shell` is recycled when a regular root is built.
///
/// Callers guarantee in-order placement of `e`, and balance of `l` and `r`
/// whenever the result exceeds `4B` entries.
pub fn node<S: Schema>(
    cfg: &Config,
    shell: Option<Shell<S>>,
    l: Link<S>,
    e: Entry<S>,
    r: Link<S>,
) -> Node<S> {
    let (ls, rs) = (size(&l), size(&r));
    let s = ls + rs + 1;
    let b = cfg.block;
    if s > 4 * b {
        debug_assert!(
            cfg.balanced(ls, rs),
            "node: unbalanced children {ls} / {rs}"
        );
        return Node::regular(shell, l, e, r, false);
    }
    if s >= b && s <= 2 * b {
        return Node::flat(concat(&l, e, &r));
    }
    if s > 2 * b {
        let both_flat =
            l.as_ref().is_some_and(Node::is_flat) && r.as_ref().is_some_and(Node::is_flat);
        if both_flat {
            return Node::regular(shell, l, e, r, false);
        }
        let mut all = concat(&l, e, &r);
        let right = all.split_off(s / 2 + 1);
        let mid = all.pop().expect("nonempty");
        return Node::regular(
            shell,
            Some(Node::flat(all)),
            mid,
            Some(Node::flat(right)),
            false,
        );
    }
    if cfg.balanced(ls, rs) {
        Node::regular(shell, l, e, r, false)
    } else {
        from_sorted(cfg, &concat(&l, e, &r)).expect("nonempty")
    }
}

fn make<S: Schema>(
    cfg: &Config,
    mode: Mode,
    shell: Option<Shell<S>>,
    l: Link<S>,
    e: Entry<S>,
    r: Link<S>,
) -> Node<S> {
    match mode {
        Mode::Normal => node(cfg, shell, l, e, r),
        Mode::Expanded => Node::regular(shell, l, e, r, true),
    }
}

/// Folds a tree of `B..=2B` entries into one flat node; any other tree is
/// returned unchanged.
pub fn fold<S: Schema>(cfg: &Config, t: Link<S>) -> Link<S> {
    match t {
        Some(n) if !n.is_flat() && n.size() >= cfg.block && n.size() <= 2 * cfg.block => {
            Some(Node::flat(to_vec(&Some(n))))
        }
        other => other,
    }
}

/// Expands a flat node into a perfectly balanced tree of marked regular
/// nodes. Panics on a regular node.
pub fn unfold<S: Schema>(cfg: &Config, t: Node<S>) -> Node<S> {
    let View::Flat(f) = t.view() else {
        panic!("unfold on a regular node")
    };
    stats::count_unfold();
    from_sorted_expanded(cfg, &f.entries()).expect("blocks are nonempty")
}

/// Splits a node into `(left, entry, right)`. A flat node is expanded
/// around its median; both halves are returned as valid trees.
pub fn expose<S: Schema>(cfg: &Config, t: Node<S>) -> RegularParts<S> {
    if let View::Flat(f) = t.view() {
        stats::count_unfold();
        let entries = f.entries();
        let mid = entries.len() / 2;
        let (left, right) = (
            from_sorted(cfg, &entries[..mid]),
            from_sorted(cfg, &entries[mid + 1..]),
        );
        let (key, val) = entries[mid].clone();
        return RegularParts {
            left,
            key,
            val,
            right,
            shell: None,
        };
    }
    t.into_regular_parts(cfg.reuse)
}

fn expose_mode<S: Schema>(cfg: &Config, mode: Mode, t: Node<S>) -> RegularParts<S> {
    match mode {
        Mode::Normal => expose(cfg, t),
        Mode::Expanded if t.is_flat() => unfold(cfg, t).into_regular_parts(true),
        Mode::Expanded => t.into_regular_parts(cfg.reuse),
    }
}

fn last_key<S: Schema>(t: &Node<S>) -> S::Key {
    match t.view() {
        View::Flat(f) => f.entries_uncounted().last().expect("nonempty").0.clone(),
        View::Regular(r) => r.right.as_ref().map_or_else(|| r.key.clone(), last_key),
    }
}

fn first_key<S: Schema>(t: &Node<S>) -> S::Key {
    match t.view() {
        View::Flat(f) => f.entries_uncounted()[0].0.clone(),
        View::Regular(r) => r.left.as_ref().map_or_else(|| r.key.clone(), first_key),
    }
}

fn debug_check_order<S: Schema>(l: &Link<S>, k: &S::Key, r: &Link<S>) {
    if let Some(l) = l {
        assert!(
            S::in_order(&last_key(l), k),
            "join: left tree not before the middle key"
        );
    }
    if let Some(r) = r {
        assert!(
            S::in_order(k, &first_key(r)),
            "join: right tree not after the middle key"
        );
    }
}

/// Concatenates `l`, `e`, `r` into a balanced tree. All keys of `l` must
/// precede `e`, which must precede all keys of `r`.
pub fn join<S: Schema>(cfg: &Config, l: Link<S>, e: Entry<S>, r: Link<S>) -> Node<S> {
    join_with(cfg, Mode::Normal, None, l, e, r)
}

/// [`join`] that never folds: new nodes are marked regular nodes.
pub fn join_expanded<S: Schema>(cfg: &Config, l: Link<S>, e: Entry<S>, r: Link<S>) -> Node<S> {
    join_with(cfg, Mode::Expanded, None, l, e, r)
}

pub(crate) fn join_with<S: Schema>(
    cfg: &Config,
    mode: Mode,
    shell: Option<Shell<S>>,
    l: Link<S>,
    e: Entry<S>,
    r: Link<S>,
) -> Node<S> {
    if cfg!(debug_assertions) {
        debug_check_order(&l, &e.0, &r);
    }
    let (ls, rs) = (size(&l), size(&r));
    if (mode == Mode::Normal && ls + rs < 4 * cfg.block) || cfg.balanced(ls, rs) {
        return make(cfg, mode, shell, l, e, r);
    }
    drop(shell);
    if ls > rs {
        join_right(cfg, mode, l.expect("heavier side is nonempty"), e, r)
    } else {
        join_left(cfg, mode, l, e, r.expect("heavier side is nonempty"))
    }
}

fn small_or_balanced(cfg: &Config, mode: Mode, ls: usize, rs: usize) -> bool {
    (mode == Mode::Normal && ls + rs < 4 * cfg.block) || cfg.balanced(ls, rs)
}

/// Attaches `r` along the right spine of the heavier `l`.
fn join_right<S: Schema>(cfg: &Config, mode: Mode, l: Node<S>, e: Entry<S>, r: Link<S>) -> Node<S> {
    let rs = size(&r);
    if small_or_balanced(cfg, mode, l.size(), rs) {
        return make(cfg, mode, None, Some(l), e, r);
    }
    let (ll, lk, lc, shell) = expose_mode(cfg, mode, l).entry();
    let t = match lc {
        Some(c) => join_right(cfg, mode, c, e, r),
        None => make(cfg, mode, None, None, e, r),
    };
    let lls = size(&ll);
    if cfg.balanced(lls, t.size()) {
        return make(cfg, mode, shell, ll, lk, Some(t));
    }
    let (l1, k1, r1, shell1) = expose_mode(cfg, mode, t).entry();
    let l1s = size(&l1);
    if cfg.balanced(lls, l1s) && cfg.balanced(lls + l1s + 1, size(&r1)) {
        // single left rotation
        let inner = make(cfg, mode, shell, ll, lk, l1);
        make(cfg, mode, shell1, Some(inner), k1, r1)
    } else {
        // double rotation: right at the child, then left
        let (l2, k2, r2, shell2) =
            expose_mode(cfg, mode, l1.expect("double rotation needs an inner child")).entry();
        let a = make(cfg, mode, shell, ll, lk, l2);
        let b = make(cfg, mode, shell2, r2, k1, r1);
        make(cfg, mode, shell1, Some(a), k2, Some(b))
    }
}

/// Mirror image of [`join_right`].
fn join_left<S: Schema>(cfg: &Config, mode: Mode, l: Link<S>, e: Entry<S>, r: Node<S>) -> Node<S> {
    let ls = size(&l);
    if small_or_balanced(cfg, mode, ls, r.size()) {
        return make(cfg, mode, None, l, e, Some(r));
    }
    let (rc, rk, rr, shell) = expose_mode(cfg, mode, r).entry();
    let t = match rc {
        Some(c) => join_left(cfg, mode, l, e, c),
        None => make(cfg, mode, None, l, e, None),
    };
    let rrs = size(&rr);
    if cfg.balanced(t.size(), rrs) {
        return make(cfg, mode, shell, Some(t), rk, rr);
    }
    let (l1, k1, r1, shell1) = expose_mode(cfg, mode, t).entry();
    let r1s = size(&r1);
    if cfg.balanced(r1s, rrs) && cfg.balanced(size(&l1), r1s + rrs + 1) {
        let inner = make(cfg, mode, shell, r1, rk, rr);
        make(cfg, mode, shell1, l1, k1, Some(inner))
    } else {
        let (l2, k2, r2, shell2) =
            expose_mode(cfg, mode, r1.expect("double rotation needs an inner child")).entry();
        let a = make(cfg, mode, shell1, l1, k1, l2);
        let b = make(cfg, mode, shell, r2, rk, rr);
        make(cfg, mode, shell2, Some(a), k2, Some(b))
    }
}

/// Concatenation without a middle entry.
pub fn join2<S: Schema>(cfg: &Config, l: Link<S>, r: Link<S>) -> Link<S> {
    let Some(ln) = l else { return r };
    if r.is_none() {
        return Some(ln);
    }
    if ln.size() + size(&r) <= 4 * cfg.block {
        let mut all = to_vec(&Some(ln));
        collect(&r, &mut all);
        return from_sorted(cfg, &all);
    }
    let (rest, last) = split_last(cfg, ln);
    Some(join(cfg, rest, last, r))
}

/// Removes the last entry of `t`.
pub fn split_last<S: Schema>(cfg: &Config, t: Node<S>) -> (Link<S>, Entry<S>) {
    if let View::Flat(f) = t.view() {
        stats::count_unfold();
        let entries = f.entries();
        let (last, rest) = entries.split_last().expect("blocks are nonempty");
        return (from_sorted(cfg, rest), last.clone());
    }
    let (l, e, r, shell) = t.into_regular_parts(cfg.reuse).entry();
    match r {
        None => (l, e),
        Some(r) => {
            let (rest, last) = split_last(cfg, r);
            (Some(join_with(cfg, Mode::Normal, shell, l, e, rest)), last)
        }
    }
}

/// Removes the first entry of `t`.
pub fn split_first<S: Schema>(cfg: &Config, t: Node<S>) -> (Entry<S>, Link<S>) {
    if let View::Flat(f) = t.view() {
        stats::count_unfold();
        let entries = f.entries();
        let (first, rest) = entries.split_first().expect("blocks are nonempty");
        return (first.clone(), from_sorted(cfg, rest));
    }
    let (l, e, r, shell) = t.into_regular_parts(cfg.reuse).entry();
    match l {
        None => (e, r),
        Some(l) => {
            let (first, rest) = split_first(cfg, l);
            (first, Some(join_with(cfg, Mode::Normal, shell, rest, e, r)))
        }
    }
}

/// Result of splitting a tree around a key.
pub struct Split<S: Schema> {
    pub left: Link<S>,
    pub found: Option<Entry<S>>,
    pub right: Link<S>,
}

/// Splits `t` into the entries with keys below `k`, the entry with key `k`
/// if present, and the entries above `k`.
pub fn split<S: Schema>(cfg: &Config, t: Link<S>, k: &S::Key) -> Split<S>
where
    S::Key: Ord,
{
    split_in(cfg, Mode::Normal, t, k)
}

/// [`split`] in expanded mode: blocks on the search path are unfolded and
/// nothing is folded on the way up.
pub fn split_expanded<S: Schema>(cfg: &Config, t: Link<S>, k: &S::Key) -> Split<S>
where
    S::Key: Ord,
{
    split_in(cfg, Mode::Expanded, t, k)
}

fn split_in<S: Schema>(cfg: &Config, mode: Mode, t: Link<S>, k: &S::Key) -> Split<S>
where
    S::Key: Ord,
{
    let Some(n) = t else {
        return Split {
            left: None,
            found: None,
            right: None,
        };
    };
    let n = match (n.view(), mode) {
        (View::Flat(f), Mode::Normal) => return split_block(cfg, &n, &f.entries(), k),
        (View::Flat(_), Mode::Expanded) => unfold(cfg, n),
        (View::Regular(_), _) => n,
    };
    let (l, e, r, shell) = n.into_regular_parts(cfg.reuse).entry();
    match k.cmp(&e.0) {
        Ordering::Equal => Split {
            left: l,
            found: Some(e),
            right: r,
        },
        Ordering::Less => {
            let s = split_in(cfg, mode, l, k);
            let right = join_with(cfg, mode, shell, s.right, e, r);
            Split {
                left: s.left,
                found: s.found,
                right: Some(right),
            }
        }
        Ordering::Greater => {
            let s = split_in(cfg, mode, r, k);
            let left = join_with(cfg, mode, shell, l, e, s.left);
            Split {
                left: Some(left),
                found: s.found,
                right: s.right,
            }
        }
    }
}

fn split_block<S: Schema>(cfg: &Config, n: &Node<S>, entries: &[Entry<S>], k: &S::Key) -> Split<S>
where
    S::Key: Ord,
{
    let lo = entries.partition_point(|e| e.0 < *k);
    let found = entries.get(lo).filter(|e| e.0 == *k).cloned();
    let hi = lo + found.is_some() as usize;
    if lo == 0 && found.is_none() {
        return Split {
            left: None,
            found: None,
            right: Some(n.clone()),
        };
    }
    if lo == entries.len() {
        return Split {
            left: Some(n.clone()),
            found: None,
            right: None,
        };
    }
    stats::count_unfold();
    Split {
        left: from_sorted(cfg, &entries[..lo]),
        found,
        right: from_sorted(cfg, &entries[hi..]),
    }
}

/// Splits off the first `i` entries (positional).
pub fn split_at<S: Schema>(cfg: &Config, t: Link<S>, i: usize) -> (Link<S>, Link<S>) {
    let Some(n) = t else { return (None, None) };
    if i == 0 {
        return (None, Some(n));
    }
    if i >= n.size() {
        return (Some(n), None);
    }
    if let View::Flat(f) = n.view() {
        stats::count_unfold();
        let entries = f.entries();
        return (
            from_sorted(cfg, &entries[..i]),
            from_sorted(cfg, &entries[i..]),
        );
    }
    let (l, e, r, shell) = n.into_regular_parts(cfg.reuse).entry();
    let ls = size(&l);
    if i <= ls {
        let (a, b) = split_at(cfg, l, i);
        (a, Some(join_with(cfg, Mode::Normal, shell, b, e, r)))
    } else {
        let (a, b) = split_at(cfg, r, i - ls - 1);
        (Some(join_with(cfg, Mode::Normal, shell, l, e, a)), b)
    }
}

/// Repairs a tree produced in expanded mode: every marked subtree of
/// `B..=2B` entries becomes a block; unmarked subtrees are kept as they are.
pub fn refold<S: Schema>(cfg: &Config, t: Link<S>) -> Link<S> {
    let n = match t {
        Some(n) if n.is_marked() => n,
        other => return other,
    };
    let s = n.size();
    if s >= cfg.block && s <= 2 * cfg.block {
        return Some(Node::flat(to_vec(&Some(n))));
    }
    let (l, e, r, shell) = n.into_regular_parts(cfg.reuse).entry();
    let (l, r) = fork(s > cfg.grain, || refold(cfg, l), || refold(cfg, r));
    Some(join_with(cfg, Mode::Normal, shell, l, e, r))
}
