//! Persistent positional sequences.
//!
//! Same node algebra as the maps, with a unit key: positions are implicit in
//! subtree sizes and there is no key order to maintain. Blocks always use
//! the identity codec.

use std::fmt;
use std::marker::PhantomData;

use thiserror::Error;

use crate::augment::NoAug;
use crate::bulk;
use crate::check::{self, Violation};
use crate::config::Config;
use crate::encoding::Plain;
use crate::node::{size, Link, Node, View};
use crate::schema::Schema;
use crate::space::{self, Space};
use crate::tree::{self, fork, join, join2, split_at};

pub struct SeqSchema<T>(PhantomData<fn() -> T>);

impl<T: Clone + Send + Sync + 'static> Schema for SeqSchema<T> {
    type Key = ();
    type Val = T;
    type Aug = NoAug;
    type Codec = Plain;

    fn in_order(_: &(), _: &()) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: usize, len: usize },
    #[error("range {start}..{end} invalid for length {len}")]
    BadRange {
        start: usize,
        end: usize,
        len: usize,
    },
}

/// A persistent sequence of `T`.
pub struct Seq<T: Clone + Send + Sync + 'static> {
    root: Link<SeqSchema<T>>,
    cfg: Config,
}

impl<T: Clone + Send + Sync + 'static> Clone for Seq<T> {
    fn clone(&self) -> Self {
        Seq {
            root: self.root.clone(),
            cfg: self.cfg,
        }
    }
}

fn reverse_link<T: Clone + Send + Sync + 'static>(
    cfg: &Config,
    t: &Link<SeqSchema<T>>,
) -> Link<SeqSchema<T>> {
    let n = t.as_ref()?;
    match n.view() {
        View::Flat(f) => {
            let mut items = f.entries().into_owned();
            items.reverse();
            Some(Node::flat(items))
        }
        View::Regular(r) => {
            let (l, rr) = fork(
                n.size() > cfg.grain,
                || reverse_link(cfg, &r.right),
                || reverse_link(cfg, &r.left),
            );
            Some(Node::regular(None, l, r.entry(), rr, false))
        }
    }
}

fn find_first_link<T, P>(t: &Link<SeqSchema<T>>, pred: &P) -> Option<(usize, T)>
where
    T: Clone + Send + Sync + 'static,
    P: Fn(&T) -> bool,
{
    let n = t.as_ref()?;
    match n.view() {
        View::Flat(f) => {
            let entries = f.entries();
            entries
                .iter()
                .position(|e| pred(&e.1))
                .map(|i| (i, entries[i].1.clone()))
        }
        View::Regular(r) => {
            if let Some(hit) = find_first_link(&r.left, pred) {
                return Some(hit);
            }
            let ls = size(&r.left);
            if pred(&r.val) {
                return Some((ls, r.val.clone()));
            }
            find_first_link(&r.right, pred).map(|(i, v)| (ls + 1 + i, v))
        }
    }
}

impl<T: Clone + Send + Sync + 'static> Seq<T> {
    /// An empty sequence. Panics if `cfg` is invalid.
    pub fn new(cfg: Config) -> Self {
        let cfg = cfg
            .validate()
            .unwrap_or_else(|e| panic!("invalid config: {e}"));
        Seq { root: None, cfg }
    }

    /// Sequence holding `items` in order.
    pub fn from_vec(cfg: Config, items: Vec<T>) -> Self {
        let mut s = Seq::new(cfg);
        let entries: Vec<((), T)> = items.into_iter().map(|x| ((), x)).collect();
        s.root = tree::from_sorted(&s.cfg, &entries);
        s
    }

    fn wrap(&self, root: Link<SeqSchema<T>>) -> Self {
        Seq {
            root,
            cfg: self.cfg,
        }
    }

    pub fn root(&self) -> &Link<SeqSchema<T>> {
        &self.root
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        size(&self.root)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Element at position `i`; decodes at most one block.
    pub fn nth(&self, i: usize) -> Result<T, SeqError> {
        crate::ordmap::select(&self.root, i)
            .map(|e| e.1)
            .ok_or(SeqError::OutOfBounds {
                index: i,
                len: self.len(),
            })
    }

    /// The first `i` elements.
    pub fn take(&self, i: usize) -> Result<Self, SeqError> {
        if i > self.len() {
            return Err(SeqError::OutOfBounds {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.wrap(split_at(&self.cfg, self.root.clone(), i).0))
    }

    /// All but the first `i` elements.
    pub fn drop_front(&self, i: usize) -> Result<Self, SeqError> {
        if i > self.len() {
            return Err(SeqError::OutOfBounds {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.wrap(split_at(&self.cfg, self.root.clone(), i).1))
    }

    /// Elements at positions `start..end`.
    pub fn subseq(&self, start: usize, end: usize) -> Result<Self, SeqError> {
        if start > end || end > self.len() {
            return Err(SeqError::BadRange {
                start,
                end,
                len: self.len(),
            });
        }
        let (head, _) = split_at(&self.cfg, self.root.clone(), end);
        Ok(self.wrap(split_at(&self.cfg, head, start).1))
    }

    /// Splits into the first `i` elements and the rest.
    pub fn split_at(&self, i: usize) -> Result<(Self, Self), SeqError> {
        if i > self.len() {
            return Err(SeqError::OutOfBounds {
                index: i,
                len: self.len(),
            });
        }
        let (a, b) = split_at(&self.cfg, self.root.clone(), i);
        Ok((self.wrap(a), self.wrap(b)))
    }

    pub fn append(&self, other: &Self) -> Self {
        self.wrap(join2(&self.cfg, self.root.clone(), other.root.clone()))
    }

    /// `self`, then `x`, then `other`.
    pub fn concat_with(&self, x: T, other: &Self) -> Self {
        self.wrap(Some(join(
            &self.cfg,
            self.root.clone(),
            ((), x),
            other.root.clone(),
        )))
    }

    pub fn push_back(&self, x: T) -> Self {
        self.wrap(Some(join(&self.cfg, self.root.clone(), ((), x), None)))
    }

    pub fn push_front(&self, x: T) -> Self {
        self.wrap(Some(join(&self.cfg, None, ((), x), self.root.clone())))
    }

    pub fn reverse(&self) -> Self {
        self.wrap(reverse_link(&self.cfg, &self.root))
    }

    pub fn map<U: Clone + Send + Sync + 'static>(&self, f: impl Fn(&T) -> U + Sync) -> Seq<U> {
        Seq {
            root: bulk::map_values(&self.cfg, &self.root, &|_: &(), x: &T| f(x)),
            cfg: self.cfg,
        }
    }

    pub fn filter(&self, pred: impl Fn(&T) -> bool + Sync) -> Self {
        self.wrap(bulk::filter(
            &self.cfg,
            self.root.clone(),
            &|_: &(), x: &T| pred(x),
        ))
    }

    /// Folds the elements left to right with the associative `f`.
    pub fn reduce(&self, f: impl Fn(T, T) -> T + Sync, identity: T) -> T {
        bulk::map_reduce(
            &self.cfg,
            &self.root,
            &|_: &(), x: &T| x.clone(),
            &f,
            &identity,
        )
    }

    /// Leftmost element satisfying `pred`, with its position. Stops at the
    /// first hit.
    pub fn find_first(&self, pred: impl Fn(&T) -> bool) -> Option<(usize, T)> {
        find_first_link(&self.root, &pred)
    }

    pub fn to_vec(&self) -> Vec<T> {
        tree::to_vec(&self.root).into_iter().map(|e| e.1).collect()
    }

    pub fn check(&self) -> Result<(), Violation> {
        check::check(&self.cfg, &self.root)
    }

    pub fn space(&self) -> Space {
        space::space(&self.root)
    }
}

impl<T: Clone + Send + Sync + PartialEq + 'static> PartialEq for Seq<T> {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.to_vec() == other.to_vec()
    }
}

impl<T: Clone + Send + Sync + fmt::Debug + 'static> fmt::Debug for Seq<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_vec()).finish()
    }
}
