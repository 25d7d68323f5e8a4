//! Owner-counted tree nodes.
//!
//! A node is one heap allocation that starts with an 8-byte [`Header`]: a
//! 32-bit atomic owner count and a 32-bit word packing the subtree size with
//! two flag bits (flat, marked). The flat bit selects between the two
//! layouts:
//!
//! * [`Regular`]: one entry, two child links, the subtree aggregate.
//! * [`Flat`]: a leaf block of entries stored through the tree's codec,
//!   with the block aggregate.
//!
//! [`Node`] is the owning handle. Cloning it retains the node, dropping it
//! releases; the last release reclaims the allocation and releases the
//! children. A uniquely owned regular node can be taken apart without
//! copying, and its allocation handed back as a [`Shell`] for the next node
//! built on the same path.

use std::borrow::Cow;
use std::fmt;
use std::marker::PhantomData;
use std::mem::{self, ManuallyDrop, MaybeUninit};
use std::ptr::{self, NonNull};
use std::sync::atomic::{fence, AtomicU32, Ordering};

use crate::augment::Augmentation;
use crate::encoding::Codec;
use crate::schema::{AugOf, BlockOf, Entry, Schema};
use crate::stats;

const FLAT: u32 = 1 << 31;
const MARKED: u32 = 1 << 30;
const SIZE_MASK: u32 = MARKED - 1;

/// Largest number of entries a single tree can hold.
pub const MAX_TREE_SIZE: usize = SIZE_MASK as usize;

const MAX_OWNERS: u32 = i32::MAX as u32;

#[repr(C)]
struct Header {
    owners: AtomicU32,
    meta: u32,
}

#[repr(C)]
pub struct Regular<S: Schema> {
    header: Header,
    pub left: Link<S>,
    pub right: Link<S>,
    pub aug: AugOf<S>,
    pub key: S::Key,
    pub val: S::Val,
}

#[repr(C)]
pub struct Flat<S: Schema> {
    header: Header,
    pub aug: AugOf<S>,
    pub block: BlockOf<S>,
}

/// Owning handle to a regular or flat node.
pub struct Node<S: Schema> {
    ptr: NonNull<Header>,
    _schema: PhantomData<S>,
}

/// A possibly empty tree.
pub type Link<S> = Option<Node<S>>;

// SAFETY: every type reachable from a node is Send + Sync by the bounds on
// `Schema`, and the owner count is only touched atomically.
unsafe impl<S: Schema> Send for Node<S> {}
unsafe impl<S: Schema> Sync for Node<S> {}

/// Borrowed view of a node's layout.
pub enum View<'a, S: Schema> {
    Regular(&'a Regular<S>),
    Flat(&'a Flat<S>),
}

/// Allocation of a reclaimed regular node, ready to be rewritten.
pub struct Shell<S: Schema>(ManuallyDrop<Box<MaybeUninit<Regular<S>>>>);

impl<S: Schema> Drop for Shell<S> {
    fn drop(&mut self) {
        stats::count_reclaim();
        // SAFETY: the contents were moved out when the shell was made; only
        // the allocation is released.
        unsafe { ManuallyDrop::drop(&mut self.0) }
    }
}

impl<S: Schema> Shell<S> {
    fn into_box(self) -> Box<MaybeUninit<Regular<S>>> {
        let mut this = ManuallyDrop::new(self);
        // SAFETY: `this` is never dropped, so the box is moved out exactly once.
        unsafe { ManuallyDrop::take(&mut this.0) }
    }
}

/// The fields of a regular node, moved or cloned out of it.
pub struct RegularParts<S: Schema> {
    pub left: Link<S>,
    pub key: S::Key,
    pub val: S::Val,
    pub right: Link<S>,
    pub shell: Option<Shell<S>>,
}

impl<S: Schema> RegularParts<S> {
    pub fn entry(self) -> (Link<S>, Entry<S>, Link<S>, Option<Shell<S>>) {
        (self.left, (self.key, self.val), self.right, self.shell)
    }
}

pub fn size<S: Schema>(t: &Link<S>) -> usize {
    t.as_ref().map_or(0, Node::size)
}

pub fn aug_of<S: Schema>(t: &Link<S>) -> AugOf<S> {
    t.as_ref()
        .map_or_else(S::Aug::identity, |n| n.aug().clone())
}

impl<S: Schema> Node<S> {
    fn header(&self) -> &Header {
        // SAFETY: the pointer is valid while any handle exists.
        unsafe { self.ptr.as_ref() }
    }

    fn meta(&self) -> u32 {
        self.header().meta
    }

    pub fn size(&self) -> usize {
        (self.meta() & SIZE_MASK) as usize
    }

    pub fn is_flat(&self) -> bool {
        self.meta() & FLAT != 0
    }

    /// Set on nodes built while a bulk operation runs in expanded mode.
    pub fn is_marked(&self) -> bool {
        self.meta() & MARKED != 0
    }

    pub fn owners(&self) -> usize {
        self.header().owners.load(Ordering::Acquire) as usize
    }

    /// True when this handle is the only owner.
    pub fn is_unique(&self) -> bool {
        self.header().owners.load(Ordering::Acquire) == 1
    }

    pub fn ptr_eq(a: &Node<S>, b: &Node<S>) -> bool {
        a.ptr == b.ptr
    }

    pub(crate) fn addr(&self) -> usize {
        self.ptr.as_ptr() as usize
    }

    pub fn view(&self) -> View<'_, S> {
        if self.is_flat() {
            // SAFETY: the flat bit is only set on `Flat` allocations.
            View::Flat(unsafe { &*(self.ptr.as_ptr() as *const Flat<S>) })
        } else {
            // SAFETY: as above, for `Regular`.
            View::Regular(unsafe { &*(self.ptr.as_ptr() as *const Regular<S>) })
        }
    }

    pub fn as_regular(&self) -> Option<&Regular<S>> {
        match self.view() {
            View::Regular(r) => Some(r),
            View::Flat(_) => None,
        }
    }

    pub fn as_flat(&self) -> Option<&Flat<S>> {
        match self.view() {
            View::Flat(f) => Some(f),
            View::Regular(_) => None,
        }
    }

    pub fn aug(&self) -> &AugOf<S> {
        match self.view() {
            View::Regular(r) => &r.aug,
            View::Flat(f) => &f.aug,
        }
    }

    /// Builds a regular node, reusing `shell` when given.
    pub fn regular(
        shell: Option<Shell<S>>,
        left: Link<S>,
        (key, val): Entry<S>,
        right: Link<S>,
        marked: bool,
    ) -> Node<S> {
        let size = size(&left) + size(&right) + 1;
        assert!(
            size <= MAX_TREE_SIZE,
            "tree exceeds {MAX_TREE_SIZE} entries"
        );
        let lifted = S::Aug::lift(&key, &val);
        let aug = match (&left, &right) {
            (None, None) => lifted,
            (Some(l), None) => S::Aug::combine(l.aug(), &lifted),
            (None, Some(r)) => S::Aug::combine(&lifted, r.aug()),
            (Some(l), Some(r)) => S::Aug::combine(l.aug(), &S::Aug::combine(&lifted, r.aug())),
        };
        let node = Regular {
            header: Header {
                owners: AtomicU32::new(1),
                meta: size as u32 | if marked { MARKED } else { 0 },
            },
            left,
            right,
            aug,
            key,
            val,
        };
        let raw = match shell {
            Some(shell) => {
                let mut slot = shell.into_box();
                slot.write(node);
                Box::into_raw(slot) as *mut Regular<S>
            }
            None => {
                stats::count_allocation();
                Box::into_raw(Box::new(node))
            }
        };
        Node {
            ptr: NonNull::new(raw as *mut Header).expect("non-null box"),
            _schema: PhantomData,
        }
    }

    /// Encodes `entries` (in order, nonempty) as one leaf block.
    pub fn flat(entries: Vec<Entry<S>>) -> Node<S> {
        let count = entries.len();
        assert!(count > 0, "empty block");
        assert!(
            count <= MAX_TREE_SIZE,
            "block exceeds {MAX_TREE_SIZE} entries"
        );
        let aug = fold_aug::<S>(&entries);
        let block = S::Codec::encode(entries);
        let node: Flat<S> = Flat {
            header: Header {
                owners: AtomicU32::new(1),
                meta: count as u32 | FLAT,
            },
            aug,
            block,
        };
        stats::count_allocation();
        stats::count_fold();
        let raw = Box::into_raw(Box::new(node));
        Node {
            ptr: NonNull::new(raw as *mut Header).expect("non-null box"),
            _schema: PhantomData,
        }
    }

    /// Takes a regular node apart. When `reuse` is set and this handle is
    /// the sole owner, the fields are moved out and the allocation is
    /// returned as a shell; otherwise they are cloned.
    ///
    /// Panics on a flat node.
    pub fn into_regular_parts(self, reuse: bool) -> RegularParts<S> {
        assert!(!self.is_flat(), "into_regular_parts on a flat node");
        if reuse && self.is_unique() {
            let raw = self.ptr.as_ptr() as *mut Regular<S>;
            mem::forget(self);
            // SAFETY: we are the only owner, so nobody else can observe the
            // node. Every initialized field is either moved out or dropped
            // in place exactly once, after which the memory is treated as
            // uninitialized.
            unsafe {
                let left = ptr::read(ptr::addr_of!((*raw).left));
                let right = ptr::read(ptr::addr_of!((*raw).right));
                let key = ptr::read(ptr::addr_of!((*raw).key));
                let val = ptr::read(ptr::addr_of!((*raw).val));
                ptr::drop_in_place(ptr::addr_of_mut!((*raw).aug));
                let shell = Shell(ManuallyDrop::new(Box::from_raw(
                    raw as *mut MaybeUninit<Regular<S>>,
                )));
                RegularParts {
                    left,
                    key,
                    val,
                    right,
                    shell: Some(shell),
                }
            }
        } else {
            let r = self.as_regular().expect("checked above");
            RegularParts {
                left: r.left.clone(),
                key: r.key.clone(),
                val: r.val.clone(),
                right: r.right.clone(),
                shell: None,
            }
        }
    }
}

impl<S: Schema> Flat<S> {
    pub fn count(&self) -> usize {
        (self.header.meta & SIZE_MASK) as usize
    }

    /// Decodes the block; bumps the decode counter.
    pub fn entries(&self) -> Cow<'_, [Entry<S>]> {
        stats::count_decode();
        S::Codec::decode(&self.block, self.count())
    }

    /// Decodes without touching the counters (validation and accounting).
    pub fn entries_uncounted(&self) -> Cow<'_, [Entry<S>]> {
        S::Codec::decode(&self.block, self.count())
    }

    pub fn payload_bytes(&self) -> usize {
        S::Codec::block_bytes(&self.block, self.count())
    }
}

impl<S: Schema> Regular<S> {
    pub fn entry(&self) -> Entry<S> {
        (self.key.clone(), self.val.clone())
    }

    pub fn size(&self) -> usize {
        (self.header.meta & SIZE_MASK) as usize
    }
}

pub(crate) fn fold_aug<S: Schema>(entries: &[Entry<S>]) -> AugOf<S> {
    let mut it = entries.iter();
    let Some((k, v)) = it.next() else {
        return S::Aug::identity();
    };
    let mut acc = S::Aug::lift(k, v);
    for (k, v) in it {
        acc = S::Aug::combine(&acc, &S::Aug::lift(k, v));
    }
    acc
}

/// Bytes of one regular node allocation.
pub fn regular_node_bytes<S: Schema>() -> usize {
    mem::size_of::<Regular<S>>()
}

/// Bytes of one flat node allocation, excluding the block payload.
pub fn flat_header_bytes<S: Schema>() -> usize {
    mem::size_of::<Flat<S>>()
}

impl<S: Schema> Clone for Node<S> {
    fn clone(&self) -> Self {
        let old = self.header().owners.fetch_add(1, Ordering::Relaxed);
        if old > MAX_OWNERS {
            std::process::abort();
        }
        Node {
            ptr: self.ptr,
            _schema: PhantomData,
        }
    }
}

impl<S: Schema> Drop for Node<S> {
    fn drop(&mut self) {
        if self.header().owners.fetch_sub(1, Ordering::Release) != 1 {
            return;
        }
        fence(Ordering::Acquire);
        stats::count_reclaim();
        // SAFETY: the count reached zero, so this was the last handle; the
        // layout is selected by the flat bit written at construction.
        unsafe {
            if self.is_flat() {
                drop(Box::from_raw(self.ptr.as_ptr() as *mut Flat<S>));
            } else {
                drop(Box::from_raw(self.ptr.as_ptr() as *mut Regular<S>));
            }
        }
    }
}

impl<S: Schema> fmt::Debug for Node<S>
where
    S::Key: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.view() {
            View::Regular(r) => f
                .debug_struct("Regular")
                .field("key", &r.key)
                .field("size", &self.size())
                .field("left", &r.left)
                .field("right", &r.right)
                .finish(),
            View::Flat(fl) => {
                let keys: Vec<_> = fl.entries_uncounted().iter().map(|e| e.0.clone()).collect();
                f.debug_struct("Flat").field("keys", &keys).finish()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::KeySum;
    use crate::encoding::Plain;
    use crate::schema::MapSchema;

    type P = MapSchema<u64, String, KeySum, Plain>;

    fn leaf(k: u64) -> Node<P> {
        Node::regular(None, None, (k, k.to_string()), None, false)
    }

    #[test]
    fn regular_sizes_and_aggregates() {
        let n = Node::regular(None, Some(leaf(1)), (2, "2".into()), Some(leaf(3)), false);
        assert_eq!(n.size(), 3);
        assert_eq!(*n.aug(), 6);
        assert!(!n.is_flat() && !n.is_marked());
        let m = Node::<P>::regular(None, None, (9, "9".into()), None, true);
        assert!(m.is_marked());
    }

    #[test]
    fn flat_roundtrip() {
        let e: Vec<(u64, String)> = (1..=5).map(|k| (k, format!("v{k}"))).collect();
        let f = Node::<P>::flat(e.clone());
        assert!(f.is_flat());
        assert_eq!(f.size(), 5);
        assert_eq!(*f.aug(), 15);
        assert_eq!(f.as_flat().unwrap().entries().into_owned(), e);
    }

    #[test]
    fn parts_move_when_unique_and_copy_when_shared() {
        let n = Node::regular(None, Some(leaf(1)), (2, "2".into()), None, false);
        let parts = n.into_regular_parts(true);
        assert!(parts.shell.is_some());
        let left = parts.left.clone().unwrap();
        // the moved child is owned by `parts` and by the clone above
        assert_eq!(left.owners(), 2);

        let n = Node::regular(None, Some(leaf(1)), (2, "2".into()), None, false);
        let keep = n.clone();
        let parts = n.into_regular_parts(true);
        assert!(parts.shell.is_none());
        assert_eq!(parts.key, 2);
        assert_eq!(keep.size(), 2);
        assert!(keep.as_regular().unwrap().left.is_some());

        let n = Node::<P>::regular(None, None, (4, "4".into()), None, false);
        assert!(n.into_regular_parts(false).shell.is_none());
    }

    #[test]
    fn shells_are_rewritten_in_place() {
        let n = Node::regular(None, None, (4, "4".into()), None, false);
        let addr = n.addr();
        let (_, _, _, shell) = n.into_regular_parts(true).entry();
        let m = Node::<P>::regular(shell, None, (5, "5".into()), None, false);
        assert_eq!(m.addr(), addr);
        assert_eq!(m.as_regular().unwrap().val, "5");
    }
}
