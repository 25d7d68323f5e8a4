//! Process-wide instrumentation counters.
//!
//! Every node allocation and reclamation, and every fold, unfold and block
//! decode performed by the tree primitives bumps one of these tallies. They
//! are global atomics, so measurements are only meaningful when no other
//! thread is operating on trees at the same time; tests that read them
//! serialize themselves.

use std::sync::atomic::{AtomicU64, Ordering};

static ALLOCATIONS: AtomicU64 = AtomicU64::new(0);
static RECLAIMS: AtomicU64 = AtomicU64::new(0);
static UNFOLDS: AtomicU64 = AtomicU64::new(0);
static FOLDS: AtomicU64 = AtomicU64::new(0);
static DECODES: AtomicU64 = AtomicU64::new(0);

/// A point-in-time copy of the counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub allocations: u64,
    pub reclaims: u64,
    pub unfolds: u64,
    pub folds: u64,
    pub decodes: u64,
}

impl Counters {
    pub fn snapshot() -> Self {
        Counters {
            allocations: ALLOCATIONS.load(Ordering::Relaxed),
            reclaims: RECLAIMS.load(Ordering::Relaxed),
            unfolds: UNFOLDS.load(Ordering::Relaxed),
            folds: FOLDS.load(Ordering::Relaxed),
            decodes: DECODES.load(Ordering::Relaxed),
        }
    }

    /// Nodes allocated and not yet reclaimed.
    pub fn live(&self) -> i64 {
        self.allocations as i64 - self.reclaims as i64
    }

    /// Counter growth since `earlier`.
    pub fn since(&self, earlier: &Counters) -> Counters {
        Counters {
            allocations: self.allocations - earlier.allocations,
            reclaims: self.reclaims - earlier.reclaims,
            unfolds: self.unfolds - earlier.unfolds,
            folds: self.folds - earlier.folds,
            decodes: self.decodes - earlier.decodes,
        }
    }
}

#[inline]
pub(crate) fn count_allocation() {
    ALLOCATIONS.fetch_add(1, Ordering::Relaxed);
}

#[inline]
pub(crate) fn count_reclaim() {
    RECLAIMS.fetch_add(1, Ordering::Relaxed);
}

#[inline]
pub(crate) fn count_unfold() {
    UNFOLDS.fetch_add(1, Ordering::Relaxed);
}

#[inline]
pub(crate) fn count_fold() {
    FOLDS.fetch_add(1, Ordering::Relaxed);
}

#[inline]
pub(crate) fn count_decode() {
    DECODES.fetch_add(1, Ordering::Relaxed);
}
