//! Memory accounting.
//!
//! Bytes are split into payload (the entries themselves: the entry slot of
//! a regular node and the encoded block of a flat node) and metadata
//! (headers, child pointers, aggregates, block handles). Nodes reachable
//! through several paths are counted once.

use std::collections::HashSet;
use std::mem;

use crate::node::{flat_header_bytes, regular_node_bytes, Link, View};
use crate::schema::{Entry, Schema};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Space {
    pub total: usize,
    pub payload: usize,
    pub regular_nodes: usize,
    pub flat_nodes: usize,
}

impl Space {
    pub fn metadata(&self) -> usize {
        self.total - self.payload
    }

    pub fn metadata_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.metadata() as f64 / self.total as f64
        }
    }

    pub fn add(&mut self, other: &Space) {
        self.total += other.total;
        self.payload += other.payload;
        self.regular_nodes += other.regular_nodes;
        self.flat_nodes += other.flat_nodes;
    }
}

/// Bytes held by the distinct nodes of `t`.
pub fn space<S: Schema>(t: &Link<S>) -> Space {
    let mut seen = HashSet::new();
    let mut out = Space::default();
    space_into(t, &mut seen, &mut out);
    out
}

/// Accumulates into `out`, skipping nodes already in `seen`. Use one `seen`
/// set across several trees to measure their shared footprint.
pub fn space_into<S: Schema>(t: &Link<S>, seen: &mut HashSet<usize>, out: &mut Space) {
    let Some(n) = t else { return };
    if !seen.insert(n.addr()) {
        return;
    }
    match n.view() {
        View::Flat(f) => {
            let payload = f.payload_bytes();
            out.flat_nodes += 1;
            out.total += flat_header_bytes::<S>() + payload;
            out.payload += payload;
        }
        View::Regular(r) => {
            out.regular_nodes += 1;
            out.total += regular_node_bytes::<S>();
            out.payload += mem::size_of::<Entry<S>>();
            space_into(&r.left, seen, out);
            space_into(&r.right, seen, out);
        }
    }
}
