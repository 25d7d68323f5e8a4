//! Purely functional collections on PaC-trees: weight-balanced binary
//! trees whose leaves are compressed blocks of `B..=2B` entries.
//!
//! * [`OrdMap`] / [`OrdSet`]: ordered maps and sets with join-based bulk
//!   operations and user-defined augmentation.
//! * [`Seq`]: positional sequences.
//! * [`Graph`]: a vertex tree of difference-encoded edge trees.
//!
//! All collections are persistent: operations return new versions that
//! share unchanged nodes with their inputs.

pub mod augment;
pub mod bulk;
pub mod check;
pub mod config;
pub mod encoding;
pub mod graph;
pub mod node;
pub mod ordmap;
pub mod schema;
pub mod sequence;
pub mod space;
pub mod stats;
pub mod tree;

pub use augment::Augmentation;
pub use config::Config;
pub use encoding::{Diff, Plain};
pub use graph::Graph;
pub use ordmap::{OrdMap, OrdSet};
pub use sequence::Seq;
pub use stats::Counters;
