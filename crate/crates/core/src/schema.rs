//! Type-level description of a tree: entry types, augmentation and codec.

use std::marker::PhantomData;

use crate::augment::Augmentation;
use crate::encoding::Codec;

/// Bundles the types stored in one kind of tree.
///
/// Every node of a tree carries one `(Key, Val)` entry (regular nodes) or a
/// block of them (flat nodes), plus an augmented value of type
/// `<Aug as Augmentation>::Value`.
pub trait Schema: Send + Sync + 'static {
    type Key: Clone + Send + Sync + 'static;
    type Val: Clone + Send + Sync + 'static;
    type Aug: Augmentation<Self::Key, Self::Val>;
    type Codec: Codec<Self::Key, Self::Val>;

    /// True when `a` may precede `b` in an in-order traversal. Ordered maps
    /// require strictly increasing keys; positional sequences accept any
    /// order.
    fn in_order(a: &Self::Key, b: &Self::Key) -> bool;
}

pub type Entry<S> = (<S as Schema>::Key, <S as Schema>::Val);
pub type AugOf<S> =
    <<S as Schema>::Aug as Augmentation<<S as Schema>::Key, <S as Schema>::Val>>::Value;
pub type BlockOf<S> =
    <<S as Schema>::Codec as Codec<<S as Schema>::Key, <S as Schema>::Val>>::Block;

/// Schema of an ordered map with strictly increasing keys.
#[allow(clippy::type_complexity)]
pub struct MapSchema<K, V, A, C>(PhantomData<fn() -> (K, V, A, C)>);

impl<K, V, A, C> Schema for MapSchema<K, V, A, C>
where
    K: Ord + Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
    A: Augmentation<K, V>,
    C: Codec<K, V>,
{
    type Key = K;
    type Val = V;
    type Aug = A;
    type Codec = C;

    fn in_order(a: &K, b: &K) -> bool {
        a < b
    }
}
