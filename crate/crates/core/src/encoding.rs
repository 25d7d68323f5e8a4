//! Block codecs.
//!
//! A codec decides how the entries of a leaf block are stored. Two are
//! shipped: [`Plain`] keeps the entries as a typed array, [`Diff`] stores
//! sorted integer keys as a raw first key followed by base-128 varint gaps.
//!
//! `Diff` block wire format (little-endian throughout):
//!
//! ```text
//! [first key: K::WIDTH bytes][varint delta] x (count - 1)[value: V::WIDTH bytes] x count
//! ```
//!
//! Decoding a `Diff` block is strictly sequential: every key depends on the
//! one before it.

use std::borrow::Cow;
use std::mem;

use thiserror::Error;

use crate::stats;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("keys must be strictly increasing (violation at entry {index})")]
    Unsorted { index: usize },
    #[error("block truncated: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("malformed varint at offset {offset}")]
    MalformedVarint { offset: usize },
    #[error("decoded key out of range for the key type at entry {index}")]
    KeyOverflow { index: usize },
    #[error("zero delta at entry {index}")]
    ZeroDelta { index: usize },
    #[error("{extra} trailing bytes after {count} entries")]
    TrailingBytes { count: usize, extra: usize },
}

/// Values with a fixed-width little-endian byte representation.
pub trait FixedWidth: Sized {
    const WIDTH: usize;
    fn write_le(&self, out: &mut Vec<u8>);
    /// `bytes` is exactly `WIDTH` long.
    fn read_le(bytes: &[u8]) -> Self;
}

impl FixedWidth for () {
    const WIDTH: usize = 0;
    fn write_le(&self, _out: &mut Vec<u8>) {}
    fn read_le(_bytes: &[u8]) -> Self {}
}

macro_rules! fixed_width_num {
    ($($t:ty),*) => {$(
        impl FixedWidth for $t {
            const WIDTH: usize = mem::size_of::<$t>();
            fn write_le(&self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes.try_into().expect("fixed-width slice"))
            }
        }
    )*};
}

fixed_width_num!(u8, u16, u32, u64, i8, i16, i32, i64, f32, f64);

impl FixedWidth for usize {
    const WIDTH: usize = 8;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(*self as u64).to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        u64::from_le_bytes(bytes.try_into().expect("fixed-width slice")) as usize
    }
}

/// Nonnegative integer keys usable with difference encoding.
pub trait DeltaKey: FixedWidth + Copy + Ord {
    fn to_u64(self) -> u64;
    fn from_u64(v: u64) -> Option<Self>;
}

macro_rules! delta_key {
    ($($t:ty),*) => {$(
        impl DeltaKey for $t {
            fn to_u64(self) -> u64 {
                self as u64
            }
            fn from_u64(v: u64) -> Option<Self> {
                <$t>::try_from(v).ok()
            }
        }
    )*};
}

delta_key!(u8, u16, u32, u64, usize);

/// Number of bytes `v` occupies as a varint.
pub fn varint_len(v: u64) -> usize {
    let bits = 64 - (v | 1).leading_zeros() as usize;
    bits.div_ceil(7)
}

/// Appends `v` as a little-endian base-128 varint: low 7 bits per byte,
/// high bit set on every byte but the last.
pub fn write_varint(mut v: u64, out: &mut Vec<u8>) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Reads one varint starting at `*pos`, advancing it.
pub fn read_varint(buf: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let start = *pos;
    let mut result = 0u64;
    let mut shift = 0u32;
    loop {
        let Some(&byte) = buf.get(*pos) else {
            return Err(CodecError::Truncated {
                offset: *pos,
                needed: 1,
            });
        };
        *pos += 1;
        let low = (byte & 0x7f) as u64;
        if shift == 63 && low > 1 || shift > 63 {
            return Err(CodecError::MalformedVarint { offset: start });
        }
        result |= low << shift;
        if byte & 0x80 == 0 {
            return Ok(result);
        }
        shift += 7;
    }
}

/// Storage strategy for the entries of one leaf block.
///
/// Implementations are stateless marker types. Blocks handed to `decode`
/// were always produced by `encode` on sorted input, so the in-tree path is
/// infallible; the byte-level functions on each codec report misuse.
pub trait Codec<K: Clone, V: Clone>: Send + Sync + 'static {
    type Block: Send + Sync;

    const NAME: &'static str;

    /// Bytes `encode` would produce for `entries`.
    fn encoded_size(entries: &[(K, V)]) -> usize;

    fn encode(entries: Vec<(K, V)>) -> Self::Block;

    fn decode(block: &Self::Block, count: usize) -> Cow<'_, [(K, V)]>;

    /// Heap bytes held by the block payload.
    fn block_bytes(block: &Self::Block, count: usize) -> usize;
}

/// Identity encoding: entries are kept as a contiguous typed array.
#[derive(Debug, Clone, Copy, Default)]
pub struct Plain;

impl<K, V> Codec<K, V> for Plain
where
    K: Clone + Send + Sync + 'static,
    V: Clone + Send + Sync + 'static,
{
    type Block = Box<[(K, V)]>;

    const NAME: &'static str = "identity";

    fn encoded_size(entries: &[(K, V)]) -> usize {
        mem::size_of_val(entries)
    }

    fn encode(entries: Vec<(K, V)>) -> Self::Block {
        entries.into_boxed_slice()
    }

    fn decode(block: &Self::Block, count: usize) -> Cow<'_, [(K, V)]> {
        debug_assert_eq!(block.len(), count);
        Cow::Borrowed(block)
    }

    fn block_bytes(block: &Self::Block, _count: usize) -> usize {
        mem::size_of_val::<[(K, V)]>(block)
    }
}

impl Plain {
    /// Fixed-width concatenation `[key][value]` per entry.
    pub fn encode_into<K: FixedWidth, V: FixedWidth>(entries: &[(K, V)], out: &mut Vec<u8>) {
        out.reserve(entries.len() * (K::WIDTH + V::WIDTH));
        for (k, v) in entries {
            k.write_le(out);
            v.write_le(out);
        }
    }

    pub fn decode_from<K: FixedWidth, V: FixedWidth>(
        buf: &[u8],
        count: usize,
    ) -> Result<Vec<(K, V)>, CodecError> {
        stats::count_decode();
        let width = K::WIDTH + V::WIDTH;
        let needed = width * count;
        if buf.len() < needed {
            return Err(CodecError::Truncated {
                offset: buf.len(),
                needed: needed - buf.len(),
            });
        }
        if buf.len() > needed {
            return Err(CodecError::TrailingBytes {
                count,
                extra: buf.len() - needed,
            });
        }
        Ok((0..count)
            .map(|i| {
                let c = &buf[i * width..(i + 1) * width];
                (K::read_le(&c[..K::WIDTH]), V::read_le(&c[K::WIDTH..]))
            })
            .collect())
    }
}

/// Difference encoding for sorted nonnegative integer keys; values raw.
#[derive(Debug, Clone, Copy, Default)]
pub struct Diff;

impl Diff {
    /// Encoded size in bytes; keys are assumed strictly increasing.
    pub fn size_of<K: DeltaKey, V: FixedWidth>(entries: &[(K, V)]) -> usize {
        if entries.is_empty() {
            return 0;
        }
        let deltas: usize = entries
            .windows(2)
            .map(|w| varint_len(w[1].0.to_u64().wrapping_sub(w[0].0.to_u64())))
            .sum();
        K::WIDTH + deltas + entries.len() * V::WIDTH
    }

    /// Writes the wire format for `entries` to `out`.
    pub fn encode_into<K: DeltaKey, V: FixedWidth>(
        entries: &[(K, V)],
        out: &mut Vec<u8>,
    ) -> Result<(), CodecError> {
        if let Some(index) = entries.windows(2).position(|w| w[0].0 >= w[1].0) {
            return Err(CodecError::Unsorted { index: index + 1 });
        }
        Self::encode_unchecked(entries, out);
        Ok(())
    }

    fn encode_unchecked<K: DeltaKey, V: FixedWidth>(entries: &[(K, V)], out: &mut Vec<u8>) {
        let Some((first, _)) = entries.first() else {
            return;
        };
        out.reserve(Self::size_of(entries));
        first.write_le(out);
        let mut prev = first.to_u64();
        for (k, _) in &entries[1..] {
            let cur = k.to_u64();
            write_varint(cur - prev, out);
            prev = cur;
        }
        for (_, v) in entries {
            v.write_le(out);
        }
    }

    /// Parses a block of `count` entries, validating the whole buffer.
    pub fn decode_from<K: DeltaKey, V: FixedWidth>(
        buf: &[u8],
        count: usize,
    ) -> Result<Vec<(K, V)>, CodecError> {
        stats::count_decode();
        Self::decode_raw(buf, count)
    }

    fn decode_raw<K: DeltaKey, V: FixedWidth>(
        buf: &[u8],
        count: usize,
    ) -> Result<Vec<(K, V)>, CodecError> {
        if count == 0 {
            return if buf.is_empty() {
                Ok(Vec::new())
            } else {
                Err(CodecError::TrailingBytes {
                    count,
                    extra: buf.len(),
                })
            };
        }
        if buf.len() < K::WIDTH {
            return Err(CodecError::Truncated {
                offset: 0,
                needed: K::WIDTH - buf.len(),
            });
        }
        let mut keys = Vec::with_capacity(count);
        let first = K::read_le(&buf[..K::WIDTH]);
        keys.push(first);
        let mut pos = K::WIDTH;
        let mut prev = first.to_u64();
        for index in 1..count {
            let delta = read_varint(buf, &mut pos)?;
            if delta == 0 {
                return Err(CodecError::ZeroDelta { index });
            }
            let cur = prev
                .checked_add(delta)
                .ok_or(CodecError::KeyOverflow { index })?;
            keys.push(K::from_u64(cur).ok_or(CodecError::KeyOverflow { index })?);
            prev = cur;
        }
        let values_len = count * V::WIDTH;
        let rest = buf.len() - pos;
        if rest < values_len {
            return Err(CodecError::Truncated {
                offset: buf.len(),
                needed: values_len - rest,
            });
        }
        if rest > values_len {
            return Err(CodecError::TrailingBytes {
                count,
                extra: rest - values_len,
            });
        }
        let mut out = Vec::with_capacity(count);
        for (i, k) in keys.into_iter().enumerate() {
            let at = pos + i * V::WIDTH;
            out.push((k, V::read_le(&buf[at..at + V::WIDTH])));
        }
        Ok(out)
    }
}

impl<K, V> Codec<K, V> for Diff
where
    K: DeltaKey + Send + Sync + 'static,
    V: FixedWidth + Clone + Send + Sync + 'static,
{
    type Block = Box<[u8]>;

    const NAME: &'static str = "diff";

    fn encoded_size(entries: &[(K, V)]) -> usize {
        Diff::size_of(entries)
    }

    fn encode(entries: Vec<(K, V)>) -> Self::Block {
        debug_assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "unsorted block"
        );
        let mut out = Vec::new();
        Diff::encode_unchecked(&entries, &mut out);
        out.into_boxed_slice()
    }

    fn decode(block: &Self::Block, count: usize) -> Cow<'_, [(K, V)]> {
        Cow::Owned(Diff::decode_raw(block, count).expect("corrupt block produced by encode"))
    }

    fn block_bytes(block: &Self::Block, _count: usize) -> usize {
        block.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_deltas_are_single_bytes() {
        let mut out = Vec::new();
        Diff::encode_into(&[(100u64, ()), (103, ()), (107, ())], &mut out).unwrap();
        let mut expected = 100u64.to_le_bytes().to_vec();
        expected.extend_from_slice(&[0x03, 0x04]);
        assert_eq!(out, expected);
        assert_eq!(Diff::size_of(&[(100u64, ()), (103, ()), (107, ())]), 10);
    }

    #[test]
    fn delta_300_is_two_bytes() {
        let mut out = Vec::new();
        Diff::encode_into(&[(0u64, ()), (300, ())], &mut out).unwrap();
        assert_eq!(&out[8..], &[0xAC, 0x02]);
        let back: Vec<(u64, ())> = Diff::decode_from(&out, 2).unwrap();
        assert_eq!(back[1].0, 300);
    }

    #[test]
    fn values_follow_keys() {
        let entries = [(5u32, 0xAABBu16), (6, 0x0102)];
        let mut out = Vec::new();
        Diff::encode_into(&entries, &mut out).unwrap();
        assert_eq!(out, vec![5, 0, 0, 0, 0x01, 0xBB, 0xAA, 0x02, 0x01]);
        assert_eq!(
            Diff::decode_from::<u32, u16>(&out, 2).unwrap(),
            entries.to_vec()
        );
    }

    #[test]
    fn misuse_and_corruption() {
        let mut out = Vec::new();
        assert_eq!(
            Diff::encode_into(&[(3u64, ()), (3, ())], &mut out),
            Err(CodecError::Unsorted { index: 1 })
        );
        assert_eq!(
            Diff::encode_into(&[(3u64, ()), (2, ())], &mut out),
            Err(CodecError::Unsorted { index: 1 })
        );
        let mut buf = 0u64.to_le_bytes().to_vec();
        buf.push(0x80);
        assert!(matches!(
            Diff::decode_from::<u64, ()>(&buf, 2),
            Err(CodecError::Truncated { .. })
        ));
        let mut buf = 0u64.to_le_bytes().to_vec();
        buf.extend_from_slice(&[0xff; 11]);
        assert!(matches!(
            Diff::decode_from::<u64, ()>(&buf, 2),
            Err(CodecError::MalformedVarint { .. })
        ));
        assert!(matches!(
            Diff::decode_from::<u64, ()>(&[1, 2], 1),
            Err(CodecError::Truncated { .. })
        ));
        let mut buf = 0u8.to_le_bytes().to_vec();
        write_varint(300, &mut buf);
        assert!(matches!(
            Diff::decode_from::<u8, ()>(&buf, 2),
            Err(CodecError::KeyOverflow { .. })
        ));
        let buf = [7u8, 0];
        assert!(matches!(
            Diff::decode_from::<u8, ()>(&buf, 2),
            Err(CodecError::ZeroDelta { .. })
        ));
    }

    #[test]
    fn identity_is_fixed_width_concatenation() {
        let entries = [(1u64, 2u64), (3, 4), (9, 9)];
        let mut out = Vec::new();
        Plain::encode_into(&entries, &mut out);
        assert_eq!(out.len(), 3 * 16);
        assert_eq!(
            Plain::decode_from::<u64, u64>(&out, 3).unwrap(),
            entries.to_vec()
        );
        assert_eq!(<Plain as Codec<u64, u64>>::encoded_size(&entries), 48);
        let sets: Vec<(u32, ())> = Plain::decode_from(&[1, 0, 0, 0, 2, 0, 0, 0], 2).unwrap();
        assert_eq!(sets, vec![(1, ()), (2, ())]);
    }

    #[test]
    fn varint_lengths() {
        assert_eq!(varint_len(0), 1);
        assert_eq!(varint_len(127), 1);
        assert_eq!(varint_len(128), 2);
        assert_eq!(varint_len(16383), 2);
        assert_eq!(varint_len(16384), 3);
        assert_eq!(varint_len(u64::MAX), 10);
    }
}
