//! Difference encoding checked against an independent LEB128 implementation.

use pactree::encoding::{read_varint, varint_len, write_varint, Codec, Diff, Plain};
use proptest::prelude::*;

fn leb(v: u64) -> Vec<u8> {
    let mut out = Vec::new();
    leb128::write::unsigned(&mut out, v).unwrap();
    out
}

#[test]
fn fixed_examples() {
    assert_eq!(leb(300), vec![0xAC, 0x02]);
    let mut buf = Vec::new();
    write_varint(300, &mut buf);
    assert_eq!(buf, leb(300));

    let mut block = Vec::new();
    Diff::encode_into(&[(100u64, ()), (103, ()), (107, ())], &mut block).unwrap();
    let mut want = 100u64.to_le_bytes().to_vec();
    want.extend([0x03, 0x04]);
    assert_eq!(block, want);

    let mut stream = 0u64.to_le_bytes().to_vec();
    stream.extend([0xAC, 0x02]);
    let keys: Vec<(u64, ())> = Diff::decode_from(&stream, 2).unwrap();
    assert_eq!(keys, vec![(0, ()), (300, ())]);
}

proptest! {
    #[test]
    fn varints_match_leb128(v in any::<u64>()) {
        let mut buf = Vec::new();
        write_varint(v, &mut buf);
        prop_assert_eq!(&buf, &leb(v));
        prop_assert_eq!(varint_len(v), buf.len());
        let mut pos = 0;
        prop_assert_eq!(read_varint(&buf, &mut pos).unwrap(), v);
        prop_assert_eq!(pos, buf.len());
        let mut slice = &buf[..];
        prop_assert_eq!(leb128::read::unsigned(&mut slice).unwrap(), v);
    }

    #[test]
    fn diff_layout_matches_oracle(keys in prop::collection::btree_set(any::<u64>(), 1..256), vals in any::<u32>()) {
        let entries: Vec<(u64, u32)> = keys.iter().map(|&k| (k, vals ^ k as u32)).collect();
        let mut got = Vec::new();
        Diff::encode_into(&entries, &mut got).unwrap();
        let mut want = entries[0].0.to_le_bytes().to_vec();
        for w in entries.windows(2) {
            want.extend(leb(w[1].0 - w[0].0));
        }
        for (_, v) in &entries {
            want.extend(v.to_le_bytes());
        }
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(Diff::size_of(&entries), want.len());
        prop_assert_eq!(Diff::decode_from::<u64, u32>(&got, entries.len()).unwrap(), entries.clone());
        let block = <Diff as Codec<u64, u32>>::encode(entries.clone());
        prop_assert_eq!(<Diff as Codec<u64, u32>>::decode(&block, entries.len()).into_owned(), entries);
    }

    #[test]
    fn plain_roundtrip(keys in prop::collection::btree_set(any::<u32>(), 0..300)) {
        let entries: Vec<(u32, u64)> = keys.iter().map(|&k| (k, k as u64 * 3)).collect();
        let mut buf = Vec::new();
        Plain::encode_into(&entries, &mut buf);
        prop_assert_eq!(buf.len(), entries.len() * 12);
        prop_assert_eq!(Plain::decode_from::<u32, u64>(&buf, entries.len()).unwrap(), entries);
    }

    #[test]
    fn truncated_blocks_are_rejected(keys in prop::collection::btree_set(any::<u16>(), 2..64), cut in 1usize..8) {
        let entries: Vec<(u16, u8)> = keys.iter().map(|&k| (k, 1)).collect();
        let mut buf = Vec::new();
        Diff::encode_into(&entries, &mut buf).unwrap();
        let keep = buf.len().saturating_sub(cut);
        prop_assert!(Diff::decode_from::<u16, u8>(&buf[..keep], entries.len()).is_err());
    }
}
