//! Structural invariants and algebraic laws under random inputs.

use std::collections::BTreeMap;

use pactree::augment::KeySum;
use pactree::encoding::{Diff, Plain};
use pactree::{Config, OrdMap, Seq};
use proptest::prelude::*;

type PMap = OrdMap<u64, u64, KeySum, Plain>;
type DMap = OrdMap<u64, u64, KeySum, Diff>;

fn entries(max_len: usize) -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((0u64..3_000, any::<u64>()), 0..max_len)
}

fn block() -> impl Strategy<Value = usize> {
    prop_oneof![
        Just(1usize),
        Just(2),
        Just(3),
        Just(4),
        Just(8),
        Just(32),
        Just(128)
    ]
}

fn model(e: &[(u64, u64)]) -> BTreeMap<u64, u64> {
    e.iter().copied().collect()
}

fn pairs(m: &BTreeMap<u64, u64>) -> Vec<(u64, u64)> {
    m.iter().map(|(k, v)| (*k, *v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn built_trees_are_valid(b in block(), e in entries(2_000)) {
        let cfg = Config::new(b);
        let t = PMap::build(cfg, e.clone());
        t.check().unwrap();
        prop_assert_eq!(t.to_vec(), pairs(&model(&e)));
        let d = DMap::build(cfg, e.clone());
        d.check().unwrap();
        prop_assert_eq!(d.to_vec(), t.to_vec());
        let sum = model(&e).keys().fold(0u64, |a, k| a.wrapping_add(*k));
        prop_assert_eq!(t.aug_val(), sum);
    }

    #[test]
    fn set_operations_preserve_invariants(b in block(), x in entries(1_500), y in entries(1_500)) {
        let cfg = Config::new(b);
        let (a, c) = (PMap::build(cfg, x.clone()), PMap::build(cfg, y.clone()));
        let (before_a, before_c) = (a.to_vec(), c.to_vec());
        let u = a.union(&c);
        let ue = a.union_efficient(&c);
        let i = a.intersection(&c);
        let d = a.difference(&c);
        for t in [&u, &ue, &i, &d] {
            t.check().unwrap();
        }
        prop_assert_eq!(&u, &ue);
        prop_assert_eq!(u.len() + i.len(), a.len() + c.len());
        prop_assert_eq!(d.len() + i.len(), a.len());
        // persistence
        prop_assert_eq!(a.to_vec(), before_a);
        prop_assert_eq!(c.to_vec(), before_c);
    }

    #[test]
    fn batch_updates_preserve_invariants(b in block(), x in entries(1_500), y in entries(600)) {
        let cfg = Config::new(b);
        let a = DMap::build(cfg, x);
        let ins = a.multi_insert(y.clone());
        ins.check().unwrap();
        prop_assert_eq!(&ins, &a.union(&DMap::build(cfg, y.clone())));
        let del = a.multi_delete(y.iter().map(|e| e.0).collect());
        del.check().unwrap();
        prop_assert_eq!(&del, &a.difference(&DMap::build(cfg, y)));
    }

    #[test]
    fn split_join_roundtrip(b in block(), x in entries(2_000), k in 0u64..3_100) {
        let cfg = Config::new(b);
        let t = PMap::build(cfg, x);
        let (l, found, r) = t.split(&k);
        l.check().unwrap();
        r.check().unwrap();
        prop_assert!(l.last().is_none_or(|e| e.0 < k));
        prop_assert!(r.first().is_none_or(|e| e.0 > k));
        let back = match found {
            Some(v) => PMap::join(&l, k, v, &r),
            None => PMap::join2(&l, &r),
        };
        back.check().unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn filter_and_ranges(b in block(), x in entries(2_000), lo in 0u64..3_000, w in 0u64..3_000, m in 2u64..7) {
        let cfg = Config::new(b);
        let t = PMap::build(cfg, x.clone());
        let f = t.filter(|k, _| k % m == 0);
        f.check().unwrap();
        prop_assert!(f.keys().iter().all(|k| k % m == 0));
        let hi = lo + w;
        let r = t.range(&lo, &hi);
        r.check().unwrap();
        let want: Vec<(u64, u64)> = model(&x).range(lo..=hi).map(|(k, v)| (*k, *v)).collect();
        let s = want.iter().fold(0u64, |a, e| a.wrapping_add(e.0));
        prop_assert_eq!(r.to_vec(), want);
        prop_assert_eq!(t.aug_range(&lo, &hi), s);
        prop_assert_eq!(t.aug_le(&hi), t.range(&0, &hi).aug_val());
    }

    #[test]
    fn point_updates_keep_invariants(b in block(), x in entries(800), ops in prop::collection::vec((any::<bool>(), 0u64..3_000), 1..200)) {
        let cfg = Config::new(b);
        let mut t = PMap::build(cfg, x.clone());
        let mut m = model(&x);
        for (ins, k) in ops {
            if ins {
                t.insert_mut(k, k);
                m.insert(k, k);
            } else {
                t.remove_mut(&k);
                m.remove(&k);
            }
        }
        t.check().unwrap();
        prop_assert_eq!(t.to_vec(), pairs(&m));
    }

    #[test]
    fn sequences_stay_valid(b in block(), v in prop::collection::vec(any::<u32>(), 0..1_500), i in 0usize..1_600, j in 0usize..1_600) {
        let cfg = Config::new(b);
        let s = Seq::from_vec(cfg, v.clone());
        s.check().unwrap();
        let (i, j) = (i.min(v.len()), j.min(v.len()));
        let (i, j) = (i.min(j), i.max(j));
        let sub = s.subseq(i, j).unwrap();
        sub.check().unwrap();
        prop_assert_eq!(sub.to_vec(), s.drop_front(i).unwrap().take(j - i).unwrap().to_vec());
        let (a, c) = s.split_at(i).unwrap();
        let back = a.append(&c);
        back.check().unwrap();
        prop_assert_eq!(back.to_vec(), v.clone());
        let r = s.reverse();
        r.check().unwrap();
        prop_assert_eq!(r.reverse().to_vec(), v);
    }
}
