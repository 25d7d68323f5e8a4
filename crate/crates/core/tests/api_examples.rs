//! Worked examples for the public map, set and sequence interfaces.

use pactree::augment::{KeySum, MaxVal};
use pactree::sequence::SeqError;
use pactree::{Config, OrdMap, OrdSet, Seq};

fn set(b: usize, keys: &[u64]) -> OrdMap<u64, u64, KeySum> {
    OrdMap::build(Config::new(b), keys.iter().map(|&k| (k, k)).collect())
}

#[test]
fn building() {
    let cfg = Config::new(3);
    let m: OrdMap<u64, char> = OrdMap::build(cfg, vec![(3, 'a'), (1, 'b'), (3, 'c')]);
    assert_eq!(m.to_vec(), vec![(1, 'b'), (3, 'c')]);
    assert!(OrdMap::<u64, char>::build(cfg, vec![]).is_empty());
    let sums = set(3, &(0..16).collect::<Vec<_>>());
    assert_eq!(sums.aug_val(), 120);
    assert_eq!(sums.aug_range(&3, &5), 12);
    assert_eq!(sums.reduce(|a, b| a + b, 0), 120);
    assert_eq!(OrdMap::<u64, u64>::new(cfg).reduce(|a, b| a + b, 0), 0);
}

#[test]
fn point_updates_are_persistent() {
    let t = set(1, &[1, 3]);
    let u = t.insert(2, 2);
    assert_eq!(u.keys(), vec![1, 2, 3]);
    assert_eq!(t.keys(), vec![1, 3]);
    assert_eq!(set(1, &[1, 2, 3]).remove(&2).keys(), vec![1, 3]);
    assert_eq!(OrdMap::<u64, u64>::new(Config::new(2)).get(&4), None);
    let counted = OrdMap::<u64, u64>::new(Config::new(2))
        .insert(4, 1)
        .insert_with(4, 1, |a, b| a + b);
    assert_eq!(counted.get(&4), Some(2));
}

#[test]
fn set_operations() {
    for b in [1, 2, 3, 64] {
        let cfg = Config::new(b);
        let a: OrdMap<u64, char> = OrdMap::build(cfg, vec![(1, 'a'), (3, 'a'), (5, 'a')]);
        let c: OrdMap<u64, char> = OrdMap::build(cfg, vec![(2, 'b'), (3, 'b'), (4, 'b')]);
        assert_eq!(
            a.union(&c).to_vec(),
            vec![(1, 'a'), (2, 'b'), (3, 'b'), (4, 'b'), (5, 'a')]
        );
        let empty = OrdMap::new(cfg);
        assert!(a.union(&empty).ptr_eq(&a));
        assert!(empty.union(&a).ptr_eq(&a));
        assert_eq!(
            set(b, &[1, 2, 3]).intersection(&set(b, &[2, 3, 4])).keys(),
            vec![2, 3]
        );
        assert!(a.intersection(&empty).is_empty());
        assert_eq!(a.intersection(&a), a);
        assert_eq!(
            set(b, &[1, 2, 3]).difference(&set(b, &[2])).keys(),
            vec![1, 3]
        );
        assert!(a.difference(&empty).ptr_eq(&a));
        assert!(a.difference(&a).is_empty());

        let m = set(b, &[1, 5, 9]).multi_insert_with(vec![(2, 20), (5, 50)], |old, new| old + new);
        assert_eq!(m.to_vec(), vec![(1, 1), (2, 20), (5, 55), (9, 9)]);
        let base = set(b, &(1..=10).collect::<Vec<_>>());
        assert_eq!(
            base.multi_delete(vec![2, 4, 11]).keys(),
            vec![1, 3, 5, 6, 7, 8, 9, 10]
        );
        assert_eq!(
            OrdMap::<u64, u64>::new(cfg).multi_insert(vec![(3, 1), (1, 2)]),
            OrdMap::build(cfg, vec![(3, 1), (1, 2)])
        );
        assert_eq!(base.filter(|k, _| k % 2 == 0).keys(), vec![2, 4, 6, 8, 10]);
        assert!(base.filter(|_, _| true).ptr_eq(&base));
        assert_eq!(base.map_reduce(|_, v| v * v, |a, b| a + b, 0), 385);
    }
}

#[test]
fn ordered_queries() {
    let t = set(2, &[2, 4, 6]);
    assert_eq!(t.rank(&5), 2);
    assert_eq!(t.next(&4), Some((6, 6)));
    assert_eq!(t.previous(&2), None);
    assert_eq!(t.select(1), Some((4, 4)));
    assert!(OrdMap::<u64, u64>::new(Config::new(2))
        .range(&1, &3)
        .is_empty());
    assert_eq!(t.range(&3, &6).keys(), vec![4, 6]);
    assert_eq!(t.aug_le(&4), 6);
    assert_eq!(t.aug_ge(&4), 10);
    let (l, found, r) = t.split(&4);
    assert_eq!((l.keys(), found, r.keys()), (vec![2], Some(4), vec![6]));
}

#[test]
fn interval_stabbing() {
    // [left, right] intervals stored as left -> right, aggregated by max right
    let ivals = vec![(1u64, 4u64), (2, 9), (3, 3), (5, 7), (6, 12), (8, 8)];
    let t: OrdMap<u64, u64, MaxVal> = OrdMap::build(Config::new(2), ivals.clone());
    assert_eq!(t.aug_val(), Some(12));
    let stab = |q: u64| -> Vec<(u64, u64)> {
        t.aug_filter(|m| matches!(m, Some(r) if *r >= q))
            .range(&0, &q)
            .to_vec()
    };
    assert_eq!(stab(7), vec![(2, 9), (5, 7), (6, 12)]);
    assert_eq!(stab(3), vec![(1, 4), (2, 9), (3, 3)]);
    assert!(stab(13).is_empty());
    assert!(t.aug_filter(|_| true).ptr_eq(&t));
}

#[test]
fn sets() {
    let s: OrdSet<u32> = OrdSet::build(Config::new(4), [5, 1, 3, 1].map(|k| (k, ())).to_vec());
    assert_eq!(s.keys(), vec![1, 3, 5]);
    assert!(s.contains_key(&3));
}

#[test]
fn sequences() {
    let cfg = Config::new(2);
    assert!(Seq::<char>::from_vec(cfg, vec![]).is_empty());
    let s = Seq::from_vec(cfg, vec!['c', 'a', 'b']);
    assert_eq!(s.to_vec(), vec!['c', 'a', 'b']);
    assert_eq!(Seq::from_vec(cfg, vec!['x']).nth(0), Ok('x'));
    assert_eq!(s.nth(3), Err(SeqError::OutOfBounds { index: 3, len: 3 }));
    let abcd = Seq::from_vec(cfg, vec!['a', 'b', 'c', 'd']);
    assert_eq!(abcd.take(2).unwrap().to_vec(), vec!['a', 'b']);
    assert!(matches!(abcd.subseq(3, 1), Err(SeqError::BadRange { .. })));
    assert_eq!(Seq::new(cfg).append(&abcd), abcd);
    assert_eq!(
        Seq::from_vec(cfg, vec![1, 2, 3]).reverse().to_vec(),
        vec![3, 2, 1]
    );
    assert_eq!(Seq::<u32>::new(cfg).find_first(|_| true), None);
    assert_eq!(
        Seq::from_vec(cfg, vec![4, 7, 10]).find_first(|x| x % 2 == 1),
        Some((1, 7))
    );
    assert_eq!(
        Seq::from_vec(cfg, (1..=100).collect()).reduce(|a, b| a + b, 0),
        5050
    );
    assert_eq!(
        abcd.push_front('z').push_back('y').to_vec(),
        vec!['z', 'a', 'b', 'c', 'd', 'y']
    );
}

#[test]
#[should_panic(expected = "invalid config")]
fn rejects_bad_config() {
    let _ = OrdMap::<u64, u64>::new(Config::new(0));
}
