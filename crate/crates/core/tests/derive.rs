use waldschmidt::bounds::{derive_bound, validate, Deriver, Strategy};
use waldschmidt::exact::{format_ratio, ratio};

fn published(n: u32, s: u64) -> String {
    format_ratio(&derive_bound(n, s, Strategy::Paper).bound)
}

#[test]
fn landmark_values() {
    assert_eq!(published(4, 15), "9/5");
    assert_eq!(published(4, 43), "11/5");
    assert_eq!(published(4, 67), "12/5");
    assert_eq!(published(4, 14), "8/5");
    assert_eq!(published(6, 429), "11/5");
    assert_eq!(published(5, 14), "25/16");
    assert_eq!(published(5, 22), "5/3");
    assert_eq!(published(5, 125), "491/220");
    assert_eq!(published(6, 715), "7/3");
    assert_eq!(published(3, 6), "5/3");
    assert_eq!(published(3, 56), "56/15");
    assert_eq!(published(2, 1), "1");
}

#[test]
fn every_published_derivation_revalidates() {
    for (n, s) in [(4, 15), (4, 43), (4, 67), (6, 429), (5, 14), (5, 22), (5, 125), (6, 715), (7, 200), (8, 300)] {
        validate(&derive_bound(n, s, Strategy::Paper)).unwrap();
    }
}

#[test]
fn never_exceeds_exact_grid_values() {
    for n in 2..=6u32 {
        for k in 1..=3u64 {
            let s = k.pow(n);
            for strategy in [Strategy::Paper, Strategy::Search { depth: 1 }] {
                let f = Deriver::global().derive(n, s, strategy);
                assert!(f.bound <= ratio(k as i64, 1), "N={n} s={s} gave {}", format_ratio(&f.bound));
            }
        }
    }
}

#[test]
fn published_strategy_is_monotone() {
    for n in 2..=7u32 {
        let mut last = ratio(0, 1);
        for s in 1..=600u64 {
            let b = derive_bound(n, s, Strategy::Paper).bound.clone();
            assert!(b >= last, "N={n} s={s}");
            last = b;
        }
    }
}

#[test]
fn search_improves_four_fourteen() {
    let f = derive_bound(4, 14, Strategy::search());
    assert_eq!(f.bound, ratio(28, 15));
    assert!(f.bound >= ratio(9, 5));
    validate(&f).unwrap();
    assert_eq!(format_ratio(&derive_bound(3, 6, Strategy::search()).bound), "5/3");
}
