mod common;

use common::*;
use cutcover::oracle::{ColumnMode, CutOracle};
use cutcover::path::{column_minima, minor_minimum, PathMinor};
use proptest::prelude::*;

#[test]
fn extraction_matches_brute_force() {
    let t = Tally::run(0..1000, extraction_trial);
    assert!(t.ok(), "{}", t.summary());
    assert!(t.pass >= 500, "{}", t.summary());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn column_minima_are_exact_and_monotone(seed in 0u64..1_000_000, pick in 0usize..1000) {
        let (g, t) = instance(seed, 14);
        let (u, v) = (pick % g.n(), (pick / 7) % g.n());
        let path = tree_path(&t, u, v);
        prop_assume!(path.len() >= 2);
        let p = PathMinor::new(path.clone(), 1 + pick % (path.len() - 1)).unwrap();
        let w = weights(g.m(), 0.2, 3.0, seed);
        let o = CutOracle::new(&g, &t, ColumnMode::Plain { k: 1 }, &w, 1.0);
        let cm = column_minima(&p, &o);
        prop_assert!(cm.rows.windows(2).all(|x| x[0] <= x[1]));
        let mut best = f64::INFINITY;
        for j in 0..p.cols() {
            let col_min = (0..p.rows()).map(|i| o.cut_value(p.cut(i, j))).fold(f64::INFINITY, f64::min);
            prop_assert!(rel_close(cm.values[j], col_min, 1e-12) || cm.values[j] == col_min);
            best = best.min(col_min);
        }
        prop_assert_eq!(minor_minimum(&p, &o).1, best);
    }
}
