use std::collections::BTreeMap;

use mediacube::analytics::{cube_query, pattern_id, CubeQuery, Granularity};
use mediacube_testkit::{
    oracle_mismatch, oracle_pattern, random_catalog, random_query, report_mismatches,
    rollup_violations, Limits, SMALL,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn check_catalog(seed: u64, limits: &Limits) {
    let mut rng = StdRng::seed_from_u64(seed);
    let s = random_catalog(&mut rng, limits).snapshot();
    for mask in 0..16u8 {
        let q = random_query(&mut rng, &s, mask);
        assert_eq!(oracle_mismatch(&s, &q), None, "seed {seed}");
        assert_eq!(
            rollup_violations(&s, &q),
            Vec::<String>::new(),
            "seed {seed}"
        );
    }
}

#[test]
fn pattern_ids_match_table_rows() {
    for mask in 0..16u8 {
        let mut rng = StdRng::seed_from_u64(mask as u64);
        let s = random_catalog(&mut rng, &SMALL).snapshot();
        let q = random_query(&mut rng, &s, mask);
        assert_eq!(pattern_id(&q), oracle_pattern(&q));
    }
    assert_eq!(pattern_id(&CubeQuery::default()), 1);
}

#[test]
fn cube_matches_oracle_on_many_catalogs() {
    for seed in 0..100 {
        check_catalog(seed, &SMALL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cube_matches_oracle_on_tiny_catalogs(seed in any::<u64>()) {
        // Tiny catalogs make collisions and empty slices common.
        check_catalog(seed, &Limits { docs: 3, users: 2, contexts: 5, events: 25 });
    }
}

#[test]
fn day_cells_roll_up_to_month_and_year() {
    let mut rng = StdRng::seed_from_u64(7);
    let s = random_catalog(&mut rng, &SMALL).snapshot();
    let mut q = CubeQuery::default();
    let day = cube_query(&s, &q).unwrap();
    for (g, width) in [(Granularity::Month, 7), (Granularity::Year, 4)] {
        q.granularity = g;
        let coarse = cube_query(&s, &q).unwrap();
        let mut rolled: BTreeMap<_, u64> = BTreeMap::new();
        for cell in &day.cells {
            let mut key = cell.key.clone();
            key.time = key.time.map(|t| t[..width].to_string());
            *rolled.entry(key).or_default() += cell.count;
        }
        let got: BTreeMap<_, u64> = coarse
            .cells
            .iter()
            .map(|c| (c.key.clone(), c.count))
            .collect();
        assert_eq!(got, rolled);
        assert_eq!(coarse.total, day.total);
    }
}

#[test]
fn reports_agree_with_cube() {
    for seed in 0..20 {
        let mut rng = StdRng::seed_from_u64(1000 + seed);
        let s = random_catalog(&mut rng, &SMALL).snapshot();
        assert_eq!(report_mismatches(&s), Vec::<String>::new(), "seed {seed}");
    }
}

#[test]
fn pattern_sixteen_is_atomic() {
    let mut rng = StdRng::seed_from_u64(99);
    let s = random_catalog(&mut rng, &SMALL).snapshot();
    for _ in 0..50 {
        let q = random_query(&mut rng, &s, 0b1111);
        let r = cube_query(&s, &q).unwrap();
        assert!(r.cells.len() <= 1);
        assert_eq!(r.total, r.cells.first().map_or(0, |c| c.count));
    }
}
