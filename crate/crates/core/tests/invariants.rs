use std::collections::BTreeMap;

use chrono::NaiveDate;
use demandcast_core::c45::{extract_rules, gain_ratio, SplitTest};
use demandcast_core::eval::{kfold_split, node_aggregate};
use demandcast_core::sysfor::{select_good_attributes, Forest};
use demandcast_core::{
    build_forest, build_tree, Attribute, AttributeSchema, C45Params, Dataset, DecisionTree, Provenance, SysForParams,
    TrainingRecord, Value,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three numeric attributes and one categorical; the class leans on x0 and
/// the category so trees have something to find.
fn dataset(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = AttributeSchema::new(
        vec![
            Attribute::numerical("x0"),
            Attribute::numerical("x1"),
            Attribute::numerical("x2"),
            Attribute::categorical("c"),
        ],
        AttributeSchema::equal_width_bins(0.0, 1.0, 3),
    )
    .unwrap();
    let records = (0..n)
        .map(|i| {
            let x0: f64 = rng.gen_range(0.0..10.0);
            let cat = ["a", "b", "c"][rng.gen_range(0..3)];
            let class = if rng.gen_bool(0.15) {
                rng.gen_range(0..3)
            } else {
                usize::from(x0 > 4.0) + usize::from(cat == "c")
            };
            TrainingRecord {
                values: vec![
                    Value::Num((x0 * 10.0).round() / 10.0),
                    Value::Num(rng.gen_range(0..6) as f64),
                    Value::Num(rng.gen_range(-5.0..5.0)),
                    Value::Cat(cat.into()),
                ],
                class_label: class,
                usage: 0.0,
                eto: 0.0,
                provenance: Provenance {
                    farm_id: format!("F{}", i % 7),
                    date: NaiveDate::from_ymd_opt(2009, 1, 1).unwrap() + chrono::Days::new(i as u64),
                },
            }
        })
        .collect();
    Dataset::new(schema, records)
}

fn range(ds: &Dataset, attribute: usize) -> f64 {
    let vals = ds.records.iter().map(|r| r.values[attribute].as_num().unwrap());
    vals.clone().fold(f64::NEG_INFINITY, f64::max) - vals.fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn folds_partition_any_dataset(n in 2usize..500, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_split(n, k, seed).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all = folds.concat();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn gain_ratio_lies_in_unit_interval(seed in any::<u64>(), t in -1.0f64..11.0) {
        let ds = dataset(seed, 60);
        let refs: Vec<&TrainingRecord> = ds.records.iter().collect();
        for test in [
            SplitTest::Numeric { attribute: 0, threshold: t },
            SplitTest::Categorical { attribute: 3, categories: vec!["a".into(), "b".into(), "c".into()] },
        ] {
            let gr = gain_ratio(&refs, 3, &test).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&gr), "{gr}");
        }
    }

    #[test]
    fn good_attributes_meet_goodness_and_separation(seed in any::<u64>(), goodness in 0.05f64..1.0, separation in 0.0f64..0.6) {
        let ds = dataset(seed, 120);
        let refs: Vec<&TrainingRecord> = ds.records.iter().collect();
        let params = SysForParams { goodness, separation, ..SysForParams::default() };
        let good = select_good_attributes(&refs, &ds.schema, &params, &[false; 4]);
        if let Some(best) = good.first() {
            // nothing scores above the first good split
            let root = build_tree(&ds, C45Params { max_depth: 1, min_gain_ratio: 0.0, ..params.tree }, None).unwrap();
            let top = gain_ratio(&refs, 3, root.root.test().unwrap()).unwrap();
            prop_assert!((top - best.gain_ratio).abs() < 1e-9);
        }
        for pair in good.windows(2) {
            prop_assert!(pair[0].gain_ratio >= pair[1].gain_ratio);
        }
        for (i, g) in good.iter().enumerate() {
            let recomputed = gain_ratio(&refs, 3, &g.test).unwrap();
            prop_assert!((recomputed - g.gain_ratio).abs() < 1e-12);
            prop_assert!(g.gain_ratio + 1e-12 >= goodness * good[0].gain_ratio);
            for h in &good[..i] {
                if let (Some(a), Some(b)) = (g.split_point(), h.split_point()) {
                    if g.attribute() == h.attribute() {
                        prop_assert!((a - b).abs() >= separation * range(&ds, g.attribute()));
                    }
                }
            }
        }
    }

    #[test]
    fn rules_cover_each_record_once(seed in any::<u64>(), min_leaf in 1usize..12) {
        let ds = dataset(seed, 150);
        let tree = build_tree(&ds, C45Params { min_leaf, ..C45Params::default() }, None).unwrap();
        let rules = extract_rules(&tree);
        prop_assert_eq!(rules.len(), tree.leaf_count());
        for r in &ds.records {
            let hits: Vec<_> = rules.iter().filter(|rule| rule.matches(r)).collect();
            prop_assert_eq!(hits.len(), 1);
            prop_assert_eq!(hits[0].class_label, tree.predict(r).0);
        }
    }

    #[test]
    fn models_survive_json(seed in any::<u64>()) {
        let ds = dataset(seed, 120);
        let tree = build_tree(&ds, C45Params::default(), None).unwrap();
        let tree_back = DecisionTree::from_json(&tree.to_json().unwrap()).unwrap();
        prop_assert_eq!(&tree_back, &tree);
        let forest = build_forest(&ds, SysForParams::default()).unwrap();
        let forest_back = Forest::from_json(&forest.to_json().unwrap()).unwrap();
        for r in &ds.records {
            prop_assert_eq!(forest_back.predict(r), forest.predict(r));
        }
        prop_assert!(!forest.is_empty() && forest.len() <= forest.params.num_trees);
    }

    #[test]
    fn node_totals_conserve_farm_demand(demands in prop::collection::vec(0.0f64..1e4, 1..40), nodes in 1usize..6) {
        let farms: Vec<String> = (0..demands.len()).map(|i| format!("F{i}")).collect();
        let map: BTreeMap<String, String> = farms.iter().enumerate().map(|(i, f)| (f.clone(), format!("N{}", i % nodes))).collect();
        let totals = node_aggregate(farms.iter().map(String::as_str).zip(demands.iter().copied()), &map, ["Spare"]).unwrap();
        let sum: f64 = totals.iter().map(|t| t.total_ml).sum();
        let want: f64 = demands.iter().sum();
        prop_assert!((sum - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!(totals.iter().any(|t| t.node_id == "Spare" && t.is_empty()));
    }
}
