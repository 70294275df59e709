//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use demandcast_core::c45::entropy;
use demandcast_core::etc::etc_usage;
use demandcast_core::eval::{
    build_node_reports, closeness_accuracy, cross_validate, kfold_split, summarize, write_nodes_csv, NodeTotal,
};
use demandcast_core::ingest::{WeatherSeries, WeatherStations};
use demandcast_core::preprocess::{ewd_distribute, prepare_dataset, rep_distribute};
use demandcast_core::synth::{generate, ScenarioConfig};
use demandcast_core::sysfor::{select_good_attributes, voting2_predict};
use demandcast_core::{
    build_forest, build_tree, Attribute, AttributeKind, AttributeSchema, C45Params, Dataset, DeliveryInterval,
    DisaggregationMethod, ModelSpec, Provenance, SplitTest, SysForParams, TrainingRecord, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2009, 1, 1).unwrap()
}

fn record(values: Vec<Value>, class_label: usize) -> TrainingRecord {
    TrainingRecord {
        values,
        class_label,
        usage: 0.0,
        eto: 0.0,
        provenance: Provenance {
            farm_id: "F".into(),
            date: day0(),
        },
    }
}

fn ac1_rep() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sum = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for i in 0..1000 {
        let n = rng.gen_range(1..=30);
        let wt = rng.gen_range(0.0..=100.0);
        let eto: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=15.0)).collect();
        let iv = DeliveryInterval {
            farm_id: "F".into(),
            start_date: day0(),
            n,
            wt,
            eto_by_day: eto.clone(),
        };
        let w = rep_distribute(&iv).map_err(|e| e.to_string())?;
        let total: f64 = w.iter().sum();
        let rel = if wt > 0.0 { (total - wt).abs() / wt } else { total.abs() };
        worst_sum = worst_sum.max(rel);
        for a in 0..n {
            for b in 0..n {
                if eto[b] > 0.0 && w[b] > 0.0 {
                    let got = w[a] / w[b];
                    let want = eto[a] / eto[b];
                    worst_ratio = worst_ratio.max((got - want).abs() / want.max(f64::MIN_POSITIVE).max(1.0));
                }
            }
        }
        let flat = DeliveryInterval {
            eto_by_day: vec![eto[0]; n],
            ..iv
        };
        let rep = rep_distribute(&flat).map_err(|e| e.to_string())?;
        let ewd = ewd_distribute(&flat).map_err(|e| e.to_string())?;
        ensure(rep == ewd, || {
            format!("interval {i}: uniform ET_o gave REP {rep:?} != EWD {ewd:?}")
        })?;
    }
    ensure(worst_sum < 1e-9, || format!("conservation error {worst_sum:e}"))?;
    ensure(worst_ratio < 1e-9, || format!("proportionality error {worst_ratio:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "1000 intervals, max sum error {worst_sum:.1e}, max ratio error {worst_ratio:.1e}, {:?}",
        start.elapsed()
    ))
}

fn h(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Gain ratio computed from scratch over explicit groups of labels.
fn oracle_gain_ratio(labels: &[usize], groups: &[Vec<usize>], k: usize) -> f64 {
    let counts = |ls: &[usize]| {
        let mut c = vec![0; k];
        ls.iter().for_each(|&l| c[l] += 1);
        c
    };
    let n = labels.len() as f64;
    let mut cond = 0.0;
    let mut split_info = 0.0;
    for g in groups {
        let w = g.len() as f64 / n;
        cond += w * h(&counts(g));
        split_info -= w * w.log2();
    }
    (h(&counts(labels)) - cond) / split_info
}

/// Every candidate root split as (attribute, threshold, gain ratio), in
/// attribute then threshold order.
fn oracle_candidates(records: &[TrainingRecord], schema: &AttributeSchema) -> Vec<(usize, Option<f64>, f64)> {
    let k = schema.class_count();
    let labels: Vec<usize> = records.iter().map(|r| r.class_label).collect();
    let mut out = Vec::new();
    for (a, attr) in schema.attributes().iter().enumerate() {
        match attr.kind {
            AttributeKind::Numerical => {
                let mut vals: Vec<f64> = records.iter().map(|r| r.values[a].as_num().unwrap()).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for pair in vals.windows(2) {
                    let t = (pair[0] + pair[1]) / 2.0;
                    let mut groups = vec![Vec::new(), Vec::new()];
                    for r in records {
                        groups[usize::from(r.values[a].as_num().unwrap() > t)].push(r.class_label);
                    }
                    out.push((a, Some(t), oracle_gain_ratio(&labels, &groups, k)));
                }
            }
            AttributeKind::Categorical => {
                let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for r in records {
                    groups
                        .entry(r.values[a].as_cat().unwrap())
                        .or_default()
                        .push(r.class_label);
                }
                if groups.len() >= 2 {
                    let groups: Vec<Vec<usize>> = groups.into_values().collect();
                    out.push((a, None, oracle_gain_ratio(&labels, &groups, k)));
                }
            }
        }
    }
    out
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, n_attrs: usize, k: usize) -> Dataset {
    let attrs: Vec<Attribute> = (0..n_attrs)
        .map(|i| {
            if rng.gen_bool(0.3) {
                Attribute::categorical(format!("c{i}"))
            } else {
                Attribute::numerical(format!("x{i}"))
            }
        })
        .collect();
    let schema = AttributeSchema::new(attrs.clone(), AttributeSchema::equal_width_bins(0.0, 1.0, k)).unwrap();
    let coarse = rng.gen_bool(0.5);
    let records = (0..n)
        .map(|_| {
            let values = attrs
                .iter()
                .map(|a| match a.kind {
                    AttributeKind::Numerical if coarse => Value::Num(rng.gen_range(0..4) as f64),
                    AttributeKind::Numerical => Value::Num((rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0),
                    AttributeKind::Categorical => Value::Cat(["a", "b", "c"][rng.gen_range(0..3)].into()),
                })
                .collect();
            record(values, rng.gen_range(0..k))
        })
        .collect();
    Dataset::new(schema, records)
}

fn ac2_gain_ratio_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = C45Params {
        min_leaf: 1,
        min_gain_ratio: 0.0,
        max_depth: 1,
    };
    let mut splits = 0;
    for i in 0..200 {
        let (n, attrs, k) = (rng.gen_range(2..=10), rng.gen_range(2..=4), rng.gen_range(2..=3));
        let ds = random_dataset(&mut rng, n, attrs, k);
        let tree = build_tree(&ds, params, None).map_err(|e| e.to_string())?;
        let labels: BTreeSet<usize> = ds.records.iter().map(|r| r.class_label).collect();
        let cands = oracle_candidates(&ds.records, &ds.schema);
        let expected = if labels.len() < 2 || cands.is_empty() {
            None
        } else {
            let best = cands.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
            cands.iter().find(|c| c.2 >= best - 1e-9).map(|c| (c.0, c.1))
        };
        let got = tree.root.test().map(|t| (t.attribute(), t.threshold()));
        let same = match (expected, got) {
            (None, None) => true,
            (Some((ea, et)), Some((ga, gt))) => {
                ea == ga
                    && match (et, gt) {
                        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
                        (None, None) => true,
                        _ => false,
                    }
            }
            _ => false,
        };
        ensure(same, || {
            format!("dataset {i}: oracle root {expected:?}, build_tree root {got:?}")
        })?;
        splits += usize::from(got.is_some());
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "200 datasets, {splits} with a root split, {:?}",
        start.elapsed()
    ))
}

fn ac3_entropy() -> Outcome {
    let a = entropy(&[5, 5]).map_err(|e| e.to_string())?;
    ensure(a == 1.0, || format!("H([5,5]) = {a}"))?;
    let oracle = -(9.0f64 / 14.0) * (9.0f64 / 14.0).log2() - (5.0f64 / 14.0) * (5.0f64 / 14.0).log2();
    let b = entropy(&[9, 5]).map_err(|e| e.to_string())?;
    ensure((b - oracle).abs() < 1e-4 && (b - 0.94029).abs() < 1e-4, || {
        format!("H([9,5]) = {b}, oracle {oracle}")
    })?;
    Ok(format!("H([5,5]) = {a}, H([9,5]) = {b:.5}"))
}

fn ac4_resubstitution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = C45Params {
        min_leaf: 1,
        min_gain_ratio: 0.0,
        max_depth: usize::MAX,
    };
    let mut total = 0;
    for i in 0..60 {
        let n = rng.gen_range(1..=200);
        let (attrs, k) = (rng.gen_range(1..=5), rng.gen_range(2..=5));
        let mut ds = random_dataset(&mut rng, n, attrs, k);
        // identical attribute vectors share the label of the first one
        let mut first: BTreeMap<String, usize> = BTreeMap::new();
        for r in &mut ds.records {
            let key = format!("{:?}", r.values);
            r.class_label = *first.entry(key).or_insert(r.class_label);
        }
        let tree = build_tree(&ds, params, None).map_err(|e| e.to_string())?;
        let wrong = ds.records.iter().filter(|r| tree.predict(r).0 != r.class_label).count();
        ensure(wrong == 0, || {
            format!("dataset {i} ({n} records): {wrong} misclassified")
        })?;
        total += n;
    }
    Ok(format!("60 consistent datasets, {total} records, all fit exactly"))
}

fn binary_dataset(rows: &[(Vec<f64>, usize)], k: usize) -> Dataset {
    let n_attrs = rows[0].0.len();
    let schema = AttributeSchema::new(
        (0..n_attrs).map(|i| Attribute::numerical(format!("a{i}"))).collect(),
        AttributeSchema::equal_width_bins(0.0, 1.0, k),
    )
    .unwrap();
    let records = rows
        .iter()
        .map(|(v, c)| record(v.iter().map(|&x| Value::Num(x)).collect(), *c))
        .collect();
    Dataset::new(schema, records)
}

fn flip(c: usize, i: usize, every: usize) -> f64 {
    (if i.is_multiple_of(every) { 1 - c } else { c }) as f64
}

fn ac5_sysfor_structure() -> Outcome {
    // a0 copies the class, a1 and a2 are noisy copies, a3 is mostly noise
    let rows: Vec<(Vec<f64>, usize)> = (0..200)
        .map(|i| {
            let c = i % 2;
            let v = vec![c as f64, flip(c, i / 2, 10), flip(c, i / 2 + 3, 7), flip(c, i / 2, 2)];
            (v, c)
        })
        .collect();
    let ds = binary_dataset(&rows, 2);
    let params = SysForParams {
        num_trees: 3,
        ..SysForParams::default()
    };
    let refs: Vec<&TrainingRecord> = ds.records.iter().collect();
    let good = select_good_attributes(&refs, &ds.schema, &params, &[false; 4]);
    ensure(good.len() == 3, || {
        format!("fixture has {} good attributes, expected 3", good.len())
    })?;
    let forest = build_forest(&ds, params).map_err(|e| e.to_string())?;
    let roots: Vec<(usize, Option<f64>)> = forest
        .trees
        .iter()
        .map(|t| t.root.test().map(|s| (s.attribute(), s.threshold())).unwrap())
        .collect();
    let distinct: BTreeSet<usize> = roots.iter().map(|r| r.0).collect();
    ensure(forest.len() == 3 && distinct.len() == 3, || format!("roots {roots:?}"))?;

    // one dominant root split; inside the impure branch a1, a2, a3 all separate
    // the two minority classes with decreasing accuracy
    let mut rows = Vec::new();
    for i in 0..160 {
        rows.push((vec![0.0, (i % 2) as f64, ((i / 2) % 2) as f64, ((i / 4) % 2) as f64], 0));
    }
    for i in 0..40 {
        let c = 1 + i % 2;
        let b = c - 1;
        rows.push((vec![1.0, b as f64, flip(b, i / 2, 10), flip(b, i / 2 + 1, 6)], c));
    }
    let ds = binary_dataset(&rows, 3);
    let params = SysForParams {
        num_trees: 5,
        ..SysForParams::default()
    };
    let refs: Vec<&TrainingRecord> = ds.records.iter().collect();
    let good = select_good_attributes(&refs, &ds.schema, &params, &[false; 4]);
    ensure(good.len() == 1, || {
        format!("fixture has {} good attributes, expected 1", good.len())
    })?;
    let forest = build_forest(&ds, params).map_err(|e| e.to_string())?;
    ensure(forest.len() >= 2, || format!("forest has {} trees", forest.len()))?;
    let first_root = forest.trees[0].root.test().cloned();
    let mut level1: Vec<Vec<Option<SplitTest>>> = Vec::new();
    for t in &forest.trees {
        ensure(t.root.test().cloned() == first_root, || {
            "extra tree has a different root".into()
        })?;
        level1.push(t.root.children().iter().map(|c| c.test().cloned()).collect());
    }
    for a in 0..level1.len() {
        for b in a + 1..level1.len() {
            ensure(level1[a] != level1[b], || {
                format!("trees {a} and {b} share all level-1 tests")
            })?;
        }
    }
    Ok(format!(
        "3 good attributes -> roots {:?}; 1 good attribute -> {} trees sharing root {}",
        distinct,
        forest.len(),
        first_root.map(|t| t.describe(&ds.schema)).unwrap_or_default()
    ))
}

fn ac6_voting2_oracle() -> Outcome {
    let config = ScenarioConfig {
        noise: 0.3,
        ..ScenarioConfig::default()
    };
    let ds = synthetic_dataset(&config, DisaggregationMethod::Ewd)?;
    let forest = build_forest(&ds, SysForParams::default()).map_err(|e| e.to_string())?;
    ensure(forest.len() >= 3, || format!("forest has only {} trees", forest.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let crops = ["Rice", "Maize", "Wheat", "Barley"];
    let soils = ["SMC", "TRB", "CLY"];
    let mut ties = 0;
    for i in 0..1000 {
        let values = vec![
            Value::Num(rng.gen_range(10.0..35.0)),
            Value::Num(rng.gen_range(0.0..20.0)),
            Value::Num(rng.gen_range(5.0..95.0)),
            Value::Num(rng.gen_range(100.0..400.0)),
            Value::Num(if rng.gen_bool(0.2) {
                rng.gen_range(1.0..20.0)
            } else {
                0.0
            }),
            Value::Num(rng.gen_range(5.0..45.0)),
            Value::Cat(soils[rng.gen_range(0..soils.len())].into()),
            Value::Cat(crops[rng.gen_range(0..crops.len())].into()),
        ];
        let r = record(values, 0);
        let mut best: Option<((f64, usize, i64), usize)> = None;
        let mut top_acc = Vec::new();
        for (t, tree) in forest.trees.iter().enumerate() {
            let leaf = tree.predict(&r).1;
            let key = (leaf.leaf_accuracy, leaf.support, -(t as i64));
            top_acc.push(leaf.leaf_accuracy);
            if best
                .as_ref()
                .is_none_or(|(b, _)| key.partial_cmp(b) == Some(std::cmp::Ordering::Greater))
            {
                best = Some((key, leaf.majority_class));
            }
        }
        let max = top_acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ties += usize::from(top_acc.iter().filter(|&&a| a == max).count() > 1);
        let want = best.unwrap().1;
        let got = voting2_predict(&forest, &r);
        ensure(got == want, || format!("record {i}: voting2 {got}, oracle {want}"))?;
    }
    Ok(format!(
        "1000 records against {} trees, {ties} with tied top accuracy",
        forest.len()
    ))
}

fn ac7_folds() -> Outcome {
    for (n, sizes) in [(1500usize, [500usize, 500, 500]), (6070, [2024, 2023, 2023])] {
        let folds = kfold_split(n, 3, 7).map_err(|e| e.to_string())?;
        let got: Vec<usize> = folds.iter().map(Vec::len).collect();
        ensure(got == sizes, || format!("n={n}: fold sizes {got:?}"))?;
        let mut seen = vec![0u8; n];
        folds.iter().flatten().for_each(|&i| seen[i] += 1);
        ensure(seen.iter().all(|&c| c == 1), || {
            format!("n={n}: a record is tested more than once or never")
        })?;
    }
    Ok("1500 -> 500/500/500, 6070 -> 2024/2023/2023, each record tested once".into())
}

fn ac8_closeness() -> Outcome {
    let oracle = (1.0 - (407.0f64 - 344.0).abs() / 407.0) * 100.0;
    let c = closeness_accuracy(407.0, 344.0).map_err(|e| e.to_string())?;
    ensure((c - 84.52).abs() <= 0.01 && (c - oracle).abs() < 1e-12, || {
        format!("closeness {c}")
    })?;

    let totals = vec![
        NodeTotal {
            node_id: "Coly 1_2".into(),
            total_ml: 344.0,
            farm_count: 3,
        },
        NodeTotal {
            node_id: "Coly 10".into(),
            total_ml: 0.0,
            farm_count: 2,
        },
    ];
    let actuals = BTreeMap::from([("Coly 1_2".to_string(), 407.0), ("Coly 10".to_string(), 0.0)]);
    let reports = build_node_reports(&[("c45".into(), totals)], Some(&actuals), &[]);
    let coly10 = reports.iter().find(|r| r.node_id == "Coly 10").unwrap();
    ensure(coly10.excluded && coly10.closeness_pct[0].is_none(), || {
        "Coly 10 not excluded".into()
    })?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("nodes.csv");
    write_nodes_csv(&reports, &path).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let row = text.lines().find(|l| l.starts_with("Coly 10,")).unwrap_or_default();
    let closeness_cell = row.split(',').nth(5).unwrap_or("?");
    ensure(closeness_cell.is_empty(), || {
        format!("Coly 10 row emits closeness: {row}")
    })?;
    let s = summarize(&reports);
    ensure(s.excluded_nodes == ["Coly 10"], || {
        format!("excluded {:?}", s.excluded_nodes)
    })?;
    Ok(format!("Coly 1_2 closeness {c:.4}%, Coly 10 excluded with no value"))
}

fn synthetic_dataset(config: &ScenarioConfig, method: DisaggregationMethod) -> Result<Dataset, String> {
    let s = generate(config).map_err(|e| e.to_string())?;
    let stations = WeatherStations::single(WeatherSeries::from_days(s.weather).map_err(|e| e.to_string())?);
    let schema = AttributeSchema::irrigation(6).map_err(|e| e.to_string())?;
    prepare_dataset(&s.deliveries, &s.farms, &stations, config.season_end(), method, &schema).map_err(|e| e.to_string())
}

fn ac9_end_to_end() -> Outcome {
    let start = Instant::now();
    let config = ScenarioConfig {
        seed: 9,
        n_farms: 20,
        n_days: 120,
        delivery_period: 7,
        noise: 0.0,
        ..ScenarioConfig::default()
    };
    ensure(config.eto_amplitude > 0.0, || "ET_o is not sinusoidal".into())?;
    let scenario = generate(&config).map_err(|e| e.to_string())?;
    let area: BTreeMap<&str, f64> = scenario.farms.iter().map(|f| (f.farm_id.as_str(), f.area)).collect();
    let truth: BTreeMap<(String, NaiveDate), f64> = scenario
        .truth
        .iter()
        .map(|t| ((t.farm_id.clone(), t.date), t.usage_ml))
        .collect();
    let rep = synthetic_dataset(&config, DisaggregationMethod::Rep)?;
    let ewd = synthetic_dataset(&config, DisaggregationMethod::Ewd)?;
    ensure(rep.len() == truth.len() && ewd.len() == truth.len(), || {
        "dataset does not cover every farm-day".into()
    })?;
    let (mut worst, mut rep_l1, mut ewd_l1) = (0.0f64, 0.0, 0.0);
    for (r, e) in rep.records.iter().zip(&ewd.records) {
        let p = &r.provenance;
        let t = truth[&(p.farm_id.clone(), p.date)];
        let a = area[p.farm_id.as_str()];
        worst = worst.max((r.usage * a - t).abs() / t);
        rep_l1 += (r.usage * a - t).abs();
        ewd_l1 += (e.usage * a - t).abs();
    }
    ensure(worst < 1e-9, || format!("REP relative error {worst:e}"))?;
    ensure(ewd_l1 > rep_l1, || format!("EWD L1 {ewd_l1} not above REP L1 {rep_l1}"))?;

    let c45 = ModelSpec::C45(C45Params::default());
    let rep_c45 = cross_validate(&c45, &rep, 3, 9).map_err(|e| e.to_string())?;
    let rep_sf = cross_validate(&ModelSpec::SysFor(SysForParams::default()), &rep, 3, 9).map_err(|e| e.to_string())?;
    let ewd_c45 = cross_validate(&c45, &ewd, 3, 9).map_err(|e| e.to_string())?;
    ensure(rep_c45.average_pct >= 95.0, || {
        format!("REP c45 {:.2}%", rep_c45.average_pct)
    })?;
    ensure(rep_sf.average_pct >= 95.0, || {
        format!("REP sysfor {:.2}%", rep_sf.average_pct)
    })?;
    ensure(rep_c45.average_pct >= ewd_c45.average_pct, || {
        format!(
            "REP c45 {:.2}% below EWD c45 {:.2}%",
            rep_c45.average_pct, ewd_c45.average_pct
        )
    })?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "REP max rel error {worst:.1e}, L1 REP {rep_l1:.2e} < EWD {ewd_l1:.2}; 3-fold c45 {:.2}% sysfor {:.2}% (EWD c45 {:.2}%), {:?}",
        rep_c45.average_pct,
        rep_sf.average_pct,
        ewd_c45.average_pct,
        start.elapsed()
    ))
}

fn ac10_unit_bridge() -> Outcome {
    // 5 mm over 1 ha = 5e-3 m * 1e4 m^2 = 50 m^3 = 0.05 ML
    let oracle = 5e-3 * 1e4 / 1e3;
    let u = etc_usage(1.0, 5.0).map_err(|e| e.to_string())?;
    ensure(u == 0.05 && u == oracle, || format!("ET_c usage {u}, oracle {oracle}"))?;
    Ok(format!("kc 1.0, ET_o 5.0 mm -> {u} ML/ha/day"))
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_demandcast"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "demandcast {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn cli_pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    run_cli(
        &["synth", "--seed", "11", "--n-farms", "8", "--n-days", "60", "-o", "sc"],
        dir,
    )?;
    run_cli(
        &[
            "preprocess",
            "--method",
            "rep",
            "--weather",
            "sc/weather.csv",
            "--deliveries",
            "sc/deliveries.csv",
            "--farms",
            "sc/farms.csv",
            "--season-end",
            "2009-03-01",
            "-o",
            "dataset.csv",
        ],
        dir,
    )?;
    run_cli(
        &[
            "crossval",
            "--model",
            "c45,sysfor,etc",
            "--kc",
            "sc/kc.csv",
            "--folds",
            "3",
            "--seed",
            "5",
            "-o",
            "cv",
            "dataset.csv",
        ],
        dir,
    )?;
    std::fs::write(
        dir.join("actual.csv"),
        "node_id,actual_ml\nN1,40\nN2,0\nN3,55.5\nN4,38\n",
    )
    .map_err(|e| e.to_string())?;
    run_cli(
        &[
            "forecast",
            "--model",
            "c45,sysfor,etc",
            "--kc",
            "sc/kc.csv",
            "--dataset",
            "dataset.csv",
            "--weather",
            "sc/weather.csv",
            "--farms",
            "sc/farms.csv",
            "--start",
            "2009-02-01",
            "--days",
            "7",
            "--actuals",
            "actual.csv",
            "--exclude-nodes",
            "n4",
            "-o",
            "fc",
        ],
        dir,
    )?;
    let mut files = Vec::new();
    for f in [
        "dataset.csv",
        "cv/folds.csv",
        "fc/nodes.csv",
        "fc/summary.json",
        "fc/farm_demand.csv",
        "fc/farm_daily.csv",
    ] {
        files.push((
            f.to_string(),
            std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"))?,
        ));
    }
    Ok(files)
}

fn ac11_determinism() -> Outcome {
    let (a, b) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    let first = cli_pipeline(a.path())?;
    let second = cli_pipeline(b.path())?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} output files byte-identical across two runs", first.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC1 REP conservation and proportionality", ac1_rep),
        ("AC2 gain-ratio root split oracle", ac2_gain_ratio_oracle),
        ("AC3 entropy spot values", ac3_entropy),
        ("AC4 resubstitution on consistent data", ac4_resubstitution),
        ("AC5 SysFor forest structure", ac5_sysfor_structure),
        ("AC6 Voting-2 oracle", ac6_voting2_oracle),
        ("AC7 cross-validation partition", ac7_folds),
        ("AC8 closeness fixture", ac8_closeness),
        ("AC9 synthetic end-to-end", ac9_end_to_end),
        ("AC10 ET_c unit bridge", ac10_unit_bridge),
        ("AC11 CLI determinism", ac11_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("[PASS] {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("[FAIL] {name}: panicked");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
