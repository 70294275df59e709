//! Systematically developed forests.
//!
//! A forest is grown in up to three steps:
//!
//! 1. collect the *good* splits at the root: every candidate whose gain ratio
//!    reaches `goodness` times the best one, keeping several thresholds of
//!    one numerical attribute only when they are at least `separation` times
//!    the attribute's range apart;
//! 2. grow one tree per good split, using it as the forced root;
//! 3. if that gives fewer than `num_trees` trees, reuse the first tree's root,
//!    and in its partitions swap the level-1 test for alternative good splits,
//!    one swap per extra tree, best gain ratio first.
//!
//! Prediction uses Voting-2: among the leaves a record reaches (one per
//! tree) the most accurate leaf decides.

use serde::{Deserialize, Serialize};

use crate::c45::{all_candidates, build_tree, partition, C45Params, DecisionTree, Grower, Leaf, SplitTest, EPS};
use crate::error::{Error, Result};
use crate::model::{AttributeSchema, Dataset, TrainingRecord, Value};

const FOREST_FORMAT: &str = "demandcast-forest/1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SysForParams {
    pub num_trees: usize,
    /// Fraction of the best gain ratio a split needs to count as good.
    pub goodness: f64,
    /// Minimum distance between good thresholds of one attribute, as a
    /// fraction of that attribute's observed range.
    pub separation: f64,
    pub tree: C45Params,
}

impl Default for SysForParams {
    fn default() -> Self {
        SysForParams {
            num_trees: 5,
            goodness: 0.3,
            separation: 0.3,
            tree: C45Params::default(),
        }
    }
}

impl SysForParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::Config("num_trees must be at least 1".into()));
        }
        if !(self.goodness > 0.0 && self.goodness <= 1.0) {
            return Err(Error::Config(format!("goodness {} outside (0, 1]", self.goodness)));
        }
        if !(self.separation > 0.0 && self.separation <= 1.0) {
            return Err(Error::Config(format!("separation {} outside (0, 1]", self.separation)));
        }
        Ok(())
    }
}

/// A split that qualified as good at some node.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodAttribute {
    pub test: SplitTest,
    pub gain_ratio: f64,
}

impl GoodAttribute {
    pub fn attribute(&self) -> usize {
        self.test.attribute()
    }

    pub fn split_point(&self) -> Option<f64> {
        self.test.threshold()
    }
}

fn value_range(records: &[&TrainingRecord], attribute: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in records
        .iter()
        .filter_map(|r| r.values.get(attribute).and_then(Value::as_num))
    {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Good splits at a node, best first. Categorical attributes flagged in
/// `skip` are not considered.
pub fn select_good_attributes(
    records: &[&TrainingRecord],
    schema: &AttributeSchema,
    params: &SysForParams,
    skip: &[bool],
) -> Vec<GoodAttribute> {
    let candidates = all_candidates(records, schema, params.tree.min_leaf, skip);
    let Some(best) = candidates.iter().map(|c| c.gain_ratio).max_by(f64::total_cmp) else {
        return Vec::new();
    };
    let floor = params.goodness * best;
    let mut passing: Vec<_> = candidates.into_iter().filter(|c| c.gain_ratio + EPS >= floor).collect();
    // candidates arrive in (attribute, threshold) order; the stable sort keeps it for ties
    passing.sort_by(|a, b| b.gain_ratio.total_cmp(&a.gain_ratio));

    let mut chosen: Vec<GoodAttribute> = Vec::new();
    for c in passing {
        if let SplitTest::Numeric { attribute, threshold } = c.test {
            let min_gap = params.separation * value_range(records, attribute);
            let too_close = chosen.iter().any(|g| {
                g.attribute() == attribute && g.split_point().is_some_and(|t| (t - threshold).abs() < min_gap)
            });
            if too_close {
                continue;
            }
        }
        chosen.push(GoodAttribute {
            test: c.test,
            gain_ratio: c.gain_ratio,
        });
    }
    chosen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub params: SysForParams,
    pub trees: Vec<DecisionTree>,
}

#[derive(Serialize, Deserialize)]
struct ForestFile {
    format: String,
    #[serde(flatten)]
    forest: Forest,
}

impl Forest {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn predict(&self, record: &TrainingRecord) -> usize {
        voting2_predict(self, record)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ForestFile {
            format: FOREST_FORMAT.into(),
            forest: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ForestFile = serde_json::from_str(text)?;
        if file.format != FOREST_FORMAT {
            return Err(Error::Config(format!("unsupported forest format {:?}", file.format)));
        }
        if file.forest.trees.is_empty() {
            return Err(Error::Config("forest has no trees".into()));
        }
        file.forest.trees.iter().try_for_each(DecisionTree::check_shape)?;
        Ok(file.forest)
    }
}

pub fn build_forest(dataset: &Dataset, params: SysForParams) -> Result<Forest> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("cannot build a forest from an empty dataset"));
    }
    let schema = &dataset.schema;
    let records: Vec<&TrainingRecord> = dataset.records.iter().collect();
    let no_skip = vec![false; schema.attributes().len()];

    let good = select_good_attributes(&records, schema, &params, &no_skip);
    if good.is_empty() {
        return Ok(Forest {
            params,
            trees: vec![build_tree(dataset, params.tree, None)?],
        });
    }

    // step 2
    let mut trees = good
        .iter()
        .take(params.num_trees)
        .map(|g| build_tree(dataset, params.tree, Some(&g.test)))
        .collect::<Result<Vec<_>>>()?;

    if trees.len() < params.num_trees && params.tree.max_depth >= 2 {
        let extra = level_one_alternatives(&trees[0], &records, &params)?;
        trees.extend(extra.into_iter().take(params.num_trees - trees.len()));
    }
    Ok(Forest { params, trees })
}

/// Step 3: copies of `first` whose level-1 subtree in one partition is
/// regrown from an alternative good split. Ordered best gain ratio first,
/// then by partition.
fn level_one_alternatives(
    first: &DecisionTree,
    records: &[&TrainingRecord],
    params: &SysForParams,
) -> Result<Vec<DecisionTree>> {
    let schema = &first.schema;
    let Some(root_test) = first.root.test() else {
        return Ok(Vec::new());
    };
    let groups = partition(records, root_test)?;
    let mut used = vec![false; schema.attributes().len()];
    if matches!(root_test, SplitTest::Categorical { .. }) {
        used[root_test.attribute()] = true;
    }

    let mut alternatives: Vec<(usize, GoodAttribute)> = Vec::new();
    for (j, group) in groups.iter().enumerate() {
        if group.len() < 2 * params.tree.min_leaf {
            continue;
        }
        let current = first.root.children()[j].test();
        alternatives.extend(
            select_good_attributes(group, schema, params, &used)
                .into_iter()
                .filter(|g| Some(&g.test) != current && g.gain_ratio >= params.tree.min_gain_ratio)
                .map(|g| (j, g)),
        );
    }
    alternatives.sort_by(|a, b| b.1.gain_ratio.total_cmp(&a.1.gain_ratio).then(a.0.cmp(&b.0)));

    let grower = Grower {
        schema,
        params: params.tree,
    };
    let mut out = Vec::new();
    for (j, alt) in alternatives.into_iter().take(params.num_trees) {
        let subtree = grower.split(&groups[j], &alt.test, 1, &used)?;
        let mut tree = first.clone();
        if let crate::c45::TreeNode::Internal { children, .. } = &mut tree.root {
            children[j] = subtree;
        }
        out.push(tree);
    }
    Ok(out)
}

/// Index of the deciding tree and its leaf under Voting-2: highest leaf
/// accuracy, then larger support, then the earlier tree.
pub fn voting2_leaf<'f>(forest: &'f Forest, record: &TrainingRecord) -> (usize, &'f Leaf) {
    let mut best: Option<(usize, &Leaf)> = None;
    for (i, tree) in forest.trees.iter().enumerate() {
        let leaf = tree.root.route(record);
        let better = match best {
            None => true,
            Some((_, b)) => {
                leaf.leaf_accuracy > b.leaf_accuracy
                    || (leaf.leaf_accuracy == b.leaf_accuracy && leaf.support > b.support)
            }
        };
        if better {
            best = Some((i, leaf));
        }
    }
    best.expect("forest has at least one tree")
}

pub fn voting2_predict(forest: &Forest, record: &TrainingRecord) -> usize {
    voting2_leaf(forest, record).1.majority_class
}
