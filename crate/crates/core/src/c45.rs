//! Gain-ratio decision tree induction in the C4.5 style.
//!
//! Numerical attributes get binary `value <= threshold` tests with candidate
//! thresholds at midpoints of consecutive distinct values; categorical
//! attributes get one branch per observed category. Growth stops on pure
//! nodes, small nodes, weak splits or the depth limit. There is no pruning.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AttributeKind, AttributeSchema, Dataset, TrainingRecord, Value};

/// Gains below this are treated as zero, and a candidate must beat the
/// incumbent by more than this to replace it.
pub(crate) const EPS: f64 = 1e-12;

const TREE_FORMAT: &str = "demandcast-tree/1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C45Params {
    pub min_leaf: usize,
    pub min_gain_ratio: f64,
    pub max_depth: usize,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 10,
            min_gain_ratio: 0.01,
            max_depth: 15,
        }
    }
}

impl C45Params {
    /// Grows until nodes are pure or inseparable.
    pub fn unrestricted() -> Self {
        C45Params {
            min_leaf: 1,
            min_gain_ratio: 0.0,
            max_depth: usize::MAX,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.min_gain_ratio.is_nan() || self.min_gain_ratio < 0.0 {
            return Err(Error::Config("min_gain_ratio must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    /// Left branch (child 0) iff `value <= threshold`.
    Numeric { attribute: usize, threshold: f64 },
    /// One branch per category, in the listed order.
    Categorical { attribute: usize, categories: Vec<String> },
}

impl SplitTest {
    pub fn attribute(&self) -> usize {
        match self {
            SplitTest::Numeric { attribute, .. } | SplitTest::Categorical { attribute, .. } => *attribute,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            SplitTest::Numeric { threshold, .. } => Some(*threshold),
            SplitTest::Categorical { .. } => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            SplitTest::Numeric { .. } => 2,
            SplitTest::Categorical { categories, .. } => categories.len(),
        }
    }

    /// Child index for a record, or `None` for a value the test has never
    /// seen (an unknown category, or a value of the wrong kind).
    pub fn branch(&self, record: &TrainingRecord) -> Option<usize> {
        match (self, record.values.get(self.attribute())?) {
            (SplitTest::Numeric { threshold, .. }, Value::Num(v)) => Some(if *v <= *threshold { 0 } else { 1 }),
            (SplitTest::Categorical { categories, .. }, Value::Cat(c)) => categories.iter().position(|x| x == c),
            _ => None,
        }
    }

    pub fn describe(&self, schema: &AttributeSchema) -> String {
        let name = attr_name(schema, self.attribute());
        match self {
            SplitTest::Numeric { threshold, .. } => format!("{name} <= {threshold}"),
            SplitTest::Categorical { categories, .. } => format!("{name} in {{{}}}", categories.join(", ")),
        }
    }
}

fn attr_name(schema: &AttributeSchema, idx: usize) -> &str {
    schema.attributes().get(idx).map(|a| a.name.as_str()).unwrap_or("?")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub class_counts: Vec<usize>,
    pub majority_class: usize,
    pub support: usize,
    /// Majority count over support; 0 for an empty leaf.
    pub leaf_accuracy: f64,
}

impl Leaf {
    pub fn from_counts(class_counts: Vec<usize>) -> Self {
        let support = class_counts.iter().sum();
        let majority_class = majority(&class_counts);
        let leaf_accuracy = if support == 0 {
            0.0
        } else {
            class_counts[majority_class] as f64 / support as f64
        };
        Leaf {
            class_counts,
            majority_class,
            support,
            leaf_accuracy,
        }
    }

    /// Leaf for a branch that received no records: it predicts the parent's
    /// majority class and has zero support.
    fn empty(n_classes: usize, majority_class: usize) -> Self {
        Leaf {
            class_counts: vec![0; n_classes],
            majority_class,
            support: 0,
            leaf_accuracy: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf(Leaf),
    Internal {
        test: SplitTest,
        support: usize,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    pub fn support(&self) -> usize {
        match self {
            TreeNode::Leaf(l) => l.support,
            TreeNode::Internal { support, .. } => *support,
        }
    }

    pub fn test(&self) -> Option<&SplitTest> {
        match self {
            TreeNode::Internal { test, .. } => Some(test),
            TreeNode::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[TreeNode] {
        match self {
            TreeNode::Internal { children, .. } => children,
            TreeNode::Leaf(_) => &[],
        }
    }

    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            TreeNode::Leaf(l) => out.push(l),
            TreeNode::Internal { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// The leaf a record reaches. Values a test has not seen follow the
    /// child with the largest support.
    pub fn route(&self, record: &TrainingRecord) -> &Leaf {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(l) => return l,
                TreeNode::Internal { test, children, .. } => {
                    let idx = test
                        .branch(record)
                        .filter(|&i| i < children.len())
                        .unwrap_or_else(|| largest_child(children));
                    node = &children[idx];
                }
            }
        }
    }
}

fn largest_child(children: &[TreeNode]) -> usize {
    let mut best = 0;
    for (i, c) in children.iter().enumerate() {
        if c.support() > children[best].support() {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub schema: AttributeSchema,
    pub params: C45Params,
    pub root: TreeNode,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    format: String,
    #[serde(flatten)]
    tree: DecisionTree,
}

impl DecisionTree {
    pub fn predict(&self, record: &TrainingRecord) -> (usize, &Leaf) {
        let leaf = self.root.route(record);
        (leaf.majority_class, leaf)
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves().len()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TreeFile {
            format: TREE_FORMAT.into(),
            tree: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TreeFile = serde_json::from_str(text)?;
        if file.format != TREE_FORMAT {
            return Err(Error::Config(format!("unsupported tree format {:?}", file.format)));
        }
        file.tree.check_shape()?;
        Ok(file.tree)
    }

    /// Structural checks for trees read from disk.
    pub(crate) fn check_shape(&self) -> Result<()> {
        fn walk(node: &TreeNode, schema: &AttributeSchema) -> Result<()> {
            match node {
                TreeNode::Leaf(l) => {
                    if l.class_counts.len() != schema.class_count() || l.majority_class >= schema.class_count() {
                        return Err(Error::Config("leaf does not match the class bins".into()));
                    }
                    Ok(())
                }
                TreeNode::Internal { test, children, .. } => {
                    let kind = schema
                        .attributes()
                        .get(test.attribute())
                        .map(|a| a.kind)
                        .ok_or_else(|| Error::Config("test on unknown attribute".into()))?;
                    let kind_ok = matches!(
                        (test, kind),
                        (SplitTest::Numeric { .. }, AttributeKind::Numerical)
                            | (SplitTest::Categorical { .. }, AttributeKind::Categorical)
                    );
                    if !kind_ok || children.len() != test.arity() || children.is_empty() {
                        return Err(Error::Config("malformed internal node".into()));
                    }
                    children.iter().try_for_each(|c| walk(c, schema))
                }
            }
        }
        walk(&self.root, &self.schema)
    }
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn entropy_of(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Shannon entropy in bits of a class distribution.
pub fn entropy(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("entropy of an empty distribution"));
    }
    Ok(entropy_of(class_counts, total))
}

pub fn class_counts(records: &[&TrainingRecord], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for r in records {
        counts[r.class_label] += 1;
    }
    counts
}

/// Gain ratio of splitting a node with distribution `parent` into groups
/// with distributions `groups`. Zero when the gain is zero or the split is
/// degenerate.
pub(crate) fn gain_ratio_of(parent: &[usize], groups: &[&[usize]]) -> f64 {
    let total: usize = parent.iter().sum();
    let sizes: Vec<usize> = groups.iter().map(|g| g.iter().sum()).collect();
    if total == 0 || sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return 0.0;
    }
    let n = total as f64;
    let remainder: f64 = groups
        .iter()
        .zip(&sizes)
        .map(|(g, &s)| s as f64 / n * entropy_of(g, s))
        .sum();
    let gain = entropy_of(parent, total) - remainder;
    let split_info = entropy_of(&sizes, total);
    if gain <= EPS || split_info <= EPS {
        0.0
    } else {
        gain / split_info
    }
}

/// Groups records by the branch they take. Records the test cannot route
/// are an error.
pub fn partition<'a>(records: &[&'a TrainingRecord], test: &SplitTest) -> Result<Vec<Vec<&'a TrainingRecord>>> {
    let mut groups = vec![Vec::new(); test.arity()];
    for r in records {
        let b = test.branch(r).ok_or_else(|| {
            Error::invalid(format!(
                "record for farm {} on {} cannot be routed by the test",
                r.provenance.farm_id, r.provenance.date
            ))
        })?;
        groups[b].push(*r);
    }
    Ok(groups)
}

/// Gain ratio of `test` on the records at a node.
pub fn gain_ratio(records: &[&TrainingRecord], n_classes: usize, test: &SplitTest) -> Result<f64> {
    let groups = partition(records, test)?;
    let parent = class_counts(records, n_classes);
    let counts: Vec<Vec<usize>> = groups.iter().map(|g| class_counts(g, n_classes)).collect();
    let refs: Vec<&[usize]> = counts.iter().map(Vec::as_slice).collect();
    Ok(gain_ratio_of(&parent, &refs))
}

/// A candidate test with its gain ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub test: SplitTest,
    pub gain_ratio: f64,
}

/// Every admissible threshold of a numerical attribute with its gain ratio,
/// in ascending threshold order. Both sides must hold at least `min_leaf`
/// records.
pub fn numeric_candidates(
    records: &[&TrainingRecord],
    n_classes: usize,
    attribute: usize,
    min_leaf: usize,
) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, usize)> = records
        .iter()
        .filter_map(|r| {
            r.values
                .get(attribute)
                .and_then(Value::as_num)
                .map(|v| (v, r.class_label))
        })
        .collect();
    if pairs.len() < records.len() {
        // mixed kinds never appear in a validated dataset
        return Vec::new();
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let parent = {
        let mut c = vec![0; n_classes];
        pairs.iter().for_each(|p| c[p.1] += 1);
        c
    };
    let mut left = vec![0; n_classes];
    let mut right = parent.clone();
    let mut out = Vec::new();
    for i in 0..pairs.len().saturating_sub(1) {
        left[pairs[i].1] += 1;
        right[pairs[i].1] -= 1;
        let (a, b) = (pairs[i].0, pairs[i + 1].0);
        if a == b {
            continue;
        }
        let n_left = i + 1;
        if n_left < min_leaf || pairs.len() - n_left < min_leaf {
            continue;
        }
        let threshold = a + (b - a) / 2.0;
        out.push((threshold, gain_ratio_of(&parent, &[&left, &right])));
    }
    out
}

/// Threshold with the highest gain ratio (lowest threshold on ties), or
/// `None` when the attribute cannot be split.
pub fn best_numeric_split(
    records: &[&TrainingRecord],
    n_classes: usize,
    attribute: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (t, gr) in numeric_candidates(records, n_classes, attribute, min_leaf) {
        if best.is_none_or(|(_, b)| gr > b + EPS) {
            best = Some((t, gr));
        }
    }
    best
}

/// The multi-way split over observed categories, if it is admissible.
pub fn categorical_candidate(
    records: &[&TrainingRecord],
    n_classes: usize,
    attribute: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in records {
        let c = r.values.get(attribute)?.as_cat()?;
        groups.entry(c).or_insert_with(|| vec![0; n_classes])[r.class_label] += 1;
    }
    if groups.len() < 2 || groups.values().any(|g| g.iter().sum::<usize>() < min_leaf) {
        return None;
    }
    let parent = class_counts(records, n_classes);
    let refs: Vec<&[usize]> = groups.values().map(Vec::as_slice).collect();
    Some(Candidate {
        gain_ratio: gain_ratio_of(&parent, &refs),
        test: SplitTest::Categorical {
            attribute,
            categories: groups.keys().map(|s| s.to_string()).collect(),
        },
    })
}

/// All admissible candidates with positive gain ratio, ordered by attribute
/// index then threshold. Categorical attributes flagged in `skip` are left
/// out.
pub fn all_candidates(
    records: &[&TrainingRecord],
    schema: &AttributeSchema,
    min_leaf: usize,
    skip: &[bool],
) -> Vec<Candidate> {
    let k = schema.class_count();
    let mut out = Vec::new();
    for (a, attr) in schema.attributes().iter().enumerate() {
        if skip.get(a).copied().unwrap_or(false) {
            continue;
        }
        match attr.kind {
            AttributeKind::Numerical => {
                out.extend(
                    numeric_candidates(records, k, a, min_leaf)
                        .into_iter()
                        .filter(|&(_, gr)| gr > 0.0)
                        .map(|(threshold, gain_ratio)| Candidate {
                            test: SplitTest::Numeric {
                                attribute: a,
                                threshold,
                            },
                            gain_ratio,
                        }),
                );
            }
            AttributeKind::Categorical => {
                out.extend(categorical_candidate(records, k, a, min_leaf).filter(|c| c.gain_ratio > 0.0));
            }
        }
    }
    out
}

/// The best admissible split: highest gain ratio, ties to the lowest
/// attribute index and then the lowest threshold. Zero-gain splits are
/// admissible here; `C45Params::min_gain_ratio` decides whether they are used.
pub fn best_split(
    records: &[&TrainingRecord],
    schema: &AttributeSchema,
    min_leaf: usize,
    skip: &[bool],
) -> Option<Candidate> {
    let k = schema.class_count();
    let mut best: Option<Candidate> = None;
    let mut offer = |c: Candidate| {
        if best.as_ref().is_none_or(|b| c.gain_ratio > b.gain_ratio + EPS) {
            best = Some(c);
        }
    };
    for (a, attr) in schema.attributes().iter().enumerate() {
        if skip.get(a).copied().unwrap_or(false) {
            continue;
        }
        match attr.kind {
            AttributeKind::Numerical => {
                if let Some((threshold, gain_ratio)) = best_numeric_split(records, k, a, min_leaf) {
                    offer(Candidate {
                        test: SplitTest::Numeric {
                            attribute: a,
                            threshold,
                        },
                        gain_ratio,
                    });
                }
            }
            AttributeKind::Categorical => {
                if let Some(c) = categorical_candidate(records, k, a, min_leaf) {
                    offer(c);
                }
            }
        }
    }
    best
}

/// Recursive tree growth shared by plain and forced-root builds.
pub(crate) struct Grower<'s> {
    pub schema: &'s AttributeSchema,
    pub params: C45Params,
}

impl Grower<'_> {
    pub(crate) fn grow(&self, records: &[&TrainingRecord], depth: usize, used: &[bool]) -> Result<TreeNode> {
        let k = self.schema.class_count();
        let counts = class_counts(records, k);
        let support = records.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || support < 2 * self.params.min_leaf || depth >= self.params.max_depth {
            return Ok(TreeNode::Leaf(Leaf::from_counts(counts)));
        }
        match best_split(records, self.schema, self.params.min_leaf, used) {
            Some(c) if c.gain_ratio >= self.params.min_gain_ratio => self.split(records, &c.test, depth, used),
            _ => Ok(TreeNode::Leaf(Leaf::from_counts(counts))),
        }
    }

    /// Applies `test` at this node and grows each child.
    pub(crate) fn split(
        &self,
        records: &[&TrainingRecord],
        test: &SplitTest,
        depth: usize,
        used: &[bool],
    ) -> Result<TreeNode> {
        let k = self.schema.class_count();
        let parent_majority = majority(&class_counts(records, k));
        let groups = partition(records, test)?;
        let mut child_used = used.to_vec();
        if matches!(test, SplitTest::Categorical { .. }) {
            child_used[test.attribute()] = true;
        }
        let children = groups
            .iter()
            .map(|g| {
                if g.is_empty() {
                    Ok(TreeNode::Leaf(Leaf::empty(k, parent_majority)))
                } else {
                    self.grow(g, depth + 1, &child_used)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TreeNode::Internal {
            test: test.clone(),
            support: records.len(),
            children,
        })
    }
}

pub(crate) fn check_test(schema: &AttributeSchema, test: &SplitTest) -> Result<()> {
    let attr = schema
        .attributes()
        .get(test.attribute())
        .ok_or_else(|| Error::invalid(format!("test on attribute {} outside the schema", test.attribute())))?;
    match (test, attr.kind) {
        (SplitTest::Numeric { threshold, .. }, AttributeKind::Numerical) if threshold.is_finite() => Ok(()),
        (SplitTest::Categorical { categories, .. }, AttributeKind::Categorical) if !categories.is_empty() => Ok(()),
        _ => Err(Error::invalid(format!("test does not fit attribute {:?}", attr.name))),
    }
}

/// Grows a tree over the whole dataset. With `forced_root` the root uses
/// exactly that test and growth continues normally below it.
pub fn build_tree(dataset: &Dataset, params: C45Params, forced_root: Option<&SplitTest>) -> Result<DecisionTree> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("cannot build a tree from an empty dataset"));
    }
    let records: Vec<&TrainingRecord> = dataset.records.iter().collect();
    let grower = Grower {
        schema: &dataset.schema,
        params,
    };
    let used = vec![false; dataset.schema.attributes().len()];
    let root = match forced_root {
        Some(test) => {
            check_test(&dataset.schema, test)?;
            grower.split(&records, test, 0, &used)?
        }
        None => grower.grow(&records, 0, &used)?,
    };
    Ok(DecisionTree {
        schema: dataset.schema.clone(),
        params,
        root,
    })
}

pub fn predict<'t>(tree: &'t DecisionTree, record: &TrainingRecord) -> (usize, &'t Leaf) {
    tree.predict(record)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    LessEq { attribute: usize, threshold: f64 },
    Greater { attribute: usize, threshold: f64 },
    Equals { attribute: usize, category: String },
}

impl Condition {
    pub fn holds(&self, record: &TrainingRecord) -> bool {
        match self {
            Condition::LessEq { attribute, threshold } => record
                .values
                .get(*attribute)
                .and_then(Value::as_num)
                .is_some_and(|v| v <= *threshold),
            Condition::Greater { attribute, threshold } => record
                .values
                .get(*attribute)
                .and_then(Value::as_num)
                .is_some_and(|v| v > *threshold),
            Condition::Equals { attribute, category } => {
                record.values.get(*attribute).and_then(Value::as_cat) == Some(category.as_str())
            }
        }
    }
}

/// A root-to-leaf path read as an if-then rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class_label: usize,
    pub support: usize,
    pub leaf_accuracy: f64,
}

impl Rule {
    pub fn matches(&self, record: &TrainingRecord) -> bool {
        self.conditions.iter().all(|c| c.holds(record))
    }

    pub fn display<'a>(&'a self, schema: &'a AttributeSchema) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, schema }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    schema: &'a AttributeSchema,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rule
            .conditions
            .iter()
            .map(|c| match c {
                Condition::LessEq { attribute, threshold } => {
                    format!("{} <= {threshold}", attr_name(self.schema, *attribute))
                }
                Condition::Greater { attribute, threshold } => {
                    format!("{} > {threshold}", attr_name(self.schema, *attribute))
                }
                Condition::Equals { attribute, category } => {
                    format!("{} = {category}", attr_name(self.schema, *attribute))
                }
            })
            .collect();
        let antecedent = if parts.is_empty() {
            "TRUE".to_string()
        } else {
            parts.join(" AND ")
        };
        let label = self
            .schema
            .class_bins()
            .get(self.rule.class_label)
            .map(|b| b.label.as_str())
            .unwrap_or("?");
        write!(
            f,
            "IF {antecedent} THEN {label} (support {}, accuracy {:.3})",
            self.rule.support, self.rule.leaf_accuracy
        )
    }
}

/// One rule per leaf, in depth-first order.
pub fn extract_rules(tree: &DecisionTree) -> Vec<Rule> {
    fn walk(node: &TreeNode, path: &mut Vec<Condition>, out: &mut Vec<Rule>) {
        match node {
            TreeNode::Leaf(l) => out.push(Rule {
                conditions: path.clone(),
                class_label: l.majority_class,
                support: l.support,
                leaf_accuracy: l.leaf_accuracy,
            }),
            TreeNode::Internal { test, children, .. } => {
                for (i, child) in children.iter().enumerate() {
                    let cond = match test {
                        SplitTest::Numeric { attribute, threshold } if i == 0 => Condition::LessEq {
                            attribute: *attribute,
                            threshold: *threshold,
                        },
                        SplitTest::Numeric { attribute, threshold } => Condition::Greater {
                            attribute: *attribute,
                            threshold: *threshold,
                        },
                        SplitTest::Categorical { attribute, categories } => Condition::Equals {
                            attribute: *attribute,
                            category: categories[i].clone(),
                        },
                    };
                    path.push(cond);
                    walk(child, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    out
}
