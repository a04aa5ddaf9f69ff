//! Dataset assembly, train/test splitting, the label-frequency baseline,
//! and top-k exact-match evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ast::{Ast, Label};
use crate::edit::{count_root_edit_ops, EditScript};
use crate::error::{Error, Result};
use crate::transform::{extract_transforms, TransformLabeling, TransformName};

// ---------------------------------------------------------------------------
// Dataset preparation
// ---------------------------------------------------------------------------

/// Why a script was dropped during preparation.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedScript {
    pub index: usize,
    pub source_id: String,
    pub reason: String,
}

/// Filters scripts by root-operation count, extracts transform labels, and
/// drops (with a log entry) scripts that exceed the threshold, fail
/// extraction, or carry no actual transform.
pub fn prepare_dataset(
    scripts: &[EditScript],
    threshold: usize,
) -> (Vec<TransformLabeling>, Vec<SkippedScript>) {
    let mut dataset = Vec::new();
    let mut skipped = Vec::new();
    for (index, script) in scripts.iter().enumerate() {
        let source_id = script.before.source_id.clone();
        let root_ops = count_root_edit_ops(script);
        if root_ops > threshold {
            skipped.push(SkippedScript {
                index,
                source_id,
                reason: format!("{root_ops} root edit operations exceed threshold {threshold}"),
            });
            continue;
        }
        match extract_transforms(script) {
            Ok(labeling) if labeling.active_count() == 0 => {
                skipped.push(SkippedScript {
                    index,
                    source_id,
                    reason: "no actual transform extracted".to_owned(),
                });
            }
            Ok(mut labeling) => {
                labeling.ast.source_id = source_id;
                dataset.push(labeling);
            }
            Err(e) => {
                skipped.push(SkippedScript { index, source_id, reason: e.to_string() });
            }
        }
    }
    (dataset, skipped)
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// The transform of a single-transform example, if it is one.
pub fn single_transform_of(example: &TransformLabeling) -> Option<TransformName> {
    match example.active_count() {
        1 => example.labels.values().next().copied(),
        _ => None,
    }
}

/// Draws a seeded, reproducible test split: `per_transform_test` examples
/// for each of the sixteen transforms from the single-transform category
/// plus `multiple_test` from the multiple-transform category. Returns
/// (train indexes, test indexes), both ascending. Underfull slices take
/// everything available, with a warning.
pub fn split_dataset(
    data: &[TransformLabeling],
    per_transform_test: usize,
    multiple_test: usize,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test: Vec<usize> = Vec::new();
    let mut draw = |pool: &mut Vec<usize>, want: usize, what: &str| {
        if pool.len() < want {
            log::warn!("only {} {what} examples available, wanted {want}", pool.len());
        }
        pool.shuffle(&mut rng);
        test.extend(pool.iter().take(want.min(pool.len())));
    };
    for transform in TransformName::actual() {
        let mut pool: Vec<usize> = data
            .iter()
            .enumerate()
            .filter(|(_, ex)| single_transform_of(ex) == Some(transform))
            .map(|(i, _)| i)
            .collect();
        draw(&mut pool, per_transform_test, transform.name());
    }
    let mut multiple: Vec<usize> = data
        .iter()
        .enumerate()
        .filter(|(_, ex)| ex.active_count() > 1)
        .map(|(i, _)| i)
        .collect();
    draw(&mut multiple, multiple_test, "multiple-transform");
    test.sort_unstable();
    test.dedup();
    let train: Vec<usize> = (0..data.len()).filter(|i| test.binary_search(i).is_err()).collect();
    (train, test)
}

// ---------------------------------------------------------------------------
// Baseline
// ---------------------------------------------------------------------------

/// Label-frequency baseline: P(T | L) estimated as (nodes with label L and
/// transform T) / (nodes with label L) over the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    /// One entry per observed (label, actual transform) pair.
    pub tuples: Vec<(Label, TransformName, f64)>,
}

pub fn build_baseline(data: &[TransformLabeling]) -> BaselineModel {
    let mut label_counts: BTreeMap<Label, usize> = BTreeMap::new();
    let mut pair_counts: BTreeMap<(Label, TransformName), usize> = BTreeMap::new();
    for example in data {
        let view = example.ast.view();
        for p in 1..=example.ast.node_count {
            let label = view.node(p).label;
            *label_counts.entry(label).or_insert(0) += 1;
            let t = example.get(p);
            if t != TransformName::Empty {
                *pair_counts.entry((label, t)).or_insert(0) += 1;
            }
        }
    }
    BaselineModel {
        tuples: pair_counts
            .into_iter()
            .map(|((label, t), n1)| (label, t, n1 as f64 / label_counts[&label] as f64))
            .collect(),
    }
}

pub fn serialize_baseline(baseline: &BaselineModel) -> String {
    serde_json::to_string_pretty(baseline).expect("baseline serialization")
}

pub fn parse_baseline(bytes: &str) -> Result<BaselineModel> {
    serde_json::from_str(bytes).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Ranks labelings for a tree: all single-node candidates ordered by tuple
/// probability (ties by pre-order position, then transform ordinal), then
/// two-node combinations by probability product, then three-node, until k
/// candidates exist.
pub fn baseline_rank(ast: &Ast, baseline: &BaselineModel, k: usize) -> Vec<TransformLabeling> {
    let view = ast.view();
    // (probability, position, transform) per applicable tuple.
    let mut singles: Vec<(f64, u32, TransformName)> = Vec::new();
    for p in 1..=ast.node_count {
        let label = view.node(p).label;
        for (l, t, prob) in &baseline.tuples {
            if *l == label {
                singles.push((*prob, p, *t));
            }
        }
    }
    singles.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.ordinal().cmp(&b.2.ordinal()))
    });

    let make = |entries: &[(f64, u32, TransformName)]| TransformLabeling {
        ast: ast.clone(),
        labels: entries.iter().map(|(_, p, t)| (*p, *t)).collect(),
    };
    let mut out: Vec<TransformLabeling> = Vec::new();
    for entry in &singles {
        if out.len() >= k {
            return out;
        }
        out.push(make(std::slice::from_ref(entry)));
    }
    // Multi-node combinations over distinct positions, by descending
    // probability product; ties by (position, ordinal) sequences.
    for arity in 2..=3usize {
        if out.len() >= k {
            break;
        }
        let mut combos: Vec<Vec<(f64, u32, TransformName)>> = Vec::new();
        let mut stack: Vec<(f64, u32, TransformName)> = Vec::new();
        fn expand(
            singles: &[(f64, u32, TransformName)],
            from: usize,
            arity: usize,
            stack: &mut Vec<(f64, u32, TransformName)>,
            out: &mut Vec<Vec<(f64, u32, TransformName)>>,
        ) {
            if stack.len() == arity {
                out.push(stack.clone());
                return;
            }
            for i in from..singles.len() {
                let entry = singles[i];
                if stack.iter().any(|e| e.1 == entry.1) {
                    continue;
                }
                stack.push(entry);
                expand(singles, i + 1, arity, stack, out);
                stack.pop();
            }
        }
        let mut by_position = singles.clone();
        by_position.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.ordinal().cmp(&b.2.ordinal())));
        expand(&by_position, 0, arity, &mut stack, &mut combos);
        combos.sort_by(|a, b| {
            let pa: f64 = a.iter().map(|e| e.0).product();
            let pb: f64 = b.iter().map(|e| e.0).product();
            pb.partial_cmp(&pa).unwrap_or(std::cmp::Ordering::Equal).then_with(|| {
                let ka: Vec<(u32, usize)> = a.iter().map(|e| (e.1, e.2.ordinal())).collect();
                let kb: Vec<(u32, usize)> = b.iter().map(|e| (e.1, e.2.ordinal())).collect();
                ka.cmp(&kb)
            })
        });
        for combo in combos {
            if out.len() >= k {
                break;
            }
            out.push(make(&combo));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Counts for one evaluation slice.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SliceStats {
    pub total: usize,
    /// Correct predictions per cutoff k.
    pub correct: BTreeMap<usize, usize>,
}

impl SliceStats {
    pub fn accuracy(&self, k: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct.get(&k).copied().unwrap_or(0) as f64 / self.total as f64
        }
    }
}

/// Per-example outcome, for the machine-readable report.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleRecord {
    pub source_id: String,
    /// The single transform's name, or "multiple".
    pub slice: String,
    pub correct_at: BTreeMap<usize, bool>,
}

/// Exact-match evaluation report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub per_transform: BTreeMap<TransformName, SliceStats>,
    pub multiple: SliceStats,
    pub records: Vec<ExampleRecord>,
}

impl EvalReport {
    /// Accuracy over all single-transform slices combined.
    pub fn overall_single(&self, k: usize) -> f64 {
        let total: usize = self.per_transform.values().map(|s| s.total).sum();
        let correct: usize =
            self.per_transform.values().map(|s| s.correct.get(&k).copied().unwrap_or(0)).sum();
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }

    /// Plain-text table, one row per slice.
    pub fn table(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = write!(out, "{:<18} {:>6}", "slice", "total");
        for k in &self.ks {
            let _ = write!(out, " {:>8}", format!("top-{k}"));
        }
        let _ = writeln!(out);
        for (t, stats) in &self.per_transform {
            let _ = write!(out, "{:<18} {:>6}", t.name(), stats.total);
            for k in &self.ks {
                let _ = write!(out, " {:>8.3}", stats.accuracy(*k));
            }
            let _ = writeln!(out);
        }
        let _ = write!(out, "{:<18} {:>6}", "multiple", self.multiple.total);
        for k in &self.ks {
            let _ = write!(out, " {:>8.3}", self.multiple.accuracy(*k));
        }
        let _ = writeln!(out);
        let _ = write!(
            out,
            "{:<18} {:>6}",
            "overall-single",
            self.per_transform.values().map(|s| s.total).sum::<usize>()
        );
        for k in &self.ks {
            let _ = write!(out, " {:>8.3}", self.overall_single(*k));
        }
        let _ = writeln!(out);
        out
    }
}

/// Evaluates a ranked predictor with exact-match at each cutoff in `ks`.
/// A prediction is correct at k when one of the first k ranked labelings
/// matches the ground truth at every position.
pub fn evaluate(
    test: &[TransformLabeling],
    predictor: &mut dyn FnMut(&Ast, usize) -> Result<Vec<TransformLabeling>>,
    ks: &[usize],
) -> Result<EvalReport> {
    let mut report = EvalReport { ks: ks.to_vec(), ..Default::default() };
    let max_k = ks.iter().copied().max().unwrap_or(1);
    for example in test {
        let ranked = predictor(&example.ast, max_k)?;
        let hit_rank = ranked.iter().position(|cand| cand.labels == example.labels);
        let slice_name = match single_transform_of(example) {
            Some(t) => t.name().to_owned(),
            None => "multiple".to_owned(),
        };
        let stats = match single_transform_of(example) {
            Some(t) => report.per_transform.entry(t).or_default(),
            None => &mut report.multiple,
        };
        stats.total += 1;
        let mut correct_at = BTreeMap::new();
        for &k in ks {
            let correct = hit_rank.is_some_and(|r| r < k);
            if correct {
                *stats.correct.entry(k).or_insert(0) += 1;
            } else {
                stats.correct.entry(k).or_insert(0);
            }
            correct_at.insert(k, correct);
        }
        report.records.push(ExampleRecord {
            source_id: example.ast.source_id.clone(),
            slice: slice_name,
            correct_at,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Node;
    use crate::synthetic::rules_corpus;

    #[test]
    fn prepare_dataset_filters_and_extracts() {
        let scripts: Vec<EditScript> =
            rules_corpus().into_iter().map(|case| case.script).collect();
        let total = scripts.len();
        let (dataset, skipped) = prepare_dataset(&scripts, 10);
        assert!(!dataset.is_empty());
        assert_eq!(dataset.len() + skipped.len(), total);
        assert!(skipped.iter().all(|s| !s.reason.is_empty()));
        assert!(dataset.iter().all(|d| d.active_count() >= 1));
    }

    #[test]
    fn prepare_dataset_drops_oversized() {
        let base = Ast::new(Node::new(Label::MethodCall).with_children(
            (0..12).map(|i| Node::valued(Label::Literal, i.to_string())).collect(),
        ));
        let ops: Vec<crate::edit::EditOp> = (0..11)
            .map(|i| crate::edit::EditOp::Upd { node: i + 2, new_value: Some("v".into()) })
            .collect();
        let after = crate::edit::apply_edit_script(&base, &ops).unwrap();
        let script = EditScript { before: base, after, ops };
        let (dataset, skipped) = prepare_dataset(&[script], 10);
        assert!(dataset.is_empty());
        assert_eq!(skipped.len(), 1);
        assert!(skipped[0].reason.contains("threshold"));
    }

    fn tiny_dataset() -> Vec<TransformLabeling> {
        let scripts: Vec<EditScript> =
            rules_corpus().into_iter().map(|case| case.script).collect();
        prepare_dataset(&scripts, 10).0
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let data = tiny_dataset();
        let (train_a, test_a) = split_dataset(&data, 1, 1, 99);
        let (train_b, test_b) = split_dataset(&data, 1, 1, 99);
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        for i in &test_a {
            assert!(train_a.binary_search(i).is_err());
        }
        assert_eq!(train_a.len() + test_a.len(), data.len());
        let (train, test) = split_dataset(&data, 0, 0, 1);
        assert!(test.is_empty());
        assert_eq!(train.len(), data.len());
    }

    #[test]
    fn baseline_probabilities_are_frequencies() {
        let data = tiny_dataset();
        let baseline = build_baseline(&data);
        assert!(!baseline.tuples.is_empty());
        assert!(baseline.tuples.iter().all(|(_, _, p)| *p > 0.0 && *p <= 1.0));
        let echoed = parse_baseline(&serialize_baseline(&baseline)).unwrap();
        assert_eq!(echoed, baseline);
    }

    #[test]
    fn baseline_breaks_ties_by_preorder() {
        let baseline = BaselineModel {
            tuples: vec![(Label::MethodCall, TransformName::MethRwMeth, 0.5)],
        };
        let ast = Ast::new(Node::new(Label::Block).with_children(vec![
            Node::valued(Label::MethodCall, "f"),
            Node::valued(Label::MethodCall, "g"),
        ]));
        let ranked = baseline_rank(&ast, &baseline, 2);
        let first: Vec<u32> = ranked[0].labels.keys().copied().collect();
        let second: Vec<u32> = ranked[1].labels.keys().copied().collect();
        assert_eq!(first, vec![2]);
        assert_eq!(second, vec![3]);
    }

    #[test]
    fn baseline_exhausts_singles_before_pairs() {
        let baseline = BaselineModel {
            tuples: vec![
                (Label::Literal, TransformName::ConstantRep, 0.3),
                (Label::VariableAccess, TransformName::VarRwVar, 0.2),
            ],
        };
        let ast = Ast::new(Node::new(Label::Block).with_children(vec![
            Node::valued(Label::Literal, "1"),
            Node::valued(Label::VariableAccess, "v"),
        ]));
        let ranked = baseline_rank(&ast, &baseline, 5);
        assert_eq!(ranked[0].labels.len(), 1);
        assert_eq!(ranked[0].labels.values().next(), Some(&TransformName::ConstantRep));
        assert_eq!(ranked[1].labels.len(), 1);
        assert_eq!(ranked[2].labels.len(), 2);
        for (i, a) in ranked.iter().enumerate() {
            for b in ranked.iter().skip(i + 1) {
                assert_ne!(a.labels, b.labels, "duplicate labeling in ranking");
            }
        }
    }

    #[test]
    fn evaluate_counts_exact_matches() {
        let data = tiny_dataset();
        let truth = data[0].clone();
        let wrong = TransformLabeling { ast: truth.ast.clone(), labels: Default::default() };
        let right = truth.clone();
        let mut predictor = move |_ast: &Ast, _k: usize| {
            Ok(vec![wrong.clone(), right.clone(), wrong.clone()])
        };
        let report = evaluate(std::slice::from_ref(&truth), &mut predictor, &[1, 3]).unwrap();
        let slice = single_transform_of(&truth).unwrap();
        assert_eq!(report.per_transform[&slice].correct[&1], 0);
        assert_eq!(report.per_transform[&slice].correct[&3], 1);
        assert!(report.table().contains("overall-single"));
    }
}
