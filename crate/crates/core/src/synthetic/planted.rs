//! Seeded corpus generator with planted rules: six single-transform rules
//! driven by one characteristic each, plus one two-node joint rule whose
//! trigger also appears, unlabeled, as noise in single-transform examples.
//! The joint rule is deliberately rarer than its noise floor so that
//! recovering it requires upweighting scarce multi-transform examples.

use rand::prelude::IndexedMutRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::ast::{insert_virtual_roots, Ast, Label, Node, ATTR_STATEMENT_ROOT};
use crate::features::attrs;
use crate::transform::{TransformLabeling, TransformName};

/// Corpus shape knobs.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub seed: u64,
    pub train: usize,
    pub test_single: usize,
    pub test_joint: usize,
    /// Fraction of training examples that follow the joint rule.
    pub joint_fraction: f64,
    /// Probability that a single-transform example carries the joint
    /// trigger attribute on some unlabeled variable.
    pub trigger_noise: f64,
}

impl Default for PlantedConfig {
    fn default() -> PlantedConfig {
        PlantedConfig {
            seed: 20_240_601,
            train: 2000,
            test_single: 340,
            test_joint: 60,
            joint_fraction: 0.055,
            trigger_noise: 0.09,
        }
    }
}

/// Which planted rule an example realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    Single(usize),
    Joint,
}

pub struct PlantedExample {
    pub labeling: TransformLabeling,
    pub kind: ExampleKind,
}

pub struct PlantedCorpus {
    pub train: Vec<TransformLabeling>,
    pub test: Vec<PlantedExample>,
}

pub const SINGLE_RULE_COUNT: usize = 6;

/// The transform each single rule plants.
pub fn single_rule_transform(rule: usize) -> TransformName {
    [
        TransformName::VarRwVar,
        TransformName::MethRwMeth,
        TransformName::BinOperatorRep,
        TransformName::LogExpExp,
        TransformName::MethRwVar,
        TransformName::VarRwMeth,
    ][rule]
}

const TRIGGER_VALUES: [&str; 6] = ["v_prim", "m_over", "+", "&&", "getValue", "count"];

fn trigger_node(rule: usize, rng: &mut ChaCha8Rng) -> Node {
    match rule {
        // Characteristic V1: primitive-typed variable.
        0 => Node::valued(Label::VariableAccess, "v_prim").with_attr(attrs::TYPE_PRIMITIVE, true),
        // Characteristic M12: overloaded method.
        1 => Node::valued(Label::MethodCall, "m_over")
            .with_attr(attrs::HAS_OVERLOADS, true)
            .with_children(vec![distractor_leaf(rng)]),
        // Characteristic BO4: arithmetic operator on 0/1.
        2 => Node::valued(Label::BinaryOperator, "+").with_children(vec![
            Node::valued(Label::Literal, "0"),
            distractor_leaf(rng),
        ]),
        // Characteristic LE6: mixed null / non-null check.
        3 => Node::valued(Label::LogicalOperator, "&&").with_children(vec![
            Node::valued(Label::BinaryOperator, "!=").with_children(vec![
                Node::valued(Label::VariableAccess, "chk"),
                Node::valued(Label::Literal, "null"),
            ]),
            Node::valued(Label::VariableAccess, "flag"),
        ]),
        // Characteristic M11: getter-named method.
        4 => Node::valued(Label::MethodCall, "getValue")
            .with_children(vec![distractor_leaf(rng)]),
        // Characteristic V15: near-identical identifier in scope.
        5 => Node::valued(Label::VariableAccess, "count")
            .with_attr(attrs::VARS_IN_SCOPE, serde_json::json!(["counts"])),
        _ => unreachable!("rule index"),
    }
}

/// The joint trigger: an unassigned local variable. Characteristic V8 holds
/// on the node and propagates to the statement's virtual root as V8'.
fn joint_trigger() -> Node {
    Node::valued(Label::VariableAccess, "v_unset").with_attr(attrs::LOCAL_UNASSIGNED_BEFORE, true)
}

fn distractor_leaf(rng: &mut ChaCha8Rng) -> Node {
    match rng.random_range(0..4) {
        0 => Node::valued(Label::VariableAccess, "d1"),
        1 => Node::valued(Label::VariableAccess, "d2"),
        2 => Node::valued(Label::Literal, "5"),
        _ => Node::valued(Label::MethodCall, "doWork"),
    }
}

/// Embeds the payload in a small expression context.
fn rhs_slot(payload: Node, rng: &mut ChaCha8Rng) -> Node {
    match rng.random_range(0..3) {
        0 => payload,
        1 => Node::valued(Label::BinaryOperator, "<")
            .with_children(vec![payload, distractor_leaf(rng)]),
        _ => Node::valued(Label::MethodCall, "hold").with_children(vec![payload]),
    }
}

/// Wraps the expression in a statement form (the per-statement tree root).
fn statement(rhs: Node, rng: &mut ChaCha8Rng) -> Node {
    let node = match rng.random_range(0..3) {
        0 => Node::valued(Label::Assignment, "=")
            .with_children(vec![Node::valued(Label::VariableAccess, "lhs"), rhs])
            .with_attr(attrs::STMT_KIND, "assignment"),
        1 => Node::valued(Label::Return, "return")
            .with_children(vec![rhs])
            .with_attr(attrs::STMT_KIND, "return"),
        _ => Node::valued(Label::MethodCall, "stmtFn")
            .with_children(vec![rhs, distractor_leaf(rng)])
            .with_attr(attrs::STMT_KIND, "call"),
    };
    node.with_attr(ATTR_STATEMENT_ROOT, true)
}

fn position_of(ast: &Ast, value: &str) -> u32 {
    crate::edit::position_of_value(ast, value).expect("trigger present")
}

fn generate(kind: ExampleKind, noise: f64, rng: &mut ChaCha8Rng) -> TransformLabeling {
    let payload = match kind {
        ExampleKind::Single(rule) => trigger_node(rule, rng),
        ExampleKind::Joint => joint_trigger(),
    };
    let mut root = statement(rhs_slot(payload, rng), rng);
    if let ExampleKind::Single(_) = kind {
        if rng.random_bool(noise) {
            set_noise_flag(&mut root, rng);
        }
    }
    let ast = insert_virtual_roots(Ast::new(root));
    let labels = match kind {
        ExampleKind::Single(rule) => {
            let target = position_of(&ast, TRIGGER_VALUES[rule]);
            [(target, single_rule_transform(rule))].into_iter().collect()
        }
        ExampleKind::Joint => {
            let target = position_of(&ast, "v_unset");
            // The statement's virtual root is the tree root for
            // per-statement trees.
            [(target, TransformName::VarRwVar), (1u32, TransformName::WrapIfN)]
                .into_iter()
                .collect()
        }
    };
    TransformLabeling { ast, labels }
}

/// Marks a random attribute-free variable with the joint trigger flag.
fn set_noise_flag(root: &mut Node, rng: &mut ChaCha8Rng) {
    fn collect<'a>(node: &'a mut Node, out: &mut Vec<&'a mut Node>) {
        if node.label == Label::VariableAccess && node.attrs.is_empty() {
            out.push(node);
            return;
        }
        for child in &mut node.children {
            collect(child, out);
        }
    }
    let mut vars = Vec::new();
    collect(root, &mut vars);
    if let Some(node) = vars.choose_mut(rng) {
        node.attrs
            .insert(attrs::LOCAL_UNASSIGNED_BEFORE.to_owned(), serde_json::Value::Bool(true));
    }
}

/// Generates the train/test corpus for a configuration. Identical
/// configurations produce identical corpora.
pub fn planted_corpus(config: &PlantedConfig) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut train = Vec::with_capacity(config.train);
    for i in 0..config.train {
        let kind = if rng.random_bool(config.joint_fraction) {
            ExampleKind::Joint
        } else {
            ExampleKind::Single(i % SINGLE_RULE_COUNT)
        };
        train.push(generate(kind, config.trigger_noise, &mut rng));
    }
    let mut test = Vec::with_capacity(config.test_single + config.test_joint);
    for i in 0..config.test_single {
        let kind = ExampleKind::Single(i % SINGLE_RULE_COUNT);
        test.push(PlantedExample {
            labeling: generate(kind, config.trigger_noise, &mut rng),
            kind,
        });
    }
    for _ in 0..config.test_joint {
        test.push(PlantedExample {
            labeling: generate(ExampleKind::Joint, config.trigger_noise, &mut rng),
            kind: ExampleKind::Joint,
        });
    }
    PlantedCorpus { train, test }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible_and_shaped() {
        let config = PlantedConfig { train: 60, test_single: 12, test_joint: 6, ..Default::default() };
        let a = planted_corpus(&config);
        let b = planted_corpus(&config);
        assert_eq!(a.train.len(), 60);
        assert_eq!(a.test.len(), 18);
        for (x, y) in a.train.iter().zip(&b.train) {
            assert_eq!(x.labels, y.labels);
            assert!(x.ast.isomorphic(&y.ast));
            assert_eq!(x.ast.root.label, Label::VirtualRoot);
        }
        let joints = a.train.iter().filter(|t| t.active_count() == 2).count();
        assert!(joints >= 1);
        // Joint examples label the virtual root with a wrap transform.
        for t in &a.train {
            if t.active_count() == 2 {
                assert_eq!(t.get(1), TransformName::WrapIfN);
            }
        }
    }
}
