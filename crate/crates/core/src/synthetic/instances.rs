//! Random small CRF instances (tree + model) for exactness testing of the
//! junction-tree inference against brute-force enumeration.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Ast, Label, Node};
use crate::crf::{AdmissibleSets, Hyper, Model};
use crate::features::{attrs, build_indicator_vocab, FeatureVocabulary};
use crate::transform::{TransformLabeling, TransformName};

/// A random tree with a random model over it.
pub struct RandomInstance {
    pub ast: Ast,
    pub model: Model,
}

const LABEL_POOL: [Label; 6] = [
    Label::VariableAccess,
    Label::MethodCall,
    Label::Literal,
    Label::BinaryOperator,
    Label::Assignment,
    Label::Block,
];

const VALUE_POOL: [&str; 5] = ["x", "y", "f", "0", "null"];

/// Draws a random instance: a tree of up to `max_nodes` nodes, a transform
/// alphabet of up to `max_transforms` names (always containing `EMPTY`),
/// random admissible sets that keep the all-`EMPTY` assignment, indicator
/// features over tuples that can occur, and weights uniform in
/// `[-weight_range, weight_range]`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    max_transforms: usize,
    weight_range: f64,
) -> RandomInstance {
    // -- Random tree ---------------------------------------------------------
    let n = rng.random_range(1..=max_nodes);
    let mut nodes: Vec<Node> = (0..n)
        .map(|_| {
            let mut node = Node::new(*LABEL_POOL.choose(rng).unwrap());
            if rng.random_bool(0.8) {
                node.value = Some((*VALUE_POOL.choose(rng).unwrap()).to_owned());
            }
            // Sprinkle attributes so observation features have signal.
            for attr in [attrs::TYPE_PRIMITIVE, attrs::HAS_OVERLOADS, attrs::SIMILAR_USE_NULL_GUARD]
            {
                if rng.random_bool(0.3) {
                    node.attrs.insert(attr.to_owned(), serde_json::Value::Bool(true));
                }
            }
            node
        })
        .collect();
    // Attach nodes back to front so each node picks a parent among the
    // earlier ones.
    while nodes.len() > 1 {
        let child = nodes.pop().unwrap();
        let parent = rng.random_range(0..nodes.len());
        nodes[parent].children.insert(0, child);
    }
    let ast = Ast::new(nodes.pop().unwrap());

    // -- Transform alphabet --------------------------------------------------
    let extra = rng.random_range(1..max_transforms);
    let mut pool = vec![TransformName::Empty];
    let mut actual: Vec<TransformName> = TransformName::actual().collect();
    for _ in 0..extra {
        let i = rng.random_range(0..actual.len());
        pool.push(actual.swap_remove(i));
    }
    pool.sort_by_key(|t| t.ordinal());

    // -- Admissible sets over the labels/pairs/triples present ---------------
    let view = ast.view();
    let mut admissible = AdmissibleSets::default();
    let subset = |rng: &mut ChaCha8Rng, pool: &[TransformName]| -> BTreeSet<TransformName> {
        let mut set: BTreeSet<TransformName> = BTreeSet::from([TransformName::Empty]);
        for t in pool {
            if rng.random_bool(0.7) {
                set.insert(*t);
            }
        }
        set
    };
    for p in 1..=ast.node_count {
        let label = view.node(p).label;
        admissible.node.entry(label).or_insert_with(|| subset(rng, &pool));
    }
    for p in 1..=ast.node_count {
        let lp = view.node(p).label;
        let children = view.children_of(p);
        for c in children {
            let key = (lp, view.node(*c).label);
            if !admissible.edge.contains_key(&key) {
                let mut pairs = BTreeSet::from([(TransformName::Empty, TransformName::Empty)]);
                for a in &admissible.node[&key.0] {
                    for b in &admissible.node[&key.1] {
                        if rng.random_bool(0.8) {
                            pairs.insert((*a, *b));
                        }
                    }
                }
                admissible.edge.insert(key, pairs);
            }
        }
        for pair in children.windows(2) {
            let key = (lp, view.node(pair[0]).label, view.node(pair[1]).label);
            if !admissible.triangle.contains_key(&key) {
                let mut triples = BTreeSet::from([(
                    TransformName::Empty,
                    TransformName::Empty,
                    TransformName::Empty,
                )]);
                for a in &admissible.node[&key.0] {
                    for b in &admissible.node[&key.1] {
                        for c in &admissible.node[&key.2] {
                            if rng.random_bool(0.85) {
                                triples.insert((*a, *b, *c));
                            }
                        }
                    }
                }
                admissible.triangle.insert(key, triples);
            }
        }
    }

    // -- Vocabulary: viable = admissible node sets; indicators mined from a
    //    few random labelings of this very tree ------------------------------
    let viable: BTreeMap<Label, BTreeSet<TransformName>> = Label::ALL
        .iter()
        .map(|l| {
            (
                *l,
                admissible
                    .node
                    .get(l)
                    .cloned()
                    .unwrap_or_else(|| BTreeSet::from([TransformName::Empty])),
            )
        })
        .collect();
    let mut labelings = Vec::new();
    for _ in 0..4 {
        let labels = (1..=ast.node_count)
            .filter_map(|p| {
                let domain: Vec<TransformName> =
                    admissible.node[&view.node(p).label].iter().copied().collect();
                let t = *domain.choose(rng).unwrap();
                (t != TransformName::Empty).then_some((p, t))
            })
            .collect();
        labelings.push(TransformLabeling { ast: ast.clone(), labels });
    }
    drop(view);
    let vocab = FeatureVocabulary::with_viable(viable, build_indicator_vocab(&labelings));

    let mut model = Model::new(vocab, admissible, Hyper::default());
    for w in &mut model.weights {
        *w = rng.random_range(-weight_range..=weight_range);
    }
    RandomInstance { ast, model }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn instances_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let ia = random_instance(&mut a, 8, 4, 2.0);
        let ib = random_instance(&mut b, 8, 4, 2.0);
        assert!(ia.ast.isomorphic(&ib.ast));
        assert_eq!(ia.model.weights, ib.model.weights);
    }

    #[test]
    fn bp_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let inst = random_instance(&mut rng, 8, 4, 2.0);
            let brute = crate::crf::brute_force_inference(&inst.ast, &inst.model).unwrap();
            let (log_z, marginals) =
                crate::crf::log_partition_and_marginals(&inst.ast, &inst.model).unwrap();
            assert!(
                (log_z - brute.log_z).abs() < 1e-9,
                "logZ mismatch: {log_z} vs {}",
                brute.log_z
            );
            for (bp, bf) in marginals.distributions.iter().zip(&brute.marginals.distributions) {
                assert_eq!(bp.len(), bf.len());
                for ((ta, pa), (tb, pb)) in bp.iter().zip(bf) {
                    assert_eq!(ta, tb);
                    assert!((pa - pb).abs() < 1e-9, "marginal mismatch {pa} vs {pb}");
                }
            }
            // MAP and top-5 agree with the exhaustively ranked list.
            let compiled = inst.model.compile(&inst.ast).unwrap();
            let top = compiled.top_k(&inst.model.weights, 5).unwrap();
            let expect: Vec<(Vec<TransformName>, f64)> = brute
                .ranked
                .iter()
                .take(5)
                .map(|(t, s)| (t.clone(), (s - brute.log_z).exp()))
                .collect();
            assert!(
                crate::crf::ranked_lists_match(&top, &expect, 1e-9),
                "top-k mismatch:\n{top:?}\nvs\n{expect:?}"
            );
        }
    }
}
