//! The conditional random field over transforms: clique graph, junction
//! tree, admissibility constraints, and exact inference (partition
//! function, marginals, MAP, top-k) plus the brute-force oracle.

mod brute;
mod cliques;
mod compile;
mod inference;
mod model;

pub use brute::{
    brute_force_inference, ranked_lists_match, score_assignment, BruteForceResult,
    BRUTE_FORCE_LIMIT,
};
pub use cliques::{build_clique_graph, Clique};
pub use compile::{CompiledInstance, JtTable};
pub use inference::{keep_top_k, Candidate, Marginals, SCORE_TIE_EPS};
pub use junction::{build_junction_tree, JunctionTree};
pub use model::{parse_model, serialize_model, AdmissibleSets, Hyper, Model};

mod junction;

use crate::ast::Ast;
use crate::error::Result;
use crate::transform::{TransformLabeling, TransformName};

/// Builds the admissibility constraint sets from training data.
pub fn build_admissible_sets(data: &[TransformLabeling]) -> AdmissibleSets {
    AdmissibleSets::build(data)
}

/// Log-partition function and per-clique marginal distributions.
pub fn log_partition_and_marginals(ast: &Ast, model: &Model) -> Result<(f64, Marginals)> {
    model.compile(ast)?.clique_marginals(&model.weights)
}

/// The most likely admissible labeling.
pub fn map_assignment(ast: &Ast, model: &Model) -> Result<TransformLabeling> {
    let dense = model.compile(ast)?.map_assignment(&model.weights)?;
    Ok(dense_to_labeling(ast, &dense))
}

/// The k most likely admissible labelings with their probabilities,
/// descending. Shorter when fewer admissible assignments exist.
pub fn top_k(ast: &Ast, model: &Model, k: usize) -> Result<Vec<(TransformLabeling, f64)>> {
    let ranked = model.compile(ast)?.top_k(&model.weights, k)?;
    Ok(ranked.into_iter().map(|(dense, p)| (dense_to_labeling(ast, &dense), p)).collect())
}

pub(crate) fn dense_to_labeling(ast: &Ast, dense: &[TransformName]) -> TransformLabeling {
    TransformLabeling {
        ast: ast.clone(),
        labels: dense
            .iter()
            .enumerate()
            .filter(|(_, t)| **t != TransformName::Empty)
            .map(|(i, t)| (i as u32 + 1, *t))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Label, Node};
    use crate::features::FeatureVocabulary;
    use std::collections::{BTreeMap, BTreeSet};

    /// A model whose admissible sets allow the given transforms on every
    /// label, with an empty vocabulary (all scores zero).
    fn uniform_model(transforms: &[TransformName]) -> Model {
        let mut admissible = AdmissibleSets::default();
        for label in Label::ALL {
            admissible.node.insert(label, transforms.iter().copied().collect());
            for other in Label::ALL {
                let mut pairs = BTreeSet::new();
                for a in transforms {
                    for b in transforms {
                        pairs.insert((*a, *b));
                    }
                }
                admissible.edge.insert((label, other), pairs);
            }
        }
        let vocab = FeatureVocabulary::from_parts(
            BTreeMap::new(),
            Vec::new(),
            Vec::new(),
            Vec::new(),
            Vec::new(),
            Vec::new(),
        );
        Model::new(vocab, admissible, Hyper::default())
    }

    #[test]
    fn single_node_uniform_partition() {
        // Two admissible transforms, zero weights: logZ = ln 2, marginals
        // uniform.
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        let model = uniform_model(&[TransformName::Empty, TransformName::ConstantRep]);
        let (log_z, marginals) = log_partition_and_marginals(&ast, &model).unwrap();
        assert!((log_z - 2.0f64.ln()).abs() < 1e-12);
        let dist = &marginals.distributions[0];
        assert_eq!(dist.len(), 2);
        for (_, p) in dist {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_map_is_all_empty() {
        let ast = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::Literal, "0"),
        ]));
        let model = uniform_model(&[TransformName::Empty, TransformName::ConstantRep]);
        let map = map_assignment(&ast, &model).unwrap();
        assert!(map.labels.is_empty(), "lexicographic tie-break prefers EMPTY");
    }

    #[test]
    fn top_k_is_consistent_with_map() {
        let ast = Ast::new(Node::new(Label::Return).with_children(vec![Node::valued(
            Label::Literal,
            "1",
        )]));
        let model = uniform_model(&[
            TransformName::Empty,
            TransformName::ConstantRep,
            TransformName::VarRwVar,
        ]);
        let top = top_k(&ast, &model, 3).unwrap();
        let map = map_assignment(&ast, &model).unwrap();
        assert_eq!(top[0].0.labels, map.labels);
        // Probabilities descending and summing to <= 1.
        for pair in top.windows(2) {
            assert!(pair[0].1 >= pair[1].1 - 1e-12);
        }
        let sum: f64 = top.iter().map(|(_, p)| p).sum();
        assert!(sum <= 1.0 + 1e-9);
    }

    #[test]
    fn more_than_available_returns_all() {
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        let model = uniform_model(&[TransformName::Empty, TransformName::ConstantRep]);
        let top = top_k(&ast, &model, 10).unwrap();
        assert_eq!(top.len(), 2);
        let total: f64 = top.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_refuses_oversized() {
        // 20 positions x 17 transforms each overflows the guard.
        let children: Vec<Node> =
            (0..19).map(|i| Node::valued(Label::Literal, i.to_string())).collect();
        let ast = Ast::new(Node::new(Label::Block).with_children(children));
        let model = uniform_model(&TransformName::ALL);
        let err = brute_force_inference(&ast, &model).unwrap_err();
        assert!(matches!(err, crate::error::Error::BruteForceTooLarge { .. }));
    }

    #[test]
    fn single_firing_feature_scores_its_weight() {
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        let data = vec![TransformLabeling {
            ast: ast.clone(),
            labels: [(1u32, TransformName::ConstantRep)].into_iter().collect(),
        }];
        let vocab = FeatureVocabulary::build(&data);
        let admissible = AdmissibleSets::build(&data);
        let mut model = Model::new(vocab, admissible, Hyper::default());
        // Only the (Constant-Rep, Literal) node indicator exists for this
        // label (no characteristics on literals); find it and weight it.
        let id = model
            .vocab
            .node_indicator
            .iter()
            .position(|t| *t == (TransformName::ConstantRep, Label::Literal))
            .unwrap()
            + model.vocab.observation.len();
        model.weights[id] = 2.0;
        let labeling = TransformLabeling {
            ast: ast.clone(),
            labels: [(1u32, TransformName::ConstantRep)].into_iter().collect(),
        };
        assert!((score_assignment(&ast, &labeling, &model) - 2.0).abs() < 1e-12);
        // Inadmissible transform scores negative infinity.
        let bad = TransformLabeling {
            ast: ast.clone(),
            labels: [(1u32, TransformName::WrapTry)].into_iter().collect(),
        };
        assert_eq!(score_assignment(&ast, &bad, &model), f64::NEG_INFINITY);
    }
}
