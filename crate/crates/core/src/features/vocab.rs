//! Feature vocabularies and sparse activation.
//!
//! Observation features pair a node characteristic with a transform from the
//! label's viable set, in direct (characteristic holds) and inverse
//! (characteristic fails) flavors; they fire on node cliques only. Indicator
//! features are membership tests of (transform, label) tuples mined from the
//! training data, one feature per observed node, edge, and triangle tuple,
//! plus the same-value triangle variant that additionally requires the two
//! child values to match.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ast::{AstView, Label};
use crate::crf::Clique;
use crate::features::characteristics::{registry, CharacteristicId, CharacteristicVector};
use crate::transform::{TransformLabeling, TransformName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Direct,
    Inverse,
}

/// One observation feature: fires on a node clique when the node has this
/// label, the assignment is this transform, and the characteristic holds
/// (direct) or fails (inverse).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObsFeature {
    pub label: Label,
    pub transform: TransformName,
    pub characteristic: CharacteristicId,
    pub direction: Direction,
}

pub type EdgeTuple = (TransformName, Label, TransformName, Label);
pub type TriangleTuple = (TransformName, Label, TransformName, Label, TransformName, Label);

/// Viable transform sets T(L): transforms observed at least once on nodes of
/// each label, with `EMPTY` always included.
pub fn build_viable_transform_sets(
    data: &[TransformLabeling],
) -> BTreeMap<Label, BTreeSet<TransformName>> {
    let mut viable: BTreeMap<Label, BTreeSet<TransformName>> = Label::ALL
        .iter()
        .map(|l| (*l, BTreeSet::from([TransformName::Empty])))
        .collect();
    for example in data {
        let view = example.ast.view();
        for position in 1..=example.ast.node_count {
            viable
                .get_mut(&view.node(position).label)
                .expect("all labels present")
                .insert(example.get(position));
        }
    }
    viable
}

/// The mined indicator tuple sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndicatorSets {
    pub node: BTreeSet<(TransformName, Label)>,
    pub edge: BTreeSet<EdgeTuple>,
    pub triangle: BTreeSet<TriangleTuple>,
    pub triangle_spe: BTreeSet<TriangleTuple>,
}

/// Unions the per-example observed tuple sets over the whole data set.
pub fn build_indicator_vocab(data: &[TransformLabeling]) -> IndicatorSets {
    let mut sets = IndicatorSets::default();
    for example in data {
        let view = example.ast.view();
        for p in 1..=example.ast.node_count {
            let (tp, lp) = (example.get(p), view.node(p).label);
            sets.node.insert((tp, lp));
            let children = view.children_of(p);
            for c in children {
                sets.edge.insert((tp, lp, example.get(*c), view.node(*c).label));
            }
            for pair in children.windows(2) {
                let (l, r) = (pair[0], pair[1]);
                let tuple = (
                    tp,
                    lp,
                    example.get(l),
                    view.node(l).label,
                    example.get(r),
                    view.node(r).label,
                );
                sets.triangle.insert(tuple);
                if view.node(l).label == view.node(r).label
                    && view.node(l).value == view.node(r).value
                {
                    sets.triangle_spe.insert(tuple);
                }
            }
        }
    }
    sets
}

/// The complete feature vocabulary with a fixed feature-id layout:
/// observation features first, then node, edge, triangle, and same-value
/// triangle indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVocabulary {
    pub viable: BTreeMap<Label, BTreeSet<TransformName>>,
    pub observation: Vec<ObsFeature>,
    pub node_indicator: Vec<(TransformName, Label)>,
    pub edge_indicator: Vec<EdgeTuple>,
    pub triangle_indicator: Vec<TriangleTuple>,
    pub triangle_spe_indicator: Vec<TriangleTuple>,
    obs_index: HashMap<ObsFeature, u32>,
    node_index: HashMap<(TransformName, Label), u32>,
    edge_index: HashMap<EdgeTuple, u32>,
    triangle_index: HashMap<TriangleTuple, u32>,
    triangle_spe_index: HashMap<TriangleTuple, u32>,
}

impl FeatureVocabulary {
    /// Builds the canonical vocabulary from training data: viable sets and
    /// indicator tuples mined from the data, observation features enumerated
    /// for every `(L, t in T(L), c in C^L, direction)`.
    pub fn build(data: &[TransformLabeling]) -> FeatureVocabulary {
        FeatureVocabulary::with_viable(build_viable_transform_sets(data), build_indicator_vocab(data))
    }

    /// Canonical vocabulary from explicit viable sets and indicator tuples.
    pub fn with_viable(
        viable: BTreeMap<Label, BTreeSet<TransformName>>,
        sets: IndicatorSets,
    ) -> FeatureVocabulary {
        let reg = registry();
        let mut observation = Vec::new();
        for label in Label::ALL {
            let characteristics = reg.for_label(label);
            if characteristics.is_empty() {
                continue;
            }
            let Some(transforms) = viable.get(&label) else { continue };
            for transform in transforms {
                for c in characteristics {
                    for direction in [Direction::Direct, Direction::Inverse] {
                        observation.push(ObsFeature {
                            label,
                            transform: *transform,
                            characteristic: *c,
                            direction,
                        });
                    }
                }
            }
        }
        FeatureVocabulary::from_parts(
            viable,
            observation,
            sets.node.into_iter().collect(),
            sets.edge.into_iter().collect(),
            sets.triangle.into_iter().collect(),
            sets.triangle_spe.into_iter().collect(),
        )
    }

    /// Reassembles a vocabulary from explicit feature lists (model files,
    /// synthetic instances). List order defines feature ids.
    pub fn from_parts(
        viable: BTreeMap<Label, BTreeSet<TransformName>>,
        observation: Vec<ObsFeature>,
        node_indicator: Vec<(TransformName, Label)>,
        edge_indicator: Vec<EdgeTuple>,
        triangle_indicator: Vec<TriangleTuple>,
        triangle_spe_indicator: Vec<TriangleTuple>,
    ) -> FeatureVocabulary {
        let mut next = 0u32;
        let mut index = |count: usize| {
            let start = next;
            next += count as u32;
            start
        };
        let obs_base = index(observation.len());
        let node_base = index(node_indicator.len());
        let edge_base = index(edge_indicator.len());
        let tri_base = index(triangle_indicator.len());
        let spe_base = index(triangle_spe_indicator.len());
        let obs_index =
            observation.iter().enumerate().map(|(i, f)| (*f, obs_base + i as u32)).collect();
        let node_index =
            node_indicator.iter().enumerate().map(|(i, f)| (*f, node_base + i as u32)).collect();
        let edge_index =
            edge_indicator.iter().enumerate().map(|(i, f)| (*f, edge_base + i as u32)).collect();
        let triangle_index = triangle_indicator
            .iter()
            .enumerate()
            .map(|(i, f)| (*f, tri_base + i as u32))
            .collect();
        let triangle_spe_index = triangle_spe_indicator
            .iter()
            .enumerate()
            .map(|(i, f)| (*f, spe_base + i as u32))
            .collect();
        FeatureVocabulary {
            viable,
            observation,
            node_indicator,
            edge_indicator,
            triangle_indicator,
            triangle_spe_indicator,
            obs_index,
            node_index,
            edge_index,
            triangle_index,
            triangle_spe_index,
        }
    }

    /// Total number of features K.
    pub fn feature_count(&self) -> usize {
        self.observation.len()
            + self.node_indicator.len()
            + self.edge_indicator.len()
            + self.triangle_indicator.len()
            + self.triangle_spe_indicator.len()
    }

    pub fn viable_for(&self, label: Label) -> Option<&BTreeSet<TransformName>> {
        self.viable.get(&label)
    }

    /// Feature ids firing (with value 1) for a clique under an assignment.
    /// `assignment` arity must match the clique arity.
    pub fn activate(
        &self,
        clique: &Clique,
        assignment: &[TransformName],
        chars: &CharacteristicVector,
        view: &AstView<'_>,
    ) -> Vec<u32> {
        let mut fired = Vec::new();
        match *clique {
            Clique::Node(p) => {
                debug_assert_eq!(assignment.len(), 1);
                let t = assignment[0];
                let label = view.node(p).label;
                if self.viable.get(&label).is_some_and(|set| set.contains(&t)) {
                    for c in registry().for_label(label) {
                        let direction = if chars.get(p, *c) {
                            Direction::Direct
                        } else {
                            Direction::Inverse
                        };
                        let key = ObsFeature { label, transform: t, characteristic: *c, direction };
                        if let Some(id) = self.obs_index.get(&key) {
                            fired.push(*id);
                        }
                    }
                }
                if let Some(id) = self.node_index.get(&(t, label)) {
                    fired.push(*id);
                }
            }
            Clique::Edge(p, c) => {
                debug_assert_eq!(assignment.len(), 2);
                let tuple =
                    (assignment[0], view.node(p).label, assignment[1], view.node(c).label);
                if let Some(id) = self.edge_index.get(&tuple) {
                    fired.push(*id);
                }
            }
            Clique::Triangle(p, l, r) => {
                debug_assert_eq!(assignment.len(), 3);
                let tuple = (
                    assignment[0],
                    view.node(p).label,
                    assignment[1],
                    view.node(l).label,
                    assignment[2],
                    view.node(r).label,
                );
                if let Some(id) = self.triangle_index.get(&tuple) {
                    fired.push(*id);
                }
                if view.node(l).value == view.node(r).value {
                    if let Some(id) = self.triangle_spe_index.get(&tuple) {
                        fired.push(*id);
                    }
                }
            }
        }
        fired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Node};
    use crate::features::characteristics::{attrs, compute_characteristics};

    fn labeled(ast: Ast, labels: &[(u32, TransformName)]) -> TransformLabeling {
        TransformLabeling { ast, labels: labels.iter().copied().collect() }
    }

    fn two_node_example() -> TransformLabeling {
        let ast = Ast::new(
            Node::new(Label::Assignment).with_children(vec![Node::valued(Label::Literal, "0")]),
        );
        labeled(ast, &[(2, TransformName::ConstantRep)])
    }

    #[test]
    fn viable_sets_from_observations() {
        let data = vec![two_node_example()];
        let viable = build_viable_transform_sets(&data);
        assert_eq!(
            viable[&Label::Literal],
            BTreeSet::from([TransformName::Empty, TransformName::ConstantRep])
        );
        // A label never seen with a transform keeps only EMPTY.
        assert_eq!(viable[&Label::MethodCall], BTreeSet::from([TransformName::Empty]));
    }

    #[test]
    fn edge_tuples_from_single_example() {
        let data = vec![two_node_example()];
        let sets = build_indicator_vocab(&data);
        assert_eq!(
            sets.edge,
            BTreeSet::from([(
                TransformName::Empty,
                Label::Assignment,
                TransformName::ConstantRep,
                Label::Literal,
            )])
        );
        assert!(sets.triangle.is_empty());
    }

    #[test]
    fn empty_corpus_gives_empty_indicators() {
        let sets = build_indicator_vocab(&[]);
        assert!(sets.node.is_empty());
        assert!(sets.edge.is_empty());
        assert!(sets.triangle.is_empty());
        assert!(sets.triangle_spe.is_empty());
    }

    #[test]
    fn spe_triangle_requires_equal_values() {
        let equal = Ast::new(Node::new(Label::BinaryOperator).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::VariableAccess, "x"),
        ]));
        let distinct = Ast::new(Node::new(Label::BinaryOperator).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::VariableAccess, "y"),
        ]));
        let sets = build_indicator_vocab(&[labeled(equal, &[]), labeled(distinct, &[])]);
        assert_eq!(sets.triangle.len(), 1);
        assert_eq!(sets.triangle_spe.len(), 1);
    }

    #[test]
    fn vocabulary_monotone_under_more_data() {
        let small = FeatureVocabulary::build(&[two_node_example()]);
        let extra = labeled(
            Ast::new(Node::valued(Label::VariableAccess, "v")),
            &[(1, TransformName::VarRwVar)],
        );
        let big = FeatureVocabulary::build(&[two_node_example(), extra]);
        let small_nodes: BTreeSet<_> = small.node_indicator.iter().collect();
        let big_nodes: BTreeSet<_> = big.node_indicator.iter().collect();
        assert!(small_nodes.is_subset(&big_nodes));
        assert!(big.feature_count() > small.feature_count());
    }

    #[test]
    fn activation_fires_direct_and_indicator() {
        let ast = Ast::new(
            Node::valued(Label::MethodCall, "m").with_attr(attrs::HAS_OVERLOADS, true),
        );
        let data = vec![labeled(ast.clone(), &[(1, TransformName::MethRwMeth)])];
        let vocab = FeatureVocabulary::build(&data);
        let chars = compute_characteristics(&ast);
        let view = ast.view();
        let fired =
            vocab.activate(&Clique::Node(1), &[TransformName::MethRwMeth], &chars, &view);
        // 20 observation features (one per characteristic of MethodCall)
        // plus the (Meth-RW-Meth, MethodCall) node indicator.
        assert_eq!(fired.len(), 21);
        let m12 = registry().by_name("M12").unwrap();
        let direct_m12 = vocab
            .observation
            .iter()
            .position(|f| {
                f.label == Label::MethodCall
                    && f.transform == TransformName::MethRwMeth
                    && f.characteristic == m12
                    && f.direction == Direction::Direct
            })
            .unwrap() as u32;
        assert!(fired.contains(&direct_m12));

        // EMPTY with no true characteristics fires only inverse features.
        let bare = Ast::new(Node::valued(Label::MethodCall, "m"));
        let bare_chars = compute_characteristics(&bare);
        let bare_view = bare.view();
        let fired_empty =
            vocab.activate(&Clique::Node(1), &[TransformName::Empty], &bare_chars, &bare_view);
        let all_inverse = fired_empty
            .iter()
            .filter(|id| (**id as usize) < vocab.observation.len())
            .all(|id| vocab.observation[*id as usize].direction == Direction::Inverse);
        assert!(all_inverse);
    }

    #[test]
    fn activation_is_pure() {
        let ast = Ast::new(Node::valued(Label::VariableAccess, "x"));
        let data = vec![labeled(ast.clone(), &[(1, TransformName::VarRwVar)])];
        let vocab = FeatureVocabulary::build(&data);
        let chars = compute_characteristics(&ast);
        let view = ast.view();
        let a = vocab.activate(&Clique::Node(1), &[TransformName::VarRwVar], &chars, &view);
        let b = vocab.activate(&Clique::Node(1), &[TransformName::VarRwVar], &chars, &view);
        assert_eq!(a, b);
    }
}
