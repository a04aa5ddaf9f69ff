//! The trained model: feature vocabulary, weights, admissibility
//! constraints, hyperparameters, and the JSON model-file format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ast::Label;
use crate::error::{Error, Result};
use crate::features::{registry, Direction, FeatureVocabulary, ObsFeature};
use crate::transform::{TransformLabeling, TransformName};

/// Model hyperparameters, recorded in the model file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    /// Gaussian regularization denominator (the objective subtracts
    /// lambda^2 / (2 * delta2)).
    pub delta2: f64,
    /// Magnitude of the distribution-aware prior.
    pub q: f64,
    /// Gradient-evaluation budget used in training.
    pub iters: u32,
    /// Default k for ranked prediction.
    pub k_default: u32,
}

impl Default for Hyper {
    fn default() -> Hyper {
        Hyper { delta2: 500.0, q: 0.5, iters: 200, k_default: 3 }
    }
}

/// Training-data-derived hard constraints: tuples of transforms admissible
/// for node labels, label pairs (parent, child), and label triples (parent,
/// left child, right child). An all-`EMPTY` tuple is always admissible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmissibleSets {
    pub node: BTreeMap<Label, BTreeSet<TransformName>>,
    pub edge: BTreeMap<(Label, Label), BTreeSet<(TransformName, TransformName)>>,
    pub triangle:
        BTreeMap<(Label, Label, Label), BTreeSet<(TransformName, TransformName, TransformName)>>,
}

impl AdmissibleSets {
    /// Mines the admissible tuples from training data. Every tuple observed
    /// on a node, parent-child edge, or (parent, adjacent siblings) triangle
    /// becomes admissible; `EMPTY` is explicitly admissible for every label
    /// that occurs.
    pub fn build(data: &[TransformLabeling]) -> AdmissibleSets {
        let mut sets = AdmissibleSets::default();
        for example in data {
            let view = example.ast.view();
            for p in 1..=example.ast.node_count {
                let (tp, lp) = (example.get(p), view.node(p).label);
                let node_entry = sets.node.entry(lp).or_default();
                node_entry.insert(tp);
                node_entry.insert(TransformName::Empty);
                let children = view.children_of(p);
                for c in children {
                    sets.edge
                        .entry((lp, view.node(*c).label))
                        .or_default()
                        .insert((tp, example.get(*c)));
                }
                for pair in children.windows(2) {
                    let (l, r) = (pair[0], pair[1]);
                    sets.triangle
                        .entry((lp, view.node(l).label, view.node(r).label))
                        .or_default()
                        .insert((tp, example.get(l), example.get(r)));
                }
            }
        }
        sets
    }

    /// Transform domain for a node label: the admissible set, or just
    /// `EMPTY` for a label never seen in training.
    pub fn node_domain(&self, label: Label) -> Vec<TransformName> {
        match self.node.get(&label) {
            Some(set) => set.iter().copied().collect(),
            None => {
                log::warn!("label {label} unseen in training; transform domain collapses to EMPTY");
                vec![TransformName::Empty]
            }
        }
    }

    /// Edge violation predicate, inverted: true when the assignment is
    /// admissible. An unseen label pair is unconstrained.
    pub fn edge_ok(
        &self,
        labels: (Label, Label),
        ts: (TransformName, TransformName),
    ) -> bool {
        if ts.0 == TransformName::Empty && ts.1 == TransformName::Empty {
            return true;
        }
        self.edge.get(&labels).map_or(true, |set| set.contains(&ts))
    }

    /// Triangle violation predicate, inverted.
    pub fn triangle_ok(
        &self,
        labels: (Label, Label, Label),
        ts: (TransformName, TransformName, TransformName),
    ) -> bool {
        if ts.0 == TransformName::Empty
            && ts.1 == TransformName::Empty
            && ts.2 == TransformName::Empty
        {
            return true;
        }
        self.triangle.get(&labels).map_or(true, |set| set.contains(&ts))
    }
}

/// A complete prediction model.
#[derive(Debug, Clone)]
pub struct Model {
    pub vocab: FeatureVocabulary,
    /// One weight per feature id.
    pub weights: Vec<f64>,
    pub admissible: AdmissibleSets,
    pub hyper: Hyper,
}

impl Model {
    pub fn new(vocab: FeatureVocabulary, admissible: AdmissibleSets, hyper: Hyper) -> Model {
        let weights = vec![0.0; vocab.feature_count()];
        Model { vocab, weights, admissible, hyper }
    }

    pub fn feature_count(&self) -> usize {
        self.vocab.feature_count()
    }
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MetaDoc {
    delta2: f64,
    q: f64,
    iters: u32,
    /// Content fingerprint of the rest of the file; stable across runs with
    /// identical inputs.
    created: String,
}

#[derive(Serialize, Deserialize)]
struct AlphabetsDoc {
    labels: Vec<String>,
    transforms: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ObsFeatureDoc {
    label: Label,
    transform: TransformName,
    characteristic: String,
    direction: Direction,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum IndicatorDoc {
    Node { tuple: (TransformName, Label) },
    Edge { tuple: (TransformName, Label, TransformName, Label) },
    Triangle { tuple: (TransformName, Label, TransformName, Label, TransformName, Label) },
    TriangleSpe { tuple: (TransformName, Label, TransformName, Label, TransformName, Label) },
}

#[derive(Serialize, Deserialize)]
struct EdgeAdmissibleDoc {
    labels: (Label, Label),
    pairs: Vec<(TransformName, TransformName)>,
}

#[derive(Serialize, Deserialize)]
struct TriangleAdmissibleDoc {
    labels: (Label, Label, Label),
    triples: Vec<(TransformName, TransformName, TransformName)>,
}

#[derive(Serialize, Deserialize)]
struct AdmissibleDoc {
    node: BTreeMap<Label, Vec<TransformName>>,
    edge: Vec<EdgeAdmissibleDoc>,
    triangle: Vec<TriangleAdmissibleDoc>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    meta: MetaDoc,
    alphabets: AlphabetsDoc,
    viable: BTreeMap<Label, Vec<TransformName>>,
    admissible: AdmissibleDoc,
    observation_features: Vec<ObsFeatureDoc>,
    indicator_features: Vec<IndicatorDoc>,
    weights: Vec<f64>,
}

/// FNV-1a over the serialized body; cheap, deterministic provenance tag.
fn fingerprint(bytes: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Serializes a model to the JSON model-file format. Identical models
/// produce byte-identical files.
pub fn serialize_model(model: &Model) -> String {
    let vocab = &model.vocab;
    let doc = ModelDoc {
        meta: MetaDoc {
            delta2: model.hyper.delta2,
            q: model.hyper.q,
            iters: model.hyper.iters,
            created: String::new(),
        },
        alphabets: AlphabetsDoc {
            labels: Label::ALL.iter().map(|l| l.name().to_owned()).collect(),
            transforms: TransformName::ALL.iter().map(|t| t.name().to_owned()).collect(),
        },
        viable: vocab.viable.iter().map(|(l, set)| (*l, set.iter().copied().collect())).collect(),
        admissible: AdmissibleDoc {
            node: model
                .admissible
                .node
                .iter()
                .map(|(l, set)| (*l, set.iter().copied().collect()))
                .collect(),
            edge: model
                .admissible
                .edge
                .iter()
                .map(|(labels, set)| EdgeAdmissibleDoc {
                    labels: *labels,
                    pairs: set.iter().copied().collect(),
                })
                .collect(),
            triangle: model
                .admissible
                .triangle
                .iter()
                .map(|(labels, set)| TriangleAdmissibleDoc {
                    labels: *labels,
                    triples: set.iter().copied().collect(),
                })
                .collect(),
        },
        observation_features: vocab
            .observation
            .iter()
            .map(|f| ObsFeatureDoc {
                label: f.label,
                transform: f.transform,
                characteristic: registry().name(f.characteristic).to_owned(),
                direction: f.direction,
            })
            .collect(),
        indicator_features: vocab
            .node_indicator
            .iter()
            .map(|t| IndicatorDoc::Node { tuple: *t })
            .chain(vocab.edge_indicator.iter().map(|t| IndicatorDoc::Edge { tuple: *t }))
            .chain(vocab.triangle_indicator.iter().map(|t| IndicatorDoc::Triangle { tuple: *t }))
            .chain(
                vocab
                    .triangle_spe_indicator
                    .iter()
                    .map(|t| IndicatorDoc::TriangleSpe { tuple: *t }),
            )
            .collect(),
        weights: model.weights.clone(),
    };
    let mut doc = doc;
    let body = serde_json::to_string(&doc).expect("model serialization");
    doc.meta.created = fingerprint(&body);
    serde_json::to_string_pretty(&doc).expect("model serialization")
}

/// Parses a model file back into a [`Model`].
pub fn parse_model(bytes: &str) -> Result<Model> {
    let doc: ModelDoc = serde_json::from_str(bytes).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let viable: BTreeMap<Label, BTreeSet<TransformName>> =
        doc.viable.into_iter().map(|(l, v)| (l, v.into_iter().collect())).collect();
    let mut observation = Vec::with_capacity(doc.observation_features.len());
    for f in doc.observation_features {
        let characteristic = registry().by_name(&f.characteristic).ok_or_else(|| Error::Parse {
            location: "observation_features".to_owned(),
            message: format!("unknown characteristic `{}`", f.characteristic),
        })?;
        observation.push(ObsFeature {
            label: f.label,
            transform: f.transform,
            characteristic,
            direction: f.direction,
        });
    }
    let mut node_ind = Vec::new();
    let mut edge_ind = Vec::new();
    let mut tri_ind = Vec::new();
    let mut tri_spe_ind = Vec::new();
    for ind in doc.indicator_features {
        match ind {
            IndicatorDoc::Node { tuple } => node_ind.push(tuple),
            IndicatorDoc::Edge { tuple } => edge_ind.push(tuple),
            IndicatorDoc::Triangle { tuple } => tri_ind.push(tuple),
            IndicatorDoc::TriangleSpe { tuple } => tri_spe_ind.push(tuple),
        }
    }
    let vocab =
        FeatureVocabulary::from_parts(viable, observation, node_ind, edge_ind, tri_ind, tri_spe_ind);
    if doc.weights.len() != vocab.feature_count() {
        return Err(Error::Parse {
            location: "weights".to_owned(),
            message: format!(
                "expected {} weights, found {}",
                vocab.feature_count(),
                doc.weights.len()
            ),
        });
    }
    let admissible = AdmissibleSets {
        node: doc
            .admissible
            .node
            .into_iter()
            .map(|(l, v)| (l, v.into_iter().collect()))
            .collect(),
        edge: doc
            .admissible
            .edge
            .into_iter()
            .map(|e| (e.labels, e.pairs.into_iter().collect()))
            .collect(),
        triangle: doc
            .admissible
            .triangle
            .into_iter()
            .map(|t| (t.labels, t.triples.into_iter().collect()))
            .collect(),
    };
    Ok(Model {
        vocab,
        weights: doc.weights,
        admissible,
        hyper: Hyper { delta2: doc.meta.delta2, q: doc.meta.q, iters: doc.meta.iters, k_default: 3 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Node};

    fn tiny_data() -> Vec<TransformLabeling> {
        let ast = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::Literal, "0"),
        ]));
        vec![TransformLabeling {
            ast,
            labels: [(3u32, TransformName::ConstantRep)].into_iter().collect(),
        }]
    }

    #[test]
    fn admissible_sets_from_data() {
        let sets = AdmissibleSets::build(&tiny_data());
        assert!(sets.node[&Label::Literal].contains(&TransformName::ConstantRep));
        assert!(sets.node[&Label::Literal].contains(&TransformName::Empty));
        // Never observed: Wrap-TRY on a literal violates the constraint.
        assert!(!sets.node[&Label::Literal].contains(&TransformName::WrapTry));
        assert!(sets.edge_ok(
            (Label::Assignment, Label::Literal),
            (TransformName::Empty, TransformName::ConstantRep)
        ));
        assert!(!sets.edge_ok(
            (Label::Assignment, Label::Literal),
            (TransformName::Empty, TransformName::WrapTry)
        ));
        // All-EMPTY is always admissible, even for unseen label pairs.
        assert!(sets.edge_ok(
            (Label::Try, Label::Throw),
            (TransformName::Empty, TransformName::Empty)
        ));
    }

    #[test]
    fn unseen_label_collapses_to_empty() {
        let sets = AdmissibleSets::build(&tiny_data());
        assert_eq!(sets.node_domain(Label::Try), vec![TransformName::Empty]);
    }

    #[test]
    fn model_file_round_trip_is_byte_identical() {
        let data = tiny_data();
        let vocab = FeatureVocabulary::build(&data);
        let admissible = AdmissibleSets::build(&data);
        let mut model = Model::new(vocab, admissible, Hyper::default());
        model.weights.iter_mut().enumerate().for_each(|(i, w)| *w = i as f64 * 0.25 - 1.0);
        let bytes = serialize_model(&model);
        let parsed = parse_model(&bytes).unwrap();
        assert_eq!(parsed.weights, model.weights);
        assert_eq!(parsed.vocab, model.vocab);
        assert_eq!(parsed.admissible, model.admissible);
        assert_eq!(serialize_model(&parsed), bytes);
    }
}
