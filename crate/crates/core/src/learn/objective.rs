//! The penalized, prior-weighted log-likelihood and its gradient.
//!
//! Per example i with weight chi_i, the objective contributes
//! `chi_i * (score(observed) - log Z)`; the gradient per feature is the
//! chi-weighted observed count minus the chi-weighted model expectation
//! (from junction-tree beliefs), minus the ridge term `lambda_k / delta2`.

use crate::crf::{build_clique_graph, Clique, CompiledInstance, Model};
use crate::error::{Error, Result};
use crate::transform::{TransformLabeling, TransformName};

/// One training example compiled against the model structure, with the
/// observed labeling's feature counts frozen.
pub struct CompiledExample<'m> {
    pub instance: CompiledInstance<'m>,
    /// Aggregated feature counts of the observed labeling, sorted by id.
    pub observed: Vec<(u32, f64)>,
    /// Index into the original data set (for diagnostics).
    pub index: usize,
}

/// Compiles every example once; training then only re-evaluates potentials.
pub fn compile_training<'m>(
    model: &'m Model,
    data: &[TransformLabeling],
) -> Result<Vec<CompiledExample<'m>>> {
    data.iter()
        .enumerate()
        .map(|(index, example)| {
            let instance = model.compile(&example.ast).map_err(|e| {
                Error::Training(format!("example #{index} ({}): {e}", example.ast.source_id))
            })?;
            // Observed labeling must lie inside the admissible domains when
            // vocabulary and constraints come from the same data.
            for (pos, t) in &example.labels {
                if instance.domain_index(*pos, *t).is_none() {
                    return Err(Error::Training(format!(
                        "example #{index} ({}): observed transform {t} at position {pos} is \
                         not admissible under the supplied constraint sets",
                        example.ast.source_id
                    )));
                }
            }
            let view = example.ast.view();
            let dense: Vec<TransformName> =
                (1..=example.ast.node_count).map(|p| example.get(p)).collect();
            let mut counts: std::collections::BTreeMap<u32, f64> = Default::default();
            for clique in build_clique_graph(&view) {
                let assignment: Vec<TransformName> = match clique {
                    Clique::Node(a) => vec![dense[a as usize - 1]],
                    Clique::Edge(a, b) => vec![dense[a as usize - 1], dense[b as usize - 1]],
                    Clique::Triangle(a, b, c) => vec![
                        dense[a as usize - 1],
                        dense[b as usize - 1],
                        dense[c as usize - 1],
                    ],
                };
                for f in model.vocab.activate(&clique, &assignment, &instance.chars, &view) {
                    *counts.entry(f).or_insert(0.0) += 1.0;
                }
            }
            Ok(CompiledExample { instance, observed: counts.into_iter().collect(), index })
        })
        .collect()
}

/// Value and gradient of the regularized objective at `weights`.
/// `chi` supplies per-example prior weights; `delta2` may be infinite to
/// disable regularization.
pub fn objective_and_gradient(
    examples: &[CompiledExample<'_>],
    chi: &[f64],
    weights: &[f64],
    delta2: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut value = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (example, &chi_i) in examples.iter().zip(chi) {
        let (log_z, beliefs) = example.instance.beliefs(weights).map_err(|e| {
            Error::Training(format!("inference failed on example #{}: {e}", example.index))
        })?;
        let observed_score: f64 =
            example.observed.iter().map(|(f, c)| weights[*f as usize] * c).sum();
        value += chi_i * (observed_score - log_z);
        for (f, c) in &example.observed {
            grad[*f as usize] += chi_i * c;
        }
        for (j, table) in example.instance.tables.iter().enumerate() {
            for a in 0..table.assign_count {
                let b = beliefs[j][a];
                if b > 0.0 {
                    for f in table.features(a) {
                        grad[*f as usize] -= chi_i * b;
                    }
                }
            }
        }
    }
    if delta2.is_finite() {
        for (g, w) in grad.iter_mut().zip(weights) {
            *g -= w / delta2;
            value -= w * w / (2.0 * delta2);
        }
    }
    if !value.is_finite() {
        return Err(Error::Training(format!("objective is not finite: {value}")));
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Label, Node};
    use crate::crf::{AdmissibleSets, Hyper};
    use crate::features::FeatureVocabulary;
    use crate::learn::compute_prior_weights;

    fn single_node_set() -> Vec<TransformLabeling> {
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        vec![TransformLabeling {
            ast,
            labels: [(1u32, TransformName::ConstantRep)].into_iter().collect(),
        }]
    }

    #[test]
    fn uniform_marginal_gradient() {
        // One single-node example, two admissible transforms, zero weights:
        // the observed-indicator gradient is chi * (1 - 1/2).
        let data = single_node_set();
        let vocab = FeatureVocabulary::build(&data);
        let admissible = AdmissibleSets::build(&data);
        let model = Model::new(vocab, admissible, Hyper::default());
        let examples = compile_training(&model, &data).unwrap();
        let prior = compute_prior_weights(&data, 0.0).unwrap();
        let (value, grad) =
            objective_and_gradient(&examples, &prior.chi, &model.weights, f64::INFINITY).unwrap();
        assert!((value - (0.5f64).ln()).abs() < 1e-12, "log p = ln(1/2)");
        let id = model.vocab.observation.len()
            + model
                .vocab
                .node_indicator
                .iter()
                .position(|t| *t == (TransformName::ConstantRep, Label::Literal))
                .unwrap();
        assert!((grad[id] - 0.5).abs() < 1e-12);
        // With zero observed firings the gradient is pure (negative)
        // expectation: nudge the weight and check the sign flips around it.
        let mut shifted = model.weights.clone();
        shifted[id] = 10.0;
        let (_, grad_hi) =
            objective_and_gradient(&examples, &prior.chi, &shifted, f64::INFINITY).unwrap();
        assert!(grad_hi[id] < grad[id], "expectation grows with the weight");
    }

    #[test]
    fn gradient_matches_finite_differences_small() {
        let corpus = crate::synthetic::planted_corpus(&crate::synthetic::PlantedConfig {
            train: 12,
            test_single: 0,
            test_joint: 0,
            ..Default::default()
        });
        let vocab = FeatureVocabulary::build(&corpus.train);
        let admissible = AdmissibleSets::build(&corpus.train);
        let mut model = Model::new(vocab, admissible, Hyper::default());
        // Random-ish nonzero point.
        for (i, w) in model.weights.iter_mut().enumerate() {
            *w = ((i as f64 * 0.37).sin()) * 0.5;
        }
        let examples = compile_training(&model, &corpus.train).unwrap();
        let prior = compute_prior_weights(&corpus.train, 0.5).unwrap();
        let delta2 = 500.0;
        let (_, grad) =
            objective_and_gradient(&examples, &prior.chi, &model.weights, delta2).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in (0..model.weights.len()).step_by(7) {
            let mut plus = model.weights.clone();
            plus[k] += h;
            let mut minus = model.weights.clone();
            minus[k] -= h;
            let (vp, _) = objective_and_gradient(&examples, &prior.chi, &plus, delta2).unwrap();
            let (vm, _) = objective_and_gradient(&examples, &prior.chi, &minus, delta2).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            let rel = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1.0);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-5, "max relative error {worst}");
    }
}
