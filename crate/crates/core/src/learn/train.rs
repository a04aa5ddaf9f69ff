//! End-to-end training: prior, compiled examples, L-BFGS ascent.

use crate::crf::{AdmissibleSets, Hyper, Model};
use crate::error::Result;
use crate::features::FeatureVocabulary;
use crate::learn::lbfgs::{maximize, IterRecord, LbfgsOptions};
use crate::learn::objective::{compile_training, objective_and_gradient};
use crate::learn::prior::compute_prior_weights;
use crate::transform::TransformLabeling;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    /// Gaussian regularization denominator.
    pub delta2: f64,
    /// Distribution-aware prior magnitude.
    pub q: f64,
    /// Gradient-evaluation budget.
    pub max_grad_evals: u32,
    /// L-BFGS memory.
    pub lbfgs_history: usize,
    /// Stop when the gradient infinity-norm falls below this.
    pub grad_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            delta2: 500.0,
            q: 0.5,
            max_grad_evals: 200,
            lbfgs_history: 10,
            grad_tol: 1e-6,
        }
    }
}

/// A trained model plus the per-evaluation training log.
pub struct TrainOutcome {
    pub model: Model,
    pub log: Vec<IterRecord>,
}

/// Trains weights by penalized maximum likelihood from zero initialization.
/// Vocabulary and admissible sets must come from the same data split.
/// Deterministic for a fixed example order.
pub fn train(
    data: &[TransformLabeling],
    vocab: FeatureVocabulary,
    admissible: AdmissibleSets,
    config: TrainConfig,
) -> Result<TrainOutcome> {
    let prior = compute_prior_weights(data, config.q)?;
    let hyper = Hyper {
        delta2: config.delta2,
        q: config.q,
        iters: config.max_grad_evals,
        k_default: 3,
    };
    let mut model = Model::new(vocab, admissible, hyper);
    let (weights, log) = {
        let examples = compile_training(&model, data)?;
        let eval = |w: &[f64]| objective_and_gradient(&examples, &prior.chi, w, config.delta2);
        maximize(
            eval,
            vec![0.0; model.feature_count()],
            LbfgsOptions {
                history: config.lbfgs_history,
                max_evals: config.max_grad_evals,
                grad_tol: config.grad_tol,
            },
        )?
    };
    model.weights = weights;
    Ok(TrainOutcome { model, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::{map_assignment, AdmissibleSets};
    use crate::synthetic::{planted_corpus, PlantedConfig};

    fn small_corpus() -> crate::synthetic::PlantedCorpus {
        planted_corpus(&PlantedConfig {
            train: 120,
            test_single: 24,
            test_joint: 0,
            joint_fraction: 0.0,
            trigger_noise: 0.0,
            ..Default::default()
        })
    }

    #[test]
    fn zero_budget_keeps_zero_weights() {
        let corpus = small_corpus();
        let outcome = train(
            &corpus.train,
            FeatureVocabulary::build(&corpus.train),
            AdmissibleSets::build(&corpus.train),
            TrainConfig { max_grad_evals: 0, ..Default::default() },
        )
        .unwrap();
        assert!(outcome.model.weights.iter().all(|w| *w == 0.0));
        assert!(outcome.log.is_empty());
    }

    #[test]
    fn learns_clean_single_rules() {
        let corpus = small_corpus();
        let outcome = train(
            &corpus.train,
            FeatureVocabulary::build(&corpus.train),
            AdmissibleSets::build(&corpus.train),
            TrainConfig { max_grad_evals: 60, ..Default::default() },
        )
        .unwrap();
        let mut correct = 0;
        for example in &corpus.test {
            let map = map_assignment(&example.labeling.ast, &outcome.model).unwrap();
            if map.labels == example.labeling.labels {
                correct += 1;
            }
        }
        let accuracy = correct as f64 / corpus.test.len() as f64;
        assert!(accuracy >= 0.9, "top-1 accuracy {accuracy}");
    }

    #[test]
    fn stronger_regularization_shrinks_weights() {
        let corpus = small_corpus();
        let run = |delta2: f64| {
            train(
                &corpus.train,
                FeatureVocabulary::build(&corpus.train),
                AdmissibleSets::build(&corpus.train),
                TrainConfig { delta2, max_grad_evals: 60, ..Default::default() },
            )
            .unwrap()
        };
        let tight = run(0.01);
        let loose = run(500.0);
        let max_abs = |w: &[f64]| w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max_abs(&tight.model.weights) < max_abs(&loose.model.weights));
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = small_corpus();
        let run = || {
            train(
                &corpus.train,
                FeatureVocabulary::build(&corpus.train),
                AdmissibleSets::build(&corpus.train),
                TrainConfig { max_grad_evals: 25, ..Default::default() },
            )
            .unwrap()
            .model
            .weights
        };
        assert_eq!(run(), run());
    }
}
