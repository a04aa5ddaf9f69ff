//! Distribution-aware per-example prior: examples with a rare number of
//! actual transforms get more weight, controlled by the magnitude `q`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::transform::TransformLabeling;

/// Per-example weights plus the counts they derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorWeights {
    /// One weight per training example, `(mean / N_{S(t_i)})^q`.
    pub chi: Vec<f64>,
    /// Examples per observed transform count u.
    pub counts: BTreeMap<usize, usize>,
    /// Average example count over the observed transform counts.
    pub mean: f64,
}

/// Computes the prior. Every example must carry at least one actual
/// transform; with `q = 0` all weights are exactly one.
pub fn compute_prior_weights(data: &[TransformLabeling], q: f64) -> Result<PriorWeights> {
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, example) in data.iter().enumerate() {
        let s = example.active_count();
        if s == 0 {
            return Err(Error::Training(format!(
                "example #{i} has no actual transform; not a valid training example"
            )));
        }
        *counts.entry(s).or_insert(0) += 1;
    }
    let mean = counts.values().map(|n| *n as f64).sum::<f64>() / counts.len() as f64;
    let chi = data
        .iter()
        .map(|example| {
            let n_u = counts[&example.active_count()] as f64;
            (mean / n_u).powf(q)
        })
        .collect();
    Ok(PriorWeights { chi, counts, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Label, Node};
    use crate::transform::TransformName;

    fn example(actual: usize) -> TransformLabeling {
        let children: Vec<Node> =
            (0..actual.max(1)).map(|i| Node::valued(Label::Literal, i.to_string())).collect();
        let ast = Ast::new(Node::new(Label::Block).with_children(children));
        let labels =
            (0..actual).map(|i| (i as u32 + 2, TransformName::ConstantRep)).collect();
        TransformLabeling { ast, labels }
    }

    #[test]
    fn zero_q_gives_unit_weights() {
        let data: Vec<_> = (0..5).map(|i| example(1 + i % 2)).collect();
        let prior = compute_prior_weights(&data, 0.0).unwrap();
        assert!(prior.chi.iter().all(|c| *c == 1.0));
    }

    #[test]
    fn nine_to_one_split() {
        // U = {1, 2}, N_1 = 9, N_2 = 1 -> mean 5; q = 1 -> 5/9 and 5.
        let mut data: Vec<_> = (0..9).map(|_| example(1)).collect();
        data.push(example(2));
        let prior = compute_prior_weights(&data, 1.0).unwrap();
        for chi in &prior.chi[..9] {
            assert!((chi - 5.0 / 9.0).abs() < 1e-15);
        }
        assert!((prior.chi[9] - 5.0).abs() < 1e-15);
        assert_eq!(prior.counts, [(1, 9), (2, 1)].into_iter().collect());
    }

    #[test]
    fn uniform_counts_give_unit_weights_for_any_q() {
        let mut data: Vec<_> = (0..4).map(|_| example(1)).collect();
        data.extend((0..4).map(|_| example(2)));
        for q in [0.5, 1.0, 1.5] {
            let prior = compute_prior_weights(&data, q).unwrap();
            assert!(prior.chi.iter().all(|c| *c == 1.0), "q={q}: {:?}", prior.chi);
        }
    }

    #[test]
    fn all_empty_example_is_rejected() {
        let data = vec![TransformLabeling {
            ast: Ast::new(Node::valued(Label::Literal, "0")),
            labels: Default::default(),
        }];
        assert!(compute_prior_weights(&data, 0.5).is_err());
    }
}
