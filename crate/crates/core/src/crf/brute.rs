//! Exhaustive-enumeration oracle: partition function, ranked assignments,
//! and per-clique marginals by direct summation over all admissible
//! assignments. Independent of the junction-tree path; used to check it.

use std::collections::BTreeMap;

use crate::ast::Ast;
use crate::crf::cliques::{build_clique_graph, Clique};
use crate::crf::inference::{keep_top_k, Candidate, Marginals, SCORE_TIE_EPS};
use crate::crf::model::Model;
use crate::error::{Error, Result};
use crate::features::characteristics_with_propagation;
use crate::transform::{TransformLabeling, TransformName};

/// Refuse instances whose assignment space exceeds this.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Everything the oracle computes in one sweep.
#[derive(Debug)]
pub struct BruteForceResult {
    pub log_z: f64,
    /// All admissible assignments, best first (same tie-break as `top_k`),
    /// with unnormalized log-scores.
    pub ranked: Vec<(Vec<TransformName>, f64)>,
    pub marginals: Marginals,
}

/// Unnormalized log-score of a full labeling under the model: the sum of
/// weighted feature activations over every clique, or negative infinity
/// when any clique assignment violates admissibility.
pub fn score_assignment(ast: &Ast, labeling: &TransformLabeling, model: &Model) -> f64 {
    let view = ast.view();
    let chars = characteristics_with_propagation(ast);
    let dense: Vec<TransformName> = (1..=ast.node_count).map(|p| labeling.get(p)).collect();
    let t = |p: u32| dense[p as usize - 1];
    let label = |p: u32| view.node(p).label;
    let mut score = 0.0;
    for clique in build_clique_graph(&view) {
        let ok = match clique {
            Clique::Node(p) => {
                t(p) == TransformName::Empty
                    || model
                        .admissible
                        .node
                        .get(&label(p))
                        .is_some_and(|set| set.contains(&t(p)))
            }
            Clique::Edge(a, b) => {
                model.admissible.edge_ok((label(a), label(b)), (t(a), t(b)))
            }
            Clique::Triangle(a, b, c) => model
                .admissible
                .triangle_ok((label(a), label(b), label(c)), (t(a), t(b), t(c))),
        };
        if !ok {
            return f64::NEG_INFINITY;
        }
        let assignment: Vec<TransformName> = clique.members().iter().map(|m| t(*m)).collect();
        for f in model.vocab.activate(&clique, &assignment, &chars, &view) {
            score += model.weights[f as usize];
        }
    }
    score
}

/// Exhaustive enumeration over admissible assignments. Errors when the
/// assignment space exceeds [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_inference(ast: &Ast, model: &Model) -> Result<BruteForceResult> {
    let view = ast.view();
    let chars = characteristics_with_propagation(ast);
    let n = ast.node_count as usize;
    let domains: Vec<Vec<TransformName>> =
        view.nodes.iter().map(|node| model.admissible.node_domain(node.label)).collect();
    let space: f64 = domains.iter().map(|d| d.len() as f64).product();
    if space > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceTooLarge { assignments: space, limit: BRUTE_FORCE_LIMIT });
    }
    let cliques = build_clique_graph(&view);

    // Per-clique local score tables over the domain product, so the full
    // sweep is table lookups rather than feature activation.
    struct CliqueTable {
        slots: Vec<usize>,
        scores: Vec<Option<f64>>, // None = inadmissible
        strides: Vec<usize>,
    }
    let label = |p: u32| view.node(p).label;
    let mut tables = Vec::with_capacity(cliques.len());
    for clique in &cliques {
        let members = clique.members();
        let slots: Vec<usize> = members.iter().map(|m| *m as usize - 1).collect();
        let sizes: Vec<usize> = slots.iter().map(|s| domains[*s].len()).collect();
        let mut strides = vec![0usize; slots.len()];
        let mut total = 1usize;
        for i in 0..slots.len() {
            strides[i] = total;
            total *= sizes[i];
        }
        let mut scores = Vec::with_capacity(total);
        let mut idx = vec![0usize; slots.len()];
        for _ in 0..total {
            let assignment: Vec<TransformName> =
                slots.iter().zip(&idx).map(|(s, i)| domains[*s][*i]).collect();
            let ok = match *clique {
                Clique::Node(_) => true,
                Clique::Edge(a, b) => model
                    .admissible
                    .edge_ok((label(a), label(b)), (assignment[0], assignment[1])),
                Clique::Triangle(a, b, c) => model.admissible.triangle_ok(
                    (label(a), label(b), label(c)),
                    (assignment[0], assignment[1], assignment[2]),
                ),
            };
            scores.push(if ok {
                let mut s = 0.0;
                for f in model.vocab.activate(clique, &assignment, &chars, &view) {
                    s += model.weights[f as usize];
                }
                Some(s)
            } else {
                None
            });
            for slot in 0..slots.len() {
                idx[slot] += 1;
                if idx[slot] < sizes[slot] {
                    break;
                }
                idx[slot] = 0;
            }
        }
        tables.push(CliqueTable { slots, scores, strides });
    }

    let mut log_z = f64::NEG_INFINITY;
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut current = vec![0u8; n];
    let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
    'outer: loop {
        let mut score = 0.0;
        let mut admissible = true;
        for table in &tables {
            let mut at = 0usize;
            for (slot, stride) in table.slots.iter().zip(&table.strides) {
                at += current[*slot] as usize * stride;
            }
            match table.scores[at] {
                Some(s) => score += s,
                None => {
                    admissible = false;
                    break;
                }
            }
        }
        if admissible {
            log_z = log_add(log_z, score);
            candidates.push(Candidate {
                score,
                frag: current
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (i as u32 + 1, *d))
                    .collect(),
            });
        }
        for slot in (0..n).rev() {
            current[slot] += 1;
            if (current[slot] as usize) < sizes[slot] {
                continue 'outer;
            }
            current[slot] = 0;
            if slot == 0 {
                break 'outer;
            }
        }
        if n == 0 {
            break;
        }
    }
    if log_z == f64::NEG_INFINITY {
        return Err(Error::Inference("zero admissible assignments".into()));
    }

    // Per-clique marginals over the locally admissible support, with
    // explicit zeros for assignments no full assignment realizes.
    let mut acc: Vec<BTreeMap<Vec<u8>, f64>> = tables
        .iter()
        .map(|table| {
            let sizes: Vec<usize> = table.slots.iter().map(|s| domains[*s].len()).collect();
            let mut keys = BTreeMap::new();
            let mut idx = vec![0u8; table.slots.len()];
            let total: usize = sizes.iter().product();
            for flat in 0..total {
                if table.scores[flat].is_some() {
                    keys.insert(idx.clone(), 0.0);
                }
                for slot in 0..idx.len() {
                    idx[slot] += 1;
                    if (idx[slot] as usize) < sizes[slot] {
                        break;
                    }
                    idx[slot] = 0;
                }
            }
            keys
        })
        .collect();
    for c in &candidates {
        let p = (c.score - log_z).exp();
        for (i, table) in tables.iter().enumerate() {
            let key: Vec<u8> = table.slots.iter().map(|s| c.frag[*s].1).collect();
            *acc[i].entry(key).or_insert(0.0) += p;
        }
    }
    let distributions = acc
        .into_iter()
        .enumerate()
        .map(|(i, map)| {
            map.into_iter()
                .map(|(key, p)| {
                    let named: Vec<TransformName> = key
                        .iter()
                        .zip(&tables[i].slots)
                        .map(|(d, s)| domains[*s][*d as usize])
                        .collect();
                    (named, p)
                })
                .collect()
        })
        .collect();

    let ranked = keep_top_k(candidates, usize::MAX)
        .into_iter()
        .map(|c| {
            let dense: Vec<TransformName> =
                c.frag.iter().map(|(p, d)| domains[*p as usize - 1][*d as usize]).collect();
            (dense, c.score)
        })
        .collect();

    Ok(BruteForceResult {
        log_z,
        ranked,
        marginals: Marginals { cliques, distributions },
    })
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// True when two ranked lists agree: same assignments in the same order
/// with probabilities within `tol`. Near-ties (within [`SCORE_TIE_EPS`] in
/// probability) are already ordered identically by both producers.
pub fn ranked_lists_match(
    a: &[(Vec<TransformName>, f64)],
    b: &[(Vec<TransformName>, f64)],
    tol: f64,
) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|((ta, pa), (tb, pb))| ta == tb && (pa - pb).abs() <= tol.max(SCORE_TIE_EPS))
}
