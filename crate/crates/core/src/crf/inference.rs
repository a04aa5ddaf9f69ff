//! Exact inference on the compiled junction tree: log-partition and
//! per-clique marginals by two-pass sum-product in log-space, and ranked
//! assignments by k-best max-product message passing.
//!
//! All assignments violating an admissibility constraint are excluded at
//! compilation time, so message tables only ever range over admissible
//! local assignments. Ranking ties (scores within [`SCORE_TIE_EPS`]) break
//! lexicographically by (position, transform ordinal) with `EMPTY` first.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::crf::cliques::Clique;
use crate::crf::compile::CompiledInstance;
use crate::error::{Error, Result};
use crate::transform::TransformName;

/// Scores closer than this are treated as tied and ordered lexicographically.
pub const SCORE_TIE_EPS: f64 = 1e-9;

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Per-clique marginal distributions over admissible local assignments.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub cliques: Vec<Clique>,
    /// Per clique: (local assignment, probability), in canonical
    /// (domain-ordinal) order.
    pub distributions: Vec<Vec<(Vec<TransformName>, f64)>>,
}

impl CompiledInstance<'_> {
    fn upward_messages(&self, potentials: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut up: Vec<Vec<f64>> = vec![Vec::new(); self.tables.len()];
        for &v in &self.upward {
            let table = &self.tables[v];
            if self.parent_jt[v].is_none() {
                continue;
            }
            let mut msg = vec![f64::NEG_INFINITY; table.sep_count_parent];
            for a in 0..table.assign_count {
                let mut score = potentials[v][a];
                for (slot, &child) in self.children_jt[v].iter().enumerate() {
                    score += up[child][table.sep_to_child[slot][a] as usize];
                }
                let cfg = table.sep_to_parent[a] as usize;
                msg[cfg] = log_add_exp(msg[cfg], score);
            }
            up[v] = msg;
        }
        up
    }

    /// Log-partition function over admissible assignments.
    pub fn log_partition(&self, weights: &[f64]) -> Result<f64> {
        let potentials = self.potentials(weights);
        let up = self.upward_messages(&potentials);
        let root = &self.tables[0];
        let mut log_z = f64::NEG_INFINITY;
        for a in 0..root.assign_count {
            let mut score = potentials[0][a];
            for (slot, &child) in self.children_jt[0].iter().enumerate() {
                score += up[child][root.sep_to_child[slot][a] as usize];
            }
            log_z = log_add_exp(log_z, score);
        }
        if log_z == f64::NEG_INFINITY {
            return Err(Error::Inference("zero admissible assignments".into()));
        }
        Ok(log_z)
    }

    /// Log-partition plus per-junction-tree-node beliefs (probabilities per
    /// admissible local assignment).
    pub fn beliefs(&self, weights: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let potentials = self.potentials(weights);
        let up = self.upward_messages(&potentials);

        // Downward pass, parents before children.
        let mut down: Vec<Vec<f64>> = vec![Vec::new(); self.tables.len()];
        for &v in self.upward.iter().rev() {
            let table = &self.tables[v];
            for (slot, &child) in self.children_jt[v].iter().enumerate() {
                let mut msg = vec![f64::NEG_INFINITY; table.sep_counts_child[slot]];
                for a in 0..table.assign_count {
                    let mut score = potentials[v][a];
                    if self.parent_jt[v].is_some() {
                        score += down[v][table.sep_to_parent[a] as usize];
                    }
                    for (other, &sibling) in self.children_jt[v].iter().enumerate() {
                        if other != slot {
                            score += up[sibling][table.sep_to_child[other][a] as usize];
                        }
                    }
                    let cfg = table.sep_to_child[slot][a] as usize;
                    msg[cfg] = log_add_exp(msg[cfg], score);
                }
                down[child] = msg;
            }
        }

        let mut log_z = f64::NEG_INFINITY;
        let root = &self.tables[0];
        for a in 0..root.assign_count {
            let mut score = potentials[0][a];
            for (slot, &child) in self.children_jt[0].iter().enumerate() {
                score += up[child][root.sep_to_child[slot][a] as usize];
            }
            log_z = log_add_exp(log_z, score);
        }
        if log_z == f64::NEG_INFINITY {
            return Err(Error::Inference("zero admissible assignments".into()));
        }

        let mut beliefs: Vec<Vec<f64>> = Vec::with_capacity(self.tables.len());
        for (v, table) in self.tables.iter().enumerate() {
            let mut b = Vec::with_capacity(table.assign_count);
            for a in 0..table.assign_count {
                let mut score = potentials[v][a];
                if self.parent_jt[v].is_some() {
                    score += down[v][table.sep_to_parent[a] as usize];
                }
                for (slot, &child) in self.children_jt[v].iter().enumerate() {
                    score += up[child][table.sep_to_child[slot][a] as usize];
                }
                b.push((score - log_z).exp());
            }
            beliefs.push(b);
        }
        Ok((log_z, beliefs))
    }

    /// Log-partition plus marginal distributions for every clique of the
    /// graph, computed by projecting the covering junction-tree node's
    /// belief. The support of each distribution is the clique's locally
    /// admissible assignments; entries no full assignment realizes carry
    /// probability zero.
    pub fn clique_marginals(&self, weights: &[f64]) -> Result<(f64, Marginals)> {
        let (log_z, beliefs) = self.beliefs(weights)?;
        let mut distributions = Vec::with_capacity(self.cliques.len());
        for (i, clique) in self.cliques.iter().enumerate() {
            let mut acc: BTreeMap<Vec<u8>, f64> = self
                .local_support(clique)
                .into_iter()
                .map(|key| (key, 0.0))
                .collect();
            let home = self.clique_home[i];
            let table = &self.tables[home];
            let members = clique.members();
            let slots: Vec<usize> = members
                .iter()
                .map(|m| table.members.iter().position(|x| x == m).unwrap())
                .collect();
            for a in 0..table.assign_count {
                let assignment = table.assignment(a);
                let key: Vec<u8> = slots.iter().map(|s| assignment[*s]).collect();
                *acc.entry(key).or_insert(0.0) += beliefs[home][a];
            }
            let dist = acc
                .into_iter()
                .map(|(key, p)| {
                    let named: Vec<TransformName> = key
                        .iter()
                        .zip(&members)
                        .map(|(d, m)| self.domains[*m as usize - 1][*d as usize])
                        .collect();
                    (named, p)
                })
                .collect();
            distributions.push(dist);
        }
        Ok((log_z, Marginals { cliques: self.cliques.clone(), distributions }))
    }

    /// Locally admissible assignments of one clique (domain keys).
    fn local_support(&self, clique: &Clique) -> Vec<Vec<u8>> {
        let members = clique.members();
        let domains: Vec<&Vec<TransformName>> =
            members.iter().map(|m| &self.domains[*m as usize - 1]).collect();
        let mut out = Vec::new();
        let mut idx = vec![0u8; members.len()];
        'outer: loop {
            let ts: Vec<TransformName> =
                idx.iter().zip(&domains).map(|(i, d)| d[*i as usize]).collect();
            let ok = match *clique {
                Clique::Node(_) => true,
                Clique::Edge(a, b) => self.model.admissible.edge_ok(
                    (self.labels[a as usize - 1], self.labels[b as usize - 1]),
                    (ts[0], ts[1]),
                ),
                Clique::Triangle(a, b, c) => self.model.admissible.triangle_ok(
                    (
                        self.labels[a as usize - 1],
                        self.labels[b as usize - 1],
                        self.labels[c as usize - 1],
                    ),
                    (ts[0], ts[1], ts[2]),
                ),
            };
            if ok {
                out.push(idx.clone());
            }
            for slot in (0..idx.len()).rev() {
                idx[slot] += 1;
                if (idx[slot] as usize) < domains[slot].len() {
                    continue 'outer;
                }
                idx[slot] = 0;
                if slot == 0 {
                    break 'outer;
                }
            }
        }
        out
    }

    /// The k best assignments with probabilities, best first. Returns fewer
    /// than k when fewer admissible assignments exist.
    pub fn top_k(&self, weights: &[f64], k: usize) -> Result<Vec<(Vec<TransformName>, f64)>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        let log_z = self.log_partition(weights)?;
        let potentials = self.potentials(weights);

        // Upward k-best pass carrying assignment fragments for exact,
        // deterministic tie-breaking.
        let mut up: Vec<Vec<Vec<Candidate>>> = vec![Vec::new(); self.tables.len()];
        let mut root_best: Vec<Candidate> = Vec::new();
        for &v in &self.upward {
            let table = &self.tables[v];
            let is_root = self.parent_jt[v].is_none();
            let sep_count = if is_root { 1 } else { table.sep_count_parent };
            let mut lists: Vec<Vec<Candidate>> = vec![Vec::new(); sep_count];
            let parent_members: Vec<u32> = if is_root {
                Vec::new()
            } else {
                let p = self.parent_jt[v].unwrap();
                self.jt.nodes[p].clone()
            };
            for a in 0..table.assign_count {
                let assignment = table.assignment(a);
                // Fragment: members eliminated at this node (not shared with
                // the parent).
                let frag: Vec<(u32, u8)> = table
                    .members
                    .iter()
                    .zip(assignment)
                    .filter(|(m, _)| !parent_members.contains(m))
                    .map(|(m, d)| (*m, *d))
                    .collect();
                let mut cur = vec![Candidate { score: potentials[v][a], frag }];
                for (slot, &child) in self.children_jt[v].iter().enumerate() {
                    let child_list = &up[child][table.sep_to_child[slot][a] as usize];
                    cur = combine(&cur, child_list, k);
                }
                let cfg = if is_root { 0 } else { table.sep_to_parent[a] as usize };
                let merged = lists[cfg].drain(..).chain(cur).collect();
                lists[cfg] = keep_top_k(merged, k);
            }
            if is_root {
                root_best = lists.swap_remove(0);
            } else {
                up[v] = lists;
            }
        }

        Ok(root_best
            .into_iter()
            .map(|c| {
                let mut dense = vec![TransformName::Empty; self.node_count as usize];
                for (pos, d) in &c.frag {
                    dense[*pos as usize - 1] = self.domains[*pos as usize - 1][*d as usize];
                }
                (dense, (c.score - log_z).exp())
            })
            .collect())
    }

    /// The single most likely assignment (ties resolved lexicographically).
    pub fn map_assignment(&self, weights: &[f64]) -> Result<Vec<TransformName>> {
        let top = self.top_k(weights, 1)?;
        top.into_iter()
            .next()
            .map(|(dense, _)| dense)
            .ok_or_else(|| Error::Inference("zero admissible assignments".into()))
    }
}

/// A partial assignment with its accumulated score. Fragments stay sorted
/// by position.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub score: f64,
    pub frag: Vec<(u32, u8)>,
}

fn merge_frags(a: &[(u32, u8)], b: &[(u32, u8)]) -> Vec<(u32, u8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].0 <= b[j].0 {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Cartesian combination of two candidate lists, truncated to the k best.
fn combine(a: &[Candidate], b: &[Candidate], k: usize) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(Candidate { score: x.score + y.score, frag: merge_frags(&x.frag, &y.frag) });
        }
    }
    keep_top_k(out, k)
}

/// Sorts candidates best-first (score descending; near-ties by fragment
/// lexicographic order, lower transform ordinals first) and truncates.
pub fn keep_top_k(mut candidates: Vec<Candidate>, k: usize) -> Vec<Candidate> {
    candidates.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
    // Re-sort runs of near-equal scores lexicographically. Chained grouping
    // keeps the comparator total and the result deterministic.
    let mut start = 0;
    while start < candidates.len() {
        let mut end = start + 1;
        while end < candidates.len()
            && (candidates[end - 1].score - candidates[end].score).abs() <= SCORE_TIE_EPS
        {
            end += 1;
        }
        candidates[start..end].sort_by(|a, b| a.frag.cmp(&b.frag));
        start = end;
    }
    candidates.truncate(k);
    candidates
}
