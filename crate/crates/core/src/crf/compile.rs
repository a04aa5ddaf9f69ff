//! Per-instance compilation: turns (tree, model) into junction-tree tables
//! with enumerated admissible local assignments and cached sparse feature
//! activations, so repeated inference (training iterates hundreds of times
//! per example) only re-evaluates dot products against fresh weights.

use crate::ast::{Ast, Label};
use crate::crf::cliques::{build_clique_graph, Clique};
use crate::crf::junction::{build_junction_tree, JunctionTree};
use crate::crf::model::Model;
use crate::error::{Error, Result};
use crate::features::{characteristics_with_propagation, CharacteristicVector};
use crate::transform::TransformName;

/// Table for one junction-tree node.
#[derive(Debug, Clone)]
pub struct JtTable {
    /// Member positions, sorted ascending.
    pub members: Vec<u32>,
    /// Admissible local assignments: per-member domain indexes, flattened
    /// (`assigns[a * members.len() + m]`).
    pub assigns: Vec<u8>,
    pub assign_count: usize,
    /// CSR feature lists per assignment, over cliques homed here.
    pub feat_offsets: Vec<u32>,
    pub feats: Vec<u32>,
    /// Per assignment: separator configuration index toward the parent.
    pub sep_to_parent: Vec<u32>,
    pub sep_count_parent: usize,
    /// Per child slot, per assignment: separator configuration index.
    pub sep_to_child: Vec<Vec<u32>>,
    pub sep_counts_child: Vec<usize>,
}

impl JtTable {
    pub fn assignment(&self, a: usize) -> &[u8] {
        let n = self.members.len();
        &self.assigns[a * n..(a + 1) * n]
    }

    pub fn features(&self, a: usize) -> &[u32] {
        &self.feats[self.feat_offsets[a] as usize..self.feat_offsets[a + 1] as usize]
    }
}

/// A model applied to one tree, ready for repeated inference.
pub struct CompiledInstance<'m> {
    pub model: &'m Model,
    pub node_count: u32,
    pub labels: Vec<Label>,
    pub chars: CharacteristicVector,
    /// Transform domain per position (ordinal order).
    pub domains: Vec<Vec<TransformName>>,
    pub cliques: Vec<Clique>,
    /// Canonical covering junction-tree node per clique.
    pub clique_home: Vec<usize>,
    pub jt: JunctionTree,
    pub tables: Vec<JtTable>,
    /// Rooted at junction-tree node 0.
    pub parent_jt: Vec<Option<usize>>,
    pub children_jt: Vec<Vec<usize>>,
    /// Children-before-parents order for the upward pass.
    pub upward: Vec<usize>,
}

impl Model {
    /// Compiles the model against a tree. Fails when the admissible sets
    /// leave some junction-tree node with zero admissible assignments.
    pub fn compile<'m>(&'m self, ast: &Ast) -> Result<CompiledInstance<'m>> {
        let chars = characteristics_with_propagation(ast);
        let view = ast.view();
        let labels: Vec<Label> = view.nodes.iter().map(|n| n.label).collect();
        let domains: Vec<Vec<TransformName>> =
            labels.iter().map(|l| self.admissible.node_domain(*l)).collect();
        for (i, d) in domains.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::Inference(format!("empty transform domain at position {}", i + 1)));
            }
            if d.len() > u8::MAX as usize {
                return Err(Error::Inference("transform domain exceeds u8 indexing".into()));
            }
        }
        let cliques = build_clique_graph(&view);
        let jt = build_junction_tree(&cliques)?;

        // Root the junction tree at node 0.
        let n_jt = jt.nodes.len();
        let adjacency = jt.adjacency();
        let mut parent_jt: Vec<Option<usize>> = vec![None; n_jt];
        let mut children_jt: Vec<Vec<usize>> = vec![Vec::new(); n_jt];
        let mut bfs = vec![0usize];
        let mut seen = vec![false; n_jt];
        seen[0] = true;
        let mut head = 0;
        while head < bfs.len() {
            let at = bfs[head];
            head += 1;
            for next in &adjacency[at] {
                if !seen[*next] {
                    seen[*next] = true;
                    parent_jt[*next] = Some(at);
                    children_jt[at].push(*next);
                    bfs.push(*next);
                }
            }
        }
        let upward: Vec<usize> = bfs.iter().rev().copied().collect();

        let clique_home: Vec<usize> = cliques
            .iter()
            .map(|c| {
                let members = c.members();
                (0..n_jt)
                    .find(|j| members.iter().all(|m| jt.nodes[*j].contains(m)))
                    .expect("every clique lies inside a maximal clique")
            })
            .collect();

        let mut tables = Vec::with_capacity(n_jt);
        for j in 0..n_jt {
            let members = jt.nodes[j].clone();
            let homed: Vec<&Clique> = cliques
                .iter()
                .zip(&clique_home)
                .filter(|(_, h)| **h == j)
                .map(|(c, _)| c)
                .collect();
            let covered: Vec<&Clique> = cliques
                .iter()
                .filter(|c| c.members().iter().all(|m| members.contains(m)))
                .collect();

            let member_index = |pos: u32| members.iter().position(|m| *m == pos).unwrap();
            let dom_sizes: Vec<usize> =
                members.iter().map(|m| domains[*m as usize - 1].len()).collect();

            let mut assigns: Vec<u8> = Vec::new();
            let mut feat_offsets: Vec<u32> = vec![0];
            let mut feats: Vec<u32> = Vec::new();
            let mut current = vec![0u8; members.len()];
            'outer: loop {
                let admissible = covered.iter().all(|c| {
                    let t = |pos: u32| {
                        let mi = member_index(pos);
                        domains[pos as usize - 1][current[mi] as usize]
                    };
                    match **c {
                        Clique::Node(_) => true,
                        Clique::Edge(a, b) => self.admissible.edge_ok(
                            (labels[a as usize - 1], labels[b as usize - 1]),
                            (t(a), t(b)),
                        ),
                        Clique::Triangle(a, b, d) => self.admissible.triangle_ok(
                            (labels[a as usize - 1], labels[b as usize - 1], labels[d as usize - 1]),
                            (t(a), t(b), t(d)),
                        ),
                    }
                });
                if admissible {
                    assigns.extend_from_slice(&current);
                    for c in &homed {
                        let local: Vec<TransformName> = c
                            .members()
                            .iter()
                            .map(|pos| {
                                domains[*pos as usize - 1][current[member_index(*pos)] as usize]
                            })
                            .collect();
                        feats.extend(self.vocab.activate(c, &local, &chars, &view));
                    }
                    feat_offsets.push(feats.len() as u32);
                }
                // Mixed-radix increment.
                for slot in (0..members.len()).rev() {
                    current[slot] += 1;
                    if (current[slot] as usize) < dom_sizes[slot] {
                        continue 'outer;
                    }
                    current[slot] = 0;
                    if slot == 0 {
                        break 'outer;
                    }
                }
                if members.is_empty() {
                    break;
                }
            }
            let assign_count = feat_offsets.len() - 1;
            if assign_count == 0 {
                return Err(Error::Inference(format!(
                    "no admissible assignment for junction-tree clique {members:?}"
                )));
            }

            tables.push(JtTable {
                members,
                assigns,
                assign_count,
                feat_offsets,
                feats,
                sep_to_parent: Vec::new(),
                sep_count_parent: 1,
                sep_to_child: Vec::new(),
                sep_counts_child: Vec::new(),
            });
        }

        // Separator indexing: mixed radix over the separator members'
        // domain sizes, shared by both endpoints of each junction-tree edge.
        let sep_index = |table: &JtTable, sep: &[u32]| -> (Vec<u32>, usize) {
            let mut count = 1usize;
            let mut strides = Vec::with_capacity(sep.len());
            for s in sep {
                strides.push(count as u32);
                count *= domains[*s as usize - 1].len();
            }
            let slots: Vec<usize> =
                sep.iter().map(|s| table.members.iter().position(|m| m == s).unwrap()).collect();
            let mut index = Vec::with_capacity(table.assign_count);
            for a in 0..table.assign_count {
                let assignment = table.assignment(a);
                let mut idx = 0u32;
                for (slot, stride) in slots.iter().zip(&strides) {
                    idx += assignment[*slot] as u32 * stride;
                }
                index.push(idx);
            }
            (index, count)
        };

        for j in 0..n_jt {
            if let Some(p) = parent_jt[j] {
                let sep: Vec<u32> = jt.nodes[j]
                    .iter()
                    .copied()
                    .filter(|m| jt.nodes[p].contains(m))
                    .collect();
                let (index, count) = sep_index(&tables[j], &sep);
                tables[j].sep_to_parent = index;
                tables[j].sep_count_parent = count;
            }
        }
        // Child slots line up with children_jt order.
        let mut tables2 = tables;
        for j in 0..n_jt {
            let mut per_child = Vec::new();
            let mut counts = Vec::new();
            for c in &children_jt[j] {
                let sep: Vec<u32> = jt.nodes[*c]
                    .iter()
                    .copied()
                    .filter(|m| jt.nodes[j].contains(m))
                    .collect();
                let (index, count) = sep_index(&tables2[j], &sep);
                per_child.push(index);
                counts.push(count);
            }
            tables2[j].sep_to_child = per_child;
            tables2[j].sep_counts_child = counts;
        }

        Ok(CompiledInstance {
            model: self,
            node_count: ast.node_count,
            labels,
            chars,
            domains,
            cliques,
            clique_home,
            jt,
            tables: tables2,
            parent_jt,
            children_jt,
            upward,
        })
    }
}

impl CompiledInstance<'_> {
    /// Log-potential per junction-tree assignment under the given weights.
    pub fn potentials(&self, weights: &[f64]) -> Vec<Vec<f64>> {
        self.tables
            .iter()
            .map(|t| {
                (0..t.assign_count)
                    .map(|a| t.features(a).iter().map(|f| weights[*f as usize]).sum())
                    .collect()
            })
            .collect()
    }

    /// Domain index of a transform at a position, if admissible.
    pub fn domain_index(&self, position: u32, t: TransformName) -> Option<u8> {
        self.domains[position as usize - 1].iter().position(|d| *d == t).map(|i| i as u8)
    }
}
