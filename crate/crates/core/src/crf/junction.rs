//! Junction tree over the maximal cliques of the transform graph.
//!
//! The clique graph is chordal by construction: each family (a parent with
//! its children) contributes a chain of triangles (p, c_i, c_{i+1}) joined
//! on {p, c_{i+1}}, a single-child family contributes the maximal edge
//! {p, c}, and a childless root contributes the lone vertex. Families are
//! attached to the first clique of the parent's family that contains the
//! shared position, which yields the running intersection property.

use std::collections::{BTreeMap, HashMap};

use crate::crf::cliques::Clique;
use crate::error::{Error, Result};

/// A tree over maximal cliques with separators on its edges.
#[derive(Debug, Clone)]
pub struct JunctionTree {
    /// Maximal cliques; members sorted ascending.
    pub nodes: Vec<Vec<u32>>,
    /// Tree edges between clique indexes; the separator is the member
    /// intersection.
    pub edges: Vec<(usize, usize)>,
}

impl JunctionTree {
    pub fn separator(&self, edge: usize) -> Vec<u32> {
        let (a, b) = self.edges[edge];
        self.nodes[a].iter().copied().filter(|m| self.nodes[b].contains(m)).collect()
    }

    /// Neighbors per node index.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (a, b) in &self.edges {
            adj[*a].push(*b);
            adj[*b].push(*a);
        }
        adj
    }
}

/// Builds the junction tree from the clique list of one tree instance.
pub fn build_junction_tree(cliques: &[Clique]) -> Result<JunctionTree> {
    // Reconstruct families from the triangles and from maximal edges (an
    // edge in no triangle is necessarily a single-child parent-child edge).
    let triangles: Vec<(u32, u32, u32)> = cliques
        .iter()
        .filter_map(|c| match c {
            Clique::Triangle(p, l, r) => Some((*p, *l, *r)),
            _ => None,
        })
        .collect();
    let in_triangle = |a: u32, b: u32| {
        triangles.iter().any(|(p, l, r)| {
            let m = [*p, *l, *r];
            m.contains(&a) && m.contains(&b)
        })
    };
    let maximal_edges: Vec<(u32, u32)> = cliques
        .iter()
        .filter_map(|c| match c {
            Clique::Edge(a, b) if !in_triangle(*a, *b) => Some((*a, *b)),
            _ => None,
        })
        .collect();

    // Family chains per parent, in sibling order (positions increase along
    // the sibling list in pre-order).
    let mut families: BTreeMap<u32, Vec<Vec<u32>>> = BTreeMap::new();
    let mut parent_of: HashMap<u32, u32> = HashMap::new();
    for (p, l, r) in &triangles {
        families.entry(*p).or_default().push(vec![*p, *l, *r]);
        parent_of.insert(*l, *p);
        parent_of.insert(*r, *p);
    }
    for chain in families.values_mut() {
        chain.sort_by_key(|t| t[1]);
    }
    for (p, c) in &maximal_edges {
        families.entry(*p).or_default().push(vec![*p, *c]);
        parent_of.insert(*c, *p);
    }

    let mut nodes: Vec<Vec<u32>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // Index of each family's cliques, keyed by parent position.
    let mut family_nodes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (p, chain) in &families {
        let mut ids = Vec::new();
        for (i, clique) in chain.iter().enumerate() {
            let id = nodes.len();
            let mut members = clique.clone();
            members.sort_unstable();
            nodes.push(members);
            if i > 0 {
                edges.push((ids[i - 1], id));
            }
            ids.push(id);
        }
        family_nodes.insert(*p, ids);
    }

    // Attach each non-root family to the first clique of the parent's
    // family that contains the shared position.
    for (p, ids) in &family_nodes {
        let Some(grand) = parent_of.get(p) else { continue };
        let host = family_nodes[grand]
            .iter()
            .copied()
            .find(|id| nodes[*id].contains(p))
            .expect("parent family contains the child position");
        edges.push((host, ids[0]));
    }

    if nodes.is_empty() {
        // No edges at all: a single-vertex instance.
        let singles: Vec<u32> = cliques
            .iter()
            .filter_map(|c| match c {
                Clique::Node(p) => Some(*p),
                _ => None,
            })
            .collect();
        if singles.len() != 1 {
            return Err(Error::Inference(format!(
                "clique list with no edges must be a single vertex, got {} vertices",
                singles.len()
            )));
        }
        nodes.push(vec![singles[0]]);
    }

    let jt = JunctionTree { nodes, edges };
    verify_running_intersection(&jt)?;
    Ok(jt)
}

/// Construction-bug guard: for every position, the cliques containing it
/// must form a connected subtree, and the tree must be connected.
fn verify_running_intersection(jt: &JunctionTree) -> Result<()> {
    let n = jt.nodes.len();
    if jt.edges.len() + 1 != n {
        return Err(Error::Inference(format!(
            "junction tree is not a tree: {} nodes, {} edges",
            n,
            jt.edges.len()
        )));
    }
    let adj = jt.adjacency();
    let mut positions: Vec<u32> = jt.nodes.iter().flatten().copied().collect();
    positions.sort_unstable();
    positions.dedup();
    for position in positions {
        let holders: Vec<usize> =
            (0..n).filter(|i| jt.nodes[*i].contains(&position)).collect();
        // BFS within the induced subgraph.
        let mut seen = vec![false; n];
        let mut queue = vec![holders[0]];
        seen[holders[0]] = true;
        let mut reached = 1;
        while let Some(at) = queue.pop() {
            for next in &adj[at] {
                if !seen[*next] && holders.contains(next) {
                    seen[*next] = true;
                    reached += 1;
                    queue.push(*next);
                }
            }
        }
        if reached != holders.len() {
            return Err(Error::Inference(format!(
                "running intersection violated for position {position}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Label, Node};
    use crate::crf::cliques::build_clique_graph;

    #[test]
    fn seven_node_tree_junction() {
        // Family chains: {1,2,3}, {3,4,7}, {4,5,6} linked through the
        // shared positions 3 and 4.
        let ast = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "a"),
            Node::new(Label::MethodCall).with_children(vec![
                Node::new(Label::BinaryOperator).with_children(vec![
                    Node::valued(Label::VariableAccess, "b"),
                    Node::valued(Label::Literal, "1"),
                ]),
                Node::valued(Label::VariableAccess, "c"),
            ]),
        ]));
        let jt = build_junction_tree(&build_clique_graph(&ast.view())).unwrap();
        assert_eq!(jt.nodes.len(), 3);
        let find = |members: &[u32]| jt.nodes.iter().position(|m| m == members).unwrap();
        let a = find(&[1, 2, 3]);
        let b = find(&[3, 4, 7]);
        let c = find(&[4, 5, 6]);
        let mut edges: Vec<(usize, usize)> =
            jt.edges.iter().map(|(x, y)| (*x.min(y), *x.max(y))).collect();
        edges.sort_unstable();
        let mut expected = vec![(a.min(b), a.max(b)), (b.min(c), b.max(c))];
        expected.sort_unstable();
        assert_eq!(edges, expected);
        let sep_ab = jt.separator(jt.edges.iter().position(|(x, y)| (*x, *y) == (a, b) || (*x, *y) == (b, a)).unwrap());
        assert_eq!(sep_ab, vec![3]);
    }

    #[test]
    fn single_edge_graph_is_one_clique() {
        let ast = Ast::new(
            Node::new(Label::Return).with_children(vec![Node::valued(Label::Literal, "0")]),
        );
        let jt = build_junction_tree(&build_clique_graph(&ast.view())).unwrap();
        assert_eq!(jt.nodes, vec![vec![1, 2]]);
        assert!(jt.edges.is_empty());
    }

    #[test]
    fn star_with_three_children() {
        let ast = Ast::new(Node::new(Label::MethodCall).with_children(vec![
            Node::valued(Label::Literal, "a"),
            Node::valued(Label::Literal, "b"),
            Node::valued(Label::Literal, "c"),
        ]));
        let jt = build_junction_tree(&build_clique_graph(&ast.view())).unwrap();
        assert_eq!(jt.nodes.len(), 2);
        assert_eq!(jt.nodes[0], vec![1, 2, 3]);
        assert_eq!(jt.nodes[1], vec![1, 3, 4]);
        assert_eq!(jt.separator(0), vec![1, 3]);
    }

    #[test]
    fn single_node_tree() {
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        let jt = build_junction_tree(&build_clique_graph(&ast.view())).unwrap();
        assert_eq!(jt.nodes, vec![vec![1]]);
    }

    #[test]
    fn deep_chain_spans_all_positions() {
        let ast = Ast::new(Node::new(Label::Block).with_children(vec![Node::new(Label::If)
            .with_children(vec![Node::new(Label::Block)
                .with_children(vec![Node::valued(Label::Literal, "x")])])]));
        let jt = build_junction_tree(&build_clique_graph(&ast.view())).unwrap();
        let mut covered: Vec<u32> = jt.nodes.iter().flatten().copied().collect();
        covered.sort_unstable();
        covered.dedup();
        assert_eq!(covered, vec![1, 2, 3, 4]);
        assert_eq!(jt.edges.len(), jt.nodes.len() - 1);
    }
}
