//! The clique graph over transform variables: one vertex per tree position,
//! edges for parent-child and immediate-sibling pairs. The maximal cliques
//! of this graph are triangles (parent, adjacent siblings), which keeps
//! exact inference tractable.

use crate::ast::AstView;

/// A clique of the transform random field. Members are pre-order positions;
/// edge members are (parent, child) or (left sibling, right sibling),
/// triangle members are (parent, left child, right child).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clique {
    Node(u32),
    Edge(u32, u32),
    Triangle(u32, u32, u32),
}

impl Clique {
    pub fn members(&self) -> Vec<u32> {
        match *self {
            Clique::Node(a) => vec![a],
            Clique::Edge(a, b) => vec![a, b],
            Clique::Triangle(a, b, c) => vec![a, b, c],
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Clique::Node(_) => 1,
            Clique::Edge(..) => 2,
            Clique::Triangle(..) => 3,
        }
    }
}

/// Enumerates all cliques: every position, every parent-child and
/// immediate-sibling edge, and every (parent, adjacent-sibling) triangle.
pub fn build_clique_graph(view: &AstView<'_>) -> Vec<Clique> {
    let mut cliques: Vec<Clique> = (1..=view.len() as u32).map(Clique::Node).collect();
    for p in 1..=view.len() as u32 {
        let children = view.children_of(p);
        for c in children {
            cliques.push(Clique::Edge(p, *c));
        }
        for pair in children.windows(2) {
            cliques.push(Clique::Edge(pair[0], pair[1]));
        }
    }
    for p in 1..=view.len() as u32 {
        for pair in view.children_of(p).windows(2) {
            cliques.push(Clique::Triangle(p, pair[0], pair[1]));
        }
    }
    cliques
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Ast, Label, Node};

    /// The seven-node example tree: 1 -> {2, 3}, 3 -> {4, 7}, 4 -> {5, 6}.
    pub(crate) fn seven_node_tree() -> Ast {
        Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "a"),
            Node::new(Label::MethodCall).with_children(vec![
                Node::new(Label::BinaryOperator).with_children(vec![
                    Node::valued(Label::VariableAccess, "b"),
                    Node::valued(Label::Literal, "1"),
                ]),
                Node::valued(Label::VariableAccess, "c"),
            ]),
        ]))
    }

    #[test]
    fn seven_node_tree_cliques() {
        let ast = seven_node_tree();
        let cliques = build_clique_graph(&ast.view());
        let nodes: Vec<_> = cliques.iter().filter(|c| c.arity() == 1).collect();
        let edges: Vec<_> =
            cliques.iter().filter_map(|c| match c {
                Clique::Edge(a, b) => Some((*a, *b)),
                _ => None,
            })
            .collect();
        let triangles: Vec<_> = cliques
            .iter()
            .filter_map(|c| match c {
                Clique::Triangle(a, b, d) => Some((*a, *b, *d)),
                _ => None,
            })
            .collect();
        assert_eq!(nodes.len(), 7);
        assert_eq!(
            edges,
            vec![
                (1, 2),
                (1, 3),
                (2, 3),
                (3, 4),
                (3, 7),
                (4, 7),
                (4, 5),
                (4, 6),
                (5, 6)
            ]
        );
        assert_eq!(triangles, vec![(1, 2, 3), (3, 4, 7), (4, 5, 6)]);
    }

    #[test]
    fn single_node_has_one_clique() {
        let ast = Ast::new(Node::valued(Label::Literal, "0"));
        let cliques = build_clique_graph(&ast.view());
        assert_eq!(cliques, vec![Clique::Node(1)]);
    }

    #[test]
    fn single_child_has_no_triangle() {
        let ast = Ast::new(
            Node::new(Label::Return).with_children(vec![Node::valued(Label::Literal, "0")]),
        );
        let cliques = build_clique_graph(&ast.view());
        assert_eq!(cliques, vec![Clique::Node(1), Clique::Node(2), Clique::Edge(1, 2)]);
    }
}
