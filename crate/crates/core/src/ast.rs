//! Ordered labeled trees with values, semantic attributes, and pre-order
//! positions.
//!
//! Trees are ingested from a JSON document (one tree per file) where each
//! node is `{"label": str, "value": str|null, "attrs": {..}?, "children":
//! [..]}`. Attributes carry semantic facts that a front-end analysis has
//! already computed (type kinds, scope contents, definition-site edit flags,
//! statement kinds); anything this crate does not recognize is preserved but
//! ignored. Statement roots are flagged with the `statement_root` attribute
//! and get a dedicated [`Label::VirtualRoot`] parent via
//! [`insert_virtual_roots`], so statement-level transforms have their own
//! node to attach to.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed label alphabet. Parsing rejects anything else.
///
/// `LogicalOperator` marks `&&`/`||` nodes; every other binary operator kind
/// uses `BinaryOperator`. Rules and characteristics that speak about binary
/// operators in general accept both (the logical operators are a subset of
/// the binary operators).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    VirtualRoot,
    Statement,
    Block,
    If,
    Try,
    Catch,
    TernaryOperator,
    LogicalOperator,
    BinaryOperator,
    UnaryOperator,
    MethodCall,
    VariableAccess,
    FieldAccess,
    Literal,
    Argument,
    Assignment,
    Return,
    Loop,
    Throw,
    Unknown,
}

impl Label {
    /// All 20 labels, in ordinal order.
    pub const ALL: [Label; 20] = [
        Label::VirtualRoot,
        Label::Statement,
        Label::Block,
        Label::If,
        Label::Try,
        Label::Catch,
        Label::TernaryOperator,
        Label::LogicalOperator,
        Label::BinaryOperator,
        Label::UnaryOperator,
        Label::MethodCall,
        Label::VariableAccess,
        Label::FieldAccess,
        Label::Literal,
        Label::Argument,
        Label::Assignment,
        Label::Return,
        Label::Loop,
        Label::Throw,
        Label::Unknown,
    ];

    /// Stable name used in documents and model files.
    pub fn name(self) -> &'static str {
        match self {
            Label::VirtualRoot => "VirtualRoot",
            Label::Statement => "Statement",
            Label::Block => "Block",
            Label::If => "If",
            Label::Try => "Try",
            Label::Catch => "Catch",
            Label::TernaryOperator => "TernaryOperator",
            Label::LogicalOperator => "LogicalOperator",
            Label::BinaryOperator => "BinaryOperator",
            Label::UnaryOperator => "UnaryOperator",
            Label::MethodCall => "MethodCall",
            Label::VariableAccess => "VariableAccess",
            Label::FieldAccess => "FieldAccess",
            Label::Literal => "Literal",
            Label::Argument => "Argument",
            Label::Assignment => "Assignment",
            Label::Return => "Return",
            Label::Loop => "Loop",
            Label::Throw => "Throw",
            Label::Unknown => "Unknown",
        }
    }

    /// Position in [`Label::ALL`].
    pub fn ordinal(self) -> usize {
        Label::ALL.iter().position(|l| *l == self).expect("label in ALL")
    }

    /// Parses a label name, rejecting anything outside the alphabet.
    pub fn parse(name: &str) -> Result<Label> {
        Label::ALL
            .iter()
            .copied()
            .find(|l| l.name() == name)
            .ok_or_else(|| Error::UnknownLabel {
                found: name.to_owned(),
                alphabet: Label::ALL.map(Label::name).join(", "),
            })
    }

    /// True for `BinaryOperator` and `LogicalOperator`; rules that match a
    /// binary operator accept both.
    pub fn is_binary_operator(self) -> bool {
        matches!(self, Label::BinaryOperator | Label::LogicalOperator)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Semantic attribute map. Values are arbitrary JSON; the documented
/// vocabulary uses booleans, strings, and string lists.
pub type Attrs = BTreeMap<String, serde_json::Value>;

/// A single tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Pre-order index, 1-based; assigned by [`index_preorder`].
    pub position: u32,
    pub label: Label,
    pub value: Option<String>,
    pub attrs: Attrs,
    pub children: Vec<Node>,
}

impl Node {
    /// A node with no value, attributes, or children.
    pub fn new(label: Label) -> Node {
        Node { position: 0, label, value: None, attrs: Attrs::new(), children: Vec::new() }
    }

    /// A node with a value.
    pub fn valued(label: Label, value: impl Into<String>) -> Node {
        Node { value: Some(value.into()), ..Node::new(label) }
    }

    pub fn with_children(mut self, children: Vec<Node>) -> Node {
        self.children = children;
        self
    }

    pub fn with_attr(mut self, key: &str, value: impl Into<serde_json::Value>) -> Node {
        self.attrs.insert(key.to_owned(), value.into());
        self
    }

    /// Boolean attribute lookup; absent or non-boolean reads as `false`.
    pub fn attr_bool(&self, key: &str) -> bool {
        self.attrs.get(key).and_then(serde_json::Value::as_bool).unwrap_or(false)
    }

    /// String attribute lookup; absent or non-string reads as `None`.
    pub fn attr_str(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).and_then(serde_json::Value::as_str)
    }

    /// String-list attribute lookup; absent reads as empty.
    pub fn attr_str_list(&self, key: &str) -> Vec<&str> {
        self.attrs
            .get(key)
            .and_then(serde_json::Value::as_array)
            .map(|items| items.iter().filter_map(serde_json::Value::as_str).collect())
            .unwrap_or_default()
    }

    /// Number of nodes in the subtree rooted here.
    pub fn subtree_size(&self) -> u32 {
        1 + self.children.iter().map(Node::subtree_size).sum::<u32>()
    }
}

/// A complete tree plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub root: Node,
    /// Provenance, e.g. `commit:file:statement`. Not interpreted.
    pub source_id: String,
    /// Number of nodes reachable from `root`.
    pub node_count: u32,
}

impl Ast {
    /// Wraps a root node, assigning pre-order positions.
    pub fn new(root: Node) -> Ast {
        index_preorder(Ast { node_count: root.subtree_size(), root, source_id: String::new() })
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Ast {
        self.source_id = source_id.into();
        self
    }

    /// Flattened view for position-based algorithms.
    pub fn view(&self) -> AstView<'_> {
        AstView::build(self)
    }

    /// True when both trees have the same shape, labels, and values
    /// (positions and attributes are ignored).
    pub fn isomorphic(&self, other: &Ast) -> bool {
        fn eq(a: &Node, b: &Node) -> bool {
            a.label == b.label
                && a.value == b.value
                && a.children.len() == b.children.len()
                && a.children.iter().zip(&b.children).all(|(x, y)| eq(x, y))
        }
        eq(&self.root, &other.root)
    }
}

/// Flattened, position-indexed view of an [`Ast`].
///
/// Index `p - 1` holds the node at pre-order position `p`.
pub struct AstView<'a> {
    pub nodes: Vec<&'a Node>,
    /// Parent position per node; `None` for the root.
    pub parent: Vec<Option<u32>>,
    /// Child positions per node, in order.
    pub children: Vec<Vec<u32>>,
}

impl<'a> AstView<'a> {
    fn build(ast: &'a Ast) -> AstView<'a> {
        let n = ast.node_count as usize;
        let mut view =
            AstView { nodes: Vec::with_capacity(n), parent: vec![None; n], children: vec![Vec::new(); n] };
        fn walk<'a>(node: &'a Node, parent: Option<u32>, view: &mut AstView<'a>) {
            let idx = node.position as usize - 1;
            debug_assert_eq!(view.nodes.len(), idx, "positions must be pre-order");
            view.nodes.push(node);
            view.parent[idx] = parent;
            for child in &node.children {
                view.children[idx].push(child.position);
                walk(child, Some(node.position), view);
            }
        }
        walk(&ast.root, None, &mut view);
        view
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, position: u32) -> &'a Node {
        self.nodes[position as usize - 1]
    }

    pub fn parent_of(&self, position: u32) -> Option<u32> {
        self.parent[position as usize - 1]
    }

    pub fn children_of(&self, position: u32) -> &[u32] {
        &self.children[position as usize - 1]
    }

    /// Positions of the subtree rooted at `position` (pre-order, contiguous).
    pub fn subtree(&self, position: u32) -> std::ops::RangeInclusive<u32> {
        let size = self.node(position).subtree_size();
        position..=position + size - 1
    }

    /// Walks up from `position` while the parent has the given label, and
    /// returns the topmost node reached. Used to find the root of the
    /// logical expression a node belongs to.
    pub fn climb_while_parent_is(&self, position: u32, label: Label) -> u32 {
        let mut at = position;
        while let Some(p) = self.parent_of(at) {
            if self.node(p).label != label {
                break;
            }
            at = p;
        }
        at
    }
}

/// Re-assigns pre-order positions `1..=Q` and refreshes `node_count`.
pub fn index_preorder(mut ast: Ast) -> Ast {
    fn walk(node: &mut Node, next: &mut u32) {
        node.position = *next;
        *next += 1;
        for child in &mut node.children {
            walk(child, next);
        }
    }
    let mut next = 1;
    walk(&mut ast.root, &mut next);
    ast.node_count = next - 1;
    ast
}

/// Attribute flagging statement roots for virtual-root insertion.
pub const ATTR_STATEMENT_ROOT: &str = "statement_root";

/// Inserts a `VirtualRoot` parent above every node flagged with
/// `statement_root`. A flagged node that already sits under a `VirtualRoot`
/// is left alone, so the operation is idempotent. Positions are re-assigned;
/// the relative pre-order of the original nodes is preserved.
pub fn insert_virtual_roots(ast: Ast) -> Ast {
    insert_virtual_roots_mapped(ast).0
}

/// [`insert_virtual_roots`] plus the mapping from old positions to new ones
/// (index `p - 1` holds the new position of the node that was at `p`).
pub fn insert_virtual_roots_mapped(ast: Ast) -> (Ast, Vec<u32>) {
    fn wrap(mut node: Node, parent_is_vr: bool) -> Node {
        let flagged = node.attr_bool(ATTR_STATEMENT_ROOT);
        let is_vr = node.label == Label::VirtualRoot;
        node.children =
            std::mem::take(&mut node.children).into_iter().map(|c| wrap(c, is_vr)).collect();
        if flagged && !parent_is_vr {
            Node::new(Label::VirtualRoot).with_children(vec![node])
        } else {
            node
        }
    }
    let source_id = ast.source_id.clone();
    let old_count = ast.node_count as usize;
    // `wrap` leaves the original (old) positions on the nodes; read the
    // old → new correspondence off the rebuilt tree before re-indexing.
    let wrapped = wrap(ast.root, false);
    let mut mapping = vec![0u32; old_count];
    fn record(node: &Node, next: &mut u32, mapping: &mut [u32]) {
        let new_pos = *next;
        *next += 1;
        if node.position >= 1 {
            mapping[node.position as usize - 1] = new_pos;
        }
        for child in &node.children {
            record(child, next, mapping);
        }
    }
    let mut next = 1;
    record(&wrapped, &mut next, &mut mapping);
    (Ast::new(wrapped).with_source_id(source_id), mapping)
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(default, skip_serializing_if = "Attrs::is_empty")]
    attrs: Attrs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeDoc>,
}

fn node_from_doc(doc: NodeDoc) -> Result<Node> {
    let mut node = Node::new(Label::parse(&doc.label)?);
    node.value = doc.value;
    node.attrs = doc.attrs;
    node.children = doc.children.into_iter().map(node_from_doc).collect::<Result<_>>()?;
    Ok(node)
}

fn node_to_doc(node: &Node) -> NodeDoc {
    NodeDoc {
        label: node.label.name().to_owned(),
        value: node.value.clone(),
        attrs: node.attrs.clone(),
        children: node.children.iter().map(node_to_doc).collect(),
    }
}

/// Parses a tree document (one JSON node object per file) into an indexed
/// [`Ast`]. Malformed JSON reports line/column; unknown labels list the
/// alphabet. The format is nested, so an input that tries to encode a cycle
/// degenerates into runaway nesting and is rejected by the deserializer's
/// recursion limit.
pub fn parse_ast_document(bytes: &str) -> Result<Ast> {
    let doc: NodeDoc = serde_json::from_str(bytes).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    Ast::from_doc(doc)
}

impl Ast {
    fn from_doc(doc: NodeDoc) -> Result<Ast> {
        Ok(Ast::new(node_from_doc(doc)?))
    }
}

/// Serializes an [`Ast`] back to the document format.
pub fn serialize_ast_document(ast: &Ast) -> String {
    serde_json::to_string_pretty(&node_to_doc(&ast.root)).expect("ast serialization")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_tree() -> Ast {
        // Root with children (leaf, inner); mirrors the 7-node example tree:
        // 1 -> {2, 3}, 3 -> {4, 7}, 4 -> {5, 6}.
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
    fn single_node_document() {
        let ast = parse_ast_document(r#"{"label": "Literal", "value": "0"}"#).unwrap();
        assert_eq!(ast.node_count, 1);
        assert_eq!(ast.root.label, Label::Literal);
        assert_eq!(ast.root.position, 1);
    }

    #[test]
    fn seven_node_tree_positions() {
        let ast = fig2_tree();
        assert_eq!(ast.node_count, 7);
        let view = ast.view();
        // Pre-order: parent position < child position, bijection onto 1..=7.
        for p in 2..=7u32 {
            assert!(view.parent_of(p).unwrap() < p);
        }
        assert_eq!(view.children_of(1), &[2, 3]);
        assert_eq!(view.children_of(3), &[4, 7]);
        assert_eq!(view.children_of(4), &[5, 6]);
    }

    #[test]
    fn chain_positions() {
        let ast = Ast::new(Node::new(Label::Statement).with_children(vec![
            Node::new(Label::MethodCall)
                .with_children(vec![Node::valued(Label::VariableAccess, "x")]),
        ]));
        let view = ast.view();
        assert_eq!(view.len(), 3);
        assert_eq!((view.node(1).position, view.node(2).position, view.node(3).position), (1, 2, 3));
    }

    #[test]
    fn unknown_label_lists_alphabet() {
        let err = parse_ast_document(r#"{"label": "Lambda"}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Lambda"));
        assert!(msg.contains("VirtualRoot"));
        assert!(msg.contains("Unknown"));
    }

    #[test]
    fn malformed_document_reports_location() {
        let err = parse_ast_document(r#"{"label": "#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn round_trip_preserves_labels_values_attrs() {
        let doc = r#"{
            "label": "Assignment",
            "attrs": {"statement_root": true, "stmt_kind": "assignment", "custom": [1, 2]},
            "children": [
                {"label": "VariableAccess", "value": "x", "attrs": {"vars_in_scope": ["y", "z"]}},
                {"label": "Literal", "value": "0"}
            ]
        }"#;
        let ast = parse_ast_document(doc).unwrap();
        let echoed = parse_ast_document(&serialize_ast_document(&ast)).unwrap();
        assert!(ast.isomorphic(&echoed));
        assert_eq!(ast.root.attrs, echoed.root.attrs);
        assert_eq!(ast.root.children[0].attrs, echoed.root.children[0].attrs);
    }

    #[test]
    fn virtual_root_insertion() {
        let ast = Ast::new(
            Node::valued(Label::Assignment, "=")
                .with_attr(ATTR_STATEMENT_ROOT, true)
                .with_children(vec![
                    Node::valued(Label::VariableAccess, "x"),
                    Node::valued(Label::Literal, "0"),
                ]),
        );
        let wrapped = insert_virtual_roots(ast.clone());
        assert_eq!(wrapped.root.label, Label::VirtualRoot);
        assert_eq!(wrapped.root.value, None);
        assert_eq!(wrapped.root.children.len(), 1);
        assert_eq!(wrapped.root.children[0].value.as_deref(), Some("="));
        assert_eq!(wrapped.node_count, 4);

        // Relative pre-order of original nodes is preserved.
        let values: Vec<_> = wrapped.view().nodes.iter().filter_map(|n| n.value.clone()).collect();
        assert_eq!(values, vec!["=", "x", "0"]);

        // Idempotence.
        let twice = insert_virtual_roots(wrapped.clone());
        assert_eq!(twice, wrapped);

        // No flags: identical tree.
        let plain = Ast::new(Node::valued(Label::Literal, "1"));
        assert_eq!(insert_virtual_roots(plain.clone()), plain);
    }

    #[test]
    fn virtual_root_for_nested_statements() {
        // A block with two flagged statements; both get wrapped, block keeps order.
        let ast = Ast::new(Node::new(Label::Block).with_children(vec![
            Node::valued(Label::MethodCall, "f").with_attr(ATTR_STATEMENT_ROOT, true),
            Node::valued(Label::Return, "return").with_attr(ATTR_STATEMENT_ROOT, true),
        ]));
        let wrapped = insert_virtual_roots(ast);
        assert_eq!(wrapped.node_count, 5);
        assert_eq!(wrapped.root.children[0].label, Label::VirtualRoot);
        assert_eq!(wrapped.root.children[1].label, Label::VirtualRoot);
    }
}
