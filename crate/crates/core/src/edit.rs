//! Tree edit scripts: UPD/ADD/DEL/MOV records describing a before→after
//! change, ingestion from external differs, sequential application, the
//! root-operation size filter, and a naive built-in differ for building
//! test corpora.
//!
//! Script semantics follow the classic basic-operation model:
//! - `UPD(x, val)` replaces the value of node `x`.
//! - `ADD(x, y, i)` inserts fresh node `x` as the i-th child of `y`; with no
//!   parent, `x` becomes the new root (adopting the old root if any).
//! - `DEL(x)` removes leaf `x`.
//! - `MOV(x, y, i)` re-hangs the subtree rooted at `x` as the i-th child of
//!   `y`.
//!
//! Ops are applied in source order and each op is validated against the
//! current tree state; a subtree deletion therefore lists its DELs leaves
//! first, and a MOV into added structure must follow the ADD that created
//! its destination.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{index_preorder, parse_ast_document, Ast, Attrs, Label, Node};
use crate::error::{Error, Result};

/// Reference to a node: a pre-order position in the before-tree, or the
/// fresh id of a node introduced by an ADD in the same script.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Pos(u32),
    Fresh(String),
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Pos(p) => write!(f, "{p}"),
            NodeRef::Fresh(id) => write!(f, "{id}"),
        }
    }
}

impl Serialize for NodeRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NodeRef::Pos(p) => s.serialize_u32(*p),
            NodeRef::Fresh(id) => s.serialize_str(id),
        }
    }
}

impl<'de> Deserialize<'de> for NodeRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .filter(|v| *v >= 1 && *v <= u32::MAX as u64)
                .map(|v| NodeRef::Pos(v as u32))
                .ok_or_else(|| D::Error::custom("node reference must be a positive position")),
            serde_json::Value::String(s) => Ok(NodeRef::Fresh(s)),
            other => Err(D::Error::custom(format!(
                "node reference must be a position or fresh id, got {other}"
            ))),
        }
    }
}

/// One basic tree edit operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EditOp {
    #[serde(rename = "UPD")]
    Upd {
        /// Before-tree position of the updated node.
        node: u32,
        /// Replacement value; `null` clears the value.
        new_value: Option<String>,
    },
    #[serde(rename = "ADD")]
    Add {
        /// Fresh id of the inserted node, unique within the script.
        node: String,
        /// Insertion parent; absent means the node becomes the new root.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent: Option<NodeRef>,
        /// 1-based insertion index; required when `parent` is present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<u32>,
        label: Label,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<String>,
        /// Semantic facts about the fresh node (e.g. definition-site edit
        /// flags for its value), same vocabulary as tree attributes.
        #[serde(default, skip_serializing_if = "Attrs::is_empty")]
        attrs: Attrs,
    },
    #[serde(rename = "DEL")]
    Del { node: u32 },
    #[serde(rename = "MOV")]
    Mov { node: u32, parent: NodeRef, index: u32 },
}

impl EditOp {
    /// The node the operation acts on, for diagnostics.
    pub fn target(&self) -> NodeRef {
        match self {
            EditOp::Upd { node, .. } | EditOp::Del { node } | EditOp::Mov { node, .. } => {
                NodeRef::Pos(*node)
            }
            EditOp::Add { node, .. } => NodeRef::Fresh(node.clone()),
        }
    }
}

/// An ordered edit script between two trees.
#[derive(Debug, Clone)]
pub struct EditScript {
    pub before: Ast,
    pub after: Ast,
    pub ops: Vec<EditOp>,
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

/// `before`/`after` in a script document: a path to a tree file or an
/// inline tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeRef {
    Path(String),
    Inline(serde_json::Value),
}

#[derive(Serialize, Deserialize)]
struct ScriptDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    before: Option<TreeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    after: Option<TreeRef>,
    ops: Vec<EditOp>,
}

fn parse_ops_document(bytes: &str) -> Result<ScriptDoc> {
    serde_json::from_str(bytes).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Parses the `ops` of a script document and validates every node reference
/// against the supplied trees. Any `before`/`after` fields in the document
/// are ignored in favor of the arguments.
pub fn parse_edit_script(bytes: &str, before: Ast, after: Ast) -> Result<EditScript> {
    let doc = parse_ops_document(bytes)?;
    validate_ops(&doc.ops, &before)?;
    Ok(EditScript { before, after, ops: doc.ops })
}

/// Loads a full script document, resolving `before`/`after` tree references
/// through `resolve` (typically a file loader rooted at the document's
/// directory).
pub fn load_edit_script(
    bytes: &str,
    resolve: impl Fn(&str) -> Result<Ast>,
) -> Result<EditScript> {
    let doc = parse_ops_document(bytes)?;
    let tree = |field: Option<TreeRef>, name: &str| -> Result<Ast> {
        match field {
            Some(TreeRef::Path(p)) => resolve(&p),
            Some(TreeRef::Inline(v)) => parse_ast_document(&v.to_string()),
            None => Err(Error::Parse {
                location: name.to_owned(),
                message: format!("script document is missing `{name}`"),
            }),
        }
    };
    let before = tree(doc.before, "before")?;
    let after = tree(doc.after, "after")?;
    validate_ops(&doc.ops, &before)?;
    Ok(EditScript { before, after, ops: doc.ops })
}

/// Serializes a script with inline trees.
pub fn serialize_edit_script(script: &EditScript) -> String {
    let doc = ScriptDoc {
        before: Some(TreeRef::Inline(
            serde_json::from_str(&crate::ast::serialize_ast_document(&script.before)).unwrap(),
        )),
        after: Some(TreeRef::Inline(
            serde_json::from_str(&crate::ast::serialize_ast_document(&script.after)).unwrap(),
        )),
        ops: script.ops.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("script serialization")
}

fn validate_ops(ops: &[EditOp], before: &Ast) -> Result<()> {
    let q = before.node_count;
    let mut fresh: HashMap<&str, usize> = HashMap::new();
    for (i, op) in ops.iter().enumerate() {
        if let EditOp::Add { node, .. } = op {
            if fresh.insert(node.as_str(), i).is_some() {
                return Err(Error::InvalidOp {
                    op_index: i,
                    message: format!("duplicate fresh id `{node}`"),
                });
            }
        }
    }
    let check_pos = |i: usize, p: u32| -> Result<()> {
        if p == 0 || p > q {
            Err(Error::DanglingRef { op_index: i, reference: p.to_string() })
        } else {
            Ok(())
        }
    };
    let check_ref = |i: usize, r: &NodeRef| -> Result<()> {
        match r {
            NodeRef::Pos(p) => check_pos(i, *p),
            NodeRef::Fresh(id) => {
                if fresh.contains_key(id.as_str()) {
                    Ok(())
                } else {
                    Err(Error::DanglingRef { op_index: i, reference: id.clone() })
                }
            }
        }
    };
    for (i, op) in ops.iter().enumerate() {
        match op {
            EditOp::Upd { node, .. } | EditOp::Del { node } => check_pos(i, *node)?,
            EditOp::Add { parent, index, .. } => {
                if let Some(parent) = parent {
                    check_ref(i, parent)?;
                    match index {
                        None => {
                            return Err(Error::InvalidOp {
                                op_index: i,
                                message: "ADD with a parent requires `index`".to_owned(),
                            })
                        }
                        Some(0) => {
                            return Err(Error::InvalidOp {
                                op_index: i,
                                message: "`index` is 1-based".to_owned(),
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
            EditOp::Mov { node, parent, index } => {
                check_pos(i, *node)?;
                check_ref(i, parent)?;
                if *index == 0 {
                    return Err(Error::InvalidOp {
                        op_index: i,
                        message: "`index` is 1-based".to_owned(),
                    });
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Root tree edit operations
// ---------------------------------------------------------------------------

/// Counts ops whose target's parent already exists in the before-tree:
/// UPD/DEL always (they act on existing nodes, the root included), ADD/MOV
/// when the destination parent is an existing node. An ADD with no parent
/// (new root) also counts.
pub fn count_root_edit_ops(script: &EditScript) -> usize {
    script
        .ops
        .iter()
        .filter(|op| match op {
            EditOp::Upd { .. } | EditOp::Del { .. } => true,
            EditOp::Add { parent, .. } => {
                matches!(parent, None | Some(NodeRef::Pos(_)))
            }
            EditOp::Mov { parent, .. } => matches!(parent, NodeRef::Pos(_)),
        })
        .count()
}

/// Keeps scripts with at most `threshold` root edit operations.
pub const DEFAULT_ROOT_OP_THRESHOLD: usize = 10;

pub fn filter_by_root_ops(scripts: Vec<EditScript>, threshold: usize) -> Vec<EditScript> {
    scripts.into_iter().filter(|s| count_root_edit_ops(s) <= threshold).collect()
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

struct Slot {
    label: Label,
    value: Option<String>,
    attrs: Attrs,
    children: Vec<usize>,
    parent: Option<usize>,
    alive: bool,
    origin: NodeOrigin,
}

struct TreeState {
    slots: Vec<Slot>,
    root: Option<usize>,
    by_pos: Vec<usize>,
    by_fresh: HashMap<String, usize>,
}

impl TreeState {
    fn from_ast(ast: &Ast) -> TreeState {
        let mut state = TreeState {
            slots: Vec::with_capacity(ast.node_count as usize),
            root: None,
            by_pos: vec![usize::MAX; ast.node_count as usize],
            by_fresh: HashMap::new(),
        };
        fn walk(node: &Node, parent: Option<usize>, state: &mut TreeState) -> usize {
            let slot = state.slots.len();
            state.slots.push(Slot {
                label: node.label,
                value: node.value.clone(),
                attrs: node.attrs.clone(),
                children: Vec::new(),
                parent,
                alive: true,
                origin: NodeOrigin::Before(node.position),
            });
            state.by_pos[node.position as usize - 1] = slot;
            for child in &node.children {
                let c = walk(child, Some(slot), state);
                state.slots[slot].children.push(c);
            }
            slot
        }
        let root = walk(&ast.root, None, &mut state);
        state.root = Some(root);
        state
    }

    fn resolve(&self, op_index: usize, r: &NodeRef) -> Result<usize> {
        let slot = match r {
            NodeRef::Pos(p) => self.by_pos.get(*p as usize - 1).copied(),
            NodeRef::Fresh(id) => self.by_fresh.get(id).copied(),
        };
        match slot {
            Some(s) if self.slots[s].alive => Ok(s),
            _ => Err(Error::DanglingRef { op_index, reference: r.to_string() }),
        }
    }

    fn is_ancestor(&self, maybe_ancestor: usize, mut node: usize) -> bool {
        loop {
            if node == maybe_ancestor {
                return true;
            }
            match self.slots[node].parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    fn insert_child(&mut self, op_index: usize, parent: usize, index: u32, child: usize) -> Result<()> {
        let len = self.slots[parent].children.len();
        let at = index as usize - 1;
        if at > len {
            return Err(Error::InvalidOp {
                op_index,
                message: format!("index {index} out of range (parent has {len} children)"),
            });
        }
        self.slots[parent].children.insert(at, child);
        self.slots[child].parent = Some(parent);
        Ok(())
    }

    fn detach(&mut self, node: usize) {
        if let Some(p) = self.slots[node].parent {
            self.slots[p].children.retain(|c| *c != node);
        }
        self.slots[node].parent = None;
    }

    fn to_ast(&self, source_id: &str) -> Result<(Ast, Vec<NodeOrigin>)> {
        let root = self.root.filter(|r| self.slots[*r].alive).ok_or_else(|| {
            Error::InvalidOp { op_index: usize::MAX, message: "script left an empty tree".into() }
        })?;
        // Pre-order over slots matches pre-order position assignment, so the
        // origin list lines up with the indexed tree.
        let mut origins = Vec::new();
        fn build(state: &TreeState, slot: usize, origins: &mut Vec<NodeOrigin>) -> Node {
            let s = &state.slots[slot];
            origins.push(s.origin.clone());
            Node {
                position: 0,
                label: s.label,
                value: s.value.clone(),
                attrs: s.attrs.clone(),
                children: s.children.iter().map(|c| build(state, *c, origins)).collect(),
            }
        }
        let tree = build(self, root, &mut origins);
        Ok((index_preorder(Ast::new(tree).with_source_id(source_id)), origins))
    }
}

/// Where a node of the applied tree came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOrigin {
    /// Kept from the before-tree (position in the before-tree).
    Before(u32),
    /// Introduced by an ADD op (its fresh id).
    Added(String),
}

/// Applies `ops` to `before` in source order, validating each step, and
/// returns the resulting tree.
pub fn apply_edit_script(before: &Ast, ops: &[EditOp]) -> Result<Ast> {
    apply_edit_script_traced(before, ops).map(|(ast, _)| ast)
}

/// Like [`apply_edit_script`], additionally reporting where each node of the
/// result came from (kept before-tree node or fresh ADD), indexed by the
/// result's pre-order positions.
pub fn apply_edit_script_traced(before: &Ast, ops: &[EditOp]) -> Result<(Ast, Vec<NodeOrigin>)> {
    let mut state = TreeState::from_ast(before);
    for (i, op) in ops.iter().enumerate() {
        match op {
            EditOp::Upd { node, new_value } => {
                let slot = state.resolve(i, &NodeRef::Pos(*node))?;
                state.slots[slot].value = new_value.clone();
            }
            EditOp::Del { node } => {
                let slot = state.resolve(i, &NodeRef::Pos(*node))?;
                if !state.slots[slot].children.is_empty() {
                    return Err(Error::InvalidOp {
                        op_index: i,
                        message: format!("DEL({node}) targets a non-leaf node"),
                    });
                }
                state.detach(slot);
                state.slots[slot].alive = false;
                if state.root == Some(slot) {
                    state.root = None;
                }
            }
            EditOp::Add { node, parent, index, label, value, attrs } => {
                let slot = state.slots.len();
                state.slots.push(Slot {
                    label: *label,
                    value: value.clone(),
                    attrs: attrs.clone(),
                    children: Vec::new(),
                    parent: None,
                    alive: true,
                    origin: NodeOrigin::Added(node.clone()),
                });
                state.by_fresh.insert(node.clone(), slot);
                match parent {
                    Some(parent) => {
                        let p = state.resolve(i, parent)?;
                        let index = index.ok_or_else(|| Error::InvalidOp {
                            op_index: i,
                            message: "ADD with a parent requires `index`".to_owned(),
                        })?;
                        state.insert_child(i, p, index, slot)?;
                    }
                    None => {
                        // New root; an existing root becomes its only child.
                        if let Some(old) = state.root {
                            state.slots[old].parent = Some(slot);
                            state.slots[slot].children.push(old);
                        }
                        state.root = Some(slot);
                    }
                }
            }
            EditOp::Mov { node, parent, index } => {
                let slot = state.resolve(i, &NodeRef::Pos(*node))?;
                let dest = state.resolve(i, parent)?;
                if state.is_ancestor(slot, dest) {
                    return Err(Error::InvalidOp {
                        op_index: i,
                        message: format!("MOV({node}) destination lies inside the moved subtree"),
                    });
                }
                state.detach(slot);
                state.insert_child(i, dest, *index, slot)?;
            }
        }
    }
    state.to_ast(&before.source_id)
}

/// Applies the script's ops and checks the result is isomorphic to its
/// after-tree.
pub fn validate_script(script: &EditScript) -> Result<()> {
    let produced = apply_edit_script(&script.before, &script.ops)?;
    if produced.isomorphic(&script.after) {
        Ok(())
    } else {
        Err(Error::InvalidOp {
            op_index: script.ops.len(),
            message: "applying the script does not reproduce the after-tree".to_owned(),
        })
    }
}

// ---------------------------------------------------------------------------
// Naive differ
// ---------------------------------------------------------------------------

/// Produces an UPD/ADD/DEL script (no MOV) by top-down label-aligned
/// matching. Not minimal, but its output always passes
/// [`apply_edit_script`] round-trip; move inference is left to external
/// differs.
pub fn diff_naive(before: &Ast, after: &Ast) -> EditScript {
    let mut ops = Vec::new();
    let mut fresh = 0u32;
    if before.root.label == after.root.label {
        diff_nodes(&before.root, &after.root, &mut ops, &mut fresh);
    } else {
        emit_subtree_dels(&before.root, &mut ops);
        emit_subtree_adds(&after.root, None, None, &mut ops, &mut fresh);
    }
    EditScript { before: before.clone(), after: after.clone(), ops }
}

fn diff_nodes(b: &Node, a: &Node, ops: &mut Vec<EditOp>, fresh: &mut u32) {
    debug_assert_eq!(b.label, a.label);
    if b.value != a.value {
        ops.push(EditOp::Upd { node: b.position, new_value: a.value.clone() });
    }
    let matched = label_lcs(&b.children, &a.children);
    let matched_b: Vec<usize> = matched.iter().map(|(i, _)| *i).collect();
    let matched_a: Vec<usize> = matched.iter().map(|(_, j)| *j).collect();
    for (i, j) in &matched {
        diff_nodes(&b.children[*i], &a.children[*j], ops, fresh);
    }
    for (i, child) in b.children.iter().enumerate() {
        if !matched_b.contains(&i) {
            emit_subtree_dels(child, ops);
        }
    }
    for (j, child) in a.children.iter().enumerate() {
        if !matched_a.contains(&j) {
            emit_subtree_adds(child, Some(NodeRef::Pos(b.position)), Some(j as u32 + 1), ops, fresh);
        }
    }
}

fn emit_subtree_dels(node: &Node, ops: &mut Vec<EditOp>) {
    for child in &node.children {
        emit_subtree_dels(child, ops);
    }
    ops.push(EditOp::Del { node: node.position });
}

fn emit_subtree_adds(
    node: &Node,
    parent: Option<NodeRef>,
    index: Option<u32>,
    ops: &mut Vec<EditOp>,
    fresh: &mut u32,
) {
    *fresh += 1;
    let id = format!("t{fresh}");
    ops.push(EditOp::Add {
        node: id.clone(),
        parent,
        index,
        label: node.label,
        value: node.value.clone(),
        attrs: node.attrs.clone(),
    });
    for (j, child) in node.children.iter().enumerate() {
        emit_subtree_adds(child, Some(NodeRef::Fresh(id.clone())), Some(j as u32 + 1), ops, fresh);
    }
}

/// Longest common subsequence over child labels; returns matched index pairs.
fn label_lcs(b: &[Node], a: &[Node]) -> Vec<(usize, usize)> {
    let (n, m) = (b.len(), a.len());
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i][j] = if b[i].label == a[j].label {
                dp[i + 1][j + 1] + 1
            } else {
                dp[i + 1][j].max(dp[i][j + 1])
            };
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if b[i].label == a[j].label {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if dp[i + 1][j] >= dp[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Helper for building op lists in tests and generators: looks up the
/// position of the node with the given value in a tree.
pub fn position_of_value(ast: &Ast, value: &str) -> Option<u32> {
    ast.view().nodes.iter().find(|n| n.value.as_deref() == Some(value)).map(|n| n.position)
}

/// Ordered map from fresh ids to the ADD op that declared them.
pub fn fresh_ids(ops: &[EditOp]) -> BTreeMap<&str, &EditOp> {
    ops.iter()
        .filter_map(|op| match op {
            EditOp::Add { node, .. } => Some((node.as_str(), op)),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Label;

    fn leafed(label: Label, value: &str) -> Node {
        Node::valued(label, value)
    }

    fn small_tree() -> Ast {
        Ast::new(Node::new(Label::Assignment).with_children(vec![
            leafed(Label::VariableAccess, "x"),
            Node::new(Label::MethodCall).with_children(vec![
                leafed(Label::VariableAccess, "a"),
                leafed(Label::Literal, "1"),
            ]),
        ]))
    }

    #[test]
    fn parse_empty_script() {
        let t = small_tree();
        let script = parse_edit_script(r#"{"ops": []}"#, t.clone(), t).unwrap();
        assert!(script.ops.is_empty());
        assert_eq!(count_root_edit_ops(&script), 0);
    }

    #[test]
    fn parse_single_upd() {
        let t = small_tree();
        let script =
            parse_edit_script(r#"{"ops": [{"kind":"UPD","node":3,"new_value":"z"}]}"#, t.clone(), t)
                .unwrap();
        assert_eq!(script.ops.len(), 1);
    }

    #[test]
    fn add_missing_index_is_error() {
        let t = small_tree();
        let err = parse_edit_script(
            r#"{"ops": [{"kind":"ADD","node":"t1","parent":2,"label":"Literal","value":"0"}]}"#,
            t.clone(),
            t,
        )
        .unwrap_err();
        assert!(err.to_string().contains("index"));
    }

    #[test]
    fn dangling_reference_names_op() {
        let t = small_tree();
        let err = parse_edit_script(
            r#"{"ops": [{"kind":"DEL","node":9}]}"#,
            t.clone(),
            t,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DanglingRef { op_index: 0, .. }));
    }

    #[test]
    fn apply_upd_on_single_node() {
        let before = Ast::new(leafed(Label::Literal, "x"));
        let after =
            apply_edit_script(&before, &[EditOp::Upd { node: 1, new_value: Some("y".into()) }])
                .unwrap();
        assert_eq!(after.root.value.as_deref(), Some("y"));
        assert_eq!(after.node_count, 1);
    }

    #[test]
    fn apply_add_leaf() {
        let before = Ast::new(Node::new(Label::MethodCall));
        let after = apply_edit_script(
            &before,
            &[EditOp::Add {
                node: "t1".into(),
                parent: Some(NodeRef::Pos(1)),
                index: Some(1),
                label: Label::Literal,
                value: Some("0".into()),
                attrs: Attrs::new(),
            }],
        )
        .unwrap();
        assert_eq!(after.node_count, 2);
        assert_eq!(after.root.children[0].value.as_deref(), Some("0"));
    }

    #[test]
    fn apply_mov_between_parents() {
        // move "a" from the call to the assignment (as first child)
        let before = small_tree();
        let a_pos = position_of_value(&before, "a").unwrap();
        let after =
            apply_edit_script(&before, &[EditOp::Mov { node: a_pos, parent: NodeRef::Pos(1), index: 1 }])
                .unwrap();
        let expected = Ast::new(Node::new(Label::Assignment).with_children(vec![
            leafed(Label::VariableAccess, "a"),
            leafed(Label::VariableAccess, "x"),
            Node::new(Label::MethodCall).with_children(vec![leafed(Label::Literal, "1")]),
        ]));
        assert!(after.isomorphic(&expected));
    }

    #[test]
    fn del_non_leaf_is_error() {
        let before = small_tree();
        let err = apply_edit_script(&before, &[EditOp::Del { node: 3 }]).unwrap_err();
        assert!(err.to_string().contains("non-leaf"));
    }

    #[test]
    fn root_op_counting_for_added_call() {
        // Insert call(a, b): only the call's own ADD has an existing parent.
        let before = Ast::new(Node::new(Label::Assignment).with_children(vec![leafed(
            Label::VariableAccess,
            "x",
        )]));
        let ops = vec![
            EditOp::Add {
                node: "call".into(),
                parent: Some(NodeRef::Pos(1)),
                index: Some(2),
                label: Label::MethodCall,
                value: Some("call".into()),
                attrs: Attrs::new(),
            },
            EditOp::Add {
                node: "a".into(),
                parent: Some(NodeRef::Fresh("call".into())),
                index: Some(1),
                label: Label::VariableAccess,
                value: Some("a".into()),
                attrs: Attrs::new(),
            },
            EditOp::Add {
                node: "b".into(),
                parent: Some(NodeRef::Fresh("call".into())),
                index: Some(2),
                label: Label::VariableAccess,
                value: Some("b".into()),
                attrs: Attrs::new(),
            },
        ];
        let after = apply_edit_script(&before, &ops).unwrap();
        let script = EditScript { before, after, ops };
        assert_eq!(count_root_edit_ops(&script), 1);
    }

    #[test]
    fn root_op_counting_two_upds() {
        // Two UPDs on existing leaves of a 4-node tree: both are root ops.
        let before = Ast::new(Node::new(Label::MethodCall).with_children(vec![
            leafed(Label::VariableAccess, "a"),
            leafed(Label::VariableAccess, "b"),
            leafed(Label::Literal, "1"),
        ]));
        let ops = vec![
            EditOp::Upd { node: 2, new_value: Some("c".into()) },
            EditOp::Upd { node: 3, new_value: Some("d".into()) },
        ];
        let after = apply_edit_script(&before, &ops).unwrap();
        let script = EditScript { before, after, ops };
        assert_eq!(count_root_edit_ops(&script), 2);
    }

    #[test]
    fn filter_threshold_boundary() {
        let base = Ast::new(Node::new(Label::MethodCall).with_children(
            (0..11).map(|i| leafed(Label::Literal, &i.to_string())).collect(),
        ));
        let make = |n: usize| {
            let ops: Vec<EditOp> = (0..n)
                .map(|i| EditOp::Upd { node: i as u32 + 2, new_value: Some("v".into()) })
                .collect();
            let after = apply_edit_script(&base, &ops).unwrap();
            EditScript { before: base.clone(), after, ops }
        };
        let kept = filter_by_root_ops(vec![make(11), make(10), make(1)], 10);
        assert_eq!(kept.len(), 2);
        assert!(filter_by_root_ops(vec![], 10).is_empty());
    }

    #[test]
    fn diff_identical_trees_is_empty() {
        let t = small_tree();
        assert!(diff_naive(&t, &t).ops.is_empty());
    }

    #[test]
    fn diff_single_value_change_is_upd() {
        let before = small_tree();
        let mut after = before.clone();
        after.root.children[1].children[1].value = Some("2".into());
        let script = diff_naive(&before, &after);
        assert_eq!(script.ops.len(), 1);
        assert!(matches!(&script.ops[0], EditOp::Upd { .. }));
        validate_script(&script).unwrap();
    }

    #[test]
    fn diff_subtree_replacement_round_trips() {
        let before = small_tree();
        let after = Ast::new(Node::new(Label::Assignment).with_children(vec![
            leafed(Label::VariableAccess, "x"),
            Node::new(Label::BinaryOperator).with_children(vec![
                leafed(Label::VariableAccess, "a"),
                leafed(Label::Literal, "1"),
            ]),
        ]));
        let script = diff_naive(&before, &after);
        assert!(script.ops.iter().any(|o| matches!(o, EditOp::Del { .. })));
        assert!(script.ops.iter().any(|o| matches!(o, EditOp::Add { .. })));
        validate_script(&script).unwrap();
    }

    #[test]
    fn diff_root_replacement_round_trips() {
        let before = small_tree();
        let after = Ast::new(Node::new(Label::Return).with_children(vec![leafed(
            Label::Literal,
            "0",
        )]));
        validate_script(&diff_naive(&before, &after)).unwrap();
    }

    #[test]
    fn script_document_round_trip() {
        let before = small_tree();
        let mut after = before.clone();
        after.root.children[0].value = Some("y".into());
        let script = diff_naive(&before, &after);
        let bytes = serialize_edit_script(&script);
        let loaded = load_edit_script(&bytes, |p| {
            Err(Error::Parse { location: p.into(), message: "no file refs in test".into() })
        })
        .unwrap();
        assert!(loaded.before.isomorphic(&script.before));
        assert!(loaded.after.isomorphic(&script.after));
        assert_eq!(loaded.ops, script.ops);
    }
}
