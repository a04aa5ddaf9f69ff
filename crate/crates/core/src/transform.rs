//! The sixteen repair transforms and their rule-based extraction from edit
//! scripts.
//!
//! Each rule keys on the essential ops of a script (the update, the added
//! wrapper, the moved statement) and checks structural side conditions plus
//! definition-site edit flags carried as node attributes. Rules that wrap or
//! unwrap whole statements attach their label to the statement's
//! `VirtualRoot`; inner rules attach to the node the edit targets. The
//! labeling is expressed over the before-tree with virtual roots inserted,
//! positions re-mapped accordingly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{
    insert_virtual_roots_mapped, parse_ast_document, serialize_ast_document, Ast, AstView, Label,
};
use crate::edit::{apply_edit_script_traced, EditOp, EditScript, NodeOrigin, NodeRef};
use crate::error::{Error, Result};

/// The transform alphabet: sixteen repair transforms plus `EMPTY` for "no
/// transform on this node". `EMPTY` has ordinal 0; tie-breaks prefer it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransformName {
    Empty,
    WrapMeth,
    UnwrapMeth,
    VarRwVar,
    VarRwMeth,
    MethRwVar,
    MethRwMeth,
    BinOperatorRep,
    ConstantRep,
    LogExpExp,
    LogExpRed,
    WrapIfN,
    WrapIfO,
    WrapIfElseN,
    WrapIfElseO,
    UnwrapIf,
    WrapTry,
}

impl TransformName {
    /// All 17 names, `EMPTY` first.
    pub const ALL: [TransformName; 17] = [
        TransformName::Empty,
        TransformName::WrapMeth,
        TransformName::UnwrapMeth,
        TransformName::VarRwVar,
        TransformName::VarRwMeth,
        TransformName::MethRwVar,
        TransformName::MethRwMeth,
        TransformName::BinOperatorRep,
        TransformName::ConstantRep,
        TransformName::LogExpExp,
        TransformName::LogExpRed,
        TransformName::WrapIfN,
        TransformName::WrapIfO,
        TransformName::WrapIfElseN,
        TransformName::WrapIfElseO,
        TransformName::UnwrapIf,
        TransformName::WrapTry,
    ];

    /// The sixteen actual transforms (everything but `EMPTY`).
    pub fn actual() -> impl Iterator<Item = TransformName> {
        TransformName::ALL.iter().copied().filter(|t| *t != TransformName::Empty)
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformName::Empty => "EMPTY",
            TransformName::WrapMeth => "Wrap-Meth",
            TransformName::UnwrapMeth => "Unwrap-Meth",
            TransformName::VarRwVar => "Var-RW-Var",
            TransformName::VarRwMeth => "Var-RW-Meth",
            TransformName::MethRwVar => "Meth-RW-Var",
            TransformName::MethRwMeth => "Meth-RW-Meth",
            TransformName::BinOperatorRep => "BinOperator-Rep",
            TransformName::ConstantRep => "Constant-Rep",
            TransformName::LogExpExp => "LogExp-Exp",
            TransformName::LogExpRed => "LogExp-Red",
            TransformName::WrapIfN => "Wrap-IF-N",
            TransformName::WrapIfO => "Wrap-IF-O",
            TransformName::WrapIfElseN => "Wrap-IFELSE-N",
            TransformName::WrapIfElseO => "Wrap-IFELSE-O",
            TransformName::UnwrapIf => "Unwrap-IF",
            TransformName::WrapTry => "Wrap-TRY",
        }
    }

    /// Position in [`TransformName::ALL`]; `EMPTY` is 0.
    pub fn ordinal(self) -> usize {
        TransformName::ALL.iter().position(|t| *t == self).expect("transform in ALL")
    }

    pub fn parse(name: &str) -> Result<TransformName> {
        TransformName::ALL
            .iter()
            .copied()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::UnknownTransform(name.to_owned()))
    }
}

impl fmt::Display for TransformName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for TransformName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TransformName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let s = String::deserialize(d)?;
        TransformName::parse(&s).map_err(D::Error::custom)
    }
}

/// A total map from tree positions to transforms (absent entries read as
/// `EMPTY`), over a before-tree with virtual roots.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformLabeling {
    pub ast: Ast,
    /// Non-`EMPTY` entries only.
    pub labels: BTreeMap<u32, TransformName>,
}

impl TransformLabeling {
    pub fn get(&self, position: u32) -> TransformName {
        self.labels.get(&position).copied().unwrap_or(TransformName::Empty)
    }

    /// Number of actual (non-`EMPTY`) transforms: the example's `S(t)`.
    pub fn active_count(&self) -> usize {
        self.labels.len()
    }

    /// Dense label vector indexed by position - 1.
    pub fn dense(&self) -> Vec<TransformName> {
        (1..=self.ast.node_count).map(|p| self.get(p)).collect()
    }
}

// ---------------------------------------------------------------------------
// Labeled-example document format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LabelingDoc {
    ast: serde_json::Value,
    #[serde(default)]
    labels: BTreeMap<String, TransformName>,
}

/// Parses `{"ast": <node>, "labels": {"11": "Meth-RW-Meth"}}`; omitted
/// positions are `EMPTY`.
pub fn parse_labeled_example(bytes: &str) -> Result<TransformLabeling> {
    let doc: LabelingDoc = serde_json::from_str(bytes).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let ast = parse_ast_document(&doc.ast.to_string())?;
    let mut labels = BTreeMap::new();
    for (key, name) in doc.labels {
        let position: u32 = key.parse().map_err(|_| Error::Parse {
            location: format!("labels.{key}"),
            message: "label keys must be positions".to_owned(),
        })?;
        if position == 0 || position > ast.node_count {
            return Err(Error::Parse {
                location: format!("labels.{key}"),
                message: format!("position out of range 1..={}", ast.node_count),
            });
        }
        labels.insert(position, name);
    }
    Ok(TransformLabeling { ast, labels })
}

pub fn serialize_labeled_example(labeling: &TransformLabeling) -> String {
    let doc = LabelingDoc {
        ast: serde_json::from_str(&serialize_ast_document(&labeling.ast)).expect("ast json"),
        labels: labeling.labels.iter().map(|(p, t)| (p.to_string(), *t)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("labeling serialization")
}

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

/// Instance counts per transform plus the single/multiple example split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabelingStats {
    pub per_transform: BTreeMap<TransformName, usize>,
    pub single: usize,
    pub multiple: usize,
}

pub fn labeling_stats<'a>(labelings: impl IntoIterator<Item = &'a TransformLabeling>) -> LabelingStats {
    let mut stats = LabelingStats::default();
    for labeling in labelings {
        for name in labeling.labels.values() {
            *stats.per_transform.entry(*name).or_insert(0) += 1;
        }
        match labeling.active_count() {
            0 => {}
            1 => stats.single += 1,
            _ => stats.multiple += 1,
        }
    }
    stats
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// Definition-site edit flags, precomputed by the front end:
/// the definition of the node's value was edited / the definition's child
/// nodes were edited. Absent flags read as "untouched".
pub const ATTR_DEF_EDITED: &str = "def_edited";
pub const ATTR_DEF_CHILDREN_EDITED: &str = "def_children_edited";
/// Same flags for the definition of a node's *new* value after an UPD.
pub const ATTR_NEW_DEF_EDITED: &str = "new_def_edited";
pub const ATTR_NEW_DEF_CHILDREN_EDITED: &str = "new_def_children_edited";

fn attr_flag(attrs: &crate::ast::Attrs, key: &str) -> bool {
    attrs.get(key).and_then(serde_json::Value::as_bool).unwrap_or(false)
}

/// Where an extracted label attaches relative to the raw before-tree node
/// the rule identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Attach {
    /// On the node itself.
    Node,
    /// On the statement's `VirtualRoot` parent.
    VirtualRoot,
}

struct Extractor<'a> {
    script: &'a EditScript,
    before: AstView<'a>,
    after: Ast,
    origins: Vec<NodeOrigin>,
    /// Ops targeting each before-tree position (UPD/DEL/MOV only).
    ops_on: HashMap<u32, Vec<&'a EditOp>>,
    /// Fresh id → op index of the declaring ADD.
    adds: HashMap<&'a str, &'a EditOp>,
    found: Vec<(u32, TransformName, Attach)>,
}

/// Applies the sixteen rules and returns the labeling over the before-tree
/// with virtual roots. Two rules claiming one node with different names is
/// an extraction conflict.
pub fn extract_transforms(script: &EditScript) -> Result<TransformLabeling> {
    let (after, origins) = apply_edit_script_traced(&script.before, &script.ops)?;
    let mut ops_on: HashMap<u32, Vec<&EditOp>> = HashMap::new();
    let mut adds: HashMap<&str, &EditOp> = HashMap::new();
    for op in &script.ops {
        match op {
            EditOp::Upd { node, .. } | EditOp::Del { node } | EditOp::Mov { node, .. } => {
                ops_on.entry(*node).or_default().push(op);
            }
            EditOp::Add { node, .. } => {
                adds.insert(node.as_str(), op);
            }
        }
    }
    let mut extractor = Extractor {
        script,
        before: script.before.view(),
        after,
        origins,
        ops_on,
        adds,
        found: Vec::new(),
    };
    extractor.run();

    // Attach in virtual-root space.
    let (vr_ast, raw_to_vr) = insert_virtual_roots_mapped(script.before.clone());
    let vr_view = vr_ast.view();
    let mut labels: BTreeMap<u32, TransformName> = BTreeMap::new();
    for (raw_pos, name, attach) in extractor.found {
        let mapped = raw_to_vr[raw_pos as usize - 1];
        let vr_pos = match attach {
            Attach::Node => mapped,
            Attach::VirtualRoot => {
                match vr_view.parent_of(mapped) {
                    Some(p) if vr_view.node(p).label == Label::VirtualRoot => p,
                    _ => {
                        // The moved statement's root was never flagged as a
                        // statement root, so there is nothing to attach to.
                        log::warn!(
                            "{name} matched at position {raw_pos} but the statement has no \
                             virtual root; skipping"
                        );
                        continue;
                    }
                }
            }
        };
        match labels.get(&vr_pos) {
            None => {
                labels.insert(vr_pos, name);
            }
            Some(existing) if *existing == name => {}
            Some(existing) => {
                return Err(Error::ExtractionConflict {
                    position: vr_pos,
                    first: *existing,
                    second: name,
                });
            }
        }
    }
    drop(vr_view);
    Ok(TransformLabeling { ast: vr_ast, labels })
}

impl<'a> Extractor<'a> {
    fn run(&mut self) {
        self.match_update_rules();
        self.match_wrap_unwrap_meth();
        self.match_del_add_rewrites();
        self.match_meth_rw_meth_case2();
        self.match_logexp_rules();
        self.match_wrap_if_family();
        self.match_ternary_wrap();
        self.match_unwrap_if();
        self.match_wrap_try();
    }

    fn node(&self, pos: u32) -> &'a crate::ast::Node {
        self.before.node(pos)
    }

    fn parent(&self, pos: u32) -> Option<u32> {
        self.before.parent_of(pos)
    }

    /// Any op targets the before-tree node.
    fn touched(&self, pos: u32) -> bool {
        self.ops_on.contains_key(&pos)
    }

    /// All ops targeting `pos` satisfy `exempt` (vacuously true if none).
    fn touched_only_by(&self, pos: u32, exempt: impl Fn(&EditOp) -> bool) -> bool {
        self.ops_on.get(&pos).map_or(true, |ops| ops.iter().all(|op| exempt(op)))
    }

    /// Definition of the node's current value untouched (root and children).
    fn def_untouched(&self, pos: u32) -> bool {
        let attrs = &self.node(pos).attrs;
        !attr_flag(attrs, ATTR_DEF_EDITED) && !attr_flag(attrs, ATTR_DEF_CHILDREN_EDITED)
    }

    /// Definition of the node's post-UPD value untouched.
    fn new_def_untouched(&self, pos: u32) -> bool {
        let attrs = &self.node(pos).attrs;
        !attr_flag(attrs, ATTR_NEW_DEF_EDITED) && !attr_flag(attrs, ATTR_NEW_DEF_CHILDREN_EDITED)
    }

    /// Definition flags on an ADD op's attrs (for the fresh node's value).
    fn add_def_untouched(op: &EditOp) -> bool {
        match op {
            EditOp::Add { attrs, .. } => {
                !attr_flag(attrs, ATTR_DEF_EDITED) && !attr_flag(attrs, ATTR_DEF_CHILDREN_EDITED)
            }
            _ => true,
        }
    }

    fn emit(&mut self, pos: u32, name: TransformName) {
        self.found.push((pos, name, Attach::Node));
    }

    /// After-tree position of a fresh node, if it survived application.
    fn after_pos_of_fresh(&self, id: &str) -> Option<u32> {
        self.origins
            .iter()
            .position(|o| matches!(o, NodeOrigin::Added(i) if i == id))
            .map(|i| i as u32 + 1)
    }

    fn after_view(&self) -> AstView<'_> {
        self.after.view()
    }

    fn origin(&self, after_pos: u32) -> &NodeOrigin {
        &self.origins[after_pos as usize - 1]
    }

    // -- UPD rules: Var-RW-Var, Meth-RW-Meth Case1, BinOperator-Rep,
    //    Constant-Rep ------------------------------------------------------

    fn match_update_rules(&mut self) {
        for op in &self.script.ops {
            let EditOp::Upd { node, .. } = op else { continue };
            let pos = *node;
            match self.node(pos).label {
                Label::VariableAccess => {
                    if self.def_untouched(pos) && self.new_def_untouched(pos) {
                        self.emit(pos, TransformName::VarRwVar);
                    }
                }
                Label::MethodCall => {
                    if self.def_untouched(pos) && self.new_def_untouched(pos) {
                        self.emit(pos, TransformName::MethRwMeth);
                    }
                }
                Label::Literal => self.emit(pos, TransformName::ConstantRep),
                label if label.is_binary_operator() => {
                    self.emit(pos, TransformName::BinOperatorRep)
                }
                _ => {}
            }
        }
    }

    // -- Wrap-Meth / Unwrap-Meth -------------------------------------------

    fn match_wrap_unwrap_meth(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Mov { node: moved, parent: dest, .. } = op else { continue };
            // Wrap-Meth: moved into a freshly added MethodCall whose own
            // parent is the moved node's old parent.
            if let NodeRef::Fresh(id) = dest {
                if let Some(add @ EditOp::Add { parent, label: Label::MethodCall, .. }) =
                    self.adds.get(id.as_str())
                {
                    let same_parent = match parent {
                        Some(NodeRef::Pos(p)) => self.parent(*moved) == Some(*p),
                        None => self.parent(*moved).is_none(),
                        Some(NodeRef::Fresh(_)) => false,
                    };
                    if same_parent && Self::add_def_untouched(add) {
                        hits.push((*moved, TransformName::WrapMeth));
                    }
                }
            }
            // Unwrap-Meth: moved out of a deleted MethodCall parent, landing
            // at that call's old parent.
            if let NodeRef::Pos(dest_pos) = dest {
                let Some(call) = self.parent(*moved) else { continue };
                if self.node(call).label == Label::MethodCall
                    && self.parent(call) == Some(*dest_pos)
                    && self.has_del(call)
                    && self.def_untouched(call)
                {
                    hits.push((*moved, TransformName::UnwrapMeth));
                }
            }
        }
        for (pos, name) in hits {
            self.emit(pos, name);
        }
    }

    fn has_del(&self, pos: u32) -> bool {
        self.ops_on
            .get(&pos)
            .is_some_and(|ops| ops.iter().any(|op| matches!(op, EditOp::Del { .. })))
    }

    // -- Var-RW-Meth / Meth-RW-Var: DEL + ADD under the same parent --------

    fn match_del_add_rewrites(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Del { node } = op else { continue };
            let deleted = *node;
            let Some(parent) = self.parent(deleted) else { continue };
            for add in self.script.ops.iter() {
                let EditOp::Add { parent: add_parent, label, .. } = add else { continue };
                if *add_parent != Some(NodeRef::Pos(parent)) {
                    continue;
                }
                let pair = match (self.node(deleted).label, label) {
                    (Label::VariableAccess, Label::MethodCall) => TransformName::VarRwMeth,
                    (Label::MethodCall, Label::VariableAccess) => TransformName::MethRwVar,
                    _ => continue,
                };
                if self.def_untouched(deleted) && Self::add_def_untouched(add) {
                    hits.push((deleted, pair));
                }
            }
        }
        for (pos, name) in hits {
            self.emit(pos, name);
        }
    }

    // -- Meth-RW-Meth Case2: argument deleted, call itself untouched -------

    fn match_meth_rw_meth_case2(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Del { node } = op else { continue };
            let Some(call) = self.parent(*node) else { continue };
            if self.node(call).label == Label::MethodCall
                && !self.touched(call)
                && self.def_untouched(call)
            {
                hits.push(*node);
            }
        }
        for pos in hits {
            self.emit(pos, TransformName::MethRwMeth);
        }
    }

    // -- LogExp-Exp / LogExp-Red -------------------------------------------

    /// Root of the logical expression containing `pos` in the before-tree:
    /// climb while the parent is a logical operator.
    fn logexp_root(&self, pos: u32) -> u32 {
        self.before.climb_while_parent_is(pos, Label::LogicalOperator)
    }

    fn match_logexp_rules(&mut self) {
        let mut hits = Vec::new();
        // Expansion: an added logical operator with one untouched existing
        // child and one entirely added child.
        for op in &self.script.ops {
            let EditOp::Add { node: id, label: Label::LogicalOperator, .. } = op else { continue };
            let Some(after_pos) = self.after_pos_of_fresh(id) else { continue };
            let after = self.after_view();
            let children = after.children_of(after_pos);
            let kept = children.iter().copied().find(|c| {
                match self.origin(*c) {
                    NodeOrigin::Before(p) => {
                        let p = *p;
                        // The re-hang under the fresh operator is the rule's
                        // own follow-up, not a real edit of the child.
                        self.touched_only_by(p, |op| {
                            matches!(op, EditOp::Mov { parent: NodeRef::Fresh(dest), .. } if dest == id)
                        })
                    }
                    NodeOrigin::Added(_) => false,
                }
            });
            let grown = children.iter().copied().any(|c| {
                after
                    .subtree(c)
                    .all(|d| matches!(self.origin(d), NodeOrigin::Added(_)))
            });
            if let (Some(kept), true) = (kept, grown) {
                if let NodeOrigin::Before(p) = self.origin(kept) {
                    hits.push((self.logexp_root(*p), TransformName::LogExpExp));
                }
            }
        }
        // Reduction: a deleted logical operator with one child untouched
        // (merely re-hung upward) and one child entirely deleted.
        for op in &self.script.ops {
            let EditOp::Del { node } = op else { continue };
            let pos = *node;
            if self.node(pos).label != Label::LogicalOperator {
                continue;
            }
            let ancestors: Vec<u32> = {
                let mut list = Vec::new();
                let mut at = pos;
                while let Some(p) = self.parent(at) {
                    list.push(p);
                    at = p;
                }
                list
            };
            let children = self.before.children_of(pos);
            let kept = children.iter().copied().any(|c| {
                self.touched_only_by(c, |op| {
                    matches!(op, EditOp::Mov { parent: NodeRef::Pos(dest), .. } if ancestors.contains(dest))
                })
            });
            let shrunk = children
                .iter()
                .copied()
                .any(|c| self.before.subtree(c).all(|d| self.has_del(d)));
            if kept && shrunk {
                hits.push((self.logexp_root(pos), TransformName::LogExpRed));
            }
        }
        for (pos, name) in hits {
            self.emit(pos, name);
        }
    }

    // -- Wrap-IF / Wrap-IFELSE on added If nodes ---------------------------

    fn match_wrap_if_family(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Add { node: id, label: Label::If, .. } = op else { continue };
            let Some(if_pos) = self.after_pos_of_fresh(id) else { continue };
            let after = self.after_view();
            let blocks: Vec<u32> = after
                .children_of(if_pos)
                .iter()
                .copied()
                .filter(|c| after.node(*c).label == Label::Block)
                .collect();
            let condition = after
                .children_of(if_pos)
                .iter()
                .copied()
                .find(|c| after.node(*c).label != Label::Block);
            let null_check = condition.is_some_and(|c| self.after_subtree_has_null(&after, c));
            let then_stmts = blocks.first().map(|b| after.children_of(*b)).unwrap_or(&[]);
            let else_stmts = blocks.get(1).map(|b| after.children_of(*b)).unwrap_or(&[]);
            let moved_then = self.moved_in(then_stmts);
            let moved_else = self.moved_in(else_stmts);

            let (target, wrapped_if) = if else_stmts.is_empty() && !moved_then.is_empty() {
                (Some(moved_then), true)
            } else if !then_stmts.is_empty() && !else_stmts.is_empty() {
                // Case1: old statement kept in the then-block;
                // Case2: old statement kept in the else-block.
                if !moved_then.is_empty() && moved_else.is_empty() {
                    (Some(moved_then), false)
                } else if moved_then.is_empty() && !moved_else.is_empty() {
                    (Some(moved_else), false)
                } else {
                    (None, false)
                }
            } else {
                (None, false)
            };
            if let Some(moved) = target {
                let first = moved.into_iter().min().expect("non-empty moved set");
                let name = match (wrapped_if, null_check) {
                    (true, true) => TransformName::WrapIfN,
                    (true, false) => TransformName::WrapIfO,
                    (false, true) => TransformName::WrapIfElseN,
                    (false, false) => TransformName::WrapIfElseO,
                };
                hits.push((first, name));
            }
        }
        for (stmt, name) in hits {
            self.emit_on_virtual_root(stmt, name);
        }
    }

    /// Before-positions of statements in an after-tree block that arrived
    /// there via MOV.
    fn moved_in(&self, block_children: &[u32]) -> Vec<u32> {
        block_children
            .iter()
            .filter_map(|c| match self.origin(*c) {
                NodeOrigin::Before(p) if self.has_mov(*p) => Some(*p),
                _ => None,
            })
            .collect()
    }

    fn has_mov(&self, pos: u32) -> bool {
        self.ops_on
            .get(&pos)
            .is_some_and(|ops| ops.iter().any(|op| matches!(op, EditOp::Mov { .. })))
    }

    fn after_subtree_has_null(&self, after: &AstView<'_>, root: u32) -> bool {
        after.subtree(root).any(|p| {
            let n = after.node(p);
            n.label == Label::Literal
                && n.value.as_deref().is_some_and(|v| v.eq_ignore_ascii_case("null"))
        })
    }

    /// Wrap labels land on the statement's virtual root. In the raw tree
    /// that parent may not exist yet; the emit records the statement root
    /// and the final mapping step moves it onto the `VirtualRoot` node.
    fn emit_on_virtual_root(&mut self, stmt_root: u32, name: TransformName) {
        self.found.push((stmt_root, name, Attach::VirtualRoot));
    }

    // -- Wrap-IFELSE Case3: ternary wrap -----------------------------------

    fn match_ternary_wrap(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Mov { node: moved, parent: NodeRef::Fresh(id), .. } = op else { continue };
            let Some(EditOp::Add { parent, label: Label::TernaryOperator, .. }) =
                self.adds.get(id.as_str())
            else {
                continue;
            };
            let same_parent = match parent {
                Some(NodeRef::Pos(p)) => self.parent(*moved) == Some(*p),
                None => self.parent(*moved).is_none(),
                Some(NodeRef::Fresh(_)) => false,
            };
            if !same_parent {
                continue;
            }
            let Some(ternary_pos) = self.after_pos_of_fresh(id) else { continue };
            let after = self.after_view();
            // rl of a ternary: its condition, the first child.
            let null_check = after
                .children_of(ternary_pos)
                .first()
                .is_some_and(|c| self.after_subtree_has_null(&after, *c));
            let name =
                if null_check { TransformName::WrapIfElseN } else { TransformName::WrapIfElseO };
            hits.push((*moved, name));
        }
        for (pos, name) in hits {
            self.emit(pos, name);
        }
    }

    // -- Unwrap-IF ----------------------------------------------------------

    fn match_unwrap_if(&mut self) {
        let mut hits = Vec::new();
        // Case1: a deleted If with statements moved out of its blocks.
        for op in &self.script.ops {
            let EditOp::Del { node } = op else { continue };
            let pos = *node;
            if self.node(pos).label != Label::If {
                continue;
            }
            let blocks: Vec<u32> = self
                .before
                .children_of(pos)
                .iter()
                .copied()
                .filter(|c| self.node(*c).label == Label::Block)
                .collect();
            let any_moved_out = blocks.iter().any(|b| {
                self.before.children_of(*b).iter().any(|stmt| {
                    let root = self.statement_root(*stmt);
                    self.has_mov(root)
                })
            });
            if any_moved_out {
                hits.push(pos);
            }
        }
        // Case2: a deleted ternary whose kept branch moved up to its parent.
        for op in &self.script.ops {
            let EditOp::Mov { node: moved, parent: NodeRef::Pos(dest), .. } = op else { continue };
            let Some(ternary) = self.parent(*moved) else { continue };
            if self.node(ternary).label == Label::TernaryOperator
                && self.parent(ternary) == Some(*dest)
                && self.has_del(ternary)
            {
                hits.push(ternary);
            }
        }
        for pos in hits {
            self.emit(pos, TransformName::UnwrapIf);
        }
    }

    /// A block child is either the statement root itself or (in a tree that
    /// already carries virtual roots) the `VirtualRoot` above it.
    fn statement_root(&self, block_child: u32) -> u32 {
        if self.node(block_child).label == Label::VirtualRoot {
            self.before.children_of(block_child).first().copied().unwrap_or(block_child)
        } else {
            block_child
        }
    }

    // -- Wrap-TRY ------------------------------------------------------------

    fn match_wrap_try(&mut self) {
        let mut hits = Vec::new();
        for op in &self.script.ops {
            let EditOp::Add { node: id, label: Label::Try, .. } = op else { continue };
            let Some(try_pos) = self.after_pos_of_fresh(id) else { continue };
            let after = self.after_view();
            let body = after
                .children_of(try_pos)
                .iter()
                .copied()
                .find(|c| after.node(*c).label == Label::Block);
            let moved = body.map(|b| self.moved_in(after.children_of(b))).unwrap_or_default();
            if let Some(first) = moved.into_iter().min() {
                hits.push(first);
            }
        }
        for stmt in hits {
            self.emit_on_virtual_root(stmt, TransformName::WrapTry);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Node, ATTR_STATEMENT_ROOT};
    use crate::edit::{apply_edit_script, position_of_value};

    fn script(before: Ast, ops: Vec<EditOp>) -> EditScript {
        let after = apply_edit_script(&before, &ops).expect("test script applies");
        EditScript { before, after, ops }
    }

    #[test]
    fn empty_script_labels_nothing() {
        let before = Ast::new(Node::valued(Label::Literal, "0"));
        let labeling = extract_transforms(&script(before, vec![])).unwrap();
        assert!(labeling.labels.is_empty());
    }

    #[test]
    fn var_rw_var_on_untouched_definitions() {
        let before = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::VariableAccess, "y"),
        ]));
        let pos = position_of_value(&before, "y").unwrap();
        let labeling = extract_transforms(&script(
            before,
            vec![EditOp::Upd { node: pos, new_value: Some("z".into()) }],
        ))
        .unwrap();
        assert_eq!(labeling.labels.len(), 1);
        assert_eq!(labeling.get(pos), TransformName::VarRwVar);
    }

    #[test]
    fn var_rw_var_blocked_by_edited_definition() {
        let before = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::VariableAccess, "y").with_attr(ATTR_DEF_EDITED, true),
        ]));
        let pos = position_of_value(&before, "y").unwrap();
        let labeling = extract_transforms(&script(
            before,
            vec![EditOp::Upd { node: pos, new_value: Some("z".into()) }],
        ))
        .unwrap();
        assert!(labeling.labels.is_empty());
    }

    #[test]
    fn two_meth_rw_meth_instances_is_multiple() {
        // Two calls y() replaced by z(): two labels on distinct nodes.
        let before = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::MethodCall, "y")
                .with_children(vec![Node::valued(Label::VariableAccess, "a")]),
            Node::valued(Label::MethodCall, "y")
                .with_children(vec![Node::valued(Label::VariableAccess, "b")]),
        ]));
        let labeling = extract_transforms(&script(
            before,
            vec![
                EditOp::Upd { node: 2, new_value: Some("z".into()) },
                EditOp::Upd { node: 4, new_value: Some("z".into()) },
            ],
        ))
        .unwrap();
        let stats = labeling_stats([&labeling]);
        assert_eq!(stats.per_transform[&TransformName::MethRwMeth], 2);
        assert_eq!(stats.multiple, 1);
        assert_eq!(stats.single, 0);
    }

    #[test]
    fn wrap_labels_attach_to_virtual_root() {
        // stmt `x = 1` wrapped by `if (y != null) { x = 1; }`
        let before = Ast::new(
            Node::valued(Label::Assignment, "=")
                .with_attr(ATTR_STATEMENT_ROOT, true)
                .with_children(vec![
                    Node::valued(Label::VariableAccess, "x"),
                    Node::valued(Label::Literal, "1"),
                ]),
        );
        let ops = vec![
            EditOp::Add {
                node: "if".into(),
                parent: None,
                index: None,
                label: Label::If,
                value: None,
                attrs: Default::default(),
            },
            EditOp::Add {
                node: "cond".into(),
                parent: Some(NodeRef::Fresh("if".into())),
                index: Some(1),
                label: Label::BinaryOperator,
                value: Some("!=".into()),
                attrs: Default::default(),
            },
            EditOp::Add {
                node: "condvar".into(),
                parent: Some(NodeRef::Fresh("cond".into())),
                index: Some(1),
                label: Label::VariableAccess,
                value: Some("y".into()),
                attrs: Default::default(),
            },
            EditOp::Add {
                node: "null".into(),
                parent: Some(NodeRef::Fresh("cond".into())),
                index: Some(2),
                label: Label::Literal,
                value: Some("null".into()),
                attrs: Default::default(),
            },
            EditOp::Add {
                node: "then".into(),
                parent: Some(NodeRef::Fresh("if".into())),
                index: Some(2),
                label: Label::Block,
                value: None,
                attrs: Default::default(),
            },
            EditOp::Mov { node: 1, parent: NodeRef::Fresh("then".into()), index: 1 },
        ];
        let labeling = extract_transforms(&script(before, ops)).unwrap();
        assert_eq!(labeling.labels.len(), 1);
        let (&pos, &name) = labeling.labels.iter().next().unwrap();
        assert_eq!(name, TransformName::WrapIfN);
        assert_eq!(labeling.ast.view().node(pos).label, Label::VirtualRoot);
    }

    #[test]
    fn conflicting_rules_error() {
        // Deleting a VariableAccess argument of a call while adding a fresh
        // MethodCall under the same call matches both Var-RW-Meth and
        // Meth-RW-Meth Case2 on the same node.
        let before = Ast::new(Node::valued(Label::MethodCall, "m")
            .with_children(vec![Node::valued(Label::VariableAccess, "x")]));
        let ops = vec![
            EditOp::Del { node: 2 },
            EditOp::Add {
                node: "t1".into(),
                parent: Some(NodeRef::Pos(1)),
                index: Some(1),
                label: Label::MethodCall,
                value: Some("g".into()),
                attrs: Default::default(),
            },
        ];
        let err = extract_transforms(&script(before, ops)).unwrap_err();
        match err {
            Error::ExtractionConflict { first, second, .. } => {
                assert_ne!(first, second);
            }
            other => panic!("expected conflict, got {other}"),
        }
    }

    #[test]
    fn labeled_example_round_trip() {
        let before = Ast::new(Node::new(Label::Assignment).with_children(vec![
            Node::valued(Label::VariableAccess, "x"),
            Node::valued(Label::VariableAccess, "y"),
        ]));
        let labeling = TransformLabeling {
            ast: before,
            labels: [(3u32, TransformName::VarRwVar)].into_iter().collect(),
        };
        let echoed = parse_labeled_example(&serialize_labeled_example(&labeling)).unwrap();
        assert_eq!(echoed.labels, labeling.labels);
        assert!(echoed.ast.isomorphic(&labeling.ast));
    }
}
