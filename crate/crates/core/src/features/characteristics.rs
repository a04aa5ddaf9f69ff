//! Node characteristics: boolean program-analysis facts per node, keyed by
//! node label.
//!
//! Characteristics for variable accesses (V1-V16), method calls (M1-M14),
//! logical-expression roots (LE1-LE6), binary operators (BO1-BO4), and
//! statements (S1-S5, on the virtual root) are evaluated from node
//! attributes and tree structure. Kind-valued characteristics (S1-S4, BO1)
//! expand into one boolean sub-characteristic per kind. Usage facts for
//! variables (V7-V12) and calls (M6-M8) additionally propagate upward as
//! primed characteristics on enclosing calls and the statement's virtual
//! root.
//!
//! A characteristic whose backing attribute is absent evaluates to false.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::ast::{Ast, AstView, Label, Node};

/// Index into the fixed characteristic registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharacteristicId(pub u16);

/// Statement kinds for S1-S4.
pub const STATEMENT_KINDS: [&str; 9] =
    ["assignment", "call", "return", "if", "loop", "try", "throw", "declaration", "other"];

/// Binary operator kinds for BO1: logical relation, bit operations,
/// comparisons, shifts, and arithmetic.
pub const OPERATOR_KINDS: [&str; 18] = [
    "||", "&&", "|", "^", "&", "==", "!=", "<", ">", "<=", ">=", "<<", ">>", "+", "-", "*", "/",
    "%",
];

const MATH_OPERATORS: [&str; 5] = ["+", "-", "*", "/", "%"];

/// Attribute names backing the attribute-driven characteristics.
pub mod attrs {
    pub const TYPE_PRIMITIVE: &str = "type_primitive";
    pub const TYPE_OBJECT: &str = "type_object";
    pub const INSTANCE_OF_CLASS: &str = "instance_of_class";
    pub const COMPATIBLE_VARS_IN_SCOPE: &str = "compatible_vars_in_scope";
    pub const COMPATIBLE_PARAM_METHODS: &str = "compatible_param_methods";
    pub const COMPATIBLE_RETURN_METHODS: &str = "compatible_return_methods";
    pub const LOCAL_UNREFERENCED_BEFORE: &str = "local_unreferenced_before";
    pub const LOCAL_UNASSIGNED_BEFORE: &str = "local_unassigned_before";
    pub const FIELD_UNREFERENCED_ELSEWHERE: &str = "field_unreferenced_elsewhere";
    pub const FIELD_UNASSIGNED_ELSEWHERE: &str = "field_unassigned_elsewhere";
    pub const SIMILAR_USE_NULL_GUARD: &str = "similar_use_null_guard";
    pub const SIMILAR_USE_NORMAL_GUARD: &str = "similar_use_normal_guard";
    pub const SIMILAR_USE_TRY_WRAPPED: &str = "similar_use_try_wrapped";
    pub const REPLACE_WITH_VAR_MATCHES_CALL: &str = "replace_with_var_matches_call";
    pub const REPLACE_WITH_CALL_MATCHES_CALL: &str = "replace_with_call_matches_call";
    pub const VARS_IN_SCOPE: &str = "vars_in_scope";
    pub const METHODS_IN_SCOPE: &str = "methods_in_scope";
    pub const RETURN_PRIMITIVE: &str = "return_primitive";
    pub const RETURN_OBJECT: &str = "return_object";
    pub const PARAM_COMPATIBLE_WITH_RETURN: &str = "param_compatible_with_return";
    pub const HAS_OVERLOADS: &str = "has_overloads";
    pub const ALT_ATOM_SAME_TYPE_VAR: &str = "alt_atom_same_type_var";
    pub const UNUSED_VAR_WITH_ATOMS_ELSEWHERE: &str = "unused_var_with_atoms_elsewhere";
    pub const UNREFERENCED_BOOL_VAR_IN_SCOPE: &str = "unreferenced_bool_var_in_scope";
    pub const STMT_KIND: &str = "stmt_kind";
    pub const PREV_STMT_KIND: &str = "prev_stmt_kind";
    pub const NEXT_STMT_KIND: &str = "next_stmt_kind";
    pub const PARENT_STMT_KIND: &str = "parent_stmt_kind";
    pub const THROWS_CONTEXT: &str = "throws_context";
}

/// The fixed registry of characteristic ids, their names, and the label
/// sets they apply to.
pub struct Registry {
    names: Vec<&'static str>,
    owned_names: Vec<String>,
    by_name: HashMap<String, CharacteristicId>,
    per_label: Vec<Vec<CharacteristicId>>,
}

impl Registry {
    pub fn len(&self) -> usize {
        self.names.len() + self.owned_names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, id: CharacteristicId) -> &str {
        let i = id.0 as usize;
        if i < self.names.len() {
            self.names[i]
        } else {
            &self.owned_names[i - self.names.len()]
        }
    }

    pub fn by_name(&self, name: &str) -> Option<CharacteristicId> {
        self.by_name.get(name).copied()
    }

    /// The characteristic set defined for a label (the paper's C^L); empty
    /// for labels without engineered characteristics.
    pub fn for_label(&self, label: Label) -> &[CharacteristicId] {
        &self.per_label[label.ordinal()]
    }

    pub fn ids(&self) -> impl Iterator<Item = CharacteristicId> {
        (0..self.len() as u16).map(CharacteristicId)
    }
}

/// Global registry; built once.
pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

// Fixed plain ids. Expanded and primed ids are appended programmatically.
const PLAIN: [&str; 39] = [
    "V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9", "V10", "V11", "V12", "V13", "V14",
    "V15", "V16", "M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9", "M10", "M11", "M12",
    "M13", "M14", "LE1", "LE2", "LE3", "LE4", "LE5", "LE6", "BO2", "BO3", "BO4",
];

fn build_registry() -> Registry {
    let mut owned_names: Vec<String> = Vec::new();
    for op in OPERATOR_KINDS {
        owned_names.push(format!("BO1:{op}"));
    }
    for s in ["S1", "S2", "S3", "S4"] {
        for kind in STATEMENT_KINDS {
            owned_names.push(format!("{s}:{kind}"));
        }
    }
    owned_names.push("S5".to_owned());
    for v in ["V7'", "V8'", "V9'", "V10'", "V11'", "V12'"] {
        owned_names.push(v.to_owned());
    }
    for m in ["M6'", "M7'", "M8'"] {
        owned_names.push(m.to_owned());
    }

    let mut by_name = HashMap::new();
    for (i, n) in PLAIN.iter().enumerate() {
        by_name.insert((*n).to_owned(), CharacteristicId(i as u16));
    }
    for (i, n) in owned_names.iter().enumerate() {
        by_name.insert(n.clone(), CharacteristicId((PLAIN.len() + i) as u16));
    }
    let total = PLAIN.len() + owned_names.len();
    assert!(total <= 128, "characteristic bitset is u128");

    let id = |name: &str| by_name[name];
    let range = |prefix: &str, kinds: &[&str]| -> Vec<CharacteristicId> {
        kinds.iter().map(|k| id(&format!("{prefix}:{k}"))).collect()
    };

    let mut per_label: Vec<Vec<CharacteristicId>> = vec![Vec::new(); Label::ALL.len()];

    per_label[Label::VariableAccess.ordinal()] =
        (1..=16).map(|i| id(&format!("V{i}"))).collect();

    let mut meth: Vec<CharacteristicId> = (1..=14).map(|i| id(&format!("M{i}"))).collect();
    meth.extend((7..=12).map(|i| id(&format!("V{i}'"))));
    per_label[Label::MethodCall.ordinal()] = meth;

    let mut operator: Vec<CharacteristicId> = range("BO1", &OPERATOR_KINDS);
    operator.extend(["BO2", "BO3", "BO4"].map(id));
    operator.extend((1..=6).map(|i| id(&format!("LE{i}"))));
    per_label[Label::BinaryOperator.ordinal()] = operator.clone();
    per_label[Label::LogicalOperator.ordinal()] = operator;

    let mut stmt: Vec<CharacteristicId> = Vec::new();
    for s in ["S1", "S2", "S3", "S4"] {
        stmt.extend(range(s, &STATEMENT_KINDS));
    }
    stmt.push(id("S5"));
    stmt.extend((7..=12).map(|i| id(&format!("V{i}'"))));
    stmt.extend((6..=8).map(|i| id(&format!("M{i}'"))));
    per_label[Label::VirtualRoot.ordinal()] = stmt;

    Registry { names: PLAIN.to_vec(), owned_names, by_name, per_label }
}

/// Per-node characteristic truth values, indexed by pre-order position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicVector {
    bits: Vec<u128>,
}

impl CharacteristicVector {
    pub fn empty(node_count: u32) -> CharacteristicVector {
        CharacteristicVector { bits: vec![0; node_count as usize] }
    }

    pub fn get(&self, position: u32, id: CharacteristicId) -> bool {
        self.bits[position as usize - 1] & (1u128 << id.0) != 0
    }

    pub fn set(&mut self, position: u32, id: CharacteristicId) {
        self.bits[position as usize - 1] |= 1u128 << id.0;
    }

    /// Ids of characteristics true at `position`.
    pub fn active(&self, position: u32) -> Vec<CharacteristicId> {
        registry().ids().filter(|id| self.get(position, *id)).collect()
    }
}

/// Normalized Levenshtein similarity threshold for "similar identifier".
const SIMILARITY_THRESHOLD: f64 = 0.7;

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Two identifiers are similar when they differ and their normalized
/// Levenshtein similarity `1 - dist/max(len)` reaches the threshold.
pub fn similar_identifier(a: &str, b: &str) -> bool {
    if a == b || a.is_empty() || b.is_empty() {
        return false;
    }
    let max_len = a.chars().count().max(b.chars().count());
    1.0 - levenshtein(a, b) as f64 / max_len as f64 >= SIMILARITY_THRESHOLD
}

fn any_similar(own: Option<&str>, candidates: &[&str]) -> bool {
    match own {
        Some(own) => candidates.iter().any(|c| similar_identifier(own, c)),
        None => false,
    }
}

/// Evaluates every characteristic for every node. Propagated (primed)
/// characteristics are not set here; see [`propagate_characteristics`].
pub fn compute_characteristics(ast: &Ast) -> CharacteristicVector {
    let reg = registry();
    let view = ast.view();
    let mut vec = CharacteristicVector::empty(ast.node_count);
    for position in 1..=ast.node_count {
        let node = view.node(position);
        match node.label {
            Label::VariableAccess => variable_access(reg, node, position, &mut vec),
            Label::MethodCall => method_call(reg, node, position, &mut vec),
            Label::BinaryOperator | Label::LogicalOperator => {
                operator(reg, &view, node, position, &mut vec);
                if is_logexp_root(&view, position) {
                    logexp_root(reg, &view, node, position, &mut vec);
                }
            }
            Label::VirtualRoot => virtual_root(reg, &view, position, &mut vec),
            _ => {}
        }
    }
    vec
}

fn set_if(vec: &mut CharacteristicVector, position: u32, id: CharacteristicId, value: bool) {
    if value {
        vec.set(position, id);
    }
}

fn variable_access(
    reg: &Registry,
    node: &Node,
    position: u32,
    vec: &mut CharacteristicVector,
) {
    use attrs::*;
    let flags = [
        ("V1", TYPE_PRIMITIVE),
        ("V2", TYPE_OBJECT),
        ("V3", INSTANCE_OF_CLASS),
        ("V4", COMPATIBLE_VARS_IN_SCOPE),
        ("V5", COMPATIBLE_PARAM_METHODS),
        ("V6", COMPATIBLE_RETURN_METHODS),
        ("V7", LOCAL_UNREFERENCED_BEFORE),
        ("V8", LOCAL_UNASSIGNED_BEFORE),
        ("V9", FIELD_UNREFERENCED_ELSEWHERE),
        ("V10", FIELD_UNASSIGNED_ELSEWHERE),
        ("V11", SIMILAR_USE_NULL_GUARD),
        ("V12", SIMILAR_USE_NORMAL_GUARD),
        ("V13", REPLACE_WITH_VAR_MATCHES_CALL),
        ("V14", REPLACE_WITH_CALL_MATCHES_CALL),
    ];
    for (id, attr) in flags {
        set_if(vec, position, reg.by_name(id).unwrap(), node.attr_bool(attr));
    }
    let own = node.value.as_deref();
    set_if(
        vec,
        position,
        reg.by_name("V15").unwrap(),
        any_similar(own, &node.attr_str_list(VARS_IN_SCOPE)),
    );
    set_if(
        vec,
        position,
        reg.by_name("V16").unwrap(),
        any_similar(own, &node.attr_str_list(METHODS_IN_SCOPE)),
    );
}

fn method_call(reg: &Registry, node: &Node, position: u32, vec: &mut CharacteristicVector) {
    use attrs::*;
    let flags = [
        ("M1", RETURN_PRIMITIVE),
        ("M2", RETURN_OBJECT),
        ("M3", PARAM_COMPATIBLE_WITH_RETURN),
        ("M4", COMPATIBLE_VARS_IN_SCOPE),
        ("M5", COMPATIBLE_RETURN_METHODS),
        ("M6", SIMILAR_USE_NULL_GUARD),
        ("M7", SIMILAR_USE_NORMAL_GUARD),
        ("M8", SIMILAR_USE_TRY_WRAPPED),
        ("M9", REPLACE_WITH_VAR_MATCHES_CALL),
        ("M10", REPLACE_WITH_CALL_MATCHES_CALL),
        ("M12", HAS_OVERLOADS),
    ];
    for (id, attr) in flags {
        set_if(vec, position, reg.by_name(id).unwrap(), node.attr_bool(attr));
    }
    let own = node.value.as_deref();
    set_if(
        vec,
        position,
        reg.by_name("M11").unwrap(),
        own.is_some_and(|v| v.starts_with("get")),
    );
    set_if(
        vec,
        position,
        reg.by_name("M13").unwrap(),
        any_similar(own, &node.attr_str_list(VARS_IN_SCOPE)),
    );
    set_if(
        vec,
        position,
        reg.by_name("M14").unwrap(),
        any_similar(own, &node.attr_str_list(METHODS_IN_SCOPE)),
    );
}

fn subtree_contains(view: &AstView<'_>, root: u32, pred: impl Fn(&Node) -> bool) -> bool {
    view.subtree(root).any(|p| pred(view.node(p)))
}

fn is_not_operator(node: &Node) -> bool {
    node.label == Label::UnaryOperator && node.value.as_deref() == Some("!")
}

fn is_null_literal(node: &Node) -> bool {
    node.label == Label::Literal
        && node.value.as_deref().is_some_and(|v| v.eq_ignore_ascii_case("null"))
}

fn operator(
    reg: &Registry,
    view: &AstView<'_>,
    node: &Node,
    position: u32,
    vec: &mut CharacteristicVector,
) {
    let value = node.value.as_deref().unwrap_or("");
    if let Some(id) = reg.by_name(&format!("BO1:{value}")) {
        vec.set(position, id);
    }
    let logical = matches!(value, "&&" | "||");
    let math = MATH_OPERATORS.contains(&value);
    let operand_has = |pred: &dyn Fn(&Node) -> bool| {
        view.children_of(position).iter().any(|c| subtree_contains(view, *c, pred))
    };
    set_if(vec, position, reg.by_name("BO2").unwrap(), logical && operand_has(&is_not_operator));
    set_if(vec, position, reg.by_name("BO3").unwrap(), logical && operand_has(&is_null_literal));
    set_if(
        vec,
        position,
        reg.by_name("BO4").unwrap(),
        math && operand_has(&|n: &Node| {
            n.label == Label::Literal && matches!(n.value.as_deref(), Some("0") | Some("1"))
        }),
    );
}

/// A node roots a logical expression when its parent is not a logical
/// operator (it is the top of the operator chain it belongs to).
fn is_logexp_root(view: &AstView<'_>, position: u32) -> bool {
    view.parent_of(position)
        .map_or(true, |p| view.node(p).label != Label::LogicalOperator)
}

/// Atoms of the logical expression rooted at `position`: leaves of the
/// logical-operator chain.
fn logexp_atoms(view: &AstView<'_>, position: u32) -> Vec<u32> {
    let mut atoms = Vec::new();
    let mut stack = vec![position];
    while let Some(p) = stack.pop() {
        if view.node(p).label == Label::LogicalOperator {
            stack.extend(view.children_of(p).iter().rev());
        } else {
            atoms.push(p);
        }
    }
    atoms
}

fn is_null_check_atom(view: &AstView<'_>, atom: u32) -> bool {
    let node = view.node(atom);
    node.label.is_binary_operator()
        && matches!(node.value.as_deref(), Some("==") | Some("!="))
        && view.children_of(atom).iter().any(|c| is_null_literal(view.node(*c)))
}

fn logexp_root(
    reg: &Registry,
    view: &AstView<'_>,
    node: &Node,
    position: u32,
    vec: &mut CharacteristicVector,
) {
    use attrs::*;
    set_if(vec, position, reg.by_name("LE1").unwrap(), node.attr_bool(ALT_ATOM_SAME_TYPE_VAR));
    set_if(
        vec,
        position,
        reg.by_name("LE2").unwrap(),
        node.attr_bool(UNUSED_VAR_WITH_ATOMS_ELSEWHERE),
    );
    set_if(
        vec,
        position,
        reg.by_name("LE3").unwrap(),
        node.attr_bool(UNREFERENCED_BOOL_VAR_IN_SCOPE),
    );
    let atoms = logexp_atoms(view, position);
    set_if(
        vec,
        position,
        reg.by_name("LE4").unwrap(),
        atoms.iter().any(|a| {
            is_not_operator(view.node(*a)) || subtree_contains(view, *a, is_not_operator)
        }),
    );
    set_if(
        vec,
        position,
        reg.by_name("LE5").unwrap(),
        atoms.iter().any(|a| view.node(*a).label == Label::VariableAccess),
    );
    let null_checks = atoms.iter().filter(|a| is_null_check_atom(view, **a)).count();
    set_if(
        vec,
        position,
        reg.by_name("LE6").unwrap(),
        null_checks >= 1 && null_checks < atoms.len(),
    );
}

fn virtual_root(
    reg: &Registry,
    view: &AstView<'_>,
    position: u32,
    vec: &mut CharacteristicVector,
) {
    use attrs::*;
    // Statement facts live on the virtual root's single child, the
    // statement root.
    let Some(stmt) = view.children_of(position).first() else { return };
    let stmt = view.node(*stmt);
    let kinds = [
        ("S1", STMT_KIND),
        ("S2", PREV_STMT_KIND),
        ("S3", NEXT_STMT_KIND),
        ("S4", PARENT_STMT_KIND),
    ];
    for (prefix, attr) in kinds {
        if let Some(kind) = stmt.attr_str(attr) {
            if let Some(id) = reg.by_name(&format!("{prefix}:{kind}")) {
                vec.set(position, id);
            }
        }
    }
    set_if(vec, position, reg.by_name("S5").unwrap(), stmt.attr_bool(THROWS_CONTEXT));
}

/// Propagates usage characteristics upward: V7-V12 of variable accesses to
/// every enclosing method call and to the statement's virtual root; M6-M8
/// of method calls to the statement's virtual root. The propagated value on
/// the target is the OR over its descendants ("some descendant has c"),
/// recorded under the primed id so the original stays intact.
pub fn propagate_characteristics(vec: &CharacteristicVector, ast: &Ast) -> CharacteristicVector {
    let reg = registry();
    let view = ast.view();
    let mut out = vec.clone();
    let var_sources: Vec<(CharacteristicId, CharacteristicId)> = (7..=12)
        .map(|i| (reg.by_name(&format!("V{i}")).unwrap(), reg.by_name(&format!("V{i}'")).unwrap()))
        .collect();
    let meth_sources: Vec<(CharacteristicId, CharacteristicId)> = (6..=8)
        .map(|i| (reg.by_name(&format!("M{i}")).unwrap(), reg.by_name(&format!("M{i}'")).unwrap()))
        .collect();
    for position in 1..=ast.node_count {
        let label = view.node(position).label;
        let (sources, to_calls) = match label {
            Label::VariableAccess => (&var_sources, true),
            Label::MethodCall => (&meth_sources, false),
            _ => continue,
        };
        let active: Vec<(CharacteristicId, CharacteristicId)> =
            sources.iter().copied().filter(|(plain, _)| vec.get(position, *plain)).collect();
        if active.is_empty() {
            continue;
        }
        let mut at = position;
        let mut vr_done = false;
        while let Some(parent) = view.parent_of(at) {
            let plabel = view.node(parent).label;
            if plabel == Label::MethodCall && to_calls {
                for (_, primed) in &active {
                    out.set(parent, *primed);
                }
            }
            if plabel == Label::VirtualRoot && !vr_done {
                for (_, primed) in &active {
                    out.set(parent, *primed);
                }
                vr_done = true;
            }
            at = parent;
        }
    }
    out
}

/// [`compute_characteristics`] followed by [`propagate_characteristics`].
pub fn characteristics_with_propagation(ast: &Ast) -> CharacteristicVector {
    propagate_characteristics(&compute_characteristics(ast), ast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Node, ATTR_STATEMENT_ROOT};

    #[test]
    fn registry_is_complete_and_stable() {
        let reg = registry();
        assert_eq!(reg.len(), 103);
        assert_eq!(reg.name(CharacteristicId(0)), "V1");
        assert_eq!(reg.by_name("M12"), Some(CharacteristicId(27)));
        assert!(reg.by_name("BO1:==").is_some());
        assert!(reg.by_name("S2:return").is_some());
        assert!(reg.by_name("V7'").is_some());
        assert_eq!(reg.for_label(Label::VariableAccess).len(), 16);
        assert_eq!(reg.for_label(Label::MethodCall).len(), 20);
        assert_eq!(reg.for_label(Label::BinaryOperator).len(), 27);
        assert_eq!(reg.for_label(Label::VirtualRoot).len(), 46);
        assert!(reg.for_label(Label::Literal).is_empty());
    }

    #[test]
    fn overload_flag_sets_m12() {
        let ast = Ast::new(
            Node::valued(Label::MethodCall, "m").with_attr(attrs::HAS_OVERLOADS, true),
        );
        let vec = compute_characteristics(&ast);
        assert!(vec.get(1, registry().by_name("M12").unwrap()));
        assert!(!vec.get(1, registry().by_name("M11").unwrap()));
    }

    #[test]
    fn absent_attrs_mean_all_false() {
        let ast = Ast::new(Node::valued(Label::VariableAccess, "x"));
        let vec = compute_characteristics(&ast);
        assert!(vec.active(1).is_empty());
    }

    #[test]
    fn mix_check_sets_le6() {
        // (x != null) && flag  — one null-check atom, one plain atom.
        let ast = Ast::new(Node::valued(Label::LogicalOperator, "&&").with_children(vec![
            Node::valued(Label::BinaryOperator, "!=").with_children(vec![
                Node::valued(Label::VariableAccess, "x"),
                Node::valued(Label::Literal, "null"),
            ]),
            Node::valued(Label::VariableAccess, "flag"),
        ]));
        let vec = compute_characteristics(&ast);
        let reg = registry();
        assert!(vec.get(1, reg.by_name("LE6").unwrap()));
        assert!(vec.get(1, reg.by_name("LE5").unwrap()));
        assert!(vec.get(1, reg.by_name("BO3").unwrap()));
        assert!(vec.get(1, reg.by_name("BO1:&&").unwrap()));
        // The inner != is not a logexp root, so its LE bits stay clear.
        assert!(!vec.get(2, reg.by_name("LE6").unwrap()));
        assert!(vec.get(2, reg.by_name("BO1:!=").unwrap()));
    }

    #[test]
    fn levenshtein_similarity() {
        assert!(similar_identifier("counts", "count"));
        assert!(!similar_identifier("count", "count"));
        assert!(!similar_identifier("alpha", "zx"));
    }

    #[test]
    fn propagation_ors_over_descendants() {
        let ast = crate::ast::insert_virtual_roots(Ast::new(
            Node::valued(Label::Assignment, "=")
                .with_attr(ATTR_STATEMENT_ROOT, true)
                .with_children(vec![
                    Node::valued(Label::VariableAccess, "x"),
                    Node::valued(Label::MethodCall, "f").with_children(vec![Node::valued(
                        Label::VariableAccess,
                        "y",
                    )
                    .with_attr(attrs::LOCAL_UNREFERENCED_BEFORE, true)]),
                ]),
        ));
        let vec = characteristics_with_propagation(&ast);
        let reg = registry();
        let view = ast.view();
        let call = (1..=ast.node_count).find(|p| view.node(*p).label == Label::MethodCall).unwrap();
        let vr = (1..=ast.node_count).find(|p| view.node(*p).label == Label::VirtualRoot).unwrap();
        let y = (1..=ast.node_count)
            .find(|p| view.node(*p).value.as_deref() == Some("y"))
            .unwrap();
        assert!(vec.get(y, reg.by_name("V7").unwrap()));
        assert!(vec.get(call, reg.by_name("V7'").unwrap()));
        assert!(vec.get(vr, reg.by_name("V7'").unwrap()));
        // x has no flag: nothing propagated from it, original bits intact.
        assert!(!vec.get(call, reg.by_name("V8'").unwrap()));
        assert!(!vec.get(y, reg.by_name("V7'").unwrap()));
    }

    #[test]
    fn statement_kind_expansion() {
        let ast = crate::ast::insert_virtual_roots(Ast::new(
            Node::valued(Label::Return, "return")
                .with_attr(ATTR_STATEMENT_ROOT, true)
                .with_attr(attrs::STMT_KIND, "return")
                .with_attr(attrs::NEXT_STMT_KIND, "if")
                .with_attr(attrs::THROWS_CONTEXT, true),
        ));
        let vec = compute_characteristics(&ast);
        let reg = registry();
        assert!(vec.get(1, reg.by_name("S1:return").unwrap()));
        assert!(vec.get(1, reg.by_name("S3:if").unwrap()));
        assert!(!vec.get(1, reg.by_name("S2:if").unwrap()));
        assert!(vec.get(1, reg.by_name("S5").unwrap()));
    }
}
