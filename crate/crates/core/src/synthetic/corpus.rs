//! Handcrafted rule corpus: for every transform and sub-case, at least one
//! edit script that must produce exactly its label and at least two that
//! must not. The expected labelings are exact (a "negative" for one rule may
//! legitimately trigger a different rule; the expectation says which).

use std::collections::BTreeMap;

use crate::ast::{insert_virtual_roots_mapped, Ast, Attrs, Label, Node, ATTR_STATEMENT_ROOT};
use crate::edit::{apply_edit_script, position_of_value, EditOp, EditScript, NodeRef};
use crate::transform::{TransformName, ATTR_DEF_EDITED, ATTR_NEW_DEF_EDITED};

/// One corpus entry: a script and the exact labeling extraction must yield.
pub struct RuleCase {
    pub name: &'static str,
    pub script: EditScript,
    /// Expected labels in the virtual-root tree's position space.
    pub expected: BTreeMap<u32, TransformName>,
    /// True when this case is the rule's positive example.
    pub positive: bool,
}

enum Target {
    /// The node with this value.
    Node(&'static str),
    /// The virtual root of the statement rooted at the node with this value.
    VrOf(&'static str),
}

// -- tree builders ----------------------------------------------------------

fn var(v: &str) -> Node {
    Node::valued(Label::VariableAccess, v)
}

fn lit(v: &str) -> Node {
    Node::valued(Label::Literal, v)
}

fn call(name: &str, args: Vec<Node>) -> Node {
    Node::valued(Label::MethodCall, name).with_children(args)
}

fn binop(op: &str, l: Node, r: Node) -> Node {
    Node::valued(Label::BinaryOperator, op).with_children(vec![l, r])
}

fn logop(op: &str, l: Node, r: Node) -> Node {
    Node::valued(Label::LogicalOperator, op).with_children(vec![l, r])
}

fn unop(op: &str, x: Node) -> Node {
    Node::valued(Label::UnaryOperator, op).with_children(vec![x])
}

fn assign(lhs: Node, rhs: Node) -> Node {
    Node::valued(Label::Assignment, "=").with_children(vec![lhs, rhs])
}

fn ret(x: Node) -> Node {
    Node::valued(Label::Return, "return").with_children(vec![x])
}

fn stmt(n: Node) -> Node {
    n.with_attr(ATTR_STATEMENT_ROOT, true)
}

fn block(stmts: Vec<Node>) -> Ast {
    Ast::new(Node::new(Label::Block).with_children(stmts))
}

// -- op builders --------------------------------------------------------------

fn add(id: &str, parent: NodeRef, index: u32, label: Label, value: Option<&str>) -> EditOp {
    EditOp::Add {
        node: id.to_owned(),
        parent: Some(parent),
        index: Some(index),
        label,
        value: value.map(str::to_owned),
        attrs: Attrs::new(),
    }
}

fn add_with_attrs(
    id: &str,
    parent: NodeRef,
    index: u32,
    label: Label,
    value: Option<&str>,
    attrs: Attrs,
) -> EditOp {
    EditOp::Add {
        node: id.to_owned(),
        parent: Some(parent),
        index: Some(index),
        label,
        value: value.map(str::to_owned),
        attrs,
    }
}

fn fresh(id: &str) -> NodeRef {
    NodeRef::Fresh(id.to_owned())
}

fn flag(name: &str) -> Attrs {
    [(name.to_owned(), serde_json::Value::Bool(true))].into_iter().collect()
}

struct Builder {
    cases: Vec<RuleCase>,
}

impl Builder {
    fn case(
        &mut self,
        name: &'static str,
        positive: bool,
        before: Ast,
        make_ops: impl Fn(&dyn Fn(&str) -> u32) -> Vec<EditOp>,
        expected: Vec<(Target, TransformName)>,
    ) {
        let lookup = |value: &str| {
            position_of_value(&before, value)
                .unwrap_or_else(|| panic!("{name}: no node valued `{value}`"))
        };
        let ops = make_ops(&lookup);
        let after = apply_edit_script(&before, &ops)
            .unwrap_or_else(|e| panic!("{name}: corpus script must apply: {e}"));
        let (vr_ast, map) = insert_virtual_roots_mapped(before.clone());
        let vr_view = vr_ast.view();
        let expected = expected
            .into_iter()
            .map(|(target, t)| {
                let position = match target {
                    Target::Node(v) => map[lookup(v) as usize - 1],
                    Target::VrOf(v) => {
                        let mapped = map[lookup(v) as usize - 1];
                        let parent = vr_view.parent_of(mapped).expect("statement has a parent");
                        assert_eq!(
                            vr_view.node(parent).label,
                            Label::VirtualRoot,
                            "{name}: expected target must be a virtual root"
                        );
                        parent
                    }
                };
                (position, t)
            })
            .collect();
        self.cases.push(RuleCase {
            name,
            script: EditScript { before, after, ops },
            expected,
            positive,
        });
    }
}

/// Builds the full corpus: one positive and two negatives per transform and
/// sub-case (plus a few extra positives for order-sensitive behavior).
pub fn rules_corpus() -> Vec<RuleCase> {
    let mut b = Builder { cases: Vec::new() };
    wrap_meth(&mut b);
    unwrap_meth(&mut b);
    var_rw_var(&mut b);
    var_rw_meth(&mut b);
    meth_rw_var(&mut b);
    meth_rw_meth(&mut b);
    bin_operator_rep(&mut b);
    constant_rep(&mut b);
    logexp_exp(&mut b);
    logexp_red(&mut b);
    wrap_if(&mut b);
    wrap_ifelse_then(&mut b);
    wrap_ifelse_else(&mut b);
    wrap_ifelse_ternary(&mut b);
    unwrap_if(&mut b);
    wrap_try(&mut b);
    b.cases
}

fn one_assign() -> Ast {
    block(vec![stmt(assign(var("x"), var("a")))])
}

fn wrap_meth(b: &mut Builder) {
    b.case(
        "wrap-meth/pos",
        true,
        one_assign(),
        |p| {
            vec![
                add("c1", NodeRef::Pos(p("=")), 2, Label::MethodCall, Some("wrap")),
                EditOp::Mov { node: p("a"), parent: fresh("c1"), index: 1 },
            ]
        },
        vec![(Target::Node("a"), TransformName::WrapMeth)],
    );
    b.case(
        "wrap-meth/neg-def-edited",
        false,
        one_assign(),
        |p| {
            vec![
                add_with_attrs(
                    "c1",
                    NodeRef::Pos(p("=")),
                    2,
                    Label::MethodCall,
                    Some("wrap"),
                    flag(ATTR_DEF_EDITED),
                ),
                EditOp::Mov { node: p("a"), parent: fresh("c1"), index: 1 },
            ]
        },
        vec![],
    );
    b.case(
        "wrap-meth/neg-call-added-elsewhere",
        false,
        block(vec![stmt(assign(var("x"), var("a"))), stmt(ret(var("b")))]),
        |p| {
            vec![
                add("c1", NodeRef::Pos(p("return")), 1, Label::MethodCall, Some("wrap")),
                EditOp::Mov { node: p("a"), parent: fresh("c1"), index: 1 },
            ]
        },
        vec![],
    );
}

fn call_assign() -> Ast {
    block(vec![stmt(assign(var("x"), call("fn1", vec![var("a")])))])
}

fn unwrap_meth(b: &mut Builder) {
    b.case(
        "unwrap-meth/pos",
        true,
        call_assign(),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("=")), index: 2 },
                EditOp::Del { node: p("fn1") },
            ]
        },
        vec![(Target::Node("a"), TransformName::UnwrapMeth)],
    );
    b.case(
        "unwrap-meth/neg-def-edited",
        false,
        block(vec![stmt(assign(
            var("x"),
            call("fn1", vec![var("a")]).with_attr(ATTR_DEF_EDITED, true),
        ))]),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("=")), index: 2 },
                EditOp::Del { node: p("fn1") },
            ]
        },
        vec![],
    );
    b.case(
        "unwrap-meth/neg-call-kept",
        false,
        call_assign(),
        |p| vec![EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("=")), index: 2 }],
        vec![],
    );
}

fn var_rw_var(b: &mut Builder) {
    b.case(
        "var-rw-var/pos",
        true,
        one_assign(),
        |p| vec![EditOp::Upd { node: p("a"), new_value: Some("b".into()) }],
        vec![(Target::Node("a"), TransformName::VarRwVar)],
    );
    b.case(
        "var-rw-var/neg-def-edited",
        false,
        block(vec![stmt(assign(var("x"), var("a").with_attr(ATTR_DEF_EDITED, true)))]),
        |p| vec![EditOp::Upd { node: p("a"), new_value: Some("b".into()) }],
        vec![],
    );
    b.case(
        "var-rw-var/neg-new-def-edited",
        false,
        block(vec![stmt(assign(var("x"), var("a").with_attr(ATTR_NEW_DEF_EDITED, true)))]),
        |p| vec![EditOp::Upd { node: p("a"), new_value: Some("b".into()) }],
        vec![],
    );
}

fn var_rw_meth(b: &mut Builder) {
    b.case(
        "var-rw-meth/pos",
        true,
        one_assign(),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::MethodCall, Some("g")),
            ]
        },
        vec![(Target::Node("a"), TransformName::VarRwMeth)],
    );
    b.case(
        "var-rw-meth/neg-added-literal",
        false,
        one_assign(),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::Literal, Some("0")),
            ]
        },
        vec![],
    );
    b.case(
        "var-rw-meth/neg-added-elsewhere",
        false,
        block(vec![stmt(assign(var("x"), var("a"))), stmt(ret(var("b")))]),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                add("c1", NodeRef::Pos(p("return")), 1, Label::MethodCall, Some("g")),
            ]
        },
        vec![],
    );
}

fn meth_rw_var(b: &mut Builder) {
    b.case(
        "meth-rw-var/pos",
        true,
        call_assign(),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                EditOp::Del { node: p("fn1") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::VariableAccess, Some("v")),
            ]
        },
        vec![(Target::Node("fn1"), TransformName::MethRwVar)],
    );
    b.case(
        "meth-rw-var/neg-def-edited",
        false,
        block(vec![stmt(assign(
            var("x"),
            call("fn1", vec![var("a")]).with_attr(ATTR_DEF_EDITED, true),
        ))]),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                EditOp::Del { node: p("fn1") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::VariableAccess, Some("v")),
            ]
        },
        vec![],
    );
    b.case(
        "meth-rw-var/neg-no-replacement",
        false,
        call_assign(),
        |p| vec![EditOp::Del { node: p("a") }, EditOp::Del { node: p("fn1") }],
        vec![],
    );
}

fn two_arg_call() -> Ast {
    block(vec![stmt(assign(var("x"), call("fn1", vec![var("a"), var("b")])))])
}

fn meth_rw_meth(b: &mut Builder) {
    b.case(
        "meth-rw-meth-case1/pos",
        true,
        call_assign(),
        |p| vec![EditOp::Upd { node: p("fn1"), new_value: Some("fn2".into()) }],
        vec![(Target::Node("fn1"), TransformName::MethRwMeth)],
    );
    b.case(
        "meth-rw-meth-case1/neg-def-edited",
        false,
        block(vec![stmt(assign(
            var("x"),
            call("fn1", vec![var("a")]).with_attr(ATTR_DEF_EDITED, true),
        ))]),
        |p| vec![EditOp::Upd { node: p("fn1"), new_value: Some("fn2".into()) }],
        vec![],
    );
    b.case(
        "meth-rw-meth-case1/neg-new-def-edited",
        false,
        block(vec![stmt(assign(
            var("x"),
            call("fn1", vec![var("a")]).with_attr(ATTR_NEW_DEF_EDITED, true),
        ))]),
        |p| vec![EditOp::Upd { node: p("fn1"), new_value: Some("fn2".into()) }],
        vec![],
    );
    b.case(
        "meth-rw-meth-case2/pos",
        true,
        two_arg_call(),
        |p| vec![EditOp::Del { node: p("b") }],
        vec![(Target::Node("b"), TransformName::MethRwMeth)],
    );
    b.case(
        "meth-rw-meth-case2/neg-call-touched",
        false,
        two_arg_call(),
        |p| {
            vec![
                EditOp::Upd { node: p("fn1"), new_value: Some("fn2".into()) },
                EditOp::Del { node: p("b") },
            ]
        },
        // Case2 is blocked by the touched call, but the UPD itself is a
        // Case1 instance.
        vec![(Target::Node("fn1"), TransformName::MethRwMeth)],
    );
    b.case(
        "meth-rw-meth-case2/neg-def-edited",
        false,
        block(vec![stmt(assign(
            var("x"),
            call("fn1", vec![var("a"), var("b")]).with_attr(ATTR_DEF_EDITED, true),
        ))]),
        |p| vec![EditOp::Del { node: p("b") }],
        vec![],
    );
}

fn bin_operator_rep(b: &mut Builder) {
    b.case(
        "bin-operator-rep/pos",
        true,
        block(vec![stmt(assign(var("x"), binop("<", var("a"), var("b"))))]),
        |p| vec![EditOp::Upd { node: p("<"), new_value: Some("<=".into()) }],
        vec![(Target::Node("<"), TransformName::BinOperatorRep)],
    );
    b.case(
        "bin-operator-rep/pos-logical",
        true,
        block(vec![stmt(ret(logop("&&", var("a"), var("b"))))]),
        |p| vec![EditOp::Upd { node: p("&&"), new_value: Some("||".into()) }],
        vec![(Target::Node("&&"), TransformName::BinOperatorRep)],
    );
    b.case(
        "bin-operator-rep/neg-unary",
        false,
        block(vec![stmt(ret(unop("!", var("a"))))]),
        |p| vec![EditOp::Upd { node: p("!"), new_value: Some("-".into()) }],
        vec![],
    );
    b.case(
        "bin-operator-rep/neg-del-add",
        false,
        block(vec![stmt(assign(var("x"), binop("<", var("a"), var("b"))))]),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("<") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::VariableAccess, Some("v")),
            ]
        },
        vec![],
    );
}

fn constant_rep(b: &mut Builder) {
    let base = || block(vec![stmt(assign(var("x"), lit("0")))]);
    b.case(
        "constant-rep/pos",
        true,
        base(),
        |p| vec![EditOp::Upd { node: p("0"), new_value: Some("1".into()) }],
        vec![(Target::Node("0"), TransformName::ConstantRep)],
    );
    b.case(
        "constant-rep/neg-del-add",
        false,
        base(),
        |p| {
            vec![
                EditOp::Del { node: p("0") },
                add("c1", NodeRef::Pos(p("=")), 2, Label::Literal, Some("1")),
            ]
        },
        vec![],
    );
    b.case("constant-rep/neg-empty-script", false, base(), |_| vec![], vec![]);
}

fn if_stmt(cond: Node) -> Ast {
    block(vec![stmt(
        Node::valued(Label::If, "if0").with_children(vec![
            cond,
            Node::valued(Label::Block, "then0").with_children(vec![stmt(ret(var("r")))]),
        ]),
    )])
}

fn logexp_exp(b: &mut Builder) {
    b.case(
        "logexp-exp/pos",
        true,
        if_stmt(var("a")),
        |p| {
            vec![
                add("lo", NodeRef::Pos(p("if0")), 1, Label::LogicalOperator, Some("&&")),
                EditOp::Mov { node: p("a"), parent: fresh("lo"), index: 1 },
                add("nb", fresh("lo"), 2, Label::VariableAccess, Some("b")),
            ]
        },
        vec![(Target::Node("a"), TransformName::LogExpExp)],
    );
    b.case(
        "logexp-exp/pos-climbs-to-expression-root",
        true,
        if_stmt(logop("&&", var("a"), var("b"))),
        |p| {
            vec![
                add("lo", NodeRef::Pos(p("&&")), 1, Label::LogicalOperator, Some("||")),
                EditOp::Mov { node: p("a"), parent: fresh("lo"), index: 1 },
                add("nc", fresh("lo"), 2, Label::VariableAccess, Some("c")),
            ]
        },
        vec![(Target::Node("&&"), TransformName::LogExpExp)],
    );
    b.case(
        "logexp-exp/neg-kept-child-updated",
        false,
        if_stmt(var("a")),
        |p| {
            vec![
                add("lo", NodeRef::Pos(p("if0")), 1, Label::LogicalOperator, Some("&&")),
                EditOp::Mov { node: p("a"), parent: fresh("lo"), index: 1 },
                EditOp::Upd { node: p("a"), new_value: Some("z".into()) },
                add("nb", fresh("lo"), 2, Label::VariableAccess, Some("b")),
            ]
        },
        vec![(Target::Node("a"), TransformName::VarRwVar)],
    );
    b.case(
        "logexp-exp/neg-binary-operator-added",
        false,
        if_stmt(var("a")),
        |p| {
            vec![
                add("bo", NodeRef::Pos(p("if0")), 1, Label::BinaryOperator, Some("+")),
                EditOp::Mov { node: p("a"), parent: fresh("bo"), index: 1 },
                add("nb", fresh("bo"), 2, Label::VariableAccess, Some("b")),
            ]
        },
        vec![],
    );
}

fn logexp_red(b: &mut Builder) {
    b.case(
        "logexp-red/pos",
        true,
        if_stmt(logop("&&", var("a"), var("b"))),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("if0")), index: 1 },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("&&") },
            ]
        },
        vec![(Target::Node("&&"), TransformName::LogExpRed)],
    );
    b.case(
        "logexp-red/neg-no-kept-child",
        false,
        if_stmt(logop("&&", var("a"), var("b"))),
        |p| {
            vec![
                EditOp::Del { node: p("a") },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("&&") },
            ]
        },
        vec![],
    );
    b.case(
        "logexp-red/neg-comparison-operator",
        false,
        if_stmt(binop("==", var("a"), var("b"))),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("if0")), index: 1 },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("==") },
            ]
        },
        vec![],
    );
}

fn two_stmts() -> Ast {
    block(vec![stmt(assign(var("x"), lit("1"))), stmt(ret(var("r")))])
}

/// ADDs for `if (<cond>) { }` at the head of the outer block; returns ops.
/// `null_check` controls whether the condition contains a null literal.
fn add_if_skeleton(null_check: bool, with_else: bool) -> Vec<EditOp> {
    let mut ops = vec![add("if", NodeRef::Pos(1), 1, Label::If, None)];
    if null_check {
        ops.push(add("cond", fresh("if"), 1, Label::BinaryOperator, Some("!=")));
        ops.push(add("cv", fresh("cond"), 1, Label::VariableAccess, Some("y")));
        ops.push(add("cn", fresh("cond"), 2, Label::Literal, Some("null")));
    } else {
        ops.push(add("cond", fresh("if"), 1, Label::BinaryOperator, Some(">")));
        ops.push(add("cv", fresh("cond"), 1, Label::VariableAccess, Some("y")));
        ops.push(add("cn", fresh("cond"), 2, Label::Literal, Some("0")));
    }
    ops.push(add("then", fresh("if"), 2, Label::Block, None));
    if with_else {
        ops.push(add("else", fresh("if"), 3, Label::Block, None));
    }
    ops
}

fn wrap_if(b: &mut Builder) {
    b.case(
        "wrap-if-n/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, false);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfN)],
    );
    b.case(
        "wrap-if-n/pos-first-moved-statement",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, false);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(EditOp::Mov { node: p("return"), parent: fresh("then"), index: 2 });
            ops
        },
        // Both statements move; the label goes on the first in pre-order.
        vec![(Target::VrOf("="), TransformName::WrapIfN)],
    );
    b.case(
        "wrap-if-n/neg-nothing-moved",
        false,
        two_stmts(),
        |_| {
            let mut ops = add_if_skeleton(true, false);
            ops.push(add("ns", fresh("then"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![],
    );
    b.case(
        "wrap-if-n/neg-loop-not-if",
        false,
        two_stmts(),
        |p| {
            vec![
                add("loop", NodeRef::Pos(1), 1, Label::Loop, None),
                add("then", fresh("loop"), 1, Label::Block, None),
                EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 },
            ]
        },
        vec![],
    );
    b.case(
        "wrap-if-o/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(false, false);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfO)],
    );
    b.case(
        "wrap-if-o/neg-null-condition-is-n",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, false);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops
        },
        // Exactly one of the N/O variants fires.
        vec![(Target::VrOf("="), TransformName::WrapIfN)],
    );
    b.case(
        "wrap-if-o/neg-nothing-moved",
        false,
        two_stmts(),
        |_| {
            let mut ops = add_if_skeleton(false, false);
            ops.push(add("ns", fresh("then"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![],
    );
}

fn wrap_ifelse_then(b: &mut Builder) {
    b.case(
        "wrap-ifelse-n-case1/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(add("es", fresh("else"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfElseN)],
    );
    b.case(
        "wrap-ifelse-n-case1/neg-moved-into-both",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(EditOp::Mov { node: p("return"), parent: fresh("else"), index: 1 });
            ops
        },
        vec![],
    );
    b.case(
        "wrap-ifelse-n-case1/neg-empty-else-is-wrap-if",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfN)],
    );
    b.case(
        "wrap-ifelse-o-case1/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(false, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(add("es", fresh("else"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfElseO)],
    );
    b.case(
        "wrap-ifelse-o-case1/neg-null-condition-is-n",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(add("es", fresh("else"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfElseN)],
    );
    b.case(
        "wrap-ifelse-o-case1/neg-nothing-moved",
        false,
        two_stmts(),
        |_| {
            let mut ops = add_if_skeleton(false, true);
            ops.push(add("ts", fresh("then"), 1, Label::Return, Some("freshT")));
            ops.push(add("es", fresh("else"), 1, Label::Return, Some("freshE")));
            ops
        },
        vec![],
    );
}

fn wrap_ifelse_else(b: &mut Builder) {
    b.case(
        "wrap-ifelse-n-case2/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(add("ts", fresh("then"), 1, Label::Return, Some("fresh")));
            ops.push(EditOp::Mov { node: p("="), parent: fresh("else"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfElseN)],
    );
    b.case(
        "wrap-ifelse-n-case2/neg-then-empty",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("else"), index: 1 });
            ops
        },
        vec![],
    );
    b.case(
        "wrap-ifelse-n-case2/neg-nothing-moved",
        false,
        two_stmts(),
        |_| {
            let mut ops = add_if_skeleton(true, true);
            ops.push(add("ts", fresh("then"), 1, Label::Return, Some("freshT")));
            ops.push(add("es", fresh("else"), 1, Label::Return, Some("freshE")));
            ops
        },
        vec![],
    );
    b.case(
        "wrap-ifelse-o-case2/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(false, true);
            ops.push(add("ts", fresh("then"), 1, Label::Return, Some("fresh")));
            ops.push(EditOp::Mov { node: p("="), parent: fresh("else"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapIfElseO)],
    );
    b.case(
        "wrap-ifelse-o-case2/neg-then-empty",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(false, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("else"), index: 1 });
            ops
        },
        vec![],
    );
    b.case(
        "wrap-ifelse-o-case2/neg-moved-into-both",
        false,
        two_stmts(),
        |p| {
            let mut ops = add_if_skeleton(false, true);
            ops.push(EditOp::Mov { node: p("="), parent: fresh("then"), index: 1 });
            ops.push(EditOp::Mov { node: p("return"), parent: fresh("else"), index: 1 });
            ops
        },
        vec![],
    );
}

fn wrap_ifelse_ternary(b: &mut Builder) {
    let ternary_ops = |p: &dyn Fn(&str) -> u32, null_check: bool| {
        let (op, right) = if null_check { ("==", "null") } else { ("<", "0") };
        vec![
            add("tern", NodeRef::Pos(p("=")), 2, Label::TernaryOperator, Some("?")),
            add("tc", fresh("tern"), 1, Label::BinaryOperator, Some(op)),
            add("tcv", fresh("tc"), 1, Label::VariableAccess, Some("c")),
            add("tcn", fresh("tc"), 2, Label::Literal, Some(right)),
            EditOp::Mov { node: p("a"), parent: fresh("tern"), index: 2 },
            add("alt", fresh("tern"), 3, Label::VariableAccess, Some("b")),
        ]
    };
    b.case(
        "wrap-ifelse-n-case3/pos",
        true,
        one_assign(),
        |p| ternary_ops(p, true),
        vec![(Target::Node("a"), TransformName::WrapIfElseN)],
    );
    b.case(
        "wrap-ifelse-n-case3/neg-ternary-elsewhere",
        false,
        block(vec![stmt(assign(var("x"), var("a"))), stmt(ret(var("b2")))]),
        |p| {
            vec![
                add("tern", NodeRef::Pos(p("return")), 1, Label::TernaryOperator, Some("?")),
                add("tc", fresh("tern"), 1, Label::Literal, Some("null")),
                EditOp::Mov { node: p("a"), parent: fresh("tern"), index: 2 },
            ]
        },
        vec![],
    );
    b.case(
        "wrap-ifelse-n-case3/neg-no-null-is-o",
        false,
        one_assign(),
        |p| ternary_ops(p, false),
        vec![(Target::Node("a"), TransformName::WrapIfElseO)],
    );
    b.case(
        "wrap-ifelse-o-case3/pos",
        true,
        one_assign(),
        |p| ternary_ops(p, false),
        vec![(Target::Node("a"), TransformName::WrapIfElseO)],
    );
    b.case(
        "wrap-ifelse-o-case3/neg-null-is-n",
        false,
        one_assign(),
        |p| ternary_ops(p, true),
        vec![(Target::Node("a"), TransformName::WrapIfElseN)],
    );
    b.case(
        "wrap-ifelse-o-case3/neg-no-move",
        false,
        one_assign(),
        |p| {
            vec![
                add("tern", NodeRef::Pos(p("=")), 3, Label::TernaryOperator, Some("?")),
                add("tc", fresh("tern"), 1, Label::VariableAccess, Some("c")),
                add("ta", fresh("tern"), 2, Label::VariableAccess, Some("t1")),
                add("tb", fresh("tern"), 3, Label::VariableAccess, Some("t2")),
            ]
        },
        vec![],
    );
}

fn if_else_region() -> Ast {
    block(vec![
        stmt(Node::valued(Label::If, "if0").with_children(vec![
            var("c"),
            Node::valued(Label::Block, "then0")
                .with_children(vec![stmt(assign(var("x"), lit("1")))]),
            Node::valued(Label::Block, "else0").with_children(vec![stmt(ret(var("r")))]),
        ])),
        stmt(call("after", vec![])),
    ])
}

fn unwrap_if(b: &mut Builder) {
    let delete_if = |p: &dyn Fn(&str) -> u32| {
        vec![
            EditOp::Del { node: p("r") },
            EditOp::Del { node: p("return") },
            EditOp::Del { node: p("else0") },
            EditOp::Del { node: p("c") },
            EditOp::Del { node: p("then0") },
            EditOp::Del { node: p("if0") },
        ]
    };
    b.case(
        "unwrap-if-case1/pos",
        true,
        if_else_region(),
        |p| {
            let mut ops =
                vec![EditOp::Mov { node: p("="), parent: NodeRef::Pos(1), index: 1 }];
            ops.extend(delete_if(p));
            ops
        },
        vec![(Target::Node("if0"), TransformName::UnwrapIf)],
    );
    b.case(
        "unwrap-if-case1/neg-nothing-moved",
        false,
        if_else_region(),
        |p| {
            let mut ops = vec![
                EditOp::Del { node: p("x") },
                EditOp::Del { node: p("1") },
                EditOp::Del { node: p("=") },
            ];
            ops.extend(delete_if(p));
            ops
        },
        vec![],
    );
    b.case(
        "unwrap-if-case1/neg-loop",
        false,
        block(vec![
            stmt(Node::valued(Label::Loop, "loop0").with_children(vec![
                var("c"),
                Node::valued(Label::Block, "then0")
                    .with_children(vec![stmt(assign(var("x"), lit("1")))]),
            ])),
            stmt(call("after", vec![])),
        ]),
        |p| {
            vec![
                EditOp::Mov { node: p("="), parent: NodeRef::Pos(1), index: 1 },
                EditOp::Del { node: p("c") },
                EditOp::Del { node: p("then0") },
                EditOp::Del { node: p("loop0") },
            ]
        },
        vec![],
    );

    let ternary_stmt = || {
        block(vec![stmt(assign(
            var("x"),
            Node::valued(Label::TernaryOperator, "?").with_children(vec![
                var("c"),
                var("a"),
                var("b"),
            ]),
        ))])
    };
    b.case(
        "unwrap-if-case2/pos",
        true,
        ternary_stmt(),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("=")), index: 2 },
                EditOp::Del { node: p("c") },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("?") },
            ]
        },
        vec![(Target::Node("?"), TransformName::UnwrapIf)],
    );
    b.case(
        "unwrap-if-case2/neg-method-call-is-unwrap-meth",
        false,
        call_assign(),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("=")), index: 2 },
                EditOp::Del { node: p("fn1") },
            ]
        },
        vec![(Target::Node("a"), TransformName::UnwrapMeth)],
    );
    b.case(
        "unwrap-if-case2/neg-wrong-destination",
        false,
        block(vec![
            stmt(assign(
                var("x"),
                Node::valued(Label::TernaryOperator, "?").with_children(vec![
                    var("c"),
                    var("a"),
                    var("b"),
                ]),
            )),
            stmt(ret(var("r"))),
        ]),
        |p| {
            vec![
                EditOp::Mov { node: p("a"), parent: NodeRef::Pos(p("return")), index: 1 },
                EditOp::Del { node: p("c") },
                EditOp::Del { node: p("b") },
                EditOp::Del { node: p("?") },
            ]
        },
        vec![],
    );
}

fn wrap_try(b: &mut Builder) {
    let try_skeleton = || {
        vec![
            add("try", NodeRef::Pos(1), 1, Label::Try, None),
            add("body", fresh("try"), 1, Label::Block, None),
            add("catch", fresh("try"), 2, Label::Catch, Some("e")),
            add("cblock", fresh("catch"), 1, Label::Block, None),
        ]
    };
    b.case(
        "wrap-try/pos",
        true,
        two_stmts(),
        |p| {
            let mut ops = try_skeleton();
            ops.push(EditOp::Mov { node: p("="), parent: fresh("body"), index: 1 });
            ops
        },
        vec![(Target::VrOf("="), TransformName::WrapTry)],
    );
    b.case(
        "wrap-try/neg-nothing-moved",
        false,
        two_stmts(),
        |_| {
            let mut ops = try_skeleton();
            ops.push(add("ns", fresh("body"), 1, Label::Return, Some("fresh")));
            ops
        },
        vec![],
    );
    b.case(
        "wrap-try/neg-moved-into-catch",
        false,
        two_stmts(),
        |p| {
            let mut ops = try_skeleton();
            ops.push(EditOp::Mov { node: p("="), parent: fresh("cblock"), index: 1 });
            ops
        },
        vec![],
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::extract_transforms;

    #[test]
    fn corpus_meets_size_requirements() {
        let corpus = rules_corpus();
        let positives = corpus.iter().filter(|c| c.positive).count();
        let negatives = corpus.len() - positives;
        assert!(positives >= 22, "need >= 22 positives, have {positives}");
        assert!(negatives >= 44, "need >= 44 negatives, have {negatives}");
        // Every actual transform has at least one positive.
        for t in TransformName::actual() {
            assert!(
                corpus
                    .iter()
                    .any(|c| c.positive && c.expected.values().any(|x| *x == t)),
                "no positive case for {t}"
            );
        }
    }

    #[test]
    fn extraction_matches_expected_labelings_exactly() {
        for case in rules_corpus() {
            let labeling = extract_transforms(&case.script)
                .unwrap_or_else(|e| panic!("{}: extraction failed: {e}", case.name));
            assert_eq!(
                labeling.labels, case.expected,
                "{}: labeling mismatch",
                case.name
            );
        }
    }

    #[test]
    fn corpus_scripts_apply_cleanly() {
        for case in rules_corpus() {
            crate::edit::validate_script(&case.script)
                .unwrap_or_else(|e| panic!("{}: {e}", case.name));
        }
    }
}
