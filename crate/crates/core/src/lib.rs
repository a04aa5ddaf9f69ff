//! treemend: learning which repair transforms apply to which AST nodes.
//!
//! The crate has two halves. The mining half turns labeled before/after tree
//! pairs plus their edit scripts into per-node transform labels using sixteen
//! structural repair-transform rules. The learning half fits a conditional
//! random field over those labels: node/edge/triangle cliques on the tree,
//! observation and indicator features, exact junction-tree inference
//! (partition function, marginals, MAP, top-k), and penalized maximum
//! likelihood with a distribution-aware per-example prior trained by L-BFGS.
//!
//! Entry points:
//! - [`ast`]: tree ingestion, virtual statement roots, pre-order indexing.
//! - [`edit`]: edit scripts (UPD/ADD/DEL/MOV), application, root-op filter.
//! - [`transform`]: rule-based transform extraction and dataset statistics.
//! - [`features`]: node characteristics, propagation, vocabularies,
//!   sparse activation.
//! - [`crf`]: clique graph, junction tree, exact inference, admissibility.
//! - [`learn`]: prior weights, objective/gradient, L-BFGS training.
//! - [`pipeline`]: dataset preparation, splits, the statistical baseline,
//!   and top-k exact-match evaluation.
//! - [`synthetic`]: seeded corpus generators for tests and benchmarks.

pub mod ast;
pub mod edit;
pub mod error;
pub mod transform;

pub mod crf;
pub mod features;
pub mod learn;
pub mod pipeline;
pub mod synthetic;

pub use ast::{insert_virtual_roots, index_preorder, parse_ast_document, Ast, Label, Node};
pub use edit::{EditOp, EditScript};
pub use error::{Error, Result};
pub use transform::{TransformLabeling, TransformName};
