//! Seeded generators used by tests, benchmarks, and the acceptance suite:
//! random inference instances, the handcrafted rule corpus, and planted-rule
//! training corpora.

mod corpus;
mod instances;
mod planted;

pub use corpus::{rules_corpus, RuleCase};
pub use instances::{random_instance, RandomInstance};
pub use planted::{
    planted_corpus, single_rule_transform, ExampleKind, PlantedConfig, PlantedCorpus,
    PlantedExample, SINGLE_RULE_COUNT,
};
