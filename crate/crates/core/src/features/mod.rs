//! Feature extraction: node characteristics, their upward propagation, and
//! the observation/indicator feature vocabularies with sparse activation.

mod characteristics;
mod vocab;

pub use characteristics::{
    attrs, characteristics_with_propagation, compute_characteristics, propagate_characteristics,
    registry, similar_identifier, CharacteristicId, CharacteristicVector, Registry,
    OPERATOR_KINDS, STATEMENT_KINDS,
};
pub use vocab::{
    build_indicator_vocab, build_viable_transform_sets, Direction, EdgeTuple, FeatureVocabulary,
    IndicatorSets, ObsFeature, TriangleTuple,
};
