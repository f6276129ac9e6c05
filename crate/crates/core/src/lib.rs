//! Federated multimedia metadata catalog.
//!
//! Records harvested from heterogeneous sources are classified into the seven
//! text/image/sound media classes, stored with usage events and user
//! profiles, and analysed through a four-dimensional usage cube over
//! document, context, user and time.

pub mod analytics;
pub mod code;
pub mod descriptors;
pub mod federation;
pub mod ids;
pub mod json;
pub mod store;
pub mod taxonomy;

pub use analytics::{
    context_by_social_class, cube_query, document_importance, pattern_id, usage_evolution,
    usage_type_ratio, user_interest, AnalyticsError, CellKey, CubeCell, CubeQuery, CubeResult,
    Dimension, DimensionFilter, Granularity, TimeFilter, UsageTypeRatio, UserInterest,
};
pub use code::{format_document_code, parse_document_code, DocumentCode, MalformedCode};
pub use descriptors::{
    attach_descriptor, validate_record, ControlledVocabulary, Descriptor, GenericRecord,
    ImageDescriptor, SoundDescriptor, SoundTarget, SoundType, TextDescriptor, ValidationReport,
    Vocabularies,
};
pub use ids::{ContextLabel, EventId, Timestamp, UserId};
pub use store::{Catalog, CatalogSnapshot, NewUsage, StoreError, UsageEvent, UseType, UserProfile};
pub use taxonomy::{classify, decompose, subsumes, MediaClass, MediaPresence, Medium};
