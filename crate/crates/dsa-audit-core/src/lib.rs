//! Consistency auditing for DSA compliance artifacts.
//!
//! Ingests transparency-report tables, statement-of-reasons dump files and
//! systemic-risk traceability matrices, then mechanically evaluates four
//! families of consistency checks — internal, external, historical and
//! cross-mechanism — producing graded, deterministic findings.
//!
//! * [`model`] — shared domain types and the interchange schema
//! * [`ingest`] — document parsing and constant-memory dump streaming
//! * [`taxonomy`] — vocabularies, crosswalks, category lifecycle
//! * [`rules`] — the consistency engine
//! * [`report`] — canonical rendering and exit-status mapping
//! * [`synth`] — deterministic corpus generation for tests and benchmarks

pub mod error;
pub mod ingest;
pub mod model;
pub mod rational;
pub mod report;
pub mod rules;
pub mod synth;
pub mod taxonomy;

pub use error::AuditError;
pub use model::{
    Action, CategoryRef, Detection, Finding, FindingKey, Level, Mechanism, MetricKey, MetricTable,
    MetricValue, Presence, Provenance, ReportingPeriod, RuleConfig, Severity, SorRecord,
    SraRiskEntry, TransparencyReportDoc, SCHEMA_VERSION,
};
pub use rules::{Bundle, FindingSet};
pub use taxonomy::Taxonomy;
