//! Canonical domain types shared by every other module.
//!
//! Pure data: construction and validation only, no I/O. All counted
//! quantities are exact integers; `ABSENT` (a `--` cell in a report table) is
//! distinct from a reported zero. Every type is immutable after construction
//! and freely shareable across threads.
//!
//! The interchange form is JSON with the field names below and a
//! `schema_version` field on each document (currently `"1"`).

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::AuditError;
use crate::rational::Rational;

/// Interchange schema version accepted and produced by this build.
pub const SCHEMA_VERSION: &str = "1";

/// The four reporting and compliance mechanisms a metric can originate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mechanism {
    TransparencyReport,
    SorDb,
    Sra,
    Audit,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::TransparencyReport,
        Mechanism::SorDb,
        Mechanism::Sra,
        Mechanism::Audit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::TransparencyReport => "TRANSPARENCY_REPORT",
            Mechanism::SorDb => "SOR_DB",
            Mechanism::Sra => "SRA",
            Mechanism::Audit => "AUDIT",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reporting window. Dates are optional because early report coverage is
/// not always published; when both are present the range must be non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportingPeriod {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
}

impl ReportingPeriod {
    pub fn new(label: impl Into<String>) -> Self {
        ReportingPeriod {
            label: label.into(),
            start: None,
            end: None,
        }
    }

    pub fn with_dates(label: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Self {
        ReportingPeriod {
            label: label.into(),
            start: Some(start),
            end: Some(end),
        }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        if self.label.trim().is_empty() {
            return Err(AuditError::Value("period label must be non-empty".into()));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s >= e {
                return Err(AuditError::Value(format!(
                    "period {}: start {s} is not before end {e}",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// Whether `date` falls inside the window (inclusive on both ends).
    pub fn contains(&self, date: NaiveDate) -> bool {
        match (self.start, self.end) {
            (Some(s), Some(e)) => s <= date && date <= e,
            _ => false,
        }
    }
}

/// Validates a list of periods: unique labels, non-overlapping date ranges.
pub fn validate_period_set(periods: &[ReportingPeriod]) -> Result<(), AuditError> {
    let mut labels = std::collections::BTreeSet::new();
    for p in periods {
        p.validate()?;
        if !labels.insert(p.label.as_str()) {
            return Err(AuditError::Duplicate(format!("period label {}", p.label)));
        }
    }
    let mut dated: Vec<&ReportingPeriod> = periods
        .iter()
        .filter(|p| p.start.is_some() && p.end.is_some())
        .collect();
    dated.sort_by_key(|p| p.start);
    for pair in dated.windows(2) {
        if pair[1].start.unwrap() <= pair[0].end.unwrap() {
            return Err(AuditError::Period(format!(
                "periods {} and {} overlap",
                pair[0].label, pair[1].label
            )));
        }
    }
    Ok(())
}

/// Checks that a document series is sorted by period: labels distinct,
/// numeric label suffixes ascending where present, dates ascending where
/// present.
pub fn validate_series_order(periods: &[&ReportingPeriod]) -> Result<(), AuditError> {
    fn numeric_suffix(label: &str) -> Option<u64> {
        let digits: String = label
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if digits.is_empty() {
            None
        } else {
            digits.parse().ok()
        }
    }
    for pair in periods.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.label == b.label {
            return Err(AuditError::Input(format!(
                "series repeats period label {}",
                a.label
            )));
        }
        if let (Some(na), Some(nb)) = (numeric_suffix(&a.label), numeric_suffix(&b.label)) {
            if na >= nb {
                return Err(AuditError::Input(format!(
                    "series not sorted by period: {} before {}",
                    a.label, b.label
                )));
            }
        }
        if let (Some(ea), Some(sb)) = (a.end, b.start) {
            if sb <= ea {
                return Err(AuditError::Input(format!(
                    "series not sorted by period dates: {} before {}",
                    a.label, b.label
                )));
            }
        }
    }
    Ok(())
}

/// True when `s` is a well-formed category slug: lowercase alphanumerics and
/// hyphens only, non-empty, no leading/trailing/doubled hyphen.
pub fn is_valid_slug(s: &str) -> bool {
    !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
        && !s.starts_with('-')
        && !s.ends_with('-')
        && !s.contains("--")
}

/// Lowercases, drops parenthesized annotations, and joins the remaining
/// alphanumeric runs with single hyphens.
pub fn slugify(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut depth = 0u32;
    let mut pending_hyphen = false;
    for ch in raw.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            _ if depth > 0 => {}
            _ if ch.is_alphanumeric() => {
                if pending_hyphen && !out.is_empty() {
                    out.push('-');
                }
                pending_hyphen = false;
                out.extend(ch.to_lowercase());
            }
            _ => pending_hyphen = true,
        }
    }
    out
}

/// One category in one mechanism's vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalCategory {
    pub id: String,
    pub display_name: String,
    pub mechanism_vocabulary: Mechanism,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_period: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_period: Option<String>,
}

impl CanonicalCategory {
    pub fn validate(&self) -> Result<(), AuditError> {
        if !is_valid_slug(&self.id) {
            return Err(AuditError::Value(format!("invalid category slug `{}`", self.id)));
        }
        Ok(())
    }
}

/// Category coordinate of a metric key: a concrete slug or the whole-table
/// `ALL` bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CategoryRef {
    All,
    Id(String),
}

impl CategoryRef {
    pub fn id(id: impl Into<String>) -> Self {
        CategoryRef::Id(id.into())
    }

    pub fn as_str(&self) -> &str {
        match self {
            CategoryRef::All => "ALL",
            CategoryRef::Id(id) => id,
        }
    }

    pub fn is_all(&self) -> bool {
        matches!(self, CategoryRef::All)
    }
}

impl fmt::Display for CategoryRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CategoryRef {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ALL" {
            Ok(CategoryRef::All)
        } else if is_valid_slug(s) {
            Ok(CategoryRef::Id(s.to_string()))
        } else {
            Err(AuditError::Value(format!("invalid category reference `{s}`")))
        }
    }
}

impl Serialize for CategoryRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CategoryRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What a metric counts.
///
/// `ANY` and `NONE` exist for dump aggregation: `ANY` addresses a group that
/// was not split by account action, `NONE` a group of decisions that carried
/// no account action at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Removal,
    Demotion,
    AccountTermination,
    AccountRestriction,
    NoticeSubmitted,
    NoticeRemoved,
    NoticeRestricted,
    Any,
    None,
}

/// Detection facet of a metric: every decision, only automated ones, or only
/// manual ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Detection {
    Any,
    Automated,
    Manual,
}

/// Unique address of a counted quantity within a table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MetricKey {
    pub mechanism: Mechanism,
    pub period: String,
    pub category: CategoryRef,
    pub action: Action,
    pub detection: Detection,
}

impl MetricKey {
    pub fn new(
        mechanism: Mechanism,
        period: impl Into<String>,
        category: CategoryRef,
        action: Action,
        detection: Detection,
    ) -> Self {
        MetricKey {
            mechanism,
            period: period.into(),
            category,
            action,
            detection,
        }
    }

    /// Same address apart from the detection facet.
    pub fn same_quantity_ignoring_detection(&self, other: &MetricKey) -> bool {
        self.mechanism == other.mechanism
            && self.period == other.period
            && self.category == other.category
            && self.action == other.action
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{:?}/{:?}",
            self.mechanism, self.period, self.category, self.action, self.detection
        )
    }
}

/// Category membership check used by the checked key constructor. Implemented
/// by the taxonomy registry; test code may supply a stub.
pub trait CategoryLookup {
    fn contains_category(&self, mechanism: Mechanism, period: &str, id: &str) -> bool;
}

/// Checked, normalizing [`MetricKey`] constructor: the category must be `ALL`
/// or resolvable in the mechanism's vocabulary for the period.
pub fn make_metric_key(
    lookup: &dyn CategoryLookup,
    mechanism: Mechanism,
    period: &str,
    category: CategoryRef,
    action: Action,
    detection: Detection,
) -> Result<MetricKey, AuditError> {
    if let CategoryRef::Id(id) = &category {
        if !is_valid_slug(id) {
            return Err(AuditError::Vocabulary(format!("malformed category id `{id}`")));
        }
        if !lookup.contains_category(mechanism, period, id) {
            return Err(AuditError::Vocabulary(format!(
                "category `{id}` unknown in {mechanism} vocabulary for period {period}"
            )));
        }
    }
    Ok(MetricKey::new(mechanism, period.trim(), category, action, detection))
}

/// Whether a cell was reported at all. `ABSENT` mirrors a `--` table cell and
/// is not the same thing as a reported zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Presence {
    Reported,
    Absent,
}

/// A single counted quantity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricValue {
    pub key: MetricKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    pub presence: Presence,
}

impl MetricValue {
    pub fn reported(key: MetricKey, count: u64) -> Self {
        MetricValue {
            key,
            count: Some(count),
            presence: Presence::Reported,
        }
    }

    pub fn absent(key: MetricKey) -> Self {
        MetricValue {
            key,
            count: None,
            presence: Presence::Absent,
        }
    }

    pub fn is_reported(&self) -> bool {
        self.presence == Presence::Reported
    }

    /// The reported count, if any.
    pub fn reported_count(&self) -> Option<u64> {
        match self.presence {
            Presence::Reported => self.count,
            Presence::Absent => None,
        }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        match (self.presence, self.count) {
            (Presence::Reported, Some(_)) => Ok(()),
            (Presence::Reported, None) => Err(AuditError::Value(format!(
                "{}: REPORTED value without a count",
                self.key
            ))),
            (Presence::Absent, None) => Ok(()),
            (Presence::Absent, Some(_)) => Err(AuditError::Value(format!(
                "{}: ABSENT value must not carry a count",
                self.key
            ))),
        }
    }
}

/// Where a table came from: source file plus the in-report table id that the
/// numbers were transcribed from (e.g. `15.1.c.(1)`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub file_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_id: Option<String>,
}

impl Provenance {
    pub fn new(file_id: impl Into<String>) -> Self {
        Provenance {
            file_id: file_id.into(),
            table_id: None,
        }
    }

    pub fn with_table(file_id: impl Into<String>, table_id: impl Into<String>) -> Self {
        Provenance {
            file_id: file_id.into(),
            table_id: Some(table_id.into()),
        }
    }
}

/// A set of metric values with unique keys, kept in canonical key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricTable {
    entries: Vec<MetricValue>,
    pub provenance: Provenance,
}

impl MetricTable {
    pub fn new(provenance: Provenance) -> Self {
        MetricTable {
            entries: Vec::new(),
            provenance,
        }
    }

    pub fn from_entries(
        provenance: Provenance,
        entries: impl IntoIterator<Item = MetricValue>,
    ) -> Result<Self, AuditError> {
        let mut table = MetricTable::new(provenance);
        for entry in entries {
            table.insert(entry)?;
        }
        Ok(table)
    }

    /// Inserts a value, rejecting duplicate keys.
    pub fn insert(&mut self, value: MetricValue) -> Result<(), AuditError> {
        value.validate()?;
        match self.entries.binary_search_by(|e| e.key.cmp(&value.key)) {
            Ok(_) => Err(AuditError::Duplicate(format!("metric key {}", value.key))),
            Err(pos) => {
                self.entries.insert(pos, value);
                Ok(())
            }
        }
    }

    /// Inserts or adds to an existing reported count (aggregation merges).
    pub fn add_count(&mut self, key: MetricKey, count: u64) {
        match self.entries.binary_search_by(|e| e.key.cmp(&key)) {
            Ok(pos) => {
                let entry = &mut self.entries[pos];
                entry.count = Some(entry.count.unwrap_or(0) + count);
                entry.presence = Presence::Reported;
            }
            Err(pos) => self
                .entries
                .insert(pos, MetricValue::reported(key, count)),
        }
    }

    pub fn get(&self, key: &MetricKey) -> Option<&MetricValue> {
        self.entries
            .binary_search_by(|e| e.key.cmp(key))
            .ok()
            .map(|pos| &self.entries[pos])
    }

    /// Additively merges reported counts from several tables. ABSENT entries
    /// do not participate.
    pub fn merge_all<'a>(
        provenance: Provenance,
        tables: impl IntoIterator<Item = &'a MetricTable>,
    ) -> MetricTable {
        let mut merged = MetricTable::new(provenance);
        for table in tables {
            for value in table.iter() {
                if let Some(count) = value.reported_count() {
                    merged.add_count(value.key.clone(), count);
                }
            }
        }
        merged
    }

    pub fn iter(&self) -> impl Iterator<Item = &MetricValue> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'de> Deserialize<'de> for MetricTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            entries: Vec<MetricValue>,
            provenance: Provenance,
        }
        let raw = Raw::deserialize(deserializer)?;
        MetricTable::from_entries(raw.provenance, raw.entries).map_err(serde::de::Error::custom)
    }
}

/// Named automation-accuracy metric, normalized to a rational in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AutomationMetricName {
    OverturnRate,
    SpecificAccuracy,
    ErrorRate,
    AutomationShare,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomationMetric {
    pub name: AutomationMetricName,
    pub value: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
}

impl AutomationMetric {
    pub fn validate(&self) -> Result<(), AuditError> {
        if self.value.is_negative() || self.value > Rational::one() {
            return Err(AuditError::Value(format!(
                "automation metric {:?} value {} outside [0, 1]",
                self.name, self.value
            )));
        }
        Ok(())
    }
}

/// Checks that ERROR_RATE and SPECIFIC_ACCURACY sum to exactly 1 wherever
/// both are given for the same scope.
pub fn validate_automation_metrics(metrics: &[AutomationMetric]) -> Result<(), AuditError> {
    for m in metrics {
        m.validate()?;
    }
    let mut by_scope: BTreeMap<Option<&str>, (Option<Rational>, Option<Rational>)> =
        BTreeMap::new();
    for m in metrics {
        let slot = by_scope.entry(m.scope.as_deref()).or_default();
        match m.name {
            AutomationMetricName::ErrorRate => slot.0 = Some(m.value),
            AutomationMetricName::SpecificAccuracy => slot.1 = Some(m.value),
            _ => {}
        }
    }
    for (scope, (error, accuracy)) in by_scope {
        if let (Some(e), Some(a)) = (error, accuracy) {
            if e.checked_add(&a)? != Rational::one() {
                return Err(AuditError::Value(format!(
                    "ERROR_RATE {} + SPECIFIC_ACCURACY {} != 1 for scope {:?}",
                    e, a, scope
                )));
            }
        }
    }
    Ok(())
}

/// Structured mirror of one biannual transparency report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransparencyReportDoc {
    pub period: ReportingPeriod,
    /// Per-category removal counts, total and automated facets.
    pub removals: MetricTable,
    /// The report's own `Total (incl. other violations)` figure.
    pub declared_total: MetricValue,
    pub declared_total_automated: MetricValue,
    /// Notice-and-action table: submitted/removed/restricted per illegal
    /// content type, plus declared `ALL` totals.
    pub notices: MetricTable,
    pub terminations: MetricValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewer_counts: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub automation_metrics: Vec<AutomationMetric>,
}

impl TransparencyReportDoc {
    /// Structural invariants: coherent metric values, every key carrying this
    /// document's period label, automation metrics normalized.
    pub fn validate(&self) -> Result<(), AuditError> {
        self.period.validate()?;
        let label = self.period.label.as_str();
        let check_period = |value: &MetricValue| -> Result<(), AuditError> {
            value.validate()?;
            if value.key.period != label {
                return Err(AuditError::Schema(format!(
                    "metric {} does not carry document period {label}",
                    value.key
                )));
            }
            Ok(())
        };
        for value in self.removals.iter().chain(self.notices.iter()) {
            check_period(value)?;
        }
        check_period(&self.declared_total)?;
        check_period(&self.declared_total_automated)?;
        check_period(&self.terminations)?;
        validate_automation_metrics(&self.automation_metrics)?;
        Ok(())
    }

    /// Categories with a REPORTED removal count for the given detection facet.
    pub fn reported_removal_categories(&self, detection: Detection) -> Vec<(&str, u64)> {
        self.removals
            .iter()
            .filter(|v| {
                v.is_reported()
                    && v.key.detection == detection
                    && v.key.action == Action::Removal
                    && !v.key.category.is_all()
            })
            .filter_map(|v| Some((v.key.category.as_str(), v.reported_count()?)))
            .collect()
    }
}

/// One moderation decision from a statement-of-reasons dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SorRecord {
    pub decision_id: String,
    pub platform: String,
    /// Raw category string as it appears in the dump.
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account_action: Option<AccountAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility_action: Option<String>,
    pub automated_detection: bool,
    pub automated_decision: bool,
    pub application_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub territorial_scope: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AccountAction {
    Suspended,
    Terminated,
    None,
}

/// One systemic risk with its declared mappings into SOR and transparency
/// report vocabularies. Empty lists are meaningful: they are the
/// untraceability signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SraRiskEntry {
    pub risk_name: String,
    #[serde(default)]
    pub mitigations: Vec<String>,
    #[serde(default)]
    pub sor_categories: Vec<String>,
    #[serde(default)]
    pub tr_categories: Vec<String>,
}

/// Consistency level a finding belongs to. Declaration order is the report
/// section order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Level {
    Internal,
    External,
    Historical,
    CrossMechanism,
}

impl Level {
    pub const ALL: [Level; 4] = [
        Level::Internal,
        Level::External,
        Level::Historical,
        Level::CrossMechanism,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Internal => "INTERNAL",
            Level::External => "EXTERNAL",
            Level::Historical => "HISTORICAL",
            Level::CrossMechanism => "CROSS_MECHANISM",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    Info,
    Notice,
    Warn,
    Error,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Info,
        Severity::Notice,
        Severity::Warn,
        Severity::Error,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Info => "INFO",
            Severity::Notice => "NOTICE",
            Severity::Warn => "WARN",
            Severity::Error => "ERROR",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "info" => Ok(Severity::Info),
            "notice" => Ok(Severity::Notice),
            "warn" => Ok(Severity::Warn),
            "error" => Ok(Severity::Error),
            _ => Err(AuditError::Value(format!("unknown severity `{s}`"))),
        }
    }
}

/// What a finding points at: a metric address or a named systemic risk.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FindingKey {
    Metric(MetricKey),
    Risk(String),
}

impl FindingKey {
    pub fn period(&self) -> &str {
        match self {
            FindingKey::Metric(k) => &k.period,
            FindingKey::Risk(_) => "",
        }
    }

    pub fn category(&self) -> &str {
        match self {
            FindingKey::Metric(k) => k.category.as_str(),
            FindingKey::Risk(name) => name,
        }
    }
}

/// One detected inconsistency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub level: Level,
    pub severity: Severity,
    pub keys: Vec<FindingKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<i64>,
    pub message: String,
}

impl Finding {
    /// Builds a finding; `delta` is derived as `observed - expected` whenever
    /// both sides are given.
    pub fn new(
        rule_id: impl Into<String>,
        level: Level,
        severity: Severity,
        keys: Vec<FindingKey>,
        expected: Option<i64>,
        observed: Option<i64>,
        message: impl Into<String>,
    ) -> Self {
        let delta = match (expected, observed) {
            (Some(e), Some(o)) => Some(o - e),
            _ => None,
        };
        Finding {
            rule_id: rule_id.into(),
            level,
            severity,
            keys,
            expected,
            observed,
            delta,
            message: message.into(),
        }
    }

    /// Total order used for canonical finding-set sorting.
    pub fn sort_key(&self) -> (Level, &str, &str, &str, Severity, &str) {
        let first = self.keys.first();
        (
            self.level,
            self.rule_id.as_str(),
            first.map(FindingKey::period).unwrap_or(""),
            first.map(FindingKey::category).unwrap_or(""),
            self.severity,
            self.message.as_str(),
        )
    }
}

/// Thresholds steering severity assignment. All comparisons happen in exact
/// rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Residual share of the declared total at or below which the internal
    /// residual stays INFO.
    pub residual_warn_share: Rational,
    /// Residual share above which the finding becomes ERROR.
    pub residual_error_share: Rational,
    /// Relative gap at or below which an external reconciliation stays INFO.
    pub external_warn_rel: Rational,
    /// Relative gap above which the reconciliation becomes ERROR.
    pub external_error_rel: Rational,
    /// Absolute percent-change magnitude from which a historical fluctuation
    /// is flagged.
    pub historical_notice_pct: Rational,
    /// Allowed misalignment, in days, when matching periods by date.
    pub period_date_slack_days: u32,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            residual_warn_share: Rational::new(1, 100).unwrap(),
            residual_error_share: Rational::new(1, 10).unwrap(),
            external_warn_rel: Rational::new(1, 20).unwrap(),
            external_error_rel: Rational::new(1, 4).unwrap(),
            historical_notice_pct: Rational::from_integer(50),
            period_date_slack_days: 0,
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<(), AuditError> {
        for (name, value) in [
            ("residual_warn_share", self.residual_warn_share),
            ("residual_error_share", self.residual_error_share),
            ("external_warn_rel", self.external_warn_rel),
            ("external_error_rel", self.external_error_rel),
            ("historical_notice_pct", self.historical_notice_pct),
        ] {
            if value.is_negative() {
                return Err(AuditError::Value(format!("{name} must be non-negative")));
            }
        }
        if self.residual_warn_share > self.residual_error_share {
            return Err(AuditError::Value(
                "residual_warn_share must not exceed residual_error_share".into(),
            ));
        }
        if self.external_warn_rel > self.external_error_rel {
            return Err(AuditError::Value(
                "external_warn_rel must not exceed external_error_rel".into(),
            ));
        }
        Ok(())
    }

    /// Loads thresholds from a TOML document. Threshold values are written as
    /// strings (`"0.05"` or `"1/20"`) so they stay exact.
    pub fn from_toml_str(text: &str) -> Result<Self, AuditError> {
        let config: RuleConfig = toml::from_str(text)
            .map_err(|e| AuditError::Schema(format!("rule config: {e}")))?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct StubLookup(Vec<(&'static str, &'static str)>);

    impl CategoryLookup for StubLookup {
        fn contains_category(&self, mechanism: Mechanism, _period: &str, id: &str) -> bool {
            self.0
                .iter()
                .any(|(m, c)| *m == mechanism.as_str() && *c == id)
        }
    }

    fn lookup() -> StubLookup {
        StubLookup(vec![("TRANSPARENCY_REPORT", "hate-speech")])
    }

    fn key(period: &str, category: CategoryRef) -> MetricKey {
        MetricKey::new(
            Mechanism::TransparencyReport,
            period,
            category,
            Action::Removal,
            Detection::Any,
        )
    }

    #[test]
    fn metric_key_constructor_round_trips() {
        let k = make_metric_key(
            &lookup(),
            Mechanism::TransparencyReport,
            "R1",
            CategoryRef::id("hate-speech"),
            Action::Removal,
            Detection::Any,
        )
        .unwrap();
        assert_eq!(k.period, "R1");
        assert_eq!(k.category.as_str(), "hate-speech");
        // Idempotent under re-normalization.
        let again = make_metric_key(
            &lookup(),
            k.mechanism,
            &k.period,
            k.category.clone(),
            k.action,
            k.detection,
        )
        .unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn metric_key_all_bucket_bypasses_vocabulary() {
        let k = make_metric_key(
            &lookup(),
            Mechanism::SorDb,
            "R3",
            CategoryRef::All,
            Action::AccountTermination,
            Detection::Any,
        )
        .unwrap();
        assert!(k.category.is_all());
    }

    #[test]
    fn metric_key_rejects_unknown_category() {
        let err = make_metric_key(
            &lookup(),
            Mechanism::TransparencyReport,
            "R1",
            CategoryRef::id("unknown-cat"),
            Action::Removal,
            Detection::Any,
        )
        .unwrap_err();
        assert_eq!(err.code(), "VOCABULARY_ERROR");
    }

    #[test]
    fn absent_and_zero_stay_distinct_through_serde() {
        let zero = MetricValue::reported(key("R1", CategoryRef::id("hate-speech")), 0);
        let absent = MetricValue::absent(key("R1", CategoryRef::id("spam")));
        for value in [&zero, &absent] {
            let json = serde_json::to_string(value).unwrap();
            let back: MetricValue = serde_json::from_str(&json).unwrap();
            assert_eq!(value, &back);
        }
        assert_ne!(zero.presence, absent.presence);
        assert_eq!(absent.reported_count(), None);
        assert_eq!(zero.reported_count(), Some(0));
    }

    #[test]
    fn metric_value_coherence_is_enforced() {
        let broken = MetricValue {
            key: key("R1", CategoryRef::All),
            count: Some(3),
            presence: Presence::Absent,
        };
        assert_eq!(broken.validate().unwrap_err().code(), "VALUE_ERROR");
    }

    #[test]
    fn table_rejects_duplicate_keys() {
        let mut table = MetricTable::new(Provenance::new("t"));
        table
            .insert(MetricValue::reported(key("R1", CategoryRef::id("hate-speech")), 1))
            .unwrap();
        let err = table
            .insert(MetricValue::reported(key("R1", CategoryRef::id("hate-speech")), 2))
            .unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_ERROR");
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn table_deserialization_rejects_duplicates() {
        let a = MetricValue::reported(key("R1", CategoryRef::id("hate-speech")), 1);
        let json = serde_json::json!({
            "entries": [a, a],
            "provenance": {"file_id": "x"}
        });
        assert!(serde_json::from_value::<MetricTable>(json).is_err());
    }

    #[test]
    fn slugify_matches_vocabulary_styles() {
        assert_eq!(slugify("Hate Speech"), "hate-speech");
        assert_eq!(slugify("Child Endangerment / Nudity"), "child-endangerment-nudity");
        assert_eq!(
            slugify("Restricted Goods and Services (Merged)"),
            "restricted-goods-and-services"
        );
        assert_eq!(slugify("  hate  speech "), "hate-speech");
        assert!(is_valid_slug(&slugify("Dangerous Orgs – Terrorism")));
    }

    #[test]
    fn period_date_order_is_validated() {
        let bad = ReportingPeriod::with_dates(
            "R1",
            NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
        );
        assert!(bad.validate().is_err());
    }

    #[test]
    fn period_set_rejects_overlap_and_duplicate_labels() {
        let periods = vec![
            ReportingPeriod::with_dates(
                "R1",
                NaiveDate::from_ymd_opt(2023, 4, 1).unwrap(),
                NaiveDate::from_ymd_opt(2023, 9, 30).unwrap(),
            ),
            ReportingPeriod::with_dates(
                "R2",
                NaiveDate::from_ymd_opt(2023, 9, 30).unwrap(),
                NaiveDate::from_ymd_opt(2024, 3, 31).unwrap(),
            ),
        ];
        assert_eq!(validate_period_set(&periods).unwrap_err().code(), "PERIOD_ERROR");

        let dup = vec![ReportingPeriod::new("R1"), ReportingPeriod::new("R1")];
        assert_eq!(validate_period_set(&dup).unwrap_err().code(), "DUPLICATE_ERROR");
    }

    #[test]
    fn finding_derives_delta() {
        let f = Finding::new(
            "X",
            Level::Internal,
            Severity::Error,
            vec![],
            Some(10),
            Some(3),
            "m",
        );
        assert_eq!(f.delta, Some(-7));
    }

    #[test]
    fn automation_metric_pair_must_sum_to_one() {
        let metrics = vec![
            AutomationMetric {
                name: AutomationMetricName::ErrorRate,
                value: "0.014".parse().unwrap(),
                scope: None,
            },
            AutomationMetric {
                name: AutomationMetricName::SpecificAccuracy,
                value: "0.986".parse().unwrap(),
                scope: None,
            },
        ];
        validate_automation_metrics(&metrics).unwrap();

        let broken = vec![
            AutomationMetric {
                name: AutomationMetricName::ErrorRate,
                value: "0.02".parse().unwrap(),
                scope: None,
            },
            AutomationMetric {
                name: AutomationMetricName::SpecificAccuracy,
                value: "0.986".parse().unwrap(),
                scope: None,
            },
        ];
        assert!(validate_automation_metrics(&broken).is_err());
    }

    #[test]
    fn rule_config_defaults_are_valid_and_ordered() {
        let config = RuleConfig::default();
        config.validate().unwrap();
        assert_eq!(config.residual_warn_share, "0.01".parse().unwrap());
        assert_eq!(config.external_error_rel, "0.25".parse().unwrap());
    }

    #[test]
    fn rule_config_toml_round_trip() {
        let text = r#"
            residual_warn_share = "0.02"
            external_error_rel = "0.30"
        "#;
        let config = RuleConfig::from_toml_str(text).unwrap();
        assert_eq!(config.residual_warn_share, "0.02".parse().unwrap());
        // Unset keys keep their defaults.
        assert_eq!(config.historical_notice_pct, Rational::from_integer(50));

        let bad = r#"residual_warn_share = "0.5""#;
        assert!(RuleConfig::from_toml_str(bad).is_err());
    }
}
