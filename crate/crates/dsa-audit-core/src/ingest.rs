//! Artifact ingestion: interchange documents, raw SOR dump streams, and
//! dump aggregation.
//!
//! SOR dumps run to hundreds of millions of rows, so the dump reader is a
//! single-pass iterator over a fixed-size buffer: peak memory depends on the
//! buffer and the widest row, never on file size. Report documents and risk
//! matrices are small and parsed eagerly.
//!
//! Dump format: UTF-8 CSV, double-quote escaped, mandatory header row, dates
//! as ISO-8601 (`YYYY-MM-DD`). Unknown extra columns are ignored and reported
//! through [`ParseStats`].

use chrono::NaiveDate;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::io::Read;
use std::str::FromStr;

use crate::error::AuditError;
use crate::model::{
    slugify, validate_period_set, AccountAction, Action, AutomationMetric, CategoryRef, Detection,
    Mechanism, MetricKey, MetricTable, MetricValue, Presence, Provenance, ReportingPeriod,
    SorRecord, SraRiskEntry, TransparencyReportDoc, SCHEMA_VERSION,
};

/// Default read buffer for dump streaming: 1 MiB.
pub const DEFAULT_BUFFER_BYTES: usize = 1 << 20;

/// Columns a dump must provide, in no particular order.
pub const SOR_REQUIRED_COLUMNS: [&str; 9] = [
    "decision_id",
    "platform",
    "category",
    "account_action",
    "visibility_action",
    "automated_detection",
    "automated_decision",
    "application_date",
    "territorial_scope",
];

/// Strict aborts on the first malformed row; lenient counts and skips it.
/// Real dumps contain malformed rows, so lenient is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

impl FromStr for ParseMode {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(ParseMode::Strict),
            "lenient" => Ok(ParseMode::Lenient),
            _ => Err(AuditError::Value(format!("unknown parse mode `{s}`"))),
        }
    }
}

/// Counters for one streaming pass. `rows_read = yielded + skipped` holds in
/// lenient mode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub rows_read: u64,
    pub yielded: u64,
    pub skipped: u64,
    /// Header columns that are not part of the dump schema.
    pub unknown_columns: Vec<String>,
}

/// Lazy reader over a SOR dump. Yields records in file order.
pub struct SorStream<R: Read> {
    reader: csv::Reader<R>,
    indices: [usize; SOR_REQUIRED_COLUMNS.len()],
    mode: ParseMode,
    stats: ParseStats,
    record: csv::ByteRecord,
    done: bool,
}

/// Opens a dump stream with the default buffer size.
pub fn stream_sor_records<R: Read>(reader: R, mode: ParseMode) -> Result<SorStream<R>, AuditError> {
    SorStream::with_buffer(reader, mode, DEFAULT_BUFFER_BYTES)
}

impl<R: Read> SorStream<R> {
    pub fn with_buffer(reader: R, mode: ParseMode, buffer_bytes: usize) -> Result<Self, AuditError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .buffer_capacity(buffer_bytes)
            .from_reader(reader);
        let headers = csv_reader
            .headers()
            .map_err(|e| AuditError::Schema(format!("unreadable header row: {e}")))?
            .clone();
        let mut indices = [0usize; SOR_REQUIRED_COLUMNS.len()];
        for (slot, name) in indices.iter_mut().zip(SOR_REQUIRED_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| AuditError::Schema(format!("missing required column `{name}`")))?;
        }
        let unknown_columns = headers
            .iter()
            .filter(|h| !SOR_REQUIRED_COLUMNS.contains(h))
            .map(str::to_string)
            .collect();
        Ok(SorStream {
            reader: csv_reader,
            indices,
            mode,
            stats: ParseStats {
                unknown_columns,
                ..ParseStats::default()
            },
            record: csv::ByteRecord::new(),
            done: false,
        })
    }

    pub fn stats(&self) -> &ParseStats {
        &self.stats
    }

    /// 1-based line of the record most recently read (header is line 1).
    fn current_line(&self) -> u64 {
        self.record
            .position()
            .map(|p| p.line())
            .unwrap_or_else(|| self.stats.rows_read + 1)
    }

    fn field(&self, column: usize) -> Option<&[u8]> {
        self.record.get(self.indices[column])
    }

    fn parse_current(&self) -> Result<SorRecord, String> {
        let text = |idx: usize, name: &str| -> Result<&str, String> {
            let bytes = self.field(idx).ok_or_else(|| format!("missing field `{name}`"))?;
            std::str::from_utf8(bytes).map_err(|_| format!("field `{name}` is not UTF-8"))
        };

        let decision_id = text(0, "decision_id")?.trim();
        if decision_id.is_empty() {
            return Err("empty decision_id".into());
        }
        let platform = text(1, "platform")?.trim().to_string();
        let category = text(2, "category")?.trim().to_string();
        let account_action = parse_account_action(text(3, "account_action")?)?;
        let visibility_raw = text(4, "visibility_action")?.trim();
        let visibility_action = if visibility_raw.is_empty() {
            None
        } else {
            Some(visibility_raw.to_string())
        };
        let automated_detection = parse_bool(text(5, "automated_detection")?)
            .ok_or("bad automated_detection flag")?;
        let automated_decision =
            parse_bool(text(6, "automated_decision")?).ok_or("bad automated_decision flag")?;
        let date_raw = text(7, "application_date")?.trim();
        let application_date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d")
            .map_err(|_| format!("unparseable application_date `{date_raw}`"))?;
        let territorial_scope = parse_scope(text(8, "territorial_scope")?);

        Ok(SorRecord {
            decision_id: decision_id.to_string(),
            platform,
            category,
            account_action,
            visibility_action,
            automated_detection,
            automated_decision,
            application_date,
            territorial_scope,
        })
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn parse_account_action(raw: &str) -> Result<Option<AccountAction>, String> {
    match raw.trim().to_ascii_uppercase().as_str() {
        "" => Ok(None),
        "SUSPENDED" => Ok(Some(AccountAction::Suspended)),
        "TERMINATED" => Ok(Some(AccountAction::Terminated)),
        "NONE" => Ok(Some(AccountAction::None)),
        other => Err(format!("unknown account_action `{other}`")),
    }
}

fn parse_scope(raw: &str) -> Option<Vec<String>> {
    let raw = raw.trim().trim_start_matches('[').trim_end_matches(']');
    let items: Vec<String> = raw
        .split([',', '|'])
        .map(|s| s.trim().trim_matches('"').to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        None
    } else {
        Some(items)
    }
}

impl<R: Read> Iterator for SorStream<R> {
    type Item = Result<SorRecord, AuditError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            match self.reader.read_byte_record(&mut self.record) {
                Ok(false) => {
                    self.done = true;
                    return None;
                }
                Ok(true) => {
                    self.stats.rows_read += 1;
                    match self.parse_current() {
                        Ok(record) => {
                            self.stats.yielded += 1;
                            return Some(Ok(record));
                        }
                        Err(message) => match self.mode {
                            ParseMode::Lenient => {
                                self.stats.skipped += 1;
                                continue;
                            }
                            ParseMode::Strict => {
                                self.done = true;
                                return Some(Err(AuditError::Row {
                                    row: self.current_line(),
                                    message,
                                }));
                            }
                        },
                    }
                }
                Err(e) => {
                    self.stats.rows_read += 1;
                    match self.mode {
                        ParseMode::Lenient => {
                            self.stats.skipped += 1;
                            continue;
                        }
                        ParseMode::Strict => {
                            self.done = true;
                            return Some(Err(AuditError::Row {
                                row: self.reader.position().line(),
                                message: e.to_string(),
                            }));
                        }
                    }
                }
            }
        }
    }
}

/// Dimensions a dump aggregation can group on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupDim {
    Period,
    Category,
    AccountAction,
    AutomatedDetection,
}

impl FromStr for GroupDim {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "period" => Ok(GroupDim::Period),
            "category" => Ok(GroupDim::Category),
            "account_action" => Ok(GroupDim::AccountAction),
            "automated_detection" => Ok(GroupDim::AutomatedDetection),
            _ => Err(AuditError::Value(format!("unknown group dimension `{s}`"))),
        }
    }
}

/// Record-level pre-filter applied before grouping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordFilter {
    pub platform: Option<String>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl RecordFilter {
    fn matches(&self, record: &SorRecord) -> bool {
        if let Some(platform) = &self.platform {
            if !record.platform.eq_ignore_ascii_case(platform) {
                return false;
            }
        }
        if let Some(from) = self.from {
            if record.application_date < from {
                return false;
            }
        }
        if let Some(to) = self.to {
            if record.application_date > to {
                return false;
            }
        }
        true
    }
}

/// How to fold a record stream into a metric table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationSpec {
    pub group_by: BTreeSet<GroupDim>,
    pub period_bounds: Vec<ReportingPeriod>,
    pub filter: Option<RecordFilter>,
}

impl AggregationSpec {
    pub fn new(group_by: impl IntoIterator<Item = GroupDim>) -> Self {
        AggregationSpec {
            group_by: group_by.into_iter().collect(),
            period_bounds: Vec::new(),
            filter: None,
        }
    }

    pub fn with_periods(mut self, periods: Vec<ReportingPeriod>) -> Self {
        self.period_bounds = periods;
        self
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        if self.group_by.is_empty() {
            return Err(AuditError::Input("group_by must not be empty".into()));
        }
        validate_period_set(&self.period_bounds)?;
        if self.group_by.contains(&GroupDim::Period) {
            let dated = self
                .period_bounds
                .iter()
                .any(|p| p.start.is_some() && p.end.is_some());
            if !dated {
                return Err(AuditError::Input(
                    "grouping by period requires dated period bounds".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Result of one aggregation pass. Records outside every period land in
/// `out_of_range` rather than disappearing: the first report window predates
/// the database, so silent drops would hide exactly the interesting rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SorAggregate {
    pub table: MetricTable,
    pub matched: u64,
    pub out_of_range: u64,
    pub filtered_out: u64,
}

/// Folds records into one metric value per occupied group. Counts sum to the
/// number of matching records; a propagated record error (strict mode) aborts.
pub fn aggregate_sor<I>(
    records: I,
    spec: &AggregationSpec,
    provenance: Provenance,
) -> Result<SorAggregate, AuditError>
where
    I: IntoIterator<Item = Result<SorRecord, AuditError>>,
{
    spec.validate()?;
    let mut table = MetricTable::new(provenance);
    let mut matched = 0u64;
    let mut out_of_range = 0u64;
    let mut filtered_out = 0u64;

    for record in records {
        let record = record?;
        if let Some(filter) = &spec.filter {
            if !filter.matches(&record) {
                filtered_out += 1;
                continue;
            }
        }
        let period_label = if spec.period_bounds.is_empty() {
            None
        } else {
            match spec
                .period_bounds
                .iter()
                .find(|p| p.contains(record.application_date))
            {
                Some(period) => Some(period.label.clone()),
                None => {
                    out_of_range += 1;
                    continue;
                }
            }
        };

        let period = if spec.group_by.contains(&GroupDim::Period) {
            period_label.expect("validated: period grouping requires bounds")
        } else {
            "ALL".to_string()
        };
        let category = if spec.group_by.contains(&GroupDim::Category) {
            let slug = slugify(&record.category);
            if slug.is_empty() {
                CategoryRef::id("uncategorized")
            } else {
                CategoryRef::Id(slug)
            }
        } else {
            CategoryRef::All
        };
        let action = if spec.group_by.contains(&GroupDim::AccountAction) {
            match record.account_action {
                Some(AccountAction::Terminated) => Action::AccountTermination,
                Some(AccountAction::Suspended) => Action::AccountRestriction,
                Some(AccountAction::None) | None => Action::None,
            }
        } else {
            Action::Any
        };
        let detection = if spec.group_by.contains(&GroupDim::AutomatedDetection) {
            if record.automated_detection {
                Detection::Automated
            } else {
                Detection::Manual
            }
        } else {
            Detection::Any
        };

        table.add_count(
            MetricKey::new(Mechanism::SorDb, period, category, action, detection),
            1,
        );
        matched += 1;
    }

    Ok(SorAggregate {
        table,
        matched,
        out_of_range,
        filtered_out,
    })
}

#[derive(Debug, Deserialize)]
struct RawMetricValue {
    key: MetricKey,
    #[serde(default)]
    count: Option<i64>,
    presence: Presence,
}

impl RawMetricValue {
    fn into_value(self) -> Result<MetricValue, AuditError> {
        let count = match self.count {
            Some(c) if c < 0 => {
                return Err(AuditError::Value(format!(
                    "{}: negative count {c}",
                    self.key
                )))
            }
            Some(c) => Some(c as u64),
            None => None,
        };
        let value = MetricValue {
            key: self.key,
            count,
            presence: self.presence,
        };
        value.validate()?;
        Ok(value)
    }
}

#[derive(Debug, Deserialize)]
struct RawTable {
    entries: Vec<RawMetricValue>,
    provenance: Provenance,
}

impl RawTable {
    fn into_table(self) -> Result<MetricTable, AuditError> {
        let mut table = MetricTable::new(self.provenance);
        for raw in self.entries {
            table.insert(raw.into_value()?)?;
        }
        Ok(table)
    }
}

#[derive(Debug, Deserialize)]
struct RawReportFile {
    schema_version: String,
    period: ReportingPeriod,
    removals: RawTable,
    declared_total: RawMetricValue,
    declared_total_automated: RawMetricValue,
    notices: RawTable,
    terminations: RawMetricValue,
    #[serde(default)]
    reviewer_counts: Option<std::collections::BTreeMap<String, u64>>,
    #[serde(default)]
    automation_metrics: Vec<AutomationMetric>,
}

/// Parses one transparency-report interchange document.
pub fn parse_report_document<R: Read>(
    source: R,
    expected_schema_version: &str,
) -> Result<TransparencyReportDoc, AuditError> {
    let raw: RawReportFile = serde_json::from_reader(source)
        .map_err(|e| AuditError::Schema(format!("report document: {e}")))?;
    if raw.schema_version != expected_schema_version {
        return Err(AuditError::Schema(format!(
            "report document schema_version {} (expected {expected_schema_version})",
            raw.schema_version
        )));
    }
    let doc = TransparencyReportDoc {
        period: raw.period,
        removals: raw.removals.into_table()?,
        declared_total: raw.declared_total.into_value()?,
        declared_total_automated: raw.declared_total_automated.into_value()?,
        notices: raw.notices.into_table()?,
        terminations: raw.terminations.into_value()?,
        reviewer_counts: raw.reviewer_counts,
        automation_metrics: raw.automation_metrics,
    };
    doc.validate()?;
    Ok(doc)
}

#[derive(Debug, Deserialize)]
struct RawSraFile {
    schema_version: String,
    risks: Vec<SraRiskEntry>,
}

/// Parses a systemic-risk traceability matrix. Empty category lists are
/// preserved: they are the untraceability signal, not missing data.
pub fn load_sra_matrix<R: Read>(source: R) -> Result<Vec<SraRiskEntry>, AuditError> {
    let raw: RawSraFile = serde_json::from_reader(source)
        .map_err(|e| AuditError::Schema(format!("risk matrix: {e}")))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(AuditError::Schema(format!(
            "risk matrix schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    let mut seen = BTreeSet::new();
    for risk in &raw.risks {
        if risk.risk_name.trim().is_empty() {
            return Err(AuditError::Value("risk with empty name".into()));
        }
        if !seen.insert(risk.risk_name.as_str()) {
            return Err(AuditError::Duplicate(format!("risk name {}", risk.risk_name)));
        }
    }
    Ok(raw.risks)
}

/// Parses a standalone metric-table document (the output of `aggregate`).
pub fn load_metric_table<R: Read>(source: R) -> Result<MetricTable, AuditError> {
    #[derive(Deserialize)]
    struct RawTableFile {
        schema_version: String,
        #[serde(flatten)]
        table: RawTable,
    }
    let raw: RawTableFile = serde_json::from_reader(source)
        .map_err(|e| AuditError::Schema(format!("metric table: {e}")))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(AuditError::Schema(format!(
            "metric table schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    raw.table.into_table()
}

/// Parses a period-bounds document: a list of labeled, dated windows.
pub fn load_period_bounds<R: Read>(source: R) -> Result<Vec<ReportingPeriod>, AuditError> {
    #[derive(Deserialize)]
    struct RawPeriodsFile {
        schema_version: String,
        periods: Vec<ReportingPeriod>,
    }
    let raw: RawPeriodsFile = serde_json::from_reader(source)
        .map_err(|e| AuditError::Schema(format!("period bounds: {e}")))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(AuditError::Schema(format!(
            "period bounds schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    validate_period_set(&raw.periods)?;
    Ok(raw.periods)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "decision_id,platform,category,account_action,visibility_action,automated_detection,automated_decision,application_date,territorial_scope\n";

    fn row(id: &str, action: &str, date: &str) -> String {
        format!("{id},instagram,Scams and Fraud,{action},,true,false,{date},\"DE,FR\"\n")
    }

    #[test]
    fn streams_well_formed_rows_in_order() {
        let mut csv = String::from(HEADER);
        csv.push_str(&row("a", "TERMINATED", "2024-05-01"));
        csv.push_str(&row("b", "", "2024-05-02"));
        csv.push_str(&row("c", "SUSPENDED", "2024-05-03"));
        let mut stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        let records: Vec<SorRecord> = stream.by_ref().map(Result::unwrap).collect();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].decision_id, "a");
        assert_eq!(records[1].account_action, None);
        assert_eq!(records[2].account_action, Some(AccountAction::Suspended));
        assert_eq!(records[0].territorial_scope.as_deref(), Some(&["DE".to_string(), "FR".to_string()][..]));
        let stats = stream.stats();
        assert_eq!((stats.rows_read, stats.yielded, stats.skipped), (3, 3, 0));
    }

    #[test]
    fn lenient_mode_skips_and_counts_bad_rows() {
        let mut csv = String::from(HEADER);
        csv.push_str(&row("a", "TERMINATED", "2024-05-01"));
        csv.push_str(&row("b", "TERMINATED", "not-a-date"));
        csv.push_str(&row("c", "TERMINATED", "2024-05-03"));
        csv.push_str(&row("d", "TERMINATED", "2024-05-04"));
        csv.push_str(&row("e", "TERMINATED", "2024-05-05"));
        let mut stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        let records: Vec<SorRecord> = stream.by_ref().map(Result::unwrap).collect();
        assert_eq!(records.len(), 4);
        let stats = stream.stats();
        assert_eq!(stats.skipped, 1);
        assert_eq!(stats.rows_read, stats.yielded + stats.skipped);
    }

    #[test]
    fn strict_mode_reports_row_number() {
        let mut csv = String::from(HEADER);
        csv.push_str(&row("a", "TERMINATED", "2024-05-01"));
        csv.push_str(&row("b", "TERMINATED", "bogus"));
        let mut stream = stream_sor_records(csv.as_bytes(), ParseMode::Strict).unwrap();
        assert!(stream.next().unwrap().is_ok());
        match stream.next().unwrap() {
            Err(AuditError::Row { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected row error, got {other:?}"),
        }
        assert!(stream.next().is_none());
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let csv = "decision_id,platform\na,instagram\n";
        let err = match stream_sor_records(csv.as_bytes(), ParseMode::Lenient) {
            Err(e) => e,
            Ok(_) => panic!("expected schema error"),
        };
        assert_eq!(err.code(), "SCHEMA_ERROR");
    }

    #[test]
    fn unknown_columns_are_reported_not_fatal() {
        let csv = format!(
            "{},extra_col\na,instagram,Nudity,,,true,true,2024-05-01,,surprise\n",
            HEADER.trim_end()
        );
        let mut stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        assert_eq!(stream.stats().unknown_columns, vec!["extra_col".to_string()]);
        assert_eq!(stream.by_ref().count(), 1);
    }

    fn r3_period() -> ReportingPeriod {
        ReportingPeriod::with_dates(
            "R3",
            NaiveDate::from_ymd_opt(2024, 4, 1).unwrap(),
            NaiveDate::from_ymd_opt(2024, 9, 30).unwrap(),
        )
    }

    #[test]
    fn aggregates_terminations_by_period_and_action() {
        let mut csv = String::from(HEADER);
        for i in 0..7 {
            csv.push_str(&row(&format!("t{i}"), "TERMINATED", "2024-05-01"));
        }
        csv.push_str(&row("s1", "SUSPENDED", "2024-05-01"));
        csv.push_str(&row("n1", "", "2024-05-01"));
        csv.push_str(&row("x1", "TERMINATED", "2020-01-01")); // outside all periods
        let stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        let spec = AggregationSpec::new([GroupDim::Period, GroupDim::AccountAction])
            .with_periods(vec![r3_period()]);
        let result = aggregate_sor(stream, &spec, Provenance::new("test")).unwrap();
        assert_eq!(result.matched, 9);
        assert_eq!(result.out_of_range, 1);
        let terminated = MetricKey::new(
            Mechanism::SorDb,
            "R3",
            CategoryRef::All,
            Action::AccountTermination,
            Detection::Any,
        );
        assert_eq!(result.table.get(&terminated).unwrap().reported_count(), Some(7));
        let unset = MetricKey::new(
            Mechanism::SorDb,
            "R3",
            CategoryRef::All,
            Action::None,
            Detection::Any,
        );
        assert_eq!(result.table.get(&unset).unwrap().reported_count(), Some(1));
    }

    #[test]
    fn empty_stream_aggregates_to_empty_table() {
        let spec = AggregationSpec::new([GroupDim::Period]).with_periods(vec![r3_period()]);
        let result = aggregate_sor(std::iter::empty(), &spec, Provenance::new("test")).unwrap();
        assert!(result.table.is_empty());
        assert_eq!(result.out_of_range, 0);
    }

    #[test]
    fn aggregation_spec_requires_group_dimensions() {
        let spec = AggregationSpec::new([]);
        assert_eq!(
            aggregate_sor(std::iter::empty(), &spec, Provenance::new("t"))
                .unwrap_err()
                .code(),
            "INPUT_ERROR"
        );
    }

    #[test]
    fn counts_sum_to_matching_records_per_category() {
        let mut csv = String::from(HEADER);
        let categories = ["Nudity", "Violence", "Nudity", "Scams and Fraud", "Violence", "Nudity"];
        for (i, cat) in categories.iter().enumerate() {
            csv.push_str(&format!(
                "id{i},instagram,{cat},,,false,false,2024-05-01,\n"
            ));
        }
        let stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        let spec = AggregationSpec::new([GroupDim::Category]);
        let result = aggregate_sor(stream, &spec, Provenance::new("test")).unwrap();
        let count = |slug: &str| {
            result
                .table
                .get(&MetricKey::new(
                    Mechanism::SorDb,
                    "ALL",
                    CategoryRef::id(slug),
                    Action::Any,
                    Detection::Any,
                ))
                .and_then(MetricValue::reported_count)
        };
        assert_eq!(count("nudity"), Some(3));
        assert_eq!(count("violence"), Some(2));
        assert_eq!(count("scams-and-fraud"), Some(1));
        let total: u64 = result.table.iter().filter_map(MetricValue::reported_count).sum();
        assert_eq!(total, result.matched);
    }

    #[test]
    fn platform_filter_is_counted_separately() {
        let mut csv = String::from(HEADER);
        csv.push_str("a,instagram,Nudity,,,true,true,2024-05-01,\n");
        csv.push_str("b,other,Nudity,,,true,true,2024-05-01,\n");
        let stream = stream_sor_records(csv.as_bytes(), ParseMode::Lenient).unwrap();
        let mut spec = AggregationSpec::new([GroupDim::Category]);
        spec.filter = Some(RecordFilter {
            platform: Some("instagram".into()),
            ..RecordFilter::default()
        });
        let result = aggregate_sor(stream, &spec, Provenance::new("test")).unwrap();
        assert_eq!(result.matched, 1);
        assert_eq!(result.filtered_out, 1);
    }
}
