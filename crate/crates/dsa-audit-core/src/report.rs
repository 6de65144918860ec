//! Deterministic rendering of finding sets and the process exit-status
//! contract.
//!
//! The JSON form is canonical: object keys sorted, fixed decimal rendering,
//! no timestamps unless run metadata is explicitly requested. Two runs over
//! identical inputs produce byte-identical bodies, so reports can be golden-
//! tested and diffed in CI.
//!
//! Exit codes follow lint-tool convention: 0 clean, 1 findings at or above
//! the failure threshold, 2 reserved for operational errors (set by the CLI).

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::AuditError;
use crate::model::{Level, Severity, SCHEMA_VERSION};
use crate::rules::FindingSet;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            _ => Err(AuditError::Value(format!("unknown report format `{s}`"))),
        }
    }
}

/// Finding counts per (level, severity); every cell is present, zeros
/// included, so summaries from different runs line up.
pub type Summary = BTreeMap<Level, BTreeMap<Severity, u64>>;

fn summarize(findings: &FindingSet) -> Summary {
    let mut summary: Summary = BTreeMap::new();
    for level in Level::ALL {
        let row = summary.entry(level).or_default();
        for severity in Severity::ALL {
            row.insert(severity, 0);
        }
    }
    for finding in &findings.findings {
        *summary
            .get_mut(&finding.level)
            .expect("all levels preseeded")
            .get_mut(&finding.severity)
            .expect("all severities preseeded") += 1;
    }
    summary
}

/// A rendered report body plus its summary counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub format: ReportFormat,
    pub body: String,
    pub summary: Summary,
}

/// Serializes any value as canonical JSON: sorted keys, compact separators,
/// trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, AuditError> {
    let value = serde_json::to_value(value)
        .map_err(|e| AuditError::Value(format!("canonical serialization: {e}")))?;
    let mut body = serde_json::to_string(&value)
        .map_err(|e| AuditError::Value(format!("canonical serialization: {e}")))?;
    body.push('\n');
    Ok(body)
}

/// Wraps a serializable payload into a versioned interchange document.
pub fn versioned_document<T: Serialize>(payload: &T) -> Result<serde_json::Value, AuditError> {
    let mut value = serde_json::to_value(payload)
        .map_err(|e| AuditError::Value(format!("document serialization: {e}")))?;
    match value.as_object_mut() {
        Some(map) => {
            map.insert(
                "schema_version".to_string(),
                serde_json::Value::String(SCHEMA_VERSION.to_string()),
            );
            Ok(value)
        }
        None => Err(AuditError::Value(
            "only object-shaped payloads can carry a schema_version".into(),
        )),
    }
}

/// Renders a finding set. The Markdown layout carries one section per rule
/// family in fixed order; the JSON layout is the canonical machine form.
pub fn render(
    findings: &FindingSet,
    format: ReportFormat,
    include_metadata: bool,
) -> Result<RenderedReport, AuditError> {
    let summary = summarize(findings);
    let body = match format {
        ReportFormat::Json => render_json(findings, &summary, include_metadata)?,
        ReportFormat::Markdown => render_markdown(findings, &summary, include_metadata),
    };
    Ok(RenderedReport {
        format,
        body,
        summary,
    })
}

fn render_json(
    findings: &FindingSet,
    summary: &Summary,
    include_metadata: bool,
) -> Result<String, AuditError> {
    let mut document = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "config": findings.config,
        "findings": findings.findings,
        "summary": summary,
    });
    if include_metadata {
        document.as_object_mut().unwrap().insert(
            "run".to_string(),
            serde_json::to_value(&findings.run)
                .map_err(|e| AuditError::Value(format!("run metadata: {e}")))?,
        );
    }
    to_canonical_json(&document)
}

fn render_markdown(findings: &FindingSet, summary: &Summary, include_metadata: bool) -> String {
    let mut out = String::new();
    out.push_str("# Consistency findings\n\n");

    out.push_str("## Summary\n\n");
    out.push_str("| Level | INFO | NOTICE | WARN | ERROR |\n");
    out.push_str("|---|---:|---:|---:|---:|\n");
    for level in Level::ALL {
        let row = &summary[&level];
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            level,
            row[&Severity::Info],
            row[&Severity::Notice],
            row[&Severity::Warn],
            row[&Severity::Error],
        );
    }
    out.push('\n');

    for level in Level::ALL {
        let _ = writeln!(out, "## {level}\n");
        let mut any = false;
        for finding in findings.findings.iter().filter(|f| f.level == level) {
            any = true;
            let numbers = match (finding.expected, finding.observed, finding.delta) {
                (Some(e), Some(o), Some(d)) => {
                    format!(" (expected {e}, observed {o}, delta {d})")
                }
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "- **{}** `{}`: {}{}",
                finding.severity, finding.rule_id, finding.message, numbers
            );
        }
        if !any {
            out.push_str("- no findings\n");
        }
        out.push('\n');
    }

    if include_metadata {
        out.push_str("## Run\n\n");
        for input in &findings.run.inputs {
            let _ = writeln!(out, "- input: {input}");
        }
        if let Some(timestamp) = &findings.run.timestamp {
            let _ = writeln!(out, "- timestamp: {timestamp}");
        }
        out.push('\n');
    }

    out
}

/// Maps a finding set to process exit status: 0 when nothing reaches
/// `fail_on`, 1 otherwise.
pub fn exit_code(findings: &FindingSet, fail_on: Severity) -> i32 {
    if findings.findings.iter().any(|f| f.severity >= fail_on) {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Finding, FindingKey, RuleConfig};
    use crate::rules::RunMetadata;

    fn set(findings: Vec<Finding>) -> FindingSet {
        FindingSet::new(findings, RuleConfig::default(), RunMetadata::default())
    }

    fn one_error() -> Finding {
        Finding::new(
            "INTERNAL_RESIDUAL_TOTAL",
            Level::Internal,
            Severity::Error,
            vec![FindingKey::Risk("demo".into())],
            Some(1),
            Some(2),
            "demo finding",
        )
    }

    #[test]
    fn empty_set_renders_all_zero_summary() {
        let rendered = render(&set(vec![]), ReportFormat::Json, false).unwrap();
        let total: u64 = rendered.summary.values().flat_map(|row| row.values()).sum();
        assert_eq!(total, 0);
        assert!(rendered.body.contains("\"findings\":[]"));
        let md = render(&set(vec![]), ReportFormat::Markdown, false).unwrap();
        assert!(md.body.contains("- no findings"));
    }

    #[test]
    fn singleton_summary_counts_and_body_mention_rule() {
        let rendered = render(&set(vec![one_error()]), ReportFormat::Json, false).unwrap();
        assert_eq!(rendered.summary[&Level::Internal][&Severity::Error], 1);
        assert!(rendered.body.contains("INTERNAL_RESIDUAL_TOTAL"));
    }

    #[test]
    fn rendering_is_deterministic_and_metadata_free_by_default() {
        let mut with_timestamp = set(vec![one_error()]);
        with_timestamp.run.timestamp = Some("2025-01-01T00:00:00Z".into());
        with_timestamp.run.inputs = vec!["report:R1:r1.json".into()];
        let first = render(&with_timestamp, ReportFormat::Json, false).unwrap();
        let second = render(&with_timestamp, ReportFormat::Json, false).unwrap();
        assert_eq!(first.body, second.body);
        assert!(!first.body.contains("2025-01-01"));
        let with_run = render(&with_timestamp, ReportFormat::Json, true).unwrap();
        assert!(with_run.body.contains("2025-01-01T00:00:00Z"));
    }

    #[test]
    fn distinct_sets_render_distinct_bodies() {
        let a = render(&set(vec![]), ReportFormat::Json, false).unwrap();
        let b = render(&set(vec![one_error()]), ReportFormat::Json, false).unwrap();
        assert_ne!(a.body, b.body);
    }

    #[test]
    fn summary_totals_match_finding_count_in_both_formats() {
        let findings = set(vec![one_error(), one_error()]);
        for format in [ReportFormat::Json, ReportFormat::Markdown] {
            let rendered = render(&findings, format, false).unwrap();
            let total: u64 = rendered.summary.values().flat_map(|row| row.values()).sum();
            assert_eq!(total, findings.findings.len() as u64);
        }
    }

    #[test]
    fn markdown_sections_appear_in_fixed_order() {
        let rendered = render(&set(vec![]), ReportFormat::Markdown, false).unwrap();
        let positions: Vec<usize> = ["## INTERNAL", "## EXTERNAL", "## HISTORICAL", "## CROSS_MECHANISM"]
            .iter()
            .map(|section| rendered.body.find(section).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exit_codes_respect_threshold_semantics() {
        assert_eq!(exit_code(&set(vec![]), Severity::Warn), EXIT_CLEAN);
        assert_eq!(exit_code(&set(vec![one_error()]), Severity::Warn), EXIT_FINDINGS);
        let mut notice = one_error();
        notice.severity = Severity::Notice;
        assert_eq!(exit_code(&set(vec![notice]), Severity::Error), EXIT_CLEAN);
    }

    #[test]
    fn canonical_json_sorts_keys() {
        #[derive(Serialize)]
        struct Unsorted {
            zebra: u32,
            apple: u32,
        }
        let body = to_canonical_json(&Unsorted { zebra: 1, apple: 2 }).unwrap();
        assert_eq!(body, "{\"apple\":2,\"zebra\":1}\n");
    }
}
