//! The consistency engine: four rule families over ingested artifacts.
//!
//! * internal — declared totals against their own disaggregation, and the
//!   notice funnel (`removed + restricted <= submitted`, automated <= total);
//! * external — transparency-report metrics against dump aggregates, related
//!   through the taxonomy crosswalk;
//! * historical — period-over-period percent changes and category turnover;
//! * cross-mechanism — traceability of systemic risks into SOR and
//!   transparency vocabularies.
//!
//! All arithmetic is exact; severities come from [`RuleConfig`] thresholds
//! compared in rational form. Evaluation is a pure function of its inputs:
//! identical artifacts and config produce an identical, canonically sorted
//! finding set.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::AuditError;
use crate::model::{
    validate_series_order, Action, AutomationMetric, AutomationMetricName, CategoryRef, Detection,
    Finding, FindingKey, Level, Mechanism, MetricKey, MetricTable, MetricValue, Provenance,
    RuleConfig, Severity, SraRiskEntry, TransparencyReportDoc,
};
use crate::rational::{format_scaled, round_ratio_half_even, Rational};
use crate::taxonomy::{CrosswalkRelation, RelationKind, Taxonomy};

/// Stable rule identifiers, also used in rendered output.
pub mod rule_ids {
    pub const INTERNAL_RESIDUAL_TOTAL: &str = "INTERNAL_RESIDUAL_TOTAL";
    pub const INTERNAL_RESIDUAL_AUTOMATED: &str = "INTERNAL_RESIDUAL_AUTOMATED";
    pub const INTERNAL_RESIDUAL_NOTICES_SUBMITTED: &str = "INTERNAL_RESIDUAL_NOTICES_SUBMITTED";
    pub const INTERNAL_RESIDUAL_NOTICES_REMOVED: &str = "INTERNAL_RESIDUAL_NOTICES_REMOVED";
    pub const INTERNAL_RESIDUAL_NOTICES_RESTRICTED: &str = "INTERNAL_RESIDUAL_NOTICES_RESTRICTED";
    pub const INTERNAL_NOTICE_FUNNEL: &str = "INTERNAL_NOTICE_FUNNEL";
    pub const INTERNAL_AUTOMATED_EXCEEDS_TOTAL: &str = "INTERNAL_AUTOMATED_EXCEEDS_TOTAL";
    pub const INTERNAL_SKIPPED: &str = "INTERNAL_SKIPPED";
    pub const EXTERNAL_RECONCILIATION: &str = "EXTERNAL_RECONCILIATION";
    pub const EXTERNAL_INCOMPARABLE: &str = "EXTERNAL_INCOMPARABLE";
    pub const EXTERNAL_NO_COUNTERPART: &str = "EXTERNAL_NO_COUNTERPART";
    pub const EXTERNAL_SKIPPED: &str = "EXTERNAL_SKIPPED";
    pub const HISTORICAL_FLUCTUATION: &str = "HISTORICAL_FLUCTUATION";
    pub const HISTORICAL_NEW_CATEGORY: &str = "HISTORICAL_NEW_CATEGORY";
    pub const HISTORICAL_GONE_CATEGORY: &str = "HISTORICAL_GONE_CATEGORY";
    pub const HISTORICAL_REVIEWERS: &str = "HISTORICAL_REVIEWERS";
    pub const HISTORICAL_CHANGE: &str = "HISTORICAL_CHANGE";
    pub const HISTORICAL_LIFECYCLE: &str = "HISTORICAL_LIFECYCLE";
    pub const HISTORICAL_SKIPPED: &str = "HISTORICAL_SKIPPED";
    pub const CROSS_TRACEABILITY: &str = "CROSS_TRACEABILITY";
    pub const CROSS_DANGLING_REFERENCE: &str = "CROSS_DANGLING_REFERENCE";
    pub const CROSS_MECHANISM_SKIPPED: &str = "CROSS_MECHANISM_SKIPPED";
}

/// Period-over-period change of one metric, computed in exact rational
/// arithmetic and rounded half-even to two decimal places.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PercentChange {
    pub previous: Option<u64>,
    pub current: Option<u64>,
    pub value: PercentChangeValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PercentChangeValue {
    /// Signed change in hundredths of a percent (-5145 reads -51.45%).
    Defined(i128),
    /// Previous period absent or zero; growth from nothing is not a ratio.
    UndefinedNew,
    /// Current period absent.
    UndefinedGone,
}

impl PercentChange {
    /// `"-51.45%"` for defined changes.
    pub fn formatted(&self) -> Option<String> {
        match self.value {
            PercentChangeValue::Defined(hundredths) => {
                Some(format!("{}%", format_scaled(hundredths, 2)))
            }
            _ => None,
        }
    }

    /// The exact (unrounded) change ratio `(current - previous) / previous`,
    /// recomputed from the stored endpoints.
    pub fn exact_ratio(&self) -> Option<Rational> {
        match (self.previous, self.current, self.value) {
            (Some(p), Some(c), PercentChangeValue::Defined(_)) if p > 0 => {
                Some(Rational::new(c as i128 - p as i128, p as i128).unwrap())
            }
            _ => None,
        }
    }
}

/// Computes the percent change between the same quantity in two consecutive
/// periods.
pub fn percent_change(
    previous: &MetricValue,
    current: &MetricValue,
) -> Result<PercentChange, AuditError> {
    let comparable = previous.key.mechanism == current.key.mechanism
        && previous.key.category == current.key.category
        && previous.key.action == current.key.action
        && previous.key.detection == current.key.detection;
    if !comparable {
        return Err(AuditError::Key(format!(
            "percent change across different quantities: {} vs {}",
            previous.key, current.key
        )));
    }
    if previous.key.period == current.key.period {
        return Err(AuditError::Key(format!(
            "percent change needs distinct periods, got {} twice",
            previous.key.period
        )));
    }
    let prev_count = previous.reported_count();
    let curr_count = current.reported_count();
    let value = match (prev_count, curr_count) {
        (None, _) => PercentChangeValue::UndefinedNew,
        (Some(_), None) => PercentChangeValue::UndefinedGone,
        (Some(0), Some(_)) => PercentChangeValue::UndefinedNew,
        (Some(p), Some(c)) => PercentChangeValue::Defined(round_ratio_half_even(
            10_000 * (c as i128 - p as i128),
            p as i128,
        )),
    };
    Ok(PercentChange {
        previous: prev_count,
        current: curr_count,
        value,
    })
}

fn to_i64(count: u64, what: &str) -> Result<i64, AuditError> {
    i64::try_from(count).map_err(|_| AuditError::Value(format!("{what} overflows i64: {count}")))
}

/// Share formatted as a 2 dp percentage of `whole`, for messages.
fn share_display(part: i128, whole: u64) -> String {
    if whole == 0 {
        return "n/a".to_string();
    }
    let hundredths = round_ratio_half_even(10_000 * part, whole as i128);
    format!("{}%", format_scaled(hundredths, 2))
}

/// Severity of a non-negative residual measured against the declared total.
fn residual_severity(residual: i128, declared: u64, config: &RuleConfig) -> Severity {
    if residual < 0 {
        return Severity::Error;
    }
    let within = |threshold: &Rational| {
        // residual / declared <= threshold, cross-multiplied.
        residual * threshold.denom() <= declared as i128 * threshold.numer()
    };
    if within(&config.residual_warn_share) {
        Severity::Info
    } else if within(&config.residual_error_share) {
        Severity::Warn
    } else {
        Severity::Error
    }
}

/// Severity of a relative gap `|delta| / max(a, b, 1)`.
fn gap_severity(delta: i128, a: u64, b: u64, config: &RuleConfig) -> Severity {
    let base = a.max(b).max(1) as i128;
    let gap = delta.abs();
    let within = |threshold: &Rational| gap * threshold.denom() <= base * threshold.numer();
    if within(&config.external_warn_rel) {
        Severity::Info
    } else if within(&config.external_error_rel) {
        Severity::Warn
    } else {
        Severity::Error
    }
}

fn residual_finding(
    rule_id: &str,
    declared: &MetricValue,
    sum: u64,
    label: &str,
    config: &RuleConfig,
) -> Result<Finding, AuditError> {
    let declared_count = declared
        .reported_count()
        .ok_or_else(|| AuditError::Input(format!("{label}: declared total missing")))?;
    let residual = declared_count as i128 - sum as i128;
    let severity = residual_severity(residual, declared_count, config);
    let message = format!(
        "{label}: declared {declared_count} vs disaggregated sum {sum}; residual {residual} ({} of declared)",
        share_display(residual, declared_count),
    );
    Ok(Finding::new(
        rule_id,
        Level::Internal,
        severity,
        vec![FindingKey::Metric(declared.key.clone())],
        Some(to_i64(sum, "category sum")?),
        Some(to_i64(declared_count, "declared total")?),
        message,
    ))
}

/// Internal consistency of one report: every declared total must equal the
/// sum of its disaggregated rows. A negative residual (rows exceed the total)
/// is always an error, since totals may not double-count.
pub fn check_internal_sums(
    doc: &TransparencyReportDoc,
    config: &RuleConfig,
) -> Result<Vec<Finding>, AuditError> {
    let label = doc.period.label.as_str();
    if doc.declared_total.reported_count().is_none() {
        return Err(AuditError::Input(format!(
            "report {label} has no declared total"
        )));
    }
    if doc.reported_removal_categories(Detection::Any).is_empty() {
        return Err(AuditError::Input(format!(
            "report {label} has no reported removal categories"
        )));
    }

    let mut findings = Vec::new();
    let sum_any: u64 = doc
        .reported_removal_categories(Detection::Any)
        .iter()
        .map(|(_, count)| count)
        .sum();
    findings.push(residual_finding(
        rule_ids::INTERNAL_RESIDUAL_TOTAL,
        &doc.declared_total,
        sum_any,
        &format!("{label} removals"),
        config,
    )?);

    if doc.declared_total_automated.reported_count().is_some() {
        let sum_auto: u64 = doc
            .reported_removal_categories(Detection::Automated)
            .iter()
            .map(|(_, count)| count)
            .sum();
        findings.push(residual_finding(
            rule_ids::INTERNAL_RESIDUAL_AUTOMATED,
            &doc.declared_total_automated,
            sum_auto,
            &format!("{label} automated removals"),
            config,
        )?);
    }

    for (action, rule_id, what) in [
        (
            Action::NoticeSubmitted,
            rule_ids::INTERNAL_RESIDUAL_NOTICES_SUBMITTED,
            "notices submitted",
        ),
        (
            Action::NoticeRemoved,
            rule_ids::INTERNAL_RESIDUAL_NOTICES_REMOVED,
            "notice removals",
        ),
        (
            Action::NoticeRestricted,
            rule_ids::INTERNAL_RESIDUAL_NOTICES_RESTRICTED,
            "notice restrictions",
        ),
    ] {
        let declared_key = MetricKey::new(
            Mechanism::TransparencyReport,
            label,
            CategoryRef::All,
            action,
            Detection::Any,
        );
        let Some(declared) = doc.notices.get(&declared_key) else {
            continue;
        };
        if declared.reported_count().is_none() {
            continue;
        }
        let sum: u64 = doc
            .notices
            .iter()
            .filter(|v| v.key.action == action && !v.key.category.is_all())
            .filter_map(MetricValue::reported_count)
            .sum();
        findings.push(residual_finding(
            rule_id,
            declared,
            sum,
            &format!("{label} {what}"),
            config,
        )?);
    }

    Ok(findings)
}

/// Notice-funnel monotonicity (`removed + restricted <= submitted` per type
/// and in total) and automated-versus-total sanity for every removal row.
pub fn check_notice_funnel(doc: &TransparencyReportDoc) -> Vec<Finding> {
    let label = doc.period.label.as_str();
    let mut findings = Vec::new();

    let mut funnel_categories: BTreeSet<&CategoryRef> = BTreeSet::new();
    for value in doc.notices.iter() {
        funnel_categories.insert(&value.key.category);
    }
    for category in funnel_categories {
        let lookup = |action: Action| {
            doc.notices
                .get(&MetricKey::new(
                    Mechanism::TransparencyReport,
                    label,
                    category.clone(),
                    action,
                    Detection::Any,
                ))
                .and_then(MetricValue::reported_count)
        };
        let (Some(submitted), Some(removed), Some(restricted)) = (
            lookup(Action::NoticeSubmitted),
            lookup(Action::NoticeRemoved),
            lookup(Action::NoticeRestricted),
        ) else {
            continue;
        };
        if removed + restricted > submitted {
            findings.push(Finding::new(
                rule_ids::INTERNAL_NOTICE_FUNNEL,
                Level::Internal,
                Severity::Error,
                vec![FindingKey::Metric(MetricKey::new(
                    Mechanism::TransparencyReport,
                    label,
                    category.clone(),
                    Action::NoticeSubmitted,
                    Detection::Any,
                ))],
                Some((removed + restricted) as i64),
                Some(submitted as i64),
                format!(
                    "{label} {category}: actioned notices {} exceed submitted {submitted}",
                    removed + restricted
                ),
            ));
        }
    }

    // Automated counts can never exceed the totals they are part of.
    let mut automated_checks: Vec<(CategoryRef, u64, u64)> = Vec::new();
    for value in doc.removals.iter() {
        if value.key.detection != Detection::Any || value.key.action != Action::Removal {
            continue;
        }
        let Some(total) = value.reported_count() else {
            continue;
        };
        let automated_key = MetricKey {
            detection: Detection::Automated,
            ..value.key.clone()
        };
        if let Some(automated) = doc.removals.get(&automated_key).and_then(MetricValue::reported_count)
        {
            automated_checks.push((value.key.category.clone(), total, automated));
        }
    }
    if let (Some(total), Some(automated)) = (
        doc.declared_total.reported_count(),
        doc.declared_total_automated.reported_count(),
    ) {
        automated_checks.push((CategoryRef::All, total, automated));
    }
    for (category, total, automated) in automated_checks {
        if automated > total {
            findings.push(Finding::new(
                rule_ids::INTERNAL_AUTOMATED_EXCEEDS_TOTAL,
                Level::Internal,
                Severity::Error,
                vec![FindingKey::Metric(MetricKey::new(
                    Mechanism::TransparencyReport,
                    label,
                    category.clone(),
                    Action::Removal,
                    Detection::Automated,
                ))],
                Some(total as i64),
                Some(automated as i64),
                format!("{label} {category}: automated {automated} exceeds total {total}"),
            ));
        }
    }

    findings
}

/// Reconciles one quantity across two mechanisms, given the crosswalk
/// relation that connects them. A `NONE` relation is the paper-worthy case:
/// it yields an incomparability notice, not an error.
pub fn reconcile_external(
    a: &MetricValue,
    b: &MetricValue,
    relation: &CrosswalkRelation,
    config: &RuleConfig,
) -> Result<Finding, AuditError> {
    if a.key.period != b.key.period {
        return Err(AuditError::Period(format!(
            "cannot reconcile {} against {}: period labels differ",
            a.key, b.key
        )));
    }
    reconcile_matched(a, b, relation, config)
}

/// As [`reconcile_external`], but with explicit period windows: labels may
/// differ if both boundary dates align within `period_date_slack_days`.
pub fn reconcile_external_with_periods(
    a: &MetricValue,
    b: &MetricValue,
    relation: &CrosswalkRelation,
    period_a: &crate::model::ReportingPeriod,
    period_b: &crate::model::ReportingPeriod,
    config: &RuleConfig,
) -> Result<Finding, AuditError> {
    if a.key.period != b.key.period {
        let slack = config.period_date_slack_days as i64;
        let within = |x: Option<chrono::NaiveDate>, y: Option<chrono::NaiveDate>| match (x, y) {
            (Some(x), Some(y)) => (x - y).num_days().abs() <= slack,
            _ => false,
        };
        if !(within(period_a.start, period_b.start) && within(period_a.end, period_b.end)) {
            return Err(AuditError::Period(format!(
                "periods {} and {} misaligned beyond {slack} day(s)",
                period_a.label, period_b.label
            )));
        }
    }
    reconcile_matched(a, b, relation, config)
}

fn reconcile_matched(
    a: &MetricValue,
    b: &MetricValue,
    relation: &CrosswalkRelation,
    config: &RuleConfig,
) -> Result<Finding, AuditError> {
    let keys = vec![
        FindingKey::Metric(a.key.clone()),
        FindingKey::Metric(b.key.clone()),
    ];
    if relation.kind == RelationKind::None {
        return Ok(Finding::new(
            rule_ids::EXTERNAL_INCOMPARABLE,
            Level::External,
            Severity::Notice,
            keys,
            None,
            None,
            format!(
                "{} and {} are not comparable: no crosswalk relation for `{}`",
                a.key, b.key, relation.from.id
            ),
        ));
    }
    let count_a = a
        .reported_count()
        .ok_or_else(|| AuditError::Input(format!("{} is not reported", a.key)))?;
    let count_b = b
        .reported_count()
        .ok_or_else(|| AuditError::Input(format!("{} is not reported", b.key)))?;
    let delta = count_a as i128 - count_b as i128;
    let severity = gap_severity(delta, count_a, count_b, config);
    let base = count_a.max(count_b).max(1);
    let message = format!(
        "{} reports {count_a}, {} records {count_b}: delta {delta}, relative gap {}",
        a.key.mechanism,
        b.key.mechanism,
        share_display(delta.abs(), base),
    );
    Ok(Finding::new(
        rule_ids::EXTERNAL_RECONCILIATION,
        Level::External,
        severity,
        keys,
        Some(to_i64(count_b, "counterpart count")?),
        Some(to_i64(count_a, "reported count")?),
        message,
    ))
}

fn exceeds_notice_threshold(hundredths_exact_num: i128, prev: u64, config: &RuleConfig) -> bool {
    // |100 * (c - p) / p| >= threshold, cross-multiplied with p > 0.
    let threshold = &config.historical_notice_pct;
    hundredths_exact_num.abs() * threshold.denom() >= threshold.numer() * prev as i128
}

fn fluctuation_findings_for_pair(
    prev: &TransparencyReportDoc,
    curr: &TransparencyReportDoc,
    config: &RuleConfig,
) -> Result<Vec<Finding>, AuditError> {
    let mut findings = Vec::new();
    let transition = format!("{} -> {}", prev.period.label, curr.period.label);

    // The headline total is always reported; per-category changes only when
    // they reach the notice threshold or the category turned over.
    let mut quantities: Vec<(CategoryRef, &MetricValue, Option<&MetricValue>, bool)> =
        vec![(CategoryRef::All, &prev.declared_total, Some(&curr.declared_total), true)];
    let mut ids: BTreeSet<&str> = BTreeSet::new();
    for doc in [prev, curr] {
        for value in doc.removals.iter() {
            if value.key.action == Action::Removal && value.key.detection == Detection::Any {
                if let CategoryRef::Id(id) = &value.key.category {
                    ids.insert(id);
                }
            }
        }
    }
    fn lookup<'a>(doc: &'a TransparencyReportDoc, id: &str) -> Option<&'a MetricValue> {
        doc.removals.get(&MetricKey::new(
            Mechanism::TransparencyReport,
            doc.period.label.clone(),
            CategoryRef::id(id),
            Action::Removal,
            Detection::Any,
        ))
    }
    let absent_placeholder = |doc: &TransparencyReportDoc, id: &str| {
        MetricValue::absent(MetricKey::new(
            Mechanism::TransparencyReport,
            doc.period.label.clone(),
            CategoryRef::id(id),
            Action::Removal,
            Detection::Any,
        ))
    };

    let mut owned: Vec<(MetricValue, MetricValue)> = Vec::new();
    for id in &ids {
        let p = lookup(prev, id).cloned().unwrap_or_else(|| absent_placeholder(prev, id));
        let c = lookup(curr, id).cloned().unwrap_or_else(|| absent_placeholder(curr, id));
        if !p.is_reported() && !c.is_reported() {
            continue;
        }
        owned.push((p, c));
    }
    for (p, c) in &owned {
        quantities.push((p.key.category.clone(), p, Some(c), false));
    }

    for (category, prev_value, curr_value, always_report) in quantities {
        let curr_value = curr_value.unwrap();
        let change = percent_change(prev_value, curr_value)?;
        match change.value {
            PercentChangeValue::Defined(hundredths) => {
                let p = change.previous.unwrap();
                let c = change.current.unwrap();
                let past_threshold =
                    exceeds_notice_threshold(100 * (c as i128 - p as i128), p, config);
                if past_threshold || always_report {
                    let (severity, label) = if past_threshold {
                        (Severity::Notice, "unexplained fluctuation of")
                    } else {
                        (Severity::Info, "changed by")
                    };
                    findings.push(Finding::new(
                        rule_ids::HISTORICAL_FLUCTUATION,
                        Level::Historical,
                        severity,
                        vec![FindingKey::Metric(curr_value.key.clone())],
                        Some(to_i64(p, "previous count")?),
                        Some(to_i64(c, "current count")?),
                        format!(
                            "{transition} {category}: {label} {}",
                            format!("{}%", format_scaled(hundredths, 2)),
                        ),
                    ));
                }
            }
            PercentChangeValue::UndefinedNew => {
                findings.push(Finding::new(
                    rule_ids::HISTORICAL_NEW_CATEGORY,
                    Level::Historical,
                    Severity::Notice,
                    vec![FindingKey::Metric(curr_value.key.clone())],
                    None,
                    change.current.map(|c| c as i64),
                    format!(
                        "{transition} {category}: newly reported, no previous baseline"
                    ),
                ));
            }
            PercentChangeValue::UndefinedGone => {
                findings.push(Finding::new(
                    rule_ids::HISTORICAL_GONE_CATEGORY,
                    Level::Historical,
                    Severity::Notice,
                    vec![FindingKey::Metric(curr_value.key.clone())],
                    change.previous.map(|p| p as i64),
                    None,
                    format!("{transition} {category}: no longer reported"),
                ));
            }
        }
    }

    if let (Some(prev_reviewers), Some(curr_reviewers)) =
        (&prev.reviewer_counts, &curr.reviewer_counts)
    {
        for (name, prev_count) in prev_reviewers {
            let Some(curr_count) = curr_reviewers.get(name) else {
                continue;
            };
            if *prev_count == 0 {
                continue;
            }
            let exact_num = 100 * (*curr_count as i128 - *prev_count as i128);
            if exceeds_notice_threshold(exact_num, *prev_count, config) {
                let hundredths =
                    round_ratio_half_even(100 * exact_num, *prev_count as i128);
                findings.push(Finding::new(
                    rule_ids::HISTORICAL_REVIEWERS,
                    Level::Historical,
                    Severity::Notice,
                    vec![FindingKey::Risk(name.clone())],
                    Some(to_i64(*prev_count, "previous reviewers")?),
                    Some(to_i64(*curr_count, "current reviewers")?),
                    format!(
                        "{transition} reviewer series `{name}`: {}% swing",
                        format_scaled(hundredths, 2)
                    ),
                ));
            }
        }
    }

    Ok(findings)
}

/// Historical consistency across an ordered report series: flags every
/// category (and the total) whose change magnitude reaches the notice
/// threshold, plus category appearance and disappearance.
pub fn check_historical(
    series: &[TransparencyReportDoc],
    config: &RuleConfig,
) -> Result<Vec<Finding>, AuditError> {
    if series.len() < 2 {
        return Err(AuditError::Input(
            "historical checks need at least two documents".into(),
        ));
    }
    let periods: Vec<&crate::model::ReportingPeriod> = series.iter().map(|d| &d.period).collect();
    validate_series_order(&periods)?;
    let mut findings = Vec::new();
    for pair in series.windows(2) {
        findings.extend(fluctuation_findings_for_pair(&pair[0], &pair[1], config)?);
    }
    Ok(findings)
}

/// Cross-mechanism traceability of systemic risks. Both mapping lists empty
/// is an error-grade gap; one empty is partial; dangling references are
/// flagged against the loaded vocabularies.
pub fn evaluate_traceability(matrix: &[SraRiskEntry], taxonomy: &Taxonomy) -> Vec<Finding> {
    let mut findings = Vec::new();
    for risk in matrix {
        let keys = vec![FindingKey::Risk(risk.risk_name.clone())];
        let (severity, status) = match (risk.sor_categories.is_empty(), risk.tr_categories.is_empty())
        {
            (true, true) => (Severity::Error, "untraceable in both SOR and transparency-report vocabularies"),
            (true, false) => (Severity::Warn, "partially traceable: no SOR category mapping"),
            (false, true) => (Severity::Warn, "partially traceable: no transparency-report category mapping"),
            (false, false) => (Severity::Info, "traceable into both vocabularies"),
        };
        findings.push(Finding::new(
            rule_ids::CROSS_TRACEABILITY,
            Level::CrossMechanism,
            severity,
            keys.clone(),
            None,
            None,
            format!(
                "risk `{}`: {status} ({} SOR, {} TR categories)",
                risk.risk_name,
                risk.sor_categories.len(),
                risk.tr_categories.len()
            ),
        ));
        for (mechanism, ids) in [
            (Mechanism::SorDb, &risk.sor_categories),
            (Mechanism::TransparencyReport, &risk.tr_categories),
        ] {
            for id in ids {
                if !taxonomy.contains_anywhere(mechanism, id) {
                    findings.push(Finding::new(
                        rule_ids::CROSS_DANGLING_REFERENCE,
                        Level::CrossMechanism,
                        Severity::Warn,
                        keys.clone(),
                        None,
                        None,
                        format!(
                            "risk `{}` references `{id}`, which is not in any {mechanism} vocabulary",
                            risk.risk_name
                        ),
                    ));
                }
            }
        }
    }
    findings
}

/// Result of an automation-share computation: the share itself (absent when
/// the base is zero or the data is contradictory) plus an error finding when
/// the automated count exceeds its total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomationShareOutcome {
    pub metric: Option<AutomationMetric>,
    pub violation: Option<Finding>,
}

impl AutomationShareOutcome {
    /// The share rendered at four decimal places, e.g. `"0.9998"`.
    pub fn rendered(&self) -> Option<String> {
        self.metric
            .as_ref()
            .map(|m| format_scaled(m.value.round_scaled(4), 4))
    }
}

/// Automated share of a total, as an exact rational.
pub fn automation_share(
    total: &MetricValue,
    automated: &MetricValue,
) -> Result<AutomationShareOutcome, AuditError> {
    if !total.key.same_quantity_ignoring_detection(&automated.key) {
        return Err(AuditError::Key(format!(
            "automation share across different quantities: {} vs {}",
            total.key, automated.key
        )));
    }
    let total_count = total
        .reported_count()
        .ok_or_else(|| AuditError::Input(format!("{} is not reported", total.key)))?;
    let automated_count = automated
        .reported_count()
        .ok_or_else(|| AuditError::Input(format!("{} is not reported", automated.key)))?;

    if automated_count > total_count {
        let violation = Finding::new(
            rule_ids::INTERNAL_AUTOMATED_EXCEEDS_TOTAL,
            Level::Internal,
            Severity::Error,
            vec![FindingKey::Metric(automated.key.clone())],
            Some(to_i64(total_count, "total")?),
            Some(to_i64(automated_count, "automated")?),
            format!(
                "{}: automated {automated_count} exceeds total {total_count}",
                automated.key
            ),
        );
        return Ok(AutomationShareOutcome {
            metric: None,
            violation: Some(violation),
        });
    }
    if total_count == 0 {
        return Ok(AutomationShareOutcome {
            metric: None,
            violation: None,
        });
    }
    let scope = match &total.key.category {
        CategoryRef::All => None,
        CategoryRef::Id(id) => Some(id.clone()),
    };
    Ok(AutomationShareOutcome {
        metric: Some(AutomationMetric {
            name: AutomationMetricName::AutomationShare,
            value: Rational::new(automated_count as i128, total_count as i128)?,
            scope,
        }),
        violation: None,
    })
}

/// Everything one audit run consumes.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub reports: Vec<TransparencyReportDoc>,
    pub sor_tables: Vec<MetricTable>,
    pub sra: Option<Vec<SraRiskEntry>>,
}

impl Bundle {
    pub fn is_empty(&self) -> bool {
        self.reports.is_empty() && self.sor_tables.is_empty() && self.sra.is_none()
    }
}

/// Run metadata attached to a finding set. The timestamp is optional and
/// excluded from canonical rendering so identical inputs stay byte-identical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// A canonically sorted set of findings plus the config that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingSet {
    pub findings: Vec<Finding>,
    pub config: RuleConfig,
    pub run: RunMetadata,
}

impl FindingSet {
    pub fn new(mut findings: Vec<Finding>, config: RuleConfig, run: RunMetadata) -> Self {
        findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        FindingSet {
            findings,
            config,
            run,
        }
    }

    /// Highest severity present, if any finding exists.
    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }
}

fn skipped(rule_id: &str, level: Level, reason: &str) -> Finding {
    Finding::new(
        rule_id,
        level,
        Severity::Info,
        vec![],
        None,
        None,
        format!("rule family skipped: {reason}"),
    )
}

/// Runs every applicable rule family over the bundle and merges the results
/// into one deterministic finding set. Families whose inputs are missing are
/// reported as skipped rather than silently omitted.
pub fn run_all(
    bundle: &Bundle,
    taxonomy: &Taxonomy,
    config: &RuleConfig,
) -> Result<FindingSet, AuditError> {
    config.validate()?;
    if bundle.is_empty() {
        return Err(AuditError::Input("empty bundle: nothing to audit".into()));
    }

    let mut reports: Vec<&TransparencyReportDoc> = bundle.reports.iter().collect();
    reports.sort_by(|a, b| {
        let suffix = |label: &str| -> (u64, String) {
            let digits: String = label.chars().filter(|c| c.is_ascii_digit()).collect();
            (digits.parse().unwrap_or(u64::MAX), label.to_string())
        };
        suffix(&a.period.label).cmp(&suffix(&b.period.label))
    });

    let mut findings = Vec::new();
    let mut inputs = Vec::new();

    // Internal family.
    if reports.is_empty() {
        findings.push(skipped(
            rule_ids::INTERNAL_SKIPPED,
            Level::Internal,
            "no report documents",
        ));
    } else {
        for doc in &reports {
            inputs.push(format!(
                "report:{}:{}",
                doc.period.label, doc.removals.provenance.file_id
            ));
            match check_internal_sums(doc, config) {
                Ok(batch) => findings.extend(batch),
                Err(AuditError::Input(reason)) => findings.push(skipped(
                    rule_ids::INTERNAL_SKIPPED,
                    Level::Internal,
                    &reason,
                )),
                Err(other) => return Err(other),
            }
            findings.extend(check_notice_funnel(doc));
        }
    }

    // External family: transparency terminations against dump aggregates.
    let merged_sor = MetricTable::merge_all(
        Provenance::new("sor-aggregates"),
        bundle.sor_tables.iter(),
    );
    for table in &bundle.sor_tables {
        inputs.push(format!("sor:{}", table.provenance.file_id));
    }
    if reports.is_empty() || merged_sor.is_empty() {
        findings.push(skipped(
            rule_ids::EXTERNAL_SKIPPED,
            Level::External,
            "needs both report documents and SOR aggregates",
        ));
    } else {
        let relation = taxonomy.crosswalk(
            "account-termination",
            Mechanism::TransparencyReport,
            Mechanism::SorDb,
        )?;
        for doc in &reports {
            let label = doc.period.label.as_str();
            if doc.terminations.reported_count().is_none() {
                continue;
            }
            let sor_key = MetricKey::new(
                Mechanism::SorDb,
                label,
                CategoryRef::All,
                Action::AccountTermination,
                Detection::Any,
            );
            match merged_sor.get(&sor_key) {
                Some(sor_value) => {
                    findings.push(reconcile_external(&doc.terminations, sor_value, &relation, config)?);
                }
                None => findings.push(Finding::new(
                    rule_ids::EXTERNAL_NO_COUNTERPART,
                    Level::External,
                    Severity::Info,
                    vec![FindingKey::Metric(doc.terminations.key.clone())],
                    None,
                    None,
                    format!("no SOR aggregate covers period {label}"),
                )),
            }
        }
    }

    // Historical family.
    if reports.len() < 2 {
        findings.push(skipped(
            rule_ids::HISTORICAL_SKIPPED,
            Level::Historical,
            "fewer than two report documents",
        ));
    } else {
        let series: Vec<TransparencyReportDoc> = reports.iter().map(|d| (*d).clone()).collect();
        findings.extend(check_historical(&series, config)?);
    }

    // Cross-mechanism family.
    match &bundle.sra {
        None => findings.push(skipped(
            rule_ids::CROSS_MECHANISM_SKIPPED,
            Level::CrossMechanism,
            "no risk matrix",
        )),
        Some(matrix) => {
            inputs.push(format!("sra:{} risks", matrix.len()));
            findings.extend(evaluate_traceability(matrix, taxonomy));
        }
    }

    inputs.sort();
    Ok(FindingSet::new(
        findings,
        config.clone(),
        RunMetadata {
            inputs,
            timestamp: None,
        },
    ))
}

/// Pairwise transition analysis: a percent-change entry for every quantity
/// shared by both documents (severity NOTICE when past the threshold, INFO
/// otherwise) plus lifecycle findings for categories present on one side only.
pub fn diff_transition(
    prev: &TransparencyReportDoc,
    curr: &TransparencyReportDoc,
    taxonomy: &Taxonomy,
    config: &RuleConfig,
) -> Result<Vec<Finding>, AuditError> {
    if prev.period.label == curr.period.label {
        return Err(AuditError::Input(format!(
            "diff needs two distinct periods, got {} twice",
            prev.period.label
        )));
    }
    config.validate()?;
    let transition = format!("{} -> {}", prev.period.label, curr.period.label);
    let mut findings = Vec::new();

    let mut pairs: Vec<(CategoryRef, &MetricValue, &MetricValue)> =
        vec![(CategoryRef::All, &prev.declared_total, &curr.declared_total)];
    for value in prev.removals.iter() {
        if value.key.action != Action::Removal
            || value.key.detection != Detection::Any
            || value.key.category.is_all()
        {
            continue;
        }
        let counterpart_key = MetricKey {
            period: curr.period.label.clone(),
            ..value.key.clone()
        };
        if let Some(counterpart) = curr.removals.get(&counterpart_key) {
            pairs.push((value.key.category.clone(), value, counterpart));
        }
    }

    for (category, prev_value, curr_value) in pairs {
        if !(prev_value.is_reported() && curr_value.is_reported()) {
            continue;
        }
        let change = percent_change(prev_value, curr_value)?;
        if let PercentChangeValue::Defined(hundredths) = change.value {
            let p = change.previous.unwrap();
            let c = change.current.unwrap();
            let severity =
                if exceeds_notice_threshold(100 * (c as i128 - p as i128), p, config) {
                    Severity::Notice
                } else {
                    Severity::Info
                };
            findings.push(Finding::new(
                rule_ids::HISTORICAL_CHANGE,
                Level::Historical,
                severity,
                vec![FindingKey::Metric(curr_value.key.clone())],
                Some(to_i64(p, "previous count")?),
                Some(to_i64(c, "current count")?),
                format!(
                    "{transition} {category}: {}",
                    format!("{}%", format_scaled(hundredths, 2))
                ),
            ));
        }
    }

    let events = taxonomy.detect_lifecycle(&[prev.clone(), curr.clone()])?;
    for event in events {
        if event.kind == crate::taxonomy::LifecycleKind::Continued {
            continue;
        }
        let counterpart = if event.counterpart.is_empty() {
            String::new()
        } else {
            format!(" (counterpart: {})", event.counterpart.join(", "))
        };
        findings.push(Finding::new(
            rule_ids::HISTORICAL_LIFECYCLE,
            Level::Historical,
            Severity::Notice,
            vec![FindingKey::Metric(MetricKey::new(
                Mechanism::TransparencyReport,
                event.period.clone(),
                CategoryRef::id(event.category.clone()),
                Action::Removal,
                Detection::Any,
            ))],
            None,
            None,
            format!("{transition} {}: {:?}{counterpart}", event.category, event.kind),
        ));
    }

    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Presence, Provenance, ReportingPeriod};

    fn tr_key(period: &str, category: CategoryRef, action: Action, detection: Detection) -> MetricKey {
        MetricKey::new(Mechanism::TransparencyReport, period, category, action, detection)
    }

    fn reported(key: MetricKey, count: u64) -> MetricValue {
        MetricValue::reported(key, count)
    }

    fn removal(period: &str, id: &str, count: u64) -> MetricValue {
        reported(tr_key(period, CategoryRef::id(id), Action::Removal, Detection::Any), count)
    }

    /// Minimal report: categories with ANY counts, a declared total, optional
    /// notices rows (submitted, removed, restricted) per category id.
    fn doc(
        period: &str,
        categories: &[(&str, u64)],
        declared_total: u64,
        notices: &[(&str, u64, u64, u64)],
    ) -> TransparencyReportDoc {
        let mut removals = MetricTable::new(Provenance::new("test"));
        for (id, count) in categories {
            removals.insert(removal(period, id, *count)).unwrap();
        }
        let mut notice_table = MetricTable::new(Provenance::new("test"));
        for (id, submitted, removed, restricted) in notices {
            let category = if *id == "ALL" {
                CategoryRef::All
            } else {
                CategoryRef::id(*id)
            };
            for (action, count) in [
                (Action::NoticeSubmitted, *submitted),
                (Action::NoticeRemoved, *removed),
                (Action::NoticeRestricted, *restricted),
            ] {
                notice_table
                    .insert(reported(
                        tr_key(period, category.clone(), action, Detection::Any),
                        count,
                    ))
                    .unwrap();
            }
        }
        TransparencyReportDoc {
            period: ReportingPeriod::new(period),
            removals,
            declared_total: reported(
                tr_key(period, CategoryRef::All, Action::Removal, Detection::Any),
                declared_total,
            ),
            declared_total_automated: MetricValue::absent(tr_key(
                period,
                CategoryRef::All,
                Action::Removal,
                Detection::Automated,
            )),
            notices: notice_table,
            terminations: MetricValue::absent(tr_key(
                period,
                CategoryRef::All,
                Action::AccountTermination,
                Detection::Any,
            )),
            reviewer_counts: None,
            automation_metrics: vec![],
        }
    }

    #[test]
    fn exact_disaggregation_is_info_with_zero_residual() {
        let d = doc("R1", &[("hate-speech", 60), ("spam", 40)], 100, &[]);
        let findings = check_internal_sums(&d, &RuleConfig::default()).unwrap();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, Severity::Info);
        assert_eq!(findings[0].delta, Some(0));
    }

    #[test]
    fn negative_residual_is_always_error() {
        let d = doc("R1", &[("hate-speech", 60), ("spam", 60)], 100, &[]);
        let findings = check_internal_sums(&d, &RuleConfig::default()).unwrap();
        assert_eq!(findings[0].severity, Severity::Error);
        assert_eq!(findings[0].delta, Some(-20));
    }

    #[test]
    fn missing_declared_total_is_input_error() {
        let mut d = doc("R1", &[("hate-speech", 60)], 100, &[]);
        d.declared_total = MetricValue {
            count: None,
            presence: Presence::Absent,
            ..d.declared_total
        };
        let err = check_internal_sums(&d, &RuleConfig::default()).unwrap_err();
        assert_eq!(err.code(), "INPUT_ERROR");
    }

    #[test]
    fn funnel_violation_is_one_error() {
        let d = doc("R1", &[("hate-speech", 1)], 1, &[("defamation", 100, 90, 20)]);
        let findings = check_notice_funnel(&d);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, Severity::Error);
        assert_eq!(findings[0].rule_id, rule_ids::INTERNAL_NOTICE_FUNNEL);
    }

    #[test]
    fn funnel_passes_within_bounds() {
        let d = doc("R1", &[("hate-speech", 1)], 1, &[("defamation", 100, 90, 10)]);
        assert!(check_notice_funnel(&d).is_empty());
    }

    fn relation() -> CrosswalkRelation {
        Taxonomy::builtin()
            .crosswalk("account-termination", Mechanism::TransparencyReport, Mechanism::SorDb)
            .unwrap()
    }

    fn termination_pair(a: u64, b: u64) -> (MetricValue, MetricValue) {
        (
            reported(
                tr_key("R3", CategoryRef::All, Action::AccountTermination, Detection::Any),
                a,
            ),
            reported(
                MetricKey::new(
                    Mechanism::SorDb,
                    "R3",
                    CategoryRef::All,
                    Action::AccountTermination,
                    Detection::Any,
                ),
                b,
            ),
        )
    }

    #[test]
    fn equal_counts_reconcile_as_info_with_zero_delta() {
        let (a, b) = termination_pair(500, 500);
        let finding = reconcile_external(&a, &b, &relation(), &RuleConfig::default()).unwrap();
        assert_eq!(finding.severity, Severity::Info);
        assert_eq!(finding.delta, Some(0));
    }

    #[test]
    fn period_label_mismatch_is_period_error() {
        let (a, mut b) = termination_pair(500, 500);
        b.key.period = "R4".into();
        let err = reconcile_external(&a, &b, &relation(), &RuleConfig::default()).unwrap_err();
        assert_eq!(err.code(), "PERIOD_ERROR");
    }

    #[test]
    fn date_slack_allows_label_mismatch() {
        let (a, mut b) = termination_pair(500, 480);
        b.key.period = "H1-2024".into();
        let pa = ReportingPeriod::with_dates(
            "R3",
            chrono::NaiveDate::from_ymd_opt(2024, 4, 1).unwrap(),
            chrono::NaiveDate::from_ymd_opt(2024, 9, 30).unwrap(),
        );
        let pb = ReportingPeriod::with_dates(
            "H1-2024",
            chrono::NaiveDate::from_ymd_opt(2024, 4, 2).unwrap(),
            chrono::NaiveDate::from_ymd_opt(2024, 9, 29).unwrap(),
        );
        let strict = reconcile_external_with_periods(&a, &b, &relation(), &pa, &pb, &RuleConfig::default());
        assert_eq!(strict.unwrap_err().code(), "PERIOD_ERROR");
        let mut config = RuleConfig::default();
        config.period_date_slack_days = 2;
        let finding = reconcile_external_with_periods(&a, &b, &relation(), &pa, &pb, &config).unwrap();
        assert_eq!(finding.rule_id, rule_ids::EXTERNAL_RECONCILIATION);
    }

    #[test]
    fn none_relation_reconciles_as_incomparable_notice() {
        let (a, b) = termination_pair(500, 100);
        let none_relation = Taxonomy::builtin()
            .crosswalk("electoral-process-interference", Mechanism::Sra, Mechanism::SorDb)
            .unwrap();
        let finding = reconcile_external(&a, &b, &none_relation, &RuleConfig::default()).unwrap();
        assert_eq!(finding.rule_id, rule_ids::EXTERNAL_INCOMPARABLE);
        assert_eq!(finding.severity, Severity::Notice);
    }

    #[test]
    fn percent_change_identity_is_zero() {
        let a = removal("R1", "hate-speech", 1234);
        let b = removal("R2", "hate-speech", 1234);
        let change = percent_change(&a, &b).unwrap();
        assert_eq!(change.value, PercentChangeValue::Defined(0));
        assert_eq!(change.formatted().unwrap(), "0.00%");
    }

    #[test]
    fn percent_change_from_absent_is_undefined_new() {
        let a = MetricValue::absent(tr_key("R1", CategoryRef::id("spam"), Action::Removal, Detection::Any));
        let b = removal("R2", "spam", 29_628_165);
        let change = percent_change(&a, &b).unwrap();
        assert_eq!(change.value, PercentChangeValue::UndefinedNew);
    }

    #[test]
    fn percent_change_from_zero_is_undefined_new() {
        let a = removal("R1", "spam", 0);
        let b = removal("R2", "spam", 10);
        assert_eq!(percent_change(&a, &b).unwrap().value, PercentChangeValue::UndefinedNew);
    }

    #[test]
    fn percent_change_to_absent_is_undefined_gone() {
        let a = removal("R3", "suicide-self-injury", 106_042);
        let b = MetricValue::absent(tr_key(
            "R4",
            CategoryRef::id("suicide-self-injury"),
            Action::Removal,
            Detection::Any,
        ));
        assert_eq!(percent_change(&a, &b).unwrap().value, PercentChangeValue::UndefinedGone);
    }

    #[test]
    fn percent_change_rejects_key_and_period_mismatches() {
        let a = removal("R1", "hate-speech", 10);
        let b = removal("R2", "spam", 20);
        assert_eq!(percent_change(&a, &b).unwrap_err().code(), "KEY_ERROR");
        let c = removal("R1", "hate-speech", 20);
        assert_eq!(percent_change(&a, &c).unwrap_err().code(), "KEY_ERROR");
    }

    #[test]
    fn automation_share_renders_at_four_decimals() {
        let total = removal("R2", "spam", 29_628_165);
        let automated = reported(
            tr_key("R2", CategoryRef::id("spam"), Action::Removal, Detection::Automated),
            29_622_615,
        );
        let outcome = automation_share(&total, &automated).unwrap();
        assert_eq!(outcome.rendered().unwrap(), "0.9998");
        assert!(outcome.violation.is_none());
    }

    #[test]
    fn automation_share_zero_base_is_undefined() {
        let total = removal("R2", "spam", 0);
        let automated = reported(
            tr_key("R2", CategoryRef::id("spam"), Action::Removal, Detection::Automated),
            0,
        );
        let outcome = automation_share(&total, &automated).unwrap();
        assert!(outcome.metric.is_none());
        assert!(outcome.violation.is_none());
    }

    #[test]
    fn automation_share_violation_emits_error_finding() {
        let total = removal("R2", "spam", 10);
        let automated = reported(
            tr_key("R2", CategoryRef::id("spam"), Action::Removal, Detection::Automated),
            11,
        );
        let outcome = automation_share(&total, &automated).unwrap();
        assert!(outcome.metric.is_none());
        assert_eq!(outcome.violation.unwrap().severity, Severity::Error);
    }

    #[test]
    fn empty_bundle_is_input_error() {
        let err = run_all(&Bundle::default(), Taxonomy::builtin(), &RuleConfig::default())
            .unwrap_err();
        assert_eq!(err.code(), "INPUT_ERROR");
    }

    #[test]
    fn reports_only_bundle_skips_external_and_cross_mechanism() {
        let bundle = Bundle {
            reports: vec![doc("R1", &[("hate-speech", 10)], 10, &[])],
            sor_tables: vec![],
            sra: None,
        };
        let set = run_all(&bundle, Taxonomy::builtin(), &RuleConfig::default()).unwrap();
        let skipped_rules: Vec<&str> = set
            .findings
            .iter()
            .filter(|f| f.rule_id.ends_with("_SKIPPED"))
            .map(|f| f.rule_id.as_str())
            .collect();
        assert_eq!(
            skipped_rules,
            vec![
                rule_ids::EXTERNAL_SKIPPED,
                rule_ids::HISTORICAL_SKIPPED,
                rule_ids::CROSS_MECHANISM_SKIPPED
            ]
        );
    }

    #[test]
    fn historical_below_threshold_total_is_info_not_notice() {
        let series = vec![
            doc("R1", &[("hate-speech", 100)], 100, &[]),
            doc("R2", &[("hate-speech", 70)], 70, &[]),
        ];
        let findings = check_historical(&series, &RuleConfig::default()).unwrap();
        // -30% on the total: reported as INFO; the category stays silent.
        let totals: Vec<&Finding> = findings
            .iter()
            .filter(|f| f.rule_id == rule_ids::HISTORICAL_FLUCTUATION)
            .collect();
        assert_eq!(totals.len(), 1);
        assert_eq!(totals[0].severity, Severity::Info);
    }

    #[test]
    fn flat_series_yields_only_the_info_total() {
        let series = vec![
            doc("R1", &[("hate-speech", 100)], 100, &[]),
            doc("R2", &[("hate-speech", 100)], 100, &[]),
        ];
        let findings = check_historical(&series, &RuleConfig::default()).unwrap();
        assert!(findings
            .iter()
            .all(|f| f.severity == Severity::Info && f.rule_id == rule_ids::HISTORICAL_FLUCTUATION));
    }

    #[test]
    fn diff_rejects_same_period_twice() {
        let a = doc("R1", &[("hate-speech", 10)], 10, &[]);
        let err = diff_transition(&a, &a.clone(), Taxonomy::builtin(), &RuleConfig::default())
            .unwrap_err();
        assert_eq!(err.code(), "INPUT_ERROR");
    }

    #[test]
    fn identical_docs_diff_to_all_zero_changes() {
        let a = doc("R1", &[("hate-speech", 10), ("spam", 20)], 30, &[]);
        let b = doc("R2", &[("hate-speech", 10), ("spam", 20)], 30, &[]);
        let findings = diff_transition(&a, &b, Taxonomy::builtin(), &RuleConfig::default()).unwrap();
        let changes: Vec<&Finding> = findings
            .iter()
            .filter(|f| f.rule_id == rule_ids::HISTORICAL_CHANGE)
            .collect();
        assert_eq!(changes.len(), 3);
        assert!(changes.iter().all(|f| f.message.contains("0.00%")));
    }
}
