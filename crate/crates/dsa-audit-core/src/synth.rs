//! Deterministic synthetic SOR corpora for tests and benchmarks.
//!
//! The generator is an iterator: the same seed replays the same rows, so a
//! corpus can be written to disk in one pass and tallied in another without
//! ever holding it in memory.

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

use crate::model::{AccountAction, SorRecord};

pub const PLATFORMS: [&str; 3] = ["instagram", "other-app", "third-app"];

pub const CATEGORIES: [&str; 8] = [
    "Scams and Fraud",
    "Public Security Risk",
    "Nudity",
    "Violence",
    "Harmful or Illegal Speech",
    "Self-Harm",
    "Child Protection",
    "Platform Service Abuse",
];

/// Knobs for corpus generation.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub rows: usize,
    pub seed: u64,
    /// Every n-th row is emitted malformed (bad date). None = clean corpus.
    pub malformed_every: Option<usize>,
    pub date_from: NaiveDate,
    pub date_to: NaiveDate,
}

impl CorpusSpec {
    pub fn clean(seed: u64, rows: usize) -> Self {
        CorpusSpec {
            rows,
            seed,
            malformed_every: None,
            date_from: NaiveDate::from_ymd_opt(2023, 4, 1).unwrap(),
            date_to: NaiveDate::from_ymd_opt(2025, 3, 31).unwrap(),
        }
    }

    pub fn with_malformed_every(mut self, every: usize) -> Self {
        self.malformed_every = Some(every);
        self
    }
}

/// One generated row: its CSV line and, for well-formed rows, the record the
/// parser is expected to produce.
#[derive(Debug, Clone)]
pub struct SynthRow {
    pub csv_line: String,
    pub record: Option<SorRecord>,
}

pub struct SynthRows {
    rng: ChaCha8Rng,
    spec: CorpusSpec,
    emitted: usize,
    day_span: i64,
}

impl SynthRows {
    pub fn new(spec: CorpusSpec) -> Self {
        let day_span = (spec.date_to - spec.date_from).num_days().max(0) + 1;
        SynthRows {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            spec,
            emitted: 0,
            day_span,
        }
    }
}

impl Iterator for SynthRows {
    type Item = SynthRow;

    fn next(&mut self) -> Option<Self::Item> {
        if self.emitted >= self.spec.rows {
            return None;
        }
        self.emitted += 1;
        let index = self.emitted;

        let platform = PLATFORMS[self.rng.gen_range(0..PLATFORMS.len())];
        let category = CATEGORIES[self.rng.gen_range(0..CATEGORIES.len())];
        let account_action = match self.rng.gen_range(0..10) {
            0..=2 => Some(AccountAction::Terminated),
            3..=4 => Some(AccountAction::Suspended),
            5 => Some(AccountAction::None),
            _ => None,
        };
        let automated_detection = self.rng.gen_bool(0.9);
        let automated_decision = self.rng.gen_bool(0.6);
        let date = self.spec.date_from + chrono::Days::new(self.rng.gen_range(0..self.day_span) as u64);
        let scope = match self.rng.gen_range(0..3) {
            0 => None,
            1 => Some(vec!["DE".to_string()]),
            _ => Some(vec!["DE".to_string(), "FR".to_string()]),
        };

        let malformed = self
            .spec
            .malformed_every
            .is_some_and(|every| every > 0 && index % every == 0);

        let action_text = match account_action {
            Some(AccountAction::Terminated) => "TERMINATED",
            Some(AccountAction::Suspended) => "SUSPENDED",
            Some(AccountAction::None) => "NONE",
            None => "",
        };
        let scope_text = match &scope {
            None => String::new(),
            Some(items) => format!("\"{}\"", items.join(",")),
        };
        let date_text = if malformed {
            "31-12-2024".to_string()
        } else {
            date.format("%Y-%m-%d").to_string()
        };
        let csv_line = format!(
            "d{index},{platform},{category},{action_text},,{automated_detection},{automated_decision},{date_text},{scope_text}\n"
        );

        let record = if malformed {
            None
        } else {
            Some(SorRecord {
                decision_id: format!("d{index}"),
                platform: platform.to_string(),
                category: category.to_string(),
                account_action,
                visibility_action: None,
                automated_detection,
                automated_decision,
                application_date: date,
                territorial_scope: scope,
            })
        };

        Some(SynthRow { csv_line, record })
    }
}

/// The dump header matching [`crate::ingest::SOR_REQUIRED_COLUMNS`].
pub fn csv_header() -> String {
    format!("{}\n", crate::ingest::SOR_REQUIRED_COLUMNS.join(","))
}

/// Streams a whole corpus to a writer without buffering it.
pub fn write_corpus<W: Write>(spec: &CorpusSpec, writer: &mut W) -> std::io::Result<()> {
    writer.write_all(csv_header().as_bytes())?;
    for row in SynthRows::new(spec.clone()) {
        writer.write_all(row.csv_line.as_bytes())?;
    }
    Ok(())
}

/// Builds the corpus in memory: the CSV bytes and the well-formed records.
pub fn corpus_in_memory(spec: &CorpusSpec) -> (String, Vec<SorRecord>) {
    let mut csv = csv_header();
    let mut records = Vec::new();
    for row in SynthRows::new(spec.clone()) {
        csv.push_str(&row.csv_line);
        if let Some(record) = row.record {
            records.push(record);
        }
    }
    (csv, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_replays_identically() {
        let spec = CorpusSpec::clean(7, 500);
        let (a, _) = corpus_in_memory(&spec);
        let (b, _) = corpus_in_memory(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_rows_have_no_expected_record() {
        let spec = CorpusSpec::clean(1, 100).with_malformed_every(10);
        let (_, records) = corpus_in_memory(&spec);
        assert_eq!(records.len(), 90);
    }

    #[test]
    fn generated_corpus_parses_back_to_expected_records() {
        let spec = CorpusSpec::clean(42, 1000).with_malformed_every(97);
        let (csv, expected) = corpus_in_memory(&spec);
        let mut stream =
            crate::ingest::stream_sor_records(csv.as_bytes(), crate::ingest::ParseMode::Lenient)
                .unwrap();
        let parsed: Vec<SorRecord> = stream.by_ref().map(Result::unwrap).collect();
        assert_eq!(parsed, expected);
        assert_eq!(stream.stats().skipped as usize, 1000 - expected.len());
    }
}
