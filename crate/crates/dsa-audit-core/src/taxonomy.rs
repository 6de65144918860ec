//! Category vocabularies, cross-mechanism crosswalks and category lifecycle
//! detection.
//!
//! Each mechanism carries one vocabulary per era (the transparency-report
//! vocabulary was reshuffled in its fourth report, so two eras coexist).
//! Crosswalk relations declare how categories map across vocabularies:
//! renames, merges, splits, exact matches — or nothing, which is itself a
//! reportable condition rather than an error.
//!
//! Registries are built once and immutable; every operation is a pure read.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::AuditError;
use crate::model::{
    is_valid_slug, slugify, CanonicalCategory, CategoryLookup, Mechanism, Action, CategoryRef,
    Detection, MetricKey, TransparencyReportDoc, SCHEMA_VERSION,
};

/// How one category relates to categories of another vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationKind {
    Exact,
    Rename,
    Merge,
    Split,
    None,
}

impl RelationKind {
    /// Kind seen when the same relation is queried from the other side.
    pub fn inverse(self) -> RelationKind {
        match self {
            RelationKind::Merge => RelationKind::Split,
            RelationKind::Split => RelationKind::Merge,
            other => other,
        }
    }
}

/// A category pinned to a concrete vocabulary (mechanism + era).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VocabRef {
    pub mechanism: Mechanism,
    pub era: String,
    pub id: String,
}

impl VocabRef {
    pub fn new(mechanism: Mechanism, era: impl Into<String>, id: impl Into<String>) -> Self {
        VocabRef {
            mechanism,
            era: era.into(),
            id: id.into(),
        }
    }
}

impl fmt::Display for VocabRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.mechanism, self.era, self.id)
    }
}

/// A declared (or derived) mapping from one category into another vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkRelation {
    pub from: VocabRef,
    pub to: Vec<VocabRef>,
    pub kind: RelationKind,
}

impl CrosswalkRelation {
    pub fn validate(&self) -> Result<(), AuditError> {
        let arity_ok = match self.kind {
            RelationKind::Exact | RelationKind::Rename | RelationKind::Merge => self.to.len() == 1,
            RelationKind::Split => self.to.len() >= 2,
            RelationKind::None => self.to.is_empty(),
        };
        if !arity_ok {
            return Err(AuditError::Schema(format!(
                "{:?} relation from {} has {} targets",
                self.kind,
                self.from,
                self.to.len()
            )));
        }
        Ok(())
    }
}

/// What happened to one category at one period transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LifecycleKind {
    Introduced,
    Discontinued,
    Renamed,
    MergedInto,
    SplitFrom,
    Continued,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LifecycleEvent {
    pub category: String,
    /// Label of the period the transition lands on.
    pub period: String,
    pub kind: LifecycleKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counterpart: Vec<String>,
}

impl LifecycleEvent {
    fn new(category: &str, period: &str, kind: LifecycleKind, counterpart: Vec<String>) -> Self {
        LifecycleEvent {
            category: category.to_string(),
            period: period.to_string(),
            kind,
            counterpart,
        }
    }
}

#[derive(Debug, Deserialize)]
struct VocabularyFile {
    schema_version: String,
    mechanism: Mechanism,
    era: String,
    #[serde(default)]
    periods: Option<Vec<String>>,
    categories: Vec<VocabEntry>,
}

#[derive(Debug, Deserialize)]
struct VocabEntry {
    id: String,
    display_name: String,
    #[serde(default)]
    first_period: Option<String>,
    #[serde(default)]
    last_period: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CrosswalkFile {
    schema_version: String,
    #[serde(default)]
    relations: Vec<CrosswalkRelation>,
}

/// One mechanism-era vocabulary with a normalized label index.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub mechanism: Mechanism,
    pub era: String,
    /// Period labels this era covers; `None` marks the mechanism's default
    /// era, used for any period not claimed by a dated one.
    pub periods: Option<Vec<String>>,
    categories: BTreeMap<String, CanonicalCategory>,
    by_label: BTreeMap<String, Vec<String>>,
}

impl Vocabulary {
    fn from_file(file: VocabularyFile) -> Result<Self, AuditError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(AuditError::Schema(format!(
                "vocabulary schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let mut categories = BTreeMap::new();
        let mut by_label: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for entry in file.categories {
            let category = CanonicalCategory {
                id: entry.id,
                display_name: entry.display_name,
                mechanism_vocabulary: file.mechanism,
                first_period: entry.first_period,
                last_period: entry.last_period,
            };
            category.validate()?;
            for norm in [slugify(&category.display_name), category.id.clone()] {
                let ids = by_label.entry(norm).or_default();
                if !ids.contains(&category.id) {
                    ids.push(category.id.clone());
                }
            }
            if categories
                .insert(category.id.clone(), category)
                .is_some()
            {
                return Err(AuditError::Duplicate(format!(
                    "category id repeated in {}/{} vocabulary",
                    file.mechanism, file.era
                )));
            }
        }
        Ok(Vocabulary {
            mechanism: file.mechanism,
            era: file.era,
            periods: file.periods,
            categories,
            by_label,
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.categories.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&CanonicalCategory> {
        self.categories.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn categories(&self) -> impl Iterator<Item = &CanonicalCategory> {
        self.categories.values()
    }

    fn resolve(&self, raw_label: &str) -> Result<&str, AuditError> {
        let norm = slugify(raw_label);
        match self.by_label.get(&norm).map(Vec::as_slice) {
            Some([id]) => Ok(self.categories[id].id.as_str()),
            Some(ids) if ids.len() > 1 => Err(AuditError::Ambiguity(format!(
                "`{raw_label}` matches {} categories in {}/{}",
                ids.len(),
                self.mechanism,
                self.era
            ))),
            _ => Err(AuditError::Vocabulary(format!(
                "`{raw_label}` not found in {}/{} vocabulary",
                self.mechanism, self.era
            ))),
        }
    }
}

/// Immutable view over all loaded vocabularies and crosswalk relations.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    vocabularies: Vec<Vocabulary>,
    relations: Vec<CrosswalkRelation>,
}

impl Taxonomy {
    /// The vocabularies and crosswalks compiled into the crate.
    pub fn builtin() -> &'static Taxonomy {
        static BUILTIN: OnceLock<Taxonomy> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Taxonomy::from_sources(
                &[
                    include_str!("../config/vocab-tr-r1-r3.json"),
                    include_str!("../config/vocab-tr-r4.json"),
                    include_str!("../config/vocab-sor.json"),
                    include_str!("../config/vocab-sra.json"),
                ],
                &[
                    include_str!("../config/crosswalk-builtin.json"),
                    include_str!("../config/crosswalk-dr-annex.json"),
                ],
            )
            .expect("builtin taxonomy config is valid")
        })
    }

    /// Builds a taxonomy from raw JSON documents.
    pub fn from_sources(vocab_docs: &[&str], crosswalk_docs: &[&str]) -> Result<Self, AuditError> {
        let mut vocabularies = Vec::new();
        for doc in vocab_docs {
            let file: VocabularyFile = serde_json::from_str(doc)
                .map_err(|e| AuditError::Schema(format!("vocabulary file: {e}")))?;
            vocabularies.push(Vocabulary::from_file(file)?);
        }
        let mut relations = Vec::new();
        for doc in crosswalk_docs {
            let file: CrosswalkFile = serde_json::from_str(doc)
                .map_err(|e| AuditError::Schema(format!("crosswalk file: {e}")))?;
            if file.schema_version != SCHEMA_VERSION {
                return Err(AuditError::Schema(format!(
                    "crosswalk schema_version {} (expected {SCHEMA_VERSION})",
                    file.schema_version
                )));
            }
            relations.extend(file.relations);
        }
        let taxonomy = Taxonomy {
            vocabularies,
            relations,
        };
        taxonomy.validate()?;
        Ok(taxonomy)
    }

    /// Loads `vocab*.json` and `crosswalk*.json` files from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self, AuditError> {
        let mut vocab_docs = Vec::new();
        let mut crosswalk_docs = Vec::new();
        let mut names: Vec<_> = std::fs::read_dir(dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .collect();
        names.sort();
        for path in names {
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            if !name.ends_with(".json") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            if name.starts_with("vocab") {
                vocab_docs.push(text);
            } else if name.starts_with("crosswalk") {
                crosswalk_docs.push(text);
            }
        }
        if vocab_docs.is_empty() {
            return Err(AuditError::Input(format!(
                "no vocab*.json files in {}",
                dir.display()
            )));
        }
        let vocab_refs: Vec<&str> = vocab_docs.iter().map(String::as_str).collect();
        let crosswalk_refs: Vec<&str> = crosswalk_docs.iter().map(String::as_str).collect();
        Taxonomy::from_sources(&vocab_refs, &crosswalk_refs)
    }

    fn validate(&self) -> Result<(), AuditError> {
        let mut era_keys = BTreeSet::new();
        let mut claimed_periods: BTreeMap<(Mechanism, &str), &str> = BTreeMap::new();
        for vocab in &self.vocabularies {
            if !era_keys.insert((vocab.mechanism, vocab.era.clone())) {
                return Err(AuditError::Duplicate(format!(
                    "vocabulary {}/{} loaded twice",
                    vocab.mechanism, vocab.era
                )));
            }
            if let Some(periods) = &vocab.periods {
                for period in periods {
                    if let Some(other) =
                        claimed_periods.insert((vocab.mechanism, period.as_str()), &vocab.era)
                    {
                        return Err(AuditError::Duplicate(format!(
                            "period {period} claimed by eras {other} and {} of {}",
                            vocab.era, vocab.mechanism
                        )));
                    }
                }
            }
        }
        for relation in &self.relations {
            relation.validate()?;
            for endpoint in std::iter::once(&relation.from).chain(relation.to.iter()) {
                if !is_valid_slug(&endpoint.id) {
                    return Err(AuditError::Value(format!("bad slug in crosswalk: {endpoint}")));
                }
                let known = self
                    .era(endpoint.mechanism, &endpoint.era)
                    .map(|v| v.contains(&endpoint.id))
                    .unwrap_or(false);
                if !known {
                    return Err(AuditError::Vocabulary(format!(
                        "crosswalk endpoint {endpoint} not present in any loaded vocabulary"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn era(&self, mechanism: Mechanism, era: &str) -> Option<&Vocabulary> {
        self.vocabularies
            .iter()
            .find(|v| v.mechanism == mechanism && v.era == era)
    }

    /// The vocabulary governing `period` for a mechanism: the era claiming the
    /// period explicitly, else the mechanism's default era.
    pub fn era_for(&self, mechanism: Mechanism, period: &str) -> Option<&Vocabulary> {
        self.vocabularies
            .iter()
            .find(|v| {
                v.mechanism == mechanism
                    && v.periods
                        .as_ref()
                        .is_some_and(|ps| ps.iter().any(|p| p == period))
            })
            .or_else(|| {
                self.vocabularies
                    .iter()
                    .find(|v| v.mechanism == mechanism && v.periods.is_none())
            })
    }

    /// True if `id` exists in any era of the mechanism.
    pub fn contains_anywhere(&self, mechanism: Mechanism, id: &str) -> bool {
        self.vocabularies
            .iter()
            .any(|v| v.mechanism == mechanism && v.contains(id))
    }

    fn eras_containing(&self, mechanism: Mechanism, id: &str) -> Vec<&Vocabulary> {
        self.vocabularies
            .iter()
            .filter(|v| v.mechanism == mechanism && v.contains(id))
            .collect()
    }

    /// Resolves a raw label to a canonical category id, insensitive to case,
    /// whitespace, punctuation and parenthesized annotations. Never guesses:
    /// zero matches and multiple matches are distinct errors.
    pub fn resolve_category(
        &self,
        raw_label: &str,
        mechanism: Mechanism,
        period: &str,
    ) -> Result<&str, AuditError> {
        let vocab = self.era_for(mechanism, period).ok_or_else(|| {
            AuditError::Vocabulary(format!(
                "no {mechanism} vocabulary covers period {period}"
            ))
        })?;
        vocab.resolve(raw_label)
    }

    /// The configured relation for `category` from one mechanism into
    /// another. Same-mechanism queries return the exact self-relation;
    /// a missing mapping yields `NONE`, which is reportable but not an error.
    pub fn crosswalk(
        &self,
        category: &str,
        from: Mechanism,
        to: Mechanism,
    ) -> Result<CrosswalkRelation, AuditError> {
        let home_eras = self.eras_containing(from, category);
        let Some(first_era) = home_eras.first() else {
            return Err(AuditError::Vocabulary(format!(
                "category `{category}` unknown in {from} vocabulary"
            )));
        };
        let self_ref = VocabRef::new(from, first_era.era.clone(), category);
        if from == to {
            return Ok(CrosswalkRelation {
                from: self_ref.clone(),
                to: vec![self_ref],
                kind: RelationKind::Exact,
            });
        }

        // Direct declarations take precedence over derived inverses.
        let mut direct_targets = BTreeSet::new();
        let mut direct_kind: Option<RelationKind> = None;
        let mut direct_from: Option<VocabRef> = None;
        for relation in &self.relations {
            if relation.from.mechanism != from || relation.from.id != category {
                continue;
            }
            let targets: Vec<&VocabRef> =
                relation.to.iter().filter(|t| t.mechanism == to).collect();
            if targets.is_empty() {
                continue;
            }
            if *direct_kind.get_or_insert(relation.kind) != relation.kind {
                return Err(AuditError::Ambiguity(format!(
                    "conflicting crosswalk kinds declared for {category} ({from} -> {to})"
                )));
            }
            direct_from.get_or_insert_with(|| relation.from.clone());
            direct_targets.extend(targets.into_iter().cloned());
        }
        if let Some(kind) = direct_kind {
            return Ok(CrosswalkRelation {
                from: direct_from.unwrap_or(self_ref),
                to: direct_targets.into_iter().collect(),
                kind,
            });
        }

        let mut inverse_sources = BTreeSet::new();
        let mut inverse_kind: Option<RelationKind> = None;
        for relation in &self.relations {
            if relation.from.mechanism != to {
                continue;
            }
            if !relation
                .to
                .iter()
                .any(|t| t.mechanism == from && t.id == category)
            {
                continue;
            }
            let kind = relation.kind.inverse();
            if *inverse_kind.get_or_insert(kind) != kind {
                return Err(AuditError::Ambiguity(format!(
                    "conflicting inverse crosswalk kinds for {category} ({from} -> {to})"
                )));
            }
            inverse_sources.insert(relation.from.clone());
        }
        if let Some(kind) = inverse_kind {
            return Ok(CrosswalkRelation {
                from: self_ref,
                to: inverse_sources.into_iter().collect(),
                kind,
            });
        }

        Ok(CrosswalkRelation {
            from: self_ref,
            to: Vec::new(),
            kind: RelationKind::None,
        })
    }

    fn relation_from_old(
        &self,
        mechanism: Mechanism,
        era_prev: &str,
        id: &str,
        era_curr: &str,
    ) -> Option<&CrosswalkRelation> {
        self.relations.iter().find(|r| {
            r.from.mechanism == mechanism
                && r.from.era == era_prev
                && r.from.id == id
                && r.to
                    .iter()
                    .any(|t| t.mechanism == mechanism && t.era == era_curr)
        })
    }

    fn relations_targeting_new(
        &self,
        mechanism: Mechanism,
        era_prev: &str,
        id: &str,
        era_curr: &str,
    ) -> Vec<&CrosswalkRelation> {
        self.relations
            .iter()
            .filter(|r| {
                r.from.mechanism == mechanism
                    && r.from.era == era_prev
                    && r.to
                        .iter()
                        .any(|t| t.mechanism == mechanism && t.era == era_curr && t.id == id)
            })
            .collect()
    }

    /// Classifies what happened to every category of the series at every
    /// period transition. Emits exactly `(N - 1) x |union of category ids|`
    /// events; renames, merges and splits are recognized only where the
    /// crosswalk declares them, everything else is introduction or
    /// discontinuation.
    pub fn detect_lifecycle(
        &self,
        series: &[TransparencyReportDoc],
    ) -> Result<Vec<LifecycleEvent>, AuditError> {
        if series.len() < 2 {
            return Err(AuditError::Input(
                "lifecycle detection needs at least two documents".into(),
            ));
        }
        let periods: Vec<&crate::model::ReportingPeriod> =
            series.iter().map(|d| &d.period).collect();
        crate::model::validate_series_order(&periods)?;

        let mut union: BTreeSet<&str> = BTreeSet::new();
        for doc in series {
            for value in doc.removals.iter() {
                if value.key.action == Action::Removal && value.key.detection == Detection::Any {
                    if let CategoryRef::Id(id) = &value.key.category {
                        union.insert(id);
                    }
                }
            }
        }

        let reported = |doc: &TransparencyReportDoc, id: &str| -> bool {
            let key = MetricKey::new(
                Mechanism::TransparencyReport,
                doc.period.label.clone(),
                CategoryRef::id(id),
                Action::Removal,
                Detection::Any,
            );
            doc.removals.get(&key).map(|v| v.is_reported()).unwrap_or(false)
        };

        let mut events = Vec::new();
        for pair in series.windows(2) {
            let (prev, curr) = (&pair[0], &pair[1]);
            let label = curr.period.label.as_str();
            let era_prev = self
                .era_for(Mechanism::TransparencyReport, &prev.period.label)
                .map(|v| v.era.clone())
                .unwrap_or_default();
            let era_curr = self
                .era_for(Mechanism::TransparencyReport, label)
                .map(|v| v.era.clone())
                .unwrap_or_default();

            for id in &union {
                let before = reported(prev, id);
                let now = reported(curr, id);
                let event = match (before, now) {
                    (true, true) | (false, false) => {
                        LifecycleEvent::new(id, label, LifecycleKind::Continued, vec![])
                    }
                    (true, false) => {
                        match self.relation_from_old(
                            Mechanism::TransparencyReport,
                            &era_prev,
                            id,
                            &era_curr,
                        ) {
                            Some(r) if r.kind == RelationKind::Merge => LifecycleEvent::new(
                                id,
                                label,
                                LifecycleKind::MergedInto,
                                r.to.iter().map(|t| t.id.clone()).collect(),
                            ),
                            Some(r) if r.kind == RelationKind::Rename => LifecycleEvent::new(
                                id,
                                label,
                                LifecycleKind::Renamed,
                                r.to.iter().map(|t| t.id.clone()).collect(),
                            ),
                            // A discontinued split parent keeps its pieces as
                            // counterparts but reads as discontinued.
                            Some(r) => LifecycleEvent::new(
                                id,
                                label,
                                LifecycleKind::Discontinued,
                                r.to.iter().map(|t| t.id.clone()).collect(),
                            ),
                            None => {
                                LifecycleEvent::new(id, label, LifecycleKind::Discontinued, vec![])
                            }
                        }
                    }
                    (false, true) => {
                        let sources = self.relations_targeting_new(
                            Mechanism::TransparencyReport,
                            &era_prev,
                            id,
                            &era_curr,
                        );
                        let split_sources: Vec<String> = sources
                            .iter()
                            .filter(|r| r.kind == RelationKind::Split)
                            .map(|r| r.from.id.clone())
                            .collect();
                        if !split_sources.is_empty() {
                            LifecycleEvent::new(id, label, LifecycleKind::SplitFrom, split_sources)
                        } else {
                            let merged_sources: Vec<String> = sources
                                .iter()
                                .filter(|r| {
                                    matches!(r.kind, RelationKind::Merge | RelationKind::Rename)
                                })
                                .map(|r| r.from.id.clone())
                                .collect();
                            LifecycleEvent::new(
                                id,
                                label,
                                LifecycleKind::Introduced,
                                merged_sources,
                            )
                        }
                    }
                };
                events.push(event);
            }
        }
        Ok(events)
    }
}

impl CategoryLookup for Taxonomy {
    fn contains_category(&self, mechanism: Mechanism, period: &str, id: &str) -> bool {
        self.era_for(mechanism, period)
            .map(|v| v.contains(id))
            .unwrap_or(false)
    }
}
