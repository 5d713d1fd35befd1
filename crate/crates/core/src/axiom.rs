//! Conditional strategic axioms and the library that serves them.
//!
//! An axiom is a single heuristic of the form `If <precondition>, then
//! <prescription>.` annotated with its source strategist, tradition, free-form
//! tags and an optional primary theme. Libraries are loaded from a JSON
//! document (see `docs/formats.md`), validated as a whole and kept sorted by id.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Format tag written into every axiom document.
pub const AXIOM_FORMAT: &str = "entangle-axioms/1";

const BUNDLED_META_CASE: &str = include_str!("../data/meta_case_axioms.json");

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("cannot read axiom file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported axiom format {0:?} (expected {AXIOM_FORMAT:?})")]
    Format(String),
    #[error("record {index} ({id:?}): {reason}")]
    InvalidRecord {
        index: usize,
        id: String,
        reason: String,
    },
    #[error("duplicate axiom id {id:?} (records {first} and {second})")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("unknown strategist {0:?}")]
    UnknownStrategist(String),
    #[error("unknown tradition {0:?}")]
    UnknownTradition(String),
    #[error("invalid tag {0:?}: tags are lowercase [a-z0-9_-]+")]
    InvalidTag(String),
    #[error("invalid filter {0:?}: expected strategist=<name>, tradition=<name> or tag=<label>")]
    InvalidFilter(String),
    #[error("unknown axiom id {0:?}")]
    UnknownId(String),
}

/// Source of an axiom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategist {
    Machiavelli,
    SunTzu,
    Clausewitz,
    LiddellHart,
    Martin,
    /// Any other source, written `custom:<name>`.
    Custom(String),
}

impl Strategist {
    /// Tradition implied by the built-in strategists; `None` for custom ones.
    pub fn implied_tradition(&self) -> Option<Tradition> {
        match self {
            Strategist::Machiavelli
            | Strategist::SunTzu
            | Strategist::Clausewitz
            | Strategist::LiddellHart => Some(Tradition::MilitaryPolitical),
            Strategist::Martin => Some(Tradition::Corporate),
            Strategist::Custom(_) => None,
        }
    }
}

impl fmt::Display for Strategist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategist::Machiavelli => f.write_str("machiavelli"),
            Strategist::SunTzu => f.write_str("sun_tzu"),
            Strategist::Clausewitz => f.write_str("clausewitz"),
            Strategist::LiddellHart => f.write_str("liddell_hart"),
            Strategist::Martin => f.write_str("martin"),
            Strategist::Custom(name) => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for Strategist {
    type Err = LibraryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "machiavelli" => Strategist::Machiavelli,
            "sun_tzu" => Strategist::SunTzu,
            "clausewitz" => Strategist::Clausewitz,
            "liddell_hart" => Strategist::LiddellHart,
            "martin" => Strategist::Martin,
            other => match other.strip_prefix("custom:") {
                Some(name) if !name.trim().is_empty() => Strategist::Custom(name.to_string()),
                _ => return Err(LibraryError::UnknownStrategist(s.to_string())),
            },
        })
    }
}

impl TryFrom<String> for Strategist {
    type Error = LibraryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Strategist> for String {
    fn from(s: Strategist) -> Self {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tradition {
    MilitaryPolitical,
    Corporate,
}

impl fmt::Display for Tradition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tradition::MilitaryPolitical => "military_political",
            Tradition::Corporate => "corporate",
        })
    }
}

impl FromStr for Tradition {
    type Err = LibraryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "military_political" => Ok(Tradition::MilitaryPolitical),
            "corporate" => Ok(Tradition::Corporate),
            _ => Err(LibraryError::UnknownTradition(s.to_string())),
        }
    }
}

/// Primary theme of an axiom: one of the eight cross-tradition themes, or a
/// custom label registered in the library's `custom_themes`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Theme {
    FlexibilityUnderUncertainty,
    NarrativeControl,
    IndirectManeuver,
    TimingAndTempo,
    ResourceOptimization,
    StructuralRepositioning,
    CoalitionManagement,
    CrisisTransformation,
    Custom(String),
}

impl Theme {
    pub const TAXONOMY: [Theme; 8] = [
        Theme::FlexibilityUnderUncertainty,
        Theme::NarrativeControl,
        Theme::IndirectManeuver,
        Theme::TimingAndTempo,
        Theme::ResourceOptimization,
        Theme::StructuralRepositioning,
        Theme::CoalitionManagement,
        Theme::CrisisTransformation,
    ];

    pub fn label(&self) -> &str {
        match self {
            Theme::FlexibilityUnderUncertainty => "flexibility_under_uncertainty",
            Theme::NarrativeControl => "narrative_control",
            Theme::IndirectManeuver => "indirect_maneuver",
            Theme::TimingAndTempo => "timing_and_tempo",
            Theme::ResourceOptimization => "resource_optimization",
            Theme::StructuralRepositioning => "structural_repositioning",
            Theme::CoalitionManagement => "coalition_management",
            Theme::CrisisTransformation => "crisis_transformation",
            Theme::Custom(label) => label,
        }
    }

    /// Human-readable title, used in prompts.
    pub fn title(&self) -> String {
        match self {
            Theme::Custom(label) => label.replace('_', " "),
            _ => self
                .label()
                .split('_')
                .map(|w| {
                    if w == "and" || w == "under" {
                        return w.to_string();
                    }
                    let mut c = w.chars();
                    c.next()
                        .map(|first| first.to_uppercase().chain(c).collect())
                        .unwrap_or_default()
                })
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

impl From<String> for Theme {
    fn from(s: String) -> Self {
        Theme::TAXONOMY
            .iter()
            .find(|t| t.label() == s)
            .cloned()
            .unwrap_or(Theme::Custom(s))
    }
}

impl From<Theme> for String {
    fn from(t: Theme) -> Self {
        t.label().to_string()
    }
}

/// One conditional heuristic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axiom {
    pub id: String,
    pub strategist: Strategist,
    pub tradition: Tradition,
    pub precondition: String,
    pub prescription: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<Theme>,
}

impl Axiom {
    /// Canonical conditional sentence: `If {precondition}, then {prescription}.`
    pub fn full_text(&self) -> String {
        render_full_text(&self.precondition, &self.prescription)
    }

    fn check(&self, custom_themes: &BTreeSet<String>) -> Result<(), String> {
        if !is_valid_id(&self.id) {
            return Err("id must be non-empty and use only [A-Za-z0-9_.-]".into());
        }
        for (field, clause) in [
            ("precondition", &self.precondition),
            ("prescription", &self.prescription),
        ] {
            if clause.trim().is_empty() {
                return Err(format!("empty {field}"));
            }
            if clause.trim() != clause {
                return Err(format!("{field} has leading or trailing whitespace"));
            }
        }
        if self.prescription.ends_with(['.', '!', '?']) {
            return Err("prescription must not end with terminal punctuation".into());
        }
        if let Some(implied) = self.strategist.implied_tradition() {
            if implied != self.tradition {
                return Err(format!(
                    "strategist {} belongs to tradition {implied}, not {}",
                    self.strategist, self.tradition
                ));
            }
        }
        for tag in &self.tags {
            if !is_valid_tag(tag) {
                return Err(format!("invalid tag {tag:?}"));
            }
        }
        if let Some(Theme::Custom(label)) = &self.theme {
            if !custom_themes.contains(label) {
                return Err(format!(
                    "theme {label:?} is neither a taxonomy theme nor registered in custom_themes"
                ));
            }
        }
        Ok(())
    }
}

/// Render the canonical conditional sentence for a precondition/prescription pair.
pub fn render_full_text(precondition: &str, prescription: &str) -> String {
    format!("If {precondition}, then {prescription}.")
}

fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn is_valid_tag(tag: &str) -> bool {
    !tag.is_empty()
        && tag
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '_' | '-'))
}

/// Where a library's axioms came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub origin: String,
    pub sha256: String,
    pub records: usize,
}

/// On-disk document shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomDocument {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub custom_themes: Vec<String>,
    pub axioms: Vec<Axiom>,
}

fn default_format() -> String {
    AXIOM_FORMAT.to_string()
}

/// Selection predicate for [`AxiomLibrary::filter`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomFilter {
    Strategist(Strategist),
    Tradition(Tradition),
    Tag(String),
}

impl AxiomFilter {
    pub fn tag(label: &str) -> Result<Self, LibraryError> {
        if is_valid_tag(label) {
            Ok(AxiomFilter::Tag(label.to_string()))
        } else {
            Err(LibraryError::InvalidTag(label.to_string()))
        }
    }

    pub fn matches(&self, axiom: &Axiom) -> bool {
        match self {
            AxiomFilter::Strategist(s) => &axiom.strategist == s,
            AxiomFilter::Tradition(t) => &axiom.tradition == t,
            AxiomFilter::Tag(tag) => axiom.tags.iter().any(|t| t == tag),
        }
    }
}

impl FromStr for AxiomFilter {
    type Err = LibraryError;

    /// Parses `strategist=<name>`, `tradition=<name>` or `tag=<label>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| LibraryError::InvalidFilter(s.to_string()))?;
        match key.trim() {
            "strategist" => Ok(AxiomFilter::Strategist(value.trim().parse()?)),
            "tradition" => Ok(AxiomFilter::Tradition(value.trim().parse()?)),
            "tag" => AxiomFilter::tag(value.trim()),
            _ => Err(LibraryError::InvalidFilter(s.to_string())),
        }
    }
}

/// Validated, id-ordered collection of axioms. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomLibrary {
    axioms: Vec<Axiom>,
    custom_themes: BTreeSet<String>,
    source_manifest: Vec<SourceRecord>,
}

impl AxiomLibrary {
    pub fn empty() -> Self {
        Self {
            axioms: Vec::new(),
            custom_themes: BTreeSet::new(),
            source_manifest: Vec::new(),
        }
    }

    /// Build a library from in-memory axioms, applying every load-time check.
    pub fn from_axioms(
        axioms: Vec<Axiom>,
        custom_themes: impl IntoIterator<Item = String>,
    ) -> Result<Self, LibraryError> {
        let custom_themes: BTreeSet<String> = custom_themes.into_iter().collect();
        for (index, axiom) in axioms.iter().enumerate() {
            axiom
                .check(&custom_themes)
                .map_err(|reason| LibraryError::InvalidRecord {
                    index,
                    id: axiom.id.clone(),
                    reason,
                })?;
        }
        let mut indexed: Vec<(usize, Axiom)> = axioms.into_iter().enumerate().collect();
        indexed.sort_by(|a, b| a.1.id.cmp(&b.1.id).then(a.0.cmp(&b.0)));
        for pair in indexed.windows(2) {
            if pair[0].1.id == pair[1].1.id {
                return Err(LibraryError::DuplicateId {
                    id: pair[0].1.id.clone(),
                    first: pair[0].0,
                    second: pair[1].0,
                });
            }
        }
        Ok(Self {
            axioms: indexed.into_iter().map(|(_, a)| a).collect(),
            custom_themes,
            source_manifest: Vec::new(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LibraryError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LibraryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Parse a library document. `origin` names the source in errors and in
    /// the manifest.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, LibraryError> {
        let doc: AxiomDocument = serde_json::from_str(text).map_err(|e| LibraryError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.format != AXIOM_FORMAT {
            return Err(LibraryError::Format(doc.format));
        }
        let records = doc.axioms.len();
        let mut lib = Self::from_axioms(doc.axioms, doc.custom_themes)?;
        lib.source_manifest.push(SourceRecord {
            origin: origin.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            records,
        });
        Ok(lib)
    }

    /// The starter corpus: eight Roger Martin axioms used in the Meta vs. FTC
    /// case plus one axiom each from Machiavelli, Liddell Hart, Sun Tzu and
    /// Clausewitz.
    pub fn bundled_meta_case() -> Self {
        Self::from_json_str(BUNDLED_META_CASE, "bundled:meta_case_axioms.json")
            .expect("bundled corpus is valid")
    }

    pub fn to_document(&self) -> AxiomDocument {
        AxiomDocument {
            format: AXIOM_FORMAT.to_string(),
            custom_themes: self.custom_themes.iter().cloned().collect(),
            axioms: self.axioms.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("axioms serialize")
    }

    /// Subset matching `by`, preserving order. The manifest is carried over.
    pub fn filter(&self, by: &AxiomFilter) -> AxiomLibrary {
        AxiomLibrary {
            axioms: self
                .axioms
                .iter()
                .filter(|a| by.matches(a))
                .cloned()
                .collect(),
            custom_themes: self.custom_themes.clone(),
            source_manifest: self.source_manifest.clone(),
        }
    }

    /// Subset with exactly the given ids, in library order.
    pub fn select_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<AxiomLibrary, LibraryError> {
        for id in ids {
            if self.get(id.as_ref()).is_none() {
                return Err(LibraryError::UnknownId(id.as_ref().to_string()));
            }
        }
        Ok(AxiomLibrary {
            axioms: self
                .axioms
                .iter()
                .filter(|a| ids.iter().any(|id| id.as_ref() == a.id))
                .cloned()
                .collect(),
            custom_themes: self.custom_themes.clone(),
            source_manifest: self.source_manifest.clone(),
        })
    }

    pub fn get(&self, id: &str) -> Option<&Axiom> {
        self.axioms
            .binary_search_by(|a| a.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.axioms[i])
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Axiom> {
        self.axioms.iter()
    }

    pub fn ids(&self) -> Vec<String> {
        self.axioms.iter().map(|a| a.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn source_manifest(&self) -> &[SourceRecord] {
        &self.source_manifest
    }

    pub fn custom_themes(&self) -> impl Iterator<Item = &str> {
        self.custom_themes.iter().map(String::as_str)
    }
}

impl<'a> IntoIterator for &'a AxiomLibrary {
    type Item = &'a Axiom;
    type IntoIter = std::slice::Iter<'a, Axiom>;
    fn into_iter(self) -> Self::IntoIter {
        self.axioms.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axiom(id: &str, pre: &str, post: &str) -> Axiom {
        Axiom {
            id: id.into(),
            strategist: Strategist::Martin,
            tradition: Tradition::Corporate,
            precondition: pre.into(),
            prescription: post.into(),
            tags: vec![],
            theme: None,
        }
    }

    #[test]
    fn renders_conditional_sentence() {
        let a = axiom(
            "x",
            "your position is uncertain",
            "delay to gather advantage",
        );
        assert_eq!(
            a.full_text(),
            "If your position is uncertain, then delay to gather advantage."
        );
        assert_eq!(render_full_text("X", "Y"), "If X, then Y.");
        assert_eq!(a.full_text(), a.full_text());
    }

    #[test]
    fn bundled_corpus_contents() {
        let lib = AxiomLibrary::bundled_meta_case();
        assert_eq!(lib.len(), 12);
        let martin = lib.filter(&"strategist=martin".parse().unwrap());
        assert_eq!(
            martin.ids(),
            ["m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8"]
        );
        assert_eq!(
            lib.get("m1").unwrap().full_text(),
            "If a competitor gains strength, then reposition your advantage."
        );
        let classical = lib.filter(&AxiomFilter::Tradition(Tradition::MilitaryPolitical));
        assert_eq!(classical.len(), 4);
        assert_eq!(
            lib.get("machiavelli_1").unwrap().full_text(),
            "If your position is uncertain, then delay to gather advantage."
        );
    }

    #[test]
    fn empty_document_is_valid() {
        let lib = AxiomLibrary::from_json_str(r#"{"axioms": []}"#, "mem").unwrap();
        assert!(lib.is_empty());
        assert_eq!(lib.source_manifest()[0].records, 0);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = AxiomLibrary::from_axioms(
            vec![
                axiom("m1", "a", "b"),
                axiom("m2", "c", "d"),
                axiom("m1", "e", "f"),
            ],
            [],
        )
        .unwrap_err();
        match err {
            LibraryError::DuplicateId { id, first, second } => {
                assert_eq!(id, "m1");
                assert_eq!((first, second), (0, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_clause_rejected() {
        let err = AxiomLibrary::from_axioms(vec![axiom("m1", "  ", "b")], []).unwrap_err();
        assert!(err.to_string().contains("empty precondition"), "{err}");
        let err = AxiomLibrary::from_axioms(vec![axiom("m1", "a", "")], []).unwrap_err();
        assert!(err.to_string().contains("empty prescription"), "{err}");
    }

    #[test]
    fn parse_error_carries_line() {
        let text = "{\n  \"axioms\": [\n    {\"id\": \"m1\", \"strategist\": \"nobody\"}\n  ]\n}";
        match AxiomLibrary::from_json_str(text, "bad.json").unwrap_err() {
            LibraryError::Parse { origin, line, .. } => {
                assert_eq!(origin, "bad.json");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tradition_must_match_strategist() {
        let mut a = axiom("m1", "a", "b");
        a.tradition = Tradition::MilitaryPolitical;
        assert!(AxiomLibrary::from_axioms(vec![a], []).is_err());
    }

    #[test]
    fn custom_theme_must_be_registered() {
        let mut a = axiom("m1", "a", "b");
        a.theme = Some(Theme::Custom("escalation".into()));
        assert!(AxiomLibrary::from_axioms(vec![a.clone()], []).is_err());
        assert!(AxiomLibrary::from_axioms(vec![a], ["escalation".to_string()]).is_ok());
    }

    #[test]
    fn taxonomy_labels_round_trip() {
        for theme in Theme::TAXONOMY {
            assert_eq!(Theme::from(theme.label().to_string()), theme);
        }
        assert_eq!(Theme::TimingAndTempo.title(), "Timing and Tempo");
    }

    #[test]
    fn filter_errors_and_absent_tag() {
        assert!(matches!(
            "strategist=napoleon".parse::<AxiomFilter>(),
            Err(LibraryError::UnknownStrategist(_))
        ));
        assert!(matches!(
            "tag=Not A Tag".parse::<AxiomFilter>(),
            Err(LibraryError::InvalidTag(_))
        ));
        assert!("colour=red".parse::<AxiomFilter>().is_err());
        let lib = AxiomLibrary::bundled_meta_case();
        assert!(lib.filter(&"tag=escalation".parse().unwrap()).is_empty());
        assert_eq!(lib.len(), 12, "original untouched");
    }

    #[test]
    fn custom_strategist_round_trip() {
        let s: Strategist = "custom:Porter".parse().unwrap();
        assert_eq!(s, Strategist::Custom("Porter".into()));
        assert_eq!(s.to_string(), "custom:Porter");
        assert!("custom:".parse::<Strategist>().is_err());
    }
}
