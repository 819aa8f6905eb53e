//! The 2x2 corpus data model: four cells crossing topic mode with style mode,
//! line-delimited manifest ingestion, and design validation.
//!
//! Document order in a [`Corpus`] is load order and defines row order for
//! every downstream matrix; nothing in this crate reorders documents.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no documents in manifest")]
    NoDocuments,
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("line {line}: duplicate doc_id {doc_id:?}")]
    DuplicateDocId { line: usize, doc_id: String },
    #[error("line {line}: unknown cell label {label:?} (expected one of QUENEAU_REF, FENEON_REF, QUENEAU_GEN, FENEON_GEN)")]
    UnknownCell { line: usize, label: String },
    #[error("line {line}: document {doc_id:?} has empty text")]
    EmptyText { line: usize, doc_id: String },
    #[error("language {0:?} absent from corpus")]
    LanguageAbsent(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Whether a design axis is held constant or varied across a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    Fixed,
    Varied,
}

/// One of the four corpus cells. Topic mode crosses style mode:
///
/// | cell          | topic  | style  |
/// |---------------|--------|--------|
/// | `QUENEAU_REF` | fixed  | varied |
/// | `FENEON_REF`  | varied | fixed  |
/// | `QUENEAU_GEN` | fixed  | fixed  |
/// | `FENEON_GEN`  | varied | varied |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellId {
    #[serde(rename = "QUENEAU_REF")]
    QueneauRef,
    #[serde(rename = "FENEON_REF")]
    FeneonRef,
    #[serde(rename = "QUENEAU_GEN")]
    QueneauGen,
    #[serde(rename = "FENEON_GEN")]
    FeneonGen,
}

impl CellId {
    pub const ALL: [CellId; 4] =
        [CellId::QueneauRef, CellId::FeneonRef, CellId::QueneauGen, CellId::FeneonGen];

    pub fn topic_mode(self) -> Mode {
        match self {
            CellId::QueneauRef | CellId::QueneauGen => Mode::Fixed,
            CellId::FeneonRef | CellId::FeneonGen => Mode::Varied,
        }
    }

    pub fn style_mode(self) -> Mode {
        match self {
            CellId::FeneonRef | CellId::QueneauGen => Mode::Fixed,
            CellId::QueneauRef | CellId::FeneonGen => Mode::Varied,
        }
    }

    /// Symbolic label used in manifests and report tables.
    pub fn label(self) -> &'static str {
        match self {
            CellId::QueneauRef => "QUENEAU_REF",
            CellId::FeneonRef => "FENEON_REF",
            CellId::QueneauGen => "QUENEAU_GEN",
            CellId::FeneonGen => "FENEON_GEN",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "QUENEAU_REF" => Some(CellId::QueneauRef),
            "FENEON_REF" => Some(CellId::FeneonRef),
            "QUENEAU_GEN" => Some(CellId::QueneauGen),
            "FENEON_GEN" => Some(CellId::FeneonGen),
            _ => None,
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Reference,
    Generated,
}

/// A single text with its design coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// ISO-639-1 code, e.g. "fr" or "en".
    pub language: String,
    pub text: String,
    pub cell: CellId,
    /// Story identifier; shared across a whole cell when topic mode is fixed.
    pub topic_key: String,
    /// Style identifier; shared across a whole cell when style mode is fixed.
    pub style_key: String,
    pub origin: Origin,
}

/// An ordered document collection. Order is manifest order and is the row
/// order of every matrix derived from this corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub languages: BTreeSet<String>,
}

/// Outcome of validating the 2x2 design for one language.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub language: String,
    pub per_cell_counts: BTreeMap<CellId, usize>,
    /// True iff all four cell counts for this language are equal.
    pub balanced: bool,
    /// True iff generated cells pair back onto the reference cells: every
    /// FENEON_GEN style_key matches some QUENEAU_REF style_key and every
    /// QUENEAU_GEN topic_key equals the topic_key shared by QUENEAU_REF.
    pub pairing_complete: bool,
    pub issues: Vec<String>,
}

/// Manifest line as serialized; `cell` stays a free string so that unknown
/// labels are reported with their line number instead of failing opaquely.
#[derive(Debug, Serialize, Deserialize)]
struct ManifestRecord {
    doc_id: String,
    language: String,
    text: String,
    cell: String,
    topic_key: String,
    style_key: String,
    origin: Origin,
}

impl Corpus {
    pub fn from_documents(documents: Vec<Document>) -> Self {
        let languages = documents.iter().map(|d| d.language.clone()).collect();
        Self { documents, languages }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Sub-corpus of one language, original order preserved.
    pub fn filter_language(&self, language: &str) -> Corpus {
        Corpus::from_documents(
            self.documents.iter().filter(|d| d.language == language).cloned().collect(),
        )
    }
}

/// Parses a line-delimited manifest: one JSON object per line with fields
/// `doc_id`, `language`, `text`, `cell`, `topic_key`, `style_key`, `origin`.
/// Unknown extra fields are ignored. Text is normalized to Unicode NFC; case
/// and punctuation are preserved since stylometry measures both.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    let raw = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_manifest(&raw)
}

/// Same as [`load_manifest`] but over in-memory text.
pub fn parse_manifest(raw: &str) -> Result<Corpus, CorpusError> {
    let mut documents = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(line).map_err(|e| {
            CorpusError::MalformedRecord { line: line_no, message: e.to_string() }
        })?;
        let cell = CellId::from_label(&record.cell)
            .ok_or_else(|| CorpusError::UnknownCell { line: line_no, label: record.cell.clone() })?;
        let text: String = record.text.nfc().collect();
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText { line: line_no, doc_id: record.doc_id });
        }
        if !seen_ids.insert(record.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId { line: line_no, doc_id: record.doc_id });
        }
        documents.push(Document {
            doc_id: record.doc_id,
            language: record.language,
            text,
            cell,
            topic_key: record.topic_key,
            style_key: record.style_key,
            origin: record.origin,
        });
    }
    if documents.is_empty() {
        return Err(CorpusError::NoDocuments);
    }
    Ok(Corpus::from_documents(documents))
}

/// Writes the manifest back out, one JSON object per line in document order.
/// `load_manifest` of the result reproduces the corpus field-by-field.
pub fn save_manifest(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let file = fs::File::create(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    let mut w = BufWriter::new(file);
    for doc in &corpus.documents {
        let record = ManifestRecord {
            doc_id: doc.doc_id.clone(),
            language: doc.language.clone(),
            text: doc.text.clone(),
            cell: doc.cell.label().to_string(),
            topic_key: doc.topic_key.clone(),
            style_key: doc.style_key.clone(),
            origin: doc.origin,
        };
        let line = serde_json::to_string(&record).expect("manifest record serializes");
        writeln!(w, "{line}")
            .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    }
    w.flush().map_err(|source| CorpusError::Io { path: path.display().to_string(), source })
}

/// Checks the 2x2 design for one language: cell counts, balance, key sharing
/// within fixed-mode cells, and generated-to-reference pairing.
///
/// Unbalanced designs are reported, not rejected; downstream tests tolerate
/// unequal cell sizes.
pub fn validate_design(corpus: &Corpus, language: &str) -> Result<DesignReport, CorpusError> {
    let docs: Vec<&Document> =
        corpus.documents.iter().filter(|d| d.language == language).collect();
    if docs.is_empty() {
        return Err(CorpusError::LanguageAbsent(language.to_string()));
    }

    let mut per_cell_counts: BTreeMap<CellId, usize> = BTreeMap::new();
    for cell in CellId::ALL {
        per_cell_counts.insert(cell, 0);
    }
    for doc in &docs {
        *per_cell_counts.get_mut(&doc.cell).expect("all cells present") += 1;
    }

    let mut issues = Vec::new();
    let counts: Vec<usize> = CellId::ALL.iter().map(|c| per_cell_counts[c]).collect();
    let balanced = counts.iter().all(|&c| c == counts[0]);
    if !balanced {
        let detail: Vec<String> =
            CellId::ALL.iter().map(|c| format!("{}={}", c.label(), per_cell_counts[c])).collect();
        issues.push(format!("unequal cell counts: {}", detail.join(", ")));
    }
    for cell in CellId::ALL {
        if per_cell_counts[&cell] == 0 {
            issues.push(format!("empty cell {}", cell.label()));
        }
    }

    // Fixed-mode cells must share a single key.
    for cell in CellId::ALL {
        let members: Vec<&&Document> = docs.iter().filter(|d| d.cell == cell).collect();
        if members.is_empty() {
            continue;
        }
        if cell.topic_mode() == Mode::Fixed {
            let keys: BTreeSet<&str> = members.iter().map(|d| d.topic_key.as_str()).collect();
            if keys.len() > 1 {
                issues.push(format!(
                    "cell {} has {} distinct topic_keys but topic mode is fixed",
                    cell.label(),
                    keys.len()
                ));
            }
        }
        if cell.style_mode() == Mode::Fixed {
            let keys: BTreeSet<&str> = members.iter().map(|d| d.style_key.as_str()).collect();
            if keys.len() > 1 {
                issues.push(format!(
                    "cell {} has {} distinct style_keys but style mode is fixed",
                    cell.label(),
                    keys.len()
                ));
            }
        }
    }

    // Pairing: FENEON_GEN styles must come from QUENEAU_REF, QUENEAU_GEN
    // topics must be the shared QUENEAU_REF topic.
    let mut pairing_complete = true;
    let queneau_ref_styles: BTreeSet<&str> = docs
        .iter()
        .filter(|d| d.cell == CellId::QueneauRef)
        .map(|d| d.style_key.as_str())
        .collect();
    let shared_topic: Option<&str> = docs
        .iter()
        .find(|d| d.cell == CellId::QueneauRef)
        .map(|d| d.topic_key.as_str());

    for cell in CellId::ALL {
        if per_cell_counts[&cell] == 0 {
            pairing_complete = false;
        }
    }
    for doc in &docs {
        match doc.cell {
            CellId::FeneonGen => {
                if !queneau_ref_styles.contains(doc.style_key.as_str()) {
                    pairing_complete = false;
                    issues.push(format!(
                        "FENEON_GEN doc {:?} style_key {:?} matches no QUENEAU_REF style",
                        doc.doc_id, doc.style_key
                    ));
                }
            }
            CellId::QueneauGen if shared_topic != Some(doc.topic_key.as_str()) => {
                pairing_complete = false;
                issues.push(format!(
                    "QUENEAU_GEN doc {:?} topic_key {:?} differs from the shared topic",
                    doc.doc_id, doc.topic_key
                ));
            }
            _ => {}
        }
    }

    Ok(DesignReport {
        language: language.to_string(),
        per_cell_counts,
        balanced,
        pairing_complete,
        issues,
    })
}

/// Documents of one (cell, language), original order preserved. An empty
/// result is valid.
pub fn select_cell<'a>(corpus: &'a Corpus, cell: CellId, language: &str) -> Vec<&'a Document> {
    corpus
        .documents
        .iter()
        .filter(|d| d.cell == cell && d.language == language)
        .collect()
}
