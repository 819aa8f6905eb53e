//! Stylometric feature extraction: eight feature groups per document and
//! the ground-frequency evolution table with significance tests.
//!
//! Five groups are plain ratios (function words, letters, numbers,
//! punctuation, TAG). NER is entities per sentence. The two composite
//! groups (indexes, structural) aggregate their subfeatures by corpus-level
//! z-normalization followed by averaging; raw subfeatures are always kept.
//!
//! NER and POS tags come from imported annotations when available. Without
//! them, built-in heuristics fill in (capitalization runs for NER,
//! open-class-by-exclusion for TAG) and the per-document result carries
//! low-confidence flags.

mod syllables;
mod tokenize;
mod wordlists;

pub use syllables::count_syllables;
pub use tokenize::{tokenize, CharCounts, TokenizedDoc};
pub use wordlists::{FunctionWords, WORDLIST_VERSION};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CellId;
use crate::dispersion::Stars;
use crate::stats::{self, StatsError};

#[derive(Debug, Error)]
pub enum StylometryError {
    #[error("empty text")]
    EmptyText,
    #[error("unsupported language code {0:?} (expected \"fr\" or \"en\")")]
    UnsupportedLanguage(String),
    #[error("annotations for {doc_id:?} misaligned: {message}")]
    MisalignedAnnotations { doc_id: String, message: String },
    #[error("line {line}: malformed annotation record: {message}")]
    MalformedAnnotation { line: usize, message: String },
    #[error("cell {cell} has {got} documents; need at least 2")]
    UndersizedCell { cell: CellId, got: usize },
    #[error("cell {0} missing from feature table")]
    MissingCell(CellId),
    #[error("statistics failed: {0}")]
    Stats(#[from] StatsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Fr,
    En,
}

impl Language {
    pub fn from_code(code: &str) -> Result<Self, StylometryError> {
        match code {
            "fr" => Ok(Language::Fr),
            "en" => Ok(Language::En),
            other => Err(StylometryError::UnsupportedLanguage(other.to_string())),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Language::Fr => "fr",
            Language::En => "en",
        }
    }
}

/// The eight feature groups, in report order.
pub const FEATURE_GROUPS: [&str; 8] = [
    "function_words",
    "indexes",
    "letters",
    "ner",
    "numbers",
    "punctuation",
    "structural",
    "tag",
];

/// Raw subfeature values behind the composite groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubFeatures {
    // structural
    pub mean_word_length: f64,
    pub mean_syllables_per_word: f64,
    pub mean_sentence_length: f64,
    // indexes
    pub yules_k: f64,
    pub shannon_entropy: f64,
    pub flesch_kincaid: f64,
}

impl SubFeatures {
    pub fn as_map(&self) -> BTreeMap<&'static str, f64> {
        BTreeMap::from([
            ("mean_word_length", self.mean_word_length),
            ("mean_syllables_per_word", self.mean_syllables_per_word),
            ("mean_sentence_length", self.mean_sentence_length),
            ("yules_k", self.yules_k),
            ("shannon_entropy", self.shannon_entropy),
            ("flesch_kincaid", self.flesch_kincaid),
        ])
    }
}

/// One document's stylometric profile. The `indexes` and `structural`
/// scalars hold raw subfeature means until [`finalize_group_scalars`]
/// replaces them with corpus-level z-score averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleFeatures {
    pub function_words: f64,
    pub indexes: f64,
    pub letters: f64,
    pub ner: f64,
    pub numbers: f64,
    pub punctuation: f64,
    pub structural: f64,
    pub tag: f64,
    pub subfeatures: SubFeatures,
    /// True when the NER value comes from the capitalization heuristic.
    pub ner_low_confidence: bool,
    /// True when the TAG value comes from the wordlist heuristic.
    pub tag_low_confidence: bool,
}

impl StyleFeatures {
    pub fn group(&self, name: &str) -> f64 {
        match name {
            "function_words" => self.function_words,
            "indexes" => self.indexes,
            "letters" => self.letters,
            "ner" => self.ner,
            "numbers" => self.numbers,
            "punctuation" => self.punctuation,
            "structural" => self.structural,
            "tag" => self.tag,
            other => panic!("unknown feature group {other:?}"),
        }
    }
}

/// Imported NER span over token indices: [start_token, end_token).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerSpan {
    pub start_token: usize,
    pub end_token: usize,
    pub label: String,
}

/// Externally produced annotations for one document, aligned to this
/// crate's tokenizer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocAnnotations {
    pub doc_id: String,
    /// One part-of-speech tag per token.
    pub pos_tags: Vec<String>,
    pub ner_spans: Vec<NerSpan>,
    #[serde(default)]
    pub provenance: Option<String>,
}

/// Loads line-delimited annotation records keyed by doc_id.
pub fn load_annotations(path: &Path) -> Result<BTreeMap<String, DocAnnotations>, StylometryError> {
    let raw = fs::read_to_string(path)
        .map_err(|source| StylometryError::Io { path: path.display().to_string(), source })?;
    let mut out = BTreeMap::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ann: DocAnnotations = serde_json::from_str(line).map_err(|e| {
            StylometryError::MalformedAnnotation { line: idx + 1, message: e.to_string() }
        })?;
        out.insert(ann.doc_id.clone(), ann);
    }
    Ok(out)
}

/// POS tags counted into the TAG group.
const OPEN_CLASS_TAGS: [&str; 3] = ["NOUN", "VERB", "ADJ"];

/// Extracts all eight groups for one text. See the module docs for which
/// values are heuristic without annotations.
pub fn extract_features(
    text: &str,
    language: Language,
    function_words: &FunctionWords,
    annotations: Option<&DocAnnotations>,
) -> Result<StyleFeatures, StylometryError> {
    let doc = tokenize(text, language)?;
    let n_tokens = doc.n_tokens().max(1) as f64;
    let n_sentences = doc.n_sentences().max(1) as f64;

    let function_count =
        doc.tokens.iter().filter(|t| function_words.contains(t)).count() as f64;

    let counts = doc.char_counts;
    let total_chars = counts.total.max(1) as f64;

    // Frequency spectrum over lowercased token types.
    let mut type_counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in &doc.tokens {
        *type_counts.entry(t.to_lowercase()).or_insert(0) += 1;
    }
    let n = doc.n_tokens() as f64;
    let mut spectrum: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in type_counts.values() {
        *spectrum.entry(c).or_insert(0) += 1;
    }
    let sum_i2_vi: f64 = spectrum.iter().map(|(&i, &v)| (i * i * v) as f64).sum();
    let yules_k = if n > 0.0 { 1e4 * (sum_i2_vi - n) / (n * n) } else { 0.0 };
    let shannon_entropy: f64 = type_counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();

    let syllable_total: f64 =
        doc.tokens.iter().map(|t| count_syllables(t, language) as f64).sum();
    let flesch_kincaid =
        0.39 * (n_tokens / n_sentences) + 11.8 * (syllable_total / n_tokens) - 15.59;

    let mean_word_length = doc
        .tokens
        .iter()
        .map(|t| t.chars().filter(|c| c.is_alphabetic()).count() as f64)
        .sum::<f64>()
        / n_tokens;
    let mean_syllables_per_word = syllable_total / n_tokens;
    let mean_sentence_length = n_tokens / n_sentences;

    let (ner, ner_low_confidence) = match annotations {
        Some(ann) => {
            validate_alignment(ann, &doc)?;
            (ann.ner_spans.len() as f64 / n_sentences, false)
        }
        None => (heuristic_ner_spans(&doc, function_words) as f64 / n_sentences, true),
    };

    let (tag, tag_low_confidence) = match annotations {
        Some(ann) => {
            let open = ann
                .pos_tags
                .iter()
                .filter(|t| OPEN_CLASS_TAGS.contains(&t.as_str()))
                .count() as f64;
            (open / n_tokens, false)
        }
        None => {
            let open = doc
                .tokens
                .iter()
                .filter(|t| {
                    t.chars().any(|c| c.is_alphabetic()) && !function_words.contains(t)
                })
                .count() as f64;
            (open / n_tokens, true)
        }
    };

    let subfeatures = SubFeatures {
        mean_word_length,
        mean_syllables_per_word,
        mean_sentence_length,
        yules_k,
        shannon_entropy,
        flesch_kincaid,
    };

    Ok(StyleFeatures {
        function_words: function_count / n_tokens,
        // Placeholder raw means; replaced by finalize_group_scalars.
        indexes: (yules_k + shannon_entropy + flesch_kincaid) / 3.0,
        letters: counts.letters as f64 / total_chars,
        ner,
        numbers: counts.digits as f64 / total_chars,
        punctuation: counts.punctuation as f64 / total_chars,
        structural: (mean_word_length + mean_syllables_per_word + mean_sentence_length) / 3.0,
        tag,
        subfeatures,
        ner_low_confidence,
        tag_low_confidence,
    })
}

fn validate_alignment(ann: &DocAnnotations, doc: &TokenizedDoc) -> Result<(), StylometryError> {
    if ann.pos_tags.len() != doc.n_tokens() {
        return Err(StylometryError::MisalignedAnnotations {
            doc_id: ann.doc_id.clone(),
            message: format!(
                "{} pos tags for {} tokens",
                ann.pos_tags.len(),
                doc.n_tokens()
            ),
        });
    }
    for span in &ann.ner_spans {
        if span.start_token >= span.end_token || span.end_token > doc.n_tokens() {
            return Err(StylometryError::MisalignedAnnotations {
                doc_id: ann.doc_id.clone(),
                message: format!(
                    "ner span {}..{} outside {} tokens",
                    span.start_token,
                    span.end_token,
                    doc.n_tokens()
                ),
            });
        }
    }
    Ok(())
}

/// Capitalization heuristic: maximal runs of capitalized non-function
/// tokens, skipping each sentence's first token, count as one entity each.
fn heuristic_ner_spans(doc: &TokenizedDoc, function_words: &FunctionWords) -> usize {
    let mut spans = 0usize;
    for sentence in &doc.sentences {
        let mut in_run = false;
        for (i, token) in sentence.iter().enumerate() {
            let capitalized = i > 0
                && token.chars().next().is_some_and(char::is_uppercase)
                && !function_words.contains(token);
            if capitalized {
                if !in_run {
                    spans += 1;
                }
                in_run = true;
            } else {
                in_run = false;
            }
        }
    }
    spans
}

/// Replaces the `indexes` and `structural` scalars with the average of the
/// corpus-level z-scores of their subfeatures. Zero-variance subfeatures
/// contribute a zero z-score.
pub fn finalize_group_scalars(features: &mut [StyleFeatures]) {
    if features.is_empty() {
        return;
    }
    let z_columns = |values: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        values
            .into_iter()
            .map(|col| {
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let var = if col.len() > 1 {
                    col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                let sd = var.sqrt();
                col.iter()
                    .map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 })
                    .collect()
            })
            .collect()
    };

    let idx_cols = z_columns(vec![
        features.iter().map(|f| f.subfeatures.yules_k).collect(),
        features.iter().map(|f| f.subfeatures.shannon_entropy).collect(),
        features.iter().map(|f| f.subfeatures.flesch_kincaid).collect(),
    ]);
    let str_cols = z_columns(vec![
        features.iter().map(|f| f.subfeatures.mean_word_length).collect(),
        features.iter().map(|f| f.subfeatures.mean_syllables_per_word).collect(),
        features.iter().map(|f| f.subfeatures.mean_sentence_length).collect(),
    ]);
    for (i, f) in features.iter_mut().enumerate() {
        f.indexes = (idx_cols[0][i] + idx_cols[1][i] + idx_cols[2][i]) / 3.0;
        f.structural = (str_cols[0][i] + str_cols[1][i] + str_cols[2][i]) / 3.0;
    }
}

/// Direction of a mean change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arrow {
    Up,
    Down,
    Flat,
}

impl Arrow {
    pub fn from_diff(diff: f64) -> Self {
        if diff > 0.0 {
            Arrow::Up
        } else if diff < 0.0 {
            Arrow::Down
        } else {
            Arrow::Flat
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Arrow::Up => "up",
            Arrow::Down => "down",
            Arrow::Flat => "=",
        }
    }

    pub fn glyph(self) -> &'static str {
        match self {
            Arrow::Up => "↑",
            Arrow::Down => "↓",
            Arrow::Flat => "=",
        }
    }
}

/// One (feature group, comparison) entry of the ground-frequency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundShift {
    pub arrow: Arrow,
    pub p_value: f64,
    pub stars: Stars,
}

impl GroundShift {
    pub fn significant(&self) -> bool {
        self.p_value < 0.05
    }
}

/// Mean feature frequencies for the three cells of interest and the two
/// comparisons out of QUENEAU_GEN, with per-feature significance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundFrequencyTable {
    /// Feature groups in report order.
    pub groups: Vec<String>,
    /// Mean group value per cell, aligned to `groups`.
    pub cell_means: BTreeMap<CellId, Vec<f64>>,
    /// QUENEAU_GEN -> target cell shifts, aligned to `groups`.
    pub comparisons: BTreeMap<CellId, Vec<GroundShift>>,
}

/// The two comparison targets out of QUENEAU_GEN.
pub const GROUND_TARGETS: [CellId; 2] = [CellId::QueneauRef, CellId::FeneonRef];

/// Builds the ground-frequency evolution table. Requires QUENEAU_GEN,
/// QUENEAU_REF and FENEON_REF to each carry at least two documents.
pub fn ground_table(
    per_cell: &BTreeMap<CellId, Vec<StyleFeatures>>,
) -> Result<GroundFrequencyTable, StylometryError> {
    let needed = [CellId::QueneauGen, CellId::QueneauRef, CellId::FeneonRef];
    for cell in needed {
        let features = per_cell.get(&cell).ok_or(StylometryError::MissingCell(cell))?;
        if features.len() < 2 {
            return Err(StylometryError::UndersizedCell { cell, got: features.len() });
        }
    }
    let base = &per_cell[&CellId::QueneauGen];

    let mut cell_means: BTreeMap<CellId, Vec<f64>> = BTreeMap::new();
    for cell in needed {
        let features = &per_cell[&cell];
        let means = FEATURE_GROUPS
            .iter()
            .map(|g| features.iter().map(|f| f.group(g)).sum::<f64>() / features.len() as f64)
            .collect();
        cell_means.insert(cell, means);
    }

    let mut comparisons: BTreeMap<CellId, Vec<GroundShift>> = BTreeMap::new();
    for target in GROUND_TARGETS {
        let target_features = &per_cell[&target];
        let mut shifts = Vec::with_capacity(FEATURE_GROUPS.len());
        for (gi, group) in FEATURE_GROUPS.iter().enumerate() {
            let base_vals: Vec<f64> = base.iter().map(|f| f.group(group)).collect();
            let target_vals: Vec<f64> = target_features.iter().map(|f| f.group(group)).collect();
            let diff = cell_means[&target][gi] - cell_means[&CellId::QueneauGen][gi];
            let p_value = match stats::welch_t(&target_vals, &base_vals) {
                Ok(r) => r.p,
                // Two constant cells at different values: the shift is as
                // certain as it gets.
                Err(StatsError::ZeroVarianceNonzeroDiff) => stats::P_VALUE_FLOOR,
                Err(e) => return Err(e.into()),
            };
            shifts.push(GroundShift {
                arrow: Arrow::from_diff(diff),
                p_value,
                stars: Stars::from_p(p_value),
            });
        }
        comparisons.insert(target, shifts);
    }

    Ok(GroundFrequencyTable {
        groups: FEATURE_GROUPS.iter().map(|s| s.to_string()).collect(),
        cell_means,
        comparisons,
    })
}

/// Character-ratio sanity check used by tests: the three measured classes
/// never exceed the text length.
pub fn char_ratios_consistent(f: &StyleFeatures) -> bool {
    f.letters + f.numbers + f.punctuation <= 1.0 + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn en_fw() -> FunctionWords {
        FunctionWords::builtin(Language::En)
    }

    #[test]
    fn all_distinct_tokens_give_yules_k_zero() {
        let f = extract_features("alpha beta gamma delta", Language::En, &en_fw(), None).unwrap();
        assert!(f.subfeatures.yules_k.abs() < 1e-12);
    }

    #[test]
    fn four_equal_tokens_give_two_bits_of_entropy() {
        let f = extract_features("red blue green lime", Language::En, &en_fw(), None).unwrap();
        assert!((f.subfeatures.shannon_entropy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn yules_k_hand_value() {
        // "a a b": N = 3, V1 = 1, V2 = 1; K = 1e4 * (1 + 4 - 3) / 9.
        let f = extract_features("a a b", Language::En, &en_fw(), None).unwrap();
        assert!((f.subfeatures.yules_k - 1e4 * 2.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn flesch_kincaid_ten_words_fifteen_syllables() {
        // One sentence; monosyllables plus five two-syllable words under the
        // vowel-group rule: 10 words, 15 syllables.
        // 0.39 * 10 + 11.8 * 1.5 - 15.59 = 6.01.
        let text = "the yellow kitten sat on a little rug today okay.";
        let f = extract_features(text, Language::En, &en_fw(), None).unwrap();
        assert_eq!(tokenize(text, Language::En).unwrap().n_tokens(), 10);
        assert!((f.subfeatures.flesch_kincaid - 6.01).abs() < 1e-9);
    }

    #[test]
    fn character_ratios_lie_in_range_and_sum_consistently() {
        let f = extract_features("Voici 12 pommes, et 3 poires !", Language::Fr, &FunctionWords::builtin(Language::Fr), None)
            .unwrap();
        for v in [f.function_words, f.letters, f.numbers, f.punctuation, f.tag] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(f.ner >= 0.0);
        assert!(char_ratios_consistent(&f));
    }

    #[test]
    fn text_duplication_leaves_ratio_features_unchanged() {
        let text = "The cat sat on the mat. A dog barked twice! ";
        let double = format!("{text}{text}");
        let a = extract_features(text, Language::En, &en_fw(), None).unwrap();
        let b = extract_features(&double, Language::En, &en_fw(), None).unwrap();
        assert!((a.function_words - b.function_words).abs() < 1e-12);
        assert!((a.letters - b.letters).abs() < 1e-9);
        assert!((a.numbers - b.numbers).abs() < 1e-9);
        assert!((a.punctuation - b.punctuation).abs() < 1e-9);
        assert!((a.tag - b.tag).abs() < 1e-12);
    }

    #[test]
    fn yules_k_depends_only_on_the_spectrum() {
        // Same frequency spectrum {2,1}, different labels.
        let a = extract_features("x x y", Language::En, &en_fw(), None).unwrap();
        let b = extract_features("q q z", Language::En, &en_fw(), None).unwrap();
        assert!((a.subfeatures.yules_k - b.subfeatures.yules_k).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_log_vocab() {
        let f = extract_features("one two two three three three", Language::En, &en_fw(), None)
            .unwrap();
        assert!(f.subfeatures.shannon_entropy <= 3.0_f64.log2() + 1e-12);
    }

    #[test]
    fn extraction_is_deterministic() {
        let text = "Un texte, deux phrases. Et voilà !";
        let fw = FunctionWords::builtin(Language::Fr);
        let a = extract_features(text, Language::Fr, &fw, None).unwrap();
        let b = extract_features(text, Language::Fr, &fw, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn annotations_override_heuristics_and_misalignment_errors() {
        let text = "Paris is big. Marie Curie lived there.";
        let doc = tokenize(text, Language::En).unwrap();
        assert_eq!(doc.n_tokens(), 7);
        let ann = DocAnnotations {
            doc_id: "d".into(),
            pos_tags: vec![
                "PROPN".into(),
                "VERB".into(),
                "ADJ".into(),
                "PROPN".into(),
                "PROPN".into(),
                "VERB".into(),
                "ADV".into(),
            ],
            ner_spans: vec![
                NerSpan { start_token: 0, end_token: 1, label: "LOC".into() },
                NerSpan { start_token: 3, end_token: 5, label: "PER".into() },
            ],
            provenance: Some("external tagger".into()),
        };
        let f = extract_features(text, Language::En, &en_fw(), Some(&ann)).unwrap();
        assert!(!f.ner_low_confidence);
        assert!(!f.tag_low_confidence);
        assert_eq!(f.ner, 2.0 / 2.0);
        // VERB, ADJ, VERB are open-class; PROPN and ADV are not counted.
        assert_eq!(f.tag, 3.0 / 7.0);

        let bad = DocAnnotations { pos_tags: vec!["NOUN".into()], ..ann };
        assert!(matches!(
            extract_features(text, Language::En, &en_fw(), Some(&bad)),
            Err(StylometryError::MisalignedAnnotations { .. })
        ));
    }

    #[test]
    fn heuristic_ner_counts_capitalized_runs() {
        let text = "Yesterday Marie Curie met Paul in Paris.";
        let f = extract_features(text, Language::En, &en_fw(), None).unwrap();
        assert!(f.ner_low_confidence);
        // "Marie Curie", "Paul", "Paris": three runs, one sentence.
        assert_eq!(f.ner, 3.0);
    }

    #[test]
    fn zscore_finalization_centers_groups() {
        let fw = en_fw();
        let texts = [
            "Short words here now.",
            "Considerably lengthier vocabulary demonstrates complexity throughout.",
            "Middle ground sentences carry ordinary words mostly.",
        ];
        let mut features: Vec<StyleFeatures> =
            texts.iter().map(|t| extract_features(t, Language::En, &fw, None).unwrap()).collect();
        finalize_group_scalars(&mut features);
        let mean_idx: f64 = features.iter().map(|f| f.indexes).sum::<f64>() / 3.0;
        let mean_str: f64 = features.iter().map(|f| f.structural).sum::<f64>() / 3.0;
        assert!(mean_idx.abs() < 1e-12);
        assert!(mean_str.abs() < 1e-12);
    }

    fn planted_features(mean_fw: f64, n: usize, seed: u64) -> Vec<StyleFeatures> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut noise = || rng.gen_range(-0.02..0.02);
                StyleFeatures {
                    function_words: (mean_fw + noise()).clamp(0.0, 1.0),
                    indexes: noise(),
                    letters: 0.8 + noise() * 0.1,
                    ner: 1.0 + noise(),
                    numbers: 0.01,
                    punctuation: 0.05 + noise() * 0.1,
                    structural: noise(),
                    tag: 0.4 + noise(),
                    subfeatures: SubFeatures {
                        mean_word_length: 4.0,
                        mean_syllables_per_word: 1.5,
                        mean_sentence_length: 10.0,
                        yules_k: 100.0,
                        shannon_entropy: 5.0,
                        flesch_kincaid: 6.0,
                    },
                    ner_low_confidence: true,
                    tag_low_confidence: true,
                }
            })
            .collect()
    }

    #[test]
    fn ground_table_detects_planted_shift() {
        // +3 sigma shift in function words from QUENEAU_GEN to QUENEAU_REF
        // must come out as a starred up-arrow at n = 73.
        let mut per_cell = BTreeMap::new();
        per_cell.insert(CellId::QueneauGen, planted_features(0.40, 73, 1));
        per_cell.insert(CellId::QueneauRef, planted_features(0.46, 73, 2));
        per_cell.insert(CellId::FeneonRef, planted_features(0.40, 73, 3));
        let table = ground_table(&per_cell).unwrap();
        let fw_idx = 0; // function_words is first in FEATURE_GROUPS
        let shift = table.comparisons[&CellId::QueneauRef][fw_idx];
        assert_eq!(shift.arrow, Arrow::Up);
        assert_eq!(shift.stars, Stars::Two);
        assert!(shift.significant());
    }

    #[test]
    fn ground_table_identical_cells_flat_with_p_one() {
        let shared = planted_features(0.4, 10, 5);
        let mut per_cell = BTreeMap::new();
        per_cell.insert(CellId::QueneauGen, shared.clone());
        per_cell.insert(CellId::QueneauRef, shared.clone());
        per_cell.insert(CellId::FeneonRef, shared);
        let table = ground_table(&per_cell).unwrap();
        for shift in &table.comparisons[&CellId::QueneauRef] {
            assert_eq!(shift.arrow, Arrow::Flat);
            assert_eq!(shift.p_value, 1.0);
            assert_eq!(shift.stars, Stars::None);
        }
    }

    #[test]
    fn ground_table_undersized_cell_rejected() {
        let mut per_cell = BTreeMap::new();
        per_cell.insert(CellId::QueneauGen, planted_features(0.4, 1, 1));
        per_cell.insert(CellId::QueneauRef, planted_features(0.4, 5, 2));
        per_cell.insert(CellId::FeneonRef, planted_features(0.4, 5, 3));
        assert!(matches!(
            ground_table(&per_cell),
            Err(StylometryError::UndersizedCell { cell: CellId::QueneauGen, got: 1 })
        ));
    }

    #[test]
    fn annotation_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.jsonl");
        let line = r#"{"doc_id":"a","pos_tags":["NOUN","VERB"],"ner_spans":[{"start_token":0,"end_token":1,"label":"PER"}]}"#;
        std::fs::write(&path, format!("{line}\n")).unwrap();
        let map = load_annotations(&path).unwrap();
        assert_eq!(map["a"].pos_tags.len(), 2);
        assert_eq!(map["a"].ner_spans[0].label, "PER");
        assert_eq!(map["a"].provenance, None);
    }
}
