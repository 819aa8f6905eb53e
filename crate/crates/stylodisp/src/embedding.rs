//! Embedding acquisition and storage: pluggable providers, a content-hash
//! cache, and a decimal on-disk format that round-trips f64 exactly.
//!
//! The distribution stance mirrors corpora that ship vectors without texts:
//! an imported embedding file is a first-class input for every downstream
//! stage.

use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Corpus;
use crate::matrix::Matrix;
use crate::provider::ProviderError;

pub const EMBEDDING_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("dimension mismatch: document {doc_id:?} has {got} components, expected {expected}")]
    DimensionMismatch { doc_id: String, got: usize, expected: usize },
    #[error("non-finite component in vector for document {doc_id:?}")]
    NonFinite { doc_id: String },
    #[error("duplicate doc_id {0:?} in embedding file")]
    DuplicateDocId(String),
    #[error("line {line}: malformed embedding record: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown schema version {0}")]
    UnknownSchemaVersion(u32),
    #[error("missing header line")]
    MissingHeader,
    #[error("offline mode: cache miss for document {doc_id:?}")]
    OfflineCacheMiss { doc_id: String },
    #[error("provider error: {0}")]
    Provider(#[from] ProviderError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where and how to fetch embeddings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub provider_name: String,
    pub endpoint: String,
    pub model_id: String,
    pub batch_size: usize,
    pub max_in_flight: usize,
}

/// Batch embedding backend. Implementations must be substitutable by
/// deterministic mocks in tests.
pub trait EmbeddingClient: Sync {
    fn embed_batch(&self, model_id: &str, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// One vector per document, in corpus document order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub model_id: String,
    pub dim: usize,
    doc_ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(
        model_id: String,
        doc_ids: Vec<String>,
        vectors: Vec<Vec<f64>>,
    ) -> Result<Self, EmbeddingError> {
        if doc_ids.is_empty() {
            return Err(EmbeddingError::EmptyCorpus);
        }
        assert_eq!(doc_ids.len(), vectors.len(), "ids and vectors must align");
        let dim = vectors[0].len();
        for (id, v) in doc_ids.iter().zip(&vectors) {
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    doc_id: id.clone(),
                    got: v.len(),
                    expected: dim,
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonFinite { doc_id: id.clone() });
            }
        }
        Ok(Self { model_id, dim, doc_ids, vectors })
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.vectors).expect("embedding set entries are finite")
    }
}

/// Content-addressed on-disk cache keyed by SHA-256 of
/// `model_id || 0x00 || NFC(text)`. Writes are temp-then-rename; eviction is
/// manual (delete files).
#[derive(Debug, Clone)]
pub struct EmbeddingCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    vector: Vec<f64>,
    created_at: u64,
}

impl EmbeddingCache {
    pub fn open(dir: &Path) -> Result<Self, EmbeddingError> {
        fs::create_dir_all(dir)
            .map_err(|source| EmbeddingError::Io { path: dir.display().to_string(), source })?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn key(model_id: &str, text: &str) -> String {
        let normalized: String = text.nfc().collect();
        let mut hasher = Sha256::new();
        hasher.update(model_id.as_bytes());
        hasher.update([0u8]);
        hasher.update(normalized.as_bytes());
        hex_encode(&hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, model_id: &str, text: &str) -> Option<Vec<f64>> {
        let path = self.path_for(&Self::key(model_id, text));
        let raw = fs::read_to_string(path).ok()?;
        let entry: CacheEntry = serde_json::from_str(&raw).ok()?;
        Some(entry.vector)
    }

    pub fn put(&self, model_id: &str, text: &str, vector: &[f64]) -> Result<(), EmbeddingError> {
        let key = Self::key(model_id, text);
        let path = self.path_for(&key);
        let parent = path.parent().expect("cache paths have parents");
        fs::create_dir_all(parent)
            .map_err(|source| EmbeddingError::Io { path: parent.display().to_string(), source })?;
        let created_at =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = CacheEntry { key: key.clone(), vector: vector.to_vec(), created_at };
        let tmp = parent.join(format!(".{key}.tmp.{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&entry).expect("cache entry serializes"))
            .map_err(|source| EmbeddingError::Io { path: tmp.display().to_string(), source })?;
        fs::rename(&tmp, &path)
            .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
        Ok(())
    }
}

fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fetches one vector per corpus document, consulting the cache before any
/// provider call and writing it after each successful batch.
///
/// `client = None` means offline: every document must hit the cache or the
/// call fails. Batches are fetched sequentially in corpus order; assembly
/// preserves row order regardless of provider behavior.
pub fn embed_corpus(
    spec: &ProviderSpec,
    corpus: &Corpus,
    client: Option<&dyn EmbeddingClient>,
    cache: &EmbeddingCache,
) -> Result<EmbeddingSet, EmbeddingError> {
    if corpus.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let mut vectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(corpus.len());
    let mut missing: Vec<usize> = Vec::new();
    for (idx, doc) in corpus.documents.iter().enumerate() {
        match cache.get(&spec.model_id, &doc.text) {
            Some(v) => vectors.push(Some(v)),
            None => {
                vectors.push(None);
                missing.push(idx);
            }
        }
    }

    if !missing.is_empty() {
        let client = match client {
            Some(c) => c,
            None => {
                let doc_id = corpus.documents[missing[0]].doc_id.clone();
                return Err(EmbeddingError::OfflineCacheMiss { doc_id });
            }
        };
        let batch_size = spec.batch_size.max(1);
        for batch in missing.chunks(batch_size) {
            let texts: Vec<String> =
                batch.iter().map(|&i| corpus.documents[i].text.clone()).collect();
            let fetched = client.embed_batch(&spec.model_id, &texts)?;
            if fetched.len() != texts.len() {
                return Err(EmbeddingError::Provider(ProviderError::Protocol(format!(
                    "provider returned {} vectors for a batch of {}",
                    fetched.len(),
                    texts.len()
                ))));
            }
            for (&idx, vector) in batch.iter().zip(fetched) {
                cache.put(&spec.model_id, &corpus.documents[idx].text, &vector)?;
                vectors[idx] = Some(vector);
            }
        }
    }

    let doc_ids: Vec<String> = corpus.documents.iter().map(|d| d.doc_id.clone()).collect();
    let vectors: Vec<Vec<f64>> =
        vectors.into_iter().map(|v| v.expect("all rows filled")).collect();
    EmbeddingSet::new(spec.model_id.clone(), doc_ids, vectors)
}

#[derive(Serialize, Deserialize)]
struct EmbeddingHeader {
    schema_version: u32,
    model_id: String,
    dim: usize,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    doc_id: String,
    vector: Vec<f64>,
}

/// f64 as a decimal with 17 significant digits: enough to round-trip any
/// double exactly while staying a plain JSON number.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the set as line-delimited JSON: a header record
/// `{schema_version, model_id, dim}` followed by one `{doc_id, vector}`
/// record per document in row order.
pub fn export_embeddings(set: &EmbeddingSet, path: &Path) -> Result<(), EmbeddingError> {
    let file = fs::File::create(path)
        .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
    let mut w = BufWriter::new(file);
    let header = EmbeddingHeader {
        schema_version: EMBEDDING_SCHEMA_VERSION,
        model_id: set.model_id.clone(),
        dim: set.dim,
    };
    let io_err = |source| EmbeddingError::Io { path: path.display().to_string(), source };
    writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes"))
        .map_err(io_err)?;
    for (id, vector) in set.doc_ids.iter().zip(&set.vectors) {
        let components: Vec<String> = vector.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(
            w,
            "{{\"doc_id\":{},\"vector\":[{}]}}",
            serde_json::to_string(id).expect("doc id serializes"),
            components.join(",")
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a file produced by [`export_embeddings`] (or any compatible
/// distribution file). `export_embeddings` then `import_embeddings` is the
/// identity on [`EmbeddingSet`].
pub fn import_embeddings(path: &Path) -> Result<EmbeddingSet, EmbeddingError> {
    let raw = fs::read_to_string(path)
        .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
    let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(EmbeddingError::MissingHeader)?;
    let header: EmbeddingHeader = serde_json::from_str(header_line)
        .map_err(|e| EmbeddingError::Malformed { line: 1, message: e.to_string() })?;
    if header.schema_version != EMBEDDING_SCHEMA_VERSION {
        return Err(EmbeddingError::UnknownSchemaVersion(header.schema_version));
    }
    let mut doc_ids = Vec::new();
    let mut vectors = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in lines {
        let row: EmbeddingRow = serde_json::from_str(line)
            .map_err(|e| EmbeddingError::Malformed { line: idx + 1, message: e.to_string() })?;
        if row.vector.len() != header.dim {
            return Err(EmbeddingError::DimensionMismatch {
                doc_id: row.doc_id,
                got: row.vector.len(),
                expected: header.dim,
            });
        }
        if row.vector.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite { doc_id: row.doc_id });
        }
        if !seen.insert(row.doc_id.clone()) {
            return Err(EmbeddingError::DuplicateDocId(row.doc_id));
        }
        doc_ids.push(row.doc_id);
        vectors.push(row.vector);
    }
    EmbeddingSet::new(header.model_id, doc_ids, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CellId, Corpus, Document, Origin};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn tiny_corpus(n: usize) -> Corpus {
        let docs = (0..n)
            .map(|i| Document {
                doc_id: format!("d{i}"),
                language: "fr".into(),
                text: format!("texte numéro {i}"),
                cell: CellId::ALL[i % 4],
                topic_key: format!("t{i}"),
                style_key: format!("s{i}"),
                origin: Origin::Reference,
            })
            .collect();
        Corpus::from_documents(docs)
    }

    /// Returns the i-th basis vector (scaled) for the i-th text seen.
    struct BasisClient {
        dim: usize,
        calls: AtomicUsize,
    }

    impl EmbeddingClient for BasisClient {
        fn embed_batch(
            &self,
            _model: &str,
            texts: &[String],
        ) -> Result<Vec<Vec<f64>>, ProviderError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(texts
                .iter()
                .map(|t| {
                    let mut v = vec![0.0; self.dim];
                    v[t.len() % self.dim] = 1.0 + t.len() as f64;
                    v
                })
                .collect())
        }
    }

    fn spec(model: &str) -> ProviderSpec {
        ProviderSpec {
            provider_name: "mock".into(),
            endpoint: "local".into(),
            model_id: model.into(),
            batch_size: 3,
            max_in_flight: 1,
        }
    }

    #[test]
    fn embed_corpus_shapes_and_cache_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::open(dir.path()).unwrap();
        let corpus = tiny_corpus(8);
        let client = BasisClient { dim: 8, calls: AtomicUsize::new(0) };

        let set = embed_corpus(&spec("m"), &corpus, Some(&client), &cache).unwrap();
        assert_eq!(set.dim, 8);
        assert_eq!(set.len(), 8);
        assert_eq!(set.doc_ids()[0], "d0");
        let first_calls = client.calls.load(Ordering::SeqCst);
        assert!(first_calls > 0);

        // Second identical call: everything served from cache.
        let set2 = embed_corpus(&spec("m"), &corpus, Some(&client), &cache).unwrap();
        assert_eq!(client.calls.load(Ordering::SeqCst), first_calls);
        assert_eq!(set, set2);

        // Offline with a warm cache works; a different model does not.
        let set3 = embed_corpus(&spec("m"), &corpus, None, &cache).unwrap();
        assert_eq!(set, set3);
        assert!(matches!(
            embed_corpus(&spec("other"), &corpus, None, &cache),
            Err(EmbeddingError::OfflineCacheMiss { .. })
        ));
    }

    /// Provider that changes dimension between batches.
    struct RaggedClient;

    impl EmbeddingClient for RaggedClient {
        fn embed_batch(
            &self,
            _model: &str,
            texts: &[String],
        ) -> Result<Vec<Vec<f64>>, ProviderError> {
            // First text of each batch decides its dimension by parity.
            let dim = if texts[0].ends_with(|c: char| (c as u32).is_multiple_of(2)) { 8 } else { 16 };
            Ok(texts.iter().map(|_| vec![0.5; dim]).collect())
        }
    }

    #[test]
    fn dimension_mismatch_across_batches_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::open(dir.path()).unwrap();
        let corpus = tiny_corpus(6);
        let err = embed_corpus(&spec("m"), &corpus, Some(&RaggedClient), &cache).unwrap_err();
        assert!(matches!(err, EmbeddingError::DimensionMismatch { .. }), "got {err:?}");
    }

    #[test]
    fn cache_key_depends_on_normalization_not_representation() {
        // Composed and decomposed forms of "é" share a key.
        assert_eq!(
            EmbeddingCache::key("m", "caf\u{e9}"),
            EmbeddingCache::key("m", "cafe\u{301}")
        );
        assert_ne!(EmbeddingCache::key("m", "café"), EmbeddingCache::key("n", "café"));
    }

    #[test]
    fn export_import_round_trip_is_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        let vectors: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..16).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let ids: Vec<String> = (0..10).map(|i| format!("doc-{i}")).collect();
        let set = EmbeddingSet::new("m".into(), ids, vectors).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.jsonl");
        export_embeddings(&set, &path).unwrap();
        let back = import_embeddings(&path).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn import_rejects_nan_ragged_and_unknown_schema() {
        let dir = tempfile::tempdir().unwrap();

        let p = dir.path().join("nan.jsonl");
        fs::write(
            &p,
            "{\"schema_version\":1,\"model_id\":\"m\",\"dim\":2}\n{\"doc_id\":\"a\",\"vector\":[1.0,NaN]}\n",
        )
        .unwrap();
        // A bare NaN token is not JSON; the record fails as malformed.
        assert!(matches!(
            import_embeddings(&p),
            Err(EmbeddingError::Malformed { line: 2, .. })
        ));

        let p = dir.path().join("ragged.jsonl");
        fs::write(
            &p,
            "{\"schema_version\":1,\"model_id\":\"m\",\"dim\":2}\n{\"doc_id\":\"a\",\"vector\":[1.0]}\n",
        )
        .unwrap();
        match import_embeddings(&p).unwrap_err() {
            EmbeddingError::DimensionMismatch { doc_id, .. } => assert_eq!(doc_id, "a"),
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }

        let p = dir.path().join("schema.jsonl");
        fs::write(&p, "{\"schema_version\":9,\"model_id\":\"m\",\"dim\":2}\n").unwrap();
        assert!(matches!(import_embeddings(&p), Err(EmbeddingError::UnknownSchemaVersion(9))));
    }

    #[test]
    fn distribution_file_without_texts_is_usable_downstream() {
        // Vectors only, no text anywhere: the matrix view feeds reducers.
        let set = EmbeddingSet::new(
            "m".into(),
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let m = set.to_matrix();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_cols(), 2);
    }
}
