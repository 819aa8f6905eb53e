//! Prompt rendering and corpus synthesis: drives a chat-completion provider
//! to rewrite the reference cells into the two generated cells.
//!
//! QUENEAU_GEN rewrites each QUENEAU_REF story into the uniform target
//! style; FENEON_GEN rewrites each FENEON_REF story into one of the
//! QUENEAU_REF styles, paired by list position (story i takes style i).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CellId, Corpus, Document, Origin};
use crate::provider::{with_retries, ProviderError, RetryPolicy};

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("template requires an exemplar text")]
    ExemplarRequired,
    #[error("template takes no exemplar text")]
    ExemplarForbidden,
    #[error("empty source text")]
    EmptySource,
    #[error("cell {0} is not a generated cell")]
    NotAGeneratedCell(CellId),
    #[error("source cell {0} is empty for language {1:?}")]
    EmptySourceCell(CellId, String),
    #[error("pairing needs equal cell sizes: {stories} stories vs {styles} styles")]
    UnequalPairing { stories: usize, styles: usize },
    #[error("no template for language {0:?}")]
    UnsupportedLanguage(String),
    #[error(
        "provider failed on {doc_id:?} after {attempts} attempts ({partial} of {total} documents \
         generated): {source}"
    )]
    ProviderExhausted {
        doc_id: String,
        attempts: u32,
        partial: usize,
        total: usize,
        #[source]
        source: ProviderError,
    },
}

/// The four fixed prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PromptTemplate {
    QueneauGenFr,
    QueneauGenEn,
    FeneonGenFr,
    FeneonGenEn,
}

impl PromptTemplate {
    pub fn for_cell(cell: CellId, language: &str) -> Result<Self, GenerationError> {
        match (cell, language) {
            (CellId::QueneauGen, "fr") => Ok(PromptTemplate::QueneauGenFr),
            (CellId::QueneauGen, "en") => Ok(PromptTemplate::QueneauGenEn),
            (CellId::FeneonGen, "fr") => Ok(PromptTemplate::FeneonGenFr),
            (CellId::FeneonGen, "en") => Ok(PromptTemplate::FeneonGenEn),
            (CellId::QueneauGen | CellId::FeneonGen, other) => {
                Err(GenerationError::UnsupportedLanguage(other.to_string()))
            }
            (other, _) => Err(GenerationError::NotAGeneratedCell(other)),
        }
    }

    pub fn needs_exemplar(self) -> bool {
        matches!(self, PromptTemplate::FeneonGenFr | PromptTemplate::FeneonGenEn)
    }
}

/// Sampling and retry settings for one generation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Total attempts allowed per document; zero means fail immediately.
    pub retry_budget: u32,
    #[serde(default)]
    pub backoff: RetryPolicy,
    /// Concurrent in-flight requests.
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_in_flight() -> usize {
    1
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            model_name: "gpt-4o".to_string(),
            temperature: 1.0,
            max_tokens: 512,
            retry_budget: 3,
            backoff: RetryPolicy::default(),
            max_in_flight: 1,
        }
    }
}

/// Chat-completion backend; must be substitutable by a deterministic mock.
pub trait ChatClient: Sync {
    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, ProviderError>;
}

/// Renders a template around the source text (and exemplar where the
/// template takes one). Pure: identical inputs produce identical strings.
pub fn render_prompt(
    template: PromptTemplate,
    source_text: &str,
    exemplar_text: Option<&str>,
) -> Result<String, GenerationError> {
    if source_text.trim().is_empty() {
        return Err(GenerationError::EmptySource);
    }
    if template.needs_exemplar() && exemplar_text.is_none() {
        return Err(GenerationError::ExemplarRequired);
    }
    if !template.needs_exemplar() && exemplar_text.is_some() {
        return Err(GenerationError::ExemplarForbidden);
    }
    Ok(match template {
        PromptTemplate::QueneauGenFr => format!(
            "Ré écris ce texte : \n{source_text}\n En copiant le style de Fénéon dans les \
             'nouvelles en trois lignes'"
        ),
        PromptTemplate::QueneauGenEn => format!(
            "Re write this text in strictly less than 30 words and using only 1 to 3 sentences: \
             \n {source_text}\n Copying Feneon's style in 'novels in three lines'"
        ),
        PromptTemplate::FeneonGenFr => format!(
            "Ré écris ce texte :\n{source_text}\n En copiant le style de ce deuxième texte :{}",
            exemplar_text.expect("checked above")
        ),
        PromptTemplate::FeneonGenEn => format!(
            "Re write this text: \n{source_text}\n Copying the style of this second text: {}",
            exemplar_text.expect("checked above")
        ),
    })
}

/// A completed provider call, for the run journal.
#[derive(Debug, Clone, Serialize)]
pub struct CallRecord {
    pub doc_id: String,
    pub prompt_sha256: String,
    pub latency_ms: u128,
    pub prompt_chars: usize,
    pub completion_chars: usize,
}

struct GenerationJob<'a> {
    source: &'a Document,
    exemplar: Option<&'a Document>,
    doc_id: String,
    style_key: String,
}

/// Synthesizes one generated cell for every language in the corpus.
///
/// The source corpus is never mutated; output order follows source order.
/// On provider exhaustion the error reports how many documents had been
/// generated; nothing is silently dropped.
pub fn generate_cell(
    corpus: &Corpus,
    target_cell: CellId,
    client: &dyn ChatClient,
    params: &GenerationParams,
) -> Result<(Vec<Document>, Vec<CallRecord>), GenerationError> {
    if !matches!(target_cell, CellId::QueneauGen | CellId::FeneonGen) {
        return Err(GenerationError::NotAGeneratedCell(target_cell));
    }
    let mut out = Vec::new();
    let mut calls = Vec::new();
    let languages: Vec<String> = corpus.languages.iter().cloned().collect();
    for language in languages {
        let template = PromptTemplate::for_cell(target_cell, &language)?;
        let queneau_ref: Vec<&Document> =
            crate::corpus::select_cell(corpus, CellId::QueneauRef, &language);
        let feneon_ref: Vec<&Document> =
            crate::corpus::select_cell(corpus, CellId::FeneonRef, &language);

        let jobs: Vec<GenerationJob> = match target_cell {
            CellId::QueneauGen => {
                if queneau_ref.is_empty() {
                    return Err(GenerationError::EmptySourceCell(CellId::QueneauRef, language));
                }
                // Uniform target style: the one FENEON_REF shares.
                let style_key = feneon_ref
                    .first()
                    .map(|d| d.style_key.clone())
                    .unwrap_or_else(|| "feneon".to_string());
                queneau_ref
                    .iter()
                    .map(|src| GenerationJob {
                        source: src,
                        exemplar: None,
                        doc_id: format!("{}__gen", src.doc_id),
                        style_key: style_key.clone(),
                    })
                    .collect()
            }
            CellId::FeneonGen => {
                if feneon_ref.is_empty() {
                    return Err(GenerationError::EmptySourceCell(CellId::FeneonRef, language));
                }
                if feneon_ref.len() != queneau_ref.len() {
                    return Err(GenerationError::UnequalPairing {
                        stories: feneon_ref.len(),
                        styles: queneau_ref.len(),
                    });
                }
                feneon_ref
                    .iter()
                    .zip(&queneau_ref)
                    .map(|(story, style)| GenerationJob {
                        source: story,
                        exemplar: Some(style),
                        doc_id: format!("{}__gen", story.doc_id),
                        style_key: style.style_key.clone(),
                    })
                    .collect()
            }
            _ => unreachable!("checked above"),
        };

        let total = jobs.len();
        let completed = out.len();
        let results = run_jobs(&jobs, template, client, params)?;
        for (job, (text, record)) in jobs.iter().zip(results) {
            calls.push(record);
            out.push(Document {
                doc_id: job.doc_id.clone(),
                language: language.clone(),
                text,
                cell: target_cell,
                topic_key: job.source.topic_key.clone(),
                style_key: job.style_key.clone(),
                origin: Origin::Generated,
            });
        }
        debug_assert_eq!(out.len(), completed + total);
    }
    Ok((out, calls))
}

/// Issues prompts with bounded concurrency; assembly is order-preserving
/// regardless of completion order.
fn run_jobs(
    jobs: &[GenerationJob],
    template: PromptTemplate,
    client: &dyn ChatClient,
    params: &GenerationParams,
) -> Result<Vec<(String, CallRecord)>, GenerationError> {
    let prompts: Vec<(String, String)> = jobs
        .iter()
        .map(|job| {
            render_prompt(template, &job.source.text, job.exemplar.map(|d| d.text.as_str()))
                .map(|p| (job.doc_id.clone(), p))
        })
        .collect::<Result<_, _>>()?;

    let chunk = params.max_in_flight.max(1);
    let mut results: Vec<(String, CallRecord)> = Vec::with_capacity(prompts.len());
    for batch in prompts.chunks(chunk) {
        let outcomes: Vec<Result<(String, CallRecord), GenerationError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|(doc_id, prompt)| {
                        scope.spawn(move || {
                            let started = std::time::Instant::now();
                            let completion =
                                with_retries(params.retry_budget, &params.backoff, || {
                                    client.complete(prompt, params)
                                })
                                .map_err(|source| GenerationError::ProviderExhausted {
                                    doc_id: doc_id.clone(),
                                    attempts: params.retry_budget,
                                    partial: 0, // patched by the caller below
                                    total: 0,
                                    source,
                                })?;
                            let record = CallRecord {
                                doc_id: doc_id.clone(),
                                prompt_sha256: sha256_hex(prompt),
                                latency_ms: started.elapsed().as_millis(),
                                prompt_chars: prompt.chars().count(),
                                completion_chars: completion.chars().count(),
                            };
                            Ok((completion, record))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
        for outcome in outcomes {
            match outcome {
                Ok(pair) => results.push(pair),
                Err(GenerationError::ProviderExhausted { doc_id, attempts, source, .. }) => {
                    return Err(GenerationError::ProviderExhausted {
                        doc_id,
                        attempts,
                        partial: results.len(),
                        total: jobs.len(),
                        source,
                    });
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(results)
}

fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    #[test]
    fn french_queneau_prompt_is_exact() {
        let p = render_prompt(PromptTemplate::QueneauGenFr, "X", None).unwrap();
        assert_eq!(
            p,
            "Ré écris ce texte : \nX\n En copiant le style de Fénéon dans les 'nouvelles en \
             trois lignes'"
        );
    }

    #[test]
    fn english_queneau_prompt_carries_the_length_constraint() {
        let p = render_prompt(PromptTemplate::QueneauGenEn, "X", None).unwrap();
        assert_eq!(
            p,
            "Re write this text in strictly less than 30 words and using only 1 to 3 sentences: \
             \n X\n Copying Feneon's style in 'novels in three lines'"
        );
    }

    #[test]
    fn feneon_prompts_are_exact() {
        let fr = render_prompt(PromptTemplate::FeneonGenFr, "A", Some("B")).unwrap();
        assert_eq!(fr, "Ré écris ce texte :\nA\n En copiant le style de ce deuxième texte :B");
        let en = render_prompt(PromptTemplate::FeneonGenEn, "A", Some("B")).unwrap();
        assert_eq!(en, "Re write this text: \nA\n Copying the style of this second text: B");
    }

    #[test]
    fn exemplar_preconditions() {
        assert!(matches!(
            render_prompt(PromptTemplate::FeneonGenFr, "A", None),
            Err(GenerationError::ExemplarRequired)
        ));
        assert!(matches!(
            render_prompt(PromptTemplate::QueneauGenFr, "A", Some("B")),
            Err(GenerationError::ExemplarForbidden)
        ));
        assert!(matches!(
            render_prompt(PromptTemplate::QueneauGenFr, "  ", None),
            Err(GenerationError::EmptySource)
        ));
    }

    #[test]
    fn render_is_pure() {
        let a = render_prompt(PromptTemplate::FeneonGenEn, "story", Some("style")).unwrap();
        let b = render_prompt(PromptTemplate::FeneonGenEn, "story", Some("style")).unwrap();
        assert_eq!(a, b);
    }

    /// Echoes the prompt back; deterministic.
    struct EchoClient;

    impl ChatClient for EchoClient {
        fn complete(&self, prompt: &str, _p: &GenerationParams) -> Result<String, ProviderError> {
            Ok(format!("rewritten: {}", prompt.len()))
        }
    }

    /// Pops scripted outcomes in order.
    struct ScriptedClient {
        script: Mutex<Vec<Result<String, ProviderError>>>,
    }

    impl ScriptedClient {
        fn new(script: Vec<Result<String, ProviderError>>) -> Self {
            Self { script: Mutex::new(script) }
        }
    }

    impl ChatClient for ScriptedClient {
        fn complete(&self, _prompt: &str, _p: &GenerationParams) -> Result<String, ProviderError> {
            self.script.lock().unwrap().remove(0)
        }
    }

    fn corpus_with_refs(n: usize) -> Corpus {
        let mut docs = Vec::new();
        for i in 0..n {
            docs.push(Document {
                doc_id: format!("qr{i}"),
                language: "fr".into(),
                text: format!("exercice {i}"),
                cell: CellId::QueneauRef,
                topic_key: "bus".into(),
                style_key: format!("style{i}"),
                origin: Origin::Reference,
            });
        }
        for i in 0..n {
            docs.push(Document {
                doc_id: format!("fr{i}"),
                language: "fr".into(),
                text: format!("nouvelle {i}"),
                cell: CellId::FeneonRef,
                topic_key: format!("topic{i}"),
                style_key: "feneon".into(),
                origin: Origin::Reference,
            });
        }
        Corpus::from_documents(docs)
    }

    fn fast_params() -> GenerationParams {
        GenerationParams {
            retry_budget: 3,
            backoff: RetryPolicy::immediate(),
            ..GenerationParams::default()
        }
    }

    #[test]
    fn generate_queneau_gen_preserves_count_and_topic_bijection() {
        let corpus = corpus_with_refs(73);
        let before = corpus.clone();
        let (docs, calls) =
            generate_cell(&corpus, CellId::QueneauGen, &EchoClient, &fast_params()).unwrap();
        assert_eq!(docs.len(), 73);
        assert_eq!(calls.len(), 73);
        assert_eq!(corpus, before, "source corpus must not change");
        for (doc, src) in docs.iter().zip(crate::corpus::select_cell(&corpus, CellId::QueneauRef, "fr")) {
            assert_eq!(doc.topic_key, src.topic_key);
            assert_eq!(doc.style_key, "feneon");
            assert_eq!(doc.origin, Origin::Generated);
        }
    }

    #[test]
    fn feneon_gen_pairs_styles_by_position() {
        let corpus = corpus_with_refs(73);
        let (docs, _) =
            generate_cell(&corpus, CellId::FeneonGen, &EchoClient, &fast_params()).unwrap();
        assert_eq!(docs.len(), 73);
        let styles: Vec<&str> = docs.iter().map(|d| d.style_key.as_str()).collect();
        let expected: Vec<String> = (0..73).map(|i| format!("style{i}")).collect();
        assert_eq!(styles, expected.iter().map(String::as_str).collect::<Vec<_>>());
        for (doc, story) in docs.iter().zip(crate::corpus::select_cell(&corpus, CellId::FeneonRef, "fr")) {
            assert_eq!(doc.topic_key, story.topic_key);
        }
    }

    #[test]
    fn unequal_pairing_is_rejected() {
        let mut corpus = corpus_with_refs(3);
        corpus.documents.pop(); // drop one FENEON_REF story
        let corpus = Corpus::from_documents(corpus.documents);
        assert!(matches!(
            generate_cell(&corpus, CellId::FeneonGen, &EchoClient, &fast_params()),
            Err(GenerationError::UnequalPairing { stories: 2, styles: 3 })
        ));
    }

    #[test]
    fn retry_budget_three_rides_over_two_failures() {
        let corpus = corpus_with_refs(1);
        let client = ScriptedClient::new(vec![
            Err(ProviderError::RateLimit("1".into())),
            Err(ProviderError::Transport("2".into())),
            Ok("third time".into()),
        ]);
        let (docs, _) =
            generate_cell(&corpus, CellId::QueneauGen, &client, &fast_params()).unwrap();
        assert_eq!(docs[0].text, "third time");
    }

    #[test]
    fn retry_budget_one_surfaces_the_rate_limit() {
        let corpus = corpus_with_refs(2);
        let client = ScriptedClient::new(vec![
            Ok("first ok".into()),
            Err(ProviderError::RateLimit("slow down".into())),
            Ok("never reached".into()),
        ]);
        let params = GenerationParams { retry_budget: 1, ..fast_params() };
        match generate_cell(&corpus, CellId::QueneauGen, &client, &params) {
            Err(GenerationError::ProviderExhausted { doc_id, partial, total, source, .. }) => {
                assert_eq!(doc_id, "qr1__gen");
                assert_eq!(partial, 1, "the first document had been generated");
                assert_eq!(total, 2);
                assert!(matches!(source, ProviderError::RateLimit(_)));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn mock_generation_is_bit_reproducible() {
        let corpus = corpus_with_refs(5);
        let a = generate_cell(&corpus, CellId::FeneonGen, &EchoClient, &fast_params()).unwrap();
        let b = generate_cell(&corpus, CellId::FeneonGen, &EchoClient, &fast_params()).unwrap();
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn generating_a_reference_cell_is_rejected() {
        let corpus = corpus_with_refs(1);
        assert!(matches!(
            generate_cell(&corpus, CellId::QueneauRef, &EchoClient, &fast_params()),
            Err(GenerationError::NotAGeneratedCell(CellId::QueneauRef))
        ));
    }
}
