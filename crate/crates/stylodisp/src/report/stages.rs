//! The eight pipeline stages. Each one reads its inputs from files in the
//! output directory (or the configured corpus/annotation paths), computes,
//! and writes its artifacts plus journal entries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::json;

use crate::cluster::{default_sweep_dims, sweep, SweepDim};
use crate::corpus::{self, CellId, Corpus};
use crate::delta::{correlation_matrix, delta_series, CellSamples, CorrelationMatrix, PairingMode};
use crate::dispersion::{test_hypotheses_with, DispersionTable};
use crate::embedding::{
    embed_corpus, export_embeddings, import_embeddings, EmbeddingCache, EmbeddingClient,
    EmbeddingSet, ProviderSpec,
};
use crate::generation::{generate_cell, ChatClient, GenerationParams};
use crate::provider::{HttpProviderConfig, ProviderError, RetryPolicy};
use crate::stylometry::{
    extract_features, finalize_group_scalars, ground_table, load_annotations, FunctionWords,
    GroundFrequencyTable, Language, WORDLIST_VERSION,
};

use super::artifacts::{
    correlations_csv, features_csv, ground_csv, hypotheses_csv, hypotheses_json,
    hypotheses_terminal_row, sweep_csv, sweep_json, DispersionArtifact, FeatureRow,
};
use super::config::{ModelSection, RunConfig};
use super::journal::Journal;
use super::svg::scatter_svg;
use super::{read_json, write_artifact, OutPaths, RunError};

fn load_snapshot(paths: &OutPaths) -> Result<Corpus, RunError> {
    let path = paths.corpus_snapshot();
    if !path.exists() {
        return Err(RunError::MissingArtifact {
            path: path.display().to_string(),
            hint: "run the ingest stage first".to_string(),
        });
    }
    Ok(corpus::load_manifest(&path)?)
}

pub fn ingest(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let corpus = corpus::load_manifest(&config.corpus_manifest)?;
    for language in &config.languages {
        let report = corpus::validate_design(&corpus, language)?;
        let path = paths.design_report(language);
        write_artifact(&path, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
        journal.artifact("ingest", &path)?;
        journal.serializable("ingest", "design_report", &report)?;
        if !report.balanced {
            journal.decision(
                "ingest",
                &format!("language {language}: unbalanced design accepted with warning"),
            )?;
        }
    }
    corpus::save_manifest(&corpus, &paths.corpus_snapshot())?;
    journal.artifact("ingest", &paths.corpus_snapshot())?;
    Ok(())
}

struct HttpChatClient {
    http: HttpProviderConfig,
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, ProviderError> {
        self.http.chat_complete(&params.model_name, prompt, params.temperature, params.max_tokens)
    }
}

pub fn generate(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let Some(generation) = &config.generation else {
        journal.decision("generate", "no [generation] section; stage skipped")?;
        return Ok(());
    };
    if !generation.enabled {
        journal.decision("generate", "generation disabled; stage skipped")?;
        return Ok(());
    }
    let mut corpus = load_snapshot(paths)?;
    let client = HttpChatClient {
        http: HttpProviderConfig::new(&generation.endpoint, &generation.api_key_env),
    };
    let params = GenerationParams {
        model_name: generation.model.clone(),
        temperature: generation.temperature,
        max_tokens: generation.max_tokens,
        retry_budget: generation.retry_budget,
        backoff: RetryPolicy::default(),
        max_in_flight: generation.max_in_flight,
    };
    journal.serializable("generate", "params", &params)?;

    let mut generated = Vec::new();
    for target in [CellId::QueneauGen, CellId::FeneonGen] {
        let missing_languages: Vec<String> = config
            .languages
            .iter()
            .filter(|lang| corpus::select_cell(&corpus, target, lang).is_empty())
            .cloned()
            .collect();
        if missing_languages.is_empty() {
            journal.decision(
                "generate",
                &format!("cell {} already present for all languages; not regenerated", target),
            )?;
            continue;
        }
        // Restrict to languages that actually miss the cell.
        let sub = Corpus::from_documents(
            corpus
                .documents
                .iter()
                .filter(|d| missing_languages.contains(&d.language))
                .cloned()
                .collect(),
        );
        let (docs, calls) = generate_cell(&sub, target, &client, &params)?;
        for call in &calls {
            journal.serializable("generate", "provider_call", call)?;
        }
        generated.extend(docs);
    }

    if !generated.is_empty() {
        corpus.documents.extend(generated.iter().cloned());
        let corpus = Corpus::from_documents(corpus.documents);
        corpus::save_manifest(&corpus, &paths.corpus_snapshot())?;
        journal.artifact("generate", &paths.corpus_snapshot())?;
        let generated = Corpus::from_documents(generated);
        corpus::save_manifest(&generated, &paths.generated_manifest())?;
        journal.artifact("generate", &paths.generated_manifest())?;
    }
    Ok(())
}

struct HttpEmbeddingClient {
    http: HttpProviderConfig,
    retry_budget: u32,
}

impl EmbeddingClient for HttpEmbeddingClient {
    fn embed_batch(&self, model_id: &str, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        crate::provider::with_retries(self.retry_budget, &RetryPolicy::default(), || {
            self.http.embed(model_id, texts)
        })
    }
}

fn obtain_embeddings(
    config: &RunConfig,
    model: &ModelSection,
    language: &str,
    lang_corpus: &Corpus,
    journal: &mut Journal,
) -> Result<EmbeddingSet, RunError> {
    if let Some(import_path) = model.import.get(language) {
        let set = import_embeddings(import_path)?;
        let expected: Vec<&str> =
            lang_corpus.documents.iter().map(|d| d.doc_id.as_str()).collect();
        let got: Vec<&str> = set.doc_ids().iter().map(String::as_str).collect();
        if expected != got {
            return Err(RunError::Config(format!(
                "embedding file {} does not list the {language} corpus documents in manifest \
                 order",
                import_path.display()
            )));
        }
        journal.event(
            "embed",
            "imported",
            json!({ "model": model.id, "language": language, "dim": set.dim, "rows": set.len() }),
        )?;
        return Ok(set);
    }

    let endpoint = model.endpoint.as_ref().expect("validated at config load");
    let spec = ProviderSpec {
        provider_name: "openai-compat".to_string(),
        endpoint: endpoint.clone(),
        model_id: model.id.clone(),
        batch_size: model.batch_size,
        max_in_flight: model.max_in_flight,
    };
    let cache = EmbeddingCache::open(&config.cache_dir)?;
    let set = if config.offline {
        embed_corpus(&spec, lang_corpus, None, &cache)?
    } else {
        let client = HttpEmbeddingClient {
            http: HttpProviderConfig::new(endpoint, &model.api_key_env),
            retry_budget: 3,
        };
        embed_corpus(&spec, lang_corpus, Some(&client), &cache)?
    };
    journal.event(
        "embed",
        "fetched",
        json!({ "model": model.id, "language": language, "dim": set.dim, "rows": set.len() }),
    )?;
    Ok(set)
}

pub fn embed(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let corpus = load_snapshot(paths)?;
    for language in &config.languages {
        let lang_corpus = corpus.filter_language(language);
        if lang_corpus.is_empty() {
            return Err(RunError::Config(format!("no documents for language {language:?}")));
        }
        for model in &config.models {
            let set = obtain_embeddings(config, model, language, &lang_corpus, journal)?;
            let path = paths.embeddings(language, &model.id);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)
                    .map_err(|source| RunError::Io { path: parent.display().to_string(), source })?;
            }
            export_embeddings(&set, &path)?;
            journal.artifact("embed", &path)?;
        }
    }
    Ok(())
}

fn load_stage_embeddings(
    config: &RunConfig,
    paths: &OutPaths,
    language: &str,
) -> Result<BTreeMap<String, EmbeddingSet>, RunError> {
    let mut sets = BTreeMap::new();
    for model in &config.models {
        let path = paths.embeddings(language, &model.id);
        if !path.exists() {
            return Err(RunError::MissingArtifact {
                path: path.display().to_string(),
                hint: "run the embed stage first".to_string(),
            });
        }
        sets.insert(model.id.clone(), import_embeddings(&path)?);
    }
    Ok(sets)
}

pub fn validate_clusters(
    config: &RunConfig,
    paths: &OutPaths,
    journal: &mut Journal,
) -> Result<(), RunError> {
    let corpus = load_snapshot(paths)?;
    for language in &config.languages {
        let lang_corpus = corpus.filter_language(language);
        let truth: Vec<CellId> = lang_corpus.documents.iter().map(|d| d.cell).collect();
        let sets = load_stage_embeddings(config, paths, language)?;

        let mut dims: Vec<SweepDim> =
            config.sweep.dims.iter().map(|&d| SweepDim::Pca(d)).collect();
        if config.sweep.include_full_d {
            dims.push(SweepDim::FullD);
        }
        if dims.is_empty() {
            dims = default_sweep_dims();
        }
        journal.decision(
            "validate-clusters",
            &format!(
                "k-means: k={}, k-means++ init, best of {} restarts by inertia, seed={}",
                config.sweep.k, config.sweep.restarts, config.seed
            ),
        )?;
        journal.decision(
            "validate-clusters",
            "NMI normalization: arithmetic mean of entropies (2I/(H1+H2)), natural log",
        )?;

        let table = sweep(&sets, &truth, &dims, config.sweep.k, config.seed, config.sweep.restarts)?;
        let csv_path = paths.sweep_csv(language);
        write_artifact(&csv_path, &sweep_csv(&table))?;
        journal.artifact("validate-clusters", &csv_path)?;
        let json_path = paths.sweep_json(language);
        write_artifact(
            &json_path,
            &serde_json::to_string_pretty(&sweep_json(&table)).expect("sweep json"),
        )?;
        journal.artifact("validate-clusters", &json_path)?;
    }
    Ok(())
}

pub fn dispersion(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let corpus = load_snapshot(paths)?;
    let params = config.umap.to_params();
    let seeds: Vec<u64> = (0..config.dispersion.n_seeds).collect();
    journal.event(
        "dispersion",
        "umap_params",
        json!({
            "n_neighbors": params.n_neighbors,
            "min_dist": params.min_dist,
            "n_epochs": params.n_epochs,
            "negative_sample_rate": params.negative_sample_rate,
            "learning_rate": params.learning_rate,
            "curve_a": params.curve_a,
            "curve_b": params.curve_b,
            "target_dim": config.umap.target_dim,
            "seeds": seeds,
        }),
    )?;
    journal.decision(
        "dispersion",
        &format!(
            "test variant: {:?} two-sided t-test on per-document seed-averaged distances",
            config.dispersion.test
        ),
    )?;

    for language in &config.languages {
        let lang_corpus = corpus.filter_language(language);
        let sets = load_stage_embeddings(config, paths, language)?;
        let mut membership: BTreeMap<CellId, Vec<usize>> = BTreeMap::new();
        for (row, doc) in lang_corpus.documents.iter().enumerate() {
            membership.entry(doc.cell).or_default().push(row);
        }

        let mut verdict_rows = Vec::new();
        for model in &config.models {
            let set = &sets[&model.id];
            let matrix = set.to_matrix();
            let reductions =
                crate::reduce::multi_seed_reduce(&matrix, config.umap.target_dim, &params, &seeds)?;
            let table = DispersionTable::compute(&reductions, &membership)?;
            let verdicts = test_hypotheses_with(&table, config.dispersion.test)?;

            let artifact = DispersionArtifact {
                model_id: model.id.clone(),
                language: language.clone(),
                table: table.clone(),
                verdicts: verdicts.clone(),
            };
            let path = paths.dispersion_json(language, &model.id);
            write_artifact(&path, &serde_json::to_string_pretty(&artifact).expect("serializes"))?;
            journal.artifact("dispersion", &path)?;

            if config.umap.target_dim == 2 {
                let last = reductions.last().expect("at least one seed");
                for (&cell, dispersion) in &table.cells {
                    let pts: Vec<(f64, f64)> = dispersion
                        .rows
                        .iter()
                        .map(|&r| (last.coords.get(r, 0), last.coords.get(r, 1)))
                        .collect();
                    let centroid = (
                        pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64,
                        pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64,
                    );
                    let svg = scatter_svg(
                        &pts,
                        centroid,
                        &format!("d̄ = {:.3}", dispersion.mean),
                        &format!("{} {} ({})", model.id, cell.label(), language),
                    );
                    let path = paths.scatter_svg(language, &model.id, cell);
                    write_artifact(&path, &svg)?;
                    journal.artifact("dispersion", &path)?;
                }
            }
            verdict_rows.push((model.id.clone(), verdicts));
        }

        let csv_path = paths.hypotheses_csv(language);
        write_artifact(&csv_path, &hypotheses_csv(&verdict_rows))?;
        journal.artifact("dispersion", &csv_path)?;
        let json_path = paths.hypotheses_json(language);
        write_artifact(
            &json_path,
            &serde_json::to_string_pretty(&hypotheses_json(&verdict_rows)).expect("serializes"),
        )?;
        journal.artifact("dispersion", &json_path)?;
    }
    Ok(())
}

pub fn stylometry(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let corpus = load_snapshot(paths)?;
    let annotations = match &config.annotations {
        Some(path) => {
            journal.decision(
                "stylometry",
                &format!("NER/POS from imported annotations: {}", path.display()),
            )?;
            Some(load_annotations(path)?)
        }
        None => {
            journal.decision(
                "stylometry",
                "no annotations configured; NER/POS use built-in low-confidence heuristics",
            )?;
            None
        }
    };
    journal.decision(
        "stylometry",
        &format!(
            "function-word lists v{WORDLIST_VERSION}; composite groups = corpus-level z-mean of \
             subfeatures"
        ),
    )?;

    for language in &config.languages {
        let lang = Language::from_code(language)?;
        let function_words = FunctionWords::builtin(lang);
        let lang_corpus = corpus.filter_language(language);

        let mut features = Vec::with_capacity(lang_corpus.len());
        for doc in &lang_corpus.documents {
            let ann = annotations.as_ref().and_then(|m| m.get(&doc.doc_id));
            features.push(extract_features(&doc.text, lang, &function_words, ann)?);
        }
        finalize_group_scalars(&mut features);
        let rows: Vec<FeatureRow> = lang_corpus
            .documents
            .iter()
            .zip(&features)
            .map(|(doc, f)| FeatureRow {
                doc_id: doc.doc_id.clone(),
                cell: doc.cell,
                features: f.clone(),
            })
            .collect();

        let csv_path = paths.features_csv(language);
        write_artifact(&csv_path, &features_csv(&rows))?;
        journal.artifact("stylometry", &csv_path)?;
        let json_path = paths.features_json(language);
        write_artifact(&json_path, &serde_json::to_string_pretty(&rows).expect("serializes"))?;
        journal.artifact("stylometry", &json_path)?;

        let mut per_cell: BTreeMap<CellId, Vec<crate::stylometry::StyleFeatures>> = BTreeMap::new();
        for row in &rows {
            per_cell.entry(row.cell).or_default().push(row.features.clone());
        }
        let table = ground_table(&per_cell)?;
        let gcsv = paths.ground_csv(language);
        write_artifact(&gcsv, &ground_csv(&table))?;
        journal.artifact("stylometry", &gcsv)?;
        let gjson = paths.ground_json(language);
        write_artifact(&gjson, &serde_json::to_string_pretty(&table).expect("serializes"))?;
        journal.artifact("stylometry", &gjson)?;
    }
    Ok(())
}

pub fn correlate(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    journal.decision(
        "correlate",
        &format!(
            "pairing mode {:?}; deltas use seed-averaged per-document distances",
            config.pairing
        ),
    )?;
    for language in &config.languages {
        let rows: Vec<FeatureRow> =
            read_json(&paths.features_json(language), "run the stylometry stage first")?;
        let ground: GroundFrequencyTable =
            read_json(&paths.ground_json(language), "run the stylometry stage first")?;

        for model in &config.models {
            let artifact: DispersionArtifact = read_json(
                &paths.dispersion_json(language, &model.id),
                "run the dispersion stage first",
            )?;
            let mut matrices: Vec<CorrelationMatrix> = Vec::new();
            for x_cell in [CellId::QueneauRef, CellId::FeneonRef] {
                let series = build_series(&artifact, &rows, x_cell, config.pairing)?;
                journal.event(
                    "correlate",
                    "series",
                    json!({
                        "language": language,
                        "model": model.id,
                        "comparison": format!("{} vs {}", x_cell.label(), CellId::QueneauGen.label()),
                        "rows": series.rows.len(),
                    }),
                )?;
                matrices.push(correlation_matrix(&series, &ground)?);
            }
            let csv_path = paths.correlations_csv(language, &model.id);
            write_artifact(&csv_path, &correlations_csv(&matrices, &ground.groups))?;
            journal.artifact("correlate", &csv_path)?;
            let json_path = paths.correlations_json(language, &model.id);
            write_artifact(
                &json_path,
                &serde_json::to_string_pretty(&matrices).expect("serializes"),
            )?;
            journal.artifact("correlate", &json_path)?;
        }
    }
    Ok(())
}

fn build_series(
    artifact: &DispersionArtifact,
    rows: &[FeatureRow],
    x_cell: CellId,
    pairing: PairingMode,
) -> Result<crate::delta::DeltaSeries, RunError> {
    let y_cell = CellId::QueneauGen;
    let x = artifact.table.cell(x_cell)?;
    let y = artifact.table.cell(y_cell)?;
    let features_for = |indices: &[usize]| -> Vec<crate::stylometry::StyleFeatures> {
        indices.iter().map(|&r| rows[r].features.clone()).collect()
    };
    let fx = features_for(&x.rows);
    let fy = features_for(&y.rows);
    Ok(delta_series(
        &CellSamples { cell: x_cell, d_bar: &x.per_doc, features: &fx },
        &CellSamples { cell: y_cell, d_bar: &y.per_doc, features: &fy },
        pairing,
    )?)
}

pub fn report(config: &RunConfig, paths: &OutPaths, journal: &mut Journal) -> Result<(), RunError> {
    let mut out = String::new();
    writeln!(out, "run summary (seed {})", config.seed).unwrap();
    for language in &config.languages {
        writeln!(out, "\n== language: {language} ==").unwrap();

        let sweep_path = paths.sweep_json(language);
        if sweep_path.exists() {
            let sweep: serde_json::Value = read_json(&sweep_path, "validate-clusters")?;
            writeln!(out, "\ncluster validation (s_bar by dimensionality):").unwrap();
            let dims: Vec<String> = sweep["dims"]
                .as_array()
                .unwrap_or(&vec![])
                .iter()
                .map(|d| d.as_str().unwrap_or("?").to_string())
                .collect();
            writeln!(out, "{:<28} {}", "model", dims.join("  ")).unwrap();
            for row in sweep["rows"].as_array().unwrap_or(&vec![]) {
                let scores: Vec<String> = row["scores"]
                    .as_array()
                    .unwrap_or(&vec![])
                    .iter()
                    .map(|s| format!("{:.4}", s["s_bar"].as_f64().unwrap_or(f64::NAN)))
                    .collect();
                writeln!(
                    out,
                    "{:<28} {}",
                    row["model_id"].as_str().unwrap_or("?"),
                    scores.join("  ")
                )
                .unwrap();
            }
            writeln!(
                out,
                "dimension ranking by mean s_bar: {}",
                sweep["dim_ranking"]
                    .as_array()
                    .unwrap_or(&vec![])
                    .iter()
                    .map(|d| d.as_str().unwrap_or("?"))
                    .collect::<Vec<_>>()
                    .join(" > ")
            )
            .unwrap();
        }

        let hyp_path = paths.hypotheses_json(language);
        if hyp_path.exists() {
            writeln!(out, "\ndispersion hypotheses (T', T'', S', S'', T-S):").unwrap();
            let rows: serde_json::Value = read_json(&hyp_path, "dispersion")?;
            for row in rows.as_array().unwrap_or(&vec![]) {
                let model = row["model_id"].as_str().unwrap_or("?");
                let verdicts: Vec<crate::dispersion::HypothesisVerdict> = row["verdicts"]
                    .as_array()
                    .unwrap_or(&vec![])
                    .iter()
                    .map(|v| crate::dispersion::HypothesisVerdict {
                        id: match v["hypothesis"].as_str().unwrap_or("") {
                            "T'" => crate::dispersion::HypothesisId::TPrime,
                            "T''" => crate::dispersion::HypothesisId::TSecond,
                            "S'" => crate::dispersion::HypothesisId::SPrime,
                            "S''" => crate::dispersion::HypothesisId::SSecond,
                            _ => crate::dispersion::HypothesisId::TopicOverStyle,
                        },
                        lhs_cell: CellId::QueneauRef,
                        rhs_cell: CellId::QueneauGen,
                        direction_ok: v["direction_ok"].as_bool().unwrap_or(false),
                        t_stat: v["t"].as_f64().unwrap_or(f64::NAN),
                        p_value: v["p"].as_f64().unwrap_or(1.0),
                        stars: match v["stars"].as_str().unwrap_or("") {
                            "**" => crate::dispersion::Stars::Two,
                            "*" => crate::dispersion::Stars::One,
                            _ => crate::dispersion::Stars::None,
                        },
                    })
                    .collect();
                writeln!(out, "{}", hypotheses_terminal_row(model, &verdicts)).unwrap();
            }
        }

        let ground_path = paths.ground_json(language);
        if ground_path.exists() {
            let table: GroundFrequencyTable = read_json(&ground_path, "stylometry")?;
            writeln!(out, "\nground-frequency shifts from QUENEAU_GEN:").unwrap();
            writeln!(out, "{:<16} {:>14} {:>14}", "feature", "to QUE_REF", "to FEN_REF").unwrap();
            for (gi, group) in table.groups.iter().enumerate() {
                let a = &table.comparisons[&CellId::QueneauRef][gi];
                let b = &table.comparisons[&CellId::FeneonRef][gi];
                writeln!(
                    out,
                    "{:<16} {:>14} {:>14}",
                    group,
                    format!("{}{}", a.arrow.glyph(), a.stars.as_str()),
                    format!("{}{}", b.arrow.glyph(), b.stars.as_str()),
                )
                .unwrap();
            }
        }
    }

    print!("{out}");
    write_artifact(&paths.report_txt(), &out)?;
    journal.artifact("report", &paths.report_txt())?;
    Ok(())
}
