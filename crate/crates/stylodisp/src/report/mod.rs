//! End-to-end pipeline orchestration: stages that communicate exclusively
//! through files in the output directory, so any stage can rerun from
//! cached upstream artifacts and reproduce its outputs bit-for-bit.

pub mod artifacts;
pub mod config;
pub mod journal;
mod stages;
pub mod svg;

pub use config::{Overrides, RunConfig};
pub use journal::{Journal, OutDirLock};

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cluster::ClusterError;
use crate::corpus::{CellId, CorpusError};
use crate::delta::DeltaError;
use crate::dispersion::DispersionError;
use crate::embedding::EmbeddingError;
use crate::generation::GenerationError;
use crate::provider::ProviderError;
use crate::reduce::ReduceError;
use crate::stylometry::StylometryError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output directory is locked by another run: {0}")]
    OutputLocked(String),
    #[error("missing upstream artifact {path} ({hint})")]
    MissingArtifact { path: String, hint: String },
    #[error("artifact {path} unreadable: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Stylometry(#[from] StylometryError),
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Generate,
    Embed,
    ValidateClusters,
    Dispersion,
    Stylometry,
    Correlate,
    Report,
}

impl Stage {
    pub const ORDER: [Stage; 8] = [
        Stage::Ingest,
        Stage::Generate,
        Stage::Embed,
        Stage::ValidateClusters,
        Stage::Dispersion,
        Stage::Stylometry,
        Stage::Correlate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Generate => "generate",
            Stage::Embed => "embed",
            Stage::ValidateClusters => "validate-clusters",
            Stage::Dispersion => "dispersion",
            Stage::Stylometry => "stylometry",
            Stage::Correlate => "correlate",
            Stage::Report => "report",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ORDER.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical locations of every artifact below the output directory.
pub struct OutPaths {
    out: PathBuf,
}

impl OutPaths {
    pub fn new(out: &Path) -> Self {
        Self { out: out.to_path_buf() }
    }

    pub fn corpus_snapshot(&self) -> PathBuf {
        self.out.join("corpus.jsonl")
    }

    pub fn generated_manifest(&self) -> PathBuf {
        self.out.join("generated.jsonl")
    }

    pub fn design_report(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("design_report.json")
    }

    pub fn embeddings(&self, lang: &str, model: &str) -> PathBuf {
        self.out.join(lang).join("embeddings").join(format!("{model}.jsonl"))
    }

    pub fn sweep_csv(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("sweep.csv")
    }

    pub fn sweep_json(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("sweep.json")
    }

    pub fn dispersion_json(&self, lang: &str, model: &str) -> PathBuf {
        self.out.join(lang).join(format!("dispersion_{model}.json"))
    }

    pub fn hypotheses_csv(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("hypotheses.csv")
    }

    pub fn hypotheses_json(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("hypotheses.json")
    }

    pub fn scatter_svg(&self, lang: &str, model: &str, cell: CellId) -> PathBuf {
        self.out.join(lang).join("scatter").join(format!("{model}_{}.svg", cell.label()))
    }

    pub fn features_csv(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("features.csv")
    }

    pub fn features_json(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("features.json")
    }

    pub fn ground_csv(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("ground_frequencies.csv")
    }

    pub fn ground_json(&self, lang: &str) -> PathBuf {
        self.out.join(lang).join("ground_frequencies.json")
    }

    pub fn correlations_csv(&self, lang: &str, model: &str) -> PathBuf {
        self.out.join(lang).join(format!("correlations_{model}.csv"))
    }

    pub fn correlations_json(&self, lang: &str, model: &str) -> PathBuf {
        self.out.join(lang).join(format!("correlations_{model}.json"))
    }

    pub fn report_txt(&self) -> PathBuf {
        self.out.join("report.txt")
    }
}

pub(crate) fn write_artifact(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|source| RunError::Io { path: parent.display().to_string(), source })?;
    }
    std::fs::write(path, contents)
        .map_err(|source| RunError::Io { path: path.display().to_string(), source })
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path, hint: &str) -> Result<T, RunError> {
    let raw = std::fs::read_to_string(path).map_err(|_| RunError::MissingArtifact {
        path: path.display().to_string(),
        hint: hint.to_string(),
    })?;
    serde_json::from_str(&raw)
        .map_err(|source| RunError::Json { path: path.display().to_string(), source })
}

/// Runs one stage or the whole pipeline. Takes the output-directory lock,
/// opens the journal, and executes stages in order.
pub fn run(config: &RunConfig, stage: Option<Stage>) -> Result<(), RunError> {
    let _lock = OutDirLock::acquire(&config.out_dir)?;
    let mut journal = Journal::create(&config.out_dir, &config.raw_toml)?;
    let paths = OutPaths::new(&config.out_dir);

    let to_run: Vec<Stage> = match stage {
        Some(s) => vec![s],
        None => Stage::ORDER.to_vec(),
    };
    for stage in to_run {
        let started = std::time::Instant::now();
        journal.event(stage.name(), "stage_start", serde_json::json!({ "seed": config.seed }))?;
        match stage {
            Stage::Ingest => stages::ingest(config, &paths, &mut journal)?,
            Stage::Generate => stages::generate(config, &paths, &mut journal)?,
            Stage::Embed => stages::embed(config, &paths, &mut journal)?,
            Stage::ValidateClusters => stages::validate_clusters(config, &paths, &mut journal)?,
            Stage::Dispersion => stages::dispersion(config, &paths, &mut journal)?,
            Stage::Stylometry => stages::stylometry(config, &paths, &mut journal)?,
            Stage::Correlate => stages::correlate(config, &paths, &mut journal)?,
            Stage::Report => stages::report(config, &paths, &mut journal)?,
        }
        journal.event(
            stage.name(),
            "stage_end",
            serde_json::json!({ "duration_ms": started.elapsed().as_millis() as u64 }),
        )?;
    }
    journal.event("run", "run_end", serde_json::json!({}))?;
    Ok(())
}
