//! Run configuration: a single TOML file declaring the corpus, providers,
//! models, reduction and test settings, plus output location.
//!
//! Relative paths resolve against the config file's directory so a config
//! can travel with its data. Validation happens up front: every referenced
//! path must resolve, and remote providers must find their credentials in
//! the environment unless the run is offline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::delta::PairingMode;
use crate::dispersion::TestVariant;
use crate::reduce::UmapParams;

use super::RunError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub corpus: CorpusSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub generation: Option<GenerationSection>,
    #[serde(default)]
    pub models: Vec<ModelSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub umap: UmapSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub stylometry: StylometrySection,
    #[serde(default)]
    pub delta: DeltaSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub manifest: PathBuf,
    pub languages: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub offline: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            cache_dir: PathBuf::from(".stylodisp-cache"),
            seed: 0,
            offline: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    #[serde(default)]
    pub enabled: bool,
    pub endpoint: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_gen_model")]
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_retry_budget")]
    pub retry_budget: u32,
    #[serde(default = "default_one")]
    pub max_in_flight: usize,
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}
fn default_gen_model() -> String {
    "gpt-4o".to_string()
}
fn default_temperature() -> f64 {
    1.0
}
fn default_max_tokens() -> u32 {
    512
}
fn default_retry_budget() -> u32 {
    3
}
fn default_one() -> usize {
    1
}

/// One embedding model: either imported per-language files or a remote
/// provider endpoint.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub id: String,
    /// Per-language embedding files to import instead of fetching.
    #[serde(default)]
    pub import: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_one")]
    pub max_in_flight: usize,
}

fn default_batch() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub dims: Vec<usize>,
    pub include_full_d: bool,
    pub k: usize,
    pub restarts: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { dims: vec![2, 3, 5, 10], include_full_d: true, k: 4, restarts: 10 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UmapSection {
    pub target_dim: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
}

impl Default for UmapSection {
    fn default() -> Self {
        Self {
            target_dim: 2,
            n_neighbors: 15,
            min_dist: 0.1,
            n_epochs: 200,
            negative_sample_rate: 5,
            learning_rate: 1.0,
        }
    }
}

impl UmapSection {
    pub fn to_params(&self) -> UmapParams {
        let mut params = UmapParams::with_min_dist(self.min_dist);
        params.n_neighbors = self.n_neighbors;
        params.n_epochs = self.n_epochs;
        params.negative_sample_rate = self.negative_sample_rate;
        params.learning_rate = self.learning_rate;
        params
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    /// Seeds 0..n_seeds feed the multi-seed reduction.
    pub n_seeds: u64,
    pub test: TestVariant,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self { n_seeds: 30, test: TestVariant::Welch }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StylometrySection {
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaSection {
    pub pairing: PairingChoice,
}

impl Default for DeltaSection {
    fn default() -> Self {
        Self { pairing: PairingChoice::Cartesian }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingChoice {
    Cartesian,
    Indexed,
}

impl PairingChoice {
    pub fn mode(self) -> PairingMode {
        match self {
            PairingChoice::Cartesian => PairingMode::Cartesian,
            PairingChoice::Indexed => PairingMode::Indexed,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub offline: bool,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

/// A validated, path-resolved run configuration plus the verbatim TOML it
/// came from (echoed into the run journal).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw_toml: String,
    pub config_dir: PathBuf,
    pub corpus_manifest: PathBuf,
    pub languages: Vec<String>,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub offline: bool,
    pub generation: Option<GenerationSection>,
    pub models: Vec<ModelSection>,
    pub sweep: SweepSection,
    pub umap: UmapSection,
    pub dispersion: DispersionSection,
    pub annotations: Option<PathBuf>,
    pub pairing: PairingMode,
}

impl RunConfig {
    pub fn load(config_path: &Path, overrides: &Overrides) -> Result<Self, RunError> {
        let raw_toml = std::fs::read_to_string(config_path).map_err(|source| RunError::Io {
            path: config_path.display().to_string(),
            source,
        })?;
        let raw: RawConfig = toml::from_str(&raw_toml)
            .map_err(|e| RunError::Config(format!("config schema violation: {e}")))?;
        let config_dir = config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                config_dir.join(p)
            }
        };

        if raw.corpus.languages.is_empty() {
            return Err(RunError::Config("corpus.languages must not be empty".into()));
        }
        if raw.models.is_empty() {
            return Err(RunError::Config("at least one [[models]] entry is required".into()));
        }

        let corpus_manifest = resolve(&raw.corpus.manifest);
        if !corpus_manifest.exists() {
            return Err(RunError::Config(format!(
                "corpus manifest not found: {}",
                corpus_manifest.display()
            )));
        }

        let offline = raw.run.offline || overrides.offline;
        let seed = overrides.seed.unwrap_or(raw.run.seed);
        let out_dir = overrides.out_dir.clone().unwrap_or_else(|| resolve(&raw.run.out_dir));
        let cache_dir = resolve(&raw.run.cache_dir);

        let mut models = raw.models.clone();
        for model in &mut models {
            for (language, path) in model.import.clone() {
                let resolved = resolve(&path);
                if !resolved.exists() {
                    return Err(RunError::Config(format!(
                        "embedding import for model {:?} language {:?} not found: {}",
                        model.id,
                        language,
                        resolved.display()
                    )));
                }
                model.import.insert(language, resolved);
            }
            let remote = model.endpoint.is_some();
            if !remote {
                for language in &raw.corpus.languages {
                    if !model.import.contains_key(language) {
                        return Err(RunError::Config(format!(
                            "model {:?} has neither an endpoint nor an import for language {:?}",
                            model.id, language
                        )));
                    }
                }
            }
            if remote && !offline && std::env::var(&model.api_key_env).is_err() {
                return Err(RunError::Config(format!(
                    "model {:?} uses a remote provider but ${} is not set",
                    model.id, model.api_key_env
                )));
            }
        }

        if let Some(generation) = &raw.generation {
            if generation.enabled {
                if offline {
                    return Err(RunError::Config(
                        "generation is enabled but the run is offline".into(),
                    ));
                }
                if std::env::var(&generation.api_key_env).is_err() {
                    return Err(RunError::Config(format!(
                        "generation is enabled but ${} is not set",
                        generation.api_key_env
                    )));
                }
            }
        }

        let annotations = match &raw.stylometry.annotations {
            Some(p) => {
                let resolved = resolve(p);
                if !resolved.exists() {
                    return Err(RunError::Config(format!(
                        "annotations file not found: {}",
                        resolved.display()
                    )));
                }
                Some(resolved)
            }
            None => None,
        };

        Ok(Self {
            raw_toml,
            config_dir,
            corpus_manifest,
            languages: raw.corpus.languages,
            out_dir,
            cache_dir,
            seed,
            offline,
            generation: raw.generation,
            models,
            sweep: raw.sweep,
            umap: raw.umap,
            dispersion: raw.dispersion,
            annotations,
            pairing: raw.delta.pairing.mode(),
        })
    }

    pub fn lang_dir(&self, language: &str) -> PathBuf {
        self.out_dir.join(language)
    }
}
