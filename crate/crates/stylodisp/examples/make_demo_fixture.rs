//! Regenerates the bundled demo fixture under `fixtures/demo/`: a small
//! balanced French corpus with planted stylistic differences per cell, plus
//! two 16-D embedding files.
//!
//! `model_a` carries four well-separated clusters in its first two
//! coordinates (good cluster-validation scores); `model_b` carries
//! concentric cells whose spreads follow FENEON_GEN > FENEON_REF >
//! QUENEAU_REF > QUENEAU_GEN (the dispersion ordering). Run with:
//!
//! ```text
//! cargo run -p stylodisp --example make_demo_fixture
//! ```

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stylodisp::corpus::{save_manifest, CellId, Corpus, Document, Origin};
use stylodisp::embedding::{export_embeddings, EmbeddingSet};

const DOCS_PER_CELL: usize = 12;
const DIM: usize = 16;

fn gaussian(rng: &mut StdRng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

const TOPIC_NOUNS: [&str; 12] = [
    "autobus", "marché", "jardin", "fleuve", "théâtre", "village", "orage", "mariage",
    "procès", "récolte", "incendie", "voyage",
];

const STYLE_ADJECTIVES: [&str; 12] = [
    "curieux", "paisible", "bruyant", "sombre", "lumineux", "étrange", "banal", "vif",
    "lointain", "soudain", "discret", "ancien",
];

fn pick<'a>(rng: &mut StdRng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

/// Builds one synthetic text. The knobs plant per-cell stylometric
/// contrasts: sentence count, exclamations, digits and capitalized names.
fn make_text(
    rng: &mut StdRng,
    noun: &str,
    adjective: &str,
    sentences: usize,
    exclaim: bool,
    with_numbers: bool,
    with_names: bool,
) -> String {
    const VERBS: [&str; 6] = ["traverse", "observe", "raconte", "oublie", "retrouve", "décrit"];
    const NAMES: [&str; 6] = ["Marcel", "Jeanne", "Victor", "Louise", "Armand", "Céleste"];
    let mut out = String::new();
    for s in 0..sentences {
        if s > 0 {
            out.push(' ');
        }
        let subject = if with_names && s % 2 == 0 {
            pick(rng, &NAMES).to_string()
        } else if noun.starts_with(['a', 'e', 'i', 'o', 'u', 'é', 'è', 'ê', 'à', 'â', 'î', 'ô', 'û']) {
            format!("l'{noun}")
        } else {
            format!("le {noun}")
        };
        let verb = pick(rng, &VERBS);
        let object = format!("un spectacle {adjective}");
        if with_numbers && s % 2 == 1 {
            out.push_str(&format!(
                "Vers {} heures, {subject} {verb} {object} près du quai {}",
                rng.gen_range(1..23),
                rng.gen_range(2..9)
            ));
        } else {
            out.push_str(&format!("Dans la ville, {subject} {verb} {object}"));
        }
        out.push_str(if exclaim && s + 1 == sentences { " !" } else { "." });
    }
    out
}

fn build_corpus(rng: &mut StdRng) -> Corpus {
    let mut docs = Vec::new();
    let shared_topic = "autobus";
    let shared_style = "feneon";
    for (cell, origin) in [
        (CellId::QueneauRef, Origin::Reference),
        (CellId::FeneonRef, Origin::Reference),
        (CellId::QueneauGen, Origin::Generated),
        (CellId::FeneonGen, Origin::Generated),
    ] {
        for i in 0..DOCS_PER_CELL {
            let (topic_key, style_key) = match cell {
                CellId::QueneauRef => (shared_topic.to_string(), format!("style{i}")),
                CellId::FeneonRef => (TOPIC_NOUNS[i].to_string(), shared_style.to_string()),
                CellId::QueneauGen => (shared_topic.to_string(), shared_style.to_string()),
                CellId::FeneonGen => (TOPIC_NOUNS[i].to_string(), format!("style{i}")),
            };
            let noun = match cell {
                CellId::QueneauRef | CellId::QueneauGen => shared_topic,
                _ => TOPIC_NOUNS[i],
            };
            let adjective = match cell {
                CellId::FeneonRef | CellId::QueneauGen => "sobre",
                _ => STYLE_ADJECTIVES[i],
            };
            let text = match cell {
                // Uniform telegraphic style.
                CellId::QueneauGen => make_text(rng, noun, adjective, 2, false, true, true),
                // Same topic, florid varied styles.
                CellId::QueneauRef => {
                    make_text(rng, noun, adjective, 3 + i % 3, i % 2 == 0, false, false)
                }
                // Varied topics, uniform factual style with numbers/names.
                CellId::FeneonRef => make_text(rng, noun, adjective, 2, false, true, true),
                // Varied topics and styles.
                CellId::FeneonGen => {
                    make_text(rng, noun, adjective, 2 + i % 4, i % 3 == 0, i % 2 == 0, i % 2 == 1)
                }
            };
            docs.push(Document {
                doc_id: format!("{}_{i:02}", cell.label().to_lowercase()),
                language: "fr".to_string(),
                text,
                cell,
                topic_key,
                style_key,
                origin,
            });
        }
    }
    Corpus::from_documents(docs)
}

/// model_a: four separated clusters in the first two coordinates, noise in
/// the rest; class structure sits in the top principal components.
fn model_a_vectors(rng: &mut StdRng, corpus: &Corpus) -> Vec<Vec<f64>> {
    let centers = [(0.0, 0.0), (40.0, 0.0), (0.0, 40.0), (40.0, 40.0)];
    corpus
        .documents
        .iter()
        .map(|doc| {
            let ci = CellId::ALL.iter().position(|c| *c == doc.cell).unwrap();
            let mut v = vec![
                centers[ci].0 + 0.8 * gaussian(rng),
                centers[ci].1 + 0.8 * gaussian(rng),
            ];
            for _ in 2..DIM {
                v.push(2.0 * gaussian(rng));
            }
            v
        })
        .collect()
}

/// model_b: concentric cells, spread 4/3/2/1 on a shared 2-D shape.
fn model_b_vectors(rng: &mut StdRng, corpus: &Corpus) -> Vec<Vec<f64>> {
    corpus
        .documents
        .iter()
        .map(|doc| {
            let sigma = match doc.cell {
                CellId::FeneonGen => 4.0,
                CellId::FeneonRef => 3.0,
                CellId::QueneauRef => 2.0,
                CellId::QueneauGen => 1.0,
            };
            (0..DIM)
                .map(|d| {
                    let scale = if d < 2 { 1.0 } else { 0.05 };
                    sigma * scale * gaussian(rng)
                })
                .collect()
        })
        .collect()
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    std::fs::create_dir_all(&dir).expect("fixture dir");

    let mut rng = StdRng::seed_from_u64(20240601);
    let corpus = build_corpus(&mut rng);
    save_manifest(&corpus, &dir.join("corpus.jsonl")).expect("write corpus");

    let ids: Vec<String> = corpus.documents.iter().map(|d| d.doc_id.clone()).collect();
    let a = EmbeddingSet::new("model_a".into(), ids.clone(), model_a_vectors(&mut rng, &corpus))
        .expect("model_a set");
    export_embeddings(&a, &dir.join("model_a.jsonl")).expect("write model_a");
    let b = EmbeddingSet::new("model_b".into(), ids, model_b_vectors(&mut rng, &corpus))
        .expect("model_b set");
    export_embeddings(&b, &dir.join("model_b.jsonl")).expect("write model_b");

    let config = r#"# Demo pipeline configuration. Paths are relative to this file.

[corpus]
manifest = "corpus.jsonl"
languages = ["fr"]

[run]
out_dir = "out"
cache_dir = ".cache"
seed = 0

[[models]]
id = "model_a"
import = { fr = "model_a.jsonl" }

[[models]]
id = "model_b"
import = { fr = "model_b.jsonl" }

[sweep]
dims = [2, 3, 5, 10]
include_full_d = true
k = 4
restarts = 10

[umap]
target_dim = 2
n_neighbors = 15
min_dist = 0.1
n_epochs = 200
negative_sample_rate = 5
learning_rate = 1.0

[dispersion]
n_seeds = 6
test = "welch"

[delta]
pairing = "cartesian"
"#;
    std::fs::write(dir.join("demo.toml"), config).expect("write config");
    println!("fixture written to {}", dir.display());
}
