//! Renderers for the emitted tables. CSV shapes mirror the report layout:
//! sweep = model rows x dimensionality columns with mean/median footers;
//! hypotheses = model rows x five named predictions with star columns;
//! ground frequencies = feature rows x two comparisons; correlations =
//! feature rows with masked cells rendered as "-".

use serde_json::json;

use crate::cluster::{SweepDim, SweepTable};
use crate::corpus::CellId;
use crate::delta::{CorrelationCell, CorrelationMatrix, MaskReason};
use crate::dispersion::{DispersionTable, HypothesisId, HypothesisVerdict};
use crate::stylometry::{GroundFrequencyTable, StyleFeatures, GROUND_TARGETS};

fn dim_label(dim: &SweepDim) -> String {
    match dim {
        SweepDim::Pca(d) => format!("{d}D PCA"),
        SweepDim::FullD => "FullD".to_string(),
    }
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("model");
    for dim in &table.dims {
        out.push_str(&format!(",{}", dim_label(dim)));
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.model_id);
        for s in &row.scores {
            out.push_str(&format!(",{:.4}", s.s_bar));
        }
        out.push('\n');
    }
    out.push_str("Mean");
    for m in &table.mean_sbar {
        out.push_str(&format!(",{m:.4}"));
    }
    out.push('\n');
    out.push_str("Median");
    for m in &table.median_sbar {
        out.push_str(&format!(",{m:.4}"));
    }
    out.push('\n');
    out
}

pub fn sweep_json(table: &SweepTable) -> serde_json::Value {
    json!({
        "dims": table.dims.iter().map(dim_label).collect::<Vec<_>>(),
        "rows": table.rows.iter().map(|row| json!({
            "model_id": row.model_id,
            "scores": row.scores.iter().zip(&table.dims).map(|(s, d)| json!({
                "dim": dim_label(d),
                "purity": s.purity,
                "nmi": s.nmi,
                "s_bar": s.s_bar,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "mean_s_bar": table.mean_sbar,
        "median_s_bar": table.median_sbar,
        "dim_ranking": table.dim_ranking.iter().map(|&i| dim_label(&table.dims[i])).collect::<Vec<_>>(),
    })
}

/// PASS when the predicted direction holds, FAIL otherwise; the star column
/// carries the significance of the underlying two-sided test either way.
pub fn hypotheses_csv(rows: &[(String, Vec<HypothesisVerdict>)]) -> String {
    let mut out = String::from("model");
    for id in HypothesisId::ALL {
        out.push_str(&format!(",{label},{label}_stars", label = id.label()));
    }
    out.push('\n');
    for (model, verdicts) in rows {
        out.push_str(model);
        for id in HypothesisId::ALL {
            let v = verdicts.iter().find(|v| v.id == id).expect("all five verdicts present");
            out.push_str(&format!(
                ",{},{}",
                if v.direction_ok { "PASS" } else { "FAIL" },
                v.stars.as_str()
            ));
        }
        out.push('\n');
    }
    out
}

pub fn hypotheses_json(rows: &[(String, Vec<HypothesisVerdict>)]) -> serde_json::Value {
    json!(rows
        .iter()
        .map(|(model, verdicts)| json!({
            "model_id": model,
            "verdicts": verdicts.iter().map(|v| json!({
                "hypothesis": v.id.label(),
                "lhs_cell": v.lhs_cell,
                "rhs_cell": v.rhs_cell,
                "direction_ok": v.direction_ok,
                "t": v.t_stat,
                "p": v.p_value,
                "stars": v.stars.as_str(),
            })).collect::<Vec<_>>(),
        }))
        .collect::<Vec<_>>())
}

/// Terminal rendering of one model's verdict row, with glyphs.
pub fn hypotheses_terminal_row(model: &str, verdicts: &[HypothesisVerdict]) -> String {
    let cells: Vec<String> = HypothesisId::ALL
        .iter()
        .map(|id| {
            let v = verdicts.iter().find(|v| v.id == *id).expect("all five verdicts present");
            format!("{}{}", if v.direction_ok { "✓" } else { "✗" }, v.stars.as_str())
        })
        .collect();
    format!("{model:<28} {}", cells.join("  "))
}

pub fn ground_csv(table: &GroundFrequencyTable) -> String {
    let mut out = String::from(
        "feature,QUENEAU_GEN_mean,QUENEAU_REF_mean,FENEON_REF_mean,\
         to_QUENEAU_REF,to_QUENEAU_REF_p,to_QUENEAU_REF_stars,\
         to_FENEON_REF,to_FENEON_REF_p,to_FENEON_REF_stars\n",
    );
    for (gi, group) in table.groups.iter().enumerate() {
        out.push_str(group);
        for cell in [CellId::QueneauGen, CellId::QueneauRef, CellId::FeneonRef] {
            out.push_str(&format!(",{:.6}", table.cell_means[&cell][gi]));
        }
        for target in GROUND_TARGETS {
            let shift = &table.comparisons[&target][gi];
            out.push_str(&format!(
                ",{},{:.4e},{}",
                shift.arrow.as_str(),
                shift.p_value,
                shift.stars.as_str()
            ));
        }
        out.push('\n');
    }
    out
}

pub fn correlations_csv(matrices: &[CorrelationMatrix], groups: &[String]) -> String {
    let mut out = String::from("feature");
    for m in matrices {
        let label = format!("{}_vs_{}", m.x_cell.label(), m.y_cell.label());
        out.push_str(&format!(",{label}_r,{label}_p,{label}_stars,{label}_n"));
    }
    out.push('\n');
    for (gi, group) in groups.iter().enumerate() {
        out.push_str(group);
        for m in matrices {
            match &m.cells[gi] {
                CorrelationCell::Masked { reason } => {
                    let why = match reason {
                        MaskReason::GroundNotSignificant => "-",
                        MaskReason::ZeroVariance => "- (zero variance)",
                    };
                    out.push_str(&format!(",{why},,,"));
                }
                CorrelationCell::Value { r, p, stars, n } => {
                    out.push_str(&format!(",{r:.4},{p:.4e},{},{n}", stars.as_str()));
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn features_csv(rows: &[FeatureRow]) -> String {
    let mut out = String::from(
        "doc_id,cell,function_words,indexes,letters,ner,numbers,punctuation,structural,tag,\
         mean_word_length,mean_syllables_per_word,mean_sentence_length,\
         yules_k,shannon_entropy,flesch_kincaid,ner_low_confidence,tag_low_confidence\n",
    );
    for row in rows {
        let f = &row.features;
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            row.doc_id,
            row.cell.label(),
            f.function_words,
            f.indexes,
            f.letters,
            f.ner,
            f.numbers,
            f.punctuation,
            f.structural,
            f.tag,
            f.subfeatures.mean_word_length,
            f.subfeatures.mean_syllables_per_word,
            f.subfeatures.mean_sentence_length,
            f.subfeatures.yules_k,
            f.subfeatures.shannon_entropy,
            f.subfeatures.flesch_kincaid,
            f.ner_low_confidence,
            f.tag_low_confidence,
        ));
    }
    out
}

/// Per-document feature record persisted between the stylometry and
/// correlation stages.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FeatureRow {
    pub doc_id: String,
    pub cell: CellId,
    pub features: StyleFeatures,
}

/// Dispersion artifact persisted per (language, model).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DispersionArtifact {
    pub model_id: String,
    pub language: String,
    pub table: DispersionTable,
    pub verdicts: Vec<HypothesisVerdict>,
}
