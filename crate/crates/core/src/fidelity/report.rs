use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::ks::{ks_by_feature, rank_ks, FeatureKs};
use super::pca::{pca_shared_projection, ProjectionTable};
use super::similarity::{pairwise_similarity_summary, SimilaritySummary};
use super::FidelityError;
use crate::schema::{Dataset, Field, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityOptions {
    pub sample_size: usize,
    pub seed: u64,
    pub top_k: usize,
    /// Components for the shared PCA; `None` skips it.
    pub pca_components: Option<usize>,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        FidelityOptions {
            sample_size: 1000,
            seed: 0,
            top_k: 5,
            pca_components: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    pub scheme: &'static str,
    pub sample_size: usize,
    pub seed: u64,
    pub real_rows: usize,
    pub synthetic_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preprocessing {
    pub similarity: &'static str,
    pub ks: &'static str,
    pub pca: &'static str,
}

/// Per-feature KS, serialized as an object in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct KsByFeature(pub Vec<FeatureKs>);

impl KsByFeature {
    pub fn get(&self, f: Field) -> Option<f64> {
        self.0.iter().find(|k| k.feature == f).map(|k| k.d)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().map(|k| k.d).fold(0.0, f64::max)
    }
}

impl Serialize for KsByFeature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for k in &self.0 {
            m.serialize_entry(k.feature.name(), &k.d)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaSummary {
    pub components: usize,
    pub sampled_rows: usize,
    pub retained: Vec<Field>,
    pub dropped: Vec<Field>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl From<&ProjectionTable> for PcaSummary {
    fn from(t: &ProjectionTable) -> Self {
        PcaSummary {
            components: t.model.components.len(),
            sampled_rows: t.rows.len(),
            retained: t.model.retained.clone(),
            dropped: t.model.dropped.clone(),
            explained_variance: t.model.explained_variance.clone(),
            explained_variance_ratio: t.model.explained_variance_ratio.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub schema_version: &'static str,
    pub pairing: Pairing,
    pub preprocessing: Preprocessing,
    pub euclidean: SimilaritySummary,
    pub cosine: SimilaritySummary,
    pub cosine_skipped_zero_norm: usize,
    pub ks_by_feature: KsByFeature,
    pub top_k_ks: Vec<FeatureKs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca_projection: Option<PcaSummary>,
}

impl FidelityReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Two plain-text tables: the similarity summary, then the top-k KS list.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.pairing;
        let _ = writeln!(
            out,
            "pairs: {} (seed {}, real rows {}, synthetic rows {})\n",
            p.sample_size, p.seed, p.real_rows, p.synthetic_rows
        );
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12}",
            "metric", "mean", "median", "std"
        );
        for s in [&self.euclidean, &self.cosine] {
            let _ = writeln!(
                out,
                "{:<12} {:>12.6} {:>12.6} {:>12.6}",
                s.metric, s.mean, s.median, s.std
            );
        }
        if self.cosine_skipped_zero_norm > 0 {
            let _ = writeln!(
                out,
                "({} zero-norm pairs left out of cosine)",
                self.cosine_skipped_zero_norm
            );
        }
        let _ = writeln!(out, "\n{:<28} {:>10}", "feature", "ks");
        for k in &self.top_k_ks {
            let _ = writeln!(out, "{:<28} {:>10.6}", k.feature.name(), k.d);
        }
        if let Some(pca) = &self.pca_projection {
            let ratios: Vec<String> = pca
                .explained_variance_ratio
                .iter()
                .map(|r| format!("{r:.4}"))
                .collect();
            let _ = writeln!(
                out,
                "\npca: {} components, explained ratio [{}], {} constant features dropped",
                pca.components,
                ratios.join(", "),
                pca.dropped.len()
            );
        }
        out
    }
}

pub const PAIRING_SCHEME: &str =
    "index-wise pairs of seeded uniform samples drawn without replacement from each dataset";

/// Full real-vs-synthetic comparison. Also returns the projection table when
/// PCA was requested.
pub fn fidelity_report(
    real: &Dataset,
    synthetic: &Dataset,
    opts: &FidelityOptions,
) -> Result<(FidelityReport, Option<ProjectionTable>), FidelityError> {
    let sim = pairwise_similarity_summary(real, synthetic, opts.sample_size, opts.seed)?;
    let all = ks_by_feature(real, synthetic)?;
    let top = rank_ks(all.clone(), opts.top_k);
    let table = match opts.pca_components {
        Some(k) => Some(pca_shared_projection(
            real,
            synthetic,
            k,
            opts.sample_size,
            opts.seed,
        )?),
        None => None,
    };
    let report = FidelityReport {
        schema_version: SCHEMA_VERSION,
        pairing: Pairing {
            scheme: PAIRING_SCHEME,
            sample_size: opts.sample_size,
            seed: opts.seed,
            real_rows: real.len(),
            synthetic_rows: synthetic.len(),
        },
        preprocessing: Preprocessing {
            similarity: "raw feature values",
            ks: "raw feature values, full datasets",
            pca: "z-score with sample std; constant features dropped",
        },
        euclidean: sim.euclidean,
        cosine: sim.cosine,
        cosine_skipped_zero_norm: sim.cosine_skipped_zero_norm,
        ks_by_feature: KsByFeature(all),
        top_k_ks: top,
        pca_projection: table.as_ref().map(PcaSummary::from),
    };
    Ok((report, table))
}
