//! Real-vs-synthetic comparison: pairwise similarity, per-feature KS and a
//! shared PCA projection.

mod ks;
mod pca;
mod report;
mod similarity;

use thiserror::Error;

pub use ks::{ks_by_feature, ks_per_feature, ks_statistic, rank_ks, Ecdf, FeatureKs};
pub use pca::{
    pca_fit, pca_shared_projection, symmetric_eigen, PcaFit, PcaModel, ProjectedRow,
    ProjectionTable, Source,
};
pub use report::{
    fidelity_report, FidelityOptions, FidelityReport, KsByFeature, Pairing, PcaSummary,
    Preprocessing, PAIRING_SCHEME,
};
pub use similarity::{
    cosine_similarity, euclidean_distance, pairwise_similarity_summary, sample_pairs, sample_rows,
    FeatureVector, PairwiseSimilarity, SimilaritySummary, SAMPLE_TAG,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FidelityError {
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroNorm,
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains NaN")]
    NanInSample,
    #[error("{0} dataset is empty")]
    EmptyDataset(&'static str),
    #[error("sample size {sample_size} exceeds the {rows} rows of the {which} dataset")]
    SampleTooLarge {
        which: &'static str,
        sample_size: usize,
        rows: usize,
    },
    #[error("sample size must be at least 1")]
    ZeroSample,
    #[error("every sampled pair has a zero-norm vector")]
    NoCosinePairs,
    #[error("PCA needs at least 2 rows, got {rows}")]
    TooFewRows { rows: usize },
    #[error("at least one component is required")]
    ZeroComponents,
    #[error("{requested} components requested but only {available} features vary")]
    TooManyComponents { requested: usize, available: usize },
}
