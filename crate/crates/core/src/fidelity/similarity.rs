use serde::Serialize;

use super::FidelityError;
use crate::sampler::Prng;
use crate::schema::{Dataset, FrameRecord, FEATURE_COUNT};

/// A row's 16 feature values, label excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    /// Zero-padded from a shorter slice; panics if longer than 16.
    pub fn from_slice(values: &[f64]) -> Self {
        assert!(values.len() <= FEATURE_COUNT, "too many components");
        let mut out = [0.0; FEATURE_COUNT];
        out[..values.len()].copy_from_slice(values);
        FeatureVector(out)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl From<&FrameRecord> for FeatureVector {
    fn from(r: &FrameRecord) -> Self {
        FeatureVector(r.features())
    }
}

pub fn cosine_similarity(a: &FeatureVector, b: &FeatureVector) -> Result<f64, FidelityError> {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(FidelityError::ZeroNorm);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn euclidean_distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilaritySummary {
    pub metric: String,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub pairs: usize,
}

impl SimilaritySummary {
    pub fn from_values(metric: &str, values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        } else {
            sorted[mid]
        };
        Some(SimilaritySummary {
            metric: metric.to_string(),
            mean,
            median,
            std: var.sqrt(),
            pairs: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseSimilarity {
    pub euclidean: SimilaritySummary,
    pub cosine: SimilaritySummary,
    /// Pairs left out of the cosine summary because a vector had zero norm.
    pub cosine_skipped_zero_norm: usize,
}

/// Stream tag used to draw the row samples for pairing and PCA.
pub const SAMPLE_TAG: &str = "fidelity/sample";

/// `sample_size` row indices from a dataset of `rows` rows. Both datasets
/// use the same stream, so equal-length datasets get identical index
/// sequences.
pub fn sample_rows(rows: usize, sample_size: usize, seed: u64) -> Vec<usize> {
    Prng::for_stage(seed, SAMPLE_TAG).sample_indices(rows, sample_size)
}

/// The `(real, synthetic)` row pairs used by the pairwise summary.
pub fn sample_pairs<'a>(
    real: &'a Dataset,
    synthetic: &'a Dataset,
    sample_size: usize,
    seed: u64,
) -> Result<Vec<(&'a FrameRecord, &'a FrameRecord)>, FidelityError> {
    for (which, ds) in [("real", real), ("synthetic", synthetic)] {
        if ds.is_empty() {
            return Err(FidelityError::EmptyDataset(which));
        }
        if sample_size > ds.len() {
            return Err(FidelityError::SampleTooLarge {
                which,
                sample_size,
                rows: ds.len(),
            });
        }
    }
    if sample_size == 0 {
        return Err(FidelityError::ZeroSample);
    }
    let ri = sample_rows(real.len(), sample_size, seed);
    let si = sample_rows(synthetic.len(), sample_size, seed);
    Ok(ri
        .into_iter()
        .zip(si)
        .map(|(i, j)| (&real.rows[i], &synthetic.rows[j]))
        .collect())
}

/// Mean / median / std of Euclidean distance and cosine similarity over
/// `sample_size` index-wise pairs of seeded uniform row samples, on raw
/// feature values.
pub fn pairwise_similarity_summary(
    real: &Dataset,
    synthetic: &Dataset,
    sample_size: usize,
    seed: u64,
) -> Result<PairwiseSimilarity, FidelityError> {
    let pairs = sample_pairs(real, synthetic, sample_size, seed)?;
    let mut euclid = Vec::with_capacity(pairs.len());
    let mut cosine = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (a, b) in pairs {
        let (a, b) = (FeatureVector::from(a), FeatureVector::from(b));
        euclid.push(euclidean_distance(&a, &b));
        match cosine_similarity(&a, &b) {
            Ok(c) => cosine.push(c),
            Err(_) => skipped += 1,
        }
    }
    Ok(PairwiseSimilarity {
        euclidean: SimilaritySummary::from_values("euclidean", &euclid)
            .expect("sample is nonempty"),
        cosine: SimilaritySummary::from_values("cosine", &cosine)
            .ok_or(FidelityError::NoCosinePairs)?,
        cosine_skipped_zero_norm: skipped,
    })
}
