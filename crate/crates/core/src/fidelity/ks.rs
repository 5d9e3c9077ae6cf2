use serde::Serialize;

use super::FidelityError;
use crate::schema::{Dataset, Field};

/// Empirical CDF over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Result<Self, FidelityError> {
        if sample.is_empty() {
            return Err(FidelityError::EmptySample);
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(FidelityError::NanInSample);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// `(value, F(value))` at each distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, v) in self.sorted.iter().enumerate() {
            let h = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == *v => last.1 = h,
                _ => out.push((*v, h)),
            }
        }
        out
    }
}

/// Two-sample KS distance, exact: the largest ECDF gap over the merged
/// sample points.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, FidelityError> {
    let fa = Ecdf::new(a)?;
    let fb = Ecdf::new(b)?;
    Ok(ks_between(&fa, &fb))
}

fn ks_between(fa: &Ecdf, fb: &Ecdf) -> f64 {
    let (xa, xb) = (&fa.sorted, &fb.sorted);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    // Integer gap |i*nb - j*na| / (na*nb) avoids float drift on ties.
    let mut best: u128 = 0;
    while i < na && j < nb {
        let x = if xa[i] <= xb[j] { xa[i] } else { xb[j] };
        while i < na && xa[i] == x {
            i += 1;
        }
        while j < nb && xb[j] == x {
            j += 1;
        }
        let gap = (i as u128 * nb as u128).abs_diff(j as u128 * na as u128);
        best = best.max(gap);
    }
    best as f64 / (na as f64 * nb as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureKs {
    pub feature: Field,
    pub d: f64,
}

/// KS distance for each of the 16 feature columns, in column order.
pub fn ks_by_feature(real: &Dataset, synthetic: &Dataset) -> Result<Vec<FeatureKs>, FidelityError> {
    Field::features()
        .iter()
        .map(|f| {
            let d = ks_statistic(&real.column(*f), &synthetic.column(*f))?;
            Ok(FeatureKs { feature: *f, d })
        })
        .collect()
}

/// Per-feature KS sorted by distance, largest first, truncated to `k`.
/// Ties keep column order.
pub fn ks_per_feature(
    real: &Dataset,
    synthetic: &Dataset,
    k: usize,
) -> Result<Vec<FeatureKs>, FidelityError> {
    Ok(rank_ks(ks_by_feature(real, synthetic)?, k))
}

pub fn rank_ks(mut all: Vec<FeatureKs>, k: usize) -> Vec<FeatureKs> {
    all.sort_by(|a, b| b.d.total_cmp(&a.d));
    all.truncate(k);
    all
}
