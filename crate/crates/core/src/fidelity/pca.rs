use std::io::{self, Write};

use serde::Serialize;

use super::similarity::sample_rows;
use super::FidelityError;
use crate::schema::{Dataset, Field, FEATURE_COUNT};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors (`vectors[k]` pairs with `values[k]`). Each vector's
/// largest-magnitude component is made positive; on a tie the first wins.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    assert!(matrix.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][k]).collect();
            let lead = col
                .iter()
                .copied()
                .reduce(|best, x| if x.abs() > best.abs() { x } else { best })
                .unwrap_or(0.0);
            if lead < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    /// Top-k unit eigenvectors of the sample covariance, strongest first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Trace of the covariance matrix.
    pub total_variance: f64,
}

/// Sample covariance (n - 1 denominator) of `x`, then its top `k`
/// eigenpairs. Callers standardize first.
#[allow(clippy::needless_range_loop)]
pub fn pca_fit(x: &[Vec<f64>], k: usize) -> Result<PcaFit, FidelityError> {
    if k == 0 {
        return Err(FidelityError::ZeroComponents);
    }
    let p = x.first().map_or(0, Vec::len);
    if k > p {
        return Err(FidelityError::TooManyComponents {
            requested: k,
            available: p,
        });
    }
    let n = x.len();
    if n <= k || n < 2 {
        return Err(FidelityError::TooFewRows { rows: n });
    }
    assert!(x.iter().all(|r| r.len() == p), "ragged matrix");
    let nf = n as f64;
    let mean: Vec<f64> = (0..p)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf)
        .collect();
    let mut cov = vec![vec![0.0; p]; p];
    for r in x {
        for a in 0..p {
            let da = r[a] - mean[a];
            for b in a..p {
                cov[a][b] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            cov[a][b] /= nf - 1.0;
            cov[b][a] = cov[a][b];
        }
    }
    let total_variance = (0..p).map(|i| cov[i][i]).sum();
    let (values, vectors) = symmetric_eigen(&cov);
    Ok(PcaFit {
        components: vectors.into_iter().take(k).collect(),
        explained_variance: values[..k].to_vec(),
        total_variance,
    })
}

/// Per-feature z-scoring (sample standard deviation) plus a projection onto
/// the leading eigenvectors of the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    /// Means of all 16 features.
    pub mean: Vec<f64>,
    /// Sample standard deviations of all 16 features.
    pub scale: Vec<f64>,
    /// Features with nonzero variance, used in the projection.
    pub retained: Vec<Field>,
    /// Constant features, left out.
    pub dropped: Vec<Field>,
    /// `components[k][i]`: weight of `retained[i]` in component k.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalue of each kept component.
    pub explained_variance: Vec<f64>,
    /// Eigenvalue over the sum of all eigenvalues.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn fit(rows: &[[f64; FEATURE_COUNT]], components: usize) -> Result<Self, FidelityError> {
        if components == 0 {
            return Err(FidelityError::ZeroComponents);
        }
        let n = rows.len();
        if n < 2 {
            return Err(FidelityError::TooFewRows { rows: n });
        }
        let nf = n as f64;
        let mut mean = vec![0.0; FEATURE_COUNT];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut scale = vec![0.0; FEATURE_COUNT];
        for r in rows {
            for ((s, x), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        scale.iter_mut().for_each(|s| *s = (*s / (nf - 1.0)).sqrt());

        let features = Field::features();
        let keep: Vec<usize> = (0..FEATURE_COUNT).filter(|&i| scale[i] > 0.0).collect();
        let retained: Vec<Field> = keep.iter().map(|&i| features[i]).collect();
        let dropped: Vec<Field> = (0..FEATURE_COUNT)
            .filter(|&i| scale[i] == 0.0)
            .map(|i| features[i])
            .collect();
        if components > keep.len() {
            return Err(FidelityError::TooManyComponents {
                requested: components,
                available: keep.len(),
            });
        }

        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| keep.iter().map(|&i| (r[i] - mean[i]) / scale[i]).collect())
            .collect();
        let fit = pca_fit(&z, components)?;
        let total = fit.total_variance;
        Ok(PcaModel {
            mean,
            scale,
            retained,
            dropped,
            explained_variance_ratio: fit.explained_variance.iter().map(|v| v / total).collect(),
            components: fit.components,
            explained_variance: fit.explained_variance,
        })
    }

    pub fn transform(&self, row: &[f64; FEATURE_COUNT]) -> Vec<f64> {
        let z: Vec<f64> = self
            .retained
            .iter()
            .map(|f| {
                let i = f.column();
                (row[i] - self.mean[i]) / self.scale[i]
            })
            .collect();
        self.components
            .iter()
            .map(|w| w.iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Real,
    Synthetic,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Real => "real",
            Source::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedRow {
    pub source: Source,
    pub label: i64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTable {
    pub model: PcaModel,
    pub rows: Vec<ProjectedRow>,
}

impl ProjectionTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let k = self.model.components.len();
        let mut header = String::from("source,label");
        for c in 1..=k {
            header.push_str(&format!(",z{c}"));
        }
        writeln!(out, "{header}")?;
        for r in &self.rows {
            write!(out, "{},{}", r.source.name(), r.label)?;
            for z in &r.coords {
                write!(out, ",{z}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Fits one PCA on the union of equal-size seeded samples from both
/// datasets and projects every sampled row. Real rows come first.
pub fn pca_shared_projection(
    real: &Dataset,
    synthetic: &Dataset,
    components: usize,
    sample_size: usize,
    seed: u64,
) -> Result<ProjectionTable, FidelityError> {
    let mut picked = Vec::with_capacity(2 * sample_size);
    for (which, source, ds) in [
        ("real", Source::Real, real),
        ("synthetic", Source::Synthetic, synthetic),
    ] {
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
        for i in sample_rows(ds.len(), sample_size, seed) {
            picked.push((source, &ds.rows[i]));
        }
    }
    if sample_size == 0 {
        return Err(FidelityError::ZeroSample);
    }
    let features: Vec<[f64; FEATURE_COUNT]> = picked.iter().map(|(_, r)| r.features()).collect();
    let model = PcaModel::fit(&features, components)?;
    let rows = picked
        .iter()
        .zip(&features)
        .map(|((source, r), x)| ProjectedRow {
            source: *source,
            label: r.label,
            coords: model.transform(x),
        })
        .collect();
    Ok(ProjectionTable { model, rows })
}
