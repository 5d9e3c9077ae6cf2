use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use wifisynth::fidelity::{pca_fit, symmetric_eigen, PcaModel};
use wifisynth::{fixtures, generate, GenerationConfig, FEATURE_COUNT};

/// nalgebra's decomposition, sorted descending with the same sign rule.
fn oracle(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let e = SymmetricEigen::new(dm);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let vals = idx.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = idx
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = (0..n).map(|i| e.eigenvectors[(i, k)]).collect();
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (vals, vecs)
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |raw| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (raw[i * n + j] + raw[j * n + i]) / 2.0)
                    .collect()
            })
            .collect()
    })
}

fn max_gap_below(vals: &[f64]) -> f64 {
    vals.windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn eigen_matches_nalgebra(m in (2usize..9).prop_flat_map(symmetric)) {
        let (vals, vecs) = symmetric_eigen(&m);
        let (ov, ovecs) = oracle(&m);
        for (a, b) in vals.iter().zip(&ov) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
        // Vectors are only defined up to rotation within repeated eigenvalues.
        if max_gap_below(&ov) > 1e-3 {
            for (a, b) in vecs.iter().zip(&ovecs) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a, b);
                }
            }
        }
        for a in 0..m.len() {
            for b in 0..m.len() {
                let dot: f64 = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| x * y).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - id).abs() < 1e-9);
            }
        }
    }
}

fn data() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..7).prop_flat_map(|p| {
        prop::collection::vec(prop::collection::vec(-50.0f64..50.0, p), p + 2..40)
    })
}

proptest! {
    #[test]
    fn pca_fit_matches_full_eigendecomposition(x in data()) {
        let p = x[0].len();
        let n = x.len() as f64;
        let dm = DMatrix::from_fn(x.len(), p, |i, j| x[i][j]);
        let centered = DMatrix::from_fn(x.len(), p, |i, j| x[i][j] - dm.column(j).mean());
        let cov = centered.transpose() * &centered / (n - 1.0);
        let m: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| cov[(i, j)]).collect()).collect();
        let (ov, ovecs) = oracle(&m);
        let fit = pca_fit(&x, p).unwrap();
        prop_assert!(fit.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((fit.explained_variance.iter().sum::<f64>() - cov.trace()).abs() < 1e-9 * cov.trace().max(1.0));
        for k in 0..p {
            prop_assert!((fit.explained_variance[k] - ov[k]).abs() < 1e-8 * ov[0].max(1.0));
        }
        if max_gap_below(&ov) > 1e-3 * ov[0].max(1.0) {
            for (a, b) in fit.components.iter().zip(&ovecs) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a, b);
                }
            }
        }
        for a in 0..p {
            for b in 0..p {
                let dot: f64 = fit.components[a].iter().zip(&fit.components[b]).map(|(x, y)| x * y).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - id).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pca_on_generated_data_matches_nalgebra() {
    let (ds, _) = generate(&GenerationConfig::new(fixtures::reference_ruleset(), 6)).unwrap();
    let rows: Vec<[f64; FEATURE_COUNT]> = ds.rows.iter().map(|r| r.features()).collect();
    let model = PcaModel::fit(&rows, 4).unwrap();

    // Independent correlation matrix: z-scores with ddof = 1, then ZᵀZ/(n-1).
    let keep: Vec<usize> = model.retained.iter().map(|f| f.column()).collect();
    let n = rows.len() as f64;
    let z = DMatrix::from_fn(rows.len(), keep.len(), |i, j| {
        let c = keep[j];
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let sd = (rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        (rows[i][c] - mean) / sd
    });
    let corr = z.transpose() * &z / (n - 1.0);
    let m: Vec<Vec<f64>> = (0..keep.len())
        .map(|i| (0..keep.len()).map(|j| corr[(i, j)]).collect())
        .collect();
    let (ov, ovecs) = oracle(&m);
    for k in 0..4 {
        assert!((model.explained_variance[k] - ov[k]).abs() < 1e-8);
        for (x, y) in model.components[k].iter().zip(&ovecs[k]) {
            assert!((x - y).abs() < 1e-8);
        }
    }
    // WᵀW = I for the kept components.
    for a in 0..4 {
        for b in 0..4 {
            let dot: f64 = model.components[a]
                .iter()
                .zip(&model.components[b])
                .map(|(x, y)| x * y)
                .sum();
            assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-9);
        }
    }
    // Constant columns in the reference data are dropped, not scaled by zero.
    assert!(model.dropped.iter().all(|f| {
        let c = f.column();
        rows.iter().all(|r| r[c] == rows[0][c])
    }));
}
