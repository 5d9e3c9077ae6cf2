use proptest::prelude::*;
use wifisynth::fidelity::{
    cosine_similarity, euclidean_distance, pairwise_similarity_summary, sample_pairs, FeatureVector,
};
use wifisynth::{fixtures, generate, GenerationConfig};

fn vector() -> impl Strategy<Value = FeatureVector> {
    prop::array::uniform16(-1000.0f64..1000.0).prop_map(FeatureVector)
}

proptest! {
    #[test]
    fn cosine_is_scale_invariant(a in vector(), b in vector(), k in 0.01f64..100.0) {
        prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
        let scaled = FeatureVector(a.0.map(|x| x * k));
        let c = cosine_similarity(&a, &b).unwrap();
        prop_assert!((c - cosine_similarity(&scaled, &b).unwrap()).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&c));
    }

    #[test]
    fn euclidean_is_a_metric(a in vector(), b in vector(), c in vector()) {
        let ab = euclidean_distance(&a, &b);
        prop_assert_eq!(ab, euclidean_distance(&b, &a));
        prop_assert_eq!(euclidean_distance(&a, &a), 0.0);
        prop_assert!(euclidean_distance(&a, &c) <= ab + euclidean_distance(&b, &c) + 1e-9);
    }
}

#[test]
fn summary_matches_recomputation_over_the_same_pairs() {
    let rs = fixtures::reference_ruleset();
    let a = generate(&GenerationConfig::new(rs.clone(), 1)).unwrap().0;
    let b = generate(&GenerationConfig::new(rs, 2)).unwrap().0;
    let s = pairwise_similarity_summary(&a, &b, 1000, 17).unwrap();
    let pairs = sample_pairs(&a, &b, 1000, 17).unwrap();
    assert_eq!(pairs.len(), 1000);

    let mut d: Vec<f64> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    for (x, y) in &pairs {
        let (x, y) = (x.features(), y.features());
        d.push(
            x.iter()
                .zip(&y)
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt(),
        );
        let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
        let ny = y.iter().map(|p| p * p).sum::<f64>().sqrt();
        c.push(dot / (nx * ny));
    }
    let stats = |v: &mut Vec<f64>| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        v.sort_by(f64::total_cmp);
        let median = (v[499] + v[500]) / 2.0;
        (mean, median, std)
    };
    let (dm, dmed, dsd) = stats(&mut d);
    let (cm, cmed, csd) = stats(&mut c);
    let eq = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1.0);
    assert!(eq(s.euclidean.mean, dm) && eq(s.euclidean.median, dmed) && eq(s.euclidean.std, dsd));
    assert!(eq(s.cosine.mean, cm) && eq(s.cosine.median, cmed) && eq(s.cosine.std, csd));
    assert_eq!(s, pairwise_similarity_summary(&a, &b, 1000, 17).unwrap());
    assert_ne!(s, pairwise_similarity_summary(&a, &b, 1000, 18).unwrap());
}
