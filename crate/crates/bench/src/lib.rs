//! Shared workloads for the benchmarks.

use wifisynth::{fixtures, generate, Dataset, GenerationConfig, Ruleset};

/// The reference ruleset rescaled to `rows` rows.
pub fn scaled_reference(rows: u64) -> Ruleset {
    let rs = fixtures::reference_ruleset();
    let counts = rs.rescaled_counts(rows);
    rs.with_counts(counts)
}

pub fn dataset(rows: u64, seed: u64) -> Dataset {
    generate(&GenerationConfig::new(scaled_reference(rows), seed))
        .expect("reference ruleset generates")
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use wifisynth::Label;

    #[test]
    fn workloads_have_requested_size() {
        let rs = scaled_reference(100_000);
        assert_eq!(rs.count(Label::Normal), 97_000);
        assert_eq!(dataset(2_000, 1).len(), 2_000);
    }
}
