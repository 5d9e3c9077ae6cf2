//! Rule-strict row generation.
//!
//! For each label in id order, candidate rows are emitted and checked until
//! the label's count is reached; failing candidates are discarded and
//! redrawn. The assembled dataset then goes through the quota stage. Output
//! order is by label, then emission order, unless `shuffle` is set.
//!
//! Random streams (all derived from the master seed):
//!
//! | stage                 | tag                                   |
//! |-----------------------|---------------------------------------|
//! | emission for label L  | `emit/label=L`                        |
//! | protected quota       | `quota/wlan.fc.protected/{mgmt,data}/label=L` |
//! | post-flag quota       | `quota/wlan.fc.{retry,pwrmgt,moredata}/label=L` |
//! | final shuffle         | `shuffle`                             |

mod check;
mod emit;
mod quota;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use check::{check, RuleId, ValidationReport, Violation};
pub use emit::{emit_row, EmitError};
pub use quota::{
    apply_label_overrides, enforce_quotas, match_percent, quota_count, stage_tag, MatchOutcome,
    QuotaFlag, QuotaReport, QuotaStage,
};

use crate::ruleset::Ruleset;
use crate::sampler::Prng;
use crate::schema::{Dataset, Label};

pub const DEFAULT_MAX_ATTEMPTS_PER_ROW: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub ruleset: Ruleset,
    pub total_rows: u64,
    pub seed: u64,
    pub max_attempts_per_row: u64,
    /// Shuffle the final row order with the `shuffle` stream.
    pub shuffle: bool,
}

impl GenerationConfig {
    /// Rows = the ruleset's label-count total, default attempt budget.
    pub fn new(ruleset: Ruleset, seed: u64) -> Self {
        let total_rows = ruleset.total_rows();
        GenerationConfig {
            ruleset,
            total_rows,
            seed,
            max_attempts_per_row: DEFAULT_MAX_ATTEMPTS_PER_ROW,
            shuffle: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("total_rows {total_rows} does not equal the label-count sum {label_sum}")]
    RowCountMismatch { total_rows: u64, label_sum: u64 },
    #[error("max_attempts_per_row must be at least 1")]
    ZeroAttempts,
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(
        "infeasible ruleset: label {label} row {row} rejected {attempts} times \
         (last violations: {last})"
    )]
    Infeasible {
        label: Label,
        row: u64,
        attempts: u64,
        last: String,
    },
    #[error("{count} rows fail check after the quota stage (first: {first})")]
    PostQuotaViolation { count: usize, first: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelStats {
    pub rows: u64,
    pub attempts: u64,
    pub rejections: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub seed: u64,
    pub total_rows: u64,
    pub attempts: u64,
    pub by_label: BTreeMap<Label, LabelStats>,
    /// Rejected candidates per violated rule; a candidate violating several
    /// rules counts once under each.
    pub rejections_by_rule: BTreeMap<String, u64>,
    pub quota: QuotaReport,
    pub quota_diagnostics: Vec<String>,
    pub shuffled: bool,
}

/// Produces exactly `label_counts[l]` rule-compliant rows per label.
pub fn generate(cfg: &GenerationConfig) -> Result<(Dataset, GenerationStats), GenerateError> {
    let rs = &cfg.ruleset;
    let label_sum = rs.total_rows();
    if cfg.total_rows != label_sum {
        return Err(GenerateError::RowCountMismatch {
            total_rows: cfg.total_rows,
            label_sum,
        });
    }
    if cfg.max_attempts_per_row == 0 {
        return Err(GenerateError::ZeroAttempts);
    }

    let master = Prng::new(cfg.seed);
    let mut rows = Vec::with_capacity(label_sum as usize);
    let mut by_label = BTreeMap::new();
    let mut rejections_by_rule: BTreeMap<String, u64> =
        RuleId::ALL.iter().map(|r| (r.to_string(), 0)).collect();
    let mut attempts_total = 0;

    for label in Label::ALL {
        let mut rng = master.stage(&format!("emit/label={label}"));
        let target = rs.count(label);
        let mut stats = LabelStats {
            rows: 0,
            attempts: 0,
            rejections: 0,
        };
        while stats.rows < target {
            let mut tries = 0;
            loop {
                tries += 1;
                stats.attempts += 1;
                let candidate = emit_row(rs, label, &mut rng)?;
                let report = check(rs, &candidate);
                if report.valid() {
                    rows.push(candidate);
                    break;
                }
                stats.rejections += 1;
                for v in &report.violations {
                    *rejections_by_rule.entry(v.rule.to_string()).or_default() += 1;
                }
                if tries >= cfg.max_attempts_per_row {
                    let last = report
                        .violations
                        .iter()
                        .map(|v| format!("{}: {}", v.rule, v.detail))
                        .collect::<Vec<_>>()
                        .join("; ");
                    return Err(GenerateError::Infeasible {
                        label,
                        row: stats.rows,
                        attempts: tries,
                        last,
                    });
                }
            }
            stats.rows += 1;
        }
        attempts_total += stats.attempts;
        by_label.insert(label, stats);
    }

    let (mut ds, quota) = enforce_quotas(rs, Dataset::new(rows), &master);

    let failing: Vec<_> = ds
        .rows
        .iter()
        .map(|r| check(rs, r))
        .filter(|rep| !rep.valid())
        .collect();
    if let Some(first) = failing.first() {
        return Err(GenerateError::PostQuotaViolation {
            count: failing.len(),
            first: first.violations[0].rule.to_string(),
        });
    }

    if cfg.shuffle {
        master.stage("shuffle").shuffle(&mut ds.rows);
    }

    let quota_diagnostics = quota.diagnostics();
    let stats = GenerationStats {
        seed: cfg.seed,
        total_rows: cfg.total_rows,
        attempts: attempts_total,
        by_label,
        rejections_by_rule,
        quota,
        quota_diagnostics,
        shuffled: cfg.shuffle,
    };
    Ok((ds, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csv::encode_csv_to_vec;
    use crate::fixtures::{self, dist};

    #[test]
    fn exact_label_counts() {
        let rs = fixtures::reference_ruleset();
        let (ds, stats) = generate(&GenerationConfig::new(rs, 1)).unwrap();
        assert_eq!(ds.len(), 1000);
        assert_eq!(ds.count_label(Label::Normal), 970);
        assert_eq!(ds.count_label(Label::Flooding), 20);
        assert_eq!(ds.count_label(Label::Impersonation), 10);
        assert_eq!(stats.by_label[&Label::Normal].rows, 970);
        // Reference ruleset is consistent, so nothing is rejected.
        assert_eq!(stats.attempts, 1000);
    }

    #[test]
    fn rows_ordered_by_label() {
        let (ds, _) = generate(&GenerationConfig::new(fixtures::reference_ruleset(), 3)).unwrap();
        assert!(ds.rows.windows(2).all(|w| w[0].label <= w[1].label));
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = GenerationConfig::new(fixtures::reference_ruleset(), 77);
        let a = encode_csv_to_vec(&generate(&cfg).unwrap().0);
        let b = encode_csv_to_vec(&generate(&cfg).unwrap().0);
        assert_eq!(a, b);
        let other = GenerationConfig::new(fixtures::reference_ruleset(), 78);
        assert_ne!(a, encode_csv_to_vec(&generate(&other).unwrap().0));
    }

    #[test]
    fn shuffle_permutes_rows() {
        let mut cfg = GenerationConfig::new(fixtures::reference_ruleset(), 5);
        let (plain, _) = generate(&cfg).unwrap();
        cfg.shuffle = true;
        let (shuffled, stats) = generate(&cfg).unwrap();
        assert!(stats.shuffled);
        assert_ne!(plain.rows, shuffled.rows);
        let mut a = plain.rows.clone();
        let mut b = shuffled.rows.clone();
        let key = |r: &crate::schema::FrameRecord| crate::schema::Field::ALL.map(|f| r.get(f));
        a.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(a, b);
    }

    #[test]
    fn rejection_is_counted() {
        let mut rs = fixtures::reference_ruleset();
        rs.radiotap.tsft_for_length.get_mut(&64).unwrap().bern = 0.5;
        let (ds, stats) = generate(&GenerationConfig::new(rs.clone(), 8)).unwrap();
        assert!(ds.rows.iter().all(|r| check(&rs, r).valid()));
        assert!(stats.rejections_by_rule[&RuleId::TsftLength64.to_string()] > 0);
        assert_eq!(stats.by_label.values().map(|s| s.rows).sum::<u64>(), 1000);
    }

    #[test]
    fn always_rejected_rows_are_infeasible() {
        let mut rs = fixtures::reference_ruleset();
        rs.radiotap.length_mix_percent = dist(&[(64, 100.0)]);
        rs.radiotap.tsft_for_length.get_mut(&64).unwrap().bern = 1.0;
        let mut cfg = GenerationConfig::new(rs, 1);
        cfg.max_attempts_per_row = 50;
        match generate(&cfg) {
            Err(GenerateError::Infeasible {
                label, attempts, ..
            }) => {
                assert_eq!(label, Label::Normal);
                assert_eq!(attempts, 50);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_precondition_errors() {
        let rs = fixtures::reference_ruleset();
        let mut cfg = GenerationConfig::new(rs, 1);
        cfg.total_rows = 999;
        assert!(matches!(
            generate(&cfg),
            Err(GenerateError::RowCountMismatch { .. })
        ));
        cfg.total_rows = 1000;
        cfg.max_attempts_per_row = 0;
        assert!(matches!(generate(&cfg), Err(GenerateError::ZeroAttempts)));
    }
}
