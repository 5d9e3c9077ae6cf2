//! Post-sampling quota stage: hard locks, then protected-bit quotas on
//! management and data rows, then the retry / pwrmgt / moredata quotas.

use serde::Serialize;

use crate::ruleset::{GuardPredicate, LockRule, PostFlag, Ruleset};
use crate::sampler::Prng;
use crate::schema::{Dataset, Field, FrameRecord, Label};

/// The flag bits a quota stage may adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum QuotaFlag {
    Frag,
    Retry,
    Pwrmgt,
    Moredata,
    Protected,
}

impl QuotaFlag {
    pub fn field(self) -> Field {
        match self {
            QuotaFlag::Frag => Field::WlanFcFrag,
            QuotaFlag::Retry => Field::WlanFcRetry,
            QuotaFlag::Pwrmgt => Field::WlanFcPwrmgt,
            QuotaFlag::Moredata => Field::WlanFcMoredata,
            QuotaFlag::Protected => Field::WlanFcProtected,
        }
    }
}

impl From<PostFlag> for QuotaFlag {
    fn from(f: PostFlag) -> Self {
        match f {
            PostFlag::Retry => QuotaFlag::Retry,
            PostFlag::Pwrmgt => QuotaFlag::Pwrmgt,
            PostFlag::Moredata => QuotaFlag::Moredata,
        }
    }
}

/// `round_half_up(target_percent / 100 * eligible)`, exact for percents
/// with at most six decimal places.
pub fn quota_count(target_percent: f64, eligible: usize) -> usize {
    let micro = (target_percent * 1e6).round().max(0.0) as u128;
    ((2 * micro * eligible as u128 + 100_000_000) / 200_000_000) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchOutcome {
    pub eligible: usize,
    pub desired: usize,
    pub before: usize,
    pub achieved: usize,
    pub modified: usize,
}

impl MatchOutcome {
    /// Rows short of (or in excess of) the target after adjustment.
    pub fn shortfall(&self) -> usize {
        self.desired.abs_diff(self.achieved)
    }
}

/// Sets or clears `flag` on eligible, unguarded rows until the number of
/// eligible rows carrying it equals `quota_count(target, eligible)`.
///
/// Rows are picked in a shuffled order drawn from `rng`. Guarded rows are
/// never modified; when too few modifiable rows exist the closest count is
/// reached and [`MatchOutcome::shortfall`] is nonzero.
pub fn match_percent(
    ds: &mut Dataset,
    flag: QuotaFlag,
    target_percent: f64,
    eligible: impl Fn(&FrameRecord) -> bool,
    guards: &[GuardPredicate],
    rng: &mut Prng,
) -> MatchOutcome {
    let field = flag.field();
    let rows: Vec<usize> = (0..ds.rows.len())
        .filter(|i| eligible(&ds.rows[*i]))
        .collect();
    let desired = quota_count(target_percent, rows.len());
    let before = rows.iter().filter(|i| ds.rows[**i].get(field) == 1).count();

    let (from, to, need) = if before < desired {
        (0, 1, desired - before)
    } else {
        (1, 0, before - desired)
    };
    let mut modified = 0;
    if need > 0 {
        let mut candidates: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|i| {
                let r = &ds.rows[*i];
                r.get(field) == from && !guards.iter().any(|g| g.matches(r))
            })
            .collect();
        rng.shuffle(&mut candidates);
        for i in candidates.into_iter().take(need) {
            ds.rows[i].set(field, to);
            modified += 1;
        }
    }
    let achieved = if to == 1 {
        before + modified
    } else {
        before - modified
    };
    MatchOutcome {
        eligible: rows.len(),
        desired,
        before,
        achieved,
        modified,
    }
}

/// Applies every lock of the record's label.
pub fn apply_label_overrides(rs: &Ruleset, r: &FrameRecord) -> FrameRecord {
    let mut out = *r;
    if let Some(label) = r.class() {
        for lock in rs.locks_for(label) {
            for (field, value) in lock.set.iter() {
                out.set(*field, *value);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotaStage {
    /// Stage tag; also keys the stage's random stream.
    pub tag: String,
    pub field: Field,
    pub label: Label,
    pub target_percent: f64,
    #[serde(flatten)]
    pub outcome: MatchOutcome,
}

impl QuotaStage {
    pub fn shortfall(&self) -> usize {
        self.outcome.shortfall()
    }

    pub fn diagnostic(&self) -> Option<String> {
        (self.shortfall() > 0).then(|| {
            format!(
                "{}: target {}% of {} eligible rows = {}, reached {} (shortfall {})",
                self.tag,
                self.target_percent,
                self.outcome.eligible,
                self.outcome.desired,
                self.outcome.achieved,
                self.shortfall()
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct QuotaReport {
    pub locked_rows: usize,
    pub stages: Vec<QuotaStage>,
}

impl QuotaReport {
    pub fn diagnostics(&self) -> Vec<String> {
        self.stages
            .iter()
            .filter_map(QuotaStage::diagnostic)
            .collect()
    }
}

/// Guards for a stage adjusting `field`: the policy guards plus one guard
/// per lock that pins `field`, so locked values are never overwritten.
fn stage_guards(rs: &Ruleset, field: Field) -> Vec<GuardPredicate> {
    let mut guards = rs.protected_joint_policy.never_touch_when.clone();
    guards.extend(
        rs.protected_joint_policy
            .locks
            .iter()
            .filter(|lock: &&LockRule| lock.set.iter().any(|(f, _)| *f == field))
            .map(|lock| GuardPredicate::new(vec![(Field::Label, lock.label.id())])),
    );
    guards
}

pub fn stage_tag(field: Field, scope: Option<&str>, label: Label) -> String {
    match scope {
        Some(scope) => format!("quota/{field}/{scope}/label={label}"),
        None => format!("quota/{field}/label={label}"),
    }
}

/// Runs the quota stage. Stage streams derive from `rng`'s seed and the
/// stage tag.
pub fn enforce_quotas(rs: &Ruleset, ds: Dataset, rng: &Prng) -> (Dataset, QuotaReport) {
    let mut ds = ds;
    let mut report = QuotaReport::default();

    for row in ds.rows.iter_mut() {
        let locked = apply_label_overrides(rs, row);
        if locked != *row {
            report.locked_rows += 1;
            *row = locked;
        }
    }

    let targets = &rs.protected_joint_policy.quota_targets;
    let protected_guards = stage_guards(rs, Field::WlanFcProtected);
    for label in Label::ALL {
        let scopes = [
            ("mgmt", 0, targets.mgmt_percent.get(&label)),
            ("data", 2, targets.overall_percent.get(&label)),
        ];
        for (scope, frame_type, target) in scopes {
            let target = target.copied().unwrap_or(0.0);
            let tag = stage_tag(Field::WlanFcProtected, Some(scope), label);
            let outcome = match_percent(
                &mut ds,
                QuotaFlag::Protected,
                target,
                |r| r.label == label.id() && r.wlan_fc_type == frame_type,
                &protected_guards,
                &mut rng.stage(&tag),
            );
            report.stages.push(QuotaStage {
                tag,
                field: Field::WlanFcProtected,
                label,
                target_percent: target,
                outcome,
            });
        }
    }

    for flag in PostFlag::ALL {
        let field = flag.field();
        let guards = stage_guards(rs, field);
        let forbidden = rs.post_flags_quota.forbidden(flag);
        for label in Label::ALL {
            let target = rs
                .post_flags_quota
                .targets(flag)
                .get(&label)
                .copied()
                .unwrap_or(0.0);
            let tag = stage_tag(field, None, label);
            let outcome = match_percent(
                &mut ds,
                flag.into(),
                target,
                |r| {
                    r.label == label.id()
                        && !forbidden.contains(&(r.wlan_fc_type, r.wlan_fc_subtype))
                },
                &guards,
                &mut rng.stage(&tag),
            );
            report.stages.push(QuotaStage {
                tag,
                field,
                label,
                target_percent: target,
                outcome,
            });
        }
    }

    (ds, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generator::{check, generate, GenerationConfig};
    use crate::ruleset::parse_ruleset;

    fn rows(n: usize) -> Dataset {
        Dataset::new(
            (0..n)
                .map(|i| FrameRecord {
                    wlan_fc_subtype: i as i64,
                    ..FrameRecord::default()
                })
                .collect(),
        )
    }

    #[test]
    fn round_half_up() {
        assert_eq!(quota_count(25.0, 100), 25);
        assert_eq!(quota_count(0.5, 100), 1);
        assert_eq!(quota_count(0.49, 100), 0);
        assert_eq!(quota_count(12.5, 4), 1);
        assert_eq!(quota_count(37.5, 4), 2);
        assert_eq!(quota_count(1.1, 500), 6);
        assert_eq!(quota_count(100.0, 7), 7);
        assert_eq!(quota_count(0.0, 7), 0);
        assert_eq!(quota_count(50.0, 0), 0);
    }

    #[test]
    fn target_at_current_level_modifies_nothing() {
        let mut ds = rows(40);
        for r in ds.rows.iter_mut().take(10) {
            r.wlan_fc_retry = 1;
        }
        let before = ds.clone();
        let out = match_percent(
            &mut ds,
            QuotaFlag::Retry,
            25.0,
            |_| true,
            &[],
            &mut Prng::new(1),
        );
        assert_eq!(out.modified, 0);
        assert_eq!(ds, before);
    }

    #[test]
    fn sets_exact_count() {
        let mut ds = rows(100);
        let out = match_percent(
            &mut ds,
            QuotaFlag::Retry,
            25.0,
            |_| true,
            &[],
            &mut Prng::new(1),
        );
        assert_eq!(out.modified, 25);
        assert_eq!(ds.rows.iter().filter(|r| r.wlan_fc_retry == 1).count(), 25);
        assert_eq!(out.shortfall(), 0);
    }

    #[test]
    fn clears_when_above_target() {
        let mut ds = rows(100);
        for r in ds.rows.iter_mut() {
            r.wlan_fc_pwrmgt = 1;
        }
        let out = match_percent(
            &mut ds,
            QuotaFlag::Pwrmgt,
            10.0,
            |_| true,
            &[],
            &mut Prng::new(9),
        );
        assert_eq!(out.achieved, 10);
        assert_eq!(ds.rows.iter().filter(|r| r.wlan_fc_pwrmgt == 1).count(), 10);
    }

    #[test]
    fn guarded_rows_limit_reach_and_record_shortfall() {
        // 80 eligible rows, 70 guarded: only 10 modifiable, 20 needed.
        let mut ds = rows(80);
        for r in ds.rows.iter_mut().take(70) {
            r.wlan_fc_ds = 9;
        }
        let guards = [GuardPredicate::new(vec![(Field::WlanFcDs, 9)])];
        let before = ds.clone();
        let out = match_percent(
            &mut ds,
            QuotaFlag::Retry,
            25.0,
            |_| true,
            &guards,
            &mut Prng::new(3),
        );
        assert_eq!(out.desired, 20);
        assert_eq!(out.modified, 10);
        assert_eq!(out.shortfall(), 10);
        for (a, b) in before.rows.iter().zip(&ds.rows).take(70) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ineligible_rows_untouched() {
        let mut ds = rows(100);
        let out = match_percent(
            &mut ds,
            QuotaFlag::Moredata,
            100.0,
            |r| r.wlan_fc_subtype % 2 == 0,
            &[],
            &mut Prng::new(3),
        );
        assert_eq!(out.eligible, 50);
        for r in &ds.rows {
            assert_eq!(r.wlan_fc_moredata, i64::from(r.wlan_fc_subtype % 2 == 0));
        }
    }

    #[test]
    fn selection_is_seeded() {
        let mut a = rows(200);
        let mut b = rows(200);
        let mut c = rows(200);
        match_percent(
            &mut a,
            QuotaFlag::Retry,
            30.0,
            |_| true,
            &[],
            &mut Prng::new(5),
        );
        match_percent(
            &mut b,
            QuotaFlag::Retry,
            30.0,
            |_| true,
            &[],
            &mut Prng::new(5),
        );
        match_percent(
            &mut c,
            QuotaFlag::Retry,
            30.0,
            |_| true,
            &[],
            &mut Prng::new(6),
        );
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lock_overrides_apply_to_label_only() {
        let rs = fixtures::reference_ruleset();
        let r = FrameRecord {
            label: 1,
            radiotap_length: 64,
            ..FrameRecord::default()
        };
        let locked = apply_label_overrides(&rs, &r);
        assert_eq!(locked.radiotap_length, 56);
        assert_eq!(locked.radiotap_present_tsft, 1);
        let normal = FrameRecord { label: 0, ..r };
        assert_eq!(apply_label_overrides(&rs, &normal), normal);
    }

    #[test]
    fn locked_rows_still_pass_check() {
        let rs = fixtures::reference_ruleset();
        let (ds, _) = generate(&GenerationConfig::new(rs.clone(), 4)).unwrap();
        for r in ds.rows.iter().filter(|r| r.label == 1) {
            assert!(check(&rs, &apply_label_overrides(&rs, r)).valid());
        }
    }

    #[test]
    fn zero_targets_without_locks_leave_dataset_unchanged() {
        let rs = parse_ruleset(fixtures::MINIMAL_RULESET).unwrap();
        let mut rng = Prng::new(0);
        let ds = Dataset::new(
            Label::ALL
                .iter()
                .map(|l| crate::generator::emit_row(&rs, *l, &mut rng).unwrap())
                .collect(),
        );
        let (after, report) = enforce_quotas(&rs, ds.clone(), &Prng::new(1));
        assert_eq!(after, ds);
        assert_eq!(report.locked_rows, 0);
        assert!(report.stages.iter().all(|s| s.outcome.modified == 0));
    }

    #[test]
    fn locks_precede_quotas_and_are_not_overwritten() {
        let mut rs = fixtures::reference_ruleset();
        rs.protected_joint_policy
            .locks
            .push(crate::ruleset::LockRule {
                label: Label::Impersonation,
                set: crate::ruleset::FieldValues(vec![(Field::WlanFcRetry, 1)]),
            });
        let (ds, stats) = generate(&GenerationConfig::new(rs, 12)).unwrap();
        for r in &ds.rows {
            if r.label == 1 {
                assert_eq!((r.radiotap_length, r.radiotap_present_tsft), (56, 1));
            }
            if r.label == 2 {
                assert_eq!(r.wlan_fc_retry, 1);
            }
        }
        // Every impersonation row is locked to retry=1, above the 12% target.
        assert!(stats
            .quota
            .stages
            .iter()
            .any(|s| s.field == Field::WlanFcRetry
                && s.label == Label::Impersonation
                && s.shortfall() > 0));
    }
}
