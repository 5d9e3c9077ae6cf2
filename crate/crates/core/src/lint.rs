//! Authoring-time checks that catch rulesets whose rules can only produce
//! rows the hard constraints reject, or whose quotas cannot be met.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::distribution::Flags24;
use crate::generator::{apply_label_overrides, check, emit_row};
use crate::ruleset::{PostFlag, Ruleset};
use crate::sampler::Prng;
use crate::schema::{Field, Label};

const PROBE_DRAWS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LintCode {
    TsftAtLength64,
    SubtypeNotAllowed,
    MissingControlDuration,
    MissingDistribution,
    BothPhyFlags,
    LockViolatesCheck,
    LockAssignsLabel,
    ForbidNotInAllowlist,
    InfeasibleQuota,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: LintCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn push(&mut self, code: LintCode, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Returns every diagnostic; empty means the ruleset is consistent.
pub fn lint_ruleset(rs: &Ruleset) -> Vec<Diagnostic> {
    let mut out = Sink(Vec::new());
    tsft(rs, &mut out);
    allowlists(rs, &mut out);
    control_durations(rs, &mut out);
    coverage(rs, &mut out);
    phy_flags(rs, &mut out);
    locks(rs, &mut out);
    forbid(rs, &mut out);
    quotas(rs, &mut out);
    out.0
}

fn tsft(rs: &Ruleset, out: &mut Sink) {
    if let Some(rule) = rs.radiotap.tsft_for_length.get(&64) {
        if rule.bern > 0.0 {
            out.push(
                LintCode::TsftAtLength64,
                "radiotap.tsft_for_length.64",
                format!("tsft must be 0 at length 64 (bern = {})", rule.bern),
            );
        }
    }
    for (label, by_len) in &rs.radiotap.tsft_for_length_by_label {
        if let Some(rule) = by_len.get(&64) {
            if rule.bern > 0.0 {
                out.push(
                    LintCode::TsftAtLength64,
                    format!("radiotap.tsft_for_length_by_label.{label}.64"),
                    format!("tsft must be 0 at length 64 (bern = {})", rule.bern),
                );
            }
        }
    }
}

fn allowlists(rs: &Ruleset, out: &mut Sink) {
    for (label, by_type) in &rs.wlan_fc_subtype_by_label_and_type_percent {
        for (t, d) in by_type {
            for st in d.support() {
                let allowed = rs.allowlist(*t).is_some_and(|s| s.contains(&st));
                if !allowed {
                    out.push(
                        LintCode::SubtypeNotAllowed,
                        format!("wlan_fc_subtype_by_label_and_type_percent.{label}.{t}"),
                        format!("subtype {st} is not in the allowlist for type {t}"),
                    );
                }
            }
        }
    }
}

fn control_durations(rs: &Ruleset, out: &mut Sink) {
    let mut control: BTreeSet<i64> = BTreeSet::new();
    for by_type in rs.wlan_fc_subtype_by_label_and_type_percent.values() {
        if let Some(d) = by_type.get(&1) {
            control.extend(d.reachable());
        }
    }
    for st in control {
        if !rs
            .duration_rules
            .control_by_subtype_percent
            .contains_key(&st)
        {
            out.push(
                LintCode::MissingControlDuration,
                format!("duration_rules.control_by_subtype_percent.{st}"),
                format!("control subtype {st} has no legal durations"),
            );
        }
    }
}

/// Every table a label can reach during emission must exist.
fn coverage(rs: &Ruleset, out: &mut Sink) {
    for label in Label::ALL {
        let mut need = |present: bool, path: String| {
            if !present {
                out.push(
                    LintCode::MissingDistribution,
                    path,
                    format!("label {label} has no distribution here"),
                );
            }
        };
        let types: Vec<i64> = rs
            .type_mix_by_label_percent
            .get(&label)
            .map(|d| d.reachable().collect())
            .unwrap_or_default();
        need(
            rs.type_mix_by_label_percent.contains_key(&label),
            format!("type_mix_by_label_percent.{label}"),
        );
        for t in &types {
            need(
                rs.wlan_fc_subtype_by_label_and_type_percent
                    .get(&label)
                    .is_some_and(|m| m.contains_key(t)),
                format!("wlan_fc_subtype_by_label_and_type_percent.{label}.{t}"),
            );
        }
        need(
            rs.channel_frequency_by_label_percent.contains_key(&label),
            format!("channel_frequency_by_label_percent.{label}"),
        );
        need(
            rs.rssi_rules.contains_key(&label),
            format!("rssi_rules.{label}"),
        );
        need(
            rs.frame_length_rules.contains_key(&label),
            format!("frame_length_rules.{label}"),
        );
        if types.iter().any(|t| *t != 1) {
            need(
                rs.duration_rules.by_label_percent.contains_key(&label),
                format!("duration_rules.by_label_percent.{label}"),
            );
        }
        for len in rs.length_mix(label).reachable() {
            need(
                rs.tsft_probability(label, len).is_some(),
                format!("radiotap.tsft_for_length.{len}"),
            );
        }
    }
}

fn phy_flags(rs: &Ruleset, out: &mut Sink) {
    let both = Flags24 { cck: 1, ofdm: 1 };
    if rs.radiotap.observed_24_flags_percent.percent_of(both) > 0.0 {
        out.push(
            LintCode::BothPhyFlags,
            "radiotap.observed_24_flags_percent",
            "flag pair (1,1) is always rejected",
        );
    }
}

/// Applies each label's locks to probe rows emitted from a fixed seed and
/// re-checks them.
fn locks(rs: &Ruleset, out: &mut Sink) {
    for (i, lock) in rs.protected_joint_policy.locks.iter().enumerate() {
        if lock.set.iter().any(|(f, _)| *f == Field::Label) {
            out.push(
                LintCode::LockAssignsLabel,
                format!("protected_joint_policy.locks.{i}"),
                "a lock may not reassign the label",
            );
        }
    }
    for label in Label::ALL {
        if rs.locks_for(label).next().is_none() {
            continue;
        }
        let mut rng = Prng::for_stage(0, &format!("lint/probe/label={label}"));
        let mut failed = BTreeSet::new();
        for _ in 0..PROBE_DRAWS {
            let Ok(probe) = emit_row(rs, label, &mut rng) else {
                break;
            };
            if !check(rs, &probe).valid() {
                continue;
            }
            let locked = apply_label_overrides(rs, &probe);
            failed.extend(check(rs, &locked).violations.iter().map(|v| v.rule));
        }
        if !failed.is_empty() {
            let rules: Vec<String> = failed.iter().map(ToString::to_string).collect();
            out.push(
                LintCode::LockViolatesCheck,
                format!("protected_joint_policy.locks[label={label}]"),
                format!("locked rows violate {}", rules.join(", ")),
            );
        }
    }
}

fn forbid(rs: &Ruleset, out: &mut Sink) {
    for (flag, pairs) in &rs.post_flags_quota.forbid {
        for (t, st) in pairs {
            if !rs.allowlist(*t).is_some_and(|s| s.contains(st)) {
                out.push(
                    LintCode::ForbidNotInAllowlist,
                    format!("post_flags_quota.forbid.{}", flag.name()),
                    format!("({t}, {st}) is not an allowed type/subtype pair"),
                );
            }
        }
    }
}

/// Reachable `(type, subtype)` pairs for a label with a nonzero count.
fn reachable_pairs(rs: &Ruleset, label: Label) -> Vec<(i64, i64)> {
    if rs.count(label) == 0 {
        return Vec::new();
    }
    let Some(types) = rs.type_mix_by_label_percent.get(&label) else {
        return Vec::new();
    };
    let by_type = rs.wlan_fc_subtype_by_label_and_type_percent.get(&label);
    types
        .reachable()
        .flat_map(|t| {
            by_type
                .and_then(|m| m.get(&t))
                .into_iter()
                .flat_map(move |d| d.reachable().map(move |st| (t, st)))
        })
        .collect()
}

fn quotas(rs: &Ruleset, out: &mut Sink) {
    let targets = &rs.protected_joint_policy.quota_targets;
    for label in Label::ALL {
        let pairs = reachable_pairs(rs, label);
        let has_type = |t: i64| pairs.iter().any(|(pt, _)| *pt == t);
        let checks = [
            (
                "mgmt_percent",
                targets.mgmt_percent.get(&label),
                has_type(0),
            ),
            (
                "overall_percent",
                targets.overall_percent.get(&label),
                has_type(2),
            ),
        ];
        for (name, target, possible) in checks {
            if target.is_some_and(|p| *p > 0.0) && !possible {
                out.push(
                    LintCode::InfeasibleQuota,
                    format!("protected_joint_policy.quota_targets.{name}.{label}"),
                    format!("target is positive but label {label} never emits an eligible row"),
                );
            }
        }
        for flag in PostFlag::ALL {
            let target = rs.post_flags_quota.targets(flag).get(&label).copied();
            let forbidden = rs.post_flags_quota.forbidden(flag);
            let possible = pairs.iter().any(|p| !forbidden.contains(p));
            if target.is_some_and(|p| p > 0.0) && !possible {
                out.push(
                    LintCode::InfeasibleQuota,
                    format!("post_flags_quota.{}_by_label_pct.{label}", flag.name()),
                    format!("target is positive but label {label} never emits an eligible row"),
                );
            }
        }
    }
}
