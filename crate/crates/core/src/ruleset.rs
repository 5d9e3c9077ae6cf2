//! The ruleset document: label counts, per-label feature distributions,
//! hard locks, guards and quota targets.
//!
//! The document is JSON. Top-level keys follow the generator's `R.*` paths;
//! see `docs/ruleset.md` for the full grammar (version 1). Parsing is
//! strict: unknown keys, missing sections, and out-of-range numbers are
//! errors. Cross-reference consistency (allowlists, control durations,
//! lock feasibility) is checked by [`crate::lint`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::distribution::{DiscreteDistribution, DistributionError, Flags24, SupportValue};
use crate::schema::{Field, FrameRecord, Label};

pub const RULESET_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("domain error at {path}: {message}")]
    Domain { path: String, message: String },
}

impl RulesetError {
    fn domain(path: impl Into<String>, message: impl fmt::Display) -> Self {
        RulesetError::Domain {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// An ordered list of `(field, value)` pairs, written as a JSON object
/// keyed by dotted field names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FieldValues(pub Vec<(Field, i64)>);

impl FieldValues {
    pub fn iter(&self) -> impl Iterator<Item = &(Field, i64)> {
        self.0.iter()
    }

    pub fn matches(&self, r: &FrameRecord) -> bool {
        self.0.iter().all(|(f, v)| r.get(*f) == *v)
    }
}

impl Serialize for FieldValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (f, v) in &self.0 {
            map.serialize_entry(f.name(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FieldValues {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor;

        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = FieldValues;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping field names to integers")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<FieldValues, A::Error> {
                let mut pairs = Vec::new();
                while let Some((field, value)) = access.next_entry::<Field, i64>()? {
                    if pairs.iter().any(|(f, _)| *f == field) {
                        return Err(serde::de::Error::custom(format!(
                            "field `{field}` assigned twice"
                        )));
                    }
                    pairs.push((field, value));
                }
                Ok(FieldValues(pairs))
            }
        }

        deserializer.deserialize_map(PairsVisitor)
    }
}

/// A hard per-label assignment applied before any quota stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockRule {
    pub label: Label,
    pub set: FieldValues,
}

/// Conjunction of equalities; a row is guarded when every pair holds.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GuardPredicate(pub FieldValues);

impl GuardPredicate {
    pub fn new(pairs: Vec<(Field, i64)>) -> Self {
        GuardPredicate(FieldValues(pairs))
    }

    pub fn matches(&self, r: &FrameRecord) -> bool {
        self.0.matches(r)
    }
}

/// Flags adjusted after sampling by the post-flag quota stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostFlag {
    Retry,
    Pwrmgt,
    Moredata,
}

impl PostFlag {
    pub const ALL: [PostFlag; 3] = [PostFlag::Retry, PostFlag::Pwrmgt, PostFlag::Moredata];

    pub fn field(self) -> Field {
        match self {
            PostFlag::Retry => Field::WlanFcRetry,
            PostFlag::Pwrmgt => Field::WlanFcPwrmgt,
            PostFlag::Moredata => Field::WlanFcMoredata,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PostFlag::Retry => "retry",
            PostFlag::Pwrmgt => "pwrmgt",
            PostFlag::Moredata => "moredata",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelDistribution {
    pub counts: BTreeMap<Label, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Encodings {
    pub type_to_subtype_allowlists_numeric: BTreeMap<i64, BTreeSet<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsftRule {
    /// Probability that `radiotap.present.tsft` is 1.
    pub bern: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiotapRules {
    pub observed_24_flags_percent: DiscreteDistribution<Flags24>,
    pub length_mix_percent: DiscreteDistribution,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub radiotap_length_by_label_percent: BTreeMap<Label, DiscreteDistribution>,
    pub tsft_for_length: BTreeMap<i64, TsftRule>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tsft_for_length_by_label: BTreeMap<Label, BTreeMap<i64, TsftRule>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsRules {
    pub data_quota_percent: DiscreteDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationRules {
    pub control_by_subtype_percent: BTreeMap<i64, DiscreteDistribution>,
    pub by_label_percent: BTreeMap<Label, DiscreteDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotaTargets {
    /// Percent of management rows per label with `wlan.fc.protected` = 1.
    pub mgmt_percent: BTreeMap<Label, f64>,
    /// Percent of data rows per label with `wlan.fc.protected` = 1.
    pub overall_percent: BTreeMap<Label, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectedJointPolicy {
    #[serde(default)]
    pub locks: Vec<LockRule>,
    pub quota_targets: QuotaTargets,
    #[serde(default)]
    pub never_touch_when: Vec<GuardPredicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostFlagsQuota {
    pub retry_by_label_pct: BTreeMap<Label, f64>,
    pub pwrmgt_by_label_pct: BTreeMap<Label, f64>,
    pub moredata_by_label_pct: BTreeMap<Label, f64>,
    /// `(type, subtype)` pairs that may never carry the flag.
    #[serde(default)]
    pub forbid: BTreeMap<PostFlag, Vec<(i64, i64)>>,
}

impl PostFlagsQuota {
    pub fn targets(&self, flag: PostFlag) -> &BTreeMap<Label, f64> {
        match flag {
            PostFlag::Retry => &self.retry_by_label_pct,
            PostFlag::Pwrmgt => &self.pwrmgt_by_label_pct,
            PostFlag::Moredata => &self.moredata_by_label_pct,
        }
    }

    pub fn forbidden(&self, flag: PostFlag) -> &[(i64, i64)] {
        self.forbid.get(&flag).map_or(&[], Vec::as_slice)
    }
}

/// A complete, validated ruleset. Immutable once parsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ruleset {
    pub version: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub class_names: BTreeMap<Label, String>,
    pub label_distribution: LabelDistribution,
    pub type_mix_by_label_percent: BTreeMap<Label, DiscreteDistribution>,
    pub wlan_fc_subtype_by_label_and_type_percent:
        BTreeMap<Label, BTreeMap<i64, DiscreteDistribution>>,
    pub encodings: Encodings,
    pub channel_frequency_by_label_percent: BTreeMap<Label, DiscreteDistribution>,
    pub radiotap: RadiotapRules,
    pub rssi_rules: BTreeMap<Label, DiscreteDistribution>,
    pub wlan_fc_ds_rules: DsRules,
    pub frame_length_rules: BTreeMap<Label, DiscreteDistribution>,
    pub duration_rules: DurationRules,
    pub protected_joint_policy: ProtectedJointPolicy,
    pub post_flags_quota: PostFlagsQuota,
}

/// Parses and validates a ruleset document.
pub fn parse_ruleset(document: &str) -> Result<Ruleset, RulesetError> {
    let rs: Ruleset = serde_json::from_str(document).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => RulesetError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
            Category::Data => RulesetError::Schema(e.to_string()),
        }
    })?;
    rs.validate()?;
    Ok(rs)
}

/// Pretty-printed JSON; `parse_ruleset` of the output yields an equal value.
pub fn serialize_ruleset(rs: &Ruleset) -> String {
    let mut s = serde_json::to_string_pretty(rs).expect("ruleset serializes");
    s.push('\n');
    s
}

fn check_dist<V: SupportValue>(
    path: &str,
    d: &DiscreteDistribution<V>,
) -> Result<(), RulesetError> {
    d.validate()
        .map_err(|e: DistributionError| RulesetError::domain(path, e))
}

fn check_percent(path: &str, p: f64) -> Result<(), RulesetError> {
    if p.is_finite() && (0.0..=100.0).contains(&p) {
        Ok(())
    } else {
        Err(RulesetError::domain(
            path,
            format!("percent {p} outside [0, 100]"),
        ))
    }
}

fn check_probability(path: &str, p: f64) -> Result<(), RulesetError> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(RulesetError::domain(
            path,
            format!("probability {p} outside [0, 1]"),
        ))
    }
}

impl Ruleset {
    /// Structural and domain checks run by [`parse_ruleset`].
    pub fn validate(&self) -> Result<(), RulesetError> {
        if self.version != RULESET_VERSION {
            return Err(RulesetError::Schema(format!(
                "unsupported ruleset version {} (expected {RULESET_VERSION})",
                self.version
            )));
        }
        let counts = &self.label_distribution.counts;
        if Label::ALL.iter().any(|l| !counts.contains_key(l)) {
            return Err(RulesetError::Schema(
                "label_distribution.counts must list labels 0, 1 and 2".into(),
            ));
        }

        for (label, d) in &self.type_mix_by_label_percent {
            let path = format!("type_mix_by_label_percent.{label}");
            check_dist(&path, d)?;
            if let Some(t) = d.support().find(|t| !(0..=2).contains(t)) {
                return Err(RulesetError::domain(
                    path,
                    format!("frame type {t} not in 0..=2"),
                ));
            }
        }
        for (label, by_type) in &self.wlan_fc_subtype_by_label_and_type_percent {
            for (t, d) in by_type {
                check_dist(
                    &format!("wlan_fc_subtype_by_label_and_type_percent.{label}.{t}"),
                    d,
                )?;
            }
        }
        for (label, d) in &self.channel_frequency_by_label_percent {
            check_dist(&format!("channel_frequency_by_label_percent.{label}"), d)?;
        }

        let rt = &self.radiotap;
        check_dist(
            "radiotap.observed_24_flags_percent",
            &rt.observed_24_flags_percent,
        )?;
        check_dist("radiotap.length_mix_percent", &rt.length_mix_percent)?;
        for (label, d) in &rt.radiotap_length_by_label_percent {
            check_dist(
                &format!("radiotap.radiotap_length_by_label_percent.{label}"),
                d,
            )?;
        }
        for (len, rule) in &rt.tsft_for_length {
            check_probability(&format!("radiotap.tsft_for_length.{len}.bern"), rule.bern)?;
        }
        for (label, by_len) in &rt.tsft_for_length_by_label {
            for (len, rule) in by_len {
                check_probability(
                    &format!("radiotap.tsft_for_length_by_label.{label}.{len}.bern"),
                    rule.bern,
                )?;
            }
        }

        for (label, d) in &self.rssi_rules {
            let path = format!("rssi_rules.{label}");
            check_dist(&path, d)?;
            if let Some(v) = d.support().find(|v| *v >= 0) {
                return Err(RulesetError::domain(
                    path,
                    format!("rssi {v} dBm is not negative"),
                ));
            }
        }

        let ds = &self.wlan_fc_ds_rules.data_quota_percent;
        check_dist("wlan_fc_ds_rules.data_quota_percent", ds)?;
        if let Some(v) = ds.support().find(|v| *v != 2 && *v != 3) {
            return Err(RulesetError::domain(
                "wlan_fc_ds_rules.data_quota_percent",
                format!("data-frame ds value {v} not in {{2, 3}}"),
            ));
        }

        for (label, d) in &self.frame_length_rules {
            check_dist(&format!("frame_length_rules.{label}"), d)?;
        }
        for (st, d) in &self.duration_rules.control_by_subtype_percent {
            check_dist(
                &format!("duration_rules.control_by_subtype_percent.{st}"),
                d,
            )?;
        }
        for (label, d) in &self.duration_rules.by_label_percent {
            check_dist(&format!("duration_rules.by_label_percent.{label}"), d)?;
        }

        let q = &self.protected_joint_policy.quota_targets;
        for (label, p) in &q.mgmt_percent {
            check_percent(
                &format!("protected_joint_policy.quota_targets.mgmt_percent.{label}"),
                *p,
            )?;
        }
        for (label, p) in &q.overall_percent {
            check_percent(
                &format!("protected_joint_policy.quota_targets.overall_percent.{label}"),
                *p,
            )?;
        }
        for flag in PostFlag::ALL {
            for (label, p) in self.post_flags_quota.targets(flag) {
                check_percent(
                    &format!("post_flags_quota.{}_by_label_pct.{label}", flag.name()),
                    *p,
                )?;
            }
        }
        Ok(())
    }

    pub fn count(&self, label: Label) -> u64 {
        self.label_distribution
            .counts
            .get(&label)
            .copied()
            .unwrap_or(0)
    }

    pub fn total_rows(&self) -> u64 {
        self.label_distribution.counts.values().sum()
    }

    pub fn class_name(&self, label: Label) -> &str {
        self.class_names
            .get(&label)
            .map_or(label.default_name(), String::as_str)
    }

    pub fn allowlist(&self, frame_type: i64) -> Option<&BTreeSet<i64>> {
        self.encodings
            .type_to_subtype_allowlists_numeric
            .get(&frame_type)
    }

    /// Per-label radiotap length mix, falling back to the global mix.
    pub fn length_mix(&self, label: Label) -> &DiscreteDistribution {
        self.radiotap
            .radiotap_length_by_label_percent
            .get(&label)
            .unwrap_or(&self.radiotap.length_mix_percent)
    }

    /// TSFT probability for a radiotap length: per-label override first,
    /// then the per-length table.
    pub fn tsft_probability(&self, label: Label, length: i64) -> Option<f64> {
        self.radiotap
            .tsft_for_length_by_label
            .get(&label)
            .and_then(|m| m.get(&length))
            .or_else(|| self.radiotap.tsft_for_length.get(&length))
            .map(|r| r.bern)
    }

    pub fn locks_for(&self, label: Label) -> impl Iterator<Item = &LockRule> {
        self.protected_joint_policy
            .locks
            .iter()
            .filter(move |l| l.label == label)
    }

    /// Label counts rescaled to `rows` total by largest remainder. Ties in
    /// the remainder go to the lower label id.
    pub fn rescaled_counts(&self, rows: u64) -> BTreeMap<Label, u64> {
        let total = self.total_rows();
        let mut out = BTreeMap::new();
        if total == 0 {
            for l in Label::ALL {
                out.insert(l, 0);
            }
            return out;
        }
        let mut remainders = Vec::new();
        let mut assigned = 0u64;
        for l in Label::ALL {
            let num = u128::from(self.count(l)) * u128::from(rows);
            let floor = (num / u128::from(total)) as u64;
            let rem = num % u128::from(total);
            assigned += floor;
            out.insert(l, floor);
            remainders.push((rem, l));
        }
        remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, l) in remainders.into_iter().take((rows - assigned) as usize) {
            *out.get_mut(&l).expect("label present") += 1;
        }
        out
    }

    /// A copy with label counts replaced.
    pub fn with_counts(&self, counts: BTreeMap<Label, u64>) -> Ruleset {
        let mut rs = self.clone();
        rs.label_distribution.counts = counts;
        rs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn reference_ruleset_parses_and_round_trips() {
        let rs = fixtures::reference_ruleset();
        let text = serialize_ruleset(&rs);
        let back = parse_ruleset(&text).unwrap();
        assert_eq!(back, rs);
        assert_eq!(serialize_ruleset(&back), text);
    }

    #[test]
    fn class_ratio_counts_sum_to_thousand() {
        let rs = fixtures::reference_ruleset();
        assert_eq!(rs.count(Label::Normal), 970);
        assert_eq!(rs.count(Label::Flooding), 20);
        assert_eq!(rs.count(Label::Impersonation), 10);
        assert_eq!(rs.total_rows(), 1000);
    }

    #[test]
    fn minimal_single_entry_ruleset_is_valid() {
        let rs = parse_ruleset(fixtures::MINIMAL_RULESET).unwrap();
        assert_eq!(rs.total_rows(), 3);
        assert_eq!(
            rs.type_mix_by_label_percent[&Label::Normal].entries(),
            &[(0, 100.0)]
        );
    }

    fn mutate(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(fixtures::MINIMAL_RULESET).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn sum_of_ninety_nine_is_domain_error() {
        let doc = mutate(|v| {
            v["channel_frequency_by_label_percent"]["0"] =
                serde_json::json!({"2412": 59.0, "2437": 40.0});
        });
        match parse_ruleset(&doc) {
            Err(RulesetError::Domain { path, .. }) => {
                assert_eq!(path, "channel_frequency_by_label_percent.0")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_text_is_parse_error() {
        assert!(matches!(
            parse_ruleset("{\"version\": 1,,}"),
            Err(RulesetError::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_ruleset(""), Err(RulesetError::Parse { .. })));
    }

    #[test]
    fn unknown_and_missing_keys_are_schema_errors() {
        let doc = mutate(|v| v["surprise"] = serde_json::json!(1));
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
        let doc = mutate(|v| {
            v.as_object_mut().unwrap().remove("rssi_rules");
        });
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
        let doc = mutate(|v| {
            v["protected_joint_policy"]["never_touch_when"] =
                serde_json::json!([{"wlan.fc.nope": 1}]);
        });
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
        let doc = mutate(|v| {
            v["label_distribution"]["counts"] = serde_json::json!({"0": 1, "1": 1});
        });
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
        let doc = mutate(|v| {
            v["label_distribution"]["counts"]["3"] = serde_json::json!(1);
        });
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
        let doc = mutate(|v| v["version"] = serde_json::json!(2));
        assert!(matches!(parse_ruleset(&doc), Err(RulesetError::Schema(_))));
    }

    type Mutation = Box<dyn Fn(&mut serde_json::Value)>;

    #[test]
    fn out_of_range_values_are_domain_errors() {
        let cases: Vec<Mutation> = vec![
            Box::new(|v| v["rssi_rules"]["0"] = serde_json::json!({"5": 100})),
            Box::new(|v| v["radiotap"]["tsft_for_length"]["56"] = serde_json::json!({"bern": 1.5})),
            Box::new(|v| {
                v["protected_joint_policy"]["quota_targets"]["mgmt_percent"]["0"] =
                    serde_json::json!(101)
            }),
            Box::new(|v| v["post_flags_quota"]["retry_by_label_pct"]["1"] = serde_json::json!(-1)),
            Box::new(|v| {
                v["wlan_fc_ds_rules"]["data_quota_percent"] = serde_json::json!({"1": 100})
            }),
            Box::new(|v| v["type_mix_by_label_percent"]["0"] = serde_json::json!({"3": 100})),
        ];
        for case in cases {
            let doc = mutate(case);
            assert!(
                matches!(parse_ruleset(&doc), Err(RulesetError::Domain { .. })),
                "{doc}"
            );
        }
    }

    #[test]
    fn lookups_fall_back_to_global_tables() {
        let rs = fixtures::reference_ruleset();
        assert_eq!(
            rs.length_mix(Label::Flooding),
            &rs.radiotap.radiotap_length_by_label_percent[&Label::Flooding]
        );
        assert_eq!(
            rs.length_mix(Label::Normal),
            &rs.radiotap.length_mix_percent
        );
        assert_eq!(rs.tsft_probability(Label::Normal, 64), Some(0.0));
        assert_eq!(rs.tsft_probability(Label::Impersonation, 56), Some(0.2));
        assert_eq!(rs.tsft_probability(Label::Normal, 56), Some(0.9));
        assert_eq!(rs.tsft_probability(Label::Normal, 99), None);
    }

    #[test]
    fn largest_remainder_rescaling() {
        let rs = fixtures::reference_ruleset();
        let c = rs.rescaled_counts(100_000);
        assert_eq!(
            c.values().copied().collect::<Vec<_>>(),
            vec![97_000, 2_000, 1_000]
        );
        let c = rs.rescaled_counts(7);
        // 6.79, 0.14, 0.07 -> floors 6,0,0; one extra to the largest remainder.
        assert_eq!(c.values().copied().collect::<Vec<_>>(), vec![7, 0, 0]);
        let c = rs.rescaled_counts(101);
        assert_eq!(c.values().sum::<u64>(), 101);
    }
}
