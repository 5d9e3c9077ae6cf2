use std::fmt;

use serde::Serialize;

use crate::ruleset::Ruleset;
use crate::schema::{FrameRecord, Label};

/// The six hard constraints every emitted row must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    /// Subtype is in the allowlist of its frame type.
    SubtypeAllowlist,
    /// 5180 MHz rows carry OFDM only; CCK and OFDM are never both set.
    BandFlags,
    /// DS is 1 for management/control frames and 2 or 3 for data frames.
    DsRule,
    /// TSFT is absent when the radiotap header is 64 bytes.
    TsftLength64,
    /// Control-frame durations come from the subtype's duration support.
    ControlDuration,
    /// The frame length is in the label's frame-length support.
    FrameLength,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [
        RuleId::SubtypeAllowlist,
        RuleId::BandFlags,
        RuleId::DsRule,
        RuleId::TsftLength64,
        RuleId::ControlDuration,
        RuleId::FrameLength,
    ];

    /// 1-based rule number, in evaluation order.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn slug(self) -> &'static str {
        match self {
            RuleId::SubtypeAllowlist => "subtype-allowlist",
            RuleId::BandFlags => "band-flags",
            RuleId::DsRule => "ds-rule",
            RuleId::TsftLength64 => "tsft-length-64",
            RuleId::ControlDuration => "control-duration",
            RuleId::FrameLength => "frame-length",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.number(), self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: RuleId,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, rule: RuleId) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Evaluates every hard constraint on `r` and reports all that fail.
/// Accepts arbitrary records, including decoded external data.
pub fn check(rs: &Ruleset, r: &FrameRecord) -> ValidationReport {
    let mut violations = Vec::new();
    let mut fail = |rule, detail: String| violations.push(Violation { rule, detail });

    let allowed = rs
        .allowlist(r.wlan_fc_type)
        .is_some_and(|set| set.contains(&r.wlan_fc_subtype));
    if !allowed {
        fail(
            RuleId::SubtypeAllowlist,
            format!(
                "subtype {} not allowed for type {}",
                r.wlan_fc_subtype, r.wlan_fc_type
            ),
        );
    }

    let five_ghz_ok = r.radiotap_channel_freq != 5180
        || (r.radiotap_flags_ofdm == 1 && r.radiotap_flags_cck == 0);
    let both = r.radiotap_flags_cck == 1 && r.radiotap_flags_ofdm == 1;
    if !five_ghz_ok || both {
        fail(
            RuleId::BandFlags,
            format!(
                "freq {} with cck={} ofdm={}",
                r.radiotap_channel_freq, r.radiotap_flags_cck, r.radiotap_flags_ofdm
            ),
        );
    }

    let ds_ok = match r.wlan_fc_type {
        0 | 1 => r.wlan_fc_ds == 1,
        2 => matches!(r.wlan_fc_ds, 2 | 3),
        _ => true,
    };
    if !ds_ok {
        fail(
            RuleId::DsRule,
            format!("ds {} illegal for type {}", r.wlan_fc_ds, r.wlan_fc_type),
        );
    }

    if r.radiotap_length == 64 && r.radiotap_present_tsft == 1 {
        fail(
            RuleId::TsftLength64,
            "tsft present with radiotap length 64".to_string(),
        );
    }

    if r.wlan_fc_type == 1 {
        let legal = rs
            .duration_rules
            .control_by_subtype_percent
            .get(&r.wlan_fc_subtype)
            .is_some_and(|d| d.contains(r.wlan_duration));
        if !legal {
            fail(
                RuleId::ControlDuration,
                format!(
                    "duration {} not legal for control subtype {}",
                    r.wlan_duration, r.wlan_fc_subtype
                ),
            );
        }
    }

    let supported = Label::try_from(r.label)
        .ok()
        .and_then(|l| rs.frame_length_rules.get(&l))
        .is_some_and(|d| d.contains(r.frame_len));
    if !supported {
        fail(
            RuleId::FrameLength,
            format!(
                "frame.len {} unsupported for label {}",
                r.frame_len, r.label
            ),
        );
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn valid_record() -> FrameRecord {
        FrameRecord {
            wlan_fc_type: 0,
            wlan_fc_subtype: 8,
            wlan_fc_ds: 1,
            frame_len: 60,
            wlan_duration: 0,
            radiotap_channel_freq: 2437,
            radiotap_flags_cck: 1,
            radiotap_flags_ofdm: 0,
            radiotap_length: 56,
            radiotap_present_tsft: 1,
            radiotap_dbm_antsignal: -50,
            label: 0,
            ..FrameRecord::default()
        }
    }

    #[test]
    fn baseline_record_is_valid() {
        let rs = fixtures::reference_ruleset();
        let report = check(&rs, &valid_record());
        assert!(report.valid(), "{report:?}");
    }

    #[test]
    fn tsft_at_length_64_violates_rule_4() {
        let rs = fixtures::reference_ruleset();
        let r = FrameRecord {
            radiotap_length: 64,
            radiotap_present_tsft: 1,
            ..valid_record()
        };
        let report = check(&rs, &r);
        assert!(!report.valid());
        assert_eq!(report.violations.len(), 1);
        assert!(report.violates(RuleId::TsftLength64));
        assert_eq!(RuleId::TsftLength64.number(), 4);
    }

    #[test]
    fn five_ghz_with_cck_violates_rule_2() {
        let rs = fixtures::reference_ruleset();
        let r = FrameRecord {
            radiotap_channel_freq: 5180,
            ..valid_record()
        };
        let report = check(&rs, &r);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violates(RuleId::BandFlags));
        let both = FrameRecord {
            radiotap_flags_ofdm: 1,
            ..valid_record()
        };
        assert!(check(&rs, &both).violates(RuleId::BandFlags));
    }

    #[test]
    fn each_remaining_rule_fires_alone() {
        let rs = fixtures::reference_ruleset();
        let cases = [
            (
                FrameRecord {
                    wlan_fc_subtype: 9,
                    ..valid_record()
                },
                RuleId::SubtypeAllowlist,
            ),
            (
                FrameRecord {
                    wlan_fc_ds: 2,
                    ..valid_record()
                },
                RuleId::DsRule,
            ),
            (
                FrameRecord {
                    wlan_fc_type: 1,
                    wlan_fc_subtype: 11,
                    wlan_duration: 5,
                    ..valid_record()
                },
                RuleId::ControlDuration,
            ),
            (
                FrameRecord {
                    frame_len: 61,
                    ..valid_record()
                },
                RuleId::FrameLength,
            ),
            (
                FrameRecord {
                    label: 7,
                    ..valid_record()
                },
                RuleId::FrameLength,
            ),
        ];
        for (r, rule) in cases {
            let report = check(&rs, &r);
            assert_eq!(report.violations.len(), 1, "{report:?}");
            assert!(report.violates(rule));
        }
    }

    #[test]
    fn data_frames_need_ds_two_or_three() {
        let rs = fixtures::reference_ruleset();
        for (ds, ok) in [(1, false), (2, true), (3, true), (0, false)] {
            let r = FrameRecord {
                wlan_fc_type: 2,
                wlan_fc_subtype: 8,
                wlan_fc_ds: ds,
                ..valid_record()
            };
            assert_eq!(check(&rs, &r).valid(), ok, "ds={ds}");
        }
    }

    #[test]
    fn reports_every_violation() {
        let rs = fixtures::reference_ruleset();
        let r = FrameRecord {
            wlan_fc_type: 1,
            wlan_fc_subtype: 3,
            wlan_fc_ds: 3,
            frame_len: 1,
            radiotap_channel_freq: 5180,
            radiotap_length: 64,
            ..valid_record()
        };
        let rules: Vec<RuleId> = check(&rs, &r).violations.iter().map(|v| v.rule).collect();
        assert_eq!(rules, RuleId::ALL.to_vec());
    }
}
