//! Example rulesets.
//!
//! [`reference_ruleset`] is the shipped AWID3-like ruleset (also written to
//! `rulesets/reference.json`). [`consistent_ruleset`] builds a random but
//! lint-clean ruleset from a seed, for property tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use crate::distribution::{DiscreteDistribution, Flags24, SupportValue};
use crate::ruleset::{
    DsRules, DurationRules, Encodings, FieldValues, GuardPredicate, LabelDistribution, LockRule,
    PostFlag, PostFlagsQuota, ProtectedJointPolicy, QuotaTargets, RadiotapRules, Ruleset, TsftRule,
    RULESET_VERSION,
};
use crate::sampler::Prng;
use crate::schema::{Field, Label};

/// Every distribution has a single entry; one row per label.
pub const MINIMAL_RULESET: &str = r#"{
  "version": 1,
  "label_distribution": {"counts": {"0": 1, "1": 1, "2": 1}},
  "type_mix_by_label_percent": {"0": {"0": 100}, "1": {"0": 100}, "2": {"0": 100}},
  "wlan_fc_subtype_by_label_and_type_percent": {
    "0": {"0": {"8": 100}}, "1": {"0": {"8": 100}}, "2": {"0": {"8": 100}}
  },
  "encodings": {"type_to_subtype_allowlists_numeric": {"0": [8], "1": [13], "2": [0]}},
  "channel_frequency_by_label_percent": {"0": {"2412": 100}, "1": {"2412": 100}, "2": {"2412": 100}},
  "radiotap": {
    "observed_24_flags_percent": {"1,0": 100},
    "length_mix_percent": {"56": 100},
    "tsft_for_length": {"56": {"bern": 1.0}}
  },
  "rssi_rules": {"0": {"-45": 100}, "1": {"-45": 100}, "2": {"-45": 100}},
  "wlan_fc_ds_rules": {"data_quota_percent": {"2": 100}},
  "frame_length_rules": {"0": {"60": 100}, "1": {"60": 100}, "2": {"60": 100}},
  "duration_rules": {
    "control_by_subtype_percent": {"13": {"0": 100}},
    "by_label_percent": {"0": {"314": 100}, "1": {"314": 100}, "2": {"314": 100}}
  },
  "protected_joint_policy": {
    "quota_targets": {
      "mgmt_percent": {"0": 0, "1": 0, "2": 0},
      "overall_percent": {"0": 0, "1": 0, "2": 0}
    }
  },
  "post_flags_quota": {
    "retry_by_label_pct": {"0": 0, "1": 0, "2": 0},
    "pwrmgt_by_label_pct": {"0": 0, "1": 0, "2": 0},
    "moredata_by_label_pct": {"0": 0, "1": 0, "2": 0}
  }
}
"#;

pub fn dist<V: SupportValue>(entries: &[(V, f64)]) -> DiscreteDistribution<V> {
    DiscreteDistribution::new(entries.to_vec()).expect("fixture distribution is valid")
}

fn per_label<T>(n: T, f: T, i: T) -> BTreeMap<Label, T> {
    BTreeMap::from([
        (Label::Normal, n),
        (Label::Flooding, f),
        (Label::Impersonation, i),
    ])
}

/// AWID3-like reference ruleset: 970 / 20 / 10 rows (97 % / 2 % / 1 %).
pub fn reference_ruleset() -> Ruleset {
    let allowlists = BTreeMap::from([
        (0, BTreeSet::from([0, 1, 2, 3, 4, 5, 8, 10, 11, 12, 13])),
        (1, BTreeSet::from([8, 9, 10, 11, 12, 13])),
        (2, BTreeSet::from([0, 4, 8, 12])),
    ]);

    let subtypes = per_label(
        BTreeMap::from([
            (
                0,
                dist(&[
                    (8, 55.0),
                    (4, 20.0),
                    (5, 15.0),
                    (11, 5.0),
                    (0, 3.0),
                    (1, 2.0),
                ]),
            ),
            (1, dist(&[(13, 40.0), (12, 35.0), (11, 15.0), (9, 10.0)])),
            (2, dist(&[(8, 70.0), (0, 15.0), (4, 10.0), (12, 5.0)])),
        ]),
        BTreeMap::from([
            (0, dist(&[(12, 60.0), (10, 25.0), (8, 15.0)])),
            (1, dist(&[(11, 50.0), (12, 50.0)])),
            (2, dist(&[(8, 100.0)])),
        ]),
        BTreeMap::from([
            (0, dist(&[(8, 70.0), (5, 20.0), (11, 10.0)])),
            (1, dist(&[(12, 60.0), (13, 40.0)])),
            (2, dist(&[(8, 80.0), (0, 20.0)])),
        ]),
    );

    Ruleset {
        version: RULESET_VERSION,
        class_names: Label::ALL
            .iter()
            .map(|l| (*l, l.default_name().to_string()))
            .collect(),
        label_distribution: LabelDistribution {
            counts: per_label(970, 20, 10),
        },
        type_mix_by_label_percent: per_label(
            dist(&[(0, 15.0), (1, 20.0), (2, 65.0)]),
            dist(&[(0, 90.0), (1, 5.0), (2, 5.0)]),
            dist(&[(0, 40.0), (1, 10.0), (2, 50.0)]),
        ),
        wlan_fc_subtype_by_label_and_type_percent: subtypes,
        encodings: Encodings {
            type_to_subtype_allowlists_numeric: allowlists,
        },
        channel_frequency_by_label_percent: per_label(
            dist(&[(2412, 20.0), (2437, 35.0), (2462, 15.0), (5180, 30.0)]),
            dist(&[(2437, 90.0), (5180, 10.0)]),
            dist(&[(2437, 70.0), (5180, 30.0)]),
        ),
        radiotap: RadiotapRules {
            observed_24_flags_percent: dist(&[(Flags24::CCK, 35.0), (Flags24::OFDM, 65.0)]),
            length_mix_percent: dist(&[(56, 45.0), (60, 30.0), (64, 25.0)]),
            radiotap_length_by_label_percent: BTreeMap::from([(
                Label::Flooding,
                dist(&[(56, 80.0), (60, 20.0)]),
            )]),
            tsft_for_length: BTreeMap::from([
                (56, TsftRule { bern: 0.9 }),
                (60, TsftRule { bern: 0.6 }),
                (64, TsftRule { bern: 0.0 }),
            ]),
            tsft_for_length_by_label: BTreeMap::from([(
                Label::Impersonation,
                BTreeMap::from([(56, TsftRule { bern: 0.2 })]),
            )]),
        },
        rssi_rules: per_label(
            dist(&[
                (-30, 5.0),
                (-40, 15.0),
                (-50, 30.0),
                (-60, 30.0),
                (-70, 15.0),
                (-80, 5.0),
            ]),
            dist(&[(-35, 40.0), (-45, 40.0), (-55, 20.0)]),
            dist(&[(-25, 30.0), (-35, 50.0), (-45, 20.0)]),
        ),
        wlan_fc_ds_rules: DsRules {
            data_quota_percent: dist(&[(2, 60.0), (3, 40.0)]),
        },
        frame_length_rules: per_label(
            dist(&[
                (60, 10.0),
                (72, 10.0),
                (106, 15.0),
                (150, 10.0),
                (254, 15.0),
                (314, 10.0),
                (590, 10.0),
                (1100, 10.0),
                (1544, 10.0),
            ]),
            dist(&[(60, 50.0), (64, 40.0), (154, 10.0)]),
            dist(&[(60, 20.0), (254, 40.0), (314, 30.0), (1544, 10.0)]),
        ),
        duration_rules: DurationRules {
            control_by_subtype_percent: BTreeMap::from([
                (8, dist(&[(0, 100.0)])),
                (9, dist(&[(0, 50.0), (44, 50.0)])),
                (10, dist(&[(0, 100.0)])),
                (11, dist(&[(314, 40.0), (162, 30.0), (254, 30.0)])),
                (12, dist(&[(0, 20.0), (214, 40.0), (258, 40.0)])),
                (13, dist(&[(0, 100.0)])),
            ]),
            by_label_percent: per_label(
                dist(&[(0, 35.0), (44, 40.0), (48, 10.0), (60, 5.0), (314, 10.0)]),
                dist(&[(0, 30.0), (314, 70.0)]),
                dist(&[(44, 50.0), (0, 30.0), (213, 20.0)]),
            ),
        },
        protected_joint_policy: ProtectedJointPolicy {
            locks: vec![LockRule {
                label: Label::Flooding,
                set: FieldValues(vec![
                    (Field::RadiotapLength, 56),
                    (Field::RadiotapPresentTsft, 1),
                ]),
            }],
            quota_targets: QuotaTargets {
                mgmt_percent: per_label(10.0, 0.5, 25.0),
                overall_percent: per_label(70.0, 100.0, 60.0),
            },
            never_touch_when: vec![GuardPredicate::new(vec![
                (Field::Label, 2),
                (Field::WlanFcType, 0),
                (Field::WlanFcSubtype, 8),
            ])],
        },
        post_flags_quota: PostFlagsQuota {
            retry_by_label_pct: per_label(8.0, 30.0, 12.0),
            pwrmgt_by_label_pct: per_label(6.0, 0.0, 2.0),
            moredata_by_label_pct: per_label(1.5, 0.0, 0.0),
            forbid: BTreeMap::from([
                (PostFlag::Retry, vec![(1, 12), (1, 13)]),
                (PostFlag::Pwrmgt, vec![(1, 11), (1, 12), (1, 13)]),
                (
                    PostFlag::Moredata,
                    vec![(1, 8), (1, 9), (1, 10), (1, 11), (1, 12), (1, 13)],
                ),
            ]),
        },
    }
}

/// Percents over `values` from random integer weights, in hundredths.
fn random_dist<V: SupportValue>(values: &[V], rng: &mut Prng) -> DiscreteDistribution<V> {
    let weights: Vec<u64> = values.iter().map(|_| 1 + rng.below(100) as u64).collect();
    let total: u64 = weights.iter().sum();
    let mut hundredths: Vec<u64> = weights.iter().map(|w| w * 10_000 / total).collect();
    let short = 10_000 - hundredths.iter().sum::<u64>();
    hundredths[0] += short;
    let entries = values
        .iter()
        .zip(hundredths)
        .map(|(v, h)| (*v, h as f64 / 100.0))
        .collect();
    DiscreteDistribution::new(entries).expect("weights sum to 100")
}

fn random_subset(pool: &[i64], min: usize, rng: &mut Prng) -> Vec<i64> {
    let k = min + rng.below(pool.len() - min + 1);
    let mut picked: Vec<i64> = rng
        .sample_indices(pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

fn random_percent(rng: &mut Prng) -> f64 {
    (rng.below(10_001) as f64) / 100.0
}

fn by_type_pairs(
    by_type: &BTreeMap<i64, DiscreteDistribution>,
) -> impl Iterator<Item = (i64, i64)> + '_ {
    by_type
        .iter()
        .flat_map(|(t, d)| d.reachable().map(move |st| (*t, st)))
}

/// A random ruleset that satisfies every lint rule by construction.
pub fn consistent_ruleset(seed: u64) -> Ruleset {
    let mut rng = Prng::for_stage(seed, "fixtures/consistent");
    let rng = &mut rng;

    let allow_mgmt = random_subset(&[0, 1, 2, 3, 4, 5, 8, 10, 11, 12, 13], 1, rng);
    let allow_ctrl = random_subset(&[8, 9, 10, 11, 12, 13], 1, rng);
    let allow_data = random_subset(&[0, 4, 8, 12], 1, rng);
    let allow = [allow_mgmt, allow_ctrl, allow_data];
    let forbid_ctrl: Vec<(i64, i64)> = allow[1].iter().take(1).map(|st| (1, *st)).collect();

    let lengths = random_subset(&[56, 60, 64, 72], 1, rng);
    let mut tsft_for_length = BTreeMap::new();
    for len in &lengths {
        let bern = if *len == 64 { 0.0 } else { rng.uniform() };
        tsft_for_length.insert(*len, TsftRule { bern });
    }

    let mut counts = BTreeMap::new();
    let mut types = BTreeMap::new();
    let mut subtypes = BTreeMap::new();
    let mut freqs = BTreeMap::new();
    let mut rssi = BTreeMap::new();
    let mut flen = BTreeMap::new();
    let mut dur = BTreeMap::new();
    let mut mgmt = BTreeMap::new();
    let mut overall = BTreeMap::new();
    let mut post: [BTreeMap<Label, f64>; 3] = Default::default();
    for label in Label::ALL {
        counts.insert(label, 1 + rng.below(300) as u64);
        let type_values = random_subset(&[0, 1, 2], 1, rng);
        let mut by_type = BTreeMap::new();
        for t in &type_values {
            let st = random_subset(&allow[*t as usize], 1, rng);
            by_type.insert(*t, random_dist(&st, rng));
        }
        types.insert(label, random_dist(&type_values, rng));
        subtypes.insert(label, by_type);
        freqs.insert(
            label,
            random_dist(&random_subset(&[2412, 2437, 2462, 5180], 1, rng), rng),
        );
        rssi.insert(
            label,
            random_dist(&random_subset(&[-20, -35, -50, -65, -80], 1, rng), rng),
        );
        flen.insert(
            label,
            random_dist(&random_subset(&[40, 60, 128, 512, 1500], 1, rng), rng),
        );
        dur.insert(
            label,
            random_dist(&random_subset(&[0, 44, 60, 314], 1, rng), rng),
        );
        // Targets only where the eligible population can be nonempty.
        let has = |t: i64| type_values.contains(&t);
        mgmt.insert(label, if has(0) { random_percent(rng) } else { 0.0 });
        overall.insert(label, if has(2) { random_percent(rng) } else { 0.0 });
        for slot in post.iter_mut() {
            slot.insert(label, random_percent(rng));
        }
        let all_forbidden =
            by_type_pairs(&subtypes[&label]).all(|pair| forbid_ctrl.contains(&pair));
        if all_forbidden {
            post[0].insert(label, 0.0);
        }
    }

    let control_durations = allow[1]
        .iter()
        .map(|st| {
            (
                *st,
                random_dist(&random_subset(&[0, 44, 162, 314], 1, rng), rng),
            )
        })
        .collect();

    let mut locks = Vec::new();
    if rng.below(2) == 1 {
        locks.push(LockRule {
            label: Label::Flooding,
            set: FieldValues(vec![
                (Field::RadiotapLength, 56),
                (Field::RadiotapPresentTsft, 1),
            ]),
        });
    }
    let mut guards = Vec::new();
    if rng.below(2) == 1 {
        guards.push(GuardPredicate::new(vec![
            (Field::WlanFcType, 0),
            (Field::Label, 2),
        ]));
    }

    let [retry, pwrmgt, moredata] = post;

    Ruleset {
        version: RULESET_VERSION,
        class_names: BTreeMap::new(),
        label_distribution: LabelDistribution { counts },
        type_mix_by_label_percent: types,
        wlan_fc_subtype_by_label_and_type_percent: subtypes,
        encodings: Encodings {
            type_to_subtype_allowlists_numeric: allow
                .iter()
                .enumerate()
                .map(|(t, s)| (t as i64, s.iter().copied().collect()))
                .collect(),
        },
        channel_frequency_by_label_percent: freqs,
        radiotap: RadiotapRules {
            observed_24_flags_percent: random_dist(&[Flags24::CCK, Flags24::OFDM], rng),
            length_mix_percent: random_dist(&lengths, rng),
            radiotap_length_by_label_percent: BTreeMap::new(),
            tsft_for_length,
            tsft_for_length_by_label: BTreeMap::new(),
        },
        rssi_rules: rssi,
        wlan_fc_ds_rules: DsRules {
            data_quota_percent: random_dist(&[2, 3], rng),
        },
        frame_length_rules: flen,
        duration_rules: DurationRules {
            control_by_subtype_percent: control_durations,
            by_label_percent: dur,
        },
        protected_joint_policy: ProtectedJointPolicy {
            locks,
            quota_targets: QuotaTargets {
                mgmt_percent: mgmt,
                overall_percent: overall,
            },
            never_touch_when: guards,
        },
        post_flags_quota: PostFlagsQuota {
            retry_by_label_pct: retry,
            pwrmgt_by_label_pct: pwrmgt,
            moredata_by_label_pct: moredata,
            forbid: BTreeMap::from([(PostFlag::Retry, forbid_ctrl)]),
        },
    }
}
