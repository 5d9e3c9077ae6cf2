use proptest::prelude::*;
use wifisynth::distribution::PERCENT_SUM_TOLERANCE;
use wifisynth::{
    decode_csv, encode_csv_to_vec, fixtures, lint_ruleset, parse_ruleset, serialize_ruleset,
    Dataset, Field, FrameRecord, Label,
};

fn record() -> impl Strategy<Value = FrameRecord> {
    (prop::array::uniform16(-100_000i64..100_000), 0i64..3).prop_map(|(f, label)| {
        let mut r = FrameRecord::default();
        for (field, v) in Field::features().iter().zip(f) {
            r.set(*field, v);
        }
        r.label = label;
        r
    })
}

proptest! {
    #[test]
    fn csv_roundtrip(rows in prop::collection::vec(record(), 0..60)) {
        let ds = Dataset::new(rows);
        let bytes = encode_csv_to_vec(&ds);
        let back = decode_csv(bytes.as_slice()).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(encode_csv_to_vec(&back), bytes);
    }

    #[test]
    fn consistent_rulesets_roundtrip_and_lint_clean(seed in any::<u64>()) {
        let rs = fixtures::consistent_ruleset(seed);
        let text = serialize_ruleset(&rs);
        let back = parse_ruleset(&text).unwrap();
        prop_assert_eq!(&back, &rs);
        prop_assert_eq!(serialize_ruleset(&back), text);
        prop_assert!(lint_ruleset(&rs).is_empty(), "{:?}", lint_ruleset(&rs));
    }

    #[test]
    fn every_distribution_sums_to_100(seed in any::<u64>()) {
        let rs = fixtures::consistent_ruleset(seed);
        let mut sums: Vec<f64> = Vec::new();
        let total = |d: &wifisynth::DiscreteDistribution| d.entries().iter().map(|e| e.1).sum::<f64>();
        for label in Label::ALL {
            sums.push(total(&rs.type_mix_by_label_percent[&label]));
            sums.push(total(&rs.channel_frequency_by_label_percent[&label]));
            sums.push(total(&rs.rssi_rules[&label]));
            sums.push(total(&rs.frame_length_rules[&label]));
            sums.push(total(&rs.duration_rules.by_label_percent[&label]));
            sums.extend(rs.wlan_fc_subtype_by_label_and_type_percent[&label].values().map(total));
        }
        sums.push(total(&rs.radiotap.length_mix_percent));
        sums.push(total(&rs.wlan_fc_ds_rules.data_quota_percent));
        sums.extend(rs.duration_rules.control_by_subtype_percent.values().map(total));
        for s in sums {
            prop_assert!((s - 100.0).abs() <= PERCENT_SUM_TOLERANCE, "sum {}", s);
        }
    }
}

#[test]
fn reference_file_parses_and_lints_clean() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../rulesets/reference.json"
    ))
    .unwrap();
    let rs = parse_ruleset(&text).unwrap();
    assert_eq!(rs.total_rows(), 1000);
    assert!(lint_ruleset(&rs).is_empty());
}

#[test]
fn header_permutation_and_aliases_decode_identically() {
    let ds = Dataset::new(vec![FrameRecord {
        wlan_fc_type: 2,
        frame_len: 1500,
        radiotap_dbm_antsignal: -61,
        label: 1,
        ..Default::default()
    }]);
    let canonical = decode_csv(encode_csv_to_vec(&ds).as_slice()).unwrap();
    let mut names: Vec<String> = Field::ALL
        .iter()
        .rev()
        .map(|f| f.ident().to_string())
        .collect();
    names[0] = "LABEL".into();
    let values: Vec<String> = Field::ALL
        .iter()
        .rev()
        .map(|f| ds.rows[0].get(*f).to_string())
        .collect();
    let text = format!("{}\n{}\n", names.join(","), values.join(","));
    assert_eq!(decode_csv(text.as_bytes()).unwrap(), canonical);
}
