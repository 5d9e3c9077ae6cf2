use thiserror::Error;

use crate::distribution::Flags24;
use crate::ruleset::Ruleset;
use crate::sampler::{draw_bernoulli, draw_categorical, draw_rssi, Prng, SampleError};
use crate::schema::{FrameRecord, Label};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmitError {
    #[error("ruleset has no distribution at `{0}`")]
    MissingDistribution(String),
    #[error("{path}: {source}")]
    Sample {
        path: String,
        #[source]
        source: SampleError,
    },
}

fn missing(path: String) -> EmitError {
    EmitError::MissingDistribution(path)
}

/// Draws one candidate record for `label`.
///
/// Draw order: type, subtype, channel frequency, (cck, ofdm), radiotap
/// length, tsft, rssi, ds, frame length, duration. The flag bits start at
/// zero and are set only by the quota stage.
pub fn emit_row(rs: &Ruleset, label: Label, rng: &mut Prng) -> Result<FrameRecord, EmitError> {
    let type_mix = rs
        .type_mix_by_label_percent
        .get(&label)
        .ok_or_else(|| missing(format!("type_mix_by_label_percent.{label}")))?;
    let frame_type = draw_categorical(type_mix, rng);

    let subtype_mix = rs
        .wlan_fc_subtype_by_label_and_type_percent
        .get(&label)
        .and_then(|m| m.get(&frame_type))
        .ok_or_else(|| {
            missing(format!(
                "wlan_fc_subtype_by_label_and_type_percent.{label}.{frame_type}"
            ))
        })?;
    let subtype = draw_categorical(subtype_mix, rng);

    let freq_mix = rs
        .channel_frequency_by_label_percent
        .get(&label)
        .ok_or_else(|| missing(format!("channel_frequency_by_label_percent.{label}")))?;
    let freq = draw_categorical(freq_mix, rng);

    let flags = if freq == 5180 {
        Flags24::OFDM
    } else {
        draw_categorical(&rs.radiotap.observed_24_flags_percent, rng)
    };

    let length = draw_categorical(rs.length_mix(label), rng);
    let p_tsft = rs
        .tsft_probability(label, length)
        .ok_or_else(|| missing(format!("radiotap.tsft_for_length.{length}")))?;
    let tsft = draw_bernoulli(p_tsft, rng).map_err(|source| EmitError::Sample {
        path: format!("radiotap.tsft_for_length.{length}"),
        source,
    })?;

    let rssi_rule = rs
        .rssi_rules
        .get(&label)
        .ok_or_else(|| missing(format!("rssi_rules.{label}")))?;
    let rssi = draw_rssi(rssi_rule, rng).map_err(|source| EmitError::Sample {
        path: format!("rssi_rules.{label}"),
        source,
    })?;

    let ds = if frame_type == 0 || frame_type == 1 {
        1
    } else {
        draw_categorical(&rs.wlan_fc_ds_rules.data_quota_percent, rng)
    };

    let flen_mix = rs
        .frame_length_rules
        .get(&label)
        .ok_or_else(|| missing(format!("frame_length_rules.{label}")))?;
    let frame_len = draw_categorical(flen_mix, rng);

    let duration_mix = if frame_type == 1 {
        rs.duration_rules
            .control_by_subtype_percent
            .get(&subtype)
            .ok_or_else(|| {
                missing(format!(
                    "duration_rules.control_by_subtype_percent.{subtype}"
                ))
            })?
    } else {
        rs.duration_rules
            .by_label_percent
            .get(&label)
            .ok_or_else(|| missing(format!("duration_rules.by_label_percent.{label}")))?
    };
    let duration = draw_categorical(duration_mix, rng);

    Ok(FrameRecord {
        wlan_fc_type: frame_type,
        wlan_fc_subtype: subtype,
        wlan_fc_ds: ds,
        frame_len,
        wlan_duration: duration,
        radiotap_channel_freq: freq,
        radiotap_flags_cck: flags.cck,
        radiotap_flags_ofdm: flags.ofdm,
        radiotap_length: length,
        radiotap_present_tsft: tsft,
        radiotap_dbm_antsignal: rssi,
        wlan_fc_frag: 0,
        wlan_fc_retry: 0,
        wlan_fc_pwrmgt: 0,
        wlan_fc_moredata: 0,
        wlan_fc_protected: 0,
        label: label.id(),
    })
}
