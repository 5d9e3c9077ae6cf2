//! The labeled 16-feature frame record and its fixed column layout.
//!
//! Column order is the order of the generator's row literal, with `Label`
//! moved to the last column. File headers use the dotted capture names
//! (`wlan.fc.type`); [`Field::from_name`] also accepts the underscore
//! identifiers used in code (`wlan_fc_type`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Identifier stamped on every [`Dataset`] built against this layout.
pub const SCHEMA_VERSION: &str = "awid3-16f/1";

/// Number of feature columns (the label is not a feature).
pub const FEATURE_COUNT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown field name `{0}`")]
pub struct UnknownField(pub String);

/// One column of the frame schema, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    WlanFcType,
    WlanFcSubtype,
    WlanFcDs,
    FrameLen,
    WlanDuration,
    RadiotapChannelFreq,
    RadiotapFlagsCck,
    RadiotapFlagsOfdm,
    RadiotapLength,
    RadiotapPresentTsft,
    RadiotapDbmAntsignal,
    WlanFcFrag,
    WlanFcRetry,
    WlanFcPwrmgt,
    WlanFcMoredata,
    WlanFcProtected,
    Label,
}

impl Field {
    /// All columns, features first, `Label` last.
    pub const ALL: [Field; FEATURE_COUNT + 1] = [
        Field::WlanFcType,
        Field::WlanFcSubtype,
        Field::WlanFcDs,
        Field::FrameLen,
        Field::WlanDuration,
        Field::RadiotapChannelFreq,
        Field::RadiotapFlagsCck,
        Field::RadiotapFlagsOfdm,
        Field::RadiotapLength,
        Field::RadiotapPresentTsft,
        Field::RadiotapDbmAntsignal,
        Field::WlanFcFrag,
        Field::WlanFcRetry,
        Field::WlanFcPwrmgt,
        Field::WlanFcMoredata,
        Field::WlanFcProtected,
        Field::Label,
    ];

    pub fn features() -> &'static [Field] {
        &Self::ALL[..FEATURE_COUNT]
    }

    /// Zero-based CSV column index.
    pub fn column(self) -> usize {
        self as usize
    }

    /// Dotted header name.
    pub fn name(self) -> &'static str {
        match self {
            Field::WlanFcType => "wlan.fc.type",
            Field::WlanFcSubtype => "wlan.fc.subtype",
            Field::WlanFcDs => "wlan.fc.ds",
            Field::FrameLen => "frame.len",
            Field::WlanDuration => "wlan.duration",
            Field::RadiotapChannelFreq => "radiotap.channel.freq",
            Field::RadiotapFlagsCck => "radiotap.channel.flags.cck",
            Field::RadiotapFlagsOfdm => "radiotap.channel.flags.ofdm",
            Field::RadiotapLength => "radiotap.length",
            Field::RadiotapPresentTsft => "radiotap.present.tsft",
            Field::RadiotapDbmAntsignal => "radiotap.dbm_antsignal",
            Field::WlanFcFrag => "wlan.fc.frag",
            Field::WlanFcRetry => "wlan.fc.retry",
            Field::WlanFcPwrmgt => "wlan.fc.pwrmgt",
            Field::WlanFcMoredata => "wlan.fc.moredata",
            Field::WlanFcProtected => "wlan.fc.protected",
            Field::Label => "Label",
        }
    }

    /// Underscore identifier, matching the [`FrameRecord`] member name.
    pub fn ident(self) -> &'static str {
        match self {
            Field::WlanFcType => "wlan_fc_type",
            Field::WlanFcSubtype => "wlan_fc_subtype",
            Field::WlanFcDs => "wlan_fc_ds",
            Field::FrameLen => "frame_len",
            Field::WlanDuration => "wlan_duration",
            Field::RadiotapChannelFreq => "radiotap_channel_freq",
            Field::RadiotapFlagsCck => "radiotap_flags_cck",
            Field::RadiotapFlagsOfdm => "radiotap_flags_ofdm",
            Field::RadiotapLength => "radiotap_length",
            Field::RadiotapPresentTsft => "radiotap_present_tsft",
            Field::RadiotapDbmAntsignal => "radiotap_dbm_antsignal",
            Field::WlanFcFrag => "wlan_fc_frag",
            Field::WlanFcRetry => "wlan_fc_retry",
            Field::WlanFcPwrmgt => "wlan_fc_pwrmgt",
            Field::WlanFcMoredata => "wlan_fc_moredata",
            Field::WlanFcProtected => "wlan_fc_protected",
            Field::Label => "label",
        }
    }

    /// Resolves a header or identifier through the alias table: dotted
    /// names, underscore identifiers, and dotted names with `.` replaced by
    /// `_` are all accepted.
    pub fn from_name(name: &str) -> Result<Field, UnknownField> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| {
                name == f.name()
                    || name == f.ident()
                    || name == f.name().replace('.', "_")
                    || (*f == Field::Label && name.eq_ignore_ascii_case("label"))
            })
            .ok_or_else(|| UnknownField(name.to_string()))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = UnknownField;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::from_name(s)
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Field::from_name(&name).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label id {0} is not one of 0, 1, 2")]
pub struct InvalidLabel(pub i64);

/// Traffic class. Integer ids are fixed: 0 normal, 1 flooding,
/// 2 impersonation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Normal = 0,
    Flooding = 1,
    Impersonation = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Normal, Label::Flooding, Label::Impersonation];

    pub fn id(self) -> i64 {
        self as i64
    }

    pub fn default_name(self) -> &'static str {
        match self {
            Label::Normal => "Normal",
            Label::Flooding => "Flooding",
            Label::Impersonation => "Impersonation",
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = InvalidLabel;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Normal),
            1 => Ok(Label::Flooding),
            2 => Ok(Label::Impersonation),
            other => Err(InvalidLabel(other)),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(*self as u8)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let id = u8::deserialize(deserializer)?;
        Label::try_from(i64::from(id)).map_err(serde::de::Error::custom)
    }
}

/// One labeled row. Every field is stored as a plain integer so that
/// external captures violating generator invariants can still be decoded
/// and checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FrameRecord {
    pub wlan_fc_type: i64,
    pub wlan_fc_subtype: i64,
    pub wlan_fc_ds: i64,
    pub frame_len: i64,
    pub wlan_duration: i64,
    pub radiotap_channel_freq: i64,
    pub radiotap_flags_cck: i64,
    pub radiotap_flags_ofdm: i64,
    pub radiotap_length: i64,
    pub radiotap_present_tsft: i64,
    pub radiotap_dbm_antsignal: i64,
    pub wlan_fc_frag: i64,
    pub wlan_fc_retry: i64,
    pub wlan_fc_pwrmgt: i64,
    pub wlan_fc_moredata: i64,
    pub wlan_fc_protected: i64,
    pub label: i64,
}

impl FrameRecord {
    pub fn get(&self, field: Field) -> i64 {
        match field {
            Field::WlanFcType => self.wlan_fc_type,
            Field::WlanFcSubtype => self.wlan_fc_subtype,
            Field::WlanFcDs => self.wlan_fc_ds,
            Field::FrameLen => self.frame_len,
            Field::WlanDuration => self.wlan_duration,
            Field::RadiotapChannelFreq => self.radiotap_channel_freq,
            Field::RadiotapFlagsCck => self.radiotap_flags_cck,
            Field::RadiotapFlagsOfdm => self.radiotap_flags_ofdm,
            Field::RadiotapLength => self.radiotap_length,
            Field::RadiotapPresentTsft => self.radiotap_present_tsft,
            Field::RadiotapDbmAntsignal => self.radiotap_dbm_antsignal,
            Field::WlanFcFrag => self.wlan_fc_frag,
            Field::WlanFcRetry => self.wlan_fc_retry,
            Field::WlanFcPwrmgt => self.wlan_fc_pwrmgt,
            Field::WlanFcMoredata => self.wlan_fc_moredata,
            Field::WlanFcProtected => self.wlan_fc_protected,
            Field::Label => self.label,
        }
    }

    pub fn set(&mut self, field: Field, value: i64) {
        let slot = match field {
            Field::WlanFcType => &mut self.wlan_fc_type,
            Field::WlanFcSubtype => &mut self.wlan_fc_subtype,
            Field::WlanFcDs => &mut self.wlan_fc_ds,
            Field::FrameLen => &mut self.frame_len,
            Field::WlanDuration => &mut self.wlan_duration,
            Field::RadiotapChannelFreq => &mut self.radiotap_channel_freq,
            Field::RadiotapFlagsCck => &mut self.radiotap_flags_cck,
            Field::RadiotapFlagsOfdm => &mut self.radiotap_flags_ofdm,
            Field::RadiotapLength => &mut self.radiotap_length,
            Field::RadiotapPresentTsft => &mut self.radiotap_present_tsft,
            Field::RadiotapDbmAntsignal => &mut self.radiotap_dbm_antsignal,
            Field::WlanFcFrag => &mut self.wlan_fc_frag,
            Field::WlanFcRetry => &mut self.wlan_fc_retry,
            Field::WlanFcPwrmgt => &mut self.wlan_fc_pwrmgt,
            Field::WlanFcMoredata => &mut self.wlan_fc_moredata,
            Field::WlanFcProtected => &mut self.wlan_fc_protected,
            Field::Label => &mut self.label,
        };
        *slot = value;
    }

    /// The 16 feature values in column order, label excluded.
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for (slot, field) in out.iter_mut().zip(Field::features()) {
            *slot = self.get(*field) as f64;
        }
        out
    }

    /// The record's class, if its label id is one of the known classes.
    pub fn class(&self) -> Option<Label> {
        Label::try_from(self.label).ok()
    }
}

/// An ordered collection of records sharing the fixed column layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub rows: Vec<FrameRecord>,
    pub schema_version: String,
}

impl Dataset {
    pub fn new(rows: Vec<FrameRecord>) -> Self {
        Dataset {
            rows,
            schema_version: SCHEMA_VERSION.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label.id()).count()
    }

    /// One column as reals, in row order.
    pub fn column(&self, field: Field) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(field) as f64).collect()
    }
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::new(Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_indices_follow_declaration_order() {
        for (i, f) in Field::ALL.iter().enumerate() {
            assert_eq!(f.column(), i);
        }
        assert_eq!(Field::Label.column(), FEATURE_COUNT);
    }

    #[test]
    fn alias_table_resolves_both_spellings() {
        for f in Field::ALL {
            assert_eq!(Field::from_name(f.name()).unwrap(), f);
            assert_eq!(Field::from_name(f.ident()).unwrap(), f);
        }
        assert_eq!(
            Field::from_name("radiotap_channel_flags_cck").unwrap(),
            Field::RadiotapFlagsCck
        );
        assert!(Field::from_name("wlan.fc.bogus").is_err());
    }

    #[test]
    fn get_set_cover_every_field() {
        let mut r = FrameRecord::default();
        for (i, f) in Field::ALL.iter().enumerate() {
            r.set(*f, i as i64 + 100);
        }
        for (i, f) in Field::ALL.iter().enumerate() {
            assert_eq!(r.get(*f), i as i64 + 100);
        }
        assert_eq!(r.features()[0], 100.0);
        assert_eq!(r.features()[15], 115.0);
    }

    #[test]
    fn label_ids_round_trip() {
        for l in Label::ALL {
            assert_eq!(Label::try_from(l.id()).unwrap(), l);
        }
        assert_eq!(Label::try_from(3), Err(InvalidLabel(3)));
    }
}
