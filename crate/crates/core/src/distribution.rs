//! Finite categorical distributions expressed in percent.
//!
//! In ruleset documents a distribution is a JSON object mapping each support
//! value (as a string key) to its percent, e.g. `{"2412": 40, "5180": 60}`.
//! Entry order is document order and is preserved: the sampler scans the
//! cumulative percents in that order.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance on the sum of percents.
pub const PERCENT_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution has no entries")]
    Empty,
    #[error("percent for `{value}` is {percent}, outside [0, 100]")]
    PercentOutOfRange { value: String, percent: f64 },
    #[error("percents sum to {0}, expected 100")]
    BadSum(f64),
    #[error("value `{0}` appears more than once")]
    Duplicate(String),
}

/// Values a distribution can range over. Keys are rendered with
/// `Display` and read back with `FromStr`.
pub trait SupportValue: Copy + PartialEq + fmt::Display + FromStr {}

impl SupportValue for i64 {}

/// Joint 2.4 GHz PHY flag pair, written `"cck,ofdm"` (e.g. `"1,0"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flags24 {
    pub cck: i64,
    pub ofdm: i64,
}

impl Flags24 {
    pub const CCK: Flags24 = Flags24 { cck: 1, ofdm: 0 };
    pub const OFDM: Flags24 = Flags24 { cck: 0, ofdm: 1 };
}

impl fmt::Display for Flags24 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.cck, self.ofdm)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expected a `cck,ofdm` bit pair, got {0:?}")]
pub struct BadFlags(String);

impl FromStr for Flags24 {
    type Err = BadFlags;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bit = |t: &str| match t.trim() {
            "0" => Some(0),
            "1" => Some(1),
            _ => None,
        };
        let (a, b) = s.split_once(',').ok_or_else(|| BadFlags(s.to_string()))?;
        match (bit(a), bit(b)) {
            (Some(cck), Some(ofdm)) => Ok(Flags24 { cck, ofdm }),
            _ => Err(BadFlags(s.to_string())),
        }
    }
}

impl SupportValue for Flags24 {}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<V = i64> {
    entries: Vec<(V, f64)>,
}

impl<V: SupportValue> DiscreteDistribution<V> {
    /// Builds a validated distribution.
    pub fn new(entries: Vec<(V, f64)>) -> Result<Self, DistributionError> {
        let d = DiscreteDistribution { entries };
        d.validate()?;
        Ok(d)
    }

    /// A distribution with all mass on one value.
    pub fn point(value: V) -> Self {
        DiscreteDistribution {
            entries: vec![(value, 100.0)],
        }
    }

    pub(crate) fn unchecked(entries: Vec<(V, f64)>) -> Self {
        DiscreteDistribution { entries }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        if self.entries.is_empty() {
            return Err(DistributionError::Empty);
        }
        for (i, (v, p)) in self.entries.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 100.0 {
                return Err(DistributionError::PercentOutOfRange {
                    value: v.to_string(),
                    percent: *p,
                });
            }
            if self.entries[..i].iter().any(|(w, _)| w == v) {
                return Err(DistributionError::Duplicate(v.to_string()));
            }
        }
        let sum: f64 = self.entries.iter().map(|(_, p)| p).sum();
        if (sum - 100.0).abs() > PERCENT_SUM_TOLERANCE {
            return Err(DistributionError::BadSum(sum));
        }
        Ok(())
    }

    pub fn entries(&self) -> &[(V, f64)] {
        &self.entries
    }

    /// All listed values, including zero-percent ones.
    pub fn support(&self) -> impl Iterator<Item = V> + '_ {
        self.entries.iter().map(|(v, _)| *v)
    }

    /// Values with strictly positive percent.
    pub fn reachable(&self) -> impl Iterator<Item = V> + '_ {
        self.entries
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(v, _)| *v)
    }

    pub fn contains(&self, value: V) -> bool {
        self.entries.iter().any(|(v, _)| *v == value)
    }

    pub fn percent_of(&self, value: V) -> f64 {
        self.entries
            .iter()
            .find(|(v, _)| *v == value)
            .map_or(0.0, |(_, p)| *p)
    }
}

impl DiscreteDistribution<i64> {
    /// Expectation of the value under the distribution.
    pub fn mean(&self) -> f64 {
        self.entries
            .iter()
            .map(|(v, p)| *v as f64 * p / 100.0)
            .sum()
    }
}

impl<V: SupportValue> Serialize for DiscreteDistribution<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (v, p) in &self.entries {
            map.serialize_entry(&v.to_string(), p)?;
        }
        map.end()
    }
}

impl<'de, V> Deserialize<'de> for DiscreteDistribution<V>
where
    V: SupportValue,
    V::Err: fmt::Display,
{
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor<V>(PhantomData<V>);

        impl<'de, V> Visitor<'de> for EntriesVisitor<V>
        where
            V: SupportValue,
            V::Err: fmt::Display,
        {
            type Value = DiscreteDistribution<V>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping support values to percents")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut entries: Vec<(V, f64)> = Vec::new();
                while let Some((key, percent)) = access.next_entry::<String, f64>()? {
                    let value = key.parse::<V>().map_err(|e| {
                        serde::de::Error::custom(format!("bad support value `{key}`: {e}"))
                    })?;
                    if entries.iter().any(|(w, _)| *w == value) {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate support value `{key}`"
                        )));
                    }
                    entries.push((value, percent));
                }
                // Percent range and sum are checked by the ruleset validator,
                // which can report the document path.
                Ok(DiscreteDistribution::unchecked(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor(PhantomData))
    }
}
