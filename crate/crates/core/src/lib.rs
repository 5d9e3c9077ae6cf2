//! Rule-strict synthetic generation of 16-feature 802.11 frame records, and
//! the metrics used to compare a synthetic dataset against a real one.
//!
//! ```
//! use wifisynth::{fixtures, generate, GenerationConfig, Label};
//!
//! let cfg = GenerationConfig::new(fixtures::reference_ruleset(), 42);
//! let (ds, _stats) = generate(&cfg).unwrap();
//! assert_eq!(ds.count_label(Label::Flooding), 20);
//! ```

pub mod csv;
pub mod distribution;
pub mod fidelity;
pub mod fixtures;
pub mod generator;
pub mod lint;
pub mod ruleset;
pub mod sampler;
pub mod schema;

pub use csv::{decode_csv, encode_csv, encode_csv_to_vec, CsvError};
pub use distribution::{DiscreteDistribution, DistributionError, Flags24};
pub use generator::{
    check, enforce_quotas, generate, GenerateError, GenerationConfig, GenerationStats, RuleId,
    ValidationReport,
};
pub use lint::{lint_ruleset, Diagnostic, LintCode};
pub use ruleset::{parse_ruleset, serialize_ruleset, Ruleset, RulesetError};
pub use sampler::Prng;
pub use schema::{Dataset, Field, FrameRecord, Label, FEATURE_COUNT, SCHEMA_VERSION};
