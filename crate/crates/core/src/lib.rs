//! Fuzzy rule-based soil classification.
//!
//! Soil index properties are fuzzified over triangular linguistic
//! partitions ([`fuzzy`]), matched against IF-THEN rules ([`rules`]) written
//! in a small text format ([`dsl`]), and ranked into Highway Research Board
//! subgroups ([`hrb`]). Rule bases can also be induced from labeled samples
//! ([`induce`]).
//!
//! ```
//! use soilfuzz::hrb::{self, HrbOptions, PresetKind, SoilSample, Subgroup};
//!
//! let sample = SoilSample::new(100.0, 80.0, 40.0, 25.0, 17.0).unwrap();
//! let report = hrb::classify_hrb(&sample, &hrb::preset(PresetKind::Paper), HrbOptions::default()).unwrap();
//! assert_eq!(report.subgroup, Some(Subgroup::A4));
//! assert_eq!(hrb::crisp_classify(&sample), Subgroup::A4);
//! ```

pub mod dsl;
pub mod fuzzy;
pub mod hrb;
pub mod induce;
pub mod rules;

pub use fuzzy::{Descriptor, LinguisticVariable, MembershipVector, Memberships, Variables};
pub use rules::{classify, rule_dof, score_rulebase, variable_match, Aggregator, ClassificationReport, Rule, RuleBase};

/// Rounds half-up to 4 decimal places, the precision reports are rendered in.
pub fn round4(x: f64) -> f64 {
    (x * 1e4 + 0.5).floor() / 1e4
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fuzzification.md")]
    mod fuzzification {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/dsl.md")]
    mod dsl {}
    #[doc = include_str!("../../../book/src/hrb.md")]
    mod hrb {}
    #[doc = include_str!("../../../book/src/induction.md")]
    mod induction {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
