//! Highway Research Board (AASHTO M145) soil classification.
//!
//! Five linguistic variables cover the sieve fractions and Atterberg limits.
//! Two rule presets are shipped: `paper` follows the published rule table
//! (with the amendments noted in `hrb-paper.frules`) and `calibrated` maps the
//! crisp M145 limits onto the descriptor ladders. [`crisp_classify`] is the
//! laboratory first-fit procedure both fuzzy presets are checked against.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{self, ParseErrors};
use crate::fuzzy::{FuzzifyError, Memberships, Variables};
use crate::rules::{classify, Aggregator, ClassificationReport, RuleBase, RuleError};

pub const VARIABLES_FILE: &str = include_str!("../presets/hrb.vars");
pub const PAPER_RULES: &str = include_str!("../presets/hrb-paper.frules");
pub const CALIBRATED_RULES: &str = include_str!("../presets/hrb-calibrated.frules");

pub const P2MM: &str = "p2mm";
pub const P425: &str = "p425";
pub const P075: &str = "p075";
pub const LL: &str = "ll";
pub const PI: &str = "pi";

/// Rule class shared by A-7-5 and A-7-6.
pub const A7_GROUP: &str = "A-7";

/// The built-in variable set.
pub fn variables() -> Variables {
    Variables::parse(VARIABLES_FILE).expect("built-in variables file is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    Paper,
    Calibrated,
}

impl PresetKind {
    pub fn file_name(self) -> &'static str {
        match self {
            PresetKind::Paper => "hrb-paper.frules",
            PresetKind::Calibrated => "hrb-calibrated.frules",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            PresetKind::Paper => PAPER_RULES,
            PresetKind::Calibrated => CALIBRATED_RULES,
        }
    }
}

impl FromStr for PresetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(PresetKind::Paper),
            "calibrated" => Ok(PresetKind::Calibrated),
            other => Err(format!("unknown preset `{other}` (expected paper or calibrated)")),
        }
    }
}

/// A built-in rule base over [`variables`].
pub fn preset(kind: PresetKind) -> RuleBase {
    preset_with(kind, &variables()).expect("built-in preset is valid")
}

/// Parses the built-in rules of `kind` against another variable set.
pub fn preset_with(kind: PresetKind, vars: &Variables) -> Result<RuleBase, ParseErrors> {
    dsl::parse_rules(kind.source(), vars)
}

/// Which value feeds the plasticity-index variable.
///
/// The published membership table for plasticity index is reproduced when
/// the partition is evaluated at the plastic limit; `Pl` selects that
/// behaviour. `Pi` is the physical reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PiSource {
    #[default]
    Pi,
    Pl,
}

impl FromStr for PiSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi" => Ok(PiSource::Pi),
            "pl" => Ok(PiSource::Pl),
            other => Err(format!("unknown pi source `{other}` (expected pi or pl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("{field} is not a finite number")]
    NonFinite { field: &'static str },
    #[error("{field} = {value} is outside 0..=100 percent passing")]
    PercentOutOfRange { field: &'static str, value: f64 },
    #[error("sieve monotonicity violated: need p075 <= p425 <= p2mm, got p2mm={p2mm}, p425={p425}, p075={p075}")]
    SieveOrder { p2mm: f64, p425: f64, p075: f64 },
    #[error("{field} = {value} is negative")]
    NegativeLimit { field: &'static str, value: f64 },
    #[error("plasticity index {0} is negative")]
    NegativePi(f64),
}

/// Index properties of one specimen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoilSample {
    p2mm: f64,
    p425: f64,
    p075: f64,
    ll: f64,
    pl: f64,
    pi: f64,
}

impl SoilSample {
    /// Percent passing the 2 mm, 0.425 mm and 0.075 mm sieves, liquid
    /// limit and plastic limit. The plasticity index is `ll - pl`.
    pub fn new(p2mm: f64, p425: f64, p075: f64, ll: f64, pl: f64) -> Result<Self, SampleError> {
        Self::with_pi(p2mm, p425, p075, ll, pl, None)
    }

    /// Like [`SoilSample::new`], with an optional explicitly measured
    /// plasticity index.
    pub fn with_pi(p2mm: f64, p425: f64, p075: f64, ll: f64, pl: f64, pi: Option<f64>) -> Result<Self, SampleError> {
        let fields = [("p2mm", p2mm), ("p425", p425), ("p075", p075), ("ll", ll), ("pl", pl)];
        for (field, v) in fields.into_iter().chain(pi.map(|v| ("pi", v))) {
            if !v.is_finite() {
                return Err(SampleError::NonFinite { field });
            }
        }
        for (field, value) in [("p2mm", p2mm), ("p425", p425), ("p075", p075)] {
            if !(0.0..=100.0).contains(&value) {
                return Err(SampleError::PercentOutOfRange { field, value });
            }
        }
        if !(p075 <= p425 && p425 <= p2mm) {
            return Err(SampleError::SieveOrder { p2mm, p425, p075 });
        }
        for (field, value) in [("ll", ll), ("pl", pl)] {
            if value < 0.0 {
                return Err(SampleError::NegativeLimit { field, value });
            }
        }
        let pi = pi.unwrap_or(ll - pl);
        if pi < 0.0 {
            return Err(SampleError::NegativePi(pi));
        }
        Ok(Self { p2mm, p425, p075, ll, pl, pi })
    }

    pub fn p2mm(&self) -> f64 {
        self.p2mm
    }
    pub fn p425(&self) -> f64 {
        self.p425
    }
    pub fn p075(&self) -> f64 {
        self.p075
    }
    pub fn ll(&self) -> f64 {
        self.ll
    }
    pub fn pl(&self) -> f64 {
        self.pl
    }
    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// Input fed to each variable.
    pub fn inputs(&self, pi_source: PiSource) -> [(&'static str, f64); 5] {
        let pi = match pi_source {
            PiSource::Pi => self.pi,
            PiSource::Pl => self.pl,
        };
        [(P2MM, self.p2mm), (P425, self.p425), (P075, self.p075), (LL, self.ll), (PI, pi)]
    }
}

/// The twelve HRB subgroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subgroup {
    A1a,
    A1b,
    A3,
    A24,
    A25,
    A26,
    A27,
    A4,
    A5,
    A6,
    A75,
    A76,
}

impl Subgroup {
    pub const ALL: [Subgroup; 12] = [
        Subgroup::A1a,
        Subgroup::A1b,
        Subgroup::A3,
        Subgroup::A24,
        Subgroup::A25,
        Subgroup::A26,
        Subgroup::A27,
        Subgroup::A4,
        Subgroup::A5,
        Subgroup::A6,
        Subgroup::A75,
        Subgroup::A76,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subgroup::A1a => "A-1-a",
            Subgroup::A1b => "A-1-b",
            Subgroup::A3 => "A-3",
            Subgroup::A24 => "A-2-4",
            Subgroup::A25 => "A-2-5",
            Subgroup::A26 => "A-2-6",
            Subgroup::A27 => "A-2-7",
            Subgroup::A4 => "A-4",
            Subgroup::A5 => "A-5",
            Subgroup::A6 => "A-6",
            Subgroup::A75 => "A-7-5",
            Subgroup::A76 => "A-7-6",
        }
    }

    /// Rule class this subgroup is scored under; both A-7 subgroups share one.
    pub fn rule_class(self) -> &'static str {
        match self {
            Subgroup::A75 | Subgroup::A76 => A7_GROUP,
            other => other.as_str(),
        }
    }

    /// General rating as subgrade material.
    pub fn subgrade_rating(self) -> &'static str {
        match self {
            Subgroup::A1a | Subgroup::A1b | Subgroup::A3 | Subgroup::A24 | Subgroup::A25 => "excellent to good",
            _ => "fair to poor",
        }
    }

    /// Usual significant constituent materials.
    pub fn materials(self) -> &'static str {
        match self {
            Subgroup::A1a | Subgroup::A1b => "gravel and sand",
            Subgroup::A3 => "fine sand",
            Subgroup::A24 | Subgroup::A25 | Subgroup::A26 | Subgroup::A27 => "silty or clayey gravel and sand",
            Subgroup::A4 | Subgroup::A5 => "silty soils",
            Subgroup::A6 | Subgroup::A75 | Subgroup::A76 => "clayey soils",
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subgroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subgroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown subgroup `{s}`"))
    }
}

impl Serialize for Subgroup {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Splits group A-7: A-7-5 when `pi <= ll - 30`, otherwise A-7-6.
///
/// ```
/// use soilfuzz::hrb::{a7_split, Subgroup};
///
/// assert_eq!(a7_split(65.0, 40.0), Subgroup::A76);
/// assert_eq!(a7_split(60.0, 30.0), Subgroup::A75);
/// ```
pub fn a7_split(ll: f64, pi: f64) -> Subgroup {
    if pi <= ll - 30.0 {
        Subgroup::A75
    } else {
        Subgroup::A76
    }
}

/// Left-to-right first-fit over the M145 table.
pub fn crisp_classify(s: &SoilSample) -> Subgroup {
    let (p2mm, p425, p075, ll, pi) = (s.p2mm, s.p425, s.p075, s.ll, s.pi);
    let low_ll = ll <= 40.0;
    let low_pi = pi <= 10.0;
    if p2mm <= 50.0 && p425 <= 30.0 && p075 <= 15.0 && pi <= 6.0 {
        return Subgroup::A1a;
    }
    if p425 <= 50.0 && p075 <= 25.0 && pi <= 6.0 {
        return Subgroup::A1b;
    }
    if p425 > 50.0 && p075 <= 10.0 && pi == 0.0 {
        return Subgroup::A3;
    }
    if p075 <= 35.0 {
        return match (low_ll, low_pi) {
            (true, true) => Subgroup::A24,
            (false, true) => Subgroup::A25,
            (true, false) => Subgroup::A26,
            (false, false) => Subgroup::A27,
        };
    }
    match (low_ll, low_pi) {
        (true, true) => Subgroup::A4,
        (false, true) => Subgroup::A5,
        (true, false) => Subgroup::A6,
        (false, false) => a7_split(ll, pi),
    }
}

/// Fuzzifies a sample over the built-in variables.
pub fn fuzzify_sample(s: &SoilSample, pi_source: PiSource) -> Memberships {
    fuzzify_sample_with(&variables(), s, pi_source).expect("valid samples lie inside the built-in domains")
}

/// Fuzzifies a sample over `vars`, which must define the five HRB variables.
pub fn fuzzify_sample_with(vars: &Variables, s: &SoilSample, pi_source: PiSource) -> Result<Memberships, FuzzifyError> {
    vars.fuzzify_all(s.inputs(pi_source))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HrbOptions {
    pub aggregator: Aggregator,
    pub pi_source: PiSource,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HrbError {
    #[error(transparent)]
    Fuzzify(#[from] FuzzifyError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Inputs of the A-7 split, recorded when the winner is group A-7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A7Inputs {
    pub ll: f64,
    pub pi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrbReport {
    pub report: ClassificationReport,
    /// Final class label: the winning rule class, with A-7 split.
    pub class: String,
    /// `None` when a custom rule base uses classes outside HRB.
    pub subgroup: Option<Subgroup>,
    pub a7: Option<A7Inputs>,
}

impl HrbReport {
    pub fn subgrade_rating(&self) -> Option<&'static str> {
        self.subgroup.map(Subgroup::subgrade_rating)
    }
}

/// Classifies a sample with `rb`, splitting an A-7 winner into A-7-5/A-7-6.
///
/// ```
/// use soilfuzz::hrb::{self, HrbOptions, PresetKind, SoilSample, Subgroup};
///
/// let sample = SoilSample::new(100.0, 100.0, 92.0, 65.0, 25.0).unwrap();
/// let rep = hrb::classify_hrb(&sample, &hrb::preset(PresetKind::Paper), HrbOptions::default()).unwrap();
/// assert_eq!(rep.subgroup, Some(Subgroup::A76));
/// ```
pub fn classify_hrb(s: &SoilSample, rb: &RuleBase, opts: HrbOptions) -> Result<HrbReport, HrbError> {
    classify_hrb_with(&variables(), s, rb, opts)
}

pub fn classify_hrb_with(vars: &Variables, s: &SoilSample, rb: &RuleBase, opts: HrbOptions) -> Result<HrbReport, HrbError> {
    let m = fuzzify_sample_with(vars, s, opts.pi_source)?;
    let report = classify(rb, &m, opts.aggregator)?;
    let (subgroup, a7) = if report.winner == A7_GROUP {
        (Some(a7_split(s.ll, s.pi)), Some(A7Inputs { ll: s.ll, pi: s.pi }))
    } else {
        (report.winner.parse().ok(), None)
    };
    let class = subgroup.map_or_else(|| report.winner.clone(), |g| g.as_str().to_string());
    Ok(HrbReport { report, class, subgroup, a7 })
}

/// One of the six published validation samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub number: usize,
    pub sample: SoilSample,
    /// Published membership rows per variable, in ladder order. The `pi` row
    /// matches evaluation at the plastic limit.
    pub memberships: [(&'static str, &'static [f64]); 5],
    pub expected: Subgroup,
}

/// The six validation samples with their published membership rows and
/// classes.
pub fn paper_fixtures() -> Vec<Fixture> {
    const SAMPLES: [[f64; 5]; 6] = [
        [100.0, 100.0, 30.0, 32.0, 21.0],
        [100.0, 80.0, 40.0, 25.0, 17.0],
        [100.0, 100.0, 92.0, 65.0, 25.0],
        [100.0, 76.0, 7.0, 19.0, 16.0],
        [100.0, 100.0, 78.0, 34.0, 10.0],
        [38.0, 30.0, 11.0, 23.0, 19.0],
    ];
    const P2MM_ROWS: [[f64; 5]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.96, 0.04],
    ];
    const P425_ROWS: [[f64; 7]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 0.2],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.96, 0.04],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    ];
    const P075_ROWS: [[f64; 11]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2667, 0.7333],
        [0.0, 0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7333, 0.2667],
        [0.0, 0.0, 0.8, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ];
    const LL_ROWS: [[f64; 9]; 6] = [
        [0.0, 0.0, 0.0, 0.8, 0.2, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.3333, 0.6667, 0.0, 0.0],
        [0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.6, 0.4, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.7, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0],
    ];
    const PI_ROWS: [[f64; 7]; 6] = [
        [0.0, 0.0, 0.2667, 0.7333, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.5333, 0.4667, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.6, 0.4, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.4, 0.6, 0.0, 0.0, 0.0],
    ];
    const EXPECTED: [Subgroup; 6] = [
        Subgroup::A26,
        Subgroup::A4,
        Subgroup::A76,
        Subgroup::A3,
        Subgroup::A6,
        Subgroup::A1a,
    ];
    (0..6)
        .map(|i| {
            let [p2mm, p425, p075, ll, pl] = SAMPLES[i];
            Fixture {
                number: i + 1,
                sample: SoilSample::new(p2mm, p425, p075, ll, pl).expect("fixtures are valid"),
                memberships: [
                    (P2MM, &P2MM_ROWS[i]),
                    (P425, &P425_ROWS[i]),
                    (P075, &P075_ROWS[i]),
                    (LL, &LL_ROWS[i]),
                    (PI, &PI_ROWS[i]),
                ],
                expected: EXPECTED[i],
            }
        })
        .collect()
}
