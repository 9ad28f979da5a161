//! Triangular linguistic partitions and fuzzification.
//!
//! A [`LinguisticVariable`] is an ordered ladder of descriptors, each one a
//! triangle whose peak sits on its own center and whose feet sit on the
//! neighbouring centers. The first and last descriptors only have one edge,
//! so the partition sums to one between the outermost centers and is zero
//! outside them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Short symbolic name of one fuzzy set in a partition (`VL`, `LM`, `VVVH`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Descriptor(String);

impl Descriptor {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Descriptor {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("variable name is empty")]
    EmptyName,
    #[error("variable `{name}`: {labels} labels but {centers} centers")]
    LengthMismatch {
        name: String,
        labels: usize,
        centers: usize,
    },
    #[error("variable `{name}`: a partition needs at least two descriptors, got {count}")]
    TooFewDescriptors { name: String, count: usize },
    #[error("variable `{name}`: descriptor #{index} has an empty label")]
    EmptyLabel { name: String, index: usize },
    #[error("variable `{name}`: descriptor `{label}` appears more than once")]
    DuplicateLabel { name: String, label: String },
    #[error("variable `{name}`: center #{index} is not a finite number")]
    NonFiniteCenter { name: String, index: usize },
    #[error("variable `{name}`: centers must be strictly increasing, but {prev} is followed by {next}")]
    NonIncreasingCenters { name: String, prev: f64, next: f64 },
    #[error("variable `{name}`: domain [{min}, {max}] is empty or not finite")]
    InvalidDomain { name: String, min: f64, max: f64 },
    #[error("variable `{name}`: center {center} lies outside the domain [{min}, {max}]")]
    CenterOutsideDomain {
        name: String,
        center: f64,
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzifyError {
    #[error("variable `{variable}`: input {value} lies outside the domain [{min}, {max}]")]
    OutOfDomain {
        variable: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("variable `{variable}`: input is not a finite number")]
    NonFinite { variable: String },
    #[error("no variable named `{0}`")]
    UnknownVariable(String),
}

/// An input feature partitioned into triangular fuzzy sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    descriptors: Arc<[Descriptor]>,
    centers: Vec<f64>,
    domain: (f64, f64),
}

impl LinguisticVariable {
    /// Builds a validated partition.
    ///
    /// Labels and centers are paired by position; centers must be strictly
    /// increasing and lie inside `domain`.
    ///
    /// ```
    /// use soilfuzz::fuzzy::LinguisticVariable;
    ///
    /// let p2mm = LinguisticVariable::new(
    ///     "p2mm",
    ///     &["VL", "L", "M", "H", "VH"],
    ///     &[0.0, 12.5, 25.0, 37.5, 50.0],
    ///     (0.0, 100.0),
    /// )
    /// .unwrap();
    /// assert_eq!(p2mm.len(), 5);
    /// assert!(LinguisticVariable::new("x", &["A", "B"], &[5.0, 5.0], (0.0, 10.0)).is_err());
    /// ```
    pub fn new<S: AsRef<str>>(
        name: &str,
        labels: &[S],
        centers: &[f64],
        domain: (f64, f64),
    ) -> Result<Self, PartitionError> {
        let owned = || name.to_string();
        if name.trim().is_empty() {
            return Err(PartitionError::EmptyName);
        }
        if labels.len() != centers.len() {
            return Err(PartitionError::LengthMismatch {
                name: owned(),
                labels: labels.len(),
                centers: centers.len(),
            });
        }
        if labels.len() < 2 {
            return Err(PartitionError::TooFewDescriptors {
                name: owned(),
                count: labels.len(),
            });
        }
        let mut descriptors = Vec::with_capacity(labels.len());
        for (index, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            if label.trim().is_empty() {
                return Err(PartitionError::EmptyLabel {
                    name: owned(),
                    index,
                });
            }
            if descriptors.iter().any(|d: &Descriptor| d.0 == label) {
                return Err(PartitionError::DuplicateLabel {
                    name: owned(),
                    label: label.to_string(),
                });
            }
            descriptors.push(Descriptor(label.to_string()));
        }
        if let Some(index) = centers.iter().position(|c| !c.is_finite()) {
            return Err(PartitionError::NonFiniteCenter {
                name: owned(),
                index,
            });
        }
        for pair in centers.windows(2) {
            if pair[1] <= pair[0] {
                return Err(PartitionError::NonIncreasingCenters {
                    name: owned(),
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        let (min, max) = domain;
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(PartitionError::InvalidDomain {
                name: owned(),
                min,
                max,
            });
        }
        for &center in [centers[0], centers[centers.len() - 1]].iter() {
            if center < min || center > max {
                return Err(PartitionError::CenterOutsideDomain {
                    name: owned(),
                    center,
                    min,
                    max,
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            descriptors: descriptors.into(),
            centers: centers.to_vec(),
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.descriptors.iter().map(Descriptor::as_str)
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Position of `label` on the ladder.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.0 == label)
    }

    /// Membership degree of descriptor `index` at `x`, without domain checks.
    ///
    /// Evaluates `max(min((x - a) / (b - a), (c - x) / (c - b)), 0)` for the
    /// triangle `(a, b, c)` spanned by the neighbouring centers. The outermost
    /// descriptors lack one foot and keep only their inner edge.
    pub fn degree(&self, index: usize, x: f64) -> f64 {
        let c = &self.centers;
        let b = c[index];
        let rising = match index.checked_sub(1).map(|i| c[i]) {
            Some(a) if x <= b => Some((x - a) / (b - a)),
            _ => None,
        };
        let falling = match c.get(index + 1) {
            Some(&next) if x >= b => Some((next - x) / (next - b)),
            _ => None,
        };
        let raw = match (rising, falling) {
            (Some(r), Some(f)) => r.min(f),
            (Some(r), None) => r,
            (None, Some(f)) => f,
            // x sits on the open side of an outer descriptor
            (None, None) => 0.0,
        };
        raw.clamp(0.0, 1.0)
    }

    /// Fuzzifies a crisp value into its degree on every descriptor.
    ///
    /// ```
    /// use soilfuzz::fuzzy::LinguisticVariable;
    ///
    /// let p2mm = LinguisticVariable::new(
    ///     "p2mm",
    ///     &["VL", "L", "M", "H", "VH"],
    ///     &[0.0, 12.5, 25.0, 37.5, 50.0],
    ///     (0.0, 100.0),
    /// )
    /// .unwrap();
    /// let mv = p2mm.fuzzify(38.0).unwrap();
    /// assert!((mv.get("H").unwrap() - 0.96).abs() < 1e-12);
    /// assert!((mv.get("VH").unwrap() - 0.04).abs() < 1e-12);
    /// // strict triangles: nothing above the last center
    /// assert!(p2mm.fuzzify(100.0).unwrap().is_all_zero());
    /// ```
    pub fn fuzzify(&self, x: f64) -> Result<MembershipVector, FuzzifyError> {
        if !x.is_finite() {
            return Err(FuzzifyError::NonFinite {
                variable: self.name.clone(),
            });
        }
        let (min, max) = self.domain;
        if x < min || x > max {
            return Err(FuzzifyError::OutOfDomain {
                variable: self.name.clone(),
                value: x,
                min,
                max,
            });
        }
        let mut degrees = vec![0.0; self.len()];
        let c = &self.centers;
        let last = c.len() - 1;
        if x >= c[0] && x <= c[last] {
            // segment [c[i], c[i+1]] holding x; the top center maps to the last segment
            let i = (c.partition_point(|&ci| ci <= x) - 1).min(last - 1);
            let width = c[i + 1] - c[i];
            degrees[i] = ((c[i + 1] - x) / width).clamp(0.0, 1.0);
            degrees[i + 1] = ((x - c[i]) / width).clamp(0.0, 1.0);
        }
        Ok(MembershipVector {
            variable: self.name.clone(),
            descriptors: Arc::clone(&self.descriptors),
            degrees,
            input: x,
        })
    }
}

/// Same as [`LinguisticVariable::new`].
pub fn make_partition<S: AsRef<str>>(
    name: &str,
    labels: &[S],
    centers: &[f64],
    domain: (f64, f64),
) -> Result<LinguisticVariable, PartitionError> {
    LinguisticVariable::new(name, labels, centers, domain)
}

/// Degrees of one crisp input on every descriptor of a variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVector {
    variable: String,
    descriptors: Arc<[Descriptor]>,
    degrees: Vec<f64>,
    input: f64,
}

impl MembershipVector {
    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn input(&self) -> f64 {
        self.input
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    /// Degree for `label`, or `None` if the label is not on this variable.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.descriptors
            .iter()
            .position(|d| d.as_str() == label)
            .map(|i| self.degrees[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.descriptors
            .iter()
            .map(Descriptor::as_str)
            .zip(self.degrees.iter().copied())
    }

    /// Entries with a nonzero degree, in ladder order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&str, f64)> {
        self.iter().filter(|&(_, d)| d > 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.degrees.iter().all(|&d| d == 0.0)
    }
}

/// Named collection of linguistic variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Variables {
    vars: Vec<LinguisticVariable>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariablesError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Partition {
        line: usize,
        #[source]
        source: PartitionError,
    },
    #[error("line {line}: variable `{name}` is declared twice")]
    Duplicate { line: usize, name: String },
    #[error("no variables declared")]
    Empty,
}

impl Variables {
    pub fn new(vars: Vec<LinguisticVariable>) -> Result<Self, VariablesError> {
        let mut out = Self::default();
        for (i, v) in vars.into_iter().enumerate() {
            out.push(v).map_err(|name| VariablesError::Duplicate { line: i + 1, name })?;
        }
        Ok(out)
    }

    fn push(&mut self, var: LinguisticVariable) -> Result<(), String> {
        if self.get(var.name()).is_some() {
            return Err(var.name().to_string());
        }
        self.vars.push(var);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&LinguisticVariable> {
        self.vars.iter().find(|v| v.name() == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LinguisticVariable> {
        self.vars.iter()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Fuzzifies `(variable, value)` pairs into a [`Memberships`] map.
    pub fn fuzzify_all<'a, I>(&self, inputs: I) -> Result<Memberships, FuzzifyError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut out = Memberships::default();
        for (name, x) in inputs {
            let var = self
                .get(name)
                .ok_or_else(|| FuzzifyError::UnknownVariable(name.to_string()))?;
            out.insert(var.fuzzify(x)?);
        }
        Ok(out)
    }

    /// Parses the variables file format.
    ///
    /// One variable per line: `name min..max LABEL=center LABEL=center ...`.
    /// Blank lines and `#` comments are ignored.
    ///
    /// ```
    /// use soilfuzz::fuzzy::Variables;
    ///
    /// let vars = Variables::parse("pi 0..200 VL=0 L=5 LM=10  # plasticity index\n").unwrap();
    /// assert_eq!(vars.get("pi").unwrap().centers(), &[0.0, 5.0, 10.0]);
    /// ```
    pub fn parse(text: &str) -> Result<Self, VariablesError> {
        let mut out = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| VariablesError::Syntax { line, message };
            let mut fields = content.split_whitespace();
            let name = fields.next().unwrap_or_default();
            let domain = fields
                .next()
                .ok_or_else(|| syntax(format!("variable `{name}` has no domain")))?;
            let (lo, hi) = domain
                .split_once("..")
                .ok_or_else(|| syntax(format!("domain `{domain}` is not of the form min..max")))?;
            let parse_num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| syntax(format!("`{s}` is not a number")))
            };
            let domain = (parse_num(lo)?, parse_num(hi)?);
            let mut labels = Vec::new();
            let mut centers = Vec::new();
            for field in fields {
                let (label, center) = field
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("`{field}` is not of the form LABEL=center")))?;
                labels.push(label);
                centers.push(parse_num(center)?);
            }
            let var = LinguisticVariable::new(name, &labels, &centers, domain)
                .map_err(|source| VariablesError::Partition { line, source })?;
            out.push(var)
                .map_err(|name| VariablesError::Duplicate { line, name })?;
        }
        if out.is_empty() {
            return Err(VariablesError::Empty);
        }
        Ok(out)
    }

    /// Renders the variables file format; [`Variables::parse`] reads it back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            let (lo, hi) = v.domain();
            out.push_str(&format!("{} {}..{}", v.name(), lo, hi));
            for (label, center) in v.labels().zip(v.centers()) {
                out.push_str(&format!(" {label}={center}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Membership vectors of one sample, keyed by variable name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Memberships {
    by_variable: BTreeMap<String, MembershipVector>,
}

impl Memberships {
    pub fn insert(&mut self, mv: MembershipVector) -> Option<MembershipVector> {
        self.by_variable.insert(mv.variable().to_string(), mv)
    }

    pub fn get(&self, variable: &str) -> Option<&MembershipVector> {
        self.by_variable.get(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MembershipVector> {
        self.by_variable.values()
    }

    pub fn len(&self) -> usize {
        self.by_variable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_variable.is_empty()
    }
}

impl FromIterator<MembershipVector> for Memberships {
    fn from_iter<T: IntoIterator<Item = MembershipVector>>(iter: T) -> Self {
        let mut out = Self::default();
        for mv in iter {
            out.insert(mv);
        }
        out
    }
}
