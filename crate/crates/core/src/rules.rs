//! Fuzzy classification rules and their evaluation.
//!
//! A rule lists, per input variable, the descriptors it accepts. The match of
//! one antecedent is the largest membership among the accepted descriptors,
//! and the rule's degree of fulfilment (DOF) combines the antecedent matches
//! with an [`Aggregator`]. A class scores the best DOF among its rules.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::fuzzy::{Memberships, MembershipVector, Variables};

/// Scores closer than this are considered tied.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule {rule}: no antecedents")]
    NoAntecedents { rule: String },
    #[error("rule {rule}: descriptor set for `{variable}` is empty")]
    EmptyDescriptorSet { rule: String, variable: String },
    #[error("rule {rule}: variable `{variable}` appears in more than one antecedent")]
    DuplicateAntecedent { rule: String, variable: String },
    #[error("rule {rule}: descriptor `{label}` is listed twice for `{variable}`")]
    DuplicateDescriptor {
        rule: String,
        variable: String,
        label: String,
    },
    #[error("rule {rule}: unknown variable `{variable}`")]
    UnknownVariable { rule: String, variable: String },
    #[error("rule {rule}: `{label}` is not a descriptor of `{variable}`")]
    UnknownDescriptor {
        rule: String,
        variable: String,
        label: String,
    },
    #[error("rule id `{0}` is used more than once")]
    DuplicateRuleId(String),
    #[error("rule {rule}: class `{class}` is not in the class order")]
    UnknownClass { rule: String, class: String },
    #[error("class `{0}` is listed more than once")]
    DuplicateClass(String),
    #[error("rule base has no rules")]
    EmptyRuleBase,
    #[error("no membership vector for variable `{0}`")]
    MissingMembership(String),
    #[error("`{label}` is not a descriptor of `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("the descriptor set is empty")]
    EmptySelection,
    #[error("no labeled samples to score against")]
    EmptyTrainingSet,
}

/// How antecedent matches are combined into a rule's degree of fulfilment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    Minimum,
    Product,
    #[default]
    Mean,
}

impl Aggregator {
    pub const ALL: [Aggregator; 3] = [Aggregator::Minimum, Aggregator::Product, Aggregator::Mean];

    /// Combines per-antecedent matches. Returns 0 for an empty slice.
    pub fn combine(self, matches: &[f64]) -> f64 {
        if matches.is_empty() {
            return 0.0;
        }
        let v = match self {
            Aggregator::Minimum => matches.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Product => matches.iter().product(),
            Aggregator::Mean => matches.iter().sum::<f64>() / matches.len() as f64,
        };
        v.clamp(0.0, 1.0)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Minimum => "min",
            Aggregator::Product => "product",
            Aggregator::Mean => "mean",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" | "minimum" => Ok(Aggregator::Minimum),
            "product" | "prod" => Ok(Aggregator::Product),
            "mean" | "arithmetic-mean" => Ok(Aggregator::Mean),
            other => Err(format!("unknown aggregator `{other}` (expected min, product or mean)")),
        }
    }
}

/// `variable IS {labels}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Antecedent {
    pub variable: String,
    pub labels: Vec<String>,
}

impl Antecedent {
    pub fn new<S: Into<String>>(variable: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Self {
        Self {
            variable: variable.into(),
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: String,
    pub antecedents: Vec<Antecedent>,
    pub consequent: String,
}

impl Rule {
    pub fn new(id: impl Into<String>, antecedents: Vec<Antecedent>, consequent: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            antecedents,
            consequent: consequent.into(),
        }
    }

    /// Checks the rule against `vars` and reorders every descriptor set to
    /// ladder order.
    fn canonicalize(&mut self, vars: &Variables) -> Result<(), RuleError> {
        let rule = || self.id.clone();
        if self.antecedents.is_empty() {
            return Err(RuleError::NoAntecedents { rule: rule() });
        }
        for (i, ante) in self.antecedents.iter().enumerate() {
            if self.antecedents[..i].iter().any(|a| a.variable == ante.variable) {
                return Err(RuleError::DuplicateAntecedent {
                    rule: rule(),
                    variable: ante.variable.clone(),
                });
            }
        }
        let mut canonical = Vec::with_capacity(self.antecedents.len());
        for ante in &self.antecedents {
            let var = vars.get(&ante.variable).ok_or_else(|| RuleError::UnknownVariable {
                rule: rule(),
                variable: ante.variable.clone(),
            })?;
            if ante.labels.is_empty() {
                return Err(RuleError::EmptyDescriptorSet {
                    rule: rule(),
                    variable: ante.variable.clone(),
                });
            }
            let mut idx = Vec::with_capacity(ante.labels.len());
            for label in &ante.labels {
                let i = var.index_of(label).ok_or_else(|| RuleError::UnknownDescriptor {
                    rule: rule(),
                    variable: ante.variable.clone(),
                    label: label.clone(),
                })?;
                if idx.contains(&i) {
                    return Err(RuleError::DuplicateDescriptor {
                        rule: rule(),
                        variable: ante.variable.clone(),
                        label: label.clone(),
                    });
                }
                idx.push(i);
            }
            idx.sort_unstable();
            let labels = idx
                .into_iter()
                .map(|i| var.descriptors()[i].as_str().to_string())
                .collect();
            canonical.push(Antecedent {
                variable: ante.variable.clone(),
                labels,
            });
        }
        self.antecedents = canonical;
        Ok(())
    }
}

/// An ordered, validated collection of rules plus the class priority used to
/// break ties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleBase {
    rules: Vec<Rule>,
    class_order: Vec<String>,
}

impl RuleBase {
    /// Validates `rules` against `vars`. Every consequent must appear in
    /// `class_order`; descriptor sets are stored in ladder order.
    pub fn new(rules: Vec<Rule>, class_order: Vec<String>, vars: &Variables) -> Result<Self, RuleError> {
        if rules.is_empty() {
            return Err(RuleError::EmptyRuleBase);
        }
        for (i, class) in class_order.iter().enumerate() {
            if class_order[..i].contains(class) {
                return Err(RuleError::DuplicateClass(class.clone()));
            }
        }
        let mut checked: Vec<Rule> = Vec::with_capacity(rules.len());
        for mut rule in rules {
            if checked.iter().any(|r| r.id == rule.id) {
                return Err(RuleError::DuplicateRuleId(rule.id));
            }
            rule.canonicalize(vars)?;
            if !class_order.contains(&rule.consequent) {
                return Err(RuleError::UnknownClass {
                    rule: rule.id.clone(),
                    class: rule.consequent.clone(),
                });
            }
            checked.push(rule);
        }
        Ok(Self {
            rules: checked,
            class_order,
        })
    }

    /// Like [`RuleBase::new`], with classes prioritized by first mention.
    pub fn with_first_mention_order(rules: Vec<Rule>, vars: &Variables) -> Result<Self, RuleError> {
        let mut order: Vec<String> = Vec::new();
        for r in &rules {
            if !order.contains(&r.consequent) {
                order.push(r.consequent.clone());
            }
        }
        Self::new(rules, order, vars)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn class_order(&self) -> &[String] {
        &self.class_order
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

/// Largest membership degree among the `allowed` descriptors.
///
/// ```
/// use soilfuzz::fuzzy::LinguisticVariable;
/// use soilfuzz::rules::variable_match;
///
/// let p2mm = LinguisticVariable::new(
///     "p2mm",
///     &["VL", "L", "M", "H", "VH"],
///     &[0.0, 12.5, 25.0, 37.5, 50.0],
///     (0.0, 100.0),
/// )
/// .unwrap();
/// let mv = p2mm.fuzzify(38.0).unwrap();
/// let all = ["VL", "L", "M", "H", "VH"];
/// assert!((variable_match(&mv, &all).unwrap() - 0.96).abs() < 1e-12);
/// ```
pub fn variable_match<S: AsRef<str>>(mv: &MembershipVector, allowed: &[S]) -> Result<f64, RuleError> {
    if allowed.is_empty() {
        return Err(RuleError::EmptySelection);
    }
    let mut best: f64 = 0.0;
    for label in allowed {
        let label = label.as_ref();
        let d = mv.get(label).ok_or_else(|| RuleError::UnknownLabel {
            variable: mv.variable().to_string(),
            label: label.to_string(),
        })?;
        best = best.max(d);
    }
    Ok(best)
}

/// Degree of fulfilment of `rule` for one sample.
pub fn rule_dof(rule: &Rule, memberships: &Memberships, agg: Aggregator) -> Result<f64, RuleError> {
    let matches = antecedent_matches(rule, memberships)?;
    Ok(agg.combine(&matches))
}

/// Per-antecedent matches of `rule`, in antecedent order.
pub fn antecedent_matches(rule: &Rule, memberships: &Memberships) -> Result<Vec<f64>, RuleError> {
    rule.antecedents
        .iter()
        .map(|a| {
            let mv = memberships
                .get(&a.variable)
                .ok_or_else(|| RuleError::MissingMembership(a.variable.clone()))?;
            variable_match(mv, &a.labels)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore {
    pub class: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleScore {
    pub rule: String,
    pub class: String,
    pub dof: f64,
}

/// Outcome of classifying one sample against a rule base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// One score per class, in class order.
    pub scores: Vec<ClassScore>,
    /// Classes by descending score; equal scores keep class order.
    pub ranking: Vec<String>,
    pub winner: String,
    /// Set when more than one class shares the top score.
    pub tie: bool,
    /// Classes sharing the top score, in class order. Contains the winner.
    pub tied: Vec<String>,
    pub per_rule: Vec<RuleScore>,
}

impl ClassificationReport {
    pub fn score(&self, class: &str) -> Option<f64> {
        self.scores.iter().find(|s| s.class == class).map(|s| s.score)
    }

    pub fn winner_score(&self) -> f64 {
        self.score(&self.winner).unwrap_or(0.0)
    }

    pub fn dof(&self, rule: &str) -> Option<f64> {
        self.per_rule.iter().find(|r| r.rule == rule).map(|r| r.dof)
    }
}

fn tie_key(score: f64) -> i64 {
    (score / TIE_EPSILON).round() as i64
}

/// Scores every class and picks the winner.
///
/// A class scores the maximum DOF over its rules. Classes are ranked by
/// score; classes whose scores agree within [`TIE_EPSILON`] are ordered by
/// their position in the rule base's class order, so the earliest wins.
pub fn classify(rb: &RuleBase, memberships: &Memberships, agg: Aggregator) -> Result<ClassificationReport, RuleError> {
    if rb.is_empty() {
        return Err(RuleError::EmptyRuleBase);
    }
    let mut per_rule = Vec::with_capacity(rb.len());
    let mut scores: Vec<f64> = vec![0.0; rb.class_order().len()];
    for rule in rb.rules() {
        let dof = rule_dof(rule, memberships, agg)?;
        let ci = rb
            .class_order()
            .iter()
            .position(|c| *c == rule.consequent)
            .expect("validated consequent");
        scores[ci] = scores[ci].max(dof);
        per_rule.push(RuleScore {
            rule: rule.id.clone(),
            class: rule.consequent.clone(),
            dof,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| tie_key(scores[b]).cmp(&tie_key(scores[a])).then(a.cmp(&b)));
    let top = tie_key(scores[order[0]]);
    let tied: Vec<String> = (0..scores.len())
        .filter(|&i| tie_key(scores[i]) == top)
        .map(|i| rb.class_order()[i].clone())
        .collect();
    let ranking: Vec<String> = order.iter().map(|&i| rb.class_order()[i].clone()).collect();
    Ok(ClassificationReport {
        scores: rb
            .class_order()
            .iter()
            .zip(&scores)
            .map(|(class, &score)| ClassScore {
                class: class.clone(),
                score,
            })
            .collect(),
        winner: ranking[0].clone(),
        ranking,
        tie: tied.len() > 1,
        tied,
        per_rule,
    })
}

/// Fraction of `labeled` samples whose winner equals their label.
pub fn score_rulebase<L: AsRef<str>>(
    rb: &RuleBase,
    labeled: &[(Memberships, L)],
    agg: Aggregator,
) -> Result<f64, RuleError> {
    if labeled.is_empty() {
        return Err(RuleError::EmptyTrainingSet);
    }
    let mut hits = 0usize;
    for (m, class) in labeled {
        if classify(rb, m, agg)?.winner == class.as_ref() {
            hits += 1;
        }
    }
    Ok(hits as f64 / labeled.len() as f64)
}
