//! Rule induction by random search.
//!
//! Starts from a random rule system and repeatedly proposes a neighbour that
//! differs in one descriptor of one antecedent. A proposal is kept when its
//! training accuracy is at least the current one, so the kept score never
//! decreases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fuzzy::{Memberships, Variables};
use crate::rules::{score_rulebase, Aggregator, Antecedent, Rule, RuleBase, RuleError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InductionError {
    #[error("no labeled samples")]
    NoSamples,
    #[error("rules_per_class must be at least 1")]
    ZeroRulesPerClass,
    #[error("no variables to build antecedents from")]
    NoVariables,
    #[error("variable `{0}` has more descriptors than the search supports")]
    TooManyDescriptors(String),
    #[error("class `{0}` has no labeled sample")]
    NoSampleForClass(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductionConfig {
    pub rules_per_class: usize,
    pub iterations: usize,
    pub seed: u64,
    pub aggregator: Aggregator,
    /// Classes to build rules for, in priority order. Defaults to the labels
    /// in order of first appearance.
    pub classes: Option<Vec<String>>,
}

impl Default for InductionConfig {
    fn default() -> Self {
        Self {
            rules_per_class: 1,
            iterations: 1000,
            seed: 0,
            aggregator: Aggregator::Mean,
            classes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Induction {
    pub rulebase: RuleBase,
    /// Training accuracy of `rulebase`.
    pub score: f64,
    pub initial_score: f64,
    /// Kept score after each iteration.
    pub trace: Vec<f64>,
    pub accepted: usize,
}

/// Descriptor subsets as bitmasks, one per (rule, variable).
#[derive(Clone)]
struct Candidate {
    masks: Vec<Vec<u64>>,
}

/// Induces a rule base from labeled memberships.
///
/// Each rule has one antecedent per variable. Identical inputs and seed give
/// an identical result.
pub fn induce_rules<L: AsRef<str>>(
    labeled: &[(Memberships, L)],
    vars: &Variables,
    cfg: &InductionConfig,
) -> Result<Induction, InductionError> {
    if labeled.is_empty() {
        return Err(InductionError::NoSamples);
    }
    if cfg.rules_per_class == 0 {
        return Err(InductionError::ZeroRulesPerClass);
    }
    if vars.is_empty() {
        return Err(InductionError::NoVariables);
    }
    if let Some(v) = vars.iter().find(|v| v.len() >= 64) {
        return Err(InductionError::TooManyDescriptors(v.name().to_string()));
    }
    let classes = match &cfg.classes {
        Some(classes) => {
            if let Some(c) = classes
                .iter()
                .find(|c| !labeled.iter().any(|(_, l)| l.as_ref() == c.as_str()))
            {
                return Err(InductionError::NoSampleForClass(c.clone()));
            }
            classes.clone()
        }
        None => {
            let mut seen: Vec<String> = Vec::new();
            for (_, l) in labeled {
                if !seen.iter().any(|s| s == l.as_ref()) {
                    seen.push(l.as_ref().to_string());
                }
            }
            seen
        }
    };
    let widths: Vec<usize> = vars.iter().map(|v| v.len()).collect();
    let n_rules = classes.len() * cfg.rules_per_class;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = Candidate {
        masks: (0..n_rules)
            .map(|_| widths.iter().map(|&w| rng.random_range(1..(1u64 << w))).collect())
            .collect(),
    };
    let mut current_rb = build(&current, &classes, cfg.rules_per_class, vars)?;
    let mut current_score = score_rulebase(&current_rb, labeled, cfg.aggregator)?;
    let initial_score = current_score;
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut accepted = 0;

    for _ in 0..cfg.iterations {
        let r = rng.random_range(0..n_rules);
        let v = rng.random_range(0..widths.len());
        let d = rng.random_range(0..widths[v]);
        let mut proposal = current.clone();
        proposal.masks[r][v] ^= 1 << d;
        if proposal.masks[r][v] != 0 {
            let rb = build(&proposal, &classes, cfg.rules_per_class, vars)?;
            let score = score_rulebase(&rb, labeled, cfg.aggregator)?;
            if score >= current_score {
                current = proposal;
                current_rb = rb;
                current_score = score;
                accepted += 1;
            }
        }
        trace.push(current_score);
    }

    Ok(Induction {
        rulebase: current_rb,
        score: current_score,
        initial_score,
        trace,
        accepted,
    })
}

fn build(
    cand: &Candidate,
    classes: &[String],
    rules_per_class: usize,
    vars: &Variables,
) -> Result<RuleBase, RuleError> {
    let rules = cand
        .masks
        .iter()
        .enumerate()
        .map(|(i, masks)| {
            let antecedents = vars
                .iter()
                .zip(masks)
                .map(|(var, &mask)| {
                    let labels = var
                        .labels()
                        .enumerate()
                        .filter(|(j, _)| mask & (1 << j) != 0)
                        .map(|(_, l)| l.to_string());
                    Antecedent::new(var.name(), labels)
                })
                .collect();
            Rule::new(format!("R{}", i + 1), antecedents, classes[i / rules_per_class].clone())
        })
        .collect();
    RuleBase::new(rules, classes.to_vec(), vars)
}
