//! Report records and their CSV / JSON renderings.

use serde::Serialize;
use soilfuzz::fuzzy::{MembershipVector, Variables};
use soilfuzz::hrb::{A7Inputs, HrbReport, Subgroup};
use soilfuzz::round4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fuzzy,
    Crisp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fuzzy => "fuzzy",
            Method::Crisp => "crisp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub class: String,
    pub score: f64,
}

/// One classified sample. Scores are rounded to four decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyRecord {
    pub id: String,
    pub method: Method,
    pub winner: String,
    pub subgrade_rating: Option<&'static str>,
    pub score: Option<f64>,
    pub tie: bool,
    pub tied: Vec<String>,
    pub scores: Vec<Score>,
    pub a7: Option<A7Inputs>,
}

impl ClassifyRecord {
    pub fn fuzzy(id: &str, rep: &HrbReport) -> Self {
        let r = &rep.report;
        Self {
            id: id.to_string(),
            method: Method::Fuzzy,
            winner: rep.class.clone(),
            subgrade_rating: rep.subgrade_rating(),
            score: Some(round4(r.winner_score())),
            tie: r.tie,
            tied: r.tied.clone(),
            scores: r.scores.iter().map(|s| Score { class: s.class.clone(), score: round4(s.score) }).collect(),
            a7: rep.a7,
        }
    }

    pub fn crisp(id: &str, group: Subgroup, ll: f64, pi: f64) -> Self {
        Self {
            id: id.to_string(),
            method: Method::Crisp,
            winner: group.as_str().to_string(),
            subgrade_rating: Some(group.subgrade_rating()),
            score: None,
            tie: false,
            tied: Vec::new(),
            scores: Vec::new(),
            a7: matches!(group, Subgroup::A75 | Subgroup::A76).then_some(A7Inputs { ll, pi }),
        }
    }
}

fn fixed(x: f64) -> String {
    format!("{:.4}", round4(x))
}

/// CSV columns: `id,method,winner,subgrade_rating,score,tie,tied`, one
/// column per class, then `a7_ll,a7_pi`.
pub fn classify_csv(records: &[ClassifyRecord], classes: &[String]) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = vec!["id", "method", "winner", "subgrade_rating", "score", "tie", "tied"];
    header.extend(classes.iter().map(String::as_str));
    header.extend(["a7_ll", "a7_pi"]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.id.clone(),
            r.method.as_str().to_string(),
            r.winner.clone(),
            r.subgrade_rating.unwrap_or("").to_string(),
            r.score.map(fixed).unwrap_or_default(),
            r.tie.to_string(),
            r.tied.join(";"),
        ];
        for c in classes {
            row.push(r.scores.iter().find(|s| &s.class == c).map(|s| fixed(s.score)).unwrap_or_default());
        }
        match r.a7 {
            Some(a) => row.extend([a.ll.to_string(), a.pi.to_string()]),
            None => row.extend([String::new(), String::new()]),
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipRow {
    pub id: String,
    pub input: f64,
    pub degrees: Vec<f64>,
}

/// Membership grid of one variable, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipTable {
    pub variable: String,
    pub descriptors: Vec<String>,
    pub rows: Vec<MembershipRow>,
}

impl MembershipTable {
    pub fn new(vars: &Variables, variable: &str) -> Self {
        let var = vars.get(variable).expect("variable checked by caller");
        Self {
            variable: variable.to_string(),
            descriptors: var.labels().map(str::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, id: &str, mv: &MembershipVector) {
        self.rows.push(MembershipRow {
            id: id.to_string(),
            input: mv.input(),
            degrees: mv.degrees().iter().map(|&d| round4(d)).collect(),
        });
    }
}

/// One block per table: header `id,<descriptors>` preceded by a
/// `# <variable>` line, blocks separated by a blank line.
pub fn memberships_csv(tables: &[MembershipTable]) -> csv::Result<Vec<u8>> {
    let mut out = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push(b'\n');
        }
        out.extend_from_slice(format!("# {}\n", t.variable).as_bytes());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id"];
        header.extend(t.descriptors.iter().map(String::as_str));
        w.write_record(&header)?;
        for r in &t.rows {
            let mut row = vec![r.id.clone()];
            row.extend(r.degrees.iter().map(|&d| fixed(d)));
            w.write_record(&row)?;
        }
        out.extend(w.into_inner().expect("in-memory writer"));
    }
    Ok(out)
}

/// Summary of an induction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InductionReport {
    pub seed: u64,
    pub iterations: usize,
    pub rules_per_class: usize,
    pub aggregator: &'static str,
    pub samples: usize,
    pub accuracy: f64,
    pub initial_accuracy: f64,
    pub accepted: usize,
    pub rules: String,
}

impl InductionReport {
    /// The rule file with the run summary as leading comments.
    pub fn frules(&self) -> String {
        format!(
            "# induced with seed {}, {} iterations, {} rule(s) per class, {} aggregation\n\
             # training accuracy {:.4} on {} samples (initial {:.4}, {} proposals accepted)\n{}",
            self.seed,
            self.iterations,
            self.rules_per_class,
            self.aggregator,
            self.accuracy,
            self.samples,
            self.initial_accuracy,
            self.accepted,
            self.rules
        )
    }
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialize");
    out.push(b'\n');
    out
}
