//! `summary.json`: one checked metric per invariant, plus recorded values,
//! and the comparison of two summaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wwlab::{Result, WwError};

pub const SCHEMA: &str = "wwlab-summary/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    fn holds(self, value: f64, tol: f64) -> bool {
        match self {
            Relation::Below => value < tol,
            Relation::AtMost => value <= tol,
            Relation::Above => value > tol,
            Relation::AtLeast => value >= tol,
        }
    }
}

// JSON has no NaN; serde_json writes it as null.
fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn nullable_map<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(m.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub relation: Relation,
    #[serde(deserialize_with = "null_as_nan")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub subcommand: String,
    pub experiment: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, Metric>,
    /// Measured values without a pass criterion.
    #[serde(deserialize_with = "nullable_map")]
    pub recorded: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(subcommand: &str, experiment: &str) -> Self {
        Self {
            schema: SCHEMA.into(),
            subcommand: subcommand.into(),
            experiment: experiment.into(),
            pass: true,
            metrics: BTreeMap::new(),
            recorded: BTreeMap::new(),
            artifacts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Records `value relation tolerance`. NaN never passes.
    pub fn check(&mut self, name: &str, value: f64, relation: Relation, tolerance: f64) -> bool {
        let pass = value.is_finite() && relation.holds(value, tolerance);
        self.pass &= pass;
        self.metrics.insert(name.into(), Metric { value, relation, tolerance, pass });
        pass
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.recorded.insert(name.into(), value);
    }

    pub fn artifact(&mut self, name: &str) {
        self.artifacts.push(name.into());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        wwlab::numerics::io::write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| WwError::Format(format!("{}: {e}", path.display())))
    }

    fn values(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = self.recorded.iter().map(|(k, v)| (format!("recorded.{k}"), *v)).collect();
        out.extend(self.metrics.iter().map(|(k, m)| (format!("metrics.{k}"), m.value)));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub metric: String,
    pub reference: f64,
    pub current: f64,
    pub relative: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Structural {
    pub metric: String,
    /// `"missing"` when only the reference has it, `"added"` when only the current run does.
    pub kind: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineDiff {
    pub threshold: f64,
    /// Every metric whose value differs at all.
    pub changes: Vec<Change>,
    pub structural: Vec<Structural>,
}

impl BaselineDiff {
    pub fn flagged(&self) -> impl Iterator<Item = &Change> {
        self.changes.iter().filter(|c| c.flagged)
    }
}

/// Relative change per metric against a reference summary. Summaries of
/// different schema or subcommand are not comparable.
pub fn compare(reference: &Summary, current: &Summary, threshold: f64) -> Result<BaselineDiff> {
    if reference.schema != current.schema || reference.subcommand != current.subcommand {
        return Err(WwError::Format(format!(
            "schema mismatch: {}/{} vs {}/{}",
            reference.schema, reference.subcommand, current.schema, current.subcommand
        )));
    }
    let (a, b) = (reference.values(), current.values());
    let mut diff = BaselineDiff { threshold, ..Default::default() };
    for (k, &old) in &a {
        match b.get(k) {
            None => diff.structural.push(Structural { metric: k.clone(), kind: "missing".into() }),
            Some(&new) if new.to_bits() != old.to_bits() => {
                let relative = if old == 0.0 { f64::INFINITY } else { ((new - old) / old).abs() };
                diff.changes.push(Change { metric: k.clone(), reference: old, current: new, relative, flagged: !(relative <= threshold) });
            }
            Some(_) => {}
        }
    }
    for k in b.keys().filter(|k| !a.contains_key(*k)) {
        diff.structural.push(Structural { metric: k.clone(), kind: "added".into() });
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Summary {
        let mut s = Summary::new("residual", "t");
        s.check("rate", -0.0024, Relation::Below, 0.0);
        s.record("eps0", 0.397);
        s
    }

    #[test]
    fn nan_fails_and_clears_the_flag() {
        let mut s = Summary::new("x", "y");
        assert!(!s.check("bad", f64::NAN, Relation::AtMost, 1.0));
        assert!(!s.pass);
    }

    #[test]
    fn identical_summaries_have_an_empty_diff() {
        let d = compare(&sample(), &sample(), 0.05).unwrap();
        assert!(d.changes.is_empty() && d.structural.is_empty());
    }

    #[test]
    fn ten_percent_change_is_flagged_and_small_ones_are_not() {
        let mut b = sample();
        b.metrics.get_mut("rate").unwrap().value *= 1.1;
        b.recorded.insert("eps0".into(), 0.397 * 1.01);
        let d = compare(&sample(), &b, 0.05).unwrap();
        let flagged: Vec<_> = d.flagged().map(|c| c.metric.as_str()).collect();
        assert_eq!(flagged, ["metrics.rate"]);
        assert_eq!(d.changes.len(), 2);
    }

    #[test]
    fn missing_and_added_metrics_are_structural() {
        let mut b = sample();
        b.recorded.clear();
        b.record("other", 1.0);
        let d = compare(&sample(), &b, 0.05).unwrap();
        assert_eq!(d.structural.len(), 2);
        assert_eq!(d.structural[0], Structural { metric: "recorded.eps0".into(), kind: "missing".into() });
    }

    #[test]
    fn different_subcommands_do_not_compare() {
        let mut b = sample();
        b.subcommand = "lingrow".into();
        assert!(compare(&sample(), &b, 0.05).is_err());
    }

    #[test]
    fn nan_survives_a_round_trip() {
        let mut s = sample();
        s.record("gap", f64::NAN);
        let back: Summary = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert!(back.recorded["gap"].is_nan());
    }

    #[test]
    fn relation_serializes_as_a_symbol() {
        assert_eq!(serde_json::to_string(&Relation::AtMost).unwrap(), "\"<=\"");
    }
}
