//! Finite probability distributions over structured outcomes.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One coordinate of an outcome tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(x) => write!(f, "{x}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

impl From<u64> for Label {
    fn from(x: u64) -> Self {
        Label::Int(x as i64)
    }
}

impl From<usize> for Label {
    fn from(x: usize) -> Self {
        Label::Int(x as i64)
    }
}

impl From<i64> for Label {
    fn from(x: i64) -> Self {
        Label::Int(x)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Text(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::Text(s)
    }
}

pub type Outcome = Vec<Label>;

/// A probability map over outcome tuples sharing a common field layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    fields: Vec<String>,
    probs: BTreeMap<Outcome, f64>,
    metadata: BTreeMap<String, Value>,
}

impl OutcomeDistribution {
    pub fn new<S: Into<String>>(fields: impl IntoIterator<Item = S>) -> Self {
        OutcomeDistribution {
            fields: fields.into_iter().map(Into::into).collect(),
            probs: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        &self.metadata
    }

    pub fn set_meta(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metadata.insert(key.to_string(), v);
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Add `p` to the mass of `outcome`.
    pub fn add(&mut self, outcome: Outcome, p: f64) {
        debug_assert_eq!(outcome.len(), self.fields.len());
        *self.probs.entry(outcome).or_insert(0.0) += p;
    }

    /// Add `weight * other` pointwise.
    pub fn accumulate(&mut self, other: &OutcomeDistribution, weight: f64) -> Result<()> {
        if other.fields != self.fields {
            return Err(Error::MismatchedSpaces);
        }
        for (o, p) in &other.probs {
            *self.probs.entry(o.clone()).or_insert(0.0) += weight * p;
        }
        Ok(())
    }

    pub fn get(&self, outcome: &[Label]) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.probs.iter().map(|(o, p)| (o, *p))
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Clamp round-off negatives and drop outcomes with no mass.
    pub fn clean(&mut self, floor: f64) {
        self.probs.retain(|_, p| {
            if *p < 0.0 && *p >= -1e-12 {
                *p = 0.0;
            }
            p.abs() > floor
        });
    }

    pub fn scale(&mut self, factor: f64) {
        for p in self.probs.values_mut() {
            *p *= factor;
        }
    }

    pub fn normalize(&mut self) {
        let t = self.total();
        if t > 0.0 {
            self.scale(1.0 / t);
        }
    }

    pub fn max_probability(&self) -> f64 {
        self.probs.values().cloned().fold(0.0, f64::max)
    }

    pub fn min_probability(&self) -> f64 {
        self.probs.values().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Sum of `|p - p'|` over the union of supports.
    pub fn l1(&self, other: &OutcomeDistribution) -> Result<f64> {
        if self.fields != other.fields {
            return Err(Error::MismatchedSpaces);
        }
        let mut s = 0.0;
        for (o, p) in &self.probs {
            s += (p - other.get(o)).abs();
        }
        for (o, p) in &other.probs {
            if !self.probs.contains_key(o) {
                s += p.abs();
            }
        }
        Ok(s)
    }

    pub fn total_variation(&self, other: &OutcomeDistribution) -> Result<f64> {
        Ok(0.5 * self.l1(other)?)
    }

    /// Largest pointwise difference over the union of supports.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> Result<f64> {
        if self.fields != other.fields {
            return Err(Error::MismatchedSpaces);
        }
        let mut m: f64 = 0.0;
        for (o, p) in &self.probs {
            m = m.max((p - other.get(o)).abs());
        }
        for (o, p) in &other.probs {
            m = m.max((p - self.get(o)).abs());
        }
        Ok(m)
    }

    /// Marginal over the listed field positions, in that order.
    pub fn marginal(&self, keep: &[usize]) -> OutcomeDistribution {
        let mut out = OutcomeDistribution::new(keep.iter().map(|&i| self.fields[i].clone()));
        out.metadata = self.metadata.clone();
        for (o, p) in &self.probs {
            out.add(keep.iter().map(|&i| o[i].clone()).collect(), *p);
        }
        out
    }

    /// Prepared inverse-CDF sampler.
    pub fn sampler(&self) -> Sampler<'_> {
        let mut outcomes = Vec::with_capacity(self.probs.len());
        let mut cumulative = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for (o, p) in &self.probs {
            if *p > 0.0 {
                acc += p;
                outcomes.push(o);
                cumulative.push(acc);
            }
        }
        Sampler {
            outcomes,
            cumulative,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut meta = self.metadata.clone();
        meta.insert("schema".into(), Value::from(SCHEMA_VERSION));
        writeln!(w, "# {}", serde_json::to_string(&meta)?)?;
        let mut out = csv::Writer::from_writer(w);
        let mut header = self.fields.clone();
        header.push("probability".into());
        out.write_record(&header)?;
        for (o, p) in &self.probs {
            let mut row: Vec<String> = o.iter().map(|l| l.to_string()).collect();
            row.push(format!("{p:.17e}"));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let outcomes: Vec<Value> = self
            .probs
            .iter()
            .map(|(o, p)| serde_json::json!({"outcome": o, "probability": p}))
            .collect();
        serde_json::json!({
            "schema": SCHEMA_VERSION,
            "fields": self.fields,
            "metadata": self.metadata,
            "outcomes": outcomes,
        })
    }
}

pub struct Sampler<'a> {
    outcomes: Vec<&'a Outcome>,
    cumulative: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &'a Outcome {
        let total = *self.cumulative.last().expect("empty distribution");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.outcomes[i.min(self.outcomes.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: u64) -> OutcomeDistribution {
        let mut d = OutcomeDistribution::new(["x"]);
        for i in 0..n {
            d.add(vec![i.into()], 1.0 / n as f64);
        }
        d
    }

    #[test]
    fn tv_examples() {
        let u = uniform(8);
        assert_eq!(u.total_variation(&u).unwrap(), 0.0);
        let mut point = OutcomeDistribution::new(["x"]);
        point.add(vec![0u64.into()], 1.0);
        assert!((point.total_variation(&u).unwrap() - (1.0 - 1.0 / 8.0)).abs() < 1e-12);
        let other = OutcomeDistribution::new(["y"]);
        assert_eq!(u.total_variation(&other), Err(Error::MismatchedSpaces));
    }

    #[test]
    fn tv_is_a_metric_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let random = |rng: &mut ChaCha8Rng| {
            let mut d = OutcomeDistribution::new(["x"]);
            for i in 0..6u64 {
                d.add(vec![i.into()], rng.random::<f64>());
            }
            d.normalize();
            d
        };
        for _ in 0..50 {
            let (a, b, c) = (random(&mut rng), random(&mut rng), random(&mut rng));
            let ab = a.total_variation(&b).unwrap();
            assert!((ab - b.total_variation(&a).unwrap()).abs() < 1e-15);
            assert!(ab <= a.total_variation(&c).unwrap() + c.total_variation(&b).unwrap() + 1e-15);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn marginal_and_sampling() {
        let mut d = OutcomeDistribution::new(["a", "b"]);
        d.add(vec![0u64.into(), 0u64.into()], 0.25);
        d.add(vec![0u64.into(), 1u64.into()], 0.25);
        d.add(vec![1u64.into(), 0u64.into()], 0.5);
        let m = d.marginal(&[0]);
        assert_eq!(m.get(&[0u64.into()]), 0.5);
        let s = d.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..20_000)
            .filter(|_| s.sample(&mut rng)[0] == Label::Int(1))
            .count();
        assert!((hits as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn csv_and_json_carry_metadata() {
        let d = uniform(2).with_meta("basis", "adapted");
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# {\"basis\":\"adapted\",\"schema\":1}\nx,probability\n"));
        let j = d.to_json();
        assert_eq!(j["schema"], 1);
        assert_eq!(j["outcomes"].as_array().unwrap().len(), 2);
    }
}
