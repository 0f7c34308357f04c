use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Solution;

/// Outcome of one pairwise comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The left solution is preferred.
    Left,
    /// The right solution is preferred.
    Right,
    Indifferent,
}

impl Verdict {
    pub fn flipped(self) -> Self {
        match self {
            Verdict::Left => Verdict::Right,
            Verdict::Right => Verdict::Left,
            Verdict::Indifferent => Verdict::Indifferent,
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Verdict::Left),
            "right" => Ok(Verdict::Right),
            "indifferent" => Ok(Verdict::Indifferent),
            other => Err(Error::Validation(format!("unknown verdict `{other}`"))),
        }
    }
}

/// One logged comparison with the model-input (benefit) vectors of both
/// sides as they were when it was asked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub seq: u64,
    pub left_id: Solution,
    pub right_id: Solution,
    pub verdict: Verdict,
    pub left_vec: Vec<f64>,
    pub right_vec: Vec<f64>,
    pub active: bool,
}

impl Comparison {
    /// `(better, worse)` for a strict verdict, `None` for indifference.
    pub fn strict(&self) -> Option<(&[f64], &[f64])> {
        match self.verdict {
            Verdict::Left => Some((&self.left_vec, &self.right_vec)),
            Verdict::Right => Some((&self.right_vec, &self.left_vec)),
            Verdict::Indifferent => None,
        }
    }
}

/// Append-only comparison log; repair only toggles `active`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreferenceStore {
    entries: Vec<Comparison>,
}

impl PreferenceStore {
    pub const fn new() -> Self {
        PreferenceStore { entries: Vec::new() }
    }

    pub fn push(
        &mut self,
        left_id: Solution,
        right_id: Solution,
        verdict: Verdict,
        left_vec: Vec<f64>,
        right_vec: Vec<f64>,
    ) -> Result<u64> {
        if left_id == right_id {
            return Err(Error::Validation(format!("cannot compare {left_id} with itself")));
        }
        if left_vec.len() != right_vec.len() {
            return Err(Error::Validation("comparison vectors differ in length".into()));
        }
        let seq = self.entries.last().map_or(1, |c| c.seq + 1);
        self.entries.push(Comparison {
            seq,
            left_id,
            right_id,
            verdict,
            left_vec,
            right_vec,
            active: true,
        });
        Ok(seq)
    }

    pub fn entries(&self) -> &[Comparison] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn active(&self) -> impl Iterator<Item = &Comparison> {
        self.entries.iter().filter(|c| c.active)
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    pub fn set_active(&mut self, seq: u64, active: bool) {
        if let Some(c) = self.entries.iter_mut().find(|c| c.seq == seq) {
            c.active = active;
        }
    }

    /// Whether this unordered pair was ever asked.
    pub fn contains_pair(&self, a: &Solution, b: &Solution) -> bool {
        self.entries
            .iter()
            .any(|c| (&c.left_id == a && &c.right_id == b) || (&c.left_id == b && &c.right_id == a))
    }

    /// Benefit-vector arity, if any comparison is stored.
    pub fn arity(&self) -> Option<usize> {
        self.entries.first().map(|c| c.left_vec.len())
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for c in &self.entries {
            serde_json::to_writer(&mut out, c)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Self> {
        let mut store = PreferenceStore::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let c: Comparison = serde_json::from_str(&line)?;
            if store.entries.last().is_some_and(|last| last.seq >= c.seq) {
                return Err(Error::Validation(format!("comparison log out of order at seq {}", c.seq)));
            }
            if c.left_id == c.right_id {
                return Err(Error::Validation(format!("comparison {} has identical sides", c.seq)));
            }
            store.entries.push(c);
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(v: &[usize]) -> Solution {
        Solution::new(v.to_vec(), 20).unwrap()
    }

    #[test]
    fn sequence_numbers_increase() {
        let mut s = PreferenceStore::new();
        let a = s.push(sol(&[1, 2]), sol(&[3, 4]), Verdict::Left, vec![1.0], vec![0.0]).unwrap();
        let b = s.push(sol(&[1, 3]), sol(&[3, 4]), Verdict::Right, vec![1.0], vec![0.0]).unwrap();
        assert!(b > a);
        assert!(s.contains_pair(&sol(&[3, 4]), &sol(&[1, 2])));
        assert!(!s.contains_pair(&sol(&[1, 2]), &sol(&[1, 3])));
    }

    #[test]
    fn self_comparison_is_rejected() {
        let mut s = PreferenceStore::new();
        assert!(s.push(sol(&[1, 2]), sol(&[2, 1]), Verdict::Left, vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn jsonl_round_trip_keeps_inactive_entries() {
        let mut s = PreferenceStore::new();
        s.push(sol(&[1, 2]), sol(&[3, 4]), Verdict::Left, vec![0.5, 0.25], vec![0.0, 1.0]).unwrap();
        s.push(sol(&[5, 6]), sol(&[3, 4]), Verdict::Indifferent, vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        s.set_active(1, false);
        let mut buf = Vec::new();
        s.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"left_vec\":[0.5,0.25]"));
        let back = PreferenceStore::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.active_count(), 1);
    }

    #[test]
    fn verdict_tokens() {
        assert_eq!("left".parse::<Verdict>().unwrap(), Verdict::Left);
        assert!("maybe".parse::<Verdict>().is_err());
        assert_eq!(Verdict::Right.flipped(), Verdict::Left);
    }
}
