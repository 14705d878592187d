use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ids of the structural entries, in report order.
pub const STRUCTURAL_IDS: &[&str] = &[
    "d_hermitian",
    "summand_sum",
    "j_unitary",
    "j_square_sign",
    "grading_involution",
    "grading_anticommutes_d",
    "grading_commutes_algebra",
    "grading_j_sign",
    "twist_representative",
];

/// One measured identity.
///
/// `relative_residual = absolute_residual / scale`, where `scale` is the
/// product of the norms of the factors involved, floored at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: String,
    /// Human-readable form of the identity being measured.
    pub relation: String,
    pub summand: Option<usize>,
    pub absolute_residual: f64,
    pub scale: f64,
    pub relative_residual: f64,
    pub pass: bool,
    /// Set when the identity holds for trivial reasons (e.g. every
    /// commutator `[D_ℓ, a]` vanishes).
    pub vacuous: bool,
    /// Basis indices `(a, b)` attaining the worst residual.
    pub witness: Option<(usize, usize)>,
}

impl ConditionEntry {
    pub(crate) fn new(id: &str, relation: &str, summand: Option<usize>, absolute: f64, scale: f64, tol: f64) -> Self {
        let relative = absolute / scale;
        Self {
            id: id.to_string(),
            relation: relation.to_string(),
            summand,
            absolute_residual: absolute,
            scale,
            relative_residual: relative,
            pass: relative <= tol,
            vacuous: false,
            witness: None,
        }
    }

    pub(crate) fn with_witness(mut self, witness: Option<(usize, usize)>) -> Self {
        self.witness = witness;
        self
    }

    pub(crate) fn vacuous(mut self, vacuous: bool) -> Self {
        self.vacuous = vacuous;
        self
    }
}

/// Which entry ids must pass for a report to count as a success.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssertSet {
    All,
    Ids(BTreeSet<String>),
}

impl AssertSet {
    pub fn ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for id in ids {
            let id = id.into();
            if id == "structural" {
                set.extend(STRUCTURAL_IDS.iter().map(|s| s.to_string()));
            } else {
                set.insert(id);
            }
        }
        AssertSet::Ids(set)
    }

    pub fn contains(&self, id: &str) -> bool {
        match self {
            AssertSet::All => true,
            AssertSet::Ids(set) => set.contains(id),
        }
    }
}

impl FromStr for AssertSet {
    type Err = Error;

    /// `all`, or a comma-separated list of ids; `structural` expands to the
    /// structural ids.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "all" {
            return Ok(AssertSet::All);
        }
        let ids: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
        if ids.is_empty() {
            return Err(Error::InvalidParams("empty assert set".into()));
        }
        Ok(AssertSet::ids(ids))
    }
}

impl fmt::Display for AssertSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssertSet::All => f.write_str("all"),
            AssertSet::Ids(set) => {
                let v: Vec<&str> = set.iter().map(String::as_str).collect();
                f.write_str(&v.join(","))
            }
        }
    }
}

/// Outcome of evaluating a report against an [`AssertSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub passed: bool,
    /// Asserted entries that failed, as `id` or `id[summand]`.
    pub failing: Vec<String>,
    /// Asserted ids (other than structural ones, which only exist for even
    /// triples or twist representatives) absent from the report.
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub entries: Vec<ConditionEntry>,
    /// For each summand, the sign `s` minimizing `‖D_ℓ J ν_ℓ − s ν_ℓ J D_ℓ‖`.
    pub measured_epsilon_prime: Vec<i8>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn entries_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a ConditionEntry> + 'a {
        self.entries.iter().filter(move |e| e.id == id)
    }

    /// Entry with the largest relative residual among those with `id`.
    pub fn worst(&self, id: &str) -> Option<&ConditionEntry> {
        self.entries
            .iter()
            .filter(|e| e.id == id)
            .max_by(|a, b| a.relative_residual.total_cmp(&b.relative_residual))
    }

    /// `Some(true)` if every entry with `id` passes; `None` if there is none.
    pub fn passes(&self, id: &str) -> Option<bool> {
        let mut any = false;
        for e in self.entries.iter().filter(|e| e.id == id) {
            any = true;
            if !e.pass {
                return Some(false);
            }
        }
        any.then_some(true)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn evaluate(&self, asserts: &AssertSet) -> Verdict {
        let failing: Vec<String> = self
            .entries
            .iter()
            .filter(|e| asserts.contains(&e.id) && !e.pass)
            .map(|e| match e.summand {
                Some(s) => format!("{}[{}]", e.id, s),
                None => e.id.clone(),
            })
            .collect();
        let missing = match asserts {
            AssertSet::All => Vec::new(),
            AssertSet::Ids(set) => set
                .iter()
                .filter(|id| !STRUCTURAL_IDS.contains(&id.as_str()))
                .filter(|id| !self.entries.iter().any(|e| &e.id == *id))
                .cloned()
                .collect(),
        };
        Verdict {
            passed: failing.is_empty() && missing.is_empty(),
            failing,
            missing,
        }
    }
}
