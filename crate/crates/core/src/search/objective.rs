use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::surrogate::Target;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A search objective. Engines minimize internally: QoR is carried as an error
/// (`best - value`), hardware costs as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Qor,
    Power,
    Luts,
    Delay,
}

impl Objective {
    pub fn sense(self) -> Sense {
        match self {
            Objective::Qor => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }

    pub fn target(self) -> Target {
        match self {
            Objective::Qor => Target::Qor,
            Objective::Power => Target::Power,
            Objective::Luts => Target::Luts,
            Objective::Delay => Target::Delay,
        }
    }

    pub fn name(self) -> &'static str {
        self.target().name()
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<Target>()? {
            Target::Qor => Objective::Qor,
            Target::Power => Objective::Power,
            Target::Luts => Objective::Luts,
            Target::Delay => Objective::Delay,
        })
    }
}

/// Default objective pair: QoR (maximized) and power (minimized).
pub fn default_objectives() -> Vec<Objective> {
    vec![Objective::Qor, Objective::Power]
}

/// Pareto dominance between minimization vectors.
#[inline]
pub fn dominates_min(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Pareto dominance of `a` over `b` under per-objective senses.
pub fn dominates(a: &[f64], b: &[f64], senses: &[Sense]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::ObjectiveArity(a.len(), b.len()));
    }
    if a.len() != senses.len() {
        return Err(Error::ObjectiveArity(a.len(), senses.len()));
    }
    Ok(dominates_min(&to_min(a, senses), &to_min(b, senses)))
}

/// Sense-adjusted copy where every objective is minimized.
pub fn to_min(v: &[f64], senses: &[Sense]) -> Vec<f64> {
    v.iter()
        .zip(senses)
        .map(|(&x, s)| if *s == Sense::Maximize { -x } else { x })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        let s = [Sense::Maximize, Sense::Minimize];
        assert!(dominates(&[40.0, 10.0], &[30.0, 12.0], &s).unwrap());
        assert!(!dominates(&[40.0, 10.0], &[40.0, 10.0], &s).unwrap());
        assert!(matches!(dominates(&[1.0], &[1.0, 2.0], &s), Err(Error::ObjectiveArity(1, 2))));
    }

    #[test]
    fn incomparable_pair() {
        let s = [Sense::Maximize, Sense::Minimize];
        // Better QoR bought with more power.
        assert!(!dominates(&[40.0, 10.0], &[50.0, 12.0], &s).unwrap());
        assert!(!dominates(&[50.0, 12.0], &[40.0, 10.0], &s).unwrap());
        // Better on both counts.
        assert!(dominates(&[50.0, 8.0], &[40.0, 10.0], &s).unwrap());
    }
}
