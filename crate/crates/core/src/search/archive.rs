use serde::{Deserialize, Serialize};

use super::objective::dominates_min;

/// A configuration (library index per gene) with its minimization objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub genome: Vec<usize>,
    pub objectives: Vec<f64>,
    /// Generation in which the member was inserted.
    pub generation: usize,
}

/// Mutually non-dominated members in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    members: Vec<Member>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts unless dominated by, or identical to, an existing member; evicts members the
    /// candidate dominates.
    pub fn insert(&mut self, genome: &[usize], objectives: &[f64], generation: usize) -> bool {
        for m in &self.members {
            if dominates_min(&m.objectives, objectives) || (m.objectives == objectives && m.genome == genome) {
                return false;
            }
        }
        self.members.retain(|m| !dominates_min(objectives, &m.objectives));
        self.members.push(Member {
            genome: genome.to_vec(),
            objectives: objectives.to_vec(),
            generation,
        });
        true
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|m| m.objectives.clone()).collect()
    }

    /// Members sorted by objective vector, then genome.
    pub fn sorted(&self) -> Vec<Member> {
        let mut v = self.members.clone();
        v.sort_by(|a, b| {
            a.objectives
                .iter()
                .zip(&b.objectives)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.genome.cmp(&b.genome))
        });
        v
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = (&'a [usize], &'a [f64])>, generation: usize) -> Self {
        let mut a = ParetoArchive::new();
        for (g, o) in points {
            a.insert(g, o, generation);
        }
        a
    }
}
