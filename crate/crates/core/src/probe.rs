//! Counted distance evaluation.
//!
//! Every distance query issued by the tracer goes through a [`Probe`], which
//! tallies it under one of three categories so the totals can be compared
//! against grid-based extraction costs.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Point;
use crate::scene::{DistProbe, NeighborSet, Scene};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    pub dist_evaluations: u64,
    pub frontier_samples: u64,
    pub ascent_steps: u64,
    pub refinement_probes: u64,
    /// Pores found (M).
    pub pores: u64,
    /// Throats found (N).
    pub throats: u64,
}

impl EvalCounters {
    /// `dist_evaluations == frontier_samples + ascent_steps + refinement_probes`
    pub fn is_consistent(&self) -> bool {
        self.dist_evaluations == self.frontier_samples + self.ascent_steps + self.refinement_probes
    }
}

impl AddAssign for EvalCounters {
    fn add_assign(&mut self, o: EvalCounters) {
        self.dist_evaluations += o.dist_evaluations;
        self.frontier_samples += o.frontier_samples;
        self.ascent_steps += o.ascent_steps;
        self.refinement_probes += o.refinement_probes;
        self.pores += o.pores;
        self.throats += o.throats;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    Frontier,
    Ascent,
    Refine,
}

pub struct Probe<'s> {
    scene: &'s Scene,
    counters: EvalCounters,
    neighbors: Option<NeighborSet>,
}

impl<'s> Probe<'s> {
    pub fn new(scene: &'s Scene) -> Self {
        Probe { scene, counters: EvalCounters::default(), neighbors: None }
    }

    pub fn scene(&self) -> &'s Scene {
        self.scene
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters
    }

    pub fn take_counters(&mut self) -> EvalCounters {
        std::mem::take(&mut self.counters)
    }

    /// Restricts subsequent queries to solids within `range` of `center`.
    ///
    /// Callers must pick `range` so that every queried point's true nearest
    /// solid lies inside it; `dist(q) <= dist(center) + |q - center|` gives a
    /// safe bound of `dist(center) + 2 * max|q - center|`.
    pub fn restrict(&mut self, center: &Point, range: f64) {
        let set = self.scene.neighbor_solids(center, range);
        self.neighbors = (!set.is_empty()).then_some(set);
    }

    pub fn unrestrict(&mut self) {
        self.neighbors = None;
    }

    pub fn eval(&mut self, p: &Point, kind: EvalKind) -> Result<DistProbe> {
        let probe = match &self.neighbors {
            Some(set) => match self.scene.dist_among(p, set)? {
                Some(d) => d,
                None => self.scene.dist(p)?,
            },
            None => self.scene.dist(p)?,
        };
        self.counters.dist_evaluations += 1;
        match kind {
            EvalKind::Frontier => self.counters.frontier_samples += 1,
            EvalKind::Ascent => self.counters.ascent_steps += 1,
            EvalKind::Refine => self.counters.refinement_probes += 1,
        }
        Ok(probe)
    }

    /// Like [`Probe::eval`] but maps points outside the domain to `None`.
    pub fn value(&mut self, p: &Point, kind: EvalKind) -> Option<f64> {
        self.eval(p, kind).ok().map(|d| d.value)
    }
}
