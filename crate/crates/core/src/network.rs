//! Pore-network data model, throat length formulas and summary statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::probe::EvalCounters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoreKind {
    Interior,
    DeadEnd,
    Boundary,
}

impl PoreKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PoreKind::Interior => "interior",
            PoreKind::DeadEnd => "dead-end",
            PoreKind::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThroatKind {
    Interior,
    DeadEnd,
    Boundary,
}

impl ThroatKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThroatKind::Interior => "interior",
            ThroatKind::DeadEnd => "dead-end",
            ThroatKind::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pore {
    pub id: usize,
    pub center: Point,
    /// Inscribed-ball radius (distance to the solid at the center).
    pub radius: f64,
    pub kind: PoreKind,
}

/// Polyline traced along one medial axis between two pores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedialPath {
    /// Traced positions; the first and last are the end pore centers.
    pub points: Vec<Point>,
    /// Distance value at each point.
    pub values: Vec<f64>,
    /// `step_radii[i]` is the length of the step from `points[i]` to `points[i + 1]`.
    pub step_radii: Vec<f64>,
    /// Index of the throat vertex, counted in steps from the first pore.
    pub throat_index: Option<usize>,
    /// False when the trace hit its step budget.
    pub complete: bool,
}

impl MedialPath {
    /// Number of steps (`points.len() - 1`).
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn step_sum(&self) -> f64 {
        self.step_radii.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::MalformedPath("a path needs at least two points".into()));
        }
        if self.values.len() != self.points.len() || self.step_radii.len() + 1 != self.points.len() {
            return Err(Error::MalformedPath("points, values and step radii disagree in length".into()));
        }
        if let Some(n1) = self.throat_index {
            if n1 < 1 || n1 > self.steps() {
                return Err(Error::MalformedPath(format!("throat index {n1} outside 1..={}", self.steps())));
            }
        }
        Ok(())
    }

    /// Mirror image of the path (reverses direction and the throat index).
    pub fn reversed(&self) -> MedialPath {
        let n = self.steps();
        MedialPath {
            points: self.points.iter().rev().copied().collect(),
            values: self.values.iter().rev().copied().collect(),
            step_radii: self.step_radii.iter().rev().copied().collect(),
            throat_index: self.throat_index.map(|t| (n - t).max(1)),
            complete: self.complete,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throat {
    pub id: usize,
    pub pores: (usize, usize),
    pub center: Point,
    pub radius: f64,
    /// Total pore-to-pore length along the axis, `l1 + l2`.
    pub length_total: f64,
    pub l1: f64,
    pub l2: f64,
    /// Channel length `l1 - r1 + l2 - r2`.
    pub length_throat: f64,
    pub kind: ThroatKind,
}

/// Total length `l1 + l2` as stored.
pub fn total_length(l1: f64, l2: f64) -> f64 {
    l1 + l2
}

/// Channel length with both pore bodies removed, evaluated left to right.
pub fn channel_length(l1: f64, r1: f64, l2: f64, r2: f64) -> f64 {
    l1 - r1 + l2 - r2
}

/// Throat center, radius and lengths of `path`, which runs from `p1` to `p2`.
///
/// Dead-end throats sit at the dead-end end of the path: `l2 = 0` and the
/// dead-end pore radius enters as `r2`.
pub fn throat_geometry(path: &MedialPath, p1: &Pore, p2: &Pore, kind: ThroatKind) -> Result<Throat> {
    path.validate()?;
    let n2 = path.steps();
    let n1 = match kind {
        ThroatKind::DeadEnd => n2,
        _ => path.throat_index.ok_or_else(|| Error::MalformedPath("path has no throat index".into()))?,
    };
    let l1: f64 = path.step_radii[..n1].iter().sum();
    let l2: f64 = path.step_radii[n1..].iter().sum();
    Ok(Throat {
        id: 0,
        pores: (p1.id, p2.id),
        center: path.points[n1],
        radius: path.values[n1],
        length_total: total_length(l1, l2),
        l1,
        l2,
        length_throat: channel_length(l1, p1.radius, l2, p2.radius),
        kind,
    })
}

/// Where the network came from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 (hex) of the canonical JSON of the trace configuration.
    pub config_hash: String,
    pub counters: EvalCounters,
    /// False when a budget ran out before the pore queue emptied.
    pub complete: bool,
}

/// Extracted pores, throats and the medial path behind each throat.
///
/// `paths[i]` belongs to `throats[i]`; ids are dense and equal to positions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoreNetwork {
    pub dim: usize,
    pub pores: Vec<Pore>,
    pub throats: Vec<Throat>,
    pub paths: Vec<MedialPath>,
    pub provenance: Provenance,
}

impl PoreNetwork {
    /// Throat ids incident to each pore, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.pores.len()];
        for t in &self.throats {
            adj[t.pores.0].push(t.id);
            if t.pores.1 != t.pores.0 {
                adj[t.pores.1].push(t.id);
            }
        }
        adj
    }

    /// Checks id density, references, path/throat pairing and the length identities.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.pores.iter().enumerate() {
            if p.id != i {
                return Err(Error::Export(format!("pore at position {i} has id {}", p.id)));
            }
        }
        if self.paths.len() != self.throats.len() {
            return Err(Error::Export("every throat needs exactly one path".into()));
        }
        for (i, t) in self.throats.iter().enumerate() {
            if t.id != i {
                return Err(Error::Export(format!("throat at position {i} has id {}", t.id)));
            }
            let (a, b) = t.pores;
            if a >= self.pores.len() || b >= self.pores.len() {
                return Err(Error::Export(format!("throat {i} references a missing pore")));
            }
            if t.length_total.to_bits() != total_length(t.l1, t.l2).to_bits() {
                return Err(Error::Export(format!("throat {i}: L_t != L1 + L2")));
            }
            let lt = channel_length(t.l1, self.pores[a].radius, t.l2, self.pores[b].radius);
            if t.length_throat.to_bits() != lt.to_bits() {
                return Err(Error::Export(format!("throat {i}: L_throat != L1 - R1 + L2 - R2")));
            }
            self.paths[i].validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadiusSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl RadiusSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut s = RadiusSummary { count: 0, min: f64::INFINITY, max: f64::NEG_INFINITY, mean: 0.0 };
        let mut sum = 0.0;
        for v in values {
            s.count += 1;
            s.min = s.min.min(v);
            s.max = s.max.max(v);
            sum += v;
        }
        if s.count == 0 {
            return RadiusSummary::default();
        }
        s.mean = sum / s.count as f64;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkStats {
    pub pores_by_kind: BTreeMap<PoreKind, usize>,
    pub throats_by_kind: BTreeMap<ThroatKind, usize>,
    /// Interior pores keyed by their number of interior throats.
    pub coordination: BTreeMap<usize, usize>,
    pub pore_radius: RadiusSummary,
    pub throat_radius: RadiusSummary,
}

pub fn stats(net: &PoreNetwork) -> NetworkStats {
    let mut s = NetworkStats::default();
    for p in &net.pores {
        *s.pores_by_kind.entry(p.kind).or_default() += 1;
    }
    for t in &net.throats {
        *s.throats_by_kind.entry(t.kind).or_default() += 1;
    }
    let adj = net.adjacency();
    for p in net.pores.iter().filter(|p| p.kind == PoreKind::Interior) {
        let z = adj[p.id].iter().filter(|&&t| net.throats[t].kind == ThroatKind::Interior).count();
        *s.coordination.entry(z).or_default() += 1;
    }
    s.pore_radius = RadiusSummary::of(net.pores.iter().map(|p| p.radius));
    s.throat_radius = RadiusSummary::of(net.throats.iter().map(|t| t.radius));
    s
}
