//! Deciding the Nikodym and Kakeya properties, with explicit witnesses.
//!
//! A set B is Nikodym when every point x outside B lies on a line meeting
//! the complement of B only in x. A set K is Kakeya when it contains a full
//! line in every direction. Both checks are deterministic: candidate lines
//! are tried in ascending id order and failures report the least failing
//! point or direction.

use crate::geometry::{DirectionId, LineId, PointId};
use crate::sets::PointSet;
use std::collections::BTreeMap;

/// For each complement point x, a line through x whose only complement
/// point is x. The recorded lines are necessarily pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WitnessMap {
    entries: BTreeMap<PointId, LineId>,
}

impl WitnessMap {
    pub fn new() -> WitnessMap {
        WitnessMap::default()
    }

    pub fn insert(&mut self, x: PointId, line: LineId) {
        self.entries.insert(x, line);
    }

    pub fn get(&self, x: PointId) -> Option<LineId> {
        self.entries.get(&x).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending point-index order.
    pub fn iter(&self) -> impl Iterator<Item = (PointId, LineId)> + '_ {
        self.entries.iter().map(|(p, l)| (*p, *l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NikodymOutcome {
    /// The set is Nikodym; one witness line per complement point.
    Nikodym(WitnessMap),
    /// The least-index complement point with no admissible line.
    NotNikodym { point: PointId },
}

impl NikodymOutcome {
    pub fn is_nikodym(&self) -> bool {
        matches!(self, NikodymOutcome::Nikodym(_))
    }

    pub fn witnesses(&self) -> Option<&WitnessMap> {
        match self {
            NikodymOutcome::Nikodym(w) => Some(w),
            NikodymOutcome::NotNikodym { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KakeyaOutcome {
    /// One fully contained line per direction, indexed by direction id.
    Kakeya(Vec<LineId>),
    /// The least direction id with no fully contained line.
    NotKakeya { direction: DirectionId },
}

impl KakeyaOutcome {
    pub fn is_kakeya(&self) -> bool {
        matches!(self, KakeyaOutcome::Kakeya(_))
    }
}

/// True iff the line's only point outside `b` is `x`.
fn line_private_for(b: &PointSet, x: PointId, line: LineId) -> bool {
    b.geometry()
        .line_points(line)
        .iter()
        .all(|&p| p == x || b.contains(p))
}

/// Decides the Nikodym property. Witness selection is deterministic: for
/// each complement point the admissible line with the least id is recorded.
pub fn is_nikodym(b: &PointSet) -> NikodymOutcome {
    let geom = b.geometry();
    let mut witnesses = WitnessMap::new();
    for x in geom.points() {
        if b.contains(x) {
            continue;
        }
        match geom
            .lines_through(x)
            .iter()
            .find(|&&l| line_private_for(b, x, l))
        {
            Some(&l) => witnesses.insert(x, l),
            None => return NikodymOutcome::NotNikodym { point: x },
        }
    }
    NikodymOutcome::Nikodym(witnesses)
}

/// Decides the Kakeya property: for every direction, the least-id line of
/// that direction fully contained in `k`.
pub fn is_kakeya(k: &PointSet) -> KakeyaOutcome {
    let geom = k.geometry();
    let mut cover = Vec::with_capacity(geom.num_directions());
    for d in geom.directions() {
        match geom
            .lines_of_direction(d)
            .find(|&l| geom.line_points(l).iter().all(|&p| k.contains(p)))
        {
            Some(l) => cover.push(l),
            None => return KakeyaOutcome::NotKakeya { direction: d },
        }
    }
    KakeyaOutcome::Kakeya(cover)
}

/// True iff `w` covers every complement point of `b` and each recorded line
/// passes through its key point while avoiding the rest of the complement.
pub fn verify_witnesses(b: &PointSet, w: &WitnessMap) -> bool {
    let complement_size = b.geometry().num_points() - b.size();
    if w.len() != complement_size {
        return false;
    }
    w.iter().all(|(x, l)| {
        !b.contains(x) && b.geometry().line_points(l).contains(&x) && line_private_for(b, x, l)
    })
}
