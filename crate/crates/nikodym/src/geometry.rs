//! Points, directions, and lines of the affine space AG(n,q).
//!
//! A point is a coordinate vector packed into a dense index by little-endian
//! radix-q packing (coordinate 0 least significant). A direction is the
//! equivalence class of a nonzero vector under scalar multiples, represented
//! by the unique scalar multiple whose first nonzero coordinate is 1 and
//! identified by a dense id assigned in ascending order of the
//! representative's point index. A line is stored in canonical form: its
//! minimal-index point plus its direction, with line ids assigned by sorting
//! (direction id, base index). Incidence tables (line -> points,
//! point -> lines) are materialized once at construction.

use crate::gf::{Field, FieldElem};
use std::ops::Range;
use thiserror::Error;

/// Default cap on the number of points q^n.
pub const DEFAULT_POINT_LIMIT: u64 = 1 << 20;

/// Cap on the total size of the incidence tables (num_lines * q entries).
const INCIDENCE_LIMIT: u64 = 1 << 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeomError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("geometry too large: {what}")]
    TooLarge { what: String },
    #[error("a line through two points requires the points to be distinct")]
    DegeneratePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl DirectionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LineId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A line in canonical form: base is the minimal-index point on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line {
    pub id: LineId,
    pub base: PointId,
    pub dir: DirectionId,
}

struct LineData {
    base: u32,
    dir: u32,
}

/// AG(n,q) with its full incidence structure. Immutable after construction.
pub struct Geometry {
    field: Field,
    n: u32,
    num_points: usize,
    num_directions: usize,
    num_lines: usize,
    lines_per_point: usize,
    /// Normalized representative vector per direction id.
    dir_reps: Vec<Vec<FieldElem>>,
    /// Point index of each representative, ascending (search key for dir lookup).
    dir_rep_indices: Vec<u32>,
    lines: Vec<LineData>,
    /// Flat line -> points table, q entries per line, in ascending parameter order.
    line_pts: Vec<PointId>,
    /// Flat point -> lines table, lines_per_point entries per point, ascending line id.
    point_lns: Vec<LineId>,
    /// Contiguous line-id range per direction.
    dir_line_ranges: Vec<Range<u32>>,
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n
    }
}

impl Eq for Geometry {}

impl std::fmt::Debug for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AG({}, {})", self.n, self.field.order())
    }
}

impl Geometry {
    pub fn new(field: Field, n: u32) -> Result<Geometry, GeomError> {
        Geometry::with_limit(field, n, DEFAULT_POINT_LIMIT)
    }

    pub fn with_limit(field: Field, n: u32, point_limit: u64) -> Result<Geometry, GeomError> {
        if n == 0 {
            return Err(GeomError::ZeroDimension);
        }
        let q = field.order();
        let num_points = (q as u128)
            .checked_pow(n)
            .filter(|&v| v <= point_limit as u128)
            .ok_or(GeomError::TooLarge {
                what: format!("q^n = {q}^{n} exceeds the point limit {point_limit}"),
            })? as u64;
        let num_directions = (num_points - 1) / (q - 1);
        let num_lines = (num_points / q) * num_directions;
        if num_lines * q > INCIDENCE_LIMIT {
            return Err(GeomError::TooLarge {
                what: format!("incidence table of {} entries", num_lines * q),
            });
        }

        let mut geom = Geometry {
            field,
            n,
            num_points: num_points as usize,
            num_directions: num_directions as usize,
            num_lines: num_lines as usize,
            lines_per_point: num_directions as usize,
            dir_reps: Vec::new(),
            dir_rep_indices: Vec::new(),
            lines: Vec::new(),
            line_pts: Vec::new(),
            point_lns: Vec::new(),
            dir_line_ranges: Vec::new(),
        };
        geom.enumerate_directions_internal();
        geom.enumerate_lines_internal();
        geom.build_point_incidence();
        Ok(geom)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.field.order()
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_directions(&self) -> usize {
        self.num_directions
    }

    pub fn num_lines(&self) -> usize {
        self.num_lines
    }

    /// Number of lines through any single point, (q^n - 1)/(q - 1).
    pub fn lines_per_point(&self) -> usize {
        self.lines_per_point
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.num_points as u32).map(PointId)
    }

    pub fn directions(&self) -> impl Iterator<Item = DirectionId> {
        (0..self.num_directions as u32).map(DirectionId)
    }

    pub fn line_ids(&self) -> impl Iterator<Item = LineId> {
        (0..self.num_lines as u32).map(LineId)
    }

    pub fn line(&self, id: LineId) -> Line {
        let d = &self.lines[id.index()];
        Line {
            id,
            base: PointId(d.base),
            dir: DirectionId(d.dir),
        }
    }

    /// Coordinates of a point, little-endian radix-q unpacking of its index.
    pub fn coords_of(&self, p: PointId) -> Vec<FieldElem> {
        let q = self.field.order();
        let mut v = p.0 as u64;
        let mut out = Vec::with_capacity(self.n as usize);
        for _ in 0..self.n {
            out.push(self.field.elem(v % q));
            v /= q;
        }
        out
    }

    /// Packs coordinates into a point index.
    pub fn point_at(&self, coords: &[FieldElem]) -> PointId {
        assert_eq!(coords.len(), self.n as usize);
        let q = self.field.order();
        let mut v = 0u64;
        for c in coords.iter().rev() {
            v = v * q + c.index();
        }
        PointId(v as u32)
    }

    /// The normalized representative vector of a direction.
    pub fn direction_rep(&self, d: DirectionId) -> &[FieldElem] {
        &self.dir_reps[d.index()]
    }

    /// The q points of a line, ordered by ascending line parameter
    /// (t = 0 gives the base point).
    pub fn line_points(&self, id: LineId) -> &[PointId] {
        let q = self.field.order() as usize;
        &self.line_pts[id.index() * q..(id.index() + 1) * q]
    }

    /// All lines through a point, in ascending line-id order.
    pub fn lines_through(&self, p: PointId) -> &[LineId] {
        let lp = self.lines_per_point;
        &self.point_lns[p.index() * lp..(p.index() + 1) * lp]
    }

    /// The contiguous range of line ids having direction `d`.
    pub fn lines_of_direction(&self, d: DirectionId) -> impl Iterator<Item = LineId> {
        let r = self.dir_line_ranges[d.index()].clone();
        r.map(LineId)
    }

    /// The unique canonical line through two distinct points.
    pub fn line_through(&self, a: PointId, b: PointId) -> Result<LineId, GeomError> {
        if a == b {
            return Err(GeomError::DegeneratePair);
        }
        let ca = self.coords_of(a);
        let cb = self.coords_of(b);
        let delta: Vec<FieldElem> = ca
            .iter()
            .zip(&cb)
            .map(|(x, y)| self.field.sub(*y, *x))
            .collect();
        let dir = self.direction_of(&delta);
        let range = &self.dir_line_ranges[dir.index()];
        // binary search within a's incidence list for the line in this range
        let lines = self.lines_through(a);
        let pos = lines.partition_point(|l| l.0 < range.start);
        debug_assert!(pos < lines.len() && lines[pos].0 < range.end);
        Ok(lines[pos])
    }

    /// The direction id of a nonzero vector.
    pub fn direction_of(&self, v: &[FieldElem]) -> DirectionId {
        let lead = v
            .iter()
            .position(|c| !c.is_zero())
            .expect("direction of the zero vector");
        let scale = self.field.inv(v[lead]).expect("lead coordinate is nonzero");
        let rep: Vec<FieldElem> = v.iter().map(|c| self.field.mul(*c, scale)).collect();
        let rep_index = self.point_at(&rep).0;
        let pos = self
            .dir_rep_indices
            .binary_search(&rep_index)
            .expect("normalized representative is enumerated");
        DirectionId(pos as u32)
    }

    /// Adds a direction representative (scaled by t) to a point, in index space.
    fn offset_point(&self, p: u32, scaled_rep: &[FieldElem]) -> u32 {
        let coords = self.coords_of(PointId(p));
        let sum: Vec<FieldElem> = coords
            .iter()
            .zip(scaled_rep)
            .map(|(x, y)| self.field.add(*x, *y))
            .collect();
        self.point_at(&sum).0
    }

    /// Translates a point by the coordinate vector of another point.
    pub fn translate(&self, p: PointId, by: PointId) -> PointId {
        let t = self.coords_of(by);
        PointId(self.offset_point(p.0, &t))
    }

    fn enumerate_directions_internal(&mut self) {
        let q = self.field.order();
        let n = self.n as usize;
        let mut reps: Vec<(u32, Vec<FieldElem>)> = Vec::with_capacity(self.num_directions);
        for lead in 0..n {
            // coords below `lead` are zero, coords[lead] = 1, the rest free
            let free = n - lead - 1;
            let count = q.pow(free as u32);
            for w in 0..count {
                let mut rep = vec![FieldElem::ZERO; n];
                rep[lead] = FieldElem::ONE;
                let mut v = w;
                for c in rep.iter_mut().skip(lead + 1) {
                    *c = self.field.elem(v % q);
                    v /= q;
                }
                let idx = self.point_at(&rep).0;
                reps.push((idx, rep));
            }
        }
        assert_eq!(reps.len(), self.num_directions);
        reps.sort_by_key(|(idx, _)| *idx);
        self.dir_rep_indices = reps.iter().map(|(idx, _)| *idx).collect();
        self.dir_reps = reps.into_iter().map(|(_, rep)| rep).collect();
    }

    fn enumerate_lines_internal(&mut self) {
        let q = self.field.order();
        let lines_per_dir = self.num_points / q as usize;
        self.lines = Vec::with_capacity(self.num_lines);
        self.line_pts = Vec::with_capacity(self.num_lines * q as usize);
        self.dir_line_ranges = Vec::with_capacity(self.num_directions);
        let mut covered = vec![false; self.num_points];

        for d in 0..self.num_directions {
            let start = self.lines.len() as u32;
            covered.iter_mut().for_each(|c| *c = false);
            // rep scaled by every parameter value, precomputed per direction
            let scaled: Vec<Vec<FieldElem>> = (0..q)
                .map(|t| {
                    let te = self.field.elem(t);
                    self.dir_reps[d]
                        .iter()
                        .map(|c| self.field.mul(*c, te))
                        .collect()
                })
                .collect();
            for base in 0..self.num_points as u32 {
                if covered[base as usize] {
                    continue;
                }
                let dir = d as u32;
                for s in &scaled {
                    let pt = self.offset_point(base, s);
                    debug_assert!(pt >= base, "scan order makes the first hit the base");
                    covered[pt as usize] = true;
                    self.line_pts.push(PointId(pt));
                }
                self.lines.push(LineData { base, dir });
            }
            let end = self.lines.len() as u32;
            assert_eq!((end - start) as usize, lines_per_dir);
            self.dir_line_ranges.push(start..end);
        }
        assert_eq!(self.lines.len(), self.num_lines);
    }

    fn build_point_incidence(&mut self) {
        let q = self.field.order() as usize;
        let lp = self.lines_per_point;
        let mut fill = vec![0usize; self.num_points];
        self.point_lns = vec![LineId(0); self.num_points * lp];
        for l in 0..self.num_lines {
            for &pt in &self.line_pts[l * q..(l + 1) * q] {
                let slot = pt.index() * lp + fill[pt.index()];
                self.point_lns[slot] = LineId(l as u32);
                fill[pt.index()] += 1;
            }
        }
        assert!(
            fill.iter().all(|&f| f == lp),
            "every point lies on exactly {lp} lines"
        );
    }
}
