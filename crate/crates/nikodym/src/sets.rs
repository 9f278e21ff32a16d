//! Dense point sets over a geometry, with set algebra and a canonical text
//! file format.
//!
//! Storage is a plain word bitset over the q^n point indices so the search
//! hot loop gets word-level set operations and a deterministic iteration
//! order. Operations return new sets; a set never changes after it is built.
//!
//! File format (text, UTF-8, LF):
//!   line 1: `p k n`  -- field F_{p^k}, dimension n
//!   then one point per line: n space-separated coordinates in 0..q-1,
//!   coordinate 0 first. Lines starting with `#` and blank lines are
//!   ignored on input. Canonical output lists points sorted ascending by
//!   packed index, no comments, single trailing newline.

use crate::geometry::{GeomError, Geometry, PointId};
use crate::gf::{Field, FieldError};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("operands belong to different geometries")]
    SpecMismatch,
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("line {line}: coordinate {value} outside 0..{q}")]
    RangeError { line: usize, value: u64, q: u64 },
    #[error("line {line}: duplicate point")]
    DuplicatePoint { line: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// A subset of the points of AG(n,q), as a bitset plus cached size.
#[derive(Clone)]
pub struct PointSet {
    geom: Arc<Geometry>,
    words: Vec<u64>,
    size: usize,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.geom == other.geom && self.words == other.words
    }
}

impl Eq for PointSet {}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PointSet({:?}, size {})", self.geom, self.size)?;
        if self.size <= 32 {
            let idx: Vec<usize> = self.iter().map(|p| p.index()).collect();
            write!(f, " {idx:?}")?;
        }
        Ok(())
    }
}

impl PointSet {
    pub fn empty(geom: Arc<Geometry>) -> PointSet {
        let words = vec![0u64; geom.num_points().div_ceil(64)];
        PointSet {
            geom,
            words,
            size: 0,
        }
    }

    pub fn full(geom: Arc<Geometry>) -> PointSet {
        PointSet::empty(geom).complement()
    }

    pub fn from_points<I: IntoIterator<Item = PointId>>(
        geom: Arc<Geometry>,
        points: I,
    ) -> PointSet {
        let mut s = PointSet::empty(geom);
        for p in points {
            s.set_bit(p);
        }
        s
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.words[p.index() / 64] >> (p.index() % 64) & 1 == 1
    }

    fn set_bit(&mut self, p: PointId) {
        let w = &mut self.words[p.index() / 64];
        if *w >> (p.index() % 64) & 1 == 0 {
            *w |= 1 << (p.index() % 64);
            self.size += 1;
        }
    }

    fn clear_bit(&mut self, p: PointId) {
        let w = &mut self.words[p.index() / 64];
        if *w >> (p.index() % 64) & 1 == 1 {
            *w &= !(1 << (p.index() % 64));
            self.size -= 1;
        }
    }

    /// A copy with the point added.
    pub fn insert(&self, p: PointId) -> PointSet {
        let mut s = self.clone();
        s.set_bit(p);
        s
    }

    /// A copy with the point removed.
    pub fn remove(&self, p: PointId) -> PointSet {
        let mut s = self.clone();
        s.clear_bit(p);
        s
    }

    pub fn complement(&self) -> PointSet {
        let n = self.geom.num_points();
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        // mask tail bits beyond the point count
        if n % 64 != 0 {
            let last = words.len() - 1;
            words[last] &= (1u64 << (n % 64)) - 1;
        }
        PointSet {
            geom: Arc::clone(&self.geom),
            words,
            size: n - self.size,
        }
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet, SetError> {
        if self.geom != other.geom {
            return Err(SetError::SpecMismatch);
        }
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        let size = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PointSet {
            geom: Arc::clone(&self.geom),
            words,
            size,
        })
    }

    pub fn intersect(&self, other: &PointSet) -> Result<PointSet, SetError> {
        if self.geom != other.geom {
            return Err(SetError::SpecMismatch);
        }
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        let size = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PointSet {
            geom: Arc::clone(&self.geom),
            words,
            size,
        })
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(PointId((wi * 64) as u32 + b))
            })
        })
    }
}

/// Parses the canonical point-set text format, building the geometry from
/// the header.
pub fn read_pointset(text: &str) -> Result<PointSet, SetError> {
    let mut header: Option<(u64, u32, u32)> = None;
    let mut set: Option<PointSet> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| -> Result<u64, SetError> {
            s.parse().map_err(|_| SetError::ParseError {
                line: lineno,
                msg: format!("expected an integer, got {s:?}"),
            })
        };
        match (&header, &mut set) {
            (None, _) => {
                if fields.len() != 3 {
                    return Err(SetError::ParseError {
                        line: lineno,
                        msg: format!("header must be `p k n`, got {} fields", fields.len()),
                    });
                }
                let p = parse(fields[0])?;
                let k = parse(fields[1])?;
                let n = parse(fields[2])?;
                if k == 0 || n == 0 || k > u32::MAX as u64 || n > u32::MAX as u64 {
                    return Err(SetError::ParseError {
                        line: lineno,
                        msg: "header values must be positive".into(),
                    });
                }
                header = Some((p, k as u32, n as u32));
                let field = Field::new(p, k as u32)?;
                let geom = Geometry::new(field, n as u32)?;
                set = Some(PointSet::empty(Arc::new(geom)));
            }
            (Some((_, _, n)), Some(s)) => {
                if fields.len() != *n as usize {
                    return Err(SetError::ParseError {
                        line: lineno,
                        msg: format!("expected {n} coordinates, got {}", fields.len()),
                    });
                }
                let geom = Arc::clone(s.geometry());
                let q = geom.order();
                let mut coords = Vec::with_capacity(*n as usize);
                for f in &fields {
                    let v = parse(f)?;
                    if v >= q {
                        return Err(SetError::RangeError {
                            line: lineno,
                            value: v,
                            q,
                        });
                    }
                    coords.push(geom.field().elem(v));
                }
                let p = geom.point_at(&coords);
                if s.contains(p) {
                    return Err(SetError::DuplicatePoint { line: lineno });
                }
                s.set_bit(p);
            }
            _ => unreachable!(),
        }
    }
    set.ok_or(SetError::ParseError {
        line: 0,
        msg: "missing header line".into(),
    })
}

/// Emits the canonical text form: header, then points ascending by index.
pub fn write_pointset(set: &PointSet) -> String {
    let geom = set.geometry();
    let f = geom.field();
    let mut out = format!("{} {} {}\n", f.p(), f.k(), geom.dimension());
    for p in set.iter() {
        let coords = geom.coords_of(p);
        let row: Vec<String> = coords.iter().map(|c| c.index().to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ag(q: u64, n: u32) -> Arc<Geometry> {
        let (p, k) = crate::gf::factor_prime_power(q).unwrap();
        Arc::new(Geometry::new(Field::new(p, k).unwrap(), n).unwrap())
    }

    #[test]
    fn complement_and_partition() {
        let g = ag(3, 2);
        let full = PointSet::full(Arc::clone(&g));
        assert_eq!(full.size(), 9);
        assert_eq!(full.complement().size(), 0);

        let b = PointSet::from_points(Arc::clone(&g), [PointId(0), PointId(4)]);
        assert_eq!(b.size() + b.complement().size(), 9);
        assert_eq!(b.complement().complement(), b);
    }

    #[test]
    fn union_of_line_and_complement_is_full() {
        let g = ag(2, 2);
        let line = PointSet::from_points(
            Arc::clone(&g),
            g.line_points(crate::geometry::LineId(0)).to_vec(),
        );
        assert_eq!(line.size(), 2);
        let full = line.union(&line.complement()).unwrap();
        assert_eq!(full, PointSet::full(g));
    }

    #[test]
    fn spec_mismatch_detected() {
        let a = PointSet::empty(ag(2, 2));
        let b = PointSet::empty(ag(3, 2));
        assert!(matches!(a.union(&b), Err(SetError::SpecMismatch)));
    }

    #[test]
    fn read_basic_file() {
        let s = read_pointset("3 1 2\n0 0\n1 2\n").unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(s.geometry().order(), 3);
        assert!(s.contains(PointId(0)));
        // (1,2) packs to 1 + 2*3 = 7
        assert!(s.contains(PointId(7)));
    }

    #[test]
    fn read_extension_field_header() {
        let s = read_pointset("2 2 2\n3 3\n").unwrap();
        assert_eq!(s.geometry().order(), 4);
        assert_eq!(s.geometry().dimension(), 2);
        assert_eq!(s.size(), 1);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let s = read_pointset("# a comment\n\n2 1 2\n# another\n0 1\n\n").unwrap();
        assert_eq!(s.size(), 1);
    }

    #[test]
    fn parse_errors() {
        match read_pointset("3 1 2\n3 0\n") {
            Err(SetError::RangeError {
                line: 2,
                value: 3,
                q: 3,
            }) => {}
            other => panic!("expected RangeError, got {other:?}"),
        }
        assert!(matches!(
            read_pointset("3 1 2\n0 0\n0 0\n"),
            Err(SetError::DuplicatePoint { line: 3 })
        ));
        assert!(matches!(
            read_pointset("3 1\n"),
            Err(SetError::ParseError { line: 1, .. })
        ));
        assert!(matches!(
            read_pointset("4 1 2\n"),
            Err(SetError::Field(FieldError::NotPrime(4)))
        ));
        assert!(matches!(
            read_pointset(""),
            Err(SetError::ParseError { .. })
        ));
        assert!(matches!(
            read_pointset("2 1 2\nx y\n"),
            Err(SetError::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn write_is_canonical() {
        let g = ag(3, 2);
        let s = PointSet::from_points(Arc::clone(&g), [PointId(7), PointId(0)]);
        assert_eq!(write_pointset(&s), "3 1 2\n0 0\n1 2\n");
        let empty = PointSet::empty(g);
        assert_eq!(write_pointset(&empty), "3 1 2\n");
    }

    #[test]
    fn random_sets_match_reference_across_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for (q, n) in [(2u64, 2u32), (3, 2), (4, 2), (5, 2), (7, 2), (8, 2), (9, 2)] {
            let g = ag(q, n);
            let num = g.num_points() as u32;
            for _ in 0..100 {
                let reference: BTreeSet<u32> = (0..num).filter(|_| rng.gen_bool(0.4)).collect();
                let s =
                    PointSet::from_points(Arc::clone(&g), reference.iter().map(|&i| PointId(i)));
                assert_eq!(s.size(), reference.len());
                for i in 0..num {
                    assert_eq!(s.contains(PointId(i)), reference.contains(&i));
                }
                let comp: BTreeSet<u32> = (0..num).filter(|i| !reference.contains(i)).collect();
                assert_eq!(
                    s.complement().iter().map(|p| p.0).collect::<BTreeSet<_>>(),
                    comp
                );
            }
        }
    }

    proptest! {
        /// write . read . write == write, and read . write == id.
        #[test]
        fn round_trip_and_idempotence(raw in proptest::collection::btree_set(0u32..16, 0..10)) {
            let g = ag(4, 2);
            let s = PointSet::from_points(Arc::clone(&g), raw.iter().map(|&i| PointId(i)));
            let text = write_pointset(&s);
            let back = read_pointset(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(write_pointset(&back), text);
        }

        /// Set algebra agrees with a naive BTreeSet reference model.
        #[test]
        fn algebra_matches_reference(
            a in proptest::collection::btree_set(0u32..25, 0..20),
            b in proptest::collection::btree_set(0u32..25, 0..20),
        ) {
            let g = ag(5, 2);
            let sa = PointSet::from_points(Arc::clone(&g), a.iter().map(|&i| PointId(i)));
            let sb = PointSet::from_points(Arc::clone(&g), b.iter().map(|&i| PointId(i)));

            let union: BTreeSet<u32> = a.union(&b).cloned().collect();
            let inter: BTreeSet<u32> = a.intersection(&b).cloned().collect();
            let comp: BTreeSet<u32> = (0..25).filter(|i| !a.contains(i)).collect();

            prop_assert_eq!(sa.union(&sb).unwrap().iter().map(|p| p.0).collect::<BTreeSet<_>>(), union);
            prop_assert_eq!(sa.intersect(&sb).unwrap().iter().map(|p| p.0).collect::<BTreeSet<_>>(), inter);
            prop_assert_eq!(sa.complement().iter().map(|p| p.0).collect::<BTreeSet<_>>(), comp);
            prop_assert_eq!(sa.size(), a.len());
            for i in 0..25 {
                prop_assert_eq!(sa.contains(PointId(i)), a.contains(&i));
            }
        }
    }
}
