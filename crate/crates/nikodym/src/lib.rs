//! Exact computation with Nikodym and Kakeya sets in finite affine spaces
//! AG(n,q): property verification with explicit witnesses, an executable
//! replay of the polynomial-method lower bound, an instance-level audit of
//! the two-dimensional counting bound, and exact extremal search for minimal
//! examples, with a DIMACS CNF exporter for external SAT solvers.

pub mod bound2d;
pub mod geometry;
pub mod gf;
pub mod polymethod;
pub mod search;
pub mod sets;
pub mod verify;

pub use geometry::{DirectionId, GeomError, Geometry, Line, LineId, PointId};
pub use gf::{Field, FieldElem, FieldError};
pub use sets::{read_pointset, write_pointset, PointSet, SetError};
pub use verify::{
    is_kakeya, is_nikodym, verify_witnesses, KakeyaOutcome, NikodymOutcome, WitnessMap,
};
