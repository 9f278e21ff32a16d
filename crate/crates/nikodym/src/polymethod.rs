//! The polynomial-method engine: monomial spaces in graded-lex order,
//! vanishing polynomials obtained from null spaces over F_q, restriction of
//! a multivariate polynomial to a line, and an executable replay of the
//! degree-(q-2) lower-bound argument for Nikodym sets.
//!
//! The replay follows the argument step by step on a concrete set B: when
//! |B| is below the monomial count C(n+q-2, n) it exhibits a nonzero
//! polynomial vanishing on B, finds a witness line per complement point,
//! and checks that each restriction would be forced to vanish identically.
//! On genuine inputs the walk always terminates early (bound already met,
//! or some point has no witness line); completing it would certify a
//! contradiction and is reported as an internal fault.

use crate::geometry::{Geometry, LineId, PointId};
use crate::gf::{Field, FieldElem};
use crate::sets::PointSet;
use crate::verify::{is_nikodym, NikodymOutcome, WitnessMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("binomial coefficient overflows u64")]
    Overflow,
    #[error("problem too large: {0}")]
    TooLarge(String),
}

/// Cap on evaluation-matrix entries for vanishing_poly.
const MATRIX_ENTRY_LIMIT: u64 = 1 << 26;

/// C(n+d, n), the number of monomials in n variables of degree at most d.
pub fn monomial_count(n: u32, d: u32) -> Result<u64, PolyError> {
    binomial(n as u64 + d as u64, n as u64)
}

/// The general lower bound on Nikodym sets in AG(n,q): C(n+q-2, n).
pub fn theorem1_bound(n: u32, q: u64) -> Result<u64, PolyError> {
    binomial(n as u64 + q - 2, n as u64)
}

/// The Kakeya lower bound in AG(n,q): C(n+q-1, n).
pub fn dvir_kakeya_bound(n: u32, q: u64) -> Result<u64, PolyError> {
    binomial(n as u64 + q - 1, n as u64)
}

fn binomial(n: u64, k: u64) -> Result<u64, PolyError> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(PolyError::Overflow)?;
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| PolyError::Overflow)
}

/// All exponent vectors of length n with sum <= d, in graded lexicographic
/// order: ascending total degree, then ascending lex on the exponents.
pub fn enumerate_monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut exps = vec![0u32; n];
        fill(&mut out, &mut exps, 0, deg);
    }
    return out;

    fn fill(out: &mut Vec<Vec<u32>>, exps: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos + 1 == exps.len() {
            exps[pos] = remaining;
            out.push(exps.clone());
            return;
        }
        for e in 0..=remaining {
            exps[pos] = e;
            fill(out, exps, pos + 1, remaining - e);
        }
        exps[pos] = 0;
    }
}

/// A dense matrix over F_q in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElem>,
}

impl FqMatrix {
    pub fn zero(rows: usize, cols: usize) -> FqMatrix {
        FqMatrix {
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }
}

/// Reduced row echelon form in place. Pivoting is deterministic: for each
/// column left to right, the topmost unprocessed row with a nonzero entry
/// becomes the pivot and is scaled to 1. Returns the pivot columns.
fn rref(field: &Field, m: &mut FqMatrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        let Some(pr) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
            continue;
        };
        if pr != row {
            for c in 0..m.cols {
                let tmp = m.at(row, c);
                m.set(row, c, m.at(pr, c));
                m.set(pr, c, tmp);
            }
        }
        let scale = field.inv(m.at(row, col)).expect("pivot is nonzero");
        for c in 0..m.cols {
            m.set(row, c, field.mul(m.at(row, c), scale));
        }
        for r in 0..m.rows {
            if r == row || m.at(r, col).is_zero() {
                continue;
            }
            let factor = m.at(r, col);
            for c in 0..m.cols {
                let v = field.sub(m.at(r, c), field.mul(factor, m.at(row, c)));
                m.set(r, c, v);
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.rows {
            break;
        }
    }
    pivots
}

/// A basis of the kernel of `m`, in standard free-variable form: one vector
/// per free column in ascending column order, with a 1 in the free position.
pub fn null_space(field: &Field, m: &FqMatrix) -> Vec<Vec<FieldElem>> {
    let mut r = m.clone();
    let pivots = rref(field, &mut r);
    let mut basis = Vec::with_capacity(m.cols - pivots.len());
    let mut pivot_iter = pivots.iter().copied().peekable();
    let mut free_cols = Vec::new();
    for col in 0..m.cols {
        if pivot_iter.peek() == Some(&col) {
            pivot_iter.next();
        } else {
            free_cols.push(col);
        }
    }
    for &f in &free_cols {
        let mut v = vec![FieldElem::ZERO; m.cols];
        v[f] = FieldElem::ONE;
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = field.neg(r.at(prow, f));
        }
        basis.push(v);
    }
    basis
}

/// A multivariate polynomial of total degree at most `degree_bound`, stored
/// densely against the graded-lex monomial enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    geom: Arc<Geometry>,
    degree_bound: u32,
    monomials: Vec<Vec<u32>>,
    coeffs: Vec<FieldElem>,
}

impl MultiPoly {
    pub fn new(geom: Arc<Geometry>, degree_bound: u32, coeffs: Vec<FieldElem>) -> MultiPoly {
        let monomials = enumerate_monomials(geom.dimension() as usize, degree_bound);
        assert_eq!(coeffs.len(), monomials.len());
        MultiPoly {
            geom,
            degree_bound,
            monomials,
            coeffs,
        }
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Total degree of the highest nonzero term, or None for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, _)| m.iter().sum())
            .max()
    }

    /// Evaluation via per-coordinate power tables, one table per call.
    pub fn evaluate(&self, p: PointId) -> FieldElem {
        let field = self.geom.field();
        let coords = self.geom.coords_of(p);
        let powers = coordinate_powers(field, &coords, self.degree_bound);
        let mut acc = FieldElem::ZERO;
        for (mono, &c) in self.monomials.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            acc = field.add(acc, field.mul(c, monomial_value(field, &powers, mono)));
        }
        acc
    }
}

/// powers[i][e] = coords[i]^e for e up to `degree`.
fn coordinate_powers(field: &Field, coords: &[FieldElem], degree: u32) -> Vec<Vec<FieldElem>> {
    coords
        .iter()
        .map(|&c| {
            let mut row = Vec::with_capacity(degree as usize + 1);
            row.push(FieldElem::ONE);
            for e in 1..=degree as usize {
                row.push(field.mul(row[e - 1], c));
            }
            row
        })
        .collect()
}

fn monomial_value(field: &Field, powers: &[Vec<FieldElem>], mono: &[u32]) -> FieldElem {
    let mut v = FieldElem::ONE;
    for (i, &e) in mono.iter().enumerate() {
        if e > 0 {
            v = field.mul(v, powers[i][e as usize]);
        }
    }
    v
}

/// A univariate polynomial over F_q, dense in the line parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<FieldElem>,
}

impl UniPoly {
    pub fn zero() -> UniPoly {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElem) -> UniPoly {
        if c.is_zero() {
            UniPoly::zero()
        } else {
            UniPoly { coeffs: vec![c] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map(|d| d as u32)
    }

    pub fn eval(&self, field: &Field, t: FieldElem) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, t), c);
        }
        acc
    }

    pub fn count_roots(&self, field: &Field) -> usize {
        field
            .elems()
            .filter(|&t| self.eval(field, t).is_zero())
            .count()
    }

    fn add_scaled(&mut self, field: &Field, other: &UniPoly, scale: FieldElem) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), FieldElem::ZERO);
        }
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = field.add(*a, field.mul(scale, b));
        }
    }

    fn mul(&self, field: &Field, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![FieldElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = field.add(coeffs[i + j], field.mul(a, b));
            }
        }
        UniPoly { coeffs }
    }

    fn pow(&self, field: &Field, e: u32) -> UniPoly {
        let mut acc = UniPoly::constant(FieldElem::ONE);
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }
}

/// A nonzero polynomial of degree <= d vanishing on all of `b`, when the
/// dimension count guarantees one (|B| < C(n+d,n)) or the evaluation matrix
/// happens to be rank deficient; None otherwise.
///
/// Deterministic: rows in ascending point index, columns in graded-lex
/// monomial order, first kernel basis vector of the canonical elimination.
pub fn vanishing_poly(b: &PointSet, d: u32) -> Result<Option<MultiPoly>, PolyError> {
    let geom = b.geometry();
    let field = geom.field();
    let n = geom.dimension() as usize;
    let cols = monomial_count(geom.dimension(), d)?;
    if cols.saturating_mul(b.size().max(1) as u64) > MATRIX_ENTRY_LIMIT {
        return Err(PolyError::TooLarge(format!(
            "evaluation matrix {} x {cols}",
            b.size()
        )));
    }
    let monomials = enumerate_monomials(n, d);
    let mut matrix = FqMatrix::zero(b.size(), cols as usize);
    for (r, p) in b.iter().enumerate() {
        let coords = geom.coords_of(p);
        let powers = coordinate_powers(field, &coords, d);
        for (c, mono) in monomials.iter().enumerate() {
            matrix.set(r, c, monomial_value(field, &powers, mono));
        }
    }
    let kernel = null_space(field, &matrix);
    Ok(kernel
        .into_iter()
        .next()
        .map(|coeffs| MultiPoly::new(Arc::clone(geom), d, coeffs)))
}

/// The restriction h(t) = g(base + t * rep) of `g` to a line, by symbolic
/// expansion of each monomial as a product of linear univariate factors.
pub fn restrict_to_line(g: &MultiPoly, line: LineId) -> UniPoly {
    let geom = g.geometry();
    let field = geom.field();
    let l = geom.line(line);
    let base = geom.coords_of(l.base);
    let rep = geom.direction_rep(l.dir);

    // linear factor per coordinate: base_i + rep_i * t
    let factors: Vec<UniPoly> = base
        .iter()
        .zip(rep)
        .map(|(&b, &r)| UniPoly { coeffs: vec![b, r] })
        .collect();

    let mut h = UniPoly::zero();
    for (mono, &c) in g.monomials().iter().zip(g.coeffs()) {
        if c.is_zero() {
            continue;
        }
        let mut term = UniPoly::constant(FieldElem::ONE);
        for (i, &e) in mono.iter().enumerate() {
            if e > 0 {
                term = term.mul(field, &factors[i].pow(field, e));
            }
        }
        h.add_scaled(field, &term, c);
    }
    h
}

/// Verdict for one complement point's restriction step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictionVerdict {
    /// The restriction has at least q-1 roots and is identically zero, so
    /// the polynomial also vanishes at the complement point itself.
    ZeroOnLine,
    /// A state the argument proves impossible; indicates a defect in this
    /// library, never in the input.
    InternalFault(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceConclusion {
    /// |B| already meets the C(n+q-2, n) bound; nothing to replay.
    BoundRespected,
    /// The constructive outcome for small sets: a complement point with no
    /// admissible line, i.e. B is not Nikodym.
    NotNikodymAt(PointId),
    /// Every step of the contradiction walk completed, which certifies an
    /// implementation fault: a nonzero polynomial of degree <= q-2 cannot
    /// vanish on all of F_q^n.
    TraceComplete,
}

/// The full replay ledger of the lower-bound argument on one input set.
#[derive(Debug, Clone)]
pub struct ProofTrace {
    pub set_size: usize,
    pub size_bound: u64,
    pub degree: u32,
    pub poly: Option<MultiPoly>,
    pub witnesses: WitnessMap,
    pub verdicts: Vec<(PointId, RestrictionVerdict)>,
    pub conclusion: TraceConclusion,
}

impl ProofTrace {
    pub fn has_fault(&self) -> bool {
        self.conclusion == TraceConclusion::TraceComplete
            || self
                .verdicts
                .iter()
                .any(|(_, v)| matches!(v, RestrictionVerdict::InternalFault(_)))
    }

    /// Human-readable report with stable field order.
    pub fn render(&self, geom: &Geometry) -> String {
        let mut out = String::new();
        let q = geom.order();
        out.push_str(&format!(
            "geometry: AG({}, {})\nset size: {}\nsize bound C(n+q-2, n): {}\nvanishing degree cap: {}\n",
            geom.dimension(),
            q,
            self.set_size,
            self.size_bound,
            self.degree,
        ));
        match &self.poly {
            Some(g) => {
                let terms = g.coeffs().iter().filter(|c| !c.is_zero()).count();
                out.push_str(&format!(
                    "vanishing polynomial: nonzero, {} terms, degree {}\n",
                    terms,
                    g.degree().unwrap_or(0)
                ));
            }
            None => out.push_str("vanishing polynomial: not constructed\n"),
        }
        out.push_str(&format!("witness lines: {}\n", self.witnesses.len()));
        for (x, v) in &self.verdicts {
            let line = self
                .witnesses
                .get(*x)
                .expect("verdict points carry witnesses");
            match v {
                RestrictionVerdict::ZeroOnLine => out.push_str(&format!(
                    "point {}: line {} restriction has >= {} roots, identically zero, so g vanishes there\n",
                    x.0,
                    line.0,
                    q - 1
                )),
                RestrictionVerdict::InternalFault(msg) => {
                    out.push_str(&format!("point {}: INTERNAL FAULT: {msg}\n", x.0))
                }
            }
        }
        match self.conclusion {
            TraceConclusion::BoundRespected => {
                out.push_str("conclusion: size bound respected, no polynomial needed\n")
            }
            TraceConclusion::NotNikodymAt(x) => out.push_str(&format!(
                "conclusion: set is not Nikodym, no admissible line at point {}\n",
                x.0
            )),
            TraceConclusion::TraceComplete => out.push_str(
                "conclusion: contradiction walk completed -- a nonzero polynomial of total \
                 degree <= q-2 (hence degree < q in each variable) would vanish at every \
                 point, which is impossible; this certifies a fault in the library\n",
            ),
        }
        out
    }
}

/// Replays the lower-bound argument on `b`.
pub fn proof_trace(b: &PointSet) -> Result<ProofTrace, PolyError> {
    let geom = b.geometry();
    let q = geom.order();
    let d = (q - 2) as u32;
    let size_bound = theorem1_bound(geom.dimension(), q)?;

    if b.size() as u64 >= size_bound {
        return Ok(ProofTrace {
            set_size: b.size(),
            size_bound,
            degree: d,
            poly: None,
            witnesses: WitnessMap::new(),
            verdicts: Vec::new(),
            conclusion: TraceConclusion::BoundRespected,
        });
    }

    let poly =
        vanishing_poly(b, d)?.expect("|B| below the monomial count guarantees a nontrivial kernel");
    assert!(
        !poly.is_zero(),
        "kernel vectors are nonzero by construction"
    );

    let witnesses = match is_nikodym(b) {
        NikodymOutcome::NotNikodym { point } => {
            return Ok(ProofTrace {
                set_size: b.size(),
                size_bound,
                degree: d,
                poly: Some(poly),
                witnesses: WitnessMap::new(),
                verdicts: Vec::new(),
                conclusion: TraceConclusion::NotNikodymAt(point),
            });
        }
        NikodymOutcome::Nikodym(w) => w,
    };

    // B is Nikodym and small: walk the contradiction. Unreachable for
    // genuine inputs; every step double-checks itself.
    let mut verdicts = Vec::with_capacity(witnesses.len());
    for (x, line) in witnesses.iter() {
        let h = restrict_to_line(&poly, line);
        let roots = h.count_roots(geom.field());
        let verdict = if roots < (q - 1) as usize {
            RestrictionVerdict::InternalFault(format!(
                "restriction to line {} has only {roots} roots although {} of its points lie in B",
                line.0,
                q - 1
            ))
        } else if !h.is_zero() {
            RestrictionVerdict::InternalFault(format!(
                "restriction to line {} is nonzero of degree <= {d} with {roots} >= q-1 roots",
                line.0
            ))
        } else if !poly.evaluate(x).is_zero() {
            RestrictionVerdict::InternalFault(format!(
                "restriction vanishes identically but g({}) != 0",
                x.0
            ))
        } else {
            RestrictionVerdict::ZeroOnLine
        };
        verdicts.push((x, verdict));
    }

    Ok(ProofTrace {
        set_size: b.size(),
        size_bound,
        degree: d,
        poly: Some(poly),
        witnesses,
        verdicts,
        conclusion: TraceConclusion::TraceComplete,
    })
}
