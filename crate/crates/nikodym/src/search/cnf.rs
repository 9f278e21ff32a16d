//! DIMACS CNF export of the extremal questions, and decoding of solver
//! assignments back into point sets.
//!
//! MinNikodym at target k asks: is there a complement set S of size >= k in
//! which every member owns a private line? Variables are one membership
//! literal s_x per point, one auxiliary y_{x,L} per incident (point, line)
//! pair meaning "L is x's private line", and a sequential-counter register
//! block for the cardinality constraint. MinKakeya at target k asks: is
//! there a Kakeya set of size <= k? There the auxiliary block has one
//! literal per line ("this line is fully inside the set").
//!
//! The header comments pin the variable numbering so assignments from any
//! solver can be decoded; the geometry is rebuilt from the recorded field
//! parameters, and the canonical construction makes the mapping exact.

use super::SearchMode;
use crate::geometry::{Geometry, PointId};
use crate::gf::Field;
use crate::sets::PointSet;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnfError {
    #[error("encoding too large: {0}")]
    TooLarge(String),
    #[error("the encoder applies to AG(2,q) only")]
    NotTwoDimensional,
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("assignment is inconsistent: {0}")]
    InconsistentAssignment(String),
}

const VAR_LIMIT: usize = 1 << 22;

struct Numbering {
    n_points: usize,
    lines_per_point: usize,
    num_lines: usize,
    mode: SearchMode,
    target: usize,
}

impl Numbering {
    fn new(geom: &Geometry, mode: SearchMode, target: usize) -> Numbering {
        Numbering {
            n_points: geom.num_points(),
            lines_per_point: geom.lines_per_point(),
            num_lines: geom.num_lines(),
            mode,
            target,
        }
    }

    fn s_var(&self, x: usize) -> i64 {
        (x + 1) as i64
    }

    /// MinNikodym: y_{x,j} for the j-th line through x in canonical order.
    fn y_var(&self, x: usize, j: usize) -> i64 {
        (self.n_points + x * self.lines_per_point + j + 1) as i64
    }

    /// MinKakeya: the per-line containment literal.
    fn line_var(&self, line: usize) -> i64 {
        (self.n_points + line + 1) as i64
    }

    fn aux_end(&self) -> usize {
        match self.mode {
            SearchMode::MinNikodym => self.n_points + self.n_points * self.lines_per_point,
            SearchMode::MinKakeya => self.n_points + self.num_lines,
        }
    }

    /// Counter register (i, j), 1-based on both axes.
    fn ctr_var(&self, i: usize, j: usize) -> i64 {
        (self.aux_end() + (i - 1) * self.counter_width() + j) as i64
    }

    fn counter_width(&self) -> usize {
        self.target
    }

    fn counter_rows(&self) -> usize {
        match self.mode {
            SearchMode::MinNikodym => self.n_points,
            // the Sinz at-most counter uses registers for the first N-1 inputs
            SearchMode::MinKakeya => self.n_points.saturating_sub(1),
        }
    }

    fn total_vars(&self) -> usize {
        let ctr = if self.needs_counter() {
            self.counter_rows() * self.counter_width()
        } else {
            0
        };
        self.aux_end() + ctr
    }

    fn needs_counter(&self) -> bool {
        match self.mode {
            // at-least-0 is vacuous
            SearchMode::MinNikodym => self.target >= 1,
            // at-most-k with k >= N is vacuous; at-most-0 is pure units
            SearchMode::MinKakeya => self.target >= 1 && self.target < self.n_points,
        }
    }
}

/// "At least `target` of the s literals are true", one-directional
/// sequential counter: u_{i,j} reads "at least j of the first i inputs".
fn at_least_clauses(num: &Numbering, clauses: &mut Vec<Vec<i64>>) {
    let k = num.target;
    if k == 0 {
        return;
    }
    let n = num.n_points;
    for i in 1..=n {
        for j in 1..=k {
            // u_{i,j} -> u_{i-1,j} \/ u_{i-1,j-1}; the j = 1 instance is a
            // tautology (u_{i,0} is TRUE) and u_{0,*} literals are FALSE
            if j >= 2 {
                let mut c = vec![-num.ctr_var(i, j)];
                if i >= 2 {
                    c.push(num.ctr_var(i - 1, j));
                    c.push(num.ctr_var(i - 1, j - 1));
                }
                clauses.push(c);
            }
            // u_{i,j} -> u_{i-1,j} \/ x_i
            let mut c = vec![-num.ctr_var(i, j)];
            if i >= 2 {
                c.push(num.ctr_var(i - 1, j));
            }
            c.push(num.s_var(i - 1));
            clauses.push(c);
        }
    }
    clauses.push(vec![num.ctr_var(n, k)]);
}

/// "At most `target` of the s literals are true", the Sinz sequential
/// counter.
fn at_most_clauses(num: &Numbering, clauses: &mut Vec<Vec<i64>>) {
    let k = num.target;
    let n = num.n_points;
    if k >= n {
        return;
    }
    if k == 0 {
        for x in 0..n {
            clauses.push(vec![-num.s_var(x)]);
        }
        return;
    }
    clauses.push(vec![-num.s_var(0), num.ctr_var(1, 1)]);
    for j in 2..=k {
        clauses.push(vec![-num.ctr_var(1, j)]);
    }
    for i in 2..n {
        clauses.push(vec![-num.s_var(i - 1), num.ctr_var(i, 1)]);
        clauses.push(vec![-num.ctr_var(i - 1, 1), num.ctr_var(i, 1)]);
        for j in 2..=k {
            clauses.push(vec![
                -num.s_var(i - 1),
                -num.ctr_var(i - 1, j - 1),
                num.ctr_var(i, j),
            ]);
            clauses.push(vec![-num.ctr_var(i - 1, j), num.ctr_var(i, j)]);
        }
        clauses.push(vec![-num.s_var(i - 1), -num.ctr_var(i - 1, k)]);
    }
    clauses.push(vec![-num.s_var(n - 1), -num.ctr_var(n - 1, k)]);
}

fn mode_name(mode: SearchMode) -> &'static str {
    match mode {
        SearchMode::MinNikodym => "min-nikodym",
        SearchMode::MinKakeya => "min-kakeya",
    }
}

/// Encodes the extremal question over AG(2,q) at the given target size as
/// DIMACS CNF text. Bit-exact: fixed header comments, `p cnf V C`, one
/// clause per line.
pub fn export_cnf(
    geom: &Arc<Geometry>,
    mode: SearchMode,
    target: usize,
) -> Result<String, CnfError> {
    if geom.dimension() != 2 {
        return Err(CnfError::NotTwoDimensional);
    }
    let num = Numbering::new(geom, mode, target);
    if num.total_vars() > VAR_LIMIT {
        return Err(CnfError::TooLarge(format!(
            "{} variables",
            num.total_vars()
        )));
    }

    let mut clauses: Vec<Vec<i64>> = Vec::new();
    match mode {
        SearchMode::MinNikodym => {
            for x in 0..num.n_points {
                let mut c = vec![-num.s_var(x)];
                for j in 0..num.lines_per_point {
                    c.push(num.y_var(x, j));
                }
                clauses.push(c);
            }
            for x in 0..num.n_points {
                for (j, &l) in geom.lines_through(PointId(x as u32)).iter().enumerate() {
                    for z in geom.line_points(l) {
                        if z.index() != x {
                            clauses.push(vec![-num.y_var(x, j), -num.s_var(z.index())]);
                        }
                    }
                }
            }
            at_least_clauses(&num, &mut clauses);
        }
        SearchMode::MinKakeya => {
            for d in geom.directions() {
                let c: Vec<i64> = geom
                    .lines_of_direction(d)
                    .map(|l| num.line_var(l.index()))
                    .collect();
                clauses.push(c);
            }
            for l in geom.line_ids() {
                for x in geom.line_points(l) {
                    clauses.push(vec![-num.line_var(l.index()), num.s_var(x.index())]);
                }
            }
            at_most_clauses(&num, &mut clauses);
        }
    }

    let f = geom.field();
    let mut out = String::new();
    writeln!(out, "c nikodym-cnf v1").unwrap();
    writeln!(
        out,
        "c mode={} p={} k={} n={} q={} target={}",
        mode_name(mode),
        f.p(),
        f.k(),
        geom.dimension(),
        f.order(),
        target
    )
    .unwrap();
    writeln!(out, "c svars 1 {}", num.n_points).unwrap();
    writeln!(out, "c auxvars {} {}", num.n_points + 1, num.aux_end()).unwrap();
    if num.total_vars() > num.aux_end() {
        writeln!(out, "c ctrvars {} {}", num.aux_end() + 1, num.total_vars()).unwrap();
    }
    writeln!(out, "p cnf {} {}", num.total_vars(), clauses.len()).unwrap();
    for c in &clauses {
        for lit in c {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    Ok(out)
}

struct Header {
    mode: SearchMode,
    p: u64,
    k: u32,
    n: u32,
    target: usize,
}

fn parse_header(cnf_text: &str) -> Result<Header, CnfError> {
    for (lineno, line) in cnf_text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("c mode=") {
            let mut mode = None;
            let mut p = None;
            let mut k = None;
            let mut n = None;
            let mut target = None;
            let full = format!("mode={rest}");
            for tok in full.split_whitespace() {
                let Some((key, val)) = tok.split_once('=') else {
                    continue;
                };
                match key {
                    "mode" => {
                        mode = match val {
                            "min-nikodym" => Some(SearchMode::MinNikodym),
                            "min-kakeya" => Some(SearchMode::MinKakeya),
                            _ => None,
                        }
                    }
                    "p" => p = val.parse().ok(),
                    "k" => k = val.parse().ok(),
                    "n" => n = val.parse().ok(),
                    "target" => target = val.parse().ok(),
                    _ => {}
                }
            }
            return match (mode, p, k, n, target) {
                (Some(mode), Some(p), Some(k), Some(n), Some(target)) => Ok(Header {
                    mode,
                    p,
                    k,
                    n,
                    target,
                }),
                _ => Err(CnfError::ParseError {
                    line: lineno + 1,
                    msg: "incomplete mode header".into(),
                }),
            };
        }
    }
    Err(CnfError::ParseError {
        line: 0,
        msg: "missing `c mode=...` header".into(),
    })
}

/// Parses solver output ("v" lines of signed literals, zero-terminated)
/// into a variable assignment. Unlisted variables read as false.
fn parse_assignment(text: &str, num_vars: usize) -> Result<Vec<bool>, CnfError> {
    let mut assign = vec![false; num_vars + 1];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let Some(rest) = line.strip_prefix('v') else {
            continue;
        };
        for tok in rest.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| CnfError::ParseError {
                line: lineno + 1,
                msg: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                continue;
            }
            let var = lit.unsigned_abs() as usize;
            if var > num_vars {
                return Err(CnfError::ParseError {
                    line: lineno + 1,
                    msg: format!("literal {lit} outside the variable range 1..={num_vars}"),
                });
            }
            assign[var] = lit > 0;
        }
    }
    Ok(assign)
}

/// Decodes a solver assignment against the CNF header: the returned set is
/// the positively assigned membership block. The auxiliary block is checked
/// for consistency (a private-line literal must not be blocked; a chosen
/// line must be fully inside the set).
pub fn decode_solution(cnf_text: &str, assignment_text: &str) -> Result<PointSet, CnfError> {
    let header = parse_header(cnf_text)?;
    let field = Field::new(header.p, header.k).map_err(|e| CnfError::ParseError {
        line: 0,
        msg: format!("header field parameters: {e}"),
    })?;
    let geom = Arc::new(
        Geometry::new(field, header.n).map_err(|e| CnfError::ParseError {
            line: 0,
            msg: format!("header geometry parameters: {e}"),
        })?,
    );
    if geom.dimension() != 2 {
        return Err(CnfError::NotTwoDimensional);
    }
    let num = Numbering::new(&geom, header.mode, header.target);
    let assign = parse_assignment(assignment_text, num.total_vars())?;

    let member = |x: usize| assign[num.s_var(x) as usize];
    match header.mode {
        SearchMode::MinNikodym => {
            for x in 0..num.n_points {
                for (j, &l) in geom.lines_through(PointId(x as u32)).iter().enumerate() {
                    if !assign[num.y_var(x, j) as usize] {
                        continue;
                    }
                    if let Some(z) = geom
                        .line_points(l)
                        .iter()
                        .find(|z| z.index() != x && member(z.index()))
                    {
                        return Err(CnfError::InconsistentAssignment(format!(
                            "y({x},{j}) claims line {} private for {x} but member {} sits on it",
                            l.0,
                            z.index()
                        )));
                    }
                }
            }
        }
        SearchMode::MinKakeya => {
            for l in geom.line_ids() {
                if !assign[num.line_var(l.index()) as usize] {
                    continue;
                }
                if let Some(x) = geom.line_points(l).iter().find(|x| !member(x.index())) {
                    return Err(CnfError::InconsistentAssignment(format!(
                        "line {} is marked contained but point {} is not a member",
                        l.0,
                        x.index()
                    )));
                }
            }
        }
    }

    Ok(PointSet::from_points(
        Arc::clone(&geom),
        (0..num.n_points)
            .filter(|&x| member(x))
            .map(|x| PointId(x as u32)),
    ))
}
