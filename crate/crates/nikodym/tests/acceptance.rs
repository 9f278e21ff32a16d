//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible under `cargo test -- --nocapture`). Every tolerance is exact.

use nikodym::bound2d::{audit, nikodym_2d_lower_bound, Branch};
use nikodym::geometry::{Geometry, LineId, PointId};
use nikodym::gf::{factor_prime_power, Field};
use nikodym::polymethod::{
    enumerate_monomials, monomial_count, restrict_to_line, theorem1_bound, vanishing_poly,
    MultiPoly,
};
use nikodym::search::{
    brute_force_oracle, cnf, min_kakeya, min_nikodym, recorded_min_nikodym, SearchMode,
    SearchOptions,
};
use nikodym::sets::PointSet;
use nikodym::verify::{is_kakeya, is_nikodym, NikodymOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn ag(q: u64, n: u32) -> Arc<Geometry> {
    let (p, k) = factor_prime_power(q).unwrap();
    Arc::new(Geometry::new(Field::new(p, k).unwrap(), n).unwrap())
}

/// The standard grid: the 2D geometries of the experiments plus a line and
/// two 3-dimensional spaces.
fn grid() -> Vec<Arc<Geometry>> {
    let mut g: Vec<Arc<Geometry>> = [2u64, 3, 4, 5, 7, 8, 9].iter().map(|&q| ag(q, 2)).collect();
    g.push(ag(5, 1));
    g.push(ag(2, 3));
    g.push(ag(3, 3));
    g
}

fn report(criterion: &str, ok: bool) {
    println!(
        "acceptance {criterion}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {criterion} failed");
}

/// Criterion 1: for (n,q) in {(2,2),(2,3),(2,4)} the exact minimum Nikodym
/// size from brute force is >= C(n+q-2,n) = {1,3,6}, the optimized search
/// agrees exactly, and both match the recorded regression values.
#[test]
fn criterion_1_theorem1_consistency() {
    let mut ok = true;
    for (q, floor) in [(2u64, 1u64), (3, 3), (4, 6)] {
        let geom = ag(q, 2);
        let oracle = brute_force_oracle(&geom, SearchMode::MinNikodym).unwrap();
        let search = min_nikodym(&geom, &SearchOptions::default()).unwrap();
        let recorded = recorded_min_nikodym(q).unwrap();
        ok &= oracle.optimum as u64 >= floor;
        ok &= theorem1_bound(2, q).unwrap() == floor;
        ok &= search.optimum == oracle.optimum;
        ok &= search.proved_optimal && oracle.proved_optimal;
        ok &= oracle.optimum as u64 == recorded;
        ok &= is_nikodym(&oracle.witness).is_nikodym();
        ok &= is_nikodym(&search.witness).is_nikodym();
        ok &= search.witness.size() == search.optimum;
    }
    report(
        "criterion 1 (theorem1_bound consistency, exhaustive q=2..4)",
        ok,
    );
}

/// Criterion 2: the Kakeya search reproduces the sharp two-dimensional
/// values q(q+1)/2 for even q and q(q+1)/2 + (q-1)/2 for odd q.
#[test]
fn criterion_2_kakeya_sharpness() {
    let mut ok = true;
    for (q, expect) in [(2u64, 3usize), (3, 7), (4, 10), (5, 17)] {
        let geom = ag(q, 2);
        let r = min_kakeya(&geom, &SearchOptions::default()).unwrap();
        let formula = if q % 2 == 0 {
            q * (q + 1) / 2
        } else {
            q * (q + 1) / 2 + (q - 1) / 2
        } as usize;
        ok &= r.optimum == expect && formula == expect;
        ok &= r.proved_optimal;
        ok &= is_kakeya(&r.witness).is_kakeya();
        ok &= r.witness.size() == r.optimum;
    }
    report("criterion 2 (2D Kakeya sharpness q=2..5)", ok);
}

/// Criterion 3: the counting-bound audit accepts every verified Nikodym
/// instance in the corpus with no internal contradiction, and each instance
/// respects the closed-form bound.
#[test]
fn criterion_3_bound2d_audits() {
    let mut ok = true;
    let mut audited = 0usize;

    // complements of every single point
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let geom = ag(q, 2);
        for x in geom.points() {
            let b = PointSet::full(Arc::clone(&geom)).remove(x);
            let w = match is_nikodym(&b) {
                NikodymOutcome::Nikodym(w) => w,
                NikodymOutcome::NotNikodym { .. } => {
                    ok = false;
                    continue;
                }
            };
            match audit(&b, &w) {
                Ok(a) => {
                    ok &= a.holds;
                    ok &= b.size() as u64 >= nikodym_2d_lower_bound(q);
                    audited += 1;
                }
                Err(e) => {
                    println!("audit error on single-point complement q={q}: {e}");
                    ok = false;
                }
            }
        }
    }

    // every search witness
    for q in [2u64, 3, 4, 5] {
        let geom = ag(q, 2);
        let r = min_nikodym(&geom, &SearchOptions::default()).unwrap();
        let w = match is_nikodym(&r.witness) {
            NikodymOutcome::Nikodym(w) => w,
            NikodymOutcome::NotNikodym { .. } => {
                ok = false;
                continue;
            }
        };
        match audit(&r.witness, &w) {
            Ok(a) => {
                ok &= a.holds;
                ok &= r.witness.size() as u64 >= nikodym_2d_lower_bound(q);
                audited += 1;
            }
            Err(e) => {
                println!("audit error on search witness q={q}: {e}");
                ok = false;
            }
        }
    }

    ok &= audited > 200; // 4+9+16+25+49+64+81 single points plus 4 witnesses
    report("criterion 3 (counting-bound audits over the corpus)", ok);
}

/// Criterion 4: the two lower bounds cross over; theorem1_bound dominates for
/// q <= 5 and the counting bound for q in {7,8,9}, with the recorded pair
/// 36 < 39 at q = 9.
#[test]
fn criterion_4_bound_crossover() {
    let mut ok = true;
    for q in [2u64, 3, 4, 5] {
        ok &= theorem1_bound(2, q).unwrap() >= nikodym_2d_lower_bound(q);
    }
    for q in [7u64, 8, 9] {
        ok &= nikodym_2d_lower_bound(q) > theorem1_bound(2, q).unwrap();
    }
    ok &= theorem1_bound(2, 9).unwrap() == 36;
    ok &= nikodym_2d_lower_bound(9) == 39;
    report("criterion 4 (bound crossover, theorem1(2,9)=36 < 39)", ok);
}

/// Criterion 5: polynomial-method properties. (a) 200 random sets per
/// geometry below the monomial count admit verified nonzero vanishing
/// polynomials; (b) line restriction agrees with pointwise evaluation on 50
/// random pairs per geometry; (c) no nonzero polynomial of degree <= q-2
/// vanishes everywhere, 100 random polynomials per geometry with q^n <= 81.
#[test]
fn criterion_5_polymethod_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260810);
    let mut ok = true;

    for geom in grid() {
        let q = geom.order();
        let n = geom.dimension();
        let field = geom.field();

        // (a) vanishing polynomials on random small sets
        for _ in 0..200 {
            let d = rng.gen_range(0..=(q - 2)) as u32;
            let cap = monomial_count(n, d).unwrap() as usize;
            let want = rng.gen_range(0..cap.min(geom.num_points() + 1));
            let mut b = PointSet::empty(Arc::clone(&geom));
            while b.size() < want {
                b = b.insert(PointId(rng.gen_range(0..geom.num_points() as u32)));
            }
            match vanishing_poly(&b, d) {
                Ok(Some(g)) => {
                    ok &= !g.is_zero();
                    ok &= b.iter().all(|x| g.evaluate(x).is_zero());
                }
                _ => ok = false,
            }
        }

        // (b) restriction to a line vs pointwise evaluation
        let d = (q - 2).min(3) as u32;
        let monos = enumerate_monomials(n as usize, d);
        for _ in 0..50 {
            let coeffs: Vec<_> = (0..monos.len())
                .map(|_| field.elem(rng.gen_range(0..q)))
                .collect();
            let g = MultiPoly::new(Arc::clone(&geom), d, coeffs);
            let line = LineId(rng.gen_range(0..geom.num_lines() as u32));
            let h = restrict_to_line(&g, line);
            for (t, &pt) in geom.line_points(line).iter().enumerate() {
                ok &= h.eval(field, field.elem(t as u64)) == g.evaluate(pt);
            }
        }

        // (c) nonzero degree <= q-2 polynomials have a nonzero value
        if geom.num_points() <= 81 {
            let d = (q - 2) as u32;
            let monos = enumerate_monomials(n as usize, d);
            for _ in 0..100 {
                let mut coeffs: Vec<_> = (0..monos.len())
                    .map(|_| field.elem(rng.gen_range(0..q)))
                    .collect();
                if coeffs.iter().all(|c| c.is_zero()) {
                    coeffs[rng.gen_range(0..monos.len())] = field.elem(1);
                }
                let g = MultiPoly::new(Arc::clone(&geom), d, coeffs);
                ok &= geom.points().any(|p| !g.evaluate(p).is_zero());
            }
        }
    }
    report(
        "criterion 5 (polynomial-method properties, zero failures)",
        ok,
    );
}

/// Criterion 6: structural identities on every grid geometry, exactly.
#[test]
fn criterion_6_structural_identities() {
    let mut ok = true;
    for geom in grid() {
        let q = geom.order();
        let n = geom.dimension();
        let points = (q as u128).pow(n) as usize;
        let dirs = (points - 1) / (q as usize - 1);
        ok &= geom.num_points() == points;
        ok &= geom.num_directions() == dirs;
        ok &= geom.num_lines() == points / q as usize * dirs;
        ok &= geom.lines_per_point() == dirs;

        // every unordered pair of distinct points on exactly one line
        let mut pair_count = vec![0u8; points * points];
        for l in geom.line_ids() {
            let pts = geom.line_points(l);
            ok &= pts.len() == q as usize;
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    let (lo, hi) = (a.index().min(b.index()), a.index().max(b.index()));
                    pair_count[lo * points + hi] += 1;
                }
            }
        }
        for a in 0..points {
            for b in 0..points {
                let expect = u8::from(a < b);
                ok &= pair_count[a * points + b] == expect;
            }
        }
    }

    // field axioms, exhaustively over the grid orders
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let (p, k) = factor_prime_power(q).unwrap();
        let f = Field::new(p, k).unwrap();
        let elems: Vec<_> = f.elems().collect();
        for &a in &elems {
            ok &= f.add(a, f.neg(a)).is_zero();
            if !a.is_zero() {
                ok &= f.mul(a, f.inv(a).unwrap()).index() == 1;
            }
            for &b in &elems {
                ok &= f.add(a, b) == f.add(b, a);
                ok &= f.mul(a, b) == f.mul(b, a);
                for &c in &elems {
                    ok &= f.add(f.add(a, b), c) == f.add(a, f.add(b, c));
                    ok &= f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c));
                    ok &= f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c));
                }
            }
        }
    }
    report("criterion 6 (structural identities, exact)", ok);
}

/// Criterion 7: external-solver cross-check of the CNF export around the
/// known optima, skipped automatically when no solver is configured
/// (set NIKODYM_SAT_SOLVER or install one of the usual suspects).
#[test]
fn criterion_7_cnf_cross_check() {
    let Some(solver) = find_solver() else {
        println!(
            "acceptance criterion 7 (CNF cross-check): SKIP (no external SAT solver configured)"
        );
        return;
    };

    let mut ok = true;
    // (q, mode, k, expected satisfiable)
    let cases = [
        // minimum Nikodym size 1 in AG(2,2): complements of size 3 exist, 4 do not
        (2u64, SearchMode::MinNikodym, 3usize, true),
        (2, SearchMode::MinNikodym, 4, false),
        // minimum 4 in AG(2,3): complements of size 5 exist, 6 do not
        (3, SearchMode::MinNikodym, 5, true),
        (3, SearchMode::MinNikodym, 6, false),
        // Kakeya minima 3 and 7
        (2, SearchMode::MinKakeya, 3, true),
        (2, SearchMode::MinKakeya, 2, false),
        (3, SearchMode::MinKakeya, 7, true),
        (3, SearchMode::MinKakeya, 6, false),
    ];
    for (q, mode, k, expect_sat) in cases {
        let geom = ag(q, 2);
        let text = cnf::export_cnf(&geom, mode, k).unwrap();
        match run_solver(&solver, &text) {
            Some((sat, assignment)) => {
                ok &= sat == expect_sat;
                if sat {
                    let decoded = cnf::decode_solution(&text, &assignment).unwrap();
                    match mode {
                        SearchMode::MinNikodym => {
                            ok &= decoded.size() >= k;
                            ok &= is_nikodym(&decoded.complement()).is_nikodym();
                        }
                        SearchMode::MinKakeya => {
                            ok &= decoded.size() <= k;
                            ok &= is_kakeya(&decoded).is_kakeya();
                        }
                    }
                }
            }
            None => {
                println!("solver run failed on q={q} k={k}");
                ok = false;
            }
        }
    }
    report("criterion 7 (CNF cross-check via external solver)", ok);
}

fn find_solver() -> Option<String> {
    if let Ok(s) = std::env::var("NIKODYM_SAT_SOLVER") {
        if !s.is_empty() {
            return Some(s);
        }
    }
    for cand in ["minisat", "cadical", "kissat", "cryptominisat5", "glucose"] {
        let found = std::process::Command::new("which")
            .arg(cand)
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false);
        if found {
            return Some(cand.to_string());
        }
    }
    None
}

/// Runs a DIMACS solver, returning (satisfiable, v-line text). Handles both
/// the minisat calling convention (input output paths) and the standard
/// stdin/stdout one.
fn run_solver(solver: &str, cnf_text: &str) -> Option<(bool, String)> {
    let dir = std::env::temp_dir();
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap()
        .as_nanos();
    let in_path = dir.join(format!("nikodym-{stamp}.cnf"));
    std::fs::write(&in_path, cnf_text).ok()?;

    let output = if solver.contains("minisat") {
        let out_path = dir.join(format!("nikodym-{stamp}.out"));
        let st = std::process::Command::new(solver)
            .arg(&in_path)
            .arg(&out_path)
            .output()
            .ok()?;
        // minisat: exit 10 SAT, 20 UNSAT; the model file holds raw literals
        let code = st.status.code()?;
        let model = std::fs::read_to_string(&out_path).unwrap_or_default();
        let _ = std::fs::remove_file(&out_path);
        let sat = code == 10 || model.starts_with("SAT");
        let lits = model
            .lines()
            .filter(|l| !l.starts_with("SAT") && !l.starts_with("UNSAT"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = std::fs::remove_file(&in_path);
        return Some((sat, format!("v {lits} 0\n")));
    } else {
        std::process::Command::new(solver)
            .arg(&in_path)
            .stdout(std::process::Stdio::piped())
            .output()
            .ok()?
    };
    let _ = std::fs::remove_file(&in_path);
    let text = String::from_utf8_lossy(&output.stdout).to_string();
    let sat = text.lines().any(|l| l.trim() == "s SATISFIABLE");
    let unsat = text.lines().any(|l| l.trim() == "s UNSATISFIABLE");
    if !sat && !unsat {
        return None;
    }
    let vlines: String = text
        .lines()
        .filter(|l| l.starts_with('v'))
        .map(|l| format!("{l}\n"))
        .collect();
    Some((sat, vlines))
}

/// Encoder validation that runs regardless of external tooling: a small
/// test-only DPLL decides the exported instances around the known optima
/// and its models decode to verified sets.
#[test]
fn cnf_encoding_semantics_via_test_dpll() {
    let cases = [
        (2u64, SearchMode::MinNikodym, 3usize, true),
        (2, SearchMode::MinNikodym, 4, false),
        (3, SearchMode::MinNikodym, 5, true),
        (3, SearchMode::MinNikodym, 6, false),
        (2, SearchMode::MinKakeya, 3, true),
        (2, SearchMode::MinKakeya, 2, false),
        (3, SearchMode::MinKakeya, 7, true),
        (3, SearchMode::MinKakeya, 6, false),
    ];
    for (q, mode, k, expect_sat) in cases {
        let geom = ag(q, 2);
        let text = cnf::export_cnf(&geom, mode, k).unwrap();
        let (num_vars, clauses) = parse_dimacs(&text);
        let model = dpll(num_vars, &clauses);
        assert_eq!(
            model.is_some(),
            expect_sat,
            "q={q} mode={mode:?} k={k}: encoding disagrees with the known optimum"
        );
        if let Some(m) = model {
            let vtext = format!(
                "v {} 0\n",
                (1..=num_vars)
                    .map(|v| if m[v] { v as i64 } else { -(v as i64) }.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            let decoded = cnf::decode_solution(&text, &vtext).unwrap();
            match mode {
                SearchMode::MinNikodym => {
                    assert!(decoded.size() >= k);
                    assert!(is_nikodym(&decoded.complement()).is_nikodym());
                }
                SearchMode::MinKakeya => {
                    assert!(decoded.size() <= k);
                    assert!(is_kakeya(&decoded).is_kakeya());
                }
            }
        }
    }
}

fn parse_dimacs(text: &str) -> (usize, Vec<Vec<i64>>) {
    let mut num_vars = 0;
    let mut clauses = Vec::new();
    for line in text.lines() {
        if line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            num_vars = rest.split_whitespace().next().unwrap().parse().unwrap();
            continue;
        }
        let lits: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .take_while(|&l| l != 0)
            .collect();
        if !lits.is_empty() {
            clauses.push(lits);
        }
    }
    (num_vars, clauses)
}

/// Plain DPLL with unit propagation; adequate for the desk-scale instances
/// exercised here. Test oracle only.
fn dpll(num_vars: usize, clauses: &[Vec<i64>]) -> Option<Vec<bool>> {
    let mut assign: Vec<Option<bool>> = vec![None; num_vars + 1];
    fn solve(clauses: &[Vec<i64>], assign: &mut Vec<Option<bool>>) -> bool {
        // unit propagation to fixpoint
        let mut trail: Vec<usize> = Vec::new();
        loop {
            let mut unit: Option<i64> = None;
            for c in clauses {
                let mut unassigned = None;
                let mut count = 0;
                let mut satisfied = false;
                for &l in c {
                    match assign[l.unsigned_abs() as usize] {
                        Some(v) if v == (l > 0) => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            unassigned = Some(l);
                            count += 1;
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match count {
                    0 => {
                        for &v in &trail {
                            assign[v] = None;
                        }
                        return false;
                    }
                    1 => {
                        unit = unassigned;
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(l) => {
                    let var = l.unsigned_abs() as usize;
                    assign[var] = Some(l > 0);
                    trail.push(var);
                }
                None => break,
            }
        }
        let Some(var) = (1..assign.len()).find(|&v| assign[v].is_none()) else {
            return true; // no unsatisfied clause and nothing unassigned
        };
        for value in [true, false] {
            assign[var] = Some(value);
            if solve(clauses, assign) {
                return true;
            }
            assign[var] = None;
        }
        for &v in &trail {
            assign[v] = None;
        }
        false
    }
    if solve(clauses, &mut assign) {
        Some(
            std::iter::once(false)
                .chain(assign[1..].iter().map(|v| v.unwrap_or(false)))
                .collect(),
        )
    } else {
        None
    }
}

/// The q = 5 exhaustive optimum is part of the recorded corpus; prove it
/// fresh (branch and bound, translations) and audit the witness.
#[test]
fn recorded_q5_optimum_reproduced() {
    let geom = ag(5, 2);
    let r = min_nikodym(&geom, &SearchOptions::default()).unwrap();
    assert!(r.proved_optimal);
    assert_eq!(r.optimum as u64, recorded_min_nikodym(5).unwrap());
    let w = match is_nikodym(&r.witness) {
        NikodymOutcome::Nikodym(w) => w,
        other => panic!("{other:?}"),
    };
    let a = audit(&r.witness, &w).unwrap();
    assert!(a.holds);
    assert_eq!(a.branch, Branch::SmallComplement);
}
