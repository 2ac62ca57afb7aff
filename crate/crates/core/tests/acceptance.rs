//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the output.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use dsp_core::class::{ClassSet, ClassSpec, Mode};
use dsp_core::criteria::{check_alpha, dsp_verdict, weak_dsp_verdict, Status};
use dsp_core::deform::{canned_jnf_coarsen, canned_split_eigenvalues, first_order_deform, jordan_frame, DeformationRequest};
use dsp_core::ext::{deform_to_irreducible, ext_report, extension_space_basis, RepresentationPair};
use dsp_core::gauge::{procedure_lk, shift_walk, FuchsianSystem};
use dsp_core::genericity::{is_generic, EigenvalueSystem};
use dsp_core::poly::char_poly;
use dsp_core::eigen::eigen_data;
use dsp_core::random::{random_matrix, random_tuple, random_unimodular, rng, DspRng, Layout};
use dsp_core::solver::{solve_weak_dsp, SolveOptions};
use dsp_core::tuple::{
    centralizer, class_membership, commutator_map_rank, is_irreducible, satisfies_constraint, tangent_dimension,
    MatrixTuple,
};
use dsp_core::{DspError, JordanNormalForm, Matrix, Scalar};

/// Largest matrix size in the exhaustive JNF sweeps.
const JNF_MAX_N: usize = 5;
const CENTRALIZER_TUPLES: usize = 240;
const XI_INSTANCES: usize = 120;
const PROCEDURE_SYSTEMS: usize = 50;
const WALKS: usize = 20;
const WALK_BOUND: i64 = 3;
const VERDICT_SETS: usize = 500;
const IRREDUCIBLE_INSTANCES: usize = 10;
const IRREDUCIBLE_ROUNDS: usize = 200;
/// `max/min` of `residual(ε)/ε²` over `ε = 2⁻³ … 2⁻¹⁰`.
const SCALING_BAND: f64 = 4.0;

type Check = Result<String, String>;

fn q(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn qf(p: i64, d: i64) -> Scalar {
    Scalar::from_frac(p, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Oracles built from plain linear algebra.

/// `dim {X : MX = XM}` from the `n² × n²` matrix of `X ↦ MX − XM`.
fn commutant_dim(m: &Matrix) -> usize {
    let n = m.rows();
    let cols: Vec<Vec<Scalar>> = (0..n * n)
        .map(|c| Matrix::commutator(m, &Matrix::unit(n, n, c / n, c % n)).to_vector())
        .collect();
    n * n - Matrix::from_columns(n * n, &cols).rank()
}

fn orbit_dim(m: &Matrix) -> usize {
    m.rows() * m.rows() - commutant_dim(m)
}

fn shifted(m: &Matrix, lambda: &Scalar) -> Matrix {
    m - &Matrix::scalar(m.rows(), lambda.clone())
}

/// Block upper-triangular with `a`, `b` on the diagonal and zero corner.
fn direct_sum(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::block_diag(&[a.clone(), b.clone()])
}

/// Determinant of the Sylvester matrix of `p` and `p'`.
fn discriminant_like(m: &Matrix) -> Scalar {
    let p = char_poly(m).coeffs().to_vec();
    let dp: Vec<Scalar> = (1..p.len()).map(|i| &p[i] * &q(i as i64)).collect();
    let (a, b) = (p.len() - 1, dp.len() - 1);
    let size = a + b;
    let mut s = Matrix::zeros(size, size);
    for r in 0..b {
        for (i, c) in p.iter().rev().enumerate() {
            s.set(r, r + i, c.clone());
        }
    }
    for r in 0..a {
        for (i, c) in dp.iter().rev().enumerate() {
            s.set(b + r, r + i, c.clone());
        }
    }
    s.determinant()
}

/// Similarity check for the cases used here: equal characteristic
/// polynomials, plus equal ranks of `(M − λ)^s` at rational eigenvalues.
fn similar(a: &Matrix, b: &Matrix) -> bool {
    if char_poly(a) != char_poly(b) {
        return false;
    }
    if char_poly(a).is_squarefree() {
        return true;
    }
    match ClassSpec::of_matrix(a) {
        Some(spec) => class_membership(b, &spec),
        None => false,
    }
}

fn multiset(v: &[Scalar]) -> Vec<Scalar> {
    let mut v = v.to_vec();
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// Instances.

fn s_stratum(i: usize) -> MatrixTuple {
    let (eps, eta) = [(0, 0), (1, 0), (0, 1)][i];
    MatrixTuple::additive(vec![
        Matrix::from_ints(&[[1, 0], [0, 2]]),
        Matrix::from_ints(&[[3, eps], [eta, 5]]),
        Matrix::from_ints(&[[-4, -eps], [-eta, -7]]),
    ])
    .unwrap()
}

fn t_stratum(i: usize) -> MatrixTuple {
    let (a1, a2) = match i {
        0 => (Matrix::zeros(2, 2), Matrix::from_ints(&[[1, 0], [0, 2]])),
        1 => (Matrix::from_ints(&[[0, 1], [0, 0]]), Matrix::from_ints(&[[1, -1], [0, 2]])),
        _ => (Matrix::from_ints(&[[0, 1], [0, 0]]), Matrix::from_ints(&[[2, -1], [0, 1]])),
    };
    let a3 = -&(&a1 + &a2);
    MatrixTuple::additive(vec![a1, a2, a3]).unwrap()
}

fn diag_class(v: &[i64]) -> ClassSpec {
    ClassSpec::diagonal(&v.iter().map(|&x| q(x)).collect::<Vec<_>>())
}

fn nilpotent_class() -> ClassSpec {
    let j: JordanNormalForm = "{a:[2]}".parse().unwrap();
    ClassSpec::new(j, BTreeMap::from([("a".to_string(), q(0))])).unwrap()
}

/// Residues `A_1..A_{p−1}` random, `A_{p+1}` diagonal, `A_p` closing the sum.
fn random_system(r: &mut DspRng, n: usize, len: usize, diag: &[i64]) -> FuchsianSystem {
    let mut res: Vec<Matrix> = (0..len - 2).map(|_| random_matrix(r, n, 3)).collect();
    let last = Matrix::diag(&diag.iter().map(|&x| q(x)).collect::<Vec<_>>());
    let partial = res.iter().fold(last.clone(), |acc, m| &acc + m);
    res.push(-&partial);
    res.push(last);
    let mut poles: Vec<i64> = (-6..=6).collect();
    poles.shuffle(r);
    FuchsianSystem::new(poles[..len].iter().map(|&x| q(x)).collect(), res).unwrap()
}

/// `n` distinct integers at least `gap` apart.
fn spread(r: &mut DspRng, n: usize, gap: i64) -> Vec<i64> {
    let mut slots: Vec<i64> = (-8..=8).collect();
    slots.shuffle(r);
    slots[..n].iter().map(|s| s * gap).collect()
}

/// Additive scalar `(p+1)`-tuple summing to zero.
fn scalars(v: &[i64]) -> MatrixTuple {
    MatrixTuple::additive(v.iter().map(|&x| Matrix::scalar(1, q(x))).collect()).unwrap()
}

fn random_scalars(r: &mut DspRng, len: usize) -> MatrixTuple {
    let mut v: Vec<i64> = (0..len - 1).map(|_| r.gen_range(-5..=5)).collect();
    v.push(-v.iter().sum::<i64>());
    scalars(&v)
}

/// Additive irreducible tuple of size `m` whose matrices all have rational
/// eigenvalues; the last one is `diag(last)`.
fn random_irreducible(r: &mut DspRng, m: usize, len: usize, last: &[i64]) -> MatrixTuple {
    let d = Matrix::diag(&last.iter().map(|&x| q(x)).collect::<Vec<_>>());
    loop {
        let mut ms: Vec<Matrix> = (0..len - 2)
            .map(|_| {
                let p = random_unimodular(r, m, 2);
                let e = Matrix::diag(&(0..m).map(|_| q(r.gen_range(-4..=4))).collect::<Vec<_>>());
                &(&p * &e) * &p.inverse().unwrap()
            })
            .collect();
        let partial = ms.iter().fold(d.clone(), |acc, x| &acc + x);
        ms.push(-&partial);
        ms.push(d.clone());
        let t = MatrixTuple::additive(ms).unwrap();
        if eigen_data(&t.matrices[len - 2]).is_some() && is_irreducible(&t) {
            return t;
        }
    }
}

// ---------------------------------------------------------------------------
// Criteria.

fn c1_d_and_r() -> Check {
    let mut count = 0;
    for n in 1..=JNF_MAX_N {
        for jnf in JordanNormalForm::all_shapes(n) {
            let values: BTreeMap<String, Scalar> =
                jnf.groups().iter().enumerate().map(|(i, (l, _))| (l.clone(), q(3 * i as i64 - 2))).collect();
            let j = jnf.jordan_matrix(&values).map_err(|e| e.to_string())?;
            let d = orbit_dim(&j);
            let r = values.values().map(|v| shifted(&j, v).rank()).min().unwrap();
            ensure(jnf.class_dimension() == d, || format!("{jnf}: d = {} vs oracle {d}", jnf.class_dimension()))?;
            ensure(jnf.class_defect_r() == r, || format!("{jnf}: r = {} vs oracle {r}", jnf.class_defect_r()))?;
            count += 1;
        }
    }
    Ok(format!("{count} JNFs with n <= {JNF_MAX_N}"))
}

fn c2_corresponding_jnf() -> Check {
    let mut count = 0;
    for n in 1..=JNF_MAX_N {
        for jnf in JordanNormalForm::all_shapes(n) {
            let cd = jnf.corresponding_diagonal();
            ensure(cd.is_diagonal() && cd.size() == n, || format!("{jnf} -> {cd} is not diagonal of size {n}"))?;
            ensure(cd.class_dimension() == jnf.class_dimension(), || format!("{jnf}: d changes to {cd}"))?;
            ensure(cd.class_defect_r() == jnf.class_defect_r(), || format!("{jnf}: r changes to {cd}"))?;
            let values: BTreeMap<String, Scalar> =
                cd.groups().iter().enumerate().map(|(i, (l, _))| (l.clone(), q(i as i64))).collect();
            let d = orbit_dim(&cd.jordan_matrix(&values).unwrap());
            ensure(d == jnf.class_dimension(), || format!("{jnf}: oracle d of {cd} is {d}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} JNFs"))
}

/// Deterministic stream of constraint-satisfying tuples, both modes.
fn centralizer_tuples() -> Vec<MatrixTuple> {
    let mut r = rng(2024);
    let layouts = [Layout::Full, Layout::BlockDiagonal(1), Layout::BlockTriangular(1), Layout::Scalar];
    (0..CENTRALIZER_TUPLES)
        .map(|i| {
            let mode = if i % 2 == 0 { Mode::Additive } else { Mode::Multiplicative };
            let n = r.gen_range(1..=4);
            let len = r.gen_range(3..=4);
            let layout = layouts[r.gen_range(0..layouts.len())];
            let layout = match layout {
                Layout::BlockDiagonal(_) if n > 2 => Layout::BlockDiagonal(r.gen_range(1..n)),
                Layout::BlockTriangular(_) if n > 2 => Layout::BlockTriangular(r.gen_range(1..n)),
                l => l,
            };
            random_tuple(&mut r, mode, n, len, layout)
        })
        .collect()
}

fn c3_centralizer_equivalence() -> Check {
    let (mut trivial, mut nontrivial) = (0, 0);
    let mut modes = [0usize; 2];
    for t in centralizer_tuples() {
        ensure(satisfies_constraint(&t), || "generator broke the constraint".into())?;
        let n = t.size();
        let z = centralizer(&t).dimension;
        let oracle = common_commutant_dim(&t.matrices);
        ensure(z == oracle, || format!("centralizer {z} vs oracle {oracle}"))?;
        let rank = commutator_map_rank(&t);
        ensure((z == 1) == (rank == n * n - 1), || format!("n = {n}: centralizer {z}, map rank {rank}"))?;
        if z == 1 {
            trivial += 1;
        } else {
            nontrivial += 1;
        }
        modes[(t.mode == Mode::Multiplicative) as usize] += 1;
    }
    ensure(trivial > 0 && nontrivial > 0, || "generator did not cover both sides".into())?;
    Ok(format!(
        "{} tuples ({} additive, {} multiplicative): {trivial} trivial, {nontrivial} non-trivial, 0 counterexamples",
        trivial + nontrivial,
        modes[0],
        modes[1]
    ))
}

fn common_commutant_dim(ms: &[Matrix]) -> usize {
    let n = ms[0].rows();
    let mut cols: Vec<Vec<Scalar>> = vec![Vec::new(); n * n];
    for m in ms {
        for (c, col) in cols.iter_mut().enumerate() {
            col.extend(Matrix::commutator(m, &Matrix::unit(n, n, c / n, c % n)).to_vector());
        }
    }
    n * n - Matrix::from_columns(n * n * ms.len(), &cols).rank()
}

fn c4_tangent_dimension() -> Check {
    let mut count = 0;
    let s1 = s_stratum(1);
    let s1_dim = tangent_dimension(&s1).map_err(|e| e.to_string())?;
    ensure(s1_dim == 3, || format!("S1 tangent dimension {s1_dim}"))?;
    let mut tuples = centralizer_tuples();
    tuples.extend([s_stratum(1), s_stratum(2), t_stratum(1), t_stratum(2)]);
    for t in tuples.iter().filter(|t| common_commutant_dim(&t.matrices) == 1) {
        let n = t.size();
        let sum_d: usize = t.matrices.iter().map(orbit_dim).sum();
        let want = sum_d + 1 - n * n;
        let got = tangent_dimension(t).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("n = {n}: tangent {got}, formula {want}"))?;
        count += 1;
    }
    Ok(format!("{count} trivial-centralizer tuples, S1 value 3"))
}

/// `(dim R − dim Q, closed form)` from first principles.
fn xi_oracle(a: &MatrixTuple, c: &MatrixTuple) -> (i64, i64) {
    let (m1, m2, len) = (a.size(), c.size(), a.len());
    let bl = m1 * m2;
    let unit = |k: usize| Matrix::unit(m1, m2, k / m2, k % m2);
    let syl = |j: usize, e: &Matrix| &(&a.matrices[j] * e) - &(e * &c.matrices[j]);
    let left = |j: usize| a.matrices[..j].iter().fold(Matrix::identity(m1), |acc, m| &acc * m);
    let right = |j: usize| c.matrices[j + 1..].iter().fold(Matrix::identity(m2), |acc, m| &acc * m);
    let constrained = |j: usize, b: &Matrix| match a.mode {
        Mode::Additive => b.clone(),
        Mode::Multiplicative => &(&left(j) * b) * &right(j),
    };
    // M : (X_j) ↦ L(S_j X_j)
    let m_cols: Vec<Vec<Scalar>> =
        (0..len * bl).map(|idx| constrained(idx / bl, &syl(idx / bl, &unit(idx % bl))).to_vector()).collect();
    let ker_m = len * bl - Matrix::from_columns(bl, &m_cols).rank();
    let ker_phi: usize = (0..len)
        .map(|j| {
            let cols: Vec<Vec<Scalar>> = (0..bl).map(|k| syl(j, &unit(k)).to_vector()).collect();
            bl - Matrix::from_columns(bl, &cols).rank()
        })
        .sum();
    let q_cols: Vec<Vec<Scalar>> =
        (0..bl).map(|k| (0..len).flat_map(|j| syl(j, &unit(k)).to_vector()).collect()).collect();
    let dim_q = Matrix::from_columns(len * bl, &q_cols).rank();
    let dim_r = ker_m - ker_phi;
    let d_sum: usize = (0..len).map(|j| orbit_dim(&direct_sum(&a.matrices[j], &c.matrices[j]))).sum();
    let d1: usize = a.matrices.iter().map(orbit_dim).sum();
    let d2: usize = c.matrices.iter().map(orbit_dim).sum();
    let closed = (d_sum as i64 - d1 as i64 - d2 as i64) / 2 - 2 * bl as i64;
    (dim_r as i64 - dim_q as i64, closed)
}

fn c5_xi_formula() -> Check {
    let mut r = rng(55);
    let mut count = 0;
    let mut seen = BTreeMap::new();
    while count < XI_INSTANCES {
        let mode = if r.gen_bool(0.75) { Mode::Additive } else { Mode::Multiplicative };
        let (m1, m2) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let len = r.gen_range(3..=4);
        let a = random_tuple(&mut r, mode, m1, len, Layout::Full);
        let c = random_tuple(&mut r, mode, m2, len, Layout::Full);
        let Ok(pair) = RepresentationPair::new(a.clone(), c.clone()) else {
            continue;
        };
        let report = ext_report(&pair).map_err(|e| e.to_string())?;
        let (linear, closed) = xi_oracle(&a, &c);
        ensure(linear == closed, || format!("oracle disagrees with itself: {linear} vs {closed}"))?;
        ensure(report.xi == closed, || format!("({m1},{m2}) p = {}: xi {} vs oracle {closed}", len - 1, report.xi))?;
        ensure(report.dim_r as i64 - report.dim_q as i64 == linear, || "dim R − dim Q mismatch".into())?;
        *seen.entry(report.xi).or_insert(0usize) += 1;
        count += 1;
    }
    let split = RepresentationPair::new(scalars(&[1, 3, -4]), scalars(&[2, 5, -7])).unwrap();
    let xi1 = ext_report(&split).unwrap().xi;
    ensure(xi1 == 1, || format!("threestrata split xi = {xi1}"))?;
    let variant = RepresentationPair::new(scalars(&[1, 2, 3, -6]), scalars(&[0, 1, 4, -5])).unwrap();
    let xi2 = ext_report(&variant).unwrap().xi;
    ensure(xi2 == 2, || format!("p = 3 variant xi = {xi2}"))?;
    Ok(format!("{count} random pairs, xi histogram {seen:?}; threestrata 1, p = 3 variant 2"))
}

fn c6_threestrata() -> Check {
    let want = [(2, false), (1, false), (1, false)];
    for (i, (z, irr)) in want.into_iter().enumerate() {
        let t = s_stratum(i);
        ensure(satisfies_constraint(&t), || format!("S{i} residual nonzero"))?;
        let got = centralizer(&t).dimension;
        ensure(got == z && common_commutant_dim(&t.matrices) == z, || format!("S{i}: centralizer {got}"))?;
        ensure(is_irreducible(&t) == irr, || format!("S{i}: irreducibility"))?;
    }
    let classes = vec![diag_class(&[1, 2]), diag_class(&[3, 5]), diag_class(&[-4, -7])];
    let alpha = check_alpha(&classes).map_err(|e| e.to_string())?;
    ensure(alpha.holds && alpha.lhs == 6 && alpha.rhs == 2 * 2 * 2 - 2, || format!("{alpha:?}"))?;
    for i in 0..3 {
        let t = s_stratum(i);
        ensure(t.matrices.iter().zip(&classes).all(|(m, c)| class_membership(m, c)), || format!("S{i} classes"))?;
    }
    Ok("S0/S1/S2: residual 0, centralizer 2/1/1, reducible; alpha 6 = 6".into())
}

fn c7_t_strata() -> Check {
    for (i, z) in [2usize, 1, 1].into_iter().enumerate() {
        let t = t_stratum(i);
        ensure(satisfies_constraint(&t), || format!("T{i} residual nonzero"))?;
        let got = centralizer(&t).dimension;
        ensure(got == z && common_commutant_dim(&t.matrices) == z, || format!("T{i}: centralizer {got}"))?;
        ensure(!is_irreducible(&t), || format!("T{i} irreducible"))?;
    }
    let classes = vec![nilpotent_class(), diag_class(&[1, 2]), diag_class(&[-1, -2])];
    for i in 1..3 {
        let t = t_stratum(i);
        ensure(t.matrices.iter().zip(&classes).all(|(m, c)| class_membership(m, c)), || format!("T{i} classes"))?;
    }
    let set = ClassSet::additive(classes.clone()).unwrap();
    let verdict = weak_dsp_verdict(&set).map_err(|e| e.to_string())?;
    ensure(verdict.status == Status::Solvable, || format!("weak verdict {:?}", verdict.status))?;
    let (t, cert) = solve_weak_dsp(&set, &SolveOptions::default()).map_err(|e| e.to_string())?;
    ensure(satisfies_constraint(&t), || "solution residual nonzero".into())?;
    ensure(t.matrices.iter().zip(&classes).all(|(m, c)| class_membership(m, c)), || "solution classes".into())?;
    ensure(common_commutant_dim(&t.matrices) == 1, || "solution centralizer".into())?;
    Ok(format!("T0/T1/T2: centralizer 2/1/1; weak verdict solvable; solver certified ({:?})", cert.strategy))
}

/// `Σ A_j/(x − a_j)`.
fn evaluate(sys: &FuchsianSystem, x: &Scalar) -> Matrix {
    let n = sys.size();
    sys.poles()
        .iter()
        .zip(sys.residues())
        .fold(Matrix::zeros(n, n), |acc, (a, m)| &acc + &m.scale(&(x - a).inv().unwrap()))
}

fn c8_procedure() -> Check {
    let mut r = rng(88);
    let (mut done, mut blocked) = (0, 0);
    let points = [qf(1, 3), qf(-7, 2), qf(11, 5), q(17)];
    while done < PROCEDURE_SYSTEMS {
        let n = r.gen_range(2..=4);
        let len = r.gen_range(3..=4);
        let diag = spread(&mut r, n, 3);
        let sys = random_system(&mut r, n, len, &diag);
        let l = r.gen_range(0..n);
        let k = (l + r.gen_range(1..n)) % n;
        let (out, step) = match procedure_lk(&sys, l, k) {
            Ok(x) => x,
            Err(DspError::ProcedureBlocked { .. }) => {
                blocked += 1;
                continue;
            }
            Err(e) => return Err(format!("n = {n}, ({l},{k}): {e}")),
        };
        let p = len - 1;
        let a = sys.poles()[p].clone();
        let res = sys.residues();
        // F and G from the Laurent expansion at the last pole.
        let f = (0..p).fold(Matrix::zeros(n, n), |acc, j| &acc + &res[j].scale(&(&a - &sys.poles()[j]).inv().unwrap()));
        let g = (0..p).fold(Matrix::zeros(n, n), |acc, j| {
            &acc - &res[j].scale(&(&a - &sys.poles()[j]).pow(2).inv().unwrap())
        });
        ensure(step.c == *f.get(l, k), || "c differs from F[l][k]".into())?;
        let lam = sys.eigenvalues();
        let w = &(&(&lam[k] - &lam[l]) + &q(1)) / &step.c;
        ensure(step.w == w, || "w differs from (λ_k − λ_l + 1)/c".into())?;
        let wm = Matrix::unit(n, n, k, l).scale(&w);
        let pc = &step.conjugator;
        let pinv = pc.inverse().ok_or("conjugator singular")?;
        let conj = |m: &Matrix| &(&pinv * m) * pc;
        // simple poles only, same poles, zero residue sum
        ensure(out.poles() == sys.poles(), || "poles changed".into())?;
        let sum = out.residues().iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
        ensure(sum.is_zero(), || "residue sum nonzero".into())?;
        // closed-form residues
        for j in 0..p {
            let s = (&sys.poles()[j] - &a).inv().unwrap();
            let v = &Matrix::identity(n) + &wm.scale(&s);
            let vinv = v.inverse().ok_or("V(a_j) singular")?;
            let want = conj(&(&(&vinv * &res[j]) * &v));
            ensure(out.residues()[j] == want, || format!("residue {j} differs from the closed form"))?;
            ensure(similar(&res[j], &out.residues()[j]), || format!("residue {j} left its class"))?;
        }
        let last = &(&res[p] + &Matrix::commutator(&f, &wm)) - &(&(&wm * &g) * &wm);
        ensure(out.residues()[p] == conj(&last), || "last residue differs from the closed form".into())?;
        // eigenvalue shift
        let mut want = lam.clone();
        want[l] = &want[l] - &q(1);
        want[k] = &want[k] + &q(1);
        ensure(out.eigenvalues() == want, || "last residue not shifted by (−1, +1)".into())?;
        // pointwise gauge identity A' = −V⁻¹V' + V⁻¹AV and det V = 1
        for x in &points {
            let s = (x - &a).inv().unwrap();
            let v = &Matrix::identity(n) + &wm.scale(&s);
            ensure(v.determinant() == q(1), || "det V is not 1".into())?;
            let vinv = v.inverse().unwrap();
            let dv = wm.scale(&-&(&s * &s));
            let transformed = &(&(&vinv * &evaluate(&sys, x)) * &v) - &(&vinv * &dv);
            ensure(evaluate(&out, x) == conj(&transformed), || format!("gauge identity fails at {x}"))?;
        }
        done += 1;
    }
    Ok(format!("{done} systems (n <= 4), {blocked} blocked draws skipped"))
}

fn c9_walks() -> Check {
    let mut r = rng(99);
    let mut steps = 0;
    for i in 0..WALKS {
        let n = r.gen_range(2..=3);
        let len = r.gen_range(3..=4);
        let diag = spread(&mut r, n, 9);
        let sys = loop {
            let s = random_system(&mut r, n, len, &diag);
            if is_irreducible(&s.tuple()) {
                break s;
            }
        };
        let mut v: Vec<i64> = (0..n - 1).map(|_| r.gen_range(-WALK_BOUND..=WALK_BOUND)).collect();
        let last = -v.iter().sum::<i64>();
        if last.abs() > WALK_BOUND {
            v = v.iter().map(|x| x.signum()).collect();
        }
        v.push(-v.iter().sum::<i64>());
        let walk = shift_walk(&sys, &v, i as u64).map_err(|e| format!("walk {i} by {v:?}: {e}"))?;
        let want: Vec<Scalar> = sys.eigenvalues().iter().zip(&v).map(|(x, d)| x + &q(*d)).collect();
        ensure(multiset(&walk.system.eigenvalues()) == multiset(&want), || format!("walk {i}: wrong eigenvalues"))?;
        let sum = walk.system.residues().iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
        ensure(sum.is_zero(), || format!("walk {i}: residue sum nonzero"))?;
        steps += walk.steps.len();
    }
    Ok(format!("{WALKS} walks, {steps} procedures in total"))
}

fn coarsen_instance() -> MatrixTuple {
    let a1 = Matrix::from_ints(&[[1, 1, 0], [0, 2, 1], [0, 0, 3]]);
    let a2 = Matrix::from_ints(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
    let a3 = Matrix::from_ints(&[[0, -1, 0], [-1, 1, -1], [0, -1, 0]]);
    let a4 = Matrix::from_ints(&[[2, 0, 0], [0, 0, 0], [0, 0, 4]]);
    let sum = [&a1, &a2, &a3, &a4].iter().fold(Matrix::zeros(3, 3), |acc, m| &acc + *m);
    MatrixTuple::additive(vec![a1, a2, a3, a4, -&sum]).unwrap()
}

fn c10_deformation() -> Check {
    let t = coarsen_instance();
    let last = t.matrices[4].clone();
    ensure(shifted(&last, &q(-3)).rank() == 1, || "instance: −3 is not semisimple of multiplicity 2".into())?;
    ensure(common_commutant_dim(&t.matrices) == 1, || "instance centralizer".into())?;

    let coarse = canned_jnf_coarsen(&t, 4, &q(-3), &qf(1, 4), 1).map_err(|e| e.to_string())?;
    ensure(satisfies_constraint(&coarse), || "coarsened tuple residual nonzero".into())?;
    let m = shifted(&coarse.matrices[4], &q(-3));
    let ladder = (m.rank(), (&m * &m).rank());
    ensure(ladder == (2, 1), || format!("rank ladder at −3 is {ladder:?}, want (2, 1)"))?;
    ensure(shifted(&coarse.matrices[4], &q(-7)).rank() == 2, || "eigenvalue −7 lost".into())?;
    for j in 0..4 {
        ensure(similar(&t.matrices[j], &coarse.matrices[j]), || format!("coarsen moved class {j}"))?;
    }

    let split = canned_split_eigenvalues(&coarse, 4, &qf(1, 8), 2).map_err(|e| e.to_string())?;
    ensure(satisfies_constraint(&split), || "split tuple residual nonzero".into())?;
    let disc = discriminant_like(&split.matrices[4]);
    ensure(disc != q(0), || "discriminant vanishes after the split".into())?;
    ensure(discriminant_like(&coarse.matrices[4]) == q(0), || "coarse matrix already simple".into())?;
    ensure(split.matrices[4].trace() == coarse.matrices[4].trace(), || "split changed the trace".into())?;
    for j in 0..4 {
        ensure(similar(&coarse.matrices[j], &split.matrices[j]), || format!("split moved class {j}"))?;
    }

    let (_, g) = jordan_frame(&last).map_err(|e| e.to_string())?;
    let slots: Vec<usize> = (0..3).filter(|&i| g.get(i, i) == &q(-3)).collect();
    let mut dirs = vec![Matrix::zeros(3, 3); 5];
    dirs[0] = Matrix::unit(3, 3, 1, 0);
    dirs[4] = Matrix::unit(3, 3, slots[0], slots[1]);
    let first = first_order_deform(&DeformationRequest { base: t, directions: dirs }).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = (3..=10)
        .map(|k| {
            let eps = qf(1, 1 << k);
            let e = 0.5f64.powi(k);
            first.residual(&eps).unwrap().frobenius_norm() / (e * e)
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    ensure(lo > 0.0 && hi / lo <= SCALING_BAND, || format!("residual/ε² ratios {ratios:?}"))?;
    Ok(format!("coarsen [1,1] -> [2]; split discriminant {disc}; residual/ε² in [{lo:.4}, {hi:.4}]"))
}

fn random_class(r: &mut DspRng, mode: Mode, n: usize) -> ClassSpec {
    let shapes = JordanNormalForm::all_shapes(n);
    let jnf = shapes[r.gen_range(0..shapes.len())].clone();
    let mut pool: Vec<i64> = match mode {
        Mode::Additive => (-3..=3).collect(),
        Mode::Multiplicative => vec![1, -1, 2, -2, 3],
    };
    pool.shuffle(r);
    let values = jnf.groups().iter().zip(pool).map(|((l, _), v)| (l.clone(), q(v))).collect();
    ClassSpec::new(jnf, values).unwrap()
}

/// Adjusts one eigenvalue so the set is neutral, when that keeps labels distinct.
fn neutralize(set: &mut [ClassSpec], mode: Mode) {
    let total = set.iter().fold(if mode == Mode::Additive { q(0) } else { q(1) }, |acc, c| {
        c.jnf().groups().iter().fold(acc, |acc, (l, p)| {
            let v = c.value_of(l).unwrap();
            match mode {
                Mode::Additive => &acc + &(&v * &q(p.total() as i64)),
                Mode::Multiplicative => &acc * &v.pow(p.total() as u32),
            }
        })
    });
    let last = set.last_mut().unwrap();
    let Some(label) = last.jnf().groups().iter().find(|(_, p)| p.total() == 1).map(|(l, _)| l.clone()) else {
        return;
    };
    let mut values = last.labels().clone();
    let old = values[&label].clone();
    let new = match mode {
        Mode::Additive => &old - &total,
        Mode::Multiplicative => &old * &total.inv().unwrap(),
    };
    values.insert(label, new);
    if let Ok(c) = ClassSpec::new(last.jnf().clone(), values) {
        *last = c;
    }
}

fn c11_verdict_gating() -> Check {
    let nil = ClassSet::additive(vec![nilpotent_class(), nilpotent_class(), nilpotent_class()]).unwrap();
    let v = weak_dsp_verdict(&nil).map_err(|e| e.to_string())?;
    ensure(v.status == Status::Inapplicable, || format!("nilpotent triple: {:?}", v.status))?;
    let a = check_alpha(&nil.classes).unwrap();
    ensure(a.holds, || "alpha should hold on the nilpotent triple".into())?;

    let mut r = rng(1111);
    let (mut nongeneric, mut solvable, mut nil_hits) = (0, 0, 0);
    for i in 0..VERDICT_SETS {
        let set = if i % 25 == 0 {
            nil.clone()
        } else {
            let mode = if r.gen_bool(0.7) { Mode::Additive } else { Mode::Multiplicative };
            let n = r.gen_range(1..=3);
            let len = r.gen_range(2..=4);
            let mut classes: Vec<ClassSpec> = (0..len).map(|_| random_class(&mut r, mode, n)).collect();
            if r.gen_bool(0.6) {
                neutralize(&mut classes, mode);
            }
            ClassSet::new(mode, classes).map_err(|e| e.to_string())?
        };
        let is_nil_triple = set.len() == 3
            && set.size() == 2
            && set.mode == Mode::Additive
            && set.classes.iter().all(|c| c == &nilpotent_class());
        let weak = weak_dsp_verdict(&set).map_err(|e| e.to_string())?;
        if is_nil_triple {
            nil_hits += 1;
            ensure(weak.status == Status::Inapplicable, || "nilpotent triple not refused".into())?;
        }
        let dsp = dsp_verdict(&set).map_err(|e| e.to_string())?;
        let generic = is_generic(&EigenvalueSystem::from_classes(&set)).map_err(|e| e.to_string())?;
        if !generic {
            nongeneric += 1;
            ensure(dsp.status != Status::Solvable, || format!("solvable on non-generic set {i}"))?;
        }
        if dsp.status == Status::Solvable {
            solvable += 1;
        }
    }
    Ok(format!(
        "{VERDICT_SETS} sets: {nongeneric} non-generic never solvable, {solvable} solvable, {nil_hits} nilpotent triples refused"
    ))
}

fn c12_deform_to_irreducible() -> Check {
    let mut r = rng(1212);
    let mut done = 0;
    let mut shapes = Vec::new();
    while done < IRREDUCIBLE_INSTANCES {
        let (first, second) = if done % 2 == 0 {
            (random_scalars(&mut r, 4), random_scalars(&mut r, 4))
        } else {
            let len = r.gen_range(3..=4);
            let d = spread(&mut r, 3, 1);
            (random_scalars(&mut r, len), random_irreducible(&mut r, 2, len, &d[1..]))
        };
        let Ok(pair) = RepresentationPair::new(first, second) else {
            continue;
        };
        let xi = ext_report(&pair).map_err(|e| e.to_string())?.xi;
        if xi < 2 {
            continue;
        }
        let basis = extension_space_basis(&pair).map_err(|e| e.to_string())?;
        let t = deform_to_irreducible(&pair, &basis[0], done as u64, IRREDUCIBLE_ROUNDS)
            .map_err(|e| format!("instance {done} (xi = {xi}): {e}"))?;
        ensure(satisfies_constraint(&t), || "output residual nonzero".into())?;
        ensure(is_irreducible(&t), || "output reducible".into())?;
        let sum = pair.direct_sum();
        for (j, (m, s)) in t.matrices.iter().zip(&sum.matrices).enumerate() {
            ensure(similar(s, m), || format!("instance {done}: matrix {j} left its class"))?;
        }
        shapes.push((pair.first().size(), pair.second().size(), xi));
        done += 1;
    }
    let mut refused = 0;
    let split = RepresentationPair::new(scalars(&[1, 3, -4]), scalars(&[2, 5, -7])).unwrap();
    let mut xi1 = vec![split];
    while xi1.len() < 5 {
        if let Ok(p) = RepresentationPair::new(random_scalars(&mut r, 3), random_scalars(&mut r, 3)) {
            if ext_report(&p).map(|x| x.xi) == Ok(1) {
                xi1.push(p);
            }
        }
    }
    for p in &xi1 {
        let e = &extension_space_basis(p).unwrap()[0];
        match deform_to_irreducible(p, e, 1, IRREDUCIBLE_ROUNDS) {
            Err(DspError::Precondition(_)) => refused += 1,
            other => return Err(format!("xi = 1 instance not refused: {other:?}")),
        }
    }
    Ok(format!("{done} instances (m1, m2, xi) {shapes:?} irreducible; {refused} xi = 1 pairs refused"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("d/r oracle equivalence", c1_d_and_r),
        ("d and r under corresponding JNF", c2_corresponding_jnf),
        ("centralizer vs commutator-map rank", c3_centralizer_equivalence),
        ("smooth dimension", c4_tangent_dimension),
        ("xi formula", c5_xi_formula),
        ("threestrata example", c6_threestrata),
        ("T-strata example", c7_t_strata),
        ("procedure (l,k)", c8_procedure),
        ("shift_walk ledger", c9_walks),
        ("deformation engine", c10_deformation),
        ("verdict gating", c11_verdict_gating),
        ("deform_to_irreducible", c12_deform_to_irreducible),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
