//! Constructing tuples with trivial centralizer in prescribed classes
//! (additive mode).
//!
//! For generic classes a seed is grown from a triangular tuple whose
//! designated matrix is then moved, class by class, onto the target
//! eigenvalues. For non-generic classes the designated eigenvalues are first
//! shifted by an integer vector to generic ones, a seed is built there, and
//! the shift is undone by Procedures (l,k). A direct triangular
//! construction is the last resort.

use itertools::Itertools;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::class::{ClassSet, ClassSpec, Mode};
use crate::criteria::{check_alpha, check_beta, weak_dsp_verdict, Status, Verdict};
use crate::deform::{first_order_deform, jordan_frame, newton_correct, DeformationRequest};
use crate::error::{ensure, DspError, Result};
use crate::ext::{build_semidirect, extension_space_basis, preserves_classes, split_direct_sum, RepresentationPair};
use crate::gauge::{shift_walk, FuchsianSystem, WalkStep};
use crate::genericity::{find_generic_shift, is_generic, EigenvalueSystem, ShiftPlan};
use crate::eigen::eigen_data;
use crate::matrix::Matrix;
use crate::orbit::affine_capacity;
use crate::random::{rng, small_scalar, DspRng};
use crate::scalar::Scalar;
use crate::tuple::{centralizer, class_membership, is_irreducible, verify, MatrixTuple, VerificationReport};

/// Stage counts tried when moving the designated eigenvalues.
const STAGES: [usize; 4] = [1, 2, 4, 8];
/// Restarts allowed when the exact moves are too few to span the
/// traceless matrices; success then depends on a special residual.
const SHORT_RESTARTS: usize = 4;
/// Cap on block arrangements explored by the triangular construction.
const ARRANGEMENT_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Classes already generic: seed only.
    Generic,
    /// Seed at shifted generic eigenvalues, then a gauge walk back.
    ShiftAndWalk,
    /// Block upper-triangular tuple built directly in the target classes.
    Triangular,
    /// Caller-supplied seed at shifted eigenvalues, then a gauge walk back.
    UserSeed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    pub max_restarts: usize,
    /// Largest entry of the generic shift vector searched.
    pub shift_bound: u32,
    /// A tuple in the shifted classes (in the input class order) to use in
    /// place of the constructed seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_seed: Option<MatrixTuple>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { seed: 7, max_restarts: 32, shift_bound: 3, user_seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub seed: u64,
    pub verdict: Verdict,
    pub strategy: Strategy,
    /// Class whose eigenvalues are shifted and walked back.
    pub designated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_plan: Option<ShiftPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_tuple: Option<MatrixTuple>,
    pub walk: Vec<WalkStep>,
    /// Whether the walk output had to be split and re-extended.
    pub re_extended: bool,
    pub restarts: usize,
    /// Strategies that were tried and failed, with the reason.
    pub failures: Vec<String>,
    pub report: VerificationReport,
    pub membership: Vec<bool>,
}

/// Class order with `d` moved to the end.
fn order_with_last(len: usize, d: usize) -> Vec<usize> {
    (0..len).filter(|&j| j != d).chain(std::iter::once(d)).collect()
}

fn restore_order(ms: Vec<Matrix>, order: &[usize]) -> Vec<Matrix> {
    let mut out = vec![Matrix::zeros(0, 0); ms.len()];
    for (m, &j) in ms.into_iter().zip(order) {
        out[j] = m;
    }
    out
}

fn jordan_block(value: &Scalar, size: usize) -> Matrix {
    let mut m = Matrix::scalar(size, value.clone());
    for i in 0..size.saturating_sub(1) {
        m.set(i, i + 1, Scalar::from_int(1));
    }
    m
}

/// Jordan blocks `(eigenvalue, size)` of a class.
fn blocks_of(c: &ClassSpec) -> Result<Vec<(Scalar, usize)>> {
    let data = c.eigen_data().ok_or_else(|| DspError::Precondition("class has eigenvalues outside Q(i)".into()))?;
    Ok(data.iter().flat_map(|(v, p)| p.parts().iter().map(move |&s| (v.clone(), s))).collect())
}

/// Distinct block orders of a class.
fn arrangements(c: &ClassSpec) -> Result<Vec<Vec<(Scalar, usize)>>> {
    let blocks = blocks_of(c)?;
    let k = blocks.len();
    Ok(blocks.into_iter().permutations(k).unique().collect())
}

fn arranged_matrix(blocks: &[(Scalar, usize)]) -> Matrix {
    let ms: Vec<Matrix> = blocks.iter().map(|(v, s)| jordan_block(v, *s)).collect();
    Matrix::block_diag(&ms)
}

fn diagonal_of(blocks: &[(Scalar, usize)]) -> Vec<Scalar> {
    blocks.iter().flat_map(|(v, s)| std::iter::repeat_n(v.clone(), *s)).collect()
}

/// `U G U⁻¹` for a random upper unipotent `U`: upper triangular, same class
/// and diagonal as `G`.
fn upper_conjugate(g: &Matrix, r: &mut DspRng) -> Matrix {
    let n = g.rows();
    let mut u = Matrix::identity(n);
    for i in 0..n {
        for k in i + 1..n {
            u.set(i, k, small_scalar(r, 2));
        }
    }
    &(&u * g) * &u.inverse().expect("unipotent")
}

fn same_multiset(a: &[Scalar], b: &[Scalar]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}

/// Upper-triangular tuple: classes `classes[..p]` exactly, last matrix
/// `−Σ`, with the given block orders.
fn triangular(classes: &[ClassSpec], orders: &[Vec<(Scalar, usize)>], r: &mut DspRng) -> Vec<Matrix> {
    let n = classes[0].size();
    let mut ms: Vec<Matrix> = orders.iter().map(|o| upper_conjugate(&arranged_matrix(o), r)).collect();
    let sum = ms.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
    ms.push(-&sum);
    ms
}

/// Moves the last matrix (distinct eigenvalues `from`, slot by slot) onto
/// eigenvalues `to` in stages, keeping the other classes.
fn move_last_eigenvalues(
    t: &[Matrix],
    from: &[Scalar],
    to: &[Scalar],
    stage_counts: &[usize],
    seed: u64,
) -> Result<Vec<Matrix>> {
    let n = from.len();
    let last = t.len() - 1;
    let mut failure = String::new();
    'stages: for &stages in stage_counts {
        let mut cur = t.to_vec();
        let mut vals = from.to_vec();
        for s in 1..=stages {
            let frac = Scalar::from_frac(s as i64, stages as i64);
            let next: Vec<Scalar> = from.iter().zip(to).map(|(a, b)| a + &(&(b - a) * &frac)).collect();
            if (0..n).any(|i| next[..i].contains(&next[i])) {
                failure = "eigenvalues collide along the path".into();
                continue 'stages;
            }
            let (_, g) = match jordan_frame(&cur[last]) {
                Ok(f) => f,
                Err(e) => {
                    failure = e.to_string();
                    continue 'stages;
                }
            };
            let mut v = Matrix::zeros(n, n);
            for k in 0..n {
                let Some(i) = vals.iter().position(|x| x == g.get(k, k)) else {
                    failure = "frame does not match the tracked eigenvalues".into();
                    continue 'stages;
                };
                v.set(k, k, &next[i] - &vals[i]);
            }
            let mut directions = vec![Matrix::zeros(n, n); t.len()];
            directions[last] = v;
            let req = DeformationRequest { base: MatrixTuple::additive(cur.clone())?, directions };
            let step = first_order_deform(&req)
                .and_then(|first| newton_correct(&first, &Scalar::from_int(1), seed.wrapping_add(s as u64)));
            match step {
                Ok(out) => {
                    cur = out.matrices;
                    vals = next;
                }
                Err(e) => {
                    failure = e.to_string();
                    continue 'stages;
                }
            }
        }
        return Ok(cur);
    }
    Err(DspError::Construction(format!("could not move the designated eigenvalues: {failure}")))
}

/// Irreducible tuple in generic classes with the designated class last.
fn seed_in_order(classes: &[ClassSpec], seed: u64, max_restarts: usize) -> Result<(Vec<Matrix>, usize)> {
    let n = classes[0].size();
    let p = classes.len() - 1;
    if n == 1 {
        let ms: Vec<Matrix> =
            classes.iter().map(|c| Matrix::scalar(1, c.slots()[0].clone())).collect();
        return Ok((ms, 0));
    }
    let target = classes[p].slots();
    let choices: Vec<Vec<Vec<(Scalar, usize)>>> = classes[..p].iter().map(arrangements).collect::<Result<_>>()?;
    let mut r = rng(seed);
    let mut last_error = String::from("no restart attempted");
    let mut budget = max_restarts.max(1);
    let mut stage_counts: &[usize] = &STAGES;
    let mut restart = 0;
    while restart < budget {
        restart += 1;
        let orders: Vec<Vec<(Scalar, usize)>> = choices.iter().map(|c| c.choose(&mut r).unwrap().clone()).collect();
        let base = triangular(&classes[..p], &orders, &mut r);
        let start = base[p].diagonal();
        if (0..n).any(|i| start[..i].contains(&start[i])) {
            last_error = "triangular base has a repeated designated eigenvalue".into();
            continue;
        }
        if !centralizer(&MatrixTuple::additive(base.clone())?).is_trivial() {
            last_error = "triangular base has a non-trivial centralizer".into();
            continue;
        }
        let eigen: Vec<_> = base.iter().map(eigen_data).collect();
        if affine_capacity(&base, &eigen) + 1 < n * n {
            budget = budget.min(SHORT_RESTARTS);
            stage_counts = &STAGES[..1];
        }
        let mut to = target.clone();
        to.shuffle(&mut r);
        match move_last_eigenvalues(&base, &start, &to, stage_counts, seed.wrapping_add(restart as u64 * 101)) {
            Ok(ms) => {
                let t = MatrixTuple::additive(ms.clone())?;
                if is_irreducible(&t) {
                    return Ok((ms, restart - 1));
                }
                last_error = "seed is reducible".into();
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(DspError::Construction(format!("no seed after {budget} restarts: {last_error}")))
}

fn designated(set: &ClassSet) -> Result<usize> {
    set.distinct_class().ok_or_else(|| DspError::Precondition("no class with distinct eigenvalues".into()))
}

fn check_seed_preconditions(set: &ClassSet) -> Result<usize> {
    ensure!(set.mode == Mode::Additive, Precondition, "seed construction is additive only");
    let d = designated(set)?;
    ensure!(is_generic(&EigenvalueSystem::from_classes(set))?, Precondition, "eigenvalues are not generic");
    if set.size() > 1 {
        ensure!(check_alpha(&set.classes)?.holds, Precondition, "(α) fails");
        ensure!(check_beta(&set.classes)?.holds, Precondition, "(β) fails");
    }
    Ok(d)
}

fn attach(set: &ClassSet, ms: Vec<Matrix>) -> Result<MatrixTuple> {
    MatrixTuple::additive(ms)?.with_classes(set.classes.clone())
}

fn memberships(t: &MatrixTuple, classes: &[ClassSpec]) -> Vec<bool> {
    t.matrices.iter().zip(classes).map(|(m, c)| class_membership(m, c)).collect()
}

/// Irreducible tuple in generic classes, certified before return.
pub fn construct_generic_seed(set: &ClassSet, seed: u64, max_restarts: usize) -> Result<MatrixTuple> {
    let d = check_seed_preconditions(set)?;
    let order = order_with_last(set.len(), d);
    let ordered: Vec<ClassSpec> = order.iter().map(|&j| set.classes[j].clone()).collect();
    let (ms, _) = seed_in_order(&ordered, seed, max_restarts)?;
    let t = attach(set, restore_order(ms, &order))?;
    let report = verify(&t);
    ensure!(
        report.constraint_holds && report.irreducible && report.class_membership.as_ref().is_some_and(|m| m.iter().all(|&b| b)),
        Invariant,
        "seed failed certification"
    );
    Ok(t)
}

/// Splits a walk output with non-trivial centralizer into two summands and
/// rebuilds a nonsplit extension in the same classes.
fn re_extend(t: &MatrixTuple) -> Result<MatrixTuple> {
    let split = split_direct_sum(t)?.ok_or_else(|| DspError::Invariant("centralizer is already trivial".into()))?;
    ensure!(split.blocks.len() == 2, Construction, "{} direct summands; only two are re-extended", split.blocks.len());
    for (a, b) in [(0, 1), (1, 0)] {
        let pair = RepresentationPair::new(split.blocks[a].clone(), split.blocks[b].clone())?;
        for e in extension_space_basis(&pair)? {
            if !preserves_classes(&pair, &e) {
                continue;
            }
            let out = build_semidirect(&pair, &e)?;
            if centralizer(&out).is_trivial() {
                return Ok(out);
            }
        }
    }
    Err(DspError::Construction("no class-preserving nonsplit extension of the summands".into()))
}

struct Attempt {
    matrices: Vec<Matrix>,
    seed_tuple: Option<MatrixTuple>,
    walk: Vec<WalkStep>,
    re_extended: bool,
    restarts: usize,
}

/// Seeds at shifted eigenvalues and walks back. Works in the reordered
/// frame (designated class last).
fn shift_and_walk(
    ordered: &[ClassSpec],
    plan: &ShiftPlan,
    user_seed: Option<Vec<Matrix>>,
    opts: &SolveOptions,
) -> Result<Attempt> {
    let p = ordered.len() - 1;
    let target = ordered[p].slots();
    let shifted: Vec<Scalar> = target.iter().zip(&plan.vector).map(|(x, &v)| x + &Scalar::from_int(v)).collect();
    let mut seed_classes = ordered.to_vec();
    seed_classes[p] = ClassSpec::diagonal(&shifted);
    let (ms, restarts) = match user_seed {
        Some(ms) => (ms, 0),
        None => seed_in_order(&seed_classes, opts.seed, opts.max_restarts)?,
    };
    let seed_tuple = MatrixTuple::additive(ms.clone())?.with_classes(seed_classes.clone())?;
    ensure!(
        memberships(&seed_tuple, &seed_classes).iter().all(|&b| b),
        Precondition,
        "seed tuple is not in the shifted classes"
    );
    let sys = FuchsianSystem::with_default_poles(ms)?;
    let last = sys.residues()[p].clone();
    let frame = crate::gauge::diagonalizer(&last, &shifted)?;
    let sys = sys.conjugated(&frame)?;
    let back: Vec<i64> = plan.vector.iter().map(|v| -v).collect();
    let walk = shift_walk(&sys, &back, opts.seed)?;
    let mut t = walk.system.tuple();
    let mut re_extended = false;
    if !centralizer(&t).is_trivial() {
        t = re_extend(&t)?;
        re_extended = true;
    }
    Ok(Attempt { matrices: t.matrices, seed_tuple: Some(seed_tuple), walk: walk.steps, re_extended, restarts })
}

/// Triangular tuples in the exact target classes, when the diagonal
/// arrangement allows one.
fn direct_triangular(ordered: &[ClassSpec], opts: &SolveOptions) -> Result<Attempt> {
    let p = ordered.len() - 1;
    let n = ordered[0].size();
    let target = ordered[p].slots();
    let choices: Vec<Vec<Vec<(Scalar, usize)>>> = ordered[..p].iter().map(arrangements).collect::<Result<_>>()?;
    let mut found = Vec::new();
    let mut visited = 0usize;
    let mut stack: Vec<(usize, Vec<usize>, Vec<Scalar>)> = vec![(0, Vec::new(), vec![Scalar::from_int(0); n])];
    while let Some((j, picks, sum)) = stack.pop() {
        visited += 1;
        if visited > ARRANGEMENT_CAP {
            break;
        }
        if j == p {
            let neg: Vec<Scalar> = sum.iter().map(|x| -x).collect();
            if same_multiset(&neg, &target) {
                found.push(picks);
            }
            continue;
        }
        for (i, o) in choices[j].iter().enumerate() {
            let diag = diagonal_of(o);
            let next: Vec<Scalar> = sum.iter().zip(&diag).map(|(a, b)| a + b).collect();
            let mut picks = picks.clone();
            picks.push(i);
            stack.push((j + 1, picks, next));
        }
    }
    ensure!(!found.is_empty(), Construction, "no triangular arrangement matches the designated eigenvalues");
    let mut r = rng(opts.seed);
    for restart in 0..opts.max_restarts.max(1) {
        let picks = &found[restart % found.len()];
        let orders: Vec<Vec<(Scalar, usize)>> = picks.iter().enumerate().map(|(j, &i)| choices[j][i].clone()).collect();
        let ms = triangular(&ordered[..p], &orders, &mut r);
        let t = MatrixTuple::additive(ms.clone())?;
        if centralizer(&t).is_trivial() && class_membership(&ms[p], &ordered[p]) {
            return Ok(Attempt { matrices: ms, seed_tuple: None, walk: Vec::new(), re_extended: false, restarts: restart });
        }
    }
    Err(DspError::Construction("triangular tuples all had non-trivial centralizers".into()))
}

/// A tuple with trivial centralizer in the given classes, with a
/// certificate of how it was built and checked.
pub fn solve_weak_dsp(set: &ClassSet, opts: &SolveOptions) -> Result<(MatrixTuple, Certificate)> {
    ensure!(set.mode == Mode::Additive, Precondition, "only additive classes can be solved");
    let verdict = weak_dsp_verdict(set)?;
    ensure!(verdict.status == Status::Solvable, Precondition, "weak verdict is {:?}, not solvable", verdict.status);
    let d = designated(set)?;
    let order = order_with_last(set.len(), d);
    let ordered: Vec<ClassSpec> = order.iter().map(|&j| set.classes[j].clone()).collect();
    let sys = EigenvalueSystem::from_classes(&ClassSet::additive(ordered.clone())?);
    let mut failures = Vec::new();
    let mut plan = None;
    let mut outcome = None;

    match find_generic_shift(&sys, ordered.len() - 1, opts.shift_bound) {
        Ok(found) => {
            let user = opts.user_seed.as_ref().map(|t| order.iter().map(|&j| t.matrices[j].clone()).collect());
            let strategy = if user.is_some() {
                Strategy::UserSeed
            } else if found.vector.iter().all(|&v| v == 0) {
                Strategy::Generic
            } else {
                Strategy::ShiftAndWalk
            };
            match shift_and_walk(&ordered, &found, user, opts) {
                Ok(a) => outcome = Some((strategy, a)),
                Err(e) => failures.push(format!("{strategy:?}: {e}")),
            }
            plan = Some(found);
        }
        Err(e) => failures.push(format!("shift search: {e}")),
    }
    if outcome.is_none() {
        match direct_triangular(&ordered, opts) {
            Ok(a) => outcome = Some((Strategy::Triangular, a)),
            Err(e) => failures.push(format!("Triangular: {e}")),
        }
    }
    let (strategy, attempt) = outcome
        .ok_or_else(|| DspError::Construction(format!("every strategy failed: {}", failures.join("; "))))?;

    let t = attach(set, restore_order(attempt.matrices, &order))?;
    let report = verify(&t);
    let membership = memberships(&t, &set.classes);
    ensure!(report.constraint_holds, Invariant, "solution violates the constraint");
    ensure!(membership.iter().all(|&b| b), Invariant, "solution leaves the classes");
    ensure!(report.trivial_centralizer(), Invariant, "solution has a non-trivial centralizer");
    let seed_tuple = attempt
        .seed_tuple
        .map(|s| MatrixTuple::additive(restore_order(s.matrices, &order)))
        .transpose()?;
    let cert = Certificate {
        seed: opts.seed,
        verdict,
        strategy,
        designated: d,
        shift_plan: plan,
        seed_tuple,
        walk: attempt.walk,
        re_extended: attempt.re_extended,
        restarts: attempt.restarts,
        failures,
        report,
        membership,
    };
    Ok((t, cert))
}
