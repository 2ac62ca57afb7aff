//! Non-genericity relations among eigenvalues and integer shifts that
//! remove them.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::class::{ClassSet, Mode, Representation};
use crate::error::{ensure, DspError, Result};
use crate::par::{self, Execution};
use crate::scalar::Scalar;

/// Default largest `n` for relation enumeration.
pub const DEFAULT_RELATION_CAP: usize = 8;

/// Eigenvalue multisets of `p+1` classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenvalueSystem {
    mode: Mode,
    repr: Representation,
    classes: Vec<Vec<Scalar>>,
}

/// `Σ_j Σ_{k∈Φ_j} λ_{k,j}` is neutral for some `m`-element slot choices `Φ_j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NonGenericityRelation {
    pub m: usize,
    pub phi: Vec<Vec<usize>>,
    /// Sum (additive, exponent form) or product (multiplicative values).
    pub value: Scalar,
}

/// One `+1` and one `−1` entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryShift {
    pub up: usize,
    pub down: usize,
}

/// Result of [`find_generic_shift`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPlan {
    pub shift_class: usize,
    pub vector: Vec<i64>,
    /// Steps walking from the shifted eigenvalues back to the original ones.
    pub steps: Vec<ElementaryShift>,
    /// Whether relations, once present along the walk, persist to its end.
    pub condition_r: bool,
}

impl EigenvalueSystem {
    pub fn new(mode: Mode, repr: Representation, classes: Vec<Vec<Scalar>>) -> Result<Self> {
        ensure!(!classes.is_empty(), Precondition, "no classes");
        let n = classes[0].len();
        ensure!(classes.iter().all(|c| c.len() == n), Dimension, "classes have different sizes");
        ensure!(
            mode == Mode::Multiplicative || repr == Representation::Values,
            Precondition,
            "exponent form is multiplicative only"
        );
        if mode == Mode::Multiplicative && repr == Representation::Values {
            ensure!(classes.iter().flatten().all(|v| !v.is_zero()), Precondition, "zero multiplicative eigenvalue");
        }
        Ok(Self { mode, repr, classes })
    }

    pub fn additive(classes: Vec<Vec<Scalar>>) -> Result<Self> {
        Self::new(Mode::Additive, Representation::Values, classes)
    }

    pub fn from_classes(set: &ClassSet) -> Self {
        Self {
            mode: set.mode,
            repr: set.representation(),
            classes: set.classes.iter().map(|c| c.slots()).collect(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn classes(&self) -> &[Vec<Scalar>] {
        &self.classes
    }

    pub fn size(&self) -> usize {
        self.classes[0].len()
    }

    /// Copy with class `j` shifted by the integer vector `v`.
    pub fn shifted(&self, j: usize, v: &[i64]) -> Self {
        let mut out = self.clone();
        for (x, &d) in out.classes[j].iter_mut().zip(v) {
            *x += &Scalar::from_int(d);
        }
        out
    }

    /// Whether sums lie in `Z` rather than equal neutral.
    fn arithmetic(&self, modulo_integers: bool) -> Arith {
        match (self.mode, self.repr) {
            (Mode::Multiplicative, Representation::Values) => Arith::Product,
            (Mode::Multiplicative, Representation::Exponents) => Arith::SumModZ,
            (Mode::Additive, _) if modulo_integers => Arith::SumModZ,
            (Mode::Additive, _) => Arith::Sum,
        }
    }
}

#[derive(Clone, Copy)]
enum Arith {
    Sum,
    SumModZ,
    Product,
}

impl Arith {
    fn identity(self) -> Scalar {
        match self {
            Arith::Product => Scalar::one(),
            _ => Scalar::zero(),
        }
    }
    fn combine(self, a: &Scalar, b: &Scalar) -> Scalar {
        match self {
            Arith::Product => a * b,
            _ => a + b,
        }
    }
    fn key(self, a: &Scalar) -> Scalar {
        match self {
            Arith::SumModZ => a.mod_integers(),
            _ => a.clone(),
        }
    }
    /// Key of the value completing `a` to neutral.
    fn complement_key(self, a: &Scalar) -> Scalar {
        match self {
            Arith::Product => a.inv().expect("nonzero eigenvalues"),
            _ => self.key(&-a),
        }
    }
    fn is_neutral(self, a: &Scalar) -> bool {
        match self {
            Arith::Sum => a.is_zero(),
            Arith::SumModZ => a.is_integer(),
            Arith::Product => a.is_one(),
        }
    }
}

/// Total sum is 0 (product is 1; exponent sum is an integer).
pub fn check_neutrality(sys: &EigenvalueSystem) -> bool {
    let arith = sys.arithmetic(false);
    let total = sys.classes.iter().flatten().fold(arith.identity(), |acc, x| arith.combine(&acc, x));
    arith.is_neutral(&total)
}

/// Sub-multisets of size `m` of one class: first index choice per distinct
/// value multiset, with the aggregate.
fn sub_multisets(values: &[Scalar], m: usize, arith: Arith) -> Vec<(Vec<usize>, Scalar)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for idx in (0..values.len()).combinations(m) {
        let mut key: Vec<&Scalar> = idx.iter().map(|&i| &values[i]).collect();
        key.sort();
        if seen.insert(key) {
            let agg = idx.iter().fold(arith.identity(), |acc, &i| arith.combine(&acc, &values[i]));
            out.push((idx, agg));
        }
    }
    out
}

fn relations_of_size(sys: &EigenvalueSystem, m: usize, arith: Arith) -> Vec<NonGenericityRelation> {
    let per_class: Vec<Vec<(Vec<usize>, Scalar)>> =
        sys.classes.iter().map(|c| sub_multisets(c, m, arith)).collect();
    let (last, rest) = per_class.split_last().expect("nonempty");
    let mut lookup: BTreeMap<Scalar, Vec<usize>> = BTreeMap::new();
    for (i, (_, agg)) in last.iter().enumerate() {
        lookup.entry(arith.key(agg)).or_default().push(i);
    }
    let mut out = Vec::new();
    let mut choice = Vec::with_capacity(rest.len());
    fn rec(
        rest: &[Vec<(Vec<usize>, Scalar)>],
        last: &[(Vec<usize>, Scalar)],
        lookup: &BTreeMap<Scalar, Vec<usize>>,
        arith: Arith,
        m: usize,
        acc: Scalar,
        choice: &mut Vec<usize>,
        out: &mut Vec<NonGenericityRelation>,
    ) {
        let j = choice.len();
        if j == rest.len() {
            if let Some(hits) = lookup.get(&arith.complement_key(&acc)) {
                for &h in hits {
                    let mut phi: Vec<Vec<usize>> =
                        choice.iter().enumerate().map(|(c, &i)| rest[c][i].0.clone()).collect();
                    phi.push(last[h].0.clone());
                    out.push(NonGenericityRelation { m, phi, value: arith.combine(&acc, &last[h].1) });
                }
            }
            return;
        }
        for (i, (_, agg)) in rest[j].iter().enumerate() {
            choice.push(i);
            rec(rest, last, lookup, arith, m, arith.combine(&acc, agg), choice, out);
            choice.pop();
        }
    }
    rec(rest, last, &lookup, arith, m, arith.identity(), &mut choice, &mut out);
    out
}

/// All non-genericity relations with `1 ≤ m < n`, deduplicated by value
/// multisets. With `modulo_integers` (additive mode) sums in `Z` count.
pub fn find_relations(sys: &EigenvalueSystem, modulo_integers: bool) -> Result<Vec<NonGenericityRelation>> {
    find_relations_with(sys, modulo_integers, DEFAULT_RELATION_CAP, Execution::default())
}

pub fn find_relations_with(
    sys: &EigenvalueSystem,
    modulo_integers: bool,
    cap: usize,
    exec: Execution,
) -> Result<Vec<NonGenericityRelation>> {
    let n = sys.size();
    if n > cap {
        return Err(DspError::CapExceeded(format!("n = {n} exceeds relation cap {cap}")));
    }
    let arith = sys.arithmetic(modulo_integers);
    let sizes: Vec<usize> = (1..n).collect();
    Ok(par::map(exec, &sizes, |&m| relations_of_size(sys, m, arith)).into_iter().flatten().collect())
}

pub fn is_generic(sys: &EigenvalueSystem) -> Result<bool> {
    Ok(find_relations(sys, false)?.is_empty())
}

/// Every relation as slot choices, without value deduplication. Used to
/// track individual relations along a shift walk.
fn slot_relations(sys: &EigenvalueSystem) -> BTreeSet<Vec<Vec<usize>>> {
    let arith = sys.arithmetic(false);
    let n = sys.size();
    let mut out = BTreeSet::new();
    for m in 1..n {
        let per_class: Vec<Vec<(Vec<usize>, Scalar)>> = sys
            .classes
            .iter()
            .map(|c| {
                (0..n)
                    .combinations(m)
                    .map(|idx| {
                        let agg = idx.iter().fold(arith.identity(), |a, &i| arith.combine(&a, &c[i]));
                        (idx, agg)
                    })
                    .collect()
            })
            .collect();
        for pick in per_class.iter().map(|c| 0..c.len()).multi_cartesian_product() {
            let total = pick
                .iter()
                .enumerate()
                .fold(arith.identity(), |a, (j, &i)| arith.combine(&a, &per_class[j][i].1));
            if arith.is_neutral(&total) {
                out.insert(pick.iter().enumerate().map(|(j, &i)| per_class[j][i].0.clone()).collect());
            }
        }
    }
    out
}

/// Shift vectors with `Σv = 0` and `max|v_k| = s`, lexicographic.
fn shell(n: usize, s: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    fn rec(n: usize, s: i64, acc: &mut Vec<i64>, sum: i64, out: &mut Vec<Vec<i64>>) {
        let left = (n - acc.len()) as i64;
        if left == 0 {
            if sum == 0 && acc.iter().any(|x| x.abs() == s) {
                out.push(acc.clone());
            }
            return;
        }
        for x in -s..=s {
            let rest = sum + x;
            if rest.abs() <= (left - 1) * s {
                acc.push(x);
                rec(n, s, acc, rest, out);
                acc.pop();
            }
        }
    }
    rec(n, s, &mut Vec::new(), 0, &mut out);
    out
}

/// Smallest integer shift (by max-norm, then lexicographic) of one class
/// making the system generic, with a step decomposition.
pub fn find_generic_shift(sys: &EigenvalueSystem, shift_class: usize, bound: u32) -> Result<ShiftPlan> {
    ensure!(sys.mode == Mode::Additive, Precondition, "integer shifts need additive mode");
    ensure!(shift_class < sys.classes.len(), Precondition, "class index {shift_class} out of range");
    let n = sys.size();
    if is_generic(sys)? {
        return Ok(ShiftPlan { shift_class, vector: vec![0; n], steps: Vec::new(), condition_r: true });
    }
    for s in 1..=bound as i64 {
        for v in shell(n, s) {
            if is_generic(&sys.shifted(shift_class, &v))? {
                let (steps, condition_r) = plan_steps(sys, shift_class, &v);
                return Ok(ShiftPlan { shift_class, vector: v, steps, condition_r });
            }
        }
    }
    Err(DspError::NotFound(format!("no generic shift with entries in [-{bound}, {bound}]")))
}

/// Orders the elementary steps. Built from the original eigenvalues
/// outward: each step may only destroy relations; the returned list is the
/// reverse walk, from the shifted eigenvalues back.
fn plan_steps(sys: &EigenvalueSystem, j: usize, v: &[i64]) -> (Vec<ElementaryShift>, bool) {
    let n = v.len();
    let start: Vec<i64> = vec![0; n];
    let relations_at = |pos: &[i64]| slot_relations(&sys.shifted(j, pos));
    let candidates = |pos: &[i64]| -> Vec<(usize, usize)> {
        let ups: Vec<usize> = (0..n).filter(|&k| pos[k] < v[k]).collect();
        let downs: Vec<usize> = (0..n).filter(|&k| pos[k] > v[k]).collect();
        ups.iter().flat_map(|&a| downs.iter().map(move |&b| (a, b))).collect()
    };
    let apply = |pos: &[i64], (a, b): (usize, usize)| {
        let mut p = pos.to_vec();
        p[a] += 1;
        p[b] -= 1;
        p
    };

    // greedy
    let mut pos = start.clone();
    let mut current = relations_at(&pos);
    let mut order = Vec::new();
    let mut ok = true;
    while pos != v {
        let mut best: Option<((usize, usize), BTreeSet<Vec<Vec<usize>>>, usize)> = None;
        let mut fallback = None;
        for c in candidates(&pos) {
            let next = relations_at(&apply(&pos, c));
            fallback.get_or_insert(c);
            if !next.is_subset(&current) {
                continue;
            }
            let destroyed = current.len() - next.len();
            if best.as_ref().is_none_or(|(_, _, d)| destroyed > *d) {
                best = Some((c, next, destroyed));
            }
        }
        let (c, next) = match best {
            Some((c, next, _)) => (c, next),
            None => {
                ok = false;
                let c = fallback.expect("steps remain");
                (c, relations_at(&apply(&pos, c)))
            }
        };
        pos = apply(&pos, c);
        current = next;
        order.push(c);
    }

    if !ok && sys.classes.len() <= 4 && n <= 4 {
        fn dfs(
            pos: Vec<i64>,
            current: BTreeSet<Vec<Vec<usize>>>,
            target: &[i64],
            order: &mut Vec<(usize, usize)>,
            step: &dyn Fn(&[i64]) -> Vec<((usize, usize), Vec<i64>, BTreeSet<Vec<Vec<usize>>>)>,
        ) -> bool {
            if pos == target {
                return true;
            }
            for (c, p, next) in step(&pos) {
                if next.is_subset(&current) {
                    order.push(c);
                    if dfs(p, next, target, order, step) {
                        return true;
                    }
                    order.pop();
                }
            }
            false
        }
        let step = |p: &[i64]| {
            candidates(p)
                .into_iter()
                .map(|c| {
                    let q = apply(p, c);
                    let r = relations_at(&q);
                    (c, q, r)
                })
                .collect()
        };
        let mut exhaustive = Vec::new();
        if dfs(start.clone(), relations_at(&start), v, &mut exhaustive, &step) {
            order = exhaustive;
            ok = true;
        }
    }

    // Walking back from v undoes each outward step in reverse order.
    let steps = order.into_iter().rev().map(|(a, b)| ElementaryShift { up: b, down: a }).collect();
    (steps, ok)
}
