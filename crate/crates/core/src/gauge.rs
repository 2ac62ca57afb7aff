//! Fuchsian systems `dX/dt = Σ_j A_j/(t − a_j) X` and the rank-one gauge
//! transformation `X ↦ (I + W/(t − a_{p+1})) X` that moves one eigenvalue
//! of the last residue down by one and another up by one.
//!
//! The transformed system is computed symbolically in partial-fraction
//! form; the closed-form residue updates serve as cross-checks.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::class::ClassSpec;
use crate::eigen::eigen_data;
use crate::error::{ensure, DspError, Result};
use crate::ext::split_direct_sum;
use crate::matrix::Matrix;
use crate::poly::{char_poly, Poly};
use crate::random::{rng, small_int};
use crate::rmf::RationalMatrixFunction;
use crate::scalar::Scalar;
use crate::tuple::{class_membership, is_irreducible, MatrixTuple};

/// Retries of [`perturb_for_procedure`].
pub const PERTURB_ATTEMPTS: usize = 24;

/// Residues `A_1, …, A_{p+1}` at distinct poles `a_1, …, a_{p+1}` with
/// `Σ A_j = 0`. Procedures need the last residue diagonal; its diagonal
/// fixes the eigenvalue order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct FuchsianSystem {
    poles: Vec<Scalar>,
    residues: Vec<Matrix>,
}

#[derive(Deserialize)]
struct RawSystem {
    poles: Vec<Scalar>,
    #[serde(alias = "matrices")]
    residues: Vec<Matrix>,
}

impl TryFrom<RawSystem> for FuchsianSystem {
    type Error = DspError;
    fn try_from(raw: RawSystem) -> Result<Self> {
        FuchsianSystem::new(raw.poles, raw.residues)
    }
}

impl FuchsianSystem {
    pub fn new(poles: Vec<Scalar>, residues: Vec<Matrix>) -> Result<Self> {
        ensure!(residues.len() >= 2, Precondition, "a Fuchsian system needs at least two poles");
        ensure!(poles.len() == residues.len(), Dimension, "{} poles for {} residues", poles.len(), residues.len());
        let n = residues[0].rows();
        ensure!(residues.iter().all(|m| m.rows() == n && m.cols() == n), Dimension, "residues must all be {n}×{n}");
        for (i, a) in poles.iter().enumerate() {
            ensure!(!poles[..i].contains(a), Precondition, "pole {a} is repeated");
        }
        let sum = residues.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
        ensure!(sum.is_zero(), Precondition, "residues must sum to zero");
        Ok(Self { poles, residues })
    }

    /// Poles `0, 1, …, p`.
    pub fn with_default_poles(residues: Vec<Matrix>) -> Result<Self> {
        let poles = (0..residues.len()).map(|j| Scalar::from_int(j as i64)).collect();
        Self::new(poles, residues)
    }

    /// Conjugates so that the last residue is diagonal. Returns the system
    /// and the conjugator `P` (new residues are `P⁻¹ A_j P`).
    pub fn diagonalized(&self) -> Result<(Self, Matrix)> {
        let last = self.residues.last().unwrap();
        if last.is_diagonal() {
            return Ok((self.clone(), Matrix::identity(self.size())));
        }
        let data = eigen_data(last)
            .ok_or_else(|| DspError::Precondition("last residue has eigenvalues outside Q(i)".into()))?;
        let target: Vec<Scalar> =
            data.iter().flat_map(|(v, p)| std::iter::repeat_n(v.clone(), p.total())).collect();
        let p = diagonalizer(last, &target)?;
        Ok((self.conjugated(&p)?, p))
    }

    pub fn poles(&self) -> &[Scalar] {
        &self.poles
    }

    pub fn residues(&self) -> &[Matrix] {
        &self.residues
    }

    pub fn size(&self) -> usize {
        self.residues[0].rows()
    }

    /// Number of poles, `p + 1`.
    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.residues.last().unwrap().is_diagonal()
    }

    /// Diagonal of the last residue.
    pub fn eigenvalues(&self) -> Vec<Scalar> {
        self.residues.last().unwrap().diagonal()
    }

    pub fn tuple(&self) -> MatrixTuple {
        MatrixTuple::additive(self.residues.clone()).expect("validated shapes")
    }

    pub fn rational_function(&self) -> RationalMatrixFunction {
        RationalMatrixFunction::fuchsian(&self.poles, &self.residues)
    }

    pub fn conjugated(&self, p: &Matrix) -> Result<Self> {
        let t = self.tuple().conjugated(p)?;
        Ok(Self { poles: self.poles.clone(), residues: t.matrices })
    }

    fn last_pole(&self) -> &Scalar {
        self.poles.last().unwrap()
    }
}

/// `F = Σ_{j≤p} A_j/(a_{p+1} − a_j)`, the constant Laurent coefficient at
/// the last pole.
pub fn laurent_constant_term(sys: &FuchsianSystem) -> Matrix {
    let a = sys.last_pole();
    let n = sys.size();
    sys.poles.iter().zip(&sys.residues).take(sys.len() - 1).fold(Matrix::zeros(n, n), |acc, (aj, m)| {
        &acc + &m.scale(&(a - aj).inv().expect("distinct poles"))
    })
}

/// Coefficient of `(t − a_{p+1})` in the Laurent expansion at the last pole.
fn laurent_linear_term(sys: &FuchsianSystem) -> Matrix {
    let a = sys.last_pole();
    let n = sys.size();
    sys.poles.iter().zip(&sys.residues).take(sys.len() - 1).fold(Matrix::zeros(n, n), |acc, (aj, m)| {
        &acc - &m.scale(&(a - aj).pow(2).inv().expect("distinct poles"))
    })
}

/// Conjugator `P` with `P⁻¹ m P = diag(target)`.
pub fn diagonalizer(m: &Matrix, target: &[Scalar]) -> Result<Matrix> {
    let n = m.rows();
    let mut columns: Vec<Option<_>> = vec![None; n];
    let mut done: Vec<&Scalar> = Vec::new();
    for mu in target {
        if done.contains(&mu) {
            continue;
        }
        done.push(mu);
        let slots: Vec<usize> = (0..n).filter(|&i| &target[i] == mu).collect();
        let space = (m - &Matrix::scalar(n, mu.clone())).kernel_basis();
        ensure!(
            space.len() == slots.len(),
            Construction,
            "residue is not diagonalizable at eigenvalue {mu} ({} eigenvectors for multiplicity {})",
            space.len(),
            slots.len()
        );
        for (i, v) in slots.into_iter().zip(space) {
            columns[i] = Some(v);
        }
    }
    let cols: Vec<_> = columns.into_iter().collect::<Option<_>>().ok_or_else(|| {
        DspError::Construction("target eigenvalues do not match the residue".into())
    })?;
    let p = Matrix::from_columns(n, &cols);
    ensure!(p.determinant() != Scalar::zero(), Construction, "eigenvectors are dependent");
    Ok(p)
}

/// Audit record of one Procedure (l,k). Indexes are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcedureStep {
    pub l: usize,
    pub k: usize,
    /// `F[l][k]`.
    pub c: Scalar,
    /// Nonzero entry of `W`, at row `k`, column `l`.
    pub w: Scalar,
    /// Re-diagonalizing conjugator applied after the gauge change.
    pub conjugator: Matrix,
    pub eigenvalues_before: Vec<Scalar>,
    pub eigenvalues_after: Vec<Scalar>,
}

/// Procedure (l,k): lowers eigenvalue `l` and raises eigenvalue `k` of the
/// last residue by one, keeping the classes of the other residues. The
/// result has a diagonal last residue in the same slot order.
pub fn procedure_lk(sys: &FuchsianSystem, l: usize, k: usize) -> Result<(FuchsianSystem, ProcedureStep)> {
    let n = sys.size();
    ensure!(l != k && l < n && k < n, Precondition, "need distinct indexes below {n}, got l={l}, k={k}");
    ensure!(sys.is_normalized(), Precondition, "last residue must be diagonal");
    let f = laurent_constant_term(sys);
    let c = f.get(l, k).clone();
    if c.is_zero() {
        return Err(DspError::ProcedureBlocked { l: l + 1, k: k + 1 });
    }
    let before = sys.eigenvalues();
    let w = &(&(&before[k] - &before[l]) + &Scalar::one()) / &c;
    let gauge = Matrix::unit(n, n, k, l).scale(&w);
    let a = sys.last_pole().clone();

    let monomial = Poly::new((0..=n).map(|i| if i == n { Scalar::one() } else { Scalar::zero() }).collect());
    ensure!(char_poly(&gauge) == monomial, Invariant, "det(I + W/(t − a)) is not identically 1");
    let v = RationalMatrixFunction::identity(n).add(&RationalMatrixFunction::simple_pole(&a, gauge.clone()));
    let vinv = RationalMatrixFunction::inverse_unipotent_pole(&a, &gauge)
        .ok_or_else(|| DspError::Invariant("gauge matrix is not nilpotent".into()))?;
    ensure!(v.mul(&vinv) == RationalMatrixFunction::identity(n), Invariant, "gauge inverse is wrong");

    let system = sys.rational_function();
    let transformed = vinv.mul(&v.derivative()).neg().add(&vinv.mul(&system).mul(&v));
    ensure!(transformed.is_fuchsian(), Invariant, "transformed system is not Fuchsian (double pole left over)");
    ensure!(
        transformed.poles().keys().all(|p| sys.poles.contains(p)),
        Invariant,
        "transformed system has a new pole"
    );
    let residues: Vec<Matrix> = sys.poles.iter().map(|p| transformed.residue(p)).collect();
    let sum = residues.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
    ensure!(sum.is_zero(), Invariant, "transformed residues do not sum to zero");

    let p = sys.len() - 1;
    for j in 0..p {
        let s = (&sys.poles[j] - &a).inv().expect("distinct poles");
        let vj = &Matrix::identity(n) + &gauge.scale(&s);
        let vj_inv = &Matrix::identity(n) - &gauge.scale(&s);
        ensure!(residues[j] == &(&vj_inv * &sys.residues[j]) * &vj, Invariant, "residue {j} differs from V(a_j)⁻¹A_jV(a_j)");
        if let Some(spec) = ClassSpec::of_matrix(&sys.residues[j]) {
            ensure!(class_membership(&residues[j], &spec), Invariant, "residue {j} left its class");
        }
    }
    let g = laurent_linear_term(sys);
    let oracle = &(&sys.residues[p] + &Matrix::commutator(&f, &gauge)) - &(&(&gauge * &g) * &gauge);
    ensure!(residues[p] == oracle, Invariant, "last residue differs from the closed form");

    let mut after = before.clone();
    after[l] = &after[l] - &Scalar::one();
    after[k] = &after[k] + &Scalar::one();
    let expected = after.iter().fold(Poly::constant(Scalar::one()), |acc, x| acc.mul(&Poly::linear_root(x)));
    ensure!(char_poly(&residues[p]) == expected, Invariant, "last residue eigenvalues are not shifted by (−1, +1)");

    let conjugator = diagonalizer(&residues[p], &after)?;
    let out = FuchsianSystem { poles: sys.poles.clone(), residues }.conjugated(&conjugator)?;
    ensure!(out.eigenvalues() == after && out.is_normalized(), Invariant, "re-diagonalization failed");
    let step = ProcedureStep { l, k, c, w, conjugator, eigenvalues_before: before, eigenvalues_after: after };
    Ok((out, step))
}

/// Moves poles `a_1..a_p` by steps of size `1/2, 1/4, …` and, on
/// alternate tries, conjugates a pair `A_i, A_j` (`i, j ≤ p`) by
/// `I + ε(A_i + A_j)^m`, which commutes with their sum. Stops once
/// `F[l][k] ≠ 0`.
fn unblock(sys: &FuchsianSystem, l: usize, k: usize, seed: u64) -> Option<FuchsianSystem> {
    let mut r = rng(seed);
    let p = sys.len() - 1;
    let n = sys.size();
    for attempt in 0..PERTURB_ATTEMPTS {
        let size = Scalar::from_frac(1, 1i64 << (attempt / 2 + 1).min(40));
        let mut cand = sys.clone();
        for a in cand.poles.iter_mut().take(p) {
            *a = &*a + &(&size * &Scalar::from_int(small_int(&mut r, 2)));
        }
        if (0..=p).any(|i| cand.poles[..i].contains(&cand.poles[i])) {
            continue;
        }
        if attempt % 2 == 1 && p >= 2 {
            let i = r.gen_range(0..p);
            let j = (i + r.gen_range(1..p)) % p;
            let sum = &cand.residues[i] + &cand.residues[j];
            let power = sum.pow(r.gen_range(1..=2));
            let c = &Matrix::identity(n) + &power.scale(&(&size * &Scalar::from_int([-1, 1][r.gen_range(0..2)])));
            if let Some(cinv) = c.inverse() {
                for idx in [i, j] {
                    cand.residues[idx] = &(&cinv * &cand.residues[idx]) * &c;
                }
            }
        }
        if !laurent_constant_term(&cand).get(l, k).is_zero() {
            return Some(cand);
        }
    }
    None
}

/// Same classes and last residue, nearby poles, and `F[l][k] ≠ 0`.
/// Unchanged when the entry is already nonzero.
pub fn perturb_for_procedure(sys: &FuchsianSystem, l: usize, k: usize, seed: u64) -> Result<FuchsianSystem> {
    let n = sys.size();
    ensure!(l != k && l < n && k < n, Precondition, "need distinct indexes below {n}, got l={l}, k={k}");
    if !laurent_constant_term(sys).get(l, k).is_zero() {
        return Ok(sys.clone());
    }
    ensure!(is_irreducible(&sys.tuple()), Precondition, "residue tuple is reducible");
    unblock(sys, l, k, seed).ok_or_else(|| {
        DspError::Construction(format!("F[{l},{k}] still vanishes after {PERTURB_ATTEMPTS} perturbations"))
    })
}

/// One step of a walk, with global slot indexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkStep {
    pub l: usize,
    pub k: usize,
    pub perturbed: bool,
    /// Slots of the direct summand the step acted on, when the walk had to
    /// split a reducible system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<Vec<usize>>,
    pub procedure: ProcedureStep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Walk {
    pub system: FuchsianSystem,
    pub steps: Vec<WalkStep>,
    /// Direct-sum splittings performed, as slot lists.
    pub splits: Vec<Vec<Vec<usize>>>,
}

/// Shifts the last residue's eigenvalues by the zero-sum integer vector `v`
/// through a sequence of Procedures (l,k).
pub fn shift_walk(sys: &FuchsianSystem, v: &[i64], seed: u64) -> Result<Walk> {
    ensure!(v.len() == sys.size(), Dimension, "shift has {} entries for n = {}", v.len(), sys.size());
    ensure!(v.iter().sum::<i64>() == 0, Precondition, "shift components must sum to zero");
    ensure!(sys.is_normalized(), Precondition, "last residue must be diagonal");
    let initial = sys.eigenvalues();
    let walk = walk(sys, v, seed)?;
    let expected: Vec<Scalar> = initial.iter().zip(v).map(|(x, d)| x + &Scalar::from_int(*d)).collect();
    ensure!(walk.system.eigenvalues() == expected, Invariant, "walk ended at the wrong eigenvalues");
    Ok(walk)
}

fn walk(sys: &FuchsianSystem, v: &[i64], seed: u64) -> Result<Walk> {
    let n = sys.size();
    let mut cur = sys.clone();
    let mut rem = v.to_vec();
    let mut steps = Vec::new();
    let mut splits = Vec::new();
    while rem.iter().any(|&x| x != 0) {
        let pairs: Vec<(usize, usize)> = (0..n)
            .filter(|&l| rem[l] < 0)
            .flat_map(|l| (0..n).filter(|&k| rem[k] > 0).map(move |k| (l, k)))
            .collect();
        let mut progressed = false;
        for (i, &(l, k)) in pairs.iter().enumerate() {
            let blocked = laurent_constant_term(&cur).get(l, k).is_zero();
            let base = if blocked {
                match unblock(&cur, l, k, seed.wrapping_add((steps.len() * 64 + i) as u64)) {
                    Some(s) => s,
                    None => continue,
                }
            } else {
                cur.clone()
            };
            match procedure_lk(&base, l, k) {
                Ok((next, procedure)) => {
                    cur = next;
                    rem[l] += 1;
                    rem[k] -= 1;
                    steps.push(WalkStep { l, k, perturbed: blocked, block: None, procedure });
                    progressed = true;
                    break;
                }
                Err(DspError::ProcedureBlocked { .. } | DspError::Construction(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if progressed {
            continue;
        }
        ensure!(
            !is_irreducible(&cur.tuple()),
            Construction,
            "no admissible step for remaining shift {rem:?} on an irreducible system"
        );
        let inner = walk_split(&cur, &rem, seed.wrapping_add(7919))?;
        steps.extend(inner.steps);
        splits.extend(inner.splits);
        cur = inner.system;
        break;
    }
    Ok(Walk { system: cur, steps, splits })
}

/// Splits a reducible system into direct summands and walks each with its
/// share of the shift.
fn walk_split(sys: &FuchsianSystem, rem: &[i64], seed: u64) -> Result<Walk> {
    let n = sys.size();
    let split = split_direct_sum(&sys.tuple())
        .map_err(|e| DspError::Construction(format!("reducible system cannot be split: {e}")))?
        .ok_or_else(|| {
            DspError::Construction("reducible system with trivial centralizer blocks the walk".into())
        })?;
    let lam = sys.eigenvalues();
    let mut steps = Vec::new();
    let mut slot_lists = Vec::new();
    let mut block_systems = Vec::new();
    for block in &split.blocks {
        let last = block.matrices.last().unwrap();
        let mut slots: Vec<usize> = Vec::new();
        for (i, x) in lam.iter().enumerate() {
            if !(last - &Matrix::scalar(block.size(), x.clone())).kernel_basis().is_empty() {
                slots.push(i);
            }
        }
        ensure!(slots.len() == block.size(), Construction, "summand eigenvalues do not match slots");
        let target: Vec<Scalar> = slots.iter().map(|&i| lam[i].clone()).collect();
        let sub = FuchsianSystem::new(sys.poles.clone(), block.matrices.clone())?;
        let sub = sub.conjugated(&diagonalizer(last, &target)?)?;
        let share: Vec<i64> = slots.iter().map(|&i| rem[i]).collect();
        ensure!(
            share.iter().sum::<i64>() == 0,
            Construction,
            "shift moves eigenvalues between direct summands (slots {slots:?})"
        );
        let inner = walk(&sub, &share, seed.wrapping_add(slot_lists.len() as u64))?;
        for mut s in inner.steps {
            s.l = slots[s.l];
            s.k = slots[s.k];
            s.block = Some(s.block.map_or_else(|| slots.clone(), |b| b.iter().map(|&i| slots[i]).collect()));
            steps.push(s);
        }
        block_systems.push((slots.clone(), inner.system));
        slot_lists.push(slots);
    }
    let residues = (0..sys.len())
        .map(|j| {
            let mut m = Matrix::zeros(n, n);
            for (slots, b) in &block_systems {
                for (r, &i) in slots.iter().enumerate() {
                    for (c, &k) in slots.iter().enumerate() {
                        m.set(i, k, b.residues[j].get(r, c).clone());
                    }
                }
            }
            m
        })
        .collect();
    let system = FuchsianSystem::new(sys.poles.clone(), residues)?;
    ensure!(system.is_normalized(), Invariant, "reassembled system lost its diagonal residue");
    Ok(Walk { system, steps, splits: vec![slot_lists] })
}
