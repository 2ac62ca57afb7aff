//! Deforming a tuple with trivial centralizer while changing its classes in
//! a prescribed direction:
//! `Ã_j = (I + εX_j)⁻¹ Q_j (G_j + εV_j) Q_j⁻¹ (I + εX_j)`, with `G_j` the
//! Jordan form of `A_j = Q_j G_j Q_j⁻¹`. The first-order `X_j` come from a
//! linear solve; the exact constraint is then restored by moves inside the
//! deformed classes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::class::{ClassSpec, Mode};
use crate::eigen::{eigen_data, jordan_basis, EigenData};
use crate::error::{ensure, DspError, Result};
use crate::matrix::{hstack, Matrix};
use crate::orbit::{affine_capacity, apply_moves, solve_affine};
use crate::poly::char_poly;
use crate::random::{rng, small_int};
use crate::scalar::Scalar;
use crate::tuple::{centralizer, class_membership, constraint_residual, traceless_basis, MatrixTuple};

/// Exact Newton steps before giving up.
pub const NEWTON_CAP: usize = 2;
/// Subspace choices tried per exact correction.
const AFFINE_ATTEMPTS: usize = 96;
/// Resamples of the random entries in [`canned_split_eigenvalues`].
pub const RESAMPLE_CAP: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformationRequest {
    pub base: MatrixTuple,
    /// `V_j`, in the Jordan frame of `A_j` (see [`jordan_frame`]).
    pub directions: Vec<Matrix>,
}

/// `(Q, G)` with `A = Q G Q⁻¹`; the identity frame when `A` is already a
/// Jordan matrix in the order [`jordan_basis`] produces.
pub fn jordan_frame(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let data = eigen_data(a).ok_or_else(|| DspError::Precondition("eigenvalues outside Q(i)".into()))?;
    jordan_basis(a, &data)
}

/// First-order solution of the deformation problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstOrder {
    pub mode: Mode,
    pub base: Vec<Matrix>,
    pub frames: Vec<Matrix>,
    pub jordan: Vec<Matrix>,
    pub directions: Vec<Matrix>,
    /// `N_j = Q_j V_j Q_j⁻¹`.
    pub ambient: Vec<Matrix>,
    /// `X_j(0)`.
    pub x: Vec<Matrix>,
    /// Order-one coefficients `[A_j, X_j] + N_j`.
    pub linear: Vec<Matrix>,
}

fn prefix(ms: &[Matrix], j: usize, n: usize) -> Matrix {
    ms[..j].iter().fold(Matrix::identity(n), |acc, m| &acc * m)
}

fn suffix(ms: &[Matrix], j: usize, n: usize) -> Matrix {
    ms[j + 1..].iter().fold(Matrix::identity(n), |acc, m| &acc * m)
}

/// Differential of the constraint: `Σ_j P_j D_j S_j` with `P_j, S_j` the
/// products before and after `j` (identities in additive mode).
fn linearized(mode: Mode, ms: &[Matrix], ds: &[Matrix]) -> Matrix {
    let n = ms[0].rows();
    ds.iter().enumerate().fold(Matrix::zeros(n, n), |acc, (j, d)| match mode {
        Mode::Additive => &acc + d,
        Mode::Multiplicative => &acc + &(&(&prefix(ms, j, n) * d) * &suffix(ms, j, n)),
    })
}

/// Solves `Σ_j P_j [A_j, Y_j] S_j = rhs` for traceless `Y_j`.
fn solve_commutators(mode: Mode, ms: &[Matrix], rhs: &Matrix) -> Option<Vec<Matrix>> {
    let n = ms[0].rows();
    let basis = traceless_basis(n);
    let mut blocks = Vec::with_capacity(ms.len());
    for (j, a) in ms.iter().enumerate() {
        let (p, s) = match mode {
            Mode::Additive => (Matrix::identity(n), Matrix::identity(n)),
            Mode::Multiplicative => (prefix(ms, j, n), suffix(ms, j, n)),
        };
        let cols: Vec<_> = basis.iter().map(|e| (&(&p * &Matrix::commutator(a, e)) * &s).to_vector()).collect();
        blocks.push(Matrix::from_columns(n * n, &cols));
    }
    let coeffs = hstack(&blocks).solve_linear(&rhs.to_vector())?;
    Some(
        coeffs
            .chunks(basis.len())
            .map(|c| basis.iter().zip(c).fold(Matrix::zeros(n, n), |acc, (e, x)| &acc + &e.scale(x)))
            .collect(),
    )
}

fn conjugate_by_unipotent(a: &Matrix, y: &Matrix) -> Option<Matrix> {
    let g = &Matrix::identity(a.rows()) + y;
    Some(&(&g.inverse()? * a) * &g)
}

/// Exact `X_j(0)` with `Σ (order-one terms) = 0`.
pub fn first_order_deform(req: &DeformationRequest) -> Result<FirstOrder> {
    let base = &req.base;
    let n = base.size();
    let mode = base.mode;
    ensure!(req.directions.len() == base.len(), Dimension, "one direction per matrix expected");
    ensure!(
        req.directions.iter().all(|v| v.rows() == n && v.cols() == n),
        Dimension,
        "directions must be {n}×{n}"
    );
    ensure!(centralizer(base).is_trivial(), Precondition, "the base tuple has a non-trivial centralizer");
    let mut frames = Vec::new();
    let mut jordan = Vec::new();
    for (a, v) in base.matrices.iter().zip(&req.directions) {
        let (q, g) = if v.is_zero() { (Matrix::identity(n), a.clone()) } else { jordan_frame(a)? };
        frames.push(q);
        jordan.push(g);
    }
    let ambient: Vec<Matrix> = frames
        .iter()
        .zip(&req.directions)
        .map(|(q, v)| &(q * v) * &q.inverse().expect("frame is invertible"))
        .collect();
    match mode {
        Mode::Additive => {
            let tr = req.directions.iter().fold(Scalar::zero(), |acc, v| &acc + &v.trace());
            ensure!(tr.is_zero(), Precondition, "trace of the summed directions is {tr}, not 0");
        }
        Mode::Multiplicative => {
            let tr = base.matrices.iter().zip(&ambient).fold(Scalar::zero(), |acc, (m, d)| {
                &acc + &(&m.inverse().expect("invertible tuple") * d).trace()
            });
            ensure!(tr.is_zero(), Precondition, "first-order determinant condition fails: Σ tr(M⁻¹N) = {tr}");
        }
    }
    let rhs = -&linearized(mode, &base.matrices, &ambient);
    let x = solve_commutators(mode, &base.matrices, &rhs)
        .ok_or_else(|| DspError::Precondition("direction is not in the image of the commutator map".into()))?;
    let linear: Vec<Matrix> =
        base.matrices.iter().zip(&x).zip(&ambient).map(|((a, x), nj)| &Matrix::commutator(a, x) + nj).collect();
    ensure!(linearized(mode, &base.matrices, &linear).is_zero(), Invariant, "order-one terms do not cancel");
    Ok(FirstOrder {
        mode,
        base: base.matrices.clone(),
        frames,
        jordan,
        directions: req.directions.clone(),
        ambient,
        x,
        linear,
    })
}

impl FirstOrder {
    /// `A_j + εN_j`, a member of the deformed class.
    pub fn deformed_classes(&self, eps: &Scalar) -> Vec<Matrix> {
        self.base.iter().zip(&self.ambient).map(|(a, nj)| a + &nj.scale(eps)).collect()
    }

    /// `Ã_j` at `ε` before any correction; `None` when some `I + εX_j` is
    /// singular.
    pub fn instantiate(&self, eps: &Scalar) -> Option<Vec<Matrix>> {
        self.deformed_classes(eps).iter().zip(&self.x).map(|(b, x)| conjugate_by_unipotent(b, &x.scale(eps))).collect()
    }

    /// Constraint residual of [`FirstOrder::instantiate`]; `O(ε²)`.
    pub fn residual(&self, eps: &Scalar) -> Option<Matrix> {
        let t = MatrixTuple::new(self.mode, self.instantiate(eps)?).expect("square");
        Some(constraint_residual(&t))
    }
}

/// Restores the constraint exactly at `ε`, staying in the classes of
/// `G_j + εV_j`. Additive mode. Each round first tries a single exact move
/// inside the classes, then falls back to a Newton step. The fallback is
/// skipped when the exact moves cannot span the traceless matrices.
pub fn newton_correct(first: &FirstOrder, eps: &Scalar, seed: u64) -> Result<MatrixTuple> {
    ensure!(first.mode == Mode::Additive, Precondition, "exact correction is additive only; use float mode");
    let targets: Vec<Option<EigenData>> = first.deformed_classes(eps).iter().map(eigen_data).collect();
    let mut current = first
        .instantiate(eps)
        .ok_or_else(|| DspError::Construction(format!("I + εX is singular at ε = {eps}")))?;
    let mut r = rng(seed);
    let n = current[0].rows();
    let capacity = affine_capacity(&current, &targets);
    for _ in 0..=NEWTON_CAP {
        let residual = current.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m);
        if residual.is_zero() {
            break;
        }
        if let Ok(moves) = solve_affine(&current, &targets, &-&residual, &mut r, AFFINE_ATTEMPTS) {
            current = apply_moves(&current, &moves);
            break;
        }
        ensure!(
            capacity + 1 >= n * n,
            Construction,
            "exact correction has {capacity} class-preserving directions for {} constraints",
            n * n - 1
        );
        let ys = solve_commutators(Mode::Additive, &current, &-&residual)
            .ok_or_else(|| DspError::Construction("Newton step has no solution".into()))?;
        current = current
            .iter()
            .zip(&ys)
            .map(|(c, y)| conjugate_by_unipotent(c, y))
            .collect::<Option<_>>()
            .ok_or_else(|| DspError::Construction("Newton step hit a singular conjugator".into()))?;
    }
    let t = MatrixTuple::additive(current)?;
    ensure!(
        constraint_residual(&t).is_zero(),
        Construction,
        "constraint not restored within {NEWTON_CAP} Newton steps at ε = {eps}"
    );
    for (j, (m, d)) in t.matrices.iter().zip(&targets).enumerate() {
        if let Some(d) = d {
            ensure!(class_membership(m, &ClassSpec::from_eigen_data(d)), Invariant, "matrix {j} left its class");
        }
    }
    if targets.iter().all(Option::is_some) {
        let classes = targets.iter().map(|d| ClassSpec::from_eigen_data(d.as_ref().unwrap())).collect();
        return t.with_classes(classes);
    }
    Ok(t)
}

/// Floating-point tuple produced by [`newton_correct_float`].
#[derive(Clone, Debug, PartialEq)]
pub struct FloatTuple {
    pub mode: Mode,
    pub matrices: Vec<DMatrix<Complex64>>,
    pub residual: f64,
    pub iterations: usize,
}

impl Serialize for FloatTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<[f64; 2]>>> = self
            .matrices
            .iter()
            .map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|k| [m[(i, k)].re, m[(i, k)].im]).collect()).collect())
            .collect();
        let mut st = s.serialize_struct("FloatTuple", 4)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("matrices", &rows)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("iterations", &self.iterations)?;
        st.end()
    }
}

fn float_residual(mode: Mode, ms: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let n = ms[0].nrows();
    match mode {
        Mode::Additive => ms.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m),
        Mode::Multiplicative => ms.iter().fold(DMatrix::identity(n, n), |acc, m| acc * m) - DMatrix::identity(n, n),
    }
}

/// Gauss–Newton in floating point on the conjugating matrices, both modes.
pub fn newton_correct_float(first: &FirstOrder, eps: f64, tolerance: f64, max_iterations: usize) -> Result<FloatTuple> {
    let mode = first.mode;
    let n = first.base[0].rows();
    let e = Complex64::new(eps, 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut current: Vec<DMatrix<Complex64>> = first
        .base
        .iter()
        .zip(&first.ambient)
        .zip(&first.x)
        .map(|((a, nj), x)| {
            let g = &id + x.to_complex() * e;
            let gi = g.clone().try_inverse().ok_or_else(|| DspError::Construction("I + εX is singular".into()))?;
            Ok(gi * (a.to_complex() + nj.to_complex() * e) * g)
        })
        .collect::<Result<_>>()?;
    for it in 0..=max_iterations {
        let res = float_residual(mode, &current);
        let norm = res.norm();
        if norm < tolerance {
            return Ok(FloatTuple { mode, matrices: current, residual: norm, iterations: it });
        }
        if it == max_iterations {
            break;
        }
        let blocks = current.len();
        let mut jac = DMatrix::<Complex64>::zeros(n * n, blocks * n * n);
        for j in 0..blocks {
            let (p, s) = match mode {
                Mode::Additive => (id.clone(), id.clone()),
                Mode::Multiplicative => (
                    current[..j].iter().fold(id.clone(), |acc, m| acc * m),
                    current[j + 1..].iter().fold(id.clone(), |acc, m| acc * m),
                ),
            };
            for a in 0..n {
                for b in 0..n {
                    let mut unit = DMatrix::<Complex64>::zeros(n, n);
                    unit[(a, b)] = Complex64::new(1.0, 0.0);
                    let d = &p * (&current[j] * &unit - &unit * &current[j]) * &s;
                    for i in 0..n {
                        for k in 0..n {
                            jac[(i * n + k, j * n * n + a * n + b)] = d[(i, k)];
                        }
                    }
                }
            }
        }
        let rhs = DMatrix::from_fn(n * n, 1, |r, _| -res[(r / n, r % n)]);
        let step = jac
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| DspError::Construction(format!("least-squares step failed: {e}")))?;
        for (j, c) in current.iter_mut().enumerate() {
            let y = DMatrix::from_fn(n, n, |a, b| step[(j * n * n + a * n + b, 0)]);
            let g = &id + y;
            let gi = g.clone().try_inverse().ok_or_else(|| DspError::Construction("singular Newton step".into()))?;
            *c = gi * &*c * g;
        }
    }
    Err(DspError::Construction(format!("float Newton did not reach tolerance {tolerance} in {max_iterations} steps")))
}

fn checked_base(t: &MatrixTuple, which: usize) -> Result<()> {
    ensure!(which < t.len(), Precondition, "matrix index {which} out of range");
    ensure!(t.mode == Mode::Additive, Precondition, "canned deformations are additive only");
    ensure!(centralizer(t).is_trivial(), Precondition, "the tuple has a non-trivial centralizer");
    Ok(())
}

fn original_classes(t: &MatrixTuple) -> Vec<Option<ClassSpec>> {
    t.matrices.iter().map(ClassSpec::of_matrix).collect()
}

fn others_unchanged(out: &MatrixTuple, before: &[Option<ClassSpec>], which: usize) -> Result<()> {
    for (j, (m, c)) in out.matrices.iter().zip(before).enumerate() {
        if j != which {
            if let Some(c) = c {
                ensure!(class_membership(m, c), Invariant, "matrix {j} changed class");
            }
        }
    }
    Ok(())
}

fn directions_for(t: &MatrixTuple, which: usize, v: Matrix) -> DeformationRequest {
    let n = t.size();
    let directions = (0..t.len()).map(|j| if j == which { v.clone() } else { Matrix::zeros(n, n) }).collect();
    DeformationRequest { base: t.clone(), directions }
}

/// Merges two size-one Jordan blocks at `eigenvalue` of matrix `which` into
/// one block of size two, keeping the other classes.
pub fn canned_jnf_coarsen(
    t: &MatrixTuple,
    which: usize,
    eigenvalue: &Scalar,
    eps: &Scalar,
    seed: u64,
) -> Result<MatrixTuple> {
    checked_base(t, which)?;
    let a = &t.matrices[which];
    let (_, g) = jordan_frame(a)?;
    let n = t.size();
    let slots: Vec<usize> = (0..n)
        .filter(|&i| g.get(i, i) == eigenvalue)
        .filter(|&i| (i == 0 || g.get(i - 1, i).is_zero()) && (i + 1 == n || g.get(i, i + 1).is_zero()))
        .collect();
    ensure!(slots.len() >= 2, Precondition, "{eigenvalue} has fewer than two size-one Jordan blocks");
    if eps.is_zero() {
        return Ok(t.clone());
    }
    let before = original_classes(t);
    let req = directions_for(t, which, Matrix::unit(n, n, slots[0], slots[1]));
    let first = first_order_deform(&req)?;
    let out = newton_correct(&first, eps, seed)?;
    others_unchanged(&out, &before, which)?;
    let blocks = crate::eigen::jordan_partition(&out.matrices[which], eigenvalue);
    let mut want: Vec<usize> = crate::eigen::jordan_partition(a, eigenvalue).parts().to_vec();
    want.truncate(want.len() - 2);
    want.insert(0, 2);
    ensure!(blocks.parts() == want.as_slice(), Invariant, "coarsening produced blocks {:?}", blocks.parts());
    Ok(out)
}

/// Splits a size-two Jordan block of matrix `which` into two simple
/// eigenvalues `a ± εm`. The direction has `f` below the block, `g` and
/// `−g` on its diagonal (so the trace is kept), with `f = ε(m² − g²)` for
/// small random integers `m ≠ 0` and `g`.
pub fn canned_split_eigenvalues(t: &MatrixTuple, which: usize, eps: &Scalar, seed: u64) -> Result<MatrixTuple> {
    checked_base(t, which)?;
    let a = &t.matrices[which];
    let (_, g) = jordan_frame(a)?;
    let n = t.size();
    let start = (0..n.saturating_sub(1))
        .find(|&i| {
            !g.get(i, i + 1).is_zero()
                && (i + 2 >= n || g.get(i + 1, i + 2).is_zero())
                && (i == 0 || g.get(i - 1, i).is_zero())
        })
        .ok_or_else(|| DspError::Precondition("no Jordan block of size two".into()))?;
    if eps.is_zero() {
        return Ok(t.clone());
    }
    let lambda = g.get(start, start).clone();
    let others: Vec<Scalar> = (0..n).filter(|&i| i != start && i != start + 1).map(|i| g.get(i, i).clone()).collect();
    let before = original_classes(t);
    let mut r = rng(seed);
    for _ in 0..RESAMPLE_CAP {
        let m = small_int(&mut r, 3);
        let gg = Scalar::from_int(small_int(&mut r, 3));
        if m == 0 {
            continue;
        }
        let shift = eps * &Scalar::from_int(m);
        let new_values = [&lambda + &shift, &lambda - &shift];
        if new_values.iter().any(|x| others.contains(x)) {
            continue;
        }
        let f = eps * &(&Scalar::from_int(m * m) - &(&gg * &gg));
        let mut v = Matrix::zeros(n, n);
        v.set(start + 1, start, f);
        v.set(start + 1, start + 1, gg.clone());
        v.set(start, start, -&gg);
        if !char_poly(&(&g + &v.scale(eps))).is_squarefree() {
            continue;
        }
        let first = first_order_deform(&directions_for(t, which, v))?;
        let out = match newton_correct(&first, eps, seed.wrapping_add(1)) {
            Ok(out) => out,
            Err(DspError::Construction(_)) => continue,
            Err(e) => return Err(e),
        };
        others_unchanged(&out, &before, which)?;
        ensure!(
            char_poly(&out.matrices[which]).is_squarefree(),
            Invariant,
            "split matrix has a repeated eigenvalue"
        );
        return Ok(out);
    }
    Err(DspError::Construction(format!("no admissible (f, g) in {RESAMPLE_CAP} samples")))
}
