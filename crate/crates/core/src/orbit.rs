//! Exact moves inside conjugacy classes.
//!
//! For an `A`-invariant subspace `U` and `N` with `im N ⊆ U ⊆ ker N`, one
//! has `N² = 0` and `NAN = 0`, so `(I − N) A (I + N) = A + [A, N]`. The
//! conjugated matrix depends linearly on `N`, which turns "change the sum
//! of a tuple by a prescribed amount while staying in the classes" into a
//! linear system.
//!
//! A semisimple `A` with at least three eigenvalues allows more: for `Y`
//! block strictly upper triangular in an eigenbasis grouped by eigenvalue,
//! `A + [A, Y]` is block triangular with the same scalar diagonal blocks,
//! hence still in the class. Such `Y` are stored next to the radicals and
//! applied the same way.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::eigen::{generalized_kernel, invariant_subspaces, unipotent_radical, EigenData};
use crate::error::{DspError, Result};
use crate::matrix::{hstack, Matrix};
use crate::random::DspRng;
use crate::scalar::Scalar;

/// Candidate invariant subspaces examined per matrix.
const SUBSPACE_CAP: usize = 64;
/// Eigenvalue orderings examined per semisimple matrix.
const FLAG_CAP: usize = 24;

/// `A + [A, N] = (I − N) A (I + N)` for square-zero `N` as above.
pub fn affine_move(a: &Matrix, n: &Matrix) -> Matrix {
    a + &Matrix::commutator(a, n)
}

/// The directions available to one matrix: one radical per invariant
/// subspace plus one block-triangular family per eigenvalue ordering, with
/// `[A, N]` precomputed for each basis element.
struct Freedom {
    radicals: Vec<Vec<Matrix>>,
    images: Vec<Matrix>,
}

impl Freedom {
    fn new(a: &Matrix, data: Option<&EigenData>) -> Self {
        let n = a.rows();
        let Some(data) = data else { return Freedom { radicals: Vec::new(), images: Vec::new() } };
        let mut radicals = eigenspace_flags(a, data);
        radicals.extend(
            invariant_subspaces(a, data, SUBSPACE_CAP).iter().map(|u| unipotent_radical(u, n)).filter(|r| !r.is_empty()),
        );
        let images = radicals
            .iter()
            .map(|r| {
                let cols: Vec<_> = r.iter().map(|x| Matrix::commutator(a, x).to_vector()).collect();
                Matrix::from_columns(n * n, &cols)
            })
            .collect();
        Freedom { radicals, images }
    }

    fn is_empty(&self) -> bool {
        self.radicals.is_empty()
    }
}

/// Bases of `P · (block strictly upper) · P⁻¹` for orderings of the
/// eigenspaces of a semisimple `a`. Empty below three eigenvalues, where the
/// radicals already cover these moves.
fn eigenspace_flags(a: &Matrix, data: &EigenData) -> Vec<Vec<Matrix>> {
    let n = a.rows();
    if data.len() < 3 || data.iter().any(|(_, p)| p.parts().iter().any(|&s| s != 1)) {
        return Vec::new();
    }
    let spaces: Vec<_> = data.iter().map(|(v, _)| generalized_kernel(a, v, 1)).collect();
    let p = Matrix::from_columns(n, &spaces.concat());
    let Some(pinv) = p.inverse() else { return Vec::new() };
    let mut starts = vec![0];
    for s in &spaces {
        starts.push(starts.last().unwrap() + s.len());
    }
    let outer = |r: usize, c: usize| {
        let (col, row) = (p.column(r), pinv.row(c));
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, &col[i] * &row[j]);
            }
        }
        m
    };
    (0..spaces.len())
        .permutations(spaces.len())
        .take(FLAG_CAP)
        .map(|order| {
            let mut basis = Vec::new();
            for (s, &hi) in order.iter().enumerate() {
                for &lo in &order[s + 1..] {
                    for r in starts[hi]..starts[hi + 1] {
                        for c in starts[lo]..starts[lo + 1] {
                            basis.push(outer(r, c));
                        }
                    }
                }
            }
            basis
        })
        .collect()
}

/// Selected subspace per matrix (`None` for a frozen matrix).
type Choice = Vec<Option<usize>>;

fn choices(freedom: &[Freedom], rng: &mut DspRng, attempts: usize) -> Vec<Choice> {
    let mut out = Vec::with_capacity(attempts);
    out.push(freedom.iter().map(|f| (!f.is_empty()).then_some(0)).collect());
    for _ in 1..attempts {
        out.push(freedom.iter().map(|f| (!f.is_empty()).then(|| rng.gen_range(0..f.radicals.len()))).collect());
    }
    out
}

fn operator(freedom: &[Freedom], choice: &Choice) -> Option<Matrix> {
    let blocks: Vec<Matrix> =
        freedom.iter().zip(choice).filter_map(|(f, c)| c.map(|i| f.images[i].clone())).collect();
    (!blocks.is_empty()).then(|| hstack(&blocks))
}

fn assemble(freedom: &[Freedom], choice: &Choice, coeffs: &[Scalar], n: usize) -> Vec<Matrix> {
    let mut offset = 0;
    freedom
        .iter()
        .zip(choice)
        .map(|(f, c)| match c {
            None => Matrix::zeros(n, n),
            Some(i) => {
                let basis = &f.radicals[*i];
                let m = basis
                    .iter()
                    .zip(&coeffs[offset..offset + basis.len()])
                    .fold(Matrix::zeros(n, n), |acc, (b, x)| &acc + &b.scale(x));
                offset += basis.len();
                m
            }
        })
        .collect()
}

/// Square-zero `N_j` with `Σ_j [A_j, N_j] = rhs`. Matrices without eigen
/// data stay fixed. Tries `attempts` subspace choices.
pub fn solve_affine(
    matrices: &[Matrix],
    eigen: &[Option<EigenData>],
    rhs: &Matrix,
    rng: &mut DspRng,
    attempts: usize,
) -> Result<Vec<Matrix>> {
    let n = rhs.rows();
    if rhs.is_zero() {
        return Ok(vec![Matrix::zeros(n, n); matrices.len()]);
    }
    let freedom: Vec<Freedom> = matrices.iter().zip(eigen).map(|(a, d)| Freedom::new(a, d.as_ref())).collect();
    let target = rhs.to_vector();
    for choice in choices(&freedom, rng, attempts.max(1)) {
        let Some(op) = operator(&freedom, &choice) else { break };
        if let Some(x) = op.solve_linear(&target) {
            return Ok(assemble(&freedom, &choice, &x, n));
        }
    }
    Err(DspError::Construction(format!("no class-preserving correction found in {attempts} subspace choices")))
}

/// Upper bound on the rank of the linear system [`solve_affine`] sets up:
/// `Σ_j` of the largest `dim [A_j, rad U]` over the invariant subspaces
/// examined. Below `n² − 1` a generic right-hand side is out of reach.
pub fn affine_capacity(matrices: &[Matrix], eigen: &[Option<EigenData>]) -> usize {
    matrices
        .iter()
        .zip(eigen)
        .map(|(a, d)| Freedom::new(a, d.as_ref()).images.iter().map(Matrix::rank).max().unwrap_or(0))
        .sum()
}

/// Applies `N_j` to each matrix.
pub fn apply_moves(matrices: &[Matrix], moves: &[Matrix]) -> Vec<Matrix> {
    matrices.iter().zip(moves).map(|(a, n)| affine_move(a, n)).collect()
}

/// Random nonzero solution of `Σ_j [A_j, N_j] = 0`: a move inside the
/// classes keeping the sum. Matrices marked `frozen` stay fixed.
pub fn random_sum_preserving_move(
    matrices: &[Matrix],
    eigen: &[Option<EigenData>],
    frozen: &[bool],
    rng: &mut DspRng,
    attempts: usize,
) -> Option<Vec<Matrix>> {
    let n = matrices.first()?.rows();
    let freedom: Vec<Freedom> = matrices
        .iter()
        .zip(eigen)
        .zip(frozen)
        .map(|((a, d), &fz)| Freedom::new(a, if fz { None } else { d.as_ref() }))
        .collect();
    let mut all = choices(&freedom, rng, attempts.max(1));
    all.shuffle(rng);
    for choice in all {
        let op = operator(&freedom, &choice)?;
        let kernel = op.kernel_basis();
        if kernel.is_empty() {
            continue;
        }
        let mut coeffs = vec![Scalar::from_int(0); op.cols()];
        for k in &kernel {
            let w = Scalar::from_int(rng.gen_range(-2..=2));
            for (c, x) in coeffs.iter_mut().zip(k) {
                *c += &(&w * x);
            }
        }
        let moves = assemble(&freedom, &choice, &coeffs, n);
        let moved = apply_moves(matrices, &moves);
        if moved != matrices {
            return Some(moved);
        }
    }
    None
}
