//! Extensions of one tuple by another: the spaces `R ⊇ Q`, `Ext¹ = R/Q`,
//! semidirect sums and their splitting.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::class::{ClassSpec, Mode};
use crate::eigen::{defect_r, eigen_data, EigenData};
use crate::error::{ensure, DspError, Result};
use crate::matrix::{hstack, left_right_operator, sylvester_operator, EchelonBasis, Matrix, Vector};
use crate::orbit::random_sum_preserving_move;
use crate::poly::char_poly;
use crate::random::rng;
use crate::scalar::Scalar;
use crate::tuple::{centralizer, class_membership, is_irreducible, orbit_dimension, satisfies_constraint, MatrixTuple};

/// Two tuples of sizes `m₁`, `m₂` whose last matrices have simple spectra
/// with no common eigenvalue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationPair {
    first: MatrixTuple,
    second: MatrixTuple,
}

/// Off-diagonal blocks `B_j` (`m₁ × m₂`) of a semidirect sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionClass {
    pub blocks: Vec<Matrix>,
}

/// Both computations of `dim Ext¹` plus the intermediate dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtReport {
    pub xi: i64,
    pub dim_r: usize,
    pub dim_q: usize,
    /// `dim R_j`: projection of `R` to the `j`-th block.
    pub dim_r_per_index: Vec<usize>,
    pub class_dimensions_sum: usize,
    pub class_dimensions_first: usize,
    pub class_dimensions_second: usize,
}

impl RepresentationPair {
    pub fn new(first: MatrixTuple, second: MatrixTuple) -> Result<Self> {
        ensure!(first.mode == second.mode, Precondition, "tuples use different modes");
        ensure!(first.len() == second.len(), Dimension, "tuples have different lengths");
        ensure!(satisfies_constraint(&first), Precondition, "first tuple violates its constraint");
        ensure!(satisfies_constraint(&second), Precondition, "second tuple violates its constraint");
        let c1 = char_poly(first.matrices.last().unwrap());
        let c2 = char_poly(second.matrices.last().unwrap());
        ensure!(c1.is_squarefree(), Precondition, "last matrix of the first tuple has a repeated eigenvalue");
        ensure!(c2.is_squarefree(), Precondition, "last matrix of the second tuple has a repeated eigenvalue");
        ensure!(c1.gcd(&c2).degree() == Some(0), Precondition, "last matrices share an eigenvalue");
        Ok(Self { first, second })
    }

    pub fn first(&self) -> &MatrixTuple {
        &self.first
    }

    pub fn second(&self) -> &MatrixTuple {
        &self.second
    }

    pub fn swapped(&self) -> Self {
        Self { first: self.second.clone(), second: self.first.clone() }
    }

    fn m1(&self) -> usize {
        self.first.size()
    }

    fn m2(&self) -> usize {
        self.second.size()
    }

    fn len(&self) -> usize {
        self.first.len()
    }

    fn block_len(&self) -> usize {
        self.m1() * self.m2()
    }

    /// Direct sum `diag(A¹_j, A²_j)`.
    pub fn direct_sum(&self) -> MatrixTuple {
        let ms = self
            .first
            .matrices
            .iter()
            .zip(&self.second.matrices)
            .map(|(a, b)| Matrix::block_diag(&[a.clone(), b.clone()]))
            .collect();
        MatrixTuple::new(self.first.mode, ms).expect("square blocks")
    }

    /// Operator sending the concatenated blocks to the off-diagonal block of
    /// the constraint.
    fn constraint_operator(&self) -> Matrix {
        let blocks: Vec<Matrix> = (0..self.len())
            .map(|j| match self.first.mode {
                Mode::Additive => Matrix::identity(self.block_len()),
                Mode::Multiplicative => {
                    let left = self.first.matrices[..j].iter().fold(Matrix::identity(self.m1()), |a, m| &a * m);
                    let right = self.second.matrices[j + 1..].iter().fold(Matrix::identity(self.m2()), |a, m| &a * m);
                    left_right_operator(&left, &right)
                }
            })
            .collect();
        hstack(&blocks)
    }

    fn sylvesters(&self) -> Vec<Matrix> {
        self.first
            .matrices
            .iter()
            .zip(&self.second.matrices)
            .map(|(a, b)| sylvester_operator(a, b))
            .collect()
    }

    /// Spanning vectors of `R`, of `Q`, and of the sum-constrained block
    /// space `Z ⊇ R`.
    fn spaces(&self) -> (Vec<Vector>, Vec<Vector>, Vec<Vector>) {
        let syl = self.sylvesters();
        let l = self.constraint_operator();
        let bl = self.block_len();
        let p1 = self.len();
        // image of X ↦ (S_j x_j)_j as a block-diagonal operator
        let mut phi = Matrix::zeros(bl * p1, bl * p1);
        for (j, s) in syl.iter().enumerate() {
            phi.set_block(j * bl, j * bl, s);
        }
        let r: Vec<Vector> = (&l * &phi).kernel_basis().iter().map(|x| phi.mul_vec(x)).collect();
        let q: Vec<Vector> = (0..bl)
            .map(|c| syl.iter().flat_map(|s| s.column(c)).collect())
            .collect();
        let z = l.kernel_basis();
        (r, q, z)
    }

    fn to_class(&self, v: &[Scalar]) -> ExtensionClass {
        let bl = self.block_len();
        ExtensionClass {
            blocks: v.chunks(bl).map(|c| Matrix::from_vector(self.m1(), self.m2(), c)).collect(),
        }
    }

    fn class_dim(m: &Matrix) -> usize {
        match ClassSpec::of_matrix(m) {
            Some(c) => c.dimension(),
            None => orbit_dimension(m),
        }
    }
}

fn echelon(vs: &[Vector]) -> EchelonBasis {
    let mut e = EchelonBasis::new();
    for v in vs {
        e.insert(v);
    }
    e
}

/// Representatives of `span(top) / span(q)`: reduced against `q` and each
/// other, first nonzero entry scaled to one.
fn quotient_basis(top: &[Vector], q: &[Vector]) -> Vec<Vector> {
    let mut e = echelon(q);
    let base = e.clone();
    let mut out = Vec::new();
    for v in top {
        if e.insert(v) {
            let r = base.reduce(v);
            // reduce against previously chosen representatives as well
            let r = out.iter().fold(r, |acc: Vector, prev: &Vector| {
                let p = prev.iter().position(|x| !x.is_zero()).unwrap();
                if acc[p].is_zero() {
                    acc
                } else {
                    let f = acc[p].clone();
                    acc.iter().zip(prev).map(|(a, b)| a - &(&f * b)).collect()
                }
            });
            let lead = r.iter().find(|x| !x.is_zero()).cloned().expect("independent");
            let inv = lead.inv().unwrap();
            out.push(r.iter().map(|x| x * &inv).collect());
        }
    }
    out
}

/// `ξ = dim Ext¹`, computed from class dimensions and from `dim R − dim Q`;
/// the two must agree.
pub fn ext_report(pair: &RepresentationPair) -> Result<ExtReport> {
    let (r, q, _) = pair.spaces();
    let dim_r = echelon(&r).len();
    let dim_q = echelon(&q).len();
    let mm = pair.block_len();
    ensure!(dim_q == mm, Invariant, "dim Q = {dim_q}, expected {mm}");
    let bl = pair.block_len();
    let dim_r_per_index: Vec<usize> = (0..pair.len())
        .map(|j| echelon(&r.iter().map(|v| v[j * bl..(j + 1) * bl].to_vec()).collect::<Vec<_>>()).len())
        .collect();
    for j in 0..pair.len() - 1 {
        if let Some(data) = eigen_data(&pair.first.matrices[j]) {
            let bound = defect_r(&data) * pair.m2();
            ensure!(dim_r_per_index[j] >= bound, Invariant, "dim R_{j} = {} < {bound}", dim_r_per_index[j]);
        }
    }
    let sum = pair.direct_sum();
    let d_sum: usize = sum.matrices.iter().map(RepresentationPair::class_dim).sum();
    let d1: usize = pair.first.matrices.iter().map(RepresentationPair::class_dim).sum();
    let d2: usize = pair.second.matrices.iter().map(RepresentationPair::class_dim).sum();
    let twice = d_sum as i64 - d1 as i64 - d2 as i64;
    ensure!(twice % 2 == 0, Invariant, "odd class dimension difference {twice}");
    let xi = twice / 2 - 2 * mm as i64;
    let linear = dim_r as i64 - dim_q as i64;
    ensure!(xi == linear, Invariant, "closed form gives {xi}, dim R − dim Q gives {linear}");
    Ok(ExtReport {
        xi,
        dim_r,
        dim_q,
        dim_r_per_index,
        class_dimensions_sum: d_sum,
        class_dimensions_first: d1,
        class_dimensions_second: d2,
    })
}

pub fn ext_dimension(pair: &RepresentationPair) -> Result<i64> {
    ext_report(pair).map(|r| r.xi)
}

/// Basis of `R/Q`: extensions keeping the direct-sum classes.
pub fn extension_space_basis(pair: &RepresentationPair) -> Result<Vec<ExtensionClass>> {
    let (r, q, _) = pair.spaces();
    Ok(quotient_basis(&r, &q).iter().map(|v| pair.to_class(v)).collect())
}

/// Basis of `Z/Q` where `Z` only imposes the constraint: extensions that may
/// move the classes into the closure-opposite direction (for instance make
/// a scalar block nilpotent).
pub fn unconstrained_extension_basis(pair: &RepresentationPair) -> Result<Vec<ExtensionClass>> {
    let (_, q, z) = pair.spaces();
    Ok(quotient_basis(&z, &q).iter().map(|v| pair.to_class(v)).collect())
}

fn flatten(e: &ExtensionClass) -> Vector {
    e.blocks.iter().flat_map(|b| b.entries().to_vec()).collect()
}

/// Whether the extension keeps the direct-sum classes (`e ∈ R`).
pub fn preserves_classes(pair: &RepresentationPair, e: &ExtensionClass) -> bool {
    let (r, _, _) = pair.spaces();
    echelon(&r).contains(&flatten(e))
}

/// Block upper-triangular tuple `[[A¹_j, B_j], [0, A²_j]]`.
pub fn build_semidirect(pair: &RepresentationPair, e: &ExtensionClass) -> Result<MatrixTuple> {
    ensure!(e.blocks.len() == pair.len(), Dimension, "one block per matrix expected");
    ensure!(
        e.blocks.iter().all(|b| b.rows() == pair.m1() && b.cols() == pair.m2()),
        Dimension,
        "blocks must be {}×{}",
        pair.m1(),
        pair.m2()
    );
    let v = flatten(e);
    ensure!(pair.constraint_operator().mul_vec(&v).iter().all(Zero::is_zero), Precondition, "blocks violate the constraint");
    let (_, q, _) = pair.spaces();
    ensure!(!echelon(&q).contains(&v), Precondition, "extension class is zero (split)");
    let ms = pair
        .first
        .matrices
        .iter()
        .zip(&pair.second.matrices)
        .zip(&e.blocks)
        .map(|((a, d), b)| Matrix::block_upper(a, b, d))
        .collect();
    let t = MatrixTuple::new(pair.first.mode, ms)?;
    ensure!(satisfies_constraint(&t), Invariant, "semidirect sum violates the constraint");
    Ok(t)
}

/// Moves a class-preserving semidirect sum inside its classes until the
/// tuple is irreducible. Additive mode.
pub fn deform_to_irreducible(
    pair: &RepresentationPair,
    e: &ExtensionClass,
    seed: u64,
    rounds: usize,
) -> Result<MatrixTuple> {
    ensure!(pair.first.mode == Mode::Additive, Precondition, "deformation to irreducible is additive only");
    for p in [&pair.first, &pair.second] {
        ensure!(p.size() == 1 || is_irreducible(p), Precondition, "summands must be irreducible");
    }
    let xi = ext_dimension(pair)?;
    ensure!(xi >= 2, Precondition, "dim Ext¹ = {xi} < 2");
    ensure!(preserves_classes(pair, e), Precondition, "extension changes the classes");
    let mut t = build_semidirect(pair, e)?;
    let eig: Vec<Option<EigenData>> = t.matrices.iter().map(eigen_data).collect();
    ensure!(
        eig.iter().all(Option::is_some),
        Precondition,
        "eigenvalues outside Q(i) are not supported"
    );
    let classes: Vec<ClassSpec> = eig.iter().map(|d| ClassSpec::from_eigen_data(d.as_ref().unwrap())).collect();
    let mut r = rng(seed);
    let frozen = vec![false; t.len()];
    for _ in 0..rounds {
        if is_irreducible(&t) {
            break;
        }
        let eig: Vec<Option<EigenData>> = classes.iter().map(ClassSpec::eigen_data).collect();
        if let Some(moved) = random_sum_preserving_move(&t.matrices, &eig, &frozen, &mut r, 32) {
            t.matrices = moved;
        }
    }
    ensure!(is_irreducible(&t), Construction, "no irreducible tuple reached in {rounds} rounds");
    ensure!(satisfies_constraint(&t), Invariant, "deformation broke the constraint");
    ensure!(
        t.matrices.iter().zip(&classes).all(|(m, c)| class_membership(m, c)),
        Invariant,
        "deformation left the classes"
    );
    t.with_classes(classes)
}

/// Lowest-numbered applicable case guaranteeing a semidirect sum with
/// trivial centralizer.
pub fn geq3_case(pair: &RepresentationPair) -> Option<u8> {
    let (m1, m2) = (pair.m1(), pair.m2());
    let p = pair.len() - 1;
    let firsts = &pair.first.matrices[..p];
    let seconds = &pair.second.matrices[..p];
    let same_class = |a: &Matrix, b: &Matrix| -> bool {
        // same size only; similarity via char poly and eigen data
        char_poly(a) == char_poly(b)
            && match (eigen_data(a), eigen_data(b)) {
                (Some(x), Some(y)) => x == y,
                _ => a.is_scalar_matrix() == b.is_scalar_matrix(),
            }
    };
    if m1 >= 3 && m2 >= 2 {
        return Some(1);
    }
    if m1 == 2 && m2 == 2 && firsts.iter().zip(seconds).any(|(a, b)| !same_class(a, b)) {
        return Some(2);
    }
    if m1 == 1 && m2 == 1 && firsts.iter().zip(seconds).filter(|(a, b)| a != b).count() >= 2 {
        return Some(3);
    }
    if m1 == 2 && m2 == 1 {
        let hit = firsts.iter().zip(seconds).any(|(a, b)| !char_poly(a).eval(b.get(0, 0)).is_zero());
        if hit {
            return Some(4);
        }
    }
    if m1 > 1 && m2 == 1 {
        let rs: Option<usize> = firsts.iter().map(|a| eigen_data(a).map(|d| defect_r(&d))).sum();
        if rs.is_some_and(|s| s > m1) {
            return Some(5);
        }
    }
    if m1 == 2 && m2 == 2 {
        let count = firsts
            .iter()
            .zip(seconds)
            .filter(|(a, b)| !a.is_scalar_matrix() || !b.is_scalar_matrix())
            .count();
        if count >= 3 {
            return Some(6);
        }
    }
    None
}

/// Result of splitting a tuple along its centralizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectSumSplit {
    /// `P` with `P⁻¹ A_j P` block diagonal.
    pub conjugator: Matrix,
    pub blocks: Vec<MatrixTuple>,
}

/// Splits a tuple with non-trivial centralizer into summands with trivial
/// centralizers. `None` when the centralizer is already trivial.
pub fn split_direct_sum(t: &MatrixTuple) -> Result<Option<DirectSumSplit>> {
    let last = t.matrices.last().ok_or_else(|| DspError::Precondition("empty tuple".into()))?;
    ensure!(char_poly(last).is_squarefree(), Precondition, "last matrix has a repeated eigenvalue");
    let c = centralizer(t);
    if c.dimension <= 1 {
        return Ok(None);
    }
    let z = c
        .basis
        .iter()
        .find(|m| !m.is_scalar_matrix())
        .ok_or_else(|| DspError::Invariant("centralizer has no non-scalar element".into()))?;
    let data = eigen_data(z)
        .ok_or_else(|| DspError::Construction("centralizer element has eigenvalues outside Q(i)".into()))?;
    ensure!(data.iter().all(|(_, p)| p.parts().iter().all(|&b| b == 1)), Invariant, "centralizer element is not diagonalizable");
    let n = t.size();
    let mut columns = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for (mu, _) in &data {
        let space = (z - &Matrix::scalar(n, mu.clone())).kernel_basis();
        sizes.push(space.len());
        columns.extend(space);
    }
    let p = Matrix::from_columns(n, &columns);
    let conj = t.conjugated(&p)?;
    let mut blocks = Vec::new();
    let mut start = 0;
    for s in sizes {
        let ms = conj.matrices.iter().map(|m| m.submatrix(start, start, s, s)).collect();
        blocks.push(MatrixTuple::new(t.mode, ms)?);
        start += s;
    }
    let mut conjugator = p;
    let mut out = Vec::new();
    let mut offset = 0;
    for b in blocks {
        let s = b.size();
        match split_direct_sum(&b)? {
            None => out.push(b),
            Some(inner) => {
                let mut lift = Matrix::identity(n);
                lift.set_block(offset, offset, &inner.conjugator);
                conjugator = &conjugator * &lift;
                out.extend(inner.blocks);
            }
        }
        offset += s;
    }
    Ok(Some(DirectSumSplit { conjugator, blocks: out }))
}
