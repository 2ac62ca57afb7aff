//! Concrete matrix tuples and their exact verification.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::class::{ClassSpec, Mode};
use crate::error::{ensure, DspError, Result};
use crate::matrix::{commutator_operator, hstack, independent_subset, left_right_operator, vstack, EchelonBasis, Matrix};
use crate::par::{self, Execution};

/// `p+1` square matrices of one size, with optional declared classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTuple")]
pub struct MatrixTuple {
    pub mode: Mode,
    pub matrices: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassSpec>>,
}

#[derive(Deserialize)]
struct RawTuple {
    mode: Mode,
    matrices: Vec<Matrix>,
    #[serde(default)]
    classes: Option<Vec<ClassSpec>>,
}

impl TryFrom<RawTuple> for MatrixTuple {
    type Error = DspError;
    fn try_from(raw: RawTuple) -> Result<Self> {
        let t = MatrixTuple::new(raw.mode, raw.matrices)?;
        match raw.classes {
            Some(c) => t.with_classes(c),
            None => Ok(t),
        }
    }
}

impl MatrixTuple {
    /// Checks shapes only; the constraint is checked by the verification
    /// operations.
    pub fn new(mode: Mode, matrices: Vec<Matrix>) -> Result<Self> {
        ensure!(!matrices.is_empty(), Precondition, "empty tuple");
        let n = matrices[0].rows();
        ensure!(
            matrices.iter().all(|m| m.rows() == n && m.cols() == n),
            Dimension,
            "tuple matrices must all be {n}×{n}"
        );
        Ok(Self { mode, matrices, classes: None })
    }

    pub fn additive(matrices: Vec<Matrix>) -> Result<Self> {
        Self::new(Mode::Additive, matrices)
    }

    pub fn with_classes(mut self, classes: Vec<ClassSpec>) -> Result<Self> {
        ensure!(classes.len() == self.matrices.len(), Dimension, "one class per matrix expected");
        ensure!(classes.iter().all(|c| c.size() == self.size()), Dimension, "class sizes differ from n");
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Same tuple conjugated: `P⁻¹ A_j P`.
    pub fn conjugated(&self, p: &Matrix) -> Result<Self> {
        let pinv = p.inverse().ok_or_else(|| DspError::Precondition("conjugator is singular".into()))?;
        Ok(Self {
            mode: self.mode,
            matrices: self.matrices.iter().map(|m| &(&pinv * m) * p).collect(),
            classes: self.classes.clone(),
        })
    }

    /// `M_1⋯M_j` for `j` matrices (identity for `j = 0`).
    fn prefix(&self, j: usize) -> Matrix {
        self.matrices[..j].iter().fold(Matrix::identity(self.size()), |acc, m| &acc * m)
    }

    fn suffix(&self, j: usize) -> Matrix {
        self.matrices[j..].iter().fold(Matrix::identity(self.size()), |acc, m| &acc * m)
    }
}

/// `ΣA_j`, or `M_1⋯M_{p+1} − I`.
pub fn constraint_residual(t: &MatrixTuple) -> Matrix {
    let n = t.size();
    match t.mode {
        Mode::Additive => t.matrices.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m),
        Mode::Multiplicative => &t.prefix(t.len()) - &Matrix::identity(n),
    }
}

pub fn satisfies_constraint(t: &MatrixTuple) -> bool {
    constraint_residual(t).is_zero()
        && (t.mode == Mode::Additive || t.matrices.iter().all(|m| !m.determinant().is_zero()))
}

/// Rank-ladder membership test. Classes with eigenvalues outside `Q(i)`
/// never match.
pub fn class_membership(m: &Matrix, spec: &ClassSpec) -> bool {
    let n = m.rows();
    if !m.is_square() || spec.size() != n {
        return false;
    }
    let Some(data) = spec.eigen_data() else { return false };
    data.iter().all(|(lambda, part)| {
        let b = m - &Matrix::scalar(n, lambda.clone());
        let mut power = Matrix::identity(n);
        let top = part.parts().first().copied().unwrap_or(0);
        // ranks are constant beyond the largest block, so checking s ≤ top+1 suffices
        (1..=(top + 1).min(n)).all(|s| {
            power = &power * &b;
            let expected = n - part.parts().iter().map(|&x| x.min(s)).sum::<usize>();
            power.rank() == expected
        })
    })
}

/// Membership of each matrix in its declared class.
pub fn declared_membership(t: &MatrixTuple) -> Option<Vec<bool>> {
    t.classes
        .as_ref()
        .map(|cs| t.matrices.iter().zip(cs).map(|(m, c)| class_membership(m, c)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Centralizer {
    pub dimension: usize,
    pub basis: Vec<Matrix>,
}

impl Centralizer {
    pub fn is_trivial(&self) -> bool {
        self.dimension == 1
    }
}

/// `{X : [A_j, X] = 0 ∀j}`.
pub fn centralizer(t: &MatrixTuple) -> Centralizer {
    let n = t.size();
    let ops: Vec<Matrix> = t.matrices.iter().map(commutator_operator).collect();
    let basis: Vec<Matrix> = vstack(&ops).kernel_basis().iter().map(|v| Matrix::from_vector(n, n, v)).collect();
    Centralizer { dimension: basis.len(), basis }
}

/// Burnside test: the unital algebra generated by the tuple is all of
/// `gl_n`.
pub fn is_irreducible(t: &MatrixTuple) -> bool {
    let n = t.size();
    let mut span = EchelonBasis::new();
    let mut frontier = vec![Matrix::identity(n)];
    span.insert(frontier[0].entries());
    while let Some(b) = frontier.pop() {
        if span.len() == n * n {
            break;
        }
        for g in &t.matrices {
            let c = g * &b;
            if span.insert(c.entries()) {
                frontier.push(c);
            }
        }
    }
    span.len() == n * n
}

/// Traceless basis `E_ik (i≠k)`, `E_ii − E_nn`.
pub fn traceless_basis(n: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for k in 0..n {
            if i != k {
                out.push(Matrix::unit(n, n, i, k));
            } else if i + 1 < n {
                out.push(&Matrix::unit(n, n, i, i) - &Matrix::unit(n, n, n - 1, n - 1));
            }
        }
    }
    out
}

/// Rank of `(X_1,…,X_p) ↦ Σ_{j≤p} [A_j, X_j]` on traceless inputs.
pub fn commutator_map_rank(t: &MatrixTuple) -> usize {
    let n = t.size();
    let sl = traceless_basis(n);
    if sl.is_empty() || t.len() < 2 {
        return 0;
    }
    let cols: Vec<Matrix> = t.matrices[..t.len() - 1]
        .iter()
        .map(|a| {
            let vs: Vec<_> = sl.iter().map(|x| Matrix::commutator(a, x).to_vector()).collect();
            Matrix::from_columns(n * n, &vs)
        })
        .collect();
    hstack(&cols).rank()
}

/// Dimension of the space of tangent vectors `v_j ∈ [A_j, gl_n]` obeying the
/// linearized constraint.
pub fn tangent_dimension(t: &MatrixTuple) -> Result<usize> {
    ensure!(satisfies_constraint(t), Precondition, "tuple does not satisfy its constraint");
    let n = t.size();
    let mut blocks = Vec::with_capacity(t.len());
    for (j, a) in t.matrices.iter().enumerate() {
        let ad = commutator_operator(a);
        let keep = independent_subset(&(0..n * n).map(|c| ad.column(c)).collect::<Vec<_>>());
        let image: Vec<_> = keep.iter().map(|&c| ad.column(c)).collect();
        if image.is_empty() {
            continue;
        }
        let basis = Matrix::from_columns(n * n, &image);
        blocks.push(match t.mode {
            Mode::Additive => basis,
            Mode::Multiplicative => &left_right_operator(&t.prefix(j), &t.suffix(j + 1)) * &basis,
        });
    }
    if blocks.is_empty() {
        return Ok(0);
    }
    let op = hstack(&blocks);
    Ok(op.cols() - op.rank())
}

/// Everything `verify` reports about one tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub matrices: usize,
    pub constraint_holds: bool,
    pub centralizer_dimension: usize,
    pub irreducible: bool,
    pub commutator_map_rank: usize,
    pub tangent_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_membership: Option<Vec<bool>>,
}

impl VerificationReport {
    pub fn trivial_centralizer(&self) -> bool {
        self.centralizer_dimension == 1
    }
}

pub fn verify(t: &MatrixTuple) -> VerificationReport {
    VerificationReport {
        n: t.size(),
        matrices: t.len(),
        constraint_holds: satisfies_constraint(t),
        centralizer_dimension: centralizer(t).dimension,
        irreducible: is_irreducible(t),
        commutator_map_rank: commutator_map_rank(t),
        tangent_dimension: tangent_dimension(t).ok(),
        class_membership: declared_membership(t),
    }
}

pub fn verify_batch(tuples: &[MatrixTuple], exec: Execution) -> Vec<VerificationReport> {
    par::map(exec, tuples, verify)
}

/// True when every entry of the residual is zero and classes (if declared)
/// all match.
pub fn certified(t: &MatrixTuple) -> bool {
    satisfies_constraint(t) && declared_membership(t).is_none_or(|m| m.iter().all(|&b| b))
}

/// `dim` of the conjugacy class of `m`: `n² − dim ker ad_m`.
pub fn orbit_dimension(m: &Matrix) -> usize {
    let n = m.rows();
    n * n - commutator_operator(m).kernel_basis().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jnf::JordanNormalForm;
    use crate::scalar::q;
    use std::collections::BTreeMap;

    /// Upper-triangular triple with diagonals (1,2), (3,5), (−4,−7).
    fn s1() -> MatrixTuple {
        MatrixTuple::additive(vec![
            Matrix::from_ints(&[[1, 1], [0, 2]]),
            Matrix::from_ints(&[[3, 0], [0, 5]]),
            Matrix::from_ints(&[[-4, -1], [0, -7]]),
        ])
        .unwrap()
    }

    fn s0() -> MatrixTuple {
        MatrixTuple::additive(vec![
            Matrix::from_ints(&[[1, 0], [0, 2]]),
            Matrix::from_ints(&[[3, 0], [0, 5]]),
            Matrix::from_ints(&[[-4, 0], [0, -7]]),
        ])
        .unwrap()
    }

    #[test]
    fn residuals() {
        assert!(constraint_residual(&s1()).is_zero());
        let id = Matrix::identity(2);
        let mult = MatrixTuple::new(Mode::Multiplicative, vec![id.clone(), id.clone(), id.clone()]).unwrap();
        assert!(constraint_residual(&mult).is_zero());
        let add = MatrixTuple::additive(vec![id.clone(), id.clone(), id.clone()]).unwrap();
        assert_eq!(constraint_residual(&add), Matrix::scalar(2, q(3)));
    }

    #[test]
    fn membership() {
        let nil = ClassSpec::new("{a:[2]}".parse().unwrap(), BTreeMap::from([("a".into(), q(0))])).unwrap();
        let zero = ClassSpec::new("{a:[1,1]}".parse().unwrap(), BTreeMap::from([("a".into(), q(0))])).unwrap();
        let n = Matrix::from_ints(&[[0, 1], [0, 0]]);
        assert!(class_membership(&n, &nil));
        assert!(!class_membership(&n, &zero));
        assert!(class_membership(&Matrix::from_ints(&[[1, 0], [0, 2]]), &ClassSpec::diagonal(&[q(1), q(2)])));
        let j: JordanNormalForm = "{a:[2,1]; b:[1]}".parse().unwrap();
        let spec = ClassSpec::new(j, BTreeMap::from([("a".into(), q(2)), ("b".into(), q(-1))])).unwrap();
        assert!(!class_membership(&Matrix::scalar(4, q(2)), &spec));
    }

    #[test]
    fn centralizers_and_irreducibility() {
        assert_eq!(centralizer(&s0()).dimension, 2);
        assert_eq!(centralizer(&s1()).dimension, 1);
        assert!(!is_irreducible(&s1()));
        let scal = MatrixTuple::additive(vec![Matrix::scalar(3, q(1)), Matrix::scalar(3, q(-1))]).unwrap();
        assert_eq!(centralizer(&scal).dimension, 9);
        assert_eq!(commutator_map_rank(&scal), 0);
        let a1 = Matrix::from_ints(&[[1, 0], [0, -1]]);
        let a2 = Matrix::from_ints(&[[0, 1], [1, 0]]);
        let a3 = -&(&a1 + &a2);
        assert!(is_irreducible(&MatrixTuple::additive(vec![a1.clone(), a2, a3]).unwrap()));
        assert!(!is_irreducible(&MatrixTuple::additive(vec![a1]).unwrap()));
    }

    #[test]
    fn ranks_and_tangents() {
        assert_eq!(commutator_map_rank(&s1()), 3);
        assert_eq!(commutator_map_rank(&s0()), 2);
        assert_eq!(tangent_dimension(&s1()).unwrap(), 3);
        let zero = MatrixTuple::additive(vec![Matrix::zeros(2, 2); 3]).unwrap();
        assert_eq!(tangent_dimension(&zero).unwrap(), 0);
    }
}
