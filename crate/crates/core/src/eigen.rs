//! Exact eigen-structure from known (Gaussian-rational) eigenvalues: rank
//! ladders, Jordan bases and invariant subspaces.

use num_traits::Zero;

use crate::error::{ensure, DspError, Result};
use crate::jnf::Partition;
use crate::matrix::{span_rank, Matrix, Vector};
use crate::poly::char_poly;
use crate::scalar::Scalar;

/// Eigenvalues with their Jordan block partitions.
pub type EigenData = Vec<(Scalar, Partition)>;

/// Largest denominator tried when recovering eigenvalues numerically.
pub const MAX_EIGEN_DENOMINATOR: i64 = 1_000_000;

fn shifted(m: &Matrix, lambda: &Scalar) -> Matrix {
    m - &Matrix::scalar(m.rows(), lambda.clone())
}

/// Jordan block sizes of `m` at `lambda` from the ranks of `(m − λI)^s`.
/// Empty when `lambda` is not an eigenvalue.
pub fn jordan_partition(m: &Matrix, lambda: &Scalar) -> Partition {
    let n = m.rows();
    let b = shifted(m, lambda);
    let mut ranks = vec![n];
    let mut power = Matrix::identity(n);
    for _ in 0..n {
        power = &power * &b;
        let r = power.rank();
        let stable = r == *ranks.last().unwrap();
        ranks.push(r);
        if stable {
            break;
        }
    }
    // at_least[k] = number of blocks of size ≥ k+1
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut parts = Vec::new();
    for k in 0..at_least.len() {
        let next = at_least.get(k + 1).copied().unwrap_or(0);
        parts.extend(std::iter::repeat_n(k + 1, at_least[k] - next));
    }
    Partition::new(parts)
}

/// Full eigen data when every eigenvalue is a Gaussian rational.
pub fn eigen_data(m: &Matrix) -> Option<EigenData> {
    let roots = char_poly(m).gaussian_rational_roots(MAX_EIGEN_DENOMINATOR)?;
    Some(roots.into_iter().map(|(v, _)| {
        let p = jordan_partition(m, &v);
        (v, p)
    }).collect())
}

/// `r = min_λ rank(m − λI)` given eigen data.
pub fn defect_r(data: &EigenData) -> usize {
    let n: usize = data.iter().map(|(_, p)| p.total()).sum();
    n - data.iter().map(|(_, p)| p.len()).max().unwrap_or(0)
}

/// Basis of `ker (m − λI)^s`.
pub fn generalized_kernel(m: &Matrix, lambda: &Scalar, s: u32) -> Vec<Vector> {
    shifted(m, lambda).pow(s).kernel_basis()
}

/// Columns `Q` with `Q⁻¹ m Q` in upper-bidiagonal Jordan form; eigenvalues
/// follow the order of `data`, larger blocks first.
pub fn jordan_basis(m: &Matrix, data: &EigenData) -> Result<(Matrix, Matrix)> {
    let n = m.rows();
    let mut columns: Vec<Vector> = Vec::with_capacity(n);
    for (lambda, part) in data {
        let b = shifted(m, lambda);
        let top = part.parts().first().copied().unwrap_or(0);
        // heads[s] = chain heads whose chains have length s
        let mut chains: Vec<Vec<Vector>> = Vec::new();
        for s in (1..=top).rev() {
            let needed = part.parts().iter().filter(|&&x| x == s).count();
            if needed == 0 {
                continue;
            }
            let lower = b.pow(s as u32 - 1).kernel_basis();
            // vectors already present at level s: B^{h−s} v for longer chains
            let mut spanning: Vec<Vector> = lower.clone();
            for ch in &chains {
                let h = ch.len();
                if h >= s {
                    spanning.push(ch[h - s].clone());
                }
            }
            let candidates = b.pow(s as u32).kernel_basis();
            let mut found = 0;
            for c in candidates {
                if found == needed {
                    break;
                }
                let before = span_rank(&spanning);
                spanning.push(c.clone());
                if span_rank(&spanning) > before {
                    let mut chain = vec![c.clone()];
                    for _ in 1..s {
                        let next = b.mul_vec(chain.last().unwrap());
                        chain.push(next);
                    }
                    // chain = [v, Bv, …, B^{s−1}v]
                    chains.push(chain);
                    found += 1;
                } else {
                    spanning.pop();
                }
            }
            ensure!(found == needed, Invariant, "Jordan chain search failed at size {s}");
        }
        chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
        for chain in chains {
            columns.extend(chain.into_iter().rev());
        }
    }
    ensure!(columns.len() == n, Precondition, "eigen data covers {} of {n} dimensions", columns.len());
    let q = Matrix::from_columns(n, &columns);
    let qinv = q.inverse().ok_or_else(|| DspError::Invariant("Jordan basis is singular".into()))?;
    let j = &(&qinv * m) * &q;
    Ok((q, j))
}

/// Invariant subspaces of `m` assembled from generalized kernels and
/// eigenvector lines. Proper, nonzero, deduplicated; larger `k(n−k)` first.
pub fn invariant_subspaces(m: &Matrix, data: &EigenData, cap: usize) -> Vec<Vec<Vector>> {
    let n = m.rows();
    // Options per eigenvalue: none, each ker (m−λ)^s, each eigenvector line.
    let mut per_value: Vec<Vec<Vec<Vector>>> = Vec::new();
    for (lambda, part) in data {
        let mut opts: Vec<Vec<Vector>> = vec![Vec::new()];
        let top = part.parts().first().copied().unwrap_or(0) as u32;
        for s in 1..=top {
            opts.push(generalized_kernel(m, lambda, s));
        }
        let eigvecs = generalized_kernel(m, lambda, 1);
        if eigvecs.len() > 1 {
            for v in &eigvecs {
                opts.push(vec![v.clone()]);
            }
        }
        per_value.push(opts);
    }
    let mut out: Vec<Vec<Vector>> = Vec::new();
    let mut idx = vec![0usize; per_value.len()];
    'outer: loop {
        let basis: Vec<Vector> = idx.iter().zip(&per_value).flat_map(|(&i, o)| o[i].clone()).collect();
        let k = basis.len();
        if k > 0 && k < n && out.len() < cap {
            out.push(basis);
        }
        for pos in 0..idx.len() {
            idx[pos] += 1;
            if idx[pos] < per_value[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    out.sort_by_key(|u| std::cmp::Reverse(u.len() * (n - u.len())));
    out
}

/// Basis of the abelian square-zero algebra `{N : im N ⊆ U, N(U) = 0}`.
pub fn unipotent_radical(u: &[Vector], n: usize) -> Vec<Matrix> {
    if u.is_empty() || u.len() == n {
        return Vec::new();
    }
    let annihilator = Matrix::from_rows(u.to_vec()).expect("equal lengths").kernel_basis();
    let mut out = Vec::with_capacity(u.len() * annihilator.len());
    for a in u {
        for w in &annihilator {
            let mut nmat = Matrix::zeros(n, n);
            for i in 0..n {
                if a[i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    nmat.set(i, j, &a[i] * &w[j]);
                }
            }
            out.push(nmat);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jnf::JordanNormalForm;
    use crate::scalar::q;
    use std::collections::BTreeMap;

    #[test]
    fn rank_ladder_reads_block_sizes() {
        let j: JordanNormalForm = "{a:[3,1,1]; b:[2]}".parse().unwrap();
        let vals = BTreeMap::from([("a".to_string(), q(2)), ("b".to_string(), q(-1))]);
        let m = j.jordan_matrix(&vals).unwrap();
        assert_eq!(jordan_partition(&m, &q(2)), Partition::new(vec![3, 1, 1]));
        assert_eq!(jordan_partition(&m, &q(-1)), Partition::new(vec![2]));
        assert!(jordan_partition(&m, &q(7)).is_empty());
    }

    #[test]
    fn jordan_basis_of_conjugated_jordan_matrix() {
        let j: JordanNormalForm = "{a:[2,1]; b:[1]}".parse().unwrap();
        let vals = BTreeMap::from([("a".to_string(), q(1)), ("b".to_string(), q(3))]);
        let jm = j.jordan_matrix(&vals).unwrap();
        let p = Matrix::from_ints(&[[1, 1, 0, 0], [0, 1, 2, 0], [1, 0, 1, 1], [0, 0, 1, 1]]);
        let m = &(&p * &jm) * &p.inverse().unwrap();
        let data = eigen_data(&m).unwrap();
        let (qm, jj) = jordan_basis(&m, &data).unwrap();
        assert!(qm.inverse().is_some());
        assert_eq!(jj, jm);
    }

    #[test]
    fn radical_conjugation_is_affine() {
        let m = Matrix::from_ints(&[[1, 2, 0], [0, 3, 1], [0, 0, -2]]);
        let data = eigen_data(&m).unwrap();
        for u in invariant_subspaces(&m, &data, 64) {
            for nm in unipotent_radical(&u, 3) {
                assert!((&nm * &nm).is_zero());
                assert!((&(&nm * &m) * &nm).is_zero());
            }
        }
    }
}
