//! Partitions, Jordan normal forms and the shape-level quantities `d(C)`
//! (class dimension) and `r(C)` (minimal rank of `Y − λI`).
//!
//! Eigenvalue labels are abstract strings: nothing here depends on concrete
//! eigenvalue values.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, DspError, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Non-increasing list of positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Sorts and drops zero parts.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjugate partition: part `k` counts the parts `≥ k`.
    pub fn dual(&self) -> Partition {
        let largest = self.0.first().copied().unwrap_or(0);
        Partition((1..=largest).map(|k| self.0.iter().filter(|&&p| p >= k).count()).collect())
    }

    /// `Σ_{i,i′} min(b_i, b_{i′})`: the centralizer dimension of one
    /// eigenvalue's Jordan blocks.
    pub fn centralizer_contribution(&self) -> usize {
        self.0.iter().map(|&a| self.0.iter().map(|&b| a.min(b)).sum::<usize>()).sum()
    }

    /// Dominance order: `self ⊴ other` when every prefix sum of `self` is
    /// at most the matching prefix sum of `other`.
    pub fn dominated_by(&self, other: &Partition) -> bool {
        if self.total() != other.total() {
            return false;
        }
        let (mut a, mut b) = (0, 0);
        for k in 0..self.len().max(other.len()) {
            a += self.0.get(k).copied().unwrap_or(0);
            b += other.0.get(k).copied().unwrap_or(0);
            if a > b {
                return false;
            }
        }
        true
    }

    /// All partitions of `n`, largest parts first.
    pub fn all(n: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition(prefix.clone()));
                return;
            }
            for p in (1..=n.min(max)).rev() {
                prefix.push(p);
                rec(n - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Jordan normal form: eigenvalue labels with their block-size partitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanNormalForm {
    groups: Vec<(String, Partition)>,
}

impl JordanNormalForm {
    pub fn new(groups: Vec<(String, Partition)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (label, part) in &groups {
            ensure!(seen.insert(label.clone()), Precondition, "duplicate eigenvalue label {label:?}");
            ensure!(!part.is_empty(), Precondition, "empty block list for {label:?}");
        }
        Ok(Self { groups })
    }

    /// Diagonal JNF with the given multiplicities and labels `μ1, μ2, …`.
    pub fn diagonal(multiplicities: &[usize]) -> Self {
        Self {
            groups: multiplicities
                .iter()
                .filter(|&&m| m > 0)
                .enumerate()
                .map(|(i, &m)| (format!("μ{}", i + 1), Partition::new(vec![1; m])))
                .collect(),
        }
    }

    /// Convenience: groups from `(label, blocks)` pairs.
    pub fn from_blocks(groups: &[(&str, &[usize])]) -> Result<Self> {
        Self::new(groups.iter().map(|(l, b)| (l.to_string(), Partition::new(b.to_vec()))).collect())
    }

    pub fn groups(&self) -> &[(String, Partition)] {
        &self.groups
    }

    pub fn size(&self) -> usize {
        self.groups.iter().map(|(_, p)| p.total()).sum()
    }

    pub fn partition_of(&self, label: &str) -> Option<&Partition> {
        self.groups.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    /// Eigenvalue multiplicities, non-increasing.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.groups.iter().map(|(_, p)| p.total()).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.groups.iter().all(|(_, p)| p.parts().iter().all(|&b| b == 1))
    }

    /// Every eigenvalue simple.
    pub fn has_distinct_eigenvalues(&self) -> bool {
        self.groups.iter().all(|(_, p)| p.total() == 1)
    }

    pub fn is_scalar(&self) -> bool {
        self.groups.len() == 1 && self.is_diagonal()
    }

    /// `d(C) = n² − Σ_l Σ_{i,i′} min(b_{i,l}, b_{i′,l})`.
    pub fn class_dimension(&self) -> usize {
        let n = self.size();
        n * n - self.groups.iter().map(|(_, p)| p.centralizer_contribution()).sum::<usize>()
    }

    /// `r(C) = n − max_l #blocks(l)`.
    pub fn class_defect_r(&self) -> usize {
        self.size() - self.groups.iter().map(|(_, p)| p.len()).max().unwrap_or(0)
    }

    /// The corresponding diagonal JNF: the disjoint union of the dual
    /// partitions gives the new eigenvalue multiplicities.
    pub fn corresponding_diagonal(&self) -> JordanNormalForm {
        let mut mults: Vec<usize> = self.groups.iter().flat_map(|(_, p)| p.dual().0).collect();
        mults.sort_unstable_by(|a, b| b.cmp(a));
        JordanNormalForm::diagonal(&mults)
    }

    /// Shape-level identity (labels ignored): sorted list of partitions.
    pub fn shape(&self) -> Vec<Partition> {
        let mut s: Vec<Partition> = self.groups.iter().map(|(_, p)| p.clone()).collect();
        s.sort();
        s
    }

    /// Whether `other` is reachable from `self` by operations replacing two
    /// same-eigenvalue blocks of sizes `(l, s)`, `l ≥ s`, by `(l+1, s−1)`.
    /// Groups are matched by label.
    pub fn is_subordinate_to(&self, other: &JordanNormalForm) -> Result<bool> {
        ensure!(self.size() == other.size(), Dimension, "sizes {} and {}", self.size(), other.size());
        ensure!(self.groups.len() == other.groups.len(), Precondition, "eigenvalue labels differ");
        let mut all = true;
        for (label, p) in &self.groups {
            let q = other
                .partition_of(label)
                .ok_or_else(|| DspError::Precondition(format!("label {label:?} missing")))?;
            ensure!(p.total() == q.total(), Precondition, "multiplicity of {label:?} differs");
            all &= p.dominated_by(q);
        }
        Ok(all)
    }

    /// Explicit upper-bidiagonal Jordan matrix with the given value per
    /// label.
    pub fn jordan_matrix(&self, values: &BTreeMap<String, Scalar>) -> Result<Matrix> {
        let mut blocks = Vec::new();
        for (label, p) in &self.groups {
            let v = values
                .get(label)
                .ok_or_else(|| DspError::Precondition(format!("no value for label {label:?}")))?;
            for &b in p.parts() {
                blocks.push(jordan_block(v, b));
            }
        }
        Ok(Matrix::block_diag(&blocks))
    }

    /// All JNF shapes of size `n` (multisets of partitions), with labels
    /// `λ1, λ2, …`.
    pub fn all_shapes(n: usize) -> Vec<JordanNormalForm> {
        // Each shape is a multiset of partitions; enumerate non-decreasing
        // sequences in a fixed total order.
        let pool: Vec<Partition> = (1..=n).flat_map(Partition::all).collect();
        let mut out = Vec::new();
        fn rec(
            remaining: usize,
            start: usize,
            pool: &[Partition],
            acc: &mut Vec<Partition>,
            out: &mut Vec<JordanNormalForm>,
        ) {
            if remaining == 0 {
                out.push(JordanNormalForm {
                    groups: acc.iter().enumerate().map(|(i, p)| (format!("λ{}", i + 1), p.clone())).collect(),
                });
                return;
            }
            for idx in start..pool.len() {
                if pool[idx].total() <= remaining {
                    acc.push(pool[idx].clone());
                    rec(remaining - pool[idx].total(), idx, pool, acc, out);
                    acc.pop();
                }
            }
        }
        rec(n, 0, &pool, &mut Vec::new(), &mut out);
        out
    }
}

pub fn jordan_block(value: &Scalar, size: usize) -> Matrix {
    let mut m = Matrix::scalar(size, value.clone());
    for i in 0..size.saturating_sub(1) {
        m.set(i, i + 1, Scalar::from_int(1));
    }
    m
}

impl fmt::Display for JordanNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.groups.iter().map(|(l, p)| format!("{l}:{p}")).collect();
        write!(f, "{{{}}}", parts.join("; "))
    }
}

impl FromStr for JordanNormalForm {
    type Err = DspError;

    /// Parses `{λ1:[2,1]; λ2:[1]}`. Block lists must be non-increasing.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| DspError::Parse(format!("invalid JNF {s:?}: {why}"));
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| bad("missing braces"))?;
        let mut groups = Vec::new();
        for item in body.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (label, blocks) = item.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let inner = blocks
                .trim()
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| bad("missing brackets"))?;
            let parts = inner
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad("bad block size")))
                .collect::<Result<Vec<_>>>()?;
            if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
                return Err(bad("block sizes must be positive and non-increasing"));
            }
            groups.push((label.trim().to_string(), Partition(parts)));
        }
        ensure!(!groups.is_empty(), Parse, "empty JNF {s:?}");
        JordanNormalForm::new(groups)
    }
}

impl Serialize for JordanNormalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JordanNormalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The one-parameter family `A(ε) = [[J′, εD], [0, J″]]` degenerating two
/// same-eigenvalue Jordan blocks.
#[derive(Clone, Debug)]
pub struct DegenerationFamily {
    pub base: Matrix,
    pub direction: Matrix,
    pub sizes: (usize, usize),
}

impl DegenerationFamily {
    pub fn at(&self, eps: &Scalar) -> Matrix {
        &self.base + &self.direction.scale(eps)
    }

    /// Block sizes of `A(ε)` for `ε ≠ 0`.
    pub fn merged_sizes(&self) -> Partition {
        let (a, b) = self.sizes;
        Partition::new(vec![a.max(b) + 1, a.min(b) - 1])
    }
}

/// Builds the witness family. The single entry of `D` sits at `(s′, n)` when
/// `s′ ≥ s″` and at `(1, s′+1)` otherwise (one-based positions in `A`).
pub fn degeneration_witness(s1: usize, s2: usize, eigenvalue: &Scalar) -> Result<DegenerationFamily> {
    ensure!(s1 >= 1 && s2 >= 1, Precondition, "block sizes must be positive, got ({s1},{s2})");
    let n = s1 + s2;
    let base = Matrix::block_diag(&[jordan_block(eigenvalue, s1), jordan_block(eigenvalue, s2)]);
    let (i, k) = if s1 >= s2 { (s1 - 1, n - 1) } else { (0, s1) };
    Ok(DegenerationFamily { base, direction: Matrix::unit(n, n, i, k), sizes: (s1, s2) })
}

/// Breadth-first search over `(l,s)` moves; kept public for cross-checks.
pub fn reachable_by_moves(from: &Partition, to: &Partition) -> bool {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(p) = queue.pop_front() {
        if &p == to {
            return true;
        }
        if !seen.insert(p.clone()) {
            continue;
        }
        let parts = p.parts();
        for a in 0..parts.len() {
            for b in 0..parts.len() {
                if a != b && parts[a] >= parts[b] {
                    let mut next = parts.to_vec();
                    next[a] += 1;
                    next[b] -= 1;
                    queue.push_back(Partition::new(next));
                }
            }
        }
    }
    false
}
