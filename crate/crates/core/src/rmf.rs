//! Matrix-valued rational functions of `t` in partial-fraction form:
//! `Σ P_m t^m + Σ C_{a,k} / (t − a)^k`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Basis function: `t^m` or `1/(t − a)^k` with `k ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Power(usize),
    Pole(Scalar, usize),
}

fn binomial(n: usize, k: usize) -> Scalar {
    if k > n {
        return Scalar::zero();
    }
    let mut acc = Scalar::one();
    for i in 0..k {
        acc = &(&acc * &Scalar::from_int((n - i) as i64)) / &Scalar::from_int((i + 1) as i64);
    }
    acc
}

fn signed(sign_exp: usize, x: Scalar) -> Scalar {
    if sign_exp.is_multiple_of(2) {
        x
    } else {
        -x
    }
}

/// `(t − a)^r` expanded in powers of `t`.
fn shifted_power(a: &Scalar, r: usize) -> Vec<(Scalar, Term)> {
    (0..=r).map(|s| (&binomial(r, s) * &(-a).pow((r - s) as u32), Term::Power(s))).collect()
}

/// Product of two basis functions as a combination of basis functions.
pub fn product(x: &Term, y: &Term) -> Vec<(Scalar, Term)> {
    match (x, y) {
        (Term::Power(i), Term::Power(j)) => vec![(Scalar::one(), Term::Power(i + j))],
        (Term::Power(m), Term::Pole(a, i)) | (Term::Pole(a, i), Term::Power(m)) => {
            // t^m = Σ_r C(m,r) a^{m−r} (t − a)^r
            let mut out = Vec::new();
            for r in 0..=*m {
                let c = &binomial(*m, r) * &a.pow((m - r) as u32);
                if r < *i {
                    out.push((c, Term::Pole(a.clone(), i - r)));
                } else {
                    out.extend(shifted_power(a, r - i).into_iter().map(|(s, t)| (&c * &s, t)));
                }
            }
            out
        }
        (Term::Pole(a, i), Term::Pole(b, j)) => {
            if a == b {
                return vec![(Scalar::one(), Term::Pole(a.clone(), i + j))];
            }
            let (i, j) = (*i, *j);
            let ab = a - b;
            let ba = b - a;
            let mut out = Vec::new();
            for k in 1..=i {
                let e = (i + j - k) as u32;
                let c = signed(i - k, &binomial(i + j - k - 1, i - k) * &ab.pow(e).inv().unwrap());
                out.push((c, Term::Pole(a.clone(), k)));
            }
            for k in 1..=j {
                let e = (i + j - k) as u32;
                let c = signed(j - k, &binomial(i + j - k - 1, j - k) * &ba.pow(e).inv().unwrap());
                out.push((c, Term::Pole(b.clone(), k)));
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrixFunction {
    n: usize,
    terms: BTreeMap<Term, Matrix>,
}

impl RationalMatrixFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(m: Matrix) -> Self {
        Self::term(Term::Power(0), m)
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(Matrix::identity(n))
    }

    pub fn term(t: Term, m: Matrix) -> Self {
        let mut f = Self::zero(m.rows());
        f.push(t, m);
        f
    }

    /// `m / (t − a)`.
    pub fn simple_pole(a: &Scalar, m: Matrix) -> Self {
        Self::term(Term::Pole(a.clone(), 1), m)
    }

    /// `Σ A_j / (t − a_j)`.
    pub fn fuchsian(poles: &[Scalar], residues: &[Matrix]) -> Self {
        let n = residues[0].rows();
        poles
            .iter()
            .zip(residues)
            .fold(Self::zero(n), |acc, (a, m)| acc.add(&Self::simple_pole(a, m.clone())))
    }

    fn push(&mut self, t: Term, m: Matrix) {
        let entry = self.terms.entry(t.clone()).or_insert_with(|| Matrix::zeros(m.rows(), m.cols()));
        *entry = &*entry + &m;
        if entry.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Term, Matrix> {
        &self.terms
    }

    pub fn coefficient(&self, t: &Term) -> Matrix {
        self.terms.get(t).cloned().unwrap_or_else(|| Matrix::zeros(self.n, self.n))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, m) in &other.terms {
            out.push(t.clone(), m.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(t, m)| (t.clone(), -m)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Matrix product, left factor first.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (tx, mx) in &self.terms {
            for (ty, my) in &other.terms {
                let prod = mx * my;
                if prod.is_zero() {
                    continue;
                }
                for (c, t) in product(tx, ty) {
                    if !c.is_zero() {
                        out.push(t, prod.scale(&c));
                    }
                }
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (t, m) in &self.terms {
            match t {
                Term::Power(0) => {}
                Term::Power(k) => out.push(Term::Power(k - 1), m.scale(&Scalar::from_int(*k as i64))),
                Term::Pole(a, k) => out.push(Term::Pole(a.clone(), k + 1), m.scale(&Scalar::from_int(-(*k as i64)))),
            }
        }
        out
    }

    /// Value at a point that is not a pole.
    pub fn evaluate(&self, x: &Scalar) -> Option<Matrix> {
        let mut acc = Matrix::zeros(self.n, self.n);
        for (t, m) in &self.terms {
            let f = match t {
                Term::Power(k) => x.pow(*k as u32),
                Term::Pole(a, k) => (x - a).pow(*k as u32).inv()?,
            };
            acc = &acc + &m.scale(&f);
        }
        Some(acc)
    }

    /// Coefficient of `1/(t − a)`.
    pub fn residue(&self, a: &Scalar) -> Matrix {
        self.coefficient(&Term::Pole(a.clone(), 1))
    }

    /// Poles, each listed once, with their maximal order.
    pub fn poles(&self) -> BTreeMap<Scalar, usize> {
        let mut out = BTreeMap::new();
        for t in self.terms.keys() {
            if let Term::Pole(a, k) = t {
                let e = out.entry(a.clone()).or_insert(0);
                *e = (*e).max(*k);
            }
        }
        out
    }

    pub fn has_polynomial_part(&self) -> bool {
        self.terms.keys().any(|t| matches!(t, Term::Power(_)))
    }

    /// Only simple poles and no polynomial part.
    pub fn is_fuchsian(&self) -> bool {
        self.terms.keys().all(|t| matches!(t, Term::Pole(_, 1)))
    }

    /// Inverse of `I + N/(t − a)` for nilpotent `N`: `Σ_r (−N)^r/(t − a)^r`.
    pub fn inverse_unipotent_pole(a: &Scalar, nil: &Matrix) -> Option<Self> {
        let n = nil.rows();
        let mut out = Self::identity(n);
        let mut power = Matrix::identity(n);
        for r in 1..=n {
            power = &power * &(-nil);
            if power.is_zero() {
                return Some(out);
            }
            out.push(Term::Pole(a.clone(), r), power.clone());
        }
        None
    }
}
