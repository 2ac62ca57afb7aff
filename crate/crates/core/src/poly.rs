//! Univariate polynomials over `Q(i)`, coefficients stored low degree first.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    /// `x − r`
    pub fn linear_root(r: &Scalar) -> Self {
        Self::new(vec![-r, Scalar::one()])
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn eval_matrix(&self, m: &Matrix) -> Matrix {
        let n = m.rows();
        self.coeffs
            .iter()
            .rev()
            .fold(Matrix::zeros(n, n), |acc, c| &(&acc * m) + &Matrix::scalar(n, c.clone()))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &Scalar::from_int(k as i64))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(vec![]);
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn monic(&self) -> Poly {
        let lead = self.leading();
        if lead.is_zero() {
            return self.clone();
        }
        Poly::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    /// Euclidean division; panics when dividing by zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Scalar::zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d && !rem.is_empty() {
            let k = rem.len() - 1 - d;
            let f = &rem[rem.len() - 1] / &lead;
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &(&f * c);
            }
            quot[k] = f;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// True iff the polynomial has no repeated root, i.e. its discriminant
    /// is nonzero.
    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    pub fn squarefree_part(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Roots in `Q(i)` with multiplicities, provided every root of the
    /// polynomial is a Gaussian rational with denominators up to `max_den`.
    /// Returns `None` otherwise; every reported root is verified exactly.
    pub fn gaussian_rational_roots(&self, max_den: i64) -> Option<Vec<(Scalar, usize)>> {
        let deg = self.degree()?;
        if deg == 0 {
            return Some(Vec::new());
        }
        let sf = self.squarefree_part();
        let approx = numeric_roots(&sf);
        let mut roots = Vec::new();
        let mut rest = self.clone();
        for z in approx {
            let r = Scalar::approximate(z, max_den)?;
            if !sf.eval(&r).is_zero() || roots.iter().any(|(x, _)| x == &r) {
                return None;
            }
            let lin = Poly::linear_root(&r);
            let mut mult = 0;
            loop {
                let (qt, rm) = rest.div_rem(&lin);
                if !rm.is_zero() {
                    break;
                }
                rest = qt;
                mult += 1;
            }
            roots.push((r, mult));
        }
        if rest.degree() != Some(0) {
            return None;
        }
        roots.sort();
        Some(roots)
    }
}

/// Durand–Kerner iteration followed by Newton polishing, on the complex
/// floating-point image of a squarefree polynomial.
fn numeric_roots(p: &Poly) -> Vec<Complex64> {
    let Some(deg) = p.degree() else { return Vec::new() };
    let lead = p.leading().to_complex_f64();
    let c: Vec<Complex64> = p.coeffs.iter().map(|x| x.to_complex_f64() / lead).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let deval = |z: Complex64| {
        c.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, &a)| acc * z + a * k as f64)
    };
    let radius = 1.0 + c.iter().take(deg).map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..5 {
            let d = deval(*zi);
            if d.norm() == 0.0 {
                break;
            }
            *zi -= eval(*zi) / d;
        }
    }
    z
}

/// `det(xI − M)` by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &Matrix) -> Poly {
    assert!(m.is_square());
    let n = m.rows();
    let mut coeffs = vec![Scalar::zero(); n + 1];
    coeffs[n] = Scalar::one();
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        mk = &(m * &mk) + &Matrix::scalar(n, coeffs[n - k + 1].clone());
        let t = (m * &mk).trace();
        coeffs[n - k] = -(&t / &Scalar::from_int(k as i64));
    }
    Poly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qf};

    #[test]
    fn char_poly_of_companion_like_matrix() {
        let m = Matrix::from_ints(&[[2, 1], [0, 3]]);
        assert_eq!(char_poly(&m), Poly::new(vec![q(6), q(-5), q(1)]));
        // Cayley–Hamilton
        let a = Matrix::from_ints(&[[1, 2, 0], [-1, 0, 3], [2, 2, 1]]);
        assert!(char_poly(&a).eval_matrix(&a).is_zero());
    }

    #[test]
    fn roots_with_multiplicity() {
        // (x-1)^2 (x+2/3) (x - i)
        let p = Poly::linear_root(&q(1))
            .mul(&Poly::linear_root(&q(1)))
            .mul(&Poly::linear_root(&qf(-2, 3)))
            .mul(&Poly::linear_root(&Scalar::i()));
        let roots = p.gaussian_rational_roots(1000).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots.contains(&(q(1), 2)));
        assert!(roots.contains(&(qf(-2, 3), 1)));
        assert!(roots.contains(&(Scalar::i(), 1)));
        assert!(!p.is_squarefree());
    }

    #[test]
    fn irrational_roots_are_rejected() {
        let p = Poly::new(vec![q(-2), q(0), q(1)]);
        assert!(p.gaussian_rational_roots(1000).is_none());
        assert!(p.is_squarefree());
    }
}
