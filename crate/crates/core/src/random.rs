//! Seeded random instances with small integer entries.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::class::Mode;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tuple::MatrixTuple;

pub type DspRng = ChaCha8Rng;

pub fn rng(seed: u64) -> DspRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_int(rng: &mut DspRng, radius: i64) -> i64 {
    rng.gen_range(-radius..=radius)
}

pub fn small_scalar(rng: &mut DspRng, radius: i64) -> Scalar {
    Scalar::from_int(small_int(rng, radius))
}

pub fn random_matrix(rng: &mut DspRng, n: usize, radius: i64) -> Matrix {
    let data = (0..n * n).map(|_| small_scalar(rng, radius)).collect();
    Matrix::from_vec(n, n, data).expect("square")
}

/// Integer matrix with determinant one: unit lower times unit upper.
pub fn random_unimodular(rng: &mut DspRng, n: usize, radius: i64) -> Matrix {
    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::identity(n);
    for i in 0..n {
        for k in 0..i {
            lower.set(i, k, small_scalar(rng, radius));
            upper.set(k, i, small_scalar(rng, radius));
        }
    }
    &lower * &upper
}

/// Block layout of a generated tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Unstructured.
    Full,
    /// Common block-diagonal form with blocks `k` and `n − k`.
    BlockDiagonal(usize),
    /// Common block upper-triangular form with blocks `k` and `n − k`.
    BlockTriangular(usize),
    Scalar,
}

fn shaped(rng: &mut DspRng, n: usize, layout: Layout, unimodular: bool) -> Matrix {
    let full = |rng: &mut DspRng, m: usize| {
        if unimodular {
            random_unimodular(rng, m, 2)
        } else {
            random_matrix(rng, m, 3)
        }
    };
    match layout {
        Layout::Full => full(rng, n),
        Layout::Scalar => {
            let v = if unimodular { [1, -1][rng.gen_range(0..2)] } else { small_int(rng, 3) };
            Matrix::scalar(n, Scalar::from_int(v))
        }
        Layout::BlockDiagonal(k) | Layout::BlockTriangular(k) => {
            let k = k.clamp(1, n - 1);
            let a = full(rng, k);
            let d = full(rng, n - k);
            let b = if matches!(layout, Layout::BlockTriangular(_)) {
                Matrix::from_vec(k, n - k, (0..k * (n - k)).map(|_| small_scalar(rng, 2)).collect()).unwrap()
            } else {
                Matrix::zeros(k, n - k)
            };
            Matrix::block_upper(&a, &b, &d)
        }
    }
}

/// Constraint-satisfying tuple of `len` matrices, conjugated by a random
/// unimodular matrix to hide the layout.
pub fn random_tuple(rng: &mut DspRng, mode: Mode, n: usize, len: usize, layout: Layout) -> MatrixTuple {
    let layout = if n < 2 && layout != Layout::Scalar { Layout::Full } else { layout };
    let unimodular = mode == Mode::Multiplicative;
    let mut ms: Vec<Matrix> = (0..len - 1).map(|_| shaped(rng, n, layout, unimodular)).collect();
    let last = match mode {
        Mode::Additive => -&ms.iter().fold(Matrix::zeros(n, n), |acc, m| &acc + m),
        Mode::Multiplicative => ms
            .iter()
            .fold(Matrix::identity(n), |acc, m| &acc * m)
            .inverse()
            .expect("unimodular product"),
    };
    ms.push(last);
    let p = random_unimodular(rng, n, 1);
    MatrixTuple::new(mode, ms).expect("square").conjugated(&p).expect("unimodular")
}
