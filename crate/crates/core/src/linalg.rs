//! Dense complex linear-algebra helpers shared by the state, channel and
//! decomposition modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Returns `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the lower triangle is read, so the caller is expected to pass a
/// Hermitian matrix. If the solver does not converge every entry is NaN,
/// which no tolerance comparison accepts.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .unwrap_or_else(|_| alloc::vec![f64::NAN; n])
}

/// Whether the smallest eigenvalue of Hermitian `m` exceeds `-tol`, decided
/// by a Cholesky factorization of `m + tol·I`.
pub fn is_psd_within(m: &CMatrix, tol: f64) -> bool {
    let mut shifted = to_faer(&hermitize(m));
    for i in 0..m.nrows() {
        shifted[(i, i)] += Complex64::new(tol, 0.0);
    }
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
        && shifted.llt(faer::Side::Lower).is_ok()
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Option<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = to_faer(m).self_adjoint_eigen(faer::Side::Lower).ok()?;
    let values = (0..n).map(|i| eig.S()[i].re).collect();
    Some((values, from_faer(eig.U())))
}

/// Thin SVD `m = U diag(s) V†` with singular values in non-increasing order.
pub fn svd(m: &CMatrix) -> Option<(CMatrix, Vec<f64>, CMatrix)> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Some((CMatrix::zeros(m.nrows(), 0), Vec::new(), CMatrix::zeros(m.ncols(), 0)));
    }
    let svd = to_faer(m).thin_svd().ok()?;
    let s = (0..k).map(|i| svd.S()[i].re).collect();
    Some((from_faer(svd.U()), s, from_faer(svd.V())))
}

pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `max |(U†U − I)_{ij}|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `exp(iH)` for Hermitian `H`, through its eigendecomposition.
pub fn expm_i_hermitian(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (values, v) = hermitian_eigen(&hermitize(h)).expect("Hermitian eigensolver converges");
    let phases = DVector::from_iterator(
        n,
        values.iter().map(|&l| Complex64::new(libm::cos(l), libm::sin(l))),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    &scaled * v.adjoint()
}

/// Standard complex normal sample (E|z|² = 1) via Box-Muller.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    // u1 in (0, 1]
    let r = libm::sqrt(-libm::log(1.0 - u1));
    let theta = 2.0 * core::f64::consts::PI * u2;
    Complex64::new(r * libm::cos(theta), r * libm::sin(theta))
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of the
/// diagonal of R pushed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Sum of the `k` largest entries, sorted descending with a stable sort so
/// equal values keep mode order.
pub fn top_k_sum(values: &[f64], k: usize) -> f64 {
    sorted_descending(values).iter().take(k).sum()
}

pub fn sorted_descending(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
