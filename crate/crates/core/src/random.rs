//! Seeded random states, loss vectors and interferometers.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::fock::{MultiModeState, Normalization, TruncationSpec};
use crate::linalg::{self, CMatrix};

/// Random mixed state of the given rank with support on every basis vector.
pub fn random_state<R: Rng + ?Sized>(
    trunc: TruncationSpec,
    rank: usize,
    rng: &mut R,
) -> MultiModeState {
    random_bounded_state(trunc, rank, usize::MAX, rng)
}

/// Random mixed state supported on basis vectors with at most `max_total`
/// photons in total. Rank is clamped to the support size.
pub fn random_bounded_state<R: Rng + ?Sized>(
    trunc: TruncationSpec,
    rank: usize,
    max_total: usize,
    rng: &mut R,
) -> MultiModeState {
    let support: Vec<usize> = (0..trunc.dimension())
        .filter(|&i| trunc.total_photons(i) <= max_total)
        .collect();
    let d = trunc.dimension();
    let rank = rank.clamp(1, support.len());
    let mut g = CMatrix::zeros(d, rank);
    for &i in &support {
        for k in 0..rank {
            g[(i, k)] = linalg::complex_normal(rng);
        }
    }
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    MultiModeState::from_parts(trunc, m.unscale(tr), Normalization::Normalized)
}

/// Random pure state supported on basis vectors with at most `max_total`
/// photons in total.
pub fn random_bounded_pure<R: Rng + ?Sized>(
    trunc: TruncationSpec,
    max_total: usize,
    rng: &mut R,
) -> MultiModeState {
    random_bounded_state(trunc, 1, max_total, rng)
}

/// Transmissivities drawn uniformly from `[lo, hi]`.
pub fn uniform_loss<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}

/// Random complex amplitude vector for pure states.
pub fn random_amplitudes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| linalg::complex_normal(rng)).collect()
}
