//! Efficiency measures of multimode states and their certificates.
//!
//! Every measure is an infimum of transmissivity sums over loss
//! representations `ρ = W E_p(ρ₀)` with `ρ₀ ≥ 0`. Feasibility of a given
//! `p` is tested by inverting the loss channel and checking the sign of the
//! smallest eigenvalue; the feasible set is an up-set in every coordinate,
//! which the searches below exploit.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{MultiModeState, Normalization, DEFAULT_PSD_TOL};
use crate::linalg::{self, CMatrix};
use crate::optics::{self, LossVector, ModeUnitary};
use crate::optimize::NelderMead;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Single-mode efficiency `E`.
    Single,
    /// Independent per-mode loss, `E_d`.
    D,
    /// Sum of reduced single-mode efficiencies, `E_s`.
    S,
    /// Loss followed by an optimized interferometer, `E_u`.
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Feasibility boundary located to within the bisection tolerance.
    ExactToTolerance,
    /// Best value found by a non-convex search; the infimum may be lower.
    UpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub bisect_tol: f64,
    pub psd_tol: f64,
    pub recon_tol: f64,
    /// Coordinate-sweep starts for `E_d`.
    pub d_starts: usize,
    /// Multistarts for `E_u`, the first of which is the identity.
    pub u_starts: usize,
    /// Objective evaluations per start and continuation stage for `E_u`.
    pub u_max_evals: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bisect_tol: 1e-6,
            psd_tol: DEFAULT_PSD_TOL,
            recon_tol: 1e-8,
            d_starts: 4,
            u_starts: 8,
            u_max_evals: 150,
        }
    }
}

/// Witness `(W, p, ρ₀)` with `W E_p(ρ₀) W† = ρ`, proving `value` is an upper
/// bound on the efficiency.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyCertificate {
    pub w: ModeUnitary,
    pub p: LossVector,
    pub rho0: MultiModeState,
    /// Smallest eigenvalue of `ρ₀`.
    pub margin: f64,
    /// Sum of the `k` largest entries of `p`.
    pub value: f64,
    pub k: usize,
}

impl EfficiencyCertificate {
    /// `max |W E_p(ρ₀) W† − target|` entrywise.
    pub fn reconstruction_residual(&self, target: &MultiModeState) -> Result<f64> {
        let lossy = optics::multimode_loss(&self.rho0, &self.p)?;
        let rebuilt = if self.w == ModeUnitary::identity(self.w.dim()) {
            lossy
        } else {
            optics::apply_interferometer(&lossy, &self.w)?
        };
        Ok(linalg::max_abs_diff(rebuilt.matrix(), target.matrix()))
    }

    /// Reconstructs within `recon_tol` and has margin at least `-psd_tol`.
    pub fn verify(&self, target: &MultiModeState, tol: &Tolerances) -> Result<bool> {
        Ok(self.margin >= -tol.psd_tol && self.reconstruction_residual(target)? <= tol.recon_tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Efficiency {
    pub value: f64,
    pub bound: BoundKind,
    pub certificate: EfficiencyCertificate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SEfficiency {
    pub value: f64,
    /// Single-mode efficiency of each reduced state, in mode order.
    pub per_mode: Vec<f64>,
}

fn check_normalized(s: &MultiModeState, tol: &Tolerances) -> Result<()> {
    if s.normalization() != Normalization::Normalized || (s.trace() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState("efficiency needs a normalized state".into()));
    }
    let min = s.min_eigenvalue();
    if min < -tol.psd_tol {
        return Err(Error::Infeasible(min));
    }
    Ok(())
}

fn check_k(s: &MultiModeState, k: usize) -> Result<()> {
    if k == 0 || k > s.num_modes() {
        return Err(Error::InvalidParameter(alloc::format!(
            "K = {k} must lie in 1..={}",
            s.num_modes()
        )));
    }
    Ok(())
}

fn feasible(s: &MultiModeState, p: &[f64], psd_tol: f64) -> bool {
    optics::inverse_multimode_loss_matrix(&s.trunc(), s.matrix(), p)
        .is_ok_and(|m| linalg::is_psd_within(&m, psd_tol))
}

/// Smallest feasible value of coordinate `j` in `[0, p[j]]` with the other
/// coordinates fixed, to within `tol`. Leaves `p[j]` at the feasible end.
fn bisect_coordinate(s: &MultiModeState, p: &mut [f64], j: usize, psd_tol: f64, tol: f64) {
    let mut lo = 0.0;
    let mut hi = p[j];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        p[j] = mid;
        if feasible(s, p, psd_tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    p[j] = hi;
}

/// Smallest feasible `t` with `p = t·(1,…,1)`.
fn bisect_diagonal(s: &MultiModeState, psd_tol: f64, tol: f64) -> f64 {
    let n = s.num_modes();
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(s, &alloc::vec![mid; n], psd_tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn certificate(
    s: &MultiModeState,
    w: ModeUnitary,
    p: Vec<f64>,
    k: usize,
) -> Result<EfficiencyCertificate> {
    let rho0_matrix = optics::inverse_multimode_loss_matrix(&s.trunc(), s.matrix(), &p)?;
    let margin = linalg::hermitian_min_eigenvalue(&rho0_matrix);
    let p = LossVector::new(p)?;
    let value = p.top_k_sum(k);
    Ok(EfficiencyCertificate {
        w,
        p,
        rho0: MultiModeState::from_parts(s.trunc(), rho0_matrix, Normalization::Normalized),
        margin,
        value,
        k,
    })
}

/// `E(ρ)`: bisection on `p ∈ [0, 1]` for the boundary of the set where the
/// inverse loss channel yields a PSD operator. The returned value is the
/// feasible end of the final bracket.
pub fn single_mode_efficiency(s: &MultiModeState, tol: &Tolerances) -> Result<Efficiency> {
    if s.num_modes() != 1 {
        return Err(Error::InvalidParameter("single-mode efficiency needs one mode".into()));
    }
    check_normalized(s, tol)?;
    let mut p = [1.0];
    bisect_coordinate(s, &mut p, 0, tol.psd_tol, tol.bisect_tol);
    let certificate = certificate(s, ModeUnitary::identity(1), p.to_vec(), 1)?;
    Ok(Efficiency {
        value: certificate.value,
        bound: BoundKind::ExactToTolerance,
        certificate,
    })
}

/// Coordinate-bisection search over the feasible up-set. Returns the best
/// loss vector found.
fn d_search(
    s: &MultiModeState,
    k: usize,
    psd_tol: f64,
    bisect_tol: f64,
    starts: usize,
    seed: u64,
) -> Vec<f64> {
    const MAX_SWEEPS: usize = 8;
    let n = s.num_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in 0..starts.max(1) {
        let mut order: Vec<usize> = (0..n).collect();
        if start > 0 {
            order.shuffle(&mut rng);
        }
        let mut p = if start % 2 == 1 {
            alloc::vec![bisect_diagonal(s, psd_tol, bisect_tol); n]
        } else {
            alloc::vec![1.0; n]
        };
        for _ in 0..MAX_SWEEPS {
            let before = p.clone();
            for &j in &order {
                bisect_coordinate(s, &mut p, j, psd_tol, bisect_tol);
            }
            let moved = p
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if moved <= bisect_tol {
                break;
            }
        }
        let value = linalg::top_k_sum(&p, k);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, p));
        }
    }
    best.expect("at least one start").1
}

/// `E_d(ρ, K)`: minimizes the sum of the `K` largest per-mode
/// transmissivities over independent-loss representations.
pub fn d_efficiency(s: &MultiModeState, k: usize, tol: &Tolerances, seed: u64) -> Result<Efficiency> {
    check_k(s, k)?;
    check_normalized(s, tol)?;
    let p = d_search(s, k, tol.psd_tol, tol.bisect_tol, tol.d_starts, seed);
    let certificate = certificate(s, ModeUnitary::identity(s.num_modes()), p, k)?;
    Ok(Efficiency {
        value: certificate.value,
        bound: BoundKind::ExactToTolerance,
        certificate,
    })
}

/// `E_s(ρ, K)`: sum of the `K` largest single-mode efficiencies of the
/// reduced states.
pub fn s_efficiency(s: &MultiModeState, k: usize, tol: &Tolerances) -> Result<SEfficiency> {
    check_k(s, k)?;
    check_normalized(s, tol)?;
    let per_mode = (0..s.num_modes())
        .map(|mode| {
            let reduced = s.partial_trace(&[mode])?.renormalized()?;
            single_mode_efficiency(&reduced, tol).map(|e| e.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SEfficiency {
        value: linalg::top_k_sum(&per_mode, k),
        per_mode,
    })
}

/// Hermitian generator from `n²` real parameters: diagonal first, then
/// real and imaginary parts of the upper triangle row by row.
fn generator(params: &[f64], n: usize) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    let mut it = params.iter().copied();
    for i in 0..n {
        h[(i, i)] = Complex64::new(it.next().unwrap_or(0.0), 0.0);
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(it.next().unwrap_or(0.0), it.next().unwrap_or(0.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// PSD tolerances of the continuation stages used by the `E_u` search, and
/// the simplex size used at each.
const U_STAGES: [(f64, f64); 5] = [
    (1e-1, 0.6),
    (1e-3, 0.1),
    (1e-5, 1e-2),
    (1e-7, 1e-3),
    (1e-9, 1e-4),
];
const U_STAGE_BISECT_TOL: f64 = 1e-4;

/// `E_u(ρ, K)` upper bound: minimizes `E_d(W† ρ W, K)` over interferometers
/// `W = W₀ exp(iH)` by Nelder-Mead from the identity and Haar-random `W₀`.
/// Each start is run through a continuation in the PSD tolerance, from loose
/// to tight, which widens the basin around interferometers that undo a
/// mixing of the modes. The best interferometer is re-certified at the
/// requested tolerances. Never exceeds `d_efficiency` for the same
/// tolerances and seed.
pub fn u_efficiency_upper(
    s: &MultiModeState,
    k: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Efficiency> {
    check_k(s, k)?;
    check_normalized(s, tol)?;
    let n = s.num_modes();
    if n == 1 {
        let e = single_mode_efficiency(s, tol)?;
        return Ok(Efficiency {
            bound: BoundKind::UpperBound,
            ..e
        });
    }
    // Interferometers are only exact within the cutoff's photon sectors.
    optics::apply_interferometer(s, &ModeUnitary::identity(n))?;

    let mut best = d_efficiency(s, k, tol, seed)?;
    best.bound = BoundKind::UpperBound;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let dim = n * n;
    for start in 0..tol.u_starts {
        let base = if start == 0 {
            ModeUnitary::identity(n)
        } else {
            ModeUnitary::haar(n, &mut rng)
        };
        let at = |x: &[f64]| -> ModeUnitary {
            base.compose(&ModeUnitary::from_generator(&generator(x, n)))
                .expect("same dimension")
        };
        let mut x = alloc::vec![0.0; dim];
        for &(stage_tol, step) in &U_STAGES {
            let psd_tol = stage_tol.max(tol.psd_tol);
            let objective = |params: &[f64]| -> f64 {
                let w = at(params);
                match optics::apply_interferometer(s, &w.adjoint()) {
                    Ok(rotated) => {
                        let p = d_search(&rotated, k, psd_tol, U_STAGE_BISECT_TOL, 1, seed);
                        linalg::top_k_sum(&p, k)
                    }
                    Err(_) => f64::INFINITY,
                }
            };
            let nm = NelderMead {
                max_evals: tol.u_max_evals,
                initial_step: step,
                f_tol: U_STAGE_BISECT_TOL * 0.1,
                x_tol: 1e-7,
            };
            x = nm.minimize(objective, &x).x;
        }
        let w = at(&x);
        let rotated = optics::apply_interferometer(s, &w.adjoint())?;
        let candidate = d_efficiency(&rotated, k, tol, seed)?;
        if candidate.value < best.value {
            best = Efficiency {
                value: candidate.value,
                bound: BoundKind::UpperBound,
                certificate: transform_certificate(&candidate.certificate, &w)?,
            };
        }
    }
    Ok(best)
}

/// Replaces `W` by `U·W`; the result certifies the same value for `U ρ U†`.
pub fn transform_certificate(
    c: &EfficiencyCertificate,
    u: &ModeUnitary,
) -> Result<EfficiencyCertificate> {
    Ok(EfficiencyCertificate {
        w: u.compose(&c.w)?,
        ..c.clone()
    })
}

/// Dispatches on `measure`. For [`Measure::S`] the certificate is the
/// identity representation at the per-mode efficiencies when it is feasible,
/// which it need not be; callers wanting E_s alone use [`s_efficiency`].
pub fn efficiency(
    s: &MultiModeState,
    measure: Measure,
    k: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<f64> {
    Ok(match measure {
        Measure::Single => single_mode_efficiency(s, tol)?.value,
        Measure::D => d_efficiency(s, k, tol, seed)?.value,
        Measure::S => s_efficiency(s, k, tol)?.value,
        Measure::U => u_efficiency_upper(s, k, tol, seed)?.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{tensor, StateBuilder, TruncationSpec};
    use crate::random::{random_bounded_pure, random_bounded_state, random_state};
    use alloc::vec;
    use rand::Rng;

    fn single(c: usize) -> StateBuilder {
        StateBuilder::new(TruncationSpec::new(1, c).unwrap())
    }

    fn mixture(c: usize, p: f64) -> MultiModeState {
        let b = single(c);
        b.mixture(&[(p, b.fock(&[1]).unwrap()), (1.0 - p, b.fock(&[0]).unwrap())])
            .unwrap()
    }

    fn two_mode(c: usize) -> StateBuilder {
        StateBuilder::new(TruncationSpec::new(2, c).unwrap())
    }

    fn psi_prime() -> MultiModeState {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        two_mode(1)
            .pure(&[
                (vec![1, 0], Complex64::new(h, 0.0)),
                (vec![0, 1], Complex64::new(h, 0.0)),
            ])
            .unwrap()
    }

    fn phi(p: f64) -> MultiModeState {
        two_mode(1)
            .pure(&[
                (vec![0, 0], Complex64::new(libm::sqrt(1.0 - p), 0.0)),
                (vec![1, 1], Complex64::new(libm::sqrt(p), 0.0)),
            ])
            .unwrap()
    }

    #[test]
    fn mixture_family_bisection() {
        let tol = Tolerances::default();
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let e = single_mode_efficiency(&mixture(2, p), &tol).unwrap();
            assert!((e.value - p).abs() <= tol.bisect_tol, "p = {p}: {}", e.value);
            assert!(e.certificate.margin >= -tol.psd_tol);
            assert!(e.certificate.verify(&mixture(2, p), &tol).unwrap());
        }
    }

    #[test]
    fn single_photon_and_vacuum() {
        let tol = Tolerances::default();
        let one = single_mode_efficiency(&single(3).fock(&[1]).unwrap(), &tol).unwrap();
        assert_eq!(one.value, 1.0);
        let vac = single_mode_efficiency(&single(3).vacuum(), &tol).unwrap();
        assert!(vac.value <= tol.bisect_tol);
    }

    #[test]
    fn thermal_cutoff_study() {
        // Recorded for reference; truncation makes the state nonclassical
        // near the cutoff, so the values do not decay.
        let tol = Tolerances::default();
        let values: Vec<f64> = [10usize, 20, 30]
            .iter()
            .map(|&c| {
                let s = single(c).thermal(&[0.5]).unwrap().state;
                single_mode_efficiency(&s, &tol).unwrap().value
            })
            .collect();
        for v in &values {
            assert!(*v > 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn single_mode_errors() {
        let tol = Tolerances::default();
        assert!(single_mode_efficiency(&phi(0.3), &tol).is_err());
        let t = TruncationSpec::new(1, 1).unwrap();
        let half = MultiModeState::conditional(t, CMatrix::identity(2, 2).scale(0.25)).unwrap();
        assert!(single_mode_efficiency(&half, &tol).is_err());
    }

    #[test]
    fn worked_examples() {
        let tol = Tolerances::default();
        let psi = two_mode(1).fock(&[1, 0]).unwrap();
        let ed = d_efficiency(&psi, 2, &tol, 1).unwrap();
        assert!((ed.value - 1.0).abs() <= 1e-6);
        let ed_prime = d_efficiency(&psi_prime(), 2, &tol, 1).unwrap();
        assert!((ed_prime.value - 2.0).abs() <= 1e-6);
        let es1 = s_efficiency(&psi_prime(), 1, &tol).unwrap();
        let es2 = s_efficiency(&psi_prime(), 2, &tol).unwrap();
        assert!((es1.value - 0.5).abs() <= 1e-6);
        assert!((es2.value - 1.0).abs() <= 1e-6);
        let es_phi = s_efficiency(&phi(0.4), 1, &tol).unwrap();
        assert!((es_phi.value - 0.4).abs() <= 1e-6);
    }

    #[test]
    fn d_efficiency_of_product_mixtures() {
        let tol = Tolerances::default();
        let s = tensor(&mixture(1, 0.3), &mixture(1, 0.5)).unwrap();
        let k1 = d_efficiency(&s, 1, &tol, 3).unwrap();
        let k2 = d_efficiency(&s, 2, &tol, 3).unwrap();
        assert!((k1.value - 0.5).abs() <= 2.0 * tol.bisect_tol, "{}", k1.value);
        assert!((k2.value - 0.8).abs() <= 2.0 * tol.bisect_tol, "{}", k2.value);
        let es = s_efficiency(&s, 2, &tol).unwrap();
        assert!((es.value - k2.value).abs() <= 2.0 * tol.bisect_tol * 2.0);
        assert!(k2.certificate.verify(&s, &tol).unwrap());
    }

    #[test]
    fn d_efficiency_rejects_bad_input() {
        let tol = Tolerances::default();
        assert!(d_efficiency(&psi_prime(), 3, &tol, 0).is_err());
        assert!(d_efficiency(&psi_prime(), 0, &tol, 0).is_err());
    }

    #[test]
    fn u_efficiency_undoes_the_beamsplitter() {
        let tol = Tolerances::default();
        let e = u_efficiency_upper(&psi_prime(), 2, &tol, 5).unwrap();
        assert_eq!(e.bound, BoundKind::UpperBound);
        assert!((e.value - 1.0).abs() <= 1e-3, "{}", e.value);
        assert!(e.certificate.verify(&psi_prime(), &tol).unwrap());
    }

    #[test]
    fn u_efficiency_of_phi() {
        let tol = Tolerances::default();
        let t = TruncationSpec::new(2, 2).unwrap();
        let s = MultiModeState::from_matrix(t, {
            let mut m = CMatrix::zeros(9, 9);
            let (a, b) = (t.index_of(&[0, 0]).unwrap(), t.index_of(&[1, 1]).unwrap());
            m[(a, a)] = Complex64::new(0.6, 0.0);
            m[(b, b)] = Complex64::new(0.4, 0.0);
            m[(a, b)] = Complex64::new(libm::sqrt(0.24), 0.0);
            m[(b, a)] = m[(a, b)];
            m
        })
        .unwrap();
        let e = u_efficiency_upper(&s, 2, &tol, 5).unwrap();
        assert!((e.value - 2.0).abs() <= 1e-6, "{}", e.value);
    }

    #[test]
    fn u_efficiency_of_single_mode_matches_e() {
        let tol = Tolerances::default();
        let s = mixture(2, 0.35);
        let u = u_efficiency_upper(&s, 1, &tol, 0).unwrap();
        let e = single_mode_efficiency(&s, &tol).unwrap();
        assert_eq!(u.value, e.value);
    }

    #[test]
    fn u_efficiency_requires_sector_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(TruncationSpec::new(2, 1).unwrap(), 2, &mut rng);
        assert_eq!(
            u_efficiency_upper(&s, 1, &Tolerances::default(), 0),
            Err(Error::TruncationInexact)
        );
    }

    #[test]
    fn transform_certificate_follows_the_state() {
        let tol = Tolerances::default();
        let psi = two_mode(1).fock(&[1, 0]).unwrap();
        let c = d_efficiency(&psi, 2, &tol, 0).unwrap().certificate;
        assert_eq!(transform_certificate(&c, &ModeUnitary::identity(2)).unwrap(), c);
        let bs = ModeUnitary::beamsplitter(2, 0, 1, -core::f64::consts::FRAC_PI_4, 0.0).unwrap();
        let moved = transform_certificate(&c, &bs).unwrap();
        assert!(moved.reconstruction_residual(&psi_prime()).unwrap() <= tol.recon_tol);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = TruncationSpec::new(3, 2).unwrap();
        for _ in 0..5 {
            let s = random_bounded_state(t, 2, 2, &mut rng);
            let p = LossVector::new(crate::random::uniform_loss(3, 0.2, 1.0, &mut rng)).unwrap();
            let lossy = optics::multimode_loss(&s, &p).unwrap();
            let c = d_efficiency(&lossy, 2, &tol, 0).unwrap().certificate;
            let u = ModeUnitary::haar(3, &mut rng);
            let target = optics::apply_interferometer(&lossy, &u).unwrap();
            let moved = transform_certificate(&c, &u).unwrap();
            assert!(moved.reconstruction_residual(&target).unwrap() <= tol.recon_tol);
        }
    }

    #[test]
    fn monotone_in_k() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = TruncationSpec::new(3, 2).unwrap();
        let s = optics::multimode_loss(
            &random_bounded_state(t, 3, 2, &mut rng),
            &LossVector::new(vec![0.4, 0.8, 0.6]).unwrap(),
        )
        .unwrap();
        let d: Vec<f64> = (1..=3).map(|k| d_efficiency(&s, k, &tol, 0).unwrap().value).collect();
        let es: Vec<f64> = (1..=3).map(|k| s_efficiency(&s, k, &tol).unwrap().value).collect();
        assert!(d.windows(2).all(|w| w[1] >= w[0]));
        assert!(es.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn pure_non_coherent_states_have_full_d_efficiency() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = TruncationSpec::new(2, 2).unwrap();
        for _ in 0..20 {
            let s = random_bounded_pure(t, 2, &mut rng);
            let e = d_efficiency(&s, 2, &tol, rng.random()).unwrap();
            assert!((e.value - 2.0).abs() <= tol.bisect_tol * 2.0, "{}", e.value);
        }
    }

    #[test]
    fn generator_is_hermitian() {
        let h = generator(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], 3);
        assert_eq!(linalg::hermiticity_deviation(&h), 0.0);
    }
}
