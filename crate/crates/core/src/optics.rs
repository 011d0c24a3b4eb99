//! Loss channels, interferometers and destructive post-selected measurements.
//!
//! Interferometers act on mode operators as `a'_i = Σ_j U_ij a_j`; at the
//! state level a photon entering mode `j` leaves in superposition
//! `Σ_i U_ij |1_i⟩`. The two-mode beamsplitter is
//!
//! ```text
//! a'_i =  cosθ a_i + e^{iφ} sinθ a_j
//! a'_j = -e^{-iφ} sinθ a_i + cosθ a_j
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::{normalize_mode_set, subsystem_offsets, MultiModeState, Normalization, TruncationSpec};
use crate::linalg::{self, binomial, factorial, CMatrix, ONE, ZERO};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const DEFAULT_PROB_FLOOR: f64 = 1e-12;
const EFFECT_TOL: f64 = 1e-10;
/// Diagonal weight above the cutoff's photon sectors that still counts as
/// exactly representable under an interferometer.
const SECTOR_LEAK_TOL: f64 = 1e-12;

/// N×N unitary acting on mode operators.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: CMatrix,
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let deviation = linalg::unitarity_deviation(&matrix);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn beamsplitter(n: usize, i: usize, j: usize, theta: f64, phi: f64) -> Result<Self> {
        check_mode(i, n)?;
        check_mode(j, n)?;
        if i == j {
            return Err(Error::InvalidModeSet("beamsplitter needs two distinct modes".into()));
        }
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        let e = Complex64::new(libm::cos(phi), libm::sin(phi));
        let mut m = CMatrix::identity(n, n);
        m[(i, i)] = Complex64::new(c, 0.0);
        m[(j, j)] = Complex64::new(c, 0.0);
        m[(i, j)] = e * s;
        m[(j, i)] = -e.conj() * s;
        Ok(Self { matrix: m })
    }

    pub fn phase(n: usize, mode: usize, phi: f64) -> Result<Self> {
        check_mode(mode, n)?;
        let mut m = CMatrix::identity(n, n);
        m[(mode, mode)] = Complex64::new(libm::cos(phi), libm::sin(phi));
        Ok(Self { matrix: m })
    }

    /// Unitary sending mode `j` to mode `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let sorted = normalize_mode_set(perm, n)?;
        if sorted.len() != n {
            return Err(Error::InvalidModeSet("not a permutation".into()));
        }
        let mut m = CMatrix::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        Ok(Self { matrix: m })
    }

    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            matrix: linalg::haar_unitary(n, rng),
        }
    }

    /// `exp(iH)` for a Hermitian generator.
    pub fn from_generator(h: &CMatrix) -> Self {
        Self {
            matrix: linalg::expm_i_hermitian(h),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }
}

fn check_mode(index: usize, modes: usize) -> Result<()> {
    if index >= modes {
        return Err(Error::ModeOutOfRange { index, modes });
    }
    Ok(())
}

/// Per-mode transmissivities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidTransmissivity(bad));
        }
        Ok(Self(p))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the `k` largest transmissivities.
    pub fn top_k_sum(&self, k: usize) -> f64 {
        linalg::top_k_sum(&self.0, k)
    }

    pub fn sorted_descending(&self) -> Vec<f64> {
        linalg::sorted_descending(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Effect {
    /// Projector onto a photon-number outcome of the measured modes.
    Fock(Vec<usize>),
    /// General POVM element on the measured subsystem, `0 ≤ E ≤ I`.
    Matrix(CMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSpec {
    measured_modes: Vec<usize>,
    effect: Effect,
}

impl MeasurementSpec {
    pub fn fock(measured_modes: Vec<usize>, outcome: Vec<usize>) -> Result<Self> {
        if measured_modes.len() != outcome.len() {
            return Err(Error::LengthMismatch {
                expected: measured_modes.len(),
                actual: outcome.len(),
            });
        }
        Ok(Self {
            measured_modes,
            effect: Effect::Fock(outcome),
        })
    }

    pub fn effect(measured_modes: Vec<usize>, effect: CMatrix) -> Result<Self> {
        if effect.nrows() != effect.ncols() {
            return Err(Error::InvalidEffect("effect matrix is not square".into()));
        }
        if linalg::hermiticity_deviation(&effect) > EFFECT_TOL {
            return Err(Error::InvalidEffect("effect is not Hermitian".into()));
        }
        let eig = linalg::hermitian_eigenvalues(&linalg::hermitize(&effect));
        let (lo, hi) = (
            eig.first().copied().unwrap_or(0.0),
            eig.last().copied().unwrap_or(0.0),
        );
        if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
            return Err(Error::InvalidEffect(format!(
                "eigenvalues in [{lo}, {hi}] outside [0, 1]"
            )));
        }
        Ok(Self {
            measured_modes,
            effect: Effect::Matrix(linalg::hermitize(&effect)),
        })
    }

    pub fn measured_modes(&self) -> &[usize] {
        &self.measured_modes
    }

    pub fn effect_kind(&self) -> &Effect {
        &self.effect
    }
}

/// Kraus-sum coefficient of the loss channel taking `|a⟩⟨b|` to
/// `|a-k⟩⟨b-k|`: `sqrt(C(a,k) C(b,k)) p^{(a+b)/2-k} (1-p)^k`.
struct LossTable {
    local: usize,
    coef: Vec<f64>,
}

impl LossTable {
    fn new(cutoff: usize, p: f64) -> Self {
        let local = cutoff + 1;
        let sp = libm::sqrt(p);
        let mut coef = vec![0.0; local * local * local];
        for a in 0..local {
            for b in 0..local {
                for k in 0..=a.min(b) {
                    let amp = libm::sqrt(binomial(a, k) * binomial(b, k));
                    coef[(a * local + b) * local + k] =
                        amp * powi(sp, (a + b - 2 * k) as i32) * powi(1.0 - p, k as i32);
                }
            }
        }
        Self { local, coef }
    }

    fn get(&self, a: usize, b: usize, k: usize) -> f64 {
        self.coef[(a * self.local + b) * self.local + k]
    }
}

fn powi(x: f64, n: i32) -> f64 {
    // 0^0 = 1 is relied upon for p = 0 and p = 1.
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

fn check_transmissivity(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidTransmissivity(p));
    }
    Ok(())
}

fn loss_matrix(trunc: &TruncationSpec, rho: &CMatrix, mode: usize, p: f64) -> CMatrix {
    let d = trunc.dimension();
    let stride = trunc.stride(mode);
    let table = LossTable::new(trunc.cutoff(), p);
    let mut out = CMatrix::zeros(d, d);
    for c in 0..d {
        let b = trunc.digit(c, mode);
        for r in 0..d {
            let v = rho[(r, c)];
            if v == ZERO {
                continue;
            }
            let a = trunc.digit(r, mode);
            for k in 0..=a.min(b) {
                out[(r - k * stride, c - k * stride)] += v * table.get(a, b, k);
            }
        }
    }
    out
}

/// Loss channel (generalized Bernoulli transformation) of transmissivity `p`
/// on one mode. Exact on the truncated space since loss never raises photon
/// number.
pub fn loss_channel(s: &MultiModeState, mode: usize, p: f64) -> Result<MultiModeState> {
    check_mode(mode, s.num_modes())?;
    check_transmissivity(p)?;
    let trunc = s.trunc();
    Ok(MultiModeState::from_parts(
        trunc,
        loss_matrix(&trunc, s.matrix(), mode, p),
        s.normalization(),
    ))
}

/// Independent loss on every mode.
pub fn multimode_loss(s: &MultiModeState, p: &LossVector) -> Result<MultiModeState> {
    if p.len() != s.num_modes() {
        return Err(Error::LengthMismatch {
            expected: s.num_modes(),
            actual: p.len(),
        });
    }
    let trunc = s.trunc();
    let mut m = s.matrix().clone();
    for (mode, &pj) in p.as_slice().iter().enumerate() {
        if pj != 1.0 {
            m = loss_matrix(&trunc, &m, mode, pj);
        }
    }
    Ok(MultiModeState::from_parts(trunc, m, s.normalization()))
}

/// Inverts the loss channel on one mode by back-substitution along the
/// photon-number diagonals, highest photon number first. The result is
/// Hermitian with the same trace but need not be PSD.
pub fn inverse_loss_matrix(
    trunc: &TruncationSpec,
    rho: &CMatrix,
    mode: usize,
    p: f64,
) -> Result<CMatrix> {
    check_mode(mode, trunc.num_modes())?;
    if p == 0.0 {
        return Err(Error::NonInvertible);
    }
    check_transmissivity(p)?;
    if p == 1.0 {
        return Ok(rho.clone());
    }
    let d = trunc.dimension();
    let cutoff = trunc.cutoff();
    let stride = trunc.stride(mode);
    let table = LossTable::new(cutoff, p);
    let sp = libm::sqrt(p);
    let diag_scale: Vec<f64> = (0..=2 * cutoff).map(|n| powi(sp, n as i32)).collect();
    if diag_scale.last().is_some_and(|&s| s == 0.0 || !s.is_normal()) {
        return Err(Error::NumericallySingular(p));
    }
    let rows_by_digit: Vec<Vec<usize>> = (0..=cutoff)
        .map(|a| (0..d).filter(|&r| trunc.digit(r, mode) == a).collect())
        .collect();
    let mut out = CMatrix::zeros(d, d);
    for a in (0..=cutoff).rev() {
        for &r in &rows_by_digit[a] {
            for c in 0..d {
                let b = trunc.digit(c, mode);
                let mut v = rho[(r, c)];
                for k in 1..=cutoff - a.max(b) {
                    v -= out[(r + k * stride, c + k * stride)] * table.get(a + k, b + k, k);
                }
                out[(r, c)] = v / diag_scale[a + b];
            }
        }
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericallySingular(p));
    }
    Ok(linalg::hermitize(&out))
}

pub fn inverse_loss_channel(s: &MultiModeState, mode: usize, p: f64) -> Result<CMatrix> {
    inverse_loss_matrix(&s.trunc(), s.matrix(), mode, p)
}

/// Inverse of [`multimode_loss`], mode by mode.
pub fn inverse_multimode_loss_matrix(
    trunc: &TruncationSpec,
    rho: &CMatrix,
    p: &[f64],
) -> Result<CMatrix> {
    if p.len() != trunc.num_modes() {
        return Err(Error::LengthMismatch {
            expected: trunc.num_modes(),
            actual: p.len(),
        });
    }
    let mut m = rho.clone();
    for (mode, &pj) in p.iter().enumerate() {
        if pj != 1.0 {
            m = inverse_loss_matrix(trunc, &m, mode, pj)?;
        }
    }
    Ok(m)
}

pub fn inverse_multimode_loss(s: &MultiModeState, p: &LossVector) -> Result<CMatrix> {
    inverse_multimode_loss_matrix(&s.trunc(), s.matrix(), p.as_slice())
}

/// One fixed-total-photon-number block of a lifted interferometer.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBlock {
    pub total: usize,
    /// Full-space basis indices of this sector, in basis order.
    pub indices: Vec<usize>,
    pub block: CMatrix,
}

/// Fock-space action of a mode unitary, stored block-diagonally by total
/// photon number. Blocks with total photon number above the cutoff are the
/// truncation of the true action and are not unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedInterferometer {
    trunc: TruncationSpec,
    sectors: Vec<SectorBlock>,
}

impl LiftedInterferometer {
    pub fn sectors(&self) -> &[SectorBlock] {
        &self.sectors
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.trunc.dimension();
        let mut m = CMatrix::zeros(d, d);
        for s in &self.sectors {
            for (i, &ri) in s.indices.iter().enumerate() {
                for (j, &cj) in s.indices.iter().enumerate() {
                    m[(ri, cj)] = s.block[(i, j)];
                }
            }
        }
        m
    }

    /// `L ρ L†`, computed block by block.
    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        let d = self.trunc.dimension();
        let mut out = CMatrix::zeros(d, d);
        for sa in &self.sectors {
            for sb in &self.sectors {
                let sub = CMatrix::from_fn(sa.indices.len(), sb.indices.len(), |i, j| {
                    rho[(sa.indices[i], sb.indices[j])]
                });
                if sub.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let moved = &sa.block * sub * sb.block.adjoint();
                for (i, &ri) in sa.indices.iter().enumerate() {
                    for (j, &cj) in sb.indices.iter().enumerate() {
                        out[(ri, cj)] = moved[(i, j)];
                    }
                }
            }
        }
        out
    }
}

/// A two-mode unitary `u` on modes `(i, j)` embedded in the identity.
#[derive(Clone, Debug)]
struct TwoModeRotation {
    i: usize,
    j: usize,
    u: [[Complex64; 2]; 2],
}

/// Factors `U = G_1 ⋯ G_L · D` into nearest-neighbour two-mode unitaries and
/// a diagonal of phases by Givens elimination below the diagonal.
fn givens_mesh(u: &CMatrix) -> (Vec<TwoModeRotation>, Vec<Complex64>) {
    let n = u.nrows();
    let mut t = u.clone();
    let mut eliminations = Vec::new();
    for col in 0..n {
        for row in (col + 1..n).rev() {
            let (a, b) = (t[(row - 1, col)], t[(row, col)]);
            if b.norm() == 0.0 {
                continue;
            }
            let norm = libm::hypot(a.norm(), b.norm());
            // G = [[a*, b*], [-b, a]] / norm maps (a, b) to (norm, 0).
            let g = [[a.conj() / norm, b.conj() / norm], [-b / norm, a / norm]];
            for c in 0..n {
                let (x, y) = (t[(row - 1, c)], t[(row, c)]);
                t[(row - 1, c)] = g[0][0] * x + g[0][1] * y;
                t[(row, c)] = g[1][0] * x + g[1][1] * y;
            }
            // Store G† so that U = G_1† ⋯ G_L† D.
            let gd = [
                [g[0][0].conj(), g[1][0].conj()],
                [g[0][1].conj(), g[1][1].conj()],
            ];
            eliminations.push(TwoModeRotation {
                i: row - 1,
                j: row,
                u: gd,
            });
        }
    }
    let phases = (0..n).map(|k| t[(k, k)]).collect();
    (eliminations, phases)
}

/// Fock amplitude `⟨q, m-q| u |n1, n2⟩` of a two-mode unitary with
/// `a_1† → u11 a_1† + u21 a_2†` and `a_2† → u12 a_1† + u22 a_2†`.
fn two_mode_amplitude(u: &[[Complex64; 2]; 2], n1: usize, n2: usize, q: usize) -> Complex64 {
    let m = n1 + n2;
    let mut acc = ZERO;
    for k in q.saturating_sub(n2)..=n1.min(q) {
        let l = q - k;
        let coef = binomial(n1, k) * binomial(n2, l);
        acc += u[0][0].powi(k as i32)
            * u[1][0].powi((n1 - k) as i32)
            * u[0][1].powi(l as i32)
            * u[1][1].powi((n2 - l) as i32)
            * coef;
    }
    let norm = libm::sqrt(factorial(q) * factorial(m - q) / (factorial(n1) * factorial(n2)));
    acc * norm
}

/// Lifts a mode unitary to the truncated Fock space through its
/// two-mode-rotation mesh. Exact and unitary on every sector with total
/// photon number ≤ cutoff; zero between sectors by construction.
pub fn lift_interferometer(u: &ModeUnitary, trunc: TruncationSpec) -> Result<LiftedInterferometer> {
    if u.dim() != trunc.num_modes() {
        return Err(Error::LengthMismatch {
            expected: trunc.num_modes(),
            actual: u.dim(),
        });
    }
    let deviation = u.unitarity_deviation();
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    let (mesh, phases) = givens_mesh(u.matrix());
    let d = trunc.dimension();
    let max_total = trunc.num_modes() * trunc.cutoff();
    let mut by_total: Vec<Vec<usize>> = vec![Vec::new(); max_total + 1];
    for idx in 0..d {
        by_total[trunc.total_photons(idx)].push(idx);
    }
    let mut position = vec![0usize; d];
    for members in &by_total {
        for (pos, &idx) in members.iter().enumerate() {
            position[idx] = pos;
        }
    }
    let cutoff = trunc.cutoff();
    let mut sectors = Vec::with_capacity(by_total.len());
    for (total, indices) in by_total.into_iter().enumerate() {
        let size = indices.len();
        let mut block = CMatrix::zeros(size, size);
        for (pos, &idx) in indices.iter().enumerate() {
            let mut ph = ONE;
            for (m, &z) in phases.iter().enumerate() {
                ph *= z.powi(trunc.digit(idx, m) as i32);
            }
            block[(pos, pos)] = ph;
        }
        for rot in mesh.iter().rev() {
            let (si, sj) = (trunc.stride(rot.i), trunc.stride(rot.j));
            let mut next = CMatrix::zeros(size, size);
            for (pos, &idx) in indices.iter().enumerate() {
                let (n1, n2) = (trunc.digit(idx, rot.i), trunc.digit(idx, rot.j));
                let base = idx - n1 * si - n2 * sj;
                let m = n1 + n2;
                for q in m.saturating_sub(cutoff)..=m.min(cutoff) {
                    let amp = two_mode_amplitude(&rot.u, n1, n2, q);
                    if amp == ZERO {
                        continue;
                    }
                    let target = position[base + q * si + (m - q) * sj];
                    for c in 0..size {
                        let v = block[(pos, c)];
                        next[(target, c)] += amp * v;
                    }
                }
            }
            block = next;
        }
        sectors.push(SectorBlock {
            total,
            indices,
            block,
        });
    }
    Ok(LiftedInterferometer { trunc, sectors })
}

fn sector_leak(s: &MultiModeState) -> f64 {
    let trunc = s.trunc();
    (0..trunc.dimension())
        .filter(|&i| trunc.total_photons(i) > trunc.cutoff())
        .map(|i| s.matrix()[(i, i)].re.abs())
        .sum()
}

/// Conjugates the state by the lifted interferometer. Requires the state to
/// live in photon-number sectors no larger than the cutoff, where the lift is
/// exact.
pub fn apply_interferometer(s: &MultiModeState, u: &ModeUnitary) -> Result<MultiModeState> {
    if sector_leak(s) > SECTOR_LEAK_TOL {
        return Err(Error::TruncationInexact);
    }
    let lifted = lift_interferometer(u, s.trunc())?;
    Ok(apply_lifted(s, &lifted))
}

pub fn apply_lifted(s: &MultiModeState, lifted: &LiftedInterferometer) -> MultiModeState {
    MultiModeState::from_parts(s.trunc(), lifted.conjugate(s.matrix()), s.normalization())
}

/// Every photon-number outcome on `count` modes within the cutoff, in basis
/// order.
pub fn fock_outcomes(cutoff: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..count {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..=cutoff).map(move |n| {
                    let mut t = prefix.clone();
                    t.push(n);
                    t
                })
            })
            .collect();
    }
    out
}

/// Unnormalized conditional operator on the kept modes (ascending order).
pub fn postselect_unnormalized(s: &MultiModeState, m: &MeasurementSpec) -> Result<MultiModeState> {
    let n = s.num_modes();
    if m.measured_modes.is_empty() || m.measured_modes.len() >= n {
        return Err(Error::InvalidModeSet(
            "measured modes must be a proper nonempty subset".into(),
        ));
    }
    let measured = normalize_mode_set(&m.measured_modes, n)?;
    // Fock outcomes and effect matrices are indexed in the caller's mode order.
    let caller_order = &m.measured_modes;
    let kept: Vec<usize> = (0..n).filter(|j| !measured.contains(j)).collect();
    let trunc = s.trunc();
    let kept_off = subsystem_offsets(&trunc, &kept);
    let meas_off = subsystem_offsets(&trunc, caller_order);
    let dk = kept_off.len();
    let rho = s.matrix();
    let out = match &m.effect {
        Effect::Fock(outcome) => {
            if outcome.iter().any(|&x| x > trunc.cutoff()) {
                return Err(Error::InvalidEffect(format!(
                    "outcome {outcome:?} exceeds the cutoff"
                )));
            }
            let offset: usize = caller_order
                .iter()
                .zip(outcome)
                .map(|(&mode, &k)| k * trunc.stride(mode))
                .sum();
            CMatrix::from_fn(dk, dk, |i, j| rho[(kept_off[i] + offset, kept_off[j] + offset)])
        }
        Effect::Matrix(e) => {
            if e.nrows() != meas_off.len() {
                return Err(Error::InvalidEffect(format!(
                    "effect dimension {} does not match measured subsystem {}",
                    e.nrows(),
                    meas_off.len()
                )));
            }
            // Tr_M[(I ⊗ E) ρ]_{ij} = Σ_{x,y} E_{xy} ρ_{(i,y),(j,x)}
            CMatrix::from_fn(dk, dk, |i, j| {
                let mut acc = ZERO;
                for (x, &mx) in meas_off.iter().enumerate() {
                    for (y, &my) in meas_off.iter().enumerate() {
                        let exy = e[(x, y)];
                        if exy != ZERO {
                            acc += exy * rho[(kept_off[i] + my, kept_off[j] + mx)];
                        }
                    }
                }
                acc
            })
        }
    };
    let kept_trunc = TruncationSpec::new(kept.len(), trunc.cutoff())?;
    Ok(MultiModeState::from_parts(kept_trunc, out, Normalization::Conditional))
}

/// Destructive measurement with post-selection: returns the normalized
/// conditional state of the kept modes and the outcome probability.
pub fn postselect(s: &MultiModeState, m: &MeasurementSpec) -> Result<(MultiModeState, f64)> {
    postselect_with_floor(s, m, DEFAULT_PROB_FLOOR)
}

pub fn postselect_with_floor(
    s: &MultiModeState,
    m: &MeasurementSpec,
    prob_floor: f64,
) -> Result<(MultiModeState, f64)> {
    let cond = postselect_unnormalized(s, m)?;
    let prob = cond.trace();
    if !(prob > prob_floor) {
        return Err(Error::ImpossibleOutcome(prob));
    }
    Ok((cond.renormalized()?, prob.min(1.0)))
}
