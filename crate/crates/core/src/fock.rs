//! Multimode bosonic states on a per-mode truncated Fock space.
//!
//! Basis vectors are photon-number tuples `(n_1, …, n_N)` with `0 ≤ n_j ≤ C`,
//! laid out in row-major order with the first mode varying slowest. Every
//! module indexes matrices through [`TruncationSpec`] so this layout is shared.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

pub const DEFAULT_DIMENSION_GUARD: usize = 10_000;
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
pub const DEFAULT_TRUNCATION_WARNING: f64 = 1e-6;

/// Hermiticity is restored by symmetrization; this is the largest asymmetry
/// accepted from callers before symmetrizing.
const HERMITIAN_INPUT_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationSpec {
    num_modes: usize,
    cutoff: usize,
}

impl TruncationSpec {
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_guard(num_modes, cutoff, DEFAULT_DIMENSION_GUARD)
    }

    pub fn with_guard(num_modes: usize, cutoff: usize, guard: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidTruncation("at least one mode is required".into()));
        }
        let local = cutoff
            .checked_add(1)
            .ok_or_else(|| Error::InvalidTruncation("cutoff overflows".into()))?;
        let mut dimension = 1usize;
        for _ in 0..num_modes {
            dimension = dimension
                .checked_mul(local)
                .filter(|&d| d <= guard)
                .ok_or(Error::DimensionGuard {
                    dimension: local.saturating_pow(num_modes as u32),
                    guard,
                })?;
        }
        Ok(Self { num_modes, cutoff })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Dimension of a single mode, `C + 1`.
    pub fn local_dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dimension(&self) -> usize {
        self.local_dim().pow(self.num_modes as u32)
    }

    /// Index distance between basis vectors differing by one photon in `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.local_dim().pow((self.num_modes - 1 - mode) as u32)
    }

    /// Photon number of `mode` in basis vector `index`.
    pub fn digit(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.local_dim()
    }

    pub fn index_of(&self, photons: &[usize]) -> Option<usize> {
        if photons.len() != self.num_modes {
            return None;
        }
        photons.iter().try_fold(0usize, |acc, &n| {
            (n <= self.cutoff).then(|| acc * self.local_dim() + n)
        })
    }

    pub fn tuple_of(&self, index: usize) -> Vec<usize> {
        (0..self.num_modes).map(|m| self.digit(index, m)).collect()
    }

    pub fn total_photons(&self, index: usize) -> usize {
        (0..self.num_modes).map(|m| self.digit(index, m)).sum()
    }

    fn with_modes(&self, num_modes: usize) -> Result<Self> {
        Self::new(num_modes, self.cutoff)
    }
}

/// Whether a state has unit trace or is a (possibly sub-normalized)
/// conditional operator produced by a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Normalized,
    Conditional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeState {
    trunc: TruncationSpec,
    matrix: CMatrix,
    normalization: Normalization,
}

impl MultiModeState {
    /// Validates and symmetrizes a normalized density matrix.
    pub fn from_matrix(trunc: TruncationSpec, matrix: CMatrix) -> Result<Self> {
        Self::from_matrix_with(trunc, matrix, Normalization::Normalized, DEFAULT_PSD_TOL)
    }

    /// Accepts a sub-normalized operator (trace in `[0, 1]`).
    pub fn conditional(trunc: TruncationSpec, matrix: CMatrix) -> Result<Self> {
        Self::from_matrix_with(trunc, matrix, Normalization::Conditional, DEFAULT_PSD_TOL)
    }

    pub fn from_matrix_with(
        trunc: TruncationSpec,
        matrix: CMatrix,
        normalization: Normalization,
        psd_tol: f64,
    ) -> Result<Self> {
        let dim = trunc.dimension();
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let asym = linalg::hermiticity_deviation(&matrix);
        if asym > HERMITIAN_INPUT_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:e})")));
        }
        let matrix = linalg::hermitize(&matrix);
        let tr = linalg::trace(&matrix).re;
        match normalization {
            Normalization::Normalized if (tr - 1.0).abs() > TRACE_TOL => {
                return Err(Error::InvalidState(format!("trace {tr} is not 1")));
            }
            Normalization::Conditional if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) => {
                return Err(Error::InvalidState(format!("conditional trace {tr} outside [0, 1]")));
            }
            _ => {}
        }
        let min_eig = linalg::hermitian_min_eigenvalue(&matrix);
        if min_eig < -psd_tol {
            return Err(Error::InvalidState(format!("not PSD (minimum eigenvalue {min_eig:e})")));
        }
        Ok(Self {
            trunc,
            matrix,
            normalization,
        })
    }

    /// For channel outputs whose validity follows from the input's.
    pub(crate) fn from_parts(
        trunc: TruncationSpec,
        matrix: CMatrix,
        normalization: Normalization,
    ) -> Self {
        Self {
            trunc,
            matrix: linalg::hermitize(&matrix),
            normalization,
        }
    }

    pub fn vacuum(trunc: TruncationSpec) -> Self {
        let mut m = CMatrix::zeros(trunc.dimension(), trunc.dimension());
        m[(0, 0)] = linalg::ONE;
        Self::from_parts(trunc, m, Normalization::Normalized)
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn num_modes(&self) -> usize {
        self.trunc.num_modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self)
    }

    /// Divides by the trace, producing a normalized state.
    pub fn renormalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidState("zero trace".into()));
        }
        Ok(Self::from_parts(
            self.trunc,
            self.matrix.unscale(tr),
            Normalization::Normalized,
        ))
    }

    /// Largest total photon number carrying weight above `tol` on the
    /// diagonal.
    pub fn max_total_photons(&self, tol: f64) -> usize {
        (0..self.trunc.dimension())
            .filter(|&i| self.matrix[(i, i)].re > tol)
            .map(|i| self.trunc.total_photons(i))
            .max()
            .unwrap_or(0)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }
}

/// Smallest eigenvalue of the state's matrix.
pub fn min_eigenvalue(s: &MultiModeState) -> f64 {
    linalg::hermitian_min_eigenvalue(&s.matrix)
}

pub fn tensor(a: &MultiModeState, b: &MultiModeState) -> Result<MultiModeState> {
    if a.trunc.cutoff != b.trunc.cutoff {
        return Err(Error::CutoffMismatch {
            left: a.trunc.cutoff,
            right: b.trunc.cutoff,
        });
    }
    let trunc = a.trunc.with_modes(a.num_modes() + b.num_modes())?;
    let normalization = match (a.normalization, b.normalization) {
        (Normalization::Normalized, Normalization::Normalized) => Normalization::Normalized,
        _ => Normalization::Conditional,
    };
    Ok(MultiModeState::from_parts(
        trunc,
        a.matrix.kronecker(&b.matrix),
        normalization,
    ))
}

/// Validates a set of mode indices, returning it sorted and deduplicated.
pub(crate) fn normalize_mode_set(modes: &[usize], num_modes: usize) -> Result<Vec<usize>> {
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != modes.len() {
        return Err(Error::InvalidModeSet("duplicate mode index".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&m| m >= num_modes) {
        return Err(Error::ModeOutOfRange {
            index: bad,
            modes: num_modes,
        });
    }
    Ok(sorted)
}

/// Offsets into the full index for every basis tuple of the given modes,
/// enumerated in the shared row-major order restricted to those modes.
pub(crate) fn subsystem_offsets(trunc: &TruncationSpec, modes: &[usize]) -> Vec<usize> {
    let local = trunc.local_dim();
    let mut offsets = vec![0usize];
    for &m in modes {
        let stride = trunc.stride(m);
        offsets = offsets
            .iter()
            .flat_map(|&o| (0..local).map(move |n| o + n * stride))
            .collect();
    }
    offsets
}

/// Reduced state on `keep`; the kept modes appear in ascending order.
pub fn partial_trace(s: &MultiModeState, keep: &[usize]) -> Result<MultiModeState> {
    if keep.is_empty() {
        return Err(Error::InvalidModeSet("keep set is empty".into()));
    }
    let keep = normalize_mode_set(keep, s.num_modes())?;
    let traced: Vec<usize> = (0..s.num_modes()).filter(|m| !keep.contains(m)).collect();
    let trunc = s.trunc.with_modes(keep.len())?;
    let kept_off = subsystem_offsets(&s.trunc, &keep);
    let traced_off = subsystem_offsets(&s.trunc, &traced);
    let dk = kept_off.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += s.matrix[(ri + t, cj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(MultiModeState::from_parts(trunc, out, s.normalization))
}

/// Mass beyond the cutoff for a truncated constructor, and whether it
/// exceeded the configured warning threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedWeight {
    pub weight: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuiltState {
    pub state: MultiModeState,
    pub truncation: TruncatedWeight,
}

/// Constructors for the standard families of states on a fixed truncation.
#[derive(Clone, Copy, Debug)]
pub struct StateBuilder {
    trunc: TruncationSpec,
    warn_threshold: f64,
}

impl StateBuilder {
    pub fn new(trunc: TruncationSpec) -> Self {
        Self {
            trunc,
            warn_threshold: DEFAULT_TRUNCATION_WARNING,
        }
    }

    pub fn with_warning_threshold(mut self, threshold: f64) -> Self {
        self.warn_threshold = threshold;
        self
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn vacuum(&self) -> MultiModeState {
        MultiModeState::vacuum(self.trunc)
    }

    pub fn fock(&self, photons: &[usize]) -> Result<MultiModeState> {
        if photons.len() != self.trunc.num_modes {
            return Err(Error::LengthMismatch {
                expected: self.trunc.num_modes,
                actual: photons.len(),
            });
        }
        let idx = self.trunc.index_of(photons).ok_or_else(|| {
            Error::InvalidState(format!("photon numbers {photons:?} exceed the cutoff"))
        })?;
        let d = self.trunc.dimension();
        let mut m = CMatrix::zeros(d, d);
        m[(idx, idx)] = linalg::ONE;
        Ok(MultiModeState::from_parts(self.trunc, m, Normalization::Normalized))
    }

    /// Normalized pure state from `(photon tuple, amplitude)` pairs; repeated
    /// tuples are summed.
    pub fn pure(&self, amplitudes: &[(Vec<usize>, Complex64)]) -> Result<MultiModeState> {
        let d = self.trunc.dimension();
        let mut psi = vec![ZERO; d];
        for (tuple, amp) in amplitudes {
            let idx = self.trunc.index_of(tuple).ok_or_else(|| {
                Error::InvalidState(format!("photon numbers {tuple:?} invalid for truncation"))
            })?;
            psi[idx] += amp;
        }
        self.from_vector(&psi)
    }

    /// Normalized pure state from a full amplitude vector in basis order.
    pub fn from_vector(&self, psi: &[Complex64]) -> Result<MultiModeState> {
        let d = self.trunc.dimension();
        if psi.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: psi.len(),
            });
        }
        let norm = libm::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("amplitudes have zero norm".into()));
        }
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(MultiModeState::from_parts(self.trunc, m, Normalization::Normalized))
    }

    /// Product of coherent states, renormalized after truncation.
    pub fn coherent(&self, alphas: &[Complex64]) -> Result<BuiltState> {
        self.check_len(alphas.len())?;
        let c = self.trunc.cutoff;
        let mut factors = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let mut amps = Vec::with_capacity(c + 1);
            let env = libm::exp(-alpha.norm_sqr() / 2.0);
            let mut term = Complex64::new(env, 0.0);
            for n in 0..=c {
                if n > 0 {
                    term = term * alpha / libm::sqrt(n as f64);
                }
                amps.push(term);
            }
            factors.push(amps);
        }
        let tails: Vec<f64> = alphas.iter().map(|a| poisson_tail(a.norm_sqr(), c)).collect();
        let psi = factors.iter().fold(vec![linalg::ONE], |acc, f| {
            acc.iter()
                .flat_map(|&x| f.iter().map(move |&y| x * y))
                .collect()
        });
        let state = self.from_vector(&psi)?;
        Ok(self.built(state, product_tail(&tails)))
    }

    /// Product of thermal states with the given mean photon numbers,
    /// renormalized after truncation.
    pub fn thermal(&self, mean_photons: &[f64]) -> Result<BuiltState> {
        self.check_len(mean_photons.len())?;
        let c = self.trunc.cutoff;
        let mut factors = Vec::with_capacity(mean_photons.len());
        let mut tails = Vec::with_capacity(mean_photons.len());
        for &nbar in mean_photons {
            if !(nbar >= 0.0) || !nbar.is_finite() {
                return Err(Error::InvalidParameter(format!("mean photon number {nbar}")));
            }
            let ratio = nbar / (1.0 + nbar);
            let first = 1.0 / (1.0 + nbar);
            let probs: Vec<f64> = (0..=c)
                .map(|n| first * libm::pow(ratio, n as f64))
                .collect();
            factors.push(probs);
            tails.push(libm::pow(ratio, (c + 1) as f64));
        }
        let weight = product_tail(&tails);
        let kept = 1.0 - weight;
        let diag = factors
            .iter()
            .fold(vec![1.0f64], |acc, f| {
                acc.iter().flat_map(|&x| f.iter().map(move |&y| x * y)).collect()
            });
        let d = self.trunc.dimension();
        let mut m = CMatrix::zeros(d, d);
        for (i, &w) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(w / kept, 0.0);
        }
        let state = MultiModeState::from_parts(self.trunc, m, Normalization::Normalized);
        Ok(self.built(state, weight))
    }

    /// Convex combination; weights must be nonnegative and sum to one.
    pub fn mixture(&self, components: &[(f64, MultiModeState)]) -> Result<MultiModeState> {
        if components.is_empty() {
            return Err(Error::InvalidState("empty mixture".into()));
        }
        let d = self.trunc.dimension();
        let mut m = CMatrix::zeros(d, d);
        let mut total = 0.0;
        for (w, s) in components {
            if !(*w >= 0.0) {
                return Err(Error::InvalidState(format!("negative mixture weight {w}")));
            }
            if s.trunc != self.trunc {
                return Err(Error::InvalidState("mixture component truncation differs".into()));
            }
            m += s.matrix.scale(*w);
            total += w;
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        MultiModeState::from_matrix(self.trunc, m)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.trunc.num_modes {
            return Err(Error::LengthMismatch {
                expected: self.trunc.num_modes,
                actual: len,
            });
        }
        Ok(())
    }

    fn built(&self, state: MultiModeState, weight: f64) -> BuiltState {
        let weight = weight.max(0.0);
        BuiltState {
            state,
            truncation: TruncatedWeight {
                weight,
                flagged: weight > self.warn_threshold,
            },
        }
    }
}

/// `P(n > cutoff)` for a Poisson distribution of mean `lambda`, summed
/// directly over the tail to avoid cancellation.
fn poisson_tail(lambda: f64, cutoff: usize) -> f64 {
    let mut term = libm::exp(-lambda);
    for n in 1..=cutoff + 1 {
        term *= lambda / n as f64;
    }
    let mut tail = 0.0;
    let mut n = cutoff + 1;
    while term > tail * 1e-17 && term > 0.0 {
        tail += term;
        n += 1;
        term *= lambda / n as f64;
    }
    tail
}

/// Mass outside the truncated product space given per-mode tails:
/// `1 - Π(1 - t_j)`.
fn product_tail(tails: &[f64]) -> f64 {
    -libm::expm1(tails.iter().map(|&t| libm::log1p(-t)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(c: usize) -> StateBuilder {
        StateBuilder::new(TruncationSpec::new(1, c).unwrap())
    }

    #[test]
    fn truncation_guard() {
        assert!(TruncationSpec::new(4, 9).is_ok());
        assert!(matches!(
            TruncationSpec::new(5, 9),
            Err(Error::DimensionGuard { .. })
        ));
        assert!(TruncationSpec::new(0, 3).is_err());
        assert!(TruncationSpec::with_guard(2, 3, 15).is_err());
    }

    #[test]
    fn index_layout_first_mode_slowest() {
        let t = TruncationSpec::new(3, 2).unwrap();
        assert_eq!(t.index_of(&[0, 0, 1]), Some(1));
        assert_eq!(t.index_of(&[1, 0, 0]), Some(9));
        assert_eq!(t.tuple_of(14), vec![1, 1, 2]);
        assert_eq!(t.index_of(&[3, 0, 0]), None);
    }

    #[test]
    fn tensor_fock_gives_psi() {
        let b = single(1);
        let one = b.fock(&[1]).unwrap();
        let zero = b.fock(&[0]).unwrap();
        let psi = tensor(&one, &zero).unwrap();
        let t2 = TruncationSpec::new(2, 1).unwrap();
        let expected = StateBuilder::new(t2).fock(&[1, 0]).unwrap();
        assert_eq!(psi, expected);
    }

    #[test]
    fn tensor_rejects_cutoff_mismatch() {
        let a = single(1).vacuum();
        let b = single(2).vacuum();
        assert!(matches!(tensor(&a, &b), Err(Error::CutoffMismatch { .. })));
    }

    #[test]
    fn tensor_with_vacuum_then_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = TruncationSpec::new(2, 2).unwrap();
        let rho = random_state(t, 3, &mut rng);
        let vac = MultiModeState::vacuum(TruncationSpec::new(1, 2).unwrap());
        let back = partial_trace(&tensor(&rho, &vac).unwrap(), &[0, 1]).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn tensor_trace_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = TruncationSpec::new(1, 3).unwrap();
        for _ in 0..10 {
            let a = random_state(t, 2, &mut rng);
            let b = random_state(t, 4, &mut rng);
            let (wa, wb) = (0.3, 0.65);
            let a = MultiModeState::conditional(t, a.matrix().scale(wa)).unwrap();
            let b = MultiModeState::conditional(t, b.matrix().scale(wb)).unwrap();
            let ab = tensor(&a, &b).unwrap();
            // Direct oracle: sum over diagonal products.
            let mut direct = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    direct += a.matrix()[(i, i)].re * b.matrix()[(j, j)].re;
                }
            }
            assert!((ab.trace() - direct).abs() < 1e-14);
            assert!((ab.trace() - wa * wb).abs() < 1e-12);
            assert_eq!(ab.normalization(), Normalization::Conditional);
        }
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = TruncationSpec::new(1, 2).unwrap();
        let (a, b, c) = (
            random_state(t, 2, &mut rng),
            random_state(t, 3, &mut rng),
            random_state(t, 1, &mut rng),
        );
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(left.matrix(), right.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_of_psi_prime() {
        let t = TruncationSpec::new(2, 1).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = StateBuilder::new(t)
            .pure(&[
                (vec![1, 0], Complex64::new(h, 0.0)),
                (vec![0, 1], Complex64::new(h, 0.0)),
            ])
            .unwrap();
        for keep in [[0usize], [1]] {
            let r = partial_trace(&psi, &keep).unwrap();
            assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!((r.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
            assert!(r.matrix()[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_product_and_all_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t1 = TruncationSpec::new(1, 2).unwrap();
        let t2 = TruncationSpec::new(2, 2).unwrap();
        let a = random_state(t2, 3, &mut rng);
        let b = random_state(t1, 2, &mut rng);
        let ab = tensor(&a, &b).unwrap();
        let ra = partial_trace(&ab, &[0, 1]).unwrap();
        assert!(linalg::max_abs_diff(ra.matrix(), a.matrix()) < 1e-14);
        let rb = partial_trace(&ab, &[2]).unwrap();
        assert!(linalg::max_abs_diff(rb.matrix(), b.matrix()) < 1e-14);
        let all = partial_trace(&ab, &[2, 0, 1]).unwrap();
        assert_eq!(all.matrix(), ab.matrix());
    }

    #[test]
    fn partial_trace_errors() {
        let s = MultiModeState::vacuum(TruncationSpec::new(2, 1).unwrap());
        assert!(matches!(partial_trace(&s, &[]), Err(Error::InvalidModeSet(_))));
        assert!(matches!(
            partial_trace(&s, &[2]),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(partial_trace(&s, &[0, 0]).is_err());
    }

    #[test]
    fn nested_partial_trace_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = TruncationSpec::new(3, 2).unwrap();
        let s = random_state(t, 5, &mut rng);
        let nested = partial_trace(&partial_trace(&s, &[1, 2]).unwrap(), &[0]).unwrap();
        let direct = partial_trace(&s, &[1]).unwrap();
        // Index-contraction oracle: sum rho[(a,b,c),(a,b',c)] over a, c.
        let mut oracle = CMatrix::zeros(3, 3);
        for b in 0..3 {
            for bp in 0..3 {
                for a in 0..3 {
                    for c in 0..3 {
                        oracle[(b, bp)] += s.matrix()[(a * 9 + b * 3 + c, a * 9 + bp * 3 + c)];
                    }
                }
            }
        }
        assert!(linalg::max_abs_diff(nested.matrix(), direct.matrix()) < 1e-14);
        assert!(linalg::max_abs_diff(direct.matrix(), &oracle) < 1e-14);
        assert!(direct.min_eigenvalue() >= -DEFAULT_PSD_TOL);
    }

    #[test]
    fn min_eigenvalues_of_simple_states() {
        let b = single(2);
        assert!(b.fock(&[1]).unwrap().min_eigenvalue().abs() < 1e-15);
        let mix = b
            .mixture(&[(0.3, b.fock(&[1]).unwrap()), (0.7, b.fock(&[0]).unwrap())])
            .unwrap();
        assert!(mix.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn constructors_respect_invariants() {
        let t = TruncationSpec::new(2, 4).unwrap();
        let b = StateBuilder::new(t);
        let states = [
            b.fock(&[2, 1]).unwrap(),
            b.coherent(&[Complex64::new(0.4, -0.2), Complex64::new(0.0, 0.7)])
                .unwrap()
                .state,
            b.thermal(&[0.3, 0.1]).unwrap().state,
            b.pure(&[
                (vec![0, 0], Complex64::new(1.0, 0.0)),
                (vec![2, 2], Complex64::new(0.0, 2.0)),
            ])
            .unwrap(),
        ];
        for s in &states {
            assert!(linalg::hermiticity_deviation(s.matrix()) <= 1e-12);
            assert!(s.min_eigenvalue() >= -1e-9);
            assert!((s.trace() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn from_matrix_rejects_bad_input() {
        let t = TruncationSpec::new(1, 1).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(MultiModeState::from_matrix(t, m).is_err());
        let half = CMatrix::identity(2, 2).scale(0.25);
        assert!(MultiModeState::from_matrix(t, half.clone()).is_err());
        assert!(MultiModeState::conditional(t, half).is_ok());
    }

    #[test]
    fn coherent_truncated_weight_decreases_with_cutoff() {
        let alpha = Complex64::new(1.0, 0.5);
        let lambda = alpha.norm_sqr();
        let mut last = f64::INFINITY;
        for c in 5..=20 {
            let w = single(c).coherent(&[alpha]).unwrap().truncation.weight;
            assert!(w < last, "cutoff {c}: {w} !< {last}");
            last = w;
            if lambda <= c as f64 / 4.0 {
                // Chernoff bound for the Poisson tail P(n > C).
                let k = (c + 1) as f64;
                let bound = libm::exp(-lambda) * libm::pow(core::f64::consts::E * lambda / k, k);
                assert!(w <= bound, "cutoff {c}: {w} > {bound}");
            }
        }
        let flagged = single(3).coherent(&[alpha]).unwrap().truncation;
        assert!(flagged.flagged);
        assert!(!single(20).coherent(&[alpha]).unwrap().truncation.flagged);
    }

    #[test]
    fn mixture_validation() {
        let b = single(1);
        let v = b.vacuum();
        assert!(b.mixture(&[(0.5, v.clone())]).is_err());
        assert!(b.mixture(&[(-0.5, v.clone()), (1.5, v.clone())]).is_err());
        assert!(b.mixture(&[]).is_err());
    }
}
