//! End-to-end checks of the no-increase theorem.
//!
//! A scenario generates `ρ = W E_p(ρ₀) W†`, processes it with an
//! interferometer `Y` and a post-selected measurement, and certifies the
//! output through the decomposition of the merged interferometer: after the
//! interferometer `X` of the trace, inverting loss with `p''` on the kept
//! modes must give a positive operator. Catalysis experiments compare the
//! single-mode efficiencies of a processed product state with those of its
//! factors.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{self, ProofTrace};
use crate::efficiency::{self, EfficiencyCertificate, Tolerances};
use crate::error::{Error, Result};
use crate::fock::{MultiModeState, Normalization, TruncationSpec};
use crate::linalg::{self, CMatrix};
use crate::optics::{self, Effect, LossVector, MeasurementSpec, ModeUnitary};
use crate::random;

/// Transmissivities below this are treated as total loss when certifying.
pub const TOTAL_LOSS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarnessTolerances {
    pub psd_tol: f64,
    /// Outcomes less likely than this are rejected by [`run_scenario`].
    pub prob_floor: f64,
    /// Outcomes less likely than this are skipped when enumerating.
    pub outcome_floor: f64,
    /// A slack below `-violation_slack` counts as a violation.
    pub violation_slack: f64,
    /// Bisection tolerance for the single-mode efficiencies of catalysis
    /// experiments.
    pub bisect_tol: f64,
}

impl Default for HarnessTolerances {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            prob_floor: optics::DEFAULT_PROB_FLOOR,
            outcome_floor: 1e-6,
            violation_slack: 1e-6,
            bisect_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub rho0: MultiModeState,
    pub p: LossVector,
    pub w: ModeUnitary,
    pub y: ModeUnitary,
    /// `None` keeps every mode.
    pub measurement: Option<MeasurementSpec>,
    pub k: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn num_modes(&self) -> usize {
        self.rho0.num_modes()
    }

    /// Kept modes in ascending order.
    pub fn kept_modes(&self) -> Vec<usize> {
        let measured = self.measurement.as_ref().map_or(&[][..], |m| m.measured_modes());
        (0..self.num_modes()).filter(|j| !measured.contains(j)).collect()
    }

    /// `ρ = W E_p(ρ₀) W†`.
    pub fn input_state(&self) -> Result<MultiModeState> {
        optics::apply_interferometer(&optics::multimode_loss(&self.rho0, &self.p)?, &self.w)
    }

    /// Same scenario with the measurement replaced by a Fock outcome on the
    /// same modes.
    pub fn with_outcome(&self, outcome: Vec<usize>) -> Result<Self> {
        let modes = self
            .measurement
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("scenario measures no modes".into()))?
            .measured_modes()
            .to_vec();
        Ok(Self {
            measurement: Some(MeasurementSpec::fock(modes, outcome)?),
            ..self.clone()
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_modes();
        for len in [self.p.len(), self.w.dim(), self.y.dim()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        let m = self.kept_modes().len();
        if self.k == 0 || self.k > m {
            return Err(Error::InvalidParameter(alloc::format!(
                "need 1 ≤ K ≤ M, got K = {} with M = {m}",
                self.k
            )));
        }
        if self.rho0.max_total_photons(0.0) > self.rho0.trunc().cutoff() {
            return Err(Error::TruncationInexact);
        }
        Ok(())
    }
}

/// Permutation moving the kept modes, in ascending order, to the front and
/// the measured modes, in the measurement's order, behind them.
fn kept_first(n: usize, kept: &[usize], measured: &[usize]) -> Result<ModeUnitary> {
    let mut perm = alloc::vec![0; n];
    for (pos, &mode) in kept.iter().chain(measured).enumerate() {
        perm[mode] = pos;
    }
    ModeUnitary::permutation(&perm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    /// Trivial representation `(W, p, ρ₀)` of the input.
    pub input: EfficiencyCertificate,
    /// Normalized output state on the kept modes, ascending.
    pub output: MultiModeState,
    pub kept_modes: Vec<usize>,
    pub probability: f64,
    pub trace: ProofTrace,
    /// `Σ_{k≤K} p''_k`.
    pub certified_bound: f64,
    /// `Σ_{ℓ≤K} p↓_ℓ`.
    pub input_sum: f64,
    pub slack: f64,
    /// Smallest slack over every `K ≤ M`.
    pub worst_slack: f64,
    /// Smallest eigenvalue after inverting loss with `p''`, or minus the
    /// non-vacuum weight of a totally lost mode if that is smaller.
    pub margin: f64,
    pub bound_holds: bool,
    pub constructive_holds: bool,
}

impl ScenarioReport {
    pub fn holds(&self) -> bool {
        self.bound_holds && self.constructive_holds
    }
}

/// Inverts loss with `p_out` on `state` and returns the smallest eigenvalue.
/// Modes with `p_out < TOTAL_LOSS_TOL` must instead be empty.
pub fn constructive_margin(state: &MultiModeState, p_out: &[f64]) -> Result<f64> {
    let trunc = state.trunc();
    let mut p = p_out.to_vec();
    let mut vacuum_violation = 0.0f64;
    for (mode, pk) in p.iter_mut().enumerate() {
        if *pk < TOTAL_LOSS_TOL {
            *pk = 1.0;
            let occupied: f64 = (0..trunc.dimension())
                .filter(|&i| trunc.digit(i, mode) > 0)
                .map(|i| state.matrix()[(i, i)].re)
                .sum();
            vacuum_violation = vacuum_violation.max(occupied);
        }
    }
    let inverse = optics::inverse_multimode_loss_matrix(&trunc, state.matrix(), &p)?;
    Ok(linalg::hermitian_min_eigenvalue(&inverse).min(-vacuum_violation))
}

pub fn run_scenario(sc: &Scenario, tol: &HarnessTolerances) -> Result<ScenarioReport> {
    sc.validate()?;
    let n = sc.num_modes();
    let kept = sc.kept_modes();
    let m = kept.len();
    let measured = sc.measurement.as_ref().map_or(&[][..], |x| x.measured_modes());
    let perm = kept_first(n, &kept, measured)?;
    let merged = perm.compose(&sc.y)?.compose(&sc.w)?;

    let processed = optics::apply_interferometer(&sc.input_state()?, &perm.compose(&sc.y)?)?;
    let (output, probability) = match &sc.measurement {
        None => (processed, 1.0),
        Some(spec) => {
            let relabelled = match spec.effect_kind() {
                Effect::Fock(outcome) => MeasurementSpec::fock((m..n).collect(), outcome.clone())?,
                Effect::Matrix(e) => MeasurementSpec::effect((m..n).collect(), e.clone())?,
            };
            optics::postselect_with_floor(&processed, &relabelled, tol.prob_floor)?
        }
    };

    let trace = decomposition::output_transmissivities(&merged, &sc.p, m, sc.k)?;
    let x_block = ModeUnitary::new(trace.x.view((0, 0), (m, m)).into_owned())?;
    let rotated = optics::apply_interferometer(&output, &x_block)?;
    let margin = constructive_margin(&rotated, &trace.p_out)?;

    let certified_bound = trace.certified_bound();
    let input_sum = trace.input_sum();
    let worst_slack = (1..=m)
        .map(|k| sc.p.top_k_sum(k) - linalg::top_k_sum(&trace.p_out, k))
        .fold(f64::INFINITY, f64::min);
    let rho0_margin = sc.rho0.min_eigenvalue();
    Ok(ScenarioReport {
        input: EfficiencyCertificate {
            w: sc.w.clone(),
            p: sc.p.clone(),
            rho0: sc.rho0.clone(),
            margin: rho0_margin,
            value: input_sum,
            k: sc.k,
        },
        output,
        kept_modes: kept,
        probability,
        certified_bound,
        input_sum,
        slack: input_sum - certified_bound,
        worst_slack,
        margin,
        bound_holds: worst_slack >= -tol.violation_slack,
        constructive_holds: margin >= -tol.psd_tol,
        trace,
    })
}

/// Runs the scenario for every Fock outcome on its measured modes with
/// probability at least `outcome_floor`, in basis order. A scenario without
/// a measurement yields its single report.
pub fn run_all_outcomes(sc: &Scenario, tol: &HarnessTolerances) -> Result<Vec<(Vec<usize>, ScenarioReport)>> {
    let Some(spec) = &sc.measurement else {
        return Ok(alloc::vec![(Vec::new(), run_scenario(sc, tol)?)]);
    };
    let cutoff = sc.rho0.trunc().cutoff();
    let mut out = Vec::new();
    let floor = HarnessTolerances {
        prob_floor: tol.outcome_floor,
        ..*tol
    };
    for outcome in optics::fock_outcomes(cutoff, spec.measured_modes().len()) {
        match run_scenario(&sc.with_outcome(outcome.clone())?, &floor) {
            Ok(report) => out.push((outcome, report)),
            Err(Error::ImpossibleOutcome(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Random scenario: Haar `W` and `Y`, uniform `p`, a random mixed `ρ₀` with
/// at most `cutoff` photons in total, a random proper subset of measured
/// modes with a random Fock outcome, and a random `K ≤ M`.
pub fn random_scenario(n: usize, cutoff: usize, seed: u64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trunc = TruncationSpec::new(n, cutoff)?;
    let rank = rng.random_range(1..=3);
    let rho0 = random::random_bounded_state(trunc, rank, cutoff, &mut rng);
    let p = LossVector::new(random::uniform_loss(n, 0.0, 1.0, &mut rng))?;
    let w = ModeUnitary::haar(n, &mut rng);
    let y = ModeUnitary::haar(n, &mut rng);
    let measured_count = rng.random_range(0..n);
    let mut modes: Vec<usize> = (0..n).collect();
    modes.shuffle(&mut rng);
    modes.truncate(measured_count);
    let measurement = if modes.is_empty() {
        None
    } else {
        let outcome = (0..modes.len()).map(|_| rng.random_range(0..=cutoff)).collect();
        Some(MeasurementSpec::fock(modes, outcome)?)
    };
    let k = rng.random_range(1..=n - measured_count);
    Ok(Scenario {
        rho0,
        p,
        w,
        y,
        measurement,
        k,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalysisReport {
    pub input_efficiencies: Vec<f64>,
    /// Single-mode efficiencies of the kept output modes, ascending mode
    /// order.
    pub output_efficiencies: Vec<f64>,
    pub probability: f64,
    /// [`decomposition::weak_majorization_slack`] of the output against the
    /// input efficiencies.
    pub slack: f64,
    pub holds: bool,
}

/// Processes `⊗ inputs` with `Y` and the measurement, then compares the
/// single-mode efficiencies of the output modes with those of the inputs.
pub fn catalysis_experiment(
    inputs: &[MultiModeState],
    y: &ModeUnitary,
    measurement: Option<&MeasurementSpec>,
    tol: &HarnessTolerances,
) -> Result<CatalysisReport> {
    let (first, rest) = inputs
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no input modes".into()))?;
    let eff_tol = Tolerances {
        bisect_tol: tol.bisect_tol,
        psd_tol: tol.psd_tol,
        ..Tolerances::default()
    };
    let input_efficiencies = inputs
        .iter()
        .map(|s| efficiency::single_mode_efficiency(s, &eff_tol).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut state = first.clone();
    for s in rest {
        state = state.tensor(s)?;
    }
    let processed = optics::apply_interferometer(&state, y)?;
    let (output, probability) = match measurement {
        None => (processed, 1.0),
        Some(spec) => optics::postselect_with_floor(&processed, spec, tol.prob_floor)?,
    };
    let s = efficiency::s_efficiency(&output, 1, &eff_tol)?;
    let slack = decomposition::weak_majorization_slack(&s.per_mode, &input_efficiencies);
    Ok(CatalysisReport {
        input_efficiencies,
        output_efficiencies: s.per_mode,
        probability,
        slack,
        holds: slack >= -tol.violation_slack,
    })
}

/// Random single-mode factors with at most `cutoff` photons in total, a Haar
/// `Y`, and a measurement of one random mode whose outcome is sampled from
/// its distribution.
pub fn random_catalysis(
    n: usize,
    cutoff: usize,
    seed: u64,
    tol: &HarnessTolerances,
) -> Result<CatalysisReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("catalysis needs at least two modes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let single = TruncationSpec::new(1, cutoff)?;
    let mut caps = alloc::vec![0usize; n];
    for _ in 0..cutoff {
        caps[rng.random_range(0..n)] += 1;
    }
    let inputs: Vec<MultiModeState> = caps
        .iter()
        .map(|&cap| {
            let rank = rng.random_range(1..=2);
            random::random_bounded_state(single, rank, cap, &mut rng)
        })
        .collect();
    let y = ModeUnitary::haar(n, &mut rng);
    let mode = rng.random_range(0..n);

    let mut state = inputs[0].clone();
    for s in &inputs[1..] {
        state = state.tensor(s)?;
    }
    let processed = optics::apply_interferometer(&state, &y)?;
    let probs: Vec<f64> = (0..=cutoff)
        .map(|k| {
            MeasurementSpec::fock(alloc::vec![mode], alloc::vec![k])
                .and_then(|m| optics::postselect_unnormalized(&processed, &m))
                .map(|c| c.trace())
        })
        .collect::<Result<_>>()?;
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut outcome = 0;
    for (k, &pk) in probs.iter().enumerate() {
        outcome = k;
        if u < pk && pk > tol.prob_floor {
            break;
        }
        u -= pk;
    }
    // Rounding can leave the sample on an impossible tail outcome.
    if probs[outcome] <= tol.prob_floor {
        outcome = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
    }
    let spec = MeasurementSpec::fock(alloc::vec![mode], alloc::vec![outcome])?;
    catalysis_experiment(&inputs, &y, Some(&spec), tol)
}

/// One line of an aggregate report.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub bound: f64,
    pub input_sum: f64,
    pub slack: f64,
    /// Constructive margin, absent for checks without a state.
    pub margin: Option<f64>,
    pub violation: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    /// `+∞` for an empty report.
    pub fn worst_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    /// `+∞` when no row carries a margin.
    pub fn worst_margin(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    /// Concatenates `other` and restores seed order, so merging partial
    /// reports in any order gives the same result.
    pub fn merge(mut self, other: Self) -> Self {
        self.rows.extend(other.rows);
        self.rows.sort_by(|a, b| (a.seed, &a.outcome).cmp(&(b.seed, &b.outcome)));
        self
    }
}

/// Rows for every outcome of a scenario. `K` is the scenario's own value;
/// `slack` is the smallest over every `K ≤ M`.
pub fn scenario_rows(sc: &Scenario, tol: &HarnessTolerances) -> Result<Vec<SweepRow>> {
    Ok(run_all_outcomes(sc, tol)?
        .into_iter()
        .map(|(outcome, r)| SweepRow {
            seed: sc.seed,
            n: sc.num_modes(),
            m: r.kept_modes.len(),
            k: sc.k,
            outcome,
            probability: r.probability,
            bound: r.certified_bound,
            input_sum: r.input_sum,
            slack: r.worst_slack,
            margin: Some(r.margin),
            violation: !r.holds(),
        })
        .collect())
}

pub fn theorem_row(seed: u64, n: usize, cutoff: usize, tol: &HarnessTolerances) -> Result<Vec<SweepRow>> {
    scenario_rows(&random_scenario(n, cutoff, seed)?, tol)
}

/// Decomposition-only draw: Haar `U`, uniform `p`, random `M ≤ N` and `K ≤ M`
/// with `N` up to `max_n`. Slack is the smallest over every `K ≤ M`.
pub fn decomposition_row(seed: u64, max_n: usize, tol: &HarnessTolerances) -> Result<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n.max(1));
    let m = rng.random_range(1..=n);
    let k = rng.random_range(1..=m);
    let u = ModeUnitary::haar(n, &mut rng);
    let p = LossVector::new(random::uniform_loss(n, 0.0, 1.0, &mut rng))?;
    let trace = decomposition::output_transmissivities(&u, &p, m, k)?;
    let slack = (1..=m)
        .map(|k| p.top_k_sum(k) - linalg::top_k_sum(&trace.p_out, k))
        .fold(f64::INFINITY, f64::min);
    Ok(SweepRow {
        seed,
        n,
        m,
        k,
        outcome: Vec::new(),
        probability: 1.0,
        bound: trace.certified_bound(),
        input_sum: trace.input_sum(),
        slack,
        margin: None,
        violation: slack < -tol.violation_slack,
    })
}

pub fn catalysis_row(seed: u64, n: usize, cutoff: usize, tol: &HarnessTolerances) -> Result<SweepRow> {
    let r = random_catalysis(n, cutoff, seed, tol)?;
    let m = r.output_efficiencies.len();
    Ok(SweepRow {
        seed,
        n,
        m,
        k: m,
        outcome: Vec::new(),
        probability: r.probability,
        bound: r.output_efficiencies.iter().sum(),
        input_sum: linalg::top_k_sum(&r.input_efficiencies, m),
        slack: r.slack,
        margin: None,
        violation: !r.holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Random `(U, p, M, K)` draws with `N ≤ 50`.
    Decomposition { draws: usize },
    /// Random full scenarios with `N = 3`, cutoff 3, every likely outcome.
    Theorem { scenarios: usize },
    /// Random product-state catalysis experiments with `N = 3`, cutoff 3.
    Catalysis { scenarios: usize },
}

impl Suite {
    pub fn by_name(name: &str) -> Option<Self> {
        let (kind, count) = name.rsplit_once('-')?;
        let count = count.parse().ok()?;
        match kind {
            "decomposition" => Some(Suite::Decomposition { draws: count }),
            "theorem" => Some(Suite::Theorem { scenarios: count }),
            "catalysis" => Some(Suite::Catalysis { scenarios: count }),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Suite::Decomposition { draws } => draws,
            Suite::Theorem { scenarios } | Suite::Catalysis { scenarios } => scenarios,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rows for the job with index `job`; seeds are `base_seed + job`.
    pub fn job(&self, base_seed: u64, job: usize, tol: &HarnessTolerances) -> Result<SweepReport> {
        let seed = base_seed.wrapping_add(job as u64);
        let rows = match self {
            Suite::Decomposition { .. } => alloc::vec![decomposition_row(seed, 50, tol)?],
            Suite::Theorem { .. } => theorem_row(seed, 3, 3, tol)?,
            Suite::Catalysis { .. } => alloc::vec![catalysis_row(seed, 3, 3, tol)?],
        };
        Ok(SweepReport { rows })
    }

    /// Runs every job sequentially.
    pub fn run(&self, base_seed: u64, tol: &HarnessTolerances) -> Result<SweepReport> {
        (0..self.len()).try_fold(SweepReport::default(), |acc, job| {
            Ok(acc.merge(self.job(base_seed, job, tol)?))
        })
    }
}

/// `E` of every member of the single-photon mixture family
/// `p|1⟩⟨1| + (1−p)|0⟩⟨0|` at cutoff 1.
pub fn mixture_table(ps: &[f64], tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    let trunc = TruncationSpec::new(1, 1)?;
    ps.iter()
        .map(|&p| {
            let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
                num_complex::Complex64::new(1.0 - p, 0.0),
                num_complex::Complex64::new(p, 0.0),
            ]));
            let s = MultiModeState::from_matrix_with(trunc, m, Normalization::Normalized, tol.psd_tol)?;
            Ok((p, efficiency::single_mode_efficiency(&s, tol)?.value))
        })
        .collect()
}
