//! Turns scenario-file specifications into library values.

use std::cell::RefCell;

use loqe_core::fock::DEFAULT_DIMENSION_GUARD;
use loqe_core::linalg::CMatrix;
use loqe_core::optics::{apply_interferometer, multimode_loss};
use loqe_core::{LossVector, MeasurementSpec, ModeUnitary, MultiModeState, StateBuilder, TruncationSpec};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::file::{
    InterferometerSpec, LossSpec, Matrix, MeasurementDef, MeasurementRef, ScenarioFile, StateSpec,
};

const MAX_DEPTH: usize = 64;

pub struct Resolver<'a> {
    file: &'a ScenarioFile,
    cutoff: usize,
    guard: usize,
    warnings: RefCell<Vec<String>>,
}

pub fn matrix(rows: &Matrix) -> Result<CMatrix, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("matrix must be square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].into()))
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ScenarioFile, cutoff_override: Option<usize>) -> Self {
        Self {
            file,
            cutoff: cutoff_override.unwrap_or(file.truncation.cutoff),
            guard: file.truncation.dimension_guard.unwrap_or(DEFAULT_DIMENSION_GUARD),
            warnings: RefCell::new(Vec::new()),
        }
    }

    /// Truncation-weight warnings collected so far.
    pub fn warnings(&self) -> Vec<String> {
        self.warnings.borrow().clone()
    }

    fn trunc(&self, modes: usize) -> Result<TruncationSpec, CliError> {
        Ok(TruncationSpec::with_guard(modes, self.cutoff, self.guard)?)
    }

    fn builder(&self, modes: usize) -> Result<StateBuilder, CliError> {
        Ok(StateBuilder::new(self.trunc(modes)?))
    }

    pub fn state(&self, spec: &StateSpec) -> Result<MultiModeState, CliError> {
        self.state_at(spec, 0)
    }

    fn state_at(&self, spec: &StateSpec, depth: usize) -> Result<MultiModeState, CliError> {
        if depth > MAX_DEPTH {
            return Err(CliError::Config("state references nest too deeply".into()));
        }
        Ok(match spec {
            StateSpec::Vacuum(n) => MultiModeState::vacuum(self.trunc(*n)?),
            StateSpec::Fock(photons) => self.builder(photons.len())?.fock(photons)?,
            StateSpec::Pure(amps) => {
                let modes = amps
                    .first()
                    .ok_or_else(|| CliError::Config("pure state without amplitudes".into()))?
                    .photons
                    .len();
                let amps: Vec<(Vec<usize>, Complex64)> =
                    amps.iter().map(|a| (a.photons.clone(), a.amplitude.into())).collect();
                self.builder(modes)?.pure(&amps)?
            }
            StateSpec::Coherent(alphas) => {
                let alphas: Vec<Complex64> = alphas.iter().map(|&a| a.into()).collect();
                let built = self.builder(alphas.len())?.coherent(&alphas)?;
                self.note_truncation("coherent", built.truncation.weight, built.truncation.flagged);
                built.state
            }
            StateSpec::Thermal(means) => {
                let built = self.builder(means.len())?.thermal(means)?;
                self.note_truncation("thermal", built.truncation.weight, built.truncation.flagged);
                built.state
            }
            StateSpec::Mixture(components) => {
                let parts = components
                    .iter()
                    .map(|c| Ok((c.weight, self.state_at(&c.state, depth + 1)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                let modes = parts
                    .first()
                    .ok_or_else(|| CliError::Config("empty mixture".into()))?
                    .1
                    .num_modes();
                self.builder(modes)?.mixture(&parts)?
            }
            StateSpec::Tensor(factors) => {
                let mut it = factors.iter();
                let first = it
                    .next()
                    .ok_or_else(|| CliError::Config("empty tensor product".into()))?;
                let mut acc = self.state_at(first, depth + 1)?;
                for f in it {
                    acc = acc.tensor(&self.state_at(f, depth + 1)?)?;
                }
                acc
            }
            StateSpec::Processed(p) => {
                let mut s = self.state_at(&p.state, depth + 1)?;
                if let Some(loss) = &p.loss {
                    s = multimode_loss(&s, &self.loss(loss)?)?;
                }
                if let Some(u) = &p.interferometer {
                    s = apply_interferometer(&s, &self.interferometer(u)?)?;
                }
                s
            }
            StateSpec::Density { modes, matrix: m } => {
                MultiModeState::from_matrix(self.trunc(*modes)?, matrix(m)?)?
            }
            StateSpec::Ref(name) => {
                let inner = self
                    .file
                    .states
                    .get(name)
                    .ok_or_else(|| CliError::Config(format!("unknown state {name:?}")))?;
                self.state_at(inner, depth + 1)?
            }
        })
    }

    fn note_truncation(&self, kind: &str, weight: f64, flagged: bool) {
        if flagged {
            self.warnings.borrow_mut().push(format!(
                "{kind} state loses {weight:.3e} probability beyond cutoff {}",
                self.cutoff
            ));
        }
    }

    pub fn interferometer(&self, spec: &InterferometerSpec) -> Result<ModeUnitary, CliError> {
        self.interferometer_at(spec, 0)
    }

    fn interferometer_at(&self, spec: &InterferometerSpec, depth: usize) -> Result<ModeUnitary, CliError> {
        if depth > MAX_DEPTH {
            return Err(CliError::Config("interferometer references nest too deeply".into()));
        }
        Ok(match spec {
            InterferometerSpec::Identity(n) => ModeUnitary::identity(*n),
            InterferometerSpec::Matrix(m) => ModeUnitary::new(matrix(m)?)?,
            InterferometerSpec::Beamsplitter(b) => {
                ModeUnitary::beamsplitter(b.modes, b.i, b.j, b.theta, b.phi)?
            }
            InterferometerSpec::Phase(p) => ModeUnitary::phase(p.modes, p.mode, p.phi)?,
            InterferometerSpec::Permutation(perm) => ModeUnitary::permutation(perm)?,
            InterferometerSpec::Sequence(steps) => {
                let mut it = steps.iter();
                let first = it
                    .next()
                    .ok_or_else(|| CliError::Config("empty interferometer sequence".into()))?;
                let mut acc = self.interferometer_at(first, depth + 1)?;
                for step in it {
                    acc = self.interferometer_at(step, depth + 1)?.compose(&acc)?;
                }
                acc
            }
            InterferometerSpec::HaarRandom(h) => {
                ModeUnitary::haar(h.modes, &mut ChaCha8Rng::seed_from_u64(h.seed))
            }
            InterferometerSpec::Ref(name) => {
                let inner = self
                    .file
                    .interferometers
                    .get(name)
                    .ok_or_else(|| CliError::Config(format!("unknown interferometer {name:?}")))?;
                self.interferometer_at(inner, depth + 1)?
            }
        })
    }

    pub fn loss(&self, spec: &LossSpec) -> Result<LossVector, CliError> {
        let values = match spec {
            LossSpec::Values(v) => v.clone(),
            LossSpec::Ref(name) => self
                .file
                .loss_vectors
                .get(name)
                .ok_or_else(|| CliError::Config(format!("unknown loss vector {name:?}")))?
                .clone(),
        };
        Ok(LossVector::new(values)?)
    }

    pub fn measurement(&self, spec: &MeasurementRef) -> Result<MeasurementSpec, CliError> {
        let def = match spec {
            MeasurementRef::Inline(d) => d,
            MeasurementRef::Ref(name) => self
                .file
                .measurements
                .get(name)
                .ok_or_else(|| CliError::Config(format!("unknown measurement {name:?}")))?,
        };
        measurement_def(def)
    }
}

fn measurement_def(def: &MeasurementDef) -> Result<MeasurementSpec, CliError> {
    match (&def.fock, &def.effect) {
        (Some(outcome), None) => Ok(MeasurementSpec::fock(def.modes.clone(), outcome.clone())?),
        (None, Some(e)) => Ok(MeasurementSpec::effect(def.modes.clone(), matrix(e)?)?),
        _ => Err(CliError::Config(
            "a measurement needs exactly one of `fock` and `effect`".into(),
        )),
    }
}
