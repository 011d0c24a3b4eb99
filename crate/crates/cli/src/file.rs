//! Scenario file schema. Every struct rejects unknown fields so typos fail
//! loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const VERSION: u32 = 1;

/// Complex number written as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex(pub [f64; 2]);

impl From<Complex> for num_complex::Complex64 {
    fn from(c: Complex) -> Self {
        num_complex::Complex64::new(c.0[0], c.0[1])
    }
}

impl From<num_complex::Complex64> for Complex {
    fn from(z: num_complex::Complex64) -> Self {
        Complex([z.re, z.im])
    }
}

/// Row-major complex matrix.
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension_guard: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub photons: Vec<usize>,
    pub amplitude: Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Processed {
    pub state: Box<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometer: Option<InterferometerSpec>,
}

/// State constructor tree. The number of modes follows from the parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum(usize),
    Fock(Vec<usize>),
    Pure(Vec<Amplitude>),
    Coherent(Vec<Complex>),
    Thermal(Vec<f64>),
    Mixture(Vec<Component>),
    Tensor(Vec<StateSpec>),
    /// Loss then interferometer applied to an inner state.
    Processed(Processed),
    Density { modes: usize, matrix: Matrix },
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beamsplitter {
    pub modes: usize,
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub modes: usize,
    pub mode: usize,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarRandom {
    pub modes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InterferometerSpec {
    Identity(usize),
    Matrix(Matrix),
    Beamsplitter(Beamsplitter),
    Phase(Phase),
    /// Mode `j` goes to `permutation[j]`.
    Permutation(Vec<usize>),
    /// Applied in order, first element first.
    Sequence(Vec<InterferometerSpec>),
    HaarRandom(HaarRandom),
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LossSpec {
    Values(Vec<f64>),
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementDef {
    pub modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementRef {
    Inline(MeasurementDef),
    Ref(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeasureName {
    Single,
    D,
    S,
    U,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyRequest {
    pub name: String,
    pub state: StateSpec,
    pub measure: MeasureName,
    #[serde(default = "one")]
    pub k: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTableRequest {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    pub name: String,
    pub rho0: StateSpec,
    pub loss: LossSpec,
    pub w: InterferometerSpec,
    pub y: InterferometerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementRef>,
    pub k: usize,
    /// Run every Fock outcome of the measured modes instead of the given one.
    #[serde(default)]
    pub all_outcomes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Decomposition,
    Theorem,
    Catalysis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub name: String,
    pub suite: SuiteKind,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Efficiency(EfficiencyRequest),
    MixtureTable(MixtureTableRequest),
    Scenario(ScenarioRequest),
    Sweep(SweepRequest),
}

impl Request {
    pub fn name(&self) -> &str {
        match self {
            Request::Efficiency(r) => &r.name,
            Request::MixtureTable(r) => &r.name,
            Request::Scenario(r) => &r.name,
            Request::Sweep(r) => &r.name,
        }
    }
}

/// Every field is optional; missing ones take the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recon_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max_evals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalysis_bisect_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub truncation: Truncation,
    #[serde(default)]
    pub states: BTreeMap<String, StateSpec>,
    #[serde(default)]
    pub interferometers: BTreeMap<String, InterferometerSpec>,
    #[serde(default)]
    pub loss_vectors: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub measurements: BTreeMap<String, MeasurementDef>,
    #[serde(default)]
    pub requests: Vec<Request>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if file.version != VERSION {
            return Err(CliError::Config(format!(
                "unsupported version {}, expected {VERSION}",
                file.version
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &file.requests {
            if !seen.insert(r.name()) {
                return Err(CliError::Config(format!("duplicate request name {:?}", r.name())));
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    pub fn request(&self, name: &str) -> Result<&Request, CliError> {
        self.requests
            .iter()
            .find(|r| r.name() == name)
            .ok_or_else(|| CliError::Config(format!("no request named {name:?}")))
    }
}
