//! The three subcommands and their reports.

use loqe_core::decomposition::TraceResiduals;
use loqe_core::efficiency::{
    self, BoundKind, EfficiencyCertificate, Tolerances,
};
use loqe_core::harness::{self, HarnessTolerances, Scenario, Suite, SweepReport, SweepRow};
use loqe_core::linalg::CMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::file::{
    Complex, MeasureName, Request, ScenarioFile, ScenarioRequest, SuiteKind, ToleranceSpec,
};
use crate::output;
use crate::resolve::Resolver;

/// Command-line overrides; `None` keeps the file's value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub jobs: Option<usize>,
    pub tolerances: ToleranceSpec,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub cutoff: Option<usize>,
    pub jobs: Option<usize>,
    pub tol: Tolerances,
    pub harness: HarnessTolerances,
}

impl Settings {
    pub fn new(file: Option<&ScenarioFile>, o: &Overrides) -> Self {
        let from_file = file.map(|f| f.tolerances.clone()).unwrap_or_default();
        let t = &o.tolerances;
        let pick = |a: Option<f64>, b: Option<f64>, d: f64| a.or(b).unwrap_or(d);
        let pick_n = |a: Option<usize>, b: Option<usize>, d: usize| a.or(b).unwrap_or(d);
        let dt = Tolerances::default();
        let dh = HarnessTolerances::default();
        let psd_tol = pick(t.psd_tol, from_file.psd_tol, dt.psd_tol);
        Self {
            seed: o.seed.or(file.map(|f| f.seed)).unwrap_or(0),
            cutoff: o.cutoff,
            jobs: o.jobs,
            tol: Tolerances {
                bisect_tol: pick(t.bisect_tol, from_file.bisect_tol, dt.bisect_tol),
                psd_tol,
                recon_tol: pick(t.recon_tol, from_file.recon_tol, dt.recon_tol),
                d_starts: pick_n(t.d_starts, from_file.d_starts, dt.d_starts),
                u_starts: pick_n(t.u_starts, from_file.u_starts, dt.u_starts),
                u_max_evals: pick_n(t.u_max_evals, from_file.u_max_evals, dt.u_max_evals),
            },
            harness: HarnessTolerances {
                psd_tol,
                prob_floor: pick(t.prob_floor, from_file.prob_floor, dh.prob_floor),
                outcome_floor: pick(t.outcome_floor, from_file.outcome_floor, dh.outcome_floor),
                violation_slack: pick(t.violation_slack, from_file.violation_slack, dh.violation_slack),
                bisect_tol: pick(t.catalysis_bisect_tol, from_file.catalysis_bisect_tol, dh.bisect_tol),
            },
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))
    }

    fn report(&self) -> TolerancesOut {
        TolerancesOut {
            bisect_tol: self.tol.bisect_tol,
            psd_tol: self.tol.psd_tol,
            recon_tol: self.tol.recon_tol,
            d_starts: self.tol.d_starts,
            u_starts: self.tol.u_starts,
            u_max_evals: self.tol.u_max_evals,
            prob_floor: self.harness.prob_floor,
            outcome_floor: self.harness.outcome_floor,
            violation_slack: self.harness.violation_slack,
            catalysis_bisect_tol: self.harness.bisect_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TolerancesOut {
    pub bisect_tol: f64,
    pub psd_tol: f64,
    pub recon_tol: f64,
    pub d_starts: usize,
    pub u_starts: usize,
    pub u_max_evals: usize,
    pub prob_floor: f64,
    pub outcome_floor: f64,
    pub violation_slack: f64,
    pub catalysis_bisect_tol: f64,
}

fn matrix_out(m: &CMatrix) -> Vec<Vec<Complex>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateOut {
    pub w: Vec<Vec<Complex>>,
    pub p: Vec<f64>,
    pub rho0: Vec<Vec<Complex>>,
    pub margin: f64,
    pub value: f64,
    pub reconstruction_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyEntry {
    pub name: String,
    pub measure: MeasureName,
    pub k: usize,
    pub value: f64,
    pub bound: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_mode: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub p: f64,
    pub efficiency: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableOut {
    pub name: String,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyReport {
    pub command: &'static str,
    pub results: Vec<EfficiencyEntry>,
    pub tables: Vec<TableOut>,
    pub warnings: Vec<String>,
    pub seed: u64,
    pub tolerances: TolerancesOut,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowOut {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub bound: f64,
    pub input_sum: f64,
    pub slack: f64,
    pub margin: Option<f64>,
    pub violation: bool,
}

impl From<&SweepRow> for RowOut {
    fn from(r: &SweepRow) -> Self {
        RowOut {
            seed: r.seed,
            n: r.n,
            m: r.m,
            k: r.k,
            outcome: r.outcome.clone(),
            probability: r.probability,
            bound: r.bound,
            input_sum: r.input_sum,
            slack: r.slack,
            margin: r.margin,
            violation: r.violation,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupOut {
    pub name: String,
    pub kind: &'static str,
    pub violations: usize,
    pub worst_slack: f64,
    pub worst_margin: f64,
    pub rows: Vec<RowOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub source: String,
    pub violations: usize,
    pub worst_slack: f64,
    pub groups: Vec<GroupOut>,
    pub warnings: Vec<String>,
    pub seed: u64,
    pub tolerances: TolerancesOut,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualsOut {
    pub triangularity: f64,
    pub rq: f64,
    pub block_svd: f64,
    pub q_unitarity: f64,
    pub x_unitarity: f64,
    pub q_prime_unitarity: f64,
    pub zero_pattern: f64,
    pub r_prime_identity: f64,
    pub block_identity: f64,
}

impl From<TraceResiduals> for ResidualsOut {
    fn from(r: TraceResiduals) -> Self {
        ResidualsOut {
            triangularity: r.triangularity,
            rq: r.rq,
            block_svd: r.block_svd,
            q_unitarity: r.q_unitarity,
            x_unitarity: r.x_unitarity,
            q_prime_unitarity: r.q_prime_unitarity,
            zero_pattern: r.zero_pattern,
            r_prime_identity: r.r_prime_identity,
            block_identity: r.block_identity,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub command: &'static str,
    pub scenario: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub kept_modes: Vec<usize>,
    pub p: Vec<f64>,
    pub u: Vec<Vec<Complex>>,
    pub r: Vec<Vec<Complex>>,
    pub q: Vec<Vec<Complex>>,
    pub x: Vec<Vec<Complex>>,
    pub r_prime: Vec<Vec<Complex>>,
    pub q_prime: Vec<Vec<Complex>>,
    pub q_double_prime: Vec<Vec<Complex>>,
    pub u_prime: Vec<Vec<Complex>>,
    pub p_out: Vec<f64>,
    pub probability: f64,
    pub certified_bound: f64,
    pub input_sum: f64,
    pub slack: f64,
    pub margin: f64,
    pub residuals: ResidualsOut,
    pub warnings: Vec<String>,
    pub seed: u64,
    pub tolerances: TolerancesOut,
    pub wall_time_s: f64,
}

pub enum Report {
    Efficiency(EfficiencyReport),
    Verify(VerifyReport),
    Trace(TraceReport),
}

impl Report {
    pub fn set_wall_time(&mut self, seconds: f64) {
        match self {
            Report::Efficiency(r) => r.wall_time_s = seconds,
            Report::Verify(r) => r.wall_time_s = seconds,
            Report::Trace(r) => r.wall_time_s = seconds,
        }
    }

    /// 1 when a verification found violations, otherwise 0.
    pub fn exit_code(&self) -> u8 {
        match self {
            Report::Verify(r) if r.violations > 0 => 1,
            _ => 0,
        }
    }

    pub fn json(&self) -> String {
        match self {
            Report::Efficiency(r) => output::json(r),
            Report::Verify(r) => output::json(r),
            Report::Trace(r) => output::json(r),
        }
    }

    pub fn csv(&self) -> String {
        match self {
            Report::Efficiency(r) => {
                let mut rows: Vec<Vec<String>> = r
                    .results
                    .iter()
                    .map(|e| {
                        vec![
                            e.name.clone(),
                            measure_label(e.measure).into(),
                            e.k.to_string(),
                            output::float(e.value),
                            e.bound.into(),
                        ]
                    })
                    .collect();
                for t in &r.tables {
                    for row in &t.rows {
                        rows.push(vec![
                            format!("{}[p={}]", t.name, output::float(row.p)),
                            "single".into(),
                            "1".into(),
                            output::float(row.efficiency),
                            "exact-to-tolerance".into(),
                        ]);
                    }
                }
                output::csv(&["name", "measure", "k", "value", "bound"], &rows)
            }
            Report::Verify(r) => {
                let rows: Vec<Vec<String>> = r
                    .groups
                    .iter()
                    .flat_map(|g| g.rows.iter())
                    .map(|row| {
                        vec![
                            row.seed.to_string(),
                            row.n.to_string(),
                            row.m.to_string(),
                            row.k.to_string(),
                            row.outcome.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                            output::float(row.probability),
                            output::float(row.bound),
                            output::float(row.input_sum),
                            output::float(row.slack),
                            row.margin.map(output::float).unwrap_or_default(),
                        ]
                    })
                    .collect();
                output::csv(
                    &["seed", "N", "M", "K", "outcome", "probability", "bound", "input_sum", "slack", "margin"],
                    &rows,
                )
            }
            Report::Trace(r) => {
                let mut sorted_p = r.p.clone();
                sorted_p.sort_by(|a, b| b.total_cmp(a));
                let rows: Vec<Vec<String>> = (0..r.n)
                    .map(|i| {
                        vec![
                            (i + 1).to_string(),
                            output::float(sorted_p[i]),
                            r.p_out.get(i).map(|&x| output::float(x)).unwrap_or_default(),
                        ]
                    })
                    .collect();
                output::csv(&["index", "p_sorted", "p_out"], &rows)
            }
        }
    }
}

fn measure_label(m: MeasureName) -> &'static str {
    match m {
        MeasureName::Single => "single",
        MeasureName::D => "d",
        MeasureName::S => "s",
        MeasureName::U => "u",
    }
}

fn bound_label(b: BoundKind) -> &'static str {
    match b {
        BoundKind::ExactToTolerance => "exact-to-tolerance",
        BoundKind::UpperBound => "upper-bound",
    }
}

fn certificate_out(
    c: &EfficiencyCertificate,
    target: &loqe_core::MultiModeState,
) -> Result<CertificateOut, CliError> {
    Ok(CertificateOut {
        w: matrix_out(c.w.matrix()),
        p: c.p.as_slice().to_vec(),
        rho0: matrix_out(c.rho0.matrix()),
        margin: c.margin,
        value: c.value,
        reconstruction_residual: c.reconstruction_residual(target)?,
    })
}

fn evaluate(
    name: &str,
    state: &loqe_core::MultiModeState,
    measure: MeasureName,
    k: usize,
    s: &Settings,
) -> Result<EfficiencyEntry, CliError> {
    let full = |e: efficiency::Efficiency| -> Result<EfficiencyEntry, CliError> {
        Ok(EfficiencyEntry {
            name: name.into(),
            measure,
            k,
            value: e.value,
            bound: bound_label(e.bound),
            per_mode: None,
            certificate: Some(certificate_out(&e.certificate, state)?),
        })
    };
    match measure {
        MeasureName::Single => full(efficiency::single_mode_efficiency(state, &s.tol)?),
        MeasureName::D => full(efficiency::d_efficiency(state, k, &s.tol, s.seed)?),
        MeasureName::U => full(efficiency::u_efficiency_upper(state, k, &s.tol, s.seed)?),
        MeasureName::S => {
            let e = efficiency::s_efficiency(state, k, &s.tol)?;
            Ok(EfficiencyEntry {
                name: name.into(),
                measure,
                k,
                value: e.value,
                bound: bound_label(BoundKind::ExactToTolerance),
                per_mode: Some(e.per_mode),
                certificate: None,
            })
        }
    }
}

/// With `state` set, evaluates that named state; otherwise runs every
/// efficiency and mixture-table request of the file.
pub fn efficiency(
    file: &ScenarioFile,
    state: Option<(&str, MeasureName, usize)>,
    s: &Settings,
) -> Result<Report, CliError> {
    let resolver = Resolver::new(file, s.cutoff);
    let jobs: Vec<(String, crate::file::StateSpec, MeasureName, usize)> = match state {
        Some((name, measure, k)) => vec![(
            name.into(),
            crate::file::StateSpec::Ref(name.into()),
            measure,
            k,
        )],
        None => file
            .requests
            .iter()
            .filter_map(|r| match r {
                Request::Efficiency(e) => Some((e.name.clone(), e.state.clone(), e.measure, e.k)),
                _ => None,
            })
            .collect(),
    };
    let states = jobs
        .iter()
        .map(|(_, spec, _, _)| resolver.state(spec))
        .collect::<Result<Vec<_>, _>>()?;
    let results = s.pool()?.install(|| {
        jobs.par_iter()
            .zip(&states)
            .map(|((name, _, measure, k), st)| evaluate(name, st, *measure, *k, s))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let tables = if state.is_some() {
        Vec::new()
    } else {
        file.requests
            .iter()
            .filter_map(|r| match r {
                Request::MixtureTable(t) => Some(t),
                _ => None,
            })
            .map(|t| {
                Ok(TableOut {
                    name: t.name.clone(),
                    rows: harness::mixture_table(&t.values, &s.tol)?
                        .into_iter()
                        .map(|(p, efficiency)| TableRow { p, efficiency })
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?
    };
    if results.is_empty() && tables.is_empty() {
        return Err(CliError::Config("nothing to evaluate".into()));
    }
    Ok(Report::Efficiency(EfficiencyReport {
        command: "efficiency",
        results,
        tables,
        warnings: resolver.warnings(),
        seed: s.seed,
        tolerances: s.report(),
        wall_time_s: 0.0,
    }))
}

fn scenario(r: &ScenarioRequest, resolver: &Resolver, seed: u64) -> Result<Scenario, CliError> {
    Ok(Scenario {
        rho0: resolver.state(&r.rho0)?,
        p: resolver.loss(&r.loss)?,
        w: resolver.interferometer(&r.w)?,
        y: resolver.interferometer(&r.y)?,
        measurement: r.measurement.as_ref().map(|m| resolver.measurement(m)).transpose()?,
        k: r.k,
        seed,
    })
}

fn scenario_group(
    r: &ScenarioRequest,
    resolver: &Resolver,
    s: &Settings,
) -> Result<GroupOut, CliError> {
    let sc = scenario(r, resolver, s.seed)?;
    let rows = if r.all_outcomes {
        harness::scenario_rows(&sc, &s.harness)?
    } else {
        let rep = harness::run_scenario(&sc, &s.harness)?;
        let outcome = match sc.measurement.as_ref().map(|m| m.effect_kind()) {
            Some(loqe_core::optics::Effect::Fock(o)) => o.clone(),
            _ => Vec::new(),
        };
        vec![SweepRow {
            seed: s.seed,
            n: sc.num_modes(),
            m: rep.kept_modes.len(),
            k: sc.k,
            outcome,
            probability: rep.probability,
            bound: rep.certified_bound,
            input_sum: rep.input_sum,
            slack: rep.worst_slack,
            margin: Some(rep.margin),
            violation: !rep.holds(),
        }]
    };
    Ok(group(&r.name, "scenario", SweepReport { rows }))
}

fn group(name: &str, kind: &'static str, report: SweepReport) -> GroupOut {
    GroupOut {
        name: name.into(),
        kind,
        violations: report.violations(),
        worst_slack: report.worst_slack(),
        worst_margin: report.worst_margin(),
        rows: report.rows.iter().map(RowOut::from).collect(),
    }
}

fn suite_kind_label(s: &Suite) -> &'static str {
    match s {
        Suite::Decomposition { .. } => "decomposition",
        Suite::Theorem { .. } => "theorem",
        Suite::Catalysis { .. } => "catalysis",
    }
}

fn run_suite(name: &str, suite: Suite, seed: u64, s: &Settings) -> Result<GroupOut, CliError> {
    let parts = s.pool()?.install(|| {
        (0..suite.len())
            .into_par_iter()
            .map(|job| suite.job(seed, job, &s.harness))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let report = parts.into_iter().fold(SweepReport::default(), SweepReport::merge);
    Ok(group(name, suite_kind_label(&suite), report))
}

pub enum Source<'a> {
    File(&'a ScenarioFile),
    Suite(&'a str),
}

pub fn verify(source: Source, s: &Settings) -> Result<Report, CliError> {
    let (label, groups, warnings) = match source {
        Source::Suite(name) => {
            let suite = Suite::by_name(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown suite {name:?}; expected decomposition-N, theorem-N or catalysis-N"
                ))
            })?;
            (format!("suite:{name}"), vec![run_suite(name, suite, s.seed, s)?], Vec::new())
        }
        Source::File(file) => {
            let resolver = Resolver::new(file, s.cutoff);
            let mut groups = Vec::new();
            for r in &file.requests {
                match r {
                    Request::Scenario(sc) => groups.push(scenario_group(sc, &resolver, s)?),
                    Request::Sweep(sw) => {
                        let suite = match sw.suite {
                            SuiteKind::Decomposition => Suite::Decomposition { draws: sw.count },
                            SuiteKind::Theorem => Suite::Theorem { scenarios: sw.count },
                            SuiteKind::Catalysis => Suite::Catalysis { scenarios: sw.count },
                        };
                        groups.push(run_suite(&sw.name, suite, sw.seed.unwrap_or(s.seed), s)?);
                    }
                    Request::Efficiency(_) | Request::MixtureTable(_) => {}
                }
            }
            if groups.is_empty() {
                return Err(CliError::Config("file has no scenario or sweep requests".into()));
            }
            ("file".into(), groups, resolver.warnings())
        }
    };
    Ok(Report::Verify(VerifyReport {
        command: "verify",
        source: label,
        violations: groups.iter().map(|g| g.violations).sum(),
        worst_slack: groups.iter().map(|g| g.worst_slack).fold(f64::INFINITY, f64::min),
        groups,
        warnings,
        seed: s.seed,
        tolerances: s.report(),
        wall_time_s: 0.0,
    }))
}

pub fn trace(file: &ScenarioFile, name: &str, s: &Settings) -> Result<Report, CliError> {
    let Request::Scenario(req) = file.request(name)? else {
        return Err(CliError::Config(format!("request {name:?} is not a scenario")));
    };
    let resolver = Resolver::new(file, s.cutoff);
    let sc = scenario(req, &resolver, s.seed)?;
    let rep = harness::run_scenario(&sc, &s.harness)?;
    let t = &rep.trace;
    Ok(Report::Trace(TraceReport {
        command: "trace",
        scenario: name.into(),
        n: sc.num_modes(),
        m: t.m,
        k: t.k,
        kept_modes: rep.kept_modes.clone(),
        p: t.p.as_slice().to_vec(),
        u: matrix_out(t.u.matrix()),
        r: matrix_out(&t.r),
        q: matrix_out(&t.q),
        x: matrix_out(&t.x),
        r_prime: matrix_out(&t.r_prime),
        q_prime: matrix_out(&t.q_prime),
        q_double_prime: matrix_out(&t.q_double_prime),
        u_prime: matrix_out(&t.u_prime),
        p_out: t.p_out.clone(),
        probability: rep.probability,
        certified_bound: rep.certified_bound,
        input_sum: rep.input_sum,
        slack: rep.slack,
        margin: rep.margin,
        residuals: t.residuals().into(),
        warnings: resolver.warnings(),
        seed: s.seed,
        tolerances: s.report(),
        wall_time_s: 0.0,
    }))
}
