//! Command-line front end: configuration, subcommand dispatch, reports and
//! CSV export.

pub mod config;
pub mod report;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lfe_core::bounds::{verify_orbit, BoundsCertificate, CertificateSettings};
use lfe_core::degree::{brouwer_degree_with, DegreeSettings};
use lfe_core::fields::{validate_hypotheses_with_seed, FieldConfig};
use lfe_core::homotopy::HomotopySystem;
use lfe_core::integrator::{energy_drift, integrate};
use lfe_core::shooting::{
    continue_lambda, newton_shooting, ContinuationPath, ContinuationStatus, IdentityCheck, OrbitSolution,
    ShootingProblem, StepRecord,
};
use serde::Serialize;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Validate,
    Bounds,
    Degree,
    Integrate,
    FindOrbit,
    Continue,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Bounds => "bounds",
            Self::Degree => "degree",
            Self::Integrate => "integrate",
            Self::FindOrbit => "find-orbit",
            Self::Continue => "continue",
        }
    }
}

/// Why a run stopped early.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn hypothesis(message: impl Into<String>) -> Self {
        Self { code: EXIT_HYPOTHESIS, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self { code: EXIT_SOLVER, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<lfe_core::Error> for Failure {
    fn from(e: lfe_core::Error) -> Self {
        use lfe_core::Error::*;
        match e {
            ForcingTooWeak { .. } | InequalityFails(_) | DegenerateForcing => Self::hypothesis(e.to_string()),
            _ => Self::solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub lambda: f64,
    pub q0: [f64; 3],
    pub p0: [f64; 3],
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub steps: usize,
    pub identities: IdentityCheck,
    /// Moduli of the monodromy eigenvalues, decreasing.
    pub floquet_moduli: Vec<f64>,
}

impl OrbitSummary {
    pub fn new(orbit: &OrbitSolution) -> Self {
        let mut floquet_moduli: Vec<f64> = orbit.monodromy.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        floquet_moduli.sort_by(|a, b| b.total_cmp(a));
        Self {
            lambda: orbit.lambda,
            q0: orbit.x0.q.into(),
            p0: orbit.x0.p.into(),
            residual_norm: orbit.residual_norm,
            newton_iterations: orbit.iterations,
            steps: orbit.trajectory.steps(),
            identities: orbit.identities,
            floquet_moduli,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct PathEntry {
    lambda: f64,
    x0_norm: f64,
    residual: f64,
    newton_iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
struct PathSummary {
    status: ContinuationStatus,
    reached_lambda: f64,
    entries: Vec<PathEntry>,
    steps: Vec<StepRecord>,
}

impl PathSummary {
    fn new(path: &ContinuationPath) -> Self {
        Self {
            status: path.status.clone(),
            reached_lambda: path.reached_lambda(),
            entries: path
                .entries
                .iter()
                .map(|e| PathEntry {
                    lambda: e.lambda,
                    x0_norm: e.x0.to_vector().norm(),
                    residual: e.residual_norm,
                    newton_iterations: e.iterations,
                })
                .collect(),
            steps: path.steps.clone(),
        }
    }
}

/// Result of one subcommand: exit code plus the report already written to
/// the output directory.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: RunReport,
    pub out_dir: PathBuf,
}

struct Run<'a> {
    config: &'a RunConfig,
    field: FieldConfig,
    out: &'a Path,
    report: RunReport,
}

impl Run<'_> {
    fn validate(&mut self) -> Result<(), Failure> {
        let v = validate_hypotheses_with_seed(&self.field, self.config.solver.seed);
        self.report.push("validation", v.to_string(), &v);
        if v.all_passed() {
            Ok(())
        } else {
            let ids: Vec<&str> = v.failures().map(|c| c.id).collect();
            Err(Failure::hypothesis(format!("hypotheses fail: {}", ids.join(", "))))
        }
    }

    fn certificate(&mut self) -> Result<BoundsCertificate, Failure> {
        let settings = CertificateSettings {
            seed: self.config.solver.seed,
            samples: self.config.solver.samples,
            ..CertificateSettings::default()
        };
        let cert = BoundsCertificate::compute_with(&self.field, &settings)?;
        self.report.push("certificate", cert.to_string(), &cert);
        Ok(cert)
    }

    fn degree(&mut self, cert: &BoundsCertificate) -> Result<(), Failure> {
        let settings = DegreeSettings { seed: self.config.solver.seed, ..DegreeSettings::default() };
        let k = &self.field.constants;
        let d = brouwer_degree_with(k.c0, &self.field.mean_forcing(), &cert.omega(), &settings)?;
        self.report.push("degree", d.to_string(), &d);
        Ok(())
    }

    fn artifact(&mut self, name: &str) -> Result<BufWriter<File>, Failure> {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        self.report.artifacts.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn write_orbit(&mut self, name: &str, orbit: &OrbitSolution) -> Result<(), Failure> {
        let samples = self.config.output.samples;
        let out = self.artifact(name)?;
        orbit.trajectory.write_csv(out, samples)?;
        Ok(())
    }

    fn check_orbit(&mut self, orbit: &OrbitSolution, cert: &BoundsCertificate) -> Result<(), Failure> {
        self.report.push("orbit", orbit.to_string(), &OrbitSummary::new(orbit));
        let verification = verify_orbit(orbit, cert);
        self.report.push("verification", verification.to_string(), &verification);
        if verification.all_passed() {
            Ok(())
        } else {
            Err(Failure::solver("orbit verification failed"))
        }
    }

    fn problem<'s>(&self, system: &'s HomotopySystem, cert: &BoundsCertificate, lambda: f64) -> ShootingProblem<'s> {
        let mut problem = ShootingProblem::new(system, lambda).with_domain(cert.omega());
        problem.integrator = self.config.integrator(Some(cert.m));
        problem.newton = self.config.solver.newton();
        problem
    }

    fn dispatch(&mut self, sub: Subcommand) -> Result<(), Failure> {
        match sub {
            Subcommand::Validate => self.validate(),
            Subcommand::Bounds => {
                self.validate()?;
                self.certificate().map(|_| ())
            }
            Subcommand::Degree => {
                self.validate()?;
                let cert = self.certificate()?;
                self.degree(&cert)
            }
            Subcommand::Integrate => self.integrate(),
            Subcommand::FindOrbit => {
                self.validate()?;
                let cert = self.certificate()?;
                let system = HomotopySystem::new(self.field.clone());
                let problem = self.problem(&system, &cert, self.config.solver.lambda);
                let guess = match &self.config.solver.guess {
                    Some(g) => g.state(),
                    None => problem.equilibrium_guess()?,
                };
                let orbit = newton_shooting(&problem, &guess)?;
                self.write_orbit("orbit.csv", &orbit)?;
                self.check_orbit(&orbit, &cert)
            }
            Subcommand::Continue => {
                self.validate()?;
                let cert = self.certificate()?;
                self.degree(&cert)?;
                let system = HomotopySystem::new(self.field.clone());
                let problem = self.problem(&system, &cert, 0.0);
                let start = newton_shooting(&problem, &problem.equilibrium_guess()?)?;
                let path = continue_lambda(&problem, start, 1.0, &self.config.solver.continuation())?;
                let summary = PathSummary::new(&path);
                let text = format!(
                    "status: {:?}\nreached lambda = {}\n{} orbits, {} steps attempted\n",
                    path.status,
                    path.reached_lambda(),
                    path.entries.len(),
                    path.steps.len()
                );
                self.report.push("continuation", text, &summary);
                let out = self.artifact("continuation.csv")?;
                path.write_summary_csv(out)?;
                let last = path.final_orbit().expect("path is never empty");
                self.write_orbit("orbit.csv", last)?;
                self.check_orbit(last, &cert)?;
                match &path.status {
                    ContinuationStatus::Completed => Ok(()),
                    other => Err(Failure::solver(format!("continuation stopped: {other:?}"))),
                }
            }
        }
    }

    fn integrate(&mut self) -> Result<(), Failure> {
        let spec = self
            .config
            .integrate
            .clone()
            .ok_or_else(|| Failure::io("configuration error: `integrate` needs an [integrate] section"))?;
        let system = HomotopySystem::new(self.field.clone());
        let x0 = config::StateSpec { q: spec.q, p: spec.p }.state();
        let t_end = spec.t_end.unwrap_or(self.field.period());
        let cfg = self.config.integrator(None);
        let traj = integrate(&system, &x0, (0.0, t_end), spec.lambda, &cfg)?;
        #[derive(Serialize)]
        struct Summary {
            lambda: f64,
            t_end: f64,
            steps: usize,
            rejected_steps: usize,
            rhs_evaluations: usize,
            final_state: [f64; 6],
            energy_drift: Option<f64>,
        }
        let summary = Summary {
            lambda: spec.lambda,
            t_end,
            steps: traj.steps(),
            rejected_steps: traj.rejected_steps,
            rhs_evaluations: traj.rhs_evaluations,
            final_state: traj.final_vector().into(),
            energy_drift: energy_drift(&system, &traj).ok(),
        };
        let text = format!(
            "lambda = {}, t in [0, {}]\n{} steps ({} rejected), {} rhs evaluations\nfinal state {:?}\nenergy drift: {}\n",
            summary.lambda,
            t_end,
            summary.steps,
            summary.rejected_steps,
            summary.rhs_evaluations,
            summary.final_state,
            summary.energy_drift.map_or("n/a (time-dependent forcing)".into(), |d| format!("{d:.3e}"))
        );
        self.report.push("trajectory", text, &summary);
        let samples = self.config.output.samples;
        let out = self.artifact("trajectory.csv")?;
        traj.write_csv(out, samples)?;
        Ok(())
    }
}

/// Runs one subcommand and writes `report.txt` / `report.json` into `out`,
/// also when the run fails.
pub fn run_subcommand(sub: Subcommand, config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let started = Instant::now();
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mut run = Run {
        config,
        field: config.field_config(),
        out,
        report: RunReport::new(sub.name(), config.to_toml(), config.solver.seed),
    };
    let result = run.dispatch(sub);
    let mut report = run.report;
    match result {
        Ok(()) => {
            report.status = "ok".into();
            report.exit_code = EXIT_OK;
        }
        Err(f) => {
            log::warn!("{} failed: {}", sub.name(), f.message);
            report.status = match f.code {
                EXIT_HYPOTHESIS => "hypothesis failure",
                EXIT_SOLVER => "solver failure",
                _ => "i/o failure",
            }
            .into();
            report.exit_code = f.code;
            report.error = Some(f.message);
        }
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    report.write(out)?;
    Ok(Outcome { exit_code: report.exit_code, report, out_dir: out.to_path_buf() })
}

/// Parses the configuration and runs; configuration and I/O problems map to
/// [`EXIT_IO`], with a partial report when the output directory is usable.
pub fn run_path(sub: Subcommand, config_path: &Path, out: &Path) -> i32 {
    match parse_config(config_path) {
        Ok(config) => match run_subcommand(sub, &config, out) {
            Ok(outcome) => outcome.exit_code,
            Err(e) => {
                eprintln!("lfe: {e}");
                EXIT_IO
            }
        },
        Err(e) => {
            eprintln!("lfe: {e}");
            let mut report = RunReport::new(sub.name(), String::new(), 0);
            report.status = "i/o failure".into();
            report.exit_code = EXIT_IO;
            report.error = Some(e.to_string());
            if fs::create_dir_all(out).is_ok() {
                let _ = report.write(out);
            }
            EXIT_IO
        }
    }
}
