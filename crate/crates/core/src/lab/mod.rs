//! Run configuration, commands, reports and the reproduction fixture suite.
//!
//! A [`RunConfig`] names an operator and its numerical parameters; [`run`]
//! executes one [`Command`] on it and collects records into a [`Report`],
//! which [`Report::emit`] writes as JSON or CSV. Reports are reproducible
//! byte for byte: numbers are rounded to 12 significant digits, keys are
//! sorted, and wall-clock timings live in a separate file.

mod config;
mod paper;
mod report;

use std::sync::Arc;
use std::time::Instant;

pub use config::{
    BarrierSection, CertifySection, EpsLists, FicheraSection, LinearSource, MpSection, OperatorChoice, OutputConfig,
    RunConfig, Target, Tolerances, ValidateSection,
};
pub use paper::{fixture_ids, run_fixture, FixtureRecord, FixtureVerdict};
pub use report::{
    BarrierRecord, CertRecord, EigenRecord, FicheraRecord, Format, Metadata, MpRecord, Record, Report, Timing,
    ValidationRecord, WitnessPoint,
};

use crate::boundary::{barrier_sweep, equivalence_advisory, fichera_classify, FicheraStatus};
use crate::certify;
use crate::domains::Grid;
use crate::eigen::{self, BlowupOptions};
use crate::error::{Error, Result};
use crate::mp::{self, MpOptions};
use crate::operators::{check_degenerate_ellipticity, check_homogeneity};
use crate::scheme::DiscreteScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Eigen,
    Mu1,
    LambdaStar,
    Mp,
    Certify,
    Fichera,
    Barrier,
    Paper,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Validate,
        Command::Eigen,
        Command::Mu1,
        Command::LambdaStar,
        Command::Mp,
        Command::Certify,
        Command::Fichera,
        Command::Barrier,
        Command::Paper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Eigen => "eigen",
            Command::Mu1 => "mu1",
            Command::LambdaStar => "lambda-star",
            Command::Mp => "mp",
            Command::Certify => "certify",
            Command::Fichera => "fichera",
            Command::Barrier => "barrier",
            Command::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Process exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownOperator(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}

impl RunConfig {
    fn blowup_options(&self) -> BlowupOptions {
        BlowupOptions {
            lambda_cap: self.lambda_cap,
            tol: self.tolerances.eigen,
            execution: self.execution,
            ..BlowupOptions::default()
        }
    }

    fn scheme(&self, t: &Target) -> Result<DiscreteScheme> {
        let grid = Arc::new(Grid::new(&t.domain, t.h)?);
        Ok(DiscreteScheme::new(t.spec.clone(), grid)?
            .with_boundary_clause(self.boundary_clause)
            .with_execution(self.execution))
    }
}

fn validate(cfg: &RunConfig, t: &Target) -> Result<Record> {
    let n = cfg.validate.samples;
    let ellipticity = check_degenerate_ellipticity(&t.spec, n, cfg.rng_seed);
    let homogeneity = check_homogeneity(&t.spec, n, cfg.rng_seed);
    let mut notes = Vec::new();
    let monotonicity = match cfg.scheme(t) {
        Ok(s) => Some(s.check_monotonicity(cfg.validate.trials, cfg.rng_seed)),
        Err(e) => {
            notes.push(format!("no scheme: {e}"));
            None
        }
    };
    let tol = cfg.tolerances.homogeneity;
    let passed = ellipticity.passed() && homogeneity.passed(tol) && monotonicity.as_ref().is_some_and(|m| m.passed());
    Ok(Record::Validation(ValidationRecord {
        operator: t.name.clone(),
        ellipticity,
        homogeneity,
        homogeneity_tol: tol,
        monotonicity,
        notes,
        passed,
    }))
}

fn eigen_record(t: &Target, quantity: &str, estimate: eigen::EigenEstimate) -> Record {
    Record::Eigen(EigenRecord { operator: t.name.clone(), quantity: quantity.into(), estimate })
}

fn mp_record(cfg: &RunConfig, t: &Target) -> Result<Record> {
    let s = cfg.scheme(t)?;
    let cap = cfg.mp.cap;
    let tol = cfg.tolerances.mp * cap;
    let v = mp::mp_test_with(&s, &MpOptions { cap, tol, ..MpOptions::default() })?;
    let (witness_check, witness) = match &v.witness {
        Some(w) => {
            let grid = s.grid();
            let pts = (0..grid.len())
                .filter(|&i| w.values[i] > 0.0)
                .map(|i| WitnessPoint { x: grid.x(i)[..grid.dim()].to_vec(), value: w.values[i] })
                .collect();
            (Some(mp::witness_check(&s, w, s.default_tol()).ok), pts)
        }
        None => (None, Vec::new()),
    };
    Ok(Record::Mp(MpRecord {
        operator: t.name.clone(),
        domain: t.domain.label(),
        h: t.h,
        boundary_clause: cfg.boundary_clause,
        cap,
        tol,
        holds: v.holds,
        max_positive_part: v.max_positive_part,
        iterations: v.iterations,
        witness_check,
        witness,
    }))
}

fn certify_record(cfg: &RunConfig, t: &Target) -> Result<Record> {
    let cert = cfg
        .certify
        .certificate
        .as_ref()
        .ok_or_else(|| Error::Config("certify needs [certify.certificate]".into()))?;
    let n = cfg.certify.samples;
    let (lambda, best) = match cfg.certify.lambda {
        Some(l) => (l, None),
        None => {
            let b = certify::best_lambda(cert, &t.spec, &t.domain, n)?;
            (b, Some(b))
        }
    };
    let report = certify::verify(cert, &t.spec, &t.domain, lambda, n)?;
    Ok(Record::Certificate(CertRecord { report, best_lambda: best }))
}

fn barrier_record(cfg: &RunConfig, t: &Target) -> Result<Record> {
    let band = cfg.barrier.band.unwrap_or(t.domain.inradius() / 4.0);
    let n = cfg.barrier.samples;
    let mut notes = Vec::new();
    let points: Vec<Vec<f64>> = match &cfg.barrier.point {
        Some(p) => vec![p.clone()],
        None => {
            let f = fichera_classify(&t.spec, &t.domain, cfg.fichera.samples)?;
            let mut pts = Vec::new();
            for c in &f.components {
                match f.samples.iter().find(|s| s.component == c.id && s.status == FicheraStatus::Satisfied) {
                    Some(s) => pts.push(s.xi.clone()),
                    None => notes.push(format!("component {} ({}) has no satisfied point", c.id, c.name)),
                }
            }
            pts
        }
    };
    let reports = points
        .iter()
        .map(|xi| barrier_sweep(&t.spec, &t.domain, xi, band, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Record::Barrier(BarrierRecord { operator: t.name.clone(), domain: t.domain.label(), reports, notes }))
}

/// Executes `command` and collects its records.
pub fn run(cfg: &RunConfig, command: Command) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(command.as_str(), cfg);
    let start = Instant::now();
    if command == Command::Paper {
        let (records, timings) = paper::run_suite(cfg.execution);
        report.records = records;
        report.timings = timings;
        return Ok(report);
    }
    let t = cfg.target()?;
    let opts = cfg.blowup_options();
    let record = match command {
        Command::Validate => validate(cfg, &t)?,
        Command::Eigen => eigen_record(&t, "eigen", eigen::blowup_eigenvalue(&cfg.scheme(&t)?, &opts)?),
        Command::Mu1 => eigen_record(&t, "mu1", eigen::mu1_estimate(&t.spec, &t.domain, t.h, &cfg.eps.inflation, &opts)?),
        Command::LambdaStar => eigen_record(
            &t,
            "lambda-star",
            eigen::lambda_star_estimate(&t.spec, &t.domain, t.h, &cfg.eps.viscous, &opts)?,
        ),
        Command::Mp => mp_record(cfg, &t)?,
        Command::Certify => certify_record(cfg, &t)?,
        Command::Fichera => {
            let r = fichera_classify(&t.spec, &t.domain, cfg.fichera.samples)?;
            let advisory = equivalence_advisory(&r);
            Record::Fichera(FicheraRecord { report: r, advisory })
        }
        Command::Barrier => barrier_record(cfg, &t)?,
        Command::Paper => unreachable!("handled above"),
    };
    report.records.push(record);
    report.timings.push(Timing { task: command.as_str().into(), seconds: start.elapsed().as_secs_f64() });
    Ok(report)
}
