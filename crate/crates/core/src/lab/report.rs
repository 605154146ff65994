use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{OutputConfig, RunConfig};
use super::paper::{FixtureRecord, FixtureVerdict};
use crate::boundary::{Advisory, BarrierReport, FicheraReport};
use crate::certify::CertReport;
use crate::domains::format_sig;
use crate::eigen::EigenEstimate;
use crate::error::{Error, Result};
use crate::operators::{EllipticityReport, HomogeneityReport};
use crate::scheme::{BoundaryClause, MonotonicityReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub operator: String,
    pub ellipticity: EllipticityReport,
    pub homogeneity: HomogeneityReport,
    pub homogeneity_tol: f64,
    /// Absent when no monotone scheme could be built.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<MonotonicityReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub operator: String,
    /// `eigen`, `mu1` or `lambda-star`.
    pub quantity: String,
    pub estimate: EigenEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpRecord {
    pub operator: String,
    pub domain: String,
    pub h: f64,
    pub boundary_clause: BoundaryClause,
    pub cap: f64,
    pub tol: f64,
    pub holds: bool,
    pub max_positive_part: f64,
    pub iterations: usize,
    /// Independent subsolution check of the witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_check: Option<bool>,
    /// Nodes where the witness is positive.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<WitnessPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertRecord {
    pub report: CertReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FicheraRecord {
    pub report: FicheraReport,
    pub advisory: Advisory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierRecord {
    pub operator: String,
    pub domain: String,
    pub reports: Vec<BarrierReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum Record {
    Validation(ValidationRecord),
    Eigen(EigenRecord),
    Mp(MpRecord),
    Certificate(CertRecord),
    Fichera(FicheraRecord),
    Barrier(BarrierRecord),
    Fixture(FixtureRecord),
}

impl Record {
    /// Whether the record carries a failed acceptance check.
    pub fn failed(&self) -> bool {
        match self {
            Record::Validation(v) => !v.passed,
            Record::Certificate(c) => !c.report.valid,
            Record::Barrier(b) => b.reports.is_empty() || b.reports.iter().any(|r| !r.verified),
            Record::Fixture(f) => f.verdict == FixtureVerdict::Fail,
            Record::Eigen(_) | Record::Mp(_) | Record::Fichera(_) => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// The configuration as run, output location excluded.
    pub config: RunConfig,
}

impl Metadata {
    pub fn new(command: &str, config: &RunConfig) -> Metadata {
        Metadata {
            tool: "mplab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.rng_seed,
            config: RunConfig { output: OutputConfig::default(), ..config.clone() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub task: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub records: Vec<Record>,
    /// Wall-clock times; emitted to a separate file so the report itself is reproducible.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<Timing>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (csv | json)"))),
        }
    }
}

/// Replaces every non-integer number by its 12-significant-digit rounding.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format_sig(x).parse().unwrap_or(x);
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn opt_sig(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

fn coord(x: &[f64], k: usize) -> String {
    x.get(k).copied().map(format_sig).unwrap_or_default()
}

struct Table {
    name: &'static str,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Report {
        Report { metadata: Metadata::new(command, config), records: Vec::new(), timings: Vec::new() }
    }

    pub fn failed(&self) -> bool {
        self.records.iter().any(Record::failed)
    }

    /// 0 when every acceptance check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    /// The report without timings, numbers rounded to 12 significant digits,
    /// keys in sorted order.
    pub fn to_deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(Report { timings: Vec::new(), ..self.clone() })?;
        round_numbers(&mut v);
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }

    fn tables(&self) -> Vec<Table> {
        let mut eigen = Table {
            name: "eigen",
            header: &["method", "domain", "h", "eps", "lambda_lo", "lambda_hi", "iterations"],
            rows: vec![],
        };
        let mut mp = Table {
            name: "mp",
            header: &["operator", "domain", "h", "boundary_clause", "cap", "tol", "holds", "max_positive_part", "iterations", "witness_check"],
            rows: vec![],
        };
        let mut witness = Table { name: "mp-witness", header: &["operator", "x", "y", "value"], rows: vec![] };
        let mut validation = Table {
            name: "validation",
            header: &["operator", "samples", "ellipticity_violations", "homogeneity_max_relative_error", "monotonicity_trials", "monotonicity_violations", "passed"],
            rows: vec![],
        };
        let mut certs = Table {
            name: "certificates",
            header: &["certificate", "operator", "domain", "lambda", "margin", "valid", "classification", "sample_count", "positivity", "inf_bound", "best_lambda"],
            rows: vec![],
        };
        let mut fichera = Table {
            name: "fichera",
            header: &["operator", "domain", "component", "x", "y", "dad", "drift", "status"],
            rows: vec![],
        };
        let mut components = Table {
            name: "fichera-components",
            header: &["operator", "domain", "component", "name", "verdict", "advisory"],
            rows: vec![],
        };
        let mut barrier = Table {
            name: "barrier",
            header: &["operator", "domain", "x", "y", "delta", "band_width", "min_residual", "scale", "verified", "samples"],
            rows: vec![],
        };
        let mut paper = Table {
            name: "paper",
            header: &["fixture", "group", "claim", "citation", "computed", "value", "verdict"],
            rows: vec![],
        };
        for rec in &self.records {
            match rec {
                Record::Eigen(e) => {
                    let est = &e.estimate;
                    let d = &est.diagnostics;
                    let row_method = match est.method {
                        crate::eigen::Method::Extrapolated => crate::eigen::Method::InflatedBlowup,
                        m => m,
                    };
                    for r in &d.table {
                        eigen.rows.push(vec![
                            row_method.as_str().into(),
                            est.domain.clone(),
                            format_sig(d.h),
                            format_sig(r.eps),
                            format_sig(r.lambda_lo),
                            format_sig(r.lambda_hi),
                            String::new(),
                        ]);
                    }
                    let eps = d.inflation_eps.or(d.viscous_eps);
                    let eps = if est.method == crate::eigen::Method::Extrapolated { Some(0.0) } else { eps };
                    eigen.rows.push(vec![
                        est.method.as_str().into(),
                        est.domain.clone(),
                        format_sig(d.h),
                        opt_sig(eps),
                        format_sig(est.lambda_lo),
                        format_sig(est.lambda_hi),
                        d.iterations.to_string(),
                    ]);
                }
                Record::Mp(m) => {
                    mp.rows.push(vec![
                        m.operator.clone(),
                        m.domain.clone(),
                        format_sig(m.h),
                        tag(&m.boundary_clause),
                        format_sig(m.cap),
                        format_sig(m.tol),
                        m.holds.to_string(),
                        format_sig(m.max_positive_part),
                        m.iterations.to_string(),
                        m.witness_check.map(|b| b.to_string()).unwrap_or_default(),
                    ]);
                    for w in &m.witness {
                        witness.rows.push(vec![m.operator.clone(), coord(&w.x, 0), coord(&w.x, 1), format_sig(w.value)]);
                    }
                }
                Record::Validation(v) => validation.rows.push(vec![
                    v.operator.clone(),
                    v.ellipticity.samples.to_string(),
                    v.ellipticity.violation_count.to_string(),
                    format_sig(v.homogeneity.max_relative_error),
                    v.monotonicity.as_ref().map(|m| m.trials.to_string()).unwrap_or_default(),
                    v.monotonicity.as_ref().map(|m| m.violations.to_string()).unwrap_or_default(),
                    v.passed.to_string(),
                ]),
                Record::Certificate(c) => {
                    let r = &c.report;
                    certs.rows.push(vec![
                        r.certificate.clone(),
                        r.operator.clone(),
                        r.domain.clone(),
                        format_sig(r.lambda),
                        format_sig(r.margin),
                        r.valid.to_string(),
                        tag(&r.classification),
                        r.sample_count.to_string(),
                        format_sig(r.positivity),
                        format_sig(r.inf_bound),
                        opt_sig(c.best_lambda),
                    ]);
                }
                Record::Fichera(f) => {
                    let r = &f.report;
                    for s in &r.samples {
                        fichera.rows.push(vec![
                            r.operator.clone(),
                            r.domain.clone(),
                            s.component.to_string(),
                            coord(&s.xi, 0),
                            coord(&s.xi, 1),
                            format_sig(s.dad),
                            format_sig(s.drift),
                            tag(&s.status),
                        ]);
                    }
                    for c in &r.components {
                        components.rows.push(vec![
                            r.operator.clone(),
                            r.domain.clone(),
                            c.id.to_string(),
                            c.name.clone(),
                            c.verdict.as_str().into(),
                            f.advisory.as_str().into(),
                        ]);
                    }
                }
                Record::Barrier(b) => {
                    for r in &b.reports {
                        barrier.rows.push(vec![
                            b.operator.clone(),
                            b.domain.clone(),
                            coord(&r.point, 0),
                            coord(&r.point, 1),
                            format_sig(r.delta),
                            format_sig(r.band_width),
                            format_sig(r.min_residual),
                            opt_sig(r.scale),
                            r.verified.to_string(),
                            r.samples.to_string(),
                        ]);
                    }
                }
                Record::Fixture(f) => paper.rows.push(vec![
                    f.id.clone(),
                    f.group.clone(),
                    f.claim.clone(),
                    f.citation.clone(),
                    f.computed.clone(),
                    opt_sig(f.value),
                    f.verdict.as_str().into(),
                ]),
            }
        }
        [eigen, mp, witness, validation, certs, fichera, components, barrier, paper]
            .into_iter()
            .filter(|t| !t.rows.is_empty())
            .collect()
    }

    /// Writes the report into `dir`. JSON is one file `<stem>.json`; CSV is one
    /// file per non-empty table, `<stem>-<table>.csv`. Timings always go to
    /// `<stem>-timings.json`. Returns the written paths.
    pub fn emit(&self, format: Format, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                std::fs::write(&path, self.to_deterministic_json()?)?;
                written.push(path);
            }
            Format::Csv => {
                for t in self.tables() {
                    let path = dir.join(format!("{stem}-{}.csv", t.name));
                    let mut w = csv::Writer::from_path(&path)?;
                    w.write_record(t.header)?;
                    for row in &t.rows {
                        w.write_record(row)?;
                    }
                    w.flush()?;
                    written.push(path);
                }
            }
        }
        let path = dir.join(format!("{stem}-timings.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&self.timings)? + "\n")?;
        written.push(path);
        Ok(written)
    }

    /// Plain-text summary for the terminal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let fixtures: Vec<&FixtureRecord> = self
            .records
            .iter()
            .filter_map(|r| if let Record::Fixture(f) = r { Some(f) } else { None })
            .collect();
        if !fixtures.is_empty() {
            let w = fixtures.iter().map(|f| f.id.len()).max().unwrap_or(0);
            for f in &fixtures {
                let _ = writeln!(out, "{:<w$}  {:<22}  {}  [{}]", f.id, f.verdict.as_str(), f.computed, f.claim);
                let _ = writeln!(out, "{:<w$}  {:<22}  source: {}", "", "", f.citation);
            }
            let count = |v: FixtureVerdict| fixtures.iter().filter(|f| f.verdict == v).count();
            let _ = writeln!(
                out,
                "{} fixtures: {} pass, {} fail, {} boundary case, {} recorded",
                fixtures.len(),
                count(FixtureVerdict::Pass),
                count(FixtureVerdict::Fail),
                count(FixtureVerdict::BoundaryCase),
                count(FixtureVerdict::Recorded)
            );
        }
        for rec in &self.records {
            match rec {
                Record::Fixture(_) => {}
                Record::Validation(v) => {
                    let _ = writeln!(
                        out,
                        "{}: ellipticity violations {} / {}, homogeneity error {:e}, monotonicity {} -> {}",
                        v.operator,
                        v.ellipticity.violation_count,
                        v.ellipticity.samples,
                        v.homogeneity.max_relative_error,
                        v.monotonicity.as_ref().map_or("n/a".into(), |m| format!("{} violations / {}", m.violations, m.trials)),
                        if v.passed { "pass" } else { "FAIL" }
                    );
                    for viol in &v.ellipticity.violations {
                        let _ = writeln!(out, "  violation at x = {:?}, r = {}, p = {:?}: increase {:e}", viol.x, viol.r, viol.p, viol.increase);
                    }
                    for n in &v.notes {
                        let _ = writeln!(out, "  note: {n}");
                    }
                }
                Record::Eigen(e) => {
                    let est = &e.estimate;
                    let _ = writeln!(
                        out,
                        "{} {} on {}: {} in [{}, {}] ({})",
                        e.quantity,
                        e.operator,
                        est.domain,
                        format_sig(est.value),
                        format_sig(est.lambda_lo),
                        format_sig(est.lambda_hi),
                        est.method.as_str()
                    );
                }
                Record::Mp(m) => {
                    let _ = writeln!(
                        out,
                        "mp {} on {}: {} (max positive part {}, {} sweeps)",
                        m.operator,
                        m.domain,
                        if m.holds { "holds" } else { "fails" },
                        format_sig(m.max_positive_part),
                        m.iterations
                    );
                }
                Record::Certificate(c) => {
                    let r = &c.report;
                    let _ = writeln!(
                        out,
                        "certificate {} for {} at lambda {}: margin {} -> {} ({})",
                        r.certificate,
                        r.operator,
                        format_sig(r.lambda),
                        format_sig(r.margin),
                        if r.valid { "valid" } else { "INVALID" },
                        tag(&r.classification)
                    );
                }
                Record::Fichera(f) => {
                    for c in &f.report.components {
                        let _ = writeln!(out, "fichera {} component {} ({}): {}", f.report.operator, c.id, c.name, c.verdict.as_str());
                    }
                    let _ = writeln!(out, "advisory: {}", f.advisory.as_str());
                }
                Record::Barrier(b) => {
                    for r in &b.reports {
                        let _ = writeln!(
                            out,
                            "barrier {} at {:?}: delta {}, min F[w] {} -> {}",
                            b.operator,
                            r.point,
                            format_sig(r.delta),
                            format_sig(r.min_residual),
                            if r.verified { "verified" } else { "NOT verified" }
                        );
                    }
                    for n in &b.notes {
                        let _ = writeln!(out, "  note: {n}");
                    }
                }
            }
        }
        out
    }
}
