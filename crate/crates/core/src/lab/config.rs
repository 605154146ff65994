use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certify::Certificate;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::operators::{lookup, KnownFact, OperatorSpec};
use crate::par::Execution;
use crate::scheme::BoundaryClause;

/// A zoo name (or alias), or a linear operator given by coefficient expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorChoice {
    Named(String),
    Linear(LinearSource),
}

/// `-Tr(A X) - b.p - c r` with `A` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSource {
    #[serde(default = "default_linear_name")]
    pub name: String,
    pub dim: usize,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: String,
}

fn default_linear_name() -> String {
    "custom-linear".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Target bracket width of the bisections.
    pub eigen: f64,
    /// MP tolerance relative to the cap.
    pub mp: f64,
    /// Relative error allowed by the homogeneity sampler.
    pub homogeneity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eigen: 1e-3, mp: 1e-3, homogeneity: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsLists {
    /// Inflation radii for `mu1`, strictly decreasing.
    pub inflation: Vec<f64>,
    /// Viscosities for `lambda-star`, strictly decreasing.
    pub viscous: Vec<f64>,
}

impl Default for EpsLists {
    fn default() -> Self {
        EpsLists { inflation: vec![0.2, 0.1, 0.05], viscous: vec![0.2, 0.1, 0.05] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File name stem; tables get `-<table>` appended.
    pub stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), stem: "report".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub samples: usize,
    /// Randomized monotonicity trials on the scheme.
    pub trials: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { samples: 10_000, trials: 1_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpSection {
    pub cap: f64,
}

impl Default for MpSection {
    fn default() -> Self {
        MpSection { cap: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifySection {
    pub certificate: Option<Certificate>,
    /// Verified as given; when absent the best `λ` is computed and verified.
    pub lambda: Option<f64>,
    pub samples: usize,
}

impl Default for CertifySection {
    fn default() -> Self {
        CertifySection { certificate: None, lambda: None, samples: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FicheraSection {
    pub samples: usize,
}

impl Default for FicheraSection {
    fn default() -> Self {
        FicheraSection { samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    /// Boundary point; every satisfied component is tried when absent.
    pub point: Option<Vec<f64>>,
    /// Band width; defaults to a quarter of the inradius.
    pub band: Option<f64>,
    pub samples: usize,
}

impl Default for BarrierSection {
    fn default() -> Self {
        BarrierSection { point: None, band: None, samples: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub operator: Option<OperatorChoice>,
    /// Overrides the zoo default domain; required for linear operators.
    pub domain: Option<Domain>,
    pub h: Option<f64>,
    pub lambda_cap: f64,
    pub eps: EpsLists,
    pub tolerances: Tolerances,
    pub boundary_clause: BoundaryClause,
    pub execution: Execution,
    pub rng_seed: u64,
    pub output: OutputConfig,
    pub validate: ValidateSection,
    pub mp: MpSection,
    pub certify: CertifySection,
    pub fichera: FicheraSection,
    pub barrier: BarrierSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            operator: None,
            domain: None,
            h: None,
            lambda_cap: 100.0,
            eps: EpsLists::default(),
            tolerances: Tolerances::default(),
            boundary_clause: BoundaryClause::default(),
            execution: Execution::default(),
            rng_seed: 0,
            output: OutputConfig::default(),
            validate: ValidateSection::default(),
            mp: MpSection::default(),
            certify: CertifySection::default(),
            fichera: FicheraSection::default(),
            barrier: BarrierSection::default(),
        }
    }
}

/// Operator, domain and grid spacing a command runs on.
#[derive(Clone, Debug)]
pub struct Target {
    pub name: String,
    pub spec: OperatorSpec,
    pub domain: Domain,
    pub h: f64,
    pub known_facts: Vec<KnownFact>,
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} must be positive, got {v}")))
    }
}

fn decreasing(what: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() || list.iter().any(|&e| !(e > 0.0)) || list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Config(format!("{what} must be positive and strictly decreasing, got {list:?}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h {
            positive("h", h)?;
        }
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        positive("lambda_cap", self.lambda_cap)?;
        positive("tolerances.eigen", self.tolerances.eigen)?;
        positive("tolerances.mp", self.tolerances.mp)?;
        positive("tolerances.homogeneity", self.tolerances.homogeneity)?;
        decreasing("eps.inflation", &self.eps.inflation)?;
        decreasing("eps.viscous", &self.eps.viscous)?;
        positive("mp.cap", self.mp.cap)?;
        if let Some(l) = self.certify.lambda {
            if !l.is_finite() {
                return Err(Error::Config(format!("certify.lambda must be finite, got {l}")));
            }
        }
        if let Some(b) = self.barrier.band {
            positive("barrier.band", b)?;
        }
        for (what, n) in [
            ("validate.samples", self.validate.samples),
            ("validate.trials", self.validate.trials),
            ("certify.samples", self.certify.samples),
            ("fichera.samples", self.fichera.samples),
            ("barrier.samples", self.barrier.samples),
        ] {
            if n == 0 {
                return Err(Error::Config(format!("{what} must be positive")));
            }
        }
        Ok(())
    }

    /// Resolves the operator and fills in the domain and spacing.
    pub fn target(&self) -> Result<Target> {
        let choice = self.operator.as_ref().ok_or_else(|| Error::Config("this command needs `operator`".into()))?;
        let (name, spec, domain, h, known_facts) = match choice {
            OperatorChoice::Named(name) => {
                let e = lookup(name)?;
                let domain = self.domain.clone().unwrap_or(e.domain_default.clone());
                let spec = e.spec.with_sample_box(domain.bounding_box());
                (e.name, spec, domain, self.h.unwrap_or(e.default_h), e.known_facts)
            }
            OperatorChoice::Linear(src) => {
                let domain = self
                    .domain
                    .clone()
                    .ok_or_else(|| Error::Config("a linear operator needs `domain`".into()))?;
                let a: Vec<&str> = src.a.iter().map(String::as_str).collect();
                let b: Vec<&str> = src.b.iter().map(String::as_str).collect();
                let spec = OperatorSpec::linear_from_strs(&src.name, src.dim, &a, &b, &src.c)
                    .map_err(|e| Error::Config(format!("operator: {e}")))?
                    .with_sample_box(domain.bounding_box());
                let h = self.h.unwrap_or(if domain.dim() == 1 { 1.0 / 400.0 } else { 1.0 / 40.0 });
                (src.name.clone(), spec, domain, h, Vec::new())
            }
        };
        if domain.dim() != spec.dim {
            return Err(Error::Config(format!(
                "operator `{name}` is {}-dimensional but the domain is {}-dimensional",
                spec.dim,
                domain.dim()
            )));
        }
        Ok(Target { name, spec, domain, h, known_facts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_sections_parse() {
        let cfg = RunConfig::from_toml_str(
            r#"
operator = "-u''"
h = 0.01
rng_seed = 7

[eps]
inflation = [0.4, 0.2]

[mp]
cap = 2.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.h, Some(0.01));
        assert_eq!(cfg.eps.inflation, vec![0.4, 0.2]);
        assert_eq!(cfg.eps.viscous, EpsLists::default().viscous);
        assert_eq!(cfg.mp.cap, 2.0);
        let t = cfg.target().unwrap();
        assert_eq!(t.name, "neg-laplacian-1d");
        assert_eq!(t.domain, Domain::interval(0.0, 1.0));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(RunConfig::from_toml_str("operatr = \"-u''\""), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("[mp]\ncap = 1\nfoo = 2"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("h = -0.1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("[eps]\ninflation = [0.1, 0.2]"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("lambda_cap = 0"), Err(Error::Config(_))));
    }

    #[test]
    fn linear_operators_and_json() {
        let cfg = RunConfig::from_json_str(
            r#"{"operator": {"dim": 1, "a": ["x"], "b": ["0"], "c": "0"},
                "domain": {"shape": "interval", "a": 0.0, "b": 1.0}}"#,
        )
        .unwrap();
        let t = cfg.target().unwrap();
        assert_eq!(t.name, "custom-linear");
        assert!(t.spec.is_affine());
        let no_domain = RunConfig::from_json_str(r#"{"operator": {"dim": 1, "a": ["x"], "b": ["0"], "c": "0"}}"#).unwrap();
        assert!(matches!(no_domain.target(), Err(Error::Config(_))));
        let bad = RunConfig::from_json_str(r#"{"operator": {"dim": 1, "a": ["x+"], "b": ["0"], "c": "0"}, "domain": {"shape": "interval", "a": 0.0, "b": 1.0}}"#).unwrap();
        assert!(matches!(bad.target(), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let cfg = RunConfig {
            operator: Some(OperatorChoice::Named("-u''".into())),
            domain: Some(Domain::disk(0.0, 0.0, 1.0)),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.target(), Err(Error::Config(_))));
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            operator: Some(OperatorChoice::Named("grushin".into())),
            h: Some(0.05),
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let back = RunConfig::from_toml_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
