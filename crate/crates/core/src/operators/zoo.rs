use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{LinearCoeffs, OperatorSpec};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Where a known fact comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactSource {
    /// Stated in the literature the operator is taken from.
    Literature,
    /// Follows from a one-line computation.
    Elementary,
    /// Obtained by an independent computation (closed form or oracle).
    Computed,
}

/// One recorded claim about an operator on its default domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownFact {
    /// `mu1`, `lambda1`, `lambda-bar1`, `lambda-star` or `mp`.
    pub quantity: String,
    /// `=`, `>=`, `<=`, `>`, `holds`, `fails`.
    pub relation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub source: FactSource,
    /// False for claims this crate could not confirm; such claims are reported, never asserted.
    pub verified: bool,
    pub note: String,
}

/// Hand-checked flags for the structural hypotheses. Only the first two are
/// sampled by the validators; the rest quantify over coupled matrix pairs and
/// moduli of continuity and are recorded as data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub h5: bool,
    pub h6: bool,
}

impl Hypotheses {
    const ALL: Hypotheses = Hypotheses { h1: true, h2: true, h3: true, h4: true, h5: true, h6: true };

    fn without_h4(self) -> Self {
        Hypotheses { h4: false, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZooEntry {
    pub name: String,
    pub aliases: Vec<String>,
    pub spec: OperatorSpec,
    pub domain_default: Domain,
    pub default_h: f64,
    pub hypotheses: Hypotheses,
    pub known_facts: Vec<KnownFact>,
}

fn fact(quantity: &str, relation: &str, value: Option<f64>, source: FactSource, note: &str) -> KnownFact {
    KnownFact {
        quantity: quantity.into(),
        relation: relation.into(),
        value,
        source,
        verified: true,
        note: note.into(),
    }
}

fn lin1(a: &str, b: &str, c: &str) -> OperatorSpec {
    OperatorSpec::linear(
        "",
        LinearCoeffs::parse(1, &[a], &[b], c).expect("zoo coefficients parse"),
    )
}

fn lin2(a: [&str; 4], b: [&str; 2], c: &str) -> OperatorSpec {
    OperatorSpec::linear("", LinearCoeffs::parse(2, &a, &b, c).expect("zoo coefficients parse"))
}

struct Builder {
    entries: Vec<ZooEntry>,
}

impl Builder {
    fn add(
        &mut self,
        name: &str,
        aliases: &[&str],
        spec: OperatorSpec,
        domain: Domain,
        h: f64,
        hypotheses: Hypotheses,
        known_facts: Vec<KnownFact>,
    ) {
        let spec = spec.with_name(name).with_sample_box(domain.bounding_box());
        self.entries.push(ZooEntry {
            name: name.into(),
            aliases: aliases.iter().map(|s| s.to_string()).collect(),
            spec,
            domain_default: domain,
            default_h: h,
            hypotheses,
            known_facts,
        });
    }
}

fn build() -> Vec<ZooEntry> {
    use FactSource::*;
    let unit = Domain::interval(0.0, 1.0);
    let square = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
    let disk = Domain::disk(0.0, 0.0, 1.0);
    let h1d = 1.0 / 400.0;
    let mut z = Builder { entries: Vec::new() };

    z.add(
        "neg-laplacian-1d",
        &["-u''", "-laplacian"],
        lin1("1", "0", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("mu1", "=", Some(PI * PI), Elementary, "eigenfunction sin(pi x)"),
            fact("lambda-star", "=", Some(PI * PI), Elementary, "uniformly elliptic: all four notions coincide"),
            fact("mp", "holds", None, Elementary, "mu1 > 0"),
        ],
    );
    z.add(
        "neg-laplacian-2d",
        &["-laplacian-2d", "-u_xx-u_yy"],
        lin2(["1", "0", "0", "1"], ["0", "0"], "0"),
        square.clone(),
        1.0 / 80.0,
        Hypotheses::ALL,
        vec![fact("mu1", "=", Some(2.0 * PI * PI), Elementary, "eigenfunction sin(pi x) sin(pi y)")],
    );
    z.add(
        "helmholtz-shift",
        &["-u''+u"],
        lin1("1", "0", "-1"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("mu1", "=", Some(PI * PI + 1.0), Elementary, "shift of the Dirichlet Laplacian"),
            fact("lambda-star", ">=", Some(1.0), Elementary, "min F(x,1,0,0) = 1"),
            fact("mp", "holds", None, Literature, "min F(x,r,0,0) > 0 for r > 0 is sufficient"),
        ],
    );
    z.add(
        "half-drift-minus-identity",
        &["(x/2)u'-u", "x/2u'-u"],
        lin1("0", "-x/2", "1"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("lambda1", "=", Some(f64::INFINITY), Literature, "phi = x^n gives lambda = n/2 - 1 for every n"),
            fact("mp", "fails", None, Literature, "u = x(1-x) is a positive subsolution"),
            fact("mu1", "<=", Some(0.0), Literature, "forced by the failure of MP"),
        ],
    );
    z.add(
        "double-drift",
        &["-2xu'"],
        lin1("0", "2*x", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("mp", "fails", None, Literature, "the indicator of {0} is a subsolution"),
            fact("mu1", "<=", Some(0.0), Literature, "forced by the failure of MP"),
            fact("lambda-star", ">=", Some(1.0), Literature, "viscous eigenvalues stay above 1"),
        ],
    );
    z.add(
        "sqrt-drift",
        &["-sqrt(x)u'", "-√xu'"],
        lin1("0", "sqrt(abs(x))", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL.without_h4(),
        vec![fact("lambda-bar1", ">=", Some(0.25), Literature, "certificate phi = 2 - sqrt(x)")],
    );
    z.add(
        "degenerate-diffusion",
        &["-xu''"],
        lin1("x", "0", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL.without_h4(),
        vec![fact("lambda-bar1", ">=", Some(0.125), Literature, "certificate phi = 1 + sqrt(x)")],
    );
    z.add(
        "linear-drift",
        &["-xu'"],
        lin1("0", "x", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("lambda1", "=", Some(0.0), Literature, "instability example"),
            fact("lambda-bar1", "=", Some(0.0), Literature, "instability example"),
            fact("mu1", "=", Some(0.0), Literature, "instability example"),
        ],
    );
    z.add(
        "quadratic-drift",
        &["x^2u'", "x²u'"],
        lin1("0", "-x^2", "0"),
        Domain::interval(-1.0, 1.0),
        h1d,
        Hypotheses::ALL,
        vec![fact("mu1", "=", Some(0.0), Literature, "no principal eigenfunction exists")],
    );
    z.add(
        "zero",
        &["0"],
        lin1("0", "0", "0"),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![fact("lambda1", "=", Some(0.0), Elementary, "F = 0; phi = 1 is optimal")],
    );
    z.add(
        "grushin-2",
        &["grushin"],
        lin2(["1", "0", "0", "x^2"], ["0", "0"], "0"),
        Domain::rectangle(-1.0, 1.0, 0.0, 1.0),
        1.0 / 40.0,
        Hypotheses::ALL,
        vec![
            fact("mu1", ">", Some(0.0), Literature, "subelliptic certificate 1 - eps exp(sigma x)"),
            fact("mp", "holds", None, Literature, "mu1 > 0"),
        ],
    );
    z.add(
        "neg-p1-2d",
        &["-P_1"],
        OperatorSpec::top_eigenvalues(2, 1).expect("k <= N"),
        disk.clone(),
        1.0 / 20.0,
        Hypotheses::ALL,
        vec![
            fact("mu1", ">", Some(0.0), Literature, "certificate k - |x|^2"),
            fact("mp", "holds", None, Literature, "mu1 > 0"),
        ],
    );
    z.add(
        "neg-p2-2d",
        &["-P_2"],
        OperatorSpec::top_eigenvalues(2, 2).expect("k <= N"),
        disk.clone(),
        1.0 / 20.0,
        Hypotheses::ALL,
        vec![fact("mu1", ">", Some(0.0), Literature, "certificate k - |x|^2")],
    );
    z.add(
        "pucci-max-degenerate-2d",
        &["-M+"],
        OperatorSpec::degenerate_pucci_max(2),
        disk,
        1.0 / 20.0,
        Hypotheses::ALL,
        vec![KnownFact {
            verified: false,
            ..fact(
                "mu1",
                ">",
                Some(0.0),
                Literature,
                "claimed positive; every smooth phi has F[phi] <= 0, and the discrete estimate is not positive",
            )
        }],
    );
    z.add(
        "eikonal-absorbing",
        &["-|u'|+u"],
        OperatorSpec::eikonal("", 1, Expr::Const(1.0), Expr::Const(-1.0)),
        unit.clone(),
        h1d,
        Hypotheses::ALL,
        vec![
            fact("lambda-star", ">=", Some(1.0), Elementary, "min F(x,1,0,0) = 1"),
            fact("mp", "holds", None, Literature, "min F(x,r,0,0) > 0 for r > 0 is sufficient"),
        ],
    );
    z.add(
        "p-laplacian-3",
        &["p-laplacian"],
        OperatorSpec::p_laplacian(1, 3.0).expect("p >= 2"),
        unit.clone(),
        h1d,
        Hypotheses { h5: false, ..Hypotheses::ALL },
        vec![fact("lambda1", "=", Some(p_laplacian_interval_eigenvalue(3.0, 1.0)), Computed, "(p-1)(pi_p/L)^p")],
    );
    z.add(
        "infinity-laplacian",
        &["infinity-laplacian-1d"],
        OperatorSpec::infinity_laplacian(1),
        unit.clone(),
        h1d,
        Hypotheses { h5: false, ..Hypotheses::ALL },
        vec![fact("mu1", "=", Some(PI * PI), Elementary, "coincides with -u'' in one dimension")],
    );
    z.add(
        "anisotropic-edge",
        &["diag(1,y)"],
        lin2(["1", "0", "0", "y"], ["0", "0"], "0"),
        square,
        1.0 / 40.0,
        Hypotheses::ALL.without_h4(),
        vec![fact("mu1", ">", Some(0.0), Elementary, "uniformly elliptic in x")],
    );
    z.entries
}

/// First Dirichlet eigenvalue of `-(|u'|^{p-2}u')' = lambda |u|^{p-2} u` on an interval of length `len`.
pub(crate) fn p_laplacian_interval_eigenvalue(p: f64, len: f64) -> f64 {
    let pi_p = 2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin());
    (p - 1.0) * (pi_p / len).powf(p)
}

/// The registered operators.
pub fn zoo() -> &'static [ZooEntry] {
    static ZOO: OnceLock<Vec<ZooEntry>> = OnceLock::new();
    ZOO.get_or_init(build)
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(|c| match c {
            '\u{2212}' => vec!['-'],
            '\u{2032}' => vec!['\''],
            '\u{2033}' => vec!['\'', '\''],
            c => vec![c.to_ascii_lowercase()],
        })
        .collect()
}

/// Resolves a zoo name or alias. `+Δ` (alias `plus-laplacian`) resolves to
/// the negated 1D Laplacian, which is deliberately not degenerate elliptic and
/// not part of [`zoo`].
pub fn lookup(name: &str) -> Result<ZooEntry> {
    let key = normalize(name);
    for e in zoo() {
        if normalize(&e.name) == key || e.aliases.iter().any(|a| normalize(a) == key) {
            return Ok(e.clone());
        }
    }
    if ["+Δ", "+laplacian", "plus-laplacian", "u''"].contains(&key.as_str()) {
        let base = &zoo()[0];
        return Ok(ZooEntry {
            name: "plus-laplacian".into(),
            aliases: vec!["+Δ".into()],
            spec: base.spec.negate().with_name("plus-laplacian"),
            hypotheses: Hypotheses { h1: false, ..Hypotheses::ALL },
            known_facts: Vec::new(),
            ..base.clone()
        });
    }
    Err(Error::UnknownOperator(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_aliases_resolve() {
        for e in zoo() {
            assert_eq!(lookup(&e.name).unwrap().name, e.name);
            for a in &e.aliases {
                assert_eq!(lookup(a).unwrap().name, e.name, "alias {a}");
            }
        }
        assert_eq!(lookup("\u{2212}xu\u{2032}").unwrap().name, "linear-drift");
        assert_eq!(lookup("\u{2212}u\u{2033}").unwrap().name, "neg-laplacian-1d");
        assert_eq!(lookup("+Δ").unwrap().name, "plus-laplacian");
        assert!(matches!(lookup("nope"), Err(Error::UnknownOperator(_))));
    }

    #[test]
    fn names_unique() {
        let mut names: Vec<_> = zoo().iter().map(|e| e.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), zoo().len());
    }

    #[test]
    fn p_laplacian_eigenvalue_reduces_to_laplacian_at_p2() {
        assert!((p_laplacian_interval_eigenvalue(2.0, 1.0) - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn h5_entries_have_alpha_at_most_one() {
        for e in zoo() {
            if e.hypotheses.h5 {
                assert!(e.spec.alpha <= 1.0, "{}", e.name);
            }
        }
    }
}
