use serde::{Deserialize, Serialize};

use super::{Body, Hypotheses, Kind, KnownFact, ZooEntry};
use crate::domains::Domain;
use crate::error::{Error, Result};

/// Serializable view of a [`ZooEntry`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRecord {
    pub name: String,
    pub aliases: Vec<String>,
    pub dim: usize,
    pub alpha: f64,
    pub kind: Kind,
    /// Structural family, e.g. `linear` or `top-eigenvalues(k=1)`.
    pub family: String,
    /// Row-major diffusion matrix, drift and zero-order coefficient (linear only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    pub domain: Domain,
    pub default_h: f64,
    pub hypotheses: Hypotheses,
    pub known_facts: Vec<KnownFact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Catalog {
    operator: Vec<CatalogRecord>,
}

fn family(body: &Body) -> String {
    match body {
        Body::Linear(_) => "linear".into(),
        Body::Eikonal { b, c } => format!("eikonal(b={b}, c={c})"),
        Body::TopEigenvalues { k } => format!("top-eigenvalues(k={k})"),
        Body::DegeneratePucciMax => "degenerate-pucci-max".into(),
        Body::PLaplacian { p } => format!("p-laplacian(p={p})"),
        Body::InfinityLaplacian => "infinity-laplacian".into(),
        Body::Shifted { inner, lambda } => format!("shifted({}, {lambda})", family(&inner.body)),
        Body::Negated(inner) => format!("negated({})", family(&inner.body)),
    }
}

impl From<&ZooEntry> for CatalogRecord {
    fn from(e: &ZooEntry) -> Self {
        let coefficients = e.spec.linear_part().map(|l| Coefficients {
            a: l.a.iter().flatten().map(|x| x.to_string()).collect(),
            b: l.b.iter().map(|x| x.to_string()).collect(),
            c: l.c.to_string(),
        });
        CatalogRecord {
            name: e.name.clone(),
            aliases: e.aliases.clone(),
            dim: e.spec.dim,
            alpha: e.spec.alpha,
            kind: e.spec.kind(),
            family: family(&e.spec.body),
            coefficients,
            domain: e.domain_default.clone(),
            default_h: e.default_h,
            hypotheses: e.hypotheses,
            known_facts: e.known_facts.clone(),
        }
    }
}

pub fn catalog_to_toml(entries: &[ZooEntry]) -> Result<String> {
    let cat = Catalog { operator: entries.iter().map(CatalogRecord::from).collect() };
    toml::to_string(&cat).map_err(|e| Error::Config(e.to_string()))
}

pub fn catalog_from_toml(text: &str) -> Result<Vec<CatalogRecord>> {
    let cat: Catalog = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    Ok(cat.operator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{zoo, LinearCoeffs};

    #[test]
    fn catalog_round_trips() {
        let text = catalog_to_toml(zoo()).unwrap();
        let back = catalog_from_toml(&text).unwrap();
        let direct: Vec<CatalogRecord> = zoo().iter().map(CatalogRecord::from).collect();
        assert_eq!(back, direct);
        assert!(text.contains("[[operator]]"));
    }

    #[test]
    fn linear_coefficients_reparse_to_the_same_operator() {
        for rec in catalog_from_toml(&catalog_to_toml(zoo()).unwrap()).unwrap() {
            if let Some(c) = rec.coefficients {
                let a: Vec<&str> = c.a.iter().map(String::as_str).collect();
                let b: Vec<&str> = c.b.iter().map(String::as_str).collect();
                let parsed = LinearCoeffs::parse(rec.dim, &a, &b, &c.c).unwrap();
                let orig = crate::operators::lookup(&rec.name).unwrap();
                assert_eq!(Some(&parsed), orig.spec.linear_part(), "{}", rec.name);
            }
        }
    }

    #[test]
    fn pucci_claim_is_marked_unverified() {
        let rec = CatalogRecord::from(&crate::operators::lookup("pucci-max-degenerate-2d").unwrap());
        assert!(rec.known_facts.iter().any(|f| !f.verified));
    }
}
