use super::{catalog, composite_iqd_sq_plus_sd, DeviationFunctional, RiskFunctional};
use crate::error::{Error, Result};

/// Identifier forms accepted by [`parse_catalog_id`].
pub const CATALOG_IDS: &[&str] = &[
    "sd",
    "sd_minus",
    "sd_plus",
    "fr",
    "lr",
    "ur",
    "var@<alpha>",
    "es@<alpha>",
    "iqd@<alpha>",
    "ied@<alpha>",
    "iqd2+sd@<alpha>",
    "lvard@<u0:a0,u1:a1,...>",
    "chi_const",
    "neg_mean",
    "neg_ess_inf",
];

/// A resolved catalog entry.
#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Deviation(DeviationFunctional),
    Risk(RiskFunctional),
}

fn level(id: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::UnknownFunctional(id.to_string()))
}

/// Resolves a catalog identifier such as `iqd@0.4` or `lvard@0:0.1,1:0.5`.
pub fn parse_catalog_id(id: &str) -> Result<CatalogEntry> {
    use CatalogEntry::{Deviation as D, Risk as R};
    let id = id.trim();
    if let Some((head, arg)) = id.split_once('@') {
        return Ok(match head {
            "var" => R(catalog::var_risk(level(id, arg)?)?),
            "es" => R(catalog::es_risk(level(id, arg)?)?),
            "iqd" => D(catalog::iqd(level(id, arg)?)?),
            "ied" => D(catalog::ied(level(id, arg)?)?),
            "iqd2+sd" => D(composite_iqd_sq_plus_sd(level(id, arg)?)?),
            "lvard" => D(catalog::lvard(arg.parse()?)),
            _ => return Err(Error::UnknownFunctional(id.to_string())),
        });
    }
    Ok(match id {
        "sd" => D(catalog::sd()),
        "sd_minus" => D(catalog::sd_minus()),
        "sd_plus" => D(catalog::sd_plus()),
        "fr" => D(catalog::fr()),
        "lr" => D(catalog::lr()),
        "ur" => D(catalog::ur()),
        "chi_const" => D(catalog::chi_constants()),
        "neg_mean" => R(catalog::neg_mean()),
        "neg_ess_inf" => R(catalog::neg_ess_inf()),
        _ => return Err(Error::UnknownFunctional(id.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Functional;

    #[test]
    fn resolves_every_documented_form() {
        for id in [
            "sd", "sd_minus", "sd_plus", "fr", "lr", "ur", "chi_const", "iqd@0.4", "ied@0.25",
            "iqd2+sd@0.4", "lvard@0:0.1,1:0.5",
        ] {
            match parse_catalog_id(id).unwrap() {
                CatalogEntry::Deviation(d) => assert_eq!(d.name(), id),
                CatalogEntry::Risk(_) => panic!("{id} should be a deviation"),
            }
        }
        for id in ["var@0.05", "es@0.1", "neg_mean", "neg_ess_inf"] {
            assert!(matches!(parse_catalog_id(id).unwrap(), CatalogEntry::Risk(_)));
        }
    }

    #[test]
    fn rejects_unknown_or_malformed() {
        assert!(matches!(parse_catalog_id("foo"), Err(Error::UnknownFunctional(_))));
        assert!(matches!(parse_catalog_id("iqd@x"), Err(Error::UnknownFunctional(_))));
        assert!(matches!(parse_catalog_id("iqd@0.7"), Err(Error::InvalidProbability(_))));
        assert!(matches!(parse_catalog_id("lvard@1:0.2"), Err(Error::InvalidCurve(_))));
    }
}
