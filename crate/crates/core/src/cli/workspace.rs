//! Workspace documents: named spaces, variables, functionals and G-families.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::duality::{deviation_from_risk, risk_from_deviation, GFamily};
use crate::error::Error;
use crate::measures::{
    add, min_of, parse_catalog_id, scale_functional, square, CatalogEntry, DeviationFunctional,
    RiskFunctional,
};
use crate::space::{ProbSpace, RandomVariable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub space: String,
    pub values: Vec<f64>,
}

/// A functional definition; references are workspace names or catalog ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalSpec {
    Catalog(String),
    Add(Vec<String>),
    Scale { of: String, by: f64 },
    Square(String),
    Min(Vec<String>),
    DeviationFromRisk(String),
    RiskFromDeviation(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceFile {
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
    #[serde(default)]
    pub variables: BTreeMap<String, VariableSpec>,
    #[serde(default)]
    pub functionals: BTreeMap<String, FunctionalSpec>,
    #[serde(default)]
    pub gfamilies: BTreeMap<String, GFamily>,
}

impl WorkspaceFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed workspace: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read workspace {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::input(e.to_string()))
    }
}

/// A validated workspace with shared spaces.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    file: WorkspaceFile,
    spaces: BTreeMap<String, Arc<ProbSpace>>,
}

impl Workspace {
    pub fn new(file: WorkspaceFile) -> Result<Self, CliError> {
        let mut spaces = BTreeMap::new();
        for (name, s) in &file.spaces {
            let space = ProbSpace::new(s.probs.clone())
                .map_err(|e| CliError::input(format!("space `{name}`: {e}")))?;
            spaces.insert(name.clone(), space);
        }
        for (name, v) in &file.variables {
            let space = spaces.get(&v.space).ok_or_else(|| {
                CliError::input(format!("variable `{name}` references undeclared space `{}`", v.space))
            })?;
            RandomVariable::new(space.clone(), v.values.clone())
                .map_err(|e| CliError::input(format!("variable `{name}`: {e}")))?;
        }
        let ws = Self { file, spaces };
        for name in ws.file.functionals.keys() {
            ws.functional(name).map_err(|e| CliError::input(format!("functional `{name}`: {}", e.message)))?;
        }
        Ok(ws)
    }

    pub fn file(&self) -> &WorkspaceFile {
        &self.file
    }

    pub fn variable(&self, name: &str) -> Result<RandomVariable, CliError> {
        let v = self
            .file
            .variables
            .get(name)
            .ok_or_else(|| CliError::usage(format!("unknown variable `{name}`")))?;
        RandomVariable::new(self.spaces[&v.space].clone(), v.values.clone()).map_err(CliError::from)
    }

    pub fn gfamily(&self, name: &str) -> Result<GFamily, CliError> {
        self.file
            .gfamilies
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::usage(format!("unknown gfamily `{name}`")))
    }

    /// Resolves a workspace name or catalog id.
    pub fn functional(&self, name: &str) -> Result<CatalogEntry, CliError> {
        self.resolve(name, &mut BTreeSet::new())
    }

    pub fn deviation(&self, name: &str) -> Result<DeviationFunctional, CliError> {
        match self.functional(name)? {
            CatalogEntry::Deviation(d) => Ok(d),
            CatalogEntry::Risk(_) => Err(CliError::usage(format!("`{name}` is a risk functional"))),
        }
    }

    pub fn risk(&self, name: &str) -> Result<RiskFunctional, CliError> {
        match self.functional(name)? {
            CatalogEntry::Risk(r) => Ok(r),
            CatalogEntry::Deviation(_) => Err(CliError::usage(format!("`{name}` is a deviation functional"))),
        }
    }

    fn dev(&self, n: &str, visiting: &mut BTreeSet<String>) -> Result<DeviationFunctional, CliError> {
        match self.resolve(n, visiting)? {
            CatalogEntry::Deviation(d) => Ok(d),
            CatalogEntry::Risk(_) => Err(CliError::usage(format!("`{n}` must be a deviation functional"))),
        }
    }

    fn resolve(&self, name: &str, visiting: &mut BTreeSet<String>) -> Result<CatalogEntry, CliError> {
        let Some(spec) = self.file.functionals.get(name) else {
            return parse_catalog_id(name).map_err(CliError::from);
        };
        if !visiting.insert(name.to_string()) {
            return Err(CliError::usage(format!("functional `{name}` is defined in terms of itself")));
        }
        let entry = match spec {
            FunctionalSpec::Catalog(id) => parse_catalog_id(id)?,
            FunctionalSpec::Add(parts) => {
                let ds = parts.iter().map(|p| self.dev(p, visiting)).collect::<Result<Vec<_>, _>>()?;
                let (first, rest) = ds
                    .split_first()
                    .ok_or_else(|| CliError::usage(format!("`{name}`: add needs members")))?;
                CatalogEntry::Deviation(rest.iter().fold(first.clone(), |acc, d| add(&acc, d)))
            }
            FunctionalSpec::Scale { of, by } => CatalogEntry::Deviation(scale_functional(&self.dev(of, visiting)?, *by)?),
            FunctionalSpec::Square(of) => CatalogEntry::Deviation(square(&self.dev(of, visiting)?)),
            FunctionalSpec::Min(parts) => {
                let ds = parts.iter().map(|p| self.dev(p, visiting)).collect::<Result<Vec<_>, _>>()?;
                CatalogEntry::Deviation(min_of(&ds)?)
            }
            FunctionalSpec::DeviationFromRisk(of) => match self.resolve(of, visiting)? {
                CatalogEntry::Risk(r) => CatalogEntry::Deviation(deviation_from_risk(&r)),
                CatalogEntry::Deviation(_) => {
                    return Err(CliError::usage(format!("`{of}` must be a risk functional")))
                }
            },
            FunctionalSpec::RiskFromDeviation(of) => CatalogEntry::Risk(risk_from_deviation(&self.dev(of, visiting)?)),
        };
        visiting.remove(name);
        Ok(match entry {
            CatalogEntry::Deviation(d) => CatalogEntry::Deviation(d.renamed(name)),
            CatalogEntry::Risk(r) => CatalogEntry::Risk(r.renamed(name)),
        })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        use Error::*;
        let code = match &e {
            UnknownFunctional(_) | InvalidParameter(_) | InvalidProbability(_) | InvalidCurve(_)
            | EmptyFamily => 2,
            GridTooCoarse { .. }
            | ContractViolation { .. }
            | NotStarShapedSet { .. }
            | NotUpwardClosed { .. }
            | BracketTooSmall { .. }
            | InvariantViolation(_) => 4,
            _ => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Functional;

    const DOC: &str = r#"{
        "spaces": {"fair2": {"probs": [0.5, 0.5]}},
        "variables": {"x": {"space": "fair2", "values": [-1, 1]}},
        "functionals": {
            "twice_sd": {"scale": {"of": "sd", "by": 2}},
            "combo": {"add": ["iqd@0.4", "twice_sd"]},
            "best": {"min": ["fr", "twice_sd"]},
            "rho": {"risk_from_deviation": "lr"},
            "esdev": {"deviation_from_risk": "es@0.1"}
        }
    }"#;

    #[test]
    fn resolves_composites() {
        let ws = Workspace::new(WorkspaceFile::from_json(DOC).unwrap()).unwrap();
        let x = ws.variable("x").unwrap();
        assert_eq!(ws.deviation("twice_sd").unwrap().evaluate(&x).unwrap(), 2.0);
        assert_eq!(ws.deviation("combo").unwrap().evaluate(&x).unwrap(), 4.0);
        assert_eq!(ws.deviation("best").unwrap().evaluate(&x).unwrap(), 2.0);
        assert_eq!(ws.risk("rho").unwrap().evaluate(&x).unwrap(), 1.0);
        assert!(ws.deviation("esdev").is_ok());
        assert_eq!(ws.deviation("sd").unwrap().name(), "sd");
    }

    #[test]
    fn resolution_errors_map_to_exit_codes() {
        let ws = Workspace::new(WorkspaceFile::from_json(DOC).unwrap()).unwrap();
        assert_eq!(ws.variable("nope").unwrap_err().code, 2);
        assert_eq!(ws.functional("nope").unwrap_err().code, 2);
        assert_eq!(ws.deviation("rho").unwrap_err().code, 2);
        let bad = r#"{"variables": {"x": {"space": "missing", "values": [1]}}}"#;
        assert_eq!(Workspace::new(WorkspaceFile::from_json(bad).unwrap()).unwrap_err().code, 3);
        assert_eq!(WorkspaceFile::from_json("{oops").unwrap_err().code, 3);
        let cyclic = r#"{"functionals": {"a": {"square": "a"}}}"#;
        assert!(Workspace::new(WorkspaceFile::from_json(cyclic).unwrap()).is_err());
    }
}
