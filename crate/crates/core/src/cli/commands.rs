use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::workspace::{SpaceSpec, VariableSpec, Workspace, WorkspaceFile};
use super::{Cli, CliError, Command, DualKind, Format};
use crate::axioms::{
    audit_deviation, check_risk_axioms, run_property, AuditConfig, AuditReport, Corpus, Fragment,
    Property, Witness,
};
use crate::duality::{
    build_counterexample, default_alpha_grid, dual_es_eval, dual_es_functional, dual_var_eval,
    dual_var_functional, CounterexampleBundle, GFamily,
};
use crate::envelopes::{
    attainment_residual, check_locus_convexity, envelope_family, min_family, seeded_anchors,
    seeded_variables_on, verify_domination, EnvelopeRecord, RayEnvelope, Variant,
};
use crate::measures::{chi_constants, lower_range, CatalogEntry, DeviationFunctional, Functional};
use crate::report::{format_value, ExtReal};
use crate::space::{empirical_from_samples, RandomVariable, CONSTANT_TOL};

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub command: Vec<String>,
    pub timestamp: String,
    pub results: Results,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Measure(MeasureTable),
    Audit(AuditReport),
    Counterexample(CounterexampleBundle),
    Envelope(EnvelopeSummary),
    Dual(DualTable),
}

#[derive(Debug, Serialize)]
pub struct MeasureTable {
    pub functionals: Vec<String>,
    pub rows: Vec<MeasureRow>,
}

#[derive(Debug, Serialize)]
pub struct MeasureRow {
    pub variable: String,
    pub values: Vec<ExtReal>,
}

#[derive(Debug, Serialize)]
pub struct EnvelopeSummary {
    pub functional: String,
    pub variant: Variant,
    pub anchors: usize,
    pub test_points: usize,
    pub attainment_residual: Option<ExtReal>,
    pub domination_passed: usize,
    pub domination_cases: usize,
    pub domination_violations: usize,
    pub first_violation: Option<Witness>,
    pub lrd_bound_excess: Option<ExtReal>,
    pub locus_convexity_passed: Option<bool>,
    pub envelopes: Vec<EnvelopeRecord>,
}

#[derive(Debug, Serialize)]
pub struct DualTable {
    pub gfamily: String,
    pub representation: &'static str,
    pub grid_points: usize,
    pub curves: usize,
    pub rows: Vec<DualRow>,
    pub audit: Vec<Fragment>,
}

#[derive(Debug, Serialize)]
pub struct DualRow {
    pub variable: String,
    pub value: ExtReal,
    pub lower_range: ExtReal,
}

fn load_workspace(cli: &Cli) -> Result<Workspace, CliError> {
    match &cli.workspace {
        Some(path) => Workspace::new(WorkspaceFile::load(path)?),
        None => Ok(Workspace::default()),
    }
}

/// Runs a parsed command; `echo` is recorded in the report.
pub fn execute(cli: &Cli, echo: Vec<String>) -> Result<(), CliError> {
    if let Command::Ingest { csv, column, name } = &cli.command {
        return ingest(cli, csv, column, name.as_deref());
    }
    let results = match &cli.command {
        Command::Measure { variables, functionals } => measure(&load_workspace(cli)?, variables, functionals)?,
        Command::Audit {
            functional,
            n_variables,
            n_pairs,
            tolerance,
            uniform_weights,
        } => {
            let mut config = AuditConfig::with_seed(cli.seed);
            if let Some(n) = n_variables {
                config.n_variables = *n;
            }
            if let Some(n) = n_pairs {
                config.n_pairs = *n;
            }
            if let Some(t) = tolerance {
                config.tolerance = *t;
            }
            config.uniform_weights = *uniform_weights;
            config.validate()?;
            Results::Audit(match load_workspace(cli)?.functional(functional)? {
                CatalogEntry::Deviation(d) => audit_deviation(&d, &config),
                CatalogEntry::Risk(r) => check_risk_axioms(&r, &config),
            })
        }
        Command::Counterexample { n, alpha } => Results::Counterexample(build_counterexample(*n, *alpha)?),
        Command::Envelope { functional, pool, variant } => {
            let d = load_workspace(cli)?.deviation(functional)?;
            Results::Envelope(envelope(&d, *pool, variant.parse()?, cli.seed)?)
        }
        Command::Dual { gfamily, variables, kind } => {
            Results::Dual(dual(&load_workspace(cli)?, gfamily, variables, *kind, cli.seed)?)
        }
        Command::Ingest { .. } => unreachable!("handled above"),
    };
    let doc = ReportDocument {
        tool: "stardev",
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        command: echo,
        timestamp: chrono::Utc::now().to_rfc3339(),
        results,
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::input(format!("cannot serialize report: {e}")))?,
        Format::Csv => to_csv(&doc.results)?,
    };
    emit(cli.out.as_deref(), &text)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::input(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn measure(ws: &Workspace, variables: &[String], functionals: &[String]) -> Result<Results, CliError> {
    let fs: Vec<CatalogEntry> = functionals.iter().map(|f| ws.functional(f)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for name in variables {
        let x = ws.variable(name)?;
        let values = fs
            .iter()
            .map(|f| {
                let v = match f {
                    CatalogEntry::Deviation(d) => d.evaluate(&x),
                    CatalogEntry::Risk(r) => r.evaluate(&x),
                }?;
                if v.is_nan() {
                    return Err(CliError::input(format!("NaN produced for `{name}`")));
                }
                Ok(ExtReal(v))
            })
            .collect::<Result<_, CliError>>()?;
        rows.push(MeasureRow {
            variable: name.clone(),
            values,
        });
    }
    Ok(Results::Measure(MeasureTable {
        functionals: functionals.to_vec(),
        rows,
    }))
}

fn envelope(d: &DeviationFunctional, pool: usize, variant: Variant, seed: u64) -> Result<EnvelopeSummary, CliError> {
    if pool == 0 {
        return Err(CliError::usage("pool size must be positive"));
    }
    let config = AuditConfig::with_seed(seed);
    let anchors = seeded_anchors(&config, pool, "envelope-anchors");
    let tests = seeded_variables_on(&config, anchors[0].space(), pool, "envelope-tests");
    let envs = envelope_family(d, &anchors, variant)?;

    let mut passed = 0;
    let (mut cases, mut violations) = (0, 0);
    let mut first_violation = None;
    for env in &envs {
        let f = verify_domination(d, env, &config);
        passed += usize::from(f.passed());
        cases += f.cases;
        violations += f.violations;
        if first_violation.is_none() {
            first_violation = f.witnesses.into_iter().next();
        }
    }

    let (mut residual, mut lrd_excess, mut convexity) = (None, None, None);
    match variant {
        Variant::Star | Variant::Cone => {
            residual = Some(ExtReal(attainment_residual(d, &anchors, &tests, variant)?));
        }
        Variant::Halfline => {
            let mut fam: Vec<DeviationFunctional> = envs.iter().map(RayEnvelope::to_deviation).collect();
            fam.push(chi_constants());
            let mut worst: f64 = 0.0;
            for y in &anchors {
                worst = worst.max((min_family(&fam, y)?.0 - d.evaluate(y)?).abs());
            }
            residual = Some(ExtReal(worst));
            convexity = Some(envs.iter().all(|e| check_locus_convexity(e, &config).passed()));
        }
        Variant::Lrd => {
            let mut worst = f64::NEG_INFINITY;
            for env in &envs {
                for x in &tests {
                    worst = worst.max(env.eval(x) - lower_range(x));
                }
            }
            lrd_excess = Some(ExtReal(worst));
        }
    }
    Ok(EnvelopeSummary {
        functional: d.name().to_string(),
        variant,
        anchors: anchors.len(),
        test_points: tests.len(),
        attainment_residual: residual,
        domination_passed: passed,
        domination_cases: cases,
        domination_violations: violations,
        first_violation,
        lrd_bound_excess: lrd_excess,
        locus_convexity_passed: convexity,
        envelopes: envs.iter().map(RayEnvelope::record).collect(),
    })
}

/// Grid resolution covering every atom of `xs` and the audit corpus.
fn zero_family_for(xs: &[RandomVariable]) -> Result<GFamily, CliError> {
    let atoms = xs
        .iter()
        .map(|x| (1.0 / x.space().min_prob() - CONSTANT_TOL).ceil() as usize)
        .max()
        .unwrap_or(1);
    Ok(GFamily::zero(default_alpha_grid(atoms.max(40)))?)
}

fn dual(ws: &Workspace, name: &str, variables: &[String], kind: DualKind, seed: u64) -> Result<DualTable, CliError> {
    let xs: Vec<RandomVariable> = variables.iter().map(|v| ws.variable(v)).collect::<Result<_, _>>()?;
    let family = match ws.gfamily(name) {
        Ok(g) => g,
        Err(_) if name == "zero" => zero_family_for(&xs)?,
        Err(e) => return Err(e),
    };
    let eval = match kind {
        DualKind::Var => dual_var_eval,
        DualKind::Es => dual_es_eval,
    };
    let mut rows = Vec::new();
    for (v, x) in variables.iter().zip(&xs) {
        rows.push(DualRow {
            variable: v.clone(),
            value: ExtReal(eval(&family, x)?),
            lower_range: ExtReal(lower_range(x)),
        });
    }
    let induced = match kind {
        DualKind::Var => dual_var_functional(&family),
        DualKind::Es => dual_es_functional(&family),
    };
    let config = AuditConfig {
        uniform_weights: true,
        ..AuditConfig::with_seed(seed)
    };
    let mut corpus = Corpus::new(&config);
    let floor = 2.0 * family.alpha_grid()[0] - CONSTANT_TOL;
    corpus.retain(|x| x.space().min_prob() >= floor);
    let mut properties = vec![Property::TranslationInsensitivity];
    properties.extend(Property::STAR_FORMS);
    properties.push(Property::LawInvariance);
    if kind == DualKind::Es {
        properties.push(Property::ConvexOrderConsistency);
    }
    let audit = properties
        .into_iter()
        .map(|p| run_property(p, &induced, &config, &corpus))
        .collect();
    Ok(DualTable {
        gfamily: name.to_string(),
        representation: match kind {
            DualKind::Var => "var",
            DualKind::Es => "es",
        },
        grid_points: family.alpha_grid().len(),
        curves: family.len(),
        rows,
        audit,
    })
}

fn ingest(cli: &Cli, path: &Path, column: &str, name: Option<&str>) -> Result<(), CliError> {
    let samples = read_column(path, column)?;
    let (space, x) = empirical_from_samples(&samples)?;
    let name = name.unwrap_or(column).to_string();
    let mut file = match &cli.workspace {
        Some(p) if p.exists() => WorkspaceFile::load(p)?,
        _ => WorkspaceFile::default(),
    };
    file.spaces.insert(name.clone(), SpaceSpec { probs: space.probs().to_vec() });
    file.variables.insert(
        name.clone(),
        VariableSpec {
            space: name,
            values: x.values().to_vec(),
        },
    );
    let text = file.to_json()?;
    match (&cli.out, &cli.workspace) {
        (Some(out), _) => emit(Some(out), &text),
        (None, Some(ws)) => emit(Some(ws), &text),
        (None, None) => emit(None, &text),
    }
}

/// Reads one named numeric column of a CSV file with a header row.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::input(e.to_string()))?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::input(format!("column `{column}` not found in header")))?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(idx).unwrap_or("");
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => return Err(CliError::input(format!("line {line}: cannot parse `{cell}` as a finite number"))),
        }
    }
    Ok(out)
}

fn to_csv(results: &Results) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut put = |rec: Vec<String>| w.write_record(&rec).map_err(|e| CliError::input(e.to_string()));
    let opt = |v: Option<ExtReal>| v.map(|v| format_value(v.0)).unwrap_or_default();
    match results {
        Results::Measure(t) => {
            put(std::iter::once("variable".to_string()).chain(t.functionals.iter().cloned()).collect())?;
            for row in &t.rows {
                let cells = row.values.iter().map(|v| checked(v.0)).collect::<Result<Vec<_>, _>>()?;
                put(std::iter::once(row.variable.clone()).chain(cells).collect())?;
            }
        }
        Results::Audit(r) => {
            put(vec!["property".into(), "status".into(), "cases".into(), "violations".into(), "worst_margin".into()])?;
            for f in &r.fragments {
                put(vec![
                    serde_json::to_value(f.property).map_err(|e| CliError::input(e.to_string()))?.as_str().unwrap_or("").to_string(),
                    serde_json::to_value(f.status).map_err(|e| CliError::input(e.to_string()))?.as_str().unwrap_or("").to_string(),
                    f.cases.to_string(),
                    f.violations.to_string(),
                    checked(f.worst_margin.0)?,
                ])?;
            }
        }
        Results::Counterexample(b) => {
            put(vec!["field".into(), "value".into()])?;
            for (k, v) in [
                ("n", b.n.to_string()),
                ("alpha", checked(b.alpha)?),
                ("d_x", checked(b.d_x)?),
                ("d_y", checked(b.d_y)?),
                ("d_z", checked(b.d_z)?),
                ("margin", checked(b.margin)?),
                ("convex_order_ok", b.convex_order_ok.to_string()),
                ("same_dist_ok", b.same_dist_ok.to_string()),
                ("inequality_ok", b.inequality_ok.to_string()),
            ] {
                put(vec![k.to_string(), v])?;
            }
        }
        Results::Envelope(s) => {
            put(vec!["field".into(), "value".into()])?;
            for (k, v) in [
                ("functional", s.functional.clone()),
                ("variant", s.variant.to_string()),
                ("anchors", s.anchors.to_string()),
                ("attainment_residual", opt(s.attainment_residual)),
                ("domination_passed", s.domination_passed.to_string()),
                ("domination_violations", s.domination_violations.to_string()),
                ("lrd_bound_excess", opt(s.lrd_bound_excess)),
                ("locus_convexity_passed", s.locus_convexity_passed.map(|b| b.to_string()).unwrap_or_default()),
            ] {
                put(vec![k.to_string(), v])?;
            }
        }
        Results::Dual(t) => {
            put(vec!["variable".into(), "value".into(), "lower_range".into()])?;
            for row in &t.rows {
                put(vec![row.variable.clone(), checked(row.value.0)?, checked(row.lower_range.0)?])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8").trim_end().to_string())
}

fn checked(v: f64) -> Result<String, CliError> {
    if v.is_nan() {
        Err(CliError::input("NaN in report"))
    } else {
        Ok(format_value(v))
    }
}
