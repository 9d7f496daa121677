//! Subcommand implementations.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use costspace::calibration::{est, pav};
use costspace::continuous::{builtin_catalog, classify_intervals, convexify, lambda_components, lambda_curve, DEFAULT_TOL};
use costspace::format::sig;
use costspace::io::{read_table, CsvTable};
use costspace::{
    builtin_model, cost_curve_points, expected_loss, ConditionKind, EmpiricalModel, Error, LossQuery, LossReport,
    MetricReport, ThresholdChoiceMethod, WeightFamily,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{sink, write_csv, write_json, CSV_DIGITS};
use crate::{Calibrator, CurveType, DemoArgs, LossOptions};

/// Malformed command-line input detected by the front end itself.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// 2 for input errors, 1 for failed computations.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if cause.is::<InputError>() {
            return 2;
        }
    }
    1
}

fn load_table(path: &Path) -> Result<CsvTable> {
    let file = File::open(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    read_table(file).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> Result<EmpiricalModel> {
    let table = load_table(path)?;
    table.dataset.build().with_context(|| format!("building model from {}", path.display()))
}

fn parse_methods(opts: &LossOptions) -> Result<Vec<ThresholdChoiceMethod>> {
    let mut methods = opts
        .methods
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ThresholdChoiceMethod>())
        .collect::<costspace::Result<Vec<_>>>()?;
    if let Some(t) = opts.fixed_threshold {
        methods.push(ThresholdChoiceMethod::score_fixed(t)?);
    }
    if let Some(r) = opts.fixed_rate {
        methods.push(ThresholdChoiceMethod::rate_fixed(r)?);
    }
    if methods.is_empty() {
        return Err(InputError("no method given".into()).into());
    }
    Ok(methods)
}

pub fn metrics(input: &Path, threshold: Option<f64>, out: Option<&Path>) -> Result<()> {
    let model = load_model(input)?;
    write_json(&MetricReport::compute(&model, threshold)?, out)
}

#[derive(Serialize)]
struct LossOutput {
    n: u64,
    pi0: f64,
    pi1: f64,
    condition: ConditionKind,
    weight: String,
    results: Vec<LossReport>,
}

pub fn loss(input: &Path, opts: &LossOptions, out: Option<&Path>) -> Result<()> {
    let methods = parse_methods(opts)?;
    let family: WeightFamily = opts.weight.parse()?;
    let kind: ConditionKind = opts.condition.parse()?;
    let model = load_model(input)?;
    let results = methods
        .into_iter()
        .map(|m| LossReport::compute(&model, &LossQuery::new(m, family, kind)))
        .collect::<costspace::Result<Vec<_>>>()?;
    let p = model.priors();
    write_json(
        &LossOutput { n: model.n(), pi0: p.pi0, pi1: p.pi1, condition: kind, weight: family.to_string(), results },
        out,
    )
}

pub fn curves(input: &Path, curve: CurveType, method: &str, condition: &str, grid: usize, out: Option<&Path>) -> Result<()> {
    if grid < 2 {
        return Err(InputError(format!("--grid must be at least 2, got {grid}")).into());
    }
    let kind: ConditionKind = condition.parse()?;
    let model = load_model(input)?;
    let series = match curve {
        CurveType::Cost => cost_curve_points(&model, &method.parse()?, kind, grid)?,
        CurveType::Brier => cost_curve_points(&model, &ThresholdChoiceMethod::ScoreDriven, kind, grid)?,
        CurveType::Optimal => cost_curve_points(&model, &ThresholdChoiceMethod::Optimal, kind, grid)?,
        CurveType::Refinement => cost_curve_points(&pav(&model).model, &ThresholdChoiceMethod::ScoreDriven, kind, grid)?,
    };
    let mut prev: Option<(f64, f64)> = None;
    let rows: Vec<Vec<f64>> = series
        .points
        .iter()
        .map(|&(x, y)| {
            let area = prev.map_or(0.0, |(px, py)| (x - px) * (y + py) * 0.5);
            prev = Some((x, y));
            vec![x, y, area]
        })
        .collect();
    let axis = match kind {
        ConditionKind::Cost => "c",
        ConditionKind::Skew => "z",
    };
    write_csv(out, &[axis, "loss", "area"], &rows)
}

pub fn calibrate(input: &Path, method: Calibrator, out: Option<&Path>) -> Result<()> {
    let table = load_table(input)?;
    let model = table.dataset.build()?;
    let cal = match method {
        Calibrator::Pav => pav(&model),
        Calibrator::Est => est(&model)?,
    };
    let mut w = csv::Writer::from_writer(sink(out)?);
    let mut header = table.headers.clone();
    header.push_field("calibrated_score");
    w.write_record(&header)?;
    for (rec, &score) in table.records.iter().zip(table.dataset.scores()) {
        let new = cal.apply(score).context("score missing from the fitted mapping")?;
        let mut row = rec.clone();
        row.push_field(&sig(new, CSV_DIGITS));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    method: String,
    losses: Vec<f64>,
    /// Indices of the inputs with the lowest loss.
    best: Vec<usize>,
}

#[derive(Serialize)]
struct CompareOutput {
    condition: ConditionKind,
    weight: String,
    models: Vec<String>,
    rows: Vec<CompareRow>,
}

fn model_names(inputs: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = inputs
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect();
    let unique = stems.iter().enumerate().all(|(i, s)| !stems[..i].contains(s));
    if unique {
        stems
    } else {
        inputs.iter().map(|p| p.display().to_string()).collect()
    }
}

pub fn compare(inputs: &[PathBuf], opts: &LossOptions, out: Option<&Path>) -> Result<()> {
    let methods = parse_methods(opts)?;
    let family: WeightFamily = opts.weight.parse()?;
    let kind: ConditionKind = opts.condition.parse()?;
    let models = inputs.iter().map(|p| load_model(p)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(methods.len());
    for m in &methods {
        let query = LossQuery::new(*m, family, kind);
        let losses = models.iter().map(|model| expected_loss(model, &query)).collect::<costspace::Result<Vec<_>>>()?;
        let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let best = (0..losses.len()).filter(|&i| losses[i] - min <= 1e-12).collect();
        rows.push(CompareRow { method: m.to_string(), losses, best });
    }
    let table = CompareOutput { condition: kind, weight: family.to_string(), models: model_names(inputs), rows };
    print_table(&table)?;
    if let Some(path) = out {
        write_json(&table, Some(path))?;
    }
    Ok(())
}

fn print_table(t: &CompareOutput) -> Result<()> {
    let cells: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            r.losses
                .iter()
                .enumerate()
                .map(|(i, &l)| format!("{}{}", sig(l, 6), if r.best.contains(&i) { " *" } else { "" }))
                .collect()
        })
        .collect();
    let first = t.rows.iter().map(|r| r.method.len()).chain(["method".len()]).max().unwrap_or(6);
    let widths: Vec<usize> = (0..t.models.len())
        .map(|j| cells.iter().map(|row| row[j].len()).chain([t.models[j].len()]).max().unwrap_or(0))
        .collect();
    let mut out = sink(None)?;
    write!(out, "{:<first$}", "method")?;
    for (name, w) in t.models.iter().zip(&widths) {
        write!(out, "  {name:>w$}")?;
    }
    writeln!(out)?;
    for (row, r) in cells.iter().zip(&t.rows) {
        write!(out, "{:<first$}", r.method)?;
        for (cell, w) in row.iter().zip(&widths) {
            write!(out, "  {cell:>w$}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "(* lowest expected loss per row; {} conditions, {} weight)", t.condition.as_str(), t.weight)?;
    out.flush()?;
    Ok(())
}

pub fn continuous_demo(args: &DemoArgs) -> Result<()> {
    if args.grid < 2 {
        return Err(InputError(format!("--grid must be at least 2, got {}", args.grid)).into());
    }
    let model = builtin_model(&args.model)?;
    let l_opt = model.optimal_loss()?;
    let (cl, rl) = model.decomposition()?;
    let bs = model.brier()?;
    let (analysed, map, convexified) = match classify_intervals(&model, DEFAULT_TOL) {
        Ok(map) => (model.clone(), map, false),
        Err(Error::NonConvexModel { .. }) => {
            let c = convexify(&model)?;
            let map = classify_intervals(&c, DEFAULT_TOL)?;
            (c, map, true)
        }
        Err(e) => return Err(e.into()),
    };
    let (lambda_bij, lambda_sing) = lambda_components(&analysed)?;
    write_json(
        &json!({
            "model": model.name(),
            "convexified": convexified,
            "L_opt": l_opt,
            "RL": rl,
            "CL": cl,
            "BS": bs,
            "lambda_bij": lambda_bij,
            "lambda_sing": lambda_sing,
            "intervals": map.intervals,
        }),
        None,
    )?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let steps = args.grid - 1;
        let envelope = model.cost_curve(&ThresholdChoiceMethod::Optimal, ConditionKind::Cost, steps)?;
        write_csv(Some(&dir.join("optimal_loss.csv")), &["c", "loss"], &pairs(&envelope))?;
        let lambda = lambda_curve(&analysed, steps)?;
        write_csv(Some(&dir.join("lambda.csv")), &["t", "integrand"], &pairs(&lambda))?;
        let (lo, hi) = model.support();
        let refinement: Vec<Vec<f64>> = (0..=steps)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / steps as f64;
                vec![t, model.refinement_density(t)]
            })
            .collect();
        write_csv(Some(&dir.join("refinement.csv")), &["t", "density"], &refinement)?;
    }
    Ok(())
}

fn pairs(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
    points.iter().map(|&(x, y)| vec![x, y]).collect()
}

pub fn continuous_list() -> Result<()> {
    let entries: Vec<_> = builtin_catalog()
        .iter()
        .map(|b| json!({"name": b.name, "aliases": b.aliases, "convex": b.convex, "description": b.description}))
        .collect();
    write_json(&entries, None)
}
