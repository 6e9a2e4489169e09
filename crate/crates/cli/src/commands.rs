//! Command implementations shared by the binary and the integration tests.

use crate::config::{ExperimentConfig, OfflineSection, OnlineSection, SourceKind};
use crate::output::{atomic_write, write_json, Manifest, OutRoot};
use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use softsense_core::data::{
    build_fir_matrix, load_dataset, segment, ColumnRole, Dataset, Scaler,
};
use softsense_core::learners::{lasso_fit, pls_fit, rvm_fit, FittedModel};
use softsense_core::online::{
    run_stream, LearnerKind, OnlineConfig, PredictionTrace, Scheme, TuningMode,
};
use softsense_core::sim::{
    derive_seed, preselect_correlated, simulate, DriftScenario, SimOutput,
};
use softsense_core::stats::{EvalReport, RobustTestConfig};
use softsense_core::tuning::{cv_tune, ParamGrid, ParamValue, TunedLearner, TuningSpec};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

const RVM_TOL: f64 = 1e-3;

/// Everything a command needs besides its own arguments.
pub struct Ctx {
    pub config: ExperimentConfig,
    pub hash: String,
    pub out: OutRoot,
    pub seed: u64,
}

pub fn kind_name(k: LearnerKind) -> &'static str {
    match k {
        LearnerKind::Pls => "pls",
        LearnerKind::Lasso => "lasso",
        LearnerKind::Rvm => "rvm",
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Mw => "mw",
        Scheme::MwAdaptive => "mwd",
        Scheme::Jitl => "jitl",
    }
}

fn tuning_name(t: TuningMode) -> &'static str {
    match t {
        TuningMode::Ts => "ts",
        TuningMode::W => "w",
    }
}

fn param_label(p: &Option<ParamValue<f64>>) -> String {
    match p {
        Some(v) => v.to_string(),
        None => "-".to_string(),
    }
}

/// Materialize the dataset named by the config, from the simulator or a file.
pub fn resolve_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<Dataset<f64>> {
    match cfg.dataset.source {
        SourceKind::Simulator => {
            let out = run_simulation(cfg, seed)?;
            Ok(out.dataset)
        }
        SourceKind::File => {
            let path = cfg.dataset.path.as_ref().context("dataset.path missing")?;
            let target = cfg.dataset.target.as_ref().context("dataset.target missing")?;
            let delimiter = cfg
                .dataset
                .delimiter
                .as_deref()
                .map(|d| d.as_bytes()[0])
                .unwrap_or(b',');
            let schema = file_schema(path, target, &cfg.dataset.ignore, delimiter)?;
            Ok(load_dataset(path, &schema, delimiter)?)
        }
    }
}

fn run_simulation(cfg: &ExperimentConfig, seed: u64) -> Result<SimOutput<f64>> {
    let id = cfg.dataset.scenario.context("dataset.scenario missing")?;
    let scenario = DriftScenario::from_id(id)?;
    let out = simulate::<f64>(scenario, seed)?;
    match cfg.dataset.preselect {
        Some(k) => Ok(preselect_correlated(&out, k)?),
        None => Ok(out),
    }
}

/// Build a column-role map from the file's own header: the named target, the
/// ignored columns, everything else a process variable.
fn file_schema(
    path: &Path,
    target: &str,
    ignore: &[String],
    delimiter: u8,
) -> Result<HashMap<String, ColumnRole>> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut header = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut header)
        .with_context(|| format!("reading the header of {}", path.display()))?;
    let mut schema = HashMap::new();
    let mut saw_target = false;
    for name in header.trim_end().split(delimiter as char) {
        let name = name.trim();
        let role = if name == target {
            saw_target = true;
            ColumnRole::Target
        } else if ignore.iter().any(|ig| ig == name) {
            ColumnRole::Ignore
        } else {
            ColumnRole::Process
        };
        schema.insert(name.to_string(), role);
    }
    if !saw_target {
        bail!(
            "target column {target:?} not found in the header of {}",
            path.display()
        );
    }
    Ok(schema)
}

// ---------------------------------------------------------------- simulate

pub fn cmd_simulate(ctx: &Ctx) -> Result<()> {
    if ctx.config.dataset.source != SourceKind::Simulator {
        bail!("the simulate command needs dataset.source = \"simulator\"");
    }
    let id = ctx.config.dataset.scenario.context("dataset.scenario missing")?;
    let scenario = DriftScenario::from_id(id)?;
    let reps = ctx.config.dataset.reps;
    let data_dir = ctx.out.data()?;

    let outputs: Vec<Result<SimOutput<f64>>> = (0..reps)
        .into_par_iter()
        .map(|rep| Ok(simulate::<f64>(scenario, derive_seed(ctx.seed, rep))?))
        .collect();

    let mut files = Vec::new();
    let mut seeds = Vec::new();
    let mut failures = 0usize;
    for (rep, out) in outputs.into_iter().enumerate() {
        match out {
            Ok(out) => {
                let name = format!("scenario{id}_rep{rep:02}.csv");
                let path = data_dir.join(&name);
                atomic_write(&path, &dataset_csv(&out.dataset))?;
                seeds.push(out.seed);
                files.push(format!("data/{name}"));
            }
            Err(err) => {
                eprintln!("rep {rep}: {err:#}");
                failures += 1;
            }
        }
    }
    write_json(
        &data_dir.join("seeds.json"),
        &serde_json::json!({ "base_seed": ctx.seed, "seeds": seeds }),
    )?;
    files.push("data/seeds.json".to_string());
    Manifest {
        command: "simulate".into(),
        config_hash: ctx.hash.clone(),
        seed: ctx.seed,
        files,
    }
    .write(&ctx.out)?;
    println!(
        "simulate: scenario {id} ({}), {} repetition(s) written to {}",
        scenario.label(),
        reps - failures,
        data_dir.display()
    );
    if failures > 0 {
        bail!("{failures} of {reps} repetitions failed");
    }
    Ok(())
}

fn dataset_csv(ds: &Dataset<f64>) -> String {
    let mut out = String::new();
    let mut cols: Vec<&str> = ds.var_names.iter().map(String::as_str).collect();
    cols.extend(ds.target_names.iter().map(String::as_str));
    out.push_str(&cols.join(","));
    out.push('\n');
    for i in 0..ds.n_rows() {
        let mut row = Vec::with_capacity(cols.len());
        for j in 0..ds.n_vars() {
            row.push(format!("{}", ds.values[(i, j)]));
        }
        for j in 0..ds.targets.ncols() {
            row.push(format!("{}", ds.targets[(i, j)]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// ----------------------------------------------------------------- offline

fn tune_param(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    learner: LearnerKind,
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<Option<ParamValue<f64>>> {
    let (tuned, grid) = match learner {
        LearnerKind::Pls => (
            TunedLearner::Pls,
            ParamGrid::default_components(x.ncols()),
        ),
        LearnerKind::Lasso => (TunedLearner::Lasso, ParamGrid::default_shrinkage()),
        LearnerKind::Rvm => return Ok(None),
    };
    let scaler = Scaler::fit(x, y)?;
    let (xs, ys) = scaler.apply(x, y);
    let spec = TuningSpec {
        learner: tuned,
        grid,
        folds,
        repeats,
        seed,
    };
    Ok(Some(cv_tune(&xs, &ys, &spec)?.best))
}

fn fit_model(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    learner: LearnerKind,
    param: &Option<ParamValue<f64>>,
) -> Result<FittedModel<f64>> {
    let scaler = Scaler::fit(x, y)?;
    let (xs, ys) = scaler.apply(x, y);
    Ok(match (learner, param) {
        (LearnerKind::Pls, Some(ParamValue::Components(l))) => {
            FittedModel::Pls(pls_fit(&xs, &ys, *l, scaler)?)
        }
        (LearnerKind::Lasso, Some(ParamValue::Shrinkage(lambda))) => {
            FittedModel::Lasso(lasso_fit(&xs, &ys, *lambda, scaler)?)
        }
        (LearnerKind::Rvm, None) => FittedModel::Rvm(rvm_fit(&xs, &ys, RVM_TOL, scaler)?),
        _ => bail!("parameter kind does not match the learner"),
    })
}

struct OfflineCell {
    segment: usize,
    lag: usize,
    learner: LearnerKind,
    param: Option<ParamValue<f64>>,
    rmse: f64,
    errors: Vec<f64>,
}

fn offline_cell(
    ds: &Dataset<f64>,
    off: &OfflineSection,
    seg_index: usize,
    seg: &softsense_core::data::Segment,
    lag: usize,
    learner: LearnerKind,
    seed: u64,
) -> Result<OfflineCell> {
    let sub = ds.slice_rows(seg.train.start..seg.test.end);
    let design = build_fir_matrix(&sub, 0, lag)?;
    let n_train = off.train_rows - lag;
    let x_tr = design.x.rows(0, n_train).into_owned();
    let y_tr = design.y.rows(0, n_train).into_owned();
    let param = tune_param(&x_tr, &y_tr, learner, off.folds, off.repeats, seed)?;
    let model = fit_model(&x_tr, &y_tr, learner, &param)?;
    let mut errors = Vec::with_capacity(design.x.nrows() - n_train);
    for k in n_train..design.x.nrows() {
        let pred = model.predict(&design.x.row(k).transpose())?;
        errors.push(pred.mean - design.y[k]);
    }
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
    Ok(OfflineCell {
        segment: seg_index,
        lag,
        learner,
        param,
        rmse,
        errors,
    })
}

pub fn cmd_offline(ctx: &Ctx) -> Result<()> {
    let off = ctx
        .config
        .offline
        .as_ref()
        .context("config has no [offline] section")?;
    let ds = resolve_dataset(&ctx.config, ctx.seed)?;
    let segments = segment(&ds, off.segments, off.train_rows, off.test_rows)?;

    let mut jobs = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        for &lag in &off.lags {
            for &learner in &off.learners {
                jobs.push((i, seg.clone(), lag, learner));
            }
        }
    }
    let results: Vec<Result<OfflineCell>> = jobs
        .par_iter()
        .map(|(i, seg, lag, learner)| {
            offline_cell(&ds, off, *i, seg, *lag, *learner, ctx.seed)
        })
        .collect();

    let mut cells = Vec::new();
    let mut failures = 0usize;
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(cell) => cells.push(cell),
            Err(err) => {
                eprintln!(
                    "segment {} lag {} {}: {err:#}",
                    job.0,
                    job.2,
                    kind_name(job.3)
                );
                failures += 1;
            }
        }
    }

    let reports_dir = ctx.out.reports()?;
    let plots_dir = ctx.out.plots()?;
    let mut files = Vec::new();
    let reference = kind_name(off.reference);
    for (i, _) in segments.iter().enumerate() {
        for &lag in &off.lags {
            let errors: Vec<(String, Vec<f64>)> = cells
                .iter()
                .filter(|c| c.segment == i && c.lag == lag)
                .map(|c| (kind_name(c.learner).to_string(), c.errors.clone()))
                .collect();
            if errors.iter().all(|(name, _)| name != reference) {
                continue;
            }
            let report =
                EvalReport::from_errors(reference, &errors, RobustTestConfig::default())?;
            let name = format!("offline_seg{i}_lag{lag}.csv");
            atomic_write(&reports_dir.join(&name), &report.to_csv())?;
            files.push(format!("reports/{name}"));
            println!("segment {i}, lag {lag}");
            println!("{}", report.to_text());
        }
    }

    let mut plot = String::from("segment,lag,learner,param,rmse\n");
    for c in &cells {
        plot.push_str(&format!(
            "{},{},{},{},{}\n",
            c.segment,
            c.lag,
            kind_name(c.learner),
            param_label(&c.param),
            c.rmse
        ));
    }
    atomic_write(&plots_dir.join("offline_rmse.csv"), &plot)?;
    files.push("plots/offline_rmse.csv".to_string());

    Manifest {
        command: "offline".into(),
        config_hash: ctx.hash.clone(),
        seed: ctx.seed,
        files,
    }
    .write(&ctx.out)?;
    if failures > 0 {
        bail!("{failures} offline cell(s) failed");
    }
    Ok(())
}

// ------------------------------------------------------------------ online

/// On-disk form of one online run: the trace plus enough metadata to detect
/// cross-config mixing later.
#[derive(Debug, Serialize, Deserialize)]
pub struct TraceFile {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub trace: PredictionTrace<f64>,
}

#[derive(Debug, Clone)]
struct OnlineCellSpec {
    learner: LearnerKind,
    scheme: Scheme,
    tuning: TuningMode,
    param: usize,
}

impl OnlineCellSpec {
    fn name(&self) -> String {
        let key = match self.scheme {
            Scheme::Jitl => "nn",
            _ => "w",
        };
        format!(
            "{}_{}_{}_{}{}",
            kind_name(self.learner),
            scheme_name(self.scheme),
            tuning_name(self.tuning),
            key,
            self.param
        )
    }
}

fn online_cells(on: &OnlineSection) -> Vec<OnlineCellSpec> {
    let mut cells = Vec::new();
    for &learner in &on.learners {
        for &scheme in &on.schemes {
            for &tuning in &on.tuning {
                let grid = match scheme {
                    Scheme::Jitl => &on.neighborhoods,
                    _ => &on.windows,
                };
                for &param in grid {
                    cells.push(OnlineCellSpec {
                        learner,
                        scheme,
                        tuning,
                        param,
                    });
                }
            }
        }
    }
    cells
}

pub fn cmd_online(ctx: &Ctx) -> Result<()> {
    let on = ctx
        .config
        .online
        .as_ref()
        .context("config has no [online] section")?;
    let ds = resolve_dataset(&ctx.config, ctx.seed)?;
    let design = build_fir_matrix(&ds, 0, on.lag)?;
    let initial = on.initial_ts - on.lag;

    let cells = online_cells(on);
    let results: Vec<Result<PredictionTrace<f64>>> = cells
        .par_iter()
        .map(|cell| {
            let mut cfg = OnlineConfig::new(cell.scheme, cell.learner, initial);
            cfg.window = cell.param;
            cfg.nn_count = cell.param;
            cfg.tuning_mode = cell.tuning;
            cfg.alpha_md = on.alpha_md;
            cfg.cv_folds = on.folds;
            cfg.cv_repeats = on.repeats;
            cfg.seed = ctx.seed;
            Ok(run_stream(&design, &cfg)?)
        })
        .collect();

    let traces_dir = ctx.out.traces()?;
    let reports_dir = ctx.out.reports()?;
    let plots_dir = ctx.out.plots()?;
    let mut files = Vec::new();
    let mut done: Vec<(OnlineCellSpec, PredictionTrace<f64>)> = Vec::new();
    let mut failures = 0usize;
    for (cell, res) in cells.iter().zip(results) {
        match res {
            Ok(trace) => done.push((cell.clone(), trace)),
            Err(err) => {
                eprintln!("{}: {err:#}", cell.name());
                failures += 1;
            }
        }
    }
    for (cell, trace) in &done {
        let name = cell.name();
        atomic_write(&traces_dir.join(format!("{name}.csv")), &trace.to_csv())?;
        write_json(
            &traces_dir.join(format!("{name}.json")),
            &TraceFile {
                name: name.clone(),
                config_hash: ctx.hash.clone(),
                seed: ctx.seed,
                trace: trace.clone(),
            },
        )?;
        files.push(format!("traces/{name}.csv"));
        files.push(format!("traces/{name}.json"));
    }

    // comparison against the TS-tuned PLS moving window at the first W
    let reference = format!("pls_mw_ts_w{}", on.windows.first().copied().unwrap_or(0));
    let errors: Vec<(String, Vec<f64>)> = done
        .iter()
        .map(|(cell, trace)| {
            let errs = trace
                .records
                .iter()
                .map(|r| r.prediction - r.truth)
                .collect();
            (cell.name(), errs)
        })
        .collect();
    if errors.iter().any(|(name, _)| *name == reference) {
        let report =
            EvalReport::from_errors(&reference, &errors, RobustTestConfig::default())?;
        atomic_write(&reports_dir.join("online.csv"), &report.to_csv())?;
        files.push("reports/online.csv".to_string());
        println!("{}", report.to_text());
    } else {
        eprintln!("reference run {reference} unavailable, comparison table skipped");
    }

    let mut plot = String::from("learner,scheme,tuning,param,rmse\n");
    for (cell, trace) in &done {
        plot.push_str(&format!(
            "{},{},{},{},{}\n",
            kind_name(cell.learner),
            scheme_name(cell.scheme),
            tuning_name(cell.tuning),
            cell.param,
            trace.rmse()
        ));
    }
    atomic_write(&plots_dir.join("online_rmse.csv"), &plot)?;
    files.push("plots/online_rmse.csv".to_string());

    Manifest {
        command: "online".into(),
        config_hash: ctx.hash.clone(),
        seed: ctx.seed,
        files,
    }
    .write(&ctx.out)?;
    if failures > 0 {
        bail!("{failures} online run(s) failed");
    }
    Ok(())
}

// ----------------------------------------------------------------- compare

pub fn cmd_compare(
    inputs: &[PathBuf],
    reference: Option<&str>,
    force: bool,
    out: &OutRoot,
) -> Result<()> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(input.clone());
        }
    }
    if paths.len() < 2 {
        bail!("compare needs at least two stored traces");
    }
    let mut traces = Vec::new();
    for path in &paths {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let tf: TraceFile = serde_json::from_str(&raw)
            .with_context(|| format!("parsing {}", path.display()))?;
        traces.push(tf);
    }
    let hashes: Vec<&str> = traces.iter().map(|t| t.config_hash.as_str()).collect();
    if hashes.windows(2).any(|w| w[0] != w[1]) {
        let mut distinct: Vec<&str> = hashes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if force {
            eprintln!(
                "warning: mixing traces from configs {}",
                distinct.join(", ")
            );
        } else {
            bail!(
                "traces come from different configs ({}); pass --force to compare anyway",
                distinct.join(", ")
            );
        }
    }
    let lengths: Vec<usize> = traces.iter().map(|t| t.trace.records.len()).collect();
    if lengths.windows(2).any(|w| w[0] != w[1]) {
        bail!("traces cover different numbers of samples: {lengths:?}");
    }

    let reference = reference
        .map(str::to_string)
        .unwrap_or_else(|| traces[0].name.clone());
    let errors: Vec<(String, Vec<f64>)> = traces
        .iter()
        .map(|t| {
            let errs = t
                .trace
                .records
                .iter()
                .map(|r| r.prediction - r.truth)
                .collect();
            (t.name.clone(), errs)
        })
        .collect();
    let report = EvalReport::from_errors(&reference, &errors, RobustTestConfig::default())?;
    let reports_dir = out.reports()?;
    atomic_write(&reports_dir.join("compare.csv"), &report.to_csv())?;
    println!("{}", report.to_text());
    Ok(())
}

// ---------------------------------------------------------------- validate

pub fn cmd_validate(config: &ExperimentConfig, hash: &str) -> Result<()> {
    match config.validate() {
        Ok(()) => {
            println!("config valid (hash {hash})");
            Ok(())
        }
        Err(errs) => {
            for e in &errs {
                eprintln!("config error: {e}");
            }
            bail!("{} config error(s)", errs.len());
        }
    }
}
