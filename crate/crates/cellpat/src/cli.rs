//! Command-line surface: genotype validation, dataset statistics, surrogate
//! training and scoring, operation importance, pattern extraction,
//! architecture modification, and the end-to-end pipeline with its run
//! manifest.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cell::{CellKind, NetworkSpec};
use crate::dataset::{
    conv_topology_stats, group_by_auc, load_dataset, op_distribution, select_top_fraction,
    ScoredDataset,
};
use crate::error::{Error, Result};
use crate::genotype::{parse_genotype, serialize_genotype};
use crate::importance::{build_candidate_edge_set, read_candidates_csv, write_candidates_csv};
use crate::modify::{apply_plan, diff_specs, plan_modification, ModTarget};
use crate::pattern::{extract_pattern, CellPattern, PatternGoal};
use crate::surrogate::{
    evaluate, fit, ExternalAdapter, FitConfig, Predictor, RegressionMetrics, SurrogateModel,
};

#[derive(Parser)]
#[command(
    name = "cellpat",
    version,
    about = "Cell-pattern analysis for cell-based NAS architectures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a genotype file and report structural violations
    Validate(ValidateArgs),
    /// Summarize a scored-architecture dataset
    Stats(StatsArgs),
    /// Fit the built-in ridge surrogate and write a model file
    SurrogateTrain(SurrogateTrainArgs),
    /// Score a trained model against a labeled dataset
    SurrogateEval(SurrogateEvalArgs),
    /// Predict scores for genotype files
    Predict(PredictArgs),
    /// Compute per-edge operation importance over a population
    Oi(OiArgs),
    /// Extract a cell pattern from a candidate edge CSV
    Extract(ExtractArgs),
    /// Rewrite an architecture to comply with cell patterns
    Modify(ModifyArgs),
    /// Run the full prepare-extract pipeline and write all artifacts
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Genotype file (JSON or legacy tuple format)
    genotype: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Restrict statistics to one cell kind (normal, reduction, nb201)
    #[arg(long)]
    cell: Option<String>,
}

#[derive(Args)]
struct SurrogateTrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Ridge regularization strength
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    valid_fraction: f64,
    /// Shuffle seed for the train/valid/test split
    #[arg(long)]
    seed: u64,
    /// Where to write the model JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SurrogateEvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Scorer: `builtin` (with --model) or `exec:<command>`
    #[arg(long, default_value = "builtin")]
    surrogate: String,
    /// Model file for the builtin scorer
    #[arg(long)]
    model: Option<PathBuf>,
    /// Genotype files to score
    #[arg(required = true)]
    genotypes: Vec<PathBuf>,
}

#[derive(Args)]
struct OiArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Cell kind to analyze (normal, reduction, nb201)
    #[arg(long)]
    cell: String,
    #[arg(long, default_value = "builtin")]
    surrogate: String,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Keep edges occurring strictly more often than this
    #[arg(long, default_value_t = 14)]
    min_occurrences: usize,
    /// Population filter: all, high, low, or both (the two groups united)
    #[arg(long, default_value = "all")]
    oi_population: String,
    #[arg(long, default_value_t = 0.84)]
    high_thr: f64,
    #[arg(long, default_value_t = 0.78)]
    low_thr: f64,
    /// Candidate CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Candidate edge CSV produced by `oi`
    #[arg(long)]
    candidates: PathBuf,
    /// demote or promote
    #[arg(long)]
    goal: String,
    /// Expected cell kind; checked against the CSV
    #[arg(long)]
    cell: Option<String>,
    #[arg(long, default_value_t = 8)]
    max_edges: usize,
    /// Re-apply the occurrence filter before extraction
    #[arg(long)]
    min_occurrences: Option<usize>,
    /// Pattern JSON destination (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModifyArgs {
    /// Genotype file of the target architecture
    genotype: PathBuf,
    #[arg(long)]
    normal_pattern: Option<PathBuf>,
    #[arg(long)]
    reduction_pattern: Option<PathBuf>,
    /// normal, reduction, or dual
    #[arg(long)]
    target: String,
    /// Pattern edges applied per cell
    #[arg(long, default_value_t = 4)]
    budget: usize,
    /// Where to write the modified genotype
    #[arg(long)]
    out: PathBuf,
    /// Optional edit-plan JSON for audit
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Output directory for all artifacts
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "builtin")]
    surrogate: String,
    /// Pre-trained model file; skips training
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    #[arg(long, default_value_t = 0.84)]
    high_thr: f64,
    #[arg(long, default_value_t = 0.78)]
    low_thr: f64,
    #[arg(long, default_value_t = 0.05)]
    top_fraction: f64,
    #[arg(long, default_value_t = 14)]
    min_occurrences: usize,
    #[arg(long, default_value_t = 8)]
    max_edges: usize,
    #[arg(long)]
    seed: u64,
    /// Override the per-goal OI population (all, high, low, both)
    #[arg(long)]
    oi_population: Option<String>,
}

/// Parses `args` and runs the selected subcommand, returning the process
/// exit code: 0 success, 1 usage, 2 unreadable input, 3 failed validation,
/// 4 external-adapter failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        // The downstream consumer of our output closed the pipe; exit
        // quietly like any other well-behaved filter.
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn is_broken_pipe(err: &Error) -> bool {
    match err {
        Error::Io(e) => e.kind() == std::io::ErrorKind::BrokenPipe,
        Error::Csv(e) => {
            matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe)
        }
        _ => false,
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => 1,
        Error::Syntax { .. }
        | Error::SchemaMismatch { .. }
        | Error::SingularSystem
        | Error::DatasetRow { .. }
        | Error::Dataset(_)
        | Error::PlanMismatch(_)
        | Error::UnknownSearchSpace(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 2,
        Error::Semantic(_) | Error::InvalidSpec(_) | Error::UnknownOperation(_) => 3,
        Error::Adapter(_) => 4,
    }
}

fn dispatch(command: Cmd, out: &mut dyn Write) -> Result<()> {
    match command {
        Cmd::Validate(args) => cmd_validate(args, out),
        Cmd::Stats(args) => cmd_stats(args, out),
        Cmd::SurrogateTrain(args) => cmd_surrogate_train(args, out),
        Cmd::SurrogateEval(args) => cmd_surrogate_eval(args, out),
        Cmd::Predict(args) => cmd_predict(args, out),
        Cmd::Oi(args) => cmd_oi(args, out),
        Cmd::Extract(args) => cmd_extract(args, out),
        Cmd::Modify(args) => cmd_modify(args, out),
        Cmd::Pipeline(args) => cmd_pipeline(args, out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn make_predictor(surrogate: &str, model: Option<&Path>) -> Result<Box<dyn Predictor>> {
    if surrogate == "builtin" {
        let path = model.ok_or_else(|| {
            Error::InvalidArgument("the builtin surrogate needs --model <file>".to_string())
        })?;
        let model = SurrogateModel::from_json(&read_text(path)?)?;
        Ok(Box::new(model))
    } else if let Some(command) = surrogate.strip_prefix("exec:") {
        Ok(Box::new(ExternalAdapter::spawn(command)?))
    } else {
        Err(Error::InvalidArgument(format!(
            "unknown surrogate `{surrogate}`; expected builtin or exec:<command>"
        )))
    }
}

fn cmd_validate(args: ValidateArgs, out: &mut dyn Write) -> Result<()> {
    let spec = parse_genotype(&read_text(&args.genotype)?)?;
    let report = spec.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    writeln!(
        out,
        "valid: {} genotype, m = {}, {} cells",
        spec.space().id(),
        spec.m_intermediate(),
        spec.n_cells()
    )?;
    for &kind in spec.cell_kinds() {
        let cell = spec.cell(kind).expect("kind listed for this space");
        writeln!(out, "  {kind} cell: {} edges", cell.edges().len())?;
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let (ds, report) = load_dataset(&args.dataset)?;
    writeln!(out, "rows read: {}", report.rows_read)?;
    writeln!(out, "duplicates dropped: {}", report.duplicates_dropped)?;
    writeln!(out, "rows kept: {}", ds.len())?;
    let labeled = ds.rows.iter().filter(|r| r.mia_auc.is_some()).count();
    writeln!(out, "rows with mia_auc: {labeled}")?;
    if ds.is_empty() {
        return Ok(());
    }
    let kinds: Vec<CellKind> = match &args.cell {
        Some(id) => vec![CellKind::from_id(id)?],
        None => ds.rows[0].spec.cell_kinds().to_vec(),
    };
    for kind in kinds {
        let dist = op_distribution(&ds, kind)?;
        writeln!(out, "{kind} cell operations ({} edges):", dist.total)?;
        for (op, count) in &dist.counts {
            writeln!(out, "  {:<4} {:>8}  {}", op.code(), count, dist.frequency(*op))?;
        }
        let conv = conv_topology_stats(&ds, kind)?;
        writeln!(
            out,
            "{kind} cell convolution topology: direct {} ({}), intermediate {} ({})",
            conv.direct, conv.direct_freq, conv.intermediate, conv.intermediate_freq
        )?;
    }
    Ok(())
}

fn cmd_surrogate_train(args: SurrogateTrainArgs, out: &mut dyn Write) -> Result<()> {
    let (ds, _) = load_dataset(&args.dataset)?;
    let config = FitConfig {
        lambda: args.lambda,
        train_fraction: args.train_fraction,
        valid_fraction: args.valid_fraction,
        seed: args.seed,
    };
    let (model, metrics) = fit(&ds, &config)?;
    write_bytes(&args.out, model.to_json()?.as_bytes())?;
    writeln!(out, "model written to {}", args.out.display())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&metrics)?)?;
    Ok(())
}

fn labeled_pairs(ds: &ScoredDataset) -> (Vec<NetworkSpec>, Vec<f64>) {
    let mut specs = Vec::new();
    let mut truths = Vec::new();
    for row in &ds.rows {
        if let Some(auc) = row.mia_auc {
            specs.push(row.spec.clone());
            truths.push(auc);
        }
    }
    (specs, truths)
}

fn cmd_surrogate_eval(args: SurrogateEvalArgs, out: &mut dyn Write) -> Result<()> {
    let (ds, _) = load_dataset(&args.dataset)?;
    let model = SurrogateModel::from_json(&read_text(&args.model)?)?;
    let (specs, truths) = labeled_pairs(&ds);
    if specs.is_empty() {
        return Err(Error::Dataset(
            "no rows carry mia_auc; nothing to evaluate".to_string(),
        ));
    }
    let predictions = model.predict_batch(&specs)?;
    let metrics = evaluate(&predictions, &truths)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&metrics)?)?;
    Ok(())
}

fn cmd_predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let mut specs = Vec::with_capacity(args.genotypes.len());
    for path in &args.genotypes {
        specs.push(parse_genotype(&read_text(path)?)?);
    }
    let predictor = make_predictor(&args.surrogate, args.model.as_deref())?;
    let scores = predictor.predict_batch(&specs)?;
    for (path, score) in args.genotypes.iter().zip(scores) {
        writeln!(out, "{}\t{}", path.display(), score)?;
    }
    Ok(())
}

/// Applies the AUC-group filter named by `--oi-population`.
fn population_rows(
    ds: &ScoredDataset,
    which: &str,
    high_thr: f64,
    low_thr: f64,
) -> Result<Vec<NetworkSpec>> {
    let rows: Vec<NetworkSpec> = match which {
        "all" => ds.rows.iter().map(|r| r.spec.clone()).collect(),
        "high" | "low" | "both" => {
            let groups = group_by_auc(ds, high_thr, low_thr)?;
            let mut rows: Vec<NetworkSpec> = Vec::new();
            if which != "low" {
                rows.extend(groups.high.rows.iter().map(|r| r.spec.clone()));
            }
            if which != "high" {
                rows.extend(groups.low.rows.iter().map(|r| r.spec.clone()));
            }
            rows
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown population `{other}`; expected all, high, low, or both"
            )))
        }
    };
    Ok(rows)
}

fn cmd_oi(args: OiArgs, out: &mut dyn Write) -> Result<()> {
    let (ds, _) = load_dataset(&args.dataset)?;
    let kind = CellKind::from_id(&args.cell)?;
    let population = population_rows(&ds, &args.oi_population, args.high_thr, args.low_thr)?;
    let predictor = make_predictor(&args.surrogate, args.model.as_deref())?;
    let set = build_candidate_edge_set(&population, kind, predictor.as_ref(), args.min_occurrences)?;
    match &args.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_candidates_csv(&set, &mut buf)?;
            write_bytes(path, &buf)?;
            writeln!(
                out,
                "{} candidate edges over {} architectures written to {}",
                set.records.len(),
                population.len(),
                path.display()
            )?;
        }
        None => write_candidates_csv(&set, &mut *out)?,
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs, out: &mut dyn Write) -> Result<()> {
    let text = read_text(&args.candidates)?;
    let mut set = read_candidates_csv(text.as_bytes())?;
    if let Some(cell) = &args.cell {
        let kind = CellKind::from_id(cell)?;
        if kind != set.cell_kind {
            return Err(Error::InvalidArgument(format!(
                "candidate CSV holds {} records, not {kind}",
                set.cell_kind
            )));
        }
    }
    if let Some(min) = args.min_occurrences {
        set.records.retain(|r| r.occurrences > min);
        set.min_occurrences = min;
    }
    let goal = PatternGoal::from_id(&args.goal)?;
    let pattern = extract_pattern(&set, args.max_edges, goal)?;
    let json = pattern.to_json()?;
    match &args.out {
        Some(path) => {
            write_bytes(path, json.as_bytes())?;
            writeln!(
                out,
                "{} pattern with {} edges written to {}",
                goal,
                pattern.len(),
                path.display()
            )?;
        }
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

fn load_pattern(path: Option<&Path>) -> Result<Option<CellPattern>> {
    match path {
        Some(p) => Ok(Some(CellPattern::from_json(&read_text(p)?)?)),
        None => Ok(None),
    }
}

fn cmd_modify(args: ModifyArgs, out: &mut dyn Write) -> Result<()> {
    let spec = parse_genotype(&read_text(&args.genotype)?)?;
    let target = ModTarget::from_id(&args.target)?;
    let normal = load_pattern(args.normal_pattern.as_deref())?;
    let reduction = load_pattern(args.reduction_pattern.as_deref())?;
    let plan = plan_modification(
        &spec,
        normal.as_ref(),
        reduction.as_ref(),
        target,
        args.budget,
    )?;
    let modified = apply_plan(&spec, &plan)?;
    let mut genotype = serialize_genotype(&modified)?;
    genotype.push('\n');
    write_bytes(&args.out, genotype.as_bytes())?;
    if let Some(plan_path) = &args.plan_out {
        write_bytes(plan_path, plan.to_json()?.as_bytes())?;
    }
    writeln!(
        out,
        "{} edits planned, {} effective",
        plan.edits.len(),
        plan.effective_edits().count()
    )?;
    let diff = diff_specs(&spec, &modified)?;
    if diff.is_empty() {
        writeln!(out, "no changes")?;
    }
    for entry in diff {
        writeln!(out, "{entry}")?;
    }
    writeln!(out, "modified genotype written to {}", args.out.display())?;
    Ok(())
}

#[derive(Serialize)]
struct ManifestConfig {
    dataset: String,
    surrogate: String,
    model: Option<String>,
    lambda: f64,
    high_thr: f64,
    low_thr: f64,
    top_fraction: f64,
    min_occurrences: usize,
    max_edges: usize,
    seed: u64,
    oi_population: Option<String>,
}

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
    rows_read: usize,
    duplicates_dropped: usize,
    rows_kept: usize,
}

#[derive(Serialize)]
struct ManifestSelection {
    selected_rows: usize,
    labeled_rows: usize,
    high_rows: usize,
    low_rows: usize,
}

#[derive(Serialize)]
struct ManifestSurrogate {
    kind: String,
    trained: bool,
    model_file: Option<String>,
    metrics: Option<RegressionMetrics>,
}

#[derive(Serialize)]
struct ExtractionNote {
    population: String,
    architectures: usize,
    skipped_empty: bool,
}

#[derive(Serialize)]
struct Manifest {
    tool: String,
    version: String,
    config: ManifestConfig,
    input: ManifestInput,
    selection: ManifestSelection,
    surrogate: ManifestSurrogate,
    extraction: BTreeMap<String, ExtractionNote>,
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct GroupsFile {
    high_thr: f64,
    low_thr: f64,
    high: Vec<String>,
    low: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_artifact(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    artifacts: &mut BTreeMap<String, String>,
) -> Result<()> {
    write_bytes(&dir.join(name), bytes)?;
    artifacts.insert(name.to_string(), sha256_hex(bytes));
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs, out: &mut dyn Write) -> Result<()> {
    if args.surrogate != "builtin" && args.model.is_some() {
        return Err(Error::InvalidArgument(
            "--model only applies to the builtin surrogate".to_string(),
        ));
    }
    fs::create_dir_all(&args.out)?;
    let mut artifacts = BTreeMap::new();

    let (ds, load_report) = load_dataset(&args.dataset)?;
    writeln!(
        out,
        "loaded {} rows ({} duplicates dropped)",
        ds.len(),
        load_report.duplicates_dropped
    )?;
    let selected = select_top_fraction(&ds, args.top_fraction)?;
    let labeled = ScoredDataset {
        rows: selected
            .rows
            .iter()
            .filter(|r| r.mia_auc.is_some())
            .cloned()
            .collect(),
        provenance: selected.provenance.clone(),
    };
    writeln!(
        out,
        "selected top {} rows by accuracy ({} labeled)",
        selected.len(),
        labeled.len()
    )?;

    // Scorer: external command, pre-trained model, or a fresh fit on the
    // labeled selection.
    let mut surrogate_info = ManifestSurrogate {
        kind: args.surrogate.clone(),
        trained: false,
        model_file: None,
        metrics: None,
    };
    let predictor: Box<dyn Predictor> = if args.surrogate == "builtin" {
        match &args.model {
            Some(path) => {
                surrogate_info.model_file = Some(path.display().to_string());
                Box::new(SurrogateModel::from_json(&read_text(path)?)?)
            }
            None => {
                let config = FitConfig::new(args.lambda, args.seed);
                let (model, metrics) = fit(&labeled, &config)?;
                let model_json = model.to_json()?;
                write_artifact(&args.out, "model.json", model_json.as_bytes(), &mut artifacts)?;
                let metrics_json = serde_json::to_string_pretty(&metrics)?;
                write_artifact(
                    &args.out,
                    "metrics.json",
                    metrics_json.as_bytes(),
                    &mut artifacts,
                )?;
                writeln!(
                    out,
                    "trained builtin ridge (lambda = {}): r2 = {}, spearman_r = {}",
                    args.lambda, metrics.r2, metrics.spearman_r
                )?;
                surrogate_info.trained = true;
                surrogate_info.model_file = Some("model.json".to_string());
                surrogate_info.metrics = Some(metrics);
                Box::new(model)
            }
        }
    } else {
        make_predictor(&args.surrogate, None)?
    };

    let groups = group_by_auc(&labeled, args.high_thr, args.low_thr)?;
    writeln!(
        out,
        "groups: {} high (auc > {}), {} low (auc < {})",
        groups.high.len(),
        args.high_thr,
        groups.low.len(),
        args.low_thr
    )?;
    let groups_file = GroupsFile {
        high_thr: args.high_thr,
        low_thr: args.low_thr,
        high: groups.high.rows.iter().map(|r| r.id.clone()).collect(),
        low: groups.low.rows.iter().map(|r| r.id.clone()).collect(),
    };
    let groups_json = serde_json::to_string_pretty(&groups_file)?;
    write_artifact(&args.out, "groups.json", groups_json.as_bytes(), &mut artifacts)?;

    // Demotion patterns come from the low-AUC group, promotion patterns from
    // the high-AUC group, unless one population is forced for both goals.
    let mut extraction = BTreeMap::new();
    let kinds = selected.rows[0].spec.cell_kinds();
    for goal in [PatternGoal::Demotion, PatternGoal::Promotion] {
        let population_name = match &args.oi_population {
            Some(name) => name.clone(),
            None => match goal {
                PatternGoal::Demotion => "low".to_string(),
                PatternGoal::Promotion => "high".to_string(),
            },
        };
        let population =
            population_rows(&labeled, &population_name, args.high_thr, args.low_thr)?;
        extraction.insert(
            goal.id().to_string(),
            ExtractionNote {
                population: population_name.clone(),
                architectures: population.len(),
                skipped_empty: population.is_empty(),
            },
        );
        if population.is_empty() {
            writeln!(out, "{goal}: skipped, {population_name} population is empty")?;
            continue;
        }
        for &kind in kinds {
            let set = build_candidate_edge_set(
                &population,
                kind,
                predictor.as_ref(),
                args.min_occurrences,
            )?;
            let mut csv = Vec::new();
            write_candidates_csv(&set, &mut csv)?;
            write_artifact(
                &args.out,
                &format!("candidates_{}_{}.csv", goal.id(), kind.id()),
                &csv,
                &mut artifacts,
            )?;
            let pattern = extract_pattern(&set, args.max_edges, goal)?;
            let pattern_json = pattern.to_json()?;
            write_artifact(
                &args.out,
                &format!("pattern_{}_{}.json", goal.id(), kind.id()),
                pattern_json.as_bytes(),
                &mut artifacts,
            )?;
            writeln!(
                out,
                "{goal}/{kind}: {} candidate edges, pattern with {} edges",
                set.records.len(),
                pattern.len()
            )?;
        }
    }

    let manifest = Manifest {
        tool: "cellpat".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: ManifestConfig {
            dataset: args.dataset.display().to_string(),
            surrogate: args.surrogate.clone(),
            model: args.model.as_ref().map(|p| p.display().to_string()),
            lambda: args.lambda,
            high_thr: args.high_thr,
            low_thr: args.low_thr,
            top_fraction: args.top_fraction,
            min_occurrences: args.min_occurrences,
            max_edges: args.max_edges,
            seed: args.seed,
            oi_population: args.oi_population.clone(),
        },
        input: ManifestInput {
            path: args.dataset.display().to_string(),
            sha256: ds.provenance.sha256.clone(),
            rows_read: load_report.rows_read,
            duplicates_dropped: load_report.duplicates_dropped,
            rows_kept: ds.len(),
        },
        selection: ManifestSelection {
            selected_rows: selected.len(),
            labeled_rows: labeled.len(),
            high_rows: groups.high.len(),
            low_rows: groups.low.len(),
        },
        surrogate: surrogate_info,
        extraction,
        artifacts,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    write_bytes(&args.out.join("manifest.json"), manifest_json.as_bytes())?;
    writeln!(out, "manifest written to {}", args.out.join("manifest.json").display())?;
    Ok(())
}
