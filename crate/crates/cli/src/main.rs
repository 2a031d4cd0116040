use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use wcnn::grid::{generate_dataset_in_box, load_dataset, save_dataset, Dataset, DemandBox, GridError, GridModel, Split};
use wcnn::mlp::{loss_mae, MlpParams, ModelCheckpoint, TrainConfig};
use wcnn::verifier::{solve_worst_case_with, CertificateRecord, InputBox, VerifyOptions};
use wcnn::wctrain::{
    finetune_sequential, layer_sensitivity, scaled_gen_bounds, scaled_input_box, train_gennn, train_standard,
    train_wcnn, SensitivityReport, TrainError, TrainReport, TrainSummary,
};

const EXIT_OTHER: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_DATAGEN: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;
const EXIT_GAP: u8 = 5;

#[derive(Parser)]
#[command(name = "wcnn", version, about = "Train and verify OPF-approximating ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample demands, solve DC-OPF per sample and write a tagged CSV dataset.
    GenData(GenDataArgs),
    /// Train a network in one of the modes nn, gennn, wcnn.
    Train(TrainArgs),
    /// Certify the worst-case generator-limit violation of a model.
    Verify(VerifyArgs),
    /// Sequential worst-case fine-tuning of a trained model.
    Finetune(FinetuneArgs),
    /// Per-layer sensitivity of the worst-case violation over several seeds.
    Sensitivity(SensitivityArgs),
    /// Comparison table over verification outputs.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Demand box as fractions of nominal load.
    #[arg(long = "box", default_value = "0.6:1.0", value_parser = parse_box)]
    bx: DemandBox,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Overrides {
    /// Flat JSON file with training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    wc_every: Option<usize>,
    #[arg(long)]
    last_layer_only: Option<bool>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Nn,
    Gennn,
    Wcnn,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, value_enum, default_value = "nn")]
    mode: Mode,
    /// Hidden layer widths, comma separated.
    #[arg(long, default_value = "16,16", value_parser = parse_usize_list)]
    hidden: ::std::vec::Vec<usize>,
    #[arg(long = "box", default_value = "0.6:1.0", value_parser = parse_box)]
    bx: DemandBox,
    #[command(flatten)]
    overrides: Overrides,
    /// Model checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Training log (JSON lines); defaults next to the model.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long = "box", default_value = "0.6:1.0", value_parser = parse_box)]
    bx: DemandBox,
    /// Also report test-split MAE of the model on this dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Node budget per candidate constraint; defaults to the model's config.
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FinetuneArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long = "box", default_value = "0.6:1.0", value_parser = parse_box)]
    bx: DemandBox,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "0,1,2,3,4", value_parser = parse_u64_list)]
    seeds: ::std::vec::Vec<u64>,
    #[arg(long, default_value = "15,15,15", value_parser = parse_usize_list)]
    hidden: ::std::vec::Vec<usize>,
    #[arg(long = "box", default_value = "0.6:1.0", value_parser = parse_box)]
    bx: DemandBox,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Verification outputs written by `verify`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Write the table as JSON here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

type Res<T> = Result<T, Failure>;

trait ExitWith<T> {
    fn exit(self, code: u8) -> Res<T>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit(self, code: u8) -> Res<T> {
        self.map_err(|e| Failure { code, err: e.into() })
    }
}

fn fail<T>(code: u8, msg: String) -> Res<T> {
    Err(Failure { code, err: anyhow!(msg) })
}

fn grid_code(e: &GridError) -> u8 {
    match e {
        GridError::Io(_) => EXIT_OTHER,
        GridError::Schema { .. } | GridError::DatasetSchema { .. } | GridError::Invalid(_) | GridError::DemandLength { .. } => {
            EXIT_SCHEMA
        }
        _ => EXIT_DATAGEN,
    }
}

fn train_code(e: &TrainError) -> u8 {
    match e {
        TrainError::Divergence(_) => EXIT_DIVERGENCE,
        TrainError::Mlp(_) | TrainError::EmptySplit(_) => EXIT_SCHEMA,
        _ => EXIT_OTHER,
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    seed: Option<u64>,
    version: String,
}

#[derive(Serialize, Deserialize)]
struct VerifyOutput {
    model: String,
    demand_box: DemandBox,
    v_g_mw: f64,
    max_loading_pct: f64,
    max_total_load_mw: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    test_mae_pct: Option<f64>,
    certificate: CertificateRecord,
}

#[derive(Serialize)]
struct TrainOutputSummary {
    #[serde(flatten)]
    summary: TrainSummary,
    hidden: Vec<usize>,
    test_mae: f64,
}

#[derive(Serialize)]
struct ReportRow {
    name: String,
    mae_pct: Option<f64>,
    v_g_mw: f64,
    max_loading_pct: f64,
}

fn parse_box(s: &str) -> Result<DemandBox, String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("hi: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(format!("need 0 <= lo <= hi, got {lo}:{hi}"));
    }
    Ok(DemandBox { lo, hi })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("{t}: {e}")))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    let v: Vec<usize> = parse_list(s)?;
    if v.contains(&0) {
        return Err("layer widths must be positive".into());
    }
    Ok(v)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    let v: Vec<u64> = parse_list(s)?;
    if v.is_empty() {
        return Err("need at least one seed".into());
    }
    Ok(v)
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn sha256_file(path: &Path) -> Res<String> {
    let bytes = std::fs::read(path).map_err(|e| Failure {
        code: EXIT_OTHER,
        err: anyhow!("{}: {e}", path.display()),
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, contents: &str) -> Res<()> {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_OTHER,
        err: anyhow!("{}: {e}", path.display()),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn write_manifest(out: &Path, command: &str, config: Value, inputs: &[&Path], outputs: &[&Path], seed: Option<u64>) -> Res<()> {
    let mut checksums = BTreeMap::new();
    for p in inputs {
        checksums.insert(display(p), sha256_file(p)?);
    }
    let manifest = RunManifest {
        command: command.into(),
        config,
        inputs: checksums,
        outputs: outputs.iter().map(|p| display(p)).collect(),
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    write_file(&sibling(out, "manifest.json"), &to_json(&manifest))
}

fn load_grid(path: &Path) -> Res<GridModel> {
    GridModel::from_json_file(path).map_err(|e| Failure {
        code: grid_code(&e),
        err: anyhow!("{}: {e}", path.display()),
    })
}

fn load_data(path: &Path, grid: &GridModel, bx: DemandBox) -> Res<Dataset> {
    load_dataset(path)
        .and_then(|d| d.with_grid_scalers(grid, bx))
        .map_err(|e| Failure {
            code: grid_code(&e),
            err: anyhow!("{}: {e}", path.display()),
        })
}

fn load_model(path: &Path) -> Res<(ModelCheckpoint, MlpParams)> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_OTHER,
        err: anyhow!("{}: {e}", path.display()),
    })?;
    let ck = ModelCheckpoint::from_json(&text).map_err(|e| Failure {
        code: EXIT_SCHEMA,
        err: anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()),
    })?;
    let params = ck.params().map_err(|e| Failure {
        code: EXIT_SCHEMA,
        err: anyhow!("{}: {e}", path.display()),
    })?;
    Ok((ck, params))
}

/// Base settings, then keys present in the config file, then flags.
fn resolve_config(base: &TrainConfig, o: &Overrides) -> Res<TrainConfig> {
    let mut merged = serde_json::to_value(base).expect("config serializes");
    if let Some(path) = &o.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_OTHER,
            err: anyhow!("{}: {e}", path.display()),
        })?;
        let file: Value = serde_json::from_str(&text).map_err(|e| Failure {
            code: EXIT_SCHEMA,
            err: anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()),
        })?;
        let Value::Object(file) = file else {
            return fail(EXIT_SCHEMA, format!("{}: expected a JSON object", path.display()));
        };
        let Value::Object(m) = &mut merged else { unreachable!() };
        m.extend(file);
    }
    let mut cfg: TrainConfig = serde_json::from_value(merged).exit(EXIT_SCHEMA)?;
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = o.warmup {
        cfg.warmup = v;
    }
    if let Some(v) = o.wc_every {
        cfg.wc_every = v;
    }
    if let Some(v) = o.last_layer_only {
        cfg.last_layer_only = v;
    }
    cfg.validate().exit(EXIT_SCHEMA)?;
    Ok(cfg)
}

fn write_train_outputs(
    out: &Path,
    report_path: &Path,
    ck: &ModelCheckpoint,
    report: &TrainReport,
    hidden: Vec<usize>,
    test_mae: f64,
) -> Res<()> {
    write_file(out, &format!("{}\n", ck.to_json()))?;
    write_file(report_path, &report.to_jsonl())?;
    let summary = TrainOutputSummary {
        summary: report.summary(),
        hidden,
        test_mae,
    };
    write_file(&sibling(report_path, "summary.json"), &to_json(&summary))
}

fn cmd_gen_data(a: GenDataArgs) -> Res<()> {
    let grid = load_grid(&a.grid)?;
    let config = serde_json::json!({ "n": a.n, "box": a.bx });
    write_manifest(&a.out, "gen-data", config, &[&a.grid], &[&a.out], Some(a.seed))?;
    let ds = generate_dataset_in_box(&grid, a.bx, a.n, a.seed).map_err(|e| Failure {
        code: if matches!(e, GridError::Invalid(_)) { EXIT_SCHEMA } else { EXIT_DATAGEN },
        err: e.into(),
    })?;
    save_dataset(&ds, &a.out).exit(EXIT_OTHER)?;
    println!(
        "{} samples written to {} (train {}, val {}, test {})",
        ds.len(),
        a.out.display(),
        ds.count(Split::Train),
        ds.count(Split::Val),
        ds.count(Split::Test)
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Res<()> {
    let grid = load_grid(&a.grid)?;
    let ds = load_data(&a.dataset, &grid, a.bx)?;
    let cfg = resolve_config(&TrainConfig::default(), &a.overrides)?;
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&a.out, "report.jsonl"));
    let summary_path = sibling(&report_path, "summary.json");
    let config = serde_json::json!({ "mode": a.mode, "hidden": a.hidden, "box": a.bx, "train": cfg });
    let mut inputs = vec![a.dataset.as_path(), a.grid.as_path()];
    if let Some(c) = &a.overrides.config {
        inputs.push(c);
    }
    write_manifest(&a.out, "train", config, &inputs, &[&a.out, &report_path, &summary_path], Some(cfg.seed))?;

    let gb = scaled_gen_bounds(&grid, &ds.output_scaler);
    let result = match a.mode {
        Mode::Nn => train_standard(&ds, &a.hidden, &cfg),
        Mode::Gennn => train_gennn(&ds, &a.hidden, &gb, &cfg),
        Mode::Wcnn => {
            let bx = scaled_input_box(&grid, a.bx, &ds.input_scaler);
            train_wcnn(&ds, &gb, &bx, &a.hidden, &cfg)
        }
    };
    let (params, report) = result.map_err(|e| Failure {
        code: train_code(&e),
        err: e.into(),
    })?;
    let test_mae = loss_mae(&params, &ds.batch(Split::Test));
    let ck = ModelCheckpoint::new(&params, ds.input_scaler.clone(), ds.output_scaler.clone(), &cfg);
    write_train_outputs(&a.out, &report_path, &ck, &report, a.hidden, test_mae)?;
    let s = report.summary();
    println!(
        "{} epochs, train MAE {:.6}, val MAE {:.6}, test MAE {:.6}, model {}",
        s.epochs,
        s.final_train_loss,
        s.final_val_mae,
        test_mae,
        a.out.display()
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Res<()> {
    let grid = load_grid(&a.grid)?;
    let (ck, params) = load_model(&a.model)?;
    if grid.n_loads() != params.n_inputs() || grid.n_generators() != params.n_outputs() {
        return fail(
            EXIT_SCHEMA,
            format!(
                "model maps {} inputs to {} outputs, grid has {} loads and {} generators",
                params.n_inputs(),
                params.n_outputs(),
                grid.n_loads(),
                grid.n_generators()
            ),
        );
    }
    let test = match &a.dataset {
        Some(p) => Some(load_data(p, &grid, a.bx)?),
        None => None,
    };
    let node_limit = a.node_limit.unwrap_or(ck.meta.config.node_limit);
    let config = serde_json::json!({ "box": a.bx, "node_limit": node_limit });
    let mut inputs = vec![a.model.as_path(), a.grid.as_path()];
    if let Some(p) = &a.dataset {
        inputs.push(p);
    }
    write_manifest(&a.out, "verify", config, &inputs, &[&a.out], None)?;

    let gb = scaled_gen_bounds(&grid, &ck.output_scaler);
    let bx: InputBox = scaled_input_box(&grid, a.bx, &ck.input_scaler);
    let opts = VerifyOptions {
        node_limit,
        ..VerifyOptions::default()
    };
    let cert = solve_worst_case_with(&params, &bx, &gb, &opts).exit(EXIT_OTHER)?;
    let v_g_mw = cert.v_g * ck.output_scaler.scale[cert.constraint_id.generator];
    let max_load = grid.max_total_load();
    let pct = if max_load > 0.0 { 100.0 * v_g_mw / max_load } else { 0.0 };
    let test_mae_pct = test.map(|mut ds| {
        ds.input_scaler = ck.input_scaler.clone();
        ds.output_scaler = ck.output_scaler.clone();
        100.0 * loss_mae(&params, &ds.batch(Split::Test))
    });
    let out = VerifyOutput {
        model: a.model.file_stem().map_or_else(|| display(&a.model), |s| s.to_string_lossy().into_owned()),
        demand_box: a.bx,
        v_g_mw,
        max_loading_pct: pct,
        max_total_load_mw: max_load,
        test_mae_pct,
        certificate: cert.record(&params),
    };
    write_file(&a.out, &to_json(&out))?;
    let side = match cert.constraint_id.side {
        wcnn::verifier::Side::Upper => "upper",
        wcnn::verifier::Side::Lower => "lower",
    };
    println!(
        "worst-case violation v_g = {v_g_mw} MW ({pct:.2}% of max loading {max_load} MW), generator {} {side} limit, {} nodes",
        cert.constraint_id.generator, cert.nodes_explored
    );
    if let Some(m) = test_mae_pct {
        println!("test MAE {m:.4}%");
    }
    if !cert.is_certified() {
        let gap_mw = cert.gap() * ck.output_scaler.scale[cert.constraint_id.generator];
        return fail(
            EXIT_GAP,
            format!("node limit reached, optimality gap {} (scaled) = {gap_mw} MW", cert.gap()),
        );
    }
    Ok(())
}

fn cmd_finetune(a: FinetuneArgs) -> Res<()> {
    let grid = load_grid(&a.grid)?;
    let (ck, params) = load_model(&a.model)?;
    let ds = load_data(&a.dataset, &grid, a.bx)?;
    if ds.n_inputs() != params.n_inputs() || ds.n_outputs() != params.n_outputs() {
        return fail(EXIT_SCHEMA, "model and dataset dimensions disagree".into());
    }
    let cfg = resolve_config(&ck.meta.config, &a.overrides)?;
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&a.out, "report.jsonl"));
    let summary_path = sibling(&report_path, "summary.json");
    let config = serde_json::json!({ "box": a.bx, "train": cfg });
    let mut inputs = vec![a.model.as_path(), a.dataset.as_path(), a.grid.as_path()];
    if let Some(c) = &a.overrides.config {
        inputs.push(c);
    }
    write_manifest(&a.out, "finetune", config, &inputs, &[&a.out, &report_path, &summary_path], Some(cfg.seed))?;

    let gb = scaled_gen_bounds(&grid, &ds.output_scaler);
    let bx = scaled_input_box(&grid, a.bx, &ds.input_scaler);
    let (tuned, report) = finetune_sequential(&params, &ds, &gb, &bx, &cfg).map_err(|e| Failure {
        code: train_code(&e),
        err: e.into(),
    })?;
    let test_mae = loss_mae(&tuned, &ds.batch(Split::Test));
    let out_ck = ModelCheckpoint::new(&tuned, ds.input_scaler.clone(), ds.output_scaler.clone(), &cfg);
    let hidden = params.layer_dims[1..params.layer_dims.len() - 1].to_vec();
    write_train_outputs(&a.out, &report_path, &out_ck, &report, hidden, test_mae)?;
    let first = report.records.first().and_then(|r| r.v_g).unwrap_or(0.0);
    let last = report.records.last().and_then(|r| r.v_g).unwrap_or(0.0);
    println!(
        "{} updates, v_g {first} -> {last} (scaled), test MAE {test_mae:.6}, model {}",
        report.records.len().saturating_sub(1),
        a.out.display()
    );
    if let Some(w) = report.records.iter().filter_map(|r| r.warning.as_deref()).next_back() {
        println!("{w}");
    }
    Ok(())
}

fn cmd_sensitivity(a: SensitivityArgs) -> Res<()> {
    let grid = load_grid(&a.grid)?;
    let ds = load_data(&a.dataset, &grid, a.bx)?;
    let cfg = resolve_config(&TrainConfig::default(), &a.overrides)?;
    let config = serde_json::json!({ "hidden": a.hidden, "seeds": a.seeds, "box": a.bx, "train": cfg });
    let mut inputs = vec![a.dataset.as_path(), a.grid.as_path()];
    if let Some(c) = &a.overrides.config {
        inputs.push(c);
    }
    write_manifest(&a.out, "sensitivity", config, &inputs, &[&a.out], None)?;

    let gb = scaled_gen_bounds(&grid, &ds.output_scaler);
    let bx = scaled_input_box(&grid, a.bx, &ds.input_scaler);
    let report: SensitivityReport = layer_sensitivity(&a.hidden, &ds, &gb, &bx, &a.seeds, &cfg).map_err(|e| Failure {
        code: train_code(&e),
        err: e.into(),
    })?;
    write_file(&a.out, &to_json(&report))?;
    for (k, v) in report.normalized.iter().enumerate() {
        println!("layer {}: {v:.4}", k + 1);
    }
    println!("{} of {} seeds had a nonzero violation", report.n_seeds(), a.seeds.len());
    Ok(())
}

fn render_table(rows: &[ReportRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(5);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:>9}  {:>12}  {:>18}", "model", "MAE (%)", "v_g (MW)", "% wrt max loading");
    for r in rows {
        let mae = r.mae_pct.map_or_else(|| "-".to_string(), |m| format!("{m:.3}"));
        let _ = writeln!(
            s,
            "{:<width$}  {:>9}  {:>12.3}  {:>18.2}",
            r.name, mae, r.v_g_mw, r.max_loading_pct
        );
    }
    s
}

fn cmd_report(a: ReportArgs) -> Res<()> {
    let mut rows = Vec::with_capacity(a.reports.len());
    for p in &a.reports {
        let text = std::fs::read_to_string(p).map_err(|e| Failure {
            code: EXIT_OTHER,
            err: anyhow!("{}: {e}", p.display()),
        })?;
        let v: VerifyOutput = serde_json::from_str(&text).map_err(|e| Failure {
            code: EXIT_SCHEMA,
            err: anyhow!("{}: line {}, column {}: {e}", p.display(), e.line(), e.column()),
        })?;
        rows.push(ReportRow {
            name: v.model,
            mae_pct: v.test_mae_pct,
            v_g_mw: v.v_g_mw,
            max_loading_pct: v.max_loading_pct,
        });
    }
    print!("{}", render_table(&rows));
    let json = to_json(&rows);
    match &a.out {
        Some(out) => write_file(out, &json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Train(a) => cmd_train(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Finetune(a) => cmd_finetune(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
