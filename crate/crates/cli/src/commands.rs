use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use nhkh_core::boundaries::{self, BoundaryError};
use nhkh_core::dataset::{self, Sampling, SweepSpec};
use nhkh_nn::{ArchSpec, ModelFile, Predictions, Targets, TrainConfig, CLASS_VALUES};

use crate::config::Config;
use crate::grid::{axes_of, GridCell, PhaseGrid};
use crate::heatmap;
use crate::manifest::{sha256_hex, Manifest};
use crate::table::Table;

#[derive(Parser, Debug)]
#[command(
    name = "nhkh",
    version,
    about = "Regime maps of the dimerized non-Hermitian Kitaev-Hubbard chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep the (U/t, eta) plane and write a labeled dataset CSV.
    Generate(GenerateArgs),
    /// Train a network on a dataset CSV.
    Train(TrainArgs),
    /// Apply a model to a dataset (or a freshly generated sweep).
    Predict(PredictArgs),
    /// Cell-by-cell difference of two grids.
    Diff(DiffArgs),
    /// Analytic boundary polylines as CSV.
    Boundaries(BoundaryArgs),
    /// Render one grid column as a P6 image.
    Heatmap(HeatmapArgs),
}

macro_rules! value_enum_from_str {
    ($t:ty) => {
        impl std::str::FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(&s.replace('_', "-"), true)
            }
        }
    };
}

#[derive(Args, Debug, Default, Clone)]
pub struct SweepArgs {
    #[arg(long)]
    pub u_min: Option<f64>,
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    /// Non-Hermitian strength delta/t.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Pairing Delta/t.
    #[arg(long)]
    pub delta_pair: Option<f64>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingKind>,
    /// Number of random points.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n_eta: Option<usize>,
    #[arg(long)]
    pub n_u: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chain length L.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub n_keep: Option<usize>,
    /// 1/lambda of the quasi-degeneracy.
    #[arg(long)]
    pub inv_lambda: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingKind {
    Random,
    Grid,
}

impl SweepArgs {
    pub fn resolve(&self, cfg: &Config) -> Result<SweepSpec> {
        let d = SweepSpec::default();
        let (count, n_eta, n_u) = match d.sampling {
            Sampling::RandomUniform { count } => (count, 40, 40),
            Sampling::RegularGrid { n_eta, n_u } => (1, n_eta, n_u),
        };
        let kind = cfg.pick(self.sampling, "sampling", SamplingKind::Random)?;
        let count = cfg.pick(self.count, "count", count)?;
        let n_eta = cfg.pick(self.n_eta, "n_eta", n_eta)?;
        let n_u = cfg.pick(self.n_u, "n_u", n_u)?;
        let spec = SweepSpec {
            u_range: (
                cfg.pick(self.u_min, "u_min", d.u_range.0)?,
                cfg.pick(self.u_max, "u_max", d.u_range.1)?,
            ),
            eta_range: (
                cfg.pick(self.eta_min, "eta_min", d.eta_range.0)?,
                cfg.pick(self.eta_max, "eta_max", d.eta_range.1)?,
            ),
            delta_over_t: cfg.pick(self.delta, "delta", d.delta_over_t)?,
            delta_pair_over_t: cfg.pick(self.delta_pair, "delta_pair", d.delta_pair_over_t)?,
            sampling: match kind {
                SamplingKind::Random => Sampling::RandomUniform { count },
                SamplingKind::Grid => Sampling::RegularGrid { n_eta, n_u },
            },
            seed: cfg.pick(self.seed, "seed", d.seed)?,
            length: cfg.pick(self.length, "length", d.length)?,
            n_keep: cfg.pick(self.n_keep, "n_keep", d.n_keep)?,
            inv_lambda: cfg.pick(self.inv_lambda, "inv_lambda", d.inv_lambda)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Correlation entropy regression.
    Entropy,
    /// Quasi-degeneracy regression.
    ChiReg,
    /// Three-way classification of [chi].
    ChiClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FeatureSet {
    TwoPoint,
    All,
}

value_enum_from_str!(SamplingKind);
value_enum_from_str!(Task);
value_enum_from_str!(FeatureSet);

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Entropy => "entropy",
            Task::ChiReg => "chi_reg",
            Task::ChiClass => "chi_class",
        }
    }

    pub fn label_column(self) -> &'static str {
        match self {
            Task::Entropy => "c_corr",
            Task::ChiReg => "chi",
            Task::ChiClass => "chi_class",
        }
    }

    pub fn arch(self, input_dim: usize) -> ArchSpec {
        match self {
            Task::Entropy => ArchSpec::entropy(input_dim),
            Task::ChiReg => ArchSpec::chi_regression(input_dim),
            Task::ChiClass => ArchSpec::chi_classification(input_dim),
        }
    }
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::TwoPoint => "two_point",
            FeatureSet::All => "all",
        }
    }

    /// Dataset columns in input order.
    pub fn columns(self) -> Vec<String> {
        let n = match self {
            FeatureSet::TwoPoint => nhkh_core::correlators::TWO_POINT_LEN,
            FeatureSet::All => dataset::N_FEATURES,
        };
        dataset::csv_header()[dataset::N_SCALARS..dataset::N_SCALARS + n].to_vec()
    }
}

fn model_tag(task: Task, features: FeatureSet) -> String {
    format!("task={};features={}", task.name(), features.name())
}

fn parse_tag(tag: &str) -> Result<(Task, FeatureSet)> {
    let mut task = None;
    let mut features = None;
    for part in tag.split(';') {
        match part.split_once('=') {
            Some(("task", v)) => task = v.parse().ok(),
            Some(("features", v)) => features = v.parse().ok(),
            _ => {}
        }
    }
    match (task, features) {
        (Some(t), Some(f)) => Ok((t, f)),
        _ => bail!("model tag {tag:?} does not name a task and feature set"),
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSV.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    #[arg(long, value_enum)]
    pub features: Option<FeatureSet>,
    /// Model file to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Training curve CSV; defaults to `<output>.curve.csv`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[arg(long)]
    pub target_val_loss: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Standardize features with training-split statistics.
    #[arg(long)]
    pub normalize: Option<bool>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Dataset CSV; without it the sweep options generate one.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Prediction grid CSV to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiffKind {
    /// Classification when every value is 1, 2 or 4.
    Auto,
    Classification,
    Regression,
}
value_enum_from_str!(DiffKind);

#[derive(Args, Debug)]
pub struct DiffArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid or dataset holding the reference values.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub truth_column: Option<String>,
    /// Grid or dataset holding the compared values.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub pred_column: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<DiffKind>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta_pair: Option<f64>,
    /// Vertices per branch.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV with `eta` and `u_over_t` columns.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<String>,
    /// Lower end of the color scale; defaults to the data minimum.
    #[arg(long)]
    pub vmin: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
    /// Pixels per grid cell.
    #[arg(long)]
    pub cell_px: Option<usize>,
    /// Overlay the analytic boundaries for this delta/t.
    #[arg(long)]
    pub overlay_delta: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing required option --{}", name.replace('_', "-")))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Diff(a) => cmd_diff(&a),
        Command::Boundaries(a) => cmd_boundaries(&a),
        Command::Heatmap(a) => cmd_heatmap(&a),
    }
}

fn spec_manifest(command: &str, spec: &SweepSpec, text: &str) -> Manifest {
    let mut m = Manifest::new(command, text);
    m.set("seed", spec.seed)
        .set("length", spec.length)
        .set("delta_over_t", spec.delta_over_t)
        .set("n_points", spec.len());
    m
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let spec = a.sweep.resolve(&cfg)?;
    cfg.finish()?;
    let records = dataset::generate(&spec)?;
    dataset::write_csv(&records, &output)
        .with_context(|| format!("writing {}", output.display()))?;
    let mut m = spec_manifest("generate", &spec, &format!("{spec:?}"));
    m.set("n_invalid", records.iter().filter(|r| !r.valid).count());
    m.write_for(&output)
}

/// Valid rows of a dataset as model inputs and labels.
pub struct LabeledData {
    pub x: Array2<f64>,
    pub targets: Targets,
}

pub fn load_labeled(path: &Path, task: Task, features: FeatureSet) -> Result<LabeledData> {
    let t = Table::read(path)?;
    let label = t.column(task.label_column())?;
    let cols: Vec<usize> = features
        .columns()
        .iter()
        .map(|c| t.column(c))
        .collect::<Result<_>>()?;
    let valid = if t.has("valid") {
        Some(t.column("valid")?)
    } else {
        None
    };
    let keep: Vec<usize> = (0..t.rows.len())
        .filter(|&r| valid.is_none_or(|v| &t.rows[r][v] == "1"))
        .collect();
    if keep.is_empty() {
        bail!("{} has no valid rows", path.display());
    }
    let mut x = Array2::zeros((keep.len(), cols.len()));
    for (i, &r) in keep.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            x[(i, j)] = crate::table::parse_real(&t.rows[r][c]).with_context(|| t.at(r, c))?;
        }
    }
    let labels: Vec<f64> = keep
        .iter()
        .map(|&r| crate::table::parse_real(&t.rows[r][label]).with_context(|| t.at(r, label)))
        .collect::<Result<_>>()?;
    let targets = match task {
        Task::ChiClass => Targets::Classes(
            labels
                .iter()
                .zip(&keep)
                .map(|(&v, &r)| {
                    CLASS_VALUES
                        .iter()
                        .position(|&c| c as f64 == v)
                        .ok_or_else(|| {
                            anyhow!("{}: {v} is not a class in {{1, 2, 4}}", t.at(r, label))
                        })
                })
                .collect::<Result<_>>()?,
        ),
        _ => Targets::Regression(labels),
    };
    Ok(LabeledData { x, targets })
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let data_path: PathBuf = required(cfg.pick_opt(a.dataset.clone(), "dataset")?, "dataset")?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let curve_path: Option<PathBuf> = cfg.pick_opt(a.curve.clone(), "curve")?;
    let task = required(cfg.pick_opt(a.task, "task")?, "task")?;
    let features = cfg.pick(a.features, "features", FeatureSet::All)?;
    let d = TrainConfig::default();
    let tc = TrainConfig {
        learning_rate: cfg.pick(a.learning_rate, "learning_rate", d.learning_rate)?,
        batch_size: cfg.pick(a.batch_size, "batch_size", d.batch_size)?,
        max_epochs: cfg.pick(a.max_epochs, "max_epochs", d.max_epochs)?,
        val_fraction: cfg.pick(a.val_fraction, "val_fraction", d.val_fraction)?,
        target_val_loss: cfg.pick(a.target_val_loss, "target_val_loss", d.target_val_loss)?,
        seed: cfg.pick(a.seed, "seed", d.seed)?,
        normalize_features: cfg.pick(a.normalize, "normalize", d.normalize_features)?,
    };
    cfg.finish()?;
    if !(0.0..1.0).contains(&tc.val_fraction) {
        bail!("val_fraction must lie in [0, 1)");
    }

    let data = load_labeled(&data_path, task, features)?;
    let tag = model_tag(task, features);
    let outcome = nhkh_nn::train(
        data.x.view(),
        &data.targets,
        task.arch(data.x.ncols()),
        &tc,
        &tag,
    )?;
    outcome.model.save(&output)?;

    let curve_path = curve_path.unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".curve.csv");
        PathBuf::from(s)
    });
    let mut curve = String::from("epoch,train_loss,val_loss,val_metric\n");
    for e in &outcome.curve {
        curve.push_str(&format!(
            "{},{},{},{}\n",
            e.epoch, e.train_loss, e.val_loss, e.val_metric
        ));
    }
    std::fs::write(&curve_path, curve)?;

    let data_hash = sha256_hex(&std::fs::read(&data_path)?);
    let mut m = Manifest::new("train", &format!("{data_hash} {tag} {tc:?}"));
    let last = outcome.curve.last();
    m.set("seed", tc.seed)
        .set("dataset_sha256", data_hash)
        .set("task", task.name())
        .set("features", features.name())
        .set("n_samples", data.x.nrows())
        .set("epochs", outcome.curve.len())
        .set("learning_rate", tc.learning_rate)
        .set("normalize", tc.normalize_features)
        .set("final_val_loss", last.map_or(f64::NAN, |e| e.val_loss));
    match task {
        Task::ChiClass => m.set("heldout_accuracy", last.map_or(f64::NAN, |e| e.val_metric)),
        _ => m.set("heldout_mae", last.map_or(f64::NAN, |e| e.val_metric)),
    };
    m.write_for(&output)?;
    m.write_for(&curve_path)
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let model_path: PathBuf = required(cfg.pick_opt(a.model.clone(), "model")?, "model")?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let dataset_path: Option<PathBuf> = cfg.pick_opt(a.dataset.clone(), "dataset")?;
    let model = ModelFile::load(&model_path)
        .with_context(|| format!("loading {}", model_path.display()))?;
    let (task, features) = parse_tag(&model.tag)?;

    let (data_path, spec_text, seed) = match dataset_path {
        Some(p) => {
            cfg.finish()?;
            let h =
                sha256_hex(&std::fs::read(&p).with_context(|| format!("reading {}", p.display()))?);
            (p, h, None)
        }
        None => {
            let spec = a.sweep.resolve(&cfg)?;
            cfg.finish()?;
            let mut s = output.as_os_str().to_owned();
            s.push(".dataset.csv");
            let p = PathBuf::from(s);
            let records = dataset::generate(&spec)?;
            dataset::write_csv(&records, &p)?;
            spec_manifest("generate", &spec, &format!("{spec:?}")).write_for(&p)?;
            (p, format!("{spec:?}"), Some(spec.seed))
        }
    };

    let grid = predict_grid(&model, task, features, &data_path)?;
    grid.write(&output)?;

    let mut m = Manifest::new(
        "predict",
        &format!("{} {spec_text}", sha256_hex(&std::fs::read(&model_path)?)),
    );
    if let Some(s) = seed {
        m.set("seed", s);
    }
    m.set("model_seed", model.meta.seed)
        .set("task", task.name())
        .set("features", features.name());
    let valid: Vec<&GridCell> = grid.cells.iter().filter(|c| c.valid).collect();
    m.set("n_cells", grid.cells.len())
        .set("n_valid", valid.len());
    let mean = |f: &dyn Fn(&GridCell) -> f64| {
        if valid.is_empty() {
            f64::NAN
        } else {
            valid.iter().map(|c| f(c)).sum::<f64>() / valid.len() as f64
        }
    };
    match task {
        Task::ChiClass => m.set("accuracy", mean(&|c| f64::from(u8::from(c.diff == 0.0)))),
        _ => m.set("mae", mean(&|c| c.diff.abs())),
    };
    m.write_for(&output)
}

/// One cell per dataset row; invalid rows keep NaN predictions.
pub fn predict_grid(
    model: &ModelFile,
    task: Task,
    features: FeatureSet,
    data_path: &Path,
) -> Result<PhaseGrid> {
    let t = Table::read(data_path)?;
    let (ce, cu) = (t.column("eta")?, t.column("u_over_t")?);
    let label = t.column(task.label_column())?;
    let cols: Vec<usize> = features
        .columns()
        .iter()
        .map(|c| t.column(c))
        .collect::<Result<_>>()?;
    if cols.len() != model.input_dim() {
        bail!(
            "model expects {} features but the {} set has {}",
            model.input_dim(),
            features.name(),
            cols.len()
        );
    }
    let valid_col = if t.has("valid") {
        Some(t.column("valid")?)
    } else {
        None
    };
    let etas = t.reals(ce)?;
    let us = t.reals(cu)?;
    let truth = t.reals(label)?;
    let usable: Vec<usize> = (0..t.rows.len())
        .filter(|&r| valid_col.is_none_or(|v| &t.rows[r][v] == "1") && truth[r].is_finite())
        .collect();
    let mut x = Array2::zeros((usable.len(), cols.len()));
    for (i, &r) in usable.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            x[(i, j)] = crate::table::parse_real(&t.rows[r][c]).with_context(|| t.at(r, c))?;
        }
    }
    let preds: Vec<f64> = if usable.is_empty() {
        Vec::new()
    } else {
        match model.predict(x.view())? {
            Predictions::Regression(v) => v,
            Predictions::Classification { classes, .. } => {
                classes.into_iter().map(f64::from).collect()
            }
        }
    };
    let mut cells: Vec<GridCell> = (0..t.rows.len())
        .map(|r| GridCell {
            eta: etas[r],
            u_over_t: us[r],
            truth: truth[r],
            pred: f64::NAN,
            diff: f64::NAN,
            valid: false,
        })
        .collect();
    for (&r, p) in usable.iter().zip(preds) {
        let c = &mut cells[r];
        c.pred = p;
        c.diff = match task {
            Task::ChiClass => f64::from(u8::from(c.truth != p)),
            _ => c.truth - p,
        };
        c.valid = true;
    }
    Ok(PhaseGrid { cells })
}

struct Column {
    points: Vec<(f64, f64)>,
    values: Vec<f64>,
    valid: Vec<bool>,
}

fn read_column(path: &Path, name: &str) -> Result<Column> {
    let t = Table::read(path)?;
    let (ce, cu, cv) = (t.column("eta")?, t.column("u_over_t")?, t.column(name)?);
    let values = t.reals(cv)?;
    let valid = match t.has("valid") {
        true => {
            let v = t.column("valid")?;
            t.rows.iter().map(|r| &r[v] == "1").collect()
        }
        false => vec![true; t.rows.len()],
    };
    let points = t.reals(ce)?.into_iter().zip(t.reals(cu)?).collect();
    Ok(Column {
        points,
        values,
        valid,
    })
}

pub fn cmd_diff(a: &DiffArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let truth_path: PathBuf = required(cfg.pick_opt(a.truth.clone(), "truth")?, "truth")?;
    let pred_path: PathBuf = required(cfg.pick_opt(a.pred.clone(), "pred")?, "pred")?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let truth_col = cfg.pick(a.truth_column.clone(), "truth_column", "true".to_string())?;
    let pred_col = cfg.pick(a.pred_column.clone(), "pred_column", "pred".to_string())?;
    let kind = cfg.pick(a.kind, "kind", DiffKind::Auto)?;
    cfg.finish()?;

    let ta = read_column(&truth_path, &truth_col)?;
    let pa = read_column(&pred_path, &pred_col)?;
    let (ax_t, ax_p) = (axes_of(&ta.points)?, axes_of(&pa.points)?);
    if ax_t.etas != ax_p.etas || ax_t.us != ax_p.us {
        bail!(
            "axis mismatch between {} and {}",
            truth_path.display(),
            pred_path.display()
        );
    }
    // position of each reference cell in the compared grid
    let mut slot = vec![0; pa.points.len()];
    for (k, &(r, c)) in ax_p.index.iter().enumerate() {
        slot[r * ax_p.us.len() + c] = k;
    }
    let both = |k: usize, j: usize| {
        ta.valid[k] && pa.valid[j] && ta.values[k].is_finite() && pa.values[j].is_finite()
    };
    let classification = match kind {
        DiffKind::Classification => true,
        DiffKind::Regression => false,
        DiffKind::Auto => {
            let is_class = |v: f64| CLASS_VALUES.iter().any(|&c| c as f64 == v);
            ax_t.index.iter().enumerate().all(|(k, &(r, c))| {
                let j = slot[r * ax_t.us.len() + c];
                !both(k, j) || (is_class(ta.values[k]) && is_class(pa.values[j]))
            })
        }
    };
    let cells = ax_t
        .index
        .iter()
        .enumerate()
        .map(|(k, &(r, c))| {
            let j = slot[r * ax_t.us.len() + c];
            let valid = both(k, j);
            let (t, p) = (ta.values[k], pa.values[j]);
            GridCell {
                eta: ta.points[k].0,
                u_over_t: ta.points[k].1,
                truth: t,
                pred: p,
                diff: match (valid, classification) {
                    (false, _) => f64::NAN,
                    (true, true) => f64::from(u8::from(t != p)),
                    (true, false) => t - p,
                },
                valid,
            }
        })
        .collect();
    let grid = PhaseGrid { cells };
    grid.write(&output)?;
    let h = |p: &Path| -> Result<String> { Ok(sha256_hex(&std::fs::read(p)?)) };
    let mut m = Manifest::new(
        "diff",
        &format!(
            "{} {truth_col} {} {pred_col} {classification}",
            h(&truth_path)?,
            h(&pred_path)?
        ),
    );
    m.set(
        "kind",
        if classification {
            "classification"
        } else {
            "regression"
        },
    )
    .set("n_cells", grid.cells.len())
    .set(
        "n_nonzero",
        grid.cells
            .iter()
            .filter(|c| c.valid && c.diff != 0.0)
            .count(),
    );
    m.write_for(&output)
}

pub fn cmd_boundaries(a: &BoundaryArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let eta = (
        cfg.pick(a.eta_min, "eta_min", -dataset::ETA_LIMIT)?,
        cfg.pick(a.eta_max, "eta_max", dataset::ETA_LIMIT)?,
    );
    let delta = cfg.pick(a.delta, "delta", 0.0)?;
    let delta_pair = cfg.pick(a.delta_pair, "delta_pair", 1.0)?;
    let resolution = cfg.pick(a.resolution, "resolution", 200usize)?;
    cfg.finish()?;
    if delta_pair != 1.0 {
        return Err(BoundaryError::NotSolvable { delta_pair, t: 1.0 }.into());
    }
    if resolution < 2 {
        bail!("resolution must be at least 2");
    }
    let lines = boundaries::boundary_polylines(eta, delta, resolution)?;
    let mut buf = Vec::new();
    boundaries::write_polylines_csv(&lines, &mut buf)?;
    std::fs::write(&output, buf)?;
    let mut m = Manifest::new("boundaries", &format!("{eta:?} {delta} {resolution}"));
    m.set("delta_over_t", delta).set("n_branches", lines.len());
    m.write_for(&output)
}

pub fn cmd_heatmap(a: &HeatmapArgs) -> Result<()> {
    let cfg = Config::load(a.config.as_deref())?;
    let grid_path: PathBuf = required(cfg.pick_opt(a.grid.clone(), "grid")?, "grid")?;
    let output: PathBuf = required(cfg.pick_opt(a.output.clone(), "output")?, "output")?;
    let column = cfg.pick(a.column.clone(), "column", "pred".to_string())?;
    let vmin = cfg.pick_opt(a.vmin, "vmin")?;
    let vmax = cfg.pick_opt(a.vmax, "vmax")?;
    let cell_px = cfg.pick(a.cell_px, "cell_px", 8usize)?;
    let overlay_delta = cfg.pick_opt(a.overlay_delta, "overlay_delta")?;
    cfg.finish()?;
    if cell_px == 0 {
        bail!("cell_px must be positive");
    }

    let col = read_column(&grid_path, &column)?;
    if col.points.is_empty() {
        bail!("{} has no rows", grid_path.display());
    }
    let axes = axes_of(&col.points)?;
    let finite = || {
        col.values
            .iter()
            .zip(&col.valid)
            .filter(|(v, &ok)| ok && v.is_finite())
            .map(|(v, _)| *v)
    };
    let vmin = vmin.unwrap_or_else(|| finite().fold(f64::INFINITY, f64::min));
    let vmax = vmax.unwrap_or_else(|| finite().fold(f64::NEG_INFINITY, f64::max));
    let mut img = heatmap::render(&axes, &col.values, &col.valid, vmin, vmax, cell_px);
    if let Some(delta) = overlay_delta {
        let eta = (axes.etas[0], axes.etas[axes.etas.len() - 1]);
        let lines = boundaries::boundary_polylines(eta, delta, (4 * img.height).max(2))?;
        heatmap::overlay(&mut img, &axes, &lines, cell_px);
    }
    std::fs::write(&output, img.to_ppm())
        .with_context(|| format!("writing {}", output.display()))?;
    let mut m = Manifest::new(
        "heatmap",
        &format!(
            "{} {column} {vmin} {vmax} {cell_px} {overlay_delta:?}",
            sha256_hex(&std::fs::read(&grid_path)?)
        ),
    );
    m.set("column", &column).set("vmin", vmin).set("vmax", vmax);
    if let Some(d) = overlay_delta {
        m.set("overlay_delta", d);
    }
    m.write_for(&output)
}
