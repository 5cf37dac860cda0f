//! The `euaf` command line: argument parsing, dispatch and run manifests.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::activation::ActivationKind;
use crate::approx1d::{self, Approx1DError, Approx1DOptions, ErrorSplit, Target1D};
use crate::approxnd::{self, ApproxNdError, NdOptions};
use crate::autodiff::{self, AutodiffError, TrainConfig, TrainTarget};
use crate::builtins;
use crate::classify::{self, ClassifyError, LabeledRegions};
use crate::gadgets;
use crate::network::{Domain, Network};
use crate::pointfit::{self, FitTargets, PointFitError};
use crate::sampling::domain_points;
use crate::uaf_variants::{self, UafError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub version: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub error: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Construction(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Construction(_) => EXIT_CONSTRUCTION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Validation(m) | Self::Construction(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

impl From<Approx1DError> for CliError {
    fn from(e: Approx1DError) -> Self {
        match e {
            Approx1DError::Domain(_) | Approx1DError::Parameter(_) => invalid(e),
            other => Self::Construction(other.to_string()),
        }
    }
}

impl From<ApproxNdError> for CliError {
    fn from(e: ApproxNdError) -> Self {
        match e {
            ApproxNdError::Shape(_) | ApproxNdError::Parameter(_) => invalid(e),
            other => Self::Construction(other.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Validation(_) | ClassifyError::Unsupported(_) => invalid(e),
            other => Self::Construction(other.to_string()),
        }
    }
}

impl From<UafError> for CliError {
    fn from(e: UafError) -> Self {
        match e {
            UafError::Order(_) | UafError::Parameter(_) => invalid(e),
            other => Self::Construction(other.to_string()),
        }
    }
}

impl From<AutodiffError> for CliError {
    fn from(e: AutodiffError) -> Self {
        invalid(e)
    }
}

impl From<PointFitError> for CliError {
    fn from(e: PointFitError) -> Self {
        invalid(e)
    }
}

impl From<gadgets::GadgetError> for CliError {
    fn from(e: gadgets::GadgetError) -> Self {
        invalid(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "euaf", version, about = "Fixed-size networks with the elementary universal activation")]
struct Cli {
    /// Where to write the run manifest (default: next to the first output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an exact gadget network and optionally check it on a grid.
    Gadget(GadgetArgs),
    /// Solve a point-fitting problem; prints the FitResult as JSON.
    Pointfit(PointfitArgs),
    /// Width-36 depth-5 approximator of a 1-D function.
    Fit1d(Fit1dArgs),
    /// Assembled approximator of a built-in d-variate target.
    Fitnd(FitndArgs),
    /// Exact classifier for labelled interval regions.
    Classify(ClassifyArgs),
    /// Evaluate the smooth or sigmoidal activation, or approximate σ by a σ̃ network.
    Uaf(UafArgs),
    /// Seeded SGD training demo; emits a CSV loss trace.
    TrainDemo(TrainArgs),
    /// Re-verify a serialized network against a target.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Gadget(_) => "gadget",
            Self::Pointfit(_) => "pointfit",
            Self::Fit1d(_) => "fit1d",
            Self::Fitnd(_) => "fitnd",
            Self::Classify(_) => "classify",
            Self::Uaf(_) => "uaf",
            Self::TrainDemo(_) => "train-demo",
            Self::Verify(_) => "verify",
        }
    }

    fn report(&self) -> Option<&Path> {
        match self {
            Self::Gadget(a) => a.report.as_deref(),
            Self::Pointfit(_) => None,
            Self::Fit1d(a) => a.report.as_deref(),
            Self::Fitnd(a) => a.report.as_deref(),
            Self::Classify(a) => a.report.as_deref(),
            Self::Uaf(a) => a.report.as_deref(),
            Self::TrainDemo(a) => a.report.as_deref(),
            Self::Verify(a) => a.report.as_deref(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum GadgetKind {
    Square,
    Product,
    Step,
    Partition,
    Snap,
    Widen,
}

#[derive(Args, Debug)]
struct GadgetArgs {
    #[arg(long, value_enum)]
    kind: GadgetKind,
    /// Range bound M for product, snap and widen.
    #[arg(long = "M", visible_alias = "m", default_value_t = 1.0)]
    m: f64,
    /// K for step and partition.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Component index for partition.
    #[arg(long, default_value_t = 1)]
    i: usize,
    /// Layer count for widen.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Compare with the reference function on 10⁴ points.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PointfitArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    targets: Vec<f64>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    alpha: f64,
    /// Offsets r_k (default 1, 2, …, K).
    #[arg(long, value_delimiter = ',')]
    offsets: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SplitArg {
    Tight,
    Fixed,
}

impl From<SplitArg> for ErrorSplit {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Tight => ErrorSplit::Tight,
            SplitArg::Fixed => ErrorSplit::Fixed,
        }
    }
}

#[derive(Args, Debug)]
struct Fit1dArgs {
    /// Built-in name (x, x2, sin, sin3, sin8, osc) or a two-column CSV sample file.
    #[arg(long)]
    function: String,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = SplitArg::Tight)]
    split: SplitArg,
    /// Fix K instead of choosing it.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitndArgs {
    #[arg(long)]
    d: usize,
    /// sum or product.
    #[arg(long)]
    builtin_target: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = SplitArg::Tight)]
    split: SplitArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    regions: PathBuf,
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Variant {
    Sigmoidal,
    Smooth,
}

#[derive(Args, Debug)]
struct UafArgs {
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Order of the smooth variant.
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Points to evaluate at.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eval: Vec<f64>,
    #[arg(long)]
    approximate_sigma: bool,
    #[arg(long = "M", visible_alias = "m", default_value_t = 2.0)]
    m: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// sin8, osc or osc2d.
    #[arg(long, default_value = "osc")]
    target: String,
    #[arg(long, default_value = "euaf")]
    activation: ActivationKind,
    #[arg(long, default_value_t = 40)]
    width: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Loss trace CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    /// 1-D built-in or sample file, or sum/product for d ≥ 2.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Override the network's domain as the cube [a,b]^d.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Per-point residuals.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Default)]
struct Ctx {
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, contents).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Construction(e.to_string()))?;
        self.write(path, &text)
    }

    fn write_net(&mut self, path: &Path, net: &Network) -> Result<(), CliError> {
        let text = net.to_json_pretty().map_err(|e| CliError::Construction(e.to_string()))?;
        self.write(path, &text)
    }

    /// Writes a failure report when a report path was requested, then returns the error.
    fn fail(&mut self, report: Option<&Path>, inputs: Value, err: CliError) -> CliError {
        if let Some(p) = report {
            let doc = json!({ "status": "failed", "error": err.message(), "inputs": inputs });
            let _ = self.write_json(p, &doc);
        }
        err
    }
}

fn print_json(value: &impl Serialize) {
    emit(&format!("{}\n", serde_json::to_string_pretty(value).expect("serializable")));
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

/// The report without the embedded network, plus the inputs.
fn report_doc(report: &impl Serialize, inputs: Value) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable");
    if let Value::Object(map) = &mut v {
        map.remove("network");
        map.insert("status".into(), json!("ok"));
        map.insert("inputs".into(), inputs);
    }
    v
}

fn configure_threads() {
    if let Some(n) = std::env::var("EUAF_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn manifest_path(explicit: Option<&Path>, subcommand: &str, outputs: &[PathBuf]) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match outputs.first() {
        Some(first) => {
            let stem = first.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "euaf".into());
            first.with_file_name(format!("{stem}.manifest.json"))
        }
        None => PathBuf::from(format!("euaf-{subcommand}.manifest.json")),
    }
}

/// Parse `argv` (program name first), run the subcommand, write the manifest and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
        }
    };
    configure_threads();
    let start = Instant::now();
    let mut ctx = Ctx::default();
    let name = cli.command.name();
    let result = match &cli.command {
        Command::Gadget(a) => gadget(a, &mut ctx),
        Command::Pointfit(a) => pointfit_cmd(a, &mut ctx),
        Command::Fit1d(a) => fit1d(a, &mut ctx),
        Command::Fitnd(a) => fitnd(a, &mut ctx),
        Command::Classify(a) => classify_cmd(a, &mut ctx),
        Command::Uaf(a) => uaf(a, &mut ctx),
        Command::TrainDemo(a) => train_demo(a, &mut ctx),
        Command::Verify(a) => verify(a, &mut ctx),
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let (code, error) = match &result {
        Ok(()) => (EXIT_OK, None),
        Err(e) => {
            eprintln!("error: {}", e.message());
            // Failures before the command reached its own report still leave one behind.
            if let Some(p) = cli.command.report().filter(|p| !ctx.outputs.iter().any(|o| o == p)) {
                let _ = ctx.write_json(p, &json!({ "status": "failed", "error": e.message(), "inputs": { "args": &args } }));
            }
            (e.code(), Some(e.message().to_string()))
        }
    };
    let manifest = RunManifest {
        subcommand: name.into(),
        args,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: ctx.outputs.iter().map(|p| p.display().to_string()).collect(),
        exit_code: code,
        error,
    };
    let path = manifest_path(cli.manifest.as_deref(), name, &ctx.outputs);
    let text = serde_json::to_string_pretty(&manifest).expect("serializable");
    if let Err(e) = fs::write(&path, text) {
        eprintln!("error: cannot write manifest {}: {e}", path.display());
    }
    code
}

fn gadget(args: &GadgetArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let net = match args.kind {
        GadgetKind::Square => gadgets::square_net(),
        GadgetKind::Product => gadgets::product_net(args.m)?,
        GadgetKind::Step => gadgets::step_encode_net(args.k)?,
        GadgetKind::Partition => gadgets::partition_component_net(args.k, args.i)?,
        GadgetKind::Snap => gadgets::snap_net(args.m)?,
        GadgetKind::Widen => gadgets::identity_widen_net(args.m, args.depth)?,
    };
    let mut summary = json!({
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "width": net.width(),
        "depth": net.depth(),
        "params": net.count_params(),
        "domain": net.domain(),
    });
    if args.check {
        let (points, reference) = gadget_reference(args, &net);
        let max_error = points
            .iter()
            .map(|p| (net.eval(p).expect("dimension")[0] - reference(p)).abs())
            .fold(0.0f64, f64::max);
        summary["points"] = json!(points.len());
        summary["max_error"] = json!(max_error);
    }
    if let Some(p) = &args.out {
        ctx.write_net(p, &net)?;
    }
    if let Some(p) = &args.report {
        ctx.write_json(p, &summary)?;
    }
    print_json(&summary);
    Ok(())
}

type Reference = Box<dyn Fn(&[f64]) -> f64>;

fn gadget_reference(args: &GadgetArgs, net: &Network) -> (Vec<Vec<f64>>, Reference) {
    let domain = net.domain().cloned().expect("gadgets declare a domain");
    let grid = domain_points(&domain, 10_000);
    match args.kind {
        GadgetKind::Square => (grid, Box::new(|x| x[0] * x[0])),
        GadgetKind::Product => {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let m = args.m;
            let pts = (0..10_000).map(|_| vec![rng.gen_range(-m..=m), rng.gen_range(-m..=m)]).collect();
            (pts, Box::new(|x| x[0] * x[1]))
        }
        GadgetKind::Step => {
            let k = args.k as f64;
            (grid, Box::new(move |x| crate::activation::step(2.0 * k * x[0]) / 2.0 + 1.0))
        }
        GadgetKind::Partition => {
            let (k, i) = (args.k as f64, args.i as f64);
            (grid, Box::new(move |x| crate::activation::bump(2.0 * k * x[0] + i / 2.0)))
        }
        GadgetKind::Snap => (grid, Box::new(|x| ActivationKind::Snap.apply(x[0]))),
        GadgetKind::Widen => (grid, Box::new(|x| x[0])),
    }
}

fn pointfit_cmd(args: &PointfitArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let k = args.targets.len();
    let offsets = args.offsets.clone().unwrap_or_else(|| (1..=k).map(|r| r as f64).collect());
    let targets = FitTargets::with_params(args.targets.clone(), args.alpha, offsets)?;
    let result = pointfit::fit(&targets, args.epsilon, args.budget)?;
    if let Some(p) = &args.out {
        ctx.write_json(p, &result)?;
    }
    print_json(&result);
    if result.satisfied {
        Ok(())
    } else {
        Err(CliError::Construction(format!(
            "budget of {} windows exhausted; best max error {}",
            args.budget, result.max_error
        )))
    }
}

fn fit1d(args: &Fit1dArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let inputs = json!({
        "function": args.function, "a": args.a, "b": args.b, "epsilon": args.epsilon,
        "budget": args.budget, "split": format!("{:?}", args.split).to_lowercase(), "k": args.k,
    });
    let (f, span) = builtins::resolve_1d(&args.function).map_err(invalid)?;
    let (a, b) = match span {
        Some((lo, hi)) => (args.a.unwrap_or(lo), args.b.unwrap_or(hi)),
        None => (args.a.unwrap_or(0.0), args.b.unwrap_or(1.0)),
    };
    let built = Target1D::from_arc(f, a, b).map_err(CliError::from).and_then(|target| {
        let opts = Approx1DOptions { split: args.split.into(), k: args.k, budget: args.budget, ..Approx1DOptions::default() };
        approx1d::build_interval_approx(&target, args.epsilon, &opts).map_err(CliError::from)
    });
    let report = match built {
        Ok(r) => r,
        Err(e) => return Err(ctx.fail(args.report.as_deref(), inputs, e)),
    };
    if let Some(p) = &args.out {
        ctx.write_net(p, &report.network)?;
    }
    let doc = report_doc(&report, inputs);
    if let Some(p) = &args.report {
        ctx.write_json(p, &doc)?;
    }
    print_json(&json!({
        "k": report.k, "width": report.width, "depth": report.depth,
        "grid_sup_error": report.grid_sup_error, "guarantee_region": report.guarantee_region,
        "pointfit_evaluations": report.pointfit_evaluations,
    }));
    Ok(())
}

fn fitnd(args: &FitndArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let inputs = json!({
        "d": args.d, "builtin_target": args.builtin_target, "epsilon": args.epsilon,
        "a": args.a, "b": args.b, "budget": args.budget,
    });
    let (f, kst) = approxnd::builtin(&args.builtin_target, args.d, args.a, args.b)?;
    let opts = NdOptions { split: args.split.into(), budget: args.budget, care: None };
    let (net, report) = match approxnd::assemble(&f, args.a, args.b, &kst, args.epsilon, &opts) {
        Ok(r) => r,
        Err(e) => return Err(ctx.fail(args.report.as_deref(), inputs, e.into())),
    };
    if let Some(p) = &args.out {
        ctx.write_net(p, &net)?;
    }
    let doc = report_doc(&report, inputs);
    if let Some(p) = &args.report {
        ctx.write_json(p, &doc)?;
    }
    print_json(&json!({
        "d": report.d, "width": report.width, "depth": report.depth, "params": report.params,
        "nonzero_bound": report.nonzero_bound, "grid_sup_error": report.grid_sup_error,
    }));
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn classify_cmd(args: &ClassifyArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let text = read_to_string(&args.regions)?;
    let regions: LabeledRegions =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", args.regions.display())))?;
    let inputs = json!({ "regions": args.regions.display().to_string(), "budget": args.budget });
    let report = match classify::build_classifier(&regions, args.budget) {
        Ok(r) => r,
        Err(e) => return Err(ctx.fail(args.report.as_deref(), inputs, e.into())),
    };
    if let Some(p) = &args.out {
        ctx.write_net(p, &report.network)?;
    }
    let doc = report_doc(&report, inputs);
    if let Some(p) = &args.report {
        ctx.write_json(p, &doc)?;
    }
    print_json(&json!({
        "n1": report.n1, "n2": report.n2, "width": report.width, "depth": report.depth,
        "params": report.params, "nonzero_bound": report.nonzero_bound,
        "max_deviation_on_samples": report.max_deviation_on_samples,
    }));
    Ok(())
}

fn uaf(args: &UafArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    if args.approximate_sigma {
        let inputs = json!({ "M": args.m, "epsilon": args.epsilon });
        let approx = match uaf_variants::approximate_sigma_by_sigmoidal(args.m, args.epsilon) {
            Ok(a) => a,
            Err(e) => return Err(ctx.fail(args.report.as_deref(), inputs, e.into())),
        };
        match &args.out {
            Some(p) => ctx.write_net(p, &approx.network)?,
            None => emit(&format!("{}\n", approx.network.to_json_pretty().map_err(|e| CliError::Construction(e.to_string()))?)),
        }
        if let Some(p) = &args.report {
            let mut doc = report_doc(&approx, inputs);
            doc["width"] = json!(approx.network.width());
            doc["depth"] = json!(approx.network.depth());
            ctx.write_json(p, &doc)?;
        }
        return Ok(());
    }
    let variant = args
        .variant
        .ok_or_else(|| invalid("either --variant with --eval or --approximate-sigma is required"))?;
    if args.eval.is_empty() {
        return Err(invalid("--eval needs at least one point"));
    }
    let values: Vec<f64> = match variant {
        Variant::Sigmoidal => args.eval.iter().map(|&x| uaf_variants::eval_sigmoidal(x)).collect(),
        Variant::Smooth => args.eval.iter().map(|&x| uaf_variants::eval_smooth(args.s, x)).collect::<Result<_, _>>()?,
    };
    let doc = json!({
        "variant": format!("{variant:?}").to_lowercase(),
        "s": matches!(variant, Variant::Smooth).then_some(args.s),
        "x": args.eval,
        "value": values,
    });
    if let Some(p) = &args.report {
        ctx.write_json(p, &doc)?;
    }
    print_json(&doc);
    Ok(())
}

fn train_demo(args: &TrainArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let target = TrainTarget::builtin(&args.target)?;
    let mut cfg = TrainConfig { steps: args.steps, seed: args.seed, ..TrainConfig::default() };
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    if let Some(b) = args.batch {
        cfg.batch_size = b;
    }
    let report = autodiff::train_toy(&target, args.width, args.depth, args.activation, &cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.trace {
        w.serialize(row).map_err(|e| CliError::Construction(e.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Construction(e.to_string()))?).expect("utf8");
    match &args.out {
        Some(p) => ctx.write(p, &text)?,
        None => emit(&text),
    }
    if let Some(p) = &args.report {
        let mut doc = report_doc(&report, json!({ "config": cfg }));
        if let Value::Object(map) = &mut doc {
            map.remove("trace");
        }
        ctx.write_json(p, &doc)?;
    }
    if report.diverged {
        return Err(CliError::Construction("training diverged".into()));
    }
    eprintln!(
        "train mse {:.6} -> {:.6}, test mse {:.6}",
        report.initial_train_mse, report.final_train_mse, report.final_test.mse
    );
    Ok(())
}

fn verify(args: &VerifyArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let text = read_to_string(&args.net)?;
    let net = Network::from_json(&text).map_err(|e| invalid(format!("{}: {e}", args.net.display())))?;
    if net.output_dim() != 1 {
        return Err(invalid("verify needs a scalar-output network"));
    }
    if args.grid < 2 {
        return Err(invalid("--grid must be at least 2"));
    }
    let d = net.input_dim();
    let target: Box<dyn Fn(&[f64]) -> f64 + Sync> = if d == 1 {
        let (f, _) = builtins::resolve_1d(&args.target).map_err(invalid)?;
        Box::new(move |x| f(x[0]))
    } else {
        let (f, _) = approxnd::builtin(&args.target, d, 0.0, 1.0)?;
        Box::new(move |x| f(x))
    };
    let domain = match (args.a, args.b, net.domain()) {
        (Some(a), Some(b), _) if a < b => Domain::cube(a, b, d),
        (Some(_), Some(_), _) => return Err(invalid("need a < b")),
        (None, None, Some(dom)) => dom.clone(),
        (None, None, None) => return Err(invalid("the network has no domain; pass --a and --b")),
        _ => return Err(invalid("pass both --a and --b")),
    };
    let points = domain_points(&domain, args.grid);
    let values = net.eval_points(&points);
    let residuals: Vec<f64> = points.iter().zip(&values).map(|(p, v)| v - target(p)).collect();
    let sup = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mean = residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64;
    if let Some(p) = &args.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..d).map(|j| if d == 1 { "x".into() } else { format!("x{}", j + 1) }).collect();
        header.extend(["network".into(), "target".into(), "residual".into()]);
        w.write_record(&header).expect("in-memory write");
        for ((pt, v), r) in points.iter().zip(&values).zip(&residuals) {
            let mut row: Vec<String> = pt.iter().map(|x| format!("{x:e}")).collect();
            row.extend([format!("{v:e}"), format!("{:e}", v - r), format!("{r:e}")]);
            w.write_record(&row).expect("in-memory write");
        }
        let text = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
        ctx.write(p, &text)?;
    }
    let doc = json!({
        "net": args.net.display().to_string(),
        "target": args.target,
        "domain": domain,
        "points": points.len(),
        "sup_error": sup,
        "mean_error": mean,
    });
    if let Some(p) = &args.report {
        ctx.write_json(p, &doc)?;
    }
    print_json(&doc);
    Ok(())
}
