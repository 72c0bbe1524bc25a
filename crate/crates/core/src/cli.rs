//! The `mbfr` command line.
//!
//! Every command reads a numeric CSV (or generates data), writes its result
//! as text, or as JSON with `--json`, to stdout and optional files under
//! `--out`. Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure. Failures print one `mbfr: error[<kind>]: <message>` line to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;
use serde::Serialize;

use crate::dataset::{Dataset, LoadOptions};
use crate::error::{Error, Result};
use crate::eval::{
    elm_sfs, evaluate_subset, full_hidden_grid, EvalReport, Protocol, EVAL_CSV_HEADER,
};
use crate::filter::{classify_rejected, dimensional_relevance, mbfr_select, RedundancyScore};
use crate::morisita::{choose_scales, mindid, ScaleChoice, ScaleSearch, ScaleSet};
use crate::report::{emit_profile_svg, emit_scale_diagnostic_svg};
use crate::simgen::{
    gen_butterfly, gen_friedman, monte_carlo, ButterflyConfig, ButterflyVariant, Experiment,
    FriedmanConfig, Generator, Sigmoid,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mbfr",
    version,
    about = "Morisita-based intrinsic dimension and feature selection"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress text output and warnings.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct Input {
    /// Numeric CSV with a header row.
    #[arg(long, short)]
    input: PathBuf,
    /// Drop rows with empty or non-finite cells instead of failing.
    #[arg(long)]
    drop_incomplete: bool,
    /// Use the values as they are; they must already lie in [0, 1].
    #[arg(long)]
    no_rescale: bool,
}

#[derive(Debug, Args)]
struct Target {
    /// Target column (default: the last column).
    #[arg(long, short)]
    target: Option<String>,
}

#[derive(Debug, Args)]
struct Scales {
    /// Scales as a range `5..20` or a list `1,2,4,8` (default: chosen from the data).
    #[arg(long, short)]
    scales: Option<ScaleSet>,
    /// When picking scales, prefer the steepest of equally long linear stretches.
    #[arg(long)]
    prefer_steepest: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Morisita intrinsic dimension of a set of columns.
    EstimateId {
        #[command(flatten)]
        input: Input,
        /// Comma-separated columns (default: all).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Index order.
        #[arg(long, short, default_value_t = 2)]
        m: u32,
        #[command(flatten)]
        scales: Scales,
    },
    /// Pick a linear range of scales from the log-log plot.
    ChooseScales {
        #[command(flatten)]
        input: Input,
        /// Comma-separated columns (default: all).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(long)]
        prefer_steepest: bool,
        #[arg(long, default_value_t = 130)]
        probe_max: u32,
        /// Directory for the diagnostic SVG.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Forward feature selection; writes trace.json, trace.csv and profile.svg.
    Select {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        scales: Scales,
        /// Forward steps (default: number of features).
        #[arg(long = "steps", short = 'C', alias = "C")]
        steps: Option<usize>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Coefficient of dimensional relevance of a feature subset.
    Dr {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        target: Target,
        /// Comma-separated features (default: all).
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        #[command(flatten)]
        scales: Scales,
    },
    /// Redundant versus irrelevant scores for rejected features.
    Classify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        target: Target,
        /// Comma-separated selected features.
        #[arg(long, value_delimiter = ',', required = true)]
        selected: Vec<String>,
        /// Comma-separated rejected features (default: all others).
        #[arg(long, value_delimiter = ',')]
        rejected: Vec<String>,
        #[command(flatten)]
        scales: Scales,
    },
    /// Write a simulated dataset as CSV.
    Generate {
        #[command(flatten)]
        sim: Simulation,
        /// Output file (default: stdout).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Repeat generation and selection over consecutive seeds.
    Montecarlo {
        #[command(flatten)]
        sim: Simulation,
        #[arg(long, default_value_t = 20)]
        sims: usize,
        /// Scales (default: 5..20 for butterfly, 1..6 for friedman).
        #[arg(long, short)]
        scales: Option<ScaleSet>,
        #[arg(long = "steps", short = 'C', alias = "C")]
        steps: Option<usize>,
        /// Shuffle the target before selection.
        #[arg(long)]
        shuffle_target: bool,
        /// Length of the leading selection to tally.
        #[arg(long, default_value_t = 2)]
        first_k: usize,
        /// Directory for summary.json and runs.csv.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score feature subsets with an extreme learning machine.
    Evaluate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        target: Target,
        /// A comma-separated subset; repeat for several (default: all features).
        #[arg(long)]
        features: Vec<String>,
        /// Also run the wrapper forward search and score its subset.
        #[arg(long)]
        elm_sfs: bool,
        #[arg(long, default_value_t = 20)]
        splits: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        retrains: usize,
        /// Search every hidden size from 1 to 350.
        #[arg(long)]
        full_grid: bool,
        /// Drop hidden sizes above this from the search.
        #[arg(long)]
        max_hidden: Option<usize>,
        /// Leave the hidden biases out.
        #[arg(long)]
        no_bias: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include wall-clock times in the output.
        #[arg(long)]
        timing: bool,
        /// Name in the CSV rows (default: the input file stem).
        #[arg(long)]
        dataset_name: Option<String>,
        /// Directory for evaluation.json and evaluation.csv.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Butterfly,
    Friedman,
}

#[derive(Debug, Args)]
struct Simulation {
    kind: Kind,
    /// Sample size (default: 10000 butterfly, 40000 friedman).
    #[arg(long, short)]
    n: Option<usize>,
    /// Butterfly: noise sd as a fraction of the response sd. Friedman: noise sd
    /// (default: 0 butterfly, 1 friedman).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Butterfly with copied columns in place of the nonlinear ones.
    #[arg(long)]
    linear: bool,
    /// Butterfly with tanh hidden units.
    #[arg(long)]
    tanh: bool,
}

impl Simulation {
    fn generator(&self) -> Generator {
        match self.kind {
            Kind::Butterfly => {
                let mut c = ButterflyConfig::new(
                    self.n.unwrap_or(10_000),
                    self.noise.unwrap_or(0.0),
                    self.seed,
                );
                if self.linear {
                    c.variant = ButterflyVariant::Linear;
                }
                if self.tanh {
                    c.sigmoid = Sigmoid::Tanh;
                }
                Generator::Butterfly(c)
            }
            Kind::Friedman => {
                let d = FriedmanConfig::default();
                Generator::Friedman(FriedmanConfig {
                    n: self.n.unwrap_or(d.n),
                    noise_sd: self.noise.unwrap_or(d.noise_sd),
                    seed: self.seed,
                })
            }
        }
    }
}

struct Ctx {
    json: bool,
    quiet: bool,
}

/// Writes to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

impl Ctx {
    fn say(&self, text: impl AsRef<str>) {
        if !self.json && !self.quiet {
            out(&format!("{}\n", text.as_ref()));
        }
    }

    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<()> {
        if self.json {
            out(&json_bytes(value)?);
        } else if !self.quiet {
            out(&text());
        }
        Ok(())
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                out(&e.to_string());
                return EXIT_OK;
            }
            let msg = e.to_string();
            let line = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("mbfr: error[usage]: {line}");
            return EXIT_USAGE;
        }
    };
    init_logging(cli.global.quiet);
    let ctx = Ctx {
        json: cli.global.json,
        quiet: cli.global.quiet,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!(
                "mbfr: error[usage]: cannot start {} threads: {e}",
                cli.global.threads
            );
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command, &ctx)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let (code, kind) = classify_error(&e);
            eprintln!("mbfr: error[{kind}]: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}

fn classify_error(e: &Error) -> (i32, &'static str) {
    match e {
        Error::InvalidArgument(_) | Error::InvalidScales(_) => (EXIT_USAGE, "usage"),
        e if e.is_data_error() => (EXIT_DATA, "data"),
        _ => (EXIT_NUMERICAL, "numerical"),
    }
}

fn init_logging(quiet: bool) {
    let _ = env_logger::Builder::new()
        .filter_level(LevelFilter::Trace)
        .format(|buf, record| {
            writeln!(
                buf,
                "mbfr: {}: {}",
                record.level().as_str().to_lowercase(),
                record.args()
            )
        })
        .try_init();
    let level = match std::env::var("MBFR_LOG").ok().and_then(|v| v.parse().ok()) {
        Some(l) => l,
        None if quiet => LevelFilter::Error,
        None => LevelFilter::Warn,
    };
    log::set_max_level(level);
}

fn load(input: &Input, target: Option<&str>) -> Result<Dataset> {
    let opts = LoadOptions {
        drop_incomplete: input.drop_incomplete,
    };
    let (d, dropped) = Dataset::load_csv_with(&input.input, target, opts)?;
    if dropped > 0 {
        log::warn!(
            "dropped {dropped} incomplete rows from {}",
            input.input.display()
        );
    }
    Ok(if input.no_rescale {
        d
    } else {
        d.rescale_unit()
    })
}

fn resolve_scales(d: &Dataset, scales: &Scales) -> Result<ScaleSet> {
    if let Some(s) = &scales.scales {
        return Ok(s.clone());
    }
    let search = ScaleSearch {
        prefer_steepest: scales.prefer_steepest,
        ..ScaleSearch::default()
    };
    let choice = choose_scales(&d.columns(), &search)?;
    for w in &choice.warnings {
        log::warn!("{w}");
    }
    log::info!("using scales {}", choice.scales);
    Ok(choice.scales)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn or_all<'a>(given: &'a [String], d: &'a Dataset) -> Vec<&'a str> {
    if given.is_empty() {
        d.feature_names()
    } else {
        given.iter().map(String::as_str).collect()
    }
}

#[derive(Serialize)]
struct ClassifyRow<'a> {
    feature: &'a str,
    #[serde(flatten)]
    score: RedundancyScore,
}

#[derive(Serialize)]
struct SubsetEval<'a> {
    subset: String,
    #[serde(flatten)]
    report: &'a EvalReport,
}

#[derive(Serialize)]
struct Evaluation<'a> {
    dataset: &'a str,
    protocol: &'a Protocol,
    #[serde(skip_serializing_if = "Option::is_none")]
    elm_sfs: Option<Vec<String>>,
    subsets: Vec<SubsetEval<'a>>,
}

fn dispatch(command: Command, ctx: &Ctx) -> Result<()> {
    match command {
        Command::EstimateId {
            input,
            columns,
            m,
            scales,
        } => {
            let d = load(&input, None)?;
            let cols = if columns.is_empty() {
                d.columns()
            } else {
                d.columns_of(&columns)?
            };
            let set = match &scales.scales {
                Some(s) => s.clone(),
                None => {
                    choose_scales(
                        &cols,
                        &ScaleSearch {
                            prefer_steepest: scales.prefer_steepest,
                            ..ScaleSearch::default()
                        },
                    )?
                    .scales
                }
            };
            let est = mindid(&cols, m, &set)?;
            for w in &est.warnings {
                log::warn!("{w}");
            }
            ctx.emit(&est, || {
                format!(
                    "M{} = {:.4} (embedding dimension {}, slope {:.4}, scales {})\n",
                    est.m, est.intrinsic_dim, est.embedding_dim, est.slope, est.scales
                )
            })
        }
        Command::ChooseScales {
            input,
            columns,
            prefer_steepest,
            probe_max,
            out,
        } => {
            let d = load(&input, None)?;
            let cols = if columns.is_empty() {
                d.columns()
            } else {
                d.columns_of(&columns)?
            };
            let search = ScaleSearch {
                probe_max,
                prefer_steepest,
                ..ScaleSearch::default()
            };
            let choice: ScaleChoice = choose_scales(&cols, &search)?;
            for w in &choice.warnings {
                log::warn!("{w}");
            }
            if let Some(dir) = out {
                create_dir(&dir)?;
                emit_scale_diagnostic_svg(&choice, dir.join("scales.svg"))?;
                write_file(&dir.join("scales.json"), json_bytes(&choice)?)?;
            }
            ctx.emit(&choice, || {
                format!(
                    "scales {} (window {}..{}, slope {:.4}, R^2 {:.4}, cap {})\n",
                    choice.scales,
                    choice.window.0,
                    choice.window.1,
                    choice.slope,
                    choice.r_squared,
                    choice.upper_cap
                )
            })
        }
        Command::Select {
            input,
            target,
            scales,
            steps,
            out,
        } => {
            let d = load(&input, target.target.as_deref())?;
            let set = resolve_scales(&d, &scales)?;
            let steps = steps.unwrap_or(d.n_cols() - 1);
            let trace = mbfr_select(&d, &set, steps)?;
            create_dir(&out)?;
            write_file(&out.join("trace.json"), json_bytes(&trace)?)?;
            let mut csv = Vec::new();
            trace
                .write_csv(&mut csv)
                .map_err(|e| Error::io(out.join("trace.csv"), e))?;
            write_file(&out.join("trace.csv"), csv)?;
            emit_profile_svg(&trace, out.join("profile.svg"))?;
            ctx.emit(&trace, || {
                let mut s = format!(
                    "target {} M2 = {:.4}, scales {}\n",
                    trace.target, trace.target_id, trace.scales
                );
                for (i, st) in trace.steps.iter().enumerate() {
                    s += &format!("{:>3}  {:<12} diss {:.4}\n", i + 1, st.feature, st.diss);
                }
                if let Some(k) = trace.knee() {
                    s += &format!("knee after {k} features\n");
                }
                s
            })
        }
        Command::Dr {
            input,
            target,
            features,
            scales,
        } => {
            let d = load(&input, target.target.as_deref())?;
            let set = resolve_scales(&d, &scales)?;
            let names = or_all(&features, &d);
            let report = dimensional_relevance(&d.columns_of(&names)?, d.target(), &set)?;
            ctx.emit(&report, || {
                format!(
                    "DR = {:.4} (clipped {:.4}), diss {:.4}, M2({}) {:.4}\n",
                    report.dr,
                    report.dr_clipped,
                    report.diss,
                    d.target_name(),
                    report.target_id
                )
            })
        }
        Command::Classify {
            input,
            target,
            selected,
            rejected,
            scales,
        } => {
            let d = load(&input, target.target.as_deref())?;
            let set = resolve_scales(&d, &scales)?;
            let rejected: Vec<&str> = if rejected.is_empty() {
                d.feature_names()
                    .into_iter()
                    .filter(|f| !selected.iter().any(|s| s == f))
                    .collect()
            } else {
                rejected.iter().map(String::as_str).collect()
            };
            let rows = rejected
                .iter()
                .map(|r| {
                    Ok(ClassifyRow {
                        feature: r,
                        score: classify_rejected(&d, &selected, r, &set)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ctx.emit(&rows, || {
                rows.iter()
                    .map(|r| {
                        format!(
                            "{:<12} score {:.4} (delta {:.4}, alone {:.4})\n",
                            r.feature, r.score.score, r.score.delta_id, r.score.standalone_id
                        )
                    })
                    .collect()
            })
        }
        Command::Generate { sim, out } => {
            let d = match sim.generator() {
                Generator::Butterfly(c) => gen_butterfly(&c)?,
                Generator::Friedman(c) => gen_friedman(&c)?,
            };
            match out {
                Some(path) => {
                    d.write_csv(&path)?;
                    ctx.say(format!(
                        "wrote {} rows x {} columns to {}",
                        d.n_rows(),
                        d.n_cols(),
                        path.display()
                    ));
                }
                None => {
                    let stdout = std::io::stdout();
                    d.write_csv_to(&mut stdout.lock())
                        .map_err(|e| Error::io("<stdout>", e))?;
                }
            }
            Ok(())
        }
        Command::Montecarlo {
            sim,
            sims,
            scales,
            steps,
            shuffle_target,
            first_k,
            out,
        } => {
            let default_scales = match sim.kind {
                Kind::Butterfly => ScaleSet::range(5, 20)?,
                Kind::Friedman => ScaleSet::range(1, 6)?,
            };
            let mut exp = Experiment::new(sim.generator(), scales.unwrap_or(default_scales));
            exp.steps = steps;
            exp.shuffle_target = shuffle_target;
            exp.first_k = first_k;
            let summary = monte_carlo(&exp, sims, sim.seed)?;
            if let Some(dir) = out {
                create_dir(&dir)?;
                write_file(&dir.join("summary.json"), json_bytes(&summary)?)?;
                let mut csv = Vec::new();
                summary
                    .write_runs_csv(&mut csv)
                    .map_err(|e| Error::io(dir.join("runs.csv"), e))?;
                write_file(&dir.join("runs.csv"), csv)?;
            }
            ctx.emit(&summary, || {
                let mut s = format!(
                    "{} runs: min diss {:.4}, M2(Y) {:.4}, DR after {} {:.4}\n",
                    summary.sims,
                    summary.min_diss.mean,
                    summary.target_id.mean,
                    summary.first_k,
                    summary.dr_first_k.mean
                );
                for c in &summary.first_k_counts {
                    s += &format!("{:>5}  {}\n", c.count, c.features.join(", "));
                }
                s
            })
        }
        Command::Evaluate {
            input,
            target,
            features,
            elm_sfs: run_sfs,
            splits,
            folds,
            retrains,
            full_grid,
            max_hidden,
            no_bias,
            seed,
            timing,
            dataset_name,
            out,
        } => {
            let opts = LoadOptions {
                drop_incomplete: input.drop_incomplete,
            };
            let (d, dropped) =
                Dataset::load_csv_with(&input.input, target.target.as_deref(), opts)?;
            if dropped > 0 {
                log::warn!(
                    "dropped {dropped} incomplete rows from {}",
                    input.input.display()
                );
            }
            let mut protocol = Protocol {
                splits,
                folds,
                retrains,
                seed,
                ..Protocol::default()
            };
            protocol.elm.biases = !no_bias;
            if full_grid {
                protocol.hidden_grid = full_hidden_grid();
            }
            if let Some(cap) = max_hidden {
                protocol.hidden_grid.retain(|&h| h <= cap);
            }
            let mut subsets: Vec<Vec<String>> = features
                .iter()
                .map(|f| {
                    f.split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                })
                .collect();
            let sfs = if run_sfs {
                let r = elm_sfs(&d, &protocol)?;
                subsets.push(r.selected.clone());
                Some(r.selected)
            } else {
                None
            };
            if subsets.is_empty() {
                subsets.push(d.feature_names().into_iter().map(String::from).collect());
            }
            let mut reports = Vec::with_capacity(subsets.len());
            for s in &subsets {
                let mut r = evaluate_subset(&d, s, &protocol)?;
                if !timing {
                    r.runtime_secs = None;
                }
                reports.push(r);
            }
            let name = dataset_name.unwrap_or_else(|| {
                input
                    .input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "data".into())
            });
            let doc = Evaluation {
                dataset: &name,
                protocol: &protocol,
                elm_sfs: sfs,
                subsets: subsets
                    .iter()
                    .zip(&reports)
                    .map(|(s, r)| SubsetEval {
                        subset: s.join("+"),
                        report: r,
                    })
                    .collect(),
            };
            let mut csv = format!("{EVAL_CSV_HEADER}\n").into_bytes();
            for se in &doc.subsets {
                se.report
                    .write_csv_row(&mut csv, &name, &se.subset)
                    .map_err(|e| Error::io("<buffer>", e))?;
            }
            if let Some(dir) = out {
                create_dir(&dir)?;
                write_file(&dir.join("evaluation.json"), json_bytes(&doc)?)?;
                write_file(&dir.join("evaluation.csv"), &csv)?;
            }
            ctx.emit(&doc, || String::from_utf8_lossy(&csv).into_owned())
        }
    }
}
