//! Command-line front end.
//!
//! Settings come from flags, optionally layered over a TOML file with the
//! same keys (`data`, `schema`, `clf`, `k`, `trees`, `hidden`, `epochs`,
//! `tau`, `runs`, `seed`, `scale_digits`, `out`). Flags win.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::asp::{evaluate, parse_facts, parse_program, print_program, Encoding};
use crate::classifiers::{fit, ClassifierKind};
use crate::dataset::{load_csv, preprocess, stratified_split, Dataset, ImputationPolicy, SchemaSpec};
use crate::evaluation::{run_experiments, ExperimentConfig, TEST_FRACTION};
use crate::hybrid::{explain, hybrid_predict, HybridConfig, RuleProgram};
use crate::induction::{learn, LearnerParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "foldhybrid", version, about = "Rule induction, ASP evaluation and confidence-gated hybrid classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Repeated stratified 80/20 runs; writes a JSON report, explanations
    /// and, for significant results, the learned programs.
    Experiment(Settings),
    /// Explains one instance's hybrid prediction.
    Explain {
        #[command(flatten)]
        settings: Settings,
        /// Row index (0-based, in file order).
        #[arg(long)]
        instance: usize,
    },
    /// Learns rules on the full dataset and prints the program.
    ExportRules(Settings),
    /// Evaluates a program over a facts file and prints the derived atoms.
    EvalProgram {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        facts: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Clf {
    Knn,
    Rf,
    Mlp,
    #[value(name = "linear_svm")]
    LinearSvm,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct Settings {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum)]
    clf: Option<Clf>,
    /// Neighbours for knn.
    #[arg(long)]
    k: Option<usize>,
    /// Trees for rf.
    #[arg(long)]
    trees: Option<usize>,
    /// Hidden layer sizes for mlp, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Training epochs for mlp and linear_svm.
    #[arg(long)]
    epochs: Option<usize>,
    /// Confidence threshold; predictions at or below it go to the rules.
    #[arg(long, value_parser = parse_tau)]
    tau: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed-point digits for numeric constants (default: smallest exact,
    /// at least 1).
    #[arg(long)]
    scale_digits: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with defaults for the flags above.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let tau: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if tau > 0.0 && tau < 1.0 {
        Ok(tau)
    } else {
        Err(format!("tau must lie in (0, 1), got {tau}"))
    }
}

impl Settings {
    /// Fills unset flags from the config file, if one was given.
    fn resolve(self) -> anyhow::Result<Settings> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: Settings = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(Settings {
            data: self.data.or(file.data),
            schema: self.schema.or(file.schema),
            clf: self.clf.or(file.clf),
            k: self.k.or(file.k),
            trees: self.trees.or(file.trees),
            hidden: self.hidden.or(file.hidden),
            epochs: self.epochs.or(file.epochs),
            tau: self.tau.or(file.tau),
            runs: self.runs.or(file.runs),
            seed: self.seed.or(file.seed),
            scale_digits: self.scale_digits.or(file.scale_digits),
            out: self.out.or(file.out),
            config: self.config,
        })
    }

    fn classifier(&self) -> ClassifierKind {
        match self.clf.unwrap_or(Clf::LinearSvm) {
            Clf::Knn => ClassifierKind::Knn { k: self.k.unwrap_or(5) },
            Clf::Rf => ClassifierKind::RandomForest { trees: self.trees.unwrap_or(100), max_depth: None },
            Clf::Mlp => {
                let ClassifierKind::Mlp { hidden, epochs, learning_rate } = ClassifierKind::mlp() else { unreachable!() };
                ClassifierKind::Mlp {
                    hidden: self.hidden.clone().unwrap_or(hidden),
                    epochs: self.epochs.unwrap_or(epochs),
                    learning_rate,
                }
            }
            Clf::LinearSvm => {
                let ClassifierKind::LinearSvm { epochs, regularization } = ClassifierKind::linear_svm() else { unreachable!() };
                ClassifierKind::LinearSvm { epochs: self.epochs.unwrap_or(epochs), regularization }
            }
        }
    }

    fn hybrid(&self) -> anyhow::Result<HybridConfig> {
        let cfg = HybridConfig { tau: self.tau.unwrap_or(0.6) };
        cfg.validate()?;
        Ok(cfg)
    }

    fn load(&self) -> anyhow::Result<(String, Dataset)> {
        let Some(data) = &self.data else { bail!("--data is required") };
        let Some(schema) = &self.schema else { bail!("--schema is required") };
        let spec = SchemaSpec::from_file(schema).with_context(|| format!("reading schema {}", schema.display()))?;
        let raw = load_csv(data, &spec).with_context(|| format!("loading {}", data.display()))?;
        let ds = preprocess(&raw, ImputationPolicy::MedianMode)?;
        let id = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
        Ok((id, ds))
    }

    fn encoding(&self, ds: &Dataset) -> Encoding {
        Encoding::new(ds, self.scale_digits.unwrap_or_else(|| ds.decimal_digits(1)))
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Experiment(s) => experiment(s.resolve()?, out),
        Command::Explain { settings, instance } => explain_one(settings.resolve()?, instance, out),
        Command::ExportRules(s) => export_rules(s.resolve()?, out),
        Command::EvalProgram { program, facts } => eval_program(&program, &facts, out),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn experiment(s: Settings, out: &mut dyn Write) -> anyhow::Result<()> {
    let Some(dir) = s.out.clone() else { bail!("--out is required for experiment") };
    let (id, ds) = s.load()?;
    let cfg = ExperimentConfig {
        dataset_id: id,
        classifier: s.classifier(),
        learner: LearnerParams::default(),
        hybrid: s.hybrid()?,
        runs: s.runs.unwrap_or(10),
        base_seed: s.seed.unwrap_or(0),
        scale_digits: s.scale_digits,
    };
    let (report, artifacts) = run_experiments(&ds, &cfg)?;

    let explanations = dir.join("explanations");
    fs::create_dir_all(&explanations).with_context(|| format!("creating {}", explanations.display()))?;
    for run in &artifacts {
        let mut text = String::new();
        for (x, pred) in run.test.instances().iter().zip(&run.predictions) {
            text.push_str(&explain(&run.program, &run.test, x, pred)?.to_string());
            text.push('\n');
        }
        write_file(&explanations.join(format!("seed_{}.txt", run.result.seed)), &text)?;
    }
    if !report.programs.is_empty() {
        let programs = dir.join("programs");
        fs::create_dir_all(&programs).with_context(|| format!("creating {}", programs.display()))?;
        for (seed, text) in &report.programs {
            write_file(&programs.join(format!("seed_{seed}.lp")), text)?;
        }
    }
    let report_path = dir.join("report.json");
    write_file(&report_path, &report.to_json_string())?;

    let mean = |sys: &str| report.mean(sys, "accuracy").unwrap_or(f64::NAN);
    writeln!(
        out,
        "{} / {}: accuracy ml {:.4}, rules {:.4}, hybrid {:.4}; report written to {}",
        report.dataset,
        report.classifier,
        mean("ml"),
        mean("asp"),
        mean("hybrid"),
        report_path.display()
    )?;
    Ok(())
}

fn explain_one(s: Settings, instance: usize, out: &mut dyn Write) -> anyhow::Result<()> {
    let (_, ds) = s.load()?;
    let Some(x) = ds.instances().iter().find(|i| i.id == instance) else {
        bail!("no instance with index {instance}");
    };
    let seed = s.seed.unwrap_or(0);
    let (train, _) = stratified_split(&ds, TEST_FRACTION, seed)?;
    let model = fit(&s.classifier(), &train, seed)?;
    let rules = learn(&train, ds.positive_class(), &LearnerParams::default());
    let program = RuleProgram::from_ruleset(&rules, s.encoding(&ds))?;
    let pred = hybrid_predict(&model, &program, &ds, x, &s.hybrid()?)?;
    write!(out, "{}", explain(&program, &ds, x, &pred)?)?;
    Ok(())
}

fn export_rules(s: Settings, out: &mut dyn Write) -> anyhow::Result<()> {
    let (_, ds) = s.load()?;
    let rules = learn(&ds, ds.positive_class(), &LearnerParams::default());
    let program = RuleProgram::from_ruleset(&rules, s.encoding(&ds))?;
    let text = print_program(&program.program);
    match &s.out {
        Some(path) => write_file(path, &text)?,
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn eval_program(program: &Path, facts: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let read = |p: &Path| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let program = parse_program(&read(program)?)?;
    let facts = parse_facts(&read(facts)?)?;
    let model = evaluate(&program, &facts)?;
    for atom in model.derived(&facts) {
        writeln!(out, "{atom}.")?;
    }
    Ok(())
}
