//! Command-line flags, JSON config files and their merge into a [`RunConfig`].
//!
//! Precedence: explicit flag, then config file, then built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_STARTS: usize = 16;
pub const DEFAULT_ITERATIONS: usize = 500;

#[derive(Debug, Parser)]
#[command(name = "sparselb", version, about = "Certified lower bounds for exact sparse optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Evaluate the sparse norms of a vector.
    NormEval(Options),
    /// Check the duality sandwich <x, y> <= |x| |y|_* on a pair of vectors.
    NormDualCheck(Options),
    /// Certified lower bound for sparse least squares.
    LbLsq(Options),
    /// Certified lower bound for group-sparse least squares.
    LbGso(Options),
    /// Conjugates of l0 and of its level sets under the ray-constant coupling.
    ConjCaprac(Options),
    /// Exact sparse least squares by support enumeration.
    ExactEnumerate(Options),
    /// Quick internal consistency checks.
    Selftest(Options),
}

/// Every option is optional on the command line so that a config file can
/// supply it.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// JSON file with any of these options (flags take precedence).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Sparsity level.
    #[arg(long)]
    pub k: Option<usize>,
    /// CSV matrix A (p rows, d columns).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// CSV target vector z.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// CSV vector (primal argument).
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// CSV vector (dual argument).
    #[arg(long)]
    pub dual_vector: Option<PathBuf>,
    /// Group structure JSON: {"d": .., "groups": [[1-based indices]], "weights": [..]}.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Point family JSON: {"d": .., "sets": [[[point], ..], ..]}.
    #[arg(long)]
    pub point_family: Option<PathBuf>,
    /// Normalization used by lb-gso.
    #[arg(long, value_enum)]
    pub theta: Option<Theta>,
    /// Run a batch of this many seeded random instances instead of files.
    #[arg(long)]
    pub random: Option<usize>,
    /// Dimension of random instances.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of rows of random instances.
    #[arg(long)]
    pub p: Option<usize>,
    /// Output JSON path (stdout if absent); batches also write a sibling CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, hide = true, allow_hyphen_values = true)]
    #[serde(skip)]
    pub debug_bound_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theta {
    #[default]
    Local,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    NormEval,
    NormDualCheck,
    LbLsq,
    LbGso,
    ConjCaprac,
    ExactEnumerate,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::NormEval => "norm-eval",
            Command::NormDualCheck => "norm-dual-check",
            Command::LbLsq => "lb-lsq",
            Command::LbGso => "lb-gso",
            Command::ConjCaprac => "conj-caprac",
            Command::ExactEnumerate => "exact-enumerate",
            Command::Selftest => "selftest",
        }
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub tol: f64,
    pub starts: usize,
    pub iterations: usize,
    pub k: Option<usize>,
    pub matrix: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub vector: Option<PathBuf>,
    pub dual_vector: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub point_family: Option<PathBuf>,
    pub theta: Theta,
    pub random: Option<usize>,
    pub d: Option<usize>,
    pub p: Option<usize>,
    pub output: Option<PathBuf>,
    pub debug_bound_offset: f64,
}

impl RunConfig {
    /// The value of a field the command cannot run without.
    pub fn require<T: Clone>(&self, value: &Option<T>, field: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Config(format!("missing required field `{field}` for {}", self.command.name())))
    }
}

/// Parses command-line arguments (including the program name) and any
/// config file they point to.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    let (command, flags) = match cli.command {
        CommandArgs::NormEval(o) => (Command::NormEval, o),
        CommandArgs::NormDualCheck(o) => (Command::NormDualCheck, o),
        CommandArgs::LbLsq(o) => (Command::LbLsq, o),
        CommandArgs::LbGso(o) => (Command::LbGso, o),
        CommandArgs::ConjCaprac(o) => (Command::ConjCaprac, o),
        CommandArgs::ExactEnumerate(o) => (Command::ExactEnumerate, o),
        CommandArgs::Selftest(o) => (Command::Selftest, o),
    };
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => Options::default(),
    };
    merge(command, flags, file)
}

/// Reads a JSON config file; schema errors name the offending field.
pub fn read_config_file(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_json(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_json(text: &str) -> Result<Options, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("invalid config at `{path}`: {}", e.into_inner()))
    })
}

fn merge(command: Command, flags: Options, file: Options) -> Result<RunConfig, CliError> {
    let cfg = RunConfig {
        command,
        seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
        starts: flags.starts.or(file.starts).unwrap_or(DEFAULT_STARTS),
        iterations: flags.iterations.or(file.iterations).unwrap_or(DEFAULT_ITERATIONS),
        k: flags.k.or(file.k),
        matrix: flags.matrix.or(file.matrix),
        target: flags.target.or(file.target),
        vector: flags.vector.or(file.vector),
        dual_vector: flags.dual_vector.or(file.dual_vector),
        groups: flags.groups.or(file.groups),
        point_family: flags.point_family.or(file.point_family),
        theta: flags.theta.or(file.theta).unwrap_or_default(),
        random: flags.random.or(file.random),
        d: flags.d.or(file.d),
        p: flags.p.or(file.p),
        output: flags.output.or(file.output),
        debug_bound_offset: flags.debug_bound_offset.unwrap_or(0.0),
    };
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(CliError::Config(format!("`tol` must be positive and finite, got {}", cfg.tol)));
    }
    if cfg.starts == 0 {
        return Err(CliError::Config("`starts` must be at least 1".into()));
    }
    if !cfg.debug_bound_offset.is_finite() {
        return Err(CliError::Config("bound offset must be finite".into()));
    }
    Ok(cfg)
}
