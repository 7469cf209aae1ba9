//! Command-line driver. Exit codes: 0 success, 1 usage or configuration error,
//! 2 failed audit or reproduction check.

mod commands;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{invalid, Result};
use crate::scenario::{Preset, Scenario};
use crate::screening::Severity;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_AUDIT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "tokenscreen", version, about = "Token menus, tariffs and incentive audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario: uniform-example or uniform-symmetric (with --rho and --c).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Audit tolerance in utility units; quadrature runs a hundred times tighter.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Points per grid dimension (command-specific default).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Directory for output files and the run manifest; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; JSON by default, CSV for `regions`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Common {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    WithFloor,
    Contractible,
    Package,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettingArg {
    Packages,
    Allocations,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeverityArg {
    Ignore,
    Warn,
    Error,
}

impl From<SeverityArg> for Severity {
    fn from(s: SeverityArg) -> Self {
        match s {
            SeverityArg::Ignore => Severity::Ignore,
            SeverityArg::Warn => Severity::Warn,
            SeverityArg::Error => Severity::Error,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Surplus-maximising tokens for one profile.
    Efficient {
        #[command(flatten)]
        common: Common,
        /// Profile as `length:value` pairs, e.g. `0.5:1,0.5:0.2`; defaults to
        /// the scenario's profile, then to the step profile of --w and --s.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Minimum cost of quality levels.
    Cost {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = KindArg::WithFloor)]
        kind: KindArg,
        /// Task count for the contractible cost.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Quality levels; without any, --grid levels up to --q-max.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        q_max: f64,
    },
    /// Package menu over the CES index, with audits.
    MenuPackages {
        #[command(flatten)]
        common: Common,
    },
    /// Per-task allocation menu over (value, scale), with audits.
    MenuAllocations {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SeverityArg::Warn)]
        assumption: SeverityArg,
    },
    /// Two-type menu for the scenario's binary payload.
    MenuBinary {
        #[command(flatten)]
        common: Common,
    },
    /// Two-part tariffs implementing a menu, checked against buyer best responses.
    Tariffs {
        #[command(flatten)]
        common: Common,
        /// Defaults to the scenario's setting.
        #[arg(long, value_enum)]
        setting: Option<SettingArg>,
    },
    /// Incentive and participation audits of a menu file or the scenario's menu.
    VerifyIc {
        #[command(flatten)]
        common: Common,
        /// Menu JSON as written by the menu commands.
        #[arg(long)]
        menu: Option<PathBuf>,
        /// Multiply every transfer before auditing.
        #[arg(long, default_value_t = 1.0)]
        scale_transfers: f64,
    },
    /// Expected revenue and profit of the allocation and package menus.
    Reproduce {
        #[command(flatten)]
        common: Common,
    },
    /// Boundary curves of the exclusion and fine-tuning regions in (s, w).
    Regions {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Efficient { common, .. }
            | Command::Cost { common, .. }
            | Command::MenuPackages { common }
            | Command::MenuAllocations { common, .. }
            | Command::MenuBinary { common }
            | Command::Tariffs { common, .. }
            | Command::VerifyIc { common, .. }
            | Command::Reproduce { common }
            | Command::Regions { common } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Efficient { .. } => "efficient",
            Command::Cost { .. } => "cost",
            Command::MenuPackages { .. } => "menu-packages",
            Command::MenuAllocations { .. } => "menu-allocations",
            Command::MenuBinary { .. } => "menu-binary",
            Command::Tariffs { .. } => "tariffs",
            Command::VerifyIc { .. } => "verify-ic",
            Command::Reproduce { .. } => "reproduce",
            Command::Regions { .. } => "regions",
        }
    }
}

/// Where the scenario came from.
pub(crate) struct Loaded {
    pub scenario: Scenario,
    pub source: String,
}

pub(crate) fn load(common: &Common) -> Result<Loaded> {
    match (&common.scenario, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| invalid("scenario", format!("{}: {e}", path.display())))?;
            Ok(Loaded {
                scenario: Scenario::from_json(&text)?,
                source: path.display().to_string(),
            })
        }
        (None, Some(name)) => {
            let p = Preset::parse(name, common.rho, common.c)?;
            Ok(Loaded {
                scenario: p.scenario()?,
                source: format!("preset:{name}"),
            })
        }
        (None, None) => Err(invalid("scenario", "pass --scenario FILE or --preset NAME")),
    }
}

/// What a command produced.
pub(crate) struct Outcome {
    pub artifacts: output::Artifacts,
    /// Human-readable lines; stdout when files go to --out, stderr otherwise.
    pub summary: Vec<String>,
    /// Lines that always go to stdout.
    pub report: Vec<String>,
    pub audit_failed: bool,
    pub scenario_hash: Option<String>,
    pub scenario_source: Option<String>,
}

impl Outcome {
    pub fn new(loaded: Option<&Loaded>) -> Self {
        Outcome {
            artifacts: Default::default(),
            summary: Vec::new(),
            report: Vec::new(),
            audit_failed: false,
            scenario_hash: loaded.map(|l| l.scenario.hash()),
            scenario_source: loaded.map(|l| l.source.clone()),
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let common = cmd.common();
    if !(common.tol.is_finite() && common.tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {}", common.tol)));
    }
    if let Some(g) = common.grid {
        if g < 2 {
            return Err(invalid("grid", format!("needs at least 2 points, got {g}")));
        }
    }
    let outcome = commands::dispatch(cmd)?;
    let code = if outcome.audit_failed { EXIT_AUDIT } else { EXIT_OK };
    let io = |e: std::io::Error| invalid("stdout", e.to_string());
    for line in &outcome.report {
        writeln!(out, "{line}").map_err(io)?;
    }
    match &common.out {
        Some(dir) => {
            let manifest = json!({
                "tool": "tokenscreen",
                "command": cmd.name(),
                "versions": {
                    "tokenscreen": env!("CARGO_PKG_VERSION"),
                    "manifest": 1,
                },
                "scenario_source": outcome.scenario_source,
                "scenario_hash": outcome.scenario_hash,
                "tolerances": {
                    "audit": common.tol,
                    "quadrature": common.tol * 1e-2,
                },
                "grid": common.grid,
                "format": common.format.map(|f| match f { Format::Json => "json", Format::Csv => "csv" }),
                "exit_code": code,
            });
            outcome.artifacts.write_all(dir, &manifest)?;
            for line in &outcome.summary {
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        None => {
            // commands with a stdout report keep their files for --out
            if outcome.report.is_empty() {
                for (_, body) in &outcome.artifacts.files {
                    out.write_all(body.as_bytes()).map_err(io)?;
                }
            }
            for line in &outcome.summary {
                writeln!(err, "{line}").map_err(io)?;
            }
        }
    }
    Ok(code)
}
