//! Run configuration: CLI flags, the JSON config file they override, and
//! validation of the combined result.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nchp_core::boundary::ProbeDescriptor;

#[derive(Debug, Parser)]
#[command(
    name = "nchp",
    about = "Verification suites and boundary reports for matrix half-plane maps",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// JSON run configuration; explicit flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed fanned out to per-sample seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Total number of samples for the verification suites.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Matrix levels to sample, comma separated (subset of 1..=8).
    #[arg(long, global = true, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,

    /// Margin tolerance (verify suites) or schedule tolerance (boundary).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output directory for CSV/JSON reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; identical reports at any setting.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Restrict the function family (moebius, nevanlinna-pick,
    /// loewner-realization).
    #[arg(long, global = true)]
    pub family: Option<String>,

    /// Restrict the ball radius (default grid: 0.25, 1, 4).
    #[arg(long, global = true)]
    pub radius: Option<f64>,

    /// Probe descriptor file for boundary-report.
    #[arg(long, global = true)]
    pub probe: Option<PathBuf>,

    /// Replay a single serialized sample by its raw per-sample seed.
    #[arg(long, global = true)]
    pub raw_seed: Option<u64>,

    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// Score the five contraction inequalities on seeded random samples.
    VerifySchwarzPick,
    /// Sample ball members and check the member bounds, midpoint convexity
    /// and amplification invariance.
    VerifyBall,
    /// Check the function axioms: direct sums, similarity, difference
    /// identities, linearity, finite differences and block criteria.
    VerifyNcfunction,
    /// Estimate boundary quantities for one probe and check the growth and
    /// real-part inequalities.
    BoundaryReport,
    /// Evaluate the built-in demo realization on random tuples and report
    /// positivity margins.
    RealizationDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubcommandName {
    VerifySchwarzPick,
    VerifyBall,
    VerifyNcfunction,
    BoundaryReport,
    RealizationDemo,
}

impl From<CliCommand> for SubcommandName {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::VerifySchwarzPick => SubcommandName::VerifySchwarzPick,
            CliCommand::VerifyBall => SubcommandName::VerifyBall,
            CliCommand::VerifyNcfunction => SubcommandName::VerifyNcfunction,
            CliCommand::BoundaryReport => SubcommandName::BoundaryReport,
            CliCommand::RealizationDemo => SubcommandName::RealizationDemo,
        }
    }
}

fn default_seed() -> u64 {
    42
}
fn default_samples() -> usize {
    1000
}
fn default_levels() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_threads() -> usize {
    1
}

/// Complete run description; the JSON config file mirrors this struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: SubcommandName,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// When set, the run executes exactly one sample with this raw seed;
    /// used to replay serialized failing samples.
    #[serde(default)]
    pub raw_seed: Option<u64>,
    #[serde(default)]
    pub probe: Option<ProbeDescriptor>,
}

impl RunConfig {
    pub fn defaults(subcommand: SubcommandName) -> Self {
        RunConfig {
            subcommand,
            seed: default_seed(),
            samples: default_samples(),
            levels: default_levels(),
            tol: None,
            out: None,
            threads: default_threads(),
            family: None,
            radius: None,
            raw_seed: None,
            probe: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.samples < 1 {
            return Err("samples must be at least 1".into());
        }
        if self.levels.is_empty() {
            return Err("levels must not be empty".into());
        }
        if self.levels.iter().any(|l| *l < 1 || *l > 8) {
            return Err("levels must lie in 1..=8".into());
        }
        if self.threads < 1 {
            return Err("threads must be at least 1".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err("tol must be positive".into());
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err("radius must be positive".into());
            }
        }
        if let Some(f) = &self.family {
            if !matches!(f.as_str(), "moebius" | "nevanlinna-pick" | "loewner-realization") {
                return Err(format!("unknown family {f}"));
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("reports"))
    }
}

/// Builds the effective configuration: config file first, then flag
/// overrides.
pub fn assemble(cli: &Cli) -> Result<RunConfig, String> {
    let mut config = match (&cli.config, cli.command) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| format!("bad config {}: {e}", path.display()))?
        }
        (None, Some(cmd)) => RunConfig::defaults(cmd.into()),
        (None, None) => return Err("need a subcommand or --config".into()),
    };
    if let Some(cmd) = cli.command {
        config.subcommand = cmd.into();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    if let Some(levels) = &cli.levels {
        config.levels = levels.clone();
    }
    if let Some(tol) = cli.tol {
        config.tol = Some(tol);
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(family) = &cli.family {
        config.family = Some(family.clone());
    }
    if let Some(radius) = cli.radius {
        config.radius = Some(radius);
    }
    if let Some(raw_seed) = cli.raw_seed {
        config.raw_seed = Some(raw_seed);
    }
    if let Some(path) = &cli.probe {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read probe {}: {e}", path.display()))?;
        let probe: ProbeDescriptor = serde_json::from_str(&text)
            .map_err(|e| format!("bad probe {}: {e}", path.display()))?;
        config.probe = Some(probe);
    }
    config.validate()?;
    Ok(config)
}
