use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "longmem",
    version,
    about = "Long-range memory and chaos diagnostics for monthly climate indices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output layout on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Write plot-ready curve data (two numeric columns) to this file.
    /// For `gen`, the generated series.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized procedures.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        /// Bin width used to find the modes.
        #[arg(long, default_value_t = longmem::series::DEFAULT_MODE_RESOLUTION)]
        resolution: f64,
    },
    /// Autocorrelation function.
    Acf {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        max_lag: usize,
        #[arg(long, value_enum, default_value_t = AcfMethod::Fft)]
        method: AcfMethod,
        /// Mean autocorrelation over lags LO:HI (inclusive).
        #[arg(long, value_parser = parse_span)]
        band: Option<(usize, usize)>,
    },
    /// R/S table and log-log Hurst fit.
    Hurst {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = longmem::hurst::DEFAULT_MIN_WINDOW)]
        min_window: usize,
        /// Weight points by the inverse R/S variance across blocks.
        #[arg(long)]
        weighted: bool,
    },
    /// Five-variant Hurst estimator suite.
    Suite {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Kantz divergence curve and optional Lyapunov fit.
    Lyap {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        embedding: EmbeddingArgs,
        /// Fit the slope of S over steps A:B (inclusive).
        #[arg(long, value_parser = parse_span)]
        fit: Option<(usize, usize)>,
        /// Sampling interval used to scale the fitted slope.
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        /// Parameter grid, e.g. "m=1,2,3;eps=0.2,0.3". Keys: m, d, theiler,
        /// eps, steps, refs, k-min.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Permutation test of the correlation between two series.
    Permtest {
        #[arg(long)]
        x: PathBuf,
        #[arg(
            long,
            required_unless_present = "resultant",
            conflicts_with = "resultant"
        )]
        y: Option<PathBuf>,
        /// Use sqrt(u^2 + v^2) of two component files as the second series.
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        resultant: Option<Vec<PathBuf>>,
        #[arg(long, default_value_t = longmem::permtest::DEFAULT_N_PERM)]
        n_perm: usize,
        #[arg(long, value_enum, default_value_t = TailArg::Two)]
        tail: TailArg,
        #[command(flatten)]
        parsing: ParseArgs,
    },
    /// Seeded synthetic series.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        period: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub parsing: ParseArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    /// Input layout; guessed from the file when omitted.
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,
    /// Value marking a missing month.
    #[arg(long, default_value_t = longmem::ingest::DEFAULT_MISSING_SENTINEL, allow_negative_numbers = true)]
    pub missing: f64,
    /// Calendar range YYYY-MM:YYYY-MM.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, value_enum, default_value_t = GapArg::Error)]
    pub on_gap: GapArg,
    /// Table to read from a multi-table file (0-based).
    #[arg(long)]
    pub section: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 12)]
    pub theiler: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 12)]
    pub steps: usize,
    #[arg(long, default_value_t = 200)]
    pub refs: usize,
    #[arg(long, default_value_t = 4)]
    pub k_min: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AcfMethod {
    Fft,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Lower,
    Upper,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    White,
    Walk,
    Fgn,
    Ar1,
    Logistic,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    CpcTable,
    CsvPair,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapArg {
    Error,
    Truncate,
}

fn parse_span(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a > b {
        return Err(format!("{a}:{b} is reversed"));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn spans() {
        assert_eq!(parse_span("52:64"), Ok((52, 64)));
        assert!(parse_span("64:52").is_err());
        assert!(parse_span("5").is_err());
    }
}
