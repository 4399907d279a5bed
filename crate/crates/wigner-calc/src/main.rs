//! Verification harness CLI: runs the identity suites over seeded random
//! instances and emits a machine- or human-readable report.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed, 2 bad
//! configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use wigner_calc::verify::{self, ReportFormat, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "wigner-calc",
    version,
    about = "Identity verification suites for semicircular chaos calculus"
)]
struct Cli {
    /// Suites to run (comma separated or repeated); `all` selects every
    /// registered suite.
    #[arg(long = "suite", value_delimiter = ',')]
    suite: Vec<String>,

    /// RNG seed; falls back to $WIGNER_CALC_SEED, then the default.
    #[arg(long)]
    seed: Option<u64>,

    /// Orthonormal basis size for sampled kernels.
    #[arg(long)]
    basis: Option<u32>,

    /// Chaos degree budget for sampled functionals.
    #[arg(long = "max-degree")]
    max_degree: Option<usize>,

    /// Fock space truncation level.
    #[arg(long = "fock-level")]
    fock_level: Option<usize>,

    /// Generic cross-validation tolerance.
    #[arg(long)]
    tol: Option<f64>,

    /// GUE matrix dimension.
    #[arg(long = "gue-dim")]
    gue_dim: Option<usize>,

    /// GUE Monte-Carlo sample count.
    #[arg(long = "gue-samples")]
    gue_samples: Option<usize>,

    /// Also write the report to this path.
    #[arg(long)]
    report: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// JSON file with `SuiteConfig` fields; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn build_config(cli: &Cli) -> Result<SuiteConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str::<SuiteConfig>(&text)
                .map_err(|e| format!("bad config {}: {e}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    } else if let Ok(raw) = std::env::var("WIGNER_CALC_SEED") {
        cfg.seed = raw
            .trim()
            .parse()
            .map_err(|e| format!("WIGNER_CALC_SEED `{raw}` is not a seed: {e}"))?;
    }
    if !cli.suite.is_empty() {
        cfg.suites = cli.suite.clone();
    }
    if let Some(v) = cli.basis {
        cfg.basis_size = v;
    }
    if let Some(v) = cli.max_degree {
        cfg.max_degree = v;
    }
    if let Some(v) = cli.fock_level {
        cfg.fock_level = v;
    }
    if let Some(v) = cli.tol {
        cfg.tolerance = v;
    }
    if let Some(v) = cli.gue_dim {
        cfg.gue_dim = v;
    }
    if let Some(v) = cli.gue_samples {
        cfg.gue_samples = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("config error: {message}");
            return ExitCode::from(2);
        }
    };
    let report = match verify::run_suite(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match cli.format {
        Format::Json => ReportFormat::Json,
        Format::Table => ReportFormat::Table,
    };
    let rendered = verify::emit(&report, format);
    print!("{rendered}");
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, &rendered) {
            eprintln!("config error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
