//! Command-line grammar.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bnpmi_core::knn::TiePolicy;
use bnpmi_core::mi::MarginalMode;
use bnpmi_core::rbtest::{ElicitConfig, DEFAULT_GRID};
use bnpmi_core::sampling::DistributionSpec;

use crate::commands::{cmd_elicit, cmd_estimate, cmd_simulate, cmd_test};
use crate::config::{DataSource, OutputFormat, RunConfig, SimulateGrid};
use crate::data::parse_columns;
use crate::error::{CliError, CliResult};
use crate::report::{SimRow, SimulateReport};

#[derive(Debug, Parser)]
#[command(name = "bnpmi", version, about = "Bayesian nonparametric mutual information and independence testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate of mutual information from posterior draws.
    Estimate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Relative-belief test of mutual independence.
    Test {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Choose the prior concentration for the test.
    Elicit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.05)]
        c: f64,
        /// Dimension of the data to be tested.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Candidate concentrations, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
        /// Geometric bisection steps after the grid search.
        #[arg(long, default_value_t = 0)]
        refine_steps: usize,
    },
    /// Simulation study over distributions and sample sizes.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Distribution text form; repeat for several.
        #[arg(long = "dist", required = true)]
        distributions: Vec<String>,
        /// Sample sizes, comma separated.
        #[arg(long = "n", value_delimiter = ',', default_value = "20,30,50")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Sweep k over an inclusive range such as `1-20`; skips the test.
        #[arg(long)]
        k_sweep: Option<String>,
        /// Skip the independence test.
        #[arg(long)]
        no_test: bool,
        /// Concentration for the test.
        #[arg(long, default_value_t = 1.0)]
        test_a: f64,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file (comma separated, '.' decimal).
    #[arg(long, conflicts_with = "dist")]
    pub input: Option<PathBuf>,
    /// The first CSV line is a header.
    #[arg(long)]
    pub header: bool,
    /// Columns to use, e.g. `0-3` or `0,2,4`.
    #[arg(long, conflicts_with = "all_columns")]
    pub columns: Option<String>,
    /// Use every column of the file.
    #[arg(long)]
    pub all_columns: bool,
    /// Simulate data from this distribution instead of reading a file.
    #[arg(long)]
    pub dist: Option<String>,
    /// Rows to simulate.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Prior concentration (default 0.05 to estimate, 1 to test).
    #[arg(long)]
    pub a: Option<f64>,
    /// Atoms per process realization.
    #[arg(long, default_value_t = 500)]
    pub atoms: usize,
    /// MI draws per side.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Center and scale every column by its sample moments.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Compute marginal entropies on fresh realizations.
    #[arg(long)]
    pub independent_marginals: bool,
    /// Evaluate repeated atoms one by one instead of merging them.
    #[arg(long)]
    pub no_merge: bool,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Width of the window [0, c) standing in for MI = 0.
    #[arg(long, default_value_t = 0.05)]
    pub c: f64,
    /// Strength grid size.
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub i0: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn run_config(common: &CommonArgs, window: Option<&WindowArgs>) -> RunConfig {
    let mut cfg = RunConfig {
        k: common.k,
        a: common.a,
        n_atoms: common.atoms,
        draws: common.draws,
        seed: common.seed,
        standardize: common.standardize,
        format: match common.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        },
        workers: common.workers,
        marginals: if common.independent_marginals {
            MarginalMode::Independent
        } else {
            MarginalMode::Coupled
        },
        ties: if common.no_merge {
            TiePolicy::PositiveOnly
        } else {
            TiePolicy::MergeDuplicates
        },
        ..RunConfig::default()
    };
    if let Some(w) = window {
        cfg.c = w.c;
        cfg.m = w.m;
        cfg.i0 = w.i0;
    }
    cfg
}

fn parse_dist(text: &str) -> CliResult<DistributionSpec> {
    text.parse().map_err(|e: bnpmi_core::Error| CliError::Input(e.to_string()))
}

fn data_source(input: &InputArgs) -> CliResult<DataSource> {
    match (&input.input, &input.dist) {
        (Some(path), None) => {
            let columns = match (&input.columns, input.all_columns) {
                (Some(text), _) => Some(parse_columns(text)?),
                (None, true) => None,
                (None, false) => {
                    return Err(CliError::Input(
                        "select columns with --columns or pass --all-columns".into(),
                    ))
                }
            };
            Ok(DataSource::File {
                path: path.clone(),
                has_header: input.header,
                columns,
            })
        }
        (None, Some(text)) => Ok(DataSource::Simulated {
            spec: parse_dist(text)?,
            n: input.n,
        }),
        _ => Err(CliError::Input("give exactly one of --input or --dist".into())),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn open_output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?),
        None => Box::new(std::io::stdout()),
    })
}

fn write_all(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: "output".into(),
            source,
        })
}

fn parse_range(text: &str) -> CliResult<Vec<usize>> {
    let cols = parse_columns(text).map_err(|_| CliError::Input(format!("cannot parse k range '{text}'")))?;
    if cols.contains(&0) {
        return Err(CliError::Input("k must be at least 1".into()));
    }
    Ok(cols)
}

/// Executes a parsed command line and writes its report.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Estimate { input, common } => {
            let report = cmd_estimate(&run_config(&common, None), &data_source(&input)?)?;
            write_all(&mut *open_output(&common.output)?, &json(&report))
        }
        Command::Test {
            input,
            common,
            window,
        } => {
            let report = cmd_test(&run_config(&common, Some(&window)), &data_source(&input)?)?;
            write_all(&mut *open_output(&common.output)?, &json(&report))
        }
        Command::Elicit {
            common,
            c,
            d,
            grid,
            tolerance,
            refine_steps,
        } => {
            let ecfg = ElicitConfig {
                c,
                d,
                grid: grid.unwrap_or_else(|| DEFAULT_GRID.to_vec()),
                tolerance,
                draws: common.draws,
                k: common.k,
                n_atoms: common.atoms,
                refine_steps,
            };
            let report = cmd_elicit(&run_config(&common, None), &ecfg)?;
            write_all(&mut *open_output(&common.output)?, &json(&report))
        }
        Command::Simulate {
            common,
            window,
            distributions,
            ns,
            reps,
            k_sweep,
            no_test,
            test_a,
        } => {
            let mut cfg = run_config(&common, Some(&window));
            cfg.reps = reps;
            let specs = distributions.iter().map(|t| parse_dist(t)).collect::<CliResult<Vec<_>>>()?;
            let mut grid = SimulateGrid::new(specs, ns);
            grid.test_a = test_a;
            grid.with_test = !no_test;
            if let Some(range) = k_sweep {
                grid.ks = parse_range(&range)?;
                grid.with_test = false;
            }
            let mut out = open_output(&common.output)?;
            match cfg.format {
                OutputFormat::Csv => {
                    let mut header_done = false;
                    cmd_simulate(&cfg, &grid, |row| {
                        let text = csv_rows(std::slice::from_ref(row), !header_done)?;
                        header_done = true;
                        write_all(&mut *out, &text)
                    })?;
                    Ok(())
                }
                OutputFormat::Json => {
                    let rows = cmd_simulate(&cfg, &grid, |_| Ok(()))?;
                    let report = SimulateReport {
                        command: "simulate",
                        seed: cfg.seed,
                        rows,
                    };
                    write_all(&mut *out, &json(&report))
                }
            }
        }
    }
}

/// CSV text for `rows`, with the header line when asked.
pub fn csv_rows(rows: &[SimRow], header: bool) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
