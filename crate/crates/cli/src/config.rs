use std::path::PathBuf;

use bnpmi_core::dp::DEFAULT_ATOMS;
use bnpmi_core::knn::TiePolicy;
use bnpmi_core::mi::{MarginalMode, DEFAULT_DRAWS, DEFAULT_K};
use bnpmi_core::rbtest::{DEFAULT_C, DEFAULT_TEST_A};
use bnpmi_core::sampling::DistributionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    /// Concentration; `None` selects 0.05 for estimation and 1 for testing.
    pub a: Option<f64>,
    pub c: f64,
    pub n_atoms: usize,
    /// Draws per side, `l`.
    pub draws: usize,
    /// Replications per simulation cell.
    pub reps: usize,
    pub m: usize,
    pub i0: usize,
    pub seed: u64,
    pub standardize: bool,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    pub marginals: MarginalMode,
    pub ties: TiePolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: DEFAULT_K,
            a: None,
            c: DEFAULT_C,
            n_atoms: DEFAULT_ATOMS,
            draws: DEFAULT_DRAWS,
            reps: 100,
            m: 20,
            i0: 1,
            seed: 0,
            standardize: false,
            format: OutputFormat::Json,
            workers: None,
            marginals: MarginalMode::Coupled,
            ties: TiePolicy::MergeDuplicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File {
        path: PathBuf,
        has_header: bool,
        /// Zero-based columns to keep, in order.
        columns: Option<Vec<usize>>,
    },
    /// `n` rows drawn from `spec` under the run seed.
    Simulated { spec: DistributionSpec, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateGrid {
    pub distributions: Vec<DistributionSpec>,
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    /// Also run the independence test in every replication.
    pub with_test: bool,
    /// Concentration for the test.
    pub test_a: f64,
}

impl SimulateGrid {
    pub fn new(distributions: Vec<DistributionSpec>, ns: Vec<usize>) -> Self {
        SimulateGrid {
            distributions,
            ns,
            ks: vec![DEFAULT_K],
            with_test: true,
            test_a: DEFAULT_TEST_A,
        }
    }
}
