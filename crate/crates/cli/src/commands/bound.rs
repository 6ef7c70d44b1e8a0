use std::path::PathBuf;

use clap::Subcommand;
use qlight_core::bounds::{self, gram_matrix, hadamard_power, ConversionProblem};
use qlight_core::StateVector;
use serde::Deserialize;
use serde_json::Value;

use super::{read_json, to_value};
use crate::CliError;

/// `{states, targets, prior, d}` for conversion, `{states, prior, d?}` for
/// cloning. States are sparse dumps.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub states: Vec<StateVector>,
    #[serde(default)]
    pub targets: Option<Vec<StateVector>>,
    pub prior: Vec<f64>,
    /// Input dimension; defaults to that of the first state.
    #[serde(default)]
    pub d: Option<usize>,
}

impl ProblemFile {
    fn dim(&self) -> usize {
        self.d
            .unwrap_or_else(|| self.states.first().map(StateVector::dim).unwrap_or(0))
    }
}

#[derive(Subcommand, Debug)]
pub enum BoundCmd {
    /// Bound for mapping each state to its target.
    Conversion {
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
    },
    /// Bound for turning one copy into `copies` copies.
    Cloning {
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        #[arg(long, default_value_t = 2)]
        copies: usize,
    },
    /// Subspace states of dimension n/2 over F_q^n, to two copies.
    SubspaceExample {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
    },
}

pub fn run(cmd: BoundCmd) -> Result<Value, CliError> {
    match cmd {
        BoundCmd::Conversion { problem } => {
            let p: ProblemFile = read_json(&problem)?;
            let dim = p.dim();
            let targets = p
                .targets
                .ok_or_else(|| CliError::Input("conversion needs `targets`".into()))?;
            to_value(&bounds::conversion_bound(&ConversionProblem {
                family1: p.states,
                family2: targets,
                prior: p.prior,
                dim,
            })?)
        }
        BoundCmd::Cloning { problem, copies } => {
            let p: ProblemFile = read_json(&problem)?;
            if p.targets.is_some() {
                return Err(CliError::Input("cloning takes no `targets`".into()));
            }
            let dim = p.dim();
            let g = gram_matrix(&p.states)?;
            to_value(&bounds::bound_from_grams(g.clone(), hadamard_power(&g, copies), &p.prior, dim)?)
        }
        BoundCmd::SubspaceExample { n, q } => to_value(&bounds::subspace_example(n, q)?),
    }
}
