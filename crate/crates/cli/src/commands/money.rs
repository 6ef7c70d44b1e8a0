use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use qlight_core::bounds::cloning_bound;
use qlight_core::gf2::enumerate_subspaces;
use qlight_core::money::{
    self, subspace_state, Adversary, CounterfeitConfig, CounterfeitReport, FixedGuess, HonestForward, MeasureAndCopy,
    MoneyNote,
};
use qlight_core::{rng, BitMatrix, StateVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{read_json, to_value};
use crate::CliError;

/// Largest `n` for which `--bound` enumerates every `n/2`-dimensional subspace.
pub const BOUND_MAX_N: usize = 6;

/// A note together with the bank's secret subspace.
#[derive(Serialize, Deserialize)]
pub struct NoteFile {
    pub n: usize,
    pub serial: u64,
    /// Hex-packed rows of a basis of the secret subspace.
    pub subspace: String,
    pub state: StateVector,
}

impl NoteFile {
    fn of(note: &MoneyNote) -> Self {
        Self {
            n: note.n(),
            serial: note.serial,
            subspace: note.subspace.to_hex(),
            state: note.state.clone(),
        }
    }

    fn subspace(&self) -> Result<BitMatrix, CliError> {
        Ok(BitMatrix::from_hex(self.n / 2, self.n, &self.subspace)?)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AdversaryArg {
    /// Measure the note and prepare two copies of the outcome.
    MeasureAndCopy,
    /// Ignore the note; output a fixed random subspace state twice.
    FixedGuess,
    /// Forward the note untouched, padded with |0…0⟩.
    HonestForward,
}

#[derive(Subcommand, Debug)]
pub enum MoneyCmd {
    /// Mint a note on n qubits.
    Gen {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a note file against its subspace.
    Verify {
        #[arg(long, value_name = "FILE")]
        note: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a counterfeiter against freshly minted notes.
    Counterfeit {
        #[arg(long, value_enum, default_value_t = AdversaryArg::MeasureAndCopy)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the cloning bound over every n/2-dimensional subspace.
        #[arg(long)]
        bound: bool,
    },
}

#[derive(Serialize)]
struct VerifyReport {
    serial: u64,
    accept_probability: f64,
    primal_reject_probability: f64,
    projective_probability: f64,
    accept: bool,
}

#[derive(Serialize)]
struct CloningSummary {
    family_size: usize,
    dim: usize,
    lambda1: f64,
    f2_bound: f64,
}

#[derive(Serialize)]
struct CounterfeitOutput {
    #[serde(flatten)]
    report: CounterfeitReport,
    cloning_bound: Option<CloningSummary>,
}

/// `d·λ₁` for cloning one uniformly chosen subspace state into two.
fn subspace_cloning_bound(n: usize) -> Result<CloningSummary, CliError> {
    if n > BOUND_MAX_N {
        return Err(CliError::Usage(format!("--bound supports n <= {BOUND_MAX_N}")));
    }
    let family = enumerate_subspaces(n, n / 2)?;
    let states = family
        .iter()
        .map(subspace_state)
        .collect::<Result<Vec<_>, _>>()?;
    let prior = vec![1.0 / family.len() as f64; family.len()];
    let r = cloning_bound(&states, &prior, 2)?;
    Ok(CloningSummary {
        family_size: family.len(),
        dim: r.dim,
        lambda1: r.lambda1,
        f2_bound: r.f2_bound,
    })
}

pub fn run(cmd: MoneyCmd) -> Result<Value, CliError> {
    match cmd {
        MoneyCmd::Gen { n, seed } => to_value(&NoteFile::of(&money::money_gen(n, &mut rng::seeded(seed))?)),
        MoneyCmd::Verify { note, seed } => {
            let file: NoteFile = read_json(&note)?;
            let subspace = file.subspace()?;
            let note = MoneyNote::from_subspace(subspace.clone(), file.serial)?;
            let oracles = note.oracles()?;
            let exact = money::money_verify_exact(&file.state, &oracles)?;
            let (projective_probability, _) = money::projective_verify(&file.state, &subspace)?;
            let verdict = money::money_verify(&file.state, &oracles, &mut rng::seeded(seed))?;
            to_value(&VerifyReport {
                serial: file.serial,
                accept_probability: exact.accept_probability,
                primal_reject_probability: exact.primal_reject_probability,
                projective_probability,
                accept: verdict.accept,
            })
        }
        MoneyCmd::Counterfeit {
            adversary,
            n,
            trials,
            seed,
            bound,
        } => {
            let adv: Box<dyn Adversary> = match adversary {
                AdversaryArg::MeasureAndCopy => Box::new(MeasureAndCopy),
                AdversaryArg::FixedGuess => Box::new(FixedGuess { seed }),
                AdversaryArg::HonestForward => Box::new(HonestForward),
            };
            let cloning_bound = bound.then(|| subspace_cloning_bound(n)).transpose()?;
            let cfg = CounterfeitConfig {
                n,
                trials,
                seed,
                between: None,
            };
            let report = money::counterfeit_experiment(adv.as_ref(), &cfg)?;
            to_value(&CounterfeitOutput { report, cloning_bound })
        }
    }
}
