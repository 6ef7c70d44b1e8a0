use std::path::PathBuf;

use clap::Subcommand;
use qlight_core::{BitVector, HashKey};
use serde_json::{json, Value};

use super::{read_json, to_value};
use crate::CliError;

#[derive(Subcommand, Debug)]
pub enum HashCmd {
    /// Sample a key: n uniform upper-triangular m×m matrices.
    Keygen {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate f on one input.
    Eval {
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        /// Input as a hex bitstring of m bits.
        #[arg(long)]
        x: String,
    },
    /// Preimage counts |f⁻¹(y)| for every digest y.
    Fibers {
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
    },
}

pub fn run(cmd: HashCmd) -> Result<Value, CliError> {
    match cmd {
        HashCmd::Keygen { n, m, seed } => to_value(&HashKey::keygen_seeded(n, m, seed)?),
        HashCmd::Eval { key, x } => {
            let key: HashKey = read_json(&key)?;
            let x = BitVector::from_hex(&x, key.m())?;
            let digest = key.eval(&x)?;
            Ok(json!({ "x": x.to_hex(), "digest": digest.to_hex() }))
        }
        HashCmd::Fibers { key } => {
            let key: HashKey = read_json(&key)?;
            let fibers = key.fiber_sizes()?;
            let sizes: Vec<Value> = fibers
                .iter()
                .enumerate()
                .map(|(y, &c)| json!({ "digest": key.digest_from_index(y as u64).to_hex(), "count": c }))
                .collect();
            Ok(json!({ "n": key.n(), "m": key.m(), "fibers": sizes }))
        }
    }
}
