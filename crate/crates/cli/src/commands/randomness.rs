//! Certified randomness: the serial of a fresh bolt is the random string and
//! the bolt itself is the proof.

use std::path::PathBuf;

use clap::Subcommand;
use qlight_core::{rng, Bolt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::lightning::verify_bolt;
use super::{read_json, write_file, ModeArg, SchemeArgs, SchemeFile, StrategyArg};
use crate::CliError;

#[derive(Serialize, Deserialize)]
pub struct ProofFile {
    pub scheme: SchemeFile,
    pub bolt: Bolt,
}

#[derive(Subcommand, Debug)]
pub enum RandomnessCmd {
    /// Generate a bolt, print its serial and write the proof file.
    Prove {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::IdealizedProduct)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE", default_value = "proof.json")]
        proof: PathBuf,
    },
    /// Re-run full verification on a proof file.
    Verify {
        #[arg(long, value_name = "FILE", default_value = "proof.json")]
        proof: PathBuf,
        /// Trusted scheme file; the proof's key must match it.
        #[arg(long, value_name = "FILE")]
        scheme: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Oracle)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn run(cmd: RandomnessCmd) -> Result<Value, CliError> {
    match cmd {
        RandomnessCmd::Prove {
            scheme,
            mode,
            seed,
            proof,
        } => {
            let scheme = scheme.load()?;
            let bolt = scheme.gen_bolt(&mut rng::seeded(seed), mode.into())?;
            let serial = bolt.serial.to_hex();
            write_file(
                &proof,
                &ProofFile {
                    scheme: SchemeFile::of(&scheme),
                    bolt,
                },
            )?;
            Ok(json!({ "serial": serial, "proof": proof.display().to_string() }))
        }
        RandomnessCmd::Verify {
            proof,
            scheme,
            strategy,
            seed,
        } => {
            let file: ProofFile = read_json(&proof)?;
            if let Some(path) = scheme {
                let trusted: SchemeFile = read_json(&path)?;
                if trusted.key != file.scheme.key || trusted.params != file.scheme.params {
                    return Err(CliError::Input(format!(
                        "{}: proof was made under a different scheme",
                        proof.display()
                    )));
                }
            }
            let scheme = file.scheme.into_scheme()?;
            let mut report = verify_bolt(&scheme, &file.bolt, strategy.into(), seed)?;
            report["serial"] = json!(file.bolt.serial.to_hex());
            report["accept"] = report["sampled"]["accept"].clone();
            Ok(report)
        }
    }
}
