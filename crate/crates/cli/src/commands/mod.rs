pub mod attack;
pub mod bound;
pub mod hash;
pub mod lightning;
pub mod money;
pub mod randomness;

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qlight_core::lightning::{BoltMode, Strategy};
use qlight_core::{HashKey, Params, Scheme};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{io_error, CliError};

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn write_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = crate::to_json_string(value).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

pub(crate) fn to_value<T: Serialize>(value: &T) -> Result<Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::Input(e.to_string()))
}

/// The public part of a lightning instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeFile {
    pub params: Params,
    pub key: HashKey,
}

impl SchemeFile {
    pub fn of(scheme: &Scheme) -> Self {
        Self {
            params: *scheme.params(),
            key: scheme.key().clone(),
        }
    }

    pub fn into_scheme(self) -> Result<Scheme, CliError> {
        Ok(Scheme::new(self.key, self.params)?)
    }
}

/// A scheme either read from `--scheme` or derived from parameters and
/// `--key-seed`.
#[derive(Args, Clone, Debug)]
pub struct SchemeArgs {
    /// Scheme file written by `lightning setup`; replaces the flags below.
    #[arg(long, value_name = "FILE")]
    pub scheme: Option<PathBuf>,
    /// Digest bits.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Input bits (qubits per register).
    #[arg(long, default_value_t = 12)]
    pub m: usize,
    /// A bolt has k + 1 registers.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Extraction rounds.
    #[arg(long, default_value_t = 3)]
    pub u: usize,
    /// Seed for the hash key.
    #[arg(long, default_value_t = 0)]
    pub key_seed: u64,
}

impl SchemeArgs {
    pub fn load(&self) -> Result<Scheme, CliError> {
        if let Some(path) = &self.scheme {
            return read_json::<SchemeFile>(path)?.into_scheme();
        }
        let params = Params::new(self.n, self.m, self.k, self.u)?;
        let key = HashKey::keygen_seeded(self.n, self.m, self.key_seed)?;
        Ok(Scheme::new(key, params)?)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Oracle,
    Circuit,
    CircuitMeasured,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Oracle => Strategy::Oracle,
            StrategyArg::Circuit => Strategy::Circuit,
            StrategyArg::CircuitMeasured => Strategy::CircuitMeasured,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    IdealizedProduct,
    JointMicro,
}

impl From<ModeArg> for BoltMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::IdealizedProduct => BoltMode::IdealizedProduct,
            ModeArg::JointMicro => BoltMode::JointMicro,
        }
    }
}
