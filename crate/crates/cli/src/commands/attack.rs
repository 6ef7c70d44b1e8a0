use std::path::PathBuf;

use clap::{Args, Subcommand};
use qlight_core::mq::{self, DEFAULT_MAX_TRIES};
use qlight_core::{rng, BitVector, Digest, HashKey};
use serde::Serialize;
use serde_json::Value;

use super::{read_json, to_value};
use crate::CliError;

#[derive(Args, Clone, Debug)]
pub struct KeyArgs {
    /// Key file; otherwise a key is sampled from --n, --m and --key-seed.
    #[arg(long, value_name = "FILE")]
    pub key: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 12)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub key_seed: u64,
    /// Seed for the attack's own randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_TRIES)]
    pub max_tries: usize,
}

impl KeyArgs {
    fn load(&self) -> Result<HashKey, CliError> {
        match &self.key {
            Some(path) => read_json(path),
            None => Ok(HashKey::keygen_seeded(self.n, self.m, self.key_seed)?),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum AttackCmd {
    /// A pair x ≠ x' with f(x) = f(x').
    Collide(KeyArgs),
    /// k + 1 colliding points with independent differences.
    Multicollide {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// An r-dimensional affine space on which f is constant.
    AffineSpace {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, default_value_t = 3)]
        r: usize,
    },
}

#[derive(Serialize)]
struct AttackReport {
    points: Vec<String>,
    digest: String,
    tries: usize,
    rank_history: Vec<usize>,
    /// Every point evaluates to `digest`.
    verified: bool,
    /// Differences from the first point are independent.
    nonaffine: bool,
}

fn report(key: &HashKey, points: &[BitVector], digest: &Digest, tries: usize, rank_history: Vec<usize>) -> Result<AttackReport, CliError> {
    let mut verified = true;
    for p in points {
        verified &= key.eval(p)? == *digest;
    }
    Ok(AttackReport {
        points: points.iter().map(BitVector::to_hex).collect(),
        digest: digest.to_hex(),
        tries,
        rank_history,
        verified,
        nonaffine: mq::is_nonaffine(points)?,
    })
}

pub fn run(cmd: AttackCmd) -> Result<Value, CliError> {
    let r = match cmd {
        AttackCmd::Collide(a) => {
            let key = a.load()?;
            let c = mq::find_collision(&key, &mut rng::seeded(a.seed), a.max_tries)?;
            report(&key, &[c.x, c.x_prime], &c.digest, c.tries, c.rank_history)?
        }
        AttackCmd::Multicollide { key: a, k } => {
            let key = a.load()?;
            let c = mq::find_nonaffine_multicollision(&key, k, &mut rng::seeded(a.seed), a.max_tries)?;
            report(&key, &c.points, &c.digest, c.tries, c.rank_history)?
        }
        AttackCmd::AffineSpace { key: a, r } => {
            let key = a.load()?;
            let c = mq::find_affine_collision_space(&key, r, &mut rng::seeded(a.seed), a.max_tries)?;
            let points = c.space.enumerate_default()?;
            report(&key, &points, &c.digest, c.tries, c.rank_history)?
        }
    };
    to_value(&r)
}
