use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use qlight_core::lightning::{
    AffineStorm, BoltMode, CheatDuplicateStorm, ClassicalStorm, CollapseReport, ConstantSerialStorm, FullVerdict,
    FullVerifyReport, HonestStorm, RejectReason, SelfRejectingStorm, Storm, Strategy,
};
use qlight_core::{rng, Bolt, Scheme};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{read_json, to_value, ModeArg, SchemeArgs, SchemeFile, StrategyArg};
use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StormArg {
    /// Two honestly generated product bolts.
    Honest,
    /// Two bolts from the joint generation procedure.
    HonestJoint,
    /// Every register replaced by a copy of one basis state.
    Classical,
    /// The same honest bolt submitted twice (unphysical).
    CheatDuplicate,
    /// Serial from an affine collision space (idealized registers).
    Affine,
    /// Honest registers for a fixed serial.
    ConstantSerial,
    /// Last register belongs to a different serial.
    SelfRejecting,
}

impl StormArg {
    pub fn build(self, serial: u64) -> Box<dyn Storm> {
        match self {
            StormArg::Honest => Box::new(HonestStorm::default()),
            StormArg::HonestJoint => Box::new(HonestStorm {
                mode: BoltMode::JointMicro,
            }),
            StormArg::Classical => Box::new(ClassicalStorm),
            StormArg::CheatDuplicate => Box::new(CheatDuplicateStorm),
            StormArg::Affine => Box::new(AffineStorm),
            StormArg::ConstantSerial => Box::new(ConstantSerialStorm { serial }),
            StormArg::SelfRejecting => Box::new(SelfRejectingStorm),
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct GameArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value_t = StormArg::Honest)]
    pub storm: StormArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Oracle)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Serial index for the constant-serial storm.
    #[arg(long, default_value_t = 0)]
    pub serial: u64,
}

#[derive(Subcommand, Debug)]
pub enum LightningCmd {
    /// Print the scheme file (parameters and key) with its serial statistics.
    Setup(SchemeArgs),
    /// Generate a bolt.
    Gen {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::IdealizedProduct)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a bolt file: exact acceptance statistics plus one sampled run.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_name = "FILE")]
        bolt: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Oracle)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The uniqueness game against a chosen storm.
    Game(GameArgs),
    /// The collapsing experiment with the span-test distinguisher.
    Collapse {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical min-entropy of accepted serials.
    Minentropy(GameArgs),
}

#[derive(Serialize)]
struct SetupReport {
    #[serde(flatten)]
    file: SchemeFile,
    serial_collision_probability: f64,
    digest_min_entropy: f64,
}

#[derive(Serialize)]
pub struct SampledVerdict {
    pub accept: bool,
    pub serial: Option<String>,
    pub reason: Option<RejectReason>,
    pub register: Option<usize>,
}

impl SampledVerdict {
    pub fn of(v: &FullVerdict) -> Self {
        match v {
            FullVerdict::Accept { serial, .. } => Self {
                accept: true,
                serial: Some(serial.to_hex()),
                reason: None,
                register: None,
            },
            FullVerdict::Reject { reason, register } => Self {
                accept: false,
                serial: None,
                reason: Some(*reason),
                register: Some(*register),
            },
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    strategy: Strategy,
    claimed_serial: String,
    /// `None` when the strategy has no exact analysis for this bolt.
    exact: Option<FullVerifyReport>,
    /// Probability of accepting with the claimed serial.
    claimed_serial_probability: Option<f64>,
    sampled: SampledVerdict,
}

pub(crate) fn verify_bolt(scheme: &Scheme, bolt: &Bolt, strategy: Strategy, seed: u64) -> Result<Value, CliError> {
    bolt.check_shape(scheme)?;
    let exact = match scheme.full_verify_exact(bolt, strategy) {
        Ok(r) => Some(r),
        Err(qlight_core::LightningError::InvalidParams(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let claimed = bolt.serial.to_index();
    let claimed_serial_probability = exact.as_ref().map(|r| {
        r.serials
            .iter()
            .filter(|(y, _)| *y == claimed)
            .map(|(_, p)| p)
            .sum()
    });
    let verdict = scheme.full_verify(bolt, strategy, &mut rng::seeded(seed))?;
    let mut sampled = SampledVerdict::of(&verdict);
    if verdict.serial().is_some_and(|s| *s != bolt.serial) {
        sampled.accept = false;
        sampled.reason = Some(RejectReason::SerialMismatch);
    }
    to_value(&VerifyReport {
        strategy,
        claimed_serial: bolt.serial.to_hex(),
        exact,
        claimed_serial_probability,
        sampled,
    })
}

#[derive(Serialize)]
struct CollapseOutput {
    exact: CollapseReport,
    trials: u64,
    trials_b0: u64,
    trials_b1: u64,
    empirical: CollapseReport,
}

fn collapse(scheme: &Scheme, trials: u64, seed: u64) -> Result<CollapseOutput, CliError> {
    let (mut n, mut ones) = ([0u64; 2], [0u64; 2]);
    for t in 0..trials {
        let mut r = rng::stream(seed, t);
        let b: bool = r.random();
        n[b as usize] += 1;
        ones[b as usize] += scheme.collapse_trial(b, &mut r)? as u64;
    }
    let rate = |i: usize| if n[i] == 0 { 0.0 } else { ones[i] as f64 / n[i] as f64 };
    Ok(CollapseOutput {
        exact: scheme.collapse_exact()?,
        trials,
        trials_b0: n[0],
        trials_b1: n[1],
        empirical: CollapseReport {
            p0: rate(0),
            p1: rate(1),
            advantage: rate(0) - rate(1),
        },
    })
}

pub fn run(cmd: LightningCmd) -> Result<Value, CliError> {
    match cmd {
        LightningCmd::Setup(s) => {
            let scheme = s.load()?;
            to_value(&SetupReport {
                file: SchemeFile::of(&scheme),
                serial_collision_probability: scheme.serial_collision_probability()?,
                digest_min_entropy: scheme.digest_min_entropy()?,
            })
        }
        LightningCmd::Gen { scheme, mode, seed } => {
            let scheme = scheme.load()?;
            to_value(&scheme.gen_bolt(&mut rng::seeded(seed), mode.into())?)
        }
        LightningCmd::Verify {
            scheme,
            bolt,
            strategy,
            seed,
        } => {
            let scheme = scheme.load()?;
            let bolt: Bolt = read_json(&bolt)?;
            verify_bolt(&scheme, &bolt, strategy.into(), seed)
        }
        LightningCmd::Game(g) => {
            let scheme = g.scheme.load()?;
            let storm = g.storm.build(g.serial);
            to_value(&scheme.uniqueness_game(storm.as_ref(), g.strategy.into(), g.trials, g.seed)?)
        }
        LightningCmd::Collapse { scheme, trials, seed } => to_value(&collapse(&scheme.load()?, trials, seed)?),
        LightningCmd::Minentropy(g) => {
            let scheme = g.scheme.load()?;
            let storm = g.storm.build(g.serial);
            let report = scheme.minentropy_probe(storm.as_ref(), g.strategy.into(), g.trials, g.seed)?;
            let mut v = to_value(&report)?;
            v["digest_min_entropy"] = json!(scheme.digest_min_entropy()?);
            Ok(v)
        }
    }
}
