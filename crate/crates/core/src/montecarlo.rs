//! Direct simulation of the ensemble game.
//!
//! Each turn a uniformly random player is chosen and plays the game the
//! schedule prescribes. Heads makes the player a winner and pays +1; tails
//! makes it a loser and pays −1. The running average payoff converges almost
//! surely to the exact mean, which [`slln_check`] tests replication by
//! replication.
//!
//! Randomness comes from ChaCha8. A run with seed `s` draws from stream 0 of
//! `ChaCha8Rng::seed_from_u64(s)`; replication `k` of a check uses stream
//! `k + 1` of the same seed, so replications never share a stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_ring, neighbor_index_raw, Configuration, ParamVector, PatternSpec};
use crate::means;

/// Checkpoints kept per trajectory, regardless of run length.
pub const MAX_CHECKPOINTS: u64 = 10_000;

/// Batches used for the batch-means variance estimate.
pub const BATCHES: u64 = 100;

/// `|z|` above this flags a disagreement with the exact mean.
pub const Z_THRESHOLD: f64 = 4.0;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Uniform over all configurations.
    Random,
    Fixed(Configuration),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n: usize,
    pub params: [f64; 4],
    pub pattern: PatternSpec,
    pub turns: u64,
    pub seed: u64,
    pub initial: InitialState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub spec: SimulationSpec,
    /// `(turn, S_turn / turn)` at evenly spaced turns, ending at the last one.
    pub trajectory: Vec<(u64, f64)>,
    pub total_profit: i64,
    pub final_mean: f64,
    /// Batch-means estimate of the asymptotic standard deviation of the
    /// per-turn payoff.
    pub sigma_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Game {
    A,
    B,
}

/// The ring of players, one bit per player.
struct Ensemble {
    n: usize,
    state: u64,
    p: [f64; 4],
}

impl Ensemble {
    #[inline]
    fn play<R: Rng>(&mut self, rng: &mut R, game: Game) -> i64 {
        let bit = rng.random_range(0..self.n);
        let p = match game {
            Game::A => 0.5,
            Game::B => self.p[neighbor_index_raw(self.n, self.state, bit) as usize],
        };
        if rng.random::<f64>() < p {
            self.state |= 1 << bit;
            1
        } else {
            self.state &= !(1 << bit);
            -1
        }
    }
}

/// Game played on turn `turn` (0-based).
#[inline]
fn scheduled<R: Rng>(pattern: &PatternSpec, turn: u64, rng: &mut R) -> Game {
    match *pattern {
        PatternSpec::GameB => Game::B,
        PatternSpec::Pattern { r, s } => {
            if turn % ((r + s) as u64) < (r as u64) {
                Game::A
            } else {
                Game::B
            }
        }
        PatternSpec::Mixture { gamma } => {
            if rng.random::<f64>() < gamma {
                Game::A
            } else {
                Game::B
            }
        }
    }
}

fn validate(spec: &SimulationSpec) -> Result<()> {
    check_ring(spec.n)?;
    ParamVector::new(spec.params)?;
    spec.pattern.validate()?;
    if spec.turns == 0 {
        return Err(Error::InvalidParameter("turns must be at least 1".into()));
    }
    if let InitialState::Fixed(x) = spec.initial {
        if x.n() != spec.n {
            return Err(Error::SizeMismatch {
                expected: spec.n,
                found: x.n(),
            });
        }
    }
    Ok(())
}

fn run_with<R: Rng>(spec: &SimulationSpec, rng: &mut R) -> SimulationRun {
    let mask = crate::game::full_mask(spec.n);
    let state = match spec.initial {
        InitialState::Random => rng.random::<u64>() & mask,
        InitialState::Fixed(x) => x.encode(),
    };
    let mut ensemble = Ensemble {
        n: spec.n,
        state,
        p: spec.params,
    };
    let every = spec.turns.div_ceil(MAX_CHECKPOINTS);
    let batches = BATCHES.min(spec.turns);
    let batch_len = spec.turns / batches;
    let mut batch_sums = Vec::with_capacity(batches as usize);
    let mut batch_sum = 0i64;
    let mut trajectory = Vec::new();
    let mut total = 0i64;
    for turn in 0..spec.turns {
        let game = scheduled(&spec.pattern, turn, rng);
        let payoff = ensemble.play(rng, game);
        total += payoff;
        batch_sum += payoff;
        let played = turn + 1;
        if played % batch_len == 0 && (batch_sums.len() as u64) < batches {
            batch_sums.push(batch_sum);
            batch_sum = 0;
        }
        if played % every == 0 || played == spec.turns {
            trajectory.push((played, total as f64 / played as f64));
        }
    }
    SimulationRun {
        spec: spec.clone(),
        trajectory,
        total_profit: total,
        final_mean: total as f64 / spec.turns as f64,
        sigma_hat: batch_sigma(&batch_sums, batch_len),
    }
}

/// `σ̂ = √(L · Var(batch means))` for batches of length `L`.
fn batch_sigma(sums: &[i64], len: u64) -> f64 {
    let k = sums.len();
    if k < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = sums.iter().map(|&s| s as f64 / len as f64).collect();
    let avg = means.iter().sum::<f64>() / k as f64;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (k - 1) as f64;
    (len as f64 * var).sqrt()
}

pub fn simulate(spec: &SimulationSpec) -> Result<SimulationRun> {
    validate(spec)?;
    Ok(run_with(spec, &mut stream_rng(spec.seed, 0)))
}

/// Visit counts of each configuration under game B, sampled every `thin`
/// turns after discarding `turns / 10` turns of burn-in.
pub fn occupancy(n: usize, params: [f64; 4], turns: u64, thin: u64, seed: u64) -> Result<Vec<u64>> {
    check_ring(n)?;
    if n > 20 {
        return Err(Error::InvalidParameter("occupancy counts need n <= 20".into()));
    }
    ParamVector::new(params)?;
    let thin = thin.max(1);
    let mut rng = stream_rng(seed, 0);
    let mut ensemble = Ensemble {
        n,
        state: rng.random::<u64>() & crate::game::full_mask(n),
        p: params,
    };
    let burn_in = turns / 10;
    let mut counts = vec![0u64; 1 << n];
    for turn in 0..turns {
        ensemble.play(&mut rng, Game::B);
        if turn >= burn_in && (turn - burn_in) % thin == 0 {
            counts[ensemble.state as usize] += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStat {
    pub stream: u64,
    pub final_mean: f64,
    pub sigma_hat: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllnReport {
    pub reference_mu: f64,
    pub turns: u64,
    pub replications: Vec<ReplicationStat>,
    pub grand_mean: f64,
    /// z of the grand mean, using the pooled batch-means variance.
    pub aggregate_z: f64,
    pub max_abs_z: f64,
    pub flagged: bool,
}

/// Runs replications and compares them with the exact mean from the
/// reduced chain.
pub fn slln_check(
    n: usize,
    params: &ParamVector<f64>,
    pattern: &PatternSpec,
    turns: u64,
    replications: usize,
    seed: u64,
) -> Result<SllnReport> {
    let exact = means::mean(n, params, pattern)?.mu;
    slln_check_against(exact, n, params, pattern, turns, replications, seed)
}

/// Same as [`slln_check`] against an arbitrary reference mean.
pub fn slln_check_against(
    reference_mu: f64,
    n: usize,
    params: &ParamVector<f64>,
    pattern: &PatternSpec,
    turns: u64,
    replications: usize,
    seed: u64,
) -> Result<SllnReport> {
    if replications == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let base = SimulationSpec {
        n,
        params: *params.as_array(),
        pattern: *pattern,
        turns,
        seed,
        initial: InitialState::Random,
    };
    validate(&base)?;
    let runs: Vec<SimulationRun> = (0..replications as u64)
        .into_par_iter()
        .map(|k| run_with(&base, &mut stream_rng(seed, k + 1)))
        .collect();
    let t = turns as f64;
    let stats: Vec<ReplicationStat> = runs
        .iter()
        .enumerate()
        .map(|(k, run)| ReplicationStat {
            stream: k as u64 + 1,
            final_mean: run.final_mean,
            sigma_hat: run.sigma_hat,
            z: (run.final_mean - reference_mu) / (run.sigma_hat / t.sqrt()),
        })
        .collect();
    let r = stats.len() as f64;
    let grand_mean = stats.iter().map(|s| s.final_mean).sum::<f64>() / r;
    let pooled_var = stats.iter().map(|s| s.sigma_hat * s.sigma_hat).sum::<f64>() / r;
    let aggregate_z = (grand_mean - reference_mu) / (pooled_var / (r * t)).sqrt();
    let max_abs_z = stats.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    let flagged = !(max_abs_z <= Z_THRESHOLD && aggregate_z.abs() <= Z_THRESHOLD);
    Ok(SllnReport {
        reference_mu,
        turns,
        replications: stats,
        grand_mean,
        aggregate_z,
        max_abs_z,
        flagged,
    })
}
