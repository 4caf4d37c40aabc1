//! Seeded Monte-Carlo play.
//!
//! Game `k` of a batch seeded with `s` uses a ChaCha8 stream seeded with
//! `s + k`, so serial and parallel batches produce the same games. A round
//! is won when `u < p`, where `u = k / 2^53` comes from the top 53 bits of
//! the next 64-bit output and the comparison is exact.

use std::sync::Arc;

use num::{BigInt, One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Strategy};
use crate::horizon::DeadlineTable;
use crate::numeric::rational::{self, Rational};

pub const RNG_NAME: &str = "ChaCha8";

/// Game rules for simulation. Unlike [`GameSpec`] this admits `p = 0` and
/// `p = 1` through [`SimGame::degenerate`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimGame {
    p: Rational,
    goal: usize,
    threshold: u64,
}

fn win_threshold(p: &Rational) -> u64 {
    let scaled = p * Rational::from_integer(BigInt::one() << 53);
    let k = scaled.ceil().to_integer();
    u64::try_from(k).expect("p lies in [0, 1]")
}

impl SimGame {
    pub fn new(spec: &GameSpec) -> Self {
        SimGame {
            threshold: win_threshold(spec.p()),
            p: spec.p().clone(),
            goal: spec.goal(),
        }
    }

    /// Allows `0 <= p <= 1`.
    pub fn degenerate(p: Rational, goal: usize) -> Result<Self> {
        if p < Rational::zero() || p > Rational::one() {
            return Err(Error::Probability(rational::format_ratio(&p)));
        }
        if goal < 2 {
            return Err(Error::Goal(goal));
        }
        Ok(SimGame {
            threshold: win_threshold(&p),
            p,
            goal,
        })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn goal(&self) -> usize {
        self.goal
    }
}

/// How stakes are chosen during play.
#[derive(Clone, Debug)]
pub enum Policy {
    Fixed(Strategy),
    /// Deadline-optimal stakes for the remaining number of rounds.
    Optimal(Arc<dyn DeadlineTable>),
}

impl Policy {
    fn check(&self, game: &SimGame, horizon: Option<usize>) -> Result<()> {
        match self {
            Policy::Fixed(s) => {
                let n = game.goal;
                if s.len() != n - 1 {
                    return Err(Error::Strategy(format!("length {} != {}", s.len(), n - 1)));
                }
                for (k, &x) in s.stakes().iter().enumerate() {
                    let bound = (k + 1).min(n - k - 1);
                    if x < 1 || x > bound {
                        return Err(Error::Strategy(format!(
                            "stake {x} at capital {} outside 1..={bound}",
                            k + 1
                        )));
                    }
                }
                Ok(())
            }
            Policy::Optimal(table) => {
                let Some(t) = horizon else {
                    return Err(Error::Domain("optimal play needs a horizon".into()));
                };
                if table.spec().goal() != game.goal || table.spec().p() != &game.p {
                    return Err(Error::Domain("table was built for a different game".into()));
                }
                if table.horizon() < t {
                    return Err(Error::Domain(format!(
                        "table covers {} rounds, horizon is {t}",
                        table.horizon()
                    )));
                }
                Ok(())
            }
        }
    }

    fn stake(&self, capital: usize, remaining: Option<usize>) -> usize {
        match self {
            Policy::Fixed(s) => s.stake(capital),
            Policy::Optimal(table) => table
                .stake(capital, remaining.expect("checked"))
                .expect("interior capital with time left"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// Capital before the round.
    pub capital: usize,
    pub stake: usize,
    pub won: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Winner,
    Loser,
    DeadlineExpired,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub rng: &'static str,
    pub seed: u64,
    pub start: usize,
    pub rounds: Vec<Round>,
    pub exit: Exit,
    pub final_capital: usize,
    pub duration: usize,
}

fn check_start(game: &SimGame, start: usize) -> Result<()> {
    if start == 0 || start >= game.goal {
        return Err(Error::Domain(format!(
            "capital must lie in 1..={}, got {start}",
            game.goal - 1
        )));
    }
    Ok(())
}

fn play(game: &SimGame, policy: &Policy, start: usize, horizon: Option<usize>, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut capital = start;
    let mut rounds = Vec::new();
    let exit = loop {
        if capital == 0 {
            break Exit::Loser;
        }
        if capital == game.goal {
            break Exit::Winner;
        }
        let remaining = horizon.map(|t| t - rounds.len());
        if remaining == Some(0) {
            break Exit::DeadlineExpired;
        }
        let stake = policy.stake(capital, remaining);
        let won = (rng.next_u64() >> 11) < game.threshold;
        rounds.push(Round { capital, stake, won });
        if won {
            capital += stake;
        } else {
            capital -= stake;
        }
    };
    Trajectory {
        rng: RNG_NAME,
        seed,
        start,
        duration: rounds.len(),
        rounds,
        exit,
        final_capital: capital,
    }
}

/// One game from `start`; `horizon: None` plays until absorption.
pub fn simulate_game(
    game: &SimGame,
    policy: &Policy,
    start: usize,
    horizon: Option<usize>,
    seed: u64,
) -> Result<Trajectory> {
    check_start(game, start)?;
    policy.check(game, horizon)?;
    Ok(play(game, policy, start, horizon, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub rng: &'static str,
    pub seed: u64,
    pub games: usize,
    pub wins: usize,
    pub losses: usize,
    pub expired: usize,
    pub win_rate: f64,
    pub win_rate_se: f64,
    pub mean_duration: f64,
    pub duration_se: f64,
    /// Mean duration over won games, if any.
    pub mean_duration_given_win: Option<f64>,
}

/// Standard error of a mean from the sum and sum of squares of `n` samples.
fn standard_error(sum: f64, sum_sq: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (var / nf).sqrt()
}

/// `games` independent games seeded `seed, seed + 1, ...`.
pub fn monte_carlo(
    game: &SimGame,
    policy: &Policy,
    start: usize,
    horizon: Option<usize>,
    games: usize,
    seed: u64,
    parallel: bool,
) -> Result<Summary> {
    if games == 0 {
        return Err(Error::Domain("at least one game is required".into()));
    }
    check_start(game, start)?;
    policy.check(game, horizon)?;
    let outcome = |k: usize| {
        let t = play(game, policy, start, horizon, seed.wrapping_add(k as u64));
        (t.exit, t.duration as u64)
    };
    let results: Vec<(Exit, u64)> = if parallel {
        (0..games).into_par_iter().map(outcome).collect()
    } else {
        (0..games).map(outcome).collect()
    };
    let count = |e: Exit| results.iter().filter(|(x, _)| *x == e).count();
    let (wins, losses, expired) = (count(Exit::Winner), count(Exit::Loser), count(Exit::DeadlineExpired));
    let dur_sum: u128 = results.iter().map(|&(_, d)| d as u128).sum();
    let dur_sq: u128 = results.iter().map(|&(_, d)| (d as u128) * (d as u128)).sum();
    let win_dur: u128 = results
        .iter()
        .filter(|(e, _)| *e == Exit::Winner)
        .map(|&(_, d)| d as u128)
        .sum();
    let n = games as f64;
    let win_rate = wins as f64 / n;
    Ok(Summary {
        rng: RNG_NAME,
        seed,
        games,
        wins,
        losses,
        expired,
        win_rate,
        win_rate_se: standard_error(wins as f64, wins as f64, games),
        mean_duration: dur_sum as f64 / n,
        duration_se: standard_error(dur_sum as f64, dur_sq as f64, games),
        mean_duration_given_win: (wins > 0).then(|| win_dur as f64 / wins as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{bold, timid};
    use crate::horizon::build_table_dyn;
    use crate::numeric::rational::ratio;
    use crate::numeric::NumericMode;

    #[test]
    fn certain_win_walks_up() {
        let game = SimGame::degenerate(ratio(1, 1), 10).unwrap();
        let t = simulate_game(&game, &Policy::Fixed(timid(10).unwrap()), 3, None, 7).unwrap();
        assert_eq!(t.exit, Exit::Winner);
        assert_eq!(t.duration, 7);
        let game = SimGame::degenerate(ratio(0, 1), 10).unwrap();
        let t = simulate_game(&game, &Policy::Fixed(timid(10).unwrap()), 3, None, 7).unwrap();
        assert_eq!(t.exit, Exit::Loser);
        assert_eq!(t.duration, 3);
    }

    #[test]
    fn replay_is_exact() {
        let spec = GameSpec::new(ratio(1, 3), 9).unwrap();
        let game = SimGame::new(&spec);
        let pol = Policy::Fixed(timid(9).unwrap());
        let a = simulate_game(&game, &pol, 4, None, 42).unwrap();
        let b = simulate_game(&game, &pol, 4, None, 42).unwrap();
        assert_eq!(a, b);
        let mut c = a.start;
        for r in &a.rounds {
            assert_eq!(r.capital, c);
            c = if r.won { c + r.stake } else { c - r.stake };
        }
        assert_eq!(c, a.final_capital);
    }

    #[test]
    fn deadline_and_optimal_policy() {
        let spec = GameSpec::new(ratio(3, 5), 4).unwrap();
        let table = build_table_dyn(&spec, 2, NumericMode::Exact).unwrap();
        let game = SimGame::new(&spec);
        let pol = Policy::Optimal(table);
        for seed in 0..50 {
            let t = simulate_game(&game, &pol, 1, Some(2), seed).unwrap();
            assert!(t.duration <= 2);
            assert_eq!(t.rounds[0].stake, 1);
            if t.duration == 2 {
                assert_eq!(t.rounds[1].stake, 2);
            }
            if t.exit == Exit::DeadlineExpired {
                assert!(t.final_capital > 0 && t.final_capital < 4);
            }
        }
        assert!(simulate_game(&game, &pol, 1, None, 0).is_err());
        assert!(simulate_game(&game, &pol, 1, Some(3), 0).is_err());
    }

    #[test]
    fn single_game_summary_matches_trajectory() {
        let spec = GameSpec::new(ratio(3, 5), 200).unwrap();
        let game = SimGame::new(&spec);
        let pol = Policy::Fixed(bold(200).unwrap());
        let t = simulate_game(&game, &pol, 100, None, 5).unwrap();
        let s = monte_carlo(&game, &pol, 100, None, 1, 5, false).unwrap();
        assert_eq!(s.mean_duration, t.duration as f64);
        assert_eq!(s.wins, usize::from(t.exit == Exit::Winner));
    }

    #[test]
    fn threshold_is_exact() {
        assert_eq!(win_threshold(&ratio(1, 2)), 1 << 52);
        assert_eq!(win_threshold(&ratio(1, 1)), 1 << 53);
        assert_eq!(win_threshold(&ratio(0, 1)), 0);
        assert_eq!(win_threshold(&ratio(1, 3)), (1u64 << 53) / 3 + 1);
    }
}
