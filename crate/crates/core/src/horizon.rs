//! Deadline-optimal play.
//!
//! `f(i, t)` is the largest probability of reaching `N` within `t` rounds
//! from capital `i`:
//!
//! ```text
//! f(i, t) = max_{1 <= x <= min(i, N - i)} q f(i - x, t - 1) + p f(i + x, t - 1)
//! f(0, t) = 0,  f(N, t) = 1,  f(i, 0) = 0 for i < N
//! ```
//!
//! Ties go to the largest maximizing stake.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{require_valid, GameSpec, Strategy};
use crate::numeric::{Decimal, Number, NumericMode, Rational, Scalar};

/// Above this many stake evaluations `auto` mode leaves exact arithmetic.
pub const EXACT_WORK_LIMIT: u128 = 100_000;

const PARALLEL_MIN_GOAL: usize = 256;

/// Stake evaluations needed for a `T`-round table: `T * sum_i min(i, N - i)`.
pub fn dp_work_units(spec: &GameSpec, horizon: usize) -> u128 {
    let n = spec.goal();
    let per_row: u128 = (1..n).map(|i| spec.max_stake(i) as u128).sum();
    per_row * horizon as u128
}

pub fn auto_mode(spec: &GameSpec, horizon: usize) -> NumericMode {
    if dp_work_units(spec, horizon) <= EXACT_WORK_LIMIT {
        NumericMode::Exact
    } else {
        NumericMode::Decimal
    }
}

fn initial_row<S: Scalar>(n: usize) -> Vec<S> {
    let mut row = vec![S::zero(); n + 1];
    row[n] = S::one();
    row
}

/// Value of staking `x` at capital `i` given the next row.
fn continuation<S: Scalar>(q: &S, p: &S, prev: &[S], i: usize, x: usize) -> S {
    S::mix(q, &prev[i - x], p, &prev[i + x])
}

fn best_at<S: Scalar>(spec: &GameSpec, q: &S, p: &S, prev: &[S], i: usize) -> (usize, S) {
    let mut best_x = 1;
    let mut best = continuation(q, p, prev, i, 1);
    for x in 2..=spec.max_stake(i) {
        let v = continuation(q, p, prev, i, x);
        if v.ties(&best) {
            best_x = x;
            if v > best {
                best = v;
            }
        } else if v > best {
            best_x = x;
            best = v;
        }
    }
    (best_x, best)
}

/// One backward step: row `t` from row `t - 1`.
fn step<S: Scalar>(spec: &GameSpec, q: &S, p: &S, prev: &[S]) -> (Vec<S>, Vec<usize>) {
    let n = spec.goal();
    let interior: Vec<(usize, S)> = if n >= PARALLEL_MIN_GOAL {
        (1..n).into_par_iter().map(|i| best_at(spec, q, p, prev, i)).collect()
    } else {
        (1..n).map(|i| best_at(spec, q, p, prev, i)).collect()
    };
    let mut values = Vec::with_capacity(n + 1);
    let mut stakes = Vec::with_capacity(n + 1);
    values.push(S::zero());
    stakes.push(0);
    for (x, v) in interior {
        values.push(v);
        stakes.push(x);
    }
    values.push(S::one());
    stakes.push(0);
    (values, stakes)
}

fn weights<S: Scalar>(spec: &GameSpec) -> (S, S) {
    (S::from_rational(&spec.q()), S::from_rational(spec.p()))
}

/// Optimal stake and survival probability at capital `i` with `horizon`
/// rounds left. Keeps only two rows in memory.
pub fn best_stake<S: Scalar>(spec: &GameSpec, capital: usize, horizon: usize) -> Result<(usize, S)> {
    spec.check_capital(capital)?;
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let (q, p) = weights::<S>(spec);
    let mut row = initial_row::<S>(spec.goal());
    for _ in 1..horizon {
        row = step(spec, &q, &p, &row).0;
    }
    Ok(best_at(spec, &q, &p, &row, capital))
}

/// Full `f(i, t)` table with optimal stakes for `t = 0..=T`.
#[derive(Clone, Debug)]
pub struct HorizonTable<S> {
    spec: GameSpec,
    horizon: usize,
    values: Vec<Vec<S>>,
    stakes: Vec<Vec<usize>>,
}

pub fn build_table<S: Scalar>(spec: &GameSpec, horizon: usize) -> Result<HorizonTable<S>> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let (q, p) = weights::<S>(spec);
    let mut values = vec![initial_row::<S>(spec.goal())];
    let mut stakes = vec![vec![0; spec.goal() + 1]];
    for t in 1..=horizon {
        let (v, s) = step(spec, &q, &p, &values[t - 1]);
        values.push(v);
        stakes.push(s);
    }
    Ok(HorizonTable {
        spec: spec.clone(),
        horizon,
        values,
        stakes,
    })
}

impl<S: Scalar> HorizonTable<S> {
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `f(i, t)` for `0 <= i <= N`, `0 <= t <= T`.
    pub fn value(&self, capital: usize, t: usize) -> &S {
        &self.values[t][capital]
    }

    pub fn row(&self, t: usize) -> &[S] {
        &self.values[t]
    }

    /// Optimal stake, `None` at the absorbing capitals or with no time left.
    pub fn stake(&self, capital: usize, t: usize) -> Option<usize> {
        if t == 0 || capital == 0 || capital >= self.spec.goal() {
            None
        } else {
            Some(self.stakes[t][capital])
        }
    }

    /// Stakes for capitals `1..N` with `t` rounds left.
    pub fn strategy_at(&self, t: usize) -> Option<Strategy> {
        (t >= 1 && t <= self.horizon)
            .then(|| Strategy::from_stakes(self.stakes[t][1..self.spec.goal()].to_vec()))
    }

    /// Survival probability of each admissible stake with `t` rounds left.
    pub fn options(&self, capital: usize, t: usize) -> Vec<(usize, S)> {
        if t == 0 || t > self.horizon || capital == 0 || capital >= self.spec.goal() {
            return Vec::new();
        }
        let (q, p) = weights::<S>(&self.spec);
        (1..=self.spec.max_stake(capital))
            .map(|x| (x, continuation(&q, &p, &self.values[t - 1], capital, x)))
            .collect()
    }
}

/// Win probability within `T` rounds when following a fixed stake table.
pub fn horizon_win_prob<S: Scalar>(spec: &GameSpec, s: &Strategy, horizon: usize) -> Result<Vec<S>> {
    require_valid(spec, s)?;
    let n = spec.goal();
    let (q, p) = weights::<S>(spec);
    let mut row = initial_row::<S>(n);
    for _ in 0..horizon {
        let mut next = initial_row::<S>(n);
        for (i, cell) in next.iter_mut().enumerate().take(n).skip(1) {
            *cell = continuation(&q, &p, &row, i, s.stake(i));
        }
        row = next;
    }
    Ok(row[1..n].to_vec())
}

/// Backend-erased view of a [`HorizonTable`].
pub trait DeadlineTable: Send + Sync + std::fmt::Debug {
    fn spec(&self) -> &GameSpec;
    fn horizon(&self) -> usize;
    fn mode(&self) -> NumericMode;
    fn value(&self, capital: usize, t: usize) -> Number;
    fn stake(&self, capital: usize, t: usize) -> Option<usize>;
    /// `(stake, survival, optimal)` for every admissible stake.
    fn options(&self, capital: usize, t: usize) -> Vec<(usize, Number, bool)>;
}

impl<S: Scalar> DeadlineTable for HorizonTable<S> {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn mode(&self) -> NumericMode {
        S::MODE
    }

    fn value(&self, capital: usize, t: usize) -> Number {
        self.values[t][capital].to_number()
    }

    fn stake(&self, capital: usize, t: usize) -> Option<usize> {
        HorizonTable::stake(self, capital, t)
    }

    fn options(&self, capital: usize, t: usize) -> Vec<(usize, Number, bool)> {
        let opts = HorizonTable::options(self, capital, t);
        let best = &self.values[t][capital];
        opts.into_iter()
            .map(|(x, v)| {
                let optimal = v.ties(best);
                (x, v.to_number(), optimal)
            })
            .collect()
    }
}

pub fn build_table_dyn(spec: &GameSpec, horizon: usize, mode: NumericMode) -> Result<Arc<dyn DeadlineTable>> {
    Ok(match mode {
        NumericMode::Exact => Arc::new(build_table::<Rational>(spec, horizon)?),
        NumericMode::Decimal => Arc::new(build_table::<Decimal>(spec, horizon)?),
        NumericMode::Float => Arc::new(build_table::<f64>(spec, horizon)?),
    })
}

pub fn best_stake_dyn(spec: &GameSpec, capital: usize, horizon: usize, mode: NumericMode) -> Result<(usize, Number)> {
    Ok(match mode {
        NumericMode::Exact => {
            let (x, v) = best_stake::<Rational>(spec, capital, horizon)?;
            (x, v.to_number())
        }
        NumericMode::Decimal => {
            let (x, v) = best_stake::<Decimal>(spec, capital, horizon)?;
            (x, v.to_number())
        }
        NumericMode::Float => {
            let (x, v) = best_stake::<f64>(spec, capital, horizon)?;
            (x, v.to_number())
        }
    })
}

/// Top-row optimal strategy and survival values for one `(p, N, T)`.
#[derive(Clone, Debug)]
pub struct StorySection {
    pub spec: GameSpec,
    pub horizon: usize,
    pub mode: NumericMode,
    /// Stakes for capitals `1..N` with the full horizon left.
    pub stakes: Vec<usize>,
    /// `f(i, T)` for capitals `1..N`.
    pub values: Vec<Number>,
}

#[derive(Clone, Debug)]
pub struct StoryItem {
    pub p: Rational,
    pub goal: usize,
    pub horizon: usize,
    pub outcome: std::result::Result<StorySection, Error>,
}

/// Optimal strategies for a batch of `(p, N, T)` triples. Invalid triples
/// are reported in place and do not stop the batch.
pub fn best_strat_story(
    triples: &[(Rational, usize, usize)],
    choice: crate::numeric::ModeChoice,
) -> Vec<StoryItem> {
    triples
        .iter()
        .map(|(p, goal, horizon)| {
            let outcome = (|| {
                let spec = GameSpec::new(p.clone(), *goal)?;
                let mode = choice.resolve(|| auto_mode(&spec, *horizon));
                let table = build_table_dyn(&spec, *horizon, mode)?;
                let n = spec.goal();
                Ok(StorySection {
                    stakes: (1..n).map(|i| table.stake(i, *horizon).expect("interior")).collect(),
                    values: (1..n).map(|i| table.value(i, *horizon)).collect(),
                    spec,
                    horizon: *horizon,
                    mode,
                })
            })();
            StoryItem {
                p: p.clone(),
                goal: *goal,
                horizon: *horizon,
                outcome,
            }
        })
        .collect()
}

impl<S: Scalar> HorizonTable<S> {
    /// Exact copy of the table, when the backend is exact.
    pub fn to_exact(&self) -> HorizonTable<Rational> {
        HorizonTable {
            spec: self.spec.clone(),
            horizon: self.horizon,
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.to_rational()).collect())
                .collect(),
            stakes: self.stakes.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{breiman_kelly, timid};
    use crate::numeric::rational::ratio;
    use crate::numeric::ModeChoice;
    use num::{Signed, Zero};

    fn spec(p: Rational, n: usize) -> GameSpec {
        GameSpec::new(p, n).unwrap()
    }

    #[test]
    fn small_examples() {
        let sp = spec(ratio(3, 5), 4);
        assert_eq!(best_stake::<Rational>(&sp, 2, 1).unwrap(), (2, ratio(3, 5)));
        assert_eq!(best_stake::<Rational>(&sp, 1, 2).unwrap(), (1, ratio(9, 25)));
        // unreachable in one round: value 0, largest stake wins the tie
        let sp10 = spec(ratio(3, 5), 10);
        for i in 1..5 {
            assert_eq!(best_stake::<Rational>(&sp10, i, 1).unwrap(), (i, ratio(0, 1)));
        }
        let half = spec(ratio(1, 2), 4);
        assert_eq!(*build_table::<Rational>(&half, 2).unwrap().value(2, 2), ratio(1, 2));
    }

    #[test]
    fn domain_errors() {
        let sp = spec(ratio(3, 5), 4);
        assert!(best_stake::<Rational>(&sp, 0, 2).is_err());
        assert!(best_stake::<Rational>(&sp, 4, 2).is_err());
        assert!(best_stake::<Rational>(&sp, 2, 0).is_err());
        assert!(build_table::<Rational>(&sp, 0).is_err());
    }

    #[test]
    fn table_boundaries_and_monotonicity() {
        let sp = spec(ratio(11, 20), 12);
        let table = build_table::<Rational>(&sp, 15).unwrap();
        for t in 0..=15 {
            assert_eq!(*table.value(0, t), ratio(0, 1));
            assert_eq!(*table.value(12, t), ratio(1, 1));
            for i in 1..12 {
                if t == 0 {
                    assert_eq!(*table.value(i, 0), ratio(0, 1));
                } else {
                    assert!(table.value(i, t) >= table.value(i, t - 1));
                    let x = table.stake(i, t).unwrap();
                    assert!(x >= 1 && x <= sp.max_stake(i));
                }
                assert!(table.value(i, t) <= table.value(i + 1, t));
            }
        }
    }

    #[test]
    fn converges_to_ruin_probability() {
        let sp = spec(ratio(1, 3), 3);
        let table = build_table::<Decimal>(&sp, 60).unwrap();
        let mut last = Decimal::zero();
        for t in 1..=60 {
            assert!(*table.value(1, t) >= last);
            last = *table.value(1, t);
        }
        let gap = (ratio(1, 7) - last.to_rational()).abs();
        assert!(gap < ratio(1, 1_000_000));
    }

    #[test]
    fn large_goal_spot_value() {
        let sp = spec(ratio(11, 20), 1000);
        assert_eq!(auto_mode(&sp, 30), NumericMode::Decimal);
        let table = build_table::<Decimal>(&sp, 30).unwrap();
        assert_eq!(table.stake(999, 1), Some(1));
        let gap = (table.value(999, 1).to_rational() - ratio(11, 20)).abs();
        assert!(gap < ratio(1, 10_i64.pow(18)) * ratio(1, 10_i64.pow(13)));
        let exact = build_table::<Rational>(&sp, 1).unwrap();
        assert_eq!(*exact.value(999, 1), ratio(11, 20));
    }

    #[test]
    fn fixed_strategy_horizon() {
        let sp = spec(ratio(1, 3), 3);
        let g = horizon_win_prob::<Rational>(&sp, &timid(3).unwrap(), 2).unwrap();
        assert_eq!(g[0], ratio(1, 9));
        let big = spec(ratio(3, 5), 200);
        let s = breiman_kelly(200, &ratio(1, 10), &ratio(4, 5)).unwrap();
        let g = horizon_win_prob::<Decimal>(&big, &s, 60).unwrap();
        let (_, best) = best_stake::<Decimal>(&big, 100, 60).unwrap();
        assert!(g[99] >= Decimal::zero() && g[99] <= best);
    }

    #[test]
    fn options_and_story() {
        let sp = spec(ratio(3, 5), 4);
        let table = build_table::<Rational>(&sp, 2).unwrap();
        assert_eq!(table.options(2, 1), vec![(1, ratio(0, 1)), (2, ratio(3, 5))]);
        assert_eq!(table.options(1, 1), vec![(1, ratio(0, 1))]);
        let dyn_opts = DeadlineTable::options(&table, 2, 1);
        assert_eq!(dyn_opts.iter().filter(|o| o.2).map(|o| o.0).collect::<Vec<_>>(), vec![2]);

        let story = best_strat_story(&[], ModeChoice::Auto);
        assert!(story.is_empty());
        let story = best_strat_story(
            &[(ratio(3, 5), 4, 2), (ratio(3, 2), 4, 2), (ratio(1, 2), 6, 3)],
            ModeChoice::Auto,
        );
        assert_eq!(story.len(), 3);
        let first = story[0].outcome.as_ref().unwrap();
        assert_eq!(first.stakes, table.strategy_at(2).unwrap().stakes());
        assert_eq!(first.values[0], Number::Exact(ratio(9, 25)));
        assert!(story[1].outcome.is_err());
        assert!(story[2].outcome.is_ok());
    }
}
