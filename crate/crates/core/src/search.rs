//! Grid searches over the Kelly and Breiman-Kelly families.
//!
//! For a resolution `h` the Kelly fractions are `h, 2h, ...` strictly below
//! one and the bold thresholds are `0, h, 2h, ...` up to and including one.
//! Grid points are evaluated in parallel and reduced in grid order, so the
//! winner does not depend on scheduling.

use std::collections::HashMap;

use num::{One, Zero};
use rayon::prelude::*;

use crate::chain::ChainReport;
use crate::error::{Error, Result};
use crate::game::{breiman_kelly, kelly, GameSpec, Strategy};
use crate::horizon::horizon_win_prob;
use crate::numeric::rational::int;
use crate::numeric::{Decimal, Number, NumericMode, Rational, Scalar};

fn check_resolution(h: &Rational) -> Result<()> {
    if h <= &Rational::zero() || h >= &Rational::one() {
        return Err(Error::Domain(format!(
            "resolution must satisfy 0 < h < 1, got {}",
            crate::numeric::rational::format_ratio(h)
        )));
    }
    Ok(())
}

/// Kelly fractions `k h` with `0 < k h < 1`.
pub fn fraction_grid(h: &Rational) -> Result<Vec<Rational>> {
    check_resolution(h)?;
    Ok((1..)
        .map(|k| int(k) * h)
        .take_while(|f| f < &Rational::one())
        .collect())
}

/// Bold thresholds `k h` in `[0, 1]`, with `1` appended when off-grid.
pub fn threshold_grid(h: &Rational) -> Result<Vec<Rational>> {
    check_resolution(h)?;
    let mut grid: Vec<Rational> = (0..)
        .map(|k| int(k) * h)
        .take_while(|c| c <= &Rational::one())
        .collect();
    if grid.last() != Some(&Rational::one()) {
        grid.push(Rational::one());
    }
    Ok(grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Backend for the grid evaluations.
    pub mode: NumericMode,
    /// Re-evaluate the winner in exact arithmetic.
    pub verify_exact: bool,
    /// Keep every grid point in the result.
    pub keep_grid: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: NumericMode::Decimal,
            verify_exact: true,
            keep_grid: false,
        }
    }
}

/// Measures of one strategy at the searched capital.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub f: Rational,
    /// Bold threshold; `None` for pure Kelly.
    pub c: Option<Rational>,
    /// Probability of reaching `N` within the horizon, when one is set.
    pub horizon_win_prob: Option<Number>,
    pub win_prob: Number,
    /// Unbounded expected duration, exits at either end.
    pub exp_duration: Number,
    pub exp_duration_given_win: Option<Number>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Probability of reaching `N` within the horizon.
    HorizonWinProb,
    /// Probability of ever reaching `N`.
    WinProb,
    /// Expected duration subject to a win-probability floor.
    ExpDuration,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::HorizonWinProb => "horizon_win_prob",
            Objective::WinProb => "win_prob",
            Objective::ExpDuration => "exp_duration",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub spec: GameSpec,
    pub capital: usize,
    pub horizon: Option<usize>,
    pub best: GridPoint,
    pub objective: Objective,
    pub objective_value: Number,
    pub grid_resolution: Rational,
    pub evaluations: usize,
    /// Backend used for the grid.
    pub mode: NumericMode,
    /// Whether `best` holds exact re-evaluated values.
    pub verified_exact: bool,
    /// Set by [`kelly_contest`] when no fraction met the confidence level.
    pub constraint_unmet: bool,
    pub grid: Vec<GridPoint>,
}

struct Eval<S> {
    horizon: Option<S>,
    win: S,
    duration: S,
    duration_given_win: Option<S>,
}

fn evaluate<S: Scalar>(spec: &GameSpec, s: &Strategy, capital: usize, horizon: Option<usize>) -> Result<Eval<S>> {
    let report = ChainReport::<S>::compute(spec, s)?;
    let within = match horizon {
        Some(t) => Some(horizon_win_prob::<S>(spec, s, t)?.swap_remove(capital - 1)),
        None => None,
    };
    let k = capital - 1;
    Ok(Eval {
        horizon: within,
        win: report.win_prob[k].clone(),
        duration: report.exp_duration[k].clone(),
        duration_given_win: report.exp_duration_given_win[k].clone(),
    })
}

/// Evaluates each distinct stake table once; results follow `strategies`.
fn evaluate_all<S: Scalar>(
    spec: &GameSpec,
    strategies: &[Strategy],
    capital: usize,
    horizon: Option<usize>,
) -> Result<Vec<std::sync::Arc<Eval<S>>>> {
    let mut index: HashMap<&Strategy, usize> = HashMap::new();
    let mut unique: Vec<&Strategy> = Vec::new();
    let slots: Vec<usize> = strategies
        .iter()
        .map(|s| {
            *index.entry(s).or_insert_with(|| {
                unique.push(s);
                unique.len() - 1
            })
        })
        .collect();
    let evals: Vec<std::sync::Arc<Eval<S>>> = unique
        .par_iter()
        .map(|s| evaluate::<S>(spec, s, capital, horizon).map(std::sync::Arc::new))
        .collect::<Result<_>>()?;
    Ok(slots.into_iter().map(|k| evals[k].clone()).collect())
}

fn to_point<S: Scalar>(f: &Rational, c: Option<&Rational>, e: &Eval<S>) -> GridPoint {
    GridPoint {
        f: f.clone(),
        c: c.cloned(),
        horizon_win_prob: e.horizon.as_ref().map(Scalar::to_number),
        win_prob: e.win.to_number(),
        exp_duration: e.duration.to_number(),
        exp_duration_given_win: e.duration_given_win.as_ref().map(Scalar::to_number),
    }
}

/// `a` strictly greater than `b` beyond the tie tolerance.
fn beats<S: Scalar>(a: &S, b: &S) -> bool {
    a > b && !a.ties(b)
}

struct Bk<S> {
    params: Vec<(Rational, Rational)>,
    evals: Vec<std::sync::Arc<Eval<S>>>,
    winner: usize,
}

fn run_bk<S: Scalar>(
    spec: &GameSpec,
    capital: usize,
    horizon: Option<usize>,
    h: &Rational,
) -> Result<Bk<S>> {
    let fs = fraction_grid(h)?;
    let cs = threshold_grid(h)?;
    let mut params = Vec::with_capacity(fs.len() * cs.len());
    let mut strategies = Vec::with_capacity(fs.len() * cs.len());
    for f in &fs {
        for c in &cs {
            strategies.push(breiman_kelly(spec.goal(), f, c)?);
            params.push((f.clone(), c.clone()));
        }
    }
    let evals = evaluate_all::<S>(spec, &strategies, capital, horizon)?;
    let key = |e: &Eval<S>| e.horizon.clone().unwrap_or_else(|| e.win.clone());
    let mut winner = 0;
    for k in 1..evals.len() {
        let (a, b) = (&evals[k], &evals[winner]);
        let (ka, kb) = (key(a), key(b));
        let better = if beats(&ka, &kb) {
            true
        } else if ka.ties(&kb) {
            if beats(&b.duration, &a.duration) {
                true
            } else {
                a.duration.ties(&b.duration) && params[k].0 == params[winner].0
            }
        } else {
            false
        };
        if better {
            winner = k;
        }
    }
    Ok(Bk {
        params,
        evals,
        winner,
    })
}

fn exact_point(
    spec: &GameSpec,
    s: &Strategy,
    capital: usize,
    horizon: Option<usize>,
    f: &Rational,
    c: Option<&Rational>,
) -> Result<GridPoint> {
    Ok(to_point(f, c, &evaluate::<Rational>(spec, s, capital, horizon)?))
}

/// Best Breiman-Kelly pair `(f, c)` for reaching `N` from `capital`
/// within `horizon` rounds (`None`: no deadline).
///
/// Ties on the objective go to the smaller expected duration, then the
/// smaller `f`, then the larger `c`.
pub fn best_bk(
    spec: &GameSpec,
    capital: usize,
    horizon: Option<usize>,
    h: &Rational,
    opts: SearchOptions,
) -> Result<SearchResult> {
    spec.check_capital(capital)?;
    if horizon == Some(0) {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    match opts.mode {
        NumericMode::Exact => finish_bk(spec, capital, horizon, h, opts, run_bk::<Rational>(spec, capital, horizon, h)?),
        NumericMode::Decimal => finish_bk(spec, capital, horizon, h, opts, run_bk::<Decimal>(spec, capital, horizon, h)?),
        NumericMode::Float => finish_bk(spec, capital, horizon, h, opts, run_bk::<f64>(spec, capital, horizon, h)?),
    }
}

fn finish_bk<S: Scalar>(
    spec: &GameSpec,
    capital: usize,
    horizon: Option<usize>,
    h: &Rational,
    opts: SearchOptions,
    bk: Bk<S>,
) -> Result<SearchResult> {
    let (f, c) = &bk.params[bk.winner];
    let verify = opts.verify_exact && S::MODE != NumericMode::Exact;
    let best = if verify {
        let s = breiman_kelly(spec.goal(), f, c)?;
        exact_point(spec, &s, capital, horizon, f, Some(c))?
    } else {
        to_point(f, Some(c), &bk.evals[bk.winner])
    };
    let (objective, objective_value) = match &best.horizon_win_prob {
        Some(v) => (Objective::HorizonWinProb, v.clone()),
        None => (Objective::WinProb, best.win_prob.clone()),
    };
    let grid = if opts.keep_grid {
        bk.params
            .iter()
            .zip(&bk.evals)
            .map(|((f, c), e)| to_point(f, Some(c), e))
            .collect()
    } else {
        Vec::new()
    };
    Ok(SearchResult {
        spec: spec.clone(),
        capital,
        horizon,
        best,
        objective,
        objective_value,
        grid_resolution: h.clone(),
        evaluations: bk.params.len(),
        mode: S::MODE,
        verified_exact: verify || S::MODE == NumericMode::Exact,
        constraint_unmet: false,
        grid,
    })
}

/// [`best_bk`] for several `(capital, horizon)` pairs on one game.
pub fn best_bk_story(
    spec: &GameSpec,
    cases: &[(usize, Option<usize>)],
    h: &Rational,
    opts: SearchOptions,
) -> Vec<Result<SearchResult>> {
    cases
        .iter()
        .map(|&(capital, horizon)| best_bk(spec, capital, horizon, h, opts))
        .collect()
}

struct Contest<S> {
    fs: Vec<Rational>,
    evals: Vec<std::sync::Arc<Eval<S>>>,
    winner: usize,
    unmet: bool,
}

fn run_contest<S: Scalar>(spec: &GameSpec, capital: usize, h: &Rational, conf: &Rational) -> Result<Contest<S>> {
    let fs = fraction_grid(h)?;
    let strategies = fs
        .iter()
        .map(|f| kelly(spec.goal(), f))
        .collect::<Result<Vec<_>>>()?;
    let evals = evaluate_all::<S>(spec, &strategies, capital, None)?;
    let floor = S::from_rational(conf);
    let mut winner: Option<usize> = None;
    for (k, e) in evals.iter().enumerate() {
        if e.win < floor {
            continue;
        }
        match winner {
            Some(w) if !beats(&evals[w].duration, &e.duration) => {}
            _ => winner = Some(k),
        }
    }
    let unmet = winner.is_none();
    let winner = winner.unwrap_or_else(|| {
        let mut w = 0;
        for k in 1..evals.len() {
            if beats(&evals[k].win, &evals[w].win) {
                w = k;
            }
        }
        w
    });
    Ok(Contest {
        fs,
        evals,
        winner,
        unmet,
    })
}

/// Fastest Kelly fraction, by expected duration from `capital`, among
/// those whose win probability is at least `conf`. Ties go to the smaller
/// fraction. When none qualifies the most likely winner is returned with
/// `constraint_unmet` set.
pub fn kelly_contest(
    spec: &GameSpec,
    capital: usize,
    h: &Rational,
    conf: &Rational,
    opts: SearchOptions,
) -> Result<SearchResult> {
    spec.check_capital(capital)?;
    if conf <= &Rational::zero() || conf >= &Rational::one() {
        return Err(Error::Domain(format!(
            "confidence must satisfy 0 < conf < 1, got {}",
            crate::numeric::rational::format_ratio(conf)
        )));
    }
    match opts.mode {
        NumericMode::Exact => finish_contest(spec, capital, h, opts, run_contest::<Rational>(spec, capital, h, conf)?),
        NumericMode::Decimal => finish_contest(spec, capital, h, opts, run_contest::<Decimal>(spec, capital, h, conf)?),
        NumericMode::Float => finish_contest(spec, capital, h, opts, run_contest::<f64>(spec, capital, h, conf)?),
    }
}

fn finish_contest<S: Scalar>(
    spec: &GameSpec,
    capital: usize,
    h: &Rational,
    opts: SearchOptions,
    contest: Contest<S>,
) -> Result<SearchResult> {
    let f = &contest.fs[contest.winner];
    let verify = opts.verify_exact && S::MODE != NumericMode::Exact;
    let best = if verify {
        exact_point(spec, &kelly(spec.goal(), f)?, capital, None, f, None)?
    } else {
        to_point(f, None, &contest.evals[contest.winner])
    };
    let (objective, objective_value) = if contest.unmet {
        (Objective::WinProb, best.win_prob.clone())
    } else {
        (Objective::ExpDuration, best.exp_duration.clone())
    };
    let grid = if opts.keep_grid {
        contest
            .fs
            .iter()
            .zip(&contest.evals)
            .map(|(f, e)| to_point(f, None, e))
            .collect()
    } else {
        Vec::new()
    };
    Ok(SearchResult {
        spec: spec.clone(),
        capital,
        horizon: None,
        best,
        objective,
        objective_value,
        grid_resolution: h.clone(),
        evaluations: contest.fs.len(),
        mode: S::MODE,
        verified_exact: verify || S::MODE == NumericMode::Exact,
        constraint_unmet: contest.unmet,
        grid,
    })
}
