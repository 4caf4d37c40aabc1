//! Absorbing-chain analysis of a fixed strategy.
//!
//! Capital `i` in `1..N` is transient, `0` and `N` absorb. Every measure is
//! the solution of `(I - A) x = b` where `A` moves from `i` to `i - s(i)`
//! with weight `q` and to `i + s(i)` with weight `p` (times `t` for the
//! generating functions).

use num::{One, Zero};

use crate::error::Result;
use crate::game::{require_valid, GameSpec, Strategy};
use crate::linsolve::{Factorization, SparseMatrix};
use crate::numeric::ratfun::RationalFunction;
use crate::numeric::{Field, Rational, Scalar};

/// Factors `I - A` with transition weights `lose` and `win`.
fn factor_system<F: Field>(spec: &GameSpec, s: &Strategy, lose: &F, win: &F) -> Result<Factorization<F>> {
    let n = spec.goal();
    let mut m = SparseMatrix::new(n - 1);
    for i in 1..n {
        let stake = s.stake(i);
        m.add(i - 1, i - 1, F::one());
        if i - stake > 0 {
            m.add(i - 1, i - stake - 1, -lose.clone());
        }
        if i + stake < n {
            m.add(i - 1, i + stake - 1, -win.clone());
        }
    }
    m.factor()
}

/// Right-hand side contributed by the absorbing boundary values.
fn boundary_rhs<F: Field>(
    spec: &GameSpec,
    s: &Strategy,
    lose: &F,
    win: &F,
    at_zero: &F,
    at_goal: &F,
) -> Vec<F> {
    let n = spec.goal();
    (1..n)
        .map(|i| {
            let stake = s.stake(i);
            let mut b = F::zero();
            if i == stake && !at_zero.is_zero() {
                b = b + lose.clone() * at_zero.clone();
            }
            if i + stake == n && !at_goal.is_zero() {
                b = b + win.clone() * at_goal.clone();
            }
            b
        })
        .collect()
}

fn weights<S: Scalar>(spec: &GameSpec) -> (S, S) {
    (S::from_rational(&spec.q()), S::from_rational(spec.p()))
}

/// Win probability, expected duration and expected duration given a win
/// for every starting capital `1..N`, from one factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport<S> {
    pub win_prob: Vec<S>,
    pub exp_duration: Vec<S>,
    /// `None` where the win probability is zero.
    pub exp_duration_given_win: Vec<Option<S>>,
    /// Largest absolute residual over the three solves.
    pub residual: f64,
}

impl<S: Scalar> ChainReport<S> {
    pub fn compute(spec: &GameSpec, s: &Strategy) -> Result<Self> {
        require_valid(spec, s)?;
        let (q, p) = weights::<S>(spec);
        let lu = factor_system(spec, s, &q, &p)?;

        let win_rhs = boundary_rhs(spec, s, &q, &p, &S::zero(), &S::one());
        let win_prob = lu.solve(&win_rhs);
        let ones = vec![S::one(); spec.goal() - 1];
        let exp_duration = lu.solve(&ones);
        let weighted = lu.solve(&win_prob);
        let exp_duration_given_win = weighted
            .iter()
            .zip(&win_prob)
            .map(|(g, w)| (!w.is_zero()).then(|| g.div_ref(w)))
            .collect();

        let residual = [
            residual(spec, s, &q, &p, &win_prob, &win_rhs),
            residual(spec, s, &q, &p, &exp_duration, &ones),
            residual(spec, s, &q, &p, &weighted, &win_prob),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(ChainReport {
            win_prob,
            exp_duration,
            exp_duration_given_win,
            residual,
        })
    }
}

/// `max_i |((I - A) x - b)_i|`, evaluated in the solve's own arithmetic.
fn residual<S: Scalar>(spec: &GameSpec, s: &Strategy, q: &S, p: &S, x: &[S], b: &[S]) -> f64 {
    let n = spec.goal();
    let at = |c: usize| -> S {
        if c == 0 || c == n {
            S::zero()
        } else {
            x[c - 1].clone()
        }
    };
    (1..n)
        .map(|i| {
            let stake = s.stake(i);
            let r = x[i - 1].clone() - S::mix(q, &at(i - stake), p, &at(i + stake)) - b[i - 1].clone();
            r.to_f64().abs()
        })
        .fold(0.0, f64::max)
}

/// Probability of ever reaching `N` from each capital `1..N`.
pub fn win_prob<S: Scalar>(spec: &GameSpec, s: &Strategy) -> Result<Vec<S>> {
    require_valid(spec, s)?;
    let (q, p) = weights::<S>(spec);
    let lu = factor_system(spec, s, &q, &p)?;
    Ok(lu.solve(&boundary_rhs(spec, s, &q, &p, &S::zero(), &S::one())))
}

/// Expected rounds until absorption at either end.
pub fn expected_duration<S: Scalar>(spec: &GameSpec, s: &Strategy) -> Result<Vec<S>> {
    require_valid(spec, s)?;
    let (q, p) = weights::<S>(spec);
    let lu = factor_system(spec, s, &q, &p)?;
    Ok(lu.solve(&vec![S::one(); spec.goal() - 1]))
}

/// Expected rounds until absorption, conditioned on absorption at `N`.
///
/// With `W` the win probabilities, `g = W * E[T | win]` solves the same
/// system with right-hand side `W`.
pub fn expected_duration_given_win<S: Scalar>(spec: &GameSpec, s: &Strategy) -> Result<Vec<Option<S>>> {
    Ok(ChainReport::<S>::compute(spec, s)?.exp_duration_given_win)
}

fn pgf_system(spec: &GameSpec, s: &Strategy, at_zero: RationalFunction) -> Result<Vec<RationalFunction>> {
    require_valid(spec, s)?;
    let t = RationalFunction::t();
    let lose = t.clone() * RationalFunction::constant(spec.q());
    let win = t * RationalFunction::constant(spec.p().clone());
    let lu = factor_system(spec, s, &lose, &win)?;
    let rhs = boundary_rhs(spec, s, &lose, &win, &at_zero, &RationalFunction::one());
    Ok(lu.solve(&rhs))
}

/// Generating function in `t` of the remaining duration.
pub fn duration_pgf(spec: &GameSpec, s: &Strategy) -> Result<Vec<RationalFunction>> {
    pgf_system(spec, s, RationalFunction::one())
}

/// Generating function of the duration restricted to winning paths. Its
/// total mass at `t = 1` is the win probability.
pub fn duration_pgf_win(spec: &GameSpec, s: &Strategy) -> Result<Vec<RationalFunction>> {
    pgf_system(spec, s, RationalFunction::zero())
}

/// [`duration_pgf_win`] divided by the win probability: the proper
/// conditional distribution. `None` where the win probability is zero.
pub fn duration_pgf_win_normalized(
    spec: &GameSpec,
    s: &Strategy,
) -> Result<Vec<Option<RationalFunction>>> {
    let w = win_prob::<Rational>(spec, s)?;
    Ok(duration_pgf_win(spec, s)?
        .into_iter()
        .zip(w)
        .map(|(f, w)| (!w.is_zero()).then(|| f * RationalFunction::constant(Rational::one() / w)))
        .collect())
}
