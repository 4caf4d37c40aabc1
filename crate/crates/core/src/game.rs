//! The casino: even-money rounds won with probability `p`, play until the
//! bankroll hits `0` or the exit capital `N`, integer stakes only.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::rational::{self, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameSpec {
    p: Rational,
    goal: usize,
}

impl GameSpec {
    pub fn new(p: Rational, goal: usize) -> Result<Self> {
        if p <= Rational::zero() || p >= Rational::one() {
            return Err(Error::Probability(rational::format_ratio(&p)));
        }
        if goal < 2 {
            return Err(Error::Goal(goal));
        }
        Ok(GameSpec { p, goal })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> Rational {
        Rational::one() - &self.p
    }

    /// Exit capital `N`.
    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn is_superfair(&self) -> bool {
        self.p >= rational::ratio(1, 2)
    }

    /// Largest admissible stake at `capital`: `min(i, N - i)`.
    pub fn max_stake(&self, capital: usize) -> usize {
        capital.min(self.goal.saturating_sub(capital))
    }

    pub fn check_capital(&self, capital: usize) -> Result<()> {
        if capital == 0 || capital >= self.goal {
            return Err(Error::Domain(format!(
                "capital must lie in 1..={}, got {capital}",
                self.goal - 1
            )));
        }
        Ok(())
    }
}

/// Stake table `s(1..N-1)`; `stakes[i - 1]` is the bet at capital `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy {
    stakes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Length { expected: usize, got: usize },
    Stake { capital: usize, stake: usize, bound: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { expected, got } => write!(f, "length {got} != {expected}"),
            Violation::Stake { capital, stake, bound } => {
                write!(f, "stake {stake} at capital {capital} outside 1..={bound}")
            }
        }
    }
}

impl Strategy {
    pub fn from_stakes(stakes: Vec<usize>) -> Self {
        Strategy { stakes }
    }

    pub fn stakes(&self) -> &[usize] {
        &self.stakes
    }

    /// Stake at `capital` (1-based).
    pub fn stake(&self, capital: usize) -> usize {
        self.stakes[capital - 1]
    }

    pub fn len(&self) -> usize {
        self.stakes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stakes.is_empty()
    }
}

pub fn validate_strategy(spec: &GameSpec, s: &Strategy) -> std::result::Result<(), Vec<Violation>> {
    let expected = spec.goal() - 1;
    if s.len() != expected {
        return Err(vec![Violation::Length {
            expected,
            got: s.len(),
        }]);
    }
    let violations: Vec<Violation> = s
        .stakes()
        .iter()
        .enumerate()
        .filter_map(|(k, &stake)| {
            let capital = k + 1;
            let bound = spec.max_stake(capital);
            (stake < 1 || stake > bound).then_some(Violation::Stake {
                capital,
                stake,
                bound,
            })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// [`validate_strategy`] folded into the crate error type.
pub fn require_valid(spec: &GameSpec, s: &Strategy) -> Result<()> {
    validate_strategy(spec, s).map_err(|v| {
        Error::Strategy(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
    })
}

fn check_goal(goal: usize) -> Result<()> {
    if goal < 2 {
        return Err(Error::Goal(goal));
    }
    Ok(())
}

pub fn timid(goal: usize) -> Result<Strategy> {
    check_goal(goal)?;
    Ok(Strategy::from_stakes(vec![1; goal - 1]))
}

pub fn bold(goal: usize) -> Result<Strategy> {
    check_goal(goal)?;
    Ok(Strategy::from_stakes(
        (1..goal).map(|i| i.min(goal - i)).collect(),
    ))
}

fn floor_times(i: usize, f: &Rational) -> usize {
    let x = (int(i) * f).floor().to_integer();
    usize::try_from(x).expect("nonnegative stake")
}

/// Kelly stake `min(floor(i f) + 1, N - i)`, clamped to the admissible range.
fn kelly_stake(goal: usize, f: &Rational, i: usize) -> usize {
    let raw = (floor_times(i, f) + 1).min(goal - i);
    raw.clamp(1, i.min(goal - i))
}

fn check_fraction(f: &Rational) -> Result<()> {
    if f <= &Rational::zero() || f > &Rational::one() {
        return Err(Error::Domain(format!(
            "Kelly fraction must satisfy 0 < f <= 1, got {}",
            rational::format_ratio(f)
        )));
    }
    Ok(())
}

pub fn kelly(goal: usize, f: &Rational) -> Result<Strategy> {
    check_goal(goal)?;
    check_fraction(f)?;
    Ok(Strategy::from_stakes(
        (1..goal).map(|i| kelly_stake(goal, f, i)).collect(),
    ))
}

/// Kelly up to capital `cN`, bold strictly above it.
pub fn breiman_kelly(goal: usize, f: &Rational, c: &Rational) -> Result<Strategy> {
    check_goal(goal)?;
    check_fraction(f)?;
    if c < &Rational::zero() || c > &Rational::one() {
        return Err(Error::Domain(format!(
            "bold threshold must satisfy 0 <= c <= 1, got {}",
            rational::format_ratio(c)
        )));
    }
    let threshold = c * int(goal);
    Ok(Strategy::from_stakes(
        (1..goal)
            .map(|i| {
                if int(i) <= threshold {
                    kelly_stake(goal, f, i)
                } else {
                    i.min(goal - i)
                }
            })
            .collect(),
    ))
}

/// Named strategy families: `timid`, `bold`, `kelly:F`, `bk:F:C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Timid,
    Bold,
    Kelly(Rational),
    BreimanKelly(Rational, Rational),
}

impl Family {
    pub fn build(&self, goal: usize) -> Result<Strategy> {
        match self {
            Family::Timid => timid(goal),
            Family::Bold => bold(goal),
            Family::Kelly(f) => kelly(goal, f),
            Family::BreimanKelly(f, c) => breiman_kelly(goal, f, c),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["timid"] => Ok(Family::Timid),
            ["bold"] => Ok(Family::Bold),
            ["kelly", f] => Ok(Family::Kelly(rational::parse_rational(f)?)),
            ["bk", f, c] => Ok(Family::BreimanKelly(
                rational::parse_rational(f)?,
                rational::parse_rational(c)?,
            )),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Timid => f.write_str("timid"),
            Family::Bold => f.write_str("bold"),
            Family::Kelly(k) => write!(f, "kelly:{}", rational::format_ratio(k)),
            Family::BreimanKelly(k, c) => write!(
                f,
                "bk:{}:{}",
                rational::format_ratio(k),
                rational::format_ratio(c)
            ),
        }
    }
}

/// On-disk strategy: `{"N": 3, "p": "1/3", "stakes": [1, 1]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    #[serde(rename = "N")]
    pub goal: usize,
    #[serde(with = "rational::ratio_serde")]
    pub p: Rational,
    pub stakes: Vec<usize>,
}

impl StrategyFile {
    pub fn new(spec: &GameSpec, s: &Strategy) -> Self {
        StrategyFile {
            goal: spec.goal(),
            p: spec.p().clone(),
            stakes: s.stakes().to_vec(),
        }
    }

    pub fn into_parts(self) -> Result<(GameSpec, Strategy)> {
        let spec = GameSpec::new(self.p, self.goal)?;
        let s = Strategy::from_stakes(self.stakes);
        require_valid(&spec, &s)?;
        Ok((spec, s))
    }
}

fn pow(r: &Rational, e: usize) -> Rational {
    num::pow(r.clone(), e)
}

/// Classical ruin probability complement for unit stakes, `0 <= x <= N`.
pub fn timid_win_prob(spec: &GameSpec, x: usize) -> Result<Rational> {
    let n = spec.goal();
    if x > n {
        return Err(Error::Domain(format!("capital {x} exceeds exit capital {n}")));
    }
    if spec.p() == &rational::ratio(1, 2) {
        return Ok(Rational::new(BigInt::from(x), BigInt::from(n)));
    }
    let r = spec.q() / spec.p();
    Ok((Rational::one() - pow(&r, x)) / (Rational::one() - pow(&r, n)))
}

/// Expected number of unit-stake rounds until absorption, `0 <= x <= N`.
pub fn timid_expected_time(spec: &GameSpec, x: usize) -> Result<Rational> {
    let n = spec.goal();
    if x > n {
        return Err(Error::Domain(format!("capital {x} exceeds exit capital {n}")));
    }
    if spec.p() == &rational::ratio(1, 2) {
        return Ok(int(x * (n - x)));
    }
    let drift = spec.q() - spec.p();
    let r = spec.q() / spec.p();
    let ruin_ratio = (Rational::one() - pow(&r, x)) / (Rational::one() - pow(&r, n));
    Ok(int(x) / &drift - int(n) / &drift * ruin_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational::ratio;
    use proptest::{prop_assert, prop_assert_eq, prop_assume, proptest};

    fn spec(p: Rational, n: usize) -> GameSpec {
        GameSpec::new(p, n).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::new(ratio(0, 1), 5).is_err());
        assert!(GameSpec::new(ratio(1, 1), 5).is_err());
        assert!(matches!(GameSpec::new(ratio(1, 2), 1), Err(Error::Goal(1))));
        assert_eq!(spec(ratio(3, 5), 4).q(), ratio(2, 5));
    }

    #[test]
    fn validate_examples() {
        let s3 = spec(ratio(1, 3), 3);
        assert!(validate_strategy(&s3, &Strategy::from_stakes(vec![1, 1])).is_ok());
        let s4 = spec(ratio(1, 3), 4);
        assert_eq!(
            validate_strategy(&s4, &Strategy::from_stakes(vec![1, 3, 1])),
            Err(vec![Violation::Stake { capital: 2, stake: 3, bound: 2 }])
        );
        assert_eq!(
            validate_strategy(&s4, &Strategy::from_stakes(vec![1, 2])),
            Err(vec![Violation::Length { expected: 3, got: 2 }])
        );
        assert!(validate_strategy(&s4, &Strategy::from_stakes(vec![0, 1, 1])).is_err());
    }

    #[test]
    fn family_examples() {
        assert_eq!(timid(3).unwrap().stakes(), &[1, 1]);
        assert_eq!(bold(5).unwrap().stakes(), &[1, 2, 2, 1]);
        assert_eq!(bold(200).unwrap().stake(100), 100);
        let k = kelly(200, &ratio(1, 10)).unwrap();
        assert_eq!(k.stake(100), 11);
        assert_eq!(k.stake(195), 5);
        assert_eq!(k.stake(1), 1);
        let bk = breiman_kelly(200, &ratio(1, 10), &ratio(4, 5)).unwrap();
        assert_eq!(bk.stake(170), 30);
        assert_eq!(bk.stake(160), 17);
        assert_eq!(bk.stake(161), 39);
        assert_eq!(bk.stake(159), 16);
        assert_eq!(bk.stake(100), 11);
        assert_eq!(breiman_kelly(200, &ratio(1, 10), &ratio(1, 1)).unwrap(), k);
        assert!(kelly(10, &ratio(0, 1)).is_err());
        assert!(breiman_kelly(10, &ratio(1, 2), &ratio(3, 2)).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("timid".parse::<Family>().unwrap(), Family::Timid);
        assert_eq!(
            "bk:1/10:4/5".parse::<Family>().unwrap(),
            Family::BreimanKelly(ratio(1, 10), ratio(4, 5))
        );
        assert_eq!("kelly:0.1".parse::<Family>().unwrap().to_string(), "kelly:1/10");
        assert!("kelly".parse::<Family>().is_err());
        assert!("wild:1".parse::<Family>().is_err());
    }

    #[test]
    fn closed_forms() {
        let half = spec(ratio(1, 2), 10);
        assert_eq!(timid_expected_time(&half, 3).unwrap(), ratio(21, 1));
        assert_eq!(timid_win_prob(&half, 3).unwrap(), ratio(3, 10));
        let third = spec(ratio(1, 3), 3);
        assert_eq!(timid_win_prob(&third, 1).unwrap(), ratio(1, 7));
        assert_eq!(timid_win_prob(&third, 2).unwrap(), ratio(3, 7));
        assert_eq!(timid_expected_time(&third, 1).unwrap(), ratio(12, 7));
        assert_eq!(timid_expected_time(&third, 0).unwrap(), ratio(0, 1));
        assert_eq!(timid_expected_time(&third, 3).unwrap(), ratio(0, 1));
        let big = spec(ratio(3, 5), 200);
        let t = timid_expected_time(&big, 100).unwrap();
        let eps = rational::to_f64(&(t - ratio(500, 1))).abs();
        assert!(eps < 1e-9, "{eps}");
    }

    #[test]
    fn strategy_file_json() {
        let s = spec(ratio(1, 3), 3);
        let file = StrategyFile::new(&s, &timid(3).unwrap());
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(text, r#"{"N":3,"p":"1/3","stakes":[1,1]}"#);
        let back: StrategyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_parts().unwrap(), (s, timid(3).unwrap()));
    }

    proptest! {
        #[test]
        fn families_are_admissible(n in 2usize..120, fa in 1i64..50, fb in 1i64..50, c in 0i64..=20) {
            let (fa, fb) = if fa <= fb { (fa, fb) } else { (fb, fa) };
            let f = ratio(fa, fb);
            let c = ratio(c, 20);
            let sp = spec(ratio(3, 5), n);
            prop_assert!(validate_strategy(&sp, &timid(n).unwrap()).is_ok());
            prop_assert!(validate_strategy(&sp, &bold(n).unwrap()).is_ok());
            prop_assert!(validate_strategy(&sp, &kelly(n, &f).unwrap()).is_ok());
            prop_assert!(validate_strategy(&sp, &breiman_kelly(n, &f, &c).unwrap()).is_ok());
            prop_assert_eq!(breiman_kelly(n, &f, &ratio(1, 1)).unwrap(), kelly(n, &f).unwrap());
            prop_assert_eq!(breiman_kelly(n, &f, &ratio(0, 1)).unwrap(), bold(n).unwrap());
        }

        #[test]
        fn timid_win_prob_increases(n in 2usize..40, a in 1i64..20, b in 1i64..20) {
            prop_assume!(a < b);
            let sp = spec(ratio(a, b), n);
            for x in 0..n {
                prop_assert!(timid_win_prob(&sp, x).unwrap() < timid_win_prob(&sp, x + 1).unwrap());
            }
        }
    }
}
