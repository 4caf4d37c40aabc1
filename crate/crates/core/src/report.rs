//! JSON and CSV renderings shared by the command line and the service.
//!
//! Every number is rendered as `{"value": ..., "decimal": ...}`: `value` is
//! the canonical text (`"num/den"` for exact results) and `decimal` a
//! rounded mirror with the requested number of significant digits.

use std::io::Write;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::chain::{self, ChainReport};
use crate::error::{Error, Result};
use crate::game::{GameSpec, Strategy};
use crate::horizon::{DeadlineTable, StoryItem};
use crate::numeric::rational::{format_ratio, to_decimal};
use crate::numeric::{Decimal, Number, NumericMode, Rational, Scalar};
use crate::search::{GridPoint, SearchResult};

pub const DEFAULT_SIG_DIGITS: usize = 10;

pub fn number(n: &Number, sig: usize) -> Value {
    json!({ "value": n.canonical(), "decimal": n.decimal(sig) })
}

pub fn ratio(r: &Rational, sig: usize) -> Value {
    json!({ "value": format_ratio(r), "decimal": to_decimal(r, sig) })
}

fn opt_number(n: Option<&Number>, sig: usize) -> Value {
    n.map_or(Value::Null, |n| number(n, sig))
}

pub fn mode_meta(mode: NumericMode) -> Value {
    json!({ "mode": mode.name(), "tie_tolerance": mode.tie_tolerance() })
}

pub fn spec(spec: &GameSpec) -> Value {
    json!({ "p": format_ratio(spec.p()), "N": spec.goal() })
}

/// Per-capital measures of a fixed strategy.
pub fn chain_report<S: Scalar>(sp: &GameSpec, s: &Strategy, r: &ChainReport<S>, sig: usize) -> Value {
    let rows: Vec<Value> = (1..sp.goal())
        .map(|i| {
            let k = i - 1;
            json!({
                "capital": i,
                "stake": s.stake(i),
                "win_prob": number(&r.win_prob[k].to_number(), sig),
                "exp_duration": number(&r.exp_duration[k].to_number(), sig),
                "exp_duration_given_win": opt_number(r.exp_duration_given_win[k].as_ref().map(Scalar::to_number).as_ref(), sig),
            })
        })
        .collect();
    json!({
        "spec": spec(sp),
        "numeric": mode_meta(S::MODE),
        "residual": r.residual,
        "stakes": s.stakes(),
        "rows": rows,
    })
}

/// Values and optimal stakes for `t = 0..=T` and every capital `0..=N`.
pub fn table(t: &dyn DeadlineTable, sig: usize) -> Value {
    let n = t.spec().goal();
    let rows: Vec<Value> = (0..=t.horizon())
        .flat_map(|step| {
            (0..=n).map(move |i| {
                json!({
                    "i": i,
                    "t": step,
                    "value": number(&t.value(i, step), sig),
                    "best_stake": t.stake(i, step),
                })
            })
        })
        .collect();
    json!({
        "spec": spec(t.spec()),
        "horizon": t.horizon(),
        "numeric": mode_meta(t.mode()),
        "rows": rows,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Domain(format!("csv output failed: {e}"))
}

/// CSV rows `i,t,value,best_stake`. `sig` selects decimal values, `None`
/// the canonical text.
pub fn table_csv<W: Write>(t: &dyn DeadlineTable, sig: Option<usize>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "t", "value", "best_stake"]).map_err(csv_error)?;
    for step in 0..=t.horizon() {
        for i in 0..=t.spec().goal() {
            let v = t.value(i, step);
            let text = sig.map_or_else(|| v.canonical(), |d| v.decimal(d));
            let stake = t.stake(i, step).map(|x| x.to_string()).unwrap_or_default();
            w.write_record([i.to_string(), step.to_string(), text, stake])
                .map_err(csv_error)?;
        }
    }
    w.flush().map_err(|e| Error::Domain(format!("csv output failed: {e}")))
}

pub fn grid_point(g: &GridPoint, sig: usize) -> Value {
    json!({
        "f": format_ratio(&g.f),
        "c": g.c.as_ref().map(format_ratio),
        "horizon_win_prob": opt_number(g.horizon_win_prob.as_ref(), sig),
        "win_prob": number(&g.win_prob, sig),
        "exp_duration": number(&g.exp_duration, sig),
        "exp_duration_given_win": opt_number(g.exp_duration_given_win.as_ref(), sig),
    })
}

pub fn search(r: &SearchResult, sig: usize) -> Value {
    let mut v = json!({
        "spec": spec(&r.spec),
        "capital": r.capital,
        "horizon": r.horizon,
        "best": grid_point(&r.best, sig),
        "objective": r.objective.name(),
        "objective_value": number(&r.objective_value, sig),
        "grid_resolution": format_ratio(&r.grid_resolution),
        "evaluations": r.evaluations,
        "numeric": mode_meta(r.mode),
        "verified_exact": r.verified_exact,
        "constraint_unmet": r.constraint_unmet,
        "duration_kind": "unbounded",
    });
    if !r.grid.is_empty() {
        v["grid"] = r.grid.iter().map(|g| grid_point(g, sig)).collect();
    }
    v
}

/// CSV rows `f,c,horizon_win_prob,win_prob,exp_duration,exp_duration_given_win`.
pub fn grid_csv<W: Write>(grid: &[GridPoint], sig: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "f",
        "c",
        "horizon_win_prob",
        "win_prob",
        "exp_duration",
        "exp_duration_given_win",
    ])
    .map_err(csv_error)?;
    let dec = |n: Option<&Number>| n.map(|n| n.decimal(sig)).unwrap_or_default();
    for g in grid {
        w.write_record([
            format_ratio(&g.f),
            g.c.as_ref().map(format_ratio).unwrap_or_default(),
            dec(g.horizon_win_prob.as_ref()),
            dec(Some(&g.win_prob)),
            dec(Some(&g.exp_duration)),
            dec(g.exp_duration_given_win.as_ref()),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv output failed: {e}")))
}

pub fn story(items: &[StoryItem], sig: usize) -> Value {
    items
        .iter()
        .map(|item| {
            let head = json!({
                "p": format_ratio(&item.p),
                "N": item.goal,
                "horizon": item.horizon,
            });
            match &item.outcome {
                Ok(sec) => {
                    let mut v = head;
                    v["numeric"] = mode_meta(sec.mode);
                    v["stakes"] = json!(sec.stakes);
                    v["values"] = sec.values.iter().map(|x| number(x, sig)).collect();
                    v
                }
                Err(e) => {
                    let mut v = head;
                    v["error"] = json!(e.to_string());
                    v
                }
            }
        })
        .collect()
}

/// `num/den`, or just `num` for integers; for human-facing lists.
pub fn short_ratio(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format_ratio(r)
    }
}

/// What `analyze` computes for a fixed strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    WinProb,
    ExpDuration,
    ExpDurationGivenWin,
    Pgf,
    PgfWin,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::WinProb => "winprob",
            Measure::ExpDuration => "ed",
            Measure::ExpDurationGivenWin => "edw",
            Measure::Pgf => "pgf",
            Measure::PgfWin => "pgfw",
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "winprob" => Ok(Measure::WinProb),
            "ed" => Ok(Measure::ExpDuration),
            "edw" => Ok(Measure::ExpDurationGivenWin),
            "pgf" => Ok(Measure::Pgf),
            "pgfw" => Ok(Measure::PgfWin),
            other => Err(Error::Parse(format!("unknown measure {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Backend for the probability and duration measures; generating
    /// functions are always exact.
    pub mode: NumericMode,
    /// Number of series coefficients past the constant term.
    pub series: Option<usize>,
    /// Divide the win-restricted generating function by the win probability.
    pub normalized: bool,
    pub sig: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            mode: NumericMode::Exact,
            series: None,
            normalized: false,
            sig: DEFAULT_SIG_DIGITS,
        }
    }
}

fn scalar_values<S: Scalar>(sp: &GameSpec, s: &Strategy, m: Measure) -> Result<Vec<Option<Number>>> {
    let r = ChainReport::<S>::compute(sp, s)?;
    Ok(match m {
        Measure::WinProb => r.win_prob.iter().map(|v| Some(v.to_number())).collect(),
        Measure::ExpDuration => r.exp_duration.iter().map(|v| Some(v.to_number())).collect(),
        _ => r
            .exp_duration_given_win
            .iter()
            .map(|v| v.as_ref().map(Scalar::to_number))
            .collect(),
    })
}

/// One measure of a fixed strategy at every capital `1..N`.
///
/// The result always has `values` (one entry per capital, `null` where
/// undefined) and `list`, the canonical texts in capital order.
pub fn analyze(sp: &GameSpec, s: &Strategy, m: Measure, opts: AnalyzeOptions) -> Result<Value> {
    crate::game::require_valid(sp, s)?;
    let sig = opts.sig;
    let (mode, values, list): (NumericMode, Vec<Value>, Vec<Value>) = match m {
        Measure::Pgf | Measure::PgfWin => {
            let fs: Vec<Option<crate::RationalFunction>> = match (m, opts.normalized) {
                (Measure::Pgf, _) => chain::duration_pgf(sp, s)?.into_iter().map(Some).collect(),
                (_, false) => chain::duration_pgf_win(sp, s)?.into_iter().map(Some).collect(),
                (_, true) => chain::duration_pgf_win_normalized(sp, s)?,
            };
            let mut values = Vec::with_capacity(fs.len());
            let mut list = Vec::with_capacity(fs.len());
            for (k, f) in fs.iter().enumerate() {
                let Some(f) = f else {
                    values.push(Value::Null);
                    list.push(Value::Null);
                    continue;
                };
                let mut v = json!({
                    "capital": k + 1,
                    "pgf": f.to_json(),
                    "text": f.to_string(),
                });
                if let Some(n) = opts.series {
                    let c = f.series_coeffs(n)?;
                    v["series"] = c.iter().map(|x| json!(format_ratio(x))).collect();
                }
                values.push(v);
                list.push(json!(f.to_string()));
            }
            (NumericMode::Exact, values, list)
        }
        _ => {
            let nums = match opts.mode {
                NumericMode::Exact => scalar_values::<Rational>(sp, s, m)?,
                NumericMode::Decimal => scalar_values::<Decimal>(sp, s, m)?,
                NumericMode::Float => scalar_values::<f64>(sp, s, m)?,
            };
            let values = nums.iter().map(|n| opt_number(n.as_ref(), sig)).collect();
            let list = nums
                .iter()
                .map(|n| n.as_ref().map_or(Value::Null, |n| json!(n.canonical())))
                .collect();
            (opts.mode, values, list)
        }
    };
    Ok(json!({
        "spec": spec(sp),
        "stakes": s.stakes(),
        "measure": m.name(),
        "normalized": opts.normalized && m == Measure::PgfWin,
        "numeric": mode_meta(mode),
        "values": values,
        "list": list,
    }))
}
