use stakewise_core::chain::{self, ChainReport};
use stakewise_core::game::{self, GameSpec};
use stakewise_core::numeric::rational::{ratio, to_decimal};
use stakewise_core::search::{best_bk, kelly_contest, SearchOptions};
use stakewise_core::{Number, Rational, RationalFunction};

fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
    RationalFunction::from_ints(num, den).unwrap()
}

#[test]
fn three_dollar_game() {
    let sp = GameSpec::new(ratio(1, 3), 3).unwrap();
    let s = game::timid(3).unwrap();
    let r = ChainReport::<Rational>::compute(&sp, &s).unwrap();
    assert_eq!(r.win_prob, vec![ratio(1, 7), ratio(3, 7)]);
    assert_eq!(r.exp_duration, vec![ratio(12, 7), ratio(15, 7)]);
    assert_eq!(r.exp_duration_given_win, vec![Some(ratio(18, 7)), Some(ratio(11, 7))]);

    let pgf = chain::duration_pgf(&sp, &s).unwrap();
    // printed with the opposite sign convention: -t(6+t)/(-9+2t^2)
    assert_eq!(pgf[0], rf(&[0, -6, -1], &[-9, 0, 2]));
    assert_eq!(pgf[1], rf(&[0, 3, 4], &[9, 0, -2]));
    assert_eq!(
        pgf[0].series_coeffs(4).unwrap(),
        vec![ratio(0, 1), ratio(2, 3), ratio(1, 9), ratio(4, 27), ratio(2, 81)]
    );
    let pgfw = chain::duration_pgf_win(&sp, &s).unwrap();
    assert_eq!(pgfw, vec![rf(&[0, 0, 1], &[9, 0, -2]), rf(&[0, 3], &[9, 0, -2])]);
    assert_eq!(
        pgfw[0].series_coeffs(4).unwrap(),
        vec![ratio(0, 1), ratio(0, 1), ratio(1, 9), ratio(0, 1), ratio(2, 81)]
    );
}

fn casino() -> GameSpec {
    GameSpec::new(ratio(3, 5), 200).unwrap()
}

#[test]
fn tenth_kelly_from_half_the_goal() {
    let sp = casino();
    let r = ChainReport::<Rational>::compute(&sp, &game::kelly(200, &ratio(1, 10)).unwrap()).unwrap();
    assert_eq!(to_decimal(&r.win_prob[99], 10), "0.9998784517");
    assert_eq!(to_decimal(r.exp_duration_given_win[99].as_ref().unwrap(), 10), "44.94509484");
    assert_eq!(to_decimal(&r.exp_duration[99], 10), "44.96134439");
}

#[test]
fn breiman_kelly_four_fifths() {
    let sp = casino();
    let s = game::breiman_kelly(200, &ratio(1, 10), &ratio(4, 5)).unwrap();
    let r = ChainReport::<Rational>::compute(&sp, &s).unwrap();
    assert_eq!(to_decimal(&r.win_prob[99], 10), "0.9998721302");
    assert_eq!(to_decimal(r.exp_duration_given_win[99].as_ref().unwrap(), 10), "43.81842784");
}

#[test]
fn timid_and_bold_baselines() {
    let sp = casino();
    let t = game::timid_expected_time(&sp, 100).unwrap();
    let gap = stakewise_core::numeric::rational::to_f64(&(t - ratio(500, 1)));
    assert!(gap.abs() < 1e-9);
    let r = ChainReport::<Rational>::compute(&sp, &game::bold(200).unwrap()).unwrap();
    assert_eq!(r.exp_duration[99], ratio(1, 1));
    assert_eq!(r.win_prob[99], ratio(3, 5));
}

#[test]
fn contest_picks_a_qualifying_fraction() {
    let sp = casino();
    let opts = SearchOptions {
        keep_grid: true,
        ..SearchOptions::default()
    };
    let r = kelly_contest(&sp, 100, &ratio(1, 10), &ratio(999, 1000), opts).unwrap();
    assert!(!r.constraint_unmet);
    let tenth = r.grid.iter().find(|g| g.f == ratio(1, 10)).unwrap();
    assert_eq!(tenth.win_prob.decimal(10), "0.9998784517");
    assert!(tenth.win_prob.to_f64() >= 0.999);
    assert!(r.best.win_prob.to_f64() >= 0.999);
    for g in &r.grid {
        if g.win_prob.to_f64() >= 0.999 {
            assert!(r.best.exp_duration.to_f64() <= g.exp_duration.to_f64());
        }
    }
    assert!(matches!(r.best.exp_duration, Number::Exact(_)));
}

#[test]
fn unbounded_bk_grid_reports_every_pair() {
    let sp = GameSpec::new(ratio(3, 5), 40).unwrap();
    let opts = SearchOptions {
        keep_grid: true,
        ..SearchOptions::default()
    };
    let r = best_bk(&sp, 20, None, &ratio(1, 5), opts).unwrap();
    assert_eq!(r.evaluations, 4 * 6);
    assert_eq!(r.grid.len(), 24);
    let top = r.grid.iter().map(|g| g.win_prob.to_f64()).fold(0.0, f64::max);
    assert!((r.objective_value.to_f64() - top).abs() < 1e-15);
}
