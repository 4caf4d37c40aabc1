use stakewise_core::chain::ChainReport;
use stakewise_core::game::{self, GameSpec};
use stakewise_core::numeric::rational::{ratio, to_f64};
use stakewise_core::simulate::{monte_carlo, Policy, SimGame};
use stakewise_core::Rational;

const GAMES: usize = 100_000;

fn within(estimate: f64, se: f64, exact: f64, sigmas: f64) -> bool {
    (estimate - exact).abs() <= sigmas * se
}

#[test]
fn three_dollar_game_statistics() {
    let sp = GameSpec::new(ratio(1, 3), 3).unwrap();
    let s = game::timid(3).unwrap();
    let exact = ChainReport::<Rational>::compute(&sp, &s).unwrap();
    let pol = Policy::Fixed(s);
    let game = SimGame::new(&sp);
    let serial = monte_carlo(&game, &pol, 1, None, GAMES, 2024, false).unwrap();
    let parallel = monte_carlo(&game, &pol, 1, None, GAMES, 2024, true).unwrap();
    assert_eq!(serial, parallel);
    assert!(within(serial.win_rate, serial.win_rate_se, to_f64(&exact.win_prob[0]), 4.0));
    assert!(within(serial.mean_duration, serial.duration_se, to_f64(&exact.exp_duration[0]), 4.0));
}

#[test]
fn bold_play_is_one_round() {
    let sp = GameSpec::new(ratio(3, 5), 200).unwrap();
    let game = SimGame::new(&sp);
    let r = monte_carlo(&game, &Policy::Fixed(game::bold(200).unwrap()), 100, None, GAMES, 7, true).unwrap();
    assert_eq!(r.mean_duration, 1.0);
    let sigma = (0.24f64 / GAMES as f64).sqrt();
    assert!((r.win_rate - 0.6).abs() <= 3.0 * sigma);
}

#[test]
fn kelly_statistics() {
    let sp = GameSpec::new(ratio(3, 5), 200).unwrap();
    let s = game::kelly(200, &ratio(1, 10)).unwrap();
    let exact = ChainReport::<Rational>::compute(&sp, &s).unwrap();
    let game = SimGame::new(&sp);
    let r = monte_carlo(&game, &Policy::Fixed(s), 100, None, GAMES, 99, true).unwrap();
    let w = to_f64(&exact.win_prob[99]);
    let se = (w * (1.0 - w) / GAMES as f64).sqrt();
    assert!(within(r.win_rate, se, w, 4.0), "{} vs {w}", r.win_rate);
    assert!(within(r.mean_duration, r.duration_se, to_f64(&exact.exp_duration[99]), 4.0));
}
