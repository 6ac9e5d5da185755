//! Invariants that must hold for any league, checked on generated data.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use proptest::prelude::*;

use league_stats::descriptive::{home_advantage, match_statistics};
use league_stats::fit::fit_exponential;
use league_stats::fitness::{fitness_series, half_season_correlation, seasonal_autocorrelation};
use league_stats::predict::{predict_matchday, DrawRule, HomeAdvantageStrategy, PredictionOptions};
use league_stats::structure::{attack_defense_slopes, split_correlations, team_season_totals};
use league_stats::variance::{neutralize, variance_decomposition, NeutralizedSeries, Quantity};
use league_stats::{
    parse_dataset, simulate_league, FitnessRedraw, InputFormat, LeagueDataset, MatchRecord, SimulationConfig, TeamId,
};
use num_rational::Ratio;

fn small_league() -> impl Strategy<Value = LeagueDataset> {
    (3usize..9, 1usize..4, 0.0f64..3.0, 0.0f64..2.0, any::<u64>()).prop_map(|(n_teams, n_seasons, sd, h, seed)| {
        let cfg = SimulationConfig {
            n_teams,
            n_seasons,
            fitness_sd: sd,
            fitness_redraw: FitnessRedraw::PerSeason,
            home_advantage: h,
            clamp_efficiency: true,
            seed,
            ..Default::default()
        };
        simulate_league(&cfg).expect("valid").0
    })
}

/// Same results with every team renamed through a fixed bijection.
fn relabel(ds: &LeagueDataset) -> LeagueDataset {
    let rename = |t: &TeamId| TeamId::new(&format!("zz {}", t.name().chars().rev().collect::<String>())).unwrap();
    LeagueDataset::from_matches(
        ds.matches()
            .iter()
            .map(|m| MatchRecord {
                home: rename(&m.home),
                away: rename(&m.away),
                ..m.clone()
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip_is_byte_identical(ds in small_league()) {
        let text = ds.to_csv().unwrap();
        let back = parse_dataset(text.as_bytes(), InputFormat::Csv).unwrap();
        prop_assert_eq!(back.matches(), ds.matches());
        prop_assert_eq!(back.to_csv().unwrap(), text);
    }

    #[test]
    fn goal_difference_is_conserved(ds in small_league()) {
        for key in ds.season_keys() {
            let series = fitness_series(&ds, key).unwrap();
            prop_assert_eq!(series.iter().map(|s| s.season_sum).sum::<i64>(), 0);
            let mut by_day: BTreeMap<u32, i64> = BTreeMap::new();
            for s in &series {
                for (&d, &g) in s.match_days.iter().zip(&s.per_match_diff) {
                    *by_day.entry(d).or_default() += g;
                }
            }
            prop_assert!(by_day.values().all(|&v| v == 0));
        }
        let series: Vec<NeutralizedSeries<f64>> = neutralize(&ds).unwrap();
        let total: f64 = series.iter().flat_map(|s| s.matches.iter().map(|m| m.delta)).sum();
        prop_assert!(total.abs() < 1e-9);
    }

    #[test]
    fn statistics_ignore_team_names(ds in small_league()) {
        let other = relabel(&ds);
        prop_assert_eq!(match_statistics::<f64>(&ds, None).unwrap(), match_statistics::<f64>(&other, None).unwrap());
        let a = team_season_totals(&ds, 150);
        let b = team_season_totals(&other, 150);
        let (ca, cb) = (split_correlations::<f64>(&a), split_correlations::<f64>(&b));
        for (x, y) in [(ca.non_negative, cb.non_negative), (ca.negative, cb.negative)] {
            prop_assert_eq!(x.n, y.n);
            for (p, q) in [(x.diff_attack, y.diff_attack), (x.diff_defense, y.diff_defense), (x.attack_defense, y.attack_defense)] {
                match (p, q) {
                    (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-12),
                    (p, q) => prop_assert_eq!(p, q),
                }
            }
        }
        if let (Ok(x), Ok(y)) = (half_season_correlation::<f64>(&ds), half_season_correlation::<f64>(&other)) {
            prop_assert!((x.r - y.r).abs() < 1e-12);
        }
        let sa: Vec<NeutralizedSeries<f64>> = neutralize(&ds).unwrap();
        let sb: Vec<NeutralizedSeries<f64>> = neutralize(&other).unwrap();
        let t_hi = sa.iter().map(|s| s.matches.len()).min().unwrap().min(6);
        if t_hi >= 2 {
            let da = variance_decomposition(&sa, Quantity::Diff, 1..=t_hi, Default::default());
            let db = variance_decomposition(&sb, Quantity::Diff, 1..=t_hi, Default::default());
            if let (Ok(da), Ok(db)) = (da, db) {
                prop_assert!((da.sigma2 - db.sigma2).abs() < 1e-9 && (da.a - db.a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn predictions_never_look_ahead(ds in small_league(), scramble in any::<u64>(), prior in any::<bool>()) {
        let options = PredictionOptions {
            home_advantage: if prior { HomeAdvantageStrategy::PriorSeason } else { HomeAdvantageStrategy::SeasonToDate },
            draw_rule: DrawRule::Band,
        };
        let key = ds.season_keys().last().unwrap().clone();
        let days = ds.season(&key).unwrap().n_match_days;
        for t in 2..=days {
            let altered = LeagueDataset::from_matches(
                ds.matches()
                    .iter()
                    .map(|m| {
                        let mut m = m.clone();
                        if m.key() == key && m.match_day >= t {
                            let x = scramble.wrapping_mul(u64::from(m.match_day) + 1);
                            (m.goals_home, m.goals_away) = ((x % 41) as u32, (x / 41 % 37) as u32);
                        }
                        m
                    })
                    .collect(),
            )
            .unwrap();
            let a = predict_matchday::<f64>(&ds, &key, t, options).unwrap();
            let b = predict_matchday::<f64>(&altered, &key, t, options).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(p.predicted_diff.to_bits(), q.predicted_diff.to_bits());
                prop_assert_eq!(p.home_advantage_term.to_bits(), q.home_advantage_term.to_bits());
                prop_assert_eq!(p.predicted_winner, q.predicted_winner);
            }
        }
    }

    #[test]
    fn exponential_fit_is_scale_equivariant(
        c1 in -20.0f64..20.0,
        c2 in prop_oneof![-8.0f64..-1.0, 1.0f64..8.0],
        tau in 1.5f64..6.0,
        k in prop_oneof![0.1f64..0.9, 1.5f64..20.0],
        shift in -50.0f64..50.0,
    ) {
        let xs: Vec<f64> = (1..=14).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| c1 + c2 * (-x / tau).exp() + 0.05 * (x * 1.7).sin()).collect();
        let base = fit_exponential(&xs, &ys).unwrap();
        let scaled: Vec<f64> = ys.iter().map(|&y| k * y + shift).collect();
        let fit = fit_exponential(&xs, &scaled).unwrap();
        prop_assert!((fit.tau / base.tau - 1.0).abs() < 1e-4, "tau {} vs {}", fit.tau, base.tau);
        prop_assert!((fit.c2 / (k * base.c2) - 1.0).abs() < 1e-4);
        prop_assert!((fit.c1 - (k * base.c1 + shift)).abs() < 1e-4 * (k * base.c1.abs() + shift.abs() + 1.0));
    }

    #[test]
    fn slopes_differ_by_exactly_one(rows in prop::collection::vec((0i64..3000, 0i64..3000), 3..40)) {
        let totals = rows
            .iter()
            .enumerate()
            .map(|(i, &(f, a))| league_stats::structure::TeamSeasonTotals {
                team: TeamId::new(&format!("t{i}")).unwrap(),
                season: league_stats::SeasonKey::top("1"),
                goals_for: f,
                goals_against: a,
                goal_diff: f - a,
                elite: false,
            })
            .collect::<Vec<_>>();
        if let Ok(s) = attack_defense_slopes::<f64>(&totals, i64::MAX) {
            prop_assert_eq!(s.exact_difference(), Ratio::from_integer(1));
        }
    }

    #[test]
    fn elite_flagging_is_monotone(ds in small_league(), lo in -200i64..200, step in 0i64..200) {
        let count = |th| team_season_totals(&ds, th).iter().filter(|t| t.elite).count();
        prop_assert!(count(lo + step) <= count(lo));
    }
}

/// A season whose second leg replays the first with venues and goals swapped.
fn mirrored(firsts: &[(u32, u32)]) -> LeagueDataset {
    let schedule = league_stats::schedule_round_robin(4).unwrap();
    let mut k = 0;
    let mut out = Vec::new();
    for (d, day) in schedule.iter().enumerate().take(3) {
        for &(h, a) in day {
            let (gh, ga) = firsts[k % firsts.len()];
            k += 1;
            let (h, a) = (format!("T{h}"), format!("T{a}"));
            out.push(MatchRecord::new("1", d as u32 + 1, &h, &a, gh, ga));
            out.push(MatchRecord::new("1", d as u32 + 4, &a, &h, ga, gh));
        }
    }
    LeagueDataset::from_matches(out).unwrap()
}

proptest! {
    #[test]
    fn mirrored_league_has_no_home_advantage(firsts in prop::collection::vec((0u32..50, 0u32..50), 6)) {
        let ds = mirrored(&firsts);
        let h: f64 = home_advantage(ds.matches()).unwrap();
        prop_assert_eq!(h, 0.0);
    }

    #[test]
    fn seasonal_autocorrelation_is_normalised(ds in small_league()) {
        if let Ok(c) = seasonal_autocorrelation::<f64>(&ds) {
            prop_assert_eq!(c.values[0], 1.0);
        }
    }
}

#[test]
fn scalar_types_agree() {
    let cfg = SimulationConfig {
        n_teams: 6,
        n_seasons: 2,
        fitness_sd: 2.0,
        seed: 5,
        ..Default::default()
    };
    let (ds, _) = simulate_league(&cfg).unwrap();
    let a = match_statistics::<f64>(&ds, None).unwrap();
    let b = match_statistics::<f32>(&ds, None).unwrap();
    assert_relative_eq!(a.mean_total, f64::from(b.mean_total), max_relative = 1e-6);
    assert_relative_eq!(a.var_total, f64::from(b.var_total), max_relative = 1e-5);
}
