//! Estimators checked against simulator ground truth.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use league_stats::descriptive::{home_advantage, match_statistics};
use league_stats::fitness::{self, fitness_series, half_season_correlation, matchday_autocorrelation};
use league_stats::simulate::{play_match, SecondTier};
use league_stats::stats;
use league_stats::structure::{
    promotion_analysis, split_correlations, team_season_totals, variance_ratio_attack_defense,
};
use league_stats::variance::{neutralize, variance_decomposition, NeutralizedSeries, Quantity, DEFAULT_T_RANGE};
use league_stats::{simulate_league, FitnessRedraw, LeagueDataset, SeasonKey, SimulationConfig, TeamId, Tier};

fn league(cfg: SimulationConfig) -> (LeagueDataset, league_stats::GroundTruth) {
    simulate_league(&cfg).expect("valid configuration")
}

/// Population variance of the realized fitness values, averaged over seasons.
fn realized_fitness_variance(truth: &league_stats::GroundTruth) -> f64 {
    let mut by_season: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in &truth.fitness {
        by_season.entry(f.season.to_string()).or_default().push(f.fitness);
    }
    let v: Vec<f64> = by_season
        .values()
        .map(|xs| stats::population_variance(xs).unwrap())
        .collect();
    stats::mean(&v).unwrap()
}

#[test]
fn equal_teams_score_binomial_mean() {
    let (ds, _) = league(SimulationConfig {
        seed: 11,
        ..Default::default()
    });
    let s = match_statistics::<f64>(&ds, None).unwrap();
    assert_eq!(s.n_matches, 3060);
    assert!((s.mean_total / 55.0 - 1.0).abs() < 0.01, "mean total {}", s.mean_total);
}

#[test]
fn configured_home_advantage_is_measured() {
    let (ds, _) = league(SimulationConfig {
        home_advantage: 1.87,
        seed: 12,
        ..Default::default()
    });
    let h: f64 = home_advantage(ds.matches()).unwrap();
    let diffs: Vec<f64> = ds.matches().iter().map(|m| m.diff() as f64).collect();
    let se = stats::standard_error(&diffs).unwrap();
    assert!((h - 1.87).abs() < 3.0 * se, "h = {h}, se = {se}");
}

#[test]
fn replayed_fixture_matches_binomial_moments() {
    let (na, ph, pa) = (55u32, 0.56, 0.46);
    let n = 10_000;
    let draws: Vec<(u32, u32)> = (0..n).map(|k| play_match(99, k, na, ph, pa)).collect();
    let diff: Vec<f64> = draws.iter().map(|&(h, a)| f64::from(h) - f64::from(a)).collect();
    let home: Vec<f64> = draws.iter().map(|&(h, _)| f64::from(h)).collect();
    let expected = f64::from(na) * (ph - pa);
    let se = stats::standard_error(&diff).unwrap();
    assert!((stats::mean(&diff).unwrap() - expected).abs() < 4.0 * se);
    let var = stats::sample_variance(&home).unwrap();
    let model = f64::from(na) * ph * (1.0 - ph);
    // sample variance of n draws has relative sd about sqrt(2/n)
    assert!(
        (var / model - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(),
        "{var} vs {model}"
    );
}

#[test]
fn strong_team_season_sum_tracks_fitness() {
    // One team at +5 goals per match, the rest at 0 (fitness_sd = 0 and a
    // home advantage of zero); shift via the tier-free single-team check.
    let cfg = SimulationConfig {
        n_teams: 18,
        n_seasons: 1,
        seed: 13,
        ..Default::default()
    };
    let (ds, _) = league(cfg);
    // Rebuild the season with team 01 strengthened by replaying its fixtures.
    let key = SeasonKey::top("1");
    let strong = TeamId::new("Team 01").unwrap();
    let (na, p0, f) = (55.0, 0.5, 5.0);
    let rebuilt: Vec<_> = ds
        .matches()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let edge = if m.home == strong {
                f
            } else if m.away == strong {
                -f
            } else {
                0.0
            };
            let (gh, ga) = play_match(13, k as u64, 55, p0 + edge / (2.0 * na), p0 - edge / (2.0 * na));
            let mut m = m.clone();
            (m.goals_home, m.goals_away) = (gh, ga);
            m
        })
        .collect();
    let ds = LeagueDataset::from_matches(rebuilt).unwrap();
    let series = fitness_series(&ds, &key).unwrap();
    let s = series.iter().find(|s| s.team == strong).unwrap();
    // each match difference has variance 2 n_a p(1-p) with p = 0.5 +- 5/110
    let p = 0.5 + f / (2.0 * na);
    let sigma = (34.0 * 2.0 * na * p * (1.0 - p)).sqrt();
    assert!(
        ((s.season_sum as f64) - 170.0).abs() < 3.0 * sigma,
        "sum {}",
        s.season_sum
    );
    assert_eq!(series.iter().map(|s| s.season_sum).sum::<i64>(), 0);
}

#[test]
fn independent_halves_are_uncorrelated() {
    let (ds, _) = league(SimulationConfig {
        n_seasons: 8,
        seed: 14,
        ..Default::default()
    });
    let c = half_season_correlation::<f64>(&ds).unwrap();
    assert!(c.points.len() >= 100);
    assert!(c.r2 < 0.1, "r2 = {}", c.r2);
}

#[test]
fn static_fitness_gives_flat_matchday_autocorrelation() {
    // Monte Carlo oracle: mean of (f_i - f_j)(f_i - f_k) over distinct
    // opponents j != k, from the realized fitness values.
    let sd = 13f64.sqrt();
    let mut curves = Vec::new();
    let mut oracle = Vec::new();
    for seed in 0..50 {
        let (ds, truth) = league(SimulationConfig {
            fitness_sd: sd,
            n_seasons: 10,
            seed: 1500 + seed,
            ..Default::default()
        });
        curves.push(matchday_autocorrelation::<f64>(&ds, false).unwrap());
        let f: Vec<f64> = truth.fitness.iter().take(18).map(|t| t.fitness).collect();
        let mut acc = 0.0;
        let mut n = 0.0;
        for i in 0..18 {
            for j in 0..18 {
                for k in 0..18 {
                    if i != j && i != k && j != k {
                        acc += (f[i] - f[j]) * (f[i] - f[k]);
                        n += 1.0;
                    }
                }
            }
        }
        oracle.push(acc / n);
    }
    let expected = stats::mean(&oracle).unwrap();
    for lag in [1u32, 5, 10, 14] {
        let v: Vec<f64> = curves.iter().map(|c| c.value_at(lag).unwrap()).collect();
        let m = stats::mean(&v).unwrap();
        let se = stats::standard_error(&v).unwrap();
        assert!(
            (m - expected).abs() < 4.0 * se + 0.05 * expected,
            "lag {lag}: {m} vs {expected} (se {se})"
        );
    }
}

#[test]
fn redrawn_fitness_has_no_seasonal_memory() {
    let (ds, _) = league(SimulationConfig {
        n_seasons: 50,
        fitness_sd: 3.0,
        fitness_redraw: FitnessRedraw::PerSeason,
        seed: 16,
        ..Default::default()
    });
    let c = fitness::seasonal_autocorrelation::<f64>(&ds).unwrap();
    assert_eq!(c.values[0], 1.0);
    for lag in 1..=5 {
        assert!(c.values[lag].abs() < 0.1, "c_y({lag}) = {}", c.values[lag]);
    }
}

fn decompose(ds: &LeagueDataset, q: Quantity) -> league_stats::VarianceDecompositionF64 {
    let s: Vec<NeutralizedSeries<f64>> = neutralize(ds).unwrap();
    variance_decomposition(&s, q, DEFAULT_T_RANGE, Default::default()).unwrap()
}

#[test]
fn decomposition_separates_fitness_from_binomial_noise() {
    // Over t distinct opponents from a finite league the window mean also
    // carries the opponents' average fitness. For n teams with realized
    // fitness variance s2 this adds s2 * n/(n-2) to the 1/t coefficient and
    // leaves an intercept of s2 * (n/(n-1))^2 - s2 * n/((n-1)(n-2)).
    let n: f64 = 18.0;
    for seed in 0..10 {
        let (ds, truth) = league(SimulationConfig {
            fitness_sd: 13f64.sqrt(),
            fitness_redraw: FitnessRedraw::PerSeason,
            base_efficiency: 0.52,
            seed: 1700 + seed,
            ..Default::default()
        });
        let s2 = realized_fitness_variance(&truth);
        let d = decompose(&ds, Quantity::Diff);
        let sigma2 = s2 * (n / (n - 1.0)).powi(2) - s2 * n / ((n - 1.0) * (n - 2.0));
        let a = truth.implied_a + s2 * n / (n - 2.0);
        assert!(
            (d.sigma2 / sigma2 - 1.0).abs() < 0.15,
            "seed {seed}: sigma2 {} vs {sigma2}",
            d.sigma2
        );
        assert!((d.a / a - 1.0).abs() < 0.15, "seed {seed}: A {} vs {a}", d.a);
    }
}

#[test]
fn equal_teams_give_half_binomial_ratio() {
    for seed in 0..20 {
        let (ds, _) = league(SimulationConfig {
            seed: 1800 + seed,
            ..Default::default()
        });
        let d = decompose(&ds, Quantity::Diff);
        let g = match_statistics::<f64>(&ds, None).unwrap().mean_total;
        assert!((d.a / g / 0.5 - 1.0).abs() < 0.1, "seed {seed}: A/g = {}", d.a / g);
    }
}

#[test]
fn symmetric_model_balances_attack_and_defense() {
    // 100 seasons: one fitness per team drives scoring and conceding alike.
    let (ds, _) = league(SimulationConfig {
        n_seasons: 100,
        fitness_sd: 3.0,
        fitness_redraw: FitnessRedraw::PerSeason,
        seed: 19,
        ..Default::default()
    });
    let totals = team_season_totals(&ds, i64::MAX);
    let c = split_correlations::<f64>(&totals);
    for g in [&c.non_negative, &c.negative] {
        let (a, d) = (g.diff_attack.unwrap(), g.diff_defense.unwrap());
        assert!((a.abs() - d.abs()).abs() < 0.1, "{a} vs {d}");
    }

    let mut ratios = Vec::new();
    for seed in 0..10 {
        let (ds, _) = league(SimulationConfig {
            fitness_sd: 3.0,
            fitness_redraw: FitnessRedraw::PerSeason,
            seed: 1900 + seed,
            ..Default::default()
        });
        let gf = decompose(&ds, Quantity::GoalsFor);
        let ga = decompose(&ds, Quantity::GoalsAgainst);
        ratios.push(variance_ratio_attack_defense(gf.sigma2, ga.sigma2).unwrap());
    }
    let r = stats::mean(&ratios).unwrap();
    assert!((0.8..=1.25).contains(&r), "ratio {r} from {ratios:?}");
}

#[test]
fn promotion_intercept_reflects_tier_gap() {
    // With persistent fitness a team's expected season goal difference is
    // 2n (f - tier mean), so a promoted team loses 2n times the gap between
    // the tier means it meets; that gap starts at the configured offset and
    // widens as the exchange sorts teams, so the realized means are used.
    let (delta, n) = (3.0, 18.0_f64);
    let (ds, truth) = league(SimulationConfig {
        n_seasons: 11,
        fitness_sd: 4.0,
        tier_offset: delta,
        second_tier: Some(SecondTier {
            n_teams: 18,
            promoted: 2,
        }),
        seed: 20,
        ..Default::default()
    });
    let p = promotion_analysis::<f64>(&ds).unwrap();
    assert_eq!(p.pairs.len(), 20);

    let mut means: BTreeMap<(String, Tier), Vec<f64>> = BTreeMap::new();
    for f in &truth.fitness {
        means.entry((f.season.to_string(), f.tier)).or_default().push(f.fitness);
    }
    let mean_of = |season: &str, tier| stats::mean(&means[&(season.to_string(), tier)]).unwrap();
    let first_gap = mean_of("1", Tier::First) - mean_of("1", Tier::Second);
    assert!(
        (first_gap - delta).abs() < 4.0 * 4.0 * (2.0 / n).sqrt(),
        "initial gap {first_gap}"
    );
    let gaps: Vec<f64> = p
        .pairs
        .iter()
        .map(|q| {
            mean_of(q.season_first_tier.as_str(), Tier::First) - mean_of(q.season_second_tier.as_str(), Tier::Second)
        })
        .collect();
    let expected = -2.0 * n * stats::mean(&gaps).unwrap();

    let shift: Vec<f64> = p
        .pairs
        .iter()
        .map(|q| (q.delta_g_first - q.delta_g_second) as f64)
        .collect();
    let unit_slope_intercept = stats::mean(&shift).unwrap();
    assert!(
        (unit_slope_intercept / expected - 1.0).abs() < 0.15,
        "{unit_slope_intercept} vs {expected}"
    );
    assert!(
        (p.fit.intercept - expected).abs() < 3.0 * p.fit.intercept_stderr,
        "intercept {} +- {} vs {expected}",
        p.fit.intercept,
        p.fit.intercept_stderr
    );
    assert!(
        (p.fit.slope - 1.0).abs() < 3.0 * p.fit.slope_stderr,
        "slope {}",
        p.fit.slope
    );
}

#[test]
fn simulated_data_survives_validation_and_round_trip() {
    let (ds, truth) = league(SimulationConfig {
        n_teams: 7,
        n_seasons: 3,
        fitness_sd: 1.0,
        home_advantage: 1.0,
        second_tier: Some(SecondTier {
            n_teams: 5,
            promoted: 1,
        }),
        seed: 21,
        ..Default::default()
    });
    assert_eq!(truth.clamped_events, 0);
    for v in ds.seasons() {
        assert!(v.profile().complete, "{}", v.key);
    }
    let text = ds.to_csv().unwrap();
    let back = league_stats::parse_dataset(text.as_bytes(), league_stats::InputFormat::Csv).unwrap();
    assert_eq!(back.matches(), ds.matches());
    assert_relative_eq!(truth.sigma_f2, 1.0);
}
