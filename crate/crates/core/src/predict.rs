//! Rolling match prediction from running mean goal differences plus a home
//! advantage term, and its evaluation against actual results.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{LeagueDataset, MatchRecord, SeasonKey, SeasonView, TeamId};
use crate::descriptive::home_advantage;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum HomeAdvantageStrategy {
    /// Home advantage of the current season over match days before `t`.
    #[default]
    SeasonToDate,
    /// Full value of the previous season of the same tier; falls back to
    /// season-to-date for the first season.
    PriorSeason,
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DrawRule {
    /// Predicted differences in (-0.5, 0.5) call a draw.
    #[default]
    Band,
    /// Always call a winner: home when the predicted difference is >= 0.
    ForceDecision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Default)]
pub struct PredictionOptions {
    pub home_advantage: HomeAdvantageStrategy,
    pub draw_rule: DrawRule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Home,
    Away,
    Draw,
}

impl Outcome {
    fn of_diff(diff: i64) -> Self {
        match diff.signum() {
            1 => Outcome::Home,
            -1 => Outcome::Away,
            _ => Outcome::Draw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction<T> {
    pub season: SeasonKey,
    pub match_day: u32,
    pub home: TeamId,
    pub away: TeamId,
    /// Running-mean difference plus home advantage, from the home side.
    pub predicted_diff: T,
    pub home_advantage_term: T,
    pub predicted_winner: Outcome,
    pub actual_diff: i64,
    pub correct_winner: bool,
}

fn call<T: Scalar>(diff: T, rule: DrawRule) -> Outcome {
    match rule {
        DrawRule::Band => {
            let band = T::lit(0.5);
            if diff >= band {
                Outcome::Home
            } else if diff <= -band {
                Outcome::Away
            } else {
                Outcome::Draw
            }
        }
        DrawRule::ForceDecision => {
            if diff >= T::zero() {
                Outcome::Home
            } else {
                Outcome::Away
            }
        }
    }
}

fn previous_season<'a>(dataset: &'a LeagueDataset, key: &SeasonKey) -> Option<SeasonView<'a>> {
    dataset
        .seasons()
        .filter(|v| v.key.tier == key.tier && v.key.label < key.label)
        .last()
}

fn predict_in_season<T: Scalar>(
    dataset: &LeagueDataset,
    view: &SeasonView<'_>,
    t: u32,
    options: PredictionOptions,
) -> Result<Vec<Prediction<T>>> {
    if t < 2 {
        return Err(Error::InsufficientData(format!("no history before match day {t}")));
    }
    let earlier = || view.matches.iter().copied().filter(|m| m.match_day < t);
    let h: T = match options.home_advantage {
        HomeAdvantageStrategy::Constant(x) => T::lit(x),
        HomeAdvantageStrategy::PriorSeason => previous_season(dataset, view.key)
            .and_then(|p| home_advantage(p.matches.iter().copied()))
            .or_else(|| home_advantage(earlier()))
            .unwrap_or_else(T::zero),
        HomeAdvantageStrategy::SeasonToDate => home_advantage(earlier()).unwrap_or_else(T::zero),
    };

    let mut running: BTreeMap<&TeamId, (i64, usize)> = BTreeMap::new();
    for m in earlier() {
        let e = running.entry(&m.home).or_default();
        e.0 += m.diff();
        e.1 += 1;
        let e = running.entry(&m.away).or_default();
        e.0 -= m.diff();
        e.1 += 1;
    }
    let mean = |team: &TeamId| running.get(team).map(|&(sum, n)| T::from_int(sum) / T::from_count(n));

    let fixtures: Vec<&MatchRecord> = view.matches.iter().copied().filter(|m| m.match_day == t).collect();
    let mut out = Vec::with_capacity(fixtures.len());
    for m in fixtures {
        let (Some(mh), Some(ma)) = (mean(&m.home), mean(&m.away)) else {
            log::warn!(
                "season {}, day {t}: skipping {} vs {} (team without prior matches)",
                view.key,
                m.home,
                m.away
            );
            continue;
        };
        let predicted_diff = mh - ma + h;
        let predicted_winner = call(predicted_diff, options.draw_rule);
        out.push(Prediction {
            season: view.key.clone(),
            match_day: t,
            home: m.home.clone(),
            away: m.away.clone(),
            predicted_diff,
            home_advantage_term: h,
            predicted_winner,
            actual_diff: m.diff(),
            correct_winner: predicted_winner == Outcome::of_diff(m.diff()),
        });
    }
    Ok(out)
}

/// Predicts every fixture of match day `t` using only days before `t`.
pub fn predict_matchday<T: Scalar>(
    dataset: &LeagueDataset,
    season: &SeasonKey,
    t: u32,
    options: PredictionOptions,
) -> Result<Vec<Prediction<T>>> {
    let view = dataset.season(season)?;
    predict_in_season(dataset, &view, t, options)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchdayScore<T> {
    pub t: u32,
    /// Mean squared difference between predicted and actual goal difference.
    pub error_variance: T,
    pub accuracy: T,
    pub n: usize,
    /// Accuracy over matches that did not end in a draw.
    pub accuracy_excluding_draws: T,
    pub n_decisive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionEvaluation<T> {
    pub per_matchday: Vec<MatchdayScore<T>>,
    pub overall_accuracy: T,
    pub overall_accuracy_excluding_draws: T,
    pub n_predictions: usize,
    pub options: PredictionOptions,
}

/// Predicts all match days `2..=T` of every season and pools the scores per
/// match day across seasons.
pub fn evaluate_predictions<T: Scalar>(
    dataset: &LeagueDataset,
    options: PredictionOptions,
) -> Result<PredictionEvaluation<T>> {
    let mut by_day: BTreeMap<u32, Vec<Prediction<T>>> = BTreeMap::new();
    for view in dataset.seasons() {
        for t in 2..=view.n_match_days {
            by_day
                .entry(t)
                .or_default()
                .extend(predict_in_season(dataset, &view, t, options)?);
        }
    }
    by_day.retain(|_, v| !v.is_empty());
    if by_day.is_empty() {
        return Err(Error::InsufficientData("no predictable matches".into()));
    }
    let frac = |k: usize, n: usize| {
        if n == 0 {
            T::nan()
        } else {
            T::from_count(k) / T::from_count(n)
        }
    };
    let (mut correct, mut total, mut decisive_correct, mut decisive) = (0, 0, 0, 0);
    let per_matchday = by_day
        .into_iter()
        .map(|(t, preds)| {
            let n = preds.len();
            let sq: T = preds
                .iter()
                .map(|p| {
                    let e = p.predicted_diff - T::from_int(p.actual_diff);
                    e * e
                })
                .sum();
            let ok = preds.iter().filter(|p| p.correct_winner).count();
            let dec: Vec<&Prediction<T>> = preds.iter().filter(|p| p.actual_diff != 0).collect();
            let dec_ok = dec.iter().filter(|p| p.correct_winner).count();
            correct += ok;
            total += n;
            decisive_correct += dec_ok;
            decisive += dec.len();
            MatchdayScore {
                t,
                error_variance: sq / T::from_count(n),
                accuracy: frac(ok, n),
                n,
                accuracy_excluding_draws: frac(dec_ok, dec.len()),
                n_decisive: dec.len(),
            }
        })
        .collect();
    Ok(PredictionEvaluation {
        per_matchday,
        overall_accuracy: frac(correct, total),
        overall_accuracy_excluding_draws: frac(decisive_correct, decisive),
        n_predictions: total,
        options,
    })
}
