//! Per-match and per-season descriptive statistics and home advantage.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dataset::{LeagueDataset, MatchRecord, SeasonKey, SeasonLabel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchStatistics<T> {
    pub n_matches: usize,
    pub mean_total: T,
    pub mean_home: T,
    pub mean_away: T,
    pub var_total: T,
    pub var_home: T,
    pub var_away: T,
    pub home_advantage: T,
    pub p_home_win: T,
    pub p_away_win: T,
    pub p_draw: T,
}

/// Exact population moments of integer observations, converted once.
struct IntMoments {
    n: i128,
    sum: i128,
    sum_sq: i128,
}

impl IntMoments {
    fn new() -> Self {
        Self {
            n: 0,
            sum: 0,
            sum_sq: 0,
        }
    }

    fn push(&mut self, x: i64) {
        self.n += 1;
        self.sum += i128::from(x);
        self.sum_sq += i128::from(x) * i128::from(x);
    }

    fn mean<T: Scalar>(&self) -> T {
        T::from_i128(self.sum).expect("sum fits") / T::from_i128(self.n).expect("count fits")
    }

    fn variance<T: Scalar>(&self) -> T {
        let num = self.n * self.sum_sq - self.sum * self.sum;
        T::from_i128(num).expect("moment fits") / T::from_i128(self.n * self.n).expect("count fits")
    }
}

/// Home advantage (mean home goals minus mean away goals) over `matches`.
pub fn home_advantage<'a, T: Scalar>(matches: impl IntoIterator<Item = &'a MatchRecord>) -> Option<T> {
    let mut n = 0usize;
    let mut diff = 0i64;
    for m in matches {
        n += 1;
        diff += m.diff();
    }
    (n > 0).then(|| T::from_int(diff) / T::from_count(n))
}

fn select<'a>(
    dataset: &'a LeagueDataset,
    seasons: Option<&'a BTreeSet<SeasonLabel>>,
) -> impl Iterator<Item = &'a MatchRecord> {
    dataset
        .matches()
        .iter()
        .filter(move |m| seasons.is_none_or(|s| s.contains(&m.season)))
}

pub fn match_statistics<T: Scalar>(
    dataset: &LeagueDataset,
    seasons: Option<&BTreeSet<SeasonLabel>>,
) -> Result<MatchStatistics<T>> {
    let (mut total, mut home, mut away) = (IntMoments::new(), IntMoments::new(), IntMoments::new());
    let (mut wins, mut losses, mut draws) = (0usize, 0usize, 0usize);
    for m in select(dataset, seasons) {
        total.push(i64::from(m.total()));
        home.push(i64::from(m.goals_home));
        away.push(i64::from(m.goals_away));
        match m.goals_home.cmp(&m.goals_away) {
            std::cmp::Ordering::Greater => wins += 1,
            std::cmp::Ordering::Less => losses += 1,
            std::cmp::Ordering::Equal => draws += 1,
        }
    }
    if total.n == 0 {
        return Err(Error::EmptySelection("no matches in the selected seasons".into()));
    }
    let n = total.n as usize;
    let mean_home: T = home.mean();
    let mean_away: T = away.mean();
    let frac = |k: usize| T::from_count(k) / T::from_count(n);
    Ok(MatchStatistics {
        n_matches: n,
        mean_total: mean_home + mean_away,
        mean_home,
        mean_away,
        var_total: total.variance(),
        var_home: home.variance(),
        var_away: away.variance(),
        home_advantage: mean_home - mean_away,
        p_home_win: frac(wins),
        p_away_win: frac(losses),
        p_draw: frac(draws),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Home,
    Away,
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoalHistogram<T> {
    pub side: Side,
    pub counts: BTreeMap<u32, usize>,
    pub n_observations: usize,
    pub min: u32,
    pub max: u32,
    /// Gaussian moment fit: sample mean and population variance.
    pub fitted_mean: T,
    pub fitted_variance: T,
}

pub fn goal_histogram<T: Scalar>(dataset: &LeagueDataset, side: Side) -> Result<GoalHistogram<T>> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut moments = IntMoments::new();
    for m in dataset.matches() {
        let goals: &[u32] = match side {
            Side::Home => &[m.goals_home],
            Side::Away => &[m.goals_away],
            Side::Pooled => &[m.goals_home, m.goals_away],
        };
        for &g in goals {
            *counts.entry(g).or_default() += 1;
            moments.push(i64::from(g));
        }
    }
    let (Some((&min, _)), Some((&max, _))) = (counts.first_key_value(), counts.last_key_value()) else {
        return Err(Error::EmptySelection("no goals to histogram".into()));
    };
    Ok(GoalHistogram {
        side,
        n_observations: moments.n as usize,
        counts,
        min,
        max,
        fitted_mean: moments.mean(),
        fitted_variance: moments.variance(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeasonQuantity {
    /// Mean goals per match.
    TotalGoals,
    /// Mean home goals minus mean away goals.
    HomeAdvantage,
    /// Fraction of teams finishing with a positive goal difference.
    PositiveGdShare,
    /// Fraction of all goals scored by those teams.
    PositiveGdGoalShare,
}

pub fn per_season_series<T: Scalar>(dataset: &LeagueDataset, quantity: SeasonQuantity) -> Result<Vec<(SeasonKey, T)>> {
    if dataset.is_empty() {
        return Err(Error::NoMatches);
    }
    Ok(dataset
        .seasons()
        .map(|view| {
            let n = view.matches.len();
            let value = match quantity {
                SeasonQuantity::TotalGoals => {
                    let goals: u64 = view.matches.iter().map(|m| u64::from(m.total())).sum();
                    T::from_u64(goals).expect("fits") / T::from_count(n)
                }
                SeasonQuantity::HomeAdvantage => {
                    home_advantage(view.matches.iter().copied()).expect("season has matches")
                }
                SeasonQuantity::PositiveGdShare | SeasonQuantity::PositiveGdGoalShare => {
                    let totals = view.team_totals();
                    let positive = totals.values().filter(|(f, a)| f > a);
                    if quantity == SeasonQuantity::PositiveGdShare {
                        T::from_count(positive.count()) / T::from_count(totals.len())
                    } else {
                        let scored: u64 = positive.map(|(f, _)| f).sum();
                        let all: u64 = totals.values().map(|(f, _)| f).sum();
                        T::from_u64(scored).expect("fits") / T::from_u64(all.max(1)).expect("fits")
                    }
                }
            };
            (view.key.clone(), value)
        })
        .collect())
}

/// Shares of positive-goal-difference teams, computed both as a mean of
/// per-season values and pooled over all team-seasons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamShares<T> {
    pub positive_gd_share_season_mean: T,
    pub positive_gd_share_pooled: T,
    pub goal_share_season_mean: T,
    pub goal_share_pooled: T,
}

pub fn team_shares<T: Scalar>(dataset: &LeagueDataset) -> Result<TeamShares<T>> {
    let mean_of = |q| -> Result<T> {
        let s: Vec<T> = per_season_series(dataset, q)?.into_iter().map(|(_, v)| v).collect();
        Ok(crate::stats::mean(&s).expect("non-empty"))
    };
    let (mut teams, mut positive, mut goals, mut positive_goals) = (0usize, 0usize, 0u64, 0u64);
    for view in dataset.seasons() {
        for (f, a) in view.team_totals().into_values() {
            teams += 1;
            goals += f;
            if f > a {
                positive += 1;
                positive_goals += f;
            }
        }
    }
    Ok(TeamShares {
        positive_gd_share_season_mean: mean_of(SeasonQuantity::PositiveGdShare)?,
        positive_gd_share_pooled: T::from_count(positive) / T::from_count(teams),
        goal_share_season_mean: mean_of(SeasonQuantity::PositiveGdGoalShare)?,
        goal_share_pooled: T::from_u64(positive_goals).expect("fits") / T::from_u64(goals.max(1)).expect("fits"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extreme {
    pub value: u32,
    pub matches: Vec<MatchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeMatches {
    pub max_total: Extreme,
    pub min_total: Extreme,
    pub max_abs_diff: Extreme,
}

fn extreme(dataset: &LeagueDataset, key: impl Fn(&MatchRecord) -> u32, want_max: bool) -> Extreme {
    let values = dataset.matches().iter().map(&key);
    let value = if want_max { values.max() } else { values.min() }.expect("non-empty dataset");
    Extreme {
        value,
        matches: dataset.matches().iter().filter(|m| key(m) == value).cloned().collect(),
    }
}

/// Largest and smallest match totals and largest margin; ties are all listed.
pub fn extreme_matches(dataset: &LeagueDataset) -> ExtremeMatches {
    ExtremeMatches {
        max_total: extreme(dataset, MatchRecord::total, true),
        min_total: extreme(dataset, MatchRecord::total, false),
        max_abs_diff: extreme(dataset, |m| m.diff().unsigned_abs() as u32, true),
    }
}
