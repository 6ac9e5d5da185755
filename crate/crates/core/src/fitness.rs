//! Team fitness as goal difference per match and its persistence within and
//! across seasons.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{LeagueDataset, SeasonKey, SeasonView, TeamId};
use crate::descriptive::home_advantage;
use crate::error::{Error, Result};
use crate::fit::{self, ExponentialFit};
use crate::scalar::Scalar;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitnessSeries {
    pub team: TeamId,
    pub season: SeasonKey,
    pub match_days: Vec<u32>,
    pub per_match_diff: Vec<i64>,
    /// Goal-difference sums over the first and second half; `None` when the
    /// season length is odd.
    pub half_sums: Option<(i64, i64)>,
    pub season_sum: i64,
}

fn series_for(view: &SeasonView<'_>) -> Vec<FitnessSeries> {
    let split = view.half_season_split().ok();
    view.team_matches()
        .into_iter()
        .map(|(team, games)| {
            let half_sums = split.as_ref().map(|(first, _)| {
                games.iter().fold((0, 0), |(a, b), g| {
                    if first.contains(&g.match_day) {
                        (a + g.diff(), b)
                    } else {
                        (a, b + g.diff())
                    }
                })
            });
            FitnessSeries {
                team,
                season: view.key.clone(),
                match_days: games.iter().map(|g| g.match_day).collect(),
                per_match_diff: games.iter().map(|g| g.diff()).collect(),
                half_sums,
                season_sum: games.iter().map(|g| g.diff()).sum(),
            }
        })
        .collect()
}

pub fn fitness_series(dataset: &LeagueDataset, season: &SeasonKey) -> Result<Vec<FitnessSeries>> {
    Ok(series_for(&dataset.season(season)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSeasonPoint {
    pub season: SeasonKey,
    pub team: TeamId,
    pub first_half: i64,
    pub second_half: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSeasonCorrelation<T> {
    pub r: T,
    pub r2: T,
    pub points: Vec<HalfSeasonPoint>,
}

/// Pearson correlation of first- and second-half goal differences, pooled
/// over all team-seasons of even-length seasons in which the team played in
/// both halves.
pub fn half_season_correlation<T: Scalar>(dataset: &LeagueDataset) -> Result<HalfSeasonCorrelation<T>> {
    let mut points = Vec::new();
    for view in dataset.seasons() {
        let Ok((first, _)) = view.half_season_split() else {
            continue;
        };
        for (team, games) in view.team_matches() {
            let (in_first, in_second): (Vec<_>, Vec<_>) = games.iter().partition(|g| first.contains(&g.match_day));
            if in_first.is_empty() || in_second.is_empty() {
                continue;
            }
            points.push(HalfSeasonPoint {
                season: view.key.clone(),
                team,
                first_half: in_first.iter().map(|g| g.diff()).sum(),
                second_half: in_second.iter().map(|g| g.diff()).sum(),
            });
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "half-season correlation needs at least 3 team-seasons, got {}",
            points.len()
        )));
    }
    let xs: Vec<T> = points.iter().map(|p| T::from_int(p.first_half)).collect();
    let ys: Vec<T> = points.iter().map(|p| T::from_int(p.second_half)).collect();
    let r = stats::pearson(&xs, &ys)
        .ok_or_else(|| Error::Degenerate("half-season goal differences have no spread".into()))?;
    Ok(HalfSeasonCorrelation { r, r2: r * r, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutocorrelationCurve<T> {
    pub lags: Vec<u32>,
    pub values: Vec<T>,
    pub counts: Vec<usize>,
    /// Standard error of each lag's mean product.
    pub stderr: Vec<T>,
    pub mean_level: T,
    pub mean_level_stderr: T,
    pub neutralized: bool,
}

impl<T: Scalar> AutocorrelationCurve<T> {
    /// Mean of `values` over lags with data, optionally leaving one lag out
    /// (e.g. the same-opponent lag of a mirrored schedule). Returns the mean
    /// and its standard error across lags.
    pub fn mean_level_excluding(&self, skip: Option<u32>) -> (T, T) {
        let vals: Vec<T> = self
            .lags
            .iter()
            .zip(&self.values)
            .zip(&self.counts)
            .filter(|((&lag, _), &c)| c > 0 && Some(lag) != skip)
            .map(|((_, &v), _)| v)
            .collect();
        (
            stats::mean(&vals).unwrap_or_else(T::nan),
            stats::standard_error(&vals).unwrap_or_else(T::nan),
        )
    }

    pub fn value_at(&self, lag: u32) -> Option<T> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.values[i])
    }
}

/// Per-team goal differences keyed by match day, optionally with the
/// season's home advantage taken off (home side minus `h`, away side plus `h`).
fn diffs_by_day<T: Scalar>(view: &SeasonView<'_>, neutralize: bool) -> BTreeMap<TeamId, BTreeMap<u32, T>> {
    let h: T = if neutralize {
        home_advantage(view.matches.iter().copied()).unwrap_or_else(T::zero)
    } else {
        T::zero()
    };
    view.team_matches()
        .into_iter()
        .map(|(team, games)| {
            let by_day = games
                .iter()
                .map(|g| {
                    let d = T::from_int(g.diff());
                    (g.match_day, if g.at_home { d - h } else { d + h })
                })
                .collect();
            (team, by_day)
        })
        .collect()
}

/// Average product of a team's match goal differences `lag` match days apart,
/// over all teams, seasons and start days. Pairs touching an unplayed day are
/// skipped.
pub fn matchday_autocorrelation<T: Scalar>(
    dataset: &LeagueDataset,
    neutralize: bool,
) -> Result<AutocorrelationCurve<T>> {
    let max_days = dataset.seasons().map(|v| v.n_match_days).max().unwrap_or(0);
    if max_days < 2 {
        return Err(Error::InsufficientData(
            "autocorrelation needs a season with at least 2 match days".into(),
        ));
    }
    let n_lags = (max_days - 1) as usize;
    let mut products: Vec<Vec<T>> = vec![Vec::new(); n_lags];
    for view in dataset.seasons() {
        for days in diffs_by_day::<T>(&view, neutralize).values() {
            for (&t0, &d0) in days {
                for (&t1, &d1) in days.range(t0 + 1..) {
                    products[(t1 - t0 - 1) as usize].push(d0 * d1);
                }
            }
        }
    }
    let lags: Vec<u32> = (1..max_days).collect();
    let values: Vec<T> = products.iter().map(|p| stats::mean(p).unwrap_or_else(T::nan)).collect();
    let counts: Vec<usize> = products.iter().map(Vec::len).collect();
    let stderr = products
        .iter()
        .map(|p| stats::standard_error(p).unwrap_or_else(T::nan))
        .collect();
    let mut curve = AutocorrelationCurve {
        lags,
        values,
        counts,
        stderr,
        mean_level: T::zero(),
        mean_level_stderr: T::zero(),
        neutralized: neutralize,
    };
    (curve.mean_level, curve.mean_level_stderr) = curve.mean_level_excluding(None);
    Ok(curve)
}

/// Fits `c1 + c2 exp(-lag / tau)` to the curve over lags `1..=max_lag`.
pub fn fit_exponential<T: Scalar>(curve: &AutocorrelationCurve<T>, max_lag: u32) -> Result<ExponentialFit<T>> {
    let (xs, ys): (Vec<T>, Vec<T>) = curve
        .lags
        .iter()
        .zip(&curve.values)
        .zip(&curve.counts)
        .filter(|((&lag, _), &c)| lag >= 1 && lag <= max_lag && c > 0)
        .map(|((&lag, &v), _)| (T::from_count(lag as usize), v))
        .unzip();
    fit::fit_exponential(&xs, &ys)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeasonalAutocorrelation<T> {
    pub lags: Vec<usize>,
    pub values: Vec<T>,
    pub pair_counts: Vec<usize>,
}

/// Normalized correlation of half-season goal-difference sums across seasons.
///
/// Lag 0 is the cross-half product within a season (and the normaliser);
/// lags >= 1 average all four half combinations of a team present in both
/// seasons of the same tier. Season distance is the gap in season order.
pub fn seasonal_autocorrelation<T: Scalar>(dataset: &LeagueDataset) -> Result<SeasonalAutocorrelation<T>> {
    let order: BTreeMap<_, usize> = dataset
        .season_labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    // (tier, season position) -> team -> half sums
    let mut halves: BTreeMap<(crate::Tier, usize), BTreeMap<TeamId, (T, T)>> = BTreeMap::new();
    for view in dataset.seasons() {
        if view.half_season_split().is_err() {
            continue;
        }
        let entry = halves.entry((view.key.tier, order[&view.key.label])).or_default();
        for s in series_for(&view) {
            if let Some((a, b)) = s.half_sums {
                entry.insert(s.team, (T::from_int(a), T::from_int(b)));
            }
        }
    }
    if halves.len() < 2 {
        return Err(Error::InsufficientData(
            "seasonal autocorrelation needs at least 2 even-length seasons".into(),
        ));
    }

    let mut den_products = Vec::new();
    for teams in halves.values() {
        den_products.extend(teams.values().map(|&(a, b)| a * b));
    }
    let den = stats::mean(&den_products).expect("at least one team-season");
    if den == T::zero() || !den.is_finite() {
        return Err(Error::Degenerate("cross-half product averages to zero".into()));
    }

    let mut numer: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    let keys: Vec<_> = halves.keys().copied().collect();
    for (i, &(tier_a, pos_a)) in keys.iter().enumerate() {
        for &(tier_b, pos_b) in &keys[i + 1..] {
            if tier_a != tier_b {
                continue;
            }
            let (early, late) = (&halves[&(tier_a, pos_a)], &halves[&(tier_b, pos_b)]);
            let bucket = numer.entry(pos_b - pos_a).or_default();
            for (team, &(a1, a2)) in early {
                if let Some(&(b1, b2)) = late.get(team) {
                    bucket.extend([a1 * b1, a1 * b2, a2 * b1, a2 * b2]);
                }
            }
        }
    }
    numer.retain(|_, v| !v.is_empty());
    if numer.is_empty() {
        return Err(Error::InsufficientData(
            "no team persists across any pair of seasons".into(),
        ));
    }

    let mut out = SeasonalAutocorrelation {
        lags: vec![0],
        values: vec![T::one()],
        pair_counts: vec![den_products.len()],
    };
    for (lag, prods) in numer {
        out.lags.push(lag);
        out.values.push(stats::mean(&prods).expect("non-empty") / den);
        out.pair_counts.push(prods.len());
    }
    Ok(out)
}
