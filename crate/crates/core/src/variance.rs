//! Decomposition of goal-difference variance into persistent fitness spread
//! and stochastic match noise: `var(mean over t matches) = sigma2 + A / t`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::dataset::{LeagueDataset, SeasonKey, TeamId};
use crate::descriptive::home_advantage;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{self, LineFit};

/// One match from a team's perspective with half the season's home advantage
/// moved from the home side to the away side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeutralizedMatch<T> {
    pub match_day: u32,
    pub g_plus: T,
    pub g_minus: T,
    pub delta: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeutralizedSeries<T> {
    pub team: TeamId,
    pub season: SeasonKey,
    pub home_advantage: T,
    pub matches: Vec<NeutralizedMatch<T>>,
}

pub fn neutralize<T: Scalar>(dataset: &LeagueDataset) -> Result<Vec<NeutralizedSeries<T>>> {
    if dataset.is_empty() {
        return Err(Error::NoMatches);
    }
    let half = T::lit(0.5);
    let mut out = Vec::new();
    for view in dataset.seasons() {
        let h: T = home_advantage(view.matches.iter().copied()).expect("season has matches");
        for (team, games) in view.team_matches() {
            let matches = games
                .iter()
                .map(|g| {
                    let (gf, ga) = (T::from_int(g.goals_for.into()), T::from_int(g.goals_against.into()));
                    let (g_plus, g_minus) = if g.at_home {
                        (gf - half * h, ga + half * h)
                    } else {
                        (gf + half * h, ga - half * h)
                    };
                    NeutralizedMatch {
                        match_day: g.match_day,
                        g_plus,
                        g_minus,
                        delta: g_plus - g_minus,
                    }
                })
                .collect();
            out.push(NeutralizedSeries {
                team,
                season: view.key.clone(),
                home_advantage: h,
                matches,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Neutral goal difference.
    #[serde(rename = "delta_g")]
    Diff,
    #[serde(rename = "g_plus")]
    GoalsFor,
    #[serde(rename = "g_minus")]
    GoalsAgainst,
}

impl Quantity {
    fn of<T: Scalar>(self, m: &NeutralizedMatch<T>) -> T {
        match self {
            Quantity::Diff => m.delta,
            Quantity::GoalsFor => m.g_plus,
            Quantity::GoalsAgainst => m.g_minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// Every run of `t` consecutive matches.
    #[default]
    Overlapping,
    /// Non-overlapping runs starting at the first match.
    Tiling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Unweighted,
    WindowCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct DecompositionOptions {
    pub windows: WindowPolicy,
    pub weighting: Weighting,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionPoint<T> {
    pub t: usize,
    pub variance: T,
    pub n_windows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceDecomposition<T> {
    pub quantity: Quantity,
    /// Persistent variance (intercept at `1/t = 0`).
    pub sigma2: T,
    /// Stochastic coefficient (slope in `1/t`).
    #[serde(rename = "A")]
    pub a: T,
    pub r2: T,
    pub sigma2_stderr: T,
    pub a_stderr: T,
    pub points: Vec<RegressionPoint<T>>,
}

impl<T: Scalar> VarianceDecomposition<T> {
    pub fn predicted(&self, t: usize) -> T {
        self.sigma2 + self.a / T::from_count(t)
    }
}

/// Default window lengths: one to half of an 18-team season.
pub const DEFAULT_T_RANGE: RangeInclusive<usize> = 1..=17;

/// For every `t` in `t_range`, the variance of `t`-match means of `quantity`
/// around its global mean, over all windows of all team-seasons; then OLS of
/// that variance on `1/t`. Windows never cross season boundaries.
pub fn variance_decomposition<T: Scalar>(
    series: &[NeutralizedSeries<T>],
    quantity: Quantity,
    t_range: RangeInclusive<usize>,
    options: DecompositionOptions,
) -> Result<VarianceDecomposition<T>> {
    let values: Vec<Vec<T>> = series
        .iter()
        .map(|s| s.matches.iter().map(|m| quantity.of(m)).collect::<Vec<T>>())
        .filter(|v| !v.is_empty())
        .collect();
    let shortest = values.iter().map(Vec::len).min().ok_or(Error::NoMatches)?;
    let (t_lo, t_hi) = (*t_range.start(), *t_range.end());
    if t_lo < 1 || t_hi < t_lo + 1 {
        return Err(Error::InsufficientData(
            "need at least 2 distinct window lengths".into(),
        ));
    }
    if t_hi > shortest {
        return Err(Error::InsufficientData(format!(
            "window length {t_hi} exceeds the shortest team-season ({shortest} matches)"
        )));
    }
    let all: Vec<T> = values.iter().flatten().copied().collect();
    let global = stats::mean(&all).expect("non-empty");

    let mut points = Vec::new();
    for t in t_range {
        let tt = T::from_count(t);
        let mut acc = T::zero();
        let mut n = 0usize;
        for v in &values {
            // prefix sums keep overlapping windows O(len)
            let mut prefix = Vec::with_capacity(v.len() + 1);
            prefix.push(T::zero());
            for &x in v {
                prefix.push(*prefix.last().expect("non-empty") + x);
            }
            let step = match options.windows {
                WindowPolicy::Overlapping => 1,
                WindowPolicy::Tiling => t,
            };
            for start in (0..=v.len() - t).step_by(step) {
                let dev = (prefix[start + t] - prefix[start]) / tt - global;
                acc = acc + dev * dev;
                n += 1;
            }
        }
        points.push(RegressionPoint {
            t,
            variance: acc / T::from_count(n),
            n_windows: n,
        });
    }

    let xs: Vec<T> = points.iter().map(|p| T::one() / T::from_count(p.t)).collect();
    let ys: Vec<T> = points.iter().map(|p| p.variance).collect();
    let weights: Option<Vec<T>> = match options.weighting {
        Weighting::Unweighted => None,
        Weighting::WindowCount => Some(points.iter().map(|p| T::from_count(p.n_windows)).collect()),
    };
    let LineFit {
        slope,
        intercept,
        r2,
        slope_stderr,
        intercept_stderr,
        ..
    } = stats::fit_line(&xs, &ys, weights.as_deref())?;
    Ok(VarianceDecomposition {
        quantity,
        sigma2: intercept,
        a: slope,
        r2,
        sigma2_stderr: intercept_stderr,
        a_stderr: slope_stderr,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticInfluence<T> {
    /// `(t, (A/t) / (sigma2 + A/t))`.
    pub points: Vec<(usize, T)>,
    /// First `t` at which the share has decayed to `1/e` of its value at
    /// `t = 1`; `None` when it never does.
    pub t_star: Option<usize>,
}

pub fn stochastic_share<T: Scalar>(sigma2: T, a: T, t: usize) -> T {
    let noise = a / T::from_count(t);
    noise / (sigma2 + noise)
}

pub fn stochastic_influence_curve<T: Scalar>(sigma2: T, a: T, t_max: usize) -> StochasticInfluence<T> {
    let points = (1..=t_max).map(|t| (t, stochastic_share(sigma2, a, t))).collect();
    let target = stochastic_share(sigma2, a, 1) * (-T::one()).exp();
    let t_star = if sigma2 > T::zero() && a > T::zero() {
        (1..=1_000_000).find(|&t| stochastic_share(sigma2, a, t) <= target)
    } else {
        None
    };
    StochasticInfluence { points, t_star }
}

/// Literature values for soccer used as a fixed reference in transfers:
/// persistent variance and stochastic coefficient per quantity, and mean
/// goals per match.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceConstants {
    pub sigma2_diff: f64,
    pub a_diff: f64,
    pub sigma2_goals_for: f64,
    pub a_goals_for: f64,
    pub sigma2_goals_against: f64,
    pub a_goals_against: f64,
    pub mean_goals: f64,
}

pub const SOCCER_REFERENCE: ReferenceConstants = ReferenceConstants {
    sigma2_diff: 0.24,
    a_diff: 3.0,
    sigma2_goals_for: 0.076,
    a_goals_for: 1.7,
    sigma2_goals_against: 0.06,
    a_goals_against: 1.3,
    mean_goals: 2.75,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferComparison<T> {
    pub goals_ratio: T,
    pub transferred_a: T,
    pub transferred_sigma2: T,
    pub ratio_handball: T,
    pub ratio_soccer_transferred: T,
}

/// Rescales the reference sport's `(sigma2, A)` to this league's scoring
/// level: `A` scales linearly and `sigma2` quadratically in the goals ratio.
pub fn transfer_comparison<T: Scalar>(
    sigma2: T,
    a: T,
    reference_sigma2: T,
    reference_a: T,
    mean_goals: T,
    reference_mean_goals: T,
) -> Result<TransferComparison<T>> {
    if !(mean_goals > T::zero() && reference_mean_goals > T::zero()) {
        return Err(Error::Degenerate("mean goals must be positive".into()));
    }
    let ratio = mean_goals / reference_mean_goals;
    let transferred_a = reference_a * ratio;
    let transferred_sigma2 = reference_sigma2 * ratio * ratio;
    Ok(TransferComparison {
        goals_ratio: ratio,
        transferred_a,
        transferred_sigma2,
        ratio_handball: a / sigma2,
        ratio_soccer_transferred: transferred_a / transferred_sigma2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinomialCheck<T> {
    pub a_over_mean_goals: T,
    /// Value expected for fair-coin conversion.
    pub reference: T,
    /// Conversion probability implied by `A / <g> = 1 - p` for equal teams.
    pub implied_efficiency: T,
}

pub fn binomial_check<T: Scalar>(a: T, mean_goals: T) -> BinomialCheck<T> {
    let ratio = a / mean_goals;
    BinomialCheck {
        a_over_mean_goals: ratio,
        reference: T::lit(0.5),
        implied_efficiency: T::one() - ratio,
    }
}
