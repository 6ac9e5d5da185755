//! Attack/defense asymmetry of season goal totals and the goal-difference
//! change of promoted teams.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::dataset::{LeagueDataset, SeasonKey, SeasonLabel, TeamId, Tier};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{self, LineFit};

pub const DEFAULT_ELITE_THRESHOLD: i64 = 150;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamSeasonTotals {
    pub team: TeamId,
    pub season: SeasonKey,
    pub goals_for: i64,
    pub goals_against: i64,
    pub goal_diff: i64,
    /// `goal_diff > elite_threshold`.
    pub elite: bool,
}

pub fn team_season_totals(dataset: &LeagueDataset, elite_threshold: i64) -> Vec<TeamSeasonTotals> {
    let mut out = Vec::new();
    for view in dataset.seasons() {
        for (team, (f, a)) in view.team_totals() {
            let (f, a) = (f as i64, a as i64);
            out.push(TeamSeasonTotals {
                team,
                season: view.key.clone(),
                goals_for: f,
                goals_against: a,
                goal_diff: f - a,
                elite: f - a > elite_threshold,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EliteResidual<T> {
    pub team: TeamId,
    pub season: SeasonKey,
    pub goal_diff: i64,
    pub residual_attack: T,
    pub residual_defense: T,
}

/// Slopes of season goals for / against on goal difference. The slopes are
/// kept as exact rationals so that `attack - defense == 1` holds exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackDefenseSlopes<T> {
    pub slope_attack: T,
    pub slope_defense: T,
    pub intercept_attack: T,
    pub intercept_defense: T,
    pub n_points: usize,
    pub elite_threshold: i64,
    pub elite: Vec<EliteResidual<T>>,
    #[serde(skip)]
    pub exact_attack: Ratio<i128>,
    #[serde(skip)]
    pub exact_defense: Ratio<i128>,
}

impl<T> AttackDefenseSlopes<T> {
    pub fn exact_difference(&self) -> Ratio<i128> {
        self.exact_attack - self.exact_defense
    }
}

fn ratio_to<T: Scalar>(r: Ratio<i128>) -> T {
    T::lit(r.to_f64().expect("finite ratio"))
}

/// OLS of `y` on `x` over integer data: exact slope, intercept as `T`.
fn exact_line<T: Scalar>(xs: &[i64], ys: &[i64]) -> Option<(Ratio<i128>, T)> {
    let n = xs.len() as i128;
    let sx: i128 = xs.iter().map(|&v| i128::from(v)).sum();
    let sy: i128 = ys.iter().map(|&v| i128::from(v)).sum();
    let sxx: i128 = xs.iter().map(|&v| i128::from(v) * i128::from(v)).sum();
    let sxy: i128 = xs.iter().zip(ys).map(|(&x, &y)| i128::from(x) * i128::from(y)).sum();
    let den = n * sxx - sx * sx;
    if den == 0 {
        return None;
    }
    let slope = Ratio::new(n * sxy - sx * sy, den);
    let intercept = Ratio::new(sy, n) - slope * Ratio::new(sx, n);
    Some((slope, ratio_to(intercept)))
}

pub fn attack_defense_slopes<T: Scalar>(
    totals: &[TeamSeasonTotals],
    elite_threshold: i64,
) -> Result<AttackDefenseSlopes<T>> {
    let regular: Vec<&TeamSeasonTotals> = totals.iter().filter(|t| t.goal_diff <= elite_threshold).collect();
    if regular.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slopes need at least 3 non-elite team-seasons, got {}",
            regular.len()
        )));
    }
    let dg: Vec<i64> = regular.iter().map(|t| t.goal_diff).collect();
    let gf: Vec<i64> = regular.iter().map(|t| t.goals_for).collect();
    let ga: Vec<i64> = regular.iter().map(|t| t.goals_against).collect();
    let degenerate = || Error::Degenerate("all goal differences are equal".into());
    let (exact_attack, intercept_attack) = exact_line::<T>(&dg, &gf).ok_or_else(degenerate)?;
    let (exact_defense, intercept_defense) = exact_line::<T>(&dg, &ga).ok_or_else(degenerate)?;
    let slope_attack: T = ratio_to(exact_attack);
    let slope_defense: T = ratio_to(exact_defense);
    let elite = totals
        .iter()
        .filter(|t| t.goal_diff > elite_threshold)
        .map(|t| {
            let x = T::from_int(t.goal_diff);
            EliteResidual {
                team: t.team.clone(),
                season: t.season.clone(),
                goal_diff: t.goal_diff,
                residual_attack: T::from_int(t.goals_for) - (intercept_attack + slope_attack * x),
                residual_defense: T::from_int(t.goals_against) - (intercept_defense + slope_defense * x),
            }
        })
        .collect();
    Ok(AttackDefenseSlopes {
        slope_attack,
        slope_defense,
        intercept_attack,
        intercept_defense,
        n_points: regular.len(),
        elite_threshold,
        elite,
        exact_attack,
        exact_defense,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupCorrelation<T> {
    pub n: usize,
    /// corr(goal difference, goals for)
    pub diff_attack: Option<T>,
    /// corr(goal difference, goals against)
    pub diff_defense: Option<T>,
    /// corr(goals for, goals against)
    pub attack_defense: Option<T>,
    pub undersized: bool,
}

/// Correlations pooled over all team-seasons, split by sign of the season
/// goal difference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCorrelations<T> {
    pub non_negative: GroupCorrelation<T>,
    pub negative: GroupCorrelation<T>,
}

fn group<T: Scalar>(rows: &[&TeamSeasonTotals]) -> GroupCorrelation<T> {
    let n = rows.len();
    if n < 3 {
        return GroupCorrelation {
            n,
            diff_attack: None,
            diff_defense: None,
            attack_defense: None,
            undersized: true,
        };
    }
    let col = |f: fn(&TeamSeasonTotals) -> i64| -> Vec<T> { rows.iter().map(|t| T::from_int(f(t))).collect() };
    let dg = col(|t| t.goal_diff);
    let gf = col(|t| t.goals_for);
    let ga = col(|t| t.goals_against);
    GroupCorrelation {
        n,
        diff_attack: stats::pearson(&dg, &gf),
        diff_defense: stats::pearson(&dg, &ga),
        attack_defense: stats::pearson(&gf, &ga),
        undersized: false,
    }
}

pub fn split_correlations<T: Scalar>(totals: &[TeamSeasonTotals]) -> SplitCorrelations<T> {
    let (pos, neg): (Vec<&TeamSeasonTotals>, Vec<&TeamSeasonTotals>) = totals.iter().partition(|t| t.goal_diff >= 0);
    SplitCorrelations {
        non_negative: group(&pos),
        negative: group(&neg),
    }
}

/// Ratio of persistent variances of goals for and goals against.
pub fn variance_ratio_attack_defense<T: Scalar>(sigma2_goals_for: T, sigma2_goals_against: T) -> Result<T> {
    if sigma2_goals_against == T::zero() {
        return Err(Error::Degenerate("goals-against variance is zero".into()));
    }
    Ok(sigma2_goals_for / sigma2_goals_against)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PromotionPair {
    pub team: TeamId,
    pub season_second_tier: SeasonLabel,
    pub season_first_tier: SeasonLabel,
    pub delta_g_second: i64,
    pub delta_g_first: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PromotionAnalysis<T> {
    pub pairs: Vec<PromotionPair>,
    /// First-tier goal difference regressed on the preceding second-tier one.
    pub fit: LineFit<T>,
}

/// Pairs each team found in tier 2 in one season and in tier 1 in the next
/// season (adjacent in season order), then fits a straight line.
pub fn promotion_analysis<T: Scalar>(dataset: &LeagueDataset) -> Result<PromotionAnalysis<T>> {
    let labels = dataset.season_labels();
    let mut gd: BTreeMap<(Tier, &SeasonLabel), BTreeMap<TeamId, i64>> = BTreeMap::new();
    for view in dataset.seasons() {
        let entry = gd.entry((view.key.tier, &view.key.label)).or_default();
        for (team, (f, a)) in view.team_totals() {
            entry.insert(team, f as i64 - a as i64);
        }
    }
    let mut pairs = Vec::new();
    for w in labels.windows(2) {
        let (Some(second), Some(first)) = (gd.get(&(Tier::Second, &w[0])), gd.get(&(Tier::First, &w[1]))) else {
            continue;
        };
        for (team, &dg2) in second {
            if let Some(&dg1) = first.get(team) {
                pairs.push(PromotionPair {
                    team: team.clone(),
                    season_second_tier: w[0].clone(),
                    season_first_tier: w[1].clone(),
                    delta_g_second: dg2,
                    delta_g_first: dg1,
                });
            }
        }
    }
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "promotion analysis needs at least 2 promoted teams, found {}",
            pairs.len()
        )));
    }
    let xs: Vec<T> = pairs.iter().map(|p| T::from_int(p.delta_g_second)).collect();
    let ys: Vec<T> = pairs.iter().map(|p| T::from_int(p.delta_g_first)).collect();
    let fit = stats::fit_line(&xs, &ys, None)?;
    Ok(PromotionAnalysis { pairs, fit })
}
