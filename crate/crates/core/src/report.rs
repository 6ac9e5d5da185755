//! Analysis bundles for the command-line front end: each section pairs a JSON
//! value with the CSV series behind its plots, and JSON is written with a
//! fixed float format so reruns are byte-identical.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{LeagueDataset, Tier};
use crate::descriptive::{self, SeasonQuantity, Side};
use crate::error::{Error, Result};
use crate::fitness;
use crate::predict::{self, PredictionOptions};
use crate::structure;
use crate::variance::{self, DecompositionOptions, Quantity, DEFAULT_T_RANGE, SOCCER_REFERENCE};

pub const SCHEMA_VERSION: u32 = 1;

/// Lags used for the exponential fit of the match-day autocorrelation.
pub const DEFAULT_FIT_MAX_LAG: u32 = 14;

/// A named CSV series.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Result of one analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub json: Value,
    pub tables: Vec<Table>,
}

/// Float text used in JSON and CSV: 17 significant digits, empty for NaN.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

struct FixedFloat;

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Compact JSON with every float at 17 significant digits, newline
/// terminated.
pub fn to_json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

fn to_value<S: Serialize>(s: &S) -> Result<Value> {
    Ok(serde_json::to_value(s)?)
}

pub fn describe(dataset: &LeagueDataset) -> Result<Section> {
    let stats = descriptive::match_statistics::<f64>(dataset, None)?;
    let mut hist = Table::new("goal_histogram", &["side", "goals", "count"]);
    let mut hists = serde_json::Map::new();
    for side in [Side::Home, Side::Away, Side::Pooled] {
        let h = descriptive::goal_histogram::<f64>(dataset, side)?;
        let name = to_value(&side)?.as_str().expect("unit variant").to_string();
        for (g, c) in &h.counts {
            hist.push(vec![name.clone(), g.to_string(), c.to_string()]);
        }
        hists.insert(name, to_value(&h)?);
    }
    let quantities = [
        SeasonQuantity::TotalGoals,
        SeasonQuantity::HomeAdvantage,
        SeasonQuantity::PositiveGdShare,
        SeasonQuantity::PositiveGdGoalShare,
    ];
    let mut header = vec!["season", "tier"];
    let names: Vec<String> = quantities
        .iter()
        .map(|q| to_value(q).map(|v| v.as_str().expect("unit variant").to_string()))
        .collect::<Result<_>>()?;
    header.extend(names.iter().map(String::as_str));
    let mut seasons = Table::new("season_series", &header);
    let series: Vec<_> = quantities
        .iter()
        .map(|&q| descriptive::per_season_series::<f64>(dataset, q))
        .collect::<Result<_>>()?;
    for (i, (key, _)) in series[0].iter().enumerate() {
        let mut row = vec![key.label.to_string(), key.tier.number().to_string()];
        row.extend(series.iter().map(|s| fmt_float(s[i].1)));
        seasons.push(row);
    }
    let json = json!({
        "match_statistics": to_value(&stats)?,
        "histograms": hists,
        "team_shares": to_value(&descriptive::team_shares::<f64>(dataset)?)?,
        "extreme_matches": to_value(&descriptive::extreme_matches(dataset))?,
    });
    Ok(Section {
        json,
        tables: vec![hist, seasons],
    })
}

/// Same-opponent lag of a mirrored double round-robin: half the modal season
/// length.
fn same_opponent_lag(dataset: &LeagueDataset) -> Option<u32> {
    let mut lengths = std::collections::BTreeMap::<u32, usize>::new();
    for v in dataset.seasons() {
        *lengths.entry(v.n_match_days).or_default() += 1;
    }
    let (&modal, _) = lengths.iter().max_by_key(|(&len, &n)| (n, len))?;
    (modal % 2 == 0).then_some(modal / 2)
}

pub fn fitness(dataset: &LeagueDataset, neutralize: bool, fit_max_lag: u32) -> Result<Section> {
    let half = fitness::half_season_correlation::<f64>(dataset)?;
    let curve = fitness::matchday_autocorrelation::<f64>(dataset, neutralize)?;
    let fit = fitness::fit_exponential(&curve, fit_max_lag)?;
    let seasonal = fitness::seasonal_autocorrelation::<f64>(dataset)?;
    let skip = same_opponent_lag(dataset);
    let (mean_excl, mean_excl_se) = curve.mean_level_excluding(skip);

    let mut half_t = Table::new("half_season", &["season", "tier", "team", "first_half", "second_half"]);
    for p in &half.points {
        half_t.push(vec![
            p.season.label.to_string(),
            p.season.tier.number().to_string(),
            p.team.name().to_string(),
            p.first_half.to_string(),
            p.second_half.to_string(),
        ]);
    }
    let mut h_t = Table::new("matchday_autocorrelation", &["lag", "h", "stderr", "count", "fitted"]);
    for (i, &lag) in curve.lags.iter().enumerate() {
        let fitted = (lag <= fit_max_lag).then(|| fit.eval(f64::from(lag)));
        h_t.push(vec![
            lag.to_string(),
            fmt_float(curve.values[i]),
            fmt_float(curve.stderr[i]),
            curve.counts[i].to_string(),
            fmt_opt(fitted),
        ]);
    }
    let mut c_t = Table::new("seasonal_autocorrelation", &["lag", "c_y", "pairs"]);
    for (i, lag) in seasonal.lags.iter().enumerate() {
        c_t.push(vec![
            lag.to_string(),
            fmt_float(seasonal.values[i]),
            seasonal.pair_counts[i].to_string(),
        ]);
    }
    let json = json!({
        "half_season": {"r": half.r, "r2": half.r2, "n_points": half.points.len()},
        "matchday_autocorrelation": {
            "neutralized": curve.neutralized,
            "mean_level_all_lags": curve.mean_level,
            "mean_level_all_lags_stderr": curve.mean_level_stderr,
            "same_opponent_lag": skip,
            "mean_level_excluding_same_opponent_lag": mean_excl,
            "mean_level_excluding_same_opponent_lag_stderr": mean_excl_se,
            "lags": curve.lags,
            "values": curve.values,
            "counts": curve.counts,
        },
        "exponential_fit": to_value(&fit)?,
        "seasonal_autocorrelation": to_value(&seasonal)?,
    });
    Ok(Section {
        json,
        tables: vec![half_t, h_t, c_t],
    })
}

pub fn variance(dataset: &LeagueDataset, t_max: Option<usize>) -> Result<Section> {
    let series = variance::neutralize::<f64>(dataset)?;
    let shortest = series.iter().map(|s| s.matches.len()).min().ok_or(Error::NoMatches)?;
    let t_hi = match t_max {
        Some(t) => t,
        None => {
            let t = (*DEFAULT_T_RANGE.end()).min(shortest);
            if t < *DEFAULT_T_RANGE.end() {
                log::warn!("window lengths clipped to 1..={t} by the shortest team-season");
            }
            t
        }
    };
    let range = *DEFAULT_T_RANGE.start()..=t_hi;
    let opts = DecompositionOptions::default();
    let diff = variance::variance_decomposition(&series, Quantity::Diff, range.clone(), opts)?;
    let gf = variance::variance_decomposition(&series, Quantity::GoalsFor, range.clone(), opts)?;
    let ga = variance::variance_decomposition(&series, Quantity::GoalsAgainst, range.clone(), opts)?;
    let mean_goals = descriptive::match_statistics::<f64>(dataset, None)?.mean_total;
    let influence = variance::stochastic_influence_curve(diff.sigma2, diff.a, t_hi.max(34));
    let r = SOCCER_REFERENCE;
    let transfer =
        variance::transfer_comparison(diff.sigma2, diff.a, r.sigma2_diff, r.a_diff, mean_goals, r.mean_goals)?;

    let mut pts = Table::new(
        "variance_points",
        &["quantity", "t", "variance", "n_windows", "predicted"],
    );
    for d in [&diff, &gf, &ga] {
        let q = to_value(&d.quantity)?.as_str().expect("unit variant").to_string();
        for p in &d.points {
            pts.push(vec![
                q.clone(),
                p.t.to_string(),
                fmt_float(p.variance),
                p.n_windows.to_string(),
                fmt_float(d.predicted(p.t)),
            ]);
        }
    }
    let mut inf = Table::new("stochastic_influence", &["t", "share"]);
    for &(t, s) in &influence.points {
        inf.push(vec![t.to_string(), fmt_float(s)]);
    }
    let json = json!({
        "t_range": [range.start(), range.end()],
        "mean_goals": mean_goals,
        "decompositions": [to_value(&diff)?, to_value(&gf)?, to_value(&ga)?],
        "stochastic_influence": {"t_star": influence.t_star},
        "transfer": {
            "comparison": to_value(&transfer)?,
            "reference": to_value(&r)?,
        },
        "binomial_check": to_value(&variance::binomial_check(diff.a, mean_goals))?,
        "attack_defense_variance_ratio": structure::variance_ratio_attack_defense(gf.sigma2, ga.sigma2).ok(),
    });
    Ok(Section {
        json,
        tables: vec![pts, inf],
    })
}

pub fn predict(dataset: &LeagueDataset, options: PredictionOptions) -> Result<Section> {
    let ev = predict::evaluate_predictions::<f64>(dataset, options)?;
    let mut t = Table::new(
        "prediction_by_matchday",
        &[
            "t",
            "n",
            "error_variance",
            "accuracy",
            "n_decisive",
            "accuracy_excluding_draws",
        ],
    );
    for s in &ev.per_matchday {
        t.push(vec![
            s.t.to_string(),
            s.n.to_string(),
            fmt_float(s.error_variance),
            fmt_float(s.accuracy),
            s.n_decisive.to_string(),
            fmt_float(s.accuracy_excluding_draws),
        ]);
    }
    Ok(Section {
        json: to_value(&ev)?,
        tables: vec![t],
    })
}

/// Slopes and correlations use `top` (the analysed tier); the promotion
/// regression needs both tiers and uses `all`.
pub fn structure(top: &LeagueDataset, all: &LeagueDataset, elite_threshold: i64) -> Result<Section> {
    let totals = structure::team_season_totals(top, elite_threshold);
    let slopes = structure::attack_defense_slopes::<f64>(&totals, elite_threshold)?;
    let split = structure::split_correlations::<f64>(&totals);
    let promotion = match structure::promotion_analysis::<f64>(all) {
        Ok(p) => Some(p),
        Err(Error::InsufficientData(why)) => {
            log::warn!("promotion analysis skipped: {why}");
            None
        }
        Err(e) => return Err(e),
    };

    let mut tot = Table::new(
        "team_season_totals",
        &[
            "season",
            "tier",
            "team",
            "goals_for",
            "goals_against",
            "goal_diff",
            "elite",
        ],
    );
    for t in &totals {
        tot.push(vec![
            t.season.label.to_string(),
            t.season.tier.number().to_string(),
            t.team.name().to_string(),
            t.goals_for.to_string(),
            t.goals_against.to_string(),
            t.goal_diff.to_string(),
            t.elite.to_string(),
        ]);
    }
    let mut tables = vec![tot];
    let promotion_json = match &promotion {
        Some(p) => {
            let mut pt = Table::new(
                "promotion_pairs",
                &[
                    "team",
                    "season_second_tier",
                    "season_first_tier",
                    "goal_diff_second",
                    "goal_diff_first",
                ],
            );
            for q in &p.pairs {
                pt.push(vec![
                    q.team.name().to_string(),
                    q.season_second_tier.to_string(),
                    q.season_first_tier.to_string(),
                    q.delta_g_second.to_string(),
                    q.delta_g_first.to_string(),
                ]);
            }
            tables.push(pt);
            to_value(p)?
        }
        None => json!({"available": false}),
    };
    let json = json!({
        "attack_defense_slopes": to_value(&slopes)?,
        "exact_slopes": {
            "attack": slopes.exact_attack.to_string(),
            "defense": slopes.exact_defense.to_string(),
            "difference": slopes.exact_difference().to_string(),
        },
        "split_correlations": to_value(&split)?,
        "promotion": promotion_json,
    });
    Ok(Section { json, tables })
}

/// Settings shared by the analyses of a full report.
#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub neutralize: bool,
    pub fit_max_lag: u32,
    pub t_max: Option<usize>,
    pub prediction: PredictionOptions,
    pub elite_threshold: i64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            neutralize: false,
            fit_max_lag: DEFAULT_FIT_MAX_LAG,
            t_max: None,
            prediction: PredictionOptions::default(),
            elite_threshold: structure::DEFAULT_ELITE_THRESHOLD,
        }
    }
}

/// Every analysis on the first tier of `all` (promotion uses both tiers).
pub fn full_report(all: &LeagueDataset, opts: &ReportOptions) -> Result<Section> {
    let top = all.tier(Tier::First)?;
    let parts = [
        ("describe", describe(&top)?),
        ("fitness", fitness(&top, opts.neutralize, opts.fit_max_lag)?),
        ("variance", variance(&top, opts.t_max)?),
        ("predict", predict(&top, opts.prediction)?),
        ("structure", structure(&top, all, opts.elite_threshold)?),
    ];
    let mut json = serde_json::Map::new();
    let mut tables = Vec::new();
    for (name, s) in parts {
        json.insert(name.to_string(), s.json);
        tables.extend(s.tables);
    }
    Ok(Section {
        json: Value::Object(json),
        tables,
    })
}
