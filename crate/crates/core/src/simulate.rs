//! Synthetic leagues from a binomial goal model with known ground truth.
//!
//! Each side of a fixture takes `attacks_per_team` shots, each converted with
//! probability
//!
//! ```text
//! p_home = p0 + (f_home - f_away + h) / (2 n_a)
//! p_away = p0 + (f_away - f_home - h) / (2 n_a)
//! ```
//!
//! so the expected goal difference is exactly `f_home - f_away + h`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::Serialize;

use crate::dataset::{LeagueDataset, MatchRecord, SeasonLabel, TeamId, Tier};
use crate::error::{Error, Result};

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), \
    one stream per draw site: fitness stream = 2^63 | season, match stream = \
    season<<40 | tier<<36 | match_day<<20 | home<<10 | away";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitnessRedraw {
    /// Fresh draw around the tier mean every season.
    PerSeason,
    /// Drawn once, kept for all seasons.
    Persistent,
    /// `f' - mu = rho (f - mu) + sqrt(1 - rho^2) sigma_f eps`.
    Ar1 { rho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondTier {
    pub n_teams: usize,
    /// Teams exchanged between the tiers after each season.
    pub promoted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub n_teams: usize,
    pub n_seasons: usize,
    pub attacks_per_team: u32,
    pub base_efficiency: f64,
    /// Standard deviation of team fitness in goals per match.
    pub fitness_sd: f64,
    pub fitness_redraw: FitnessRedraw,
    /// Goals per match added to the home side's expected difference.
    pub home_advantage: f64,
    /// Second-tier teams are on average this many goals per match weaker.
    pub tier_offset: f64,
    pub second_tier: Option<SecondTier>,
    /// Clamp efficiencies into [0, 1] and count the events instead of failing.
    pub clamp_efficiency: bool,
    pub first_season: i64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_teams: 18,
            n_seasons: 10,
            attacks_per_team: 55,
            base_efficiency: 0.5,
            fitness_sd: 0.0,
            fitness_redraw: FitnessRedraw::Persistent,
            home_advantage: 0.0,
            tier_offset: 0.0,
            second_tier: None,
            clamp_efficiency: false,
            first_season: 1,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_teams < 2 {
            return bad("n_teams must be at least 2");
        }
        if self.n_seasons < 1 {
            return bad("n_seasons must be at least 1");
        }
        if self.attacks_per_team < 1 {
            return bad("attacks_per_team must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.base_efficiency) {
            return bad("base_efficiency must lie in [0, 1]");
        }
        if !(self.fitness_sd >= 0.0 && self.fitness_sd.is_finite()) {
            return bad("fitness_sd must be finite and non-negative");
        }
        if let FitnessRedraw::Ar1 { rho } = self.fitness_redraw {
            if !(-1.0..=1.0).contains(&rho) {
                return bad("AR(1) coefficient must lie in [-1, 1]");
            }
        }
        if let Some(st) = self.second_tier {
            if st.n_teams < 2 {
                return bad("second tier needs at least 2 teams");
            }
            if st.promoted > st.n_teams.min(self.n_teams) {
                return bad("cannot promote more teams than a tier holds");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamFitness {
    pub team: String,
    pub season: SeasonLabel,
    pub tier: Tier,
    pub fitness: f64,
}

/// Oracle bookkeeping stored next to every generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundTruth {
    pub rng_algorithm: String,
    pub seed: u64,
    pub config: SimulationConfig,
    pub fitness: Vec<TeamFitness>,
    /// Configured fitness variance `fitness_sd^2`.
    pub sigma_f2: f64,
    pub home_advantage: f64,
    /// Mean conversion probability over all top-tier team-matches.
    pub mean_efficiency: f64,
    /// `2 n_a p(1 - p)` at the mean efficiency.
    pub implied_a: f64,
    pub clamped_events: usize,
}

/// Double round-robin by the circle method; a bye is inserted for odd `n`.
/// Returns match days of `(home, away)` index pairs; the second half mirrors
/// the first with venues swapped.
pub fn schedule_round_robin(n_teams: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n_teams < 2 {
        return Err(Error::InvalidConfig("round robin needs at least 2 teams".into()));
    }
    let n = n_teams + n_teams % 2;
    let bye = (n != n_teams).then_some(n - 1);
    let mut ring: Vec<usize> = (0..n).collect();
    let mut first_leg = Vec::with_capacity(n - 1);
    for round in 0..n - 1 {
        let mut day = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            let (a, b) = (ring[i], ring[n - 1 - i]);
            if Some(a) == bye || Some(b) == bye {
                continue;
            }
            let a_home = if i == 0 { round % 2 == 0 } else { i % 2 == 1 };
            day.push(if a_home { (a, b) } else { (b, a) });
        }
        first_leg.push(day);
        // rotate every slot but the first
        let last = ring.pop().expect("ring non-empty");
        ring.insert(1, last);
    }
    let second_leg: Vec<Vec<(usize, usize)>> = first_leg
        .iter()
        .map(|day| day.iter().map(|&(h, a)| (a, h)).collect())
        .collect();
    Ok(first_leg.into_iter().chain(second_leg).collect())
}

fn match_stream(season: usize, tier: Tier, day: usize, home: usize, away: usize) -> u64 {
    ((season as u64) << 40)
        | (u64::from(tier.number()) << 36)
        | ((day as u64) << 20)
        | ((home as u64 & 0x3ff) << 10)
        | (away as u64 & 0x3ff)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one fixture's goals. Pure in `(seed, stream)`: evaluation order of
/// fixtures never changes a result.
pub fn play_match(seed: u64, stream: u64, attacks: u32, p_home: f64, p_away: f64) -> (u32, u32) {
    let mut rng = rng_for(seed, stream);
    let gh = Binomial::new(u64::from(attacks), p_home)
        .expect("efficiency validated")
        .sample(&mut rng);
    let ga = Binomial::new(u64::from(attacks), p_away)
        .expect("efficiency validated")
        .sample(&mut rng);
    (gh as u32, ga as u32)
}

pub fn team_name(index: usize) -> String {
    format!("Team {:02}", index + 1)
}

struct League {
    tier: Tier,
    members: Vec<usize>,
}

pub fn simulate_league(config: &SimulationConfig) -> Result<(LeagueDataset, GroundTruth)> {
    config.validate()?;
    let n_top = config.n_teams;
    let n_second = config.second_tier.map_or(0, |s| s.n_teams);
    let n_all = n_top + n_second;
    let tier_mean = |tier: Tier| match tier {
        Tier::First => 0.0,
        Tier::Second => -config.tier_offset,
    };
    let na = f64::from(config.attacks_per_team);
    let sd = config.fitness_sd;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut leagues = vec![League {
        tier: Tier::First,
        members: (0..n_top).collect(),
    }];
    if n_second > 0 {
        leagues.push(League {
            tier: Tier::Second,
            members: (n_top..n_all).collect(),
        });
    }
    let mut tier_of: Vec<Tier> = (0..n_all)
        .map(|k| if k < n_top { Tier::First } else { Tier::Second })
        .collect();
    let mut fitness = vec![0.0; n_all];
    let names: Vec<TeamId> = (0..n_all)
        .map(|k| TeamId::new(&team_name(k)).expect("non-empty"))
        .collect();

    let mut matches = Vec::new();
    let mut truth_fitness = Vec::new();
    let mut offending = Vec::new();
    let mut clamped = 0usize;
    let mut p_sum = 0.0;
    let mut p_count = 0usize;

    for season in 0..config.n_seasons {
        let label = SeasonLabel::new((config.first_season + season as i64).to_string());
        let mut frng = rng_for(config.seed, (1u64 << 63) | season as u64);
        for k in 0..n_all {
            let mu = tier_mean(tier_of[k]);
            let eps: f64 = normal.sample(&mut frng);
            fitness[k] = match (season, config.fitness_redraw) {
                (0, _) | (_, FitnessRedraw::PerSeason) => mu + sd * eps,
                (_, FitnessRedraw::Persistent) => fitness[k],
                (_, FitnessRedraw::Ar1 { rho }) => mu + rho * (fitness[k] - mu) + (1.0 - rho * rho).sqrt() * sd * eps,
            };
        }
        for league in &leagues {
            for &k in &league.members {
                truth_fitness.push(TeamFitness {
                    team: team_name(k),
                    season: label.clone(),
                    tier: league.tier,
                    fitness: fitness[k],
                });
            }
            let schedule = schedule_round_robin(league.members.len())?;
            for (d, day) in schedule.iter().enumerate() {
                for &(hi, ai) in day {
                    let (h, a) = (league.members[hi], league.members[ai]);
                    let edge = fitness[h] - fitness[a] + config.home_advantage;
                    let mut p_home = config.base_efficiency + edge / (2.0 * na);
                    let mut p_away = config.base_efficiency - edge / (2.0 * na);
                    for p in [&mut p_home, &mut p_away] {
                        if !(0.0..=1.0).contains(p) {
                            if config.clamp_efficiency {
                                *p = p.clamp(0.0, 1.0);
                                clamped += 1;
                            } else {
                                offending.push(format!("season {label}: {} vs {} (p = {p:.4})", names[h], names[a]));
                            }
                        }
                    }
                    if !offending.is_empty() {
                        continue;
                    }
                    if league.tier == Tier::First {
                        p_sum += p_home + p_away;
                        p_count += 2;
                    }
                    let stream = match_stream(season, league.tier, d + 1, hi, ai);
                    let (gh, ga) = play_match(config.seed, stream, config.attacks_per_team, p_home, p_away);
                    matches.push(MatchRecord {
                        season: label.clone(),
                        tier: league.tier,
                        match_day: (d + 1) as u32,
                        home: names[h].clone(),
                        away: names[a].clone(),
                        goals_home: gh,
                        goals_away: ga,
                        line: None,
                    });
                }
            }
        }
        if !offending.is_empty() {
            return Err(Error::EfficiencyOutOfRange(offending));
        }
        if let (Some(st), true) = (config.second_tier, leagues.len() == 2) {
            exchange_teams(&mut leagues, &mut tier_of, &matches, &label, &names, st.promoted);
        }
    }

    let mean_efficiency = if p_count > 0 {
        p_sum / p_count as f64
    } else {
        config.base_efficiency
    };
    let truth = GroundTruth {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        seed: config.seed,
        config: config.clone(),
        fitness: truth_fitness,
        sigma_f2: sd * sd,
        home_advantage: config.home_advantage,
        mean_efficiency,
        implied_a: 2.0 * na * mean_efficiency * (1.0 - mean_efficiency),
        clamped_events: clamped,
    };
    Ok((LeagueDataset::from_matches(matches)?, truth))
}

/// Promotes the best `k` second-tier teams by season goal difference and
/// relegates the worst `k` top-tier teams.
fn exchange_teams(
    leagues: &mut [League],
    tier_of: &mut [Tier],
    matches: &[MatchRecord],
    label: &SeasonLabel,
    names: &[TeamId],
    k: usize,
) {
    let mut gd: BTreeMap<(Tier, usize), (i64, i64)> = BTreeMap::new();
    let index: BTreeMap<&TeamId, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
    for m in matches.iter().filter(|m| &m.season == label) {
        let d = m.diff();
        let h = gd.entry((m.tier, index[&m.home])).or_default();
        h.0 += d;
        h.1 += i64::from(m.goals_home);
        let a = gd.entry((m.tier, index[&m.away])).or_default();
        a.0 -= d;
        a.1 += i64::from(m.goals_away);
    }
    let ranked = |league: &League| {
        let mut v = league.members.clone();
        v.sort_by(|&x, &y| {
            let gx = gd.get(&(league.tier, x)).copied().unwrap_or_default();
            let gy = gd.get(&(league.tier, y)).copied().unwrap_or_default();
            gy.cmp(&gx).then(x.cmp(&y))
        });
        v
    };
    let top = ranked(&leagues[0]);
    let second = ranked(&leagues[1]);
    let relegated: Vec<usize> = top[top.len() - k..].to_vec();
    let promoted: Vec<usize> = second[..k].to_vec();
    leagues[0].members.retain(|t| !relegated.contains(t));
    leagues[0].members.extend(&promoted);
    leagues[1].members.retain(|t| !promoted.contains(t));
    leagues[1].members.extend(&relegated);
    for l in leagues.iter_mut() {
        l.members.sort_unstable();
    }
    for &t in &promoted {
        tier_of[t] = Tier::First;
    }
    for &t in &relegated {
        tier_of[t] = Tier::Second;
    }
}
