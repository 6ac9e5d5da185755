//! Match-result domain types, CSV ingestion and round-robin validation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Read;
use std::ops::RangeInclusive;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Team identity: case-folded, trimmed name. The first spelling seen is kept
/// for display and serialization.
#[derive(Clone, Debug)]
pub struct TeamId {
    key: String,
    display: String,
}

impl TeamId {
    pub fn new(name: &str) -> Option<Self> {
        let display = name.trim();
        if display.is_empty() {
            return None;
        }
        Some(Self {
            key: display.to_lowercase(),
            display: display.to_string(),
        })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn name(&self) -> &str {
        &self.display
    }
}

impl PartialEq for TeamId {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for TeamId {}

impl Hash for TeamId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for TeamId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TeamId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

impl Serialize for TeamId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.display)
    }
}

/// Opaque season label. Integer labels sort numerically and before every
/// non-integer label; the rest sort lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeasonLabel(String);

impl SeasonLabel {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into().trim().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn as_int(&self) -> Option<i64> {
        self.0.parse().ok()
    }
}

impl Ord for SeasonLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.as_int(), other.as_int()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}
impl PartialOrd for SeasonLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SeasonLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for SeasonLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl From<&str> for SeasonLabel {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Tier {
    #[default]
    First,
    Second,
}

impl Tier {
    pub fn number(self) -> u8 {
        match self {
            Tier::First => 1,
            Tier::Second => 2,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "" | "1" => Some(Tier::First),
            "2" => Some(Tier::Second),
            _ => None,
        }
    }
}

impl Serialize for Tier {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

/// A league-season: one season label within one tier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SeasonKey {
    pub label: SeasonLabel,
    pub tier: Tier,
}

impl SeasonKey {
    pub fn new(label: impl Into<String>, tier: Tier) -> Self {
        Self {
            label: SeasonLabel::new(label),
            tier,
        }
    }

    pub fn top(label: impl Into<String>) -> Self {
        Self::new(label, Tier::First)
    }
}

impl fmt::Display for SeasonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tier {
            Tier::First => write!(f, "{}", self.label),
            Tier::Second => write!(f, "{} (tier 2)", self.label),
        }
    }
}

/// One fixture. `line` is the source line the record was read from, if any;
/// it is provenance only and does not take part in equality.
#[derive(Clone, Debug, Serialize)]
pub struct MatchRecord {
    pub season: SeasonLabel,
    pub tier: Tier,
    pub match_day: u32,
    pub home: TeamId,
    pub away: TeamId,
    pub goals_home: u32,
    pub goals_away: u32,
    #[serde(skip)]
    pub line: Option<u64>,
}

impl PartialEq for MatchRecord {
    fn eq(&self, o: &Self) -> bool {
        self.season == o.season
            && self.tier == o.tier
            && self.match_day == o.match_day
            && self.home == o.home
            && self.away == o.away
            && self.goals_home == o.goals_home
            && self.goals_away == o.goals_away
    }
}

impl MatchRecord {
    pub fn new(
        season: impl Into<String>,
        match_day: u32,
        home: &str,
        away: &str,
        goals_home: u32,
        goals_away: u32,
    ) -> Self {
        Self {
            season: SeasonLabel::new(season),
            tier: Tier::First,
            match_day,
            home: TeamId::new(home).expect("non-empty home team"),
            away: TeamId::new(away).expect("non-empty away team"),
            goals_home,
            goals_away,
            line: None,
        }
    }

    pub fn with_tier(mut self, tier: Tier) -> Self {
        self.tier = tier;
        self
    }

    pub fn key(&self) -> SeasonKey {
        SeasonKey {
            label: self.season.clone(),
            tier: self.tier,
        }
    }

    pub fn total(&self) -> u32 {
        self.goals_home + self.goals_away
    }

    /// Goal difference from the home side.
    pub fn diff(&self) -> i64 {
        i64::from(self.goals_home) - i64::from(self.goals_away)
    }

    /// Goals for and against from `team`'s perspective, if it played.
    pub fn goals_for(&self, team: &TeamId) -> Option<(u32, u32)> {
        if &self.home == team {
            Some((self.goals_home, self.goals_away))
        } else if &self.away == team {
            Some((self.goals_away, self.goals_home))
        } else {
            None
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.home == self.away {
            return Err(format!("team {} plays itself", self.home));
        }
        if self.match_day < 1 {
            return Err("match_day must be at least 1".into());
        }
        Ok(())
    }
}

/// A single team's view of one match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamMatch {
    pub match_day: u32,
    pub opponent: TeamId,
    pub at_home: bool,
    pub goals_for: u32,
    pub goals_against: u32,
}

impl TeamMatch {
    pub fn diff(&self) -> i64 {
        i64::from(self.goals_for) - i64::from(self.goals_against)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeasonProfile {
    pub n_teams: usize,
    pub n_match_days: u32,
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
}

#[derive(Clone, Debug, Default)]
struct SeasonIndex {
    teams: BTreeSet<TeamId>,
    matches: Vec<usize>,
    n_match_days: u32,
}

/// Validated, canonically ordered collection of match records. Immutable
/// after construction.
#[derive(Clone, Debug)]
pub struct LeagueDataset {
    matches: Vec<MatchRecord>,
    seasons: BTreeMap<SeasonKey, SeasonIndex>,
}

impl PartialEq for LeagueDataset {
    fn eq(&self, other: &Self) -> bool {
        self.matches == other.matches
    }
}

fn canonical_order(a: &MatchRecord, b: &MatchRecord) -> Ordering {
    a.season
        .cmp(&b.season)
        .then(a.tier.cmp(&b.tier))
        .then(a.match_day.cmp(&b.match_day))
        .then_with(|| a.home.cmp(&b.home))
        .then_with(|| a.away.cmp(&b.away))
}

impl LeagueDataset {
    /// Validates and indexes `matches`, sorting them into canonical order.
    pub fn from_matches(mut matches: Vec<MatchRecord>) -> Result<Self> {
        if matches.is_empty() {
            return Err(Error::NoMatches);
        }
        for (i, m) in matches.iter().enumerate() {
            if let Err(message) = m.check() {
                return Err(Error::Parse {
                    record: i + 1,
                    line: m.line.unwrap_or(0),
                    message,
                });
            }
        }
        matches.sort_by(canonical_order);

        let mut fixtures: HashMap<(SeasonKey, &TeamId, &TeamId), u64> = HashMap::new();
        let mut day_slots: HashMap<(SeasonKey, u32, &TeamId), ()> = HashMap::new();
        for m in &matches {
            let key = m.key();
            if let Some(first) = fixtures.insert((key.clone(), &m.home, &m.away), m.line.unwrap_or(0)) {
                return Err(Error::DuplicateFixture {
                    season: key.to_string(),
                    home: m.home.to_string(),
                    away: m.away.to_string(),
                    first,
                    second: m.line.unwrap_or(0),
                });
            }
            for team in [&m.home, &m.away] {
                if day_slots.insert((key.clone(), m.match_day, team), ()).is_some() {
                    return Err(Error::TeamPlaysTwice {
                        season: key.to_string(),
                        match_day: m.match_day,
                        team: team.to_string(),
                    });
                }
            }
        }

        let mut seasons: BTreeMap<SeasonKey, SeasonIndex> = BTreeMap::new();
        for (i, m) in matches.iter().enumerate() {
            let idx = seasons.entry(m.key()).or_default();
            idx.teams.insert(m.home.clone());
            idx.teams.insert(m.away.clone());
            idx.matches.push(i);
            idx.n_match_days = idx.n_match_days.max(m.match_day);
        }
        Ok(Self { matches, seasons })
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn season_keys(&self) -> impl Iterator<Item = &SeasonKey> {
        self.seasons.keys()
    }

    /// Distinct season labels across all tiers, in season order.
    pub fn season_labels(&self) -> Vec<SeasonLabel> {
        let set: BTreeSet<SeasonLabel> = self.seasons.keys().map(|k| k.label.clone()).collect();
        set.into_iter().collect()
    }

    pub fn season(&self, key: &SeasonKey) -> Result<SeasonView<'_>> {
        let (key, idx) = self
            .seasons
            .get_key_value(key)
            .ok_or_else(|| Error::UnknownSeason(key.to_string()))?;
        Ok(self.view(key, idx))
    }

    pub fn seasons(&self) -> impl Iterator<Item = SeasonView<'_>> {
        self.seasons.iter().map(move |(k, idx)| self.view(k, idx))
    }

    fn view<'a>(&'a self, key: &'a SeasonKey, idx: &'a SeasonIndex) -> SeasonView<'a> {
        SeasonView {
            key,
            teams: &idx.teams,
            n_match_days: idx.n_match_days,
            matches: idx.matches.iter().map(|&i| &self.matches[i]).collect(),
        }
    }

    /// Subset restricted to matches for which `keep` returns true.
    pub fn filter(&self, keep: impl Fn(&MatchRecord) -> bool) -> Result<Self> {
        Self::from_matches(self.matches.iter().filter(|m| keep(m)).cloned().collect())
    }

    pub fn tier(&self, tier: Tier) -> Result<Self> {
        self.filter(|m| m.tier == tier)
    }

    /// Keeps seasons whose label lies within `range` (inclusive, season order).
    pub fn season_range(&self, range: &RangeInclusive<SeasonLabel>) -> Result<Self> {
        self.filter(|m| range.contains(&m.season))
    }

    pub fn season_profile(&self, key: &SeasonKey) -> Result<SeasonProfile> {
        Ok(self.season(key)?.profile())
    }

    pub fn half_season_split(&self, key: &SeasonKey) -> Result<(RangeInclusive<u32>, RangeInclusive<u32>)> {
        self.season(key)?.half_season_split()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        self.write_csv(&mut out)?;
        Ok(String::from_utf8(out).expect("csv writer emits utf-8"))
    }

    /// Canonical CSV. The `tier` column is written only when a tier-2 match exists.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let with_tier = self.matches.iter().any(|m| m.tier != Tier::First);
        let mut wr = csv::WriterBuilder::new().from_writer(w);
        let mut header = vec!["season", "match_day", "home", "away", "goals_home", "goals_away"];
        if with_tier {
            header.push("tier");
        }
        wr.write_record(&header)?;
        for m in &self.matches {
            let mut row = vec![
                m.season.to_string(),
                m.match_day.to_string(),
                m.home.name().to_string(),
                m.away.name().to_string(),
                m.goals_home.to_string(),
                m.goals_away.to_string(),
            ];
            if with_tier {
                row.push(m.tier.number().to_string());
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Borrowed view of one league-season.
#[derive(Clone, Debug)]
pub struct SeasonView<'a> {
    pub key: &'a SeasonKey,
    pub teams: &'a BTreeSet<TeamId>,
    pub n_match_days: u32,
    pub matches: Vec<&'a MatchRecord>,
}

impl<'a> SeasonView<'a> {
    pub fn profile(&self) -> SeasonProfile {
        let n = self.teams.len();
        let expected_days = if n.is_multiple_of(2) { 2 * (n - 1) } else { 2 * n } as u32;
        let days: BTreeSet<u32> = self.matches.iter().map(|m| m.match_day).collect();
        let contiguous = days.len() as u32 == self.n_match_days;
        // Pairs are unique by validation, so n(n-1) matches means every ordered pair once.
        let all_pairs = self.matches.len() == n * (n - 1);
        SeasonProfile {
            n_teams: n,
            n_match_days: self.n_match_days,
            complete: n >= 2 && contiguous && all_pairs && self.n_match_days == expected_days,
        }
    }

    pub fn half_season_split(&self) -> Result<(RangeInclusive<u32>, RangeInclusive<u32>)> {
        let t = self.n_match_days;
        if !t.is_multiple_of(2) {
            return Err(Error::OddSeasonLength {
                season: self.key.to_string(),
                match_days: t,
            });
        }
        Ok((1..=t / 2, t / 2 + 1..=t))
    }

    /// Goals scored and conceded per team over the season.
    pub fn team_totals(&self) -> BTreeMap<TeamId, (u64, u64)> {
        let mut out: BTreeMap<TeamId, (u64, u64)> = BTreeMap::new();
        for m in &self.matches {
            let h = out.entry(m.home.clone()).or_default();
            h.0 += u64::from(m.goals_home);
            h.1 += u64::from(m.goals_away);
            let a = out.entry(m.away.clone()).or_default();
            a.0 += u64::from(m.goals_away);
            a.1 += u64::from(m.goals_home);
        }
        out
    }

    /// Each team's matches in match-day order.
    pub fn team_matches(&self) -> BTreeMap<TeamId, Vec<TeamMatch>> {
        let mut out: BTreeMap<TeamId, Vec<TeamMatch>> = self.teams.iter().map(|t| (t.clone(), Vec::new())).collect();
        for m in &self.matches {
            out.get_mut(&m.home).expect("indexed team").push(TeamMatch {
                match_day: m.match_day,
                opponent: m.away.clone(),
                at_home: true,
                goals_for: m.goals_home,
                goals_against: m.goals_away,
            });
            out.get_mut(&m.away).expect("indexed team").push(TeamMatch {
                match_day: m.match_day,
                opponent: m.home.clone(),
                at_home: false,
                goals_for: m.goals_away,
                goals_against: m.goals_home,
            });
        }
        for v in out.values_mut() {
            v.sort_by_key(|tm| tm.match_day);
        }
        out
    }
}

/// Reads a dataset. The header row is optional; without it columns are taken
/// positionally as `season,match_day,home,away,goals_home,goals_away[,tier]`.
pub fn parse_dataset<R: Read>(source: R, format: InputFormat) -> Result<LeagueDataset> {
    match format {
        InputFormat::Csv => parse_csv(source),
    }
}

const COLUMNS: [&str; 7] = [
    "season",
    "match_day",
    "home",
    "away",
    "goals_home",
    "goals_away",
    "tier",
];

fn parse_csv<R: Read>(source: R) -> Result<LeagueDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);

    let mut columns: [Option<usize>; 7] = [Some(0), Some(1), Some(2), Some(3), Some(4), Some(5), Some(6)];
    let mut matches = Vec::new();
    let mut record_no = 0usize;
    let mut first = true;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if row.iter().any(|c| c.eq_ignore_ascii_case("season")) {
                for (slot, name) in columns.iter_mut().zip(COLUMNS) {
                    *slot = row.iter().position(|c| c.eq_ignore_ascii_case(name));
                }
                if let Some(missing) = COLUMNS[..6].iter().zip(&columns).find(|(_, c)| c.is_none()) {
                    return Err(Error::Parse {
                        record: 0,
                        line,
                        message: format!("header lacks column `{}`", missing.0),
                    });
                }
                continue;
            }
        }
        if row.iter().all(str::is_empty) {
            continue;
        }
        record_no += 1;
        let fail = |message: String| Error::Parse {
            record: record_no,
            line,
            message,
        };
        let field = |i: usize| -> std::result::Result<&str, Error> {
            columns[i]
                .and_then(|c| row.get(c))
                .ok_or_else(|| fail(format!("missing field `{}`", COLUMNS[i])))
        };
        let count = |i: usize| -> std::result::Result<u32, Error> {
            let raw = field(i)?;
            let v: i64 = raw
                .parse()
                .map_err(|_| fail(format!("`{}` is not an integer: {raw:?}", COLUMNS[i])))?;
            if v < 0 {
                return Err(fail(format!("negative goals in `{}`: {v}", COLUMNS[i])));
            }
            u32::try_from(v).map_err(|_| fail(format!("`{}` out of range: {v}", COLUMNS[i])))
        };
        let season = field(0)?;
        if season.is_empty() {
            return Err(fail("empty season label".into()));
        }
        let day_raw = field(1)?;
        let match_day: u32 = day_raw
            .parse()
            .map_err(|_| fail(format!("match_day is not a positive integer: {day_raw:?}")))?;
        let home = TeamId::new(field(2)?).ok_or_else(|| fail("empty home team".into()))?;
        let away = TeamId::new(field(3)?).ok_or_else(|| fail("empty away team".into()))?;
        let goals_home = count(4)?;
        let goals_away = count(5)?;
        let tier_raw = columns[6].and_then(|c| row.get(c)).unwrap_or("");
        let tier = Tier::parse(tier_raw).ok_or_else(|| fail(format!("tier must be 1 or 2: {tier_raw:?}")))?;
        let m = MatchRecord {
            season: SeasonLabel::new(season),
            tier,
            match_day,
            home,
            away,
            goals_home,
            goals_away,
            line: Some(line),
        };
        m.check().map_err(fail)?;
        matches.push(m);
    }
    LeagueDataset::from_matches(matches)
}
