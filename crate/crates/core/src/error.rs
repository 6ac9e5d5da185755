use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("record {record} (line {line}): {message}")]
    Parse { record: usize, line: u64, message: String },

    #[error("no matches")]
    NoMatches,

    #[error("duplicate fixture in season {season}: {home} vs {away} (lines {first} and {second})")]
    DuplicateFixture {
        season: String,
        home: String,
        away: String,
        first: u64,
        second: u64,
    },

    #[error("team {team} plays twice on match day {match_day} of season {season}")]
    TeamPlaysTwice {
        season: String,
        match_day: u32,
        team: String,
    },

    #[error("unknown season {0}")]
    UnknownSeason(String),

    #[error("season {season} has an odd number of match days ({match_days}); pass an explicit split point")]
    OddSeasonLength { season: String, match_days: u32 },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit did not converge after {iterations} iterations (best residual sum of squares {best_sse})")]
    NonConvergence { iterations: usize, best_sse: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("efficiency outside [0, 1] for {} pairing(s), first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    EfficiencyOutOfRange(Vec<String>),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Degenerate(_))
    }
}
