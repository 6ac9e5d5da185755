//! Model-free statistical analysis of round-robin league results.
//!
//! The crate reads match results (see [`dataset`]), and provides descriptive
//! statistics and home advantage, team-fitness persistence, variance
//! decomposition of goal differences, rolling match prediction, and
//! attack/defense structure. A binomial league [`simulate`]or supplies data
//! with known ground truth for every estimator.
//!
//! Estimators are generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases below name the common instantiations.

pub mod cli;
pub mod dataset;
pub mod descriptive;
pub mod error;
pub mod fit;
pub mod fitness;
pub mod predict;
pub mod report;
pub mod scalar;
pub mod simulate;
pub mod stats;
pub mod structure;
pub mod variance;

pub use dataset::{
    parse_dataset, InputFormat, LeagueDataset, MatchRecord, SeasonKey, SeasonLabel, SeasonProfile, TeamId, Tier,
};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use simulate::{schedule_round_robin, simulate_league, FitnessRedraw, GroundTruth, SimulationConfig};
pub use structure::DEFAULT_ELITE_THRESHOLD;

pub type MatchStatisticsF64 = descriptive::MatchStatistics<f64>;
pub type MatchStatisticsF32 = descriptive::MatchStatistics<f32>;
pub type ExponentialFitF64 = fit::ExponentialFit<f64>;
pub type ExponentialFitF32 = fit::ExponentialFit<f32>;
pub type AutocorrelationCurveF64 = fitness::AutocorrelationCurve<f64>;
pub type AutocorrelationCurveF32 = fitness::AutocorrelationCurve<f32>;
pub type SeasonalAutocorrelationF64 = fitness::SeasonalAutocorrelation<f64>;
pub type SeasonalAutocorrelationF32 = fitness::SeasonalAutocorrelation<f32>;
pub type VarianceDecompositionF64 = variance::VarianceDecomposition<f64>;
pub type VarianceDecompositionF32 = variance::VarianceDecomposition<f32>;
pub type PredictionEvaluationF64 = predict::PredictionEvaluation<f64>;
pub type PredictionEvaluationF32 = predict::PredictionEvaluation<f32>;
pub type AttackDefenseSlopesF64 = structure::AttackDefenseSlopes<f64>;
pub type AttackDefenseSlopesF32 = structure::AttackDefenseSlopes<f32>;
pub type PromotionAnalysisF64 = structure::PromotionAnalysis<f64>;
pub type PromotionAnalysisF32 = structure::PromotionAnalysis<f32>;
