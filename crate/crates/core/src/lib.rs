//! Seeger-Fabian scoring and chance-corrected ELO ratings for Skat.
//!
//! The rating math is generic over the scalar type (see [`scalar::Scalar`]);
//! the aliases below fix it to `f64` for everyday use, with `f32` and exact
//! rational variants alongside.

pub mod chance;
pub mod config;
pub mod elo;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod simulate;

pub use config::ConfigFile;
pub use error::{Error, Result};
pub use model::{GameRecord, GameType, PlayerId, SeriesProfile, SeriesRecord};
pub use scalar::{Rational, Scalar};
pub use simulate::SimConfig;

pub type Rating = elo::Rating<f64>;
pub type Rating32 = elo::Rating<f32>;
pub type ExactRating = elo::Rating<Rational>;

pub type EloConfig = elo::EloConfig<f64>;
pub type EloConfig32 = elo::EloConfig<f32>;
pub type ExactEloConfig = elo::EloConfig<Rational>;

pub type UpdateTrace = elo::UpdateTrace<f64>;
pub type SeriesScores = elo::SeriesScores<f64>;

pub type RatingLedger = pipeline::RatingLedger<f64>;
pub type RatingLedger32 = pipeline::RatingLedger<f32>;
pub type ExactRatingLedger = pipeline::RatingLedger<Rational>;
pub type LedgerEntry = pipeline::LedgerEntry<f64>;
pub type SweepReport = report::SweepReport<f64>;
