//! Card-luck correction.
//!
//! A game's value can be corrected in three ways before it enters the Seeger
//! aggregation:
//!
//! * flat: every value is replaced by the mean game value (41.0 by default);
//! * hand: the value is divided by `q = clip(p / np)`, the declarer's
//!   estimated win probability over the normal win rate of that game type;
//! * opponents: the declarer's value is divided by the opponents' mean rating
//!   over the declarer's rating.
//!
//! Flat substitution happens first, then the hand ratio, then the opponent
//! factor. Win and loss counts and their bonuses are never rescaled.

mod hand;

pub use hand::{
    estimate_win_prob, null_win_prob, von_stegen_points, Card, EstimatorTable, FeatureEstimator,
    HandFeatures, HeuristicWeights, NullFeatures, NullPattern, Rank, Suit, TrumpFeatures,
    VonStegenBonuses,
};

use serde::{Deserialize, Serialize};

use crate::elo::{EloConfig, SeriesScores};
use crate::error::{Error, Result};
use crate::model::{
    outcome_points, seeger_from_parts, seeger_score, series_profile, GameRecord, GameType,
    SeriesRecord,
};
use crate::scalar::Scalar;

/// Empirical declarer win rate per game type, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalProbTable {
    pub suit: f64,
    pub grand: f64,
    pub null: f64,
    pub null_hand: f64,
    pub null_ouvert: f64,
    pub null_hand_ouvert: f64,
}

impl Default for NormalProbTable {
    fn default() -> Self {
        NormalProbTable {
            suit: 80.4,
            grand: 93.4,
            null: 62.0,
            null_hand: 71.1,
            null_ouvert: 90.0,
            null_hand_ouvert: 94.5,
        }
    }
}

impl NormalProbTable {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.suit,
            self.grand,
            self.null,
            self.null_hand,
            self.null_ouvert,
            self.null_hand_ouvert,
        ];
        if all.iter().all(|p| *p > 0.0 && *p <= 100.0) {
            Ok(())
        } else {
            Err(Error::Config("normal probabilities must lie in (0, 100]".into()))
        }
    }
}

pub fn normal_prob(game_type: GameType, table: &NormalProbTable) -> Result<f64> {
    Ok(match game_type {
        g if g.is_suit() => table.suit,
        GameType::Grand => table.grand,
        GameType::Null => table.null,
        GameType::NullHand => table.null_hand,
        GameType::NullOuvert => table.null_ouvert,
        GameType::NullHandOuvert => table.null_hand_ouvert,
        _ => return Err(Error::domain("no normal probability for a folded game")),
    })
}

/// `min(hi, max(lo, p / np))`.
pub fn clip_q<F: Scalar>(p: F, np: F, lo: F, hi: F) -> Result<F> {
    if np <= F::zero() {
        return Err(Error::domain("normal probability must be positive"));
    }
    Ok((p / np).max_of(lo).min_of(hi))
}

pub fn adjust_game_value<F: Scalar>(
    base_value: u32,
    q: F,
    chance_hand: bool,
    chance_flat: bool,
    mean_game_value: F,
) -> F {
    let mut value = F::from_int(base_value as i64);
    if chance_flat {
        value = mean_game_value;
    }
    if chance_hand {
        value = value / q;
    }
    value
}

/// Opponents' mean rating over the declarer's, clipped to `[lo, hi]`; `1`
/// when disabled.
pub fn opponent_factor<F: Scalar>(
    r_declarer: F,
    r_opponents: [F; 2],
    enabled: bool,
    lo: F,
    hi: F,
) -> F {
    if !enabled || r_declarer <= F::zero() {
        return F::one();
    }
    let mean = (r_opponents[0] + r_opponents[1]) / F::lit(2.0);
    (mean / r_declarer).max_of(lo).min_of(hi)
}

/// Supplies a declarer's winning probability (percent) for games whose record
/// does not carry one.
pub trait WinProbEstimator: Sync {
    fn estimate(&self, game: &GameRecord) -> Result<Option<f64>>;
}

/// Raw and chance-adjusted Seeger scores of a series. `ratings` are the
/// pre-series ratings in seat order (used by the opponent factor).
pub fn adjusted_series_scores<F: Scalar>(
    series: &SeriesRecord,
    ratings: [F; 3],
    config: &EloConfig<F>,
    estimator: Option<&dyn WinProbEstimator>,
) -> Result<SeriesScores<F>> {
    let profile = series_profile(series);
    let raw = seeger_score(&profile).map(F::from_int);
    if !config.chance_hand && !config.chance_flat && !config.opponent_factor {
        return Ok(SeriesScores::unadjusted(raw));
    }

    let mut value_sums = [F::zero(); 3];
    for game in series.games() {
        let (Some(seat), Some(won)) = (game.declarer(), game.won()) else {
            continue;
        };
        let q = if config.chance_hand {
            let p = match game.win_prob() {
                Some(p) => Some(p),
                None => match estimator {
                    Some(est) => est.estimate(game)?,
                    None => None,
                },
            };
            let p = p.ok_or_else(|| Error::MissingWinProbability {
                table: game.table_id().to_string(),
                seq: game.game_seq(),
            })?;
            let np = normal_prob(game.game_type(), &config.normal_prob)?;
            clip_q(F::lit(p), F::lit(np), config.clip_lo, config.clip_hi)?
        } else {
            F::one()
        };
        let mut value = adjust_game_value(
            game.base_value(),
            q,
            config.chance_hand,
            config.chance_flat,
            config.mean_game_value,
        );
        if config.opponent_factor {
            let others = [(seat + 1) % 3, (seat + 2) % 3].map(|i| ratings[i]);
            value = value
                / opponent_factor(ratings[seat], others, true, config.clip_lo, config.clip_hi);
        }
        value_sums[seat] = value_sums[seat] + outcome_points(value, won);
    }
    let adjusted = seeger_from_parts(value_sums, profile.wins(), profile.losses());
    Ok(SeriesScores { raw, adjusted })
}
