//! TOML configuration file.
//!
//! ```toml
//! [elo]
//! k = 0.02                 # or k_start / k_end / k_decay_after
//! start = 800.0
//! start_average_of = 3     # optional: average start policy over n series
//! chance_hand = false
//! chance_flat = false
//! opponent_factor = false
//! clip_lo = 0.5
//! clip_hi = 2.0
//! mean_game_value = 41.0
//! rating_floor = 1.0
//!
//! [normalprob]
//! suit = 80.4              # also grand, null, null_hand, null_ouvert, null_hand_ouvert
//!
//! [grand]                  # and [suit]: feature key -> win percent
//! "2,1,0,0,7,3,3,1" = 91.5
//!
//! [null_suit]              # null pattern -> win percent
//! "79J" = 88.0
//!
//! [heuristic_weights]
//! bias = -2.5
//!
//! [sim]
//! player_count = 9
//! seed = 20100917
//! ```
//!
//! Every section and key is optional; unknown ones are errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::chance::{EstimatorTable, HeuristicWeights, NormalProbTable};
use crate::elo::{EloConfig, KPolicy, StartPolicy, DEFAULT_START};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulate::SimConfig;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EloSection {
    pub k: Option<f64>,
    pub k_start: Option<f64>,
    pub k_end: Option<f64>,
    pub k_decay_after: Option<u32>,
    pub start: Option<f64>,
    pub start_average_of: Option<usize>,
    pub chance_hand: Option<bool>,
    pub chance_flat: Option<bool>,
    pub opponent_factor: Option<bool>,
    pub clip_lo: Option<f64>,
    pub clip_hi: Option<f64>,
    pub mean_game_value: Option<f64>,
    pub rating_floor: Option<f64>,
}

impl EloSection {
    /// Writes the values that are set onto `config`.
    pub fn apply<F: Scalar>(&self, config: &mut EloConfig<F>) -> Result<()> {
        let schedule = (self.k_start, self.k_end, self.k_decay_after);
        match (self.k, schedule) {
            (Some(_), (None, None, None)) | (None, (None, None, None)) => {}
            (None, (Some(start), Some(end), Some(after))) => {
                config.k_policy = KPolicy::Schedule {
                    start: F::lit(start),
                    end: F::lit(end),
                    decay_after: after,
                }
            }
            _ => {
                return Err(Error::Config(
                    "give either k or all of k_start, k_end, k_decay_after".into(),
                ))
            }
        }
        if let Some(k) = self.k {
            config.k_policy = KPolicy::Fixed(F::lit(k));
        }
        match (self.start_average_of, self.start) {
            (Some(n), start) => {
                config.start_policy = StartPolicy::AverageOfFirst {
                    n,
                    fallback: F::lit(start.unwrap_or(DEFAULT_START)),
                }
            }
            (None, Some(s)) => config.start_policy = StartPolicy::Fixed(F::lit(s)),
            (None, None) => {}
        }
        let set_bool = |dst: &mut bool, v: Option<bool>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set_bool(&mut config.chance_hand, self.chance_hand);
        set_bool(&mut config.chance_flat, self.chance_flat);
        set_bool(&mut config.opponent_factor, self.opponent_factor);
        let set = |dst: &mut F, v: Option<f64>| {
            if let Some(v) = v {
                *dst = F::lit(v);
            }
        };
        set(&mut config.clip_lo, self.clip_lo);
        set(&mut config.clip_hi, self.clip_hi);
        set(&mut config.mean_game_value, self.mean_game_value);
        set(&mut config.rating_floor, self.rating_floor);
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub elo: EloSection,
    #[serde(default)]
    pub normalprob: NormalProbTable,
    #[serde(default)]
    pub grand: BTreeMap<String, f64>,
    #[serde(default)]
    pub suit: BTreeMap<String, f64>,
    #[serde(default)]
    pub null_suit: BTreeMap<String, f64>,
    #[serde(default)]
    pub heuristic_weights: HeuristicWeights,
    #[serde(default)]
    pub sim: SimConfig,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Rating configuration: defaults, then this file. Not validated, so
    /// callers can layer more overrides first.
    pub fn elo_config<F: Scalar>(&self) -> Result<EloConfig<F>> {
        let mut config = EloConfig {
            normal_prob: self.normalprob,
            ..EloConfig::default()
        };
        self.elo.apply(&mut config)?;
        Ok(config)
    }

    pub fn estimator_table(&self) -> Result<EstimatorTable> {
        EstimatorTable::from_sections(&self.grand, &self.suit, &self.null_suit, self.heuristic_weights)
    }

    pub fn has_estimator_tables(&self) -> bool {
        !(self.grand.is_empty() && self.suit.is_empty() && self.null_suit.is_empty())
    }
}
