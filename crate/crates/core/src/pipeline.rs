//! Replaying series through the rating engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chance::{adjusted_series_scores, WinProbEstimator};
use crate::elo::{
    k_for, mean, start_rating, update_series, EloConfig, Rating, SeriesScores, StartPolicy,
    UpdateTrace,
};
use crate::error::{Error, Result};
use crate::model::{PlayerId, SeriesRecord};
use crate::scalar::Scalar;

/// One applied series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct LedgerEntry<F> {
    /// Zero-based position in replay order.
    pub index: usize,
    pub table_id: String,
    pub players: [PlayerId; 3],
    pub trace: UpdateTrace<F>,
}

impl<F: Scalar> LedgerEntry<F> {
    pub fn seat_of(&self, player: &PlayerId) -> Option<usize> {
        self.players.iter().position(|p| p == player)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PlayerState<F> {
    pub rating: Rating<F>,
    /// Indices into the ledger's entries, in order.
    pub history: Vec<usize>,
    /// Adjusted scores collected while the start rating is still open.
    pub warmup: Vec<F>,
    pub established: bool,
}

/// Current ratings plus the full update history.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RatingLedger<F> {
    players: BTreeMap<PlayerId, PlayerState<F>>,
    entries: Vec<LedgerEntry<F>>,
}

impl<F: Scalar> RatingLedger<F> {
    pub fn new() -> Self {
        RatingLedger {
            players: BTreeMap::new(),
            entries: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn series_count(&self) -> usize {
        self.entries.len()
    }

    pub fn rating(&self, player: &PlayerId) -> Option<Rating<F>> {
        self.players.get(player).map(|s| s.rating)
    }

    pub fn state(&self, player: &PlayerId) -> Option<&PlayerState<F>> {
        self.players.get(player)
    }

    pub fn ratings(&self) -> impl Iterator<Item = (&PlayerId, Rating<F>)> {
        self.players.iter().map(|(id, s)| (id, s.rating))
    }

    pub fn entries(&self) -> &[LedgerEntry<F>] {
        &self.entries
    }

    /// Entries a player took part in, oldest first.
    pub fn history(&self, player: &PlayerId) -> Result<Vec<&LedgerEntry<F>>> {
        let state = self
            .players
            .get(player)
            .ok_or_else(|| Error::UnknownPlayer(player.to_string()))?;
        Ok(state.history.iter().map(|&i| &self.entries[i]).collect())
    }

    fn current_value(&self, player: &PlayerId, config: &EloConfig<F>) -> F {
        match self.players.get(player) {
            Some(s) if s.established => s.rating.value,
            Some(s) => provisional_value(&s.warmup, &config.start_policy),
            None => provisional_value(&[], &config.start_policy),
        }
    }

    /// Scores and applies one series.
    pub fn apply_series(
        &mut self,
        series: &SeriesRecord,
        config: &EloConfig<F>,
        estimator: Option<&dyn WinProbEstimator>,
    ) -> Result<&LedgerEntry<F>> {
        let table = series.table_id();
        let prior = series.players().clone().map(|p| self.current_value(&p, config));
        let scores = adjusted_series_scores(series, prior, config, estimator)
            .map_err(|e| e.at_table(table))?;
        self.apply_scores(table, series.players(), &scores, config)
            .map_err(|e| e.at_table(table))
    }

    /// Applies precomputed series scores.
    pub fn apply_scores(
        &mut self,
        table_id: &str,
        players: &[PlayerId; 3],
        scores: &SeriesScores<F>,
        config: &EloConfig<F>,
    ) -> Result<&LedgerEntry<F>> {
        let start = self.fresh_state(config);
        for p in players {
            self.players.entry(p.clone()).or_insert_with(|| start.clone());
        }
        let states = players.clone().map(|p| self.players[&p].clone());
        let ratings = [0, 1, 2].map(|i| Rating {
            value: self.current_value(&players[i], config),
            series_played: states[i].rating.series_played,
        });
        let k = ratings.map(|r| k_for(r.series_played, &config.k_policy));
        let (mut updated, mut trace) = update_series(&ratings, scores, k, config.rating_floor)?;

        let index = self.entries.len();
        for i in 0..3 {
            let state = self.players.get_mut(&players[i]).expect("inserted above");
            if !state.established {
                state.warmup.push(scores.adjusted[i]);
                let mut value = match config.start_policy {
                    StartPolicy::AverageOfFirst { n, .. } if state.warmup.len() >= n => {
                        state.established = true;
                        start_rating(&config.start_policy, &state.warmup)?
                    }
                    _ => provisional_value(&state.warmup, &config.start_policy),
                };
                trace.clamped[i] = value < config.rating_floor;
                if trace.clamped[i] {
                    value = config.rating_floor;
                }
                trace.provisional[i] = true;
                trace.posterior[i] = value;
                updated[i].value = value;
            }
            state.rating = updated[i];
            state.history.push(index);
        }
        self.entries.push(LedgerEntry {
            index,
            table_id: table_id.to_string(),
            players: players.clone(),
            trace,
        });
        Ok(&self.entries[index])
    }

    fn fresh_state(&self, config: &EloConfig<F>) -> PlayerState<F> {
        let (value, established) = match config.start_policy {
            StartPolicy::Fixed(v) => (v, true),
            StartPolicy::AverageOfFirst { fallback, .. } => (fallback, false),
        };
        PlayerState {
            rating: Rating::new(value),
            history: Vec::new(),
            warmup: Vec::new(),
            established,
        }
    }

    /// Re-derives every rating from the recorded series scores alone.
    pub fn rebuild(&self, config: &EloConfig<F>) -> Result<RatingLedger<F>> {
        let mut fresh = RatingLedger::new();
        for e in &self.entries {
            let scores = SeriesScores {
                raw: e.trace.raw,
                adjusted: e.trace.adjusted,
            };
            fresh.apply_scores(&e.table_id, &e.players, &scores, config)?;
        }
        Ok(fresh)
    }

    /// Checks that the stored history reproduces the current ratings and that
    /// each history is as long as the player's series count.
    pub fn verify(&self, config: &EloConfig<F>) -> Result<()> {
        for (id, s) in &self.players {
            if s.history.len() != s.rating.series_played as usize {
                return Err(Error::domain(format!("history length mismatch for {id}")));
            }
        }
        if self.rebuild(config)? != *self {
            return Err(Error::domain("history does not reproduce current ratings"));
        }
        Ok(())
    }
}

fn provisional_value<F: Scalar>(warmup: &[F], policy: &StartPolicy<F>) -> F {
    match *policy {
        StartPolicy::Fixed(v) => v,
        StartPolicy::AverageOfFirst { fallback, .. } => {
            if warmup.is_empty() {
                fallback
            } else {
                mean(warmup)
            }
        }
    }
}

/// Replays series in order into a fresh ledger.
pub fn replay<F: Scalar>(
    series: &[SeriesRecord],
    config: &EloConfig<F>,
    estimator: Option<&dyn WinProbEstimator>,
) -> Result<RatingLedger<F>> {
    config.validate()?;
    let mut ledger = RatingLedger::new();
    for s in series {
        ledger.apply_series(s, config, estimator)?;
    }
    Ok(ledger)
}
