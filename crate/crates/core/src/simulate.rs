//! Synthetic tournaments with known latent skill.
//!
//! Randomness comes from a single ChaCha8 stream (`rand_chacha::ChaCha8Rng`)
//! seeded with `SimConfig::seed` through `SeedableRng::seed_from_u64`. ChaCha8
//! output is specified bit-for-bit, so a seed names the same tournament on
//! every platform.
//!
//! Each played game deals every seat a hand-strength draw from N(0, 1). The
//! strongest hand declares, and its luck `z` is that draw minus the mean of
//! the largest of three draws. The dealt hand wins with
//! `p_hand = logistic(logit(np) + hand_luck.sd * z)`, where `np` is the
//! default normal probability of the game type, and the declarer's skill edge
//! gives `p_skill = logistic(logit(np) + skill_scale * (s_decl - mean(s_opp)))`.
//! The game is won with probability `(1 - chance_share) * p_skill +
//! chance_share * p_hand`. The record's `win_prob` carries `p_hand`, and the
//! multiplier of trump games rises with `z`, so lucky hands are also worth more.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chance::{normal_prob, NormalProbTable};
use crate::elo::{EloConfig, StartPolicy};
use crate::error::{Error, Result};
use crate::model::{
    series_profile, seeger_score, GameRecord, GameType, PlayerId, SeriesRecord, NOMINAL_SERIES_LEN,
};
use crate::pipeline::{replay, RatingLedger};
use crate::scalar::Scalar;

pub const DEFAULT_SEED: u64 = 20_100_917;

/// Mean of the largest of three standard normal draws, `3 / (2 * sqrt(pi))`.
const EXPECTED_MAX_OF_THREE: f64 = 0.846_284_375_321_634_6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPlayer {
    pub id: PlayerId,
    pub latent_skill: f64,
}

/// Relative frequencies of the declared game types. Suit weight is split
/// evenly over the four suits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameTypeWeights {
    pub suit: f64,
    pub grand: f64,
    pub null: f64,
    pub null_hand: f64,
    pub null_ouvert: f64,
    pub null_hand_ouvert: f64,
}

impl Default for GameTypeWeights {
    fn default() -> Self {
        GameTypeWeights {
            suit: 62.0,
            grand: 28.0,
            null: 6.0,
            null_hand: 2.5,
            null_ouvert: 2.5,
            null_hand_ouvert: 1.0,
        }
    }
}

impl GameTypeWeights {
    fn table(&self) -> [(GameType, f64); 9] {
        let s = self.suit / 4.0;
        [
            (GameType::Diamonds, s),
            (GameType::Hearts, s),
            (GameType::Spades, s),
            (GameType::Clubs, s),
            (GameType::Grand, self.grand),
            (GameType::Null, self.null),
            (GameType::NullHand, self.null_hand),
            (GameType::NullOuvert, self.null_ouvert),
            (GameType::NullHandOuvert, self.null_hand_ouvert),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HandLuckModel {
    /// Spread of dealt-hand strength on the logit scale.
    pub sd: f64,
    /// Multiplier increase per standard deviation of hand luck.
    pub value_coupling: f64,
}

impl Default for HandLuckModel {
    fn default() -> Self {
        HandLuckModel {
            sd: 1.5,
            value_coupling: 3.0,
        }
    }
}

/// Game values: trump games are base value times a multiplier of at least 2;
/// null games keep their fixed values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValueModel {
    pub multiplier_mean: f64,
    pub multiplier_sd: f64,
}

impl Default for ValueModel {
    fn default() -> Self {
        ValueModel {
            multiplier_mean: 2.5,
            multiplier_sd: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub player_count: usize,
    pub series_count: usize,
    pub games_per_series: usize,
    pub seed: u64,
    /// Weight of hand luck against skill in each game's outcome, in [0, 1].
    pub chance_share: f64,
    /// Latent skills are drawn from N(0, skill_sd) unless `skills` is given.
    pub skill_sd: f64,
    pub skills: Option<Vec<f64>>,
    /// Logit shift per unit of skill advantage.
    pub skill_scale: f64,
    pub fold_prob: f64,
    pub game_types: GameTypeWeights,
    pub hand_luck: HandLuckModel,
    pub values: ValueModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            player_count: 9,
            series_count: 200,
            games_per_series: NOMINAL_SERIES_LEN,
            seed: DEFAULT_SEED,
            chance_share: 0.5,
            skill_sd: 1.0,
            skills: None,
            skill_scale: 0.75,
            fold_prob: 0.05,
            game_types: GameTypeWeights::default(),
            hand_luck: HandLuckModel::default(),
            values: ValueModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::domain(m));
        if self.player_count < 3 {
            return err("player_count must be at least 3");
        }
        if self.series_count == 0 || self.games_per_series == 0 {
            return err("series_count and games_per_series must be positive");
        }
        if !(0.0..=1.0).contains(&self.chance_share) {
            return err("chance_share must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.fold_prob) {
            return err("fold_prob must lie in [0, 1)");
        }
        let nonneg = [
            self.skill_sd,
            self.hand_luck.sd,
            self.values.multiplier_sd,
            self.skill_scale,
        ];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return err("variances and scales must be finite and non-negative");
        }
        if !self.hand_luck.value_coupling.is_finite() || !self.values.multiplier_mean.is_finite() {
            return err("value model parameters must be finite");
        }
        if let Some(s) = &self.skills {
            if s.len() != self.player_count || s.iter().any(|v| !v.is_finite()) {
                return err("skills must list one finite value per player");
            }
        }
        let w = self.game_types.table();
        if w.iter().any(|(_, x)| !(x.is_finite() && *x >= 0.0)) || w.iter().all(|(_, x)| *x == 0.0)
        {
            return err("game type weights must be non-negative and not all zero");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tournament {
    pub players: Vec<SyntheticPlayer>,
    pub series: Vec<SeriesRecord>,
}

impl Tournament {
    pub fn skills(&self) -> BTreeMap<PlayerId, f64> {
        self.players
            .iter()
            .map(|p| (p.id.clone(), p.latent_skill))
            .collect()
    }

    pub fn game_count(&self) -> usize {
        self.series.iter().map(SeriesRecord::len).sum()
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn generate_tournament(config: &SimConfig) -> Result<Tournament> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.player_count.to_string().len();
    let skills: Vec<f64> = match &config.skills {
        Some(s) => s.clone(),
        None => {
            let normal = Normal::new(0.0, config.skill_sd).map_err(|e| Error::domain(e.to_string()))?;
            (0..config.player_count).map(|_| normal.sample(&mut rng)).collect()
        }
    };
    let players: Vec<SyntheticPlayer> = skills
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            Ok(SyntheticPlayer {
                id: PlayerId::new(format!("p{:0width$}", i + 1))?,
                latent_skill: s,
            })
        })
        .collect::<Result<_>>()?;

    let types = config.game_types.table();
    let type_dist = WeightedIndex::new(types.iter().map(|(_, w)| *w))
        .map_err(|e| Error::domain(e.to_string()))?;
    let table_width = config.series_count.to_string().len();
    let mut series = Vec::with_capacity(config.series_count);
    for s in 0..config.series_count {
        let seats: Vec<usize> = sample(&mut rng, config.player_count, 3).into_vec();
        let trio = [seats[0], seats[1], seats[2]].map(|i| players[i].id.clone());
        let trio_skill = [seats[0], seats[1], seats[2]].map(|i| players[i].latent_skill);
        let table = format!("s{:0table_width$}", s + 1);
        let mut games = Vec::with_capacity(config.games_per_series);
        for seq in 1..=config.games_per_series as u32 {
            games.push(generate_game(
                &mut rng, config, &types, &type_dist, &table, seq, &trio, trio_skill,
            )?);
        }
        series.push(SeriesRecord::new(table, trio, games)?);
    }
    Ok(Tournament { players, series })
}

#[allow(clippy::too_many_arguments)]
fn generate_game(
    rng: &mut ChaCha8Rng,
    config: &SimConfig,
    types: &[(GameType, f64); 9],
    type_dist: &WeightedIndex<f64>,
    table: &str,
    seq: u32,
    trio: &[PlayerId; 3],
    skill: [f64; 3],
) -> Result<GameRecord> {
    if rng.random::<f64>() < config.fold_prob {
        return GameRecord::folded(table, seq, trio.clone());
    }
    let hands: [f64; 3] = [(); 3].map(|_| rng.sample(StandardNormal));
    let declarer = (0..3).fold(0, |best, i| if hands[i] > hands[best] { i } else { best });
    let z = hands[declarer] - EXPECTED_MAX_OF_THREE;
    let game_type = types[type_dist.sample(rng)].0;
    let np = normal_prob(game_type, &NormalProbTable::default())? / 100.0;
    let noise: f64 = rng.sample(StandardNormal);
    let roll: f64 = rng.random();

    let p_hand = logistic(logit(np) + config.hand_luck.sd * z);
    let edge = skill[declarer] - (skill[(declarer + 1) % 3] + skill[(declarer + 2) % 3]) / 2.0;
    let p_skill = logistic(logit(np) + config.skill_scale * edge);
    let c = config.chance_share;
    let won = roll < (1.0 - c) * p_skill + c * p_hand;

    let value = match game_type {
        GameType::Null => 23,
        GameType::NullHand => 35,
        GameType::NullOuvert => 46,
        GameType::NullHandOuvert => 59,
        t => {
            let m = config.values.multiplier_mean
                + config.hand_luck.value_coupling * z
                + config.values.multiplier_sd * noise;
            let base = t.code().expect("played game") as u32;
            base * m.round().clamp(2.0, 18.0) as u32
        }
    };
    let win_prob = (p_hand * 100.0).clamp(0.1, 99.9);
    GameRecord::declared(table, seq, trio.clone(), declarer, game_type, value, won, Some(win_prob))
}

/// Builds one series per score triple whose Seeger scores equal the triple:
/// every player declares one won and one lost grand, padded with folded games
/// to `games_per_series`.
pub fn series_from_scores(
    table_prefix: &str,
    players: &[PlayerId; 3],
    scores: &[[i64; 3]],
    games_per_series: usize,
) -> Result<Vec<SeriesRecord>> {
    if games_per_series < 6 {
        return Err(Error::domain("need at least 6 games per series"));
    }
    let width = scores.len().to_string().len();
    scores
        .iter()
        .enumerate()
        .map(|(n, es)| {
            let table = format!("{table_prefix}{:0width$}", n + 1);
            let mut games = Vec::with_capacity(games_per_series);
            for (seat, &target) in es.iter().enumerate() {
                // One win x and one loss y give x - 2y + 2 * 40.
                let loss = 18.max((98 - target + 1).div_euclid(2));
                let win = target - 80 + 2 * loss;
                let seq = games.len() as u32;
                for (k, (v, won)) in [(win, true), (loss, false)].into_iter().enumerate() {
                    let v = u32::try_from(v).map_err(|_| Error::domain("score out of range"))?;
                    games.push(GameRecord::declared(
                        &table,
                        seq + k as u32 + 1,
                        players.clone(),
                        seat,
                        GameType::Grand,
                        v,
                        won,
                        None,
                    )?);
                }
            }
            for seq in games.len() + 1..=games_per_series {
                games.push(GameRecord::folded(&table, seq as u32, players.clone())?);
            }
            SeriesRecord::new(table, players.clone(), games)
        })
        .collect()
}

/// Kendall's tau-b.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("kendall_tau needs two equal-length lists of length >= 2"));
    }
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].partial_cmp(&x[j]).ok_or_else(|| Error::domain("NaN in ranks"))?;
            let dy = y[i].partial_cmp(&y[j]).ok_or_else(|| Error::domain("NaN in ranks"))?;
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {}
                (Equal, _) => tie_x += 1,
                (_, Equal) => tie_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n_x = (concordant + discordant + tie_y) as f64;
    let n_y = (concordant + discordant + tie_x) as f64;
    if n_x == 0.0 || n_y == 0.0 {
        return Err(Error::domain("kendall_tau undefined for constant input"));
    }
    Ok((concordant - discordant) as f64 / (n_x * n_y).sqrt())
}

fn final_ratings<F: Scalar>(ledger: &RatingLedger<F>, players: &[SyntheticPlayer], start: f64) -> Vec<f64> {
    players
        .iter()
        .map(|p| ledger.rating(&p.id).map_or(start, |r| r.value.to_f64_lossy()))
        .collect()
}

/// Kendall tau between latent skill and final rating.
pub fn rank_recovery(sim: &SimConfig, elo: &EloConfig<f64>) -> Result<f64> {
    let t = generate_tournament(sim)?;
    let ledger = replay(&t.series, elo, None)?;
    tau_of(&t, &ledger, elo)
}

pub fn tau_of(t: &Tournament, ledger: &RatingLedger<f64>, elo: &EloConfig<f64>) -> Result<f64> {
    let start = match elo.start_policy {
        StartPolicy::Fixed(v) => v,
        StartPolicy::AverageOfFirst { fallback, .. } => fallback,
    };
    let skills: Vec<f64> = t.players.iter().map(|p| p.latent_skill).collect();
    kendall_tau(&skills, &final_ratings(ledger, &t.players, start))
}

/// First series index from which every player's rating stays within
/// `tolerance` of its final value. Each player must also have at least
/// `window` updates inside their own settled stretch, otherwise there is no
/// fixpoint. Ratings are read after each update.
pub fn fixpoint_index<F: Scalar>(
    ledger: &RatingLedger<F>,
    tolerance: f64,
    window: usize,
) -> Result<Option<usize>> {
    if tolerance.is_nan() || tolerance <= 0.0 || window == 0 {
        return Err(Error::domain("need tolerance > 0 and window >= 1"));
    }
    let mut per_player: BTreeMap<&PlayerId, Vec<(usize, f64)>> = BTreeMap::new();
    for e in ledger.entries() {
        for (seat, p) in e.players.iter().enumerate() {
            per_player
                .entry(p)
                .or_default()
                .push((e.index, e.trace.posterior[seat].to_f64_lossy()));
        }
    }
    let mut from = 0;
    for points in per_player.values() {
        let last = points.last().expect("non-empty").1;
        let settled = match points.iter().rposition(|(_, v)| (v - last).abs() > tolerance) {
            Some(i) => {
                from = from.max(points[i].0 + 1);
                points.len() - i - 1
            }
            None => points.len(),
        };
        if settled < window {
            return Ok(None);
        }
    }
    Ok(Some(from))
}

pub fn convergence_study(
    sim: &SimConfig,
    elo: &EloConfig<f64>,
    tolerance: f64,
    window: usize,
) -> Result<Option<usize>> {
    let t = generate_tournament(sim)?;
    let ledger = replay(&t.series, elo, None)?;
    fixpoint_index(&ledger, tolerance, window)
}

/// Sample variance of each player's per-update rating change.
pub fn increment_variances<F: Scalar>(ledger: &RatingLedger<F>) -> BTreeMap<PlayerId, f64> {
    let mut deltas: BTreeMap<PlayerId, Vec<f64>> = BTreeMap::new();
    for e in ledger.entries() {
        for (seat, p) in e.players.iter().enumerate() {
            let d = (e.trace.posterior[seat] - e.trace.prior[seat]).to_f64_lossy();
            deltas.entry(p.clone()).or_default().push(d);
        }
    }
    deltas
        .into_iter()
        .filter(|(_, d)| d.len() >= 2)
        .map(|(p, d)| {
            let n = d.len() as f64;
            let m = d.iter().sum::<f64>() / n;
            let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
            (p, v)
        })
        .collect()
}

/// Mean Seeger score per series for each player.
pub fn mean_series_scores(series: &[SeriesRecord]) -> BTreeMap<PlayerId, f64> {
    let mut acc: BTreeMap<PlayerId, (i64, usize)> = BTreeMap::new();
    for s in series {
        let es = seeger_score(&series_profile(s));
        for (p, v) in s.players().iter().zip(es) {
            let e = acc.entry(p.clone()).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(p, (sum, n))| (p, sum as f64 / n as f64))
        .collect()
}

/// Permutation test of "skill does not matter": the statistic is |tau|
/// between latent skill and mean series score, and the null distribution
/// shuffles skills over players. Returns the p-value.
pub fn skill_permutation_test(t: &Tournament, permutations: usize, seed: u64) -> Result<f64> {
    use rand::seq::SliceRandom;
    let means = mean_series_scores(&t.series);
    let (mut skills, scores): (Vec<f64>, Vec<f64>) = t
        .players
        .iter()
        .filter_map(|p| means.get(&p.id).map(|m| (p.latent_skill, *m)))
        .unzip();
    let observed = kendall_tau(&skills, &scores)?.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        skills.shuffle(&mut rng);
        if kendall_tau(&skills, &scores)?.abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    Ok((extreme + 1) as f64 / (permutations + 1) as f64)
}
