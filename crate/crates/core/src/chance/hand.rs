//! Hand strength: the von Stegen point count and table-driven winning
//! probability estimation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WinProbEstimator;
use crate::error::{Error, Result};
use crate::model::{GameRecord, GameType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Clubs,
    Spades,
    Hearts,
    Diamonds,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Spades, Suit::Hearts, Suit::Diamonds];

    fn letter(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Spades => 'S',
            Suit::Hearts => 'H',
            Suit::Diamonds => 'D',
        }
    }

    fn of_game(game_type: GameType) -> Option<Suit> {
        match game_type {
            GameType::Clubs => Some(Suit::Clubs),
            GameType::Spades => Some(Suit::Spades),
            GameType::Hearts => Some(Suit::Hearts),
            GameType::Diamonds => Some(Suit::Diamonds),
            _ => None,
        }
    }
}

/// Ranks in null order (7 lowest, ace highest).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Seven,
    Eight,
    Nine,
    Ten,
    Jack,
    Queen,
    King,
    Ace,
}

impl Rank {
    pub const ALL: [Rank; 8] = [
        Rank::Seven,
        Rank::Eight,
        Rank::Nine,
        Rank::Ten,
        Rank::Jack,
        Rank::Queen,
        Rank::King,
        Rank::Ace,
    ];

    fn letter(self) -> char {
        match self {
            Rank::Seven => '7',
            Rank::Eight => '8',
            Rank::Nine => '9',
            Rank::Ten => 'T',
            Rank::Jack => 'J',
            Rank::Queen => 'Q',
            Rank::King => 'K',
            Rank::Ace => 'A',
        }
    }

    fn from_letter(c: char) -> Option<Rank> {
        Rank::ALL.into_iter().find(|r| r.letter() == c)
    }
}

/// A card written as suit letter then rank letter, e.g. `CJ`, `HT`, `D7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: Suit,
    pub rank: Rank,
}

impl Card {
    pub fn new(suit: Suit, rank: Rank) -> Self {
        Card { suit, rank }
    }

    fn is_high(self) -> bool {
        matches!(self.rank, Rank::Ace | Rank::Ten)
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.suit.letter(), self.rank.letter())
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let (Some(sc), Some(rc), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(Error::domain(format!("bad card {s:?}")));
        };
        let suit = Suit::ALL
            .into_iter()
            .find(|x| x.letter() == sc)
            .ok_or_else(|| Error::domain(format!("bad suit in {s:?}")))?;
        let rank = Rank::from_letter(rc).ok_or_else(|| Error::domain(format!("bad rank in {s:?}")))?;
        Ok(Card { suit, rank })
    }
}

fn check_hand(hand: &[Card]) -> Result<()> {
    if hand.len() != 10 {
        return Err(Error::domain(format!("hand has {} cards, expected 10", hand.len())));
    }
    let mut seen = hand.to_vec();
    seen.sort();
    seen.dedup();
    if seen.len() != hand.len() {
        return Err(Error::domain("hand contains duplicate cards"));
    }
    Ok(())
}

/// Extra points of the von Stegen count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VonStegenBonuses {
    /// Awarded for holding both the club and the spade jack.
    pub strong_jacks: f64,
    /// Awarded when the bid is at most `low_bid_max`.
    pub low_bid: f64,
    pub low_bid_max: u32,
    /// Awarded when the declarer leads the first trick.
    pub forehand: f64,
}

impl Default for VonStegenBonuses {
    fn default() -> Self {
        VonStegenBonuses {
            strong_jacks: 1.0,
            low_bid: 1.0,
            low_bid_max: 24,
            forehand: 0.0,
        }
    }
}

/// Trump-game point count: 2 per jack, 1 per other trump, 1 per non-trump ace
/// or ten, and a trump ace or ten counts twice.
pub fn von_stegen_points(
    hand: &[Card],
    game_type: GameType,
    bid: u32,
    position: usize,
    bonuses: &VonStegenBonuses,
) -> Result<f64> {
    if !game_type.is_trump() {
        return Err(Error::domain("von Stegen count applies to trump games only"));
    }
    if position > 2 {
        return Err(Error::domain("position must be 0, 1 or 2"));
    }
    check_hand(hand)?;
    let trump_suit = Suit::of_game(game_type);
    let mut points = 0.0;
    for card in hand {
        points += if card.rank == Rank::Jack {
            2.0
        } else if Some(card.suit) == trump_suit {
            if card.is_high() {
                2.0
            } else {
                1.0
            }
        } else if card.is_high() {
            1.0
        } else {
            0.0
        };
    }
    let has = |s: Suit| hand.contains(&Card::new(s, Rank::Jack));
    if has(Suit::Clubs) && has(Suit::Spades) {
        points += bonuses.strong_jacks;
    }
    if bid <= bonuses.low_bid_max {
        points += bonuses.low_bid;
    }
    if position == 0 {
        points += bonuses.forehand;
    }
    Ok(points)
}

/// A null game is won only if every suit holds: the product of the four
/// per-suit probabilities (percent in, percent out).
pub fn null_win_prob(per_suit: [f64; 4]) -> f64 {
    per_suit.iter().map(|p| p / 100.0).product::<f64>() * 100.0
}

/// Winning parameters of a suit or grand hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrumpFeatures {
    /// Non-trump suits absent from the hand, 0..=3.
    pub free_suits: u8,
    /// Card points in the skat condensed into groups 0..=3.
    pub skat_value_group: u8,
    /// Final bid condensed into groups 0..=3 (0 lowest).
    pub bid_group: u8,
    /// Seat in the first trick, 0 = forehand.
    pub declarer_position: u8,
    /// Trumps held including the skat, 0..=11.
    pub trump_length: u8,
    /// Non-trump aces and tens, 0..=7.
    pub high_cards: u8,
    /// Jack holding condensed into groups 0..=4 (4 = all four jacks).
    pub jack_group: u8,
    /// Tricks expected to be lost, 0..=10.
    pub lost_cards: u8,
}

const TRUMP_LIMITS: [(&str, u8); 8] = [
    ("free_suits", 3),
    ("skat_value_group", 3),
    ("bid_group", 3),
    ("declarer_position", 2),
    ("trump_length", 11),
    ("high_cards", 7),
    ("jack_group", 4),
    ("lost_cards", 10),
];

impl TrumpFeatures {
    fn fields(&self) -> [u8; 8] {
        [
            self.free_suits,
            self.skat_value_group,
            self.bid_group,
            self.declarer_position,
            self.trump_length,
            self.high_cards,
            self.jack_group,
            self.lost_cards,
        ]
    }

    fn from_fields(f: [u8; 8]) -> Result<Self> {
        let t = TrumpFeatures {
            free_suits: f[0],
            skat_value_group: f[1],
            bid_group: f[2],
            declarer_position: f[3],
            trump_length: f[4],
            high_cards: f[5],
            jack_group: f[6],
            lost_cards: f[7],
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for ((name, max), v) in TRUMP_LIMITS.iter().zip(self.fields()) {
            if v > *max {
                return Err(Error::domain(format!("{name} = {v} exceeds {max}")));
            }
        }
        Ok(())
    }

    /// Canonical table key: the eight fields comma-separated in declaration
    /// order.
    pub fn key(&self) -> String {
        self.fields().map(|v| v.to_string()).join(",")
    }
}

impl FromStr for TrumpFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 8 {
            return Err(Error::Config(format!("feature key {s:?} needs 8 fields")));
        }
        let mut f = [0u8; 8];
        for (slot, p) in f.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad feature value in {s:?}")))?;
        }
        TrumpFeatures::from_fields(f).map_err(|e| Error::Config(format!("{s:?}: {e}")))
    }
}

/// Ranks held in one suit, written in null order with `7 8 9 T J Q K A`
/// letters; `-` for a void.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NullPattern(String);

impl NullPattern {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn from_ranks(mut ranks: Vec<Rank>) -> Self {
        if ranks.is_empty() {
            return NullPattern("-".into());
        }
        ranks.sort();
        NullPattern(ranks.into_iter().map(Rank::letter).collect())
    }
}

impl FromStr for NullPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(NullPattern(s.into()));
        }
        let ranks: Option<Vec<Rank>> = s.chars().map(Rank::from_letter).collect();
        match ranks {
            Some(r) if !r.is_empty() && r.windows(2).all(|w| w[0] < w[1]) => {
                Ok(NullPattern(s.into()))
            }
            _ => Err(Error::Config(format!("bad null suit pattern {s:?}"))),
        }
    }
}

/// Per-suit holdings of a null hand, in clubs, spades, hearts, diamonds order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NullFeatures {
    pub suits: [NullPattern; 4],
}

impl NullFeatures {
    pub fn from_hand(hand: &[Card]) -> Result<Self> {
        check_hand(hand)?;
        let suits = Suit::ALL.map(|s| {
            NullPattern::from_ranks(hand.iter().filter(|c| c.suit == s).map(|c| c.rank).collect())
        });
        Ok(NullFeatures { suits })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandFeatures {
    Trump(TrumpFeatures),
    Null(NullFeatures),
}

/// Weights of the fallback logistic estimator, used when a feature tuple is
/// not in the tables. Percent = `100 / (1 + exp(-z))` with `z` the bias plus
/// the weighted features.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeuristicWeights {
    pub bias: f64,
    pub grand_offset: f64,
    pub free_suits: f64,
    pub skat_value_group: f64,
    pub bid_group: f64,
    pub declarer_position: f64,
    pub trump_length: f64,
    pub high_cards: f64,
    pub jack_group: f64,
    pub lost_cards: f64,
    /// Percent used for a null suit pattern missing from the table.
    pub null_suit_default: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        HeuristicWeights {
            bias: -2.5,
            grand_offset: 1.0,
            free_suits: 0.4,
            skat_value_group: 0.2,
            bid_group: -0.15,
            declarer_position: -0.1,
            trump_length: 0.5,
            high_cards: 0.35,
            jack_group: 0.6,
            lost_cards: -0.9,
            null_suit_default: 90.0,
        }
    }
}

impl HeuristicWeights {
    pub fn validate(&self) -> Result<()> {
        if self.trump_length < 0.0 || self.high_cards < 0.0 || self.lost_cards > 0.0 {
            return Err(Error::Config(
                "heuristic must be non-decreasing in trump_length and high_cards and non-increasing in lost_cards".into(),
            ));
        }
        if !(0.0..=100.0).contains(&self.null_suit_default) {
            return Err(Error::Config("null_suit_default must lie in [0, 100]".into()));
        }
        Ok(())
    }

    fn score(&self, f: &TrumpFeatures, grand: bool) -> f64 {
        let z = self.bias
            + if grand { self.grand_offset } else { 0.0 }
            + self.free_suits * f.free_suits as f64
            + self.skat_value_group * f.skat_value_group as f64
            + self.bid_group * f.bid_group as f64
            + self.declarer_position * f.declarer_position as f64
            + self.trump_length * f.trump_length as f64
            + self.high_cards * f.high_cards as f64
            + self.jack_group * f.jack_group as f64
            + self.lost_cards * f.lost_cards as f64;
        100.0 / (1.0 + (-z).exp())
    }
}

/// Lookup tables for winning probabilities in percent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorTable {
    pub grand: HashMap<TrumpFeatures, f64>,
    pub suit: HashMap<TrumpFeatures, f64>,
    pub null_suit: HashMap<NullPattern, f64>,
    pub weights: HeuristicWeights,
}

impl EstimatorTable {
    /// Builds tables from string-keyed sections, validating every key and
    /// percent.
    pub fn from_sections(
        grand: &BTreeMap<String, f64>,
        suit: &BTreeMap<String, f64>,
        null_suit: &BTreeMap<String, f64>,
        weights: HeuristicWeights,
    ) -> Result<Self> {
        fn pct(section: &str, key: &str, v: f64) -> Result<f64> {
            if (0.0..=100.0).contains(&v) {
                Ok(v)
            } else {
                Err(Error::Config(format!("[{section}] {key:?} = {v} outside [0, 100]")))
            }
        }
        let trump = |section: &str, m: &BTreeMap<String, f64>| -> Result<HashMap<TrumpFeatures, f64>> {
            m.iter()
                .map(|(k, &v)| Ok((k.parse()?, pct(section, k, v)?)))
                .collect()
        };
        weights.validate()?;
        Ok(EstimatorTable {
            grand: trump("grand", grand)?,
            suit: trump("suit", suit)?,
            null_suit: null_suit
                .iter()
                .map(|(k, &v)| Ok((k.parse()?, pct("null_suit", k, v)?)))
                .collect::<Result<_>>()?,
            weights,
        })
    }
}

/// Winning probability of a hand in percent: table lookup first, the logistic
/// heuristic on a miss; null games multiply their four per-suit values.
pub fn estimate_win_prob(
    game_type: GameType,
    features: &HandFeatures,
    tables: &EstimatorTable,
) -> Result<f64> {
    match features {
        HandFeatures::Trump(f) if game_type.is_trump() => {
            f.validate()?;
            let grand = game_type == GameType::Grand;
            let table = if grand { &tables.grand } else { &tables.suit };
            Ok(match table.get(f) {
                Some(&p) => p,
                None => tables.weights.score(f, grand),
            })
        }
        HandFeatures::Null(f) if game_type.is_null() => {
            let per_suit = [0, 1, 2, 3].map(|i| {
                tables
                    .null_suit
                    .get(&f.suits[i])
                    .copied()
                    .unwrap_or(tables.weights.null_suit_default)
            });
            Ok(null_win_prob(per_suit))
        }
        _ => Err(Error::domain(format!(
            "features do not match game type {game_type}"
        ))),
    }
}

/// Estimates win probabilities from hand features registered per game.
#[derive(Clone, Debug, Default)]
pub struct FeatureEstimator {
    pub tables: EstimatorTable,
    features: HashMap<(String, u32), HandFeatures>,
}

impl FeatureEstimator {
    pub fn new(tables: EstimatorTable) -> Self {
        FeatureEstimator {
            tables,
            features: HashMap::new(),
        }
    }

    pub fn insert(&mut self, table_id: impl Into<String>, game_seq: u32, features: HandFeatures) {
        self.features.insert((table_id.into(), game_seq), features);
    }
}

impl WinProbEstimator for FeatureEstimator {
    fn estimate(&self, game: &GameRecord) -> Result<Option<f64>> {
        match self.features.get(&(game.table_id().to_string(), game.game_seq())) {
            Some(f) => estimate_win_prob(game.game_type(), f, &self.tables).map(Some),
            None => Ok(None),
        }
    }
}
