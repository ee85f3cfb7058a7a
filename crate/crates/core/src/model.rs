//! Games, series and the extended Seeger (Seeger-Fabian) series score.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Points awarded per declared win (and deducted per declared loss).
pub const WIN_BONUS: i64 = 50;
/// Points credited to each opponent of a lost declarer game.
pub const OPPONENT_LOSS_BONUS: i64 = 40;
/// Nominal number of games in a series.
pub const NOMINAL_SERIES_LEN: usize = 36;

/// Opaque (usually hashed) player alias.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidRecord("empty player id".into()));
        }
        Ok(PlayerId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for PlayerId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        PlayerId::new(value)
    }
}

impl From<PlayerId> for String {
    fn from(id: PlayerId) -> String {
        id.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Contract type, identified by its base multiplier code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameType {
    Diamonds,
    Hearts,
    Spades,
    Clubs,
    Null,
    Grand,
    NullHand,
    NullOuvert,
    NullHandOuvert,
    Folded,
}

impl GameType {
    pub const PLAYED: [GameType; 9] = [
        GameType::Diamonds,
        GameType::Hearts,
        GameType::Spades,
        GameType::Clubs,
        GameType::Null,
        GameType::Grand,
        GameType::NullHand,
        GameType::NullOuvert,
        GameType::NullHandOuvert,
    ];

    /// Integer code; `None` for a folded game.
    pub fn code(self) -> Option<u8> {
        Some(match self {
            GameType::Diamonds => 9,
            GameType::Hearts => 10,
            GameType::Spades => 11,
            GameType::Clubs => 12,
            GameType::Null => 23,
            GameType::Grand => 24,
            GameType::NullHand => 35,
            GameType::NullOuvert => 46,
            GameType::NullHandOuvert => 59,
            GameType::Folded => return None,
        })
    }

    pub fn from_code(code: u8) -> Option<Self> {
        GameType::PLAYED.into_iter().find(|g| g.code() == Some(code))
    }

    pub fn is_folded(self) -> bool {
        self == GameType::Folded
    }

    pub fn is_suit(self) -> bool {
        matches!(
            self,
            GameType::Diamonds | GameType::Hearts | GameType::Spades | GameType::Clubs
        )
    }

    pub fn is_null(self) -> bool {
        matches!(
            self,
            GameType::Null | GameType::NullHand | GameType::NullOuvert | GameType::NullHandOuvert
        )
    }

    /// Suit games and grand.
    pub fn is_trump(self) -> bool {
        self.is_suit() || self == GameType::Grand
    }
}

/// Wire form: the integer code, or the string `"folded"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GameTypeRepr {
    Code(u8),
    Word(String),
}

impl Serialize for GameType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.code() {
            Some(c) => GameTypeRepr::Code(c),
            None => GameTypeRepr::Word("folded".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match GameTypeRepr::deserialize(d)? {
            GameTypeRepr::Code(c) => GameType::from_code(c)
                .ok_or_else(|| D::Error::custom(format!("unknown game type code {c}"))),
            GameTypeRepr::Word(w) if w == "folded" => Ok(GameType::Folded),
            GameTypeRepr::Word(w) => Err(D::Error::custom(format!("unknown game type {w:?}"))),
        }
    }
}

impl fmt::Display for GameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.code() {
            Some(c) => write!(f, "{c}"),
            None => f.write_str("folded"),
        }
    }
}

/// One played or folded game at a three-player table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    table_id: String,
    game_seq: u32,
    players: [PlayerId; 3],
    declarer: Option<usize>,
    game_type: GameType,
    base_value: u32,
    won: Option<bool>,
    win_prob: Option<f64>,
}

impl GameRecord {
    /// A declared game. `win_prob` is the declarer's estimated winning
    /// probability in percent.
    #[allow(clippy::too_many_arguments)]
    pub fn declared(
        table_id: impl Into<String>,
        game_seq: u32,
        players: [PlayerId; 3],
        declarer: usize,
        game_type: GameType,
        base_value: u32,
        won: bool,
        win_prob: Option<f64>,
    ) -> Result<Self> {
        Self::from_parts(
            table_id.into(),
            game_seq,
            players,
            Some(declarer),
            game_type,
            base_value,
            Some(won),
            win_prob,
        )
    }

    pub fn folded(
        table_id: impl Into<String>,
        game_seq: u32,
        players: [PlayerId; 3],
    ) -> Result<Self> {
        Self::from_parts(
            table_id.into(),
            game_seq,
            players,
            None,
            GameType::Folded,
            0,
            None,
            None,
        )
    }

    /// Builds a record from raw fields, checking every field invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        table_id: String,
        game_seq: u32,
        players: [PlayerId; 3],
        declarer: Option<usize>,
        game_type: GameType,
        base_value: u32,
        won: Option<bool>,
        win_prob: Option<f64>,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidRecord(msg.to_string()));
        if table_id.is_empty() {
            return bad("empty table_id");
        }
        if game_seq == 0 {
            return bad("game_seq must be >= 1");
        }
        if game_type.is_folded() {
            if declarer.is_some() || won.is_some() || base_value != 0 || win_prob.is_some() {
                return bad("folded game carries declarer, outcome, value or win_prob");
            }
        } else {
            match declarer {
                Some(0..=2) => {}
                Some(_) => return bad("declarer seat out of range"),
                None => return bad("played game without declarer"),
            }
            if won.is_none() {
                return bad("played game without outcome");
            }
            if base_value == 0 {
                return bad("played game with zero base value");
            }
        }
        if let Some(p) = win_prob {
            if !(0.0..=100.0).contains(&p) {
                return bad("win_prob outside [0, 100]");
            }
        }
        Ok(GameRecord {
            table_id,
            game_seq,
            players,
            declarer,
            game_type,
            base_value,
            won,
            win_prob,
        })
    }

    pub fn table_id(&self) -> &str {
        &self.table_id
    }

    pub fn game_seq(&self) -> u32 {
        self.game_seq
    }

    pub fn players(&self) -> &[PlayerId; 3] {
        &self.players
    }

    pub fn declarer(&self) -> Option<usize> {
        self.declarer
    }

    pub fn game_type(&self) -> GameType {
        self.game_type
    }

    pub fn base_value(&self) -> u32 {
        self.base_value
    }

    pub fn won(&self) -> Option<bool> {
        self.won
    }

    /// Declarer's estimated winning probability in percent, if recorded.
    pub fn win_prob(&self) -> Option<f64> {
        self.win_prob
    }

    pub fn is_folded(&self) -> bool {
        self.game_type.is_folded()
    }
}

/// Signed outcome of a game for its declarer: `+V` if won, `-2V` if lost.
pub fn game_outcome_points(game: &GameRecord) -> Result<i64> {
    match game.won {
        None => Err(Error::FoldedOutcome),
        Some(won) => Ok(outcome_points(game.base_value as i64, won)),
    }
}

pub(crate) fn outcome_points<F: Scalar>(value: F, won: bool) -> F {
    if won {
        value
    } else {
        F::zero() - (value + value)
    }
}

/// Games played at one table by a fixed player triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    table_id: String,
    players: [PlayerId; 3],
    games: Vec<GameRecord>,
}

impl SeriesRecord {
    pub fn new(
        table_id: impl Into<String>,
        players: [PlayerId; 3],
        games: Vec<GameRecord>,
    ) -> Result<Self> {
        let table_id = table_id.into();
        let invalid = |reason: String| Error::InvalidSeries {
            table: table_id.clone(),
            reason,
        };
        if games.is_empty() {
            return Err(invalid("series has no games".into()));
        }
        if players[0] == players[1] || players[0] == players[2] || players[1] == players[2] {
            return Err(invalid("players must be distinct".into()));
        }
        let mut last_seq = 0;
        for g in &games {
            if g.table_id != table_id {
                return Err(invalid(format!("game {} belongs to table {}", g.game_seq, g.table_id)));
            }
            if g.players != players {
                return Err(Error::InconsistentPlayers(table_id.clone()));
            }
            if g.game_seq <= last_seq {
                return Err(invalid(format!(
                    "game_seq not strictly increasing at {}",
                    g.game_seq
                )));
            }
            last_seq = g.game_seq;
        }
        Ok(SeriesRecord {
            table_id,
            players,
            games,
        })
    }

    pub fn table_id(&self) -> &str {
        &self.table_id
    }

    pub fn players(&self) -> &[PlayerId; 3] {
        &self.players
    }

    pub fn games(&self) -> &[GameRecord] {
        &self.games
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }
}

/// Declarer statistics of one player over a series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub wins: u32,
    pub losses: u32,
    pub value_sum: i64,
}

impl std::ops::Add for PlayerProfile {
    type Output = PlayerProfile;

    fn add(self, rhs: PlayerProfile) -> PlayerProfile {
        PlayerProfile {
            wins: self.wins + rhs.wins,
            losses: self.losses + rhs.losses,
            value_sum: self.value_sum + rhs.value_sum,
        }
    }
}

/// Profiles of the three seats, in seat order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesProfile(pub [PlayerProfile; 3]);

impl SeriesProfile {
    pub fn wins(&self) -> [u32; 3] {
        self.0.map(|p| p.wins)
    }

    pub fn losses(&self) -> [u32; 3] {
        self.0.map(|p| p.losses)
    }
}

impl std::ops::Add for SeriesProfile {
    type Output = SeriesProfile;

    fn add(self, rhs: SeriesProfile) -> SeriesProfile {
        SeriesProfile([0, 1, 2].map(|i| self.0[i] + rhs.0[i]))
    }
}

/// Tallies wins, losses and signed values per declarer. Folded games are
/// skipped.
pub fn series_profile(series: &SeriesRecord) -> SeriesProfile {
    let mut profile = SeriesProfile::default();
    for game in &series.games {
        let (Some(seat), Some(won)) = (game.declarer, game.won) else {
            continue;
        };
        let p = &mut profile.0[seat];
        if won {
            p.wins += 1;
        } else {
            p.losses += 1;
        }
        p.value_sum += outcome_points(game.base_value as i64, won);
    }
    profile
}

/// Extended Seeger score for each seat:
/// `value_sum + 50 * (wins - losses) + 40 * (losses of the other two)`.
pub fn seeger_score(profile: &SeriesProfile) -> [i64; 3] {
    seeger_from_parts(
        profile.0.map(|p| p.value_sum),
        profile.wins(),
        profile.losses(),
    )
}

/// Seeger aggregation over arbitrary value sums; win/loss counts enter with
/// their fixed bonuses.
pub fn seeger_from_parts<F: Scalar>(value_sums: [F; 3], wins: [u32; 3], losses: [u32; 3]) -> [F; 3] {
    let total_losses: i64 = losses.iter().map(|&l| l as i64).sum();
    [0, 1, 2].map(|i| {
        let own = WIN_BONUS * (wins[i] as i64 - losses[i] as i64);
        let others = OPPONENT_LOSS_BONUS * (total_losses - losses[i] as i64);
        value_sums[i] + F::from_int(own + others)
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn trio() -> [PlayerId; 3] {
        ["A", "B", "C"].map(|s| PlayerId::new(s).unwrap())
    }

    fn prof(w: u32, l: u32, v: i64) -> PlayerProfile {
        PlayerProfile {
            wins: w,
            losses: l,
            value_sum: v,
        }
    }

    #[test]
    fn outcome_points_rule() {
        let won = GameRecord::declared("t", 1, trio(), 0, GameType::Grand, 24, true, None).unwrap();
        let lost = GameRecord::declared("t", 2, trio(), 0, GameType::Grand, 24, false, None).unwrap();
        let folded = GameRecord::folded("t", 3, trio()).unwrap();
        assert_eq!(game_outcome_points(&won).unwrap(), 24);
        assert_eq!(game_outcome_points(&lost).unwrap(), -48);
        assert!(matches!(game_outcome_points(&folded), Err(Error::FoldedOutcome)));
    }

    #[test]
    fn record_invariants_are_checked() {
        assert!(GameRecord::declared("t", 1, trio(), 3, GameType::Hearts, 20, true, None).is_err());
        assert!(GameRecord::declared("t", 1, trio(), 0, GameType::Hearts, 0, true, None).is_err());
        assert!(GameRecord::declared("t", 0, trio(), 0, GameType::Hearts, 20, true, None).is_err());
        assert!(GameRecord::declared("t", 1, trio(), 0, GameType::Folded, 20, true, None).is_err());
        assert!(
            GameRecord::declared("t", 1, trio(), 0, GameType::Hearts, 20, true, Some(101.0)).is_err()
        );
        assert!(PlayerId::new("").is_err());
    }

    #[test]
    fn game_type_codes_round_trip() {
        for g in GameType::PLAYED {
            assert_eq!(GameType::from_code(g.code().unwrap()), Some(g));
        }
        assert_eq!(GameType::from_code(13), None);
        assert!(GameType::Grand.is_trump() && !GameType::Grand.is_suit());
        assert!(GameType::NullHandOuvert.is_null());
    }

    #[test]
    fn seeger_worked_example_follows_formula() {
        // The worked example prints 1295 for C; the formula gives 495 + 550 + 200.
        let p = SeriesProfile([prof(8, 1, 273), prof(12, 4, 152), prof(11, 0, 495)]);
        assert_eq!(seeger_score(&p), [783, 592, 1245]);
    }

    #[test]
    fn seeger_trivial_cases() {
        assert_eq!(seeger_score(&SeriesProfile::default()), [0, 0, 0]);
        let p = SeriesProfile([prof(1, 0, 24), prof(0, 0, 0), prof(0, 0, 0)]);
        assert_eq!(seeger_score(&p), [74, 0, 0]);
    }

    #[test]
    fn single_win_profile() {
        let games = vec![
            GameRecord::declared("t", 1, trio(), 0, GameType::Grand, 24, true, None).unwrap(),
            GameRecord::folded("t", 2, trio()).unwrap(),
        ];
        let s = SeriesRecord::new("t", trio(), games).unwrap();
        assert_eq!(
            series_profile(&s),
            SeriesProfile([prof(1, 0, 24), prof(0, 0, 0), prof(0, 0, 0)])
        );
    }

    #[test]
    fn all_folded_series_scores_nothing() {
        let games = (1..=36).map(|i| GameRecord::folded("t", i, trio()).unwrap()).collect();
        let s = SeriesRecord::new("t", trio(), games).unwrap();
        assert_eq!(series_profile(&s), SeriesProfile::default());
        assert_eq!(seeger_score(&series_profile(&s)), [0, 0, 0]);
    }

    #[test]
    fn series_rejects_seat_swap_and_bad_order() {
        let mut swapped = trio();
        swapped.swap(0, 1);
        let games = vec![
            GameRecord::folded("t", 1, trio()).unwrap(),
            GameRecord::folded("t", 2, swapped).unwrap(),
        ];
        assert!(matches!(
            SeriesRecord::new("t", trio(), games),
            Err(Error::InconsistentPlayers(_))
        ));
        let games = vec![
            GameRecord::folded("t", 2, trio()).unwrap(),
            GameRecord::folded("t", 1, trio()).unwrap(),
        ];
        assert!(SeriesRecord::new("t", trio(), games).is_err());
    }

    fn arb_game() -> impl Strategy<Value = (Option<usize>, u32, bool)> {
        prop_oneof![
            1 => Just((None, 0u32, false)),
            5 => (0usize..3, 1u32..300, any::<bool>()).prop_map(|(d, v, w)| (Some(d), v, w)),
        ]
    }

    fn build_series(spec: &[(Option<usize>, u32, bool)]) -> SeriesRecord {
        let games = spec
            .iter()
            .enumerate()
            .map(|(i, &(d, v, w))| match d {
                None => GameRecord::folded("t", i as u32 + 1, trio()).unwrap(),
                Some(d) => {
                    GameRecord::declared("t", i as u32 + 1, trio(), d, GameType::Clubs, v, w, None)
                        .unwrap()
                }
            })
            .collect();
        SeriesRecord::new("t", trio(), games).unwrap()
    }

    proptest! {
        #[test]
        fn profile_matches_brute_force_recount(spec in prop::collection::vec(arb_game(), 1..60)) {
            let profile = series_profile(&build_series(&spec));
            for seat in 0..3 {
                let mine: Vec<_> = spec.iter().filter(|g| g.0 == Some(seat)).collect();
                let wins = mine.iter().filter(|g| g.2).count() as u32;
                let losses = mine.len() as u32 - wins;
                let value: i64 = mine
                    .iter()
                    .map(|g| if g.2 { g.1 as i64 } else { -2 * g.1 as i64 })
                    .sum();
                prop_assert_eq!(profile.0[seat], prof(wins, losses, value));
            }
            let played = spec.iter().filter(|g| g.0.is_some()).count() as u32;
            let tallied: u32 = profile.0.iter().map(|p| p.wins + p.losses).sum();
            prop_assert_eq!(tallied, played);
        }

        #[test]
        fn seeger_sum_identity(
            w in prop::array::uniform3(0u32..20),
            l in prop::array::uniform3(0u32..20),
            v in prop::array::uniform3(-2000i64..2000),
        ) {
            let p = SeriesProfile([0, 1, 2].map(|i| prof(w[i], l[i], v[i])));
            let es = seeger_score(&p);
            let (tw, tl): (i64, i64) = (w.iter().map(|&x| x as i64).sum(), l.iter().map(|&x| x as i64).sum());
            prop_assert_eq!(es.iter().sum::<i64>(), v.iter().sum::<i64>() + 50 * (tw - tl) + 80 * tl);
        }

        #[test]
        fn seeger_is_linear_over_concatenation(
            a in prop::collection::vec(arb_game(), 1..30),
            b in prop::collection::vec(arb_game(), 1..30),
        ) {
            let joined: Vec<_> = a.iter().chain(b.iter()).copied().collect();
            let pa = series_profile(&build_series(&a));
            let pb = series_profile(&build_series(&b));
            let pj = series_profile(&build_series(&joined));
            prop_assert_eq!(pa + pb, pj);
            let (sa, sb, sj) = (seeger_score(&pa), seeger_score(&pb), seeger_score(&pj));
            for i in 0..3 {
                prop_assert_eq!(sa[i] + sb[i], sj[i]);
            }
        }

        #[test]
        fn loss_costs_twice_the_win(v in 1u32..1000) {
            let won = GameRecord::declared("t", 1, trio(), 1, GameType::Null, v, true, None).unwrap();
            let lost = GameRecord::declared("t", 1, trio(), 1, GameType::Null, v, false, None).unwrap();
            let (pw, pl) = (game_outcome_points(&won).unwrap(), game_outcome_points(&lost).unwrap());
            prop_assert!(pw > 0);
            prop_assert_eq!(pl, -2 * pw);
        }
    }
}
