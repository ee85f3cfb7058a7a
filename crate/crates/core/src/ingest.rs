//! Game-log reading and writing.
//!
//! A log is UTF-8 text with one JSON object per line. The first non-blank
//! line is a header carrying `"version": "v1"`; every following non-blank
//! line is one game:
//!
//! ```text
//! {"format":"skat-game-log","version":"v1"}
//! {"table_id":"t1","game_seq":1,"players":["a","b","c"],"declarer":0,"game_type":24,"base_value":48,"won":true,"win_prob":91.5}
//! {"table_id":"t1","game_seq":2,"players":["a","b","c"],"declarer":null,"game_type":"folded","base_value":0,"won":null}
//! ```
//!
//! `win_prob` is optional. Values up to 1 are read as fractions and scaled to
//! percent. Unknown fields are ignored with a warning; a line that violates
//! the schema is skipped and reported with its line number.

use std::io::{BufRead, Write};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{GameRecord, GameType, PlayerId, SeriesRecord};

pub const FORMAT_VERSION: &str = "v1";
pub const FORMAT_NAME: &str = "skat-game-log";

const KNOWN_FIELDS: [&str; 8] = [
    "table_id",
    "game_seq",
    "players",
    "declarer",
    "game_type",
    "base_value",
    "won",
    "win_prob",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub series_count: usize,
    /// Game lines seen, valid or not.
    pub game_count: usize,
    pub folded_count: usize,
    pub skipped: Vec<SkippedLine>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn parsed_count(&self) -> usize {
        self.game_count - self.skipped.len()
    }

    /// Plain `key: value` rendering, one skipped line per row.
    pub fn render(&self) -> String {
        let mut out = format!(
            "series: {}\ngames: {}\nparsed: {}\nfolded: {}\nskipped: {}\n",
            self.series_count,
            self.game_count,
            self.parsed_count(),
            self.folded_count,
            self.skipped.len()
        );
        for s in &self.skipped {
            out.push_str(&format!("skip line {}: {}\n", s.line, s.reason));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Option<&'a Value> {
    obj.get(name).filter(|v| !v.is_null())
}

fn parse_record(obj: &Map<String, Value>) -> std::result::Result<GameRecord, String> {
    let table_id = match field(obj, "table_id") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        _ => return Err("table_id must be a non-empty string".into()),
    };
    let game_seq = field(obj, "game_seq")
        .and_then(Value::as_u64)
        .filter(|&n| n >= 1 && n <= u32::MAX as u64)
        .ok_or("game_seq must be an integer >= 1")? as u32;
    let players = match field(obj, "players") {
        Some(Value::Array(a)) if a.len() == 3 => {
            let ids: Option<Vec<PlayerId>> = a
                .iter()
                .map(|v| v.as_str().and_then(|s| PlayerId::new(s).ok()))
                .collect();
            let ids = ids.ok_or("players must be non-empty strings")?;
            [ids[0].clone(), ids[1].clone(), ids[2].clone()]
        }
        Some(Value::Array(a)) => {
            return Err(format!(
                "table has {} players; only three-player tables are supported",
                a.len()
            ))
        }
        _ => return Err("players must be an array of three ids".into()),
    };
    let declarer = match field(obj, "declarer") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .filter(|&d| d <= 2)
                .ok_or("declarer must be 0, 1, 2 or null")? as usize,
        ),
    };
    let game_type = match field(obj, "game_type") {
        Some(Value::String(s)) if s == "folded" => GameType::Folded,
        Some(Value::Number(n)) => n
            .as_u64()
            .and_then(|c| u8::try_from(c).ok())
            .and_then(GameType::from_code)
            .ok_or_else(|| format!("unknown game_type code {n}"))?,
        _ => return Err("game_type must be a type code or \"folded\"".into()),
    };
    let base_value = field(obj, "base_value")
        .and_then(Value::as_u64)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or("base_value must be a non-negative integer")?;
    let won = match field(obj, "won") {
        None => None,
        Some(Value::Bool(b)) => Some(*b),
        Some(_) => return Err("won must be true, false or null".into()),
    };
    let win_prob = match field(obj, "win_prob") {
        None => None,
        Some(v) => {
            let p = v.as_f64().ok_or("win_prob must be a number")?;
            Some(if (0.0..=1.0).contains(&p) { p * 100.0 } else { p })
        }
    };
    GameRecord::from_parts(
        table_id, game_seq, players, declarer, game_type, base_value, won, win_prob,
    )
    .map_err(|e| e.to_string())
}

/// Parses one game line. Returns the record and any warnings.
pub fn parse_line(line: &str) -> std::result::Result<(GameRecord, Vec<String>), String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed JSON: {e}"))?;
    let Value::Object(obj) = value else {
        return Err("record is not a JSON object".into());
    };
    let warnings = obj
        .keys()
        .filter(|k| !KNOWN_FIELDS.contains(&k.as_str()))
        .map(|k| format!("ignoring unknown field {k:?}"))
        .collect();
    parse_record(&obj).map(|g| (g, warnings))
}

fn check_header(line: &str) -> Result<()> {
    let value: Value = serde_json::from_str(line)
        .map_err(|_| Error::Format("first line is not a v1 header".into()))?;
    match value.get("version").and_then(Value::as_str) {
        Some(FORMAT_VERSION) => Ok(()),
        Some(other) => Err(Error::Format(format!("unsupported log version {other:?}"))),
        None => Err(Error::Format("header lacks a version field".into())),
    }
}

/// Reads a game log. Per-line problems are collected in the report; only an
/// unreadable stream or a bad header is fatal.
pub fn parse_games<R: BufRead>(reader: R) -> Result<(Vec<GameRecord>, IngestReport)> {
    let lines = reader.lines().collect::<std::io::Result<Vec<String>>>()?;
    let mut numbered = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut report = IngestReport::default();
    let Some((_, header)) = numbered.next() else {
        return Ok((Vec::new(), report));
    };
    check_header(header)?;

    let body: Vec<(usize, &str)> = numbered.collect();
    let parsed: Vec<_> = body.par_iter().map(|&(n, l)| (n, parse_line(l))).collect();

    let mut games = Vec::with_capacity(parsed.len());
    report.game_count = parsed.len();
    for (n, result) in parsed {
        match result {
            Ok((game, warnings)) => {
                report
                    .warnings
                    .extend(warnings.into_iter().map(|w| format!("line {n}: {w}")));
                if game.is_folded() {
                    report.folded_count += 1;
                }
                games.push(game);
            }
            Err(reason) => report.skipped.push(SkippedLine { line: n, reason }),
        }
    }
    Ok((games, report))
}

/// Groups games by table in first-appearance order, each ordered by
/// `game_seq`.
pub fn group_series(games: Vec<GameRecord>) -> Result<Vec<SeriesRecord>> {
    let mut tables: IndexMap<String, Vec<GameRecord>> = IndexMap::new();
    for g in games {
        tables.entry(g.table_id().to_string()).or_default().push(g);
    }
    tables
        .into_iter()
        .map(|(table, mut games)| {
            games.sort_by_key(GameRecord::game_seq);
            if let Some(w) = games.windows(2).find(|w| w[0].game_seq() == w[1].game_seq()) {
                return Err(Error::DuplicateGame {
                    table,
                    seq: w[0].game_seq(),
                });
            }
            let players = games[0].players().clone();
            if games.iter().any(|g| g.players() != &players) {
                return Err(Error::InconsistentPlayers(table));
            }
            SeriesRecord::new(table, players, games)
        })
        .collect()
}

/// Parses and groups in one step, filling in the series count.
pub fn read_series<R: BufRead>(reader: R) -> Result<(Vec<SeriesRecord>, IngestReport)> {
    let (games, mut report) = parse_games(reader)?;
    let series = group_series(games)?;
    report.series_count = series.len();
    Ok((series, report))
}

#[derive(Serialize)]
struct LineOut<'a> {
    table_id: &'a str,
    game_seq: u32,
    players: &'a [PlayerId; 3],
    declarer: Option<usize>,
    game_type: GameType,
    base_value: u32,
    won: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    win_prob: Option<f64>,
}

/// One game as a log line (no trailing newline). Percent win probabilities at
/// or below 1 are written as fractions so they read back unchanged.
pub fn serialize_game(game: &GameRecord) -> String {
    let out = LineOut {
        table_id: game.table_id(),
        game_seq: game.game_seq(),
        players: game.players(),
        declarer: game.declarer(),
        game_type: game.game_type(),
        base_value: game.base_value(),
        won: game.won(),
        win_prob: game
            .win_prob()
            .map(|p| if p <= 1.0 { fraction_for_percent(p) } else { p }),
    };
    serde_json::to_string(&out).expect("game record serializes")
}

/// A fraction `f` with `f * 100.0 == p` exactly, searched among the floats
/// adjacent to `p / 100`.
fn fraction_for_percent(p: f64) -> f64 {
    let start = p / 100.0;
    let step = |x: f64, up: bool| {
        let bits = x.to_bits();
        f64::from_bits(if up == (x >= 0.0) { bits + 1 } else { bits - 1 })
    };
    let (mut lo, mut hi) = (start, start);
    for _ in 0..8 {
        if lo * 100.0 == p {
            return lo;
        }
        if hi * 100.0 == p {
            return hi;
        }
        lo = step(lo, false);
        hi = step(hi, true);
    }
    start
}

pub fn header_line() -> String {
    format!("{{\"format\":\"{FORMAT_NAME}\",\"version\":\"{FORMAT_VERSION}\"}}")
}

pub fn write_games<'a, W, I>(mut writer: W, games: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a GameRecord>,
{
    writeln!(writer, "{}", header_line())?;
    for g in games {
        writeln!(writer, "{}", serialize_game(g))?;
    }
    Ok(())
}

pub fn write_series<W: Write>(writer: W, series: &[SeriesRecord]) -> Result<()> {
    write_games(writer, series.iter().flat_map(|s| s.games()))
}
