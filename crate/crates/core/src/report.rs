//! Tables derived from a dataset or a ledger, and their CSV/SVG renderings.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chance::WinProbEstimator;
use crate::elo::{mean, EloConfig, KPolicy};
use crate::error::{Error, Result};
use crate::model::{series_profile, seeger_score, PlayerId, SeriesRecord, NOMINAL_SERIES_LEN};
use crate::pipeline::{replay, RatingLedger};
use crate::scalar::Scalar;

fn csv_text<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct RankingRow<F> {
    pub rank: usize,
    pub player: PlayerId,
    pub rating: F,
    pub series: u32,
}

/// Players by rating, highest first; ties go to more series played, then to
/// the smaller id.
pub fn ranking<F: Scalar>(ledger: &RatingLedger<F>) -> Vec<RankingRow<F>> {
    let mut rows: Vec<_> = ledger.ratings().collect();
    rows.sort_by(|(ia, a), (ib, b)| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then(b.series_played.cmp(&a.series_played))
            .then(ia.cmp(ib))
    });
    rows.into_iter()
        .enumerate()
        .map(|(i, (id, r))| RankingRow {
            rank: i + 1,
            player: id.clone(),
            rating: r.value,
            series: r.series_played,
        })
        .collect()
}

pub fn ranking_csv<F: Scalar>(rows: &[RankingRow<F>]) -> String {
    csv_text(&["rank", "player", "rating", "series"], |w| {
        for r in rows {
            w.write_record([
                r.rank.to_string(),
                r.player.to_string(),
                format!("{:.2}", r.rating.to_f64_lossy()),
                r.series.to_string(),
            ])?;
        }
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageScoreRow {
    pub player: PlayerId,
    pub games: usize,
    pub total: i64,
    pub avg_per_game: f64,
    pub avg_per_36: f64,
}

/// Seeger score per game played (folded games included), best first.
pub fn average_scores(series: &[SeriesRecord]) -> Vec<AverageScoreRow> {
    let mut acc: BTreeMap<&PlayerId, (usize, i64)> = BTreeMap::new();
    for s in series {
        let es = seeger_score(&series_profile(s));
        for (p, v) in s.players().iter().zip(es) {
            let e = acc.entry(p).or_default();
            e.0 += s.len();
            e.1 += v;
        }
    }
    let mut rows: Vec<_> = acc
        .into_iter()
        .filter(|(_, (games, _))| *games > 0)
        .map(|(p, (games, total))| {
            let avg = total as f64 / games as f64;
            AverageScoreRow {
                player: p.clone(),
                games,
                total,
                avg_per_game: avg,
                avg_per_36: avg * NOMINAL_SERIES_LEN as f64,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.avg_per_game.total_cmp(&a.avg_per_game).then(a.player.cmp(&b.player)));
    rows
}

pub fn average_scores_csv(rows: &[AverageScoreRow]) -> String {
    csv_text(&["player", "games", "avg_per_game", "avg_per_36"], |w| {
        for r in rows {
            w.write_record([
                r.player.to_string(),
                r.games.to_string(),
                format!("{:.2}", r.avg_per_game),
                format!("{:.2}", r.avg_per_36),
            ])?;
        }
        Ok(())
    })
}

/// One row per series and seat.
pub fn seeger_csv(series: &[SeriesRecord]) -> String {
    csv_text(&["table_id", "player", "wins", "losses", "value_sum", "es"], |w| {
        for s in series {
            let profile = series_profile(s);
            let es = seeger_score(&profile);
            for ((player, seat), es) in s.players().iter().zip(&profile.0).zip(es) {
                w.write_record([
                    s.table_id().to_string(),
                    player.to_string(),
                    seat.wins.to_string(),
                    seat.losses.to_string(),
                    seat.value_sum.to_string(),
                    es.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PositionValue {
    pub games: u64,
    pub value_sum: u64,
}

impl PositionValue {
    pub fn mean(&self) -> f64 {
        self.value_sum as f64 / self.games as f64
    }
}

/// Declared-game values by declarer seat, folded games left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanGameValue {
    pub positions: [PositionValue; 3],
}

impl MeanGameValue {
    pub fn from_counts(games: [u64; 3], sums: [u64; 3]) -> Result<Self> {
        if games.iter().sum::<u64>() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(MeanGameValue {
            positions: [0, 1, 2].map(|i| PositionValue {
                games: games[i],
                value_sum: sums[i],
            }),
        })
    }

    pub fn total(&self) -> PositionValue {
        self.positions
            .iter()
            .fold(PositionValue::default(), |a, p| PositionValue {
                games: a.games + p.games,
                value_sum: a.value_sum + p.value_sum,
            })
    }

    pub fn overall(&self) -> f64 {
        self.total().mean()
    }

    pub fn render(&self) -> String {
        csv_text(&["position", "games", "value_sum", "mean"], |w| {
            let rows = self.positions.iter().enumerate().map(|(i, p)| (i.to_string(), *p));
            for (label, p) in rows.chain([("all".to_string(), self.total())]) {
                let mean = if p.games == 0 { String::new() } else { format!("{:.1}", p.mean()) };
                w.write_record([label, p.games.to_string(), p.value_sum.to_string(), mean])?;
            }
            Ok(())
        })
    }
}

pub fn mean_game_value(series: &[SeriesRecord]) -> Result<MeanGameValue> {
    let mut games = [0u64; 3];
    let mut sums = [0u64; 3];
    for g in series.iter().flat_map(|s| s.games()) {
        if let Some(seat) = g.declarer() {
            games[seat] += 1;
            sums[seat] += u64::from(g.base_value());
        }
    }
    MeanGameValue::from_counts(games, sums)
}

/// Nearest-rank percentile: the element at rank `ceil(p/100 * n)` (at least 1)
/// of the ascending sort.
pub fn percentile<F: Scalar>(values: &[F], p: f64) -> Result<F> {
    if values.is_empty() {
        return Err(Error::domain("percentile of an empty list"));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::domain("percentile outside [0, 100]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let rank = (p * sorted.len() as f64 / 100.0).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct Distribution<F> {
    pub max: F,
    pub mean: F,
    pub min: F,
    pub p10: F,
    pub p25: F,
    pub p75: F,
    pub p90: F,
}

impl<F: Scalar> Distribution<F> {
    pub fn of(values: &[F]) -> Result<Self> {
        Ok(Distribution {
            max: percentile(values, 100.0)?,
            mean: mean(values),
            min: percentile(values, 0.0)?,
            p10: percentile(values, 10.0)?,
            p25: percentile(values, 25.0)?,
            p75: percentile(values, 75.0)?,
            p90: percentile(values, 90.0)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub chance_hand: bool,
    pub chance_flat: bool,
    pub k: f64,
}

pub const DEFAULT_K_GRID: [f64; 4] = [0.01, 0.02, 0.04, 0.08];

/// All combinations of both chance flags with the four default `K` values.
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::with_capacity(16);
    for chance_hand in [false, true] {
        for chance_flat in [false, true] {
            for k in DEFAULT_K_GRID {
                grid.push(GridPoint { chance_hand, chance_flat, k });
            }
        }
    }
    grid
}

/// Parses `default` or a `;`-separated list of `i1,i2,k` triples, e.g.
/// `0,0,0.02;1,1,0.04`.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    let text = text.trim();
    if text == "default" {
        return Ok(default_grid());
    }
    let flag = |s: &str| match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Config(format!("grid flag {other:?} must be 0 or 1"))),
    };
    let grid: Vec<GridPoint> = text
        .split(';')
        .map(|point| {
            let parts: Vec<&str> = point.split(',').collect();
            let [i1, i2, k] = parts[..] else {
                return Err(Error::Config(format!("grid point {point:?} needs i1,i2,k")));
            };
            let k: f64 = k
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad k in grid point {point:?}")))?;
            Ok(GridPoint { chance_hand: flag(i1)?, chance_flat: flag(i2)?, k })
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct SweepRow<F> {
    pub point: GridPoint,
    pub stats: Distribution<F>,
}

#[derive(Debug, Default)]
pub struct SweepReport<F> {
    pub rows: Vec<SweepRow<F>>,
    pub failures: Vec<(GridPoint, Error)>,
}

impl<F: Scalar> SweepReport<F> {
    pub fn row(&self, chance_hand: bool, chance_flat: bool, k: f64) -> Option<&SweepRow<F>> {
        self.rows.iter().find(|r| {
            r.point.chance_hand == chance_hand && r.point.chance_flat == chance_flat && r.point.k == k
        })
    }

    pub fn to_csv(&self) -> String {
        let fmt = |v: F| format!("{:.2}", v.to_f64_lossy());
        csv_text(&["i1", "i2", "k", "max", "mean", "min", "p10", "p25", "p75", "p90"], |w| {
            for r in &self.rows {
                let s = r.stats;
                w.write_record([
                    u8::from(r.point.chance_hand).to_string(),
                    u8::from(r.point.chance_flat).to_string(),
                    r.point.k.to_string(),
                    fmt(s.max),
                    fmt(s.mean),
                    fmt(s.min),
                    fmt(s.p10),
                    fmt(s.p25),
                    fmt(s.p75),
                    fmt(s.p90),
                ])?;
            }
            Ok(())
        })
    }
}

/// One independent replay per grid point, run in parallel. The grid point
/// replaces `K` and both chance flags of `base`. Rows keep grid order; a
/// failing point is reported and the others still run.
pub fn sweep<F: Scalar>(
    series: &[SeriesRecord],
    grid: &[GridPoint],
    base: &EloConfig<F>,
    estimator: Option<&dyn WinProbEstimator>,
) -> Result<SweepReport<F>> {
    if grid.is_empty() {
        return Err(Error::domain("empty sweep grid"));
    }
    let results: Vec<Result<Distribution<F>>> = grid
        .par_iter()
        .map(|p| {
            let mut config = base.clone().with_chance(p.chance_hand, p.chance_flat);
            config.k_policy = KPolicy::Fixed(F::lit(p.k));
            let ledger = replay(series, &config, estimator)?;
            let finals: Vec<F> = ledger.ratings().map(|(_, r)| r.value).collect();
            Distribution::of(&finals)
        })
        .collect();
    let mut report = SweepReport { rows: Vec::new(), failures: Vec::new() };
    for (point, r) in grid.iter().zip(results) {
        match r {
            Ok(stats) => report.rows.push(SweepRow { point: *point, stats }),
            Err(e) => report.failures.push((*point, e)),
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeMode {
    /// x counts each player's own updates.
    Contracted,
    /// x is the global series index; ratings carry forward between a
    /// player's series.
    Expanded,
}

/// Rating series for a set of players. Cells are empty where a player has no
/// value at that x.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub players: Vec<String>,
    pub rows: Vec<(usize, Vec<Option<f64>>)>,
}

pub fn timeseries_export<F: Scalar>(
    ledger: &RatingLedger<F>,
    players: &[PlayerId],
    mode: TimeMode,
) -> Result<TimeSeries> {
    let histories: Vec<Vec<(usize, f64)>> = players
        .iter()
        .map(|p| {
            Ok(ledger
                .history(p)?
                .into_iter()
                .map(|e| {
                    let seat = e.seat_of(p).expect("entry lists player");
                    (e.index, e.trace.posterior[seat].to_f64_lossy())
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let rows = match mode {
        TimeMode::Contracted => {
            let n = histories.iter().map(Vec::len).max().unwrap_or(0);
            (0..n)
                .map(|x| (x + 1, histories.iter().map(|h| h.get(x).map(|v| v.1)).collect()))
                .collect()
        }
        TimeMode::Expanded => {
            let mut cursor = vec![0usize; histories.len()];
            let mut last = vec![None; histories.len()];
            (0..ledger.series_count())
                .map(|x| {
                    for (i, h) in histories.iter().enumerate() {
                        if let Some(&(idx, v)) = h.get(cursor[i]) {
                            if idx == x {
                                last[i] = Some(v);
                                cursor[i] += 1;
                            }
                        }
                    }
                    (x + 1, last.clone())
                })
                .collect()
        }
    };
    Ok(TimeSeries {
        players: players.iter().map(|p| p.to_string()).collect(),
        rows,
    })
}

impl TimeSeries {
    pub fn to_csv(&self) -> String {
        let mut header = vec!["x"];
        header.extend(self.players.iter().map(String::as_str));
        csv_text(&header, |w| {
            for (x, cells) in &self.rows {
                let mut rec = vec![x.to_string()];
                rec.extend(cells.iter().map(|c| c.map_or(String::new(), |v| format!("{v:.2}"))));
                w.write_record(&rec)?;
            }
            Ok(())
        })
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if header.get(0) != Some("x") {
            return Err(Error::Format("time series header must start with x".into()));
        }
        let players: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?}")));
            let x = rec[0].parse::<usize>().map_err(|_| Error::Format(format!("bad x {:?}", &rec[0])))?;
            let cells = rec
                .iter()
                .skip(1)
                .map(|c| if c.is_empty() { Ok(None) } else { num(c).map(Some) })
                .collect::<Result<_>>()?;
            rows.push((x, cells));
        }
        Ok(TimeSeries { players, rows })
    }

    /// Static line chart, one polyline per player.
    pub fn to_svg(&self) -> String {
        const W: f64 = 800.0;
        const H: f64 = 400.0;
        const PAD: f64 = 40.0;
        const COLORS: [&str; 8] = [
            "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
        ];
        let values = self.rows.iter().flat_map(|(_, c)| c.iter().flatten().copied());
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo, hi.max(lo + 1.0)) } else { (0.0, 1.0) };
        let x_max = self.rows.last().map_or(1, |r| r.0.max(2)) as f64;
        let sx = |x: usize| PAD + (x as f64 - 1.0) / (x_max - 1.0) * (W - 2.0 * PAD);
        let sy = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{PAD}" y="{:.1}" font-size="12">{hi:.2}</text><text x="{PAD}" y="{:.1}" font-size="12">{lo:.2}</text>"#,
            PAD - 8.0,
            H - PAD + 16.0
        );
        for (i, name) in self.players.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let points: Vec<String> = self
                .rows
                .iter()
                .filter_map(|(x, c)| c[i].map(|v| format!("{:.1},{:.1}", sx(*x), sy(v))))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                points.join(" "),
                xml_escape(name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
