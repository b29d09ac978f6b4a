//! Tracking-data ingest: provider formats, normalization and ball status.
//!
//! Two formats are registered:
//!
//! - `generic-csv`: optional `# key: value` directive lines, then a header
//!   `frame,period,timestamp,ball_x,ball_y[,ball_status]` followed by
//!   repeated `player_id,team,role,x,y` column groups. Empty ball cells mean
//!   the ball is missing; empty `player_id` cells mean the group is unused
//!   in that row. Supported directives: `units` (must be meters) and
//!   `sample_rate`.
//! - `jsonl-frames`: one frame object per line; the first line may carry
//!   `sample_rate`. This is also the normalized serialization format and
//!   round-trips bit-exactly.

mod savgol;

pub use savgol::smooth_ball_positions;

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{
    BallStatus, Frame, FrameSeries, PlayerSample, Point, Role, Roster, RosterError, SeriesError,
};

/// Maximum per-player gap (frames) bridged by linear interpolation.
pub const MAX_INTERPOLATION_GAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    GenericCsv,
    JsonlFrames,
}

impl std::str::FromStr for Format {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic-csv" => Ok(Format::GenericCsv),
            "jsonl-frames" => Ok(Format::JsonlFrames),
            other => Err(ParseError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unknown input format {0:?}")]
    UnknownFormat(String),
    #[error("declared units {declared:?} are not meters")]
    UnitMismatch { declared: String },
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("frame {frame}, column {column}: {detail}")]
    MalformedRow {
        frame: u64,
        column: String,
        detail: String,
    },
    #[error("line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot infer sample rate from fewer than two frames")]
    NoSampleRate,
}

/// Parses a tracking byte stream in the given format into a normalized
/// series: positions in meters, per-player gaps up to
/// [`MAX_INTERPOLATION_GAP`] frames linearly interpolated.
pub fn parse_tracking<R: Read>(source: R, format: Format) -> Result<FrameSeries, ParseError> {
    let mut series = match format {
        Format::GenericCsv => parse_generic_csv(source)?,
        Format::JsonlFrames => parse_jsonl(source)?,
    };
    series.validate()?;
    interpolate_player_gaps(&mut series, MAX_INTERPOLATION_GAP);
    Ok(series)
}

fn parse_directives<R: BufRead>(reader: &mut R) -> Result<(Option<f64>, String), ParseError> {
    let mut sample_rate = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Ok((sample_rate, String::new()));
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut parts = rest.splitn(2, ':');
            let key = parts.next().unwrap_or("").trim().to_lowercase();
            let value = parts.next().unwrap_or("").trim().to_string();
            match key.as_str() {
                "units" => {
                    let v = value.to_lowercase();
                    if v != "m" && v != "meters" {
                        return Err(ParseError::UnitMismatch { declared: value });
                    }
                }
                "sample_rate" => {
                    sample_rate = value.parse::<f64>().ok();
                }
                _ => {}
            }
        } else {
            return Ok((sample_rate, line));
        }
    }
}

fn parse_generic_csv<R: Read>(source: R) -> Result<FrameSeries, ParseError> {
    let mut reader = BufReader::new(source);
    let (declared_rate, header_line) = parse_directives(&mut reader)?;
    if header_line.is_empty() {
        return Err(ParseError::BadHeader("empty input".to_string()));
    }
    let header: Vec<String> = header_line
        .trim_end()
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();

    let fixed = ["frame", "period", "timestamp", "ball_x", "ball_y"];
    if header.len() < fixed.len() {
        return Err(ParseError::BadHeader(format!(
            "expected at least {} columns, got {}",
            fixed.len(),
            header.len()
        )));
    }
    for (i, name) in fixed.iter().enumerate() {
        if header[i] != *name {
            return Err(ParseError::BadHeader(format!(
                "column {} must be {:?}, got {:?}",
                i, name, header[i]
            )));
        }
    }
    let mut group_start = fixed.len();
    let has_status = header.get(group_start).map(String::as_str) == Some("ball_status");
    if has_status {
        group_start += 1;
    }
    let group_cols = ["player_id", "team", "role", "x", "y"];
    let tail = &header[group_start..];
    if tail.len() % group_cols.len() != 0 {
        return Err(ParseError::BadHeader(
            "player columns must repeat player_id,team,role,x,y groups".to_string(),
        ));
    }
    for (i, name) in tail.iter().enumerate() {
        if name != group_cols[i % group_cols.len()] {
            return Err(ParseError::BadHeader(format!(
                "player group column {} must be {:?}, got {:?}",
                i,
                group_cols[i % group_cols.len()],
                name
            )));
        }
    }
    let groups = tail.len() / group_cols.len();

    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(reader);

    let mut roster = Roster::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut any_status = false;

    for record in csv_reader.records() {
        let record = record?;
        let col = |i: usize| record.get(i).unwrap_or("").trim();
        let frame_index: u64 = col(0).parse().map_err(|_| ParseError::MalformedRow {
            frame: frames.len() as u64,
            column: "frame".to_string(),
            detail: format!("bad integer {:?}", col(0)),
        })?;
        let parse_f64 = |i: usize, name: &str| -> Result<f64, ParseError> {
            col(i).parse::<f64>().map_err(|_| ParseError::MalformedRow {
                frame: frame_index,
                column: name.to_string(),
                detail: format!("bad number {:?}", col(i)),
            })
        };
        let period: u8 = col(1).parse().map_err(|_| ParseError::MalformedRow {
            frame: frame_index,
            column: "period".to_string(),
            detail: format!("bad integer {:?}", col(1)),
        })?;
        let timestamp = parse_f64(2, "timestamp")?;
        let ball = match (col(3), col(4)) {
            ("", "") => None,
            _ => Some(Point::new(parse_f64(3, "ball_x")?, parse_f64(4, "ball_y")?)),
        };
        let mut ball_status = None;
        if has_status {
            match col(5) {
                "" => {}
                "in_play" => {
                    ball_status = Some(BallStatus::InPlay);
                    any_status = true;
                }
                "dead" => {
                    ball_status = Some(BallStatus::Dead);
                    any_status = true;
                }
                other => {
                    return Err(ParseError::MalformedRow {
                        frame: frame_index,
                        column: "ball_status".to_string(),
                        detail: format!("expected in_play/dead, got {:?}", other),
                    })
                }
            }
        }

        let mut players = Vec::new();
        for g in 0..groups {
            let base = group_start + g * group_cols.len();
            let id = record.get(base).unwrap_or("").trim();
            if id.is_empty() {
                continue;
            }
            let team_name = record.get(base + 1).unwrap_or("").trim();
            let role_s = record.get(base + 2).unwrap_or("").trim().to_lowercase();
            let role = match role_s.as_str() {
                "goalkeeper" | "gk" => Role::Goalkeeper,
                "outfield" | "" => Role::Outfield,
                other => {
                    return Err(ParseError::MalformedRow {
                        frame: frame_index,
                        column: format!("role (group {})", g),
                        detail: format!("unknown role {:?}", other),
                    })
                }
            };
            let team = roster.intern_team(team_name)?;
            let player = roster.intern_player(id, team, role)?;
            if players.iter().any(|s: &PlayerSample| s.player == player) {
                return Err(SeriesError::DuplicatePlayer {
                    frame: frame_index,
                    player: id.to_string(),
                }
                .into());
            }
            let xs = record.get(base + 3).unwrap_or("").trim();
            let ys = record.get(base + 4).unwrap_or("").trim();
            if xs.is_empty() || ys.is_empty() {
                continue; // present in roster, untracked this frame
            }
            let pos = Point::new(
                parse_f64(base + 3, &format!("x (player {})", id))?,
                parse_f64(base + 4, &format!("y (player {})", id))?,
            );
            players.push(PlayerSample {
                player,
                pos,
                tracked: true,
            });
        }

        let status = ball_status.unwrap_or(if ball.is_some() {
            BallStatus::InPlay
        } else {
            BallStatus::Dead
        });
        frames.push(Frame {
            frame_index,
            period,
            timestamp,
            ball,
            ball_status: status,
            players,
        });
    }

    let sample_rate = match declared_rate {
        Some(r) if r > 0.0 => r,
        _ => infer_sample_rate(&frames)?,
    };
    let mut series = FrameSeries::new(sample_rate, roster);
    series.has_status_signal = any_status;
    series.frames = frames;
    Ok(series)
}

fn infer_sample_rate(frames: &[Frame]) -> Result<f64, ParseError> {
    let mut deltas: Vec<f64> = frames
        .windows(2)
        .filter(|w| w[0].period == w[1].period)
        .map(|w| w[1].timestamp - w[0].timestamp)
        .filter(|d| *d > 0.0)
        .collect();
    if deltas.is_empty() {
        return Err(ParseError::NoSampleRate);
    }
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(1.0 / deltas[deltas.len() / 2])
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonPlayer {
    id: String,
    team: String,
    role: Role,
    x: f64,
    y: f64,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    tracked: bool,
}

fn default_true() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonFrame {
    frame: u64,
    period: u8,
    timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ball: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ball_status: Option<BallStatus>,
    players: Vec<JsonPlayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample_rate: Option<f64>,
}

fn parse_jsonl<R: Read>(source: R) -> Result<FrameSeries, ParseError> {
    let reader = BufReader::new(source);
    let mut roster = Roster::new();
    let mut frames = Vec::new();
    let mut declared_rate = None;
    let mut any_status = false;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let jf: JsonFrame =
            serde_json::from_str(&line).map_err(|e| ParseError::MalformedLine {
                line: lineno + 1,
                detail: e.to_string(),
            })?;
        if declared_rate.is_none() {
            declared_rate = jf.sample_rate;
        }
        let mut players = Vec::new();
        for p in &jf.players {
            let team = roster.intern_team(&p.team)?;
            let player = roster.intern_player(&p.id, team, p.role)?;
            if players.iter().any(|s: &PlayerSample| s.player == player) {
                return Err(SeriesError::DuplicatePlayer {
                    frame: jf.frame,
                    player: p.id.clone(),
                }
                .into());
            }
            players.push(PlayerSample {
                player,
                pos: Point::new(p.x, p.y),
                tracked: p.tracked,
            });
        }
        if jf.ball_status.is_some() {
            any_status = true;
        }
        let status = jf.ball_status.unwrap_or(if jf.ball.is_some() {
            BallStatus::InPlay
        } else {
            BallStatus::Dead
        });
        frames.push(Frame {
            frame_index: jf.frame,
            period: jf.period,
            timestamp: jf.timestamp,
            ball: jf.ball,
            ball_status: status,
            players,
        });
    }

    let sample_rate = match declared_rate {
        Some(r) if r > 0.0 => r,
        _ => infer_sample_rate(&frames)?,
    };
    let mut series = FrameSeries::new(sample_rate, roster);
    series.has_status_signal = any_status;
    series.frames = frames;
    Ok(series)
}

/// Serializes a series to the normalized jsonl-frames form. Parsing the
/// output yields an identical series (bit-exact floats).
pub fn write_jsonl<W: Write>(series: &FrameSeries, mut out: W) -> Result<(), ParseError> {
    for (i, f) in series.frames.iter().enumerate() {
        let jf = JsonFrame {
            frame: f.frame_index,
            period: f.period,
            timestamp: f.timestamp,
            ball: f.ball,
            ball_status: Some(f.ball_status),
            players: f
                .players
                .iter()
                .map(|s| {
                    let meta = series.roster.player(s.player);
                    JsonPlayer {
                        id: meta.id.clone(),
                        team: series.roster.team_name(meta.team).to_string(),
                        role: meta.role,
                        x: s.pos.x,
                        y: s.pos.y,
                        tracked: s.tracked,
                    }
                })
                .collect(),
            sample_rate: if i == 0 {
                Some(series.sample_rate)
            } else {
                None
            },
        };
        serde_json::to_writer(&mut out, &jf).map_err(|e| ParseError::MalformedLine {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Maximal stretches of consecutive frames (positions into `frames`) that
/// are in the same period, in play, and have a ball position.
pub(crate) fn inplay_runs(series: &FrameSeries) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut last_period = 0u8;
    for (i, f) in series.frames.iter().enumerate() {
        let live = f.ball_status == BallStatus::InPlay && f.ball.is_some();
        if live && (current.is_empty() || f.period == last_period) {
            current.push(i);
            last_period = f.period;
        } else {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
            if live {
                current.push(i);
                last_period = f.period;
            }
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Applies the provider status signal if present, otherwise marks frames
/// dead exactly where ball data is missing; then removes status runs
/// shorter than `debounce` frames by merging them into the surrounding
/// status. A dead run is only flipped to in-play when every frame in it has
/// a ball position.
pub fn infer_ball_status(series: &mut FrameSeries, debounce: usize) {
    if !series.has_status_signal {
        for f in series.frames.iter_mut() {
            f.ball_status = if f.ball.is_some() {
                BallStatus::InPlay
            } else {
                BallStatus::Dead
            };
        }
    }
    if debounce == 0 {
        return;
    }
    // Debounce within each period independently.
    let starts = series.period_starts();
    for w in 0..starts.len() {
        let lo = starts[w].1;
        let hi = if w + 1 < starts.len() {
            starts[w + 1].1
        } else {
            series.frames.len()
        };
        debounce_range(series, lo, hi, debounce);
    }
}

fn debounce_range(series: &mut FrameSeries, lo: usize, hi: usize, debounce: usize) {
    loop {
        // collect runs as (start, len, status)
        let mut runs: Vec<(usize, usize, BallStatus)> = Vec::new();
        for i in lo..hi {
            let st = series.frames[i].ball_status;
            match runs.last_mut() {
                Some((_, len, s)) if *s == st => *len += 1,
                _ => runs.push((i, 1, st)),
            }
        }
        if runs.len() < 2 {
            return;
        }
        // flip the shortest mergeable run below the debounce threshold
        let mut target: Option<usize> = None;
        for (ri, (start, len, st)) in runs.iter().enumerate() {
            if *len >= debounce {
                continue;
            }
            if *st == BallStatus::Dead {
                let all_ball = (*start..*start + *len).all(|i| series.frames[i].ball.is_some());
                if !all_ball {
                    continue;
                }
            }
            match target {
                Some(t) if runs[t].1 <= *len => {}
                _ => target = Some(ri),
            }
        }
        let Some(t) = target else { return };
        let (start, len, st) = runs[t];
        let flipped = match st {
            BallStatus::InPlay => BallStatus::Dead,
            BallStatus::Dead => BallStatus::InPlay,
        };
        for i in start..start + len {
            series.frames[i].ball_status = flipped;
        }
    }
}

/// Linearly interpolates per-player position gaps of at most `max_gap`
/// frames (within a period). Interpolated samples carry `tracked = false`.
pub fn interpolate_player_gaps(series: &mut FrameSeries, max_gap: usize) {
    let n_players = series.roster.players().len();
    for p in 0..n_players {
        let player = crate::frames::PlayerIdx(p as u32);
        // positions of frames where the player is present
        let present: Vec<(usize, Point)> = series
            .frames
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.position_of(player).map(|pos| (i, pos)))
            .collect();
        for w in present.windows(2) {
            let (i0, p0) = w[0];
            let (i1, p1) = w[1];
            let gap = i1 - i0 - 1;
            if gap == 0 || gap > max_gap {
                continue;
            }
            if series.frames[i0].period != series.frames[i1].period {
                continue;
            }
            for k in 1..=gap {
                let t = k as f64 / (gap + 1) as f64;
                let pos = Point::new(p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y));
                series.frames[i0 + k].players.push(PlayerSample {
                    player,
                    pos,
                    tracked: false,
                });
            }
        }
    }
}
