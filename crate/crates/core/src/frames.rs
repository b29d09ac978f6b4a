//! Normalized tracking-data model: frames, rosters and ball status.
//!
//! All positions are in meters in pitch coordinates (origin at the pitch
//! center, x along the length, y along the width); timestamps in seconds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 2D point/vector in pitch coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Unit vector, or `None` when the norm is below `min_norm`.
    pub fn unit(&self, min_norm: f64) -> Option<Point> {
        let n = self.norm();
        if n < min_norm {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

/// Index of a player in the match roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerIdx(pub u32);

/// Index of a team in the match roster (football: two teams).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TeamIdx(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Outfield,
    Goalkeeper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallStatus {
    InPlay,
    Dead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerMeta {
    pub id: String,
    pub team: TeamIdx,
    pub role: Role,
}

/// Interned players and teams for a match.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    players: Vec<PlayerMeta>,
    teams: Vec<String>,
    #[serde(skip)]
    by_id: HashMap<String, PlayerIdx>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RosterError {
    #[error("player {id} re-registered with a different team or role")]
    PlayerConflict { id: String },
    #[error("more than two teams in tracking data: {team}")]
    TooManyTeams { team: String },
}

impl Roster {
    pub fn new() -> Self {
        Roster::default()
    }

    pub fn intern_team(&mut self, name: &str) -> Result<TeamIdx, RosterError> {
        if let Some(i) = self.teams.iter().position(|t| t == name) {
            return Ok(TeamIdx(i as u8));
        }
        if self.teams.len() >= 2 {
            return Err(RosterError::TooManyTeams {
                team: name.to_string(),
            });
        }
        self.teams.push(name.to_string());
        Ok(TeamIdx((self.teams.len() - 1) as u8))
    }

    pub fn intern_player(
        &mut self,
        id: &str,
        team: TeamIdx,
        role: Role,
    ) -> Result<PlayerIdx, RosterError> {
        if let Some(&idx) = self.by_id.get(id) {
            let meta = &self.players[idx.0 as usize];
            if meta.team != team || meta.role != role {
                return Err(RosterError::PlayerConflict { id: id.to_string() });
            }
            return Ok(idx);
        }
        let idx = PlayerIdx(self.players.len() as u32);
        self.players.push(PlayerMeta {
            id: id.to_string(),
            team,
            role,
        });
        self.by_id.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn lookup(&self, id: &str) -> Option<PlayerIdx> {
        self.by_id.get(id).copied()
    }

    pub fn player(&self, idx: PlayerIdx) -> &PlayerMeta {
        &self.players[idx.0 as usize]
    }

    pub fn player_id(&self, idx: PlayerIdx) -> &str {
        &self.players[idx.0 as usize].id
    }

    pub fn team_of(&self, idx: PlayerIdx) -> TeamIdx {
        self.players[idx.0 as usize].team
    }

    pub fn team_name(&self, team: TeamIdx) -> &str {
        &self.teams[team.0 as usize]
    }

    pub fn team_by_name(&self, name: &str) -> Option<TeamIdx> {
        self.teams
            .iter()
            .position(|t| t == name)
            .map(|i| TeamIdx(i as u8))
    }

    pub fn players(&self) -> &[PlayerMeta] {
        &self.players
    }

    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    /// Rebuild the id lookup table (used after deserialization).
    pub fn reindex(&mut self) {
        self.by_id = self
            .players
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.clone(), PlayerIdx(i as u32)))
            .collect();
    }
}

/// One tracked player position in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerSample {
    pub player: PlayerIdx,
    pub pos: Point,
    /// False when the position was interpolated or provider-flagged as estimated.
    pub tracked: bool,
}

/// One snapshot of the match state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub frame_index: u64,
    pub period: u8,
    pub timestamp: f64,
    pub ball: Option<Point>,
    pub ball_status: BallStatus,
    pub players: Vec<PlayerSample>,
}

impl Frame {
    pub fn sample_of(&self, player: PlayerIdx) -> Option<&PlayerSample> {
        self.players.iter().find(|s| s.player == player)
    }

    pub fn position_of(&self, player: PlayerIdx) -> Option<Point> {
        self.sample_of(player).map(|s| s.pos)
    }
}

/// Time-ordered per-frame snapshots for a full match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSeries {
    pub sample_rate: f64,
    /// Whether the provider supplied an explicit in-play/dead signal.
    pub has_status_signal: bool,
    pub roster: Roster,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("frame index not strictly increasing at row {at} ({prev} -> {next})")]
    FrameIndexOrder { at: usize, prev: u64, next: u64 },
    #[error("timestamp decreasing at row {at}")]
    TimestampOrder { at: usize },
    #[error("period decreasing at row {at}")]
    PeriodOrder { at: usize },
    #[error("duplicate player {player} in frame {frame}")]
    DuplicatePlayer { frame: u64, player: String },
    #[error("non-positive sample rate {rate}")]
    BadSampleRate { rate: f64 },
}

impl FrameSeries {
    pub fn new(sample_rate: f64, roster: Roster) -> Self {
        FrameSeries {
            sample_rate,
            has_status_signal: false,
            roster,
            frames: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame positions (indices into `frames`) of the first frame of each period.
    pub fn period_starts(&self) -> Vec<(u8, usize)> {
        let mut out = Vec::new();
        let mut last = None;
        for (i, f) in self.frames.iter().enumerate() {
            if last != Some(f.period) {
                out.push((f.period, i));
                last = Some(f.period);
            }
        }
        out
    }

    /// Timestamp of the first frame of the given period, if present.
    pub fn period_start_ts(&self, period: u8) -> Option<f64> {
        self.frames
            .iter()
            .find(|f| f.period == period)
            .map(|f| f.timestamp)
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        if !(self.sample_rate > 0.0) {
            return Err(SeriesError::BadSampleRate {
                rate: self.sample_rate,
            });
        }
        let mut seen: Vec<PlayerIdx> = Vec::new();
        for (i, f) in self.frames.iter().enumerate() {
            if i > 0 {
                let prev = &self.frames[i - 1];
                if f.frame_index <= prev.frame_index {
                    return Err(SeriesError::FrameIndexOrder {
                        at: i,
                        prev: prev.frame_index,
                        next: f.frame_index,
                    });
                }
                if f.timestamp < prev.timestamp {
                    return Err(SeriesError::TimestampOrder { at: i });
                }
                if f.period < prev.period {
                    return Err(SeriesError::PeriodOrder { at: i });
                }
            }
            seen.clear();
            for s in &f.players {
                if seen.contains(&s.player) {
                    return Err(SeriesError::DuplicatePlayer {
                        frame: f.frame_index,
                        player: self.roster.player_id(s.player).to_string(),
                    });
                }
                seen.push(s.player);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roster_two() -> Roster {
        let mut r = Roster::new();
        let home = r.intern_team("home").unwrap();
        let away = r.intern_team("away").unwrap();
        r.intern_player("H1", home, Role::Goalkeeper).unwrap();
        r.intern_player("A1", away, Role::Outfield).unwrap();
        r
    }

    #[test]
    fn roster_interning_is_stable() {
        let mut r = roster_two();
        let home = r.team_by_name("home").unwrap();
        let again = r.intern_player("H1", home, Role::Goalkeeper).unwrap();
        assert_eq!(r.player_id(again), "H1");
        assert_eq!(r.team_of(again), home);
    }

    #[test]
    fn roster_rejects_conflicting_registration() {
        let mut r = roster_two();
        let away = r.team_by_name("away").unwrap();
        let err = r.intern_player("H1", away, Role::Goalkeeper).unwrap_err();
        assert_eq!(
            err,
            RosterError::PlayerConflict {
                id: "H1".to_string()
            }
        );
    }

    #[test]
    fn roster_rejects_third_team() {
        let mut r = roster_two();
        assert!(r.intern_team("third").is_err());
    }

    #[test]
    fn duplicate_player_in_frame_is_detected() {
        let r = roster_two();
        let p = r.lookup("H1").unwrap();
        let mut series = FrameSeries::new(25.0, r);
        series.frames.push(Frame {
            frame_index: 0,
            period: 1,
            timestamp: 0.0,
            ball: Some(Point::new(0.0, 0.0)),
            ball_status: BallStatus::InPlay,
            players: vec![
                PlayerSample {
                    player: p,
                    pos: Point::new(1.0, 0.0),
                    tracked: true,
                },
                PlayerSample {
                    player: p,
                    pos: Point::new(2.0, 0.0),
                    tracked: true,
                },
            ],
        });
        assert!(matches!(
            series.validate(),
            Err(SeriesError::DuplicatePlayer { frame: 0, .. })
        ));
    }
}
