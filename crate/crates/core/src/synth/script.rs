//! Match script schema and validation.
//!
//! Scripts are data files (JSON), not code, so fixtures stay reviewable and
//! diffable. Coordinates are absolute pitch coordinates; the author accounts
//! for the attack-direction flip in even periods. Base positions are given
//! in first-period orientation and mirrored automatically afterwards.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::Role;

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("script needs exactly two teams")]
    BadTeamCount,
    #[error("unknown player {id:?} in action {action}")]
    UnknownPlayer { action: usize, id: String },
    #[error("action {action}: {detail}")]
    Invalid { action: usize, detail: String },
    #[error("action {action}: ball teleport — {detail}")]
    Discontinuity { action: usize, detail: String },
    #[error("period {period} must open with a kickoff")]
    MissingKickoff { period: usize },
    #[error("duplicate player id {0:?}")]
    DuplicatePlayer(String),
}

fn default_rate() -> f64 {
    25.0
}

fn default_pitch_length() -> f64 {
    105.0
}

fn default_pitch_width() -> f64 {
    68.0
}

fn default_duration() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptPitch {
    #[serde(default = "default_pitch_length")]
    pub length: f64,
    #[serde(default = "default_pitch_width")]
    pub width: f64,
}

impl Default for ScriptPitch {
    fn default() -> Self {
        ScriptPitch {
            length: default_pitch_length(),
            width: default_pitch_width(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptPlayer {
    pub id: String,
    #[serde(default = "default_role")]
    pub role: Role,
    /// Base position in first-period orientation.
    pub base: (f64, f64),
}

fn default_role() -> Role {
    Role::Outfield
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptTeam {
    pub id: String,
    pub attacks_positive_x: bool,
    pub players: Vec<ScriptPlayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetPieceKind {
    Kickoff,
    Penalty,
    Corner,
    GoalKick,
    ThrowIn,
    FreeKick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    /// Dead interval ending with `executor` restarting from `spot`.
    SetPiece {
        kind: SetPieceKind,
        executor: String,
        #[serde(default = "default_duration")]
        duration: f64,
        #[serde(default)]
        spot: Option<(f64, f64)>,
    },
    Pass {
        from: String,
        to: String,
        speed: f64,
    },
    Shot {
        player: String,
        target: (f64, f64),
        speed: f64,
    },
    Dribble {
        player: String,
        path: Vec<(f64, f64)>,
        speed: f64,
        /// Push the ball ahead and catch up (the ball leaves the
        /// possession zone between touches).
        #[serde(default)]
        push: bool,
    },
    /// The current controller kicks the ball out of the pitch.
    OutOfBounds {
        exit: (f64, f64),
        speed: f64,
    },
    Hold {
        player: String,
        duration: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptPeriod {
    pub actions: Vec<Action>,
    /// Dead tail appended after the last action (seconds).
    #[serde(default = "default_duration")]
    pub closing_dead_time: f64,
}

/// Positional noise and corruption injections, all seeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Gaussian noise sigma applied to ball and player coordinates (m).
    pub sigma: f64,
    /// Per-frame probability of dropping the ball sample.
    pub ball_dropout: f64,
    /// Number of injected player-identity swap stretches.
    pub player_swaps: u32,
    /// Length of each swap stretch in frames.
    pub swap_frames: u32,
    /// Number of injected in-play/dead status flickers.
    pub status_flickers: u32,
    /// Length of each flicker in frames.
    pub flicker_frames: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma: 0.0,
            ball_dropout: 0.0,
            player_swaps: 0,
            swap_frames: 12,
            status_flickers: 0,
            flicker_frames: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScript {
    pub match_id: String,
    #[serde(default)]
    pub pitch: ScriptPitch,
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
    pub teams: Vec<ScriptTeam>,
    pub periods: Vec<ScriptPeriod>,
    #[serde(default)]
    pub noise: NoiseConfig,
}

impl MatchScript {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }

    pub fn player_ids(&self) -> Vec<&str> {
        self.teams
            .iter()
            .flat_map(|t| t.players.iter().map(|p| p.id.as_str()))
            .collect()
    }

    /// Structural validation; kinematic checks happen during generation.
    pub fn validate(&self) -> Result<(), ScriptError> {
        if self.teams.len() != 2
            || self.teams[0].attacks_positive_x == self.teams[1].attacks_positive_x
        {
            return Err(ScriptError::BadTeamCount);
        }
        let ids = self.player_ids();
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(ScriptError::DuplicatePlayer(id.to_string()));
            }
        }
        let known = |id: &str| ids.contains(&id);
        let mut action_no = 0usize;
        for (pi, period) in self.periods.iter().enumerate() {
            match period.actions.first() {
                Some(Action::SetPiece {
                    kind: SetPieceKind::Kickoff,
                    ..
                }) => {}
                _ => return Err(ScriptError::MissingKickoff { period: pi + 1 }),
            }
            for a in &period.actions {
                let check = |id: &str| -> Result<(), ScriptError> {
                    if known(id) {
                        Ok(())
                    } else {
                        Err(ScriptError::UnknownPlayer {
                            action: action_no,
                            id: id.to_string(),
                        })
                    }
                };
                match a {
                    Action::SetPiece { executor, duration, .. } => {
                        check(executor)?;
                        if *duration <= 0.2 {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: "set-piece duration too short".to_string(),
                            });
                        }
                    }
                    Action::Pass { from, to, speed } => {
                        check(from)?;
                        check(to)?;
                        if !(2.0..=18.0).contains(speed) {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: format!("pass speed {speed} outside 2..18 m/s"),
                            });
                        }
                    }
                    Action::Shot { player, speed, .. } => {
                        check(player)?;
                        if !(5.0..=18.0).contains(speed) {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: format!("shot speed {speed} outside 5..18 m/s"),
                            });
                        }
                    }
                    Action::Dribble { player, path, speed, .. } => {
                        check(player)?;
                        if path.is_empty() {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: "dribble path empty".to_string(),
                            });
                        }
                        if !(1.0..=10.0).contains(speed) {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: format!("dribble speed {speed} outside 1..10 m/s"),
                            });
                        }
                    }
                    Action::OutOfBounds { exit, speed } => {
                        let half_l = self.pitch.length / 2.0;
                        let half_w = self.pitch.width / 2.0;
                        if exit.0.abs() <= half_l && exit.1.abs() <= half_w {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: "exit point lies inside the pitch".to_string(),
                            });
                        }
                        if !(2.0..=18.0).contains(speed) {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: format!("speed {speed} outside 2..18 m/s"),
                            });
                        }
                    }
                    Action::Hold { player, duration } => {
                        check(player)?;
                        if *duration <= 0.0 {
                            return Err(ScriptError::Invalid {
                                action: action_no,
                                detail: "hold duration must be positive".to_string(),
                            });
                        }
                    }
                }
                action_no += 1;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> MatchScript {
        MatchScript {
            match_id: "t".into(),
            pitch: ScriptPitch::default(),
            sample_rate: 25.0,
            teams: vec![
                ScriptTeam {
                    id: "home".into(),
                    attacks_positive_x: true,
                    players: vec![ScriptPlayer {
                        id: "H1".into(),
                        role: Role::Outfield,
                        base: (-10.0, 0.0),
                    }],
                },
                ScriptTeam {
                    id: "away".into(),
                    attacks_positive_x: false,
                    players: vec![ScriptPlayer {
                        id: "A1".into(),
                        role: Role::Outfield,
                        base: (10.0, 0.0),
                    }],
                },
            ],
            periods: vec![ScriptPeriod {
                actions: vec![Action::SetPiece {
                    kind: SetPieceKind::Kickoff,
                    executor: "H1".into(),
                    duration: 2.0,
                    spot: None,
                }],
                closing_dead_time: 2.0,
            }],
            noise: NoiseConfig::default(),
        }
    }

    #[test]
    fn minimal_script_validates_and_roundtrips() {
        let s = minimal();
        s.validate().unwrap();
        let json = s.to_json();
        let back = MatchScript::from_json(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn period_must_open_with_kickoff() {
        let mut s = minimal();
        s.periods[0].actions[0] = Action::Hold {
            player: "H1".into(),
            duration: 1.0,
        };
        assert_eq!(
            s.validate(),
            Err(ScriptError::MissingKickoff { period: 1 })
        );
    }

    #[test]
    fn unknown_player_is_named_with_action_index() {
        let mut s = minimal();
        s.periods[0].actions.push(Action::Pass {
            from: "H1".into(),
            to: "NOBODY".into(),
            speed: 8.0,
        });
        assert_eq!(
            s.validate(),
            Err(ScriptError::UnknownPlayer {
                action: 1,
                id: "NOBODY".into()
            })
        );
    }

    #[test]
    fn exit_point_inside_pitch_is_rejected() {
        let mut s = minimal();
        s.periods[0].actions.push(Action::OutOfBounds {
            exit: (10.0, 10.0),
            speed: 8.0,
        });
        assert!(matches!(
            s.validate(),
            Err(ScriptError::Invalid { action: 1, .. })
        ));
    }
}
