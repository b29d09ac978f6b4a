//! Run configuration: pitch, possession, smoothing, trigger tolerances,
//! event classification and benchmark matching parameters.
//!
//! Every field has a documented default; provider profiles bundle the
//! per-provider possession-zone radii and can be overridden field by field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("smoothing window must be odd (got {window})")]
    WindowNotOdd { window: usize },
    #[error("smoothing window {window} must exceed polynomial order {order}")]
    WindowTooSmall { window: usize, order: usize },
    #[error("possession radii must be positive")]
    NonPositiveRadius,
    #[error("duel radius {r_dz} must be >= possession radius {r_pz}")]
    DuelRadiusTooSmall { r_pz: f64, r_dz: f64 },
    #[error("direction threshold must be within [-1, 1] (got {eps_theta})")]
    BadDirectionThreshold { eps_theta: f64 },
    #[error("displacement and speed thresholds must be positive")]
    NonPositiveThreshold,
    #[error("unknown provider profile {0:?} (known: A, B, C)")]
    UnknownProfile(String),
    #[error("teams config must list two teams with opposite attack directions")]
    BadTeamsConfig,
}

/// Pitch dimensions and team attack directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitchConfig {
    pub length: f64,
    pub width: f64,
    /// Team ids with their period-1 attack direction. When empty, directions
    /// are inferred from goalkeeper positions at detection time.
    pub teams: Vec<TeamDirection>,
    pub shot_zone_depth: f64,
    pub zone_split_half_width: f64,
    pub throwin_outward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamDirection {
    pub id: String,
    pub attacks_positive_x: bool,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            length: 105.0,
            width: 68.0,
            teams: Vec::new(),
            shot_zone_depth: 26.0,
            zone_split_half_width: crate::geometry::PENALTY_AREA_WIDTH / 2.0,
            throwin_outward: 3.0,
        }
    }
}

/// Possession/duel zone radii and the gain/loss thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PossessionConfig {
    /// Possession zone radius around each player (m).
    pub r_pz: f64,
    /// Duel zone radius around the ball (m), >= r_pz.
    pub r_dz: f64,
    /// Minimum per-frame ball displacement for a loss (m).
    pub eps_s: f64,
    /// Direction-change threshold: cosine below this counts as changed.
    pub eps_theta: f64,
    /// Minimum incoming/outgoing speed difference for a touch (m/s).
    pub eps_v: f64,
}

impl Default for PossessionConfig {
    fn default() -> Self {
        PossessionConfig {
            r_pz: 1.0,
            r_dz: 1.0,
            eps_s: 0.05,
            eps_theta: 0.98,
            eps_v: 1.0,
        }
    }
}

impl PossessionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.r_pz > 0.0 && self.r_dz > 0.0) {
            return Err(ConfigError::NonPositiveRadius);
        }
        if self.r_dz < self.r_pz {
            return Err(ConfigError::DuelRadiusTooSmall {
                r_pz: self.r_pz,
                r_dz: self.r_dz,
            });
        }
        if self.eps_theta.abs() > 1.0 {
            return Err(ConfigError::BadDirectionThreshold {
                eps_theta: self.eps_theta,
            });
        }
        if !(self.eps_s > 0.0 && self.eps_v > 0.0) {
            return Err(ConfigError::NonPositiveThreshold);
        }
        Ok(())
    }
}

/// Savitzky-Golay smoothing parameters for ball coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub enabled: bool,
    pub polynomial_order: usize,
    /// Odd window length in frames.
    pub window: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            enabled: true,
            polynomial_order: 2,
            window: 7,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window % 2 == 0 {
            return Err(ConfigError::WindowNotOdd {
                window: self.window,
            });
        }
        if self.window <= self.polynomial_order {
            return Err(ConfigError::WindowTooSmall {
                window: self.window,
                order: self.polynomial_order,
            });
        }
        Ok(())
    }
}

/// Spatial tolerances for the set-piece triggers (Law-of-the-Game geometry
/// with slack for tracking inaccuracy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriggerConfig {
    /// Own-half slack for the kickoff trigger (m).
    pub eps_k1: f64,
    /// Center-mark disk radius for the kickoff trigger/pattern (m).
    pub eps_k2: f64,
    /// Goal-line box tolerance for the penalty trigger (m).
    pub eps_p1: f64,
    /// Penalty-mark box size for the penalty trigger/pattern (m).
    pub eps_p2: f64,
    /// Shrink applied to the penalty exclusion region (m).
    pub eps_p3: f64,
    /// Goal-area tolerance for the goal-kick trigger/pattern (m).
    pub eps_g: f64,
    /// Corner-mark disk radius for the corner trigger/pattern (m).
    pub eps_c: f64,
    /// Inward tolerance of the throw-in strip (m).
    pub eps_t: f64,
    /// Frames a trigger must hold through the last dead frame to be complete.
    pub min_complete_frames: usize,
    /// How long an uncontrolled restart may stay uncontrolled before the
    /// interval is flagged as a tracking inconsistency (s).
    pub uncontrolled_restart_secs: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            eps_k1: 1.0,
            eps_k2: 2.0,
            eps_p1: 1.0,
            eps_p2: 2.0,
            eps_p3: 0.5,
            eps_g: 1.0,
            eps_c: 2.0,
            eps_t: 1.0,
            min_complete_frames: 10,
            uncontrolled_restart_secs: 0.5,
        }
    }
}

/// Event-classification geometry and timing knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventConfig {
    /// Widening beyond each post for the shot on/off target ray test (m).
    pub on_target_widen: f64,
    /// Widening beyond each post for the "ball moving towards the active
    /// goal" test (m).
    pub goalward_widen: f64,
    /// Goalkeeper retention threshold separating deflect from retain (s).
    pub retention_secs: f64,
    /// Window after a goalkeeper touch within which a conceded goal makes
    /// the touch an unsuccessful save (s).
    pub unsuccessful_save_secs: f64,
}

impl Default for EventConfig {
    fn default() -> Self {
        EventConfig {
            on_target_widen: 0.25,
            goalward_widen: 2.0,
            retention_secs: 1.0,
            unsuccessful_save_secs: 2.0,
        }
    }
}

/// Benchmark matching parameters and the annotation vocabulary map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchingConfig {
    /// Half-width of the time window for pairing events (s).
    pub window_secs: f64,
    /// Require matching player ids.
    pub player_strict: bool,
    /// Error on annotation categories missing from the vocabulary map.
    pub strict_vocabulary: bool,
    /// Fold annotated blocked shots into passes before matching.
    pub fold_blocked_shots: bool,
    /// Provider category -> artifact vocabulary (many-to-one allowed).
    /// Artifact categories map to themselves implicitly.
    pub vocabulary: BTreeMap<String, String>,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        MatchingConfig {
            window_secs: 5.0,
            player_strict: false,
            strict_vocabulary: true,
            fold_blocked_shots: false,
            vocabulary: BTreeMap::new(),
        }
    }
}

/// Full run configuration for the detection pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub pitch: PitchConfig,
    pub possession: PossessionConfig,
    pub smoothing: SmoothingConfig,
    pub triggers: TriggerConfig,
    pub events: EventConfig,
    pub benchmark: MatchingConfig,
    /// Dead/in-play runs shorter than this many frames are merged away.
    pub status_debounce_frames: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.possession.validate()?;
        self.smoothing.validate()?;
        if !self.pitch.teams.is_empty() {
            if self.pitch.teams.len() != 2
                || self.pitch.teams[0].attacks_positive_x == self.pitch.teams[1].attacks_positive_x
            {
                return Err(ConfigError::BadTeamsConfig);
            }
        }
        Ok(())
    }

    /// Applies a provider profile (possession-zone radii from the providers
    /// the detector was evaluated with: A uses 0.5 m, B and C use 1 m).
    pub fn apply_profile(&mut self, name: &str) -> Result<(), ConfigError> {
        match name {
            "A" | "a" => {
                self.possession.r_pz = 0.5;
                self.possession.r_dz = 1.0;
            }
            "B" | "b" | "C" | "c" => {
                self.possession.r_pz = 1.0;
                self.possession.r_dz = 1.0;
            }
            other => return Err(ConfigError::UnknownProfile(other.to_string())),
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pitch: PitchConfig::default(),
            possession: PossessionConfig::default(),
            smoothing: SmoothingConfig::default(),
            triggers: TriggerConfig::default(),
            events: EventConfig::default(),
            benchmark: MatchingConfig::default(),
            status_debounce_frames: 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn profile_a_shrinks_possession_zone() {
        let mut cfg = RunConfig::default();
        cfg.apply_profile("A").unwrap();
        assert_eq!(cfg.possession.r_pz, 0.5);
        assert_eq!(cfg.possession.r_dz, 1.0);
        assert!(cfg.apply_profile("D").is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.smoothing.window = 6;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::WindowNotOdd { window: 6 })
        ));

        let mut cfg = RunConfig::default();
        cfg.possession.r_dz = 0.4;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::DuelRadiusTooSmall { .. })
        ));
    }
}
