//! Pitch coordinate system, named zones and point-in-zone predicates.
//!
//! Origin is the pitch center, x runs along the length (endline to endline),
//! y along the width. Each team attacks towards +x or -x depending on the
//! period; "active" landmarks are on the attacked end, "own" landmarks on the
//! defended end. Standard Laws-of-the-Game dimensions are used for the goal
//! mouth, penalty/goal areas and penalty marks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{Point, TeamIdx};

pub const GOAL_MOUTH_WIDTH: f64 = 7.32;
pub const PENALTY_AREA_DEPTH: f64 = 16.5;
pub const PENALTY_AREA_WIDTH: f64 = 40.32;
pub const GOAL_AREA_DEPTH: f64 = 5.5;
pub const GOAL_AREA_WIDTH: f64 = 18.32;
pub const PENALTY_MARK_DIST: f64 = 11.0;
pub const PENALTY_ARC_RADIUS: f64 = 9.15;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("pitch dimensions must be positive (got {length} x {width})")]
    NonPositiveDimensions { length: f64, width: f64 },
    #[error("pitch {length} x {width} too small for standard landmarks")]
    LandmarksDoNotFit { length: f64, width: f64 },
    #[error("attack directions must be opposite for the two teams")]
    SameAttackDirection,
    #[error("attack direction must be +1 or -1 (got {sign})")]
    BadAttackSign { sign: f64 },
    #[error("expected two teams, got {teams}")]
    BadTeamCount { teams: usize },
}

/// Immutable pitch model: dimensions, attack directions and derived landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchModel {
    pub length: f64,
    pub width: f64,
    /// Attack sign along x per team index, in period 1 (flipped in period 2).
    pub first_period_attack: Vec<f64>,
    /// x-depth of the shot zone measured from the active endline.
    pub shot_zone_depth: f64,
    /// |y| split between shot zone (inside) and cross zones (outside).
    pub zone_split_half_width: f64,
    /// How far beyond the sideline the throw-in strip extends.
    pub throwin_outward: f64,
}

/// Builds a pitch model and validates that all landmarks fit.
pub fn build_pitch(
    length: f64,
    width: f64,
    first_period_attack: Vec<f64>,
) -> Result<PitchModel, GeometryError> {
    if !(length > 0.0 && width > 0.0) {
        return Err(GeometryError::NonPositiveDimensions { length, width });
    }
    if length < 2.0 * PENALTY_AREA_DEPTH || width < PENALTY_AREA_WIDTH {
        return Err(GeometryError::LandmarksDoNotFit { length, width });
    }
    if first_period_attack.len() != 2 {
        return Err(GeometryError::BadTeamCount {
            teams: first_period_attack.len(),
        });
    }
    for &s in &first_period_attack {
        if s != 1.0 && s != -1.0 {
            return Err(GeometryError::BadAttackSign { sign: s });
        }
    }
    if first_period_attack[0] == first_period_attack[1] {
        return Err(GeometryError::SameAttackDirection);
    }
    Ok(PitchModel {
        length,
        width,
        first_period_attack,
        shot_zone_depth: 26.0,
        zone_split_half_width: PENALTY_AREA_WIDTH / 2.0,
        throwin_outward: 3.0,
    })
}

impl PitchModel {
    pub fn half_length(&self) -> f64 {
        self.length / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.width / 2.0
    }

    /// Sign of x towards which `team` attacks in `period`.
    pub fn attack_sign(&self, team: TeamIdx, period: u8) -> f64 {
        let first = self.first_period_attack[team.0 as usize];
        if period % 2 == 0 {
            -first
        } else {
            first
        }
    }

    pub fn own_sign(&self, team: TeamIdx, period: u8) -> f64 {
        -self.attack_sign(team, period)
    }

    /// Penalty mark on the end given by `end_sign` (+1 or -1).
    pub fn penalty_mark(&self, end_sign: f64) -> Point {
        Point::new(end_sign * (self.half_length() - PENALTY_MARK_DIST), 0.0)
    }

    pub fn center_mark(&self) -> Point {
        Point::new(0.0, 0.0)
    }

    pub fn corner_marks(&self, end_sign: f64) -> [Point; 2] {
        let x = end_sign * self.half_length();
        [
            Point::new(x, self.half_width()),
            Point::new(x, -self.half_width()),
        ]
    }

    pub fn goal_half_width(&self) -> f64 {
        GOAL_MOUTH_WIDTH / 2.0
    }

    /// Goalpost y-coordinates are +/- this at x = end_sign * length/2.
    pub fn goal_posts(&self, end_sign: f64) -> [Point; 2] {
        let x = end_sign * self.half_length();
        [
            Point::new(x, self.goal_half_width()),
            Point::new(x, -self.goal_half_width()),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x.abs() <= self.half_length() && p.y.abs() <= self.half_width()
    }

    /// Penalty area on the given end, expanded outward by `tol` (may be negative).
    pub fn in_penalty_area(&self, p: Point, end_sign: f64, tol: f64) -> bool {
        let depth_from_line = self.half_length() - end_sign * p.x;
        depth_from_line >= -tol
            && depth_from_line <= PENALTY_AREA_DEPTH + tol
            && p.y.abs() <= PENALTY_AREA_WIDTH / 2.0 + tol
    }

    pub fn in_goal_area(&self, p: Point, end_sign: f64, tol: f64) -> bool {
        let depth_from_line = self.half_length() - end_sign * p.x;
        depth_from_line >= -tol
            && depth_from_line <= GOAL_AREA_DEPTH + tol
            && p.y.abs() <= GOAL_AREA_WIDTH / 2.0 + tol
    }

    /// True when `p` is in either penalty area (used by the kickoff audit).
    pub fn in_either_penalty_area(&self, p: Point) -> bool {
        self.in_penalty_area(p, 1.0, 0.0) || self.in_penalty_area(p, -1.0, 0.0)
    }
}

/// Shooter location classes for shot/cross separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShooterZone {
    ShotZone,
    CrossZone,
    Other,
}

/// Classifies a point relative to the attacking end's shot and cross zones.
///
/// The shot zone spans from the active endline `shot_zone_depth` meters
/// infield between the extended penalty-area sidelines; the cross zones are
/// the two flank rectangles over the same x-range. They are disjoint: the
/// split boundary belongs to the shot zone.
pub fn shooter_zone(p: Point, pitch: &PitchModel, attack_sign: f64) -> ShooterZone {
    let depth_from_line = pitch.half_length() - attack_sign * p.x;
    if !(0.0..=pitch.shot_zone_depth).contains(&depth_from_line) {
        return ShooterZone::Other;
    }
    if p.y.abs() <= pitch.zone_split_half_width {
        ShooterZone::ShotZone
    } else if p.y.abs() <= pitch.half_width() {
        ShooterZone::CrossZone
    } else {
        ShooterZone::Other
    }
}

/// True when the ray from `origin` along `dir` crosses the goal segment on
/// `end_sign`'s endline, widened by `widen` meters beyond each post.
pub fn ray_crosses_goal(
    origin: Point,
    dir: Point,
    pitch: &PitchModel,
    end_sign: f64,
    widen: f64,
) -> bool {
    let goal_x = end_sign * pitch.half_length();
    let dx = dir.x;
    if dx.abs() < 1e-12 {
        return false;
    }
    let t = (goal_x - origin.x) / dx;
    if t <= 0.0 {
        return false;
    }
    let y = origin.y + t * dir.y;
    y.abs() <= pitch.goal_half_width() + widen
}

/// True when the segment a->b crosses the goal segment on `end_sign`'s endline.
pub fn segment_crosses_goal(
    a: Point,
    b: Point,
    pitch: &PitchModel,
    end_sign: f64,
    widen: f64,
) -> bool {
    let goal_x = end_sign * pitch.half_length();
    let da = a.x - goal_x;
    let db = b.x - goal_x;
    if da == 0.0 && db == 0.0 {
        return false;
    }
    if (da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0) {
        return false;
    }
    let t = da / (da - db);
    let y = a.y + t * (b.y - a.y);
    y.abs() <= pitch.goal_half_width() + widen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoneKind {
    OwnHalf,
    CenterMarkDisk,
    GoalLineBox,
    PenaltyMarkBox,
    PenaltyExclusion,
    GoalAreaBox,
    CornerDisk,
    ThrowinStrip,
    CrossZone,
    ShotZone,
    PenaltyArea,
    GoalArea,
}

/// Whether a team-relative zone sits on the team's attacked or defended end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneSide {
    Active,
    Own,
}

/// A named pitch region with a tolerance band.
///
/// Tolerances expand the base region outward; a negative tolerance shrinks
/// it (used for exclusion checks). Membership is monotone in the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub kind: ZoneKind,
    pub side: ZoneSide,
    pub tolerance: f64,
}

impl Zone {
    pub fn new(kind: ZoneKind, side: ZoneSide, tolerance: f64) -> Self {
        Zone {
            kind,
            side,
            tolerance,
        }
    }
}

/// Decides whether `point` lies in `zone` (including its tolerance band) for
/// the given team and period. Out-of-pitch points are legal inputs.
pub fn zone_membership(
    point: Point,
    zone: &Zone,
    pitch: &PitchModel,
    team: TeamIdx,
    period: u8,
) -> bool {
    let attack = pitch.attack_sign(team, period);
    let end = match zone.side {
        ZoneSide::Active => attack,
        ZoneSide::Own => -attack,
    };
    let tol = zone.tolerance;
    match zone.kind {
        // Own half is the x-halfplane behind the halfway line for the team.
        ZoneKind::OwnHalf => attack * point.x <= tol,
        ZoneKind::CenterMarkDisk => point.dist(pitch.center_mark()) <= tol,
        ZoneKind::GoalLineBox => {
            let goal_x = end * pitch.half_length();
            (point.x - goal_x).abs() <= tol && point.y.abs() <= pitch.goal_half_width() + tol
        }
        ZoneKind::PenaltyMarkBox => {
            // Box from tol/4 in front of the mark (towards the goal) to
            // 3*tol/4 behind it, +/- tol/2 sideways.
            let mark = pitch.penalty_mark(end);
            let along = end * (point.x - mark.x); // positive towards the goal
            along <= tol / 4.0 && along >= -(3.0 * tol / 4.0) && (point.y - mark.y).abs() <= tol / 2.0
        }
        ZoneKind::PenaltyExclusion => {
            pitch.in_penalty_area(point, end, tol)
                || point.dist(pitch.penalty_mark(end)) <= PENALTY_ARC_RADIUS + tol
        }
        ZoneKind::GoalAreaBox | ZoneKind::GoalArea => pitch.in_goal_area(point, end, tol),
        ZoneKind::CornerDisk => pitch
            .corner_marks(end)
            .iter()
            .any(|m| point.dist(*m) <= tol),
        ZoneKind::ThrowinStrip => {
            let hw = pitch.half_width();
            point.y.abs() >= hw - tol && point.y.abs() <= hw + pitch.throwin_outward
        }
        ZoneKind::CrossZone => {
            // Disjoint from the shot zone at zero tolerance: the split
            // boundary itself belongs to the shot zone.
            let depth = pitch.half_length() - end * point.x;
            (-tol..=pitch.shot_zone_depth + tol).contains(&depth)
                && point.y.abs() > pitch.zone_split_half_width
                && point.y.abs() <= pitch.half_width() + tol
        }
        ZoneKind::ShotZone => {
            let depth = pitch.half_length() - end * point.x;
            (-tol..=pitch.shot_zone_depth + tol).contains(&depth)
                && point.y.abs() <= pitch.zone_split_half_width + tol
        }
        ZoneKind::PenaltyArea => pitch.in_penalty_area(point, end, tol),
    }
}
