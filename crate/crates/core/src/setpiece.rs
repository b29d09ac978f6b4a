//! Dead-ball interval segmentation, set-piece triggers and resolution.
//!
//! Each dead interval is examined for the five spatial trigger
//! configurations (kickoff, penalty, corner, goal kick, throw-in). A trigger
//! is complete when its configuration holds through the last dead frame for
//! long enough; ties between complete triggers break by the hierarchy
//! kickoff > penalty > corner > goal kick > throw-in (most- to
//! least-constrained configuration). The chosen trigger is confirmed by its
//! pattern: a triggering player controlling the ball inside the pattern zone
//! on the first in-play frame. Unconfirmed intervals fall back to a free
//! kick, or to the low-confidence foul?/free kick? pair when the data looks
//! inconsistent.

use serde::{Deserialize, Serialize};

use crate::config::{PossessionConfig, TriggerConfig};
use crate::frames::{BallStatus, FrameSeries, PlayerIdx, Point, TeamIdx};
use crate::geometry::{ray_crosses_goal, segment_crosses_goal, PitchModel, Zone, ZoneKind, ZoneSide};
use crate::possession::{BallKinematics, ControlLabel};

/// Detection confidence carried on resolutions and event rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Normal,
    Low,
}

/// The event that ended play before a dead interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeadBallEvent {
    OutForCornerKick,
    OutForGoalKick,
    OutForThrowIn,
    Foul,
    PenaltyAwarded,
    Goal,
    /// Period ended right after a goal-bound shot; no kickoff confirms it.
    GoalUncertain,
    RefereeInterruption,
    /// Tracking inconsistency prevented certain classification.
    FoulUncertain,
}

impl DeadBallEvent {
    pub fn label(&self) -> &'static str {
        match self {
            DeadBallEvent::OutForCornerKick => "out for corner kick",
            DeadBallEvent::OutForGoalKick => "out for goal kick",
            DeadBallEvent::OutForThrowIn => "out for throw-in",
            DeadBallEvent::Foul => "foul",
            DeadBallEvent::PenaltyAwarded => "penalty awarded",
            DeadBallEvent::Goal => "goal",
            DeadBallEvent::GoalUncertain => "goal?",
            DeadBallEvent::RefereeInterruption => "referee interruption",
            DeadBallEvent::FoulUncertain => "foul?",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "out for corner kick" => DeadBallEvent::OutForCornerKick,
            "out for goal kick" => DeadBallEvent::OutForGoalKick,
            "out for throw-in" => DeadBallEvent::OutForThrowIn,
            "foul" => DeadBallEvent::Foul,
            "penalty awarded" => DeadBallEvent::PenaltyAwarded,
            "goal" => DeadBallEvent::Goal,
            "goal?" => DeadBallEvent::GoalUncertain,
            "referee interruption" => DeadBallEvent::RefereeInterruption,
            "foul?" => DeadBallEvent::FoulUncertain,
            _ => return None,
        })
    }
}

/// The event that resumed play after a dead interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetPiece {
    CornerKick,
    GoalKick,
    ThrowIn,
    FreeKick,
    FreeKickUncertain,
    PenaltyKick,
    Kickoff,
    /// A kickoff the referee ordered retaken.
    IncorrectKickoff,
}

impl SetPiece {
    pub fn label(&self) -> &'static str {
        match self {
            SetPiece::CornerKick => "corner kick",
            SetPiece::GoalKick => "goal kick",
            SetPiece::ThrowIn => "throw-in",
            SetPiece::FreeKick => "free kick",
            SetPiece::FreeKickUncertain => "free kick?",
            SetPiece::PenaltyKick => "penalty kick",
            SetPiece::Kickoff => "kickoff",
            SetPiece::IncorrectKickoff => "incorrect kickoff",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "corner kick" => SetPiece::CornerKick,
            "goal kick" => SetPiece::GoalKick,
            "throw-in" => SetPiece::ThrowIn,
            "free kick" => SetPiece::FreeKick,
            "free kick?" => SetPiece::FreeKickUncertain,
            "penalty kick" => SetPiece::PenaltyKick,
            "kickoff" => SetPiece::Kickoff,
            "incorrect kickoff" => SetPiece::IncorrectKickoff,
            _ => return None,
        })
    }

    /// The dead-ball event paired with this set piece (one-to-one map).
    pub fn paired_dbe(&self) -> Option<DeadBallEvent> {
        match self {
            SetPiece::CornerKick => Some(DeadBallEvent::OutForCornerKick),
            SetPiece::GoalKick => Some(DeadBallEvent::OutForGoalKick),
            SetPiece::ThrowIn => Some(DeadBallEvent::OutForThrowIn),
            SetPiece::FreeKick => Some(DeadBallEvent::Foul),
            SetPiece::FreeKickUncertain => Some(DeadBallEvent::FoulUncertain),
            SetPiece::PenaltyKick => Some(DeadBallEvent::PenaltyAwarded),
            SetPiece::Kickoff => Some(DeadBallEvent::Goal),
            SetPiece::IncorrectKickoff => Some(DeadBallEvent::Goal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalBoundary {
    Interior,
    PeriodStart,
    PeriodEnd,
}

/// A maximal run of dead frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadInterval {
    /// First dead frame (position into the series).
    pub start: usize,
    /// Last dead frame.
    pub end: usize,
    /// First in-play frame after the interval within the same period.
    pub first_inplay_after: Option<usize>,
    pub period: u8,
    pub boundary: IntervalBoundary,
}

/// Returns the maximal dead runs in order, split at period boundaries and
/// flagged when they open or close a period.
pub fn segment_dead_intervals(
    series: &FrameSeries,
    timeline: &[ControlLabel],
) -> Vec<DeadInterval> {
    let mut out = Vec::new();
    let n = series.len();
    let mut i = 0;
    while i < n {
        if timeline[i] != ControlLabel::DeadBall {
            i += 1;
            continue;
        }
        let period = series.frames[i].period;
        let mut j = i;
        while j + 1 < n
            && timeline[j + 1] == ControlLabel::DeadBall
            && series.frames[j + 1].period == period
        {
            j += 1;
        }
        let period_first = i == 0 || series.frames[i - 1].period != period;
        let next_in_period = j + 1 < n && series.frames[j + 1].period == period;
        let boundary = if !next_in_period {
            IntervalBoundary::PeriodEnd
        } else if period_first {
            IntervalBoundary::PeriodStart
        } else {
            IntervalBoundary::Interior
        };
        out.push(DeadInterval {
            start: i,
            end: j,
            first_inplay_after: next_in_period.then_some(j + 1),
            period,
            boundary,
        });
        i = j + 1;
    }
    out
}

/// The five spatial triggers in hierarchy order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerKind {
    Kickoff,
    Penalty,
    Corner,
    GoalKick,
    ThrowIn,
}

pub const TRIGGER_HIERARCHY: [TriggerKind; 5] = [
    TriggerKind::Kickoff,
    TriggerKind::Penalty,
    TriggerKind::Corner,
    TriggerKind::GoalKick,
    TriggerKind::ThrowIn,
];

impl TriggerKind {
    pub fn set_piece(&self) -> SetPiece {
        match self {
            TriggerKind::Kickoff => SetPiece::Kickoff,
            TriggerKind::Penalty => SetPiece::PenaltyKick,
            TriggerKind::Corner => SetPiece::CornerKick,
            TriggerKind::GoalKick => SetPiece::GoalKick,
            TriggerKind::ThrowIn => SetPiece::ThrowIn,
        }
    }
}

/// Evaluation of one trigger over a dead interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerActivation {
    pub kind: TriggerKind,
    /// Held from `hold_start` through the last dead frame, long enough.
    pub complete: bool,
    /// Earliest frame of the suffix over which the configuration holds.
    pub hold_start: Option<usize>,
    /// Triggering players per team index.
    pub candidates: [Vec<PlayerIdx>; 2],
    /// An untracked/interpolated sample participated in the evaluation.
    pub untracked_present: bool,
}

/// Per-frame condition check for one trigger kind and (where applicable)
/// the team executing it. The kickoff condition is global over both teams.
fn trigger_holds(
    series: &FrameSeries,
    pitch: &PitchModel,
    cfg: &TriggerConfig,
    kind: TriggerKind,
    team: TeamIdx,
    pos: usize,
) -> bool {
    let frame = &series.frames[pos];
    let period = frame.period;
    match kind {
        TriggerKind::Kickoff => {
            let own_half = Zone::new(ZoneKind::OwnHalf, ZoneSide::Own, cfg.eps_k1);
            let mut near_center = false;
            for s in &frame.players {
                let t = series.roster.team_of(s.player);
                if !crate::geometry::zone_membership(s.pos, &own_half, pitch, t, period) {
                    return false;
                }
                if s.pos.dist(pitch.center_mark()) <= cfg.eps_k2 {
                    near_center = true;
                }
            }
            near_center && !frame.players.is_empty()
        }
        TriggerKind::Penalty => {
            let line_box = Zone::new(ZoneKind::GoalLineBox, ZoneSide::Active, cfg.eps_p1);
            let mark_box = Zone::new(ZoneKind::PenaltyMarkBox, ZoneSide::Active, cfg.eps_p2);
            let exclusion = Zone::new(ZoneKind::PenaltyExclusion, ZoneSide::Active, -cfg.eps_p3);
            let mut on_line: Vec<PlayerIdx> = Vec::new();
            let mut at_mark: Vec<PlayerIdx> = Vec::new();
            for s in &frame.players {
                if crate::geometry::zone_membership(s.pos, &line_box, pitch, team, period) {
                    on_line.push(s.player);
                }
                if series.roster.team_of(s.player) == team
                    && crate::geometry::zone_membership(s.pos, &mark_box, pitch, team, period)
                {
                    at_mark.push(s.player);
                }
            }
            if on_line.len() != 1 || at_mark.len() != 1 {
                return false;
            }
            if series.roster.team_of(on_line[0]) == team {
                return false; // the goal-line player must be an opponent
            }
            let taker = at_mark[0];
            let keeper = on_line[0];
            frame
                .players
                .iter()
                .filter(|s| s.player != taker && s.player != keeper)
                .all(|s| {
                    !crate::geometry::zone_membership(s.pos, &exclusion, pitch, team, period)
                })
        }
        TriggerKind::Corner => {
            let disk = Zone::new(ZoneKind::CornerDisk, ZoneSide::Active, cfg.eps_c);
            frame.players.iter().any(|s| {
                series.roster.team_of(s.player) == team
                    && crate::geometry::zone_membership(s.pos, &disk, pitch, team, period)
            })
        }
        TriggerKind::GoalKick => {
            let area = Zone::new(ZoneKind::GoalAreaBox, ZoneSide::Own, cfg.eps_g);
            frame.players.iter().any(|s| {
                series.roster.team_of(s.player) == team
                    && crate::geometry::zone_membership(s.pos, &area, pitch, team, period)
            })
        }
        TriggerKind::ThrowIn => {
            let strip = Zone::new(ZoneKind::ThrowinStrip, ZoneSide::Active, cfg.eps_t);
            frame.players.iter().any(|s| {
                series.roster.team_of(s.player) == team
                    && crate::geometry::zone_membership(s.pos, &strip, pitch, team, period)
            })
        }
    }
}

/// The pattern zone for a trigger kind. Trigger and pattern zones coincide
/// for corners, throw-ins and goal kicks; the kickoff pattern is the
/// center-mark disk and the penalty pattern the penalty-mark box.
fn pattern_zone(kind: TriggerKind, cfg: &TriggerConfig) -> Zone {
    match kind {
        TriggerKind::Kickoff => Zone::new(ZoneKind::CenterMarkDisk, ZoneSide::Active, cfg.eps_k2),
        TriggerKind::Penalty => Zone::new(ZoneKind::PenaltyMarkBox, ZoneSide::Active, cfg.eps_p2),
        TriggerKind::Corner => Zone::new(ZoneKind::CornerDisk, ZoneSide::Active, cfg.eps_c),
        TriggerKind::GoalKick => Zone::new(ZoneKind::GoalAreaBox, ZoneSide::Own, cfg.eps_g),
        TriggerKind::ThrowIn => Zone::new(ZoneKind::ThrowinStrip, ZoneSide::Active, cfg.eps_t),
    }
}

/// Triggering players of `team` inside the kind's pattern zone at a frame.
fn trigger_candidates(
    series: &FrameSeries,
    pitch: &PitchModel,
    cfg: &TriggerConfig,
    kind: TriggerKind,
    team: TeamIdx,
    pos: usize,
) -> Vec<PlayerIdx> {
    let frame = &series.frames[pos];
    let period = frame.period;
    let zone = pattern_zone(kind, cfg);
    frame
        .players
        .iter()
        .filter(|s| series.roster.team_of(s.player) == team)
        .filter(|s| crate::geometry::zone_membership(s.pos, &zone, pitch, team, period))
        .map(|s| s.player)
        .collect()
}

/// Evaluates all five triggers over a dead interval.
///
/// Each trigger is scanned backward from the last dead frame until its
/// configuration first breaks; it is complete when the holding suffix is at
/// least `min_complete_frames` long (or spans the whole interval).
pub fn evaluate_triggers(
    series: &FrameSeries,
    interval: &DeadInterval,
    pitch: &PitchModel,
    cfg: &TriggerConfig,
) -> Vec<TriggerActivation> {
    let dc = interval.end;
    let teams: Vec<TeamIdx> = (0..series.roster.team_count() as u8).map(TeamIdx).collect();
    let untracked = series.frames[interval.start..=interval.end]
        .iter()
        .any(|f| f.players.iter().any(|s| !s.tracked));
    TRIGGER_HIERARCHY
        .iter()
        .map(|&kind| {
            let mut candidates: [Vec<PlayerIdx>; 2] = [Vec::new(), Vec::new()];
            let mut best_hold: Option<usize> = None;
            let mut complete = false;
            for &team in &teams {
                if !trigger_holds(series, pitch, cfg, kind, team, dc) {
                    if kind == TriggerKind::Kickoff {
                        break;
                    }
                    continue;
                }
                let mut d1 = dc;
                while d1 > interval.start && trigger_holds(series, pitch, cfg, kind, team, d1 - 1)
                {
                    d1 -= 1;
                }
                let held = dc - d1 + 1;
                let team_complete =
                    held >= cfg.min_complete_frames || held == (dc - interval.start + 1);
                if team_complete {
                    complete = true;
                    best_hold = Some(best_hold.map_or(d1, |b: usize| b.min(d1)));
                    if kind == TriggerKind::Kickoff {
                        for &t in &teams {
                            candidates[t.0 as usize] =
                                trigger_candidates(series, pitch, cfg, kind, t, dc);
                        }
                    } else {
                        candidates[team.0 as usize] =
                            trigger_candidates(series, pitch, cfg, kind, team, dc);
                    }
                }
                if kind == TriggerKind::Kickoff {
                    break;
                }
            }
            TriggerActivation {
                kind,
                complete,
                hold_start: best_hold,
                candidates,
                untracked_present: untracked,
            }
        })
        .collect()
}

/// Which goal (if any) the ball crossed heading into a dead interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalCrossing {
    /// Sign of the endline crossed.
    pub end_sign: f64,
}

/// Looks for a 2D goal-segment crossing in the ball path shortly before a
/// dead interval, falling back to the outgoing ray where ball data stops at
/// the line.
pub fn goal_crossing_into_interval(
    series: &FrameSeries,
    kin: &BallKinematics,
    interval: &DeadInterval,
    pitch: &PitchModel,
    widen: f64,
) -> Option<GoalCrossing> {
    if series.is_empty() {
        return None;
    }
    let window = (2.0 * series.sample_rate) as usize;
    let lo = interval.start.saturating_sub(window);
    let hi = (interval.start + 3).min(series.len() - 1);
    let mut last_moving: Option<(Point, Point)> = None; // (origin, dir)
    for i in lo..hi {
        let (Some(a), Some(b)) = (series.frames[i].ball, series.frames[i + 1].ball) else {
            continue;
        };
        if series.frames[i].period != interval.period {
            continue;
        }
        for sign in [1.0, -1.0] {
            if segment_crosses_goal(a, b, pitch, sign, widen) {
                return Some(GoalCrossing { end_sign: sign });
            }
        }
        if let Some(dir) = kin.at(i).out_dir {
            last_moving = Some((a, dir));
        }
    }
    if let Some((origin, dir)) = last_moving {
        for sign in [1.0, -1.0] {
            if ray_crosses_goal(origin, dir, pitch, sign, widen) {
                return Some(GoalCrossing { end_sign: sign });
            }
        }
    }
    None
}

/// Resolution of one dead interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPieceResolution {
    /// Index of the interval this resolves.
    pub interval: usize,
    pub period: u8,
    pub dead_ball_event: Option<DeadBallEvent>,
    pub set_piece: Option<SetPiece>,
    pub executor: Option<PlayerIdx>,
    pub executor_team: Option<TeamIdx>,
    pub confidence: Confidence,
    /// Frame where the restart was confirmed controlled.
    pub restart_pos: Option<usize>,
    /// Goal crossing detected heading into the interval, if any.
    pub goal_crossing: Option<GoalCrossing>,
}

/// Players controlling the ball at `pos` (within the possession radius),
/// closest first.
fn controllers_at(series: &FrameSeries, pos: usize, r_pz: f64) -> Vec<(PlayerIdx, f64)> {
    let frame = &series.frames[pos];
    let Some(ball) = frame.ball else {
        return Vec::new();
    };
    let mut v: Vec<(PlayerIdx, f64)> = frame
        .players
        .iter()
        .map(|s| (s.player, s.pos.dist(ball)))
        .filter(|(_, d)| *d <= r_pz)
        .collect();
    v.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    v
}

/// First frame at or shortly after the restart where any player controls
/// the ball, limited to `uncontrolled_restart_secs`.
fn first_controlled_restart(
    series: &FrameSeries,
    interval: &DeadInterval,
    poss: &PossessionConfig,
    trig: &TriggerConfig,
) -> Option<usize> {
    let i1 = interval.first_inplay_after?;
    let horizon = i1 + (trig.uncontrolled_restart_secs * series.sample_rate).round() as usize;
    let period = interval.period;
    let mut i = i1;
    while i < series.len() && i <= horizon && series.frames[i].period == period {
        if series.frames[i].ball_status == BallStatus::InPlay
            && !controllers_at(series, i, poss.r_pz).is_empty()
        {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Resolves a dead interval to its (DBE, SPE, executor) triple.
#[allow(clippy::too_many_arguments)]
pub fn resolve_set_piece(
    series: &FrameSeries,
    interval: &DeadInterval,
    interval_idx: usize,
    activations: &[TriggerActivation],
    pitch: &PitchModel,
    poss: &PossessionConfig,
    trig: &TriggerConfig,
    goal_crossing: Option<GoalCrossing>,
) -> SetPieceResolution {
    let base = SetPieceResolution {
        interval: interval_idx,
        period: interval.period,
        dead_ball_event: None,
        set_piece: None,
        executor: None,
        executor_team: None,
        confidence: Confidence::Normal,
        restart_pos: None,
        goal_crossing,
    };

    if interval.boundary == IntervalBoundary::PeriodEnd {
        // no restart follows; the kickoff audit may still append goal?
        return base;
    }

    let restart = first_controlled_restart(series, interval, poss, trig);

    // pattern check: a trigger candidate inside the pattern zone controlling
    // the ball at the restart frame; the closest controller wins
    let confirm = |kind: TriggerKind,
                   act: &TriggerActivation,
                   at: usize|
     -> Option<(PlayerIdx, TeamIdx)> {
        let period = series.frames[at].period;
        let zone = pattern_zone(kind, trig);
        for (p, _) in controllers_at(series, at, poss.r_pz) {
            let team = series.roster.team_of(p);
            if !act.candidates[team.0 as usize].contains(&p) {
                continue;
            }
            let Some(pp) = series.frames[at].position_of(p) else {
                continue;
            };
            if crate::geometry::zone_membership(pp, &zone, pitch, team, period) {
                return Some((p, team));
            }
        }
        None
    };

    if interval.boundary == IntervalBoundary::PeriodStart {
        // period start resumes with a kickoff; period start is not an
        // event, so no DBE
        let kickoff = &activations[0];
        let mut executor = None;
        let mut team = None;
        let mut confidence = Confidence::Normal;
        match restart {
            Some(at) => {
                if let Some((p, t)) = confirm(TriggerKind::Kickoff, kickoff, at) {
                    executor = Some(p);
                    team = Some(t);
                } else if let Some((p, _)) = controllers_at(series, at, poss.r_pz).first() {
                    executor = Some(*p);
                    team = Some(series.roster.team_of(*p));
                    confidence = Confidence::Low;
                }
            }
            None => confidence = Confidence::Low,
        }
        return SetPieceResolution {
            set_piece: Some(SetPiece::Kickoff),
            executor,
            executor_team: team,
            confidence,
            restart_pos: restart,
            ..base
        };
    }

    let Some(at) = restart else {
        // nobody controls the restart: tracking inconsistency signature
        return SetPieceResolution {
            dead_ball_event: Some(DeadBallEvent::FoulUncertain),
            set_piece: Some(SetPiece::FreeKickUncertain),
            confidence: Confidence::Low,
            restart_pos: interval.first_inplay_after,
            ..base
        };
    };

    // complete triggers in hierarchy order, first confirmed pattern wins
    for act in activations {
        if !act.complete {
            continue;
        }
        if let Some((p, t)) = confirm(act.kind, act, at) {
            let spe = act.kind.set_piece();
            let mut confidence = if act.untracked_present {
                Confidence::Low
            } else {
                Confidence::Normal
            };
            if act.kind == TriggerKind::Kickoff && goal_crossing.is_none() {
                // a mid-period kickoff implies a goal; without a crossing in
                // the data the claim is weak (the audit may relabel it)
                confidence = Confidence::Low;
            }
            return SetPieceResolution {
                dead_ball_event: spe.paired_dbe(),
                set_piece: Some(spe),
                executor: Some(p),
                executor_team: Some(t),
                confidence,
                restart_pos: Some(at),
                ..base
            };
        }
    }

    // a pattern that confirms without its trigger ever completing points at
    // corrupted interval data: emit the uncertain pair
    for act in activations {
        if act.complete {
            continue;
        }
        let period = series.frames[at].period;
        let zone = pattern_zone(act.kind, trig);
        let hit = controllers_at(series, at, poss.r_pz).into_iter().find(|(p, _)| {
            let team = series.roster.team_of(*p);
            series.frames[at]
                .position_of(*p)
                .map(|pp| crate::geometry::zone_membership(pp, &zone, pitch, team, period))
                .unwrap_or(false)
        });
        if let Some((p, _)) = hit {
            return SetPieceResolution {
                dead_ball_event: Some(DeadBallEvent::FoulUncertain),
                set_piece: Some(SetPiece::FreeKickUncertain),
                executor: Some(p),
                executor_team: Some(series.roster.team_of(p)),
                confidence: Confidence::Low,
                restart_pos: Some(at),
                ..base
            };
        }
    }

    // free kick as the default option
    let (p, _) = controllers_at(series, at, poss.r_pz)[0];
    SetPieceResolution {
        dead_ball_event: Some(DeadBallEvent::Foul),
        set_piece: Some(SetPiece::FreeKick),
        executor: Some(p),
        executor_team: Some(series.roster.team_of(p)),
        confidence: Confidence::Normal,
        restart_pos: Some(at),
        ..base
    }
}

/// Kickoff exceptions, applied per period over the ordered resolutions:
///
/// - a kickoff after which the ball never reached either penalty area
///   before the next kickoff was ordered retaken: it becomes an incorrect
///   kickoff and the "goal" before the next kickoff a referee interruption;
/// - a period that ends right after a goal-bound shot with no kickoff left
///   to confirm it gets a trailing `goal?`.
pub fn audit_kickoffs(
    resolutions: &mut [SetPieceResolution],
    series: &FrameSeries,
    intervals: &[DeadInterval],
    pitch: &PitchModel,
) {
    let mut prefix = vec![0usize; series.len() + 1];
    for (i, f) in series.frames.iter().enumerate() {
        let hit = f.ball_status == BallStatus::InPlay
            && f.ball.map(|b| pitch.in_either_penalty_area(b)).unwrap_or(false);
        prefix[i + 1] = prefix[i] + hit as usize;
    }
    let reached = |a: usize, b: usize| -> bool { b > a && prefix[b] - prefix[a] > 0 };

    let mut periods: Vec<u8> = resolutions.iter().map(|r| r.period).collect();
    periods.dedup();
    for period in periods {
        let kickoff_idxs: Vec<usize> = resolutions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.period == period && r.set_piece == Some(SetPiece::Kickoff))
            .map(|(i, _)| i)
            .collect();
        for w in kickoff_idxs.windows(2) {
            let (prev, next) = (w[0], w[1]);
            let from = resolutions[prev]
                .restart_pos
                .unwrap_or(intervals[resolutions[prev].interval].end + 1);
            let to = intervals[resolutions[next].interval].start;
            if !reached(from, to) {
                resolutions[prev].set_piece = Some(SetPiece::IncorrectKickoff);
                resolutions[next].dead_ball_event = Some(DeadBallEvent::RefereeInterruption);
                resolutions[next].confidence = Confidence::Low;
            }
        }
        // trailing goal? on the period end
        if let Some(last) = resolutions
            .iter_mut()
            .filter(|r| {
                r.period == period
                    && r.set_piece.is_none()
                    && intervals[r.interval].boundary == IntervalBoundary::PeriodEnd
            })
            .last()
        {
            if last.goal_crossing.is_some() && last.dead_ball_event.is_none() {
                last.dead_ball_event = Some(DeadBallEvent::GoalUncertain);
                last.confidence = Confidence::Low;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::frames::{Frame, PlayerSample, Role, Roster};
    use crate::geometry::build_pitch;

    /// A scene: fixed player positions, a fixed ball, dead for `dead`
    /// frames then in play for `live` frames.
    struct Scene {
        series: FrameSeries,
    }

    impl Scene {
        fn new(
            players: &[(&str, &str, Role, Point)],
            ball: Point,
            dead: usize,
            live: usize,
        ) -> Self {
            let mut roster = Roster::new();
            let mut metas = Vec::new();
            for (id, team, role, pos) in players {
                let t = roster.intern_team(team).unwrap();
                let p = roster.intern_player(id, t, *role).unwrap();
                metas.push((p, *pos));
            }
            let mut series = FrameSeries::new(25.0, roster);
            series.has_status_signal = true;
            for i in 0..dead + live {
                series.frames.push(Frame {
                    frame_index: i as u64,
                    period: 1,
                    timestamp: i as f64 / 25.0,
                    ball: Some(ball),
                    ball_status: if i < dead {
                        BallStatus::Dead
                    } else {
                        BallStatus::InPlay
                    },
                    players: metas
                        .iter()
                        .map(|(p, pos)| PlayerSample {
                            player: *p,
                            pos: *pos,
                            tracked: true,
                        })
                        .collect(),
                });
            }
            Scene { series }
        }

        fn interval(&self) -> DeadInterval {
            let timeline: Vec<ControlLabel> = self
                .series
                .frames
                .iter()
                .map(|f| {
                    if f.ball_status == BallStatus::Dead {
                        ControlLabel::DeadBall
                    } else {
                        ControlLabel::NoPossession
                    }
                })
                .collect();
            segment_dead_intervals(&self.series, &timeline)[0]
        }
    }

    fn pitch() -> PitchModel {
        build_pitch(105.0, 68.0, vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn dead_runs_are_segmented() {
        let labels = [
            ControlLabel::NoPossession,
            ControlLabel::DeadBall,
            ControlLabel::DeadBall,
            ControlLabel::NoPossession,
        ];
        let mut roster = Roster::new();
        roster.intern_team("home").unwrap();
        let mut s = FrameSeries::new(25.0, roster);
        for i in 0..4u64 {
            s.frames.push(Frame {
                frame_index: i,
                period: 1,
                timestamp: i as f64 / 25.0,
                ball: None,
                ball_status: BallStatus::Dead,
                players: vec![],
            });
        }
        let intervals = segment_dead_intervals(&s, &labels);
        assert_eq!(intervals.len(), 1);
        assert_eq!((intervals[0].start, intervals[0].end), (1, 2));
        assert_eq!(intervals[0].first_inplay_after, Some(3));
        assert_eq!(intervals[0].boundary, IntervalBoundary::Interior);
    }

    #[test]
    fn period_boundaries_are_flagged() {
        let mut roster = Roster::new();
        roster.intern_team("home").unwrap();
        let mut s = FrameSeries::new(25.0, roster);
        let layout = [
            (1u8, BallStatus::Dead),
            (1, BallStatus::InPlay),
            (1, BallStatus::Dead),
            (2, BallStatus::Dead),
            (2, BallStatus::InPlay),
        ];
        for (i, (period, st)) in layout.iter().enumerate() {
            s.frames.push(Frame {
                frame_index: i as u64,
                period: *period,
                timestamp: i as f64 / 25.0,
                ball: None,
                ball_status: *st,
                players: vec![],
            });
        }
        let labels: Vec<ControlLabel> = s
            .frames
            .iter()
            .map(|f| {
                if f.ball_status == BallStatus::Dead {
                    ControlLabel::DeadBall
                } else {
                    ControlLabel::NoPossession
                }
            })
            .collect();
        let intervals = segment_dead_intervals(&s, &labels);
        assert_eq!(intervals.len(), 3);
        assert_eq!(intervals[0].boundary, IntervalBoundary::PeriodStart);
        assert_eq!(intervals[1].boundary, IntervalBoundary::PeriodEnd);
        assert_eq!(intervals[2].boundary, IntervalBoundary::PeriodStart);
        assert_eq!(intervals[2].period, 2);
    }

    #[test]
    fn kickoff_trigger_complete_and_confirmed() {
        let cfg = RunConfig::default();
        let scene = Scene::new(
            &[
                ("H1", "home", Role::Outfield, Point::new(-0.3, 0.0)),
                ("H2", "home", Role::Outfield, Point::new(-10.0, 5.0)),
                ("A1", "away", Role::Outfield, Point::new(8.0, -3.0)),
                ("A2", "away", Role::Outfield, Point::new(20.0, 10.0)),
            ],
            Point::new(0.0, 0.0),
            30,
            10,
        );
        let p = pitch();
        let interval = scene.interval();
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        let kickoff = &acts[0];
        assert!(kickoff.complete);
        assert_eq!(kickoff.candidates[0], vec![PlayerIdx(0)]);
        let res = resolve_set_piece(
            &scene.series,
            &interval,
            0,
            &acts,
            &p,
            &cfg.possession,
            &cfg.triggers,
            None,
        );
        // period-start interval resolves to a kickoff without a DBE
        assert_eq!(res.set_piece, Some(SetPiece::Kickoff));
        assert_eq!(res.dead_ball_event, None);
        assert_eq!(res.executor, Some(PlayerIdx(0)));
    }

    #[test]
    fn kickoff_defeated_by_player_in_wrong_half() {
        let cfg = RunConfig::default();
        let scene = Scene::new(
            &[
                ("H1", "home", Role::Outfield, Point::new(-0.3, 0.0)),
                ("H2", "home", Role::Outfield, Point::new(15.0, 5.0)), // wrong half
                ("A1", "away", Role::Outfield, Point::new(8.0, -3.0)),
            ],
            Point::new(0.0, 0.0),
            30,
            10,
        );
        let p = pitch();
        let acts = evaluate_triggers(&scene.series, &scene.interval(), &p, &cfg.triggers);
        assert!(!acts[0].complete);
    }

    #[test]
    fn penalty_trigger_configuration() {
        let cfg = RunConfig::default();
        // home attacks +x; defending keeper on the +x goal line, taker at
        // the mark, everyone else outside the area and the 9.15 m disk
        let scene = Scene::new(
            &[
                ("H9", "home", Role::Outfield, Point::new(41.2, 0.0)),
                ("GK", "away", Role::Goalkeeper, Point::new(52.2, 0.0)),
                ("H2", "home", Role::Outfield, Point::new(30.0, 10.0)),
                ("A2", "away", Role::Outfield, Point::new(30.0, -12.0)),
            ],
            Point::new(41.5, 0.0),
            40,
            10,
        );
        let p = pitch();
        let interval = scene.interval();
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        let penalty = &acts[1];
        assert!(penalty.complete, "{penalty:?}");
        assert_eq!(penalty.candidates[0], vec![PlayerIdx(0)]);

        // an outfielder loitering inside the 9.15 m disk defeats it
        let scene2 = Scene::new(
            &[
                ("H9", "home", Role::Outfield, Point::new(41.2, 0.0)),
                ("GK", "away", Role::Goalkeeper, Point::new(52.2, 0.0)),
                ("H2", "home", Role::Outfield, Point::new(38.0, 3.0)),
            ],
            Point::new(41.5, 0.0),
            40,
            10,
        );
        let acts2 = evaluate_triggers(&scene2.series, &scene2.interval(), &p, &cfg.triggers);
        assert!(!acts2[1].complete);
    }

    #[test]
    fn corner_beats_throwin_in_hierarchy() {
        let cfg = RunConfig::default();
        // the corner taker at the mark is also beyond the auxiliary
        // sideline, so both triggers complete; the hierarchy picks corner
        let scene = Scene::new(
            &[
                ("H7", "home", Role::Outfield, Point::new(52.3, 33.8)),
                ("A1", "away", Role::Outfield, Point::new(45.0, 20.0)),
            ],
            Point::new(52.5, 34.0),
            40,
            10,
        );
        let p = pitch();
        let mut interval = scene.interval();
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        assert!(acts[2].complete, "corner should be complete");
        assert!(acts[4].complete, "throw-in should also be complete");
        interval.boundary = IntervalBoundary::Interior;
        let res = resolve_set_piece(
            &scene.series,
            &interval,
            0,
            &acts,
            &p,
            &cfg.possession,
            &cfg.triggers,
            None,
        );
        assert_eq!(res.set_piece, Some(SetPiece::CornerKick));
        assert_eq!(res.dead_ball_event, Some(DeadBallEvent::OutForCornerKick));
    }

    #[test]
    fn no_trigger_defaults_to_free_kick() {
        let cfg = RunConfig::default();
        let scene = Scene::new(
            &[
                ("H5", "home", Role::Outfield, Point::new(10.0, 5.2)),
                ("A1", "away", Role::Outfield, Point::new(-15.0, -8.0)),
            ],
            Point::new(10.0, 5.0),
            40,
            10,
        );
        let p = pitch();
        let mut interval = scene.interval();
        interval.boundary = IntervalBoundary::Interior;
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        let res = resolve_set_piece(
            &scene.series,
            &interval,
            0,
            &acts,
            &p,
            &cfg.possession,
            &cfg.triggers,
            None,
        );
        assert_eq!(res.set_piece, Some(SetPiece::FreeKick));
        assert_eq!(res.dead_ball_event, Some(DeadBallEvent::Foul));
        assert_eq!(res.executor, Some(PlayerIdx(0)));
    }

    #[test]
    fn late_arriving_corner_completes_only_with_relaxed_minimum() {
        let cfg = RunConfig::default();
        let mut scene = Scene::new(
            &[("H7", "home", Role::Outfield, Point::new(52.3, 33.8))],
            Point::new(52.5, 34.0),
            20,
            4,
        );
        // keep the player away from the corner until the last 3 dead frames
        for i in 0..17 {
            scene.series.frames[i].players[0].pos = Point::new(30.0, 20.0);
        }
        let p = pitch();
        let interval = scene.interval();
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        assert!(!acts[2].complete, "held 3 < min_complete_frames");

        let relaxed = TriggerConfig {
            min_complete_frames: 3,
            ..cfg.triggers
        };
        let acts2 = evaluate_triggers(&scene.series, &interval, &p, &relaxed);
        assert!(acts2[2].complete);
        assert_eq!(acts2[2].hold_start, Some(17));
    }

    #[test]
    fn uncontrolled_restart_yields_uncertain_pair() {
        let cfg = RunConfig::default();
        let scene = Scene::new(
            &[("H5", "home", Role::Outfield, Point::new(30.0, 20.0))],
            Point::new(0.0, -10.0),
            40,
            30,
        );
        let p = pitch();
        let mut interval = scene.interval();
        interval.boundary = IntervalBoundary::Interior;
        let acts = evaluate_triggers(&scene.series, &interval, &p, &cfg.triggers);
        let res = resolve_set_piece(
            &scene.series,
            &interval,
            0,
            &acts,
            &p,
            &cfg.possession,
            &cfg.triggers,
            None,
        );
        assert_eq!(res.set_piece, Some(SetPiece::FreeKickUncertain));
        assert_eq!(res.dead_ball_event, Some(DeadBallEvent::FoulUncertain));
        assert_eq!(res.confidence, Confidence::Low);
    }
}
