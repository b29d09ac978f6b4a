//! Scripted synthetic matches: tracking frames plus by-construction ground
//! truth, used as the independent oracle for end-to-end validation.
//!
//! The generator lays out piecewise-linear ball flight (constant speed per
//! action) and scripted player movement, synthesizes dead intervals whose
//! player configurations satisfy the matching trigger geometry, and derives
//! the ground-truth events table from script intent and analytic geometry,
//! never from the detection pipeline. Noise and corruption injections are
//! applied afterwards, seeded and reproducible; ground truth always
//! describes the clean data.

mod script;

pub use script::{
    Action, MatchScript, NoiseConfig, ScriptError, ScriptPeriod, ScriptPitch, ScriptPlayer,
    ScriptTeam, SetPieceKind,
};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::events::{BallControl, EventName, EventRecord};
use crate::frames::{
    BallStatus, Frame, FrameSeries, PlayerIdx, PlayerSample, Point, Role, Roster, TeamIdx,
};
use crate::geometry::{build_pitch, ray_crosses_goal, shooter_zone, PitchModel, ShooterZone};
use crate::possession::{ChangeKind, ControlLabel};
use crate::setpiece::{Confidence, DeadBallEvent, SetPiece};

/// Possession radius the ground truth is aligned with; must equal the
/// detector's `r_pz` for frame-exact oracle comparisons.
pub const CONTROL_RADIUS: f64 = 1.0;

const WALK_SPEED: f64 = 5.0;
const RESTART_HOLD_SECS: f64 = 0.4;
/// Dwell after a reception before the next touch (the stop is what makes a
/// touch detectable as a speed change).
const SETTLE_SECS: f64 = 0.2;

/// Ground truth emitted alongside the generated frames.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub events: Vec<EventRecord>,
    /// Per-frame ball-control labels for the clean data.
    pub labels: Vec<ControlLabel>,
    pub period_starts: BTreeMap<u8, f64>,
}

struct GtRow {
    pos: usize,
    rec: EventRecord,
}

struct PendingSave {
    gain_row: usize,
    shooter_loss_row: usize,
    gain_ts: f64,
    goalward: bool,
    zone: ShooterZone,
    on_target: bool,
    keeper: PlayerIdx,
}

/// How a pending save gets resolved: by the keeper's next loss (with the
/// goal-crossing time when the ball went into a goal), or without one.
struct SaveClosure {
    loss_row: usize,
    loss_ts: f64,
    crossed: Option<(f64, f64)>, // (end sign, crossing timestamp)
}

struct KickoffRecord {
    spe_row: Option<usize>,
    dbe_row: Option<usize>,
    /// Ball reached a penalty area between the previous kickoff and this one.
    reached_before: bool,
}

#[derive(Debug, Default)]
struct FlightOutcome {
    loss_row: Option<usize>,
    /// (end sign, crossing timestamp) when the flight crossed a goal.
    crossed_goal: Option<(f64, f64)>,
    went_out: bool,
}

struct Generator<'s> {
    script: &'s MatchScript,
    pitch: PitchModel,
    rate: f64,
    r_pz: f64,
    roster: Roster,
    frames: Vec<Frame>,
    labels: Vec<ControlLabel>,
    rows: Vec<GtRow>,
    positions: Vec<Point>,
    bases: Vec<Point>,
    ball: Point,
    period: u8,
    controller: Option<PlayerIdx>,
    /// Armed when control is about to transfer: fires on the first in-play
    /// frame with the player inside the control radius.
    pending_gain: Option<(PlayerIdx, Option<SetPiece>)>,
    prev_change: Option<(ChangeKind, PlayerIdx, TeamIdx)>,
    pending_save: Option<PendingSave>,
    kickoffs: Vec<KickoffRecord>,
    area_reached: bool,
    rows_at_last_restart: usize,
    /// A flight crossed this goal heading into the current dead spell.
    crossing_into_dead: Option<f64>,
    /// Set-piece attribute waiting for the next row (the executor already
    /// controlled the ball before the interval, so no new gain is emitted).
    deferred_spe: Option<SetPiece>,
    action_no: usize,
}

impl<'s> Generator<'s> {
    fn new(script: &'s MatchScript) -> Result<Self, ScriptError> {
        script.validate()?;
        let mut roster = Roster::new();
        let mut positions = Vec::new();
        let mut signs = Vec::new();
        for team in &script.teams {
            let t = roster
                .intern_team(&team.id)
                .map_err(|_| ScriptError::BadTeamCount)?;
            signs.push(if team.attacks_positive_x { 1.0 } else { -1.0 });
            for p in &team.players {
                roster
                    .intern_player(&p.id, t, p.role)
                    .map_err(|_| ScriptError::DuplicatePlayer(p.id.clone()))?;
                positions.push(Point::new(p.base.0, p.base.1));
            }
        }
        let pitch = build_pitch(script.pitch.length, script.pitch.width, signs).map_err(|e| {
            ScriptError::Invalid {
                action: 0,
                detail: e.to_string(),
            }
        })?;
        let bases = positions.clone();
        Ok(Generator {
            script,
            pitch,
            rate: script.sample_rate,
            r_pz: CONTROL_RADIUS,
            roster,
            frames: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
            positions,
            bases,
            ball: Point::new(0.0, 0.0),
            period: 1,
            controller: None,
            pending_gain: None,
            prev_change: None,
            pending_save: None,
            kickoffs: Vec::new(),
            area_reached: false,
            rows_at_last_restart: 0,
            crossing_into_dead: None,
            deferred_spe: None,
            action_no: 0,
        })
    }

    fn idx(&self, id: &str) -> PlayerIdx {
        self.roster.lookup(id).expect("validated id")
    }

    fn team_of(&self, p: PlayerIdx) -> TeamIdx {
        self.roster.team_of(p)
    }

    fn attack(&self, p: PlayerIdx) -> f64 {
        self.pitch.attack_sign(self.team_of(p), self.period)
    }

    fn base_of(&self, p: PlayerIdx) -> Point {
        let b = self.bases[p.0 as usize];
        if self.period % 2 == 0 {
            Point::new(-b.x, -b.y)
        } else {
            b
        }
    }

    fn ts(&self, pos: usize) -> f64 {
        pos as f64 / self.rate
    }

    fn emit(&mut self, ball: Point, dead: bool) {
        let pos = self.frames.len();
        self.frames.push(Frame {
            frame_index: pos as u64,
            period: self.period,
            timestamp: self.ts(pos),
            ball: Some(ball),
            ball_status: if dead {
                BallStatus::Dead
            } else {
                BallStatus::InPlay
            },
            players: self
                .positions
                .iter()
                .enumerate()
                .map(|(i, p)| PlayerSample {
                    player: PlayerIdx(i as u32),
                    pos: *p,
                    tracked: true,
                })
                .collect(),
        });
        self.ball = ball;

        if !dead {
            if self.pitch.in_either_penalty_area(ball) {
                self.area_reached = true;
            }
            if let Some((p, spe)) = self.pending_gain {
                if self.positions[p.0 as usize].dist(ball) <= self.r_pz {
                    self.fire_gain(pos, p, spe);
                }
            }
        }

        let label = if dead {
            ControlLabel::DeadBall
        } else {
            match self.controller {
                Some(c) if self.positions[c.0 as usize].dist(ball) <= self.r_pz => {
                    ControlLabel::Possession(c)
                }
                _ => ControlLabel::NoPossession,
            }
        };
        self.labels.push(label);
    }

    fn push_row(&mut self, pos: usize, player: PlayerIdx, event: Option<EventName>) -> usize {
        let from_set_piece = self.deferred_spe.take();
        let rec = EventRecord {
            frame_index: pos as u64,
            period: self.period,
            timestamp: self.ts(pos),
            player_id: self.roster.player_id(player).to_string(),
            team_id: self.roster.team_name(self.team_of(player)).to_string(),
            ball_control: BallControl::Possession,
            event_name: event,
            dead_ball_event: None,
            from_set_piece,
            confidence: Confidence::Normal,
        };
        self.rows.push(GtRow { pos, rec });
        let row = self.rows.len() - 1;
        if self.rows[row].rec.from_set_piece == Some(SetPiece::Kickoff) {
            if let Some(k) = self.kickoffs.last_mut() {
                if k.spe_row.is_none() {
                    k.spe_row = Some(row);
                }
            }
            self.area_reached = false;
        }
        row
    }

    fn fire_gain(&mut self, pos: usize, player: PlayerIdx, spe: Option<SetPiece>) {
        let team = self.team_of(player);
        let event = if spe.is_some() {
            None // the set-piece attribute rides this row
        } else {
            match self.prev_change {
                Some((ChangeKind::Loss, _, lt)) => Some(if lt == team {
                    EventName::Reception
                } else {
                    EventName::Interception
                }),
                _ => None,
            }
        };
        if let Some(spe) = spe {
            self.deferred_spe = Some(spe);
        }
        self.push_row(pos, player, event);
        if spe.is_some() {
            self.rows_at_last_restart = self.rows.len();
        }
        self.controller = Some(player);
        self.pending_gain = None;
        self.prev_change = Some((ChangeKind::Gain, player, team));
    }

    /// Converts the keeper's freshly fired reception into the provisional
    /// save-family gain tracked by `pending_save`.
    fn arm_pending_save(
        &mut self,
        keeper: PlayerIdx,
        shooter_loss_row: usize,
        origin: Point,
        target: Point,
        attack: f64,
    ) {
        let mut ps = PendingSave {
            gain_row: usize::MAX,
            shooter_loss_row,
            gain_ts: 0.0,
            goalward: self.kick_on_target(origin, target, attack, 2.0),
            zone: shooter_zone(origin, &self.pitch, attack),
            on_target: self.kick_on_target(origin, target, attack, 0.25),
            keeper,
        };
        if self.controller == Some(keeper) {
            let keeper_id = self.roster.player_id(keeper).to_string();
            if let Some(row) = self.rows.iter().rposition(|r| r.rec.player_id == keeper_id) {
                self.rows[row].rec.event_name = None;
                ps.gain_row = row;
                ps.gain_ts = self.ts(self.rows[row].pos);
            }
        }
        self.pending_save = Some(ps);
    }

    /// Resolves the outstanding save record: retention against the keeper's
    /// next loss, concession against a goal crossing within the window.
    fn resolve_pending_save(&mut self, closure: Option<SaveClosure>) {
        let Some(ps) = self.pending_save.take() else {
            return;
        };
        if ps.gain_row == usize::MAX {
            return;
        }
        let own_end = -self.attack(ps.keeper);
        let (retained, conceded) = match &closure {
            Some(c) => {
                let own_goal_quickly = c
                    .crossed
                    .map(|(sign, ts)| sign == own_end && ts - ps.gain_ts <= 2.0)
                    .unwrap_or(false);
                (c.loss_ts - ps.gain_ts >= 1.0, own_goal_quickly)
            }
            None => (true, false),
        };
        let keeper_event = if conceded {
            EventName::UnsuccessfulSave
        } else if ps.goalward {
            if retained {
                EventName::SaveRetain
            } else {
                EventName::SaveDeflect
            }
        } else if ps.zone == ShooterZone::CrossZone {
            if retained {
                EventName::ClaimRetain
            } else {
                EventName::ClaimDeflect
            }
        } else {
            EventName::ReceptionFromLooseBall
        };
        self.rows[ps.gain_row].rec.event_name = Some(keeper_event);
        self.rows[ps.shooter_loss_row].rec.event_name = Some(match keeper_event {
            EventName::UnsuccessfulSave | EventName::SaveRetain | EventName::SaveDeflect => {
                if ps.on_target {
                    EventName::ShotOnTarget
                } else {
                    EventName::ShotOffTarget
                }
            }
            EventName::ClaimRetain | EventName::ClaimDeflect => EventName::Cross,
            _ => EventName::Pass,
        });
        if conceded {
            // the fumble itself carries no event; the goal DBE rides it
            if let Some(c) = closure {
                self.rows[c.loss_row].rec.event_name = None;
            }
        }
    }

    /// Resolves an outstanding save with no keeper loss, unless the pending
    /// keeper is the actor about to move the ball (their own next loss will
    /// close it instead).
    fn settle_save_unless_actor(&mut self, actor: PlayerIdx) {
        if self
            .pending_save
            .as_ref()
            .map(|ps| ps.keeper != actor)
            .unwrap_or(false)
        {
            self.resolve_pending_save(None);
        }
    }

    /// Walks `actor` to the static ball (and the previous controller back
    /// to their base) when the scripted actor is not in control yet.
    fn prepare_actor(&mut self, actor: PlayerIdx) -> Result<(), ScriptError> {
        if self.controller == Some(actor) {
            return Ok(());
        }
        let start_dist = self.positions[actor.0 as usize].dist(self.ball);
        if self.controller.is_some() && start_dist < 4.0 {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "actor too close to the previous controller for a clean handover"
                    .to_string(),
            });
        }
        let depart = self.controller.filter(|c| *c != actor);
        let depart_goal = depart.map(|c| self.base_of(c));
        self.pending_gain = Some((actor, None));
        let step = WALK_SPEED / self.rate;
        let dir = self.positions[actor.0 as usize]
            .sub(self.ball)
            .unit(1e-9)
            .unwrap_or(Point::new(1.0, 0.0));
        let goal = self.ball.add(dir.scale(0.3));
        let mut guard = 0usize;
        while self.positions[actor.0 as usize].dist(goal) > 1e-9 {
            let a = self.positions[actor.0 as usize];
            let d = goal.sub(a);
            let n = d.norm();
            self.positions[actor.0 as usize] = if n <= step {
                goal
            } else {
                a.add(d.scale(step / n))
            };
            if let (Some(c), Some(g)) = (depart, depart_goal) {
                let cp = self.positions[c.0 as usize];
                let cd = g.sub(cp);
                let cn = cd.norm();
                self.positions[c.0 as usize] = if cn <= step { g } else { cp.add(cd.scale(step / cn)) };
            }
            let ball = self.ball;
            self.emit(ball, false);
            guard += 1;
            if guard > 10_000 {
                return Err(ScriptError::Invalid {
                    action: self.action_no,
                    detail: "walk preparation does not converge".to_string(),
                });
            }
        }
        for _ in 0..3 {
            let ball = self.ball;
            self.emit(ball, false);
        }
        if self.pending_gain.is_some() {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "actor finished the approach without gaining control".to_string(),
            });
        }
        Ok(())
    }

    /// Emits a ball flight from the current position to `to` at `speed`,
    /// tracking the kicker's loss, goal crossings and out-of-bounds frames.
    fn fly(
        &mut self,
        to: Point,
        speed: f64,
        kicker: Option<PlayerIdx>,
        receiver: Option<(PlayerIdx, Option<SetPiece>)>,
    ) -> FlightOutcome {
        let start = self.ball;
        let total = start.dist(to).max(1e-9);
        let step = speed / self.rate;
        let n = (total / step).ceil().max(1.0) as usize;
        let mut out = FlightOutcome::default();
        let mut last_inside: Option<usize> = None;
        let mut dead = false;
        if let Some(r) = receiver {
            self.pending_gain = Some(r);
        }
        for k in 1..=n {
            let t = (k as f64 * step / total).min(1.0);
            let prev = self.ball;
            let ball = Point::new(start.x + t * (to.x - start.x), start.y + t * (to.y - start.y));
            let pos = self.frames.len();
            if !dead && !self.pitch.contains(ball) {
                dead = true;
                out.went_out = true;
                for sign in [1.0, -1.0] {
                    if crate::geometry::segment_crosses_goal(prev, ball, &self.pitch, sign, 0.0) {
                        out.crossed_goal = Some((sign, self.ts(pos)));
                    }
                }
                self.crossing_into_dead = out.crossed_goal.map(|(s, _)| s);
            }
            if let Some(kp) = kicker {
                if !dead && self.positions[kp.0 as usize].dist(ball) <= self.r_pz {
                    last_inside = Some(pos);
                } else if let Some(li) = last_inside.take() {
                    if !dead && out.loss_row.is_none() {
                        let row = self.push_row(li, kp, None);
                        out.loss_row = Some(row);
                        self.prev_change = Some((ChangeKind::Loss, kp, self.team_of(kp)));
                    }
                }
            }
            self.emit(ball, dead);
        }
        out
    }

    /// Analytic on-target test for a kick from `origin` towards `to`.
    fn kick_on_target(&self, origin: Point, to: Point, attack: f64, widen: f64) -> bool {
        ray_crosses_goal(origin, to.sub(origin), &self.pitch, attack, widen)
    }

    /// Short static dwell after a reception.
    fn settle(&mut self) {
        let frames = ((SETTLE_SECS * self.rate).round() as usize).max(3);
        for _ in 0..frames {
            let ball = self.ball;
            self.emit(ball, false);
        }
    }

    fn attach_dbe(&mut self, dbe: DeadBallEvent) -> usize {
        if self.rows.len() > self.rows_at_last_restart {
            let idx = self.rows.len() - 1;
            self.rows[idx].rec.dead_ball_event = Some(dbe);
            idx
        } else {
            // no event since the last restart: synthetic carrier row
            let pos = self.frames.len().saturating_sub(1);
            let rec = EventRecord {
                frame_index: pos as u64,
                period: self.period,
                timestamp: self.ts(pos),
                player_id: String::new(),
                team_id: String::new(),
                ball_control: BallControl::Possession,
                event_name: None,
                dead_ball_event: Some(dbe),
                from_set_piece: None,
                confidence: Confidence::Low,
            };
            self.rows.push(GtRow { pos, rec });
            self.rows.len() - 1
        }
    }

    fn default_spot(&self, kind: SetPieceKind, executor: PlayerIdx) -> Point {
        let attack = self.attack(executor);
        let half_l = self.pitch.half_length();
        let half_w = self.pitch.half_width();
        match kind {
            SetPieceKind::Kickoff => Point::new(0.0, 0.0),
            SetPieceKind::Penalty => self.pitch.penalty_mark(attack),
            SetPieceKind::Corner => {
                let sy = if self.ball.y >= 0.0 { 1.0 } else { -1.0 };
                Point::new(attack * half_l, sy * half_w)
            }
            SetPieceKind::GoalKick => Point::new(-attack * (half_l - 2.75), 0.0),
            SetPieceKind::ThrowIn => {
                let sy = if self.ball.y >= 0.0 { 1.0 } else { -1.0 };
                let x = self.ball.x.clamp(-(half_l - 8.0), half_l - 8.0);
                Point::new(x, sy * half_w)
            }
            SetPieceKind::FreeKick => self.ball,
        }
    }

    /// Keeps bystanders clear of trigger zones during a dead interval.
    fn sanitize_station(&self, p: Point) -> Point {
        let half_l = self.pitch.half_length();
        let half_w = self.pitch.half_width();
        let mut q = p;
        q.x = q.x.clamp(-(half_l - 7.5), half_l - 7.5);
        q.y = q.y.clamp(-(half_w - 4.5), half_w - 4.5);
        if q.dist(self.pitch.center_mark()) < 3.5 {
            q.x += if q.x >= 0.0 { 4.0 } else { -4.0 };
        }
        q
    }

    fn set_piece(
        &mut self,
        kind: SetPieceKind,
        executor: PlayerIdx,
        duration: f64,
        spot: Option<(f64, f64)>,
    ) -> Result<(), ScriptError> {
        self.resolve_pending_save(None);
        let attack = self.attack(executor);
        let own = -attack;
        let spot = spot
            .map(|(x, y)| Point::new(x, y))
            .unwrap_or_else(|| self.default_spot(kind, executor));
        if kind == SetPieceKind::FreeKick && spot.dist(self.ball) > 30.0 {
            return Err(ScriptError::Discontinuity {
                action: self.action_no,
                detail: format!(
                    "free kick spot {:.1} m from the dead-ball position",
                    spot.dist(self.ball)
                ),
            });
        }

        let total = ((duration * self.rate).round() as usize).max(8);
        let hold = (total - 2).min(((0.6 * self.rate).round() as usize).max(13));
        let travel = total - hold;

        let n = self.positions.len();
        let mut targets: Vec<Point> = (0..n)
            .map(|i| {
                let p = PlayerIdx(i as u32);
                if self.roster.player(p).role == Role::Goalkeeper {
                    let own_sign = -self.attack(p);
                    Point::new(own_sign * (self.pitch.half_length() - 8.0), 0.0)
                } else {
                    self.sanitize_station(self.positions[i])
                }
            })
            .collect();
        match kind {
            SetPieceKind::Kickoff => {
                for (i, t) in targets.iter_mut().enumerate() {
                    *t = self.base_of(PlayerIdx(i as u32));
                }
                targets[executor.0 as usize] = Point::new(-attack * 0.3, 0.0);
            }
            SetPieceKind::Penalty => {
                let exec_team = self.team_of(executor);
                let keeper = (0..n).map(|i| PlayerIdx(i as u32)).find(|p| {
                    self.team_of(*p) != exec_team
                        && self.roster.player(*p).role == Role::Goalkeeper
                });
                let mut slot = 0usize;
                for i in 0..n {
                    let p = PlayerIdx(i as u32);
                    if p == executor {
                        continue;
                    }
                    if Some(p) == keeper {
                        targets[i] = Point::new(attack * (self.pitch.half_length() - 0.3), 0.0);
                    } else {
                        let spread = (n.max(3) - 2) as f64;
                        let y = -24.0 + 48.0 * (slot as f64 / spread);
                        targets[i] = Point::new(attack * (self.pitch.half_length() - 22.0), y);
                        slot += 1;
                    }
                }
                targets[executor.0 as usize] = Point::new(spot.x - attack * 0.35, 0.0);
            }
            SetPieceKind::Corner => {
                let inward = Point::new(-attack * 0.25, -spot.y.signum() * 0.25);
                targets[executor.0 as usize] = spot.add(inward);
            }
            SetPieceKind::GoalKick => {
                targets[executor.0 as usize] = Point::new(spot.x - own * 0.3, 0.0);
            }
            SetPieceKind::ThrowIn => {
                targets[executor.0 as usize] = Point::new(spot.x, spot.y + spot.y.signum() * 0.4);
            }
            SetPieceKind::FreeKick => {
                targets[executor.0 as usize] = Point::new(spot.x - attack * 0.3, spot.y);
            }
        }

        let period_start = self
            .frames
            .last()
            .map(|f| f.period != self.period)
            .unwrap_or(true);
        let spe = match kind {
            SetPieceKind::Kickoff => SetPiece::Kickoff,
            SetPieceKind::Penalty => SetPiece::PenaltyKick,
            SetPieceKind::Corner => SetPiece::CornerKick,
            SetPieceKind::GoalKick => SetPiece::GoalKick,
            SetPieceKind::ThrowIn => SetPiece::ThrowIn,
            SetPieceKind::FreeKick => SetPiece::FreeKick,
        };
        let mut dbe_row = None;
        if !period_start {
            dbe_row = Some(self.attach_dbe(spe.paired_dbe().expect("mapped")));
        }
        if kind == SetPieceKind::Kickoff {
            let reached = self.area_reached;
            self.kickoffs.push(KickoffRecord {
                spe_row: None,
                dbe_row,
                reached_before: reached,
            });
        }

        // emission: lerp players and ball into position, then hold
        let starts = self.positions.clone();
        let ball_start = self.ball;
        for k in 1..=total {
            let t = if travel == 0 {
                1.0
            } else {
                (k as f64 / travel as f64).min(1.0)
            };
            for i in 0..n {
                let (a, b) = (starts[i], targets[i]);
                self.positions[i] = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
            let ball = Point::new(
                ball_start.x + t * (spot.x - ball_start.x),
                ball_start.y + t * (spot.y - ball_start.y),
            );
            self.emit(ball, true);
        }
        self.crossing_into_dead = None;

        // restart: a short static in-play lead-in with the executor at the
        // ball, so the pattern holds on the first in-play frame
        let same_controller = self.controller == Some(executor);
        if same_controller {
            // the executor already controlled before the interval: no gain
            // is emitted, the set-piece attribute rides their next event
            self.deferred_spe = Some(spe);
            self.rows_at_last_restart = self.rows.len();
        } else {
            self.controller = None;
            self.prev_change = None;
            self.pending_gain = Some((executor, Some(spe)));
        }
        let lead = ((RESTART_HOLD_SECS * self.rate).round() as usize).max(3);
        for _ in 0..lead {
            let ball = self.ball;
            self.emit(ball, false);
        }
        if !same_controller && self.pending_gain.is_some() {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "set-piece executor did not control the restart".to_string(),
            });
        }
        Ok(())
    }

    fn pass(&mut self, from: PlayerIdx, to: PlayerIdx, speed: f64) -> Result<(), ScriptError> {
        self.prepare_actor(from)?;
        self.settle_save_unless_actor(from);
        let origin = self.ball;
        let target = self.positions[to.0 as usize];
        if origin.dist(target) < 3.0 {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: format!("pass distance {:.2} m below 3 m", origin.dist(target)),
            });
        }
        if !self.pitch.contains(target) {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: format!(
                    "receiver {} stands outside the pitch",
                    self.roster.player_id(to)
                ),
            });
        }
        let attack = self.attack(from);
        let out = self.fly(target, speed, Some(from), Some((to, None)));
        let loss_row = out.loss_row.ok_or_else(|| ScriptError::Invalid {
            action: self.action_no,
            detail: "pass never left the kicker's control zone".to_string(),
        })?;
        if self.controller != Some(to) {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "pass receiver never gained control".to_string(),
            });
        }
        self.settle();
        // the kicker may have been a keeper sitting on an unresolved save
        if self
            .pending_save
            .as_ref()
            .map(|ps| ps.keeper == from)
            .unwrap_or(false)
        {
            let loss_ts = self.ts(self.rows[loss_row].pos);
            self.resolve_pending_save(Some(SaveClosure {
                loss_row,
                loss_ts,
                crossed: None,
            }));
        }

        let receiver_meta = self.roster.player(to);
        let keeper_catch = receiver_meta.role == Role::Goalkeeper
            && self.team_of(to) != self.team_of(from)
            && self.pitch.in_penalty_area(target, -self.attack(to), 0.0);
        if keeper_catch {
            self.arm_pending_save(to, loss_row, origin, target, attack);
        } else if self.rows[loss_row].rec.event_name.is_none() {
            let receiver_in_area = self.pitch.in_penalty_area(target, attack, 0.0);
            let attacker_in_area = self
                .positions
                .iter()
                .enumerate()
                .filter(|(i, _)| self.team_of(PlayerIdx(*i as u32)) == self.team_of(from))
                .any(|(_, p)| self.pitch.in_penalty_area(*p, attack, 0.0));
            let is_cross = shooter_zone(origin, &self.pitch, attack) == ShooterZone::CrossZone
                && receiver_in_area
                && attacker_in_area;
            self.rows[loss_row].rec.event_name = Some(if is_cross {
                EventName::Cross
            } else {
                EventName::Pass
            });
        }
        Ok(())
    }

    fn shot(&mut self, player: PlayerIdx, target: Point, speed: f64) -> Result<(), ScriptError> {
        self.prepare_actor(player)?;
        self.settle_save_unless_actor(player);
        let origin = self.ball;
        if origin.dist(target) < 3.0 {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "shot distance below 3 m".to_string(),
            });
        }
        let attack = self.attack(player);
        // a player stationed within 0.6 m of the target catches the ball
        let catcher = self
            .positions
            .iter()
            .enumerate()
            .filter(|(i, p)| PlayerIdx(*i as u32) != player && p.dist(target) <= 0.6)
            .min_by(|(_, a), (_, b)| a.dist(target).partial_cmp(&b.dist(target)).unwrap())
            .map(|(i, _)| PlayerIdx(i as u32));
        let out = self.fly(target, speed, Some(player), catcher.map(|c| (c, None)));
        let loss_row = out.loss_row.ok_or_else(|| ScriptError::Invalid {
            action: self.action_no,
            detail: "shot never left the kicker's control zone".to_string(),
        })?;
        if self
            .pending_save
            .as_ref()
            .map(|ps| ps.keeper == player)
            .unwrap_or(false)
        {
            let loss_ts = self.ts(self.rows[loss_row].pos);
            self.resolve_pending_save(Some(SaveClosure {
                loss_row,
                loss_ts,
                crossed: out.crossed_goal,
            }));
        }

        match catcher {
            Some(c) => {
                let keeper_catch = self.roster.player(c).role == Role::Goalkeeper
                    && self.team_of(c) != self.team_of(player)
                    && self.pitch.in_penalty_area(
                        self.positions[c.0 as usize],
                        -self.attack(c),
                        0.0,
                    );
                if keeper_catch {
                    self.arm_pending_save(c, loss_row, origin, target, attack);
                } else if self.rows[loss_row].rec.event_name.is_none() {
                    // blocked: a shot stopped by an outfield player surfaces
                    // as a pass (completed or intercepted)
                    self.rows[loss_row].rec.event_name = Some(EventName::Pass);
                }
                if self.controller == Some(c) {
                    self.settle();
                }
            }
            None => {
                if self.rows[loss_row].rec.event_name.is_none() {
                    let own_end = -attack;
                    let label = match out.crossed_goal {
                        Some((sign, _)) if sign == own_end => EventName::OwnGoal,
                        Some(_) => EventName::ShotOnTarget,
                        None => {
                            if self.kick_on_target(origin, target, attack, 0.25) {
                                EventName::ShotOnTarget
                            } else {
                                EventName::ShotOffTarget
                            }
                        }
                    };
                    self.rows[loss_row].rec.event_name = Some(label);
                }
                if out.went_out {
                    self.controller = None;
                }
            }
        }
        Ok(())
    }

    fn dribble(
        &mut self,
        player: PlayerIdx,
        path: &[Point],
        speed: f64,
        push: bool,
    ) -> Result<(), ScriptError> {
        self.prepare_actor(player)?;
        self.settle_save_unless_actor(player);
        let step = speed / self.rate;
        for wp in path {
            let start = self.ball;
            let total = start.dist(*wp).max(1e-9);
            let n = ((total / step).ceil() as usize).max(1);
            if push {
                // the ball travels the leg alone, then the player catches up
                for k in 1..=n {
                    let t = (k as f64 * step / total).min(1.0);
                    let ball =
                        Point::new(start.x + t * (wp.x - start.x), start.y + t * (wp.y - start.y));
                    self.emit(ball, false);
                }
                let dir = wp
                    .sub(self.positions[player.0 as usize])
                    .unit(1e-9)
                    .unwrap_or(Point::new(1.0, 0.0));
                let stop = wp.sub(dir.scale(0.25));
                let wstep = (WALK_SPEED * 1.2) / self.rate;
                let mut guard = 0usize;
                while self.positions[player.0 as usize].dist(stop) > 1e-9 {
                    let a = self.positions[player.0 as usize];
                    let d = stop.sub(a);
                    let nrm = d.norm();
                    self.positions[player.0 as usize] =
                        if nrm <= wstep { stop } else { a.add(d.scale(wstep / nrm)) };
                    let ball = self.ball;
                    self.emit(ball, false);
                    guard += 1;
                    if guard > 10_000 {
                        return Err(ScriptError::Invalid {
                            action: self.action_no,
                            detail: "dribble catch-up does not converge".to_string(),
                        });
                    }
                }
            } else {
                // ball and player travel together, player trailing slightly
                let dir = wp.sub(start).unit(1e-9).unwrap_or(Point::new(1.0, 0.0));
                for k in 1..=n {
                    let t = (k as f64 * step / total).min(1.0);
                    let ball =
                        Point::new(start.x + t * (wp.x - start.x), start.y + t * (wp.y - start.y));
                    self.positions[player.0 as usize] = ball.sub(dir.scale(0.25));
                    self.emit(ball, false);
                }
            }
        }
        Ok(())
    }

    fn out_of_bounds(&mut self, exit: Point, speed: f64) -> Result<(), ScriptError> {
        let Some(kicker) = self.controller else {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "out-of-bounds kick with no controller".to_string(),
            });
        };
        let origin = self.ball;
        if origin.dist(exit) < self.r_pz + 2.0 {
            return Err(ScriptError::Invalid {
                action: self.action_no,
                detail: "exit point too close for a clean loss".to_string(),
            });
        }
        let attack = self.attack(kicker);
        let own_end = -attack;
        let out = self.fly(exit, speed, Some(kicker), None);
        let loss_row = out.loss_row.ok_or_else(|| ScriptError::Invalid {
            action: self.action_no,
            detail: "kick never left the control zone before the boundary".to_string(),
        })?;
        let label = match out.crossed_goal {
            Some((sign, _)) if sign == own_end => EventName::OwnGoal,
            Some(_) => EventName::ShotOnTarget,
            None => {
                // which line was crossed decides the label: the attacker's
                // endline makes it a (wayward) shot, anything else a pass
                let crossed_active_endline =
                    exit.x.abs() > self.pitch.half_length() && exit.x.signum() == attack.signum();
                if crossed_active_endline {
                    if self.kick_on_target(origin, exit, attack, 0.25) {
                        EventName::ShotOnTarget
                    } else {
                        EventName::ShotOffTarget
                    }
                } else {
                    EventName::Pass
                }
            }
        };
        self.rows[loss_row].rec.event_name = Some(label);
        if self
            .pending_save
            .as_ref()
            .map(|ps| ps.keeper == kicker)
            .unwrap_or(false)
        {
            let loss_ts = self.ts(self.rows[loss_row].pos);
            self.resolve_pending_save(Some(SaveClosure {
                loss_row,
                loss_ts,
                crossed: out.crossed_goal,
            }));
        } else {
            self.resolve_pending_save(None);
        }
        self.controller = None;
        Ok(())
    }

    fn hold(&mut self, player: PlayerIdx, duration: f64) -> Result<(), ScriptError> {
        self.prepare_actor(player)?;
        let frames = (duration * self.rate).round() as usize;
        for _ in 0..frames {
            let ball = self.ball;
            self.emit(ball, false);
        }
        if self
            .pending_save
            .as_ref()
            .map(|ps| ps.keeper == player && duration >= 1.0)
            .unwrap_or(false)
        {
            self.resolve_pending_save(None);
        }
        Ok(())
    }

    fn close_period(&mut self, closing_dead_time: f64) {
        let crossing = self.crossing_into_dead;
        self.resolve_pending_save(None);
        let frames = ((closing_dead_time * self.rate).round() as usize).max(5);
        for _ in 0..frames {
            let ball = self.ball;
            self.emit(ball, true);
        }
        if crossing.is_some() {
            // a goal-bound final flight with no kickoff left to confirm it
            self.attach_dbe(DeadBallEvent::GoalUncertain);
        }
        self.crossing_into_dead = None;
        // relabel retaken kickoffs
        for i in 1..self.kickoffs.len() {
            if !self.kickoffs[i].reached_before {
                if let Some(spe_row) = self.kickoffs[i - 1].spe_row {
                    self.rows[spe_row].rec.from_set_piece = Some(SetPiece::IncorrectKickoff);
                }
                if let Some(dbe_row) = self.kickoffs[i].dbe_row {
                    self.rows[dbe_row].rec.dead_ball_event =
                        Some(DeadBallEvent::RefereeInterruption);
                }
            }
        }
        self.kickoffs.clear();
        self.controller = None;
        self.prev_change = None;
        self.pending_gain = None;
    }

    fn run(mut self) -> Result<(FrameSeries, GroundTruth), ScriptError> {
        for (pi, period) in self.script.periods.iter().enumerate() {
            self.period = (pi + 1) as u8;
            for i in 0..self.positions.len() {
                self.positions[i] = self.base_of(PlayerIdx(i as u32));
            }
            self.rows_at_last_restart = self.rows.len();
            for action in period.actions.clone() {
                match action {
                    Action::SetPiece {
                        kind,
                        executor,
                        duration,
                        spot,
                    } => {
                        let ex = self.idx(&executor);
                        self.set_piece(kind, ex, duration, spot)?;
                    }
                    Action::Pass { from, to, speed } => {
                        let (f, t) = (self.idx(&from), self.idx(&to));
                        self.pass(f, t, speed)?;
                    }
                    Action::Shot {
                        player,
                        target,
                        speed,
                    } => {
                        let p = self.idx(&player);
                        self.shot(p, Point::new(target.0, target.1), speed)?;
                    }
                    Action::Dribble {
                        player,
                        path,
                        speed,
                        push,
                    } => {
                        let p = self.idx(&player);
                        let pts: Vec<Point> =
                            path.iter().map(|(x, y)| Point::new(*x, *y)).collect();
                        self.dribble(p, &pts, speed, push)?;
                    }
                    Action::OutOfBounds { exit, speed } => {
                        self.out_of_bounds(Point::new(exit.0, exit.1), speed)?;
                    }
                    Action::Hold { player, duration } => {
                        let p = self.idx(&player);
                        self.hold(p, duration)?;
                    }
                }
                self.action_no += 1;
            }
            self.close_period(period.closing_dead_time);
        }

        self.rows.sort_by_key(|r| r.pos);
        let mut series = FrameSeries::new(self.rate, self.roster);
        series.has_status_signal = true;
        series.frames = self.frames;
        let mut period_starts = BTreeMap::new();
        for (p, pos) in series.period_starts() {
            period_starts.insert(p, series.frames[pos].timestamp);
        }
        Ok((
            series,
            GroundTruth {
                events: self.rows.into_iter().map(|r| r.rec).collect(),
                labels: self.labels,
                period_starts,
            },
        ))
    }
}

/// Generates a synthetic match: frames (with the script's noise model
/// applied, seeded) plus clean ground truth. Reproducible per seed.
pub fn generate_match(
    script: &MatchScript,
    seed: u64,
) -> Result<(FrameSeries, GroundTruth), ScriptError> {
    let (mut series, truth) = Generator::new(script)?.run()?;
    apply_noise(&mut series, &script.noise, seed);
    Ok((series, truth))
}

fn apply_noise(series: &mut FrameSeries, noise: &NoiseConfig, seed: u64) {
    let needs_noise = noise.sigma > 0.0
        || noise.ball_dropout > 0.0
        || noise.player_swaps > 0
        || noise.status_flickers > 0;
    if !needs_noise {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = series.frames.len();
    if noise.sigma > 0.0 {
        for f in series.frames.iter_mut() {
            if let Some(b) = f.ball.as_mut() {
                b.x += gaussian(&mut rng) * noise.sigma;
                b.y += gaussian(&mut rng) * noise.sigma;
            }
            for s in f.players.iter_mut() {
                s.pos.x += gaussian(&mut rng) * noise.sigma;
                s.pos.y += gaussian(&mut rng) * noise.sigma;
            }
        }
    }
    if noise.ball_dropout > 0.0 {
        for f in series.frames.iter_mut() {
            if f.ball_status == BallStatus::InPlay && rng.gen::<f64>() < noise.ball_dropout {
                f.ball = None;
            }
        }
    }
    for _ in 0..noise.player_swaps {
        if n == 0 {
            break;
        }
        let at = rng.gen_range(0..n);
        let len = noise.swap_frames.max(1) as usize;
        let players = series.frames[at].players.len();
        if players < 2 {
            continue;
        }
        let a = rng.gen_range(0..players);
        let b = rng.gen_range(0..players);
        if a == b {
            continue;
        }
        let (pa, pb) = (
            series.frames[at].players[a].player,
            series.frames[at].players[b].player,
        );
        for f in series.frames[at..(at + len).min(n)].iter_mut() {
            for s in f.players.iter_mut() {
                if s.player == pa {
                    s.player = pb;
                } else if s.player == pb {
                    s.player = pa;
                }
            }
        }
    }
    for _ in 0..noise.status_flickers {
        if n == 0 {
            break;
        }
        let at = rng.gen_range(0..n);
        let len = noise.flicker_frames.max(1) as usize;
        for f in series.frames[at..(at + len).min(n)].iter_mut() {
            f.ball_status = match f.ball_status {
                BallStatus::InPlay => BallStatus::Dead,
                BallStatus::Dead => BallStatus::InPlay,
            };
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Builds a long synthetic match (two periods of `half_minutes` each) with
/// a spread of pass chains and set pieces, for throughput measurements.
pub fn long_match(half_minutes: f64) -> MatchScript {
    let mk_players = |prefix: &str, sign: f64| -> Vec<ScriptPlayer> {
        let mut v = vec![ScriptPlayer {
            id: format!("{prefix}GK"),
            role: Role::Goalkeeper,
            base: (sign * 44.5, 0.0),
        }];
        let lines = [(36.0, 4), (22.0, 4), (8.0, 2)];
        let mut n = 1;
        for (depth, count) in lines {
            for i in 0..count {
                let y = -18.0 + 36.0 * (i as f64 + 0.5) / count as f64;
                v.push(ScriptPlayer {
                    id: format!("{prefix}{n}"),
                    role: Role::Outfield,
                    base: (sign * depth, y),
                });
                n += 1;
            }
        }
        v
    };
    let mut periods = Vec::new();
    for _ in 0..2 {
        let mut actions = vec![Action::SetPiece {
            kind: SetPieceKind::Kickoff,
            executor: "H9".into(),
            duration: 2.0,
            spot: None,
        }];
        let cycle_secs = 18.0;
        let cycles = ((half_minutes * 60.0) / cycle_secs).ceil() as usize;
        for c in 0..cycles {
            actions.push(Action::Pass {
                from: if c == 0 { "H9".into() } else { "H5".into() },
                to: "H6".into(),
                speed: 10.0,
            });
            actions.push(Action::Pass {
                from: "H6".into(),
                to: "H7".into(),
                speed: 10.0,
            });
            actions.push(Action::Hold {
                player: "H7".into(),
                duration: 1.0,
            });
            actions.push(Action::Pass {
                from: "H7".into(),
                to: "A5".into(),
                speed: 10.0,
            });
            actions.push(Action::Pass {
                from: "A5".into(),
                to: "A6".into(),
                speed: 9.0,
            });
            match c % 3 {
                0 => {
                    actions.push(Action::OutOfBounds {
                        exit: (10.0, 35.5),
                        speed: 9.0,
                    });
                    actions.push(Action::SetPiece {
                        kind: SetPieceKind::ThrowIn,
                        executor: "H5".into(),
                        duration: 2.0,
                        spot: None,
                    });
                    // carry the ball back infield so the thrower is not
                    // stranded on the sideline for the next cycle
                    actions.push(Action::Dribble {
                        player: "H5".into(),
                        path: vec![(-15.0, 8.0)],
                        speed: 7.0,
                        push: false,
                    });
                }
                1 => {
                    actions.push(Action::Pass {
                        from: "A6".into(),
                        to: "H5".into(),
                        speed: 9.0,
                    });
                    actions.push(Action::Hold {
                        player: "H5".into(),
                        duration: 1.0,
                    });
                    actions.push(Action::SetPiece {
                        kind: SetPieceKind::FreeKick,
                        executor: "H5".into(),
                        duration: 2.0,
                        spot: None,
                    });
                }
                _ => {
                    actions.push(Action::Pass {
                        from: "A6".into(),
                        to: "A7".into(),
                        speed: 9.0,
                    });
                    actions.push(Action::Pass {
                        from: "A7".into(),
                        to: "H5".into(),
                        speed: 9.0,
                    });
                }
            }
        }
        periods.push(ScriptPeriod {
            actions,
            closing_dead_time: 2.0,
        });
    }
    MatchScript {
        match_id: "long-synthetic".into(),
        pitch: ScriptPitch::default(),
        sample_rate: 25.0,
        teams: vec![
            ScriptTeam {
                id: "home".into(),
                attacks_positive_x: true,
                players: mk_players("H", -1.0),
            },
            ScriptTeam {
                id: "away".into(),
                attacks_positive_x: false,
                players: mk_players("A", 1.0),
            },
        ],
        periods,
        noise: NoiseConfig::default(),
    }
}
