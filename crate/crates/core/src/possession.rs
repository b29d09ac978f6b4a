//! Ball kinematics, control frames, validated gains/losses and the
//! frame-level possession timeline — the backbone of the detector.
//!
//! A control frame is a frame where the possession condition (ball within
//! `r_pz` of a player) or the duel condition (two opposing players within
//! `r_dz` of the ball) holds; the duel condition prevails. Runs of control
//! frames are validated by requiring a change in ball direction or speed,
//! and gains/losses are derived from the surviving runs.

use serde::{Deserialize, Serialize};

use crate::config::PossessionConfig;
use crate::frames::{BallStatus, FrameSeries, PlayerIdx, Point, TeamIdx};
use crate::ingest;

/// Displacements below this (meters) leave the direction undefined.
pub const STATIC_DISPLACEMENT: f64 = 1e-6;

/// Per-frame ball motion quantities. Incoming parts use the previous frame,
/// outgoing parts the next frame; both are confined to in-play runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameKinematics {
    /// Unit direction of travel into this frame.
    pub in_dir: Option<Point>,
    /// Unit direction of travel out of this frame.
    pub out_dir: Option<Point>,
    /// Speed into this frame (m/s).
    pub in_speed: Option<f64>,
    /// Speed out of this frame (m/s).
    pub out_speed: Option<f64>,
    /// Ball displacement from this frame to the next (m).
    pub displacement: Option<f64>,
}

/// Kinematics for every frame position of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct BallKinematics {
    pub per_frame: Vec<FrameKinematics>,
}

impl BallKinematics {
    pub fn at(&self, pos: usize) -> &FrameKinematics {
        &self.per_frame[pos]
    }
}

/// Computes finite-difference ball kinematics over in-play runs. The first
/// and last frame of each run have undefined incoming/outgoing parts; static
/// displacements leave directions undefined.
pub fn compute_ball_kinematics(series: &FrameSeries) -> BallKinematics {
    let mut per_frame = vec![FrameKinematics::default(); series.len()];
    let rate = series.sample_rate;
    for run in ingest::inplay_runs(series) {
        for w in run.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j != i + 1 {
                continue;
            }
            let a = series.frames[i].ball.unwrap();
            let b = series.frames[j].ball.unwrap();
            let delta = b.sub(a);
            let dist = delta.norm();
            let dir = delta.unit(STATIC_DISPLACEMENT);
            per_frame[i].displacement = Some(dist);
            per_frame[i].out_speed = Some(dist * rate);
            per_frame[i].out_dir = dir;
            per_frame[j].in_speed = Some(dist * rate);
            per_frame[j].in_dir = dir;
        }
    }
    BallKinematics { per_frame }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuelEntry {
    pub player: PlayerIdx,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlKind {
    Possession { player: PlayerIdx, distance: f64 },
    Duel { participants: Vec<DuelEntry> },
}

/// A frame where a player (or duel group) is deemed in control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFrame {
    /// Position into the frame series.
    pub pos: usize,
    pub frame_index: u64,
    pub kind: ControlKind,
}

impl ControlFrame {
    /// The single controller for possession frames.
    pub fn possession_player(&self) -> Option<PlayerIdx> {
        match &self.kind {
            ControlKind::Possession { player, .. } => Some(*player),
            ControlKind::Duel { .. } => None,
        }
    }

    pub fn is_duel(&self) -> bool {
        matches!(self.kind, ControlKind::Duel { .. })
    }
}

/// Applies the possession/duel conditions to every in-play frame.
///
/// Possession goes to the closest player within `r_pz` (roster order breaks
/// exact ties); a duel needs at least two players of opposing teams within
/// `r_dz` of the ball and overrides possession. Players without a tracked
/// position at a frame are excluded at that frame.
pub fn detect_control_frames(
    series: &FrameSeries,
    cfg: &PossessionConfig,
) -> Vec<ControlFrame> {
    let mut out = Vec::new();
    for run in ingest::inplay_runs(series) {
        for &i in &run {
            let frame = &series.frames[i];
            let ball = frame.ball.unwrap();
            let mut nearest: Option<(PlayerIdx, f64)> = None;
            let mut in_duel_zone: Vec<DuelEntry> = Vec::new();
            for s in &frame.players {
                let d = s.pos.dist(ball);
                if d <= cfg.r_dz {
                    in_duel_zone.push(DuelEntry {
                        player: s.player,
                        distance: d,
                    });
                }
                if d <= cfg.r_pz {
                    let better = match nearest {
                        None => true,
                        Some((p, nd)) => d < nd || (d == nd && s.player < p),
                    };
                    if better {
                        nearest = Some((s.player, d));
                    }
                }
            }
            let teams_in_duel = {
                let mut t: Option<TeamIdx> = None;
                let mut opposed = false;
                for e in &in_duel_zone {
                    let team = series.roster.team_of(e.player);
                    match t {
                        None => t = Some(team),
                        Some(existing) if existing != team => {
                            opposed = true;
                            break;
                        }
                        _ => {}
                    }
                }
                opposed
            };
            if teams_in_duel {
                in_duel_zone.sort_by(|a, b| {
                    a.distance
                        .partial_cmp(&b.distance)
                        .unwrap()
                        .then(a.player.cmp(&b.player))
                });
                out.push(ControlFrame {
                    pos: i,
                    frame_index: frame.frame_index,
                    kind: ControlKind::Duel {
                        participants: in_duel_zone,
                    },
                });
            } else if let Some((player, distance)) = nearest {
                out.push(ControlFrame {
                    pos: i,
                    frame_index: frame.frame_index,
                    kind: ControlKind::Possession { player, distance },
                });
            }
        }
    }
    out
}

/// Identity of a run of control frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RunIdent {
    Player(PlayerIdx),
    Duel,
}

fn run_ident(cf: &ControlFrame) -> RunIdent {
    match &cf.kind {
        ControlKind::Possession { player, .. } => RunIdent::Player(*player),
        ControlKind::Duel { .. } => RunIdent::Duel,
    }
}

/// Maximal stretches of control frames sharing the same identity
/// (possession by one player, or duel). Gaps of non-control frames do not
/// break a run; only a control frame of a different identity does.
fn group_runs(control: &[ControlFrame]) -> Vec<(RunIdent, std::ops::Range<usize>)> {
    let mut runs: Vec<(RunIdent, std::ops::Range<usize>)> = Vec::new();
    for (i, cf) in control.iter().enumerate() {
        let ident = run_ident(cf);
        match runs.last_mut() {
            Some((id, range)) if *id == ident => range.end = i + 1,
            _ => runs.push((ident, i..i + 1)),
        }
    }
    runs
}

/// Deletes possession runs during which neither the ball direction nor the
/// ball speed changed — the ball merely traveled through the possession
/// zone. Undefined directions (static or appearing ball) count as changed;
/// duel runs are always kept.
pub fn validate_gains(
    control: Vec<ControlFrame>,
    kin: &BallKinematics,
    cfg: &PossessionConfig,
) -> Vec<ControlFrame> {
    let runs = group_runs(&control);
    let mut keep = vec![true; control.len()];
    for (ident, range) in runs {
        if ident == RunIdent::Duel {
            continue;
        }
        let first = &control[range.start];
        let last = &control[range.end - 1];
        let direction_changed = match (kin.at(first.pos).in_dir, kin.at(last.pos).out_dir) {
            (Some(d0), Some(d1)) => d0.dot(d1) < cfg.eps_theta,
            _ => true,
        };
        let speed_changed = control[range.clone()].iter().any(|cf| {
            let k = kin.at(cf.pos);
            match (k.in_speed, k.out_speed) {
                (Some(v0), Some(v1)) => (v0 - v1).abs() > cfg.eps_v,
                _ => false,
            }
        });
        if !direction_changed && !speed_changed {
            for slot in keep[range].iter_mut() {
                *slot = false;
            }
        }
    }
    control
        .into_iter()
        .zip(keep)
        .filter_map(|(cf, k)| k.then_some(cf))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Gain,
    Loss,
}

/// A discrete possession gain or loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlChange {
    pub kind: ChangeKind,
    /// Position into the frame series.
    pub pos: usize,
    pub frame_index: u64,
    pub period: u8,
    pub timestamp: f64,
    pub player: PlayerIdx,
    pub team: TeamIdx,
    /// The controlling span involved a duel.
    pub duel_involved: bool,
    /// A dead-ball interval separates this gain from the previous controller.
    pub after_dead: bool,
}

/// A validated span of control by one effective controller.
#[derive(Debug, Clone)]
struct ControlSpan {
    player: PlayerIdx,
    duel_involved: bool,
    /// Indices into the validated control-frame slice.
    frames: Vec<usize>,
}

/// Resolves runs to effective controllers and merges consecutive spans with
/// the same controller (a duel resolved to a player extends that player's
/// span; runs separated only by deleted false positives fuse back together).
fn build_spans(control: &[ControlFrame]) -> Vec<ControlSpan> {
    let mut spans: Vec<ControlSpan> = Vec::new();
    for (ident, range) in group_runs(control) {
        let (player, duel) = match ident {
            RunIdent::Player(p) => (p, false),
            RunIdent::Duel => {
                // the gain is credited to the closest participant on the
                // last duel frame
                let last = &control[range.end - 1];
                let ControlKind::Duel { participants } = &last.kind else {
                    unreachable!()
                };
                (participants[0].player, true)
            }
        };
        match spans.last_mut() {
            Some(span) if span.player == player => {
                span.duel_involved |= duel;
                span.frames.extend(range);
            }
            _ => spans.push(ControlSpan {
                player,
                duel_involved: duel,
                frames: range.collect(),
            }),
        }
    }
    spans
}

/// Derives gains and losses from validated control frames.
///
/// A gain is emitted at the first control frame of each span whose player
/// differs from the previous controller. A loss is emitted at the last
/// control frame of a span where the ball is outside the player's
/// possession zone on the next frame with displacement above `eps_s`,
/// provided the player is not the controller of the next span.
pub fn detect_control_changes(
    series: &FrameSeries,
    control: &[ControlFrame],
    kin: &BallKinematics,
    cfg: &PossessionConfig,
) -> Vec<ControlChange> {
    let spans = build_spans(control);
    // prefix count of dead frames for O(1) "dead frames in range" queries
    let mut dead_prefix = vec![0usize; series.len() + 1];
    for (i, f) in series.frames.iter().enumerate() {
        dead_prefix[i + 1] = dead_prefix[i] + (f.ball_status == BallStatus::Dead) as usize;
    }
    let dead_between = |a: usize, b: usize| -> bool {
        if b <= a {
            return false;
        }
        dead_prefix[b] - dead_prefix[a + 1] > 0
    };

    let mut changes = Vec::new();
    let mut prev_controller: Option<PlayerIdx> = None;
    let mut prev_last_pos: Option<usize> = None;
    for (si, span) in spans.iter().enumerate() {
        let first_cf = &control[span.frames[0]];
        let last_cf = &control[*span.frames.last().unwrap()];
        let team = series.roster.team_of(span.player);

        if prev_controller != Some(span.player) {
            let after_dead = match prev_last_pos {
                Some(p) => dead_between(p, first_cf.pos),
                None => dead_prefix[first_cf.pos + 1] > 0,
            };
            let f = &series.frames[first_cf.pos];
            changes.push(ControlChange {
                kind: ChangeKind::Gain,
                pos: first_cf.pos,
                frame_index: f.frame_index,
                period: f.period,
                timestamp: f.timestamp,
                player: span.player,
                team,
                duel_involved: first_cf.is_duel(),
                after_dead,
            });
        }

        // find the last frame in the span where the exit condition fires
        let mut loss_pos: Option<usize> = None;
        for &ci in &span.frames {
            let cf = &control[ci];
            let next = cf.pos + 1;
            if next >= series.len() {
                continue;
            }
            let Some(disp) = kin.at(cf.pos).displacement else {
                continue;
            };
            if disp <= cfg.eps_s {
                continue;
            }
            let nf = &series.frames[next];
            let (Some(ball), Some(ppos)) = (nf.ball, nf.position_of(span.player)) else {
                continue;
            };
            if ball.dist(ppos) > cfg.r_pz {
                loss_pos = Some(cf.pos);
            }
        }
        let next_controller = spans.get(si + 1).map(|s| s.player);
        if let Some(pos) = loss_pos {
            if next_controller != Some(span.player) {
                let f = &series.frames[pos];
                changes.push(ControlChange {
                    kind: ChangeKind::Loss,
                    pos,
                    frame_index: f.frame_index,
                    period: f.period,
                    timestamp: f.timestamp,
                    player: span.player,
                    team,
                    duel_involved: last_cf.is_duel(),
                    after_dead: false,
                });
            }
        }

        prev_controller = Some(span.player);
        prev_last_pos = Some(last_cf.pos);
    }
    changes.sort_by_key(|c| (c.pos, c.kind == ChangeKind::Loss, c.player));
    changes
}

/// The four ball-control labels. Exactly one applies to every frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLabel {
    DeadBall,
    NoPossession,
    Possession(PlayerIdx),
    Duel,
}

/// Labels every frame with one of {dead ball, no possession, possession,
/// duel}, agreeing with the validated control frames.
pub fn build_possession_timeline(
    series: &FrameSeries,
    control: &[ControlFrame],
) -> Vec<ControlLabel> {
    let mut labels = vec![ControlLabel::NoPossession; series.len()];
    for (i, f) in series.frames.iter().enumerate() {
        if f.ball_status == BallStatus::Dead {
            labels[i] = ControlLabel::DeadBall;
        }
    }
    for cf in control {
        labels[cf.pos] = match &cf.kind {
            ControlKind::Possession { player, .. } => ControlLabel::Possession(*player),
            ControlKind::Duel { .. } => ControlLabel::Duel,
        };
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{Frame, PlayerSample, Role, Roster};

    /// Builds a series from per-frame ball positions and static players.
    fn make_series(
        ball: &[Option<Point>],
        players: &[(&str, &str, Point)],
        rate: f64,
    ) -> FrameSeries {
        let mut roster = Roster::new();
        let mut samples = Vec::new();
        for (id, team, pos) in players {
            let t = roster.intern_team(team).unwrap();
            let p = roster.intern_player(id, t, Role::Outfield).unwrap();
            samples.push((p, *pos));
        }
        let mut s = FrameSeries::new(rate, roster);
        s.has_status_signal = true;
        for (i, b) in ball.iter().enumerate() {
            s.frames.push(Frame {
                frame_index: i as u64,
                period: 1,
                timestamp: i as f64 / rate,
                ball: *b,
                ball_status: if b.is_some() {
                    BallStatus::InPlay
                } else {
                    BallStatus::Dead
                },
                players: samples
                    .iter()
                    .map(|(p, pos)| PlayerSample {
                        player: *p,
                        pos: *pos,
                        tracked: true,
                    })
                    .collect(),
            });
        }
        s
    }

    fn moving_ball(start: Point, step: Point, n: usize) -> Vec<Option<Point>> {
        (0..n)
            .map(|i| Some(start.add(step.scale(i as f64))))
            .collect()
    }

    #[test]
    fn static_ball_has_zero_speeds_and_no_direction() {
        let s = make_series(
            &[Some(Point::new(0.0, 0.0)); 3].to_vec(),
            &[],
            25.0,
        );
        let kin = compute_ball_kinematics(&s);
        assert_eq!(kin.at(1).displacement, Some(0.0));
        assert_eq!(kin.at(1).in_speed, Some(0.0));
        assert_eq!(kin.at(1).out_speed, Some(0.0));
        assert_eq!(kin.at(1).in_dir, None);
        assert_eq!(kin.at(1).out_dir, None);
    }

    #[test]
    fn constant_velocity_speed_and_direction() {
        // 0.2 m/frame at 25 Hz -> 5 m/s along +x
        let s = make_series(
            &moving_ball(Point::new(0.0, 0.0), Point::new(0.2, 0.0), 5),
            &[],
            25.0,
        );
        let kin = compute_ball_kinematics(&s);
        let k = kin.at(2);
        assert!((k.in_speed.unwrap() - 5.0).abs() < 1e-12);
        assert!((k.out_speed.unwrap() - 5.0).abs() < 1e-12);
        let d = k.in_dir.unwrap();
        assert!((d.x - 1.0).abs() < 1e-12 && d.y.abs() < 1e-12);
        // run boundaries are undefined
        assert_eq!(kin.at(0).in_dir, None);
        assert_eq!(kin.at(4).out_dir, None);
    }

    #[test]
    fn reversal_has_opposite_directions() {
        let ball = vec![
            Some(Point::new(0.0, 0.0)),
            Some(Point::new(0.5, 0.0)),
            Some(Point::new(0.0, 0.0)),
        ];
        let s = make_series(&ball, &[], 25.0);
        let kin = compute_ball_kinematics(&s);
        let k = kin.at(1);
        let dot = k.in_dir.unwrap().dot(k.out_dir.unwrap());
        assert!((dot + 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_player_within_pz_takes_possession() {
        let s = make_series(
            &[Some(Point::new(0.0, 0.0)); 3].to_vec(),
            &[("P1", "home", Point::new(0.3, 0.0))],
            25.0,
        );
        let cfg = PossessionConfig {
            r_pz: 0.5,
            r_dz: 1.0,
            ..Default::default()
        };
        let control = detect_control_frames(&s, &cfg);
        assert_eq!(control.len(), 3);
        assert!(control
            .iter()
            .all(|cf| cf.possession_player() == Some(PlayerIdx(0))));
    }

    #[test]
    fn two_opponents_within_dz_make_a_duel() {
        let s = make_series(
            &[Some(Point::new(0.0, 0.0))],
            &[
                ("P1", "home", Point::new(0.8, 0.0)),
                ("Q1", "away", Point::new(-0.9, 0.0)),
            ],
            25.0,
        );
        let cfg = PossessionConfig {
            r_pz: 0.5,
            r_dz: 1.0,
            ..Default::default()
        };
        let control = detect_control_frames(&s, &cfg);
        assert_eq!(control.len(), 1);
        match &control[0].kind {
            ControlKind::Duel { participants } => {
                assert_eq!(participants.len(), 2);
                assert_eq!(participants[0].player, PlayerIdx(0)); // closer
            }
            other => panic!("expected duel, got {other:?}"),
        }
    }

    #[test]
    fn closest_teammate_wins_possession() {
        let s = make_series(
            &[Some(Point::new(0.0, 0.0))],
            &[
                ("P1", "home", Point::new(0.45, 0.0)),
                ("P2", "home", Point::new(0.4, 0.0)),
            ],
            25.0,
        );
        let cfg = PossessionConfig {
            r_pz: 0.5,
            r_dz: 1.0,
            ..Default::default()
        };
        let control = detect_control_frames(&s, &cfg);
        // brute force: nearest of all players within the zone
        let ball = Point::new(0.0, 0.0);
        let nearest = s.frames[0]
            .players
            .iter()
            .filter(|p| p.pos.dist(ball) <= cfg.r_pz)
            .min_by(|a, b| a.pos.dist(ball).partial_cmp(&b.pos.dist(ball)).unwrap())
            .unwrap()
            .player;
        assert_eq!(control[0].possession_player(), Some(nearest));
        assert_eq!(s.roster.player_id(nearest), "P2");
    }

    #[test]
    fn flythrough_run_is_deleted() {
        // ball crosses a static player's PZ in a straight line at constant
        // speed; the whole run is a false positive
        let ball = moving_ball(Point::new(-2.0, 0.0), Point::new(0.4, 0.0), 11);
        let s = make_series(&ball, &[("P1", "home", Point::new(0.0, 0.3))], 25.0);
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = detect_control_frames(&s, &cfg);
        assert!(!control.is_empty());
        let kept = validate_gains(control, &kin, &cfg);
        assert!(kept.is_empty());
    }

    #[test]
    fn ninety_degree_deflection_is_kept() {
        // ball arrives along +x, leaves along +y at the player
        let mut ball: Vec<Option<Point>> = Vec::new();
        for i in 0..5 {
            ball.push(Some(Point::new(-1.6 + 0.4 * i as f64, 0.0)));
        }
        for i in 1..5 {
            ball.push(Some(Point::new(0.0, 0.4 * i as f64)));
        }
        let s = make_series(&ball, &[("P1", "home", Point::new(0.0, 0.2))], 25.0);
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = detect_control_frames(&s, &cfg);
        let kept = validate_gains(control.clone(), &kin, &cfg);
        assert_eq!(kept.len(), control.len());
    }

    #[test]
    fn dead_stop_inside_pz_is_kept() {
        // incoming 6 m/s, outgoing 0
        let mut ball: Vec<Option<Point>> = Vec::new();
        for i in 0..6 {
            ball.push(Some(Point::new(-1.2 + 0.24 * i as f64, 0.0)));
        }
        for _ in 0..5 {
            ball.push(Some(Point::new(0.24, 0.0)));
        }
        let s = make_series(&ball, &[("P1", "home", Point::new(0.3, 0.0))], 25.0);
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = detect_control_frames(&s, &cfg);
        let kept = validate_gains(control.clone(), &kin, &cfg);
        assert_eq!(kept.len(), control.len());
    }

    /// Scenario helpers for gain/loss tests: one controllable ball path and
    /// two players at fixed positions.
    fn changes_for(
        ball: Vec<Option<Point>>,
        players: &[(&str, &str, Point)],
    ) -> (FrameSeries, Vec<ControlChange>) {
        let s = make_series(&ball, players, 25.0);
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = detect_control_frames(&s, &cfg);
        let kept = validate_gains(control, &kin, &cfg);
        let changes = detect_control_changes(&s, &kept, &kin, &cfg);
        (s, changes)
    }

    #[test]
    fn static_ball_walkaway_is_not_a_loss() {
        // P1 receives, then walks away from the static ball; the ball later
        // leaves his (moving) PZ but never moves itself
        let mut roster = Roster::new();
        let home = roster.intern_team("home").unwrap();
        let p1 = roster.intern_player("P1", home, Role::Outfield).unwrap();
        let mut s = FrameSeries::new(25.0, roster);
        s.has_status_signal = true;
        for i in 0..20u64 {
            // ball rolls in over frames 0..4, then rests at the origin
            let ball = if i < 4 {
                Point::new(-1.0 + 0.25 * i as f64, 0.0)
            } else {
                Point::new(0.0, 0.0)
            };
            // P1 stands by the ball until frame 10, then walks off
            let px = if i <= 10 { 0.2 } else { 0.2 + 0.4 * (i - 10) as f64 };
            s.frames.push(Frame {
                frame_index: i,
                period: 1,
                timestamp: i as f64 / 25.0,
                ball: Some(ball),
                ball_status: BallStatus::InPlay,
                players: vec![PlayerSample {
                    player: p1,
                    pos: Point::new(px, 0.0),
                    tracked: true,
                }],
            });
        }
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = validate_gains(detect_control_frames(&s, &cfg), &kin, &cfg);
        let changes = detect_control_changes(&s, &control, &kin, &cfg);
        assert_eq!(changes.len(), 1, "{changes:?}");
        assert_eq!(changes[0].kind, ChangeKind::Gain);
        assert_eq!(changes[0].player, p1);
    }

    #[test]
    fn dribble_regain_is_not_a_loss() {
        // the ball leaves P1's PZ and re-enters it with no other control
        // frame in between, then is kicked on to an opponent: exactly one
        // loss, at the final kick
        let mut ball: Vec<Option<Point>> = Vec::new();
        for _ in 0..3 {
            ball.push(Some(Point::new(2.0, 0.0))); // at P1's feet
        }
        for i in 1..=6 {
            ball.push(Some(Point::new(2.0 + 0.5 * i as f64, 0.0))); // out to 5.0
        }
        for i in 1..=6 {
            ball.push(Some(Point::new(5.0 - 0.5 * i as f64, 0.0))); // back to 2.0
        }
        for _ in 0..10 {
            ball.push(Some(Point::new(2.0, 0.0)));
        }
        for i in 1..=13 {
            ball.push(Some(Point::new(2.0 + 0.77 * i as f64, 0.0))); // to Q1
        }
        for _ in 0..5 {
            ball.push(Some(Point::new(12.0, 0.0)));
        }
        let (s, changes) = changes_for(
            ball,
            &[
                ("P1", "home", Point::new(2.0, 0.0)),
                ("Q1", "away", Point::new(12.1, 0.0)),
            ],
        );
        let p1 = s.roster.lookup("P1").unwrap();
        let q1 = s.roster.lookup("Q1").unwrap();
        let p1_changes: Vec<ChangeKind> = changes
            .iter()
            .filter(|c| c.player == p1)
            .map(|c| c.kind)
            .collect();
        assert_eq!(
            p1_changes,
            vec![ChangeKind::Gain, ChangeKind::Loss],
            "{changes:?}"
        );
        // the loss is at the final kick, not at the dribble push
        let loss = changes
            .iter()
            .find(|c| c.kind == ChangeKind::Loss && c.player == p1)
            .unwrap();
        assert!(loss.pos >= 25, "loss at {}", loss.pos);
        assert!(changes
            .iter()
            .any(|c| c.kind == ChangeKind::Gain && c.player == q1));
    }

    #[test]
    fn kick_to_opponent_is_loss_then_gain() {
        let mut ball: Vec<Option<Point>> = Vec::new();
        for _ in 0..5 {
            ball.push(Some(Point::new(0.0, 0.0)));
        }
        for i in 1..=10 {
            ball.push(Some(Point::new(0.8 * i as f64, 0.0)));
        }
        for _ in 0..5 {
            ball.push(Some(Point::new(8.0, 0.0)));
        }
        let (s, changes) = changes_for(
            ball,
            &[
                ("P1", "home", Point::new(0.1, 0.0)),
                ("Q1", "away", Point::new(8.1, 0.0)),
            ],
        );
        let p1 = s.roster.lookup("P1").unwrap();
        let q1 = s.roster.lookup("Q1").unwrap();
        let kinds: Vec<(ChangeKind, PlayerIdx)> =
            changes.iter().map(|c| (c.kind, c.player)).collect();
        assert_eq!(
            kinds,
            vec![
                (ChangeKind::Gain, p1),
                (ChangeKind::Loss, p1),
                (ChangeKind::Gain, q1),
            ]
        );
        // the loss is stamped at the last frame where the exit condition
        // fires, i.e. the last control frame before the ball leaves the PZ
        let loss = &changes[1];
        assert!(loss.pos >= 5 && loss.pos <= 6, "loss at {}", loss.pos);
    }

    #[test]
    fn timeline_partitions_all_frames() {
        let mut ball: Vec<Option<Point>> = Vec::new();
        ball.push(None);
        for _ in 0..4 {
            ball.push(Some(Point::new(0.0, 0.0)));
        }
        ball.push(None);
        let s = make_series(&ball, &[("P1", "home", Point::new(0.2, 0.0))], 25.0);
        let cfg = PossessionConfig::default();
        let kin = compute_ball_kinematics(&s);
        let control = validate_gains(detect_control_frames(&s, &cfg), &kin, &cfg);
        let labels = build_possession_timeline(&s, &control);
        assert_eq!(labels.len(), s.len());
        assert_eq!(labels[0], ControlLabel::DeadBall);
        assert_eq!(labels[5], ControlLabel::DeadBall);
        assert!(matches!(labels[2], ControlLabel::Possession(_)));
    }
}
