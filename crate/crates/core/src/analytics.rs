//! Possession-informed aggregates: location heatmaps and pass-angle
//! profiles, emitted as data grids (rendering is out of scope).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventName, EventRecord};
use crate::frames::{FrameSeries, PlayerIdx};
use crate::geometry::PitchModel;
use crate::possession::{BallKinematics, ControlLabel};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("unknown player {0:?}")]
    UnknownPlayer(String),
    #[error("grid dimensions must be at least 1x1")]
    BadGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatmapMode {
    /// Frames where the player is in possession.
    InPossession,
    /// All in-play frames where the player has a position.
    AllInPlay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    PerMinute,
}

/// Binned location counts over the pitch rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub cells_x: usize,
    pub cells_y: usize,
    /// Row-major counts, y-major inner index.
    pub counts: Vec<u64>,
    pub qualifying_frames: u64,
    pub normalization: Normalization,
    /// Counts divided by qualifying minutes when normalization is
    /// per-minute; equal to `counts` otherwise.
    pub values: Vec<f64>,
}

/// Counts the frames where `player` qualifies under `mode`, binned by the
/// player's position.
pub fn possession_heatmap(
    series: &FrameSeries,
    timeline: &[ControlLabel],
    pitch: &PitchModel,
    player_id: &str,
    mode: HeatmapMode,
    cells_x: usize,
    cells_y: usize,
    normalization: Normalization,
) -> Result<HeatGrid, AnalyticsError> {
    if cells_x == 0 || cells_y == 0 {
        return Err(AnalyticsError::BadGrid);
    }
    let player = series
        .roster
        .lookup(player_id)
        .ok_or_else(|| AnalyticsError::UnknownPlayer(player_id.to_string()))?;
    let mut counts = vec![0u64; cells_x * cells_y];
    let mut qualifying = 0u64;
    for (i, frame) in series.frames.iter().enumerate() {
        let qualifies = match mode {
            HeatmapMode::InPossession => timeline[i] == ControlLabel::Possession(player),
            HeatmapMode::AllInPlay => {
                timeline[i] != ControlLabel::DeadBall && frame.position_of(player).is_some()
            }
        };
        if !qualifies {
            continue;
        }
        let Some(pos) = frame.position_of(player) else {
            continue;
        };
        qualifying += 1;
        let cx = bin(pos.x, pitch.length, cells_x);
        let cy = bin(pos.y, pitch.width, cells_y);
        counts[cx * cells_y + cy] += 1;
    }
    let minutes = qualifying as f64 / series.sample_rate / 60.0;
    let values = match normalization {
        Normalization::Raw => counts.iter().map(|c| *c as f64).collect(),
        Normalization::PerMinute => counts
            .iter()
            .map(|c| if minutes > 0.0 { *c as f64 / minutes } else { 0.0 })
            .collect(),
    };
    Ok(HeatGrid {
        cells_x,
        cells_y,
        counts,
        qualifying_frames: qualifying,
        normalization,
        values,
    })
}

fn bin(v: f64, extent: f64, cells: usize) -> usize {
    let t = ((v + extent / 2.0) / extent).clamp(0.0, 1.0);
    ((t * cells as f64) as usize).min(cells - 1)
}

/// One pass or cross by the profiled player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleRecord {
    pub frame_index: u64,
    pub event: EventName,
    /// Direction of the ball leaving the player, radians in (-pi, pi].
    pub outgoing_angle: f64,
    /// Direction of the ball arriving at the preceding reception, if any.
    pub incoming_angle: Option<f64>,
    /// Outcome of the pass: the next event label, when present.
    pub outcome: Option<EventName>,
    /// 0 at the player's own endline, 1 at the opposing endline.
    pub progress: f64,
    /// Smoothed ball path arc length until the next gain or dead ball (m).
    pub travel_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub player_id: String,
    pub records: Vec<AngleRecord>,
    pub bins: usize,
    pub outgoing_histogram: Vec<u64>,
    pub incoming_histogram: Vec<u64>,
}

/// Builds the incoming/outgoing trajectory-angle profile for a player's
/// passes and crosses.
#[allow(clippy::too_many_arguments)]
pub fn pass_angle_profile(
    series: &FrameSeries,
    kin: &BallKinematics,
    events: &[EventRecord],
    pitch: &PitchModel,
    player_id: &str,
    bins: usize,
) -> Result<AngleProfile, AnalyticsError> {
    let player: PlayerIdx = series
        .roster
        .lookup(player_id)
        .ok_or_else(|| AnalyticsError::UnknownPlayer(player_id.to_string()))?;
    let team = series.roster.team_of(player);
    let frame_pos: std::collections::HashMap<u64, usize> = series
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| (f.frame_index, i))
        .collect();

    let mut records = Vec::new();
    for (ei, e) in events.iter().enumerate() {
        if e.player_id != player_id {
            continue;
        }
        let Some(event @ (EventName::Pass | EventName::Cross)) = e.event_name else {
            continue;
        };
        let Some(&pos) = frame_pos.get(&e.frame_index) else {
            continue;
        };
        let Some(out_dir) = kin.at(pos).out_dir else {
            continue;
        };
        let outgoing_angle = normalize_angle(out_dir.y.atan2(out_dir.x));

        // incoming angle from the player's preceding reception
        let incoming_angle = events[..ei]
            .iter()
            .rev()
            .take_while(|p| p.period == e.period)
            .find(|p| {
                p.player_id == player_id
                    && matches!(
                        p.event_name,
                        Some(EventName::Reception)
                            | Some(EventName::Interception)
                            | Some(EventName::ReceptionFromLooseBall)
                    )
            })
            .and_then(|p| frame_pos.get(&p.frame_index))
            .and_then(|&rp| kin.at(rp).in_dir)
            .map(|d| normalize_angle(d.y.atan2(d.x)));

        // outcome and travel distance up to the next event (or dead ball)
        let next = events[ei + 1..].iter().find(|n| n.event_name.is_some());
        let outcome = next.and_then(|n| n.event_name);
        let end_pos = next
            .and_then(|n| frame_pos.get(&n.frame_index).copied())
            .unwrap_or(series.len() - 1);
        let travel_distance = arc_length(series, pos, end_pos);

        let attack = pitch.attack_sign(team, e.period);
        let progress = series.frames[pos]
            .position_of(player)
            .map(|p| ((attack * p.x + pitch.half_length()) / pitch.length).clamp(0.0, 1.0))
            .unwrap_or(0.5);

        records.push(AngleRecord {
            frame_index: e.frame_index,
            event,
            outgoing_angle,
            incoming_angle,
            outcome,
            progress,
            travel_distance,
        });
    }

    let bins = bins.max(1);
    let mut outgoing_histogram = vec![0u64; bins];
    let mut incoming_histogram = vec![0u64; bins];
    for r in &records {
        outgoing_histogram[angle_bin(r.outgoing_angle, bins)] += 1;
        if let Some(a) = r.incoming_angle {
            incoming_histogram[angle_bin(a, bins)] += 1;
        }
    }
    Ok(AngleProfile {
        player_id: player_id.to_string(),
        records,
        bins,
        outgoing_histogram,
        incoming_histogram,
    })
}

/// Maps atan2 output onto (-pi, pi] (the -pi edge folds to +pi).
fn normalize_angle(a: f64) -> f64 {
    if a <= -std::f64::consts::PI {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

fn angle_bin(a: f64, bins: usize) -> usize {
    let t = (a + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
    ((t * bins as f64) as usize).min(bins - 1)
}

/// Ball path arc length between two frame positions, skipping gaps.
fn arc_length(series: &FrameSeries, from: usize, to: usize) -> f64 {
    let mut total = 0.0;
    for i in from..to.min(series.len() - 1) {
        let (Some(a), Some(b)) = (series.frames[i].ball, series.frames[i + 1].ball) else {
            continue;
        };
        if series.frames[i + 1].ball_status == crate::frames::BallStatus::Dead
            && series.frames[i].ball_status == crate::frames::BallStatus::Dead
        {
            break; // the ball is being carried to a set piece
        }
        total += a.dist(b);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::synth::{generate_match, Action, SetPieceKind};

    fn script() -> crate::synth::MatchScript {
        let mut s = crate::synth::long_match(0.5);
        s.periods.truncate(1);
        s.periods[0].actions.truncate(6);
        s
    }

    #[test]
    fn heatmap_conserves_counts() {
        let (series, truth) = generate_match(&script(), 1).unwrap();
        let cfg = RunConfig::default();
        let pitch = crate::geometry::build_pitch(105.0, 68.0, vec![1.0, -1.0]).unwrap();
        let _ = cfg;
        let grid = possession_heatmap(
            &series,
            &truth.labels,
            &pitch,
            "H7",
            HeatmapMode::InPossession,
            21,
            14,
            Normalization::Raw,
        )
        .unwrap();
        let total: u64 = grid.counts.iter().sum();
        assert_eq!(total, grid.qualifying_frames);
        assert!(total > 0);

        let all = possession_heatmap(
            &series,
            &truth.labels,
            &pitch,
            "H7",
            HeatmapMode::AllInPlay,
            21,
            14,
            Normalization::Raw,
        )
        .unwrap();
        assert!(all.qualifying_frames >= grid.qualifying_frames);
    }

    #[test]
    fn unknown_player_is_an_error() {
        let (series, truth) = generate_match(&script(), 1).unwrap();
        let pitch = crate::geometry::build_pitch(105.0, 68.0, vec![1.0, -1.0]).unwrap();
        let err = possession_heatmap(
            &series,
            &truth.labels,
            &pitch,
            "NOBODY",
            HeatmapMode::InPossession,
            5,
            5,
            Normalization::Raw,
        )
        .unwrap_err();
        assert_eq!(err, AnalyticsError::UnknownPlayer("NOBODY".to_string()));
    }

    #[test]
    fn straight_pass_has_zero_outgoing_angle() {
        use crate::possession::compute_ball_kinematics;
        let (series, truth) = generate_match(&script(), 1).unwrap();
        let pitch = crate::geometry::build_pitch(105.0, 68.0, vec![1.0, -1.0]).unwrap();
        let kin = compute_ball_kinematics(&series);
        let profile =
            pass_angle_profile(&series, &kin, &truth.events, &pitch, "H6", 16).unwrap();
        assert!(!profile.records.is_empty());
        for r in &profile.records {
            assert!(r.outgoing_angle > -std::f64::consts::PI);
            assert!(r.outgoing_angle <= std::f64::consts::PI);
            assert!((0.0..=1.0).contains(&r.progress));
        }
        let total: u64 = profile.outgoing_histogram.iter().sum();
        assert_eq!(total, profile.records.len() as u64);
    }
}
