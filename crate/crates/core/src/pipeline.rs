//! End-to-end detection pipeline: normalized frames in, possession timeline
//! and events table out, with a machine-readable run report.
//!
//! The pipeline is a single forward pass per match: status inference,
//! smoothing, kinematics, control frames, validation, control changes,
//! dead-interval resolution, event classification and table assembly.
//! Identical config and input produce byte-identical outputs; only the
//! wall-time field of the report varies.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::events::{
    assemble_events_table, classify_pass_cross_reception, classify_shot_save, EventRecord,
};
use crate::frames::{FrameSeries, Role};
use crate::geometry::{build_pitch, GeometryError, PitchModel};
use crate::ingest::{infer_ball_status, smooth_ball_positions};
use crate::possession::{
    build_possession_timeline, compute_ball_kinematics, detect_control_changes,
    detect_control_frames, validate_gains, ControlLabel,
};
use crate::setpiece::{
    audit_kickoffs, evaluate_triggers, goal_crossing_into_interval, resolve_set_piece,
    segment_dead_intervals, Confidence, SetPiece, SetPieceResolution,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("teams in tracking data do not match the configured teams: {0}")]
    TeamMismatch(String),
    #[error("cannot infer attack directions: {0}")]
    AttackInference(String),
}

/// Per-period tallies for the run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period: u8,
    pub start_timestamp: f64,
    pub kickoffs: u64,
    pub goals: u64,
    pub incorrect_kickoffs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frames: usize,
    pub sample_rate: f64,
    pub players: usize,
    pub category_counts: BTreeMap<String, u64>,
    pub periods: Vec<PeriodReport>,
    pub low_confidence_rows: u64,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn period_starts(&self) -> BTreeMap<u8, f64> {
        self.periods
            .iter()
            .map(|p| (p.period, p.start_timestamp))
            .collect()
    }
}

/// Everything the detection pass produces.
#[derive(Debug, Clone)]
pub struct DetectOutput {
    pub events: Vec<EventRecord>,
    pub timeline: Vec<ControlLabel>,
    pub resolutions: Vec<SetPieceResolution>,
    pub report: RunReport,
    /// The smoothed series the outputs refer to.
    pub series: FrameSeries,
}

/// Resolves team attack directions from config, or infers them from mean
/// goalkeeper positions in period 1 (keepers stand near their own goal).
fn attack_signs(series: &FrameSeries, cfg: &RunConfig) -> Result<Vec<f64>, PipelineError> {
    let team_count = series.roster.team_count();
    if !cfg.pitch.teams.is_empty() {
        let mut signs = vec![0.0; team_count];
        for td in &cfg.pitch.teams {
            let Some(idx) = series.roster.team_by_name(&td.id) else {
                return Err(PipelineError::TeamMismatch(td.id.clone()));
            };
            signs[idx.0 as usize] = if td.attacks_positive_x { 1.0 } else { -1.0 };
        }
        if signs.iter().any(|s| *s == 0.0) {
            return Err(PipelineError::TeamMismatch(
                "config does not cover every tracked team".to_string(),
            ));
        }
        return Ok(signs);
    }
    // inference: a keeper's mean x in period 1 marks the defended end
    let mut sums = vec![(0.0f64, 0u64); team_count];
    for frame in series.frames.iter().filter(|f| f.period == 1) {
        for s in &frame.players {
            let meta = series.roster.player(s.player);
            if meta.role == Role::Goalkeeper {
                let slot = &mut sums[meta.team.0 as usize];
                slot.0 += s.pos.x;
                slot.1 += 1;
            }
        }
    }
    let mut signs = Vec::with_capacity(team_count);
    for (team, (sum, n)) in sums.iter().enumerate() {
        if *n == 0 {
            return Err(PipelineError::AttackInference(format!(
                "no goalkeeper samples for team {:?} in period 1",
                series.roster.team_name(crate::frames::TeamIdx(team as u8))
            )));
        }
        // defending the -x end means attacking +x
        signs.push(if sum / (*n as f64) < 0.0 { 1.0 } else { -1.0 });
    }
    if team_count == 2 && signs[0] == signs[1] {
        return Err(PipelineError::AttackInference(
            "both goalkeepers average on the same half".to_string(),
        ));
    }
    Ok(signs)
}

/// Runs the full detection pipeline on a normalized series.
pub fn detect(mut series: FrameSeries, cfg: &RunConfig) -> Result<DetectOutput, PipelineError> {
    let started = Instant::now();
    cfg.validate()?;

    infer_ball_status(&mut series, cfg.status_debounce_frames);
    let signs = attack_signs(&series, cfg)?;
    let mut pitch: PitchModel = build_pitch(cfg.pitch.length, cfg.pitch.width, signs)?;
    pitch.shot_zone_depth = cfg.pitch.shot_zone_depth;
    pitch.zone_split_half_width = cfg.pitch.zone_split_half_width;
    pitch.throwin_outward = cfg.pitch.throwin_outward;

    let series = smooth_ball_positions(&series, &cfg.smoothing);
    let kin = compute_ball_kinematics(&series);
    let control = detect_control_frames(&series, &cfg.possession);
    let control = validate_gains(control, &kin, &cfg.possession);
    let changes = detect_control_changes(&series, &control, &kin, &cfg.possession);
    let timeline = build_possession_timeline(&series, &control);

    let intervals = segment_dead_intervals(&series, &timeline);
    let mut resolutions: Vec<SetPieceResolution> = intervals
        .iter()
        .enumerate()
        .map(|(i, interval)| {
            let activations = evaluate_triggers(&series, interval, &pitch, &cfg.triggers);
            let crossing = goal_crossing_into_interval(
                &series,
                &kin,
                interval,
                &pitch,
                cfg.events.on_target_widen,
            );
            resolve_set_piece(
                &series,
                interval,
                i,
                &activations,
                &pitch,
                &cfg.possession,
                &cfg.triggers,
                crossing,
            )
        })
        .collect();
    audit_kickoffs(&mut resolutions, &series, &intervals, &pitch);

    let mut labeled = classify_shot_save(
        &series,
        &kin,
        &changes,
        &intervals,
        &resolutions,
        &pitch,
        &cfg.events,
        &cfg.possession,
    );
    classify_pass_cross_reception(&series, &mut labeled, &pitch);
    let events = assemble_events_table(&series, &labeled, &intervals, &resolutions);

    let report = build_report(&series, &events, started);
    Ok(DetectOutput {
        events,
        timeline,
        resolutions,
        report,
        series,
    })
}

fn build_report(series: &FrameSeries, events: &[EventRecord], started: Instant) -> RunReport {
    let mut category_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_period: BTreeMap<u8, (u64, u64, u64)> = BTreeMap::new();
    let mut low = 0u64;
    for e in events {
        if let Some(n) = e.event_name {
            *category_counts.entry(n.label().to_string()).or_default() += 1;
        }
        if let Some(d) = e.dead_ball_event {
            *category_counts.entry(d.label().to_string()).or_default() += 1;
            if d == crate::setpiece::DeadBallEvent::Goal {
                per_period.entry(e.period).or_default().1 += 1;
            }
        }
        if let Some(s) = e.from_set_piece {
            *category_counts.entry(s.label().to_string()).or_default() += 1;
            match s {
                SetPiece::Kickoff => per_period.entry(e.period).or_default().0 += 1,
                SetPiece::IncorrectKickoff => {
                    let slot = per_period.entry(e.period).or_default();
                    slot.0 += 1;
                    slot.2 += 1;
                }
                _ => {}
            }
        }
        if e.confidence == Confidence::Low {
            low += 1;
        }
    }
    let periods = series
        .period_starts()
        .into_iter()
        .map(|(p, pos)| {
            let (kickoffs, goals, incorrect) = per_period.get(&p).copied().unwrap_or_default();
            PeriodReport {
                period: p,
                start_timestamp: series.frames[pos].timestamp,
                kickoffs,
                goals,
                incorrect_kickoffs: incorrect,
            }
        })
        .collect();
    RunReport {
        frames: series.len(),
        sample_rate: series.sample_rate,
        players: series.roster.players().len(),
        category_counts,
        periods,
        low_confidence_rows: low,
        wall_time_ms: started.elapsed().as_millis() as u64,
    }
}

/// Writes the possession timeline as CSV (frame, period, timestamp,
/// ball_control, player_id, team_id).
pub fn write_timeline_csv<W: std::io::Write>(
    series: &FrameSeries,
    timeline: &[ControlLabel],
    out: W,
) -> Result<(), std::io::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "period", "timestamp", "ball_control", "player_id", "team_id"])
        .map_err(io_err)?;
    for (i, f) in series.frames.iter().enumerate() {
        let (label, player, team) = match timeline[i] {
            ControlLabel::DeadBall => ("dead ball", String::new(), String::new()),
            ControlLabel::NoPossession => ("no possession", String::new(), String::new()),
            ControlLabel::Duel => ("duel", String::new(), String::new()),
            ControlLabel::Possession(p) => (
                "possession",
                series.roster.player_id(p).to_string(),
                series
                    .roster
                    .team_name(series.roster.team_of(p))
                    .to_string(),
            ),
        };
        w.write_record([
            f.frame_index.to_string(),
            f.period.to_string(),
            format!("{}", f.timestamp),
            label.to_string(),
            player,
            team,
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::Other, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_match, long_match};

    #[test]
    fn detect_runs_end_to_end_on_a_synthetic_match() {
        let script = long_match(0.5);
        let (series, _) = generate_match(&script, 1).unwrap();
        let cfg = RunConfig::default();
        let out = detect(series, &cfg).unwrap();
        assert!(!out.events.is_empty());
        assert_eq!(out.timeline.len(), out.series.len());
        assert!(out.report.category_counts.contains_key("pass"));
        // kickoff bookkeeping: kickoffs = 1 + goals + incorrect per period
        for p in &out.report.periods {
            assert_eq!(p.kickoffs, 1 + p.goals + p.incorrect_kickoffs, "{p:?}");
        }
    }

    #[test]
    fn detect_is_deterministic() {
        let script = long_match(0.3);
        let (series, _) = generate_match(&script, 5).unwrap();
        let cfg = RunConfig::default();
        let a = detect(series.clone(), &cfg).unwrap();
        let b = detect(series, &cfg).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.timeline, b.timeline);
    }

    #[test]
    fn attack_directions_are_inferred_from_keepers() {
        let script = long_match(0.3);
        let (series, _) = generate_match(&script, 5).unwrap();
        let cfg = RunConfig::default();
        assert!(cfg.pitch.teams.is_empty());
        let signs = attack_signs(&series, &cfg).unwrap();
        // home keeper stands at -x, so home attacks +x
        assert_eq!(signs, vec![1.0, -1.0]);
    }
}
