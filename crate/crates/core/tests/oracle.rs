//! Oracle contract: on noise-free synthetic matches the pipeline output
//! equals the generated ground truth, and the parser round-trips the
//! generated frames bit-exactly.

use trackevents_core::config::RunConfig;
use trackevents_core::events::EventRecord;
use trackevents_core::ingest::{parse_tracking, write_jsonl, Format};
use trackevents_core::pipeline::detect;
use trackevents_core::synth::{generate_match, long_match, Action, SetPieceKind};

/// The comparable view of an event row (confidence is detector internal).
fn key(e: &EventRecord) -> (u64, u8, &str, &str, String, String, String) {
    (
        e.frame_index,
        e.period,
        e.player_id.as_str(),
        e.team_id.as_str(),
        e.event_name.map(|n| n.label().to_string()).unwrap_or_default(),
        e.dead_ball_event
            .map(|d| d.label().to_string())
            .unwrap_or_default(),
        e.from_set_piece
            .map(|s| s.label().to_string())
            .unwrap_or_default(),
    )
}

fn assert_tables_equal(truth: &[EventRecord], detected: &[EventRecord], ctx: &str) {
    let t: Vec<_> = truth.iter().map(key).collect();
    let d: Vec<_> = detected.iter().map(key).collect();
    if t != d {
        for i in 0..t.len().max(d.len()) {
            let a = t.get(i);
            let b = d.get(i);
            if a != b {
                panic!(
                    "{ctx}: first mismatch at row {i}:\n  truth:    {a:?}\n  detected: {b:?}\n\
                     (truth rows {}, detected rows {})",
                    t.len(),
                    d.len()
                );
            }
        }
        panic!("{ctx}: tables differ in length only");
    }
}

/// Noise-free generation, smoothing off: the detected table must equal the
/// ground truth row for row, including frame indices.
#[test]
fn zero_noise_output_equals_ground_truth_exactly() {
    let script = long_match(1.0);
    let (series, truth) = generate_match(&script, 17).unwrap();
    let mut cfg = RunConfig::default();
    cfg.smoothing.enabled = false;
    let out = detect(series, &cfg).unwrap();
    assert_tables_equal(&truth.events, &out.events, "long-match");
    assert_eq!(truth.labels.len(), out.timeline.len());
    let diff = truth
        .labels
        .iter()
        .zip(&out.timeline)
        .filter(|(a, b)| a != b)
        .count();
    assert_eq!(diff, 0, "timeline labels differ on {diff} frames");
}

/// With smoothing on (default config) the same match must still yield the
/// same events; only frame stamps near path kinks may wobble.
#[test]
fn smoothing_on_preserves_event_sequence() {
    let script = long_match(1.0);
    let (series, truth) = generate_match(&script, 17).unwrap();
    let cfg = RunConfig::default();
    let out = detect(series, &cfg).unwrap();
    let t: Vec<_> = truth
        .events
        .iter()
        .map(|e| {
            (
                e.player_id.clone(),
                e.event_name.map(|n| n.label()),
                e.dead_ball_event.map(|d| d.label()),
                e.from_set_piece.map(|s| s.label()),
            )
        })
        .collect();
    let d: Vec<_> = out
        .events
        .iter()
        .map(|e| {
            (
                e.player_id.clone(),
                e.event_name.map(|n| n.label()),
                e.dead_ball_event.map(|d| d.label()),
                e.from_set_piece.map(|s| s.label()),
            )
        })
        .collect();
    assert_eq!(t, d);
    for (a, b) in truth.events.iter().zip(&out.events) {
        assert!(
            (a.frame_index as i64 - b.frame_index as i64).abs() <= 3,
            "frame drift beyond 3: truth {} vs detected {}",
            a.frame_index,
            b.frame_index
        );
    }
}

/// Every scripted scenario kind survives the full pipeline.
#[test]
fn scenario_script_with_goal_and_save_round_trips() {
    use trackevents_core::frames::Role;
    use trackevents_core::synth::{MatchScript, NoiseConfig, ScriptPeriod, ScriptPitch, ScriptPlayer, ScriptTeam};

    let script = MatchScript {
        match_id: "scenario".into(),
        pitch: ScriptPitch::default(),
        sample_rate: 25.0,
        teams: vec![
            ScriptTeam {
                id: "home".into(),
                attacks_positive_x: true,
                players: vec![
                    ScriptPlayer { id: "H9".into(), role: Role::Outfield, base: (-5.0, 0.0) },
                    ScriptPlayer { id: "H7".into(), role: Role::Outfield, base: (-15.0, 8.0) },
                    ScriptPlayer { id: "HGK".into(), role: Role::Goalkeeper, base: (-44.5, 0.0) },
                ],
            },
            ScriptTeam {
                id: "away".into(),
                attacks_positive_x: false,
                players: vec![
                    ScriptPlayer { id: "A5".into(), role: Role::Outfield, base: (12.0, -6.0) },
                    ScriptPlayer { id: "A3".into(), role: Role::Outfield, base: (30.0, 14.0) },
                    ScriptPlayer { id: "AGK".into(), role: Role::Goalkeeper, base: (44.5, 0.0) },
                ],
            },
        ],
        periods: vec![ScriptPeriod {
            actions: vec![
                Action::SetPiece { kind: SetPieceKind::Kickoff, executor: "H9".into(), duration: 2.0, spot: None },
                Action::Pass { from: "H9".into(), to: "H7".into(), speed: 10.0 },
                Action::Dribble { player: "H7".into(), path: vec![(30.0, 3.0)], speed: 6.0, push: false },
                Action::Shot { player: "H7".into(), target: (44.5, 0.0), speed: 14.0 },
                Action::Hold { player: "AGK".into(), duration: 1.5 },
                Action::Pass { from: "AGK".into(), to: "A5".into(), speed: 11.0 },
                Action::Pass { from: "A5".into(), to: "H9".into(), speed: 9.0 },
                Action::Shot { player: "H9".into(), target: (53.5, 1.0), speed: 16.0 },
                Action::SetPiece { kind: SetPieceKind::Kickoff, executor: "A5".into(), duration: 2.0, spot: None },
                Action::Pass { from: "A5".into(), to: "A3".into(), speed: 9.0 },
            ],
            closing_dead_time: 2.0,
        }],
        noise: NoiseConfig::default(),
    };
    let (series, truth) = generate_match(&script, 3).unwrap();
    let mut cfg = RunConfig::default();
    cfg.smoothing.enabled = false;
    let out = detect(series, &cfg).unwrap();
    assert_tables_equal(&truth.events, &out.events, "goal-and-save");
    // spot checks on the interesting rows
    let labels: Vec<&str> = out
        .events
        .iter()
        .filter_map(|e| e.event_name.map(|n| n.label()))
        .collect();
    assert!(labels.contains(&"save-retain"), "{labels:?}");
    assert!(labels.contains(&"shot on target"), "{labels:?}");
}

/// Parser round-trip on generated data: parse(serialize(x)) == x.
#[test]
fn jsonl_roundtrip_of_generated_frames() {
    let script = long_match(0.3);
    let (series, _) = generate_match(&script, 11).unwrap();
    let mut buf = Vec::new();
    write_jsonl(&series, &mut buf).unwrap();
    let reparsed = parse_tracking(buf.as_slice(), Format::JsonlFrames).unwrap();
    assert_eq!(reparsed.sample_rate, series.sample_rate);
    assert_eq!(reparsed.frames, series.frames);
    let mut buf2 = Vec::new();
    write_jsonl(&reparsed, &mut buf2).unwrap();
    assert_eq!(buf, buf2);
}
