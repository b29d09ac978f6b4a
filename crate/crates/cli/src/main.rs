//! Command-line pipeline: detect events from tracking data, benchmark
//! against annotations, synthesize oracle matches and compute analytics.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use trackevents_core::analytics::{
    pass_angle_profile, possession_heatmap, HeatmapMode, Normalization,
};
use trackevents_core::benchmark::{
    confusion_report, load_annotations, match_events, predicted_instances, ConfusionReport,
};
use trackevents_core::config::RunConfig;
use trackevents_core::events::{parse_events_csv, write_events_csv, write_events_jsonl};
use trackevents_core::ingest::{parse_tracking, write_jsonl, Format};
use trackevents_core::pipeline::{detect, write_timeline_csv, RunReport};
use trackevents_core::possession::compute_ball_kinematics;
use trackevents_core::synth::{generate_match, MatchScript};
use trackevents_core::FrameSeries;

#[derive(Parser)]
#[command(name = "trackevents", version, about = "Football tracking-data event detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Provider profile (A, B or C) applied before the config file.
    #[arg(long)]
    profile: Option<String>,
    /// Dotted-path overrides, e.g. possession.r_pz=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run possession and event detection over a tracking file.
    Detect {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Tracking input: a file, or a directory of files in batch mode.
        #[arg(long)]
        input: PathBuf,
        /// Input format.
        #[arg(long, default_value = "jsonl-frames")]
        format: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Parallel workers for batch mode.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Match a detected events table against annotated events.
    Benchmark {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Detected events CSV (from `detect`).
        #[arg(long)]
        events: PathBuf,
        /// Run report JSON (for period starts); defaults to report.json
        /// beside the events file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Annotations CSV (match,half,minute,second,player,category,outcome).
        #[arg(long)]
        annotations: PathBuf,
        /// Output confusion report JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic match from a script.
    Synth {
        /// Match script JSON.
        #[arg(long)]
        script: PathBuf,
        /// Noise seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (frames.jsonl, ground_truth.csv,
        /// ground_truth_annotations.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Possession heatmap and pass-angle profile for one player.
    Analyze {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Tracking input file.
        #[arg(long)]
        input: PathBuf,
        /// Input format.
        #[arg(long, default_value = "jsonl-frames")]
        format: String,
        /// Player id to profile.
        #[arg(long)]
        player: String,
        /// Heatmap mode: in-possession or all-in-play.
        #[arg(long, default_value = "in-possession")]
        mode: String,
        /// Heatmap grid as CELLSxCELLS.
        #[arg(long, default_value = "21x14")]
        grid: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // single-line machine-readable error on the diagnostic stream
            let line = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect {
            cfg,
            input,
            format,
            out,
            jobs,
        } => detect_cmd(&cfg, &input, &format, &out, jobs),
        Command::Benchmark {
            cfg,
            events,
            report,
            annotations,
            out,
        } => benchmark_cmd(&cfg, &events, report.as_deref(), &annotations, &out),
        Command::Synth { script, seed, out } => synth_cmd(&script, seed, &out),
        Command::Analyze {
            cfg,
            input,
            format,
            player,
            mode,
            grid,
            out,
        } => analyze_cmd(&cfg, &input, &format, &player, &mode, &grid, &out),
    }
}

/// Defaults -> profile -> config file -> --set overrides.
fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let mut base = RunConfig::default();
    if let Some(profile) = &args.profile {
        base.apply_profile(profile)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    let mut value = toml::Value::try_from(base)?;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file_value: toml::Value = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        merge_toml(&mut value, &file_value);
    }
    for kv in &args.set {
        let Some((key, raw)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        set_path(&mut value, key, raw)?;
    }
    let cfg: RunConfig = value.try_into().context("invalid configuration")?;
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

fn merge_toml(base: &mut toml::Value, overlay: &toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge_toml(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

fn set_path(root: &mut toml::Value, key: &str, raw: &str) -> Result<()> {
    let parsed: toml::Value = if raw.contains('.') && raw.parse::<f64>().is_ok() {
        toml::Value::Float(raw.parse::<f64>().unwrap())
    } else if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else {
        match raw {
            "true" => toml::Value::Boolean(true),
            "false" => toml::Value::Boolean(false),
            s => toml::Value::String(s.to_string()),
        }
    };
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = cursor
            .as_table_mut()
            .with_context(|| format!("config path {key:?} does not address a table"))?;
        if i == parts.len() - 1 {
            // integers land as floats when the existing slot holds a float
            let existing_is_float = matches!(table.get(*part), Some(toml::Value::Float(_)));
            let v = match (&parsed, existing_is_float) {
                (toml::Value::Integer(n), true) => toml::Value::Float(*n as f64),
                _ => parsed.clone(),
            };
            table.insert(part.to_string(), v);
            return Ok(());
        }
        cursor = table
            .get_mut(*part)
            .with_context(|| format!("unknown config section {part:?} in {key:?}"))?;
    }
    Ok(())
}

fn parse_format(s: &str) -> Result<Format> {
    s.parse::<Format>().map_err(|e| anyhow::anyhow!("{e}"))
}

fn read_series(path: &Path, format: Format) -> Result<FrameSeries> {
    let file =
        File::open(path).with_context(|| format!("missing input file {}", path.display()))?;
    parse_tracking(BufReader::new(file), format)
        .with_context(|| format!("parsing {}", path.display()))
}

fn detect_cmd(
    cfg_args: &ConfigArgs,
    input: &Path,
    format: &str,
    out: &Path,
    jobs: usize,
) -> Result<()> {
    let cfg = load_config(cfg_args)?;
    let format = parse_format(format)?;
    fs::create_dir_all(out)?;
    if input.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(input)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()?;
        let results: Vec<Result<String>> = pool.install(|| {
            use rayon::prelude::*;
            files
                .par_iter()
                .map(|path| {
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().to_string())
                        .unwrap_or_else(|| "match".to_string());
                    let dir = out.join(&stem);
                    detect_one(&cfg, path, format, &dir)?;
                    Ok(stem)
                })
                .collect()
        });
        for r in results {
            println!("detected: {}", r?);
        }
        return Ok(());
    }
    let report = detect_one(&cfg, input, format, out)?;
    print_report_summary(&report);
    Ok(())
}

fn detect_one(cfg: &RunConfig, input: &Path, format: Format, out: &Path) -> Result<RunReport> {
    let series = read_series(input, format)?;
    let result = detect(series, cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
    fs::create_dir_all(out)?;
    write_events_csv(&result.events, file_at(out, "events.csv")?)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    write_events_jsonl(&result.events, file_at(out, "events.jsonl")?)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    write_timeline_csv(&result.series, &result.timeline, file_at(out, "timeline.csv")?)?;
    let mut report_file = file_at(out, "report.json")?;
    serde_json::to_writer_pretty(&mut report_file, &result.report)?;
    report_file.write_all(b"\n")?;
    Ok(result.report)
}

fn file_at(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| {
        format!("creating {}", path.display())
    })?))
}

fn print_report_summary(report: &RunReport) {
    println!(
        "frames: {} at {} Hz, players: {}",
        report.frames, report.sample_rate, report.players
    );
    for (category, count) in &report.category_counts {
        println!("  {category}: {count}");
    }
    for p in &report.periods {
        println!(
            "period {}: kickoffs {}, goals {}, incorrect kickoffs {}",
            p.period, p.kickoffs, p.goals, p.incorrect_kickoffs
        );
    }
    println!(
        "low-confidence rows: {}, wall time: {} ms",
        report.low_confidence_rows, report.wall_time_ms
    );
}

fn benchmark_cmd(
    cfg_args: &ConfigArgs,
    events_path: &Path,
    report_path: Option<&Path>,
    annotations_path: &Path,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(cfg_args)?;
    let events_file = File::open(events_path)
        .with_context(|| format!("missing events file {}", events_path.display()))?;
    let events =
        parse_events_csv(BufReader::new(events_file)).map_err(|e| anyhow::anyhow!("{e}"))?;

    let report_path = report_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| events_path.with_file_name("report.json"));
    let period_starts: BTreeMap<u8, f64> = if report_path.exists() {
        let report: RunReport = serde_json::from_reader(BufReader::new(
            File::open(&report_path)
                .with_context(|| format!("reading {}", report_path.display()))?,
        ))?;
        report.period_starts()
    } else {
        let mut starts = BTreeMap::new();
        for e in &events {
            starts.entry(e.period).or_insert(e.timestamp);
        }
        eprintln!(
            "{}",
            serde_json::json!({
                "warning": "no run report found; period starts taken from first events",
                "missing": report_path.display().to_string(),
            })
        );
        starts
    };

    let ann_file = File::open(annotations_path)
        .with_context(|| format!("missing annotations file {}", annotations_path.display()))?;
    let annotations = load_annotations(BufReader::new(ann_file), &cfg.benchmark)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let predicted = predicted_instances(&events, &period_starts);
    let truth: Vec<_> = annotations.iter().map(|a| a.instance()).collect();
    let assignment = match_events(&predicted, &truth, &cfg.benchmark);
    let report: ConfusionReport = confusion_report(&assignment, &predicted, &truth);

    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = BufWriter::new(File::create(out)?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    f.write_all(b"\n")?;

    for (category, m) in &report.per_category {
        let fmt =
            |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".to_string());
        println!(
            "{category}: precision {} recall {} (tp {}, fp {}, fn {})",
            fmt(m.precision),
            fmt(m.recall),
            m.true_positives,
            m.false_positives,
            m.false_negatives
        );
    }
    Ok(())
}

fn synth_cmd(script_path: &Path, seed: u64, out: &Path) -> Result<()> {
    let text = fs::read_to_string(script_path)
        .with_context(|| format!("missing script {}", script_path.display()))?;
    let script = MatchScript::from_json(&text)
        .with_context(|| format!("parsing script {}", script_path.display()))?;
    let (series, truth) = generate_match(&script, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
    fs::create_dir_all(out)?;
    write_jsonl(&series, file_at(out, "frames.jsonl")?).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_events_csv(&truth.events, file_at(out, "ground_truth.csv")?)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    // annotation-format dump of the ground truth for the benchmark command
    let mut w = csv::Writer::from_writer(file_at(out, "ground_truth_annotations.csv")?);
    w.write_record(["match", "half", "minute", "second", "player", "category", "outcome"])?;
    for e in &truth.events {
        let start = truth.period_starts.get(&e.period).copied().unwrap_or(0.0);
        let t = e.timestamp - start;
        let minute = (t / 60.0).floor();
        let second = t - minute * 60.0;
        let categories = [
            e.event_name.map(|n| n.label()),
            e.dead_ball_event.map(|d| d.label()),
            e.from_set_piece.map(|s| s.label()),
        ];
        for category in categories.into_iter().flatten() {
            w.write_record([
                script.match_id.as_str(),
                &e.period.to_string(),
                &format!("{minute}"),
                &format!("{second}"),
                &e.player_id,
                category,
                "",
            ])?;
        }
    }
    w.flush()?;
    println!(
        "synthesized {} frames, {} ground-truth rows",
        series.len(),
        truth.events.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn analyze_cmd(
    cfg_args: &ConfigArgs,
    input: &Path,
    format: &str,
    player: &str,
    mode: &str,
    grid: &str,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(cfg_args)?;
    let format = parse_format(format)?;
    let series = read_series(input, format)?;
    let result = detect(series, &cfg).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mode = match mode {
        "in-possession" => HeatmapMode::InPossession,
        "all-in-play" => HeatmapMode::AllInPlay,
        other => bail!("unknown heatmap mode {other:?}"),
    };
    let (cx, cy) = grid
        .split_once('x')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .with_context(|| format!("grid must look like 21x14, got {grid:?}"))?;

    let pitch = trackevents_core::geometry::build_pitch(
        cfg.pitch.length,
        cfg.pitch.width,
        infer_signs(&result.series)?,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let gridded = possession_heatmap(
        &result.series,
        &result.timeline,
        &pitch,
        player,
        mode,
        cx,
        cy,
        Normalization::Raw,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let kin = compute_ball_kinematics(&result.series);
    let profile = pass_angle_profile(&result.series, &kin, &result.events, &pitch, player, 16)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    fs::create_dir_all(out)?;
    let mut f = file_at(out, "heatmap.json")?;
    serde_json::to_writer_pretty(&mut f, &gridded)?;
    f.write_all(b"\n")?;
    let mut f = file_at(out, "angle_profile.json")?;
    serde_json::to_writer_pretty(&mut f, &profile)?;
    f.write_all(b"\n")?;

    let mut w = csv::Writer::from_writer(file_at(out, "heatmap.csv")?);
    let mut header = vec!["cell_x".to_string()];
    header.extend((0..cy).map(|i| format!("y{i}")));
    w.write_record(&header)?;
    for x in 0..cx {
        let mut row = vec![x.to_string()];
        row.extend((0..cy).map(|y| gridded.counts[x * cy + y].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    println!(
        "player {player}: {} qualifying frames, {} passes profiled",
        gridded.qualifying_frames,
        profile.records.len()
    );
    Ok(())
}

/// Attack signs for analytics geometry, derived from goalkeeper means the
/// same way the pipeline infers them when the config does not pin teams.
fn infer_signs(series: &FrameSeries) -> Result<Vec<f64>> {
    use trackevents_core::frames::Role;
    let teams = series.roster.team_count();
    let mut sums = vec![(0.0f64, 0u64); teams];
    for frame in series.frames.iter().filter(|f| f.period == 1) {
        for s in &frame.players {
            let meta = series.roster.player(s.player);
            if meta.role == Role::Goalkeeper {
                sums[meta.team.0 as usize].0 += s.pos.x;
                sums[meta.team.0 as usize].1 += 1;
            }
        }
    }
    let mut signs = Vec::with_capacity(teams);
    for (sum, n) in sums {
        if n == 0 {
            bail!("cannot infer attack direction: no goalkeeper samples");
        }
        signs.push(if (sum / n as f64) < 0.0 { 1.0 } else { -1.0 });
    }
    Ok(signs)
}
