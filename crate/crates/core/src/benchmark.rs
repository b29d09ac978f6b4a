//! Benchmark harness: matches detected events against manually annotated
//! events and produces per-category confusion matrices with precision and
//! recall.
//!
//! Matching is greedy nearest-in-time and one-to-one, in two stages: first
//! same-category pairs within the window (true positives), then
//! cross-category pairs among the leftovers (the off-diagonal confusion
//! cells). Remaining annotations count as not detected, remaining
//! predictions as spurious.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::MatchingConfig;
use crate::events::EventRecord;

/// A manually annotated event, normalized to seconds from period start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub match_id: String,
    pub half: u8,
    pub seconds: f64,
    pub players: Vec<String>,
    /// Category after vocabulary mapping.
    pub category: String,
    pub outcome: Option<String>,
}

/// One comparable event instance (from either side of the benchmark).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub half: u8,
    /// Seconds from period start.
    pub time: f64,
    pub category: String,
    pub players: Vec<String>,
}

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: malformed time field {field:?}")]
    BadTime { row: usize, field: String },
    #[error("unmapped annotation categories: {0:?}")]
    UnmappedCategories(Vec<String>),
}

/// Every category label the detector can emit.
pub fn artifact_vocabulary() -> Vec<&'static str> {
    let mut v = vec![
        "pass",
        "cross",
        "shot on target",
        "shot off target",
        "reception",
        "interception",
        "own goal",
        "save-deflect",
        "save-retain",
        "claim-deflect",
        "claim-retain",
        "unsuccessful save",
        "reception from loose ball",
    ];
    v.extend([
        "out for corner kick",
        "out for goal kick",
        "out for throw-in",
        "foul",
        "penalty awarded",
        "goal",
        "goal?",
        "referee interruption",
        "foul?",
    ]);
    v.extend([
        "corner kick",
        "goal kick",
        "throw-in",
        "free kick",
        "free kick?",
        "penalty kick",
        "kickoff",
        "incorrect kickoff",
    ]);
    v
}

/// Loads annotations from CSV (`match,half,minute,second,player,category,
/// outcome`) and maps provider categories onto the artifact vocabulary.
/// Multiple players may share a cell separated by `|`.
pub fn load_annotations<R: Read>(
    source: R,
    cfg: &MatchingConfig,
) -> Result<Vec<Annotation>, AnnotationError> {
    let mut vocab: BTreeMap<String, String> = cfg.vocabulary.clone();
    if cfg.fold_blocked_shots {
        vocab.insert("blocked shot".to_string(), "pass".to_string());
    }
    let known = artifact_vocabulary();

    let mut reader = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    let mut unmapped: Vec<String> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let get = |j: usize| rec.get(j).unwrap_or("").trim().to_string();
        let minute: f64 = get(2).parse().map_err(|_| AnnotationError::BadTime {
            row: i,
            field: get(2),
        })?;
        let second: f64 = get(3).parse().map_err(|_| AnnotationError::BadTime {
            row: i,
            field: get(3),
        })?;
        let raw_category = get(5);
        let category = vocab.get(&raw_category).cloned().unwrap_or(raw_category);
        if !known.contains(&category.as_str()) {
            if !unmapped.contains(&category) {
                unmapped.push(category);
            }
            continue;
        }
        let players: Vec<String> = get(4)
            .split('|')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        out.push(Annotation {
            match_id: get(0),
            half: get(1).parse().map_err(|_| AnnotationError::BadTime {
                row: i,
                field: get(1),
            })?,
            seconds: minute * 60.0 + second,
            players,
            category,
            outcome: match get(6).as_str() {
                "" => None,
                s => Some(s.to_string()),
            },
        });
    }
    if cfg.strict_vocabulary && !unmapped.is_empty() {
        return Err(AnnotationError::UnmappedCategories(unmapped));
    }
    Ok(out)
}

impl Annotation {
    pub fn instance(&self) -> Instance {
        Instance {
            half: self.half,
            time: self.seconds,
            category: self.category.clone(),
            players: self.players.clone(),
        }
    }
}

/// Expands an events table into comparable instances: one per event name,
/// one per dead-ball event and one per set piece, timed from period start.
pub fn predicted_instances(
    events: &[EventRecord],
    period_starts: &BTreeMap<u8, f64>,
) -> Vec<Instance> {
    let mut out = Vec::new();
    for e in events {
        let start = period_starts.get(&e.period).copied().unwrap_or(0.0);
        let time = e.timestamp - start;
        let players = if e.player_id.is_empty() {
            Vec::new()
        } else {
            vec![e.player_id.clone()]
        };
        let mut push = |category: &str| {
            out.push(Instance {
                half: e.period,
                time,
                category: category.to_string(),
                players: players.clone(),
            })
        };
        if let Some(n) = e.event_name {
            push(n.label());
        }
        if let Some(d) = e.dead_ball_event {
            push(d.label());
        }
        if let Some(s) = e.from_set_piece {
            push(s.label());
        }
    }
    out
}

/// Ground-truth instances from a ground-truth events table (same expansion
/// as for predictions).
pub fn truth_instances(
    events: &[EventRecord],
    period_starts: &BTreeMap<u8, f64>,
) -> Vec<Instance> {
    predicted_instances(events, period_starts)
}

/// The outcome of matching predictions against annotations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// (prediction index, annotation index), same category.
    pub matched: Vec<(usize, usize)>,
    /// (prediction index, annotation index), different categories.
    pub confused: Vec<(usize, usize)>,
    /// Annotation indices with no prediction in the window.
    pub missed: Vec<usize>,
    /// Prediction indices with no annotation in the window.
    pub spurious: Vec<usize>,
}

impl Assignment {
    pub fn pair_count(&self) -> usize {
        self.matched.len() + self.confused.len()
    }
}

fn players_overlap(a: &[String], b: &[String]) -> bool {
    a.iter().any(|p| b.contains(p))
}

/// Greedy nearest-in-time one-to-one matching within the window.
///
/// Deterministic: candidate pairs are processed in (|dt|, prediction index,
/// annotation index) order, so shrinking the window can only remove pairs.
pub fn match_events(
    predicted: &[Instance],
    annotations: &[Instance],
    cfg: &MatchingConfig,
) -> Assignment {
    let mut pred_used = vec![false; predicted.len()];
    let mut ann_used = vec![false; annotations.len()];

    let mut candidates: Vec<(f64, usize, usize, bool)> = Vec::new();
    for (pi, p) in predicted.iter().enumerate() {
        for (ai, a) in annotations.iter().enumerate() {
            if p.half != a.half {
                continue;
            }
            let dt = (p.time - a.time).abs();
            if dt > cfg.window_secs {
                continue;
            }
            if cfg.player_strict
                && !p.players.is_empty()
                && !a.players.is_empty()
                && !players_overlap(&p.players, &a.players)
            {
                continue;
            }
            candidates.push((dt, pi, ai, p.category == a.category));
        }
    }
    candidates.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut assignment = Assignment::default();
    // stage 1: same category
    for &(_, pi, ai, same) in &candidates {
        if same && !pred_used[pi] && !ann_used[ai] {
            pred_used[pi] = true;
            ann_used[ai] = true;
            assignment.matched.push((pi, ai));
        }
    }
    // stage 2: cross-category confusion among the leftovers
    for &(_, pi, ai, same) in &candidates {
        if !same && !pred_used[pi] && !ann_used[ai] {
            pred_used[pi] = true;
            ann_used[ai] = true;
            assignment.confused.push((pi, ai));
        }
    }
    assignment.missed = ann_used
        .iter()
        .enumerate()
        .filter_map(|(i, used)| (!used).then_some(i))
        .collect();
    assignment.spurious = pred_used
        .iter()
        .enumerate()
        .filter_map(|(i, used)| (!used).then_some(i))
        .collect();
    assignment
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    /// TP / (TP + FP); absent when no predictions exist.
    pub precision: Option<f64>,
    /// TP / (TP + FN); absent when no annotations exist.
    pub recall: Option<f64>,
}

/// Confusion matrix (predicted x annotated, plus a not-detected row and a
/// spurious column) with per-category precision and recall.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub categories: Vec<String>,
    /// matrix[i][j] counts predictions of categories[i] paired with
    /// annotations of categories[j].
    pub matrix: Vec<Vec<u64>>,
    /// Annotations of each category with no paired prediction.
    pub not_detected: Vec<u64>,
    /// Predictions of each category with no paired annotation.
    pub spurious: Vec<u64>,
    pub per_category: BTreeMap<String, CategoryMetrics>,
}

/// Builds the confusion report for one match.
pub fn confusion_report(
    assignment: &Assignment,
    predicted: &[Instance],
    annotations: &[Instance],
) -> ConfusionReport {
    let mut categories: Vec<String> = predicted
        .iter()
        .map(|p| p.category.clone())
        .chain(annotations.iter().map(|a| a.category.clone()))
        .collect();
    categories.sort();
    categories.dedup();
    let index: BTreeMap<&str, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let n = categories.len();
    let mut report = ConfusionReport {
        categories: categories.clone(),
        matrix: vec![vec![0; n]; n],
        not_detected: vec![0; n],
        spurious: vec![0; n],
        per_category: BTreeMap::new(),
    };
    for &(pi, ai) in assignment.matched.iter().chain(&assignment.confused) {
        let r = index[predicted[pi].category.as_str()];
        let c = index[annotations[ai].category.as_str()];
        report.matrix[r][c] += 1;
    }
    for &ai in &assignment.missed {
        report.not_detected[index[annotations[ai].category.as_str()]] += 1;
    }
    for &pi in &assignment.spurious {
        report.spurious[index[predicted[pi].category.as_str()]] += 1;
    }
    finalize_metrics(&mut report);
    report
}

fn finalize_metrics(report: &mut ConfusionReport) {
    report.per_category.clear();
    let n = report.categories.len();
    for i in 0..n {
        let tp = report.matrix[i][i];
        let row: u64 = report.matrix[i].iter().sum::<u64>() + report.spurious[i];
        let col: u64 = (0..n).map(|r| report.matrix[r][i]).sum::<u64>() + report.not_detected[i];
        let fp = row - tp;
        let fn_ = col - tp;
        report.per_category.insert(
            report.categories[i].clone(),
            CategoryMetrics {
                true_positives: tp,
                false_positives: fp,
                false_negatives: fn_,
                precision: (row > 0).then(|| tp as f64 / row as f64),
                recall: (col > 0).then(|| tp as f64 / col as f64),
            },
        );
    }
}

impl ConfusionReport {
    /// Merges another report into this one by summation.
    pub fn merge(&mut self, other: &ConfusionReport) {
        let mut categories = self.categories.clone();
        categories.extend(other.categories.iter().cloned());
        categories.sort();
        categories.dedup();
        let n = categories.len();
        let mut matrix = vec![vec![0u64; n]; n];
        let mut not_detected = vec![0u64; n];
        let mut spurious = vec![0u64; n];
        let map = |cats: &[String], m: &[Vec<u64>], nd: &[u64], sp: &[u64],
                   matrix: &mut Vec<Vec<u64>>, not_detected: &mut Vec<u64>, spurious: &mut Vec<u64>| {
            for (i, ci) in cats.iter().enumerate() {
                let ri = categories.binary_search(ci).unwrap();
                not_detected[ri] += nd[i];
                spurious[ri] += sp[i];
                for (j, cj) in cats.iter().enumerate() {
                    let rj = categories.binary_search(cj).unwrap();
                    matrix[ri][rj] += m[i][j];
                }
            }
        };
        map(
            &self.categories,
            &self.matrix,
            &self.not_detected,
            &self.spurious,
            &mut matrix,
            &mut not_detected,
            &mut spurious,
        );
        map(
            &other.categories,
            &other.matrix,
            &other.not_detected,
            &other.spurious,
            &mut matrix,
            &mut not_detected,
            &mut spurious,
        );
        self.categories = categories;
        self.matrix = matrix;
        self.not_detected = not_detected;
        self.spurious = spurious;
        finalize_metrics(self);
    }

    pub fn metrics(&self, category: &str) -> Option<&CategoryMetrics> {
        self.per_category.get(category)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(half: u8, time: f64, category: &str, player: &str) -> Instance {
        Instance {
            half,
            time,
            category: category.to_string(),
            players: if player.is_empty() {
                vec![]
            } else {
                vec![player.to_string()]
            },
        }
    }

    #[test]
    fn loads_and_normalizes_annotation_times() {
        let csv = "\
match,half,minute,second,player,category,outcome
M1,1,12,34,P7,pass,complete
M1,2,3,5,P9|P10,shot on target,
";
        let cfg = MatchingConfig::default();
        let anns = load_annotations(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].seconds, 754.0); // 12*60+34
        assert_eq!(anns[0].category, "pass");
        assert_eq!(anns[1].players, vec!["P9", "P10"]);
    }

    #[test]
    fn unmapped_category_errors_in_strict_mode() {
        let csv = "\
match,half,minute,second,player,category,outcome
M1,1,0,10,P7,TACKLE,
";
        let cfg = MatchingConfig::default();
        let err = load_annotations(csv.as_bytes(), &cfg).unwrap_err();
        match err {
            AnnotationError::UnmappedCategories(cats) => {
                assert_eq!(cats, vec!["TACKLE".to_string()])
            }
            other => panic!("unexpected {other:?}"),
        }
        let lenient = MatchingConfig {
            strict_vocabulary: false,
            ..cfg
        };
        assert!(load_annotations(csv.as_bytes(), &lenient)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn vocabulary_maps_provider_categories() {
        let csv = "\
match,half,minute,second,player,category,outcome
M1,1,0,10,P7,PASS_SHORT,
";
        let mut cfg = MatchingConfig::default();
        cfg.vocabulary
            .insert("PASS_SHORT".to_string(), "pass".to_string());
        let anns = load_annotations(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(anns[0].category, "pass");
    }

    #[test]
    fn empty_file_loads_empty() {
        let csv = "match,half,minute,second,player,category,outcome\n";
        let cfg = MatchingConfig::default();
        assert!(load_annotations(csv.as_bytes(), &cfg).unwrap().is_empty());
    }

    #[test]
    fn nearby_same_category_pair_matches() {
        let cfg = MatchingConfig::default();
        let preds = vec![inst(1, 100.2, "pass", "P7")];
        let anns = vec![inst(1, 101.0, "pass", "P7")];
        let a = match_events(&preds, &anns, &cfg);
        assert_eq!(a.matched, vec![(0, 0)]);
        assert!(a.missed.is_empty() && a.spurious.is_empty());
    }

    #[test]
    fn annotation_without_prediction_is_a_miss() {
        let cfg = MatchingConfig::default();
        let preds: Vec<Instance> = vec![];
        let anns = vec![inst(1, 50.0, "shot on target", "P9")];
        let a = match_events(&preds, &anns, &cfg);
        assert_eq!(a.missed, vec![0]);
    }

    #[test]
    fn only_the_nearer_of_two_predictions_matches() {
        let cfg = MatchingConfig::default();
        let preds = vec![inst(1, 99.0, "pass", "P7"), inst(1, 100.5, "pass", "P7")];
        let anns = vec![inst(1, 100.0, "pass", "P7")];
        let a = match_events(&preds, &anns, &cfg);
        assert_eq!(a.matched, vec![(1, 0)]);
        assert_eq!(a.spurious, vec![0]);
        // exhaustive check: the chosen pair is the global nearest
        let best = preds
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| {
                (x.time - 100.0)
                    .abs()
                    .partial_cmp(&(y.time - 100.0).abs())
                    .unwrap()
            })
            .unwrap()
            .0;
        assert_eq!(a.matched[0].0, best);
    }

    #[test]
    fn cross_category_pairs_fill_the_confusion_matrix() {
        let cfg = MatchingConfig::default();
        let preds = vec![inst(1, 100.0, "pass", "P7")];
        let anns = vec![inst(1, 100.5, "shot on target", "P7")];
        let a = match_events(&preds, &anns, &cfg);
        assert!(a.matched.is_empty());
        assert_eq!(a.confused, vec![(0, 0)]);
        let report = confusion_report(&a, &preds, &anns);
        let pass_metrics = report.metrics("pass").unwrap();
        assert_eq!(pass_metrics.false_positives, 1);
        let shot_metrics = report.metrics("shot on target").unwrap();
        assert_eq!(shot_metrics.false_negatives, 1);
        assert_eq!(shot_metrics.recall, Some(0.0));
    }

    #[test]
    fn perfect_match_has_unit_precision_and_recall() {
        let cfg = MatchingConfig::default();
        let preds: Vec<Instance> = (0..10)
            .map(|i| inst(1, 10.0 * i as f64, "pass", "P7"))
            .collect();
        let anns = preds.clone();
        let a = match_events(&preds, &anns, &cfg);
        let report = confusion_report(&a, &preds, &anns);
        let m = report.metrics("pass").unwrap();
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, Some(1.0));
        assert_eq!(m.true_positives, 10);
    }

    #[test]
    fn empty_assignment_reports_absent_metrics() {
        let report = confusion_report(&Assignment::default(), &[], &[]);
        assert!(report.per_category.is_empty());
        assert!(report.categories.is_empty());
    }

    #[test]
    fn counts_are_symmetric() {
        let cfg = MatchingConfig::default();
        let preds = vec![
            inst(1, 10.0, "pass", "P1"),
            inst(1, 40.0, "cross", "P2"),
            inst(1, 200.0, "pass", "P3"),
        ];
        let anns = vec![
            inst(1, 11.0, "pass", "P1"),
            inst(1, 41.0, "pass", "P2"),
            inst(2, 10.0, "pass", "P9"),
        ];
        let a = match_events(&preds, &anns, &cfg);
        assert_eq!(a.pair_count() + a.missed.len(), anns.len());
        assert_eq!(a.pair_count() + a.spurious.len(), preds.len());
    }

    #[test]
    fn merge_sums_reports() {
        let cfg = MatchingConfig::default();
        let preds = vec![inst(1, 10.0, "pass", "P1")];
        let anns = vec![inst(1, 10.5, "pass", "P1")];
        let a = match_events(&preds, &anns, &cfg);
        let mut r1 = confusion_report(&a, &preds, &anns);
        let r2 = r1.clone();
        r1.merge(&r2);
        assert_eq!(r1.metrics("pass").unwrap().true_positives, 2);
        assert_eq!(r1.metrics("pass").unwrap().precision, Some(1.0));
    }
}
