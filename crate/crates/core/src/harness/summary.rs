use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::Metadata;
use super::trace::{by_rep, read_trace, TraceRow};
use crate::data::Sense;
use crate::error::{Error, Result};

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub t: usize,
    pub mean: f64,
    pub se: f64,
    pub n_reps: usize,
    pub n_failed: usize,
    pub mean_distance: Option<f64>,
    pub se_distance: Option<f64>,
}

/// Per-evaluation mean and standard error of `best_so_far` across reps. With
/// a known optimum, also the distance `|optimum - best_so_far|` on the
/// oriented scale.
pub fn summarize_rows(
    group: &str,
    rows: &[TraceRow],
    sense: Sense,
    optimum: Option<f64>,
    n_failed: usize,
) -> Result<Vec<SummaryRow>> {
    let reps = by_rep(rows);
    let Some((_, first)) = reps.first() else {
        return Err(Error::Trace("no completed repetitions to summarize".into()));
    };
    let len = first.len();
    for (rep, r) in &reps {
        if r.len() != len {
            return Err(Error::Trace(format!("rep {rep} has {} rows, expected {len}", r.len())));
        }
        if r.iter().enumerate().any(|(i, row)| row.t != i + 1) {
            return Err(Error::Trace(format!("rep {rep} has non-consecutive evaluation indices")));
        }
    }
    Ok((0..len)
        .map(|i| {
            let best: Vec<f64> = reps.iter().map(|(_, r)| r[i].best_so_far).collect();
            let (mean, se) = mean_se(&best);
            let dist = optimum.map(|opt| {
                let d: Vec<f64> = best.iter().map(|b| sense.orient(opt) - sense.orient(*b)).collect();
                mean_se(&d)
            });
            SummaryRow {
                group: group.to_string(),
                t: i + 1,
                mean,
                se,
                n_reps: reps.len(),
                n_failed,
                mean_distance: dist.map(|d| d.0),
                se_distance: dist.map(|d| d.1),
            }
        })
        .collect())
}

fn summarize_run(group: &str, dir: &Path) -> Result<Vec<SummaryRow>> {
    let rows = read_trace(&dir.join("trace.csv"))?;
    let meta_path = dir.join("metadata.toml");
    let (sense, optimum, n_failed) = if meta_path.exists() {
        let meta = Metadata::read(&meta_path)?;
        (
            meta.instance.sense.unwrap_or(Sense::Maximize),
            meta.instance.known_optimum,
            meta.failed_reps.len(),
        )
    } else {
        (Sense::Maximize, None, 0)
    };
    summarize_rows(group, &rows, sense, optimum, n_failed)
}

/// Summarizes `dir/trace.csv`, or every immediate subdirectory holding a
/// trace (one group per subdirectory, in name order).
pub fn summarize_dir(dir: &Path) -> Result<Vec<SummaryRow>> {
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if dir.join("trace.csv").exists() {
        return summarize_run(&name(dir), dir);
    }
    let mut subdirs: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("trace.csv").exists())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::Trace(format!("no trace.csv found under {}", dir.display())));
    }
    let mut out = Vec::new();
    for sub in subdirs {
        out.extend(summarize_run(&name(&sub), &sub)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;

    fn trace(values: &[&[f64]]) -> Vec<TraceRow> {
        values
            .iter()
            .enumerate()
            .flat_map(|(rep, ys)| {
                ys.iter().enumerate().map(move |(i, &y)| TraceRow {
                    rep,
                    t: i + 1,
                    x: Point(vec![0.0]),
                    y,
                    best_so_far: y,
                    h_final: None,
                    acceptance_rate: None,
                })
            })
            .collect()
    }

    #[test]
    fn single_rep_has_zero_se() {
        let s = summarize_rows("g", &trace(&[&[1.0, 2.0]]), Sense::Maximize, None, 0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[1].mean, s[1].se), (2.0, 0.0));
    }

    #[test]
    fn two_reps_hand_arithmetic() {
        let s = summarize_rows("g", &trace(&[&[1.0], &[3.0]]), Sense::Maximize, Some(4.0), 2).unwrap();
        assert_eq!((s[0].mean, s[0].se, s[0].n_reps, s[0].n_failed), (2.0, 1.0, 2, 2));
        assert_eq!((s[0].mean_distance, s[0].se_distance), (Some(2.0), Some(1.0)));
        let s = summarize_rows("g", &trace(&[&[1.0], &[3.0]]), Sense::Minimize, Some(0.5), 0).unwrap();
        assert_eq!(s[0].mean_distance, Some(1.5));
    }

    #[test]
    fn constant_traces() {
        let rows = trace(&[&[2.5f64; 4] as &[f64]; 10]);
        for r in summarize_rows("g", &rows, Sense::Minimize, None, 0).unwrap() {
            assert_eq!((r.mean, r.se), (2.5, 0.0));
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(summarize_rows("g", &trace(&[&[1.0, 2.0], &[1.0]]), Sense::Maximize, None, 0).is_err());
        assert!(summarize_rows("g", &[], Sense::Maximize, None, 0).is_err());
    }
}
