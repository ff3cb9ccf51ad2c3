use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::Point;

/// One true-objective evaluation. `t` counts evaluations from 1 within a
/// repetition; the sampler columns are empty for rows not chosen by SBBO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub rep: usize,
    pub t: usize,
    #[serde(serialize_with = "point_to_field", deserialize_with = "point_from_field")]
    pub x: Point,
    pub y: f64,
    pub best_so_far: f64,
    pub h_final: Option<usize>,
    pub acceptance_rate: Option<f64>,
}

/// Wall-clock time spent producing one trace row. Kept apart from the trace so
/// that reruns with the same seed give byte-identical trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub rep: usize,
    pub t: usize,
    pub wall_ms: f64,
}

fn point_to_field<S: Serializer>(x: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn point_from_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Point, D::Error> {
    let text = String::deserialize(d)?;
    text.parse().map_err(serde::de::Error::custom)
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows(path)
}

/// Splits rows by repetition, keeping the order of first appearance.
pub fn by_rep(rows: &[TraceRow]) -> Vec<(usize, Vec<&TraceRow>)> {
    let mut out: Vec<(usize, Vec<&TraceRow>)> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|(rep, _)| *rep == row.rep) {
            Some((_, v)) => v.push(row),
            None => out.push((row.rep, vec![row])),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<TraceRow> {
        vec![
            TraceRow {
                rep: 0,
                t: 1,
                x: Point(vec![1.0, 0.0, 3.0]),
                y: -0.1 + 0.2,
                best_so_far: 0.30000000000000004,
                h_final: None,
                acceptance_rate: None,
            },
            TraceRow {
                rep: 0,
                t: 2,
                x: Point(vec![0.0, 0.0, 2.0]),
                y: 1e-300,
                best_so_far: 0.30000000000000004,
                h_final: Some(125_001),
                acceptance_rate: Some(1.0 / 3.0),
            },
        ]
    }

    #[test]
    fn trace_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let rows = sample_rows();
        write_trace(&path, &rows).unwrap();
        assert_eq!(read_trace(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("rep,t,x,y,best_so_far,h_final,acceptance_rate\n"));
        assert!(text.contains(",1 0 3,"));
    }

    #[test]
    fn malformed_point_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        std::fs::write(&path, "rep,t,x,y,best_so_far,h_final,acceptance_rate\n0,1,1 a,0,0,,\n").unwrap();
        assert!(read_trace(&path).is_err());
    }

    #[test]
    fn grouping_by_rep() {
        let mut rows = sample_rows();
        rows.push(TraceRow { rep: 3, ..rows[0].clone() });
        let groups = by_rep(&rows);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].1.len(), 2);
        assert_eq!(groups[1].0, 3);
    }
}
