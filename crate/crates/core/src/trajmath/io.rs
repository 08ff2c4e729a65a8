//! Trajectory CSV: header `t,q0..q{n-1}[,v0..v{n-1}][,a0..a{n-1}]`.

use std::io::{Read, Write};

use super::types::{JointTrajectory, JointVector, TrajectoryPoint};
use super::TrajError;

fn csv_err(e: impl std::fmt::Display) -> TrajError {
    TrajError::Csv(e.to_string())
}

/// Column positions of each group, found by name.
fn columns(header: &csv::StringRecord, prefix: char) -> Vec<usize> {
    let mut cols = Vec::new();
    for j in 0.. {
        let name = format!("{prefix}{j}");
        match header.iter().position(|h| h.trim() == name) {
            Some(idx) => cols.push(idx),
            None => break,
        }
    }
    cols
}

pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<JointTrajectory, TrajError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let t_col = header
        .iter()
        .position(|h| h == "t")
        .ok_or_else(|| TrajError::Csv("missing `t` column".into()))?;
    let q_cols = columns(&header, 'q');
    if q_cols.is_empty() {
        return Err(TrajError::Csv("no q0.. columns".into()));
    }
    let v_cols = columns(&header, 'v');
    let a_cols = columns(&header, 'a');
    for (name, cols) in [("v", &v_cols), ("a", &a_cols)] {
        if !cols.is_empty() && cols.len() != q_cols.len() {
            return Err(TrajError::Csv(format!(
                "{name} columns ({}) do not match q columns ({})",
                cols.len(),
                q_cols.len()
            )));
        }
    }

    let parse = |rec: &csv::StringRecord, idx: usize| -> Result<f64, TrajError> {
        rec.get(idx)
            .ok_or_else(|| TrajError::Csv("short row".into()))?
            .parse::<f64>()
            .map_err(csv_err)
    };
    let group =
        |rec: &csv::StringRecord, cols: &[usize]| -> Result<Option<JointVector>, TrajError> {
            if cols.is_empty() {
                return Ok(None);
            }
            let vals = cols
                .iter()
                .map(|&c| parse(rec, c))
                .collect::<Result<Vec<_>, _>>()?;
            JointVector::new(vals).map(Some)
        };

    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        points.push(TrajectoryPoint {
            t: parse(&rec, t_col)?,
            q: group(&rec, &q_cols)?.expect("q columns present"),
            v: group(&rec, &v_cols)?,
            a: group(&rec, &a_cols)?,
        });
    }
    JointTrajectory::new(points)
}

/// Writes `v`/`a` columns only when every point carries them.
pub fn write_trajectory_csv<W: Write>(traj: &JointTrajectory, writer: W) -> Result<(), TrajError> {
    let dof = traj.dof();
    let with_v = traj.points().iter().all(|p| p.v.is_some());
    let with_a = traj.points().iter().all(|p| p.a.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((0..dof).map(|j| format!("q{j}")));
    if with_v {
        header.extend((0..dof).map(|j| format!("v{j}")));
    }
    if with_a {
        header.extend((0..dof).map(|j| format!("a{j}")));
    }
    w.write_record(&header).map_err(csv_err)?;
    for p in traj.points() {
        let mut row = vec![p.t.to_string()];
        row.extend(p.q.as_slice().iter().map(f64::to_string));
        if with_v {
            row.extend(p.v.as_ref().unwrap().as_slice().iter().map(f64::to_string));
        }
        if with_a {
            row.extend(p.a.as_ref().unwrap().as_slice().iter().map(f64::to_string));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}
