use std::io::{BufRead, BufReader, Read, Write};

use super::types::{Point3, PointCloud};
use super::PerceptionError;

fn parse_err(msg: impl Into<String>) -> PerceptionError {
    PerceptionError::Parse(msg.into())
}

/// Writes an ASCII PLY with `x y z` float vertices.
pub fn write_ply<W: Write>(cloud: &PointCloud, mut w: W) -> Result<(), PerceptionError> {
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", cloud.len())?;
    writeln!(
        w,
        "property float x\nproperty float y\nproperty float z\nend_header"
    )?;
    for p in &cloud.points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

/// Reads an ASCII PLY. Extra vertex properties are ignored; other elements
/// must come after the vertices.
pub fn read_ply<R: Read>(r: R) -> Result<PointCloud, PerceptionError> {
    let mut lines = BufReader::new(r).lines();
    let mut next = || -> Result<String, PerceptionError> {
        lines
            .next()
            .ok_or_else(|| parse_err("unexpected end of PLY"))?
            .map_err(PerceptionError::from)
    };
    if next()?.trim() != "ply" {
        return Err(parse_err("missing ply magic"));
    }
    let mut count = None;
    let mut props: Vec<String> = Vec::new();
    let mut in_vertex = false;
    loop {
        let line = next()?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, _] => {
                return Err(parse_err(format!("unsupported PLY format {other}")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", "vertex", n] => {
                count = Some(
                    n.parse::<usize>()
                        .map_err(|_| parse_err(format!("bad vertex count {n}")))?,
                );
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", .., name] if in_vertex => props.push(name.to_string()),
            ["property", ..] => {}
            ["end_header"] => break,
            _ => return Err(parse_err(format!("unexpected header line {line:?}"))),
        }
    }
    let count = count.ok_or_else(|| parse_err("no vertex element"))?;
    let col = |name: &str| {
        props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| parse_err(format!("missing property {name}")))
    };
    let (ix, iy, iz) = (col("x")?, col("y")?, col("z")?);
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let line = next()?;
        let vals = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("vertex {i}: {e}")))?;
        if vals.len() < props.len() {
            return Err(parse_err(format!("vertex {i} has {} values", vals.len())));
        }
        points.push(Point3::new(vals[ix], vals[iy], vals[iz]));
    }
    PointCloud::new(points)
}

/// Writes `x,y,z` rows with a header.
pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, w: W) -> Result<(), PerceptionError> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| PerceptionError::Io(e.to_string());
    out.write_record(["x", "y", "z"]).map_err(err)?;
    for p in &cloud.points {
        out.serialize((p.x, p.y, p.z)).map_err(err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cloud_csv<R: Read>(r: R) -> Result<PointCloud, PerceptionError> {
    let mut rd = csv::Reader::from_reader(r);
    let points = rd
        .deserialize::<(f64, f64, f64)>()
        .map(|row| row.map(|(x, y, z)| Point3::new(x, y, z)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_err(e.to_string()))?;
    PointCloud::new(points)
}
