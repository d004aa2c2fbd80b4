use std::io::{BufRead, Write};

use super::{NodalArray, Provenance};
use crate::error::{Error, Result};

const PROVENANCE_PREFIX: &str = "# provenance: ";

/// Writes a provenance comment line, a `z1,…,zd` header and one row per point.
/// Floats use the shortest representation that round-trips.
pub fn write_csv<W: Write>(mesh: &NodalArray, mut out: W) -> Result<()> {
    writeln!(out, "{PROVENANCE_PREFIX}{}", serde_json::to_string(mesh.provenance())?)?;
    let header: Vec<String> = (1..=mesh.dimension()).map(|j| format!("z{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for p in mesh.iter() {
        let cells: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads the format produced by [`write_csv`]. Other `#` lines are ignored;
/// without a provenance line the mesh is tagged `imported`.
pub fn read_csv<R: BufRead>(input: R) -> Result<NodalArray> {
    let mut provenance = None;
    let mut dimension = None;
    let mut points = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(json) = line.strip_prefix(PROVENANCE_PREFIX) {
            provenance = Some(serde_json::from_str::<Provenance>(json)?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(d) = dimension else {
            dimension = Some(cells.len());
            if cells.iter().all(|c| c.parse::<f64>().is_err()) {
                continue;
            }
            push_row(&cells, lineno, &mut points)?;
            continue;
        };
        if cells.len() != d {
            return Err(Error::Parse(format!(
                "line {}: expected {d} columns, found {}",
                lineno + 1,
                cells.len()
            )));
        }
        push_row(&cells, lineno, &mut points)?;
    }
    let dimension = dimension.ok_or_else(|| Error::Parse("empty mesh file".into()))?;
    NodalArray::new(
        dimension,
        points,
        provenance.unwrap_or_else(|| Provenance::named("imported")),
    )
}

fn push_row(cells: &[&str], lineno: usize, points: &mut Vec<f64>) -> Result<()> {
    for c in cells {
        let x = c
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("line {}: {c:?}: {e}", lineno + 1)))?;
        points.push(x);
    }
    Ok(())
}
