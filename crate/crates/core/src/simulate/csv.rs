//! CSV layout: `path_id,t,x` rows for observations and `path_id,t,left,right`
//! rows for jump events, each file led by `#` comment lines.

use std::io::{Read, Write};

use super::{JumpEvent, PathBundle};
use crate::error::{invalid, Result};
use crate::model::{ProcessSpec, TimeGrid};

fn write_comment<W: Write>(w: &mut W, header: &str) -> Result<()> {
    for line in header.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

pub fn write_paths_csv<W: Write>(bundle: &PathBundle, mut w: W, header: &str) -> Result<()> {
    write_comment(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path_id", "t", "x"])?;
    for i in 0..bundle.n_paths() {
        for (k, t) in bundle.grid().times().iter().enumerate() {
            out.write_record([i.to_string(), t.to_string(), bundle.value(i, k).to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_jumps_csv<W: Write>(bundle: &PathBundle, mut w: W, header: &str) -> Result<()> {
    write_comment(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path_id", "t", "left", "right"])?;
    for i in 0..bundle.n_paths() {
        for j in bundle.jumps(i) {
            out.write_record([i.to_string(), j.time.to_string(), j.left.to_string(), j.right.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| invalid(format!("bad CSV field {i} in {rec:?}")))
}

/// Rebuild a bundle from the two CSV files written above.
pub fn read_bundle_csv<R1: Read, R2: Read>(spec: ProcessSpec, seed: u64, paths: R1, jumps: R2) -> Result<PathBundle> {
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for rec in reader(paths).records() {
        let rec = rec?;
        rows.push((field(&rec, 0)?, field(&rec, 1)?, field(&rec, 2)?));
    }
    let n_paths = rows.iter().map(|r| r.0 + 1).max().ok_or_else(|| invalid("no path rows"))?;
    let times: Vec<f64> = rows.iter().filter(|r| r.0 == 0).map(|r| r.1).collect();
    let grid = TimeGrid::new(times)?;
    if rows.len() != n_paths * grid.len() {
        return Err(invalid("path rows do not form a full path x time table"));
    }
    let mut values = vec![f64::NAN; rows.len()];
    for (i, t, x) in rows {
        let k = grid.index_of(t).ok_or_else(|| invalid(format!("time {t} not shared by all paths")))?;
        values[i * grid.len() + k] = x;
    }
    let mut events = vec![Vec::new(); n_paths];
    for rec in reader(jumps).records() {
        let rec = rec?;
        let i: usize = field(&rec, 0)?;
        let ev = JumpEvent { time: field(&rec, 1)?, left: field(&rec, 2)?, right: field(&rec, 3)? };
        events.get_mut(i).ok_or_else(|| invalid(format!("jump for unknown path {i}")))?.push(ev);
    }
    PathBundle::from_parts(spec, grid, seed, values, events)
}

impl From<csv::Error> for crate::Error {
    fn from(e: csv::Error) -> Self {
        invalid(format!("csv: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::generate_paths;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = ProcessSpec::jump_diffusion(1.0, 2.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let b = generate_paths(&spec, &grid, 12, 3).unwrap();
        let mut p = Vec::new();
        let mut j = Vec::new();
        write_paths_csv(&b, &mut p, "process=jumpdiff seed=3").unwrap();
        write_jumps_csv(&b, &mut j, "process=jumpdiff seed=3").unwrap();
        let text = String::from_utf8(p.clone()).unwrap();
        assert!(text.starts_with("# process=jumpdiff seed=3\npath_id,t,x\n0,0,0\n"));
        let back = read_bundle_csv(spec, 3, &p[..], &j[..]).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn ragged_table_is_rejected() {
        let text = "path_id,t,x\n0,0,0\n0,1,1\n1,0,0\n";
        let spec = ProcessSpec::brownian();
        assert!(read_bundle_csv(spec, 0, text.as_bytes(), "path_id,t,left,right\n".as_bytes()).is_err());
    }
}
