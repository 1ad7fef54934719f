//! CSV formats shared by the command line and tests.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. Lines end with `\n`.
//!
//! | file        | header             | body                        |
//! |-------------|--------------------|-----------------------------|
//! | matrix      | none               | N rows of N values          |
//! | channels    | channel names      | T rows of m values          |
//! | points      | none               | N rows of 3 values          |
//! | coordinates | none               | N rows of k values          |
//! | diagram     | `dim,birth,death`  | one point per row, `inf`    |

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{FusionError, Result};
use crate::persistence::{PersistenceDiagram, PersistencePoint};
use crate::types::{Channel, MultiTimeSeries, SquareMatrix};

pub fn format_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "Inf" | "+inf" => Some(f64::INFINITY),
        t => t.parse().ok(),
    }
}

fn write_rows<'a, W: Write>(mut w: W, rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read>(r: R, has_header: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(has_header).from_reader(r);
    let header = if has_header {
        rdr.headers()?.iter().map(|s| s.trim().to_string()).collect()
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, s)| {
                parse_number(s).ok_or_else(|| FusionError::UnparseableNumber {
                    row: i + 1,
                    column: header.get(c).cloned().unwrap_or_else(|| (c + 1).to_string()),
                    value: s.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| FusionError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| FusionError::Io(format!("{}: {e}", path.display())))
}

pub fn write_matrix<W: Write>(w: W, m: &SquareMatrix) -> Result<()> {
    write_rows(w, m.rows())
}

pub fn read_matrix<R: Read>(r: R) -> Result<SquareMatrix> {
    let (_, rows) = read_rows(r, false)?;
    SquareMatrix::from_rows(&rows)
}

pub fn save_matrix(path: &Path, m: &SquareMatrix) -> Result<()> {
    write_matrix(create(path)?, m)
}

pub fn load_matrix(path: &Path) -> Result<SquareMatrix> {
    read_matrix(open(path)?)
}

/// One column per scalar component; vector channels expand to `name[k]`.
pub fn write_channels<W: Write>(mut w: W, ts: &MultiTimeSeries) -> Result<()> {
    let mut header = Vec::new();
    for (ch, name) in ts.channels().iter().zip(ts.names()) {
        if ch.dim() == 1 {
            header.push(name);
        } else {
            header.extend((0..ch.dim()).map(|k| format!("{name}[{k}]")));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    let rows: Vec<Vec<f64>> = (0..ts.len())
        .map(|t| ts.channels().iter().flat_map(|ch| ch.sample(t).iter().copied()).collect())
        .collect();
    write_rows(w, rows.iter().map(|r| r.as_slice()))
}

/// Reads every column as a named scalar channel.
pub fn read_channels<R: Read>(r: R) -> Result<MultiTimeSeries> {
    let (header, rows) = read_rows(r, true)?;
    if rows.is_empty() || header.is_empty() {
        return Err(FusionError::EmptyInput);
    }
    for row in &rows {
        if row.len() != header.len() {
            return Err(FusionError::DimensionMismatch { expected: header.len(), found: row.len() });
        }
    }
    let channels = header
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let values: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            Channel::scalar(&values).with_name(name.clone())
        })
        .collect();
    MultiTimeSeries::new(channels)
}

pub fn save_channels(path: &Path, ts: &MultiTimeSeries) -> Result<()> {
    write_channels(create(path)?, ts)
}

pub fn load_channels(path: &Path) -> Result<MultiTimeSeries> {
    read_channels(open(path)?)
}

pub fn write_points<W: Write>(w: W, points: &[[f64; 3]]) -> Result<()> {
    write_rows(w, points.iter().map(|p| p.as_slice()))
}

pub fn save_points(path: &Path, points: &[[f64; 3]]) -> Result<()> {
    write_points(create(path)?, points)
}

pub fn write_coordinates<W: Write>(w: W, coords: &[Vec<f64>]) -> Result<()> {
    write_rows(w, coords.iter().map(|r| r.as_slice()))
}

pub fn read_coordinates<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    Ok(read_rows(r, false)?.1)
}

pub fn save_coordinates(path: &Path, coords: &[Vec<f64>]) -> Result<()> {
    write_coordinates(create(path)?, coords)
}

pub fn write_diagram<W: Write>(mut w: W, diagram: &PersistenceDiagram) -> Result<()> {
    writeln!(w, "dim,birth,death")?;
    for p in &diagram.points {
        writeln!(w, "{},{},{}", p.dim, format_number(p.birth), format_number(p.death))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads diagram points; the threshold and dimension bound are not stored.
pub fn read_diagram<R: Read>(r: R) -> Result<Vec<PersistencePoint>> {
    let (header, rows) = read_rows(r, true)?;
    if header != ["dim", "birth", "death"] {
        return Err(FusionError::Parse(format!("expected header dim,birth,death, got {}", header.join(","))));
    }
    rows.iter()
        .map(|r| match r.as_slice() {
            &[dim, birth, death] if dim >= 0.0 && dim.fract() == 0.0 => {
                Ok(PersistencePoint { dim: dim as usize, birth, death })
            }
            _ => Err(FusionError::Parse(format!("bad diagram row {r:?}"))),
        })
        .collect()
}

pub fn save_diagram(path: &Path, diagram: &PersistenceDiagram) -> Result<()> {
    write_diagram(create(path)?, diagram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrix_text_format() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 0.1], vec![0.1, 0.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "0.0000000000000000e0,1.0000000000000001e-1\n1.0000000000000001e-1,0.0000000000000000e0\n"
        );
        assert_eq!(read_matrix(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn rejects_ragged_matrix() {
        assert!(read_matrix("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix("1,x\n3,4\n".as_bytes()).is_err());
    }

    #[test]
    fn diagram_round_trip() {
        let dg = PersistenceDiagram {
            points: vec![
                PersistencePoint { dim: 0, birth: 0.0, death: 1.5 },
                PersistencePoint { dim: 0, birth: 0.0, death: f64::INFINITY },
            ],
            threshold: 1.5,
            max_dim: 0,
        };
        let mut buf = Vec::new();
        write_diagram(&mut buf, &dg).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dim,birth,death\n"));
        assert!(text.ends_with(",inf\n"));
        assert_eq!(read_diagram(text.as_bytes()).unwrap(), dg.points);
    }

    #[test]
    fn channels_round_trip() {
        let ts = MultiTimeSeries::new(vec![
            Channel::scalar(&[1.0, 2.0, 3.0]).with_name("a"),
            Channel::scalar(&[0.5, -1.0, 1e-300]).with_name("b"),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_channels(&mut buf, &ts).unwrap();
        assert!(buf.starts_with(b"a,b\n"));
        assert_eq!(read_channels(buf.as_slice()).unwrap(), ts);
    }

    proptest! {
        #[test]
        fn numbers_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            prop_assert_eq!(parse_number(&format_number(v)), Some(v));
        }
    }
}
