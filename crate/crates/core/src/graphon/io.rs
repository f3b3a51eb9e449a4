//! CSV and PGM serialization of step graphons.

use std::io::{BufRead, Write};

use super::StepGraphon;
use crate::error::{Error, Result};

/// One row per line, values comma separated.
pub fn to_csv<W: Write>(h: &StepGraphon, mut out: W) -> Result<()> {
    let m = h.resolution();
    let mut line = String::new();
    for i in 0..m {
        line.clear();
        for (j, v) in h.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<StepGraphon> {
    let mut values = Vec::new();
    let mut rows = 0;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number {field:?}", lineno + 1)))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows * rows != values.len() {
        return Err(Error::DimensionMismatch(format!("{rows} rows but {} values", values.len())));
    }
    StepGraphon::new(rows, values)
}

/// Binary greyscale image, value 1 rendered black.
pub fn to_pgm<W: Write>(h: &StepGraphon, mut out: W) -> Result<()> {
    let m = h.resolution();
    write!(out, "P5\n{m} {m}\n255\n")?;
    let pixels: Vec<u8> = h.values().iter().map(|v| (255.0 * (1.0 - v)).round() as u8).collect();
    out.write_all(&pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let h = StepGraphon::from_fn(7, |x, y| (x * y).sqrt() / 3.0).unwrap();
        let mut buf = Vec::new();
        to_csv(&h, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn csv_rejects_ragged_input() {
        assert!(read_csv("0,1\n1\n".as_bytes()).is_err());
        assert!(read_csv("0,x\n0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn pgm_header_and_pixels() {
        let h = StepGraphon::new(2, vec![0.0, 1.0, 1.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        to_pgm(&h, &mut buf).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(&buf[header.len()..], &[255, 0, 0, 128]);
    }
}
