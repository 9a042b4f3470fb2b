use std::io::{Read, Write};

use crate::csvfmt::parse_f64;
use crate::{Error, Result};

/// Reads `frame,index,llr` rows; frames and indices must be contiguous from 0
/// and every frame must have `n` entries.
pub fn read_llr_csv<R: Read>(input: R, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(["frame", "index", "llr"]) {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header frame,index,llr".into(),
        });
    }
    let mut frames: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let int = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("'{s}' is not an index"),
            })
        };
        let (frame, index) = (int(&rec[0])?, int(&rec[1])?);
        let value = parse_f64(&rec[2], line)?;
        let expected_frame = match frames.last() {
            Some(f) if f.len() < n => frames.len() - 1,
            _ => frames.len(),
        };
        if frame != expected_frame {
            return Err(Error::Parse {
                line,
                msg: format!("frame {frame} out of sequence, expected {expected_frame}"),
            });
        }
        if frame == frames.len() {
            frames.push(Vec::with_capacity(n));
        }
        let cur = frames.last_mut().expect("frame pushed");
        if index != cur.len() {
            return Err(Error::Parse {
                line,
                msg: format!("index {index} out of sequence, expected {}", cur.len()),
            });
        }
        cur.push(value);
    }
    if let Some(f) = frames.last() {
        if f.len() != n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("last frame has {} of {n} values", f.len()),
            });
        }
    }
    Ok(frames)
}

pub fn write_bits_csv<W: Write>(frames: &[Vec<u8>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "index", "bit"])?;
    for (f, bits) in frames.iter().enumerate() {
        for (i, b) in bits.iter().enumerate() {
            w.write_record([f.to_string(), i.to_string(), b.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<bits csv>", e))
}

pub fn write_llr_csv<W: Write>(frames: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "index", "llr"])?;
    for (f, llr) in frames.iter().enumerate() {
        for (i, v) in llr.iter().enumerate() {
            w.write_record([f.to_string(), i.to_string(), crate::csvfmt::fmt_f64(*v)])?;
        }
    }
    w.flush().map_err(|e| Error::io("<llr csv>", e))
}
