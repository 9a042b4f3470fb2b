use std::io::{Read, Write};

use num_complex::Complex64;

use super::IqSequence;
use crate::csvfmt::{fmt_f64, parse_f64};
use crate::{Error, Result};

pub const IQ_HEADER: [&str; 3] = ["index", "re", "im"];

/// `index,re,im` rows, 17 significant digits.
pub fn write_iq_csv<W: Write>(iq: &IqSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(IQ_HEADER)?;
    for (i, z) in iq.samples().iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    w.flush().map_err(|e| Error::io("<iq csv>", e))
}

pub fn read_iq_csv<R: Read>(input: R) -> Result<IqSequence> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != IQ_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header index,re,im, found {}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut samples = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let line = n + 2;
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let index: usize = rec[0].trim().parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad index '{}'", &rec[0]),
        })?;
        if index != n {
            return Err(Error::Parse {
                line,
                msg: format!("index {index} out of sequence, expected {n}"),
            });
        }
        samples.push(Complex64::new(
            parse_f64(&rec[1], line)?,
            parse_f64(&rec[2], line)?,
        ));
    }
    IqSequence::new(samples).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })
}
