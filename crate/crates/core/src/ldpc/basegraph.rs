use super::matrix::ParityCheckMatrix;
use crate::{Error, Result};

const BG2_TEXT: &str = include_str!("../../data/bg2.txt");

/// Exponent matrix of a protograph: `None` is an all-zero block, `Some(s)` a
/// cyclically shifted identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraph {
    rows: usize,
    cols: usize,
    shifts: Vec<Option<u32>>,
}

impl BaseGraph {
    pub fn new(rows: usize, cols: usize, shifts: Vec<Option<u32>>) -> Result<Self> {
        if rows == 0 || cols == 0 || shifts.len() != rows * cols {
            return Err(Error::Input(format!(
                "{} exponents for a {rows}x{cols} base graph",
                shifts.len()
            )));
        }
        Ok(Self { rows, cols, shifts })
    }

    /// Text form: `#` comments, a `rows cols` line, then one line of
    /// integers per row with `-1` for empty blocks.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_ints = |no: usize, line: &str| -> Result<Vec<i64>> {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("'{t}' is not an integer"),
                    })
                })
                .collect()
        };
        let (no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing 'rows cols' header".into(),
        })?;
        let dims = parse_ints(no, header)?;
        if dims.len() != 2 || dims[0] <= 0 || dims[1] <= 0 || dims[0] > 4096 || dims[1] > 4096 {
            return Err(Error::Parse {
                line: no,
                msg: "header must hold two positive sizes".into(),
            });
        }
        let (rows, cols) = (dims[0] as usize, dims[1] as usize);
        let mut shifts = Vec::with_capacity(rows * cols);
        let mut last = no;
        for r in 0..rows {
            let (no, line) = lines.next().ok_or(Error::Parse {
                line: last + 1,
                msg: format!("expected {rows} rows, found {r}"),
            })?;
            last = no;
            let vals = parse_ints(no, line)?;
            if vals.len() != cols {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected {cols} entries, found {}", vals.len()),
                });
            }
            for v in vals {
                shifts.push(match v {
                    -1 => None,
                    s if (0..=u32::MAX as i64).contains(&s) => Some(s as u32),
                    s => {
                        return Err(Error::Parse {
                            line: no,
                            msg: format!("shift {s} must be -1 or nonnegative"),
                        })
                    }
                });
            }
        }
        if let Some((no, _)) = lines.next() {
            return Err(Error::Parse {
                line: no,
                msg: "trailing data after the last row".into(),
            });
        }
        Self::new(rows, cols, shifts)
    }

    /// The shipped base graph 2 exponent table (lifting set containing Z = 16).
    pub fn bg2() -> Self {
        Self::parse(BG2_TEXT).expect("shipped base graph parses")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shift(&self, r: usize, c: usize) -> Option<u32> {
        self.shifts[r * self.cols + c]
    }

    pub fn edge_count(&self) -> usize {
        self.shifts.iter().filter(|s| s.is_some()).count()
    }

    pub fn max_shift(&self) -> Option<u32> {
        self.shifts.iter().flatten().max().copied()
    }

    /// Expands each block to a `z x z` identity cyclically shifted right by
    /// `s mod z`: block row `i` holds its one in column `(i + s) mod z`.
    pub fn lift(&self, z: usize) -> Result<ParityCheckMatrix> {
        if z == 0 {
            return Err(Error::Input("lifting size must be at least 1".into()));
        }
        let mut rows = Vec::with_capacity(self.rows * z);
        for r in 0..self.rows {
            for i in 0..z {
                let row = (0..self.cols)
                    .filter_map(|c| self.shift(r, c).map(|s| c * z + (i + s as usize % z) % z))
                    .collect();
                rows.push(row);
            }
        }
        ParityCheckMatrix::from_rows(self.cols * z, rows)
    }
}
