use std::fmt::Write as _;

use crate::{Error, Result};

/// Sparse binary parity-check matrix stored as sorted column indices per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_vars: usize,
    rows: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds from per-row column lists; duplicates cancel over GF(2).
    pub fn from_rows(n_vars: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n_vars == 0 || rows.is_empty() {
            return Err(Error::Input(
                "parity-check matrix needs at least one row and column".into(),
            ));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for (r, mut row) in rows.into_iter().enumerate() {
            if let Some(c) = row.iter().find(|c| **c >= n_vars) {
                return Err(Error::Input(format!(
                    "row {r} references column {c} of {n_vars}"
                )));
            }
            row.sort_unstable();
            let mut out: Vec<usize> = Vec::with_capacity(row.len());
            for c in row {
                if out.last() == Some(&c) {
                    out.pop();
                } else {
                    out.push(c);
                }
            }
            clean.push(out);
        }
        Ok(Self {
            n_vars,
            rows: clean,
        })
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n = dense.first().map(Vec::len).unwrap_or(0);
        if dense.iter().any(|r| r.len() != n) {
            return Err(Error::Input("ragged dense matrix".into()));
        }
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v & 1 == 1)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn ones(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_vars];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        cols
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.n_vars];
                for &c in row {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    /// `H x` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.n_vars {
            return Err(Error::Input(format!(
                "{} bits for {} columns",
                bits.len(),
                self.n_vars
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)))
            .collect())
    }

    pub fn is_codeword(&self, bits: &[u8]) -> Result<bool> {
        Ok(self.syndrome(bits)?.iter().all(|s| *s == 0))
    }

    /// MacKay alist text: sizes, maximum degrees, degree lists, then 1-based
    /// neighbour lists per column and per row, zero padded to the maximum degree.
    pub fn to_alist(&self) -> String {
        let cols = self.columns();
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n_vars, self.n_checks());
        let _ = writeln!(s, "{max_col} {max_row}");
        let _ = writeln!(s, "{}", join(&mut cols.iter().map(Vec::len)));
        let _ = writeln!(s, "{}", join(&mut self.rows.iter().map(Vec::len)));
        for col in &cols {
            let _ = writeln!(
                s,
                "{}",
                join(
                    &mut col
                        .iter()
                        .map(|r| r + 1)
                        .chain(std::iter::repeat_n(0, max_col - col.len()))
                )
            );
        }
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{}",
                join(
                    &mut row
                        .iter()
                        .map(|c| c + 1)
                        .chain(std::iter::repeat_n(0, max_row - row.len()))
                )
            );
        }
        s
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Parse {
                line: text.lines().count() + 1,
                msg: format!("unexpected end of input, expected {what}"),
            })?;
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("'{t}' is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, vals))
        };
        let expect_len = |no: usize, v: &[usize], n: usize, what: &str| -> Result<()> {
            if v.len() != n {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected {n} values for {what}, found {}", v.len()),
                });
            }
            Ok(())
        };

        let (no, dims) = next("dimensions")?;
        expect_len(no, &dims, 2, "dimensions")?;
        let (n, m) = (dims[0], dims[1]);
        if n == 0 || m == 0 {
            return Err(Error::Parse {
                line: no,
                msg: "matrix dimensions must be positive".into(),
            });
        }
        const LIMIT: usize = 1 << 22;
        if n > LIMIT || m > LIMIT {
            return Err(Error::Parse {
                line: no,
                msg: "matrix dimensions too large".into(),
            });
        }
        let (no, maxes) = next("maximum degrees")?;
        expect_len(no, &maxes, 2, "maximum degrees")?;
        let (max_col, max_row) = (maxes[0], maxes[1]);
        if max_col > m || max_row > n {
            return Err(Error::Parse {
                line: no,
                msg: "maximum degree exceeds the matrix size".into(),
            });
        }
        let (no, col_deg) = next("column degrees")?;
        expect_len(no, &col_deg, n, "column degrees")?;
        if col_deg.iter().any(|d| *d > max_col) || col_deg.iter().max() != Some(&max_col) {
            return Err(Error::Parse {
                line: no,
                msg: "column degrees inconsistent with the stated maximum".into(),
            });
        }
        let (no, row_deg) = next("row degrees")?;
        expect_len(no, &row_deg, m, "row degrees")?;
        if row_deg.iter().any(|d| *d > max_row) || row_deg.iter().max() != Some(&max_row) {
            return Err(Error::Parse {
                line: no,
                msg: "row degrees inconsistent with the stated maximum".into(),
            });
        }
        if let Some(r) = row_deg.iter().position(|d| *d == 0) {
            return Err(Error::Parse {
                line: no,
                msg: format!("row {} is empty", r + 1),
            });
        }
        if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
            return Err(Error::Parse {
                line: no,
                msg: "column and row degree totals differ".into(),
            });
        }

        let mut read_lists = |count: usize,
                              degrees: &[usize],
                              bound: usize,
                              what: &str|
         -> Result<Vec<(usize, Vec<usize>)>> {
            let mut out = Vec::with_capacity(count);
            for (i, &deg) in degrees.iter().enumerate() {
                let (no, vals) = next(what)?;
                let (entries, padding) = if vals.len() >= deg {
                    vals.split_at(deg)
                } else {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!(
                            "{what} {} lists {} entries, degree is {deg}",
                            i + 1,
                            vals.len()
                        ),
                    });
                };
                if padding.iter().any(|p| *p != 0) {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("{what} {} has more entries than its degree {deg}", i + 1),
                    });
                }
                let mut list = Vec::with_capacity(deg);
                for &e in entries {
                    if e == 0 || e > bound {
                        return Err(Error::Parse {
                            line: no,
                            msg: format!("index {e} outside 1..={bound}"),
                        });
                    }
                    list.push(e - 1);
                }
                let mut sorted = list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != list.len() {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("{what} {} repeats an index", i + 1),
                    });
                }
                out.push((no, sorted));
            }
            Ok(out)
        };
        let cols = read_lists(n, &col_deg, m, "column")?;
        let rows = read_lists(m, &row_deg, n, "row")?;

        let h = Self::from_rows(n, rows.iter().map(|(_, r)| r.clone()).collect())?;
        let derived = h.columns();
        for (c, (no, list)) in cols.iter().enumerate() {
            if *list != derived[c] {
                return Err(Error::Parse {
                    line: *no,
                    msg: format!("column {} disagrees with the row lists", c + 1),
                });
            }
        }
        Ok(h)
    }
}
