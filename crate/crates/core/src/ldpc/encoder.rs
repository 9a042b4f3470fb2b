use super::matrix::ParityCheckMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_from(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Systematic encoder from the reduced row echelon form of `H`.
///
/// Message bits occupy the non-pivot columns in ascending order; each pivot
/// bit is the parity of the message bits its reduced row touches.
#[derive(Clone, Debug)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    /// `(pivot column, indices into the message)` per reduced row.
    parity_rules: Vec<(usize, Vec<usize>)>,
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix) -> Result<Self> {
        let n = h.n_vars();
        let mut rows: Vec<BitRow> = h
            .rows()
            .iter()
            .map(|r| {
                let mut b = BitRow::zeros(n);
                for &c in r {
                    b.set(c);
                }
                b
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_from(&pivot);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        if rank < h.n_checks() {
            return Err(Error::Setup(format!(
                "parity-check matrix has GF(2) rank {rank} below its {} rows",
                h.n_checks()
            )));
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|c| !is_pivot[*c]).collect();
        let parity_rules = pivots
            .iter()
            .zip(&rows)
            .map(|(&p, row)| {
                let deps = info_positions
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| row.get(**c))
                    .map(|(k, _)| k)
                    .collect();
                (p, deps)
            })
            .collect();
        Ok(Self {
            n,
            info_positions,
            parity_rules,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Codeword positions carrying the message, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k() {
            return Err(Error::Input(format!(
                "message has {} bits, code dimension is {}",
                message.len(),
                self.k()
            )));
        }
        let mut cw = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(message) {
            cw[pos] = b & 1;
        }
        for (p, deps) in &self.parity_rules {
            cw[*p] = deps.iter().fold(0u8, |acc, &k| acc ^ (message[k] & 1));
        }
        Ok(cw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ])
        .unwrap()
    }

    /// Independent dense GF(2) product.
    fn dense_syndrome(h: &ParityCheckMatrix, c: &[u8]) -> Vec<u8> {
        h.to_dense()
            .iter()
            .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum::<u8>() % 2)
            .collect()
    }

    #[test]
    fn hamming_message_1011() {
        let h = hamming();
        let enc = Encoder::new(&h).unwrap();
        assert_eq!(enc.k(), 4);
        let msg = [1, 0, 1, 1];
        let cw = enc.encode(&msg).unwrap();
        assert_eq!(dense_syndrome(&h, &cw), vec![0, 0, 0]);
        let sys: Vec<u8> = enc.info_positions().iter().map(|&p| cw[p]).collect();
        assert_eq!(sys, msg);
    }

    #[test]
    fn zero_message_zero_codeword() {
        let enc = Encoder::new(&hamming()).unwrap();
        assert_eq!(enc.encode(&[0; 4]).unwrap(), vec![0; 7]);
    }

    #[test]
    fn rank_deficiency_reported() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 0]]).unwrap();
        match Encoder::new(&h) {
            Err(Error::Setup(msg)) => assert!(msg.contains("rank 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
