#![allow(dead_code)]

use autor_core::ldpc::{LdpcCode, ParityCheckMatrix};

/// (7,4) Hamming code; every check has degree 4.
pub fn hamming() -> LdpcCode {
    let dense = vec![
        vec![1, 1, 0, 1, 1, 0, 0],
        vec![1, 0, 1, 1, 0, 1, 0],
        vec![0, 1, 1, 1, 0, 0, 1],
    ];
    LdpcCode::new(ParityCheckMatrix::from_dense(&dense).unwrap()).unwrap()
}

/// GF(2) product written out term by term.
pub fn gf2_syndrome(dense: &[Vec<u8>], bits: &[u8]) -> Vec<u8> {
    dense
        .iter()
        .map(|row| row.iter().zip(bits).fold(0u8, |acc, (h, b)| acc ^ (h & b)))
        .collect()
}

/// All 16 Hamming codewords by enumerating 7-bit words with zero syndrome.
pub fn hamming_codewords() -> Vec<Vec<u8>> {
    let dense = hamming().h.to_dense();
    (0u32..128)
        .map(|w| (0..7).map(|i| ((w >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|c| gf2_syndrome(&dense, c).iter().all(|s| *s == 0))
        .collect()
}

/// Maximum-likelihood codeword for BPSK LLRs (positive favours 0).
pub fn ml_decode(llr: &[f64]) -> Vec<u8> {
    hamming_codewords()
        .into_iter()
        .max_by(|a, b| {
            let score = |c: &Vec<u8>| -> f64 {
                c.iter()
                    .zip(llr)
                    .map(|(b, l)| if *b == 0 { *l } else { -l })
                    .sum()
            };
            score(a).total_cmp(&score(b))
        })
        .unwrap()
}

/// Classifier recipe for the receive chain: Eb/N0 per information bit within
/// half a dB of 4 dB plus a clean-channel anchor, single path, log features.
pub fn operating_point_amc(
    code_rate: f64,
) -> (
    autor_core::amc::AmcDatasetSpec,
    autor_core::amc::AmcHyperParams,
) {
    let spec = autor_core::amc::AmcDatasetSpec {
        snr_db: vec![3.5, 4.0, 4.5, 40.0],
        ebn0_code_rate: Some(code_rate),
        paths: vec![1],
        messages_per_combo: 20,
        message_len: 9984,
        ..autor_core::amc::AmcDatasetSpec::default()
    };
    let hp = autor_core::amc::AmcHyperParams {
        log_features: true,
        ..autor_core::amc::AmcHyperParams::default()
    };
    (spec, hp)
}

/// Second implementation: explicit loops, its own SINR and table lookup.
pub fn nested_loop_best(
    gains: &[Vec<f64>],
    pool: &[f64],
    m: usize,
    noise_mw: f64,
) -> (f64, usize, usize) {
    let se = |db: f64| -> f64 {
        let db = db.clamp(-5.0, 40.0);
        let mut out = 0.0;
        for k in 0..15 {
            let th = -5.0 + 2.0 * k as f64;
            if db >= th {
                out = ((1.0 + 10f64.powf(th / 10.0)).log2() * 1e4).round() / 1e4;
            }
        }
        out.min(7.4063)
    };
    let per = (m + 1) * pool.len();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for a0 in 0..per {
        for a1 in 0..per {
            let (rb, pw) = (
                [a0 / pool.len(), a1 / pool.len()],
                [a0 % pool.len(), a1 % pool.len()],
            );
            let mut total = 0.0;
            for j in 0..2 {
                if rb[j] == m {
                    continue;
                }
                let o = 1 - j;
                let p = |i: usize| 10f64.powf(pool[pw[i]] / 10.0);
                let mut interf = noise_mw;
                if rb[o] == rb[j] {
                    interf += p(o) * gains[o][j];
                }
                total += se(10.0 * (p(j) * gains[j][j] / interf).log10());
            }
            if total > best.0 {
                best = (total, a0, a1);
            }
        }
    }
    best
}
