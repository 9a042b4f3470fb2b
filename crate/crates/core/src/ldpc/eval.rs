use std::io::Write;

use rayon::prelude::*;

use super::code::{bpsk_awgn_llr, LdpcCode};
use super::decoder::{classic_min_sum_run, hard_decision, neural_ms_run, NeuralMsParams};
use crate::csvfmt::fmt_f64;
use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum DecoderChoice {
    /// Plain min-sum reference decoder.
    Classic,
    Neural(NeuralMsParams),
}

impl DecoderChoice {
    pub fn decode(&self, code: &LdpcCode, llr: &[f64], layers: usize) -> Result<Vec<u8>> {
        match self {
            DecoderChoice::Classic => {
                Ok(classic_min_sum_run(llr, &code.graph, layers, false)?.hard)
            }
            DecoderChoice::Neural(p) => Ok(neural_ms_run(llr, &code.graph, p, layers, false)?.hard),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerRow {
    pub ebn0_db: f64,
    /// Percent of bits correct from channel hard decisions.
    pub pre_pct: f64,
    /// Percent of bits correct after decoding.
    pub post_pct: f64,
    pub bler: f64,
    /// 95% normal-approximation half-width of the block error rate.
    pub ci_halfwidth: f64,
    pub trials: usize,
}

pub fn ci95_halfwidth(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Random codewords over BPSK/AWGN at each Eb/N0. Trial `t` of point `i`
/// draws from its own stream, so any two decoders evaluated with the same
/// seed see identical channel realizations.
pub fn ber_eval(
    code: &LdpcCode,
    decoder: &DecoderChoice,
    layers: usize,
    ebn0_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<BerRow>> {
    if trials == 0 {
        return Err(Error::Input(
            "at least one trial per point is required".into(),
        ));
    }
    ebn0_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let point = Stream::new(seed, "ldpc-ber", i as u64);
            let counts = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = point.derive("trial", t as u64);
                    let cw = code.random_codeword(&mut rng);
                    let llr = bpsk_awgn_llr(&cw, snr, code.rate(), &mut rng)?;
                    let pre = hard_decision(&llr);
                    let post = decoder.decode(code, &llr, layers)?;
                    let pre_ok = pre.iter().zip(&cw).filter(|(a, b)| a == b).count();
                    let post_ok = post.iter().zip(&cw).filter(|(a, b)| a == b).count();
                    Ok((pre_ok, post_ok, post_ok != cw.len()))
                })
                .collect::<Result<Vec<_>>>()?;
            let bits = (trials * code.n()) as f64;
            let pre: usize = counts.iter().map(|c| c.0).sum();
            let post: usize = counts.iter().map(|c| c.1).sum();
            let errors = counts.iter().filter(|c| c.2).count();
            let bler = errors as f64 / trials as f64;
            Ok(BerRow {
                ebn0_db: snr,
                pre_pct: 100.0 * pre as f64 / bits,
                post_pct: 100.0 * post as f64 / bits,
                bler,
                ci_halfwidth: ci95_halfwidth(bler, trials),
                trials,
            })
        })
        .collect()
}

pub fn write_ber_csv<W: Write>(rows: &[BerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ebn0_db", "pre_pct", "post_pct", "bler", "ci_halfwidth"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.ebn0_db),
            fmt_f64(r.pre_pct),
            fmt_f64(r.post_pct),
            fmt_f64(r.bler),
            fmt_f64(r.ci_halfwidth),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<ber csv>", e))
}
