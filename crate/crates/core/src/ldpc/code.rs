use rand::Rng;

use super::basegraph::BaseGraph;
use super::encoder::Encoder;
use super::matrix::ParityCheckMatrix;
use super::tanner::TannerGraph;
use crate::rng::Stream;
use crate::sigchain::{llr, random_bits, IqSequence, Modulation, NoiseConfig};
use crate::Result;

/// A parity-check matrix with its Tanner graph and encoder.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    pub h: ParityCheckMatrix,
    pub graph: TannerGraph,
    pub encoder: Encoder,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix) -> Result<Self> {
        let encoder = Encoder::new(&h)?;
        let graph = TannerGraph::new(&h);
        Ok(Self { h, graph, encoder })
    }

    pub fn bg2(z: usize) -> Result<Self> {
        Self::new(BaseGraph::bg2().lift(z)?)
    }

    pub fn n(&self) -> usize {
        self.h.n_vars()
    }

    pub fn k(&self) -> usize {
        self.encoder.k()
    }

    pub fn rate(&self) -> f64 {
        self.encoder.rate()
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let msg = random_bits(self.k(), rng);
        self.encoder.encode(&msg).expect("message length matches")
    }
}

/// Complex noise power for BPSK at the given Eb/N0 and code rate.
pub fn noise_variance(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (rate * 10f64.powf(ebn0_db / 10.0))
}

/// Channel LLRs of a BPSK transmission of `codeword` over AWGN.
pub fn bpsk_awgn_llr(
    codeword: &[u8],
    ebn0_db: f64,
    rate: f64,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    let tx = Modulation::Bpsk.modulate(codeword)?;
    let n0 = noise_variance(ebn0_db, rate);
    let rx: IqSequence = tx.add_noise(&NoiseConfig::Awgn { variance: n0 }, rng)?;
    llr(&rx, Modulation::Bpsk, n0)
}
