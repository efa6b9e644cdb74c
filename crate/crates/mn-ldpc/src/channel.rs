//! Bit-level channel models (BSC, BEC, BI-AWGN) and conversion of received
//! bits into GF(q) noise-symbol likelihoods.
//!
//! Every channel is reduced to the same interface: a vector of received
//! (or hard-decided, or erasure-filled) bits together with the per-bit
//! probability that the corresponding noise bit is 1. The product of those
//! per-bit probabilities over one symbol's bit group gives the noise-symbol
//! prior Q_j^a used to seed the decoder.

use rand::Rng;

use crate::{Error, Result};

/// A memoryless binary channel and its noise parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    /// Binary symmetric channel with flip probability f.
    Bsc { flip_prob: f64 },
    /// Binary erasure channel with erasure probability eps.
    Bec { erasure_prob: f64 },
    /// Binary-input AWGN: bit b sent as 1 - 2b with unit signal energy,
    /// Gaussian noise of standard deviation sigma.
    BiAwgn { sigma: f64 },
}

impl ChannelSpec {
    /// Validates the noise parameter range.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Bsc { flip_prob } => {
                if !(flip_prob > 0.0 && flip_prob < 0.5) {
                    return Err(Error::InvalidChannel(format!(
                        "BSC flip probability {flip_prob} outside (0, 0.5)"
                    )));
                }
            }
            ChannelSpec::Bec { erasure_prob } => {
                if !(erasure_prob > 0.0 && erasure_prob < 1.0) {
                    return Err(Error::InvalidChannel(format!(
                        "BEC erasure probability {erasure_prob} outside (0, 1)"
                    )));
                }
            }
            ChannelSpec::BiAwgn { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidChannel(format!(
                        "AWGN sigma {sigma} not positive"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ChannelSpec::Bsc { .. } => "bsc",
            ChannelSpec::Bec { .. } => "bec",
            ChannelSpec::BiAwgn { .. } => "biawgn",
        }
    }

    /// The raw noise parameter (f, eps or sigma).
    pub fn noise_param(&self) -> f64 {
        match *self {
            ChannelSpec::Bsc { flip_prob } => flip_prob,
            ChannelSpec::Bec { erasure_prob } => erasure_prob,
            ChannelSpec::BiAwgn { sigma } => sigma,
        }
    }

    /// Same channel kind with a different noise parameter.
    pub fn with_noise_param(&self, value: f64) -> ChannelSpec {
        match self {
            ChannelSpec::Bsc { .. } => ChannelSpec::Bsc { flip_prob: value },
            ChannelSpec::Bec { .. } => ChannelSpec::Bec {
                erasure_prob: value,
            },
            ChannelSpec::BiAwgn { .. } => ChannelSpec::BiAwgn { sigma: value },
        }
    }
}

/// The receiver-side view of one transmitted bit vector.
#[derive(Debug, Clone)]
pub struct ChannelOutput {
    /// Received bits with erasures filled by 0 and AWGN outputs replaced by
    /// hard decisions.
    pub filled_bits: Vec<u8>,
    /// Per bit, the posterior probability that the noise bit (filled bit
    /// XOR transmitted bit) is 1.
    pub bit_flip_prob: Vec<f64>,
}

/// Sends `t_bits` through the channel.
///
/// * BSC: each bit flips independently with probability f; the noise
///   evidence is the constant f.
/// * BEC: each bit erases with probability eps; erased positions are
///   filled with 0 and carry noise probability 1/2, unerased positions 0.
/// * BI-AWGN: bit b maps to 1 - 2b, Gaussian noise is added, the filled
///   bit is the sign decision (y < 0 reads as 1) and the noise probability
///   is 1 / (1 + exp(2|y| / sigma^2)), the chance the decision is wrong.
pub fn transmit(t_bits: &[u8], spec: ChannelSpec, rng: &mut impl Rng) -> ChannelOutput {
    debug_assert!(spec.validate().is_ok());
    let mut filled_bits = Vec::with_capacity(t_bits.len());
    let mut bit_flip_prob = Vec::with_capacity(t_bits.len());
    match spec {
        ChannelSpec::Bsc { flip_prob } => {
            for &b in t_bits {
                let flip = rng.random::<f64>() < flip_prob;
                filled_bits.push(b ^ u8::from(flip));
                bit_flip_prob.push(flip_prob);
            }
        }
        ChannelSpec::Bec { erasure_prob } => {
            for &b in t_bits {
                if rng.random::<f64>() < erasure_prob {
                    filled_bits.push(0);
                    bit_flip_prob.push(0.5);
                } else {
                    filled_bits.push(b);
                    bit_flip_prob.push(0.0);
                }
            }
        }
        ChannelSpec::BiAwgn { sigma } => {
            for &b in t_bits {
                let x = 1.0 - 2.0 * f64::from(b);
                let y = x + sigma * standard_normal(rng);
                filled_bits.push(u8::from(y < 0.0));
                bit_flip_prob.push(1.0 / (1.0 + (2.0 * y.abs() / (sigma * sigma)).exp()));
            }
        }
    }
    ChannelOutput {
        filled_bits,
        bit_flip_prob,
    }
}

/// Box-Muller standard normal; hand-rolled so the sample stream depends
/// only on the RNG, not on a distribution crate's algorithm choice.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Prior probability vector over GF(q) for noise symbol `j`: the product
/// over the symbol's bits of the per-bit noise evidence,
/// `Q_j^a = prod_k (bit_k(a) == 1 ? p_k : 1 - p_k)`.
///
/// For the BSC this reduces to `f^L (1-f)^(m-L)` with L the number of ones
/// in the bit representation of `a`.
pub fn noise_symbol_prior(output: &ChannelOutput, j: usize, q: usize) -> Vec<f64> {
    let m = q.trailing_zeros() as usize;
    let bits = &output.bit_flip_prob[j * m..(j + 1) * m];
    let mut prior = Vec::with_capacity(q);
    for a in 0..q {
        let mut p = 1.0;
        for (k, &pk) in bits.iter().enumerate() {
            p *= if (a >> k) & 1 == 1 { pk } else { 1.0 - pk };
        }
        prior.push(p);
    }
    prior
}
