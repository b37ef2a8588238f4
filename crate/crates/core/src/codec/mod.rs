//! Channel coding: the LDPC code, its decoder, QPSK mapping and the per-user
//! frame that carries soft information between detector and decoder.

mod alist;
mod decoder;
mod ldpc;
mod qpsk;

pub use alist::{from_alist, to_alist};
pub use decoder::{DecodeOptions, DecodeOutput, DecoderWorkspace};
pub use ldpc::{build_code, LdpcCode};
pub use qpsk::{constellation, demap_hard, map_bits, qpsk_map, soft_symbol, BITS_PER_SYMBOL};

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;

/// Magnitude limit applied to every LLR exchanged in the receiver.
pub const LLR_CLAMP: f64 = 30.0;

/// Default code length: 256 code bits, 128 QPSK symbols.
pub const DEFAULT_CODE_LENGTH: usize = 256;

/// One user's frame and the soft information attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedFrame {
    pub info_bits: Vec<u8>,
    pub codeword: Vec<u8>,
    pub symbols: Vec<Complex64>,
    /// Prior LLRs fed back from the decoder, one per code bit.
    pub prior_llrs: Vec<f64>,
    /// Extrinsic LLRs from the detector, one per code bit.
    pub detector_llrs: Vec<f64>,
    pub iteration: usize,
}

impl CodedFrame {
    pub fn new(code: &LdpcCode, info_bits: Vec<u8>) -> Result<Self> {
        let codeword = code.encode(&info_bits)?;
        let symbols = map_bits(&codeword);
        let n = code.n();
        Ok(Self {
            info_bits,
            codeword,
            symbols,
            prior_llrs: vec![0.0; n],
            detector_llrs: vec![0.0; n],
            iteration: 0,
        })
    }

    /// A frame with uniformly random information bits.
    pub fn random<R: Rng + ?Sized>(code: &LdpcCode, rng: &mut R) -> Result<Self> {
        let info = (0..code.k_info())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        Self::new(code, info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stage};

    #[test]
    fn frame_is_a_codeword() {
        let code = build_code(64, 2).unwrap();
        let frame = CodedFrame::random(&code, &mut substream(1, 0, Stage::Payload)).unwrap();
        assert!(code.syndrome_is_zero(&frame.codeword));
        assert_eq!(frame.symbols.len(), 32);
        assert_eq!(code.extract_info(&frame.codeword), frame.info_bits);
    }
}
