//! Gray-mapped QPSK with unit average energy.
//!
//! Bits `(b1, b2)` map to `(√2/2)((2b1 − 1) + j(2b2 − 1))`; code bits `2i` and
//! `2i + 1` form symbol `i`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

/// Bits per QPSK symbol.
pub const BITS_PER_SYMBOL: usize = 2;

fn level(bit: u8) -> f64 {
    if bit & 1 == 1 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    }
}

pub fn qpsk_map(b1: u8, b2: u8) -> Complex64 {
    Complex64::new(level(b1), level(b2))
}

/// The four constellation points indexed by `2·b1 + b2`.
pub fn constellation() -> [([u8; 2], Complex64); 4] {
    [[0, 0], [0, 1], [1, 0], [1, 1]].map(|b| (b, qpsk_map(b[0], b[1])))
}

pub fn map_bits(bits: &[u8]) -> Vec<Complex64> {
    assert!(
        bits.len().is_multiple_of(BITS_PER_SYMBOL),
        "bit count must be even"
    );
    bits.chunks_exact(2).map(|p| qpsk_map(p[0], p[1])).collect()
}

/// Hard demapping by quadrant.
pub fn demap_hard(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re > 0.0), u8::from(s.im > 0.0)])
        .collect()
}

/// Posterior mean and variance of a symbol given prior LLRs of its two bits.
pub fn soft_symbol(lc1: f64, lc2: f64) -> (Complex64, f64) {
    let mean = Complex64::new(
        FRAC_1_SQRT_2 * (lc1 / 2.0).tanh(),
        FRAC_1_SQRT_2 * (lc2 / 2.0).tanh(),
    );
    (mean, (1.0 - mean.norm_sqr()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_labels() {
        let s = qpsk_map(1, 0);
        assert!((s - Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).norm() < 1e-15);
        let energy: f64 = constellation()
            .iter()
            .map(|(_, x)| x.norm_sqr())
            .sum::<f64>()
            / 4.0;
        assert!((energy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        let pts = constellation();
        for (a, xa) in &pts {
            for (b, xb) in &pts {
                let d = (xa - xb).norm();
                if (d - 2f64.sqrt()).abs() < 1e-12 {
                    let diff = (a[0] ^ b[0]) + (a[1] ^ b[1]);
                    assert_eq!(diff, 1);
                }
            }
        }
    }

    #[test]
    fn map_then_demap() {
        let bits = [0, 1, 1, 1, 1, 0, 0, 0];
        assert_eq!(demap_hard(&map_bits(&bits)), bits);
    }

    #[test]
    fn soft_symbol_limits() {
        let (m, v) = soft_symbol(0.0, 0.0);
        assert_eq!(m, Complex64::new(0.0, 0.0));
        assert_eq!(v, 1.0);
        let (m, v) = soft_symbol(60.0, -60.0);
        assert!((m - qpsk_map(1, 0)).norm() < 1e-12);
        assert!(v < 1e-12);
    }
}
