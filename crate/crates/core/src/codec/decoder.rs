//! Flooding sum-product decoder in the log domain.

use super::ldpc::LdpcCode;
use super::LLR_CLAMP;

/// Options for one decoder call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    pub max_iterations: usize,
    /// Iterations to run even when the channel hard decisions already
    /// satisfy every check. Iterative receivers set this to 1 so the
    /// returned extrinsic LLRs carry information.
    pub min_iterations: usize,
}

impl DecodeOptions {
    pub fn new(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            min_iterations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    /// Channel LLR plus extrinsic LLR per code bit.
    pub posterior: Vec<f64>,
    /// Sum of incoming check messages per code bit.
    pub extrinsic: Vec<f64>,
    pub hard_bits: Vec<u8>,
    pub converged: bool,
    /// Completed message-passing iterations; 0 when the input was already a
    /// codeword.
    pub iterations: usize,
}

/// Per-edge scratch buffers; reusable across calls and codes.
#[derive(Debug, Clone, Default)]
pub struct DecoderWorkspace {
    var_to_check: Vec<f64>,
    check_to_var: Vec<f64>,
    phi: Vec<f64>,
}

/// `φ(x) = −ln tanh(x/2)`, its own inverse on `(0, ∞)`.
fn phi(x: f64) -> f64 {
    (2.0 / x.max(1e-10).exp_m1()).ln_1p()
}

fn hard(llrs: &[f64], out: &mut [u8]) {
    for (b, &l) in out.iter_mut().zip(llrs) {
        *b = u8::from(l > 0.0);
    }
}

impl LdpcCode {
    pub fn decode(&self, llrs: &[f64], max_iterations: usize) -> DecodeOutput {
        self.decode_with(
            llrs,
            DecodeOptions::new(max_iterations),
            &mut DecoderWorkspace::default(),
        )
    }

    /// Decodes channel LLRs (`ln P(1)/P(0)`), clamped to ±30 on entry.
    pub fn decode_with(
        &self,
        llrs: &[f64],
        opts: DecodeOptions,
        ws: &mut DecoderWorkspace,
    ) -> DecodeOutput {
        let n = self.n();
        assert_eq!(llrs.len(), n, "LLR count must equal the code length");
        let channel: Vec<f64> = llrs
            .iter()
            .map(|l| l.clamp(-LLR_CLAMP, LLR_CLAMP))
            .collect();
        let mut hard_bits = vec![0u8; n];
        hard(&channel, &mut hard_bits);
        let mut extrinsic = vec![0.0; n];

        if opts.min_iterations == 0 && self.syndrome_is_zero(&hard_bits) {
            return DecodeOutput {
                posterior: channel,
                extrinsic,
                hard_bits,
                converged: true,
                iterations: 0,
            };
        }

        let edges = self.edge_count();
        ws.var_to_check.clear();
        ws.var_to_check
            .extend(self.edge_var.iter().map(|&v| channel[v]));
        ws.check_to_var.clear();
        ws.check_to_var.resize(edges, 0.0);
        ws.phi.resize(edges, 0.0);

        let mut posterior = channel.clone();
        let mut converged = false;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            iterations += 1;
            for c in 0..self.check_count() {
                let span = self.check_ptr[c]..self.check_ptr[c + 1];
                let mut total = 0.0;
                let mut negative = false;
                for e in span.clone() {
                    let q = ws.var_to_check[e];
                    ws.phi[e] = phi(q.abs());
                    total += ws.phi[e];
                    negative ^= q < 0.0;
                }
                for e in span {
                    let own_negative = ws.var_to_check[e] < 0.0;
                    let magnitude = phi((total - ws.phi[e]).max(0.0));
                    ws.check_to_var[e] = if negative ^ own_negative {
                        -magnitude
                    } else {
                        magnitude
                    };
                }
            }
            for v in 0..n {
                let sum: f64 = self.var_edges[v].iter().map(|&e| ws.check_to_var[e]).sum();
                for &e in &self.var_edges[v] {
                    ws.var_to_check[e] = channel[v] + sum - ws.check_to_var[e];
                }
                extrinsic[v] = sum.clamp(-LLR_CLAMP, LLR_CLAMP);
                posterior[v] = channel[v] + extrinsic[v];
            }
            hard(&posterior, &mut hard_bits);
            if iterations >= opts.min_iterations && self.syndrome_is_zero(&hard_bits) {
                converged = true;
                break;
            }
        }

        DecodeOutput {
            posterior,
            extrinsic,
            hard_bits,
            converged,
            iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::build_code;

    #[test]
    fn phi_is_an_involution() {
        for &x in &[0.01, 0.3, 1.0, 2.5, 7.0, 15.0] {
            assert!((phi(phi(x)) - x).abs() < 1e-9 * x.max(1.0), "{x}");
        }
    }

    #[test]
    fn clean_codeword_converges_immediately() {
        let code = build_code(64, 3).unwrap();
        let info: Vec<u8> = (0..code.k_info()).map(|i| (i % 3 == 0) as u8).collect();
        let cw = code.encode(&info).unwrap();
        let llrs: Vec<f64> = cw
            .iter()
            .map(|&b| if b == 1 { 30.0 } else { -30.0 })
            .collect();
        let out = code.decode(&llrs, 20);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.hard_bits, cw);
        assert!(out.extrinsic.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn min_iterations_forces_message_passing() {
        let code = build_code(64, 3).unwrap();
        let llrs = vec![-2.0; 64];
        let out = code.decode_with(
            &llrs,
            DecodeOptions {
                max_iterations: 5,
                min_iterations: 1,
            },
            &mut DecoderWorkspace::default(),
        );
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!(out.extrinsic.iter().all(|&e| e < 0.0));
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let code = build_code(64, 5).unwrap();
        let out = code.decode(&[0.0; 64], 10);
        assert!(out.extrinsic.iter().all(|&e| e.abs() < 1e-12));
        assert!(!out.converged || out.hard_bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn posterior_is_channel_plus_extrinsic() {
        let code = build_code(64, 8).unwrap();
        let llrs: Vec<f64> = (0..64)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.7)
            .collect();
        let out = code.decode(&llrs, 7);
        for i in 0..64 {
            assert_eq!(out.posterior[i], llrs[i] + out.extrinsic[i]);
        }
    }
}
