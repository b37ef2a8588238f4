//! Binary LDPC codes: progressive-edge-growth construction, GF(2) systematic
//! encoder and the sparse graph used by the decoder.

use rand::seq::IndexedRandom;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

const VAR_DEGREE: usize = 3;
const CHECK_DEGREE: usize = 6;
const MAX_ATTEMPTS: usize = 100;

/// A binary LDPC code with a systematic encoder.
///
/// Edges are numbered check-major; `edge_var[e]` is the variable node of
/// edge `e` and check `c` owns edges `check_ptr[c]..check_ptr[c + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    pub(crate) check_ptr: Vec<usize>,
    pub(crate) edge_var: Vec<usize>,
    pub(crate) var_edges: Vec<Vec<usize>>,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Row `i` gives parity bit `parity_positions[i]` as the GF(2) inner
    /// product with the packed info bits.
    parity_rows: Vec<Vec<u64>>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

impl LdpcCode {
    /// Builds a code from check-node adjacency lists over `n` variables.
    /// The information length is `n − rank(H)`.
    pub fn from_parity_check(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut vars = vec![Vec::new(); n];
        let mut check_ptr = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        check_ptr.push(0);
        for (c, row) in checks.iter().enumerate() {
            for &v in row {
                if v >= n {
                    return Err(Error::Alist(format!(
                        "check {c} references variable {v} >= {n}"
                    )));
                }
                vars[v].push(c);
                edge_var.push(v);
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_edges = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[v].push(e);
        }

        // Reduced row echelon form over GF(2). Pivots are searched from the
        // last column backwards so parity bits collect at the tail.
        let w = words(n);
        let mut rows: Vec<Vec<u64>> = checks
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; w];
                for &v in row {
                    bits[v / 64] ^= 1 << (v % 64);
                }
                bits
            })
            .collect();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in (0..n).rev() {
            let Some(p) = (next..rows.len()).find(|&r| get_bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(next, p);
            let pivot = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && get_bit(row, col) {
                    row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(col);
            next += 1;
            if next == rows.len() {
                break;
            }
        }
        let rank = pivots.len();
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let k = info_positions.len();
        let parity_rows = rows[..rank]
            .iter()
            .map(|row| {
                let mut packed = vec![0u64; words(k)];
                for (i, &pos) in info_positions.iter().enumerate() {
                    if get_bit(row, pos) {
                        set_bit(&mut packed, i);
                    }
                }
                packed
            })
            .collect();

        Ok(Self {
            n,
            checks,
            vars,
            check_ptr,
            edge_var,
            var_edges,
            info_positions,
            parity_positions: pivots,
            parity_rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_info(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k_info() as f64 / self.n as f64
    }

    pub fn check_count(&self) -> usize {
        self.checks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn vars(&self) -> &[Vec<usize>] {
        &self.vars
    }

    /// Codeword positions carrying the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info_bits: &[u8]) -> Result<Vec<u8>> {
        let k = self.k_info();
        if info_bits.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: info_bits.len(),
            });
        }
        let mut packed = vec![0u64; words(k)];
        for (i, &b) in info_bits.iter().enumerate() {
            if b & 1 == 1 {
                set_bit(&mut packed, i);
            }
        }
        let mut codeword = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info_bits) {
            codeword[pos] = b & 1;
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            let ones: u32 = row
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            codeword[pos] = (ones & 1) as u8;
        }
        Ok(codeword)
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }

    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        self.checks
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Number of 4-cycles: pairs of checks sharing two or more variables,
    /// counted once per variable pair.
    pub fn four_cycles(&self) -> usize {
        let m = self.checks.len();
        let mut count = 0;
        let mut shared = vec![0usize; m];
        for c in 0..m {
            shared.iter_mut().for_each(|s| *s = 0);
            for &v in &self.checks[c] {
                for &c2 in &self.vars[v] {
                    if c2 > c {
                        shared[c2] += 1;
                    }
                }
            }
            count += shared
                .iter()
                .map(|&s| s * s.saturating_sub(1) / 2)
                .sum::<usize>();
        }
        count
    }
}

/// Builds a regular (3,6) rate-1/2 code of length `n` by progressive edge
/// growth.
///
/// Attempt `a` draws from stream `a` of the generator seeded with `seed`. Attempts that fail to place an
/// edge or yield a rank-deficient H are discarded; the first full-rank code
/// without 4-cycles is returned, otherwise the full-rank code with the fewest.
pub fn build_code(n: usize, seed: u64) -> Result<LdpcCode> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "code length {n} must be positive and even"
        )));
    }
    let m = n / 2;
    let mut best: Option<(usize, LdpcCode)> = None;
    for attempt in 0..MAX_ATTEMPTS as u64 {
        let Some(checks) = peg_graph(n, m, seed, attempt) else {
            continue;
        };
        let code = LdpcCode::from_parity_check(n, checks)?;
        if code.rank() != m {
            continue;
        }
        let cycles = code.four_cycles();
        if cycles == 0 {
            return Ok(code);
        }
        if best.as_ref().is_none_or(|(c, _)| cycles < *c) {
            best = Some((cycles, code));
        }
    }
    best.map(|(_, c)| c).ok_or(Error::CodeConstruction {
        attempts: MAX_ATTEMPTS,
    })
}

fn peg_graph(n: usize, m: usize, seed: u64, stream: u64) -> Option<Vec<Vec<usize>>> {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(CHECK_DEGREE); m];
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(VAR_DEGREE); n];

    let mut pick_min_degree = |cands: &[usize], check_adj: &[Vec<usize>]| -> Option<usize> {
        let min = cands.iter().map(|&c| check_adj[c].len()).min()?;
        let ties: Vec<usize> = cands
            .iter()
            .copied()
            .filter(|&c| check_adj[c].len() == min)
            .collect();
        ties.choose(&mut rng).copied()
    };

    for j in 0..n {
        for _ in 0..VAR_DEGREE {
            let available = |c: usize, check_adj: &[Vec<usize>], var_adj: &[Vec<usize>]| {
                check_adj[c].len() < CHECK_DEGREE && !var_adj[j].contains(&c)
            };
            let chosen = if var_adj[j].is_empty() {
                let cands: Vec<usize> = (0..m)
                    .filter(|&c| available(c, &check_adj, &var_adj))
                    .collect();
                pick_min_degree(&cands, &check_adj)
            } else {
                // Breadth-first expansion of the graph seen from variable j.
                let mut reached = vec![false; m];
                let mut seen_var = vec![false; n];
                seen_var[j] = true;
                let mut layer: Vec<usize> = var_adj[j].clone();
                layer.iter().for_each(|&c| reached[c] = true);
                let choice;
                loop {
                    let before: Vec<usize> = (0..m)
                        .filter(|&c| !reached[c] && available(c, &check_adj, &var_adj))
                        .collect();
                    let mut next = Vec::new();
                    for &c in &layer {
                        for &v in &check_adj[c] {
                            if seen_var[v] {
                                continue;
                            }
                            seen_var[v] = true;
                            for &c2 in &var_adj[v] {
                                if !reached[c2] {
                                    reached[c2] = true;
                                    next.push(c2);
                                }
                            }
                        }
                    }
                    let all_reached =
                        (0..m).all(|c| reached[c] || !available(c, &check_adj, &var_adj));
                    if next.is_empty() || all_reached {
                        choice = pick_min_degree(&before, &check_adj);
                        break;
                    }
                    layer = next;
                }
                choice.or_else(|| {
                    let cands: Vec<usize> = (0..m)
                        .filter(|&c| available(c, &check_adj, &var_adj))
                        .collect();
                    pick_min_degree(&cands, &check_adj)
                })
            };
            let c = chosen?;
            check_adj[c].push(j);
            var_adj[j].push(c);
        }
    }
    for row in &mut check_adj {
        row.sort_unstable();
    }
    Some(check_adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_like_code_encodes() {
        // H of the (7,4) Hamming code.
        let checks = vec![vec![0, 1, 2, 4], vec![1, 2, 3, 5], vec![0, 1, 3, 6]];
        let code = LdpcCode::from_parity_check(7, checks).unwrap();
        assert_eq!(code.k_info(), 4);
        for word in 0..16u8 {
            let info: Vec<u8> = (0..4).map(|i| (word >> i) & 1).collect();
            let cw = code.encode(&info).unwrap();
            assert!(code.syndrome_is_zero(&cw));
            assert_eq!(code.extract_info(&cw), info);
        }
    }

    #[test]
    fn rejects_odd_length() {
        assert!(build_code(255, 0).is_err());
    }

    #[test]
    fn wrong_info_length_is_an_error() {
        let code = build_code(64, 1).unwrap();
        assert!(matches!(
            code.encode(&[0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn four_cycle_counter_finds_planted_cycle() {
        let checks = vec![vec![0, 1, 2], vec![0, 1, 3]];
        let code = LdpcCode::from_parity_check(4, checks).unwrap();
        assert_eq!(code.four_cycles(), 1);
    }
}
