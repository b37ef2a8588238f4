use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NetworkRealization;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Versioned JSON form of a realization. Complex numbers are `[re, im]`
/// pairs and matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationSnapshot {
    pub version: u32,
    pub antennas: usize,
    pub tau_p: usize,
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// K rows of L gains.
    pub beta: Vec<Vec<f64>>,
    pub pilot_of: Vec<usize>,
    pub eta: Vec<f64>,
    pub sigma2: f64,
    pub r: Vec<Vec<[f64; 2]>>,
    pub h_true: Vec<Vec<[f64; 2]>>,
    pub h_hat: Vec<Vec<[f64; 2]>>,
    pub c: Vec<Vec<[f64; 2]>>,
}

fn pack(it: impl Iterator<Item = Complex64>) -> Vec<[f64; 2]> {
    it.map(|z| [z.re, z.im]).collect()
}

fn pack_mat(m: &CMat) -> Vec<[f64; 2]> {
    pack((0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| m[(r, c)])))
}

fn unpack_mat(v: &[[f64; 2]], n: usize) -> Result<CMat> {
    if v.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: v.len(),
        });
    }
    Ok(CMat::from_row_iterator(
        n,
        n,
        v.iter().map(|p| Complex64::new(p[0], p[1])),
    ))
}

fn unpack_vec(v: &[[f64; 2]], n: usize) -> Result<CVec> {
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(CVec::from_iterator(
        n,
        v.iter().map(|p| Complex64::new(p[0], p[1])),
    ))
}

impl RealizationSnapshot {
    pub fn from_realization(real: &NetworkRealization) -> Self {
        Self {
            version: SNAPSHOT_VERSION,
            antennas: real.antennas,
            tau_p: real.tau_p,
            ap_positions: real.ap_positions.clone(),
            user_positions: real.user_positions.clone(),
            beta: (0..real.beta.nrows())
                .map(|k| real.beta.row(k).iter().copied().collect())
                .collect(),
            pilot_of: real.pilot_of.clone(),
            eta: real.eta.clone(),
            sigma2: real.sigma2,
            r: real.r.iter().map(pack_mat).collect(),
            h_true: real
                .h_true
                .iter()
                .map(|v| pack(v.iter().copied()))
                .collect(),
            h_hat: real.h_hat.iter().map(|v| pack(v.iter().copied())).collect(),
            c: real.c.iter().map(pack_mat).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Self = serde_json::from_str(text)?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "snapshot version {} is not supported (expected {SNAPSHOT_VERSION})",
                snap.version
            )));
        }
        Ok(snap)
    }

    pub fn into_realization(self) -> Result<NetworkRealization> {
        let n = self.antennas;
        let k_count = self.user_positions.len();
        let l_count = self.ap_positions.len();
        let mut beta = DMatrix::zeros(k_count, l_count);
        for (k, row) in self.beta.iter().enumerate() {
            if row.len() != l_count {
                return Err(Error::LengthMismatch {
                    expected: l_count,
                    got: row.len(),
                });
            }
            for (l, &b) in row.iter().enumerate() {
                beta[(k, l)] = b;
            }
        }
        Ok(NetworkRealization {
            ap_positions: self.ap_positions,
            user_positions: self.user_positions,
            beta,
            r: self
                .r
                .iter()
                .map(|m| unpack_mat(m, n))
                .collect::<Result<_>>()?,
            pilot_of: self.pilot_of,
            tau_p: self.tau_p,
            antennas: n,
            h_true: self
                .h_true
                .iter()
                .map(|v| unpack_vec(v, n))
                .collect::<Result<_>>()?,
            h_hat: self
                .h_hat
                .iter()
                .map(|v| unpack_vec(v, n))
                .collect::<Result<_>>()?,
            c: self
                .c
                .iter()
                .map(|m| unpack_mat(m, n))
                .collect::<Result<_>>()?,
            eta: self.eta,
            sigma2: self.sigma2,
            diagnostics: Default::default(),
        })
    }
}
