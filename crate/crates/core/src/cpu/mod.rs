//! Stage-two processing at the central unit: LSFD statistics and weights,
//! combining of the local soft estimates, SINR/SE, and the outer loop of
//! iterative detection and decoding.

mod idd;
mod lsfd;

pub use idd::{combine, run_idd, Combined, IddSettings, IterationRecord};
pub use lsfd::{
    estimate_lsfd_stats, lsfd_weights, prelog, sinr_se, spectral_efficiency, ChannelSamples,
    LsfdStats, LsfdWeights, UserLsfdStats,
};
