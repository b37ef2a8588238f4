//! AP selection: which access points take part in detecting which users,
//! plus the fronthaul and complexity accounting of the resulting maps.

mod accounting;
mod service_map;
mod strategy;

pub use accounting::{flop_count, fronthaul_load, fronthaul_load_real, FlopParams, Scheme};
pub use service_map::ServiceMap;
pub use strategy::Strategy;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

use crate::apfrontend::{detect_local, mean_abs_llr, LinkState};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Master AP of every user: the AP with the largest large-scale gain, lower
/// index on ties.
pub fn master_aps(beta: &DMatrix<f64>) -> Vec<usize> {
    (0..beta.nrows())
        .map(|k| {
            let mut best = 0;
            for l in 1..beta.ncols() {
                if beta[(k, l)] > beta[(k, best)] {
                    best = l;
                }
            }
            best
        })
        .collect()
}

/// Users at each AP whose metric is at least the mean metric over `pool(l)`.
fn mean_test(metric: &DMatrix<f64>, mut pool: impl FnMut(usize) -> Vec<usize>) -> ServiceMap {
    let (k_count, l_count) = metric.shape();
    let mut map = ServiceMap::empty(k_count, l_count);
    for l in 0..l_count {
        let users = pool(l);
        if users.is_empty() {
            continue;
        }
        let mean = users.iter().map(|&k| metric[(k, l)]).sum::<f64>() / users.len() as f64;
        for &k in &users {
            if metric[(k, l)] >= mean {
                map.set(k, l, true);
            }
        }
    }
    map
}

/// Makes a candidate map valid: master APs are added, each AP is trimmed to
/// `cap` users (masters first, then by decreasing gain, lower user index on
/// ties) and any user left without an AP is attached to the best AP that
/// still has room, preferring APs it held in `prior`.
pub fn enforce(
    candidates: &ServiceMap,
    beta: &DMatrix<f64>,
    cap: usize,
    prior: Option<&ServiceMap>,
) -> Result<ServiceMap> {
    let (k_count, l_count) = beta.shape();
    let masters = master_aps(beta);
    let mut map = ServiceMap::empty(k_count, l_count);
    for l in 0..l_count {
        let mut users: Vec<usize> = (0..k_count)
            .filter(|&k| candidates.serves(k, l) || masters[k] == l)
            .collect();
        users.sort_by(|&a, &b| {
            let ma = masters[a] == l;
            let mb = masters[b] == l;
            mb.cmp(&ma)
                .then(beta[(b, l)].total_cmp(&beta[(a, l)]))
                .then(a.cmp(&b))
        });
        for &k in users.iter().take(cap) {
            map.set(k, l, true);
        }
    }
    for k in 0..k_count {
        if !map.aps_of(k).is_empty() {
            continue;
        }
        let mut order: Vec<usize> = (0..l_count).collect();
        order.sort_by(|&a, &b| {
            let pa = prior.is_some_and(|p| p.serves(k, a));
            let pb = prior.is_some_and(|p| p.serves(k, b));
            pb.cmp(&pa)
                .then(beta[(k, b)].total_cmp(&beta[(k, a)]))
                .then(a.cmp(&b))
        });
        let l = order
            .into_iter()
            .find(|&l| map.load(l) < cap)
            .ok_or(Error::Unservable { user: k })?;
        map.set(k, l, true);
    }
    Ok(map)
}

/// The initial-access map: mean large-scale-gain test, masters, cap.
pub fn initial_access(beta: &DMatrix<f64>, cap: usize) -> Result<ServiceMap> {
    let k_count = beta.nrows();
    enforce(
        &mean_test(beta, |_| (0..k_count).collect()),
        beta,
        cap,
        None,
    )
}

/// `η_k ‖ĥ_kl‖²` as a K×L matrix.
pub fn effective_gain(link: &LinkState, ap_count: usize) -> DMatrix<f64> {
    DMatrix::from_fn(link.user_count, ap_count, |k, l| {
        link.eta[k] * link.h_hat[link.idx(l, k)].norm_squared()
    })
}

/// Mean |LLR| of each served user at each AP, detecting with `prior` as the
/// served sets. Entries for unserved links are zero.
pub fn llr_scores(link: &LinkState, prior: &ServiceMap, y: &[CMat]) -> DMatrix<f64> {
    let mut scores = DMatrix::zeros(prior.user_count(), prior.ap_count());
    for l in 0..prior.ap_count() {
        let served = prior.users_of(l);
        for est in detect_local(link, l, &served, &y[l], None) {
            scores[(est.user, l)] = mean_abs_llr(&est);
        }
    }
    scores
}

/// Keeps `k ∈ D_l` iff its score is at least the mean score over `D_l`.
pub fn llr_refine(prior: &ServiceMap, scores: &DMatrix<f64>) -> ServiceMap {
    mean_test(scores, |l| prior.users_of(l))
}

/// What a strategy may look at.
#[derive(Debug, Clone, Copy)]
pub struct SelectionInput<'a> {
    pub beta: &'a DMatrix<f64>,
    pub link: LinkState<'a>,
    /// Stage-one data observations per AP; required by the LLR strategies.
    pub observations: Option<&'a [CMat]>,
    /// Per-AP user cap, the pilot length.
    pub cap: usize,
}

pub fn select<R: Rng + ?Sized>(
    strategy: Strategy,
    input: &SelectionInput,
    rng: &mut R,
) -> Result<ServiceMap> {
    let beta = input.beta;
    let (k_count, l_count) = beta.shape();
    let cap = input.cap;
    let observations = || input.observations.ok_or(Error::MissingLlrs(strategy));
    match strategy {
        Strategy::AllAps => Ok(ServiceMap::full(k_count, l_count)),
        Strategy::Llsf => initial_access(beta, cap),
        Strategy::Lecg => {
            let gain = effective_gain(&input.link, l_count);
            enforce(
                &mean_test(&gain, |_| (0..k_count).collect()),
                beta,
                cap,
                None,
            )
        }
        Strategy::Random => {
            let sizes = mean_test(beta, |_| (0..k_count).collect());
            let mut cand = ServiceMap::empty(k_count, l_count);
            for l in 0..l_count {
                let count = sizes.load(l).min(k_count);
                for k in index::sample(rng, k_count, count) {
                    cand.set(k, l, true);
                }
            }
            enforce(&cand, beta, cap, None)
        }
        Strategy::LlrLlsf | Strategy::LlrLecg => {
            let y = observations()?;
            let base = if strategy == Strategy::LlrLlsf {
                Strategy::Llsf
            } else {
                Strategy::Lecg
            };
            let init = select(base, input, rng)?;
            let scores = llr_scores(&input.link, &init, y);
            enforce(&llr_refine(&init, &scores), beta, cap, Some(&init))
        }
        Strategy::LlrM => {
            let y = observations()?;
            let everyone = ServiceMap::full(k_count, l_count);
            let scores = llr_scores(&input.link, &everyone, y);
            enforce(&llr_refine(&everyone, &scores), beta, cap, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn master_guarantee_hand_walk() {
        let beta = DMatrix::from_row_slice(2, 1, &[2.0, 1.0]);
        let map = initial_access(&beta, 12).unwrap();
        assert!(map.serves(0, 0) && map.serves(1, 0));
        let raw = mean_test(&beta, |_| vec![0, 1]);
        assert!(raw.serves(0, 0) && !raw.serves(1, 0));
    }

    #[test]
    fn equal_gains_trim_by_index() {
        let beta = DMatrix::from_fn(5, 2, |k, l| {
            if l == 0 {
                1.0
            } else if k < 3 {
                0.1
            } else {
                0.5
            }
        });
        let map = initial_access(&beta, 3).unwrap();
        assert_eq!(map.users_of(0), vec![0, 1, 2]);
        assert_eq!(map.users_of(1), vec![3, 4]);
    }

    #[test]
    fn llr_hand_walk() {
        // Two users at AP 0; user 1's master is AP 1.
        let beta = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 0.9]);
        let prior = ServiceMap::full(2, 2);
        let scores = DMatrix::from_row_slice(2, 2, &[5.0, 1.0, 1.0, 5.0]);
        let refined = enforce(&llr_refine(&prior, &scores), &beta, 12, Some(&prior)).unwrap();
        assert_eq!(refined.users_of(0), vec![0]);
        assert_eq!(refined.users_of(1), vec![1]);
    }

    #[test]
    fn cap_is_enforced_and_coverage_kept() {
        // Three users share master AP 0, cap 2: the weakest moves to AP 1.
        let beta = DMatrix::from_row_slice(3, 2, &[1.0, 0.1, 0.9, 0.1, 0.8, 0.2]);
        let map = enforce(&ServiceMap::empty(3, 2), &beta, 2, None).unwrap();
        assert_eq!(map.users_of(0), vec![0, 1]);
        assert_eq!(map.aps_of(2), vec![1]);
    }

    #[test]
    fn unservable_user_is_an_error() {
        let beta = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(
            enforce(&ServiceMap::empty(3, 1), &beta, 2, None),
            Err(Error::Unservable { user: 2 })
        ));
    }

    #[test]
    fn llsf_is_scale_invariant_per_ap() {
        let beta = DMatrix::from_row_slice(3, 2, &[1.0, 0.35, 0.2, 0.5, 0.7, 0.1]);
        let mut scaled = beta.clone();
        scaled.column_mut(1).scale_mut(17.0);
        let a = mean_test(&beta, |_| vec![0, 1, 2]);
        let b = mean_test(&scaled, |_| vec![0, 1, 2]);
        assert_eq!(a, b);
    }
}
