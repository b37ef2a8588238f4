use serde::{Deserialize, Serialize};

/// Binary AP-user association `d_kl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceMap {
    user_count: usize,
    ap_count: usize,
    /// Row-major K×L.
    d: Vec<bool>,
}

impl ServiceMap {
    pub fn empty(user_count: usize, ap_count: usize) -> Self {
        Self {
            user_count,
            ap_count,
            d: vec![false; user_count * ap_count],
        }
    }

    pub fn full(user_count: usize, ap_count: usize) -> Self {
        Self {
            user_count,
            ap_count,
            d: vec![true; user_count * ap_count],
        }
    }

    pub fn from_fn(
        user_count: usize,
        ap_count: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut map = Self::empty(user_count, ap_count);
        for k in 0..user_count {
            for l in 0..ap_count {
                map.d[k * ap_count + l] = f(k, l);
            }
        }
        map
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn ap_count(&self) -> usize {
        self.ap_count
    }

    pub fn serves(&self, k: usize, l: usize) -> bool {
        self.d[k * self.ap_count + l]
    }

    pub fn set(&mut self, k: usize, l: usize, on: bool) {
        self.d[k * self.ap_count + l] = on;
    }

    /// APs serving user `k` (M_k), ascending.
    pub fn aps_of(&self, k: usize) -> Vec<usize> {
        (0..self.ap_count).filter(|&l| self.serves(k, l)).collect()
    }

    /// Users served by AP `l` (D_l), ascending.
    pub fn users_of(&self, l: usize) -> Vec<usize> {
        (0..self.user_count)
            .filter(|&k| self.serves(k, l))
            .collect()
    }

    /// Users sharing at least one serving AP with `k`, including `k` (B_k).
    pub fn co_served(&self, k: usize) -> Vec<usize> {
        let aps = self.aps_of(k);
        (0..self.user_count)
            .filter(|&i| i == k || aps.iter().any(|&l| self.serves(i, l)))
            .collect()
    }

    pub fn load(&self, l: usize) -> usize {
        (0..self.user_count).filter(|&k| self.serves(k, l)).count()
    }

    /// |M_k| for every user.
    pub fn cardinalities(&self) -> Vec<usize> {
        (0..self.user_count)
            .map(|k| (0..self.ap_count).filter(|&l| self.serves(k, l)).count())
            .collect()
    }

    pub fn mean_aps_per_user(&self) -> f64 {
        if self.user_count == 0 {
            return 0.0;
        }
        self.cardinalities().iter().sum::<usize>() as f64 / self.user_count as f64
    }

    /// Every user is served by at least one AP.
    pub fn is_covering(&self) -> bool {
        self.cardinalities().iter().all(|&c| c > 0)
    }

    /// Every AP serves at most `cap` users.
    pub fn respects_cap(&self, cap: usize) -> bool {
        (0..self.ap_count).all(|l| self.load(l) <= cap)
    }

    /// The same association with `extra` unused APs appended.
    pub fn padded(&self, extra: usize) -> Self {
        Self::from_fn(self.user_count, self.ap_count + extra, |k, l| {
            l < self.ap_count && self.serves(k, l)
        })
    }
}
