//! Gaussian fermionic state on Majorana modes, stored as its covariance
//! matrix `M[i][j] = i <[g_i, g_j]> / 2`.

use rand::Rng;

/// Probabilities below this are treated as impossible outcomes.
pub const BRANCH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaState {
    m: usize,
    cov: Vec<f64>,
}

impl Default for MajoranaState {
    fn default() -> Self {
        Self::new()
    }
}

impl MajoranaState {
    pub fn new() -> Self {
        MajoranaState { m: 0, cov: Vec::new() }
    }

    pub fn mode_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.m + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let m = self.m;
        self.cov[i * m + j] = v;
        self.cov[j * m + i] = -v;
    }

    /// Appends two modes whose pair parity `i g_a g_b` is +1. Returns their indices.
    pub fn add_pair(&mut self) -> (usize, usize) {
        let old = self.m;
        let new = old + 2;
        let mut cov = vec![0.0; new * new];
        for i in 0..old {
            cov[i * new..i * new + old].copy_from_slice(&self.cov[i * old..(i + 1) * old]);
        }
        self.m = new;
        self.cov = cov;
        self.set(old, old + 1, 1.0);
        (old, old + 1)
    }

    /// Probability that `i g_a g_b` reads +1.
    pub fn prob_plus(&self, a: usize, b: usize) -> f64 {
        ((1.0 + self.get(a, b)) / 2.0).clamp(0.0, 1.0)
    }

    /// Projects onto pair parity `s` of modes (a, b). Returns the outcome's prior
    /// probability; the caller must not force an outcome of probability ~0.
    pub fn project(&mut self, a: usize, b: usize, s: i8) -> f64 {
        assert!(a != b, "same mode measured twice");
        let sf = f64::from(s);
        let mab = self.get(a, b);
        let denom = 1.0 + sf * mab;
        let prob = denom / 2.0;
        assert!(prob > BRANCH_EPS, "projection onto an impossible outcome");
        let m = self.m;
        let col_a: Vec<f64> = (0..m).map(|k| self.get(k, a)).collect();
        let col_b: Vec<f64> = (0..m).map(|k| self.get(k, b)).collect();
        for k in 0..m {
            if k == a || k == b {
                continue;
            }
            for l in (k + 1)..m {
                if l == a || l == b {
                    continue;
                }
                let v = self.get(k, l) + sf * (col_b[k] * col_a[l] - col_a[k] * col_b[l]) / denom;
                self.set(k, l, v);
            }
        }
        for k in 0..m {
            if k != a && k != b {
                self.set(a, k, 0.0);
                self.set(b, k, 0.0);
            }
        }
        self.set(a, b, sf);
        prob
    }

    /// Born-rule parity measurement of `i g_a g_b`.
    pub fn measure<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> i8 {
        let p = self.prob_plus(a, b);
        let s = if p >= 1.0 - BRANCH_EPS {
            1
        } else if p <= BRANCH_EPS {
            -1
        } else if rng.gen::<f64>() < p {
            1
        } else {
            -1
        };
        self.project(a, b, s);
        s
    }

    /// Deletes modes `a` and `b`, shifting higher indices down.
    pub fn remove_pair(&mut self, a: usize, b: usize) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let old = self.m;
        let new = old - 2;
        let keep: Vec<usize> = (0..old).filter(|&k| k != lo && k != hi).collect();
        let mut cov = vec![0.0; new * new];
        for (ni, &oi) in keep.iter().enumerate() {
            for (nj, &oj) in keep.iter().enumerate() {
                cov[ni * new + nj] = self.cov[oi * old + oj];
            }
        }
        self.m = new;
        self.cov = cov;
    }

    /// Applies `exp(s pi/4 g_i g_j)`: g_i -> s g_j, g_j -> -s g_i.
    pub fn exchange(&mut self, i: usize, j: usize, s: i8) {
        let sf = f64::from(s);
        for k in 0..self.m {
            if k == i || k == j {
                continue;
            }
            let mik = self.get(i, k);
            let mjk = self.get(j, k);
            self.set(i, k, sf * mjk);
            self.set(j, k, -sf * mik);
        }
    }

    /// Conjugation by `g_a`: flips the sign of every entry in row and column a.
    pub fn apply_gamma(&mut self, a: usize) {
        for k in 0..self.m {
            if k != a {
                let v = self.get(a, k);
                self.set(a, k, -v);
            }
        }
    }

    /// Pfaffian of the covariance restricted and permuted to `order`.
    pub fn pfaffian(&self, order: &[usize]) -> f64 {
        let n = order.len();
        if n % 2 == 1 {
            return 0.0;
        }
        let mut a: Vec<f64> = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                a.push(self.get(i, j));
            }
        }
        pfaffian_dense(&mut a, n)
    }

    /// Largest deviation from antisymmetry and largest absolute entry.
    pub fn hygiene(&self) -> (f64, f64) {
        let mut asym = 0.0f64;
        let mut maxabs = 0.0f64;
        for i in 0..self.m {
            for j in 0..self.m {
                asym = asym.max((self.get(i, j) + self.get(j, i)).abs());
                maxabs = maxabs.max(self.get(i, j).abs());
            }
        }
        (asym, maxabs)
    }
}

/// Pfaffian by Parlett-Reid style elimination with pivoting. Destroys `a`.
pub fn pfaffian_dense(a: &mut [f64], n: usize) -> f64 {
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut piv = k + 1;
        let mut best = a[k * n + k + 1].abs();
        for j in (k + 2)..n {
            if a[k * n + j].abs() > best {
                best = a[k * n + j].abs();
                piv = j;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k + 1 {
            // swap row/col k+1 and piv
            for c in 0..n {
                a.swap((k + 1) * n + c, piv * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k + 1, r * n + piv);
            }
            pf = -pf;
        }
        let akk1 = a[k * n + k + 1];
        pf *= akk1;
        for i in (k + 2)..n {
            let ti = a[k * n + i] / akk1;
            for j in (k + 2)..n {
                let tj = a[k * n + j] / akk1;
                // A_ij -= t_i A_{k+1,j} - t_j A_{k+1,i}
                let v = a[i * n + j] - ti * a[(k + 1) * n + j] + tj * a[(k + 1) * n + i];
                a[i * n + j] = v;
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_pair_is_deterministic() {
        let mut st = MajoranaState::new();
        let (a, b) = st.add_pair();
        assert_eq!(st.prob_plus(a, b), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(st.measure(a, b, &mut rng), 1);
    }

    #[test]
    fn cross_pair_is_unbiased_and_idempotent() {
        let mut st = MajoranaState::new();
        st.add_pair();
        st.add_pair();
        assert_eq!(st.get(1, 2), 0.0);
        assert_eq!(st.prob_plus(1, 2), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = st.measure(1, 2, &mut rng);
        for _ in 0..5 {
            assert_eq!(st.measure(1, 2, &mut rng), s);
        }
        assert_eq!(st.get(0, 3), f64::from(s));
    }

    #[test]
    fn pfaffian_small() {
        let mut st = MajoranaState::new();
        st.add_pair();
        st.add_pair();
        assert_eq!(st.pfaffian(&[0, 1, 2, 3]), 1.0);
        assert_eq!(st.pfaffian(&[0, 2, 1, 3]), -1.0);
        st.apply_gamma(1);
        assert_eq!(st.pfaffian(&[0, 1, 2, 3]), -1.0);
    }

    #[test]
    fn exchange_then_inverse_is_identity() {
        let mut st = MajoranaState::new();
        st.add_pair();
        st.add_pair();
        let before = st.clone();
        st.exchange(1, 2, 1);
        assert_ne!(st, before);
        st.exchange(1, 2, -1);
        assert_eq!(st, before);
    }

    #[test]
    fn remove_pair_compacts() {
        let mut st = MajoranaState::new();
        st.add_pair();
        st.add_pair();
        st.remove_pair(0, 1);
        assert_eq!(st.mode_count(), 2);
        assert_eq!(st.get(0, 1), 1.0);
    }
}
