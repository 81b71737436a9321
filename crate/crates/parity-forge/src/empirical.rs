//! Empirical distribution functions: right-continuous ECDF, left-limit
//! evaluation, and the generalized inverse used as the quantile map target.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Empirical CDF over distinct support points. Ties in the raw sample
/// collapse into one atom with summed mass; cumulative probabilities are
/// integer ratios, so the last entry is exactly 1.0 and `quantile(1.0)`
/// returns the maximum support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    sorted_support: Vec<f64>,
    cum_probs: Vec<f64>,
    n: usize,
}

impl Ecdf {
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("cannot build an ECDF from an empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite value in ECDF sample".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let mut support = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &v in &sorted {
            match support.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    support.push(v);
                    counts.push(1);
                }
            }
        }
        let mut cum = Vec::with_capacity(support.len());
        let mut running = 0usize;
        for c in counts {
            running += c;
            cum.push(running as f64 / n as f64);
        }
        debug_assert_eq!(*cum.last().unwrap(), 1.0);
        Ok(Ecdf {
            sorted_support: support,
            cum_probs: cum,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[f64] {
        &self.sorted_support
    }

    pub fn cum_probs(&self) -> &[f64] {
        &self.cum_probs
    }

    pub fn min(&self) -> f64 {
        self.sorted_support[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted_support.last().unwrap()
    }

    /// P(X <= x); 0 below the support minimum.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted_support.partition_point(|&s| s <= x);
        if k == 0 {
            0.0
        } else {
            self.cum_probs[k - 1]
        }
    }

    /// Left limit F(x-) = P(X < x); 0 for x at or below the support minimum.
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.sorted_support.partition_point(|&s| s < x);
        if k == 0 {
            0.0
        } else {
            self.cum_probs[k - 1]
        }
    }

    /// Generalized inverse of the empirical CDF for p in [0, 1]: the first
    /// support point whose cumulative probability reaches p.
    ///
    /// At interior atom boundaries p = F(x_j) this returns x_j itself, so the
    /// round trip `quantile(eval(x))` is the identity at every support point
    /// and `quantile(u)` for u drawn in (F(x-), F(x)] recovers x exactly.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile probability {p} outside [0,1]")));
        }
        let idx = self.cum_probs.partition_point(|&c| c < p);
        // idx == len is impossible: cum_probs ends at exactly 1.0 >= p.
        Ok(self.sorted_support[idx.min(self.sorted_support.len() - 1)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;

    fn three_point() -> Ecdf {
        Ecdf::from_samples(&[1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn eval_counts_mass_at_or_below() {
        let e = three_point();
        assert_eq!(e.eval(2.0), 2.0 / 3.0);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(3.0), 1.0);
    }

    #[test]
    fn eval_left_counts_strictly_below() {
        let e = three_point();
        assert_eq!(e.eval_left(2.0), 1.0 / 3.0);
        assert_eq!(e.eval_left(1.0), 0.0);
        assert_eq!(e.eval_left(10.0), 1.0);
    }

    #[test]
    fn quantile_boundary_convention() {
        let e = three_point();
        assert_eq!(e.quantile(0.5).unwrap(), 2.0);
        assert_eq!(e.quantile(1.0).unwrap(), 3.0);
        assert_eq!(e.quantile(0.0).unwrap(), 1.0);
        assert!(e.quantile(1.5).is_err());
        assert!(e.quantile(-0.1).is_err());
    }

    #[test]
    fn ties_collapse_with_summed_mass() {
        let e = Ecdf::from_samples(&[2.0, 1.0, 2.0, 5.0]).unwrap();
        assert_eq!(e.support(), &[1.0, 2.0, 5.0]);
        assert_eq!(e.cum_probs(), &[0.25, 0.75, 1.0]);
    }

    #[test]
    fn round_trip_identity_at_all_support_points() {
        let e = Ecdf::from_samples(&[-3.0, -3.0, 0.5, 2.0, 2.0, 2.0, 7.5]).unwrap();
        for &x in e.support() {
            assert_eq!(e.quantile(e.eval(x)).unwrap(), x);
            assert!(e.quantile(e.eval(x)).unwrap() >= x);
        }
        // quantile(eval_left(x) + eps) <= x for eps below the step size
        for &x in e.support() {
            let eps = 1e-9;
            assert!(e.quantile(e.eval_left(x) + eps).unwrap() <= x);
        }
    }

    #[test]
    fn randomized_interval_draws_recover_the_atom() {
        // Corollary-style property: u ~ Uniform(F(x-), F(x)] maps back to x.
        let e = Ecdf::from_samples(&[0.0, 0.0, 1.0, 1.0, 1.0, 4.0]).unwrap();
        let key = StreamKey::root(31337);
        let mut counter = 0u64;
        for &x in e.support() {
            let (lo, hi) = (e.eval_left(x), e.eval(x));
            for _ in 0..10_000 {
                let u = key.uniform_in(counter, lo, hi);
                counter += 1;
                assert_eq!(e.quantile(u).unwrap(), x);
            }
        }
    }

    #[test]
    fn eval_is_right_continuous_on_straddling_grid() {
        let e = Ecdf::from_samples(&[1.0, 2.0, 2.0, 3.5]).unwrap();
        let mut prev = -1.0;
        let mut x = 0.0;
        while x < 4.5 {
            let f = e.eval(x);
            assert!(f >= prev, "not monotone at {x}");
            // right continuity: value just above x stays close to value at x
            assert!(e.eval(x + 1e-12) >= f);
            prev = f;
            x += 0.083;
        }
        for &s in e.support() {
            assert_eq!(e.eval(s), e.eval(s + 0.0)); // exact at the atom
            assert!(e.eval(s - 1e-9) < e.eval(s)); // jump from the left
        }
    }

    proptest! {
        #[test]
        fn quantile_eval_round_trip_bounds(mut xs in prop::collection::vec(-100.0f64..100.0, 1..40)) {
            // quantize to force ties
            for x in xs.iter_mut() { *x = (*x * 4.0).round() / 4.0; }
            let e = Ecdf::from_samples(&xs).unwrap();
            for &x in e.support() {
                prop_assert_eq!(e.quantile(e.eval(x)).unwrap(), x);
            }
            // nondecreasing quantile over a p-grid
            let mut last = f64::NEG_INFINITY;
            for i in 0..=50 {
                let q = e.quantile(i as f64 / 50.0).unwrap();
                prop_assert!(q >= last);
                last = q;
            }
        }
    }
}
