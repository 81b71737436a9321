//! Numerical special functions used by the model families and test statistics.
//!
//! Everything here is dependency-free: log-gamma and digamma by Stirling
//! series with argument lifting, the regularized incomplete gamma by the
//! classic series / continued-fraction split, and the standard normal CDF
//! and quantile built on top of them. Accuracy targets are ~1e-13 relative
//! for `ln_gamma` and better than 1e-10 relative for `chi_sq_sf`, which is
//! what the independence-test p-values require.

/// Bernoulli-number coefficients B_{2n} / (2n (2n-1)) for the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const LN_SQRT_2PI: f64 = 0.918938533204672741780329736406;

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    // Lift small arguments so the asymptotic series applies.
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    shift + (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires x > 0, got {x}");
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    // ψ(z) ~ ln z - 1/(2z) - Σ B_{2n} / (2n z^{2n})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    shift + z.ln() - 0.5 / z - tail
}

const IGAMMA_EPS: f64 = 1e-16;
const IGAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn reg_gamma_lower(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid incomplete gamma args ({a}, {x})");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn reg_gamma_upper(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid incomplete gamma args ({a}, {x})");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_cf(a, x)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..IGAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * IGAMMA_EPS {
            break;
        }
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    (sum.ln() + ln_prefactor).exp()
}

/// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
fn upper_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=IGAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < IGAMMA_EPS {
            break;
        }
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    (h.ln() + ln_prefactor).exp()
}

/// Survival function of the chi-square distribution with `df` degrees of freedom.
pub fn chi_sq_sf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "chi_sq_sf requires df > 0");
    if x <= 0.0 {
        return 1.0;
    }
    reg_gamma_upper(df / 2.0, x / 2.0)
}

/// Standard normal CDF via the incomplete gamma representation of erf.
pub fn norm_cdf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let half = 0.5 * reg_gamma_lower(0.5, 0.5 * x * x);
    if x > 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Standard normal quantile (inverse CDF) for p in (0, 1).
///
/// Acklam's rational approximation refined by one Halley step against
/// [`norm_cdf`], giving close to full double precision.
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_quantile requires p in (0,1), got {p}");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Halley refinement step.
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// One-sample Kolmogorov-Smirnov statistic of `values` against Uniform(0,1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "ks_uniform requires a nonempty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        sup = sup.max((u - lo).abs()).max((hi - u).abs());
    }
    sup
}

/// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the pooled support.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "ks_two_sample requires nonempty samples");
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).expect("NaN in KS sample"));
    xb.sort_by(|p, q| p.partial_cmp(q).expect("NaN in KS sample"));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(0.5) = sqrt(pi), Γ(10) = 362880
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(
            ln_gamma(0.5),
            0.5 * std::f64::consts::PI.ln(),
            epsilon = 1e-13
        );
        assert_relative_eq!(ln_gamma(10.0), 362880.0_f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn ln_gamma_matches_statrs() {
        for &x in &[0.1, 0.37, 1.5, 3.25, 7.0, 42.5, 500.0, 12345.6] {
            assert_relative_eq!(
                ln_gamma(x),
                statrs::function::gamma::ln_gamma(x),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn digamma_recurrence_and_known_value() {
        // ψ(1) = -γ (Euler–Mascheroni)
        assert_relative_eq!(digamma(1.0), -0.5772156649015329, max_relative = 1e-12);
        // ψ(x+1) = ψ(x) + 1/x
        for &x in &[0.3, 1.7, 5.5, 20.0] {
            assert_relative_eq!(digamma(x + 1.0), digamma(x) + 1.0 / x, max_relative = 1e-12);
        }
    }

    #[test]
    fn incomplete_gamma_complements() {
        for &(a, x) in &[(0.5, 0.2), (1.0, 1.0), (2.5, 7.0), (10.0, 3.0), (10.0, 30.0)] {
            let p = reg_gamma_lower(a, x);
            let q = reg_gamma_upper(a, x);
            assert_relative_eq!(p + q, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn chi_sq_sf_matches_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for &(x, df) in &[
            (0.5, 1.0),
            (3.84, 1.0),
            (27.7259, 1.0),
            (10.0, 4.0),
            (2.0, 12.0),
            (80.0, 20.0),
        ] {
            let reference = ChiSquared::new(df).unwrap().sf(x);
            assert_relative_eq!(chi_sq_sf(x, df), reference, max_relative = 1e-10);
        }
    }

    #[test]
    fn chi_sq_sf_deep_tail() {
        // Exact for df = 2: sf(x) = exp(-x/2).
        assert_relative_eq!(chi_sq_sf(200.0, 2.0), (-100.0_f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn norm_cdf_symmetry_and_values() {
        assert_relative_eq!(norm_cdf(0.0), 0.5);
        assert_relative_eq!(norm_cdf(1.959963984540054), 0.975, max_relative = 1e-12);
        for &x in &[-3.0, -0.5, 0.7, 2.2, 6.0] {
            assert_relative_eq!(norm_cdf(x) + norm_cdf(-x), 1.0, epsilon = 1e-14);
        }
        // Reference values computed with 40-digit arithmetic.
        let reference = [
            (-8.0, 6.220960574271784123515995172588e-16),
            (-4.2, 1.334574901590632788269996332943e-5),
            (-1.0, 0.1586552539314570514147674543680),
            (0.3, 0.6179114221889526330722736227638),
            (1.7, 0.9554345372414569563359489493491),
            (5.5, 0.9999999810104375341122806161487),
        ];
        for &(x, want) in &reference {
            assert_relative_eq!(norm_cdf(x), want, max_relative = 1e-11);
        }
    }

    #[test]
    fn norm_quantile_round_trip() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10] {
            let x = norm_quantile(p);
            assert_relative_eq!(norm_cdf(x), p, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn ks_two_sample_hand_cases() {
        assert_relative_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_relative_eq!(ks_two_sample(&[1.0, 2.0], &[10.0, 20.0]), 1.0);
        // F_a jumps to 1/2 at 1; F_b still 0 until 1.5.
        assert_relative_eq!(ks_two_sample(&[1.0, 2.0], &[1.5, 2.0]), 0.5);
    }

    #[test]
    fn ks_uniform_exact_grid() {
        // Points at (2i-1)/(2n) minimize the statistic at 1/(2n).
        let n = 10;
        let vals: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 / (2.0 * n as f64)).collect();
        assert_relative_eq!(ks_uniform(&vals), 1.0 / (2.0 * n as f64), epsilon = 1e-15);
    }
}
