//! Order statistics of i.i.d. draws, in quantile space: the rank density
//! xi_{k:n}, expected order statistics F_{k:n} by closed form or quadrature,
//! and the crossing structure of xi_{1:n} against xi_{2:N}.

use crate::distributions::{Family, Marginal};
use crate::error::{Error, Result};
use crate::quadrature::integrate_quantile;

/// H_n, summed smallest term first.
pub fn harmonic(n: u32) -> f64 {
    let mut h = 0.0;
    for i in (1..=n).rev() {
        h += 1.0 / i as f64;
    }
    h
}

/// ln n!, exact accumulation below 256 and a Stirling series beyond; the two
/// agree to ~1e-13 relative at the switch.
fn ln_factorial(n: u32) -> f64 {
    if n < 256 {
        let mut acc = 0.0;
        for i in 2..=n as u64 {
            acc += (i as f64).ln();
        }
        acc
    } else {
        let x = n as f64;
        let inv = 1.0 / x;
        (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + inv * (1.0 / 12.0 - inv * inv * (1.0 / 360.0 - inv * inv / 1260.0))
    }
}

fn check_rank(k: u32, n: u32) -> Result<()> {
    if k >= 1 && k <= n {
        Ok(())
    } else {
        Err(Error::RankOutOfRange { k, n })
    }
}

/// Density of the quantile of the k-th highest of n i.i.d. draws:
/// xi_{k:n}(q) = n! / ((k-1)! (n-k)!) (1-q)^{k-1} q^{n-k} on [0, 1].
pub fn order_stat_density(k: u32, n: u32, q: f64) -> Result<f64> {
    check_rank(k, n)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability { q });
    }
    Ok(xi(k, n, q))
}

#[inline]
fn xi(k: u32, n: u32, q: f64) -> f64 {
    match k {
        1 => n as f64 * q.powi(n as i32 - 1),
        2 => n as f64 * (n - 1) as f64 * (1.0 - q) * q.powi(n as i32 - 2),
        _ => {
            let ln_coef = ln_factorial(n) - ln_factorial(k - 1) - ln_factorial(n - k);
            if q == 0.0 || q == 1.0 {
                // Only boundary-degenerate ranks survive at the endpoints.
                return if q == 0.0 && k == n {
                    ln_coef.exp()
                } else if q == 1.0 && k == 1 {
                    ln_coef.exp()
                } else {
                    0.0
                };
            }
            (ln_coef + (k - 1) as f64 * (1.0 - q).ln() + (n - k) as f64 * q.ln()).exp()
        }
    }
}

/// xi in the survival coordinate s = 1 - q, as used by the quadrature route.
#[inline]
fn xi_survival(k: u32, n: u32, s: f64) -> f64 {
    match k {
        1 => n as f64 * (1.0 - s).powi(n as i32 - 1),
        2 => n as f64 * (n - 1) as f64 * s * (1.0 - s).powi(n as i32 - 2),
        _ => {
            let ln_coef = ln_factorial(n) - ln_factorial(k - 1) - ln_factorial(n - k);
            if s <= 0.0 || s >= 1.0 {
                return 0.0;
            }
            (ln_coef + (k - 1) as f64 * s.ln() + (n - k) as f64 * (1.0 - s).ln()).exp()
        }
    }
}

/// Expected k-th highest of n i.i.d. draws from `m`.
///
/// Closed forms cover the exponential families (harmonic numbers) and the
/// two-point family (a binomial tail); everything else integrates
/// xi_{k:n}(q) F^{-1}(q) by adaptive quadrature. The rank pair (2, 1) is the
/// second-highest of a single draw and is 0 by convention, so one-bidder
/// second-price revenue needs no special casing.
///
/// A divergent expectation (the maximum of equal-revenue-tailed draws) is a
/// signaled error, not a number.
pub fn expected_order_stat(m: &Marginal, k: u32, n: u32) -> Result<f64> {
    if k == 2 && n == 1 {
        return Ok(0.0);
    }
    check_rank(k, n)?;
    if k == 1 && m.divergent_mean() {
        return Err(Error::DivergentExpectation {
            what: format!(
                "E[highest of {n}] for {}: the tail carries infinite mean",
                m.family().name()
            ),
        });
    }
    match m.family() {
        Family::Exponential { rate } => Ok((harmonic(n) - harmonic(k - 1)) / rate),
        Family::ShiftedExponential { rate, shift } => {
            Ok(shift + (harmonic(n) - harmonic(k - 1)) / rate)
        }
        Family::GeneralizedPareto { alpha } if alpha == 1.0 => Ok(harmonic(n) - harmonic(k - 1)),
        Family::TwoPoint {
            high_value,
            high_prob,
        } => Ok(high_value * binomial_tail(n, high_prob, k)),
        _ => quadrature_order_stat(m, k, n, 1e-10),
    }
}

/// The quadrature route behind [`expected_order_stat`], exposed so closed
/// forms can be cross-checked numerically.
pub fn expected_order_stat_quadrature(m: &Marginal, k: u32, n: u32) -> Result<f64> {
    if k == 2 && n == 1 {
        return Ok(0.0);
    }
    check_rank(k, n)?;
    if k == 1 && m.divergent_mean() {
        return Err(Error::DivergentExpectation {
            what: format!(
                "E[highest of {n}] for {}: the tail carries infinite mean",
                m.family().name()
            ),
        });
    }
    quadrature_order_stat(m, k, n, 1e-10)
}

/// Quadrature route at an explicit tolerance, used where a boundary decision
/// needs re-deriving more precisely than the default.
pub(crate) fn expected_order_stat_tol(m: &Marginal, k: u32, n: u32, tol: f64) -> Result<f64> {
    if k == 2 && n == 1 {
        return Ok(0.0);
    }
    check_rank(k, n)?;
    quadrature_order_stat(m, k, n, tol)
}

fn quadrature_order_stat(m: &Marginal, k: u32, n: u32, tol: f64) -> Result<f64> {
    let w = |s: f64| xi_survival(k, n, s) * m.inv_survival(s);
    integrate_quantile(&w, !m.is_bounded(), tol)
}

/// P(Binomial(n, p) >= k), by the complement for small k.
fn binomial_tail(n: u32, p: f64, k: u32) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    // Multiplicative pmf recursion keeps this exact enough for any n here.
    let q = 1.0 - p;
    let ratio = p / q;
    let mut pmf = q.powi(n as i32); // P(X = 0)
    let mut cdf_below = 0.0;
    for j in 0..k {
        cdf_below += pmf;
        pmf *= (n - j) as f64 / (j + 1) as f64 * ratio;
    }
    (1.0 - cdf_below).clamp(0.0, 1.0)
}

/// Where xi_{2:N} overtakes xi_{1:n} and where it falls back: the closed
/// interval [a, b] of quantiles with xi_{2:N}(q) >= xi_{1:n}(q), for n < N.
///
/// Dividing out q^{n-1} reduces the crossing equation to
/// n = N(N-1)(1-q) q^{N-n-1}, whose right side is unimodal: one bisection
/// per monotone branch pins both roots. For N = n + 1 the equation is linear
/// in q and the left crossing sits at 0. Both densities integrate to one, so
/// a nonempty crossing interval always exists; should the unimodal peak ever
/// fail to reach n, the degenerate answer [peak, peak] is returned.
pub fn three_interval_crossings(n: u32, upper: u32) -> Result<(f64, f64)> {
    if n < 1 || upper <= n {
        return Err(Error::InvalidConfig {
            message: format!("crossings need 1 <= n < N, got n = {n}, N = {upper}"),
        });
    }
    let nn = upper as f64;
    let target = n as f64 / (nn * (nn - 1.0));
    let d = upper - n - 1; // exponent of q in the reduced equation

    if d == 0 {
        // n = N(N-1)(1-q): linear.
        let b = 1.0 - target;
        return Ok((0.0, b.clamp(0.0, 1.0)));
    }

    let u = |q: f64| (1.0 - q) * q.powi(d as i32);
    let q_peak = d as f64 / (d as f64 + 1.0);
    if u(q_peak) <= target {
        return Ok((q_peak, q_peak));
    }
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| -> f64 {
        // Root of u(q) = target on a branch where u is monotone.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = u(mid) > target;
            if above == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let a = bisect(0.0, q_peak, true);
    let b = bisect(q_peak, 1.0, false);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Family, Marginal, ProductPrior};
    use crate::sampling::SampleConfig;

    fn exp1() -> Marginal {
        Marginal::new(Family::Exponential { rate: 1.0 }).unwrap()
    }

    fn er() -> Marginal {
        Marginal::new(Family::EqualRevenue).unwrap()
    }

    fn gp(alpha: f64) -> Marginal {
        Marginal::new(Family::GeneralizedPareto { alpha }).unwrap()
    }

    fn unit() -> Marginal {
        Marginal::new(Family::Uniform { lo: 0.0, hi: 1.0 }).unwrap()
    }

    #[test]
    fn density_values() {
        // 3 q^2 at 1/2 and 12 (1-q) q^2 at 1/2.
        assert!((order_stat_density(1, 3, 0.5).unwrap() - 0.75).abs() < 1e-14);
        assert!((order_stat_density(2, 4, 0.5).unwrap() - 1.5).abs() < 1e-14);
        // General ln-gamma path agrees with the small-rank shortcuts.
        for (k, n, q) in [(3u32, 7u32, 0.3f64), (4, 9, 0.62), (5, 5, 0.11)] {
            let coef: f64 = ((n - k + 1)..=n).map(f64::from).product::<f64>()
                / (1..k).map(f64::from).product::<f64>();
            let direct = coef * (1.0 - q).powi(k as i32 - 1) * q.powi((n - k) as i32);
            let got = order_stat_density(k, n, q).unwrap();
            assert!((got - direct).abs() < 1e-12 * direct.max(1.0));
        }
        assert!(order_stat_density(0, 3, 0.5).is_err());
        assert!(order_stat_density(4, 3, 0.5).is_err());
        assert!(order_stat_density(1, 3, 1.5).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        use crate::quadrature::integrate;
        for (k, n) in [(1u32, 1u32), (2, 5), (3, 8), (1, 12), (7, 7)] {
            let r = integrate(&|q: f64| xi(k, n, q), 0.0, 1.0, 1e-11);
            assert!((r.value - 1.0).abs() < 1e-9, "k={k} n={n}: {}", r.value);
        }
    }

    #[test]
    fn exponential_closed_forms() {
        // F_{1:n} = H_n, F_{k:n} = H_n - H_{k-1} for the unit exponential.
        assert!((expected_order_stat(&exp1(), 1, 4).unwrap() - harmonic(4)).abs() < 1e-14);
        assert!(
            (expected_order_stat(&exp1(), 2, 4).unwrap() - (harmonic(4) - 1.0)).abs() < 1e-14
        );
        let rate2 = Marginal::new(Family::Exponential { rate: 2.0 }).unwrap();
        assert!((expected_order_stat(&rate2, 2, 5).unwrap() - (harmonic(5) - 1.0) / 2.0).abs()
            < 1e-14);
        let shifted = Marginal::new(Family::ShiftedExponential {
            rate: 1.0,
            shift: 1.0,
        })
        .unwrap();
        assert!((expected_order_stat(&shifted, 1, 3).unwrap() - (1.0 + harmonic(3))).abs()
            < 1e-14);
        // The quadrature route reproduces the closed form.
        let q = expected_order_stat_quadrature(&exp1(), 1, 4).unwrap();
        assert!((q - harmonic(4)).abs() < 1e-9, "quadrature gave {q}");
        let q = expected_order_stat_quadrature(&exp1(), 2, 6).unwrap();
        assert!((q - (harmonic(6) - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn equal_revenue_order_stats() {
        // E[second of n] = n/(k-1) specializes to n for k = 2; the maximum
        // has no finite mean.
        assert!(matches!(
            expected_order_stat(&er(), 1, 3),
            Err(Error::DivergentExpectation { .. })
        ));
        assert!(matches!(
            expected_order_stat(&gp(0.0), 1, 2),
            Err(Error::DivergentExpectation { .. })
        ));
        assert!((expected_order_stat(&er(), 2, 3).unwrap() - 3.0).abs() < 1e-8);
        assert!((expected_order_stat(&er(), 2, 5).unwrap() - 5.0).abs() < 1e-8);
        assert!((expected_order_stat(&er(), 3, 4).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn uniform_order_stats() {
        // lo + (hi - lo)(n + 1 - k)/(n + 1).
        for n in 1..=6u32 {
            for k in 1..=n {
                let expect = (n + 1 - k) as f64 / (n + 1) as f64;
                let got = expected_order_stat(&unit(), k, n).unwrap();
                assert!((got - expect).abs() < 1e-9, "k={k} n={n}: {got}");
            }
        }
        let wide = Marginal::new(Family::Uniform { lo: 2.0, hi: 6.0 }).unwrap();
        let got = expected_order_stat(&wide, 2, 3).unwrap();
        assert!((got - (2.0 + 4.0 * 0.5)).abs() < 1e-9);
    }

    #[test]
    fn second_of_one_is_zero() {
        for m in [exp1(), er(), unit()] {
            assert_eq!(expected_order_stat(&m, 2, 1).unwrap(), 0.0);
        }
        assert!(matches!(
            expected_order_stat(&exp1(), 3, 2),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn two_point_order_stats() {
        let m = Marginal::new(Family::TwoPoint {
            high_value: 2.0,
            high_prob: 0.5,
        })
        .unwrap();
        // P(Bin(3, 1/2) >= 2) = 1/2, so E[second of 3] = 1.
        assert!((expected_order_stat(&m, 2, 3).unwrap() - 1.0).abs() < 1e-12);
        // Exhaustive check against direct enumeration for n = 4.
        let p = 0.3f64;
        let m = Marginal::new(Family::TwoPoint {
            high_value: 1.5,
            high_prob: p,
        })
        .unwrap();
        for k in 1..=4u32 {
            let mut tail = 0.0;
            for j in k..=4 {
                let c: f64 = ((4 - j + 1)..=4).map(f64::from).product::<f64>()
                    / (1..=j).map(f64::from).product::<f64>();
                tail += c * p.powi(j as i32) * (1.0 - p).powi(4 - j as i32);
            }
            let got = expected_order_stat(&m, k, 4).unwrap();
            assert!((got - 1.5 * tail).abs() < 1e-12, "k={k}: {got} vs {tail}");
        }
    }

    #[test]
    fn pareto_beta_identity() {
        // F_{2:N} = alpha F_{1:N} - (1 - alpha) ties the second-highest to
        // the maximum across the Pareto family.
        for alpha in [0.25f64, 0.5, 0.75, 0.9] {
            let m = gp(alpha);
            for n in 2..=6u32 {
                let f1 = expected_order_stat(&m, 1, n).unwrap();
                let f2 = expected_order_stat(&m, 2, n).unwrap();
                assert!(
                    (f2 - (alpha * f1 - (1.0 - alpha))).abs() < 1e-8,
                    "alpha={alpha} n={n}: {f2} vs {}",
                    alpha * f1 - (1.0 - alpha)
                );
            }
        }
    }

    #[test]
    fn order_stat_monotonicity() {
        for m in [exp1(), gp(0.5), unit()] {
            let mut prev = 0.0;
            for n in 1..=8u32 {
                let f1 = expected_order_stat(&m, 1, n).unwrap();
                assert!(f1 >= prev - 1e-12);
                prev = f1;
                if n >= 2 {
                    let f2 = expected_order_stat(&m, 2, n).unwrap();
                    assert!(f2 <= f1 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let cfg = SampleConfig::new(20260816, 200_000).unwrap();
        for m in [exp1(), unit()] {
            for n in 1..=6u32 {
                for k in [1u32, 2] {
                    if k > n {
                        continue;
                    }
                    let exact = expected_order_stat(&m, k, n).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    let mut sum = 0.0;
                    let mut sumsq = 0.0;
                    let mut draws = vec![0.0f64; n as usize];
                    for _ in 0..cfg.samples {
                        for d in draws.iter_mut() {
                            *d = m.draw(&mut rng);
                        }
                        draws.sort_by(|a, b| b.partial_cmp(a).unwrap());
                        let x = draws[k as usize - 1];
                        sum += x;
                        sumsq += x * x;
                    }
                    let mean = sum / cfg.samples as f64;
                    let var = (sumsq / cfg.samples as f64 - mean * mean).max(0.0);
                    let stderr = (var / cfg.samples as f64).sqrt();
                    assert!(
                        (mean - exact).abs() <= 4.0 * stderr + 1e-9,
                        "{:?} k={k} n={n}: {mean} vs {exact} ({stderr})",
                        m.family()
                    );
                }
            }
        }
    }

    #[test]
    fn crossing_examples() {
        let (a, b) = three_interval_crossings(1, 2).unwrap();
        assert!(a == 0.0 && (b - 0.5).abs() < 1e-12);
        let (a, b) = three_interval_crossings(2, 3).unwrap();
        assert!(a == 0.0 && (b - 2.0 / 3.0).abs() < 1e-12);
        // Sanity anchor inside a crossing region: xi_{2:2}(1/4) = 1.5 > 1.
        assert!(order_stat_density(2, 2, 0.25).unwrap() > order_stat_density(1, 1, 0.25).unwrap());
        assert!(three_interval_crossings(3, 3).is_err());
        assert!(three_interval_crossings(0, 2).is_err());
    }

    #[test]
    fn crossing_sign_pattern() {
        // xi_{2:N} - xi_{1:n} is negative, positive, negative across [a, b],
        // with at most two sign changes on a fine grid.
        for (n, nn) in [(1u32, 3u32), (2, 5), (3, 9), (5, 6), (1, 2)] {
            let (a, b) = three_interval_crossings(n, nn).unwrap();
            assert!(0.0 <= a && a <= b && b < 1.0);
            let mut changes = 0;
            let mut last_sign = 0i32;
            for i in 1..2000 {
                let q = i as f64 / 2000.0;
                let diff = xi(2, nn, q) - xi(1, n, q);
                let sign = if diff > 1e-12 {
                    1
                } else if diff < -1e-12 {
                    -1
                } else {
                    0
                };
                if sign != 0 {
                    if last_sign != 0 && sign != last_sign {
                        changes += 1;
                    }
                    last_sign = sign;
                }
                // Inside (a, b) the second-highest density dominates.
                if q > a + 1e-9 && q < b - 1e-9 {
                    assert!(diff >= -1e-9, "n={n} N={nn} q={q}: {diff}");
                } else if q < a - 1e-9 || q > b + 1e-9 {
                    assert!(diff <= 1e-9, "n={n} N={nn} q={q}: {diff}");
                }
            }
            assert!(changes <= 2, "n={n} N={nn}: {changes} sign changes");
        }
    }

    #[test]
    fn heavy_tail_quadrature_matches_closed_form_family_wide() {
        // Pareto expectations against the harmonic limit alpha = 1 and the
        // direct quadrature of the alpha = 1 family.
        let via_limit = expected_order_stat(&gp(1.0), 2, 4).unwrap();
        let via_quad = expected_order_stat_quadrature(&gp(1.0), 2, 4).unwrap();
        assert!((via_limit - via_quad).abs() < 1e-9);
    }

    #[test]
    fn product_prior_unused_import_guard() {
        // Keeps the cross-module imports honest.
        let p = ProductPrior::iid(exp1(), 2).unwrap();
        assert_eq!(p.m(), 2);
    }
}
