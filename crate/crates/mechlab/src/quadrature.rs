//! Adaptive Gauss-Kronrod quadrature, plus the tail substitution that turns
//! quantile-space integrals over unbounded supports into well-behaved
//! integrals in the survival coordinate.

use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod pair on [-1, 1]; nodes are symmetric, so
// only the nonnegative half is stored. Gauss nodes sit at odd indices.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_945_0,
    0.417_959_183_673_469_387_8,
];

/// One Gauss-Kronrod panel: returns the Kronrod value and an error estimate.
/// The raw Gauss-Kronrod difference is sharpened against the panel's
/// oscillation integral, the usual scale-aware heuristic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let fc = f(center);
    let mut values = [0.0f64; 15];
    values[14] = fc;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let (lo, hi) = (f(center - dx), f(center + dx));
        values[2 * i] = lo;
        values[2 * i + 1] = hi;
        kronrod += WGK[i] * (lo + hi);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        resasc += WGK[i] * ((values[2 * i] - mean).abs() + (values[2 * i + 1] - mean).abs());
    }
    resasc *= half.abs();
    kronrod *= half;
    gauss *= half;

    let diff = (kronrod - gauss).abs();
    let err = if resasc > 0.0 && diff > 0.0 {
        resasc * 1.0f64.min((200.0 * diff / resasc).powf(1.5))
    } else {
        diff
    };
    (kronrod, err)
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

impl QuadResult {
    pub fn converged(&self, abs_tol: f64) -> bool {
        self.error <= abs_tol.max(1e-12 * self.value.abs())
    }
}

/// Integrates f over [a, b], bisecting the worst panel until the summed
/// error estimate drops under `abs_tol` (with a relative floor near machine
/// precision) or the panel budget runs out. Deterministic for a fixed
/// integrand.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> QuadResult {
    const MAX_PANELS: usize = 20_000;
    let (value, error) = gk15(f, a, b);
    let mut segments = vec![Segment {
        a,
        b,
        value,
        error,
    }];
    loop {
        let total_value: f64 = segments.iter().map(|s| s.value).sum();
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        let target = abs_tol.max(1e-14 * total_value.abs());
        if total_error <= target || segments.len() >= MAX_PANELS {
            return QuadResult {
                value: total_value,
                error: total_error,
                panels: segments.len(),
            };
        }
        // Split the worst panel; index scan keeps the policy deterministic.
        let mut worst = 0;
        for (i, s) in segments.iter().enumerate() {
            if s.error > segments[worst].error {
                worst = i;
            }
        }
        let s = segments[worst];
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            // Panel no longer splittable at f64 resolution.
            return QuadResult {
                value: total_value,
                error: total_error,
                panels: segments.len(),
            };
        }
        let (lv, le) = gk15(f, s.a, mid);
        let (rv, re) = gk15(f, mid, s.b);
        segments[worst] = Segment {
            a: s.a,
            b: mid,
            value: lv,
            error: le,
        };
        segments.push(Segment {
            a: mid,
            b: s.b,
            value: rv,
            error: re,
        });
    }
}

/// Integrates a quantile-space integrand over q in [0, 1], where the caller
/// supplies it in the survival coordinate: w(s) corresponds to f(q) at
/// s = 1 - q.
///
/// Bounded supports integrate directly. Unbounded supports substitute
/// q = 1 - e^{-t}, so the upper tail becomes t in [0, inf); the t-axis is
/// swept in fixed windows until a window's contribution falls below the
/// tolerance. Integrands with divergent tails exhaust the sweep and report
/// failure instead of a number.
pub fn integrate_quantile<W: Fn(f64) -> f64>(
    w: &W,
    unbounded_tail: bool,
    abs_tol: f64,
) -> Result<f64> {
    if !unbounded_tail {
        let r = integrate(&|q: f64| w(1.0 - q), 0.0, 1.0, abs_tol);
        if !r.converged(abs_tol * 8.0) {
            return Err(Error::QuadratureUnavailable {
                what: format!("tolerance not reached: error {:.3e}", r.error),
            });
        }
        return Ok(r.value);
    }

    // t-space integrand: f(q) dq = w(e^{-t}) e^{-t} dt.
    let h = |t: f64| {
        let s = (-t).exp();
        w(s) * s
    };
    const WINDOW: f64 = 40.0;
    const T_MAX: f64 = 720.0; // exp underflows shortly past here
    let window_tol = abs_tol / 32.0;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut t0 = 0.0;
    while t0 < T_MAX {
        let t1 = (t0 + WINDOW).min(T_MAX);
        let r = integrate(&h, t0, t1, window_tol);
        total += r.value;
        error += r.error;
        let settled = t0 > 0.0 && r.value.abs() < window_tol;
        t0 = t1;
        if settled {
            break;
        }
    }
    if t0 >= T_MAX {
        return Err(Error::QuadratureUnavailable {
            what: "tail did not settle: integrand decays too slowly or diverges".into(),
        });
    }
    if error > abs_tol.max(1e-12 * total.abs()) {
        return Err(Error::QuadratureUnavailable {
            what: format!("tolerance not reached: error {error:.3e}"),
        });
    }
    Ok(total)
}
