//! Parametric value distributions and their regularity machinery: CDF,
//! quantile, density, virtual value, revenue curve with monopoly pricing, the
//! Gamma_alpha tail envelope, and the two-point auxiliary construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution family with closed-form CDF and quantile.
///
/// `GeneralizedPareto { alpha }` has survival (1 + v)^(-1/(1-alpha)) on
/// [0, inf): the extremal alpha-strongly-regular family, exponential in the
/// limit alpha = 1 and equal-revenue (shifted onto [0, inf)) at alpha = 0.
/// `TwoPoint` puts mass 1 - high_prob at 0 and high_prob at high_value; it
/// has no density, and density-requiring operations reject it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    Exponential { rate: f64 },
    ShiftedExponential { rate: f64, shift: f64 },
    GeneralizedPareto { alpha: f64 },
    EqualRevenue,
    Uniform { lo: f64, hi: f64 },
    TwoPoint { high_value: f64, high_prob: f64 },
}

impl Family {
    /// Short name used in error messages and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Exponential { .. } => "exponential",
            Family::ShiftedExponential { .. } => "shifted_exponential",
            Family::GeneralizedPareto { .. } => "generalized_pareto",
            Family::EqualRevenue => "equal_revenue",
            Family::Uniform { .. } => "uniform",
            Family::TwoPoint { .. } => "two_point",
        }
    }
}

/// A validated one-dimensional value distribution.
///
/// Construction checks the parameter ranges once; every later operation may
/// assume a legal family. Serialization round-trips through [`Family`], so a
/// deserialized marginal is re-validated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct Marginal {
    family: Family,
}

impl TryFrom<Family> for Marginal {
    type Error = Error;
    fn try_from(family: Family) -> Result<Self> {
        Marginal::new(family)
    }
}

impl From<Marginal> for Family {
    fn from(m: Marginal) -> Family {
        m.family
    }
}

fn require_finite(field: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            message: format!("{x} is not finite"),
        })
    }
}

impl Marginal {
    /// Validates the parameters and wraps the family.
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Exponential { rate } => {
                require_finite("rate", rate)?;
                if rate <= 0.0 {
                    return Err(Error::InvalidParameter {
                        field: "rate",
                        message: format!("{rate} (must be positive)"),
                    });
                }
            }
            Family::ShiftedExponential { rate, shift } => {
                require_finite("rate", rate)?;
                require_finite("shift", shift)?;
                if rate <= 0.0 {
                    return Err(Error::InvalidParameter {
                        field: "rate",
                        message: format!("{rate} (must be positive)"),
                    });
                }
                if shift < 0.0 {
                    return Err(Error::InvalidParameter {
                        field: "shift",
                        message: format!("{shift} (must be nonnegative)"),
                    });
                }
            }
            Family::GeneralizedPareto { alpha } => {
                require_finite("alpha", alpha)?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidParameter {
                        field: "alpha",
                        message: format!("{alpha} (must lie in [0, 1])"),
                    });
                }
            }
            Family::EqualRevenue => {}
            Family::Uniform { lo, hi } => {
                require_finite("lo", lo)?;
                require_finite("hi", hi)?;
                if lo >= hi {
                    return Err(Error::InvalidParameter {
                        field: "lo",
                        message: format!("lo = {lo} must be below hi = {hi}"),
                    });
                }
            }
            Family::TwoPoint {
                high_value,
                high_prob,
            } => {
                require_finite("high_value", high_value)?;
                require_finite("high_prob", high_prob)?;
                if high_value <= 0.0 {
                    return Err(Error::InvalidParameter {
                        field: "high_value",
                        message: format!("{high_value} (must be positive)"),
                    });
                }
                if !(high_prob > 0.0 && high_prob <= 1.0) {
                    return Err(Error::InvalidParameter {
                        field: "high_prob",
                        message: format!("{high_prob} (must lie in (0, 1])"),
                    });
                }
            }
        }
        Ok(Marginal { family })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Support endpoints; the upper end is `f64::INFINITY` for unbounded
    /// families.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Exponential { .. } => (0.0, f64::INFINITY),
            Family::ShiftedExponential { shift, .. } => (shift, f64::INFINITY),
            Family::GeneralizedPareto { .. } => (0.0, f64::INFINITY),
            Family::EqualRevenue => (1.0, f64::INFINITY),
            Family::Uniform { lo, hi } => (lo, hi),
            Family::TwoPoint { high_value, .. } => (0.0, high_value),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.support().1.is_finite()
    }

    pub fn is_atomless(&self) -> bool {
        !matches!(self.family, Family::TwoPoint { .. })
    }

    /// F(v), stable in both tails.
    pub fn cdf(&self, v: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => {
                if v <= 0.0 {
                    0.0
                } else {
                    -(-rate * v).exp_m1()
                }
            }
            Family::ShiftedExponential { rate, shift } => {
                if v <= shift {
                    0.0
                } else {
                    -(-rate * (v - shift)).exp_m1()
                }
            }
            Family::GeneralizedPareto { alpha } => {
                if v <= 0.0 {
                    0.0
                } else if alpha == 1.0 {
                    -(-v).exp_m1()
                } else {
                    -(-v.ln_1p() / (1.0 - alpha)).exp_m1()
                }
            }
            Family::EqualRevenue => {
                if v <= 1.0 {
                    0.0
                } else {
                    (v - 1.0) / v
                }
            }
            Family::Uniform { lo, hi } => ((v - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::TwoPoint {
                high_value,
                high_prob,
            } => {
                if v < 0.0 {
                    0.0
                } else if v < high_value {
                    1.0 - high_prob
                } else {
                    1.0
                }
            }
        }
    }

    /// 1 - F(v).
    pub fn survival(&self, v: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => {
                if v <= 0.0 {
                    1.0
                } else {
                    (-rate * v).exp()
                }
            }
            Family::ShiftedExponential { rate, shift } => {
                if v <= shift {
                    1.0
                } else {
                    (-rate * (v - shift)).exp()
                }
            }
            Family::GeneralizedPareto { alpha } => {
                if v <= 0.0 {
                    1.0
                } else if alpha == 1.0 {
                    (-v).exp()
                } else {
                    (-v.ln_1p() / (1.0 - alpha)).exp()
                }
            }
            Family::EqualRevenue => {
                if v <= 1.0 {
                    1.0
                } else {
                    1.0 / v
                }
            }
            Family::Uniform { .. } => 1.0 - self.cdf(v),
            Family::TwoPoint { .. } => 1.0 - self.cdf(v),
        }
    }

    /// f(v); zero outside the support. Atom-bearing families have none.
    pub fn density(&self, v: f64) -> Result<f64> {
        match self.family {
            Family::Exponential { rate } => Ok(if v < 0.0 {
                0.0
            } else {
                rate * (-rate * v).exp()
            }),
            Family::ShiftedExponential { rate, shift } => Ok(if v < shift {
                0.0
            } else {
                rate * (-rate * (v - shift)).exp()
            }),
            Family::GeneralizedPareto { alpha } => {
                if v < 0.0 {
                    Ok(0.0)
                } else if alpha == 1.0 {
                    Ok((-v).exp())
                } else {
                    let c = 1.0 / (1.0 - alpha);
                    Ok(c * (-(c + 1.0) * v.ln_1p()).exp())
                }
            }
            Family::EqualRevenue => Ok(if v < 1.0 { 0.0 } else { 1.0 / (v * v) }),
            Family::Uniform { lo, hi } => Ok(if v < lo || v > hi {
                0.0
            } else {
                1.0 / (hi - lo)
            }),
            Family::TwoPoint { .. } => Err(Error::NoDensity {
                family: self.family.name(),
            }),
        }
    }

    /// Generalized inverse F^{-1}(q) = inf { v : F(v) >= q } for q in [0, 1).
    /// Callers guarantee the range; the checked entry point is [`quantile`].
    ///
    /// [`quantile`]: Marginal::quantile
    #[inline]
    pub(crate) fn inv(&self, q: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&q));
        match self.family {
            Family::Exponential { rate } => -(-q).ln_1p() / rate,
            Family::ShiftedExponential { rate, shift } => shift - (-q).ln_1p() / rate,
            Family::GeneralizedPareto { alpha } => {
                if alpha == 1.0 {
                    -(-q).ln_1p()
                } else {
                    (-(1.0 - alpha) * (-q).ln_1p()).exp_m1()
                }
            }
            Family::EqualRevenue => 1.0 / (1.0 - q),
            Family::Uniform { lo, hi } => lo + (hi - lo) * q,
            Family::TwoPoint {
                high_value,
                high_prob,
            } => {
                if q <= 1.0 - high_prob {
                    0.0
                } else {
                    high_value
                }
            }
        }
    }

    /// F^{-1}(1 - s) for s in (0, 1]. The survival coordinate keeps inverse
    /// transforms exact near the upper tail and is the sampler's hot path,
    /// hence the root-based special cases for the grid alphas.
    #[inline]
    pub(crate) fn inv_survival(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0 && s <= 1.0);
        match self.family {
            Family::Exponential { rate } => -s.ln() / rate,
            Family::ShiftedExponential { rate, shift } => shift - s.ln() / rate,
            Family::GeneralizedPareto { alpha } => gp_inv_survival(alpha, s),
            Family::EqualRevenue => 1.0 / s,
            Family::Uniform { lo, hi } => hi - (hi - lo) * s,
            Family::TwoPoint {
                high_value,
                high_prob,
            } => {
                if s <= high_prob {
                    high_value
                } else {
                    0.0
                }
            }
        }
    }

    /// Checked quantile. q = 1 is legal only for bounded supports.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability { q });
        }
        if q == 1.0 {
            return if self.is_bounded() {
                Ok(self.support().1)
            } else {
                Err(Error::InfiniteQuantile)
            };
        }
        Ok(self.inv(q))
    }

    /// One inverse-transform draw.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen(); // [0, 1)
        self.inv_survival(1.0 - u)
    }

    /// Virtual value phi(v) = v - (1 - F(v)) / f(v).
    ///
    /// Errors where the hazard rate is undefined: atom-bearing families, and
    /// points with zero density.
    pub fn virtual_value(&self, v: f64) -> Result<f64> {
        let f = self.density(v)?;
        if f <= 0.0 {
            return Err(Error::HazardUndefined { v });
        }
        Ok(v - self.survival(v) / f)
    }

    /// Closed-form virtual value on the support interior, for sampling hot
    /// loops. Callers must have established a density (regularity prechecks
    /// do); values below the support floor would be wrong, but inverse
    /// transforms never produce them.
    #[inline]
    pub(crate) fn phi_unchecked(&self, v: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => v - 1.0 / rate,
            Family::ShiftedExponential { rate, .. } => v - 1.0 / rate,
            Family::GeneralizedPareto { alpha } => alpha * v - (1.0 - alpha),
            Family::EqualRevenue => 0.0,
            Family::Uniform { hi, .. } => 2.0 * v - hi,
            Family::TwoPoint { .. } => f64::NAN,
        }
    }

    /// lim_{v -> inf} v (1 - F(v)): the revenue escaping to the tail.
    /// Positive exactly for the equal-revenue tail (EqualRevenue itself and
    /// GeneralizedPareto at alpha = 0); such revenue is invisible to naive
    /// virtual-surplus estimators and is accounted for explicitly.
    pub fn tail_revenue_mass(&self) -> f64 {
        match self.family {
            Family::EqualRevenue => 1.0,
            Family::GeneralizedPareto { alpha } if alpha == 0.0 => 1.0,
            _ => 0.0,
        }
    }

    /// Polynomial decay rate of the survival function: 1 - F(v) ~ v^{-e}.
    /// `f64::INFINITY` for light-tailed and bounded families.
    pub fn tail_exponent(&self) -> f64 {
        match self.family {
            Family::EqualRevenue => 1.0,
            Family::GeneralizedPareto { alpha } if alpha < 1.0 => 1.0 / (1.0 - alpha),
            _ => f64::INFINITY,
        }
    }

    pub fn divergent_mean(&self) -> bool {
        self.tail_exponent() <= 1.0
    }

    /// Revenue curve in survival coordinates: R(q) = q F^{-1}(1 - q), the
    /// expected revenue of the price that sells with probability q.
    /// R(0) is the tail limit; R(1) prices at the support floor.
    pub fn revenue_at(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability { q });
        }
        if q == 0.0 {
            return Ok(self.tail_revenue_mass());
        }
        Ok(q * self.inv_survival(q))
    }

    /// Monopoly price and its revenue: argmax over posted prices of
    /// p (1 - F(p^-)).
    ///
    /// Flat and atomic revenue curves are resolved in closed form; the rest
    /// run a coarse scan of R followed by golden-section refinement, which is
    /// exact enough because every supported family's R is unimodal.
    pub fn monopoly(&self) -> Result<(f64, f64)> {
        match self.family {
            // R(q) = 1 for every q: any price is optimal, report the floor.
            Family::EqualRevenue => return Ok((1.0, 1.0)),
            // R(q) = 1 - q: the supremum revenue 1 equals the tail mass and
            // is attained only as the price diverges.
            Family::GeneralizedPareto { alpha } if alpha == 0.0 => {
                return Ok((f64::INFINITY, 1.0))
            }
            // Only the upper atom earns: price there.
            Family::TwoPoint {
                high_value,
                high_prob,
            } => return Ok((high_value, high_value * high_prob)),
            _ => {}
        }

        const GRID: usize = 1024;
        let r = |q: f64| q * self.inv_survival(q);
        let mut best_i = 1;
        let mut best = f64::NEG_INFINITY;
        for i in 1..=GRID {
            let q = i as f64 / GRID as f64;
            let v = r(q);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let mut a = (best_i.saturating_sub(1)).max(1) as f64 / GRID as f64;
        let mut b = ((best_i + 1).min(GRID)) as f64 / GRID as f64;
        if best_i == 1 {
            a = 1e-12;
        }
        const INVPHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = b - INVPHI * (b - a);
        let mut x2 = a + INVPHI * (b - a);
        let mut f1 = r(x1);
        let mut f2 = r(x2);
        for _ in 0..120 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INVPHI * (b - a);
                f2 = r(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INVPHI * (b - a);
                f1 = r(x1);
            }
        }
        let q_star = 0.5 * (a + b);
        let revenue = r(q_star);
        if !revenue.is_finite() {
            return Err(Error::DivergentExpectation {
                what: "monopoly revenue".into(),
            });
        }
        Ok((self.inv_survival(q_star), revenue))
    }

    /// The 512-point evaluation grid used by the regularity checks: survival
    /// levels log-spaced from 0.9999 down to 1e-6, mapped through F^{-1} so
    /// both tails of the value axis are covered.
    pub fn default_regularity_grid(&self) -> Vec<f64> {
        const POINTS: usize = 512;
        const S_HI: f64 = 0.9999;
        const S_LO: f64 = 1e-6;
        let ratio = (S_LO / S_HI).powf(1.0 / (POINTS - 1) as f64);
        let mut s = S_HI;
        let mut grid = Vec::with_capacity(POINTS);
        for _ in 0..POINTS {
            grid.push(self.inv_survival(s));
            s *= ratio;
        }
        grid
    }

    /// Largest alpha such that phi is alpha-strongly regular on the grid:
    /// the minimum difference quotient of the virtual value over consecutive
    /// grid points. Regularity is the special case alpha >= 0, MHR is
    /// alpha >= 1.
    pub fn strong_regularity_coefficient(&self, grid: &[f64]) -> Result<f64> {
        if !self.is_atomless() {
            return Err(Error::NoDensity {
                family: self.family.name(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::InvalidGrid {
                message: format!("need at least 2 points, got {}", grid.len()),
            });
        }
        let mut min_slope = f64::INFINITY;
        for w in grid.windows(2) {
            let (v0, v1) = (w[0], w[1]);
            if !(v1 > v0) {
                return Err(Error::InvalidGrid {
                    message: format!("grid not strictly increasing at {v0}, {v1}"),
                });
            }
            let slope = (self.virtual_value(v1)? - self.virtual_value(v0)?) / (v1 - v0);
            if slope < min_slope {
                min_slope = slope;
            }
        }
        Ok(min_slope)
    }

    /// Regularity on the default grid, with a 1e-9 slack for roundoff.
    pub fn is_regular(&self) -> Result<bool> {
        Ok(self.strong_regularity_coefficient(&self.default_regularity_grid())? >= -1e-9)
    }

    /// The auxiliary two-point distribution that prices at the monopoly
    /// revenue: mass 1/2 at OPT_1(F), the rest at zero. It is stochastically
    /// dominated by F whenever F is regular.
    pub fn two_point_auxiliary(&self) -> Result<Marginal> {
        let (_, opt) = self.monopoly()?;
        Marginal::new(Family::TwoPoint {
            high_value: opt,
            high_prob: 0.5,
        })
    }
}

#[inline]
fn gp_inv_survival(alpha: f64, s: f64) -> f64 {
    // s^{-(1-alpha)} - 1; root forms cover the grid alphas without powf.
    if alpha == 1.0 {
        return -s.ln();
    }
    let e = 1.0 - alpha;
    if e == 0.5 {
        return 1.0 / s.sqrt() - 1.0;
    }
    if e == 0.25 {
        return 1.0 / s.sqrt().sqrt() - 1.0;
    }
    if e == 0.75 {
        let t = s.sqrt();
        return 1.0 / (t * t.sqrt()) - 1.0;
    }
    if e == 1.0 {
        return 1.0 / s - 1.0;
    }
    (-e * s.ln()).exp_m1()
}

/// The alpha-strongly-regular survival envelope
/// Gamma_alpha(x) = (1 + (1 - alpha) x)^{-1/(1-alpha)}, with Gamma_1 = e^{-x}.
/// Anchored through two points of an alpha-strongly regular survival curve,
/// the rescaled envelope bounds the curve between the anchors; the Pareto
/// family attains it with equality.
pub fn gamma_alpha(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "x",
            message: format!("{x} (must be nonnegative)"),
        });
    }
    if alpha == 1.0 {
        Ok((-x).exp())
    } else {
        let e = 1.0 - alpha;
        Ok((-(e * x).ln_1p() / e).exp())
    }
}

/// Inverse of [`gamma_alpha`] on (0, 1].
pub fn gamma_alpha_inv(alpha: f64, y: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "y",
            message: format!("{y} (must lie in (0, 1])"),
        });
    }
    if alpha == 1.0 {
        Ok(-y.ln())
    } else {
        let e = 1.0 - alpha;
        Ok((-e * y.ln()).exp_m1() / e)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::InvalidParameter {
            field: "alpha",
            message: format!("{alpha} (must lie in [0, 1])"),
        });
    }
    Ok(())
}

/// An independent (not necessarily identical) product of item marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductPrior {
    marginals: Vec<Marginal>,
}

impl ProductPrior {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidConfig {
                message: "a product prior needs at least one item".into(),
            });
        }
        Ok(ProductPrior { marginals })
    }

    /// m identical copies of one marginal.
    pub fn iid(marginal: Marginal, m: usize) -> Result<Self> {
        ProductPrior::new(vec![marginal; m.max(0)])
    }

    pub fn m(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    /// The shared marginal if all items are identically distributed.
    pub fn identical_marginal(&self) -> Option<&Marginal> {
        let first = &self.marginals[0];
        if self.marginals.iter().all(|m| m == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn any_divergent_mean(&self) -> bool {
        self.marginals.iter().any(|m| m.divergent_mean())
    }

    pub fn max_tail_heaviness(&self) -> f64 {
        self.marginals
            .iter()
            .map(|m| m.tail_exponent())
            .fold(f64::INFINITY, f64::min)
    }
}
