//! Evaluators for the mechanism zoo: welfare, per-item and bundle
//! second-price auctions, separate and bundle Myerson revenue, the duality
//! benchmark, the core truncation, the two-part tariff, and the uniform
//! bundling-gap experiment.
//!
//! Every evaluator is a pure function of its arguments. Randomness flows
//! exclusively through [`SampleConfig`] substreams, so identical inputs give
//! bit-identical estimates regardless of thread scheduling. Deterministic
//! routes (closed forms, quadrature) return `stderr = 0`.

use rand::Rng;
use rayon::prelude::*;

use crate::distributions::{Family, Marginal, ProductPrior};
use crate::order_stats::expected_order_stat;
use crate::quadrature::{integrate, integrate_quantile};
use crate::sampling::{monte_carlo, Estimate, Method, SampleConfig};
use crate::{Error, Result};

/// Absolute tolerance for the deterministic evaluation routes.
const QUAD_TOL: f64 = 1e-10;

/// A statistic whose tail exponent sits at or below this threshold has no
/// second moment; its Monte Carlo route switches to median-of-means.
const VARIANCE_EDGE: f64 = 2.0 + 1e-12;

// Substream tags for evaluators that need more than one independent stream
// out of a single config.
const TAG_BREV_TRAIN: u64 = 0x6272_7472;
const TAG_BREV_EVAL: u64 = 0x6272_6576;
const TAG_GAP_BSPA: u64 = 0x6761_7062;
const TAG_GAP_WEL: u64 = 0x6761_7077;

/// The three simple mechanisms compared against the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleKind {
    /// First-best welfare: every item goes to its highest value.
    Wel,
    /// Per-item second-price auctions.
    Vcg,
    /// Second-price auction on the grand bundle.
    Bspa,
}

impl SimpleKind {
    pub fn name(&self) -> &'static str {
        match self {
            SimpleKind::Wel => "wel",
            SimpleKind::Vcg => "vcg",
            SimpleKind::Bspa => "bspa",
        }
    }
}

/// Bundle Myerson revenue together with the price (single bidder) or
/// reserve (several bidders) that achieved it on the training half.
#[derive(Clone, Debug)]
pub struct BrevResult {
    pub estimate: Estimate,
    pub price: f64,
}

/// Which core the truncation keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreVariant {
    /// E[sum_j v_j 1{v_j <= t}]; defined for every prior.
    Truncated,
    /// E[sum_j v_j | v_j <= t for all j]; undefined when the conditioning
    /// event has probability zero.
    Conditional,
}

/// Participation rule for the two-part tariff.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptIn {
    /// Pay the fee iff the realized surplus against the other bidders
    /// covers it. No fixed point to solve, and a conservative lower bound
    /// on equilibrium revenue.
    RealizedSurplus,
    /// Pay the fee whenever it is covered in expectation, which it is by
    /// construction for every positive epsilon. Separates fee calibration
    /// from participation noise.
    ExpectedSurplus,
}

/// Per-item revenue and welfare from the uniform bundling experiment.
#[derive(Clone, Debug)]
pub struct BundlingGap {
    pub bspa_per_item: Estimate,
    pub wel_per_item: Estimate,
}

fn check_bidders(bidders: usize) -> Result<()> {
    if bidders == 0 {
        return Err(Error::InvalidConfig {
            message: "bidders must be at least 1".into(),
        });
    }
    Ok(())
}

fn require_regular(prior: &ProductPrior) -> Result<()> {
    for mar in prior.marginals() {
        if !mar.is_regular().unwrap_or(false) {
            return Err(Error::NotRegular {
                family: mar.family().name(),
            });
        }
    }
    Ok(())
}

/// Total boundary revenue mass `sum_j lim v(1 - F_j(v))` and the first
/// marginal carrying any.
fn total_tail_mass(prior: &ProductPrior) -> (f64, &'static str) {
    let mut mass = 0.0;
    let mut carrier = "";
    for mar in prior.marginals() {
        let l = mar.tail_revenue_mass();
        if l > 0.0 && carrier.is_empty() {
            carrier = mar.family().name();
        }
        mass += l;
    }
    (mass, carrier)
}

#[inline]
fn push_top2(top: &mut f64, second: &mut f64, x: f64) {
    if x > *top {
        *second = *top;
        *top = x;
    } else if x > *second {
        *second = x;
    }
}

/// Expected welfare, per-item second-price revenue, or bundle second-price
/// revenue for `bidders` additive bidders over `prior`.
///
/// A single bidder faces no competitor, so the two auctions collect nothing
/// and welfare is the mean of the prior. Divergent-mean marginals make the
/// welfare infinite for every bidder count, which is reported as a divergent
/// estimate rather than sampled. Single-item priors whose tail exponent is
/// at most 1 have second-order statistics with no variance at all; those are
/// forced through quadrature regardless of the config.
pub fn eval_simple(
    kind: SimpleKind,
    prior: &ProductPrior,
    bidders: usize,
    cfg: &SampleConfig,
) -> Result<Estimate> {
    check_bidders(bidders)?;
    if kind == SimpleKind::Wel && prior.any_divergent_mean() {
        return Ok(Estimate::divergent(Method::ClosedForm));
    }
    if bidders == 1 && kind != SimpleKind::Wel {
        return Ok(Estimate::exact(0.0, Method::ClosedForm));
    }
    let heaviest = prior.max_tail_heaviness();
    let forced = prior.m() == 1 && heaviest <= 1.0 + 1e-12;
    if cfg.prefer_quadrature || forced {
        return simple_quadrature(kind, prior, bidders);
    }

    let exponent = match kind {
        SimpleKind::Wel => heaviest,
        // The second-highest of an i.i.d. sample squares the survival tail.
        SimpleKind::Vcg | SimpleKind::Bspa => 2.0 * heaviest,
    };
    let robust = exponent <= VARIANCE_EDGE;
    let n = bidders;
    let marginals = prior.marginals().to_vec();
    match kind {
        SimpleKind::Wel => monte_carlo(cfg, robust, move |rng| {
            let mut total = 0.0;
            for mar in &marginals {
                let mut top = f64::NEG_INFINITY;
                for _ in 0..n {
                    let v = mar.draw(rng);
                    if v > top {
                        top = v;
                    }
                }
                total += top;
            }
            total
        }),
        SimpleKind::Vcg => monte_carlo(cfg, robust, move |rng| {
            let mut total = 0.0;
            for mar in &marginals {
                let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for _ in 0..n {
                    push_top2(&mut top, &mut second, mar.draw(rng));
                }
                total += second;
            }
            total
        }),
        SimpleKind::Bspa => monte_carlo(cfg, robust, move |rng| {
            let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..n {
                let mut sum = 0.0;
                for mar in &marginals {
                    sum += mar.draw(rng);
                }
                push_top2(&mut top, &mut second, sum);
            }
            second
        }),
    }
}

fn simple_quadrature(kind: SimpleKind, prior: &ProductPrior, bidders: usize) -> Result<Estimate> {
    let n = bidders as u32;
    let total = match kind {
        SimpleKind::Wel => {
            let mut acc = 0.0;
            for mar in prior.marginals() {
                acc += expected_order_stat(mar, 1, n)?;
            }
            acc
        }
        SimpleKind::Vcg => {
            let mut acc = 0.0;
            for mar in prior.marginals() {
                acc += expected_order_stat(mar, 2, n)?;
            }
            acc
        }
        SimpleKind::Bspa => {
            if prior.m() > 1 {
                return Err(Error::QuadratureUnavailable {
                    what: format!(
                        "bundle-sum order statistics have no per-item decomposition for m = {}",
                        prior.m()
                    ),
                });
            }
            expected_order_stat(&prior.marginals()[0], 2, n)?
        }
    };
    Ok(Estimate::exact(total, Method::Quadrature))
}

/// Myerson revenue from selling every item separately.
///
/// One bidder collects the sum of per-item monopoly revenues. With
/// competition the revenue is the expected positive virtual surplus
/// `E[sum_j (max_i phi_j(v_ij))^+]`; regularity makes ironing unnecessary
/// and lets the maximum commute with phi. Marginals keeping revenue mass at
/// infinity have no finite virtual surplus representation with several
/// bidders and are refused.
pub fn eval_srev(prior: &ProductPrior, bidders: usize, cfg: &SampleConfig) -> Result<Estimate> {
    check_bidders(bidders)?;
    require_regular(prior)?;
    if bidders == 1 {
        let mut total = 0.0;
        for mar in prior.marginals() {
            total += mar.monopoly()?.1;
        }
        return Ok(Estimate::exact(total, Method::ClosedForm));
    }
    let (mass, carrier) = total_tail_mass(prior);
    if mass > 0.0 {
        return Err(Error::HeavyTail {
            family: carrier,
            mass,
        });
    }
    if cfg.prefer_quadrature {
        let mut total = 0.0;
        for mar in prior.marginals() {
            total += virtual_surplus_quadrature(mar, bidders)?;
        }
        return Ok(Estimate::exact(total, Method::Quadrature));
    }
    let n = bidders;
    let marginals = prior.marginals().to_vec();
    let robust = prior.max_tail_heaviness() <= VARIANCE_EDGE;
    monte_carlo(cfg, robust, move |rng| {
        let mut total = 0.0;
        for mar in &marginals {
            let mut top = f64::NEG_INFINITY;
            for _ in 0..n {
                let v = mar.draw(rng);
                if v > top {
                    top = v;
                }
            }
            // phi is nondecreasing here, so max_i phi(v_i) = phi(max_i v_i).
            let phi = mar.phi_unchecked(top);
            if phi > 0.0 {
                total += phi;
            }
        }
        total
    })
}

/// `E[(max of n draws mapped through phi)^+]` via the order-statistic
/// density of the maximum's quantile.
fn virtual_surplus_quadrature(mar: &Marginal, bidders: usize) -> Result<f64> {
    let k = (bidders - 1) as i32;
    let n = bidders as f64;
    let w = |s: f64| {
        let phi = mar.phi_unchecked(mar.inv_survival(s));
        if phi > 0.0 {
            n * (1.0 - s).powi(k) * phi
        } else {
            0.0
        }
    };
    integrate_quantile(&w, !mar.is_bounded(), QUAD_TOL)
}

/// Myerson revenue from selling the grand bundle, split-sample style: the
/// first half of the budget picks the price (single bidder) or reserve
/// (several bidders) that maximizes empirical revenue over all sample
/// breakpoints, the second half evaluates that choice. The held-out
/// evaluation keeps the estimate unbiased for the chosen price, which can
/// only under-report the true optimum.
pub fn eval_brev(prior: &ProductPrior, bidders: usize, cfg: &SampleConfig) -> Result<BrevResult> {
    check_bidders(bidders)?;
    cfg.validated()?;
    let n = bidders;
    let mut train = cfg.derived(TAG_BREV_TRAIN);
    train.samples = (cfg.samples / 2).max(1);
    let mut held_out = cfg.derived(TAG_BREV_EVAL);
    held_out.samples = (cfg.samples - cfg.samples / 2).max(1);

    let marginals = prior.marginals().to_vec();
    let pairs = bundle_top_two(&train, &marginals, n);
    let price = best_reserve(pairs);

    let exponent = if n == 1 {
        // The evaluated statistic is 0 or the fixed price: bounded.
        f64::INFINITY
    } else {
        2.0 * prior.max_tail_heaviness()
    };
    let robust = exponent <= VARIANCE_EDGE;
    let estimate = monte_carlo(&held_out, robust, move |rng| {
        if n == 1 {
            let mut sum = 0.0;
            for mar in &marginals {
                sum += mar.draw(rng);
            }
            return if sum >= price { price } else { 0.0 };
        }
        let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..n {
            let mut sum = 0.0;
            for mar in &marginals {
                sum += mar.draw(rng);
            }
            push_top2(&mut top, &mut second, sum);
        }
        if top < price {
            0.0
        } else {
            second.max(price)
        }
    })?;
    Ok(BrevResult { estimate, price })
}

/// Top and second bundle sums per training sample, in chunk order.
fn bundle_top_two(cfg: &SampleConfig, marginals: &[Marginal], n: usize) -> Vec<(f64, f64)> {
    let sizes = cfg.chunk_sizes();
    let per_chunk: Vec<Vec<(f64, f64)>> = (0..cfg.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = cfg.chunk_rng(chunk);
            let count = sizes[chunk as usize];
            let mut out = Vec::with_capacity(count as usize);
            for _ in 0..count {
                if n == 1 {
                    let mut sum = 0.0;
                    for mar in marginals {
                        sum += mar.draw(&mut rng);
                    }
                    out.push((sum, 0.0));
                } else {
                    let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                    for _ in 0..n {
                        let mut sum = 0.0;
                        for mar in marginals {
                            sum += mar.draw(&mut rng);
                        }
                        push_top2(&mut top, &mut second, sum);
                    }
                    out.push((top, second));
                }
            }
            out
        })
        .collect();
    per_chunk.concat()
}

/// Exact maximizer of the empirical reserve revenue
/// `R(r) = sum over samples with top >= r of max(second, r)`,
/// found in one descending sweep over its breakpoints. R is linear between
/// breakpoints with nonnegative slope in r, so the maximum sits on a
/// breakpoint; ties prefer the higher reserve.
fn best_reserve(pairs: Vec<(f64, f64)>) -> f64 {
    // Event 0: at r = top the sample becomes active, paying the reserve.
    // Event 1: at r = second the payment freezes at the sample's second.
    let mut events: Vec<(f64, u8)> = Vec::with_capacity(2 * pairs.len());
    for (top, second) in pairs {
        if top <= 0.0 {
            continue;
        }
        events.push((top, 0));
        if second > 0.0 {
            events.push((second, 1));
        }
    }
    events.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut paying_reserve = 0u64;
    let mut frozen = 0.0f64;
    let mut best_rev = 0.0f64;
    let mut best_r = 0.0f64;
    let mut i = 0;
    while i < events.len() {
        let r = events[i].0;
        while i < events.len() && events[i].0 == r {
            if events[i].1 == 0 {
                paying_reserve += 1;
            } else {
                paying_reserve -= 1;
                frozen += r;
            }
            i += 1;
        }
        let rev = frozen + r * paying_reserve as f64;
        if rev > best_rev {
            best_rev = rev;
            best_r = r;
        }
    }
    best_r
}

/// Quantile-based duality benchmark.
///
/// Each bidder draws one uniform quantile per item; the item where a
/// bidder's quantile is their row maximum contributes the positive virtual
/// value, every other item contributes the raw value, and the benchmark is
/// the per-item maximum over bidders, summed. For one bidder it reduces to
/// the positive virtual value on the top-quantile item plus raw values on
/// the rest, plus the boundary revenue mass of the top item when the
/// marginal keeps revenue at infinity.
pub fn eval_cdw(prior: &ProductPrior, bidders: usize, cfg: &SampleConfig) -> Result<Estimate> {
    check_bidders(bidders)?;
    require_regular(prior)?;
    let (mass, carrier) = total_tail_mass(prior);
    if bidders >= 2 && mass > 0.0 {
        // The several-bidder boundary term scales with the bidder count and
        // is outside this estimator; refuse rather than under-report.
        return Err(Error::HeavyTail {
            family: carrier,
            mass,
        });
    }
    let heaviest = prior.max_tail_heaviness();
    let forced = bidders == 1 && prior.m() == 1 && heaviest <= 1.0 + 1e-12;
    if cfg.prefer_quadrature || forced {
        return cdw_quadrature(prior, bidders);
    }
    if bidders == 1 {
        cdw_single_monte_carlo(prior, cfg)
    } else {
        cdw_multi_monte_carlo(prior, bidders, cfg)
    }
}

/// Tail exponent of the single-bidder benchmark statistic. The positive
/// virtual value inherits the marginal's own exponent unless it vanishes in
/// the tail (exactly the positive-mass families), and an off-top raw value
/// needs both a high quantile and a higher one elsewhere, squaring the tail.
fn cdw_single_exponent(prior: &ProductPrior) -> f64 {
    let m = prior.m();
    prior
        .marginals()
        .iter()
        .map(|mar| {
            let e = mar.tail_exponent();
            let phi_tail = if mar.tail_revenue_mass() > 0.0 {
                f64::INFINITY
            } else {
                e
            };
            let raw_tail = if m >= 2 { 2.0 * e } else { f64::INFINITY };
            phi_tail.min(raw_tail)
        })
        .fold(f64::INFINITY, f64::min)
}

fn cdw_single_monte_carlo(prior: &ProductPrior, cfg: &SampleConfig) -> Result<Estimate> {
    let marginals = prior.marginals().to_vec();
    let masses: Vec<f64> = marginals.iter().map(Marginal::tail_revenue_mass).collect();
    let robust = cdw_single_exponent(prior) <= VARIANCE_EDGE;
    monte_carlo(cfg, robust, move |rng| {
        let mut total = 0.0;
        let mut best_u = -1.0;
        let mut best_j = 0usize;
        let mut best_v = 0.0;
        let mut ties = 1u32;
        for (j, mar) in marginals.iter().enumerate() {
            let u: f64 = rng.gen();
            let v = mar.inv_survival(1.0 - u);
            total += v;
            if u > best_u {
                best_u = u;
                best_j = j;
                best_v = v;
                ties = 1;
            } else if u == best_u {
                // Measure zero for uniform draws; resolved uniformly anyway.
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best_j = j;
                    best_v = v;
                }
            }
        }
        let phi = marginals[best_j].phi_unchecked(best_v).max(0.0);
        total - best_v + phi + masses[best_j]
    })
}

fn cdw_multi_monte_carlo(
    prior: &ProductPrior,
    bidders: usize,
    cfg: &SampleConfig,
) -> Result<Estimate> {
    let n = bidders;
    let m = prior.m();
    let marginals = prior.marginals().to_vec();
    // The top-item positive virtual value carries the marginal's own tail.
    let robust = prior.max_tail_heaviness() <= VARIANCE_EDGE;
    monte_carlo(cfg, robust, move |rng| {
        let mut item_best = vec![f64::NEG_INFINITY; m];
        for _ in 0..n {
            // Pass 1 locates the bidder's row-maximum quantile; pass 2
            // replays the identical draws from a snapshot, so no row buffer
            // is needed.
            let snapshot = rng.clone();
            let mut best_u = -1.0;
            let mut best_j = 0usize;
            let mut ties = 1u32;
            for j in 0..m {
                let u: f64 = rng.gen();
                if u > best_u {
                    best_u = u;
                    best_j = j;
                    ties = 1;
                } else if u == best_u {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        best_j = j;
                    }
                }
            }
            let mut replay = snapshot;
            for (j, slot) in item_best.iter_mut().enumerate() {
                let u: f64 = replay.gen();
                let v = marginals[j].inv_survival(1.0 - u);
                let w = if j == best_j {
                    marginals[j].phi_unchecked(v).max(0.0)
                } else {
                    v
                };
                if w > *slot {
                    *slot = w;
                }
            }
        }
        item_best.iter().sum()
    })
}

fn cdw_quadrature(prior: &ProductPrior, bidders: usize) -> Result<Estimate> {
    let m = prior.m();
    if bidders >= 2 {
        if m > 1 {
            return Err(Error::QuadratureUnavailable {
                what: "the several-bidder duality benchmark factorizes per item only for m = 1"
                    .into(),
            });
        }
        // Every entry is its row's maximum when m = 1, so the benchmark is
        // the positive virtual value of the highest draw. The boundary mass
        // is zero here (checked by the caller).
        let value = virtual_surplus_quadrature(&prior.marginals()[0], bidders)?;
        return Ok(Estimate::exact(value, Method::Quadrature));
    }
    let mut total = 0.0;
    for mar in prior.marginals() {
        // Each item is the top quantile with probability 1/m.
        total += mar.tail_revenue_mass() / m as f64;
        total += phi_top_integral(mar, m)?;
        if m >= 2 {
            total += raw_off_top_integral(mar, m)?;
        }
    }
    Ok(Estimate::exact(total, Method::Quadrature))
}

/// `int_0^1 phi^+(F^{-1}(u)) u^{m-1} du` in the survival coordinate.
fn phi_top_integral(mar: &Marginal, m: usize) -> Result<f64> {
    let k = (m - 1) as i32;
    let w = |s: f64| {
        let phi = mar.phi_unchecked(mar.inv_survival(s));
        if phi > 0.0 {
            phi * (1.0 - s).powi(k)
        } else {
            0.0
        }
    };
    integrate_quantile(&w, !mar.is_bounded(), QUAD_TOL)
}

/// `int_0^1 F^{-1}(u) (1 - u^{m-1}) du` in the survival coordinate. The
/// off-top factor vanishes linearly at the upper end, which keeps the
/// integral finite even for divergent-mean marginals.
fn raw_off_top_integral(mar: &Marginal, m: usize) -> Result<f64> {
    let k = (m - 1) as f64;
    let w = |s: f64| {
        let v = mar.inv_survival(s);
        let off_top = -((k * (-s).ln_1p()).exp_m1());
        v * off_top
    };
    integrate_quantile(&w, !mar.is_bounded(), QUAD_TOL)
}

/// Core of the value distribution below the separate-sale revenue
/// `t = SRev_1(prior)`, either truncated or conditional.
pub fn eval_core(prior: &ProductPrior, cfg: &SampleConfig, variant: CoreVariant) -> Result<Estimate> {
    require_regular(prior)?;
    let mut t = 0.0;
    for mar in prior.marginals() {
        t += mar.monopoly()?.1;
    }
    let marginals = prior.marginals().to_vec();
    match variant {
        CoreVariant::Truncated => {
            if cfg.prefer_quadrature {
                let mut total = 0.0;
                for mar in &marginals {
                    total += truncated_mean(mar, t)?;
                }
                return Ok(Estimate::exact(total, Method::Quadrature));
            }
            // Bounded by m * t per sample.
            monte_carlo(cfg, false, move |rng| {
                let mut total = 0.0;
                for mar in &marginals {
                    let v = mar.draw(rng);
                    if v <= t {
                        total += v;
                    }
                }
                total
            })
        }
        CoreVariant::Conditional => {
            let keep: Vec<f64> = marginals.iter().map(|mar| mar.cdf(t)).collect();
            if keep.iter().any(|&p| p <= 0.0) {
                return Err(Error::DegenerateCore);
            }
            if cfg.prefer_quadrature {
                let mut total = 0.0;
                for (mar, &p) in marginals.iter().zip(&keep) {
                    total += truncated_mean(mar, t)? / p;
                }
                return Ok(Estimate::exact(total, Method::Quadrature));
            }
            conditional_monte_carlo(&marginals, t, cfg)
        }
    }
}

/// `E[v 1{v <= t}]` by quadrature in the survival coordinate.
fn truncated_mean(mar: &Marginal, t: f64) -> Result<f64> {
    let (lo, _) = mar.support();
    if t < lo {
        return Ok(0.0);
    }
    let s_t = mar.survival(t);
    let r = integrate(&|s: f64| mar.inv_survival(s), s_t, 1.0, QUAD_TOL);
    if !r.converged(QUAD_TOL * 8.0) {
        return Err(Error::QuadratureUnavailable {
            what: format!("truncated mean error {:.3e}", r.error),
        });
    }
    Ok(r.value)
}

/// Ratio estimator for the conditional core, with a delta-method standard
/// error. `x` is the truncated sum, `d` the all-below indicator; at
/// `r = sum x / sum d` the residual `x - r d` has mean zero by construction.
fn conditional_monte_carlo(
    marginals: &[Marginal],
    t: f64,
    cfg: &SampleConfig,
) -> Result<Estimate> {
    cfg.validated()?;
    #[derive(Clone, Copy, Default)]
    struct RatioMoments {
        num: f64,
        den: f64,
        numsq: f64,
        densq: f64,
        cross: f64,
        count: u64,
    }
    let sizes = cfg.chunk_sizes();
    let marginals = marginals.to_vec();
    let parts: Vec<RatioMoments> = (0..cfg.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = cfg.chunk_rng(chunk);
            let mut acc = RatioMoments::default();
            for _ in 0..sizes[chunk as usize] {
                let mut sum = 0.0;
                let mut inside = true;
                for mar in &marginals {
                    let v = mar.draw(&mut rng);
                    sum += v;
                    if v > t {
                        inside = false;
                    }
                }
                let (x, d) = if inside { (sum, 1.0) } else { (0.0, 0.0) };
                acc.num += x;
                acc.numsq += x * x;
                acc.den += d;
                acc.densq += d * d;
                acc.cross += x * d;
                acc.count += 1;
            }
            acc
        })
        .collect();
    let mut total = RatioMoments::default();
    for p in &parts {
        total.num += p.num;
        total.numsq += p.numsq;
        total.den += p.den;
        total.densq += p.densq;
        total.cross += p.cross;
        total.count += p.count;
    }
    if total.den == 0.0 {
        return Err(Error::DegenerateCore);
    }
    let nf = total.count as f64;
    let r = total.num / total.den;
    let residual_var =
        (total.numsq - 2.0 * r * total.cross + r * r * total.densq).max(0.0) / nf;
    let stderr = (residual_var / nf).sqrt() / (total.den / nf);
    Ok(Estimate {
        mean: r,
        stderr,
        samples: total.count,
        seed: cfg.seed,
        method: Method::MonteCarlo,
        flags: Vec::new(),
    })
}

/// Two-part tariff: an entry fee of `m (z_n / n - epsilon)` (clamped at
/// zero, `z_n = F_{1:n} - F_{2:n}`) buys participation in per-item
/// second-price auctions among the participants. Requires i.i.d. items; the
/// fee calibration is symmetric.
pub fn two_part_tariff(
    prior: &ProductPrior,
    bidders: usize,
    epsilon: f64,
    opt_in: OptIn,
    cfg: &SampleConfig,
) -> Result<Estimate> {
    check_bidders(bidders)?;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter {
            field: "epsilon",
            message: format!("must be positive and finite, got {epsilon}"),
        });
    }
    let mar = *prior
        .identical_marginal()
        .ok_or(Error::NonIdenticalMarginals)?;
    let n = bidders;
    let m = prior.m();
    let f1 = expected_order_stat(&mar, 1, n as u32)?;
    let f2 = expected_order_stat(&mar, 2, n as u32)?;
    let z = f1 - f2;
    let fee = (m as f64 * (z / n as f64 - epsilon)).max(0.0);

    let exponent = if n == 1 {
        // Revenue is 0 or the fee: bounded.
        f64::INFINITY
    } else {
        2.0 * mar.tail_exponent()
    };
    let robust = exponent <= VARIANCE_EDGE;
    monte_carlo(cfg, robust, move |rng| {
        // Pass 1: per-item top two and winner, accumulated into per-bidder
        // surpluses. Only the item's winner has positive surplus there.
        let snapshot = rng.clone();
        let mut surplus = vec![0.0f64; n];
        for _ in 0..m {
            let mut top = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            let mut winner = 0usize;
            for i in 0..n {
                let v = mar.draw(rng);
                if v > top {
                    second = top;
                    top = v;
                    winner = i;
                } else if v > second {
                    second = v;
                }
            }
            surplus[winner] += top - second.max(0.0);
        }
        let participating: Vec<bool> = surplus
            .iter()
            .map(|&s| match opt_in {
                OptIn::RealizedSurplus => s >= fee,
                OptIn::ExpectedSurplus => true,
            })
            .collect();
        let k = participating.iter().filter(|&&p| p).count();
        let mut revenue = k as f64 * fee;
        if k >= 2 {
            // Pass 2 replays the same values and reruns the auctions among
            // the participants only.
            let mut replay = snapshot;
            for _ in 0..m {
                let mut top = f64::NEG_INFINITY;
                let mut second = f64::NEG_INFINITY;
                for &active in &participating {
                    let v = mar.draw(&mut replay);
                    if active {
                        push_top2(&mut top, &mut second, v);
                    }
                }
                revenue += second;
            }
        }
        revenue
    })
}

/// BSPA revenue with extra competition against first-best welfare at the
/// base bidder count, per item, on i.i.d. standard uniform items. Bundle
/// sums concentrate around m/2 as m grows, pinning the second-highest sum
/// there too, while per-item welfare stays at the expected maximum.
pub fn bundling_gap_experiment(
    m: usize,
    base_bidders: usize,
    extra_bidders: usize,
    cfg: &SampleConfig,
) -> Result<BundlingGap> {
    if base_bidders < 2 {
        return Err(Error::InvalidConfig {
            message: format!("base_bidders must be at least 2, got {base_bidders}"),
        });
    }
    let unit = Marginal::new(Family::Uniform { lo: 0.0, hi: 1.0 })?;
    let prior = ProductPrior::iid(unit, m)?;
    let per_item = 1.0 / m as f64;
    let bspa = eval_simple(
        SimpleKind::Bspa,
        &prior,
        base_bidders + extra_bidders,
        &cfg.derived(TAG_GAP_BSPA),
    )?
    .scaled(per_item);
    let wel = eval_simple(SimpleKind::Wel, &prior, base_bidders, &cfg.derived(TAG_GAP_WEL))?
        .scaled(per_item);
    Ok(BundlingGap {
        bspa_per_item: bspa,
        wel_per_item: wel,
    })
}

/// Revenue of posting one take-it-or-leave price on the grand bundle to a
/// single buyer.
pub fn posted_price_revenue(
    prior: &ProductPrior,
    price: f64,
    cfg: &SampleConfig,
) -> Result<Estimate> {
    if !price.is_finite() || price < 0.0 {
        return Err(Error::InvalidParameter {
            field: "price",
            message: format!("must be finite and nonnegative, got {price}"),
        });
    }
    let marginals = prior.marginals().to_vec();
    monte_carlo(cfg, false, move |rng| {
        let mut sum = 0.0;
        for mar in &marginals {
            sum += mar.draw(rng);
        }
        if sum >= price {
            price
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_stats::harmonic;
    use crate::sampling::Flag;

    fn exp1() -> Marginal {
        Marginal::new(Family::Exponential { rate: 1.0 }).unwrap()
    }

    fn unit() -> Marginal {
        Marginal::new(Family::Uniform { lo: 0.0, hi: 1.0 }).unwrap()
    }

    fn er() -> Marginal {
        Marginal::new(Family::EqualRevenue).unwrap()
    }

    fn gp(alpha: f64) -> Marginal {
        Marginal::new(Family::GeneralizedPareto { alpha }).unwrap()
    }

    fn iid(mar: Marginal, m: usize) -> ProductPrior {
        ProductPrior::iid(mar, m).unwrap()
    }

    fn mc(seed: u64, samples: u64) -> SampleConfig {
        SampleConfig::new(seed, samples).unwrap()
    }

    fn quad() -> SampleConfig {
        SampleConfig::new(1, 1).unwrap().quadrature()
    }

    /// |mean - truth| within k standard errors plus a numerical cushion.
    fn within(est: &Estimate, truth: f64, k: f64) {
        let slack = k * est.stderr + 1e-9;
        assert!(
            (est.mean - truth).abs() <= slack,
            "estimate {} vs {} (slack {})",
            est.mean,
            truth,
            slack
        );
    }

    #[test]
    fn welfare_examples() {
        let est = eval_simple(SimpleKind::Wel, &iid(unit(), 1), 1, &quad()).unwrap();
        assert!((est.mean - 0.5).abs() < 1e-9);
        assert_eq!(est.stderr, 0.0);

        let est = eval_simple(SimpleKind::Wel, &iid(unit(), 1), 1, &mc(11, 200_000)).unwrap();
        within(&est, 0.5, 4.0);

        let est = eval_simple(SimpleKind::Wel, &iid(exp1(), 2), 3, &quad()).unwrap();
        assert!((est.mean - 2.0 * harmonic(3)).abs() < 1e-9);

        let est = eval_simple(SimpleKind::Wel, &iid(er(), 1), 2, &mc(1, 100)).unwrap();
        assert!(est.is_divergent());
        assert!(est.mean.is_infinite());
    }

    #[test]
    fn single_bidder_pays_nothing() {
        for kind in [SimpleKind::Vcg, SimpleKind::Bspa] {
            let est = eval_simple(kind, &iid(exp1(), 3), 1, &mc(5, 100)).unwrap();
            assert_eq!(est.mean, 0.0);
            assert_eq!(est.stderr, 0.0);
        }
        assert!(eval_simple(SimpleKind::Wel, &iid(exp1(), 1), 0, &mc(5, 100)).is_err());
    }

    #[test]
    fn vcg_exponential_four_bidders() {
        let truth = harmonic(4) - 1.0; // 13/12
        let est = eval_simple(SimpleKind::Vcg, &iid(exp1(), 1), 4, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-8);
        let est = eval_simple(SimpleKind::Vcg, &iid(exp1(), 1), 4, &mc(13, 1_000_000)).unwrap();
        within(&est, truth, 4.0);
    }

    #[test]
    fn equal_revenue_single_item_forces_quadrature() {
        // No quadrature request: the heavy-tail policy reroutes anyway.
        let est = eval_simple(SimpleKind::Bspa, &iid(er(), 1), 3, &mc(3, 1000)).unwrap();
        assert!((est.mean - 3.0).abs() < 1e-6);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.method, Method::Quadrature);

        let est = eval_simple(SimpleKind::Vcg, &iid(er(), 1), 5, &mc(3, 1000)).unwrap();
        assert!((est.mean - 5.0).abs() < 1e-6);
    }

    #[test]
    fn equal_revenue_bundles_flag_infinite_variance() {
        let est = eval_simple(SimpleKind::Bspa, &iid(er(), 2), 2, &mc(17, 400_000)).unwrap();
        assert!(est.flags.contains(&Flag::InfiniteVariance));
        // Every value is at least 1, so the losing bundle sum is at least 2.
        assert!(est.mean >= 2.0);
        assert!(est.mean.is_finite());

        let err = eval_simple(SimpleKind::Bspa, &iid(er(), 2), 2, &quad()).unwrap_err();
        assert!(matches!(err, Error::QuadratureUnavailable { .. }));
    }

    #[test]
    fn srev_single_bidder_closed_forms() {
        let est = eval_srev(&iid(exp1(), 3), 1, &mc(1, 10)).unwrap();
        assert!((est.mean - 3.0 / std::f64::consts::E).abs() < 1e-9);
        assert_eq!(est.stderr, 0.0);

        let est = eval_srev(&iid(er(), 2), 1, &mc(1, 10)).unwrap();
        assert!((est.mean - 2.0).abs() < 1e-9);

        let est = eval_srev(&iid(unit(), 2), 1, &mc(1, 10)).unwrap();
        assert!((est.mean - 0.5).abs() < 1e-9);
    }

    #[test]
    fn srev_three_bidders_exponential() {
        // E[(max_3 - 1)^+] = 3a - 1.5 a^2 + a^3 / 3 with a = 1/e, by
        // integrating the survival of the maximum above 1.
        let a = (-1.0f64).exp();
        let truth = 3.0 * a - 1.5 * a * a + a * a * a / 3.0;
        let est = eval_srev(&iid(exp1(), 1), 3, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-8, "{} vs {truth}", est.mean);
        let est = eval_srev(&iid(exp1(), 1), 3, &mc(29, 1_000_000)).unwrap();
        within(&est, truth, 4.0);
    }

    #[test]
    fn srev_rejections() {
        assert!(matches!(
            eval_srev(&iid(er(), 1), 2, &mc(1, 100)).unwrap_err(),
            Error::HeavyTail { .. }
        ));
        let two_point = Marginal::new(Family::TwoPoint {
            high_value: 1.0,
            high_prob: 0.5,
        })
        .unwrap();
        assert!(matches!(
            eval_srev(&iid(two_point, 1), 1, &mc(1, 100)).unwrap_err(),
            Error::NotRegular { .. }
        ));
    }

    #[test]
    fn brev_single_item_tracks_monopoly() {
        // Exponential revenue check.
        let r = eval_brev(&iid(exp1(), 1), 1, &mc(41, 400_000)).unwrap();
        let truth = 1.0 / std::f64::consts::E;
        assert!(
            (r.estimate.mean - truth).abs() <= 4.0 * r.estimate.stderr + 5e-3,
            "{} vs {truth}",
            r.estimate.mean
        );
        // Uniform price check: the revenue curve peaks sharply at 1/2.
        let r = eval_brev(&iid(unit(), 1), 1, &mc(43, 400_000)).unwrap();
        assert!(r.price > 0.4 && r.price < 0.6, "price {}", r.price);
    }

    #[test]
    fn brev_pair_lower_bound() {
        // 4 BRev >= SRev for two regular items.
        let srev = 2.0 / std::f64::consts::E;
        let r = eval_brev(&iid(exp1(), 2), 1, &mc(47, 400_000)).unwrap();
        assert!(4.0 * r.estimate.mean >= srev - 16.0 * r.estimate.stderr);
    }

    #[test]
    fn brev_reserve_beats_plain_second_price() {
        let plain = eval_simple(SimpleKind::Bspa, &iid(exp1(), 1), 2, &mc(53, 400_000)).unwrap();
        let tuned = eval_brev(&iid(exp1(), 1), 2, &mc(53, 400_000)).unwrap();
        let slack = 4.0 * (plain.stderr + tuned.estimate.stderr);
        assert!(tuned.estimate.mean >= plain.mean - slack);
        assert!(tuned.price > 0.0);
    }

    #[test]
    fn posted_price_on_two_point_auxiliary() {
        // Each auxiliary keeps the per-item monopoly revenue at probability
        // one half; half the separate-sale revenue sells with probability
        // 3/4 here, comfortably above the quarter-of-SRev bound. The price
        // reuses the marginal's own monopoly value so that a single high
        // item clears it exactly.
        let opt = exp1().monopoly().unwrap().1;
        let aux = exp1().two_point_auxiliary().unwrap();
        let prior = ProductPrior::new(vec![aux, aux]).unwrap();
        let price = opt; // = SRev_1 / 2
        let est = posted_price_revenue(&prior, price, &mc(59, 400_000)).unwrap();
        within(&est, price * 0.75, 4.0);
        assert!(est.mean >= 2.0 * opt / 4.0 - 4.0 * est.stderr);
    }

    #[test]
    fn cdw_single_item_exponential() {
        let truth = (-1.0f64).exp(); // E[(v - 1)^+]
        let est = eval_cdw(&iid(exp1(), 1), 1, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-8);
        let est = eval_cdw(&iid(exp1(), 1), 1, &mc(61, 400_000)).unwrap();
        within(&est, truth, 4.0);
    }

    #[test]
    fn cdw_two_items_exponential() {
        // E[(max - 1)^+] + E[min] for two unit exponentials.
        let truth = 2.0 / std::f64::consts::E - (-2.0f64).exp() / 2.0 + 0.5;
        let est = eval_cdw(&iid(exp1(), 2), 1, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-7, "{} vs {truth}", est.mean);
        let est = eval_cdw(&iid(exp1(), 2), 1, &mc(67, 1_000_000)).unwrap();
        within(&est, truth, 4.0);
    }

    #[test]
    fn cdw_equal_revenue_anchors() {
        // One item: the single quantile is always the row maximum, the
        // virtual value vanishes, and only the boundary mass remains.
        let est = eval_cdw(&iid(er(), 1), 1, &mc(71, 1000)).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);

        // Two items: the off-top item contributes its raw value.
        let truth = 2.0 * harmonic(1) + 1.0;
        let est = eval_cdw(&iid(er(), 2), 1, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-7, "{} vs {truth}", est.mean);
        let est = eval_cdw(&iid(er(), 2), 1, &mc(73, 1_000_000)).unwrap();
        assert!(est.flags.contains(&Flag::InfiniteVariance));
        assert!(
            (est.mean - truth).abs() <= 6.0 * est.stderr + 0.02,
            "{} vs {truth} (stderr {})",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn cdw_rejections() {
        assert!(matches!(
            eval_cdw(&iid(er(), 1), 2, &mc(1, 100)).unwrap_err(),
            Error::HeavyTail { .. }
        ));
        assert!(matches!(
            eval_cdw(&iid(gp(0.0), 2), 3, &mc(1, 100)).unwrap_err(),
            Error::HeavyTail { .. }
        ));
        let two_point = Marginal::new(Family::TwoPoint {
            high_value: 2.0,
            high_prob: 0.5,
        })
        .unwrap();
        assert!(matches!(
            eval_cdw(&iid(two_point, 1), 1, &mc(1, 100)).unwrap_err(),
            Error::NotRegular { .. }
        ));
    }

    #[test]
    fn cdw_several_bidders_single_item() {
        // With one item every bidder's entry is their row maximum, so the
        // benchmark is the positive virtual value of the best draw, which
        // matches the separate-sale virtual surplus.
        let a = (-1.0f64).exp();
        let truth = 3.0 * a - 1.5 * a * a + a * a * a / 3.0;
        let est = eval_cdw(&iid(exp1(), 1), 3, &quad()).unwrap();
        assert!((est.mean - truth).abs() < 1e-8);
        let est = eval_cdw(&iid(exp1(), 1), 3, &mc(79, 400_000)).unwrap();
        within(&est, truth, 4.0);
    }

    #[test]
    fn core_examples() {
        // Threshold for one unit exponential item is the monopoly revenue
        // 1/e; the truncated mean has the closed form 1 - (1 + t) e^{-t}.
        let t = 1.0 / std::f64::consts::E;
        let truth = 1.0 - (1.0 + t) * (-t).exp();
        let est = eval_core(&iid(exp1(), 1), &quad(), CoreVariant::Truncated).unwrap();
        assert!((est.mean - truth).abs() < 1e-8, "{} vs {truth}", est.mean);
        let est = eval_core(&iid(exp1(), 1), &mc(83, 400_000), CoreVariant::Truncated).unwrap();
        within(&est, truth, 4.0);

        // Uniform: t = 0.25, E[v | v <= 0.25] = 0.125.
        let est = eval_core(&iid(unit(), 1), &quad(), CoreVariant::Conditional).unwrap();
        assert!((est.mean - 0.125).abs() < 1e-9);
        let est = eval_core(&iid(unit(), 1), &mc(89, 400_000), CoreVariant::Conditional).unwrap();
        within(&est, 0.125, 4.0);

        // Equal-revenue support starts above its own monopoly revenue.
        assert!(matches!(
            eval_core(&iid(er(), 1), &quad(), CoreVariant::Conditional).unwrap_err(),
            Error::DegenerateCore
        ));

        // Two exponential items: threshold doubles, items independent.
        let t2 = 2.0 / std::f64::consts::E;
        let truth2 = 2.0 * (1.0 - (1.0 + t2) * (-t2).exp());
        let est = eval_core(&iid(exp1(), 2), &quad(), CoreVariant::Truncated).unwrap();
        assert!((est.mean - truth2).abs() < 1e-8);
    }

    #[test]
    fn tariff_fee_clamps_to_vcg() {
        // z_2 = 1 for unit exponentials, so epsilon = 1 zeroes the fee and
        // the tariff collapses to plain per-item second-price revenue.
        let prior = iid(exp1(), 2);
        let est = two_part_tariff(&prior, 2, 1.0, OptIn::RealizedSurplus, &mc(97, 400_000))
            .unwrap();
        within(&est, 1.0, 4.0); // 2 items x F_{2:2} = 1/2
    }

    #[test]
    fn tariff_expected_surplus_identity() {
        // Full participation pays n m (z_n/n - eps) in fees plus the full
        // per-item second-price revenue.
        let prior = iid(exp1(), 10);
        let est = two_part_tariff(&prior, 2, 0.1, OptIn::ExpectedSurplus, &mc(101, 200_000))
            .unwrap();
        let truth = 2.0 * 10.0 * (0.5 - 0.1) + 10.0 * 0.5;
        within(&est, truth, 4.0);
    }

    #[test]
    fn tariff_opt_out_only_loses_revenue() {
        let prior = iid(gp(0.5), 50);
        let realized =
            two_part_tariff(&prior, 2, 0.05, OptIn::RealizedSurplus, &mc(103, 100_000)).unwrap();
        let expected =
            two_part_tariff(&prior, 2, 0.05, OptIn::ExpectedSurplus, &mc(103, 100_000)).unwrap();
        let slack = 4.0 * (realized.stderr + expected.stderr);
        assert!(realized.mean <= expected.mean + slack);
    }

    #[test]
    fn tariff_rejections() {
        let mixed = ProductPrior::new(vec![exp1(), unit()]).unwrap();
        assert!(matches!(
            two_part_tariff(&mixed, 2, 0.1, OptIn::RealizedSurplus, &mc(1, 100)).unwrap_err(),
            Error::NonIdenticalMarginals
        ));
        assert!(two_part_tariff(&iid(exp1(), 2), 2, 0.0, OptIn::RealizedSurplus, &mc(1, 100))
            .is_err());
        assert!(matches!(
            two_part_tariff(&iid(er(), 2), 2, 0.1, OptIn::RealizedSurplus, &mc(1, 100))
                .unwrap_err(),
            Error::DivergentExpectation { .. }
        ));
    }

    #[test]
    fn bundling_gap_examples() {
        // One item: massive competition pushes the second of 100 uniforms
        // to 99/101, far above the two-bidder welfare 2/3.
        let gap = bundling_gap_experiment(1, 2, 98, &mc(107, 200_000)).unwrap();
        within(&gap.bspa_per_item, 99.0 / 101.0, 4.0);
        assert!(gap.bspa_per_item.mean > gap.wel_per_item.mean);

        // No extra bidders: revenue cannot beat welfare.
        let gap = bundling_gap_experiment(5, 2, 0, &mc(109, 200_000)).unwrap();
        let slack = 4.0 * (gap.bspa_per_item.stderr + gap.wel_per_item.stderr);
        assert!(gap.bspa_per_item.mean <= gap.wel_per_item.mean + slack);

        assert!(bundling_gap_experiment(5, 1, 10, &mc(1, 100)).is_err());
    }

    #[test]
    fn estimates_are_bit_identical_across_runs() {
        let prior = ProductPrior::new(vec![exp1(), unit()]).unwrap();
        let a = eval_simple(SimpleKind::Bspa, &prior, 3, &mc(7, 40_000)).unwrap();
        let b = eval_simple(SimpleKind::Bspa, &prior, 3, &mc(7, 40_000)).unwrap();
        assert_eq!(a, b);

        let a = eval_brev(&prior, 2, &mc(7, 40_000)).unwrap();
        let b = eval_brev(&prior, 2, &mc(7, 40_000)).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.price, b.price);

        let a = eval_cdw(&iid(exp1(), 2), 2, &mc(7, 40_000)).unwrap();
        let b = eval_cdw(&iid(exp1(), 2), 2, &mc(7, 40_000)).unwrap();
        assert_eq!(a, b);

        let a = two_part_tariff(&iid(exp1(), 3), 2, 0.2, OptIn::RealizedSurplus, &mc(7, 40_000))
            .unwrap();
        let b = two_part_tariff(&iid(exp1(), 3), 2, 0.2, OptIn::RealizedSurplus, &mc(7, 40_000))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hierarchy_holds_on_a_light_instance() {
        let prior = iid(exp1(), 2);
        let n = 2;
        let cfg = mc(113, 500_000);
        let wel = eval_simple(SimpleKind::Wel, &prior, n, &cfg).unwrap();
        let vcg = eval_simple(SimpleKind::Vcg, &prior, n, &cfg).unwrap();
        let bspa = eval_simple(SimpleKind::Bspa, &prior, n, &cfg).unwrap();
        let srev = eval_srev(&prior, n, &cfg).unwrap();
        let brev = eval_brev(&prior, n, &cfg).unwrap().estimate;
        let cdw = eval_cdw(&prior, n, &cfg).unwrap();
        let le = |a: &Estimate, b: &Estimate| {
            let slack = 4.0 * (a.stderr + b.stderr) + 1e-9;
            assert!(a.mean <= b.mean + slack, "{} > {}", a.mean, b.mean);
        };
        le(&vcg, &srev);
        le(&bspa, &brev);
        le(&srev, &cdw);
        le(&brev, &cdw);
        le(&cdw, &wel);
    }
}
