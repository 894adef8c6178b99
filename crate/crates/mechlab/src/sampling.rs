//! Seeded, chunked Monte Carlo: reproducible estimates whose bytes do not
//! depend on thread scheduling.
//!
//! The sample budget is split into chunks; chunk c draws from an independent
//! counter-based substream (ChaCha8 stream c + 1 under the common seed), and
//! partial results are reduced in chunk-index order. Reruns with the same
//! config are therefore bit-identical, parallel or not.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How many groups the median-of-means reduction uses.
const MOM_GROUPS: usize = 32;

fn default_chunks() -> u32 {
    64
}

/// Budget and seeding for one Monte Carlo evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub samples: u64,
    #[serde(default = "default_chunks")]
    pub chunks: u32,
    /// Route the evaluation through quadrature where one exists, instead of
    /// sampling. Heavy-tail policies may force this on regardless.
    #[serde(default)]
    pub prefer_quadrature: bool,
}

impl SampleConfig {
    pub fn new(seed: u64, samples: u64) -> Result<Self> {
        SampleConfig {
            seed,
            samples,
            chunks: default_chunks(),
            prefer_quadrature: false,
        }
        .validated()
    }

    pub fn with_chunks(mut self, chunks: u32) -> Result<Self> {
        self.chunks = chunks;
        self.validated()
    }

    pub fn quadrature(mut self) -> Self {
        self.prefer_quadrature = true;
        self
    }

    pub fn validated(self) -> Result<Self> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig {
                message: "samples must be positive".into(),
            });
        }
        if self.chunks == 0 {
            return Err(Error::InvalidConfig {
                message: "chunks must be positive".into(),
            });
        }
        Ok(self)
    }

    /// Same budget, ten times the samples: the one-shot escalation used by
    /// the verification suites before declaring a failure.
    pub fn escalated(&self) -> SampleConfig {
        SampleConfig {
            samples: self.samples.saturating_mul(10),
            ..*self
        }
    }

    /// A deterministically derived config for a sibling evaluation that must
    /// not share randomness with this one.
    pub fn derived(&self, label: u64) -> SampleConfig {
        SampleConfig {
            seed: splitmix64(self.seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..*self
        }
    }

    /// The substream generator for one chunk.
    pub fn chunk_rng(&self, chunk: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64 + 1);
        rng
    }

    /// Per-chunk sample counts: the remainder spreads over leading chunks.
    pub fn chunk_sizes(&self) -> Vec<u64> {
        let chunks = self.chunks as u64;
        let base = self.samples / chunks;
        let extra = self.samples % chunks;
        (0..chunks).map(|c| base + u64::from(c < extra)).collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// How an estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// Qualitative caveats attached to an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// The estimand is infinite; the mean field reports infinity.
    Divergent,
    /// The sample variance does not converge; the estimate uses
    /// median-of-means and the reported stderr is a group-spread proxy.
    InfiniteVariance,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flag::Divergent => "divergent",
            Flag::InfiniteVariance => "infinite_variance",
        }
    }
}

/// A reproducible numeric result. `stderr` is zero exactly when the method
/// is deterministic (quadrature or closed form).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
    pub flags: Vec<Flag>,
}

impl Estimate {
    pub fn exact(mean: f64, method: Method) -> Estimate {
        Estimate {
            mean,
            stderr: 0.0,
            samples: 0,
            seed: 0,
            method,
            flags: Vec::new(),
        }
    }

    pub fn divergent(method: Method) -> Estimate {
        Estimate {
            mean: f64::INFINITY,
            stderr: 0.0,
            samples: 0,
            seed: 0,
            method,
            flags: vec![Flag::Divergent],
        }
    }

    pub fn with_flag(mut self, flag: Flag) -> Estimate {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        self
    }

    /// Linear rescaling, e.g. totals to per-item averages.
    pub fn scaled(&self, factor: f64) -> Estimate {
        Estimate {
            mean: self.mean * factor,
            stderr: self.stderr * factor.abs(),
            ..self.clone()
        }
    }

    pub fn is_divergent(&self) -> bool {
        self.flags.contains(&Flag::Divergent)
    }

    pub fn flags_string(&self) -> String {
        self.flags
            .iter()
            .map(Flag::as_str)
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[derive(Clone, Copy, Default)]
struct ChunkMoments {
    sum: f64,
    sumsq: f64,
    count: u64,
}

/// Runs `statistic` once per sample and aggregates the mean and its standard
/// error across chunk substreams. `robust` switches the reduction to
/// median-of-means over [`MOM_GROUPS`] chunk groups, for integrands with
/// heavy (variance-free) tails.
pub fn monte_carlo<F>(cfg: &SampleConfig, robust: bool, statistic: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    cfg.validated()?;
    let sizes = cfg.chunk_sizes();
    let moments: Vec<ChunkMoments> = (0..cfg.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = cfg.chunk_rng(chunk);
            let mut acc = ChunkMoments::default();
            for _ in 0..sizes[chunk as usize] {
                let x = statistic(&mut rng);
                acc.sum += x;
                acc.sumsq += x * x;
                acc.count += 1;
            }
            acc
        })
        .collect();

    // Reduction happens here, in chunk order, regardless of which thread
    // produced which chunk.
    if robust {
        Ok(median_of_means(cfg, &moments))
    } else {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut count = 0u64;
        for m in &moments {
            sum += m.sum;
            sumsq += m.sumsq;
            count += m.count;
        }
        let n = count as f64;
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(0.0);
        let stderr = (var / n).sqrt();
        Ok(Estimate {
            mean,
            stderr,
            samples: count,
            seed: cfg.seed,
            method: Method::MonteCarlo,
            flags: Vec::new(),
        })
    }
}

fn median_of_means(cfg: &SampleConfig, moments: &[ChunkMoments]) -> Estimate {
    let groups = MOM_GROUPS.min(moments.len());
    let mut group_sum = vec![0.0f64; groups];
    let mut group_count = vec![0u64; groups];
    for (i, m) in moments.iter().enumerate() {
        group_sum[i % groups] += m.sum;
        group_count[i % groups] += m.count;
    }
    let mut means: Vec<f64> = group_sum
        .iter()
        .zip(&group_count)
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("group means are finite"));
    let g = means.len();
    let median = if g % 2 == 1 {
        means[g / 2]
    } else {
        0.5 * (means[g / 2 - 1] + means[g / 2])
    };
    // Spread of the group means scaled by the asymptotic efficiency of the
    // median under near-normal group sums: sqrt(pi / 2).
    let gm = means.iter().sum::<f64>() / g as f64;
    let gvar = means.iter().map(|x| (x - gm) * (x - gm)).sum::<f64>() / (g as f64 - 1.0).max(1.0);
    let stderr = (std::f64::consts::FRAC_PI_2.sqrt()) * (gvar / g as f64).sqrt();
    let samples: u64 = moments.iter().map(|m| m.count).sum();
    Estimate {
        mean: median,
        stderr,
        samples,
        seed: cfg.seed,
        method: Method::MonteCarlo,
        flags: vec![Flag::InfiniteVariance],
    }
}
