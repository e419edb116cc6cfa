//! Reproducible parallel batch runner.
//!
//! Every trajectory derives its own noise and symbol-draw streams from the
//! master seed and its index, so results are bit-identical for any worker
//! count and reduce in index order. Mutual information per (ensemble,
//! policy) pair is estimated as the sample mean of the per-trajectory
//! information gain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::information::{capacity_heterodyne, holevo_information, shannon_entropy};
use crate::policy::PolicySpec;
use crate::trajectory::{run_trajectory, GaussianNoise, SimConfig};

/// Which stream a derived seed feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamPurpose {
    /// Photodetection noise along a trajectory.
    Noise = 0,
    /// The trajectory's true-symbol draw.
    Symbol = 1,
}

/// splitmix64 finalizer; bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for one `(trajectory, purpose)` stream from the master
/// seed. The lane `2·index + purpose` is injective, and the splitmix64
/// finalizer is a bijection, so distinct lanes can never collide for a
/// fixed master seed.
pub fn derive_stream_seed(master_seed: u64, trajectory_index: u64, purpose: StreamPurpose) -> u64 {
    let lane = trajectory_index
        .wrapping_mul(2)
        .wrapping_add(purpose as u64);
    splitmix64(master_seed.wrapping_add(splitmix64(lane)))
}

/// Samples an index from a prior vector using one uniform draw.
fn draw_symbol(rng: &mut impl Rng, priors: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    priors.len() - 1
}

/// The true-state index trajectory `index` draws in a batch run with this
/// master seed. The symbol stream is separate from the noise stream, so
/// policy comparisons under a shared seed see the same symbol sequence.
pub fn batch_symbol(master_seed: u64, index: u64, priors: &[f64]) -> usize {
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_stream_seed(master_seed, index, StreamPurpose::Symbol));
    draw_symbol(&mut rng, priors)
}

/// Echo of everything that determined a batch, embedded in results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub ensemble: String,
    pub policy: PolicySpec,
    pub sim: SimConfig,
    pub n_trajectories: usize,
}

/// Mutual-information estimate for one (ensemble, policy) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStatistics {
    pub n_trajectories: usize,
    /// Sample mean of the per-trajectory information gain, in bits.
    pub mean_gain: f64,
    /// Sample standard deviation (n−1 denominator); NaN when n < 2.
    pub std_gain: f64,
    /// `2·std_gain/√n`; NaN when n < 2.
    pub ci_half_width: f64,
    /// Mean gain conditioned on the drawn symbol; NaN for symbols that
    /// were never drawn.
    pub per_symbol_means: Vec<f64>,
    pub config: BatchConfig,
}

impl BatchStatistics {
    /// Statistical sanity bounds: the estimate must sit between 0 and the
    /// prior entropy up to five standard errors. Skipped when n < 2 (no
    /// spread estimate exists).
    pub fn validate(&self, prior_entropy: f64) -> Result<()> {
        if self.n_trajectories < 2 {
            return Ok(());
        }
        let slack = 5.0 * self.std_gain / (self.n_trajectories as f64).sqrt();
        if self.mean_gain < 0.0 || self.mean_gain > prior_entropy + slack {
            return Err(Error::StatisticsInvariant(format!(
                "mean gain {} outside [0, {} + {slack}]",
                self.mean_gain, prior_entropy
            )));
        }
        Ok(())
    }
}

/// Runs `n_trajectories` measurements with true states drawn from the
/// priors and returns the gain statistics. Deterministic for a given
/// master seed, independent of worker count.
pub fn run_batch(
    ensemble: &Ensemble,
    policy: &PolicySpec,
    cfg: &SimConfig,
    n_trajectories: usize,
) -> Result<BatchStatistics> {
    if n_trajectories == 0 {
        return Err(Error::InvalidArgument(
            "n_trajectories must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    policy.validate()?;
    let priors = ensemble.priors();

    let gains: Vec<(usize, f64)> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let true_index = batch_symbol(cfg.seed, i, &priors);
            let mut noise =
                GaussianNoise::from_seed(derive_stream_seed(cfg.seed, i, StreamPurpose::Noise));
            run_trajectory(ensemble, true_index, policy, cfg, &mut noise)
                .map(|r| (true_index, r.total_gain))
        })
        .collect::<Result<_>>()?;

    let n = n_trajectories as f64;
    let mean = gains.iter().map(|(_, g)| g).sum::<f64>() / n;
    let std = if n_trajectories >= 2 {
        let ss: f64 = gains.iter().map(|(_, g)| (g - mean) * (g - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    } else {
        f64::NAN
    };

    let mut symbol_sums = vec![0.0; ensemble.len()];
    let mut symbol_counts = vec![0usize; ensemble.len()];
    for &(k, g) in &gains {
        symbol_sums[k] += g;
        symbol_counts[k] += 1;
    }
    let per_symbol_means = symbol_sums
        .iter()
        .zip(&symbol_counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();

    let stats = BatchStatistics {
        n_trajectories,
        mean_gain: mean,
        std_gain: std,
        ci_half_width: 2.0 * std / n.sqrt(),
        per_symbol_means,
        config: BatchConfig {
            ensemble: ensemble.label().to_string(),
            policy: *policy,
            sim: *cfg,
            n_trajectories,
        },
    };
    stats.validate(shannon_entropy(&priors))?;
    Ok(stats)
}

/// Options for [`compare_policies`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Common random numbers: run every policy off the same master seed so
    /// symbol sequences and noise streams coincide. Off by default; the
    /// default salts the master seed per policy so runs are independent.
    pub crn: bool,
    /// Photon-number cutoff for the Holevo reference row.
    pub fock_nmax: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            crn: false,
            fock_nmax: crate::information::DEFAULT_FOCK_NMAX,
        }
    }
}

/// One ensemble's report: reference quantities plus the three policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparison {
    pub ensemble: String,
    pub mean_photon_number: f64,
    /// Heterodyne capacity `I₁(⟨n⟩)` at this ensemble's energy.
    pub heterodyne_capacity: f64,
    /// Holevo information `χ` of the ensemble.
    pub holevo_information: f64,
    /// Batches for heterodyne, Wiseman, and LMMI, in that order.
    pub policies: Vec<BatchStatistics>,
}

/// Runs the heterodyne, Wiseman, and LMMI policies on one ensemble and
/// attaches the reference rows `⟨n⟩`, `I₁(⟨n⟩)`, and `χ`.
pub fn compare_policies(
    ensemble: &Ensemble,
    cfg: &SimConfig,
    n_trajectories: usize,
    options: &CompareOptions,
) -> Result<PolicyComparison> {
    let n_mean = ensemble.mean_photon_number();
    let policies = [
        PolicySpec::heterodyne(),
        PolicySpec::wiseman(),
        PolicySpec::lmmi(),
    ];
    let mut batches = Vec::with_capacity(policies.len());
    for (ordinal, policy) in policies.iter().enumerate() {
        let seed = if options.crn {
            cfg.seed
        } else {
            // Salted per policy so the runs are statistically independent.
            splitmix64(cfg.seed ^ splitmix64(0x706f_6c69_6379 + ordinal as u64))
        };
        let cell_cfg = SimConfig { seed, ..*cfg };
        batches.push(run_batch(ensemble, policy, &cell_cfg, n_trajectories)?);
    }
    Ok(PolicyComparison {
        ensemble: ensemble.label().to_string(),
        mean_photon_number: n_mean,
        heterodyne_capacity: capacity_heterodyne(n_mean)?,
        holevo_information: holevo_information(ensemble, options.fock_nmax)?,
        policies: batches,
    })
}
