//! One adaptive homodyne measurement, simulated step by step.
//!
//! The cavity leaks its field at unit rate, so a state prepared with
//! amplitude α produces a photocharge increment with mean
//! `2 e^{−t/2} Re[α e^{−iφ(t)}] Δt` and variance `Δt` per detection
//! interval. The engine draws those increments for the true state, applies
//! them to a Bayesian posterior over the ensemble, and accumulates the
//! per-step information gain together with the `A`, `B` functionals that
//! determine the realized measurement projector.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::information::shannon_entropy;
use crate::policy::PolicySpec;
use crate::povm;

/// Default time step, in cavity-lifetime units.
pub const DEFAULT_DT: f64 = 5e-3;

/// Default final time; the residual cavity population is then `e^{−10}`.
pub const DEFAULT_T_MAX: f64 = 10.0;

/// Discretization of one simulated measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Time step, in cavity-lifetime units.
    pub dt: f64,
    /// Final time; `t_max / dt` must be an integer.
    pub t_max: f64,
    /// Master seed for stream derivation in batch runs.
    pub seed: u64,
    /// Retain the full `(t, φ, ΔQ)` record of each trajectory.
    pub log_record: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            seed: 0,
            log_record: false,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_max,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record(mut self, log_record: bool) -> Self {
        self.log_record = log_record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        let ratio = self.t_max / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "t_max/dt = {ratio} is not a whole number of steps"
            )));
        }
        Ok(())
    }

    /// Exact step count `t_max / dt`.
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Source of the per-step standard-normal photodetection noise.
///
/// The engine consumes exactly one draw per step regardless of policy, so
/// trajectories with a shared stream stay comparable across policies.
pub trait NoiseStream {
    fn sample_normal(&mut self) -> f64;
}

/// Standard normal draws from any random number generator.
#[derive(Debug, Clone)]
pub struct GaussianNoise<R>(pub R);

impl GaussianNoise<ChaCha8Rng> {
    pub fn from_seed(seed: u64) -> Self {
        GaussianNoise(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl<R: Rng> NoiseStream for GaussianNoise<R> {
    fn sample_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

/// Noise-free stream for deterministic tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseStream for ZeroNoise {
    fn sample_normal(&mut self) -> f64 {
        0.0
    }
}

/// One retained measurement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordStep {
    pub t: f64,
    pub phase: f64,
    pub charge: f64,
}

/// Mutable state of one measurement in progress. Confined to one worker.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    /// Index of the step about to run.
    pub step: usize,
    /// Time of the step about to run: `step · dt`.
    pub time: f64,
    /// LO phase applied at the previous step (unwrapped); 0 before any step.
    pub phase: f64,
    /// Photocharge of the previous step, if any.
    pub last_charge: Option<f64>,
    /// Posterior over ensemble indices, renormalized after every step.
    pub posterior: Vec<f64>,
    /// Running `A = Σ ΔQ e^{iφ − t/2}`.
    pub acc_a: Complex64,
    /// Running `B = −Σ e^{2iφ − t}(1 − e^{−dt})`.
    pub acc_b: Complex64,
    /// Full `(t, φ, ΔQ)` record, when retention is enabled.
    pub record: Option<Vec<RecordStep>>,
}

impl TrajectoryState {
    /// State at `t = 0`: posterior equals the priors, phase 0, empty sums.
    pub fn initial(ensemble: &Ensemble, capacity: usize) -> Self {
        Self {
            step: 0,
            time: 0.0,
            phase: 0.0,
            last_charge: None,
            posterior: ensemble.priors(),
            acc_a: Complex64::new(0.0, 0.0),
            acc_b: Complex64::new(0.0, 0.0),
            record: None,
        }
        .with_capacity(capacity)
    }

    fn with_capacity(mut self, capacity: usize) -> Self {
        if capacity > 0 {
            self.record = Some(Vec::with_capacity(capacity));
        }
        self
    }
}

/// Completed measurement: information totals and projector functionals.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub true_index: usize,
    /// Total information gain `H(prior) − H(final posterior)`, in bits,
    /// accumulated step by step.
    pub total_gain: f64,
    pub final_posterior: Vec<f64>,
    pub projector_a: Complex64,
    pub projector_b: Complex64,
    pub record: Option<Vec<RecordStep>>,
}

/// Mean photocharge of one detection interval:
/// `2 e^{−t/2} Re[α e^{−iφ}] Δt`.
pub fn expected_charge(alpha: Complex64, phase: f64, t: f64, dt: f64) -> f64 {
    let (sin, cos) = phase.sin_cos();
    2.0 * (-0.5 * t).exp() * (alpha.re * cos + alpha.im * sin) * dt
}

/// One stochastic photocharge increment: the expected charge plus a Wiener
/// increment of variance `Δt`.
pub fn sample_photocharge(
    alpha: Complex64,
    phase: f64,
    t: f64,
    dt: f64,
    noise: &mut impl NoiseStream,
) -> f64 {
    expected_charge(alpha, phase, t, dt) + noise.sample_normal() * dt.sqrt()
}

/// Posterior update for one observed photocharge.
///
/// The Gaussian likelihoods share the factor `exp(−ΔQ²/2Δt)`, so only the
/// ratios `exp[(ΔQ·A_k − A_k²/2)/Δt]` enter; they are evaluated in log
/// space with the running maximum subtracted, which cannot underflow to an
/// all-zero weight vector.
pub fn bayes_update(
    posterior: &[f64],
    charge: f64,
    ensemble: &Ensemble,
    phase: f64,
    t: f64,
    dt: f64,
) -> Vec<f64> {
    assert_eq!(posterior.len(), ensemble.len(), "posterior length mismatch");
    let means: Vec<f64> = ensemble
        .entries()
        .iter()
        .map(|e| expected_charge(e.amplitude, phase, t, dt))
        .collect();
    let mut updated = posterior.to_vec();
    bayes_step(&mut updated, &means, charge, dt);
    updated
}

/// In-place form of [`bayes_update`] given precomputed per-state means.
fn bayes_step(posterior: &mut [f64], means: &[f64], charge: f64, dt: f64) {
    let inv_dt = 1.0 / dt;
    let mut max_score = f64::NEG_INFINITY;
    for (k, &p) in posterior.iter().enumerate() {
        if p > 0.0 {
            let s = (charge * means[k] - 0.5 * means[k] * means[k]) * inv_dt;
            if s > max_score {
                max_score = s;
            }
        }
    }
    let mut total = 0.0;
    for (k, p) in posterior.iter_mut().enumerate() {
        if *p > 0.0 {
            let s = (charge * means[k] - 0.5 * means[k] * means[k]) * inv_dt;
            *p *= (s - max_score).exp();
            total += *p;
        }
    }
    assert!(
        total > 0.0 && total.is_finite(),
        "degenerate Bayes normalization: total = {total}"
    );
    let inv_total = 1.0 / total;
    for p in posterior.iter_mut() {
        *p *= inv_total;
    }
}

/// Information gain of one update, in bits. May be negative for an
/// individual outcome.
pub fn info_gain(before: &[f64], after: &[f64]) -> f64 {
    shannon_entropy(before) - shannon_entropy(after)
}

/// Runs one measurement of the true state `true_index` from `t = 0` to
/// `t_max`, querying the policy for the LO phase before every step.
pub fn run_trajectory(
    ensemble: &Ensemble,
    true_index: usize,
    policy: &PolicySpec,
    cfg: &SimConfig,
    noise: &mut impl NoiseStream,
) -> Result<TrajectoryResult> {
    cfg.validate()?;
    policy.validate()?;
    if true_index >= ensemble.len() {
        return Err(Error::IndexOutOfRange {
            index: true_index,
            len: ensemble.len(),
        });
    }

    let steps = cfg.steps();
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let amplitudes: Vec<Complex64> = ensemble.entries().iter().map(|e| e.amplitude).collect();

    let mut state = TrajectoryState::initial(ensemble, if cfg.log_record { steps } else { 0 });
    let mut means = vec![0.0; ensemble.len()];
    let mut entropy_before = shannon_entropy(&state.posterior);
    let mut total_gain = 0.0;

    for step in 0..steps {
        let t = step as f64 * dt;
        state.step = step;
        state.time = t;

        let phase = policy.phase_for_step(&state, ensemble, dt);
        state.phase = phase;

        let (sin, cos) = phase.sin_cos();
        let scale = 2.0 * (-0.5 * t).exp() * dt;
        for (mean, a) in means.iter_mut().zip(&amplitudes) {
            *mean = scale * (a.re * cos + a.im * sin);
        }

        let charge = means[true_index] + noise.sample_normal() * sqrt_dt;

        let (da, db) = povm::ab_increment(t, phase, charge, dt);
        state.acc_a += da;
        state.acc_b += db;
        if let Some(record) = state.record.as_mut() {
            record.push(RecordStep {
                t,
                phase,
                charge,
            });
        }

        bayes_step(&mut state.posterior, &means, charge, dt);
        let entropy_after = shannon_entropy(&state.posterior);
        total_gain += entropy_before - entropy_after;
        entropy_before = entropy_after;
        state.last_charge = Some(charge);

        debug_assert!(
            (state.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-9
                && state.posterior.iter().all(|&p| p >= 0.0),
            "posterior left the simplex at step {step}"
        );
    }

    Ok(TrajectoryResult {
        true_index,
        total_gain,
        final_posterior: state.posterior,
        projector_a: state.acc_a,
        projector_b: state.acc_b,
        record: state.record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn pair(a: f64, b: f64) -> Ensemble {
        Ensemble::new(
            "pair",
            vec![
                (0.5, Complex64::new(a, 0.0)),
                (0.5, Complex64::new(b, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = SimConfig::default();
        assert_eq!(cfg.dt, 5e-3);
        assert_eq!(cfg.t_max, 10.0);
        assert_eq!(cfg.steps(), 2000);
        assert!(cfg.validate().is_ok());

        assert!(SimConfig::new(0.0, 1.0).is_err());
        assert!(SimConfig::new(-1e-3, 1.0).is_err());
        assert!(SimConfig::new(5e-3, -2.0).is_err());
        // 0.3/0.07 is not a whole number of steps.
        assert!(SimConfig::new(0.07, 0.3).is_err());
        assert!(SimConfig::new(0.1, 10.0).is_ok());
    }

    #[test]
    fn expected_charge_examples() {
        let dt = 5e-3;
        assert_abs_diff_eq!(
            expected_charge(Complex64::new(1.0, 0.0), 0.0, 0.0, dt),
            0.01,
            epsilon = 1e-15
        );
        for t in [0.0, 0.7, 3.0] {
            assert_abs_diff_eq!(
                expected_charge(Complex64::new(0.0, 1.0), 0.0, t, dt),
                0.0,
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(
            expected_charge(Complex64::new(1.0, 0.0), 0.0, 2.0, dt),
            0.01 * (-1.0f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn photocharge_without_noise_equals_mean() {
        let dt = 5e-3;
        let q = sample_photocharge(Complex64::new(0.3, -0.4), 0.9, 1.2, dt, &mut ZeroNoise);
        assert_eq!(q, expected_charge(Complex64::new(0.3, -0.4), 0.9, 1.2, dt));
    }

    #[test]
    fn photocharge_moments_match_model() {
        // Model moments: mean 2√2·dt at t=0, φ=0, α=√2; variance dt.
        let dt = 5e-3;
        let alpha = Complex64::new(std::f64::consts::SQRT_2, 0.0);
        let mut noise = GaussianNoise::from_seed(0xfeed);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let q = sample_photocharge(alpha, 0.0, 0.0, dt, &mut noise);
            sum += q;
            sum_sq += q * q;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let expected_mean = 2.0 * std::f64::consts::SQRT_2 * dt;
        let se = (dt / n as f64).sqrt();
        assert!(
            (mean - expected_mean).abs() < 4.0 * se,
            "mean {mean} vs {expected_mean} (se {se})"
        );
        assert!((var / dt - 1.0).abs() < 0.01, "variance {var} vs {dt}");
    }

    #[test]
    fn bayes_examples() {
        let dt = 5e-3;
        let e = pair(1.0, -1.0);
        // Likelihood ratio exp(2·ΔQ·A/dt) = e^{0.4} for ΔQ = 0.1 at t = 0.
        let post = bayes_update(&[0.5, 0.5], 0.1, &e, 0.0, 0.0, dt);
        assert_abs_diff_eq!(post[0], 0.598_687_660_112_452, epsilon = 1e-12);
        assert_abs_diff_eq!(post[1], 1.0 - 0.598_687_660_112_452, epsilon = 1e-12);

        // Constant likelihood in k: measuring Y of a real pair says nothing.
        let post = bayes_update(
            &[0.25, 0.75],
            0.07,
            &e,
            std::f64::consts::FRAC_PI_2,
            0.0,
            dt,
        );
        assert_abs_diff_eq!(post[0], 0.25, epsilon = 1e-12);

        // Point mass is absorbing.
        let post = bayes_update(&[1.0, 0.0], -0.3, &e, 0.0, 0.0, dt);
        assert_eq!(post, vec![1.0, 0.0]);
    }

    #[test]
    fn info_gain_examples() {
        assert_eq!(info_gain(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert_abs_diff_eq!(info_gain(&[0.5, 0.5], &[1.0, 0.0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            info_gain(&[0.125; 8], &[0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0]),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_state_trajectory_gains_nothing() {
        let e = Ensemble::psk(1, 1.0).unwrap();
        let cfg = SimConfig::default();
        let mut noise = GaussianNoise::from_seed(3);
        let r = run_trajectory(&e, 0, &PolicySpec::fixed(0.0), &cfg, &mut noise).unwrap();
        assert_eq!(r.total_gain, 0.0);
        assert_eq!(r.final_posterior, vec![1.0]);
    }

    #[test]
    fn telescoping_gain_identity() {
        let e = Ensemble::by_name("8psk").unwrap();
        let cfg = SimConfig::default();
        for (seed, policy) in [
            (11u64, PolicySpec::heterodyne()),
            (12, PolicySpec::wiseman()),
            (13, PolicySpec::lmmi()),
            (14, PolicySpec::fixed(0.3)),
        ] {
            let mut noise = GaussianNoise::from_seed(seed);
            let r = run_trajectory(&e, 2, &policy, &cfg, &mut noise).unwrap();
            let direct = shannon_entropy(&e.priors()) - shannon_entropy(&r.final_posterior);
            assert!(
                (r.total_gain - direct).abs() < 1e-9,
                "{}: telescoping broke: {} vs {}",
                policy.name(),
                r.total_gain,
                direct
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let e = Ensemble::star();
        let cfg = SimConfig::default();
        let run = || {
            let mut noise = GaussianNoise::from_seed(99);
            run_trajectory(&e, 4, &PolicySpec::lmmi(), &cfg, &mut noise).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.total_gain.to_bits(), b.total_gain.to_bits());
        assert_eq!(a.projector_a, b.projector_a);
        assert_eq!(a.projector_b, b.projector_b);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.final_posterior), bits(&b.final_posterior));
    }

    #[test]
    fn noiseless_update_favors_true_state_monotonically() {
        // With the noise stream zeroed and the true state having the largest
        // projection, every update multiplies its weight by the largest
        // likelihood factor.
        let e = pair(1.0, -1.0);
        let cfg = SimConfig::default();
        let mut noise = ZeroNoise;
        let steps = cfg.steps();
        let mut posterior = e.priors();
        let mut prev = posterior[0];
        for i in 0..steps {
            let t = i as f64 * cfg.dt;
            let q = sample_photocharge(e.amplitude(0), 0.0, t, cfg.dt, &mut noise);
            posterior = bayes_update(&posterior, q, &e, 0.0, t, cfg.dt);
            assert!(posterior[0] >= prev, "step {i}: {} < {prev}", posterior[0]);
            prev = posterior[0];
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn charge_sum_tracks_decay_integral() {
        // Left-endpoint sum of 2e^{−t/2}dt overshoots the integral
        // 4(1 − e^{−t_max/2}) by dt/2·(f(0) − f(t_max)) ≈ 0.125%.
        let cfg = SimConfig::default();
        let alpha = Complex64::new(1.0, 0.0);
        let total: f64 = (0..cfg.steps())
            .map(|i| expected_charge(alpha, 0.0, i as f64 * cfg.dt, cfg.dt))
            .sum();
        let integral = 4.0 * (1.0 - (-cfg.t_max / 2.0).exp());
        assert!(
            (total / integral - 1.0).abs() < 2e-3,
            "sum {total} vs integral {integral}"
        );
    }

    #[test]
    fn well_separated_pair_is_resolved() {
        let e = pair(5.0, -5.0);
        let cfg = SimConfig::default();
        let n = 1000;
        let mut resolved = 0;
        let mut gain_sum = 0.0;
        for i in 0..n {
            let true_index = i % 2;
            let mut noise = GaussianNoise::from_seed(0x5e7 + i as u64);
            let r = run_trajectory(&e, true_index, &PolicySpec::fixed(0.0), &cfg, &mut noise)
                .unwrap();
            if r.final_posterior[true_index] >= 0.999 {
                resolved += 1;
            }
            gain_sum += r.total_gain;
        }
        assert!(resolved >= 990, "only {resolved}/1000 resolved");
        let mean_gain = gain_sum / n as f64;
        assert!((mean_gain - 1.0).abs() < 0.01, "mean gain {mean_gain}");
    }

    #[test]
    fn posterior_stays_on_simplex_under_random_steps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xabcdef);
        let e = Ensemble::qam16();
        let dt = 5e-3;
        let mut posterior = e.priors();
        for i in 0..100_000 {
            let phase = rng.gen_range(-3.2..3.2);
            let t = rng.gen_range(0.0..10.0);
            let charge = rng.gen_range(-0.5..0.5);
            posterior = bayes_update(&posterior, charge, &e, phase, t, dt);
            let sum: f64 = posterior.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "step {i}: sum {sum}");
            assert!(posterior.iter().all(|&p| (0.0..=1.0).contains(&p)));
            // Occasionally reset so the walk revisits high-entropy regions.
            if i % 5000 == 4999 {
                posterior = e.priors();
            }
        }
    }

    #[test]
    fn rejects_out_of_range_index() {
        let e = pair(1.0, -1.0);
        let cfg = SimConfig::default();
        assert!(matches!(
            run_trajectory(&e, 2, &PolicySpec::lmmi(), &cfg, &mut ZeroNoise),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn record_is_retained_on_request() {
        let e = pair(1.0, -1.0);
        let cfg = SimConfig::default().with_record(true);
        let mut noise = GaussianNoise::from_seed(5);
        let r = run_trajectory(&e, 0, &PolicySpec::heterodyne(), &cfg, &mut noise).unwrap();
        let record = r.record.expect("record requested");
        assert_eq!(record.len(), cfg.steps());
        assert_eq!(record[0].t, 0.0);
        assert_abs_diff_eq!(record[1].phase, 0.1, epsilon = 1e-12);
    }
}
