//! Measurement-projector reconstruction from completed trajectories.
//!
//! Any homodyne measurement with a predetermined (possibly adaptive) phase
//! history realizes a projector onto a pure squeezed state `|α, ξ⟩`. The
//! projector follows from two functionals of the photocurrent record,
//!
//! ```text
//! A = ∫ I(t) e^{iφ(t) − t/2} dt        B = −∫ e^{2iφ(t) − t} dt
//! ```
//!
//! via `α = (A + B A*)/(1 − |B|²)` and `ξ = −(B/|B|) arctanh |B|`. The
//! discrete record has piecewise-constant phase, so `B` is accumulated with
//! the decay factor integrated exactly over each step,
//! `−Σ e^{2iφ(t_i) − t_i} (1 − e^{−dt})`, which keeps `|B| ≤ 1 − e^{−t_max}`
//! strictly below 1 for any phase history; `A` uses the measured charges
//! directly, `Σ ΔQ(t_i) e^{iφ(t_i) − t_i/2}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::montecarlo::{batch_symbol, derive_stream_seed, StreamPurpose};
use crate::policy::PolicySpec;
use crate::trajectory::{run_trajectory, GaussianNoise, RecordStep, SimConfig};

/// Per-step contribution to the `(A, B)` functionals. The engine and
/// [`accumulate_ab`] both use this, so reconstruction from a stored record
/// reproduces the in-flight sums bit for bit.
pub fn ab_increment(t: f64, phase: f64, charge: f64, dt: f64) -> (Complex64, Complex64) {
    let da = Complex64::from_polar((-0.5 * t).exp(), phase) * charge;
    let db = -Complex64::from_polar((-t).exp() * (1.0 - (-dt).exp()), 2.0 * phase);
    (da, db)
}

/// Accumulates the projector functionals over a stored record of steps
/// equally spaced by `dt`.
pub fn accumulate_ab(record: &[RecordStep], dt: f64) -> (Complex64, Complex64) {
    let mut a = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    for step in record {
        let (da, db) = ab_increment(step.t, step.phase, step.charge, dt);
        a += da;
        b += db;
    }
    (a, b)
}

/// Squeezed-state parameters of one measurement-outcome projector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmProjector {
    /// Projector center in phase space.
    pub alpha: Complex64,
    /// Squeezing parameter `ξ = r e^{iθ}`; `ξ = 0` is a coherent-state
    /// projector.
    pub xi: Complex64,
}

/// Converts the accumulated functionals into projector parameters.
/// Fails when `|B| ≥ 1`, which cannot happen for a finite record summed as
/// in [`accumulate_ab`].
pub fn projector_params(a: Complex64, b: Complex64) -> Result<PovmProjector> {
    let b_mag = b.norm();
    if b_mag >= 1.0 {
        return Err(Error::SqueezingDiverged(b_mag));
    }
    let alpha = (a + b * a.conj()) / (1.0 - b_mag * b_mag);
    let xi = if b_mag == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -(b / b_mag) * b_mag.atanh()
    };
    Ok(PovmProjector { alpha, xi })
}

/// One-sigma Wigner contour of a pure squeezed state, in the convention
/// where a coherent state is a circle of radius 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerEllipse {
    pub center_x: f64,
    pub center_y: f64,
    /// Anti-squeezed semi-axis `e^{|ξ|}/2`.
    pub semi_major: f64,
    /// Squeezed semi-axis `e^{−|ξ|}/2`.
    pub semi_minor: f64,
    /// Major-axis direction in `[0, π)`.
    pub orientation: f64,
}

/// Ellipse geometry of a projector: center `(Re α, Im α)`, semi-axes
/// `e^{±r}/2` with `r = |ξ|`, and major axis along `Arg(ξ)/2 + π/2` (the
/// anti-squeezed direction), reduced to `[0, π)`.
pub fn wigner_ellipse(projector: &PovmProjector) -> WignerEllipse {
    let r = projector.xi.norm();
    let orientation =
        (projector.xi.arg() / 2.0 + std::f64::consts::FRAC_PI_2).rem_euclid(std::f64::consts::PI);
    WignerEllipse {
        center_x: projector.alpha.re,
        center_y: projector.alpha.im,
        semi_major: r.exp() / 2.0,
        semi_minor: (-r).exp() / 2.0,
        orientation,
    }
}

/// One sampled projector, tagged with the trajectory's true state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmSample {
    pub true_index: usize,
    pub projector: PovmProjector,
    pub ellipse: WignerEllipse,
}

/// Draws `n_samples` trajectories with true states sampled from the
/// priors and returns the realized projectors, so outcomes appear with the
/// same probabilities as the corresponding trajectories.
pub fn sample_povm(
    ensemble: &Ensemble,
    policy: &PolicySpec,
    cfg: &SimConfig,
    n_samples: usize,
) -> Result<Vec<PovmSample>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    cfg.validate()?;
    policy.validate()?;
    let priors = ensemble.priors();
    (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let true_index = batch_symbol(cfg.seed, i, &priors);
            let mut noise =
                GaussianNoise::from_seed(derive_stream_seed(cfg.seed, i, StreamPurpose::Noise));
            let result = run_trajectory(ensemble, true_index, policy, cfg, &mut noise)?;
            let projector = projector_params(result.projector_a, result.projector_b)?;
            Ok(PovmSample {
                true_index,
                projector,
                ellipse: wigner_ellipse(&projector),
            })
        })
        .collect()
}
