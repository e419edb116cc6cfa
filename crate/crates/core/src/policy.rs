//! Local-oscillator phase policies.
//!
//! The measured quadrature at each step is selected by the LO phase φ(t).
//! Four rules are provided:
//!
//! - `heterodyne`: φ advances by a fixed increment per step (discrete
//!   approximation to a rotating LO);
//! - `wiseman`: feedback φ ← φ + ΔQ(t)/√t, designed for phase estimation;
//! - `lmmi`: φ chosen to maximize the expected one-step information gain,
//!   equivalently the posterior-weighted dispersion of the measured
//!   quadrature;
//! - `fixed`: plain homodyne at a constant phase.
//!
//! Phases are kept unwrapped along a trajectory; only reporting boundaries
//! reduce mod 2π.

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::trajectory::TrajectoryState;

/// Default heterodyne phase increment per step, in radians.
pub const DEFAULT_HETERODYNE_STEP: f64 = 0.1;

/// Relative threshold below which the LMMI objective is considered flat.
const LMMI_DEGENERACY_TOL: f64 = 1e-9;

/// Selector plus parameters for the LO-phase update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Heterodyne { step_rad: f64 },
    Wiseman { initial_phase: f64 },
    Lmmi,
    Fixed { phase: f64 },
}

impl PolicySpec {
    pub fn heterodyne() -> Self {
        PolicySpec::Heterodyne {
            step_rad: DEFAULT_HETERODYNE_STEP,
        }
    }

    pub fn wiseman() -> Self {
        PolicySpec::Wiseman { initial_phase: 0.0 }
    }

    pub fn lmmi() -> Self {
        PolicySpec::Lmmi
    }

    pub fn fixed(phase: f64) -> Self {
        PolicySpec::Fixed { phase }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Heterodyne { .. } => "heterodyne",
            PolicySpec::Wiseman { .. } => "wiseman",
            PolicySpec::Lmmi => "lmmi",
            PolicySpec::Fixed { .. } => "fixed",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicySpec::Heterodyne { step_rad } => {
                if !step_rad.is_finite() || step_rad <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "heterodyne step must be positive, got {step_rad}"
                    )));
                }
            }
            PolicySpec::Wiseman { initial_phase } | PolicySpec::Fixed { phase: initial_phase } => {
                if !initial_phase.is_finite() {
                    return Err(Error::InvalidConfig("phase must be finite".into()));
                }
            }
            PolicySpec::Lmmi => {}
        }
        Ok(())
    }

    /// The LO phase for the step the engine is about to take. `state`
    /// carries the running posterior, the previously applied phase, and the
    /// last photocharge; heterodyne, Wiseman, and fixed never inspect the
    /// posterior.
    pub fn phase_for_step(&self, state: &TrajectoryState, ensemble: &Ensemble, dt: f64) -> f64 {
        match *self {
            PolicySpec::Fixed { phase } => phase,
            PolicySpec::Heterodyne { step_rad } => heterodyne_phase(state.step, step_rad),
            PolicySpec::Wiseman { initial_phase } => match state.last_charge {
                None => initial_phase,
                Some(charge) => wiseman_phase(state.phase, charge, state.time - dt, dt),
            },
            PolicySpec::Lmmi => lmmi_phase(&state.posterior, ensemble).unwrap_or(state.phase),
        }
    }
}

/// Discrete heterodyne: `φ = step_index · step_size`, reduced mod 2π.
pub fn heterodyne_phase(step_index: usize, step_size: f64) -> f64 {
    (step_index as f64 * step_size).rem_euclid(2.0 * std::f64::consts::PI)
}

/// Wiseman's feedback rule: `φ ← φ + ΔQ/√t`, where `t` is the time of the
/// measurement that produced `ΔQ`. The first update (t = 0) divides by
/// `√dt`, matching the rule from the first completed step onward.
pub fn wiseman_phase(prev_phase: f64, last_charge: f64, t: f64, dt: f64) -> f64 {
    prev_phase + last_charge / t.max(dt).sqrt()
}

/// The phase maximizing the expected one-step information gain under the
/// given posterior: `φ = ½ Arg[(σ²_X − σ²_Y) + 2iσ_XY]`, folded into
/// `(−π/2, π/2]`.
///
/// Returns `None` when the objective is flat (the Arg operand vanishes,
/// e.g. a point-mass posterior or an exactly symmetric ensemble); callers
/// hold the previous phase in that case.
pub fn lmmi_phase(posterior: &[f64], ensemble: &Ensemble) -> Option<f64> {
    let stats = ensemble
        .quadrature_stats_with(posterior)
        .expect("posterior must be a normalized weight vector");
    let zr = stats.var_x - stats.var_y;
    let zi = 2.0 * stats.cov_xy;
    let scale = stats.var_x + stats.var_y;
    if scale <= 0.0 || zr.hypot(zi) <= LMMI_DEGENERACY_TOL * scale {
        return None;
    }
    let mut phi = 0.5 * zi.atan2(zr);
    if phi <= -std::f64::consts::FRAC_PI_2 {
        phi += std::f64::consts::PI;
    }
    Some(phi)
}

/// Posterior-weighted dispersion of the quadrature measured at `phase`:
/// `2σ²_X cos²φ + 2σ²_Y sin²φ + 4σ_XY sinφ cosφ`. This is the quantity the
/// LMMI rule maximizes over φ.
pub fn dispersion_objective(posterior: &[f64], ensemble: &Ensemble, phase: f64) -> f64 {
    let stats = ensemble
        .quadrature_stats_with(posterior)
        .expect("posterior must be a normalized weight vector");
    let (sin, cos) = phase.sin_cos();
    2.0 * stats.var_x * cos * cos + 2.0 * stats.var_y * sin * sin + 4.0 * stats.cov_xy * sin * cos
}

/// Small-signal estimate of the one-step information gain, in nats:
/// `(⟨A²⟩ − ⟨A⟩²)/(2Δt)` with `A_k = 2e^{−t/2}(X_k cosφ + Y_k sinφ)Δt`.
/// Diagnostic only; the argmax over φ does not depend on the log base.
pub fn linearized_step_info(
    posterior: &[f64],
    ensemble: &Ensemble,
    phase: f64,
    t: f64,
    dt: f64,
) -> f64 {
    assert_eq!(posterior.len(), ensemble.len(), "posterior length mismatch");
    let (sin, cos) = phase.sin_cos();
    let scale = 2.0 * (-0.5 * t).exp() * dt;
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for (p, entry) in posterior.iter().zip(ensemble.entries()) {
        let a = scale * (entry.amplitude.re * cos + entry.amplitude.im * sin);
        mean += p * a;
        mean_sq += p * a * a;
    }
    ((mean_sq - mean * mean) / (2.0 * dt)).max(0.0)
}
