//! Quantum-trajectory simulation of adaptive homodyne detection for
//! digitally modulated coherent optical states.
//!
//! A weak coherent pulse leaking out of a cavity is measured by balanced
//! photodetection against a strong local oscillator whose phase may be
//! steered between time steps. The crate simulates the stochastic
//! photocharge record, runs the Bayesian filter conditioned on it, and
//! scores detection policies by the mutual information they extract from
//! an ensemble of candidate states.
//!
//! The pieces:
//!
//! - [`ensemble`]: coherent-state ensembles (states + priors) and the
//!   benchmark constellations `8psk`, `16qam`, `star`.
//! - [`information`]: Shannon entropy, channel capacity bounds, and the
//!   Holevo information of an ensemble via a truncated Fock basis.
//! - [`trajectory`]: one stochastic measurement record and its Bayesian
//!   posterior, step by step.
//! - [`policy`]: local-oscillator phase rules: discrete heterodyne,
//!   Wiseman feedback, the information-maximizing LMMI rule, and fixed
//!   phase.
//! - [`povm`]: reconstruction of the squeezed-state projector realized by
//!   a completed trajectory, plus its Wigner-ellipse geometry.
//! - [`montecarlo`]: reproducible parallel batch runner estimating mutual
//!   information per (ensemble, policy) pair.

pub mod ensemble;
pub mod error;
pub mod information;
pub mod montecarlo;
pub mod policy;
pub mod povm;
pub mod trajectory;

pub use ensemble::{Ensemble, EnsembleEntry, QuadratureStats};
pub use error::{Error, Result};
pub use montecarlo::{BatchStatistics, PolicyComparison, StreamPurpose};
pub use policy::PolicySpec;
pub use povm::{PovmProjector, PovmSample, WignerEllipse};
pub use trajectory::{GaussianNoise, NoiseStream, SimConfig, TrajectoryResult, ZeroNoise};

pub use num_complex::Complex64;
