//! Coherent-state ensembles: weighted lists of complex amplitudes.
//!
//! An ensemble pairs each source symbol `k` with a prior probability `p_k`
//! and a coherent amplitude `α_k`. Quadratures are the real and imaginary
//! parts, `X_k = Re(α_k)` and `Y_k = Im(α_k)`. Entry order is part of the
//! data model: index `k` identifies the source symbol throughout the
//! pipeline, so the builders fix a documented canonical order.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ p_k = 1` for ensembles.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// Tolerance on `Σ w_k = 1` for posterior-style weight vectors.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One symbol of an ensemble: prior probability and coherent amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEntry {
    pub prior: f64,
    pub amplitude: Complex64,
}

/// A finite ensemble of coherent states with prior probabilities.
///
/// Immutable after construction; safe to share across trajectory workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    label: String,
    entries: Vec<EnsembleEntry>,
}

impl Ensemble {
    /// Builds an ensemble from `(prior, amplitude)` pairs, validating that
    /// priors are non-negative, finite, and sum to 1 within [`PRIOR_SUM_TOL`].
    pub fn new(label: impl Into<String>, entries: Vec<(f64, Complex64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut sum = 0.0;
        for (index, &(p, a)) in entries.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPrior { index, value: p });
            }
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFiniteAmplitude { index });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::UnnormalizedPriors {
                sum,
                tol: PRIOR_SUM_TOL,
            });
        }
        Ok(Self {
            label: label.into(),
            entries: entries
                .into_iter()
                .map(|(prior, amplitude)| EnsembleEntry { prior, amplitude })
                .collect(),
        })
    }

    /// `m`-ary phase-shift keying: `m` equiprobable states of the given
    /// modulus at phases `2πk/m`, `k = 0..m-1` (increasing phase from 0).
    pub fn psk(m: usize, amplitude: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "psk amplitude must be a non-negative real, got {amplitude}"
            )));
        }
        let p = 1.0 / m as f64;
        let entries = (0..m)
            .map(|k| {
                let phase = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                (p, Complex64::from_polar(amplitude, phase))
            })
            .collect();
        Self::new(format!("{m}psk"), entries)
    }

    /// 16-state quadrature-amplitude modulation: `Re, Im ∈ {−1.5, −0.5,
    /// 0.5, 1.5}`, equiprobable, row-major from `(−1.5, −1.5)` (Re varies
    /// fastest).
    pub fn qam16() -> Self {
        const LEVELS: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];
        let mut entries = Vec::with_capacity(16);
        for im in LEVELS {
            for re in LEVELS {
                entries.push((1.0 / 16.0, Complex64::new(re, im)));
            }
        }
        Self::new("16qam", entries).expect("16qam construction is valid")
    }

    /// Three-lobe star: the vacuum plus integer amplitudes 1..3 at each of
    /// the phases `0, 2π/3, 4π/3`; 10 equiprobable states. Canonical order:
    /// vacuum first, then lobes by phase with amplitude ascending.
    pub fn star() -> Self {
        let mut entries = vec![(0.1, Complex64::new(0.0, 0.0))];
        for lobe in 0..3 {
            let phase = 2.0 * std::f64::consts::PI * lobe as f64 / 3.0;
            for amp in 1..=3 {
                entries.push((0.1, Complex64::from_polar(amp as f64, phase)));
            }
        }
        Self::new("star", entries).expect("star construction is valid")
    }

    /// Looks up a builtin ensemble by CLI name: `8psk`, `16qam`, or `star`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "8psk" => Some(Self::psk(8, std::f64::consts::SQRT_2).expect("8psk is valid")),
            "16qam" => Some(Self::qam16()),
            "star" => Some(Self::star()),
            _ => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn prior(&self, k: usize) -> f64 {
        self.entries[k].prior
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.entries[k].amplitude
    }

    pub fn priors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.prior).collect()
    }

    /// Mean photon number `⟨n⟩ = Σ_k p_k |α_k|²`, the energy used per pulse.
    pub fn mean_photon_number(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.prior * e.amplitude.norm_sqr())
            .sum()
    }

    /// Quadrature statistics of the ensemble under external weights, e.g.
    /// a running posterior. See [`quadrature_stats`].
    pub fn quadrature_stats_with(&self, weights: &[f64]) -> Result<QuadratureStats> {
        if weights.len() != self.entries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for a {}-state ensemble",
                weights.len(),
                self.entries.len()
            )));
        }
        quadrature_stats(
            weights
                .iter()
                .zip(&self.entries)
                .map(|(&w, e)| (w, e.amplitude)),
        )
    }

    /// The same ensemble with every amplitude rotated by `theta` in phase
    /// space.
    pub fn rotated(&self, theta: f64) -> Self {
        let rot = Complex64::from_polar(1.0, theta);
        Self {
            label: self.label.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EnsembleEntry {
                    prior: e.prior,
                    amplitude: e.amplitude * rot,
                })
                .collect(),
        }
    }

    /// Parses the structured-text ensemble definition:
    /// `{ "label": str, "entries": [ { "p": number, "re": number, "im": number } ] }`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        Self::new(
            file.label,
            file.entries
                .into_iter()
                .map(|e| (e.p, Complex64::new(e.re, e.im)))
                .collect(),
        )
    }

    /// Reads an ensemble definition file (see [`Ensemble::from_json_str`]).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::EnsembleFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text).map_err(|e| Error::EnsembleFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Serializes to the ensemble definition format.
    pub fn to_json_string(&self) -> String {
        let file = EnsembleFile {
            label: self.label.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryFile {
                    p: e.prior,
                    re: e.amplitude.re,
                    im: e.amplitude.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("ensemble serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    label: String,
    entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    p: f64,
    re: f64,
    im: f64,
}

/// Second moments of the quadrature pair `(X, Y)` under a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

/// Weighted variances and covariance of `(X_k, Y_k) = (Re α_k, Im α_k)`:
/// `σ²_X = Σ w_k X_k² − (Σ w_k X_k)²` and likewise for `σ²_Y`, `σ_XY`.
///
/// Weights must sum to 1 within [`WEIGHT_SUM_TOL`]. Tiny negative variances
/// from rounding are clamped to 0.
pub fn quadrature_stats(
    entries: impl IntoIterator<Item = (f64, Complex64)>,
) -> Result<QuadratureStats> {
    let mut wsum = 0.0;
    let (mut mx, mut my) = (0.0, 0.0);
    let (mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0);
    for (w, a) in entries {
        let (x, y) = (a.re, a.im);
        wsum += w;
        mx += w * x;
        my += w * y;
        mxx += w * x * x;
        myy += w * y * y;
        mxy += w * x * y;
    }
    if !wsum.is_finite() || (wsum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {wsum}, expected 1 within {WEIGHT_SUM_TOL:e}"
        )));
    }
    Ok(QuadratureStats {
        var_x: (mxx - mx * mx).max(0.0),
        var_y: (myy - my * my).max(0.0),
        cov_xy: mxy - mx * my,
    })
}
