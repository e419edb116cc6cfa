//! Information measures: Shannon entropy, single-pulse capacity bounds,
//! and the Holevo information of a coherent-state ensemble.
//!
//! All quantities are reported in bits. The Holevo information is computed
//! by expanding each coherent state in a truncated Fock basis, assembling
//! the ensemble density matrix, and taking the von Neumann entropy of its
//! spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// Default photon-number cutoff for the Fock expansion.
pub const DEFAULT_FOCK_NMAX: usize = 100;

/// Minimum squared norm every state must retain under truncation.
pub const TRUNCATION_MIN_NORM: f64 = 1.0 - 1e-8;

/// Shannon entropy `H = −Σ p log₂ p` in bits. Zero weights contribute 0.
pub fn shannon_entropy(weights: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in weights {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h / std::f64::consts::LN_2
}

/// Single-pulse capacity of heterodyne detection over coherent states:
/// `I₁ = log₂(1 + ⟨n⟩)`.
pub fn capacity_heterodyne(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    Ok((1.0 + n).log2())
}

/// Single-pulse capacity of homodyne detection over squeezed states:
/// `I₂ = log₂(1 + 2⟨n⟩)`.
pub fn capacity_homodyne_squeezed(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    Ok((1.0 + 2.0 * n).log2())
}

/// Upper bound on the Holevo information at fixed pulse energy:
/// `I₃ = log₂(1 + ⟨n⟩) + ⟨n⟩ log₂(1 + 1/⟨n⟩)`, with the `⟨n⟩ = 0` limit 0.
pub fn capacity_holevo_bound(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + n).log2() + n * (1.0 + 1.0 / n).log2())
}

fn check_photon_number(n: f64) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return Err(Error::NegativePhotonNumber(n));
    }
    Ok(())
}

/// Fock-basis expansion of a state, indexed by photon number `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coefficients: Vec<Complex64>,
}

impl FockVector {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Coherent-state Fock coefficients `c_n = e^{−|α|²/2} αⁿ/√(n!)`, computed
/// by the stable recurrence `c_{n+1} = c_n · α/√(n+1)`.
pub fn coherent_fock_vector(alpha: Complex64, n_max: usize) -> FockVector {
    let mut coefficients = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    coefficients.push(c);
    for n in 0..n_max {
        c *= alpha / ((n + 1) as f64).sqrt();
        coefficients.push(c);
    }
    FockVector { coefficients }
}

/// Holevo information `χ = −Tr ρ log₂ ρ` of a pure-state ensemble, with
/// `ρ = Σ_k p_k |α_k⟩⟨α_k|` built in the Fock basis truncated at `n_max`.
///
/// Fails if any state loses more than 1e-8 of its squared norm to the
/// truncation, or if the spectrum contains an eigenvalue below −1e-9.
/// Eigenvalues in `[−1e-9, 0]` are clamped to zero.
pub fn holevo_information(ensemble: &Ensemble, n_max: usize) -> Result<f64> {
    let dim = n_max + 1;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (index, entry) in ensemble.entries().iter().enumerate() {
        let fock = coherent_fock_vector(entry.amplitude, n_max);
        let norm = fock.norm_sqr();
        if norm < TRUNCATION_MIN_NORM {
            return Err(Error::TruncationLoss { index, n_max, norm });
        }
        let v = fock.coefficients();
        for i in 0..dim {
            let wi = entry.prior * v[i];
            for j in 0..dim {
                rho[(i, j)] += wi * v[j].conj();
            }
        }
    }
    // Guard against rounding asymmetry before the Hermitian eigensolver.
    let rho = (&rho + rho.adjoint()).scale(0.5);
    let eigenvalues = rho.symmetric_eigenvalues();

    let mut chi = 0.0;
    for &lambda in eigenvalues.iter() {
        if lambda < -1e-9 {
            return Err(Error::NegativeEigenvalue(lambda));
        }
        if lambda > 0.0 {
            chi -= lambda * lambda.ln();
        }
    }
    Ok(chi / std::f64::consts::LN_2)
}
