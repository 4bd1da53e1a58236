//! Analytic fidelity and success probability of the averaged Bell-state
//! measurement on `ψ+`.
//!
//! With `N` copies of the BSM the post-selected network acts through the
//! averaged splitter blocks `[[A, B], [-B, A]]` on `(H1, H2)` and
//! `[[C, D], [-D, C]]` on `(V1, V2)`, where
//! `A = mean √η^H`, `B = mean √(1-η^H)`, `C = mean √η^V`, `D = mean √(1-η^V)`.
//! Expanding `ψ+` through these blocks gives
//!
//! - unnormalised fidelity with `(|0011⟩ - |1100⟩)/√2`: `F = (A·D + B·C)²`,
//! - post-selection probability: `P = (A² + B²)(C² + D²)`.
//!
//! Multiplying out the means, `F = N⁻⁴ [(Σ√η^H)(Σ√(1-η^V)) + (Σ√(1-η^H))(Σ√η^V)]²`
//! and `P = N⁻⁴ [(Σ√η^H)² + (Σ√(1-η^H))²] [(Σ√η^V)² + (Σ√(1-η^V))²]`.

use crate::interferometry::check_reflectivity;
use crate::{Error, Result};

/// One draw of `N` BSM copies: the `H` and `V` reflectivity of each copy.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectivityDraw {
    eta_h: Vec<f64>,
    eta_v: Vec<f64>,
}

impl ReflectivityDraw {
    pub fn new(eta_h: Vec<f64>, eta_v: Vec<f64>) -> Result<Self> {
        if eta_h.is_empty() {
            return Err(Error::Empty("BSM copies"));
        }
        if eta_h.len() != eta_v.len() {
            return Err(Error::DimensionMismatch {
                expected: eta_h.len(),
                found: eta_v.len(),
            });
        }
        for &e in eta_h.iter().chain(&eta_v) {
            check_reflectivity(e)?;
        }
        Ok(ReflectivityDraw { eta_h, eta_v })
    }

    pub fn n_copies(&self) -> usize {
        self.eta_h.len()
    }

    pub fn eta_h(&self) -> &[f64] {
        &self.eta_h
    }

    pub fn eta_v(&self) -> &[f64] {
        &self.eta_v
    }

    /// The same draw with the `H` and `V` lists exchanged.
    pub fn swapped(&self) -> Self {
        ReflectivityDraw {
            eta_h: self.eta_v.clone(),
            eta_v: self.eta_h.clone(),
        }
    }

    /// `(mean √η, mean √(1-η))` for the `H` list and for the `V` list.
    fn block_means(&self) -> ((f64, f64), (f64, f64)) {
        (means(&self.eta_h), means(&self.eta_v))
    }
}

fn means(etas: &[f64]) -> (f64, f64) {
    let n = etas.len() as f64;
    let t: f64 = etas.iter().map(|e| e.sqrt()).sum();
    let r: f64 = etas.iter().map(|e| (1.0 - e).sqrt()).sum();
    (t / n, r / n)
}

/// Unnormalised overlap of the post-selected output with `(|0011⟩ - |1100⟩)/√2`.
pub fn bsm_fidelity_closed(d: &ReflectivityDraw) -> f64 {
    let ((a, b), (c, dd)) = d.block_means();
    (a * dd + b * c).powi(2)
}

/// Probability that every ancilla ends in vacuum.
pub fn bsm_psuccess_closed(d: &ReflectivityDraw) -> f64 {
    let ((a, b), (c, dd)) = d.block_means();
    (a * a + b * b) * (c * c + dd * dd)
}

/// `F / P`.
pub fn bsm_fnorm_closed(d: &ReflectivityDraw) -> Result<f64> {
    let p = bsm_psuccess_closed(d);
    if p.is_nan() || p <= 0.0 {
        return Err(Error::ZeroProbability("BSM post-selection never succeeds"));
    }
    Ok(bsm_fidelity_closed(d) / p)
}
