//! Bell states in the dual-rail `(H1, V1, H2, V2)` encoding and the scalar
//! figures of merit: overlap fidelity, normalised fidelity and the trace
//! distance between gate matrices.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::fock::{apply_transfer, inner_product, tensor, StateVec, TransferMatrix};
use crate::interferometry::permutation_matrix;
use crate::{Error, Result};

/// Ratios exceeding 1 by more than this are reported as anomalies.
pub const NORMALIZED_FIDELITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
    ];
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PsiPlus => "ψ+",
            BellLabel::PsiMinus => "ψ-",
            BellLabel::PhiPlus => "φ+",
            BellLabel::PhiMinus => "φ-",
        })
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi+" | "ψ+" => Ok(BellLabel::PsiPlus),
            "psi-" | "ψ-" => Ok(BellLabel::PsiMinus),
            "phi+" | "φ+" => Ok(BellLabel::PhiPlus),
            "phi-" | "φ-" => Ok(BellLabel::PhiMinus),
            other => Err(Error::InvalidConfig(format!(
                "unknown Bell label {other:?}"
            ))),
        }
    }
}

/// Four-mode, two-photon dual-rail Bell state.
///
/// `ψ± = (|1001⟩ ± |0110⟩)/√2`, `φ± = (|1010⟩ ± |0101⟩)/√2`.
pub fn bell_state(label: BellLabel) -> StateVec {
    let (a, b, sign): (&[u32], &[u32], f64) = match label {
        BellLabel::PsiPlus => (&[1, 0, 0, 1], &[0, 1, 1, 0], 1.0),
        BellLabel::PsiMinus => (&[1, 0, 0, 1], &[0, 1, 1, 0], -1.0),
        BellLabel::PhiPlus => (&[1, 0, 1, 0], &[0, 1, 0, 1], 1.0),
        BellLabel::PhiMinus => (&[1, 0, 1, 0], &[0, 1, 0, 1], -1.0),
    };
    StateVec::from_real_terms(4, &[(a, FRAC_1_SQRT_2), (b, sign * FRAC_1_SQRT_2)])
        .expect("four-mode kets")
}

/// Two `(|HH⟩ + |VV⟩)/√2` pairs on qubits (1, 2) and (3, 4), reordered so
/// the fused qubits come first: modes `(H2, V2, H3, V3, H1, V1, H4, V4)`.
/// The first four modes feed a fusion gate, the last four pass through.
pub fn two_bell_pairs() -> StateVec {
    let pair = bell_state(BellLabel::PhiPlus);
    let product = tensor(&pair, &pair);
    let reorder = permutation_matrix(&[4, 5, 0, 1, 2, 3, 6, 7]).expect("valid permutation");
    apply_transfer(&reorder, &product).expect("eight modes")
}

/// Target of the even-parity fusion outcomes on the outer qubits (1, 4):
/// `(|HH⟩ + |VV⟩)/√2`.
pub fn fusion_even_target() -> StateVec {
    bell_state(BellLabel::PhiPlus)
}

/// Target of the odd-parity fusion outcomes: `(|HV⟩ + |VH⟩)/√2`.
pub fn fusion_odd_target() -> StateVec {
    bell_state(BellLabel::PsiPlus)
}

/// `|<unnormalized|target>|^2`. With a unit-norm target this lies in
/// `[0, norm_sq(unnormalized)]`.
pub fn fidelity(unnormalized: &StateVec, target: &StateVec) -> Result<f64> {
    Ok(inner_product(unnormalized, target)?.norm_sqr())
}

/// Fidelity conditioned on the heralding event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedFidelity {
    pub value: f64,
    /// Set when `F/P` exceeded 1 by more than [`NORMALIZED_FIDELITY_SLACK`];
    /// `value` is then clamped to 1.
    pub anomaly: bool,
}

pub fn normalized_fidelity(f: f64, p: f64) -> Result<NormalizedFidelity> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::ZeroProbability("normalised fidelity needs P > 0"));
    }
    let ratio = f / p;
    if ratio > 1.0 + NORMALIZED_FIDELITY_SLACK {
        Ok(NormalizedFidelity {
            value: 1.0,
            anomaly: true,
        })
    } else {
        Ok(NormalizedFidelity {
            value: ratio,
            anomaly: false,
        })
    }
}

/// `½ Σ σ_i(A - B)`, half the nuclear norm of the difference.
pub fn trace_distance(a: &TransferMatrix, b: &TransferMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.entries() - b.entries();
    Ok(0.5 * diff.singular_values().sum())
}
