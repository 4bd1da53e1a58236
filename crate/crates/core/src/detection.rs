//! Ideal photon-number-resolving detection: projecting a state onto a count
//! pattern, the four two-photon outcomes of a fusion gate, and the set of
//! possible two-photon patterns behind the Bell-state measurement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fock::{apply_transfer, FockKet, StateVec};
use crate::interferometry::bsm_matrix;
use crate::metrics::{bell_state, BellLabel};
use crate::{Error, Result};

/// Probability below which a detector pattern counts as impossible.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Photon counts demanded on a subset of modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionPattern {
    measured_modes: Vec<usize>,
    counts: Vec<u32>,
}

impl DetectionPattern {
    pub fn new(measured_modes: Vec<usize>, counts: Vec<u32>) -> Result<Self> {
        if measured_modes.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: measured_modes.len(),
                found: counts.len(),
            });
        }
        let distinct: BTreeSet<_> = measured_modes.iter().collect();
        if distinct.len() != measured_modes.len() {
            return Err(Error::InvalidConfig(format!(
                "repeated mode in detection pattern {measured_modes:?}"
            )));
        }
        Ok(DetectionPattern {
            measured_modes,
            counts,
        })
    }

    /// Pattern that measures nothing.
    pub fn empty() -> Self {
        DetectionPattern {
            measured_modes: Vec::new(),
            counts: Vec::new(),
        }
    }

    pub fn measured_modes(&self) -> &[usize] {
        &self.measured_modes
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Keeps the kets that show `pattern` on its measured modes and deletes those
/// modes. Returns the unnormalised residual and its squared norm, which is
/// the probability of the pattern.
pub fn project_pattern(s: &StateVec, pattern: &DetectionPattern) -> Result<(StateVec, f64)> {
    let modes = s.mode_count();
    if let Some(&bad) = pattern.measured_modes.iter().find(|&&m| m >= modes) {
        return Err(Error::ModeOutOfRange { index: bad, modes });
    }
    let mut measured = vec![None; modes];
    for (&m, &c) in pattern.measured_modes.iter().zip(&pattern.counts) {
        measured[m] = Some(c);
    }
    let mut kept = BTreeMap::new();
    for (k, a) in s.iter() {
        let matches = measured
            .iter()
            .enumerate()
            .all(|(m, want)| want.is_none_or(|c| k.occupation(m) == c));
        if matches {
            let rest: Vec<u32> = (0..modes)
                .filter(|&m| measured[m].is_none())
                .map(|m| k.occupation(m))
                .collect();
            kept.insert(FockKet::new(rest), *a);
        }
    }
    let residual = StateVec::from_map(modes - pattern.measured_modes.len(), kept);
    let p = residual.norm_sq();
    Ok((residual, p))
}

/// Marginal distribution of photon counts on `modes`, covering every pattern
/// that occurs in `s` (multi-photon ones included).
pub fn count_distribution(s: &StateVec, modes: &[usize]) -> Result<BTreeMap<Vec<u32>, f64>> {
    if let Some(&bad) = modes.iter().find(|&&m| m >= s.mode_count()) {
        return Err(Error::ModeOutOfRange {
            index: bad,
            modes: s.mode_count(),
        });
    }
    let mut dist = BTreeMap::new();
    for (k, _) in s.iter() {
        let counts: Vec<u32> = modes.iter().map(|&m| k.occupation(m)).collect();
        if dist.contains_key(&counts) {
            continue;
        }
        let pattern = DetectionPattern::new(modes.to_vec(), counts.clone())?;
        let (_, p) = project_pattern(s, &pattern)?;
        dist.insert(counts, p);
    }
    Ok(dist)
}

/// Polarisations of the two detected fusion photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionLabel {
    HH,
    HV,
    VH,
    VV,
}

impl FusionLabel {
    pub const ALL: [FusionLabel; 4] = [
        FusionLabel::HH,
        FusionLabel::HV,
        FusionLabel::VH,
        FusionLabel::VV,
    ];

    /// Both photons share a polarisation.
    pub fn is_even(self) -> bool {
        matches!(self, FusionLabel::HH | FusionLabel::VV)
    }

    /// Counts demanded on the rails `(H1, V1, H2, V2)`.
    pub fn rail_counts(self) -> [u32; 4] {
        match self {
            FusionLabel::HH => [1, 0, 1, 0],
            FusionLabel::HV => [1, 0, 0, 1],
            FusionLabel::VH => [0, 1, 1, 0],
            FusionLabel::VV => [0, 1, 0, 1],
        }
    }
}

impl fmt::Display for FusionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug)]
pub struct FusionOutcome {
    pub label: FusionLabel,
    pub probability: f64,
    /// Unnormalised state of the unmeasured modes.
    pub residual: StateVec,
}

/// Projects `s` onto each single-photon coincidence on the rail quadruple
/// `(H1, V1, H2, V2)`, in the order HH, HV, VH, VV.
pub fn fusion_outcomes(s: &StateVec, rails: [usize; 4]) -> Result<Vec<FusionOutcome>> {
    FusionLabel::ALL
        .iter()
        .map(|&label| {
            let pattern = DetectionPattern::new(rails.to_vec(), label.rail_counts().to_vec())?;
            let (residual, probability) = project_pattern(s, &pattern)?;
            Ok(FusionOutcome {
                label,
                probability,
                residual,
            })
        })
        .collect()
}

/// Two-photon detector patterns behind the BSM, named after the output modes
/// `a = H1, b = V1, c = H2, d = V2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BsmPattern {
    AA,
    BB,
    CC,
    DD,
    AB,
    AC,
    AD,
    BC,
    BD,
    CD,
}

impl BsmPattern {
    pub const ALL: [BsmPattern; 10] = [
        BsmPattern::AA,
        BsmPattern::BB,
        BsmPattern::CC,
        BsmPattern::DD,
        BsmPattern::AB,
        BsmPattern::AC,
        BsmPattern::AD,
        BsmPattern::BC,
        BsmPattern::BD,
        BsmPattern::CD,
    ];

    pub fn occupations(self) -> [u32; 4] {
        match self {
            BsmPattern::AA => [2, 0, 0, 0],
            BsmPattern::BB => [0, 2, 0, 0],
            BsmPattern::CC => [0, 0, 2, 0],
            BsmPattern::DD => [0, 0, 0, 2],
            BsmPattern::AB => [1, 1, 0, 0],
            BsmPattern::AC => [1, 0, 1, 0],
            BsmPattern::AD => [1, 0, 0, 1],
            BsmPattern::BC => [0, 1, 1, 0],
            BsmPattern::BD => [0, 1, 0, 1],
            BsmPattern::CD => [0, 0, 1, 1],
        }
    }

    pub fn ket(self) -> FockKet {
        FockKet::new(self.occupations())
    }
}

impl fmt::Display for BsmPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BsmPattern::AA => "a²",
            BsmPattern::BB => "b²",
            BsmPattern::CC => "c²",
            BsmPattern::DD => "d²",
            BsmPattern::AB => "ab",
            BsmPattern::AC => "ac",
            BsmPattern::AD => "ad",
            BsmPattern::BC => "bc",
            BsmPattern::BD => "bd",
            BsmPattern::CD => "cd",
        })
    }
}

/// Probability of every two-photon pattern for a four-mode state.
pub fn bsm_pattern_probabilities(s: &StateVec) -> Result<Vec<(BsmPattern, f64)>> {
    if s.mode_count() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: s.mode_count(),
        });
    }
    Ok(BsmPattern::ALL
        .iter()
        .map(|&p| (p, s.amplitude(&p.ket()).norm_sqr()))
        .collect())
}

/// Patterns that occur with probability above [`SUPPORT_THRESHOLD`] when the
/// Bell state `label` passes through `bsm_matrix(eta_h, eta_v)`.
pub fn pattern_support(label: BellLabel, eta_h: f64, eta_v: f64) -> Result<BTreeSet<BsmPattern>> {
    let out = apply_transfer(&bsm_matrix(eta_h, eta_v)?, &bell_state(label))?;
    Ok(bsm_pattern_probabilities(&out)?
        .into_iter()
        .filter(|&(_, p)| p > SUPPORT_THRESHOLD)
        .map(|(p, _)| p)
        .collect())
}
