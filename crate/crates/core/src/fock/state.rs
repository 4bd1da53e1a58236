use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// Amplitudes with magnitude below this are dropped from a [`StateVec`].
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Occupation numbers of a multimode Fock basis state, one entry per mode.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockKet(Vec<u32>);

impl FockKet {
    pub fn new(occupations: impl Into<Vec<u32>>) -> Self {
        FockKet(occupations.into())
    }

    pub fn vacuum(modes: usize) -> Self {
        FockKet(vec![0; modes])
    }

    /// Ket with a single photon in each of the listed modes.
    pub fn with_photons(modes: usize, occupied: &[usize]) -> Result<Self> {
        let mut occ = vec![0; modes];
        for &m in occupied {
            if m >= modes {
                return Err(Error::ModeOutOfRange { index: m, modes });
            }
            occ[m] += 1;
        }
        Ok(FockKet(occ))
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn occupation(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub(crate) fn occupations_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    /// Concatenates the modes of `self` and `other`.
    pub fn concat(&self, other: &FockKet) -> FockKet {
        let mut occ = Vec::with_capacity(self.0.len() + other.0.len());
        occ.extend_from_slice(&self.0);
        occ.extend_from_slice(&other.0);
        FockKet(occ)
    }

    /// `sqrt(prod_j n_j!)`, the normalisation of `prod_j (a_j^dagger)^{n_j} |0>`.
    pub(crate) fn factorial_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|&n| 2..=n)
            .map(f64::from)
            .product::<f64>()
            .sqrt()
    }
}

impl fmt::Display for FockKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&n| n > 9);
        f.write_str("|")?;
        for (i, n) in self.0.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("⟩")
    }
}

impl fmt::Debug for FockKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sparse, possibly unnormalised, pure state over a fixed number of modes.
///
/// Kets are kept in a `BTreeMap` so every reduction over the amplitudes runs
/// in the same order, which keeps floating-point results bit-reproducible.
#[derive(Clone, PartialEq)]
pub struct StateVec {
    mode_count: usize,
    amplitudes: BTreeMap<FockKet, Complex64>,
}

impl StateVec {
    /// The zero vector on `mode_count` modes.
    pub fn zero(mode_count: usize) -> Self {
        StateVec {
            mode_count,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn basis(ket: FockKet) -> Self {
        let mode_count = ket.modes();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(ket, Complex64::new(1.0, 0.0));
        StateVec {
            mode_count,
            amplitudes,
        }
    }

    /// Builds a state from `(ket, amplitude)` pairs; repeated kets accumulate.
    pub fn from_terms<I>(mode_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockKet, Complex64)>,
    {
        let mut amplitudes: BTreeMap<FockKet, Complex64> = BTreeMap::new();
        for (ket, amp) in terms {
            if ket.modes() != mode_count {
                return Err(Error::DimensionMismatch {
                    expected: mode_count,
                    found: ket.modes(),
                });
            }
            *amplitudes.entry(ket).or_default() += amp;
        }
        Ok(Self::from_map(mode_count, amplitudes))
    }

    /// Real-amplitude shorthand for [`StateVec::from_terms`].
    pub fn from_real_terms(mode_count: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Self::from_terms(
            mode_count,
            terms
                .iter()
                .map(|&(occ, a)| (FockKet::new(occ), Complex64::new(a, 0.0))),
        )
    }

    pub(crate) fn from_map(
        mode_count: usize,
        mut amplitudes: BTreeMap<FockKet, Complex64>,
    ) -> Self {
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        StateVec {
            mode_count,
            amplitudes,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Number of stored (non-negligible) amplitudes.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, ket: &FockKet) -> Complex64 {
        self.amplitudes.get(ket).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockKet, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Total photon number shared by every ket, or `None` for the zero state
    /// or a superposition of different photon numbers.
    pub fn photon_number(&self) -> Option<u32> {
        let mut it = self.amplitudes.keys().map(FockKet::photons);
        let first = it.next()?;
        it.all(|n| n == first).then_some(first)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(Complex64::norm_sqr).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> StateVec {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, a)| (k.clone(), a * factor))
            .collect();
        Self::from_map(self.mode_count, amplitudes)
    }

    /// The state rescaled to unit norm; errors on the zero state.
    pub fn normalized(&self) -> Result<StateVec> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::ZeroProbability("cannot normalise the zero state"));
        }
        Ok(self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    /// `self + other`.
    pub fn add(&self, other: &StateVec) -> Result<StateVec> {
        check_modes(self.mode_count, other.mode_count)?;
        let mut amplitudes = self.amplitudes.clone();
        for (k, a) in &other.amplitudes {
            *amplitudes.entry(k.clone()).or_default() += a;
        }
        Ok(Self::from_map(self.mode_count, amplitudes))
    }

    /// Largest componentwise `|self_k - other_k|`.
    pub fn max_abs_diff(&self, other: &StateVec) -> Result<f64> {
        check_modes(self.mode_count, other.mode_count)?;
        let mut worst: f64 = 0.0;
        for (k, a) in &self.amplitudes {
            worst = worst.max((a - other.amplitude(k)).norm());
        }
        for (k, b) in &other.amplitudes {
            if !self.amplitudes.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// Like [`StateVec::max_abs_diff`] after rotating `self` by the single
    /// global phase that best aligns it with `other`.
    pub fn max_abs_diff_up_to_phase(&self, other: &StateVec) -> Result<f64> {
        let overlap = inner_product(self, other)?;
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.scaled(phase).max_abs_diff(other)
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0 ({} modes)", self.mode_count);
        }
        for (i, (k, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){k}", a.re, a.im)?;
        }
        Ok(())
    }
}

fn check_modes(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVec, b: &StateVec) -> Result<Complex64> {
    check_modes(a.mode_count, b.mode_count)?;
    Ok(a.amplitudes
        .iter()
        .filter_map(|(k, x)| b.amplitudes.get(k).map(|y| x.conj() * y))
        .sum())
}

pub fn norm_sq(s: &StateVec) -> f64 {
    s.norm_sq()
}

/// Tensor product; the modes of `b` follow those of `a`.
pub fn tensor(a: &StateVec, b: &StateVec) -> StateVec {
    let mut amplitudes = BTreeMap::new();
    for (ka, xa) in &a.amplitudes {
        for (kb, xb) in &b.amplitudes {
            amplitudes.insert(ka.concat(kb), xa * xb);
        }
    }
    StateVec::from_map(a.mode_count + b.mode_count, amplitudes)
}
