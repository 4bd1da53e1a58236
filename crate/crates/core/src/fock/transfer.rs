use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{FockKet, StateVec};
use crate::{Error, Result};

/// Tolerance on `max |T^dagger T - I|` for a matrix to count as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Single-particle transfer matrix of a passive linear-optical network.
///
/// Column `j` holds the image of mode `j`: `a_j^dagger -> Σ_l T[l, j] a_l^dagger`.
/// Matrices built through [`TransferMatrix::unitary`] carry a unitarity flag
/// that has been checked against [`UNITARY_TOLERANCE`]; everything else
/// (notably the averaged matrix `M_N`) is flagged general.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    entries: DMatrix<Complex64>,
    unitary: bool,
}

impl TransferMatrix {
    /// Wraps a matrix that must be unitary to within [`UNITARY_TOLERANCE`].
    pub fn unitary(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square(&entries)?;
        let defect = unitarity_defect(&entries);
        if defect > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { defect });
        }
        Ok(TransferMatrix {
            entries,
            unitary: true,
        })
    }

    /// Wraps an arbitrary square matrix; the unitarity flag is cleared.
    pub fn general(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square(&entries)?;
        Ok(TransferMatrix {
            entries,
            unitary: false,
        })
    }

    /// Wraps a square matrix and sets the flag from a fresh unitarity check.
    pub fn checked(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square(&entries)?;
        let unitary = unitarity_defect(&entries) <= UNITARY_TOLERANCE;
        Ok(TransferMatrix { entries, unitary })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Self::checked(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn identity(dim: usize) -> Self {
        TransferMatrix {
            entries: DMatrix::identity(dim, dim),
            unitary: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// `max |T^dagger T - I|`, recomputed.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.entries)
    }

    pub fn adjoint(&self) -> TransferMatrix {
        TransferMatrix {
            entries: self.entries.adjoint(),
            unitary: self.unitary,
        }
    }

    /// Matrix product `self · rhs`: the network that runs `rhs` first, then `self`.
    pub fn mul(&self, rhs: &TransferMatrix) -> Result<TransferMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.dim(),
            });
        }
        let entries = &self.entries * &rhs.entries;
        let unitary =
            self.unitary && rhs.unitary && unitarity_defect(&entries) <= UNITARY_TOLERANCE;
        Ok(TransferMatrix { entries, unitary })
    }

    /// Largest entrywise `|self - other|`.
    pub fn max_abs_diff(&self, other: &TransferMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn apply(&self, s: &StateVec) -> Result<StateVec> {
        apply_transfer(self, s)
    }
}

fn check_square(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Evolves `s` through `t`.
///
/// Each input ket is written as `prod_j (a_j^dagger)^{n_j} / sqrt(n_j!) |0>`;
/// every creation operator is replaced by its image `Σ_l T[l, j] a_l^dagger`
/// and applied one photon at a time, picking up `sqrt(n_l + 1)` per step.
/// Photon number is conserved by construction. The output norm equals the
/// input norm only when `t` is unitary.
pub fn apply_transfer(t: &TransferMatrix, s: &StateVec) -> Result<StateVec> {
    let dim = t.dim();
    if dim != s.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.mode_count(),
        });
    }

    // Nonzero entries of each column; exact zeros (permutations, direct sums)
    // are skipped.
    let columns: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|j| {
            (0..dim)
                .filter_map(|l| {
                    let x = t.entries[(l, j)];
                    (x != Complex64::default()).then_some((l, x))
                })
                .collect()
        })
        .collect();

    let mut out: BTreeMap<FockKet, Complex64> = BTreeMap::new();
    for (ket, amp) in s.iter() {
        let mut partial: BTreeMap<FockKet, Complex64> = BTreeMap::new();
        partial.insert(FockKet::vacuum(dim), amp / ket.factorial_norm());

        for (j, &n) in ket.occupations().iter().enumerate() {
            for _ in 0..n {
                let mut next: BTreeMap<FockKet, Complex64> = BTreeMap::new();
                for (k, c) in &partial {
                    for &(l, x) in &columns[j] {
                        let mut k2 = k.clone();
                        let occ = &mut k2.occupations_mut()[l];
                        let bosonic = f64::from(*occ + 1).sqrt();
                        *occ += 1;
                        *next.entry(k2).or_default() += c * x * bosonic;
                    }
                }
                partial = next;
            }
        }

        for (k, c) in partial {
            *out.entry(k).or_default() += c;
        }
    }
    Ok(StateVec::from_map(dim, out))
}
