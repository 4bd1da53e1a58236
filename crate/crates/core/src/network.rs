//! The `N`-copy averaging network: DFT encoding of every logical mode over
//! `N` replicas, the copies of the gate run in parallel, DFT decoding, and
//! vacuum post-selection on the ancilla replicas.
//!
//! Physical modes are laid out logical-major, `p = j·N + r` for logical mode
//! `j` and replica `r`, so each per-mode DFT acts on a contiguous block.
//! Passthrough modes (rails that bypass the gate) follow the encoded block.
//! Replica `r = 0` carries the input and, after decoding, the output line
//! that is kept; all other replicas are ancillas that must end in vacuum.

use std::collections::BTreeMap;

use crate::fock::{apply_transfer, FockKet, StateVec, TransferMatrix};
use crate::interferometry::{dft_matrix, direct_sum, effective_average, permutation_matrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkLayout {
    n_copies: usize,
    n_logical: usize,
    n_passthrough: usize,
}

impl NetworkLayout {
    pub fn new(n_copies: usize, n_logical: usize, n_passthrough: usize) -> Result<Self> {
        if n_copies == 0 {
            return Err(Error::Empty("gate copies"));
        }
        Ok(NetworkLayout {
            n_copies,
            n_logical,
            n_passthrough,
        })
    }

    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn n_logical(&self) -> usize {
        self.n_logical
    }

    pub fn n_passthrough(&self) -> usize {
        self.n_passthrough
    }

    /// Size of the encoded block, `m·N`.
    pub fn encoded_modes(&self) -> usize {
        self.n_logical * self.n_copies
    }

    pub fn total_modes(&self) -> usize {
        self.encoded_modes() + self.n_passthrough
    }

    /// Modes seen by the caller: the logical gate modes then the passthroughs.
    pub fn external_modes(&self) -> usize {
        self.n_logical + self.n_passthrough
    }

    /// Physical index of replica `replica` of logical mode `logical`.
    pub fn physical(&self, logical: usize, replica: usize) -> usize {
        debug_assert!(logical < self.n_logical && replica < self.n_copies);
        logical * self.n_copies + replica
    }

    pub fn passthrough(&self, i: usize) -> usize {
        debug_assert!(i < self.n_passthrough);
        self.encoded_modes() + i
    }

    pub fn primary_modes(&self) -> Vec<usize> {
        (0..self.n_logical).map(|j| self.physical(j, 0)).collect()
    }

    pub fn ancilla_modes(&self) -> Vec<usize> {
        (0..self.n_logical)
            .flat_map(|j| (1..self.n_copies).map(move |r| (j, r)))
            .map(|(j, r)| self.physical(j, r))
            .collect()
    }

    pub fn is_ancilla(&self, p: usize) -> bool {
        p < self.encoded_modes() && !p.is_multiple_of(self.n_copies)
    }

    /// Physical index of external mode `e` (gate modes first, then passthroughs).
    pub fn external_to_physical(&self, e: usize) -> usize {
        if e < self.n_logical {
            self.physical(e, 0)
        } else {
            self.passthrough(e - self.n_logical)
        }
    }

    /// Places a state on the external modes into the full network, with
    /// vacuum on every ancilla.
    pub fn embed(&self, s: &StateVec) -> Result<StateVec> {
        if s.mode_count() != self.external_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.external_modes(),
                found: s.mode_count(),
            });
        }
        let total = self.total_modes();
        let terms = s.iter().map(|(k, a)| {
            let mut occ = vec![0; total];
            for (e, &n) in k.occupations().iter().enumerate() {
                occ[self.external_to_physical(e)] = n;
            }
            (FockKet::new(occ), *a)
        });
        StateVec::from_terms(total, terms)
    }

    /// Logical-major to copy-major relabelling: `j·N + r -> r·m + j`.
    fn copy_major_permutation(&self) -> Vec<usize> {
        let mut perm = vec![0; self.encoded_modes()];
        for j in 0..self.n_logical {
            for r in 0..self.n_copies {
                perm[self.physical(j, r)] = r * self.n_logical + j;
            }
        }
        perm
    }
}

/// A built averaging circuit together with the gate copies it contains.
#[derive(Clone, Debug)]
pub struct AveragedNetwork {
    layout: NetworkLayout,
    total: TransferMatrix,
    copies: Vec<TransferMatrix>,
}

impl AveragedNetwork {
    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    pub fn total(&self) -> &TransferMatrix {
        &self.total
    }

    pub fn copies(&self) -> &[TransferMatrix] {
        &self.copies
    }

    /// `M_N ⊕ I_passthrough`, the matrix the external modes see after a
    /// successful post-selection.
    pub fn effective_transfer(&self) -> Result<TransferMatrix> {
        Ok(direct_sum(&[
            effective_average(&self.copies)?,
            TransferMatrix::identity(self.layout.n_passthrough),
        ]))
    }

    pub fn run(&self, input: &StateVec) -> Result<StateVec> {
        run_averaged(self, input)
    }

    /// Runs the network and keeps the vacuum-ancilla branch.
    pub fn run_postselected(&self, input: &StateVec) -> Result<StateVec> {
        postselect_vacuum_ancilla(&run_averaged(self, input)?, &self.layout)
    }
}

/// Builds `[Decode][P^-1][⊕_k U_k][P][Encode] ⊕ I_passthrough`.
///
/// `Encode` and `Decode` are both `⊕_j DFT(N)` over the replica blocks; the
/// decoder re-applies the DFT rather than inverting it.
pub fn build_averaged_network(
    copies: &[TransferMatrix],
    n_passthrough: usize,
) -> Result<AveragedNetwork> {
    let first = copies.first().ok_or(Error::Empty("gate copies"))?;
    let m = first.dim();
    for c in copies {
        if c.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.dim(),
            });
        }
        if !c.is_unitary() {
            return Err(Error::NotUnitary {
                defect: c.unitarity_defect(),
            });
        }
    }
    let layout = NetworkLayout::new(copies.len(), m, n_passthrough)?;

    let dft = dft_matrix(layout.n_copies)?;
    let coder = direct_sum(&vec![dft; m]);
    let to_copy_major = permutation_matrix(&layout.copy_major_permutation())?;
    let parallel = direct_sum(copies);

    let core = coder
        .mul(&to_copy_major.adjoint())?
        .mul(&parallel)?
        .mul(&to_copy_major)?
        .mul(&coder)?;
    let total = direct_sum(&[core, TransferMatrix::identity(n_passthrough)]);

    Ok(AveragedNetwork {
        layout,
        total,
        copies: copies.to_vec(),
    })
}

/// Embeds `input_primary` (gate modes then passthroughs) with vacuum
/// ancillas and evolves it through the whole network.
pub fn run_averaged(net: &AveragedNetwork, input_primary: &StateVec) -> Result<StateVec> {
    let embedded = net.layout.embed(input_primary)?;
    apply_transfer(&net.total, &embedded)
}

/// Keeps the kets with no photons on any ancilla and maps them back onto the
/// external modes. The result is unnormalised; its squared norm is the
/// post-selection probability.
pub fn postselect_vacuum_ancilla(
    full_state: &StateVec,
    layout: &NetworkLayout,
) -> Result<StateVec> {
    if full_state.mode_count() != layout.total_modes() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_modes(),
            found: full_state.mode_count(),
        });
    }
    let ancillas = layout.ancilla_modes();
    let external = layout.external_modes();
    let mut kept = BTreeMap::new();
    for (k, a) in full_state.iter() {
        if ancillas.iter().any(|&p| k.occupation(p) != 0) {
            continue;
        }
        let occ: Vec<u32> = (0..external)
            .map(|e| k.occupation(layout.external_to_physical(e)))
            .collect();
        kept.insert(FockKet::new(occ), *a);
    }
    Ok(StateVec::from_map(external, kept))
}
