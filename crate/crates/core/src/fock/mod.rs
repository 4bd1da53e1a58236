//! Multimode Fock states and their evolution under transfer matrices.

mod state;
mod transfer;

pub use state::{inner_product, norm_sq, tensor, FockKet, StateVec, PRUNE_THRESHOLD};
pub use transfer::{apply_transfer, TransferMatrix, UNITARY_TOLERANCE};

use crate::{Error, Result};

/// Number of Fock states of `n_photons` photons over `n_modes` modes,
/// `C(n_modes + n_photons - 1, n_photons)`.
pub fn fock_dimension(n_modes: usize, n_photons: usize) -> Result<u64> {
    if n_modes == 0 {
        return Err(Error::InvalidConfig(
            "fock_dimension needs at least one mode".into(),
        ));
    }
    // C(n-1+i, i) = C(n-2+i, i-1) * (n-1+i) / i, exact at every step
    let mut count: u128 = 1;
    for i in 1..=n_photons as u128 {
        let factor = (n_modes as u128 - 1)
            .checked_add(i)
            .ok_or(Error::Overflow("fock_dimension"))?;
        count = count
            .checked_mul(factor)
            .ok_or(Error::Overflow("fock_dimension"))?
            / i;
        if count > u64::MAX as u128 {
            return Err(Error::Overflow("fock_dimension"));
        }
    }
    Ok(count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(fock_dimension(1, 5).unwrap(), 1);
        assert_eq!(fock_dimension(4, 2).unwrap(), 10);
        assert_eq!(fock_dimension(24, 4).unwrap(), 17550);
        assert_eq!(fock_dimension(7, 0).unwrap(), 1);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(fock_dimension(0, 3).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            fock_dimension(1000, 1000),
            Err(Error::Overflow(_))
        ));
        assert!(matches!(
            fock_dimension(usize::MAX, 2),
            Err(Error::Overflow(_))
        ));
    }
}
