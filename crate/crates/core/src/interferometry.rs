//! Single-particle matrices for the optical networks: DFT encoders, the
//! beam-splitter layer `B`, SWAP, the Type-II fusion gate `B·SWAP·B`, the
//! Bell-state measurement, plus generic permutations, direct sums and the
//! effective average `M_N = (1/N) Σ_k U_k`.
//!
//! Four-mode gates use the basis order `(H1, V1, H2, V2)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fock::TransferMatrix;
use crate::{Error, Result};

/// Beam-splitter reflectivities of a single gate instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateParams {
    /// Fusion gate; `eta_x` acts on `(H1, V1)`, `eta_y` on `(H2, V2)`.
    Fusion { eta_x: f64, eta_y: f64 },
    /// Bell-state measurement; `eta_h` couples `(H1, H2)`, `eta_v` couples `(V1, V2)`.
    Bsm { eta_h: f64, eta_v: f64 },
}

impl GateParams {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = match *self {
            GateParams::Fusion { eta_x, eta_y } => (eta_x, eta_y),
            GateParams::Bsm { eta_h, eta_v } => (eta_h, eta_v),
        };
        check_reflectivity(a)?;
        check_reflectivity(b)
    }

    pub fn matrix(&self) -> Result<TransferMatrix> {
        match *self {
            GateParams::Fusion { eta_x, eta_y } => fusion_gate(eta_x, eta_y),
            GateParams::Bsm { eta_h, eta_v } => bsm_matrix(eta_h, eta_v),
        }
    }
}

pub(crate) fn check_reflectivity(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidReflectivity(eta))
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `N`-point DFT, entry `(r, k) = ω^{rk} / sqrt(N)` with `ω = exp(-2πi/N)`.
pub fn dft_matrix(n: usize) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::InvalidConfig("DFT size must be at least 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let entries = DMatrix::from_fn(n, n, |r, k| {
        // reduce the exponent first so large r*k keeps full precision
        let phase = -2.0 * PI * ((r * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    });
    TransferMatrix::unitary(entries)
}

/// Writes the 2x2 beam-splitter block `[[√η, √(1-η)], [-√(1-η), √η]]`
/// onto modes `(p, q)`.
fn put_splitter(m: &mut DMatrix<Complex64>, p: usize, q: usize, eta: f64) {
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    m[(p, p)] = re(t);
    m[(p, q)] = re(r);
    m[(q, p)] = re(-r);
    m[(q, q)] = re(t);
}

/// The beam-splitter layer `B(η^x, η^y)`: one splitter on modes `(0, 1)`
/// and one on `(2, 3)`.
pub fn beamsplitter_layer(eta_x: f64, eta_y: f64) -> Result<TransferMatrix> {
    check_reflectivity(eta_x)?;
    check_reflectivity(eta_y)?;
    let mut m = DMatrix::zeros(4, 4);
    put_splitter(&mut m, 0, 1, eta_x);
    put_splitter(&mut m, 2, 3, eta_y);
    TransferMatrix::unitary(m)
}

/// Exchanges modes 1 and 3 (`V1 <-> V2`).
pub fn swap_matrix() -> TransferMatrix {
    permutation_matrix(&[0, 3, 2, 1]).expect("fixed permutation is valid")
}

/// Type-II fusion gate `U(η^x, η^y) = B · SWAP · B`, both `B` layers sharing
/// the same reflectivities.
pub fn fusion_gate(eta_x: f64, eta_y: f64) -> Result<TransferMatrix> {
    let b = beamsplitter_layer(eta_x, eta_y)?;
    b.mul(&swap_matrix())?.mul(&b)
}

/// Bell-state measurement network: a splitter of reflectivity `η^H` between
/// `H1` and `H2` (modes 0, 2) and one of reflectivity `η^V` between `V1` and
/// `V2` (modes 1, 3), with the same block convention as the `B` layer.
pub fn bsm_matrix(eta_h: f64, eta_v: f64) -> Result<TransferMatrix> {
    check_reflectivity(eta_h)?;
    check_reflectivity(eta_v)?;
    let mut m = DMatrix::zeros(4, 4);
    put_splitter(&mut m, 0, 2, eta_h);
    put_splitter(&mut m, 1, 3, eta_v);
    TransferMatrix::unitary(m)
}

/// 0/1 matrix sending mode `j` to mode `perm[j]`.
pub fn permutation_matrix(perm: &[usize]) -> Result<TransferMatrix> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?}"), n));
        }
        seen[p] = true;
    }
    let mut m = DMatrix::zeros(n, n);
    for (j, &p) in perm.iter().enumerate() {
        m[(p, j)] = re(1.0);
    }
    TransferMatrix::unitary(m)
}

/// Block-diagonal concatenation. The result is flagged unitary iff every
/// block is.
pub fn direct_sum(blocks: &[TransferMatrix]) -> TransferMatrix {
    let dim = blocks.iter().map(TransferMatrix::dim).sum();
    let mut m = DMatrix::zeros(dim, dim);
    let mut offset = 0;
    for b in blocks {
        let d = b.dim();
        m.view_mut((offset, offset), (d, d)).copy_from(b.entries());
        offset += d;
    }
    if blocks.iter().all(TransferMatrix::is_unitary) {
        TransferMatrix::unitary(m).expect("direct sum of unitaries is unitary")
    } else {
        TransferMatrix::general(m).expect("square by construction")
    }
}

/// Entrywise mean `M_N = (1/N) Σ_k U_k`. The unitarity flag is recomputed,
/// so it is set only when the copies happen to average to a unitary.
pub fn effective_average(copies: &[TransferMatrix]) -> Result<TransferMatrix> {
    let first = copies.first().ok_or(Error::Empty("matrices to average"))?;
    let dim = first.dim();
    let mut sum: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    for c in copies {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.dim(),
            });
        }
        sum += c.entries();
    }
    TransferMatrix::checked(sum / re(copies.len() as f64))
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> TransferMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            re(1.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    TransferMatrix::unitary(q).expect("QR factor is unitary")
}
