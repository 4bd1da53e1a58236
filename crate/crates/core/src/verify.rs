//! Oracle suites that compute the same quantity by two independent routes
//! and report the largest disagreement.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::closed_form::{bsm_fidelity_closed, bsm_psuccess_closed, ReflectivityDraw};
use crate::detection::{bsm_pattern_probabilities, fusion_outcomes, pattern_support, BsmPattern};
use crate::fock::apply_transfer;
use crate::interferometry::{bsm_matrix, direct_sum, fusion_gate};
use crate::metrics::{
    bell_state, fidelity, fusion_even_target, fusion_odd_target, two_bell_pairs, BellLabel,
};
use crate::network::build_averaged_network;
use crate::sweep::{bsm_metrics, sample_reflectivity};
use crate::{Result, StateVec, TransferMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Random instances per copy count.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Structural checks (support sets, ordering) that a deviation cannot express.
    pub exact_ok: bool,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.exact_ok && self.max_deviation < self.tolerance
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{}: {verdict} (max dev {:.3e} < {:.0e})",
            self.name, self.max_deviation, self.tolerance
        )?;
        if !self.exact_ok {
            f.write_str(" [support mismatch]")?;
        }
        Ok(())
    }
}

fn suite_rng(seed: u64, suite: &str, index: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"avgfusion/verify/v1");
    h.update(seed.to_le_bytes());
    h.update((suite.len() as u64).to_le_bytes());
    h.update(suite.as_bytes());
    h.update(index.to_le_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// Vacuum-post-selected network output against evolution under
/// `M_N ⊕ I` for random fusion-gate copies at `m = 0.3`, `N = 2..4`.
pub fn mn_equivalence(opts: &VerifyOptions) -> Result<SuiteReport> {
    let input = two_bell_pairs();
    let mut dev: f64 = 0.0;
    for n in 2..=4usize {
        for s in 0..opts.samples {
            let mut rng = suite_rng(opts.seed, "mn", (n * 1_000_000 + s) as u64);
            let copies = (0..n)
                .map(|_| {
                    let x = sample_reflectivity(&mut rng, 0.3)?;
                    let y = sample_reflectivity(&mut rng, 0.3)?;
                    fusion_gate(x, y)
                })
                .collect::<Result<Vec<_>>>()?;
            let net = build_averaged_network(&copies, 4)?;
            let via_network = net.run_postselected(&input)?;
            let via_mean = apply_transfer(&net.effective_transfer()?, &input)?;
            dev = dev.max(via_network.max_abs_diff(&via_mean)?);
        }
    }
    Ok(SuiteReport {
        name: "M_N-equivalence",
        max_deviation: dev,
        tolerance: 1e-10,
        exact_ok: true,
    })
}

/// Simulated BSM `F` and `P_success` against the analytic forms, `N = 2..5`,
/// reflectivities uniform on `[0, 1]`.
pub fn closed_form_agreement(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut dev: f64 = 0.0;
    for n in 2..=5usize {
        for s in 0..opts.samples {
            let mut rng = suite_rng(opts.seed, "closed-form", (n * 1_000_000 + s) as u64);
            let h: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let sim = bsm_metrics(&h, &v)?;
            let draw = ReflectivityDraw::new(h, v)?;
            dev = dev
                .max((sim.f - bsm_fidelity_closed(&draw)).abs())
                .max((sim.p_success - bsm_psuccess_closed(&draw)).abs());
        }
    }
    Ok(SuiteReport {
        name: "closed-form",
        max_deviation: dev,
        tolerance: 1e-10,
        exact_ok: true,
    })
}

fn perfect_copies(n: usize) -> Result<Vec<TransferMatrix>> {
    (0..n).map(|_| fusion_gate(0.5, 0.5)).collect()
}

/// Perfect fusion outcomes for `N = 1..3` (each pattern `1/8`, residual equal
/// to its target Bell state) and the single-gate parity law on a 10×10 grid.
pub fn fusion_table(_opts: &VerifyOptions) -> Result<SuiteReport> {
    let input = two_bell_pairs();
    let mut dev: f64 = 0.0;
    for n in 1..=3 {
        let net = build_averaged_network(&perfect_copies(n)?, 4)?;
        let kept = net.run_postselected(&input)?;
        for o in fusion_outcomes(&kept, [0, 1, 2, 3])? {
            let target = if o.label.is_even() {
                fusion_even_target()
            } else {
                fusion_odd_target()
            };
            dev = dev
                .max((o.probability - 0.125).abs())
                .max((fidelity(&o.residual, &target)? - o.probability).abs());
        }
    }
    for i in 0..10 {
        for j in 0..10 {
            let ex = 0.05 + 0.1 * i as f64;
            let ey = 0.05 + 0.1 * j as f64;
            let gate = direct_sum(&[fusion_gate(ex, ey)?, TransferMatrix::identity(4)]);
            let out = apply_transfer(&gate, &input)?;
            let p: Vec<f64> = fusion_outcomes(&out, [0, 1, 2, 3])?
                .iter()
                .map(|o| o.probability)
                .collect();
            dev = dev
                .max((p.iter().sum::<f64>() - 0.5).abs())
                .max((p[0] - p[3]).abs())
                .max((p[1] - p[2]).abs());
        }
    }
    Ok(SuiteReport {
        name: "fusion-outcomes",
        max_deviation: dev,
        tolerance: 1e-12,
        exact_ok: true,
    })
}

/// Reference BSM pattern support of a Bell state, for balanced splitters or
/// for equal but unbalanced ones.
pub fn reference_support(label: BellLabel, balanced: bool) -> BTreeSet<BsmPattern> {
    use BsmPattern::*;
    let items: &[BsmPattern] = match (label, balanced) {
        (BellLabel::PsiPlus, true) => &[AB, CD],
        (BellLabel::PsiPlus, false) => &[AB, CD, AD, BC],
        (BellLabel::PsiMinus, _) => &[AD, BC],
        (BellLabel::PhiPlus | BellLabel::PhiMinus, true) => &[AA, BB, CC, DD],
        (BellLabel::PhiPlus | BellLabel::PhiMinus, false) => &[AA, BB, CC, DD, AC, BD],
    };
    items.iter().copied().collect()
}

/// Simulated pattern support against the reference table at `η = 1/2` and
/// `η = 0.3`; the deviation is the largest probability in a blank cell.
pub fn bsm_table(_opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut dev: f64 = 0.0;
    let mut exact_ok = true;
    for (eta, balanced) in [(0.5, true), (0.3, false)] {
        let t = bsm_matrix(eta, eta)?;
        for label in BellLabel::ALL {
            let expected = reference_support(label, balanced);
            exact_ok &= pattern_support(label, eta, eta)? == expected;
            let out = apply_transfer(&t, &bell_state(label))?;
            for (p, prob) in bsm_pattern_probabilities(&out)? {
                if !expected.contains(&p) {
                    dev = dev.max(prob);
                }
            }
        }
    }
    Ok(SuiteReport {
        name: "bsm-support",
        max_deviation: dev,
        tolerance: 1e-12,
        exact_ok,
    })
}

/// Images of the four Bell states under a balanced BSM.
pub fn balanced_bsm_images() -> [(BellLabel, StateVec); 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let terms = |t: &[(&[u32], f64)]| StateVec::from_real_terms(4, t).expect("four-mode kets");
    [
        (
            BellLabel::PsiPlus,
            terms(&[(&[1, 1, 0, 0], -r), (&[0, 0, 1, 1], r)]),
        ),
        (
            BellLabel::PsiMinus,
            terms(&[(&[1, 0, 0, 1], r), (&[0, 1, 1, 0], -r)]),
        ),
        (
            BellLabel::PhiPlus,
            terms(&[
                (&[2, 0, 0, 0], -0.5),
                (&[0, 2, 0, 0], -0.5),
                (&[0, 0, 2, 0], 0.5),
                (&[0, 0, 0, 2], 0.5),
            ]),
        ),
        (
            BellLabel::PhiMinus,
            terms(&[
                (&[2, 0, 0, 0], -0.5),
                (&[0, 2, 0, 0], 0.5),
                (&[0, 0, 2, 0], 0.5),
                (&[0, 0, 0, 2], -0.5),
            ]),
        ),
    ]
}

/// Balanced BSM images up to a global phase, and `ψ-` unchanged (up to
/// phase) under `η^H = η^V` for random `η`.
pub fn bsm_state_maps(opts: &VerifyOptions) -> Result<SuiteReport> {
    let t = bsm_matrix(0.5, 0.5)?;
    let mut dev: f64 = 0.0;
    for (label, image) in balanced_bsm_images() {
        let out = apply_transfer(&t, &bell_state(label))?;
        dev = dev.max(out.max_abs_diff_up_to_phase(&image)?);
    }
    let psi_minus = bell_state(BellLabel::PsiMinus);
    let mut rng = suite_rng(opts.seed, "psi-minus", 0);
    for _ in 0..opts.samples.max(20) {
        let eta: f64 = rng.random();
        let out = apply_transfer(&bsm_matrix(eta, eta)?, &psi_minus)?;
        dev = dev.max(out.max_abs_diff_up_to_phase(&psi_minus)?);
    }
    Ok(SuiteReport {
        name: "bsm-state-maps",
        max_deviation: dev,
        tolerance: 1e-12,
        exact_ok: true,
    })
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        mn_equivalence(opts)?,
        closed_form_agreement(opts)?,
        fusion_table(opts)?,
        bsm_table(opts)?,
        bsm_state_maps(opts)?,
    ])
}
