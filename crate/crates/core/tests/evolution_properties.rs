use avgfusion::fock::{apply_transfer, inner_product, tensor};
use avgfusion::interferometry::{direct_sum, effective_average, random_unitary};
use avgfusion::metrics::{fidelity, trace_distance};
use avgfusion::network::build_averaged_network;
use avgfusion::{Complex64, FockKet, StateVec, TransferMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unitary(dim: usize, seed: u64) -> TransferMatrix {
    random_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Permanent by Ryser's formula.
fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u32..(1 << n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for row in m {
            let s: Complex64 = (0..n)
                .filter(|c| subset >> c & 1 == 1)
                .map(|c| row[c])
                .sum();
            prod *= s;
        }
        let sign = if (n - subset.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        total += prod * sign;
    }
    total
}

fn mode_list(occ: &[u32]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
        .collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn compositions(photons: u32, modes: usize) -> Vec<Vec<u32>> {
    if modes == 1 {
        return vec![vec![photons]];
    }
    (0..=photons)
        .flat_map(|k| {
            compositions(photons - k, modes - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, k);
                    rest
                })
        })
        .collect()
}

/// `⟨out| U |in⟩ = Per(U[out modes, in modes]) / √(Π in! Π out!)`.
fn permanent_amplitude(t: &TransferMatrix, input: &[u32], output: &[u32]) -> Complex64 {
    let rows = mode_list(output);
    let cols = mode_list(input);
    let sub: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| t.get(r, c)).collect())
        .collect();
    let norm: f64 = input.iter().chain(output).map(|&n| factorial(n)).product();
    permanent(&sub) / norm.sqrt()
}

fn ket_strategy() -> impl Strategy<Value = Vec<u32>> {
    (2usize..=4)
        .prop_flat_map(|d| prop::collection::vec(0u32..=2, d))
        .prop_filter("one to four photons", |v| {
            (1..=4).contains(&v.iter().sum::<u32>())
        })
}

fn superposition(modes: usize, terms: &[(Vec<u32>, f64, f64)]) -> StateVec {
    StateVec::from_terms(
        modes,
        terms
            .iter()
            .map(|(k, re, im)| (FockKet::new(k.clone()), Complex64::new(*re, *im))),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_permanent_oracle(input in ket_strategy(), seed in any::<u64>()) {
        let d = input.len();
        let t = unitary(d, seed);
        let out = apply_transfer(&t, &StateVec::basis(FockKet::new(input.clone()))).unwrap();
        let photons = input.iter().sum();
        for o in compositions(photons, d) {
            let expected = permanent_amplitude(&t, &input, &o);
            let got = out.amplitude(&FockKet::new(o.clone()));
            prop_assert!((expected - got).norm() < 1e-10, "{:?}: {} vs {}", o, got, expected);
        }
    }

    #[test]
    fn composition_and_norm(input in ket_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = input.len();
        let (a, b) = (unitary(d, s1), unitary(d, s2));
        let s = StateVec::basis(FockKet::new(input));
        let stepwise = apply_transfer(&a, &apply_transfer(&b, &s).unwrap()).unwrap();
        let product = apply_transfer(&a.mul(&b).unwrap(), &s).unwrap();
        prop_assert!(stepwise.max_abs_diff(&product).unwrap() < 1e-10);
        prop_assert!((stepwise.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_and_photon_conserving(
        k1 in prop::collection::vec(0u32..=1, 4),
        k2 in prop::collection::vec(0u32..=1, 4),
        c1 in (-1.0f64..1.0, -1.0f64..1.0),
        c2 in (-1.0f64..1.0, -1.0f64..1.0),
        seed in any::<u64>(),
    ) {
        prop_assume!(k1.iter().sum::<u32>() == k2.iter().sum::<u32>() && k1 != k2);
        prop_assume!(k1.iter().sum::<u32>() > 0);
        let t = unitary(4, seed);
        let s = superposition(4, &[(k1.clone(), c1.0, c1.1), (k2.clone(), c2.0, c2.1)]);
        let whole = apply_transfer(&t, &s).unwrap();
        let parts = apply_transfer(&t, &superposition(4, &[(k1.clone(), c1.0, c1.1)]))
            .unwrap()
            .add(&apply_transfer(&t, &superposition(4, &[(k2, c2.0, c2.1)])).unwrap())
            .unwrap();
        prop_assert!(whole.max_abs_diff(&parts).unwrap() < 1e-10);
        prop_assert_eq!(whole.photon_number(), Some(k1.iter().sum()));
        prop_assert!((whole.norm_sq() - s.norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn inner_products_preserved(input in ket_strategy(), other in ket_strategy(), seed in any::<u64>()) {
        prop_assume!(input.len() == other.len());
        let t = unitary(input.len(), seed);
        let a = StateVec::basis(FockKet::new(input));
        let b = StateVec::basis(FockKet::new(other));
        let before = inner_product(&a, &b).unwrap();
        let after = inner_product(&apply_transfer(&t, &a).unwrap(), &apply_transfer(&t, &b).unwrap()).unwrap();
        prop_assert!((before - after).norm() < 1e-10);
    }

    #[test]
    fn independent_blocks_factorise(k1 in prop::collection::vec(0u32..=1, 2), k2 in prop::collection::vec(0u32..=1, 2), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (unitary(2, s1), unitary(2, s2));
        let x = StateVec::basis(FockKet::new(k1));
        let y = StateVec::basis(FockKet::new(k2));
        let joint = apply_transfer(&direct_sum(&[a.clone(), b.clone()]), &tensor(&x, &y)).unwrap();
        let separate = tensor(&apply_transfer(&a, &x).unwrap(), &apply_transfer(&b, &y).unwrap());
        prop_assert!(joint.max_abs_diff(&separate).unwrap() < 1e-10);
    }

    #[test]
    fn fidelity_bounded_by_norm(input in ket_strategy(), seed in any::<u64>(), scale in 0.0f64..1.0) {
        let d = input.len();
        let s = apply_transfer(&unitary(d, seed), &StateVec::basis(FockKet::new(input.clone())))
            .unwrap()
            .scaled(Complex64::new(scale, 0.0));
        let target = StateVec::basis(FockKet::new(input));
        prop_assert!(fidelity(&s, &target).unwrap() <= s.norm_sq() + 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(d in 2usize..6, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (unitary(d, s1), unitary(d, s2), unitary(d, s3));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn network_realises_the_mean(n in 2usize..4, dim in 2usize..4, seed in any::<u64>(), input_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let copies: Vec<TransferMatrix> = (0..n).map(|_| random_unitary(dim, &mut rng)).collect();
        let net = build_averaged_network(&copies, 1).unwrap();
        let photons: Vec<u32> = (0..=dim).map(|i| ((input_seed >> i) & 1) as u32).collect();
        let input = StateVec::basis(FockKet::new(photons));
        let via_network = net.run_postselected(&input).unwrap();
        let mean = direct_sum(&[effective_average(&copies).unwrap(), TransferMatrix::identity(1)]);
        let via_mean = apply_transfer(&mean, &input).unwrap();
        prop_assert!(via_network.max_abs_diff(&via_mean).unwrap() < 1e-10);
    }
}

#[test]
fn permanent_of_known_matrices() {
    let one = Complex64::new(1.0, 0.0);
    let ones = vec![vec![one; 3]; 3];
    assert!((permanent(&ones) - Complex64::new(6.0, 0.0)).norm() < 1e-12);
    let m = vec![
        vec![one, Complex64::new(2.0, 0.0)],
        vec![Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)],
    ];
    assert!((permanent(&m) - Complex64::new(10.0, 0.0)).norm() < 1e-12);
    assert_eq!(compositions(2, 3).len(), 6);
}
