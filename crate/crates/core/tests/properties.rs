//! Property-based invariants over randomized states and operators.

use proptest::prelude::*;

use inconc::concentration::{delta_p, ky_fan, noneq_measure};
use inconc::linalg::{ComplexMatrix, Subsystem};
use inconc::oracle::{haar_unitary, random_hermitian, seeded_rng};
use inconc::randomness::guess_prob;
use inconc::states::{BipartiteState, DensityMatrix};

/// Probability vector of length `d`, bounded away from the all-zero draw.
fn spectrum_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, d).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    })
}

fn sorted_desc(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_round_trips(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = seeded_rng(seed);
        let h = random_hermitian(n, &mut rng);
        let spectrum = h.hermitian_eig().expect("convergence");
        prop_assert!(spectrum.reconstruct().max_abs_diff(&h) < 1e-10);
        let sorted = spectrum.eigenvalues();
        prop_assert!(sorted.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(
        sa in spectrum_strategy(3),
        sb in spectrum_strategy(3),
        weight in 0.0f64..1.0,
    ) {
        let rho = DensityMatrix::from_eigenvalues(&sa).unwrap();
        let eta = DensityMatrix::from_eigenvalues(&sb).unwrap();
        let x = rho.matrix().kron(eta.matrix());
        let y = eta.matrix().kron(rho.matrix());
        let blend = x.scale(weight).add(&y.scale(1.0 - weight));
        let traced = blend.partial_trace(3, 3, Subsystem::A).unwrap();
        let parts = x
            .partial_trace(3, 3, Subsystem::A)
            .unwrap()
            .scale(weight)
            .add(&y.partial_trace(3, 3, Subsystem::A).unwrap().scale(1.0 - weight));
        prop_assert!(traced.max_abs_diff(&parts) < 1e-12);
        prop_assert!((traced.trace().re - blend.trace().re).abs() < 1e-12);
    }

    #[test]
    fn product_spectrum_is_the_sorted_products(
        sa in spectrum_strategy(2),
        sb in spectrum_strategy(4),
    ) {
        let rho = DensityMatrix::from_eigenvalues(&sa).unwrap();
        let eta = DensityMatrix::from_eigenvalues(&sb).unwrap();
        let joint = BipartiteState::product(&rho, &eta);
        let mut products = Vec::new();
        for &x in rho.eigenvalues() {
            for &y in eta.eigenvalues() {
                products.push(x * y);
            }
        }
        let products = sorted_desc(products);
        for (got, want) in joint.joint().eigenvalues().iter().zip(products.iter()) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_sqrt_squares_back(spectrum in spectrum_strategy(4), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let u = haar_unitary(4, &mut rng);
        let dense = ComplexMatrix::from_diag(&spectrum).conjugate_by(u.matrix());
        let root = dense.psd_sqrt().expect("state is positive");
        prop_assert!(root.mul(&root).max_abs_diff(&dense) < 1e-10);
    }

    #[test]
    fn gain_lies_between_zero_and_the_measure(
        d in 2usize..7,
        seed in any::<u64>(),
    ) {
        let mut rng = seeded_rng(seed);
        let spectrum = inconc::oracle::random_spectrum(d, &mut rng);
        let rho = DensityMatrix::from_eigenvalues(&spectrum).unwrap();
        let gain = delta_p(&rho);
        prop_assert!(gain >= 0.0);
        prop_assert!(gain <= noneq_measure(&rho) + 1e-9);
    }

    #[test]
    fn guessing_probability_is_basis_independent_and_bounded(
        spectrum in spectrum_strategy(4),
        seed in any::<u64>(),
    ) {
        let diagonal = DensityMatrix::from_eigenvalues(&spectrum).unwrap();
        let mut rng = seeded_rng(seed);
        let u = haar_unitary(4, &mut rng);
        let rotated = DensityMatrix::new(
            ComplexMatrix::from_diag(&spectrum).conjugate_by(u.matrix()),
        )
        .unwrap();
        let p_diag = guess_prob(&diagonal);
        let p_rot = guess_prob(&rotated);
        prop_assert!((p_diag - p_rot).abs() < 1e-9);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p_diag));
    }

    #[test]
    fn gain_routes_agree_on_dense_states(
        spectrum in spectrum_strategy(3),
        seed in any::<u64>(),
    ) {
        let mut rng = seeded_rng(seed);
        let u = haar_unitary(3, &mut rng);
        let rho = DensityMatrix::new(
            ComplexMatrix::from_diag(&spectrum).conjugate_by(u.matrix()),
        )
        .unwrap();
        let joint = rho.matrix().kron(rho.matrix());
        let matrix_route =
            (ky_fan(&joint, 3).unwrap() / rho.max_eigenvalue()).log2().max(0.0);
        prop_assert!((delta_p(&rho) - matrix_route).abs() < 1e-9);
    }

    #[test]
    fn degenerate_qubit_embeddings_always_concentrate(
        p in 0.5f64..0.999,
        d in 3usize..7,
    ) {
        let rho = DensityMatrix::effective_qubit(p, d).unwrap();
        // Rank two leaves four nonzero pair products: at d == 3 the smallest,
        // (1-p)^2, is still excluded; from d == 4 on, all of them fit.
        let expected = if d == 3 { (2.0 - p).log2() } else { -p.log2() };
        prop_assert!((delta_p(&rho) - expected).abs() < 1e-12);
        let qubit = DensityMatrix::effective_qubit(p, 2).unwrap();
        prop_assert_eq!(delta_p(&qubit), 0.0);
    }
}
