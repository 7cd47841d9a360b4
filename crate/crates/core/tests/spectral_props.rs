use nalgebra::DMatrix;
use pgst_core::{
    amplitude, eigensystem, mirror_distance, mirror_fidelities, propagator, ChainSpec, Complex64,
};
use proptest::prelude::*;

fn chain(n: usize) -> ChainSpec {
    ChainSpec::new(n).unwrap()
}

fn hopping(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |a, b| {
        if a.abs_diff(b) == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `exp(-iHt)` by nalgebra's Padé matrix exponential.
fn dense_propagator(n: usize, t: f64) -> DMatrix<Complex64> {
    (hopping(n) * Complex64::new(0.0, -t)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn propagator_is_unitary(n in 1usize..=20, t in 0.0f64..100.0) {
        prop_assert!(propagator(chain(n), t).unitarity_residual() < 1e-12);
    }

    #[test]
    fn propagator_group_property(n in 1usize..=16, t1 in 0.0f64..60.0, t2 in 0.0f64..60.0) {
        let spec = chain(n);
        let lhs = propagator(spec, t1).matrix() * propagator(spec, t2).matrix();
        let rhs = propagator(spec, t1 + t2);
        for (a, b) in lhs.iter().zip(rhs.matrix().iter()) {
            prop_assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn propagator_symmetric_and_centrosymmetric(n in 1usize..=18, t in 0.0f64..100.0) {
        let u = propagator(chain(n), t);
        for l in 1..=n {
            for j in 1..=n {
                prop_assert_eq!(u.get(l, j), u.get(j, l));
                prop_assert!((u.get(l, j).norm() - u.get(n + 1 - l, n + 1 - j).norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_convention_does_not_change_magnitudes(n in 1usize..=15, t in 0.0f64..200.0) {
        let spec = chain(n);
        for j in 1..=n {
            for l in 1..=n {
                let forward = amplitude(spec, j, l, t).unwrap();
                let backward = amplitude(spec, j, l, -t).unwrap();
                prop_assert!((forward - backward.conj()).norm() < 1e-13);
                prop_assert!((forward.norm() - backward.norm()).abs() < 1e-13);
                prop_assert!(forward.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn propagator_matches_amplitude(n in 1usize..=12, t in -50.0f64..50.0) {
        let spec = chain(n);
        let u = propagator(spec, t);
        for l in 1..=n {
            for j in 1..=n {
                prop_assert!((u.get(l, j) - amplitude(spec, j, l, t).unwrap()).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn closed_form_matches_dense_matrix_exponential() {
    for n in [2usize, 3, 5, 8, 11] {
        for t in [0.0, 0.4, std::f64::consts::PI / 2f64.sqrt(), 9.75] {
            let dense = dense_propagator(n, t);
            let closed = propagator(chain(n), t);
            for l in 1..=n {
                for j in 1..=n {
                    let gap = (dense[(l - 1, j - 1)] - closed.get(l, j)).norm();
                    assert!(gap < 1e-11, "n={n} t={t} ({l},{j}): {gap}");
                }
            }
        }
    }
    // the 3-site end-to-end amplitude at the perfect-transfer time
    let a = amplitude(chain(3), 1, 3, std::f64::consts::PI / 2f64.sqrt()).unwrap();
    assert!((a - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn eigensystem_diagonalises_hopping_matrix() {
    for n in 1..=12 {
        let eig = eigensystem(chain(n));
        let h = hopping(n);
        for k in 1..=n {
            let v: Vec<f64> = (1..=n).map(|j| eig.component(k, j)).collect();
            for a in 0..n {
                let hv: f64 = (0..n).map(|b| h[(a, b)].re * v[b]).sum();
                assert!((hv - eig.eigenvalues()[k - 1] * v[a]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn perfect_transfer_fidelities() {
    let two = mirror_fidelities(chain(2), 1, std::f64::consts::FRAC_PI_2).unwrap();
    assert!((two[0] - 1.0).abs() < 1e-12);
    let three = mirror_fidelities(chain(3), 1, std::f64::consts::PI / 2f64.sqrt()).unwrap();
    assert!((three[0] - 1.0).abs() < 1e-12);
}

#[test]
fn ten_site_chain_at_reported_transfer_time() {
    let f = mirror_fidelities(chain(10), 3, 546.0).unwrap();
    assert_eq!(f.len(), 3);
    assert!(f.iter().all(|&x| x > 0.9), "{f:?}");
}

/// `U` and `F` commute and `F v_k = (-1)^{k+1} v_k`, so
/// `‖U - γF‖ = max_k |e^{-iλ_k t} - γ(-1)^{k+1}|`; minimise that over a fine
/// γ grid independently of the library's search.
fn mirror_distance_by_modes(n: usize, t: f64) -> f64 {
    let eig = eigensystem(chain(n));
    let grid = 200_000;
    (0..grid)
        .map(|i| {
            let gamma =
                Complex64::from_polar(1.0, i as f64 * 2.0 * std::f64::consts::PI / grid as f64);
            eig.eigenvalues()
                .iter()
                .enumerate()
                .map(|(k, &lambda)| {
                    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                    (Complex64::from_polar(1.0, -lambda * t) - gamma * parity).norm()
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn mirror_distance_agrees_with_mode_decomposition() {
    for (n, t) in [(2usize, 0.3), (4, 1.7), (5, 12.0), (7, 3.3), (10, 546.0)] {
        let md = mirror_distance(chain(n), t);
        let oracle = mirror_distance_by_modes(n, t);
        assert!(
            (md.distance - oracle).abs() < 1e-4,
            "n={n} t={t}: {} vs {oracle}",
            md.distance
        );
        assert!(md.distance <= oracle + 1e-9);
        assert!(md.frobenius_bound + 1e-12 >= md.distance);
        assert!((md.gamma.norm() - 1.0).abs() < 1e-12);
        assert!((0.0..=2.0).contains(&md.distance));
    }
}

#[test]
fn mirror_distance_vanishes_at_perfect_transfer() {
    assert!(mirror_distance(chain(2), std::f64::consts::FRAC_PI_2).distance < 1e-10);
    assert!(mirror_distance(chain(3), std::f64::consts::PI / 2f64.sqrt()).distance < 1e-10);
}
