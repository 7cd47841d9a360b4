use nalgebra::DVector;
use pgst_core::{
    build_sector, evolve_sector, fidelity, find_t_min, propagator, rho_out, ChainSpec, Complex64,
    GridParams, InputState, PgstQuery, Readout,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn single_excitation_sector_matches_propagator() {
    for n in [2usize, 5, 9] {
        let h = build_sector(n, 1).unwrap();
        let spec = ChainSpec::new(n).unwrap();
        for t in [0.0, 2.5, 31.0] {
            let u = propagator(spec, t);
            for j in 1..=n {
                let mut v = DVector::<Complex64>::zeros(n);
                v[j - 1] = Complex64::new(1.0, 0.0);
                let col = evolve_sector(&h, &v, t).unwrap();
                for l in 1..=n {
                    assert!((col[l - 1] - u.get(l, j)).norm() < 1e-11);
                }
            }
        }
    }
}

#[test]
fn sector_evolution_preserves_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (n, r) in [(6usize, 2usize), (8, 3), (10, 4)] {
        let h = build_sector(n, r).unwrap();
        let evolver = h.evolver();
        let mut v = DVector::from_fn(h.dim(), |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        for t in [0.1, 10.0, 1000.0] {
            let w = evolver.evolve(&v, t).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-12, "n={n} r={r} t={t}");
        }
    }
}

#[test]
fn output_state_is_a_density_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let (n, m) = [(4usize, 2usize), (7, 3), (8, 2), (10, 3), (9, 4)][trial % 5];
        let input = InputState::random(m, &mut rng);
        let t = rng.random_range(0.0..200.0);
        let rho = rho_out(n, m, &input, t).unwrap();
        assert!(
            (rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            "trial {trial}"
        );
        assert!(rho.hermiticity_residual() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-10);
        let f = fidelity(&input, &rho, Readout::Raw).unwrap();
        assert!((-1e-12..=1.0 + 1e-10).contains(&f));
        let corrected = fidelity(&input, &rho, Readout::SectorPhase).unwrap();
        assert!(corrected + 1e-12 >= f);
    }
}

#[test]
fn output_fidelity_at_reported_transfer_time() {
    let query = PgstQuery::new(10, 3, 0.1, &GridParams::default()).unwrap();
    let hit = find_t_min(&query).unwrap();
    assert!(hit.found);

    let mut rng = ChaCha8Rng::seed_from_u64(546);
    for _ in 0..10 {
        let input = InputState::random(3, &mut rng);
        let rho = rho_out(10, 3, &input, hit.t_min).unwrap();
        let raw = fidelity(&input, &rho, Readout::Raw).unwrap();
        let single = fidelity(&input, &rho, Readout::SectorPhase).unwrap();
        let parity = fidelity(&input, &rho, Readout::ParitySectorPhase).unwrap();
        assert!(
            parity > 1.0 - 1.5 * query.eps(),
            "parity-corrected {parity}"
        );
        assert!(parity + 1e-12 >= raw);
        assert!(single + 1e-12 >= raw);
    }
}
