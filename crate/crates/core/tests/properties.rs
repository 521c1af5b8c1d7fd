use std::sync::Arc;

use num_complex::Complex64;
use offdiag_holonomy::holonomy::*;
use offdiag_holonomy::interferometer::{beam_splitter, on_path, random_admissible_v, Protocol, Strategy as Route, TwoPathState};
use offdiag_holonomy::models::*;
use offdiag_holonomy::numkernel::*;
use offdiag_holonomy::random::{ginibre, haar_unitary, hermitian, seeded};
use offdiag_holonomy::subspaces::*;
use offdiag_holonomy::{CurveFamily, HolonomyStatus, StatusTolerance};
use proptest::prelude::*;
use proptest::sample::select;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    select(vec![vec![1, 1, 2], vec![2, 2], vec![1, 2, 1], vec![1, 1, 1], vec![2, 1]])
}

fn open_curve(seed: u64, dims: &[usize], strength: f64, intervals: usize) -> CurveFamily {
    let g = UnitaryPathGenerator::random_open(&mut seeded(seed), dims, strength).unwrap();
    CurveFamily::from_generator(Arc::new(g), intervals).unwrap()
}

/// `n × n` matrix of rank `r` with singular values spread over `[0.1, 10]`.
fn low_rank(seed: u64, n: usize, r: usize) -> ComplexMatrix {
    let mut rng = seeded(seed);
    ginibre(&mut rng, n, r) * ginibre(&mut rng, r, n)
}

fn block_diagonal(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        out.view_mut((o, o), b.shape()).copy_from(b);
        o += b.nrows();
    }
    out
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn phi_map_is_partial_isometry(seed in any::<u64>(), n in 1usize..6, r in 0usize..6) {
        let r = r.min(n);
        let z = low_rank(seed, n, r);
        let w = phi_map(&z, RankTolerance::default()).unwrap();
        prop_assert!(max_abs(&(&w * w.adjoint() * &w - &w)) < 1e-12);
        let rank = numerical_rank(&z, RankTolerance::default()).unwrap();
        prop_assert_eq!(rank, r);
        prop_assert_eq!(numerical_rank(&w, RankTolerance::default()).unwrap(), r);
    }

    #[test]
    fn svd_reconstructs_nearly_degenerate_differences(seed in any::<u64>(), n in 2usize..6, angle in 1e-4f64..0.1) {
        // differences of nearby projectors have paired singular values
        let mut rng = seeded(seed);
        let u = haar_unitary(&mut rng, n);
        let v = expm_hermitian(&hermitian(&mut rng, n, 1.0), angle).unwrap() * &u;
        let r = 1 + (seed as usize) % (n - 1);
        let p = |w: &ComplexMatrix| w.columns(0, r) * w.columns(0, r).adjoint();
        let d = p(&v) - p(&u);
        let dec = svd(&d).unwrap();
        let scale = dec.singular_values[0];
        prop_assert!(max_abs(&(dec.recompose_with(&dec.singular_values) - &d)) < 1e-12 * scale);
        prop_assert!(isometry_defect(&dec.u) < 1e-13 && isometry_defect(&dec.v) < 1e-13);
        let (eig, _) = hermitian_eigen(&(d.adjoint() * &d)).unwrap();
        prop_assert!((eig[n - 1].sqrt() - scale).abs() < 1e-12 * scale.max(1e-3));
    }

    #[test]
    fn phi_map_of_invertible_is_unitary(seed in any::<u64>(), n in 1usize..6) {
        let z = ginibre(&mut seeded(seed), n, n);
        let w = phi_map(&z, RankTolerance::default()).unwrap();
        prop_assert!(unitarity_defect(&w).unwrap() < 1e-10);
    }

    #[test]
    fn phi_map_is_unitarily_covariant(seed in any::<u64>(), n in 1usize..6, r in 1usize..6) {
        let r = r.min(n);
        let z = low_rank(seed, n, r);
        let mut rng = seeded(seed ^ 0x5eed);
        let (u, v) = (haar_unitary(&mut rng, n), haar_unitary(&mut rng, n));
        let tol = RankTolerance::default();
        let lhs = phi_map(&(&u * &z * &v), tol).unwrap();
        let rhs = &u * phi_map(&z, tol).unwrap() * &v;
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-9);
        prop_assert_eq!(numerical_rank(&(&u * &z * &v), tol).unwrap(), numerical_rank(&z, tol).unwrap());
    }

    #[test]
    fn projectors_are_gauge_invariant_and_complete(seed in any::<u64>(), dims in dims_strategy()) {
        let curve = open_curve(seed, &dims, 1.0, 20);
        let gauge = GaugeTransform::smooth_random(&curve, &mut seeded(seed.wrapping_add(1)), 2.0);
        let gauged = curve.apply_gauge(&gauge).unwrap();
        for (a, b) in curve.samples().iter().zip(gauged.samples()) {
            prop_assert!(a.completeness_defect() < 1e-10);
            for (p, q) in a.projectors().iter().zip(b.projectors()) {
                prop_assert!(max_abs(&(p - q)) < 1e-12);
            }
        }
    }

    #[test]
    fn refinement_keeps_original_samples(seed in any::<u64>(), dims in dims_strategy()) {
        let curve = open_curve(seed, &dims, 1.0, 40);
        let fine = curve.refine(2).unwrap();
        prop_assert_eq!(fine.intervals(), 80);
        for (j, d) in curve.samples().iter().enumerate() {
            for (p, q) in d.projectors().iter().zip(fine.sample(2 * j).projectors()) {
                prop_assert!(max_abs(&(p - q)) < 1e-12);
            }
        }
        // chord quotients approach max ‖P'‖ from below at second order in h
        prop_assert!(fine.smoothness() <= curve.smoothness() * 1.01);
    }

    #[test]
    fn hamiltonian_clusters_commute_with_h(seed in any::<u64>()) {
        let g = UnitaryPathGenerator::random_open(&mut seeded(seed), &[1, 2, 1], 1.0).unwrap();
        let energies = [-1.0, 0.5, 2.0];
        let h = FnHamiltonian::new(4, move |s| {
            let frames = g.frames_at(s);
            let mut h = ComplexMatrix::zeros(4, 4);
            for (f, e) in frames.iter().zip(energies) {
                h += (f * f.adjoint()).scale(e);
            }
            h
        });
        let h = Arc::new(h);
        let curve = CurveFamily::from_hamiltonian_path(h.clone(), 30, ClusterRule::default()).unwrap();
        prop_assert_eq!(curve.dims(), vec![1, 2, 1]);
        for (s, d) in curve.grid().iter().zip(curve.samples()) {
            let hs = h.hamiltonian_at(*s);
            for p in d.projectors() {
                prop_assert!(max_abs(&commutator(&hs, &p)) < 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn gauge_covariance_of_gamma_and_holonomy(seed in any::<u64>(), dims in dims_strategy()) {
        let curve = open_curve(seed, &dims, 1.2, 100);
        let gauge = GaugeTransform::smooth_random(&curve, &mut seeded(!seed), 1.5);
        let gauged = curve.apply_gauge(&gauge).unwrap();
        let opts = TableOptions {
            transport: TransportOptions { scheme: TransportScheme::Overlap, ..Default::default() },
            ..Default::default()
        };
        let (a, b) = (build_sigma_table_with(&curve, opts).unwrap(), build_sigma_table_with(&gauged, opts).unwrap());
        let eta = dims.len();
        let last = curve.intervals();
        let transport = transport_matrices(&curve, opts.transport).unwrap();
        let transport_g = transport_matrices(&gauged, opts.transport).unwrap();
        for l in 0..eta {
            let law = gauge.at(last, l).adjoint() * &transport[l] * gauge.at(0, l);
            prop_assert!(max_abs(&(&transport_g[l] - law)) < 1e-10);
            for k in 0..eta {
                let ov = curve.start().frame(k).basis().adjoint() * curve.end().frame(l).basis();
                let ov_g = gauged.start().frame(k).basis().adjoint() * gauged.end().frame(l).basis();
                let law = gauge.at(0, k).adjoint() * ov * gauge.at(last, l);
                prop_assert!(max_abs(&(ov_g - law)) < 1e-12);
            }
        }
        let tol = StatusTolerance::default();
        let mut seqs: Vec<Vec<usize>> = (0..eta).map(|l| vec![l]).collect();
        for kappa in 2..=eta {
            seqs.extend(enumerate_strict_sequences(eta, kappa).unwrap());
        }
        for seq in seqs {
            let r = holonomy_of_order(&a, &seq, tol).unwrap();
            let rg = holonomy_of_order(&b, &seq, tol).unwrap();
            let u = gauge.at(0, seq[0]);
            prop_assert!(max_abs(&(&rg.gamma - u.adjoint() * &r.gamma * u)) < 1e-8);
            prop_assert_eq!(r.rank, rg.rank);
            if r.singular_values.iter().all(|&x| !(1e-8..=1e-4).contains(&x)) {
                prop_assert!(max_abs(&(&rg.holonomy - u.adjoint() * &r.holonomy * u)) < 1e-8);
            }
            for (x, y) in r.singular_values.iter().zip(&rg.singular_values) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cyclic_curves_kill_strict_sequences(seed in any::<u64>(), dims in dims_strategy()) {
        let g = UnitaryPathGenerator::random_cyclic(&mut seeded(seed), &dims, 0.8).unwrap();
        let curve = CurveFamily::from_generator(Arc::new(g), 100).unwrap();
        prop_assert!(curve.is_cyclic(1e-10));
        let t = build_sigma_table(&curve).unwrap();
        for l in 0..dims.len() {
            prop_assert!(unitarity_defect(t.block(l, l)).unwrap() < 1e-8);
        }
        for kappa in 2..=dims.len() {
            for seq in enumerate_strict_sequences(dims.len(), kappa).unwrap() {
                prop_assert!(max_abs(&gamma_product(&t, &seq).unwrap()) < 1e-8);
            }
        }
    }

    #[test]
    fn table_structure_on_random_curves(seed in any::<u64>(), dims in dims_strategy()) {
        let curve = open_curve(seed, &dims, 1.5, 100);
        let t = build_sigma_table(&curve).unwrap();
        prop_assert!(t.unitarity_defect() < 1e-8);
        prop_assert!(t.block_identity_defect() < 1e-8);
        let report = rank_budget_report(&t, StatusTolerance::default()).unwrap();
        prop_assert!(report.bounds_hold());
        prop_assert!(report.max_trace_deviation() < 1e-8);
        for kappa in 2..=dims.len() {
            for seq in enumerate_strict_sequences(dims.len(), kappa).unwrap() {
                let r = holonomy_of_order(&t, &seq, StatusTolerance::default()).unwrap();
                let bound = seq.iter().map(|&l| dims[l]).min().unwrap();
                prop_assert!(r.rank <= bound);
                prop_assert_eq!(r.status, HolonomyStatus::from_rank(r.rank, dims[seq[0]]));
            }
        }
    }

    #[test]
    fn abelian_holonomy_is_phase_of_product(seed in any::<u64>()) {
        let curve = open_curve(seed, &[1, 1, 1], 1.0, 100);
        let t = build_sigma_table(&curve).unwrap();
        for kappa in 2..=3 {
            for seq in enumerate_strict_sequences(3, kappa).unwrap() {
                let mut product = Complex64::new(1.0, 0.0);
                for i in 0..kappa {
                    product *= t.block(seq[(i + 1) % kappa], seq[i])[(0, 0)];
                }
                let r = holonomy_of_order(&t, &seq, StatusTolerance::default()).unwrap();
                if product.norm() > 1e-6 {
                    prop_assert!((r.holonomy[(0, 0)] - product / product.norm()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn block_unitary_zero_diagonal_has_nonzero_strict_gamma(
        seed in any::<u64>(),
        dims in select(vec![vec![1, 1, 2], vec![2, 2], vec![1, 2, 1], vec![1, 1, 1], vec![1, 1]]),
    ) {
        // needs n_l ≤ N − n_l for every l
        let u = random_zero_diagonal_unitary(&mut seeded(seed), &dims, 5000).unwrap();
        let t = SigmaTable::from_matrix(dims.clone(), &u).unwrap();
        let seq = nonzero_existence_check(&t, StatusTolerance::default()).unwrap();
        prop_assert!(is_strict(&seq, dims.len()));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn tripod_engine_matches_oracle(seed in any::<u64>()) {
        let path = TripodPath::random_fourier(&mut seeded(seed), 3);
        let t = build_sigma_table(&path.curve(200).unwrap()).unwrap();
        let tol = StatusTolerance::default();
        let oracle = tripod_oracle(&path, tol).unwrap();
        for e in &oracle.entries {
            let r = holonomy_of_order(&t, &e.seq, tol).unwrap();
            prop_assert!(max_abs(&(&r.gamma - &e.gamma)) < 1e-5, "{}", e.name);
            prop_assert_eq!(r.status, e.status);
        }
        let a = oracle.entry(&[PLUS, DARK]).unwrap();
        let b = oracle.entry(&[PLUS, MINUS, DARK]).unwrap();
        prop_assert!(max_abs(&(&a.holonomy + &b.holonomy)) < 1e-12);
    }

    #[test]
    fn dark_diagonal_partial_only_at_quarter_turn(offset in -0.3f64..0.3) {
        let theta = std::f64::consts::FRAC_PI_2 + offset;
        let path = TripodPath::linear(theta, 0.5, 1.0);
        let t = build_sigma_table(&path.curve(100).unwrap()).unwrap();
        let r = holonomy_of_order(&t, &[DARK], StatusTolerance::default()).unwrap();
        let expected = if offset.abs() <= 1e-6 { 1 } else { 2 };
        prop_assert_eq!(r.rank, expected);
    }

    #[test]
    fn interferometer_probability_in_unit_interval(seed in any::<u64>(), dims in dims_strategy()) {
        let curve = open_curve(seed, &dims, 1.0, 60);
        let mut rng = seeded(seed ^ 7);
        let seqs: Vec<Vec<usize>> = (0..dims.len()).map(|l| vec![l]).chain(enumerate_strict_sequences(dims.len(), 2).unwrap()).collect();
        for seq in seqs {
            for strategy in [Route::Adiabatic { phases: vec![0.3; dims.len()] }, Route::Filtering { grid: 20 }] {
                let protocol = Protocol::prepare(&curve, &seq, &strategy).unwrap();
                for _ in 0..3 {
                    let v = random_admissible_v(&curve, &mut rng);
                    let out = protocol.run(&v).unwrap();
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&out.p));
                    prop_assert!(out.cross_check_deviation < 1e-10);
                    prop_assert!(out.surviving_weight <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_path_state_filtering_never_adds_weight(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = seeded(seed);
        let u = haar_unitary(&mut rng, n);
        let p0 = u.columns(0, 1) * u.columns(0, 1).adjoint();
        let mut state = TwoPathState::prepare(&p0);
        state.apply(&beam_splitter(n));
        let mut last = state.trace();
        for k in 0..4 {
            let v = haar_unitary(&mut rng, n);
            let cols = 1 + k % (n - 1);
            let p = v.columns(0, cols) * v.columns(0, cols).adjoint();
            state.apply(&on_path(0, &expm_hermitian(&hermitian(&mut rng, n, 1.0), 1.0).unwrap()));
            state.apply(&block_diagonal(&[p, ComplexMatrix::identity(n, n)]));
            prop_assert!(state.trace() <= last + 1e-12);
            last = state.trace();
            prop_assert!(state.check(1e-10).is_ok());
        }
    }
}
