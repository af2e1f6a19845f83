use gcs_core::algebra::{
    hamiltonian_matrix, su11_generators, su2_generators, Coefficients, OperatorMatrix, RepLabel, Spin,
};
use gcs_core::flow::{
    kahler_flow_check, su11_flow, un1_flow, su2_flow, ChartPolicy, ComplexSignal, KahlerGroup,
    MatrixSignal, MobiusElement, Signal, SpherePoint, StepControls, TimeGrid, Track,
};
use gcs_core::observables::{mean_value, su11_means_closed, uncertainty_product};
use gcs_core::oracle::{schrodinger_evolve, EvolveOptions};
use gcs_core::states::{glauber_cs, su11_cs, su2_cs, su2_cs_at, un1_cs, Truncation};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn disc(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn plane(max: f64) -> impl Strategy<Value = Complex64> {
    (-max..max, -max..max).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn su2_algebra_is_exact(twice in 1u32..24) {
        let spin = Spin::from_twice(twice).unwrap();
        let g = su2_generators(spin);
        let j = spin.value();
        let two_j0 = g.diagonal.scale(Complex64::new(2.0, 0.0));
        prop_assert!(g.raising.commutator(&g.lowering).max_abs_diff(&two_j0) < 1e-11);
        prop_assert!(g.diagonal.commutator(&g.raising).max_abs_diff(&g.raising) < 1e-11);
        let cas = OperatorMatrix::identity(spin.dim()).scale(Complex64::new(j * (j + 1.0), 0.0));
        prop_assert!(g.compact_casimir().max_abs_diff(&cas) < 1e-10);
    }

    #[test]
    fn su11_casimir_on_untruncated_rows(k in 0.05f64..5.0, trunc in 8usize..60) {
        let g = su11_generators(k, trunc).unwrap();
        let target = OperatorMatrix::identity(trunc).scale(Complex64::new(k * (k - 1.0), 0.0));
        let scale = (k + trunc as f64).powi(2);
        prop_assert!(g.noncompact_casimir().max_abs_diff_on(&target, trunc - 1) < 1e-13 * scale);
        let minus = g.diagonal.scale(Complex64::new(-2.0, 0.0));
        prop_assert!(g.raising.commutator(&g.lowering).max_abs_diff_on(&minus, trunc - 1) < 1e-13 * scale);
    }

    #[test]
    fn hamiltonians_are_hermitian(h0 in -5.0f64..5.0, h in plane(3.0), twice in 1u32..12, k in 0.1f64..3.0) {
        let su2 = hamiltonian_matrix(RepLabel::su2(twice as f64 / 2.0).unwrap(), &Coefficients::Su2 { h0, h }).unwrap();
        prop_assert!(su2.is_hermitian(1e-12));
        let su11 = hamiltonian_matrix(RepLabel::su11(k, 30).unwrap(), &Coefficients::Su11 { h0, h }).unwrap();
        prop_assert!(su11.is_hermitian(1e-12));
    }

    #[test]
    fn disc_flow_stays_in_disc(z0 in disc(0.9), h0 in 0.5f64..3.0, h in plane(0.2)) {
        // |h| < h0/2 keeps the Hamiltonian elliptic, so orbits are bounded
        let grid = TimeGrid::uniform(5.0, 50).unwrap();
        let traj = su11_flow(z0, &Signal::Constant(h0), &ComplexSignal::constant(h), &grid, &StepControls::default()).unwrap();
        prop_assert!(traj.states.iter().all(|z| z.norm() < 1.0));
    }

    #[test]
    fn kahler_residual_does_not_see_the_weight(z in disc(0.8), h0 in -2.0f64..2.0, h in plane(1.0)) {
        let a = kahler_flow_check(KahlerGroup::Su11 { k: 0.25 }, z, h0, h);
        let b = kahler_flow_check(KahlerGroup::Su11 { k: 2.75 }, z, h0, h);
        prop_assert!((a.kahler_side - b.kahler_side).norm() < 1e-6);
        let a = kahler_flow_check(KahlerGroup::Su2 { j: 0.5 }, z, h0, h);
        let b = kahler_flow_check(KahlerGroup::Su2 { j: 4.0 }, z, h0, h);
        prop_assert!((a.kahler_side - b.kahler_side).norm() < 1e-6);
    }

    #[test]
    fn mobius_group_structure(a1 in plane(2.0), c1 in plane(0.5), a2 in plane(2.0), c2 in plane(0.5), a3 in plane(2.0), z in disc(0.9)) {
        prop_assume!(a1.norm() > c1.norm() + 0.1 && a2.norm() > c2.norm() + 0.1 && a3.norm() > 0.1);
        let m1 = MobiusElement::new(a1, c1).unwrap();
        let m2 = MobiusElement::new(a2, c2).unwrap();
        let m3 = MobiusElement::new(a3, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!((m1.normalized().determinant() - 1.0).abs() < 1e-12);
        let left = m1.compose(&m2).compose(&m3);
        let right = m1.compose(&m2.compose(&m3));
        prop_assert!((left.a - right.a).norm() + (left.c - right.c).norm() < 1e-12 * left.a.norm().max(1.0));
        let w = m2.apply(m1.apply(z).unwrap()).unwrap();
        prop_assert!((w - m2.compose(&m1).apply(z).unwrap()).norm() < 1e-12);
        let back = m1.inverse().apply(m1.apply(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn projective_flow_reduces_to_the_sphere(z0 in plane(1.5), h00 in -1.0f64..1.0, h11 in -1.0f64..1.0, off in plane(0.8)) {
        // i w' = h w with w = (1, z) matches the spin flow with h0 = h11 - h00, h = h10
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(h00, 0.0);
        m[(1, 1)] = Complex64::new(h11, 0.0);
        m[(1, 0)] = off;
        m[(0, 1)] = off.conj();
        let grid = TimeGrid::uniform(2.0, 20).unwrap();
        let controls = StepControls::default();
        let Ok(lifted) = un1_flow(&[z0], &MatrixSignal::constant(&m).unwrap(), &grid, &controls) else {
            return Ok(());
        };
        let sphere = su2_flow(SpherePoint::north(z0), &Signal::Constant(h11 - h00), &ComplexSignal::constant(off.conj()), &grid, &controls, ChartPolicy::default()).unwrap();
        for (a, b) in lifted.states.iter().zip(&sphere.states) {
            let (za, zb) = (a[0], b.z());
            prop_assert!((za - zb).norm() < 1e-9 * za.norm().max(1.0).powi(2));
        }
    }

    #[test]
    fn states_are_normalized(z in disc(0.85), w in plane(2.0), k in 0.25f64..3.0, twice in 1u32..16) {
        let s = su11_cs(k, z, Truncation::default()).unwrap();
        prop_assert!((s.norm_sqr() + s.tail_mass() - 1.0).abs() < 1e-10);
        let spin = Spin::from_twice(twice).unwrap();
        prop_assert!((su2_cs(spin, w).norm_sqr() - 1.0).abs() < 1e-12);
        let g = glauber_cs(w, Truncation::default()).unwrap();
        prop_assert!((g.norm_sqr() + g.tail_mass() - 1.0).abs() < 1e-10);
        prop_assert!((un1_cs(2, 3, &[w, z]).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_modulus_is_bounded(y in proptest::collection::vec(plane(1.5), 2), z in proptest::collection::vec(plane(1.5), 2), m in 1usize..5) {
        let a = un1_cs(2, m, &y).unwrap();
        let b = un1_cs(2, m, &z).unwrap();
        let o = a.overlap(&b).unwrap().norm();
        prop_assert!(o <= 1.0 + 1e-12);
        prop_assert!((a.overlap(&a).unwrap().norm() - 1.0).abs() < 1e-12);
        let gap: f64 = y.iter().zip(&z).map(|(p, q)| (p - q).norm()).sum();
        if gap > 1e-3 {
            prop_assert!(o < 1.0);
        }
    }

    #[test]
    fn spin_charts_agree(w in plane(3.0), twice in 1u32..10) {
        prop_assume!(w.norm() > 0.05);
        let spin = Spin::from_twice(twice).unwrap();
        let north = su2_cs(spin, w);
        let south = su2_cs_at(spin, &SpherePoint::north(w).flipped());
        prop_assert!(north.fidelity(&south).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn closed_means_match_contraction(z in disc(0.8), k in 0.25f64..3.0) {
        let s = su11_cs(k, z, Truncation::default()).unwrap();
        let g = su11_generators(k, s.dim()).unwrap();
        let closed = su11_means_closed(k, z).unwrap();
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1.0);
        prop_assert!(rel(mean_value(&s, &g.diagonal).unwrap(), Complex64::new(closed.zero, 0.0)) < 1e-8);
        prop_assert!(rel(mean_value(&s, &g.raising).unwrap(), closed.plus) < 1e-8);
        prop_assert!(rel(mean_value(&s, &g.lowering).unwrap(), closed.minus) < 1e-8);
    }

    #[test]
    fn uncertainty_floor_and_real_axis_minimum(z in disc(0.95), k in 0.1f64..4.0) {
        let floor = 4.0 * k * k;
        let p = uncertainty_product(k, z).unwrap();
        prop_assert!(p >= floor * (1.0 - 1e-12));
        prop_assert!((uncertainty_product(k, Complex64::new(z.norm(), 0.0)).unwrap() - floor).abs() < 1e-10 * floor);
        if z.im.abs() > 1e-3 {
            prop_assert!(p > floor);
        }
    }

    #[test]
    fn evolution_is_unitary(h0 in -2.0f64..2.0, h in plane(1.0), z0 in plane(1.0), twice in 1u32..8) {
        let spin = Spin::from_twice(twice).unwrap();
        let track = Track::Su2 { h0: Signal::Constant(h0), h: ComplexSignal::constant(h) };
        let grid = TimeGrid::uniform(3.0, 10).unwrap();
        let opts = EvolveOptions { segments: 64, ..EvolveOptions::default() };
        let r = schrodinger_evolve(RepLabel::Su2 { spin }, &track, &su2_cs(spin, z0), &grid, &opts).unwrap();
        prop_assert!(r.norm_drift < 1e-10);
    }
}
