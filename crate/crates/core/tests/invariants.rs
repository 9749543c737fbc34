use gspin_core::coherence::{evolve_density_matrix, population_transfer, CoherenceParams, DriveParams};
use gspin_core::linalg::{expm, min_eigenvalue, Mat3c, C64};
use gspin_core::photodynamics::{mixed_decay_rates, rate_matrix, MixedDecay, RateParams};
use gspin_core::spin_model::{
    build_hamiltonian, eigen_spectrum, enumerate_orientations, field_in_defect_frame, group_by_field, Transition, ZfsParams,
};
use nalgebra::{Matrix5, Vector3, Vector5};
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Vector3<f64>> {
    (-80.0..80.0f64, -80.0..80.0f64, -80.0..80.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn transition() -> impl Strategy<Value = Transition> {
    prop_oneof![Just(Transition::PlusZero), Just(Transition::MinusZero), Just(Transition::PlusMinus)]
}

fn rk4(a: &Matrix5<f64>, x: Vector5<f64>, t: f64, steps: usize) -> Vector5<f64> {
    let h = t / steps as f64;
    let mut x = x;
    for _ in 0..steps {
        let k1 = a * x;
        let k2 = a * (x + k1 * (h / 2.0));
        let k3 = a * (x + k2 * (h / 2.0));
        let k4 = a * (x + k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_trace_is_field_independent_and_overlaps_doubly_stochastic(b in field(), o in 0usize..12) {
        let orient = enumerate_orientations()[o].clone();
        let h = build_hamiltonian(&ZfsParams::G_CENTER, &field_in_defect_frame(&b, &orient));
        let s = eigen_spectrum(&h).unwrap();
        prop_assert!((s.energies.iter().sum::<f64>() - 2.0 * ZfsParams::G_CENTER.d).abs() < 1e-9);
        prop_assert!(s.energies[0] <= s.energies[1] && s.energies[1] <= s.energies[2]);
        for i in 0..3 {
            prop_assert!((s.zero_field_overlaps.row(i).sum() - 1.0).abs() < 1e-9);
            prop_assert!((s.zero_field_overlaps.column(i).sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dressed_rates_keep_the_trace(b in field(), o in 0usize..12) {
        let rates = RateParams::G_CENTER;
        let m = mixed_decay_rates(&ZfsParams::G_CENTER, &b, &enumerate_orientations()[o], &rates).unwrap();
        let total: f64 = rates.intrinsic_rates().iter().sum();
        prop_assert!((m.rates.iter().sum::<f64>() - total).abs() < 1e-9 * total);
        let (lo, hi) = (1.0 / rates.tau_plus, 1.0 / rates.tau_0);
        prop_assert!(m.rates.iter().all(|g| *g >= lo - 1e-12 && *g <= hi + 1e-12));
    }

    #[test]
    fn rate_propagator_conserves_and_stays_positive(b in field(), power in 0.0..2000.0f64, t in 0.0..200.0f64) {
        let rates = RateParams::G_CENTER;
        let m = mixed_decay_rates(&ZfsParams::G_CENTER, &b, &enumerate_orientations()[0], &rates).unwrap();
        let p = expm(&(rate_matrix(&rates, &m, power).unwrap() * t)).unwrap();
        for j in 0..5 {
            prop_assert!((p.column(j).sum() - 1.0).abs() < 1e-9);
            prop_assert!(p.column(j).iter().all(|v| *v > -1e-12));
        }
    }

    #[test]
    fn density_matrix_stays_physical(
        target in transition(),
        detuning in -50.0..50.0f64,
        rabi in 0.0..40.0f64,
        phase in 0.0..6.3f64,
        t in 0.0..20.0f64,
        w in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
        coherence in (-0.3..0.3f64, -0.3..0.3f64),
    ) {
        // Diagonal mixture plus a small coherence, kept PSD by construction.
        let n = w.0 + w.1 + w.2 + 1e-3;
        let (a, b, c) = (w.0 / n, w.1 / n, w.2 / n);
        let z = C64::new(coherence.0, coherence.1) * (a * b).sqrt();
        let rho = Mat3c::new(
            C64::new(a, 0.0), z, C64::new(0.0, 0.0),
            z.conj(), C64::new(b, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(c, 0.0),
        );
        let drive = DriveParams { frequency: 700.0, rabi_rate: rabi, phase, target };
        let out = evolve_density_matrix(&rho, &drive, detuning, &RateParams::G_CENTER, &CoherenceParams::G_CENTER, t).unwrap();
        prop_assert!(min_eigenvalue(&out.rho) > -1e-9);
        prop_assert!((out.trace() + out.leaked - 1.0).abs() < 1e-9);
        prop_assert!(out.trace() <= a + b + c + 1e-9);
        prop_assert!(out.leaked >= -1e-12);
    }

    #[test]
    fn transfer_matrix_is_substochastic(target in transition(), detuning in -30.0..30.0f64, rabi in 0.0..40.0f64, t in 0.0..5.0f64) {
        let drive = DriveParams { frequency: 700.0, rabi_rate: rabi, phase: 0.0, target };
        let m = population_transfer(&drive, detuning, &RateParams::G_CENTER, &CoherenceParams::G_CENTER, t).unwrap();
        for j in 0..3 {
            let s = m.column(j).sum();
            prop_assert!(s <= 1.0 + 1e-9 && s > 0.0);
            prop_assert!(m.column(j).iter().all(|v| *v > -1e-12));
        }
    }

    #[test]
    fn families_partition_the_orientations(dir in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)) {
        let d = Vector3::new(dir.0, dir.1, dir.2);
        prop_assume!(d.norm() > 1e-3);
        let fams = group_by_field(&enumerate_orientations(), &(d / d.norm())).unwrap();
        let mut seen = [false; 12];
        for f in &fams {
            prop_assert_eq!(f.members.len(), f.multiplicity);
            for &m in &f.members {
                prop_assert!(!seen[m]);
                seen[m] = true;
            }
        }
        prop_assert!(seen.iter().all(|s| *s));
    }
}

#[test]
fn rate_propagator_matches_rk4() {
    let rates = RateParams::G_CENTER;
    for (mixed, power, t) in [
        (MixedDecay::zero_field(&rates), 10.0, 1.0),
        (MixedDecay::complete_mixing(&rates), 0.0, 40.0),
        (MixedDecay::zero_field(&rates), 500.0, 0.3),
    ] {
        let a = rate_matrix(&rates, &mixed, power).unwrap();
        for start in 0..5 {
            let x0 = Vector5::from_fn(|i, _| if i == start { 1.0 } else { 0.0 });
            let exact = expm(&(a * t)).unwrap() * x0;
            // Step small against the fastest rate (1/τ_e = 200 /µs, plus pumping).
            let steps = (t * (200.0 + rates.pump_coeff * power) * 20.0).ceil() as usize;
            let reference = rk4(&a, x0, t, steps.max(100));
            for i in 0..5 {
                let scale = reference.amax().max(1e-12);
                assert!((exact[i] - reference[i]).abs() <= 1e-6 * scale, "{i}: {} vs {}", exact[i], reference[i]);
            }
        }
    }
}
