//! Property tests for the structural invariants of the library: identities
//! that must hold for every input, checked on randomized draws.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ionholo::effective_sim::propagate;
use ionholo::full_sim::SystemParams;
use ionholo::gate_targets::{
    bright_dark, controlled_sigma, operation_counts, qubit_index_to_chain, Axis, GateSpec,
};
use ionholo::pulse_compiler::{
    compile, couplings_from_lasers, export_schedule, realize_lasers, realize_schedule,
};
use ionholo::quantum_core::{
    embed, expm, hermiticity_defect, kron, max_abs, max_abs_diff, partial_trace_mode,
    unitarity_defect, HilbertLayout, Operator, C64, LVL_1,
};

fn random_matrix(seed: u64, dim: usize) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Operator::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_hermitian(seed: u64, dim: usize) -> Operator {
    let m = random_matrix(seed, dim);
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn arb_axis() -> impl Strategy<Value = Axis> {
    (1e-3..(std::f64::consts::PI - 1e-3), 0.0..std::f64::consts::TAU)
        .prop_map(|(theta, phi)| Axis::new(theta, phi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, dc in 2usize..4) {
        let a = random_matrix(seed, da);
        let b = random_matrix(seed ^ 0x9e37, db);
        let c = random_matrix(seed ^ 0x85eb, dc);
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&left, &right) <= 1e-14);
    }

    #[test]
    fn embeddings_on_disjoint_ions_commute(seed in any::<u64>(), num_ions in 2usize..4, i in 0usize..4, j in 0usize..4) {
        let i = i % num_ions;
        let j = j % num_ions;
        prop_assume!(i != j);
        let layout = HilbertLayout::ions_only(num_ions);
        let a = embed(&random_matrix(seed, 3), &[i], &layout).unwrap();
        let b = embed(&random_matrix(seed ^ 0xabcd, 3), &[j], &layout).unwrap();
        prop_assert!(max_abs_diff(&(&a * &b), &(&b * &a)) <= 1e-12);
    }

    #[test]
    fn matrix_exponential_is_a_semigroup(seed in any::<u64>(), dim in 2usize..8, t1 in -1.0..1.0f64, t2 in -1.0..1.0f64) {
        let h = random_hermitian(seed, dim);
        let joint = expm(&h, t1 + t2).unwrap();
        let split = expm(&h, t1).unwrap() * expm(&h, t2).unwrap();
        prop_assert!(max_abs_diff(&joint, &split) <= 1e-9);
    }

    #[test]
    fn mode_trace_is_linear_and_trace_preserving(seed in any::<u64>(), cutoff in 1usize..3, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let layout = HilbertLayout::with_mode(2, cutoff);
        let alpha = C64::new(re, im);
        let r1 = random_matrix(seed, layout.dim());
        let r2 = random_matrix(seed ^ 0x5a5a, layout.dim());
        let lhs = partial_trace_mode(&(&r1 + &r2 * alpha), &layout).unwrap();
        let rhs = partial_trace_mode(&r1, &layout).unwrap()
            + partial_trace_mode(&r2, &layout).unwrap() * alpha;
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-12);
        let full_trace: C64 = (0..r1.nrows()).map(|k| r1[(k, k)]).sum();
        let reduced = partial_trace_mode(&r1, &layout).unwrap();
        let red_trace: C64 = (0..reduced.nrows()).map(|k| reduced[(k, k)]).sum();
        prop_assert!((full_trace - red_trace).norm() <= 1e-12);
    }

    #[test]
    fn controlled_sigma_is_a_hermitian_involution(n in 1usize..5, axis in arb_axis()) {
        let spec = GateSpec::new(n, axis).unwrap();
        let u = controlled_sigma(&spec);
        prop_assert!(unitarity_defect(&u) <= 1e-14);
        prop_assert!(hermiticity_defect(&u) <= 1e-14);
        let square = &u * &u;
        let eye = Operator::identity(u.nrows(), u.ncols());
        prop_assert!(max_abs_diff(&square, &eye) <= 1e-14);
    }

    #[test]
    fn controlled_sigma_fixes_unset_controls(n in 1usize..5, axis in arb_axis()) {
        let spec = GateSpec::new(n, axis).unwrap();
        let u = controlled_sigma(&spec);
        let dim = 1usize << spec.num_qubits();
        for q in 0..dim {
            if q >> 1 == (1usize << n) - 1 {
                continue;
            }
            for r in 0..dim {
                let expect = if r == q { 1.0 } else { 0.0 };
                prop_assert!((u[(r, q)] - C64::new(expect, 0.0)).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn bright_dark_are_orthonormal_and_confined(n in 1usize..5, axis in arb_axis()) {
        let spec = GateSpec::new(n, axis).unwrap();
        let (d, b) = bright_dark(&spec);
        let dd: C64 = d.iter().map(|z| z.conj() * z).sum();
        let bb: C64 = b.iter().map(|z| z.conj() * z).sum();
        let db: C64 = d.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((dd.re - 1.0).abs() <= 1e-12 && dd.im.abs() <= 1e-15);
        prop_assert!((bb.re - 1.0).abs() <= 1e-12 && bb.im.abs() <= 1e-15);
        prop_assert!(db.norm() <= 1e-12);
        // Confined to span{|1...10>, |1...11>}: all other components
        // exactly zero.
        let layout = HilbertLayout::ions_only(spec.num_qubits());
        let mut levels = vec![LVL_1; spec.num_qubits()];
        levels[n] = 0;
        let k10 = layout.basis_index(&levels, 0);
        levels[n] = 1;
        let k11 = layout.basis_index(&levels, 0);
        for k in 0..d.len() {
            if k != k10 && k != k11 {
                prop_assert!(d[k].norm() == 0.0 && b[k].norm() == 0.0);
            }
        }
    }

    #[test]
    fn holonomic_count_beats_decomposition(n in 3usize..31) {
        let (holo, dec) = operation_counts(n).unwrap();
        prop_assert!(holo < dec);
        prop_assert_eq!(holo, 2 * n as u64 - 1);
        prop_assert_eq!(dec, (1u64 << (n + 1)) - 3);
    }

    #[test]
    fn compiled_schedules_have_the_advertised_shape(n in 1usize..7, axis in arb_axis(), drive in 50.0..5000.0f64) {
        let spec = GateSpec::new(n, axis).unwrap();
        let schedule = compile(&spec, drive).unwrap();
        prop_assert_eq!(schedule.intervals.len(), 2 * n - 1);
        let mut total = 0.0;
        for (k, iv) in schedule.intervals.iter().enumerate() {
            prop_assert_eq!(iv.index, k + 1);
            let expected_area = if n == 1 || k + 1 == n {
                std::f64::consts::PI
            } else {
                std::f64::consts::FRAC_PI_2
            };
            prop_assert!((iv.pulse_area - expected_area).abs() <= 1e-12);
            let norm = iv.coupling_norm();
            prop_assert!(norm > 0.0);
            prop_assert!((iv.duration - iv.pulse_area / norm).abs() <= 1e-15 * iv.duration);
            total += iv.duration;
        }
        prop_assert!((schedule.total_duration() - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn coupling_amplitudes_satisfy_the_area_normalization(n in 1usize..6, axis in arb_axis(), drive in 50.0..5000.0f64) {
        let spec = GateSpec::new(n, axis).unwrap();
        let schedule = compile(&spec, drive).unwrap();
        // The gate-defining interval carries the two-coupling split with
        // |amp_0|^2 + |amp_1|^2 = drive^2.
        let middle = &schedule.intervals[n - 1];
        let sum: f64 = middle.couplings.iter().map(|c| c.amplitude.norm_sqr()).sum();
        prop_assert!((sum - drive * drive).abs() <= 1e-9 * drive * drive);
    }

    #[test]
    fn laser_realization_round_trips(n in 1usize..3, axis in arb_axis()) {
        let params = SystemParams::ca40_defaults();
        let spec = GateSpec::new(n, axis).unwrap();
        let schedule = compile(&spec, params.effective_drive()).unwrap();
        for iv in &schedule.intervals {
            let real = realize_lasers(iv, &params).unwrap();
            let kinds: Vec<_> = iv.couplings.iter().map(|c| c.kind).collect();
            let rebuilt =
                couplings_from_lasers(&real.pulses, params.eta, params.delta, &kinds).unwrap();
            prop_assert_eq!(rebuilt.len(), iv.couplings.len());
            for (orig, back) in iv.couplings.iter().zip(rebuilt.iter()) {
                prop_assert_eq!(orig.kind, back.kind);
                let scale = orig.amplitude.norm().max(1e-30);
                prop_assert!((orig.amplitude - back.amplitude).norm() <= 1e-12 * scale);
            }
            // The reported detuning ratio matches the emitted pulses and
            // drives the warning flag.
            let max_rabi =
                real.pulses.iter().map(|p| p.rabi.abs()).fold(0.0f64, f64::max);
            prop_assert!(
                (real.detuning_ratio - params.delta / (params.eta * max_rabi)).abs()
                    <= 1e-9 * real.detuning_ratio
            );
            prop_assert_eq!(real.weak_detuning_warning(), real.detuning_ratio < 10.0);
        }
    }

    #[test]
    fn schedule_export_is_deterministic(n in 1usize..4, axis in arb_axis()) {
        let params = SystemParams::ca40_defaults();
        let spec = GateSpec::new(n, axis).unwrap();
        let mut schedule = compile(&spec, params.effective_drive()).unwrap();
        realize_schedule(&mut schedule, &params).unwrap();
        let once = export_schedule(&schedule, Some(&params));
        let twice = export_schedule(&schedule, Some(&params));
        prop_assert_eq!(&once, &twice);
        let mut again = compile(&spec, params.effective_drive()).unwrap();
        realize_schedule(&mut again, &params).unwrap();
        prop_assert_eq!(once, export_schedule(&again, Some(&params)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn effective_propagation_is_unitary(n in 1usize..4, axis in arb_axis()) {
        let spec = GateSpec::new(n, axis).unwrap();
        let schedule = compile(&spec, SystemParams::ca40_defaults().effective_drive()).unwrap();
        let u = propagate(&schedule).unwrap();
        prop_assert!(unitarity_defect(&u) <= 1e-10);
    }

    #[test]
    fn gate_restriction_matches_qubit_indexing(n in 1usize..4, axis in arb_axis()) {
        let spec = GateSpec::new(n, axis).unwrap();
        let gate = controlled_sigma(&spec);
        let qdim = 1usize << spec.num_qubits();
        let chain_dim = 3usize.pow(spec.num_qubits() as u32);
        let mut embedded = Operator::identity(chain_dim, chain_dim);
        for x in 0..qdim {
            for y in 0..qdim {
                let (cx, cy) = (
                    qubit_index_to_chain(x, spec.num_qubits()),
                    qubit_index_to_chain(y, spec.num_qubits()),
                );
                embedded[(cx, cy)] = gate[(x, y)];
            }
        }
        prop_assert!(max_abs(&embedded) >= 1.0 - 1e-12);
        let restricted =
            ionholo::gate_targets::restrict_to_computational(&embedded, spec.num_qubits())
                .unwrap();
        prop_assert!(max_abs_diff(&restricted, &gate) <= 1e-15);
    }
}
