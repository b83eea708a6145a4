//! Property-based invariants across the library.

use hblab_core::evolution::{self, EvolveOptions};
use hblab_core::io::{InstanceSpec, ScheduleSpec};
use hblab_core::linalg::{self, C64};
use hblab_core::operators::{
    self, spectral_decompose, HermitianOperator, SearchInstance, DEGENERACY_TOL,
};
use hblab_core::schedules::{
    double_step_schedule, linear_schedule, piecewise_table, smooth_bump_schedule, Schedule,
};
use ndarray::prelude::*;
use proptest::prelude::*;

fn any_schedule() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        Just(linear_schedule()),
        (-1.0..-0.01f64).prop_map(|e| double_step_schedule(e).unwrap()),
        Just(smooth_bump_schedule()),
        (0.05..0.95f64, 0.05..0.95f64).prop_map(|(s, f)| {
            let mut pts = vec![(0.0, 0.0)];
            let s = (s * 1000.0).round() / 1000.0;
            let f = (f * 1000.0).round() / 1000.0;
            pts.push((s.clamp(0.001, 0.999), f));
            pts.push((1.0, 1.0));
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            piecewise_table(pts).unwrap()
        }),
    ]
}

fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((dim, dim), |_| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let ah = linalg::conj_t(&a.view());
    HermitianOperator::new((&a + &ah) / C64::new(2.0, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schedules_monotone_and_bounded(sched in any_schedule(), raw in 0.0..1.0f64) {
        let s1 = raw * 0.7;
        let s2 = s1 + (1.0 - s1) * 0.3;
        let f1 = sched.value(s1);
        let f2 = sched.value(s2);
        prop_assert!(f1 <= f2 + 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f1));
        prop_assert!(sched.value(0.0) == 0.0);
        prop_assert!(sched.value(1.0) == 1.0);
    }

    #[test]
    fn interpolation_stays_hermitian(f in 0.0..=1.0f64, seed in 0u64..50) {
        let marked = vec![(seed % 7) as usize, 7 + (seed % 5) as usize];
        let inst = SearchInstance::gus(16, &marked).unwrap();
        let h = operators::interpolate(&inst, f).unwrap();
        prop_assert!(linalg::hermitian_deviation(&h.view()) <= 1e-12);
        let norm = h.operator_norm().unwrap();
        prop_assert!(norm <= 1.0 + 1e-9);
    }

    #[test]
    fn spectral_reassembly_random(dim in 2usize..12, seed in 0u64..1000) {
        let h = random_hermitian(dim, seed);
        let spec = spectral_decompose(&h, DEGENERACY_TOL).unwrap();
        let rebuilt = spec.reassemble().unwrap();
        let dev = (&rebuilt - h.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        prop_assert!(dev < 1e-9, "reassembly deviation {}", dev);
    }

    #[test]
    fn projector_product_norm_symmetry(n_pow in 3u32..7, seed in 0u64..100) {
        let n = 1usize << n_pow;
        let m = 1 + (seed as usize % (n / 2));
        let marked: Vec<usize> = (0..m).map(|i| (i * 7 + seed as usize) % n).collect();
        let inst = SearchInstance::gus(n, &marked);
        prop_assume!(inst.is_ok());
        let inst = inst.unwrap();
        let p_i = inst.spectral_initial.projector_matrix(0).unwrap();
        let q_f = inst.spectral_final.projector_matrix(0).unwrap();
        let a = linalg::sigma_max(&p_i.dot(&q_f).view()).unwrap();
        let b = linalg::sigma_max(&q_f.dot(&p_i).view()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn evolution_preserves_norm(
        sched in any_schedule(),
        tau in 0.0..30.0f64,
        seed in 0u64..20,
    ) {
        let n = 24;
        let marked = vec![(seed % 24) as usize];
        let inst = SearchInstance::gus(n, &marked).unwrap();
        let r = evolution::evolve_reduced(
            &inst,
            &sched,
            tau,
            &EvolveOptions::default().no_validation(),
        )
        .unwrap();
        prop_assert!(r.norm_drift <= 1e-8, "norm drift {}", r.norm_drift);
        // success² + (mass outside P_F)² accounts for the whole state
        let outside = 1.0 - r.success_probability;
        prop_assert!((r.success_probability + outside - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn survival_amplitude_is_unimodular_mixture(t in -50.0..50.0f64, seed in 0u64..30) {
        let n = 32;
        let m = 1 + (seed as usize % 8);
        let marked: Vec<usize> = (0..m).collect();
        let inst = SearchInstance::gus(n, &marked).unwrap();
        let c = evolution::survival_amplitude(&inst, t);
        prop_assert!(c.norm() <= 1.0 + 1e-12);
        let c0 = evolution::survival_amplitude(&inst, 0.0);
        prop_assert!((c0 - C64::new(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn counting_kernel_decay(omega in 0.2..3.0f64, n_pow in 6u32..11) {
        let n = 1usize << n_pow;
        let plan = hblab_core::counting::make_plan(n, 1.0).unwrap();
        let k = hblab_core::counting::kernel_selectivity(omega, &plan).norm();
        let tail = {
            let mut lw = -plan.p + (plan.l as f64) * plan.p.ln();
            for j in 1..=plan.l {
                lw -= (j as f64).ln();
            }
            2.0 * lw.exp()
        };
        let bound = (-plan.p * (1.0 - omega.cos())).exp() + tail;
        prop_assert!(k <= bound + 1e-13, "kernel {} > bound {}", k, bound);
    }

    #[test]
    fn instance_spec_roundtrip(dim_pow in 2u32..7, seed in 0u64..200) {
        let n = 1usize << dim_pow;
        let m = 1 + (seed as usize % (n - 1)).min(3);
        let marked: Vec<usize> = (0..m).map(|i| (i * 5 + seed as usize) % n).collect();
        let mut dedup = marked.clone();
        dedup.sort_unstable();
        dedup.dedup();
        prop_assume!(dedup.len() < n);
        let spec = InstanceSpec::grover(n, dedup.clone());
        let json = serde_json::to_string(&spec).unwrap();
        let back: InstanceSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.dim, n);
        prop_assert_eq!(back.marked.as_ref().unwrap(), &dedup);
        let a = spec.build().unwrap();
        let b = back.build().unwrap();
        prop_assert_eq!(a.overlaps.delta2, b.overlaps.delta2);
    }

    #[test]
    fn schedule_spec_roundtrip(e_f in -1.0..-0.05f64) {
        let spec = ScheduleSpec {
            kind: "double_step".into(),
            e_f: Some(e_f),
            points: None,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ScheduleSpec = serde_json::from_str(&json).unwrap();
        let s1 = spec.build().unwrap();
        let s2 = back.build().unwrap();
        prop_assert_eq!(s1.plateau(), s2.plateau());
    }
}

#[test]
fn float_roundtrip_is_bit_exact() {
    // serde_json's default parser is off by 1 ulp on values like this one;
    // the float_roundtrip feature keeps JSON records lossless.
    let e = -0.943_689_687_597_484_5_f64;
    let spec = ScheduleSpec {
        kind: "double_step".into(),
        e_f: Some(e),
        points: None,
    };
    let json = serde_json::to_string(&spec).unwrap();
    let back: ScheduleSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back.e_f.unwrap().to_bits(), e.to_bits());
}

#[test]
fn spectral_reassembly_dim_64() {
    let h = random_hermitian(64, 4242);
    let spec = spectral_decompose(&h, DEGENERACY_TOL).unwrap();
    let rebuilt = spec.reassemble().unwrap();
    let dev = (&rebuilt - h.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    assert!(dev < 1e-9, "reassembly deviation {dev}");
}
