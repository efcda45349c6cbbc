use std::sync::OnceLock;

use proptest::prelude::*;

use stratflow_core::basis::{extended_leray, frame, hdot, wave_matrix, C4};
use stratflow_core::dynamics::{
    integrate, random_initial_state, reconstruct_physical, theta_from_w, w_from_theta, Model,
    RandomInit, ScalarField, SimulationConfig, System,
};
use stratflow_core::interaction::{
    apply_bbar, apply_btilde, build_triad_table, AmplitudeState, SigmaPairs, TriadTable,
};
use stratflow_core::lattice::{
    build_truncated_set, dilated_geometry, DilationFactors, FrequencyIndex, LatticeKind,
};
use stratflow_core::resonance::{omega_sigma, resonance_discriminant, SigmaTriple};
use stratflow_core::Complex64;

struct Fixture {
    model: Model,
    table: TriadTable,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let d = DilationFactors::from_fractions(2, 1, 3, 1).unwrap();
        let model = Model::new(build_truncated_set(LatticeKind::Cubic, 2, d).unwrap()).unwrap();
        let table = build_triad_table(&model.set, &model.basis).unwrap();
        Fixture { model, table }
    })
}

fn index(r: i32) -> impl Strategy<Value = FrequencyIndex> {
    (-r..=r, -r..=r, -r..=r)
        .prop_filter("nonzero", |&(a, b, c)| (a, b, c) != (0, 0, 0))
        .prop_map(|(a, b, c)| FrequencyIndex::new(a, b, c))
}

fn dilation() -> impl Strategy<Value = DilationFactors> {
    (1i64..8, 1i64..8, 1i64..8, 1i64..8)
        .prop_map(|(a, b, c, d)| DilationFactors::from_fractions(a, b, c, d).unwrap())
}

fn amplitudes(len: usize) -> impl Strategy<Value = AmplitudeState> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3 * len).prop_map(move |v| {
        let modes = v
            .chunks(3)
            .map(|c| std::array::from_fn(|j| Complex64::new(c[j].0, c[j].1)))
            .collect();
        AmplitudeState::from_modes(0.0, modes)
    })
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

fn flip(n: FrequencyIndex, s: [i32; 3]) -> FrequencyIndex {
    FrequencyIndex::new(s[0] * n.n1, s[1] * n.n2, s[2] * n.n3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_closure(m in 1u32..5, pick in any::<proptest::sample::Index>()) {
        let set = build_truncated_set(LatticeKind::Cubic, m, DilationFactors::periodic()).unwrap();
        let i = pick.index(set.len());
        let j = set.index_of(-set.member(i)).unwrap();
        prop_assert_eq!(set.negated(i), j);
    }

    #[test]
    fn geometry_ignores_common_factors(n in index(4), (a, b, c, d) in (1i64..8, 1i64..8, 1i64..8, 1i64..8), k in 2i64..5) {
        let x = dilated_geometry(n, &DilationFactors::from_fractions(a, b, c, d).unwrap()).unwrap();
        let y = dilated_geometry(n, &DilationFactors::from_fractions(k * a, k * b, k * c, k * d).unwrap()).unwrap();
        prop_assert_eq!(x.hsq.to_rational(), y.hsq.to_rational());
        prop_assert_eq!(x.fsq.to_rational(), y.fsq.to_rational());
    }

    #[test]
    fn projector_is_an_orthogonal_projection(n in index(4), d in dilation()) {
        let p = extended_leray(n, &d).unwrap();
        let pp = p.matmul(&p);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((p.entries[i][j] - p.entries[j][i]).abs() <= 1e-12);
                prop_assert!((pp.entries[i][j] - p.entries[i][j]).abs() <= 1e-12);
            }
        }
        let f = frame(n, &d).unwrap();
        // q_div is (ñ, 0)/|ñ|
        let pw = p.apply(&f.qdiv);
        prop_assert!(pw.iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn frame_is_orthonormal_and_diagonalizes(n in index(6), d in dilation()) {
        let f = frame(n, &d).unwrap();
        let q: [&C4; 4] = [&f.qm, &f.q0, &f.qp, &f.qdiv];
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((hdot(q[a], q[b]) - want).norm() <= 1e-12);
            }
        }
        let s = wave_matrix(n, &d).unwrap();
        for sigma in [-1i8, 0, 1] {
            let v = f.q(sigma);
            let sv = s.apply(v);
            let lam = Complex64::new(0.0, sigma as f64 * f.omega);
            prop_assert!((0..4).all(|j| (sv[j] - lam * v[j]).norm() <= 1e-12));
        }
    }

    #[test]
    fn discriminant_symmetries(k in index(3), m in index(3), s in prop::array::uniform3(prop::sample::select(vec![-1, 1])), lam in 2i32..4, d in dilation()) {
        let n = k + m;
        prop_assume!(!n.is_zero());
        let q = resonance_discriminant(n, k, m, &d).unwrap().to_rational();
        let swapped = resonance_discriminant(n, m, k, &d).unwrap().to_rational();
        prop_assert_eq!(&q, &swapped);
        let flipped = resonance_discriminant(flip(n, s), flip(k, s), flip(m, s), &d).unwrap().to_rational();
        prop_assert_eq!(&q, &flipped);
        let sc = |x: FrequencyIndex| FrequencyIndex::new(lam * x.n1, lam * x.n2, lam * x.n3);
        let scaled = resonance_discriminant(sc(n), sc(k), sc(m), &d).unwrap().to_rational();
        if let (Some(q), Some(qs)) = (q, scaled) {
            let f = num_rational::BigRational::from_integer(num_bigint::BigInt::from(lam).pow(12));
            prop_assert_eq!(qs, q * f);
        }
    }

    #[test]
    fn discriminant_zero_iff_wave_resonance(k in index(3), m in index(3), d in dilation()) {
        let n = k + m;
        prop_assume!(!n.is_zero());
        let q = resonance_discriminant(n, k, m, &d).unwrap();
        let min = SigmaTriple::all()
            .filter(|s| s.is_wave_triple())
            .map(|s| omega_sigma(n, k, m, s, &d).unwrap().abs())
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(q.is_zero(), min < 1e-9);
    }

    #[test]
    fn resonant_and_oscillatory_forms_are_bilinear(
        g in amplitudes(124), h in amplitudes(124), x in amplitudes(124),
        a in -2.0f64..2.0, b in -2.0f64..2.0, nt in 0.0f64..50.0, s0 in -1i8..=1,
    ) {
        let f = fixture();
        let (a, b) = (Complex64::new(a, 0.3), Complex64::new(b, -0.7));
        let comb = g.scaled(0.0).axpy(a, &g).axpy(b, &x);
        let left = apply_bbar(&f.table, &comb, &h, s0, SigmaPairs::ALL);
        let p = apply_bbar(&f.table, &g, &h, s0, SigmaPairs::ALL);
        let q = apply_bbar(&f.table, &x, &h, s0, SigmaPairs::ALL);
        let want: Vec<Complex64> = p.iter().zip(&q).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(close(&left, &want, 1e-12 * (1.0 + want.iter().map(|z| z.norm()).fold(0.0, f64::max))));
        let right = apply_btilde(&f.table, nt, &h, &comb, s0, SigmaPairs::ALL);
        let p = apply_btilde(&f.table, nt, &h, &g, s0, SigmaPairs::ALL);
        let q = apply_btilde(&f.table, nt, &h, &x, s0, SigmaPairs::ALL);
        let want: Vec<Complex64> = p.iter().zip(&q).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(close(&right, &want, 1e-12 * (1.0 + want.iter().map(|z| z.norm()).fold(0.0, f64::max))));
    }

    #[test]
    fn random_data_is_normalized_and_scales(seed in any::<u64>(), amp in 0.1f64..10.0) {
        let f = fixture();
        let one = random_initial_state(&f.model, &RandomInit::new(seed, 2.0, 1.0)).unwrap();
        let big = random_initial_state(&f.model, &RandomInit::new(seed, 2.0, amp)).unwrap();
        prop_assert!((one.l1_norm() - 1.0).abs() <= 1e-12);
        prop_assert!(big.sub(&one.scaled(amp)).l1_norm() <= 1e-12 * amp);
    }

    #[test]
    fn theta_and_w_round_trip(vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 124)) {
        let f = fixture();
        let values = vals
            .iter()
            .zip(&f.model.basis.hnorm)
            .map(|(&(re, im), &h)| if h == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(re, im) })
            .collect();
        let th = ScalarField { t: 0.0, values };
        let w = w_from_theta(&f.model.basis, &th).unwrap();
        for (x, k) in w.values.iter().zip(&f.model.basis.wavevectors) {
            prop_assert!((k[0] * x[0] + k[1] * x[1]).norm() <= 1e-12);
        }
        let back = theta_from_w(&f.model.basis, &w).unwrap();
        prop_assert!(close(&back.values, &th.values, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reconstructed_fields_stay_real(seed in any::<u64>(), limit in any::<bool>()) {
        let f = fixture();
        let init = random_initial_state(&f.model, &RandomInit::new(seed, 2.0, 3.0)).unwrap();
        let cfg = SimulationConfig {
            nu: 0.1,
            kappa: 0.05,
            g: 1.0,
            cal_n: 5.0,
            t_end: 0.2,
            dt: f.model.dt_limit(5.0).min(0.01),
            sample_interval: 0.1,
            lattice: f.model.set.descriptor(),
            qg_unit_diffusion: false,
            drop_cancelling: false,
        };
        let system = if limit { System::Limit } else { System::Full { n: 5.0 } };
        let n_rot = if limit { 0.0 } else { 5.0 };
        let tr = integrate(&f.model, system, &cfg, &init).unwrap();
        for s in &tr.states {
            let p = reconstruct_physical(&f.model, s, n_rot, [5, 5, 5], 1.0, 5.0).unwrap();
            prop_assert!(p.imag_residue < 1e-9, "{}", p.imag_residue);
        }
    }
}
