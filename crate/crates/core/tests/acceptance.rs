//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero only if a criterion fails for a reason other than the two
//! documented counterexamples (criteria 3 and 8), whose mechanism is
//! asserted instead.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use num_traits::{One, Zero};
use stratflow_core::basis::{wave_matrix, C4};
use stratflow_core::dynamics::{
    convergence_study, integrate, pancake_experiment, qg_equiv_check, random_initial_state,
    theta_from_c0, Model, RandomInit, SimulationConfig, System,
};
use stratflow_core::interaction::{
    apply_bbar, build_triad_table, nonlinear_full, nonlinear_limit, AmplitudeState, SigmaPairs,
    TriadTable,
};
use stratflow_core::lattice::{build_truncated_set, DilationFactors, FrequencyIndex, LatticeKind};
use stratflow_core::resonance::{
    gamma_scan, is_resonant_exact, max_resonant_fiber, resonance_discriminant,
    restricted_convolution_census, SigmaTriple,
};
use stratflow_core::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

enum Outcome {
    Pass,
    Fail,
    KnownRed,
}

struct Report {
    unexpected: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, known_red: bool, detail: String) {
        let outcome = match (ok, known_red) {
            (true, _) => Outcome::Pass,
            (false, true) => Outcome::KnownRed,
            (false, false) => Outcome::Fail,
        };
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail | Outcome::KnownRed => "FAIL",
        };
        let note = if matches!(outcome, Outcome::KnownRed) {
            " (documented counterexample, mechanism verified)"
        } else {
            ""
        };
        println!("criterion {id:>2}: {tag}{note} | {detail}");
        if matches!(outcome, Outcome::Fail) {
            self.unexpected.push(id);
        }
    }
}

fn cubic(m: u32, g: (i64, i64)) -> Model {
    let d = DilationFactors::from_fractions(g.0, 1, g.1, 1).unwrap();
    Model::new(build_truncated_set(LatticeKind::Cubic, m, d).unwrap()).unwrap()
}

fn config(model: &Model, nu: f64, t_end: f64, dt: f64, sample: f64) -> SimulationConfig {
    SimulationConfig {
        nu,
        kappa: nu,
        g: 1.0,
        cal_n: 10.0,
        t_end,
        dt,
        sample_interval: sample,
        lattice: model.set.descriptor(),
        qg_unit_diffusion: false,
        drop_cancelling: false,
    }
}

fn fi(a: i32, b: i32, c: i32) -> FrequencyIndex {
    FrequencyIndex::new(a, b, c)
}

fn dot(a: &C4, b: &C4) -> Complex64 {
    (0..4).map(|j| a[j] * b[j].conj()).sum()
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Unstructured complex amplitudes with unit `ℓ¹` norm.
fn random_state(len: usize, seed: u64) -> AmplitudeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = AmplitudeState::from_modes(
        0.0,
        (0..len)
            .map(|_| {
                std::array::from_fn(|_| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect(),
    );
    s.scaled(1.0 / s.l1_norm())
}

fn real_state(model: &Model, seed: u64) -> AmplitudeState {
    random_initial_state(model, &RandomInit::new(seed, 3.0, 1.0)).unwrap()
}

fn without_vertical_waves(model: &Model, c: &AmplitudeState) -> AmplitudeState {
    let mut out = c.clone();
    for (x, f) in out.modes.iter_mut().zip(&model.basis.frames) {
        if f.horizontal_zero {
            x[0] = ZERO;
            x[2] = ZERO;
        }
    }
    out
}

fn frame_algebra(r: &mut Report) {
    let start = Instant::now();
    let (nu, kappa) = (0.3, 0.7);
    let weight = [nu, nu, nu, kappa];
    let mut worst = [0.0f64; 4];
    let mut modes = 0;
    for g in [(1, 1), (2, 3)] {
        let model = cubic(4, g);
        let d = *model.set.dilation();
        for (i, f) in model.basis.frames.iter().enumerate() {
            modes += 1;
            let q = [&f.qm, &f.q0, &f.qp, &f.qdiv];
            for a in 0..4 {
                for b in 0..4 {
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst[0] = worst[0].max((dot(q[a], q[b]) - want).norm());
                }
            }
            let s = wave_matrix(model.set.member(i), &d).unwrap();
            for sigma in [-1i8, 0, 1] {
                let v = f.q(sigma);
                let sv = s.apply(v);
                let lam = I * (sigma as f64 * f.omega);
                for j in 0..4 {
                    worst[1] = worst[1].max((sv[j] - lam * v[j]).norm());
                }
                let wv: C4 = std::array::from_fn(|j| weight[j] * v[j]);
                let want = if sigma == 0 { nu } else { (nu + kappa) / 2.0 };
                let idx = if sigma == 0 { 3 } else { 2 };
                worst[idx] = worst[idx].max((dot(&wv, v) - want).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.iter().all(|&w| w <= 1e-12) && secs < 1.0;
    r.line(
        1,
        ok,
        false,
        format!(
            "{modes} frames, residuals orth {:.1e} eig {:.1e} wave-visc {:.1e} vortex-visc {:.1e}, {secs:.2}s",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}

struct Tables {
    m3: Model,
    t3: TriadTable,
}

fn cancellation(r: &mut Report, tb: &Tables) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut smallest_term = f64::INFINITY;
    for seed in 0..100 {
        let c = random_state(tb.m3.len(), seed);
        let (cp, cm) = (c.sector(1), c.sector(-1));
        let x = apply_bbar(&tb.t3, &cp, &cm, 0, SigmaPairs::ALL);
        let y = apply_bbar(&tb.t3, &cm, &cp, 0, SigmaPairs::ALL);
        let sum: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let n2 = c.l1_norm().powi(2);
        worst = worst.max(l1(&sum) / n2);
        smallest_term = smallest_term.min(l1(&x) / n2);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && secs < 10.0;
    r.line(
        2,
        ok,
        false,
        format!("max relative sum {worst:.1e} (single term >= {smallest_term:.1e}), 100 states, {secs:.2}s"),
    );
}

fn vanishing_terms(r: &mut Report, tb: &Tables) {
    let mut literal: f64 = 0.0;
    let mut others: f64 = 0.0;
    let mut generic: f64 = 0.0;
    let mut leak_mismatch: f64 = 0.0;
    for seed in 0..20 {
        for c in [
            random_state(tb.m3.len(), 1000 + seed),
            real_state(&tb.m3, seed),
        ] {
            let n2 = c.l1_norm().powi(2);
            let c0 = c.sector(0);
            let g = without_vertical_waves(&tb.m3, &c);
            for s in [1i8, -1] {
                let (cs, cms) = (c.sector(s), c.sector(-s));
                let leak = apply_bbar(&tb.t3, &cs, &c0, 0, SigmaPairs::ALL);
                literal = literal.max(l1(&leak) / n2);
                for t in [
                    apply_bbar(&tb.t3, &c0, &cs, 0, SigmaPairs::ALL),
                    apply_bbar(&tb.t3, &cms, &c0, s, SigmaPairs::ALL),
                    apply_bbar(&tb.t3, &c0, &cms, s, SigmaPairs::ALL),
                    apply_bbar(&tb.t3, &c0, &c0, s, SigmaPairs::ALL),
                ] {
                    others = others.max(l1(&t) / n2);
                }
                literal = literal.max(others);
                let gen = apply_bbar(&tb.t3, &g.sector(s), &g.sector(0), 0, SigmaPairs::ALL);
                generic = generic.max(l1(&gen) / n2);
                // the whole leak comes from wave amplitudes on modes with ñ_h = 0
                let vertical = cs.sub(&g.sector(s));
                let only = apply_bbar(&tb.t3, &vertical, &c0, 0, SigmaPairs::ALL);
                let d: Vec<Complex64> = leak.iter().zip(&only).map(|(a, b)| a - b).collect();
                leak_mismatch = leak_mismatch.max(l1(&d) / n2);
            }
        }
    }
    let ok = literal <= 1e-12;
    let mechanism = others <= 1e-12 && generic <= 1e-12 && leak_mismatch <= 1e-12;
    r.line(
        3,
        ok,
        mechanism,
        format!(
            "max relative term {literal:.1e}; B0(c±,c0) is fed by wave amplitudes on modes with zero horizontal part (omega = 0): \
             without them {generic:.1e}, leak explained to {leak_mismatch:.1e}; other four terms {others:.1e}"
        ),
    );
}

fn qg_kernel(r: &mut Report, tb: &Tables) {
    let b = &tb.m3.basis;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut c0 = random_state(tb.m3.len(), 2000 + seed).sector(0);
        for (x, h) in c0.modes.iter_mut().zip(&b.hnorm) {
            if *h == 0.0 {
                x[1] = ZERO;
            }
        }
        let got = apply_bbar(&tb.t3, &c0, &c0, 0, SigmaPairs::single(0, 0));
        for n in 0..tb.m3.len() {
            let mut want = ZERO;
            if b.hnorm[n] > 0.0 {
                for (k, m) in tb.m3.set.pairs_for(n) {
                    let (hk, hm) = (b.hnorm[k], b.hnorm[m]);
                    if hk == 0.0 || hm == 0.0 {
                        continue;
                    }
                    let (kv, mv) = (b.wavevectors[k], b.wavevectors[m]);
                    let kernel = (kv[0] * mv[1] - kv[1] * mv[0]) * hm / (hk * b.hnorm[n]);
                    want += -I * kernel * c0.modes[k][1] * c0.modes[m][1];
                }
            }
            worst = worst.max((got[n] - want).norm());
        }
    }
    r.line(
        4,
        worst <= 1e-12,
        false,
        format!("max per-mode deviation {worst:.1e} over 100 states"),
    );
}

fn energy(r: &mut Report) {
    let mut worst_skew: f64 = 0.0;
    for g in [(1, 1), (2, 3)] {
        let m = cubic(3, g);
        let table = build_triad_table(&m.set, &m.basis).unwrap();
        for seed in 0..5 {
            let c = real_state(&m, 3000 + seed);
            let size = c.l1_norm().powi(3);
            for t in [0.0, 0.37, 5.1] {
                for n_big in [10.0, 1000.0] {
                    let nl = AmplitudeState::from_modes(t, nonlinear_full(&table, &c, t, n_big));
                    worst_skew = worst_skew.max(nl.inner(&c).re.abs() / size);
                }
            }
            let nl = AmplitudeState::from_modes(0.0, nonlinear_limit(&table, &c, false));
            worst_skew = worst_skew.max(nl.inner(&c).re.abs() / size);
        }
    }
    let m = cubic(3, (1, 1));
    let init = random_initial_state(&m, &RandomInit::new(7, 3.0, 5.0)).unwrap();
    let cfg = config(&m, 0.1, 1.0, 0.01, 0.01);
    let tr = integrate(&m, System::Limit, &cfg, &init).unwrap();
    let rise = tr
        .diagnostics
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = worst_skew <= 1e-10 && rise <= 1e-10;
    r.line(
        5,
        ok,
        false,
        format!(
            "max |Re<B(c,c),c>|/|c|^3 {worst_skew:.1e}; largest per-step energy change on a limit run {rise:.1e} over {} steps",
            tr.diagnostics.len() - 1
        ),
    );
}

fn qg_equivalence(r: &mut Report) {
    let m = cubic(3, (1, 1));
    let mut spec = RandomInit::new(11, 3.0, 3.0);
    spec.sectors = [false, true, false];
    let mut c0 = random_initial_state(&m, &spec).unwrap();
    for (x, h) in c0.modes.iter_mut().zip(&m.basis.hnorm) {
        if *h == 0.0 {
            x[1] = ZERO;
        }
    }
    let cfg = config(&m, 0.1, 1.0, 1e-3, 0.01);
    let err = qg_equiv_check(&m, &cfg, &theta_from_c0(&c0)).unwrap();
    r.line(6, err <= 1e-8, false, format!("sup-t error {err:.1e}"));
}

fn exact_resonance(r: &mut Report) {
    let mut disagreements = 0usize;
    let mut checks = 0usize;
    for g in [(1, 1), (2, 3)] {
        let d = DilationFactors::from_fractions(g.0, 1, g.1, 1).unwrap();
        let set = build_truncated_set(LatticeKind::Cubic, 3, d).unwrap();
        for (n, k, m) in set.triads() {
            let (n, k, m) = (set.member(n), set.member(k), set.member(m));
            for sigma in SigmaTriple::all() {
                let v = is_resonant_exact(n, k, m, sigma, &d).unwrap();
                checks += 1;
                if v.resonant != (v.omega_value.abs() < 1e-9) {
                    disagreements += 1;
                }
            }
        }
    }
    let per = DilationFactors::periodic();
    let q0 = resonance_discriminant(fi(1, 0, -1), fi(1, 0, 1), fi(0, 0, -2), &per)
        .unwrap()
        .to_rational()
        .unwrap();
    let q1 = resonance_discriminant(fi(1, 0, 1), fi(1, 0, 0), fi(0, 0, 1), &per)
        .unwrap()
        .to_rational()
        .unwrap();
    let ok = disagreements == 0 && q0.is_zero() && q1.is_one();
    r.line(
        7,
        ok,
        false,
        format!("{disagreements} disagreements in {checks} verdicts; Q = {q0} and {q1} on the worked triads"),
    );
}

fn omega(n: FrequencyIndex, g2sq: f64) -> f64 {
    let h = (n.n1 * n.n1) as f64 * 2.0 + (n.n2 * n.n2) as f64 * g2sq;
    (h / (h + (n.n3 * n.n3) as f64)).sqrt()
}

fn gamma_certification(r: &mut Report) {
    let start = Instant::now();
    let d = DilationFactors::from_fractions(2, 1, 3, 1).unwrap();
    let set = build_truncated_set(LatticeKind::Cubic, 4, d).unwrap();
    let report = gamma_scan(&set);
    let secs = start.elapsed().as_secs_f64();
    let generic: Vec<_> = report.generic_rows().collect();
    let ok = generic.is_empty() && secs < 300.0;
    // every counterexample lies in the plane n₁ = k₁ = m₁ = 0, where
    // ω² = 3n₂²/(3n₂² + n₃²) makes ω_n = ω_k + ω_m attainable, and is a
    // genuine wave resonance
    let explained = !generic.is_empty()
        && generic.iter().all(|row| {
            let [wn, wk, wm] = [row.n, row.k, row.m].map(|x| omega(x, 3.0));
            let plane = row.n.n1 == 0 && row.k.n1 == 0 && row.m.n1 == 0;
            let float = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)]
                .iter()
                .any(|(a, b)| (wn - a * wk - b * wm).abs() < 1e-12);
            let exact = SigmaTriple::all().filter(|s| s.is_wave_triple()).any(|s| {
                is_resonant_exact(row.n, row.k, row.m, s, set.dilation())
                    .unwrap()
                    .resonant
            });
            plane && float && exact && row.q.is_zero()
        });
    let controls = [(2, 5), (2, 7), (5, 7)].iter().all(|&(a, b)| {
        let d = DilationFactors::from_fractions(a, 1, b, 1).unwrap();
        gamma_scan(&build_truncated_set(LatticeKind::Cubic, 4, d).unwrap()).certifies()
    });
    let example = generic
        .first()
        .map(|row| format!(" e.g. n={} k={} m={}", row.n, row.k, row.m))
        .unwrap_or_default();
    r.line(
        8,
        ok,
        explained && controls,
        format!(
            "{} generic resonant triads of {} scanned{example}, {secs:.1}s; \
             all are exact resonances in the plane n1=0 where gamma2^2=3 admits omega_k=omega_n/2; \
             (2,5), (2,7), (5,7) certify at the same M",
            generic.len(),
            report.triads_scanned
        ),
    );
}

fn census(r: &mut Report) {
    let set = build_truncated_set(LatticeKind::Cubic, 16, DilationFactors::periodic()).unwrap();
    let rows: Vec<_> = (1..=3)
        .map(|i| restricted_convolution_census(&set, i).unwrap())
        .collect();
    let fiber = max_resonant_fiber(&set).unwrap();
    let consts: Vec<f64> = rows.iter().map(|c| c.implied_constant).collect();
    // one constant for all shells, anchored at the first with slack 2
    let bound = 2.0 * consts[0];
    let ok = consts.iter().all(|&c| c.is_finite() && c <= bound) && fiber.max_count <= 8;
    r.line(
        9,
        ok,
        false,
        format!(
            "sup/2^i = {:?} (bound {bound:.3}); max resonant k3 per fiber {}",
            consts.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>(),
            fiber.max_count
        ),
    );
}

fn convergence(r: &mut Report) {
    let start = Instant::now();
    let m = cubic(3, (1, 1));
    let init = random_initial_state(&m, &RandomInit::new(1, 3.0, 1.0)).unwrap();
    let cfg = config(&m, 0.1, 1.0, 0.01, 0.01);
    let rows = convergence_study(&m, &cfg, &init, &[10.0, 100.0, 1000.0]).unwrap();
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_remainder).collect();
    let secs = start.elapsed().as_secs_f64();
    let decreasing = sup.windows(2).all(|w| w[1] < w[0]);
    let ratio = sup[2] / sup[0];
    let ok = decreasing && ratio <= 0.2 && secs < 600.0;
    r.line(
        10,
        ok,
        false,
        format!(
            "init l1 norm {:.3}; sup remainders {:.3e}, {:.3e}, {:.3e}; last/first {ratio:.3}, {secs:.1}s",
            init.l1_norm(),
            sup[0],
            sup[1],
            sup[2]
        ),
    );
}

fn pancake(r: &mut Report) {
    let m = cubic(4, (1, 1));
    let cfg = config(&m, 0.05, 2.0, 0.01, 0.1);
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 1..=5 {
        let mut spec = RandomInit::new(seed, 4.0, 5.0);
        spec.density = false;
        let init = random_initial_state(&m, &spec).unwrap();
        let rep = pancake_experiment(&m, &cfg, &init, 1000.0, [9, 9, 9]).unwrap();
        let (a0, an) = rep.final_anisotropy();
        if an <= a0 {
            wins += 1;
        }
        pairs.push(format!("{a0:.3}->{an:.3}"));
    }
    r.line(
        11,
        wins == 5,
        false,
        format!(
            "{wins}/5 seeds; anisotropy N=0 -> N=1000: {}",
            pairs.join(", ")
        ),
    );
}

fn integrator_order(r: &mut Report) {
    let m = cubic(2, (1, 1));
    let init = random_initial_state(&m, &RandomInit::new(5, 2.0, 6.0)).unwrap();
    let run = |dt: f64| {
        let cfg = config(&m, 0.1, 1.0, dt, 1.0);
        integrate(&m, System::Limit, &cfg, &init)
            .unwrap()
            .last()
            .clone()
    };
    let reference = run(1.0 / 640.0);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| run(dt).sub(&reference).l1_norm())
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|o| (3.5..=4.5).contains(o));
    r.line(
        12,
        ok,
        false,
        format!(
            "errors {}; observed orders {}",
            errs.iter()
                .map(|e| format!("{e:.2e}"))
                .collect::<Vec<_>>()
                .join(", "),
            orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

fn main() {
    let mut r = Report {
        unexpected: Vec::new(),
    };
    frame_algebra(&mut r);
    let m3 = cubic(3, (1, 1));
    let t3 = build_triad_table(&m3.set, &m3.basis).unwrap();
    let tb = Tables { m3, t3 };
    cancellation(&mut r, &tb);
    vanishing_terms(&mut r, &tb);
    qg_kernel(&mut r, &tb);
    energy(&mut r);
    qg_equivalence(&mut r);
    exact_resonance(&mut r);
    gamma_certification(&mut r);
    census(&mut r);
    convergence(&mut r);
    pancake(&mut r);
    integrator_order(&mut r);
    if !r.unexpected.is_empty() {
        eprintln!("unexpected failures: {:?}", r.unexpected);
        std::process::exit(1);
    }
}
