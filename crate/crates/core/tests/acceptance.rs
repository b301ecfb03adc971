//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use cqt::channels::{
    chi_to_choi, choi_to_chi, depolarizing_channel, kraus_to_chi, kraus_to_choi, random_rank_r_process,
    transformation_unitary,
};
use cqt::convex::{
    compile_constraints, icc, normalisation_reference, random_witness, DataConstraint, FeasibleSetSpec, InteriorPoint,
    ObjectKind,
};
use cqt::harness::{run_experiment, AggregateResult, ExperimentSpec};
use cqt::inference::{ml_estimate, physical_probabilities, Copies, InferenceConfig, MeasurementGroup, MeasurementRecord};
use cqt::qcore::linalg::{identity, max_abs, trace_distance, trace_product_re};
use cqt::qcore::{
    bf_outcome_count, bf_povm, c, fidelity, k0_bound, kw_bound, phase_retrieval_lic, random_rank_r_state,
    rank_r_parameter_count, rng_from_seed, born_probabilities, bkd_projective_mic, CMatrix, DensityMatrix,
};
use cqt::schemes::{SchemeConfig, SchemeKind};

const MASTER_SEED: u64 = 20_240_901;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn experiment(cfg: SchemeConfig, trials: usize) -> AggregateResult {
    run_experiment(&ExperimentSpec::new(cfg, trials)).expect("experiment runs")
}

fn noiseless(scheme: SchemeKind, d: usize, r: usize) -> SchemeConfig {
    let cfg = SchemeConfig::new(scheme, d, r).with_seed(MASTER_SEED).with_copies(Copies::Infinite);
    if scheme.is_product() {
        cfg.with_local_dims(vec![2; d.trailing_zeros() as usize])
    } else {
        cfg
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_count(res: &AggregateResult) -> f64 {
    mean(res.rows.iter().map(|r| r.terminal_count as f64))
}

fn all_certified(res: &AggregateResult) -> bool {
    res.rows.iter().all(|r| r.certified())
}

// Bloch-vector helpers for the qubit oracles.
type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn unit(a: V3) -> V3 {
    scale(a, 1.0 / dot(a, a).sqrt())
}

fn paulis() -> [CMatrix; 3] {
    let z = c(0.0, 0.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    ]
}

/// tr(A ρ) = (tr A + a·r)/2 for ρ = (1 + r·σ)/2; returns (tr A, a).
fn bloch_form(a: &CMatrix) -> (f64, V3) {
    let s = paulis();
    (a.trace().re, [trace_product_re(a, &s[0]), trace_product_re(a, &s[1]), trace_product_re(a, &s[2])])
}

fn from_bloch(r: V3) -> CMatrix {
    let s = paulis();
    (identity(2) + &s[0] * c(r[0], 0.0) + &s[1] * c(r[1], 0.0) + &s[2] * c(r[2], 0.0)) * c(0.5, 0.0)
}

/// Some unit vector orthogonal to n.
fn orthogonal(n: V3) -> V3 {
    let e = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    unit(cross(n, e))
}

fn c1_icc_brute_force() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED ^ 1);
    let mut worst = 0.0f64;
    for set_idx in 0..20 {
        let k = set_idx % 3;
        let truth = random_rank_r_state(2, 1 + set_idx % 2, &mut rng).unwrap();
        let mut spec = FeasibleSetSpec::new(ObjectKind::State { d: 2 }).unwrap();
        let mut planes: Vec<(V3, f64)> = Vec::new();
        for _ in 0..k {
            let e = random_rank_r_state(2, 1 + set_idx % 2, &mut rng).unwrap().into_matrix();
            let p = trace_product_re(&e, truth.matrix());
            spec.push(DataConstraint::single(e.clone(), p)).unwrap();
            let (t, a) = bloch_form(&e);
            planes.push((a, 2.0 * p - t));
        }
        let set = compile_constraints(&spec).unwrap();
        let w = random_witness(ObjectKind::State { d: 2 }, &mut rng).unwrap();
        let res = icc(&set, &w, &InteriorPoint::default(), None).unwrap();
        let (tz, z) = bloch_form(&w.ops[0]);
        let f = |r: V3| 0.5 * (tz + dot(z, r));

        // grid over the feasible slice of the Bloch ball
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut visit = |r: V3| {
            let v = f(r);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        let n = 600;
        match k {
            0 => {
                for i in 0..=n {
                    let th = PI * i as f64 / n as f64;
                    for j in 0..2 * n {
                        let ph = PI * j as f64 / n as f64;
                        for rad in [0.25, 0.5, 0.75, 1.0] {
                            visit(scale([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()], rad));
                        }
                    }
                }
            }
            1 => {
                let (a, b) = planes[0];
                let na = dot(a, a).sqrt();
                let nh = scale(a, 1.0 / na);
                let r0 = scale(nh, b / na);
                let rad = (1.0 - dot(r0, r0)).max(0.0).sqrt();
                let u = orthogonal(nh);
                let v = cross(nh, u);
                for i in 0..=n {
                    let rr = rad * i as f64 / n as f64;
                    for j in 0..8 * n {
                        let ph = 2.0 * PI * j as f64 / (8 * n) as f64;
                        visit(add(r0, add(scale(u, rr * ph.cos()), scale(v, rr * ph.sin()))));
                    }
                }
            }
            _ => {
                let ((a1, b1), (a2, b2)) = (planes[0], planes[1]);
                let t = unit(cross(a1, a2));
                // r0 = x a1 + y a2 solving the 2×2 Gram system
                let (g11, g12, g22) = (dot(a1, a1), dot(a1, a2), dot(a2, a2));
                let det = g11 * g22 - g12 * g12;
                let x = (b1 * g22 - b2 * g12) / det;
                let y = (b2 * g11 - b1 * g12) / det;
                let r0 = add(scale(a1, x), scale(a2, y));
                let half = (1.0 - dot(r0, r0)).max(0.0).sqrt();
                let m = 200_000;
                for i in 0..=m {
                    visit(add(r0, scale(t, -half + 2.0 * half * i as f64 / m as f64)));
                }
            }
        }
        worst = worst.max((res.s_raw - (hi - lo)).abs());
    }
    outcome(worst < 2e-3, format!("max |s_raw − grid spread| = {worst:.2e} over 20 sets (tolerance 2e-3)"))
}

fn c2_qubit_singleton() -> Outcome {
    let s3 = 1.0 / 3f64.sqrt();
    let phi1 = from_bloch([-s3, s3, s3]);
    let phi2 = from_bloch([s3, -s3, s3]);
    let zero = from_bloch([0.0, 0.0, 1.0]);
    let nu = (1.0 + s3) / 2.0;
    let nu_ok = (trace_product_re(&phi1, &zero) - nu).abs() < 1e-15 && (trace_product_re(&phi2, &zero) - nu).abs() < 1e-15;
    let spec = FeasibleSetSpec::new(ObjectKind::State { d: 2 })
        .unwrap()
        .with(DataConstraint::single(phi1, nu))
        .unwrap()
        .with(DataConstraint::single(phi2, nu))
        .unwrap();
    let set = compile_constraints(&spec).unwrap();
    let w = random_witness(ObjectKind::State { d: 2 }, &mut rng_from_seed(MASTER_SEED ^ 2)).unwrap();
    let res = icc(&set, &w, &InteriorPoint::default(), None).unwrap();
    let dmax = trace_distance(&res.witness_max[0], &zero);
    let dmin = trace_distance(&res.witness_min[0], &zero);
    outcome(
        nu_ok && res.s_raw < 1e-7 && dmax < 1e-4 && dmin < 1e-4,
        format!("ν = {nu:.5}, s_raw = {:.2e}, witness distances {dmax:.1e} / {dmin:.1e}", res.s_raw),
    )
}

fn c3_monotonicity() -> Outcome {
    let runs: Vec<(SchemeConfig, usize)> = vec![
        (noiseless(SchemeKind::Rh, 4, 1), 4),
        (noiseless(SchemeKind::Rh, 4, 2), 4),
        (noiseless(SchemeKind::Rlh, 4, 1), 4),
        (noiseless(SchemeKind::Rlh, 4, 2), 4),
        (noiseless(SchemeKind::Act, 4, 1), 4),
        (noiseless(SchemeKind::Act, 4, 2), 4),
        (noiseless(SchemeKind::Pact, 4, 1), 4),
        (noiseless(SchemeKind::Pact, 4, 2), 4),
        (noiseless(SchemeKind::Actqpt, 2, 1), 3),
        (noiseless(SchemeKind::Pactqpt, 2, 1), 2),
        (noiseless(SchemeKind::AcqptUnitary, 2, 1), 3),
        (noiseless(SchemeKind::Acqpt, 2, 2), 2),
        (noiseless(SchemeKind::Cqdt, 2, 1), 4),
        (noiseless(SchemeKind::Cqdt, 3, 1), 4),
    ];
    let mut n = 0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (cfg, trials) in runs {
        let res = experiment(cfg, trials);
        failures += res.rows.iter().filter(|r| r.failed()).count();
        for t in &res.traces {
            n += 1;
            worst = worst.max(t.max_monotonicity_violation());
        }
    }
    outcome(
        n == 50 && failures == 0 && worst <= 1e-9,
        format!("{n} runs, largest s_raw increase {worst:.2e} (slack 1e-9)"),
    )
}

fn c4_closed_forms() -> Outcome {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    for d in 2..=16usize {
        for r in 1..=d {
            // d² − 1 real parameters minus those of the (d − r)-dimensional kernel block
            if rank_r_parameter_count(d, r).unwrap() != d * d - 1 - (d - r) * (d - r) {
                bad.push(format!("params({d},{r})"));
            }
            match kw_bound(d, r) {
                Ok(k) if 2 * r <= d => {
                    let num = 4 * r * (d - r) - 2;
                    if k * (d - 1) as f64 != num as f64 && (k - num as f64 / (d - 1) as f64).abs() > 0.0 {
                        bad.push(format!("kw({d},{r})"));
                    }
                }
                Err(_) if 2 * r > d => {}
                _ => bad.push(format!("kw regime({d},{r})")),
            }
            // smallest K with (K − 1)(d − 1) ≥ r² − r
            let mut k0 = 1;
            while (k0 - 1) * (d - 1) < r * r - r {
                k0 += 1;
            }
            if k0_bound(d, r).unwrap() != k0 {
                bad.push(format!("k0({d},{r})"));
            }
            let pr = if 2 * r <= d + 1 { 4 * r * (d - r) } else { d * d };
            if phase_retrieval_lic(d, r).unwrap() != pr {
                bad.push(format!("pr({d},{r})"));
            }
        }
        if bkd_projective_mic(d).unwrap() != d * (2 * d - 1) {
            bad.push(format!("bkd({d})"));
        }
    }
    let spot = kw_bound(4, 1).unwrap() == 10.0 / 3.0
        && kw_bound(16, 1).unwrap() == 58.0 / 15.0
        && k0_bound(16, 1).unwrap() == 1
        && k0_bound(5, 5).unwrap() == 6
        && phase_retrieval_lic(10, 3).unwrap() == 84
        && phase_retrieval_lic(2, 1).unwrap() == 4
        && bkd_projective_mic(7).unwrap() == 91;
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && spot && secs < 1.0,
        format!("{} mismatches on d ∈ 2..16, r ∈ 1..d; spot values {spot}; {secs:.3} s", bad.len()),
    )
}

fn c5_bf_povm() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED ^ 5);
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [4usize, 8] {
        for r in [1usize, 2] {
            let povm = bf_povm(d, r).unwrap();
            let truth = random_rank_r_state(d, r, &mut rng).unwrap();
            let p = born_probabilities(&truth, &povm).unwrap();
            let mut rec = MeasurementRecord::new(ObjectKind::State { d }, Copies::Infinite);
            rec.push(MeasurementGroup::from_operators(povm.outcomes().to_vec(), p, None).unwrap()).unwrap();
            let ml = ml_estimate(&rec, &InferenceConfig::default()).unwrap();
            let targets = physical_probabilities(&rec, false).unwrap();
            let set = compile_constraints(&rec.feasible_spec(&targets).unwrap()).unwrap();
            let w = random_witness(ObjectKind::State { d }, &mut rng).unwrap();
            let first = icc(&set, &w, &InteriorPoint::default(), None).unwrap();
            let s_norm = first.s_raw / normalisation_reference(first.s_raw, &w);
            let est = DensityMatrix::from_approx(&ml.estimator[0]).unwrap();
            let f = fidelity(&est, &truth).unwrap();
            let count_ok = povm.len() == bf_outcome_count(d, r).unwrap() && povm.len() == (2 * d - r) * r + 1;
            ok &= count_ok && s_norm < 1e-6 && first.witnesses_valid(1e-8) && f > 0.999;
            lines.push(format!("d={d} r={r}: {} outcomes, s_norm {s_norm:.1e}, F {f:.6}", povm.len()));
        }
    }
    outcome(ok, lines.join("; "))
}

struct D16 {
    rh: [AggregateResult; 2],
    rlh: [AggregateResult; 2],
    act: [AggregateResult; 2],
    pact: [AggregateResult; 2],
}

fn d16() -> D16 {
    let run = |s| [experiment(noiseless(s, 16, 1), 10), experiment(noiseless(s, 16, 2), 10)];
    D16 { rh: run(SchemeKind::Rh), rlh: run(SchemeKind::Rlh), act: run(SchemeKind::Act), pact: run(SchemeKind::Pact) }
}

fn c6_ordering(x: &D16) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for i in 0..2 {
        let (rh, rlh, act, pact) = (mean_count(&x.rh[i]), mean_count(&x.rlh[i]), mean_count(&x.act[i]), mean_count(&x.pact[i]));
        let certified = all_certified(&x.rh[i]) && all_certified(&x.rlh[i]) && all_certified(&x.act[i]) && all_certified(&x.pact[i]);
        ok &= certified && act <= rh && rlh >= rh && pact <= rlh + 1.0;
        lines.push(format!("r={}: RH {rh:.1}, RLH {rlh:.1}, ACT {act:.1}, PACT {pact:.1}", i + 1));
    }
    outcome(ok, lines.join("; "))
}

fn c7_act_compressivity(x: &D16) -> Outcome {
    let good = x.act[0].rows.iter().filter(|r| r.certified() && r.terminal_count <= 6).count();
    let ks: Vec<String> = x.act[0].rows.iter().map(|r| r.terminal_count.to_string()).collect();
    outcome(good >= 8, format!("{good}/10 certified with K_IC ≤ 6 (K = {})", ks.join(",")))
}

fn c8_channels() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED ^ 8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 2;
        let r = 1 + i % (d * d);
        let k = random_rank_r_process(d, r, &mut rng).unwrap();
        let choi = kraus_to_choi(&k).unwrap();
        let chi = kraus_to_chi(&k).unwrap();
        worst = worst.max(max_abs(&(chi_to_choi(&chi).matrix() - choi.matrix())));
        worst = worst.max(max_abs(&(choi_to_chi(&choi).matrix() - chi.matrix())));
        worst = worst.max(max_abs(&(chi_to_choi(&choi_to_chi(&choi)).matrix() - choi.matrix())));
    }

    let h = FRAC_1_SQRT_2;
    let re = |x: f64| c(x, 0.0);
    let s = paulis();
    // σ/√2 basis change from the |j⟩⟨k| operator basis
    let v = CMatrix::from_fn(4, 4, |l, m| {
        let p = if m == 0 { identity(2) } else { s[m - 1].clone() };
        p[(l / 2, l % 2)] * re(h)
    });
    let u_disp = CMatrix::from_row_slice(
        4,
        4,
        &[re(1.0), re(0.0), re(0.0), re(1.0), re(0.0), re(1.0), c(0.0, 1.0), re(0.0), re(0.0), re(1.0), c(0.0, -1.0), re(0.0), re(1.0), re(0.0), re(0.0), re(-1.0)],
    ) * re(h);
    let mut disp = 0.0f64;
    disp = disp.max(max_abs(&(transformation_unitary(2) * &v - &u_disp)));
    for (p1, p2, p3) in [(0.1, 0.2, 0.3), (0.05, 0.0, 0.4), (0.25, 0.25, 0.25)] {
        let k = depolarizing_channel(p1, p2, p3).unwrap();
        let (a, b) = (1.0 - p1 - p2, 1.0 - p1 - p2 - 2.0 * p3);
        let choi_disp = CMatrix::from_row_slice(
            4,
            4,
            &[re(a), re(0.0), re(0.0), re(b), re(0.0), re(p1 + p2), re(p1 - p2), re(0.0), re(0.0), re(p1 - p2), re(p1 + p2), re(0.0), re(b), re(0.0), re(0.0), re(a)],
        );
        let chi_disp = CMatrix::from_diagonal(&cqt::qcore::CVector::from_vec(vec![re(1.0 - p1 - p2 - p3), re(p1), re(p2), re(p3)]));
        let choi = kraus_to_choi(&k).unwrap();
        disp = disp.max(max_abs(&(choi.matrix() - &choi_disp)));
        // displayed χ has unit trace: χ/d in the Pauli basis
        let chi_pauli = v.adjoint() * kraus_to_chi(&k).unwrap().matrix() * &v * re(0.5);
        disp = disp.max(max_abs(&(chi_pauli - &chi_disp)));
        disp = disp.max(max_abs(&(&u_disp * &chi_disp * u_disp.adjoint() * re(2.0) - choi.matrix())));
    }
    outcome(
        worst < 1e-10 && disp < 1e-12,
        format!("round-trip error {worst:.1e} on 100 channels; depolarizing display error {disp:.1e}"),
    )
}

fn c9_actqpt() -> Outcome {
    let res = experiment(noiseless(SchemeKind::Actqpt, 2, 1), 5);
    let ok = all_certified(&res)
        && res.rows.iter().all(|r| r.fidelity > 0.999 && r.terminal_count < 12 && r.total_outcomes < 16);
    let ls: Vec<String> = res.rows.iter().map(|r| format!("{}/{}", r.terminal_count, r.total_outcomes)).collect();
    let fmin = res.rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
    outcome(ok, format!("L_IC/M_IC per trial {} (limits 12/16), min F {fmin:.6}", ls.join(" ")))
}

fn c10_acqpt() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for d in [2usize, 3] {
        let res = experiment(noiseless(SchemeKind::AcqptUnitary, d, 1), 5);
        ok &= all_certified(&res) && res.rows.iter().all(|r| r.terminal_count <= 4 * d * d && r.fidelity > 0.999);
        let ms: Vec<String> = res.rows.iter().map(|r| r.terminal_count.to_string()).collect();
        let fmin = res.rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
        lines.push(format!("d={d}: M_IC {} (limit {}), min F {fmin:.6}", ms.join(","), 4 * d * d));
    }
    outcome(ok, lines.join("; "))
}

fn c11_cqdt() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for d in [2usize, 3] {
        let res = experiment(noiseless(SchemeKind::Cqdt, d, 1), 10);
        let m = mean_count(&res);
        let pr = phase_retrieval_lic(d, 1).unwrap();
        ok &= all_certified(&res) && m <= pr as f64;
        lines.push(format!("d={d}: mean L_IC {m:.1} vs {pr}"));
    }
    outcome(ok, lines.join("; "))
}

fn finite_act(n: u64) -> SchemeConfig {
    noiseless(SchemeKind::Act, 4, 1).with_copies(Copies::Finite(n))
}

fn c12_consistency() -> Outcome {
    let fids: Vec<f64> = [100u64, 10_000, 1_000_000]
        .iter()
        .map(|&n| mean(experiment(finite_act(n), 10).rows.iter().map(|r| r.fidelity)))
        .collect();
    outcome(
        fids[0] < fids[1] && fids[1] < fids[2],
        format!("mean F at N = 1e2, 1e4, 1e6: {:.5}, {:.5}, {:.5}", fids[0], fids[1], fids[2]),
    )
}

fn c13_determinism(x: &D16) -> Outcome {
    let mut same = true;
    let again = experiment(noiseless(SchemeKind::Rh, 16, 1), 10);
    same &= again.trial_csv() == x.rh[0].trial_csv() && again.aggregate_csv() == x.rh[0].aggregate_csv();
    let cases = [finite_act(100), noiseless(SchemeKind::Cqdt, 3, 1), noiseless(SchemeKind::Actqpt, 2, 1)];
    for cfg in cases {
        let a = experiment(cfg.clone(), 4);
        let mut one_thread = ExperimentSpec::new(cfg, 4);
        one_thread.jobs = Some(1);
        let b = run_experiment(&one_thread).unwrap();
        same &= a.trial_csv() == b.trial_csv() && a.aggregate_csv() == b.aggregate_csv();
    }
    outcome(same, "d=16 RH rerun and three configurations at 1 vs all threads")
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, t0: Instant, o: Outcome| {
        let verdict = if o.ok { "PASS" } else { "FAIL" };
        if !o.ok {
            failed += 1;
        }
        println!("criterion {n:>2} {verdict} {name}: {} [{:.1} s]", o.detail, t0.elapsed().as_secs_f64());
    };
    let t = Instant::now();
    report(1, "ICC vs Bloch-grid brute force", t, c1_icc_brute_force());
    let t = Instant::now();
    report(2, "two-projector qubit singleton", t, c2_qubit_singleton());
    let t = Instant::now();
    report(3, "noiseless monotonicity", t, c3_monotonicity());
    let t = Instant::now();
    report(4, "closed-form grid", t, c4_closed_forms());
    let t = Instant::now();
    report(5, "BF POVM completeness", t, c5_bf_povm());
    let t = Instant::now();
    let x = d16();
    println!("(d=16 grid: {:.1} s)", t.elapsed().as_secs_f64());
    let t = Instant::now();
    report(6, "random vs adaptive ordering, d=16", t, c6_ordering(&x));
    let t = Instant::now();
    report(7, "ACT compressivity, d=16", t, c7_act_compressivity(&x));
    let t = Instant::now();
    report(8, "channel algebra", t, c8_channels());
    let t = Instant::now();
    report(9, "ACTQPT d=2", t, c9_actqpt());
    let t = Instant::now();
    report(10, "ACQPT with unitarity assumption", t, c10_acqpt());
    let t = Instant::now();
    report(11, "CQDT vs phase retrieval", t, c11_cqdt());
    let t = Instant::now();
    report(12, "statistical consistency", t, c12_consistency());
    let t = Instant::now();
    report(13, "determinism", t, c13_determinism(&x));
    println!("{} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
