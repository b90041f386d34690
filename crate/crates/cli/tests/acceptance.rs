//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use bgate::circuit::{evaluate, parse, serialize, GateOp, TwoQubitCircuit, TwoQubitKind};
use bgate::gates::{self, NamedGate, Wire};
use bgate::invariants::{local_invariants, LocalInvariants};
use bgate::josephson::{self, JosephsonParams};
use bgate::matrix::{dist_up_to_phase, haar_random_su2_with, haar_random_su4, kron, random_local_with};
use bgate::synth::{self, b_equivalent_circuit};
use bgate::weyl::{kak, single_switch_reach, weyl_coordinates, CHAMBER_TOL};
use bgate::{Hermitian4, Pauli, WeylPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn invariant_anchors() -> Result<String, String> {
    let cases = [
        ("CNOT", gates::cnot(), LocalInvariants::new(0.0, 0.0, 4.0)),
        ("B", gates::b_gate(), LocalInvariants::new(0.0, 0.0, 0.0)),
        ("identity", NamedGate::O.matrix(), LocalInvariants::new(4.0, 0.0, 12.0)),
        ("SWAP", gates::swap(), LocalInvariants::new(-4.0, 0.0, -12.0)),
    ];
    let mut worst: f64 = 0.0;
    for (name, u, expected) in cases {
        let got = local_invariants(&u).map_err(|e| e.to_string())?;
        let d = got.max_diff(&expected);
        ensure(d < 1e-9, || format!("{name}: {got:?}"))?;
        worst = worst.max(d);
    }
    Ok(format!("CNOT, B, identity, SWAP; max deviation {worst:.1e}"))
}

fn equivalence_circuit() -> Result<String, String> {
    let u = evaluate(&b_equivalent_circuit());
    let inv = local_invariants(&u).map_err(|e| e.to_string())?;
    let d_inv = inv.max_diff(&LocalInvariants::B);
    let c = weyl_coordinates(&u).map_err(|e| e.to_string())?;
    let d_c = c.max_diff(&WeylPoint::new(FRAC_PI_2, FRAC_PI_4, 0.0));
    ensure(d_inv < 1e-9, || format!("invariants {inv:?}"))?;
    ensure(d_c < 1e-8, || format!("coordinates {c:?}"))?;
    ensure(synth::basis_action_check(), || "basis action not equivalent to B".into())?;
    Ok(format!("invariants off by {d_inv:.1e}, coordinates off by {d_c:.1e}"))
}

fn kak_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_rec, mut worst_dress): (f64, f64) = (0.0, 0.0);
    for seed in 0..1000u64 {
        let u = haar_random_su4(seed);
        let k = kak(&u).map_err(|e| format!("seed {seed}: {e}"))?;
        let rec = dist_up_to_phase(&k.reconstruct(), &u);
        ensure(rec < 1e-8, || format!("seed {seed}: reconstruction {rec:.2e}"))?;
        ensure(k.c.in_chamber(CHAMBER_TOL), || format!("seed {seed}: {:?} outside chamber", k.c))?;
        let (a1, b1) = random_local_with(&mut rng);
        let (a2, b2) = random_local_with(&mut rng);
        let c2 = weyl_coordinates(&(kron(&a1, &b1) * u * kron(&a2, &b2))).map_err(|e| e.to_string())?;
        let dress = c2.max_diff(&k.c);
        ensure(dress < 1e-7, || format!("seed {seed}: dressing moved point by {dress:.2e}"))?;
        worst_rec = worst_rec.max(rec);
        worst_dress = worst_dress.max(dress);
    }
    Ok(format!("1000 Haar samples; max reconstruction {worst_rec:.1e}, max dressing shift {worst_dress:.1e}"))
}

fn synthesis() -> Result<String, String> {
    let (mut analytic, mut fallback) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    for seed in 0..1000u64 {
        let r = synth::synthesize(&haar_random_su4(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
        let b = r.circuit.count_kind(&TwoQubitKind::B);
        ensure(b == 2 && r.circuit.two_qubit_count() == 2, || format!("seed {seed}: {b} B gates"))?;
        ensure(r.circuit.single_qubit_count() <= 6, || format!("seed {seed}: {} single-qubit gates", r.circuit.single_qubit_count()))?;
        ensure(r.residual < 1e-6, || format!("seed {seed}: residual {:.2e}", r.residual))?;
        worst = worst.max(r.residual);
        if r.used_fallback {
            fallback += 1;
        } else {
            analytic += 1;
        }
    }
    Ok(format!(
        "1000 Haar targets; max residual {worst:.1e}; analytic {analytic}/1000 ({:.1}%), fallback {fallback}/1000 ({:.1}%)",
        analytic as f64 / 10.0,
        fallback as f64 / 10.0
    ))
}

fn single_b_lower_bound() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b_point = NamedGate::B.point();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (a1, b1) = random_local_with(&mut rng);
        let (a2, b2) = random_local_with(&mut rng);
        let c = weyl_coordinates(&(kron(&a1, &b1) * gates::b_gate() * kron(&a2, &b2))).map_err(|e| e.to_string())?;
        let d = c.max_diff(&b_point);
        ensure(d < 1e-8, || format!("sample {i}: {c:?}"))?;
        worst = worst.max(d);
    }
    Ok(format!("200 dressed single-B circuits; max shift {worst:.1e}"))
}

fn josephson_closed_form() -> Result<String, String> {
    let (mut worst_trace, mut worst_local, mut worst_g2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..50 {
        let alpha = 0.25 + 1.75 * i as f64 / 49.0;
        let p = JosephsonParams::new(alpha).map_err(|e| e.to_string())?;
        for j in 0..200 {
            let t = 10.0 * j as f64 / 199.0;
            let matrix_trace = josephson::evolve_trace_invariants(&p, t).map_err(|e| e.to_string())?;
            let matrix_local = josephson::evolve_invariants(&p, t).map_err(|e| e.to_string())?;
            worst_trace = worst_trace.max(josephson::closed_form_trace(&p, t).max_diff(&matrix_trace));
            worst_local = worst_local.max(josephson::invariants_closed_form(&p, t).max_diff(&matrix_local));
            worst_g2 = worst_g2.max(matrix_local.g2.abs()).max(matrix_trace.g2.abs());
        }
    }
    ensure(worst_trace < 1e-8, || format!("closed form vs matrix (trace form) {worst_trace:.2e}"))?;
    ensure(worst_local < 1e-8, || format!("closed form vs matrix (local form) {worst_local:.2e}"))?;
    ensure(worst_g2 < 1e-8, || format!("g2 reached {worst_g2:.2e}"))?;
    let mut worst_c3: f64 = 0.0;
    for (alpha, tmax) in [(1.1436, 1.5014), (1.1992, 2.7309), (0.7, 10.0)] {
        let p = JosephsonParams::new(alpha).map_err(|e| e.to_string())?;
        for s in josephson::trajectory(&p, tmax, 500).map_err(|e| e.to_string())? {
            worst_c3 = worst_c3.max(s.c.c3.abs()).max(s.inv.g2.abs());
        }
    }
    ensure(worst_c3 < 1e-8, || format!("trajectory left the base plane: {worst_c3:.2e}"))?;
    Ok(format!(
        "50×200 grid; max gap {worst_trace:.1e} (trace form), {worst_local:.1e} (local form); max |g2| {worst_g2:.1e}; max trajectory |c3| {worst_c3:.1e}"
    ))
}

fn operating_points() -> Result<String, String> {
    let range = (josephson::DEFAULT_ALPHA_RANGE, josephson::DEFAULT_T_RANGE);
    let cnot = josephson::solve_target_class(&LocalInvariants::CNOT, range.0, range.1).map_err(|e| e.to_string())?;
    ensure((cnot.alpha - 1.1992).abs() < 1e-3 && (cnot.t - 2.7309).abs() < 1e-3, || format!("CNOT: {cnot:?}"))?;
    let b = josephson::solve_target_class(&LocalInvariants::B, range.0, range.1).map_err(|e| e.to_string())?;
    ensure((b.alpha - 1.1436).abs() < 1e-3 && (b.t - 1.5014).abs() < 1e-3, || format!("B: {b:?}"))?;
    let branches = josephson::solve_b_branches(10);
    let min = branches.first().ok_or("no B branch solutions")?;
    let n = min.n.ok_or("missing branch index")?;
    ensure(2 * n + 1 == 5, || format!("minimal B solution on 2n+1 = {}", 2 * n + 1))?;
    let formula = (2 * n + 1) as f64 * PI / (8.0 * min.alpha * min.alpha);
    ensure((formula - min.t).abs() < 1e-8, || format!("t = {} vs formula {formula}", min.t))?;
    ensure((min.alpha - b.alpha).abs() < 1e-6, || format!("branch {:?} vs scan {:?}", min, b))?;
    Ok(format!(
        "CNOT at α={:.6}, t={:.6}; B at α={:.6}, t={:.6} on branch 2n+1=5",
        cnot.alpha, cnot.t, min.alpha, min.t
    ))
}

fn single_switch() -> Result<String, String> {
    let cases = [
        ("Ising → CNOT", Hermitian4::pauli_pairs(&[(1.0, Pauli::X)]), NamedGate::Cnot, FRAC_PI_4),
        ("XY → DCNOT", Hermitian4::pauli_pairs(&[(1.0, Pauli::X), (1.0, Pauli::Y)]), NamedGate::Dcnot, FRAC_PI_4),
        ("2XX+YY → B", Hermitian4::pauli_pairs(&[(2.0, Pauli::X), (1.0, Pauli::Y)]), NamedGate::B, FRAC_PI_8),
    ];
    let mut worst: f64 = 0.0;
    for (name, h, gate, t) in cases {
        let c = weyl_coordinates(&h.exp_i(t)).map_err(|e| e.to_string())?;
        let d = c.max_diff(&gate.point());
        ensure(d < 1e-8, || format!("{name}: {c:?} at t={t}"))?;
        let first = single_switch_reach(&h, &gate.point(), 2.0).ok_or_else(|| format!("{name}: not reached"))?;
        ensure((first - t).abs() < 1e-8, || format!("{name}: first reached at {first}"))?;
        worst = worst.max(d);
    }
    Ok(format!("Ising, XY and 2XX+YY reach CNOT, DCNOT, B at π/4, π/4, π/8; max error {worst:.1e}"))
}

fn random_circuit(rng: &mut ChaCha8Rng) -> TwoQubitCircuit {
    let len = rng.random_range(0..40);
    let mut c = TwoQubitCircuit::default();
    for _ in 0..len {
        let wire = if rng.random_bool(0.5) { Wire::Top } else { Wire::Bottom };
        c.push(match rng.random_range(0..6) {
            0 => GateOp::single(wire, haar_random_su2_with(rng)),
            1 => GateOp::labeled(wire, haar_random_su2_with(rng), "r"),
            2 => GateOp::Two(TwoQubitKind::B),
            3 => GateOp::Two(TwoQubitKind::Cnot),
            4 => GateOp::Two(TwoQubitKind::Controlled { control: wire, u: haar_random_su2_with(rng) }),
            _ => GateOp::Two(TwoQubitKind::Canonical(WeylPoint::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            ))),
        });
    }
    c
}

fn serialization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let c = random_circuit(&mut rng);
        let text = serialize(&c);
        let back = parse(&text).map_err(|e| format!("circuit {i}: {e}"))?;
        ensure(back == c, || format!("circuit {i}: parsed circuit differs"))?;
        ensure(serialize(&back) == text, || format!("circuit {i}: text differs after round trip"))?;
    }
    let runs: [&[&str]; 4] = [
        &["synth", "--seed", "11", "--report"],
        &["kak", "--seed", "3"],
        &["solve", "--target", "cnot"],
        &["trajectory", "--alpha", "1.1436", "--tmax", "1.5014", "--steps", "200"],
    ];
    for args in runs {
        let run = || Command::new(env!("CARGO_BIN_EXE_bgate")).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (run()?, run()?);
        ensure(a.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)))?;
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || format!("{args:?} output differs between runs"))?;
    }
    Ok("100 random circuits bit-exact; 4 CLI invocations byte-identical across runs".into())
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("invariant anchors", invariant_anchors),
        ("B-equivalent circuit", equivalence_circuit),
        ("KAK round trip", kak_round_trip),
        ("two-B synthesis", synthesis),
        ("single-B lower bound", single_b_lower_bound),
        ("Josephson closed form", josephson_closed_form),
        ("Josephson operating points", operating_points),
        ("single-switch generation", single_switch),
        ("serialization and CLI determinism", serialization),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    let _ = panic::take_hook();
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
