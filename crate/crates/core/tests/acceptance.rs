//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use fqz_core::checker::{check_observable, RuleId, Status};
use fqz_core::circuit::{
    deutsch, deutsch_circuit, oracle_table, oracle_unitary, run_shots, Circuit, InitialKet,
    Instruction, OracleFn, Verdict,
};
use fqz_core::cli::{cmd_run, Format};
use fqz_core::gateset::{
    builtins, cnot, hadamard, identity_gate, mapping_to_matrix, pauli_x, pauli_z, phase_shift,
};
use fqz_core::linalg::{
    approx_equal, eigenvalues_2x2, mat_mul, Complex, ComplexMatrix, Tolerance, ONE, ZERO,
};
use fqz_core::speclang::{compile, parse_source, pretty_print};
use fqz_core::state::{apply_gate, basis_state, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tol(e: f64) -> Tolerance {
    Tolerance::new(e).unwrap()
}

fn expected_verdict(f: OracleFn) -> Verdict {
    if f.is_constant() {
        Verdict::Constant
    } else {
        Verdict::Balanced
    }
}

fn deutsch_dichotomy() -> Outcome {
    for f in OracleFn::ALL {
        for seed in 0..100u64 {
            let v = deutsch(f, RngSeed(seed));
            ensure(v.verdict == expected_verdict(f), || {
                format!("{f}: seed {seed} gave {}", v.verdict)
            })?;
            ensure((v.probability - 1.0).abs() <= 1e-9, || {
                format!("{f}: seed {seed} bit probability {}", v.probability)
            })?;
        }
    }
    Ok(())
}

fn axiom_suite() -> Outcome {
    let eps = tol(1e-9);
    let passing = [
        ("I", identity_gate()),
        ("X", pauli_x()),
        ("Z", pauli_z()),
        ("H", hadamard()),
    ];
    for (name, g) in &passing {
        let report = check_observable(g.matrix(), eps);
        ensure(report.passed(), || format!("{name} rejected:\n{report}"))?;
        let (a, b) = eigenvalues_2x2(g.matrix()).map_err(|e| e.to_string())?;
        ensure(a.im.abs() <= 1e-9 && b.im.abs() <= 1e-9, || {
            format!("{name} eigenvalues {a}, {b}")
        })?;
    }
    let diag_i = ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, Complex::new(0.0, 1.0)]).unwrap();
    let r = phase_shift(std::f64::consts::FRAC_PI_2).unwrap();
    for (name, m) in [("diag(1, i)", &diag_i), ("R(pi/2)", r.matrix())] {
        let report = check_observable(m, eps);
        for rule in [RuleId::Obs2, RuleId::Obs3] {
            ensure(report.status_of(rule) == Some(Status::Fail), || {
                format!("{name} did not fail {}:\n{report}", rule.as_str())
            })?;
        }
    }
    Ok(())
}

fn gate_algebra() -> Outcome {
    let eps = tol(1e-9);
    for g in [identity_gate(), pauli_x(), pauli_z(), hadamard(), cnot()] {
        let sq = mat_mul(g.matrix(), g.matrix()).unwrap();
        ensure(
            approx_equal(&sq, &ComplexMatrix::identity(sq.rows()), eps),
            || format!("{g} squared is not I"),
        )?;
    }
    let r_pi = phase_shift(std::f64::consts::PI).unwrap();
    ensure(approx_equal(r_pi.matrix(), pauli_z().matrix(), eps), || {
        "R(pi) differs from Z".into()
    })?;
    let mut mapped = 0;
    for g in builtins() {
        if let Some(m) = g.mapping() {
            let u = mapping_to_matrix(m).map_err(|e| format!("{g}: {e}"))?;
            ensure(approx_equal(&u, g.matrix(), eps), || {
                format!("{g}: mapping gives\n{u}")
            })?;
            mapped += 1;
        }
    }
    let h_pairs = hadamard().mapping().map(|m| m.pairs().len()).unwrap_or(0);
    ensure(mapped == builtins().len(), || {
        format!("only {mapped} built-ins carry a mapping")
    })?;
    ensure(h_pairs == 4, || format!("H mapping has {h_pairs} pairs"))
}

fn oracle_equation() -> Outcome {
    for f in OracleFn::ALL {
        let u = oracle_unitary(f);
        for x in [false, true] {
            for y in [false, true] {
                let input = 2 * x as usize + y as usize;
                let output = 2 * x as usize + (f.eval(x) ^ y) as usize;
                let col = u.column_vec(input);
                let exact = col
                    .iter()
                    .enumerate()
                    .all(|(i, c)| *c == if i == output { ONE } else { ZERO });
                ensure(exact, || {
                    format!(
                        "{f}: |{x:b}{y:b}> maps to {col:?}",
                        x = x as u8,
                        y = y as u8
                    )
                })?;
            }
        }
    }
    ensure(
        approx_equal(
            &oracle_unitary(OracleFn::Identity),
            cnot().matrix(),
            tol(1e-12),
        ),
        || "oracle(id) differs from CNOT".into(),
    )
}

fn check_norms(c: &Circuit, oracles: &HashMap<String, OracleFn>, seed: u64) -> Outcome {
    let mut machine = fqz_core::circuit::Machine::new(oracles, ChaCha8Rng::seed_from_u64(seed));
    for (i, instr) in c.instructions().iter().enumerate() {
        machine.step(i, instr).map_err(|e| e.to_string())?;
        if let Some(s) = machine.register() {
            let n = s.norm_sqr();
            ensure((n - 1.0).abs() <= 1e-9, || {
                format!("norm {n} after instruction {i}")
            })?;
        }
    }
    Ok(())
}

fn normalization() -> Outcome {
    for f in OracleFn::ALL {
        check_norms(&deutsch_circuit(), &oracle_table(f), 0)?;
    }
    for name in ["deutsch.fqz", "bell.fqz", "coin.fqz", "phases.fqz"] {
        let src = std::fs::read_to_string(common::program_path(name)).map_err(|e| e.to_string())?;
        let p = parse_source(&src).map_err(|e| format!("{name}: {e}"))?;
        let (c, oracles) = compile(&p).map_err(|e| format!("{name}: {e}"))?;
        for seed in 0..10 {
            check_norms(&c, &oracles, seed).map_err(|e| format!("{name}: {e}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..1000u64 {
        let src = common::random_program(&mut rng, 20);
        let p = parse_source(&src).map_err(|e| format!("{e} in\n{src}"))?;
        let (c, oracles) = compile(&p).map_err(|e| format!("{e} in\n{src}"))?;
        ensure(c.len() <= 20, || format!("program {k} too long"))?;
        check_norms(&c, &oracles, k).map_err(|e| format!("{e} in\n{src}"))?;
    }
    Ok(())
}

fn target_assignments(arity: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..n {
        if arity == 1 {
            out.push(vec![a]);
            continue;
        }
        for b in (0..n).filter(|&b| b != a) {
            out.push(vec![a, b]);
        }
    }
    out
}

fn simulator_equivalence() -> Outcome {
    let mut gates = builtins();
    gates.push(phase_shift(0.3).unwrap());
    let mut cases = 0;
    for n in [2usize, 3] {
        for g in &gates {
            for targets in target_assignments(g.arity(), n) {
                let full = common::expand_to_register(g.matrix(), &targets, n);
                for b in 0..1 << n {
                    let s = basis_state(n, b).unwrap();
                    let got = apply_gate(&s, g, &targets).map_err(|e| e.to_string())?;
                    let want = full.column_vec(b);
                    let diff = got
                        .amplitudes()
                        .iter()
                        .zip(&want)
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0, f64::max);
                    ensure(diff <= 1e-12, || {
                        format!("{g} on {targets:?} of |{b:0n$b}>: diff {diff:e}")
                    })?;
                    cases += 1;
                }
            }
        }
    }
    ensure(cases > 0, || "no cases".into())
}

fn coin_circuit() -> Circuit {
    Circuit::new(vec![
        Instruction::Alloc {
            qubit: "q".into(),
            init: InitialKet::HZero,
        },
        Instruction::Measure { qubit: "q".into() },
    ])
    .unwrap()
}

fn run_json(path: &std::path::Path, shots: u64, seed: u64) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cmd_run(path, shots, seed, Format::Json, &mut out, &mut err);
    ensure(code == 0, || {
        format!("exit {code}: {}", String::from_utf8_lossy(&err))
    })?;
    Ok(out)
}

fn measurement_statistics() -> Outcome {
    let c = coin_circuit();
    let oracles = HashMap::new();
    for seed in [0u64, 1, 2, 3, 42, 1234, 0xdead_beef, u64::MAX] {
        let report = run_shots(&c, &oracles, RngSeed(seed), 10_000).map_err(|e| e.to_string())?;
        let counts = report.shots.unwrap_or_default();
        let p0 = *counts.get("0").unwrap_or(&0) as f64 / 10_000.0;
        ensure((0.485..=0.515).contains(&p0), || {
            format!("seed {seed}: P(0) = {p0}")
        })?;
    }
    let coin = common::program_path("coin.fqz");
    let a = run_json(&coin, 10_000, 42)?;
    let b = run_json(&coin, 10_000, 42)?;
    ensure(a == b, || "JSON differs between identical runs".into())
}

fn language_round_trip() -> Outcome {
    let check = |src: &str| -> Outcome {
        let p = parse_source(src).map_err(|e| format!("{e} in\n{src}"))?;
        let printed = pretty_print(&p);
        let again = parse_source(&printed).map_err(|e| format!("reparse: {e} in\n{printed}"))?;
        ensure(again == p, || format!("round trip changed\n{src}"))?;
        ensure(pretty_print(&again) == printed, || {
            format!("printing unstable\n{printed}")
        })
    };
    check(common::DEUTSCH_SOURCE)?;
    let canonical: String = common::DEUTSCH_SOURCE
        .lines()
        .filter(|l| !l.starts_with("--") && !l.is_empty())
        .map(|l| l.split(" --").next().unwrap().trim_end().to_string() + "\n")
        .collect();
    let printed = pretty_print(&parse_source(common::DEUTSCH_SOURCE).unwrap());
    ensure(printed == canonical, || {
        format!("Deutsch source prints as\n{printed}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let mut errors = 0;
    for _ in 0..1000 {
        let src = common::random_program(&mut rng, 20);
        check(&src)?;
        for _ in 0..5 {
            let mutated = common::mutate(&mut rng, &src);
            let result = catch_unwind(|| parse_source(&mutated))
                .map_err(|_| format!("parser panicked on\n{mutated:?}"))?;
            if let Err(e) = result {
                errors += 1;
                ensure(
                    common::location_in_source(&mutated, e.line, e.column),
                    || format!("unlocated error {e:?} in\n{mutated:?}"),
                )?;
            }
        }
    }
    ensure(errors > 0, || "no mutation was rejected".into())
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for f in OracleFn::ALL {
        let src = common::DEUTSCH_SOURCE
            .replace("oracle f = const0", &format!("oracle f = {}", f.keyword()));
        ensure(src.contains(&format!("oracle f = {}", f.keyword())), || {
            "substitution failed".into()
        })?;
        let path = dir.path().join(format!("deutsch_{}.fqz", f.keyword()));
        std::fs::write(&path, &src).map_err(|e| e.to_string())?;
        let bit = match expected_verdict(f) {
            Verdict::Constant => "0",
            Verdict::Balanced => "1",
        };
        for seed in [0u64, 7, 42, 99] {
            let out = run_json(&path, 100, seed)?;
            let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
            ensure(v["outcomes"] == serde_json::json!({ bit: 100 }), || {
                format!("{f}: seed {seed} outcomes {}", v["outcomes"])
            })?;
            let amps: Vec<f64> = v["amplitudes"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| a[0].as_f64().unwrap().powi(2) + a[1].as_f64().unwrap().powi(2))
                .collect();
            let p = if bit == "0" {
                amps[0] + amps[1]
            } else {
                amps[2] + amps[3]
            };
            ensure((p - 1.0).abs() <= 1e-9, || {
                format!("{f}: P(x = {bit}) = {p}")
            })?;
            let direct = deutsch(f, RngSeed(seed));
            ensure(direct.measured_bit.to_string() == bit, || {
                format!("{f}: direct run disagrees")
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("deutsch dichotomy", deutsch_dichotomy),
        ("axiom suite", axiom_suite),
        ("gate algebra", gate_algebra),
        ("oracle equation", oracle_equation),
        ("normalization", normalization),
        ("simulator equivalence", simulator_equivalence),
        ("measurement statistics", measurement_statistics),
        ("language round trip", language_round_trip),
        ("end to end", end_to_end),
    ];
    let quiet_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("criterion {}: {name}: PASS", i + 1),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {}: {name}: FAIL\n    {}",
                    i + 1,
                    why.replace('\n', "\n    ")
                );
            }
        }
    }
    std::panic::set_hook(quiet_hook);
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
