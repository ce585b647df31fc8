//! Acceptance gate: one PASS/FAIL line per criterion, each with its runtime
//! budget. Reference values are computed here with hand-written algebra and
//! closed-form arithmetic, not with the library's own oracle.

use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use qsdc_cli::commands::cmd_run;
use qsdc_cli::config::RunConfig;
use qsdc_core::adversary::{check_error_probability, EveStrategy};
use qsdc_core::bits::BitString;
use qsdc_core::cost::{cost_duplex, cost_two_device};
use qsdc_core::duplex::{
    ledger_from_delivery, reply_key_mode, run_duplex, DuplexConfig, DuplexError, DuplexStatus, TagLength,
};
use qsdc_core::oneway::{DecodeTable, EncodeTable, OnewayParams, HOME_SLOT, TRAVEL_SLOT};
use qsdc_core::quantum::{
    apply_pauli, bell_state, measure_bell_pair, outcome_distribution, BellKind, MeasBasis, PauliCode, PlanStep,
};
use qsdc_core::trials::{session_with_counts, simulate_oneway_trials};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

// Bell vectors over |q0 q1⟩ with q0 the high bit.
fn bell_vec(kind: BellKind) -> [f64; 4] {
    match kind {
        BellKind::PhiPlus => [H, 0.0, 0.0, H],
        BellKind::PhiMinus => [H, 0.0, 0.0, -H],
        BellKind::PsiPlus => [0.0, H, H, 0.0],
        BellKind::PsiMinus => [0.0, H, -H, 0.0],
    }
}

fn pauli_mat(code: PauliCode) -> [[f64; 2]; 2] {
    match code {
        PauliCode::I => [[1.0, 0.0], [0.0, 1.0]],
        PauliCode::Z => [[1.0, 0.0], [0.0, -1.0]],
        PauliCode::X => [[0.0, 1.0], [1.0, 0.0]],
        PauliCode::IY => [[0.0, 1.0], [-1.0, 0.0]],
    }
}

fn on_first(m: [[f64; 2]; 2], v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            out[2 * a + b] = (0..2).map(|c| m[a][c] * v[2 * c + b]).sum();
        }
    }
    out
}

fn overlap(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().powi(2)
}

const STANDARD: [PauliCode; 4] = [PauliCode::I, PauliCode::Z, PauliCode::X, PauliCode::IY];

// Smallest n with n - 2·round(n/8) ≥ ⌈L/2⌉ and round(n/8) ≥ 1.
fn reference_pairs(bits: usize) -> u64 {
    let m = bits.div_ceil(2) as u64;
    if m == 0 {
        return 0;
    }
    (1..)
        .find(|&n: &u64| {
            let c = (n as f64 / 8.0).round() as u64;
            c >= 1 && n >= 2 * c + m
        })
        .unwrap()
}

fn three_se(observed: f64, p: f64, n: u64) -> (bool, f64) {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    ((observed - p).abs() <= 3.0 * se.max(f64::MIN_POSITIVE), se)
}

type Outcome = Result<String, String>;

fn c1_dense_coding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let table = EncodeTable::standard();
    let mut cases = 0;
    for initial in BellKind::ALL {
        let decode = DecodeTable::new(initial, &table).map_err(|e| e.to_string())?;
        for label in 0..4u8 {
            let code = STANDARD[label as usize];
            if table.code(label) != code {
                return Err(format!("table maps {label:02b} to {}", table.code(label).name()));
            }
            let v = on_first(pauli_mat(code), bell_vec(initial));
            let expected: Vec<BellKind> = BellKind::ALL
                .into_iter()
                .filter(|&k| (overlap(v, bell_vec(k)) - 1.0).abs() < 1e-12)
                .collect();
            let state = apply_pauli(&bell_state(initial), HOME_SLOT, code).map_err(|e| e.to_string())?;
            let (seen, _) =
                measure_bell_pair(&state, (HOME_SLOT, TRAVEL_SLOT), rng.random()).map_err(|e| e.to_string())?;
            if expected != [seen] || decode.label(seen) != label {
                return Err(format!(
                    "{initial} label {label:02b}: expected {expected:?}, measured {seen}"
                ));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases}/16 cases round-trip"))
}

fn c2_invisibility() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for code in PauliCode::ALL {
        // Reduced state of the travelling qubit from the hand-built vector.
        let v = on_first(pauli_mat(code), bell_vec(BellKind::PhiPlus));
        let rho00 = v[0] * v[0] + v[2] * v[2];
        let rho01 = v[0] * v[1] + v[2] * v[3];
        for basis in [MeasBasis::Z, MeasBasis::X] {
            let reference = match basis {
                MeasBasis::Z => rho00,
                _ => 0.5 + rho01,
            };
            let state = apply_pauli(&bell_state(BellKind::PhiPlus), HOME_SLOT, code).map_err(|e| e.to_string())?;
            let d = outcome_distribution(&state, &[PlanStep::qubit(TRAVEL_SLOT, basis)]).map_err(|e| e.to_string())?;
            for (p, r) in [(d.get("0"), reference), (d.get("1"), 1.0 - reference)] {
                worst = worst.max((p - 0.5).abs()).max((r - 0.5).abs());
            }
            cases += 1;
        }
    }
    if worst <= 1e-12 {
        Ok(format!("{cases}/8 cases, max deviation {worst:.1e}"))
    } else {
        Err(format!("max deviation {worst:.3e}"))
    }
}

fn c3_detection() -> Outcome {
    let params = OnewayParams::default();
    let session = session_with_counts(64, 8, 8, &params).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, eve) in [EveStrategy::InterceptResendZ, EveStrategy::InterceptResendRandom]
        .into_iter()
        .enumerate()
    {
        let oracle = check_error_probability(&eve, BellKind::PhiPlus).map_err(|e| e.to_string())?;
        if (oracle - 0.25).abs() > 1e-12 {
            return Err(format!("{eve}: oracle gives {oracle}"));
        }
        let stats = simulate_oneway_trials(&session, eve, 2000, 300 + i as u64).map_err(|e| e.to_string())?;
        let n = stats.check1.sampled;
        let (pass, se) = three_se(stats.check1.mismatch_rate, 0.25, n);
        ok &= pass && n >= 100_000;
        lines.push(format!(
            "{eve} {:.5} over {n} (3se {:.5})",
            stats.check1.mismatch_rate,
            3.0 * se
        ));
    }
    let msg = lines.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_abort_curve() -> Outcome {
    let params = OnewayParams {
        qber_threshold: 0.0,
        ..OnewayParams::default()
    };
    let trials = 10_000;
    let mut ok = true;
    let mut lines = Vec::new();
    for k in [1usize, 4, 16, 64] {
        let session = session_with_counts(k, 8, 8, &params).map_err(|e| e.to_string())?;
        let stats = simulate_oneway_trials(&session, EveStrategy::InterceptResendZ, trials, 400 + k as u64)
            .map_err(|e| e.to_string())?;
        let expected = 1.0 - 0.75f64.powi(k as i32);
        ok &= three_se(stats.abort_rate_check1, expected, trials).0;
        lines.push(format!("k={k} {:.4}/{expected:.4}", stats.abort_rate_check1));
    }
    let msg = lines.join(" ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sessions = 1000;
    for i in 0..sessions {
        let (la, lb) = (rng.random_range(1..=128), rng.random_range(0..=128));
        let mut cfg = DuplexConfig::new(la, lb, OnewayParams::default());
        if rng.random_bool(0.5) {
            cfg = cfg.with_auth(TagLength::DEFAULT);
        }
        let m_a = BitString::random(la, &mut rng);
        let m_b = BitString::random(lb, &mut rng);
        let seed: u64 = rng.random();
        let out = run_duplex(
            &cfg,
            &m_a,
            &m_b,
            EveStrategy::None,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .map_err(|e| e.to_string())?;
        if out.status != DuplexStatus::Completed || out.bob_received != m_a || out.alice_received != m_b {
            return Err(format!("session {i} ({la}/{lb}): {:?}", out.status));
        }
        if out.alice_ledger != out.bob_ledger {
            return Err(format!("session {i}: ledgers differ"));
        }
    }
    Ok(format!("{sessions}/{sessions} sessions exact, ledgers identical"))
}

fn c6_discipline() -> Outcome {
    let mut runner = TestRunner::new(PropConfig {
        cases: 256,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (1usize..96, 0usize..96, any::<bool>(), any::<u64>());
    runner
        .run(&strategy, |(la, lb, auth, seed)| {
            let mut cfg = DuplexConfig::new(la, lb, OnewayParams::default());
            if auth {
                cfg = cfg.with_auth(TagLength::DEFAULT);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = run_duplex(
                &cfg,
                &BitString::random(la, &mut rng),
                &BitString::random(lb, &mut rng),
                EveStrategy::None,
                &mut rng,
            )
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
            for ledger in [out.alice_ledger.unwrap(), out.bob_ledger.unwrap()] {
                let issued = ledger.issued();
                for (i, a) in issued.iter().enumerate() {
                    for b in &issued[i + 1..] {
                        prop_assert!(a.end <= b.start || b.end <= a.start, "{a:?} overlaps {b:?}");
                    }
                }
                prop_assert_eq!(issued.iter().map(|r| r.len()).sum::<usize>(), out.plan.reply_key_bits);
                // Supply boundary: exactly the remainder is issuable, one more is not.
                let n = ledger.remaining();
                let mut exact = ledger.clone();
                prop_assert!(exact.take(n).is_ok());
                let mut over = ledger.clone();
                prop_assert_eq!(
                    over.take(n + 1),
                    Err(DuplexError::KeyExhausted {
                        requested: n + 1,
                        remaining: n
                    })
                );
                prop_assert_eq!(over.consumed_upto(), ledger.consumed_upto());
            }
            let fresh = ledger_from_delivery(&out.oneway.delivered_bits, 0).unwrap();
            let len = fresh.len();
            prop_assert!(fresh.clone().take(len).is_ok());
            prop_assert!(fresh.clone().take(len + 1).is_err());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("256 sessions, intervals disjoint, exhaustion exactly at n + 1".into())
}

fn c7_reply_key_mode() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tables = [
        EncodeTable::standard(),
        EncodeTable::new([PauliCode::IY, PauliCode::X, PauliCode::Z, PauliCode::I]).unwrap(),
    ];
    for i in 0..200 {
        let initial = BellKind::ALL[rng.random_range(0..4)];
        let table = tables[i % 2];
        let la = rng.random_range(1..=96);
        let mut cfg = DuplexConfig::new(la, rng.random_range(0..=48), OnewayParams::default());
        cfg.oneway.initial_bell = initial;
        cfg.oneway.encode_table = table;
        let m_a = BitString::random(la, &mut rng);
        let m_b = BitString::random(cfg.len_b, &mut rng);
        let out = run_duplex(&cfg, &m_a, &m_b, EveStrategy::None, &mut rng).map_err(|e| e.to_string())?;
        let from_bell = reply_key_mode(&out.oneway.bell_outcomes, initial, &table, out.session_id);
        let from_bits = ledger_from_delivery(&out.oneway.delivered_bits, out.session_id).map_err(|e| e.to_string())?;
        if from_bell != from_bits {
            return Err(format!("session {i}: ledgers differ"));
        }
    }
    Ok("200/200 sessions identical".into())
}

fn c8_economics() -> Outcome {
    let params = OnewayParams::default();
    for l in (2..=256).step_by(2) {
        let one = cost_duplex(l, l, &params, None).map_err(|e| e.to_string())?;
        let two = cost_two_device(l, l, &params).map_err(|e| e.to_string())?;
        let n = reference_pairs(l);
        let checks = [
            (one.epr_pairs_prepared, n),
            (two.epr_pairs_prepared, 2 * n),
            (one.qubit_transits, 2 * n),
            (two.qubit_transits, 4 * n),
            (one.classical_bits_sent - two.classical_bits_sent, l as u64),
        ];
        if let Some((got, want)) = checks.into_iter().find(|(g, w)| g != w) {
            return Err(format!("L={l}: got {got}, want {want}"));
        }
    }
    Ok("128 lengths: EPR and transits exactly half, classical +L".into())
}

fn c9_auth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 1000;
    let (mut on_ct, mut on_tag) = (0, 0);
    for i in 0..trials {
        let (la, lb) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let cfg = DuplexConfig::new(la, lb, OnewayParams::default()).with_auth(TagLength::new(32).unwrap());
        let bit = rng.random_range(0..lb + 32);
        if bit < lb {
            on_ct += 1;
        } else {
            on_tag += 1;
        }
        let out = run_duplex(
            &cfg,
            &BitString::random(la, &mut rng),
            &BitString::random(lb, &mut rng),
            EveStrategy::ClassicalTamper { bit },
            &mut rng,
        )
        .map_err(|e| e.to_string())?;
        if out.status != DuplexStatus::AuthFailed {
            return Err(format!("trial {i}: flip at {bit} gave {:?}", out.status));
        }
    }
    Ok(format!(
        "{trials}/{trials} AuthFailed ({on_ct} ciphertext, {on_tag} tag)"
    ))
}

fn stats_section(report: &str) -> Result<String, String> {
    let v: serde_json::Value = serde_json::from_str(report).map_err(|e| e.to_string())?;
    serde_json::to_string(&v["stats"]).map_err(|e| e.to_string())
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 2024\ntrials = 200\nstrategy = \"intercept-resend-random\"\n[duplex]\nlen_a = 48\nlen_b = 32\nauth = true\n",
    )
    .map_err(|e| e.to_string())?;
    let mut sections = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("report{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_qsdc"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!(
                "exit {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        sections.push(stats_section(
            &std::fs::read_to_string(&out).map_err(|e| e.to_string())?,
        )?);
    }
    let cfg = RunConfig::parse(&std::fs::read_to_string(&config).unwrap(), &config).map_err(|e| e.to_string())?;
    let a = cmd_run(&cfg)
        .map_err(|e| e.to_string())?
        .body
        .stats_json()
        .map_err(|e| e.to_string())?;
    let b = cmd_run(&cfg)
        .map_err(|e| e.to_string())?
        .body
        .stats_json()
        .map_err(|e| e.to_string())?;
    if sections[0] == sections[1] && a == b {
        Ok(format!("stats sections identical ({} bytes)", a.len()))
    } else {
        Err("stats sections differ".into())
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    // Start the thread pool before the clock runs.
    rayon_warmup();

    let criteria: [Criterion; 10] = [
        ("dense-coding exhaustive", Duration::from_secs(1), c1_dense_coding),
        ("encoding invisibility", Duration::from_secs(1), c2_invisibility),
        ("detection calibration", Duration::from_secs(30), c3_detection),
        ("abort curve", Duration::from_secs(60), c4_abort_curve),
        ("duplex round trip", Duration::from_secs(60), c5_round_trip),
        ("one-time discipline", Duration::from_secs(5), c6_discipline),
        ("reply-key-mode equivalence", Duration::from_secs(10), c7_reply_key_mode),
        ("economics", Duration::from_secs(1), c8_economics),
        ("authentication soundness", Duration::from_secs(10), c9_auth),
        ("determinism", Duration::from_secs(10), c10_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(d) => (false, d),
        };
        println!(
            "{} {:>2} {name}: {detail} [{:.3}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn rayon_warmup() {
    let session = session_with_counts(1, 1, 1, &OnewayParams::default()).unwrap();
    let _ = simulate_oneway_trials(&session, EveStrategy::None, 8, 0);
}
