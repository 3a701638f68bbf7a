// SPDX-License-Identifier: Apache-2.0

//! Exit criteria. Each criterion prints one PASS/FAIL line with its
//! elapsed time; the test fails if any criterion fails or overruns its
//! time budget.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revalu::arith::{
    build_cpa, build_csa32, build_csa42, build_csa52, build_full_adder, eval_cpa, eval_csa42,
    eval_csa52,
};
use revalu::energy::{
    datapath_trace, dpa_diff_of_means, erasure_bits, landauer_energy, peak_index, PowerModel,
    PowerTrace,
};
use revalu::gatelib::{tsg_as_full_adder, verify_gate, GateKind};
use revalu::montgomery::{build_mont_datapath, mont_exp, mont_mult_trace, mont_mult_word, MontParams};
use revalu::netlist::{Netlist, RoundTripMode};
use revalu::sequential::{
    build_d_latch, build_ms_dff, build_shift_register, d_latch_core, mux_core,
};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inputs(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn criterion_1() -> Outcome {
    let c = build_full_adder().cost_report().map_err(|e| e.to_string())?;
    ensure(
        (c.gate_count, c.garbage_count, c.unit_delay) == (1, 2, 1),
        || format!("full adder cost {c:?}, expected gates 1, garbage 2, delay 1"),
    )
}

fn criterion_2() -> Outcome {
    let tsg = GateKind::tsg();
    let mut images: Vec<u32> = (0..16).map(|x| tsg.apply_packed(x)).collect();
    images.sort_unstable();
    images.dedup();
    ensure(images.len() == 16, || format!("TSG has {} distinct images", images.len()))?;
    ensure(verify_gate(&tsg).unwrap().bijective, || "TSG report not bijective".into())?;

    let fr = GateKind::fredkin();
    for x in 0..8u32 {
        let y = fr.apply_packed(x);
        ensure(x.count_ones() == y.count_ones(), || format!("Fredkin weight changes on {x:03b}"))?;
    }
    let report = verify_gate(&fr).unwrap();
    ensure(report.bijective && report.conservative, || format!("{report:?}"))?;

    for x in 0..8u8 {
        let (a, b, c) = (x & 1 == 1, x & 2 == 2, x & 4 == 4);
        let total = u8::from(a) + u8::from(b) + u8::from(c);
        ensure(tsg_as_full_adder(a, b, c) == (total & 1 == 1, total >= 2), || {
            format!("TSG full adder wrong on {a} {b} {c}")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    for w in 1..=6usize {
        let n = build_cpa(w).unwrap();
        for a in 0..1u128 << w {
            for b in 0..1u128 << w {
                for cin in [false, true] {
                    let (s, cout) = eval_cpa(&n, w, a, b, cin).unwrap();
                    let expect = a + b + u128::from(cin);
                    ensure(s + (u128::from(cout) << w) == expect, || {
                        format!("CPA width {w}: {a}+{b}+{cin} gave {s}, cout {cout}")
                    })?;
                }
            }
        }
    }
    let n = build_cpa(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..10_000 {
        let (a, b, cin) = (rng.gen::<u64>(), rng.gen::<u64>(), rng.gen::<bool>());
        let (s, cout) = eval_cpa(&n, 64, u128::from(a), u128::from(b), cin).unwrap();
        let expect = u128::from(a) + u128::from(b) + u128::from(cin);
        ensure(s + (u128::from(cout) << 64) == expect, || format!("CPA 64: {a}+{b}+{cin}"))?;
    }

    // Per-slice identities, every slice input combination.
    let slice42 = build_csa42(1).unwrap();
    for x in 0..32u32 {
        let bit = |i: u32| u128::from((x >> i) & 1);
        let out = eval_csa42(&slice42, 1, [bit(0), bit(1), bit(2), bit(3)], x & 16 != 0).unwrap();
        let lhs = x.count_ones() as u128;
        let rhs = out.sum + 2 * (out.carry + u128::from(out.couts[0]));
        ensure(lhs == rhs, || format!("CSA42 slice {x:05b}: {lhs} != {rhs}"))?;
    }
    let slice52 = build_csa52(1).unwrap();
    for x in 0..128u32 {
        let bit = |i: u32| u128::from((x >> i) & 1);
        let out = eval_csa52(
            &slice52,
            1,
            [bit(0), bit(1), bit(2), bit(3), bit(4)],
            [x & 32 != 0, x & 64 != 0],
        )
        .unwrap();
        let lhs = x.count_ones() as u128;
        let couts: u128 = out.couts.iter().map(|&c| u128::from(c)).sum();
        let rhs = out.sum + 2 * (out.carry + couts);
        ensure(lhs == rhs, || format!("CSA52 slice {x:07b}: {lhs} != {rhs}"))?;
    }

    // Word-level value preservation on random multi-bit vectors.
    let w = 8;
    let (n42, n52) = (build_csa42(w).unwrap(), build_csa52(w).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let words: [u128; 5] = std::array::from_fn(|_| u128::from(rng.gen::<u8>()));
        let cins: [bool; 2] = [rng.gen(), rng.gen()];
        let o42 = eval_csa42(&n42, w, [words[0], words[1], words[2], words[3]], cins[0]).unwrap();
        let sum4: u128 = words[..4].iter().sum::<u128>() + u128::from(cins[0]);
        ensure(o42.value(w) == sum4, || format!("CSA42 {words:?}: {} != {sum4}", o42.value(w)))?;
        let o52 = eval_csa52(&n52, w, words, cins).unwrap();
        let sum5: u128 = words.iter().sum::<u128>() + u128::from(cins[0]) + u128::from(cins[1]);
        ensure(o52.value(w) == sum5, || format!("CSA52 {words:?}: {} != {sum5}", o52.value(w)))?;
    }
    Ok(())
}

fn generated_netlists() -> Vec<(String, Netlist)> {
    let mut nets = vec![("full_adder".to_string(), build_full_adder())];
    for w in [1, 2, 3, 4, 8, 16, 64] {
        nets.push((format!("cpa{w}"), build_cpa(w).unwrap()));
    }
    for w in [1, 2, 4, 8] {
        nets.push((format!("csa32_{w}"), build_csa32(w).unwrap()));
        nets.push((format!("csa42_{w}"), build_csa42(w).unwrap()));
        nets.push((format!("csa52_{w}"), build_csa52(w).unwrap()));
    }
    nets.push(("d_latch_core".into(), d_latch_core()));
    nets.push(("mux_core".into(), mux_core()));
    for (m, n) in [(7u64, 3u32), (40_961, 16)] {
        let d = build_mont_datapath(&MontParams::new(m, n).unwrap()).unwrap();
        nets.push((format!("mont{n}_stage1"), d.stage1().clone()));
        nets.push((format!("mont{n}_stage2"), d.stage2().clone()));
        nets.push((format!("mont{n}_final_adder"), d.final_adder().clone()));
    }
    nets
}

fn criterion_4() -> Outcome {
    for (i, (name, n)) in generated_netlists().into_iter().enumerate() {
        let report = n.validate();
        ensure(report.valid, || format!("{name}: {report}"))?;
        let mode = RoundTripMode::auto(&n, 1000, 1000 + i as u64);
        let r = n.verify_round_trip(mode).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.passed, || format!("{name}: {r:?}"))?;
        let expect = match mode {
            RoundTripMode::Exhaustive => 1u64 << (n.inputs().len() + n.constants().len()),
            RoundTripMode::Random { samples, .. } => samples as u64,
        };
        ensure(r.vectors_checked == expect, || format!("{name}: checked {}", r.vectors_checked))?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    for x in 0..8u8 {
        let (e, d, q) = (x & 1 == 1, x & 2 == 2, x & 4 == 4);
        let mut latch = build_d_latch();
        latch.set_state(&[q]).unwrap();
        let out = latch.step(&inputs(&[("E", e), ("D", d)])).unwrap().outputs["Q"];
        ensure(out == (d & e) | (!e & q), || format!("latch E={e} D={d} Q={q} gave {out}"))?;
    }

    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // behavioral negative-edge flip-flop
        let mut ff = build_ms_dff();
        let (mut q, mut sampled, mut prev_cp) = (false, false, false);
        for t in 0..100 {
            let (cp, d) = (rng.gen::<bool>(), rng.gen::<bool>());
            if cp {
                sampled = d;
            } else if prev_cp {
                q = sampled;
            }
            prev_cp = cp;
            let got = ff.step(&inputs(&[("CP", cp), ("D", d)])).unwrap().outputs["Q"];
            ensure(got == q, || format!("dff seed {seed} step {t}: {got} != {q}"))?;
        }

        // behavioral right-shift register, shifting on the falling edge
        let w = 8usize;
        let mut sr = build_shift_register(w).unwrap();
        let (mut value, mut sampled, mut prev_cp) = (0u128, false, false);
        for t in 0..100 {
            let (cp, si) = (rng.gen::<bool>(), rng.gen::<bool>());
            if cp {
                sampled = si;
            } else if prev_cp {
                value = (value >> 1) | (u128::from(sampled) << (w - 1));
            }
            prev_cp = cp;
            sr.step(&inputs(&[("CP", cp), ("SI", si)])).unwrap();
            ensure(sr.value() == value, || {
                format!("shift seed {seed} step {t}: {:#b} != {value:#b}", sr.value())
            })?;
        }
    }

    let mut sr = build_shift_register(4).unwrap();
    sr.set_value(0b1011);
    sr.pulse(&inputs(&[("SI", false)])).unwrap();
    ensure(sr.value() == 0b0101, || format!("one pulse gave {:#06b}", sr.value()))
}

/// Inverse of `a` modulo odd `m` by the extended Euclidean algorithm.
fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut t0, mut t1) = (m, a.rem_euclid(m), 0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1);
    t0.rem_euclid(m)
}

fn montgomery_oracle(x: u64, y: u64, m: u64, n: u32) -> u64 {
    let r_inv = mod_inverse(1i128 << n, i128::from(m));
    (i128::from(x) * i128::from(y) % i128::from(m) * r_inv % i128::from(m)) as u64
}

fn criterion_6() -> Outcome {
    for m in [5u64, 7, 9, 11, 13, 15] {
        let p = MontParams::minimal(m).unwrap();
        for x in 0..m {
            for y in 0..m {
                let got = mont_mult_word(x, y, &p).map_err(|e| e.to_string())?;
                let want = montgomery_oracle(x, y, m, p.bits());
                ensure(got == want, || format!("M={m}: {x}*{y} gave {got}, want {want}"))?;
            }
        }
    }

    let check_run = |d: &revalu::montgomery::MontDatapath, x: u64, y: u64| -> Outcome {
        let p = d.params();
        let run = d.run(x, y).map_err(|e| format!("datapath ({x},{y}): {e}"))?;
        let word = mont_mult_trace(x, y, p).map_err(|e| e.to_string())?;
        ensure(run.result == word.result, || {
            format!("M={} ({x},{y}): gate {} != word {}", p.modulus(), run.result, word.result)
        })?;
        for (c, s) in run.cycles.iter().zip(&word.steps) {
            ensure(s.after_add_m % 2 == 0, || format!("odd word sum in cycle {}", c.cycle))?;
            ensure(c.after_stage2.total() % 2 == 0 && c.shifted_out == [false, false], || {
                format!("odd datapath sum in cycle {}", c.cycle)
            })?;
            ensure(c.after_shift.total() == s.after_halve, || {
                format!("cycle {} register mismatch", c.cycle)
            })?;
        }
        Ok(())
    };

    let d7 = build_mont_datapath(&MontParams::new(7, 3).unwrap()).unwrap();
    for x in 0..7 {
        for y in 0..7 {
            check_run(&d7, x, y)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..100 {
        let m = rng.gen_range(1u64 << 15..1u64 << 16) | 1;
        let d = build_mont_datapath(&MontParams::new(m, 16).unwrap()).unwrap();
        let (x, y) = (rng.gen_range(0..m), rng.gen_range(0..m));
        check_run(&d, x, y)?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    for m in (3u64..64).step_by(2) {
        for a in 0..m {
            for b in 0..16u64 {
                let want = BigUint::from(a).modpow(&BigUint::from(b), &BigUint::from(m));
                let got = mont_exp(a, b, m).map_err(|e| e.to_string())?;
                ensure(BigUint::from(got) == want, || format!("{a}^{b} mod {m}: {got} != {want}"))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let m = rng.gen_range(3u64..1 << 32) | 1;
        let (a, b) = (rng.gen_range(0..m), rng.gen::<u64>());
        let want = BigUint::from(a).modpow(&BigUint::from(b), &BigUint::from(m));
        let got = mont_exp(a, b, m).map_err(|e| e.to_string())?;
        ensure(BigUint::from(got) == want, || format!("{a}^{b} mod {m}: {got} != {want}"))?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    for w in [1, 4, 16] {
        let r = erasure_bits(&build_cpa(w).unwrap()).unwrap();
        ensure(r.internal_bits == 0.0, || format!("CPA {w} erases {} bits", r.internal_bits))?;
    }
    let and = revalu::arith::IrreversibleNetlist::new(
        vec!["a".into(), "b".into()],
        vec![revalu::arith::LogicGate {
            op: revalu::arith::LogicOp::And,
            inputs: vec!["a".into(), "b".into()],
            output: "y".into(),
        }],
        vec!["y".into()],
    );
    let loss = erasure_bits(&and).unwrap().internal_bits;
    ensure((loss - 1.189).abs() <= 0.001, || format!("AND loses {loss} bits"))?;

    let e = landauer_energy(1.0, 300.0).unwrap();
    ensure((e - 2.871e-21).abs() <= 2.871e-21 * 1e-3, || format!("kT ln2 at 300 K = {e}"))?;

    for (name, n) in generated_netlists() {
        let r = erasure_bits(&n).unwrap();
        let garbage = n.cost_report().unwrap().garbage_count;
        ensure(r.internal_bits == 0.0, || format!("{name} erases {}", r.internal_bits))?;
        ensure(r.deferred_bits == garbage, || {
            format!("{name}: deferred {} != garbage {garbage}", r.deferred_bits)
        })?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    // 40 noisy traces of 8 cycles; the selected half leaks +6 at cycle 2.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let leak_cycle = 2;
    let traces: Vec<PowerTrace> = (0..40u64)
        .map(|i| {
            let mut samples: Vec<u32> = (0..8).map(|_| rng.gen_range(0..8)).collect();
            if i % 2 == 1 {
                samples[leak_cycle] += 6;
            }
            PowerTrace {
                samples,
                metadata: BTreeMap::from([("key_bit".to_string(), i % 2)]),
            }
        })
        .collect();
    let diff = dpa_diff_of_means(&traces, |t| t.metadata["key_bit"] == 1).unwrap();
    ensure(peak_index(&diff) == Some(leak_cycle), || format!("peak of {diff:?}"))?;

    let p = MontParams::new(7, 3).unwrap();
    let d = build_mont_datapath(&p).unwrap();
    let traces: Vec<PowerTrace> = (0..7)
        .flat_map(|x| (0..7).map(move |y| (x, y)))
        .map(|(x, y)| datapath_trace(&d.run(x, y).unwrap(), PowerModel::Constant(3)).unwrap())
        .collect();
    let diff = dpa_diff_of_means(&traces, |t| t.metadata["x"] & 1 == 1).unwrap();
    ensure(diff.iter().all(|&v| v == 0.0), || format!("constant model gave {diff:?}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("1 full adder cost {1, 2, 1}", Duration::from_secs(1), criterion_1),
        ("2 gate soundness", Duration::from_secs(1), criterion_2),
        ("3 adder oracle equivalence", Duration::from_secs(10), criterion_3),
        ("4 reversibility round trip", Duration::from_secs(10), criterion_4),
        ("5 sequential equivalence", Duration::from_secs(5), criterion_5),
        ("6 Montgomery correctness", Duration::from_secs(30), criterion_6),
        ("7 modular exponentiation", Duration::from_secs(30), criterion_7),
        ("8 energy accounting", Duration::from_secs(1), criterion_8),
        ("9 DPA harness sanity", Duration::from_secs(5), criterion_9),
    ];
    let mut failures = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            ensure(elapsed <= budget, || format!("took {elapsed:?}, budget {budget:?}"))
        });
        match &outcome {
            Ok(()) => println!("PASS  criterion {name} ({elapsed:.2?})"),
            Err(msg) => {
                println!("FAIL  criterion {name} ({elapsed:.2?}): {msg}");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
