//! Acceptance gate: twelve independently checkable criteria, one test and
//! one pass line each. Tolerances and runtime bounds are asserted in-test.

use std::process::Command;
use std::time::Instant;

use qtel_cli::config::load_config;
use qtel_cli::scenario::{assemble, ScenarioMode};
use qtel_core::{
    apply_sender_unitary, collapse_branch, condition_residual, epr_product_resource, feasibility,
    maximally_entangled_resource, measure_alice, prepare_joint, random_state,
    resource_from_matrix, run_protocol, run_session, run_with, synthesize, synthesize_forced,
    Complex64, ComplexMatrix, ComplexVector, Error, OutcomeFrame, PhaseTensor, RunMode, Transport,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scenario_path(name: &str) -> String {
    format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn load_scenario(name: &str, seed: u64) -> qtel_cli::scenario::Scenario {
    let config = load_config(scenario_path(name).as_ref()).unwrap();
    assemble(&config, Some(seed), None).unwrap()
}

fn diag_resource(weights: &[f64]) -> qtel_core::ResourceMatrix {
    let mut m = ComplexMatrix::zeros(weights.len(), weights.len());
    for (i, w) in weights.iter().enumerate() {
        m.set(i, i, c(w.sqrt(), 0.0));
    }
    resource_from_matrix(m).unwrap()
}

/// True when a == phase * b for some unimodular phase, entrywise within tol.
fn equal_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return false;
    }
    let mut phase = None;
    let mut best = 0.0;
    for r in 0..b.rows() {
        for col in 0..b.cols() {
            let v = b.get(r, col);
            if v.norm() > best {
                best = v.norm();
                phase = Some(a.get(r, col) / v);
            }
        }
    }
    let Some(phase) = phase else { return false };
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    let mut diff = 0.0_f64;
    for r in 0..a.rows() {
        for col in 0..a.cols() {
            diff = diff.max((a.get(r, col) - phase * b.get(r, col)).norm());
        }
    }
    diff <= tol
}

#[test]
fn criterion_01_two_level_recovery_set() {
    let start = Instant::now();
    let resource = maximally_entangled_resource(2).unwrap();
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let (_, family) = synthesize(&resource, 2, &phases).unwrap();

    let one = c(1.0, 0.0);
    let eye = ComplexMatrix::identity(2);
    let mut flip = ComplexMatrix::zeros(2, 2);
    flip.set(0, 1, one);
    flip.set(1, 0, one);
    let mut sign = ComplexMatrix::identity(2);
    sign.set(1, 1, -one);
    let mut iy = ComplexMatrix::zeros(2, 2);
    iy.set(0, 1, one);
    iy.set(1, 0, -one);

    for (i, k, reference, name) in [
        (1, 1, &eye, "I"),
        (1, 2, &flip, "X"),
        (2, 1, &sign, "Z"),
        (2, 2, &iy, "iY"),
    ] {
        let op = family.operator(i, k).unwrap();
        assert!(
            equal_up_to_phase(op, reference, 1e-12),
            "operator ({i}, {k}) is not {name} up to a phase"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 01 two-level-recovery-set: PASS ({elapsed:?})");
}

#[test]
fn criterion_02_exact_transfer_across_dimensions() {
    let start = Instant::now();
    for n in [1usize, 2, 3, 4, 5, 8] {
        let resource = maximally_entangled_resource(n).unwrap();
        let phases = PhaseTensor::fourier(n, n).unwrap();
        let (unitary, family) = synthesize(&resource, n, &phases).unwrap();
        let uniform = 1.0 / (n * n) as f64;
        for seed in 0..20 {
            let psi = random_state(n, seed).unwrap();
            let report = run_with(&psi, &resource, &unitary, &family, RunMode::Exhaustive).unwrap();
            assert_eq!(report.branches.len(), n * n);
            for b in &report.branches {
                assert!(
                    (b.probability - uniform).abs() <= 1e-10,
                    "n={n} seed={seed} branch ({}, {}) probability {}",
                    b.i,
                    b.k,
                    b.probability
                );
                assert!(
                    b.fidelity >= 1.0 - 1e-10,
                    "n={n} seed={seed} branch ({}, {}) fidelity {}",
                    b.i,
                    b.k,
                    b.fidelity
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("acceptance 02 exact-transfer-across-dimensions: PASS ({elapsed:?})");
}

#[test]
fn criterion_03_condition_residual_alpha_independence() {
    for n in [1usize, 2, 3, 4, 5, 8] {
        let resource = maximally_entangled_resource(n).unwrap();
        let phases = PhaseTensor::fourier(n, n).unwrap();
        let (unitary, _) = synthesize(&resource, n, &phases).unwrap();
        for seed in 0..50 {
            let psi = random_state(n, 1000 + seed).unwrap();
            let residual = condition_residual(&unitary, &resource, &phases, &psi).unwrap();
            assert!(residual <= 1e-10, "n={n} seed={seed} residual {residual:.3e}");
        }
    }
    println!("acceptance 03 condition-residual: PASS");
}

#[test]
fn criterion_04_unitarity_for_all_bundled_scenarios() {
    let names = [
        "bennett-n2",
        "maximal-n3",
        "maximal-n5",
        "epr-product-m2",
        "epr-product-m3",
        "partial-epr-pair",
        "ghz-epr-pair",
        "infeasible-lambda-07",
    ];
    for name in names {
        let sc = load_scenario(name, 0);
        let (unitary, family) = match synthesize(&sc.resource, sc.n1, &sc.phases) {
            Ok(pair) => pair,
            Err(Error::Infeasible { .. }) => {
                synthesize_forced(&sc.resource, sc.n1, &sc.phases).unwrap()
            }
            Err(e) => panic!("{name}: {e}"),
        };
        assert!(
            unitary.matrix().unitarity_defect().unwrap() <= 1e-10,
            "{name}: sender unitary"
        );
        assert!(
            family.receiver_correction().unitarity_defect().unwrap() <= 1e-10,
            "{name}: receiver frame"
        );
        for i in 1..=family.n1() {
            for k in 1..=family.n2() {
                assert!(
                    family.operator(i, k).unwrap().unitarity_defect().unwrap() <= 1e-10,
                    "{name}: recovery ({i}, {k})"
                );
            }
        }
    }
    println!("acceptance 04 unitarity-all-scenarios: PASS");
}

#[test]
fn criterion_05_unbalanced_resources_fail_and_underperform() {
    for lam in [0.6, 0.7, 0.9] {
        let resource = diag_resource(&[lam, 1.0 - lam]);
        let verdict = feasibility(&resource, 2).unwrap();
        assert!(!verdict.feasible, "lambda {lam} must be infeasible");
    }

    let resource = diag_resource(&[0.7, 0.3]);
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let (unitary, family) = synthesize_forced(&resource, 2, &phases).unwrap();
    // A generic input: both levels carry real weight, so the deficit term
    // 2uv(1 - 2 sigma1 sigma2) stays far above the threshold.
    let psi = (0..)
        .map(|seed| random_state(2, seed).unwrap())
        .find(|s| {
            let u = s.amplitude(0).norm_sqr();
            (0.2..=0.8).contains(&u)
        })
        .unwrap();
    let report = run_with(&psi, &resource, &unitary, &family, RunMode::Exhaustive).unwrap();
    assert!(
        report.mean_fidelity < 1.0 - 1e-6,
        "mean fidelity {} is too good for a tilted resource",
        report.mean_fidelity
    );
    assert!(report.mean_fidelity > 0.5, "sanity: still better than guessing");
    println!(
        "acceptance 05 unbalanced-infeasible-and-subunit: PASS (mean fidelity {:.6})",
        report.mean_fidelity
    );
}

#[test]
fn criterion_06_pair_products_build_power_of_two_resources() {
    for m in [1usize, 2, 3] {
        let product = epr_product_resource(m).unwrap();
        let direct = maximally_entangled_resource(1 << m).unwrap();
        assert!(
            product.matrix().max_abs_diff(direct.matrix()) < 1e-12,
            "m={m}"
        );
    }
    let sc = load_scenario("epr-product-m2", 0);
    let report = run_protocol(&sc.input, &sc.resource, &sc.phases, RunMode::Exhaustive).unwrap();
    assert_eq!(report.branches.len(), 16);
    for b in &report.branches {
        assert!(b.fidelity >= 1.0 - 1e-10, "branch ({}, {})", b.i, b.k);
    }
    println!("acceptance 06 pair-product-decomposition: PASS");
}

#[test]
fn criterion_07_partial_support_reaches_unit_fidelity() {
    let start = Instant::now();
    for (name, targets) in [("partial-epr-pair", [3usize, 2]), ("ghz-epr-pair", [1, 4])] {
        let sc = load_scenario(name, 7);
        assert_eq!(sc.n1, 2);
        let (unitary, family) = synthesize(&sc.resource, sc.n1, &sc.phases).unwrap();
        let report = run_with(&sc.input, &sc.resource, &unitary, &family, RunMode::Exhaustive)
            .unwrap();
        assert_eq!(report.branches.len(), 4);
        for b in &report.branches {
            assert!(b.fidelity >= 1.0 - 1e-10, "{name} branch ({}, {})", b.i, b.k);
        }
        // The carried amplitudes land exactly on the paired receiver levels.
        for (slot, &level) in targets.iter().enumerate() {
            let got = report.target.amplitude(level - 1);
            let want = sc.input.amplitude(slot);
            assert!((got - want).norm() < 1e-12, "{name} level {level}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 07 partial-support-injections: PASS ({elapsed:?})");
}

#[test]
fn criterion_08_measurement_matches_explicit_projectors() {
    let resource = maximally_entangled_resource(2).unwrap();
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let (unitary, _) = synthesize(&resource, 2, &phases).unwrap();
    let psi = random_state(2, 77).unwrap();
    let joint = prepare_joint(&psi, &resource).unwrap();
    let post = apply_sender_unitary(&joint, &unitary, 2).unwrap();

    // Independent oracle: explicit 8x8 projectors (|i,k><i,k| tensor I) on
    // the flattened joint space.
    let brute = |i: usize, k: usize| -> (f64, ComplexVector) {
        let mut projector = ComplexMatrix::zeros(8, 8);
        for q in 0..2 {
            let idx = ((i - 1) * 2 + (k - 1)) * 2 + q;
            projector.set(idx, idx, c(1.0, 0.0));
        }
        let projected = projector.matvec(post_ref(&post)).unwrap();
        let p = projected.norm_sq();
        let base = ((i - 1) * 2 + (k - 1)) * 2;
        let mut state = ComplexVector::zeros(2);
        for q in 0..2 {
            state.set(q, projected.get(base + q) * c(1.0 / p.sqrt(), 0.0));
        }
        (p, state)
    };
    fn post_ref(v: &ComplexVector) -> &ComplexVector {
        v
    }

    // Compare against collapse on all four branches.
    for i in 1..=2 {
        for k in 1..=2 {
            let (p, state) = collapse_branch(&post, 2, 2, 2, i, k).unwrap();
            let (bp, bstate) = brute(i, k);
            assert!((p - bp).abs() < 1e-12);
            assert!(state.unwrap().max_abs_diff(&bstate) < 1e-12);
        }
    }

    // And against sampled measurement until every outcome was observed.
    use rand::SeedableRng;
    let mut seen = [[false; 2]; 2];
    for seed in 0..200 {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let (outcome, state) = measure_alice(&post, 2, 2, 2, &mut rng).unwrap();
        let (bp, bstate) = brute(outcome.i, outcome.k);
        assert!((outcome.probability - bp).abs() < 1e-12);
        assert!(state.max_abs_diff(&bstate) < 1e-12);
        seen[outcome.i - 1][outcome.k - 1] = true;
        if seen.iter().flatten().all(|&s| s) {
            break;
        }
    }
    assert!(seen.iter().flatten().all(|&s| s), "some outcome never sampled");
    println!("acceptance 08 projector-oracle-equivalence: PASS");
}

#[test]
fn criterion_09_two_level_unitary_is_hadamard_after_cnot() {
    let resource = maximally_entangled_resource(2).unwrap();
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let (unitary, _) = synthesize(&resource, 2, &phases).unwrap();

    let inv = 1.0 / 2.0_f64.sqrt();
    let mut hadamard = ComplexMatrix::zeros(2, 2);
    hadamard.set(0, 0, c(inv, 0.0));
    hadamard.set(0, 1, c(inv, 0.0));
    hadamard.set(1, 0, c(inv, 0.0));
    hadamard.set(1, 1, c(-inv, 0.0));
    let h_i = hadamard.tensor(&ComplexMatrix::identity(2));

    // Control on the input system, target on the resource half.
    let mut cnot = ComplexMatrix::identity(4);
    cnot.set(2, 2, c(0.0, 0.0));
    cnot.set(3, 3, c(0.0, 0.0));
    cnot.set(2, 3, c(1.0, 0.0));
    cnot.set(3, 2, c(1.0, 0.0));

    let h_after_cnot = h_i.mul(&cnot).unwrap();
    let cnot_after_h = cnot.mul(&h_i).unwrap();

    let matches_first = equal_up_to_phase(unitary.matrix(), &h_after_cnot, 1e-12);
    let matches_second = equal_up_to_phase(unitary.matrix(), &cnot_after_h, 1e-12);
    assert!(
        matches_first || matches_second,
        "no ordering of CNOT and Hadamard matches"
    );
    let ordering = if matches_first {
        "(H tensor I) applied after CNOT"
    } else {
        "CNOT applied after (H tensor I)"
    };
    println!("acceptance 09 cnot-hadamard-equivalence: PASS (ordering: {ordering})");
}

#[test]
fn criterion_10_channel_roundtrip_and_session_parity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4242);
    for _ in 0..1000 {
        let n1 = rng.gen_range(1..=512usize);
        let n2 = rng.gen_range(1..=512usize);
        let i = rng.gen_range(1..=n1);
        let k = rng.gen_range(1..=n2);
        let frame = OutcomeFrame::new(n1, n2, i, k).unwrap();
        assert_eq!(OutcomeFrame::decode(&frame.encode()).unwrap(), frame);
    }

    let good = OutcomeFrame::new(3, 3, 1, 2).unwrap().encode();
    let mut corrupted = good;
    corrupted[12] ^= 0x01;
    assert!(matches!(
        OutcomeFrame::decode(&corrupted),
        Err(Error::Corruption(_))
    ));
    let mut bad_magic = good;
    bad_magic[0] = 0x00;
    assert!(matches!(
        OutcomeFrame::decode(&bad_magic),
        Err(Error::Protocol(_))
    ));

    let resource = maximally_entangled_resource(2).unwrap();
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let (unitary, family) = synthesize(&resource, 2, &phases).unwrap();
    let psi = random_state(2, 55).unwrap();
    let exhaustive = run_with(&psi, &resource, &unitary, &family, RunMode::Exhaustive).unwrap();
    let transports = [
        Transport::Memory,
        Transport::Tcp {
            host: "127.0.0.1".into(),
            port: 0,
        },
    ];
    for transport in &transports {
        for seed in 0..5 {
            let session =
                run_session(&psi, &resource, &unitary, &family, seed, transport).unwrap();
            let branch = exhaustive
                .branches
                .iter()
                .find(|b| b.i == session.outcome_i && b.k == session.outcome_k)
                .unwrap();
            assert!(
                (session.fidelity - branch.fidelity).abs() < 1e-12,
                "{transport:?} seed {seed}"
            );
        }
    }
    println!("acceptance 10 channel-roundtrip-and-session-parity: PASS");
}

#[test]
fn criterion_11_sampled_uniformity_chi_square() {
    let resource = maximally_entangled_resource(2).unwrap();
    let phases = PhaseTensor::fourier(2, 2).unwrap();
    let psi = random_state(2, 2026).unwrap();
    let draws = 20000usize;
    let report = run_protocol(
        &psi,
        &resource,
        &phases,
        RunMode::Sampled {
            count: draws,
            seed: 2026,
        },
    )
    .unwrap();
    let mut counts = [[0usize; 2]; 2];
    for b in &report.branches {
        counts[b.i - 1][b.k - 1] += 1;
    }
    let expected = draws as f64 / 4.0;
    let chi2: f64 = counts
        .iter()
        .flatten()
        .map(|&n| {
            let d = n as f64 - expected;
            d * d / expected
        })
        .sum();
    // df = 3, significance 0.001.
    assert!(chi2 < 16.266, "chi-square {chi2:.3} (counts {counts:?})");
    println!("acceptance 11 sampled-uniformity: PASS (chi-square {chi2:.3})");
}

#[test]
fn criterion_12_machine_output_is_byte_deterministic() {
    for name in ["bennett-n2", "maximal-n3"] {
        let path = scenario_path(name);
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_qtel"))
                .args(["run", "--format", "jsonl", "--seed", "9", &path])
                .env_remove("QT_TOL")
                .output()
                .unwrap();
            assert!(out.status.success(), "{name}");
            out.stdout
        };
        let first = run();
        let second = run();
        assert!(!first.is_empty());
        assert_eq!(first, second, "{name}: outputs differ between runs");
    }
    println!("acceptance 12 byte-deterministic-output: PASS");
}

#[test]
fn scenario_modes_assemble_for_every_bundled_file() {
    for name in [
        "bennett-n2",
        "maximal-n3",
        "maximal-n5",
        "epr-product-m2",
        "epr-product-m3",
        "partial-epr-pair",
        "ghz-epr-pair",
        "infeasible-lambda-07",
    ] {
        let sc = load_scenario(name, 0);
        assert_eq!(sc.mode, ScenarioMode::Exhaustive, "{name}");
        assert!(sc.n1 >= 1);
    }
}
