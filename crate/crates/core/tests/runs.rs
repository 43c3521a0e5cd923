use esc_core::arith::{crt_solve, lcm_list};
use esc_core::conjectures::{in_set_b, DEFAULT_SEARCH_BOUND};
use esc_core::identities::verify_decomposition;
use esc_core::runs::{build_run, build_type2_run, square_split, verify_run, RunCertificate};
use esc_core::{Congruence, Error, WideInt};
use proptest::prelude::*;

#[test]
fn runs_verify_and_cover() {
    for length in 1..=8 {
        for start in 0..=5 {
            let cert = build_run(length, start).unwrap();
            assert!(
                verify_run(&cert, 50).unwrap(),
                "length {length} start {start}"
            );
            for class in &cert.q_classes {
                // least positive member plus a few more, checked by search
                let first = if class.residue == 0 {
                    class.modulus
                } else {
                    class.residue
                };
                for k in 0..3 {
                    let q = first + k * class.modulus;
                    assert!(in_set_b(q, DEFAULT_SEARCH_BOUND).is_some(), "q = {q}");
                }
            }
        }
    }
}

#[test]
fn classes_are_consecutive() {
    let cert = build_run(8, 3).unwrap();
    let rs: Vec<WideInt> = cert.q_classes.iter().map(|c| c.residue).collect();
    for w in rs.windows(2) {
        assert_eq!((w[0] - w[1]).rem_euclid(cert.t), 1);
    }
}

#[test]
fn pairwise_compatible() {
    for bi in 0..=200 {
        for bj in bi + 1..=200 {
            let sys = [
                Congruence::new(4 * bi + 3, 3 * bi + 2).unwrap(),
                Congruence::new(4 * bj + 3, 3 * bj + 2).unwrap(),
            ];
            assert!(crt_solve(&sys).is_ok(), "β = {bi}, {bj}");
        }
    }
}

#[test]
fn tampering_detected() {
    let cert = build_run(4, 0).unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    let mut bad: RunCertificate = serde_json::from_str(&json).unwrap();
    bad.t += 1;
    assert!(!verify_run(&bad, 5).unwrap());
    let mut bad = cert.clone();
    bad.betas[2] = 7;
    assert!(verify_run(&bad, 5).is_err());
    assert!(serde_json::from_str::<RunCertificate>(&json.replace("\"T\"", "\"t\"")).is_err());
    assert!(build_run(0, 0).is_err());
}

#[test]
fn type2_windows() {
    let (mut not_type2, mut too_small, mut built) = (Vec::new(), 0, 0);
    for len in 1..=5 {
        for start in 1..=30 - len + 1 {
            let window: Vec<WideInt> = (start..start + len).collect();
            let run = match build_type2_run(&window) {
                Ok(r) => r,
                Err(Error::Domain(_)) => {
                    // Tδ with the smallest admissible δ can fall below 4a + 2
                    let t = lcm_list(
                        &window
                            .iter()
                            .map(|&a| {
                                let (b, g) = square_split(a).unwrap();
                                4 * b * g - 1
                            })
                            .collect::<Vec<_>>(),
                    )
                    .unwrap();
                    let td = if t % 4 == 1 { t } else { 3 * t };
                    assert!(td - 4 * window[len as usize - 1] < 2, "window {window:?}");
                    too_small += 1;
                    continue;
                }
                Err(e) => panic!("window {window:?}: {e}"),
            };
            built += 1;
            assert_eq!(run.t * run.delta % 4, 1);
            let ns: Vec<WideInt> = run.members.iter().map(|m| m.n).collect();
            for (w, m) in ns.windows(2).zip(run.members.windows(2)) {
                assert_eq!(w[0] - w[1], 4 * (m[1].a - m[0].a));
            }
            for m in &run.members {
                assert!(verify_decomposition(&m.decomposition), "a = {}", m.a);
                if !m.is_type2() {
                    not_type2.push(m.n);
                }
            }
        }
    }
    assert!(
        not_type2.is_empty(),
        "members not classified Type II: {not_type2:?}"
    );
    assert!(
        built > 100 && too_small > 0,
        "built {built}, too small {too_small}"
    );
}

proptest! {
    #[test]
    fn square_split_exact(a in 1i128..1_000_000) {
        let (b, g) = square_split(a).unwrap();
        prop_assert_eq!(b * b * g, a);
        // γ squarefree
        let mut d = 2;
        while d * d <= g {
            prop_assert!(g % (d * d) != 0);
            d += 1;
        }
    }
}
