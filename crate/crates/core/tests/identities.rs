use esc_core::identities::{
    check_witness, lemma4_holds, p_poly, q_poly, shift_witness, split_unit_fraction,
    two_term_for_3, two_term_for_4_3mod4, type1_from_abc, verify_decomposition,
};
use esc_core::{Decomposition, DecompositionKind, ParamWitness, WideInt, WitnessFamily};
use proptest::prelude::*;

/// `3/n = 1/x + 1/y` by scanning every admissible `x`.
fn two_term_3_oracle(n: WideInt) -> bool {
    (n / 3 + 1..=2 * n / 3).any(|x| (n * x) % (3 * x - n) == 0)
}

#[test]
fn q_and_p_polynomials_agree() {
    for a in 0..=30 {
        for b in 0..=30 {
            for g in 0..=30 {
                assert_eq!(4 * q_poly(a, b, g) + 5, p_poly(a, b, g), "({a},{b},{g})");
            }
        }
    }
}

#[test]
fn type1_family_exhaustive() {
    let mut count = 0;
    for a in 1..=25 {
        for b in 1..=25 {
            for c in 1..=25 {
                if (b * c) % 4 != 1 || a * b * c - a - b < 2 {
                    assert!(type1_from_abc(a, b, c).is_err());
                    continue;
                }
                let d = type1_from_abc(a, b, c).unwrap();
                assert_eq!(d.n, a * b * c - a - b);
                assert!(verify_decomposition(&d), "({a},{b},{c})");
                count += 1;
            }
        }
    }
    assert!(count > 1000);
}

#[test]
fn two_term_3_matches_scan() {
    for n in 2..=3000 {
        let got = two_term_for_3(n);
        assert_eq!(got.is_some(), two_term_3_oracle(n), "n = {n}");
        if let Some((x, y)) = got {
            assert_eq!(3 * x * y, n * (x + y), "n = {n}");
        }
    }
}

#[test]
fn two_term_3_counterexample_to_mod6_rule() {
    // 25 ≡ 1 (mod 6) yet 3/25 = 1/10 + 1/50.
    assert!(two_term_3_oracle(25));
    assert_eq!(two_term_for_3(25), Some((10, 50)));
    // 7 and 13 have only divisors ≡ 1 (mod 3).
    assert_eq!(two_term_for_3(7), None);
    assert_eq!(two_term_for_3(91), None);
}

#[test]
fn three_mod_4_two_term() {
    for q in 0..=10_000 {
        let d = two_term_for_4_3mod4(q).unwrap();
        assert_eq!(d.n, 4 * q + 3);
        assert!(verify_decomposition(&d));
        assert_eq!(d.kind, DecompositionKind::TwoTerm);
    }
}

#[test]
fn lemma4_system_brute_force() {
    let mut hits = 0;
    for n in 2..=300 {
        for x in 1..=12 {
            for t in 1..=12 {
                for lambda in 1..=2 * n {
                    if !lemma4_holds(n, x, t, lambda) {
                        continue;
                    }
                    hits += 1;
                    let w = ParamWitness::new(WitnessFamily::Lemma4System, [x, t, lambda]);
                    let d = check_witness(n, &w).unwrap().expect("system holds");
                    assert!(verify_decomposition(&d), "n={n} ({x},{t},{lambda})");
                    let shifted = shift_witness(n, x, t, lambda, 3).unwrap();
                    assert!(lemma4_holds(shifted, x, t, lambda));
                }
            }
        }
    }
    assert!(hits > 100);
}

#[test]
fn parametric_families_forward() {
    // Every parameter tuple defines an n; the witness must reproduce it.
    let mut checked = 0;
    for a in 1..=6 {
        for b in 1..=6 {
            for c in 1..=6 {
                for d in 1..=6 {
                    let n = (4 * a * b * c - 1) * d - 4 * b * b * c;
                    if n >= 2 && a * d > b {
                        let w = ParamWitness::new(WitnessFamily::EqTipoDos, [a, b, c, d]);
                        let dec = check_witness(n, &w)
                            .unwrap()
                            .expect("defining equation holds");
                        assert!(verify_decomposition(&dec));
                        checked += 1;
                    }
                    let lhs = (4 * a * b * c - 1) * d;
                    if lhs % (a + b) == 0 && lhs / (a + b) >= 2 {
                        let w = ParamWitness::new(WitnessFamily::Lemma1Eq21, [a, b, c, d]);
                        let dec = check_witness(lhs / (a + b), &w).unwrap().unwrap();
                        assert!(verify_decomposition(&dec));
                        checked += 1;
                    }
                    if (lhs - b) % a == 0 && (lhs - b) / a >= 2 {
                        let w = ParamWitness::new(WitnessFamily::Lemma1Eq22, [a, b, c, d]);
                        let dec = check_witness((lhs - b) / a, &w).unwrap().unwrap();
                        assert!(verify_decomposition(&dec));
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 500);
}

#[test]
fn pol_p_witnesses_for_small_primes() {
    // Every prime p ≡ 1 (mod 4) below 1000 has a PolP witness.
    for p in (5..1000).step_by(4) {
        if !esc_core::arith::is_prime(p) {
            continue;
        }
        let q = (p - 5) / 4;
        let Some((a, b, g)) = esc_core::conjectures::n1_contains(p) else {
            panic!("prime {p} (q = {q}) has no witness");
        };
        let w = ParamWitness::new(WitnessFamily::PolP, [a, b, g]);
        let d = check_witness(p, &w).unwrap().unwrap();
        assert!(verify_decomposition(&d));
    }
}

#[test]
fn witness_shape_errors() {
    let w = ParamWitness::new(WitnessFamily::EqTipoI, [1, 3]);
    assert!(check_witness(5, &w).is_err());
    let w = ParamWitness::new(WitnessFamily::EqTipoI, [0, 3, 3]);
    assert!(check_witness(5, &w).is_err());
    let w = ParamWitness::new(WitnessFamily::EqTipoI, [1, 3, 3]);
    assert!(check_witness(6, &w).unwrap().is_none());
}

#[test]
fn witness_json_roundtrip() {
    let w = ParamWitness::new(WitnessFamily::PolP, [0, 1, 2]);
    let s = serde_json::to_string(&w).unwrap();
    assert_eq!(s, r#"{"family":"pol-p","params":["0","1","2"]}"#);
    assert_eq!(serde_json::from_str::<ParamWitness>(&s).unwrap(), w);
}

proptest! {
    #[test]
    fn split_unit_fraction_exact(a in 1i128..1000, b in 1i128..1000, c in 1i128..1000) {
        let (u, v) = split_unit_fraction(a, b, c).unwrap();
        // 1/(abc) = 1/u + 1/v
        prop_assert_eq!(u * v, a * b * c * (u + v));
    }

    #[test]
    fn lift_preserves_validity(q in 0i128..100_000, k in 1i128..1000) {
        let d = two_term_for_4_3mod4(q).unwrap();
        let lifted: Decomposition = d.lift(k).unwrap();
        prop_assert_eq!(lifted.n, d.n * k);
        prop_assert!(verify_decomposition(&lifted));
    }

    #[test]
    fn type1_random(a in 1i128..10_000, b4 in 0i128..10_000, c4 in 0i128..10_000) {
        let (b, c) = (4 * b4 + 3, 4 * c4 + 3);
        let d = type1_from_abc(a, b, c).unwrap();
        prop_assert!(verify_decomposition(&d));
    }
}
