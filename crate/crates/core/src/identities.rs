//! Closed-form decompositions of `4/n` and the checkers for every
//! parametric witness family.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, WideInt};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecompositionKind {
    TypeI,
    TypeII,
    TwoTerm,
    General,
}

/// `4/n = 1/x + 1/y (+ 1/z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub n: WideInt,
    pub x: WideInt,
    pub y: WideInt,
    pub z: Option<WideInt>,
    pub kind: DecompositionKind,
}

impl Decomposition {
    /// Three-term decomposition; the kind is read off from how many
    /// denominators `n` divides.
    pub fn three(n: WideInt, x: WideInt, y: WideInt, z: WideInt) -> Self {
        let kind = classify(n, &[x, y, z]);
        Decomposition {
            n,
            x,
            y,
            z: Some(z),
            kind,
        }
    }

    pub fn two(n: WideInt, x: WideInt, y: WideInt) -> Self {
        Decomposition {
            n,
            x,
            y,
            z: None,
            kind: DecompositionKind::TwoTerm,
        }
    }

    pub fn denominators(&self) -> Vec<WideInt> {
        let mut d = vec![self.x, self.y];
        d.extend(self.z);
        d
    }

    /// Same fractions scaled to `4/(k n) = (1/k) * 4/n`.
    pub fn lift(&self, k: WideInt) -> Result<Decomposition> {
        let n = checked_mul(self.n, k)?;
        let x = checked_mul(self.x, k)?;
        let y = checked_mul(self.y, k)?;
        Ok(match self.z {
            Some(z) => Decomposition::three(n, x, y, checked_mul(z, k)?),
            None => Decomposition::two(n, x, y),
        })
    }
}

pub fn classify(n: WideInt, denominators: &[WideInt]) -> DecompositionKind {
    if denominators.len() == 2 {
        return DecompositionKind::TwoTerm;
    }
    match denominators
        .iter()
        .filter(|&&d| n != 0 && d % n == 0)
        .count()
    {
        1 => DecompositionKind::TypeI,
        2 => DecompositionKind::TypeII,
        _ => DecompositionKind::General,
    }
}

fn checked_mul(a: WideInt, b: WideInt) -> Result<WideInt> {
    a.checked_mul(b)
        .ok_or(Error::Overflow("decomposition arithmetic"))
}

fn mul_all(xs: &[WideInt]) -> Result<WideInt> {
    xs.iter().try_fold(1, |acc, &x| checked_mul(acc, x))
}

/// Exact check of `numerator/n = sum of 1/d` over two or three denominators,
/// done in arbitrary precision so no product can overflow.
pub fn verify_fraction(numerator: &BigInt, n: &BigInt, denominators: &[BigInt]) -> bool {
    let zero = BigInt::from(0);
    if *n < BigInt::from(1) || denominators.iter().any(|d| *d <= zero) {
        return false;
    }
    match denominators {
        [x, y] => numerator * x * y == n * (x + y),
        [x, y, z] => numerator * x * y * z == n * (x * y + y * z + z * x),
        _ => false,
    }
}

pub fn verify_decomposition(d: &Decomposition) -> bool {
    let dens: Vec<BigInt> = d.denominators().into_iter().map(BigInt::from).collect();
    verify_fraction(&BigInt::from(4), &BigInt::from(d.n), &dens)
}

/// A pair `(x, y)` with `3/n = 1/x + 1/y`, or `None` if none exists.
///
/// Solvable exactly when `n` has a divisor `m ≡ 0` or `m ≡ 2 (mod 3)`; the
/// pair is built from the smallest such divisor.
pub fn two_term_for_3(n: WideInt) -> Option<(WideInt, WideInt)> {
    if n < 2 {
        return None;
    }
    let divs = divisors(n).ok()?;
    let m = divs.into_iter().find(|m| m % 3 != 1)?;
    let k = n / m;
    if m % 3 == 0 {
        // 3/m = 1/(m/3) = 2/(2m/3)
        let x = 2 * k * (m / 3);
        Some((x, x))
    } else {
        // 3/m = 1/((m+1)/3) + 1/(m(m+1)/3)
        let base = (m + 1) / 3;
        Some((k * base, k * m * base))
    }
}

/// `4/(4q+3) = 1/(q+1) + 1/((q+1)(4q+3))`.
pub fn two_term_for_4_3mod4(q: WideInt) -> Result<Decomposition> {
    if q < 0 {
        return Err(Error::domain(format!("q = {q} must be non-negative")));
    }
    let n = checked_mul(4, q)? + 3;
    Ok(Decomposition::two(n, q + 1, checked_mul(q + 1, n)?))
}

/// `1/(abc) = 1/(a(a+b)c) + 1/(b(a+b)c)`.
pub fn split_unit_fraction(a: WideInt, b: WideInt, c: WideInt) -> Result<(WideInt, WideInt)> {
    if a < 1 || b < 1 || c < 1 {
        return Err(Error::domain("split_unit_fraction needs positive a, b, c"));
    }
    Ok((mul_all(&[a, a + b, c])?, mul_all(&[b, a + b, c])?))
}

/// The Type I family for `n = abc - a - b` with `bc ≡ 1 (mod 4)`:
///
/// ```text
/// 4/n = 1/(a(bc-1)/4) + 1/(a(ac-1)(bc-1)/4) + 1/((ac-1)(bc-1)/4 · n)
/// ```
pub fn type1_from_abc(a: WideInt, b: WideInt, c: WideInt) -> Result<Decomposition> {
    if a < 1 || b < 1 || c < 1 {
        return Err(Error::domain("type1_from_abc needs positive a, b, c"));
    }
    let bc = checked_mul(b, c)?;
    if bc % 4 != 1 {
        return Err(Error::precondition(format!(
            "b·c = {bc} is not ≡ 1 (mod 4)"
        )));
    }
    let n = checked_mul(a, bc)? - a - b;
    if n < 2 {
        return Err(Error::domain(format!("n = abc - a - b = {n} is below 2")));
    }
    let quarter = (bc - 1) / 4;
    let ac1 = checked_mul(a, c)? - 1;
    let x = checked_mul(a, quarter)?;
    let y = mul_all(&[a, ac1, quarter])?;
    let z = mul_all(&[ac1, quarter, n])?;
    Ok(Decomposition::three(n, x, y, z))
}

/// `p(α,β,γ) = (α+1)(4β+3)(4γ+3) − (α+1) − (4β+3)`.
pub fn p_poly(alpha: WideInt, beta: WideInt, gamma: WideInt) -> WideInt {
    (alpha + 1) * (4 * beta + 3) * (4 * gamma + 3) - (alpha + 1) - (4 * beta + 3)
}

/// `q(α,β,γ) = ((4β+3)γ + 3β+2)(α+1) − (β+2)`, so that `4q + 5 = p`.
pub fn q_poly(alpha: WideInt, beta: WideInt, gamma: WideInt) -> WideInt {
    ((4 * beta + 3) * gamma + 3 * beta + 2) * (alpha + 1) - (beta + 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessFamily {
    /// `(4abc − 1)d = (a + b)n`
    Lemma1Eq21,
    /// `(4abc − 1)d = an + b`
    Lemma1Eq22,
    /// `δn = (4αβγδ − 1) − 4α²γ`
    EqTipoTres,
    /// `n = (4αβγ − 1)δ − 4β²γ`
    EqTipoDos,
    /// `n = abc − a − b`, `bc ≡ 1 (mod 4)`
    EqTipoI,
    /// `n = p(α, β, γ)`
    PolP,
    /// `(xn + t)/λ` and `(n + λ)/(4xt)` both positive integers
    Lemma4System,
}

impl WitnessFamily {
    const ALL: [WitnessFamily; 7] = [
        WitnessFamily::Lemma1Eq21,
        WitnessFamily::Lemma1Eq22,
        WitnessFamily::EqTipoTres,
        WitnessFamily::EqTipoDos,
        WitnessFamily::EqTipoI,
        WitnessFamily::PolP,
        WitnessFamily::Lemma4System,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessFamily::Lemma1Eq21 => "lemma1-eq21",
            WitnessFamily::Lemma1Eq22 => "lemma1-eq22",
            WitnessFamily::EqTipoTres => "eq-tipo-tres",
            WitnessFamily::EqTipoDos => "eq-tipo-dos",
            WitnessFamily::EqTipoI => "eq-tipo-i",
            WitnessFamily::PolP => "pol-p",
            WitnessFamily::Lemma4System => "lemma4-system",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            WitnessFamily::Lemma1Eq21
            | WitnessFamily::Lemma1Eq22
            | WitnessFamily::EqTipoTres
            | WitnessFamily::EqTipoDos => 4,
            WitnessFamily::EqTipoI | WitnessFamily::PolP | WitnessFamily::Lemma4System => 3,
        }
    }

    fn min_param(self) -> WideInt {
        if self == WitnessFamily::PolP {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WitnessFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WitnessFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown witness family {s:?}"))
    }
}

impl Serialize for WitnessFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for WitnessFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamWitness {
    pub family: WitnessFamily,
    #[serde(with = "crate::decimal::vec")]
    pub params: Vec<WideInt>,
}

impl ParamWitness {
    pub fn new(family: WitnessFamily, params: impl Into<Vec<WideInt>>) -> Self {
        ParamWitness {
            family,
            params: params.into(),
        }
    }
}

fn eq21_decomposition(
    n: WideInt,
    a: WideInt,
    b: WideInt,
    c: WideInt,
    d: WideInt,
) -> Result<Decomposition> {
    Ok(Decomposition::three(
        n,
        mul_all(&[a, b, c, n])?,
        mul_all(&[b, c, d])?,
        mul_all(&[a, c, d])?,
    ))
}

fn eq22_decomposition(
    n: WideInt,
    a: WideInt,
    b: WideInt,
    c: WideInt,
    d: WideInt,
) -> Result<Decomposition> {
    Ok(Decomposition::three(
        n,
        mul_all(&[a, b, c, n])?,
        mul_all(&[b, c, d])?,
        mul_all(&[a, c, d, n])?,
    ))
}

/// Whether `(x, t, λ)` satisfies the two-divisibility system for `n`.
pub fn lemma4_holds(n: WideInt, x: WideInt, t: WideInt, lambda: WideInt) -> bool {
    if x < 1 || t < 1 || lambda < 1 || n < 1 {
        return false;
    }
    let (Some(xn), Some(xt4)) = (
        x.checked_mul(n),
        x.checked_mul(t).and_then(|v| v.checked_mul(4)),
    ) else {
        return false;
    };
    (xn + t) % lambda == 0 && (n + lambda) % xt4 == 0
}

/// Checks a parametric witness against `n` and, when its defining equation
/// holds, returns the decomposition it induces.
pub fn check_witness(n: WideInt, w: &ParamWitness) -> Result<Option<Decomposition>> {
    let family = w.family;
    if w.params.len() != family.arity() {
        return Err(Error::Shape(format!(
            "{family} takes {} parameters, got {}",
            family.arity(),
            w.params.len()
        )));
    }
    if let Some(bad) = w.params.iter().find(|&&p| p < family.min_param()) {
        return Err(Error::Shape(format!(
            "{family} parameter {bad} out of range"
        )));
    }
    if n < 2 {
        return Err(Error::domain(format!("n = {n} is below 2")));
    }
    let p = &w.params;
    match family {
        WitnessFamily::Lemma1Eq21 => {
            let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
            let lhs = mul_all(&[4, a, b, c])? - 1;
            if checked_mul(lhs, d)? != checked_mul(a + b, n)? {
                return Ok(None);
            }
            eq21_decomposition(n, a, b, c, d).map(Some)
        }
        WitnessFamily::Lemma1Eq22 => {
            let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
            let lhs = mul_all(&[4, a, b, c])? - 1;
            if checked_mul(lhs, d)? != checked_mul(a, n)? + b {
                return Ok(None);
            }
            eq22_decomposition(n, a, b, c, d).map(Some)
        }
        WitnessFamily::EqTipoTres => {
            let (alpha, beta, gamma, delta) = (p[0], p[1], p[2], p[3]);
            let rhs =
                mul_all(&[4, alpha, beta, gamma, delta])? - 1 - mul_all(&[4, alpha, alpha, gamma])?;
            if checked_mul(delta, n)? != rhs {
                return Ok(None);
            }
            // back to (4abc − 1)d = (a + b)n with b = βδ − α, d = β
            let b = checked_mul(beta, delta)? - alpha;
            eq21_decomposition(n, alpha, b, gamma, beta).map(Some)
        }
        WitnessFamily::EqTipoDos => {
            let (alpha, beta, gamma, delta) = (p[0], p[1], p[2], p[3]);
            let rhs = checked_mul(mul_all(&[4, alpha, beta, gamma])? - 1, delta)?
                - mul_all(&[4, beta, beta, gamma])?;
            if n != rhs {
                return Ok(None);
            }
            // back to (4abc − 1)d = an + b with d = αδ − β
            let d = checked_mul(alpha, delta)? - beta;
            eq22_decomposition(n, alpha, beta, gamma, d).map(Some)
        }
        WitnessFamily::EqTipoI => {
            let (a, b, c) = (p[0], p[1], p[2]);
            if checked_mul(b, c)? % 4 != 1 || mul_all(&[a, b, c])? - a - b != n {
                return Ok(None);
            }
            type1_from_abc(a, b, c).map(Some)
        }
        WitnessFamily::PolP => {
            let (alpha, beta, gamma) = (p[0], p[1], p[2]);
            let (a, b, c) = (alpha + 1, 4 * beta + 3, 4 * gamma + 3);
            if mul_all(&[a, b, c])? - a - b != n {
                return Ok(None);
            }
            type1_from_abc(a, b, c).map(Some)
        }
        WitnessFamily::Lemma4System => {
            let (x, t, lambda) = (p[0], p[1], p[2]);
            if !lemma4_holds(n, x, t, lambda) {
                return Ok(None);
            }
            let b = (checked_mul(x, n)? + t) / lambda;
            let c = (n + lambda) / mul_all(&[4, x, t])?;
            eq21_decomposition(n, x, b, c, t).map(Some)
        }
    }
}

/// `N = n + 4xtλj`, which satisfies the same divisibility system as `n`.
pub fn shift_witness(
    n: WideInt,
    x: WideInt,
    t: WideInt,
    lambda: WideInt,
    j: WideInt,
) -> Result<WideInt> {
    if j < 0 {
        return Err(Error::domain(format!(
            "shift count {j} must be non-negative"
        )));
    }
    if !lemma4_holds(n, x, t, lambda) {
        return Err(Error::precondition(format!(
            "(x, t, λ) = ({x}, {t}, {lambda}) does not satisfy the system for n = {n}"
        )));
    }
    mul_all(&[4, x, t, lambda, j])?
        .checked_add(n)
        .ok_or(Error::Overflow("shift_witness"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_examples() {
        assert!(verify_decomposition(&Decomposition::three(5, 2, 4, 20)));
        assert!(verify_decomposition(&Decomposition::two(7, 2, 14)));
        assert!(!verify_decomposition(&Decomposition::three(1, 1, 1, 1)));
        assert!(!verify_decomposition(&Decomposition::three(5, 2, 4, 21)));
        assert!(!verify_decomposition(&Decomposition::three(5, 0, 4, 20)));
    }

    #[test]
    fn verify_handles_products_beyond_i128() {
        let big: WideInt = 1 << 100;
        // 4/big = 1/(big/2) + 1/big + 1/big
        assert!(verify_decomposition(&Decomposition::three(
            big,
            big / 2,
            big,
            big
        )));
        assert!(!verify_decomposition(&Decomposition::three(
            big,
            big / 2,
            big,
            big + 1
        )));
    }

    #[test]
    fn two_term_for_3_examples() {
        assert_eq!(two_term_for_3(7), None);
        assert_eq!(two_term_for_3(5), Some((2, 10)));
        assert_eq!(two_term_for_3(6), Some((3, 6)));
        assert_eq!(two_term_for_3(3), Some((2, 2)));
        // 25 ≡ 1 (mod 6) yet its divisor 5 ≡ 2 (mod 3) gives 3/25 = 1/10 + 1/50
        assert_eq!(two_term_for_3(25), Some((10, 50)));
    }

    #[test]
    fn two_term_for_4_examples() {
        assert_eq!(
            two_term_for_4_3mod4(1).unwrap(),
            Decomposition::two(7, 2, 14)
        );
        assert_eq!(
            two_term_for_4_3mod4(0).unwrap(),
            Decomposition::two(3, 1, 3)
        );
        assert_eq!(
            two_term_for_4_3mod4(5).unwrap(),
            Decomposition::two(23, 6, 138)
        );
        assert!(two_term_for_4_3mod4(-1).is_err());
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_unit_fraction(1, 1, 1).unwrap(), (2, 2));
        assert_eq!(split_unit_fraction(2, 3, 1).unwrap(), (10, 15));
        assert_eq!(split_unit_fraction(1, 2, 5).unwrap(), (15, 30));
        assert!(split_unit_fraction(0, 2, 5).is_err());
    }

    #[test]
    fn type1_examples() {
        let d = type1_from_abc(1, 3, 3).unwrap();
        assert_eq!((d.n, d.x, d.y, d.z), (5, 2, 4, Some(20)));
        assert_eq!(d.kind, DecompositionKind::TypeI);

        let d = type1_from_abc(42, 7, 7).unwrap();
        assert_eq!((d.n, d.x, d.y, d.z), (2009, 504, 147_672, Some(7_063_644)));
        assert!(verify_decomposition(&d));

        let d = type1_from_abc(1, 3, 7).unwrap();
        assert_eq!((d.n, d.x, d.y, d.z), (17, 5, 30, Some(510)));
        assert!(verify_decomposition(&d));

        assert!(matches!(
            type1_from_abc(1, 3, 5),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(type1_from_abc(1, 1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn polynomial_examples() {
        assert_eq!(p_poly(0, 0, 0), 5);
        assert_eq!(p_poly(41, 1, 1), 2009);
        assert_eq!(p_poly(0, 1, 0), 13);
        assert_eq!(q_poly(0, 0, 0), 0);
        assert_eq!(q_poly(0, 0, 1), 3);
        assert_eq!(4 * q_poly(0, 0, 1) + 5, p_poly(0, 0, 1));
        assert_eq!(q_poly(41, 1, 1), 501);
    }

    #[test]
    fn check_witness_examples() {
        let w = ParamWitness::new(WitnessFamily::Lemma1Eq21, [1, 293, 12, 42]);
        let d = check_witness(2009, &w).unwrap().expect("2009 witness");
        assert!(verify_decomposition(&d));

        let w = ParamWitness::new(WitnessFamily::EqTipoDos, [1, 1, 1, 3]);
        let d = check_witness(5, &w).unwrap().expect("type II witness");
        assert_eq!((d.x, d.y, d.z), (5, 2, Some(10)));
        assert!(verify_decomposition(&d));
        assert_eq!(d.kind, DecompositionKind::TypeII);

        let w = ParamWitness::new(WitnessFamily::Lemma1Eq21, [1, 1, 1, 1]);
        assert_eq!(check_witness(5, &w).unwrap(), None);

        let w = ParamWitness::new(WitnessFamily::Lemma1Eq21, [1, 1, 1]);
        assert!(matches!(check_witness(5, &w), Err(Error::Shape(_))));
        let w = ParamWitness::new(WitnessFamily::Lemma1Eq22, [1, 0, 1, 1]);
        assert!(matches!(check_witness(5, &w), Err(Error::Shape(_))));
    }

    #[test]
    fn check_witness_other_families() {
        let d = check_witness(2009, &ParamWitness::new(WitnessFamily::PolP, [41, 1, 1]))
            .unwrap()
            .unwrap();
        assert_eq!(d, type1_from_abc(42, 7, 7).unwrap());

        let d = check_witness(17, &ParamWitness::new(WitnessFamily::EqTipoI, [1, 3, 7]))
            .unwrap()
            .unwrap();
        assert!(verify_decomposition(&d));

        // p(α,β,γ) satisfies the system with x = 1, t = α + 1, λ = 4β + 3
        let d = check_witness(
            2009,
            &ParamWitness::new(WitnessFamily::Lemma4System, [1, 42, 7]),
        )
        .unwrap()
        .unwrap();
        assert!(verify_decomposition(&d));

        // (α,β,γ,δ) = (1,2,1,1): δn = 7 − 4 = 3
        let d = check_witness(
            3,
            &ParamWitness::new(WitnessFamily::EqTipoTres, [1, 2, 1, 1]),
        )
        .unwrap()
        .unwrap();
        assert!(verify_decomposition(&d));
        assert_eq!(
            check_witness(
                5,
                &ParamWitness::new(WitnessFamily::EqTipoTres, [1, 2, 1, 1])
            )
            .unwrap(),
            None
        );
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_witness(5, 1, 1, 3, 0).unwrap(), 5);
        assert_eq!(shift_witness(5, 1, 1, 3, 1).unwrap(), 17);
        assert_eq!(shift_witness(5, 1, 1, 3, 10).unwrap(), 125);
        assert!(lemma4_holds(125, 1, 1, 3));
        assert!(matches!(
            shift_witness(5, 1, 1, 2, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn family_names_round_trip() {
        for f in WitnessFamily::ALL {
            assert_eq!(f.name().parse::<WitnessFamily>().unwrap(), f);
        }
    }
}
