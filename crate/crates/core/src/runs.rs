//! Long runs of consecutive residue classes of Erdős–Straus numbers.
//!
//! For consecutive `β_1, …, β_L`, the congruences `T ≡ 3β_j + 2 (mod 4β_j + 3)`
//! are pairwise compatible, since `gcd(4β_i+3, 4β_j+3)` divides
//! `3(β_i − β_j)`. Writing `T = (4β_j+3)γ_j + 3β_j + 2`, every
//! `q ≡ −(β_j + 2) (mod T)` equals `q(α, β_j, γ_j)` for `α = (q+β_j+2)/T − 1`.

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{crt_solve, factorize, lcm_list, Congruence, WideInt};
use crate::decimal;
use crate::error::{Error, Result};
use crate::identities::{
    check_witness, q_poly, verify_fraction, Decomposition, DecompositionKind, ParamWitness,
    WitnessFamily,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCertificate {
    pub length: usize,
    #[serde(with = "decimal::vec")]
    pub betas: Vec<WideInt>,
    #[serde(rename = "T", with = "decimal")]
    pub t: WideInt,
    #[serde(with = "decimal::vec")]
    pub gammas: Vec<WideInt>,
    #[serde(with = "pairs")]
    pub q_classes: Vec<Congruence>,
}

/// Congruences as `[modulus, residue]` pairs of decimal strings.
mod pairs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Congruence], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for c in v {
            seq.serialize_element(&[c.modulus.to_string(), c.residue.to_string()])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Congruence>, D::Error> {
        use serde::de::Error as _;
        Vec::<[String; 2]>::deserialize(d)?
            .iter()
            .map(|[m, r]| {
                let m = decimal::parse(m).map_err(D::Error::custom)?;
                let r = decimal::parse(r).map_err(D::Error::custom)?;
                if m < 1 || !(0..m).contains(&r) {
                    return Err(D::Error::custom(format!("bad congruence [{m}, {r}]")));
                }
                Ok(Congruence {
                    modulus: m,
                    residue: r,
                })
            })
            .collect()
    }
}

pub fn build_run(length: usize, start_beta: WideInt) -> Result<RunCertificate> {
    if length == 0 {
        return Err(Error::domain("run length must be positive"));
    }
    if start_beta < 0 {
        return Err(Error::domain("start_beta must be non-negative"));
    }
    let betas: Vec<WideInt> = (0..length as WideInt).map(|j| start_beta + j).collect();
    let system = betas
        .iter()
        .map(|&b| Congruence::new(4 * b + 3, 3 * b + 2))
        .collect::<Result<Vec<_>>>()?;
    let sol = crt_solve(&system)?;
    let floor = betas.iter().map(|&b| 3 * b + 2).max().unwrap_or(0);
    let mut t = sol.residue;
    if t < floor {
        t += (floor - t + sol.modulus - 1) / sol.modulus * sol.modulus;
    }
    let gammas = betas
        .iter()
        .map(|&b| (t - 3 * b - 2) / (4 * b + 3))
        .collect();
    let q_classes = betas
        .iter()
        .map(|&b| Congruence::new(t, -(b + 2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunCertificate {
        length,
        betas,
        t,
        gammas,
        q_classes,
    })
}

fn check_shape(cert: &RunCertificate) -> Result<()> {
    let n = cert.length;
    if n == 0 || cert.betas.len() != n || cert.gammas.len() != n || cert.q_classes.len() != n {
        return Err(Error::Shape(
            "run certificate lists disagree with its length".into(),
        ));
    }
    if cert.t < 1 {
        return Err(Error::Shape(format!("T = {} is not positive", cert.t)));
    }
    if cert.betas.windows(2).any(|w| w[1] != w[0] + 1) || cert.betas[0] < 0 {
        return Err(Error::Shape(
            "betas are not consecutive non-negative integers".into(),
        ));
    }
    Ok(())
}

/// The Type I identity for `n = abc − a − b`, in big integers since the
/// denominators grow like `T³`.
fn type1_holds(a: WideInt, b: WideInt, c: WideInt, n: WideInt) -> bool {
    let (a, b, c) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
    let n_big = BigInt::from(n);
    let bc1 = &b * &c - 1;
    if &a * &b * &c - &a - &b != n_big || &bc1 % 4 != BigInt::ZERO {
        return false;
    }
    let quarter = bc1 / 4;
    let ac1 = &a * &c - 1;
    let dens = [
        &a * &quarter,
        &a * &ac1 * &quarter,
        &ac1 * &quarter * &n_big,
    ];
    verify_fraction(&BigInt::from(4), &n_big, &dens)
}

/// Checks the certificate's algebra, then `samples` random members of every
/// class (plus the least one) through the polynomial and the Type I
/// identity. Sampling is seeded, so the result is reproducible.
pub fn verify_run(cert: &RunCertificate, samples: usize) -> Result<bool> {
    check_shape(cert)?;
    let t = cert.t;
    let mut rng = StdRng::seed_from_u64(0x05ee_d0f2_u64);
    for ((&beta, &gamma), class) in cert.betas.iter().zip(&cert.gammas).zip(&cert.q_classes) {
        let m = 4 * beta + 3;
        if gamma < 0 || t != m * gamma + 3 * beta + 2 {
            return Ok(false);
        }
        if *class != Congruence::new(t, -(beta + 2))? {
            return Ok(false);
        }
        let first = t - beta - 2;
        let ks = std::iter::once(0).chain((0..samples).map(|_| rng.gen_range(0..1000)));
        for k in ks {
            let q = first + k * t;
            let alpha = (q + beta + 2) / t - 1;
            if q_poly(alpha, beta, gamma) != q {
                return Ok(false);
            }
            if !type1_holds(alpha + 1, m, 4 * gamma + 3, 4 * q + 5) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One member `n = Tδ − 4a` of a Type II run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type2Member {
    pub a: WideInt,
    pub n: WideInt,
    pub witness: ParamWitness,
    pub decomposition: Decomposition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type2Run {
    pub t: WideInt,
    pub delta: WideInt,
    pub members: Vec<Type2Member>,
}

/// `(β, γ)` with `a = β²γ` and `γ` squarefree.
pub fn square_split(a: WideInt) -> Result<(WideInt, WideInt)> {
    let (mut beta, mut gamma) = (1, 1);
    for (p, e) in factorize(a)? {
        let p = WideInt::from(p);
        beta *= p.pow(e / 2);
        gamma *= p.pow(e % 2);
    }
    Ok((beta, gamma))
}

/// With `T = lcm{4β(a)γ(a) − 1}` and `δ ∈ {1, 3}` chosen so `Tδ ≡ 1 (mod 4)`,
/// each `n = Tδ − 4a` satisfies `n = (4·1·β·γ − 1)δ' − 4β²γ` with
/// `δ' = Tδ / (4βγ − 1)`.
pub fn build_type2_run(a_values: &[WideInt]) -> Result<Type2Run> {
    if a_values.is_empty() || a_values.iter().any(|&a| a < 1) {
        return Err(Error::domain("a_values must be non-empty and positive"));
    }
    let splits = a_values
        .iter()
        .map(|&a| square_split(a))
        .collect::<Result<Vec<_>>>()?;
    let factors: Vec<WideInt> = splits.iter().map(|&(b, g)| 4 * b * g - 1).collect();
    let t = lcm_list(&factors)?;
    let delta = if t % 4 == 1 { 1 } else { 3 };
    let td = t.checked_mul(delta).ok_or(Error::Overflow("type II run"))?;
    let mut members = Vec::with_capacity(a_values.len());
    for ((&a, &(beta, gamma)), &f) in a_values.iter().zip(&splits).zip(&factors) {
        let n = td - 4 * a;
        if n < 2 {
            return Err(Error::domain(format!(
                "member n = Tδ − 4·{a} = {n} is below 2"
            )));
        }
        let witness = ParamWitness::new(WitnessFamily::EqTipoDos, [1, beta, gamma, td / f]);
        let decomposition = check_witness(n, &witness)?
            .ok_or_else(|| Error::Invariant(format!("Type II witness fails for n = {n}")))?;
        members.push(Type2Member {
            a,
            n,
            witness,
            decomposition,
        });
    }
    Ok(Type2Run { t, delta, members })
}

impl Type2Member {
    pub fn is_type2(&self) -> bool {
        self.decomposition.kind == DecompositionKind::TypeII
    }
}
