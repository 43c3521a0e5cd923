//! Exact integer primitives shared by every other module.
//!
//! Everything works on [`WideInt`] (`i128`). Hot loops that are known to stay
//! below 2^64 drop to `u64` internally; products are formed in `u128` so no
//! intermediate ever rounds. Nothing in this crate touches floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed 128-bit integer used for every quantity in the crate.
pub type WideInt = i128;

/// `x ≡ residue (mod modulus)` with `0 <= residue < modulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    #[serde(with = "crate::decimal")]
    pub modulus: WideInt,
    #[serde(with = "crate::decimal")]
    pub residue: WideInt,
}

impl Congruence {
    /// Builds a congruence, reducing `residue` into `[0, modulus)`.
    pub fn new(modulus: WideInt, residue: WideInt) -> Result<Self> {
        if modulus < 1 {
            return Err(Error::domain(format!("modulus {modulus} must be positive")));
        }
        Ok(Congruence {
            modulus,
            residue: residue.rem_euclid(modulus),
        })
    }

    pub fn contains(&self, x: WideInt) -> bool {
        x.rem_euclid(self.modulus) == self.residue
    }
}

pub fn gcd(a: WideInt, b: WideInt) -> WideInt {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as WideInt
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: WideInt, b: WideInt) -> Result<WideInt> {
    if a <= 0 || b <= 0 {
        return Err(Error::domain(format!(
            "lcm of non-positive values {a}, {b}"
        )));
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow("lcm"))
}

/// Least common multiple of a list; `1` for the empty list.
pub fn lcm_list(xs: &[WideInt]) -> Result<WideInt> {
    xs.iter().try_fold(1, |acc, &x| lcm(acc, x))
}

/// Smallest integer `>= num / den`.
pub fn ceil_div(num: WideInt, den: WideInt) -> Result<WideInt> {
    if den <= 0 {
        return Err(Error::domain(format!(
            "ceil_div denominator {den} must be positive"
        )));
    }
    Ok(num.div_euclid(den) + WideInt::from(num.rem_euclid(den) != 0))
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

// Deterministic for every n < 2^64.
const MR_BASES_64: [u64; 7] = [2, 325, 9_375, 28_178, 450_775, 9_780_504, 1_795_265_022];

fn miller_rabin_u64(n: u64) -> bool {
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'bases: for &a in &MR_BASES_64 {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 43 * 43 {
        return true;
    }
    miller_rabin_u64(n)
}

// The first 13 prime bases are deterministic below 3.3 * 10^24.
fn miller_rabin_big(n: u128) -> bool {
    use num_bigint::BigUint;

    let n_big = BigUint::from(n);
    let one = BigUint::from(1u32);
    let n_minus_one = &n_big - &one;
    let s = (n - 1).trailing_zeros();
    let d = BigUint::from((n - 1) >> s);
    'bases: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, &n_big);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % &n_big;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality test.
///
/// Exact for every `n < 2^64` (fixed Miller–Rabin witness set) and for
/// `n < 3.3 * 10^24` beyond that.
pub fn is_prime(n: WideInt) -> bool {
    if n < 2 {
        return false;
    }
    match u64::try_from(n) {
        Ok(small) => is_prime_u64(small),
        Err(_) => {
            let n = n as u128;
            SMALL_PRIMES.iter().all(|&p| !n.is_multiple_of(p as u128)) && miller_rabin_big(n)
        }
    }
}

/// Jacobi symbol `(n/m)` for odd positive `m`, with `0` whenever
/// `gcd(n, m) > 1`. Negative `n` is reduced modulo `m` first.
pub fn jacobi(n: WideInt, m: WideInt) -> Result<i8> {
    if m <= 0 || m % 2 == 0 {
        return Err(Error::domain(format!(
            "jacobi modulus {m} must be odd and positive"
        )));
    }
    let mut m = m as u128;
    let mut a = n.rem_euclid(m as WideInt) as u128;
    let mut sign = 1i8;
    while a != 0 {
        let twos = a.trailing_zeros();
        a >>= twos;
        if twos % 2 == 1 && matches!(m % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && m % 4 == 3 {
            sign = -sign;
        }
        (a, m) = (m % a, a);
    }
    Ok(if m == 1 { sign } else { 0 })
}

/// Integer square root of a non-negative value.
pub fn isqrt(n: WideInt) -> Option<WideInt> {
    (n >= 0).then(|| (n as u128).isqrt() as WideInt)
}

pub fn is_perfect_square(n: WideInt) -> bool {
    isqrt(n).is_some_and(|r| r * r == n)
}

/// Smallest `r` with `r^3 >= n` (for `n >= 0`).
pub(crate) fn icbrt_ceil(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut lo = 0u128;
    let mut hi = 1u128 << 43;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if mid.checked_pow(3).is_some_and(|c| c >= n) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

const TRIAL_BOUND: u64 = 1_000;

fn pollard_brent(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut q, mut g) = (2u64, 2u64, 1u64, 1u64);
        let mut ys = y;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Prime factorisation as sorted `(prime, exponent)` pairs.
///
/// Trial division up to a small bound, then Brent's variant of Pollard rho on
/// whatever cofactor remains.
pub fn factorize(n: WideInt) -> Result<Vec<(u64, u32)>> {
    if n < 1 {
        return Err(Error::domain(format!("cannot factor {n}")));
    }
    let mut n =
        u64::try_from(n).map_err(|_| Error::domain("factorisation limited to 64-bit values"))?;
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_BOUND && p * p <= n {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if p * p > n {
            primes.push(n);
        } else {
            split_into(n, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

pub(crate) fn divisors_from_factors(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in factors {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: WideInt) -> Result<Vec<WideInt>> {
    let factors = factorize(n)?;
    Ok(divisors_from_factors(&factors)
        .into_iter()
        .map(WideInt::from)
        .collect())
}

/// Returns `(g, s)` with `g = gcd(a, m)` and `s * a ≡ g (mod m)`.
fn ext_gcd(a: WideInt, m: WideInt) -> (WideInt, WideInt) {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1, 0);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r, old_s)
}

fn mul_mod_wide(a: WideInt, b: WideInt, m: WideInt) -> Result<WideInt> {
    a.checked_mul(b)
        .map(|p| p.rem_euclid(m))
        .ok_or(Error::Overflow("crt"))
}

fn merge(a: Congruence, b: Congruence) -> Result<Congruence> {
    let g = gcd(a.modulus, b.modulus);
    let diff = b.residue - a.residue;
    if diff % g != 0 {
        return Err(Error::Incompatible {
            m1: a.modulus,
            r1: a.residue,
            m2: b.modulus,
            r2: b.residue,
        });
    }
    let m2 = b.modulus / g;
    let (_, inv) = ext_gcd((a.modulus / g).rem_euclid(m2), m2);
    let t = mul_mod_wide((diff / g).rem_euclid(m2), inv.rem_euclid(m2), m2)?;
    let modulus = (a.modulus / g)
        .checked_mul(b.modulus)
        .ok_or(Error::Overflow("crt"))?;
    let residue = a
        .modulus
        .checked_mul(t)
        .and_then(|v| v.checked_add(a.residue))
        .ok_or(Error::Overflow("crt"))?;
    Congruence::new(modulus, residue)
}

/// Solves a system of pairwise-compatible congruences.
///
/// The result modulus is the lcm of the input moduli and the residue is the
/// unique solution in `[0, lcm)`. If any pair is incompatible the error names
/// that pair.
pub fn crt_solve(congruences: &[Congruence]) -> Result<Congruence> {
    let (first, rest) = congruences
        .split_first()
        .ok_or_else(|| Error::domain("empty congruence system"))?;
    for (i, a) in congruences.iter().enumerate() {
        for b in &congruences[i + 1..] {
            if (b.residue - a.residue) % gcd(a.modulus, b.modulus) != 0 {
                return Err(Error::Incompatible {
                    m1: a.modulus,
                    r1: a.residue,
                    m2: b.modulus,
                    r2: b.residue,
                });
            }
        }
    }
    rest.iter().try_fold(*first, |acc, &c| merge(acc, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cong(m: WideInt, r: WideInt) -> Congruence {
        Congruence::new(m, r).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(3, 1), 1);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(0, 0), 0);
        assert_eq!(gcd(-12, 18), 6);
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_list(&[3, 7]).unwrap(), 21);
        assert_eq!(lcm_list(&[3, 2]).unwrap(), 6);
        assert_eq!(lcm_list(&[]).unwrap(), 1);
        assert!(matches!(lcm_list(&[3, 0]), Err(Error::Domain(_))));
        assert!(matches!(lcm_list(&[-4]), Err(Error::Domain(_))));
    }

    #[test]
    fn ceil_div_examples() {
        assert_eq!(ceil_div(85, 3).unwrap(), 29);
        assert_eq!(ceil_div(10, 5).unwrap(), 2);
        assert_eq!(ceil_div(102, 7).unwrap(), 15);
        assert_eq!(ceil_div(-7, 2).unwrap(), -3);
        assert!(ceil_div(1, 0).is_err());
        assert!(ceil_div(1, -3).is_err());
    }

    #[test]
    fn primality_examples() {
        assert!(!is_prime(2009));
        assert!(is_prime(17));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(2));
        assert!(is_prime(18_446_744_073_709_551_557)); // largest prime below 2^64
        assert!(!is_prime(18_446_744_073_709_551_617)); // 2^64 + 1 = 274177 * 67280421310721
        assert!(is_prime(18_446_744_073_709_551_629)); // smallest prime above 2^64
                                                       // strong pseudoprime to several small bases
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(-1, 7).unwrap(), -1);
        assert_eq!(jacobi(2, 15).unwrap(), 1);
        assert_eq!(jacobi(6, 15).unwrap(), 0);
        assert_eq!(jacobi(5, 1).unwrap(), 1);
        assert!(jacobi(3, 8).is_err());
        assert!(jacobi(3, -7).is_err());
        assert!(jacobi(3, 0).is_err());
    }

    #[test]
    fn perfect_square_examples() {
        assert!(is_perfect_square(25));
        assert!(is_perfect_square(49));
        assert!(!is_perfect_square(2009));
        assert!(is_perfect_square(0));
        assert!(!is_perfect_square(-4));
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(49).unwrap(), vec![1, 7, 49]);
        assert_eq!(divisors(2009).unwrap(), vec![1, 7, 41, 49, 287, 2009]);
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert!(divisors(0).is_err());
        assert!(divisors(-5).is_err());
    }

    #[test]
    fn factorize_needs_rho() {
        // product of two primes above the trial-division bound
        let p = 1_000_003u64;
        let q = 998_244_353u64;
        assert_eq!(factorize((p * q) as WideInt).unwrap(), vec![(p, 1), (q, 1)]);
        let n = 4_294_967_291u64 * 4_294_967_279u64;
        assert_eq!(
            factorize(n as WideInt).unwrap(),
            vec![(4_294_967_279, 1), (4_294_967_291, 1)]
        );
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_solve(&[cong(3, 2), cong(7, 5)]).unwrap(), cong(21, 5));
        assert_eq!(crt_solve(&[cong(5, 3)]).unwrap(), cong(5, 3));
        match crt_solve(&[cong(4, 1), cong(6, 2)]) {
            Err(Error::Incompatible {
                m1: 4,
                r1: 1,
                m2: 6,
                r2: 2,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(crt_solve(&[]).is_err());
        // non-coprime but compatible
        assert_eq!(crt_solve(&[cong(4, 3), cong(6, 5)]).unwrap(), cong(12, 11));
    }

    #[test]
    fn icbrt_ceil_bounds() {
        for n in 0u128..2000 {
            let r = icbrt_ceil(n);
            assert!(r.pow(3) >= n);
            assert!(r == 0 || (r - 1).pow(3) < n);
        }
    }
}
