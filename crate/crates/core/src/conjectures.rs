//! The sets behind the q-Strong Conjecture and the related membership tests.
//!
//! * `A = {n² + n − 1}`: exactly the `q` with `4q + 5` an odd square.
//! * `B = {q(α,β,γ)}`: the values of the q-polynomial.
//! * `C`: positive integers in neither.
//!
//! Membership in `B` is searched through the factorised form
//! `N = 4q + 5 = abc − a − b` with `a = α+1`, `b = 4β+3`, `c = 4γ+3`.
//! Because `abc < 2N`, the smallest of the pair products `ab`, `ac`, `bc`
//! is at most `∛(4N²)`; enumerating each kind of pair up to that bound and
//! solving for the third factor is therefore complete.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{divisors, icbrt_ceil, isqrt, WideInt};
use crate::bitmap::{AtomicBitmap, Bitmap};
use crate::error::{Error, Result};

/// A witness `(α, β, γ)` for the q- or p-polynomial.
pub type Triple = (WideInt, WideInt, WideInt);

/// Default cap for [`in_set_b`]; far above the forced bound for any `q`
/// that fits the crate's verification range.
pub const DEFAULT_SEARCH_BOUND: WideInt = 1 << 40;

/// `n` with `n² + n − 1 = q`.
pub fn in_set_a(q: WideInt) -> Option<WideInt> {
    if q < 1 {
        return None;
    }
    let s = isqrt(4 * q + 5)?;
    (s * s == 4 * q + 5).then_some((s - 1) / 2)
}

/// A witness with `q_poly(α,β,γ) = q`, or `None` if there is none.
///
/// `search_bound` caps the pair-product bound; it only matters when it is
/// smaller than the forced bound `∛(4(4q+5)²)`.
pub fn in_set_b(q: WideInt, search_bound: WideInt) -> Option<Triple> {
    if q < 1 {
        return None;
    }
    b_witness(q, search_bound)
}

/// Witness search that also accepts `q = 0`.
fn b_witness(q: WideInt, search_bound: WideInt) -> Option<Triple> {
    let n = 4 * q + 5;
    let forced = icbrt_ceil((4 * n as u128).checked_mul(n as u128)?) as WideInt;
    let full = forced.min(search_bound);
    // Most values have a witness with tiny factors, so try small bounds first.
    let mut prev = 0;
    for bound in [64, 4096, full] {
        let bound = bound.min(full);
        if bound <= prev {
            continue;
        }
        if let Some(w) = pair_search(n, bound) {
            return Some(w);
        }
        prev = bound;
    }
    None
}

fn to_triple(a: WideInt, b: WideInt, c: WideInt) -> Triple {
    (a - 1, (b - 3) / 4, (c - 3) / 4)
}

/// Solutions of `abc − a − b = n` with `b, c ≡ 3 (mod 4)` and some pair
/// product at most `bound`.
fn pair_search(n: WideInt, bound: WideInt) -> Option<Triple> {
    // (b, c) known: a = (n + b) / (bc − 1)
    let mut b = 3;
    while b * 3 <= bound {
        let mut c = 3;
        while b * c <= bound {
            let t = n + b;
            if t % (b * c - 1) == 0 {
                return Some(to_triple(t / (b * c - 1), b, c));
            }
            c += 4;
        }
        b += 4;
    }
    // (a, b) known: c = (n + a + b) / (ab)
    let mut b = 3;
    while b <= bound {
        for a in 1..=bound / b {
            let t = n + a + b;
            if t % (a * b) == 0 && (t / (a * b)) % 4 == 3 {
                return Some(to_triple(a, b, t / (a * b)));
            }
        }
        b += 4;
    }
    // (a, c) known: b = (n + a) / (ac − 1)
    let mut c = 3;
    while c <= bound {
        for a in 1..=bound / c {
            let t = n + a;
            let den = a * c - 1;
            if t % den == 0 && (t / den) % 4 == 3 {
                return Some(to_triple(a, t / den, c));
            }
        }
        c += 4;
    }
    None
}

/// A witness with `p_poly(α,β,γ) = n`.
pub fn n1_contains(n: WideInt) -> Option<Triple> {
    if n < 5 || n % 4 != 1 {
        return None;
    }
    b_witness((n - 5) / 4, DEFAULT_SEARCH_BOUND)
}

/// The partition of `1..=limit` into `A`, `B` and `C`.
#[derive(Clone, Debug)]
pub struct QPartition {
    pub limit: WideInt,
    /// Indexed by `q`; bit 0 is never set.
    pub a_members: Bitmap,
    pub b_members: Bitmap,
    pub c_members: Vec<WideInt>,
}

pub fn partition_q(limit: WideInt) -> Result<QPartition> {
    if limit < 1 {
        return Err(Error::domain("limit must be positive"));
    }
    let lim = usize::try_from(limit).map_err(|_| Error::domain("limit too large for a bitmap"))?;

    let mut a = Bitmap::new(lim + 1);
    let mut k = 1usize;
    while k * k + k - 1 <= lim {
        a.set(k * k + k - 1);
        k += 1;
    }

    let b = forward_b(lim);
    if a.intersects(&b) {
        let q = a.iter_ones().find(|&q| b.get(q)).unwrap_or_default();
        return Err(Error::Invariant(format!(
            "q = {q} lies in both A and B, so 4q+5 would be a square in N1"
        )));
    }
    let c_members = (1..=lim)
        .filter(|&q| !a.get(q) && !b.get(q))
        .map(|q| q as WideInt)
        .collect();
    Ok(QPartition {
        limit,
        a_members: a,
        b_members: b,
        c_members,
    })
}

/// Marks every positive `q_poly` value up to `lim`.
pub(crate) fn forward_b(lim: usize) -> Bitmap {
    let bits = AtomicBitmap::new(lim + 1);
    // q(0, β, 0) = 2β is the smallest value for a given β
    (0..=lim / 2).into_par_iter().for_each(|beta| {
        let step = 4 * beta + 3;
        let mut m = 3 * beta + 2;
        while m - beta - 2 <= lim {
            let mut q = m - beta - 2;
            while q <= lim {
                if q > 0 {
                    bits.set(q);
                }
                q += m;
            }
            m += step;
        }
    });
    bits.into_bitmap()
}

/// Which relation of the q-Conjecture covers a given `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "relation", rename_all = "kebab-case")]
pub enum QRelation {
    /// `q = 1 + 3x + 3y + 4xy`, i.e. `4q + 5 = (4x+3)(4y+3)`.
    ThreeMod4 { x: WideInt, y: WideInt },
    /// `q = 5 + 5x + 5y + 4xy`, i.e. `4q + 5 = (4x+5)(4y+5)`.
    OneMod4 { x: WideInt, y: WideInt },
    /// `q = q(α, β, γ)`.
    Polynomial {
        alpha: WideInt,
        beta: WideInt,
        gamma: WideInt,
    },
}

impl QRelation {
    /// Recomputes `q` from the stored witness.
    pub fn value(&self) -> WideInt {
        match *self {
            QRelation::ThreeMod4 { x, y } => 1 + 3 * x + 3 * y + 4 * x * y,
            QRelation::OneMod4 { x, y } => 5 + 5 * x + 5 * y + 4 * x * y,
            QRelation::Polynomial { alpha, beta, gamma } => {
                crate::identities::q_poly(alpha, beta, gamma)
            }
        }
    }
}

pub fn q_conjecture_holds(q: WideInt) -> Option<QRelation> {
    if q < 1 {
        return None;
    }
    let n = 4 * q + 5;
    let divs = divisors(n).ok()?;
    let proper = || divs.iter().copied().filter(|&d| d > 1 && d * d <= n);
    if let Some(d) = proper().find(|d| d % 4 == 3) {
        return Some(QRelation::ThreeMod4 {
            x: (d - 3) / 4,
            y: (n / d - 3) / 4,
        });
    }
    if let Some(d) = proper().find(|d| d % 4 == 1) {
        return Some(QRelation::OneMod4 {
            x: (d - 5) / 4,
            y: (n / d - 5) / 4,
        });
    }
    in_set_b(q, DEFAULT_SEARCH_BOUND).map(|(alpha, beta, gamma)| QRelation::Polynomial {
        alpha,
        beta,
        gamma,
    })
}

/// True iff no divisor of `n² + n + β + 1` is `≡ 3β+2 (mod 4β+3)` for all
/// `1 <= n <= n_max`, `0 <= β <= beta_max`.
pub fn corollary_divisor_check(n_max: WideInt, beta_max: WideInt) -> Result<bool> {
    if n_max < 1 || beta_max < 0 {
        return Err(Error::domain("need n_max >= 1 and beta_max >= 0"));
    }
    for n in 1..=n_max {
        for beta in 0..=beta_max {
            let m = 4 * beta + 3;
            let bad = divisors(n * n + n + beta + 1)?
                .iter()
                .any(|d| d % m == 3 * beta + 2);
            if bad {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
