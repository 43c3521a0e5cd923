//! The greedy-type algorithm for `m/n = 1/x + 1/y + 1/z` (`m` = 4 or 5).
//!
//! Step `j` fixes `x_j = ⌊n/m⌋ + j`, takes the largest unit fraction
//! `1/y_j` below `m/n − 1/x_j`, and stops once the leftover is itself a unit
//! fraction (or zero). Everything is exact integer arithmetic:
//!
//! ```text
//! d_j = m·x_j − n          (so m/n − 1/x_j = d_j / (n·x_j))
//! y_j = ⌈n·x_j / d_j⌉
//! r_j = y_j·d_j − n·x_j    (so the leftover is r_j / (n·x_j·y_j))
//! ```

use serde::Serialize;

use crate::arith::{ceil_div, is_prime, lcm_list, WideInt};
use crate::error::{Error, Result};
use crate::identities::Decomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub j: WideInt,
    pub x: WideInt,
    pub y: WideInt,
    pub r: WideInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum GreedyOutcome {
    TwoTerm { x: WideInt, y: WideInt },
    ThreeTerm { x: WideInt, y: WideInt, z: WideInt },
    Exhausted { max_steps: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyTrace {
    pub n: WideInt,
    pub numerator: WideInt,
    pub steps: Vec<StepRecord>,
    pub outcome: GreedyOutcome,
}

impl GreedyTrace {
    pub fn converged(&self) -> bool {
        !matches!(self.outcome, GreedyOutcome::Exhausted { .. })
    }

    /// The step at which the algorithm stopped.
    pub fn stop_step(&self) -> Option<WideInt> {
        self.converged()
            .then(|| self.steps.last().map(|s| s.j))
            .flatten()
    }

    /// The outcome as a decomposition of `4/n`; `None` for numerator 5 or
    /// an exhausted run.
    pub fn decomposition(&self) -> Option<Decomposition> {
        if self.numerator != 4 {
            return None;
        }
        match self.outcome {
            GreedyOutcome::TwoTerm { x, y } => Some(Decomposition::two(self.n, x, y)),
            GreedyOutcome::ThreeTerm { x, y, z } => Some(Decomposition::three(self.n, x, y, z)),
            GreedyOutcome::Exhausted { .. } => None,
        }
    }
}

fn overflow() -> Error {
    Error::Overflow("greedy")
}

/// Runs the greedy-type algorithm for `numerator/n` for at most `max_steps`
/// steps. Running out of steps is reported as [`GreedyOutcome::Exhausted`].
pub fn greedy_decompose(n: WideInt, numerator: WideInt, max_steps: u64) -> Result<GreedyTrace> {
    if n < 2 {
        return Err(Error::domain(format!("n = {n} is below 2")));
    }
    if !matches!(numerator, 4 | 5) {
        return Err(Error::domain(format!(
            "numerator {numerator} is not 4 or 5"
        )));
    }
    if max_steps == 0 {
        return Err(Error::domain("max_steps must be at least 1"));
    }
    let base = n / numerator;
    let mut steps = Vec::new();
    for j in 1..=max_steps as WideInt {
        let x = base + j;
        let d = numerator.checked_mul(x).ok_or_else(overflow)? - n;
        let nx = n.checked_mul(x).ok_or_else(overflow)?;
        let y = ceil_div(nx, d)?;
        let r = y.checked_mul(d).ok_or_else(overflow)? - nx;
        steps.push(StepRecord { j, x, y, r });
        if r == 0 {
            return Ok(GreedyTrace {
                n,
                numerator,
                steps,
                outcome: GreedyOutcome::TwoTerm { x, y },
            });
        }
        let nxy = nx.checked_mul(y).ok_or_else(overflow)?;
        if nxy % r == 0 {
            return Ok(GreedyTrace {
                n,
                numerator,
                steps,
                outcome: GreedyOutcome::ThreeTerm { x, y, z: nxy / r },
            });
        }
    }
    Ok(GreedyTrace {
        n,
        numerator,
        steps,
        outcome: GreedyOutcome::Exhausted { max_steps },
    })
}

/// `(s, r)` with `(4q+1)(q+j) = s(4j−1) + r`, `0 <= r <= 4j−2`.
fn split(q: WideInt, j: WideInt) -> (WideInt, WideInt) {
    let v = (4 * q + 1) * (q + j);
    let m = 4 * j - 1;
    (v.div_euclid(m), v.rem_euclid(m))
}

/// Stopping criterion at step `j` for `n = 4q + 1`: `(4j−1) − r` divides
/// `(4q+1)(q+j)(s+1)`. The `r = 0` case is the two-term stop.
pub fn converges_at(q: WideInt, j: WideInt) -> bool {
    assert!(q >= 1 && j >= 1, "converges_at needs q >= 1 and j >= 1");
    let (s, r) = split(q, j);
    if r == 0 {
        return true;
    }
    let gap = 4 * j - 1 - r;
    let product = (4 * q + 1)
        .checked_mul(q + j)
        .and_then(|v| v.checked_mul(s + 1))
        .expect("criterion product overflows");
    product % gap == 0
}

/// `(4j−1) − r` divides `(4q+1)²(q+j)²`. Implied by [`converges_at`] but
/// strictly weaker: at `q = 1, j = 44` the gap 125 divides `225²` and not
/// `225·2`.
pub fn converges_at_squared(q: WideInt, j: WideInt) -> bool {
    assert!(
        q >= 1 && j >= 1,
        "converges_at_squared needs q >= 1 and j >= 1"
    );
    let (_, r) = split(q, j);
    if r == 0 {
        return true;
    }
    let gap = 4 * j - 1 - r;
    let base = (4 * q + 1)
        .checked_mul(q + j)
        .expect("criterion product overflows");
    // reduce before squaring so the square stays in range
    let b = base % gap;
    (b * b) % gap == 0
}

/// Step at which `x_j` reaches `a(bc−1)/4` for `n = abc − a − b`, plus one.
/// Greedy need not have stopped by then: for `(1, 3, 15)` it picks
/// `y = 151` at `x = 11` and stops only at step 8.
pub fn lemma8_step_bound(a: WideInt, b: WideInt, c: WideInt) -> Result<WideInt> {
    if a < 1 || b < 1 || c < 1 {
        return Err(Error::domain("a, b, c must be positive"));
    }
    let bc = b * c;
    if bc % 4 != 1 {
        return Err(Error::precondition(format!(
            "b·c = {bc} is not ≡ 1 (mod 4)"
        )));
    }
    let n = a * bc - a - b;
    if n < 2 {
        return Err(Error::precondition(format!(
            "n = abc − a − b = {n} is below 2"
        )));
    }
    Ok(a * (bc - 1) / 4 - n / 4 + 1)
}

/// Runs the greedy algorithm on `n = abc − a − b` with the step budget from
/// [`lemma8_step_bound`].
pub fn lemma8_class_check(a: WideInt, b: WideInt, c: WideInt) -> Result<GreedyTrace> {
    let bound = lemma8_step_bound(a, b, c)?;
    greedy_decompose(a * b * c - a - b, 4, bound as u64)
}

/// `lcm{3, 7, …, 4j−1, 2, 5, …, 3j−1}`.
pub fn adversarial_modulus(j: WideInt) -> Result<WideInt> {
    if j < 1 {
        return Err(Error::domain("j must be positive"));
    }
    let moduli: Vec<WideInt> = (1..=j).flat_map(|k| [4 * k - 1, 3 * k - 1]).collect();
    lcm_list(&moduli)
}

/// Smallest prime `4Lt + 1` with `1 <= t <= t_max`, where `L` is
/// [`adversarial_modulus`]. Such a prime needs more than `j` greedy steps.
pub fn adversarial_n(j: WideInt, t_max: WideInt) -> Result<Option<WideInt>> {
    let step = adversarial_modulus(j)?
        .checked_mul(4)
        .ok_or_else(overflow)?;
    for t in 1..=t_max {
        let n = step.checked_mul(t).ok_or_else(overflow)? + 1;
        if is_prime(n) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
