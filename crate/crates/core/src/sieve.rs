//! Residue classes of `q` covered by the q-polynomial, and the sieve that
//! removes them.
//!
//! Every generating form fixes two coordinates of `(x, y, z)` from a pair of
//! loop parameters `0 <= a <= b <= param_bound` and leaves the third free,
//! so `q = M·free + R` with `R = q(·)` at `free = 0`. Because `R < M` in
//! every form, the class `q ≡ R (mod M)` is covered in full.
//!
//! | form | free | fixed coordinates | modulus `M` |
//! |------|------|-------------------|-------------|
//! | 1  | x | y=a, z=b       | 4ab+3a+3b+2 |
//! | 2  | x | y=b, z=a       | 4ab+3a+3b+2 |
//! | 3  | y | x=a, z=b       | 4ab+3a+4b+2 |
//! | 4  | y | x=b, z=a       | 4ab+4a+3b+2 |
//! | 5  | z | x=a, y=b       | 4ab+3a+4b+3 |
//! | 6  | z | x=b, y=a       | 4ab+4a+3b+3 |
//! | 7  | x | y=a, z=b−a     | 4ab−4a²+3b+2 |
//! | 8  | x | y=b−a, z=a     | 4ab−4a²+3b+2 |
//! | 9  | y | x=a, z=b−a     | 4ab−4a²−a+4b+2 |
//! | 10 | z | x=b−a, y=a     | 4ab−4a²+a+3b+3 |
//! | 11 | y | x=b−a, z=a     | 4ab−4a²+a+3b+2 |
//! | 12 | z | x=a, y=b−a     | 4ab−4a²−a+4b+3 |
//! | 13 | x | y=a, z=b−a−1   | 4ab−4a²−4a+3b−1 |
//! | 14 | x | y=b−a−1, z=a   | 4ab−4a²−4a+3b−1 |
//!
//! Forms 7 to 12 are written in the shifted variable `s = free + b`; their
//! raw constant is `R − M·b`. Forms 10 to 12 are only emitted when that raw
//! constant is positive, and forms 13 and 14 only when both `M` and `R` are.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{divisors, WideInt};
use crate::bitmap::Bitmap;
use crate::conjectures::Triple;
use crate::decimal;
use crate::error::{Error, Result};
use crate::identities::{p_poly, q_poly};

/// Primes whose divisibility of `4q + 5` the sieve treats as settling `q`.
pub const DEFAULT_SMALL_PRIMES: [WideInt; 8] = [3, 5, 7, 11, 13, 17, 19, 23];

/// `2·3·5·7·11·13·17·19`.
pub const PRIMORIAL_19: WideInt = 9_699_690;

/// `2·3·5·7·11·13·17·19·23`.
pub const PRIMORIAL_23: WideInt = 223_092_870;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Which construction produced a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassFamily {
    /// One of the fourteen q-forms (1 to 14); members are values of `q`.
    QForm(u8),
    /// A translate of `p` along one axis; members are values of `n`.
    Translate(Axis),
}

impl fmt::Display for ClassFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassFamily::QForm(k) => write!(f, "q{k:02}"),
            ClassFamily::Translate(Axis::X) => f.write_str("nx"),
            ClassFamily::Translate(Axis::Y) => f.write_str("ny"),
            ClassFamily::Translate(Axis::Z) => f.write_str("nz"),
        }
    }
}

impl FromStr for ClassFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Shape(format!("unknown class family {s:?}"));
        match s {
            "nx" => Ok(ClassFamily::Translate(Axis::X)),
            "ny" => Ok(ClassFamily::Translate(Axis::Y)),
            "nz" => Ok(ClassFamily::Translate(Axis::Z)),
            _ => {
                let k: u8 = s
                    .strip_prefix('q')
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?;
                if (1..=14).contains(&k) {
                    Ok(ClassFamily::QForm(k))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl Serialize for ClassFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `members ≡ residue (mod modulus)`, all carrying a witness rebuilt from
/// `family` and the two parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverClass {
    #[serde(with = "decimal")]
    pub modulus: WideInt,
    #[serde(with = "decimal")]
    pub residue: WideInt,
    pub family: ClassFamily,
    #[serde(with = "decimal")]
    pub p1: WideInt,
    #[serde(with = "decimal")]
    pub p2: WideInt,
}

impl CoverClass {
    pub fn contains(&self, v: WideInt) -> bool {
        v >= self.residue && v.rem_euclid(self.modulus) == self.residue
    }

    /// `modulus<TAB>residue<TAB>family<TAB>p1<TAB>p2`.
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.modulus, self.residue, self.family, self.p1, self.p2
        )
    }

    pub fn from_tsv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(Error::Shape(format!(
                "expected 5 tab-separated fields, got {}",
                f.len()
            )));
        }
        let int = |s: &str| decimal::parse(s).map_err(Error::Shape);
        let c = CoverClass {
            modulus: int(f[0])?,
            residue: int(f[1])?,
            family: f[2].parse()?,
            p1: int(f[3])?,
            p2: int(f[4])?,
        };
        if c.modulus < 1 || !(0..c.modulus).contains(&c.residue) {
            return Err(Error::Shape(format!(
                "residue {} outside [0, {})",
                c.residue, c.modulus
            )));
        }
        Ok(c)
    }
}

/// `(M, raw constant)` of form `k` exactly as the appendix writes it.
fn form_raw(k: u8, a: WideInt, b: WideInt) -> (WideInt, WideInt) {
    let (a2, b2) = (a * a, b * b);
    match k {
        1 => (4 * a * b + 3 * a + 3 * b + 2, 4 * a * b + 2 * a + 3 * b),
        2 => (4 * a * b + 3 * a + 3 * b + 2, 4 * a * b + 3 * a + 2 * b),
        3 => (4 * a * b + 3 * a + 4 * b + 2, 3 * a * b + 2 * a + 3 * b),
        4 => (4 * a * b + 4 * a + 3 * b + 2, 3 * a * b + 3 * a + 2 * b),
        5 => (4 * a * b + 3 * a + 4 * b + 3, 3 * a * b + 2 * a + 2 * b),
        6 => (4 * a * b + 4 * a + 3 * b + 3, 3 * a * b + 2 * a + 2 * b),
        7 => (
            4 * a * b - 4 * a2 + 3 * b + 2,
            4 * a2 * b - 4 * a2 - 4 * b2 * a + 4 * a * b - a - 3 * b2 + b,
        ),
        8 => (
            4 * a * b - 4 * a2 + 3 * b + 2,
            4 * a2 * b - 4 * a2 - 4 * b2 * a + 4 * a * b + a - 3 * b2,
        ),
        9 => (
            4 * a * b - 4 * a2 + 4 * b + 2 - a,
            4 * a2 * b - 3 * a2 - 4 * b2 * a + 4 * a * b - a - 4 * b2 + b,
        ),
        10 => (
            4 * a * b - 4 * a2 + a + 3 * b + 3,
            4 * a2 * b - 3 * a2 - 4 * b2 * a + 2 * a * b - 3 * b2 - b,
        ),
        11 => (
            4 * a * b - 4 * a2 + a + 3 * b + 2,
            4 * a2 * b - 3 * a2 - 4 * b2 * a + 2 * a * b - 3 * b2 + a,
        ),
        12 => (
            4 * a * b - 4 * a2 - a + 4 * b + 3,
            4 * a2 * b - 3 * a2 - 4 * b2 * a + 4 * a * b - 4 * b2 - b,
        ),
        13 => (
            -4 * a2 + 4 * a * b - 4 * a + 3 * b - 1,
            -4 * a2 + 4 * a * b - 5 * a + 3 * b - 3,
        ),
        14 => (
            -4 * a2 + 4 * a * b - 4 * a + 3 * b - 1,
            -4 * a2 + 4 * a * b - 3 * a + 2 * b - 2,
        ),
        _ => unreachable!("form {k}"),
    }
}

/// `(x, y, z)` of form `k` at free value `f`.
fn form_point(k: u8, a: WideInt, b: WideInt, f: WideInt) -> Triple {
    match k {
        1 => (f, a, b),
        2 => (f, b, a),
        3 => (a, f, b),
        4 => (b, f, a),
        5 => (a, b, f),
        6 => (b, a, f),
        7 => (f, a, b - a),
        8 => (f, b - a, a),
        9 => (a, f, b - a),
        10 => (b - a, a, f),
        11 => (b - a, f, a),
        12 => (a, b - a, f),
        13 => (f, a, b - a - 1),
        14 => (f, b - a - 1, a),
        _ => unreachable!("form {k}"),
    }
}

/// The class form `k` produces for `(a, b)`, if its guard admits it.
fn form_class(k: u8, a: WideInt, b: WideInt) -> Option<CoverClass> {
    let (m, raw) = form_raw(k, a, b);
    let admitted = match k {
        10..=12 => raw > 0,
        13 | 14 => m > 0 && raw > 0,
        _ => true,
    };
    if !admitted {
        return None;
    }
    let (x, y, z) = form_point(k, a, b, 0);
    Some(CoverClass {
        modulus: m,
        residue: q_poly(x, y, z),
        family: ClassFamily::QForm(k),
        p1: a,
        p2: b,
    })
}

/// Sieve configuration. `modulus_divisor = None` keeps every modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    pub modulus_divisor: Option<WideInt>,
    pub param_bound: WideInt,
    pub small_primes: Vec<WideInt>,
    pub stages: Vec<Vec<CoverClass>>,
}

impl SieveConfig {
    /// A configuration whose class tables are not yet generated.
    pub fn new(modulus_divisor: Option<WideInt>, param_bound: WideInt) -> Self {
        SieveConfig {
            modulus_divisor,
            param_bound,
            small_primes: DEFAULT_SMALL_PRIMES.to_vec(),
            stages: Vec::new(),
        }
    }

    /// One stage per divisor, each generated with this config's bound.
    pub fn with_stages(mut self, divisors: &[Option<WideInt>]) -> Self {
        self.stages = divisors
            .iter()
            .map(|&d| {
                generate_classes(&SieveConfig {
                    modulus_divisor: d,
                    ..self.clone()
                })
            })
            .collect();
        self
    }

    /// The two-pass layout: 19-smooth moduli, then moduli dividing
    /// `PRIMORIAL_23`.
    pub fn standard(param_bound: WideInt) -> Self {
        SieveConfig::new(Some(PRIMORIAL_23), param_bound)
            .with_stages(&[Some(PRIMORIAL_19), Some(PRIMORIAL_23)])
    }

    /// A single stage with no modulus restriction.
    pub fn maximal(param_bound: WideInt) -> Self {
        SieveConfig::new(None, param_bound).with_stages(&[None])
    }

    pub fn classes(&self) -> impl Iterator<Item = &CoverClass> {
        self.stages.iter().flatten()
    }
}

/// Appends `c` unless some class already present covers it.
pub fn subsume_add(mut classes: Vec<CoverClass>, c: CoverClass) -> Vec<CoverClass> {
    let covered = classes
        .iter()
        .any(|o| c.modulus % o.modulus == 0 && c.residue.rem_euclid(o.modulus) == o.residue);
    if !covered {
        classes.push(c);
    }
    classes
}

/// All classes of the fourteen forms for `0 <= a <= b <= param_bound`,
/// restricted to moduli dividing `cfg.modulus_divisor` and deduplicated with
/// the same rule as [`subsume_add`].
pub fn generate_classes(cfg: &SieveConfig) -> Vec<CoverClass> {
    let mut out = Vec::new();
    let mut seen: HashSet<(WideInt, WideInt)> = HashSet::new();
    let mut divisor_cache: HashMap<WideInt, Vec<WideInt>> = HashMap::new();
    for b in 0..=cfg.param_bound {
        for a in 0..=b {
            for k in 1..=14 {
                let Some(c) = form_class(k, a, b) else {
                    continue;
                };
                if cfg.modulus_divisor.is_some_and(|d| d % c.modulus != 0) {
                    continue;
                }
                let divs = divisor_cache
                    .entry(c.modulus)
                    .or_insert_with(|| divisors(c.modulus).expect("modulus is a positive u64"));
                if divs.iter().any(|&d| seen.contains(&(d, c.residue % d))) {
                    continue;
                }
                seen.insert((c.modulus, c.residue));
                out.push(c);
            }
        }
    }
    out
}

/// `(α, β, γ)` for a member of `c`: a q-witness for the q-forms, a
/// p-witness (with `p_poly = member`) for translation classes.
pub fn class_witness(c: &CoverClass, member: WideInt) -> Result<Triple> {
    if !c.contains(member) {
        return Err(Error::domain(format!(
            "{member} is not in the class {} (mod {})",
            c.residue, c.modulus
        )));
    }
    let f = (member - c.residue) / c.modulus;
    let w = match c.family {
        ClassFamily::QForm(k) => form_point(k, c.p1, c.p2, f),
        ClassFamily::Translate(Axis::X) => (f, c.p1, c.p2),
        ClassFamily::Translate(Axis::Y) => (c.p1, f, c.p2),
        ClassFamily::Translate(Axis::Z) => (c.p1, c.p2, f),
    };
    if w.0 < 0 || w.1 < 0 || w.2 < 0 {
        return Err(Error::domain(format!(
            "class parameters give a negative coordinate {w:?}"
        )));
    }
    Ok(w)
}

/// Classes of `n` obtained by translating `p` along one axis from base
/// points with coordinates in `{0, 1}`. The step along an axis is the
/// coefficient of that coordinate in `p`:
///
/// ```text
/// f1(y,z) = (4y+3)(4z+3) − 1
/// f2(x,z) = 4((x+1)(4z+3) − 1)
/// f3(x,y) = 4(x+1)(4y+3)
/// ```
///
/// Base points whose `p`-value is composite are skipped, and the rest are
/// deduplicated by subsumption in order of increasing modulus.
pub fn translation_classes() -> Vec<CoverClass> {
    let mut cands = Vec::new();
    for (u, v) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for (axis, step, base) in [
            (Axis::X, (4 * u + 3) * (4 * v + 3) - 1, p_poly(0, u, v)),
            (Axis::Y, 4 * ((u + 1) * (4 * v + 3) - 1), p_poly(u, 0, v)),
            (Axis::Z, 4 * (u + 1) * (4 * v + 3), p_poly(u, v, 0)),
        ] {
            if crate::arith::is_prime(base) {
                cands.push(CoverClass {
                    modulus: step,
                    residue: base,
                    family: ClassFamily::Translate(axis),
                    p1: u,
                    p2: v,
                });
            }
        }
    }
    cands.sort_by_key(|c| (c.modulus, c.residue));
    cands.into_iter().fold(Vec::new(), subsume_add)
}

/// The `q` in `[q_from, q_to]` settled neither by a small prime factor of
/// `4q + 5` (other than `4q + 5` itself being that prime) nor by any class in
/// `cfg.stages`.
pub fn sieve_survivors(q_from: WideInt, q_to: WideInt, cfg: &SieveConfig) -> Result<Vec<WideInt>> {
    if q_from < 0 || q_from > q_to {
        return Err(Error::domain(format!("bad range [{q_from}, {q_to}]")));
    }
    let len = usize::try_from(q_to - q_from + 1).map_err(|_| Error::domain("range too large"))?;
    let mut hit = Bitmap::new(len);
    let mut mark = |start: WideInt, step: WideInt, skip: Option<WideInt>| {
        let first = if start >= q_from {
            start
        } else {
            start + (q_from - start + step - 1) / step * step
        };
        let mut q = first;
        while q <= q_to {
            if Some(q) != skip {
                hit.set((q - q_from) as usize);
            }
            q += step;
        }
    };
    for &p in &cfg.small_primes {
        if p % 2 == 0 {
            continue;
        }
        if let Some(r) = (0..p).find(|&q| (4 * q + 5) % p == 0) {
            // 4q + 5 = p itself is prime, not settled
            let own = ((p - 5) % 4 == 0 && p >= 5).then(|| (p - 5) / 4);
            mark(r, p, own);
        }
    }
    for c in cfg.classes() {
        mark(c.residue, c.modulus, None);
    }
    Ok((0..len)
        .filter(|&i| !hit.get(i))
        .map(|i| q_from + i as WideInt)
        .collect())
}

/// Class lookup by modulus, for repeated single-`q` queries.
#[derive(Clone, Debug, Default)]
pub struct ClassIndex {
    by_modulus: BTreeMap<WideInt, HashMap<WideInt, CoverClass>>,
}

impl ClassIndex {
    /// Indexes the q-form classes; translation classes are ignored.
    pub fn new<'a>(classes: impl IntoIterator<Item = &'a CoverClass>) -> Self {
        let mut by_modulus: BTreeMap<WideInt, HashMap<WideInt, CoverClass>> = BTreeMap::new();
        for c in classes {
            if matches!(c.family, ClassFamily::QForm(_)) {
                by_modulus
                    .entry(c.modulus)
                    .or_default()
                    .entry(c.residue)
                    .or_insert(*c);
            }
        }
        ClassIndex { by_modulus }
    }

    /// The first class, by increasing modulus, containing `q`.
    pub fn find(&self, q: WideInt) -> Option<&CoverClass> {
        self.by_modulus
            .iter()
            .find_map(|(m, rs)| rs.get(&q.rem_euclid(*m)).filter(|c| c.contains(q)))
    }

    pub fn len(&self) -> usize {
        self.by_modulus.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_modulus.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(m: WideInt, r: WideInt) -> CoverClass {
        CoverClass {
            modulus: m,
            residue: r,
            family: ClassFamily::QForm(1),
            p1: 0,
            p2: 0,
        }
    }

    #[test]
    fn forms_match_the_raw_polynomials() {
        for b in 0..25 {
            for a in 0..=b {
                for k in 1..=14u8 {
                    let (m, raw) = form_raw(k, a, b);
                    let shift = if (7..=12).contains(&k) { b } else { 0 };
                    let (x, y, z) = form_point(k, a, b, 0);
                    if k >= 13 && m <= 0 {
                        continue;
                    }
                    assert!(x >= 0 && y >= 0 && z >= 0, "form {k} ({a},{b})");
                    let base = q_poly(x, y, z);
                    assert_eq!(raw, base - m * shift, "form {k} ({a},{b})");
                    assert!((0..m).contains(&base));
                    for f in 0..4 {
                        let (x, y, z) = form_point(k, a, b, f);
                        assert_eq!(q_poly(x, y, z), m * f + base);
                    }
                }
            }
        }
    }

    #[test]
    fn generate_examples() {
        assert_eq!(
            form_class(1, 0, 0).map(|c| (c.modulus, c.residue)),
            Some((2, 0))
        );
        // q(x,0,1) = 5x + 3 and q(x,1,0) = 5x + 2
        assert_eq!(
            form_class(1, 0, 1).map(|c| (c.modulus, c.residue)),
            Some((5, 3))
        );
        assert_eq!(
            form_class(2, 0, 1).map(|c| (c.modulus, c.residue)),
            Some((5, 2))
        );
        let cs = generate_classes(&SieveConfig::new(Some(PRIMORIAL_19), 3));
        assert!(cs.iter().any(|c| (c.modulus, c.residue) == (2, 0)));
        assert!(cs.iter().any(|c| (c.modulus, c.residue) == (5, 3)));
        assert!(cs.iter().all(|c| PRIMORIAL_19 % c.modulus == 0));
    }

    #[test]
    fn subsume_examples() {
        assert_eq!(subsume_add(vec![cls(2, 0)], cls(4, 2)).len(), 1);
        assert_eq!(subsume_add(vec![cls(2, 0)], cls(3, 1)).len(), 2);
        assert_eq!(subsume_add(vec![cls(5, 2)], cls(5, 2)).len(), 1);
    }

    #[test]
    fn witness_examples() {
        let c53 = form_class(1, 0, 1).unwrap();
        assert_eq!(class_witness(&c53, 3).unwrap(), (0, 0, 1));
        assert_eq!(class_witness(&c53, 8).unwrap(), (1, 0, 1));
        let c52 = form_class(2, 0, 1).unwrap();
        assert_eq!(class_witness(&c52, 2).unwrap(), (0, 1, 0));
        assert!(class_witness(&c53, 4).is_err());
    }

    #[test]
    fn translation_examples() {
        let got: HashSet<_> = translation_classes()
            .iter()
            .map(|c| (c.modulus, c.residue))
            .collect();
        let want: HashSet<_> = [(8, 5), (12, 5), (20, 13), (20, 17), (28, 13), (52, 37)].into();
        assert_eq!(got, want);
        for c in translation_classes() {
            for t in 0..20 {
                let n = c.residue + c.modulus * t;
                let (a, b, g) = class_witness(&c, n).unwrap();
                assert_eq!(p_poly(a, b, g), n);
            }
        }
    }

    #[test]
    fn survivor_examples() {
        let cfg = SieveConfig::standard(6);
        let s = sieve_survivors(0, 40, &cfg).unwrap();
        assert!(!s.contains(&3));
        assert!(!s.contains(&25));
        // 25 = 4·5 + 5 is settled by its factor 5, but no class covers it
        assert!(!s.contains(&5));
        let bare = SieveConfig {
            small_primes: Vec::new(),
            ..cfg
        };
        assert!(sieve_survivors(0, 40, &bare).unwrap().contains(&5));
    }

    #[test]
    fn tsv_roundtrip() {
        let c = form_class(9, 2, 5).unwrap();
        assert_eq!(CoverClass::from_tsv(&c.to_tsv()).unwrap(), c);
        assert!(CoverClass::from_tsv("5\t7\tq01\t0\t1").is_err());
        assert!(CoverClass::from_tsv("5\t3\tq15\t0\t1").is_err());
    }

    #[test]
    fn index_finds_smallest_modulus() {
        let cfg = SieveConfig::standard(4);
        let idx = ClassIndex::new(cfg.classes());
        assert_eq!(idx.find(0).unwrap().modulus, 2);
        let c = idx.find(3).unwrap();
        let (a, b, g) = class_witness(c, 3).unwrap();
        assert_eq!(q_poly(a, b, g), 3);
    }
}
